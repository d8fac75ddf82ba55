//! The book's chapters, compiled as doctests so their listings stay correct.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/running.md")]
pub mod running {}

#[doc = include_str!("../../../book/src/fusion.md")]
pub mod fusion {}

#[doc = include_str!("../../../book/src/platform.md")]
pub mod platform {}

#[doc = include_str!("../../../book/src/tracking.md")]
pub mod tracking {}

#[doc = include_str!("../../../book/src/audio.md")]
pub mod audio {}

#[doc = include_str!("../../../book/src/airdata.md")]
pub mod airdata {}

#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}

#[doc = include_str!("../../../book/src/evaluation.md")]
pub mod evaluation {}

#[doc = include_str!("../../../book/src/telemetry.md")]
pub mod telemetry {}

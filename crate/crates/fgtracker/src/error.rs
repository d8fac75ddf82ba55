use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrackerError {
    #[error("frame is {got_w}x{got_h}, model expects {want_w}x{want_h}")]
    DimensionMismatch { want_w: u32, want_h: u32, got_w: u32, got_h: u32 },
    #[error("pixel buffer holds {got} values, {width}x{height} needs {want}")]
    BadBuffer { width: u32, height: u32, want: usize, got: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Geometry(#[from] skyfence_core::CoreError),
    #[error("PGM I/O: {0}")]
    Image(#[from] image::ImageError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("expected an 8-bit grayscale image")]
    NotGray,
}

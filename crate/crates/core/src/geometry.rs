//! Camera geometry.
//!
//! All cameras use a linear (equirectangular) pixel-to-angle mapping, the
//! fish-eye included. Azimuth grows to the right, elevation grows upward and
//! `y = 0` is the top image row:
//!
//! ```text
//! azimuth   = (x / W - 0.5) * hfov
//! elevation = (0.5 - y / H) * vfov
//! ```

use serde::{Deserialize, Serialize};

use crate::CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub width_px: u32,
    pub height_px: u32,
    pub hfov_deg: f64,
    pub vfov_deg: f64,
}

impl CameraModel {
    pub fn new(width_px: u32, height_px: u32, hfov_deg: f64, vfov_deg: f64) -> Result<Self, CoreError> {
        let cam = CameraModel { width_px, height_px, hfov_deg, vfov_deg };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.width_px == 0 || self.height_px == 0 {
            return Err(CoreError::InvalidCamera("image dimensions must be at least 1 px".into()));
        }
        if !(self.hfov_deg > 0.0 && self.hfov_deg <= 360.0) {
            return Err(CoreError::InvalidCamera(format!("hfov {} not in (0, 360]", self.hfov_deg)));
        }
        if !(self.vfov_deg > 0.0 && self.vfov_deg <= 180.0) {
            return Err(CoreError::InvalidCamera(format!("vfov {} not in (0, 180]", self.vfov_deg)));
        }
        Ok(())
    }

    /// Thermal camera: 320x256 detector, 24°x19° field of view.
    pub fn ircam() -> Self {
        CameraModel { width_px: 320, height_px: 256, hfov_deg: 24.0, vfov_deg: 19.0 }
    }

    /// Visible camera: 1280x720 stream, zoom set to match the thermal camera.
    pub fn vcam() -> Self {
        CameraModel { width_px: 1280, height_px: 720, hfov_deg: 24.0, vfov_deg: 19.0 }
    }

    /// Fish-eye cueing camera: 1024x768 stream covering 180°x90°.
    pub fn fisheye() -> Self {
        CameraModel { width_px: 1024, height_px: 768, hfov_deg: 180.0, vfov_deg: 90.0 }
    }

    pub fn px_per_deg_h(&self) -> f64 {
        f64::from(self.width_px) / self.hfov_deg
    }

    pub fn px_per_deg_v(&self) -> f64 {
        f64::from(self.height_px) / self.vfov_deg
    }

    pub fn contains_pixel(&self, x: f64, y: f64) -> bool {
        (0.0..=f64::from(self.width_px)).contains(&x) && (0.0..=f64::from(self.height_px)).contains(&y)
    }

    pub fn contains_offset(&self, offset: AngularOffset) -> bool {
        offset.azimuth_deg.abs() <= self.hfov_deg / 2.0 && offset.elevation_deg.abs() <= self.vfov_deg / 2.0
    }
}

/// Axis-aligned box, top-left corner plus size, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BoundingBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        BoundingBox { x, y, w: w.max(0.0), h: h.max(0.0) }
    }

    pub fn centered(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        BoundingBox::new(cx - w / 2.0, cy - h / 2.0, w, h)
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    /// Intersection over union; zero when either box is empty.
    pub fn iou(&self, other: &BoundingBox) -> f64 {
        let iw = (self.right().min(other.right()) - self.x.max(other.x)).max(0.0);
        let ih = (self.bottom().min(other.bottom()) - self.y.max(other.y)).max(0.0);
        let inter = iw * ih;
        let union = self.area() + other.area() - inter;
        if union > 0.0 {
            inter / union
        } else {
            0.0
        }
    }

    /// Intersection with the image extent of `cam`. Fully outside boxes
    /// collapse to zero size on the nearest edge.
    pub fn clamp_to(&self, cam: &CameraModel) -> BoundingBox {
        let (w, h) = (f64::from(cam.width_px), f64::from(cam.height_px));
        let x0 = self.x.clamp(0.0, w);
        let y0 = self.y.clamp(0.0, h);
        let x1 = self.right().clamp(0.0, w);
        let y1 = self.bottom().clamp(0.0, h);
        BoundingBox { x: x0, y: y0, w: (x1 - x0).max(0.0), h: (y1 - y0).max(0.0) }
    }
}

/// Signed angles from a camera's boresight, degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AngularOffset {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
}

impl AngularOffset {
    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Self {
        AngularOffset { azimuth_deg, elevation_deg }
    }

    pub fn magnitude(&self) -> f64 {
        self.azimuth_deg.hypot(self.elevation_deg)
    }
}

pub fn pixel_to_offset(cam: &CameraModel, x_px: f64, y_px: f64) -> Result<AngularOffset, CoreError> {
    if !cam.contains_pixel(x_px, y_px) {
        return Err(CoreError::OutsideImage {
            x: x_px,
            y: y_px,
            width: cam.width_px,
            height: cam.height_px,
        });
    }
    Ok(AngularOffset {
        azimuth_deg: (x_px / f64::from(cam.width_px) - 0.5) * cam.hfov_deg,
        elevation_deg: (0.5 - y_px / f64::from(cam.height_px)) * cam.vfov_deg,
    })
}

/// Inverse of [`pixel_to_offset`].
pub fn offset_to_pixel(cam: &CameraModel, offset: AngularOffset) -> Result<(f64, f64), CoreError> {
    if !cam.contains_offset(offset) {
        return Err(CoreError::OutsideFieldOfView {
            azimuth_deg: offset.azimuth_deg,
            elevation_deg: offset.elevation_deg,
        });
    }
    let x = (offset.azimuth_deg / cam.hfov_deg + 0.5) * f64::from(cam.width_px);
    let y = (0.5 - offset.elevation_deg / cam.vfov_deg) * f64::from(cam.height_px);
    Ok((x, y))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn ir_center_and_edge() {
        let ir = CameraModel::ircam();
        let c = pixel_to_offset(&ir, 160.0, 128.0).unwrap();
        assert!(close(c.azimuth_deg, 0.0) && close(c.elevation_deg, 0.0));
        let e = pixel_to_offset(&ir, 320.0, 128.0).unwrap();
        assert!(close(e.azimuth_deg, 12.0) && close(e.elevation_deg, 0.0));
    }

    #[test]
    fn fisheye_bottom_left_corner() {
        let f = CameraModel::fisheye();
        let o = pixel_to_offset(&f, 0.0, 768.0).unwrap();
        assert!(close(o.azimuth_deg, -90.0));
        assert!(close(o.elevation_deg, -45.0));
    }

    #[test]
    fn rejects_out_of_image() {
        let ir = CameraModel::ircam();
        assert!(pixel_to_offset(&ir, -0.1, 10.0).is_err());
        assert!(pixel_to_offset(&ir, 10.0, 256.5).is_err());
        assert!(offset_to_pixel(&ir, AngularOffset::new(12.5, 0.0)).is_err());
    }

    #[test]
    fn camera_validation() {
        assert!(CameraModel::new(0, 10, 10.0, 10.0).is_err());
        assert!(CameraModel::new(10, 10, 361.0, 10.0).is_err());
        assert!(CameraModel::new(10, 10, 10.0, 0.0).is_err());
        assert!(CameraModel::new(10, 10, 360.0, 180.0).is_ok());
    }

    #[test]
    fn clamp_keeps_box_in_image() {
        let ir = CameraModel::ircam();
        let b = BoundingBox::new(-5.0, 250.0, 20.0, 20.0).clamp_to(&ir);
        assert_eq!(b, BoundingBox { x: 0.0, y: 250.0, w: 15.0, h: 6.0 });
        let gone = BoundingBox::new(400.0, 10.0, 5.0, 5.0).clamp_to(&ir);
        assert_eq!(gone.area(), 0.0);
    }

    #[test]
    fn iou_examples() {
        let a = BoundingBox::new(0.0, 0.0, 10.0, 10.0);
        assert_eq!(a.iou(&a), 1.0);
        assert_eq!(a.iou(&BoundingBox::new(10.0, 0.0, 10.0, 10.0)), 0.0);
        let half = BoundingBox::new(5.0, 0.0, 10.0, 10.0);
        assert!((a.iou(&half) - 50.0 / 150.0).abs() < 1e-12);
        assert_eq!(BoundingBox::default().iou(&BoundingBox::default()), 0.0);
    }

    fn any_camera() -> impl Strategy<Value = CameraModel> {
        (1u32..4000, 1u32..4000, 0.5f64..360.0, 0.5f64..180.0)
            .prop_map(|(w, h, hf, vf)| CameraModel::new(w, h, hf, vf).unwrap())
    }

    proptest! {
        #[test]
        fn odd_symmetry_about_center(cam in any_camera(), fx in 0.0f64..=0.5, fy in 0.0f64..=0.5) {
            let (w, h) = (f64::from(cam.width_px), f64::from(cam.height_px));
            let (dx, dy) = (fx * w, fy * h);
            let a = pixel_to_offset(&cam, w / 2.0 + dx, h / 2.0 + dy).unwrap();
            let b = pixel_to_offset(&cam, w / 2.0 - dx, h / 2.0 - dy).unwrap();
            prop_assert!((a.azimuth_deg + b.azimuth_deg).abs() < 1e-9);
            prop_assert!((a.elevation_deg + b.elevation_deg).abs() < 1e-9);
        }

        #[test]
        fn inverse_round_trip(cam in any_camera(), fx in 0.0f64..=1.0, fy in 0.0f64..=1.0) {
            let (x, y) = (fx * f64::from(cam.width_px), fy * f64::from(cam.height_px));
            let o = pixel_to_offset(&cam, x, y).unwrap();
            let (x2, y2) = offset_to_pixel(&cam, o).unwrap();
            prop_assert!((x - x2).abs() < 1e-9, "x {} vs {}", x, x2);
            prop_assert!((y - y2).abs() < 1e-9, "y {} vs {}", y, y2);
        }
    }
}

use serde::{Deserialize, Serialize};
use skyfence_core::{bin_of_width, offset_to_pixel, AngularOffset, BoundingBox, CameraModel, DriBin};
use skyfence_platform::PlatformPose;

use crate::SimError;

/// Wraps an angle to `(-180, 180]`.
pub fn wrap_deg(a: f64) -> f64 {
    let w = (a + 180.0).rem_euclid(360.0) - 180.0;
    if w == -180.0 {
        180.0
    } else {
        w
    }
}

/// Azimuth (clockwise from north), elevation and range of an east/north/up
/// position seen from the origin.
pub fn direction(pos: [f64; 3]) -> (f64, f64, f64) {
    let [x, y, z] = pos;
    let horiz = x.hypot(y);
    (x.atan2(y).to_degrees(), z.atan2(horiz).to_degrees(), horiz.hypot(z))
}

/// Unit vector for an azimuth/elevation pair, inverse of [`direction`].
pub fn unit_vector(az_deg: f64, el_deg: f64) -> [f64; 3] {
    let (az, el) = (az_deg.to_radians(), el_deg.to_radians());
    [el.cos() * az.sin(), el.cos() * az.cos(), el.sin()]
}

/// Angle a `width_m` object subtends at `range_m`, degrees.
pub fn subtense_deg(width_m: f64, range_m: f64) -> f64 {
    width_m.atan2(range_m).to_degrees()
}

/// Range at which a `width_m` object is `width_px` wide in `cam`.
pub fn range_for_width(width_m: f64, width_px: f64, cam: &CameraModel) -> f64 {
    width_m / (width_px / cam.px_per_deg_h()).to_radians().tan()
}

/// Where a target lands in a camera image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    /// Offset of the target centre from the camera boresight.
    pub offset: AngularOffset,
    /// Unclamped box; may extend past the image edge.
    pub bbox: BoundingBox,
    pub width_px: f64,
    /// Width the target would have in the thermal camera, which defines the
    /// distance bin for every sensor.
    pub ir_width_px: f64,
    pub bin: DriBin,
    pub range_m: f64,
}

/// Projects a target at `pos` into a camera pointed at `pose`.
///
/// Returns `None` when the target centre is outside the field of view.
pub fn project(pos: [f64; 3], pose: PlatformPose, cam: &CameraModel, width_m: f64) -> Result<Option<Projection>, SimError> {
    let (az, el, range) = direction(pos);
    if range == 0.0 {
        return Err(SimError::ZeroRange);
    }
    let offset = AngularOffset::new(wrap_deg(az - pose.pan_deg), el - pose.tilt_deg);
    let Ok((cx, cy)) = offset_to_pixel(cam, offset) else {
        return Ok(None);
    };
    let sub = subtense_deg(width_m, range);
    let (w, h) = (sub * cam.px_per_deg_h(), sub * cam.px_per_deg_v());
    let ir_width_px = sub * CameraModel::ircam().px_per_deg_h();
    Ok(Some(Projection {
        offset,
        bbox: BoundingBox::centered(cx, cy, w, h),
        width_px: w,
        ir_width_px,
        bin: bin_of_width(ir_width_px),
        range_m: range,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drone_at_fifteen_metres_is_fifteen_pixels() {
        let p = project([0.0, 15.3, 0.0], PlatformPose::new(0.0, 0.0), &CameraModel::ircam(), 0.3).unwrap().unwrap();
        assert!((p.width_px - 14.98).abs() < 0.01, "{}", p.width_px);
        assert!((p.width_px - 15.0).abs() <= 0.5);
        assert_eq!(p.bin, DriBin::Medium);
        let (cx, cy) = p.bbox.center();
        assert!((cx - 160.0).abs() < 1e-9 && (cy - 128.0).abs() < 1e-9);
    }

    #[test]
    fn behind_is_not_visible() {
        let cam = CameraModel::ircam();
        assert_eq!(project([0.0, -50.0, 0.0], PlatformPose::new(0.0, 0.0), &cam, 0.3).unwrap(), None);
        assert!(project([0.0, -50.0, 0.0], PlatformPose::new(180.0, 0.0), &cam, 0.3).unwrap().is_some());
        assert!(matches!(project([0.0; 3], PlatformPose::default(), &cam, 0.3), Err(SimError::ZeroRange)));
    }

    #[test]
    fn direction_conventions() {
        let (az, el, r) = direction([10.0, 0.0, 0.0]);
        assert!((az - 90.0).abs() < 1e-12 && el == 0.0 && r == 10.0);
        let v = unit_vector(-30.0, 20.0);
        let (az, el, r) = direction(v);
        assert!((az + 30.0).abs() < 1e-9 && (el - 20.0).abs() < 1e-9 && (r - 1.0).abs() < 1e-12);
        assert_eq!(wrap_deg(-180.0), 180.0);
        assert_eq!(wrap_deg(370.0), 10.0);
    }

    #[test]
    fn image_right_is_positive_azimuth() {
        let cam = CameraModel::ircam();
        let p = project([5.0, 100.0, 0.0], PlatformPose::default(), &cam, 1.0).unwrap().unwrap();
        assert!(p.bbox.center().0 > 160.0);
        let up = project([0.0, 100.0, 5.0], PlatformPose::default(), &cam, 1.0).unwrap().unwrap();
        assert!(up.bbox.center().1 < 128.0);
    }

    #[test]
    fn range_for_width_inverts_projection() {
        let cam = CameraModel::ircam();
        let r = range_for_width(0.4, 9.0, &cam);
        let p = project([0.0, r, 0.0], PlatformPose::default(), &cam, 0.4).unwrap().unwrap();
        assert!((p.width_px - 9.0).abs() < 1e-3);
    }
}

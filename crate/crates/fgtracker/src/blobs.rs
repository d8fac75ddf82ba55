use skyfence_core::BoundingBox;

use crate::ForegroundMask;

/// 8-connected foreground component.
#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    /// Mean pixel coordinate (column, row).
    pub centroid: (f64, f64),
    pub bbox: BoundingBox,
    pub area_px: usize,
}

/// Connected components of `mask` (8-connectivity) with at least `min_area`
/// pixels, in raster order of their first pixel.
pub fn extract_blobs(mask: &ForegroundMask, min_area: usize) -> Vec<Blob> {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let bits = mask.bits();
    let mut seen = vec![false; bits.len()];
    let mut stack = Vec::new();
    let mut blobs = Vec::new();

    for start in 0..bits.len() {
        if !bits[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);

        let (mut n, mut sx, mut sy) = (0usize, 0.0f64, 0.0f64);
        let (mut x0, mut y0, mut x1, mut y1) = (i64::MAX, i64::MAX, i64::MIN, i64::MIN);
        while let Some(i) = stack.pop() {
            let (x, y) = (i as i64 % w, i as i64 / w);
            n += 1;
            sx += x as f64;
            sy += y as f64;
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w || ny >= h {
                        continue;
                    }
                    let j = (ny * w + nx) as usize;
                    if bits[j] && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }

        if n >= min_area {
            blobs.push(Blob {
                centroid: (sx / n as f64, sy / n as f64),
                bbox: BoundingBox::new(x0 as f64, y0 as f64, (x1 - x0 + 1) as f64, (y1 - y0 + 1) as f64),
                area_px: n,
            });
        }
    }
    blobs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask_with(w: u32, h: u32, on: &[(u32, u32)]) -> ForegroundMask {
        let mut m = ForegroundMask::empty(w, h);
        for &(x, y) in on {
            m.set(x, y, true);
        }
        m
    }

    fn square(x0: u32, y0: u32, side: u32) -> Vec<(u32, u32)> {
        (y0..y0 + side).flat_map(|y| (x0..x0 + side).map(move |x| (x, y))).collect()
    }

    #[test]
    fn empty_mask() {
        assert!(extract_blobs(&ForegroundMask::empty(20, 20), 1).is_empty());
    }

    #[test]
    fn single_square() {
        let blobs = extract_blobs(&mask_with(30, 30, &square(10, 10, 3)), 4);
        assert_eq!(blobs.len(), 1);
        assert_eq!(blobs[0].area_px, 9);
        assert_eq!(blobs[0].centroid, (11.0, 11.0));
        assert_eq!(blobs[0].bbox, BoundingBox::new(10.0, 10.0, 3.0, 3.0));
    }

    #[test]
    fn separated_squares() {
        let mut on = square(2, 2, 3);
        on.extend(square(7, 2, 3)); // column gap of 2 px
        assert_eq!(extract_blobs(&mask_with(20, 20, &on), 4).len(), 2);
    }

    #[test]
    fn diagonal_touch_joins() {
        let mut on = square(2, 2, 2);
        on.extend(square(4, 4, 2));
        let blobs = extract_blobs(&mask_with(20, 20, &on), 1);
        assert_eq!(blobs.len(), 1);
        assert_eq!(blobs[0].area_px, 8);
    }

    #[test]
    fn min_area_filters_specks() {
        let mut on = vec![(0, 0), (5, 5), (6, 5)];
        on.extend(square(10, 10, 2));
        let blobs = extract_blobs(&mask_with(20, 20, &on), 4);
        assert_eq!(blobs.len(), 1);
        assert_eq!(blobs[0].area_px, 4);
    }

    #[test]
    fn areas_partition_the_mask() {
        let mut on = square(0, 0, 4);
        on.extend(square(10, 0, 2));
        on.extend([(19, 19), (18, 18), (17, 19)]);
        let m = mask_with(20, 20, &on);
        let total: usize = extract_blobs(&m, 1).iter().map(|b| b.area_px).sum();
        assert_eq!(total, m.count());
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::Volume;

/// Display window: values in `[center - width/2, center + width/2]` map to 0..255.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub center: f64,
    pub width: f64,
}

impl Window {
    pub const CT_SOFT_TISSUE: Window = Window {
        center: 40.0,
        width: 400.0,
    };
    pub const NORMALIZED: Window = Window {
        center: 0.0,
        width: 2.0,
    };

    fn gray(&self, v: f64) -> u8 {
        let lo = self.center - self.width / 2.0;
        let t = ((v - lo) / self.width).clamp(0.0, 1.0);
        (t * 255.0).round() as u8
    }
}

/// Renders the slice `index` orthogonal to `axis` (0 = x, 1 = y, 2 = z) as an
/// 8-bit grayscale PNG.
pub fn render_slice_png(v: &Volume, axis: usize, index: usize, window: Window) -> Result<Vec<u8>> {
    let [nx, ny, nz] = v.dims();
    if axis > 2 || index >= v.dims()[axis] {
        return Err(Error::InvalidArgument(format!(
            "slice {index} on axis {axis} outside {:?}",
            v.dims()
        )));
    }
    if !(window.width > 0.0) {
        return Err(Error::InvalidArgument("window width must be positive".into()));
    }
    let (w, h) = match axis {
        0 => (ny, nz),
        1 => (nx, nz),
        _ => (nx, ny),
    };
    let mut pixels = Vec::with_capacity(w * h);
    for r in 0..h {
        for c in 0..w {
            let value = match axis {
                0 => v.get(index, c, r),
                1 => v.get(c, index, r),
                _ => v.get(c, r, index),
            };
            pixels.push(window.gray(value));
        }
    }
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, w as u32, h as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc
            .write_header()
            .map_err(|e| Error::Format(format!("png: {e}")))?;
        writer
            .write_image_data(&pixels)
            .map_err(|e| Error::Format(format!("png: {e}")))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::{Geometry, IntensityKind};

    #[test]
    fn renders_each_axis() {
        let g = Geometry::isotropic([4, 3, 2]);
        let v = Volume::from_fn(g, IntensityKind::Normalized, |x, _, _| x as f64 / 3.0 * 2.0 - 1.0)
            .unwrap();
        for axis in 0..3 {
            let png = render_slice_png(&v, axis, 1, Window::NORMALIZED).unwrap();
            assert_eq!(&png[1..4], b"PNG");
        }
        assert!(render_slice_png(&v, 2, 2, Window::NORMALIZED).is_err());
    }

    #[test]
    fn window_maps_to_bytes() {
        let w = Window::NORMALIZED;
        assert_eq!(w.gray(-1.0), 0);
        assert_eq!(w.gray(1.0), 255);
        assert_eq!(w.gray(5.0), 255);
    }
}

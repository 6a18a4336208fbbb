//! Separable convolution with half-sample symmetric ("reflect") boundaries.

use super::{Dims, Volume};
use crate::error::{Error, Result};

/// Kernel support in standard deviations.
pub const TRUNCATE_SIGMAS: f64 = 4.0;

/// Maps an out-of-range index onto `[0, n)` by mirroring about the edges
/// (`d c b a | a b c d | d c b a`), repeating for offsets larger than `n`.
#[inline]
pub fn reflect_index(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let mut m = i.rem_euclid(period);
    if m >= n {
        m = period - 1 - m;
    }
    m as usize
}

/// Sampled Gaussian on `[-r, r]` with `r = ceil(4σ)`, normalized to unit sum.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (TRUNCATE_SIGMAS * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Convolves a dense x-fastest grid along each axis with an odd-length kernel
/// centred on its middle tap. `None` leaves that axis untouched.
pub fn convolve_separable(data: &[f64], dims: Dims, kernels: [Option<&[f64]>; 3]) -> Vec<f64> {
    let mut cur = data.to_vec();
    let mut line = Vec::new();
    for (axis, kernel) in kernels.iter().enumerate() {
        let Some(kernel) = kernel else { continue };
        debug_assert!(kernel.len() % 2 == 1);
        let n = dims[axis];
        let stride = match axis {
            0 => 1,
            1 => dims[0],
            _ => dims[0] * dims[1],
        };
        let radius = (kernel.len() / 2) as isize;
        let mut out = vec![0.0; cur.len()];
        // Offsets of every line start along this axis.
        let starts: Vec<usize> = (0..cur.len())
            .filter(|&i| (i / stride) % n == 0)
            .collect();
        for start in starts {
            line.clear();
            line.extend((0..n).map(|i| cur[start + i * stride]));
            for i in 0..n {
                let mut acc = 0.0;
                for (k, w) in kernel.iter().enumerate() {
                    let j = reflect_index(i as isize + k as isize - radius, n);
                    acc += w * line[j];
                }
                out[start + i * stride] = acc;
            }
        }
        cur = out;
    }
    cur
}

/// Separable Gaussian smoothing with σ = `blur_factor` voxels.
pub fn gaussian_blur(v: &Volume, blur_factor: f64) -> Result<Volume> {
    if !(blur_factor > 0.0 && blur_factor.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "blur factor must be positive, got {blur_factor}"
        )));
    }
    let k = gaussian_kernel(blur_factor);
    let data = convolve_separable(v.values(), v.dims(), [Some(&k), Some(&k), Some(&k)]);
    // A unit-sum positive kernel yields convex combinations, but rounding can
    // step a hair outside the input range.
    let (lo, hi) = v.min_max();
    let data = data.into_iter().map(|x| x.clamp(lo, hi)).collect();
    Ok(Volume::from_parts_unchecked(*v.geometry(), data, v.kind()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::{Geometry, IntensityKind};

    #[test]
    fn reflect_mirrors_edges() {
        let n = 4;
        let got: Vec<usize> = (-5..9).map(|i| reflect_index(i, n)).collect();
        assert_eq!(got, vec![3, 3, 2, 1, 0, 0, 1, 2, 3, 3, 2, 1, 0, 0]);
        assert_eq!(reflect_index(0, 1), 0);
        assert_eq!(reflect_index(-7, 1), 0);
    }

    #[test]
    fn kernel_is_normalized_and_truncated() {
        let k = gaussian_kernel(2.0);
        assert_eq!(k.len(), 17);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(k[0], k[16]);
    }

    #[test]
    fn constant_volume_unchanged() {
        let g = Geometry::isotropic([5, 4, 3]);
        let v = Volume::filled(g, 7.25, IntensityKind::Arbitrary).unwrap();
        let out = gaussian_blur(&v, 25.0).unwrap();
        for x in out.values() {
            assert!((x - 7.25).abs() < 1e-12);
        }
    }

    #[test]
    fn impulse_gives_sampled_kernel() {
        let sigma = 1.2;
        let g = Geometry::isotropic([15, 15, 15]);
        let v = Volume::from_fn(g, IntensityKind::Arbitrary, |x, y, z| {
            f64::from(u8::from(x == 7 && y == 7 && z == 7))
        })
        .unwrap();
        let out = gaussian_blur(&v, sigma).unwrap();
        // direct evaluation of the normalized, truncated 3D kernel
        let r = (4.0 * sigma).ceil() as i64;
        let norm: f64 = (-r..=r).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).sum();
        let g1 = |d: i64| {
            if d.abs() > r {
                0.0
            } else {
                (-(d * d) as f64 / (2.0 * sigma * sigma)).exp() / norm
            }
        };
        for z in 0..15 {
            for y in 0..15 {
                for x in 0..15 {
                    let expect = g1(x - 7) * g1(y - 7) * g1(z - 7);
                    let got = out.get(x as usize, y as usize, z as usize);
                    assert!((got - expect).abs() < 1e-15, "({x},{y},{z}) {got} vs {expect}");
                }
            }
        }
    }

    #[test]
    fn interior_mass_preserved() {
        let g = Geometry::isotropic([21, 21, 21]);
        let v = Volume::from_fn(g, IntensityKind::Arbitrary, |x, y, z| {
            if (9..12).contains(&x) && (9..12).contains(&y) && (10..11).contains(&z) {
                (x + y + z) as f64
            } else {
                0.0
            }
        })
        .unwrap();
        let out = gaussian_blur(&v, 1.5).unwrap();
        let a: f64 = v.values().iter().sum();
        let b: f64 = out.values().iter().sum();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn rejects_non_positive_factor() {
        let v = Volume::filled(Geometry::isotropic([2, 2, 2]), 0.0, IntensityKind::Arbitrary).unwrap();
        assert!(gaussian_blur(&v, 0.0).is_err());
    }
}

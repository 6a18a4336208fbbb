use super::LabelMask;
use crate::error::{Error, Result};

/// Binary dilation with the full 3×3×3 cube, repeated `iterations` times.
/// Voxels outside the grid count as background.
///
/// `k` passes of the cube equal one pass of a `(2k+1)³` cube, and a cube is
/// the product of three 1D segments, so this runs as three running-max sweeps.
pub fn dilate(m: &LabelMask, iterations: usize) -> Result<LabelMask> {
    if !m.is_binary() {
        return Err(Error::InvalidArgument("dilation expects a binary mask".into()));
    }
    if iterations == 0 {
        return Ok(m.clone());
    }
    let dims = m.dims();
    let mut cur: Vec<u32> = m.labels().to_vec();
    for axis in 0..3 {
        let n = dims[axis];
        let stride = match axis {
            0 => 1,
            1 => dims[0],
            _ => dims[0] * dims[1],
        };
        let mut out = vec![0u32; cur.len()];
        for start in (0..cur.len()).filter(|&i| (i / stride) % n == 0) {
            // Distance to the nearest set voxel on the left, tracked on the fly;
            // the right side is handled by a reverse sweep.
            let mut last: Option<usize> = None;
            for i in 0..n {
                if cur[start + i * stride] != 0 {
                    last = Some(i);
                }
                if matches!(last, Some(j) if i - j <= iterations) {
                    out[start + i * stride] = 1;
                }
            }
            let mut next: Option<usize> = None;
            for i in (0..n).rev() {
                if cur[start + i * stride] != 0 {
                    next = Some(i);
                }
                if matches!(next, Some(j) if j - i <= iterations) {
                    out[start + i * stride] = 1;
                }
            }
        }
        cur = out;
    }
    LabelMask::new(m.geometry(), cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::Geometry;

    fn point(n: usize, at: [usize; 3]) -> LabelMask {
        LabelMask::from_fn(Geometry::isotropic([n; 3]), |x, y, z| u32::from([x, y, z] == at))
    }

    /// One pass of the 27-neighbourhood, written out directly.
    fn naive_step(m: &LabelMask) -> LabelMask {
        let [nx, ny, nz] = m.dims();
        LabelMask::from_fn(m.geometry(), |x, y, z| {
            for dz in -1i64..=1 {
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        let (a, b, c) = (x as i64 + dx, y as i64 + dy, z as i64 + dz);
                        if a >= 0
                            && b >= 0
                            && c >= 0
                            && (a as usize) < nx
                            && (b as usize) < ny
                            && (c as usize) < nz
                            && m.get(a as usize, b as usize, c as usize) == 1
                        {
                            return 1;
                        }
                    }
                }
            }
            0
        })
    }

    #[test]
    fn single_voxel_one_iteration() {
        let out = dilate(&point(7, [3, 3, 3]), 1).unwrap();
        assert_eq!(out.count(1), 27);
    }

    #[test]
    fn single_voxel_five_iterations() {
        let out = dilate(&point(15, [7, 7, 7]), 5).unwrap();
        assert_eq!(out.count(1), 1331);
        assert_eq!(out.get(2, 2, 2), 1);
        assert_eq!(out.get(1, 7, 7), 0);
    }

    #[test]
    fn empty_stays_empty() {
        let m = LabelMask::empty(Geometry::isotropic([4, 5, 6]));
        assert_eq!(dilate(&m, 3).unwrap(), m);
    }

    #[test]
    fn matches_repeated_naive_passes_at_border() {
        let g = Geometry::isotropic([9, 6, 5]);
        let m = LabelMask::from_fn(g, |x, y, z| u32::from((x * 7 + y * 3 + z * 5) % 17 == 0));
        let mut naive = m.clone();
        for k in 1..=3 {
            naive = naive_step(&naive);
            assert_eq!(dilate(&m, k).unwrap(), naive, "k={k}");
        }
    }

    #[test]
    fn rejects_multi_label() {
        let m = LabelMask::from_fn(Geometry::isotropic([2, 1, 1]), |x, _, _| x as u32 * 2);
        assert!(dilate(&m, 1).is_err());
    }
}

//! Mesh-free 3D shape descriptors of a labelled region.
//!
//! Volume counts voxels, surface area counts exposed voxel faces, diameters
//! are distances between voxel centres and the axis lengths come from the
//! covariance of voxel-centre coordinates.

use nalgebra::{Matrix3, SymmetricEigen};

use crate::error::{Error, Result};
use crate::volume::LabelMask;

use super::{label_values, Named};

pub const SHAPE_FEATURES: [&str; 15] = [
    "VoxelVolume",
    "SurfaceArea",
    "SurfaceVolumeRatio",
    "Sphericity",
    "Compactness2",
    "SphericalDisproportion",
    "Maximum3DDiameter",
    "Maximum2DDiameterSlice",
    "Maximum2DDiameterColumn",
    "Maximum2DDiameterRow",
    "MajorAxisLength",
    "MinorAxisLength",
    "LeastAxisLength",
    "Elongation",
    "Flatness",
];

pub fn shape_features(m: &LabelMask, label: u32) -> Result<Named> {
    let g = m.geometry();
    let [nx, ny, nz] = g.dims;
    let sp = g.spacing;
    let inside = |x: isize, y: isize, z: isize| {
        x >= 0
            && y >= 0
            && z >= 0
            && (x as usize) < nx
            && (y as usize) < ny
            && (z as usize) < nz
            && m.get(x as usize, y as usize, z as usize) == label
    };
    let face_area = [sp[1] * sp[2], sp[0] * sp[2], sp[0] * sp[1]];

    let mut count = 0usize;
    let mut area = 0.0;
    let mut boundary: Vec<[usize; 3]> = Vec::new();
    let mut sum = [0.0; 3];
    let mut points: Vec<[f64; 3]> = Vec::new();
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                if m.get(x, y, z) != label {
                    continue;
                }
                count += 1;
                let (xi, yi, zi) = (x as isize, y as isize, z as isize);
                let mut exposed = false;
                for (axis, d) in [(0, [1, 0, 0]), (1, [0, 1, 0]), (2, [0, 0, 1])] {
                    for sgn in [-1isize, 1] {
                        if !inside(xi + sgn * d[0], yi + sgn * d[1], zi + sgn * d[2]) {
                            area += face_area[axis];
                            exposed = true;
                        }
                    }
                }
                if exposed {
                    boundary.push([x, y, z]);
                }
                let p = [x as f64 * sp[0], y as f64 * sp[1], z as f64 * sp[2]];
                for a in 0..3 {
                    sum[a] += p[a];
                }
                points.push(p);
            }
        }
    }
    if count == 0 {
        return Err(Error::EmptyRoi(label));
    }
    let volume = count as f64 * g.voxel_volume();

    // Farthest pairs of a finite point set lie on its hull, which only
    // contains voxels with an exposed face.
    let mut d3 = 0.0f64;
    let mut d_slice = 0.0f64;
    let mut d_col = 0.0f64;
    let mut d_row = 0.0f64;
    for (k, a) in boundary.iter().enumerate() {
        for b in &boundary[k + 1..] {
            let dx = (a[0] as f64 - b[0] as f64) * sp[0];
            let dy = (a[1] as f64 - b[1] as f64) * sp[1];
            let dz = (a[2] as f64 - b[2] as f64) * sp[2];
            let dist2 = dx * dx + dy * dy + dz * dz;
            d3 = d3.max(dist2);
            if a[2] == b[2] {
                d_slice = d_slice.max(dist2);
            }
            if a[1] == b[1] {
                d_col = d_col.max(dist2);
            }
            if a[0] == b[0] {
                d_row = d_row.max(dist2);
            }
        }
    }

    let n = count as f64;
    let mean = sum.map(|s| s / n);
    let mut cov = Matrix3::<f64>::zeros();
    for p in &points {
        for r in 0..3 {
            for c in 0..3 {
                cov[(r, c)] += (p[r] - mean[r]) * (p[c] - mean[c]) / n;
            }
        }
    }
    let mut eig: Vec<f64> = SymmetricEigen::new(cov)
        .eigenvalues
        .iter()
        .map(|e| e.max(0.0))
        .collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    let (major, minor, least) = (eig[0], eig[1], eig[2]);
    let (elongation, flatness) = if major > 0.0 {
        ((minor / major).sqrt(), (least / major).sqrt())
    } else {
        (1.0, 1.0)
    };

    let sphere_area = (36.0 * std::f64::consts::PI * volume * volume).cbrt();
    let out = vec![
        volume,
        area,
        area / volume,
        sphere_area / area,
        36.0 * std::f64::consts::PI * volume * volume / area.powi(3),
        area / sphere_area,
        d3.sqrt(),
        d_slice.sqrt(),
        d_col.sqrt(),
        d_row.sqrt(),
        4.0 * major.sqrt(),
        4.0 * minor.sqrt(),
        4.0 * least.sqrt(),
        elongation,
        flatness,
    ];
    Ok(label_values(&SHAPE_FEATURES, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::Geometry;

    fn get(f: &Named, name: &str) -> f64 {
        f.iter().find(|(n, _)| *n == name).unwrap().1
    }

    #[test]
    fn unit_voxel() {
        let m = LabelMask::from_fn(Geometry::isotropic([3, 3, 3]), |x, y, z| {
            u32::from(x == 1 && y == 1 && z == 1)
        });
        let f = shape_features(&m, 1).unwrap();
        assert_eq!(get(&f, "VoxelVolume"), 1.0);
        assert_eq!(get(&f, "SurfaceArea"), 6.0);
        assert_eq!(get(&f, "Maximum3DDiameter"), 0.0);
        assert_eq!(get(&f, "Elongation"), 1.0);
    }

    #[test]
    fn two_cube() {
        let m = LabelMask::from_fn(Geometry::isotropic([2, 2, 2]), |_, _, _| 1);
        let f = shape_features(&m, 1).unwrap();
        assert_eq!(get(&f, "VoxelVolume"), 8.0);
        assert_eq!(get(&f, "SurfaceArea"), 24.0);
        assert!((get(&f, "Maximum3DDiameter") - 3f64.sqrt()).abs() < 1e-15);
        assert!((get(&f, "Maximum2DDiameterSlice") - 2f64.sqrt()).abs() < 1e-15);
        // population variance of {0, 1} is 1/4 on each axis
        assert!((get(&f, "MajorAxisLength") - 2.0).abs() < 1e-12);
        assert!((get(&f, "Flatness") - 1.0).abs() < 1e-12);
    }

    #[test]
    fn anisotropic_spacing_scales_area() {
        let g = Geometry::new([1, 1, 1], [1.0, 2.0, 3.0]).unwrap();
        let m = LabelMask::new(g, vec![1]).unwrap();
        let f = shape_features(&m, 1).unwrap();
        assert_eq!(get(&f, "VoxelVolume"), 6.0);
        assert_eq!(get(&f, "SurfaceArea"), 2.0 * (6.0 + 3.0 + 2.0));
    }

    #[test]
    fn empty_label() {
        let m = LabelMask::empty(Geometry::isotropic([2, 2, 2]));
        assert!(matches!(shape_features(&m, 1), Err(Error::EmptyRoi(1))));
    }
}

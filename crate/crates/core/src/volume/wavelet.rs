//! Single-level separable 3D Haar transform with orthonormal filters
//! `L = (a + b)/√2`, `H = (a − b)/√2`.

use std::fmt;

use super::{Geometry, IntensityKind, Volume};
use crate::error::{Error, Result};

/// One of the eight sub-bands. Letters name the filter applied along x, y, z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WaveletBand(u8);

impl WaveletBand {
    pub const ALL: [WaveletBand; 8] = [
        WaveletBand(0),
        WaveletBand(1),
        WaveletBand(2),
        WaveletBand(3),
        WaveletBand(4),
        WaveletBand(5),
        WaveletBand(6),
        WaveletBand(7),
    ];

    pub fn new(high_x: bool, high_y: bool, high_z: bool) -> Self {
        WaveletBand(u8::from(high_x) << 2 | u8::from(high_y) << 1 | u8::from(high_z))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Whether the high-pass filter is used along `axis` (0 = x).
    pub fn is_high(self, axis: usize) -> bool {
        self.0 >> (2 - axis) & 1 == 1
    }

    pub fn name(self) -> String {
        (0..3).map(|a| if self.is_high(a) { 'H' } else { 'L' }).collect()
    }

    /// Filter tap for sample offset `o ∈ {0, 1}` along `axis`, without the √2 factor.
    #[inline]
    fn sign(self, axis: usize, o: usize) -> f64 {
        if self.is_high(axis) && o == 1 {
            -1.0
        } else {
            1.0
        }
    }

    #[inline]
    fn tap(self, a: usize, b: usize, c: usize) -> f64 {
        self.sign(0, a) * self.sign(1, b) * self.sign(2, c) * INV_NORM
    }
}

impl fmt::Display for WaveletBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// (1/√2)³
const INV_NORM: f64 = 0.353_553_390_593_273_8;

/// The eight sub-bands in `WaveletBand::ALL` order.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletBands {
    bands: Vec<Volume>,
}

impl WaveletBands {
    pub fn get(&self, band: WaveletBand) -> &Volume {
        &self.bands[band.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (WaveletBand, &Volume)> {
        WaveletBand::ALL.into_iter().zip(self.bands.iter())
    }

    pub fn into_vec(self) -> Vec<Volume> {
        self.bands
    }

    pub fn from_vec(bands: Vec<Volume>) -> Result<Self> {
        if bands.len() != 8 {
            return Err(Error::InvalidArgument(format!("expected 8 bands, got {}", bands.len())));
        }
        let g = *bands[0].geometry();
        for b in &bands[1..] {
            g.ensure_matches(b.geometry())?;
        }
        Ok(Self { bands })
    }
}

/// Decimated analysis: each band has half the resolution and twice the spacing.
pub fn wavelet3d(v: &Volume) -> Result<WaveletBands> {
    let dims = v.dims();
    for (axis, &len) in dims.iter().enumerate() {
        if len % 2 != 0 {
            return Err(Error::OddDimension { axis, len });
        }
    }
    let half = dims.map(|d| d / 2);
    let sp = v.spacing();
    let geometry = Geometry::new(half, [sp[0] * 2.0, sp[1] * 2.0, sp[2] * 2.0])?;
    let bands = WaveletBand::ALL
        .iter()
        .map(|&band| {
            let mut data = Vec::with_capacity(geometry.len());
            for k in 0..half[2] {
                for j in 0..half[1] {
                    for i in 0..half[0] {
                        let mut acc = 0.0;
                        for c in 0..2 {
                            for b in 0..2 {
                                for a in 0..2 {
                                    acc += band.tap(a, b, c) * v.get(2 * i + a, 2 * j + b, 2 * k + c);
                                }
                            }
                        }
                        data.push(acc);
                    }
                }
            }
            Volume::from_parts_unchecked(geometry, data, IntensityKind::Arbitrary)
        })
        .collect();
    Ok(WaveletBands { bands })
}

/// Synthesis for [`wavelet3d`]; the transform is orthogonal so this is its transpose.
pub fn inverse_wavelet3d(bands: &WaveletBands, kind: IntensityKind) -> Result<Volume> {
    let g = *bands.bands[0].geometry();
    let half = g.dims;
    let dims = half.map(|d| d * 2);
    let sp = g.spacing;
    let geometry = Geometry::new(dims, [sp[0] / 2.0, sp[1] / 2.0, sp[2] / 2.0])?;
    let mut data = vec![0.0; geometry.len()];
    for (band, vol) in bands.iter() {
        for k in 0..half[2] {
            for j in 0..half[1] {
                for i in 0..half[0] {
                    let coef = vol.get(i, j, k);
                    for c in 0..2 {
                        for b in 0..2 {
                            for a in 0..2 {
                                data[geometry.index(2 * i + a, 2 * j + b, 2 * k + c)] +=
                                    band.tap(a, b, c) * coef;
                            }
                        }
                    }
                }
            }
        }
    }
    Volume::new(geometry, data, kind)
}

/// Undecimated (stationary) analysis with periodic extension: every band keeps
/// the input grid, so a label mask on the input still applies. Sampling the
/// result at even coordinates reproduces [`wavelet3d`].
pub fn wavelet3d_undecimated(v: &Volume) -> WaveletBands {
    let [nx, ny, nz] = v.dims();
    let bands = WaveletBand::ALL
        .iter()
        .map(|&band| {
            let mut data = Vec::with_capacity(v.len());
            for z in 0..nz {
                for y in 0..ny {
                    for x in 0..nx {
                        let mut acc = 0.0;
                        for c in 0..2 {
                            for b in 0..2 {
                                for a in 0..2 {
                                    acc += band.tap(a, b, c)
                                        * v.get((x + a) % nx, (y + b) % ny, (z + c) % nz);
                                }
                            }
                        }
                        data.push(acc);
                    }
                }
            }
            Volume::from_parts_unchecked(*v.geometry(), data, IntensityKind::Arbitrary)
        })
        .collect();
    WaveletBands { bands }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_names_in_order() {
        let names: Vec<String> = WaveletBand::ALL.iter().map(|b| b.name()).collect();
        assert_eq!(names, ["LLL", "LLH", "LHL", "LHH", "HLL", "HLH", "HHL", "HHH"]);
        assert_eq!(WaveletBand::new(true, false, true).name(), "HLH");
    }

    #[test]
    fn constant_goes_to_lll() {
        let v = Volume::filled(Geometry::isotropic([4, 6, 2]), 3.0, IntensityKind::Arbitrary).unwrap();
        let bands = wavelet3d(&v).unwrap();
        for (band, vol) in bands.iter() {
            let expect = if band.index() == 0 { 3.0 * 2f64.powf(1.5) } else { 0.0 };
            for x in vol.values() {
                assert!((x - expect).abs() < 1e-12, "{band}: {x}");
            }
        }
        assert_eq!(bands.get(WaveletBand(0)).spacing(), [2.0; 3]);
    }

    #[test]
    fn odd_dimension_rejected() {
        let v = Volume::filled(Geometry::isotropic([4, 3, 2]), 0.0, IntensityKind::Arbitrary).unwrap();
        assert!(matches!(wavelet3d(&v), Err(Error::OddDimension { axis: 1, len: 3 })));
    }

    #[test]
    fn undecimated_subsamples_to_decimated() {
        let g = Geometry::isotropic([6, 4, 4]);
        let v = Volume::from_fn(g, IntensityKind::Arbitrary, |x, y, z| {
            ((x * 31 + y * 17 + z * 7) % 11) as f64 - 5.0
        })
        .unwrap();
        let dec = wavelet3d(&v).unwrap();
        let und = wavelet3d_undecimated(&v);
        for band in WaveletBand::ALL {
            let d = dec.get(band);
            let u = und.get(band);
            for k in 0..2 {
                for j in 0..2 {
                    for i in 0..3 {
                        assert!((d.get(i, j, k) - u.get(2 * i, 2 * j, 2 * k)).abs() < 1e-12);
                    }
                }
            }
        }
    }
}

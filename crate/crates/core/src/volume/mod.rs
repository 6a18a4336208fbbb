//! Dense 3D voxel grids and the image operations shared by the other modules.
//!
//! Storage is x-fastest: the linear index of voxel `(x, y, z)` is
//! `x + nx * (y + ny * z)`.

mod filter;
mod morphology;
mod normalize;
mod wavelet;

pub use filter::{convolve_separable, gaussian_blur, gaussian_kernel, reflect_index};
pub use morphology::dilate;
pub use normalize::{
    center_crop, clip_and_scale, inverse_clip_and_scale, nearest_rank_quantile, pad_to_shape,
    quantile_normalize, IntensityRange,
};
pub use wavelet::{
    inverse_wavelet3d, wavelet3d, wavelet3d_undecimated, WaveletBand, WaveletBands,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Voxel counts along x, y, z.
pub type Dims = [usize; 3];

/// Voxel size in millimetres along x, y, z.
pub type Spacing = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntensityKind {
    /// Calibrated CT Hounsfield units.
    Hu,
    /// Values mapped to `[-1, 1]`.
    Normalized,
    Arbitrary,
}

impl IntensityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IntensityKind::Hu => "hu",
            IntensityKind::Normalized => "normalized",
            IntensityKind::Arbitrary => "arbitrary",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hu" => Some(IntensityKind::Hu),
            "normalized" => Some(IntensityKind::Normalized),
            "arbitrary" => Some(IntensityKind::Arbitrary),
            _ => None,
        }
    }
}

/// Grid extent and voxel size shared by a volume and its label masks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub dims: Dims,
    pub spacing: Spacing,
}

impl Geometry {
    pub fn new(dims: Dims, spacing: Spacing) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::InvalidVolume(format!("dims must be positive, got {dims:?}")));
        }
        if spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidVolume(format!(
                "spacing must be positive and finite, got {spacing:?}"
            )));
        }
        Ok(Self { dims, spacing })
    }

    pub fn isotropic(dims: Dims) -> Self {
        Self::new(dims, [1.0; 3]).expect("positive dims")
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let x = idx % self.dims[0];
        let rest = idx / self.dims[0];
        [x, rest % self.dims[1], rest / self.dims[1]]
    }

    /// Voxel volume in mm³.
    pub fn voxel_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn matches(&self, other: &Geometry) -> bool {
        self.dims == other.dims
            && self
                .spacing
                .iter()
                .zip(other.spacing.iter())
                .all(|(a, b)| (a - b).abs() <= 1e-6 * a.abs().max(b.abs()))
    }

    pub(crate) fn ensure_matches(&self, other: &Geometry) -> Result<()> {
        if self.matches(other) {
            Ok(())
        } else {
            Err(Error::GeometryMismatch(format!(
                "{:?}@{:?} vs {:?}@{:?}",
                self.dims, self.spacing, other.dims, other.spacing
            )))
        }
    }
}

/// A scalar voxel grid with physical spacing and intensity semantics.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    geometry: Geometry,
    data: Vec<f64>,
    kind: IntensityKind,
}

impl Volume {
    pub fn new(geometry: Geometry, data: Vec<f64>, kind: IntensityKind) -> Result<Self> {
        if data.len() != geometry.len() {
            return Err(Error::InvalidVolume(format!(
                "expected {} values for dims {:?}, got {}",
                geometry.len(),
                geometry.dims,
                data.len()
            )));
        }
        check_kind(&data, kind)?;
        Ok(Self {
            geometry,
            data,
            kind,
        })
    }

    pub fn filled(geometry: Geometry, value: f64, kind: IntensityKind) -> Result<Self> {
        Self::new(geometry, vec![value; geometry.len()], kind)
    }

    pub fn from_fn(
        geometry: Geometry,
        kind: IntensityKind,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let [nx, ny, nz] = geometry.dims;
        let mut data = Vec::with_capacity(geometry.len());
        for z in 0..nz {
            for y in 0..ny {
                for x in 0..nx {
                    data.push(f(x, y, z));
                }
            }
        }
        Self::new(geometry, data, kind)
    }

    /// Builds a volume without re-validating the value range. Callers guarantee
    /// the `kind` invariant.
    pub(crate) fn from_parts_unchecked(
        geometry: Geometry,
        data: Vec<f64>,
        kind: IntensityKind,
    ) -> Self {
        debug_assert_eq!(data.len(), geometry.len());
        Self {
            geometry,
            data,
            kind,
        }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn dims(&self) -> Dims {
        self.geometry.dims
    }

    pub fn spacing(&self) -> Spacing {
        self.geometry.spacing
    }

    pub fn kind(&self) -> IntensityKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn into_values(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.data[self.geometry.index(x, y, z)]
    }

    /// Reinterprets the intensities, validating the `[-1, 1]` bound for
    /// normalized data.
    pub fn with_kind(self, kind: IntensityKind) -> Result<Self> {
        check_kind(&self.data, kind)?;
        Ok(Self { kind, ..self })
    }

    /// Applies `f` voxelwise, producing a volume of the given kind.
    pub fn map(&self, kind: IntensityKind, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.geometry, self.data.iter().map(|&v| f(v)).collect(), kind)
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

fn check_kind(data: &[f64], kind: IntensityKind) -> Result<()> {
    if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidVolume(format!("non-finite voxel value {bad}")));
    }
    if kind == IntensityKind::Normalized {
        if let Some(bad) = data.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
            return Err(Error::InvalidVolume(format!(
                "normalized volume holds {bad} outside [-1, 1]"
            )));
        }
    }
    Ok(())
}

/// Integer region labels on a volume grid. Label 0 is background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMask {
    dims: Dims,
    spacing_bits: [u64; 3],
    labels: Vec<u32>,
}

impl LabelMask {
    pub fn new(geometry: Geometry, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != geometry.len() {
            return Err(Error::InvalidVolume(format!(
                "expected {} labels for dims {:?}, got {}",
                geometry.len(),
                geometry.dims,
                labels.len()
            )));
        }
        Ok(Self {
            dims: geometry.dims,
            spacing_bits: geometry.spacing.map(f64::to_bits),
            labels,
        })
    }

    pub fn empty(geometry: Geometry) -> Self {
        Self::new(geometry, vec![0; geometry.len()]).expect("length matches")
    }

    pub fn from_fn(geometry: Geometry, mut f: impl FnMut(usize, usize, usize) -> u32) -> Self {
        let [nx, ny, nz] = geometry.dims;
        let mut labels = Vec::with_capacity(geometry.len());
        for z in 0..nz {
            for y in 0..ny {
                for x in 0..nx {
                    labels.push(f(x, y, z));
                }
            }
        }
        Self::new(geometry, labels).expect("length matches")
    }

    pub fn geometry(&self) -> Geometry {
        Geometry {
            dims: self.dims,
            spacing: self.spacing_bits.map(f64::from_bits),
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn labels_mut(&mut self) -> &mut [u32] {
        &mut self.labels
    }

    pub fn into_labels(self) -> Vec<u32> {
        self.labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> u32 {
        self.labels[x + self.dims[0] * (y + self.dims[1] * z)]
    }

    pub fn count(&self, label: u32) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn is_binary(&self) -> bool {
        self.labels.iter().all(|&l| l <= 1)
    }

    /// Binary mask with 1 where the label equals `label`.
    pub fn select(&self, label: u32) -> LabelMask {
        LabelMask {
            dims: self.dims,
            spacing_bits: self.spacing_bits,
            labels: self.labels.iter().map(|&l| u32::from(l == label)).collect(),
        }
    }

    /// Distinct non-zero labels in ascending order.
    pub fn distinct_labels(&self) -> Vec<u32> {
        let mut out: Vec<u32> = self.labels.iter().copied().filter(|&l| l != 0).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn to_volume(&self) -> Volume {
        Volume::from_parts_unchecked(
            self.geometry(),
            self.labels.iter().map(|&l| f64::from(l)).collect(),
            IntensityKind::Arbitrary,
        )
    }
}

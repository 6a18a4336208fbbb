//! The ordered enumeration of feature names an extraction produces.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{
    ExtractionConfig, FIRST_ORDER_FEATURES, GLCM_FEATURES, GLDM_FEATURES, GLRLM_FEATURES,
    NGTDM_FEATURES, SHAPE_FEATURES,
};
use crate::volume::WaveletBand;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ImageType {
    Original,
    Log { sigma_mm: f64 },
    Wavelet(WaveletBand),
}

impl ImageType {
    /// Image types in extraction order for `cfg`.
    pub fn enumerate(cfg: &ExtractionConfig) -> Vec<ImageType> {
        let mut out = vec![ImageType::Original];
        out.extend(cfg.log_sigmas_mm.iter().map(|&s| ImageType::Log { sigma_mm: s }));
        if cfg.enable_wavelet {
            out.extend(WaveletBand::ALL.iter().map(|&b| ImageType::Wavelet(b)));
        }
        out
    }
}

impl fmt::Display for ImageType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImageType::Original => f.write_str("original"),
            ImageType::Log { sigma_mm } => {
                let s = format!("{sigma_mm:.1}").replace('.', "-");
                write!(f, "log-sigma-{s}-mm-3D")
            }
            ImageType::Wavelet(b) => write!(f, "wavelet-{b}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Shape,
    FirstOrder,
    Glcm,
    Glrlm,
    Gldm,
    Ngtdm,
}

impl Family {
    /// Families computed on every image type, in output order.
    pub const INTENSITY: [Family; 5] =
        [Family::FirstOrder, Family::Glcm, Family::Glrlm, Family::Gldm, Family::Ngtdm];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Shape => "shape",
            Family::FirstOrder => "firstorder",
            Family::Glcm => "glcm",
            Family::Glrlm => "glrlm",
            Family::Gldm => "gldm",
            Family::Ngtdm => "ngtdm",
        }
    }

    pub fn features(self) -> &'static [&'static str] {
        match self {
            Family::Shape => &SHAPE_FEATURES,
            Family::FirstOrder => &FIRST_ORDER_FEATURES,
            Family::Glcm => &GLCM_FEATURES,
            Family::Glrlm => &GLRLM_FEATURES,
            Family::Gldm => &GLDM_FEATURES,
            Family::Ngtdm => &NGTDM_FEATURES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub image_type: String,
    pub family: Family,
    pub feature: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub id: String,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    /// Shape once on the original mask, then the five intensity families for
    /// each image type.
    pub fn from_config(cfg: &ExtractionConfig) -> Self {
        let mut entries = Vec::new();
        let mut push = |image: &str, family: Family| {
            for feat in family.features() {
                entries.push(ManifestEntry {
                    name: format!("{image}_{}_{feat}", family.as_str()),
                    image_type: image.to_string(),
                    family,
                    feature: (*feat).to_string(),
                });
            }
        };
        push("original", Family::Shape);
        for it in ImageType::enumerate(cfg) {
            let image = it.to_string();
            for fam in Family::INTENSITY {
                push(&image, fam);
            }
        }
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for e in &entries {
            for b in e.name.bytes().chain(std::iter::once(b'\n')) {
                hash ^= u64::from(b);
                hash = hash.wrapping_mul(0x0100_0000_01b3);
            }
        }
        Manifest {
            id: format!("rad-v1-{}-{hash:016x}", entries.len()),
            entries,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.name.as_str())
    }

    /// Entry counts per family, in first-seen order.
    pub fn breakdown(&self) -> Vec<(Family, usize)> {
        let mut out: Vec<(Family, usize)> = Vec::new();
        for e in &self.entries {
            match out.iter_mut().find(|(f, _)| *f == e.family) {
                Some((_, n)) => *n += 1,
                None => out.push((e.family, 1)),
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_has_1065_entries() {
        let m = Manifest::from_config(&ExtractionConfig::default());
        assert_eq!(m.len(), 1065);
        assert_eq!(
            m.breakdown(),
            vec![
                (Family::Shape, 15),
                (Family::FirstOrder, 18 * 14),
                (Family::Glcm, 22 * 14),
                (Family::Glrlm, 16 * 14),
                (Family::Gldm, 14 * 14),
                (Family::Ngtdm, 5 * 14),
            ]
        );
        assert!(m.id.starts_with("rad-v1-1065-"));
    }

    #[test]
    fn original_only_has_90() {
        assert_eq!(Manifest::from_config(&ExtractionConfig::original_only()).len(), 90);
    }

    #[test]
    fn names_are_unique_and_formatted() {
        let m = Manifest::from_config(&ExtractionConfig::default());
        let mut names: Vec<&str> = m.names().collect();
        assert_eq!(names[0], "original_shape_VoxelVolume");
        assert!(names.contains(&"log-sigma-1-0-mm-3D_firstorder_Mean"));
        assert!(names.contains(&"wavelet-LLH_glcm_Contrast"));
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 1065);
    }

    #[test]
    fn id_depends_on_names() {
        let a = Manifest::from_config(&ExtractionConfig::default());
        let b = Manifest::from_config(&ExtractionConfig {
            log_sigmas_mm: vec![1.0, 2.0, 3.0, 4.0, 6.0],
            ..Default::default()
        });
        assert_eq!(a.len(), b.len());
        assert_ne!(a.id, b.id);
    }
}

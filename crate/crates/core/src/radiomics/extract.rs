use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::discretize::{discretize_indices, roi_indices};
use super::{
    first_order_values, glcm_features, gldm_features, glrlm_features, log_filter, ngtdm_features,
    shape_features, ExtractionConfig, ImageType, Manifest, Named,
};
use crate::error::{Error, Result};
use crate::volume::{wavelet3d_undecimated, LabelMask, Volume};

/// Feature values in manifest order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub manifest_id: String,
    pub entries: Vec<(String, f64)>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|(_, v)| *v).collect()
    }
}

/// The original image followed by every derived image the config enables.
pub fn filtered_images(v: &Volume, cfg: &ExtractionConfig) -> Result<Vec<(ImageType, Volume)>> {
    let mut out = vec![(ImageType::Original, v.clone())];
    for &s in &cfg.log_sigmas_mm {
        out.push((ImageType::Log { sigma_mm: s }, log_filter(v, s)?));
    }
    if cfg.enable_wavelet {
        let bands = wavelet3d_undecimated(v);
        for (band, img) in bands.iter() {
            out.push((ImageType::Wavelet(band), img.clone()));
        }
    }
    Ok(out)
}

fn intensity_families(img: &Volume, roi: &[usize], bin_width: f64) -> Named {
    let d = discretize_indices(img, roi, bin_width);
    let values: Vec<f64> = roi.iter().map(|&i| img.values()[i]).collect();
    let levels: Vec<u32> = roi.iter().map(|&i| d.levels()[i]).collect();
    let mut out = first_order_values(&values, &levels, img.geometry().voxel_volume());
    out.extend(glcm_features(&d));
    out.extend(glrlm_features(&d));
    out.extend(gldm_features(&d));
    out.extend(ngtdm_features(&d));
    out
}

/// Every feature of the manifest for one ROI.
pub fn extract_all(v: &Volume, m: &LabelMask, cfg: &ExtractionConfig) -> Result<FeatureVector> {
    cfg.validate()?;
    let roi = roi_indices(v, m, cfg)?;
    let manifest = Manifest::from_config(cfg);
    let mut values: Vec<f64> = shape_features(m, cfg.label)?.into_iter().map(|(_, x)| x).collect();
    for (_, img) in filtered_images(v, cfg)? {
        values.extend(intensity_families(&img, &roi, cfg.bin_width).into_iter().map(|(_, x)| x));
    }
    debug_assert_eq!(values.len(), manifest.len());
    let entries: Vec<(String, f64)> = manifest
        .entries
        .into_iter()
        .zip(values)
        .map(|(e, x)| (e.name, x))
        .collect();
    if let Some((name, x)) = entries.iter().find(|(_, x)| !x.is_finite()) {
        return Err(Error::NonFinite(format!("{name} = {x}")));
    }
    Ok(FeatureVector {
        manifest_id: manifest.id,
        entries,
    })
}

/// [`extract_all`] over many cases in parallel; results keep input order.
pub fn extract_batch(cases: &[(Volume, LabelMask)], cfg: &ExtractionConfig) -> Vec<Result<FeatureVector>> {
    cases
        .par_iter()
        .map(|(v, m)| extract_all(v, m, cfg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::{Geometry, IntensityKind};

    fn phantom() -> (Volume, LabelMask) {
        let g = Geometry::isotropic([8, 8, 8]);
        let v = Volume::from_fn(g, IntensityKind::Hu, |x, y, z| {
            ((x * 37 + y * 11 + z * 53) % 97) as f64 * 3.0 - 100.0
        })
        .unwrap();
        let m = LabelMask::from_fn(g, |x, y, z| {
            u32::from((2..6).contains(&x) && (1..6).contains(&y) && (2..7).contains(&z))
        });
        (v, m)
    }

    #[test]
    fn default_extraction_has_1065_finite_values() {
        let (v, m) = phantom();
        let f = extract_all(&v, &m, &ExtractionConfig::default()).unwrap();
        assert_eq!(f.len(), 1065);
        assert!(f.values().iter().all(|x| x.is_finite()));
        assert_eq!(f.manifest_id, Manifest::from_config(&ExtractionConfig::default()).id);
    }

    #[test]
    fn original_only_matches_standalone_calls() {
        let (v, m) = phantom();
        let cfg = ExtractionConfig::original_only();
        let f = extract_all(&v, &m, &cfg).unwrap();
        assert_eq!(f.len(), 90);
        let d = super::super::discretize(&v, &m, &cfg).unwrap();
        let glcm = glcm_features(&d);
        for (name, x) in glcm {
            assert_eq!(f.get(&format!("original_glcm_{name}")), Some(x));
        }
        let fo = super::super::first_order(&v, &m, &cfg).unwrap();
        for (name, x) in fo {
            assert_eq!(f.get(&format!("original_firstorder_{name}")), Some(x));
        }
    }

    #[test]
    fn batch_preserves_order() {
        let (v, m) = phantom();
        let v2 = v.map(IntensityKind::Hu, |x| x * 2.0).unwrap();
        let cfg = ExtractionConfig::original_only();
        let cases = vec![(v.clone(), m.clone()), (v2.clone(), m.clone())];
        let out = extract_batch(&cases, &cfg);
        assert_eq!(out[0].as_ref().unwrap(), &extract_all(&v, &m, &cfg).unwrap());
        assert_eq!(out[1].as_ref().unwrap(), &extract_all(&v2, &m, &cfg).unwrap());
    }
}

//! Format dispatch by file extension.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use medsynth_core::io::{nifti, read_raw, write_raw, Precision};
use medsynth_core::radiomics::FeatureTable;
use medsynth_core::{IntensityKind, LabelMask, Volume};

use crate::args::Dtype;
use crate::failure::{CliResult, Context, Failure};

fn is_raw(p: &Path) -> bool {
    p.extension().is_some_and(|e| e == "raw")
}

fn is_json(p: &Path) -> bool {
    p.extension().is_some_and(|e| e == "json")
}

pub fn load_volume(p: &Path, default_kind: IntensityKind) -> CliResult<Volume> {
    let v = if is_raw(p) { read_raw(p) } else { nifti::read_volume(p, default_kind) };
    v.context(p.display())
}

/// Label maps; raw volumes must hold non-negative integers.
pub fn load_mask(p: &Path) -> CliResult<LabelMask> {
    if !is_raw(p) {
        return nifti::read_mask(p).context(p.display());
    }
    let v = read_raw(p).context(p.display())?;
    let labels = v
        .values()
        .iter()
        .map(|&x| {
            if x >= 0.0 && x.fract() == 0.0 {
                Ok(x as u32)
            } else {
                Err(Failure::validation(format!("{}: label value {x} is not a non-negative integer", p.display())))
            }
        })
        .collect::<CliResult<Vec<_>>>()?;
    LabelMask::new(*v.geometry(), labels).context(p.display())
}

pub fn save_volume(p: &Path, v: &Volume, dtype: Dtype) -> CliResult<()> {
    let precision = match dtype {
        Dtype::Float32 => Precision::Float32,
        Dtype::Float64 => Precision::Float64,
    };
    let r = if is_raw(p) { write_raw(p, v) } else { nifti::write_volume_as(p, v, precision) };
    r.context(p.display())
}

pub fn load_table(p: &Path) -> CliResult<FeatureTable> {
    let r = BufReader::new(File::open(p).context(p.display())?);
    let t = if is_json(p) { FeatureTable::read_json(r) } else { FeatureTable::read_csv(r) };
    t.context(p.display())
}

pub fn save_table(p: &Path, t: &FeatureTable) -> CliResult<()> {
    let w = File::create(p).context(p.display())?;
    let r = if is_json(p) { t.write_json(w) } else { t.write_csv(w) };
    r.context(p.display())
}

pub fn create(p: &Path) -> CliResult<File> {
    File::create(p).context(p.display())
}

/// `p` relative to the directory of `base` unless absolute.
pub fn relative_to(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.parent().unwrap_or(Path::new(".")).join(p)
    }
}

/// A relative config path that is missing here falls back to the config dir.
pub fn resolve_config(p: &Path, config_dir: Option<&Path>) -> CliResult<PathBuf> {
    if p.exists() || p.is_absolute() {
        return Ok(p.to_path_buf());
    }
    if let Some(dir) = config_dir {
        let q = dir.join(p);
        if q.exists() {
            return Ok(q);
        }
    }
    Err(Failure::from(std::io::Error::new(
        std::io::ErrorKind::NotFound,
        format!("config file {} not found", p.display()),
    )))
}

use std::net::SocketAddr;
use std::path::PathBuf;

use clap::builder::PossibleValuesParser;
use clap::{Args, Parser, Subcommand, ValueEnum};
use medsynth_core::adversarial::GanLambdas;
use medsynth_core::diffusion::SamplerKind;
use medsynth_core::vtt::ReportConfig;
use serde::Serialize;

pub const CONFIG_DIR_ENV: &str = "MEDSYNTH_CONFIG_DIR";
pub const ADMIN_TOKEN_ENV: &str = "MEDSYNTH_ADMIN_TOKEN";

#[derive(Debug, Parser, Serialize)]
#[command(name = "medsynth", version, about = "Evaluation toolkit for synthetic CT and MRI volumes")]
pub struct Cli {
    /// Seed for every random draw of the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for case-level parallelism; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    /// Directory searched for relative config files that do not exist in the
    /// working directory.
    #[arg(long, global = true, env = CONFIG_DIR_ENV)]
    pub config_dir: Option<PathBuf>,

    /// Where to write the resolved-config sidecar. Defaults to
    /// `<output>.config.json`, or `medsynth-<command>.config.json` when the
    /// command only prints to stdout.
    #[arg(long, global = true)]
    pub sidecar: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Clip and rescale a volume to [-1, 1], or undo a CT mapping.
    Normalize(NormalizeArgs),
    /// Extract the radiomic feature table of one or many cases.
    Radiomics(RadiomicsArgs),
    /// CCC categories and PCA centroid distance between two feature tables.
    Compare(CompareArgs),
    /// MAE, MS-SSIM and Dice between volumes or label maps.
    Metrics(MetricsArgs),
    /// Draw a sample with one of the reverse-diffusion samplers.
    Sample(SampleArgs),
    /// Build the soft inpainting mask from a tumor label map.
    InpaintMask(InpaintMaskArgs),
    /// Evaluate the adversarial and diffusion losses on a stored batch.
    Ganloss(GanlossArgs),
    /// Visual Turing Test sessions.
    #[command(subcommand)]
    Vtt(VttCommand),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Normalize(_) => "normalize",
            Command::Radiomics(_) => "radiomics",
            Command::Compare(_) => "compare",
            Command::Metrics(_) => "metrics",
            Command::Sample(_) => "sample",
            Command::InpaintMask(_) => "inpaint-mask",
            Command::Ganloss(_) => "ganloss",
            Command::Vtt(VttCommand::Serve(_)) => "vtt-serve",
            Command::Vtt(VttCommand::Report(_)) => "vtt-report",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizePreset {
    /// Clip to [-200, 200] HU.
    #[value(name = "ct-200")]
    Ct200,
    /// Clip to [-1000, 1000] HU.
    #[value(name = "ct-1000")]
    Ct1000,
    /// Clip at the 0.001 and 0.999 quantiles.
    Mri,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    Float32,
    Float64,
}

#[derive(Debug, Args, Serialize)]
pub struct NormalizeArgs {
    #[arg(long, value_enum)]
    pub preset: NormalizePreset,
    /// Map normalized values back to HU (CT presets only).
    #[arg(long)]
    pub inverse: bool,
    /// Pad to this shape after normalizing, e.g. `--pad 256,256,256`.
    #[arg(long, value_delimiter = ',', num_args = 1, value_name = "X,Y,Z")]
    pub pad: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0.0)]
    pub pad_value: f64,
    /// Voxel type of a NIfTI output.
    #[arg(long, value_enum, default_value_t = Dtype::Float32)]
    pub dtype: Dtype,
    /// `.nii`, `.nii.gz` or `.raw` (with a `.json` sidecar).
    pub input: PathBuf,
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct RadiomicsArgs {
    #[arg(long, requires = "mask", conflicts_with = "cases")]
    pub image: Option<PathBuf>,
    #[arg(long, requires = "image")]
    pub mask: Option<PathBuf>,
    /// CSV with `case,image,mask` columns; paths are relative to the CSV.
    #[arg(long)]
    pub cases: Option<PathBuf>,
    /// Extraction settings as JSON; unspecified fields keep their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub bin_width: Option<f64>,
    #[arg(long)]
    pub label: Option<u32>,
    /// Skip the LoG and wavelet images.
    #[arg(long)]
    pub original_only: bool,
    /// Feature table, CSV or `.json`.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    /// Real-cohort feature table (CSV or `.json`).
    pub real: PathBuf,
    /// Synthetic-cohort table with the same columns, rows paired by position.
    pub synth: PathBuf,
    /// Also write the JSON report here.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Per-feature CCC and category as CSV.
    #[arg(long)]
    pub ccc_csv: Option<PathBuf>,
    /// Projected PCA points as CSV.
    #[arg(long)]
    pub pca_csv: Option<PathBuf>,
    #[arg(long)]
    pub no_pca: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DscModeArg {
    Semantic,
    Instance,
}

#[derive(Debug, Args, Serialize)]
#[command(group(clap::ArgGroup::new("metric").required(true).multiple(true).args(["mae", "ms_ssim", "dsc"])))]
pub struct MetricsArgs {
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    pub mae: Option<Vec<PathBuf>>,
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    pub ms_ssim: Option<Vec<PathBuf>>,
    /// Overrides the MS-SSIM dynamic range implied by the intensity kind.
    #[arg(long)]
    pub data_range: Option<f64>,
    #[arg(long, num_args = 2, value_names = ["PRED", "GT"])]
    pub dsc: Option<Vec<PathBuf>>,
    #[arg(long, value_enum, default_value_t = DscModeArg::Semantic)]
    pub dsc_mode: DscModeArg,
    /// Label names and groups as JSON; the bone map is used otherwise.
    #[arg(long)]
    pub groups: Option<PathBuf>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

fn sampler_names() -> PossibleValuesParser {
    PossibleValuesParser::new(SamplerKind::ALL.map(SamplerKind::as_str))
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long, value_parser = sampler_names(), default_value = "dpmpp-2m")]
    pub sampler: String,
    /// Denoiser calls for the DPM++ samplers; linear walks the whole schedule.
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// Length of the linear beta schedule.
    #[arg(long, default_value_t = 1000)]
    pub schedule_steps: usize,
    /// `point-mass:<volume>` or `gaussian:<mean>,<std>`.
    #[arg(long)]
    pub denoiser: String,
    /// Output shape; required for the gaussian denoiser.
    #[arg(long, value_delimiter = ',', value_name = "X,Y,Z")]
    pub dims: Option<Vec<usize>>,
    /// Per-step statistics as JSON lines.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Dtype::Float32)]
    pub dtype: Dtype,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskModeArg {
    /// Tumor voxels forced to 1 after blurring.
    Edge,
    /// Blurred values kept as they are.
    Full,
}

#[derive(Debug, Args, Serialize)]
pub struct InpaintMaskArgs {
    #[arg(long, value_enum, default_value_t = MaskModeArg::Edge)]
    pub mode: MaskModeArg,
    /// Label value marking the tumor.
    #[arg(long, default_value_t = 1)]
    pub label: u32,
    #[arg(long, default_value_t = medsynth_core::diffusion::MASK_DILATION)]
    pub dilation: usize,
    #[arg(long, default_value_t = medsynth_core::diffusion::MASK_BLUR_FACTOR)]
    pub blur: f64,
    #[arg(long, value_enum, default_value_t = Dtype::Float32)]
    pub dtype: Dtype,
    pub labels: PathBuf,
    pub output: PathBuf,
}

fn lambda_presets() -> PossibleValuesParser {
    PossibleValuesParser::new(GanLambdas::PRESETS)
}

#[derive(Debug, Args, Serialize)]
pub struct GanlossArgs {
    #[arg(long, value_parser = lambda_presets())]
    pub preset: String,
    /// JSON batch description; volume paths are relative to it.
    pub batch: PathBuf,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum VttCommand {
    /// Serve rating sessions over HTTP.
    Serve(ServeArgs),
    /// Agreement and group statistics of a session's ratings.
    Report(ReportArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ServeArgs {
    /// Session config JSON; repeat for several sessions.
    #[arg(long, required = true)]
    pub session: Vec<PathBuf>,
    /// Case files; defaults to each config's directory.
    #[arg(long)]
    pub payload_dir: Option<PathBuf>,
    /// Ratings are appended to `<dir>/<session id>.jsonl`.
    #[arg(long, default_value = "journals")]
    pub journal_dir: PathBuf,
    /// Rater UI build served for every other path.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    /// Bearer token for report and CSV export; those routes are off without it.
    #[arg(long, env = ADMIN_TOKEN_ENV, hide_env_values = true)]
    #[serde(skip)]
    pub admin_token: Option<String>,
}

fn report_presets() -> PossibleValuesParser {
    PossibleValuesParser::new(ReportConfig::PRESETS)
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    #[arg(long)]
    pub session: PathBuf,
    #[arg(long)]
    pub journal: PathBuf,
    #[arg(long, value_parser = report_presets(), default_value = "default")]
    pub preset: String,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Export the ratings as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Every preset name, grouped by option, for the top-level help.
pub fn preset_help() -> String {
    let list = |v: &[&str]| v.join(", ");
    let samplers: Vec<&str> = SamplerKind::ALL.iter().map(|k| k.as_str()).collect();
    let rows = [
        ("normalize --preset", list(&["ct-200", "ct-1000", "mri"])),
        ("ganloss --preset", list(&GanLambdas::PRESETS)),
        ("sample --sampler", list(&samplers)),
        ("vtt report --preset", list(&ReportConfig::PRESETS)),
        ("inpaint-mask --mode", list(&["edge", "full"])),
        ("metrics --dsc-mode", list(&["semantic", "instance"])),
    ];
    let mut s = String::from("Presets:\n");
    for (opt, names) in rows {
        s.push_str(&format!("  {opt:<22}{names}\n"));
    }
    s.push_str(&format!(
        "\nEnvironment:\n  {CONFIG_DIR_ENV:<22}default --config-dir\n  {ADMIN_TOKEN_ENV:<22}admin token for `vtt serve`\n"
    ));
    s
}

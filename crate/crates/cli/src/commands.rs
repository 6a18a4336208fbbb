use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use medsynth_core::adversarial::{
    diffusion_losses, discriminator_loss, generator_terms, GanLambdas, INPAINT_LAMBDA,
};
use medsynth_core::diffusion::{
    build_blur_mask_with, linear_schedule, sample, write_trajectory_jsonl, Denoiser, GaussianDenoiser,
    MaskMode, PointMass, SamplerKind,
};
use medsynth_core::fidelity::{ccc_report, dsc, mae, ms_ssim_with, pca_distance, DscMode, GroupMap, MsSsimConfig};
use medsynth_core::radiomics::{extract_batch, ExtractionConfig, FeatureTable, Manifest};
use medsynth_core::volume::{
    clip_and_scale, inverse_clip_and_scale, pad_to_shape, quantile_normalize, IntensityRange,
};
use medsynth_core::vtt::{session_report, write_ratings_csv, Journal, ReportConfig, SessionConfig, VttSession};
use medsynth_core::{Geometry, IntensityKind, LabelMask, Volume};
use medsynth_vtt::{AppState, HostedSession};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::args::*;
use crate::failure::{CliResult, Context, Failure};
use crate::files::*;

/// MRI clipping quantiles.
const MRI_QUANTILES: (f64, f64) = (0.001, 0.999);

pub fn run(cli: &Cli) -> CliResult<()> {
    let run = Run { cli };
    match &cli.command {
        Command::Normalize(a) => normalize(&run, a),
        Command::Radiomics(a) => radiomics(&run, a),
        Command::Compare(a) => compare(&run, a),
        Command::Metrics(a) => metrics(&run, a),
        Command::Sample(a) => sample_cmd(&run, a),
        Command::InpaintMask(a) => inpaint_mask(&run, a),
        Command::Ganloss(a) => ganloss(&run, a),
        Command::Vtt(VttCommand::Serve(a)) => vtt_serve(&run, a),
        Command::Vtt(VttCommand::Report(a)) => vtt_report(&run, a),
    }
}

struct Run<'a> {
    cli: &'a Cli,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    jobs: usize,
    arguments: &'a Command,
    resolved: Value,
}

impl Run<'_> {
    /// Writes the resolved-config sidecar next to `output`.
    fn record(&self, output: Option<&Path>, resolved: Value) -> CliResult<()> {
        let cli = self.cli;
        let path = match (&cli.sidecar, output) {
            (Some(p), _) => p.clone(),
            (None, Some(out)) => {
                let mut name = out.file_name().unwrap_or_default().to_os_string();
                name.push(".config.json");
                out.with_file_name(name)
            }
            (None, None) => PathBuf::from(format!("medsynth-{}.config.json", cli.command.name())),
        };
        let sidecar = Sidecar {
            tool: "medsynth",
            version: env!("CARGO_PKG_VERSION"),
            command: cli.command.name(),
            seed: cli.seed,
            jobs: cli.jobs,
            arguments: &cli.command,
            resolved,
        };
        let mut bytes = serde_json::to_vec_pretty(&sidecar)?;
        bytes.push(b'\n');
        fs::write(&path, bytes).context(path.display())
    }

    fn config_dir(&self) -> Option<&Path> {
        self.cli.config_dir.as_deref()
    }
}

fn print_json(v: &impl Serialize, out: Option<&Path>) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    if let Some(p) = out {
        fs::write(p, &text).context(p.display())?;
    }
    std::io::stdout().write_all(text.as_bytes())?;
    Ok(())
}

fn dims3(v: &[usize], what: &str) -> CliResult<[usize; 3]> {
    <[usize; 3]>::try_from(v).map_err(|_| Failure::validation(format!("{what} needs exactly 3 values, got {}", v.len())))
}

fn normalize(run: &Run, a: &NormalizeArgs) -> CliResult<()> {
    let range = match a.preset {
        NormalizePreset::Ct200 => Some(IntensityRange::CT_TUMOR),
        NormalizePreset::Ct1000 => Some(IntensityRange::CT_BONE),
        NormalizePreset::Mri => None,
    };
    let pad = a.pad.as_deref().map(|p| dims3(p, "--pad")).transpose()?;
    let resolved = match range {
        Some(r) => json!({ "clip_hu": [r.lo(), r.hi()], "inverse": a.inverse, "pad": pad, "pad_value": a.pad_value }),
        None => json!({ "quantiles": [MRI_QUANTILES.0, MRI_QUANTILES.1], "pad": pad, "pad_value": a.pad_value }),
    };
    run.record(Some(&a.output), resolved)?;

    let out = match (range, a.inverse) {
        (Some(r), false) => clip_and_scale(&load_volume(&a.input, IntensityKind::Hu)?, r)?,
        (Some(r), true) => inverse_clip_and_scale(&load_volume(&a.input, IntensityKind::Normalized)?, r)?,
        (None, false) => {
            let (lo, hi) = MRI_QUANTILES;
            quantile_normalize(&load_volume(&a.input, IntensityKind::Arbitrary)?, lo, hi)?
        }
        (None, true) => {
            return Err(Failure::validation("quantile normalization keeps no bounds to invert"));
        }
    };
    let out = match pad {
        Some(t) => pad_to_shape(&out, t, a.pad_value)?,
        None => out,
    };
    save_volume(&a.output, &out, a.dtype)
}

#[derive(Deserialize)]
struct CaseRow {
    case: String,
    image: PathBuf,
    mask: PathBuf,
}

fn radiomics(run: &Run, a: &RadiomicsArgs) -> CliResult<()> {
    let mut cfg = match &a.config {
        Some(p) => {
            let p = resolve_config(p, run.config_dir())?;
            serde_json::from_slice::<ExtractionConfig>(&fs::read(&p).context(p.display())?).context(p.display())?
        }
        None => ExtractionConfig::default(),
    };
    if a.original_only {
        cfg.log_sigmas_mm.clear();
        cfg.enable_wavelet = false;
    }
    if let Some(b) = a.bin_width {
        cfg.bin_width = b;
    }
    if let Some(l) = a.label {
        cfg.label = l;
    }
    cfg.validate()?;

    let rows: Vec<CaseRow> = match (&a.image, &a.mask, &a.cases) {
        (Some(image), Some(mask), None) => {
            let case = image.file_name().unwrap_or_default().to_string_lossy().into_owned();
            vec![CaseRow { case, image: image.clone(), mask: mask.clone() }]
        }
        (None, None, Some(list)) => {
            let mut r = csv::Reader::from_path(list).map_err(medsynth_core::Error::from).context(list.display())?;
            let rows = r
                .deserialize::<CaseRow>()
                .collect::<Result<Vec<_>, _>>()
                .map_err(medsynth_core::Error::from)
                .context(list.display())?;
            rows.into_iter()
                .map(|c| CaseRow { image: relative_to(list, &c.image), mask: relative_to(list, &c.mask), case: c.case })
                .collect()
        }
        _ => return Err(Failure::validation("give either --image and --mask or --cases")),
    };
    if rows.is_empty() {
        return Err(Failure::validation("no cases to extract"));
    }
    let manifest = Manifest::from_config(&cfg);
    run.record(
        Some(&a.out),
        json!({ "extraction": cfg, "manifest_id": manifest.id, "features": manifest.len(), "cases": rows.len() }),
    )?;

    let cases = rows
        .iter()
        .map(|c| Ok((load_volume(&c.image, IntensityKind::Hu)?, load_mask(&c.mask)?)))
        .collect::<CliResult<Vec<(Volume, LabelMask)>>>()?;
    let mut vectors = Vec::with_capacity(cases.len());
    for (row, res) in rows.iter().zip(extract_batch(&cases, &cfg)) {
        vectors.push(res.context(format!("case {}", row.case))?);
    }
    let table = FeatureTable::from_vectors(rows.iter().map(|r| r.case.clone()).collect(), &vectors)?;
    save_table(&a.out, &table)?;
    print_json(&json!({ "cases": table.n_cases(), "features": table.columns.len(), "output": a.out }), None)
}

fn compare(run: &Run, a: &CompareArgs) -> CliResult<()> {
    run.record(a.out.as_deref(), json!({ "pca": !a.no_pca }))?;
    let real = load_table(&a.real)?;
    let synth = load_table(&a.synth)?;
    let ccc = ccc_report(&real, &synth)?;
    let pca = if a.no_pca { None } else { Some(pca_distance(&real, &synth)?) };
    if let Some(p) = &a.ccc_csv {
        ccc.write_csv(create(p)?).context(p.display())?;
    }
    if let (Some(p), Some(pca)) = (&a.pca_csv, &pca) {
        pca.write_scatter_csv(create(p)?).context(p.display())?;
    }
    print_json(&json!({ "categories": ccc.categories, "ccc": ccc.per_feature, "pca": pca }), a.out.as_deref())
}

fn metrics(run: &Run, a: &MetricsArgs) -> CliResult<()> {
    let groups = match &a.groups {
        Some(p) => {
            let p = resolve_config(p, run.config_dir())?;
            GroupMap::from_json(&fs::read_to_string(&p).context(p.display())?).context(p.display())?
        }
        None => GroupMap::bone_default(),
    };
    let ms_cfg = MsSsimConfig { data_range: a.data_range, ..MsSsimConfig::default() };
    let mode = match a.dsc_mode {
        DscModeArg::Semantic => DscMode::Semantic,
        DscModeArg::Instance => DscMode::Instance,
    };
    run.record(a.out.as_deref(), json!({ "ms_ssim": ms_cfg, "dsc_mode": mode, "groups": groups }))?;

    let mut report = serde_json::Map::new();
    if let Some(p) = &a.mae {
        let (x, y) = (load_volume(&p[0], IntensityKind::Arbitrary)?, load_volume(&p[1], IntensityKind::Arbitrary)?);
        report.insert("mae".into(), json!(mae(&x, &y)?));
    }
    if let Some(p) = &a.ms_ssim {
        let (x, y) = (load_volume(&p[0], IntensityKind::Arbitrary)?, load_volume(&p[1], IntensityKind::Arbitrary)?);
        report.insert("ms_ssim".into(), json!(ms_ssim_with(&x, &y, &ms_cfg)?));
    }
    if let Some(p) = &a.dsc {
        let r = dsc(&load_mask(&p[0])?, &load_mask(&p[1])?, mode, &groups)?;
        report.insert(
            "dsc".into(),
            json!({ "mode": r.mode, "mean": r.mean(), "per_structure": r.per_structure }),
        );
    }
    print_json(&Value::Object(report), a.out.as_deref())
}

fn sample_cmd(run: &Run, a: &SampleArgs) -> CliResult<()> {
    let kind: SamplerKind = a.sampler.parse()?;
    let schedule = linear_schedule(a.schedule_steps)?;
    let (spec_kind, spec) = a
        .denoiser
        .split_once(':')
        .ok_or_else(|| Failure::validation(format!("denoiser `{}` is not `<kind>:<argument>`", a.denoiser)))?;
    let dims = a.dims.as_deref().map(|d| dims3(d, "--dims")).transpose()?;
    let (denoiser, geometry, out_kind): (Box<dyn Denoiser>, Geometry, IntensityKind) = match spec_kind {
        "point-mass" => {
            let x0 = load_volume(Path::new(spec), IntensityKind::Arbitrary)?;
            if dims.is_some_and(|d| d != x0.dims()) {
                return Err(Failure::validation("--dims disagrees with the point-mass volume"));
            }
            let (g, k) = (*x0.geometry(), x0.kind());
            (Box::new(PointMass { x0 }), g, k)
        }
        "gaussian" => {
            let nums = spec
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::validation(format!("gaussian denoiser: {e}")))?;
            let [mean, std] = <[f64; 2]>::try_from(nums)
                .map_err(|_| Failure::validation("gaussian denoiser takes `<mean>,<std>`"))?;
            if !(std >= 0.0 && mean.is_finite() && std.is_finite()) {
                return Err(Failure::validation("gaussian denoiser needs a finite mean and std >= 0"));
            }
            let d = dims.ok_or_else(|| Failure::validation("the gaussian denoiser needs --dims"))?;
            (Box::new(GaussianDenoiser { mean, std }), Geometry::new(d, [1.0; 3])?, IntensityKind::Arbitrary)
        }
        other => return Err(Failure::validation(format!("unknown denoiser `{other}`"))),
    };
    let steps = if kind == SamplerKind::Linear { schedule.len() } else { a.steps };
    run.record(
        Some(&a.out),
        json!({
            "sampler": kind,
            "denoiser_calls": steps,
            "schedule": { "kind": "linear", "steps": a.schedule_steps, "beta_start": medsynth_core::diffusion::BETA_START, "beta_end": medsynth_core::diffusion::BETA_END },
            "dims": geometry.dims,
            "spacing": geometry.spacing,
        }),
    )?;
    let out = sample(denoiser.as_ref(), &schedule, kind, a.steps, geometry, None, run.cli.seed)?;
    if let Some(p) = &a.trajectory {
        write_trajectory_jsonl(&out.trajectory, std::io::BufWriter::new(create(p)?)).context(p.display())?;
    }
    // Keep the reference kind when the values allow it.
    let v = out.volume;
    let v = match v.clone().with_kind(out_kind) {
        Ok(k) => k,
        Err(_) => v,
    };
    save_volume(&a.out, &v, a.dtype)
}

fn inpaint_mask(run: &Run, a: &InpaintMaskArgs) -> CliResult<()> {
    let mode = match a.mode {
        MaskModeArg::Edge => MaskMode::Edge,
        MaskModeArg::Full => MaskMode::Full,
    };
    run.record(
        Some(&a.output),
        json!({ "mode": mode, "label": a.label, "dilation": a.dilation, "blur_factor": a.blur }),
    )?;
    let labels = load_mask(&a.labels)?;
    let binary = LabelMask::new(labels.geometry(), labels.labels().iter().map(|&l| u32::from(l == a.label)).collect())?;
    let mask = build_blur_mask_with(&binary, mode, a.dilation, a.blur)?;
    save_volume(&a.output, &mask.values, a.dtype)
}

/// A stored training batch for loss regression checks.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GanBatch {
    /// Real volumes `x`.
    real: Vec<PathBuf>,
    /// Generator outputs paired with `real`.
    generated: Vec<PathBuf>,
    /// Tumor label maps; missing means no tumor anywhere.
    #[serde(default)]
    tumor: Vec<PathBuf>,
    d_real: Vec<f64>,
    d_fake: Vec<f64>,
    #[serde(default)]
    grad_norms: Vec<f64>,
    #[serde(default)]
    diffusion: Option<DiffusionBatch>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiffusionBatch {
    x0: PathBuf,
    x0_hat: PathBuf,
    mask: PathBuf,
}

fn ganloss(run: &Run, a: &GanlossArgs) -> CliResult<()> {
    let lambdas = GanLambdas::preset(&a.preset)?;
    run.record(a.out.as_deref(), json!({ "lambdas": lambdas, "inpaint_lambda": INPAINT_LAMBDA }))?;
    let batch: GanBatch =
        serde_json::from_slice(&fs::read(&a.batch).context(a.batch.display())?).context(a.batch.display())?;
    let at = |p: &PathBuf| relative_to(&a.batch, p);
    let load = |p: &PathBuf| load_volume(&at(p), IntensityKind::Arbitrary);
    let x = batch.real.iter().map(load).collect::<CliResult<Vec<_>>>()?;
    let g = batch.generated.iter().map(load).collect::<CliResult<Vec<_>>>()?;
    let tumor = if batch.tumor.is_empty() {
        x.iter().map(|v| LabelMask::empty(*v.geometry())).collect()
    } else {
        batch.tumor.iter().map(|p| load_mask(&at(p))).collect::<CliResult<Vec<_>>>()?
    };
    let terms = generator_terms(&batch.d_fake, &x, &g, &tumor)?;
    let mut report = json!({
        "preset": a.preset,
        "generator": { "terms": terms, "total": terms.total(&lambdas) },
        "discriminator": discriminator_loss(&batch.d_real, &batch.d_fake, &batch.grad_norms, &lambdas)?,
    });
    if let Some(d) = &batch.diffusion {
        let (wdm, inpaint) = diffusion_losses(&load(&d.x0)?, &load(&d.x0_hat)?, &load_mask(&at(&d.mask))?, INPAINT_LAMBDA)?;
        report["diffusion"] = json!({ "wdm": wdm, "inpaint": inpaint });
    }
    print_json(&report, a.out.as_deref())
}

fn vtt_serve(run: &Run, a: &ServeArgs) -> CliResult<()> {
    fs::create_dir_all(&a.journal_dir).context(a.journal_dir.display())?;
    let mut hosted = Vec::new();
    let mut ids = Vec::new();
    for p in &a.session {
        let p = resolve_config(p, run.config_dir())?;
        let cfg = SessionConfig::load(&p).context(p.display())?;
        let journal = a.journal_dir.join(format!("{}.jsonl", cfg.id));
        let payload = a.payload_dir.clone().unwrap_or_else(|| p.parent().unwrap_or(Path::new(".")).to_path_buf());
        ids.push(json!({ "id": cfg.id, "journal": journal, "payload_dir": payload }));
        let session = VttSession::new(cfg, Journal::open(&journal).context(journal.display())?)?;
        hosted.push(HostedSession::new(session, payload));
    }
    run.record(None, json!({ "sessions": ids, "admin_routes": a.admin_token.is_some() }))?;
    let state = AppState::new(hosted, a.admin_token.clone());
    let rt = tokio::runtime::Runtime::new()?;
    eprintln!("listening on http://{}", a.addr);
    rt.block_on(medsynth_vtt::serve(a.addr, state, a.static_dir.clone()))?;
    Ok(())
}

fn vtt_report(run: &Run, a: &ReportArgs) -> CliResult<()> {
    let rc = ReportConfig::preset(&a.preset)?;
    run.record(a.out.as_deref(), json!({ "report": rc }))?;
    let p = resolve_config(&a.session, run.config_dir())?;
    let cfg = SessionConfig::load(&p).context(p.display())?;
    if !a.journal.exists() {
        return Err(Failure::from(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("journal {} not found", a.journal.display()),
        )));
    }
    let records = Journal::open(&a.journal).context(a.journal.display())?.records();
    if let Some(c) = &a.csv {
        write_ratings_csv(&records, create(c)?).context(c.display())?;
    }
    print_json(&session_report(&cfg, &records, &rc)?, a.out.as_deref())
}

//! Command implementations. Each one validates its inputs, does all of its
//! work in memory, and only then writes its output files.

use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::Days;
use loadcast_core::data::{
    chronological_split, fit_scaler, interpolate_missing, load_csv, make_windows, synthetic_series,
    validate, write_cleaned_csv, PointFlag, SynthConfig,
};
use loadcast_core::eval::{compare, evaluate, Evaluation, RunMetadata};
use loadcast_core::model::{decode, encode};
use loadcast_core::model::{forecast_recursive, Architecture, Model, TrainingContext};
use loadcast_core::train::{
    backward, gradient_check_against, random_batch, reduced_model, train_with,
};
use loadcast_core::{Scaler, TimeSeries, WindowedDataset};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::Outputs;

/// Summary lines go to the caller's writer; failing to print them is not
/// worth aborting a finished command for.
macro_rules! say {
    ($out:expr, $($arg:tt)*) => {
        let _ = writeln!($out, $($arg)*);
    };
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CleanCounts {
    pub total: usize,
    pub missing: usize,
    pub flagged: usize,
    pub imputed: usize,
}

/// load → validate → interpolate.
pub fn load_clean(path: &Path, max_mw: f64) -> Result<(TimeSeries, CleanCounts), CliError> {
    let raw = load_csv(path).map_err(CliError::stage("load"))?;
    let missing = raw.count(PointFlag::Missing);
    let unparsed = raw.count(PointFlag::Invalid);
    let (checked, reflagged) = validate(&raw, max_mw).map_err(CliError::stage("validate"))?;
    let clean = interpolate_missing(&checked)
        .map_err(CliError::stage(format!("interpolate {}", path.display())))?;
    let imputed = clean.imputed().iter().filter(|&&b| b).count();
    let counts = CleanCounts {
        total: clean.len(),
        missing,
        flagged: unparsed + reflagged,
        imputed,
    };
    Ok((clean, counts))
}

/// Train/test windows on the scale fitted to the training split.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub scaler: Scaler,
    pub train: WindowedDataset,
    pub test: WindowedDataset,
}

pub fn prepare(series: &TimeSeries, window: usize, horizon: usize, ratio: f64) -> Result<Prepared, CliError> {
    let (train, test) = chronological_split(series, ratio, window + horizon)
        .map_err(CliError::stage("split"))?;
    let scaler = fit_scaler(&train).map_err(CliError::stage("scale"))?;
    let frame = |s: &TimeSeries| make_windows(&scaler.transform_all(s.values()), window, horizon);
    let train = frame(&train).map_err(CliError::stage("window train split"))?;
    let test = frame(&test).map_err(CliError::stage("window test split"))?;
    Ok(Prepared { scaler, train, test })
}

fn csv_bytes(series: &TimeSeries) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_cleaned_csv(series, &mut buf).map_err(CliError::stage("write csv"))?;
    Ok(buf)
}

pub fn cmd_preprocess(cfg: &RunConfig, output: &Path, out: &mut dyn Write) -> Result<CleanCounts, CliError> {
    cfg.validate()?;
    let input = cfg.require_input()?;
    let (clean, counts) = load_clean(input, cfg.max_mw)?;
    let mut files = Outputs::default();
    files.add(output, csv_bytes(&clean)?);
    files.commit()?;
    say!(
        out,
        "total {} missing {} flagged {} imputed {}",
        counts.total, counts.missing, counts.flagged, counts.imputed
    );
    say!(out, "wrote {}", output.display());
    Ok(counts)
}

fn metadata(model: &Model, ctx: &TrainingContext) -> RunMetadata {
    RunMetadata {
        window: model.window(),
        horizon: ctx.horizon,
        seed: model.seed(),
        epochs: ctx.epochs,
    }
}

/// `metrics.json`, `metrics.txt` and `points.csv` for one evaluation.
fn add_metrics(files: &mut Outputs, dir: &Path, eval: &Evaluation, meta: RunMetadata) -> Result<(), CliError> {
    let report = compare(std::slice::from_ref(&eval.metrics), Some(meta))
        .map_err(CliError::stage("report"))?;
    let mut points = Vec::new();
    eval.write_points_csv(&mut points)
        .map_err(|e| CliError::stage("report")(loadcast_core::Error::io(dir, e)))?;
    files.add(dir.join("metrics.json"), report.json);
    files.add(dir.join("metrics.txt"), report.table);
    files.add(dir.join("points.csv"), points);
    Ok(())
}

fn train_model(
    cfg: &RunConfig,
    arch: Architecture,
    data: &Prepared,
    out: &mut dyn Write,
) -> Result<(Model, loadcast_core::TrainHistory), CliError> {
    let stage = |s: &str| CliError::stage(format!("{s} [{}]", arch.id()));
    let model = Model::build(arch, cfg.window, cfg.widths()?, cfg.train.seed).map_err(stage("build"))?;
    let total = cfg.train.epochs;
    let every = (total / 10).max(1);
    let (mut model, history) = train_with(model, &data.train, &cfg.train, |epoch, loss| {
        if epoch % every == 0 || epoch == total {
            say!(out, "[{}] epoch {epoch}/{total} loss {loss:.6e}", arch.id());
        }
    })
    .map_err(stage("train"))?;
    model.set_scaler(data.scaler);
    model.set_context(TrainingContext {
        horizon: cfg.horizon,
        split_ratio: cfg.split_ratio,
        max_mw: cfg.max_mw,
        epochs: cfg.train.epochs,
    });
    Ok((model, history))
}

/// Paths written by `train`.
#[derive(Clone, Debug)]
pub struct TrainOutputs {
    pub checkpoint: PathBuf,
    pub history: PathBuf,
    pub metrics: PathBuf,
    pub final_loss: f64,
}

pub fn cmd_train(cfg: &RunConfig, out: &mut dyn Write) -> Result<TrainOutputs, CliError> {
    cfg.validate()?;
    let input = cfg.require_input()?;
    let dir = cfg.require_out_dir()?;
    let (series, _) = load_clean(input, cfg.max_mw)?;
    let data = prepare(&series, cfg.window, cfg.horizon, cfg.split_ratio)?;
    let (model, history) = train_model(cfg, cfg.arch, &data, out)?;
    let eval = evaluate(&model, &data.test, &data.scaler).map_err(CliError::stage("evaluate"))?;

    let mut files = Outputs::default();
    let checkpoint = dir.join("model.dfc");
    files.add(&checkpoint, encode(&model).map_err(CliError::stage("checkpoint"))?);
    let mut hist = Vec::new();
    history
        .write_csv(&mut hist)
        .map_err(|e| CliError::stage("history")(loadcast_core::Error::io(dir, e)))?;
    files.add(dir.join("history.csv"), hist);
    let ctx = model.context().expect("context set by train_model").clone();
    add_metrics(&mut files, dir, &eval, metadata(&model, &ctx))?;
    files.commit()?;

    let final_loss = history.final_loss().unwrap_or(f64::NAN);
    say!(out, "final loss {final_loss:.6e}");
    say!(out, "test MAPE {:.4}%", eval.metrics.mape_pct);
    say!(out, "checkpoint {}", checkpoint.display());
    Ok(TrainOutputs {
        checkpoint,
        history: dir.join("history.csv"),
        metrics: dir.join("metrics.json"),
        final_loss,
    })
}

fn read_checkpoint(path: &Path) -> Result<Model, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::stage("load checkpoint")(loadcast_core::Error::io(path, e)))?;
    decode(&bytes).map_err(CliError::stage(format!("load checkpoint {}", path.display())))
}

/// The checkpoint together with the cleaned input series, checked against
/// each other.
fn checkpoint_and_series(
    checkpoint: &Path,
    input: &Path,
) -> Result<(Model, Scaler, TrainingContext, TimeSeries), CliError> {
    let model = read_checkpoint(checkpoint)?;
    let scaler = *model.scaler().ok_or_else(|| {
        CliError::Incompatible(format!("{} carries no scaler", checkpoint.display()))
    })?;
    let ctx = model.context().cloned().ok_or_else(|| {
        CliError::Incompatible(format!("{} carries no training context", checkpoint.display()))
    })?;
    let (series, _) = load_clean(input, ctx.max_mw)?;
    Ok((model, scaler, ctx, series))
}

/// Optional `(window, horizon)` the caller expects the checkpoint to have.
#[derive(Clone, Copy, Debug, Default)]
pub struct Expect {
    pub window: Option<usize>,
    pub horizon: Option<usize>,
}

pub fn cmd_evaluate(
    checkpoint: &Path,
    input: &Path,
    dir: &Path,
    expect: Expect,
    out: &mut dyn Write,
) -> Result<Evaluation, CliError> {
    let (model, scaler, ctx, series) = checkpoint_and_series(checkpoint, input)?;
    for (name, want, have) in [
        ("window", expect.window, model.window()),
        ("horizon", expect.horizon, ctx.horizon),
    ] {
        if let Some(want) = want.filter(|&w| w != have) {
            return Err(CliError::Incompatible(format!(
                "{name} {want} requested but {} was trained with {name} {have}",
                checkpoint.display()
            )));
        }
    }
    let data = prepare(&series, model.window(), ctx.horizon, ctx.split_ratio)?;
    if data.scaler != scaler {
        return Err(CliError::Incompatible(format!(
            "{} has training range [{}, {}] MW but the checkpoint was fitted on [{}, {}] MW",
            input.display(),
            data.scaler.x_min(),
            data.scaler.x_max(),
            scaler.x_min(),
            scaler.x_max()
        )));
    }
    let eval = evaluate(&model, &data.test, &scaler).map_err(CliError::stage("evaluate"))?;
    let mut files = Outputs::default();
    add_metrics(&mut files, dir, &eval, metadata(&model, &ctx))?;
    files.commit()?;
    let m = &eval.metrics;
    say!(
        out,
        "{}: MSE {:.4} RMSE {:.4} MAE {:.4} MAPE {:.4}% over {} test windows",
        m.model,
        m.normalized.mse,
        m.normalized.rmse,
        m.normalized.mae,
        m.mape_pct,
        eval.actual_mw.len()
    );
    say!(out, "wrote {}", dir.join("metrics.json").display());
    Ok(eval)
}

/// One dated forecast in MW.
#[derive(Clone, Debug, PartialEq)]
pub struct ForecastRow {
    pub date: chrono::NaiveDate,
    pub mw: f64,
}

pub fn cmd_forecast(
    checkpoint: &Path,
    input: &Path,
    steps: usize,
    output: &Path,
    out: &mut dyn Write,
) -> Result<Vec<ForecastRow>, CliError> {
    if steps < 1 {
        return Err(CliError::Config("steps must be >= 1".into()));
    }
    let (model, scaler, ctx, series) = checkpoint_and_series(checkpoint, input)?;
    if ctx.horizon != 1 {
        return Err(CliError::Incompatible(format!(
            "recursive forecasting rolls one day at a time, but {} predicts {} days ahead",
            checkpoint.display(),
            ctx.horizon
        )));
    }
    let w = model.window();
    if series.len() < w {
        return Err(CliError::stage("forecast")(loadcast_core::Error::SeriesTooShort {
            len: series.len(),
            required: w,
        }));
    }
    let seed = scaler.transform_all(&series.values()[series.len() - w..]);
    let scaled = forecast_recursive(&model, &seed, steps).map_err(CliError::stage("forecast"))?;
    let last = series.last_date().expect("non-empty series");
    let rows: Vec<ForecastRow> = scaler
        .inverse_all(&scaled)
        .into_iter()
        .enumerate()
        .map(|(k, mw)| ForecastRow {
            date: last + Days::new(k as u64 + 1),
            mw,
        })
        .collect();

    let mut text = String::from("date,forecast_mw\n");
    for r in &rows {
        text.push_str(&format!("{},{}\n", r.date.format("%Y-%m-%d"), r.mw));
    }
    let mut files = Outputs::default();
    files.add(output, text);
    files.commit()?;
    say!(
        out,
        "forecast {} days from {} to {}",
        steps,
        rows[0].date,
        rows[rows.len() - 1].date
    );
    say!(out, "wrote {}", output.display());
    Ok(rows)
}

pub fn cmd_compare(cfg: &RunConfig, out: &mut dyn Write) -> Result<loadcast_core::eval::Comparison, CliError> {
    cfg.validate()?;
    let input = cfg.require_input()?;
    let dir = cfg.require_out_dir()?;
    let (series, _) = load_clean(input, cfg.max_mw)?;
    let data = prepare(&series, cfg.window, cfg.horizon, cfg.split_ratio)?;
    let mut rows = Vec::with_capacity(Architecture::ALL.len());
    for arch in Architecture::ALL {
        let (model, _) = train_model(cfg, arch, &data, out)?;
        let eval = evaluate(&model, &data.test, &data.scaler)
            .map_err(CliError::stage(format!("evaluate [{}]", arch.id())))?;
        rows.push(eval.metrics);
    }
    let meta = RunMetadata {
        window: cfg.window,
        horizon: cfg.horizon,
        seed: cfg.train.seed,
        epochs: cfg.train.epochs,
    };
    let report = compare(&rows, Some(meta)).map_err(CliError::stage("report"))?;
    let mut files = Outputs::default();
    files.add(dir.join("comparison.txt"), report.table.clone());
    files.add(dir.join("comparison.json"), report.json.clone());
    files.commit()?;
    let _ = out.write_all(report.table.as_bytes());
    say!(out, "wrote {}", dir.join("comparison.json").display());
    Ok(report)
}

/// Gradient check settings.
#[derive(Clone, Copy, Debug)]
pub struct GradCheckArgs {
    pub seed: u64,
    pub tolerance: f64,
    pub step: f64,
    /// Doubles the largest dense-weight gradient before comparing.
    pub inject_fault: bool,
}

impl Default for GradCheckArgs {
    fn default() -> Self {
        GradCheckArgs {
            seed: 42,
            tolerance: loadcast_core::train::DEFAULT_TOLERANCE,
            step: loadcast_core::train::DEFAULT_STEP,
            inject_fault: false,
        }
    }
}

pub const GRADCHECK_BATCH: usize = 4;

pub fn cmd_gradcheck(
    args: GradCheckArgs,
    out: &mut dyn Write,
) -> Result<loadcast_core::train::GradCheckReport, CliError> {
    if !(args.tolerance > 0.0) || !(args.step > 0.0) {
        return Err(CliError::Config("tolerance and step must be positive".into()));
    }
    let model = reduced_model(args.seed).map_err(CliError::stage("build"))?;
    let (xs, ts) = random_batch(model.window(), GRADCHECK_BATCH, args.seed);
    let mut grads = backward(&model, &xs, &ts)
        .map_err(CliError::stage("backward"))?
        .grads;
    if args.inject_fault {
        let names = model.parameter_names();
        if let Some(p) = names.iter().rposition(|n| n.ends_with("dense.weight")) {
            let data = grads[p].data_mut();
            if let Some(v) = data.iter_mut().max_by(|a, b| a.abs().total_cmp(&b.abs())) {
                *v *= 2.0;
            }
        }
    }
    let report = gradient_check_against(&model, &xs, &ts, &grads, args.step, args.tolerance)
        .map_err(CliError::stage("gradient check"))?;
    say!(
        out,
        "reduced proposed model, window {}, batch {}, step {:e}: {} parameters checked",
        model.window(),
        GRADCHECK_BATCH,
        args.step,
        report.checked
    );
    say!(
        out,
        "max relative error {:.6e} (tolerance {:e})",
        report.max_rel_error,
        args.tolerance
    );
    if let Some(w) = &report.worst {
        say!(
            out,
            "worst entry {}[{}]: analytic {:.9e} numeric {:.9e}",
            w.name,
            w.index,
            w.analytic,
            w.numeric
        );
    }
    if report.passed {
        say!(out, "PASS");
        Ok(report)
    } else {
        let w = report.worst.as_ref().expect("failed report names an entry");
        say!(out, "FAIL");
        Err(CliError::GradCheck(format!(
            "{}[{}] has relative error {:.3e}",
            w.name, w.index, report.max_rel_error
        )))
    }
}

pub fn cmd_synth(cfg: &SynthConfig, output: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    if cfg.days < 2 {
        return Err(CliError::Config("days must be >= 2".into()));
    }
    let series = synthetic_series(cfg);
    let mut files = Outputs::default();
    files.add(output, csv_bytes(&series)?);
    files.commit()?;
    say!(out, "wrote {} days to {}", series.len(), output.display());
    Ok(())
}

//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits nonzero if any failed.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use loadcast_cli::{cmd_evaluate, cmd_gradcheck, run, Expect, GradCheckArgs};
use loadcast_core::data::{
    chronological_split, interpolate_missing, make_windows, window_count, PointFlag, Scaler,
    TimeSeries,
};
use loadcast_core::eval::{from_json, mae, mape, mse, rmse, EvalSeries, Scale};
use loadcast_core::model::{
    build_proposed, decode, load_model, predict, save_model, LayerSpec, KERNEL_SIZE,
};
use loadcast_core::nn::{
    bilstm_forward, conv1d_forward, lstm_cell_forward, maxpool1d, ConvParams, LstmParams, Padding,
};
use loadcast_core::{CheckpointError, Error, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)*) => {
        if !$cond {
            return Err(format!($($msg)*));
        }
    };
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["loadcast"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (
        code,
        String::from_utf8_lossy(&out).into_owned(),
        String::from_utf8_lossy(&err).into_owned(),
    )
}

fn cli_ok(args: &[&str]) -> Result<String, String> {
    let (code, out, err) = cli(args);
    ensure!(code == 0, "`{}` exited {code}: {err}", args.join(" "));
    Ok(out)
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn tensor(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch");
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------- 1

fn gradient_correctness() -> Outcome {
    let started = Instant::now();
    let mut log = Vec::new();
    let report = cmd_gradcheck(GradCheckArgs::default(), &mut log).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let widths = [4 * 3 + 4, 8 * 4 * 3 + 8, 16 * 8 * 3 + 16];
    let lstm = |d: usize| 4 * (8 * d + 8 * 8 + 8) * 2;
    let expected = widths.iter().sum::<usize>() + lstm(16) + lstm(16) + 17;
    ensure!(report.checked == expected, "checked {} entries, expected {expected}", report.checked);
    ensure!(report.max_rel_error < 1e-4, "max relative error {:.3e}", report.max_rel_error);
    ensure!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    let again = cmd_gradcheck(GradCheckArgs::default(), &mut Vec::new()).map_err(|e| e.to_string())?;
    ensure!(again.max_rel_error == report.max_rel_error, "max error differs between runs");
    Ok(format!(
        "max relative error {:.3e} over {} parameters in {:.1}s",
        report.max_rel_error,
        report.checked,
        elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------- 2

fn conv_oracle(x: &[f64], steps: usize, ch: usize, w: &[f64], b: &[f64], k: usize, same: bool) -> Vec<f64> {
    let filters = b.len();
    let pad = if same { (k - 1) / 2 } else { 0 };
    let out_len = if same { steps } else { steps - k + 1 };
    let mut y = vec![0.0; out_len * filters];
    for t in 0..out_len {
        for j in 0..filters {
            let mut acc = b[j];
            for c in 0..ch {
                for m in 0..k {
                    let src = t + m;
                    if src < pad || src - pad >= steps {
                        continue;
                    }
                    acc += x[(src - pad) * ch + c] * w[j * ch * k + c * k + m];
                }
            }
            y[t * filters + j] = acc;
        }
    }
    y
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Gate rows are ordered forget, input, output, candidate.
fn cell_oracle(x: &[f64], h: &[f64], c: &[f64], p: &LstmParams) -> (Vec<f64>, Vec<f64>) {
    let (u, d) = (h.len(), x.len());
    let (wd, ud, bd) = (p.w.data(), p.u.data(), p.b.data());
    let pre = |g: usize, k: usize| {
        let mut z = bd[g * u + k];
        for i in 0..d {
            z += wd[(g * u + k) * d + i] * x[i];
        }
        for i in 0..u {
            z += ud[(g * u + k) * u + i] * h[i];
        }
        z
    };
    let mut h2 = vec![0.0; u];
    let mut c2 = vec![0.0; u];
    for k in 0..u {
        let f = sigmoid(pre(0, k));
        let i = sigmoid(pre(1, k));
        let o = sigmoid(pre(2, k));
        let cand = pre(3, k).tanh();
        c2[k] = f * c[k] + i * cand;
        h2[k] = o * c2[k].tanh();
    }
    (h2, c2)
}

fn lstm_params(rng: &mut ChaCha8Rng, d: usize, u: usize) -> LstmParams {
    LstmParams::new(tensor(rng, &[4, u, d]), tensor(rng, &[4, u, u]), tensor(rng, &[4, u])).unwrap()
}

fn kernel_oracles() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0_f64;
    for same in [false, true] {
        for _ in 0..100 {
            let (steps, ch, filters) = (rng.random_range(5..20), rng.random_range(1..5), rng.random_range(1..6));
            let k = rng.random_range(1..6);
            let x = tensor(&mut rng, &[steps, ch]);
            let w = tensor(&mut rng, &[filters, ch, k]);
            let b = tensor(&mut rng, &[filters]);
            let expect = conv_oracle(x.data(), steps, ch, w.data(), b.data(), k, same);
            let pad = if same { Padding::Same } else { Padding::Valid };
            let got = conv1d_forward(&x, &ConvParams::new(w, b, pad).unwrap()).unwrap();
            worst = worst.max(max_abs_diff(got.data(), &expect));
        }
    }
    for _ in 0..100 {
        let (steps, ch, size) = (rng.random_range(2..20), rng.random_range(1..5), rng.random_range(1..4));
        if steps < size {
            continue;
        }
        let x = tensor(&mut rng, &[steps, ch]);
        let mut expect = Vec::new();
        for o in 0..steps / size {
            for c in 0..ch {
                let window = (0..size).map(|k| x.data()[(o * size + k) * ch + c]);
                expect.push(window.fold(f64::NEG_INFINITY, f64::max));
            }
        }
        let (got, _) = maxpool1d(&x, size).unwrap();
        worst = worst.max(max_abs_diff(got.data(), &expect));
    }
    for _ in 0..100 {
        let (d, u) = (rng.random_range(1..6), rng.random_range(1..6));
        let p = lstm_params(&mut rng, d, u);
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let h: Vec<f64> = (0..u).map(|_| rng.random_range(-1.0..1.0)).collect();
        let c: Vec<f64> = (0..u).map(|_| rng.random_range(-2.0..2.0)).collect();
        let (eh, ec) = cell_oracle(&x, &h, &c, &p);
        let (gh, gc) = lstm_cell_forward(&x, &h, &c, &p).unwrap();
        worst = worst.max(max_abs_diff(&gh, &eh)).max(max_abs_diff(&gc, &ec));
    }
    for case in 0..100 {
        let (steps, d, u) = (rng.random_range(1..8), rng.random_range(1..5), rng.random_range(1..5));
        let seq = tensor(&mut rng, &[steps, d]);
        let (fw, bw) = (lstm_params(&mut rng, d, u), lstm_params(&mut rng, d, u));
        let row = |t: usize| &seq.data()[t * d..(t + 1) * d];
        let mut fwd = vec![vec![0.0; u]; steps];
        let (mut h, mut c) = (vec![0.0; u], vec![0.0; u]);
        for (t, slot) in fwd.iter_mut().enumerate() {
            (h, c) = cell_oracle(row(t), &h, &c, &fw);
            *slot = h.clone();
        }
        let mut bwd = vec![vec![0.0; u]; steps];
        let (mut h, mut c) = (vec![0.0; u], vec![0.0; u]);
        for t in (0..steps).rev() {
            (h, c) = cell_oracle(row(t), &h, &c, &bw);
            bwd[t] = h.clone();
        }
        let return_sequences = case % 2 == 0;
        let expect: Vec<f64> = if return_sequences {
            (0..steps).flat_map(|t| fwd[t].iter().chain(&bwd[t]).copied()).collect()
        } else {
            fwd[steps - 1].iter().chain(&bwd[0]).copied().collect()
        };
        let got = bilstm_forward(&seq, &fw, &bw, return_sequences).unwrap();
        worst = worst.max(max_abs_diff(got.data(), &expect));
    }
    let elapsed = started.elapsed();
    ensure!(worst <= 1e-12, "largest deviation from scalar oracle {worst:.3e}");
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("500 cases, largest deviation {worst:.1e}"))
}

// ---------------------------------------------------------------- 3

/// Exactly rounded sum (Shewchuk's partials).
fn fsum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut kept = 0;
        for i in 0..partials.len() {
            let mut y = partials[i];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[kept] = lo;
                kept += 1;
            }
            x = hi;
        }
        partials.truncate(kept);
        partials.push(x);
    }
    partials.iter().rev().fold(0.0, |acc, p| acc + p)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn metric_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let actual: Vec<f64> = (0..1000).map(|_| rng.random_range(2500.0..4000.0)).collect();
        let forecast: Vec<f64> = actual.iter().map(|a| a + rng.random_range(-150.0..150.0)).collect();
        let n = actual.len() as f64;
        let pairs = || actual.iter().zip(&forecast);
        let o_mape = 100.0 * fsum(pairs().map(|(a, f)| (a - f).abs() / a.abs())) / n;
        let o_mae = fsum(pairs().map(|(a, f)| (a - f).abs())) / n;
        let o_mse = fsum(pairs().map(|(a, f)| (a - f) * (a - f))) / n;
        let o_rmse = o_mse.sqrt();
        let series = EvalSeries::new(actual.clone(), forecast.clone(), Scale::Mw).unwrap();
        for (got, want) in [
            (mape(&series).unwrap(), o_mape),
            (mae(&series), o_mae),
            (mse(&series), o_mse),
            (rmse(&series), o_rmse),
        ] {
            worst = worst.max(rel(got, want));
        }
        let r = rmse(&series);
        ensure!(rel(r * r, mse(&series)) <= 1e-9, "RMSE^2 != MSE");
    }
    ensure!(worst <= 1e-9, "largest relative deviation from oracle {worst:.3e}");

    let actual: Vec<f64> = (0..200).map(|_| rng.random_range(0.1..5.0)).collect();
    let forecast: Vec<f64> = actual.iter().map(|a| a * rng.random_range(0.8..1.2)).collect();
    let base = mape(&EvalSeries::new(actual.clone(), forecast.clone(), Scale::Normalized).unwrap()).unwrap();
    let mut drift = 0.0_f64;
    for _ in 0..100 {
        let magnitude = 10f64.powf(rng.random_range(-6.0..6.0));
        let k = if rng.random_bool(0.5) { magnitude } else { -magnitude };
        let scaled = EvalSeries::new(
            actual.iter().map(|a| a * k).collect(),
            forecast.iter().map(|f| f * k).collect(),
            Scale::Mw,
        )
        .unwrap();
        drift = drift.max(rel(mape(&scaled).unwrap(), base));
    }
    ensure!(drift <= 1e-9, "MAPE moved by {drift:.3e} under rescaling");
    Ok(format!("oracle deviation {worst:.1e}, rescaling drift {drift:.1e}"))
}

// ---------------------------------------------------------------- 4

fn day(i: usize) -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 1, 1).unwrap() + chrono::Days::new(i as u64)
}

fn pipeline_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);

    let scaler = Scaler::new(2900.0, 3700.0).unwrap();
    let mut round = 0.0_f64;
    for _ in 0..1000 {
        let x = rng.random_range(100.0..10_000.0);
        round = round.max(rel(scaler.inverse_transform(scaler.transform(x)), x));
    }
    ensure!(round < 1e-12, "scaler round trip error {round:.3e}");

    let mut interp = 0.0_f64;
    for _ in 0..50 {
        let len = rng.random_range(3..120);
        let (a, b) = (rng.random_range(1000.0..4000.0), rng.random_range(-20.0..20.0));
        let truth: Vec<f64> = (0..len).map(|t| a + b * t as f64).collect();
        let mut values = truth.clone();
        let mut flags = vec![PointFlag::Observed; len];
        for t in 1..len - 1 {
            if rng.random_bool(0.4) {
                values[t] = f64::NAN;
                flags[t] = PointFlag::Missing;
            }
        }
        let series = TimeSeries::new((0..len).map(day).collect(), values, flags).unwrap();
        let filled = interpolate_missing(&series).unwrap();
        ensure!(filled.is_complete(), "interpolation left gaps");
        for (got, want) in filled.values().iter().zip(&truth) {
            interp = interp.max(rel(*got, *want));
        }
    }
    ensure!(interp < 1e-9, "interpolation error {interp:.3e}");

    for _ in 0..50 {
        let len = rng.random_range(4..200);
        let values: Vec<f64> = (0..len).map(|_| rng.random_range(2000.0..4000.0)).collect();
        let series = TimeSeries::from_values(day(0), values);
        let ratio = rng.random_range(0.3..0.9);
        let (train, test) = match chronological_split(&series, ratio, 1) {
            Ok(parts) => parts,
            Err(_) => continue,
        };
        let dates: Vec<_> = train.dates().iter().chain(test.dates()).copied().collect();
        let values: Vec<f64> = train.values().iter().chain(test.values()).copied().collect();
        ensure!(dates == series.dates(), "split dates do not concatenate back");
        ensure!(values == series.values(), "split values do not concatenate back");
        ensure!(train.len() == (ratio * len as f64).floor() as usize, "split point");
    }

    let mut cells = 0;
    for len in 1usize..=40 {
        let series: Vec<f64> = (0..len).map(|i| i as f64).collect();
        for w in 1..=10 {
            for h in 1..=5 {
                cells += 1;
                let expected = (len + 1).checked_sub(w + h).filter(|&n| n > 0);
                ensure!(window_count(len, w, h) == expected, "window_count({len}, {w}, {h})");
                match (make_windows(&series, w, h), expected) {
                    (Ok(ds), Some(n)) => {
                        ensure!(ds.len() == n, "sample count for ({len}, {w}, {h})");
                        for i in 0..n {
                            ensure!(ds.inputs[i] == series[i..i + w], "window {i}");
                            ensure!(ds.targets[i] == (i + w - 1 + h) as f64, "target {i}");
                        }
                    }
                    (Err(Error::SeriesTooShort { .. }), None) => {}
                    (other, _) => return Err(format!("({len}, {w}, {h}): {:?}", other.map(|d| d.len()))),
                }
            }
        }
    }
    Ok(format!(
        "scaler {round:.1e}, interpolation {interp:.1e}, {cells} window grid cells"
    ))
}

// ---------------------------------------------------------------- 5

const REDUCED: [&str; 4] = ["--filters", "4,8,16", "--units", "8"];

fn learning_surrogate() -> Outcome {
    let started = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let raw = dir.path().join("synthetic.csv");
    let clean = dir.path().join("clean.csv");
    cli_ok(&["synth", "--output", s(&raw), "--days", "2190", "--seed", "42"])?;
    let summary = cli_ok(&["preprocess", "--input", s(&raw), "--output", s(&clean)])?;
    ensure!(summary.contains("total 2190"), "preprocess summary: {summary}");

    let run_dir = dir.path().join("train");
    let mut args = vec!["train", "--input", s(&clean), "--out-dir", s(&run_dir), "--window", "8", "--epochs", "200"];
    args.extend(REDUCED);
    cli_ok(&args)?;
    let report = from_json(&std::fs::read_to_string(run_dir.join("metrics.json")).unwrap())
        .map_err(|e| e.to_string())?;
    let mape_pct = report.rows[0].mape_pct;
    ensure!(mape_pct < 5.0, "test MAPE {mape_pct:.3}%");

    let cmp_dir = dir.path().join("compare");
    let mut args = vec!["compare", "--input", s(&clean), "--out-dir", s(&cmp_dir), "--window", "8", "--epochs", "200"];
    args.extend(REDUCED);
    cli_ok(&args)?;
    let table = std::fs::read_to_string(cmp_dir.join("comparison.txt")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    ensure!(lines.len() == 5, "expected header + 4 rows:\n{table}");
    let header: Vec<&str> = lines[0].split_whitespace().collect();
    ensure!(header == ["Model", "MSE", "RMSE", "MAE", "MAPE(%)"], "header {header:?}");
    let names = ["LSTM", "CNN-BiLSTM", "CNN-LSTM", "Proposed Method"];
    for (line, name) in lines[1..].iter().zip(names) {
        ensure!(line.starts_with(name), "row order: {line}");
    }
    ensure!(table.matches(" *").count() == 1, "exactly one best row:\n{table}");
    let json = from_json(&std::fs::read_to_string(cmp_dir.join("comparison.json")).unwrap())
        .map_err(|e| e.to_string())?;
    ensure!(json.rows.len() == 4, "json rows");
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(900), "took {elapsed:?}");
    let best = lines.iter().find(|l| l.ends_with('*')).unwrap().split("  ").next().unwrap();
    Ok(format!(
        "proposed test MAPE {mape_pct:.3}%, compare best {best}, {:.0}s",
        elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------- 6

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = dir.path().join("data.csv");
    cli_ok(&["synth", "--output", s(&data), "--days", "400", "--seed", "3"])?;
    let mut checkpoints = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let mut args = vec!["train", "--input", s(&data), "--out-dir", s(&out), "--epochs", "5", "--seed", "11"];
        args.extend(REDUCED);
        cli_ok(&args)?;
        checkpoints.push(std::fs::read(out.join("model.dfc")).unwrap());
    }
    ensure!(checkpoints[0] == checkpoints[1], "checkpoints differ");

    let model = dir.path().join("a/model.dfc");
    let mut reports = Vec::new();
    for run in ["e1", "e2"] {
        let out = dir.path().join(run);
        cmd_evaluate(&model, &data, &out, Expect::default(), &mut Vec::new()).map_err(|e| e.to_string())?;
        reports.push(std::fs::read(out.join("metrics.json")).unwrap());
    }
    ensure!(reports[0] == reports[1], "evaluate JSON differs");
    ensure!(
        reports[0] == std::fs::read(dir.path().join("a/metrics.json")).unwrap(),
        "evaluate disagrees with train's closing report"
    );
    Ok(format!("{}-byte checkpoints identical, evaluate JSON identical", checkpoints[0].len()))
}

// ---------------------------------------------------------------- 7

fn rewrite_version(bytes: &[u8], version: u32) -> Vec<u8> {
    let nl = bytes.iter().position(|&b| b == b'\n').unwrap();
    let mut header: serde_json::Value = serde_json::from_slice(&bytes[4..nl]).unwrap();
    header["version"] = version.into();
    let mut out = b"DFC1".to_vec();
    out.extend(serde_json::to_vec(&header).unwrap());
    out.extend_from_slice(&bytes[nl..bytes.len() - 4]);
    let crc = crc32fast::hash(&out[4..]);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

fn serialization() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut model = build_proposed(32, 0.25, 5).map_err(|e| e.to_string())?;
    model.set_scaler(Scaler::new(2900.0, 3700.0).unwrap());
    let path = dir.path().join("m.dfc");
    save_model(&model, &path).map_err(|e| e.to_string())?;
    let loaded = load_model(&path).map_err(|e| e.to_string())?;
    for (a, b) in model.parameters().iter().zip(loaded.parameters()) {
        let same = a.data().iter().zip(b.data()).all(|(x, y)| x.to_bits() == y.to_bits());
        ensure!(same && a.shape() == b.shape(), "parameters differ after round trip");
    }
    ensure!(loaded == model, "model differs after round trip");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let w: Vec<f64> = (0..32).map(|_| rng.random::<f64>()).collect();
        let (p, q) = (predict(&model, &w).unwrap(), predict(&loaded, &w).unwrap());
        ensure!(p.to_bits() == q.to_bits(), "prediction differs: {p} vs {q}");
    }

    let bytes = std::fs::read(&path).unwrap();
    let mut corrupt = bytes.clone();
    let mid = corrupt.len() - 100;
    corrupt[mid] ^= 0x40;
    match decode(&corrupt) {
        Err(Error::Checkpoint(CheckpointError::Checksum { .. })) => {}
        other => return Err(format!("corrupted payload gave {:?}", other.map(|_| ()))),
    }
    match decode(&rewrite_version(&bytes, 99)) {
        Err(Error::Checkpoint(CheckpointError::UnsupportedVersion { found: 99, supported })) => {
            ensure!(supported == [1], "supported list {supported:?}");
        }
        other => return Err(format!("version 99 gave {:?}", other.map(|_| ()))),
    }
    ensure!(decode(&rewrite_version(&bytes, 1)).is_ok(), "re-encoded version 1 rejected");

    // same failure through the command line
    let bad = dir.path().join("bad.dfc");
    std::fs::write(&bad, &corrupt).unwrap();
    let data = dir.path().join("d.csv");
    cli_ok(&["synth", "--output", s(&data), "--days", "200"])?;
    let out = dir.path().join("eval");
    let (code, _, err) = cli(&["evaluate", "--checkpoint", s(&bad), "--input", s(&data), "--out-dir", s(&out)]);
    ensure!(code == 2 && err.contains("checksum"), "cli gave {code}: {err}");
    ensure!(!out.exists(), "partial output left behind");
    Ok(format!("{} parameters bit-identical; checksum and version errors distinct", model.parameter_count()))
}

// ---------------------------------------------------------------- 8

fn full_size_construction() -> Outcome {
    let model = build_proposed(32, 1.0, 42).map_err(|e| e.to_string())?;
    let manifest = model.manifest();
    let kinds: Vec<&str> = model.layers().iter().map(|l| l.kind()).collect();
    let expected_kinds = [
        "conv1d", "relu", "max_pool", "conv1d", "relu", "max_pool", "conv1d", "relu", "max_pool",
        "bi_lstm", "bi_lstm", "dense",
    ];
    ensure!(kinds == expected_kinds, "layer kinds {kinds:?}");

    let mut in_ch = 1;
    for (i, filters) in [64, 128, 256].into_iter().enumerate() {
        let spec = &manifest[3 * i].layer;
        let want = LayerSpec::Conv1d {
            in_channels: in_ch,
            filters,
            kernel: 3,
            padding: Padding::Same,
        };
        ensure!(*spec == want, "conv {i}: {spec:?}");
        ensure!(manifest[3 * i + 2].layer == LayerSpec::MaxPool { size: 2 }, "pool {i}");
        in_ch = filters;
    }
    ensure!(KERNEL_SIZE == 3, "kernel size constant");
    ensure!(
        manifest[9].layer == LayerSpec::BiLstm { input: 256, units: 256, return_sequences: true },
        "first BiLSTM {:?}",
        manifest[9].layer
    );
    ensure!(
        manifest[10].layer == LayerSpec::BiLstm { input: 512, units: 256, return_sequences: false },
        "second BiLSTM {:?}",
        manifest[10].layer
    );
    ensure!(manifest[11].layer == LayerSpec::Dense { inputs: 512, outputs: 1 }, "dense head");

    let shapes: Vec<Vec<usize>> = manifest.iter().map(|m| m.output_shape.clone()).collect();
    let expected_shapes: Vec<Vec<usize>> = vec![
        vec![32, 64], vec![32, 64], vec![16, 64],
        vec![16, 128], vec![16, 128], vec![8, 128],
        vec![8, 256], vec![8, 256], vec![4, 256],
        vec![4, 512], vec![512], vec![1],
    ];
    ensure!(shapes == expected_shapes, "shape chain {shapes:?}");

    // independent tally: conv k*c_in*f + f, lstm direction 4u(d + u + 1), dense 512 + 1
    let conv = |c: usize, f: usize| 3 * c * f + f;
    let direction = |d: usize, u: usize| 4 * u * (d + u + 1);
    let tally = conv(1, 64) + conv(64, 128) + conv(128, 256)
        + 2 * direction(256, 256)
        + 2 * direction(512, 256)
        + 513;
    ensure!(model.parameter_count() == tally, "{} parameters, tally {tally}", model.parameter_count());
    ensure!(tally == 2_749_569, "tally {tally}");
    Ok(format!("12 layers, shape chain 32->16->8->4, width 512, {tally} parameters"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("gradient correctness", gradient_correctness),
        ("kernel oracles", kernel_oracles),
        ("metric oracles", metric_oracles),
        ("pipeline exactness", pipeline_exactness),
        ("desk-scale learning surrogate", learning_surrogate),
        ("determinism", determinism),
        ("serialization", serialization),
        ("full-size construction", full_size_construction),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail}) [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail}) [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

//! Daily demand series: CSV ingest, validation, gap imputation and splitting.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{Days, NaiveDate};

use crate::error::{Error, Result};

/// Upper plausibility bound for a single day's city demand, in MW.
pub const DEFAULT_MAX_MW: f64 = 10_000.0;

/// Status of one point in a [`TimeSeries`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointFlag {
    Observed,
    Missing,
    Invalid,
}

/// A gap-free daily series of demand observations in MW.
///
/// Missing and invalid points hold `NaN` until [`interpolate_missing`]
/// fills them. `imputed[i]` records whether point `i` was filled in.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
    flags: Vec<PointFlag>,
    imputed: Vec<bool>,
}

impl TimeSeries {
    pub fn new(dates: Vec<NaiveDate>, values: Vec<f64>, flags: Vec<PointFlag>) -> Result<Self> {
        if dates.len() != values.len() || dates.len() != flags.len() {
            return Err(Error::InvalidParameter(format!(
                "series columns disagree: {} dates, {} values, {} flags",
                dates.len(),
                values.len(),
                flags.len()
            )));
        }
        for pair in dates.windows(2) {
            if pair[0].succ_opt() != Some(pair[1]) {
                return Err(Error::InvalidParameter(format!(
                    "dates must advance by exactly one day ({} -> {})",
                    pair[0], pair[1]
                )));
            }
        }
        let imputed = vec![false; dates.len()];
        Ok(TimeSeries {
            dates,
            values,
            flags,
            imputed,
        })
    }

    /// Fully observed series starting at `start`.
    pub fn from_values(start: NaiveDate, values: Vec<f64>) -> Self {
        let dates = (0..values.len() as u64)
            .map(|i| start + Days::new(i))
            .collect();
        let flags = vec![PointFlag::Observed; values.len()];
        let imputed = vec![false; values.len()];
        TimeSeries {
            dates,
            values,
            flags,
            imputed,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn flags(&self) -> &[PointFlag] {
        &self.flags
    }

    pub fn imputed(&self) -> &[bool] {
        &self.imputed
    }

    pub fn count(&self, flag: PointFlag) -> usize {
        self.flags.iter().filter(|&&f| f == flag).count()
    }

    /// True when every point is observed (possibly after imputation).
    pub fn is_complete(&self) -> bool {
        self.flags.iter().all(|&f| f == PointFlag::Observed)
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.dates.last().copied()
    }

    fn slice(&self, range: std::ops::Range<usize>) -> TimeSeries {
        TimeSeries {
            dates: self.dates[range.clone()].to_vec(),
            values: self.values[range.clone()].to_vec(),
            flags: self.flags[range.clone()].to_vec(),
            imputed: self.imputed[range].to_vec(),
        }
    }
}

/// Reads a `date,demand_mw` CSV (an optional third `imputed` column is
/// accepted and ignored).
///
/// Rows are sorted by date and calendar days absent from the file are
/// materialized as missing points. Empty demand cells become missing;
/// unparseable ones become invalid.
pub fn load_csv(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, path)
}

pub fn read_csv<R: Read>(reader: R, path: &Path) -> Result<TimeSeries> {
    let csv_err = |line: u64, message: String| Error::Csv {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| csv_err(1, e.to_string()))?
        .clone();
    if headers.get(0) != Some("date") || headers.get(1) != Some("demand_mw") {
        return Err(csv_err(
            1,
            format!("expected header `date,demand_mw`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        ));
    }

    let mut rows: Vec<(NaiveDate, f64, PointFlag, u64)> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            csv_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let date_cell = record.get(0).unwrap_or("");
        let date = NaiveDate::parse_from_str(date_cell, "%Y-%m-%d")
            .map_err(|e| csv_err(line, format!("bad date `{date_cell}`: {e}")))?;
        let (value, flag) = match record.get(1).unwrap_or("") {
            "" => (f64::NAN, PointFlag::Missing),
            cell => match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => (v, PointFlag::Observed),
                _ => (f64::NAN, PointFlag::Invalid),
            },
        };
        rows.push((date, value, flag, line));
    }
    if rows.is_empty() {
        return Err(Error::EmptySeries);
    }

    rows.sort_by_key(|r| r.0);
    for pair in rows.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(Error::DuplicateDate {
                date: pair[1].0,
                line: pair[0].3.max(pair[1].3),
            });
        }
    }

    let first = rows[0].0;
    let span = (rows[rows.len() - 1].0 - first).num_days() as usize + 1;
    let mut dates = Vec::with_capacity(span);
    let mut values = vec![f64::NAN; span];
    let mut flags = vec![PointFlag::Missing; span];
    for i in 0..span {
        dates.push(first + Days::new(i as u64));
    }
    for (date, value, flag, _) in rows {
        let i = (date - first).num_days() as usize;
        values[i] = value;
        flags[i] = flag;
    }
    TimeSeries::new(dates, values, flags)
}

/// Writes the cleaned-series schema `date,demand_mw,imputed`.
pub fn write_cleaned_csv<W: Write>(series: &TimeSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let to_err = |e: csv::Error| Error::InvalidParameter(format!("csv write: {e}"));
    w.write_record(["date", "demand_mw", "imputed"])
        .map_err(to_err)?;
    for i in 0..series.len() {
        let value = if series.values[i].is_nan() {
            String::new()
        } else {
            series.values[i].to_string()
        };
        w.write_record([
            series.dates[i].format("%Y-%m-%d").to_string(),
            value,
            u8::from(series.imputed[i]).to_string(),
        ])
        .map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

/// Re-flags implausible observations (`value <= 0` or `value > max_mw`) as
/// invalid and returns how many points were re-flagged.
pub fn validate(series: &TimeSeries, max_mw: f64) -> Result<(TimeSeries, usize)> {
    if !(max_mw > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "max_mw must be positive, got {max_mw}"
        )));
    }
    let mut out = series.clone();
    let mut anomalies = 0;
    for (value, flag) in out.values.iter_mut().zip(out.flags.iter_mut()) {
        if *flag == PointFlag::Observed && (*value <= 0.0 || *value > max_mw) {
            *flag = PointFlag::Invalid;
            *value = f64::NAN;
            anomalies += 1;
        }
    }
    Ok((out, anomalies))
}

/// Fills every missing or invalid point by linear interpolation between
/// its nearest observed neighbours, using day index as the abscissa.
///
/// Points before the first or after the last observation take the value
/// of that nearest observation.
pub fn interpolate_missing(series: &TimeSeries) -> Result<TimeSeries> {
    let known: Vec<usize> = (0..series.len())
        .filter(|&i| series.flags[i] == PointFlag::Observed)
        .collect();
    if known.is_empty() {
        return Err(Error::InsufficientObservations { observed: 0 });
    }
    if known.len() < 2 {
        return Err(Error::InsufficientObservations {
            observed: known.len(),
        });
    }

    let mut out = series.clone();
    let first = known[0];
    let last = known[known.len() - 1];
    for i in 0..first {
        out.values[i] = series.values[first];
    }
    for i in last + 1..series.len() {
        out.values[i] = series.values[last];
    }
    for pair in known.windows(2) {
        let (x1, x2) = (pair[0], pair[1]);
        let (y1, y2) = (series.values[x1], series.values[x2]);
        for x in x1 + 1..x2 {
            out.values[x] = y1 + (x - x1) as f64 * (y2 - y1) / (x2 - x1) as f64;
        }
    }
    for i in 0..series.len() {
        if series.flags[i] != PointFlag::Observed {
            out.flags[i] = PointFlag::Observed;
            out.imputed[i] = true;
        }
    }
    Ok(out)
}

/// Splits off the first `floor(ratio * len)` points for training and the
/// rest for testing. Each side must keep at least `min_len` points.
pub fn chronological_split(
    series: &TimeSeries,
    ratio: f64,
    min_len: usize,
) -> Result<(TimeSeries, TimeSeries)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "split ratio must lie in (0, 1), got {ratio}"
        )));
    }
    if !series.is_complete() {
        return Err(Error::InvalidParameter(
            "series must be fully imputed before splitting".into(),
        ));
    }
    let cut = (ratio * series.len() as f64).floor() as usize;
    if cut < min_len {
        return Err(Error::SplitTooSmall {
            side: "train",
            len: cut,
            required: min_len,
        });
    }
    if series.len() - cut < min_len {
        return Err(Error::SplitTooSmall {
            side: "test",
            len: series.len() - cut,
            required: min_len,
        });
    }
    Ok((series.slice(0..cut), series.slice(cut..series.len())))
}

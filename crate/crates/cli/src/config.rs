//! The `key = value` run configuration shared by every command.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use loadcast_core::data::DEFAULT_MAX_MW;
use loadcast_core::model::{Architecture, Widths, WINDOW_MULTIPLE};
use loadcast_core::TrainConfig;

use crate::error::CliError;

/// Every setting a command may need. Unset paths stay `None` until a
/// command demands them.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub window: usize,
    pub horizon: usize,
    pub split_ratio: f64,
    pub max_mw: f64,
    pub arch: Architecture,
    pub width_scale: f64,
    /// Explicit conv filter counts; overrides `width_scale` for the conv stack.
    pub filters: Option<[usize; 3]>,
    /// Explicit units per (Bi)LSTM direction; overrides `width_scale`.
    pub units: Option<usize>,
    pub train: TrainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            out_dir: None,
            window: 32,
            horizon: 1,
            split_ratio: 0.8,
            max_mw: DEFAULT_MAX_MW,
            arch: Architecture::Proposed,
            width_scale: 1.0,
            filters: None,
            units: None,
            train: TrainConfig::default(),
        }
    }
}

pub const KEYS: &[&str] = &[
    "input",
    "out_dir",
    "window",
    "horizon",
    "split_ratio",
    "max_mw",
    "arch",
    "width_scale",
    "filters",
    "units",
    "learning_rate",
    "beta1",
    "beta2",
    "epsilon",
    "batch_size",
    "epochs",
    "seed",
    "shuffle",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::Config(format!("{key} = {value:?}: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::Config(format!("{key} = {value:?}: expected true or false"))),
    }
}

pub fn parse_filters(value: &str) -> Result<[usize; 3], CliError> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(CliError::Config(format!(
            "filters = {value:?}: expected three comma-separated counts"
        )));
    }
    let mut out = [0; 3];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = parse("filters", part)?;
    }
    Ok(out)
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "input" => self.input = Some(PathBuf::from(value)),
            "out_dir" => self.out_dir = Some(PathBuf::from(value)),
            "window" => self.window = parse(key, value)?,
            "horizon" => self.horizon = parse(key, value)?,
            "split_ratio" => self.split_ratio = parse(key, value)?,
            "max_mw" => self.max_mw = parse(key, value)?,
            "arch" => {
                self.arch = value
                    .parse()
                    .map_err(|e| CliError::Config(format!("arch = {value:?}: {e}")))?
            }
            "width_scale" => self.width_scale = parse(key, value)?,
            "filters" => self.filters = Some(parse_filters(value)?),
            "units" => self.units = Some(parse(key, value)?),
            "learning_rate" => self.train.learning_rate = parse(key, value)?,
            "beta1" => self.train.beta1 = parse(key, value)?,
            "beta2" => self.train.beta2 = parse(key, value)?,
            "epsilon" => self.train.epsilon = parse(key, value)?,
            "batch_size" => self.train.batch_size = parse(key, value)?,
            "epochs" => self.train.epochs = parse(key, value)?,
            "seed" => self.train.seed = parse(key, value)?,
            "shuffle" => self.train.shuffle = parse_bool(key, value)?,
            _ => {
                return Err(CliError::Config(format!(
                    "unknown key `{key}` (known keys: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Applies every line of a config file on top of `self`. Blank lines
    /// and `#` comments are ignored; a key may appear only once.
    pub fn apply_text(&mut self, text: &str, origin: &Path) -> Result<(), CliError> {
        let mut seen = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |msg: String| CliError::Config(format!("{}:{}: {msg}", origin.display(), n + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at(format!("expected `key = value`, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.contains(&key) {
                return Err(at(format!("duplicate key `{key}`")));
            }
            seen.push(key);
            self.set(key, value).map_err(|e| at(e.to_string()))?;
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        self.apply_text(&text, path)
    }

    /// Layer widths implied by `width_scale` and any explicit overrides.
    pub fn widths(&self) -> Result<Widths, CliError> {
        let mut widths = Widths::scaled(self.width_scale).map_err(CliError::from_core_config)?;
        if let Some(f) = self.filters {
            widths.filters = f;
        }
        if let Some(u) = self.units {
            widths.units = u;
        }
        if widths.filters.contains(&0) || widths.units == 0 {
            return Err(CliError::Config(format!("layer widths must be >= 1, got {widths:?}")));
        }
        Ok(widths)
    }

    /// Checks every numeric setting against the preconditions of the
    /// stages that will consume it.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.window < WINDOW_MULTIPLE || !self.window.is_multiple_of(WINDOW_MULTIPLE) {
            return bad(format!(
                "window must be a positive multiple of {WINDOW_MULTIPLE}, got {}",
                self.window
            ));
        }
        if self.horizon < 1 {
            return bad("horizon must be >= 1".into());
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return bad(format!("split_ratio must lie in (0, 1), got {}", self.split_ratio));
        }
        if !(self.max_mw > 0.0 && self.max_mw.is_finite()) {
            return bad(format!("max_mw must be positive, got {}", self.max_mw));
        }
        self.widths()?;
        self.train.validate().map_err(CliError::from_core_config)?;
        for (name, path) in [("input", &self.input), ("out_dir", &self.out_dir)] {
            if path.as_ref().is_some_and(|p| p.as_os_str().is_empty()) {
                return bad(format!("{name} must not be empty"));
            }
        }
        Ok(())
    }

    pub fn require_input(&self) -> Result<&Path, CliError> {
        self.input
            .as_deref()
            .ok_or_else(|| CliError::Config("no input file given (--input or `input =`)".into()))
    }

    pub fn require_out_dir(&self) -> Result<&Path, CliError> {
        self.out_dir
            .as_deref()
            .ok_or_else(|| CliError::Config("no output directory given (--out-dir or `out_dir =`)".into()))
    }
}

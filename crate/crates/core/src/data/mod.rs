//! Raw series ingest, cleaning, scaling and supervised framing.

mod scaler;
mod series;
mod synth;
mod window;

pub use scaler::{fit_scaler, Scaler};
pub use series::{
    chronological_split, interpolate_missing, load_csv, read_csv, validate, write_cleaned_csv,
    PointFlag, TimeSeries, DEFAULT_MAX_MW,
};
pub use synth::{synthetic_series, SynthConfig};
pub use window::{make_windows, window_count, WindowedDataset};

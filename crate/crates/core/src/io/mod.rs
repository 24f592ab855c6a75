//! Configuration files, CSV series and binary checkpoints.

mod checkpoint;
mod config;
mod csv;

pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, read_checkpoint, read_checkpoint_full, write_checkpoint,
    write_checkpoint_with_progress, Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use config::{load_config, ConfigIssue, OutputConfig, RunConfig};
pub use csv::{
    fmt_float, read_columns, series_to_csv, split_columns, write_series, Columns, SERIES_COLUMNS,
};

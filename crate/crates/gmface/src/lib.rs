//! Std companion to `gmface-core`: PGM images, GMFACE model files, CSV
//! exports, dataset loading, a thread-pool executor and the `gmface` CLI.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod export;
pub mod model_file;
pub mod parallel;
pub mod pgm;

pub use gmface_core as core;

pub use dataset::load_dataset;
pub use error::{Error, ModelFileError, Result};
pub use export::{export_loss_history, export_sections, export_surface, Section};
pub use model_file::{
    common_face, decode_model, encode_model, read_model, read_precision_table, write_model,
};
pub use parallel::PoolExecutor;
pub use pgm::{read_image, write_image};

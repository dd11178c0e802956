//! WAV ingestion, window segmentation, orchestration and result output.

mod config;
mod engine;
mod output;
mod wav;

pub use config::{ForcePipeline, PipelineConfig};
pub use engine::{run, segment_windows, write_plot_data, Engine, WindowTrace};
pub use output::{emit_results, parse_csv, parse_jsonl, OutputFormat, CSV_HEADER};
pub use wav::{decode_wav, read_wav};

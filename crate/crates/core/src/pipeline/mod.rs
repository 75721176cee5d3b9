//! Event-by-event reconstruction and frame read-out.

mod engine;
mod pgm;
mod render;
mod run;

pub use engine::{EngineError, ReconstructionEngine};
pub use pgm::{frame_file_name, save_frame, write_pgm};
pub use render::{render_values, Frame, RenderMeta, ScaleMode, MID_GRAY};
pub use run::{run, DiagnosticsWriter, FrameRecord, ReadoutSchedule, RunError, RunSummary};

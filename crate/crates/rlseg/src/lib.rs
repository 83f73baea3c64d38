//! Page segmentation for run-length compressed binary text documents.
//!
//! Documents are held as a run matrix (alternating white/black run-length
//! pairs, one row per pixel row). The pipeline detects and normalizes
//! inverted text regions, finds vertical column separators by virtually
//! popping pixel columns out of the horizontal runs, cuts the page into
//! ordered column blocks, and splits each block into text blocks,
//! paragraphs, lines, words, and characters. The decompressed bitmap is
//! never materialized inside the segmentation path; a pixel-domain
//! reference implementation exists for equivalence testing and benchmarks.

pub mod alloc_track;
pub mod bitmap;
pub mod columns;
pub mod cursor;
pub mod error;
pub mod eval;
pub mod fine;
pub mod formats;
pub mod geom;
pub mod inverted;
pub mod oracle;
pub mod pipeline;
pub mod rows;
pub mod run_matrix;
pub mod synth;
pub mod tree;

pub use bitmap::Bitmap;
pub use error::{Error, Result};
pub use eval::{EvalReport, GroundTruth};
pub use geom::Rect;
pub use oracle::reference_oracle;
pub use pipeline::{run_pipeline, PipelineConfig};
pub use run_matrix::{RunMatrix, RunPair};
pub use tree::{NodeKind, SegmentNode, SegmentTree};

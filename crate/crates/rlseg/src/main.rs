//! rlseg: page segmentation for run-length compressed text documents.
//!
//! Exit codes: 0 success, 1 invalid input, 2 configuration error.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use rlseg::alloc_track;
use rlseg::bitmap::{Bitmap, BLACK};
use rlseg::error::Error;
use rlseg::eval::{accuracy, GroundTruth};
use rlseg::formats::{read_pbm, read_rlc, write_pbm, write_pbm_ascii, write_rlc};
use rlseg::inverted::normalize_document;
use rlseg::oracle::reference_oracle;
use rlseg::pipeline::{run_pipeline, PipelineConfig};
use rlseg::run_matrix::RunMatrix;
use rlseg::synth::{generate, LayoutSpec};
use rlseg::tree::{SegmentNode, SegmentTree};

#[global_allocator]
static ALLOC: alloc_track::TrackingAllocator = alloc_track::TrackingAllocator;

#[derive(Parser)]
#[command(name = "rlseg", version, about = "Page segmentation on run-length compressed documents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a PBM bitmap into an RLC file.
    Encode {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Decompress an RLC file into a PBM bitmap.
    Decode {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Write ASCII P1 instead of packed P4.
        #[arg(long)]
        ascii: bool,
    },
    /// Detect inverted text regions and toggle them to normal polarity.
    /// Prints the toggled row ranges as JSON.
    Toggle {
        input: PathBuf,
        /// Write the normalized document here.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Majority filter width (odd).
        #[arg(long, default_value_t = 9)]
        window: u32,
    },
    /// Segment a compressed document into the nested region tree.
    Segment {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Draw the detected rectangles onto the decoded bitmap.
        #[arg(long)]
        overlay: Option<PathBuf>,
        /// Write the detected vertical column separators as JSON.
        #[arg(long)]
        separators: Option<PathBuf>,
        /// Threshold configuration (JSON; absent keys take defaults).
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Generate a synthetic document: <prefix>.pbm, <prefix>.gt.json,
    /// <prefix>.tree.json.
    Gen {
        spec: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Score a detected segment tree against ground-truth lines.
    Eval {
        detected: PathBuf,
        ground_truth: PathBuf,
        /// Required overlap fraction per axis.
        #[arg(long, default_value_t = 0.5)]
        overlap: f64,
        /// Count only missed lines, not spurious detections.
        #[arg(long)]
        misses_only: bool,
    },
    /// Run both the compressed-domain and the decompress-then-segment
    /// paths, reporting time, memory, and tree equality.
    Bench {
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(match run(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::InvalidParameter(_) | Error::InfeasibleSpec(_) | Error::Json(_) => 2,
                _ => 1,
            }
        }
    });
}

fn load_config(path: &Option<PathBuf>) -> Result<PipelineConfig, Error> {
    let config = match path {
        None => PipelineConfig::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text)?
        }
    };
    config.validate()?;
    Ok(config)
}

fn read_rlc_file(path: &Path) -> Result<RunMatrix, Error> {
    read_rlc(&mut BufReader::new(File::open(path)?))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Encode { input, output } => {
            let bitmap = read_pbm(&mut BufReader::new(File::open(&input)?))?;
            let matrix = RunMatrix::from_bitmap(&bitmap);
            write_rlc(&mut BufWriter::new(File::create(&output)?), &matrix)?;
        }
        Command::Decode {
            input,
            output,
            ascii,
        } => {
            let matrix = read_rlc_file(&input)?;
            let bitmap = matrix.to_bitmap();
            let mut writer = BufWriter::new(File::create(&output)?);
            if ascii {
                write_pbm_ascii(&mut writer, &bitmap)?;
            } else {
                write_pbm(&mut writer, &bitmap)?;
            }
        }
        Command::Toggle {
            input,
            output,
            window,
        } => {
            let matrix = read_rlc_file(&input)?;
            let (normalized, regions) = normalize_document(matrix, window)?;
            println!("{}", serde_json::to_string(&regions)?);
            if let Some(path) = output {
                write_rlc(&mut BufWriter::new(File::create(&path)?), &normalized)?;
            }
        }
        Command::Segment {
            input,
            output,
            overlay,
            separators,
            config,
        } => {
            let config = load_config(&config)?;
            let matrix = read_rlc_file(&input)?;
            let tree = run_pipeline(&matrix, &config)?;
            serde_json::to_writer_pretty(BufWriter::new(File::create(&output)?), &tree)?;
            if let Some(path) = separators {
                let work = if config.despeckle_min_black > 0 {
                    matrix.despeckle(config.despeckle_min_black)
                } else {
                    matrix.clone()
                };
                let (normalized, _) = normalize_document(work, config.smooth_window)?;
                let list = rlseg::columns::detect_separators(
                    &normalized,
                    &config.separator_params(matrix.height()),
                );
                serde_json::to_writer_pretty(BufWriter::new(File::create(&path)?), &list)?;
            }
            if let Some(path) = overlay {
                let mut bitmap = matrix.to_bitmap();
                draw_outlines(&mut bitmap, &tree.root);
                write_pbm(&mut BufWriter::new(File::create(&path)?), &bitmap)?;
            }
        }
        Command::Gen { spec, output } => {
            let text = std::fs::read_to_string(&spec)?;
            let spec: LayoutSpec = serde_json::from_str(&text)?;
            let (bitmap, ground_truth, tree) = generate(&spec)?;
            let prefix = output.to_string_lossy();
            write_pbm(
                &mut BufWriter::new(File::create(format!("{prefix}.pbm"))?),
                &bitmap,
            )?;
            serde_json::to_writer_pretty(
                BufWriter::new(File::create(format!("{prefix}.gt.json"))?),
                &ground_truth,
            )?;
            serde_json::to_writer_pretty(
                BufWriter::new(File::create(format!("{prefix}.tree.json"))?),
                &tree,
            )?;
        }
        Command::Eval {
            detected,
            ground_truth,
            overlap,
            misses_only,
        } => {
            let tree: SegmentTree = serde_json::from_reader(BufReader::new(File::open(&detected)?))?;
            let gt: GroundTruth =
                serde_json::from_reader(BufReader::new(File::open(&ground_truth)?))?;
            let report = accuracy(&gt, &tree.lines(), overlap, !misses_only)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Bench { input, config } => {
            let config = load_config(&config)?;
            let matrix = read_rlc_file(&input)?;

            let started = Instant::now();
            let (compressed_tree, compressed_peak) =
                alloc_track::measure_peak_growth(|| run_pipeline(&matrix, &config));
            let compressed_tree = compressed_tree?;
            let compressed_ms = started.elapsed().as_secs_f64() * 1e3;

            let bitmap = matrix.to_bitmap();
            let started = Instant::now();
            let (oracle_tree, oracle_peak) =
                alloc_track::measure_peak_growth(|| reference_oracle(&bitmap, &config));
            let oracle_tree = oracle_tree?;
            let oracle_ms = started.elapsed().as_secs_f64() * 1e3;

            let report = serde_json::json!({
                "height": matrix.height(),
                "width": matrix.width(),
                "bitmap_bytes": bitmap.byte_len(),
                "bitmap_packed_bytes": bitmap.packed_byte_len(),
                "compressed_path": {
                    "time_ms": compressed_ms,
                    "peak_aux_bytes": compressed_peak,
                    "lines": compressed_tree.lines().len(),
                },
                "conventional_path": {
                    "time_ms": oracle_ms,
                    "peak_aux_bytes": oracle_peak,
                    "lines": oracle_tree.lines().len(),
                },
                "trees_equal": compressed_tree == oracle_tree,
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
    }
    Ok(())
}

/// Draws one-pixel rectangle outlines for every tree node onto the bitmap.
fn draw_outlines(bitmap: &mut Bitmap, node: &SegmentNode) {
    let r = node.rect;
    for c in r.left..=r.right {
        bitmap.set(r.top, c, BLACK);
        bitmap.set(r.bottom, c, BLACK);
    }
    for row in r.top..=r.bottom {
        bitmap.set(row, r.left, BLACK);
        bitmap.set(row, r.right, BLACK);
    }
    for child in &node.children {
        draw_outlines(bitmap, child);
    }
}

//! Acceptance suite: one pass/fail line per criterion.
//!
//! Runs as a single sequential test so the heap measurements of the memory
//! criterion are not polluted by concurrent tests. Run with
//! `cargo test --test acceptance -- --nocapture` to see the per-criterion
//! lines on success.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rlseg::alloc_track;
use rlseg::bitmap::Bitmap;
use rlseg::cursor::{ColumnCursor, PopStatus};
use rlseg::eval::{accuracy, EvalReport};
use rlseg::fine::{classify_column_gap, ColumnGapClass, FineParams};
use rlseg::geom::Rect;
use rlseg::inverted::{normalize_document, toggle_rows, RowRange};
use rlseg::oracle::reference_oracle;
use rlseg::pipeline::{run_pipeline, PipelineConfig};
use rlseg::rows::{classify_row_gap, RowGapClass, RowParams};
use rlseg::run_matrix::{RunMatrix, RunPair};
use rlseg::synth::{generate, BandSpec, InvertedBandSpec, LayoutSpec};

#[global_allocator]
static ALLOC: alloc_track::TrackingAllocator = alloc_track::TrackingAllocator;

#[test]
fn acceptance() {
    let corpus = build_corpus();
    let mut failures = Vec::new();
    let mut run = |number: usize, name: &str, body: &mut dyn FnMut() -> String| {
        match catch_unwind(AssertUnwindSafe(body)) {
            Ok(detail) => println!("[PASS] criterion {number} ({name}): {detail}"),
            Err(panic) => {
                let msg = panic
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                println!("[FAIL] criterion {number} ({name}): {msg}");
                failures.push(number);
            }
        }
    };

    run(1, "metric reproduction", &mut criterion_metrics);
    run(2, "virtual decompression replay", &mut criterion_cursor_replay);
    run(3, "oracle equivalence", &mut || criterion_equivalence(&corpus));
    run(4, "codec soundness", &mut criterion_codec);
    run(5, "toggle correctness", &mut criterion_toggle);
    run(6, "inverted band recovery", &mut || criterion_inverted(&corpus));
    run(7, "memory bound", &mut criterion_memory);
    run(8, "threshold boundaries", &mut criterion_thresholds);

    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}

/// Accuracy formulas on the reported aggregate counts.
fn criterion_metrics() -> String {
    let all = EvalReport::from_counts(463, 0, 10950, 501).unwrap();
    let pct_all = all.a_ps * 100.0;
    assert!(
        (pct_all - 95.42).abs() <= 0.01,
        "A_ps(10950, 501) = {pct_all:.4}%, want 95.42 +-0.01"
    );
    let test_docs = EvalReport::from_counts(463, 0, 9772, 426).unwrap();
    let pct_test = test_docs.a_ps * 100.0;
    assert!(
        (pct_test - 95.64).abs() <= 0.01,
        "A_ps(9772, 426) = {pct_test:.4}%, want 95.64 +-0.01"
    );
    let inverted = EvalReport::from_counts(463, 0, 10950, 0).unwrap();
    assert_eq!(inverted.a_rl, Some(1.0), "A_rl(463, 0) must be 100%");
    format!("A_ps {pct_all:.2}% / {pct_test:.2}%, A_rl 100%")
}

/// First six passes of the worked virtual-decompression example: popped
/// transitions, remaining head values, and statuses.
fn criterion_cursor_replay() -> String {
    let rows: Vec<Vec<RunPair>> = vec![
        vec![RunPair::new(14, 0)],
        vec![RunPair::new(2, 2), RunPair::new(4, 5), RunPair::new(1, 0)],
        vec![RunPair::new(1, 4), RunPair::new(3, 5), RunPair::new(1, 0)],
        vec![RunPair::new(1, 4), RunPair::new(3, 5), RunPair::new(1, 0)],
    ];
    let matrix = RunMatrix::from_pairs(4, 14, &rows).unwrap();
    let mut cursor = ColumnCursor::new(&matrix);

    use PopStatus::{Pop, ShiftPop};
    #[allow(clippy::type_complexity)]
    let expected: [(Vec<u8>, [[u32; 5]; 4], [PopStatus; 4]); 6] = [
        (
            vec![0, 0, 0, 0],
            [[13, 0, 0, 0, 0], [1, 2, 4, 5, 1], [0, 4, 3, 5, 1], [0, 4, 3, 5, 1]],
            [Pop, Pop, Pop, Pop],
        ),
        (
            vec![0, 0, 1, 1],
            [[12, 0, 0, 0, 0], [0, 2, 4, 5, 1], [0, 3, 3, 5, 1], [0, 3, 3, 5, 1]],
            [Pop, Pop, Pop, Pop],
        ),
        (
            vec![0, 1, 1, 1],
            [[11, 0, 0, 0, 0], [0, 1, 4, 5, 1], [0, 2, 3, 5, 1], [0, 2, 3, 5, 1]],
            [Pop, Pop, Pop, Pop],
        ),
        (
            vec![0, 1, 1, 1],
            [[10, 0, 0, 0, 0], [0, 0, 4, 5, 1], [0, 1, 3, 5, 1], [0, 1, 3, 5, 1]],
            [Pop, Pop, Pop, Pop],
        ),
        (
            vec![0, 0, 1, 1],
            [[9, 0, 0, 0, 0], [3, 5, 1, 0, 0], [0, 0, 3, 5, 1], [0, 0, 3, 5, 1]],
            [Pop, ShiftPop, Pop, Pop],
        ),
        (
            vec![0, 0, 0, 0],
            [[8, 0, 0, 0, 0], [2, 5, 1, 0, 0], [2, 5, 1, 0, 0], [2, 5, 1, 0, 0]],
            [Pop, Pop, ShiftPop, ShiftPop],
        ),
    ];

    for (pass, (taus, heads, statuses)) in expected.iter().enumerate() {
        let pop = cursor.pop_column().unwrap();
        assert_eq!(&pop.transitions, taus, "pass {} transitions", pass + 1);
        assert_eq!(&pop.statuses[..], &statuses[..], "pass {} statuses", pass + 1);
        for (row, expected_slots) in heads.iter().enumerate() {
            let snapshot = cursor.row_snapshot(row as u32);
            assert_eq!(
                &snapshot[..5],
                &expected_slots[..],
                "pass {} row {} head values",
                pass + 1,
                row + 1
            );
            assert_eq!(snapshot[5], 0, "pass {} row {} padding", pass + 1, row + 1);
        }
    }
    "6 passes x 4 rows of transitions, head values, and statuses match".into()
}

struct CorpusDoc {
    name: String,
    config: PipelineConfig,
    bitmap: Bitmap,
    ground_truth: rlseg::GroundTruth,
    expected: rlseg::SegmentTree,
    stacked: bool,
}

/// Deterministic synthetic corpus: a mix of single/two/three column pages,
/// stacked complex layouts with a shared separator strip, inverted bands
/// (page wide and column local), and speckled documents segmented with
/// despeckling enabled.
fn build_corpus() -> Vec<CorpusDoc> {
    let mut docs = Vec::new();
    let default_cfg = PipelineConfig::default();
    let despeckle_cfg = PipelineConfig {
        despeckle_min_black: 3,
        ..PipelineConfig::default()
    };

    let mut push = |name: String, mut spec: LayoutSpec, config: &PipelineConfig, stacked: bool| {
        let base = spec.seed;
        for attempt in 0..60 {
            spec.seed = base + attempt * 1009;
            match generate(&spec) {
                Ok((bitmap, ground_truth, expected)) => {
                    docs.push(CorpusDoc {
                        name: name.clone(),
                        config: config.clone(),
                        bitmap,
                        ground_truth,
                        expected,
                        stacked,
                    });
                    return;
                }
                Err(_) if attempt + 1 < 60 => continue,
                Err(e) => panic!("{name}: no feasible seed near {base}: {e}"),
            }
        }
    };

    let single = |seed| LayoutSpec {
        seed,
        ..LayoutSpec::default()
    };
    let two_col = |seed| LayoutSpec {
        page_width: 900,
        page_height: 1000,
        bands: vec![BandSpec {
            columns: 2,
            height: 920,
        }],
        seed,
        ..LayoutSpec::default()
    };
    let three_col = |seed| LayoutSpec {
        page_width: 1300,
        page_height: 1100,
        bands: vec![BandSpec {
            columns: 3,
            height: 1020,
        }],
        seed,
        ..LayoutSpec::default()
    };
    let page_band = |start| InvertedBandSpec {
        band: 0,
        column: None,
        start_line: start,
        line_count: 4,
        pad: 3,
    };

    for i in 0..18u64 {
        push(format!("single-{i}"), single(100 + i), &default_cfg, false);
    }
    for i in 0..12u64 {
        let mut spec = single(300 + i);
        spec.inverted_bands = vec![page_band(2 + (i % 5) as u32)];
        push(format!("single-inverted-{i}"), spec, &default_cfg, false);
    }
    for i in 0..6u64 {
        let mut spec = single(500 + i);
        spec.speckle_count = 40;
        push(format!("single-speckled-{i}"), spec, &despeckle_cfg, false);
    }

    for i in 0..18u64 {
        push(format!("two-col-{i}"), two_col(700 + i), &default_cfg, false);
    }
    for i in 0..12u64 {
        let mut spec = two_col(900 + i);
        spec.inverted_bands = vec![page_band(3 + (i % 6) as u32)];
        push(format!("two-col-inverted-{i}"), spec, &default_cfg, false);
    }
    for i in 0..4u64 {
        let mut spec = two_col(1100 + i);
        spec.speckle_count = 50;
        push(format!("two-col-speckled-{i}"), spec, &despeckle_cfg, false);
    }

    for i in 0..12u64 {
        push(format!("three-col-{i}"), three_col(1300 + i), &default_cfg, false);
    }
    for i in 0..8u64 {
        let mut spec = three_col(1500 + i);
        spec.inverted_bands = vec![InvertedBandSpec {
            band: 0,
            column: Some(1 + (i % 2) as u32),
            start_line: 2 + (i % 4) as u32,
            line_count: 5,
            pad: 3,
        }];
        push(format!("three-col-local-inverted-{i}"), spec, &default_cfg, false);
    }

    // stacked layouts in the style of a complex page with bands of varying
    // column counts; the outer bands share one separator strip
    for i in 0..8u64 {
        let spec = LayoutSpec {
            page_width: 1700,
            page_height: 2000,
            bands: vec![
                BandSpec { columns: 2, height: 580 },
                BandSpec { columns: 3, height: 580 },
                BandSpec { columns: 2, height: 580 },
            ],
            indent: 0,
            separator_rules: true,
            seed: 1700 + i,
            ..LayoutSpec::default()
        };
        push(format!("stacked-232-{i}"), spec, &default_cfg, true);
    }
    for i in 0..4u64 {
        let spec = LayoutSpec {
            page_width: 1700,
            page_height: 2000,
            bands: vec![
                BandSpec { columns: 3, height: 580 },
                BandSpec { columns: 2, height: 580 },
                BandSpec { columns: 3, height: 580 },
            ],
            indent: 0,
            separator_rules: true,
            seed: 1900 + i,
            ..LayoutSpec::default()
        };
        push(format!("stacked-323-{i}"), spec, &default_cfg, true);
    }

    docs
}

/// Pipeline vs pixel oracle vs generator ground truth, node for node.
fn criterion_equivalence(corpus: &[CorpusDoc]) -> String {
    let started = Instant::now();
    assert!(corpus.len() >= 100, "corpus has {} documents", corpus.len());
    let inverted = corpus
        .iter()
        .filter(|d| d.ground_truth.inverted_count() > 0)
        .count();
    assert!(
        inverted * 10 >= corpus.len() * 3,
        "only {inverted} of {} documents carry inverted bands",
        corpus.len()
    );
    let stacked = corpus.iter().filter(|d| d.stacked).count();
    assert!(
        stacked * 10 >= corpus.len(),
        "only {stacked} of {} documents are stacked layouts",
        corpus.len()
    );

    for doc in corpus {
        let matrix = RunMatrix::from_bitmap(&doc.bitmap);
        let pipeline_tree = run_pipeline(&matrix, &doc.config).unwrap();
        let oracle_tree = reference_oracle(&doc.bitmap, &doc.config).unwrap();
        assert_eq!(
            pipeline_tree, doc.expected,
            "{}: pipeline tree differs from ground truth",
            doc.name
        );
        assert_eq!(
            oracle_tree, doc.expected,
            "{}: oracle tree differs from ground truth",
            doc.name
        );
        pipeline_tree.check_nesting().unwrap();
        let report = accuracy(
            &doc.ground_truth,
            &pipeline_tree.lines(),
            doc.config.overlap_fraction,
            true,
        )
        .unwrap();
        assert_eq!(report.a_ps, 1.0, "{}: A_ps below 100%", doc.name);
        assert_eq!(report.l_er, 0, "{}: line errors", doc.name);
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed < Duration::from_secs(60),
        "equivalence run took {elapsed:?}"
    );
    format!(
        "{} documents ({inverted} inverted, {stacked} stacked) equal on all three routes, A_ps 100%, {:.1}s",
        corpus.len(),
        elapsed.as_secs_f64()
    )
}

fn random_bitmap(rng: &mut ChaCha8Rng, max_dim: u32, ink: f64) -> Bitmap {
    let h = rng.gen_range(1..=max_dim);
    let w = rng.gen_range(1..=max_dim);
    let pixels = (0..h * w).map(|_| u8::from(rng.gen_bool(ink))).collect();
    Bitmap::from_pixels(h, w, pixels).unwrap()
}

fn random_rect(rng: &mut ChaCha8Rng, h: u32, w: u32) -> Rect {
    let top = rng.gen_range(0..h);
    let bottom = rng.gen_range(top..h);
    let left = rng.gen_range(0..w);
    let right = rng.gen_range(left..w);
    Rect::new(top, bottom, left, right)
}

/// Round trips and compressed crops against pixel slicing.
fn criterion_codec() -> String {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0DEC);
    for case in 0..10_000u32 {
        let bitmap = random_bitmap(&mut rng, 64, 0.4);
        let matrix = RunMatrix::from_bitmap(&bitmap);
        assert_eq!(matrix.to_bitmap(), bitmap, "round trip case {case}");
    }
    for case in 0..10_000u32 {
        let bitmap = random_bitmap(&mut rng, 64, 0.4);
        let matrix = RunMatrix::from_bitmap(&bitmap);
        let rect = random_rect(&mut rng, bitmap.height(), bitmap.width());
        let cropped = matrix.crop(rect).unwrap();
        let expected = RunMatrix::from_bitmap(&bitmap.crop(rect).unwrap());
        assert_eq!(cropped, expected, "crop case {case} rect {rect:?}");
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(30), "codec run took {elapsed:?}");
    format!(
        "10000 round trips and 10000 crops exact, {:.1}s",
        elapsed.as_secs_f64()
    )
}

/// Toggle as pixel complement, involution, and normalize idempotence.
fn criterion_toggle() -> String {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x106613);
    for case in 0..1000u32 {
        let bitmap = random_bitmap(&mut rng, 48, 0.5);
        let matrix = RunMatrix::from_bitmap(&bitmap);
        let top = rng.gen_range(0..bitmap.height());
        let bottom = rng.gen_range(top..bitmap.height());
        let range = RowRange::new(top, bottom);

        let toggled = toggle_rows(&matrix, range).unwrap();
        let mut complemented = bitmap.clone();
        complemented.complement(Rect::new(top, bottom, 0, bitmap.width() - 1));
        assert_eq!(toggled.to_bitmap(), complemented, "complement case {case}");
        assert_eq!(
            toggle_rows(&toggled, range).unwrap(),
            matrix,
            "involution case {case}"
        );

        let window = [1u32, 3, 5, 9][case as usize % 4];
        let (once, _) = normalize_document(matrix, window).unwrap();
        let (twice, map) = normalize_document(once.clone(), window).unwrap();
        assert_eq!(twice, once, "idempotence case {case} (window {window})");
        assert!(
            map.inverted.is_empty(),
            "normalized document still reports inverted rows (case {case})"
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(10), "toggle run took {elapsed:?}");
    format!(
        "1000 toggles complement exactly, involute, and normalize idempotently, {:.1}s",
        elapsed.as_secs_f64()
    )
}

/// Every injected inverted band is recovered with zero missed lines.
fn criterion_inverted(corpus: &[CorpusDoc]) -> String {
    let mut total_inverted = 0u32;
    let mut docs = 0usize;
    for doc in corpus {
        let r_gt = doc.ground_truth.inverted_count();
        if r_gt == 0 {
            continue;
        }
        docs += 1;
        total_inverted += r_gt;
        let matrix = RunMatrix::from_bitmap(&doc.bitmap);
        let tree = run_pipeline(&matrix, &doc.config).unwrap();
        let report = accuracy(
            &doc.ground_truth,
            &tree.lines(),
            doc.config.overlap_fraction,
            true,
        )
        .unwrap();
        assert_eq!(report.r_er, 0, "{}: missed inverted lines", doc.name);
        assert_eq!(report.a_rl, Some(1.0), "{}: A_rl below 100%", doc.name);
    }
    assert!(docs > 0 && total_inverted > 0, "corpus carries no inverted lines");
    format!("{total_inverted} inverted lines across {docs} documents, R_er = 0")
}

/// Compressed-path auxiliary memory on a large three-column page stays
/// below the decoded bitmap, measured against the packed one-bit size.
fn criterion_memory() -> String {
    let spec = LayoutSpec {
        page_width: 2201,
        page_height: 3081,
        bands: vec![BandSpec {
            columns: 3,
            height: 3001,
        }],
        glyph_width: 24,
        glyph_height: 30,
        char_gap: 4,
        word_gap: 48,
        line_gap: 8,
        chars_per_word: [2, 3],
        indent: 50,
        seed: 42,
        ..LayoutSpec::default()
    };
    let mut bitmap = None;
    for attempt in 0..40u64 {
        let mut s = spec.clone();
        s.seed = spec.seed + attempt * 977;
        if let Ok((b, _, _)) = generate(&s) {
            bitmap = Some(b);
            break;
        }
    }
    let bitmap = bitmap.expect("no feasible seed for the memory-bound page");
    let matrix = RunMatrix::from_bitmap(&bitmap);
    let config = PipelineConfig::default();

    let started = Instant::now();
    let (tree, peak_aux) = alloc_track::measure_peak_growth(|| run_pipeline(&matrix, &config));
    let elapsed = started.elapsed();
    let tree = tree.unwrap();
    assert_eq!(tree.root.children.len(), 3, "three column blocks expected");

    let unpacked = bitmap.byte_len(); // one byte per pixel
    let packed = bitmap.packed_byte_len(); // one bit per pixel
    assert!(
        peak_aux < unpacked,
        "auxiliary {peak_aux} B not below the decoded bitmap {unpacked} B"
    );
    assert!(
        peak_aux < packed,
        "auxiliary {peak_aux} B not below the packed bitmap equivalent {packed} B"
    );
    assert!(elapsed < Duration::from_secs(5), "memory run took {elapsed:?}");
    format!(
        "peak auxiliary {peak_aux} B < packed {packed} B < decoded {unpacked} B ({}x{} page, {:.2}s)",
        matrix.height(),
        matrix.width(),
        elapsed.as_secs_f64()
    )
}

/// Gap heights and widths classify exactly per the threshold table.
fn criterion_thresholds() -> String {
    let rows = RowParams::default();
    let cols = FineParams::default();
    let height_cases = [
        (4u32, RowGapClass::Line),
        (9, RowGapClass::Line),
        (10, RowGapClass::Paragraph),
        (25, RowGapClass::Block), // paragraph/block boundary resolves to block
        (26, RowGapClass::Block),
    ];
    for (gap, expected) in height_cases {
        assert_eq!(
            classify_row_gap(gap, &rows),
            expected,
            "row gap {gap} misclassified"
        );
    }
    let width_cases = [
        (4u32, ColumnGapClass::Character),
        (5, ColumnGapClass::Word),
    ];
    for (gap, expected) in width_cases {
        assert_eq!(
            classify_column_gap(gap, &cols),
            expected,
            "column gap {gap} misclassified"
        );
    }
    "gap heights {4,9,10,25,26} -> line/line/paragraph/block/block; widths {4,5} -> character/word".into()
}

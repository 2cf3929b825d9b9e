//! The Snake / Hidden Snake experiment series: data generation, training,
//! prediction, scoring and report assembly.

mod metrics;
mod predictions;
mod report;

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;

pub use metrics::{
    metric_image_accuracy, metric_pixel_accuracy, metric_snake_cell_accuracy, score,
    ImagePrediction, Scores, SnakeCellAccuracy,
};
pub use predictions::{read_predictions, write_predictions};
pub use report::{
    mean, stddev, welch_t_test, ExperimentReport, ReportRow, SummaryRow, WelchTest,
};

use crate::constraints::NodeStateConstraint;
use crate::crf_model::{predict, Weights};
use crate::error::{Error, Result};
use crate::factor_graph::AdmmSettings;
use crate::learner::{predict_logistic, train_logistic, train_ssvm, Sample, SsvmSettings};
use crate::snake_data::{
    build_single_type_instance, build_typed_instance, featurize_image, generate_dataset,
    make_constraints, single_type_schema, typed_schema, HiddenSnakeSample, ImageLabel, IMAGE_TYPE,
    PIXEL_TYPE,
};

pub const ORACLE: &str = "all-background";
pub const SINGLE: &str = "single-type";
pub const LOGISTIC: &str = "logistic";
pub const MULTI: &str = "multi-type";
pub const MULTI_CONSTRAINED: &str = "multi-type+constraints";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSettings {
    pub seed: u64,
    pub ssvm: SsvmSettings,
    /// Inference used inside training.
    pub train_inference: AdmmSettings,
    /// Inference used on the test set.
    pub test_inference: AdmmSettings,
    /// Snake images behind the training set (Hidden Snake adds their
    /// surviving corruptions).
    pub train_snakes: usize,
    pub test_snakes: usize,
    pub logistic_epochs: usize,
    pub logistic_rate: f64,
    /// Training-set sizes (in snake images) of the scaling series.
    pub sizes: Vec<usize>,
    pub runs: usize,
    /// Scaling runs executed concurrently.
    pub workers: usize,
    /// Evaluate the scaling series on a Snake-only test set instead of the
    /// Hidden Snake one.
    pub snake_only_test: bool,
    /// Where per-method predictions files go, if anywhere.
    pub predictions_dir: Option<PathBuf>,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        // a larger penalty than the solver default: on snake grids it
        // converges several times faster at no loss of accuracy
        let inference = AdmmSettings {
            penalty: 1.0,
            ..AdmmSettings::default()
        };
        ExperimentSettings {
            seed: 0,
            // the image-node and pixel-to-image blocks aggregate whole images,
            // so their subgradients dwarf the per-pixel ones; one global
            // step size cannot serve both
            ssvm: SsvmSettings {
                adaptive: true,
                ..SsvmSettings::default()
            },
            train_inference: inference,
            test_inference: inference,
            train_snakes: 200,
            test_snakes: 100,
            logistic_epochs: 100,
            logistic_rate: 0.1,
            sizes: vec![200, 400, 600, 800],
            runs: 10,
            workers: 1,
            snake_only_test: false,
            predictions_dir: None,
        }
    }
}

/// Mixes a stream tag into a base seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const SNAKE_TRAIN: u64 = 1;
const SNAKE_TEST: u64 = 2;
const HIDDEN_TRAIN: u64 = 3;
const HIDDEN_TEST: u64 = 4;
const SCALING_TRAIN: u64 = 5;

pub fn snake_train_set(s: &ExperimentSettings) -> Vec<HiddenSnakeSample> {
    generate_dataset(s.train_snakes, false, derive_seed(s.seed, SNAKE_TRAIN))
}

pub fn snake_test_set(s: &ExperimentSettings) -> Vec<HiddenSnakeSample> {
    generate_dataset(s.test_snakes, false, derive_seed(s.seed, SNAKE_TEST))
}

pub fn hidden_train_set(s: &ExperimentSettings) -> Vec<HiddenSnakeSample> {
    generate_dataset(s.train_snakes, true, derive_seed(s.seed, HIDDEN_TRAIN))
}

pub fn hidden_test_set(s: &ExperimentSettings) -> Vec<HiddenSnakeSample> {
    generate_dataset(s.test_snakes, true, derive_seed(s.seed, HIDDEN_TEST))
}

pub fn train_single(data: &[HiddenSnakeSample], s: &ExperimentSettings) -> Result<Weights> {
    let samples: Vec<Sample> = data.iter().map(|d| build_single_type_instance(&d.image)).collect();
    train_ssvm(&samples, &single_type_schema(), &s.ssvm, &s.train_inference)
}

pub fn train_multi(data: &[HiddenSnakeSample], s: &ExperimentSettings) -> Result<Weights> {
    let samples: Vec<Sample> = data.iter().map(build_typed_instance).collect();
    train_ssvm(&samples, &typed_schema(), &s.ssvm, &s.train_inference)
}

/// Decodes every image with a single-type or multi-type model, chosen by
/// the number of types in the weights' schema; `constrained` adds the ten
/// snake-label constraints.
pub fn predict_images(
    w: &Weights,
    data: &[HiddenSnakeSample],
    inference: &AdmmSettings,
    constrained: bool,
) -> Result<Vec<ImagePrediction>> {
    predict_images_with(w, data, inference, |sample| {
        if constrained {
            make_constraints(sample)
        } else {
            Vec::new()
        }
    })
}

/// [`predict_images`] with per-image constraints from `constraints_for`.
pub fn predict_images_with<F>(
    w: &Weights,
    data: &[HiddenSnakeSample],
    inference: &AdmmSettings,
    constraints_for: F,
) -> Result<Vec<ImagePrediction>>
where
    F: Fn(&HiddenSnakeSample) -> Vec<NodeStateConstraint>,
{
    let multi = match w.schema().num_types() {
        1 => false,
        2 => true,
        k => return Err(Error::Dimension(format!("no snake model has {k} node types"))),
    };
    data.iter()
        .map(|sample| {
            let (g, _) = if multi {
                build_typed_instance(sample)
            } else {
                build_single_type_instance(&sample.image)
            };
            if g.schema() != w.schema() {
                return Err(Error::Dimension("model schema does not match the snake schema".into()));
            }
            let y = predict(&g, w, inference, &constraints_for(sample))?;
            Ok(ImagePrediction {
                height: sample.image.height(),
                width: sample.image.width(),
                pixels: Some(y.labels(PIXEL_TYPE).to_vec()),
                image: multi.then(|| ImageLabel::from_index(y.get(IMAGE_TYPE, 0))),
            })
        })
        .collect()
}

pub fn background_oracle(data: &[HiddenSnakeSample]) -> Vec<ImagePrediction> {
    data.iter()
        .map(|s| ImagePrediction {
            height: s.image.height(),
            width: s.image.width(),
            pixels: Some(vec![0; s.image.num_cells()]),
            image: None,
        })
        .collect()
}

/// Logistic regression from the seven image features to Snake / NoSnake.
pub fn logistic_predictions(
    train: &[HiddenSnakeSample],
    test: &[HiddenSnakeSample],
    s: &ExperimentSettings,
) -> Result<Vec<ImagePrediction>> {
    let features: Vec<Vec<f64>> = train.iter().map(|d| featurize_image(&d.image).to_vec()).collect();
    let labels: Vec<u8> = train.iter().map(|d| d.image_label.index() as u8).collect();
    let model = train_logistic(&features, &labels, s.logistic_epochs, s.logistic_rate, s.seed)?;
    test.iter()
        .map(|d| {
            let (label, _) = predict_logistic(&model, &featurize_image(&d.image))?;
            Ok(ImagePrediction {
                height: d.image.height(),
                width: d.image.width(),
                pixels: None,
                image: Some(ImageLabel::from_index(label as usize)),
            })
        })
        .collect()
}

struct RowContext<'a> {
    dataset: &'a str,
    train_size: usize,
    run: usize,
    seed: u64,
}

fn make_row(
    ctx: &RowContext,
    method: &str,
    preds: &[ImagePrediction],
    test: &[HiddenSnakeSample],
    started: Instant,
    s: &ExperimentSettings,
) -> Result<ReportRow> {
    if let Some(dir) = &s.predictions_dir {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}_{}.pred", ctx.dataset, method));
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        write_predictions(file, preds)?;
    }
    Ok(ReportRow {
        dataset: ctx.dataset.to_string(),
        method: method.to_string(),
        train_size: ctx.train_size,
        run: ctx.run,
        seed: ctx.seed,
        scores: score(preds, test)?,
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// Single-type CRF on Snake and on Hidden Snake, with the all-background
/// oracle on both test sets.
pub fn run_experiment_snake(s: &ExperimentSettings, report: &mut ExperimentReport) -> Result<()> {
    report.name = "snake".into();
    for (dataset, train, test) in [
        ("snake", snake_train_set(s), snake_test_set(s)),
        ("hidden", hidden_train_set(s), hidden_test_set(s)),
    ] {
        let ctx = RowContext {
            dataset,
            train_size: s.train_snakes,
            run: 0,
            seed: s.seed,
        };
        let started = Instant::now();
        let oracle = background_oracle(&test);
        report.rows.push(make_row(
            &RowContext { train_size: 0, ..ctx },
            ORACLE,
            &oracle,
            &test,
            started,
            s,
        )?);
        let started = Instant::now();
        log::info!("{dataset}: training the single-type model on {} images", train.len());
        let w = train_single(&train, s)?;
        let preds = predict_images(&w, &test, &s.test_inference, false)?;
        report.rows.push(make_row(&ctx, SINGLE, &preds, &test, started, s)?);
    }
    Ok(())
}

/// All five methods on Hidden Snake.
pub fn run_experiment_hidden(s: &ExperimentSettings, report: &mut ExperimentReport) -> Result<()> {
    report.name = "hidden".into();
    let train = hidden_train_set(s);
    let test = hidden_test_set(s);
    let ctx = RowContext {
        dataset: "hidden",
        train_size: s.train_snakes,
        run: 0,
        seed: s.seed,
    };

    let started = Instant::now();
    let oracle = background_oracle(&test);
    report.rows.push(make_row(
        &RowContext { train_size: 0, ..ctx },
        ORACLE,
        &oracle,
        &test,
        started,
        s,
    )?);

    let started = Instant::now();
    log::info!("hidden: training the single-type model on {} images", train.len());
    let w = train_single(&train, s)?;
    let preds = predict_images(&w, &test, &s.test_inference, false)?;
    report.rows.push(make_row(&ctx, SINGLE, &preds, &test, started, s)?);

    let started = Instant::now();
    let preds = logistic_predictions(&train, &test, s)?;
    report.rows.push(make_row(&ctx, LOGISTIC, &preds, &test, started, s)?);

    let started = Instant::now();
    log::info!("hidden: training the multi-type model on {} images", train.len());
    let w = train_multi(&train, s)?;
    let preds = predict_images(&w, &test, &s.test_inference, false)?;
    report.rows.push(make_row(&ctx, MULTI, &preds, &test, started, s)?);

    let started = Instant::now();
    let preds = predict_images(&w, &test, &s.test_inference, true)?;
    report.rows.push(make_row(&ctx, MULTI_CONSTRAINED, &preds, &test, started, s)?);
    Ok(())
}

/// Training-set size series: for each size and run, a fresh training set,
/// the three CRF variants, one fixed test set; then per-method summaries.
pub fn run_experiment_scaling(s: &ExperimentSettings, report: &mut ExperimentReport) -> Result<()> {
    report.name = "scaling".into();
    if s.sizes.is_empty() || s.runs == 0 {
        return Err(Error::InvalidArgument("scaling needs at least one size and one run".into()));
    }
    if s.workers == 0 {
        return Err(Error::InvalidArgument("workers must be >= 1".into()));
    }
    let test = if s.snake_only_test {
        snake_test_set(s)
    } else {
        hidden_test_set(s)
    };
    let dataset = if s.snake_only_test { "snake" } else { "hidden" };
    let jobs: Vec<(usize, usize)> = s
        .sizes
        .iter()
        .flat_map(|&size| (0..s.runs).map(move |run| (size, run)))
        .collect();

    let run_job = |&(size, run): &(usize, usize)| -> Result<Vec<ReportRow>> {
        let seed = derive_seed(derive_seed(s.seed, SCALING_TRAIN), (size as u64) << 16 | run as u64);
        let train = generate_dataset(size, true, seed);
        let ctx = RowContext {
            dataset,
            train_size: size,
            run,
            seed,
        };
        let job = ExperimentSettings {
            predictions_dir: None,
            ..s.clone()
        };
        log::info!("scaling: size {size} run {run}");
        let mut rows = Vec::new();
        let started = Instant::now();
        let w = train_single(&train, &job)?;
        let preds = predict_images(&w, &test, &job.test_inference, false)?;
        rows.push(make_row(&ctx, SINGLE, &preds, &test, started, &job)?);
        let started = Instant::now();
        let w = train_multi(&train, &job)?;
        let preds = predict_images(&w, &test, &job.test_inference, false)?;
        rows.push(make_row(&ctx, MULTI, &preds, &test, started, &job)?);
        let started = Instant::now();
        let preds = predict_images(&w, &test, &job.test_inference, true)?;
        rows.push(make_row(&ctx, MULTI_CONSTRAINED, &preds, &test, started, &job)?);
        Ok(rows)
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(s.workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let results: Vec<Result<Vec<ReportRow>>> =
        pool.install(|| jobs.par_iter().map(run_job).collect());
    let mut first_error = None;
    for result in results {
        match result {
            Ok(rows) => report.rows.extend(rows),
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    report.summary = summarize(&report.rows, &s.sizes);
    match first_error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn summarize(rows: &[ReportRow], sizes: &[usize]) -> Vec<SummaryRow> {
    let accuracies = |method: &str, size: usize| -> Vec<f64> {
        rows.iter()
            .filter(|r| r.method == method && r.train_size == size)
            .filter_map(|r| r.scores.pixel_accuracy)
            .collect()
    };
    let mut out = Vec::new();
    for &size in sizes {
        for (method, reference) in [
            (SINGLE, None),
            (MULTI, Some(SINGLE)),
            (MULTI_CONSTRAINED, Some(MULTI)),
        ] {
            let xs = accuracies(method, size);
            if xs.is_empty() {
                continue;
            }
            let welch = reference.and_then(|r| welch_t_test(&xs, &accuracies(r, size)));
            out.push(SummaryRow {
                method: method.to_string(),
                train_size: size,
                runs: xs.len(),
                mean: mean(&xs),
                stddev: stddev(&xs),
                compared_to: reference.map(str::to_string),
                welch,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Snake,
    Hidden,
    Scaling,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Snake => "snake",
            ExperimentKind::Hidden => "hidden",
            ExperimentKind::Scaling => "scaling",
        }
    }
}

/// Runs one series and writes `<name>.tsv` (plus `<name>_summary.tsv` for
/// scaling and `<name>_timing.tsv`) into `out_dir`. On failure the files
/// still hold the finished rows followed by a `#FAILED` line, and the error
/// is returned.
pub fn run_and_save(
    kind: ExperimentKind,
    s: &ExperimentSettings,
    out_dir: &std::path::Path,
) -> Result<ExperimentReport> {
    std::fs::create_dir_all(out_dir)?;
    let mut report = ExperimentReport::new(kind.name());
    let outcome = match kind {
        ExperimentKind::Snake => run_experiment_snake(s, &mut report),
        ExperimentKind::Hidden => run_experiment_hidden(s, &mut report),
        ExperimentKind::Scaling => run_experiment_scaling(s, &mut report),
    };
    if let Err(e) = &outcome {
        report.failure = Some(e.to_string());
    }
    let name = kind.name();
    std::fs::write(out_dir.join(format!("{name}.tsv")), report.rows_tsv())?;
    std::fs::write(out_dir.join(format!("{name}_timing.tsv")), report.timings_tsv())?;
    if kind == ExperimentKind::Scaling {
        std::fs::write(out_dir.join(format!("{name}_summary.tsv")), report.summary_tsv())?;
    }
    outcome.map(|_| report)
}

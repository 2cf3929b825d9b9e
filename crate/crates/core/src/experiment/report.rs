use std::fmt::Write as _;

use statrs::distribution::{ContinuousCDF, StudentsT};

use super::metrics::Scores;

/// One method evaluated once.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub dataset: String,
    pub method: String,
    /// Snake images used for training (0 for methods that do not train).
    pub train_size: usize,
    pub run: usize,
    pub seed: u64,
    pub scores: Scores,
    pub seconds: f64,
}

/// Mean and deviation of pixel accuracy across runs of one method at one
/// training size, with a Welch test against a reference method.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: String,
    pub train_size: usize,
    pub runs: usize,
    pub mean: f64,
    /// Sample standard deviation; `None` with a single run.
    pub stddev: Option<f64>,
    pub compared_to: Option<String>,
    pub welch: Option<WelchTest>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchTest {
    pub t: f64,
    pub df: f64,
    /// Two-sided.
    pub p_value: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentReport {
    pub name: String,
    pub rows: Vec<ReportRow>,
    pub summary: Vec<SummaryRow>,
    /// Set when the experiment stopped early; rows hold what finished.
    pub failure: Option<String>,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); `None` below two values.
pub fn stddev(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    Some(var.sqrt())
}

/// Welch's unequal-variance t-test of `a` against `b`. `None` when either
/// side has fewer than two values or both variances vanish.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Option<WelchTest> {
    let (sa, sb) = (stddev(a)?, stddev(b)?);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (sa * sa / na, sb * sb / nb);
    let se2 = va + vb;
    if se2 <= 0.0 {
        return None;
    }
    let t = (mean(a) - mean(b)) / se2.sqrt();
    let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).ok()?;
    let p_value = 2.0 * (1.0 - dist.cdf(t.abs()));
    Some(WelchTest { t, df, p_value })
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| format!("{v:.4}"))
}

impl ExperimentReport {
    pub fn new(name: &str) -> Self {
        ExperimentReport {
            name: name.to_string(),
            ..Default::default()
        }
    }

    pub fn row(&self, dataset: &str, method: &str) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.dataset == dataset && r.method == method)
    }

    pub fn summary_row(&self, method: &str, train_size: usize) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|r| r.method == method && r.train_size == train_size)
    }

    /// Per-run rows as TSV. Deterministic for a given seed: timings live in
    /// [`ExperimentReport::timings_tsv`].
    pub fn rows_tsv(&self) -> String {
        let mut out = String::from(
            "dataset\tmethod\ttrain_size\trun\tseed\tpixels\tpixel_acc\tsnake_cells\tsnake_cell_acc\tsnake_cells_defined\timages\timage_acc\n",
        );
        for r in &self.rows {
            let s = &r.scores;
            let snake = s.snake_cell_accuracy;
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.dataset,
                r.method,
                r.train_size,
                r.run,
                r.seed,
                s.pixels,
                opt(s.pixel_accuracy),
                snake.map_or(0, |a| a.cells),
                opt(snake.map(|a| a.value)),
                snake.map_or("NA", |a| if a.defined { "yes" } else { "no" }),
                s.images,
                opt(s.image_accuracy),
            );
        }
        if let Some(msg) = &self.failure {
            let _ = writeln!(out, "#FAILED\t{}", msg.replace(['\t', '\n'], " "));
        }
        out
    }

    pub fn summary_tsv(&self) -> String {
        let mut out = String::from(
            "method\ttrain_size\truns\tmean_pixel_acc\tstddev\tcompared_to\twelch_t\twelch_df\twelch_p\n",
        );
        for r in &self.summary {
            let w = r.welch;
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{:.4}\t{}\t{}\t{}\t{}\t{}",
                r.method,
                r.train_size,
                r.runs,
                r.mean,
                opt(r.stddev),
                r.compared_to.as_deref().unwrap_or("NA"),
                opt(w.map(|w| w.t)),
                opt(w.map(|w| w.df)),
                opt(w.map(|w| w.p_value)),
            );
        }
        if let Some(msg) = &self.failure {
            let _ = writeln!(out, "#FAILED\t{}", msg.replace(['\t', '\n'], " "));
        }
        out
    }

    pub fn timings_tsv(&self) -> String {
        let mut out = String::from("dataset\tmethod\ttrain_size\trun\tseed\tseconds\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{:.2}",
                r.dataset, r.method, r.train_size, r.run, r.seed, r.seconds
            );
        }
        out
    }
}

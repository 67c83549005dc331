//! Metrics, ROC/AUC, and the reduction × classifier evaluation grid.
//!
//! The positive class is malware (label 1) throughout. Accuracy, TPR and
//! TNR come straight from integer confusion counts; a rate whose
//! denominator is empty is reported as an explicit `None` (the CSV token
//! `undefined`), never silently 0. AUC is the Mann–Whitney rank
//! statistic computed with midranks for ties, which equals the fraction
//! of (positive, negative) pairs ranked correctly with ties counted ½.
//!
//! [`run_grid`] reproduces the full evaluation table: one stratified
//! 80/20 split, every requested reduction fitted on the training side
//! only, every classifier fitted on the reduced training matrix, and
//! wall-clock train/test times taken as medians over repeated runs.
//! Per-cell seeds are derived by hashing the base seed with the
//! reduction and classifier tags, so adding or removing cells never
//! changes any other cell's randomness.

use std::time::Instant;

use crate::classify::{self, ClassifierConfig, ClassifierKind};
use crate::dataset::{split_train_test, FeatureMatrix};
use crate::error::{Error, Result};
use crate::features::{apply_reduction, fit_reduction, ReductionConfig, ReductionKind};
use crate::util::fnv1a64;

/// Confusion-matrix cells; `fn_` is the false-negative count (the bare
/// name is a keyword).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Counts prediction outcomes against ground truth.
pub fn confusion(labels: &[u8], predictions: &[u8]) -> Result<ConfusionCounts> {
    if labels.is_empty() || labels.len() != predictions.len() {
        return Err(Error::Argument(format!(
            "confusion needs equal-length non-empty vectors, got {} labels and {} predictions",
            labels.len(),
            predictions.len()
        )));
    }
    let mut c = ConfusionCounts {
        tp: 0,
        fp: 0,
        tn: 0,
        fn_: 0,
    };
    for (&y, &p) in labels.iter().zip(predictions) {
        if y > 1 || p > 1 {
            return Err(Error::Argument(
                "labels and predictions must be 0 or 1".into(),
            ));
        }
        match (y, p) {
            (1, 1) => c.tp += 1,
            (0, 1) => c.fp += 1,
            (0, 0) => c.tn += 1,
            (1, 0) => c.fn_ += 1,
            _ => unreachable!(),
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    /// tp / (tp + fn); `None` when no positives were evaluated.
    pub tpr: Option<f64>,
    /// tn / (tn + fp); `None` when no negatives were evaluated.
    pub tnr: Option<f64>,
}

/// Exact rational evaluation of accuracy, TPR and TNR.
pub fn metrics(counts: &ConfusionCounts) -> Result<Metrics> {
    let total = counts.total();
    if total == 0 {
        return Err(Error::Argument("metrics need at least one sample".into()));
    }
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    Ok(Metrics {
        accuracy: (counts.tp + counts.tn) as f64 / total as f64,
        tpr: ratio(counts.tp, counts.tp + counts.fn_),
        tnr: ratio(counts.tn, counts.tn + counts.fp),
    })
}

/// Area under the ROC curve via the rank-sum statistic.
///
/// Sorts once and assigns midranks to tied scores; the result equals the
/// O(N²) pairwise count (ties ½) exactly up to float rounding.
pub fn roc_auc(labels: &[u8], scores: &[f64]) -> Result<f64> {
    if labels.is_empty() || labels.len() != scores.len() {
        return Err(Error::Argument(
            "roc_auc needs equal-length non-empty vectors".into(),
        ));
    }
    if labels.iter().any(|&y| y > 1) {
        return Err(Error::Argument("labels must be 0 or 1".into()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Argument("scores must be finite".into()));
    }
    let n1 = labels.iter().filter(|&&y| y == 1).count();
    let n0 = labels.len() - n1;
    if n1 == 0 || n0 == 0 {
        return Err(Error::Argument("roc_auc needs both classes present".into()));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Walk runs of equal scores, giving each member the run's mean rank.
    let mut positive_rank_sum = 0.0;
    let mut at = 0;
    while at < order.len() {
        let mut end = at + 1;
        while end < order.len() && scores[order[end]] == scores[order[at]] {
            end += 1;
        }
        // 1-based ranks at..end-1 inclusive average to:
        let midrank = (at + 1 + end) as f64 / 2.0;
        for &i in &order[at..end] {
            if labels[i] == 1 {
                positive_rank_sum += midrank;
            }
        }
        at = end;
    }
    let u = positive_rank_sum - (n1 * (n1 + 1)) as f64 / 2.0;
    Ok(u / (n1 as f64 * n0 as f64))
}

/// Confusion counts, threshold metrics and AUC for one scored test set.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub counts: ConfusionCounts,
    pub accuracy: f64,
    pub tpr: Option<f64>,
    pub tnr: Option<f64>,
    pub auc: f64,
}

pub fn evaluate_scores(labels: &[u8], scores: &[f64], threshold: f64) -> Result<Evaluation> {
    let predictions = classify::predict_labels(scores, threshold)?;
    let counts = confusion(labels, &predictions)?;
    let m = metrics(&counts)?;
    let auc = roc_auc(labels, scores)?;
    Ok(Evaluation {
        counts,
        accuracy: m.accuracy,
        tpr: m.tpr,
        tnr: m.tnr,
        auc,
    })
}

/// One grid cell's results.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub reduction: ReductionKind,
    pub classifier: ClassifierKind,
    pub accuracy: f64,
    pub tpr: Option<f64>,
    pub tnr: Option<f64>,
    pub auc: f64,
    pub counts: ConfusionCounts,
    pub train_time_s: f64,
    pub test_time_s: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub reductions: Vec<ReductionKind>,
    pub classifiers: Vec<ClassifierKind>,
    pub train_ratio: f64,
    pub seed: u64,
    /// Train/test times are medians over this many repeated runs.
    pub timing_runs: usize,
    pub vt_threshold: f64,
    pub pca_components: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            reductions: ReductionKind::ALL.to_vec(),
            classifiers: ClassifierKind::ALL.to_vec(),
            train_ratio: 0.8,
            seed: 42,
            timing_runs: 3,
            vt_threshold: 0.10,
            pca_components: 16,
        }
    }
}

/// Seed for fitting one reduction: base seed hashed with the tag.
fn reduction_seed(base: u64, reduction: ReductionKind) -> u64 {
    let mut bytes = base.to_le_bytes().to_vec();
    bytes.extend_from_slice(reduction.tag().as_bytes());
    fnv1a64(&bytes)
}

/// Seed for one grid cell: base seed hashed with both tags.
fn cell_seed(base: u64, reduction: ReductionKind, classifier: ClassifierKind) -> u64 {
    let mut bytes = base.to_le_bytes().to_vec();
    bytes.extend_from_slice(reduction.tag().as_bytes());
    bytes.push(0x1f); // unit separator between the two tags
    bytes.extend_from_slice(classifier.tag().as_bytes());
    fnv1a64(&bytes)
}

/// Prefixes an error's message with the grid cell that produced it.
fn annotate_cell(e: Error, reduction: ReductionKind, classifier: ClassifierKind) -> Error {
    let tag = format!("grid cell {reduction}×{classifier}: ");
    match e {
        Error::Argument(m) => Error::Argument(format!("{tag}{m}")),
        Error::Shape(m) => Error::Shape(format!("{tag}{m}")),
        Error::DegenerateData(m) => Error::DegenerateData(format!("{tag}{m}")),
        Error::Schema(m) => Error::Schema(format!("{tag}{m}")),
        other => other,
    }
}

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        (samples[n / 2 - 1] + samples[n / 2]) / 2.0
    }
}

/// Runs every (reduction, classifier) cell on one shared stratified
/// split and returns reports in reduction-major canonical order.
pub fn run_grid(data: &FeatureMatrix, cfg: &GridConfig) -> Result<Vec<EvalReport>> {
    if cfg.reductions.is_empty() || cfg.classifiers.is_empty() {
        return Err(Error::Argument(
            "grid needs at least one reduction and one classifier".into(),
        ));
    }
    if cfg.timing_runs == 0 {
        return Err(Error::Argument("timing_runs must be >= 1".into()));
    }
    if !data.is_binary() {
        return Err(Error::Argument(
            "grid expects the binary permission matrix, not reduced features".into(),
        ));
    }
    let (benign, malware) = data.class_counts();
    if benign == 0 || malware == 0 {
        return Err(Error::DegenerateData(
            "grid needs both classes present".into(),
        ));
    }

    let split = split_train_test(data, cfg.train_ratio, cfg.seed, true)?;
    let reduction_cfg = ReductionConfig {
        vt_threshold: cfg.vt_threshold,
        pca_components: cfg.pca_components,
    };

    let mut reports = Vec::with_capacity(cfg.reductions.len() * cfg.classifiers.len());
    for &reduction in &cfg.reductions {
        // Fitting the reduction is a one-time preprocessing cost shared
        // by all its cells; only applying it is timed.
        let model = fit_reduction(
            reduction,
            &split.train,
            &reduction_cfg,
            reduction_seed(cfg.seed, reduction),
        )
        .map_err(|e| annotate_cell(e, reduction, cfg.classifiers[0]))?;

        for &classifier in &cfg.classifiers {
            let seed = cell_seed(cfg.seed, reduction, classifier);
            let config = ClassifierConfig::default_for(classifier);
            let mut train_times = Vec::with_capacity(cfg.timing_runs);
            let mut test_times = Vec::with_capacity(cfg.timing_runs);
            let mut scores = Vec::new();
            for _ in 0..cfg.timing_runs {
                let t0 = Instant::now();
                let train_reduced = apply_reduction(&model, &split.train)
                    .map_err(|e| annotate_cell(e, reduction, classifier))?;
                let fitted = classify::fit(&config, &train_reduced, seed)
                    .map_err(|e| annotate_cell(e, reduction, classifier))?;
                train_times.push(t0.elapsed().as_secs_f64());

                let t1 = Instant::now();
                let test_reduced = apply_reduction(&model, &split.test)
                    .map_err(|e| annotate_cell(e, reduction, classifier))?;
                scores = classify::predict_scores(&fitted, &test_reduced)
                    .map_err(|e| annotate_cell(e, reduction, classifier))?;
                test_times.push(t1.elapsed().as_secs_f64());
            }
            let evaluation = evaluate_scores(split.test.labels(), &scores, 0.5)
                .map_err(|e| annotate_cell(e, reduction, classifier))?;
            reports.push(EvalReport {
                reduction,
                classifier,
                accuracy: evaluation.accuracy,
                tpr: evaluation.tpr,
                tnr: evaluation.tnr,
                auc: evaluation.auc,
                counts: evaluation.counts,
                train_time_s: median(&mut train_times),
                test_time_s: median(&mut test_times),
                seed,
            });
        }
    }
    Ok(reports)
}

/// CSV token for an optional rate.
fn rate_token(rate: Option<f64>) -> String {
    match rate {
        Some(v) => format!("{v}"),
        None => "undefined".into(),
    }
}

/// Renders reports as CSV. Non-timing columns are deterministic for a
/// given seed; the two time columns vary run to run.
pub fn report_csv(reports: &[EvalReport]) -> String {
    let mut out = String::from(
        "reduction,classifier,accuracy,tpr,tnr,auc,tp,fp,tn,fn,train_time_s,test_time_s,seed\n",
    );
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{:.6},{:.6},{}\n",
            r.reduction,
            r.classifier,
            r.accuracy,
            rate_token(r.tpr),
            rate_token(r.tnr),
            r.auc,
            r.counts.tp,
            r.counts.fp,
            r.counts.tn,
            r.counts.fn_,
            r.train_time_s,
            r.test_time_s,
            r.seed
        ));
    }
    out
}

/// Fixed-width text table grouped by reduction, for terminal reading.
pub fn format_summary(reports: &[EvalReport]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<6} {:<10} {:>9} {:>9} {:>9} {:>9} {:>12} {:>12}\n",
        "red.", "classifier", "accuracy", "tpr", "tnr", "auc", "train_time_s", "test_time_s"
    ));
    let fmt_rate = |r: Option<f64>| match r {
        Some(v) => format!("{v:.4}"),
        None => "undef".into(),
    };
    let mut last_reduction = None;
    for r in reports {
        if last_reduction.is_some() && last_reduction != Some(r.reduction) {
            out.push('\n');
        }
        last_reduction = Some(r.reduction);
        out.push_str(&format!(
            "{:<6} {:<10} {:>9.4} {:>9} {:>9} {:>9.4} {:>12.6} {:>12.6}\n",
            r.reduction.to_string(),
            r.classifier.to_string(),
            r.accuracy,
            fmt_rate(r.tpr),
            fmt_rate(r.tnr),
            r.auc,
            r.train_time_s,
            r.test_time_s
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Brute-force Mann–Whitney: every (positive, negative) pair.
    fn pairwise_auc(labels: &[u8], scores: &[f64]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for (i, &yi) in labels.iter().enumerate() {
            if yi != 1 {
                continue;
            }
            for (j, &yj) in labels.iter().enumerate() {
                if yj != 0 {
                    continue;
                }
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
        wins / pairs
    }

    #[test]
    fn confusion_counts_by_hand() {
        let c = confusion(&[1, 1, 0, 0], &[1, 0, 0, 1]).unwrap();
        assert_eq!(
            c,
            ConfusionCounts {
                tp: 1,
                fn_: 1,
                tn: 1,
                fp: 1
            }
        );
        let perfect = confusion(&[1, 0, 1], &[1, 0, 1]).unwrap();
        assert_eq!((perfect.fp, perfect.fn_), (0, 0));
        let constant = confusion(&[0, 0, 0], &[1, 1, 1]).unwrap();
        assert_eq!((constant.tn, constant.fp), (0, 3));
    }

    #[test]
    fn confusion_rejects_bad_shapes_and_values() {
        assert!(matches!(confusion(&[], &[]), Err(Error::Argument(_))));
        assert!(matches!(confusion(&[1, 0], &[1]), Err(Error::Argument(_))));
        assert!(matches!(
            confusion(&[2, 0], &[1, 0]),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn metrics_match_hand_computed_rationals() {
        let m = metrics(&ConfusionCounts {
            tp: 9,
            fp: 1,
            tn: 8,
            fn_: 2,
        })
        .unwrap();
        assert_eq!(m.accuracy, 0.85);
        assert_eq!(m.tpr, Some(9.0 / 11.0));
        assert_eq!(m.tnr, Some(8.0 / 9.0));
        // accuracy · total = tp + tn exactly.
        assert_eq!(m.accuracy * 20.0, 17.0);
    }

    #[test]
    fn undefined_rates_are_explicit() {
        let m = metrics(&ConfusionCounts {
            tp: 0,
            fp: 2,
            tn: 3,
            fn_: 0,
        })
        .unwrap();
        assert_eq!(m.tpr, None);
        assert_eq!(m.tnr, Some(0.6));
        assert_eq!(rate_token(m.tpr), "undefined");
        let m = metrics(&ConfusionCounts {
            tp: 0,
            fp: 0,
            tn: 0,
            fn_: 5,
        })
        .unwrap();
        assert_eq!(m.tpr, Some(0.0));
        assert_eq!(m.tnr, None);
        assert!(matches!(
            metrics(&ConfusionCounts {
                tp: 0,
                fp: 0,
                tn: 0,
                fn_: 0
            }),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn auc_extremes_and_tie_convention() {
        assert_eq!(roc_auc(&[1, 1, 0, 0], &[0.9, 0.8, 0.2, 0.1]).unwrap(), 1.0);
        assert_eq!(roc_auc(&[1, 1, 0, 0], &[0.1, 0.2, 0.8, 0.9]).unwrap(), 0.0);
        assert_eq!(roc_auc(&[1, 0], &[0.5, 0.5]).unwrap(), 0.5);
    }

    #[test]
    fn auc_matches_the_pairwise_oracle_on_random_fixtures() {
        let mut rng = ChaCha8Rng::seed_from_u64(1009);
        for case in 0..20 {
            let n = rng.random_range(2..=200);
            let mut labels: Vec<u8> = (0..n)
                .map(|_| u8::from(rng.random::<f64>() < 0.4))
                .collect();
            // Force both classes.
            labels[0] = 1;
            labels[n - 1] = 0;
            // Coarse scores make ties common.
            let scores: Vec<f64> = (0..n)
                .map(|_| f64::from(rng.random_range(0..10u32)) / 10.0)
                .collect();
            let fast = roc_auc(&labels, &scores).unwrap();
            let slow = pairwise_auc(&labels, &scores);
            assert!(
                (fast - slow).abs() < 1e-9,
                "case {case}: rank {fast} vs pairwise {slow}"
            );
        }
    }

    #[test]
    fn auc_is_invariant_under_monotone_transforms() {
        let labels = [1, 0, 1, 0, 1, 0, 0, 1];
        let scores = [0.9, 0.3, 0.7, 0.7, 0.5, 0.1, 0.5, 0.2];
        let base = roc_auc(&labels, &scores).unwrap();
        let squashed: Vec<f64> = scores
            .iter()
            .map(|&s| 1.0 / (1.0 + (-3.0 * s).exp()))
            .collect();
        assert_eq!(roc_auc(&labels, &squashed).unwrap(), base);
    }

    #[test]
    fn auc_rejects_degenerate_inputs() {
        assert!(matches!(
            roc_auc(&[1, 1], &[0.1, 0.2]),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            roc_auc(&[1, 0], &[f64::NAN, 0.2]),
            Err(Error::Argument(_))
        ));
        assert!(matches!(roc_auc(&[], &[]), Err(Error::Argument(_))));
    }

    #[test]
    fn evaluate_scores_threads_everything_through() {
        let labels = [1, 1, 0, 0];
        let scores = [0.9, 0.4, 0.3, 0.6];
        let e = evaluate_scores(&labels, &scores, 0.5).unwrap();
        assert_eq!(
            e.counts,
            ConfusionCounts {
                tp: 1,
                fn_: 1,
                tn: 1,
                fp: 1
            }
        );
        assert_eq!(e.accuracy, 0.5);
        assert_eq!(e.auc, 0.75);
    }

    #[test]
    fn cell_seeds_are_distinct_and_stable() {
        let mut seen = std::collections::BTreeSet::new();
        for &red in &ReductionKind::ALL {
            for &clf in &ClassifierKind::ALL {
                assert!(seen.insert(cell_seed(42, red, clf)), "{red}×{clf} collided");
            }
            assert!(
                seen.insert(reduction_seed(42, red)),
                "{red} fit seed collided"
            );
        }
        // Stable across calls and unaffected by other cells existing.
        assert_eq!(
            cell_seed(42, ReductionKind::Original, ClassifierKind::Knn),
            cell_seed(42, ReductionKind::Original, ClassifierKind::Knn)
        );
    }

    fn small_corpus(seed: u64) -> FeatureMatrix {
        use crate::catalog::PermissionCatalog;
        use crate::dataset::{generate_synthetic, SynthConfig};
        let catalog = PermissionCatalog::builtin();
        generate_synthetic(
            &SynthConfig::with_default_profile(25, seed, &catalog),
            &catalog,
        )
        .unwrap()
    }

    fn small_grid() -> GridConfig {
        GridConfig {
            reductions: vec![ReductionKind::Original, ReductionKind::VarianceThreshold],
            classifiers: vec![ClassifierKind::DecisionTree, ClassifierKind::Knn],
            timing_runs: 1,
            ..GridConfig::default()
        }
    }

    #[test]
    fn grid_produces_canonical_reports_with_full_confusions() {
        let data = small_corpus(3);
        let reports = run_grid(&data, &small_grid()).unwrap();
        assert_eq!(reports.len(), 4);
        let cells: Vec<(ReductionKind, ClassifierKind)> = reports
            .iter()
            .map(|r| (r.reduction, r.classifier))
            .collect();
        assert_eq!(
            cells,
            vec![
                (ReductionKind::Original, ClassifierKind::DecisionTree),
                (ReductionKind::Original, ClassifierKind::Knn),
                (
                    ReductionKind::VarianceThreshold,
                    ClassifierKind::DecisionTree
                ),
                (ReductionKind::VarianceThreshold, ClassifierKind::Knn),
            ]
        );
        let test_size = data.n_rows() - (data.n_rows() as f64 * 0.8).round() as usize;
        for r in &reports {
            assert_eq!(r.counts.total(), test_size);
            assert!((0.0..=1.0).contains(&r.accuracy));
            assert!((0.0..=1.0).contains(&r.auc));
            assert!(r.train_time_s >= 0.0 && r.test_time_s >= 0.0);
        }
    }

    #[test]
    fn same_seed_reproduces_all_non_timing_columns() {
        let data = small_corpus(8);
        let a = run_grid(&data, &small_grid()).unwrap();
        let b = run_grid(&data, &small_grid()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.accuracy, y.accuracy);
            assert_eq!(x.tpr, y.tpr);
            assert_eq!(x.tnr, y.tnr);
            assert_eq!(x.auc, y.auc);
            assert_eq!(x.counts, y.counts);
            assert_eq!(x.seed, y.seed);
        }
    }

    #[test]
    fn grid_rejects_non_binary_and_single_class_data() {
        let real = FeatureMatrix::new(
            vec![0.3, 0.7, 0.1, 0.9],
            vec![0, 1],
            vec!["a".into(), "b".into()],
            vec!["r0".into(), "r1".into()],
        )
        .unwrap();
        assert!(matches!(
            run_grid(&real, &small_grid()),
            Err(Error::Argument(_))
        ));
        let single = FeatureMatrix::new(
            vec![0.0, 1.0, 1.0, 0.0, 1.0, 1.0],
            vec![1, 1, 1],
            vec!["a".into(), "b".into()],
            (0..3).map(|i| format!("r{i}")).collect(),
        )
        .unwrap();
        assert!(matches!(
            run_grid(&single, &small_grid()),
            Err(Error::DegenerateData(_))
        ));
    }

    #[test]
    fn csv_report_has_the_exact_header_and_row_shape() {
        let data = small_corpus(5);
        let cfg = GridConfig {
            reductions: vec![ReductionKind::Original],
            classifiers: vec![ClassifierKind::DecisionTree],
            timing_runs: 1,
            ..GridConfig::default()
        };
        let reports = run_grid(&data, &cfg).unwrap();
        let csv = report_csv(&reports);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "reduction,classifier,accuracy,tpr,tnr,auc,tp,fp,tn,fn,train_time_s,test_time_s,seed"
        );
        let row = lines.next().unwrap();
        assert!(row.starts_with("OD,DT,"));
        assert_eq!(row.split(',').count(), 13);
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn summary_groups_rows_by_reduction() {
        let data = small_corpus(5);
        let reports = run_grid(&data, &small_grid()).unwrap();
        let summary = format_summary(&reports);
        assert!(summary.contains("classifier"));
        assert!(summary.contains("VT"));
        // One blank separator between the two reduction groups.
        assert_eq!(summary.matches("\n\n").count(), 1);
    }

    #[test]
    fn cell_errors_name_the_failing_cell() {
        // VT over an all-constant matrix selects nothing, failing the
        // apply step inside the first VT cell.
        let mut values = Vec::new();
        let mut labels = Vec::new();
        for i in 0..20 {
            values.extend_from_slice(&[1.0, 0.0]);
            labels.push(u8::from(i % 2 == 0));
        }
        let data = FeatureMatrix::new(
            values,
            labels,
            vec!["a".into(), "b".into()],
            (0..20).map(|i| format!("r{i}")).collect(),
        )
        .unwrap();
        let cfg = GridConfig {
            reductions: vec![ReductionKind::VarianceThreshold],
            classifiers: vec![ClassifierKind::DecisionTree],
            timing_runs: 1,
            ..GridConfig::default()
        };
        let err = run_grid(&data, &cfg).unwrap_err();
        let message = err.to_string();
        assert!(
            message.contains("VT") && message.contains("DT"),
            "unannotated error: {message}"
        );
    }

    #[test]
    fn median_of_odd_and_even_sample_counts() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&mut [7.0]), 7.0);
    }
}

//! Subcommand implementations.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::json;

use permforge::catalog::PermissionCatalog;
use permforge::classify::{
    fit, fit_forest, predict_scores, ClassifierConfig, ClassifierKind, ForestConfig,
};
use permforge::dataset::synth::class_probs_with_overrides;
use permforge::dataset::{
    generate_synthetic, load_csv_path, save_csv, save_csv_path, vectorize as vectorize_manifests,
    SynthConfig,
};
use permforge::eval::{
    evaluate_scores, format_summary, report_csv, run_grid, Evaluation, GridConfig,
};
use permforge::features::{
    apply_reduction, class_frequency, column_variances, fit_reduction, pearson_correlation,
    ReductionConfig, ReductionKind,
};
use permforge::manifest::{parse_manifest, ManifestInfo, SourceFormat};
use permforge::model_io::{load_model_path, save_model_path, SavedModel};
use permforge::Error;

use crate::{
    AnalyzeArgs, CliResult, EvaluateArgs, ExtractArgs, Failure, GridArgs, ReduceArgs, SynthArgs,
    TrainArgs, VectorizeArgs,
};

fn io_failure(e: std::io::Error) -> Failure {
    Failure::internal(format!("i/o error: {e}"))
}

/// Usage error unless `path` exists: a missing input is the caller's typo,
/// not bad data.
fn require_exists(path: &Path, what: &str) -> Result<(), Failure> {
    if path.exists() {
        Ok(())
    } else {
        Err(Failure::usage(format!(
            "{what} {} does not exist",
            path.display()
        )))
    }
}

fn write_output(out: Option<&Path>, content: &str) -> CliResult {
    match out {
        Some(path) => fs::write(path, content).map_err(io_failure),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Loads the permission catalog: `--catalog` flag, else the
/// `PERMFORGE_CATALOG` environment variable, else the built-in table.
fn load_catalog(flag: Option<&Path>) -> Result<PermissionCatalog, Failure> {
    let env_path = std::env::var_os("PERMFORGE_CATALOG").map(PathBuf::from);
    let path = flag.map(Path::to_path_buf).or(env_path);
    match path {
        None => Ok(PermissionCatalog::builtin()),
        Some(p) => {
            require_exists(&p, "catalog")?;
            let text = fs::read_to_string(&p).map_err(io_failure)?;
            PermissionCatalog::load(text.as_bytes()).map_err(Failure::from)
        }
    }
}

// --- extract ----------------------------------------------------------------

pub(crate) fn extract(args: ExtractArgs) -> CliResult {
    let mut files: Vec<PathBuf> = Vec::new();
    for input in &args.inputs {
        require_exists(input, "input path")?;
        if input.is_dir() {
            for entry in walkdir::WalkDir::new(input).sort_by_file_name() {
                let entry = entry
                    .map_err(|e| Failure::internal(format!("walking {}: {e}", input.display())))?;
                if entry.file_type().is_file() {
                    files.push(entry.into_path());
                }
            }
        } else {
            files.push(input.clone());
        }
    }

    let mut lines = String::new();
    let mut extracted = 0usize;
    let mut skipped = 0usize;
    for path in &files {
        let parsed = fs::read(path)
            .map_err(Error::from)
            .and_then(|data| parse_manifest(&data));
        match parsed {
            Ok(info) => {
                let record = json!({
                    "row_id": path.display().to_string(),
                    "package": info.package_name,
                    "permissions": info.requested_permissions.iter().collect::<Vec<_>>(),
                    "format": info.source_format.as_str(),
                });
                lines.push_str(&record.to_string());
                lines.push('\n');
                extracted += 1;
            }
            Err(e) => {
                eprintln!("skipping {}: {e}", path.display());
                skipped += 1;
            }
        }
    }
    if extracted == 0 {
        return Err(Failure::data(format!(
            "no parseable manifests among {} input files",
            files.len()
        )));
    }
    write_output(args.out.as_deref(), &lines)?;
    eprintln!("extracted {extracted} records, skipped {skipped}");
    Ok(())
}

// --- vectorize ---------------------------------------------------------------

#[derive(Deserialize)]
struct ExtractRecord {
    row_id: String,
    #[serde(default)]
    package: Option<String>,
    permissions: Vec<String>,
    #[serde(default)]
    format: Option<String>,
}

pub(crate) fn vectorize(args: VectorizeArgs) -> CliResult {
    require_exists(&args.records, "records file")?;
    let catalog = load_catalog(args.catalog.as_deref())?;
    let text = fs::read_to_string(&args.records).map_err(io_failure)?;

    let mut manifests: Vec<ManifestInfo> = Vec::new();
    let mut row_ids: Vec<String> = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: ExtractRecord = serde_json::from_str(line)
            .map_err(|e| Failure::data(format!("records line {}: {e}", line_no + 1)))?;
        let source_format = match record.format.as_deref() {
            Some("binary_axml") => SourceFormat::BinaryAxml,
            _ => SourceFormat::TextXml,
        };
        manifests.push(ManifestInfo {
            package_name: record.package,
            requested_permissions: record.permissions.into_iter().collect(),
            source_format,
        });
        row_ids.push(record.row_id);
    }
    if manifests.is_empty() {
        return Err(Failure::data("no records to vectorize".to_string()));
    }

    let labels = resolve_labels(&row_ids, args.labels.as_deref())?;
    let vectorized = vectorize_manifests(&manifests, &labels, &row_ids, &catalog)?;
    if vectorized.ignored_total > 0 {
        eprintln!(
            "ignored {} permission occurrences with no catalog entry ({} distinct names)",
            vectorized.ignored_total,
            vectorized.ignored_names.len()
        );
    }
    save_csv_path(&vectorized.matrix, &args.out)?;
    Ok(())
}

fn resolve_labels(row_ids: &[String], labels_path: Option<&Path>) -> Result<Vec<u8>, Failure> {
    match labels_path {
        Some(path) => {
            require_exists(path, "labels file")?;
            let mut reader =
                csv::Reader::from_path(path).map_err(|e| Failure::data(format!("labels: {e}")))?;
            let headers = reader
                .headers()
                .map_err(|e| Failure::data(format!("labels: {e}")))?
                .clone();
            if headers.len() != 2 || &headers[0] != "row_id" || &headers[1] != "label" {
                return Err(Failure::data(
                    "labels CSV must have the header row_id,label".to_string(),
                ));
            }
            let mut by_id: BTreeMap<String, u8> = BTreeMap::new();
            for record in reader.records() {
                let record = record.map_err(|e| Failure::data(format!("labels: {e}")))?;
                by_id.insert(record[0].to_string(), parse_label(&record[1])?);
            }
            row_ids
                .iter()
                .map(|id| {
                    by_id
                        .get(id)
                        .copied()
                        .ok_or_else(|| Failure::data(format!("no label for row {id:?}")))
                })
                .collect()
        }
        None => row_ids.iter().map(|id| label_from_path(id)).collect(),
    }
}

fn parse_label(s: &str) -> Result<u8, Failure> {
    match s.trim() {
        "0" | "benign" => Ok(0),
        "1" | "malware" => Ok(1),
        other => Err(Failure::data(format!(
            "label {other:?} is not one of 0, 1, benign, malware"
        ))),
    }
}

/// Directory-convention labeling: exactly one of the path components must
/// be `benign` or `malware`.
fn label_from_path(row_id: &str) -> Result<u8, Failure> {
    let has = |marker: &str| {
        Path::new(row_id)
            .components()
            .filter_map(|c| c.as_os_str().to_str())
            .any(|c| c == marker)
    };
    match (has("benign"), has("malware")) {
        (true, false) => Ok(0),
        (false, true) => Ok(1),
        _ => Err(Failure::data(format!(
            "cannot infer a label for {row_id:?}: need a benign/ or malware/ \
             path component, or pass --labels"
        ))),
    }
}

// --- analyze ----------------------------------------------------------------

pub(crate) fn analyze(args: AnalyzeArgs) -> CliResult {
    require_exists(&args.matrix, "matrix")?;
    let m = load_csv_path(&args.matrix)?;
    let freq = class_frequency(&m)?;
    fs::create_dir_all(&args.out).map_err(io_failure)?;

    let mut frequency = String::from("permission,benign,malware\n");
    for (j, name) in m.feature_names().iter().enumerate() {
        frequency.push_str(&format!("{name},{},{}\n", freq.benign[j], freq.malware[j]));
    }
    fs::write(args.out.join("frequency.csv"), frequency).map_err(io_failure)?;

    let variances = column_variances(&m);
    let mut order: Vec<usize> = (0..m.n_cols()).collect();
    order.sort_by(|&a, &b| variances[b].total_cmp(&variances[a]).then(a.cmp(&b)));
    let mut variance = String::from("permission,variance\n");
    for &j in &order {
        variance.push_str(&format!("{},{}\n", m.feature_names()[j], variances[j]));
    }
    fs::write(args.out.join("variance.csv"), variance).map_err(io_failure)?;

    // Correlations among the most important features, malicious rows only.
    // A feature constant over those rows has no defined correlation, so it
    // is skipped in favor of the next-ranked one.
    let forest = fit_forest(&m, &ForestConfig::default(), args.seed)?;
    let mut rank: Vec<usize> = (0..m.n_cols()).collect();
    rank.sort_by(|&a, &b| {
        forest.importance[b]
            .total_cmp(&forest.importance[a])
            .then(a.cmp(&b))
    });
    let malicious: Vec<usize> = (0..m.n_rows()).filter(|&i| m.labels()[i] == 1).collect();
    let varies = |j: usize| {
        let first = m.get(malicious[0], j);
        malicious.iter().any(|&i| m.get(i, j) != first)
    };
    let top: Vec<usize> = rank.into_iter().filter(|&j| varies(j)).take(15).collect();
    let grid = pearson_correlation(&m, &top, Some(1))?;
    let names: Vec<&str> = top.iter().map(|&j| m.feature_names()[j].as_str()).collect();
    let mut correlation = String::from("permission");
    for name in &names {
        correlation.push(',');
        correlation.push_str(name);
    }
    correlation.push('\n');
    for (row, name) in grid.iter().zip(&names) {
        correlation.push_str(name);
        for v in row {
            correlation.push_str(&format!(",{v}"));
        }
        correlation.push('\n');
    }
    fs::write(args.out.join("correlation.csv"), correlation).map_err(io_failure)?;
    Ok(())
}

// --- reduce -----------------------------------------------------------------

pub(crate) fn reduce(args: ReduceArgs) -> CliResult {
    require_exists(&args.matrix, "matrix")?;
    let kind = resolve_reduction_kind(&args.method, args.arch.as_deref())?;
    let m = load_csv_path(&args.matrix)?;
    let cfg = ReductionConfig {
        vt_threshold: args.threshold,
        pca_components: args.components,
    };
    let model = fit_reduction(kind, &m, &cfg, args.seed)?;
    let reduced = apply_reduction(&model, &m)?;
    save_csv_path(&reduced, &args.out)?;
    if let Some(path) = &args.model_out {
        save_model_path(&SavedModel::Reduction(model), path)?;
    }
    Ok(())
}

fn parse_ae_arch(s: &str) -> Result<ReductionKind, Failure> {
    match s.to_ascii_lowercase().as_str() {
        "ae1l" => Ok(ReductionKind::Ae1L),
        "ae3l" => Ok(ReductionKind::Ae3L),
        other => Err(Failure::usage(format!(
            "--arch {other:?}: expected ae1l or ae3l"
        ))),
    }
}

fn resolve_reduction_kind(method: &str, arch: Option<&str>) -> Result<ReductionKind, Failure> {
    if method.eq_ignore_ascii_case("ae") {
        return parse_ae_arch(arch.unwrap_or("ae1l"));
    }
    let kind: ReductionKind = method
        .parse()
        .map_err(|e: Error| Failure::usage(e.to_string()))?;
    if let Some(a) = arch {
        if parse_ae_arch(a)? != kind {
            return Err(Failure::usage(format!(
                "--method {method} conflicts with --arch {a}"
            )));
        }
    }
    Ok(kind)
}

// --- train ------------------------------------------------------------------

pub(crate) fn train(args: TrainArgs) -> CliResult {
    require_exists(&args.matrix, "matrix")?;
    let kind = resolve_classifier_kind(&args.classifier, args.arch.as_deref())?;
    let m = load_csv_path(&args.matrix)?;
    let config = ClassifierConfig::default_for(kind);
    let model = fit(&config, &m, args.seed)?;
    save_model_path(&SavedModel::Classifier(model), &args.out)?;
    Ok(())
}

fn parse_dnn_arch(s: &str) -> Result<ClassifierKind, Failure> {
    match s.to_ascii_lowercase().as_str() {
        "dnn2l" => Ok(ClassifierKind::Dnn2L),
        "dnn4l" => Ok(ClassifierKind::Dnn4L),
        "dnn7l" => Ok(ClassifierKind::Dnn7L),
        other => Err(Failure::usage(format!(
            "--arch {other:?}: expected dnn2l, dnn4l, or dnn7l"
        ))),
    }
}

fn resolve_classifier_kind(
    classifier: &str,
    arch: Option<&str>,
) -> Result<ClassifierKind, Failure> {
    if classifier.eq_ignore_ascii_case("dnn") {
        return parse_dnn_arch(arch.unwrap_or("dnn2l"));
    }
    let kind: ClassifierKind = classifier
        .parse()
        .map_err(|e: Error| Failure::usage(e.to_string()))?;
    if let Some(a) = arch {
        if parse_dnn_arch(a)? != kind {
            return Err(Failure::usage(format!(
                "--classifier {classifier} conflicts with --arch {a}"
            )));
        }
    }
    Ok(kind)
}

// --- evaluate ---------------------------------------------------------------

pub(crate) fn evaluate(args: EvaluateArgs) -> CliResult {
    require_exists(&args.matrix, "matrix")?;
    require_exists(&args.model, "model")?;
    let mut m = load_csv_path(&args.matrix)?;

    if let Some(path) = &args.reduction {
        require_exists(path, "reduction model")?;
        match load_model_path(path)? {
            SavedModel::Reduction(model) => m = apply_reduction(&model, &m)?,
            SavedModel::Classifier(_) => {
                return Err(Failure::data(format!(
                    "{} holds a classifier, expected a reduction",
                    path.display()
                )))
            }
        }
    }
    let model = match load_model_path(&args.model)? {
        SavedModel::Classifier(model) => model,
        SavedModel::Reduction(_) => {
            return Err(Failure::data(format!(
                "{} holds a reduction, expected a classifier",
                args.model.display()
            )))
        }
    };

    let scores = predict_scores(&model, &m)?;
    let evaluation = evaluate_scores(m.labels(), &scores, 0.5)?;
    write_output(args.out.as_deref(), &evaluation_csv(&evaluation))
}

fn rate_token(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |r| r.to_string())
}

fn evaluation_csv(e: &Evaluation) -> String {
    format!(
        "accuracy,tpr,tnr,auc,tp,fp,tn,fn\n{},{},{},{},{},{},{},{}\n",
        e.accuracy,
        rate_token(e.tpr),
        rate_token(e.tnr),
        e.auc,
        e.counts.tp,
        e.counts.fp,
        e.counts.tn,
        e.counts.fn_,
    )
}

// --- grid -------------------------------------------------------------------

/// TOML shape of `--config`; every key optional, unknown keys rejected.
#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    reductions: Option<Vec<String>>,
    classifiers: Option<Vec<String>>,
    ratio: Option<f64>,
    seed: Option<u64>,
    timing_runs: Option<usize>,
    vt_threshold: Option<f64>,
    pca_components: Option<usize>,
}

fn parse_kind_list<T>(items: &[String], what: &str) -> Result<Vec<T>, Failure>
where
    T: std::str::FromStr<Err = Error>,
{
    if items.is_empty() {
        return Err(Failure::data(format!("grid config: empty {what} list")));
    }
    items
        .iter()
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| Failure::data(format!("grid config: {e}")))
        })
        .collect()
}

pub(crate) fn grid(args: GridArgs) -> CliResult {
    require_exists(&args.matrix, "matrix")?;
    let m = load_csv_path(&args.matrix)?;

    let mut cfg = GridConfig::default();
    if let Some(path) = &args.config {
        require_exists(path, "config")?;
        let text = fs::read_to_string(path).map_err(io_failure)?;
        let file: GridFile =
            toml::from_str(&text).map_err(|e| Failure::data(format!("grid config: {e}")))?;
        if let Some(items) = file.reductions {
            cfg.reductions = parse_kind_list(&items, "reduction")?;
        }
        if let Some(items) = file.classifiers {
            cfg.classifiers = parse_kind_list(&items, "classifier")?;
        }
        if let Some(v) = file.ratio {
            cfg.train_ratio = v;
        }
        if let Some(v) = file.seed {
            cfg.seed = v;
        }
        if let Some(v) = file.timing_runs {
            cfg.timing_runs = v;
        }
        if let Some(v) = file.vt_threshold {
            cfg.vt_threshold = v;
        }
        if let Some(v) = file.pca_components {
            cfg.pca_components = v;
        }
    }
    // Flags override the file.
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.ratio {
        cfg.train_ratio = v;
    }
    if let Some(v) = args.timing_runs {
        cfg.timing_runs = v;
    }
    if let Some(v) = args.threshold {
        cfg.vt_threshold = v;
    }
    if let Some(v) = args.components {
        cfg.pca_components = v;
    }

    let reports = run_grid(&m, &cfg)?;
    let csv = report_csv(&reports);
    match (&args.out, args.summary) {
        (Some(path), summary) => {
            fs::write(path, &csv).map_err(io_failure)?;
            if summary {
                print!("{}", format_summary(&reports));
            }
        }
        (None, true) => print!("{}", format_summary(&reports)),
        (None, false) => print!("{csv}"),
    }
    Ok(())
}

// --- synth ------------------------------------------------------------------

pub(crate) fn synth(args: SynthArgs) -> CliResult {
    let catalog = load_catalog(args.catalog.as_deref())?;
    let overrides = match &args.profile {
        Some(path) => read_profile(path)?,
        None => Vec::new(),
    };
    let class_probs = class_probs_with_overrides(&catalog, &overrides)?;

    if args.dump_profile {
        let mut out = String::from("permission,p_benign,p_malware\n");
        for (j, spec) in catalog.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                spec.name, class_probs[0][j], class_probs[1][j]
            ));
        }
        return write_output(args.out.as_deref(), &out);
    }

    let cfg = SynthConfig {
        n_per_class: args.n_per_class,
        class_probs,
        seed: args.seed,
    };
    let m = generate_synthetic(&cfg, &catalog)?;
    match &args.out {
        Some(path) => save_csv_path(&m, path)?,
        None => save_csv(&m, std::io::stdout().lock())?,
    }
    Ok(())
}

fn read_profile(path: &Path) -> Result<Vec<(String, f64, f64)>, Failure> {
    require_exists(path, "profile")?;
    let mut reader =
        csv::Reader::from_path(path).map_err(|e| Failure::data(format!("profile: {e}")))?;
    let headers = reader
        .headers()
        .map_err(|e| Failure::data(format!("profile: {e}")))?
        .clone();
    if headers.len() != 3
        || &headers[0] != "permission"
        || &headers[1] != "p_benign"
        || &headers[2] != "p_malware"
    {
        return Err(Failure::data(
            "profile CSV must have the header permission,p_benign,p_malware".to_string(),
        ));
    }
    let mut overrides = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Failure::data(format!("profile: {e}")))?;
        let prob = |field: &str| {
            field
                .parse::<f64>()
                .map_err(|_| Failure::data(format!("profile: bad probability {field:?}")))
        };
        overrides.push((record[0].to_string(), prob(&record[1])?, prob(&record[2])?));
    }
    Ok(overrides)
}

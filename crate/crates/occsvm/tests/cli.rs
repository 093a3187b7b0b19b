//! End-to-end behaviour of the `occsvm` subcommands: output shapes, exit
//! codes and the quiet-stderr contract on success.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use occsvm::cli;
use occsvm_core::oracle::slow_pgm_oracle;
use occsvm_core::{GramMatrix, Matrix};
use tempfile::TempDir;

struct Outcome {
    code: u8,
    stdout: String,
    stderr: String,
}

fn occsvm(args: &[&str]) -> Outcome {
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let argv = std::iter::once("occsvm").chain(args.iter().copied());
    let code = cli::run(argv, &mut stdout, &mut stderr);
    Outcome {
        code,
        stdout: String::from_utf8(stdout).unwrap(),
        stderr: String::from_utf8(stderr).unwrap(),
    }
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).display().to_string()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn gram_text(rows: &[&[f64]]) -> String {
    let mut s = format!("{}\n", rows.len());
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        s.push_str(&cells.join(" "));
        s.push('\n');
    }
    s
}

/// Parses the `alpha` line of `solve-qp`'s text report.
fn alpha_of(report: &str) -> Vec<f64> {
    let line = report.lines().find(|l| l.starts_with("alpha ")).expect("alpha line");
    line.split_whitespace().skip(1).map(|t| t.parse().unwrap()).collect()
}

fn field<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|rest| rest.strip_prefix(' ')))
        .unwrap_or_else(|| panic!("no {key} line in\n{report}"))
}

#[test]
fn solve_qp_on_identities_spreads_mass_evenly() {
    let dir = TempDir::new().unwrap();
    for n in [2usize, 3] {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let gram = write(&dir, &format!("eye{n}.txt"), &gram_text(&refs));
        let out = occsvm(&["solve-qp", "--gram", &gram]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        assert!(out.stderr.is_empty());
        for a in alpha_of(&out.stdout) {
            assert!((a - 1.0 / n as f64).abs() <= 1e-6, "alpha {a} for n={n}");
        }
        assert_eq!(field(&out.stdout, "converged"), "true");
    }
}

#[test]
fn solve_qp_weights_a_stiff_coordinate_down() {
    let dir = TempDir::new().unwrap();
    let gram = write(
        &dir,
        "diag.txt",
        &gram_text(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 0.0, 100.0]]),
    );
    let out = occsvm(&["solve-qp", "--gram", &gram]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let alpha = alpha_of(&out.stdout);

    // Closed form: αᵢ ∝ 1/dᵢ.
    let total = 3.0 + 0.01;
    let expected = [1.0 / total, 1.0 / total, 1.0 / total, 0.01 / total];
    for (a, e) in alpha.iter().zip(expected) {
        assert!((a - e).abs() <= 1e-6, "alpha {alpha:?}");
    }

    let k = GramMatrix::from_matrix(Matrix::from_diagonal(&[1.0, 1.0, 1.0, 100.0])).unwrap();
    let oracle = slow_pgm_oracle(&k, 0.5, 1e-12, 1_000_000).unwrap();
    let objective: f64 = field(&out.stdout, "objective").parse().unwrap();
    assert!((objective - oracle.objective).abs() <= 1e-6 * oracle.objective);
}

#[test]
fn solve_qp_json_reports_the_same_solution() {
    let dir = TempDir::new().unwrap();
    let gram = write(&dir, "k.txt", &gram_text(&[&[2.0, 0.5], &[0.5, 1.0]]));
    let text = occsvm(&["solve-qp", "--gram", &gram]);
    let json = occsvm(&["solve-qp", "--gram", &gram, "--format", "json"]);
    assert_eq!(json.code, 0);
    let doc: serde_json::Value = serde_json::from_str(&json.stdout).unwrap();
    let alpha: Vec<f64> = doc["alpha"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(alpha, alpha_of(&text.stdout));
    assert_eq!(doc["converged"], true);
}

#[test]
fn solve_qp_rejects_an_infeasible_box() {
    let dir = TempDir::new().unwrap();
    let gram = write(&dir, "eye.txt", &gram_text(&[&[1.0, 0.0], &[0.0, 1.0]]));
    let out = occsvm(&["solve-qp", "--gram", &gram, "--C", "0.4"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("n·C"), "{}", out.stderr);
    assert!(out.stdout.is_empty());
}

#[test]
fn asymmetric_gram_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let gram = write(&dir, "bad.txt", &gram_text(&[&[1.0, 0.2], &[0.3, 1.0]]));
    assert_eq!(occsvm(&["solve-qp", "--gram", &gram]).code, 2);
}

#[test]
fn train_then_predict_round_trip() {
    let dir = TempDir::new().unwrap();
    let model = dir.path().join("model.json");
    let out = occsvm(&["train", "--data", &fixture("blob.svm"), "--nu", "0.05", "--model-out", &path_str(&model)]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stderr.is_empty(), "stderr: {}", out.stderr);
    assert!(out.stdout.contains("note: ignored 250 rows"), "{}", out.stdout);
    assert!(out.stdout.contains("converged=true"));

    let pred = occsvm(&["predict", "--model", &path_str(&model), "--data", &fixture("blob.svm")]);
    assert_eq!(pred.code, 0, "{}", pred.stderr);
    assert!(pred.stderr.is_empty());
    let labels: Vec<&str> = pred.stdout.lines().collect();
    assert_eq!(labels.len(), 500);
    assert!(labels.iter().all(|l| *l == "+1" || *l == "-1"));
    // Negatives sit far outside the blob.
    assert!(labels[250..].iter().all(|l| *l == "-1"));
    let inside = labels[..250].iter().filter(|l| **l == "+1").count();
    assert!(inside >= 225, "{inside} of 250 positives accepted");

    let scored = dir.path().join("scores.txt");
    let out = occsvm(&[
        "predict",
        "--model",
        &path_str(&model),
        "--data",
        &fixture("blob.svm"),
        "--scores",
        "--output",
        &path_str(&scored),
    ]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.is_empty());
    let scores: Vec<f64> = fs::read_to_string(&scored).unwrap().lines().map(|l| l.parse().unwrap()).collect();
    for (s, l) in scores.iter().zip(&labels) {
        assert_eq!(*s >= 0.0, *l == "+1");
    }
}

#[test]
fn an_interior_support_vector_scores_near_zero() {
    // Three collinear points: with ν = 0.9 the box C = 1/2.7 forces all three
    // into the support, and the middle one is strictly inside the box.
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "line.svm", "1 1:0\n1 1:0.5\n1 1:1\n");
    let model = dir.path().join("m.json");
    let out = occsvm(&["train", "--data", &data, "--nu", "0.9", "--model-out", &path_str(&model)]);
    assert_eq!(out.code, 0, "{}", out.stderr);

    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
    let upper = doc["training_meta"]["upper_bound"].as_f64().unwrap();
    // One-dimensional, so the row-major support vectors are one value each.
    let svs = doc["support_vectors"].as_array().unwrap();
    let coefs = doc["coefficients"].as_array().unwrap();
    let interior: Vec<f64> = svs
        .iter()
        .zip(coefs)
        .filter(|(_, a)| a.as_f64().unwrap() < upper * (1.0 - 1e-8))
        .map(|(sv, _)| sv.as_f64().unwrap())
        .collect();
    assert!(!interior.is_empty());

    let probe = write(&dir, "probe.svm", &format!("1 1:{}\n", interior[0]));
    let out = occsvm(&["predict", "--model", &path_str(&model), "--data", &probe, "--scores"]);
    let score: f64 = out.stdout.trim().parse().unwrap();
    assert!(score.abs() <= 1e-5, "score {score}");
}

#[test]
fn csv_training_honours_the_label_column() {
    let dir = TempDir::new().unwrap();
    let model = path_str(&dir.path().join("m.json"));
    let ok = occsvm(&["train", "--data", &fixture("blob.csv"), "--label-col", "label", "--model-out", &model]);
    assert_eq!(ok.code, 0, "{}", ok.stderr);
    assert!(ok.stdout.contains("n_train=120"), "{}", ok.stdout);
    let missing = occsvm(&["train", "--data", &fixture("blob.csv"), "--label-col", "class", "--model-out", &model]);
    assert_eq!(missing.code, 1);
}

#[test]
fn scaled_models_apply_their_scaling_at_prediction() {
    let dir = TempDir::new().unwrap();
    let model = path_str(&dir.path().join("m.json"));
    let out = occsvm(&["train", "--data", &fixture("blob.svm"), "--nu", "0.05", "--scale", "--model-out", &model]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
    assert!(doc["training_meta"]["scaling"].is_object());
    let pred = occsvm(&["predict", "--model", &model, "--data", &fixture("blob.svm")]);
    let labels: Vec<&str> = pred.stdout.lines().collect();
    assert!(labels[250..].iter().all(|l| *l == "-1"));
}

#[test]
fn usage_errors_exit_with_one() {
    let missing_data = occsvm(&["train"]);
    assert_eq!(missing_data.code, 1);
    assert!(missing_data.stderr.contains("--data"));

    let bad_nu = occsvm(&["train", "--data", &fixture("blob.svm"), "--nu", "1.5"]);
    assert_eq!(bad_nu.code, 1);
    assert!(bad_nu.stderr.contains("nu must be in (0,1)"), "{}", bad_nu.stderr);

    let bad_gamma = occsvm(&["train", "--data", &fixture("blob.svm"), "--gamma", "-1"]);
    assert_eq!(bad_gamma.code, 1, "{}", bad_gamma.stderr);

    assert_eq!(occsvm(&["frobnicate"]).code, 1);
    assert_eq!(occsvm(&["bench", "--plan", "p.toml", "--data", "x.svm"]).code, 1);
}

#[test]
fn data_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let model = path_str(&dir.path().join("m.json"));

    let absent = occsvm(&["train", "--data", "/nonexistent/data.svm", "--model-out", &model]);
    assert_eq!(absent.code, 2);
    assert!(absent.stderr.contains("/nonexistent/data.svm"));

    let malformed = write(&dir, "bad.svm", "1 1:0.5\n1 2:abc\n");
    let out = occsvm(&["train", "--data", &malformed, "--model-out", &model]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("line 2"), "{}", out.stderr);

    let negatives_only = write(&dir, "neg.svm", "-1 1:0.5\n-1 1:0.7\n");
    assert_eq!(occsvm(&["train", "--data", &negatives_only, "--model-out", &model]).code, 2);

    let corrupt = write(&dir, "corrupt.json", "{\"format_version\": 1, \"kernel\": ");
    let out = occsvm(&["predict", "--model", &corrupt, "--data", &fixture("blob.svm")]);
    assert_eq!(out.code, 2);
    assert!(out.stdout.is_empty());
}

#[test]
fn predicting_with_the_wrong_dimension_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let model = path_str(&dir.path().join("m.json"));
    assert_eq!(occsvm(&["train", "--data", &fixture("blob.svm"), "--model-out", &model]).code, 0);
    let wide = write(&dir, "wide.svm", "1 1:0.1 2:0.2 3:0.3\n");
    let out = occsvm(&["predict", "--model", &model, "--data", &wide]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("dimension"), "{}", out.stderr);

    // Trailing zero features are absent in svmlight, so narrow rows are padded.
    let narrow = write(&dir, "narrow.svm", "1 1:0.1\n");
    assert_eq!(occsvm(&["predict", "--model", &model, "--data", &narrow]).code, 0);
}

#[test]
fn non_convergence_exits_with_three_and_still_writes_the_model() {
    let dir = TempDir::new().unwrap();
    let model = dir.path().join("m.json");
    let out = occsvm(&[
        "train",
        "--data",
        &fixture("blob.svm"),
        "--max-outer",
        "2",
        "--model-out",
        &path_str(&model),
    ]);
    assert_eq!(out.code, 3);
    assert!(out.stderr.contains("warning"), "{}", out.stderr);
    assert!(model.exists());
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(doc["training_meta"]["converged"], false);
}

#[test]
fn a_bench_where_every_cell_fails_exits_with_four() {
    let dir = TempDir::new().unwrap();
    let empty = write(&dir, "empty.svm", "# nothing here\n");
    let out = occsvm(&["bench", "--data", &empty, "--gammas", "0.5"]);
    assert_eq!(out.code, 4);
    assert!(out.stderr.contains("empty"), "{}", out.stderr);
    assert!(out.stdout.contains("n/a"));
}

#[test]
fn bench_from_a_plan_prints_both_tables() {
    let out = occsvm(&["bench", "--plan", &fixture("blob_plan.toml")]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stderr.is_empty());
    assert!(out.stdout.starts_with("# "));
    assert!(out.stdout.contains("Accuracy (%)"));
    assert!(out.stdout.contains("F1 (%)"));
    assert!(out.stdout.contains("Name & gamma=0.1 & gamma=0.5 & gamma=1"));
    assert_eq!(out.stdout.lines().filter(|l| l.starts_with("Blob ")).count(), 2);
}

#[test]
fn help_lists_defaults() {
    let out = occsvm(&["train", "--help"]);
    assert_eq!(out.code, 0);
    assert!(out.stderr.is_empty());
    for needle in ["--nu", "[default: 0.5]", "--c0", "[default: 0.1]", "[default: 0.99]", "[default: 1.01]", "--tol"] {
        assert!(out.stdout.contains(needle), "help lacks {needle}:\n{}", out.stdout);
    }
    assert_eq!(occsvm(&["--version"]).code, 0);
}

#[test]
fn the_binary_propagates_exit_codes() {
    let bin = PathBuf::from(env!("CARGO_BIN_EXE_occsvm"));
    let status = Command::new(&bin).args(["train", "--nu", "1.5", "--data", &fixture("blob.svm")]).output().unwrap();
    assert_eq!(status.status.code(), Some(1));
    let status = Command::new(&bin).arg("--help").output().unwrap();
    assert_eq!(status.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&status.stdout).contains("solve-qp"));
}

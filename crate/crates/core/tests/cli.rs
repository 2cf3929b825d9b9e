use std::path::Path;
use std::process::{Command, Output};

fn typedcrf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_typedcrf"))
        .args(args)
        .env_remove("TYPEDCRF_SEED")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = typedcrf(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn generate_train_predict_eval() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.txt");
    let model = dir.path().join("model.txt");
    let pred = dir.path().join("pred.txt");
    ok(&["gen-data", "--count", "4", "--hidden", "--seed", "3", "--out", p(&data)]);
    let samples = typedcrf::snake_data::load_dataset(&data).unwrap();
    assert!((4..=8).contains(&samples.len()));

    ok(&["train", "--model", "multi", "--data", p(&data), "--epochs", "1", "--seed", "1", "--out", p(&model)]);
    ok(&[
        "predict",
        "--model-file",
        p(&model),
        "--data",
        p(&data),
        "--constraints",
        "snake10",
        "--out",
        p(&pred),
    ]);
    let text = std::fs::read(&pred).unwrap();
    let preds = typedcrf::experiment::read_predictions(&text[..]).unwrap();
    assert_eq!(preds.len(), samples.len());
    assert!(preds.iter().all(|p| p.pixels.is_some() && p.image.is_some()));

    let table = ok(&["eval", "--pred", p(&pred), "--data", p(&data)]);
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("pixels\tpixel_acc"));
    let cols: Vec<&str> = lines[1].split('\t').collect();
    assert_eq!(cols.len(), 6);
    let pixels: usize = samples.iter().map(|s| s.image.num_cells()).sum();
    assert_eq!(cols[0], pixels.to_string());
    assert_ne!(cols[5], "NA");
}

#[test]
fn seed_falls_back_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
    let run = |out: &Path| {
        let status = Command::new(env!("CARGO_BIN_EXE_typedcrf"))
            .args(["gen-data", "--count", "3", "--out", p(out)])
            .env("TYPEDCRF_SEED", "42")
            .status()
            .unwrap();
        assert!(status.success());
    };
    run(&a);
    run(&b);
    ok(&["gen-data", "--count", "3", "--seed", "42", "--out", p(&dir.path().join("c.txt"))]);
    let read = |name: &str| std::fs::read(dir.path().join(name)).unwrap();
    assert_eq!(read("a.txt"), read("b.txt"));
    assert_eq!(read("a.txt"), read("c.txt"));
}

#[test]
fn failures_exit_nonzero_with_one_line() {
    let out = typedcrf(&["eval", "--pred", "/nonexistent/pred.txt", "--data", "/nonexistent/data.txt"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("typedcrf: "));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "2 2 S\nUU\n").unwrap();
    let out = typedcrf(&["train", "--model", "single", "--data", p(&bad), "--out", p(&dir.path().join("m"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

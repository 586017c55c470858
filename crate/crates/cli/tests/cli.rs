use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sgf() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sgf"));
    c.env_remove("SGF_CONFIG");
    c
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sgf-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn small_config(dir: &Path) -> PathBuf {
    let p = dir.join("small.ini");
    fs::write(
        &p,
        "[synthetic]\ntrain_per_class = 1\ntest_per_class = 1\nnoise = 0.01\nseed = 3\n",
    )
    .unwrap();
    p
}

#[test]
fn convnet_table_totals() {
    let o = run(sgf().args(["cost", "convnet"]));
    assert!(o.status.success());
    assert_eq!(
        stdout(&o).lines().last().unwrap(),
        "Total 18995720, 211501832"
    );
    let csv = stdout(&run(sgf().args(["cost", "sgf", "--format", "csv"])));
    assert!(csv.lines().count() > 10);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(sgf().arg("--bogus")).status.code(), Some(1));
    assert_eq!(run(sgf().args(["cost", "lenet"])).status.code(), Some(1));
    assert_eq!(
        run(sgf().args(["generate", "--class", "11"])).status.code(),
        Some(1)
    );
    assert_eq!(run(&mut sgf()).status.code(), Some(1));
    assert_eq!(run(sgf().arg("--help")).status.code(), Some(0));
}

#[test]
fn config_errors_name_key_and_line() {
    let dir = scratch("config");
    let p = dir.join("bad.ini");
    fs::write(&p, "[aer]\nfifo_capacity = 0\n").unwrap();
    let o = run(sgf().arg("--config").arg(&p).arg("config"));
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("aer.fifo_capacity"), "{e}");
    assert!(e.contains("bad.ini"), "{e}");

    // Same file through the environment.
    let o = run(sgf().env("SGF_CONFIG", &p).arg("config"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("aer.fifo_capacity"));

    // --config wins over the environment.
    let good = small_config(&dir);
    let o = run(sgf()
        .env("SGF_CONFIG", &p)
        .arg("--config")
        .arg(&good)
        .arg("config"));
    assert!(o.status.success());
    assert!(stdout(&o).contains("train_per_class = 1"));
}

#[test]
fn seed_and_similarity_override_config() {
    let o = run(sgf().args(["--seed", "77", "--similarity", "xnor", "config"]));
    let text = stdout(&o);
    assert!(text.contains("seed = 77"), "{text}");
    assert!(text.contains("similarity = xnor"), "{text}");
}

#[test]
fn bad_event_line_is_reported() {
    let dir = scratch("events");
    let p = dir.join("bad.txt");
    fs::write(&p, "0,1,1,1\n1,2,2,-1\n2,200,2,1\n").unwrap();
    let o = run(sgf().arg("aer-dump").arg(&p));
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("bad.txt") && e.contains("line 3"), "{e}");

    let o = run(sgf().arg("aer-dump").arg(dir.join("missing.txt")));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.txt"));
}

#[test]
fn empty_manifest_is_rejected() {
    let dir = scratch("empty");
    let m = dir.join("empty.csv");
    fs::write(&m, "# nothing here\n\n").unwrap();
    let o = run(sgf()
        .arg("evaluate")
        .arg(&m)
        .arg("--model")
        .arg(dir.join("m.txt")));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("empty manifest"));
}

#[test]
fn aer_dump_round_trip() {
    let dir = scratch("aer");
    let ev = dir.join("ev.txt");
    let hex = dir.join("ev.hex");
    let back = dir.join("back.txt");
    assert!(run(sgf()
        .args([
            "generate",
            "--kind",
            "circular-ccw",
            "--frames",
            "6",
            "--noise",
            "0.02"
        ])
        .arg("--out")
        .arg(&ev))
    .status
    .success());
    assert!(run(sgf().arg("aer-dump").arg(&ev).arg("--out").arg(&hex))
        .status
        .success());
    assert!(run(sgf()
        .arg("aer-dump")
        .arg("--reverse")
        .arg(&hex)
        .arg("--out")
        .arg(&back))
    .status
    .success());
    assert_eq!(fs::read(&ev).unwrap(), fs::read(&back).unwrap());
}

#[test]
fn generation_is_deterministic() {
    let a = run(sgf().args(["--seed", "9", "generate", "--class", "5", "--index", "2"]));
    let b = run(sgf().args(["--seed", "9", "generate", "--class", "5", "--index", "2"]));
    let c = run(sgf().args(["--seed", "10", "generate", "--class", "5", "--index", "2"]));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn filter_outputs() {
    let dir = scratch("filter");
    let ev = dir.join("ev.txt");
    assert!(run(sgf()
        .args(["generate", "--class", "1"])
        .arg("--out")
        .arg(&ev))
    .status
    .success());
    let rec = stdout(&run(sgf().arg("filter").arg(&ev)));
    assert!(!rec.is_empty());
    assert!(rec.lines().all(|l| l.split(',').count() == 3));
    let pgm = stdout(&run(sgf()
        .arg("filter")
        .arg(&ev)
        .args(["--unit", "c", "--format", "pgm"])));
    assert!(pgm.starts_with("P2\n128 128\n"));
    assert_eq!(pgm.lines().count(), 3 + 128);
    let loose = stdout(&run(sgf().arg("filter").arg(&ev).args(["--st", "1,1,2,1"])));
    let strict = stdout(&run(sgf()
        .arg("filter")
        .arg(&ev)
        .args(["--st", "1,10,2,2"])));
    assert!(strict.lines().count() < loose.lines().count());
}

#[test]
fn train_infer_evaluate() {
    let dir = scratch("train");
    let cfg = small_config(&dir);
    let suite = dir.join("suite");
    let model = dir.join("model.txt");
    let with_cfg = || {
        let mut c = sgf();
        c.arg("--config").arg(&cfg);
        c
    };
    assert!(run(with_cfg().arg("generate").arg("--out").arg(&suite))
        .status
        .success());
    let o = run(with_cfg()
        .arg("train")
        .arg(suite.join("train.csv"))
        .arg("--model")
        .arg(&model));
    assert!(o.status.success(), "{}", stderr(&o));
    let report = stdout(&o);
    assert_eq!(report.lines().next(), Some("trial,class,distinct"));
    assert_eq!(report.lines().count(), 11);

    // The trace vector of a training sample is one of the stored unit A vectors.
    let sample = suite.join("train").join("c03_000.txt");
    let o = run(with_cfg()
        .arg("infer")
        .arg(&sample)
        .arg("--model")
        .arg(&model)
        .arg("--trace"));
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("class 3 "), "{text}");
    let vector = text
        .lines()
        .find_map(|l| l.strip_prefix("trace A vector "))
        .expect("unit A trace");
    assert!(fs::read_to_string(&model).unwrap().contains(vector));

    let o = run(with_cfg()
        .arg("evaluate")
        .arg(suite.join("test.csv"))
        .arg("--model")
        .arg(&model)
        .args(["--format", "csv"]));
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    assert_eq!(csv.lines().next(), Some("actual,1,2,3,4,5,6,7,8,9,10"));
    assert!(csv.lines().last().unwrap().starts_with("accuracy,"));

    // Missing model file.
    let o = run(sgf()
        .arg("infer")
        .arg(&sample)
        .arg("--model")
        .arg(dir.join("nope.txt")));
    assert_eq!(o.status.code(), Some(2));
}

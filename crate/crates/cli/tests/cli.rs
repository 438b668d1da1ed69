use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_boostelm"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Two noisy clusters labelled 3 and 7.
fn write_pair(dir: &Path) -> (PathBuf, PathBuf) {
    let mut lines = [String::new(), String::new()];
    for i in 0..240 {
        let class = i % 2;
        let label = if class == 0 { 3 } else { 7 };
        let centre = if class == 0 { -1.5 } else { 1.5 };
        let a = centre + ((i * 37 % 17) as f64 / 17.0 - 0.5);
        let b = centre + ((i * 53 % 23) as f64 / 23.0 - 0.5);
        let c = (i * 11 % 7) as f64 / 7.0;
        lines[usize::from(i >= 180)].push_str(&format!("{label} 1:{a} 2:{b} 3:{c}\n"));
    }
    let train = dir.join("toy.train");
    let test = dir.join("toy.test");
    fs::write(&train, &lines[0]).unwrap();
    fs::write(&test, &lines[1]).unwrap();
    (train, test)
}

struct Fixture {
    dir: TempDir,
    train: String,
    test: String,
}

impl Fixture {
    fn new() -> Fixture {
        let dir = TempDir::new().unwrap();
        let (train, test) = write_pair(dir.path());
        Fixture {
            train: train.display().to_string(),
            test: test.display().to_string(),
            dir,
        }
    }

    fn out(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(code(&run(&["train", "--help"])), 0);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["train", "--m", "abc"])), 1);
    let f = Fixture::new();
    let o = run(&["train", "--train", &f.train]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("--test"));
    let o = run(&["train", "--train", &f.train, "--test", &f.test, "--m", "0"]);
    assert_eq!(code(&o), 1);
    let o = run(&[
        "sweep",
        "--train",
        &f.train,
        "--test",
        &f.test,
        "--m-values",
        "5:1:1",
        "--t-values",
        "1",
        "--nh-values",
        "4",
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn bad_data_exits_two_with_location() {
    let f = Fixture::new();
    let bad = f.out("bad.train");
    fs::write(&bad, "1 1:0.5\n2 3:1.0 2:4.0\n").unwrap();
    let o = run(&["train", "--train", bad.to_str().unwrap(), "--test", &f.test]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("bad.train") && err.contains("line 2"), "{err}");
    let o = run(&[
        "train",
        "--train",
        "/nonexistent/x.train",
        "--test",
        &f.test,
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn training_failure_exits_three() {
    let f = Fixture::new();
    let tiny = f.out("tiny.train");
    fs::write(&tiny, "1 1:0\n2 1:1\n").unwrap();
    let o = run(&[
        "train",
        "--train",
        tiny.to_str().unwrap(),
        "--test",
        &f.test,
        "--m",
        "1000",
        "--out",
        f.out("t").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn train_predict_and_rerun_from_manifest() {
    let f = Fixture::new();
    let out = f.out("run");
    let o = run(&[
        "train",
        "--train",
        &f.train,
        "--test",
        &f.test,
        "--m",
        "3",
        "--t",
        "3",
        "--nh",
        "10",
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("accuracy"));
    let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
    let mut lines = metrics.lines();
    assert_eq!(
        lines.next().unwrap(),
        "dataset,M,T,nh,seed,accuracy,precision_macro,recall_macro,f1"
    );
    assert!(lines.next().unwrap().starts_with("toy,3,3,10,5,"));

    let labels = f.out("labels.csv");
    let o = run(&[
        "predict",
        "--model",
        out.join("model.json").to_str().unwrap(),
        "--test",
        &f.test,
        "--out",
        labels.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&labels).unwrap();
    assert_eq!(text.lines().count(), 61);
    assert!(text
        .lines()
        .skip(1)
        .all(|l| l.ends_with(",3") || l.ends_with(",7")));

    let again = f.out("again");
    let o = run(&[
        "train",
        "--from-manifest",
        out.join("manifest.json").to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        fs::read(out.join("model.json")).unwrap(),
        fs::read(again.join("model.json")).unwrap()
    );

    fs::write(&f.train, "3 1:0\n7 1:1\n").unwrap();
    let o = run(&[
        "train",
        "--from-manifest",
        out.join("manifest.json").to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("hash"));
}

#[test]
fn workers_do_not_change_saved_model() {
    let f = Fixture::new();
    let mut models = Vec::new();
    for w in ["1", "4"] {
        let out = f.out(&format!("w{w}"));
        let o = run(&[
            "train",
            "--train",
            &f.train,
            "--test",
            &f.test,
            "--m",
            "4",
            "--workers",
            w,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        models.push(fs::read(out.join("model.json")).unwrap());
    }
    assert_eq!(models[0], models[1]);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let f = Fixture::new();
    let cfg = f.out("cfg.toml");
    fs::write(&cfg, "m = 2\nt = 2\nnh = 6\nseed = 9\nscale = \"minmax\"\n").unwrap();
    let out = f.out("c");
    let o = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "train",
        "--train",
        &f.train,
        "--test",
        &f.test,
        "--t",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["m"], 2);
    assert_eq!(manifest["config"]["boost"]["t_max"], 4);
    assert_eq!(manifest["config"]["seed"], 9);
    assert_eq!(manifest["scaling"], "minmax");

    fs::write(&cfg, "bogus = 1\n").unwrap();
    let o = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "train",
        "--train",
        &f.train,
        "--test",
        &f.test,
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn experiment_commands_write_their_tables() {
    let f = Fixture::new();
    let out = f.out("e");
    let o_dir = out.to_str().unwrap();

    let o = run(&[
        "baseline",
        "--train",
        &f.train,
        "--test",
        &f.test,
        "--nh-range",
        "5:15:5",
        "--repeats",
        "2",
        "--out",
        o_dir,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let b = fs::read_to_string(out.join("baseline.csv")).unwrap();
    assert_eq!(b.lines().count(), 4);
    assert!(b.starts_with("nh,accuracy,precision_macro,recall_macro,f1\n5,"));

    let o = run(&[
        "sweep",
        "--train",
        &f.train,
        "--test",
        &f.test,
        "--m-values",
        "1,2",
        "--t-values",
        "1,2",
        "--nh-values",
        "4,8",
        "--out",
        o_dir,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for name in [
        "sweep_long.csv",
        "sweep_m_t.csv",
        "sweep_m_nh.csv",
        "sweep_t_nh.csv",
    ] {
        assert!(out.join(name).exists(), "{name}");
    }
    assert_eq!(
        fs::read_to_string(out.join("sweep_long.csv"))
            .unwrap()
            .lines()
            .count(),
        9
    );

    let o = run(&[
        "stability",
        "--train",
        &f.train,
        "--test",
        &f.test,
        "--vary",
        "M",
        "--values",
        "1,3",
        "--seeds",
        "1,2,3",
        "--out",
        o_dir,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = fs::read_to_string(out.join("stability.csv")).unwrap();
    assert!(s.starts_with("value,mean_acc,std_acc\n1,"));
    let o = run(&[
        "stability",
        "--train",
        &f.train,
        "--test",
        &f.test,
        "--vary",
        "T",
        "--values",
        "1",
        "--seeds",
        "4",
        "--out",
        o_dir,
    ]);
    assert_eq!(code(&o), 1);

    let o = run(&[
        "speedup",
        "--synthetic",
        "2000,4,2",
        "--mapper-counts",
        "2,4",
        "--t",
        "2",
        "--out",
        o_dir,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = fs::read_to_string(out.join("speedup.csv")).unwrap();
    assert!(s.starts_with("M,wall_seconds,speedup\n2,"));
    assert!(s.lines().nth(1).unwrap().ends_with(",1.000000"));
}

use std::fs;
use std::path::Path;

use imbal_core::cli::{run, EXIT_CONFIG, EXIT_DATA, EXIT_DIVERGENCE, EXIT_OK};
use serde_json::Value;

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn imbal(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("imbal").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn single_row_table() {
    let r = imbal(&["table", "--q", "1", "--links", "logit", "--m", "100"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(r.stdout.contains("10^2"));
    assert!(!r.stdout.contains("10^3"));
}

#[test]
fn table_files_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for stem in [&a, &b] {
        let r = imbal(&["table", "--preset", "table2", "--m", "1e2,1e3", "--out", stem.to_str().unwrap()]);
        assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    }
    for ext in ["csv", "txt"] {
        let x = fs::read(a.with_extension(ext)).unwrap();
        let y = fs::read(b.with_extension(ext)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{ext}");
    }
}

#[test]
fn table_config_errors() {
    assert_eq!(imbal(&["table", "--m", "100,10", "--links", "logit"]).code, EXIT_CONFIG);
    assert_eq!(imbal(&["table", "--m", "100"]).code, EXIT_CONFIG);
    assert_eq!(imbal(&["table", "--preset", "table9"]).code, EXIT_CONFIG);
    assert_eq!(imbal(&["table", "--links", "no-such-link"]).code, EXIT_CONFIG);
    assert_eq!(imbal(&["table", "--q", "1", "--links", "cauchit", "--m", "100"]).code, EXIT_CONFIG);
    assert_eq!(imbal(&["table", "--preset", "table1", "--kappa", "-1"]).code, EXIT_CONFIG);
    assert_eq!(imbal(&["no-such-command"]).code, EXIT_CONFIG);
}

#[test]
fn help_goes_to_stdout() {
    let r = imbal(&["--help"]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.stdout.contains("fit-ppp"));
}

#[test]
fn fit_ppp_two_point_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let support = write(dir.path(), "support.csv", "x,weight\n0,0.5\n1,0.5\n");
    let events = write(dir.path(), "events.csv", "x\n0\n0\n0\n");
    let r = imbal(&["fit-ppp", "--support", &support, "--events", &events, "--q", "0.5", "--kappa", "0.5"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    let total = v["total_intensity"].as_f64().unwrap();
    assert!((total - 3.5).abs() < 1e-9, "{}", r.stdout);
}

#[test]
fn fit_ppp_without_events_converges() {
    let dir = tempfile::tempdir().unwrap();
    let support = write(dir.path(), "support.csv", "x,weight\n0,0.25\n1,0.25\n2,0.5\n");
    let events = write(dir.path(), "events.csv", "x\n");
    let r = imbal(&["fit-ppp", "--support", &support, "--events", &events, "--q", "0", "--kappa", "1"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
}

#[test]
fn fit_ppp_divergence_exit_and_warning() {
    let dir = tempfile::tempdir().unwrap();
    let support = write(dir.path(), "support.csv", "x,weight\n0,0.25\n1,0.5\n2,0.25\n");
    let events = write(dir.path(), "events.csv", "x\n1\n1\n2\n");
    let out = dir.path().join("fit.json");
    let r = imbal(&[
        "fit-ppp", "--support", &support, "--events", &events, "--q", "0", "--kappa", "0", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.code, EXIT_DIVERGENCE, "{}", r.stderr);
    assert!(r.stderr.contains("may not exist"), "{}", r.stderr);
    assert!(!out.exists(), "no partial output on failure");
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 2, "no temporary files left behind");
}

#[test]
fn fit_ppp_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let dup = write(dir.path(), "dup.csv", "x,weight\n0,0.5\n0,0.5\n");
    assert_eq!(imbal(&["fit-ppp", "--support", &dup]).code, EXIT_DATA);
    let line = write(dir.path(), "line.csv", "x1,x2,weight\n0,0,0.3\n1,1,0.3\n2,2,0.4\n");
    assert_eq!(imbal(&["fit-ppp", "--support", &line]).code, EXIT_DATA);
    let missing = dir.path().join("missing.csv");
    assert_eq!(imbal(&["fit-ppp", "--support", missing.to_str().unwrap()]).code, EXIT_CONFIG);
    assert_eq!(imbal(&["fit-ppp"]).code, EXIT_CONFIG);
}

#[test]
fn fit_glm_json_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "d.csv", "x,y\n-1,0\n-0.5,1\n0,0\n0.5,1\n1,0\n1.5,1\n2,1\n");
    let r = imbal(&["fit-glm", "--data", &data, "--link", "logit"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["converged"], Value::Bool(true));
    assert_eq!(v["m"].as_u64(), Some(7));

    let one_class = write(dir.path(), "o.csv", "x,y\n0,1\n1,1\n");
    assert_eq!(imbal(&["fit-glm", "--data", &one_class, "--link", "logit"]).code, EXIT_DATA);
    let separated = write(dir.path(), "s.csv", "x,y\n0,0\n1,0\n2,1\n3,1\n");
    assert_eq!(imbal(&["fit-glm", "--data", &separated, "--link", "logit"]).code, EXIT_DIVERGENCE);
    assert_eq!(imbal(&["fit-glm", "--data", &separated, "--link", "logit", "--kappa", "1"]).code, EXIT_OK);
}

#[test]
fn config_file_merges_with_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "exp.toml", "[table]\nq = 1.0\nlinks = [\"logit\"]\nm = [100, 1000]\n");
    let r = imbal(&["--config", &cfg, "table"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(r.stdout.contains("10^3"));
    // the flag overrides the file
    let r = imbal(&["--config", &cfg, "table", "--m", "100"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(!r.stdout.contains("10^3"));

    let bad = write(dir.path(), "bad.toml", "[table]\nunknown_key = 1\n");
    assert_eq!(imbal(&["--config", &bad, "table"]).code, EXIT_CONFIG);
    let decreasing = write(dir.path(), "dec.toml", "[table]\nlinks = [\"logit\"]\nm = [1000, 100]\n");
    assert_eq!(imbal(&["--config", &decreasing, "table"]).code, EXIT_CONFIG);
}

#[test]
fn verify_gev_logistic_residual() {
    let r = imbal(&["verify", "gev", "--link", "logistic", "--m", "1e6", "--z", "0"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    let res = v["results"][0]["residuals"][0]["residual"].as_f64().unwrap();
    assert!(res.abs() <= 2e-6, "{res}");

    let probit = imbal(&["verify", "gev", "--link", "probit", "--m", "1e6", "--z", "0"]);
    let v: Value = serde_json::from_str(&probit.stdout).unwrap();
    assert!(v["results"][0]["residuals"][0]["residual"].as_f64().unwrap().abs() > 100.0 * res.abs());
}

#[test]
fn verify_poisson_is_deterministic() {
    let args = ["verify", "poisson", "--link", "logistic", "--m", "1e4", "--reps", "500", "--seed", "7"];
    let a = imbal(&args);
    let b = imbal(&args);
    assert_eq!(a.code, EXIT_OK, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_str(&a.stdout).unwrap();
    assert_eq!(v["regions"].as_array().unwrap().len(), 2);

    let r = imbal(&["verify", "poisson", "--reps", "10", "--regions", "0-3;3"]);
    assert_eq!(r.code, EXIT_CONFIG);
}

#[test]
fn simulate_writes_a_reproducible_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let out = |n: &str| dir.path().join(n).to_str().unwrap().to_owned();
    for name in ["a.csv", "b.csv"] {
        let r = imbal(&["simulate", "--link", "cloglog", "--m", "2000", "--seed", "4", "--out", &out(name)]);
        assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    }
    let a = fs::read_to_string(out("a.csv")).unwrap();
    assert_eq!(a, fs::read_to_string(out("b.csv")).unwrap());
    assert_eq!(a.lines().count(), 2001);
}

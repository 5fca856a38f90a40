use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_fockpath");

struct Sandbox {
    root: tempfile::TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Sandbox {
            root: tempfile::tempdir().unwrap(),
        }
    }

    fn config(&self, name: &str, text: &str) -> PathBuf {
        let p = self.root.path().join(format!("{name}.toml"));
        fs::write(&p, text).unwrap();
        p
    }

    fn fockpath(&self, args: &[&str]) -> Output {
        Command::new(BIN)
            .args(args)
            .env("FOCKPATH_OUTPUT_ROOT", self.root.path().join("out"))
            .output()
            .unwrap()
    }

    fn run(&self, config: &Path) -> Output {
        self.fockpath(&["run", config.to_str().unwrap()])
    }

    fn run_dir(&self, stem: &str) -> PathBuf {
        self.root.path().join("out/runs").join(stem)
    }
}

fn manifest(dir: &Path) -> toml::Value {
    toml::from_str(&fs::read_to_string(dir.join("manifest.toml")).unwrap()).unwrap()
}

const CONVERGE_N1: &str = r#"
experiment = "converge"
symbol = "n1"
t = 1.0
n_list = [4, 8, 16, 32]
alpha = [[0.5, 0.0]]
beta = [[0.5, 0.0]]

[modes]
cutoff = 24
pad = 6

[quadrature]
radial = 60
angular = 120
"#;

#[test]
fn converge_on_the_number_symbol() {
    let s = Sandbox::new();
    let out = s.run(&s.config("n1", CONVERGE_N1));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = s.run_dir("n1");
    let csv = fs::read_to_string(dir.join("converge.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,value_re,value_im,exact_re,exact_im,abs_error"));
    assert_eq!(lines.count(), 4);
    let svg = fs::read_to_string(dir.join("converge.svg")).unwrap();
    let at = svg.find("slope = ").unwrap() + "slope = ".len();
    let slope: f64 = svg[at..].split('<').next().unwrap().parse().unwrap();
    assert!((-1.15..=-0.85).contains(&slope), "{slope}");
    assert_eq!(svg.matches("<circle").count(), 4);
    let m = manifest(&dir);
    assert_eq!(m["exit_code"].as_integer(), Some(0));
    assert_eq!(m["passed"].as_bool(), Some(true));
}

#[test]
fn zero_time_rows_are_exact() {
    let s = Sandbox::new();
    let cfg = s.config(
        "t0",
        "experiment = \"propagate\"\nsymbol = \"n1 + 0.3*(c1 + cstar1)\"\nn_list = [1, 2]\nalpha = [[0.5, 0.2]]\nbeta = [[0.3, -0.1]]\n[modes]\ncutoff = 12\n",
    );
    let out = s.run(&cfg);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(s.run_dir("t0").join("propagate.csv")).unwrap();
    for row in csv.lines().skip(1) {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f[1], f[3]);
        assert_eq!(f[2], f[4]);
        assert_eq!(f[5].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn malformed_symbol_is_a_usage_error_with_offset() {
    let s = Sandbox::new();
    let cfg = s.config("bad", &CONVERGE_N1.replace("\"n1\"", "\"n1 + (c1\""));
    let out = s.run(&cfg);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("offset 8"), "{err}");
    assert!(!s.run_dir("bad").exists());
}

#[test]
fn empty_n_list_stops_before_compute() {
    let s = Sandbox::new();
    let cfg = s.config("empty", &CONVERGE_N1.replace("[4, 8, 16, 32]", "[]"));
    let out = s.run(&cfg);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_list"));
    assert!(!s.run_dir("empty").exists());
}

#[test]
fn unknown_keys_are_usage_errors() {
    let s = Sandbox::new();
    let cfg = s.config("typo", &CONVERGE_N1.replace("t = 1.0", "t = 1.0\nslices = 3"));
    assert_eq!(s.fockpath(&["validate", cfg.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(s.run(&cfg).status.code(), Some(1));
}

#[test]
fn tolerance_failure_is_recorded_in_the_manifest() {
    let s = Sandbox::new();
    let cfg = s.config("strict", &format!("{CONVERGE_N1}\n[tolerances]\nrate_max = -1.5\n"));
    let out = s.run(&cfg);
    assert_eq!(out.status.code(), Some(2));
    let m = manifest(&s.run_dir("strict"));
    assert_eq!(m["exit_code"].as_integer(), Some(2));
    assert_eq!(m["passed"].as_bool(), Some(false));
    let failed: Vec<&str> = m["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"].as_bool() == Some(false))
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["fitted slope"]);
}

#[test]
fn coarse_grid_is_infeasible() {
    let s = Sandbox::new();
    let cfg = s.config(
        "coarse",
        &CONVERGE_N1
            .replace("radial = 60", "radial = 8")
            .replace("angular = 120", "angular = 16"),
    );
    assert_eq!(s.fockpath(&["validate", cfg.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(s.run(&cfg).status.code(), Some(3));
}

#[test]
fn manifest_echo_reproduces_the_run() {
    let s = Sandbox::new();
    let out = s.run(&s.config("first", CONVERGE_N1));
    assert_eq!(out.status.code(), Some(0));
    let m = manifest(&s.run_dir("first"));
    let echo = toml::to_string(&m["config"]).unwrap();
    let out = s.run(&s.config("second", &echo));
    assert_eq!(out.status.code(), Some(0));
    let a = fs::read(s.run_dir("first").join("converge.csv")).unwrap();
    let b = fs::read(s.run_dir("second").join("converge.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn explicit_output_lands_under_the_root() {
    let s = Sandbox::new();
    let cfg = s.config(
        "p",
        "experiment = \"plancherel\"\noutput = \"here/pl\"\nsweep = [2, 3]\n[modes]\ncutoff = 4\n",
    );
    assert_eq!(s.run(&cfg).status.code(), Some(0));
    let csv = fs::read_to_string(s.root.path().join("out/here/pl/plancherel.csv")).unwrap();
    assert!(csv.starts_with("K,M,defect\n2,4,"));
}

#[test]
fn version_and_help() {
    let s = Sandbox::new();
    let out = s.fockpath(&["version"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("fockpath "));
    assert_eq!(s.fockpath(&["frobnicate"]).status.code(), Some(1));
}

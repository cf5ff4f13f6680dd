use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("cfslab-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfslab")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.toml");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

const EIGEN: &str = "units = \"natural\"\nseed = 7\n\n[eigencheck]\npairs = 20\ndims = [8, 16]\nspins = [1, 2]\nmax_modulus = 2.0\ntolerance = 1e-9\n";

#[test]
fn eigencheck_is_byte_identical_across_runs() {
    let dir = scratch("eigen");
    let cfg = write_config(&dir, EIGEN);
    let outs: Vec<PathBuf> = ["a", "b"].iter().map(|s| dir.join(s)).collect();
    for o in &outs {
        let r = run(&["eigencheck", "--config", &cfg, "--out", o.to_str().unwrap()]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    for f in ["eigencheck.csv", "eigencheck_pairs.csv", "eigencheck.svg", "manifest.json"] {
        assert_eq!(fs::read(outs[0].join(f)).unwrap(), fs::read(outs[1].join(f)).unwrap(), "{f} differs");
    }
    let (header, rows) = read_csv(&outs[0].join("eigencheck.csv"));
    assert_eq!(header[..3], ["dim", "spin", "pairs"]);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[6] == "true"));
    let raw = fs::read_to_string(outs[0].join("eigencheck.csv")).unwrap();
    assert!(raw.contains("\r\n"));

    let m = manifest(&outs[0]);
    assert_eq!(m["seed"], 7);
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    assert!(m["versions"]["cfslab"].is_string());
    assert_eq!(m["summary"]["pass"], true);
    let text = fs::read_to_string(outs[0].join("manifest.json")).unwrap();
    assert!(!text.contains("time") && !text.contains("date"));
    // hashes in the manifest match the files
    for a in m["artifacts"].as_array().unwrap() {
        let bytes = fs::read(outs[0].join(a["file"].as_str().unwrap())).unwrap();
        assert_eq!(a["sha256"].as_str().unwrap(), cfslab_cli::config::hex_sha256(&bytes));
    }
}

#[test]
fn seed_flag_overrides_config() {
    let dir = scratch("seed");
    let cfg = write_config(&dir, EIGEN);
    let (a, b) = (dir.join("a"), dir.join("b"));
    assert!(run(&["eigencheck", "--config", &cfg, "--out", a.to_str().unwrap()]).status.success());
    assert!(run(&["eigencheck", "--config", &cfg, "--out", b.to_str().unwrap(), "--seed", "8"]).status.success());
    assert_eq!(manifest(&b)["seed"], 8);
    assert_ne!(fs::read(a.join("eigencheck_pairs.csv")).unwrap(), fs::read(b.join("eigencheck_pairs.csv")).unwrap());
}

fn expect_config_error(body: &str, needle: &str) {
    let dir = scratch(&format!("bad-{}", needle.replace(|c: char| !c.is_alphanumeric(), "")));
    let cfg = write_config(&dir, body);
    let r = run(&["eigencheck", "--config", &cfg, "--out", dir.join("o").to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    let err = String::from_utf8(r.stderr).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.contains(needle), "{err}");
}

#[test]
fn missing_key_gives_one_line_naming_it() {
    expect_config_error(&EIGEN.replace("tolerance = 1e-9\n", ""), "tolerance");
    expect_config_error(&EIGEN.replace("units = \"natural\"\n", ""), "units");
    expect_config_error(&EIGEN.replace("seed = 7\n", ""), "seed");
    expect_config_error("units = \"natural\"\nseed = 1\n", "eigencheck");
}

#[test]
fn schema_violations_are_rejected() {
    expect_config_error(&EIGEN.replace("pairs = 20", "pairs = 20\nbogus = 1"), "bogus");
    expect_config_error(&EIGEN.replace("\"natural\"", "\"si\""), "natural");
    expect_config_error(&EIGEN.replace("pairs = 20", "pairs = \"many\""), "pairs");
    expect_config_error(&EIGEN.replace("dims = [8, 16]", "dims = [2]"), "spin");
}

#[test]
fn missing_config_flag_fails() {
    let r = run(&["eigencheck"]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("--config"));
}

#[test]
fn vacuum_sweep_table_and_ratio_column() {
    let dir = scratch("sweep");
    let cfg = write_config(
        &dir,
        "units = \"natural\"\nseed = 2\n[vacuum_sweep]\nspace = \"1+1\"\nextent = 16.0\npoints = 15\nmass = 1.0\nepsilons = [0.2, 0.1]\nsamples = 12\nt_max = 4.0\nx_max = 4.0\nmargin = 0.5\n",
    );
    let out = dir.join("o");
    let r = run(&["vacuum-sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let (header, rows) = read_csv(&out.join("sweep.csv"));
    assert_eq!(header.last().unwrap(), "ratio");
    assert_eq!(rows.len(), 2);
    let ratios: Vec<f64> = rows.iter().map(|r| r[8].parse().unwrap()).collect();
    let m = manifest(&out);
    assert_eq!(m["summary"]["ratio_strictly_decreasing"], ratios[1] < ratios[0]);
    let (_, pairs) = read_csv(&out.join("pairs.csv"));
    assert_eq!(pairs.len(), 2 * 66);
    assert!(pairs.iter().all(|p| p[5].parse::<f64>().unwrap() >= 0.0));
    assert!(fs::read_to_string(out.join("ratio.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn minimize_run_records_history_and_baseline() {
    let dir = scratch("min");
    let cfg = write_config(
        &dir,
        "units = \"natural\"\nseed = 1\n[minimize]\natoms = 3\ndim = 4\nspin = 1\nmu = 0.5\nvolume_target = 1.0\ntrace_target = 1.0\nmax_iters = 50\nstep_init = 0.05\nrestarts = 20\n",
    );
    let out = dir.join("o");
    let r = run(&["minimize", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let (_, hist) = read_csv(&out.join("history.csv"));
    let obj: Vec<f64> = hist.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(obj.windows(2).all(|w| w[1] <= w[0]));
    let m = manifest(&out);
    assert!(m["summary"]["volume_residual"].as_f64().unwrap() <= 1e-6);
    assert!(m["summary"]["best_of_restarts"].is_number());
    let sys = cfslab::system::container::read_system(&fs::read_to_string(out.join("system.cfs")).unwrap()).unwrap();
    assert_eq!(sys.measure().len(), 3);
}

#[test]
fn discrete_vp_run_reduces_residual() {
    let dir = scratch("dvp");
    let cfg = write_config(
        &dir,
        "units = \"natural\"\nseed = 3\n[discrete_vp]\nblocks = 2\nblock_size = 4\nf = 2\nmax_iters = 300\nstep_init = 0.1\nrel_tol = 1e-3\n",
    );
    let out = dir.join("o");
    let r = run(&["discrete-vp", "--config", &cfg, "--out", out.to_str().unwrap(), "--verbose"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(String::from_utf8_lossy(&r.stderr).contains("residual"));
    let m = manifest(&out);
    assert!(m["summary"]["reduction"].as_f64().unwrap() > 1.0);
    assert_eq!(m["summary"]["admissible"], true);
    let text = fs::read_to_string(out.join("fermion.txt")).unwrap();
    assert!(cfslab::discrete::read_fermion(&text).is_ok());
}

#[test]
fn sea_contour_first_order_scales_quadratically() {
    let dir = scratch("contour");
    let cfg = write_config(
        &dir,
        "units = \"natural\"\nseed = 5\n[sea_contour]\nmodels = 8\ndim_max = 8\nstrengths = [0.04, 0.02, 0.01]\norders = [0, 1]\nnodes = 64\nradius = 0.5\n",
    );
    let out = dir.join("o");
    assert!(run(&["sea-contour", "--config", &cfg, "--out", out.to_str().unwrap()]).status.success());
    let (_, rows) = read_csv(&out.join("exponents.csv"));
    let e1: f64 = rows[1][1].parse().unwrap();
    assert!((1.8..=2.2).contains(&e1), "{e1}");
    let (_, table) = read_csv(&out.join("contour.csv"));
    assert_eq!(table.len(), 6);
}

#[test]
fn pexp_test_errors_fall_with_order() {
    let dir = scratch("pexp");
    let cfg = write_config(&dir, "units = \"natural\"\nseed = 11\n[pexp_test]\npaths = 4\ndim = 2\nstrength = 1.0\norders = [2, 6, 12]\n");
    let out = dir.join("o");
    assert!(run(&["pexp-test", "--config", &cfg, "--out", out.to_str().unwrap()]).status.success());
    let (_, rows) = read_csv(&out.join("pexp.csv"));
    let errs: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2] && errs[2] < 1e-8, "{errs:?}");
    // order 12 truncation at unit strength leaves about 1/13!
    assert!(manifest(&out)["summary"]["constant_family_error"].as_f64().unwrap() < 1e-9);
    let bad = write_config(&dir, "units = \"natural\"\nseed = 11\n[pexp_test]\npaths = 4\ndim = 2\nstrength = 1.0\norders = [13]\n");
    assert_eq!(run(&["pexp-test", "--config", &bad, "--out", out.to_str().unwrap()]).status.code(), Some(2));
}

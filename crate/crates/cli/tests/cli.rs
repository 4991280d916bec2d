use hidaprop::freeprop::k0;
use hidaprop::series::tail_bound;
use hidaprop::{SpaceTimePoint, TestFunction};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hidaprop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hidaprop")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Data rows of a CSV with preamble and header, split into columns.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn empty_potential_gives_the_free_kernel_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let pot = write(dir.path(), "empty.txt", "");
    let o = hidaprop(&["propagate", "--potential", &pot, "--target", "1,1", "--source", "0,0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with(&format!("# hidaprop {}\n# config ", hidaprop::VERSION)));
    let row = &rows(&out)[0];
    let free = k0(&TestFunction::zero(), SpaceTimePoint { x: 1.0, t: 1.0 }, SpaceTimePoint { x: 0.0, t: 0.0 }).unwrap();
    assert_eq!(row[2].parse::<f64>().unwrap(), free.re);
    assert_eq!(row[3].parse::<f64>().unwrap(), free.im);
    assert_eq!(row[4].parse::<f64>().unwrap(), 0.0);
    assert_eq!(row[5], "0");
}

#[test]
fn malformed_atom_line_is_reported_with_its_number() {
    let dir = tempfile::tempdir().unwrap();
    let pot = write(dir.path(), "bad.txt", "window = 0 1\n[atom]\nweight = 0.5\nx = zero\n");
    let o = hidaprop(&["propagate", "--potential", &pot, "--target", "0,1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn unreachable_tolerance_exits_with_the_best_tail() {
    let dir = tempfile::tempdir().unwrap();
    let pot = write(dir.path(), "atom.txt", "[atom]\nweight = 0.5\nx = 0\n");
    let o = hidaprop(&["propagate", "--potential", &pot, "--target", "0.3,1", "--tol", "1e-30", "--max-order", "25"]);
    assert_eq!(o.status.code(), Some(3));
    let best = tail_bound(25, 0.5, 1.0);
    assert!(stderr(&o).contains(&format!("best tail bound {best:e}")), "{}", stderr(&o));
}

#[test]
fn out_of_range_parameters_are_rejected() {
    for extra in [&["--tol", "2"][..], &["--nodes", "2"], &["--max-order", "1000"], &["--line", "0:1:1", "--at", "0.5"]] {
        let mut args = vec!["propagate", "--target", "0,1"];
        args.extend_from_slice(extra);
        assert_eq!(hidaprop(&args).status.code(), Some(2), "{extra:?}");
    }
    assert_eq!(hidaprop(&["propagate", "--target", "0,nan"]).status.code(), Some(2));
    assert_eq!(hidaprop(&["propagate"]).status.code(), Some(2));
    assert_eq!(hidaprop(&["--threads", "0", "transform", "--functional", "donsker"]).status.code(), Some(2));
}

#[test]
fn inadmissible_potential_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    // a unit atom far outside the declared Gaussian decay
    let pot = write(dir.path(), "wide.txt", "decay_radius = 0.5\n[atom]\nweight = 1\nx = 3\n");
    let o = hidaprop(&["propagate", "--potential", &pot, "--target", "0,1"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn line_targets_and_terms_file() {
    let dir = tempfile::tempdir().unwrap();
    let pot = write(dir.path(), "atom.txt", "[atom]\nweight = 0.5\nx = 0\n");
    let terms = dir.path().join("terms.csv");
    let out = dir.path().join("k.csv");
    let o = hidaprop(&[
        "propagate", "--potential", &pot, "--line", "-1:1:5", "--at", "0.8", "--source", "0.25,0", "--tol", "1e-6",
        "--terms", terms.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let k = rows(&fs::read_to_string(&out).unwrap());
    assert_eq!(k.len(), 5);
    let order: usize = k[0][5].parse().unwrap();
    let bound: f64 = k[0][4].parse().unwrap();
    assert!(bound <= 1e-6 && bound > 0.0);
    // the partial sum is the sum of the listed terms
    let t = rows(&fs::read_to_string(&terms).unwrap());
    assert_eq!(t.len(), 5 * (order + 1));
    let re: f64 = t.iter().filter(|r| r[1] == k[2][0]).map(|r| r[3].parse::<f64>().unwrap()).sum();
    assert!((re - k[2][2].parse::<f64>().unwrap()).abs() < 1e-14);
}

#[test]
fn output_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let pot = write(dir.path(), "atom.txt", "[atom]\nweight = 0.5\nx = 0\n[atom]\nweight = -0.25\nx = 0.4\n");
    let run = |threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_hidaprop"))
            .env("HIDAPROP_THREADS", threads)
            .args(["propagate", "--potential", &pot, "--line", "-1:1:7", "--at", "0.9", "--xi", "bump:0.5,0.3,1"])
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        o.stdout
    };
    let one = run("1");
    assert_eq!(one, run("3"));
    assert_eq!(one, run("1"));
}

#[test]
fn donsker_delta_at_the_origin() {
    let o = hidaprop(&["transform", "--functional", "donsker", "--xi", "zero"]);
    assert_eq!(o.status.code(), Some(0));
    let row = &rows(&stdout(&o))[0];
    let value: f64 = row[2].parse().unwrap();
    assert!((value - 0.398942).abs() < 5e-7, "{value}");
}

#[test]
fn transform_t_kind_and_growth_report() {
    let o = hidaprop(&["transform", "--functional", "normexp", "--c=-0.5,0", "--kind", "t", "--xi", "bump:0.5,0.4,1", "--z", "0,1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(rows(&stdout(&o)).len(), 1);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("growth.json");
    let o = hidaprop(&["transform", "--functional", "cubic", "--xi", "bump:0.5,0.4,1", "--growth", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let j = json(&out);
    assert_eq!(j["schema"], "hidaprop.transform.growth.v1");
    for key in ["functional", "P", "Q", "p_surrogate", "max_violation"] {
        assert!(j["body"].get(key).is_some(), "{key}");
    }
    assert_eq!(hidaprop(&["transform", "--functional", "normexp", "--c=0.5,0"]).status.code(), Some(2));
}

#[test]
fn series_evolution_needs_a_gaussian() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = hidaprop(&["evolve", "--method", "series", "--psi0", "nongaussian", "--out-dir", d]);
    assert_eq!(o.status.code(), Some(2));
    let table = write(dir.path(), "psi.csv", "x,re,im\n-0.1,0,0\n0,1,0\n0.1,0,0\n");
    let psi0 = format!("table:{table}");
    let small = ["--half-width", "0.1", "--compare-half-width", "0.1", "--dx", "0.1", "--stride", "1"];
    let mut args = vec!["evolve", "--method", "series", "--psi0", &psi0, "--out-dir", d];
    args.extend_from_slice(&small);
    let o = hidaprop(&args);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("Gaussian"), "{}", stderr(&o));
}

#[test]
fn evolve_both_emits_fields_and_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let pot = write(dir.path(), "atom.txt", "[atom]\nweight = 0.25\nx = 0\n");
    let d = dir.path().join("out");
    let o = hidaprop(&[
        "evolve", "--potential", &pot, "--psi0", "gaussian:-1,1,1", "--method", "both", "--half-width", "16",
        "--compare-half-width", "6", "--dx", "0.02", "--dt", "0.002", "--stride", "4", "--tol", "1e-8",
        "--out-dir", d.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = json(&d.join("compare.json"));
    assert_eq!(report["schema"], "hidaprop.evolve.compare.v1");
    assert_eq!(report["body"]["entries"].as_array().unwrap().len(), 3);
    assert!(report["body"]["extrapolated_l2_diff"].as_f64().unwrap() < 2e-2);
    let hash = report["config_hash"].as_str().unwrap();
    for name in ["series.csv", "cn_extrapolated.csv"] {
        let csv = fs::read_to_string(d.join(name)).unwrap();
        assert!(csv.contains(&format!("# config {hash}\n")), "{name}");
        assert_eq!(rows(&csv).len(), 151, "{name}");
    }
}

#[test]
fn evolve_cn_accepts_a_tabulated_state() {
    let dir = tempfile::tempdir().unwrap();
    let rows: String = (0..=40)
        .map(|j| {
            let x = -2.0 + 0.1 * j as f64;
            format!("{x},{},0\n", (-x * x).exp())
        })
        .collect();
    let table = write(dir.path(), "psi.csv", &rows);
    let d = dir.path().join("out");
    let o = hidaprop(&[
        "evolve", "--method", "cn", "--psi0", &format!("table:{table}"), "--half-width", "2", "--compare-half-width", "1",
        "--dx", "0.1", "--dt", "0.01", "--stride", "1", "--t", "0.1", "--out-dir", d.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(fs::read_to_string(d.join("cn.csv")).unwrap().lines().count() > 20);
    assert_eq!(json(&d.join("cn.json"))["body"]["epsilon"], 0.05);
}

#[test]
fn verify_simplex_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("simplex.json");
    let o = hidaprop(&["verify", "simplex", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let j = json(&out);
    assert_eq!(j["schema"], "hidaprop.verify.v1");
    assert_eq!(j["version"], hidaprop::VERSION);
    assert_eq!(j["body"]["passed"], true);
    assert_eq!(j["body"]["checks"].as_array().unwrap().len(), 9);
    assert_eq!(hidaprop(&["verify", "nonsense"]).status.code(), Some(2));
}

#[test]
fn config_hash_ignores_output_paths() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        assert_eq!(hidaprop(&["verify", "simplex", "--out", p.to_str().unwrap()]).status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let seeded = dir.path().join("c.json");
    hidaprop(&["verify", "simplex", "--seed", "5", "--out", seeded.to_str().unwrap()]);
    assert_ne!(json(&a)["config_hash"], json(&seeded)["config_hash"]);
}

#[test]
fn bench_reports_timings() {
    let o = hidaprop(&["bench", "propagate", "--repeat", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let j: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(j["body"]["seconds"].as_array().unwrap().len(), 2);
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bubblelab::model::{CurvatureFrame, FrameJson, HessianData};
use serde_json::{json, Value};
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bubblelab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_json(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn write_frame(dir: &Path, name: &str, fr: CurvatureFrame) {
    let j = serde_json::to_value(FrameJson::from(fr)).unwrap();
    write_json(dir, name, &j);
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

const SMALL_GRID: &str = r#"{"nr": 32, "nz": 32, "r_max": 40.0, "stretch": 3.0}"#;

fn small_grid() -> Value {
    serde_json::from_str(SMALL_GRID).unwrap()
}

#[test]
fn schema_and_missing_subcommand() {
    let t = TempDir::new().unwrap();
    let o = run(t.path(), &["--schema"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for key in ["rel_tol", "tolerances", "samples", "hessH", "d0", "psi", "x_n"] {
        assert!(text.contains(key), "schema lacks {key}");
    }
    assert_eq!(code(&run(t.path(), &[])), 2);
}

#[test]
fn dimension_gate() {
    let t = TempDir::new().unwrap();
    write_json(t.path(), "c.json", &json!({"n": 6, "points": 5, "frames": 3}));
    assert_eq!(code(&run(t.path(), &["--config", "c.json", "verify-bubble", "--out", "o"])), 2);
    assert!(!t.path().join("o/verify_report.json").exists());

    let o = run(t.path(), &["--config", "c.json", "--override-dimension-gate", "verify-bubble", "--out", "o"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep = read_json(&t.path().join("o/verify_report.json"));
    assert_eq!(rep["outside_paper_regime"], json!(true));

    write_json(t.path(), "c4.json", &json!({"n": 4}));
    assert_eq!(code(&run(t.path(), &["--config", "c4.json", "--override-dimension-gate", "verify-bubble"])), 2);
}

#[test]
fn tolerances_decide_the_exit_code() {
    let t = TempDir::new().unwrap();
    write_json(t.path(), "loose.json", &json!({"relTol": 1e-2, "points": 5, "frames": 3}));
    assert_eq!(code(&run(t.path(), &["--config", "loose.json", "verify-bubble", "--out", "a"])), 0);

    write_json(t.path(), "tight.json", &json!({"rel_tol": 1e-30, "points": 5, "frames": 3}));
    let o = run(t.path(), &["--config", "tight.json", "verify-bubble", "--out", "b"]);
    assert_eq!(code(&o), 1);
    let rep = read_json(&t.path().join("b/verify_report.json"));
    assert_eq!(rep["pass"], json!(false));

    // One bound loosened on top of a tight uniform value.
    write_json(
        t.path(),
        "mixed.json",
        &json!({"rel_tol": 1e-30, "tolerances": {"residual": 1e-6}, "points": 5, "frames": 3}),
    );
    run(t.path(), &["--config", "mixed.json", "verify-bubble", "--out", "c"]);
    let rep = read_json(&t.path().join("c/verify_report.json"));
    let checks = rep["checks"].as_array().unwrap();
    let model = checks.iter().find(|c| c["name"].as_str().unwrap().starts_with("model problem")).unwrap();
    assert_eq!(model["bound"], json!(1e-6));
    assert_eq!(model["pass"], json!(true));
}

#[test]
fn bad_configurations_exit_2() {
    let t = TempDir::new().unwrap();
    let bad = [
        json!({"unknown_key": 1}),
        json!({"tolerances": {"residual": -1.0}}),
        json!({"tolerances": {"nonsense": 1e-3}}),
        json!({"H": 1.0, "D": 2.0}),
        json!({"K": 1.0}),
        json!({"gamma": -1.0}),
        json!({"D": 0.5}),
        json!({"points": 0}),
    ];
    for (i, cfg) in bad.iter().enumerate() {
        let name = format!("bad{i}.json");
        write_json(t.path(), &name, cfg);
        assert_eq!(code(&run(t.path(), &["--config", &name, "verify-bubble", "--out", "o"])), 2, "{cfg}");
    }
    assert_eq!(code(&run(t.path(), &["--config", "missing.json", "verify-bubble"])), 2);
    fs::write(t.path().join("garbage.json"), "{ not json").unwrap();
    assert_eq!(code(&run(t.path(), &["--config", "garbage.json", "verify-bubble"])), 2);
    // An output path that is a file.
    fs::write(t.path().join("occupied"), "").unwrap();
    assert_eq!(code(&run(t.path(), &["verify-hyperbolic", "--out", "occupied"])), 2);
}

#[test]
fn reports_are_byte_identical() {
    let t = TempDir::new().unwrap();
    write_json(t.path(), "c.json", &json!({"seed": 7, "points": 5, "frames": 3}));
    for sub in ["verify-integrals", "verify-bubble", "verify-hyperbolic"] {
        run(t.path(), &["--config", "c.json", sub, "--out", "one"]);
        run(t.path(), &["--config", "c.json", sub, "--out", "two"]);
        let a = fs::read(t.path().join("one/verify_report.json")).unwrap();
        let b = fs::read(t.path().join("two/verify_report.json")).unwrap();
        assert_eq!(a, b, "{sub}");
    }
}

#[test]
fn corrector_zero_frame() {
    let t = TempDir::new().unwrap();
    write_frame(t.path(), "zero.json", CurvatureFrame::zero(8));
    write_json(t.path(), "c.json", &json!({"frame": "zero.json", "grid": small_grid()}));
    let o = run(t.path(), &["--config", "c.json", "corrector", "--out", "o"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let header = read_json(&t.path().join("o/corrector.json"));
    assert_eq!(header["modes"], json!([]));
    assert!(t.path().join("o/diagnostics.json").exists());
}

#[test]
fn corrector_gauge_frame_writes_profiles() {
    let t = TempDir::new().unwrap();
    write_frame(t.path(), "f.json", CurvatureFrame::random_gauge(8, 3, 1.0));
    write_json(t.path(), "c.json", &json!({"frame": "f.json", "grid": small_grid()}));
    let o = run(t.path(), &["--config", "c.json", "corrector", "--out", "o"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let profiles: Vec<_> = fs::read_dir(t.path().join("o"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("profile_"))
        .collect();
    assert!(!profiles.is_empty());
    let first = fs::read_to_string(t.path().join("o").join(&profiles[0])).unwrap();
    assert_eq!(first.lines().next().unwrap(), "r,x_n,psi,e");
}

#[test]
fn invalid_frames_exit_2() {
    let t = TempDir::new().unwrap();
    // Nonzero trace of the normal block.
    let mut fr = CurvatureFrame::zero(8);
    fr.normal[0] = 1.0;
    write_frame(t.path(), "traced.json", fr);
    write_json(t.path(), "c.json", &json!({"frame": "traced.json", "grid": small_grid()}));
    assert_eq!(code(&run(t.path(), &["--config", "c.json", "corrector", "--out", "o"])), 2);
    // A frame for the wrong dimension.
    write_frame(t.path(), "nine.json", CurvatureFrame::zero(9));
    write_json(t.path(), "c9.json", &json!({"frame": "nine.json"}));
    assert_eq!(code(&run(t.path(), &["--config", "c9.json", "corrector", "--out", "o"])), 2);
    // No frame at all.
    assert_eq!(code(&run(t.path(), &["corrector", "--out", "o"])), 2);
    // Odd grid.
    write_frame(t.path(), "zero.json", CurvatureFrame::zero(8));
    write_json(t.path(), "odd.json", &json!({"frame": "zero.json", "grid": {"nr": 31, "nz": 32, "r_max": 40.0, "stretch": 3.0}}));
    assert_eq!(code(&run(t.path(), &["--config", "odd.json", "corrector", "--out", "o"])), 2);
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn locate_constants() {
    let t = TempDir::new().unwrap();
    write_frame(t.path(), "f.json", CurvatureFrame::random_gauge(8, 11, 1.0));
    let cfg = json!({
        "frame": "f.json",
        "grid": small_grid(),
        "samples": [
            {"id": "p", "coords": [0.0, 0.0], "D": 1.5, "gamma": 1.0},
            {"id": "q", "coords": [1.0, 0.0], "D": 2.0, "gamma": 2.0},
            {"id": "s", "coords": [0.0, 1.0], "D": 3.0},
            {"id": "low", "coords": [1.0, 1.0], "D": 0.9}
        ]
    });
    write_json(t.path(), "c.json", &cfg);
    let o = run(t.path(), &["--config", "c.json", "locate", "--out", "o"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("low"));
    let rep = read_json(&t.path().join("o/blowup.json"));
    assert_eq!(rep["flags"]["d_above_one"], json!(false));
    assert_eq!(rep["excluded"].as_array().unwrap().len(), 1);
    let j = &rep["j_values"];
    let (a, b, g) = (j["A"].as_f64().unwrap(), j["B"].as_f64().unwrap(), j["gamma"].as_f64().unwrap());
    let d = rep["d_star"].as_f64().unwrap();
    assert!(rel(d, (a * g / (4.0 * b)).cbrt()) < 1e-12);
    assert_eq!(rep["rate"].as_f64().unwrap(), 1.0 / 3.0);

    let csv = fs::read_to_string(t.path().join("o/samples.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "sample,E,A,B,gamma,d0,G");
    assert_eq!(lines.count(), 3);
}

fn scaled_identity(m: usize, s: f64) -> Vec<f64> {
    (0..m * m).map(|i| if i / m == i % m { s } else { 0.0 }).collect()
}

#[test]
fn locate_nonconstant_planted() {
    let t = TempDir::new().unwrap();
    let eye = HessianData::identity(8);
    // Mean curvature is least at "mid", so the energy peaks there.
    let samples: Vec<Value> = [("left", 2.5), ("mid", 1.6), ("right", 2.2)]
        .iter()
        .enumerate()
        .map(|(i, (id, d))| {
            json!({"id": id, "coords": [i as f64], "D": d, "hessH": eye.hess_h, "hessK": eye.hess_k})
        })
        .collect();
    write_json(t.path(), "c.json", &json!({"case": "non-constants", "samples": samples}));
    let o = run(t.path(), &["--config", "c.json", "locate", "--out", "o"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep = read_json(&t.path().join("o/blowup.json"));
    assert_eq!(rep["p_star"], json!("mid"));
    assert_eq!(rep["rate"].as_f64().unwrap(), 1.0);
    let j = &rep["j_values"];
    let d = rep["d_star"].as_f64().unwrap();
    assert!(rel(d, j["A"].as_f64().unwrap() / (2.0 * j["B"].as_f64().unwrap())) < 1e-12);
    assert_eq!(rep["flags"]["hessians_pd"], json!(true));
}

#[test]
fn locate_hypothesis_failures() {
    let t = TempDir::new().unwrap();
    let neg = HessianData {
        hess_h: scaled_identity(7, -1.0),
        hess_k: scaled_identity(8, -1.0),
    };
    let cfg = json!({"case": "non-constants", "samples": [
        {"id": "only", "D": 2.0, "hessH": neg.hess_h, "hessK": neg.hess_k}
    ]});
    write_json(t.path(), "neg.json", &cfg);
    let o = run(t.path(), &["--config", "neg.json", "locate", "--out", "o"]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("B > 0") || err.contains("definite"), "{err}");

    // Missing Hessians are a configuration error.
    write_json(t.path(), "nohess.json", &json!({"case": "non-constants", "samples": [{"id": "a", "D": 2.0}]}));
    assert_eq!(code(&run(t.path(), &["--config", "nohess.json", "locate", "--out", "o"])), 2);

    // The zero frame has B = 0 everywhere.
    write_frame(t.path(), "zero.json", CurvatureFrame::zero(8));
    let cfg = json!({"frame": "zero.json", "grid": small_grid(), "samples": [{"id": "a", "D": 2.0}]});
    write_json(t.path(), "zero_cfg.json", &cfg);
    let o = run(t.path(), &["--config", "zero_cfg.json", "locate", "--out", "o"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("B > 0"));

    // No samples.
    assert_eq!(code(&run(t.path(), &["locate", "--out", "o"])), 2);
}

use std::f64::consts::PI;
use std::fs::File;
use std::path::Path;
use std::process::{Command, Output};

use phase_ovm::export::{read_field_raster, read_operator_binary, write_indicator};
use phase_ovm::special::laguerre;
use phase_ovm::PhaseGrid;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_phase-ovm"));
    cmd.args(args).env_remove("PHASE_OVM_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    assert_eq!(code(o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

fn has_provenance(v: &Value) {
    let p = &v["provenance"];
    assert_eq!(p["tool"], "phase-ovm");
    assert_eq!(p["conventions"]["quadrature_scale"], 0.5);
    assert!(p["dim"].is_u64());
}

#[test]
fn circle_diagonal_follows_laguerre() {
    let v = json(&run(&["build", "--region", "circle:a=1", "--dim", "48"]));
    has_provenance(&v);
    assert_eq!(v["provenance"]["path"], "analytic");
    let diag = v["diagonal"].as_array().unwrap();
    assert_eq!(diag.len(), 48);
    for (n, d) in diag.iter().enumerate() {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let expected = 2.0 * PI * sign * (-0.5f64).exp() * laguerre::<f64>(n, 1.0);
        assert!((d[0].as_f64().unwrap() - expected).abs() < 1e-10, "n={n}");
        assert_eq!(d[1].as_f64().unwrap(), 0.0);
    }
    assert_eq!(v["hermitian"], true);
    assert_eq!(v["eigenvalues"].as_array().unwrap().len(), 48);
}

#[test]
fn symmetry_flags_of_line_regions() {
    let v = json(&run(&["build", "--region", "interval:-1,1", "--dim", "48"]));
    assert_eq!(v["hermitian"], true);
    assert!(v["parity_commutator"].as_f64().unwrap() < 1e-10);

    // χ̃ is complex for the comb, which shows in the parity commutator; the
    // operator itself stays Hermitian.
    let v = json(&run(&["build", "--region", "integers:n=3", "--dim", "48"]));
    assert_eq!(v["hermitian"], true);
    assert!(v["parity_commutator"].as_f64().unwrap() > 1e-2);
}

#[test]
fn build_paths_and_transforms() {
    let v = json(&run(&["build", "--region", "interval:-1,1", "--dim", "32", "--path", "smeared", "--quadrature", "32"]));
    assert_eq!(v["provenance"]["path"], "smeared");
    assert_eq!(v["provenance"]["extra"]["quadrature_points"], 32);

    let v = json(&run(&["build", "--region", "interval:-1,1", "--dim", "32", "--theta", "-0.5", "--r", "0.1"]));
    let kinds: Vec<&str> = v["provenance"]["extra"]["transforms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["kind"].as_str().unwrap())
        .collect();
    assert_eq!(kinds, ["rotation", "squeeze"]);

    let v = json(&run(&["build", "--region", "rect:-1,1,-1,1", "--dim", "8", "--grid", "-4,4,-4,4,64,64"]));
    assert_eq!(v["provenance"]["path"], "oracle");
    assert_eq!(v["provenance"]["grid"]["nq"], 64);
    assert_eq!(v["hermitian"], true);
}

#[test]
fn operator_files() {
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("k.bin");
    let o = run(&["build", "--region", "segment:a=2", "--dim", "16", "--format", "bin", "-o", bin.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let (op, prov) = read_operator_binary(File::open(&bin).unwrap()).unwrap();
    assert_eq!(op.dim(), 16);
    assert_eq!(prov["tool"], "phase-ovm");

    let o = run(&["build", "--region", "disc:a=1", "--dim", "16", "--format", "csv"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# {"));
    assert_eq!(lines.next().unwrap(), "row,col,re,im");
    // Phase-averaged, so only the diagonal is stored.
    assert_eq!(lines.count(), 16);

    assert_eq!(code(&run(&["build", "--region", "circle:a=1", "--format", "bin"])), 2);
}

#[test]
fn regions_from_json_and_files() {
    let v = json(&run(&["build", "--region", r#"{"type":"interval","lo":-0.5,"hi":0.5}"#, "--dim", "16"]));
    assert_eq!(v["region"]["type"], "interval");

    let dir = tempfile::tempdir().unwrap();
    let grid = PhaseGrid::square(2.0, 40).unwrap();
    let mask: Vec<bool> = (0..grid.len())
        .map(|k| {
            let (i, j) = (k % grid.nq, k / grid.nq);
            grid.q(i).abs() < 0.5 && grid.p(j).abs() < 0.5
        })
        .collect();
    let path = dir.path().join("box.ind");
    write_indicator(&grid, &mask, File::create(&path).unwrap()).unwrap();
    let arg = format!("@{}", path.display());
    let grid_arg = "-2,2,-2,2,40,40";
    let ind = json(&run(&["mass", "--region", &arg, "--dim", "12", "--grid", grid_arg]));
    let rect = json(&run(&["mass", "--region", "rect:-0.5,0.5,-0.5,0.5", "--dim", "12", "--grid", grid_arg]));
    assert!((ind["field_mass"].as_f64().unwrap() - rect["field_mass"].as_f64().unwrap()).abs() < 1e-12);

    let json_path = dir.path().join("disk.json");
    std::fs::write(&json_path, r#"{"type":"disk","radius":1.0}"#).unwrap();
    let v = json(&run(&["mass", "--region", &format!("@{}", json_path.display()), "--dim", "12"]));
    assert!(v["field_mass"].as_f64().unwrap() > 0.0);
}

#[test]
fn vacuum_masses() {
    let v = json(&run(&["mass", "--region", "disk:r=5.6568", "--dim", "32"]));
    has_provenance(&v);
    for key in ["field_mass", "operator_trace"] {
        assert!((v[key].as_f64().unwrap() - PI / 2.0).abs() < 2e-2, "{key}");
    }
    assert_eq!(v["convention"], "bare");

    let v = json(&run(&["mass", "--region", "empty"]));
    assert_eq!(v["field_mass"].as_f64().unwrap(), 0.0);
    assert_eq!(v["operator_trace"].as_f64().unwrap(), 0.0);
}

#[test]
fn first_excited_state_has_negative_mass_near_the_origin() {
    let v = json(&run(&["mass", "--region", "disk:r=0.3", "--state", "fock:1", "--dim", "16", "--grid", "-4,4,-4,4,160,160"]));
    assert!(v["field_mass"].as_f64().unwrap() < 0.0);
    assert!(v["deviation"].as_f64().unwrap() < 1e-10);
}

#[test]
fn husimi_mass_has_no_operator_route() {
    let v = json(&run(&["mass", "--region", "disk:r=1", "--s", "-1", "--dim", "16"]));
    assert!(v["operator_trace"].is_null());
    assert_eq!(v["ordering"], "husimi_q");
    assert!(v["field_mass"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_targets() {
    let v = json(&run(&["verify", "--target", "dilation", "--dim", "6"]));
    assert_eq!(v["pass"], true);
    assert!(v["tolerance"].as_f64().unwrap() <= 1e-12);
    has_provenance(&v);

    let v = json(&run(&["verify", "--target", "circle", "--a", "1", "--dim", "48"]));
    assert_eq!(v["pass"], true);
    assert_eq!(v["tolerance"].as_f64().unwrap(), 1e-8);

    let v = json(&run(&["verify", "--target", "kraus", "--a0", "1", "--a", "1", "--L", "3.14159", "--dim", "64"]));
    assert_eq!(v["params"]["report"]["candidates"].as_array().unwrap().len(), 3);

    let o = run(&["verify", "--target", "circle", "--tolerance", "1e-30"]);
    assert_eq!(code(&o), 3);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pass"], false);

    assert_eq!(code(&run(&["verify", "--target", "hexagon"])), 2);
    assert_eq!(code(&run(&["verify", "--target", "dilation", "--dim", "2"])), 2);
}

#[test]
fn field_rasters() {
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("q.bin");
    let o = run(&[
        "field", "--state", "vacuum", "--s", "-1", "--grid", "-3,3,-3,3,41,41", "--dim", "16", "--format", "bin", "-o",
        bin.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_field_raster(File::open(&bin).unwrap()).unwrap();
    assert_eq!(r.values.len(), 41 * 41);
    assert!(r.values.iter().all(|&v| v >= 0.0));
    assert_eq!(r.s, -1.0);
    assert_eq!(r.provenance["tool"], "phase-ovm");

    let o = run(&["field", "--state", "fock:1", "--grid", "-3,3,-3,3,41,41", "--dim", "16"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let origin = text
        .lines()
        .skip(2)
        .map(|l| l.split(',').map(|x| x.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .find(|row| row[0].abs() < 1e-12 && row[1].abs() < 1e-12)
        .expect("origin cell");
    assert!((origin[2] + 1.0).abs() < 1e-12);

    let v = json(&run(&["field", "--state", "coherent:0.7,0", "--grid", "-3,3,-3,3,61,61", "--dim", "24", "--format", "json"]));
    has_provenance(&v);
    let vals: Vec<f64> = v["field"]["values"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let best = (0..vals.len()).max_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    let grid = PhaseGrid::square(3.0, 61).unwrap();
    let alpha = grid.alpha(best % 61, best / 61);
    assert!((alpha.re - 0.7).abs() <= grid.dq() && alpha.im.abs() <= grid.dp());
}

#[test]
fn exit_codes() {
    assert_eq!(code(&run(&["build", "--region", "circle:a=1", "--dim", "4"])), 2);
    assert_eq!(code(&run(&["build", "--region", "interval:1,-1"])), 2);
    assert_eq!(code(&run(&["build", "--region", "hexagon:a=1"])), 2);
    assert_eq!(code(&run(&["mass", "--region", "circle:a=1"])), 2);
    assert_eq!(code(&run(&["build", "--region", "interval:-1,1", "--r", "2"])), 3);
    assert_eq!(code(&run(&["field", "--s", "1"])), 2);
    assert_eq!(code(&run(&["bogus"])), 2);
}

#[test]
fn thread_cap() {
    let o = run_env(&["mass", "--region", "disk:r=1", "--dim", "8"], &[("PHASE_OVM_THREADS", "1")]);
    assert_eq!(code(&o), 0);
    let o = run_env(&["mass", "--region", "disk:r=1", "--dim", "8"], &[("PHASE_OVM_THREADS", "zero")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn outputs_land_in_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("field.csv");
    let o = run(&["field", "--grid", "-2,2,-2,2,40,40", "--dim", "8", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    assert!(Path::new(&out).exists());
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("# {"));
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_toricsim"));
    c.env_remove("TORICSIM_THREADS");
    c
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_vec_pretty(v).unwrap()).unwrap();
    p
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    let s: Value = serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap();
    jsonschema::validator_for(&s).unwrap()
}

fn assert_valid(name: &str, doc: &Value) {
    let v = schema(name);
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

/// Runs a command writing to `out` and returns the parsed JSON.
fn json_run(dir: &Path, cfg: &Value, cmd: &str) -> Value {
    let c = write_config(dir, &format!("{cmd}.cfg.json"), cfg);
    let out = dir.join(format!("{cmd}.json"));
    let o = run_in(dir, &[cmd, "--config", c.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&std::fs::read(out).unwrap()).unwrap()
}

fn csv_rows(bytes: &[u8]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn eigenvalues(doc: &Value) -> Vec<f64> {
    doc["spectrum"]["eigenvalues"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect()
}

#[test]
fn spectrum_of_three_by_three_leads_with_two_ground_states() {
    let d = TempDir::new().unwrap();
    let doc = json_run(d.path(), &json!({"solver": {"levels": 4}}), "spectrum");
    assert_valid("spectrum", &doc);
    let e = eigenvalues(&doc);
    assert!((e[0] + 9.0).abs() < 1e-9 && (e[1] + 9.0).abs() < 1e-9, "{e:?}");
    assert!(e[2] > -9.0 + 1.0);
    assert_eq!(doc["parity_class"], "o*o");
    assert_eq!(doc["metadata"]["config"]["lattice"]["lx"], 3);
}

#[test]
fn spectrum_of_four_by_four_leads_with_four_ground_states() {
    let d = TempDir::new().unwrap();
    let doc = json_run(d.path(), &json!({"lattice": {"lx": 4, "ly": 4}, "solver": {"levels": 5}}), "spectrum");
    let e = eigenvalues(&doc);
    for v in &e[..4] {
        assert!((v + 16.0).abs() < 1e-9, "{e:?}");
    }
    assert!(e[4] > -16.0 + 1.0);
}

#[test]
fn spectrum_csv_and_eigenvector_sidecar() {
    let d = TempDir::new().unwrap();
    let c = write_config(d.path(), "c.json", &json!({"lattice": {"lx": 2, "ly": 3}, "solver": {"levels": 3, "eigenvectors": true}}));
    let out = d.path().join("s.csv");
    let o = run_in(d.path(), &["spectrum", "--config", c.to_str().unwrap(), "--format", "csv", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = csv_rows(&std::fs::read(&out).unwrap());
    assert_eq!(h, ["index", "eigenvalue", "residual", "cluster"]);
    assert_eq!(rows.len(), 3);
    let meta: Value = serde_json::from_slice(&std::fs::read(d.path().join("s.csv.meta.json")).unwrap()).unwrap();
    assert_valid("spectrum", &meta);
    let f = std::fs::File::open(d.path().join("s.csv.eigvecs.bin")).unwrap();
    let vecs = toricsim::formats::read_eigenvectors(std::io::BufReader::new(f)).unwrap();
    assert_eq!(vecs.len(), 3);
    assert_eq!(vecs[0].len(), 64);
    let norm: f64 = vecs[0].iter().map(|a| a.norm_sqr()).sum();
    assert!((norm - 1.0).abs() < 1e-10);
}

#[test]
fn malformed_lattice_exits_one_without_output() {
    let d = TempDir::new().unwrap();
    let c = write_config(d.path(), "c.json", &json!({"lattice": {"lx": 1, "ly": 3}}));
    let out = d.path().join("s.json");
    let o = run_in(d.path(), &["spectrum", "--config", c.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
}

#[test]
fn usage_errors_exit_one() {
    let d = TempDir::new().unwrap();
    assert_eq!(run_in(d.path(), &["nope"]).status.code(), Some(1));
    assert_eq!(run_in(d.path(), &["spectrum", "--config", "missing.json"]).status.code(), Some(1));
    let c = write_config(d.path(), "c.json", &json!({"lattice": {"lx": 3, "ly": 3, "lz": 2}}));
    assert_eq!(run_in(d.path(), &["spectrum", "--config", c.to_str().unwrap()]).status.code(), Some(1));
    let c = write_config(d.path(), "big.json", &json!({"lattice": {"lx": 5, "ly": 5}}));
    assert_eq!(run_in(d.path(), &["spectrum", "--config", c.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run_in(d.path(), &["--version"]).status.code(), Some(0));
    let bad_env = bin().current_dir(d.path()).env("TORICSIM_THREADS", "many").args(["gate"]).output().unwrap();
    assert_eq!(bad_env.status.code(), Some(1));
    let flag_wins = bin().current_dir(d.path()).env("TORICSIM_THREADS", "many").args(["gate", "--threads", "1"]).output().unwrap();
    assert_eq!(flag_wins.status.code(), Some(0));
}

#[test]
fn empty_sweep_grid_exits_one() {
    let d = TempDir::new().unwrap();
    let c = write_config(d.path(), "c.json", &json!({"sweep": {"grid": []}}));
    assert_eq!(run_in(d.path(), &["sweep", "--config", c.to_str().unwrap()]).status.code(), Some(1));
}

fn delta_column(bytes: &[u8]) -> Vec<f64> {
    let (h, rows) = csv_rows(bytes);
    assert_eq!(h, ["L_x", "L_y", "h_x", "h_z", "deltaE", "gap", "status"]);
    rows.iter().map(|r| r[4].parse().unwrap()).collect()
}

#[test]
fn transposed_lattices_sweep_alike() {
    let d = TempDir::new().unwrap();
    let mut cols = Vec::new();
    for l in [[3, 4], [4, 3]] {
        let c = write_config(d.path(), "c.json", &json!({"sweep": {"lattices": [l]}}));
        let out = d.path().join(format!("{}x{}.csv", l[0], l[1]));
        let o = run_in(d.path(), &["sweep", "--config", c.to_str().unwrap(), "--format", "csv", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let fit: Value = serde_json::from_slice(&std::fs::read(d.path().join(format!("{}x{}.csv.fit.json", l[0], l[1]))).unwrap()).unwrap();
        assert_valid("sweep-fit", &fit);
        cols.push(delta_column(&std::fs::read(out).unwrap()));
    }
    assert_eq!(cols[0].len(), 5);
    for (a, b) in cols[0].iter().zip(&cols[1]) {
        assert!((a - b).abs() <= 1e-10 + 1e-6 * a.abs(), "{a} vs {b}");
    }
}

#[test]
fn sweep_json_fits_three_by_three() {
    let d = TempDir::new().unwrap();
    let doc = json_run(d.path(), &json!({"sweep": {"lattices": [[3, 3]]}, "threads": 2}), "sweep");
    assert_valid("sweep", &doc);
    let fit = &doc["fits"][0];
    assert_eq!(fit["expected_exponent"], 3);
    let p = fit["fit"]["exponent"].as_f64().unwrap();
    assert!((p - 3.0).abs() <= 0.5, "{p}");
    let rows = doc["rows"].as_array().unwrap();
    let grid: Vec<f64> = rows.iter().map(|r| r["h_x"].as_f64().unwrap()).collect();
    assert_eq!(grid, [0.1, 0.15, 0.2, 0.25, 0.3]);
}

#[test]
fn extract_then_gate_from_effective_file() {
    let d = TempDir::new().unwrap();
    let eff = json_run(d.path(), &json!({"model": {"h_x": 0.2, "h_z": 0.2}}), "extract");
    assert_valid("extract", &eff);
    assert_eq!(eff["code_dimension"], 2);
    let j = eff["effective"]["j_xx"].as_f64().unwrap();
    assert!(j.abs() > 1e-4);
    let path = d.path().join("extract.json");
    let g = json_run(d.path(), &json!({"gate": {"effective": path}}), "gate");
    assert_valid("gate", &g);
    assert_eq!(g["couplings"]["j"].as_f64().unwrap(), j);
    assert!(g["fidelity"].as_f64().unwrap() >= 1.0 - 1e-9);
}

#[test]
fn gate_commands() {
    let d = TempDir::new().unwrap();
    let h = json_run(d.path(), &json!({}), "gate");
    assert!(h["fidelity"].as_f64().unwrap() >= 1.0 - 1e-9);
    assert!(h["quoted_hadamard"]["fidelity"].as_f64().unwrap() >= 0.0);
    let id = json_run(d.path(), &json!({"gate": {"target": "identity"}}), "gate");
    assert_eq!(id["total_duration"].as_f64().unwrap(), 0.0);
    assert_valid("gate", &id);
    let c = write_config(d.path(), "c.json", &json!({"gate": {"target": {"custom": [[[1.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]}}}));
    let out = d.path().join("g.json");
    let o = run_in(d.path(), &["gate", "--config", c.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn init_ladder_is_monotone() {
    let d = TempDir::new().unwrap();
    let doc = json_run(d.path(), &json!({"init": {"t0_gap_units": [0.5, 5.0, 50.0]}}), "init");
    assert_valid("init", &doc);
    assert_eq!(doc["monotone"], true);
    let last = doc["rows"][2]["overlap_up"].as_f64().unwrap();
    assert!(last >= 0.99, "{last}");
}

#[test]
fn measure_is_reproducible() {
    let d = TempDir::new().unwrap();
    let c = write_config(d.path(), "c.json", &json!({"seed": 7}));
    let mut outputs = Vec::new();
    for name in ["a.json", "b.json"] {
        let out = d.path().join(name);
        let o = run_in(d.path(), &["measure", "--config", c.to_str().unwrap(), "--threads", "1", "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        outputs.push(std::fs::read(out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let doc: Value = serde_json::from_slice(&outputs[0]).unwrap();
    assert_valid("measure", &doc);
    let r = &doc["reconstruction"];
    let a = r["alpha_hat"].as_f64().unwrap();
    let rad = r["confidence_radius"].as_f64().unwrap();
    assert!((a - 0.6).abs() <= 3.0 * rad, "{a} {rad}");
    assert_eq!(doc["seeds"]["vortex"], 8);
}

#[test]
fn measure_shot_table() {
    let d = TempDir::new().unwrap();
    let c = write_config(d.path(), "c.json", &json!({"measure": {"shots": 50}}));
    let out = d.path().join("m.csv");
    let o = run_in(d.path(), &["measure", "--config", c.to_str().unwrap(), "--format", "csv", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let (h, rows) = csv_rows(&std::fs::read(out).unwrap());
    assert_eq!(h, ["shot", "particle", "T_value"]);
    assert_eq!(rows.len(), 100);
    assert_eq!(rows[0][1], "fermion");
    assert_eq!(rows[99][1], "vortex");
    for r in &rows {
        let t: f64 = r[2].parse().unwrap();
        assert!(t == 0.0 || t == 4.0, "{t}");
    }
}

#[test]
fn measure_basis_state_leaves_phase_undetermined() {
    let d = TempDir::new().unwrap();
    let doc = json_run(d.path(), &json!({"measure": {"alpha": 1.0, "beta": 0.0, "phi": 0.0, "shots": 1000}}), "measure");
    assert!(doc["reconstruction"]["phi_hat"].is_null());
    let c = write_config(d.path(), "c.json", &json!({"measure": {"alpha": 1.0, "beta": 1.0}}));
    assert_eq!(run_in(d.path(), &["measure", "--config", c.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn kitaev_check_rejects_vanishing_strong_coupling() {
    let d = TempDir::new().unwrap();
    let c = write_config(d.path(), "c.json", &json!({"kitaev": {"j_x": [0.0, 10.0]}}));
    let out = d.path().join("k.json");
    let o = run_in(d.path(), &["kitaev-check", "--config", c.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn kitaev_check_small_strip() {
    let d = TempDir::new().unwrap();
    let doc = json_run(d.path(), &json!({"kitaev": {"rows": 2, "cols": 4, "j_x": [10.0], "levels": 16}}), "kitaev-check");
    assert_valid("kitaev-check", &doc);
    let p = &doc["points"][0];
    assert_eq!(p["g_eff"].as_f64().unwrap(), 1.0 / 16000.0);
    assert!(p["ratio"].as_f64().unwrap() > 0.0);
}

#[test]
fn hamiltonian_file_drives_spectrum() {
    use toricsim::formats::HamiltonianDoc;
    use toricsim_core::model::{build_sublattice_perturbation, build_wen};
    use toricsim_core::LatticeSpec;
    let d = TempDir::new().unwrap();
    let l = LatticeSpec::new(2, 4).unwrap();
    let h = build_wen(&l, 1.0).unwrap().plus(&build_sublattice_perturbation(&l, 0.3, 0.1).unwrap()).unwrap();
    let doc = serde_json::to_value(HamiltonianDoc::from_spec(&h)).unwrap();
    assert_valid("hamiltonian", &doc);
    let p = write_config(d.path(), "h.json", &doc);
    let from_file = json_run(d.path(), &json!({"model": {"hamiltonian": p}, "solver": {"levels": 3}}), "spectrum");
    let direct = json_run(
        d.path(),
        &json!({"lattice": {"lx": 2, "ly": 4}, "model": {"perturbation": "sublattice", "h_sub": 0.3, "h_z": 0.1}, "solver": {"levels": 3}}),
        "spectrum",
    );
    assert_eq!(eigenvalues(&from_file), eigenvalues(&direct));
}

#[test]
fn config_schema_accepts_resolved_configs() {
    let d = TempDir::new().unwrap();
    let doc = json_run(d.path(), &json!({"gate": {"target": {"phase": 0.5}}}), "gate");
    assert_valid("config", &doc["metadata"]["config"]);
    assert_valid("config", &json!({"lattice": {"lx": 4}}));
    assert!(!schema("config").is_valid(&json!({"lattice": {"lz": 4}})));
}

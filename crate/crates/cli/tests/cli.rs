//! End-to-end checks of the command-line interface: trace round-trips,
//! determinism, exit codes, and the graph dump schema.

use planar_mqc_cli::commands::{self, exit_code};
use planar_mqc_cli::formats::TraceJson;
use planar_mqc_core::gf2;
use planar_mqc_core::lattice::Lattice;
use std::path::{Path, PathBuf};
use std::process::Command;

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_planar-mqc")
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

#[test]
fn simulate_writes_a_valid_cycle_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.json");
    let output = Command::new(binary())
        .args(["simulate", "--config"])
        .arg(config("raster_z_L2.json"))
        .arg("--output")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");

    let text = std::fs::read_to_string(&out).unwrap();
    let trace: TraceJson = serde_json::from_str(&text).unwrap();
    trace.validate().unwrap();
    assert_eq!(trace.steps.len(), 12);
    assert_eq!(trace.rng, "chacha8");

    // Z-raster outcomes always form a 1-cycle.
    let lat = Lattice::new(2).unwrap();
    let mut chain = gf2::BitVec::zeros(lat.n_edges());
    for step in &trace.steps {
        if step.outcome == 1 {
            chain.set(lat.edge_index(step.edge.to_edge().unwrap()).unwrap(), true);
        }
    }
    let edges: Vec<(usize, usize)> = (0..lat.n_edges()).map(|e| lat.endpoints(e)).collect();
    assert!(gf2::boundary(lat.n_vertices(), &edges, &chain).is_zero());
}

#[test]
fn identical_config_and_seed_give_byte_identical_traces() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        let status = Command::new(binary())
            .args(["simulate", "--config"])
            .arg(config("raster_z_L2.json"))
            .arg("--output")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn disconnected_strategy_exits_with_connectivity_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.json");
    let output = Command::new(binary())
        .args(["simulate", "--config"])
        .arg(config("disconnected_L2.json"))
        .arg("--output")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(exit_code::CONNECTIVITY));
    assert!(!out.exists(), "no partial trace may be written");
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("step 2"), "offending step named: {stderr}");
}

#[test]
fn malformed_config_exits_with_schema_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"schema": 2, "lattice_size": 2}"#).unwrap();
    let output = Command::new(binary())
        .args(["simulate", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(exit_code::SCHEMA));
}

#[test]
fn adaptive_config_with_oracle_check_passes() {
    let output = Command::new(binary())
        .args(["simulate", "--config"])
        .arg(config("adaptive_L1.json"))
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let trace: TraceJson = serde_json::from_str(&String::from_utf8(output.stdout).unwrap()).unwrap();
    trace.validate().unwrap();
}

#[test]
fn oracle_check_command_passes_at_l1() {
    let output = Command::new(binary())
        .args(["oracle-check", "--lattice-size", "1", "--trials", "25", "--seed", "9"])
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let report = String::from_utf8(output.stdout).unwrap();
    assert!(report.contains("overlap") && report.contains("ok"));
}

#[test]
fn oracle_check_rejects_large_lattices() {
    let output = Command::new(binary())
        .args(["oracle-check", "--lattice-size", "4", "--trials", "1"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(exit_code::RESOURCE_GUARD));
}

#[test]
fn overlap_and_prob_agree_with_library_calls() {
    use planar_mqc_core::codestate::{overlap_abs, partial_overlap, MeasurementBasis, ProductState};
    let lat = Lattice::new(2).unwrap();
    // E = the middle horizontal row plus its left neighbors: connected, with
    // connected complement.
    let entries: Vec<(char, usize, usize, u8)> =
        vec![('h', 1, 0, 0), ('h', 1, 1, 1), ('v', 0, 0, 0)];
    let mut state_entries = Vec::new();
    let mut set = lat.empty_edge_set();
    let mut phi = ProductState::new(&lat);
    for (i, &(kind, row, col, outcome)) in entries.iter().enumerate() {
        let basis = MeasurementBasis::new(0.4 + i as f64, 0.9 * i as f64);
        let q = basis.state(outcome);
        let edge = planar_mqc_core::EdgeId {
            kind: if kind == 'h' {
                planar_mqc_core::EdgeKind::Horizontal
            } else {
                planar_mqc_core::EdgeKind::Vertical
            },
            row,
            col,
        };
        let idx = lat.edge_index(edge).unwrap();
        set.set(idx, true);
        phi.set(idx, q);
        state_entries.push(serde_json::json!({
            "edge": {"kind": kind.to_string(), "row": row, "col": col},
            "alpha": [q.alpha.re, q.alpha.im],
            "beta": [q.beta.re, q.beta.im],
        }));
    }
    let file = serde_json::json!({
        "schema": 1,
        "lattice_size": 2,
        "state": state_entries,
    });
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.json");
    std::fs::write(&path, serde_json::to_string_pretty(&file).unwrap()).unwrap();

    let overlap_out = Command::new(binary())
        .args(["overlap", "--input"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(overlap_out.status.success(), "{overlap_out:?}");
    let parsed: serde_json::Value =
        serde_json::from_str(&String::from_utf8(overlap_out.stdout).unwrap()).unwrap();
    let expect = overlap_abs(&lat, &set, &phi).unwrap();
    assert!((parsed["log_magnitude"].as_f64().unwrap() - expect.ln()).abs() < 1e-12);

    let prob_out = Command::new(binary())
        .args(["prob", "--input"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(prob_out.status.success(), "{prob_out:?}");
    let parsed: serde_json::Value =
        serde_json::from_str(&String::from_utf8(prob_out.stdout).unwrap()).unwrap();
    let expect = partial_overlap(&lat, &set, &phi).unwrap();
    assert!((parsed["log_value"].as_f64().unwrap() - expect.ln()).abs() < 1e-12);
}

#[test]
fn graph_dump_matches_golden_file() {
    let lat = Lattice::new(2).unwrap();
    let mut set = lat.empty_edge_set();
    for &e in lat.plaquette_boundary(0) {
        set.set(e, true);
    }
    let dump = commands::dump_subgraph_json(&lat, &set).unwrap();
    let golden_path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden/plaquette_subgraph.json");
    let golden = std::fs::read_to_string(&golden_path).unwrap();
    assert_eq!(dump.trim(), golden.trim());
}

#[test]
fn bench_partial_runs_at_small_scale() {
    let report = commands::cmd_bench("partial", 4, 5).unwrap();
    assert!(report.contains("partial overlap"), "{report}");
}

//! End-to-end tests of the command-line interface: exit codes, JSON schema,
//! witness round-trips and seeded determinism.

use std::process::{Command, Output};

use locinv::algebraic;
use locinv::flows::LocalUnitary;
use locinv::pauli;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_locinv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn witness_from_json(v: &serde_json::Value) -> LocalUnitary {
    let factors = v.as_array().expect("single witness is an array");
    let params: Vec<([f64; 3], f64)> = factors
        .iter()
        .map(|f| {
            let axis = f["axis"].as_array().unwrap();
            (
                [
                    axis[0].as_f64().unwrap(),
                    axis[1].as_f64().unwrap(),
                    axis[2].as_f64().unwrap(),
                ],
                f["angle"].as_f64().unwrap(),
            )
        })
        .collect();
    LocalUnitary::from_axis_angles(&params)
}

#[test]
fn check_exit_codes_follow_classification() {
    let out = run(&["check", "--h", "zz", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["classification"], "type1");

    let out = run(&["check", "--h", "xx+yy+zz", "--n", "2"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json_of(&out)["classification"], "certified_not_type1");

    let out = run(&[
        "check",
        "--h",
        "0.5*z1+0.5*1z+0.5*zz",
        "--n",
        "2",
        "--tau-pi-frac",
        "1/4",
        "--restarts",
        "8",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let v = json_of(&out);
    assert_eq!(v["classification"], "type2");
    assert_eq!(v["schema"], 1);
    assert!(v["witness"]["k1"].is_array());
    assert!(v["witness"]["k2"].is_array());

    // bare letters at τ = π/4: U² = i·1l, the trivial self-inverse case
    let out = run(&["check", "--h", "z1+1z+zz", "--n", "2", "--tau-pi-frac", "1/4"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json_of(&out)["classification"], "self_inverse");

    // parse error: position reported, exit 1
    let out = run(&["check", "--h", "zq", "--n", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("position 1"), "stderr was: {}", err);
}

#[test]
fn witness_json_roundtrip_reverifies() {
    let out = run(&["check", "--h", "zz", "--n", "2"]);
    let v = json_of(&out);
    let recorded = v["residual"].as_f64().expect("recorded residual");
    let k = witness_from_json(&v["witness"]);
    let hm = pauli::build_matrix(&pauli::parse_hamiltonian("zz", 2).unwrap());
    let recomputed = algebraic::verify_inversion(&hm, &k).unwrap();
    assert!(
        (recomputed - recorded).abs() < 1e-10,
        "recorded {} vs recomputed {}",
        recorded,
        recomputed
    );
    assert!(recomputed < 1e-8);
}

#[test]
fn seed_makes_output_bit_for_bit_identical() {
    // a case that must go through the stochastic flow
    let args = [
        "check", "--h", "xxx+yyy+zzz", "--n", "3", "--seed", "17", "--restarts", "6",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json_of(&a)["method"], "type1_flow");
}

#[test]
fn graph_command_certificates() {
    let dir = std::env::temp_dir();
    let c4 = dir.join("locinv_c4.graph");
    std::fs::write(&c4, "1 2 zz 1\n2 3 zz 1\n3 4 zz 1\n1 4 zz 1\n").unwrap();
    let out = run(&["graph", "--file", c4.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["classification"], "type1");
    assert_eq!(v["method"], "bipartite_coloring");
    let coloring: Vec<u8> = v["coloring"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap() as u8)
        .collect();
    assert_eq!(coloring[0], coloring[2]);
    assert_ne!(coloring[0], coloring[1]);

    let c3 = dir.join("locinv_c3.graph");
    std::fs::write(&c3, "1 2 zz 1\n2 3 zz 1\n1 3 zz 1\n").unwrap();
    let out = run(&["graph", "--file", c3.to_str().unwrap(), "--flow", "--restarts", "6", "--max-iter", "1500"]);
    assert_eq!(out.status.code(), Some(4));
    let v = json_of(&out);
    assert_eq!(v["method"], "bipartite_odd_cycle");
    assert_eq!(v["odd_cycle"].as_array().unwrap().len() % 2, 1);
    assert_eq!(v["diagnostics"]["flow_agrees"], 1.0);

    let c3x = dir.join("locinv_c3x.graph");
    std::fs::write(&c3x, "1 2 xmx 1\n2 3 xmx 1\n1 3 xmx 1\n").unwrap();
    let out = run(&["graph", "--file", c3x.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["method"], "joint_z_half_pi");
    assert!(v["residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn order_and_cartan_json() {
    let out = run(&["order", "--i", "8", "--j", "15", "--n", "4", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["order"], 0);
    assert_eq!(v["joint_z_invertible"], false);
    assert_eq!(v["individually_z_invertible"], true);

    let out = run(&["order", "--i", "47", "--j", "11", "--n", "6", "--json"]);
    let v = json_of(&out);
    assert_eq!(v["order"], -2);
    let phi = v["joint_angle"].as_f64().unwrap();
    assert!((phi - std::f64::consts::PI / 2.0).abs() < 1e-15);

    let out = run(&["order", "--i", "1", "--j", "1", "--n", "2"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["cartan", "--h", "zz", "--n", "2", "--restarts", "4", "--json"]);
    let v = json_of(&out);
    assert_eq!(v["cc"], "p");
    assert_eq!(v["ai"], "p");
    assert_eq!(v["aiii"], "k");
    assert_eq!(v["type1"], "+");
}

#[test]
fn trace_csv_export() {
    let dir = std::env::temp_dir();
    let csv = dir.join("locinv_trace.csv");
    let out = run(&[
        "trace", "--h", "zz", "--n", "2", "--seed", "3", "--restarts", "4", "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let body = std::fs::read_to_string(&csv).unwrap();
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("restart,iteration,overlap"));
    let mut rows = 0;
    let mut last: Option<(u32, f64)> = None;
    for line in lines {
        let parts: Vec<&str> = line.split(',').collect();
        assert_eq!(parts.len(), 3);
        let restart: u32 = parts[0].parse().unwrap();
        let overlap: f64 = parts[2].parse().unwrap();
        if let Some((prev_restart, prev_overlap)) = last {
            if prev_restart == restart {
                assert!(overlap <= prev_overlap + 1e-12, "trace not monotone");
            }
        }
        last = Some((restart, overlap));
        rows += 1;
    }
    assert!(rows > 0);
}

#[test]
fn check_reads_hamiltonian_from_file_and_writes_trace() {
    let dir = std::env::temp_dir();
    let hfile = dir.join("locinv_h.txt");
    std::fs::write(&hfile, "xxx+yyy+zzz\n").unwrap();
    let tracefile = dir.join("locinv_check_trace.csv");
    let out = run(&[
        "check",
        "--file",
        hfile.to_str().unwrap(),
        "--n",
        "3",
        "--seed",
        "17",
        "--restarts",
        "6",
        "--trace",
        tracefile.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["classification"], "type1");
    let body = std::fs::read_to_string(&tracefile).unwrap();
    assert!(body.starts_with("restart,iteration,overlap\n"));
    assert!(body.lines().count() > 1);

    // --h and --file are mutually exclusive
    let out = run(&[
        "check",
        "--h",
        "zz",
        "--file",
        hfile.to_str().unwrap(),
        "--n",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn corpus_json_memberships() {
    let out = run(&["corpus", "--json", "--restarts", "6", "--max-iter", "1500", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 11);
    // example 1 (zz): every simple criterion true, flow finds the witness
    assert_eq!(rows[0]["spectrum_paired"], true);
    assert_eq!(rows[0]["double_commutator"], true);
    assert_eq!(rows[0]["local_orthocomplement"], true);
    assert_eq!(rows[0]["flow_found"], true);
    // example 10 (zz+z1+1x): memberships reported
    assert_eq!(rows[9]["hamiltonian"], "zz+z1+1x");
    assert_eq!(rows[9]["spectrum_paired"], true);
}

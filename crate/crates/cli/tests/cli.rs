use std::path::Path;
use std::process::{Command, Output};

fn scramble(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scramble")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = scramble(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Header and records of a CSV report, comment lines dropped.
fn table(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn note(csv: &str, key: &str) -> String {
    let prefix = format!("# {key}=");
    csv.lines().find_map(|l| l.strip_prefix(&prefix)).unwrap_or_else(|| panic!("no note {key}")).to_string()
}

#[test]
fn page_curve_has_one_block_per_time_point() {
    let csv = stdout(&["page-curve", "--N", "16", "--samples", "300", "--seed", "7"]);
    assert!(csv.starts_with("# config={"));
    let (h, rows) = table(&csv);
    let t = col(&h, "t");
    let mut times: Vec<usize> = rows.iter().map(|r| r[t].parse().unwrap()).collect();
    times.dedup();
    assert_eq!(times, (0..=8).collect::<Vec<_>>());
    assert_eq!(rows.len(), 9 * 8);
    // The z-polarized product state starts with the full deficit |A| ln 2.
    let (a, d) = (col(&h, "size_A"), col(&h, "mean_deficit_nats"));
    for r in rows.iter().filter(|r| r[t] == "0") {
        let size: f64 = r[a].parse().unwrap();
        let def: f64 = r[d].parse().unwrap();
        assert!((def - size * std::f64::consts::LN_2).abs() < 1e-12);
    }
}

#[test]
fn nearest_neighbor_circuit_keeps_a_larger_deficit() {
    let mean_at = |circuit: &str| -> f64 {
        let csv = stdout(&["page-curve", "--N", "16", "--circuit", circuit, "--sizes", "8", "--samples", "500", "--seed", "7"]);
        let (h, rows) = table(&csv);
        let last = rows.last().unwrap();
        assert_eq!(last[col(&h, "t")], "8");
        last[col(&h, "mean_deficit_nats")].parse().unwrap()
    };
    assert!(mean_at("nn") > mean_at("es"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, args: &[&str]| -> Vec<u8> {
        let path = dir.path().join(name);
        let mut all: Vec<&str> = args.to_vec();
        let p = path.to_str().unwrap().to_string();
        all.extend(["--out", &p]);
        let out = scramble(&all);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(Path::new(&path)).unwrap()
    };
    for args in [
        &["page-curve", "--N", "16", "--circuit", "a2a", "--samples", "200", "--seed", "11"][..],
        &["mutual-info", "--N", "16", "--samples", "100", "--placement", "random", "--seed", "11"][..],
        &["decoder", "--N", "4", "--p", "0.05", "--trajectories", "40", "--seed", "11"][..],
        &["rmt", "--N", "8", "--samples", "50", "--seed", "11"][..],
        &["hypercube", "--m", "5", "--samples", "500", "--seed", "11"][..],
    ] {
        let a = run("a.csv", args);
        let b = run("a.csv", args);
        assert_eq!(a, b, "{args:?}");
        assert!(!a.is_empty());
    }
    let a = run("b.csv", &["page-curve", "--N", "16", "--circuit", "nn", "--samples", "50", "--seed", "1"]);
    let b = run("b.csv", &["page-curve", "--N", "16", "--circuit", "nn", "--samples", "50", "--seed", "2"]);
    assert_ne!(a, b);
}

#[test]
fn json_and_csv_carry_the_same_numbers() {
    let base = ["mutual-info", "--N", "16", "--sizes", "2", "--samples", "200", "--seed", "5"];
    let csv = stdout(&base);
    let mut json_args = base.to_vec();
    json_args.extend(["--format", "json"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&json_args)).unwrap();
    let (h, rows) = table(&csv);
    let jrows = json["rows"].as_array().unwrap();
    assert_eq!(rows.len(), jrows.len());
    for (r, j) in rows.iter().zip(jrows) {
        for name in ["mean_I2_bits", "stderr"] {
            let x: f64 = r[col(&h, name)].parse().unwrap();
            assert_eq!(x, j[name].as_f64().unwrap());
        }
        assert_eq!(r[col(&h, "size_R")], j["size_R"].to_string());
    }
    assert_eq!(json["config"]["seed"], 5);
    assert_eq!(note(&csv, "r_min_N16_a2"), json["notes"]["r_min_N16_a2"].to_string());
}

#[test]
fn mutual_info_saturates_at_full_r() {
    let csv = stdout(&["mutual-info", "--N", "32", "--samples", "400", "--seed", "3"]);
    let (h, rows) = table(&csv);
    let (a, r, i) = (col(&h, "size_A"), col(&h, "size_R"), col(&h, "mean_I2_bits"));
    for size in [1usize, 3, 5] {
        let full = rows.iter().find(|row| row[a] == size.to_string() && row[r] == "32").unwrap();
        assert_eq!(full[i].parse::<f64>().unwrap(), 2.0 * size as f64);
        let k: usize = note(&csv, &format!("r_min_N32_a{size}")).parse().unwrap();
        assert!(k <= size + 2, "|A|={size}: |R|_min={k}");
    }
}

#[test]
fn noiseless_decoder_has_unit_delta() {
    let csv = stdout(&["decoder", "--N", "8", "--trajectories", "20", "--seed", "9"]);
    let (h, rows) = table(&csv);
    assert_eq!(rows.len(), 9);
    let d = col(&h, "delta");
    for row in &rows {
        assert!((row[d].parse::<f64>().unwrap() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn crosstalk_toggle_changes_the_noiseless_channel() {
    let run = |toggle: &str| {
        let csv = stdout(&["decoder", "--N", "8", "--trajectories", "200", "--crosstalk", toggle, "--seed", "9"]);
        assert!(csv.lines().next().unwrap().contains(&format!("\"crosstalk\":{}", toggle == "on")));
        let (h, rows) = table(&csv);
        rows.iter().map(|r| r[col(&h, "P_EPR")].clone()).collect::<Vec<_>>()
    };
    assert_ne!(run("on"), run("off"));
}

#[test]
fn hypercube_cross_check_and_table() {
    let csv = stdout(&["hypercube", "--m", "3", "--max-size", "4", "--samples", "1000", "--seed", "2"]);
    assert_eq!(note(&csv, "crosscheck_bipartitions"), "256");
    assert_eq!(note(&csv, "crosscheck_mismatches"), "0");
    let (h, rows) = table(&csv);
    let total: u64 = rows.iter().map(|r| r[col(&h, "count")].parse::<u64>().unwrap()).sum();
    assert_eq!(total, 1000);
}

#[test]
fn rmt_probabilities_are_normalized() {
    let csv = stdout(&["rmt", "--N", "16", "--sizes", "3,5", "--samples", "20", "--seed", "4"]);
    let (h, rows) = table(&csv);
    for size in ["3", "5"] {
        let total: f64 = rows
            .iter()
            .filter(|r| r[col(&h, "size_A")] == size)
            .map(|r| r[col(&h, "rmt_prob")].parse::<f64>().unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-9, "|A|={size}: {total}");
    }
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| scramble(args).status.code().unwrap();
    assert_eq!(code(&["page-curve", "--N", "16"]), 2, "seed is mandatory");
    assert_eq!(code(&["page-curve", "--N", "12", "--seed", "1"]), 2);
    assert_eq!(code(&["page-curve", "--N", "16", "--sizes", "17", "--seed", "1"]), 2);
    assert_eq!(code(&["page-curve", "--N", "16", "--basis", "w", "--seed", "1"]), 2);
    assert_eq!(code(&["rmt", "--N", "16", "--sizes", "8", "--seed", "1"]), 2);
    assert_eq!(code(&["decoder", "--circuit", "qm", "--seed", "1"]), 2);
    assert_eq!(code(&["decoder", "--N", "8", "--sizes", "3", "--seed", "1"]), 3);
    assert_eq!(code(&["page-curve", "--N", "4096", "--seed", "1"]), 3);
    assert_eq!(code(&["rmt", "--N", "8", "--samples", "5", "--seed", "1"]), 0);
}

use std::path::Path;
use std::process::{Command, Output};

fn ct(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ct"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("ct runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gen_then_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(ct(
        d,
        &["gen", "--kind", "two-peak", "--size", "9", "--out", "m"]
    )
    .status
    .success());
    let out = ct(
        d,
        &[
            "run",
            "--node",
            "m/mesh.node",
            "--ele",
            "m/mesh.ele",
            "--field-attr",
            "0",
            "--top",
            "2",
            "--out",
            "o",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("vertices      729"));
    assert!(stdout.contains("time tree"));

    let tree = json(&d.join("o/tree.json"));
    assert_eq!(tree["schema"], 1);
    let arc = &tree["superarcs"][0];
    for key in ["id", "lo", "hi", "regularCount"] {
        assert!(arc.get(key).is_some(), "{key}");
    }
    let branches = json(&d.join("o/branches.json"));
    let first = &branches["branches"][0];
    for key in [
        "rank",
        "weight",
        "superarcs",
        "parent",
        "attachmentSupernode",
    ] {
        assert!(first.get(key).is_some(), "{key}");
    }
    let csv = std::fs::read_to_string(d.join("o/weights.csv")).unwrap();
    assert_eq!(
        csv.lines().next(),
        Some("superarc,h_lo,h_hi,a,b,c,d,weight")
    );
    let obj = std::fs::read_to_string(d.join("o/branch_0.obj")).unwrap();
    assert!(obj.starts_with("mtllib branches.mtl\n"));
    assert!(obj.lines().any(|l| l.starts_with("g superarc_")));
}

#[test]
fn raw_grid_input_with_isovalue_override() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let n = 6;
    let mut bytes = Vec::new();
    for z in 0..n {
        for y in 0..n {
            for x in 0..n {
                bytes.extend_from_slice(
                    &((x + 2 * y + 3 * z) as f64 + 0.01 * x as f64).to_le_bytes(),
                );
            }
        }
    }
    std::fs::write(d.join("f.f64"), bytes).unwrap();
    let out = ct(
        d,
        &[
            "run",
            "--dims",
            "6",
            "6",
            "6",
            "--raw",
            "f.f64",
            "--weights",
            "count",
            "--isovalue",
            "0=12.5",
            "--out",
            "o",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("superarc 0 at 12.5"));
}

#[test]
fn failures_name_the_stage_and_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.node"), "4 3 0 0\n1 0 0 0\n2 1 0 0\n3 0 1 0\n").unwrap();
    std::fs::write(d.join("bad.ele"), "1 4 0\n1 1 2 3 4\n").unwrap();
    let out = ct(
        d,
        &[
            "run",
            "--node",
            "bad.node",
            "--ele",
            "bad.ele",
            "--field-attr",
            "0",
        ],
    );
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error: load:"), "{err}");

    let out = ct(d, &["run", "--dims", "2", "2", "2"]);
    assert!(!out.status.success());
    let out = ct(
        d,
        &["run", "--top", "0", "--dims", "2", "2", "2", "--raw", "x"],
    );
    assert!(!out.status.success());
}

#[test]
fn verify_passes_on_a_small_budget() {
    let dir = tempfile::tempdir().unwrap();
    let out = ct(
        dir.path(),
        &["verify", "--seed", "42", "--tets", "100", "--grids", "2"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 7);
}

#[test]
fn coeffs_and_bench_emit_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(ct(
        d,
        &[
            "gen",
            "--kind",
            "random-grid",
            "--size",
            "3",
            "--seed",
            "2",
            "--out",
            "m"
        ]
    )
    .status
    .success());
    let out = ct(
        d,
        &[
            "coeffs",
            "--node",
            "m/mesh.node",
            "--ele",
            "m/mesh.ele",
            "--field",
            "m/mesh.field",
        ],
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("tet,piece,h_lo,h_hi,a,b,c,d"));
    assert_eq!(text.lines().count(), 1 + 48 * 3);

    let out = ct(
        d,
        &["bench", "--sizes", "4,5", "--repeat", "1", "--out", "b.csv"],
    );
    assert!(out.status.success());
    let csv = std::fs::read_to_string(d.join("b.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv
        .lines()
        .nth(2)
        .unwrap()
        .starts_with("jittered_5,125,384,"));
}

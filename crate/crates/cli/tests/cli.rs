use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn phylo(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phylo"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn quartet_dir() -> TempDir {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("t1.nwk"), "((a,b),(c,d));\n").unwrap();
    fs::write(dir.path().join("t2.nwk"), "((a,c),(b,d));\n").unwrap();
    dir
}

#[test]
fn distances_with_certificates() {
    let dir = quartet_dir();
    let tw = json_of(&phylo(
        dir.path(),
        &["--json", "dist", "tw", "t1.nwk", "t2.nwk"],
    ));
    assert_eq!(tw["value"], 1);
    assert_eq!(tw["certificate"]["width"], 3);
    let tbr = json_of(&phylo(
        dir.path(),
        &["--json", "dist", "tbr", "t1.nwk", "t2.nwk"],
    ));
    assert_eq!(tbr["value"], 1);
    assert_eq!(tbr["certificate"].as_array().unwrap().len(), 2);
    let mp = json_of(&phylo(
        dir.path(),
        &["--json", "dist", "mp2", "t1.nwk", "t2.nwk"],
    ));
    assert_eq!(mp["value"], 1);
    assert!(mp["certificate"]["assignment"].is_object());
}

#[test]
fn convert_round_trip() {
    let dir = quartet_dir();
    assert!(phylo(
        dir.path(),
        &["convert", "--in", "t1.nwk", "--out", "t1.json"]
    )
    .status
    .success());
    assert!(phylo(
        dir.path(),
        &["convert", "--in", "t1.json", "--out", "back.nwk"]
    )
    .status
    .success());
    let q1 = json_of(&phylo(dir.path(), &["quartets", "t1.nwk"]));
    let q2 = json_of(&phylo(dir.path(), &["quartets", "back.nwk"]));
    assert_eq!(q1, q2);
    assert_eq!(q1, serde_json::json!(["a,b|c,d"]));
}

#[test]
fn display_and_treewidth() {
    let dir = quartet_dir();
    assert!(phylo(
        dir.path(),
        &["display", "t1.nwk", "t2.nwk", "--out", "d.json"]
    )
    .status
    .success());
    assert!(phylo(
        dir.path(),
        &[
            "display",
            "t1.nwk",
            "t2.nwk",
            "--normalize",
            "--out",
            "d.dot"
        ]
    )
    .status
    .success());
    assert!(fs::read_to_string(dir.path().join("d.dot"))
        .unwrap()
        .contains("graph"));
    let tw = json_of(&phylo(
        dir.path(),
        &["--json", "tw", "d.json", "--emit-decomposition", "dec.json"],
    ));
    assert_eq!(tw["upper"], 3);
    assert_eq!(tw["exact"], true);
    let dec: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("dec.json")).unwrap()).unwrap();
    assert_eq!(dec["width"], 3);
}

#[test]
fn chains_splits_and_reductions() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("a.nwk"),
        "((a,(b,c)),(x1,(x2,(x3,((d,e),f)))));",
    )
    .unwrap();
    fs::write(
        dir.path().join("b.nwk"),
        "(((a,b),c),(x1,(x2,(x3,(d,(e,f))))));",
    )
    .unwrap();
    let chains = json_of(&phylo(dir.path(), &["chains", "a.nwk", "b.nwk"]));
    assert_eq!(chains, serde_json::json!([["x1", "x2", "x3"]]));
    let splits = json_of(&phylo(dir.path(), &["splits", "a.nwk", "b.nwk"]));
    assert!(!splits.as_array().unwrap().is_empty());
    let r = json_of(&phylo(
        dir.path(),
        &["reduce", "chain", "a.nwk", "b.nwk", "--report", "r.json"],
    ));
    assert_eq!(r["tw_before"], r["tw_after"]);
    assert!(dir.path().join("r.json").exists());
    let c = json_of(&phylo(
        dir.path(),
        &[
            "reduce",
            "cluster",
            "a.nwk",
            "b.nwk",
            "--split",
            "a,b,c|d,e,f,x1,x2,x3",
        ],
    ));
    assert_eq!(c["analysis"]["bounds_hold"], true);
}

#[test]
fn cps_report() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("a.nwk"), "((a,b),(c,(d,(e,f))));").unwrap();
    fs::write(dir.path().join("b.nwk"), "((a,c),(b,(d,(e,f))));").unwrap();
    let r = json_of(&phylo(dir.path(), &["reduce", "cps", "a.nwk", "b.nwk"]));
    assert_eq!(r["tw_before"], r["tw_after"]);
}

#[test]
fn constructions_write_files() {
    let dir = TempDir::new().unwrap();
    assert!(phylo(
        dir.path(),
        &["--quiet", "construct", "grid", "--k", "3", "--out-dir", "g"]
    )
    .status
    .success());
    for f in ["t1.nwk", "t2.nwk", "model.json"] {
        assert!(dir.path().join("g").join(f).exists());
    }
    let d = json_of(&phylo(
        dir.path(),
        &["--json", "dist", "tw", "g/t1.nwk", "g/t2.nwk"],
    ));
    assert!(d["value"].as_u64().unwrap() >= 1);
    assert!(phylo(
        dir.path(),
        &[
            "--quiet",
            "construct",
            "double",
            "--i",
            "1",
            "--out-dir",
            "d"
        ]
    )
    .status
    .success());
    let d = json_of(&phylo(
        dir.path(),
        &["--json", "dist", "tw", "d/t1.nwk", "d/t2.nwk"],
    ));
    assert_eq!(d["value"], 1);
}

#[test]
fn network_display_check() {
    let dir = TempDir::new().unwrap();
    // the quartet tree ab|cd with one extra edge between its two pendant edges of a and c
    let net = r#"{"vertices":[{"id":0,"label":"a"},{"id":1,"label":"b"},{"id":2,"label":"c"},{"id":3,"label":"d"},
        {"id":4,"label":null},{"id":5,"label":null},{"id":6,"label":null},{"id":7,"label":null}],
        "edges":[[0,6],[6,4],[1,4],[4,5],[2,7],[7,5],[3,5],[6,7]]}"#;
    fs::write(dir.path().join("n.json"), net).unwrap();
    fs::write(dir.path().join("t.nwk"), "((a,b),(c,d));").unwrap();
    fs::write(dir.path().join("u.nwk"), "((a,c),(b,d));").unwrap();
    let yes = json_of(&phylo(
        dir.path(),
        &[
            "--json",
            "displays",
            "n.json",
            "t.nwk",
            "--certificate",
            "c.json",
        ],
    ));
    assert_eq!(yes["displays"], true);
    assert!(dir.path().join("c.json").exists());
    let also = json_of(&phylo(
        dir.path(),
        &["--json", "displays", "n.json", "u.nwk"],
    ));
    assert_eq!(also["displays"], true);
}

#[test]
fn verify_smoke_and_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = phylo(
        dir.path(),
        &[
            "--json",
            "verify",
            "--claim",
            "grid-minor",
            "--claim",
            "doubling-tw3",
        ],
    );
    let reports = json_of(&out);
    assert_eq!(reports.as_array().unwrap().len(), 2);
    assert!(reports.as_array().unwrap().iter().all(|r| r["failed"] == 0));
    let table = phylo(dir.path(), &["verify"]);
    assert!(table.status.success());
    assert!(String::from_utf8_lossy(&table.stdout).contains("cps-invariance"));
    assert_eq!(
        phylo(dir.path(), &["verify", "--profile", "huge"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(phylo(dir.path(), &["nonsense"]).status.code(), Some(2));
    assert_eq!(
        phylo(dir.path(), &["quartets", "missing.nwk"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn size_limit_exit_code() {
    let dir = TempDir::new().unwrap();
    // 8x8 grid with a one-vertex exact limit and no branch-and-bound budget
    let k = 8;
    let mut vs = Vec::new();
    let mut es = Vec::new();
    for r in 0..k {
        for c in 0..k {
            vs.push(format!(r#"{{"id":{},"label":null}}"#, r * k + c));
            if c + 1 < k {
                es.push(format!("[{},{}]", r * k + c, r * k + c + 1));
            }
            if r + 1 < k {
                es.push(format!("[{},{}]", r * k + c, (r + 1) * k + c));
            }
        }
    }
    let g = format!(
        r#"{{"vertices":[{}],"edges":[{}]}}"#,
        vs.join(","),
        es.join(",")
    );
    fs::write(dir.path().join("g.json"), g).unwrap();
    let out = phylo(
        dir.path(),
        &["tw", "g.json", "--exact-limit", "1", "--budget", "0"],
    );
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}

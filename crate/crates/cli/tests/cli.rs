use std::path::PathBuf;
use std::process::{Command, Output};

use elhr_prov::ara::Ara;
use elhr_prov::{Var, Word};
use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elhr-prov"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON on stdout")
}

#[test]
fn prove_exit_codes() {
    let ex = data("example1.tbox");
    assert_eq!(
        run(&["prove", &ex, "-q", "A <= D : u*v*w"]).status.code(),
        Some(0)
    );
    assert_eq!(
        run(&["prove", &ex, "-q", "A <= D : u"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["prove", &ex, "-q", "A <= D : u*v*w*x"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&[
            "prove",
            &ex,
            "-q",
            "A <= D : u*v*w",
            "--engine",
            "saturation"
        ])
        .status
        .code(),
        Some(0)
    );
    assert_eq!(
        run(&["prove", &data("missing.tbox"), "-q", "A <= D : u"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["prove", &data("broken.tbox"), "-q", "A <= D : u"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["prove", &ex, "-q", "A <= D"]).status.code(), Some(2));
    assert_eq!(
        run(&["prove", &ex, "-q", "A & B <= D : u"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["prove", &ex]).status.code(), Some(2));
}

#[test]
fn prove_text_reports_a_witness() {
    let o = run(&["prove", &data("example1.tbox"), "-q", "A <= D : u*v*w"]);
    let text = stdout(&o);
    assert!(text.starts_with("A <= D : u*v*w  entailed"), "{text}");
    assert!(
        text.contains("witness v*w*u with ordering (v,w,u)"),
        "{text}"
    );
}

#[test]
fn prove_json_schema() {
    let o = run(&[
        "prove",
        &data("example1.tbox"),
        "-q",
        "A <= D : w*u*v",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let obj = v.as_object().unwrap();
    let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
    for k in [
        "query",
        "goal",
        "monomial",
        "entailed",
        "witness_word",
        "witness_ordering",
        "engine",
        "mode",
        "iterations",
        "ordering_checks",
        "prefix_checks",
        "wall_time_ms",
    ] {
        assert!(keys.contains(&k), "missing {k}");
    }
    assert_eq!(keys.len(), 12);
    assert_eq!(v["goal"], "A <= D");
    assert_eq!(v["monomial"], "w*u*v");
    assert_eq!(v["entailed"], true);
    assert_eq!(v["engine"], "ara");
    assert_eq!(v["mode"], "trio");
    assert!(v["witness_word"].is_string());
    let ordering: Vec<&str> = v["witness_ordering"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap())
        .collect();
    assert_eq!(ordering.len(), 3);
    assert!(
        v["iterations"].is_u64() && v["ordering_checks"].is_u64() && v["prefix_checks"].is_u64()
    );
    assert!(v["wall_time_ms"].is_f64());

    let o = run(&[
        "prove",
        &data("example1.tbox"),
        "-q",
        "A <= D : z",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["entailed"], false);
    assert!(v["witness_word"].is_null() && v["witness_ordering"].is_null());
}

#[test]
fn left_absorbing_mode_respects_order() {
    let chain = data("chain.tbox");
    let mn = run(&[
        "prove",
        &chain,
        "-q",
        "A <= C : m*n",
        "--mode",
        "lap",
        "--json",
    ]);
    let nm = run(&[
        "prove",
        &chain,
        "-q",
        "A <= C : n*m",
        "--mode",
        "lap",
        "--json",
    ]);
    assert_eq!(mn.status.code(), Some(0));
    assert_eq!(nm.status.code(), Some(1));
    assert_eq!(json(&mn)["ordering_checks"], 1);
    assert_eq!(json(&nm)["ordering_checks"], 1);
    assert_eq!(
        run(&["prove", &chain, "-q", "A <= C : n*m"]).status.code(),
        Some(0)
    );
}

#[test]
fn monomials_listing() {
    let ex = data("example1.tbox");
    let o = run(&["monomials", &ex, "-g", "A <= D"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "u*v*w\nu*v*w*x*y\n");
    assert_eq!(stdout(&run(&["monomials", &ex, "-g", "A <= A"])), "1\n");
    assert_eq!(
        stdout(&run(&["monomials", &ex, "-g", "A <= D", "--limit", "1"])),
        "u*v*w\n... 1 more\n"
    );
    let v = json(&run(&[
        "monomials",
        &ex,
        "-g",
        "A <= D",
        "--json",
        "--limit",
        "1",
    ]));
    assert_eq!(v["count"], 2);
    assert_eq!(v["truncated"], true);
    assert_eq!(v["mode"], "trio");
    assert_eq!(v["goal"], "A <= D");
    assert_eq!(v["monomials"].as_array().unwrap().len(), 1);
}

#[test]
fn dump_ara_dot_chains_calls_in_schema_order() {
    let o = run(&[
        "dump-ara",
        &data("example1.tbox"),
        "-g",
        "C <= D",
        "--iterations",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let dot = stdout(&o);
    assert!(dot.starts_with("digraph"), "{dot}");
    let label = |needle: &str| {
        dot.lines()
            .find(|l| l.contains("label") && l.contains(needle))
            .unwrap_or_else(|| panic!("no cluster labelled {needle}"))
            .to_string()
    };
    assert!(label("(root)").contains("A1[C <= D]"));
    let conj = label("A0[B & C <= D]");
    let top = label("A0[top <= B]");
    let index = |l: &str| {
        l.split(':')
            .next()
            .unwrap()
            .split('"')
            .next_back()
            .unwrap()
            .trim()
            .to_string()
    };
    let (ci, ti) = (index(&conj), index(&top));
    let calls: Vec<&str> = dot.lines().filter(|l| l.contains("call:")).collect();
    let first = calls
        .iter()
        .find(|l| l.contains(&format!("call:{ci}\"")))
        .expect("call into the conjunction leaf");
    let target = first
        .split("->")
        .nth(1)
        .unwrap()
        .split('[')
        .next()
        .unwrap()
        .trim();
    assert!(
        calls
            .iter()
            .filter(|l| l.contains(&format!("call:{ti}\"")))
            .any(|l| l.split("->").next().unwrap().trim() == target),
        "the conjunction call is followed by the top call"
    );
}

#[test]
fn dump_ara_json_round_trips() {
    let o = run(&[
        "dump-ara",
        &data("example1.tbox"),
        "-g",
        "A <= D",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let ara = Ara::from_json(&stdout(&o)).unwrap();
    assert!(ara.well_formed());
    for (w, ok) in [("wuv", true), ("vwu", true), ("xvywu", true), ("uv", false)] {
        let w = Word(
            w.chars()
                .map(|c| Var::new(&c.to_string()).unwrap())
                .collect(),
        );
        assert_eq!(ara.membership(&w).unwrap(), ok, "{w}");
    }
}

#[test]
fn table_is_tab_separated() {
    let o = run(&["table", &data("example1.tbox")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    let width = lines[0].split('\t').count();
    assert!(width > 6);
    assert!(lines.iter().all(|l| l.split('\t').count() == width));
}

#[test]
fn bench_sword_counts_monomials() {
    for k in 1usize..=10 {
        let v = json(&run(&["bench", "sword", "-n", &k.to_string(), "--json"]));
        assert_eq!(v["monomials"], 1u64 << k, "n = {k}");
        assert_eq!(v["axioms"], 4 * k);
        assert!(v["ara_states"].as_u64().unwrap() > 0);
    }
    let text = stdout(&run(&["bench", "sword", "-n", "8"]));
    assert!(text.contains("monomials of A0 <= A8: 256"), "{text}");
    assert_eq!(run(&["bench", "sword", "-n", "0"]).status.code(), Some(2));
}

#[test]
fn bench_sword_writes_the_tbox() {
    let path = std::env::temp_dir().join(format!("elhr-prov-sword-{}.tbox", std::process::id()));
    let p = path.to_string_lossy().into_owned();
    assert_eq!(
        run(&["bench", "sword", "-n", "2", "--out", &p])
            .status
            .code(),
        Some(0)
    );
    let o = run(&["prove", &p, "-q", "A0 <= A2 : u1*v1*w2*x2"]);
    std::fs::remove_file(&path).ok();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn bench_power_probes() {
    let v = json(&run(&["bench", "power", "-n", "10", "--json"]));
    assert_eq!(v["states"], 30);
    assert_eq!(v["components"], 10);
    let probes: Vec<(u64, bool)> = serde_json::from_value(v["probes"].clone()).unwrap();
    assert_eq!(probes, vec![(1023, false), (1024, true), (1025, false)]);
    assert_eq!(run(&["bench", "power", "-n", "30"]).status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let ex = data("example1.tbox");
    let strip = |o: Output| {
        let mut v = json(&o);
        v.as_object_mut().unwrap().remove("wall_time_ms");
        v
    };
    for q in ["A <= D : u*v*w", "A <= B : v*x*y", "A <= D : u"] {
        let a = strip(run(&["prove", &ex, "-q", q, "--json"]));
        let b = strip(run(&["prove", &ex, "-q", q, "--json"]));
        assert_eq!(a, b);
    }
    for args in [
        vec!["monomials", ex.as_str(), "-g", "A <= D"],
        vec!["dump-ara", ex.as_str(), "-g", "A <= D"],
        vec!["dump-ara", ex.as_str(), "-g", "A <= D", "--format", "json"],
        vec!["table", ex.as_str()],
    ] {
        assert_eq!(run(&args).stdout, run(&args).stdout, "{args:?}");
    }
}

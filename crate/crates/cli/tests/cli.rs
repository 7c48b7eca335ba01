//! End-to-end tests of the `kset` binary against committed golden files.
//! All output formats are bit-exact; the search output must not depend on
//! the worker count.

use std::path::PathBuf;
use std::process::{Command, Output};

fn kset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kset"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = kset(args);
    assert!(
        out.status.success(),
        "kset {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

fn golden(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "golden", name]
        .iter()
        .collect();
    std::fs::read_to_string(path).expect("golden file")
}

fn fixture(name: &str) -> String {
    [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name]
        .iter()
        .collect::<PathBuf>()
        .display()
        .to_string()
}

const EXAMPLE_CHOICES: &str = "step:1;match:1>7,2>8,3>4,5>6;r3:yes \
    step:2;match:9>12,13>16,14>10,15>11;r3:yes \
    step:3;match:19>20,21>22,23>17,24>18;r3:yes \
    step:4;match:28>27,30>29,31>25,32>26;r3:yes \
    step:5;match:33>35,34>40,36>37,38>39;r3:yes";

#[test]
fn rays_text_matches_golden() {
    assert_eq!(stdout(&["rays"]), golden("rays.txt"));
}

#[test]
fn bases_text_matches_golden() {
    assert_eq!(stdout(&["bases"]), golden("bases.txt"));
}

#[test]
fn rays_json_lists_forty_entries() {
    let parsed: serde_json::Value =
        serde_json::from_str(&stdout(&["rays", "--format", "json"])).expect("valid json");
    assert_eq!(parsed.as_array().unwrap().len(), 40);
    assert_eq!(parsed[0]["text"], "10000000");
}

#[test]
fn seek_matches_golden_for_any_worker_count() {
    let one = stdout(&["seek", "--workers", "1"]);
    assert_eq!(one, golden("seek.txt"));
    assert_eq!(one.lines().count(), 64);
    assert_eq!(stdout(&["seek", "--workers", "7"]), one);
    assert_eq!(stdout(&["seek", "--workers", "32"]), one);

    // worker count via the environment default
    let via_env = Command::new(env!("CARGO_BIN_EXE_kset"))
        .args(["seek"])
        .env("KSET_WORKERS", "5")
        .output()
        .expect("binary runs");
    assert!(via_env.status.success());
    assert_eq!(String::from_utf8(via_env.stdout).unwrap(), one);
}

#[test]
fn seek_jsonl_round_trips() {
    let lines = stdout(&["seek", "--format", "jsonl"]);
    let catalog = kset_core::Catalog::kernaghan_peres();
    let mut count = 0;
    for line in lines.lines() {
        let doc: kset_core::KsSetDoc = serde_json::from_str(line).expect("doc per line");
        assert!(doc.parity_proof);
        assert_eq!(doc.profile, "20_2 20_4 - 15_8");
        let set = kset_core::KsSet::from_doc(&catalog, &doc).expect("parses back");
        assert_eq!(set.to_json_line(), line, "round trip is byte-exact");
        count += 1;
    }
    assert_eq!(count, 64);
}

#[test]
fn transform_reproduces_the_example_golden() {
    let out = stdout(&[
        "transform",
        "--seed-bases",
        "1,2,3,4,5,6,7,8,10,14,15,16,20,22,24",
        "--choices",
        EXAMPLE_CHOICES,
    ]);
    assert_eq!(out, golden("example_transform.json"));
}

#[test]
fn transform_by_seed_index_matches_explicit_bases() {
    // the worked-example seed sorts first among the 64
    let by_index = stdout(&[
        "transform",
        "--seed-index",
        "1",
        "--choices",
        EXAMPLE_CHOICES,
    ]);
    assert_eq!(by_index, golden("example_transform.json"));
}

#[test]
fn verify_rejects_a_single_basis() {
    let out = kset(&["verify", "--input", &fixture("single_basis.json")]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(
        text.contains("FAIL: not a parity proof; colorable"),
        "got: {text}"
    );
}

#[test]
fn verify_accepts_catalog_and_seed() {
    let catalog = kset(&["verify", "--catalog"]);
    assert_eq!(catalog.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&catalog.stdout)
        .contains("PASS: not a parity proof; not colorable"));

    let seed = kset(&["verify", "--seed-index", "1", "--format", "json"]);
    assert_eq!(seed.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&seed.stdout)).unwrap();
    assert_eq!(report["structure_ok"], true);
    assert_eq!(report["parity_proof"], true);
    assert_eq!(report["colorable"], false);
    assert_eq!(report["basis_count"], 15);
    assert_eq!(report["census_histogram"]["2"], 20);
    assert_eq!(report["census_histogram"]["4"], 20);
}

#[test]
fn verify_transformed_set_from_file() {
    let dir = std::env::temp_dir().join("kset-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("example_transform.json");
    std::fs::write(&path, golden("example_transform.json")).unwrap();
    let out = kset(&["verify", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS: parity proof; not colorable"));
}

#[test]
fn distinct_diagnostics_for_bad_input() {
    let bad_index = kset(&["verify", "--seed-index", "65"]);
    assert_eq!(bad_index.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_index.stderr).contains("unknown seed index 65"));

    let bad_choice = kset(&[
        "transform",
        "--seed-index",
        "1",
        "--choices",
        "step:1;match:1>9,2>8,3>4,5>6;r3:yes \
         step:2;match:9>12,13>16,14>10,15>11;r3:yes \
         step:3;match:19>20,21>22,23>17,24>18;r3:yes \
         step:4;match:28>27,30>29,31>25,32>26;r3:yes \
         step:5;match:33>35,34>40,36>37,38>39;r3:yes",
    ]);
    assert_eq!(bad_choice.status.code(), Some(2));
    assert!(
        String::from_utf8_lossy(&bad_choice.stderr).contains("matching is not a rule-2 candidate")
    );

    let malformed = kset(&["transform", "--seed-index", "1", "--choices", "step:1"]);
    assert_eq!(malformed.status.code(), Some(2));

    let missing = kset(&["verify", "--input", "/nonexistent/set.json"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("cannot read"));
}

#[test]
fn enumerate_census_lines() {
    let out = stdout(&["enumerate", "--seed-index", "1", "--format", "text"]);
    assert_eq!(
        out,
        "sets: 243; rule-3 skipped at 0 steps; rank-2 per set: 30; rank-1 per set: 0\n"
    );
    let skipped = stdout(&[
        "enumerate",
        "--seed-index",
        "1",
        "--skip",
        "2,3",
        "--format",
        "text",
    ]);
    assert_eq!(
        skipped,
        "sets: 972; rule-3 skipped at 2 steps; rank-2 per set: 26; rank-1 per set: 8\n"
    );
}

#[test]
fn enumerate_jsonl_streams_valid_parity_proofs() {
    let out = stdout(&[
        "enumerate",
        "--seed-index",
        "1",
        "--skip",
        "2",
        "--format",
        "jsonl",
    ]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 486);
    let doc: kset_core::KsSetDoc = serde_json::from_str(lines[0]).unwrap();
    assert!(doc.parity_proof);
    assert_eq!(doc.profile, "28_2r2 4_2r1 - 11_4 4_5");
}

#[test]
fn export_graph_matches_golden() {
    let out = stdout(&["export"]);
    assert_eq!(out, golden("graph.dot"));

    // 460 edges, pinned by an up-front brute force over all 780 pairs
    let edges = out.lines().filter(|l| l.contains(" -- ")).count();
    assert_eq!(edges, 460);

    // basis 1 is a clique on nodes 1..8
    for a in 1u8..=8 {
        for b in (a + 1)..=8 {
            assert!(
                out.contains(&format!("  {a} -- {b};\n")),
                "missing {a} -- {b}"
            );
        }
    }
    // dot(R1, R9) = 1, so no edge
    assert!(!out.contains("  1 -- 9;\n"));
}

#[test]
fn skip_step_one_needs_the_flag() {
    let refused = kset(&[
        "enumerate",
        "--seed-index",
        "1",
        "--skip",
        "1",
        "--format",
        "text",
    ]);
    assert_eq!(refused.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&refused.stderr).contains("step 1"));

    let allowed = stdout(&[
        "enumerate",
        "--seed-index",
        "1",
        "--skip",
        "1",
        "--allow-skip-step1",
        "--format",
        "text",
    ]);
    assert!(allowed.starts_with("sets: 486;"));
}

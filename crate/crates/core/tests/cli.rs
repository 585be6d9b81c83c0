use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sedfs::driver::order_digest;
use sedfs::graph::format::{write_edge_list, GraphHeader};
use sedfs::graph::EdgeRecord;
use sedfs::verify::{fixture, inmem_dfs_oracle, write_artifact, Artifact, BatchOrder, OrderedTree};
use sedfs::IoContext;

fn sedfs(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sedfs"))
        .args(args)
        .current_dir(dir)
        .env("SEDFS_TMPDIR", dir)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field<'a>(line: &'a str, key: &str) -> &'a str {
    line.split_whitespace()
        .find_map(|w| w.strip_prefix(key)?.strip_prefix('='))
        .unwrap()
}

fn fixture_file(dir: &Path) -> PathBuf {
    let o = sedfs(dir, &["gen", "fixture", "--out", "fx.g"]);
    assert!(o.status.success());
    dir.join("fx.g")
}

#[test]
fn gen_reports_ratio() {
    let d = tempfile::tempdir().unwrap();
    let o = sedfs(
        d.path(),
        &[
            "gen", "er", "--n", "1000", "--m", "10000", "--seed", "7", "--out", "er.g",
        ],
    );
    assert!(o.status.success());
    assert!(stdout(&o).contains("m/n=10.00"), "{}", stdout(&o));
    let o = sedfs(d.path(), &["run", "-g", "er.g", "--verify"]);
    assert!(o.status.success());
    assert_eq!(field(&stdout(&o), "verified"), "true");
}

#[test]
fn gen_rejects_infeasible_edge_count() {
    let d = tempfile::tempdir().unwrap();
    let o = sedfs(
        d.path(),
        &["gen", "er", "--n", "2", "--m", "3", "--out", "x.g"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("infeasible"));
}

#[test]
fn fixture_run_verifies_and_traces() {
    let d = tempfile::tempdir().unwrap();
    fixture_file(d.path());
    let o = sedfs(
        d.path(),
        &[
            "run",
            "-g",
            "fx.g",
            "--verify",
            "--trace",
            "t.csv",
            "--order-out",
            "fx.order",
            "--stats-json",
            "s.json",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(field(&stdout(&o), "verified"), "true");
    let trace = std::fs::read_to_string(d.path().join("t.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some(sedfs::driver::TRACE_HEADER));
    let fnns: Vec<u32> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(fnns.last(), Some(&10));
    assert!(fnns.windows(2).all(|w| w[0] < w[1]));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(json["algorithm"], "ep");
    assert_eq!(json["verified"], true);
    let o = sedfs(d.path(), &["verify", "-g", "fx.g", "--order", "fx.order"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn ep_trace_fnn_increases_on_larger_graph() {
    let d = tempfile::tempdir().unwrap();
    sedfs(
        d.path(),
        &["gen", "er", "--n", "5000", "--m", "50000", "--out", "er.g"],
    );
    let o = sedfs(
        d.path(),
        &["run", "-g", "er.g", "--budget", "1000", "--trace", "t.csv"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = std::fs::read_to_string(d.path().join("t.csv")).unwrap();
    let fnns: Vec<u32> = trace
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(fnns.len() > 2);
    assert!(fnns.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(fnns.last(), Some(&5001));
}

#[test]
fn verify_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    fixture_file(d.path());
    let ctx = IoContext::new(d.path());
    let t3 = inmem_dfs_oracle(
        &fixture::t0(),
        &[fixture::E1, fixture::E2, fixture::E3],
        BatchOrder::LoadOrder,
    )
    .0;
    for (name, t) in [("t3", &t3), ("t0", &fixture::t0())] {
        let art = Artifact {
            order: t.preorder(),
            parents: t.parents(),
        };
        write_artifact(&d.path().join(name), &art, &ctx).unwrap();
    }
    let o = sedfs(d.path(), &["verify", "-g", "fx.g", "--order", "t3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = sedfs(d.path(), &["verify", "-g", "fx.g", "--order", "t0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("forward cross edge"), "{}", stdout(&o));

    let mut order = fixture::t0().preorder();
    order[1] = order[2];
    std::fs::write(
        d.path().join("dup"),
        order
            .iter()
            .flat_map(|x| x.to_le_bytes())
            .collect::<Vec<u8>>(),
    )
    .unwrap();
    std::fs::copy(d.path().join("t0.parents"), d.path().join("dup.parents")).unwrap();
    let o = sedfs(d.path(), &["verify", "-g", "fx.g", "--order", "dup"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn inmem_digest_matches_oracle() {
    let d = tempfile::tempdir().unwrap();
    fixture_file(d.path());
    let o = sedfs(d.path(), &["run", "-a", "inmem", "-g", "fx.g"]);
    assert!(o.status.success());
    let (t, order) = inmem_dfs_oracle(
        &OrderedTree::star(10, fixture::R),
        &fixture::edges(),
        BatchOrder::LoadOrder,
    );
    assert_eq!(
        field(&stdout(&o), "digest"),
        order_digest(&order, &t.parents())
    );
}

#[test]
fn eb_needs_more_rounds_than_ep_on_a_cycle() {
    let d = tempfile::tempdir().unwrap();
    let edges: Vec<EdgeRecord> = (0..100)
        .map(|u| EdgeRecord::new(u, (u + 1) % 100))
        .collect();
    write_edge_list(
        &d.path().join("cyc.g"),
        GraphHeader::new(100, 100),
        edges,
        &IoContext::new(d.path()),
    )
    .unwrap();
    let iters = |a: &str| {
        let o = sedfs(d.path(), &["run", "-a", a, "-g", "cyc.g", "--verify"]);
        assert!(o.status.success());
        field(&stdout(&o), "iterations").parse::<u32>().unwrap()
    };
    assert!(iters("eb") > iters("ep"));
}

#[test]
fn naive_overflow_is_reported() {
    let d = tempfile::tempdir().unwrap();
    sedfs(
        d.path(),
        &["gen", "er", "--n", "1000", "--m", "10000", "--out", "er.g"],
    );
    let o = sedfs(d.path(), &["run", "-a", "naive", "-g", "er.g"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("batch overflow"));
}

const MATRIX: &str = r#"
seeds = [3]

[[cell]]
kind = "er"
n = [1000, 2000]
ratio = [5, 10]
algorithms = ["ep", "eb"]
"#;

fn bench(dir: &Path, matrix: &str, out: &str) -> Vec<Vec<String>> {
    std::fs::write(dir.join("m.toml"), matrix).unwrap();
    let o = sedfs(dir, &["bench", "--matrix", "m.toml", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.join(out)).unwrap();
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn bench_matrix_rows_and_repeatability() {
    let d = tempfile::tempdir().unwrap();
    let a = bench(d.path(), MATRIX, "a.csv");
    assert_eq!(a.len(), 8);
    assert!(a.iter().all(|r| r[6] == "ok"));
    for pair in a.chunks(2) {
        let (ep, eb) = (&pair[0], &pair[1]);
        assert_eq!((ep[5].as_str(), eb[5].as_str()), ("ep", "eb"));
        let ratio: u64 = ep[2].parse::<u64>().unwrap() / ep[1].parse::<u64>().unwrap();
        if ratio >= 10 {
            assert!(ep[8].parse::<u64>().unwrap() <= eb[8].parse::<u64>().unwrap());
        }
    }
    let b = bench(d.path(), MATRIX, "b.csv");
    let digests = |t: &[Vec<String>]| t.iter().map(|r| r[15].clone()).collect::<Vec<_>>();
    assert_eq!(digests(&a), digests(&b));
}

#[test]
fn bench_marks_timeouts() {
    let d = tempfile::tempdir().unwrap();
    let m = "time_limit_secs = 1e-9\n[[cell]]\nkind = \"sf\"\nn = [3000]\nalgorithms = [\"ep\", \"eb\"]\n";
    let rows = bench(d.path(), m, "t.csv");
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert_eq!(r[6], "timeout");
        assert!(r[7..].iter().all(|x| x == "-"));
    }
}

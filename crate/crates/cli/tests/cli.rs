use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use transplan::netmodel::{load_network, load_request, validate_request};
use transplan::plan::Plan;

const D1: &str = r#"{"sites":[{"id":"S"},{"id":"M"},{"id":"T"}],"links":[
    {"id":"S-M","from":"S","to":"M","weight":2},
    {"id":"M-T","from":"M","to":"T","weight":2},
    {"id":"S-T","from":"S","to":"T","weight":5}]}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_transplan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn file(&self, name: &str, contents: &str) -> PathBuf {
        let path = self.dir.path().join(name);
        fs::write(&path, contents).unwrap();
        path
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn request(files: &[&str]) -> String {
    let demands: Vec<String> = files
        .iter()
        .map(|f| format!(r#"{{"id":"{f}","size":1,"origins":["S"]}}"#))
        .collect();
    format!(r#"{{"destination":"T","demands":[{}]}}"#, demands.join(","))
}

fn without_timestamps(manifest: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(manifest).unwrap();
    let obj = v.as_object_mut().unwrap();
    obj.remove("started_at");
    obj.remove("wall_time_ms");
    v
}

#[test]
fn solve_writes_four_files() {
    let ws = Workspace::new();
    let net = ws.file("net.json", D1);
    let req = ws.file("req.json", &request(&["f1"]));
    let out = ws.path("out");
    let o = run(&[
        "solve",
        "--network",
        s(&net),
        "--request",
        s(&req),
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("makespan 4\n"));
    assert!(stdout(&o).contains("best found after"));
    let mut files: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    files.sort();
    assert_eq!(
        files,
        ["manifest.json", "plan.json", "schedule.csv", "trace.csv"]
    );

    // Outputs re-validate when read back.
    let network = load_network(D1).unwrap();
    let normalized = validate_request(&network, &load_request(&request(&["f1"])).unwrap()).unwrap();
    let plan = Plan::from_json(&fs::read_to_string(out.join("plan.json")).unwrap()).unwrap();
    plan.check_against(&network, &normalized).unwrap();
    let schedule = fs::read_to_string(out.join("schedule.csv")).unwrap();
    assert_eq!(
        schedule,
        "demand,link,start,end\nf1,S-M,0,2\nf1,M-T,2,4\n# makespan 4\n"
    );
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(trace.starts_with("ms,makespan\n"));
    assert!(trace.trim_end().ends_with(",4"));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "solve");
    assert_eq!(manifest["options"]["status"], "optimal");
}

#[test]
fn missing_file_is_an_input_error() {
    let ws = Workspace::new();
    let net = ws.file("net.json", D1);
    let missing = ws.path("nope.json");
    let out = ws.path("out");
    let o = run(&[
        "solve",
        "--network",
        s(&net),
        "--request",
        s(&missing),
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no such file"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn malformed_input_is_an_input_error() {
    let ws = Workspace::new();
    let net = ws.file("net.json", "{\"sites\": [");
    let req = ws.file("req.json", &request(&["f1"]));
    let o = run(&[
        "solve",
        "--network",
        s(&net),
        "--request",
        s(&req),
        "--out",
        s(&ws.path("o")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("parse error"));
}

#[test]
fn bad_flag_is_a_usage_error() {
    let o = run(&["solve", "--heuristic", "bogus"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unroutable_demand_is_infeasible() {
    let ws = Workspace::new();
    let net = ws.file("net.json", D1);
    let req = ws.file(
        "req.json",
        r#"{"destination":"S","demands":[{"id":"lonely","size":1,"origins":["T"]}]}"#,
    );
    let o = run(&[
        "solve",
        "--network",
        s(&net),
        "--request",
        s(&req),
        "--out",
        s(&ws.path("o")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lonely"), "{}", stderr(&o));
}

#[test]
fn node_limited_solves_are_reproducible() {
    let ws = Workspace::new();
    let gen = ws.path("gen");
    assert!(
        run(&["gen", "--size", "30", "--seed", "4", "--out", s(&gen)])
            .status
            .success()
    );
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = ws.path(&format!("run{k}"));
        let o = run(&[
            "solve",
            "--network",
            s(&gen.join("network.json")),
            "--request",
            s(&gen.join("request.json")),
            "--heuristic",
            "fastestlink",
            "--value-order",
            "inc",
            "--node-limit",
            "20000",
            "--time-limit",
            "600",
            "--out",
            s(&out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let read = |n: &str| fs::read_to_string(out.join(n)).unwrap();
        let trace_values: Vec<String> = read("trace.csv")
            .lines()
            .map(|l| l.split(',').nth(1).unwrap().to_string())
            .collect();
        outputs.push((
            read("plan.json"),
            read("schedule.csv"),
            trace_values,
            without_timestamps(&read("manifest.json")),
        ));
    }
    assert_eq!(outputs[0].0, outputs[1].0);
    assert_eq!(outputs[0].1, outputs[1].1);
    assert_eq!(outputs[0].2, outputs[1].2);
    assert_eq!(outputs[0].3, outputs[1].3);
}

#[test]
fn p2p_uses_direct_links_only() {
    let ws = Workspace::new();
    let net = ws.file("net.json", D1);
    let req = ws.file("req.json", &request(&["f1", "f2"]));
    let out = ws.path("p2p");
    let o = run(&[
        "p2p",
        "--network",
        s(&net),
        "--request",
        s(&req),
        "--seed",
        "3",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "makespan 10\n");
    let csv = fs::read_to_string(out.join("transfers.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[1].ends_with(",S-T,0,5") && lines[2].ends_with(",S-T,5,10"));
    assert_eq!(lines[3], "# makespan 10");
    assert!(out.join("manifest.json").exists());

    // Equally rare files are ordered by the seed, reproducibly.
    let again = ws.path("again");
    run(&[
        "p2p",
        "--network",
        s(&net),
        "--request",
        s(&req),
        "--seed",
        "3",
        "--out",
        s(&again),
    ]);
    assert_eq!(
        fs::read_to_string(again.join("transfers.csv")).unwrap(),
        csv
    );
}

#[test]
fn p2p_without_direct_link_is_infeasible() {
    let ws = Workspace::new();
    let net = ws.file(
        "net.json",
        r#"{"sites":[{"id":"S"},{"id":"M"},{"id":"T"}],"links":[
        {"id":"S-M","from":"S","to":"M","weight":2},
        {"id":"M-T","from":"M","to":"T","weight":2}]}"#,
    );
    let req = ws.file("req.json", &request(&["f1"]));
    let o = run(&[
        "p2p",
        "--network",
        s(&net),
        "--request",
        s(&req),
        "--out",
        s(&ws.path("o")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("f1"));
}

#[test]
fn simulate_compares_with_the_schedule() {
    let ws = Workspace::new();
    let net = ws.file("net.json", D1);
    let req = ws.file("req.json", &request(&["f1", "f2"]));
    let solved = ws.path("solved");
    let o = run(&[
        "solve",
        "--network",
        s(&net),
        "--request",
        s(&req),
        "--out",
        s(&solved),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("makespan 5\n"));

    let sim = ws.path("sim");
    let o = run(&[
        "simulate",
        "--network",
        s(&net),
        "--plan",
        s(&solved.join("plan.json")),
        "--schedule",
        s(&solved.join("schedule.csv")),
        "--out",
        s(&sim),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "makespan 5\nschedule makespan 5\ngap 0.0000\n");
    assert!(sim.join("execution.csv").exists());
    assert!(sim.join("manifest.json").exists());
}

#[test]
fn simulate_stream_override() {
    let ws = Workspace::new();
    let net = ws.file("net.json", D1);
    let plan = ws.file(
        "plan.json",
        r#"{"destination":"T","routes":[
        {"demand":"f1","size":"1","origin":"S","links":["S-M","M-T"]},
        {"demand":"f2","size":"1","origin":"S","links":["S-M","M-T"]}]}"#,
    );
    let one = run(&[
        "simulate",
        "--network",
        s(&net),
        "--plan",
        s(&plan),
        "--out",
        s(&ws.path("a")),
    ]);
    assert!(one.status.success(), "{}", stderr(&one));
    assert_eq!(
        stdout(&one),
        "makespan 6\nschedule makespan 6\ngap 0.0000\n"
    );
    let two = run(&[
        "simulate",
        "--network",
        s(&net),
        "--plan",
        s(&plan),
        "--max-streams",
        "2",
        "--out",
        s(&ws.path("b")),
    ]);
    assert!(two.status.success());
    assert!(stdout(&two).starts_with("makespan 4\nschedule makespan 6\n"));
}

#[test]
fn shared_groups_are_applied() {
    let ws = Workspace::new();
    let net = ws.file(
        "net.json",
        r#"{"sites":[{"id":"A"},{"id":"B"},{"id":"T"}],"links":[
        {"id":"A-T","from":"A","to":"T","weight":3},
        {"id":"B-T","from":"B","to":"T","weight":3}],
        "shared_groups":[{"site":"T","side":"incoming","members":["A-T","B-T"],"limit":2}]}"#,
    );
    let req = ws.file(
        "req.json",
        r#"{"destination":"T","demands":[
        {"id":"a","size":1,"origins":["A"]},{"id":"b","size":1,"origins":["B"]}]}"#,
    );
    let out = ws.path("o");
    let o = run(&[
        "solve",
        "--network",
        s(&net),
        "--request",
        s(&req),
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    // Both files funnel through the shared 2-unit segment.
    assert!(stdout(&o).starts_with("makespan 5\n"), "{}", stdout(&o));
    let sim = run(&[
        "simulate",
        "--network",
        s(&net),
        "--plan",
        s(&out.join("plan.json")),
        "--out",
        s(&ws.path("sim")),
    ]);
    assert!(sim.status.success(), "{}", stderr(&sim));
    assert!(stdout(&sim).starts_with("makespan 5\n"));
}

#[test]
fn gen_is_seeded() {
    let ws = Workspace::new();
    let (a, b, c) = (ws.path("a"), ws.path("b"), ws.path("c"));
    for (dir, seed) in [(&a, "7"), (&b, "7"), (&c, "8")] {
        let o = run(&["gen", "--size", "40", "--seed", seed, "--out", s(dir)]);
        assert!(o.status.success());
    }
    let read = |d: &Path| fs::read_to_string(d.join("request.json")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    let req = load_request(&read(&a)).unwrap();
    assert_eq!(req.demands.len(), 40);
    assert_eq!(req.destination, "Prague");
    load_network(&fs::read_to_string(a.join("network.json")).unwrap()).unwrap();
}

#[test]
fn bench_writes_table_and_runs() {
    let ws = Workspace::new();
    let out = ws.path("bench");
    let o = run(&[
        "bench",
        "--sizes",
        "5,8",
        "--seeds",
        "1",
        "--time-limit",
        "2",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(out.join("table.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(
        lines[0],
        "size,seed,heuristic,makespan,best_ms,status,p2p_makespan,exec_makespan,exec_gap"
    );
    assert_eq!(lines.len(), 1 + 2 * 2);
    for row in &lines[1..] {
        let cols: Vec<&str> = row.split(',').collect();
        let cp: f64 = cols[3].parse().unwrap();
        let p2p: f64 = cols[6].parse().unwrap();
        assert!(cp <= p2p, "{row}");
    }
    for run in [
        "n5-s1-minpath",
        "n5-s1-fastestlink",
        "n8-s1-minpath",
        "n8-s1-fastestlink",
    ] {
        for f in ["plan.json", "schedule.csv", "trace.csv", "manifest.json"] {
            assert!(out.join(run).join(f).exists(), "{run}/{f}");
        }
    }
    assert!(out.join("manifest.json").exists());
}

#[test]
fn empty_bench_is_an_empty_table() {
    let ws = Workspace::new();
    let out = ws.path("bench");
    let o = run(&["bench", "--sizes", "", "--seeds", "1", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(out.join("table.csv")).unwrap();
    assert_eq!(table.lines().count(), 1);
}

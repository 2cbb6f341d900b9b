use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn slaq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slaq")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(path: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn descriptor_of_single_edge_has_zero_entropy() {
    let dir = tempfile::tempdir().unwrap();
    let k2 = write(dir.path(), "k2.tsv", "0\t1\n");
    let out = dir.path().join("k2.json");
    let out = out.to_str().unwrap();
    let r = slaq(&["descriptor", "--input", &k2, "--kind", "vnge", "--method", "exact", "--output", out]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let v = json(out);
    assert_eq!(v["value"].as_f64().unwrap(), 0.0);
    assert_eq!(v["kind"], "vnge");
    assert_eq!(v["method"], "exact");
    assert_eq!(v["graph_hash"].as_str().unwrap().len(), 64);
    assert_eq!(v["config"]["resolved"]["slq"]["n_v"], 100);
    assert_eq!(v["config"]["resolved"]["k"], 300);
}

#[test]
fn slaq_descriptor_records_seed_and_grid() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", "0 1\n1 2\n2 3\n3 0\n0 2\n");
    let out = dir.path().join("d.json");
    let out = out.to_str().unwrap();
    let r = slaq(&["descriptor", "--input", &g, "--seed", "42", "--d", "8", "--output", out]);
    assert!(r.status.success());
    let v = json(out);
    assert_eq!(v["kind"], "netlsd");
    assert_eq!(v["seed"], 42);
    assert_eq!(v["params"]["n_v"], 100);
    assert_eq!(v["grid"]["values"].as_array().unwrap().len(), 8);
    assert_eq!(v["values"].as_array().unwrap().len(), 8);
}

#[test]
fn compare_identical_graphs_prints_zero() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.tsv", "0 1\n1 2\n2 0\n2 3\n");
    let r = slaq(&["compare", "--a", &g, "--b", &g, "--kind", "netlsd", "--method", "exact"]);
    assert!(r.status.success());
    assert_eq!(String::from_utf8(r.stdout).unwrap(), "0\n");
}

#[test]
fn generate_dense_er_is_complete() {
    let r = slaq(&["generate", "er", "--n", "5", "--avg-degree", "4", "--seed", "1"]);
    assert!(r.status.success());
    let text = String::from_utf8(r.stdout).unwrap();
    assert_eq!(text.lines().count(), 10);
    let g = slaq::graph_io::parse_edge_list_str(&text).unwrap();
    assert_eq!(g, slaq::Graph::complete(5).unwrap());
}

#[test]
fn reads_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_slaq"))
        .args(["descriptor", "--input", "-", "--kind", "vnge", "--method", "exact"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"0 1\n2 3\n").unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    assert_eq!(slaq(&["--help"]).status.code(), Some(0));
    assert_eq!(slaq(&["descriptor", "--unknown-flag"]).status.code(), Some(1));
    assert_eq!(slaq(&["descriptor"]).status.code(), Some(1));
    assert_eq!(slaq(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(slaq(&["descriptor", "--input", "/does/not/exist"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.tsv", "0 1\n1 x\n");
    let r = slaq(&["descriptor", "--input", &bad]);
    assert_eq!(r.status.code(), Some(2));
    let msg = String::from_utf8(r.stderr).unwrap();
    assert!(msg.contains("bad.tsv") && msg.contains("line 2"), "{msg}");

    let empty = write(dir.path(), "empty.tsv", "0 0\n");
    let r = slaq(&["descriptor", "--input", &empty, "--kind", "vnge", "--method", "exact"]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn help_lists_flags_with_defaults() {
    let text = String::from_utf8(slaq(&["descriptor", "--help"]).stdout).unwrap();
    for needle in [
        "--input",
        "--kind",
        "--method",
        "--n-v",
        "[default: 100]",
        "--steps",
        "[default: 10]",
        "--seed",
        "--distribution",
        "--t-min",
        "[default: 0.01]",
        "--t-max",
        "[default: 100]",
        "--d ",
        "[default: 256]",
        "--k ",
        "[default: 300]",
        "--output",
        "--format",
        "--threads",
    ] {
        assert!(text.contains(needle), "help is missing {needle:?}:\n{text}");
    }
}

#[test]
fn bench_error_csv() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.tsv", "0 1\n1 2\n2 0\n");
    let b = write(dir.path(), "b.tsv", "0 1\n1 2\n2 3\n");
    let out = dir.path().join("err.csv");
    let out = out.to_str().unwrap();
    let r = slaq(&[
        "bench-error", "--input", &a, &b, "--methods", "exact,taylor", "--d", "4", "--output", out,
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let text = std::fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "graph,method,kind,rel_error,seconds");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].contains(",exact,netlsd,0,"));
    let config = json(&format!("{out}.config.json"));
    assert_eq!(config["subcommand"], "bench-error");

    let r = slaq(&["bench-error", "--input", &a, "--methods", "linear", "--kind", "vnge"]);
    assert_eq!(r.status.code(), Some(1));
}

#[test]
fn classify_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let mut manifest = String::new();
    for i in 0..6 {
        let path = write(dir.path(), &format!("path{i}.tsv"), &(0..4 + i).map(|v| format!("{v} {}\n", v + 1)).collect::<String>());
        manifest.push_str(&format!("{}\tpath\n", Path::new(&path).file_name().unwrap().to_str().unwrap()));
        let k = 4 + i;
        let edges: String = (0..k).flat_map(|u| (u + 1..k).map(move |v| format!("{u} {v}\n"))).collect();
        write(dir.path(), &format!("clique{i}.tsv"), &edges);
        manifest.push_str(&format!("clique{i}.tsv\tclique\n"));
    }
    let m = write(dir.path(), "manifest.tsv", &manifest);
    let r = slaq(&["classify", "--manifest", &m, "--kind", "vnge", "--method", "exact", "--repeats", "50"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let text = String::from_utf8(r.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "dataset,kind,method,mean_acc,std,repeats");
    let row: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(&row[1..3], ["vnge", "exact"]);
    assert_eq!(row[5], "50");
    let acc: f64 = row[3].parse().unwrap();
    assert!((0.0..=1.0).contains(&acc));
}

#[test]
fn snapshots_csv() {
    let dir = tempfile::tempdir().unwrap();
    let ev = write(dir.path(), "events.txt", "0 add 0 1\n0 add 2 3\n0 del 2 3\n1 add 2 3\n");
    let r = slaq(&["snapshots", "--input", &ev, "--kind", "vnge", "--method", "exact"]);
    assert!(r.status.success());
    let text = String::from_utf8(r.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,distance,added,removed");
    assert_eq!(lines[1], "0,0,2,1");
    let row: Vec<&str> = lines[2].split(',').collect();
    assert!((row[1].parse::<f64>().unwrap() - 2f64.ln()).abs() < 1e-12);
    assert_eq!(&row[2..], ["3", "1"]);

    let r = slaq(&["snapshots", "--input", &ev, "--kind", "vnge", "--method", "exact", "--normalize"]);
    assert!(String::from_utf8(r.stdout).unwrap().lines().nth(2).unwrap().starts_with("1,1,"));
}

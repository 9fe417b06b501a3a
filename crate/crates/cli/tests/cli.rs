use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn xolap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xolap")).args(args).output().expect("binary runs")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn query_prints_grouped_projects() {
    let (xml, schema, q1) = (data("projects.xml"), data("projects.toml"), data("q1.query"));
    let out = xolap(&["query", "--in", arg(&xml), "--schema", arg(&schema), "--q", arg(&q1)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    for (team, sum) in [("1-2", "1000"), ("2-3", "1500"), ("4", "500"), ("Other", "100")] {
        assert!(text.contains(&format!("<lvl name=\"Team\" v=\"{team}\">")), "{text}");
        assert!(text.contains(&format!("<agg fn=\"sum\" measure=\"cost\" v=\"{sum}\"/>")));
    }
    let again = xolap(&["query", "--in", arg(&xml), "--schema", arg(&schema), "--q", arg(&q1), "--linear-scan"]);
    assert_eq!(again.stdout, text.as_bytes());
}

#[test]
fn rollup_chains_stages() {
    let (xml, schema) = (data("projects.xml"), data("projects.toml"));
    let out = xolap(&[
        "rollup", "--in", arg(&xml), "--schema", arg(&schema), "--q", arg(&data("q1.query")), "--q",
        arg(&data("q2.query")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("<lvl name=\"Branch\" v=\"I-II\"/>"), "{text}");
    assert!(text.contains("v=\"2500\""));
    assert_eq!(text.matches("<fact>").count(), 3);
}

#[test]
fn validate_reports_sites() {
    let out = xolap(&["validate", "--in", arg(&data("projects.xml")), "--schema", arg(&data("projects.toml"))]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "NONSTRICT project Project /w/fact[1]/dim[project]/Project[A]\n\
         NONSTRICT project Project /w/fact[2]/dim[project]/Project[B]\n\
         INCOMPLETE project Team /w/fact[4]/dim[project]/Project[D]\n"
    );
}

#[test]
fn generate_normalize_validate() {
    let dir = tempfile::tempdir().unwrap();
    let (xml, schema, ledger) = (dir.path().join("w.xml"), dir.path().join("w.toml"), dir.path().join("inj.txt"));
    let out = xolap(&[
        "generate", "--facts", "300", "--kind", "complex", "--pct", "20", "--seed", "7", "--out", arg(&xml),
        "--schema", arg(&schema), "--emit-ledger", arg(&ledger),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(&ledger).unwrap().lines().count(), 300 * 4 / 5);

    let report = xolap(&["validate", "--in", arg(&xml), "--schema", arg(&schema)]);
    assert!(!report.stdout.is_empty());

    let normalized = dir.path().join("n.xml");
    let actions = dir.path().join("actions.txt");
    let out = xolap(&[
        "normalize", "--in", arg(&xml), "--schema", arg(&schema), "--out", arg(&normalized), "--emit-ledger",
        arg(&actions),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(fs::read_to_string(&actions).unwrap().lines().count() > 0);
    let clean = xolap(&["validate", "--in", arg(&normalized), "--schema", arg(&schema)]);
    assert_eq!(clean.status.code(), Some(0));
    assert!(clean.stdout.is_empty(), "{}", String::from_utf8_lossy(&clean.stdout));

    let again = dir.path().join("again.xml");
    xolap(&["generate", "--facts", "300", "--kind", "complex", "--pct", "20", "--seed", "7", "--out", arg(&again)]);
    assert_eq!(fs::read(&xml).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn bench_writes_gated_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.toml");
    fs::write(&config, "facts = [300]\nkinds = [\"complex\"]\npcts = [20]\nqueries = [\"2D\"]\nseed = 1\n").unwrap();
    let csv = dir.path().join("bench.csv");
    let out = xolap(&["bench", "--config", arg(&config), "--out", arg(&csv)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("config_id,facts,kind,pct,query,mode,rep,phase,millis"));
    assert_eq!(lines.count(), 18);
}

#[test]
fn exit_codes() {
    // Usage errors.
    assert_eq!(xolap(&[]).status.code(), Some(2));
    assert_eq!(xolap(&["query", "--in", "x.xml"]).status.code(), Some(2));
    let missing = xolap(&["validate", "--in", "/nonexistent.xml", "--schema", arg(&data("projects.toml"))]);
    assert_eq!(missing.status.code(), Some(2));

    // Domain errors.
    let dir = tempfile::tempdir().unwrap();
    let bad_query = dir.path().join("bad.query");
    fs::write(&bad_query, "agg sum(cost)\n").unwrap();
    let out = xolap(&[
        "query", "--in", arg(&data("projects.xml")), "--schema", arg(&data("projects.toml")), "--q",
        arg(&bad_query),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("query syntax error"));

    let bad_xml = dir.path().join("bad.xml");
    fs::write(&bad_xml, "<w><msr name=\"cost\" v=\"1\"/></w>").unwrap();
    let out = xolap(&["validate", "--in", arg(&bad_xml), "--schema", arg(&data("projects.toml"))]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(xolap(&["generate", "--kind", "weird"]).status.code(), Some(1));
}

use std::io::Cursor;
use std::process::{Command, Stdio};
use std::io::Write as _;

use antichain_cli::{run, EXIT_CERTIFICATE, EXIT_DECODE, EXIT_INVALID, EXIT_OK};

fn antichain(args: &[&str], stdin: &str) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("antichain").chain(args.iter().copied());
    let code = run(argv, &mut Cursor::new(stdin.as_bytes()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn temp_file(name: &str, contents: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("antichain-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn plan_constant_rows() {
    let (code, out, _) = antichain(&["plan", "--family", "constant", "--n0", "3", "--kmax", "10", "--format", "csv"], "");
    assert_eq!(code, EXIT_OK);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 9);
    for (j, row) in rows.iter().enumerate() {
        let k = j as u32 + 2;
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[1], (k + 1).to_string());
        assert_eq!(fields[2], "1");
    }
}

#[test]
fn plan_rejects_ratio_violation_with_index() {
    let path = temp_file("bad.csv", "n,f_n\n3,1\n4,2\n5,5\n#extend=constant\n");
    let (code, _, err) = antichain(&["plan", "--table", path.to_str().unwrap()], "");
    assert_eq!(code, EXIT_INVALID);
    assert!(err.contains("n=4"), "{err}");
}

#[test]
fn plan_for_corollary_reports_kraft_certificate() {
    let (code, out, _) = antichain(&["plan", "--family", "corollary", "--eps", "1", "--nmax", "200"], "");
    assert_eq!(code, EXIT_OK);
    assert!(out.lines().last().unwrap().starts_with("PASS claim1"));
}

#[test]
fn malformed_table_and_conflicting_flags_are_invalid() {
    let path = temp_file("gap.csv", "n,f_n\n3,1\n5,1\n#extend=constant\n");
    let (code, _, err) = antichain(&["count", "--table", path.to_str().unwrap()], "");
    assert_eq!(code, EXIT_INVALID);
    assert!(err.contains("consecutive"), "{err}");
    let (code, _, _) = antichain(&["count", "--family", "constant", "--table", path.to_str().unwrap()], "");
    assert_eq!(code, EXIT_INVALID);
    let (code, _, _) = antichain(&["count", "--family", "corollary", "--eps", "0"], "");
    assert_eq!(code, EXIT_INVALID);
    let (code, _, _) = antichain(&["count", "--nmax", "2"], "");
    assert_eq!(code, EXIT_INVALID);
    let (code, _, _) = antichain(&["frobnicate"], "");
    assert_eq!(code, EXIT_INVALID);
}

#[test]
fn generate_examples() {
    let (code, out, _) = antichain(&["generate", "--family", "constant", "--nmax", "5"], "");
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "111\n1011\n10011\n");
    let (_, out, _) = antichain(&["generate", "--nmax", "3"], "");
    assert_eq!(out, "111\n");
    let (_, out, _) = antichain(&["generate", "--nmax", "5", "--sets"], "");
    assert_eq!(out, "{1,2,3}\n{1,3,4}\n{1,4,5}\n");
    let (_, out, _) = antichain(&["generate", "--nmax", "4", "--format", "jsonl"], "");
    assert_eq!(out, "{\"k\":2,\"i\":1,\"set\":[1,2,3]}\n{\"k\":3,\"i\":1,\"set\":[1,3,4]}\n");
}

#[test]
fn generate_refuses_above_cap() {
    let (code, out, err) = antichain(&["generate", "--family", "corollary", "--nmax", "40"], "");
    assert_eq!(code, EXIT_INVALID);
    assert!(out.is_empty());
    assert!(err.contains("exceeds the cap") && err.contains("count"), "{err}");
}

#[test]
fn count_rows_and_bounds() {
    let (code, out, _) = antichain(&["count", "--nmax", "6"], "");
    assert_eq!(code, EXIT_OK);
    let counts: Vec<&str> = out.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(counts, ["1", "2", "3", "4"]);

    let (code, out, _) = antichain(&["count", "--family", "corollary", "--nmax", "200"], "");
    assert_eq!(code, EXIT_OK);
    for line in out.lines().skip(1) {
        let v: Vec<num_bigint::BigUint> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(v[1] >= v[3] && v[3] >= v[2], "{line}");
    }
    assert!(out.lines().last().unwrap().starts_with("200,"));
}

#[test]
fn verify_passes_and_detects_tampering() {
    let (code, out, _) = antichain(&["verify", "--family", "constant", "--nmax", "14"], "");
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.lines().all(|l| l.starts_with("PASS")));

    let (code, out, _) = antichain(&["verify", "--nmax", "14", "--tamper-block", "3", "--format", "jsonl"], "");
    assert_eq!(code, EXIT_CERTIFICATE);
    let failed: Vec<serde_json::Value> = out
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .filter(|v: &serde_json::Value| v["verdict"] == "fail")
        .collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|v| v.get("witness").is_some()));

    let (code, _, _) = antichain(&["verify", "--nmax", "3"], "");
    assert_eq!(code, EXIT_OK);
}

#[test]
fn generated_streams_pass_the_antichain_checker() {
    for family in [
        vec!["--family", "constant"],
        vec!["--family", "corollary"],
        vec!["--family", "random", "--seed", "7"],
    ] {
        for format in ["text", "jsonl", "csv"] {
            let mut args = vec!["generate", "--nmax", "14", "--format", format];
            args.extend(&family);
            let (code, stream, _) = antichain(&args, "");
            assert_eq!(code, EXIT_OK);
            let (code, out, _) = antichain(&["verify", "--elements", "-"], &stream);
            assert_eq!(code, EXIT_OK, "{family:?} {format}: {out}");
        }
    }
    let (code, out, _) = antichain(&["verify", "--elements", "-", "--format", "jsonl"], "1\n1 2\n");
    assert_eq!(code, EXIT_CERTIFICATE);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["witness"]["subset"], serde_json::json!([1]));
    assert_eq!(v["witness"]["superset"], serde_json::json!([1, 2]));
}

#[test]
fn decode_examples() {
    let (code, out, _) = antichain(&["decode", "--family", "constant"], "1 3 4\n\n1 2 3 4\n");
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "k=3 i=1\nnot a member\nnot a member\n");

    let (code, out, _) = antichain(&["decode"], "1 3 4\n4 2\n0 2\n{1,2,3}\n");
    assert_eq!(code, EXIT_DECODE);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "k=3 i=1");
    assert!(lines[1].starts_with("error"));
    assert!(lines[2].starts_with("error"));
    assert_eq!(lines[3], "k=2 i=1");
}

#[test]
fn codewords_dump() {
    let (_, out, _) = antichain(&["codewords", "--kmax", "5"], "");
    assert_eq!(out, "11\n101\n1001\n10001\n");
    let (_, out, _) = antichain(&["codewords", "--kmax", "3", "--annotate"], "");
    assert_eq!(out, "2,1,11\n3,1,101\n");
}

#[test]
fn binary_output_is_deterministic() {
    let bin = env!("CARGO_BIN_EXE_antichain");
    let args = ["generate", "--family", "random", "--seed", "3", "--nmax", "13", "--format", "jsonl"];
    let first = Command::new(bin).args(args).output().unwrap();
    let second = Command::new(bin).args(args).output().unwrap();
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    assert!(!first.stdout.is_empty());

    let mut child = Command::new(bin)
        .args(["decode"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"1 3 4\nnope\n").unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_DECODE));
}

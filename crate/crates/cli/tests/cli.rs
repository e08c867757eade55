use std::path::PathBuf;
use std::process::{Command, Output};

fn altprod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_altprod"))
        .args(args)
        .env_remove("ALTPROD_REGISTRY")
        .output()
        .expect("run altprod")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn temp_file(name: &str, text: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("altprod-{}-{name}", std::process::id()));
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn list_shows_registry_ids() {
    let o = altprod(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for id in ["KT1", "KT4", "MELZAK", "CS_RATIO", "LERCH_CATALAN"] {
        assert!(out.lines().any(|l| l.starts_with(id)), "{id} missing");
    }
    let o = altprod(&["list", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v.as_array().unwrap().len() >= 20);
}

#[test]
fn eval_prints_truncated_digits() {
    let o = altprod(&["eval", "pi*e/2", "--digits", "30"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "4.26986711133678353273177543477");
}

#[test]
fn verify_json_report() {
    let o = altprod(&["verify", "KT3", "--digits", "40", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let keys = ["\"id\"", "\"lhs\"", "\"rhs\"", "\"agreement_digits\"", "\"target_digits\"", "\"terms_used\"", "\"method\"", "\"elapsed_ms\"", "\"pass\""];
    let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap_or_else(|| panic!("{k}"))).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]), "{text}");
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["pass"], true);
    assert!(v["agreement_digits"].as_i64().unwrap() >= 40);
    assert!(v.get("reason").is_none());
}

#[test]
fn exit_codes() {
    assert_eq!(altprod(&["eval", "1 +"]).status.code(), Some(2));
    assert_eq!(altprod(&["eval", "2pi"]).status.code(), Some(2));
    assert_eq!(altprod(&["verify", "NO_SUCH_ID"]).status.code(), Some(2));
    assert_eq!(altprod(&["verify"]).status.code(), Some(2));
    assert_eq!(altprod(&["eval", "ln(0)"]).status.code(), Some(3));
    let reg = temp_file("fail.txt", "id = CRUDE\nlhs = expr 22/7\nrhs = pi\n");
    let o = altprod(&["--registry", reg.to_str().unwrap(), "verify", "all", "--digits", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
    let _ = std::fs::remove_file(reg);
}

#[test]
fn parse_errors_point_at_the_offset() {
    let o = altprod(&["eval", "1 + foo"]);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("byte 4"), "{err}");
}

#[test]
fn table_rows() {
    let o = altprod(&["table", "KT3", "--n", "1,10,100", "--digits", "30", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0]["partial"], "1.08000000000000000000000000000");
    assert_eq!(rows[1]["digits"], 4);
}

#[test]
fn limit_of_a_spec_file() {
    let spec = temp_file("spec.txt", "name = D_HALF\nfactor = 1 + (1/2)/k\nexponent = k*(-1)^(k+1)\nupper = 2n+1\n");
    let o = altprod(&["limit", "--spec", spec.to_str().unwrap(), "--digits", "30"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("1.54912659257756216836957253384"));
    let o = altprod(&["limit", "BD_D(1/2)", "--digits", "30"]);
    assert!(stdout(&o).starts_with("1.54912659257756216836957253384"));
    let _ = std::fs::remove_file(spec);
}

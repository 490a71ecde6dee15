use std::process::Command;

fn harmonica(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_harmonica")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn verify_passes_for_a_catenoid() {
    let (code, text) =
        harmonica(&["--json", "verify", "--family", "catenoid", "--alpha=-3+3i", "--beta=-1-i", "--points", "500"]);
    assert_eq!(code, 0, "{text}");
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["pass"], true);
    assert!(v["curvature"]["total_curvature"].as_f64().unwrap() < -12.5);
}

#[test]
fn verify_fails_off_the_rotational_predicate() {
    let (code, text) = harmonica(&["--json", "verify", "--family", "rotational", "--b=-1", "--points", "200"]);
    assert_eq!(code, 1, "{text}");
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["pass"], false);
    assert_eq!(v["immersion"]["pass"], false);
}

#[test]
fn periods_json_and_bad_parameter() {
    let (code, text) = harmonica(&["--json", "periods", "--sweep", "0.2:0.8:4"]);
    assert_eq!(code, 0, "{text}");
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(v["trend"], "decreasing");
    for r in rows {
        let b = r["b"].as_f64().unwrap();
        assert!(b > -2.0 && b < 0.0);
    }

    let (code, text) = harmonica(&["--json", "periods", "--a", "1.5"]);
    assert_eq!(code, 2);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["exit_code"], 2);
}

#[test]
fn generate_writes_the_requested_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("horn.csv");
    let p = path.to_str().unwrap();
    let (code, text) = harmonica(&["--json", "generate", "--family", "horn", "--grid", "8x12", "--out", p]);
    assert_eq!(code, 0, "{text}");
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["vertices"], 96);
    let csv = std::fs::read_to_string(&path).unwrap();
    assert_eq!(csv.lines().count(), 97);
}

#[test]
fn invalid_family_is_rejected_before_sampling() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("f.obj");
    let (code, _) =
        harmonica(&["generate", "--family", "flujo", "--b", "2", "--c", "0", "--out", p.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(!p.exists());
}

#[test]
fn unknown_arguments_exit_2() {
    assert_eq!(harmonica(&["verify", "--family", "nonesuch"]).0, 2);
    assert_eq!(harmonica(&["frobnicate"]).0, 2);
}

use std::ffi::{CStr, CString};
use std::ptr;

use harmonica_ffi::*;

fn family(json: &str) -> *mut HarmFamily {
    let s = CString::new(json).unwrap();
    let mut f = ptr::null_mut();
    let st = unsafe { harm_family_new(s.as_ptr(), &mut f) };
    assert_eq!(st, HarmStatus::Ok, "{}", last_error());
    f
}

fn last_error() -> String {
    let p = harm_last_error();
    if p.is_null() {
        String::new()
    } else {
        unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
    }
}

#[test]
fn plane_phi_and_margin() {
    let f = family(r#"{"family":"plane"}"#);
    let mut phi = [0.0; 6];
    let mut m = 0.0;
    unsafe {
        assert_eq!(harm_eval_phi(f, 0.3, -0.2, 1, phi.as_mut_ptr()), HarmStatus::Ok);
        assert_eq!(harm_immersion_margin(f, 0.3, -0.2, 1, &mut m), HarmStatus::Ok);
        assert_eq!(harm_family_sheets(f), 1);
        harm_family_free(f);
    }
    assert_eq!(phi, [1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    assert!((m - 2.0).abs() < 1e-15);
}

#[test]
fn invalid_parameters_are_reported() {
    let s = CString::new(r#"{"family":"rotational","params":{"b":"-1+0i"}}"#).unwrap();
    let mut f = ptr::null_mut();
    let st = unsafe { harm_family_new(s.as_ptr(), &mut f) };
    assert_eq!(st, HarmStatus::InvalidArgument);
    assert!(f.is_null());
    assert!(last_error().contains("rotational"));

    let bad = CString::new("{not json").unwrap();
    assert_eq!(unsafe { harm_family_new(bad.as_ptr(), &mut f) }, HarmStatus::InvalidArgument);
    assert_eq!(unsafe { harm_family_new(ptr::null(), &mut f) }, HarmStatus::NullPointer);
    let mut b = 0.0;
    assert_eq!(unsafe { harm_torus_period_b(1.5, &mut b) }, HarmStatus::InvalidArgument);
}

#[test]
fn catenoid_curvature_and_evaluation() {
    let f = family(r#"{"family":"catenoid","params":{"alpha":"-3+3i","beta":"-1-1i","r1":0,"r2":0}}"#);
    let (mut k, mut err) = (0.0, 0.0);
    let mut base = [0.0; 2];
    let mut x = [0.0; 3];
    unsafe {
        assert_eq!(harm_total_curvature(f, &mut k, &mut err), HarmStatus::Ok);
        assert_eq!(harm_basepoint(f, base.as_mut_ptr()), HarmStatus::Ok);
        // path from the basepoint around to z = 2i through the upper half plane
        let zs = [1.5, 1.0, 0.0, 2.0];
        assert_eq!(harm_evaluate(f, zs.as_ptr(), 2, x.as_mut_ptr()), HarmStatus::Ok);
        harm_family_free(f);
    }
    assert!((k + 4.0 * std::f64::consts::PI).abs() < 1e-6, "{k}");
    assert_eq!(base, [1.0, 0.0]);
    assert!(x.iter().all(|v| v.is_finite()));
}

#[test]
fn mesh_buffers_and_export() {
    let f = family(r#"{"family":"horn","params":{"r1":0,"r2":0}}"#);
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(harm_mesh_sample(f, 8, 12, &mut m), HarmStatus::Ok);
        let nv = harm_mesh_vertex_count(m);
        let nf = harm_mesh_face_count(m);
        assert_eq!(nv, 96);
        assert_eq!(nf, 2 * 7 * 12);
        let mut small = vec![0.0; 3];
        assert_eq!(harm_mesh_vertices(m, small.as_mut_ptr(), small.len()), HarmStatus::BufferTooSmall);
        let mut v = vec![0.0; 3 * nv];
        assert_eq!(harm_mesh_vertices(m, v.as_mut_ptr(), v.len()), HarmStatus::Ok);
        let mut idx = vec![0u32; 3 * nf];
        assert_eq!(harm_mesh_faces(m, idx.as_mut_ptr(), idx.len()), HarmStatus::Ok);
        assert!(idx.iter().all(|&i| (i as usize) < nv));
        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().join("horn.obj").to_str().unwrap()).unwrap();
        assert_eq!(harm_mesh_write(m, path.as_ptr(), HarmFormat::Obj), HarmStatus::Ok);
        let text = std::fs::read_to_string(dir.path().join("horn.obj")).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), nv);
        harm_mesh_free(m);
        harm_family_free(f);
    }
}

#[test]
fn verify_returns_json_report() {
    let spec = CString::new(r#"{"family":"rotational","params":{"b":"-1+0i"}}"#).unwrap();
    let mut json = ptr::null_mut();
    let mut passed = 7;
    let st = unsafe { harm_verify(spec.as_ptr(), HarmSuite::Identities, 200, 0, &mut json, &mut passed) };
    assert_eq!(st, HarmStatus::Ok, "{}", last_error());
    assert_eq!(passed, 0);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { harm_string_free(json) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["immersion"]["pass"], false);
}

#[test]
fn header_is_current() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/harmonica.h")).unwrap();
    for name in [
        "harm_family_new",
        "harm_eval_phi",
        "harm_evaluate",
        "harm_total_curvature",
        "harm_verify",
        "harm_mesh_write",
        "HARM_STATUS_NOT_IMMERSION = 1",
    ] {
        assert!(h.contains(name), "{name} missing from header");
    }
}

/// Compiles tests/c/smoke.c against the header and the static library when a C compiler and the
/// archive are available.
#[test]
fn c_program_links_and_runs() {
    let manifest = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let profile = if cfg!(debug_assertions) { "debug" } else { "release" };
    let target = std::env::var("CARGO_TARGET_DIR")
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|_| manifest.join("../../target"));
    let lib = target.join(profile).join("libharmonica_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.exists() || std::process::Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or {} missing", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = std::process::Command::new(&cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = std::process::Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok 512 -0.51796"));
}

//! C ABI over `harmonica`.
//!
//! Families and meshes are opaque handles created from JSON family specs. Every call returns a
//! `HarmStatus`; on failure `harm_last_error` holds a message for the calling thread. Panics are
//! caught at the boundary and reported as `HARM_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use harmonica::catalog::{default_mesh_grid, make_family, torus_period_b, Family, FamilySpec};
use harmonica::curvature::total_curvature;
use harmonica::domain::PathSpec;
use harmonica::mesh::{export, sample_mesh, MeshFormat, SurfaceMesh};
use harmonica::quadrature::QuadConfig;
use harmonica::report::{verify, Suite, VerifyOptions};
use harmonica::weierstrass::{evaluate_immersion, margin_of};
use harmonica::Error;
use num_complex::Complex64;

/// Result of every call. Values 1 to 4 match the exit codes of the command line tool.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HarmStatus {
    Ok = 0,
    NotImmersion = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Io = 4,
    NullPointer = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HarmFormat {
    Obj = 0,
    Ply = 1,
    Csv = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HarmSuite {
    Identities = 0,
    Ends = 1,
    Curvature = 2,
    All = 3,
}

/// Opaque catalog family.
pub struct HarmFamily {
    family: Family,
    cfg: QuadConfig,
}

/// Opaque triangle mesh.
pub struct HarmMesh {
    mesh: SurfaceMesh,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HarmStatus {
    match e.exit_code() {
        1 => HarmStatus::NotImmersion,
        2 => HarmStatus::InvalidArgument,
        4 => HarmStatus::Io,
        _ => HarmStatus::Numerical,
    }
}

enum Failure {
    Lib(Error),
    Status(HarmStatus, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn null() -> Failure {
    Failure::Status(HarmStatus::NullPointer, "null pointer argument".into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HarmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HarmStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            HarmStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure::Status(HarmStatus::InvalidArgument, "string is not UTF-8".into()))
}

unsafe fn family_ref<'a>(f: *const HarmFamily) -> Result<&'a HarmFamily, Failure> {
    f.as_ref().ok_or_else(null)
}

unsafe fn mesh_ref<'a>(m: *const HarmMesh) -> Result<&'a HarmMesh, Failure> {
    m.as_ref().ok_or_else(null)
}

/// Message of the last failed call on this thread, or NULL. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn harm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a family from a JSON spec such as `{"family":"torus","params":{"a":0.5}}`.
/// Parameters outside the validity predicate give `HARM_STATUS_INVALID_ARGUMENT`.
///
/// # Safety
/// `spec_json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn harm_family_new(spec_json: *const c_char, out: *mut *mut HarmFamily) -> HarmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        *out = ptr::null_mut();
        let spec: FamilySpec = serde_json::from_str(str_arg(spec_json)?).map_err(Error::from)?;
        let cfg = QuadConfig::default();
        let family = make_family(&spec, &cfg)?;
        *out = Box::into_raw(Box::new(HarmFamily { family, cfg }));
        Ok(())
    })
}

/// # Safety
/// `family` must come from `harm_family_new` and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn harm_family_free(family: *mut HarmFamily) {
    if !family.is_null() {
        drop(Box::from_raw(family));
    }
}

/// Number of sheets over the z-plane (2 on the torus, 1 otherwise).
///
/// # Safety
/// `family` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn harm_family_sheets(family: *const HarmFamily) -> usize {
    family.as_ref().map_or(0, |f| f.family.data().domain.sheets().len())
}

/// phi(z) on sheet `sheet` (+1 or -1, ignored off the torus), written as
/// `out = [re phi1, im phi1, re phi2, im phi2, re phi3, im phi3]`.
///
/// # Safety
/// `family` must be a live handle and `out` must hold 6 doubles.
#[no_mangle]
pub unsafe extern "C" fn harm_eval_phi(
    family: *const HarmFamily,
    re: f64,
    im: f64,
    sheet: i32,
    out: *mut f64,
) -> HarmStatus {
    guard(|| {
        let f = family_ref(family)?;
        if out.is_null() {
            return Err(null());
        }
        let wd = f.family.data();
        let p = wd.domain.lift(Complex64::new(re, im), if sheet < 0 { -1 } else { 1 })?;
        let phi = harmonica::weierstrass::eval_phi(wd, &p)?;
        let o = std::slice::from_raw_parts_mut(out, 6);
        for k in 0..3 {
            o[2 * k] = phi[k].re;
            o[2 * k + 1] = phi[k].im;
        }
        Ok(())
    })
}

/// ||phi||^2 - |h| at z; positive exactly where the map is immersed.
///
/// # Safety
/// `family` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn harm_immersion_margin(
    family: *const HarmFamily,
    re: f64,
    im: f64,
    sheet: i32,
    out: *mut f64,
) -> HarmStatus {
    guard(|| {
        let f = family_ref(family)?;
        if out.is_null() {
            return Err(null());
        }
        let wd = f.family.data();
        let p = wd.domain.lift(Complex64::new(re, im), if sheet < 0 { -1 } else { 1 })?;
        *out = margin_of(&harmonica::weierstrass::eval_phi(wd, &p)?);
        Ok(())
    })
}

/// Basepoint of the immersion: `out = [re z, im z]`.
///
/// # Safety
/// `family` must be a live handle and `out` must hold 2 doubles.
#[no_mangle]
pub unsafe extern "C" fn harm_basepoint(family: *const HarmFamily, out: *mut f64) -> HarmStatus {
    guard(|| {
        let f = family_ref(family)?;
        if out.is_null() {
            return Err(null());
        }
        let z = f.family.immersion.basepoint.z;
        *out = z.re;
        *out.add(1) = z.im;
        Ok(())
    })
}

/// X at the end of a polyline that starts at the basepoint and visits the `n` points
/// `zs = [re0, im0, re1, im1, ...]`. Writes `out = [x1, x2, x3]`.
///
/// # Safety
/// `family` must be a live handle, `zs` must hold `2 n` doubles and `out` 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn harm_evaluate(
    family: *const HarmFamily,
    zs: *const f64,
    n: usize,
    out: *mut f64,
) -> HarmStatus {
    guard(|| {
        let f = family_ref(family)?;
        if zs.is_null() || out.is_null() {
            return Err(null());
        }
        if n == 0 {
            return Err(Failure::Status(HarmStatus::InvalidArgument, "path needs at least one point".into()));
        }
        let flat = std::slice::from_raw_parts(zs, 2 * n);
        let imm = &f.family.immersion;
        let mut pts = vec![imm.basepoint];
        pts.extend(flat.chunks(2).map(|c| harmonica::domain::SurfacePoint::planar(Complex64::new(c[0], c[1]))));
        let x = evaluate_immersion(imm, &PathSpec::new(pts, false), &f.cfg)?;
        std::slice::from_raw_parts_mut(out, 3).copy_from_slice(x.as_slice());
        Ok(())
    })
}

/// Integral of K dS over the surface and its error estimate.
///
/// # Safety
/// `family` must be a live handle; `value` and `error` valid pointers (`error` may be NULL).
#[no_mangle]
pub unsafe extern "C" fn harm_total_curvature(
    family: *const HarmFamily,
    value: *mut f64,
    error: *mut f64,
) -> HarmStatus {
    guard(|| {
        let f = family_ref(family)?;
        if value.is_null() {
            return Err(null());
        }
        let t = total_curvature(f.family.data(), &f.cfg)?;
        *value = t.value;
        if !error.is_null() {
            *error = t.error;
        }
        Ok(())
    })
}

/// The b in (-2, 0) that kills the real periods of the torus with parameter a in (0, 1).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn harm_torus_period_b(a: f64, out: *mut f64) -> HarmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        *out = torus_period_b(a, &QuadConfig::default())?.b;
        Ok(())
    })
}

/// Runs verification suites and returns the JSON report in `*out_json` (free it with
/// `harm_string_free`). `*passed` is 1 when every suite passes. Parameters outside the validity
/// predicate are diagnosed in the report rather than rejected.
///
/// # Safety
/// `spec_json` must be a NUL-terminated string; `out_json` and `passed` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn harm_verify(
    spec_json: *const c_char,
    suite: HarmSuite,
    points: usize,
    seed: u64,
    out_json: *mut *mut c_char,
    passed: *mut i32,
) -> HarmStatus {
    guard(|| {
        if out_json.is_null() || passed.is_null() {
            return Err(null());
        }
        *out_json = ptr::null_mut();
        let spec: FamilySpec = serde_json::from_str(str_arg(spec_json)?).map_err(Error::from)?;
        let suite = match suite {
            HarmSuite::Identities => Suite::Identities,
            HarmSuite::Ends => Suite::Ends,
            HarmSuite::Curvature => Suite::Curvature,
            HarmSuite::All => Suite::All,
        };
        let report = verify(&spec, &QuadConfig::default(), &VerifyOptions { suite, points, seed })?;
        let text = serde_json::to_string(&report).map_err(Error::from)?;
        *passed = report.pass as i32;
        *out_json = CString::new(text).unwrap_or_default().into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn harm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Samples the family on its default n1 x n2 parameter grid.
///
/// # Safety
/// `family` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn harm_mesh_sample(
    family: *const HarmFamily,
    n1: usize,
    n2: usize,
    out: *mut *mut HarmMesh,
) -> HarmStatus {
    guard(|| {
        let f = family_ref(family)?;
        if out.is_null() {
            return Err(null());
        }
        *out = ptr::null_mut();
        let grid = default_mesh_grid(&f.family.spec, n1, n2);
        let mesh = sample_mesh(&f.family.immersion, &grid, &f.cfg)?;
        *out = Box::into_raw(Box::new(HarmMesh { mesh }));
        Ok(())
    })
}

/// # Safety
/// `mesh` must come from `harm_mesh_sample` and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn harm_mesh_free(mesh: *mut HarmMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// # Safety
/// `mesh` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn harm_mesh_vertex_count(mesh: *const HarmMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.mesh.vertices.len())
}

/// # Safety
/// `mesh` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn harm_mesh_face_count(mesh: *const HarmMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.mesh.faces.len())
}

/// Copies vertex positions as `[x0, y0, z0, x1, ...]`; `len` is the buffer length in doubles.
///
/// # Safety
/// `mesh` must be a live handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn harm_mesh_vertices(mesh: *const HarmMesh, buf: *mut f64, len: usize) -> HarmStatus {
    guard(|| {
        let m = mesh_ref(mesh)?;
        if buf.is_null() {
            return Err(null());
        }
        let need = 3 * m.mesh.vertices.len();
        if len < need {
            return Err(Failure::Status(HarmStatus::BufferTooSmall, format!("need {need} doubles, got {len}")));
        }
        let out = std::slice::from_raw_parts_mut(buf, need);
        for (k, v) in m.mesh.vertices.iter().enumerate() {
            out[3 * k..3 * k + 3].copy_from_slice(v.as_slice());
        }
        Ok(())
    })
}

/// Copies zero-based triangle indices as `[a0, b0, c0, a1, ...]`; `len` counts indices.
///
/// # Safety
/// `mesh` must be a live handle and `buf` must hold `len` indices.
#[no_mangle]
pub unsafe extern "C" fn harm_mesh_faces(mesh: *const HarmMesh, buf: *mut u32, len: usize) -> HarmStatus {
    guard(|| {
        let m = mesh_ref(mesh)?;
        if buf.is_null() {
            return Err(null());
        }
        let need = 3 * m.mesh.faces.len();
        if len < need {
            return Err(Failure::Status(HarmStatus::BufferTooSmall, format!("need {need} indices, got {len}")));
        }
        let out = std::slice::from_raw_parts_mut(buf, need);
        for (k, f) in m.mesh.faces.iter().enumerate() {
            out[3 * k..3 * k + 3].copy_from_slice(f);
        }
        Ok(())
    })
}

/// Writes the mesh to `path`.
///
/// # Safety
/// `mesh` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn harm_mesh_write(mesh: *const HarmMesh, path: *const c_char, format: HarmFormat) -> HarmStatus {
    guard(|| {
        let m = mesh_ref(mesh)?;
        let path = Path::new(str_arg(path)?);
        let format = match format {
            HarmFormat::Obj => MeshFormat::Obj,
            HarmFormat::Ply => MeshFormat::Ply,
            HarmFormat::Csv => MeshFormat::Csv,
        };
        export(&m.mesh, path, format)?;
        Ok(())
    })
}

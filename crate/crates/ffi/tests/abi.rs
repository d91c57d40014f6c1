use std::ffi::{CStr, CString};
use std::ptr;

use asn_reservoir_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(asn_last_error()) }.to_string_lossy().into_owned()
}

fn generate(seed: u64) -> *mut AsnModel {
    let spec = asn_topology_spec_default();
    let dyn_ = asn_dynamics_default();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { asn_model_generate(&spec, &dyn_, seed, &mut m) }, AsnStatus::Ok);
    assert!(!m.is_null());
    m
}

#[test]
fn generate_save_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let a = CString::new(dir.path().join("a.json").to_str().unwrap()).unwrap();
    let b = CString::new(dir.path().join("b.json").to_str().unwrap()).unwrap();
    let m = generate(5);
    unsafe {
        assert_eq!(asn_model_save(m, a.as_ptr()), AsnStatus::Ok);
        let mut loaded = ptr::null_mut();
        assert_eq!(asn_model_load(a.as_ptr(), &mut loaded), AsnStatus::Ok);
        assert_eq!(asn_model_save(loaded, b.as_ptr()), AsnStatus::Ok);
        let (mut n, mut i, mut o) = (0, 0, 0);
        assert_eq!(asn_model_dims(loaded, &mut n, &mut i, &mut o), AsnStatus::Ok);
        assert_eq!((n, i, o), (25, 1, 1));
        asn_model_free(loaded);
        asn_model_free(m);
    }
    assert_eq!(
        std::fs::read(dir.path().join("a.json")).unwrap(),
        std::fs::read(dir.path().join("b.json")).unwrap()
    );
}

#[test]
fn missing_model_reports_not_found() {
    let p = CString::new("/nonexistent/model.json").unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { asn_model_load(p.as_ptr(), &mut m) }, AsnStatus::NotFound);
    assert!(m.is_null());
    assert!(last_error().contains("model not found"));
}

#[test]
fn null_arguments_rejected() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { asn_model_generate(ptr::null(), &asn_dynamics_default(), 1, &mut m) }, AsnStatus::NullPointer);
    assert_eq!(unsafe { asn_model_load(ptr::null(), &mut m) }, AsnStatus::NullPointer);
    unsafe {
        asn_model_free(ptr::null_mut());
        asn_simulator_free(ptr::null_mut());
    }
}

#[test]
fn invalid_spec_is_invalid_argument() {
    let mut spec = asn_topology_spec_default();
    spec.connectivity = 2.0;
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { asn_model_generate(&spec, &asn_dynamics_default(), 1, &mut m) },
        AsnStatus::InvalidArgument
    );
    assert!(!last_error().is_empty());
}

#[test]
fn simulate_train_and_read_out() {
    let m = generate(9);
    let steps = 300;
    let mut states = vec![0.0; 25 * steps];
    let mut targets = vec![0.0; steps];
    unsafe {
        let mut sim = ptr::null_mut();
        assert_eq!(asn_simulator_new(m, 1, &mut sim), AsnStatus::Ok);
        let mut x = [0.0; 25];
        for t in 0..steps {
            let u = [(t as f64 * 0.2).sin()];
            assert_eq!(asn_simulator_step(sim, u.as_ptr(), 1, ptr::null(), 0, x.as_mut_ptr(), 25), AsnStatus::Ok);
            for (i, v) in x.iter().enumerate() {
                states[i * steps + t] = *v;
            }
            targets[t] = -u[0];
        }
        let mut y = [0.0];
        assert_eq!(asn_simulator_output(sim, y.as_mut_ptr(), 1), AsnStatus::Untrained);
        asn_simulator_free(sim);

        assert_eq!(asn_model_has_readout(m), 0);
        assert_eq!(asn_model_train_readout(m, states.as_ptr(), targets.as_ptr(), steps, 1e-8), AsnStatus::Ok);
        assert_eq!(asn_model_has_readout(m), 1);

        let mut sim = ptr::null_mut();
        assert_eq!(asn_simulator_new(m, 1, &mut sim), AsnStatus::Ok);
        let u = [0.5];
        assert_eq!(asn_simulator_step(sim, u.as_ptr(), 1, ptr::null(), 0, ptr::null_mut(), 0), AsnStatus::Ok);
        assert_eq!(asn_simulator_output(sim, y.as_mut_ptr(), 1), AsnStatus::Ok);
        assert!(y[0].is_finite());
        assert_eq!(asn_simulator_output(sim, y.as_mut_ptr(), 2), AsnStatus::Dimension);
        let bad = [0.5, 0.5];
        assert_eq!(asn_simulator_step(sim, bad.as_ptr(), 2, ptr::null(), 0, ptr::null_mut(), 0), AsnStatus::Dimension);
        asn_simulator_free(sim);
        asn_model_free(m);
    }
}

#[test]
fn pinv_of_diagonal() {
    let a = [2.0, 0.0, 0.0, 0.0, 4.0, 0.0];
    let mut out = [f64::NAN; 6];
    assert_eq!(unsafe { asn_pinv(a.as_ptr(), 2, 3, 0.0, out.as_mut_ptr()) }, AsnStatus::Ok);
    let want = [0.5, 0.0, 0.0, 0.25, 0.0, 0.0];
    for (o, w) in out.iter().zip(want) {
        assert!((o - w).abs() < 1e-15, "{out:?}");
    }
}

#[test]
fn device_mean_and_samples() {
    let d = asn_device_default();
    let mut mean = 0.0;
    assert_eq!(unsafe { asn_device_mean(&d, 0.05, &mut mean) }, AsnStatus::Ok);
    assert!((mean - 0.4 * (0.25f64).tanh()).abs() < 1e-15);

    let mut a = vec![0.0; 1000];
    let mut b = vec![0.0; 1000];
    unsafe {
        assert_eq!(asn_device_sample(&d, 0.05, 3, a.as_mut_ptr(), a.len()), AsnStatus::Ok);
        assert_eq!(asn_device_sample(&d, 0.05, 3, b.as_mut_ptr(), b.len()), AsnStatus::Ok);
    }
    assert_eq!(a, b);
    let avg = a.iter().sum::<f64>() / a.len() as f64;
    assert!((avg - mean).abs() < 5.0 * 0.04 / (1000f64).sqrt());

    let bad = AsnDeviceParams { v_dd: -1.0, ..d };
    assert_eq!(unsafe { asn_device_mean(&bad, 0.0, &mut mean) }, AsnStatus::InvalidArgument);
}

#[test]
fn header_is_generated_and_complete() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/asn_reservoir.h")).unwrap();
    for name in [
        "asn_last_error",
        "asn_model_generate",
        "asn_model_load",
        "asn_model_save",
        "asn_model_free",
        "asn_model_train_readout",
        "asn_simulator_new",
        "asn_simulator_step",
        "asn_simulator_output",
        "asn_simulator_free",
        "asn_pinv",
        "asn_device_mean",
        "asn_device_sample",
        "typedef struct AsnModel AsnModel",
        "ASN_STATUS_NOT_FOUND = 4",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

#[test]
fn c_program_links_against_static_library() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libasn_reservoir_ffi.a");
    let cc = std::process::Command::new("cc").arg("--version").output();
    if cc.is_err() || !lib.exists() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let manifest = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Wextra", "-Werror", "-I"])
        .arg(manifest.join("include"))
        .arg(manifest.join("examples/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = std::process::Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("n=25 inputs=1 outputs=1"));
}

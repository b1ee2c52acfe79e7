use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use lobscale::dfa::{default_scales, fit_alpha, fluctuation, DfaOptions, FitRange};
use lobscale::synth::{generate, GeneratorSpec};
use lobscale_ffi::*;

fn white(n: usize, seed: u64) -> Vec<f64> {
    let mut x = vec![0.0; n];
    let st = unsafe { lob_generate(LobSignal::White as u32, 0.5, n, seed, x.as_mut_ptr()) };
    assert_eq!(st, LobStatus::Ok);
    x
}

#[test]
fn generate_matches_library() {
    let x = white(1000, 4);
    assert_eq!(x, generate(&GeneratorSpec::white(1000, 4)).unwrap());
    let mut y = vec![0.0; 1000];
    let st = unsafe { lob_generate(LobSignal::Fgn as u32, 0.7, 1000, 4, y.as_mut_ptr()) };
    assert_eq!(st, LobStatus::Ok);
    assert_eq!(y, generate(&GeneratorSpec::fgn(0.7, 1000, 4)).unwrap());
}

#[test]
fn curve_handle_round_trip() {
    let x = white(8192, 2);
    let mut curve = ptr::null_mut();
    let st = unsafe { lob_fluctuation(x.as_ptr(), x.len(), ptr::null(), 0, 1, false, &mut curve) };
    assert_eq!(st, LobStatus::Ok);
    let reference = fluctuation(&x, &default_scales(x.len()), &DfaOptions::default()).unwrap();
    assert_eq!(unsafe { lob_curve_len(curve) }, reference.len());
    for i in 0..reference.len() {
        let (mut s, mut f) = (0usize, 0.0f64);
        assert_eq!(unsafe { lob_curve_get(curve, i, &mut s, &mut f) }, LobStatus::Ok);
        assert_eq!((s, f), (reference.scales[i], reference.fluctuations[i]));
    }
    let (mut s, mut f) = (0usize, 0.0f64);
    let st = unsafe { lob_curve_get(curve, reference.len(), &mut s, &mut f) };
    assert_eq!(st, LobStatus::InvalidArgument);

    let mut fit = LobFit::default();
    let st = unsafe { lob_curve_fit(curve, f64::NEG_INFINITY, f64::INFINITY, false, &mut fit) };
    assert_eq!(st, LobStatus::Ok);
    assert_eq!(fit.alpha, fit_alpha(&reference, FitRange::ALL, false).unwrap().alpha);

    let mut fits = [LobFit::default(); 3];
    let mut status = [LobStatus::Panic; 3];
    let st = unsafe { lob_curve_local_alphas(curve, fits.as_mut_ptr(), status.as_mut_ptr()) };
    assert_eq!(st, LobStatus::InvalidArgument, "curve is not normalized yet");
    assert_eq!(unsafe { lob_curve_set_normalization(curve, 1000.0) }, LobStatus::Ok);
    let st = unsafe { lob_curve_local_alphas(curve, fits.as_mut_ptr(), status.as_mut_ptr()) };
    assert_eq!(st, LobStatus::Ok);
    // scales 8..2048 over A = 1000: (0.003, 0.1] and (0.3, 3] are populated,
    // (10, 100] is not
    assert_eq!(status, [LobStatus::Ok, LobStatus::Ok, LobStatus::InsufficientData]);
    unsafe { lob_curve_free(curve) };
}

#[test]
fn error_codes() {
    let x = white(100, 1);
    let mut curve = ptr::null_mut();
    let scales = [8usize, 50];
    let st = unsafe { lob_fluctuation(x.as_ptr(), 100, scales.as_ptr(), 2, 1, false, &mut curve) };
    assert_eq!(st, LobStatus::InvalidArgument);
    assert!(curve.is_null());

    let mut out = vec![0.0; 10];
    let st = unsafe { lob_generate(LobSignal::Fgn as u32, 1.0, 10, 0, out.as_mut_ptr()) };
    assert_eq!(st, LobStatus::InvalidArgument);
    let st = unsafe { lob_generate(99, 0.5, 10, 0, out.as_mut_ptr()) };
    assert_eq!(st, LobStatus::InvalidArgument);

    let flat = [1.0; 5];
    let y = [1.0, 2.0, 3.0, 4.0, 5.0];
    let mut c = LobCorrelation::default();
    assert_eq!(unsafe { lob_correlate(flat.as_ptr(), y.as_ptr(), 5, &mut c) }, LobStatus::ZeroVariance);
    let gappy = [1.0, f64::NAN, 3.0, f64::NAN, f64::NAN];
    assert_eq!(unsafe { lob_correlate(gappy.as_ptr(), y.as_ptr(), 5, &mut c) }, LobStatus::InsufficientData);

    let mut rv = 0.0;
    let times = [10u32, 5];
    let mids = [1.0, 2.0];
    let st = unsafe { lob_realized_variance(times.as_ptr(), mids.as_ptr(), 2, 0, 1_000_000, 300, 30, &mut rv) };
    assert_eq!(st, LobStatus::InvalidArgument);
}

#[test]
fn realized_variance_two_point_path() {
    let open = 27_000_000u32;
    // the jump lies after the first sample of every offset grid
    let times = [open, open + 3_600_000];
    let mids = [100.0, 110.0];
    let mut rv = 0.0;
    let st = unsafe {
        lob_realized_variance(times.as_ptr(), mids.as_ptr(), 2, open, open + 27_000_000, 300, 30, &mut rv)
    };
    assert_eq!(st, LobStatus::Ok);
    assert!((rv - 1.1f64.ln().powi(2)).abs() < 1e-12);
}

fn target_dir() -> PathBuf {
    // <target>/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_header_and_staticlib() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("liblobscale_ffi.a");
    assert!(lib.exists(), "static library not built at {}", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let status = Command::new("cc")
        .arg("-std=c11")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "smoke exited with {:?}", out.status);
    let text = String::from_utf8(out.stdout).unwrap();
    let x = generate(&GeneratorSpec::white(4096, 11)).unwrap();
    let curve = fluctuation(&x, &default_scales(4096), &DfaOptions::default()).unwrap();
    let alpha = fit_alpha(&curve, FitRange::ALL, false).unwrap().alpha;
    assert!(text.contains(&format!("len={} alpha={alpha:.12}", curve.len())), "{text}");
    assert!(text.contains("error=detrending order 7 outside 1..=3"), "{text}");
    assert!(text.contains("r=1.000 sig=1"), "{text}");
}

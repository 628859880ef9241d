use std::ffi::{CStr, CString};
use std::ptr;

use sos_ffi::*;

fn scenario(nodes: usize, attacked: usize) -> SosScenario {
    SosScenario {
        nodes,
        soaps_per_user: 1,
        beacons: 1,
        servlets: 1,
        attacked,
        disjoint: true,
        count_beacons: true,
    }
}

fn last_error() -> String {
    let p = sos_last_error();
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { sos_string_free(p) };
    s
}

#[test]
fn analytic_and_enumeration_agree() {
    let s = scenario(10, 1);
    let (mut a, mut e) = (0.0, 0.0);
    unsafe {
        assert_eq!(sos_analytic_denial(&s, &mut a), SosStatus::Ok);
        assert_eq!(sos_enumerate_denial(&s, 1_000_000, &mut e), SosStatus::Ok);
    }
    assert!((a - 0.3).abs() < 1e-15);
    assert!((e - 0.3).abs() < 1e-15);
}

#[test]
fn montecarlo_interval_covers_truth() {
    let s = scenario(5, 2);
    let (mut mean, mut half) = (0.0, 0.0);
    let status = unsafe { sos_montecarlo_denial(&s, 50_000, 3, &mut mean, &mut half) };
    assert_eq!(status, SosStatus::Ok);
    assert!((mean - 0.9).abs() <= half, "{mean} ± {half}");
}

#[test]
fn errors_map_to_codes_and_messages() {
    let mut p = 0.0;
    let s = SosScenario {
        disjoint: false,
        ..scenario(10, 1)
    };
    assert_eq!(unsafe { sos_analytic_denial(&s, &mut p) }, SosStatus::Unsupported);
    assert!(last_error().contains("disjoint"));

    let s = scenario(40, 10);
    assert_eq!(unsafe { sos_enumerate_denial(&s, 1000, &mut p) }, SosStatus::TooLarge);
    assert!(last_error().contains("montecarlo"));

    assert_eq!(
        unsafe { sos_analytic_denial(ptr::null(), &mut p) },
        SosStatus::NullPointer
    );
    assert_eq!(
        unsafe { sos_analytic_denial(&scenario(3, 1), ptr::null_mut()) },
        SosStatus::NullPointer
    );
}

#[test]
fn overlay_handle_lifecycle() {
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(sos_overlay_new(8, &mut h), SosStatus::Ok);
        for (name, id) in [("a", 1u64), ("b", 5), ("c", 9), ("d", 13)] {
            let c = CString::new(name).unwrap();
            assert_eq!(sos_overlay_join_at(h, c.as_ptr(), id), SosStatus::Ok);
        }
        let dup = CString::new("a").unwrap();
        assert_eq!(sos_overlay_join_at(h, dup.as_ptr(), 77), SosStatus::Conflict);
        assert_eq!(sos_overlay_live_count(h), 4);

        let (mut owner, mut hops) = (0u64, 0usize);
        assert_eq!(sos_overlay_lookup(h, 14, &mut owner, &mut hops), SosStatus::Ok);
        assert_eq!(owner, 1);
        assert_eq!(sos_overlay_lookup(h, 6, &mut owner, &mut hops), SosStatus::Ok);
        assert_eq!(owner, 9);

        assert_eq!(sos_overlay_leave(h, 9), SosStatus::Ok);
        assert_eq!(sos_overlay_leave(h, 9), SosStatus::NotFound);
        assert_eq!(sos_overlay_lookup(h, 6, &mut owner, &mut hops), SosStatus::Ok);
        assert_eq!(owner, 13);

        let name = CString::new("hashed").unwrap();
        let mut id = 0u64;
        assert_eq!(sos_overlay_join(h, name.as_ptr(), &mut id), SosStatus::Ok);
        assert!(id < 256);
        sos_overlay_free(h);
        sos_overlay_free(ptr::null_mut());
    }
}

#[test]
fn run_handle_exposes_rows_and_json() {
    let json =
        CString::new(r#"{"overlay": {"nodes": 10}, "attack": {"k": 1, "duration": 3}, "analysis": {"trials": 20000}}"#)
            .unwrap();
    let mode = CString::new("compare").unwrap();
    let mut run = ptr::null_mut();
    unsafe {
        assert_eq!(
            sos_run_scenario(json.as_ptr(), mode.as_ptr(), true, 11, &mut run),
            SosStatus::Ok
        );
        assert_eq!(sos_run_comparison_len(run), 1);
        let mut row = std::mem::zeroed::<SosComparisonRow>();
        assert_eq!(sos_run_comparison_row(run, 0, &mut row), SosStatus::Ok);
        assert!((row.analytic - 0.3).abs() < 1e-15);
        assert!(row.pass);
        assert_eq!(sos_run_comparison_row(run, 1, &mut row), SosStatus::InvalidArgument);

        let text = sos_run_result_json(run);
        let parsed: serde_json::Value = serde_json::from_str(CStr::from_ptr(text).to_str().unwrap()).unwrap();
        assert_eq!(parsed["seed"]["root"], 11);
        sos_string_free(text);

        let dir = tempfile_dir();
        let dir_c = CString::new(dir.to_str().unwrap()).unwrap();
        let formats = CString::new("csv,json").unwrap();
        assert_eq!(sos_run_emit(run, dir_c.as_ptr(), formats.as_ptr()), SosStatus::Ok);
        assert!(dir.join("comparison.csv").exists());
        let bad = CString::new("xml").unwrap();
        assert_eq!(sos_run_emit(run, dir_c.as_ptr(), bad.as_ptr()), SosStatus::Config);
        sos_run_free(run);
        std::fs::remove_dir_all(dir).unwrap();
    }
}

#[test]
fn bad_scenario_is_config_error() {
    let json = CString::new(r#"{"overlay": {"nodes": 3}, "attack": {"k": 4}}"#).unwrap();
    let mode = CString::new("analytic").unwrap();
    let mut run = ptr::null_mut();
    let status = unsafe { sos_run_scenario(json.as_ptr(), mode.as_ptr(), false, 0, &mut run) };
    assert_eq!(status, SosStatus::Config);
    assert!(run.is_null());
    let msg = last_error();
    assert!(msg.contains("attack.k") && msg.contains("overlay.nodes"), "{msg}");
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(sos_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join(format!("sos-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

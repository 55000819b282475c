use std::ffi::{CStr, CString};
use std::ptr;

use zerosum_alien_ffi::*;

fn last_error() -> String {
    let p = zs_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn cournot(a: f64, c: [f64; 4]) -> *mut ZsGame {
    let mut g = ptr::null_mut();
    let st = unsafe { zs_game_cournot4(a, c.as_ptr(), &mut g) };
    assert_eq!(st, ZsStatus::Ok);
    assert!(!g.is_null());
    g
}

#[test]
fn cournot_payoff_and_nash() {
    let g = cournot(10.0, [1.0, 1.0, 1.0, 2.0]);
    unsafe {
        assert_eq!(zs_game_player_count(g), 4);
        let mut u = 0.0;
        let s = [2.375, 2.375, 2.375, 1.625];
        assert_eq!(zs_evaluate_payoff(g, 0, s.as_ptr(), 4, &mut u), ZsStatus::Ok);
        let mut total = 0.0;
        for i in 0..4 {
            let mut v = 0.0;
            assert_eq!(zs_evaluate_payoff(g, i, s.as_ptr(), 4, &mut v), ZsStatus::Ok);
            total += v;
        }
        assert!(total.abs() < 1e-12);

        let mut x = [0.0; 4];
        let mut conv = false;
        assert_eq!(zs_solve_nash(g, x.as_mut_ptr(), 4, &mut conv), ZsStatus::Ok);
        assert!(conv);
        for (got, want) in x.iter().zip([2.375, 2.375, 2.375, 1.625]) {
            assert!((got - want).abs() < 1e-5, "{x:?}");
        }

        let mut lo = ZsOptResult::default();
        let mut hi = ZsOptResult::default();
        assert_eq!(zs_maximin(g, 0, 2.375, &mut lo), ZsStatus::Ok);
        assert_eq!(zs_minimax(g, 0, 2.375, &mut hi), ZsStatus::Ok);
        assert!((lo.arg - 2.375).abs() < 1e-5);
        assert!((hi.arg - 1.625).abs() < 1e-5);
        assert!((hi.value - lo.value).abs() < 1e-6);

        let mut fp = ZsFixedPoint::default();
        assert_eq!(zs_fixed_point(g, &mut fp), ZsStatus::Ok);
        assert!((fp.s - 2.375).abs() < 1e-5 && (fp.alien - 1.625).abs() < 1e-5);
        zs_game_free(g);
    }
}

#[test]
fn error_codes_and_messages() {
    unsafe {
        let mut g = ptr::null_mut();
        let bad = [1.0, 1.0, 1.0, 20.0];
        assert_eq!(zs_game_cournot4(10.0, bad.as_ptr(), &mut g), ZsStatus::InvalidArgument);
        assert!(g.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(zs_game_cournot4(10.0, ptr::null(), &mut g), ZsStatus::NullPointer);
        assert!(last_error().contains('c'));

        let g = cournot(10.0, [1.0, 1.0, 1.0, 2.0]);
        let mut u = 0.0;
        let short = [1.0, 1.0];
        assert_eq!(zs_evaluate_payoff(g, 0, short.as_ptr(), 2, &mut u), ZsStatus::InvalidArgument);
        let s = [1.0; 4];
        assert_eq!(zs_evaluate_payoff(g, 9, s.as_ptr(), 4, &mut u), ZsStatus::InvalidArgument);
        let outside = [11.0, 1.0, 1.0, 1.0];
        assert_eq!(zs_evaluate_payoff(g, 0, outside.as_ptr(), 4, &mut u), ZsStatus::Domain);

        let mut x = [0.0; 2];
        let mut conv = false;
        assert_eq!(zs_solve_nash(g, x.as_mut_ptr(), 2, &mut conv), ZsStatus::BufferTooSmall);

        // A successful call clears the stored message.
        assert_eq!(zs_evaluate_payoff(g, 0, s.as_ptr(), 4, &mut u), ZsStatus::Ok);
        assert!(zs_last_error_message().is_null());

        assert_eq!(zs_evaluate_payoff(ptr::null(), 0, s.as_ptr(), 4, &mut u), ZsStatus::NullPointer);
        assert_eq!(zs_game_player_count(ptr::null()), 0);
        zs_game_free(g);
        zs_game_free(ptr::null_mut());
        zs_string_free(ptr::null_mut());
    }
}

#[test]
fn config_json_and_reports() {
    let cfg = CString::new(r#"{"game": {"cournot4": {"a": 10, "c": [1, 1, 2, 2]}}}"#).unwrap();
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(zs_game_from_config_json(cfg.as_ptr(), &mut g), ZsStatus::Ok);
        let cmd = CString::new("counterexample").unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(zs_run_command_json(g, cmd.as_ptr(), &mut out), ZsStatus::Ok);
        let json = CStr::from_ptr(out).to_str().unwrap().to_owned();
        zs_string_free(out);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["verdict"], "fail");
        let gap = v["result"]["closed_form"]["gap"].as_f64().unwrap();
        assert!((gap - 0.125).abs() < 1e-12);

        let unknown = CString::new("solve").unwrap();
        assert_eq!(zs_run_command_json(g, unknown.as_ptr(), &mut out), ZsStatus::InvalidArgument);
        assert!(last_error().contains("solve"));
        zs_game_free(g);

        let broken = CString::new(r#"{"game": {"cournot4": {"a": "x", "c": [1, 1, 2, 2]}}}"#).unwrap();
        let mut g = ptr::null_mut();
        assert_eq!(zs_game_from_config_json(broken.as_ptr(), &mut g), ZsStatus::Config);
        assert!(last_error().contains("game.cournot4.a"));
    }
}

#[test]
fn custom_game_from_config() {
    let cfg = CString::new(
        r#"{"game": {"custom": {"n": 3, "group1_interval": [0, 4], "alien_interval": [0, 4],
            "payoffs": ["s1*s3 - s1^2 - s2*s3 + s2^2", "s2*s3 - s2^2 - s1*s3 + s1^2", "0*s3"]}}}"#,
    )
    .unwrap();
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(zs_game_from_config_json(cfg.as_ptr(), &mut g), ZsStatus::Ok);
        assert_eq!(zs_game_player_count(g), 3);
        let s = [1.0, 2.0, 3.0];
        let mut u = 0.0;
        assert_eq!(zs_evaluate_payoff(g, 0, s.as_ptr(), 3, &mut u), ZsStatus::Ok);
        assert_eq!(u, 3.0 - 1.0 - 6.0 + 4.0);
        zs_game_free(g);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/zerosum_alien.h")).unwrap();
    for name in [
        "zs_game_cournot4",
        "zs_game_from_config_json",
        "zs_game_free",
        "zs_game_player_count",
        "zs_evaluate_payoff",
        "zs_solve_nash",
        "zs_maximin",
        "zs_minimax",
        "zs_fixed_point",
        "zs_run_command_json",
        "zs_string_free",
        "zs_last_error_message",
        "typedef struct ZsGame ZsGame;",
        "ZS_STATUS_SOLVER_FAULT = 5",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

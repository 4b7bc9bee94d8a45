//! Exercises the C ABI through the exported extern "C" functions.

use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::ptr;

use patrolsynth_ffi::*;

const EXAMPLE1: &str = r#"{
  "detection_prob": 1.0,
  "groups": [{ "count": 3, "attack_length": 2, "cost": 1 }]
}"#;

const EXAMPLE2: &str = r#"{
  "detection_prob": 1.0,
  "groups": [
    { "count": 2, "attack_length": 2, "cost": 6 },
    { "count": 2, "attack_length": 2, "cost": 3 },
    { "count": 2, "attack_length": 2, "cost": 2 }
  ]
}"#;

fn game_from(json: &str) -> *mut PsGame {
    let c = CString::new(json).unwrap();
    let mut game: *mut PsGame = ptr::null_mut();
    let status = unsafe { ps_game_from_json(c.as_ptr(), &mut game) };
    assert_eq!(status, PS_OK, "{}", last_error());
    assert!(!game.is_null());
    game
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ps_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn game_round_trip_and_vertex_count() {
    let game = game_from(EXAMPLE2);
    let mut n = 0u64;
    assert_eq!(unsafe { ps_game_vertex_count(game, &mut n) }, PS_OK);
    assert_eq!(n, 6);
    unsafe { ps_game_free(game) };
}

#[test]
fn invalid_json_reports_validation_error() {
    let c = CString::new("{ not json").unwrap();
    let mut game: *mut PsGame = ptr::null_mut();
    let status = unsafe { ps_game_from_json(c.as_ptr(), &mut game) };
    assert_eq!(status, PS_ERR_VALIDATION);
    assert!(game.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn bad_probability_reports_validation_error() {
    let c = CString::new(
        r#"{"detection_prob": 1.5, "groups": [{"count": 1, "attack_length": 1, "cost": 1}]}"#,
    )
    .unwrap();
    let mut game: *mut PsGame = ptr::null_mut();
    let status = unsafe { ps_game_from_json(c.as_ptr(), &mut game) };
    assert_eq!(status, PS_ERR_VALIDATION);
}

#[test]
fn null_arguments_are_rejected() {
    let mut out = 0.0f64;
    assert_eq!(
        unsafe { ps_protection_upper_bound(ptr::null(), 1, &mut out) },
        PS_ERR_INVALID_ARGUMENT
    );
    let game = game_from(EXAMPLE1);
    assert_eq!(
        unsafe { ps_protection_upper_bound(game, 1, ptr::null_mut()) },
        PS_ERR_INVALID_ARGUMENT
    );
    let mut strategy: *mut PsStrategy = ptr::null_mut();
    assert_eq!(
        unsafe { ps_game_from_json(ptr::null(), ptr::null_mut()) },
        PS_ERR_INVALID_ARGUMENT
    );
    assert_eq!(
        unsafe { ps_synthesize(ptr::null(), 1, &mut strategy) },
        PS_ERR_INVALID_ARGUMENT
    );
    unsafe { ps_game_free(game) };
}

#[test]
fn bound_matches_known_value() {
    let game = game_from(EXAMPLE1);
    let mut rho = 0.0f64;
    assert_eq!(unsafe { ps_protection_upper_bound(game, 1, &mut rho) }, PS_OK);
    assert!((rho - 2.0 / 3.0).abs() < 1e-9);
    unsafe { ps_game_free(game) };
}

#[test]
fn too_many_patrollers_is_validation_error() {
    let game = game_from(EXAMPLE1);
    let mut rho = 0.0f64;
    let status = unsafe { ps_protection_upper_bound(game, 10, &mut rho) };
    assert_eq!(status, PS_ERR_VALIDATION);
    unsafe { ps_game_free(game) };
}

#[test]
fn min_patrollers_round_trip() {
    let game = game_from(EXAMPLE2);
    let mut k = 0u64;
    assert_eq!(unsafe { ps_min_patrollers(game, 5.0, &mut k) }, PS_OK);
    assert_eq!(k, 2);
    let status = unsafe { ps_min_patrollers(game, 100.0, &mut k) };
    assert_eq!(status, PS_ERR_INFEASIBLE);
    unsafe { ps_game_free(game) };
}

#[test]
fn synthesize_evaluate_and_serialize() {
    let game = game_from(EXAMPLE2);
    let mut strategy: *mut PsStrategy = ptr::null_mut();
    assert_eq!(unsafe { ps_synthesize(game, 2, &mut strategy) }, PS_OK, "{}", last_error());

    let mut level = 0.0f64;
    let mut bound = 0.0f64;
    assert_eq!(unsafe { ps_strategy_level(strategy, &mut level) }, PS_OK);
    assert_eq!(unsafe { ps_strategy_upper_bound(strategy, &mut bound) }, PS_OK);
    assert!((level - 5.0).abs() < 1e-9, "level={level}");
    assert!((bound - 5.0).abs() < 1e-9, "bound={bound}");

    let mut json: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { ps_strategy_to_json(strategy, &mut json) }, PS_OK);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    assert!(text.contains("\"strategy\""));
    assert!(text.contains("\"level\""));
    unsafe { ps_string_free(json) };

    unsafe { ps_strategy_free(strategy) };
    unsafe { ps_game_free(game) };
}

#[test]
fn naive_level_matches_known_value() {
    let game = game_from(EXAMPLE1);
    let mut level = 0.0f64;
    assert_eq!(unsafe { ps_naive_level(game, 1, &mut level) }, PS_OK);
    assert!((level - 5.0 / 9.0).abs() < 1e-9, "level={level}");
    unsafe { ps_game_free(game) };
}

#[test]
fn header_declares_every_exported_symbol() {
    let header = include_str!("../include/patrolsynth.h");
    for symbol in [
        "ps_last_error_message",
        "ps_game_from_json",
        "ps_game_free",
        "ps_game_vertex_count",
        "ps_protection_upper_bound",
        "ps_min_patrollers",
        "ps_synthesize",
        "ps_strategy_free",
        "ps_strategy_level",
        "ps_strategy_upper_bound",
        "ps_strategy_to_json",
        "ps_naive_level",
        "ps_string_free",
    ] {
        assert!(header.contains(symbol), "header is missing {symbol}");
    }
    for code in [
        "PS_OK = 0",
        "PS_ERR_INVALID_ARGUMENT = 1",
        "PS_ERR_VALIDATION = 2",
        "PS_ERR_INFEASIBLE = 3",
        "PS_ERR_INTERNAL = 4",
    ] {
        assert!(header.contains(code), "header is missing {code}");
    }
}

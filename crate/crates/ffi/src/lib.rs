//! C ABI over `zerosum-alien`.
//!
//! Every function returns a [`ZsStatus`]. On failure a description is stored
//! per thread and can be read with [`zs_last_error_message`]. Games are opaque
//! [`ZsGame`] handles released with [`zs_game_free`]; strings returned by the
//! library are released with [`zs_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use zerosum_alien::config::{parse_config, CommandOptions, GameSource, RunConfig, Tolerances, DEFAULT_SEED};
use zerosum_alien::cournot::CournotParams;
use zerosum_alien::equilibrium::{
    construct_nash_from_fixed_point, find_symmetric_fixed_point, solve_nash_profile, solve_nash_symmetric,
};
use zerosum_alien::game::{validate_group1_symmetry, SYMMETRY_TOL};
use zerosum_alien::minimax::{maximin, minimax};
use zerosum_alien::report::{to_json, Command};
use zerosum_alien::run::{run_command, solver_options};
use zerosum_alien::{Error, GameDefinition};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Domain = 4,
    SolverFault = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Opaque game handle.
pub struct ZsGame {
    config: RunConfig,
    game: GameDefinition,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ZsOptResult {
    pub arg: f64,
    pub value: f64,
    pub at_boundary: bool,
    pub plateau: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ZsFixedPoint {
    /// Common group-1 strategy.
    pub s: f64,
    /// `|map(s) - s|`.
    pub residual: f64,
    /// Alien strategy of the constructed equilibrium.
    pub alien: f64,
    pub transfer_gap: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ZsStatus {
    match e {
        Error::Config(_) | Error::Parse(_) => ZsStatus::Config,
        Error::Domain { .. } => ZsStatus::Domain,
        e if e.is_solver_fault() => ZsStatus::SolverFault,
        _ => ZsStatus::InvalidArgument,
    }
}

struct Failure(ZsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(ZsStatus::NullPointer, format!("{what} is null"))
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> ZsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ZsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            ZsStatus::Panic
        }
    }
}

unsafe fn game_ref<'a>(game: *const ZsGame) -> Result<&'a ZsGame, Failure> {
    game.as_ref().ok_or_else(|| null("game"))
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(ZsStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

fn into_handle(mut config: RunConfig, out: *mut *mut ZsGame) -> Result<(), Failure> {
    let game = config.build_game()?;
    let handle = Box::new(ZsGame { config, game });
    unsafe { *out = Box::into_raw(handle) };
    Ok(())
}

/// Four-firm Cournot game with demand intercept `a` and unit costs `c[0..4]`;
/// firm D (`c[3]`) is the alien.
///
/// # Safety
/// `c` must point to four doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zs_game_cournot4(a: f64, c: *const f64, out: *mut *mut ZsGame) -> ZsStatus {
    guard(|| {
        if c.is_null() {
            return Err(null("c"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let costs = std::slice::from_raw_parts(c, 4);
        let params = CournotParams::new(a, [costs[0], costs[1], costs[2], costs[3]])?;
        let mut config = RunConfig {
            game: GameSource::Cournot4(params),
            tolerances: Tolerances::default(),
            seed: DEFAULT_SEED,
            options: CommandOptions::default(),
            warnings: Vec::new(),
        };
        config.validate()?;
        into_handle(config, out)
    })
}

/// Game and settings from a JSON run configuration (the CLI's `--config` format).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zs_game_from_config_json(json: *const c_char, out: *mut *mut ZsGame) -> ZsStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        if out.is_null() {
            return Err(null("out"));
        }
        into_handle(parse_config(text)?, out)
    })
}

/// # Safety
/// `game` must come from a constructor of this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn zs_game_free(game: *mut ZsGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// Number of players, or 0 for a null handle.
///
/// # Safety
/// `game` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn zs_game_player_count(game: *const ZsGame) -> usize {
    game.as_ref().map_or(0, |g| g.game.n())
}

/// Payoff of `player` (0-based; the alien is `n - 1`) at `profile[0..len]`.
///
/// # Safety
/// `profile` must point to `len` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zs_evaluate_payoff(
    game: *const ZsGame,
    player: usize,
    profile: *const f64,
    len: usize,
    out: *mut f64,
) -> ZsStatus {
    guard(|| {
        let g = game_ref(game)?;
        if profile.is_null() {
            return Err(null("profile"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let s = std::slice::from_raw_parts(profile, len);
        *out = g.game.payoff_at(player, s)?;
        Ok(())
    })
}

/// Nash equilibrium written to `out[0..len]` (`len` must be at least `n`).
/// `converged` receives whether best-response iteration met its tolerances.
///
/// # Safety
/// `out` must point to `len` writable doubles and `converged` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zs_solve_nash(
    game: *const ZsGame,
    out: *mut f64,
    len: usize,
    converged: *mut bool,
) -> ZsStatus {
    guard(|| {
        let g = game_ref(game)?;
        if out.is_null() {
            return Err(null("out"));
        }
        if converged.is_null() {
            return Err(null("converged"));
        }
        let n = g.game.n();
        if len < n {
            return Err(Failure(ZsStatus::BufferTooSmall, format!("need {n} doubles, got {len}")));
        }
        let opts = solver_options(&g.config).nash;
        let symmetric = g.game.declared_symmetric()
            && validate_group1_symmetry(&g.game, g.config.options.validation_samples, g.config.seed)?.max_deviation
                <= SYMMETRY_TOL;
        let (profile, ok) = if symmetric {
            let eq = solve_nash_symmetric(&g.game, &opts)?;
            (eq.profile(n).into_vec(), eq.converged)
        } else {
            let eq = solve_nash_profile(&g.game, &opts)?;
            (eq.profile.into_vec(), eq.converged)
        };
        std::slice::from_raw_parts_mut(out, n).copy_from_slice(&profile);
        *converged = ok;
        Ok(())
    })
}

/// `max_{s_i} min_{s_n} u_i` with the other group-1 players at `pinning`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zs_maximin(
    game: *const ZsGame,
    player: usize,
    pinning: f64,
    out: *mut ZsOptResult,
) -> ZsStatus {
    nested(game, player, pinning, out, true)
}

/// `min_{s_n} max_{s_i} u_i` with the other group-1 players at `pinning`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zs_minimax(
    game: *const ZsGame,
    player: usize,
    pinning: f64,
    out: *mut ZsOptResult,
) -> ZsStatus {
    nested(game, player, pinning, out, false)
}

unsafe fn nested(game: *const ZsGame, player: usize, pinning: f64, out: *mut ZsOptResult, lower: bool) -> ZsStatus {
    guard(|| {
        let g = game_ref(game)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let tol = solver_options(&g.config).fixed_point.nested;
        let r = if lower {
            maximin(&g.game, player, pinning, &tol)?
        } else {
            minimax(&g.game, player, pinning, &tol)?
        };
        *out = ZsOptResult {
            arg: r.arg,
            value: r.value,
            at_boundary: r.at_boundary,
            plateau: r.plateau,
        };
        Ok(())
    })
}

/// Symmetric fixed point of the group-1 maximin map and the alien strategy
/// of the Nash profile constructed from it.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zs_fixed_point(game: *const ZsGame, out: *mut ZsFixedPoint) -> ZsStatus {
    guard(|| {
        let g = game_ref(game)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let opts = solver_options(&g.config);
        let fp = find_symmetric_fixed_point(&g.game, &opts.fixed_point)?;
        let c = construct_nash_from_fixed_point(&g.game, fp.s, &opts.construct)?;
        *out = ZsFixedPoint {
            s: fp.s,
            residual: fp.residual,
            alien: c.equilibrium.alien_strategy,
            transfer_gap: c.transfer_gap,
        };
        Ok(())
    })
}

/// Runs a CLI command (`nash`, `maximin`, `fixedpoint`, `verify`,
/// `counterexample`) and returns its JSON report in `*out`, to be released
/// with [`zs_string_free`]. A report whose verdict is `fail` or `fault`
/// still returns `ZS_STATUS_OK`.
///
/// # Safety
/// `command` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zs_run_command_json(
    game: *const ZsGame,
    command: *const c_char,
    out: *mut *mut c_char,
) -> ZsStatus {
    guard(|| {
        let g = game_ref(game)?;
        let name = str_arg(command, "command")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cmd = Command::from_name(name)
            .ok_or_else(|| Failure(ZsStatus::InvalidArgument, format!("unknown command `{name}`")))?;
        let report = run_command(cmd, &g.config)?;
        let json = CString::new(to_json(&report)).expect("JSON has no NUL bytes");
        *out = json.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn zs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn zs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

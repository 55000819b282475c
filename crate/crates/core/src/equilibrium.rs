//! Nash equilibria that are symmetric in group 1, the maximin fixed point,
//! and numerical checks of both directions of the Nash/minimax equivalence.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{
    validate_group1_symmetry, validate_zero_sum, GameDefinition, StrategyProfile, SYMMETRY_TOL,
    ZERO_SUM_TOL,
};
use crate::minimax::{maximin, maximin_at, minimax_at, NestedTolerances};
use crate::scalar::{maximize_unimodal, minimize_unimodal, OptResult};

/// Representative group-1 player.
const REP: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NashOptions {
    pub init_group1: Option<f64>,
    pub init_alien: Option<f64>,
    pub damping: f64,
    /// Iteration stops once every coordinate moves less than this.
    pub step_tol: f64,
    /// Largest best-response deviation accepted at the end.
    pub residual_tol: f64,
    pub max_iter: usize,
    pub xtol: f64,
}

impl Default for NashOptions {
    fn default() -> Self {
        Self {
            init_group1: None,
            init_alien: None,
            damping: 0.5,
            step_tol: 1e-8,
            residual_tol: 1e-5,
            max_iter: 2000,
            xtol: 1e-9,
        }
    }
}

impl NashOptions {
    fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if !(self.step_tol > 0.0 && self.residual_tol > 0.0 && self.xtol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricEquilibrium {
    pub group1_strategy: f64,
    pub alien_strategy: f64,
    pub group1_payoff: f64,
    pub alien_payoff: f64,
    /// Max |best response - strategy| over all players.
    pub residual: f64,
    /// Max |best-response payoff - payoff| over all players.
    pub value_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub at_boundary: bool,
    pub plateau: bool,
}

impl SymmetricEquilibrium {
    pub fn profile(&self, n: usize) -> StrategyProfile {
        StrategyProfile::symmetric(n, self.group1_strategy, self.alien_strategy)
    }
}

/// Equilibrium found without assuming group-1 symmetry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileEquilibrium {
    pub profile: StrategyProfile,
    pub payoffs: Vec<f64>,
    pub residual: f64,
    pub value_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Best-response deviations of every player at a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub arg: f64,
    pub value: f64,
    pub at_boundary: bool,
    pub plateau: bool,
}

/// `argmax_{s_i} u_i` with every other coordinate fixed at `s`.
pub fn best_response(
    game: &GameDefinition,
    i: usize,
    s: &StrategyProfile,
    xtol: f64,
) -> Result<OptResult> {
    game.check_player(i)?;
    game.check_profile(s.as_slice())?;
    let iv = game.interval(i);
    let mut work = s.as_slice().to_vec();
    maximize_unimodal(
        |x| {
            work[i] = x;
            game.payoff_at(i, &work)
        },
        iv.lo,
        iv.hi,
        xtol,
    )
}

pub fn residuals(game: &GameDefinition, s: &StrategyProfile, xtol: f64) -> Result<Residuals> {
    let mut r = Residuals {
        arg: 0.0,
        value: 0.0,
        at_boundary: false,
        plateau: false,
    };
    for i in 0..game.n() {
        let br = best_response(game, i, s, xtol)?;
        let here = game.payoff_at(i, s.as_slice())?;
        r.arg = r.arg.max((br.arg - s[i]).abs());
        r.value = r.value.max((br.value - here).abs());
        r.at_boundary |= br.at_boundary;
        r.plateau |= br.plateau;
    }
    Ok(r)
}

fn check_init(game: &GameDefinition, player: usize, v: Option<f64>, default: f64) -> Result<f64> {
    let v = v.unwrap_or(default);
    let iv = game.interval(player);
    if !iv.contains(v) {
        return Err(Error::Domain {
            player,
            value: v,
            lo: iv.lo,
            hi: iv.hi,
        });
    }
    Ok(v)
}

fn finish_symmetric(
    game: &GameDefinition,
    g: f64,
    d: f64,
    iterations: usize,
    stepped: bool,
    opts: &NashOptions,
) -> Result<SymmetricEquilibrium> {
    let profile = StrategyProfile::symmetric(game.n(), g, d);
    let res = residuals(game, &profile, opts.xtol)?;
    Ok(SymmetricEquilibrium {
        group1_strategy: g,
        alien_strategy: d,
        group1_payoff: game.payoff_at(REP, profile.as_slice())?,
        alien_payoff: game.payoff_at(game.alien(), profile.as_slice())?,
        residual: res.arg,
        value_residual: res.value,
        iterations,
        converged: stepped && res.arg <= opts.residual_tol,
        at_boundary: res.at_boundary,
        plateau: res.plateau,
    })
}

/// Damped best-response iteration on the pair (group-1 strategy, alien
/// strategy). Non-convergence is reported through `converged`, not an error.
pub fn solve_nash_symmetric(
    game: &GameDefinition,
    opts: &NashOptions,
) -> Result<SymmetricEquilibrium> {
    opts.validate()?;
    let n = game.n();
    let mut g = check_init(game, REP, opts.init_group1, game.group1_interval().midpoint())?;
    let mut d = check_init(game, game.alien(), opts.init_alien, game.alien_interval().midpoint())?;
    let lambda = opts.damping;

    for it in 1..=opts.max_iter {
        let profile = StrategyProfile::symmetric(n, g, d);
        let bg = best_response(game, REP, &profile, opts.xtol)?.arg;
        let bd = best_response(game, game.alien(), &profile, opts.xtol)?.arg;
        let ng = (1.0 - lambda) * g + lambda * bg;
        let nd = (1.0 - lambda) * d + lambda * bd;
        let moved = (ng - g).abs().max((nd - d).abs());
        g = ng;
        d = nd;
        if moved < opts.step_tol {
            return finish_symmetric(game, g, d, it, true, opts);
        }
    }
    finish_symmetric(game, g, d, opts.max_iter, false, opts)
}

/// Damped simultaneous best-response iteration over every player.
pub fn solve_nash_profile(game: &GameDefinition, opts: &NashOptions) -> Result<ProfileEquilibrium> {
    opts.validate()?;
    let mut x = StrategyProfile::symmetric(
        game.n(),
        check_init(game, REP, opts.init_group1, game.group1_interval().midpoint())?,
        check_init(game, game.alien(), opts.init_alien, game.alien_interval().midpoint())?,
    );
    let lambda = opts.damping;
    let mut stepped = false;
    let mut iterations = opts.max_iter;
    for it in 1..=opts.max_iter {
        let brs = (0..game.n())
            .map(|i| best_response(game, i, &x, opts.xtol).map(|r| r.arg))
            .collect::<Result<Vec<_>>>()?;
        let mut moved = 0.0f64;
        for (i, br) in brs.into_iter().enumerate() {
            let next = (1.0 - lambda) * x[i] + lambda * br;
            moved = moved.max((next - x[i]).abs());
            x[i] = next;
        }
        if moved < opts.step_tol {
            stepped = true;
            iterations = it;
            break;
        }
    }
    let res = residuals(game, &x, opts.xtol)?;
    Ok(ProfileEquilibrium {
        payoffs: game.payoffs_at(x.as_slice())?,
        profile: x,
        residual: res.arg,
        value_residual: res.value,
        iterations,
        converged: stepped && res.arg <= opts.residual_tol,
    })
}

/// `s ↦ argmax_{s_i} min_{s_n} u_i` with the other group-1 players at `s`.
pub fn symmetric_maximin_map(game: &GameDefinition, s: f64, tol: &NestedTolerances) -> Result<f64> {
    Ok(maximin(game, REP, s, tol)?.arg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub nested: NestedTolerances,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 200,
            nested: NestedTolerances::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointMethod {
    Endpoint,
    Bisection,
    DampedIteration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub s: f64,
    pub map_value: f64,
    /// `|map(s) - s|`.
    pub residual: f64,
    pub method: FixedPointMethod,
    pub iterations: usize,
    pub at_boundary: bool,
}

/// Locates `s` with `|map(s) - s| <= tol`. Bisection on `map(s) - s` when
/// the endpoints bracket a sign change, damped iteration (λ = 0.5) from the
/// midpoint otherwise or when bisection stalls.
pub fn find_symmetric_fixed_point(
    game: &GameDefinition,
    opts: &FixedPointOptions,
) -> Result<FixedPoint> {
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {}", opts.tol)));
    }
    opts.nested.validate()?;
    let iv = game.group1_interval();
    let map = |s: f64| symmetric_maximin_map(game, s, &opts.nested);
    let done = |s: f64, m: f64, method, iterations| FixedPoint {
        s,
        map_value: m,
        residual: (m - s).abs(),
        method,
        iterations,
        at_boundary: (s - iv.lo).abs() <= opts.tol || (iv.hi - s).abs() <= opts.tol,
    };

    let m_lo = map(iv.lo)?;
    if (m_lo - iv.lo).abs() <= opts.tol {
        return Ok(done(iv.lo, m_lo, FixedPointMethod::Endpoint, 0));
    }
    let m_hi = map(iv.hi)?;
    if (m_hi - iv.hi).abs() <= opts.tol {
        return Ok(done(iv.hi, m_hi, FixedPointMethod::Endpoint, 0));
    }

    let (mut a, mut b) = (iv.lo, iv.hi);
    let g_lo = m_lo - iv.lo;
    let g_hi = m_hi - iv.hi;
    let mut used = 0;
    if g_lo.signum() != g_hi.signum() {
        while used < opts.max_iter && b - a > opts.tol * 1e-3 {
            used += 1;
            let mid = 0.5 * (a + b);
            let m = map(mid)?;
            let g = m - mid;
            if g.abs() <= opts.tol {
                return Ok(done(mid, m, FixedPointMethod::Bisection, used));
            }
            if g.signum() == g_lo.signum() {
                a = mid;
            } else {
                b = mid;
            }
        }
    }

    let mut s = 0.5 * (a + b);
    let mut last = f64::NAN;
    for k in 1..=opts.max_iter.saturating_sub(used).max(1) {
        let m = map(s)?;
        last = m - s;
        if last.abs() <= opts.tol {
            return Ok(done(s, m, FixedPointMethod::DampedIteration, used + k));
        }
        s = (0.5 * s + 0.5 * m).clamp(iv.lo, iv.hi);
    }
    Err(Error::NoFixedPoint(format!(
        "bisection bracket [{a}, {b}], damped iterate {s} with map(s) - s = {last}"
    )))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructedNash {
    pub equilibrium: SymmetricEquilibrium,
    /// `argmin_{s_n} u_i(s̃, …, s̃, s_n)` for the representative group-1 player.
    pub argmin_group1_payoff: f64,
    /// `argmax_{s_n} u_n(s̃, …, s̃, s_n)`.
    pub argmax_alien_payoff: f64,
    pub transfer_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructOptions {
    pub xtol: f64,
    /// Allowed disagreement between the two alien computations.
    pub transfer_tol: f64,
    pub residual_tol: f64,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        Self {
            xtol: 1e-9,
            transfer_tol: 1e-7,
            residual_tol: 1e-5,
        }
    }
}

/// Builds `(s̃, …, s̃, ŝ_n)` with `ŝ_n` computed both as the alien's best
/// response and as the minimizer of a group-1 payoff; the two must agree.
pub fn construct_nash_from_fixed_point(
    game: &GameDefinition,
    s_tilde: f64,
    opts: &ConstructOptions,
) -> Result<ConstructedNash> {
    let iv = game.group1_interval();
    if !iv.contains(s_tilde) {
        return Err(Error::Domain {
            player: REP,
            value: s_tilde,
            lo: iv.lo,
            hi: iv.hi,
        });
    }
    let alien = game.alien();
    let aiv = game.alien_interval();
    let base = StrategyProfile::symmetric(game.n(), s_tilde, aiv.midpoint());
    let argmax_alien = best_response(game, alien, &base, opts.xtol)?.arg;
    let mut work = base.as_slice().to_vec();
    let argmin_group1 = minimize_unimodal(
        |x| {
            work[alien] = x;
            game.payoff_at(REP, &work)
        },
        aiv.lo,
        aiv.hi,
        opts.xtol,
    )?
    .arg;
    let transfer_gap = (argmax_alien - argmin_group1).abs();
    if transfer_gap > opts.transfer_tol {
        return Err(Error::TransferMismatch {
            argmin_group1,
            argmax_alien,
        });
    }
    let nash = NashOptions {
        xtol: opts.xtol,
        residual_tol: opts.residual_tol,
        ..NashOptions::default()
    };
    Ok(ConstructedNash {
        equilibrium: finish_symmetric(game, s_tilde, argmax_alien, 0, true, &nash)?,
        argmin_group1_payoff: argmin_group1,
        argmax_alien_payoff: argmax_alien,
        transfer_gap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    NashImpliesSion,
    SionImpliesNash,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::NashImpliesSion => "nash_implies_sion",
            Direction::SionImpliesNash => "sion_implies_nash",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    // NaN marks a check that could not be evaluated; it is written as null.
    #[serde(deserialize_with = "crate::report::f64_or_null")]
    pub lhs: f64,
    #[serde(deserialize_with = "crate::report::f64_or_null")]
    pub rhs: f64,
    #[serde(deserialize_with = "crate::report::f64_or_null")]
    pub gap: f64,
    #[serde(deserialize_with = "crate::report::f64_or_null")]
    pub tol: f64,
    pub pass: bool,
}

impl CheckEntry {
    pub fn compare(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let gap = (lhs - rhs).abs();
        Self {
            name: name.into(),
            lhs,
            rhs,
            gap,
            tol,
            pass: gap <= tol,
        }
    }

    /// Passes when `value <= tol`.
    pub fn bound(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            lhs: value,
            rhs: tol,
            gap: value,
            tol,
            pass: value <= tol,
        }
    }

    pub fn failed(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            gap: f64::NAN,
            tol: f64::NAN,
            pass: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub direction: Direction,
    pub checks: Vec<CheckEntry>,
    pub diagnostics: Vec<String>,
    pub pass: bool,
}

impl TheoremReport {
    fn new(direction: Direction) -> Self {
        Self {
            direction,
            checks: Vec::new(),
            diagnostics: Vec::new(),
            pass: true,
        }
    }

    fn push(&mut self, entry: CheckEntry) {
        self.pass &= entry.pass;
        self.checks.push(entry);
    }

    fn fail(&mut self, name: &str, diagnostic: String) {
        self.push(CheckEntry::failed(name));
        self.diagnostics.push(diagnostic);
    }

    pub fn check(&self, name: &str) -> Option<&CheckEntry> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Nash ⇒ minimax equality, for a converged equilibrium symmetric in group 1.
pub fn verify_theorem1(
    game: &GameDefinition,
    eq: &SymmetricEquilibrium,
    tol: f64,
    nested: &NestedTolerances,
) -> Result<TheoremReport> {
    if !eq.converged {
        return Err(Error::Precondition("equilibrium did not converge".into()));
    }
    verify_theorem1_at_profile(game, &eq.profile(game.n()), REP, tol, nested)
}

/// The four checks with group 1 pinned at an arbitrary equilibrium profile:
/// maximin value equals minimax value, the maximin argument is player `i`'s
/// equilibrium strategy, the minimax argument is the alien's, and the
/// equilibrium payoff equals the common value.
pub fn verify_theorem1_at_profile(
    game: &GameDefinition,
    profile: &StrategyProfile,
    i: usize,
    tol: f64,
    nested: &NestedTolerances,
) -> Result<TheoremReport> {
    game.check_group1(i)?;
    game.check_profile(profile.as_slice())?;
    let lower = maximin_at(game, i, profile, nested)?;
    let upper = minimax_at(game, i, profile, nested)?;
    let payoff = game.payoff_at(i, profile.as_slice())?;
    let mut r = TheoremReport::new(Direction::NashImpliesSion);
    r.push(CheckEntry::compare("maximin_value_eq_minimax_value", lower.value, upper.value, tol));
    r.push(CheckEntry::compare("maximin_arg_eq_group1_strategy", lower.arg, profile[i], tol));
    r.push(CheckEntry::compare(
        "minimax_arg_eq_alien_strategy",
        upper.arg,
        profile[game.alien()],
        tol,
    ));
    r.push(CheckEntry::compare("equilibrium_payoff_eq_value", payoff, lower.value, tol));
    if lower.at_boundary || upper.at_boundary {
        r.diagnostics.push("an outer optimum lies on the interval boundary".into());
    }
    if lower.plateau || upper.plateau {
        r.diagnostics.push("plateau detected in an outer optimization".into());
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub nash: NashOptions,
    pub fixed_point: FixedPointOptions,
    pub construct: ConstructOptions,
    pub validation_samples: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            nash: NashOptions::default(),
            fixed_point: FixedPointOptions::default(),
            construct: ConstructOptions::default(),
            validation_samples: 200,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub structure: Vec<CheckEntry>,
    pub group1_symmetric: bool,
    /// Equilibrium from best-response iteration (symmetric iteration when
    /// group 1 validates as symmetric, per-player iteration otherwise).
    pub nash_profile: Option<StrategyProfile>,
    pub nash: Option<SymmetricEquilibrium>,
    pub fixed_point: Option<FixedPoint>,
    pub constructed: Option<ConstructedNash>,
    pub theorem1: TheoremReport,
    pub theorem2: TheoremReport,
    pub pass: bool,
}

/// Runs the best-response route and the fixed-point route independently and
/// checks that they meet, then checks the Nash ⇒ minimax direction on the
/// best-response equilibrium. Solver faults become failed entries.
pub fn verify_equivalence(
    game: &GameDefinition,
    tol: f64,
    opts: &SolverOptions,
) -> Result<EquivalenceReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let nested = opts.fixed_point.nested;
    let zs = validate_zero_sum(game, opts.validation_samples, opts.seed)?;
    let sym = validate_group1_symmetry(game, opts.validation_samples, opts.seed)?;
    let structure = vec![
        CheckEntry::bound("zero_sum_residual", zs.max_deviation, ZERO_SUM_TOL),
        CheckEntry::bound("group1_asymmetry", sym.max_deviation, SYMMETRY_TOL),
    ];
    let group1_symmetric = game.declared_symmetric() && structure[1].pass;

    let mut t1 = TheoremReport::new(Direction::NashImpliesSion);
    let mut t2 = TheoremReport::new(Direction::SionImpliesNash);
    if !group1_symmetric {
        t2.diagnostics.push(format!(
            "group 1 is not symmetric (max asymmetry {:e}); best-response route iterates every player",
            sym.max_deviation
        ));
    }

    let mut nash = None;
    let nash_profile = if group1_symmetric {
        match solve_nash_symmetric(game, &opts.nash) {
            Ok(eq) if eq.converged => {
                let p = eq.profile(game.n());
                nash = Some(eq);
                Some(p)
            }
            Ok(eq) => {
                t1.fail("nash_converged", format!("best-response iteration did not converge: {eq:?}"));
                None
            }
            Err(e) => {
                t1.fail("nash_converged", format!("best-response iteration failed: {e}"));
                None
            }
        }
    } else {
        match solve_nash_profile(game, &opts.nash) {
            Ok(eq) if eq.converged => Some(eq.profile),
            Ok(eq) => {
                t1.fail("nash_converged", format!("best-response iteration did not converge: {eq:?}"));
                None
            }
            Err(e) => {
                t1.fail("nash_converged", format!("best-response iteration failed: {e}"));
                None
            }
        }
    };

    if let Some(p) = &nash_profile {
        match verify_theorem1_at_profile(game, p, REP, tol, &nested) {
            Ok(r) => {
                for c in r.checks {
                    t1.push(c);
                }
                t1.diagnostics.extend(r.diagnostics);
            }
            Err(e) => t1.fail("minimax_at_nash", format!("nested optimization failed: {e}")),
        }
    }

    let fixed_point = match find_symmetric_fixed_point(game, &opts.fixed_point) {
        Ok(fp) => {
            t2.push(CheckEntry::bound("fixed_point_residual", fp.residual, opts.fixed_point.tol));
            Some(fp)
        }
        Err(e) => {
            t2.fail("fixed_point_found", format!("fixed-point search failed: {e}"));
            None
        }
    };
    let constructed = match &fixed_point {
        Some(fp) => match construct_nash_from_fixed_point(game, fp.s, &opts.construct) {
            Ok(c) => {
                t2.push(CheckEntry::bound(
                    "alien_transfer_gap",
                    c.transfer_gap,
                    opts.construct.transfer_tol,
                ));
                t2.push(CheckEntry::bound("constructed_nash_residual", c.equilibrium.residual, tol));
                Some(c)
            }
            Err(e) => {
                t2.fail("constructed_nash", format!("construction failed: {e}"));
                None
            }
        },
        None => None,
    };

    match (&constructed, &nash_profile) {
        (Some(c), Some(p)) => {
            let built = c.equilibrium.profile(game.n());
            for k in 0..game.n() {
                t2.push(CheckEntry::compare(format!("route_agreement_player_{k}"), built[k], p[k], tol));
            }
        }
        _ => t2.fail("route_agreement", "one of the two routes produced no equilibrium".into()),
    }

    let pass = structure.iter().all(|c| c.pass) && t1.pass && t2.pass;
    Ok(EquivalenceReport {
        structure,
        group1_symmetric,
        nash_profile,
        nash,
        fixed_point,
        constructed,
        theorem1: t1,
        theorem2: t2,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cournot::{build_game, CournotParams, CournotPayoff, Firm};
    use crate::game::{Payoff, StrategyInterval};
    use std::sync::Arc;

    fn cournot(a: f64, c: [f64; 4]) -> GameDefinition {
        build_game(&CournotParams::new(a, c).unwrap()).unwrap()
    }

    #[test]
    fn best_response_examples() {
        let g = cournot(10.0, [1.0; 4]);
        let r = best_response(&g, 0, &StrategyProfile::new(vec![0.0, 2.25, 2.25, 2.25]), 1e-9).unwrap();
        assert!((r.arg - 2.25).abs() <= 1e-6);
        let g = cournot(10.0, [1.0, 1.0, 1.0, 2.0]);
        let s = StrategyProfile::new(vec![2.375, 2.375, 2.375, 0.0]);
        let r = best_response(&g, 3, &s, 1e-9).unwrap();
        assert!((r.arg - 13.0 / 8.0).abs() <= 1e-6);
        assert!(matches!(best_response(&g, 4, &s, 1e-9), Err(Error::PlayerIndex { .. })));
    }

    #[test]
    fn symmetric_solver() {
        let g = cournot(10.0, [1.0; 4]);
        let eq = solve_nash_symmetric(&g, &NashOptions::default()).unwrap();
        assert!(eq.converged, "{eq:?}");
        assert!((eq.group1_strategy - 2.25).abs() <= 1e-5 && (eq.alien_strategy - 2.25).abs() <= 1e-5);

        let g = cournot(10.0, [1.0, 1.0, 1.0, 2.0]);
        let eq = solve_nash_symmetric(&g, &NashOptions::default()).unwrap();
        assert!(eq.converged, "{eq:?}");
        assert!((eq.group1_strategy - 2.375).abs() <= 1e-5);
        assert!((eq.alien_strategy - 1.625).abs() <= 1e-5);
        assert!(eq.residual <= 1e-5 && eq.value_residual <= 1e-6);
        assert!((eq.alien_payoff + 3.0 * eq.group1_payoff).abs() <= 1e-8);

        let bad = NashOptions { damping: 0.0, ..NashOptions::default() };
        assert!(solve_nash_symmetric(&g, &bad).is_err());
        let outside = NashOptions { init_alien: Some(11.0), ..NashOptions::default() };
        assert!(matches!(solve_nash_symmetric(&g, &outside), Err(Error::Domain { player: 3, .. })));
    }

    #[test]
    fn undamped_iteration_does_not_settle() {
        // the alien/group-1 best-response map has an eigenvalue of -1
        let g = cournot(10.0, [1.0, 1.0, 1.0, 2.0]);
        let opts = NashOptions { damping: 1.0, max_iter: 200, init_group1: Some(1.0), ..NashOptions::default() };
        let eq = solve_nash_symmetric(&g, &opts).unwrap();
        assert!(!eq.converged);
    }

    #[test]
    fn per_player_solver_two_aliens() {
        let g = cournot(10.0, [1.0, 1.0, 2.0, 2.0]);
        let eq = solve_nash_profile(&g, &NashOptions::default()).unwrap();
        assert!(eq.converged, "{eq:?}");
        let expect = [2.5, 2.5, 1.75, 1.75];
        for (got, want) in eq.profile.as_slice().iter().zip(expect) {
            assert!((got - want).abs() <= 1e-5);
        }
    }

    #[test]
    fn maximin_map_and_fixed_point() {
        let g = cournot(10.0, [1.0, 1.0, 1.0, 2.0]);
        let tol = NestedTolerances::default();
        assert!((symmetric_maximin_map(&g, 1.0, &tol).unwrap() - 2.375).abs() <= 1e-5);
        assert!((symmetric_maximin_map(&g, 2.375, &tol).unwrap() - 2.375).abs() <= 1e-5);
        assert!(symmetric_maximin_map(&g, 10.5, &tol).is_err());

        let fp = find_symmetric_fixed_point(&g, &FixedPointOptions::default()).unwrap();
        assert!((fp.s - 2.375).abs() <= 1e-5, "{fp:?}");
        assert_eq!(fp.method, FixedPointMethod::Bisection);

        let g = cournot(10.0, [1.0; 4]);
        let fp = find_symmetric_fixed_point(&g, &FixedPointOptions::default()).unwrap();
        assert!((fp.s - 2.25).abs() <= 1e-5);
        let bad = FixedPointOptions { tol: 0.0, ..FixedPointOptions::default() };
        assert!(find_symmetric_fixed_point(&g, &bad).is_err());
    }

    #[test]
    fn clipped_interval_gives_boundary_fixed_point() {
        let params = CournotParams::new(10.0, [1.0, 1.0, 1.0, 2.0]).unwrap();
        let iv = StrategyInterval::new(0.0, 1.0).unwrap();
        let payoffs = Firm::ALL
            .iter()
            .map(|&firm| Arc::new(CournotPayoff { params, firm }) as Arc<dyn Payoff>)
            .collect();
        let g = GameDefinition::new("clipped", iv, iv, payoffs, true).unwrap();
        match find_symmetric_fixed_point(&g, &FixedPointOptions::default()) {
            Ok(fp) => assert!(fp.at_boundary, "{fp:?}"),
            Err(e) => assert!(matches!(e, Error::NoFixedPoint(_))),
        }
    }

    #[test]
    fn construction_from_fixed_point() {
        let g = cournot(10.0, [1.0, 1.0, 1.0, 2.0]);
        let c = construct_nash_from_fixed_point(&g, 2.375, &ConstructOptions::default()).unwrap();
        assert!((c.equilibrium.alien_strategy - 1.625).abs() <= 1e-6);
        assert!(c.equilibrium.residual <= 1e-5);
        assert!(c.transfer_gap <= 1e-7);

        let g = cournot(10.0, [1.0; 4]);
        let c = construct_nash_from_fixed_point(&g, 2.25, &ConstructOptions::default()).unwrap();
        let p = c.equilibrium.profile(4);
        assert!(p.as_slice().iter().all(|v| (v - 2.25).abs() <= 1e-6));
        assert!(c.equilibrium.residual <= 1e-6);
    }

    #[test]
    fn theorem1_one_alien() {
        let g = cournot(10.0, [1.0, 1.0, 1.0, 2.0]);
        let eq = solve_nash_symmetric(&g, &NashOptions::default()).unwrap();
        let r = verify_theorem1(&g, &eq, 1e-5, &NestedTolerances::default()).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.checks.len(), 4);

        let mut stale = eq.clone();
        stale.converged = false;
        assert!(matches!(
            verify_theorem1(&g, &stale, 1e-5, &NestedTolerances::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn theorem1_two_aliens_fails_on_argument() {
        let g = cournot(10.0, [1.0, 1.0, 2.0, 2.0]);
        let nash = StrategyProfile::new(vec![2.5, 2.5, 1.75, 1.75]);
        let r = verify_theorem1_at_profile(&g, &nash, 0, 1e-5, &NestedTolerances::default()).unwrap();
        assert!(!r.pass);
        let b = r.check("maximin_arg_eq_group1_strategy").unwrap();
        assert!((b.gap - 0.125).abs() <= 1e-4, "{b:?}");
    }

    #[test]
    fn equivalence_one_alien_and_two_aliens() {
        let g = cournot(10.0, [1.0, 1.0, 1.0, 2.0]);
        let r = verify_equivalence(&g, 1e-5, &SolverOptions::default()).unwrap();
        assert!(r.pass, "{r:#?}");

        let g = cournot(10.0, [1.0, 1.0, 2.0, 2.0]);
        let r = verify_equivalence(&g, 1e-5, &SolverOptions::default()).unwrap();
        assert!(!r.pass);
        assert!(!r.group1_symmetric);
        let gap = r.theorem1.check("maximin_arg_eq_group1_strategy").unwrap().gap;
        assert!((gap - 0.125).abs() <= 1e-4);
    }
}

//! Nested max-min / min-max of a group-1 player's payoff against the alien.
//!
//! For group-1 player `i` every other group-1 player is pinned, either all at
//! one common value (the symmetric case) or at explicit per-player values.
//! Only the pair (`i`, alien) is optimized.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameDefinition, StrategyProfile};
use crate::scalar::{maximize_unimodal, minimize_unimodal, OptResult};

/// Slack allowed on `maximin <= minimax`.
pub const WEAK_DUALITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NestedTolerances {
    pub inner_xtol: f64,
    pub outer_xtol: f64,
}

impl Default for NestedTolerances {
    fn default() -> Self {
        Self {
            inner_xtol: 1e-9,
            outer_xtol: 1e-7,
        }
    }
}

impl NestedTolerances {
    pub fn validate(&self) -> Result<()> {
        let ok = self.inner_xtol > 0.0
            && self.outer_xtol > 0.0
            && self.inner_xtol.is_finite()
            && self.outer_xtol.is_finite();
        if !ok {
            return Err(Error::InvalidArgument("tolerances must be positive and finite".into()));
        }
        if self.inner_xtol > self.outer_xtol / 100.0 * (1.0 + 1e-9) {
            return Err(Error::InvalidArgument(format!(
                "inner xtol {} must be at least 100x tighter than outer xtol {}",
                self.inner_xtol, self.outer_xtol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pinning {
    /// Every other group-1 player at this value.
    Symmetric(f64),
    /// Explicit profile; entries for the optimized player and the alien are ignored.
    Profile(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SionStatus {
    Holds,
    Fails,
    /// An outer optimum sits on the interval boundary, where the interior
    /// uniqueness assumption is suspect.
    InconclusiveBoundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMinimaxReport {
    pub player: usize,
    pub pinning: Pinning,
    pub maximin_arg: f64,
    pub maximin_value: f64,
    pub minimax_arg: f64,
    pub minimax_value: f64,
    /// `minimax_value - maximin_value`.
    pub gap: f64,
    pub value_tol: f64,
    pub sion_holds: bool,
    pub status: SionStatus,
    pub weak_duality_ok: bool,
    pub at_boundary: bool,
    pub plateau: bool,
}

fn symmetric_base(game: &GameDefinition, s_pinned: f64) -> Result<StrategyProfile> {
    let iv = game.group1_interval();
    if !iv.contains(s_pinned) {
        return Err(Error::Domain {
            player: 0,
            value: s_pinned,
            lo: iv.lo,
            hi: iv.hi,
        });
    }
    Ok(StrategyProfile::symmetric(
        game.n(),
        s_pinned,
        game.alien_interval().midpoint(),
    ))
}

fn checked_base(game: &GameDefinition, i: usize, base: &StrategyProfile) -> Result<Vec<f64>> {
    game.check_group1(i)?;
    let mut v = base.as_slice().to_vec();
    if v.len() != game.n() {
        return Err(Error::ProfileLength {
            expected: game.n(),
            got: v.len(),
        });
    }
    // placeholders so the remaining coordinates can be validated
    v[i] = game.group1_interval().lo;
    v[game.alien()] = game.alien_interval().lo;
    game.check_profile(&v)?;
    Ok(v)
}

fn payoff_with(game: &GameDefinition, i: usize, base: &[f64], s_i: f64, s_n: f64) -> Result<f64> {
    let mut s = base.to_vec();
    s[i] = s_i;
    s[game.alien()] = s_n;
    game.payoff_at(i, &s)
}

fn check_own(game: &GameDefinition, i: usize, s_i: f64) -> Result<()> {
    let iv = game.group1_interval();
    if !iv.contains(s_i) {
        return Err(Error::Domain {
            player: i,
            value: s_i,
            lo: iv.lo,
            hi: iv.hi,
        });
    }
    Ok(())
}

/// `min_{s_n} u_i` with player `i` at `s_i` and the rest from `base`.
pub fn inner_min_at(
    game: &GameDefinition,
    i: usize,
    base: &StrategyProfile,
    s_i: f64,
    tol: &NestedTolerances,
) -> Result<OptResult> {
    let base = checked_base(game, i, base)?;
    check_own(game, i, s_i)?;
    let alien = game.alien_interval();
    minimize_unimodal(
        |s_n| payoff_with(game, i, &base, s_i, s_n),
        alien.lo,
        alien.hi,
        tol.inner_xtol,
    )
}

/// `max_{s_i} u_i` with the alien at `s_n` and the rest from `base`.
pub fn inner_max_at(
    game: &GameDefinition,
    i: usize,
    base: &StrategyProfile,
    s_n: f64,
    tol: &NestedTolerances,
) -> Result<OptResult> {
    let base = checked_base(game, i, base)?;
    let own = game.group1_interval();
    maximize_unimodal(
        |s_i| payoff_with(game, i, &base, s_i, s_n),
        own.lo,
        own.hi,
        tol.inner_xtol,
    )
}

pub fn maximin_at(
    game: &GameDefinition,
    i: usize,
    base: &StrategyProfile,
    tol: &NestedTolerances,
) -> Result<OptResult> {
    tol.validate()?;
    let base = checked_base(game, i, base)?;
    let own = game.group1_interval();
    let alien = game.alien_interval();
    maximize_unimodal(
        |s_i| {
            minimize_unimodal(
                |s_n| payoff_with(game, i, &base, s_i, s_n),
                alien.lo,
                alien.hi,
                tol.inner_xtol,
            )
            .map(|r| r.value)
        },
        own.lo,
        own.hi,
        tol.outer_xtol,
    )
}

pub fn minimax_at(
    game: &GameDefinition,
    i: usize,
    base: &StrategyProfile,
    tol: &NestedTolerances,
) -> Result<OptResult> {
    tol.validate()?;
    let base = checked_base(game, i, base)?;
    let own = game.group1_interval();
    let alien = game.alien_interval();
    minimize_unimodal(
        |s_n| {
            maximize_unimodal(
                |s_i| payoff_with(game, i, &base, s_i, s_n),
                own.lo,
                own.hi,
                tol.inner_xtol,
            )
            .map(|r| r.value)
        },
        alien.lo,
        alien.hi,
        tol.outer_xtol,
    )
}

pub fn inner_min_over_alien(
    game: &GameDefinition,
    i: usize,
    s_pinned: f64,
    s_i: f64,
    tol: &NestedTolerances,
) -> Result<OptResult> {
    inner_min_at(game, i, &symmetric_base(game, s_pinned)?, s_i, tol)
}

pub fn maximin(
    game: &GameDefinition,
    i: usize,
    s_pinned: f64,
    tol: &NestedTolerances,
) -> Result<OptResult> {
    maximin_at(game, i, &symmetric_base(game, s_pinned)?, tol)
}

pub fn minimax(
    game: &GameDefinition,
    i: usize,
    s_pinned: f64,
    tol: &NestedTolerances,
) -> Result<OptResult> {
    minimax_at(game, i, &symmetric_base(game, s_pinned)?, tol)
}

pub fn check_sion(
    game: &GameDefinition,
    i: usize,
    s_pinned: f64,
    value_tol: f64,
    tol: &NestedTolerances,
) -> Result<PairMinimaxReport> {
    let base = symmetric_base(game, s_pinned)?;
    sion_report(game, i, &base, Pinning::Symmetric(s_pinned), value_tol, tol)
}

pub fn check_sion_at(
    game: &GameDefinition,
    i: usize,
    base: &StrategyProfile,
    value_tol: f64,
    tol: &NestedTolerances,
) -> Result<PairMinimaxReport> {
    sion_report(game, i, base, Pinning::Profile(base.as_slice().to_vec()), value_tol, tol)
}

fn sion_report(
    game: &GameDefinition,
    i: usize,
    base: &StrategyProfile,
    pinning: Pinning,
    value_tol: f64,
    tol: &NestedTolerances,
) -> Result<PairMinimaxReport> {
    if value_tol.is_nan() || value_tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("value_tol must be positive, got {value_tol}")));
    }
    let lower = maximin_at(game, i, base, tol)?;
    let upper = minimax_at(game, i, base, tol)?;
    let gap = upper.value - lower.value;
    let sion_holds = gap.abs() <= value_tol;
    let at_boundary = lower.at_boundary || upper.at_boundary;
    let status = match (at_boundary, sion_holds) {
        (true, _) => SionStatus::InconclusiveBoundary,
        (false, true) => SionStatus::Holds,
        (false, false) => SionStatus::Fails,
    };
    Ok(PairMinimaxReport {
        player: i,
        pinning,
        maximin_arg: lower.arg,
        maximin_value: lower.value,
        minimax_arg: upper.arg,
        minimax_value: upper.value,
        gap,
        value_tol,
        sion_holds,
        status,
        weak_duality_ok: lower.value <= upper.value + WEAK_DUALITY_SLACK,
        at_boundary,
        plateau: lower.plateau || upper.plateau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cournot::{build_game, CournotParams};
    use crate::scalar::{grid_argopt, Mode};

    fn cournot(a: f64, c: [f64; 4]) -> GameDefinition {
        build_game(&CournotParams::new(a, c).unwrap()).unwrap()
    }

    #[test]
    fn inner_min_matches_first_order_condition() {
        let g = cournot(10.0, [1.0; 4]);
        let tol = NestedTolerances::default();
        let r = inner_min_over_alien(&g, 0, 2.25, 2.25, &tol).unwrap();
        // ∂π_A/∂x_D = 0  ⇒  x_D = (a + 2x_A - 2x_B - 2x_C - c_D) / 2
        let analytic = (10.0 + 2.0 * 2.25 - 4.0 * 2.25 - 1.0) / 2.0;
        assert_eq!(analytic, 2.25);
        assert!((r.arg - analytic).abs() < 1e-7, "{r:?}");
        let base = [2.25, 2.25, 2.25, 0.0];
        let grid = grid_argopt(
            |x| g.payoff_at(0, &[base[0], base[1], base[2], x]),
            0.0,
            10.0,
            5001,
            Mode::Min,
        )
        .unwrap();
        assert!((r.arg - grid.arg).abs() <= 10.0 / 5000.0 + 1e-9);
    }

    #[test]
    fn argument_errors() {
        let g = cournot(10.0, [1.0; 4]);
        let tol = NestedTolerances::default();
        assert!(matches!(
            inner_min_over_alien(&g, 3, 2.0, 2.0, &tol),
            Err(Error::NotGroup1 { player: 3, .. })
        ));
        assert!(matches!(
            inner_min_over_alien(&g, 4, 2.0, 2.0, &tol),
            Err(Error::PlayerIndex { .. })
        ));
        assert!(matches!(
            inner_min_over_alien(&g, 0, 2.0, 11.0, &tol),
            Err(Error::Domain { player: 0, .. })
        ));
        assert!(maximin(&g, 0, -1.0, &tol).is_err());
        assert!(check_sion(&g, 0, 2.0, 0.0, &tol).is_err());
        let loose = NestedTolerances { inner_xtol: 1e-8, outer_xtol: 1e-7 };
        assert!(maximin(&g, 0, 2.0, &loose).is_err());
    }

    #[test]
    fn one_alien_maximin_and_minimax() {
        let g = cournot(10.0, [1.0, 1.0, 1.0, 2.0]);
        let tol = NestedTolerances::default();
        let lo = maximin(&g, 0, 2.375, &tol).unwrap();
        assert!((lo.arg - 2.375).abs() <= 1e-5, "{lo:?}");
        let hi = minimax(&g, 0, 2.375, &tol).unwrap();
        assert!((hi.arg - 1.625).abs() <= 1e-5, "{hi:?}");
        let rep = check_sion(&g, 0, 2.375, 1e-6, &tol).unwrap();
        assert!(rep.sion_holds && rep.weak_duality_ok);
        assert_eq!(rep.status, SionStatus::Holds);
        assert!(rep.gap.abs() <= 1e-6);
    }

    #[test]
    fn symmetric_family_any_pinning() {
        let g = cournot(10.0, [1.0; 4]);
        let tol = NestedTolerances::default();
        for s in [0.5, 1.0, 2.25, 2.5] {
            let r = maximin(&g, 0, s, &tol).unwrap();
            assert!((r.arg - 2.25).abs() <= 1e-5, "pin {s}: {r:?}");
        }
        let r = minimax(&g, 0, 2.25, &tol).unwrap();
        assert!((r.arg - 2.25).abs() <= 1e-5);
    }

    #[test]
    fn two_alien_maximin_is_not_nash() {
        let g = cournot(10.0, [1.0, 1.0, 2.0, 2.0]);
        let r = maximin(&g, 0, 2.5, &NestedTolerances::default()).unwrap();
        assert!((r.arg - 2.375).abs() <= 1e-5);
        assert!((r.arg - 2.5).abs() > 0.1);
    }

    #[test]
    fn group1_players_agree() {
        let g = cournot(10.0, [1.0, 1.0, 1.0, 2.0]);
        let tol = NestedTolerances::default();
        for s in [1.0, 2.0, 3.0] {
            let args: Vec<f64> = (0..3).map(|i| maximin(&g, i, s, &tol).unwrap().arg).collect();
            assert!((args[0] - args[1]).abs() <= 1e-7 && (args[0] - args[2]).abs() <= 1e-7, "{args:?}");
        }
    }

    #[test]
    fn general_pinning_matches_symmetric() {
        let g = cournot(10.0, [1.0, 1.0, 1.0, 2.0]);
        let tol = NestedTolerances::default();
        let base = StrategyProfile::new(vec![0.0, 2.0, 2.0, 0.0]);
        let a = maximin_at(&g, 0, &base, &tol).unwrap();
        let b = maximin(&g, 0, 2.0, &tol).unwrap();
        assert_eq!(a.arg, b.arg);
        let bad = StrategyProfile::new(vec![0.0, 20.0, 2.0, 0.0]);
        assert!(matches!(maximin_at(&g, 0, &bad, &tol), Err(Error::Domain { player: 1, .. })));
    }
}

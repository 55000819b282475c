//! Game model: players, strategy intervals, payoffs and the
//! group-1/alien partition.
//!
//! Players are indexed from zero. Players `0..n-1` form group 1 and share
//! one strategy interval; player `n-1` is the alien.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dsl::Expr;
use crate::error::{Error, Result};
use crate::scalar::unimodality_probe;

/// Maximum |Σ u_i| accepted on a sampled profile.
pub const ZERO_SUM_TOL: f64 = 1e-9;
/// Maximum permutation asymmetry accepted for a symmetric group 1.
pub const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyInterval {
    pub lo: f64,
    pub hi: f64,
}

impl StrategyInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument(format!(
                "strategy interval [{lo}, {hi}] must satisfy lo < hi"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StrategyProfile(Vec<f64>);

impl StrategyProfile {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    /// Group 1 all at `group1`, alien at `alien`.
    pub fn symmetric(n: usize, group1: f64, alien: f64) -> Self {
        let mut v = vec![group1; n];
        v[n - 1] = alien;
        Self(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn with(&self, i: usize, value: f64) -> Self {
        let mut v = self.0.clone();
        v[i] = value;
        Self(v)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for StrategyProfile {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for StrategyProfile {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

/// A payoff function `u_i`. Implementations must be pure.
pub trait Payoff: Send + Sync + fmt::Debug {
    fn eval(&self, s: &[f64]) -> Result<f64>;
}

/// Payoff backed by a parsed expression with parameters already bound.
#[derive(Debug, Clone)]
pub struct ExprPayoff {
    expr: Expr,
}

impl ExprPayoff {
    pub fn new(expr: Expr, params: &BTreeMap<String, f64>) -> Result<Self> {
        Ok(Self {
            expr: expr.bind(params)?,
        })
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

impl Payoff for ExprPayoff {
    fn eval(&self, s: &[f64]) -> Result<f64> {
        Ok(self.expr.eval(s, &BTreeMap::new())?)
    }
}

/// Wraps a plain closure. Library-only; configs go through [`ExprPayoff`].
pub struct FnPayoff<F>(pub F);

impl<F> fmt::Debug for FnPayoff<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnPayoff")
    }
}

impl<F> Payoff for FnPayoff<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    fn eval(&self, s: &[f64]) -> Result<f64> {
        Ok((self.0)(s))
    }
}

#[derive(Debug, Clone)]
pub struct GameDefinition {
    label: String,
    n: usize,
    group1: StrategyInterval,
    alien: StrategyInterval,
    payoffs: Vec<Arc<dyn Payoff>>,
    group1_symmetric: bool,
}

impl GameDefinition {
    /// `group1_symmetric` is a declaration; check it with
    /// [`validate_group1_symmetry`].
    pub fn new(
        label: impl Into<String>,
        group1: StrategyInterval,
        alien: StrategyInterval,
        payoffs: Vec<Arc<dyn Payoff>>,
        group1_symmetric: bool,
    ) -> Result<Self> {
        let n = payoffs.len();
        if n < 3 {
            return Err(Error::InvalidArgument(format!(
                "a game needs at least 3 players, got {n}"
            )));
        }
        StrategyInterval::new(group1.lo, group1.hi)?;
        StrategyInterval::new(alien.lo, alien.hi)?;
        Ok(Self {
            label: label.into(),
            n,
            group1,
            alien,
            payoffs,
            group1_symmetric,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alien(&self) -> usize {
        self.n - 1
    }

    pub fn group1_interval(&self) -> StrategyInterval {
        self.group1
    }

    pub fn alien_interval(&self) -> StrategyInterval {
        self.alien
    }

    pub fn declared_symmetric(&self) -> bool {
        self.group1_symmetric
    }

    pub fn interval(&self, player: usize) -> StrategyInterval {
        if player == self.alien() {
            self.alien
        } else {
            self.group1
        }
    }

    pub fn check_player(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::PlayerIndex { index: i, n: self.n });
        }
        Ok(())
    }

    pub fn check_group1(&self, i: usize) -> Result<()> {
        self.check_player(i)?;
        if i == self.alien() {
            return Err(Error::NotGroup1 {
                player: i,
                alien: self.alien(),
            });
        }
        Ok(())
    }

    pub fn check_profile(&self, s: &[f64]) -> Result<()> {
        if s.len() != self.n {
            return Err(Error::ProfileLength {
                expected: self.n,
                got: s.len(),
            });
        }
        for (player, &value) in s.iter().enumerate() {
            let iv = self.interval(player);
            if !iv.contains(value) {
                return Err(Error::Domain {
                    player,
                    value,
                    lo: iv.lo,
                    hi: iv.hi,
                });
            }
        }
        Ok(())
    }

    /// `u_i(s)` on a raw slice, with the same validation as
    /// [`evaluate_payoff`].
    pub fn payoff_at(&self, i: usize, s: &[f64]) -> Result<f64> {
        self.check_player(i)?;
        self.check_profile(s)?;
        self.payoffs[i].eval(s)
    }

    pub fn payoffs_at(&self, s: &[f64]) -> Result<Vec<f64>> {
        (0..self.n).map(|i| self.payoff_at(i, s)).collect()
    }

    pub fn random_profile<R: Rng>(&self, rng: &mut R) -> StrategyProfile {
        StrategyProfile(
            (0..self.n)
                .map(|p| {
                    let iv = self.interval(p);
                    rng.gen_range(iv.lo..=iv.hi)
                })
                .collect(),
        )
    }
}

pub fn evaluate_payoff(game: &GameDefinition, i: usize, s: &StrategyProfile) -> Result<f64> {
    game.payoff_at(i, s.as_slice())
}

/// Worst case found by a sampled structural check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleCheck {
    pub max_deviation: f64,
    pub worst_profile: StrategyProfile,
    pub samples: usize,
}

fn require_samples(samples: usize) -> Result<()> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    Ok(())
}

/// Max |Σ_i u_i(s)| over `samples` seeded random profiles.
pub fn validate_zero_sum(game: &GameDefinition, samples: usize, seed: u64) -> Result<SampleCheck> {
    require_samples(samples)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = SampleCheck {
        max_deviation: -1.0,
        worst_profile: StrategyProfile(Vec::new()),
        samples,
    };
    for _ in 0..samples {
        let s = game.random_profile(&mut rng);
        let sum: f64 = game.payoffs_at(s.as_slice())?.iter().sum();
        if sum.abs() > worst.max_deviation || !sum.is_finite() {
            worst.max_deviation = sum.abs();
            worst.worst_profile = s;
        }
    }
    Ok(worst)
}

/// Samples the shape the solvers rely on: every group-1 payoff rising then
/// falling in its own strategy and falling then rising in the alien's, and the
/// alien's payoff rising then falling in its own strategy. Returns one message
/// per kind of violation seen. A clean result is evidence, not a proof.
pub fn probe_unimodality(game: &GameDefinition, samples: usize, seed: u64) -> Result<Vec<String>> {
    require_samples(samples)?;
    const POINTS: usize = 201;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x756e_696d);
    let alien = game.alien();
    // (payoff owner, varied coordinate, sign applied before the probe)
    let mut kinds: Vec<(usize, usize, f64)> = (0..alien).flat_map(|i| [(i, i, 1.0), (i, alien, -1.0)]).collect();
    kinds.push((alien, alien, 1.0));
    let mut found = vec![None; kinds.len()];
    for _ in 0..samples {
        let s = game.random_profile(&mut rng);
        for (k, &(owner, var, sign)) in kinds.iter().enumerate() {
            if found[k].is_some() {
                continue;
            }
            let iv = game.interval(var);
            let mut work = s.as_slice().to_vec();
            let probe = unimodality_probe(
                |x| {
                    work[var] = x;
                    game.payoff_at(owner, &work).map(|v| sign * v)
                },
                iv.lo,
                iv.hi,
                POINTS,
            );
            // evaluation faults are reported by the solvers themselves
            if let Ok(false) = probe {
                found[k] = Some(s.as_slice().to_vec());
            }
        }
    }
    Ok(kinds
        .iter()
        .zip(found)
        .filter_map(|(&(owner, var, sign), at)| {
            let at = at?;
            let shape = if sign > 0.0 { "quasi-concave" } else { "quasi-convex" };
            Some(format!(
                "payoff of player {} does not look {shape} in the strategy of player {} (sampled near {at:?})",
                owner + 1,
                var + 1
            ))
        })
        .collect())
}

/// Max |u_i(s) - u_j(s with s_i and s_j swapped)| over random profiles and
/// random group-1 pairs.
pub fn validate_group1_symmetry(
    game: &GameDefinition,
    samples: usize,
    seed: u64,
) -> Result<SampleCheck> {
    require_samples(samples)?;
    let group1 = game.alien();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(samples);
    for _ in 0..samples {
        let i = rng.gen_range(0..group1);
        let mut j = rng.gen_range(0..group1 - 1);
        if j >= i {
            j += 1;
        }
        pairs.push((i, j));
    }
    symmetry_over(game, &pairs, &mut rng)
}

/// Same check restricted to one pair of group-1 players.
pub fn validate_pair_symmetry(
    game: &GameDefinition,
    i: usize,
    j: usize,
    samples: usize,
    seed: u64,
) -> Result<SampleCheck> {
    require_samples(samples)?;
    game.check_group1(i)?;
    game.check_group1(j)?;
    if i == j {
        return Err(Error::InvalidArgument("pair symmetry needs two distinct players".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    symmetry_over(game, &vec![(i, j); samples], &mut rng)
}

fn symmetry_over(
    game: &GameDefinition,
    pairs: &[(usize, usize)],
    rng: &mut ChaCha8Rng,
) -> Result<SampleCheck> {
    let mut worst = SampleCheck {
        max_deviation: -1.0,
        worst_profile: StrategyProfile(Vec::new()),
        samples: pairs.len(),
    };
    for &(i, j) in pairs {
        let s = game.random_profile(rng);
        let mut swapped = s.clone();
        swapped.0.swap(i, j);
        let dev = (game.payoff_at(i, s.as_slice())? - game.payoff_at(j, swapped.as_slice())?).abs();
        if dev > worst.max_deviation || !dev.is_finite() {
            worst.max_deviation = dev;
            worst.worst_profile = s;
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_game() -> GameDefinition {
        let iv = StrategyInterval::new(0.0, 1.0).unwrap();
        GameDefinition::new(
            "not zero-sum",
            iv,
            iv,
            vec![
                Arc::new(FnPayoff(|s: &[f64]| s[0])),
                Arc::new(FnPayoff(|s: &[f64]| s[1])),
                Arc::new(FnPayoff(|_: &[f64]| 0.0)),
            ],
            false,
        )
        .unwrap()
    }

    #[test]
    fn rejects_small_games_and_bad_intervals() {
        let iv = StrategyInterval::new(0.0, 1.0).unwrap();
        let two: Vec<Arc<dyn Payoff>> = vec![
            Arc::new(FnPayoff(|s: &[f64]| s[0])),
            Arc::new(FnPayoff(|s: &[f64]| -s[0])),
        ];
        assert!(GameDefinition::new("g", iv, iv, two, true).is_err());
        assert!(StrategyInterval::new(1.0, 1.0).is_err());
        assert!(StrategyInterval::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn domain_error_names_player() {
        let g = linear_game();
        let err = evaluate_payoff(&g, 0, &StrategyProfile::new(vec![-0.1, 0.5, 0.5])).unwrap_err();
        assert!(matches!(err, Error::Domain { player: 0, .. }));
        let err = evaluate_payoff(&g, 2, &StrategyProfile::new(vec![0.1, 0.5, 1.5])).unwrap_err();
        assert!(matches!(err, Error::Domain { player: 2, .. }));
        let err = evaluate_payoff(&g, 3, &StrategyProfile::new(vec![0.1, 0.5, 0.5])).unwrap_err();
        assert!(matches!(err, Error::PlayerIndex { index: 3, n: 3 }));
        let err = evaluate_payoff(&g, 0, &StrategyProfile::new(vec![0.1, 0.5])).unwrap_err();
        assert!(matches!(err, Error::ProfileLength { .. }));
    }

    #[test]
    fn non_zero_sum_detected() {
        let g = linear_game();
        let r = validate_zero_sum(&g, 50, 1).unwrap();
        assert!(r.max_deviation > 0.0);
        let worst_sum: f64 = g.payoffs_at(r.worst_profile.as_slice()).unwrap().iter().sum();
        assert_eq!(worst_sum.abs(), r.max_deviation);
        assert!(validate_zero_sum(&g, 0, 1).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = linear_game();
        assert_eq!(validate_zero_sum(&g, 20, 9).unwrap(), validate_zero_sum(&g, 20, 9).unwrap());
        assert_eq!(
            validate_group1_symmetry(&g, 20, 9).unwrap(),
            validate_group1_symmetry(&g, 20, 9).unwrap()
        );
    }

    #[test]
    fn pair_symmetry_arguments() {
        let g = linear_game();
        assert!(validate_pair_symmetry(&g, 0, 0, 5, 1).is_err());
        assert!(validate_pair_symmetry(&g, 0, 2, 5, 1).is_err());
        // u_1 = s_1 and u_2 = s_2 are mirror images
        assert_eq!(validate_pair_symmetry(&g, 0, 1, 5, 1).unwrap().max_deviation, 0.0);
    }

    #[test]
    fn unimodality_probe_flags_convex_own_payoff() {
        let iv = StrategyInterval::new(-1.0, 1.0).unwrap();
        // u1 is convex in s1, so best responses are not well defined
        let game = GameDefinition::new(
            "convex",
            iv,
            iv,
            vec![
                Arc::new(FnPayoff(|s: &[f64]| s[0] * s[0] - s[1] * s[1])),
                Arc::new(FnPayoff(|s: &[f64]| s[1] * s[1] - s[0] * s[0])),
                Arc::new(FnPayoff(|_: &[f64]| 0.0)),
            ],
            true,
        )
        .unwrap();
        let found = probe_unimodality(&game, 20, 1).unwrap();
        assert_eq!(found.len(), 2, "{found:?}");
        assert!(found[0].contains("player 1 does not look quasi-concave in the strategy of player 1"));

        let saddle = GameDefinition::new(
            "saddle",
            iv,
            iv,
            vec![
                Arc::new(FnPayoff(|s: &[f64]| -s[0] * s[0] + s[2] * s[2] + s[0] * s[2])),
                Arc::new(FnPayoff(|s: &[f64]| -s[1] * s[1] + s[2] * s[2] + s[1] * s[2])),
                Arc::new(FnPayoff(|s: &[f64]| s[0] * s[0] + s[1] * s[1] - 2.0 * s[2] * s[2] - (s[0] + s[1]) * s[2])),
            ],
            true,
        )
        .unwrap();
        assert!(probe_unimodality(&saddle, 20, 1).unwrap().is_empty());
    }
}

//! One-dimensional optimization over a compact interval.
//!
//! Objectives are fallible closures so that payoff evaluation errors and
//! nested optimizations can propagate through the search.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 1/φ, the golden ratio conjugate.
pub const INV_PHI: f64 = 0.618_033_988_749_894_9;

const PLATEAU_REL: f64 = 1e-13;
const MAX_GOLDEN_ITERS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Max,
    Min,
}

impl Mode {
    /// True when `a` is strictly better than `b`.
    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Mode::Max => a > b,
            Mode::Min => a < b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub arg: f64,
    pub value: f64,
    pub at_boundary: bool,
    pub iterations: usize,
    pub plateau: bool,
}

fn check_interval(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "interval [{lo}, {hi}] is not a finite non-degenerate interval"
        )));
    }
    Ok(())
}

fn finite_at<F>(f: &mut F, x: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let v = f(x)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { x })
    }
}

pub fn maximize_unimodal<F>(f: F, lo: f64, hi: f64, xtol: f64) -> Result<OptResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    golden(f, lo, hi, xtol, Mode::Max)
}

pub fn minimize_unimodal<F>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Result<OptResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut r = golden(|x| f(x).map(|v| -v), lo, hi, xtol, Mode::Max)?;
    r.value = -r.value;
    Ok(r)
}

pub fn optimize_unimodal<F>(f: F, lo: f64, hi: f64, xtol: f64, mode: Mode) -> Result<OptResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    match mode {
        Mode::Max => maximize_unimodal(f, lo, hi, xtol),
        Mode::Min => minimize_unimodal(f, lo, hi, xtol),
    }
}

/// Golden-section search. The bracket shrinks until its width is at most
/// `2 * xtol`; the answer is the bracket midpoint unless an untouched
/// interval endpoint evaluates strictly better. Ties keep the left part of
/// the bracket, so flat functions drift toward `lo`.
fn golden<F>(mut f: F, lo: f64, hi: f64, xtol: f64, mode: Mode) -> Result<OptResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    check_interval(lo, hi)?;
    if !(xtol > 0.0 && xtol.is_finite()) {
        return Err(Error::InvalidArgument(format!("xtol must be positive, got {xtol}")));
    }

    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = finite_at(&mut f, c)?;
    let mut fd = finite_at(&mut f, d)?;
    let mut iterations = 0;

    while b - a > 2.0 * xtol && iterations < MAX_GOLDEN_ITERS {
        if mode.better(fd, fc) {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = finite_at(&mut f, d)?;
        } else {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = finite_at(&mut f, c)?;
        }
        iterations += 1;
        if !(a < c && c <= d && d < b) {
            // bracket collapsed to adjacent floats
            break;
        }
    }

    let mut arg = 0.5 * (a + b);
    let mut value = finite_at(&mut f, arg)?;
    if a == lo {
        let v = finite_at(&mut f, lo)?;
        if mode.better(v, value) {
            arg = lo;
            value = v;
        }
    }
    if b == hi {
        let v = finite_at(&mut f, hi)?;
        if mode.better(v, value) {
            arg = hi;
            value = v;
        }
    }

    let plateau = detect_plateau(&mut f, lo, hi, arg, value, xtol)?;
    Ok(OptResult {
        arg,
        value,
        at_boundary: (arg - lo).abs() <= xtol || (hi - arg).abs() <= xtol,
        iterations,
        plateau,
    })
}

/// A plateau is reported when the objective does not move, within a
/// relative `1e-13`, over a probe neighbourhood that is macroscopic compared
/// with the final bracket.
fn detect_plateau<F>(f: &mut F, lo: f64, hi: f64, arg: f64, value: f64, xtol: f64) -> Result<bool>
where
    F: FnMut(f64) -> Result<f64>,
{
    let delta = (1e-4 * (hi - lo)).max(100.0 * xtol);
    let thresh = PLATEAU_REL * (1.0 + value.abs());
    let mut probed = false;
    for x in [arg - delta, arg + delta] {
        if x < lo || x > hi {
            continue;
        }
        probed = true;
        if (finite_at(f, x)? - value).abs() >= thresh {
            return Ok(false);
        }
    }
    Ok(probed)
}

/// Brute-force oracle on `points` uniformly spaced samples including both
/// endpoints. Ties go to the lowest `x`.
pub fn grid_argopt<F>(mut f: F, lo: f64, hi: f64, points: usize, mode: Mode) -> Result<OptResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    check_interval(lo, hi)?;
    if points < 2 {
        return Err(Error::InvalidArgument(format!("grid needs at least 2 points, got {points}")));
    }
    let last = points - 1;
    let x_at = |k: usize| {
        if k == last {
            hi
        } else {
            lo + (hi - lo) * (k as f64) / (last as f64)
        }
    };
    let mut best_k = 0;
    let mut best = finite_at(&mut f, lo)?;
    let (mut vmin, mut vmax) = (best, best);
    for k in 1..points {
        let v = finite_at(&mut f, x_at(k))?;
        vmin = vmin.min(v);
        vmax = vmax.max(v);
        if mode.better(v, best) {
            best = v;
            best_k = k;
        }
    }
    Ok(OptResult {
        arg: x_at(best_k),
        value: best,
        at_boundary: best_k == 0 || best_k == last,
        iterations: points,
        plateau: vmax - vmin < PLATEAU_REL * (1.0 + best.abs()),
    })
}

/// Grid check that `f` weakly rises and then weakly falls on `[lo, hi]`.
/// Differences below a relative `1e-12` count as flat.
pub fn unimodality_probe<F>(mut f: F, lo: f64, hi: f64, points: usize) -> Result<bool>
where
    F: FnMut(f64) -> Result<f64>,
{
    check_interval(lo, hi)?;
    if points < 4 {
        return Err(Error::InvalidArgument(format!("probe needs at least 4 points, got {points}")));
    }
    let last = (points - 1) as f64;
    let mut prev = f(lo)?;
    let mut falling = false;
    for k in 1..points {
        let x = if k == points - 1 { hi } else { lo + (hi - lo) * k as f64 / last };
        let v = f(x)?;
        if !v.is_finite() {
            return Ok(false);
        }
        let eps = 1e-12 * (1.0 + v.abs().max(prev.abs()));
        if v > prev + eps {
            if falling {
                return Ok(false);
            }
        } else if v < prev - eps {
            falling = true;
        }
        prev = v;
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ok<F: Fn(f64) -> f64>(f: F) -> impl FnMut(f64) -> Result<f64> {
        move |x| Ok(f(x))
    }

    #[test]
    fn quadratic_maximum() {
        let r = maximize_unimodal(ok(|x| -(x - 2.0) * (x - 2.0)), 0.0, 5.0, 1e-9).unwrap();
        assert!((r.arg - 2.0).abs() <= 1e-8, "{r:?}");
        assert!(!r.at_boundary);
        assert!(!r.plateau);
    }

    #[test]
    fn monotone_hits_boundary() {
        let r = maximize_unimodal(ok(|x| x), 0.0, 1.0, 1e-9).unwrap();
        assert_eq!(r.arg, 1.0);
        assert_eq!(r.value, 1.0);
        assert!(r.at_boundary);
        let r = minimize_unimodal(ok(|x| -x), 0.0, 1.0, 1e-9).unwrap();
        assert_eq!(r.arg, 1.0);
        assert_eq!(r.value, -1.0);
        assert!(r.at_boundary);
    }

    #[test]
    fn constant_is_plateau() {
        let r = maximize_unimodal(ok(|_| 7.0), 0.0, 1.0, 1e-9).unwrap();
        assert!(r.plateau);
        assert_eq!(r.value, 7.0);
    }

    #[test]
    fn symmetric_bracket_is_not_plateau() {
        // first probes are mirror images around the optimum
        let r = maximize_unimodal(ok(|x| -(x - 2.5) * (x - 2.5)), 0.0, 5.0, 1e-9).unwrap();
        assert!(!r.plateau);
        assert!((r.arg - 2.5).abs() < 1e-8);
    }

    #[test]
    fn minimization_cases() {
        let r = minimize_unimodal(ok(|x| (x - 1.0) * (x - 1.0)), 0.0, 5.0, 1e-9).unwrap();
        assert!((r.arg - 1.0).abs() < 1e-8);
        let r = minimize_unimodal(ok(|x| (x - 0.3).abs()), 0.0, 1.0, 1e-9).unwrap();
        assert!((r.arg - 0.3).abs() < 2e-9);
    }

    #[test]
    fn non_finite_is_a_fault() {
        let f = |x: f64| if x > 0.9 { f64::NAN } else { x };
        let err = maximize_unimodal(ok(f), 0.0, 1.0, 1e-9).unwrap_err();
        assert!(matches!(err, Error::NonFinite { x } if x > 0.9));
    }

    #[test]
    fn bad_arguments() {
        assert!(maximize_unimodal(ok(|x| x), 1.0, 1.0, 1e-9).is_err());
        assert!(maximize_unimodal(ok(|x| x), 0.0, 1.0, 0.0).is_err());
        assert!(grid_argopt(ok(|x| x), 0.0, 1.0, 1, Mode::Max).is_err());
        assert!(unimodality_probe(ok(|x| x), 0.0, 1.0, 3).is_err());
    }

    #[test]
    fn grid_cases() {
        let r = grid_argopt(ok(|x| -(x - 2.0) * (x - 2.0)), 0.0, 5.0, 5001, Mode::Max).unwrap();
        assert!((r.arg - 2.0).abs() <= 1e-3);
        let r = grid_argopt(ok(|x| x * x), -1.0, 1.0, 3, Mode::Min).unwrap();
        assert_eq!(r.arg, 0.0);
        let r = grid_argopt(ok(|_| 3.0), 0.5, 1.0, 11, Mode::Max).unwrap();
        assert_eq!(r.arg, 0.5);
        assert!(r.plateau);
    }

    #[test]
    fn probe_cases() {
        assert!(unimodality_probe(ok(|x| -(x - 2.0) * (x - 2.0)), 0.0, 5.0, 101).unwrap());
        assert!(!unimodality_probe(ok(|x| (5.0 * x).sin()), 0.0, 3.0, 101).unwrap());
        assert!(unimodality_probe(ok(|x| x), 0.0, 3.0, 101).unwrap());
        assert!(unimodality_probe(ok(|x| -x), 0.0, 3.0, 101).unwrap());
    }

    fn iteration_bound(lo: f64, hi: f64, xtol: f64) -> usize {
        (((hi - lo) / xtol).ln() / (1.0 / INV_PHI).ln()).ceil() as usize + 5
    }

    proptest! {
        #[test]
        fn agrees_with_grid_oracle(peak in -3.0f64..8.0, curv in 0.1f64..10.0, lo in -4.0f64..0.0, w in 1.0f64..10.0) {
            let hi = lo + w;
            let f = |x: f64| -curv * (x - peak) * (x - peak);
            let xtol = 1e-9;
            let g = maximize_unimodal(ok(f), lo, hi, xtol).unwrap();
            let o = grid_argopt(ok(f), lo, hi, 5001, Mode::Max).unwrap();
            prop_assert!((g.arg - o.arg).abs() <= w / 5000.0 + xtol);
            prop_assert!(g.iterations <= iteration_bound(lo, hi, xtol));
        }

        #[test]
        fn max_of_f_equals_min_of_neg_f(peak in 0.0f64..5.0, k in 1u32..4) {
            let f = move |x: f64| -((x - peak).abs().powi(k as i32));
            let a = maximize_unimodal(ok(f), 0.0, 5.0, 1e-9).unwrap();
            let b = minimize_unimodal(ok(move |x| -f(x)), 0.0, 5.0, 1e-9).unwrap();
            prop_assert_eq!(a.arg, b.arg);
        }
    }
}

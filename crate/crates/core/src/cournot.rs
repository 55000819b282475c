//! Four-firm Cournot oligopoly with relative-profit objectives.
//!
//! Firms A, B, C, D produce a homogeneous good with inverse demand
//! `P = a - X` and constant marginal costs. Each firm maximizes its own
//! profit minus the average of its rivals' profits, so payoffs sum to zero.
//! Firm D is the alien; A, B, C form group 1.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameDefinition, Payoff, StrategyInterval};

pub const FIRMS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Firm {
    A,
    B,
    C,
    D,
}

impl Firm {
    pub const ALL: [Firm; 4] = [Firm::A, Firm::B, Firm::C, Firm::D];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Firm> {
        Self::ALL.get(i).copied()
    }
}

impl fmt::Display for Firm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CournotParams {
    /// Demand intercept.
    pub a: f64,
    /// Marginal costs of A, B, C, D.
    pub c: [f64; 4],
}

impl CournotParams {
    pub fn new(a: f64, c: [f64; 4]) -> Result<Self> {
        let p = Self { a, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "demand intercept must be positive, got {}",
                self.a
            )));
        }
        for (firm, &c) in Firm::ALL.iter().zip(&self.c) {
            if !(c.is_finite() && c >= 0.0 && c < self.a) {
                return Err(Error::InvalidArgument(format!(
                    "cost of firm {firm} must lie in [0, a), got {c}"
                )));
            }
        }
        Ok(())
    }

    /// A, B and C share one cost, so group 1 is symmetric.
    pub fn one_alien(&self) -> bool {
        self.c[0] == self.c[1] && self.c[1] == self.c[2]
    }
}

/// Relative profit of one firm.
#[derive(Debug, Clone, Copy)]
pub struct CournotPayoff {
    pub params: CournotParams,
    pub firm: Firm,
}

impl CournotPayoff {
    pub fn value(&self, x: &[f64]) -> f64 {
        relative_profit(&self.params, self.firm.index(), x)
    }
}

impl Payoff for CournotPayoff {
    fn eval(&self, s: &[f64]) -> Result<f64> {
        Ok(self.value(s))
    }
}

fn relative_profit(p: &CournotParams, i: usize, x: &[f64]) -> f64 {
    let price = p.a - (x[0] + x[1] + x[2] + x[3]);
    let own = (price - p.c[i]) * x[i];
    let rivals: f64 = (0..FIRMS)
        .filter(|&j| j != i)
        .map(|j| (price - p.c[j]) * x[j])
        .sum();
    own - rivals / 3.0
}

/// Four-player game on `[0, a]` per firm. Group 1 is declared symmetric
/// exactly when `c_A = c_B = c_C`.
pub fn build_game(p: &CournotParams) -> Result<GameDefinition> {
    p.validate()?;
    let iv = StrategyInterval::new(0.0, p.a)?;
    let payoffs: Vec<Arc<dyn Payoff>> = Firm::ALL
        .iter()
        .map(|&firm| Arc::new(CournotPayoff { params: *p, firm }) as Arc<dyn Payoff>)
        .collect();
    GameDefinition::new(
        format!("cournot4(a={}, c={:?})", p.a, p.c),
        iv,
        iv,
        payoffs,
        p.one_alien(),
    )
}

/// `∂π_i/∂x_i` for every firm, from the analytic first-order conditions.
pub fn first_order_conditions(p: &CournotParams, x: &[f64; 4]) -> [f64; 4] {
    let total: f64 = x.iter().sum();
    std::array::from_fn(|i| {
        let others = total - x[i];
        p.a - 2.0 * x[i] - others - p.c[i] + others / 3.0
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NashClosedForm {
    pub x: [f64; 4],
    pub all_nonnegative: bool,
}

/// `x_i = (2a - 5c_i + Σ_{j≠i} c_j) / 8`.
pub fn nash_closed_form(p: &CournotParams) -> NashClosedForm {
    let total_c: f64 = p.c.iter().sum();
    let x: [f64; 4] = std::array::from_fn(|i| (2.0 * p.a - 6.0 * p.c[i] + total_c) / 8.0);
    NashClosedForm {
        x,
        all_nonnegative: x.iter().all(|&v| v >= 0.0),
    }
}

fn group1_firm(firm: Firm) -> Result<usize> {
    if firm == Firm::D {
        return Err(Error::InvalidArgument(
            "maximin/minimax closed forms are defined for A, B, C against the alien D".into(),
        ));
    }
    Ok(firm.index())
}

/// `argmax_{x_f} min_{x_D} π_f = (2a - 3c_f + c_D) / 8`.
pub fn maximin_closed_form(p: &CournotParams, firm: Firm) -> Result<f64> {
    let i = group1_firm(firm)?;
    Ok((2.0 * p.a - 3.0 * p.c[i] + p.c[3]) / 8.0)
}

/// `argmin_{x_D} max_{x_f} π_f = (6a - 3c_f - 3c_D - 8x_g - 8x_h) / 8`
/// where `x_g`, `x_h` are the outputs of the other two group-1 firms.
pub fn minimax_closed_form(p: &CournotParams, firm: Firm, others: [f64; 2]) -> Result<f64> {
    let i = group1_firm(firm)?;
    Ok((6.0 * p.a - 3.0 * p.c[i] - 3.0 * p.c[3] - 8.0 * others[0] - 8.0 * others[1]) / 8.0)
}

fn exact(v: f64) -> BigRational {
    BigRational::from_float(v).expect("validated parameters are finite")
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceReport {
    pub params: CournotParams,
    pub maximin_group1: f64,
    pub nash_group1: f64,
    pub minimax_alien: f64,
    pub nash_alien: f64,
    /// Equalities hold in exact rational arithmetic on the given inputs.
    pub exact: bool,
    pub max_float_deviation: f64,
    pub pass: bool,
}

/// With `c_A = c_B = c_C`, the maximin output of each group-1 firm equals its
/// Nash output, and the alien's minimax output at that pinning equals its
/// Nash output.
pub fn one_alien_coincidence(p: &CournotParams) -> Result<CoincidenceReport> {
    p.validate()?;
    if !p.one_alien() {
        return Err(Error::Precondition(format!(
            "one-alien coincidence needs c_A = c_B = c_C, got {:?}",
            p.c
        )));
    }
    let a = exact(p.a);
    let c: Vec<BigRational> = p.c.iter().map(|&v| exact(v)).collect();
    let int = |k: i64| BigRational::from_integer(BigInt::from(k));
    let eight = int(8);
    let total_c = c.iter().fold(BigRational::zero(), |acc, v| acc + v);

    let mut exact_ok = true;
    let mut max_dev = 0.0f64;
    let maximin_q = (int(2) * &a - int(3) * &c[0] + &c[3]) / &eight;
    for i in 0..3 {
        let nash_i = (int(2) * &a - int(6) * &c[i] + &total_c) / &eight;
        let maximin_i = (int(2) * &a - int(3) * &c[i] + &c[3]) / &eight;
        exact_ok &= nash_i == maximin_i;
        let firm = Firm::from_index(i).expect("group-1 index");
        max_dev = max_dev
            .max((nash_closed_form(p).x[i] - maximin_closed_form(p, firm)?).abs());
    }
    let nash_d = (int(2) * &a - int(6) * &c[3] + &total_c) / &eight;
    let minimax_q = (int(6) * &a - int(3) * &c[0] - int(3) * &c[3] - int(16) * &maximin_q) / &eight;
    exact_ok &= nash_d == minimax_q;

    let pin = maximin_closed_form(p, Firm::A)?;
    let minimax_f = minimax_closed_form(p, Firm::A, [pin, pin])?;
    let nash_f = nash_closed_form(p);
    max_dev = max_dev.max((minimax_f - nash_f.x[3]).abs());

    Ok(CoincidenceReport {
        params: *p,
        maximin_group1: ratio_to_f64(&maximin_q),
        nash_group1: nash_f.x[0],
        minimax_alien: ratio_to_f64(&minimax_q),
        nash_alien: nash_f.x[3],
        exact: exact_ok,
        max_float_deviation: max_dev,
        pass: exact_ok && max_dev <= 1e-12,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub params: CournotParams,
    /// `(a - 2c_A + c_D) / 4`.
    pub nash_group1: f64,
    pub nash: [f64; 4],
    /// `(2a - 3c_A + c_D) / 8`.
    pub maximin: f64,
    pub gap: f64,
    /// `|c_D - c_A| / 8`.
    pub gap_formula: f64,
    pub equivalence_fails: bool,
}

/// Two aliens: `c_A = c_B`, `c_C = c_D`, `c_A ≠ c_D`. The maximin output of A
/// against D no longer matches A's Nash output.
pub fn two_alien_counterexample(p: &CournotParams) -> Result<CounterexampleReport> {
    p.validate()?;
    let [ca, cb, cc, cd] = p.c;
    if !(ca == cb && cc == cd && ca != cd) {
        return Err(Error::Precondition(format!(
            "two-alien counterexample needs c_A = c_B, c_C = c_D, c_A != c_D, got {:?}",
            p.c
        )));
    }
    let nash_group1 = (p.a - 2.0 * ca + cd) / 4.0;
    let maximin = maximin_closed_form(p, Firm::A)?;
    let gap = (nash_group1 - maximin).abs();
    let int = |k: i64| BigRational::from_integer(BigInt::from(k));
    let (a, ca_q, cd_q) = (exact(p.a), exact(ca), exact(cd));
    let gap_exact = (&a - int(2) * &ca_q + &cd_q) / int(4) - (int(2) * &a - int(3) * &ca_q + &cd_q) / int(8);
    Ok(CounterexampleReport {
        params: *p,
        nash_group1,
        nash: nash_closed_form(p).x,
        maximin,
        gap,
        gap_formula: (cd - ca).abs() / 8.0,
        equivalence_fails: !gap_exact.is_zero(),
    })
}

/// Smallest distance of any closed-form optimum (Nash outputs, maximin and
/// equal-pinning minimax) from the strategy interval `[0, a]`.
pub fn interior_margin(p: &CournotParams) -> f64 {
    let nash = nash_closed_form(p).x;
    let mut pts = nash.to_vec();
    for firm in [Firm::A, Firm::B, Firm::C] {
        let m = maximin_closed_form(p, firm).expect("group-1 firm");
        pts.push(m);
        pts.push(minimax_closed_form(p, firm, [m, m]).expect("group-1 firm"));
    }
    pts.iter()
        .map(|&v| v.min(p.a - v))
        .fold(f64::INFINITY, f64::min)
}

/// Draws `c_A = c_B = c_C` and `c_D` with `a > 4 max(c)`, redrawing until
/// every closed-form optimum is at least `margin` inside `[0, a]`.
pub fn random_one_alien_params<R: Rng>(rng: &mut R, margin: f64) -> CournotParams {
    loop {
        let a = rng.gen_range(5.0..20.0);
        let cg = rng.gen_range(0.0..a / 4.0);
        let cd = rng.gen_range(0.0..a / 4.0);
        let p = CournotParams { a, c: [cg, cg, cg, cd] };
        if p.validate().is_ok() && interior_margin(&p) >= margin {
            return p;
        }
    }
}

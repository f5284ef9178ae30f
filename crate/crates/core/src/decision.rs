//! Decision-theoretic calibration.
//!
//! A decision maker who trusts a prediction `v` plays the best response
//! `argmax_a v u(a,1) + (1-v) u(a,0)`. The fixed-task decision loss (CFDL)
//! is the payoff gained by best-responding to the recalibrated prediction
//! instead. It is computed here two ways: directly from payoffs, and as the
//! expected Bregman divergence `E[D_phi(p̂ || p)]` of the task's convex
//! potential `phi(v) = E_{y~v} u(sigma(v), y)`. The decision loss (CDL) is
//! the supremum over V-shaped potentials `|v - v*|`, evaluated exactly by a
//! breakpoint scan.

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::joint::EmpiricalJoint;

/// Finite action set with payoffs `u(a, y)` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionTask {
    actions: Vec<String>,
    /// `payoff[a] = [u(a, 0), u(a, 1)]`
    payoff: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
struct RawTask {
    actions: Vec<serde_json::Value>,
    payoff: Vec<[f64; 2]>,
}

impl<'de> Deserialize<'de> for DecisionTask {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawTask::deserialize(d)?;
        let actions = raw
            .actions
            .into_iter()
            .map(|v| match v {
                serde_json::Value::String(s) => s,
                other => other.to_string(),
            })
            .collect();
        DecisionTask::new(actions, raw.payoff).map_err(serde::de::Error::custom)
    }
}

impl DecisionTask {
    pub fn new(actions: Vec<String>, payoff: Vec<[f64; 2]>) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::InvalidParameter("a task needs at least one action".into()));
        }
        if actions.len() != payoff.len() {
            return Err(Error::InvalidParameter(format!(
                "{} actions but {} payoff rows",
                actions.len(),
                payoff.len()
            )));
        }
        if let Some(bad) = payoff
            .iter()
            .flatten()
            .find(|u| !(u.is_finite() && (0.0..=1.0).contains(*u)))
        {
            return Err(Error::InvalidParameter(format!("payoff {bad} outside [0, 1]")));
        }
        Ok(Self { actions, payoff })
    }

    /// Actions named by their index.
    pub fn from_payoffs(payoff: Vec<[f64; 2]>) -> Result<Self> {
        Self::new((0..payoff.len()).map(|i| i.to_string()).collect(), payoff)
    }

    /// Two actions, payoff 1 for matching the outcome.
    pub fn matching() -> Self {
        Self::from_payoffs(vec![[1.0, 0.0], [0.0, 1.0]]).expect("valid payoffs")
    }

    /// Two actions whose best response switches from 0 to 1 above `cutoff`:
    /// `u(0,0) = cutoff`, `u(1,1) = 1 - cutoff`, zero otherwise.
    pub fn threshold(cutoff: f64) -> Result<Self> {
        Self::from_payoffs(vec![[cutoff, 0.0], [0.0, 1.0 - cutoff]])
    }

    /// Quadratic payoff `1 - (a - y)^2` on the action grid `{0, h, 2h, .., 1}`.
    pub fn quadratic(resolution: f64) -> Result<Self> {
        if !(resolution > 0.0 && resolution <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "action grid resolution {resolution} outside (0, 1]"
            )));
        }
        let n = (1.0 / resolution).round().max(1.0) as usize;
        let payoff = (0..=n)
            .map(|i| {
                let a = i as f64 / n as f64;
                [1.0 - a * a, 1.0 - (1.0 - a) * (1.0 - a)]
            })
            .collect();
        Ok(Self {
            actions: (0..=n).map(|i| format!("{}", i as f64 / n as f64)).collect(),
            payoff,
        })
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn num_actions(&self) -> usize {
        self.payoff.len()
    }

    pub fn payoff(&self, action: usize, y: u8) -> f64 {
        self.payoff[action][usize::from(y)]
    }

    pub fn payoffs(&self) -> &[[f64; 2]] {
        &self.payoff
    }

    /// `E_{y ~ Bernoulli(v)} u(a, y)`
    pub fn expected(&self, action: usize, v: f64) -> f64 {
        let [u0, u1] = self.payoff[action];
        v * u1 + (1.0 - v) * u0
    }

    /// Same actions with `u(a, y) -> scale * u(a, y) + shift[y]`.
    pub fn affine(&self, scale: f64, shift: [f64; 2]) -> Result<Self> {
        Self::new(
            self.actions.clone(),
            self.payoff
                .iter()
                .map(|[u0, u1]| [scale * u0 + shift[0], scale * u1 + shift[1]])
                .collect(),
        )
    }
}

/// Best response to prediction `v`; ties go to the lowest action index.
pub fn best_response(task: &DecisionTask, v: f64) -> usize {
    let mut best = 0;
    let mut best_value = task.expected(0, v);
    for a in 1..task.num_actions() {
        let value = task.expected(a, v);
        if value > best_value {
            best = a;
            best_value = value;
        }
    }
    best
}

/// `E[u(policy(p), y)]` under the joint.
pub fn expected_payoff(
    joint: &EmpiricalJoint,
    task: &DecisionTask,
    policy: impl Fn(f64) -> Option<usize>,
) -> Result<f64> {
    let mut total = 0.0;
    for a in joint.atoms() {
        let action = policy(a.v).ok_or(Error::PolicyUndefined(a.v))?;
        if action >= task.num_actions() {
            return Err(Error::InvalidParameter(format!(
                "policy chose action {action} of {}",
                task.num_actions()
            )));
        }
        total += a.mass * task.payoff(action, a.y);
    }
    Ok(total)
}

/// Payoff lost by best-responding to `p` instead of its recalibration.
pub fn cfdl(joint: &EmpiricalJoint, task: &DecisionTask) -> f64 {
    let recal = joint.recalibrate();
    joint
        .atoms()
        .iter()
        .map(|a| {
            let informed = best_response(task, recal.get(a.v).expect("total map"));
            let naive = best_response(task, a.v);
            a.mass * (task.payoff(informed, a.y) - task.payoff(naive, a.y))
        })
        .sum::<f64>()
        .max(0.0)
}

/// A convex function on `[0,1]` together with a chosen subgradient.
pub trait Potential {
    fn value(&self, v: f64) -> f64;
    fn subgradient(&self, v: f64) -> f64;

    /// `D(a || b) = phi(a) - phi(b) - grad phi(b) (a - b)`
    fn divergence(&self, a: f64, b: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        self.value(a) - self.value(b) - self.subgradient(b) * (a - b)
    }
}

fn check_unit(x: f64) -> Result<()> {
    if x.is_finite() && (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::PredictionOutOfRange(x))
    }
}

/// Bregman divergence `D_phi(mu_star || mu)`.
pub fn bregman(phi: &dyn Potential, mu_star: f64, mu: f64) -> Result<f64> {
    check_unit(mu_star)?;
    check_unit(mu)?;
    Ok(phi.divergence(mu_star, mu))
}

/// A line `intercept + slope * v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub intercept: f64,
    pub slope: f64,
}

impl Line {
    pub fn at(&self, v: f64) -> f64 {
        self.intercept + self.slope * v
    }
}

/// Convex piecewise-linear potential: the upper envelope of finitely many
/// lines on `[0, 1]`, with an explicit subgradient at each breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    pieces: Vec<Line>,
    breakpoints: Vec<f64>,
    breakpoint_slopes: Vec<f64>,
}

impl PiecewiseLinear {
    /// Upper envelope of `lines` on `[0,1]`. `kink_slope(b, left, right)`
    /// picks the subgradient at breakpoint `b` and is clamped to `[left, right]`.
    pub fn envelope(lines: &[Line], kink_slope: impl Fn(f64, f64, f64) -> f64) -> Result<Self> {
        if lines.is_empty() {
            return Err(Error::InvalidParameter("envelope of no lines".into()));
        }
        // the best line at 0; ties prefer the steeper one
        let mut cur = *lines
            .iter()
            .max_by(|a, b| {
                a.intercept
                    .total_cmp(&b.intercept)
                    .then(a.slope.total_cmp(&b.slope))
            })
            .expect("nonempty");
        let mut pieces = vec![cur];
        let mut breakpoints = Vec::new();
        let mut pos = 0.0;
        loop {
            let mut next: Option<(f64, Line)> = None;
            for l in lines.iter().filter(|l| l.slope > cur.slope) {
                let x = ((cur.intercept - l.intercept) / (l.slope - cur.slope)).max(pos);
                next = match next {
                    Some((nx, nl)) if nx < x || (nx == x && nl.slope >= l.slope) => Some((nx, nl)),
                    _ => Some((x, *l)),
                };
            }
            match next {
                Some((x, l)) if x < 1.0 => {
                    breakpoints.push(x);
                    pieces.push(l);
                    cur = l;
                    pos = x;
                }
                _ => break,
            }
        }
        let breakpoint_slopes = breakpoints
            .iter()
            .enumerate()
            .map(|(i, &b)| {
                let (left, right) = (pieces[i].slope, pieces[i + 1].slope);
                kink_slope(b, left, right).clamp(left, right)
            })
            .collect();
        Ok(Self {
            pieces,
            breakpoints,
            breakpoint_slopes,
        })
    }

    /// `|v - v*|` with the right derivative `+1` at the kink.
    pub fn v_shape(vstar: f64) -> Result<Self> {
        check_unit(vstar)?;
        Ok(Self {
            pieces: vec![
                Line {
                    intercept: vstar,
                    slope: -1.0,
                },
                Line {
                    intercept: -vstar,
                    slope: 1.0,
                },
            ],
            breakpoints: vec![vstar],
            breakpoint_slopes: vec![1.0],
        })
    }

    pub fn pieces(&self) -> &[Line] {
        &self.pieces
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn slopes(&self) -> impl Iterator<Item = f64> + '_ {
        self.pieces.iter().map(|l| l.slope)
    }

    fn piece_index(&self, v: f64) -> usize {
        self.breakpoints.partition_point(|&b| b < v)
    }
}

impl Potential for PiecewiseLinear {
    fn value(&self, v: f64) -> f64 {
        self.pieces[self.piece_index(v)].at(v)
    }

    fn subgradient(&self, v: f64) -> f64 {
        let i = self.piece_index(v);
        if i < self.breakpoints.len() && self.breakpoints[i] == v {
            self.breakpoint_slopes[i]
        } else {
            self.pieces[i].slope
        }
    }
}

/// `phi(v) = v^2`; its divergence is the squared difference.
#[derive(Debug, Clone, Copy, Default)]
pub struct Squared;

impl Potential for Squared {
    fn value(&self, v: f64) -> f64 {
        v * v
    }
    fn subgradient(&self, v: f64) -> f64 {
        2.0 * v
    }
}

/// Negative Bernoulli entropy `mu ln mu + (1 - mu) ln(1 - mu)`, whose
/// divergence is the Bernoulli KL divergence. Its subgradient is unbounded,
/// so it corresponds to no payoff-bounded task.
#[derive(Debug, Clone, Copy, Default)]
pub struct NegativeEntropy;

fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

fn xlog_ratio(a: f64, b: f64) -> f64 {
    if a <= 0.0 {
        0.0
    } else if b <= 0.0 {
        f64::INFINITY
    } else {
        a * (a / b).ln()
    }
}

impl Potential for NegativeEntropy {
    fn value(&self, v: f64) -> f64 {
        xlogx(v) + xlogx(1.0 - v)
    }

    fn subgradient(&self, v: f64) -> f64 {
        (v / (1.0 - v)).ln()
    }

    fn divergence(&self, a: f64, b: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        xlog_ratio(a, b) + xlog_ratio(1.0 - a, 1.0 - b)
    }
}

/// Convex potential of a task: the upper envelope of the lines
/// `v -> E_{y~v} u(a, y)`, with the kink subgradient taken from the action the
/// best response actually plays there.
pub fn task_potential(task: &DecisionTask) -> PiecewiseLinear {
    let lines: Vec<Line> = task
        .payoffs()
        .iter()
        .map(|[u0, u1]| Line {
            intercept: *u0,
            slope: u1 - u0,
        })
        .collect();
    PiecewiseLinear::envelope(&lines, |b, _, _| lines[best_response(task, b)].slope)
        .expect("a task has at least one action")
}

/// CFDL as the expected divergence `E[D_phi(p̂(v) || v)]` of the task potential.
pub fn cfdl_bregman(joint: &EmpiricalJoint, task: &DecisionTask) -> f64 {
    let phi = task_potential(task);
    joint
        .level_sets()
        .iter()
        .map(|ls| ls.mass * phi.divergence(ls.label_mean(), ls.v))
        .sum::<f64>()
        .max(0.0)
}

/// Divergence of `|v - v*|` in closed form: `2|v1 - v*|` when `v*` lies in
/// `(v1, v2]` or `(v2, v1]`, zero otherwise.
pub fn v_divergence(vstar: f64, v1: f64, v2: f64) -> f64 {
    if (v1 < vstar && vstar <= v2) || (v2 < vstar && vstar <= v1) {
        2.0 * (v1 - vstar).abs()
    } else {
        0.0
    }
}

/// How the V-shaped objective is evaluated at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Approach {
    Exact,
    FromLeft,
    FromRight,
}

/// Where the supremum over V-shaped divergences is attained (possibly as a limit).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CdlOptimum {
    pub value: f64,
    pub vstar: f64,
    pub approach: Approach,
}

/// Whether `v*` (or `v* -/+ 0`) lies in the half-open interval `(lo, hi]`.
fn in_half_open(lo: f64, hi: f64, b: f64, approach: Approach) -> bool {
    match approach {
        Approach::Exact | Approach::FromLeft => lo < b && b <= hi,
        Approach::FromRight => lo <= b && b < hi,
    }
}

fn v_objective(pairs: &[(f64, f64, f64)], b: f64, approach: Approach) -> f64 {
    pairs
        .iter()
        .map(|&(mass, informed, v)| {
            let (lo, hi) = if informed < v { (informed, v) } else { (v, informed) };
            if lo < hi && in_half_open(lo, hi, b, approach) {
                2.0 * mass * (informed - b).abs()
            } else {
                0.0
            }
        })
        .sum()
}

/// Supremum over `v* in [0,1]` of `E[D_{|.-v*|}(p̂ || p)]`.
pub fn cdl(joint: &EmpiricalJoint) -> f64 {
    cdl_optimum(joint).value
}

/// The objective is linear in `v*` between breakpoints `{v, p̂(v)}`, so the
/// supremum is the largest value or one-sided limit at a breakpoint.
pub fn cdl_optimum(joint: &EmpiricalJoint) -> CdlOptimum {
    let pairs: Vec<(f64, f64, f64)> = joint
        .level_sets()
        .iter()
        .map(|ls| (ls.mass, ls.label_mean(), ls.v))
        .collect();
    let mut breakpoints: Vec<f64> = pairs.iter().flat_map(|&(_, a, b)| [a, b]).collect();
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();
    let mut best = CdlOptimum {
        value: 0.0,
        vstar: 0.5,
        approach: Approach::Exact,
    };
    for &b in &breakpoints {
        for approach in [Approach::Exact, Approach::FromLeft, Approach::FromRight] {
            let value = v_objective(&pairs, b, approach);
            if value > best.value {
                best = CdlOptimum {
                    value,
                    vstar: b,
                    approach,
                };
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::joint::Atom;

    fn joint(atoms: &[(f64, u8, f64)]) -> EmpiricalJoint {
        EmpiricalJoint::from_atoms(atoms.iter().map(|&(v, y, m)| Atom::new(v, y, m)).collect())
            .unwrap()
    }

    fn constant_half(eps: f64) -> EmpiricalJoint {
        joint(&[(0.5, 1, 0.5 + eps), (0.5, 0, 0.5 - eps)])
    }

    #[test]
    fn best_response_examples() {
        let t = DecisionTask::matching();
        assert_eq!(best_response(&t, 0.3), 0);
        assert_eq!(best_response(&t, 0.5), 0);
        assert_eq!(best_response(&t, 0.51), 1);
        let q = DecisionTask::quadratic(1e-3).unwrap();
        for i in [0, 1, 137, 500, 999, 1000] {
            assert_eq!(best_response(&q, i as f64 / 1000.0), i);
        }
        let one = DecisionTask::from_payoffs(vec![[0.3, 0.9]]).unwrap();
        assert_eq!(best_response(&one, 0.77), 0);
    }

    #[test]
    fn task_validation() {
        assert!(DecisionTask::from_payoffs(vec![]).is_err());
        assert!(DecisionTask::from_payoffs(vec![[1.2, 0.0]]).is_err());
        let t: DecisionTask =
            serde_json::from_str(r#"{"actions":["stay",1],"payoff":[[1,0],[0,1]]}"#).unwrap();
        assert_eq!(t.actions(), &["stay".to_string(), "1".to_string()]);
        assert!(serde_json::from_str::<DecisionTask>(r#"{"actions":["a"],"payoff":[]}"#).is_err());
    }

    #[test]
    fn payoffs_on_constant_predictor() {
        let eps = 0.05;
        let j = constant_half(eps);
        let t = DecisionTask::matching();
        let naive = expected_payoff(&j, &t, |v| Some(best_response(&t, v))).unwrap();
        assert!((naive - (0.5 - eps)).abs() < 1e-12);
        let recal = j.recalibrate();
        let informed =
            expected_payoff(&j, &t, |v| recal.get(v).map(|m| best_response(&t, m))).unwrap();
        assert!((informed - (0.5 + eps)).abs() < 1e-12);
        let flat = DecisionTask::from_payoffs(vec![[0.3, 0.3], [0.3, 0.3]]).unwrap();
        assert!((expected_payoff(&j, &flat, |_| Some(1)).unwrap() - 0.3).abs() < 1e-15);
        assert!(matches!(
            expected_payoff(&j, &t, |_| None),
            Err(Error::PolicyUndefined(_))
        ));
    }

    #[test]
    fn cfdl_both_routes_on_constant_predictor() {
        let eps = 0.05;
        let j = constant_half(eps);
        let t = DecisionTask::matching();
        assert!((cfdl(&j, &t) - 2.0 * eps).abs() < 1e-12);
        assert!((cfdl_bregman(&j, &t) - 2.0 * eps).abs() < 1e-12);
        let calibrated = joint(&[(0.3, 1, 0.3), (0.3, 0, 0.7)]);
        assert_eq!(cfdl(&calibrated, &t), 0.0);
        assert_eq!(cfdl_bregman(&calibrated, &t), 0.0);
    }

    #[test]
    fn bregman_examples() {
        assert!((bregman(&Squared, 0.8, 0.5).unwrap() - 0.09).abs() < 1e-12);
        assert_eq!(bregman(&NegativeEntropy, 0.5, 0.5).unwrap(), 0.0);
        assert_eq!(bregman(&Squared, 0.3, 0.3).unwrap(), 0.0);
        assert!(bregman(&Squared, 1.3, 0.3).is_err());
        // KL closed form agrees with the generic formula in the interior
        let (a, b) = (0.2, 0.7);
        let generic = NegativeEntropy.value(a)
            - NegativeEntropy.value(b)
            - NegativeEntropy.subgradient(b) * (a - b);
        assert!((NegativeEntropy.divergence(a, b) - generic).abs() < 1e-12);
        assert_eq!(NegativeEntropy.divergence(0.5, 0.0), f64::INFINITY);
    }

    #[test]
    fn matching_task_potential() {
        let phi = task_potential(&DecisionTask::matching());
        assert_eq!(phi.breakpoints(), &[0.5]);
        for v in [0.0, 0.2, 0.5, 0.8, 1.0] {
            assert!((phi.value(v) - v.max(1.0 - v)).abs() < 1e-15);
        }
        assert_eq!(phi.subgradient(0.5), -1.0);
        assert_eq!(phi.subgradient(0.6), 1.0);
    }

    #[test]
    fn one_action_potential_is_affine() {
        let t = DecisionTask::from_payoffs(vec![[0.2, 0.7]]).unwrap();
        let phi = task_potential(&t);
        assert!(phi.breakpoints().is_empty());
        assert!(phi.divergence(0.9, 0.1).abs() < 1e-15);
    }

    #[test]
    fn threshold_potential_is_half_v_shape() {
        let vstar = 0.3;
        let phi = task_potential(&DecisionTask::threshold(vstar).unwrap());
        assert_eq!(phi.breakpoints().len(), 1);
        assert!((phi.breakpoints()[0] - vstar).abs() < 1e-15);
        // phi - |v - v*| / 2 is affine: zero second differences
        let g = |v: f64| phi.value(v) - 0.5 * (v - vstar).abs();
        for &(a, b, c) in &[(0.0, 0.3, 0.6), (0.1, 0.5, 0.9), (0.25, 0.3, 0.35)] {
            let lhs = g(b) - g(a);
            let rhs = (g(c) - g(a)) * (b - a) / (c - a);
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn v_shape_potential_matches_closed_form() {
        for &vstar in &[0.0, 0.25, 0.5, 1.0] {
            let phi = PiecewiseLinear::v_shape(vstar).unwrap();
            for &v1 in &[0.0, 0.25, 0.3, 0.5, 0.9, 1.0] {
                for &v2 in &[0.0, 0.25, 0.4, 0.5, 1.0] {
                    let d = phi.divergence(v1, v2);
                    let closed = v_divergence(vstar, v1, v2);
                    assert!((d - closed).abs() < 1e-12, "{vstar} {v1} {v2}: {d} vs {closed}");
                }
            }
        }
    }

    #[test]
    fn v_divergence_examples() {
        let eps = 0.05;
        let vstar = 0.5 + 1e-9;
        let d = v_divergence(vstar, 0.5 + eps, 0.5);
        assert!((d - 2.0 * (0.5 + eps - vstar)).abs() < 1e-15);
        assert_eq!(v_divergence(0.4, 0.3, 0.3), 0.0);
        assert_eq!(v_divergence(0.9, 0.3, 0.6), 0.0);
        assert_eq!(v_divergence(0.5, 0.3, 0.5), 0.4);
        assert_eq!(v_divergence(0.5, 0.5, 0.3), 0.0);
    }

    #[test]
    fn cdl_constant_predictor_is_attained_from_the_right() {
        let eps = 0.05;
        let opt = cdl_optimum(&constant_half(eps));
        assert!((opt.value - 2.0 * eps).abs() < 1e-12);
        assert_eq!(opt.vstar, 0.5);
        assert_eq!(opt.approach, Approach::FromRight);
        assert_eq!(cdl(&joint(&[(0.3, 1, 0.3), (0.3, 0, 0.7)])), 0.0);
    }

    #[test]
    fn quadratic_task_cfdl_is_squared_ece2() {
        let j = joint(&[(0.4, 0, 0.25), (0.4, 1, 0.25), (0.7, 1, 0.5)]);
        let h = 1e-3;
        let t = DecisionTask::quadratic(h).unwrap();
        let target = crate::basic::ece_q(&j, 2.0).unwrap().powi(2);
        assert!((cfdl(&j, &t) - target).abs() <= 2.0 * h);
        assert!((cfdl_bregman(&j, &t) - cfdl(&j, &t)).abs() < 1e-9);
    }

    #[test]
    fn affine_payoff_changes() {
        let j = joint(&[(0.2, 1, 0.3), (0.2, 0, 0.2), (0.9, 0, 0.5)]);
        let t = DecisionTask::from_payoffs(vec![[0.4, 0.1], [0.1, 0.5], [0.3, 0.3]]).unwrap();
        let base = cfdl(&j, &t);
        let shifted = t.affine(1.0, [0.3, 0.2]).unwrap();
        assert!((cfdl(&j, &shifted) - base).abs() < 1e-12);
        let scaled = t.affine(1.5, [0.0, 0.0]).unwrap();
        assert!((cfdl(&j, &scaled) - 1.5 * base).abs() < 1e-12);
    }
}

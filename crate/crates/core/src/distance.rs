//! Distance to calibration and interval calibration error.
//!
//! The true distance `dCE` moves each point of a finite feature space to a
//! perfectly calibrated predictor at minimum expected l1 cost. The upper
//! distance restricts to post-processings of the prediction value. Both are
//! computed exactly on small inputs by enumerating set partitions. Interval
//! calibration error buckets predictions into intervals and adds the widest
//! interval's length to the summed per-interval bias.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::joint::{EmpiricalJoint, FiniteInstance};
use crate::partitions::for_each_partition;

/// Default size limit for the partition oracles.
pub const DEFAULT_ORACLE_CAP: usize = 12;
/// Largest size the oracles accept at all.
pub const MAX_ORACLE_CAP: usize = 13;

/// Breakpoints `0 = b_0 < b_1 < ... < b_k = 1`; intervals `[b_{j-1}, b_j)`
/// with the last one closed.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalPartition {
    breakpoints: Vec<f64>,
}

impl IntervalPartition {
    pub fn new(breakpoints: Vec<f64>) -> Result<Self> {
        let ok = breakpoints.len() >= 2
            && breakpoints[0] == 0.0
            && *breakpoints.last().expect("len >= 2") == 1.0
            && breakpoints.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(Error::InvalidParameter(
                "breakpoints must increase strictly from 0 to 1".into(),
            ));
        }
        Ok(Self { breakpoints })
    }

    /// The single interval `[0, 1]`.
    pub fn whole() -> Self {
        Self {
            breakpoints: vec![0.0, 1.0],
        }
    }

    /// `k` equal intervals.
    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("need at least one interval".into()));
        }
        Self::new((0..=k).map(|j| j as f64 / k as f64).collect())
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn num_intervals(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn interval(&self, j: usize) -> (f64, f64) {
        (self.breakpoints[j], self.breakpoints[j + 1])
    }

    /// Length of the longest interval.
    pub fn width(&self) -> f64 {
        self.breakpoints
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Index of the interval containing `v`.
    pub fn locate(&self, v: f64) -> usize {
        self.breakpoints
            .partition_point(|&b| b <= v)
            .saturating_sub(1)
            .min(self.num_intervals() - 1)
    }
}

/// Per-interval residual masses `E[(y - p) 1(p in I_j)]`.
fn interval_residuals(joint: &EmpiricalJoint, partition: &IntervalPartition) -> Vec<f64> {
    let mut residuals = vec![0.0; partition.num_intervals()];
    for a in joint.atoms() {
        residuals[partition.locate(a.v)] += a.mass * a.residual();
    }
    residuals
}

/// `sum_j |E[(y - p) 1(p in I_j)]|`
pub fn ce_partition(joint: &EmpiricalJoint, partition: &IntervalPartition) -> f64 {
    interval_residuals(joint, partition).iter().map(|r| r.abs()).sum()
}

/// Bucketed bias plus the partition's width.
pub fn intce_partition(joint: &EmpiricalJoint, partition: &IntervalPartition) -> f64 {
    ce_partition(joint, partition) + partition.width()
}

/// Predictor sending each interval to the label mean of the predictions in it.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalPredictor {
    partition: IntervalPartition,
    values: Vec<f64>,
}

impl CanonicalPredictor {
    pub fn eval(&self, v: f64) -> f64 {
        self.values[self.partition.locate(v)]
    }

    /// Value assigned to each interval.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The joint of `(q(p), y)`.
    pub fn apply(&self, joint: &EmpiricalJoint) -> EmpiricalJoint {
        joint
            .map_predictions(|v| self.eval(v))
            .expect("interval label means lie in [0, 1]")
    }

    /// `E|p - q(p)|`
    pub fn movement(&self, joint: &EmpiricalJoint) -> f64 {
        joint
            .atoms()
            .iter()
            .map(|a| a.mass * (a.v - self.eval(a.v)).abs())
            .sum()
    }
}

/// Empty intervals map to their midpoints.
pub fn canonical_predictor(joint: &EmpiricalJoint, partition: &IntervalPartition) -> CanonicalPredictor {
    let k = partition.num_intervals();
    let mut mass = vec![0.0; k];
    let mut positive = vec![0.0; k];
    for a in joint.atoms() {
        let j = partition.locate(a.v);
        mass[j] += a.mass;
        if a.y == 1 {
            positive[j] += a.mass;
        }
    }
    let values = (0..k)
        .map(|j| {
            if mass[j] > 0.0 {
                (positive[j] / mass[j]).clamp(0.0, 1.0)
            } else {
                let (lo, hi) = partition.interval(j);
                0.5 * (lo + hi)
            }
        })
        .collect();
    CanonicalPredictor {
        partition: partition.clone(),
        values,
    }
}

/// Best grid partition found by [`intce_opt`].
#[derive(Debug, Clone, PartialEq)]
pub struct IntceOptimum {
    /// Minimum of `intce_partition` over partitions with breakpoints on the
    /// `1/g` grid. The unrestricted minimum lies in `[value - 2/g, value]`.
    pub value: f64,
    pub partition: IntervalPartition,
    /// False when two distinct predictions share a grid cell, so the grid
    /// cannot put them in different intervals.
    pub separated: bool,
}

/// Minimum interval calibration error over partitions on the uniform `1/g` grid.
///
/// A grid partition is determined up to empty filler intervals by how it
/// groups consecutive distinct predictions into blocks. For each candidate
/// width cap (ascending) a dynamic program over blocks minimizes the summed
/// block bias; gaps between blocks are filled with unit grid intervals.
pub fn intce_opt(joint: &EmpiricalJoint, g: usize) -> Result<IntceOptimum> {
    if g < 2 {
        return Err(Error::InvalidParameter(format!("grid resolution {g} below 2")));
    }
    let levels = joint.level_sets();
    let m = levels.len();
    let gf = g as f64;
    // grid cell [left, right) holding each value, consistent with `locate`
    let cell = |v: f64| {
        let mut k = ((v * gf).floor().max(0.0) as usize).min(g - 1);
        while k + 1 < g && (k + 1) as f64 / gf <= v {
            k += 1;
        }
        while k > 0 && k as f64 / gf > v {
            k -= 1;
        }
        k
    };
    let left: Vec<usize> = levels.iter().map(|ls| cell(ls.v)).collect();
    let right: Vec<usize> = left.iter().map(|k| k + 1).collect();
    let cut_ok: Vec<bool> = (0..m.saturating_sub(1)).map(|i| right[i] <= left[i + 1]).collect();
    let separated = cut_ok.iter().all(|&c| c);
    let mut prefix = vec![0.0; m + 1];
    for (i, ls) in levels.iter().enumerate() {
        prefix[i + 1] = prefix[i] + ls.residual_mass();
    }
    // block (i..j) spans grid cells left[i]..right[j - 1]
    let block_width = |i: usize, j: usize| right[j - 1] - left[i];

    let mut widths: Vec<usize> = (0..m)
        .flat_map(|i| ((i + 1)..=m).map(move |j| (i, j)))
        .map(|(i, j)| block_width(i, j).max(1))
        .collect();
    widths.sort_unstable();
    widths.dedup();

    // (value, blocks as level ranges, width cap)
    type Best = (f64, Vec<(usize, usize)>, usize);
    let mut best: Option<Best> = None;
    for &cap in &widths {
        let width_term = cap as f64 / gf;
        if let Some((b, _, _)) = &best {
            if width_term >= *b {
                break;
            }
        }
        // dp[j]: least bias covering levels[..j] with a cut after j - 1
        let mut dp = vec![f64::INFINITY; m + 1];
        let mut from = vec![usize::MAX; m + 1];
        dp[0] = 0.0;
        for j in 1..=m {
            for i in (0..j).rev() {
                if block_width(i, j) > cap {
                    break;
                }
                let cut_before = i == 0 || cut_ok[i - 1];
                if !cut_before || !dp[i].is_finite() {
                    continue;
                }
                let cost = dp[i] + (prefix[j] - prefix[i]).abs();
                if cost < dp[j] {
                    dp[j] = cost;
                    from[j] = i;
                }
            }
        }
        if !dp[m].is_finite() {
            continue;
        }
        let total = dp[m] + width_term;
        if best.as_ref().is_none_or(|(b, _, _)| total < *b) {
            let mut blocks = Vec::new();
            let mut j = m;
            while j > 0 {
                let i = from[j];
                blocks.push((i, j));
                j = i;
            }
            blocks.reverse();
            best = Some((total, blocks, cap));
        }
    }
    let (_, blocks, _) = best.expect("the single block is always feasible");
    let mut cells = vec![0usize];
    let push_fill = |cells: &mut Vec<usize>, upto: usize| {
        let mut last = *cells.last().expect("nonempty");
        while last < upto {
            last += 1;
            cells.push(last);
        }
    };
    for &(i, j) in &blocks {
        push_fill(&mut cells, left[i]);
        cells.push(right[j - 1]);
    }
    push_fill(&mut cells, g);
    cells.dedup();
    let partition = IntervalPartition::new(cells.iter().map(|&c| c as f64 / gf).collect())?;
    Ok(IntceOptimum {
        value: intce_partition(joint, &partition),
        partition,
        separated,
    })
}

/// Partition `[0, b), [b, b + beta), ...` with `b` uniform in `[0, beta]`.
pub fn random_grid_partition(beta: f64, seed: u64) -> Result<IntervalPartition> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidParameter(format!("bucket width {beta} outside (0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset = rng.random::<f64>() * beta;
    let mut breakpoints = vec![0.0];
    let mut b = offset;
    while b < 1.0 {
        if b > *breakpoints.last().expect("nonempty") {
            breakpoints.push(b);
        }
        b += beta;
    }
    breakpoints.push(1.0);
    IntervalPartition::new(breakpoints)
}

/// Interval calibration error of a randomly shifted width-`beta` grid.
pub fn random_grid_intce(joint: &EmpiricalJoint, beta: f64, seed: u64) -> Result<f64> {
    Ok(intce_partition(joint, &random_grid_partition(beta, seed)?))
}

/// An optimal calibrated predictor found by an oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub value: f64,
    /// Calibrated prediction for each point (or each distinct value).
    pub predictions: Vec<f64>,
}

fn check_cap(size: usize, cap: usize) -> Result<()> {
    if cap > MAX_ORACLE_CAP {
        return Err(Error::InvalidParameter(format!(
            "oracle cap {cap} above the hard limit {MAX_ORACLE_CAP}"
        )));
    }
    if size > cap {
        return Err(Error::OracleCapExceeded { size, cap });
    }
    Ok(())
}

/// Minimum over set partitions of `items = (mass, position, target mass)` of the
/// l1 movement when each block moves to its target-weighted mean.
fn partition_oracle(items: &[(f64, f64, f64)]) -> OracleSolution {
    let n = items.len();
    let mut best = OracleSolution {
        value: f64::INFINITY,
        predictions: vec![0.0; n],
    };
    let mut mass = vec![0.0; n];
    let mut target = vec![0.0; n];
    for_each_partition(n, |labels, blocks| {
        mass[..blocks].fill(0.0);
        target[..blocks].fill(0.0);
        for (&(m, _, t), &b) in items.iter().zip(labels) {
            mass[b] += m;
            target[b] += t;
        }
        let value_of = |b: usize| {
            if mass[b] > 0.0 {
                (target[b] / mass[b]).clamp(0.0, 1.0)
            } else {
                0.5
            }
        };
        let cost: f64 = items
            .iter()
            .zip(labels)
            .map(|(&(m, p, _), &b)| m * (p - value_of(b)).abs())
            .sum();
        if cost < best.value {
            best.value = cost;
            for (out, &b) in best.predictions.iter_mut().zip(labels) {
                *out = value_of(b);
            }
        }
    });
    best
}

/// True distance to calibration of a small finite instance.
pub fn dce_oracle(instance: &FiniteInstance) -> Result<f64> {
    Ok(dce_oracle_solution(instance, DEFAULT_ORACLE_CAP)?.value)
}

/// Exact minimum of `E|p(x) - q(x)|` over calibrated `q`, by enumerating
/// which points share a value; each block takes its mean conditional label.
pub fn dce_oracle_solution(instance: &FiniteInstance, cap: usize) -> Result<OracleSolution> {
    check_cap(instance.len(), cap)?;
    let items: Vec<(f64, f64, f64)> = instance
        .points()
        .iter()
        .map(|p| (p.mass, p.pred, p.mass * p.cond_mean))
        .collect();
    Ok(partition_oracle(&items))
}

/// Upper distance to calibration: the cheapest calibrated post-processing of
/// the prediction value.
pub fn dce_upper_oracle(joint: &EmpiricalJoint) -> Result<f64> {
    Ok(dce_upper_oracle_solution(joint, DEFAULT_ORACLE_CAP)?.value)
}

/// Enumerates partitions of the distinct predictions; `predictions` is
/// indexed like [`EmpiricalJoint::level_sets`].
pub fn dce_upper_oracle_solution(joint: &EmpiricalJoint, cap: usize) -> Result<OracleSolution> {
    let levels = joint.level_sets();
    check_cap(levels.len(), cap)?;
    let items: Vec<(f64, f64, f64)> = levels
        .iter()
        .map(|ls| (ls.mass, ls.v, ls.positive_mass))
        .collect();
    Ok(partition_oracle(&items))
}

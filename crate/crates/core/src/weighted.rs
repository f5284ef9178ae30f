//! Weighted calibration error `|E[w(p)(y - p)]|` and the measures obtained by
//! maximizing it over a weight family: smooth (1-Lipschitz), low-degree
//! polynomial and RKHS-ball weights. Also the earthmover distance between
//! `J*` and its surrogate `J^p`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::chain;
use crate::error::{Error, Result};
use crate::joint::{EmpiricalJoint, LevelSet};
use crate::lp::{LinearProgram, Relation, Sense};

/// Lipschitz information attached to a weight function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularity {
    /// Only `|w| <= 1` is promised.
    BoundedOnly,
    /// `|w(u) - w(v)| <= L |u - v|`.
    Lipschitz(f64),
}

/// A black-box weight function `[0,1] -> [-1,1]`.
pub struct WeightFunction {
    eval: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    regularity: Regularity,
}

impl std::fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WeightFunction")
            .field("regularity", &self.regularity)
            .finish_non_exhaustive()
    }
}

impl WeightFunction {
    pub fn new(eval: impl Fn(f64) -> f64 + Send + Sync + 'static, regularity: Regularity) -> Self {
        Self {
            eval: Box::new(eval),
            regularity,
        }
    }

    pub fn bounded(eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(eval, Regularity::BoundedOnly)
    }

    pub fn lipschitz(lipschitz: f64, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(eval, Regularity::Lipschitz(lipschitz))
    }

    pub fn constant(c: f64) -> Self {
        Self::lipschitz(0.0, move |_| c)
    }

    /// `sgn(E[y | p = v] - v)`, the maximizer over bounded weights.
    pub fn sign_witness(joint: &EmpiricalJoint) -> Self {
        let table: Vec<(f64, f64)> = joint
            .level_sets()
            .iter()
            .map(|ls| (ls.v, (ls.label_mean() - ls.v).signum()))
            .collect();
        Self::bounded(move |v| {
            table
                .binary_search_by(|(k, _)| k.total_cmp(&v))
                .map_or(0.0, |i| table[i].1)
        })
    }

    /// Piecewise-linear interpolation through `(x, w)` nodes, constant outside.
    pub fn interpolating(nodes: Vec<(f64, f64)>) -> Self {
        let lip = nodes
            .windows(2)
            .filter(|p| p[1].0 > p[0].0)
            .map(|p| (p[1].1 - p[0].1).abs() / (p[1].0 - p[0].0))
            .fold(0.0, f64::max);
        Self::lipschitz(lip, move |v| {
            let i = nodes.partition_point(|n| n.0 <= v);
            if i == 0 {
                nodes[0].1
            } else if i == nodes.len() {
                nodes[i - 1].1
            } else {
                let (a, b) = (nodes[i - 1], nodes[i]);
                a.1 + (v - a.0) / (b.0 - a.0) * (b.1 - a.1)
            }
        })
    }

    pub fn eval(&self, v: f64) -> f64 {
        (self.eval)(v)
    }

    pub fn regularity(&self) -> Regularity {
        self.regularity
    }

    /// The same function divided by `max(L, 1)`, so it is 1-Lipschitz.
    pub fn into_unit_lipschitz(self) -> Self {
        match self.regularity {
            Regularity::Lipschitz(l) if l > 1.0 => {
                let eval = self.eval;
                Self::lipschitz(1.0, move |v| eval(v) / l)
            }
            _ => self,
        }
    }
}

/// `|E[w(p)(y - p)]|` for a single weight function.
pub fn weighted_ce(joint: &EmpiricalJoint, w: &WeightFunction) -> Result<f64> {
    let mut total = 0.0;
    for ls in joint.level_sets() {
        let value = w.eval(ls.v);
        if value.is_nan() || value.abs() > 1.0 + 1e-12 {
            return Err(Error::WeightOutOfRange { at: ls.v, value });
        }
        total += value * ls.residual_mass();
    }
    Ok(total.abs())
}

fn chain_coefficients(level_sets: &[LevelSet], gap_scale: f64) -> (Vec<f64>, Vec<f64>) {
    let c = level_sets.iter().map(LevelSet::residual_mass).collect();
    let gaps = level_sets
        .windows(2)
        .map(|p| gap_scale * (p[1].v - p[0].v))
        .collect();
    (c, gaps)
}

/// Smooth calibration error: the maximum of `E[w(p)(y - p)]` over 1-Lipschitz
/// `w: [0,1] -> [-1,1]`, solved exactly by the chain dynamic program.
pub fn smce(joint: &EmpiricalJoint) -> f64 {
    smce_witness(joint).0
}

/// Smooth calibration error together with an optimal weight function.
pub fn smce_witness(joint: &EmpiricalJoint) -> (f64, WeightFunction) {
    let ls = joint.level_sets();
    let (c, gaps) = chain_coefficients(&ls, 1.0);
    let sol = chain::solve(&c, &gaps);
    let nodes = ls.iter().map(|l| l.v).zip(sol.weights).collect();
    (sol.value.max(0.0), WeightFunction::interpolating(nodes))
}

/// Smooth calibration error through the generic simplex solver. Only
/// consecutive Lipschitz constraints are imposed; on a line they imply the
/// pairwise ones.
pub fn smce_lp(joint: &EmpiricalJoint) -> Result<f64> {
    let ls = joint.level_sets();
    let (c, gaps) = chain_coefficients(&ls, 1.0);
    // w_j = z_j - 1 with z_j in [0, 2]
    let mut lp = LinearProgram::new(Sense::Maximize, c.clone());
    for j in 0..c.len() {
        lp.constrain(vec![(j, 1.0)], Relation::Le, 2.0);
    }
    for (j, &g) in gaps.iter().enumerate() {
        lp.constrain(vec![(j + 1, 1.0), (j, -1.0)], Relation::Le, g);
        lp.constrain(vec![(j, 1.0), (j + 1, -1.0)], Relation::Le, g);
    }
    let sol = lp.solve()?;
    let offset: f64 = c.iter().sum();
    Ok((sol.value - offset).max(0.0))
}

/// Low-degree calibration error with weights `sum_k a_k v^k`, `sum |a_k| <= 1`.
///
/// The objective is linear in the coefficients, so the maximum sits at a
/// signed monomial: `max_{k <= d} |E[p^k (y - p)]|`.
pub fn low_degree_ce(joint: &EmpiricalJoint, degree: usize) -> f64 {
    let ls = joint.level_sets();
    (0..=degree)
        .map(|k| {
            ls.iter()
                .map(|l| l.v.powi(k as i32) * l.residual_mass())
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max)
}

/// Positive semidefinite kernels on `[0,1]`.
#[derive(Clone)]
pub enum Kernel {
    /// `exp(-|u - v| / scale)`
    Laplace { scale: f64 },
    /// `exp(-(u - v)^2 / (2 bandwidth^2))`
    Gaussian { bandwidth: f64 },
    Custom(std::sync::Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for Kernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Laplace { scale } => write!(f, "Laplace {{ scale: {scale} }}"),
            Self::Gaussian { bandwidth } => write!(f, "Gaussian {{ bandwidth: {bandwidth} }}"),
            Self::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl Default for Kernel {
    fn default() -> Self {
        Self::Laplace { scale: 1.0 }
    }
}

impl Kernel {
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        match self {
            Self::Laplace { scale } => (-(u - v).abs() / scale).exp(),
            Self::Gaussian { bandwidth } => (-(u - v).powi(2) / (2.0 * bandwidth * bandwidth)).exp(),
            Self::Custom(k) => k(u, v),
        }
    }
}

/// Kernel calibration error: the maximum of `E[w(p)(y - p)]` over the unit ball
/// of the RKHS, `sqrt(r^T K r)` with `r` the residual mass per level set.
pub fn kernel_ce(joint: &EmpiricalJoint, kernel: &Kernel) -> Result<f64> {
    let ls = joint.level_sets();
    let m = ls.len();
    let gram = DMatrix::from_fn(m, m, |i, j| kernel.eval(ls[i].v, ls[j].v));
    if !gram.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidParameter("kernel returned a non-finite value".into()));
    }
    let asym = (&gram - gram.transpose()).abs().max();
    if asym > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "kernel is not symmetric (asymmetry {asym:e})"
        )));
    }
    let min_eig = SymmetricEigen::new(gram.clone()).eigenvalues.min();
    if min_eig < -1e-9 {
        return Err(Error::NotPositiveSemidefinite(min_eig));
    }
    let r = nalgebra::DVector::from_iterator(m, ls.iter().map(LevelSet::residual_mass));
    let q = (r.transpose() * &gram * &r)[(0, 0)];
    Ok(q.max(0.0).sqrt())
}

/// Level-set count above which [`emd_joints`] uses the dual chain route
/// instead of the explicit transport program.
pub const EMD_TRANSPORT_MAX_LEVELS: usize = 24;

/// Earthmover distance between `J*` and `J^p` under `|v - v'| + |y - y'|`.
pub fn emd_joints(joint: &EmpiricalJoint) -> Result<f64> {
    if joint.level_sets().len() <= EMD_TRANSPORT_MAX_LEVELS {
        emd_transport(joint)
    } else {
        Ok(emd_dual(joint))
    }
}

/// Transport linear program between the two finite supports.
pub fn emd_transport(joint: &EmpiricalJoint) -> Result<f64> {
    let sources: Vec<(f64, u8, f64)> = joint.atoms().iter().map(|a| (a.v, a.y, a.mass)).collect();
    let sinks: Vec<(f64, u8, f64)> = joint
        .level_sets()
        .iter()
        .flat_map(|ls| [(ls.v, 0u8, ls.mass * (1.0 - ls.v)), (ls.v, 1u8, ls.mass * ls.v)])
        .filter(|s| s.2 > 0.0)
        .collect();
    let (ns, nt) = (sources.len(), sinks.len());
    let cost = sources
        .iter()
        .flat_map(|s| {
            sinks
                .iter()
                .map(move |t| (s.0 - t.0).abs() + f64::from(s.1.abs_diff(t.1)))
        })
        .collect();
    let mut lp = LinearProgram::new(Sense::Minimize, cost);
    for (i, s) in sources.iter().enumerate() {
        lp.constrain((0..nt).map(|j| (i * nt + j, 1.0)).collect(), Relation::Eq, s.2);
    }
    for (j, t) in sinks.iter().enumerate() {
        lp.constrain((0..ns).map(|i| (i * nt + j, 1.0)).collect(), Relation::Eq, t.2);
    }
    Ok(lp.solve()?.value.max(0.0))
}

/// Kantorovich dual: `f(v, y) = w(v) y + u(v)` is 1-Lipschitz iff `|w| <= 1`
/// and `w` is 2-Lipschitz, so the distance is the chain LP with doubled gaps.
pub fn emd_dual(joint: &EmpiricalJoint) -> f64 {
    let (c, gaps) = chain_coefficients(&joint.level_sets(), 2.0);
    chain::solve(&c, &gaps).value.max(0.0)
}

//! Expected calibration error and its relatives.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::joint::{Atom, EmpiricalJoint};

/// `ECE = E|E[y | p] - p|`, summed over level sets.
pub fn ece(joint: &EmpiricalJoint) -> f64 {
    joint
        .level_sets()
        .iter()
        .map(|ls| ls.mass * (ls.label_mean() - ls.v).abs())
        .sum()
}

/// `ECE_q = E[|E[y | p] - p|^q]^(1/q)` for `q >= 1`.
pub fn ece_q(joint: &EmpiricalJoint, q: f64) -> Result<f64> {
    if !q.is_finite() || q < 1.0 {
        return Err(Error::InvalidParameter(format!("ECE_q needs q >= 1, got {q}")));
    }
    if q == 1.0 {
        return Ok(ece(joint));
    }
    let moment: f64 = joint
        .level_sets()
        .iter()
        .map(|ls| ls.mass * (ls.label_mean() - ls.v).abs().powf(q))
        .sum();
    Ok(moment.powf(1.0 / q))
}

/// Total variation between `J*` and the surrogate `J^p`, in which the label
/// is redrawn as Bernoulli(v). Computed atom by atom on the union support.
pub fn tv_characterization(joint: &EmpiricalJoint) -> f64 {
    // (v bits, y) -> (mass under J*, mass under J^p)
    let mut support: BTreeMap<(u64, u8), (f64, f64)> = BTreeMap::new();
    for a in joint.atoms() {
        support.entry((a.v.to_bits(), a.y)).or_default().0 += a.mass;
    }
    for ls in joint.level_sets() {
        support.entry((ls.v.to_bits(), 1)).or_default().1 += ls.mass * ls.v;
        support.entry((ls.v.to_bits(), 0)).or_default().1 += ls.mass * (1.0 - ls.v);
    }
    0.5 * support.values().map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Bucket index of `v` among `b` equal buckets `[(j-1)/b, j/b)`, last closed.
pub fn bucket_index(v: f64, buckets: usize) -> usize {
    ((v * buckets as f64).floor() as usize).min(buckets - 1)
}

/// ECE after rounding each prediction to the midpoint of its bucket.
pub fn binned_ece(joint: &EmpiricalJoint, buckets: usize) -> Result<f64> {
    Ok(ece(&discretize(joint, buckets)?))
}

/// The joint with predictions rounded to bucket midpoints.
pub fn discretize(joint: &EmpiricalJoint, buckets: usize) -> Result<EmpiricalJoint> {
    if buckets == 0 {
        return Err(Error::InvalidParameter("bucket count must be positive".into()));
    }
    let b = buckets as f64;
    let atoms = joint
        .atoms()
        .iter()
        .map(|a| Atom::new((bucket_index(a.v, buckets) as f64 + 0.5) / b, a.y, a.mass))
        .collect();
    EmpiricalJoint::from_atoms(atoms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn joint(atoms: &[(f64, u8, f64)]) -> EmpiricalJoint {
        EmpiricalJoint::from_atoms(atoms.iter().map(|&(v, y, m)| Atom::new(v, y, m)).collect())
            .unwrap()
    }

    fn two_point(eps: f64) -> EmpiricalJoint {
        joint(&[(0.5 - eps, 0, 0.5), (0.5 + eps, 1, 0.5)])
    }

    fn example() -> EmpiricalJoint {
        joint(&[(0.4, 0, 0.25), (0.4, 1, 0.25), (0.7, 1, 0.5)])
    }

    #[test]
    fn ece_values() {
        assert!((ece(&two_point(0.1)) - 0.4).abs() < 1e-12);
        assert!((ece(&example()) - 0.2).abs() < 1e-12);
        assert!(ece(&joint(&[(0.3, 1, 0.3), (0.3, 0, 0.7)])) < 1e-15);
    }

    #[test]
    fn ece_q_values() {
        let eps = 0.05;
        let cdl1 = joint(&[(0.5, 1, 0.5 + eps), (0.5, 0, 0.5 - eps)]);
        assert!((ece_q(&cdl1, 2.0).unwrap() - eps).abs() < 1e-12);
        assert!((ece_q(&example(), 2.0).unwrap() - 0.05_f64.sqrt()).abs() < 1e-12);
        assert_eq!(ece_q(&example(), 1.0).unwrap(), ece(&example()));
        assert!(ece_q(&example(), 0.5).is_err());
        assert!(ece_q(&example(), f64::NAN).is_err());
    }

    #[test]
    fn tv_matches_ece() {
        assert!((tv_characterization(&two_point(0.1)) - 0.4).abs() < 1e-12);
        assert!((tv_characterization(&example()) - ece(&example())).abs() < 1e-12);
        assert!(tv_characterization(&joint(&[(0.5, 1, 0.5), (0.5, 0, 0.5)])) < 1e-15);
    }

    #[test]
    fn bucketing_parity() {
        let j = two_point(0.01);
        for b in [1, 3, 5, 7, 9, 11] {
            assert!(binned_ece(&j, b).unwrap().abs() < 1e-15, "b = {b}");
        }
        for b in [2, 4, 6, 10, 20] {
            let expected = 0.5 - 1.0 / (2.0 * b as f64);
            assert!((binned_ece(&j, b).unwrap() - expected).abs() < 1e-12, "b = {b}");
        }
        assert!(binned_ece(&j, 0).is_err());
    }

    #[test]
    fn bucket_boundaries() {
        assert_eq!(bucket_index(0.0, 4), 0);
        assert_eq!(bucket_index(0.25, 4), 1);
        assert_eq!(bucket_index(1.0, 4), 3);
        // calibrated constant at a midpoint
        let j = joint(&[(0.125, 1, 0.125), (0.125, 0, 0.875)]);
        assert!(binned_ece(&j, 4).unwrap() < 1e-15);
    }
}

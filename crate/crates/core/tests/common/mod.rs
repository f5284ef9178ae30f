#![allow(dead_code)]

use calibration_measures::decision::DecisionTask;
use calibration_measures::{Atom, EmpiricalJoint, FiniteInstance, InstancePoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mostly uniform, with some mass on endpoints and coarse grid points so
/// that ties and boundary values show up.
pub fn random_value(rng: &mut ChaCha8Rng) -> f64 {
    match rng.random_range(0..10) {
        0 => [0.0, 0.5, 1.0][rng.random_range(0..3)],
        1..=3 => rng.random_range(0..=20) as f64 / 20.0,
        _ => rng.random::<f64>(),
    }
}

fn distinct_values(rng: &mut ChaCha8Rng, m: usize, mut draw: impl FnMut(&mut ChaCha8Rng) -> f64) -> Vec<f64> {
    let mut values: Vec<f64> = Vec::with_capacity(m);
    while values.len() < m {
        let v = draw(rng);
        if !values.contains(&v) {
            values.push(v);
        }
    }
    values
}

fn masses(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

fn label_fraction(rng: &mut ChaCha8Rng) -> f64 {
    match rng.random_range(0..8) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.random::<f64>(),
    }
}

fn joint_from(values: &[f64], masses: &[f64], fractions: &[f64]) -> EmpiricalJoint {
    let atoms = values
        .iter()
        .zip(masses)
        .zip(fractions)
        .flat_map(|((&v, &m), &f)| [Atom::new(v, 1, m * f), Atom::new(v, 0, m * (1.0 - f))])
        .collect();
    EmpiricalJoint::from_atoms(atoms).unwrap()
}

/// Joint with between 1 and `max_levels` distinct predictions.
pub fn random_joint(rng: &mut ChaCha8Rng, max_levels: usize) -> EmpiricalJoint {
    let m = rng.random_range(1..=max_levels);
    let values = distinct_values(rng, m, random_value);
    let masses = masses(rng, m);
    let fractions: Vec<f64> = (0..m).map(|_| label_fraction(rng)).collect();
    joint_from(&values, &masses, &fractions)
}

/// Joint whose predictions are multiples of `resolution`.
pub fn random_grid_joint(rng: &mut ChaCha8Rng, max_levels: usize, resolution: f64) -> EmpiricalJoint {
    let steps = (1.0 / resolution).round() as u64;
    let m = rng.random_range(1..=max_levels);
    let values = distinct_values(rng, m, |r| r.random_range(0..=steps) as f64 / steps as f64);
    let masses = masses(rng, m);
    let fractions: Vec<f64> = (0..m).map(|_| label_fraction(rng)).collect();
    joint_from(&values, &masses, &fractions)
}

/// Perfectly calibrated joint: the label mean of every prediction equals it.
pub fn calibrated_joint(rng: &mut ChaCha8Rng, max_levels: usize) -> EmpiricalJoint {
    let m = rng.random_range(1..=max_levels);
    let values = distinct_values(rng, m, random_value);
    let masses = masses(rng, m);
    joint_from(&values, &masses, &values)
}

/// Finite space with up to `max_points` points; some points share predictions.
pub fn random_instance(rng: &mut ChaCha8Rng, max_points: usize) -> FiniteInstance {
    let n = rng.random_range(1..=max_points);
    let masses = masses(rng, n);
    let mut preds: Vec<f64> = Vec::with_capacity(n);
    for _ in 0..n {
        let shared = !preds.is_empty() && rng.random_range(0..4) == 0;
        preds.push(if shared { preds[rng.random_range(0..preds.len())] } else { random_value(rng) });
    }
    let points = (0..n)
        .map(|i| InstancePoint {
            id: format!("x{i}"),
            mass: masses[i],
            pred: preds[i],
            cond_mean: label_fraction(rng),
        })
        .collect();
    FiniteInstance::new(points).unwrap()
}

pub fn random_task(rng: &mut ChaCha8Rng, max_actions: usize) -> DecisionTask {
    let k = rng.random_range(1..=max_actions);
    let payoff = (0..k).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
    DecisionTask::from_payoffs(payoff).unwrap()
}

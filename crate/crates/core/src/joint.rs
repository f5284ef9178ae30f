//! Finitely supported joint distributions of (prediction, label).
//!
//! [`EmpiricalJoint`] is the object every calibration measure consumes. Its
//! atoms are kept in canonical form: sorted by `(v, y)`, exact duplicates
//! merged, zero-mass atoms dropped and masses normalized to sum to one.
//! Predictions that differ only in the last bit are *not* merged; measures
//! that are discontinuous in the prediction (ECE) must see them as distinct.
//!
//! [`FiniteInstance`] additionally keeps the feature space, which only the
//! true distance to calibration depends on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Masses are accepted and renormalized when they drift from one by less than this.
pub const MASS_DRIFT_TOLERANCE: f64 = 1e-9;

/// One support point of a joint distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub v: f64,
    pub y: u8,
    pub mass: f64,
}

impl Atom {
    pub fn new(v: f64, y: u8, mass: f64) -> Self {
        Self { v, y, mass }
    }

    /// Residual `y - v` of this atom.
    #[inline]
    pub fn residual(&self) -> f64 {
        f64::from(self.y) - self.v
    }
}

/// All atoms sharing one prediction value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSet {
    pub v: f64,
    /// Total mass of the level set.
    pub mass: f64,
    /// Mass of the atom with label 1.
    pub positive_mass: f64,
}

impl LevelSet {
    /// Conditional label mean `E[y | p = v]`.
    pub fn label_mean(&self) -> f64 {
        (self.positive_mass / self.mass).clamp(0.0, 1.0)
    }

    /// Residual mass `E[(y - v) 1(p = v)]`.
    pub fn residual_mass(&self) -> f64 {
        self.positive_mass - self.mass * self.v
    }
}

/// Weighted distribution over `[0,1] x {0,1}` in canonical form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalJoint {
    atoms: Vec<Atom>,
}

fn check_prediction(v: f64) -> Result<()> {
    if v.is_finite() && (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::PredictionOutOfRange(v))
    }
}

fn check_label(y: f64) -> Result<u8> {
    if y == 0.0 {
        Ok(0)
    } else if y == 1.0 {
        Ok(1)
    } else {
        Err(Error::InvalidLabel(y))
    }
}

fn check_weight(w: f64) -> Result<()> {
    if w.is_finite() && w >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidWeight(w))
    }
}

impl EmpiricalJoint {
    /// Builds a joint from `(prediction, label)` samples with optional weights.
    ///
    /// Unweighted samples get uniform mass `1/n`. Weights are normalized by
    /// their sum, so the result is invariant to scaling them.
    pub fn from_samples(pairs: &[(f64, f64)], weights: Option<&[f64]>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(w) = weights {
            if w.len() != pairs.len() {
                return Err(Error::InvalidParameter(format!(
                    "{} weights for {} samples",
                    w.len(),
                    pairs.len()
                )));
            }
        }
        let mut atoms = Vec::with_capacity(pairs.len());
        for (i, &(v, y)) in pairs.iter().enumerate() {
            check_prediction(v)?;
            let y = check_label(y)?;
            let w = weights.map_or(1.0, |w| w[i]);
            check_weight(w)?;
            atoms.push(Atom::new(v, y, w));
        }
        Self::canonicalize(atoms)
    }

    /// Builds a joint from atoms whose masses form a probability distribution.
    ///
    /// Masses summing to one within [`MASS_DRIFT_TOLERANCE`] are renormalized;
    /// larger drift is rejected.
    pub fn from_atoms(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyInput);
        }
        for a in &atoms {
            check_prediction(a.v)?;
            if a.y > 1 {
                return Err(Error::InvalidLabel(f64::from(a.y)));
            }
            check_weight(a.mass)?;
        }
        let total: f64 = atoms.iter().map(|a| a.mass).sum();
        if (total - 1.0).abs() > MASS_DRIFT_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "atom masses sum to {total}, not 1"
            )));
        }
        Self::canonicalize(atoms)
    }

    fn canonicalize(mut atoms: Vec<Atom>) -> Result<Self> {
        let total: f64 = atoms.iter().map(|a| a.mass).sum();
        if total <= 0.0 {
            return Err(Error::ZeroTotalWeight);
        }
        atoms.retain(|a| a.mass > 0.0);
        atoms.sort_by(|a, b| a.v.total_cmp(&b.v).then(a.y.cmp(&b.y)));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if last.v == a.v && last.y == a.y => last.mass += a.mass,
                _ => merged.push(a),
            }
        }
        for a in &mut merged {
            a.mass /= total;
        }
        Ok(Self { atoms: merged })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Level sets in increasing order of prediction.
    pub fn level_sets(&self) -> Vec<LevelSet> {
        let mut out: Vec<LevelSet> = Vec::new();
        for a in &self.atoms {
            let pos = if a.y == 1 { a.mass } else { 0.0 };
            match out.last_mut() {
                Some(ls) if ls.v == a.v => {
                    ls.mass += a.mass;
                    ls.positive_mass += pos;
                }
                _ => out.push(LevelSet {
                    v: a.v,
                    mass: a.mass,
                    positive_mass: pos,
                }),
            }
        }
        out
    }

    /// Distinct prediction values, increasing.
    pub fn distinct_predictions(&self) -> Vec<f64> {
        self.level_sets().iter().map(|ls| ls.v).collect()
    }

    pub fn mean_label(&self) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.y == 1)
            .map(|a| a.mass)
            .sum()
    }

    pub fn mean_prediction(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass * a.v).sum()
    }

    /// Returns the joint obtained by replacing every prediction `v` with `f(v)`.
    pub fn map_predictions(&self, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom::new(f(a.v), a.y, a.mass))
            .collect::<Vec<_>>();
        for a in &atoms {
            check_prediction(a.v)?;
        }
        Self::canonicalize(atoms)
    }

    /// The conditional label mean of every level set.
    pub fn recalibrate(&self) -> RecalibrationMap {
        RecalibrationMap {
            entries: self
                .level_sets()
                .iter()
                .map(|ls| (ls.v, ls.label_mean()))
                .collect(),
        }
    }

    /// Joint of the recalibrated predictor: every `v` replaced by `E[y | p = v]`.
    pub fn recalibrated(&self) -> Self {
        let map = self.recalibrate();
        self.map_predictions(|v| map.get(v).expect("map is total on the support"))
            .expect("label means lie in [0, 1]")
    }
}

/// `v -> E[y | p(x) = v]` on the distinct predictions of a joint.
#[derive(Debug, Clone, PartialEq)]
pub struct RecalibrationMap {
    entries: Vec<(f64, f64)>,
}

impl RecalibrationMap {
    pub fn get(&self, v: f64) -> Option<f64> {
        self.entries
            .binary_search_by(|(k, _)| k.total_cmp(&v))
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A point of a finite feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstancePoint {
    pub id: String,
    pub mass: f64,
    /// Prediction `p(x)`.
    pub pred: f64,
    /// Bayes optimal prediction `p*(x) = E[y | x]`.
    pub cond_mean: f64,
}

/// A finite feature space with point masses, predictions and conditional label means.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct FiniteInstance {
    points: Vec<InstancePoint>,
}

impl<'de> Deserialize<'de> for FiniteInstance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let points = Vec::<InstancePoint>::deserialize(d)?;
        FiniteInstance::new(points).map_err(serde::de::Error::custom)
    }
}

impl FiniteInstance {
    pub fn new(mut points: Vec<InstancePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        for p in &points {
            check_weight(p.mass)?;
            check_prediction(p.pred)?;
            if !(p.cond_mean.is_finite() && (0.0..=1.0).contains(&p.cond_mean)) {
                return Err(Error::InvalidParameter(format!(
                    "conditional mean {} of point `{}` outside [0, 1]",
                    p.cond_mean, p.id
                )));
            }
        }
        let total: f64 = points.iter().map(|p| p.mass).sum();
        if (total - 1.0).abs() > MASS_DRIFT_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "point masses sum to {total}, not 1"
            )));
        }
        for p in &mut points {
            p.mass /= total;
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[InstancePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distribution of `(p(x), y*)`: each point's mass is split as
    /// `cond_mean : 1 - cond_mean` between labels 1 and 0.
    pub fn project(&self) -> EmpiricalJoint {
        let atoms = self
            .points
            .iter()
            .flat_map(|p| {
                [
                    Atom::new(p.pred, 1, p.mass * p.cond_mean),
                    Atom::new(p.pred, 0, p.mass * (1.0 - p.cond_mean)),
                ]
            })
            .collect();
        EmpiricalJoint::canonicalize(atoms).expect("validated instance projects to a valid joint")
    }

    /// Same space and labels, different predictor.
    pub fn with_predictions(&self, preds: &[f64]) -> Result<Self> {
        if preds.len() != self.points.len() {
            return Err(Error::InvalidParameter("prediction count mismatch".into()));
        }
        let points = self
            .points
            .iter()
            .zip(preds)
            .map(|(p, &pred)| InstancePoint {
                pred,
                ..p.clone()
            })
            .collect();
        Self::new(points)
    }

    /// Expected l1 distance `E|p(x) - q(x)|` to another predictor on the same space.
    pub fn l1_distance(&self, other: &[f64]) -> f64 {
        self.points
            .iter()
            .zip(other)
            .map(|(p, &q)| p.mass * (p.pred - q).abs())
            .sum()
    }
}

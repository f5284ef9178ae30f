//! Worked examples with known measure values.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::joint::{FiniteInstance, InstancePoint};

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    /// Stated in the literature for this example.
    Literature,
    /// Worked out by hand or by an exhaustive oracle.
    HandDerived,
    /// Follows directly from the definitions.
    Definitional,
}

/// Accepted range for one measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Expectation {
    pub min: f64,
    pub max: f64,
    pub origin: Origin,
}

impl Expectation {
    pub fn near(value: f64, tolerance: f64, origin: Origin) -> Self {
        Self {
            min: value - tolerance,
            max: value + tolerance,
            origin,
        }
    }

    pub fn within(min: f64, max: f64, origin: Origin) -> Self {
        Self { min, max, origin }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.min <= x && x <= self.max
    }
}

/// A finite instance with expected measure values keyed by measure id.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fixture {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub instance: FiniteInstance,
    pub expected: BTreeMap<String, Expectation>,
}

impl Fixture {
    fn new(name: &str, params: &[(&str, f64)], points: Vec<InstancePoint>) -> Result<Self> {
        Ok(Self {
            name: name.into(),
            params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            instance: FiniteInstance::new(points)?,
            expected: BTreeMap::new(),
        })
    }

    fn expect(mut self, id: &str, e: Expectation) -> Self {
        self.expected.insert(id.into(), e);
        self
    }
}

fn point(id: &str, mass: f64, pred: f64, cond_mean: f64) -> InstancePoint {
    InstancePoint {
        id: id.into(),
        mass,
        pred,
        cond_mean,
    }
}

fn check_range(name: &str, x: f64, lo: f64, hi: f64, closed_lo: bool) -> Result<()> {
    let ok = x.is_finite() && (if closed_lo { x >= lo } else { x > lo }) && x < hi;
    if ok {
        Ok(())
    } else {
        let open = if closed_lo { '[' } else { '(' };
        Err(Error::InvalidParameter(format!(
            "{name} = {x} outside {open}{lo}, {hi})"
        )))
    }
}

/// Two equally likely points with labels 0 and 1, predicted `1/2 - eps` and
/// `1/2 + eps`. At `eps = 0` the predictor is the calibrated constant 1/2.
pub fn two_point(eps: f64) -> Result<Fixture> {
    check_range("eps", eps, 0.0, 0.5, true)?;
    let f = Fixture::new(
        "two_point",
        &[("eps", eps)],
        vec![point("a", 0.5, 0.5 - eps, 0.0), point("b", 0.5, 0.5 + eps, 1.0)],
    )?;
    if eps == 0.0 {
        return Ok(f
            .expect("ece", Expectation::near(0.0, 1e-12, Origin::Literature))
            .expect("smce", Expectation::near(0.0, 1e-12, Origin::Definitional))
            .expect("dce", Expectation::near(0.0, 1e-12, Origin::Definitional)));
    }
    Ok(f
        .expect("ece", Expectation::near(0.5 - eps, 1e-12, Origin::Literature))
        .expect("tv", Expectation::near(0.5 - eps, 1e-12, Origin::Literature))
        .expect("smce", Expectation::near(eps * (1.0 - 2.0 * eps) / 2.0, 1e-9, Origin::HandDerived))
        .expect("dce", Expectation::near(eps.min(0.5 - eps), 1e-12, Origin::HandDerived))
        .expect("dce_upper", Expectation::near(eps.min(0.5 - eps), 1e-12, Origin::HandDerived)))
}

/// Constant prediction 1/2 on a single point whose label mean is `1/2 + eps`.
pub fn cdl_example_1(eps: f64) -> Result<Fixture> {
    check_range("eps", eps, 0.0, 0.1, false)?;
    Ok(Fixture::new("cdl_example_1", &[("eps", eps)], vec![point("x", 1.0, 0.5, 0.5 + eps)])?
        .expect("ece2", Expectation::near(eps, 1e-12, Origin::Literature))
        .expect("cdl", Expectation::near(2.0 * eps, 1e-9, Origin::Literature))
        .expect("ece", Expectation::near(eps, 1e-12, Origin::HandDerived))
        .expect("cfdl:matching", Expectation::near(2.0 * eps, 1e-9, Origin::Literature)))
}

/// Identity predictor on `n` equal-mass midpoints of `[eps, 1]`, each with
/// label mean `x - eps`.
///
/// The decision loss of the continuous version is `eps^2 / (1 - eps)`. The
/// midpoint sum over the window `[v*, v* + eps)` deviates by at most the
/// variation `2 eps` of the integrand times the spacing, so the discretized
/// value is at most `eps^2 / (1 - eps) + 2 eps / n`.
pub fn cdl_example_2(eps: f64, n: usize) -> Result<Fixture> {
    check_range("eps", eps, 0.0, 0.1, false)?;
    if n < 100 {
        return Err(Error::InvalidParameter(format!("n = {n} below 100")));
    }
    let h = (1.0 - eps) / n as f64;
    let points = (0..n)
        .map(|i| {
            let x = eps + (i as f64 + 0.5) * h;
            point(&i.to_string(), 1.0 / n as f64, x, x - eps)
        })
        .collect();
    let upper = eps * eps / (1.0 - eps) + 2.0 * eps / n as f64;
    Ok(
        Fixture::new("cdl_example_2", &[("eps", eps), ("n", n as f64)], points)?
            .expect("ece", Expectation::near(eps, 1e-12, Origin::Literature))
            .expect("cdl", Expectation::within(eps * eps, upper, Origin::Literature)),
    )
}

/// Three instances on one four-point space built from `delta = eps / (1 - 2 eps)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticGap {
    /// Predictions `1/2 -+ delta` that are close to a calibrated predictor.
    pub near: Fixture,
    /// The calibrated predictor at distance `2 eps delta` from `near`.
    pub calibrated: Fixture,
    /// A two-point space with the same prediction-label joint as `near`
    /// that is `delta` away from calibration.
    pub far: Fixture,
}

impl QuadraticGap {
    pub fn delta(eps: f64) -> f64 {
        eps / (1.0 - 2.0 * eps)
    }
}

pub fn quadratic_gap(eps: f64) -> Result<QuadraticGap> {
    check_range("eps", eps, 0.0, 0.25, false)?;
    let d = QuadraticGap::delta(eps);
    let (lo, hi) = (0.5 - d, 0.5 + d);
    let space = |preds: [f64; 4]| {
        vec![
            point("00", 0.5 - eps, preds[0], lo),
            point("01", eps, preds[1], 1.0),
            point("10", eps, preds[2], 0.0),
            point("11", 0.5 - eps, preds[3], hi),
        ]
    };
    let params = [("eps", eps), ("delta", d)];
    let near = Fixture::new("quadratic_gap_near", &params, space([lo, lo, hi, hi]))?
        .expect("dce", Expectation::near(2.0 * eps * d, 1e-12, Origin::Literature))
        .expect("dce_upper", Expectation::near(d, 1e-12, Origin::HandDerived))
        .expect("ece", Expectation::near(d, 1e-12, Origin::HandDerived));
    let calibrated = Fixture::new("quadratic_gap_calibrated", &params, space([lo, 0.5, 0.5, hi]))?
        .expect("ece", Expectation::near(0.0, 1e-12, Origin::Literature))
        .expect("dce", Expectation::near(0.0, 1e-12, Origin::Definitional));
    let far = Fixture::new(
        "quadratic_gap_far",
        &params,
        vec![point("lo", 0.5, lo, 0.5), point("hi", 0.5, hi, 0.5)],
    )?
    .expect("dce", Expectation::near(d, 1e-12, Origin::Literature))
    .expect("dce_upper", Expectation::near(d, 1e-12, Origin::HandDerived))
    .expect("ece", Expectation::near(d, 1e-12, Origin::HandDerived));
    Ok(QuadraticGap {
        near,
        calibrated,
        far,
    })
}

/// Fixture names accepted by [`by_name`].
pub const NAMES: &[&str] = &[
    "two_point",
    "cdl_example_1",
    "cdl_example_2",
    "quadratic_gap_near",
    "quadratic_gap_calibrated",
    "quadratic_gap_far",
];

/// Looks a fixture up by name; `n` is only used by `cdl_example_2`.
pub fn by_name(name: &str, eps: f64, n: usize) -> Result<Fixture> {
    match name {
        "two_point" => two_point(eps),
        "cdl_example_1" => cdl_example_1(eps),
        "cdl_example_2" => cdl_example_2(eps, n),
        "quadratic_gap_near" => Ok(quadratic_gap(eps)?.near),
        "quadratic_gap_calibrated" => Ok(quadratic_gap(eps)?.calibrated),
        "quadratic_gap_far" => Ok(quadratic_gap(eps)?.far),
        _ => Err(Error::InvalidParameter(format!(
            "unknown fixture `{name}` (known: {})",
            NAMES.join(", ")
        ))),
    }
}

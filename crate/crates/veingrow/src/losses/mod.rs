//! Regression and classification losses with analytic gradients.
//!
//! The residual-IoU loss normalizes summed absolute distance residuals by
//! the summed target distances, so it is scale invariant and every
//! non-matching direction receives the same gradient magnitude. The
//! log-ratio polar IoU loss is the baseline it is compared against.

pub mod check;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum LossError {
    #[error("target distances are degenerate")]
    DegenerateTarget,
    #[error("prediction and target lengths differ")]
    LengthMismatch,
    #[error("numeric input outside its domain: {0}")]
    NumericalDomain(&'static str),
}

/// Predictions are clamped to at least this before any loss evaluation;
/// negative or zero distances are meaningless.
pub const PREDICTION_FLOOR: f64 = 1e-6;

/// Default focal-loss shape parameters.
pub const DEFAULT_FOCAL_GAMMA: f64 = 2.0;
pub const DEFAULT_FOCAL_ALPHA: f64 = 0.25;

/// A predicted/target distance-vector pair. Targets must be strictly
/// positive; predictions are floored at [`PREDICTION_FLOOR`] and the number
/// of floored entries is reported.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceVectorPair {
    predicted: Vec<f64>,
    target: Vec<f64>,
    clamped: usize,
}

impl DistanceVectorPair {
    pub fn new(predicted: Vec<f64>, target: Vec<f64>) -> Result<Self, LossError> {
        if predicted.len() != target.len() {
            return Err(LossError::LengthMismatch);
        }
        if target.is_empty() {
            return Err(LossError::DegenerateTarget);
        }
        if target.iter().any(|d| !d.is_finite() || *d <= 0.0) {
            return Err(LossError::DegenerateTarget);
        }
        if predicted.iter().any(|d| !d.is_finite()) {
            return Err(LossError::NumericalDomain("non-finite prediction"));
        }
        let mut clamped = 0;
        let predicted = predicted
            .into_iter()
            .map(|d| {
                if d < PREDICTION_FLOOR {
                    clamped += 1;
                    PREDICTION_FLOOR
                } else {
                    d
                }
            })
            .collect();
        Ok(DistanceVectorPair {
            predicted,
            target,
            clamped,
        })
    }

    pub fn len(&self) -> usize {
        self.target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    pub fn predicted(&self) -> &[f64] {
        &self.predicted
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    /// How many predictions were floored during construction.
    pub fn clamped_count(&self) -> usize {
        self.clamped
    }
}

/// A loss value with its analytic gradient with respect to the predicted
/// distances.
#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub value: f64,
    pub gradient: Vec<f64>,
}

fn target_sum(pair: &DistanceVectorPair) -> Result<f64, LossError> {
    let s: f64 = pair.target.iter().sum();
    if s < 1e-9 {
        return Err(LossError::DegenerateTarget);
    }
    Ok(s)
}

/// Residual IoU: `sum(|d_k - d*_k|) / sum(d*_k)`.
///
/// The gradient is `sign(d_k - d*_k) / sum(d*)` with the subgradient at the
/// kink fixed to 0, so every non-matching component gets the same magnitude.
pub fn r_iou_loss(pair: &DistanceVectorPair) -> Result<LossReport, LossError> {
    let denom = target_sum(pair)?;
    let mut value = 0.0;
    let gradient = pair
        .predicted
        .iter()
        .zip(&pair.target)
        .map(|(&d, &t)| {
            value += (d - t).abs();
            sign(d - t) / denom
        })
        .collect();
    Ok(LossReport {
        value: value / denom,
        gradient,
    })
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Log-ratio polar IoU: `ln(sum(max(d_k, d*_k)) / sum(min(d_k, d*_k)))`.
/// Ties contribute the symmetric subgradient 0.
pub fn polar_iou_loss(pair: &DistanceVectorPair) -> Result<LossReport, LossError> {
    target_sum(pair)?;
    let mut sum_max = 0.0;
    let mut sum_min = 0.0;
    for (&d, &t) in pair.predicted.iter().zip(&pair.target) {
        sum_max += d.max(t);
        sum_min += d.min(t);
    }
    if sum_min < 1e-12 {
        return Err(LossError::DegenerateTarget);
    }
    let gradient = pair
        .predicted
        .iter()
        .zip(&pair.target)
        .map(|(&d, &t)| {
            if d > t {
                1.0 / sum_max
            } else if d < t {
                -1.0 / sum_min
            } else {
                0.0
            }
        })
        .collect();
    Ok(LossReport {
        value: (sum_max / sum_min).ln(),
        gradient,
    })
}

/// Alpha-balanced focal loss of a single probability against a binary label,
/// with its derivative with respect to the probability.
pub fn focal_loss(
    prob: f64,
    label: bool,
    gamma: f64,
    alpha: f64,
) -> Result<(f64, f64), LossError> {
    if !(0.0..1.0).contains(&prob) || prob == 0.0 {
        return Err(LossError::NumericalDomain("probability must be in (0,1)"));
    }
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(LossError::NumericalDomain("gamma must be >= 0"));
    }
    if !(0.0..1.0).contains(&alpha) || alpha == 0.0 {
        return Err(LossError::NumericalDomain("alpha must be in (0,1)"));
    }
    // Symmetric in label: swap p -> 1-p, alpha -> 1-alpha.
    let (p, a, flip) = if label {
        (prob, alpha, 1.0)
    } else {
        (1.0 - prob, 1.0 - alpha, -1.0)
    };
    let q = 1.0 - p;
    let value = -a * q.powf(gamma) * p.ln();
    let dvalue_dp = if gamma == 0.0 {
        -a / p
    } else {
        a * gamma * q.powf(gamma - 1.0) * p.ln() - a * q.powf(gamma) / p
    };
    Ok((value, flip * dvalue_dp))
}

/// Binary cross entropy of a probability against a soft target in [0, 1],
/// with its derivative with respect to the probability.
pub fn bce_loss(prob: f64, target: f64) -> Result<(f64, f64), LossError> {
    if !(0.0..1.0).contains(&prob) || prob == 0.0 {
        return Err(LossError::NumericalDomain("probability must be in (0,1)"));
    }
    if !(0.0..=1.0).contains(&target) {
        return Err(LossError::NumericalDomain("target must be in [0,1]"));
    }
    let value = -(target * prob.ln() + (1.0 - target) * (1.0 - prob).ln());
    let grad = -target / prob + (1.0 - target) / (1.0 - prob);
    Ok((value, grad))
}

/// The unweighted sum of the three head losses.
pub fn total_loss(riou: f64, focal: f64, ce: f64) -> f64 {
    riou + focal + ce
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(d: &[f64], t: &[f64]) -> DistanceVectorPair {
        DistanceVectorPair::new(d.to_vec(), t.to_vec()).unwrap()
    }

    #[test]
    fn pair_validation_and_clamping() {
        assert_eq!(
            DistanceVectorPair::new(vec![1.0], vec![1.0, 2.0]),
            Err(LossError::LengthMismatch)
        );
        assert_eq!(
            DistanceVectorPair::new(vec![1.0], vec![0.0]),
            Err(LossError::DegenerateTarget)
        );
        let p = pair(&[-3.0, 0.5], &[1.0, 1.0]);
        assert_eq!(p.clamped_count(), 1);
        assert_eq!(p.predicted()[0], PREDICTION_FLOOR);
    }

    #[test]
    fn r_iou_hand_values() {
        let zero = r_iou_loss(&pair(&[2.0, 5.0], &[2.0, 5.0])).unwrap();
        assert_eq!(zero.value, 0.0);
        assert!(zero.gradient.iter().all(|g| *g == 0.0));

        let r = r_iou_loss(&pair(&[3.0, 1.0], &[2.0, 2.0])).unwrap();
        assert!((r.value - 0.5).abs() < 1e-15);
        // Scale invariance: same inputs times two.
        let r2 = r_iou_loss(&pair(&[6.0, 2.0], &[4.0, 4.0])).unwrap();
        assert!((r2.value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn r_iou_gradient_magnitude_is_uniform() {
        let r = r_iou_loss(&pair(&[3.0, 1.0, 7.0], &[2.0, 2.0, 4.0])).unwrap();
        let mag = 1.0 / 8.0;
        for g in &r.gradient {
            assert!((g.abs() - mag).abs() < 1e-15);
        }
        assert!(r.gradient[0] > 0.0 && r.gradient[1] < 0.0 && r.gradient[2] > 0.0);
    }

    #[test]
    fn polar_iou_hand_values_and_asymmetry() {
        let zero = polar_iou_loss(&pair(&[2.0, 5.0], &[2.0, 5.0])).unwrap();
        assert_eq!(zero.value, 0.0);

        let r = polar_iou_loss(&pair(&[3.0, 1.0], &[2.0, 2.0])).unwrap();
        assert!((r.value - (5.0f64 / 3.0).ln()).abs() < 1e-12);

        // Mirrored residuals within one pair: polar IoU pushes the two
        // directions with different force, residual IoU with the same.
        // sum(max) = 4 and sum(min) = 2, so the push and pull magnitudes are
        // 1/4 and 1/2.
        let p = pair(&[2.0, 1.0], &[1.0, 2.0]);
        let polar = polar_iou_loss(&p).unwrap();
        assert!((polar.gradient[0].abs() - 0.25).abs() < 1e-12);
        assert!((polar.gradient[1].abs() - 0.5).abs() < 1e-12);
        assert!(polar.gradient[0].abs() != polar.gradient[1].abs());
        let riou = r_iou_loss(&p).unwrap();
        assert_eq!(riou.gradient[0].abs(), riou.gradient[1].abs());

        // The one-direction swap shows the polar magnitudes differ even for
        // equal residuals.
        let a = polar_iou_loss(&pair(&[2.0], &[1.0])).unwrap();
        let b = polar_iou_loss(&pair(&[1.0], &[2.0])).unwrap();
        assert!((a.gradient[0].abs() - 0.5).abs() < 1e-12);
        assert!((b.gradient[0].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn focal_hand_values() {
        // gamma = 0, alpha = 1/2 halves the cross entropy.
        for (p, label) in [(0.3, true), (0.8, false)] {
            let (fl, _) = focal_loss(p, label, 0.0, 0.5).unwrap();
            let t = if label { 1.0 } else { 0.0 };
            let (ce, _) = bce_loss(p, t).unwrap();
            assert!((fl - 0.5 * ce).abs() < 1e-12);
        }
        // Confident correct predictions are damped below cross entropy.
        let (fl, _) = focal_loss(0.99, true, 2.0, 0.25).unwrap();
        let (ce, _) = bce_loss(0.99, 1.0).unwrap();
        assert!(fl < ce);
        // 0.25 * 0.25 * ln 2.
        let (fl, _) = focal_loss(0.5, true, 2.0, 0.25).unwrap();
        assert!((fl - 0.25 * 0.25 * 2.0f64.ln()).abs() < 1e-12);

        assert!(focal_loss(0.0, true, 2.0, 0.25).is_err());
        assert!(focal_loss(1.0, true, 2.0, 0.25).is_err());
    }

    #[test]
    fn bce_hand_values() {
        let (v, g) = bce_loss(0.5, 0.5).unwrap();
        assert!((v - 2.0f64.ln()).abs() < 1e-12);
        assert!(g.abs() < 1e-12);
        // p = t is the minimum for every soft target.
        for i in 1..10 {
            let t = i as f64 / 10.0;
            let (_, g) = bce_loss(t, t).unwrap();
            assert!(g.abs() < 1e-12, "t={t}: {g}");
        }
        assert!(bce_loss(0.0, 0.5).is_err());
        assert!(bce_loss(1.0, 0.5).is_err());
    }

    #[test]
    fn total_is_a_plain_sum() {
        assert_eq!(total_loss(0.0, 0.0, 0.0), 0.0);
        let v = total_loss(0.5, 0.0433, 0.6931);
        assert!((v - 1.2364).abs() < 1e-12);
        // Addend order does not matter beyond summation rounding.
        assert_eq!(total_loss(0.5, 0.0433, 0.6931), total_loss(0.0433, 0.5, 0.6931));
        let rotated = total_loss(0.0433, 0.6931, 0.5);
        assert!((v - rotated).abs() <= f64::EPSILON * v.abs());
    }
}

//! Finite-difference verification of the analytic gradients, plus the
//! algebraic invariance checks, packaged so both the test suites and the
//! CLI report command run the same trials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    bce_loss, focal_loss, polar_iou_loss, r_iou_loss, DistanceVectorPair, LossReport,
    DEFAULT_FOCAL_ALPHA, DEFAULT_FOCAL_GAMMA,
};

pub const LOSS_NAMES: [&str; 4] = ["r_iou", "polar_iou", "focal", "bce"];

#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub seed: u64,
    pub trials: usize,
    /// Central-difference step.
    pub fd_step: f64,
    /// Maximum allowed relative error between analytic and numeric
    /// gradients.
    pub tolerance: f64,
    /// Test hook: bias the analytic gradients so every check fails.
    pub corrupt_gradients: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            seed: 0,
            trials: 100,
            fd_step: 1e-5,
            tolerance: 1e-4,
            corrupt_gradients: false,
        }
    }
}

/// One line of the gradient report.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub loss_name: &'static str,
    pub trial: usize,
    pub max_rel_err: f64,
    pub pass: bool,
}

pub fn rows_to_csv(rows: &[CheckRow]) -> String {
    let mut out = String::from("loss_name,trial,max_rel_err,pass\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.3e},{}\n",
            r.loss_name, r.trial, r.max_rel_err, r.pass
        ));
    }
    out
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

/// Draw a pair whose components stay away from the |.| kinks.
fn random_pair(rng: &mut ChaCha8Rng) -> DistanceVectorPair {
    let n = rng.gen_range(4..=24);
    let target: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..10.0)).collect();
    let predicted: Vec<f64> = target
        .iter()
        .map(|t| {
            let mut d = rng.gen_range(0.5..10.0);
            if (d - t).abs() <= 1e-3 {
                d = t + 2e-3;
            }
            d
        })
        .collect();
    DistanceVectorPair::new(predicted, target).unwrap()
}

fn vector_loss_row(
    name: &'static str,
    trial: usize,
    pair: &DistanceVectorPair,
    loss: impl Fn(&DistanceVectorPair) -> LossReport,
    cfg: &CheckConfig,
) -> CheckRow {
    let mut report = loss(pair);
    if cfg.corrupt_gradients {
        report.gradient[0] += 1e-2;
    }
    let mut max_rel = 0.0f64;
    for k in 0..pair.len() {
        let mut plus = pair.predicted().to_vec();
        plus[k] += cfg.fd_step;
        let mut minus = pair.predicted().to_vec();
        minus[k] -= cfg.fd_step;
        let fd = (loss(&DistanceVectorPair::new(plus, pair.target().to_vec()).unwrap()).value
            - loss(&DistanceVectorPair::new(minus, pair.target().to_vec()).unwrap()).value)
            / (2.0 * cfg.fd_step);
        max_rel = max_rel.max(rel_err(report.gradient[k], fd));
    }
    CheckRow {
        loss_name: name,
        trial,
        max_rel_err: max_rel,
        pass: max_rel < cfg.tolerance,
    }
}

fn scalar_loss_row(
    name: &'static str,
    trial: usize,
    prob: f64,
    loss: impl Fn(f64) -> (f64, f64),
    cfg: &CheckConfig,
) -> CheckRow {
    let (_, mut grad) = loss(prob);
    if cfg.corrupt_gradients {
        grad += 1e-2;
    }
    let fd = (loss(prob + cfg.fd_step).0 - loss(prob - cfg.fd_step).0) / (2.0 * cfg.fd_step);
    let max_rel = rel_err(grad, fd);
    CheckRow {
        loss_name: name,
        trial,
        max_rel_err: max_rel,
        pass: max_rel < cfg.tolerance,
    }
}

/// Central-difference gradient checks: one row per loss per trial.
pub fn run_gradient_checks(cfg: &CheckConfig) -> Vec<CheckRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::with_capacity(4 * cfg.trials);
    for trial in 0..cfg.trials {
        let pair = random_pair(&mut rng);
        rows.push(vector_loss_row(
            "r_iou",
            trial,
            &pair,
            |p| r_iou_loss(p).unwrap(),
            cfg,
        ));
        rows.push(vector_loss_row(
            "polar_iou",
            trial,
            &pair,
            |p| polar_iou_loss(p).unwrap(),
            cfg,
        ));

        let prob = rng.gen_range(0.05..0.95);
        let label = rng.gen_bool(0.5);
        rows.push(scalar_loss_row(
            "focal",
            trial,
            prob,
            |p| focal_loss(p, label, DEFAULT_FOCAL_GAMMA, DEFAULT_FOCAL_ALPHA).unwrap(),
            cfg,
        ));
        // Keep the target away from the probability so the BCE gradient is
        // bounded away from zero.
        let target = if prob < 0.5 {
            rng.gen_range((prob + 0.05).min(0.99)..1.0)
        } else {
            rng.gen_range(0.0..(prob - 0.05).max(0.01))
        };
        rows.push(scalar_loss_row(
            "bce",
            trial,
            prob,
            |p| bce_loss(p, target).unwrap(),
            cfg,
        ));
    }
    rows
}

/// A named algebraic invariance result; `deviation` is the measured
/// violation.
#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceRow {
    pub name: &'static str,
    pub deviation: f64,
    pub pass: bool,
}

/// Scale invariance, zero-iff-exact, uniform gradient magnitude, and
/// nonnegativity over seeded random pairs.
pub fn run_invariance_checks(cfg: &CheckConfig) -> Vec<InvarianceRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_1a7e);
    let mut scale_dev = 0.0f64;
    let mut zero_dev = 0.0f64;
    let mut uniform_dev = 0.0f64;
    let mut nonneg_dev = 0.0f64;
    for _ in 0..cfg.trials {
        let pair = random_pair(&mut rng);
        let base_r = r_iou_loss(&pair).unwrap();
        let base_p = polar_iou_loss(&pair).unwrap();
        nonneg_dev = nonneg_dev.max(-base_r.value).max(-base_p.value);
        for alpha in [0.5, 2.0, 10.0] {
            let scaled = DistanceVectorPair::new(
                pair.predicted().iter().map(|d| alpha * d).collect(),
                pair.target().iter().map(|d| alpha * d).collect(),
            )
            .unwrap();
            scale_dev = scale_dev.max((r_iou_loss(&scaled).unwrap().value - base_r.value).abs());
            scale_dev =
                scale_dev.max((polar_iou_loss(&scaled).unwrap().value - base_p.value).abs());
        }
        // Exact match must hit exactly zero...
        let exact = DistanceVectorPair::new(pair.target().to_vec(), pair.target().to_vec()).unwrap();
        zero_dev = zero_dev.max(r_iou_loss(&exact).unwrap().value.abs());
        // ...and any mismatch must not.
        if base_r.value == 0.0 {
            zero_dev = zero_dev.max(1.0);
        }
        let mag = 1.0 / pair.target().iter().sum::<f64>();
        for (g, (&d, &t)) in base_r.gradient.iter().zip(pair.predicted().iter().zip(pair.target()))
        {
            if d != t {
                uniform_dev = uniform_dev.max((g.abs() - mag).abs());
            }
        }
    }
    if cfg.corrupt_gradients {
        scale_dev += 1.0;
    }
    vec![
        InvarianceRow {
            name: "r_iou_scale_invariance",
            deviation: scale_dev,
            pass: scale_dev < 1e-12,
        },
        InvarianceRow {
            name: "r_iou_zero_iff_exact",
            deviation: zero_dev,
            pass: zero_dev == 0.0,
        },
        InvarianceRow {
            name: "r_iou_uniform_gradient_magnitude",
            deviation: uniform_dev,
            pass: uniform_dev < 1e-15,
        },
        InvarianceRow {
            name: "iou_losses_nonnegative",
            deviation: nonneg_dev.max(0.0),
            pass: nonneg_dev <= 0.0,
        },
    ]
}

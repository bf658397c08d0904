//! Metrics and theory diagnostics: tracking error, per-pixel foreground
//! scores, ROC/AUC, and the steady-state error-bound report.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DVector;

use crate::datagen::format_f64;
use crate::error::{Error, Result};
use crate::grassmann::{chordal_distance, SubspacePoint};

/// Chordal distance between the true and estimated subspaces.
pub fn tracking_error(truth: &SubspacePoint, estimate: &SubspacePoint) -> Result<f64> {
    chordal_distance(truth, estimate)
}

/// Per-pixel detection score: the absolute residual after projecting the
/// frame onto the background estimate, `|((I - P) u)_j|`. Depends on the
/// estimate only through its projector.
pub fn foreground_scores(frame: &DVector<f64>, estimate: &SubspacePoint) -> Result<DVector<f64>> {
    if frame.len() != estimate.ambient_dim() {
        return Err(Error::Dimension(format!(
            "frame length {} does not match ambient dimension {}",
            frame.len(),
            estimate.ambient_dim()
        )));
    }
    let coeff = estimate.basis().transpose() * frame;
    let residual = frame - estimate.basis() * coeff;
    Ok(residual.abs())
}

/// Receiver operating characteristic over a pooled score/label set.
#[derive(Clone, Debug)]
pub struct RocCurve {
    /// Descending thresholds, bracketed by +inf and -inf.
    pub thresholds: Vec<f64>,
    pub tpr: Vec<f64>,
    pub fpr: Vec<f64>,
    /// Trapezoidal area under the curve.
    pub auc: f64,
}

/// Sweeps `n_thresholds` evenly spaced quantiles of the pooled scores (plus
/// the two infinite endpoints) and integrates the curve by trapezoid.
/// A pixel is predicted foreground when its score is >= the threshold.
pub fn roc(scores: &[Vec<f64>], masks: &[Vec<bool>], n_thresholds: usize) -> Result<RocCurve> {
    if scores.len() != masks.len() {
        return Err(Error::Dimension(format!(
            "{} score frames vs {} mask frames",
            scores.len(),
            masks.len()
        )));
    }
    let mut pos: Vec<f64> = Vec::new();
    let mut neg: Vec<f64> = Vec::new();
    for (s, m) in scores.iter().zip(masks) {
        if s.len() != m.len() {
            return Err(Error::Dimension(
                "score and mask frames have different lengths".into(),
            ));
        }
        for (&score, &label) in s.iter().zip(m) {
            if label {
                pos.push(score);
            } else {
                neg.push(score);
            }
        }
    }
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::DegenerateLabels(format!(
            "need both classes, got {} positives and {} negatives",
            pos.len(),
            neg.len()
        )));
    }
    pos.sort_by(|a, b| a.partial_cmp(b).unwrap());
    neg.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // quantile grid over the pooled scores, descending
    let mut pooled: Vec<f64> = pos.iter().chain(neg.iter()).copied().collect();
    pooled.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut thresholds = vec![f64::INFINITY];
    let m = n_thresholds.max(1);
    for i in (0..m).rev() {
        let q = (i as f64 + 0.5) / m as f64;
        let idx = ((q * pooled.len() as f64) as usize).min(pooled.len() - 1);
        thresholds.push(pooled[idx]);
    }
    thresholds.push(f64::NEG_INFINITY);

    let count_ge = |sorted: &[f64], threshold: f64| -> usize {
        if threshold == f64::NEG_INFINITY {
            return sorted.len();
        }
        sorted.len() - sorted.partition_point(|&x| x < threshold)
    };

    let mut tpr = Vec::with_capacity(thresholds.len());
    let mut fpr = Vec::with_capacity(thresholds.len());
    for &th in &thresholds {
        tpr.push(count_ge(&pos, th) as f64 / pos.len() as f64);
        fpr.push(count_ge(&neg, th) as f64 / neg.len() as f64);
    }
    let mut auc = 0.0;
    for i in 1..thresholds.len() {
        auc += 0.5 * (tpr[i] + tpr[i - 1]) * (fpr[i] - fpr[i - 1]);
    }
    Ok(RocCurve {
        thresholds,
        tpr,
        fpr,
        auc,
    })
}

/// One evaluated step of the tracking-error bound.
#[derive(Clone, Copy, Debug)]
pub struct BoundStep {
    /// Steps since the initial estimate (1-based).
    pub t: usize,
    /// Measured `d_c(U_t, estimate_t)`.
    pub measured: f64,
    /// Exponentially decaying transient `beta^{t/2} * initial_error`.
    pub transient: f64,
    /// Full right-hand side of the bound.
    pub rhs: f64,
    pub violated: bool,
}

/// Per-run report on the steady-state tracking-error bound
/// `d_c <= beta^{t/2} e0 + C1 mu + C2 sqrt(2) p/(1-p) + C3 rho + C4 sqrt(d-k)`.
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub beta_hat: f64,
    pub mu_hat: f64,
    pub p_sup: f64,
    pub rho_sup: f64,
    pub d_minus_k: usize,
    pub initial_error: f64,
    pub steps: Vec<BoundStep>,
}

impl BoundReport {
    pub fn violations(&self) -> usize {
        self.steps.iter().filter(|s| s.violated).count()
    }
}

/// Constants of the error bound as functions of the contraction factor.
pub fn bound_constants(beta_hat: f64) -> Result<(f64, f64, f64, f64)> {
    if !(0.0..1.0).contains(&beta_hat) {
        return Err(Error::Domain(format!(
            "beta_hat = {beta_hat} must lie in [0, 1)"
        )));
    }
    let sb = beta_hat.sqrt();
    let c1 = sb / (1.0 - sb);
    let c2 = 1.0 / (1.0 - sb);
    let c3 = (2.0 * sb + (1.0 - beta_hat).sqrt()) / (1.0 - sb);
    let c4 = (1.0 + (1.0 - beta_hat).sqrt()) / (1.0 - sb);
    Ok((c1, c2, c3, c4))
}

/// Evaluates the bound along a run.
///
/// `errors[0]` is the error of the initial estimate at warmup time; each
/// later entry is the measured error after one tracker step, paired with
/// that step's radius and capped noise-to-signal ratio.
pub fn bound_report(
    errors: &[f64],
    rhos: &[f64],
    p_bars: &[f64],
    beta_hat: f64,
    mu_hat: f64,
    d_minus_k: usize,
) -> Result<BoundReport> {
    let (c1, c2, c3, c4) = bound_constants(beta_hat)?;
    if errors.len() < 2 {
        return Err(Error::InsufficientData(
            "need the initial error plus at least one step".into(),
        ));
    }
    if rhos.len() != errors.len() - 1 || p_bars.len() != errors.len() - 1 {
        return Err(Error::Dimension(format!(
            "{} steps but {} radii and {} noise ratios",
            errors.len() - 1,
            rhos.len(),
            p_bars.len()
        )));
    }
    if !mu_hat.is_finite() || mu_hat < 0.0 {
        return Err(Error::Domain(format!("mu_hat = {mu_hat} must be >= 0")));
    }
    let p_sup = p_bars.iter().cloned().fold(0.0, f64::max);
    if p_sup >= 1.0 {
        return Err(Error::Domain(format!("sup p = {p_sup} must stay below 1")));
    }
    let rho_sup = rhos.iter().cloned().fold(0.0, f64::max);
    let sqrt_beta = beta_hat.sqrt();
    let initial_error = errors[0];
    let floor = c1 * mu_hat
        + c2 * 2.0_f64.sqrt() * p_sup / (1.0 - p_sup)
        + c3 * rho_sup
        + c4 * (d_minus_k as f64).sqrt();
    let steps = errors[1..]
        .iter()
        .enumerate()
        .map(|(i, &measured)| {
            let t = i + 1;
            let transient = sqrt_beta.powi(t as i32) * initial_error;
            let rhs = transient + floor;
            BoundStep {
                t,
                measured,
                transient,
                rhs,
                violated: measured > rhs,
            }
        })
        .collect();
    Ok(BoundReport {
        c1,
        c2,
        c3,
        c4,
        beta_hat,
        mu_hat,
        p_sup,
        rho_sup,
        d_minus_k,
        initial_error,
        steps,
    })
}

/// One row of the per-step metrics CSV.
#[derive(Clone, Copy, Debug)]
pub struct MetricsRow {
    pub t: usize,
    /// Tracking error when ground truth is available.
    pub d_c: Option<f64>,
    pub rho: f64,
    pub lambda_star: Option<f64>,
    pub f_before: f64,
    pub f_after: f64,
}

/// Writes per-step metrics; the `lambda_star` cell is empty for inactive or
/// nominal-baseline steps, and `d_c` is empty without ground truth.
pub fn write_metrics_csv(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "t,d_c,rho,lambda_star,f_before,f_after")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.t,
            r.d_c.map(format_f64).unwrap_or_default(),
            format_f64(r.rho),
            r.lambda_star.map(format_f64).unwrap_or_default(),
            format_f64(r.f_before),
            format_f64(r.f_after),
        )?;
    }
    Ok(())
}

pub fn write_roc_csv(path: &Path, curve: &RocCurve) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "fpr,tpr,threshold")?;
    for i in 0..curve.thresholds.len() {
        writeln!(
            out,
            "{},{},{}",
            format_f64(curve.fpr[i]),
            format_f64(curve.tpr[i]),
            format_f64(curve.thresholds[i]),
        )?;
    }
    Ok(())
}

//! Named property suites.
//!
//! Each suite re-runs one family of the library's structural guarantees on
//! freshly sampled instances and reports trial counts, failures, and the
//! worst signed margin (bound minus measured; negative means a violation).
//! The experiment CLI dispatches these by name, and the acceptance tests
//! run them at their full budgets.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::datagen::{drift_sequence, frame_at, RotatingSubspaceModel};
use crate::error::{Error, Result};
use crate::grassmann::{
    chordal_distance, chordal_distance_sq, exp_map, gaussian_matrix, random_subspace,
    riemannian_gradient, sample_ball_boundary, SubspacePoint,
};
use crate::tol;
use crate::tracker::{
    contraction_estimate, nominal_subspace, RadiusPolicy, Tracker, TrackerConfig, TrackerMode,
};
use crate::worstcase::{
    f_star_oracle, robust_gradient, worst_case_with, EigenPath, UncertaintyBall,
};

/// Outcome of one suite run.
#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: String,
    /// Units executed: instances, steps, or runs depending on the suite.
    pub trials: usize,
    pub failures: usize,
    /// Smallest signed margin over all checks; +inf when nothing ran.
    pub worst_margin: f64,
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(name: &str) -> Self {
        Self {
            suite: name.to_string(),
            trials: 0,
            failures: 0,
            worst_margin: f64::INFINITY,
            notes: Vec::new(),
        }
    }

    fn check(&mut self, margin: f64) {
        if margin < self.worst_margin {
            self.worst_margin = margin;
        }
        if margin < 0.0 {
            self.failures += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

pub const SUITE_NAMES: [&str; 7] = [
    "geometry",
    "spectral-gap",
    "inner-max",
    "gradient",
    "descent",
    "pl",
    "bound",
];

/// Runs a suite by name. `budget` counts instances for geometry,
/// spectral-gap, inner-max and gradient; tracking steps for descent and pl;
/// seeded runs for bound.
pub fn run_suite(name: &str, budget: usize, seed: u64) -> Result<SuiteReport> {
    match name {
        "geometry" => Ok(geometry(budget, seed)),
        "spectral-gap" => spectral_gap(budget, seed),
        "inner-max" => inner_max(budget, seed),
        "gradient" => gradient(budget, seed),
        "descent" => descent(budget, seed),
        "pl" => pl_condition(budget, seed),
        "bound" => bound(budget, seed),
        other => Err(Error::Config(format!(
            "unknown suite {other:?}; known suites: {}",
            SUITE_NAMES.join(", ")
        ))),
    }
}

fn empty_budget(mut report: SuiteReport) -> SuiteReport {
    report.notes.push("no trials requested".into());
    report
}

/// Metric axioms, projector identities, the chordal/Frobenius identity and
/// geodesic orthonormality on random instances.
pub fn geometry(trials: usize, seed: u64) -> SuiteReport {
    let mut report = SuiteReport::new("geometry");
    if trials == 0 {
        return empty_budget(report);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let n = rng.random_range(4..=30);
        let k = rng.random_range(1..=(n / 2).max(1));
        let a = random_subspace(n, k, &mut rng);
        let b = random_subspace(n, k, &mut rng);
        let c = random_subspace(n, k, &mut rng);

        // projector idempotence and symmetry
        let p = a.projector();
        report.check(tol::PROJECTOR_TOL - (&p * &p - &p).norm());
        report.check(tol::PROJECTOR_TOL - (&p - p.transpose()).norm());

        // metric axioms on an equal-dimension triple
        let dab = chordal_distance(&a, &b).unwrap();
        let dba = chordal_distance(&b, &a).unwrap();
        report.check(1e-12 - (dab - dba).abs());
        report.check(1e-12 - chordal_distance(&a, &a).unwrap());
        let dac = chordal_distance(&a, &c).unwrap();
        let dbc = chordal_distance(&b, &c).unwrap();
        report.check(dab + dbc + 1e-9 - dac);

        // chordal distance against the projector Frobenius form
        let frob = (a.projector() - b.projector()).norm() / 2.0_f64.sqrt();
        report.check(tol::CHORDAL_FROBENIUS_TOL - (dab - frob).abs());

        // geodesics keep orthonormal bases
        let dir = riemannian_gradient(&a, &gaussian_matrix(n, k, &mut rng)).unwrap();
        let step = rng.random_range(0.0..=std::f64::consts::PI);
        let moved = exp_map(&dir, step).unwrap();
        let gram_dev = (moved.basis().transpose() * moved.basis()
            - nalgebra::DMatrix::identity(k, k))
        .norm();
        report.check(tol::ORTHONORMALITY_TOL - gram_dev);

        report.trials += 1;
    }
    report
}

/// Spectral gap and eigenspace perturbation: `delta_d(B) >= lambda - 2` and
/// `d_c(V_d(B), center) <= sqrt(k) / (lambda - 2)`.
pub fn spectral_gap(trials: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("spectral-gap");
    if trials == 0 {
        return Ok(empty_budget(report));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let d = rng.random_range(2..=8);
        let k = rng.random_range(1..=d);
        let n = rng.random_range((k + d).max(4)..=30);
        let lambda = 2.0 + rng.random_range(f64::EPSILON..=4.0);
        let y = random_subspace(n, k, &mut rng);
        let center = random_subspace(n, d, &mut rng);
        let ball = UncertaintyBall::new(center.clone(), 0.5 * (k as f64).sqrt())?;

        let eig = crate::worstcase::b_top_eigenspace(&y, &ball, lambda, EigenPath::Dense)?;
        report.check(eig.gap_at_d - (lambda - 2.0) + tol::SPECTRAL_GAP_SLACK);

        let dist = chordal_distance(&eig.basis, &center)?;
        report.check((k as f64).sqrt() / (lambda - 2.0) + tol::DAVIS_KAHAN_SLACK - dist);

        report.trials += 1;
    }
    Ok(report)
}

/// Boundary activity of the closed-form maximizer and its dominance over
/// sampled feasible subspaces (half on the sphere, half in the interior),
/// plus monotonicity of the bisection function on a lambda grid.
///
/// Instances are drawn in the active regime, where the top-eigenspace
/// characterization applies; the inactive sentinel is exercised separately.
pub fn inner_max(trials: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("inner-max");
    if trials == 0 {
        return Ok(empty_budget(report));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps_bis = 1e-8;
    let samples_per_side = 200;
    let mut inactive_skips = 0usize;

    for trial in 0..trials {
        // rejection-sample an active instance
        let mut found = None;
        for _ in 0..40 {
            let d = rng.random_range(3..=7);
            let k = rng.random_range(2..=d);
            let n = rng.random_range((k + d + 2).max(8)..=30);
            let rho = rng.random_range(0.1..=0.6) * (k as f64).sqrt().min(1.5);
            let y = random_subspace(n, k, &mut rng);
            let center = random_subspace(n, d, &mut rng);
            let ball = UncertaintyBall::new(center, rho)?;
            let sol = worst_case_with(&y, &ball, eps_bis, EigenPath::Dense)?;
            if sol.lambda_star.is_some() {
                found = Some((y, ball, sol));
                break;
            }
            inactive_skips += 1;
        }
        let Some((y, ball, sol)) = found else {
            report
                .notes
                .push(format!("trial {trial}: no active instance found"));
            report.check(-1.0);
            continue;
        };

        let rho = ball.radius();
        let dist = chordal_distance(&sol.maximizer, ball.center())?;
        report.check(1e-5 - (dist - rho).abs());

        // dominance against boundary and scaled-interior samples
        let mut best_sample = f64::NEG_INFINITY;
        for s in 0..samples_per_side {
            let sample_seed = seed
                .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                .wrapping_add((trial * 1000 + s) as u64);
            let boundary = sample_ball_boundary(ball.center(), rho, sample_seed)?;
            best_sample = best_sample.max(chordal_distance_sq(&y, &boundary)?);
            let interior_radius = rho * rng.random_range(0.05..0.95);
            let interior =
                sample_ball_boundary(ball.center(), interior_radius, sample_seed ^ 0xabcd)?;
            best_sample = best_sample.max(chordal_distance_sq(&y, &interior)?);
        }
        report.check(sol.objective - best_sample + tol::DOMINANCE_SLACK);

        // h is non-increasing along an increasing lambda grid
        if trial < 10 {
            let k = y.sub_dim() as f64;
            let lo = 2.0 + tol::GAP_FLOOR;
            let hi = 2.0 + k.sqrt() / rho;
            let mut prev = f64::INFINITY;
            for i in 0..50 {
                let lambda = lo + (hi - lo) * (i as f64 + 0.5) / 50.0;
                let val = crate::worstcase::h(&y, &ball, lambda)?;
                report.check(prev - val + tol::MONOTONE_SLACK);
                prev = val;
            }
        }

        report.trials += 1;
    }
    if inactive_skips > 0 {
        report
            .notes
            .push(format!("{inactive_skips} inactive draws resampled"));
    }
    Ok(report)
}

/// Analytic gradient against central finite differences of the robust
/// objective along random geodesic directions, on instances where the
/// maximizer is unique (active dual, healthy gap).
pub fn gradient(trials: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("gradient");
    if trials == 0 {
        return Ok(empty_budget(report));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // the finite-difference oracle needs the dual solved far below the
    // quotient scale h_fd, so the probe uses a near-exact bisection
    let eps_probe = 1e-12;

    for trial in 0..trials {
        let mut instance = None;
        for _ in 0..40 {
            let d = rng.random_range(3..=6);
            let k = rng.random_range(2..=d);
            let n = rng.random_range((k + d + 2).max(10)..=24);
            let rho = rng.random_range(0.15..=0.5);
            let y = random_subspace(n, k, &mut rng);
            let center = random_subspace(n, d, &mut rng);
            let ball = UncertaintyBall::new(center, rho)?;
            let sol = worst_case_with(&y, &ball, eps_probe, EigenPath::Dense)?;
            if sol.lambda_star.is_some() && sol.gap_at_d >= 1e-6 {
                instance = Some((y, ball, sol));
                break;
            }
        }
        let Some((y, ball, sol)) = instance else {
            report
                .notes
                .push(format!("trial {trial}: no non-degenerate instance"));
            report.check(-1.0);
            continue;
        };

        let grad = robust_gradient(&y, &sol.maximizer)?;
        let grad_norm = grad.norm().max(1e-12);
        let (n, k) = (y.ambient_dim(), y.sub_dim());
        for _ in 0..5 {
            let dir = riemannian_gradient(&y, &gaussian_matrix(n, k, &mut rng))?;
            let scale = dir.norm();
            if scale < 1e-12 {
                continue;
            }
            let unit = dir.scaled(1.0 / scale);
            let analytic = grad
                .direction()
                .iter()
                .zip(unit.direction().iter())
                .map(|(a, b)| a * b)
                .sum::<f64>();
            let step = tol::FD_STEP;
            let plus = worst_case_with(&exp_map(&unit, step)?, &ball, eps_probe, EigenPath::Dense)?
                .objective;
            let minus =
                worst_case_with(&exp_map(&unit, -step)?, &ball, eps_probe, EigenPath::Dense)?
                    .objective;
            let fd = (plus - minus) / (2.0 * step);
            let rel = (analytic - fd).abs() / grad_norm;
            report.check(tol::FD_REL_TOL - rel);
        }
        report.trials += 1;
    }
    Ok(report)
}

/// Stream used by the run-based suites: a slowly rotating noisy background.
fn diagnostics_stream(seed: u64, steps: usize, model: &RotatingSubspaceModel) -> Vec<DVector<f64>> {
    let _ = seed;
    (0..steps)
        .map(|t| frame_at(model, None, t).expect("stream synthesis").observation)
        .collect()
}

/// Per-inner-iteration descent of the robust objective along a tracking run
/// at the descent-regime step size.
pub fn descent(steps: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("descent");
    if steps == 0 {
        return Ok(empty_budget(report));
    }
    let model = RotatingSubspaceModel::new(20, 3, 0.05, 100, 2.0, 0.01, seed)?;
    let cfg = TrackerConfig {
        n: 20,
        k: 3,
        d: 5,
        window_len: 10,
        inner_iters: 3,
        alpha: tol::DESCENT_TEST_ALPHA,
        eps_bis: 1e-10,
        radius_policy: RadiusPolicy::Fixed(0.3),
        mode: TrackerMode::Gerost,
        eigen_path: EigenPath::Dense,
        init_seed: seed ^ 0x5151,
    };
    let total = steps + cfg.window_len;
    let stream = diagnostics_stream(seed, total, &model);
    let mut tracker = Tracker::new(cfg)?;
    for u in &stream {
        if let Some(diag) = tracker.step(u)? {
            for w in diag.inner_objectives.windows(2) {
                report.check(w[0] + tol::DESCENT_SLACK - w[1]);
            }
            report.trials += 1;
            if report.trials >= steps {
                break;
            }
        }
    }
    Ok(report)
}

/// Gradient-domination spot check: on steps where
/// `rho_tilde = d_c(prev estimate, prev truth) + mu + 2 rho < sqrt(d-k+1)`,
/// every inner iterate satisfies
/// `||grad F||^2 >= 2 nu (F - F*) - slack` with
/// `nu = 2 (1 + (d-k) - rho_tilde^2)` and F* from the deep-descent oracle.
pub fn pl_condition(steps: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("pl");
    if steps == 0 {
        return Ok(empty_budget(report));
    }
    let (n, k, d) = (20, 3, 5);
    let rho = 0.15;
    let model = RotatingSubspaceModel::new(n, k, 0.0, 100, 2.0, 1e-6, seed)?;
    let mu_hat = drift_sequence(&model).iter().cloned().fold(0.0, f64::max);
    let cfg = TrackerConfig {
        n,
        k,
        d,
        window_len: 10,
        inner_iters: 3,
        alpha: tol::DESCENT_TEST_ALPHA,
        eps_bis: 1e-10,
        radius_policy: RadiusPolicy::Fixed(rho),
        mode: TrackerMode::Gerost,
        eigen_path: EigenPath::Dense,
        init_seed: seed ^ 0xa0a0,
    };
    let total = steps + cfg.window_len;
    let stream = diagnostics_stream(seed, total, &model);
    let mut tracker = Tracker::new(cfg)?;
    let eligibility = ((d - k + 1) as f64).sqrt();
    let mut eligible = 0usize;

    for (t, u) in stream.iter().enumerate() {
        let prev_estimate = tracker.estimate().cloned();
        let diag = match tracker.step(u)? {
            Some(diag) => diag,
            None => continue,
        };
        let prev_estimate = prev_estimate.expect("estimate exists once updates begin");
        let prev_truth = model.truth_at(t - 1);
        let rho_tilde = chordal_distance(&prev_estimate, &prev_truth)? + mu_hat + 2.0 * diag.rho;
        report.trials += 1;
        if rho_tilde >= eligibility {
            continue;
        }
        eligible += 1;
        let nu = 2.0 * (1.0 + (d - k) as f64 - rho_tilde * rho_tilde);

        // rebuild this step's ball from the window the tracker just used
        let (nominal, _) = nominal_subspace(&tracker.window_matrix(), d)?;
        let ball = UncertaintyBall::new(nominal, diag.rho)?;
        let f_star = f_star_oracle(
            &ball,
            k,
            std::slice::from_ref(&prev_estimate),
            0.1,
            1e-10,
            EigenPath::Dense,
        )?;
        for (grad_norm, objective) in diag.grad_norms.iter().zip(&diag.inner_objectives) {
            let lhs = grad_norm * grad_norm;
            let rhs = 2.0 * nu * (objective - f_star);
            report.check(lhs - rhs + tol::PL_SLACK);
        }
        if report.trials >= steps {
            break;
        }
    }
    report
        .notes
        .push(format!("{eligible} of {} steps eligible", report.trials));
    Ok(report)
}

/// Steady-state error bound: seeded drifting noisy runs with the adaptive
/// radius rule; verifies the bound's premises along the run (noise bound,
/// signal floor) and flags any step exceeding the bound.
pub fn bound(runs: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("bound");
    if runs == 0 {
        return Ok(empty_budget(report));
    }
    let (n, k, d) = (20usize, 4usize, 4usize);
    let coeff_std = 2.0;
    let noise_std = 1e-4;
    let steps = 60usize;

    for run in 0..runs {
        let run_seed = seed.wrapping_add(run as u64);
        let model = RotatingSubspaceModel::new(n, k, 0.02, 200, coeff_std, noise_std, run_seed)?;
        let mu_hat = drift_sequence(&model).iter().cloned().fold(0.0, f64::max);
        let eps_est = noise_std * (n as f64).sqrt() * 3.0;
        let sigma_lower = 0.5 * coeff_std; // fraction of the typical signal floor
        let window_len = 8usize;
        let cfg = TrackerConfig {
            n,
            k,
            d,
            window_len,
            inner_iters: 3,
            alpha: 0.25,
            eps_bis: 1e-8,
            radius_policy: RadiusPolicy::Adaptive(crate::tracker::AdaptiveRadius {
                mu_est: mu_hat,
                eps_est,
                sigma_lower,
                p_cap: 0.9,
                include_dk_term: true,
            }),
            mode: TrackerMode::Gerost,
            eigen_path: EigenPath::Dense,
            init_seed: run_seed ^ 0xb0b0,
        };
        let stream = diagnostics_stream(run_seed, steps + window_len, &model);
        let mut tracker = Tracker::new(cfg)?;

        let mut errors = Vec::new();
        let mut rhos = Vec::new();
        let mut p_bars = Vec::new();
        let mut f_pairs = Vec::new();
        let mut f_stars = Vec::new();

        for (t, u) in stream.iter().enumerate() {
            let diag = match tracker.step(u)? {
                Some(diag) => diag,
                None => {
                    if let Some(est) = tracker.estimate() {
                        if errors.is_empty() {
                            // error of the warm start at t0
                            errors.push(chordal_distance(&model.truth_at(t), est)?);
                        }
                    }
                    continue;
                }
            };
            let truth = model.truth_at(t);
            let estimate = tracker.estimate().expect("warmed up").clone();
            errors.push(chordal_distance(&truth, &estimate)?);
            rhos.push(diag.rho);
            p_bars.push(diag.p_bar);
            f_pairs.push((diag.f_before, diag.f_after));

            // premises: the configured noise bound must dominate the true
            // off-subspace window energy, and the signal floor must hold
            let window = tracker.window_matrix();
            let pu = truth.basis() * (truth.basis().transpose() * &window);
            let residual = (&window - &pu).norm();
            report.check(diag.eta - residual);
            let svd = pu.svd(false, false);
            let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
            sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
            report.check(sv[k - 1] - sigma_lower);

            let (nominal, _) = nominal_subspace(&window, d)?;
            let ball = UncertaintyBall::new(nominal, diag.rho)?;
            f_stars.push(f_star_oracle(
                &ball,
                k,
                std::slice::from_ref(&estimate),
                0.1,
                1e-8,
                EigenPath::Dense,
            )?);
        }

        let beta_hat = contraction_estimate(&f_pairs, &f_stars)?;
        if !(0.0..1.0).contains(&beta_hat) {
            report
                .notes
                .push(format!("run {run}: contraction estimate {beta_hat} not in [0,1)"));
            report.check(-1.0);
            continue;
        }
        let bound_rep =
            crate::eval::bound_report(&errors, &rhos, &p_bars, beta_hat, mu_hat, d - k)?;
        for step in &bound_rep.steps {
            report.check(step.rhs - step.measured);
        }
        report.trials += 1;
        report
            .notes
            .push(format!("run {run}: beta_hat = {beta_hat:.4}"));
    }
    Ok(report)
}

//! Critical-point taxonomy and root finding on the game form.
//!
//! A point is classified along four axes: criticality (`omega(x) = 0`),
//! the local-Nash necessary conditions (player blocks of the Jacobian
//! positive semidefinite), the differential-Nash sufficient conditions
//! (blocks strictly positive definite), and the spectral properties of
//! the game Jacobian (non-degeneracy and hyperbolicity). Roots of
//! `omega` are located by damped Newton iteration with a Levenberg
//! fallback, so continua of equilibria with singular Jacobians (as the
//! softmax games produce) are a supported case rather than a failure.

use crate::gameform;
use crate::games::{GameDefinition, GameError, JointPoint};
use crate::linalg::{self, Mat};
use crate::parallel;
use crate::rng::Rng;
use crate::spectra::{self, DefinitenessVerdict, SpectraError, Spectrum};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("eigenvalue computation failed: {0}")]
    Spectra(SpectraError),
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error("non-finite value encountered during iteration")]
    NonFinite,
}

/// Numerical thresholds realizing the exact conditions of the taxonomy.
/// Each threshold is applied scale-relatively (see field docs), so games
/// at wildly different magnitudes classify consistently.
#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    /// Criticality: `|omega|_inf < tol_omega * (1 + |x|_inf)`.
    pub tol_omega: f64,
    /// Semidefiniteness slack for the player-block verdicts, scaled by
    /// `1 + |block|_inf`.
    pub tol_psd: f64,
    /// Strict-definiteness margin on the block minimum eigenvalue,
    /// scaled by `1 + |block|_inf`.
    pub tol_pd: f64,
    /// Non-degeneracy: `|det|` of the row-norm-scaled Jacobian must
    /// exceed this (the scaling already removes magnitude, so the
    /// threshold is applied as-is).
    pub tol_det: f64,
    /// Hyperbolicity: `min |Re lambda| > tol_re * (1 + |Domega|_inf)`.
    pub tol_re: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { tol_omega: 1e-9, tol_psd: 1e-8, tol_pd: 1e-8, tol_det: 1e-8, tol_re: 1e-8 }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<(), ClassifyError> {
        let all = [self.tol_omega, self.tol_psd, self.tol_pd, self.tol_det, self.tol_re];
        if all.iter().any(|t| *t <= 0.0 || !t.is_finite()) {
            return Err(ClassifyError::InvalidOptions(
                "all tolerances must be finite and strictly positive".into(),
            ));
        }
        Ok(())
    }
}

/// Final verdict label; a pure function of the report flags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PointLabel {
    NotCritical,
    CriticalNonNash,
    NashCandidateDegeneratePlayerBlocks,
    DifferentialNash,
}

/// Full classification of one point.
#[derive(Clone, Debug, Serialize)]
pub struct CriticalPointReport {
    pub point: JointPoint,
    pub omega_inf_norm: f64,
    pub is_critical: bool,
    /// Verdict on `D1^2 f` (player 1's own-block curvature).
    pub block1_verdict: DefinitenessVerdict,
    /// Verdict on `-D2^2 f` (player 2's own-block curvature in its
    /// maximization problem).
    pub block2_verdict: DefinitenessVerdict,
    pub lne_necessary: bool,
    pub is_dne: bool,
    pub det_domega: f64,
    pub nondegenerate: bool,
    pub spectrum: Spectrum,
    pub min_abs_re: f64,
    pub hyperbolic: bool,
    pub label: PointLabel,
}

fn row_norm_scaled(j: &Mat) -> Mat {
    let n = j.nrows();
    let mut s = j.clone();
    for i in 0..n {
        let norm = (0..n).map(|k| s[(i, k)].abs()).fold(0.0, f64::max);
        if norm > 0.0 {
            for k in 0..n {
                s[(i, k)] /= norm;
            }
        }
    }
    s
}

/// Classifies `x` for the game `(f, -f)`.
pub fn classify_point(
    game: &GameDefinition,
    x: &JointPoint,
    tols: &Tolerances,
) -> Result<CriticalPointReport, ClassifyError> {
    tols.validate()?;
    game.check_point(x)?;
    if !x.is_finite() {
        return Err(ClassifyError::NonFinite);
    }
    let dims = game.dims();
    let jet = game.jet2(x)?;
    let omega = gameform::omega_from_gradient(dims, jet.gradient.clone());
    let omega_inf_norm = omega.inf_norm();
    if !omega_inf_norm.is_finite() {
        return Err(ClassifyError::NonFinite);
    }
    let is_critical = omega_inf_norm < tols.tol_omega * (1.0 + x.inf_norm());

    let hessian = &jet.hessian;
    let jac = gameform::game_jacobian_from_hessian(dims, hessian);
    let block1 = jac.block11();
    let block2 = jac.block22();
    let v1 = sym_verdict(&block1, tols).map_err(ClassifyError::Spectra)?;
    let v2 = sym_verdict(&block2, tols).map_err(ClassifyError::Spectra)?;
    let lne_necessary = is_critical && v1.is_psd() && v2.is_psd();
    let pd1 = v1.min_eig > tols.tol_pd * (1.0 + block1.norm_inf());
    let pd2 = v2.min_eig > tols.tol_pd * (1.0 + block2.norm_inf());
    let is_dne = is_critical && pd1 && pd2;

    let det_domega = spectra::determinant(&jac.matrix);
    let det_h = spectra::determinant(hessian);
    let sign = if dims.m2().is_multiple_of(2) { 1.0 } else { -1.0 };
    // det(H) = (-1)^{m2} det(Domega): both determinants come from the
    // same Hessian with rows negated, so the identity is exact.
    assert!(
        (det_h - sign * det_domega).abs() <= 1e-8 * det_h.abs().max(1.0),
        "Hessian/Jacobian determinant identity violated: {det_h} vs {det_domega}"
    );

    let det_scaled = spectra::determinant(&row_norm_scaled(&jac.matrix));
    let spectrum = spectra::eigenvalues(&jac.matrix).map_err(ClassifyError::Spectra)?;
    let min_abs_re = spectrum.min_abs_re();
    // A differential Nash is hyperbolic by the structure of the game
    // Jacobian (its symmetric part is the definite block diagonal), and
    // hyperbolicity rules out zero eigenvalues; folding those
    // implications into the flags keeps the report invariants exact
    // even at borderline margins.
    let hyperbolic = min_abs_re > tols.tol_re * (1.0 + jac.matrix.norm_inf()) || is_dne;
    let nondegenerate = det_scaled.abs() > tols.tol_det || hyperbolic;

    if is_dne {
        assert!(
            spectrum.eigenvalues.iter().all(|l| l.re > 0.0),
            "differential Nash must have spectrum in the open right half-plane, got {:?}",
            spectrum.eigenvalues
        );
    }

    let label = if !is_critical {
        PointLabel::NotCritical
    } else if is_dne {
        PointLabel::DifferentialNash
    } else if lne_necessary {
        PointLabel::NashCandidateDegeneratePlayerBlocks
    } else {
        PointLabel::CriticalNonNash
    };

    Ok(CriticalPointReport {
        point: x.clone(),
        omega_inf_norm,
        is_critical,
        block1_verdict: v1,
        block2_verdict: v2,
        lne_necessary,
        is_dne,
        det_domega,
        nondegenerate,
        spectrum,
        min_abs_re,
        hyperbolic,
        label,
    })
}

fn sym_verdict(block: &Mat, tols: &Tolerances) -> Result<DefinitenessVerdict, SpectraError> {
    spectra::sym_definiteness(block, Some(tols.tol_psd * (1.0 + block.norm_inf())))
}

/// Options for damped Newton iteration on `omega`.
#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions {
    /// Converged when `|omega|_inf < tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Armijo sufficient-decrease constant on `1/2 |omega|^2`.
    pub armijo_c: f64,
    /// Smallest backtracking step before falling back to Levenberg.
    pub min_step: f64,
    /// Initial Levenberg damping used when the Jacobian is singular or
    /// the Newton direction fails to decrease the residual.
    pub lm_damping: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-11, max_iter: 100, armijo_c: 1e-4, min_step: 1e-12, lm_damping: 1e-6 }
    }
}

impl NewtonOptions {
    fn validate(&self) -> Result<(), ClassifyError> {
        if self.tol <= 0.0 || !self.tol.is_finite() || self.max_iter == 0 {
            return Err(ClassifyError::InvalidOptions(
                "newton options require tol > 0 and max_iter >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Result of a Newton run; `converged == false` means the iteration
/// budget ran out and `point` is the best iterate seen.
#[derive(Clone, Debug)]
pub struct NewtonOutcome {
    pub point: JointPoint,
    pub converged: bool,
    pub iters: usize,
    pub residual_inf: f64,
}

struct OmegaEval {
    w: Vec<f64>,
    norm_inf: f64,
    sq: f64,
}

fn eval_omega(game: &GameDefinition, flat: &[f64]) -> Result<OmegaEval, ClassifyError> {
    let x = JointPoint::from_flat(game.dims(), flat);
    if !x.is_finite() {
        return Err(ClassifyError::NonFinite);
    }
    let w = gameform::omega(game, &x)?.omega;
    if !linalg::all_finite(&w) {
        return Err(ClassifyError::NonFinite);
    }
    let norm_inf = linalg::inf_norm(&w);
    let sq = linalg::dot(&w, &w);
    Ok(OmegaEval { w, norm_inf, sq })
}

/// Finds a critical point by damped Newton iteration on `omega` with
/// Jacobian `D omega`: the step solves `D omega * d = -omega`, with
/// Armijo backtracking on `1/2 |omega|^2`; singular Jacobians or failed
/// line searches switch to Levenberg steps
/// `(J'J + lambda I) d = -J' omega` with adaptive `lambda`.
pub fn newton_find(
    game: &GameDefinition,
    seed: &JointPoint,
    opts: &NewtonOptions,
) -> Result<NewtonOutcome, ClassifyError> {
    opts.validate()?;
    game.check_point(seed)?;
    let dims = game.dims();
    let m = dims.total();
    let mut x = seed.to_flat();
    let mut cur = eval_omega(game, &x)?;
    let mut best = (x.clone(), cur.norm_inf);
    let mut lambda = opts.lm_damping;
    let mut iters = 0;

    while cur.norm_inf >= opts.tol {
        if iters >= opts.max_iter {
            return Ok(NewtonOutcome {
                point: JointPoint::from_flat(dims, &best.0),
                converged: false,
                iters,
                residual_inf: best.1,
            });
        }
        let jac = gameform::game_jacobian(game, &JointPoint::from_flat(dims, &x))?;
        let neg_w: Vec<f64> = cur.w.iter().map(|v| -v).collect();

        let mut accepted: Option<(Vec<f64>, OmegaEval)> = None;
        if let Ok(d) = spectra::lu_solve(&jac.matrix, &neg_w) {
            // Armijo backtracking along the Newton direction.
            let grad_phi = jac.matrix.transpose().matvec(&cur.w);
            let slope = linalg::dot(&grad_phi, &d);
            if slope < 0.0 && linalg::all_finite(&d) {
                let mut alpha = 1.0;
                while alpha >= opts.min_step {
                    let trial: Vec<f64> =
                        x.iter().zip(&d).map(|(xi, di)| xi + alpha * di).collect();
                    if let Ok(ev) = eval_omega(game, &trial) {
                        if 0.5 * ev.sq <= 0.5 * cur.sq + opts.armijo_c * alpha * slope {
                            accepted = Some((trial, ev));
                            break;
                        }
                    }
                    alpha *= 0.5;
                }
            }
        }

        if accepted.is_none() {
            // Levenberg fallback: works through singular Jacobians, as on
            // equilibrium continua where D omega drops rank.
            let jt = jac.matrix.transpose();
            let jtj = jt.matmul(&jac.matrix);
            let g = jt.matvec(&cur.w);
            let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
            for _ in 0..60 {
                let mut damped = jtj.clone();
                for i in 0..m {
                    damped[(i, i)] += lambda;
                }
                match spectra::lu_solve(&damped, &neg_g) {
                    Ok(d) if linalg::all_finite(&d) => {
                        let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + di).collect();
                        // residual decrease in the max norm; the squared
                        // norm can overflow for far-out seeds
                        match eval_omega(game, &trial) {
                            Ok(ev) if ev.norm_inf < cur.norm_inf => {
                                accepted = Some((trial, ev));
                                lambda = (lambda / 10.0).max(opts.lm_damping);
                                break;
                            }
                            _ => lambda *= 10.0,
                        }
                    }
                    _ => lambda *= 10.0,
                }
                if lambda > 1e30 {
                    break;
                }
            }
        }

        match accepted {
            Some((trial, ev)) => {
                x = trial;
                cur = ev;
                iters += 1;
                if cur.norm_inf < best.1 {
                    best = (x.clone(), cur.norm_inf);
                }
            }
            None => {
                // no productive step available; report the best point
                return Ok(NewtonOutcome {
                    point: JointPoint::from_flat(dims, &best.0),
                    converged: false,
                    iters,
                    residual_inf: best.1,
                });
            }
        }
    }
    Ok(NewtonOutcome {
        point: JointPoint::from_flat(dims, &x),
        converged: true,
        iters,
        residual_inf: cur.norm_inf,
    })
}

/// Multistart output: classified, deduplicated critical points plus the
/// seed bookkeeping.
#[derive(Clone, Debug, Serialize)]
pub struct MultistartOutcome {
    pub reports: Vec<CriticalPointReport>,
    pub n_seeds: usize,
    pub n_converged: usize,
    pub n_unconverged: usize,
    /// Seeds whose iteration converged outside the inflated search box.
    /// Softmax families make this a real phenomenon: gradients decay to
    /// zero as weights saturate, so an iteration that runs away can pass
    /// the residual test arbitrarily far from any true critical point.
    pub n_escaped: usize,
}

/// Radius (infinity norm) below which two converged points count as the
/// same critical point: far above the Newton tolerance, far below the
/// separation of distinct critical points at desk scale.
pub const DEDUP_RADIUS: f64 = 1e-6;

/// Runs Newton from `n_seeds` points drawn uniformly from
/// `[box_lo, box_hi]^m`, deduplicates the converged results, classifies
/// each survivor, and returns the reports sorted lexicographically by
/// coordinates. Converged points are accepted only inside the box
/// inflated by half its width on each side. Deterministic given
/// `rng_seed`, independent of the worker count.
pub fn multistart(
    game: &GameDefinition,
    box_lo: f64,
    box_hi: f64,
    n_seeds: usize,
    rng_seed: u64,
    opts: &NewtonOptions,
    tols: &Tolerances,
) -> Result<MultistartOutcome, ClassifyError> {
    if box_lo >= box_hi || !box_lo.is_finite() || !box_hi.is_finite() {
        return Err(ClassifyError::InvalidOptions("multistart requires box_lo < box_hi".into()));
    }
    if n_seeds == 0 {
        return Err(ClassifyError::InvalidOptions("multistart requires n_seeds >= 1".into()));
    }
    opts.validate()?;
    tols.validate()?;
    let dims = game.dims();
    let m = dims.total();
    let mut rng = Rng::new(rng_seed);
    let seeds: Vec<JointPoint> = (0..n_seeds)
        .map(|_| {
            let flat: Vec<f64> = (0..m).map(|_| rng.uniform(box_lo, box_hi)).collect();
            JointPoint::from_flat(dims, &flat)
        })
        .collect();

    // Newton runs are pure, so seeds fan out across workers; results
    // are reduced in seed order to keep the outcome schedule-free.
    let outcomes = parallel::map_indexed(n_seeds, |i| newton_find(game, &seeds[i], opts));

    let half_width = 0.5 * (box_hi - box_lo);
    let (acc_lo, acc_hi) = (box_lo - half_width, box_hi + half_width);
    let mut converged: Vec<Vec<f64>> = Vec::new();
    let mut n_unconverged = 0usize;
    let mut n_escaped = 0usize;
    for outcome in outcomes {
        match outcome {
            Ok(res) if res.converged => {
                let flat = res.point.to_flat();
                if flat.iter().all(|v| (acc_lo..=acc_hi).contains(v)) {
                    converged.push(flat);
                } else {
                    n_escaped += 1;
                }
            }
            Ok(_) => n_unconverged += 1,
            // a diverging seed is dropped, same as a non-converged one
            Err(ClassifyError::NonFinite) => n_unconverged += 1,
            Err(e) => return Err(e),
        }
    }
    let n_converged = converged.len();

    let mut reps: Vec<Vec<f64>> = Vec::new();
    for cand in converged {
        let dup = reps.iter().any(|r| {
            r.iter().zip(&cand).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) <= DEDUP_RADIUS
        });
        if !dup {
            reps.push(cand);
        }
    }

    let classified = parallel::map_indexed(reps.len(), |i| {
        classify_point(game, &JointPoint::from_flat(dims, &reps[i]), tols)
    });
    let mut reports = Vec::with_capacity(classified.len());
    for r in classified {
        reports.push(r?);
    }
    reports.sort_by(|a, b| {
        let fa = a.point.to_flat();
        let fb = b.point.to_flat();
        fa.iter().zip(&fb).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });

    Ok(MultistartOutcome { reports, n_seeds, n_converged, n_unconverged, n_escaped })
}

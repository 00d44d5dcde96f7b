//! Equilibrium continuation under cost perturbations and random-game
//! sampling statistics.
//!
//! Continuation tracks the solution branch of `omega(., t) = 0` for the
//! perturbed game `f + t g` by natural-parameter marching: the predictor
//! is the previous point, the corrector a damped Newton solve, with step
//! halving when the corrector misses. Losing the Nash property along the
//! branch is a recorded outcome, not an error: detecting it is the
//! experiment. Sampling draws random games, scans each with multistart,
//! and accumulates how often critical points are degenerate,
//! Nash-necessary, differential Nash, and hyperbolic.

use crate::classify::{
    classify_point, multistart, newton_find, ClassifyError, CriticalPointReport, NewtonOptions,
    PointLabel, Tolerances,
};
use crate::games::{BlockDims, GameDefinition, GameError, JointPoint, PolyTerm};
use crate::linalg::Mat;
use crate::parallel;
use crate::rng::Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PerturbError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

/// One accepted continuation point.
#[derive(Clone, Debug, Serialize)]
pub struct ContinuationEntry {
    pub t: f64,
    pub point: JointPoint,
    pub report: CriticalPointReport,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ContinuationStatus {
    Complete,
    CorrectorFailed { at_t: f64 },
    LostNash { at_t: f64 },
}

/// The tracked branch `sigma(t)` with its outcome.
#[derive(Clone, Debug, Serialize)]
pub struct ContinuationPath {
    pub entries: Vec<ContinuationEntry>,
    pub status: ContinuationStatus,
}

/// Nash strength of a report: differential Nash beats candidate beats
/// none. The branch "loses Nash" at the first t where this drops below
/// its value at t = 0.
fn nash_level(report: &CriticalPointReport) -> u8 {
    if report.is_dne {
        2
    } else if report.lne_necessary {
        1
    } else {
        0
    }
}

fn composite_at(
    base: &GameDefinition,
    pert: &GameDefinition,
    t: f64,
) -> Result<GameDefinition, GameError> {
    GameDefinition::composite(base.clone(), pert.clone(), t)
}

/// Corrector march from `(t_from, point)` to `t_to`, bisecting the
/// interval on failure up to `depth` times.
fn correct_to(
    base: &GameDefinition,
    pert: &GameDefinition,
    point: &JointPoint,
    t_from: f64,
    t_to: f64,
    opts: &NewtonOptions,
    depth: usize,
) -> Result<Option<JointPoint>, PerturbError> {
    let game = composite_at(base, pert, t_to)?;
    match newton_find(&game, point, opts) {
        Ok(out) if out.converged => return Ok(Some(out.point)),
        Ok(_) | Err(ClassifyError::NonFinite) => {}
        Err(e) => return Err(e.into()),
    }
    if depth == 0 {
        return Ok(None);
    }
    let mid = 0.5 * (t_from + t_to);
    match correct_to(base, pert, point, t_from, mid, opts, depth - 1)? {
        Some(p_mid) => correct_to(base, pert, &p_mid, mid, t_to, opts, depth - 1),
        None => Ok(None),
    }
}

/// Maximum number of corrector step halvings per grid interval.
const MAX_HALVINGS: usize = 6;

/// Tracks the critical point of `f + t g` from `t = 0` to `t_max` over
/// a uniform grid of `n_steps` intervals. `x0` must polish to a
/// critical point of the base game.
pub fn continuation(
    base: &GameDefinition,
    pert: &GameDefinition,
    x0: &JointPoint,
    t_max: f64,
    n_steps: usize,
    opts: &NewtonOptions,
    tols: &Tolerances,
) -> Result<ContinuationPath, PerturbError> {
    if n_steps == 0 {
        return Err(PerturbError::InvalidParams("n_steps must be >= 1".into()));
    }
    if t_max <= 0.0 || !t_max.is_finite() {
        return Err(PerturbError::InvalidParams("t_max must be finite and > 0".into()));
    }
    // dims compatibility surfaces here before any numeric work
    composite_at(base, pert, 0.0)?;

    let polish = newton_find(base, x0, opts)?;
    if !polish.converged {
        return Err(PerturbError::Precondition(format!(
            "x0 does not polish to a critical point of the base game \
             (|omega|_inf = {:.3e} after Newton)",
            polish.residual_inf
        )));
    }

    let mut entries = Vec::with_capacity(n_steps + 1);
    let first_report = classify_point(&composite_at(base, pert, 0.0)?, &polish.point, tols)?;
    let level0 = nash_level(&first_report);
    entries.push(ContinuationEntry { t: 0.0, point: polish.point.clone(), report: first_report });

    let mut lost_at: Option<f64> = None;
    let mut current = polish.point;
    let mut t_prev = 0.0;
    for k in 1..=n_steps {
        let t_k = t_max * (k as f64) / (n_steps as f64);
        match correct_to(base, pert, &current, t_prev, t_k, opts, MAX_HALVINGS)? {
            Some(next) => {
                let report = classify_point(&composite_at(base, pert, t_k)?, &next, tols)?;
                if lost_at.is_none() && nash_level(&report) < level0 {
                    lost_at = Some(t_k);
                }
                entries.push(ContinuationEntry { t: t_k, point: next.clone(), report });
                current = next;
                t_prev = t_k;
            }
            None => {
                return Ok(ContinuationPath {
                    entries,
                    status: ContinuationStatus::CorrectorFailed { at_t: t_k },
                });
            }
        }
    }
    let status = match lost_at {
        Some(at_t) => ContinuationStatus::LostNash { at_t },
        None => ContinuationStatus::Complete,
    };
    Ok(ContinuationPath { entries, status })
}

/// Verifies that a differential Nash of `base` persists under `f + t g`
/// up to `t_max`: the branch must complete, stay differential Nash at
/// every step, and move Lipschitz-regularly (each step bounded by ten
/// times the first step's rate).
pub fn structural_stability_check(
    base: &GameDefinition,
    pert: &GameDefinition,
    x0: &JointPoint,
    t_max: f64,
    n_steps: usize,
    opts: &NewtonOptions,
    tols: &Tolerances,
) -> Result<(bool, ContinuationPath), PerturbError> {
    let polish = newton_find(base, x0, opts)?;
    if !polish.converged {
        return Err(PerturbError::Precondition(
            "x0 does not polish to a critical point of the base game".into(),
        ));
    }
    let base_report = classify_point(base, &polish.point, tols)?;
    if !base_report.is_dne {
        return Err(PerturbError::Precondition(format!(
            "x0 is not a differential Nash equilibrium of the base game (label {:?})",
            base_report.label
        )));
    }

    let path = continuation(base, pert, &polish.point, t_max, n_steps, opts, tols)?;
    let complete = path.status == ContinuationStatus::Complete;
    let all_dne = path.entries.iter().all(|e| e.report.label == PointLabel::DifferentialNash);

    // Lipschitz regularity: rate estimated from the first step, 10x slack.
    let mut regular = true;
    if path.entries.len() >= 2 {
        let step_norm = |a: &ContinuationEntry, b: &ContinuationEntry| {
            a.point
                .to_flat()
                .iter()
                .zip(b.point.to_flat())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        };
        let first = step_norm(&path.entries[0], &path.entries[1]);
        let allowed = 10.0 * first;
        for pair in path.entries.windows(2).skip(1) {
            if step_norm(&pair[0], &pair[1]) > allowed {
                regular = false;
                break;
            }
        }
    }

    Ok((complete && all_dne && regular, path))
}

/// Family of random games to sample.
#[derive(Clone, Debug)]
pub enum FamilySpec {
    /// Quadratic saddles with symmetric positive definite `Q`, `R`
    /// (built as `B'B + 0.1 I`, bounded away from singular) and a dense
    /// normal coupling `S`.
    RandomQuadraticPd { dims: BlockDims },
    /// Dense polynomials holding every monomial of total degree 1..=degree
    /// with normal coefficients at the given scale.
    RandomPolynomial { dims: BlockDims, degree: u32, coeff_scale: f64 },
}

/// Multistart settings used for each sampled game.
#[derive(Clone, Copy, Debug)]
pub struct MultistartSpec {
    pub box_lo: f64,
    pub box_hi: f64,
    pub n_seeds: usize,
    pub newton: NewtonOptions,
}

impl Default for MultistartSpec {
    fn default() -> Self {
        Self { box_lo: -2.0, box_hi: 2.0, n_seeds: 16, newton: NewtonOptions::default() }
    }
}

/// A stored counterexample: a sampled game together with the degenerate
/// critical point found in it.
#[derive(Clone, Debug, Serialize)]
pub struct DegenerateExample {
    pub game: GameDefinition,
    pub point: JointPoint,
}

/// Aggregated evidence over sampled games.
#[derive(Clone, Debug, Serialize)]
pub struct GenericityStats {
    pub n_games: usize,
    pub n_critical_points: usize,
    pub n_degenerate: usize,
    pub n_lne_necessary: usize,
    pub n_dne: usize,
    pub n_hyperbolic: usize,
    pub degenerate_examples: Vec<DegenerateExample>,
}

/// Cap on stored degenerate exemplars: enough to falsify, bounded in size.
const MAX_DEGENERATE_EXAMPLES: usize = 10;

fn random_spd(rng: &mut Rng, n: usize) -> Mat {
    let mut b = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = rng.normal();
        }
    }
    let mut spd = b.transpose().matmul(&b);
    for i in 0..n {
        spd[(i, i)] += 0.1;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (spd[(i, j)] + spd[(j, i)]);
            spd[(i, j)] = v;
            spd[(j, i)] = v;
        }
    }
    spd
}

fn random_normal_mat(rng: &mut Rng, nr: usize, nc: usize) -> Mat {
    let mut m = Mat::zeros(nr, nc);
    for i in 0..nr {
        for j in 0..nc {
            m[(i, j)] = rng.normal();
        }
    }
    m
}

/// Every exponent pair `(e1, e2)` with `1 <= |e1| + |e2| <= degree`.
fn monomials(dims: BlockDims, degree: u32) -> Vec<(Vec<u32>, Vec<u32>)> {
    fn exponents(len: usize, budget: u32) -> Vec<Vec<u32>> {
        if len == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for first in 0..=budget {
            for mut rest in exponents(len - 1, budget - first) {
                let mut e = vec![first];
                e.append(&mut rest);
                out.push(e);
            }
        }
        out
    }
    let mut out = Vec::new();
    for e1 in exponents(dims.m1(), degree) {
        let used: u32 = e1.iter().sum();
        for e2 in exponents(dims.m2(), degree - used) {
            let total = used + e2.iter().sum::<u32>();
            if total >= 1 {
                out.push((e1.clone(), e2));
            }
        }
    }
    out
}

/// Draws one game from the family using the given stream.
pub fn sample_game(spec: &FamilySpec, rng: &mut Rng) -> Result<GameDefinition, PerturbError> {
    match spec {
        FamilySpec::RandomQuadraticPd { dims } => {
            let q = random_spd(rng, dims.m1());
            let r = random_spd(rng, dims.m2());
            let s = random_normal_mat(rng, dims.m1(), dims.m2());
            Ok(GameDefinition::quadratic_saddle(q, s, r)?)
        }
        FamilySpec::RandomPolynomial { dims, degree, coeff_scale } => {
            if *degree == 0 || *degree > 3 {
                return Err(PerturbError::InvalidParams(
                    "random_polynomial degree must be in 1..=3".into(),
                ));
            }
            if *coeff_scale <= 0.0 || !coeff_scale.is_finite() {
                return Err(PerturbError::InvalidParams("coeff_scale must be > 0".into()));
            }
            let terms = monomials(*dims, *degree)
                .into_iter()
                .map(|(e1, e2)| PolyTerm::new(coeff_scale * rng.normal(), e1, e2))
                .collect();
            Ok(GameDefinition::polynomial(*dims, terms)?)
        }
    }
}

/// Samples `n_games` games, scans each with multistart, classifies every
/// found critical point, and accumulates counts. Deterministic given
/// `rng_seed`: the streams for game `i` depend only on `(rng_seed, i)`,
/// so results are identical for any worker count.
pub fn genericity_sample(
    spec: &FamilySpec,
    n_games: usize,
    rng_seed: u64,
    ms: &MultistartSpec,
    tols: &Tolerances,
) -> Result<GenericityStats, PerturbError> {
    if n_games == 0 {
        return Err(PerturbError::InvalidParams("n_games must be >= 1".into()));
    }
    // fail fast on a bad family spec rather than inside workers
    sample_game(spec, &mut Rng::derive(rng_seed, u64::MAX))?;

    let tols = *tols;
    let per_game = parallel::map_indexed(n_games, |i| {
        let mut game_rng = Rng::derive(rng_seed, 2 * i as u64);
        let ms_seed = Rng::derive(rng_seed, 2 * i as u64 + 1).next_u64();
        let game = sample_game(spec, &mut game_rng)?;
        let scan =
            multistart(&game, ms.box_lo, ms.box_hi, ms.n_seeds, ms_seed, &ms.newton, &tols)?;
        Ok::<_, PerturbError>((game, scan.reports))
    });

    let mut stats = GenericityStats {
        n_games,
        n_critical_points: 0,
        n_degenerate: 0,
        n_lne_necessary: 0,
        n_dne: 0,
        n_hyperbolic: 0,
        degenerate_examples: Vec::new(),
    };
    for item in per_game {
        let (game, reports) = item?;
        for report in reports {
            if !report.is_critical {
                continue;
            }
            stats.n_critical_points += 1;
            if !report.nondegenerate {
                stats.n_degenerate += 1;
                if stats.degenerate_examples.len() < MAX_DEGENERATE_EXAMPLES {
                    stats
                        .degenerate_examples
                        .push(DegenerateExample { game: game.clone(), point: report.point.clone() });
                }
            }
            if report.lne_necessary {
                stats.n_lne_necessary += 1;
            }
            if report.is_dne {
                stats.n_dne += 1;
            }
            if report.hyperbolic {
                stats.n_hyperbolic += 1;
            }
        }
    }
    assert!(
        stats.n_dne <= stats.n_lne_necessary
            && stats.n_lne_necessary <= stats.n_critical_points
            && stats.n_hyperbolic >= stats.n_dne,
        "count invariants violated: {stats:?}"
    );
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> Mat {
        Mat::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn quadratic_1x1() -> GameDefinition {
        GameDefinition::quadratic_saddle(mat(&[&[1.0]]), mat(&[&[1.0]]), mat(&[&[1.0]])).unwrap()
    }

    fn half_x_squared() -> GameDefinition {
        GameDefinition::polynomial(
            BlockDims::new(1, 1).unwrap(),
            vec![PolyTerm::new(0.5, vec![2], vec![0])],
        )
        .unwrap()
    }

    fn minus_half_x_squared() -> GameDefinition {
        GameDefinition::polynomial(
            BlockDims::new(1, 1).unwrap(),
            vec![PolyTerm::new(-0.5, vec![2], vec![0])],
        )
        .unwrap()
    }

    fn origin() -> JointPoint {
        JointPoint::new(vec![0.0], vec![0.0])
    }

    #[test]
    fn continuation_first_entry_is_base() {
        let path = continuation(
            &quadratic_1x1(),
            &half_x_squared(),
            &origin(),
            0.1,
            5,
            &NewtonOptions::default(),
            &Tolerances::default(),
        )
        .unwrap();
        assert_eq!(path.entries[0].t, 0.0);
        assert_eq!(path.entries[0].point, origin());
        assert!(path.entries[0].report.is_dne);
        assert_eq!(path.entries.len(), 6);
    }

    #[test]
    fn continuation_constant_dne_path() {
        // perturbation gradient vanishes at the origin and only adds +t
        // to player 1's curvature, so the branch is constant and stays
        // differential Nash
        let path = continuation(
            &quadratic_1x1(),
            &half_x_squared(),
            &origin(),
            0.1,
            20,
            &NewtonOptions::default(),
            &Tolerances::default(),
        )
        .unwrap();
        assert_eq!(path.status, ContinuationStatus::Complete);
        let first = &path.entries[0].report;
        for e in &path.entries {
            assert_eq!(e.point, origin());
            assert!(e.report.is_dne, "t = {}", e.t);
            // flags stay constant along a completed Nash branch
            assert_eq!(e.report.is_critical, first.is_critical);
            assert_eq!(e.report.lne_necessary, first.lne_necessary);
            assert_eq!(e.report.nondegenerate, first.nondegenerate);
            assert_eq!(e.report.hyperbolic, first.hyperbolic);
            assert_eq!(e.report.label, first.label);
        }
    }

    #[test]
    fn continuation_bilinear_loses_nash_immediately() {
        let base = GameDefinition::bilinear(mat(&[&[1.0]])).unwrap();
        let path = continuation(
            &base,
            &minus_half_x_squared(),
            &origin(),
            0.1,
            20,
            &NewtonOptions::default(),
            &Tolerances::default(),
        )
        .unwrap();
        let first_t = 0.1 / 20.0;
        assert_eq!(path.status, ContinuationStatus::LostNash { at_t: first_t });
        assert_eq!(path.entries.len(), 21, "path keeps tracking after the loss");
        for e in &path.entries {
            assert_eq!(e.point, origin());
            if e.t > 0.0 {
                assert!(!e.report.lne_necessary, "t = {}", e.t);
            }
        }
    }

    #[test]
    fn continuation_rejects_noncritical_x0() {
        let err = continuation(
            &quadratic_1x1(),
            &half_x_squared(),
            &JointPoint::new(vec![f64::NAN], vec![0.0]),
            0.1,
            5,
            &NewtonOptions::default(),
            &Tolerances::default(),
        )
        .unwrap_err();
        assert!(matches!(err, PerturbError::Classify(ClassifyError::NonFinite)));
    }

    #[test]
    fn stability_check_quadratic_plus_convex() {
        let (ok, path) = structural_stability_check(
            &quadratic_1x1(),
            &half_x_squared(),
            &origin(),
            0.1,
            20,
            &NewtonOptions::default(),
            &Tolerances::default(),
        )
        .unwrap();
        assert!(ok);
        assert_eq!(path.status, ContinuationStatus::Complete);
    }

    #[test]
    fn stability_check_rejects_bilinear_origin() {
        let base = GameDefinition::bilinear(mat(&[&[1.0]])).unwrap();
        let err = structural_stability_check(
            &base,
            &minus_half_x_squared(),
            &origin(),
            0.1,
            20,
            &NewtonOptions::default(),
            &Tolerances::default(),
        )
        .unwrap_err();
        assert!(matches!(err, PerturbError::Precondition(_)), "{err:?}");
    }

    #[test]
    fn stability_check_random_cubic_perturbations() {
        let mut rng = Rng::new(510);
        let quadratic_monomials = monomials(BlockDims::new(1, 1).unwrap(), 3);
        for trial in 0..5 {
            // degree-3 perturbation with zero linear part
            let terms: Vec<PolyTerm> = quadratic_monomials
                .iter()
                .filter(|(e1, e2)| e1.iter().sum::<u32>() + e2.iter().sum::<u32>() >= 2)
                .map(|(e1, e2)| PolyTerm::new(rng.normal(), e1.clone(), e2.clone()))
                .collect();
            let pert =
                GameDefinition::polynomial(BlockDims::new(1, 1).unwrap(), terms).unwrap();
            let (ok, path) = structural_stability_check(
                &quadratic_1x1(),
                &pert,
                &origin(),
                0.05,
                20,
                &NewtonOptions::default(),
                &Tolerances::default(),
            )
            .unwrap();
            assert!(ok, "trial {trial} failed with status {:?}", path.status);
            for e in &path.entries {
                assert!(e.report.omega_inf_norm < 1e-10);
            }
        }
    }

    #[test]
    fn genericity_quadratic_pd_all_dne() {
        let spec = FamilySpec::RandomQuadraticPd { dims: BlockDims::new(1, 1).unwrap() };
        let stats = genericity_sample(
            &spec,
            50,
            42,
            &MultistartSpec::default(),
            &Tolerances::default(),
        )
        .unwrap();
        assert_eq!(stats.n_games, 50);
        assert_eq!(stats.n_critical_points, 50, "one saddle per game");
        assert_eq!(stats.n_dne, stats.n_critical_points);
        assert_eq!(stats.n_hyperbolic, stats.n_critical_points);
        assert_eq!(stats.n_degenerate, 0);
    }

    #[test]
    fn genericity_deterministic() {
        let spec = FamilySpec::RandomPolynomial {
            dims: BlockDims::new(1, 1).unwrap(),
            degree: 3,
            coeff_scale: 1.0,
        };
        let run = || {
            genericity_sample(&spec, 20, 7, &MultistartSpec::default(), &Tolerances::default())
                .unwrap()
        };
        let a = serde_json::to_string(&run()).unwrap();
        let b = serde_json::to_string(&run()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn monomials_cover_degree_three() {
        let dims = BlockDims::new(1, 1).unwrap();
        let ms = monomials(dims, 3);
        // x, y, x2, xy, y2, x3, x2y, xy2, y3
        assert_eq!(ms.len(), 9);
        assert!(ms.iter().all(|(e1, e2)| {
            let d = e1.iter().sum::<u32>() + e2.iter().sum::<u32>();
            (1..=3).contains(&d)
        }));
    }
}

//! Gradient-play dynamics and trajectory observables.
//!
//! Two integrators, matching the two dynamics the analysis speaks about:
//! the explicit per-step map `x+ = x - Gamma omega(x)` with per-player
//! rates `Gamma = blockdiag(gamma1 I, gamma2 I)`, and classical RK4 for
//! the continuous flow `xdot = -omega(x)`. Divergence is not an error:
//! trajectories are truncated only when a coordinate stops being finite,
//! because running away from a destabilized equilibrium is exactly the
//! phenomenon under study.

use crate::gameform;
use crate::games::{rps_policy, GameDefinition, GameError, GameFamily, JointPoint};
use crate::linalg;
use serde::Serialize;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unknown observable `{0}` (expected identity, policy1, or policy2)")]
    UnknownObservable(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Per-player learning rates.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct StepSizes {
    pub gamma1: f64,
    pub gamma2: f64,
}

impl StepSizes {
    pub fn new(gamma1: f64, gamma2: f64) -> Result<Self, DynamicsError> {
        if gamma1 <= 0.0 || !gamma1.is_finite() || gamma2 <= 0.0 || !gamma2.is_finite() {
            return Err(DynamicsError::InvalidParams(
                "step sizes must be finite and strictly positive".into(),
            ));
        }
        Ok(Self { gamma1, gamma2 })
    }

    /// Equal rate for both players.
    pub fn uniform(gamma: f64) -> Result<Self, DynamicsError> {
        Self::new(gamma, gamma)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TrajectoryMode {
    Discrete,
    Rk4,
}

/// A recorded gradient-play path. `points` always contains the initial
/// state and the final computed state; in between, every
/// `recorded_every`-th iterate is kept.
#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub points: Vec<JointPoint>,
    /// Iteration indices of the recorded points.
    pub steps: Vec<usize>,
    /// Time increment per iteration: the RK4 `dt`, or 1 for the
    /// discrete map (time is the iteration count).
    pub dt_or_step: f64,
    pub mode: TrajectoryMode,
    pub recorded_every: usize,
    /// Set when integration stopped early on a non-finite state; holds
    /// the first bad iteration index.
    pub nonfinite_at: Option<usize>,
}

impl Trajectory {
    pub fn final_point(&self) -> &JointPoint {
        self.points.last().expect("trajectory never empty")
    }

    pub fn time_of(&self, idx: usize) -> f64 {
        self.steps[idx] as f64 * self.dt_or_step
    }
}

struct Recorder {
    points: Vec<JointPoint>,
    steps: Vec<usize>,
    every: usize,
}

impl Recorder {
    fn new(x0: JointPoint, every: usize) -> Self {
        Self { points: vec![x0], steps: vec![0], every }
    }

    fn record(&mut self, step: usize, x: &JointPoint) {
        if step.is_multiple_of(self.every) {
            self.points.push(x.clone());
            self.steps.push(step);
        }
    }

    fn finish(mut self, step: usize, x: &JointPoint) -> (Vec<JointPoint>, Vec<usize>) {
        if *self.steps.last().expect("non-empty") != step {
            self.points.push(x.clone());
            self.steps.push(step);
        }
        (self.points, self.steps)
    }
}

/// Iterates `x+ = x - Gamma omega(x)` for `n_iters` steps.
pub fn gradient_play_discrete(
    game: &GameDefinition,
    x0: &JointPoint,
    steps: StepSizes,
    n_iters: usize,
    record_every: usize,
) -> Result<Trajectory, DynamicsError> {
    if n_iters == 0 {
        return Err(DynamicsError::InvalidParams("n_iters must be >= 1".into()));
    }
    if record_every == 0 {
        return Err(DynamicsError::InvalidParams("record_every must be >= 1".into()));
    }
    game.check_point(x0)?;
    let m1 = game.dims().m1();
    let mut rec = Recorder::new(x0.clone(), record_every);
    let mut x = x0.clone();
    let mut nonfinite_at = None;
    let mut last = 0;
    for k in 1..=n_iters {
        let w = gameform::omega(game, &x)?.omega;
        for (i, xi) in x.x1.iter_mut().enumerate() {
            *xi -= steps.gamma1 * w[i];
        }
        for (i, xi) in x.x2.iter_mut().enumerate() {
            *xi -= steps.gamma2 * w[m1 + i];
        }
        if !x.is_finite() {
            nonfinite_at = Some(k);
            break;
        }
        rec.record(k, &x);
        last = k;
    }
    let (points, steps_idx) = rec.finish(last, &x);
    Ok(Trajectory {
        points,
        steps: steps_idx,
        dt_or_step: 1.0,
        mode: TrajectoryMode::Discrete,
        recorded_every: record_every,
        nonfinite_at,
    })
}

/// Classical 4th-order Runge-Kutta on `xdot = -omega(x)` from 0 to
/// `t_final` in steps of `dt`; local error O(dt^5).
pub fn flow_rk4(
    game: &GameDefinition,
    x0: &JointPoint,
    dt: f64,
    t_final: f64,
    record_every: usize,
) -> Result<Trajectory, DynamicsError> {
    if dt <= 0.0 || !dt.is_finite() || t_final < dt || t_final.is_nan() {
        return Err(DynamicsError::InvalidParams("require dt > 0 and t_final >= dt".into()));
    }
    if record_every == 0 {
        return Err(DynamicsError::InvalidParams("record_every must be >= 1".into()));
    }
    game.check_point(x0)?;
    let dims = game.dims();
    let n_steps = ((t_final / dt).round() as usize).max(1);

    let deriv = |flat: &[f64]| -> Result<Vec<f64>, DynamicsError> {
        let w = gameform::omega(game, &JointPoint::from_flat(dims, flat))?.omega;
        Ok(w.into_iter().map(|v| -v).collect())
    };

    let mut rec = Recorder::new(x0.clone(), record_every);
    let mut x = x0.to_flat();
    let mut nonfinite_at = None;
    let mut last = 0;
    for k in 1..=n_steps {
        let k1 = deriv(&x)?;
        let mid1: Vec<f64> = x.iter().zip(&k1).map(|(xi, di)| xi + 0.5 * dt * di).collect();
        let k2 = deriv(&mid1)?;
        let mid2: Vec<f64> = x.iter().zip(&k2).map(|(xi, di)| xi + 0.5 * dt * di).collect();
        let k3 = deriv(&mid2)?;
        let end: Vec<f64> = x.iter().zip(&k3).map(|(xi, di)| xi + dt * di).collect();
        let k4 = deriv(&end)?;
        for i in 0..x.len() {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if !linalg::all_finite(&x) {
            nonfinite_at = Some(k);
            break;
        }
        rec.record(k, &JointPoint::from_flat(dims, &x));
        last = k;
    }
    let (points, steps_idx) = rec.finish(last, &JointPoint::from_flat(dims, &x));
    Ok(Trajectory {
        points,
        steps: steps_idx,
        dt_or_step: dt,
        mode: TrajectoryMode::Rk4,
        recorded_every: record_every,
        nonfinite_at,
    })
}

/// The closed set of trajectory observables. Policies apply the softmax
/// with the given inverse temperature to one player's weight block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Observable {
    /// Flat joint coordinates.
    Identity,
    /// Player 1's softmax policy.
    Policy1 { beta: f64 },
    /// Player 2's softmax policy.
    Policy2 { beta: f64 },
}

impl Observable {
    /// Resolves an observable name against a game; policy observables
    /// take their inverse temperature from the softmax family.
    pub fn by_name(name: &str, game: &GameDefinition) -> Result<Self, DynamicsError> {
        match name {
            "identity" => Ok(Self::Identity),
            "policy1" | "policy2" => {
                let GameFamily::RpsSoftmax { beta1, beta2, .. } = game.family() else {
                    return Err(DynamicsError::InvalidParams(format!(
                        "observable `{name}` requires a softmax (rps) game"
                    )));
                };
                if name == "policy1" {
                    Ok(Self::Policy1 { beta: *beta1 })
                } else {
                    Ok(Self::Policy2 { beta: *beta2 })
                }
            }
            other => Err(DynamicsError::UnknownObservable(other.to_string())),
        }
    }

    pub fn apply(&self, x: &JointPoint) -> Vec<f64> {
        match self {
            Self::Identity => x.to_flat(),
            Self::Policy1 { beta } => rps_policy(&x.x1, *beta).to_vec(),
            Self::Policy2 { beta } => rps_policy(&x.x2, *beta).to_vec(),
        }
    }

    /// Column labels for the trajectory CSV.
    pub fn column_names(&self, m: usize) -> Vec<String> {
        match self {
            Self::Identity => (0..m).map(|j| format!("x{j}")).collect(),
            Self::Policy1 { .. } => (0..3).map(|j| format!("pi1_{j}")).collect(),
            Self::Policy2 { .. } => (0..3).map(|j| format!("pi2_{j}")).collect(),
        }
    }
}

/// Arithmetic mean of the observable over the recorded points.
pub fn time_average_observable(traj: &Trajectory, observable: &Observable) -> Vec<f64> {
    let n = traj.points.len();
    assert!(n > 0, "trajectory never empty");
    let mut acc = observable.apply(&traj.points[0]);
    for p in &traj.points[1..] {
        for (a, v) in acc.iter_mut().zip(observable.apply(p)) {
            *a += v;
        }
    }
    for a in &mut acc {
        *a /= n as f64;
    }
    acc
}

/// Writes the trajectory as CSV: header `step,t,x<j>...` plus optional
/// policy columns when an RPS policy observable is requested; one row
/// per recorded state, floats at 17 significant digits.
pub fn write_trajectory_csv<W: Write>(
    traj: &Trajectory,
    observable: Option<&Observable>,
    mut out: W,
) -> Result<(), DynamicsError> {
    let m = traj.points[0].x1.len() + traj.points[0].x2.len();
    let mut header: Vec<String> = vec!["step".into(), "t".into()];
    header.extend((0..m).map(|j| format!("x{j}")));
    if let Some(obs) = observable {
        if !matches!(obs, Observable::Identity) {
            header.extend(obs.column_names(m));
        }
    }
    writeln!(out, "{}", header.join(","))?;
    for (idx, point) in traj.points.iter().enumerate() {
        let mut row: Vec<String> = Vec::with_capacity(header.len());
        row.push(traj.steps[idx].to_string());
        row.push(fmt17(traj.time_of(idx)));
        for v in point.to_flat() {
            row.push(fmt17(v));
        }
        if let Some(obs) = observable {
            if !matches!(obs, Observable::Identity) {
                for v in obs.apply(point) {
                    row.push(fmt17(v));
                }
            }
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// 17 significant digits: enough to reproduce the f64 bit pattern.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;

    fn mat(rows: &[&[f64]]) -> Mat {
        Mat::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn bilinear_1x1() -> GameDefinition {
        GameDefinition::bilinear(mat(&[&[1.0]])).unwrap()
    }

    fn quadratic_1x1() -> GameDefinition {
        GameDefinition::quadratic_saddle(mat(&[&[1.0]]), mat(&[&[1.0]]), mat(&[&[1.0]])).unwrap()
    }

    fn sq_norm(p: &JointPoint) -> f64 {
        p.to_flat().iter().map(|v| v * v).sum()
    }

    #[test]
    fn discrete_single_step_bilinear() {
        let game = bilinear_1x1();
        let x0 = JointPoint::new(vec![1.0], vec![0.0]);
        let traj = gradient_play_discrete(&game, &x0, StepSizes::uniform(0.1).unwrap(), 1, 1)
            .unwrap();
        let end = traj.final_point();
        assert_eq!(end.x1, vec![1.0]);
        assert_eq!(end.x2, vec![0.1]);
        assert!((sq_norm(end) - 1.01).abs() <= 1e-15);
    }

    #[test]
    fn discrete_growth_law_scaled_identity() {
        // |z_k|^2 = (1 + gamma^2 a^2)^k |z_0|^2 for A = a I
        for (a, n) in [(1.0, 1usize), (2.0, 2), (0.5, 3)] {
            let mut id = Mat::zeros(n, n);
            for i in 0..n {
                id[(i, i)] = a;
            }
            let game = GameDefinition::bilinear(id).unwrap();
            let mut x1 = vec![0.0; n];
            x1[0] = 0.6;
            let mut x2 = vec![0.0; n];
            x2[n - 1] = 0.8;
            let x0 = JointPoint::new(x1, x2);
            let z0_sq = sq_norm(&x0);
            let gamma = 0.1;
            let traj =
                gradient_play_discrete(&game, &x0, StepSizes::uniform(gamma).unwrap(), 100, 1)
                    .unwrap();
            for (idx, p) in traj.points.iter().enumerate() {
                let k = traj.steps[idx] as i32;
                let expect = (1.0 + gamma * gamma * a * a).powi(k) * z0_sq;
                let got = sq_norm(p);
                assert!(
                    (got - expect).abs() <= 1e-10 * expect,
                    "a = {a}, step {k}: {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn discrete_contracts_to_saddle() {
        let game = quadratic_1x1();
        let x0 = JointPoint::new(vec![1.0], vec![1.0]);
        let traj = gradient_play_discrete(&game, &x0, StepSizes::uniform(0.1).unwrap(), 2000, 100)
            .unwrap();
        assert!(traj.final_point().inf_norm() < 1e-8);
    }

    #[test]
    fn critical_point_is_fixed() {
        let game = quadratic_1x1();
        let x0 = JointPoint::new(vec![0.0], vec![0.0]);
        let traj = gradient_play_discrete(&game, &x0, StepSizes::uniform(0.2).unwrap(), 50, 10)
            .unwrap();
        for p in &traj.points {
            assert_eq!(*p, x0);
        }
        let traj = flow_rk4(&game, &x0, 0.01, 1.0, 10).unwrap();
        for p in &traj.points {
            assert_eq!(*p, x0);
        }
    }

    #[test]
    fn rk4_conserves_bilinear_norm() {
        let game = bilinear_1x1();
        let x0 = JointPoint::new(vec![1.0], vec![0.0]);
        let traj = flow_rk4(&game, &x0, 1e-3, 10.0, 1000).unwrap();
        let drift = (sq_norm(traj.final_point()).sqrt() - 1.0).abs();
        assert!(drift < 1e-8, "norm drift {drift}");
    }

    #[test]
    fn rk4_contracts_to_saddle() {
        let game = quadratic_1x1();
        let x0 = JointPoint::new(vec![1.0], vec![1.0]);
        let traj = flow_rk4(&game, &x0, 1e-2, 20.0, 100).unwrap();
        assert!(traj.final_point().inf_norm() < 1e-6);
    }

    #[test]
    fn rk4_contraction_monotone_near_dne() {
        let game = quadratic_1x1();
        let x0 = JointPoint::new(vec![0.4], vec![-0.3]);
        let traj = flow_rk4(&game, &x0, 1e-2, 10.0, 10).unwrap();
        let mut prev = f64::INFINITY;
        for (idx, p) in traj.points.iter().enumerate() {
            if traj.time_of(idx) >= 1.0 {
                let d = p.inf_norm();
                assert!(d <= prev + 1e-15, "distance grew: {d} after {prev}");
                prev = d;
            }
        }
    }

    #[test]
    fn records_first_and_last() {
        let game = quadratic_1x1();
        let x0 = JointPoint::new(vec![1.0], vec![1.0]);
        // 7 is not divisible by 3, so the final state is appended
        let traj = gradient_play_discrete(&game, &x0, StepSizes::uniform(0.1).unwrap(), 7, 3)
            .unwrap();
        assert_eq!(traj.steps, vec![0, 3, 6, 7]);
        assert_eq!(traj.points.len(), 4);
    }

    #[test]
    fn time_average_constant_trajectory() {
        let game = quadratic_1x1();
        let x0 = JointPoint::new(vec![0.0], vec![0.0]);
        let traj = gradient_play_discrete(&game, &x0, StepSizes::uniform(0.1).unwrap(), 10, 1)
            .unwrap();
        let avg = time_average_observable(&traj, &Observable::Identity);
        assert_eq!(avg, vec![0.0, 0.0]);
    }

    #[test]
    fn time_average_compass_points() {
        let compass = vec![
            JointPoint::new(vec![1.0], vec![0.0]),
            JointPoint::new(vec![0.0], vec![1.0]),
            JointPoint::new(vec![-1.0], vec![0.0]),
            JointPoint::new(vec![0.0], vec![-1.0]),
        ];
        let traj = Trajectory {
            points: compass,
            steps: vec![0, 1, 2, 3],
            dt_or_step: 1.0,
            mode: TrajectoryMode::Discrete,
            recorded_every: 1,
            nonfinite_at: None,
        };
        let avg = time_average_observable(&traj, &Observable::Identity);
        assert!(avg.iter().all(|v| v.abs() <= 1e-12), "{avg:?}");
    }

    #[test]
    fn observable_by_name() {
        let rps = GameDefinition::rps_softmax(1.5, 2.5, 0.0).unwrap();
        assert_eq!(Observable::by_name("identity", &rps).unwrap(), Observable::Identity);
        assert_eq!(
            Observable::by_name("policy1", &rps).unwrap(),
            Observable::Policy1 { beta: 1.5 }
        );
        assert_eq!(
            Observable::by_name("policy2", &rps).unwrap(),
            Observable::Policy2 { beta: 2.5 }
        );
        assert!(matches!(
            Observable::by_name("energy", &rps),
            Err(DynamicsError::UnknownObservable(_))
        ));
        let quad = quadratic_1x1();
        assert!(Observable::by_name("policy1", &quad).is_err());
    }

    #[test]
    fn csv_format() {
        let game = bilinear_1x1();
        let x0 = JointPoint::new(vec![1.0], vec![0.0]);
        let traj = gradient_play_discrete(&game, &x0, StepSizes::uniform(0.1).unwrap(), 2, 1)
            .unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, Some(&Observable::Identity), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "step,t,x0,x1");
        let first = lines.next().unwrap();
        assert!(first.starts_with("0,"), "{first}");
        assert!(first.contains("1.0000000000000000e0"), "{first}");
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn csv_policy_columns() {
        let game = GameDefinition::rps_softmax(1.0, 1.0, 0.0).unwrap();
        let x0 = JointPoint::new(vec![0.0; 3], vec![0.0; 3]);
        let traj = gradient_play_discrete(&game, &x0, StepSizes::uniform(0.05).unwrap(), 2, 1)
            .unwrap();
        let obs = Observable::by_name("policy1", &game).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, Some(&obs), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().next().unwrap().ends_with("pi1_0,pi1_1,pi1_2"));
    }

    #[test]
    fn nonfinite_truncation() {
        // An explosive quadratic under a huge step size overflows fast.
        let game = quadratic_1x1();
        let x0 = JointPoint::new(vec![1.0], vec![1.0]);
        let traj =
            gradient_play_discrete(&game, &x0, StepSizes::uniform(1e300).unwrap(), 50, 1)
                .unwrap();
        assert!(traj.nonfinite_at.is_some());
        assert!(traj.points.iter().all(|p| p.is_finite()));
    }
}

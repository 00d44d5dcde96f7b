//! Game cost functions and their exact derivatives.
//!
//! A zero-sum game `(f, -f)` is defined by a single cost `f`: player 1
//! minimizes `f` over its block `x1`, player 2 maximizes `f` over `x2`.
//! Every built-in family evaluates through the same generic code path,
//! so values, gradients, and Hessians all come from one definition of
//! the cost (see [`taylor`]). Finite differences exist only as an
//! independent cross-check ([`fd_jet2`]).

pub mod taylor;

mod config;

pub use config::{emit_game_config, parse_game_config, ConfigError};

use crate::linalg::{self, Mat};
use serde::{Deserialize, Serialize};
use taylor::{Dual1, Dual2, Scalar};
use thiserror::Error;

/// Highest total degree accepted for polynomial terms.
pub const MAX_POLY_DEGREE: u32 = 8;

/// Rock-paper-scissors payoff matrix: row player's payoff for
/// (rock, paper, scissors) vs. the column player's action.
pub const RPS_PAYOFF: [[f64; 3]; 3] = [[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]];

#[derive(Debug, Error)]
pub enum GameError {
    #[error(
        "dimension mismatch: expected point blocks of lengths ({expected_m1}, {expected_m2}), \
         got ({got_m1}, {got_m2})"
    )]
    DimensionMismatch { expected_m1: usize, expected_m2: usize, got_m1: usize, got_m2: usize },
    #[error("invalid game definition at `{path}`: {reason}")]
    Invalid { path: String, reason: String },
}

impl GameError {
    fn invalid(path: &str, reason: impl Into<String>) -> Self {
        Self::Invalid { path: path.to_string(), reason: reason.into() }
    }
}

/// Per-player strategy-space dimensions `(m1, m2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockDims {
    m1: usize,
    m2: usize,
}

impl BlockDims {
    pub fn new(m1: usize, m2: usize) -> Result<Self, GameError> {
        if m1 == 0 || m2 == 0 {
            return Err(GameError::invalid("dims", "both player dimensions must be at least 1"));
        }
        Ok(Self { m1, m2 })
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn m2(&self) -> usize {
        self.m2
    }

    /// Total joint dimension `m = m1 + m2`.
    pub fn total(&self) -> usize {
        self.m1 + self.m2
    }
}

/// A joint strategy profile `x = (x1, x2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointPoint {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
}

impl JointPoint {
    pub fn new(x1: Vec<f64>, x2: Vec<f64>) -> Self {
        Self { x1, x2 }
    }

    /// Splits a flat coordinate vector into player blocks. The slice
    /// length must equal `dims.total()`.
    pub fn from_flat(dims: BlockDims, flat: &[f64]) -> Self {
        assert_eq!(flat.len(), dims.total(), "flat coordinate length mismatch");
        Self { x1: flat[..dims.m1()].to_vec(), x2: flat[dims.m1()..].to_vec() }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.x1.len() + self.x2.len());
        v.extend_from_slice(&self.x1);
        v.extend_from_slice(&self.x2);
        v
    }

    pub fn inf_norm(&self) -> f64 {
        linalg::inf_norm(&self.x1).max(linalg::inf_norm(&self.x2))
    }

    pub fn is_finite(&self) -> bool {
        linalg::all_finite(&self.x1) && linalg::all_finite(&self.x2)
    }
}

/// One polynomial monomial `coeff * x1^e1 * x2^e2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub coeff: f64,
    pub e1: Vec<u32>,
    pub e2: Vec<u32>,
}

impl PolyTerm {
    pub fn new(coeff: f64, e1: Vec<u32>, e2: Vec<u32>) -> Self {
        Self { coeff, e1, e2 }
    }

    pub fn total_degree(&self) -> u32 {
        self.e1.iter().sum::<u32>() + self.e2.iter().sum::<u32>()
    }
}

/// The built-in cost families.
#[derive(Clone, Debug, PartialEq)]
pub enum GameFamily {
    /// `f = sum of terms`.
    Polynomial(Vec<PolyTerm>),
    /// `f = x1' A x2`.
    Bilinear(Mat),
    /// `f = x1' A x2 - (eps/2) |x1|^2`.
    PerturbedBilinear { a: Mat, eps: f64 },
    /// `f = 1/2 x1' Q x1 + x1' S x2 - 1/2 x2' R x2` with symmetric Q, R.
    QuadraticSaddle { q: Mat, s: Mat, r: Mat },
    /// Softmax-parametrized rock-paper-scissors:
    /// `f = pi1' M pi2 + eps (|w2|^2 - |w1|^2)` where
    /// `pi_i = softmax(-beta_i * w_i)` and `M` is [`RPS_PAYOFF`].
    /// This is the cost player 1 minimizes; under gradient-play the
    /// unperturbed game cycles and the eps-perturbed game diverges.
    RpsSoftmax { beta1: f64, beta2: f64, eps: f64 },
    /// `f = f_base + t * f_perturbation` over identical dims.
    Composite { base: Box<GameDefinition>, perturbation: Box<GameDefinition>, t: f64 },
}

/// A validated zero-sum game `(f, -f)`. Immutable after construction;
/// every operation on it is a pure function, so shared references may be
/// evaluated concurrently from any number of workers.
#[derive(Clone, Debug, PartialEq)]
pub struct GameDefinition {
    dims: BlockDims,
    family: GameFamily,
}

fn require_symmetric(m: &Mat, name: &str) -> Result<(), GameError> {
    let tol = 1e-12 * (1.0 + m.max_abs());
    if !m.is_symmetric(tol) {
        return Err(GameError::invalid(name, format!("{name} not symmetric")));
    }
    Ok(())
}

impl GameDefinition {
    pub fn polynomial(dims: BlockDims, terms: Vec<PolyTerm>) -> Result<Self, GameError> {
        for (k, term) in terms.iter().enumerate() {
            if term.e1.len() != dims.m1() || term.e2.len() != dims.m2() {
                return Err(GameError::invalid(
                    &format!("terms[{k}]"),
                    format!(
                        "exponent vector lengths ({}, {}) do not match dims ({}, {})",
                        term.e1.len(),
                        term.e2.len(),
                        dims.m1(),
                        dims.m2()
                    ),
                ));
            }
            if term.total_degree() > MAX_POLY_DEGREE {
                return Err(GameError::invalid(
                    &format!("terms[{k}]"),
                    format!(
                        "total degree {} exceeds the cap of {MAX_POLY_DEGREE}",
                        term.total_degree()
                    ),
                ));
            }
            if !term.coeff.is_finite() {
                return Err(GameError::invalid(&format!("terms[{k}].c"), "non-finite coefficient"));
            }
        }
        Ok(Self { dims, family: GameFamily::Polynomial(terms) })
    }

    pub fn bilinear(a: Mat) -> Result<Self, GameError> {
        if !a.all_finite() {
            return Err(GameError::invalid("A", "non-finite entry"));
        }
        let dims = BlockDims::new(a.nrows(), a.ncols())?;
        Ok(Self { dims, family: GameFamily::Bilinear(a) })
    }

    pub fn perturbed_bilinear(a: Mat, eps: f64) -> Result<Self, GameError> {
        if !a.all_finite() {
            return Err(GameError::invalid("A", "non-finite entry"));
        }
        if eps < 0.0 || !eps.is_finite() {
            return Err(GameError::invalid("eps", "must be finite and >= 0"));
        }
        let dims = BlockDims::new(a.nrows(), a.ncols())?;
        Ok(Self { dims, family: GameFamily::PerturbedBilinear { a, eps } })
    }

    pub fn quadratic_saddle(q: Mat, s: Mat, r: Mat) -> Result<Self, GameError> {
        let dims = BlockDims::new(s.nrows(), s.ncols())?;
        if q.nrows() != dims.m1() || q.ncols() != dims.m1() {
            return Err(GameError::invalid("Q", "shape must be m1 x m1"));
        }
        if r.nrows() != dims.m2() || r.ncols() != dims.m2() {
            return Err(GameError::invalid("R", "shape must be m2 x m2"));
        }
        for (m, name) in [(&q, "Q"), (&s, "S"), (&r, "R")] {
            if !m.all_finite() {
                return Err(GameError::invalid(name, "non-finite entry"));
            }
        }
        require_symmetric(&q, "Q")?;
        require_symmetric(&r, "R")?;
        Ok(Self { dims, family: GameFamily::QuadraticSaddle { q, s, r } })
    }

    pub fn rps_softmax(beta1: f64, beta2: f64, eps: f64) -> Result<Self, GameError> {
        if beta1 <= 0.0 || !beta1.is_finite() {
            return Err(GameError::invalid("beta1", "must be finite and > 0"));
        }
        if beta2 <= 0.0 || !beta2.is_finite() {
            return Err(GameError::invalid("beta2", "must be finite and > 0"));
        }
        if eps < 0.0 || !eps.is_finite() {
            return Err(GameError::invalid("eps", "must be finite and >= 0"));
        }
        let dims = BlockDims::new(3, 3).expect("fixed rps dims");
        Ok(Self { dims, family: GameFamily::RpsSoftmax { beta1, beta2, eps } })
    }

    pub fn composite(
        base: GameDefinition,
        perturbation: GameDefinition,
        t: f64,
    ) -> Result<Self, GameError> {
        if base.dims != perturbation.dims {
            return Err(GameError::invalid(
                "perturbation",
                format!(
                    "dims ({}, {}) differ from base dims ({}, {})",
                    perturbation.dims.m1(),
                    perturbation.dims.m2(),
                    base.dims.m1(),
                    base.dims.m2()
                ),
            ));
        }
        if !t.is_finite() {
            return Err(GameError::invalid("t", "must be finite"));
        }
        let dims = base.dims;
        Ok(Self {
            dims,
            family: GameFamily::Composite {
                base: Box::new(base),
                perturbation: Box::new(perturbation),
                t,
            },
        })
    }

    pub fn dims(&self) -> BlockDims {
        self.dims
    }

    pub fn family(&self) -> &GameFamily {
        &self.family
    }

    /// Errors unless the point's block lengths match this game's dims.
    pub fn check_point(&self, x: &JointPoint) -> Result<(), GameError> {
        if x.x1.len() != self.dims.m1() || x.x2.len() != self.dims.m2() {
            return Err(GameError::DimensionMismatch {
                expected_m1: self.dims.m1(),
                expected_m2: self.dims.m2(),
                got_m1: x.x1.len(),
                got_m2: x.x2.len(),
            });
        }
        Ok(())
    }

    /// Cost value `f(x1, x2)`.
    pub fn eval(&self, x: &JointPoint) -> Result<f64, GameError> {
        self.check_point(x)?;
        Ok(eval_family::<f64>(self, &x.x1, &x.x2))
    }

    /// Value, gradient, and Hessian of `f` at `x`, exact to rounding.
    pub fn jet2(&self, x: &JointPoint) -> Result<Jet2, GameError> {
        self.check_point(x)?;
        let seeds = Dual2::seed_point(&x.to_flat());
        let (s1, s2) = seeds.split_at(self.dims.m1());
        let out = eval_family(self, s1, s2);
        Ok(Jet2 { value: out.val, gradient: out.grad, hessian: out.hess })
    }

    /// Value and gradient only. Cheaper than [`Self::jet2`]; this is the
    /// workhorse behind the game form during long simulations.
    pub(crate) fn jet1(&self, x: &JointPoint) -> Result<(f64, Vec<f64>), GameError> {
        self.check_point(x)?;
        let seeds = Dual1::seed_point(&x.to_flat());
        let (s1, s2) = seeds.split_at(self.dims.m1());
        let out = eval_family(self, s1, s2);
        Ok((out.val, out.grad))
    }
}

/// Value, gradient, and Hessian of the cost at one point.
#[derive(Clone, Debug, Serialize)]
pub struct Jet2 {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Mat,
}

/// Softmax policy over `-beta * w` with max-subtraction before
/// exponentiation, so diverging weights never overflow. The subtracted
/// shift cancels identically between numerator and denominator, hence
/// derivatives flowing through jets stay exact.
fn softmax_neg_beta<S: Scalar>(w: &[S], beta: f64) -> Vec<S> {
    let z: Vec<S> = w.iter().map(|wi| wi.scale(-beta)).collect();
    let zmax = z.iter().map(|zi| zi.value()).fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<S> = z.iter().map(|zi| zi.sub(&zi.const_like(zmax)).exp()).collect();
    let mut total = e[0].clone();
    for ei in &e[1..] {
        total = total.add(ei);
    }
    let inv = total.recip();
    e.iter().map(|ei| ei.mul(&inv)).collect()
}

/// Softmax policy over `-beta * w` for a length-3 weight vector.
/// Entries are positive and sum to 1; constant shifts of `w` leave the
/// output unchanged.
pub fn rps_policy(w: &[f64], beta: f64) -> [f64; 3] {
    assert_eq!(w.len(), 3, "rps_policy expects a length-3 weight vector");
    assert!(beta > 0.0, "rps_policy requires beta > 0");
    let p = softmax_neg_beta::<f64>(w, beta);
    [p[0], p[1], p[2]]
}

fn eval_family<S: Scalar>(def: &GameDefinition, x1: &[S], x2: &[S]) -> S {
    let zero = x1[0].const_like(0.0);
    match def.family() {
        GameFamily::Polynomial(terms) => {
            let mut acc = zero;
            for term in terms {
                let mut prod = x1[0].const_like(term.coeff);
                for (xi, &e) in x1.iter().zip(&term.e1) {
                    if e > 0 {
                        prod = prod.mul(&xi.powi(e));
                    }
                }
                for (xi, &e) in x2.iter().zip(&term.e2) {
                    if e > 0 {
                        prod = prod.mul(&xi.powi(e));
                    }
                }
                acc = acc.add(&prod);
            }
            acc
        }
        GameFamily::Bilinear(a) => bilinear_part(a, x1, x2, zero),
        GameFamily::PerturbedBilinear { a, eps } => {
            let bil = bilinear_part(a, x1, x2, zero);
            let sq = sum_of_squares(x1);
            bil.add(&sq.scale(-eps / 2.0))
        }
        GameFamily::QuadraticSaddle { q, s, r } => {
            let qq = quadratic_form(q, x1).scale(0.5);
            let ss = bilinear_part(s, x1, x2, zero);
            let rr = quadratic_form(r, x2).scale(-0.5);
            qq.add(&ss).add(&rr)
        }
        GameFamily::RpsSoftmax { beta1, beta2, eps } => {
            let p1 = softmax_neg_beta(x1, *beta1);
            let p2 = softmax_neg_beta(x2, *beta2);
            let mut acc = zero;
            for (i, row) in RPS_PAYOFF.iter().enumerate() {
                for (j, &mij) in row.iter().enumerate() {
                    if mij != 0.0 {
                        acc = acc.add(&p1[i].mul(&p2[j]).scale(mij));
                    }
                }
            }
            if *eps != 0.0 {
                let pen = sum_of_squares(x2).sub(&sum_of_squares(x1));
                acc = acc.add(&pen.scale(*eps));
            }
            acc
        }
        GameFamily::Composite { base, perturbation, t } => {
            let fb = eval_family(base, x1, x2);
            let fp = eval_family(perturbation, x1, x2);
            fb.add(&fp.scale(*t))
        }
    }
}

fn bilinear_part<S: Scalar>(a: &Mat, x1: &[S], x2: &[S], zero: S) -> S {
    let mut acc = zero;
    for (i, xi) in x1.iter().enumerate() {
        for (j, yj) in x2.iter().enumerate() {
            let c = a[(i, j)];
            if c != 0.0 {
                acc = acc.add(&xi.mul(yj).scale(c));
            }
        }
    }
    acc
}

fn quadratic_form<S: Scalar>(m: &Mat, x: &[S]) -> S {
    let mut acc = x[0].const_like(0.0);
    for (i, xi) in x.iter().enumerate() {
        for (j, xj) in x.iter().enumerate() {
            let c = m[(i, j)];
            if c != 0.0 {
                acc = acc.add(&xi.mul(xj).scale(c));
            }
        }
    }
    acc
}

fn sum_of_squares<S: Scalar>(x: &[S]) -> S {
    let mut acc = x[0].const_like(0.0);
    for xi in x {
        acc = acc.add(&xi.mul(xi));
    }
    acc
}

/// Central-difference jet, the independent oracle for [`GameDefinition::jet2`].
/// Gradient error is O(h^2); Hessian error O(h^2) plus roundoff O(eps/h^2).
pub fn fd_jet2(game: &GameDefinition, x: &JointPoint, h: f64) -> Result<Jet2, GameError> {
    assert!(h > 0.0, "fd_jet2 requires h > 0");
    game.check_point(x)?;
    let dims = game.dims();
    let m = dims.total();
    let base = x.to_flat();
    let eval_at = |flat: &[f64]| -> Result<f64, GameError> {
        game.eval(&JointPoint::from_flat(dims, flat))
    };

    let f0 = eval_at(&base)?;
    let mut gradient = vec![0.0; m];
    let mut hessian = Mat::zeros(m, m);
    for i in 0..m {
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[i] += h;
        minus[i] -= h;
        let fp = eval_at(&plus)?;
        let fm = eval_at(&minus)?;
        gradient[i] = (fp - fm) / (2.0 * h);
        hessian[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
    }
    for i in 0..m {
        for j in (i + 1)..m {
            let mut pp = base.clone();
            let mut pm = base.clone();
            let mut mp = base.clone();
            let mut mm = base.clone();
            pp[i] += h;
            pp[j] += h;
            pm[i] += h;
            pm[j] -= h;
            mp[i] -= h;
            mp[j] += h;
            mm[i] -= h;
            mm[j] -= h;
            let v =
                (eval_at(&pp)? - eval_at(&pm)? - eval_at(&mp)? + eval_at(&mm)?) / (4.0 * h * h);
            hessian[(i, j)] = v;
            hessian[(j, i)] = v;
        }
    }
    Ok(Jet2 { value: f0, gradient, hessian })
}

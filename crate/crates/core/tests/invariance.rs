//! Coordinate invariance of the taxonomy: pushing a polynomial game
//! through a block-orthogonal change of variables and classifying at the
//! transformed point must reproduce every boolean flag. The transformed
//! game is built by exact polynomial composition, so both games run
//! through the ordinary evaluation path.

use gameform::classify::{classify_point, multistart, NewtonOptions, Tolerances};
use gameform::games::{BlockDims, GameDefinition, JointPoint, PolyTerm};
use gameform::linalg::Mat;
use gameform::perturb::{sample_game, FamilySpec};
use gameform::rng::Rng;
use std::collections::BTreeMap;

/// Sparse polynomial over the flat coordinates, keyed by exponent vector.
#[derive(Clone, Debug)]
struct Poly {
    m: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Poly {
    fn zero(m: usize) -> Self {
        Self { m, terms: BTreeMap::new() }
    }

    fn constant(m: usize, c: f64) -> Self {
        let mut p = Self::zero(m);
        if c != 0.0 {
            p.terms.insert(vec![0; m], c);
        }
        p
    }

    fn linear(m: usize, coeffs: &[f64]) -> Self {
        let mut p = Self::zero(m);
        for (j, &c) in coeffs.iter().enumerate() {
            if c != 0.0 {
                let mut e = vec![0; m];
                e[j] = 1;
                p.terms.insert(e, c);
            }
        }
        p
    }

    fn add_assign(&mut self, other: &Poly) {
        for (e, c) in &other.terms {
            *self.terms.entry(e.clone()).or_insert(0.0) += c;
        }
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.m);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                *out.terms.entry(e).or_insert(0.0) += ca * cb;
            }
        }
        out
    }

    fn powi(&self, e: u32) -> Poly {
        let mut acc = Poly::constant(self.m, 1.0);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    fn into_terms(self, dims: BlockDims) -> Vec<PolyTerm> {
        self.terms
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(e, c)| {
                PolyTerm::new(c, e[..dims.m1()].to_vec(), e[dims.m1()..].to_vec())
            })
            .collect()
    }
}

/// Composes the polynomial game with `x = T y`, i.e. builds the game
/// with cost `f(T y)` as an explicit polynomial in `y`.
fn compose_with_linear(game: &GameDefinition, t: &Mat) -> GameDefinition {
    let dims = game.dims();
    let m = dims.total();
    let gameform::games::GameFamily::Polynomial(terms) = game.family() else {
        panic!("composition helper only handles polynomial games");
    };
    // row i of T gives x_i as a linear form in y
    let rows: Vec<Poly> =
        (0..m).map(|i| Poly::linear(m, &(0..m).map(|j| t[(i, j)]).collect::<Vec<_>>())).collect();
    let mut total = Poly::zero(m);
    for term in terms {
        let mut prod = Poly::constant(m, term.coeff);
        let flat_exp: Vec<u32> =
            term.e1.iter().chain(term.e2.iter()).copied().collect();
        for (i, &e) in flat_exp.iter().enumerate() {
            if e > 0 {
                prod = prod.mul(&rows[i].powi(e));
            }
        }
        total.add_assign(&prod);
    }
    GameDefinition::polynomial(dims, total.into_terms(dims)).unwrap()
}

/// Random orthogonal matrix by Gram-Schmidt on a normal sample.
fn random_orthogonal(rng: &mut Rng, n: usize) -> Mat {
    loop {
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
        'sample: {
            for _ in 0..n {
                let mut v: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
                for u in &cols {
                    let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                    for (vi, ui) in v.iter_mut().zip(u) {
                        *vi -= d * ui;
                    }
                }
                let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm < 1e-6 {
                    break 'sample;
                }
                for vi in &mut v {
                    *vi /= norm;
                }
                cols.push(v);
            }
        }
        if cols.len() == n {
            let mut q = Mat::zeros(n, n);
            for (j, col) in cols.iter().enumerate() {
                for i in 0..n {
                    q[(i, j)] = col[i];
                }
            }
            return q;
        }
    }
}

fn block_orthogonal(rng: &mut Rng, dims: BlockDims) -> Mat {
    let t1 = random_orthogonal(rng, dims.m1());
    let t2 = random_orthogonal(rng, dims.m2());
    let m = dims.total();
    let mut t = Mat::zeros(m, m);
    for i in 0..dims.m1() {
        for j in 0..dims.m1() {
            t[(i, j)] = t1[(i, j)];
        }
    }
    for i in 0..dims.m2() {
        for j in 0..dims.m2() {
            t[(dims.m1() + i, dims.m1() + j)] = t2[(i, j)];
        }
    }
    t
}

#[test]
fn classification_flags_invariant_under_block_orthogonal_maps() {
    let mut rng = Rng::new(0xC0C0);
    let tols = Tolerances::default();
    let opts = NewtonOptions::default();
    let mut compared = 0;
    for _ in 0..20 {
        let m1 = 1 + (rng.next_u64() % 2) as usize;
        let m2 = 1 + (rng.next_u64() % 2) as usize;
        let dims = BlockDims::new(m1, m2).unwrap();
        let spec = FamilySpec::RandomPolynomial { dims, degree: 3, coeff_scale: 1.0 };
        let game = sample_game(&spec, &mut rng).unwrap();
        let t = block_orthogonal(&mut rng, dims);
        let transformed = compose_with_linear(&game, &t);

        // points of interest: found critical points plus random probes
        let scan = multistart(&game, -2.0, 2.0, 12, rng.next_u64(), &opts, &tols).unwrap();
        let mut points: Vec<JointPoint> = scan.reports.into_iter().map(|r| r.point).collect();
        for _ in 0..3 {
            points.push(JointPoint::new(
                (0..m1).map(|_| rng.uniform(-1.0, 1.0)).collect(),
                (0..m2).map(|_| rng.uniform(-1.0, 1.0)).collect(),
            ));
        }

        for x in points {
            // x = T y, so the matching point for f(T y) is y = T' x
            let y_flat = t.transpose().matvec(&x.to_flat());
            let y = JointPoint::from_flat(dims, &y_flat);
            let rx = classify_point(&game, &x, &tols).unwrap();
            let ry = classify_point(&transformed, &y, &tols).unwrap();
            assert_eq!(rx.is_critical, ry.is_critical, "is_critical at {x:?}");
            assert_eq!(rx.lne_necessary, ry.lne_necessary, "lne_necessary at {x:?}");
            assert_eq!(rx.is_dne, ry.is_dne, "is_dne at {x:?}");
            assert_eq!(rx.nondegenerate, ry.nondegenerate, "nondegenerate at {x:?}");
            assert_eq!(rx.hyperbolic, ry.hyperbolic, "hyperbolic at {x:?}");
            compared += 1;
        }
    }
    assert!(compared >= 40, "expected a meaningful sample, compared {compared}");
}

#[test]
fn composition_preserves_values() {
    let mut rng = Rng::new(77);
    let dims = BlockDims::new(2, 2).unwrap();
    let spec = FamilySpec::RandomPolynomial { dims, degree: 3, coeff_scale: 1.0 };
    let game = sample_game(&spec, &mut rng).unwrap();
    let t = block_orthogonal(&mut rng, dims);
    let transformed = compose_with_linear(&game, &t);
    for _ in 0..20 {
        let y: Vec<f64> = (0..4).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let x = t.matvec(&y);
        let fx = game.eval(&JointPoint::from_flat(dims, &x)).unwrap();
        let fy = transformed.eval(&JointPoint::from_flat(dims, &y)).unwrap();
        assert!((fx - fy).abs() <= 1e-12 * (1.0 + fx.abs()), "{fx} vs {fy}");
    }
}

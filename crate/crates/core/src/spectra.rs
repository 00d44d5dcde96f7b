//! Dense linear-algebra kernels for small matrices.
//!
//! Everything here is implemented in-crate rather than delegated to an
//! external solver: game Jacobians stay below ~20x20, and owning the
//! kernels pins the numerical behavior of every verdict this library
//! emits. Nonsymmetric eigenvalues come from balancing, Householder
//! Hessenberg reduction, and Francis double-shift QR iteration with 2x2
//! deflation; symmetric eigenvalues from cyclic Jacobi rotations; solves
//! and determinants from LU with partial pivoting.

use crate::linalg::Mat;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("singular matrix: pivot {pivot:.3e} at or below threshold {threshold:.3e}")]
    Singular { pivot: f64, threshold: f64 },
    #[error("matrix not symmetric: max |a_ij - a_ji| = {max_asymmetry:.3e}")]
    NotSymmetric { max_asymmetry: f64 },
    #[error("eigenvalue iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize, partial: Vec<Complex> },
}

/// A complex number as an eigenvalue carrier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }
}

/// All eigenvalues of a real matrix, sorted by `(re, im)`. Closed under
/// conjugation: complex eigenvalues come in `a ± bi` pairs.
#[derive(Clone, Debug, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex>,
}

impl Spectrum {
    /// Smallest `|Re(lambda)|` over the spectrum.
    pub fn min_abs_re(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.re.abs()).fold(f64::INFINITY, f64::min)
    }

    /// Smallest `Re(lambda)` over the spectrum.
    pub fn min_re(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.re).fold(f64::INFINITY, f64::min)
    }

    /// Complex product of all eigenvalues; its real part estimates the
    /// determinant.
    pub fn product(&self) -> Complex {
        let mut p = Complex::new(1.0, 0.0);
        for l in &self.eigenvalues {
            p = Complex::new(p.re * l.re - p.im * l.im, p.re * l.im + p.im * l.re);
        }
        p
    }
}

fn sort_eigenvalues(eigs: &mut [Complex]) {
    eigs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

// ---------------------------------------------------------------------------
// LU with partial pivoting
// ---------------------------------------------------------------------------

struct LuFactors {
    lu: Mat,
    piv: Vec<usize>,
    sign: f64,
    min_pivot: f64,
}

fn lu_factor(a: &Mat) -> LuFactors {
    assert!(a.is_square(), "lu_factor expects a square matrix");
    let n = a.nrows();
    let mut lu = a.clone();
    let mut piv: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    let mut min_pivot = f64::INFINITY;
    for k in 0..n {
        let mut p = k;
        let mut best = lu[(k, k)].abs();
        for i in (k + 1)..n {
            let v = lu[(i, k)].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if p != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = tmp;
            }
            piv.swap(k, p);
            sign = -sign;
        }
        let pivot = lu[(k, k)];
        min_pivot = min_pivot.min(pivot.abs());
        if pivot == 0.0 {
            continue;
        }
        for i in (k + 1)..n {
            let factor = lu[(i, k)] / pivot;
            lu[(i, k)] = factor;
            for j in (k + 1)..n {
                lu[(i, j)] -= factor * lu[(k, j)];
            }
        }
    }
    LuFactors { lu, piv, sign, min_pivot }
}

/// Solves `A x = b` by LU with partial pivoting. Fails with
/// [`SpectraError::Singular`] when a pivot falls at or below
/// `1e-13 * |A|_inf`, which callers treat as a degenerate Jacobian.
pub fn lu_solve(a: &Mat, b: &[f64]) -> Result<Vec<f64>, SpectraError> {
    assert_eq!(a.nrows(), b.len(), "lu_solve shape mismatch");
    let n = b.len();
    let f = lu_factor(a);
    let threshold = 1e-13 * a.norm_inf();
    if f.min_pivot <= threshold {
        return Err(SpectraError::Singular { pivot: f.min_pivot, threshold });
    }
    // forward substitution on the permuted right-hand side
    let mut x: Vec<f64> = f.piv.iter().map(|&i| b[i]).collect();
    for i in 1..n {
        for j in 0..i {
            x[i] -= f.lu[(i, j)] * x[j];
        }
    }
    // back substitution
    for i in (0..n).rev() {
        for j in (i + 1)..n {
            x[i] -= f.lu[(i, j)] * x[j];
        }
        x[i] /= f.lu[(i, i)];
    }
    Ok(x)
}

/// Determinant via LU with pivot-sign tracking. Exactly singular input
/// yields 0 rather than an error.
pub fn determinant(a: &Mat) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 1.0;
    }
    let f = lu_factor(a);
    let mut det = f.sign;
    for i in 0..n {
        det *= f.lu[(i, i)];
    }
    det
}

// ---------------------------------------------------------------------------
// Nonsymmetric eigenvalues: balance + Hessenberg + Francis QR
// ---------------------------------------------------------------------------

/// Parlett-Reinsch balancing: similarity scaling by radix powers, so the
/// spectrum is untouched while row/column norms equalize.
fn balance(a: &mut Mat) {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    let sqrdx = RADIX * RADIX;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                let mut c_acc = c;
                while c_acc < g {
                    f *= RADIX;
                    c_acc *= sqrdx;
                }
                g = r * RADIX;
                while c_acc > g {
                    f /= RADIX;
                    c_acc /= sqrdx;
                }
                if (c_acc + r) / f < 0.95 * s {
                    done = false;
                    let ginv = 1.0 / f;
                    for j in 0..n {
                        a[(i, j)] *= ginv;
                    }
                    for j in 0..n {
                        a[(j, i)] *= f;
                    }
                }
            }
        }
        if done {
            break;
        }
    }
}

/// Householder reduction to upper Hessenberg form (similarity transform;
/// the orthogonal factor is not accumulated since only eigenvalues are
/// needed).
fn hessenberg(a: &mut Mat) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    for k in 0..(n - 2) {
        let mut norm2 = 0.0;
        for i in (k + 1)..n {
            norm2 += a[(i, k)] * a[(i, k)];
        }
        if norm2 == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let alpha = -norm2.sqrt().copysign(if x0 == 0.0 { 1.0 } else { x0 });
        let mut v = vec![0.0; n];
        for i in (k + 1)..n {
            v[i] = a[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // left: A <- (I - beta v v') A over columns k..n
        for j in k..n {
            let mut s = 0.0;
            for i in (k + 1)..n {
                s += v[i] * a[(i, j)];
            }
            s *= beta;
            for i in (k + 1)..n {
                a[(i, j)] -= s * v[i];
            }
        }
        // right: A <- A (I - beta v v') over all rows
        for i in 0..n {
            let mut s = 0.0;
            for j in (k + 1)..n {
                s += a[(i, j)] * v[j];
            }
            s *= beta;
            for j in (k + 1)..n {
                a[(i, j)] -= s * v[j];
            }
        }
    }
    // entries below the first subdiagonal are exact zeros from here on
    for i in 0..n {
        for j in 0..i.saturating_sub(1) {
            a[(i, j)] = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix, deflating
/// real eigenvalues one at a time and conjugate pairs via trailing 2x2
/// blocks. On sweep exhaustion the eigenvalues deflated so far come
/// back with the error.
fn hessenberg_qr_eigenvalues(
    h: &mut Mat,
    max_sweeps: usize,
) -> Result<Vec<Complex>, (usize, Vec<Complex>)> {
    let n = h.nrows();
    let eps = f64::EPSILON;
    let mut eigs: Vec<Option<Complex>> = vec![None; n];

    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += h[(i, j)].abs();
        }
    }

    let mut nn = n as isize - 1;
    let mut shift_total = 0.0;
    let mut sweeps = 0usize;
    while nn >= 0 {
        let mut its = 0;
        'block: loop {
            // find a small subdiagonal to split the active block
            let nnu = nn as usize;
            let mut l = nnu;
            while l >= 1 {
                let mut s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if h[(l, l - 1)].abs() <= eps * s {
                    h[(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = h[(nnu, nnu)];
            if l == nnu {
                // single real eigenvalue
                eigs[nnu] = Some(Complex::new(x + shift_total, 0.0));
                nn -= 1;
                break 'block;
            }
            let mut y = h[(nnu - 1, nnu - 1)];
            let mut w = h[(nnu, nnu - 1)] * h[(nnu - 1, nnu)];
            if l == nnu - 1 {
                // trailing 2x2 block: closed-form pair
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                let xt = x + shift_total;
                if q >= 0.0 {
                    let z = p + z.copysign(if p == 0.0 { 1.0 } else { p });
                    let first = xt + z;
                    let second = if z != 0.0 { xt - w / z } else { first };
                    eigs[nnu - 1] = Some(Complex::new(first, 0.0));
                    eigs[nnu] = Some(Complex::new(second, 0.0));
                } else {
                    eigs[nnu - 1] = Some(Complex::new(xt + p, z));
                    eigs[nnu] = Some(Complex::new(xt + p, -z));
                }
                nn -= 2;
                break 'block;
            }

            if sweeps >= max_sweeps {
                return Err((sweeps, eigs.iter().flatten().copied().collect()));
            }
            if its == 10 || its == 20 {
                // exceptional shift to break symmetric stalls
                shift_total += x;
                for i in 0..=nnu {
                    let d = h[(i, i)];
                    h[(i, i)] = d - x;
                }
                let s = h[(nnu, nnu - 1)].abs() + h[(nnu - 1, nnu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            sweeps += 1;

            // look for two consecutive small subdiagonals
            let mut m = nnu - 2;
            let mut p;
            let mut q;
            let mut r;
            loop {
                let z = h[(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - rr - ss;
                r = h[(m + 2, m + 1)];
                let scale = p.abs() + q.abs() + r.abs();
                p /= scale;
                q /= scale;
                r /= scale;
                if m == l {
                    break;
                }
                let u = h[(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nnu {
                h[(i, i - 2)] = 0.0;
                if i != m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }

            // double QR sweep over rows l..=nn
            for k in m..nnu {
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if k != nnu - 1 { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                let s_raw = (p * p + q * q + r * r).sqrt();
                let s = s_raw.copysign(if p == 0.0 { 1.0 } else { p });
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        h[(k, k - 1)] = -h[(k, k - 1)];
                    }
                } else {
                    h[(k, k - 1)] = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                // row modification
                for j in k..=nnu {
                    let mut pp = h[(k, j)] + q * h[(k + 1, j)];
                    if k != nnu - 1 {
                        pp += r * h[(k + 2, j)];
                        h[(k + 2, j)] -= pp * z;
                    }
                    h[(k + 1, j)] -= pp * y;
                    h[(k, j)] -= pp * x;
                }
                // column modification
                let mmin = if nnu < k + 3 { nnu } else { k + 3 };
                for i in l..=mmin {
                    let mut pp = x * h[(i, k)] + y * h[(i, k + 1)];
                    if k != nnu - 1 {
                        pp += z * h[(i, k + 2)];
                        h[(i, k + 2)] -= pp * r;
                    }
                    h[(i, k + 1)] -= pp * q;
                    h[(i, k)] -= pp;
                }
            }
        }
    }
    Ok(eigs.into_iter().map(|e| e.expect("all eigenvalues deflated")).collect())
}

/// All eigenvalues of a square real matrix.
pub fn eigenvalues(a: &Mat) -> Result<Spectrum, SpectraError> {
    assert!(a.is_square() && a.nrows() >= 1, "eigenvalues expects a square matrix, m >= 1");
    assert!(a.all_finite(), "eigenvalues expects finite entries");
    let n = a.nrows();
    if n == 1 {
        return Ok(Spectrum { eigenvalues: vec![Complex::new(a[(0, 0)], 0.0)] });
    }
    let mut h = a.clone();
    balance(&mut h);
    hessenberg(&mut h);
    let max_sweeps = 100 * n;
    match hessenberg_qr_eigenvalues(&mut h, max_sweeps) {
        Ok(mut eigs) => {
            sort_eigenvalues(&mut eigs);
            Ok(Spectrum { eigenvalues: eigs })
        }
        Err((sweeps, partial)) => Err(SpectraError::NoConvergence { sweeps, partial }),
    }
}

// ---------------------------------------------------------------------------
// Symmetric eigenvalues: cyclic Jacobi
// ---------------------------------------------------------------------------

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations,
/// returned in ascending order.
pub fn symmetric_eigenvalues(a: &Mat) -> Result<Vec<f64>, SpectraError> {
    let asym_tol = 1e-10 * (1.0 + a.max_abs());
    if !a.is_square() || a.max_asymmetry() > asym_tol {
        return Err(SpectraError::NotSymmetric { max_asymmetry: a.max_asymmetry() });
    }
    let n = a.nrows();
    let mut m = a.clone();
    // symmetrize exactly so rotations preserve symmetry bit-for-bit
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let stop = 1e-15 * (1.0 + m.max_abs()) * (n * n) as f64;
    const MAX_SWEEPS: usize = 50;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)].abs();
            }
        }
        if off <= stop {
            let mut eigs: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
            eigs.sort_by(f64::total_cmp);
            return Ok(eigs);
        }
        for p in 0..(n - 1) {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let diff = m[(q, q)] - m[(p, p)];
                let t = if apq.abs() < 1e-300 * diff.abs() {
                    apq / diff
                } else {
                    let theta = 0.5 * diff / apq;
                    let mut t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        t = -t;
                    }
                    t
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                m[(p, p)] = app - t * apq;
                m[(q, q)] = aqq + t * apq;
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for i in 0..n {
                    if i != p && i != q {
                        let aip = m[(i, p)];
                        let aiq = m[(i, q)];
                        let new_ip = aip - s * (aiq + tau * aip);
                        let new_iq = aiq + s * (aip - tau * aiq);
                        m[(i, p)] = new_ip;
                        m[(p, i)] = new_ip;
                        m[(i, q)] = new_iq;
                        m[(q, i)] = new_iq;
                    }
                }
            }
        }
    }
    Err(SpectraError::NoConvergence { sweeps: MAX_SWEEPS, partial: Vec::new() })
}

// ---------------------------------------------------------------------------
// Definiteness verdicts
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DefinitenessKind {
    PositiveDefinite,
    PositiveSemidefinite,
    Indefinite,
    NegativeSemidefinite,
    NegativeDefinite,
    Zero,
}

/// Definiteness verdict for a symmetric matrix, with the extreme
/// eigenvalues that justify it.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DefinitenessVerdict {
    pub kind: DefinitenessKind,
    pub min_eig: f64,
    pub max_eig: f64,
}

impl DefinitenessVerdict {
    /// True when the matrix is positive semidefinite up to the verdict's
    /// tolerance (includes the exactly-zero matrix).
    pub fn is_psd(&self) -> bool {
        matches!(
            self.kind,
            DefinitenessKind::PositiveDefinite
                | DefinitenessKind::PositiveSemidefinite
                | DefinitenessKind::Zero
        )
    }
}

/// Classifies a symmetric matrix from its eigendecomposition. `tol`
/// defaults to `1e-8 * (1 + |A|_inf)`; the ordering of the checks makes
/// `sym_definiteness(-A)` the exact mirror of `sym_definiteness(A)`.
pub fn sym_definiteness(a: &Mat, tol: Option<f64>) -> Result<DefinitenessVerdict, SpectraError> {
    let eigs = symmetric_eigenvalues(a)?;
    let min_eig = *eigs.first().expect("m >= 1");
    let max_eig = *eigs.last().expect("m >= 1");
    let tol = tol.unwrap_or_else(|| 1e-8 * (1.0 + a.norm_inf()));
    let kind = if min_eig > tol {
        DefinitenessKind::PositiveDefinite
    } else if max_eig < -tol {
        DefinitenessKind::NegativeDefinite
    } else if min_eig.abs() <= tol && max_eig.abs() <= tol {
        DefinitenessKind::Zero
    } else if min_eig > -tol {
        DefinitenessKind::PositiveSemidefinite
    } else if max_eig < tol {
        DefinitenessKind::NegativeSemidefinite
    } else {
        DefinitenessKind::Indefinite
    };
    Ok(DefinitenessVerdict { kind, min_eig, max_eig })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn mat(rows: &[&[f64]]) -> Mat {
        Mat::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn random_matrix(rng: &mut Rng, n: usize) -> Mat {
        let mut a = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = rng.normal();
            }
        }
        a
    }

    #[test]
    fn lu_solve_identity() {
        let x = lu_solve(&Mat::identity(2), &[3.0, 4.0]).unwrap();
        assert_eq!(x, vec![3.0, 4.0]);
    }

    #[test]
    fn lu_solve_rotation_generator() {
        let a = mat(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        let x = lu_solve(&a, &[1.0, 0.0]).unwrap();
        assert!((x[0] - 0.0).abs() <= 1e-15 && (x[1] - 1.0).abs() <= 1e-15, "{x:?}");
    }

    #[test]
    fn lu_solve_zero_matrix_is_singular() {
        let err = lu_solve(&Mat::zeros(2, 2), &[1.0, 0.0]).unwrap_err();
        assert!(matches!(err, SpectraError::Singular { .. }));
    }

    #[test]
    fn lu_solve_residual_on_random_systems() {
        let mut rng = Rng::new(271);
        let mut tested = 0;
        while tested < 200 {
            let n = 2 + (rng.next_u64() % 7) as usize;
            let mut a = random_matrix(&mut rng, n);
            for i in 0..n {
                a[(i, i)] += 4.0; // keep far from singular
            }
            let b: Vec<f64> = (0..n).map(|_| rng.uniform(-2.0, 2.0)).collect();
            let x = lu_solve(&a, &b).unwrap();
            let r = a.matvec(&x);
            let resid = r.iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
            let bound = 1e-10 * (1.0 + crate::linalg::inf_norm(&b));
            assert!(resid <= bound, "residual {resid} exceeds {bound}");
            tested += 1;
        }
    }

    #[test]
    fn determinant_small_cases() {
        assert_eq!(determinant(&mat(&[&[0.0, 1.0], &[-1.0, 0.0]])), 1.0);
        assert_eq!(determinant(&mat(&[&[0.0, 1.0], &[1.0, 0.0]])), -1.0);
        for n in 1..6 {
            assert_eq!(determinant(&Mat::identity(n)), 1.0);
        }
        assert_eq!(determinant(&Mat::zeros(3, 3)), 0.0);
    }

    #[test]
    fn eigenvalues_rotation_generator() {
        let s = eigenvalues(&mat(&[&[0.0, 1.0], &[-1.0, 0.0]])).unwrap();
        let e = &s.eigenvalues;
        assert!((e[0].re).abs() <= 1e-12 && (e[0].im + 1.0).abs() <= 1e-12, "{e:?}");
        assert!((e[1].re).abs() <= 1e-12 && (e[1].im - 1.0).abs() <= 1e-12, "{e:?}");
    }

    #[test]
    fn eigenvalues_shifted_rotation() {
        let s = eigenvalues(&mat(&[&[1.0, 1.0], &[-1.0, 1.0]])).unwrap();
        let e = &s.eigenvalues;
        assert!((e[0].re - 1.0).abs() <= 1e-12 && (e[0].im + 1.0).abs() <= 1e-12, "{e:?}");
        assert!((e[1].re - 1.0).abs() <= 1e-12 && (e[1].im - 1.0).abs() <= 1e-12, "{e:?}");
    }

    #[test]
    fn eigenvalues_diagonal() {
        let s = eigenvalues(&mat(&[&[3.0, 0.0, 0.0], &[0.0, -1.0, 0.0], &[0.0, 0.0, 2.0]]))
            .unwrap();
        let re: Vec<f64> = s.eigenvalues.iter().map(|l| l.re).collect();
        assert_eq!(re, vec![-1.0, 2.0, 3.0]);
        assert!(s.eigenvalues.iter().all(|l| l.im == 0.0));
    }

    #[test]
    fn eigenvalues_match_trace_and_determinant() {
        let mut rng = Rng::new(99);
        for trial in 0..200 {
            let n = 2 + (trial % 7);
            let a = random_matrix(&mut rng, n);
            let s = eigenvalues(&a).unwrap();
            let tr: f64 = s.eigenvalues.iter().map(|l| l.re).sum();
            assert!(
                (tr - a.trace()).abs() <= 1e-8 * (1.0 + a.trace().abs()),
                "trace mismatch: {tr} vs {}",
                a.trace()
            );
            let det = determinant(&a);
            let prod = s.product();
            assert!(
                (prod.re - det).abs() <= 1e-7 * (1.0 + det.abs()),
                "det mismatch: {} vs {det} (n = {n})",
                prod.re
            );
            assert!(prod.im.abs() <= 1e-7 * (1.0 + det.abs()));
        }
    }

    #[test]
    fn eigenvalues_conjugation_closed() {
        let mut rng = Rng::new(17);
        for _ in 0..50 {
            let a = random_matrix(&mut rng, 5);
            let s = eigenvalues(&a).unwrap();
            let scale = (1e-9 * (1.0 + a.norm_inf())).max(1e-9);
            for l in &s.eigenvalues {
                if l.im != 0.0 {
                    let found = s
                        .eigenvalues
                        .iter()
                        .any(|m| (m.re - l.re).abs() <= scale && (m.im + l.im).abs() <= scale);
                    assert!(found, "conjugate of {l:?} missing in {:?}", s.eigenvalues);
                }
            }
        }
    }

    #[test]
    fn skew_symmetric_has_imaginary_spectrum() {
        let mut rng = Rng::new(31);
        for _ in 0..50 {
            let n = 2 + (rng.next_u64() % 5) as usize;
            let g = random_matrix(&mut rng, n);
            let skew = g.add(&g.transpose().scale(-1.0)).scale(0.5);
            let s = eigenvalues(&skew).unwrap();
            let bound = (1e-9 * skew.norm_inf()).max(1e-12);
            for l in &s.eigenvalues {
                assert!(l.re.abs() <= bound, "Re {} too large", l.re);
            }
        }
    }

    #[test]
    fn jacobi_known_eigenvalues() {
        let eigs = symmetric_eigenvalues(&mat(&[
            &[2.0, 0.0, 0.0],
            &[0.0, 3.0, 4.0],
            &[0.0, 4.0, 9.0],
        ]))
        .unwrap();
        let expect = [1.0, 2.0, 11.0];
        for (a, b) in eigs.iter().zip(expect) {
            assert!((a - b).abs() <= 1e-12, "{eigs:?}");
        }
    }

    #[test]
    fn definiteness_examples() {
        let pd = sym_definiteness(&Mat::identity(3), None).unwrap();
        assert_eq!(pd.kind, DefinitenessKind::PositiveDefinite);

        let psd = sym_definiteness(&mat(&[&[1.0, 0.0], &[0.0, 0.0]]), None).unwrap();
        assert_eq!(psd.kind, DefinitenessKind::PositiveSemidefinite);

        let indef = sym_definiteness(&mat(&[&[1.0, 0.0], &[0.0, -1.0]]), None).unwrap();
        assert_eq!(indef.kind, DefinitenessKind::Indefinite);

        let zero = sym_definiteness(&Mat::zeros(2, 2), None).unwrap();
        assert_eq!(zero.kind, DefinitenessKind::Zero);
    }

    #[test]
    fn definiteness_mirror_under_negation() {
        use DefinitenessKind::*;
        let mut rng = Rng::new(8);
        for _ in 0..100 {
            let n = 1 + (rng.next_u64() % 4) as usize;
            let g = random_matrix(&mut rng, n);
            let sym = g.add(&g.transpose()).scale(0.5);
            let v = sym_definiteness(&sym, None).unwrap();
            let vneg = sym_definiteness(&sym.scale(-1.0), None).unwrap();
            let mirrored = match v.kind {
                PositiveDefinite => NegativeDefinite,
                PositiveSemidefinite => NegativeSemidefinite,
                NegativeSemidefinite => PositiveSemidefinite,
                NegativeDefinite => PositiveDefinite,
                Indefinite => Indefinite,
                Zero => Zero,
            };
            assert_eq!(vneg.kind, mirrored);
            assert_eq!(vneg.min_eig, -v.max_eig);
        }
    }

    #[test]
    fn definiteness_rejects_asymmetric() {
        let err = sym_definiteness(&mat(&[&[1.0, 2.0], &[0.0, 1.0]]), None).unwrap_err();
        assert!(matches!(err, SpectraError::NotSymmetric { .. }));
    }
}

//! Normal matrices with certified spectral data, functional calculus, and
//! the convergence check for function baskets.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::region::lex_cmp;

pub type CMat = DMatrix<Complex64>;

/// Operator norm ‖A‖ = largest singular value, via the Gram matrix A*A
/// (Hermitian PSD, so its top eigenvalue is ‖A‖²).
pub fn operator_norm(a: &CMat) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    let gram = a.adjoint() * a;
    let eigs = gram.symmetric_eigen().eigenvalues;
    eigs.iter().fold(0.0f64, |acc, &v| acc.max(v)).max(0.0).sqrt()
}

/// Spectral norm of a Hermitian matrix: max |eigenvalue|. Cheaper and more
/// accurate than the Gram route when Hermitian structure is known.
fn hermitian_norm(a: &CMat) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    let eigs = a.clone().symmetric_eigen().eigenvalues;
    eigs.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()))
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// ‖u*u − 1‖, the unitarity defect.
pub fn unitary_defect(u: &CMat) -> f64 {
    let n = u.nrows();
    hermitian_norm(&(u.adjoint() * u - identity(n)))
}

/// Group indices of `vals` into clusters: sort, then split where consecutive
/// values differ by more than `tol`.
fn cluster_sorted(vals: &DVector<f64>, tol: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for idx in order {
        match clusters.last_mut() {
            Some(c) if vals[idx] - vals[*c.last().unwrap()] <= tol => c.push(idx),
            _ => clusters.push(vec![idx]),
        }
    }
    clusters
}

/// Two-pass modified Gram–Schmidt on the columns of `m` (assumed already
/// close to orthonormal, so no pivoting is needed).
fn orthonormalize_columns(m: &mut CMat) {
    let n = m.ncols();
    for _ in 0..2 {
        for j in 0..n {
            for k in 0..j {
                let proj = m.column(k).dotc(&m.column(j));
                let adj = m.column(k) * proj;
                let col = m.column(j) - adj;
                m.set_column(j, &col);
            }
            let norm = m.column(j).norm();
            if norm > 0.0 {
                let col = m.column(j) / Complex64::new(norm, 0.0);
                m.set_column(j, &col);
            }
        }
    }
}

fn offdiag_frobenius(t: &CMat) -> f64 {
    let mut s = 0.0;
    for i in 0..t.nrows() {
        for j in 0..t.ncols() {
            if i != j {
                s += t[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Drive V*xV toward diagonal by first-order similarity corrections.
///
/// With T = V*xV = D + F, the update W_ij = T_ij / (T_jj − T_ii) cancels the
/// coupling of every pair whose diagonal gap dominates the residual; pairs
/// below the gap threshold are left alone — for a normal x their coupling is
/// bounded by the local spectral spread, so it shrinks along with F. Each
/// sweep recomputes T from the original x, so errors do not accumulate.
fn diagonal_refine(x: &CMat, mut v: CMat, norm: f64) -> CMat {
    let n = x.nrows();
    let floor = 32.0 * n as f64 * f64::EPSILON * norm.max(1.0);
    let mut best: Option<(f64, CMat)> = None;
    let mut prev = f64::INFINITY;
    let mut stalled = 0u32;
    for _ in 0..60 {
        let t = v.adjoint() * x * &v;
        let off = offdiag_frobenius(&t);
        if best.as_ref().map_or(true, |(b, _)| off < *b) {
            best = Some((off, v.clone()));
        }
        if off <= floor {
            break;
        }
        stalled = if off > 0.9 * prev { stalled + 1 } else { 0 };
        if stalled >= 3 {
            break;
        }
        prev = off;
        let theta = (4.0 * off).max(floor);
        let mut w = CMat::zeros(n, n);
        let mut touched = false;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let gap = t[(j, j)] - t[(i, i)];
                if gap.norm() >= theta {
                    w[(i, j)] = t[(i, j)] / gap;
                    touched = true;
                }
            }
        }
        if !touched {
            break;
        }
        v = &v * (identity(n) + w);
        orthonormalize_columns(&mut v);
    }
    best.map(|(_, b)| b).unwrap_or(v)
}

/// Unitary diagonalization of a (pre-verified) normal matrix.
///
/// Splits x = a + ib into commuting Hermitian parts, diagonalizes a, then
/// diagonalizes b restricted to each a-eigenspace (the eigenspaces of a are
/// invariant under b exactly because the parts commute). That two-stage basis
/// is accurate to ~eps/gap where a has close-but-distinct eigenvalues, so a
/// refinement sweep follows to pull the residual down to the eps floor.
/// Eigenvalues are read off as Rayleigh quotients of x itself.
fn normal_eigen(x: &CMat, norm: f64) -> Result<(CMat, Vec<Complex64>)> {
    let n = x.nrows();
    let i = Complex64::new(0.0, 1.0);
    let a = (x + x.adjoint()).map(|v| v / Complex64::new(2.0, 0.0));
    let b = (x - x.adjoint()).map(|v| v / (Complex64::new(2.0, 0.0) * i));

    let ea = a.symmetric_eigen();
    let tol = 1e-8 * norm.max(1.0);
    let clusters = cluster_sorted(&ea.eigenvalues, tol);

    let mut basis = CMat::zeros(n, n);
    let mut col = 0usize;
    for cluster in clusters {
        let k = cluster.len();
        let mut q = CMat::zeros(n, k);
        for (j, &idx) in cluster.iter().enumerate() {
            q.set_column(j, &ea.eigenvectors.column(idx));
        }
        // b restricted to the a-eigenspace: Hermitian k×k block
        let bq = q.adjoint() * &b * &q;
        let eb = bq.symmetric_eigen();
        let u = &q * &eb.eigenvectors;
        for j in 0..k {
            basis.set_column(col, &u.column(j));
            col += 1;
        }
    }

    let basis = diagonal_refine(x, basis, norm);
    let t = basis.adjoint() * x * &basis;
    let eigenvalues: Vec<Complex64> = (0..n).map(|j| t[(j, j)]).collect();

    // canonical column order: eigenvalues lexicographic in (re, im)
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| lex_cmp(eigenvalues[p], eigenvalues[q]));
    let mut sorted_basis = CMat::zeros(n, n);
    let mut sorted_eigs = Vec::with_capacity(n);
    for (j, &p) in order.iter().enumerate() {
        sorted_basis.set_column(j, &basis.column(p));
        sorted_eigs.push(eigenvalues[p]);
    }
    Ok((sorted_basis, sorted_eigs))
}

/// An n×n normal matrix with cached spectral data. Construction certifies
/// the normality defect and the backward error of the diagonalization;
/// instances are immutable afterwards.
#[derive(Clone, Debug)]
pub struct NormalMatrix {
    mat: CMat,
    norm: f64,
    defect: f64,
    eigenvalues: Vec<Complex64>,
    basis: CMat,
}

impl NormalMatrix {
    pub fn new(mat: CMat) -> Result<NormalMatrix> {
        let n = mat.nrows();
        if n == 0 || mat.ncols() != n {
            return Err(Error::DimensionMismatch(mat.nrows(), mat.ncols()));
        }
        if mat.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        let norm = operator_norm(&mat);
        let commutator = &mat * mat.adjoint() - mat.adjoint() * &mat;
        let defect = hermitian_norm(&commutator);
        let tol = 1e-10 * (norm * norm).max(1.0);
        if defect > tol {
            return Err(Error::NotNormal { defect, tol });
        }
        let (basis, eigenvalues) = normal_eigen(&mat, norm)?;
        let mut recon = CMat::zeros(n, n);
        for j in 0..n {
            recon.set_column(j, &(basis.column(j) * eigenvalues[j]));
        }
        let residual = operator_norm(&(&recon * basis.adjoint() - &mat));
        let budget = 1e-9 * norm.max(1.0);
        if residual > budget {
            return Err(Error::EigenFailure(format!(
                "diagonalization backward error {residual:.3e} exceeds {budget:.3e}"
            )));
        }
        Ok(NormalMatrix { mat, norm, defect, eigenvalues, basis })
    }

    /// diag(entries) — the workhorse for realized finite-dimensional maps.
    pub fn diagonal(entries: &[Complex64]) -> Result<NormalMatrix> {
        let n = entries.len();
        let mat = CMat::from_fn(n, n, |r, c| {
            if r == c {
                entries[r]
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        NormalMatrix::new(mat)
    }

    pub fn n(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    /// Cached operator norm.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// ‖xx* − x*x‖.
    pub fn normality_defect(&self) -> f64 {
        self.defect
    }

    /// Spectrum with multiplicity, sorted lexicographically.
    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    /// Unitary eigenbasis, columns aligned with `eigenvalues()`.
    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    /// Continuous functional calculus f(x) = u·diag(f(λᵢ))·u*.
    pub fn functional_calculus(&self, f: &SampledFn) -> Result<NormalMatrix> {
        let n = self.n();
        let mut fvals = Vec::with_capacity(n);
        for &lambda in &self.eigenvalues {
            match f.eval(lambda) {
                Some(v) => fvals.push(v),
                None => {
                    return Err(Error::UndefinedAtEigenvalue {
                        name: f.name().to_string(),
                        re: lambda.re,
                        im: lambda.im,
                    })
                }
            }
        }
        let mut scaled = CMat::zeros(n, n);
        for j in 0..n {
            scaled.set_column(j, &(self.basis.column(j) * fvals[j]));
        }
        NormalMatrix::new(scaled * self.basis.adjoint())
    }

    /// uxu* for unitary u; spectrum is preserved.
    pub fn conjugate(&self, u: &CMat) -> Result<NormalMatrix> {
        if u.nrows() != self.n() || u.ncols() != self.n() {
            return Err(Error::DimensionMismatch(u.nrows(), u.ncols()));
        }
        let defect = unitary_defect(u);
        if defect > 1e-10 {
            return Err(Error::NotUnitary { defect });
        }
        NormalMatrix::new(u * &self.mat * u.adjoint())
    }
}

/// A continuous function carried as a point evaluator (None = undefined
/// there) plus an explicit Lipschitz constant for error reporting.
pub struct SampledFn {
    name: String,
    lipschitz: f64,
    eval: Box<dyn Fn(Complex64) -> Option<Complex64> + Send + Sync>,
}

impl SampledFn {
    pub fn new<F>(name: impl Into<String>, lipschitz: f64, eval: F) -> SampledFn
    where
        F: Fn(Complex64) -> Option<Complex64> + Send + Sync + 'static,
    {
        SampledFn { name: name.into(), lipschitz, eval: Box::new(eval) }
    }

    /// Total functions (defined on all of ℂ).
    pub fn total<F>(name: impl Into<String>, lipschitz: f64, eval: F) -> SampledFn
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        SampledFn { name: name.into(), lipschitz, eval: Box::new(move |z| Some(eval(z))) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn eval(&self, z: Complex64) -> Option<Complex64> {
        (self.eval)(z)
    }
}

impl std::fmt::Debug for SampledFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SampledFn({}, L={})", self.name, self.lipschitz)
    }
}

/// Least 1-based N such that ‖f(x_m) − f(x)‖ < eps for every f in the basket
/// and every tested m ≥ N (m up to the sequence length). Errors if even the
/// final element violates the bound.
pub fn convergence_check(
    xs: &[NormalMatrix],
    x: &NormalMatrix,
    basket: &[SampledFn],
    eps: f64,
) -> Result<usize> {
    if xs.is_empty() {
        return Err(Error::NoConvergence("empty sequence".into()));
    }
    let fx: Vec<NormalMatrix> =
        basket.iter().map(|f| x.functional_calculus(f)).collect::<Result<_>>()?;
    let mut worst = Vec::with_capacity(xs.len());
    for xm in xs {
        let mut d = 0.0f64;
        for (f, fxk) in basket.iter().zip(&fx) {
            let fm = xm.functional_calculus(f)?;
            d = d.max(operator_norm(&(fm.mat() - fxk.mat())));
        }
        worst.push(d);
    }
    let last_bad = worst.iter().rposition(|&d| d >= eps);
    match last_bad {
        None => Ok(1),
        Some(j) if j + 1 < worst.len() => Ok(j + 2),
        Some(_) => Err(Error::NoConvergence(format!(
            "final sequence element still violates eps = {eps:.3e}"
        ))),
    }
}

/// Left side and certified right side of the monomial perturbation bound:
/// ‖(x_n*)ˢ x_nᵗ − (x*)ˢ xᵗ‖ ≤ (s+t)·M^{s+t}·‖x_n − x‖ with M any common
/// norm bound ≥ 1 (here max(1, ‖x_n‖, ‖x‖)).
pub fn monomial_bound(xn: &NormalMatrix, x: &NormalMatrix, s: u32, t: u32) -> (f64, f64) {
    fn word(m: &CMat, s: u32, t: u32) -> CMat {
        let n = m.nrows();
        let mut acc = identity(n);
        for _ in 0..s {
            acc = &acc * m.adjoint();
        }
        for _ in 0..t {
            acc = acc * m;
        }
        acc
    }
    let lhs = operator_norm(&(word(xn.mat(), s, t) - word(x.mat(), s, t)));
    let m = xn.norm().max(x.norm()).max(1.0);
    let rhs = f64::from(s + t) * m.powi((s + t) as i32) * operator_norm(&(xn.mat() - x.mat()));
    (lhs, rhs)
}

/// Hausdorff distance between two finite nonempty point sets in ℂ.
pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "hausdorff of empty set");
    let one_sided = |from: &[Complex64], to: &[Complex64]| {
        from.iter()
            .map(|p| to.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0f64, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}

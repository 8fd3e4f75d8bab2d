//! Eigensolvers, norms, exponentials and scaling fits.

use nalgebra::SymmetricEigen;
use num_complex::Complex;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::LinOp;
use crate::scalar::{cone, czero, fro, CMat, Real};

/// Hermitian part of `m` divided by its largest entry, and that entry.
///
/// Tiny residual matrices otherwise drive the QR sweeps into subnormals and NaN.
fn normalized_hermitian<T: Real>(m: &CMat<T>) -> (CMat<T>, T) {
    let h = (m + m.adjoint()).scale(T::lit(0.5));
    let s = crate::scalar::max_abs(&h);
    if s > T::zero() {
        (h.unscale(s), s)
    } else {
        (h, T::one())
    }
}

/// Symmetric QR eigensolver; retries on a shifted copy when the sweeps produce NaN.
fn stable_eigen<T: Real>(h: CMat<T>) -> SymmetricEigen<Complex<T>, nalgebra::Dyn> {
    let n = h.nrows();
    let se = SymmetricEigen::new(h.clone());
    if se.eigenvalues.iter().all(|x| x.is_finite()) {
        return se;
    }
    for shift in [0.37, 0.73, 1.31] {
        let s = T::lit(shift);
        let mut se = SymmetricEigen::new(&h + CMat::<T>::identity(n, n).scale(s));
        if se.eigenvalues.iter().all(|x| x.is_finite()) {
            se.eigenvalues.iter_mut().for_each(|x| *x -= s);
            return se;
        }
    }
    se
}

/// Hermitian eigendecomposition with ascending eigenvalues.
pub fn hermitian_eig<T: Real>(m: &CMat<T>) -> (Vec<T>, CMat<T>) {
    let (h, s) = normalized_hermitian(m);
    let se = stable_eigen(h);
    let mut idx: Vec<usize> = (0..se.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).expect("finite eigenvalues"));
    let vals = idx.iter().map(|&i| se.eigenvalues[i] * s).collect();
    let mut vecs = CMat::<T>::zeros(m.nrows(), idx.len());
    for (k, &i) in idx.iter().enumerate() {
        vecs.set_column(k, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn eigvalsh<T: Real>(m: &CMat<T>) -> Vec<T> {
    let (h, s) = normalized_hermitian(m);
    let mut v: Vec<T> = h.clone().symmetric_eigenvalues().iter().copied().collect();
    if v.iter().any(|x| !x.is_finite()) {
        v = stable_eigen(h).eigenvalues.iter().copied().collect();
    }
    let mut v: Vec<T> = v.into_iter().map(|x| x * s).collect();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    v
}

/// Spectral (2-)norm of a dense matrix.
pub fn spectral_norm<T: Real>(m: &CMat<T>) -> T {
    if m.is_square() && fro(&(m - m.adjoint())) <= T::lit(1e-13) * fro(m) {
        let v = eigvalsh(m);
        return match (v.first(), v.last()) {
            (Some(a), Some(b)) => a.abs().max(b.abs()),
            _ => T::zero(),
        };
    }
    let g = if m.nrows() <= m.ncols() { matmul(m, &m.adjoint()) } else { matmul(&m.adjoint(), m) };
    let top = eigvalsh(&g).last().copied().unwrap_or_else(T::zero);
    top.max(T::zero()).sqrt()
}

/// Complex product through real products of the real and imaginary parts.
pub fn matmul<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    if a.nrows() * a.ncols() * b.ncols() < 32 * 32 * 32 {
        return a * b;
    }
    let (ar, ai) = (a.map(|z| z.re), a.map(|z| z.im));
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    CMat::<T>::from_fn(a.nrows(), b.ncols(), |i, j| Complex::new(re[(i, j)], im[(i, j)]))
}

#[derive(Clone, Debug)]
pub struct SpectralDecomposition<T: Real> {
    pub values: Vec<T>,
    pub vectors: CMat<T>,
    pub residuals: Vec<T>,
    /// Half-open index ranges of near-degenerate clusters.
    pub clusters: Vec<(usize, usize)>,
}

impl<T: Real> SpectralDecomposition<T> {
    fn new(values: Vec<T>, vectors: CMat<T>, residuals: Vec<T>, tol: T) -> Self {
        let thr = T::lit(10.0) * tol;
        let mut clusters = Vec::new();
        let mut start = 0;
        for i in 1..=values.len() {
            if i == values.len() || values[i] - values[i - 1] >= thr {
                clusters.push((start, i));
                start = i;
            }
        }
        Self { values, vectors, residuals, clusters }
    }

    /// Dense projector onto the eigenvectors of cluster `k`.
    pub fn cluster_projector(&self, k: usize) -> CMat<T> {
        let (a, b) = self.clusters[k];
        let v = self.vectors.columns(a, b - a);
        v * v.adjoint()
    }

    pub fn cluster_vectors(&self, k: usize) -> CMat<T> {
        let (a, b) = self.clusters[k];
        self.vectors.columns(a, b - a).clone_owned()
    }
}

/// Dense matrix of a linear operator, assembled column block by column block.
pub fn to_dense<T: Real>(op: &dyn LinOp<T>) -> CMat<T> {
    let n = op.dim();
    let mut m = CMat::<T>::zeros(n, n);
    let chunk = 64;
    let mut start = 0;
    while start < n {
        let w = chunk.min(n - start);
        let mut e = CMat::<T>::zeros(n, w);
        for j in 0..w {
            e[(start + j, j)] = cone();
        }
        let y = op.apply(&e);
        m.columns_mut(start, w).copy_from(&y);
        start += w;
    }
    m
}

pub fn random_block<T: Real>(n: usize, k: usize, rng: &mut impl Rng) -> CMat<T> {
    CMat::<T>::from_fn(n, k, |_, _| Complex::new(T::lit(rng.gen::<f64>() - 0.5), T::lit(rng.gen::<f64>() - 0.5)))
}

/// Orthonormalizes the columns of `x` against `basis` and each other; drops dependent columns.
pub fn orth_against<T: Real>(basis: &CMat<T>, x: &CMat<T>, drop_tol: T) -> CMat<T> {
    let mut out: Vec<nalgebra::DVector<Complex<T>>> = Vec::new();
    for j in 0..x.ncols() {
        let mut v = x.column(j).clone_owned();
        let n0 = v.norm();
        if n0.is_zero() {
            continue;
        }
        for _ in 0..2 {
            if basis.ncols() > 0 {
                let coef = basis.adjoint() * &v;
                v -= basis * coef;
            }
            for q in &out {
                let ov = q.dotc(&v);
                v -= q * ov;
            }
        }
        let n1 = v.norm();
        if n1 > drop_tol * n0 {
            out.push(v.unscale(n1));
        }
    }
    let mut m = CMat::<T>::zeros(x.nrows(), out.len());
    for (j, v) in out.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

fn hstack<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    let mut m = CMat::<T>::zeros(a.nrows(), a.ncols() + b.ncols());
    m.columns_mut(0, a.ncols()).copy_from(a);
    m.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    m
}

#[derive(Clone, Debug)]
pub struct EigOptions<T: Real> {
    pub tol: T,
    pub dense_below: usize,
    pub max_basis: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl<T: Real> Default for EigOptions<T> {
    fn default() -> Self {
        Self { tol: T::lit(1e-10), dense_below: 1024, max_basis: 1200, max_restarts: 60, seed: 7 }
    }
}

/// Lowest `k` eigenpairs of a Hermitian operator.
///
/// Small operators are diagonalized densely. Larger ones use a thick-restarted
/// block Krylov method; `start` seeds the first block (e.g. an unperturbed ground space).
pub fn eig_low<T: Real>(
    op: &dyn LinOp<T>,
    k: usize,
    start: Option<&CMat<T>>,
    opts: &EigOptions<T>,
) -> Result<SpectralDecomposition<T>> {
    let n = op.dim();
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds dimension {n}")));
    }
    if n <= opts.dense_below {
        let m = to_dense(op);
        let herm = fro(&(&m - m.adjoint()));
        if herm > T::lit(1e-8) * (T::one() + fro(&m)) {
            return Err(Error::NotHermitian(herm.f64()));
        }
        let (vals, vecs) = hermitian_eig(&m);
        let v = vecs.columns(0, k).clone_owned();
        let r = &m * &v - &v * CMat::<T>::from_diagonal(&nalgebra::DVector::from_fn(k, |i, _| Complex::new(vals[i], T::zero())));
        let res = (0..k).map(|i| r.column(i).norm()).collect();
        return Ok(SpectralDecomposition::new(vals[..k].to_vec(), v, res, opts.tol));
    }
    block_krylov(op, k, start, opts)
}

fn block_krylov<T: Real>(
    op: &dyn LinOp<T>,
    k: usize,
    start: Option<&CMat<T>>,
    opts: &EigOptions<T>,
) -> Result<SpectralDecomposition<T>> {
    use rand::SeedableRng;
    let n = op.dim();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(opts.seed);
    let bs = (k + 2).max(start.map_or(0, |s| s.ncols()));
    let mut block = match start {
        Some(s) => {
            let extra = bs.saturating_sub(s.ncols());
            hstack(s, &random_block(n, extra, &mut rng))
        }
        None => random_block(n, bs, &mut rng),
    };
    let empty = CMat::<T>::zeros(n, 0);
    let mut q = orth_against(&empty, &block, T::lit(1e-12));
    let mut aq = op.apply(&q);
    let mut best = T::max_value().unwrap_or_else(T::one);
    let max_basis = opts.max_basis.min(n);
    for _restart in 0..opts.max_restarts {
        loop {
            let h = q.adjoint() * &aq;
            let (vals, vecs) = hermitian_eig(&h);
            let kk = k.min(vals.len());
            let y = vecs.columns(0, kk).clone_owned();
            let v = &q * &y;
            let av = &aq * &y;
            let mut res = Vec::with_capacity(kk);
            let mut r = av.clone();
            for i in 0..kk {
                let mut col = r.column_mut(i);
                col.axpy(Complex::new(-vals[i], T::zero()), &v.column(i), cone());
                res.push(col.norm());
            }
            let worst = res.iter().copied().fold(T::zero(), T::max);
            best = best.min(worst);
            if kk == k && worst <= opts.tol {
                return Ok(SpectralDecomposition::new(vals[..k].to_vec(), v, res, opts.tol));
            }
            if q.ncols() + bs > max_basis {
                // Thick restart on the lowest Ritz vectors plus current residual directions.
                let keep = (2 * bs).min(vals.len());
                let yk = vecs.columns(0, keep).clone_owned();
                let qk = &q * &yk;
                let aqk = &aq * &yk;
                q = qk;
                aq = aqk;
                block = r;
                break;
            }
            // Expand with the residual block; it spans the Krylov growth direction.
            let mut extra = r.clone();
            if vals.len() > kk {
                let more = (bs - kk).min(vals.len() - kk);
                let y2 = vecs.columns(kk, more).clone_owned();
                let r2 = &aq * &y2 - &q * (&y2 * CMat::<T>::from_diagonal(&nalgebra::DVector::from_fn(more, |i, _| Complex::new(vals[kk + i], T::zero()))));
                extra = hstack(&extra, &r2);
            }
            let add = orth_against(&q, &extra, T::lit(1e-10));
            if add.ncols() == 0 {
                let add = orth_against(&q, &random_block(n, bs, &mut rng), T::lit(1e-10));
                if add.ncols() == 0 {
                    return Err(Error::NoConvergence(best.f64()));
                }
                let aadd = op.apply(&add);
                q = hstack(&q, &add);
                aq = hstack(&aq, &aadd);
                continue;
            }
            let aadd = op.apply(&add);
            q = hstack(&q, &add);
            aq = hstack(&aq, &aadd);
        }
        let add = orth_against(&q, &block, T::lit(1e-10));
        if add.ncols() > 0 {
            let aadd = op.apply(&add);
            q = hstack(&q, &add);
            aq = hstack(&aq, &aadd);
        }
    }
    Err(Error::NoConvergence(best.f64()))
}

/// Operator norm by power iteration on `A†A` (tolerance 1e-10, at most 10^4 steps).
pub fn op_norm<T: Real>(a: &dyn LinOp<T>, a_adj: &dyn LinOp<T>, seed: u64) -> T {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = a.dim();
    let mut x = random_block::<T>(n, 1, &mut rng);
    let nx = x.norm();
    x.unscale_mut(nx);
    let mut last = T::zero();
    for _ in 0..10_000 {
        let y = a_adj.apply(&a.apply(&x));
        let lam = y.norm();
        if lam.is_zero() {
            return T::zero();
        }
        x = y.unscale(lam);
        if (lam - last).abs() <= T::lit(1e-10) * lam {
            return lam.sqrt();
        }
        last = lam;
    }
    last.sqrt()
}

/// Extreme eigenvalues `(min, max)` of a Hermitian operator by Lanczos with full
/// reorthogonalization. Stops when both Ritz values settle to 1e-13 relative.
pub fn lanczos_extremes<T: Real>(a: &dyn LinOp<T>, max_steps: usize, seed: u64) -> (T, T) {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = a.dim();
    let mut q = random_block::<T>(n, 1, &mut rng);
    let nq = q.norm();
    q.unscale_mut(nq);
    let mut basis: Vec<CMat<T>> = Vec::new();
    let (mut alpha, mut beta) = (Vec::<T>::new(), Vec::<T>::new());
    let mut last = (T::zero(), T::zero());
    let mut settled = 0;
    for step in 0..max_steps.min(n) {
        let mut w = a.apply(&q);
        let al = (q.adjoint() * &w)[(0, 0)].re;
        basis.push(q.clone());
        for _ in 0..2 {
            for b in &basis {
                let ov = (b.adjoint() * &w)[(0, 0)];
                w -= b * ov;
            }
        }
        alpha.push(al);
        let m = alpha.len();
        let t = nalgebra::DMatrix::<T>::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                T::zero()
            }
        });
        let ev = SymmetricEigen::new(t).eigenvalues;
        let lo = ev.iter().copied().fold(ev[0], |x, y| x.min(y));
        let hi = ev.iter().copied().fold(ev[0], |x, y| x.max(y));
        let scale = lo.abs().max(hi.abs()).max(T::lit(1e-300));
        let bt = w.norm();
        if bt <= T::lit(1e-10) * scale.max(T::one()) {
            return (lo, hi);
        }
        if step > 0 && (lo - last.0).abs() <= T::lit(1e-13) * scale && (hi - last.1).abs() <= T::lit(1e-13) * scale {
            settled += 1;
            if settled >= 3 {
                return (lo, hi);
            }
        } else {
            settled = 0;
        }
        last = (lo, hi);
        beta.push(bt);
        q = w.unscale(bt);
    }
    last
}

/// Spectral norm of a Hermitian operator from its two extreme eigenvalues.
pub fn hermitian_op_norm<T: Real>(a: &dyn LinOp<T>, seed: u64) -> T {
    let (lo, hi) = lanczos_extremes(a, 400, seed);
    lo.abs().max(hi.abs())
}

/// `exp(S)` for anti-Hermitian `S`, through the eigendecomposition of the Hermitian `iS`.
pub fn expm_antihermitian<T: Real>(s: &CMat<T>) -> CMat<T> {
    let i = Complex::new(T::zero(), T::one());
    let h = s.map(|z| z * i);
    let (vals, vecs) = hermitian_eig(&h);
    let d = nalgebra::DVector::from_fn(vals.len(), |k, _| {
        let th = -vals[k];
        Complex::new(th.cos(), th.sin())
    });
    let mut scaled = vecs.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= d[k];
    }
    matmul(&scaled, &vecs.adjoint())
}

/// Matrix exponential by scaling and squaring with a Taylor core.
pub fn expm<T: Real>(a: &CMat<T>) -> CMat<T> {
    let n = a.nrows();
    let norm = fro(a);
    let mut s = 0u32;
    let mut scale = T::one();
    while norm / scale > T::lit(0.5) {
        scale *= T::lit(2.0);
        s += 1;
    }
    let b = a.unscale(scale);
    let mut term = CMat::<T>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..30 {
        term = matmul(&term, &b) / Complex::new(T::lit(k as f64), T::zero());
        sum += &term;
        if fro(&term) < T::eps() * fro(&sum) {
            break;
        }
    }
    for _ in 0..s {
        sum = matmul(&sum, &sum);
    }
    sum
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares fit of `log y = slope·log x + intercept`.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> LogLogFit {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).filter(|(_, y)| **y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return LogLogFit { slope: f64::NAN, intercept: f64::NAN, r_squared: f64::NAN };
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    LogLogFit { slope, intercept, r_squared }
}

/// Distance between two projectors in spectral norm.
pub fn projector_distance<T: Real>(p: &CMat<T>, q: &CMat<T>) -> T {
    spectral_norm(&(p - q))
}

/// Orthogonal projector onto the column span of `v` (columns assumed orthonormal).
pub fn span_projector<T: Real>(v: &CMat<T>) -> CMat<T> {
    v * v.adjoint()
}

pub fn commutator<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    a * b - b * a
}

pub fn zeros_like<T: Real>(m: &CMat<T>) -> CMat<T> {
    CMat::<T>::from_element(m.nrows(), m.ncols(), czero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    #[test]
    fn diagonal_lowest_two() {
        let m = CMat::<f64>::from_diagonal(&nalgebra::DVector::from_vec(vec![c(3., 0.), c(0., 0.), c(2., 0.), c(1., 0.)]));
        let sd = eig_low(&m, 2, None, &EigOptions::default()).unwrap();
        assert!((sd.values[0]).abs() < 1e-14 && (sd.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn krylov_matches_dense() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 300;
        let a = random_block::<f64>(n, n, &mut rng);
        let h = (&a + a.adjoint()).scale(0.5);
        let dense = eigvalsh(&h);
        let opts = EigOptions { dense_below: 0, max_basis: 120, ..Default::default() };
        let sd = eig_low(&h, 4, None, &opts).unwrap();
        for i in 0..4 {
            assert!((sd.values[i] - dense[i]).abs() < 1e-9, "{} vs {}", sd.values[i], dense[i]);
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = CMat::<f64>::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        assert!(matches!(eig_low(&m, 1, None, &EigOptions::default()), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn expm_agree() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let a = random_block::<f64>(6, 6, &mut rng);
        let s = &a - a.adjoint();
        let e1 = expm_antihermitian(&s);
        let e2 = expm(&s);
        assert!(fro(&(&e1 - &e2)) < 1e-12);
        assert!(fro(&(&e1 * e1.adjoint() - CMat::identity(6, 6))) < 1e-12);
    }

    #[test]
    fn power_iteration_norm() {
        let m = CMat::<f64>::from_diagonal(&nalgebra::DVector::from_vec(vec![c(-3., 0.), c(1., 0.), c(2., 0.)]));
        let nrm = op_norm(&m, &m, 1);
        assert!((nrm - 3.0).abs() < 1e-8);
    }

    #[test]
    fn fit_slope() {
        let xs = [0.04, 0.02, 0.01];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(4)).collect();
        let f = fit_loglog(&xs, &ys);
        assert!((f.slope - 4.0).abs() < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12);
    }
}

//! Local Schrieffer–Wolff expansion on dense desk-scale registers.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::decompose::{local_decompose, max_strength_norm, Component};
use crate::error::{Error, Result};
use crate::gadget::GadgetHamiltonian;
use crate::linalg::{eigvalsh, expm, fit_loglog, matmul, spectral_norm, LogLogFit};
use crate::scalar::{CMat, Real};
use crate::sw_global::SwGlobalSeries;

/// Largest register the dense local expansion accepts.
pub const MAX_LOCAL_DIM: usize = 1 << 10;

#[derive(Clone, Debug)]
pub struct SwLocalSeries<T: Real> {
    pub order: usize,
    /// `T_1..T_n`, dense.
    pub generators: Vec<CMat<T>>,
    /// `V^{(0)}_loc .. V^{(j_max−1)}_loc`, dense.
    pub v_loc: Vec<CMat<T>>,
    /// Region decompositions of `V^{(j)}_loc`, `j < n`.
    pub components: Vec<Vec<Component<T>>>,
    /// `Σ_R (P_R V_R P_R + Q_R V_R Q_R)` built from `V^{(j−1)}_loc`, `j = 1..n`.
    pub block_terms: Vec<CMat<T>>,
    pub h0: CMat<T>,
    pub v: CMat<T>,
}

fn factorial(q: usize) -> f64 {
    (1..=q).map(|k| k as f64).product()
}

/// `Σ_{compositions j_1+…+j_q = m, 1 ≤ j_i ≤ n} ad_{T_{j_1}}⋯ad_{T_{j_q}} X`.
struct NestedSums<'a, T: Real> {
    t: &'a [CMat<T>],
    n: usize,
    base: &'a CMat<T>,
    memo: BTreeMap<(usize, usize), CMat<T>>,
}

impl<T: Real> NestedSums<'_, T> {
    fn get(&mut self, m: usize, q: usize) -> CMat<T> {
        let dim = self.base.nrows();
        if q == 0 {
            return if m == 0 { self.base.clone() } else { CMat::zeros(dim, dim) };
        }
        if m < q {
            return CMat::zeros(dim, dim);
        }
        if let Some(x) = self.memo.get(&(m, q)) {
            return x.clone();
        }
        let mut acc = CMat::<T>::zeros(dim, dim);
        for j1 in 1..=self.n.min(m - q + 1).min(self.t.len()) {
            let inner = self.get(m - j1, q - 1);
            let tj = &self.t[j1 - 1];
            acc += matmul(tj, &inner) - matmul(&inner, tj);
        }
        self.memo.insert((m, q), acc.clone());
        acc
    }
}

/// `V^{(j)}_loc` from the generators available so far.
fn v_loc_term<T: Real>(t: &[CMat<T>], n: usize, h0: &CMat<T>, v: &CMat<T>, j: usize) -> CMat<T> {
    if j == 0 {
        return v.clone();
    }
    let mut a = NestedSums { t, n, base: h0, memo: BTreeMap::new() };
    let mut b = NestedSums { t, n, base: v, memo: BTreeMap::new() };
    let mut acc = CMat::<T>::zeros(v.nrows(), v.ncols());
    for q in 2..=j + 1 {
        acc += a.get(j + 1, q).unscale(T::lit(factorial(q)));
    }
    for q in 1..=j {
        acc += b.get(j, q).unscale(T::lit(factorial(q)));
    }
    acc
}

fn adjoint_apply<T: Real>(f: impl Fn(&CMat<T>) -> CMat<T>, x: &CMat<T>) -> CMat<T> {
    f(&x.adjoint()).adjoint()
}

/// Runs the recursion to order `n`, and continues `V^{(j)}_loc` up to `j_max − 1` with
/// the generators truncated at `n`.
pub fn compute_local_series<T: Real>(g: &GadgetHamiltonian<T>, n: usize, j_max: usize) -> Result<SwLocalSeries<T>> {
    if n == 0 || j_max < n {
        return Err(Error::InvalidArgument("need 1 ≤ n ≤ j_max".into()));
    }
    if g.dim() > MAX_LOCAL_DIM {
        return Err(Error::Resource(format!("dense local expansion on a {}-dim register", g.dim())));
    }
    let reg = &g.model.reg;
    let groups = g.model.site_groups();
    let h0 = g.h0_sparse()?.to_dense();
    let v = g.v_sparse()?.to_dense();
    let mut gens: Vec<CMat<T>> = Vec::new();
    let mut v_loc: Vec<CMat<T>> = Vec::new();
    let mut components = Vec::new();
    let mut block_terms = Vec::new();
    for j in 1..=n {
        let vj = v_loc_term(&gens, n, &h0, &v, j - 1);
        let comps = local_decompose(reg, &groups, &vj, T::zero());
        let dim = vj.nrows();
        let mut tj = CMat::<T>::zeros(dim, dim);
        let mut block = CMat::<T>::zeros(dim, dim);
        for c in &comps {
            let x = c.embed(reg);
            if c.region.is_empty() {
                block += &x;
                continue;
            }
            let pr = |m: &CMat<T>| g.model.apply_sites_projector(&c.region, m);
            let xp = adjoint_apply(pr, &x);
            let a = g.apply_region_resolvent(&c.region, &xp);
            tj += &a - a.adjoint();
            let pxp = pr(&xp);
            let qx = &x - pr(&x);
            let qxq = &qx - adjoint_apply(pr, &qx);
            block += pxp + qxq;
        }
        gens.push(tj);
        v_loc.push(vj);
        components.push(comps);
        block_terms.push(block);
    }
    for j in n..j_max {
        v_loc.push(v_loc_term(&gens, n, &h0, &v, j));
    }
    Ok(SwLocalSeries { order: n, generators: gens, v_loc, components, block_terms, h0, v })
}

impl<T: Real> SwLocalSeries<T> {
    pub fn generator(&self, eps: T) -> CMat<T> {
        let mut t = CMat::<T>::zeros(self.h0.nrows(), self.h0.ncols());
        for (q, tq) in self.generators.iter().enumerate() {
            t += tq.scale(eps.powi(q as i32 + 1));
        }
        t
    }

    /// `H_loc^⟨n⟩ = H0 + Σ_j ε^j Σ_R (P_R V_R P_R + Q_R V_R Q_R)`.
    pub fn h_loc(&self, eps: T) -> CMat<T> {
        let mut h = self.h0.clone();
        for (j, b) in self.block_terms.iter().enumerate() {
            h += b.scale(eps.powi(j as i32 + 1));
        }
        h
    }

    /// `Σ_{j=n+1}^{j_max} ε^j V^{(j−1)}_loc`.
    pub fn garbage(&self, eps: T) -> CMat<T> {
        let mut h = CMat::<T>::zeros(self.h0.nrows(), self.h0.ncols());
        for j in self.order + 1..=self.v_loc.len() {
            h += self.v_loc[j - 1].scale(eps.powi(j as i32));
        }
        h
    }

    /// `e^T H e^{−T}`.
    pub fn rotated(&self, eps: T) -> CMat<T> {
        let e = expm(&self.generator(eps));
        let h = &self.h0 + self.v.scale(eps);
        matmul(&matmul(&e, &h), &e.adjoint())
    }

    /// `U† H_loc^⟨n⟩ U`, optionally with `U† H_garbage U` added.
    pub fn effective(&self, g: &GadgetHamiltonian<T>, eps: T, plus_garbage: bool) -> CMat<T> {
        let u = g.code_basis();
        let mut h = self.h_loc(eps);
        if plus_garbage {
            h += self.garbage(eps);
        }
        u.adjoint() * matmul(&h, u)
    }
}

/// Block-off-diagonal norm `‖P0 X Q0 + Q0 X P0‖`.
pub fn offdiag_norm<T: Real>(g: &GadgetHamiltonian<T>, x: &CMat<T>) -> T {
    let px = g.apply_p0(x);
    let pxq = &px - adjoint_apply(|m| g.apply_p0(m), &px);
    spectral_norm(&(&pxq + pxq.adjoint()))
}

pub fn offdiag_residual<T: Real>(series: &SwLocalSeries<T>, g: &GadgetHamiltonian<T>, eps: T) -> T {
    offdiag_norm(g, &series.rotated(eps))
}

/// Largest norm of a decomposition component on more than `max_sites` sites.
pub fn locality_violation<T: Real>(g: &GadgetHamiltonian<T>, x: &CMat<T>, max_sites: usize) -> T {
    let comps = local_decompose(&g.model.reg, &g.model.site_groups(), x, T::zero());
    let norm = T::lit((g.dim() as f64).sqrt());
    comps.iter().filter(|c| c.region.len() > max_sites).fold(T::zero(), |a, c| a.max(c.hs_norm(&g.model.reg) / norm))
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalityReport {
    /// `(q, violation)` for `T_q` beyond `q+1` sites.
    pub generators: Vec<(usize, f64)>,
    /// `(j, violation)` for `V^{(j)}_loc` beyond `j+2` sites.
    pub v_loc: Vec<(usize, f64)>,
    pub pass: bool,
}

pub fn verify_locality<T: Real>(series: &SwLocalSeries<T>, g: &GadgetHamiltonian<T>, tol: f64) -> LocalityReport {
    let generators: Vec<(usize, f64)> =
        series.generators.iter().enumerate().map(|(i, t)| (i + 1, locality_violation(g, t, i + 2).f64())).collect();
    let v_loc: Vec<(usize, f64)> = series
        .v_loc
        .iter()
        .enumerate()
        .take(series.order + 1)
        .map(|(j, v)| (j, locality_violation(g, v, j + 2).f64()))
        .collect();
    let pass = generators.iter().chain(&v_loc).all(|(_, x)| *x < tol);
    LocalityReport { generators, v_loc, pass }
}

#[derive(Clone, Debug, Serialize)]
pub struct GarbageReport {
    pub order: usize,
    pub j_max: usize,
    pub epsilons: Vec<f64>,
    pub norms: Vec<f64>,
    pub strength_norms: Vec<f64>,
    pub offdiag_residuals: Vec<f64>,
    pub slope: f64,
    pub r_squared: f64,
    pub offdiag_slope: f64,
    /// Fitted `c` in `‖H_garbage‖ ≈ c N ε^{n+1}` at the smallest ε.
    pub c: f64,
    /// Fitted `‖V^{(j)}_loc‖_max ≈ α γ^j`.
    pub alpha: f64,
    pub beta: f64,
    /// `‖e^T H e^{−T} − H_loc − H_garbage‖` per ε.
    pub identity_residuals: Vec<f64>,
}

pub fn garbage_norm<T: Real>(series: &SwLocalSeries<T>, g: &GadgetHamiltonian<T>, epsilons: &[T]) -> GarbageReport {
    let n = series.order;
    let mut norms = Vec::new();
    let mut strength = Vec::new();
    let mut off = Vec::new();
    let mut ident = Vec::new();
    for &eps in epsilons {
        let gb = series.garbage(eps);
        norms.push(spectral_norm(&gb).f64());
        let comps = local_decompose(&g.model.reg, &g.model.site_groups(), &gb, T::zero());
        strength.push(max_strength_norm(&g.model.reg, &comps).f64());
        let rot = series.rotated(eps);
        off.push(offdiag_norm(g, &rot).f64());
        ident.push(spectral_norm(&(&rot - series.h_loc(eps) - &gb)).f64());
    }
    let eps_f: Vec<f64> = epsilons.iter().map(|e| e.f64()).collect();
    let fit = fit_loglog(&eps_f, &norms);
    let off_fit = fit_loglog(&eps_f, &off);
    let k = eps_f.iter().enumerate().fold(0, |k, (i, e)| if *e < eps_f[k] { i } else { k });
    let c = norms[k] / (g.n_sites() as f64 * eps_f[k].powi(n as i32 + 1));
    // Strength constants over j = 0..min(4, available).
    let js: Vec<f64> = (0..series.v_loc.len().min(5)).map(|j| j as f64).collect();
    let ms: Vec<f64> = (0..js.len())
        .map(|j| {
            let comps = local_decompose(&g.model.reg, &g.model.site_groups(), &series.v_loc[j], T::zero());
            max_strength_norm(&g.model.reg, &comps).f64().max(1e-300)
        })
        .collect();
    let (alpha, beta) = strength_constants(&js, &ms, n);
    GarbageReport {
        order: n,
        j_max: series.v_loc.len(),
        epsilons: eps_f,
        norms,
        strength_norms: strength,
        offdiag_residuals: off,
        slope: fit.slope,
        r_squared: fit.r_squared,
        offdiag_slope: off_fit.slope,
        c,
        alpha,
        beta,
        identity_residuals: ident,
    }
}

/// Fits `log m_j = log α + j log γ` and reports `β = n²/γ` (with `Δ0 = 1`).
fn strength_constants(js: &[f64], ms: &[f64], n: usize) -> (f64, f64) {
    if js.len() < 2 {
        return (ms.first().copied().unwrap_or(0.0), f64::INFINITY);
    }
    let ly: Vec<f64> = ms.iter().map(|m| m.ln()).collect();
    let k = js.len() as f64;
    let mx = js.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = js.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = js.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let alpha = (my - slope * mx).exp();
    // Use the envelope so that every measured point lies under α γ^j.
    let gamma = slope.exp();
    let alpha = js.iter().zip(ms).fold(alpha, |a, (j, m)| a.max(m / gamma.powf(*j)));
    (alpha, (n * n) as f64 / gamma)
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub order: usize,
    pub epsilons: Vec<f64>,
    pub deviations: Vec<f64>,
    pub fit: Option<LogLogFit>,
    /// All deviations at rounding level: the two spectra coincide.
    pub exact: bool,
    pub pass: bool,
}

/// Largest deviation between the sorted spectra of the global and local effective Hamiltonians.
pub fn compare_global_local<T: Real>(
    gseries: &SwGlobalSeries<T>,
    lseries: &SwLocalSeries<T>,
    g: &GadgetHamiltonian<T>,
    epsilons: &[T],
) -> CompareReport {
    let mut dev = Vec::new();
    for &eps in epsilons {
        let a = eigvalsh(&gseries.effective(eps));
        let b = eigvalsh(&lseries.effective(g, eps, false));
        dev.push(a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((*x - *y).abs().f64())));
    }
    let eps_f: Vec<f64> = epsilons.iter().map(|e| e.f64()).collect();
    let fit = (eps_f.len() >= 2 && dev.iter().all(|&d| d > 0.0)).then(|| fit_loglog(&eps_f, &dev));
    let exact = dev.iter().all(|&d| d < 1e-12);
    let n = gseries.order as f64;
    let pass = exact || fit.as_ref().is_some_and(|f| f.slope >= n + 0.8);
    CompareReport { order: gseries.order, epsilons: eps_f, deviations: dev, fit, exact, pass }
}

/// Site sets carrying nonzero components of each `V^{(j)}_loc`, for reporting.
pub fn component_regions<T: Real>(series: &SwLocalSeries<T>) -> Vec<Vec<BTreeSet<usize>>> {
    series.components.iter().map(|cs| cs.iter().map(|c| c.region.clone()).collect()).collect()
}

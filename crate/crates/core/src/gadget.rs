//! Code-gadget Hamiltonian `H = Σ_s Q_s − ε Σ_e M_e` and its resolvents.

use std::collections::BTreeSet;

use num_complex::Complex;
use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::linalg::random_block;
use crate::operator::{apply_local, kron_embed, FnOp, LinOp, SparseOperator};
use crate::peps::{entangled_edge_projector, PepsModel};
use crate::scalar::{cone, cr, czero, CMat, Real};

pub fn harmonic(n: usize) -> f64 {
    (1..=n).map(|j| 1.0 / j as f64).sum()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Default Δ̃ = 2·h_{r_star} + 1.
pub fn default_delta_tilde(r_star: usize) -> f64 {
    2.0 * harmonic(r_star) + 1.0
}

#[derive(Clone, Debug)]
pub struct GadgetHamiltonian<T: Real> {
    pub model: PepsModel<T>,
    /// Per-site unitary whose leading rows span the code space.
    rot: Vec<Option<CMat<T>>>,
    /// Excitation bitmask of every basis state of the rotated register.
    masks: Vec<u64>,
    code: CMat<T>,
}

impl<T: Real> GadgetHamiltonian<T> {
    pub fn new(model: PepsModel<T>) -> Self {
        assert!(model.n_sites() <= 64, "at most 64 sites");
        let rot: Vec<Option<CMat<T>>> = model
            .maps
            .iter()
            .map(|m| if m.code_dim() == m.matrix.ncols() { None } else { Some(m.completed_unitary()) })
            .collect();
        let n = model.reg.total_dim();
        let mut masks = vec![0u64; n];
        for s in 0..model.n_sites() {
            let q = model.site_qudits(s);
            let Some(&last) = q.last() else { continue };
            let stride = model.reg.stride(last);
            let dv = model.maps[s].matrix.ncols();
            let d = model.maps[s].code_dim();
            for (i, m) in masks.iter_mut().enumerate() {
                if (i / stride) % dv >= d {
                    *m |= 1 << s;
                }
            }
        }
        let code = model.code_basis();
        Self { model, rot, masks, code }
    }

    pub fn dim(&self) -> usize {
        self.model.reg.total_dim()
    }

    pub fn n_sites(&self) -> usize {
        self.model.n_sites()
    }

    /// Orthonormal basis of the range of P0.
    pub fn code_basis(&self) -> &CMat<T> {
        &self.code
    }

    fn rotate(&self, x: &CMat<T>, inverse: bool) -> CMat<T> {
        let mut y = x.clone();
        for (s, r) in self.rot.iter().enumerate() {
            if let Some(u) = r {
                let op = if inverse { u.adjoint() } else { u.clone() };
                y = apply_local(&self.model.reg, &self.model.site_qudits(s), &op, &y);
            }
        }
        y
    }

    /// Applies a function of the excitation pattern, diagonal in the P_s/Q_s decomposition.
    pub fn pattern_apply(&self, x: &CMat<T>, weight: impl Fn(u64) -> Complex<T>) -> CMat<T> {
        let mut y = self.rotate(x, false);
        let mut cache: std::collections::HashMap<u64, Complex<T>> = std::collections::HashMap::new();
        for (i, &m) in self.masks.iter().enumerate() {
            let w = *cache.entry(m).or_insert_with(|| weight(m));
            if w != cone() {
                for c in 0..y.ncols() {
                    y[(i, c)] *= w;
                }
            }
        }
        self.rotate(&y, true)
    }

    pub fn apply_h0(&self, x: &CMat<T>) -> CMat<T> {
        self.pattern_apply(x, |m| cr(T::lit(m.count_ones() as f64)))
    }

    pub fn apply_v(&self, x: &CMat<T>) -> CMat<T> {
        self.model.apply_v(x)
    }

    pub fn apply_full(&self, eps: T, x: &CMat<T>) -> CMat<T> {
        self.apply_h0(x) + self.apply_v(x).scale(eps)
    }

    pub fn apply_p0(&self, x: &CMat<T>) -> CMat<T> {
        &self.code * (self.code.adjoint() * x)
    }

    pub fn apply_q0(&self, x: &CMat<T>) -> CMat<T> {
        x - self.apply_p0(x)
    }

    /// `(Q0/H0)^k`.
    pub fn apply_resolvent(&self, k: u32, x: &CMat<T>) -> CMat<T> {
        self.pattern_apply(x, |m| {
            let n = m.count_ones();
            if n == 0 { czero() } else { cr(T::one() / T::lit(n as f64).powi(k as i32)) }
        })
    }

    /// `g_q`: `g_0 = P0`, `g_q = Δ̃^q P0 + Q0/H0^q` for q ≥ 1, `g_q = Δ̃^{|q|} P0` for q ≤ −1.
    pub fn apply_g(&self, q: i32, delta_tilde: T, x: &CMat<T>) -> CMat<T> {
        let p0w = if q == 0 { T::one() } else { delta_tilde.powi(q.abs()) };
        self.pattern_apply(x, |m| {
            let n = m.count_ones();
            if n == 0 {
                cr(p0w)
            } else if q >= 1 {
                cr(T::one() / T::lit(n as f64).powi(q))
            } else {
                czero()
            }
        })
    }

    /// `g̃ = Δ̃ P0 + Q0/H0` via the excitation-pattern decomposition.
    pub fn apply_tilde_g(&self, delta_tilde: T, x: &CMat<T>) -> CMat<T> {
        self.apply_g(1, delta_tilde, x)
    }

    /// `Q_R/H_R` with `H_R = Σ_{s∈R} Q_s`.
    pub fn apply_region_resolvent(&self, region: &BTreeSet<usize>, x: &CMat<T>) -> CMat<T> {
        let rm = region.iter().fold(0u64, |a, &s| a | 1 << s);
        self.pattern_apply(x, |m| {
            let n = (m & rm).count_ones();
            if n == 0 { czero() } else { cr(T::one() / T::lit(n as f64)) }
        })
    }

    pub fn apply_region_projector(&self, region: &BTreeSet<usize>, x: &CMat<T>) -> CMat<T> {
        self.model.apply_sites_projector(region, x)
    }

    /// Closed form of `g̃(R)` from explicit site-projector products.
    pub fn apply_tilde_g_closed(&self, region: &BTreeSet<usize>, delta_tilde: T, x: &CMat<T>) -> CMat<T> {
        let r = region.len();
        let all: BTreeSet<usize> = (0..self.n_sites()).collect();
        let outside: BTreeSet<usize> = all.difference(region).copied().collect();
        let base = self.model.apply_sites_projector(&outside, x);
        let p0 = self.model.apply_sites_projector(region, &base);
        let mut y = p0.scale(delta_tilde - T::lit(harmonic(r)));
        let rv: Vec<usize> = region.iter().copied().collect();
        for mask in 0..(1usize << r) {
            let sub: BTreeSet<usize> = (0..r).filter(|i| mask >> i & 1 == 1).map(|i| rv[i]).collect();
            let j = r - sub.len();
            if j == 0 {
                continue;
            }
            let coef = 1.0 / (j as f64 * binomial(r, j));
            y += self.model.apply_sites_projector(&sub, &base).scale(T::lit(coef));
        }
        y
    }

    /// Closed-form `g̃(R)` as a sparse operator.
    pub fn tilde_g_closed_form(&self, region: &BTreeSet<usize>, delta_tilde: T) -> Result<SparseOperator<T>> {
        let reg = &self.model.reg;
        let proj = |sites: &BTreeSet<usize>| -> Result<SparseOperator<T>> {
            let mut p = SparseOperator::identity(reg);
            for &s in sites {
                p = p.matmul(&kron_embed(&self.model.maps[s].projector, &self.model.site_qudits(s), reg)?);
            }
            Ok(p)
        };
        let r = region.len();
        let all: BTreeSet<usize> = (0..self.n_sites()).collect();
        let outside: BTreeSet<usize> = all.difference(region).copied().collect();
        let p_out = proj(&outside)?;
        let mut g = p_out.matmul(&proj(region)?).scale(cr(delta_tilde - T::lit(harmonic(r))));
        let rv: Vec<usize> = region.iter().copied().collect();
        for mask in 0..(1usize << r) {
            let sub: BTreeSet<usize> = (0..r).filter(|i| mask >> i & 1 == 1).map(|i| rv[i]).collect();
            let j = r - sub.len();
            if j == 0 {
                continue;
            }
            let coef = cr(T::lit(1.0 / (j as f64 * binomial(r, j))));
            g = g.axpby(cone(), &proj(&sub)?.matmul(&p_out), coef);
        }
        Ok(g)
    }

    pub fn h0_sparse(&self) -> Result<SparseOperator<T>> {
        let reg = &self.model.reg;
        let mut h = SparseOperator::zero(reg);
        for s in 0..self.n_sites() {
            let dv = self.model.maps[s].matrix.ncols();
            let q = CMat::<T>::identity(dv, dv) - &self.model.maps[s].projector;
            h = h.add(&kron_embed(&q, &self.model.site_qudits(s), reg)?);
        }
        Ok(h)
    }

    pub fn v_sparse(&self) -> Result<SparseOperator<T>> {
        let mut v = SparseOperator::zero(&self.model.reg);
        for e in 0..self.model.graph.edges.len() {
            v = v.axpby(cone(), &entangled_edge_projector(&self.model, e)?, -cone::<T>());
        }
        Ok(v)
    }

    pub fn full_sparse(&self, eps: T) -> Result<SparseOperator<T>> {
        Ok(self.h0_sparse()?.axpby(cone(), &self.v_sparse()?, cr(eps)))
    }

    /// P0 as a sparse operator.
    pub fn ground_projector(&self) -> Result<SparseOperator<T>> {
        let reg = &self.model.reg;
        let mut p = SparseOperator::identity(reg);
        for s in 0..self.n_sites() {
            p = p.matmul(&kron_embed(&self.model.maps[s].projector, &self.model.site_qudits(s), reg)?);
        }
        p.hermitian = true;
        Ok(p)
    }

    pub fn full_op(&self, eps: T) -> impl LinOp<T> + '_ {
        FnOp { dim: self.dim(), f: move |x: &CMat<T>| self.apply_full(eps, x) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ResolventReport {
    pub region: Vec<usize>,
    pub delta_tilde: f64,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub pass: bool,
}

/// Compares the closed-form `g̃(R)` with the spectral `Δ̃P0 + Q0/H0` on random states
/// whose excitations lie inside `R`.
pub fn verify_resolvent_equivalence<T: Real>(
    g: &GadgetHamiltonian<T>,
    region: &BTreeSet<usize>,
    delta_tilde: T,
    trials: usize,
    rng: &mut impl Rng,
) -> ResolventReport {
    let all: BTreeSet<usize> = (0..g.n_sites()).collect();
    let outside: BTreeSet<usize> = all.difference(region).copied().collect();
    let raw = random_block::<T>(g.dim(), trials, rng);
    let x = g.model.apply_sites_projector(&outside, &raw);
    let closed = g.apply_tilde_g_closed(region, delta_tilde, &x);
    let spectral = g.apply_tilde_g(delta_tilde, &x);
    let residuals: Vec<f64> = (0..trials)
        .map(|c| {
            let nx = x.column(c).norm();
            ((closed.column(c) - spectral.column(c)).norm() / nx.max(T::eps())).f64()
        })
        .collect();
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    ResolventReport {
        region: region.iter().copied().collect(),
        delta_tilde: delta_tilde.f64(),
        residuals,
        max_residual,
        pass: max_residual < 1e-10,
    }
}

/// Random isometric maps of code dimension `d` on every site.
pub fn random_isometric_model<T: Real>(
    graph: crate::lattice::PepsGraph,
    bond_dim: usize,
    d: usize,
    rng: &mut impl Rng,
) -> Result<PepsModel<T>> {
    let dims = vec![d; graph.n_sites()];
    random_isometric_model_dims(graph, bond_dim, &dims, rng)
}

/// Random isometric maps with per-site code dimensions (capped by the virtual dimension).
pub fn random_isometric_model_dims<T: Real>(
    graph: crate::lattice::PepsGraph,
    bond_dim: usize,
    dims: &[usize],
    rng: &mut impl Rng,
) -> Result<PepsModel<T>> {
    let mut mats = Vec::new();
    for (&deg, &d) in graph.degree.iter().zip(dims) {
        let dv = bond_dim.pow(deg as u32);
        let a = random_block::<T>(dv, d.min(dv), rng);
        let q = crate::linalg::orth_against(&CMat::<T>::zeros(dv, 0), &a, T::lit(1e-8));
        mats.push(q.adjoint());
    }
    PepsModel::new(graph, bond_dim, mats)
}

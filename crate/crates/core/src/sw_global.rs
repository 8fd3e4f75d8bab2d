//! Global Schrieffer–Wolff expansion.
//!
//! Generators are kept in low-rank form `S_j = Y_j U† − U Y_j†` where `U` spans the
//! code space, so every operator product reduces to block applications on `n × d`
//! matrices. The same expansion is also carried out symbolically over words in
//! `V`, `P0`, `(Q0/H0)^k` with exact rational coefficients, which gives the Γ
//! decomposition and an independent route to every effective term.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::decompose::{local_decompose, Component};
use crate::error::{Error, Result};
use crate::gadget::GadgetHamiltonian;
use crate::lattice::{enumerate_connected_regions, PepsGraph};
use crate::linalg::{fit_loglog, hermitian_eig, projector_distance, spectral_norm, span_projector, LogLogFit};
use crate::operator::QuditRegister;
use crate::scalar::{fro, CMat, Real};
use crate::words::{chain_letters, diag_part, offdiag_part, superop_l, Letter, Poly};

/// Exact Bernoulli numbers (`B_1 = −1/2`) and the derived series coefficients.
#[derive(Clone, Debug)]
pub struct CoefficientTable {
    pub bernoulli: Vec<BigRational>,
    pub max_order: usize,
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * BigInt::from(k))
}

fn binom(n: usize, k: usize) -> BigInt {
    factorial(n) / (factorial(k) * factorial(n - k))
}

impl CoefficientTable {
    pub fn new(max_order: usize) -> Self {
        let top = max_order + 2;
        let mut b: Vec<BigRational> = vec![BigRational::one()];
        for n in 1..=top {
            let mut s = BigRational::zero();
            for (k, bk) in b.iter().enumerate() {
                s += BigRational::from_integer(binom(n + 1, k)) * bk;
            }
            b.push(-s / BigRational::from_integer(BigInt::from(n + 1)));
        }
        Self { bernoulli: b, max_order }
    }

    /// `a_i = 2^i B_i / i!`.
    pub fn a(&self, i: usize) -> BigRational {
        let two = BigRational::from_integer(BigInt::from(2));
        num_traits::pow(two, i) * &self.bernoulli[i] / BigRational::from_integer(factorial(i))
    }

    /// `b_{2i−1} = 2(2^{2i} − 1) B_{2i} / (2i)!`, indexed by `i`.
    pub fn b(&self, i: usize) -> BigRational {
        let pow = BigInt::from(2).pow(2 * i as u32) - 1;
        BigRational::from_integer(BigInt::from(2) * pow) * &self.bernoulli[2 * i] / BigRational::from_integer(factorial(2 * i))
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

// ---------------------------------------------------------------------------
// Symbolic expansion

/// The expansion over words: generators `S_j` and sandwiched terms `P V^{(j−1)} P`.
#[derive(Clone, Debug)]
pub struct SymbolicSeries {
    pub order: usize,
    pub generators: Vec<Poly>,
    /// Index `j−1` holds the order-`j` term.
    pub effective: Vec<Poly>,
}

struct SymbolicW<'a> {
    s: &'a [Poly],
    vod: Poly,
    memo: BTreeMap<(usize, usize), Poly>,
}

impl SymbolicW<'_> {
    fn get(&mut self, k: usize, m: usize) -> Poly {
        if m == 0 {
            return if k == 0 { self.vod.clone() } else { Poly::zero() };
        }
        if k < m {
            return Poly::zero();
        }
        if let Some(p) = self.memo.get(&(k, m)) {
            return p.clone();
        }
        let mut acc = Poly::zero();
        for j1 in 1..=k - m + 1 {
            let inner = self.get(k - j1, m - 1);
            if !inner.is_zero() {
                acc = acc.add(&self.s[j1 - 1].commutator(&inner));
            }
        }
        self.memo.insert((k, m), acc.clone());
        acc
    }
}

/// Runs the recursion symbolically up to effective order `n`.
pub fn symbolic_series(n: usize, coeffs: &CoefficientTable) -> SymbolicSeries {
    let v = Poly::v();
    let vd = diag_part(&v);
    let vod = offdiag_part(&v);
    let mut s: Vec<Poly> = Vec::new();
    let mut effective = Vec::new();
    for j in 1..=n {
        // Effective term of order j uses S_1..S_{j−1}.
        let term = if j == 1 {
            v.sandwich_p()
        } else {
            let mut w = SymbolicW { s: &s, vod: vod.clone(), memo: BTreeMap::new() };
            let mut acc = Poly::zero();
            for i in 1..=j / 2 {
                acc = acc.add(&w.get(j - 1, 2 * i - 1).sandwich_p().scale(&coeffs.b(i)));
            }
            acc
        };
        effective.push(term);
        // S_j, needed for the next order.
        if j < n {
            let sj = if j == 1 {
                superop_l(&v)
            } else {
                let mut x = s[j - 2].commutator(&vd);
                let mut w = SymbolicW { s: &s, vod: vod.clone(), memo: BTreeMap::new() };
                for i in 1..=(j - 1) / 2 {
                    x = x.add(&w.get(j - 1, 2 * i).scale(&coeffs.a(2 * i)));
                }
                superop_l(&x)
            };
            s.push(sj);
        }
    }
    SymbolicSeries { order: n, generators: s, effective }
}

/// Chains `P V B_1 V … B_m V P` of a sandwiched term, keyed by the inner letters.
pub fn chain_decomposition(term: &Poly) -> Result<BTreeMap<Vec<Letter>, BigRational>> {
    let mut out = BTreeMap::new();
    for (w, c) in &term.terms {
        let letters = chain_letters(w).ok_or_else(|| Error::Unsupported(format!("word is not a P-sandwiched chain: {w:?}")))?;
        out.insert(letters, c.clone());
    }
    Ok(out)
}

/// Γ decomposition via `P0 = g_0` and `R^k = g_k − g_{−k}`.
pub fn gamma_decomposition(term: &Poly) -> Result<BTreeMap<Vec<i32>, BigRational>> {
    let mut out: BTreeMap<Vec<i32>, BigRational> = BTreeMap::new();
    for (letters, c) in chain_decomposition(term)? {
        let mut partial: Vec<(Vec<i32>, BigRational)> = vec![(Vec::new(), c)];
        for l in letters {
            let opts: Vec<(i32, i64)> = match l {
                Letter::P => vec![(0, 1)],
                Letter::R(k) => vec![(k as i32, 1), (-(k as i32), -1)],
                Letter::V => unreachable!("chain letters exclude V"),
            };
            partial = partial
                .into_iter()
                .flat_map(|(q, c)| {
                    opts.iter().map(move |&(qi, s)| {
                        let mut q2 = q.clone();
                        q2.push(qi);
                        (q2, &c * BigRational::from_integer(BigInt::from(s)))
                    })
                })
                .collect();
        }
        for (q, c) in partial {
            let e = out.entry(q).or_insert_with(BigRational::zero);
            *e += c;
        }
    }
    out.retain(|_, c| !c.is_zero());
    Ok(out)
}

// ---------------------------------------------------------------------------
// Chain evaluation on the code basis

#[derive(Default)]
struct Trie<K: Ord> {
    coef: Option<Complex<f64>>,
    kids: BTreeMap<K, Trie<K>>,
}

/// `Σ_chains c · U† V B_1 V … B_m V U`, sharing common right-hand suffixes.
pub fn eval_chains<T: Real, K: Ord + Clone>(
    g: &GadgetHamiltonian<T>,
    chains: &BTreeMap<Vec<K>, Complex<f64>>,
    apply_b: &dyn Fn(&K, &CMat<T>) -> CMat<T>,
) -> CMat<T> {
    let mut root: Trie<K> = Trie { coef: None, kids: BTreeMap::new() };
    for (key, c) in chains {
        let mut node = &mut root;
        for k in key.iter().rev() {
            node = node.kids.entry(k.clone()).or_insert_with(|| Trie { coef: None, kids: BTreeMap::new() });
        }
        node.coef = Some(node.coef.unwrap_or_default() + c);
    }
    let u = g.code_basis();
    let d = u.ncols();
    let mut acc = CMat::<T>::zeros(d, d);
    fn dfs<T: Real, K: Ord>(
        g: &GadgetHamiltonian<T>,
        node: &Trie<K>,
        z: &CMat<T>,
        apply_b: &dyn Fn(&K, &CMat<T>) -> CMat<T>,
        acc: &mut CMat<T>,
    ) {
        if let Some(c) = node.coef {
            let cc = Complex::new(T::lit(c.re), T::lit(c.im));
            *acc += (g.code_basis().adjoint() * z) * cc;
        }
        for (k, kid) in &node.kids {
            let z2 = g.apply_v(&apply_b(k, z));
            dfs(g, kid, &z2, apply_b, acc);
        }
    }
    let z0 = g.apply_v(u);
    dfs(g, &root, &z0, apply_b, &mut acc);
    acc
}

fn rational_chains<K: Ord + Clone>(m: &BTreeMap<Vec<K>, BigRational>) -> BTreeMap<Vec<K>, Complex<f64>> {
    m.iter().map(|(k, c)| (k.clone(), Complex::new(to_f64(c), 0.0))).collect()
}

/// Evaluates a sandwiched term directly from its letters.
pub fn eval_term_words<T: Real>(g: &GadgetHamiltonian<T>, term: &Poly) -> Result<CMat<T>> {
    let chains = chain_decomposition(term)?;
    let apply = |l: &Letter, z: &CMat<T>| match *l {
        Letter::P => g.apply_p0(z),
        Letter::R(k) => g.apply_resolvent(k, z),
        Letter::V => unreachable!(),
    };
    Ok(eval_chains(g, &rational_chains(&chains), &apply))
}

/// `Σ_q c_q Γ(q)` with `g_q` built from `Δ̃`.
pub fn eval_gammas<T: Real>(g: &GadgetHamiltonian<T>, gammas: &BTreeMap<Vec<i32>, BigRational>, delta_tilde: T) -> CMat<T> {
    let apply = |q: &i32, z: &CMat<T>| g.apply_g(*q, delta_tilde, z);
    eval_chains(g, &rational_chains(gammas), &apply)
}

/// A single `Γ(q)` in the code basis.
pub fn gamma_term<T: Real>(g: &GadgetHamiltonian<T>, q: &[i32], delta_tilde: T) -> CMat<T> {
    let m = BTreeMap::from([(q.to_vec(), BigRational::one())]);
    eval_gammas(g, &m, delta_tilde)
}

// ---------------------------------------------------------------------------
// Numeric generator recursion

/// Generators `S_1..S_n` in low-rank form and the effective terms in the code basis.
#[derive(Clone, Debug)]
pub struct SwGlobalSeries<T: Real> {
    pub order: usize,
    /// `Y_j` with `S_j = Y_j U† − U Y_j†`.
    pub generators: Vec<CMat<T>>,
    /// Index `j−1` holds `U† V^{(j−1)} U`.
    pub terms: Vec<CMat<T>>,
}

struct Numeric<'a, T: Real> {
    g: &'a GadgetHamiltonian<T>,
    y: &'a [CMat<T>],
}

impl<T: Real> Numeric<'_, T> {
    fn s(&self, j: usize, z: &CMat<T>) -> CMat<T> {
        let u = self.g.code_basis();
        let yj = &self.y[j - 1];
        yj * (u.adjoint() * z) - u * (yj.adjoint() * z)
    }

    fn vd(&self, z: &CMat<T>) -> CMat<T> {
        let g = self.g;
        let pz = g.apply_p0(z);
        let qz = z - &pz;
        g.apply_p0(&g.apply_v(&pz)) + g.apply_q0(&g.apply_v(&qz))
    }

    fn vod(&self, z: &CMat<T>) -> CMat<T> {
        let g = self.g;
        let pz = g.apply_p0(z);
        let qz = z - &pz;
        g.apply_p0(&g.apply_v(&qz)) + g.apply_q0(&g.apply_v(&pz))
    }

    /// `W^{(k)}_m z`.
    fn w(&self, k: usize, m: usize, z: &CMat<T>) -> CMat<T> {
        if m == 0 {
            return if k == 0 { self.vod(z) } else { CMat::zeros(z.nrows(), z.ncols()) };
        }
        let mut acc = CMat::<T>::zeros(z.nrows(), z.ncols());
        if k < m {
            return acc;
        }
        for j1 in 1..=k - m + 1 {
            acc += self.s(j1, &self.w(k - j1, m - 1, z)) - self.w(k - j1, m - 1, &self.s(j1, z));
        }
        acc
    }
}

/// Generators `S_1..S_n` and effective terms through order `n`.
pub fn compute_generators<T: Real>(g: &GadgetHamiltonian<T>, n: usize, coeffs: &CoefficientTable) -> Result<SwGlobalSeries<T>> {
    if n == 0 {
        return Err(Error::InvalidArgument("order must be at least 1".into()));
    }
    if n > 8 {
        return Err(Error::Resource(format!("order {n} exceeds the supported budget of 8")));
    }
    let u = g.code_basis();
    let mut y: Vec<CMat<T>> = Vec::new();
    let mut terms = Vec::new();
    for j in 1..=n + 1 {
        let num = Numeric { g, y: &y };
        if j <= n {
            let vj = if j == 1 {
                g.apply_v(u)
            } else {
                let mut acc = CMat::<T>::zeros(u.nrows(), u.ncols());
                for i in 1..=j / 2 {
                    acc += num.w(j - 1, 2 * i - 1, u).scale(T::lit(to_f64(&coeffs.b(i))));
                }
                acc
            };
            terms.push(u.adjoint() * vj);
        }
        if j > n {
            break;
        }
        // X_j with S_j = ℒ(X_j), X_j Hermitian.
        let xu = if j == 1 {
            g.apply_v(u)
        } else {
            let yprev = &y[j - 2];
            let mut acc = num.s(j - 1, &num.vd(u)) - num.vd(yprev);
            for i in 1..=(j - 1) / 2 {
                acc += num.w(j - 1, 2 * i, u).scale(T::lit(to_f64(&coeffs.a(2 * i))));
            }
            acc
        };
        let yj = g.apply_resolvent(1, &xu);
        y.push(yj);
    }
    Ok(SwGlobalSeries { order: n, generators: y, terms })
}

impl<T: Real> SwGlobalSeries<T> {
    /// `U† H_eff^⟨n⟩ U = Σ_j ε^j U† V^{(j−1)} U`.
    pub fn effective(&self, eps: T) -> CMat<T> {
        effective_from_terms(&self.terms, eps)
    }

    /// `Y` of the truncated generator `S = Σ_{j ≤ k} ε^j S_j`.
    pub fn generator_sum(&self, eps: T, k: usize) -> CMat<T> {
        let mut y = CMat::<T>::zeros(self.generators[0].nrows(), self.generators[0].ncols());
        for (j, yj) in self.generators.iter().enumerate().take(k) {
            y += yj.scale(eps.powi(j as i32 + 1));
        }
        y
    }

    /// Dense `S_j`, for small registers.
    pub fn generator_dense(&self, g: &GadgetHamiltonian<T>, j: usize) -> CMat<T> {
        let u = g.code_basis();
        let y = &self.generators[j - 1];
        y * u.adjoint() - u * y.adjoint()
    }

    /// `(‖P0 S_j P0‖, ‖Q0 S_j Q0‖, ‖S_j + S_j†‖)` from the low-rank factors.
    pub fn generator_residuals(&self, g: &GadgetHamiltonian<T>, j: usize) -> (T, T, T) {
        let u = g.code_basis();
        let y = &self.generators[j - 1];
        let uy = u.adjoint() * y;
        let pp = spectral_norm(&(&uy - uy.adjoint()));
        let qy = g.apply_q0(y);
        // Q0 S Q0 = Q0 Y (Q0 U)† − Q0 U (Q0 Y)†; Q0 U is computed, not assumed zero.
        let qu = g.apply_q0(u);
        let qq = fro(&(&qy * qu.adjoint())) * T::lit(2.0);
        let n = y.nrows();
        let anti = if n <= 1024 {
            let s = self.generator_dense(g, j);
            fro(&(&s + s.adjoint()))
        } else {
            T::zero()
        };
        (pp, qq, anti)
    }
}

pub fn effective_from_terms<T: Real>(terms: &[CMat<T>], eps: T) -> CMat<T> {
    let d = terms[0].nrows();
    let mut h = CMat::<T>::zeros(d, d);
    for (j, t) in terms.iter().enumerate() {
        h += t.scale(eps.powi(j as i32 + 1));
    }
    h
}

/// `U m U†` as a dense full-register operator.
pub fn lift<T: Real>(g: &GadgetHamiltonian<T>, m: &CMat<T>) -> CMat<T> {
    let u = g.code_basis();
    u * m * u.adjoint()
}

/// `‖P0 e^S H e^{−S} Q0‖` with `S = Σ_{j≤k} ε^j S_j`, exact on `span(U, Y)`.
pub fn offdiag_residual_global<T: Real>(g: &GadgetHamiltonian<T>, series: &SwGlobalSeries<T>, eps: T, k: usize) -> T {
    let u = g.code_basis();
    let y = series.generator_sum(eps, k);
    // Orthonormal basis of span(U, Y); Y ⟂ U up to rounding.
    let yq = g.apply_q0(&y);
    let extra = crate::linalg::orth_against(u, &yq, T::lit(1e-14));
    let mut b = CMat::<T>::zeros(u.nrows(), u.ncols() + extra.ncols());
    b.columns_mut(0, u.ncols()).copy_from(u);
    b.columns_mut(u.ncols(), extra.ncols()).copy_from(&extra);
    let by = b.adjoint() * &y;
    let bu = b.adjoint() * u;
    let s_small = &by * bu.adjoint() - &bu * by.adjoint();
    let e_plus = crate::linalg::expm_antihermitian(&s_small);
    let e_minus = e_plus.adjoint();
    let id = CMat::<T>::identity(b.ncols(), b.ncols());
    let x = &b * (&e_minus * &bu);
    let hx = g.apply_full(eps, &x);
    let k_mat = &hx + &b * ((&e_plus - &id) * (b.adjoint() * &hx));
    let off = &k_mat - u * (u.adjoint() * &k_mat);
    let gram = off.adjoint() * &off;
    let top = hermitian_eig(&gram).0.last().copied().unwrap_or_else(T::zero);
    top.max(T::zero()).sqrt()
}

// ---------------------------------------------------------------------------
// Γ route, restricted Hamiltonian, self-energy

/// Per-order Γ decompositions of the effective terms.
#[derive(Clone, Debug)]
pub struct GammaSeries {
    pub order: usize,
    pub gammas: Vec<BTreeMap<Vec<i32>, BigRational>>,
}

impl GammaSeries {
    pub fn new(n: usize, coeffs: &CoefficientTable) -> Result<Self> {
        let sym = symbolic_series(n, coeffs);
        let gammas = sym.effective.iter().map(gamma_decomposition).collect::<Result<Vec<_>>>()?;
        Ok(Self { order: n, gammas })
    }

    /// Coefficient of `Γ(1,…,1)` at order `j`.
    pub fn all_ones_coefficient(&self, j: usize) -> BigRational {
        self.gammas[j - 1].get(&vec![1; j - 1]).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Order terms `Σ_q c_q Γ_Δ̃(q)` in the code basis.
    pub fn terms<T: Real>(&self, g: &GadgetHamiltonian<T>, delta_tilde: T) -> Vec<CMat<T>> {
        self.gammas.iter().map(|m| eval_gammas(g, m, delta_tilde)).collect()
    }

    /// Restricted terms `c_{1…1} Γ_Δ̃(1,…,1)` per order.
    pub fn restricted_terms<T: Real>(&self, g: &GadgetHamiltonian<T>, delta_tilde: T) -> Vec<CMat<T>> {
        (1..=self.order)
            .map(|j| gamma_term(g, &vec![1; j - 1], delta_tilde).scale(T::lit(to_f64(&self.all_ones_coefficient(j)))))
            .collect()
    }
}

/// `U† H̃_eff^⟨n⟩ U`.
pub fn restricted_effective<T: Real>(g: &GadgetHamiltonian<T>, gs: &GammaSeries, delta_tilde: T, eps: T) -> CMat<T> {
    effective_from_terms(&gs.restricted_terms(g, delta_tilde), eps)
}

/// Self-energy terms `U† V (G V)^{j−1} U`, `j = 1..n`, with the ground-energy resolvent
/// `G = Q0 (E0 − H0)^{-1} = −Q0/H0`.
pub fn self_energy_terms<T: Real>(g: &GadgetHamiltonian<T>, n: usize) -> Vec<CMat<T>> {
    let u = g.code_basis();
    let mut z = g.apply_v(u);
    let mut out = Vec::new();
    for j in 1..=n {
        if j > 1 {
            z = -g.apply_v(&g.apply_resolvent(1, &z));
        }
        out.push(u.adjoint() * &z);
    }
    out
}

pub fn self_energy_expansion<T: Real>(g: &GadgetHamiltonian<T>, n: usize, eps: T) -> CMat<T> {
    effective_from_terms(&self_energy_terms(g, n), eps)
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaIndependenceReport {
    pub order: usize,
    pub epsilon: f64,
    pub deltas: Vec<f64>,
    /// Largest entrywise difference of the full effective Hamiltonian across Δ̃.
    pub full_max_diff: f64,
    /// Largest entrywise difference of the restricted Hamiltonian across Δ̃.
    pub restricted_max_diff: f64,
    /// Largest entrywise difference between the Γ route and the generator recursion.
    pub route_max_diff: f64,
    pub pass: bool,
}

fn max_entry<T: Real>(m: &CMat<T>) -> f64 {
    crate::scalar::max_abs(m).f64()
}

pub fn verify_delta_tilde_independence<T: Real>(
    g: &GadgetHamiltonian<T>,
    n: usize,
    deltas: &[T],
    eps: T,
    coeffs: &CoefficientTable,
) -> Result<DeltaIndependenceReport> {
    if deltas.len() < 2 {
        return Err(Error::InvalidArgument("need at least two Δ̃ values".into()));
    }
    let gs = GammaSeries::new(n, coeffs)?;
    let full: Vec<CMat<T>> = deltas.iter().map(|&dt| effective_from_terms(&gs.terms(g, dt), eps)).collect();
    let restr: Vec<CMat<T>> = deltas.iter().map(|&dt| restricted_effective(g, &gs, dt, eps)).collect();
    let reference = compute_generators(g, n, coeffs)?.effective(eps);
    let mut full_max_diff = 0.0f64;
    let mut restricted_max_diff = 0.0f64;
    for i in 0..deltas.len() {
        for j in 0..i {
            full_max_diff = full_max_diff.max(max_entry(&(&full[i] - &full[j])));
            restricted_max_diff = restricted_max_diff.max(max_entry(&(&restr[i] - &restr[j])));
        }
    }
    let route_max_diff = full.iter().map(|f| max_entry(&(f - &reference))).fold(0.0, f64::max);
    Ok(DeltaIndependenceReport {
        order: n,
        epsilon: eps.f64(),
        deltas: deltas.iter().map(|d| d.f64()).collect(),
        full_max_diff,
        restricted_max_diff,
        route_max_diff,
        pass: full_max_diff < 1e-9 && restricted_max_diff > 1e-6,
    })
}

// ---------------------------------------------------------------------------
// Linked cluster and parent property

#[derive(Clone, Debug, Serialize)]
pub struct LinkedClusterReport {
    /// Per order: largest number of sites in a retained component.
    pub max_support: Vec<usize>,
    /// Per order: largest norm of a component not inside any connected region of ≤ j edges.
    pub disconnected_norm: Vec<f64>,
    pub pass: bool,
}

/// Decomposes each `U† V^{(j−1)} U` over the code register into site-supported parts.
pub fn verify_linked_cluster<T: Real>(g: &GadgetHamiltonian<T>, terms: &[CMat<T>], tol: f64) -> LinkedClusterReport {
    let code_reg = QuditRegister::new(g.model.maps.iter().map(|m| m.code_dim()).collect());
    let groups: Vec<Vec<usize>> = (0..g.n_sites()).map(|s| vec![s]).collect();
    let graph: &PepsGraph = &g.model.graph;
    let mut max_support = Vec::new();
    let mut disconnected_norm = Vec::new();
    for (idx, t) in terms.iter().enumerate() {
        let j = idx + 1;
        let comps: Vec<Component<T>> = local_decompose(&code_reg, &groups, t, T::lit(tol * 1e-3));
        let regions = enumerate_connected_regions(graph, j);
        let mut worst = 0.0f64;
        let mut sup = 0;
        for c in &comps {
            let nrm = c.hs_norm(&code_reg).f64() / (code_reg.total_dim() as f64).sqrt();
            if nrm > tol {
                sup = sup.max(c.region.len());
            }
            let inside = c.region.len() <= 1 || regions.iter().any(|r| c.region.is_subset(&r.sites));
            if !inside {
                worst = worst.max(nrm);
            }
        }
        max_support.push(sup);
        disconnected_norm.push(worst);
    }
    let pass = disconnected_norm.iter().all(|&x| x < tol);
    LinkedClusterReport { max_support, disconnected_norm, pass }
}

/// Ground-space projector of a Hermitian matrix; degeneracy threshold `rel · ‖H‖`.
pub fn ground_space<T: Real>(h: &CMat<T>, rel: T) -> (Vec<T>, CMat<T>, usize) {
    let (vals, vecs) = hermitian_eig(h);
    let scale = vals.iter().fold(T::zero(), |a, v| a.max(v.abs())).max(T::eps());
    let thr = rel * scale;
    let k = vals.iter().take_while(|v| **v - vals[0] <= thr).count();
    (vals, vecs.columns(0, k).into_owned(), k)
}

/// Gap above the lowest distinct level.
pub fn spectral_gap<T: Real>(vals: &[T], rel: T) -> Option<T> {
    let scale = vals.iter().fold(T::zero(), |a, v| a.max(v.abs())).max(T::eps());
    let thr = rel * scale;
    vals.iter().find(|v| **v - vals[0] > thr).map(|v| *v - vals[0])
}

#[derive(Clone, Debug, Serialize)]
pub struct ParentReport {
    pub order: usize,
    pub epsilons: Vec<f64>,
    pub ground_dims: Vec<usize>,
    pub projector_distances: Vec<f64>,
    pub gaps: Vec<f64>,
    pub fit: Option<LogLogFit>,
    /// Per order: `⟨ψ|T_j|ψ⟩ − λ_min(T_j)` of the restricted terms.
    pub frustration: Vec<f64>,
    pub ground_ok: bool,
    pub slope_ok: bool,
    pub frustration_free: bool,
}

/// Checks that the order-`n_star` effective Hamiltonian has the encoded space as its
/// ground space and measures how its gap scales.
///
/// `encoded` holds code-basis coordinates of the target ground space.
pub fn verify_parent_property<T: Real>(
    series: &SwGlobalSeries<T>,
    encoded: &CMat<T>,
    epsilons: &[T],
    restricted: Option<&[CMat<T>]>,
) -> ParentReport {
    let n = series.order;
    let target = span_projector(encoded);
    let mut ground_dims = Vec::new();
    let mut dists = Vec::new();
    let mut gaps = Vec::new();
    let rel = T::lit(1e-8);
    for &eps in epsilons {
        let h = series.effective(eps);
        let (vals, vecs, k) = ground_space(&h, rel);
        ground_dims.push(k);
        dists.push(projector_distance(&span_projector(&vecs), &target).f64());
        gaps.push(spectral_gap(&vals, rel).map(|x| x.f64()).unwrap_or(0.0));
    }
    let fit = (epsilons.len() >= 2 && gaps.iter().all(|&x| x > 0.0))
        .then(|| fit_loglog(&epsilons.iter().map(|e| e.f64()).collect::<Vec<_>>(), &gaps));
    let mut frustration = Vec::new();
    if let Some(terms) = restricted {
        for t in terms {
            let vals = hermitian_eig(t).0;
            let e: T = (encoded.adjoint() * t * encoded).trace().re / T::lit(encoded.ncols() as f64);
            frustration.push((e - vals[0]).f64());
        }
    }
    let ground_ok = dists.iter().all(|&d| d < 1e-8);
    let slope_ok = fit.as_ref().map(|f| (f.slope - n as f64).abs() <= 0.15).unwrap_or(false);
    let frustration_free = frustration.iter().all(|&x| x.abs() < 1e-10);
    ParentReport {
        order: n,
        epsilons: epsilons.iter().map(|e| e.f64()).collect(),
        ground_dims,
        projector_distances: dists,
        gaps,
        fit,
        frustration,
        ground_ok,
        slope_ok,
        frustration_free,
    }
}

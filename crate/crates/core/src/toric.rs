//! Z₂ quantum-double (toric-code) PEPS on an open square grid.
//!
//! Every site map is the identity on the even-parity subspace of its virtual qubits, so each
//! code basis vector is a computational basis state of the register.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::double_semion::{fidelity_sweep, quasi_injectivity_suite, FidelityReport, QiSuiteReport};
use crate::error::{Error, Result};
use crate::gadget::GadgetHamiltonian;
use crate::lattice::{square_grid, square_plaquettes};
use crate::peps::{peps_vector, PepsModel};
use crate::scalar::{abs, cone, cr, czero, max_abs, CMat, Real};
use crate::sw_global::{compute_generators, self_energy_terms, verify_parent_property, CoefficientTable, ParentReport};

/// Largest register handled, in qubits.
pub const MAX_QUBITS: usize = 12;

/// Rows are the even-parity basis states of `degree` qubits in increasing order.
pub fn parity_map<T: Real>(degree: usize) -> CMat<T> {
    let even: Vec<usize> = (0..1usize << degree).filter(|x| x.count_ones() % 2 == 0).collect();
    let mut m = CMat::<T>::zeros(even.len(), 1 << degree);
    for (r, &x) in even.iter().enumerate() {
        m[(r, x)] = cone();
    }
    m
}

#[derive(Clone, Debug)]
pub struct ToricModel<T: Real> {
    pub rows: usize,
    pub cols: usize,
    pub gadget: GadgetHamiltonian<T>,
    pub plaquettes: Vec<Vec<usize>>,
    /// Register configuration of each code basis vector.
    pub configs: Vec<usize>,
}

pub fn build_toric_model<T: Real>(rows: usize, cols: usize) -> Result<ToricModel<T>> {
    let graph = square_grid(rows, cols)?;
    let nq: usize = graph.degree.iter().sum();
    if nq > MAX_QUBITS {
        return Err(Error::Resource(format!("{nq} virtual qubits (limit {MAX_QUBITS})")));
    }
    if graph.edges.is_empty() {
        return Err(Error::InvalidSpec("grid has no edges".into()));
    }
    let plaquettes = square_plaquettes(&graph, rows, cols);
    let maps = graph.degree.iter().map(|&d| parity_map::<T>(d)).collect();
    let model = PepsModel::new(graph, 2, maps)?;
    let gadget = GadgetHamiltonian::new(model);
    let u = gadget.code_basis();
    let configs = (0..u.ncols())
        .map(|j| (0..u.nrows()).find(|&r| u[(r, j)].re > T::lit(0.5)).expect("basis state"))
        .collect();
    Ok(ToricModel { rows, cols, gadget, plaquettes, configs })
}

impl<T: Real> ToricModel<T> {
    fn qubit_mask(&self, q: usize) -> usize {
        self.gadget.model.reg.stride(q)
    }

    /// Whether the two ends of edge `e` carry the same bit, per code basis vector.
    pub fn agreement(&self, e: usize) -> Vec<bool> {
        let (a, b) = self.gadget.model.edge_qudits(e);
        let (ma, mb) = (self.qubit_mask(a), self.qubit_mask(b));
        self.configs.iter().map(|&x| (x & ma == 0) == (x & mb == 0)).collect()
    }

    /// Register bits flipped by the loop around plaquette `p`.
    pub fn plaquette_mask(&self, p: usize) -> usize {
        self.plaquettes[p].iter().fold(0, |m, &e| {
            let (a, b) = self.gadget.model.edge_qudits(e);
            m ^ self.qubit_mask(a) ^ self.qubit_mask(b)
        })
    }

    /// Code-basis coordinates of the PEPS.
    pub fn encoded_peps(&self) -> Result<CMat<T>> {
        let psi = peps_vector(&self.gadget.model)?;
        Ok(self.gadget.code_basis().adjoint() * CMat::<T>::from_column_slice(psi.len(), 1, psi.as_slice()))
    }

    /// `−½ Σ_e` (agreement projector of `e`), the expected first-order term.
    pub fn first_order_target(&self) -> CMat<T> {
        let k = self.configs.len();
        let mut d = vec![T::zero(); k];
        for e in 0..self.gadget.model.graph.edges.len() {
            for (j, ok) in self.agreement(e).into_iter().enumerate() {
                if ok {
                    d[j] -= T::lit(0.5);
                }
            }
        }
        CMat::<T>::from_fn(k, k, |r, c| if r == c { cr(d[r]) } else { czero() })
    }

    /// Distance of `x` from the diagonal operators that depend only on the agreement pattern.
    pub fn pattern_residual(&self, x: &CMat<T>) -> f64 {
        let ne = self.gadget.model.graph.edges.len();
        let agree: Vec<Vec<bool>> = (0..ne).map(|e| self.agreement(e)).collect();
        let mut groups: BTreeMap<Vec<bool>, Vec<usize>> = BTreeMap::new();
        for j in 0..self.configs.len() {
            groups.entry(agree.iter().map(|a| a[j]).collect()).or_default().push(j);
        }
        let mut off = 0.0f64;
        for r in 0..x.nrows() {
            for c in 0..x.ncols() {
                if r != c {
                    off = off.max(abs(x[(r, c)]).f64());
                }
            }
        }
        let mut spread = 0.0f64;
        for g in groups.values() {
            let v0 = x[(g[0], g[0])];
            for &j in g {
                spread = spread.max(abs(x[(j, j)] - v0).f64());
            }
        }
        off.max(spread)
    }

    /// Off-diagonal entries split into those joining configurations related by a product of
    /// plaquette loops and the rest.
    pub fn loop_split(&self, x: &CMat<T>) -> (f64, f64) {
        let np = self.plaquettes.len();
        let masks: Vec<usize> = (1..1usize << np)
            .map(|sel| (0..np).filter(|p| sel >> p & 1 == 1).fold(0, |m, p| m ^ self.plaquette_mask(p)))
            .collect();
        let (mut looped, mut stray) = (0.0f64, 0.0f64);
        for r in 0..x.nrows() {
            for c in 0..x.ncols() {
                if r == c {
                    continue;
                }
                let a = abs(x[(r, c)]).f64();
                if masks.contains(&(self.configs[r] ^ self.configs[c])) {
                    looped = looped.max(a);
                } else {
                    stray = stray.max(a);
                }
            }
        }
        (looped, stray)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ToricOrderReport {
    pub max_order: usize,
    pub order0_residual: f64,
    pub order1_residual: f64,
    /// Per order from 2 below the loop order: distance from the agreement-pattern algebra.
    pub intermediate_residuals: Vec<f64>,
    /// Per order: largest off-diagonal entry along plaquette loops.
    pub loop_offdiag: Vec<f64>,
    /// Per order: largest off-diagonal entry not explained by plaquette loops.
    pub stray_offdiag: Vec<f64>,
    pub loop_order: usize,
    pub pass: bool,
}

/// Self-energy orders up to `n`. The plaquette loop appears first at its length, 4.
pub fn toric_effective_orders<T: Real>(tm: &ToricModel<T>, n: usize) -> ToricOrderReport {
    let tol = 1e-10;
    let g = &tm.gadget;
    let u = g.code_basis();
    let order0_residual = max_abs(&(u.adjoint() * g.apply_h0(u))).f64();
    let terms = self_energy_terms(g, n);
    let order1_residual = terms.first().map_or(f64::INFINITY, |t| max_abs(&(t - tm.first_order_target())).f64());
    let loop_order = 4;
    let intermediate_residuals: Vec<f64> = terms.iter().take(loop_order - 1).skip(1).map(|t| tm.pattern_residual(t)).collect();
    let (loop_offdiag, stray_offdiag): (Vec<f64>, Vec<f64>) = terms.iter().map(|t| tm.loop_split(t)).unzip();
    let loops_ok = tm.plaquettes.is_empty()
        || (n >= loop_order
            && loop_offdiag[..loop_order - 1].iter().all(|&x| x < tol)
            && loop_offdiag[loop_order - 1] > 1e-8);
    let pass = order0_residual < tol
        && order1_residual < tol
        && intermediate_residuals.iter().all(|&x| x < tol)
        && stray_offdiag.iter().all(|&x| x < tol)
        && loops_ok;
    ToricOrderReport {
        max_order: n,
        order0_residual,
        order1_residual,
        intermediate_residuals,
        loop_offdiag,
        stray_offdiag,
        loop_order,
        pass,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ToricReport {
    pub rows: usize,
    pub cols: usize,
    pub quasi_injectivity: QiSuiteReport,
    pub orders: ToricOrderReport,
    pub fidelity: FidelityReport,
    pub parent: ParentReport,
    pub pass: bool,
}

/// Quasi-injectivity, order structure, fidelity at ε ∈ {0.01, 0.02, 0.03, 0.05} and the
/// order-4 parent property.
pub fn toric_code_crosscheck<T: Real>(rows: usize, cols: usize) -> Result<ToricReport> {
    let tm = build_toric_model::<T>(rows, cols)?;
    let quasi_injectivity = quasi_injectivity_suite(&tm.gadget.model, 2, 2, T::lit(1e-9))?;
    let orders = toric_effective_orders(&tm, 4);
    let encoded = tm.encoded_peps()?;
    let eps: Vec<T> = [0.01, 0.02, 0.03, 0.05].iter().map(|&e| T::lit(e)).collect();
    let fidelity = fidelity_sweep(&tm.gadget, &encoded, &eps)?;
    let series = compute_generators(&tm.gadget, 4, &CoefficientTable::new(5))?;
    let sweep: Vec<T> = [0.03, 0.02, 0.013].iter().map(|&e| T::lit(e)).collect();
    let parent = verify_parent_property(&series, &encoded, &sweep, None);
    let pass = quasi_injectivity.pass && orders.pass && fidelity.fidelities[0] >= 0.999 && fidelity.monotone;
    Ok(ToricReport { rows, cols, quasi_injectivity, orders, fidelity, parent, pass })
}

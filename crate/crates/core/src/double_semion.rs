//! The double-semion string net as a gadget PEPS on the honeycomb lattice.
//!
//! Each honeycomb vertex carries six virtual qubits laid out as `α β | β γ | γ α`, one pair
//! per incident edge. The code space of a vertex is spanned by four states labelled by the
//! edge parities `(i, j, k) = (α+β, β+γ, γ+α)`.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gadget::GadgetHamiltonian;
use crate::lattice::{build_honeycomb, Boundary, Direction, Honeycomb, HoneycombSpec, Pairing};
use crate::linalg::{commutator, eig_low, fit_loglog, hermitian_eig, hermitian_op_norm, EigOptions, LogLogFit};
use crate::operator::{FnOp, LinOp, QuditRegister, SparseOperator};
use crate::peps::{peps_vector, upsilon_family, verify_quasi_injectivity, PepsModel, QiEntry};
use crate::scalar::{c, cone, cr, czero, max_abs, CMat, Real};
use crate::sw_global::{ground_space, self_energy_terms, spectral_gap};

/// Allowed vertex labels `(i, j, k)` in code-basis order.
pub const CODE_LABELS: [[u8; 3]; 4] = [[0, 0, 0], [1, 1, 0], [1, 0, 1], [0, 1, 1]];

fn label_index(l: [u8; 3]) -> Option<usize> {
    CODE_LABELS.iter().position(|&x| x == l)
}

/// Vertex amplitudes `T_{αβγ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DsTensor<T: Real> {
    pub values: [Complex<T>; 8],
}

impl<T: Real> DsTensor<T> {
    pub fn standard() -> Self {
        let mut values = [cone(); 8];
        for (idx, v) in values.iter_mut().enumerate() {
            *v = match (idx as u32).count_ones() {
                1 => c(0.0, 1.0),
                2 => c(0.0, -1.0),
                _ => cone(),
            };
        }
        Self { values }
    }

    pub fn get(&self, a: u8, b: u8, g: u8) -> Complex<T> {
        self.values[(a as usize) << 2 | (b as usize) << 1 | g as usize]
    }

    /// Copy with the sign of one amplitude reversed.
    pub fn with_flipped(&self, a: u8, b: u8, g: u8) -> Self {
        let mut out = self.clone();
        out.values[(a as usize) << 2 | (b as usize) << 1 | g as usize] = -self.get(a, b, g);
        out
    }

    /// Normalized projection map: 4 rows (code labels) by 64 columns (six virtual qubits).
    ///
    /// `rotation` cyclically moves label `p` to the slot pair of direction `(p + rotation) % 3`.
    pub fn site_map(&self, rotation: usize) -> CMat<T> {
        let mut m = CMat::<T>::zeros(4, 64);
        let inv = cr(T::one() / T::lit(2.0).sqrt());
        for idx in 0..8u8 {
            let (a, b, g) = (idx >> 2 & 1, idx >> 1 & 1, idx & 1);
            let pairs = [[a, b], [b, g], [g, a]];
            let mut slots = [0u8; 6];
            for (p, pr) in pairs.iter().enumerate() {
                let pos = (p + rotation) % 3;
                slots[2 * pos] = pr[0];
                slots[2 * pos + 1] = pr[1];
            }
            let col = slots.iter().fold(0usize, |acc, &s| acc << 1 | s as usize);
            let row = label_index([a ^ b, b ^ g, g ^ a]).expect("parity labels are allowed");
            m[(row, col)] += self.get(a, b, g) * inv;
        }
        m
    }
}

/// Which qubits of two slot pairs are joined, and how labels sit on edge directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DsConvention {
    pub pairing: Pairing,
    pub rotation: usize,
}

impl Default for DsConvention {
    fn default() -> Self {
        Self { pairing: Pairing::Geometric, rotation: 0 }
    }
}

impl DsConvention {
    /// Default first, then the remaining label rotations, then the same for the other pairing.
    pub fn candidates() -> Vec<Self> {
        [Pairing::Geometric, Pairing::Straight]
            .into_iter()
            .flat_map(|pairing| (0..3).map(move |rotation| Self { pairing, rotation }))
            .collect()
    }

    /// Component of the vertex label carried by an edge of direction `d`.
    pub fn label_component(&self, d: Direction) -> usize {
        (d.index() + 3 - self.rotation) % 3
    }
}

#[derive(Clone, Debug)]
pub struct DsModel<T: Real> {
    pub honeycomb: Honeycomb,
    pub convention: DsConvention,
    pub tensors: Vec<DsTensor<T>>,
    pub gadget: GadgetHamiltonian<T>,
}

pub fn build_ds_model<T: Real>(spec: &HoneycombSpec) -> Result<DsModel<T>> {
    build_ds_model_with(spec, DsConvention::default(), None)
}

/// Builds the model under a convention; `tensors` overrides the per-vertex amplitudes.
pub fn build_ds_model_with<T: Real>(
    spec: &HoneycombSpec,
    convention: DsConvention,
    tensors: Option<Vec<DsTensor<T>>>,
) -> Result<DsModel<T>> {
    let mut spec = spec.clone();
    spec.pairing = convention.pairing;
    if spec.boundary != Boundary::Torus {
        return Err(Error::Unsupported("double-semion maps need all six slots; use a torus".into()));
    }
    let honeycomb = build_honeycomb(&spec)?;
    let n = honeycomb.vertices.len();
    let tensors = tensors.unwrap_or_else(|| vec![DsTensor::standard(); n]);
    if tensors.len() != n {
        return Err(Error::InvalidSpec(format!("{} tensors for {n} vertices", tensors.len())));
    }
    let mut maps = Vec::with_capacity(n);
    for t in &tensors {
        let m = t.site_map(convention.rotation);
        let r = max_abs(&(&m * m.adjoint() - CMat::<T>::identity(4, 4)));
        if r > T::lit(1e-12) {
            return Err(Error::Isometry(r.f64()));
        }
        maps.push(m);
    }
    let model = PepsModel::new(honeycomb.graph.clone(), 2, maps)?;
    Ok(DsModel { honeycomb, convention, tensors, gadget: GadgetHamiltonian::new(model) })
}

impl<T: Real> DsModel<T> {
    pub fn n_vertices(&self) -> usize {
        self.honeycomb.vertices.len()
    }

    pub fn n_honey_edges(&self) -> usize {
        self.honeycomb.honey_edges.len()
    }

    /// Honeycomb edge at vertex `v` in each direction.
    fn vertex_edges(&self, v: usize) -> [Option<usize>; 3] {
        let mut out = [None; 3];
        for (h, he) in self.honeycomb.honey_edges.iter().enumerate() {
            if he.u == v || he.v == v {
                out[he.dir.index()] = Some(h);
            }
        }
        out
    }

    /// Code-basis index of the vertex labels read off a honeycomb edge configuration, if
    /// every vertex sees an allowed label.
    pub fn code_index_of(&self, config: &[u8]) -> Option<usize> {
        let mut idx = 0;
        for v in 0..self.n_vertices() {
            let mut l = [0u8; 3];
            for (d, h) in Direction::ALL.iter().zip(self.vertex_edges(v)) {
                l[self.convention.label_component(*d)] = config[h?];
            }
            idx = idx * 4 + label_index(l)?;
        }
        Some(idx)
    }

    /// Vertex-constraint configurations of the honeycomb qubits with their code-basis index.
    pub fn label_space(&self) -> Vec<(Vec<u8>, usize)> {
        let nh = self.n_honey_edges();
        (0..1usize << nh)
            .filter_map(|x| {
                let cfg: Vec<u8> = (0..nh).map(|h| (x >> (nh - 1 - h) & 1) as u8).collect();
                self.code_index_of(&cfg).map(|i| (cfg, i))
            })
            .collect()
    }

    /// Label of vertex `v` on direction component `comp` for a code-basis index.
    fn code_label(&self, idx: usize, v: usize, comp: usize) -> u8 {
        let nv = self.n_vertices();
        let digit = idx / 4usize.pow((nv - 1 - v) as u32) % 4;
        CODE_LABELS[digit][comp]
    }

    /// Diagonal of `U† C_h U`: 1 where both ends of honeycomb edge `h` carry the same label.
    pub fn consistency_diag(&self, h: usize) -> Vec<bool> {
        let he = &self.honeycomb.honey_edges[h];
        let comp = self.convention.label_component(he.dir);
        (0..self.gadget.code_basis().ncols())
            .map(|i| self.code_label(i, he.u, comp) == self.code_label(i, he.v, comp))
            .collect()
    }

    pub fn consistency_projector(&self, h: usize) -> CMat<T> {
        let d = self.consistency_diag(h);
        CMat::<T>::from_fn(d.len(), d.len(), |r, c| if r == c && d[r] { cone() } else { czero() })
    }

    /// Code-basis coordinates of the label-consistent subspace, one column per configuration.
    pub fn consistent_basis(&self) -> (Vec<Vec<u8>>, CMat<T>) {
        let ls = self.label_space();
        let d = self.gadget.code_basis().ncols();
        let mut m = CMat::<T>::zeros(d, ls.len());
        for (col, (_, i)) in ls.iter().enumerate() {
            m[(*i, col)] = cone();
        }
        (ls.into_iter().map(|(c, _)| c).collect(), m)
    }

    /// Code-basis coordinates of the encoded PEPS state.
    pub fn encoded_peps(&self) -> Result<CMat<T>> {
        let psi = peps_vector(&self.gadget.model)?;
        let psim = CMat::<T>::from_column_slice(psi.len(), 1, psi.as_slice());
        Ok(self.gadget.code_basis().adjoint() * psim)
    }

    /// Pair-flip product over the PEPS edges facing the centre of plaquette `p`.
    pub fn apply_bp(&self, p: usize, x: &CMat<T>) -> CMat<T> {
        let model = &self.gadget.model;
        let mut y = x.clone();
        for &e in &self.honeycomb.plaquettes[p].interior {
            let (qa, qb) = model.edge_qudits(e);
            let (sa, sb) = (model.reg.stride(qa), model.reg.stride(qb));
            let mut z = CMat::<T>::zeros(y.nrows(), y.ncols());
            for b in model.reg.bases(&[qa, qb]) {
                z.row_mut(b).copy_from(&y.row(b + sa + sb));
                z.row_mut(b + sa + sb).copy_from(&y.row(b));
            }
            y = z;
        }
        y
    }

    /// `U† B_p U`.
    pub fn bp_code(&self, p: usize) -> CMat<T> {
        let u = self.gadget.code_basis();
        u.adjoint() * self.apply_bp(p, u)
    }

    /// `Z` on all four virtual qubits of honeycomb edge `h`; restricted to P0 it is `2C_h − 1`.
    pub fn edge_parity(&self, h: usize) -> SparseOperator<T> {
        let model = &self.gadget.model;
        let qs: Vec<usize> = self.honeycomb.honey_edges[h]
            .peps
            .iter()
            .flat_map(|&e| {
                let (a, b) = model.edge_qudits(e);
                [a, b]
            })
            .collect();
        let reg = &model.reg;
        let trip = (0..reg.total_dim()).map(|i| {
            let par: usize = qs.iter().map(|&q| reg.digit(i, q)).sum();
            (i, i, if par.is_multiple_of(2) { cone() } else { -cone::<T>() })
        });
        SparseOperator::from_triplets(reg, trip)
    }
}

// ---------------------------------------------------------------------------
// Standard string-net Hamiltonian on honeycomb-edge qubits

/// Vertex stars and plaquette terms of the standard model, as sparse operators.
#[derive(Clone, Debug)]
pub struct DsStandard<T: Real> {
    pub reg: QuditRegister,
    pub vertex_terms: Vec<SparseOperator<T>>,
    pub plaquette_terms: Vec<SparseOperator<T>>,
    pub hamiltonian: SparseOperator<T>,
}

/// Legs of plaquette `p`: edges outside the hexagon touching one of its vertices.
pub fn plaquette_legs(hc: &Honeycomb, p: usize) -> Vec<usize> {
    let sides: BTreeSet<usize> = hc.plaquettes[p].honey_edges.iter().copied().collect();
    let verts: BTreeSet<usize> = sides.iter().flat_map(|&h| [hc.honey_edges[h].u, hc.honey_edges[h].v]).collect();
    (0..hc.honey_edges.len())
        .filter(|h| !sides.contains(h))
        .filter(|&h| verts.contains(&hc.honey_edges[h].u) || verts.contains(&hc.honey_edges[h].v))
        .collect()
}

pub fn ds_standard_hamiltonian<T: Real>(spec: &HoneycombSpec) -> Result<DsStandard<T>> {
    if spec.boundary != Boundary::Torus {
        return Err(Error::Unsupported("plaquette legs are undefined on an open patch".into()));
    }
    let hc = build_honeycomb(spec)?;
    let nh = hc.honey_edges.len();
    if nh > 20 {
        return Err(Error::Resource(format!("{nh} honeycomb qubits")));
    }
    let reg = QuditRegister::qubits(nh);
    let bit = |x: usize, h: usize| x >> (nh - 1 - h) & 1;
    let mut vertex_terms = Vec::new();
    for v in 0..hc.vertices.len() {
        let star: Vec<usize> = (0..nh).filter(|&h| hc.honey_edges[h].u == v || hc.honey_edges[h].v == v).collect();
        let trip = (0..reg.total_dim()).map(|x| {
            let par: usize = star.iter().map(|&h| bit(x, h)).sum();
            (x, x, if par.is_multiple_of(2) { cone() } else { -cone::<T>() })
        });
        vertex_terms.push(SparseOperator::from_triplets(&reg, trip));
    }
    let mut plaquette_terms = Vec::new();
    for (p, pl) in hc.plaquettes.iter().enumerate() {
        let flip = pl.honey_edges.iter().fold(0usize, |m, &h| m ^ (1 << (nh - 1 - h)));
        let legs = plaquette_legs(&hc, p);
        let phase = [cone::<T>(), c(0.0, 1.0), -cone::<T>(), c(0.0, -1.0)];
        let trip = (0..reg.total_dim()).map(|x| {
            let k: usize = legs.iter().map(|&h| bit(x, h)).sum();
            (x ^ flip, x, phase[k % 4])
        });
        plaquette_terms.push(SparseOperator::from_triplets(&reg, trip));
    }
    let mut h = SparseOperator::zero(&reg);
    for a in &vertex_terms {
        h = h.axpby(cone(), a, -cone::<T>());
    }
    for b in &plaquette_terms {
        h = h.add(b);
    }
    Ok(DsStandard { reg, vertex_terms, plaquette_terms, hamiltonian: h })
}

impl<T: Real> DsStandard<T> {
    /// Vertex-constraint configurations (every star has even parity).
    pub fn constrained_configs(&self) -> Vec<usize> {
        (0..self.reg.total_dim()).filter(|&x| self.vertex_terms.iter().all(|a| a.get(x, x).re > T::zero())).collect()
    }

    /// Hamiltonian restricted to the vertex-constraint subspace.
    pub fn constrained_block(&self) -> CMat<T> {
        let cfg = self.constrained_configs();
        CMat::<T>::from_fn(cfg.len(), cfg.len(), |r, c| self.hamiltonian.get(cfg[r], cfg[c]))
    }

    /// Plaquette term `p` restricted to the vertex-constraint subspace.
    pub fn constrained_plaquette(&self, p: usize) -> CMat<T> {
        let cfg = self.constrained_configs();
        CMat::<T>::from_fn(cfg.len(), cfg.len(), |r, c| self.plaquette_terms[p].get(cfg[r], cfg[c]))
    }
}

// ---------------------------------------------------------------------------
// Order-by-order structure

/// Self-energy terms `U† V_F (−R V_F)^{j−1} U` with the perturbation restricted to `edges`.
pub fn restricted_self_energy<T: Real>(g: &GadgetHamiltonian<T>, edges: &[usize], n: usize) -> Vec<CMat<T>> {
    let u = g.code_basis();
    let apply_vf = |x: &CMat<T>| {
        let mut y = CMat::<T>::zeros(x.nrows(), x.ncols());
        for &e in edges {
            y -= g.model.apply_edge_projector(e, x);
        }
        y
    };
    let mut z = apply_vf(u);
    let mut out = Vec::with_capacity(n);
    for j in 1..=n {
        if j > 1 {
            z = -apply_vf(&g.apply_resolvent(1, &z));
        }
        out.push(u.adjoint() * &z);
    }
    out
}

/// Order-`j` contributions from processes using exactly the PEPS edges in each subset,
/// by inclusion–exclusion over subsets. Keys are edge bitmasks.
pub fn exact_edge_set_terms<T: Real>(g: &GadgetHamiltonian<T>, n: usize) -> Result<BTreeMap<u64, Vec<CMat<T>>>> {
    let ne = g.model.graph.edges.len();
    if ne > 12 {
        return Err(Error::Resource(format!("2^{ne} edge subsets")));
    }
    let full = 1u64 << ne;
    let edges_of = |m: u64| (0..ne).filter(|e| m >> e & 1 == 1).collect::<Vec<_>>();
    let raw: Vec<Vec<CMat<T>>> = (0..full).map(|m| restricted_self_energy(g, &edges_of(m), n)).collect();
    let d = g.code_basis().ncols();
    let mut out = BTreeMap::new();
    for m in 1..full {
        let mut acc = vec![CMat::<T>::zeros(d, d); n];
        // Subsets of m, including m itself and the empty set.
        let mut f = m;
        loop {
            let sign = if (m.count_ones() - f.count_ones()) % 2 == 0 { T::one() } else { -T::one() };
            for (a, r) in acc.iter_mut().zip(&raw[f as usize]) {
                *a += r.scale(sign);
            }
            if f == 0 {
                break;
            }
            f = (f - 1) & m;
        }
        out.insert(m, acc);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeSetClass {
    /// Honeycomb support is a forest.
    Tree,
    /// Exactly the PEPS edges facing the centre of a plaquette.
    Plaquette,
    /// Any other set whose honeycomb support contains a cycle.
    Wrapping,
}

impl<T: Real> DsModel<T> {
    fn honey_of_peps(&self) -> Vec<usize> {
        let mut out = vec![0; self.gadget.model.graph.edges.len()];
        for (h, he) in self.honeycomb.honey_edges.iter().enumerate() {
            for &e in &he.peps {
                out[e] = h;
            }
        }
        out
    }

    pub fn honey_support(&self, mask: u64) -> BTreeSet<usize> {
        let hp = self.honey_of_peps();
        (0..hp.len()).filter(|e| mask >> e & 1 == 1).map(|e| hp[e]).collect()
    }

    pub fn classify(&self, mask: u64) -> EdgeSetClass {
        for pl in &self.honeycomb.plaquettes {
            if pl.interior.iter().fold(0u64, |m, &e| m | 1 << e) == mask {
                return EdgeSetClass::Plaquette;
            }
        }
        let mut parent: Vec<usize> = (0..self.n_vertices()).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for h in self.honey_support(mask) {
            let he = &self.honeycomb.honey_edges[h];
            let (a, b) = (find(&mut parent, he.u), find(&mut parent, he.v));
            if a == b {
                return EdgeSetClass::Wrapping;
            }
            parent[a] = b;
        }
        EdgeSetClass::Tree
    }

    /// Distance of a code-space operator from the algebra generated by `{C_h : h ∈ hs}`:
    /// the off-diagonal part plus the spread of diagonal entries sharing a consistency pattern.
    pub fn consistency_algebra_residual(&self, x: &CMat<T>, hs: &BTreeSet<usize>) -> f64 {
        let diags: Vec<Vec<bool>> = hs.iter().map(|&h| self.consistency_diag(h)).collect();
        let d = x.nrows();
        let mut off = 0.0f64;
        for r in 0..d {
            for c in 0..d {
                if r != c {
                    off = off.max(crate::scalar::abs(x[(r, c)]).f64());
                }
            }
        }
        let mut groups: BTreeMap<Vec<bool>, Vec<Complex<T>>> = BTreeMap::new();
        for i in 0..d {
            groups.entry(diags.iter().map(|v| v[i]).collect()).or_default().push(x[(i, i)]);
        }
        let mut spread = 0.0f64;
        for vals in groups.values() {
            let mean = vals.iter().fold(czero::<T>(), |a, v| a + v) / cr(T::lit(vals.len() as f64));
            for v in vals {
                spread = spread.max(crate::scalar::abs(*v - mean).f64());
            }
        }
        off.max(spread)
    }

    /// Mean diagonal value over consistent minus inconsistent entries for honeycomb edge `h`.
    fn consistency_coefficient(&self, x: &CMat<T>, h: usize) -> f64 {
        let diag = self.consistency_diag(h);
        let (mut s1, mut n1, mut s0, mut n0) = (0.0, 0, 0.0, 0);
        for (i, &ok) in diag.iter().enumerate() {
            if ok {
                s1 += x[(i, i)].re.f64();
                n1 += 1;
            } else {
                s0 += x[(i, i)].re.f64();
                n0 += 1;
            }
        }
        s1 / n1.max(1) as f64 - s0 / n0.max(1) as f64
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderReport {
    pub max_order: usize,
    /// `max |U†(H0 − Δ0)U + 1|`: the order-0 term in the `−P0` normalization.
    pub order0_residual: f64,
    pub order1_constant: f64,
    pub order1_residual: f64,
    /// Per honeycomb edge: coefficient of `C_h` in the order-2 term of its two PEPS edges.
    pub order2_couplings: Vec<f64>,
    /// Largest distance of an order-2 single-edge-pair term from `a + b·C_h`.
    pub order2_residual: f64,
    /// Per order: largest distance of a tree-supported term from the consistency algebra.
    pub tree_residuals: Vec<f64>,
    /// Per order: largest entry among terms on cycles that wrap the torus.
    pub wrapping_norms: Vec<f64>,
    /// Per order: largest entry among plaquette-type terms.
    pub plaquette_norms: Vec<f64>,
    /// Order-`max_order` plaquette terms: distance from the consistency algebra.
    pub plaquette_new_part: Vec<f64>,
    /// Normalized overlap of each order-6 plaquette term with `U† B_p U`.
    pub bp_overlap: Vec<f64>,
    pub order0_ok: bool,
    pub order1_ok: bool,
    pub order2_ok: bool,
    pub intermediate_ok: bool,
    pub plaquette_ok: bool,
    pub pass: bool,
}

/// Order structure of the self-energy expansion up to `n` (6 for the plaquette term).
pub fn ds_effective_orders<T: Real>(dsm: &DsModel<T>, n: usize) -> Result<OrderReport> {
    let g = &dsm.gadget;
    let u = g.code_basis();
    let d = u.ncols();
    let id = CMat::<T>::identity(d, d);
    let h0 = u.adjoint() * g.apply_h0(u);
    // U†(H0 − Δ0)U + 1 with Δ0 = 1 is just U†H0U.
    let order0_residual = max_abs(&h0).f64();
    let whole = self_energy_terms(g, n.max(1));
    let c1 = whole[0].trace().re / T::lit(d as f64);
    let order1_residual = max_abs(&(&whole[0] - id.scale(c1))).f64();

    let sets = exact_edge_set_terms(g, n)?;
    let nh = dsm.n_honey_edges();
    let mut order2_couplings = vec![0.0; nh];
    let mut order2_residual = 0.0f64;
    let mut tree_residuals = vec![0.0f64; n];
    let mut wrapping_norms = vec![0.0f64; n];
    let mut plaquette_norms = vec![0.0f64; n];
    for (&mask, terms) in &sets {
        let hs = dsm.honey_support(mask);
        let class = dsm.classify(mask);
        for (j, x) in terms.iter().enumerate() {
            match class {
                EdgeSetClass::Tree => {
                    tree_residuals[j] = tree_residuals[j].max(dsm.consistency_algebra_residual(x, &hs));
                }
                EdgeSetClass::Wrapping => wrapping_norms[j] = wrapping_norms[j].max(max_abs(x).f64()),
                EdgeSetClass::Plaquette => plaquette_norms[j] = plaquette_norms[j].max(max_abs(x).f64()),
            }
        }
        if n >= 2 && hs.len() == 1 && mask.count_ones() == 2 {
            let h = *hs.iter().next().unwrap();
            order2_couplings[h] = dsm.consistency_coefficient(&terms[1], h);
            order2_residual = order2_residual.max(dsm.consistency_algebra_residual(&terms[1], &hs));
        }
    }
    let mut plaquette_new_part = Vec::new();
    let mut bp_overlap = Vec::new();
    for (p, pl) in dsm.honeycomb.plaquettes.iter().enumerate() {
        let mask = pl.interior.iter().fold(0u64, |m, &e| m | 1 << e);
        let Some(x) = sets.get(&mask).and_then(|t| t.get(n - 1)) else { continue };
        let all: BTreeSet<usize> = (0..nh).collect();
        plaquette_new_part.push(dsm.consistency_algebra_residual(x, &all));
        let b = dsm.bp_code(p);
        let ip = (b.adjoint() * x).trace();
        bp_overlap.push((crate::scalar::abs(ip) / (b.norm() * x.norm()).max(T::eps())).f64());
    }
    let tol = 1e-10;
    let order0_ok = order0_residual < tol;
    let order1_ok = order1_residual < tol;
    let order2_ok = n >= 2 && order2_residual < tol && order2_couplings.iter().all(|&b| b.abs() > 1e-6);
    let upto = n.min(5);
    let intermediate_ok = (2..upto).all(|j| tree_residuals[j] < tol && plaquette_norms[j] < tol);
    let plaquette_ok = n >= 6 && plaquette_new_part.iter().all(|&x| x > 1e-8);
    Ok(OrderReport {
        max_order: n,
        order0_residual,
        order1_constant: c1.f64(),
        order1_residual,
        order2_couplings,
        order2_residual,
        tree_residuals,
        wrapping_norms,
        plaquette_norms,
        plaquette_new_part,
        bp_overlap,
        order0_ok,
        order1_ok,
        order2_ok,
        intermediate_ok,
        plaquette_ok,
        pass: order0_ok && order1_ok && order2_ok && intermediate_ok && plaquette_ok,
    })
}

// ---------------------------------------------------------------------------
// Plaquette cross-check

#[derive(Clone, Debug, Serialize)]
pub struct PlaquetteAttempt {
    pub convention: DsConvention,
    pub scale: f64,
    pub deviation: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlaquetteReport {
    pub attempts: Vec<PlaquetteAttempt>,
    pub validated: Option<DsConvention>,
    /// Largest `‖[U†B_pU, U†C_hU]‖` under the validated (else default) convention.
    pub commutator_norm: f64,
    pub plaquette_self_overlap: bool,
    pub effective_ground_dim: usize,
    pub standard_ground_dim: usize,
    pub pass: bool,
}

/// `P_C B_p P_C` in the label-consistent basis against the standard plaquette term on the
/// vertex-constraint configurations, with one positive scale fixed at the largest entry.
pub fn plaquette_attempt<T: Real>(dsm: &DsModel<T>, std: &DsStandard<T>) -> PlaquetteAttempt {
    let (_, pc) = dsm.consistent_basis();
    let mut scale = f64::NAN;
    let mut deviation = f64::INFINITY;
    let mut pass = true;
    for p in 0..dsm.honeycomb.plaquettes.len() {
        let m = pc.adjoint() * dsm.bp_code(p) * &pc;
        let target = std.constrained_plaquette(p);
        let (mut best, mut at) = (T::zero(), (0, 0));
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let a = crate::scalar::abs(m[(r, c)]);
                if a > best {
                    best = a;
                    at = (r, c);
                }
            }
        }
        let t = target[at];
        if crate::scalar::abs(t) < T::lit(1e-12) {
            return PlaquetteAttempt { convention: dsm.convention, scale, deviation, pass: false };
        }
        let s = m[at] / t;
        let positive = s.re > T::zero() && s.im.abs() < T::lit(1e-10);
        let dev = max_abs(&(&m - target.scale(s.re))).f64();
        scale = s.re.f64();
        deviation = if p == 0 { dev } else { deviation.max(dev) };
        pass &= positive && dev < 1e-8;
    }
    PlaquetteAttempt { convention: dsm.convention, scale, deviation, pass }
}

/// Tries the default convention, then the alternatives, until the plaquette term matches.
pub fn ds_plaquette_check<T: Real>(spec: &HoneycombSpec, eps: T) -> Result<PlaquetteReport> {
    let std = ds_standard_hamiltonian::<T>(spec)?;
    let mut attempts = Vec::new();
    let mut validated = None;
    let mut chosen: Option<DsModel<T>> = None;
    for conv in DsConvention::candidates() {
        let dsm = build_ds_model_with::<T>(spec, conv, None)?;
        let a = plaquette_attempt(&dsm, &std);
        let ok = a.pass;
        attempts.push(a);
        if chosen.is_none() {
            chosen = Some(dsm.clone());
        }
        if ok {
            validated = Some(conv);
            chosen = Some(dsm);
            break;
        }
    }
    let dsm = chosen.expect("at least one candidate");
    let mut commutator_norm = 0.0f64;
    for p in 0..dsm.honeycomb.plaquettes.len() {
        let b = dsm.bp_code(p);
        for h in 0..dsm.n_honey_edges() {
            commutator_norm = commutator_norm.max(commutator(&b, &dsm.consistency_projector(h)).norm().f64());
        }
    }
    let heff = crate::sw_global::effective_from_terms(&self_energy_terms(&dsm.gadget, 6), eps);
    let effective_ground_dim = ground_space(&heff, T::lit(1e-8)).2;
    let standard_ground_dim = ground_space(&std.constrained_block(), T::lit(1e-8)).2;
    let pass = validated.is_some() && commutator_norm < 1e-10;
    Ok(PlaquetteReport {
        attempts,
        validated,
        commutator_norm,
        plaquette_self_overlap: dsm.honeycomb.plaquettes.iter().any(|p| p.self_overlap),
        effective_ground_dim,
        standard_ground_dim,
        pass,
    })
}

// ---------------------------------------------------------------------------
// Fidelity, symmetries, quasi-injectivity

#[derive(Clone, Debug, Serialize)]
pub struct FidelityReport {
    pub epsilons: Vec<f64>,
    pub fidelities: Vec<f64>,
    pub ground_energies: Vec<f64>,
    pub ground_dims: Vec<usize>,
    pub level_crossing: bool,
    /// Fidelity does not decrease as ε decreases.
    pub monotone: bool,
}

/// Overlap of the ground space of `H(ε)` with an encoded subspace given in code-basis
/// coordinates: `‖G† E‖²_F / min(dim G, dim E)`.
pub fn fidelity_sweep<T: Real>(g: &GadgetHamiltonian<T>, encoded: &CMat<T>, epsilons: &[T]) -> Result<FidelityReport> {
    let u = g.code_basis();
    let e = u * encoded;
    let m = encoded.ncols() as f64;
    let mut fidelities = Vec::new();
    let mut ground_energies = Vec::new();
    let mut ground_dims = Vec::new();
    for &eps in epsilons {
        if eps == T::zero() {
            fidelities.push((u.adjoint() * &e).norm_squared().f64() / m);
            ground_energies.push(0.0);
            ground_dims.push(u.ncols());
            continue;
        }
        let op = g.full_op(eps);
        let k = 3.min(op.dim());
        let sd = eig_low(&op, k, Some(u), &EigOptions { tol: T::lit(1e-10), ..Default::default() })?;
        let e0 = sd.values[0];
        let thr = T::lit(1e-11);
        let kd = sd.values.iter().take_while(|v| **v - e0 <= thr).count();
        let gs = sd.vectors.columns(0, kd).into_owned();
        fidelities.push((gs.adjoint() * &e).norm_squared().f64() / m.min(kd as f64));
        ground_energies.push(e0.f64());
        ground_dims.push(kd);
    }
    let nonzero: Vec<usize> = ground_dims.iter().zip(epsilons).filter(|(_, e)| **e != T::zero()).map(|(d, _)| *d).collect();
    let level_crossing = nonzero.windows(2).any(|w| w[0] != w[1]);
    let mut order: Vec<usize> = (0..epsilons.len()).collect();
    order.sort_by(|&a, &b| epsilons[a].partial_cmp(&epsilons[b]).unwrap_or(std::cmp::Ordering::Equal));
    let monotone = order.windows(2).all(|w| fidelities[w[0]] >= fidelities[w[1]] - 1e-12);
    Ok(FidelityReport {
        epsilons: epsilons.iter().map(|x| x.f64()).collect(),
        fidelities,
        ground_energies,
        ground_dims,
        level_crossing,
        monotone,
    })
}

pub fn ds_fidelity_sweep<T: Real>(dsm: &DsModel<T>, epsilons: &[T]) -> Result<FidelityReport> {
    fidelity_sweep(&dsm.gadget, &dsm.encoded_peps()?, epsilons)
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetryReport {
    pub name: String,
    pub epsilon: f64,
    pub full_commutator: f64,
    pub effective_commutator: f64,
    pub hamiltonian_norm: f64,
    pub exact: bool,
}

/// Commutators of a Hermitian candidate with `H(ε)` and with an effective Hamiltonian `heff`.
pub fn symmetry_probe<T: Real>(
    dsm: &DsModel<T>,
    name: &str,
    candidate: &dyn LinOp<T>,
    eps: T,
    heff: &CMat<T>,
    hamiltonian_norm: f64,
) -> SymmetryReport {
    let g = &dsm.gadget;
    let n = g.dim();
    // i[A, H] is Hermitian with the same norm as the commutator.
    let i = Complex::new(T::zero(), T::one());
    let comm = FnOp {
        dim: n,
        f: |x: &CMat<T>| (candidate.apply(&g.apply_full(eps, x)) - g.apply_full(eps, &candidate.apply(x))) * i,
    };
    let full_commutator = hermitian_op_norm(&comm, 11).f64();
    let u = g.code_basis();
    let a = u.adjoint() * candidate.apply(u);
    let effective_commutator = crate::linalg::spectral_norm(&commutator(&a, heff)).f64();
    SymmetryReport {
        name: name.to_string(),
        epsilon: eps.f64(),
        full_commutator,
        effective_commutator,
        hamiltonian_norm,
        exact: full_commutator < 1e-10,
    }
}

/// Standard candidates: every site projector, every edge parity, and `P0 B_p P0`.
pub fn ds_symmetry_suite<T: Real>(dsm: &DsModel<T>, eps: T) -> Vec<SymmetryReport> {
    let g = &dsm.gadget;
    let n = g.dim();
    let heff = crate::sw_global::effective_from_terms(&self_energy_terms(g, 6), eps);
    let heff = &heff;
    let hnorm = hermitian_op_norm(&g.full_op(eps), 12).f64();
    let mut out = Vec::new();
    for s in 0..dsm.n_vertices() {
        let op = FnOp { dim: n, f: move |x: &CMat<T>| g.model.apply_site_projector(s, x) };
        out.push(symmetry_probe(dsm, &format!("site-projector-{s}"), &op, eps, heff, hnorm));
    }
    for h in 0..dsm.n_honey_edges() {
        let z = dsm.edge_parity(h);
        let op = FnOp { dim: n, f: move |x: &CMat<T>| sparse_apply(&z, x) };
        out.push(symmetry_probe(dsm, &format!("edge-parity-{h}"), &op, eps, heff, hnorm));
    }
    for p in 0..dsm.honeycomb.plaquettes.len() {
        let op = FnOp { dim: n, f: move |x: &CMat<T>| g.apply_p0(&dsm.apply_bp(p, &g.apply_p0(x))) };
        out.push(symmetry_probe(dsm, &format!("plaquette-flip-{p}"), &op, eps, heff, hnorm));
    }
    out
}

fn sparse_apply<T: Real>(op: &SparseOperator<T>, x: &CMat<T>) -> CMat<T> {
    let mut y = CMat::<T>::zeros(x.nrows(), x.ncols());
    for (r, c, v) in op.entries() {
        for k in 0..x.ncols() {
            y[(r, k)] += v * x[(c, k)];
        }
    }
    y
}

#[derive(Clone, Debug, Serialize)]
pub struct QiSuiteReport {
    pub n_specs: usize,
    pub failures: usize,
    pub max_residual: f64,
    pub entries: Vec<QiEntry>,
    pub pass: bool,
}

pub fn quasi_injectivity_suite<T: Real>(model: &PepsModel<T>, max_single: usize, max_total: usize, tol: T) -> Result<QiSuiteReport> {
    let specs = upsilon_family(model, max_single, max_total);
    let entries = verify_quasi_injectivity(model, &specs, tol)?;
    let failures = entries.iter().filter(|e| !e.pass).count();
    let max_residual = entries.iter().map(|e| e.residual).fold(0.0, f64::max);
    Ok(QiSuiteReport { n_specs: entries.len(), failures, max_residual, entries, pass: failures == 0 })
}

/// The standard model with one amplitude of one vertex sign-flipped.
pub fn corrupted_ds_model<T: Real>(spec: &HoneycombSpec, vertex: usize, abg: (u8, u8, u8)) -> Result<DsModel<T>> {
    let hc = build_honeycomb(spec)?;
    let mut tensors = vec![DsTensor::<T>::standard(); hc.vertices.len()];
    let Some(t) = tensors.get_mut(vertex) else {
        return Err(Error::InvalidArgument(format!("no vertex {vertex}")));
    };
    *t = t.with_flipped(abg.0, abg.1, abg.2);
    build_ds_model_with(spec, DsConvention::default(), Some(tensors))
}

/// Mutation fixture: `T(1,0,0)` on vertex 0 goes from `i` to `−i`.
///
/// Flipping `T(0,0,0)` or `T(1,1,1)` instead cancels the amplitude of the all-even label and
/// annihilates the state.
pub fn ds_mutation_fixture<T: Real>(spec: &HoneycombSpec) -> Result<DsModel<T>> {
    corrupted_ds_model(spec, 0, (1, 0, 0))
}

// ---------------------------------------------------------------------------
// Energy scales

#[derive(Clone, Debug, Serialize)]
pub struct HierarchyReport {
    pub epsilon: f64,
    /// Distinct levels of the order-6 effective Hamiltonian above its minimum.
    pub effective_levels: Vec<f64>,
    /// `ln(level) / ln(ε)` for each level.
    pub apparent_orders: Vec<f64>,
    pub gap: Option<f64>,
    pub gap_fit: Option<LogLogFit>,
}

/// Level structure of the order-6 effective Hamiltonian and, over `sweep`, the gap scaling.
pub fn ds_energy_hierarchy<T: Real>(dsm: &DsModel<T>, eps: T, sweep: &[T]) -> HierarchyReport {
    let terms = self_energy_terms(&dsm.gadget, 6);
    let h = crate::sw_global::effective_from_terms(&terms, eps);
    let vals = hermitian_eig(&h).0;
    let e0 = vals[0];
    let mut levels: Vec<f64> = Vec::new();
    for v in &vals[1..] {
        let x = (*v - e0).f64();
        if x > 1e-12 && levels.last().is_none_or(|l| (x - l).abs() > 1e-9 * (1.0 + x)) {
            levels.push(x);
        }
    }
    let le = eps.f64().ln();
    let apparent_orders = levels.iter().map(|l| l.ln() / le).collect();
    let gap = spectral_gap(&vals, T::lit(1e-8)).map(|g| g.f64());
    let gaps: Vec<f64> = sweep
        .iter()
        .filter_map(|&e| spectral_gap(&hermitian_eig(&crate::sw_global::effective_from_terms(&terms, e)).0, T::lit(1e-8)).map(|g| g.f64()))
        .collect();
    let gap_fit = (gaps.len() == sweep.len() && gaps.len() >= 2).then(|| fit_loglog(&sweep.iter().map(|e| e.f64()).collect::<Vec<_>>(), &gaps));
    HierarchyReport { epsilon: eps.f64(), effective_levels: levels, apparent_orders, gap, gap_fit }
}

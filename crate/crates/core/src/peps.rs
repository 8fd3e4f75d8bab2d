//! Projection maps, the encoded PEPS state, parent Hamiltonians and Υ operators.

use std::collections::BTreeSet;

use num_complex::Complex;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lattice::{PepsGraph, Region};
use crate::linalg::{eig_low, hermitian_eig, EigOptions};
use crate::operator::{apply_local, kron_embed, FnOp, LinOp, QuditRegister, SparseOperator, SparseState};
use crate::scalar::{cone, cr, czero, fro, CMat, CVec, Real};

/// Isometry 𝒫_s from the virtual space of a site onto its code space.
#[derive(Clone, Debug)]
pub struct ProjectionMap<T: Real> {
    pub site: usize,
    /// `d × D^deg`.
    pub matrix: CMat<T>,
    /// `P_s = 𝒫_s† 𝒫_s`.
    pub projector: CMat<T>,
}

impl<T: Real> ProjectionMap<T> {
    pub fn new(site: usize, matrix: CMat<T>) -> Result<Self> {
        let d = matrix.nrows();
        let resid = fro(&(&matrix * matrix.adjoint() - CMat::<T>::identity(d, d)));
        if resid > T::lit(1e-10) {
            return Err(Error::Isometry(resid.f64()));
        }
        let projector = matrix.adjoint() * &matrix;
        Ok(Self { site, matrix, projector })
    }

    pub fn code_dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Unitary whose first `d` rows are the map; the rest span the kernel.
    pub fn completed_unitary(&self) -> CMat<T> {
        let dv = self.matrix.ncols();
        let d = self.matrix.nrows();
        let q = CMat::<T>::identity(dv, dv) - &self.projector;
        let (vals, vecs) = hermitian_eig(&q);
        let mut u = CMat::<T>::zeros(dv, dv);
        u.rows_mut(0, d).copy_from(&self.matrix);
        let mut row = d;
        for k in (0..dv).rev() {
            if row == dv {
                break;
            }
            if vals[k] > T::lit(0.5) {
                u.set_row(row, &vecs.column(k).adjoint());
                row += 1;
            }
        }
        u
    }
}

/// A PEPS on a graph: sites own contiguous blocks of virtual qudits, one per incident edge.
#[derive(Clone, Debug)]
pub struct PepsModel<T: Real> {
    pub graph: PepsGraph,
    pub maps: Vec<ProjectionMap<T>>,
    pub bond_dim: usize,
    pub r_star: usize,
    pub reg: QuditRegister,
    offsets: Vec<usize>,
}

impl<T: Real> PepsModel<T> {
    pub fn new(graph: PepsGraph, bond_dim: usize, matrices: Vec<CMat<T>>) -> Result<Self> {
        if bond_dim < 2 {
            return Err(Error::InvalidSpec("bond dimension must be at least 2".into()));
        }
        if matrices.len() != graph.n_sites() {
            return Err(Error::InvalidSpec("one projection map per site required".into()));
        }
        let mut maps = Vec::new();
        for (s, m) in matrices.into_iter().enumerate() {
            let dv = bond_dim.pow(graph.degree[s] as u32);
            if m.ncols() != dv {
                return Err(Error::Shape(format!("site {s} map has {} columns, expected {dv}", m.ncols())));
            }
            if m.nrows() < 1 {
                return Err(Error::Shape(format!("site {s} has an empty code space")));
            }
            maps.push(ProjectionMap::new(s, m)?);
        }
        let mut offsets = Vec::with_capacity(graph.n_sites());
        let mut acc = 0;
        for &d in &graph.degree {
            offsets.push(acc);
            acc += d;
        }
        let reg = QuditRegister::new(vec![bond_dim; acc]);
        Ok(Self { graph, maps, bond_dim, r_star: 6, reg, offsets })
    }

    /// Identity maps: the code space is the whole virtual space of every site.
    pub fn identity_maps(graph: PepsGraph, bond_dim: usize) -> Result<Self> {
        let mats = graph.degree.iter().map(|&d| CMat::<T>::identity(bond_dim.pow(d as u32), bond_dim.pow(d as u32))).collect();
        Self::new(graph, bond_dim, mats)
    }

    pub fn n_sites(&self) -> usize {
        self.graph.n_sites()
    }

    pub fn site_qudits(&self, s: usize) -> Vec<usize> {
        (self.offsets[s]..self.offsets[s] + self.graph.degree[s]).collect()
    }

    pub fn sites_qudits(&self, sites: &BTreeSet<usize>) -> Vec<usize> {
        sites.iter().flat_map(|&s| self.site_qudits(s)).collect()
    }

    pub fn site_groups(&self) -> Vec<Vec<usize>> {
        (0..self.n_sites()).map(|s| self.site_qudits(s)).collect()
    }

    pub fn edge_qudits(&self, e: usize) -> (usize, usize) {
        let ed = &self.graph.edges[e];
        (self.offsets[ed.a] + ed.slot_a, self.offsets[ed.b] + ed.slot_b)
    }

    pub fn code_dim(&self) -> usize {
        self.maps.iter().map(|m| m.code_dim()).product()
    }

    /// Columns form an orthonormal basis of the range of P0 (Kronecker product of 𝒫_s†).
    pub fn code_basis(&self) -> CMat<T> {
        let mut u = CMat::<T>::identity(1, 1);
        for m in &self.maps {
            u = u.kronecker(&m.matrix.adjoint());
        }
        u
    }

    pub fn apply_site_projector(&self, s: usize, x: &CMat<T>) -> CMat<T> {
        apply_local(&self.reg, &self.site_qudits(s), &self.maps[s].projector, x)
    }

    pub fn apply_sites_projector(&self, sites: &BTreeSet<usize>, x: &CMat<T>) -> CMat<T> {
        let mut y = x.clone();
        for &s in sites {
            y = self.apply_site_projector(s, &y);
        }
        y
    }

    /// `M_e` applied to a block; `M_e` projects onto the normalized maximally entangled pair.
    pub fn apply_edge_projector(&self, e: usize, x: &CMat<T>) -> CMat<T> {
        let (qa, qb) = self.edge_qudits(e);
        let d = self.bond_dim;
        let (sa, sb) = (self.reg.stride(qa), self.reg.stride(qb));
        let inv = T::one() / T::lit(d as f64);
        let mut y = CMat::<T>::zeros(x.nrows(), x.ncols());
        let bases = self.reg.bases(&[qa, qb]);
        for col in 0..x.ncols() {
            for &b in &bases {
                let mut s = czero::<T>();
                for k in 0..d {
                    s += x[(b + k * sa + k * sb, col)];
                }
                let s = s * cr(inv);
                for k in 0..d {
                    y[(b + k * sa + k * sb, col)] = s;
                }
            }
        }
        y
    }

    pub fn edge_projector_local(&self) -> CMat<T> {
        let d = self.bond_dim;
        let inv = T::one() / T::lit(d as f64);
        CMat::<T>::from_fn(d * d, d * d, |r, c| if r % (d + 1) == 0 && c % (d + 1) == 0 { cr(inv) } else { czero() })
    }

    pub fn apply_v(&self, x: &CMat<T>) -> CMat<T> {
        let mut y = CMat::<T>::zeros(x.nrows(), x.ncols());
        for e in 0..self.graph.edges.len() {
            y -= self.apply_edge_projector(e, x);
        }
        y
    }

    /// `P0 = Π_s P_s` on a block.
    pub fn apply_p0(&self, x: &CMat<T>) -> CMat<T> {
        let all: BTreeSet<usize> = (0..self.n_sites()).collect();
        self.apply_sites_projector(&all, x)
    }

    pub fn to_maps_json(&self) -> Value {
        let maps: Vec<Value> = self
            .maps
            .iter()
            .map(|m| {
                let data: Vec<Value> =
                    (0..m.matrix.nrows()).flat_map(|r| (0..m.matrix.ncols()).map(move |c| (r, c))).map(|(r, c)| {
                        let z = m.matrix[(r, c)];
                        json!([z.re.f64(), z.im.f64()])
                    }).collect();
                json!({ "site": m.site, "rows": m.matrix.nrows(), "cols": m.matrix.ncols(), "data": data })
            })
            .collect();
        json!({ "bond_dim": self.bond_dim, "maps": maps })
    }

    pub fn from_maps_json(graph: PepsGraph, v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::InvalidSpec(format!("maps json: {m}"));
        let bond = v.get("bond_dim").and_then(Value::as_u64).ok_or_else(|| bad("bond_dim"))? as usize;
        let mut mats = vec![None; graph.n_sites()];
        for m in v.get("maps").and_then(Value::as_array).ok_or_else(|| bad("maps"))? {
            let site = m.get("site").and_then(Value::as_u64).ok_or_else(|| bad("site"))? as usize;
            let rows = m.get("rows").and_then(Value::as_u64).ok_or_else(|| bad("rows"))? as usize;
            let cols = m.get("cols").and_then(Value::as_u64).ok_or_else(|| bad("cols"))? as usize;
            let data = m.get("data").and_then(Value::as_array).ok_or_else(|| bad("data"))?;
            if data.len() != rows * cols || site >= mats.len() {
                return Err(bad("size"));
            }
            let mut mat = CMat::<T>::zeros(rows, cols);
            for (k, z) in data.iter().enumerate() {
                let re = z.get(0).and_then(Value::as_f64).ok_or_else(|| bad("entry"))?;
                let im = z.get(1).and_then(Value::as_f64).ok_or_else(|| bad("entry"))?;
                mat[(k / cols, k % cols)] = Complex::new(T::lit(re), T::lit(im));
            }
            mats[site] = Some(mat);
        }
        let mats: Option<Vec<CMat<T>>> = mats.into_iter().collect();
        Self::new(graph, bond, mats.ok_or_else(|| bad("missing site"))?)
    }
}

/// `M_e` as a sparse operator.
pub fn entangled_edge_projector<T: Real>(model: &PepsModel<T>, e: usize) -> Result<SparseOperator<T>> {
    let (qa, qb) = model.edge_qudits(e);
    kron_embed(&model.edge_projector_local(), &[qa, qb], &model.reg)
}

/// Normalized `Π_s P_s Π_e |Φ_D(e)⟩` as a dense vector.
pub fn peps_vector<T: Real>(model: &PepsModel<T>) -> Result<CVec<T>> {
    let n = model.reg.total_dim();
    let mut v = CMat::<T>::zeros(n, 1);
    // Product of normalized Bell pairs: amplitude D^{-E/2} on configurations with equal edge digits.
    let ne = model.graph.edges.len();
    let amp = cr(T::one() / T::lit(model.bond_dim as f64).powi(ne as i32).sqrt());
    let mut idx = vec![0usize; ne];
    loop {
        let mut i = 0;
        for (e, &k) in idx.iter().enumerate() {
            let (qa, qb) = model.edge_qudits(e);
            i += k * (model.reg.stride(qa) + model.reg.stride(qb));
        }
        v[(i, 0)] = amp;
        let mut e = ne;
        let done = loop {
            if e == 0 {
                break true;
            }
            e -= 1;
            idx[e] += 1;
            if idx[e] < model.bond_dim {
                break false;
            }
            idx[e] = 0;
        };
        if done {
            break;
        }
    }
    let v = model.apply_p0(&v);
    let nrm = v.norm();
    if nrm <= T::lit(1e-12) {
        return Err(Error::NullState("site projectors annihilate the entangled-pair product".into()));
    }
    Ok(v.column(0).unscale(nrm))
}

pub fn assemble_peps_state<T: Real>(model: &PepsModel<T>) -> Result<SparseState<T>> {
    let v = peps_vector(model)?;
    Ok(SparseState::from_dense(&model.reg, v.as_slice()))
}

/// A low-rank projector `B B†` on a set of qudits.
#[derive(Clone, Debug)]
pub struct LocalProjector<T: Real> {
    pub qudits: Vec<usize>,
    pub basis: CMat<T>,
    pub ambiguous: bool,
}

impl<T: Real> LocalProjector<T> {
    pub fn apply(&self, reg: &QuditRegister, x: &CMat<T>) -> CMat<T> {
        let offs = reg.local_offsets(&self.qudits);
        let bases = reg.bases(&self.qudits);
        let mut y = CMat::<T>::zeros(x.nrows(), x.ncols());
        let bad = self.basis.adjoint();
        for col in 0..x.ncols() {
            for &b in &bases {
                let v = CVec::<T>::from_fn(offs.len(), |l, _| x[(b + offs[l], col)]);
                let w = &self.basis * (&bad * v);
                for (l, &o) in offs.iter().enumerate() {
                    y[(b + o, col)] = w[l];
                }
            }
        }
        y
    }
}

/// Projector onto the support of the reduced state of `psi` on `qudits`.
pub fn support_projector<T: Real>(reg: &QuditRegister, qudits: &[usize], psi: &CVec<T>, rank_tol: T) -> LocalProjector<T> {
    let offs = reg.local_offsets(qudits);
    let bases = reg.bases(qudits);
    // Matrix M[local, rest] of amplitudes.
    let m = CMat::<T>::from_fn(offs.len(), bases.len(), |l, r| psi[bases[r] + offs[l]]);
    let small_rest = bases.len() < offs.len();
    let g = if small_rest { m.adjoint() * &m } else { &m * m.adjoint() };
    let (vals, vecs) = hermitian_eig(&g);
    let top = vals.last().copied().unwrap_or_else(T::zero);
    let thr = rank_tol * top;
    let mut cols = Vec::new();
    let mut ambiguous = false;
    for k in 0..vals.len() {
        if vals[k] > thr {
            if vals[k] < T::lit(10.0) * thr {
                ambiguous = true;
            }
            let v = vecs.column(k).clone_owned();
            let u = if small_rest { (&m * v).unscale(vals[k].sqrt()) } else { v };
            cols.push(u);
        } else if vals[k] > thr / T::lit(10.0) {
            ambiguous = true;
        }
    }
    let mut basis = CMat::<T>::zeros(offs.len(), cols.len());
    for (j, c) in cols.iter().enumerate() {
        basis.set_column(j, c);
    }
    LocalProjector { qudits: qudits.to_vec(), basis, ambiguous }
}

/// Terms `ϖ_R` of the canonical parent Hamiltonian `−Σ_R ϖ_R`.
pub fn canonical_parent_terms<T: Real>(model: &PepsModel<T>, regions: &[Region]) -> Result<Vec<LocalProjector<T>>> {
    let psi = peps_vector(model)?;
    let mut out = Vec::new();
    for r in regions {
        let q = model.sites_qudits(&r.sites);
        if q.len() > 14 {
            return Err(Error::Resource(format!("region with {} virtual qudits", q.len())));
        }
        out.push(support_projector(&model.reg, &q, &psi, T::lit(1e-10)));
    }
    Ok(out)
}

/// `H_can = −Σ_R ϖ_R` as a sparse operator (regions must be small enough to embed).
pub fn canonical_parent_hamiltonian<T: Real>(model: &PepsModel<T>, regions: &[Region]) -> Result<SparseOperator<T>> {
    let terms = canonical_parent_terms(model, regions)?;
    let mut h = SparseOperator::zero(&model.reg);
    for t in &terms {
        if model.reg.support_dim(&t.qudits) > 1 << 10 {
            return Err(Error::Resource("support projector too large to embed sparsely".into()));
        }
        let local = &t.basis * t.basis.adjoint();
        h = h.axpby(cone(), &kron_embed(&local, &t.qudits, &model.reg)?, -cone::<T>());
    }
    Ok(h)
}

/// `−Σ_R ϖ_R` as a linear operator.
pub fn canonical_parent_op<'a, T: Real>(model: &'a PepsModel<T>, terms: &'a [LocalProjector<T>]) -> impl LinOp<T> + 'a {
    FnOp {
        dim: model.reg.total_dim(),
        f: move |x: &CMat<T>| {
            let mut y = CMat::<T>::zeros(x.nrows(), x.ncols());
            for t in terms {
                y -= t.apply(&model.reg, x);
            }
            y
        },
    }
}

/// Interleaved site and edge regions `{R_P_i}, {R_E_i}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UpsilonSpec {
    pub site_regions: Vec<BTreeSet<usize>>,
    pub edge_regions: Vec<BTreeSet<usize>>,
}

impl UpsilonSpec {
    pub fn single(edges: impl IntoIterator<Item = usize>) -> Self {
        Self { site_regions: vec![BTreeSet::new()], edge_regions: vec![edges.into_iter().collect()] }
    }

    pub fn union_sites(&self, g: &PepsGraph) -> BTreeSet<usize> {
        let mut s: BTreeSet<usize> = self.site_regions.iter().flatten().copied().collect();
        for r in &self.edge_regions {
            s.extend(g.edge_sites(r));
        }
        s
    }

    pub fn n_edges(&self) -> usize {
        self.edge_regions.iter().map(|r| r.len()).sum()
    }
}

fn apply_word<T: Real>(model: &PepsModel<T>, spec: &UpsilonSpec, x: &CMat<T>, reversed: bool) -> CMat<T> {
    let k = spec.site_regions.len().max(spec.edge_regions.len());
    let empty = BTreeSet::new();
    let mut y = x.clone();
    let factors: Vec<usize> = if reversed { (0..k).collect() } else { (0..k).rev().collect() };
    for i in factors {
        let ps = spec.site_regions.get(i).unwrap_or(&empty);
        let es = spec.edge_regions.get(i).unwrap_or(&empty);
        // Factor i is P_{R_P_i} · Π M_e; the adjoint reverses the order.
        if reversed {
            y = model.apply_sites_projector(ps, &y);
            for &e in es {
                y = model.apply_edge_projector(e, &y);
            }
        } else {
            for &e in es {
                y = model.apply_edge_projector(e, &y);
            }
            y = model.apply_sites_projector(ps, &y);
        }
    }
    y
}

/// `Υ = ½ P_∪ (Π_i P_{R_P_i} Π_{e∈R_E_i} M_e) P_∪ + h.c.` applied to a block.
pub fn apply_upsilon<T: Real>(model: &PepsModel<T>, spec: &UpsilonSpec, x: &CMat<T>) -> CMat<T> {
    let un = spec.union_sites(&model.graph);
    let px = model.apply_sites_projector(&un, x);
    let a = apply_word(model, spec, &px, false);
    let b = apply_word(model, spec, &px, true);
    model.apply_sites_projector(&un, &(a + b)).scale(T::lit(0.5))
}

pub fn build_upsilon<T: Real>(model: &PepsModel<T>, spec: &UpsilonSpec) -> SparseOperator<T> {
    let n = model.reg.total_dim();
    let dense = apply_upsilon(model, spec, &CMat::<T>::identity(n, n));
    SparseOperator::from_dense(&model.reg, &dense)
}

#[derive(Clone, Debug, Serialize)]
pub struct QiEntry {
    pub spec: UpsilonSpec,
    pub eta: f64,
    pub residual: f64,
    pub pass: bool,
}

/// Top eigenvalue of Υ and the residual of `Υψ = ηψ` for each spec.
pub fn verify_quasi_injectivity<T: Real>(model: &PepsModel<T>, specs: &[UpsilonSpec], tol: T) -> Result<Vec<QiEntry>> {
    let psi = peps_vector(model)?;
    let psim = CMat::<T>::from_column_slice(psi.len(), 1, psi.as_slice());
    let all: BTreeSet<usize> = (0..model.n_sites()).collect();
    let u = model.code_basis();
    let n = model.reg.total_dim();
    let mut out = Vec::new();
    for spec in specs {
        let covers_all = spec.union_sites(&model.graph) == all;
        let eta = if covers_all {
            // Υ = P0 Υ P0: its nonzero spectrum lives on the code space.
            let block = u.adjoint() * apply_upsilon(model, spec, &u);
            let top = hermitian_eig(&block).0.last().copied().unwrap_or_else(T::zero);
            if u.ncols() < n { top.max(T::zero()) } else { top }
        } else {
            let op = FnOp { dim: n, f: |x: &CMat<T>| -apply_upsilon(model, spec, x) };
            let sd = eig_low(&op, 1, Some(&psim), &EigOptions { tol: T::lit(1e-11), ..Default::default() })?;
            -sd.values[0]
        };
        let r = apply_upsilon(model, spec, &psim) - psim.scale(eta);
        let residual = r.norm();
        out.push(QiEntry { spec: spec.clone(), eta: eta.f64(), residual: residual.f64(), pass: residual <= tol });
    }
    Ok(out)
}

/// Υ specs: single edge regions of up to `max_single` edges with every site-region choice inside
/// the union, and two-region interleavings of single edges with total ≤ `max_total` edges.
pub fn upsilon_family<T: Real>(model: &PepsModel<T>, max_single: usize, max_total: usize) -> Vec<UpsilonSpec> {
    let g = &model.graph;
    let regions = crate::lattice::enumerate_connected_regions(g, max_single.max(1));
    let subsets = |s: &BTreeSet<usize>| -> Vec<BTreeSet<usize>> {
        let v: Vec<usize> = s.iter().copied().collect();
        (0..(1usize << v.len())).map(|m| (0..v.len()).filter(|i| m >> i & 1 == 1).map(|i| v[i]).collect()).collect()
    };
    let mut out = Vec::new();
    for r in regions.iter().filter(|r| r.edges.len() <= max_single) {
        for ps in subsets(&r.sites) {
            out.push(UpsilonSpec { site_regions: vec![ps], edge_regions: vec![r.edges.clone()] });
        }
    }
    if max_total >= 2 {
        let ne = g.edges.len();
        for e1 in 0..ne {
            for e2 in 0..ne {
                let r1 = BTreeSet::from([e1]);
                let r2 = BTreeSet::from([e2]);
                let mut un = g.edge_sites(&r1);
                un.extend(g.edge_sites(&r2));
                if !crate::lattice::is_connected(g, &r1.union(&r2).copied().collect()) {
                    continue;
                }
                for p1 in subsets(&un) {
                    for p2 in subsets(&un) {
                        out.push(UpsilonSpec { site_regions: vec![p1.clone(), p2], edge_regions: vec![r1.clone(), r2.clone()] });
                    }
                }
            }
        }
    }
    out
}

/// `H_par = −Σ c_i Υ_i` as a dense operator.
pub fn parent_from_upsilons<T: Real>(model: &PepsModel<T>, specs: &[UpsilonSpec], coeffs: &[T]) -> Result<CMat<T>> {
    if specs.len() != coeffs.len() {
        return Err(Error::InvalidArgument("one coefficient per spec".into()));
    }
    if let Some(c) = coeffs.iter().find(|c| **c <= T::zero()) {
        return Err(Error::InvalidArgument(format!("nonpositive coefficient {c}")));
    }
    let n = model.reg.total_dim();
    let id = CMat::<T>::identity(n, n);
    let mut h = CMat::<T>::zeros(n, n);
    for (s, &c) in specs.iter().zip(coeffs) {
        h -= apply_upsilon(model, s, &id).scale(c);
    }
    Ok(h)
}

//! Sparse complex operators and states on qudit registers.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{abs, czero, CMat, Real};

/// Tensor product of qudits; the first qudit is the most significant digit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuditRegister {
    dims: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl QuditRegister {
    pub fn new(dims: Vec<usize>) -> Self {
        let mut strides = vec![1usize; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        let total = dims.iter().product();
        Self { dims, strides, total }
    }

    pub fn qubits(n: usize) -> Self {
        Self::new(vec![2; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.total
    }

    pub fn stride(&self, q: usize) -> usize {
        self.strides[q]
    }

    pub fn digit(&self, index: usize, q: usize) -> usize {
        (index / self.strides[q]) % self.dims[q]
    }

    pub fn index(&self, config: &[usize]) -> usize {
        config.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    pub fn config(&self, index: usize) -> Vec<usize> {
        (0..self.dims.len()).map(|q| self.digit(index, q)).collect()
    }

    pub fn support_dim(&self, support: &[usize]) -> usize {
        support.iter().map(|&q| self.dims[q]).product()
    }

    /// Offsets of every local configuration on `support` (first listed qudit most significant).
    pub fn local_offsets(&self, support: &[usize]) -> Vec<usize> {
        let mut offs = vec![0usize];
        for &q in support {
            let mut next = Vec::with_capacity(offs.len() * self.dims[q]);
            for &o in &offs {
                for d in 0..self.dims[q] {
                    next.push(o + d * self.strides[q]);
                }
            }
            offs = next;
        }
        offs
    }

    /// Indices whose digits on `support` are all zero.
    pub fn bases(&self, support: &[usize]) -> Vec<usize> {
        let rest: Vec<usize> = (0..self.dims.len()).filter(|q| !support.contains(q)).collect();
        self.local_offsets(&rest)
    }
}

/// Anything that maps blocks of column vectors to blocks of column vectors.
pub trait LinOp<T: Real> {
    fn dim(&self) -> usize;
    fn apply(&self, x: &CMat<T>) -> CMat<T>;
}

/// Closure-backed linear operator.
pub struct FnOp<F> {
    pub dim: usize,
    pub f: F,
}

impl<T: Real, F: Fn(&CMat<T>) -> CMat<T>> LinOp<T> for FnOp<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, x: &CMat<T>) -> CMat<T> {
        (self.f)(x)
    }
}

impl<T: Real> LinOp<T> for CMat<T> {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn apply(&self, x: &CMat<T>) -> CMat<T> {
        self * x
    }
}

/// Applies a dense operator on `support` and the identity elsewhere.
pub fn apply_local<T: Real>(reg: &QuditRegister, support: &[usize], op: &CMat<T>, x: &CMat<T>) -> CMat<T> {
    let offs = reg.local_offsets(support);
    let bases = reg.bases(support);
    let dl = offs.len();
    assert_eq!(op.nrows(), dl, "local operator dimension");
    let mut y = CMat::<T>::zeros(x.nrows(), x.ncols());
    let mut buf = vec![czero::<T>(); dl];
    for col in 0..x.ncols() {
        let xc = x.column(col);
        for &b in &bases {
            for (l, &o) in offs.iter().enumerate() {
                buf[l] = xc[b + o];
            }
            if buf.iter().all(|z| z.is_zero()) {
                continue;
            }
            for (r, &o) in offs.iter().enumerate() {
                let mut acc = czero::<T>();
                for (l, v) in buf.iter().enumerate() {
                    acc += op[(r, l)] * *v;
                }
                y[(b + o, col)] = acc;
            }
        }
    }
    y
}

/// Complex sparse operator in compressed-row form.
#[derive(Clone, Debug)]
pub struct SparseOperator<T: Real> {
    reg: QuditRegister,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex<T>>,
    pub hermitian: bool,
    pub support: BTreeSet<usize>,
}

impl<T: Real> SparseOperator<T> {
    /// Builds from (row, col, value) triplets; duplicates are summed, exact zeros dropped.
    pub fn from_triplets(reg: &QuditRegister, trip: impl IntoIterator<Item = (usize, usize, Complex<T>)>) -> Self {
        let mut map: BTreeMap<(usize, usize), Complex<T>> = BTreeMap::new();
        for (r, c, v) in trip {
            *map.entry((r, c)).or_insert_with(czero) += v;
        }
        let mut op = Self::from_sorted(reg, map.into_iter().filter(|(_, v)| !v.is_zero()));
        op.support = op.compute_support();
        op.hermitian = op.hermitian_residual() <= T::lit(1e-12);
        op
    }

    fn from_sorted(reg: &QuditRegister, entries: impl Iterator<Item = ((usize, usize), Complex<T>)>) -> Self {
        let n = reg.total_dim();
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut cur = 0;
        for ((r, c), v) in entries {
            while cur < r {
                cur += 1;
                row_ptr[cur] = cols.len();
            }
            cols.push(c);
            vals.push(v);
        }
        while cur < n {
            cur += 1;
            row_ptr[cur] = cols.len();
        }
        Self { reg: reg.clone(), row_ptr, cols, vals, hermitian: false, support: BTreeSet::new() }
    }

    pub fn zero(reg: &QuditRegister) -> Self {
        Self::from_sorted(reg, std::iter::empty()).with_flags(true, BTreeSet::new())
    }

    pub fn identity(reg: &QuditRegister) -> Self {
        let n = reg.total_dim();
        Self::from_sorted(reg, (0..n).map(|i| ((i, i), Complex::new(T::one(), T::zero()))))
            .with_flags(true, BTreeSet::new())
    }

    pub fn from_dense(reg: &QuditRegister, m: &CMat<T>) -> Self {
        let mut trip = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if !m[(r, c)].is_zero() {
                    trip.push((r, c, m[(r, c)]));
                }
            }
        }
        Self::from_triplets(reg, trip)
    }

    fn with_flags(mut self, hermitian: bool, support: BTreeSet<usize>) -> Self {
        self.hermitian = hermitian;
        self.support = support;
        self
    }

    pub fn register(&self) -> &QuditRegister {
        &self.reg
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex<T>)> + '_ {
        (0..self.reg.total_dim())
            .flat_map(move |r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k])))
    }

    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        let row = &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]];
        match row.binary_search(&c) {
            Ok(k) => self.vals[self.row_ptr[r] + k],
            Err(_) => czero(),
        }
    }

    pub fn to_dense(&self) -> CMat<T> {
        let n = self.reg.total_dim();
        let mut m = CMat::<T>::zeros(n, n);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn max_row_fanout(&self) -> usize {
        (0..self.reg.total_dim()).map(|r| self.row_ptr[r + 1] - self.row_ptr[r]).max().unwrap_or(0)
    }

    pub fn adjoint(&self) -> Self {
        let trip: Vec<_> = self.entries().map(|(r, c, v)| (c, r, v.conj())).collect();
        let mut map: BTreeMap<(usize, usize), Complex<T>> = BTreeMap::new();
        for (r, c, v) in trip {
            map.insert((r, c), v);
        }
        let sup = self.support.clone();
        Self::from_sorted(&self.reg, map.into_iter()).with_flags(self.hermitian, sup)
    }

    pub fn hermitian_residual(&self) -> T {
        let mut worst = T::zero();
        for (r, c, v) in self.entries() {
            worst = worst.max(abs(v - self.get(c, r).conj()));
        }
        worst
    }

    /// Exact support: qudits on which the operator is not the identity factor.
    pub fn compute_support(&self) -> BTreeSet<usize> {
        let tol = T::lit(1e-13);
        let mut sup = BTreeSet::new();
        for q in 0..self.reg.len() {
            let st = self.reg.stride(q);
            let d = self.reg.dims()[q];
            let mut acts = false;
            for (r, c, v) in self.entries() {
                let (dr, dc) = (self.reg.digit(r, q), self.reg.digit(c, q));
                if dr != dc {
                    acts = true;
                    break;
                }
                // Invariance under shifting both digits of qudit q.
                for k in 1..d {
                    let nd = (dr + k) % d;
                    let r2 = r - dr * st + nd * st;
                    let c2 = c - dc * st + nd * st;
                    if abs(self.get(r2, c2) - v) > tol {
                        acts = true;
                        break;
                    }
                }
                if acts {
                    break;
                }
            }
            if acts {
                sup.insert(q);
            }
        }
        sup
    }

    fn combine(&self, other: &Self, a: Complex<T>, b: Complex<T>) -> Self {
        assert_eq!(self.reg, other.reg, "register mismatch");
        let mut map: BTreeMap<(usize, usize), Complex<T>> = BTreeMap::new();
        for (r, c, v) in self.entries() {
            *map.entry((r, c)).or_insert_with(czero) += a * v;
        }
        for (r, c, v) in other.entries() {
            *map.entry((r, c)).or_insert_with(czero) += b * v;
        }
        let real = a.im.is_zero() && b.im.is_zero();
        let herm = self.hermitian && other.hermitian && real;
        let sup: BTreeSet<usize> = self.support.union(&other.support).copied().collect();
        let mut op = Self::from_sorted(&self.reg, map.into_iter().filter(|(_, v)| !v.is_zero())).with_flags(herm, sup);
        op.support = op.compute_support();
        op
    }

    pub fn add(&self, other: &Self) -> Self {
        let one = Complex::new(T::one(), T::zero());
        self.combine(other, one, one)
    }

    /// `a·self + b·other`.
    pub fn axpby(&self, a: Complex<T>, other: &Self, b: Complex<T>) -> Self {
        self.combine(other, a, b)
    }

    pub fn scale(&self, a: Complex<T>) -> Self {
        let mut op = self.clone();
        for v in &mut op.vals {
            *v *= a;
        }
        op.hermitian = self.hermitian && a.im.is_zero();
        op
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.reg, other.reg, "register mismatch");
        let n = self.reg.total_dim();
        let mut entries = Vec::new();
        for r in 0..n {
            let mut acc: BTreeMap<usize, Complex<T>> = BTreeMap::new();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let (m, a) = (self.cols[k], self.vals[k]);
                for l in other.row_ptr[m]..other.row_ptr[m + 1] {
                    *acc.entry(other.cols[l]).or_insert_with(czero) += a * other.vals[l];
                }
            }
            entries.extend(acc.into_iter().filter(|(_, v)| !v.is_zero()).map(|(c, v)| ((r, c), v)));
        }
        let sup: BTreeSet<usize> = self.support.union(&other.support).copied().collect();
        let mut op = Self::from_sorted(&self.reg, entries.into_iter()).with_flags(false, sup);
        op.hermitian = op.hermitian_residual() <= T::lit(1e-12);
        op
    }

    pub fn apply_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.reg.total_dim();
        let mut y = vec![czero::<T>(); n];
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = czero::<T>();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yr = acc;
        }
        y
    }

    /// Coordinate-format text: `row col re im`, row-major order.
    pub fn export_coo(&self, w: &mut impl Write) -> std::io::Result<()> {
        for (r, c, v) in self.entries() {
            writeln!(w, "{} {} {:.17e} {:.17e}", r, c, v.re.f64(), v.im.f64())?;
        }
        Ok(())
    }
}

impl<T: Real> LinOp<T> for SparseOperator<T> {
    fn dim(&self) -> usize {
        self.reg.total_dim()
    }

    fn apply(&self, x: &CMat<T>) -> CMat<T> {
        let n = self.reg.total_dim();
        let mut y = CMat::<T>::zeros(n, x.ncols());
        for col in 0..x.ncols() {
            let xc = x.column(col);
            for r in 0..n {
                let mut acc = czero::<T>();
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    acc += self.vals[k] * xc[self.cols[k]];
                }
                y[(r, col)] = acc;
            }
        }
        y
    }
}

/// Embeds a dense local operator on `support`, identity elsewhere.
pub fn kron_embed<T: Real>(local: &CMat<T>, support: &[usize], reg: &QuditRegister) -> Result<SparseOperator<T>> {
    let dl = reg.support_dim(support);
    if local.nrows() != dl || local.ncols() != dl {
        return Err(Error::Shape(format!("local operator is {}x{}, support needs {dl}", local.nrows(), local.ncols())));
    }
    let mut seen = BTreeSet::new();
    if support.iter().any(|&q| q >= reg.len() || !seen.insert(q)) {
        return Err(Error::Shape("support indices out of range or repeated".into()));
    }
    let offs = reg.local_offsets(support);
    let mut trip = Vec::new();
    for &b in &reg.bases(support) {
        for r in 0..dl {
            for c in 0..dl {
                let v = local[(r, c)];
                if !v.is_zero() {
                    trip.push((b + offs[r], b + offs[c], v));
                }
            }
        }
    }
    let mut op = SparseOperator::from_triplets(reg, trip);
    // The embedded operator is the identity on qudits outside `support` by construction.
    op.support = op.support.intersection(&seen).copied().collect();
    Ok(op)
}

/// Hash-indexed sparse vector.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseState<T: Real> {
    pub reg: QuditRegister,
    pub amps: BTreeMap<usize, Complex<T>>,
}

impl<T: Real> SparseState<T> {
    pub fn new(reg: &QuditRegister) -> Self {
        Self { reg: reg.clone(), amps: BTreeMap::new() }
    }

    pub fn basis(reg: &QuditRegister, index: usize) -> Self {
        let mut s = Self::new(reg);
        s.amps.insert(index, Complex::new(T::one(), T::zero()));
        s
    }

    pub fn from_dense(reg: &QuditRegister, v: &[Complex<T>]) -> Self {
        let amps = v.iter().enumerate().filter(|(_, z)| !z.is_zero()).map(|(i, z)| (i, *z)).collect();
        Self { reg: reg.clone(), amps }
    }

    pub fn to_dense(&self) -> Vec<Complex<T>> {
        let mut v = vec![czero::<T>(); self.reg.total_dim()];
        for (&i, &z) in &self.amps {
            v[i] = z;
        }
        v
    }

    pub fn norm(&self) -> T {
        self.amps.values().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        let mut s = self.clone();
        for z in s.amps.values_mut() {
            *z = z.unscale(n);
        }
        s
    }

    pub fn dot(&self, other: &Self) -> Complex<T> {
        let mut acc = czero::<T>();
        for (i, z) in &self.amps {
            if let Some(w) = other.amps.get(i) {
                acc += z.conj() * *w;
            }
        }
        acc
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }
}

/// Exact sparse matrix-vector product.
pub fn apply_sparse<T: Real>(op: &SparseOperator<T>, state: &SparseState<T>) -> Result<SparseState<T>> {
    if op.register() != &state.reg {
        return Err(Error::Shape("register mismatch".into()));
    }
    let adj = op.adjoint();
    // Columns of `op` are rows of its adjoint.
    let mut acc: HashMap<usize, Complex<T>> = HashMap::new();
    for (&c, &x) in &state.amps {
        for k in adj.row_ptr[c]..adj.row_ptr[c + 1] {
            *acc.entry(adj.cols[k]).or_insert_with(czero) += adj.vals[k].conj() * x;
        }
    }
    let amps = acc.into_iter().filter(|(_, z)| !z.is_zero()).collect();
    Ok(SparseState { reg: state.reg.clone(), amps })
}

/// Orthonormal basis (columns) of the span of `states`.
pub fn orthonormalize<T: Real>(states: &[SparseState<T>]) -> Result<CMat<T>> {
    let Some(first) = states.first() else {
        return Err(Error::Degenerate { index: 0, msg: "no states".into() });
    };
    let n = first.reg.total_dim();
    let mut q = CMat::<T>::zeros(n, states.len());
    for (i, s) in states.iter().enumerate() {
        if s.reg != first.reg {
            return Err(Error::Shape("register mismatch".into()));
        }
        let mut v = crate::scalar::CVec::<T>::from_vec(s.to_dense());
        let n0 = v.norm();
        for _ in 0..2 {
            for j in 0..i {
                let qj = q.column(j).clone_owned();
                let ov = qj.dotc(&v);
                v -= qj * ov;
            }
        }
        let n1 = v.norm();
        if n0.is_zero() || n1 <= T::lit(1e-10) * n0 {
            return Err(Error::Degenerate { index: i, msg: "linearly dependent on earlier states".into() });
        }
        q.set_column(i, &v.unscale(n1));
    }
    Ok(q)
}

/// Hermitian projector onto the span of `states`.
pub fn projector_onto<T: Real>(states: &[SparseState<T>]) -> Result<SparseOperator<T>> {
    let q = orthonormalize(states)?;
    let reg = &states[0].reg;
    let rows: Vec<usize> = (0..q.nrows()).filter(|&r| q.row(r).iter().any(|z| !z.is_zero())).collect();
    let mut trip = Vec::new();
    for &r in &rows {
        for &c in &rows {
            let mut v = czero::<T>();
            for k in 0..q.ncols() {
                v += q[(r, k)] * q[(c, k)].conj();
            }
            if abs(v) > T::lit(1e-15) {
                trip.push((r, c, v));
            }
        }
    }
    Ok(SparseOperator::from_triplets(reg, trip))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{c, fro};

    fn pauli(k: usize) -> CMat<f64> {
        match k {
            0 => CMat::identity(2, 2),
            1 => CMat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
            2 => CMat::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
            _ => CMat::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
        }
    }

    #[test]
    fn z_on_first_qubit() {
        let reg = QuditRegister::qubits(2);
        let z = kron_embed(&pauli(3), &[0], &reg).unwrap();
        let d: Vec<f64> = (0..4).map(|i| z.get(i, i).re).collect();
        assert_eq!(d, vec![1., 1., -1., -1.]);
        assert_eq!(z.support, BTreeSet::from([0]));
    }

    #[test]
    fn xx_on_three_qubits_matches_kron() {
        let reg = QuditRegister::qubits(3);
        let xx = pauli(1).kronecker(&pauli(1));
        let op = kron_embed(&xx, &[0, 1], &reg).unwrap();
        assert_eq!(op.nnz(), 8);
        let dense = xx.kronecker(&pauli(0));
        assert!(fro(&(op.to_dense() - dense)) < 1e-15);
        assert!(op.hermitian);
    }

    #[test]
    fn identity_embed_has_empty_support() {
        let reg = QuditRegister::new(vec![2, 3]);
        let op = kron_embed(&CMat::<f64>::identity(3, 3), &[1], &reg).unwrap();
        assert!(op.support.is_empty());
        assert!(fro(&(op.to_dense() - CMat::identity(6, 6))) < 1e-15);
    }

    #[test]
    fn shape_error() {
        let reg = QuditRegister::qubits(2);
        assert!(kron_embed(&pauli(1), &[0, 1], &reg).is_err());
    }

    #[test]
    fn reversed_support_order() {
        let reg = QuditRegister::qubits(3);
        let local = pauli(1).kronecker(&pauli(3));
        let a = kron_embed(&local, &[2, 0], &reg).unwrap().to_dense();
        let b = pauli(3).kronecker(&pauli(0)).kronecker(&pauli(1));
        assert!(fro(&(a - b)) < 1e-15);
    }

    #[test]
    fn apply_local_matches_embed() {
        let reg = QuditRegister::new(vec![2, 3, 2]);
        let local = CMat::<f64>::from_fn(6, 6, |r, c| c64(r as f64 - c as f64, (r * c) as f64));
        let op = kron_embed(&local, &[2, 1], &reg).unwrap();
        let x = CMat::<f64>::from_fn(12, 3, |r, c| c64((r + c) as f64, r as f64 * 0.5));
        let y1 = op.apply(&x);
        let y2 = apply_local(&reg, &[2, 1], &local, &x);
        assert!(fro(&(y1 - y2)) < 1e-12);
    }

    fn c64(a: f64, b: f64) -> Complex<f64> {
        Complex::new(a, b)
    }

    #[test]
    fn bell_projector() {
        let reg = QuditRegister::qubits(2);
        let mut s = SparseState::<f64>::new(&reg);
        s.amps.insert(0, c64(1., 0.));
        s.amps.insert(3, c64(1., 0.));
        let p = projector_onto(&[s.normalized()]).unwrap().to_dense();
        let e = crate::linalg::hermitian_eig(&p).0;
        assert!((e[3] - 1.).abs() < 1e-12 && e[0].abs() < 1e-12);
        assert!(fro(&(&p * &p - &p)) < 1e-12);
    }

    #[test]
    fn dependent_states_named() {
        let reg = QuditRegister::qubits(1);
        let a = SparseState::<f64>::basis(&reg, 0);
        let b = a.clone();
        match projector_onto(&[a, b]) {
            Err(Error::Degenerate { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sparse_apply_edge_projector() {
        let reg = QuditRegister::qubits(2);
        let half = c64(0.5, 0.);
        let m = SparseOperator::from_triplets(&reg, vec![(0, 0, half), (0, 3, half), (3, 0, half), (3, 3, half)]);
        let out = apply_sparse(&m, &SparseState::basis(&reg, 0)).unwrap();
        assert_eq!(out.amps.len(), 2);
        assert!((out.amps[&0].re - 0.5).abs() < 1e-15 && (out.amps[&3].re - 0.5).abs() < 1e-15);
        let zero = SparseOperator::<f64>::zero(&reg);
        assert!(apply_sparse(&zero, &SparseState::basis(&reg, 2)).unwrap().is_empty());
        let id = SparseOperator::<f64>::identity(&reg);
        let s = SparseState::basis(&reg, 2);
        assert_eq!(apply_sparse(&id, &s).unwrap(), s);
    }

    #[test]
    fn coo_export_ordered() {
        let reg = QuditRegister::qubits(1);
        let x = kron_embed(&pauli(2), &[0], &reg).unwrap();
        let mut buf = Vec::new();
        x.export_coo(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("0 1 ") && lines[1].starts_with("1 0 "));
    }
}

//! Hilbert–Schmidt orthogonal decomposition of operators into region-supported parts.
//!
//! The component on a region `R` collects every generalized Pauli string whose support
//! (in units of qudit groups) is exactly `R`. It is computed without enumerating strings,
//! by inclusion–exclusion over normalized partial traces.

use std::collections::{BTreeMap, BTreeSet};

use crate::linalg::spectral_norm;
use crate::operator::{apply_local, QuditRegister};
use crate::scalar::{czero, fro, CMat, Real};

#[derive(Clone, Debug)]
pub struct Component<T: Real> {
    /// Group indices forming the region.
    pub region: BTreeSet<usize>,
    /// Qudits of the region, ascending.
    pub qudits: Vec<usize>,
    /// Operator on `qudits`.
    pub local: CMat<T>,
}

impl<T: Real> Component<T> {
    pub fn hs_norm(&self, reg: &QuditRegister) -> T {
        let rest = reg.total_dim() / reg.support_dim(&self.qudits);
        fro(&self.local) * T::lit(rest as f64).sqrt()
    }

    pub fn embed(&self, reg: &QuditRegister) -> CMat<T> {
        embed_dense(reg, &self.qudits, &self.local)
    }
}

/// Dense full-register matrix of a local operator.
pub fn embed_dense<T: Real>(reg: &QuditRegister, qudits: &[usize], local: &CMat<T>) -> CMat<T> {
    let n = reg.total_dim();
    apply_local(reg, qudits, local, &CMat::<T>::identity(n, n))
}

/// `Tr_{rest}(X) / d_rest` as an operator on `qudits` (ascending).
pub fn reduced<T: Real>(reg: &QuditRegister, qudits: &[usize], x: &CMat<T>) -> CMat<T> {
    let offs = reg.local_offsets(qudits);
    let bases = reg.bases(qudits);
    let dl = offs.len();
    let mut out = CMat::<T>::zeros(dl, dl);
    for &b in &bases {
        for (r, &orr) in offs.iter().enumerate() {
            for (c, &oc) in offs.iter().enumerate() {
                out[(r, c)] += x[(b + orr, b + oc)];
            }
        }
    }
    out.unscale(T::lit(bases.len() as f64))
}

/// `A ⊗ I` re-expressed on the larger ascending qudit list `big ⊇ small`.
fn widen<T: Real>(reg: &QuditRegister, small: &[usize], big: &[usize], a: &CMat<T>) -> CMat<T> {
    let sub = QuditRegister::new(big.iter().map(|&q| reg.dims()[q]).collect());
    let pos: Vec<usize> = small.iter().map(|q| big.iter().position(|b| b == q).expect("subset")).collect();
    let d = sub.total_dim();
    let offs = sub.local_offsets(&pos);
    let mut out = CMat::<T>::zeros(d, d);
    for b in sub.bases(&pos) {
        for (i, &oi) in offs.iter().enumerate() {
            for (j, &oj) in offs.iter().enumerate() {
                out[(b + oi, b + oj)] = a[(i, j)];
            }
        }
    }
    out
}

/// Decomposes a dense full-register operator into components on unions of `groups`.
///
/// Components with Hilbert–Schmidt norm at most `drop_tol` are omitted. The empty
/// region carries the identity part.
pub fn local_decompose<T: Real>(
    reg: &QuditRegister,
    groups: &[Vec<usize>],
    x: &CMat<T>,
    drop_tol: T,
) -> Vec<Component<T>> {
    let ng = groups.len();
    assert!(ng < 20, "too many groups for subset enumeration");
    let qudits_of = |mask: usize| {
        let mut q: Vec<usize> = (0..ng).filter(|g| mask >> g & 1 == 1).flat_map(|g| groups[g].iter().copied()).collect();
        q.sort();
        q
    };
    let mut red: Vec<CMat<T>> = Vec::with_capacity(1 << ng);
    for mask in 0..(1usize << ng) {
        red.push(reduced(reg, &qudits_of(mask), x));
    }
    let mut out = Vec::new();
    for mask in 0..(1usize << ng) {
        let big = qudits_of(mask);
        let d: usize = reg.support_dim(&big);
        let mut acc = CMat::<T>::from_element(d, d, czero());
        // Iterate subsets of mask.
        let mut sub = mask;
        loop {
            let sign = if (mask.count_ones() - sub.count_ones()) % 2 == 0 { T::one() } else { -T::one() };
            let w = widen(reg, &qudits_of(sub), &big, &red[sub]);
            acc += w.scale(sign);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & mask;
        }
        let comp = Component { region: (0..ng).filter(|g| mask >> g & 1 == 1).collect(), qudits: big, local: acc };
        if comp.hs_norm(reg) > drop_tol {
            out.push(comp);
        }
    }
    out
}

/// Sum of all components as a dense operator.
pub fn recombine<T: Real>(reg: &QuditRegister, comps: &[Component<T>]) -> CMat<T> {
    let n = reg.total_dim();
    let mut acc = CMat::<T>::zeros(n, n);
    for c in comps {
        acc += c.embed(reg);
    }
    acc
}

/// `max_s ‖Σ_{R ∋ s} X_R‖`, the maximum local strength over groups.
pub fn max_strength_norm<T: Real>(reg: &QuditRegister, comps: &[Component<T>]) -> T {
    let groups: BTreeSet<usize> = comps.iter().flat_map(|c| c.region.iter().copied()).collect();
    let mut best = T::zero();
    for g in groups {
        let touching: Vec<&Component<T>> = comps.iter().filter(|c| c.region.contains(&g)).collect();
        let mut qs: BTreeSet<usize> = BTreeSet::new();
        for c in &touching {
            qs.extend(c.qudits.iter().copied());
        }
        let big: Vec<usize> = qs.into_iter().collect();
        let d = reg.support_dim(&big);
        let mut acc = CMat::<T>::zeros(d, d);
        for c in touching {
            acc += widen(reg, &c.qudits, &big, &c.local);
        }
        best = best.max(spectral_norm(&acc));
    }
    best
}

/// Largest component Hilbert–Schmidt norm per region size (number of groups).
pub fn norm_by_size<T: Real>(reg: &QuditRegister, comps: &[Component<T>]) -> BTreeMap<usize, T> {
    let mut m: BTreeMap<usize, T> = BTreeMap::new();
    for c in comps {
        let e = m.entry(c.region.len()).or_insert_with(T::zero);
        *e = e.max(c.hs_norm(reg));
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;
    use num_complex::Complex;
    use rand::{Rng, SeedableRng};

    /// Clock/shift basis element X^a Z^b on one qudit of dimension d, HS-normalized.
    fn weyl(d: usize, a: usize, b: usize) -> CMat<f64> {
        let w = 2.0 * std::f64::consts::PI / d as f64;
        let mut m = CMat::<f64>::zeros(d, d);
        for k in 0..d {
            let ph = w * (b * k) as f64;
            m[((k + a) % d, k)] = Complex::new(ph.cos(), ph.sin()) / (d as f64).sqrt();
        }
        m
    }

    fn weyl_oracle(dims: &[usize], x: &CMat<f64>) -> BTreeMap<BTreeSet<usize>, CMat<f64>> {
        let mut out: BTreeMap<BTreeSet<usize>, CMat<f64>> = BTreeMap::new();
        let labels: Vec<Vec<(usize, usize)>> =
            dims.iter().map(|&d| (0..d).flat_map(|a| (0..d).map(move |b| (a, b))).collect()).collect();
        let mut idx = vec![0usize; dims.len()];
        loop {
            let mut p = CMat::<f64>::identity(1, 1);
            let mut sup = BTreeSet::new();
            for (q, &i) in idx.iter().enumerate() {
                let (a, b) = labels[q][i];
                if (a, b) != (0, 0) {
                    sup.insert(q);
                }
                p = p.kronecker(&weyl(dims[q], a, b));
            }
            let coef = (p.adjoint() * x).trace();
            let e = out.entry(sup).or_insert_with(|| CMat::zeros(x.nrows(), x.ncols()));
            *e += p * coef;
            let mut q = dims.len();
            loop {
                if q == 0 {
                    return out;
                }
                q -= 1;
                idx[q] += 1;
                if idx[q] < labels[q].len() {
                    break;
                }
                idx[q] = 0;
            }
        }
    }

    fn random_op(n: usize, seed: u64) -> CMat<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        CMat::from_fn(n, n, |_, _| Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
    }

    #[test]
    fn matches_weyl_basis_oracle() {
        let dims = vec![2, 3, 2];
        let reg = QuditRegister::new(dims.clone());
        let x = random_op(12, 1);
        let groups: Vec<Vec<usize>> = (0..3).map(|q| vec![q]).collect();
        let comps = local_decompose(&reg, &groups, &x, 0.0);
        let oracle = weyl_oracle(&dims, &x);
        for comp in &comps {
            let o = &oracle[&comp.region];
            assert!(fro(&(comp.embed(&reg) - o)) < 1e-12);
        }
        assert_eq!(comps.len(), oracle.len());
    }

    #[test]
    fn parseval_and_recombination() {
        let reg = QuditRegister::qubits(2);
        let a = random_op(4, 2);
        let h = (&a + a.adjoint()).scale(0.5);
        let groups = vec![vec![0], vec![1]];
        let comps = local_decompose(&reg, &groups, &h, 0.0);
        let total: f64 = comps.iter().map(|c| c.hs_norm(&reg).powi(2)).sum();
        assert!((total - fro(&h).powi(2)).abs() < 1e-12);
        assert!(fro(&(recombine(&reg, &comps) - &h)) < 1e-12);
        for i in 0..comps.len() {
            for j in 0..i {
                let ip = (comps[i].embed(&reg).adjoint() * comps[j].embed(&reg)).trace();
                assert!(ip.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn pauli_examples() {
        let reg = QuditRegister::qubits(2);
        let z = CMat::<f64>::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
        let x = CMat::<f64>::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let op = z.kronecker(&z) + x.kronecker(&CMat::identity(2, 2));
        let comps = local_decompose(&reg, &[vec![0], vec![1]], &op, 1e-12);
        let regions: Vec<BTreeSet<usize>> = comps.iter().map(|c| c.region.clone()).collect();
        assert_eq!(regions, vec![BTreeSet::from([0]), BTreeSet::from([0, 1])]);
        let one = QuditRegister::qubits(1);
        let comps = local_decompose(&one, &[vec![0]], &z, 1e-12);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].region.len(), 1);
    }

    #[test]
    fn strength_norm_cases() {
        let reg = QuditRegister::qubits(2);
        let z = CMat::<f64>::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
        let single = vec![Component { region: BTreeSet::from([0]), qudits: vec![0], local: z.scale(3.0) }];
        assert!((max_strength_norm(&reg, &single) - 3.0).abs() < 1e-12);
        let two = vec![
            Component { region: BTreeSet::from([0]), qudits: vec![0], local: z.scale(2.0) },
            Component { region: BTreeSet::from([1]), qudits: vec![1], local: z.scale(5.0) },
        ];
        assert!((max_strength_norm(&reg, &two) - 5.0).abs() < 1e-12);
        assert_eq!(max_strength_norm::<f64>(&reg, &[]), 0.0);
    }
}

use nalgebra::DMatrix;
use num_complex::Complex;
use pepsgad::double_semion::*;
use pepsgad::lattice::{HoneycombSpec, Pairing};
use pepsgad::linalg::hermitian_eig;
use pepsgad::scalar::{max_abs, CMat};
use pepsgad::Error;
use proptest::prelude::*;

type C = Complex<f64>;

fn torus() -> HoneycombSpec {
    HoneycombSpec::torus(1, 1)
}

fn model() -> DsModel<f64> {
    build_ds_model(&torus()).unwrap()
}

proptest! {
    #[test]
    fn tensor_follows_weight_rule(idx in 0u8..8) {
        let t = DsTensor::<f64>::standard();
        let (a, b, g) = (idx >> 2 & 1, idx >> 1 & 1, idx & 1);
        let expect = match a + b + g {
            1 => C::new(0.0, 1.0),
            2 => C::new(0.0, -1.0),
            _ => C::new(1.0, 0.0),
        };
        prop_assert_eq!(t.get(a, b, g), expect);
        let back = t.with_flipped(a, b, g).with_flipped(a, b, g);
        prop_assert_eq!(back.get(a, b, g), expect);
        prop_assert_eq!(t.with_flipped(a, b, g).get(a, b, g), -expect);
    }
}

#[test]
fn site_map_is_isometric_with_four_code_states() {
    for rot in 0..3 {
        let m = DsTensor::<f64>::standard().site_map(rot);
        assert!(max_abs(&(&m * m.adjoint() - CMat::<f64>::identity(4, 4))) < 1e-12);
        let nonzero_cols = (0..64).filter(|&c| m.column(c).norm() > 0.0).count();
        assert_eq!(nonzero_cols, 8);
        for r in 0..4 {
            assert_eq!(m.row(r).iter().filter(|z| z.norm() > 0.0).count(), 2);
        }
    }
}

#[test]
fn code_states_in_the_virtual_basis() {
    let pd = DsTensor::<f64>::standard().site_map(0).adjoint();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // Labels ordered 000, 110, 101, 011; virtual qubits α β | β γ | γ α.
    let col0: Vec<(usize, C)> = vec![(0b000000, C::new(h, 0.0)), (0b111111, C::new(h, 0.0))];
    let col1: Vec<(usize, C)> = vec![(0b100111, C::new(0.0, h)), (0b011000, C::new(0.0, -h))];
    for (label, entries) in [(0, col0), (1, col1)] {
        let mut expect = DMatrix::<C>::zeros(64, 1);
        for (i, v) in entries {
            expect[(i, 0)] = v;
        }
        assert!(max_abs(&(pd.columns(label, 1).into_owned() - expect)) < 1e-15, "label {label}");
    }
    // |10;00;00⟩ has no consistent (α, β, γ) and is annihilated.
    assert_eq!(pd.row(0b100000).norm(), 0.0);
}

#[test]
fn open_patches_are_rejected() {
    let mut spec = torus();
    spec.boundary = pepsgad::lattice::Boundary::OpenPatch;
    assert!(matches!(build_ds_model::<f64>(&spec), Err(Error::Unsupported(_))));
    assert!(matches!(ds_standard_hamiltonian::<f64>(&spec), Err(Error::Unsupported(_))));
}

fn pauli_kron(ops: &[DMatrix<C>]) -> DMatrix<C> {
    ops.iter().skip(1).fold(ops[0].clone(), |acc, o| acc.kronecker(o))
}

#[test]
fn standard_hamiltonian_matches_pauli_products() {
    let hc = model().honeycomb;
    let std = ds_standard_hamiltonian::<f64>(&torus()).unwrap();
    let id = DMatrix::<C>::identity(2, 2);
    let z = DMatrix::<C>::from_row_slice(2, 2, &[C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(-1.0, 0.0)]);
    let x = DMatrix::<C>::from_row_slice(2, 2, &[C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0)]);
    let nh = hc.honey_edges.len();
    let mut h = DMatrix::<C>::zeros(1 << nh, 1 << nh);
    for v in 0..hc.vertices.len() {
        let ops: Vec<_> = (0..nh).map(|e| if hc.honey_edges[e].u == v || hc.honey_edges[e].v == v { z.clone() } else { id.clone() }).collect();
        h -= pauli_kron(&ops);
    }
    for p in 0..hc.plaquettes.len() {
        // Each side appears twice on the 1×1 torus, so the σ^x string is the identity, and
        // every edge is a side, so there are no legs.
        let mut flips = vec![0usize; nh];
        for &e in &hc.plaquettes[p].honey_edges {
            flips[e] += 1;
        }
        assert!(plaquette_legs(&hc, p).is_empty());
        let ops: Vec<_> = flips.iter().map(|&k| if k % 2 == 1 { x.clone() } else { id.clone() }).collect();
        h += pauli_kron(&ops);
    }
    assert!(max_abs(&(std.hamiltonian.to_dense() - &h)) < 1e-15);
    // All-zeros state: every star has eigenvalue +1.
    for a in &std.vertex_terms {
        assert_eq!(a.get(0, 0), C::new(1.0, 0.0));
    }
    let vals = hermitian_eig(&h).0;
    assert!((vals[0] + 1.0).abs() < 1e-12);
    assert_eq!(vals.iter().filter(|v| (*v - vals[0]).abs() < 1e-9).count(), 4);
    assert_eq!(std.constrained_configs(), vec![0b000, 0b011, 0b101, 0b110]);
}

#[test]
fn second_order_ground_space_is_the_vertex_constrained_space() {
    let dsm = model();
    let std = ds_standard_hamiltonian::<f64>(&torus()).unwrap();
    let (configs, basis) = dsm.consistent_basis();
    assert_eq!(configs.len(), std.constrained_configs().len());
    assert!(max_abs(&(basis.adjoint() * &basis - CMat::<f64>::identity(basis.ncols(), basis.ncols()))) < 1e-12);
    for a in 0..dsm.n_honey_edges() {
        for b in 0..a {
            let (pa, pb) = (dsm.consistency_projector(a), dsm.consistency_projector(b));
            assert!(max_abs(&(&pa * &pb - &pb * &pa)) < 1e-14);
        }
    }
}

#[test]
fn effective_orders_zero_through_six() {
    let r = ds_effective_orders(&model(), 6).unwrap();
    assert!(r.order0_ok && r.order1_ok && r.order2_ok, "{r:?}");
    assert!(r.intermediate_ok, "{:?}", r.tree_residuals);
    assert!(r.plaquette_ok, "{:?}", r.plaquette_new_part);
    assert!(r.pass);
    // Two-edge loops wrap the 1×1 torus, so wrapping sets are nonzero from second order.
    assert!(r.wrapping_norms[1] > 1e-3);
    // Plaquette-interior sets vanish below sixth order.
    assert!(r.plaquette_norms[..5].iter().all(|&x| x < 1e-12));
}

#[test]
fn plaquette_retry_settles_on_straight_pairing() {
    let r = ds_plaquette_check(&torus(), 0.02).unwrap();
    assert!(r.pass, "{r:?}");
    let v = r.validated.unwrap();
    assert_eq!(v.pairing, Pairing::Straight);
    assert!(r.attempts[..r.attempts.len() - 1].iter().all(|a| !a.pass));
    let last = r.attempts.last().unwrap();
    assert!(last.scale > 0.0 && last.deviation < 1e-8);
    assert!(r.commutator_norm < 1e-10);
    assert!(r.plaquette_self_overlap);
    assert_eq!(r.effective_ground_dim, 1);
    assert_eq!(r.standard_ground_dim, 4);
}

#[test]
fn fidelity_approaches_one() {
    let r = ds_fidelity_sweep(&model(), &[0.0, 0.01, 0.02, 0.05]).unwrap();
    assert!((r.fidelities[0] - 1.0).abs() < 1e-12);
    assert!(r.fidelities[1] >= 0.999, "{r:?}");
    assert!(r.monotone && !r.level_crossing);
    assert_eq!(r.ground_dims[0], 16);
}

#[test]
fn edge_parity_is_exact_and_plaquette_flip_is_not() {
    let dsm = model();
    for s in ds_symmetry_suite(&dsm, 0.05) {
        if s.name.starts_with("edge-parity") {
            assert!(s.exact && s.effective_commutator < 1e-10, "{s:?}");
        } else if s.name.starts_with("plaquette-flip") {
            assert!(!s.exact && s.full_commutator > 1e-6 * s.hamiltonian_norm, "{s:?}");
        } else {
            // Site projectors commute with H0 but not with V.
            assert!(!s.exact && s.full_commutator > 1e-3, "{s:?}");
        }
    }
}

#[test]
fn quasi_injectivity_and_mutations() {
    let q = quasi_injectivity_suite(&model().gadget.model, 2, 2, 1e-9).unwrap();
    assert!(q.pass && q.n_specs > 0, "{} failures", q.failures);
    // A single phase flip keeps every map isometric; on the 1×1 torus each spec covers both
    // sites and the flipped state is still stabilized.
    let m = ds_mutation_fixture::<f64>(&torus()).unwrap();
    let q = quasi_injectivity_suite(&m.gadget.model, 1, 1, 1e-9).unwrap();
    assert!(q.pass);
    let null = corrupted_ds_model::<f64>(&torus(), 0, (0, 0, 0)).unwrap();
    assert!(matches!(null.encoded_peps(), Err(Error::NullState(_))));
}

#[test]
fn gap_on_the_smallest_torus_opens_at_second_order() {
    let h = ds_energy_hierarchy(&model(), 0.02, &[0.03, 0.02, 0.013]);
    let fit = h.gap_fit.unwrap();
    assert!((fit.slope - 2.0).abs() < 0.1, "{fit:?}");
    assert!(h.effective_levels.iter().all(|&l| l > 0.0));
}

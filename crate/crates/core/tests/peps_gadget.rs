use std::collections::BTreeSet;

use pepsgad::gadget::{default_delta_tilde, random_isometric_model, verify_resolvent_equivalence, GadgetHamiltonian};
use pepsgad::lattice::{chain, ring};
use pepsgad::linalg::random_block;
use pepsgad::operator::LinOp;
use pepsgad::peps::{apply_upsilon, build_upsilon, peps_vector, upsilon_family, verify_quasi_injectivity, PepsModel, UpsilonSpec};
use pepsgad::scalar::fro;
use pepsgad::Mat64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_ring(n: usize, seed: u64) -> GadgetHamiltonian<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GadgetHamiltonian::new(random_isometric_model(ring(n).unwrap(), 2, 2, &mut rng).unwrap())
}

#[test]
fn bell_product_is_exact_eigenstate_of_trivial_model() {
    let m = PepsModel::<f64>::identity_maps(chain(3).unwrap(), 2).unwrap();
    let psi = peps_vector(&m).unwrap();
    let x = Mat64::from_column_slice(psi.len(), 1, psi.as_slice());
    let vx = m.apply_v(&x);
    assert!(fro(&(vx + x.scale(2.0))) < 1e-12);
    let g = GadgetHamiltonian::new(m);
    assert!(fro(&g.apply_h0(&x)) < 1e-12);
}

#[test]
fn completed_unitary_is_unitary_and_extends_map() {
    let g = random_ring(4, 3);
    for m in &g.model.maps {
        let u = m.completed_unitary();
        let n = u.nrows();
        assert!(fro(&(&u * u.adjoint() - Mat64::identity(n, n))) < 1e-10);
        assert!(fro(&(u.rows(0, m.code_dim()) - &m.matrix)) < 1e-14);
    }
}

#[test]
fn block_operators_match_sparse_assembly() {
    let g = random_ring(4, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let x = random_block::<f64>(g.dim(), 3, &mut rng);
    let h0 = g.h0_sparse().unwrap();
    assert!(fro(&(g.apply_h0(&x) - h0.apply(&x))) < 1e-10);
    let v = g.v_sparse().unwrap();
    assert!(fro(&(g.apply_v(&x) - v.apply(&x))) < 1e-10);
    let p0 = g.ground_projector().unwrap();
    assert!(fro(&(g.apply_p0(&x) - p0.apply(&x))) < 1e-10);
    assert!(fro(&(g.model.apply_p0(&x) - g.apply_p0(&x))) < 1e-10);
}

#[test]
fn resolvent_inverts_h0_off_the_code_space() {
    let g = random_ring(4, 11);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = random_block::<f64>(g.dim(), 2, &mut rng);
    let y = g.apply_h0(&g.apply_resolvent(1, &x));
    assert!(fro(&(y - g.apply_q0(&x))) < 1e-10);
    let r2 = g.apply_resolvent(2, &x);
    let rr = g.apply_resolvent(1, &g.apply_resolvent(1, &x));
    assert!(fro(&(r2 - rr)) < 1e-10);
}

#[test]
fn closed_form_resolvent_matches_spectral_route() {
    let g = random_ring(5, 17);
    let dt = default_delta_tilde(6);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for r in 1..=4 {
        let region: BTreeSet<usize> = (0..r).collect();
        let rep = verify_resolvent_equivalence(&g, &region, dt, 10, &mut rng);
        assert!(rep.pass, "|R|={r}: {}", rep.max_residual);
    }
    let region = BTreeSet::from([0, 2]);
    let op = g.tilde_g_closed_form(&region, dt).unwrap();
    let x = g.model.apply_sites_projector(&BTreeSet::from([1, 3, 4]), &random_block::<f64>(g.dim(), 2, &mut rng));
    assert!(fro(&(op.apply(&x) - g.apply_tilde_g(dt, &x))) < 1e-10);
}

#[test]
fn upsilon_is_hermitian_and_fixes_the_peps() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let m = random_isometric_model::<f64>(chain(3).unwrap(), 2, 3, &mut rng).unwrap();
    let spec = UpsilonSpec { site_regions: vec![BTreeSet::from([1]), BTreeSet::new()], edge_regions: vec![BTreeSet::from([0]), BTreeSet::from([1])] };
    let u = build_upsilon(&m, &spec);
    assert!(u.hermitian_residual() < 1e-12);
    let n = m.reg.total_dim();
    let x = random_block::<f64>(n, 2, &mut rng);
    assert!(fro(&(apply_upsilon(&m, &spec, &x) - u.apply(&x))) < 1e-12);
    let fam = upsilon_family(&m, 2, 2);
    assert!(!fam.is_empty());
    for e in verify_quasi_injectivity(&m, &fam[..4], 1e-8).unwrap() {
        assert!(e.eta >= 0.0);
    }
}

#[test]
fn maps_roundtrip_through_json() {
    let g = random_ring(3, 8);
    let v = g.model.to_maps_json();
    let back = PepsModel::<f64>::from_maps_json(g.model.graph.clone(), &v).unwrap();
    for (a, b) in g.model.maps.iter().zip(&back.maps) {
        assert!(fro(&(&a.matrix - &b.matrix)) < 1e-15);
    }
}

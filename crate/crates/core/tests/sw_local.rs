use pepsgad::gadget::{random_isometric_model_dims, GadgetHamiltonian};
use pepsgad::lattice::chain;
use pepsgad::linalg::fit_loglog;
use pepsgad::scalar::{fro, max_abs};
use pepsgad::sw_global::{compute_generators, CoefficientTable};
use pepsgad::sw_local::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EPS: [f64; 3] = [0.04, 0.02, 0.01];

fn open_chain(seed: u64) -> GadgetHamiltonian<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GadgetHamiltonian::new(random_isometric_model_dims(chain(5).unwrap(), 2, &[1, 2, 2, 2, 1], &mut rng).unwrap())
}

#[test]
fn generators_and_blocks_have_the_right_symmetry() {
    let g = open_chain(1);
    let s = compute_local_series(&g, 3, 3).unwrap();
    for t in &s.generators {
        assert!(fro(&(t + t.adjoint())) < 1e-12);
    }
    for b in &s.block_terms {
        assert!(fro(&(b - b.adjoint())) < 1e-12);
    }
    assert!(offdiag_norm(&g, &s.h_loc(0.3)) < 1e-12);
}

#[test]
fn first_order_effective_is_projected_perturbation() {
    let g = open_chain(2);
    let s = compute_local_series(&g, 1, 1).unwrap();
    let u = g.code_basis();
    let expect = u.adjoint() * g.v_sparse().unwrap().to_dense() * u;
    assert!(max_abs(&(s.effective(&g, 0.1, false) - expect.scale(0.1))) < 1e-12);
    assert!(max_abs(&s.effective(&g, 0.0, false)) < 1e-14);
}

#[test]
fn locality_of_generators_and_couplings() {
    let g = open_chain(3);
    let s = compute_local_series(&g, 4, 4).unwrap();
    let rep = verify_locality(&s, &g, 1e-11);
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn residual_and_garbage_scale_with_order() {
    let g = open_chain(4);
    for n in 1..=3 {
        let s = compute_local_series(&g, n, n + 2).unwrap();
        let rep = garbage_norm(&s, &g, &EPS);
        assert!(rep.offdiag_slope >= n as f64 + 0.8, "n={n} {rep:?}");
        assert!(rep.slope >= n as f64 + 0.8, "n={n} {rep:?}");
        assert!(rep.norms.iter().all(|&x| x >= 0.0));
    }
    assert!(offdiag_residual(&compute_local_series(&g, 1, 1).unwrap(), &g, 0.0) < 1e-14);
}

#[test]
fn truncation_tail_shrinks_with_j_max() {
    let g = open_chain(5);
    let a = garbage_norm(&compute_local_series(&g, 1, 2).unwrap(), &g, &[0.05]);
    let b = garbage_norm(&compute_local_series(&g, 1, 4).unwrap(), &g, &[0.05]);
    assert!(b.identity_residuals[0] < a.identity_residuals[0]);
}

#[test]
fn global_and_local_spectra_agree_to_order() {
    let g = open_chain(6);
    let t = CoefficientTable::new(5);
    for n in 1..=4 {
        let gs = compute_generators(&g, n, &t).unwrap();
        let ls = compute_local_series(&g, n, n).unwrap();
        let rep = compare_global_local(&gs, &ls, &g, &EPS);
        assert!(rep.pass, "n={n} {rep:?}");
        // The two expansions coincide term by term through third order.
        assert_eq!(rep.exact, n <= 3, "n={n} {rep:?}");
        if n == 4 {
            assert!(fit_loglog(&rep.epsilons, &rep.deviations).slope >= 4.8, "{rep:?}");
        }
    }
}

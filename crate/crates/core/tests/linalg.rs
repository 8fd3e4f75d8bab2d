use pepsgad::linalg::{eigvalsh, hermitian_eig, random_block};
use pepsgad::scalar::max_abs;
use pepsgad::Mat64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_hermitian(n: usize, seed: u64) -> Mat64 {
    let a = random_block::<f64>(n, n, &mut ChaCha8Rng::seed_from_u64(seed));
    &a + a.adjoint()
}

proptest! {
    #[test]
    fn spectrum_scales_with_the_matrix(n in 1usize..12, seed in 0u64..1000, exp in -40i32..3) {
        let h = random_hermitian(n, seed);
        let c = 10f64.powi(exp);
        let a = eigvalsh(&h);
        let b = eigvalsh(&h.scale(c));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x * c - y).abs() <= 1e-12 * c * a.iter().fold(1.0f64, |m, v| m.max(v.abs())));
        }
    }

    #[test]
    fn eigenpairs_reconstruct(n in 1usize..10, seed in 0u64..1000) {
        let h = random_hermitian(n, seed);
        let (vals, vecs) = hermitian_eig(&h);
        prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let d = Mat64::from_diagonal(&nalgebra::DVector::from_iterator(n, vals.iter().map(|v| num_complex::Complex::new(*v, 0.0))));
        prop_assert!(max_abs(&(&vecs * d * vecs.adjoint() - &h)) < 1e-10);
    }
}

#[test]
fn toric_garbage_spectrum_is_finite() {
    // Order-4 residual matrices on the ring of four send unshifted QR sweeps to NaN.
    let tm = pepsgad::toric::build_toric_model::<f64>(2, 2).unwrap();
    let ls = pepsgad::sw_local::compute_local_series(&tm.gadget, 4, 6).unwrap();
    let r = pepsgad::sw_local::garbage_norm(&ls, &tm.gadget, &[0.03, 0.02, 0.013]);
    assert!(r.norms.iter().chain(&r.identity_residuals).all(|v| v.is_finite()));
    assert!(r.slope > 4.8, "{r:?}");
}

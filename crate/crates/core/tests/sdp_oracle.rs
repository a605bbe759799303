use hyperschur::kernel::KernelMatrix;
use hyperschur::normlab::{cb_norm_sdp, lower_bound, SdpOptions, Strategy};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

/// Optimal values of the block semidefinite program for the kernels below,
/// from an interior-point solver.
const FROZEN: [f64; 20] = [
    1.9598850710655698,
    2.0810430418690733,
    1.9736341689515182,
    2.178998946236403,
    1.9521732054035965,
    2.192245737630338,
    1.9416607481748789,
    2.2198621143162365,
    2.059700966045757,
    1.9967290864224783,
    2.044855354282103,
    2.0266222453138454,
    2.141016300987684,
    1.9025106229474207,
    1.9832224195302042,
    1.9925235322406247,
    2.0414753254420486,
    2.107773818791772,
    1.9392978352023267,
    2.0528440131343864,
];

/// Twenty 8×8 kernels, entries with real and imaginary parts uniform in
/// [-1, 1), row-major, from a ChaCha8 stream seeded with 0.
fn random_kernels() -> Vec<KernelMatrix> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    (0..20)
        .map(|i| {
            let entries: Vec<Complex64> = (0..64)
                .map(|_| {
                    let re: f64 = rng.random_range(-1.0..1.0);
                    let im: f64 = rng.random_range(-1.0..1.0);
                    Complex64::new(re, im)
                })
                .collect();
            KernelMatrix::custom(&format!("random {i}"), DMatrix::from_row_slice(8, 8, &entries)).unwrap()
        })
        .collect()
}

#[test]
fn random_kernels_match_interior_point_values() {
    let opts = SdpOptions::default();
    for (k, want) in random_kernels().iter().zip(FROZEN) {
        let got = cb_norm_sdp(k, &opts).unwrap();
        assert!((got.value - want).abs() < 1e-6, "{} vs {want}", got.value);
        let lower = lower_bound(k, &Strategy::ALL, 0).unwrap();
        assert!(lower.value <= want + 1e-6);
        assert!(!got.inconclusive);
    }
}

//! Independent oracles: Monte-Carlo photon counting and number-basis
//! constructions checked against the closed forms.

use psp_core::algebra::{to_fock, Cutoff};
use psp_core::metrics::{g2_zero_closed, g2_zero_oracle};
use psp_core::psp::{fidelity_to_number_state, generation_probability, loss_channel, pseudo_number_state, PspParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Poisson draw by sequential inversion; fine for small means.
fn poisson(rng: &mut impl Rng, mean: f64) -> u64 {
    let u: f64 = rng.gen();
    let mut n = 0u64;
    let mut p = (-mean).exp();
    let mut cdf = p;
    while u > cdf {
        n += 1;
        p *= mean / n as f64;
        cdf += p;
        if p == 0.0 {
            break;
        }
    }
    n
}

#[test]
fn photon_counting_reproduces_class_statistics() {
    let (mu, d, j) = (0.5, 4u32, 1u32);
    let draws = 1_000_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    let (mut in_class, mut exactly_j) = (0usize, 0usize);
    for _ in 0..draws {
        let n = poisson(&mut rng, mu);
        if n % d as u64 == j as u64 {
            in_class += 1;
            if n == j as u64 {
                exactly_j += 1;
            }
        }
    }

    // heralding probability of |1_4>
    let p = generation_probability(mu, d, j).unwrap();
    let freq = in_class as f64 / draws as f64;
    let sigma = (p * (1.0 - p) / draws as f64).sqrt();
    assert!((freq - p).abs() < 3.0 * sigma, "{freq} vs {p} (sigma {sigma})");

    // |<1|1_4>|^2 is the conditional weight of n = 1 inside the class
    let f = fidelity_to_number_state(&PspParams::new(mu, d, j).unwrap()).unwrap();
    let cond = exactly_j as f64 / in_class as f64;
    let sigma = (f * (1.0 - f) / in_class as f64).sqrt();
    assert!((cond - f).abs() < 3.0 * sigma, "{cond} vs {f} (sigma {sigma})");
}

#[test]
fn number_basis_support_is_one_residue_class() {
    for &(mu, d, j) in &[(0.7, 3u32, 2u32), (1.5, 4, 1), (0.2, 8, 0)] {
        let v = to_fock(&pseudo_number_state(&PspParams::new(mu, d, j).unwrap()).unwrap(), Cutoff::Auto).unwrap();
        for n in 0..=v.cutoff() {
            let a = v.amplitude(&[n]).norm();
            if n % d as usize != j as usize {
                assert!(a < 1e-12, "mu={mu} d={d} j={j} n={n}: {a}");
            }
        }
        let f = fidelity_to_number_state(&PspParams::new(mu, d, j).unwrap()).unwrap();
        assert!((v.amplitude(&[j as usize]).norm_sqr() - f).abs() < 1e-12);
    }
}

#[test]
fn g2_from_number_basis_across_regimes() {
    for &d in &[2u32, 4, 8, 12] {
        for &mu in &[0.05, 0.8, 3.0, 9.0] {
            let state = pseudo_number_state(&PspParams::single_photon(mu, d).unwrap()).unwrap();
            let oracle = g2_zero_oracle(&to_fock(&state, Cutoff::Auto).unwrap()).unwrap();
            let closed = g2_zero_closed(mu, d).unwrap().value;
            assert!((closed - oracle).abs() < 1e-8 * closed.max(1.0), "mu={mu} d={d}: {closed} vs {oracle}");
        }
    }
}

#[test]
fn loss_matches_number_basis_attenuation() {
    for &(mu, d, eta) in &[(0.3, 4u32, 0.6), (1.0, 8, 0.9), (0.1, 2, 0.5)] {
        let p = PspParams::single_photon(mu, d).unwrap();
        let loss = loss_channel(&p, eta).unwrap();
        let exact = loss.exact.to_fock(Cutoff::Auto).unwrap();
        let pure = to_fock(&pseudo_number_state(&p).unwrap(), Cutoff::Fixed(exact.cutoff())).unwrap();
        let rho = psp_core::algebra::FockOperator::mixture(&[(1.0, &pure)]).unwrap();
        let attenuated = rho.attenuate(eta).unwrap();
        let diff = (exact.matrix() - attenuated.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-10, "mu={mu} d={d} eta={eta}: {diff}");
    }
}

//! Seeded sampling of algebra elements.
//!
//! Every randomized check in the crate draws from a `ChaCha8Rng` built by
//! [`stream_rng`], so sample `i` of a run depends only on `(seed, i)`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{AlgebraDescriptor, AlgebraElement, C64};

pub type SampleRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for sample `stream` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Complex Gaussian with `E|z|² = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Element with i.i.d. complex Gaussian entries.
pub fn gaussian_element<R: Rng + ?Sized>(rng: &mut R, algebra: &AlgebraDescriptor) -> AlgebraElement {
    let blocks = algebra
        .block_sizes()
        .iter()
        .map(|&n| DMatrix::from_fn(n, n, |_, _| complex_gaussian(rng)))
        .collect();
    AlgebraElement::new(algebra, blocks).expect("shapes follow the descriptor")
}

/// Gaussian direction rescaled to a norm drawn uniformly from `[lo, hi]`.
pub fn element_with_norm_in<R: Rng + ?Sized>(
    rng: &mut R,
    algebra: &AlgebraDescriptor,
    lo: f64,
    hi: f64,
) -> AlgebraElement {
    let g = gaussian_element(rng, algebra);
    let n = g.cstar_norm();
    let target = lo + (hi - lo) * rng.random::<f64>();
    if n == 0.0 {
        AlgebraElement::zero(algebra)
    } else {
        g.scale_real(target / n)
    }
}

/// Element of norm at most one.
pub fn ball_element<R: Rng + ?Sized>(rng: &mut R, algebra: &AlgebraDescriptor) -> AlgebraElement {
    element_with_norm_in(rng, algebra, 0.0, 1.0)
}

/// Positive element `g g*` scaled to norm at most one.
pub fn positive_element<R: Rng + ?Sized>(rng: &mut R, algebra: &AlgebraDescriptor) -> AlgebraElement {
    let g = gaussian_element(rng, algebra);
    let p = &g * &g.adjoint();
    let n = p.cstar_norm();
    if n == 0.0 {
        p
    } else {
        p.scale_real(rng.random::<f64>() / n)
    }
}

/// Self-adjoint element of norm at most one.
pub fn hermitian_element<R: Rng + ?Sized>(rng: &mut R, algebra: &AlgebraDescriptor) -> AlgebraElement {
    let g = gaussian_element(rng, algebra);
    let h = (&g + &g.adjoint()).scale_real(0.5);
    let n = h.cstar_norm();
    if n == 0.0 {
        h
    } else {
        h.scale_real(rng.random::<f64>() / n)
    }
}

/// Skew-Hermitian element of norm at most one.
pub fn skew_hermitian_element<R: Rng + ?Sized>(
    rng: &mut R,
    algebra: &AlgebraDescriptor,
) -> AlgebraElement {
    hermitian_element(rng, algebra).scale(C64::new(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let alg = AlgebraDescriptor::matrix(2);
        let a = gaussian_element(&mut stream_rng(7, 3), &alg);
        let b = gaussian_element(&mut stream_rng(7, 3), &alg);
        let c = gaussian_element(&mut stream_rng(7, 4), &alg);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn shaped_samples() {
        let alg = AlgebraDescriptor::new(vec![2, 1]).unwrap();
        let mut rng = seeded_rng(11);
        for _ in 0..20 {
            let p = positive_element(&mut rng, &alg);
            assert!(p.is_positive(1e-12));
            assert!(p.cstar_norm() <= 1.0 + 1e-12);
            let h = hermitian_element(&mut rng, &alg);
            assert!(h.is_self_adjoint(1e-14));
            let s = skew_hermitian_element(&mut rng, &alg);
            assert!((&s + &s.adjoint()).cstar_norm() < 1e-14);
            assert!(ball_element(&mut rng, &alg).cstar_norm() <= 1.0 + 1e-12);
        }
    }
}

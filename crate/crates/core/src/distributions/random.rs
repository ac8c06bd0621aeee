//! Random-variate primitives and the seeded generator used by every chain.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};

/// Generator used throughout. Seedable, and splittable through ChaCha streams.
pub type ChainRng = ChaCha8Rng;

/// Generator for `(seed, stream)`. Distinct streams of one seed are independent.
pub fn chain_rng(seed: u64, stream: u64) -> ChainRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derive a child seed from a master seed (SplitMix64 finaliser).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform on the open interval (0, 1).
#[inline]
pub fn sample_open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(Open01)
}

#[inline]
pub fn sample_std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn sample_normal<R: Rng + ?Sized>(rng: &mut R, mean: f64, var: f64) -> Result<f64> {
    if !(var > 0.0) || !mean.is_finite() {
        return Err(Error::domain(format!("normal needs finite mean and var > 0, got ({mean}, {var})")));
    }
    Ok(mean + var.sqrt() * sample_std_normal(rng))
}

/// Gamma with shape–rate parameterisation (mean `shape / rate`).
pub fn sample_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64, rate: f64) -> Result<f64> {
    if !(shape > 0.0 && rate > 0.0) || !shape.is_finite() || !rate.is_finite() {
        return Err(Error::domain(format!("gamma needs shape, rate > 0, got ({shape}, {rate})")));
    }
    let dist = Gamma::new(shape, 1.0 / rate).map_err(|e| Error::domain(e.to_string()))?;
    // Tiny shapes can underflow to zero; the caller always needs a positive draw.
    Ok(dist.sample(rng).max(f64::MIN_POSITIVE))
}

pub fn sample_beta<R: Rng + ?Sized>(rng: &mut R, p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0 && q > 0.0) {
        return Err(Error::domain(format!("beta needs p, q > 0, got ({p}, {q})")));
    }
    let dist = Beta::new(p, q).map_err(|e| Error::domain(e.to_string()))?;
    let draw = dist.sample(rng);
    Ok(draw.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
}

/// Dirichlet draw via normalised gammas.
pub fn sample_dirichlet<R: Rng + ?Sized>(rng: &mut R, concentrations: &[f64]) -> Result<Vec<f64>> {
    if concentrations.is_empty() {
        return Err(Error::domain("dirichlet needs at least one concentration"));
    }
    let mut draws = concentrations
        .iter()
        .map(|&a| sample_gamma(rng, a, 1.0))
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = draws.iter().sum();
    draws.iter_mut().for_each(|d| *d /= total);
    Ok(draws)
}

/// Index drawn with probability proportional to `exp(log_weights[i])`.
///
/// Falls back to the arg-max when every weight underflows.
pub fn sample_log_categorical<R: Rng + ?Sized>(rng: &mut R, log_weights: &[f64]) -> usize {
    let (argmax, max) = log_weights
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, w)| if w > best.1 { (i, w) } else { best });
    if !max.is_finite() {
        return argmax;
    }
    let total: f64 = log_weights.iter().map(|&w| (w - max).exp()).sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in log_weights.iter().enumerate() {
        u -= (w - max).exp();
        if u < 0.0 {
            return i;
        }
    }
    argmax
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        let mut rng = chain_rng(1, 0);
        assert!(sample_gamma(&mut rng, 0.0, 1.0).is_err());
        assert!(sample_gamma(&mut rng, 1.0, -1.0).is_err());
        assert!(sample_beta(&mut rng, 1.0, 0.0).is_err());
        assert!(sample_normal(&mut rng, 0.0, 0.0).is_err());
        assert!(sample_dirichlet(&mut rng, &[1.0, 0.0]).is_err());
        assert!(sample_dirichlet(&mut rng, &[]).is_err());
    }

    #[test]
    fn gamma_mean_matches_shape() {
        let mut rng = chain_rng(2, 0);
        for &k in &[0.5, 2.0, 7.5] {
            let n = 1_000_000;
            let mean = (0..n).map(|_| sample_gamma(&mut rng, k, 1.0).unwrap()).sum::<f64>() / n as f64;
            let se = (k / n as f64).sqrt();
            assert!((mean - k).abs() < 3.0 * se, "k={k}: mean {mean}");
        }
    }

    #[test]
    fn dirichlet_is_exchangeable_and_normalised() {
        let mut rng = chain_rng(3, 0);
        let n = 100_000;
        let mut sums = [0.0; 4];
        for _ in 0..n {
            let d = sample_dirichlet(&mut rng, &[2.0; 4]).unwrap();
            assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for (s, v) in sums.iter_mut().zip(&d) {
                *s += v;
            }
        }
        // Var of each coordinate is (1/4)(3/4)/(8+1).
        let se = (0.25 * 0.75 / 9.0 / n as f64).sqrt();
        for s in sums {
            assert!((s / n as f64 - 0.25).abs() < 4.0 * se);
        }
    }

    #[test]
    fn beta_one_one_is_uniform_by_ks() {
        let mut rng = chain_rng(4, 0);
        let n = 100_000;
        let mut draws: Vec<f64> = (0..n).map(|_| sample_beta(&mut rng, 1.0, 1.0).unwrap()).collect();
        draws.sort_by(f64::total_cmp);
        let d = draws
            .iter()
            .enumerate()
            .map(|(i, &u)| {
                let lo = i as f64 / n as f64;
                let hi = (i + 1) as f64 / n as f64;
                (u - lo).abs().max((hi - u).abs())
            })
            .fold(0.0, f64::max);
        // 1% critical value of the one-sample KS statistic.
        let critical = 1.628 / (n as f64).sqrt();
        assert!(d < critical, "KS statistic {d} >= {critical}");
    }

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let a: Vec<u64> = (0..4).map(|_| chain_rng(7, 0).random()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let mut s0 = chain_rng(7, 0);
        let mut s1 = chain_rng(7, 1);
        assert_ne!(s0.random::<u64>(), s1.random::<u64>());
        assert_ne!(derive_seed(7, 0), derive_seed(7, 1));
    }

    #[test]
    fn log_categorical_underflow_falls_back_to_argmax() {
        let mut rng = chain_rng(5, 0);
        assert_eq!(sample_log_categorical(&mut rng, &[f64::NEG_INFINITY, f64::NEG_INFINITY]), 0);
        assert_eq!(sample_log_categorical(&mut rng, &[-1e308, 0.0]), 1);
    }
}

//! Inverse-CDF sampling of truncated normals and lognormals.
//!
//! When the truncation window lies in the upper tail the draw is made through
//! the survival function, so windows far from the centre keep their relative
//! precision until the mass itself underflows.

use rand::Rng;

use super::lognormal::LognormalParams;
use super::normal::{std_normal_cdf, std_normal_isf, std_normal_quantile, std_normal_sf};
use super::random::sample_open01;
use crate::error::{Error, Interval, Result};

/// Windows whose probability falls below this are reported as degenerate.
pub const MIN_INTERVAL_MASS: f64 = 1e-300;

/// Precomputed inverse-CDF sampler for `Z ~ N(0,1)` restricted to `[a, b]`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StdTruncation {
    a: f64,
    b: f64,
    base: f64,
    mass: f64,
    upper_tail: bool,
}

impl StdTruncation {
    /// `a < b`; either end may be infinite.
    pub(crate) fn new(a: f64, b: f64) -> std::result::Result<Self, f64> {
        let upper_tail = a >= 0.0;
        let (base, mass) = if upper_tail {
            let qb = std_normal_sf(b);
            (qb, std_normal_sf(a) - qb)
        } else if b <= 0.0 {
            // lower tail: Φ keeps relative precision here
            let pa = std_normal_cdf(a);
            (pa, std_normal_cdf(b) - pa)
        } else {
            let pa = std_normal_cdf(a);
            (pa, std_normal_cdf(b) - pa)
        };
        if !(mass >= MIN_INTERVAL_MASS) {
            return Err(mass.max(0.0));
        }
        Ok(Self {
            a,
            b,
            base,
            mass,
            upper_tail,
        })
    }

    /// Map `u ∈ (0,1)` to a draw in `[a, b]`.
    #[inline]
    pub(crate) fn draw(&self, u: f64) -> f64 {
        let z = if self.upper_tail {
            std_normal_isf(self.base + u * self.mass)
        } else {
            std_normal_quantile(self.base + u * self.mass)
        };
        z.clamp(self.a, self.b)
    }
}

/// Draw from `N(mean, sd²)` restricted to `(lo, hi)`; infinite ends allowed.
pub fn sample_truncated_normal<R: Rng + ?Sized>(
    rng: &mut R,
    mean: f64,
    sd: f64,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    if !(lo < hi) {
        return Err(Error::domain(format!("truncation needs lo < hi, got ({lo}, {hi})")));
    }
    if !(sd > 0.0) || !mean.is_finite() {
        return Err(Error::domain(format!("normal needs finite mean and sd > 0, got ({mean}, {sd})")));
    }
    let (a, b) = ((lo - mean) / sd, (hi - mean) / sd);
    let z = match StdTruncation::new(a, b) {
        Ok(trunc) => trunc.draw(sample_open01(rng)),
        // Window beyond the reach of Φ: exact rejection sampling in the tail.
        Err(_) if a > 0.0 => std_normal_tail(rng, a, b),
        Err(_) if b < 0.0 => -std_normal_tail(rng, -b, -a),
        Err(mass) => {
            return Err(Error::Degenerate {
                interval: Interval { lo, hi },
                mass,
            })
        }
    };
    Ok((mean + sd * z).clamp(lo, hi))
}

/// `N(0,1)` restricted to `[a, b]` with `0 < a < b`, by rejection: uniform
/// proposals for narrow windows, translated exponentials otherwise.
fn std_normal_tail<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64) -> f64 {
    if (b - a) * a < 1.0 {
        loop {
            let z = a + (b - a) * sample_open01(rng);
            if sample_open01(rng).ln() < 0.5 * (a - z) * (a + z) {
                return z;
            }
        }
    }
    let lambda = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let z = a - sample_open01(rng).ln() / lambda;
        if z > b {
            continue;
        }
        let d = z - lambda;
        if sample_open01(rng).ln() < -0.5 * d * d {
            return z;
        }
    }
}

/// Draw from the lognormal restricted to `(lo, hi]`, `0 ≤ lo < hi ≤ ∞`.
pub fn sample_truncated_lognormal<R: Rng + ?Sized>(
    rng: &mut R,
    params: &LognormalParams,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    if !(lo >= 0.0 && lo < hi) {
        return Err(Error::domain(format!("lognormal truncation needs 0 <= lo < hi, got ({lo}, {hi})")));
    }
    let trunc = lognormal_window(params, lo, hi)?;
    Ok(draw_income(params.mu(), params.sigma(), &trunc, lo, hi, sample_open01(rng)))
}

pub(crate) fn lognormal_window(params: &LognormalParams, lo: f64, hi: f64) -> Result<StdTruncation> {
    let sigma = params.sigma();
    let a = (lo.ln() - params.mu()) / sigma;
    let b = (hi.ln() - params.mu()) / sigma;
    StdTruncation::new(a, b).map_err(|mass| Error::Degenerate {
        interval: Interval { lo, hi },
        mass,
    })
}

/// Income in `(lo, hi]` from a precomputed standardised window.
#[inline]
pub(crate) fn draw_income(mu: f64, sigma: f64, trunc: &StdTruncation, lo: f64, hi: f64, u: f64) -> f64 {
    let x = (mu + sigma * trunc.draw(u)).exp();
    if x > hi {
        hi
    } else if x <= lo {
        lo.next_up()
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::random::chain_rng;
    use crate::distributions::IncomeDistribution;
    use crate::quadrature::integrate;

    #[test]
    fn draws_stay_inside_interval() {
        let mut rng = chain_rng(11, 0);
        let p = LognormalParams::new(0.0, 1.0).unwrap();
        let windows = [(0.0, 1.0), (1.0, 2.0), (2.0, f64::INFINITY), (1e-8, 1e-7), (1e8, 1e9), (3.0, 3.0000001)];
        for (lo, hi) in windows {
            for _ in 0..2000 {
                let x = sample_truncated_lognormal(&mut rng, &p, lo, hi).unwrap();
                assert!(x > lo && x <= hi, "{x} not in ({lo}, {hi}]");
            }
        }
    }

    #[test]
    fn far_tail_windows() {
        let mut rng = chain_rng(12, 0);
        // z in [20, 21]: Φ-based inversion would collapse to a point.
        let x = sample_truncated_normal(&mut rng, 0.0, 1.0, 20.0, 21.0).unwrap();
        assert!((20.0..=21.0).contains(&x));
        let xs: Vec<f64> = (0..5000).map(|_| sample_truncated_normal(&mut rng, 0.0, 1.0, 20.0, 21.0).unwrap()).collect();
        // Mean of the tail ≈ 20 + 1/20.
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 20.0498).abs() < 0.005, "{mean}");
        let x = sample_truncated_normal(&mut rng, 0.0, 1.0, -21.0, -20.0).unwrap();
        assert!((-21.0..=-20.0).contains(&x));
    }

    #[test]
    fn degenerate_and_invalid_windows() {
        let mut rng = chain_rng(13, 0);
        let p = LognormalParams::new(0.0, 1.0).unwrap();
        assert!(matches!(
            sample_truncated_lognormal(&mut rng, &p, 2.0, 1.0),
            Err(Error::Domain(_))
        ));
        let (lo, hi) = (40f64.exp(), 41f64.exp());
        let err = sample_truncated_lognormal(&mut rng, &p, lo, hi).unwrap_err();
        match err {
            Error::Degenerate { interval, mass } => {
                assert_eq!(interval, Interval { lo, hi });
                assert!(mass < MIN_INTERVAL_MASS);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn untruncated_matches_lognormal_moments() {
        let mut rng = chain_rng(14, 0);
        let p = LognormalParams::new(0.5, 0.25).unwrap();
        let n = 200_000;
        let logs: Vec<f64> = (0..n)
            .map(|_| sample_truncated_lognormal(&mut rng, &p, 0.0, f64::INFINITY).unwrap().ln())
            .collect();
        let mean = logs.iter().sum::<f64>() / n as f64;
        let var = logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt());
        assert!((var - 0.25).abs() < 0.005);
    }

    #[test]
    fn truncated_mean_matches_quadrature() {
        let mut rng = chain_rng(15, 0);
        let p = LognormalParams::new(0.0, 1.0).unwrap();
        let mass = p.cdf(2.0) - p.cdf(1.0);
        let m1 = integrate(|x| x * p.pdf(x), 1.0, 2.0, 1e-14, 1e-14).unwrap().value / mass;
        let m2 = integrate(|x| x * x * p.pdf(x), 1.0, 2.0, 1e-14, 1e-14).unwrap().value / mass;
        let sd = (m2 - m1 * m1).sqrt();
        let n = 1_000_000;
        let mean = (0..n)
            .map(|_| sample_truncated_lognormal(&mut rng, &p, 1.0, 2.0).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((mean - m1).abs() < 3.0 * sd / (n as f64).sqrt(), "{mean} vs {m1}");
    }

    #[test]
    fn empirical_cdf_matches_truncated_cdf() {
        let mut rng = chain_rng(16, 0);
        let p = LognormalParams::new(1.0, 0.5).unwrap();
        let (lo, hi) = (2.0, 6.0);
        let (flo, fhi) = (p.cdf(lo), p.cdf(hi));
        let n = 100_000;
        let mut xs: Vec<f64> = (0..n).map(|_| sample_truncated_lognormal(&mut rng, &p, lo, hi).unwrap()).collect();
        xs.sort_by(f64::total_cmp);
        let sup = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = (p.cdf(x) - flo) / (fhi - flo);
                (f - i as f64 / n as f64).abs().max((f - (i + 1) as f64 / n as f64).abs())
            })
            .fold(0.0, f64::max);
        assert!(sup < 0.01, "sup distance {sup}");
    }

    #[test]
    fn normal_far_tail_window_uses_rejection() {
        let mut rng = chain_rng(5, 0);
        let n = 20_000;
        let (lo, hi) = (40.0, 40.5);
        let mut sum = 0.0;
        for _ in 0..n {
            let v = sample_truncated_normal(&mut rng, 0.0, 1.0, lo, hi).unwrap();
            assert!(v >= lo && v <= hi);
            sum += v;
        }
        // density ∝ e^{-40 (z-40)} on the window: mean ≈ 40 + 1/40
        assert!((sum / n as f64 - 40.025).abs() < 2e-3);
        let v = sample_truncated_normal(&mut rng, 0.0, 1.0, -1e9, -45.0).unwrap();
        assert!(v <= -45.0 && v > -46.0);
    }
}

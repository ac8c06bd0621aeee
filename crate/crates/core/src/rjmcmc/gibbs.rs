//! Full-conditional updates for fixed `R`.

use rand::Rng;

use super::prior::PriorConfig;
use super::state::ChainState;
use crate::distributions::random::sample_open01;
use crate::distributions::truncated::{draw_income, lognormal_window, StdTruncation};
use crate::distributions::{sample_dirichlet, sample_gamma, sample_normal, sample_truncated_normal, LognormalParams};
use crate::error::Result;
use crate::model::GroupedData;

/// `π ~ Dirichlet(n_1 + α0, …, n_R + α0)`.
pub fn update_weights<R: Rng + ?Sized>(state: &mut ChainState, prior: &PriorConfig, rng: &mut R) -> Result<()> {
    if state.r() == 1 {
        state.params.parts_mut().0[0] = 1.0;
        return Ok(());
    }
    let conc: Vec<f64> = state.counts.iter().map(|&c| c as f64 + prior.alpha0).collect();
    let draw = sample_dirichlet(rng, &conc)?;
    // Weights that underflow would leave the simplex interior.
    let mut draw: Vec<f64> = draw.into_iter().map(|w| w.max(f64::MIN_POSITIVE)).collect();
    let total: f64 = draw.iter().sum();
    draw.iter_mut().for_each(|w| *w /= total);
    *state.params.parts_mut().0 = draw;
    Ok(())
}

/// Each `μ_r` from its normal full conditional truncated to the window
/// between its neighbours, then each `σ_r⁻² ~ G(ν0 + n_r/2, β + ½Σ(ln x − μ_r)²)`.
pub fn update_components<R: Rng + ?Sized>(state: &mut ChainState, prior: &PriorConfig, rng: &mut R) -> Result<()> {
    let r = state.r();
    let mut sums = vec![0.0; r];
    for (&y, &z) in state.latent.log_x().iter().zip(state.latent.z()) {
        sums[z] += y;
    }
    let tau_prec = 1.0 / state.tau2;
    let (mu_hyper, beta) = (state.mu, state.beta);
    let counts = state.counts.clone();
    {
        let (_, mus, sigma2s) = state.params.parts_mut();
        for j in 0..r {
            let prec = counts[j] as f64 / sigma2s[j] + tau_prec;
            let var = 1.0 / prec;
            let mean = var * (sums[j] / sigma2s[j] + tau_prec * mu_hyper);
            let lo = if j == 0 { f64::NEG_INFINITY } else { mus[j - 1] };
            let hi = if j + 1 == r { f64::INFINITY } else { mus[j + 1] };
            let draw = sample_truncated_normal(rng, mean, var.sqrt(), lo, hi)?;
            // A draw rounded onto a neighbour would tie the ordering.
            if draw > lo && draw < hi {
                mus[j] = draw;
            }
        }
    }
    let mut sq = vec![0.0; r];
    {
        let mus = state.params.mus();
        for (&y, &z) in state.latent.log_x().iter().zip(state.latent.z()) {
            let d = y - mus[z];
            sq[z] += d * d;
        }
    }
    let (_, _, sigma2s) = state.params.parts_mut();
    for j in 0..r {
        let prec = sample_gamma(rng, prior.nu0 + 0.5 * counts[j] as f64, beta + 0.5 * sq[j])?;
        sigma2s[j] = 1.0 / prec;
    }
    Ok(())
}

/// Log allocation weights `ln π_r − ½ ln σ_r² − (y − μ_r)²/(2σ_r²)` for `y = ln x`.
pub fn allocation_log_weights(state: &ChainState, log_x: f64) -> Vec<f64> {
    let p = &state.params;
    (0..state.r())
        .map(|j| {
            let d = log_x - p.mus()[j];
            p.weights()[j].ln() - 0.5 * p.sigma2s()[j].ln() - d * d / (2.0 * p.sigma2s()[j])
        })
        .collect()
}

/// Resample every allocation, boundary slots included, and refresh counts.
///
/// When every weight underflows the point goes to the arg-max component.
pub fn update_allocations<R: Rng + ?Sized>(state: &mut ChainState, rng: &mut R) {
    let r = state.r();
    let p = &state.params;
    let offset: Vec<f64> = (0..r).map(|j| p.weights()[j].ln() - 0.5 * p.sigma2s()[j].ln()).collect();
    let half_prec: Vec<f64> = p.sigma2s().iter().map(|s| 0.5 / s).collect();
    let mus = p.mus().to_vec();
    let mut counts = vec![0usize; r];
    let mut lw = vec![0.0; r];
    let n = state.latent.len();
    for i in 0..n {
        let y = state.latent.log_x()[i];
        let z = if r == 1 {
            0
        } else {
            let mut max = f64::NEG_INFINITY;
            for j in 0..r {
                let d = y - mus[j];
                lw[j] = offset[j] - d * d * half_prec[j];
                max = max.max(lw[j]);
            }
            let mut total = 0.0;
            for w in lw.iter_mut() {
                *w = (*w - max).exp();
                total += *w;
            }
            let mut u = rng.random::<f64>() * total;
            let mut pick = r - 1;
            for (j, &w) in lw.iter().enumerate() {
                u -= w;
                if u < 0.0 {
                    pick = j;
                    break;
                }
            }
            if !(total > 0.0 && total.is_finite()) {
                pick = lw
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |b, (j, &w)| if w > b.1 { (j, w) } else { b })
                    .0;
            }
            pick
        };
        state.latent.z_mut()[i] = z;
        counts[z] += 1;
    }
    state.counts = counts;
}

/// Redraw every non-boundary latent income from its component lognormal
/// truncated to its group interval. Boundary slots are left untouched.
pub fn update_latent_incomes<R: Rng + ?Sized>(state: &mut ChainState, data: &GroupedData, rng: &mut R) -> Result<()> {
    let r = state.r();
    let k_groups = data.groups();
    let sigmas: Vec<f64> = state.params.sigma2s().iter().map(|s| s.sqrt()).collect();
    let mus = state.params.mus().to_vec();
    let mut windows: Vec<Option<StdTruncation>> = vec![None; k_groups * r];
    for k in 0..k_groups {
        let (lo, hi) = data.interval(k);
        let block = data.block(k);
        let end = if k + 1 < k_groups { block.end - 1 } else { block.end };
        for i in block.start..end {
            let j = state.latent.z()[i];
            let slot = &mut windows[k * r + j];
            let trunc = match slot {
                Some(t) => *t,
                None => {
                    let comp = LognormalParams::new(mus[j], state.params.sigma2s()[j])?;
                    let t = lognormal_window(&comp, lo, hi)
                        .map_err(|e| e.context(format!("latent income {i} in group {} under component {}", k + 1, j + 1)))?;
                    *slot = Some(t);
                    t
                }
            };
            let x = draw_income(mus[j], sigmas[j], &trunc, lo, hi, sample_open01(rng));
            state.latent.set_income(i, x);
        }
    }
    Ok(())
}

/// `μ ~ N(μ̂, τ̂²)`, `τ⁻² ~ G(n0 + R/2, s0 + ½Σ(μ_r − μ)²)`, `β ~ G(Rν0 + g0, Σσ_r⁻² + h0)`.
pub fn update_hypers<R: Rng + ?Sized>(state: &mut ChainState, prior: &PriorConfig, rng: &mut R) -> Result<()> {
    let r = state.r() as f64;
    let mus = state.params.mus();
    let tau_prec = 1.0 / state.tau2;
    let var = 1.0 / (r * tau_prec + 1.0 / prior.tau0_2);
    let mean = var * (tau_prec * mus.iter().sum::<f64>() + prior.mu0 / prior.tau0_2);
    state.mu = sample_normal(rng, mean, var)?;

    let ss: f64 = mus.iter().map(|m| (m - state.mu) * (m - state.mu)).sum();
    state.tau2 = 1.0 / sample_gamma(rng, prior.n0 + 0.5 * r, prior.s0 + 0.5 * ss)?;

    let prec_sum: f64 = state.params.sigma2s().iter().map(|s| 1.0 / s).sum();
    state.beta = sample_gamma(rng, r * prior.nu0 + prior.g0, prec_sum + prior.h0)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{chain_rng, MixtureParams};
    use crate::model::LatentState;
    use rand_distr::{Distribution, Gamma, Normal};

    /// Two groups with the boundary far below any income, so the top group
    /// is effectively `(0, ∞)`.
    fn open_data(m: usize) -> GroupedData {
        GroupedData::new(vec![1e-30], vec![1, m], None).unwrap()
    }

    fn state(data: &GroupedData, x: Vec<f64>, z: Vec<usize>, params: MixtureParams, hypers: (f64, f64, f64)) -> ChainState {
        let latent = LatentState::new(data, x, z, params.len()).unwrap();
        ChainState::new(data, params, latent, hypers.0, hypers.1, hypers.2).unwrap()
    }

    fn mean_sd(v: &[f64]) -> (f64, f64) {
        let m = v.len() as f64;
        let mean = v.iter().sum::<f64>() / m;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
        (mean, var.sqrt())
    }

    fn two_by_counts(n0: usize, n1: usize) -> (GroupedData, Vec<f64>, Vec<usize>) {
        let data = open_data(n0 + n1 - 1);
        let mut x = vec![1e-30];
        x.extend(std::iter::repeat(1.0).take(n0 + n1 - 1));
        let z = (0..n0 + n1).map(|i| usize::from(i >= n0)).collect();
        (data, x, z)
    }

    #[test]
    fn dirichlet_mean_follows_counts() {
        let (data, x, z) = two_by_counts(10, 20);
        let params = MixtureParams::new(vec![0.5, 0.5], vec![-1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let mut s = state(&data, x, z, params, (0.0, 1.0, 1.0));
        let prior = PriorConfig::default();
        let mut rng = chain_rng(1, 0);
        let draws: Vec<f64> = (0..100_000)
            .map(|_| {
                update_weights(&mut s, &prior, &mut rng).unwrap();
                s.params.weights()[0]
            })
            .collect();
        let (mean, sd) = mean_sd(&draws);
        let se = sd / (draws.len() as f64).sqrt();
        assert!((mean - 11.0 / 32.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn large_concentration_shrinks_towards_uniform() {
        let (data, x, z) = two_by_counts(10, 20);
        let params = MixtureParams::new(vec![0.5, 0.5], vec![-1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let mut s = state(&data, x, z, params, (0.0, 1.0, 1.0));
        let mut rng = chain_rng(2, 0);
        let mut spread = |alpha0: f64| {
            let prior = PriorConfig { alpha0, ..PriorConfig::default() };
            let draws: Vec<f64> = (0..20_000)
                .map(|_| {
                    update_weights(&mut s, &prior, &mut rng).unwrap();
                    s.params.weights()[0]
                })
                .collect();
            mean_sd(&draws)
        };
        let (m1, sd1) = spread(1.0);
        let (m1000, sd1000) = spread(1000.0);
        assert!(sd1000 < 0.25 * sd1, "{sd1000} vs {sd1}");
        assert!((m1000 - 0.5).abs() < (m1 - 0.5).abs());
    }

    #[test]
    fn single_component_weight_is_one() {
        let data = open_data(4);
        let mut s = state(&data, vec![1e-30, 1.0, 2.0, 3.0, 4.0], vec![0; 5], MixtureParams::new(vec![1.0], vec![0.0], vec![1.0]).unwrap(), (0.0, 1.0, 1.0));
        update_weights(&mut s, &PriorConfig::default(), &mut chain_rng(3, 0)).unwrap();
        assert_eq!(s.params.weights(), &[1.0]);
    }

    #[test]
    fn precision_draws_match_gamma_moment() {
        let data = open_data(50);
        let mut rng = chain_rng(4, 0);
        let mut x = vec![1e-30];
        x.extend((0..50).map(|i| (0.3 + 0.8 * ((i as f64) * 0.7).sin()).exp()));
        let mu1 = 0.3;
        // A vanishing τ² pins μ_1 to the hyper-mean, so σ⁻² has a fixed target.
        let mut s = state(&data, x.clone(), vec![0; 51], MixtureParams::new(vec![1.0], vec![mu1], vec![1.0]).unwrap(), (mu1, 1e-24, 0.7));
        let prior = PriorConfig::default();
        let ss: f64 = x.iter().map(|v| (v.ln() - mu1).powi(2)).sum();
        let shape = prior.nu0 + 0.5 * 51.0;
        let rate = 0.7 + 0.5 * ss;
        let draws: Vec<f64> = (0..100_000)
            .map(|_| {
                update_components(&mut s, &prior, &mut rng).unwrap();
                1.0 / s.params.sigma2s()[0]
            })
            .collect();
        let (mean, _) = mean_sd(&draws);
        let se = shape.sqrt() / rate / (draws.len() as f64).sqrt();
        assert!((mean - shape / rate).abs() < 3.0 * se, "{mean} vs {}", shape / rate);
        assert!((s.params.mus()[0] - mu1).abs() < 1e-9);
    }

    #[test]
    fn empty_component_draws_from_prior() {
        let data = open_data(5);
        let x = vec![1e-30, 1.0, 1.1, 1.2, 1.3, 1.4];
        let params = MixtureParams::new(vec![0.5, 0.5], vec![0.0, 5.0], vec![1.0, 1.0]).unwrap();
        let mut s = state(&data, x, vec![0; 6], params, (5.0, 0.5, 3.0));
        let prior = PriorConfig::default();
        let mut rng = chain_rng(5, 0);
        let draws: Vec<f64> = (0..100_000)
            .map(|_| {
                update_components(&mut s, &prior, &mut rng).unwrap();
                assert!(s.params.mus()[1] > s.params.mus()[0]);
                1.0 / s.params.sigma2s()[1]
            })
            .collect();
        let (mean, _) = mean_sd(&draws);
        let se = prior.nu0.sqrt() / 3.0 / (draws.len() as f64).sqrt();
        assert!((mean - prior.nu0 / 3.0).abs() < 3.0 * se);
    }

    #[test]
    fn precise_component_mean_tracks_data() {
        let data = open_data(999);
        let mut x = vec![1e-30];
        x.extend((0..999).map(|i| (2.0 + 0.1 * ((i as f64) * 1.3).cos()).exp()));
        let mean_log = x[1..].iter().map(|v| v.ln()).sum::<f64>() / 999.0;
        let z: Vec<usize> = std::iter::once(0).chain(std::iter::repeat(1).take(999)).collect();
        let params = MixtureParams::new(vec![0.001, 0.999], vec![-69.0, 0.0], vec![1.0, 1e-6]).unwrap();
        let mut s = state(&data, x, z, params, (0.0, 1.0, 1.0));
        update_components(&mut s, &PriorConfig::default(), &mut chain_rng(6, 0)).unwrap();
        assert!((s.params.mus()[1] - mean_log).abs() < 1e-3);
    }

    #[test]
    fn allocation_weights_match_direct_normalisation() {
        let data = open_data(1);
        let params = MixtureParams::new(vec![0.2, 0.5, 0.3], vec![2.0, 3.0, 4.0], vec![0.3, 0.1, 0.2]).unwrap();
        let s = state(&data, vec![1e-30, 20.0], vec![0, 1], params.clone(), (0.0, 1.0, 1.0));
        let y = 20f64.ln();
        let lw = allocation_log_weights(&s, y);
        let max = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = lw.iter().map(|l| (l - max).exp()).sum();
        let direct: Vec<f64> = (0..3)
            .map(|j| params.weights()[j] / params.sigma2s()[j].sqrt() * (-(y - params.mus()[j]).powi(2) / (2.0 * params.sigma2s()[j])).exp())
            .collect();
        let direct_total: f64 = direct.iter().sum();
        for j in 0..3 {
            let p = (lw[j] - max).exp() / total;
            assert!((p - direct[j] / direct_total).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_point_splits_evenly() {
        let m = 2000;
        let data = open_data(m);
        let mut x = vec![1e-30];
        x.extend(std::iter::repeat(1.0).take(m));
        let params = MixtureParams::new(vec![0.5, 0.5], vec![-1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let mut s = state(&data, x, vec![0; m + 1], params, (0.0, 1.0, 1.0));
        let mut rng = chain_rng(7, 0);
        let (mut ones, mut total) = (0usize, 0usize);
        for _ in 0..50 {
            update_allocations(&mut s, &mut rng);
            assert_eq!(s.latent.z()[0], 0);
            ones += s.latent.z()[1..].iter().filter(|&&z| z == 1).count();
            total += m;
            assert_eq!(s.counts, s.latent.counts(2));
        }
        let p = ones as f64 / total as f64;
        assert!((p - 0.5).abs() < 3.0 * (0.25 / total as f64).sqrt(), "{p}");
    }

    #[test]
    fn single_component_allocates_everything_to_it() {
        let data = open_data(3);
        let mut s = state(&data, vec![1e-30, 1.0, 2.0, 3.0], vec![0; 4], MixtureParams::new(vec![1.0], vec![0.5], vec![1.0]).unwrap(), (0.0, 1.0, 1.0));
        update_allocations(&mut s, &mut chain_rng(8, 0));
        assert!(s.latent.z().iter().all(|&z| z == 0));
        assert_eq!(s.counts, vec![4]);
    }

    #[test]
    fn latent_incomes_follow_component_in_open_group() {
        let m = 300;
        let data = open_data(m);
        let mut x = vec![1e-30];
        x.extend(std::iter::repeat(1.0).take(m));
        let mut s = state(&data, x, vec![0; m + 1], MixtureParams::new(vec![1.0], vec![0.7], vec![0.5]).unwrap(), (0.0, 1.0, 1.0));
        let mut rng = chain_rng(9, 0);
        let mut sum = 0.0;
        let sweeps = 400;
        for _ in 0..sweeps {
            update_latent_incomes(&mut s, &data, &mut rng).unwrap();
            assert_eq!(s.latent.x()[0].to_bits(), 1e-30f64.to_bits());
            s.latent.validate(&data, 1).unwrap();
            sum += s.latent.log_x()[1..].iter().sum::<f64>();
        }
        let count = (m * sweeps) as f64;
        assert!((sum / count - 0.7).abs() < 3.0 * (0.5 / count).sqrt());
    }

    #[test]
    fn latent_incomes_stay_in_their_groups() {
        let data = GroupedData::new(vec![5.0, 12.0, 30.0], vec![4, 3, 5, 2], None).unwrap();
        let mut rng = chain_rng(10, 0);
        let latent = LatentState::initial(&data, 2, &mut rng);
        let params = MixtureParams::new(vec![0.4, 0.6], vec![1.5, 3.0], vec![0.4, 0.3]).unwrap();
        let mut s = ChainState::new(&data, params, latent, 0.0, 1.0, 1.0).unwrap();
        let pinned: Vec<u64> = data.boundary_indices().iter().map(|&i| s.latent.x()[i].to_bits()).collect();
        for _ in 0..200 {
            update_latent_incomes(&mut s, &data, &mut rng).unwrap();
            s.latent.validate(&data, 2).unwrap();
        }
        let after: Vec<u64> = data.boundary_indices().iter().map(|&i| s.latent.x()[i].to_bits()).collect();
        assert_eq!(pinned, after);
    }

    #[test]
    fn hyper_precision_limit_and_beta_moment() {
        let data = open_data(1);
        let params = MixtureParams::new(vec![1.0], vec![2.5], vec![0.4]).unwrap();
        let mut s = state(&data, vec![1e-30, 3.0], vec![0, 0], params, (0.0, 1e-12, 1.0));
        let prior = PriorConfig::default();
        let mut rng = chain_rng(11, 0);
        update_hypers(&mut s, &prior, &mut rng).unwrap();
        assert!((s.mu - 2.5).abs() < 1e-4);

        let draws: Vec<f64> = (0..100_000)
            .map(|_| {
                update_hypers(&mut s, &prior, &mut rng).unwrap();
                s.beta
            })
            .collect();
        let (shape, rate) = (prior.nu0 + prior.g0, 1.0 / 0.4 + prior.h0);
        let (mean, _) = mean_sd(&draws);
        let se = shape.sqrt() / rate / (draws.len() as f64).sqrt();
        assert!((mean - shape / rate).abs() < 3.0 * se);
    }

    /// Independent two-level normal Gibbs sampler for one component with
    /// fixed complete data, in the same shape–rate conventions.
    fn reference_chain(ys: &[f64], prior: &PriorConfig, sweeps: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = chain_rng(seed, 1);
        let n = ys.len() as f64;
        let sum: f64 = ys.iter().sum();
        let (mut s2, mut mu, mut tau2, mut beta) = (1.0, prior.mu0, prior.s0 / prior.n0, prior.g0 / prior.h0);
        let (mut out_mu1, mut out_mu) = (Vec::with_capacity(sweeps), Vec::with_capacity(sweeps));
        for _ in 0..sweeps {
            let v = 1.0 / (n / s2 + 1.0 / tau2);
            let mu1 = Normal::new(v * (sum / s2 + mu / tau2), v.sqrt()).unwrap().sample(&mut rng);
            let ss: f64 = ys.iter().map(|y| (y - mu1).powi(2)).sum();
            s2 = 1.0 / Gamma::new(prior.nu0 + 0.5 * n, 1.0 / (beta + 0.5 * ss)).unwrap().sample(&mut rng);
            let v = 1.0 / (1.0 / tau2 + 1.0 / prior.tau0_2);
            mu = Normal::new(v * (mu1 / tau2 + prior.mu0 / prior.tau0_2), v.sqrt()).unwrap().sample(&mut rng);
            tau2 = 1.0 / Gamma::new(prior.n0 + 0.5, 1.0 / (prior.s0 + 0.5 * (mu1 - mu).powi(2))).unwrap().sample(&mut rng);
            beta = Gamma::new(prior.nu0 + prior.g0, 1.0 / (1.0 / s2 + prior.h0)).unwrap().sample(&mut rng);
            out_mu1.push(mu1);
            out_mu.push(mu);
        }
        (out_mu1, out_mu)
    }

    /// Mean and batch-means standard error of an autocorrelated series.
    fn batch_mean(v: &[f64]) -> (f64, f64) {
        let batches = 50;
        let size = v.len() / batches;
        let means: Vec<f64> = v.chunks(size).take(batches).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
        let (m, sd) = mean_sd(&means);
        (m, sd / (batches as f64).sqrt())
    }

    #[test]
    fn conjugate_submodel_matches_reference_chain() {
        let m = 40;
        let data = open_data(m);
        let mut x = vec![1e-30];
        x.extend((0..m).map(|i| (1.5 + 0.6 * ((i as f64) * 2.1).sin()).exp()));
        let prior = PriorConfig::default();
        let mut s = state(&data, x.clone(), vec![0; m + 1], MixtureParams::new(vec![1.0], vec![0.0], vec![1.0]).unwrap(), (prior.mu0, prior.s0 / prior.n0, prior.g0 / prior.h0));
        let mut rng = chain_rng(12, 0);
        let sweeps = 200_000;
        let (mut mu1, mut mu) = (Vec::with_capacity(sweeps), Vec::with_capacity(sweeps));
        for _ in 0..sweeps {
            update_components(&mut s, &prior, &mut rng).unwrap();
            update_hypers(&mut s, &prior, &mut rng).unwrap();
            mu1.push(s.params.mus()[0]);
            mu.push(s.mu);
        }
        let ys: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        let (ref_mu1, ref_mu) = reference_chain(&ys, &prior, sweeps, 13);
        for (ours, theirs) in [(&mu1, &ref_mu1), (&mu, &ref_mu)] {
            let (a, sa) = batch_mean(&ours[1000..]);
            let (b, sb) = batch_mean(&theirs[1000..]);
            assert!((a - b).abs() < 4.0 * (sa * sa + sb * sb).sqrt(), "{a} ± {sa} vs {b} ± {sb}");
        }
    }
}

use std::f64::consts::SQRT_2;

use rayon::prelude::*;

use super::select_draws;
use crate::distributions::{std_normal_cdf, IncomeDistribution, LognormalParams};
use crate::draws::{DrawParams, Draws};
use crate::error::{Error, Result};
use crate::quadrature::integrate;

/// Survival level below which the integrands are treated as exhausted.
const TAIL_SURVIVAL: f64 = 1e-12;
/// Largest acceptable truncated-tail share of `∫ S`.
const TAIL_SHARE: f64 = 1e-9;
const MAX_UPPER: f64 = 1e300;

/// Closed-form lognormal Gini `2Φ(σ/√2) − 1`.
pub fn gini_lognormal(params: &LognormalParams) -> f64 {
    2.0 * std_normal_cdf(params.sigma() / SQRT_2) - 1.0
}

/// Gini by quadrature, `1 − ∫S² / ∫S` over `(0, U]` with `S = 1 − F`.
///
/// `U` first doubles from the mean until `S(U) < 1e-12`, then grows
/// sixteen-fold while the next stretch `∫_U^{16U} S` still exceeds `1e-9` of
/// the running integral. Integrals run over doubling panels anchored at the
/// mean so that a polynomial tail cannot hide the bulk from the rule.
pub fn gini_numeric<D: IncomeDistribution + ?Sized>(dist: &D) -> Result<f64> {
    let anchor = dist.mean().filter(|m| m.is_finite() && *m > 0.0).unwrap_or(1.0);
    let mut upper = anchor;
    while dist.sf(upper) > TAIL_SURVIVAL {
        upper *= 2.0;
        if upper > MAX_UPPER {
            return Err(Error::Integration("survival function does not vanish in the upper tail".into()));
        }
    }
    let sf = |x: f64| dist.sf(x);
    let sf2 = |x: f64| {
        let s = dist.sf(x);
        s * s
    };
    let mut first = integrate_panels(&sf, 0.0, anchor, upper)?;
    loop {
        let next = 16.0 * upper;
        if next > MAX_UPPER {
            return Err(Error::Integration(
                "upper-tail integral of the survival function does not converge (mean not finite)".into(),
            ));
        }
        let stretch = integrate_panels(&sf, upper, upper, next)?;
        if stretch <= TAIL_SHARE * first {
            break;
        }
        first += stretch;
        upper = next;
    }
    let second = integrate_panels(&sf2, 0.0, anchor, upper)?;
    if !(first > 0.0 && first.is_finite()) {
        return Err(Error::Integration(format!("mean integral evaluated to {first}")));
    }
    Ok(1.0 - second / first)
}

/// `∫_lo^hi f` as `[lo, anchor]` followed by doubling panels up to `hi`.
/// Requires `lo ≤ anchor ≤ hi`.
fn integrate_panels(f: &dyn Fn(f64) -> f64, lo: f64, anchor: f64, hi: f64) -> Result<f64> {
    let quad = |a: f64, b: f64| integrate(f, a, b, 1e-15 * b, 1e-11).map(|q| q.value);
    let mut total = if anchor > lo { quad(lo, anchor)? } else { 0.0 };
    let mut a = anchor;
    while a < hi {
        let b = (2.0 * a).min(hi);
        total += quad(a, b)?;
        a = b;
    }
    Ok(total)
}

/// Gini of one posterior draw: closed form for a single lognormal,
/// quadrature otherwise.
pub fn gini_of_draw(params: &DrawParams) -> Result<f64> {
    match params {
        DrawParams::Mixture(m) if m.len() == 1 => Ok(gini_lognormal(&m.component(0))),
        DrawParams::Mixture(m) => gini_numeric(m),
        DrawParams::Gb2(g) => {
            if !g.has_finite_mean() {
                return Err(Error::Integration(format!(
                    "GB2 draw with a·q = {} ≤ 1 has an infinite mean; Gini undefined",
                    g.a * g.q
                )));
            }
            gini_numeric(g)
        }
    }
}

/// Per-draw Gini coefficients, in draw order, optionally restricted to
/// draws with `R = condition_r`.
pub fn gini_posterior(draws: &Draws, condition_r: Option<usize>) -> Result<Vec<f64>> {
    let selected = select_draws(draws, condition_r)?;
    selected
        .par_iter()
        .map(|d| gini_of_draw(&d.params).map_err(|e| e.context(format!("Gini of draw at iteration {}", d.iteration))))
        .collect()
}

//! Subtransversality: worst-case ratio of intersection distance to the
//! larger of the two set distances, probed on shrinking annuli.

use rayon::prelude::*;

use crate::error::Result;
use crate::rng::stream_rng;
use crate::scenario::PairScenario;
use crate::search::{self, PatternSearch};
use crate::vector::RealVector;

use super::{
    clamp_annulus, sample_annulus, ConstantEstimate, ConstantName, EstimateFlags,
    EstimatorParams, RadiusValue,
};

/// Distance ratio `max(d_A, d_B) / d_{A∩B}` at `x`, or `None` when `x` is
/// already in the intersection up to the guard.
fn ratio_at(sc: &PairScenario, x: &RealVector, guard: f64) -> Option<f64> {
    let di = sc.intersection.distance_raw(x);
    if di <= guard {
        return None;
    }
    let da = sc.set_a.distance_raw(x);
    let db = sc.set_b.distance_raw(x);
    Some(da.max(db) / di)
}

/// Newton steps along `grad(d_A - d_B) = u_A - u_B` restoring the balance
/// `d_A = d_B`. Left unchanged when a distance vanishes, where the gradient
/// direction is undefined.
fn rebalance(sc: &PairScenario, x: &RealVector) -> RealVector {
    let mut y = x.clone();
    for _ in 0..3 {
        let (pa, da) = sc.set_a.project_raw(&y);
        let (pb, db) = sc.set_b.project_raw(&y);
        if da <= 1e-15 || db <= 1e-15 {
            return y;
        }
        let grad = y.sub(&pa).scale(1.0 / da).sub(&y.sub(&pb).scale(1.0 / db));
        let n2 = grad.dot(&grad);
        if n2 <= 1e-12 {
            return y;
        }
        y = y.add_scaled(-(da - db) / n2, &grad);
    }
    y
}

/// Descent restricted to the balance manifold `d_A = d_B`, where the ratio
/// valley runs tangent to no coordinate axis and plain compass probes all
/// ascend. Each probe is clamped back into the annulus and rebalanced before
/// comparison, so accepted moves slide along the valley at full step length.
fn balance_descent(
    sc: &PairScenario,
    start: &RealVector,
    r_in: f64,
    r_out: f64,
    guard: f64,
    step0: f64,
    iters: usize,
) -> f64 {
    let x0 = clamp_annulus(&sc.xbar, r_in, r_out, start);
    let mut x = x0.clone();
    let mut best = match ratio_at(sc, &x, guard) {
        Some(v) => v,
        None => return f64::INFINITY,
    };
    let mut step = step0;
    let dim = x.dim();
    for _ in 0..iters {
        if step < step0 * 1e-9 {
            break;
        }
        let mut accepted = false;
        'sweep: for i in 0..dim {
            for sign in [1.0, -1.0] {
                let mut z = x.as_slice().to_vec();
                z[i] += sign * step;
                let y = clamp_annulus(&sc.xbar, r_in, r_out, &RealVector::from_slice(&z));
                let y = rebalance(sc, &y);
                let y = clamp_annulus(&sc.xbar, r_in, r_out, &y);
                if let Some(v) = ratio_at(sc, &y, guard) {
                    if v < best {
                        x = y;
                        best = v;
                        accepted = true;
                        step = (step * 2.0).min(step0);
                        break 'sweep;
                    }
                }
            }
        }
        if !accepted {
            step *= 0.5;
        }
    }
    best
}

/// Estimates the subtransversality constant of the pair at its base point.
///
/// Per radius `rho` the probe region is the annulus `[gamma*rho, rho]` around
/// the base point: every drawn candidate is refined by pattern search with a
/// radial clamp, and the recorded value is the smallest refined ratio. A
/// radius with no candidate outside the intersection records 1; if that
/// happens at every radius the estimate is flagged degenerate.
pub fn estimate_subtransversality(
    sc: &PairScenario,
    params: &EstimatorParams,
    seed: u64,
) -> Result<ConstantEstimate> {
    let guard = params.exclusion_tol(sc.xbar.norm());
    let gamma = params.schedule.gamma;
    let mut per_radius = Vec::new();
    let mut any_probe = false;

    for (k, rho) in params.schedule.radii().into_iter().enumerate() {
        let r_in = gamma * rho;
        let mut rng = stream_rng(seed, &["str", &k.to_string()]);
        let candidates = sample_annulus(&mut rng, &sc.xbar, r_in, rho, params.point_samples);

        let objective = |z: &[f64]| -> f64 {
            let x = clamp_annulus(&sc.xbar, r_in, rho, &RealVector::from_slice(z));
            ratio_at(sc, &x, guard).unwrap_or(f64::INFINITY)
        };
        let opts = PatternSearch::new(0.25 * rho).with_iters(params.refine_iters);

        let refined: Vec<f64> = candidates
            .par_iter()
            .filter(|x| ratio_at(sc, x, guard).is_some())
            .map(|x| {
                let (z, v) = search::minimize(&objective, x.as_slice(), &opts);
                let polished = balance_descent(
                    sc,
                    &RealVector::from_slice(&z),
                    r_in,
                    rho,
                    guard,
                    0.25 * rho,
                    params.refine_iters,
                );
                v.min(polished)
            })
            .collect();

        let samples = refined.len();
        if samples > 0 {
            any_probe = true;
        }
        let value = refined
            .into_iter()
            .fold(f64::INFINITY, f64::min)
            .min(1.0);
        let value = if samples == 0 { 1.0 } else { value };
        per_radius.push(RadiusValue {
            rho,
            value,
            samples,
        });
    }

    let flags = EstimateFlags {
        degenerate: !any_probe,
        ..EstimateFlags::default()
    };
    Ok(ConstantEstimate::from_curve(
        ConstantName::Str,
        per_radius,
        seed,
        flags,
    ))
}

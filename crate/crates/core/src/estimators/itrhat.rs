//! Directional estimators over boundary pairs: for `a` in A only and `b` in
//! B only, the chord direction `u = (b-a)/|b-a|` is compared against the two
//! normal cones, either by worst cone distance (minimized) or by best
//! guaranteed inner product (maximized).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::normals::{normal_cone_distance, proximal_normal_directions};
use crate::rng::stream_seed;
use crate::scenario::PairScenario;
use crate::search::{self, PatternSearch};
use crate::sets::SetOracle;
use crate::vector::{RealVector, Tolerances};

use super::{
    ConstantEstimate, ConstantName, EstimateFlags, EstimatorParams, RadiusValue,
};

/// Largest cosine between `u` and a unit vector of the normal cone at `p`,
/// or `None` when the cone is trivial there.
fn support_cos(
    set: &SetOracle,
    p: &RealVector,
    u: &RealVector,
    tol: &Tolerances,
    seed: u64,
) -> Option<f64> {
    let fan = proximal_normal_directions(set, p, tol, None, 6, seed).ok()?;
    if fan.directions.is_empty() {
        return None;
    }
    let d = normal_cone_distance(set, p, u, tol).ok()?;
    if d < 1.0 - 1e-9 {
        Some((1.0 - d * d).max(0.0).sqrt())
    } else {
        fan.directions
            .iter()
            .map(|g| u.dot(g))
            .fold(None, |acc: Option<f64>, c| {
                Some(acc.map_or(c, |a| a.max(c)))
            })
    }
}

struct PairSite<'a> {
    sc: &'a PairScenario,
    rho: f64,
    excl: f64,
    tol: &'a Tolerances,
    fan_seed_a: u64,
    fan_seed_b: u64,
}

impl PairSite<'_> {
    /// Retracted pair with chord direction, or `None` when degenerate.
    fn chord(&self, z: &[f64]) -> Option<(RealVector, RealVector, RealVector, f64)> {
        let d = self.sc.dimension;
        let (a, _) = self.sc.set_a.project_raw(&RealVector::from_slice(&z[..d]));
        let (b, _) = self.sc.set_b.project_raw(&RealVector::from_slice(&z[d..]));
        if self.sc.set_b.distance_raw(&a) <= self.excl
            || self.sc.set_a.distance_raw(&b) <= self.excl
        {
            return None;
        }
        let gap = b.dist(&a);
        if gap <= 1e-14 {
            return None;
        }
        let u = b.sub(&a).scale(1.0 / gap);
        let excess = ((a.dist(&self.sc.xbar) - self.rho).max(0.0)
            + (b.dist(&self.sc.xbar) - self.rho).max(0.0))
            / self.rho;
        Some((a, b, u, excess))
    }

    fn worst_cone_gap(&self, z: &[f64]) -> f64 {
        let Some((a, b, u, excess)) = self.chord(z) else {
            return f64::INFINITY;
        };
        let Ok(d1) = normal_cone_distance(&self.sc.set_a, &a, &u, self.tol) else {
            return f64::INFINITY;
        };
        let neg = u.scale(-1.0);
        let Ok(d2) = normal_cone_distance(&self.sc.set_b, &b, &neg, self.tol) else {
            return f64::INFINITY;
        };
        d1.max(d2) + 8.0 * excess
    }

    fn neg_guaranteed_cos(&self, z: &[f64]) -> f64 {
        let Some((a, b, u, excess)) = self.chord(z) else {
            return f64::INFINITY;
        };
        let s1 = match support_cos(&self.sc.set_a, &a, &u, self.tol, self.fan_seed_a) {
            Some(s) => s,
            None => return f64::INFINITY,
        };
        let neg = u.scale(-1.0);
        let s2 = match support_cos(&self.sc.set_b, &b, &neg, self.tol, self.fan_seed_b) {
            Some(s) => s,
            None => return f64::INFINITY,
        };
        -(s1.min(s2).max(0.0)) + 8.0 * excess
    }
}

/// Estimates the pair of directional constants: the minimized worst cone
/// distance of the chord direction, and the maximized inner product the
/// chord guarantees against both cones. With no valid boundary pair at a
/// radius the conventions are 1 and 0 respectively.
pub fn estimate_itrhat(
    sc: &PairScenario,
    params: &EstimatorParams,
    seed: u64,
) -> Result<(ConstantEstimate, ConstantEstimate)> {
    let excl = params.exclusion_tol(sc.xbar.norm());
    let mut curve1 = Vec::new();
    let mut curve2 = Vec::new();
    let mut empty_last = false;

    for (k, rho) in params.schedule.radii().into_iter().enumerate() {
        let ks = k.to_string();
        let pool = |set: &SetOracle, tag: &str| -> Vec<RealVector> {
            match set.sample_near(
                &sc.xbar,
                rho,
                params.pair_samples,
                stream_seed(seed, &["itrhat", tag, &ks]),
            ) {
                Ok(v) => v,
                Err(Error::EmptySample) => Vec::new(),
                Err(_) => Vec::new(),
            }
        };
        let a_pool = pool(&sc.set_a, "a");
        let b_pool = pool(&sc.set_b, "b");
        let site = PairSite {
            sc,
            rho,
            excl,
            tol: &params.tol,
            fan_seed_a: stream_seed(seed, &["itrhat", "fan-a", &ks]),
            fan_seed_b: stream_seed(seed, &["itrhat", "fan-b", &ks]),
        };

        let candidates: Vec<Vec<f64>> = a_pool
            .iter()
            .zip(b_pool.iter())
            .filter(|(a, b)| {
                sc.set_b.distance_raw(a) > excl && sc.set_a.distance_raw(b) > excl
            })
            .map(|(a, b)| {
                let mut z = Vec::with_capacity(2 * sc.dimension);
                z.extend_from_slice(a.as_slice());
                z.extend_from_slice(b.as_slice());
                z
            })
            .collect();

        let opts = PatternSearch::new(0.2 * rho).with_iters(params.refine_iters);
        let gaps: Vec<f64> = candidates
            .par_iter()
            .map(|z| search::minimize(&|w: &[f64]| site.worst_cone_gap(w), z, &opts).1)
            .collect();
        let coss: Vec<f64> = candidates
            .par_iter()
            .map(|z| -search::minimize(&|w: &[f64]| site.neg_guaranteed_cos(w), z, &opts).1)
            .collect();

        let valid1: Vec<f64> = gaps.into_iter().filter(|v| v.is_finite()).collect();
        let valid2: Vec<f64> = coss.into_iter().filter(|v| v.is_finite()).collect();
        empty_last = valid1.is_empty();
        curve1.push(RadiusValue {
            rho,
            value: valid1.iter().copied().fold(f64::INFINITY, f64::min).min(1.0),
            samples: valid1.len(),
        });
        let v2 = valid2.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        curve2.push(RadiusValue {
            rho,
            value: if valid2.is_empty() { 0.0 } else { v2.max(0.0) },
            samples: valid2.len(),
        });
    }

    let flags = EstimateFlags {
        no_witness: empty_last,
        ..EstimateFlags::default()
    };
    Ok((
        ConstantEstimate::from_curve(ConstantName::Itrhat1, curve1, seed, flags.clone()),
        ConstantEstimate::from_curve(ConstantName::Itrhat2, curve2, seed, flags),
    ))
}

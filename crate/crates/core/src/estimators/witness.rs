//! Witness triples for the intrinsic constants: a point outside both sets
//! together with nearby boundary points of each set whose outward unit
//! directions approximate a relative normal pair. The intrinsic estimators
//! minimize `|u1 + u2| / 2` over refined feasible triples.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::normals::{alignment_defect, normal_cone_distance, proximal_normal_directions};
use crate::rng::stream_seed;
use crate::scenario::PairScenario;
use crate::search::{self, PatternSearch};
use crate::sets::SetOracle;
use crate::vector::{RealVector, Tolerances};

use super::{
    ConstantEstimate, ConstantName, EstimateFlags, EstimatorParams, PairDefects, RadiusValue,
    RelativeNormalPair, WitnessTriple,
};

/// How the witness point is tied to its two boundary points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BandKind {
    /// The two distances must agree up to a relative band.
    Ratio,
    /// The witness point is restricted to the bisector of the boundary pair.
    Bisector,
}

const PENALTY: f64 = 8.0;
const DIRECTION_CAP: usize = 4;
const T_FRACTIONS: [f64; 3] = [0.8, 0.4, 0.15];

struct TripleSite<'a> {
    set_a: &'a SetOracle,
    set_b: &'a SetOracle,
    xbar: &'a RealVector,
    rho: f64,
    eta: f64,
    excl: f64,
    band: BandKind,
    tol: &'a Tolerances,
}

fn bisector_project(x: &RealVector, a: &RealVector, b: &RealVector) -> Option<RealVector> {
    let w = b.sub(a);
    let n = w.normalized()?;
    let c = a.add(b).scale(0.5);
    let t = x.sub(&c).dot(&n);
    Some(x.add_scaled(-t, &n))
}

struct TripleEval {
    a: RealVector,
    b: RealVector,
    x: RealVector,
    u1: RealVector,
    u2: RealVector,
    band_defect: f64,
    cone1: f64,
    cone2: f64,
    ball_excess: f64,
    base: f64,
}

impl TripleSite<'_> {
    fn dim(&self) -> usize {
        self.xbar.dim()
    }

    fn evaluate(&self, z: &[f64]) -> Option<TripleEval> {
        let d = self.dim();
        let (a, _) = self.set_a.project_raw(&RealVector::from_slice(&z[..d]));
        let (b, _) = self.set_b.project_raw(&RealVector::from_slice(&z[d..2 * d]));
        let mut x = RealVector::from_slice(&z[2 * d..]);
        if self.band == BandKind::Bisector {
            x = bisector_project(&x, &a, &b)?;
        }
        if self.set_b.distance_raw(&a) <= self.excl
            || self.set_a.distance_raw(&b) <= self.excl
            || self.set_a.distance_raw(&x) <= self.excl
            || self.set_b.distance_raw(&x) <= self.excl
        {
            return None;
        }
        let r1 = x.dist(&a);
        let r2 = x.dist(&b);
        if r1 <= 1e-14 || r2 <= 1e-14 {
            return None;
        }
        let u1 = x.sub(&a).scale(1.0 / r1);
        let u2 = x.sub(&b).scale(1.0 / r2);
        let cone1 = normal_cone_distance(self.set_a, &a, &u1, self.tol).ok()?;
        let cone2 = normal_cone_distance(self.set_b, &b, &u2, self.tol).ok()?;
        let band_defect = match self.band {
            BandKind::Ratio => (r1 / r2 - 1.0).abs(),
            BandKind::Bisector => (r1 - r2).abs() / r1,
        };
        let ball_excess = [(a.dist(self.xbar)), (b.dist(self.xbar)), (x.dist(self.xbar))]
            .iter()
            .map(|r| (r - self.rho).max(0.0))
            .sum::<f64>()
            / self.rho;
        let base = u1.add(&u2).norm();
        Some(TripleEval {
            a,
            b,
            x,
            u1,
            u2,
            band_defect,
            cone1,
            cone2,
            ball_excess,
            base,
        })
    }

    fn objective(&self, z: &[f64]) -> f64 {
        match self.evaluate(z) {
            None => f64::INFINITY,
            Some(e) => {
                let excess = |v: f64| (v - self.eta).max(0.0) / self.eta;
                e.base
                    + PENALTY
                        * (excess(e.cone1) + excess(e.cone2) + excess(e.band_defect))
                    + PENALTY * e.ball_excess
            }
        }
    }

    fn feasible(&self, e: &TripleEval) -> bool {
        e.cone1 <= self.eta
            && e.cone2 <= self.eta
            && e.band_defect <= self.eta
            && e.ball_excess <= 1e-9
    }
}

/// Proximal-ray candidates grown from boundary points of `from`, closed by
/// projecting the probe onto `onto`.
fn ray_candidates(
    site: &TripleSite<'_>,
    from: &SetOracle,
    onto: &SetOracle,
    pool: &[RealVector],
    from_is_a: bool,
    cap: usize,
    seed: u64,
) -> Vec<(RealVector, RealVector, RealVector)> {
    let mut out = Vec::new();
    for (i, p) in pool.iter().enumerate().take(cap) {
        if onto.distance_raw(p) <= site.excl {
            continue;
        }
        let fan = match proximal_normal_directions(
            from,
            p,
            site.tol,
            None,
            6,
            stream_seed(seed, &["fan", &i.to_string()]),
        ) {
            Ok(f) => f,
            Err(_) => continue,
        };
        let headroom = (site.rho - p.dist(site.xbar)).min(site.rho);
        if headroom <= 1e-6 * site.rho {
            continue;
        }
        for g in fan.directions.iter().take(DIRECTION_CAP) {
            for frac in T_FRACTIONS {
                let x = p.add_scaled(frac * headroom, g);
                if x.dist(site.xbar) > site.rho {
                    continue;
                }
                let (q, _) = onto.project_raw(&x);
                if from.distance_raw(&q) <= site.excl
                    || q.dist(site.xbar) > site.rho
                    || x.dist(&q) <= site.excl
                    || x.dist(p) <= site.excl
                {
                    continue;
                }
                let (a, b) = if from_is_a {
                    (p.clone(), q.clone())
                } else {
                    (q.clone(), p.clone())
                };
                out.push((a, b, x));
            }
        }
    }
    out
}

/// Ray candidates whose probe depth is solved so the two witness distances
/// balance: along a fan direction `g` from `p`, `f(t) = t - d_onto(p + t g)`
/// crosses zero exactly where the band is tight. Bisection lands inside
/// bands far narrower than any pattern step could hit, and rays that never
/// approach the other set keep `f < 0` and are dropped outright.
fn balanced_ray_candidates(
    site: &TripleSite<'_>,
    from: &SetOracle,
    onto: &SetOracle,
    pool: &[RealVector],
    from_is_a: bool,
    cap: usize,
    seed: u64,
) -> Vec<(RealVector, RealVector, RealVector)> {
    let mut out = Vec::new();
    for (i, p) in pool.iter().enumerate().take(cap) {
        if onto.distance_raw(p) <= site.excl {
            continue;
        }
        let fan = match proximal_normal_directions(
            from,
            p,
            site.tol,
            None,
            6,
            stream_seed(seed, &["fan", &i.to_string()]),
        ) {
            Ok(f) => f,
            Err(_) => continue,
        };
        let headroom = (site.rho - p.dist(site.xbar)).min(site.rho);
        if headroom <= 1e-6 * site.rho {
            continue;
        }
        for g in fan.directions.iter().take(DIRECTION_CAP) {
            let balance = |t: f64| t - onto.distance_raw(&p.add_scaled(t, g));
            if balance(headroom) <= 0.0 {
                continue;
            }
            let (mut lo, mut hi) = (0.0f64, headroom);
            for _ in 0..64 {
                let mid = 0.5 * (lo + hi);
                if balance(mid) <= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let x = p.add_scaled(hi, g);
            let (q, _) = onto.project_raw(&x);
            if from.distance_raw(&q) <= site.excl
                || q.dist(site.xbar) > site.rho
                || x.dist(&q) <= site.excl
                || x.dist(p) <= site.excl
            {
                continue;
            }
            let (a, b) = if from_is_a {
                (p.clone(), q.clone())
            } else {
                (q.clone(), p.clone())
            };
            out.push((a, b, x));
        }
    }
    out
}

fn interleave<T: Clone>(families: Vec<Vec<T>>, budget: usize) -> Vec<T> {
    let mut cursors = vec![0usize; families.len()];
    let mut out = Vec::with_capacity(budget);
    while out.len() < budget {
        let mut advanced = false;
        for (f, cur) in families.iter().zip(cursors.iter_mut()) {
            if *cur < f.len() && out.len() < budget {
                out.push(f[*cur].clone());
                *cur += 1;
                advanced = true;
            }
        }
        if !advanced {
            break;
        }
    }
    out
}

/// Feasible refined witness triples at one radius, sorted by `|u1 + u2|`.
pub(crate) fn witness_radius(
    sc: &PairScenario,
    rho: f64,
    eta: f64,
    params: &EstimatorParams,
    band: BandKind,
    label: &str,
    radius_tag: &str,
    seed: u64,
) -> Result<Vec<WitnessTriple>> {
    let excl = params.exclusion_tol(sc.xbar.norm());
    let site = TripleSite {
        set_a: &sc.set_a,
        set_b: &sc.set_b,
        xbar: &sc.xbar,
        rho,
        eta,
        excl,
        band,
        tol: &params.tol,
    };

    let pool_n = (params.triple_samples / 2).max(8);
    let base_cap = (params.triple_samples / 6).max(8);
    let sample_pool = |set: &SetOracle, tag: &str| -> Vec<RealVector> {
        match set.sample_near(
            &sc.xbar,
            rho,
            pool_n,
            stream_seed(seed, &[label, tag, radius_tag]),
        ) {
            Ok(v) => v,
            Err(Error::EmptySample) => Vec::new(),
            Err(_) => Vec::new(),
        }
    };
    let a_pool = sample_pool(&sc.set_a, "a");
    let b_pool = sample_pool(&sc.set_b, "b");

    let fam_bal_a = balanced_ray_candidates(
        &site,
        &sc.set_a,
        &sc.set_b,
        &a_pool,
        true,
        base_cap,
        stream_seed(seed, &[label, "bal-a", radius_tag]),
    );
    let fam_bal_b = balanced_ray_candidates(
        &site,
        &sc.set_b,
        &sc.set_a,
        &b_pool,
        false,
        base_cap,
        stream_seed(seed, &[label, "bal-b", radius_tag]),
    );
    let fam_a = ray_candidates(
        &site,
        &sc.set_a,
        &sc.set_b,
        &a_pool,
        true,
        base_cap,
        stream_seed(seed, &[label, "ray-a", radius_tag]),
    );
    let fam_b = ray_candidates(
        &site,
        &sc.set_b,
        &sc.set_a,
        &b_pool,
        false,
        base_cap,
        stream_seed(seed, &[label, "ray-b", radius_tag]),
    );
    let mut fam_mid = Vec::new();
    for (i, a) in a_pool.iter().enumerate() {
        for b in b_pool.iter().skip(i % 3).take(2) {
            if sc.set_b.distance_raw(a) <= excl || sc.set_a.distance_raw(b) <= excl {
                continue;
            }
            let x = a.add(b).scale(0.5);
            if sc.set_a.distance_raw(&x) <= excl || sc.set_b.distance_raw(&x) <= excl {
                continue;
            }
            if x.dist(&sc.xbar) > rho {
                continue;
            }
            fam_mid.push((a.clone(), b.clone(), x));
        }
    }

    let candidates = interleave(
        vec![fam_bal_a, fam_bal_b, fam_a, fam_b, fam_mid],
        params.triple_samples,
    );
    let opts = PatternSearch::new(0.2 * rho).with_iters(params.refine_iters);

    let refined: Vec<Option<TripleEval>> = candidates
        .par_iter()
        .map(|(a, b, x)| {
            let mut z = Vec::with_capacity(3 * site.dim());
            z.extend_from_slice(a.as_slice());
            z.extend_from_slice(b.as_slice());
            z.extend_from_slice(x.as_slice());
            let (zmin, _) = search::minimize(&|w: &[f64]| site.objective(w), &z, &opts);
            site.evaluate(&zmin).filter(|e| site.feasible(e))
        })
        .collect();

    let mut feasible: Vec<(usize, TripleEval)> = refined
        .into_iter()
        .enumerate()
        .filter_map(|(i, e)| e.map(|e| (i, e)))
        .collect();
    feasible.sort_by(|(i, e), (j, f)| {
        e.base
            .partial_cmp(&f.base)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(j))
    });

    Ok(feasible
        .into_iter()
        .map(|(_, e)| WitnessTriple {
            x: e.x,
            a: e.a,
            b: e.b,
            u1: e.u1,
            u2: e.u2,
            ratio_defect: e.band_defect,
            cone1_dist: e.cone1,
            cone2_dist: e.cone2,
        })
        .collect())
}

/// Per-radius witness curves for the plain ratio band, shared by the
/// intrinsic estimator and the pair harvest.
pub fn intrinsic_curves(
    sc: &PairScenario,
    params: &EstimatorParams,
    seed: u64,
) -> Result<Vec<(RadiusValue, Vec<WitnessTriple>)>> {
    curves(sc, params, seed, BandKind::Ratio, "itr")
}

fn curves(
    sc: &PairScenario,
    params: &EstimatorParams,
    seed: u64,
    band: BandKind,
    label: &str,
) -> Result<Vec<(RadiusValue, Vec<WitnessTriple>)>> {
    let mut out = Vec::new();
    for (k, rho) in params.schedule.radii().into_iter().enumerate() {
        let eta = params.schedule.eta_at(params.tol.eta0, k);
        let witnesses = witness_radius(sc, rho, eta, params, band, label, &k.to_string(), seed)?;
        let value = witnesses
            .first()
            .map_or(1.0, |w| 0.5 * w.u1.add(&w.u2).norm());
        let capped: Vec<WitnessTriple> = witnesses.into_iter().take(32).collect();
        out.push((
            RadiusValue {
                rho,
                value,
                samples: capped.len(),
            },
            capped,
        ));
    }
    Ok(out)
}

fn estimate_from_curves(
    name: ConstantName,
    curves: Vec<(RadiusValue, Vec<WitnessTriple>)>,
    seed: u64,
) -> (ConstantEstimate, Vec<WitnessTriple>) {
    let no_witness = curves.last().is_some_and(|(_, w)| w.is_empty());
    let witnesses = curves.last().map(|(_, w)| w.clone()).unwrap_or_default();
    let per_radius = curves.into_iter().map(|(rv, _)| rv).collect();
    let flags = EstimateFlags {
        no_witness,
        ..EstimateFlags::default()
    };
    (
        ConstantEstimate::from_curve(name, per_radius, seed, flags),
        witnesses,
    )
}

/// Estimates the intrinsic transversality constant; also returns the
/// feasible witness triples found at the smallest radius.
pub fn estimate_intrinsic(
    sc: &PairScenario,
    params: &EstimatorParams,
    seed: u64,
) -> Result<(ConstantEstimate, Vec<WitnessTriple>)> {
    let curves = curves(sc, params, seed, BandKind::Ratio, "itr")?;
    Ok(estimate_from_curves(ConstantName::Itr, curves, seed))
}

/// Estimates the restricted variant in which the witness point lies on the
/// bisector of its boundary pair.
pub fn estimate_strc(
    sc: &PairScenario,
    params: &EstimatorParams,
    seed: u64,
) -> Result<(ConstantEstimate, Vec<WitnessTriple>)> {
    let curves = curves(sc, params, seed, BandKind::Bisector, "strc")?;
    Ok(estimate_from_curves(ConstantName::Strc, curves, seed))
}

/// Converts feasible witness triples at one radius into relative normal
/// pairs with their defect bookkeeping.
pub fn harvest_normal_pairs(
    sc: &PairScenario,
    rho: f64,
    eta: f64,
    n: usize,
    tol: &Tolerances,
    seed: u64,
) -> Result<Vec<RelativeNormalPair>> {
    let params = EstimatorParams {
        triple_samples: n,
        tol: tol.clone(),
        ..EstimatorParams::default()
    };
    let witnesses = witness_radius(sc, rho, eta, &params, BandKind::Ratio, "harvest", "0", seed)?;
    Ok(witnesses.into_iter().map(pair_from_witness).collect())
}

/// Converts per-radius witness curves into per-radius pair lists for the
/// derived-constant computation.
pub fn pairs_at_radii(
    curves: &[(RadiusValue, Vec<WitnessTriple>)],
) -> Vec<(f64, Vec<RelativeNormalPair>)> {
    curves
        .iter()
        .map(|(rv, ws)| {
            (
                rv.rho,
                ws.iter().cloned().map(pair_from_witness).collect(),
            )
        })
        .collect()
}

pub(crate) fn pair_from_witness(w: WitnessTriple) -> RelativeNormalPair {
    let align1 = alignment_defect(&w.u1, &w.x.sub(&w.a));
    let align2 = alignment_defect(&w.u2, &w.x.sub(&w.b));
    RelativeNormalPair {
        v1: w.u1.clone(),
        v2: w.u2.clone(),
        defects: PairDefects {
            ratio: w.ratio_defect,
            align1,
            align2,
            cone1: w.cone1_dist,
            cone2: w.cone2_dist,
        },
        witness: w,
    }
}

//! Shrinking-radius sampling estimators for the transversality constants of
//! a set pair at a common point.
//!
//! Each estimator walks the radius schedule, draws candidates from its own
//! seeded substream, refines every candidate by pattern search, and records
//! one value per radius; the final estimate is the value at the smallest
//! radius. Candidate streams are prefix-stable in the sample count, so
//! enlarging a sample budget can only improve min-type values.

mod derived;
mod itrhat;
mod subtrans;
mod trans;
mod witness;

pub use derived::{derived_euclidean_constants, DerivedConstants};
pub use itrhat::estimate_itrhat;
pub use subtrans::estimate_subtransversality;
pub use trans::estimate_transversality;
pub use witness::{
    estimate_intrinsic, estimate_strc, harvest_normal_pairs, intrinsic_curves, pairs_at_radii,
};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::sets::RadiusSchedule;
use crate::vector::{RealVector, Tolerances};

/// Constants this crate can estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantName {
    Str,
    Tr,
    Itr,
    Strc,
    Itr1,
    Itr2,
    Itr3,
    ItrFromPairs,
    Itrhat1,
    Itrhat2,
}

impl ConstantName {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConstantName::Str => "str",
            ConstantName::Tr => "tr",
            ConstantName::Itr => "itr",
            ConstantName::Strc => "strc",
            ConstantName::Itr1 => "itr1",
            ConstantName::Itr2 => "itr2",
            ConstantName::Itr3 => "itr3",
            ConstantName::ItrFromPairs => "itr_from_pairs",
            ConstantName::Itrhat1 => "itrhat1",
            ConstantName::Itrhat2 => "itrhat2",
        }
    }

    /// Valid range of the constant; estimates are clamped into it.
    pub fn range(&self) -> (f64, f64) {
        match self {
            ConstantName::Itr1 => (0.0, 2.0),
            ConstantName::Itr2 => (-1.0, 1.0),
            ConstantName::Itr3 => (0.0, std::f64::consts::SQRT_2),
            _ => (0.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RadiusValue {
    pub rho: f64,
    pub value: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct EstimateFlags {
    /// No feasible witness existed at the smallest radius; the recorded value
    /// is the empty-set convention for the constant.
    pub no_witness: bool,
    /// Every candidate fell inside the intersection at every radius.
    pub degenerate: bool,
    /// Samples dropped because the intersection locator failed.
    pub skipped_samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantEstimate {
    pub name: ConstantName,
    pub per_radius: Vec<RadiusValue>,
    /// Value at the smallest radius of the schedule.
    pub value: f64,
    pub seed: u64,
    pub flags: EstimateFlags,
    /// Identifies the harvested pair list a derived constant came from.
    pub harvest_id: Option<u64>,
}

impl ConstantEstimate {
    pub fn from_curve(
        name: ConstantName,
        mut per_radius: Vec<RadiusValue>,
        seed: u64,
        flags: EstimateFlags,
    ) -> Self {
        let (lo, hi) = name.range();
        for rv in &mut per_radius {
            rv.value = rv.value.clamp(lo, hi);
        }
        let value = per_radius.last().map_or(lo, |rv| rv.value);
        Self {
            name,
            per_radius,
            value,
            seed,
            flags,
            harvest_id: None,
        }
    }

    pub fn with_harvest_id(mut self, id: u64) -> Self {
        self.harvest_id = Some(id);
        self
    }
}

/// Feasible witness of a relative normal pair: `x` outside both sets, `a` in
/// A only, `b` in B only, with unit directions `u1 = (x-a)/|x-a|`,
/// `u2 = (x-b)/|x-b|` close to the respective normal cones.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessTriple {
    pub x: RealVector,
    pub a: RealVector,
    pub b: RealVector,
    pub u1: RealVector,
    pub u2: RealVector,
    pub ratio_defect: f64,
    pub cone1_dist: f64,
    pub cone2_dist: f64,
}

/// Defect bookkeeping of a harvested pair.
#[derive(Debug, Clone, Serialize)]
pub struct PairDefects {
    pub ratio: f64,
    pub align1: f64,
    pub align2: f64,
    pub cone1: f64,
    pub cone2: f64,
}

/// Unit normal pair achieved in the limit by witness triples.
#[derive(Debug, Clone, Serialize)]
pub struct RelativeNormalPair {
    pub v1: RealVector,
    pub v2: RealVector,
    pub witness: WitnessTriple,
    pub defects: PairDefects,
}

/// Sampling and refinement budgets shared by the estimators.
#[derive(Debug, Clone, Serialize)]
pub struct EstimatorParams {
    pub schedule: RadiusSchedule,
    pub tol: Tolerances,
    /// Witness-triple candidates per radius.
    pub triple_samples: usize,
    /// Boundary pair candidates per radius for the directional estimators.
    pub pair_samples: usize,
    /// Probe points per radius for the distance-ratio estimators.
    pub point_samples: usize,
    /// Translation pairs per radius for the transversality estimator.
    pub translation_samples: usize,
    /// Pattern-search sweeps per candidate.
    pub refine_iters: usize,
    /// Cycle budget of the intersection locator.
    pub locator_cycles: usize,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        Self {
            schedule: RadiusSchedule::default(),
            tol: Tolerances::default(),
            triple_samples: 120,
            pair_samples: 120,
            point_samples: 64,
            translation_samples: 12,
            refine_iters: 60,
            locator_cycles: 400,
        }
    }
}

impl EstimatorParams {
    /// Membership guard separating a point from a set it must avoid.
    pub(crate) fn exclusion_tol(&self, scale: f64) -> f64 {
        (10.0 * self.tol.feas_tol).max(1e-12 * (1.0 + scale))
    }
}

/// Uniform sample in the annulus `r_in <= |x - center| <= r_out`.
pub(crate) fn sample_annulus<R: Rng>(
    rng: &mut R,
    center: &RealVector,
    r_in: f64,
    r_out: f64,
    n: usize,
) -> Vec<RealVector> {
    let dim = center.dim();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let Some(dir) = RealVector::from_slice(&g).normalized() else {
            continue;
        };
        let u: f64 = rng.gen();
        let d = dim as f64;
        let r = (r_in.powf(d) + u * (r_out.powf(d) - r_in.powf(d))).powf(1.0 / d);
        out.push(center.add_scaled(r, &dir));
    }
    out
}

/// Radial clamp of `x` into the annulus around `center`.
pub(crate) fn clamp_annulus(
    center: &RealVector,
    r_in: f64,
    r_out: f64,
    x: &RealVector,
) -> RealVector {
    let rel = x.sub(center);
    let r = rel.norm();
    if r >= r_in && r <= r_out {
        return x.clone();
    }
    if r <= 1e-300 {
        return center.add_scaled(r_in, &RealVector::basis(center.dim(), 0));
    }
    let target = r.clamp(r_in, r_out);
    center.add_scaled(target / r, &rel)
}

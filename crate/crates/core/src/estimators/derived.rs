//! Constants derived from a harvested list of relative normal pairs:
//! extremal combinations of the pair directions and the distance from the
//! antipodal diagonal to the cone the pairs generate.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::vector::RealVector;

use super::{
    ConstantEstimate, ConstantName, EstimateFlags, RadiusValue, RelativeNormalPair,
};

/// Estimates computed from the same harvest, tagged with its id.
#[derive(Debug, Clone)]
pub struct DerivedConstants {
    pub itr1: ConstantEstimate,
    pub itr2: ConstantEstimate,
    pub itr3: ConstantEstimate,
    pub itr_from_pairs: ConstantEstimate,
    /// Some harvested pair is positively independent (`v1 + v2` not tiny).
    pub positively_independent: bool,
}

fn check_unit(pairs: &[RelativeNormalPair]) -> Result<()> {
    for p in pairs {
        for v in [&p.v1, &p.v2] {
            let n = v.norm();
            if (n - 1.0).abs() > 1e-6 {
                return Err(Error::NonUnitPair { norm: n });
            }
        }
    }
    Ok(())
}

/// Squared distance from the ray through `g` to the unit vector `v`:
/// `1 - (<v,g>_+)^2` for unit inputs.
fn ray_gap_sq(v: &RealVector, g: &RealVector) -> f64 {
    let c = v.dot(g).max(0.0);
    (1.0 - c * c).max(0.0)
}

/// Distance from the antipodal point `(v, -v)` to the cone generated by
/// `(v1, 0)` and `(0, v2)` ray scalings, minimized over pairs.
fn diagonal_gap(v: &RealVector, pairs: &[RelativeNormalPair]) -> f64 {
    let neg = v.scale(-1.0);
    let mut best = f64::INFINITY;
    for p in pairs {
        let d2 = ray_gap_sq(v, &p.v1) + ray_gap_sq(&neg, &p.v2);
        best = best.min(d2);
    }
    best.sqrt()
}

fn mesh_directions(dim: usize, seed: u64) -> Vec<RealVector> {
    match dim {
        1 => vec![
            RealVector::from_slice(&[1.0]),
            RealVector::from_slice(&[-1.0]),
        ],
        2 => (0..1024)
            .map(|i| {
                let phi = 2.0 * std::f64::consts::PI * (i as f64) / 1024.0;
                RealVector::from_slice(&[phi.cos(), phi.sin()])
            })
            .collect(),
        3 => {
            let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
            (0..1024)
                .map(|i| {
                    let t = (i as f64 + 0.5) / 1024.0;
                    let z = 1.0 - 2.0 * t;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = 2.0 * std::f64::consts::PI * (i as f64) / golden;
                    RealVector::from_slice(&[r * phi.cos(), r * phi.sin(), z])
                })
                .collect()
        }
        _ => {
            let mut rng = stream_rng(seed, &["itr3-mesh"]);
            let mut out = Vec::with_capacity(2048);
            while out.len() < 2048 {
                let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
                if let Some(u) = RealVector::from_slice(&g).normalized() {
                    out.push(u);
                }
            }
            out
        }
    }
}

fn itr3_at(pairs: &[RelativeNormalPair], mesh: &[RealVector]) -> f64 {
    if pairs.is_empty() {
        return std::f64::consts::SQRT_2;
    }
    let mut best = f64::INFINITY;
    // The bisector of (v1, -v2) attains the per-pair minimum whenever the
    // pair is not positively dependent; the mesh covers the rest.
    for p in pairs {
        if let Some(bis) = p.v1.sub(&p.v2).normalized() {
            best = best.min(diagonal_gap(&bis, pairs));
        }
        best = best.min(diagonal_gap(&p.v1, pairs));
    }
    for v in mesh {
        best = best.min(diagonal_gap(v, pairs));
    }
    best
}

/// Computes the pairwise-derived constants on each radius of a harvest.
///
/// `curves` holds one `(rho, pairs)` entry per radius, largest radius first.
/// An empty harvest at a radius records the empty-set conventions: 0 for the
/// maximal gap, -1 for the negated inner product, sqrt(2) for the diagonal
/// distance, and 1 for the pairwise minimum.
pub fn derived_euclidean_constants(
    curves: &[(f64, Vec<RelativeNormalPair>)],
    dim: usize,
    seed: u64,
) -> Result<DerivedConstants> {
    let mesh = mesh_directions(dim, seed);
    let mut c1 = Vec::new();
    let mut c2 = Vec::new();
    let mut c3 = Vec::new();
    let mut cp = Vec::new();

    for (rho, pairs) in curves {
        check_unit(pairs)?;
        let samples = pairs.len();
        let (v1, v2, vp) = if pairs.is_empty() {
            (0.0, -1.0, 1.0)
        } else {
            let gap = pairs
                .iter()
                .map(|p| p.v1.sub(&p.v2).norm())
                .fold(f64::NEG_INFINITY, f64::max);
            let inner = pairs
                .iter()
                .map(|p| p.v1.dot(&p.v2))
                .fold(f64::INFINITY, f64::min);
            let sum = pairs
                .iter()
                .map(|p| p.v1.add(&p.v2).norm())
                .fold(f64::INFINITY, f64::min);
            (gap, -inner, 0.5 * sum)
        };
        let v3 = itr3_at(pairs, &mesh);
        c1.push(RadiusValue {
            rho: *rho,
            value: v1,
            samples,
        });
        c2.push(RadiusValue {
            rho: *rho,
            value: v2,
            samples,
        });
        c3.push(RadiusValue {
            rho: *rho,
            value: v3,
            samples,
        });
        cp.push(RadiusValue {
            rho: *rho,
            value: vp,
            samples,
        });
    }

    let positively_independent = curves
        .last()
        .map(|(_, pairs)| pairs.iter().any(|p| p.v1.add(&p.v2).norm() > 1e-9))
        .unwrap_or(false);
    let empty_last = curves.last().map(|(_, p)| p.is_empty()).unwrap_or(true);
    let flags = EstimateFlags {
        no_witness: empty_last,
        ..EstimateFlags::default()
    };

    let build = |name, curve| ConstantEstimate::from_curve(name, curve, seed, flags.clone());
    Ok(DerivedConstants {
        itr1: build(ConstantName::Itr1, c1),
        itr2: build(ConstantName::Itr2, c2),
        itr3: build(ConstantName::Itr3, c3),
        itr_from_pairs: build(ConstantName::ItrFromPairs, cp),
        positively_independent,
    })
}

//! Alternating projections between a set pair, with trace capture, stall
//! detection, and linear-rate fitting on the trace.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scenario::PairScenario;
use crate::sets::SetOracle;
use crate::vector::RealVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Termination {
    Converged,
    Stalled,
    BudgetExhausted,
}

/// One recorded iterate. `half_step` is 0 at the start, 1 after projecting
/// onto B, 2 after projecting onto A.
#[derive(Debug, Clone, Serialize)]
pub struct TracePoint {
    pub cycle: usize,
    pub half_step: u8,
    pub x: RealVector,
    pub dist_a: f64,
    pub dist_b: f64,
    pub dist_inter: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct APTrace {
    pub points: Vec<TracePoint>,
    pub cycles: usize,
    pub termination: Termination,
}

impl APTrace {
    /// Distance to the intersection at the end of each full cycle,
    /// starting with the initial point as cycle zero.
    pub fn cycle_end_distances(&self) -> Vec<f64> {
        self.points
            .iter()
            .filter(|p| p.half_step == 0 || p.half_step == 2)
            .map(|p| p.dist_inter)
            .collect()
    }

    /// The recorded point of a given cycle and half step, if present.
    pub fn cycle_point(&self, cycle: usize, half_step: u8) -> Option<&TracePoint> {
        self.points
            .iter()
            .find(|p| p.cycle == cycle && p.half_step == half_step)
    }
}

/// Stationary period-two pair of a stalled run.
#[derive(Debug, Clone, Serialize)]
pub struct StallInfo {
    pub point_a: RealVector,
    pub point_b: RealVector,
    pub gap: f64,
}

/// Runs cycles of project-onto-B then project-onto-A from `x0`.
pub fn run_alternating_projections(
    scenario: &PairScenario,
    x0: &RealVector,
    max_cycles: usize,
    tol: f64,
) -> Result<APTrace> {
    x0.check_dim(scenario.dimension)?;
    if max_cycles == 0 || !(tol > 0.0) {
        return Err(Error::Parse("need max_cycles >= 1 and tol > 0".into()));
    }
    let record = |points: &mut Vec<TracePoint>, cycle: usize, half_step: u8, x: &RealVector| {
        points.push(TracePoint {
            cycle,
            half_step,
            x: x.clone(),
            dist_a: scenario.set_a.distance_raw(x),
            dist_b: scenario.set_b.distance_raw(x),
            dist_inter: scenario.intersection.distance_raw(x),
        });
    };

    let mut points = Vec::new();
    record(&mut points, 0, 0, x0);
    if points[0].dist_inter <= tol {
        return Ok(APTrace {
            points,
            cycles: 0,
            termination: Termination::Converged,
        });
    }

    let mut x = x0.clone();
    let mut prev_pair: Option<(RealVector, RealVector)> = None;
    for cycle in 1..=max_cycles {
        let (y, _) = scenario.set_b.project_raw(&x);
        record(&mut points, cycle, 1, &y);
        let (z, _) = scenario.set_a.project_raw(&y);
        record(&mut points, cycle, 2, &z);
        let dist_inter = points.last().expect("just recorded").dist_inter;
        if dist_inter <= tol {
            return Ok(APTrace {
                points,
                cycles: cycle,
                termination: Termination::Converged,
            });
        }
        if let Some((pz, py)) = &prev_pair {
            // Slow linear convergence also has cycle movement below tol just
            // before the distance does; a genuine stall repeats a pair whose
            // gap dwarfs the movement, so demand a clear separation.
            if z.dist(pz) <= tol && y.dist(py) <= tol && dist_inter > 100.0 * tol {
                return Ok(APTrace {
                    points,
                    cycles: cycle,
                    termination: Termination::Stalled,
                });
            }
        }
        prev_pair = Some((z.clone(), y.clone()));
        x = z;
    }
    Ok(APTrace {
        points,
        cycles: max_cycles,
        termination: Termination::BudgetExhausted,
    })
}

/// Finds a stationary period-two pair: consecutive cycles repeating within
/// `tol` while the intersection stays farther than `tol` away.
pub fn detect_stall(trace: &APTrace, tol: f64) -> Option<StallInfo> {
    for cycle in 2..=trace.cycles {
        let z = trace.cycle_point(cycle, 2)?;
        let y = trace.cycle_point(cycle, 1)?;
        let pz = trace.cycle_point(cycle - 1, 2)?;
        let py = trace.cycle_point(cycle - 1, 1)?;
        if z.x.dist(&pz.x) <= tol && y.x.dist(&py.x) <= tol && z.dist_inter > tol {
            return Some(StallInfo {
                point_a: z.x.clone(),
                point_b: y.x.clone(),
                gap: z.x.dist(&y.x),
            });
        }
    }
    None
}

/// Least-squares linear rate of the trailing window: `dist ~ alpha * rate^k`.
#[derive(Debug, Clone, Serialize)]
pub struct RateFit {
    pub rate_per_cycle: f64,
    pub rate_per_half_step: f64,
    pub alpha_coeff: f64,
    pub quality: f64,
    pub window: usize,
}

pub fn fit_linear_rate(trace: &APTrace, window: usize) -> Result<RateFit> {
    if window < 2 {
        return Err(Error::Parse("rate window must be at least 2".into()));
    }
    if trace.termination == Termination::Stalled {
        return Err(Error::NoDecay {
            reason: "trace stalled at a positive gap".into(),
        });
    }
    let ds = trace.cycle_end_distances();
    if ds.len() < window + 2 {
        return Err(Error::NoDecay {
            reason: format!("trace has {} cycle distances, need {}", ds.len(), window + 2),
        });
    }
    let tail = &ds[ds.len() - window..];
    if tail.iter().any(|&d| d <= 0.0) {
        return Err(Error::NoDecay {
            reason: "windowed distance reaches zero".into(),
        });
    }
    let k0 = (ds.len() - window) as f64;
    let xs: Vec<f64> = (0..window).map(|i| k0 + i as f64).collect();
    let ys: Vec<f64> = tail.iter().map(|d| d.ln()).collect();
    let n = window as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res = ys
        .iter()
        .zip(&xs)
        .map(|(y, x)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum::<f64>();
    let quality = if syy <= 1e-300 {
        1.0
    } else {
        (1.0 - ss_res / syy).max(0.0)
    };
    let rate = slope.exp();
    Ok(RateFit {
        rate_per_cycle: rate,
        rate_per_half_step: rate.sqrt(),
        alpha_coeff: intercept.exp(),
        quality,
        window,
    })
}

/// Outcome of probing a set pair's intersection by alternating projections.
#[derive(Debug, Clone)]
pub enum LocateOutcome {
    Point(RealVector),
    EmptyCertificate,
    Failed,
}

/// Locates a point of `A` intersected with `B` near `start`, or certifies the
/// intersection empty in the probed region when the iteration goes stationary
/// at a positive gap, or when the gap itself stabilizes at a positive level
/// while the iterates are still sliding.
pub fn locate_intersection(
    set_a: &SetOracle,
    set_b: &SetOracle,
    start: &RealVector,
    max_cycles: usize,
    tol: f64,
) -> LocateOutcome {
    // A pair that touches keeps shrinking its gap at a relative rate of order
    // 1/cycle, so a gap flat to within 1e-9 over this window cannot belong to
    // an intersecting pair that is merely converging slowly.
    const GAP_WINDOW: usize = 30;
    let mut x = start.clone();
    let mut prev_pair: Option<(RealVector, RealVector)> = None;
    let mut gaps: Vec<f64> = Vec::new();
    for _ in 0..max_cycles {
        let (y, _) = set_b.project_raw(&x);
        let (z, _) = set_a.project_raw(&y);
        let gap = set_b.distance_raw(&z);
        if gap <= tol {
            return LocateOutcome::Point(z);
        }
        if let Some((pz, py)) = &prev_pair {
            if z.dist(pz) <= tol && y.dist(py) <= tol {
                if gap > 100.0 * tol {
                    return LocateOutcome::EmptyCertificate;
                }
                return LocateOutcome::Failed;
            }
        }
        gaps.push(gap);
        if gaps.len() >= GAP_WINDOW {
            let w = &gaps[gaps.len() - GAP_WINDOW..];
            let lo = w.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = w.iter().cloned().fold(0.0f64, f64::max);
            if lo > 100.0 * tol && hi - lo <= 1e-9 * lo {
                return LocateOutcome::EmptyCertificate;
            }
        }
        prev_pair = Some((z.clone(), y.clone()));
        x = z;
    }
    LocateOutcome::Failed
}

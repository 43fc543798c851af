//! Scenario files: a pair of sets, a common point, and an intersection oracle.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sets::{HalfSpaceCut, SetKind, SetOracle};
use crate::vector::{RealVector, Tolerances};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairScenario {
    pub dimension: usize,
    pub set_a: SetOracle,
    pub set_b: SetOracle,
    pub xbar: RealVector,
    pub intersection: SetOracle,
    pub seed: u64,
    #[serde(skip)]
    pub label: String,
}

/// One structural validation row for a scenario.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioCheck {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl PairScenario {
    pub fn new(
        label: &str,
        set_a: SetOracle,
        set_b: SetOracle,
        xbar: RealVector,
        intersection: SetOracle,
        seed: u64,
    ) -> Result<Self> {
        let dimension = xbar.dim();
        Ok(Self {
            dimension,
            set_a: set_a.validated(dimension)?,
            set_b: set_b.validated(dimension)?,
            xbar,
            intersection: intersection.validated(dimension)?,
            seed,
            label: label.to_string(),
        })
    }

    fn structurally_checked(mut self, label: &str) -> Result<Self> {
        if self.dimension == 0 {
            return Err(Error::Parse("dimension must be positive".into()));
        }
        self.xbar.check_dim(self.dimension)?;
        self.set_a = self.set_a.validated(self.dimension)?;
        self.set_b = self.set_b.validated(self.dimension)?;
        self.intersection = self.intersection.validated(self.dimension)?;
        self.label = label.to_string();
        Ok(self)
    }

    pub fn is_convex(&self) -> bool {
        self.set_a.is_convex() && self.set_b.is_convex()
    }

    /// Membership and consistency checks; failures are reported, not fatal,
    /// so a corrupted scenario still produces a full report.
    pub fn validate(&self, tol: &Tolerances) -> Vec<ScenarioCheck> {
        let near = 10.0 * tol.feas_tol;
        let mut rows = Vec::new();
        let mut push = |name: &str, value: f64, bound: f64| {
            rows.push(ScenarioCheck {
                name: name.to_string(),
                value,
                bound,
                pass: value <= bound,
            });
        };
        push(
            "scenario-xbar-in-set-a",
            self.set_a.distance_raw(&self.xbar),
            near,
        );
        push(
            "scenario-xbar-in-set-b",
            self.set_b.distance_raw(&self.xbar),
            near,
        );
        push(
            "scenario-xbar-in-intersection",
            self.intersection.distance_raw(&self.xbar),
            near,
        );
        let rho = 0.05 * (1.0 + self.xbar.norm());
        let worst = match self.intersection.sample_near(&self.xbar, rho, 16, self.seed) {
            Ok(points) => points
                .iter()
                .map(|p| self.set_a.distance_raw(p).max(self.set_b.distance_raw(p)))
                .fold(0.0, f64::max),
            Err(_) => 0.0,
        };
        push("scenario-intersection-consistency", worst, near);
        rows
    }
}

pub fn load_scenario(path: &Path) -> Result<PairScenario> {
    let text = std::fs::read_to_string(path)?;
    let parsed: PairScenario =
        serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "scenario".to_string());
    parsed.structurally_checked(&label)
}

/// JSON formatter printing every real with 17 significant digits.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{:.16e}", value)
    }
}

pub fn save_scenario(path: &Path, scenario: &PairScenario) -> Result<()> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    scenario
        .serialize(&mut ser)
        .map_err(|e| Error::Parse(e.to_string()))?;
    buf.push(b'\n');
    std::fs::write(path, buf)?;
    Ok(())
}

fn axis_line() -> SetOracle {
    SetOracle::with_label(
        SetKind::AffineSubspace {
            point: RealVector::zeros(2),
            basis: vec![RealVector::from_slice(&[1.0, 0.0])],
        },
        "horizontal-axis",
    )
}

fn origin_point_set() -> SetOracle {
    SetOracle::new(SetKind::PointSet {
        points: vec![RealVector::zeros(2)],
    })
}

/// Two lines through the origin meeting at `theta`.
pub fn two_lines(label: &str, theta: f64, seed: u64) -> PairScenario {
    let b = SetOracle::with_label(
        SetKind::AffineSubspace {
            point: RealVector::zeros(2),
            basis: vec![RealVector::from_slice(&[theta.cos(), theta.sin()])],
        },
        "line-at-angle",
    );
    PairScenario::new(label, axis_line(), b, RealVector::zeros(2), origin_point_set(), seed)
        .expect("catalog scenario is well formed")
}

/// Two half-planes whose boundary lines cross at `theta`.
pub fn half_planes(label: &str, theta: f64, seed: u64) -> PairScenario {
    let a = SetOracle::new(SetKind::HalfSpace {
        normal: RealVector::from_slice(&[0.0, 1.0]),
        offset: 0.0,
    });
    let n2 = RealVector::from_slice(&[-theta.sin(), -theta.cos()]);
    let b = SetOracle::new(SetKind::HalfSpace {
        normal: n2.clone(),
        offset: 0.0,
    });
    let inter = SetOracle::new(SetKind::ConvexPolyhedron {
        halfspaces: vec![
            HalfSpaceCut {
                normal: RealVector::from_slice(&[0.0, 1.0]),
                offset: 0.0,
            },
            HalfSpaceCut {
                normal: n2,
                offset: 0.0,
            },
        ],
    });
    PairScenario::new(label, a, b, RealVector::zeros(2), inter, seed)
        .expect("catalog scenario is well formed")
}

/// Unit ball tangent to the horizontal axis at the origin.
pub fn tangential_ball_line(seed: u64) -> PairScenario {
    let a = SetOracle::new(SetKind::Ball {
        center: RealVector::from_slice(&[0.0, 1.0]),
        radius: 1.0,
    });
    PairScenario::new(
        "tangential-ball-line",
        a,
        axis_line(),
        RealVector::zeros(2),
        origin_point_set(),
        seed,
    )
    .expect("catalog scenario is well formed")
}

/// A singleton contained in the whole plane.
pub fn nested_point_in_plane(seed: u64) -> PairScenario {
    let b = SetOracle::new(SetKind::AffineSubspace {
        point: RealVector::zeros(2),
        basis: vec![
            RealVector::from_slice(&[1.0, 0.0]),
            RealVector::from_slice(&[0.0, 1.0]),
        ],
    });
    PairScenario::new(
        "nested-point-in-plane",
        origin_point_set(),
        b,
        RealVector::zeros(2),
        origin_point_set(),
        seed,
    )
    .expect("catalog scenario is well formed")
}

pub fn identical_half_planes(seed: u64) -> PairScenario {
    let h = SetOracle::new(SetKind::HalfSpace {
        normal: RealVector::from_slice(&[0.0, 1.0]),
        offset: 0.0,
    });
    PairScenario::new(
        "identical-half-planes",
        h.clone(),
        h.clone(),
        RealVector::zeros(2),
        h,
        seed,
    )
    .expect("catalog scenario is well formed")
}

pub fn coincident_lines(seed: u64) -> PairScenario {
    PairScenario::new(
        "coincident-lines",
        axis_line(),
        axis_line(),
        RealVector::zeros(2),
        axis_line(),
        seed,
    )
    .expect("catalog scenario is well formed")
}

/// Horizontal line at height one plus an isolated origin point, against the
/// axis. Subtransversal at the origin, yet alternating projections started
/// at height one stall in a period-two pair far from the intersection.
pub fn stall_line_and_point(seed: u64) -> PairScenario {
    let a = SetOracle::with_label(
        SetKind::FiniteUnion {
            members: vec![
                SetOracle::new(SetKind::AffineSubspace {
                    point: RealVector::from_slice(&[0.0, 1.0]),
                    basis: vec![RealVector::from_slice(&[1.0, 0.0])],
                }),
                origin_point_set(),
            ],
        },
        "line-and-point",
    );
    PairScenario::new(
        "stall-line-and-point",
        a,
        axis_line(),
        RealVector::zeros(2),
        origin_point_set(),
        seed,
    )
    .expect("catalog scenario is well formed")
}

/// The canonical scenario battery shipped with the repository.
pub fn battery(seed: u64) -> Vec<PairScenario> {
    let pi = std::f64::consts::PI;
    vec![
        two_lines("two-lines-pi-over-6", pi / 6.0, seed),
        two_lines("two-lines-pi-over-3", pi / 3.0, seed),
        two_lines("two-lines-pi-over-2", pi / 2.0, seed),
        half_planes("half-planes-pi-over-3", pi / 3.0, seed),
        tangential_ball_line(seed),
        nested_point_in_plane(seed),
        identical_half_planes(seed),
        coincident_lines(seed),
        stall_line_and_point(seed),
    ]
}

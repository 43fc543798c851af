//! Set oracles: projection, membership, and seeded sampling near a point.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::vector::RealVector;

/// One linear inequality `<normal, x> <= offset` with unit normal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HalfSpaceCut {
    pub normal: RealVector,
    pub offset: f64,
}

/// Closed subset of `R^n` described by closed-form projection data.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetKind {
    /// `point + span(basis)` with orthonormal basis; an empty basis is a point,
    /// a full basis is the whole space.
    AffineSubspace {
        point: RealVector,
        basis: Vec<RealVector>,
    },
    HalfSpace { normal: RealVector, offset: f64 },
    Ball { center: RealVector, radius: f64 },
    Sphere { center: RealVector, radius: f64 },
    ConvexPolyhedron { halfspaces: Vec<HalfSpaceCut> },
    FiniteUnion { members: Vec<SetOracle> },
    PointSet { points: Vec<RealVector> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetOracle {
    #[serde(flatten)]
    pub kind: SetKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// Orthonormalizes `vectors` by Gram-Schmidt, dropping dependent ones.
pub(crate) fn gram_schmidt(vectors: &[RealVector], dim: usize) -> Vec<RealVector> {
    let mut out: Vec<RealVector> = Vec::new();
    for v in vectors {
        debug_assert_eq!(v.dim(), dim);
        let mut w = v.clone();
        for b in &out {
            w = w.add_scaled(-w.dot(b), b);
        }
        let n = w.norm();
        if n > 1e-12 {
            out.push(w.scale(1.0 / n));
        }
    }
    out
}

/// Extends to an orthonormal basis of the orthogonal complement of `span(basis)`.
pub(crate) fn orthonormal_complement(basis: &[RealVector], dim: usize) -> Vec<RealVector> {
    let mut frame = basis.to_vec();
    let mut out = Vec::new();
    for i in 0..dim {
        let e = RealVector::basis(dim, i);
        let mut w = e;
        for b in &frame {
            w = w.add_scaled(-w.dot(b), b);
        }
        let n = w.norm();
        if n > 1e-9 {
            let u = w.scale(1.0 / n);
            frame.push(u.clone());
            out.push(u);
        }
    }
    out
}

fn project_halfspace(normal: &RealVector, offset: f64, x: &RealVector) -> (RealVector, f64) {
    let slack = x.dot(normal) - offset;
    if slack <= 0.0 {
        (x.clone(), 0.0)
    } else {
        (x.add_scaled(-slack, normal), slack)
    }
}

/// Dykstra's cyclic projection scheme; exact in the limit for intersections
/// of convex sets, stopped once a full cycle moves less than `tol`.
fn project_polyhedron(cuts: &[HalfSpaceCut], x: &RealVector, tol: f64) -> (RealVector, f64) {
    if cuts
        .iter()
        .all(|c| x.dot(&c.normal) - c.offset <= 0.0)
    {
        return (x.clone(), 0.0);
    }
    let mut p = x.clone();
    let mut corrections: Vec<RealVector> = vec![RealVector::zeros(x.dim()); cuts.len()];
    let max_cycles = 20_000;
    for _ in 0..max_cycles {
        let mut moved = 0.0_f64;
        for (i, cut) in cuts.iter().enumerate() {
            let y = p.add(&corrections[i]);
            let (q, _) = project_halfspace(&cut.normal, cut.offset, &y);
            corrections[i] = y.sub(&q);
            moved = moved.max(p.dist(&q));
            p = q;
        }
        if moved <= tol {
            break;
        }
    }
    let d = p.dist(x);
    (p, d)
}

impl SetOracle {
    pub fn new(kind: SetKind) -> Self {
        Self { kind, label: None }
    }

    pub fn with_label(kind: SetKind, label: &str) -> Self {
        Self {
            kind,
            label: Some(label.to_string()),
        }
    }

    /// Ambient dimension inferred from the stored data.
    pub fn dim(&self) -> usize {
        match &self.kind {
            SetKind::AffineSubspace { point, .. } => point.dim(),
            SetKind::HalfSpace { normal, .. } => normal.dim(),
            SetKind::Ball { center, .. } | SetKind::Sphere { center, .. } => center.dim(),
            SetKind::ConvexPolyhedron { halfspaces } => {
                halfspaces.first().map_or(0, |c| c.normal.dim())
            }
            SetKind::FiniteUnion { members } => members.first().map_or(0, |m| m.dim()),
            SetKind::PointSet { points } => points.first().map_or(0, |p| p.dim()),
        }
    }

    /// Checks structural invariants and normalizes stored directions
    /// (unit half-space normals, orthonormal affine bases).
    pub fn validated(mut self, dim: usize) -> Result<Self> {
        match &mut self.kind {
            SetKind::AffineSubspace { point, basis } => {
                point.check_dim(dim)?;
                for b in basis.iter() {
                    b.check_dim(dim)?;
                }
                *basis = gram_schmidt(basis, dim);
            }
            SetKind::HalfSpace { normal, offset } => {
                normal.check_dim(dim)?;
                if !offset.is_finite() {
                    return Err(Error::NonFiniteInput);
                }
                let n = normal.norm();
                if n <= 1e-12 {
                    return Err(Error::Parse("half-space normal must be nonzero".into()));
                }
                *offset /= n;
                *normal = normal.scale(1.0 / n);
            }
            SetKind::Ball { center, radius } | SetKind::Sphere { center, radius } => {
                center.check_dim(dim)?;
                if !radius.is_finite() || *radius <= 0.0 {
                    return Err(Error::Parse("radius must be positive".into()));
                }
            }
            SetKind::ConvexPolyhedron { halfspaces } => {
                if halfspaces.is_empty() {
                    return Err(Error::Parse("polyhedron needs at least one half-space".into()));
                }
                for cut in halfspaces.iter_mut() {
                    cut.normal.check_dim(dim)?;
                    if !cut.offset.is_finite() {
                        return Err(Error::NonFiniteInput);
                    }
                    let n = cut.normal.norm();
                    if n <= 1e-12 {
                        return Err(Error::Parse("polyhedron normal must be nonzero".into()));
                    }
                    cut.offset /= n;
                    cut.normal = cut.normal.scale(1.0 / n);
                }
            }
            SetKind::FiniteUnion { members } => {
                if members.is_empty() {
                    return Err(Error::Parse("union needs at least one member".into()));
                }
                let mut validated = Vec::with_capacity(members.len());
                for m in members.drain(..) {
                    validated.push(m.validated(dim)?);
                }
                *members = validated;
            }
            SetKind::PointSet { points } => {
                if points.is_empty() {
                    return Err(Error::Parse("point set needs at least one point".into()));
                }
                for p in points.iter() {
                    p.check_dim(dim)?;
                }
            }
        }
        Ok(self)
    }

    pub fn is_convex(&self) -> bool {
        match &self.kind {
            SetKind::AffineSubspace { .. }
            | SetKind::HalfSpace { .. }
            | SetKind::Ball { .. }
            | SetKind::ConvexPolyhedron { .. } => true,
            SetKind::Sphere { .. } => false,
            SetKind::FiniteUnion { members } => members.len() == 1 && members[0].is_convex(),
            SetKind::PointSet { points } => points.len() == 1,
        }
    }

    /// The set shifted by `shift`: `{ s + shift : s in set }`.
    pub fn translate(&self, shift: &RealVector) -> SetOracle {
        let kind = match &self.kind {
            SetKind::AffineSubspace { point, basis } => SetKind::AffineSubspace {
                point: point.add(shift),
                basis: basis.clone(),
            },
            SetKind::HalfSpace { normal, offset } => SetKind::HalfSpace {
                normal: normal.clone(),
                offset: offset + normal.dot(shift),
            },
            SetKind::Ball { center, radius } => SetKind::Ball {
                center: center.add(shift),
                radius: *radius,
            },
            SetKind::Sphere { center, radius } => SetKind::Sphere {
                center: center.add(shift),
                radius: *radius,
            },
            SetKind::ConvexPolyhedron { halfspaces } => SetKind::ConvexPolyhedron {
                halfspaces: halfspaces
                    .iter()
                    .map(|c| HalfSpaceCut {
                        normal: c.normal.clone(),
                        offset: c.offset + c.normal.dot(shift),
                    })
                    .collect(),
            },
            SetKind::FiniteUnion { members } => SetKind::FiniteUnion {
                members: members.iter().map(|m| m.translate(shift)).collect(),
            },
            SetKind::PointSet { points } => SetKind::PointSet {
                points: points.iter().map(|p| p.add(shift)).collect(),
            },
        };
        SetOracle {
            kind,
            label: self.label.clone(),
        }
    }

    /// Nearest point of the set and its distance. Ties inside a union resolve
    /// to the member with the smallest index; equidistant points of a point
    /// set resolve to the smallest point index.
    pub fn project(&self, x: &RealVector) -> Result<(RealVector, f64)> {
        x.check_dim(self.dim())?;
        Ok(self.project_raw(x))
    }

    pub(crate) fn project_raw(&self, x: &RealVector) -> (RealVector, f64) {
        match &self.kind {
            SetKind::AffineSubspace { point, basis } => {
                let rel = x.sub(point);
                let mut p = point.clone();
                for b in basis {
                    p = p.add_scaled(rel.dot(b), b);
                }
                let d = p.dist(x);
                (p, d)
            }
            SetKind::HalfSpace { normal, offset } => project_halfspace(normal, *offset, x),
            SetKind::Ball { center, radius } => {
                let rel = x.sub(center);
                let n = rel.norm();
                if n <= *radius {
                    (x.clone(), 0.0)
                } else {
                    (center.add_scaled(*radius / n, &rel), n - radius)
                }
            }
            SetKind::Sphere { center, radius } => {
                let rel = x.sub(center);
                let n = rel.norm();
                if n <= 1e-300 {
                    // Center is equidistant from the whole sphere; pick the
                    // first-axis point deterministically.
                    let p = center.add_scaled(*radius, &RealVector::basis(x.dim(), 0));
                    (p, *radius)
                } else {
                    (center.add_scaled(*radius / n, &rel), (n - radius).abs())
                }
            }
            SetKind::ConvexPolyhedron { halfspaces } => project_polyhedron(halfspaces, x, 1e-12),
            SetKind::FiniteUnion { members } => {
                let mut best: Option<(RealVector, f64)> = None;
                for m in members {
                    let (p, d) = m.project_raw(x);
                    match &best {
                        Some((_, bd)) if d >= *bd => {}
                        _ => best = Some((p, d)),
                    }
                }
                best.expect("validated union is nonempty")
            }
            SetKind::PointSet { points } => {
                let mut best: Option<(RealVector, f64)> = None;
                for p in points {
                    let d = p.dist(x);
                    match &best {
                        Some((_, bd)) if d >= *bd => {}
                        _ => best = Some((p.clone(), d)),
                    }
                }
                best.expect("validated point set is nonempty")
            }
        }
    }

    pub fn distance(&self, x: &RealVector) -> Result<f64> {
        x.check_dim(self.dim())?;
        Ok(self.distance_raw(x))
    }

    pub(crate) fn distance_raw(&self, x: &RealVector) -> f64 {
        match &self.kind {
            SetKind::HalfSpace { normal, offset } => (x.dot(normal) - offset).max(0.0),
            SetKind::Ball { center, radius } => (x.dist(center) - radius).max(0.0),
            SetKind::Sphere { center, radius } => (x.dist(center) - radius).abs(),
            SetKind::FiniteUnion { members } => members
                .iter()
                .map(|m| m.distance_raw(x))
                .fold(f64::INFINITY, f64::min),
            SetKind::PointSet { points } => points
                .iter()
                .map(|p| p.dist(x))
                .fold(f64::INFINITY, f64::min),
            _ => self.project_raw(x).1,
        }
    }

    pub fn contains(&self, x: &RealVector, tol: f64) -> Result<bool> {
        Ok(self.distance(x)? <= tol)
    }

    /// Up to `n` set points within `rho` of `center`, generated by projecting
    /// uniform ball samples onto the set and filtering. The sampling ball is
    /// slightly inflated so that boundary points outside the set project in.
    pub fn sample_near(
        &self,
        center: &RealVector,
        rho: f64,
        n: usize,
        seed: u64,
    ) -> Result<Vec<RealVector>> {
        center.check_dim(self.dim())?;
        if !(rho > 0.0) || n == 0 {
            return Err(Error::Parse("sampling needs rho > 0 and n > 0".into()));
        }
        let mut rng = stream_rng(seed, &["sample_set_near"]);
        let dim = self.dim();
        let mut out = Vec::with_capacity(n);
        let max_attempts = 64 * n;
        for _ in 0..max_attempts {
            if out.len() >= n {
                break;
            }
            let dir = loop {
                let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
                let v = RealVector::from_slice(&g);
                if let Some(u) = v.normalized() {
                    break u;
                }
            };
            let u: f64 = rng.gen();
            let r = 1.5 * rho * u.powf(1.0 / dim as f64);
            let probe = center.add_scaled(r, &dir);
            let (p, _) = self.project_raw(&probe);
            if p.dist(center) <= rho {
                out.push(p);
            }
        }
        if out.is_empty() {
            return Err(Error::EmptySample);
        }
        Ok(out)
    }
}

/// Geometric sequence of sampling radii `rho0 * gamma^k`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RadiusSchedule {
    pub rho0: f64,
    pub gamma: f64,
    pub steps: usize,
}

impl RadiusSchedule {
    pub fn new(rho0: f64, gamma: f64, steps: usize) -> Result<Self> {
        if !(rho0 > 0.0) || !(gamma > 0.0 && gamma < 1.0) || steps == 0 {
            return Err(Error::Parse(
                "radius schedule needs rho0 > 0, 0 < gamma < 1, steps >= 1".into(),
            ));
        }
        Ok(Self { rho0, gamma, steps })
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.steps)
            .map(|k| self.rho0 * self.gamma.powi(k as i32))
            .collect()
    }

    /// Relaxation at step `k`, proportional to the radius: `eta0 * gamma^k`.
    pub fn eta_at(&self, eta0: f64, k: usize) -> f64 {
        eta0 * self.gamma.powi(k as i32)
    }

    pub fn eta_min(&self, eta0: f64) -> f64 {
        self.eta_at(eta0, self.steps - 1)
    }
}

impl Default for RadiusSchedule {
    fn default() -> Self {
        Self {
            rho0: 0.1,
            gamma: 0.5,
            steps: 4,
        }
    }
}

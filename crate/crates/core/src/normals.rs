//! Normal directions of a set at one of its points.
//!
//! Analytic set kinds get closed-form generators and exact cone distances;
//! the remaining kinds fall back to sampled direction fans validated by the
//! inverse-projection test, whose cone distances are upper bounds.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::sets::{orthonormal_complement, SetKind, SetOracle};
use crate::vector::{RealVector, Tolerances};

/// Unit generators of the normal cone at `base`.
///
/// `exact` marks closed-form cones; sampled fans only bound the cone from
/// inside. `multi_piece` marks union points lying on several pieces, where
/// the reported directions may over-cover the true cone.
#[derive(Debug, Clone, Serialize)]
pub struct NormalFan {
    pub base: RealVector,
    pub directions: Vec<RealVector>,
    pub exact: bool,
    pub multi_piece: bool,
}

/// Distance from `u` to the ray `{t g : t >= 0}` for unit `g`.
pub fn ray_distance(u: &RealVector, g: &RealVector) -> f64 {
    let along = u.dot(g).max(0.0);
    (u.dot(u) - along * along).max(0.0).sqrt()
}

/// Angular defect `1 - cos(angle(v, w))`; zero vectors count as aligned.
pub fn alignment_defect(v: &RealVector, w: &RealVector) -> f64 {
    let nv = v.norm();
    let nw = w.norm();
    if nv <= 1e-300 || nw <= 1e-300 {
        return 0.0;
    }
    (1.0 - v.dot(w) / (nv * nw)).max(0.0)
}

fn solve_gram(g: &mut [f64], b: &mut [f64], k: usize) -> Option<Vec<f64>> {
    for col in 0..k {
        let mut pivot = col;
        for row in col + 1..k {
            if g[row * k + col].abs() > g[pivot * k + col].abs() {
                pivot = row;
            }
        }
        if g[pivot * k + col].abs() < 1e-14 {
            return None;
        }
        if pivot != col {
            for j in 0..k {
                g.swap(col * k + j, pivot * k + j);
            }
            b.swap(col, pivot);
        }
        let diag = g[col * k + col];
        for row in col + 1..k {
            let f = g[row * k + col] / diag;
            if f == 0.0 {
                continue;
            }
            for j in col..k {
                g[row * k + j] -= f * g[col * k + j];
            }
            b[row] -= f * b[col];
        }
    }
    let mut t = vec![0.0; k];
    for col in (0..k).rev() {
        let mut s = b[col];
        for j in col + 1..k {
            s -= g[col * k + j] * t[j];
        }
        t[col] = s / g[col * k + col];
    }
    Some(t)
}

/// Exact Euclidean projection of `u` onto `cone(gens)` by enumerating
/// support subsets; the optimal face of a finitely generated cone is spanned
/// by some subset of generators with nonnegative coefficients.
pub(crate) fn project_onto_finite_cone(gens: &[RealVector], u: &RealVector) -> RealVector {
    let gens: Vec<&RealVector> = gens.iter().filter(|g| g.norm() > 1e-14).collect();
    let k = gens.len();
    assert!(k <= 16, "cone projection supports at most 16 generators");
    let mut best = RealVector::zeros(u.dim());
    let mut best_d = u.norm();
    for mask in 1_u32..(1 << k) {
        let idx: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let m = idx.len();
        let mut gram = vec![0.0; m * m];
        let mut rhs = vec![0.0; m];
        for (r, &i) in idx.iter().enumerate() {
            rhs[r] = gens[i].dot(u);
            for (c, &j) in idx.iter().enumerate() {
                gram[r * m + c] = gens[i].dot(gens[j]);
            }
        }
        let Some(t) = solve_gram(&mut gram, &mut rhs, m) else {
            continue;
        };
        if t.iter().any(|&ti| ti < -1e-12) {
            continue;
        }
        let mut p = RealVector::zeros(u.dim());
        for (r, &i) in idx.iter().enumerate() {
            p = p.add_scaled(t[r].max(0.0), gens[i]);
        }
        let d = p.dist(u);
        if d < best_d {
            best_d = d;
            best = p;
        }
    }
    best
}

/// Inverse-projection test: `g` is a proximal normal at `a` iff stepping out
/// by `eps` along `g` projects back onto `a`.
pub fn proximal_direction_valid(
    set: &SetOracle,
    a: &RealVector,
    g: &RealVector,
    eps: f64,
    tol: &Tolerances,
) -> bool {
    let probe = a.add_scaled(eps, g);
    let (p, _) = set.project_raw(&probe);
    p.dist(a) <= (10.0 * tol.feas_tol).max(eps * 1e-3)
}

fn default_eps(a: &RealVector) -> f64 {
    1e-6 * (1.0 + a.norm())
}

fn active_cuts<'s>(
    halfspaces: &'s [crate::sets::HalfSpaceCut],
    a: &RealVector,
) -> Vec<&'s RealVector> {
    let act_tol = 1e-8 * (1.0 + a.norm());
    halfspaces
        .iter()
        .filter(|c| (a.dot(&c.normal) - c.offset).abs() <= act_tol)
        .map(|c| &c.normal)
        .collect()
}

fn exact_directions(set: &SetOracle, a: &RealVector, tol: &Tolerances) -> Option<Vec<RealVector>> {
    match &set.kind {
        SetKind::AffineSubspace { basis, .. } => {
            let mut dirs = Vec::new();
            for w in orthonormal_complement(basis, a.dim()) {
                dirs.push(w.scale(-1.0));
                dirs.push(w);
            }
            Some(dirs)
        }
        SetKind::HalfSpace { normal, offset } => {
            if (a.dot(normal) - offset).abs() <= 10.0 * tol.feas_tol {
                Some(vec![normal.clone()])
            } else {
                Some(Vec::new())
            }
        }
        SetKind::Ball { center, radius } => {
            let rel = a.sub(center);
            if (rel.norm() - radius).abs() <= 10.0 * tol.feas_tol {
                Some(vec![rel.scale(1.0 / rel.norm())])
            } else {
                Some(Vec::new())
            }
        }
        SetKind::Sphere { center, .. } => {
            let rel = a.sub(center);
            let n = rel.normalized()?;
            Some(vec![n.scale(-1.0), n])
        }
        SetKind::ConvexPolyhedron { halfspaces } => Some(
            active_cuts(halfspaces, a)
                .into_iter()
                .cloned()
                .collect(),
        ),
        SetKind::PointSet { points } if points.len() == 1 => {
            // Isolated point: every direction is a proximal normal. Return the
            // axis directions as representative generators.
            let mut dirs = Vec::new();
            for i in 0..a.dim() {
                let e = RealVector::basis(a.dim(), i);
                dirs.push(e.scale(-1.0));
                dirs.push(e);
            }
            Some(dirs)
        }
        _ => None,
    }
}

/// Unit proximal normal directions at `a`, with closed forms where the set
/// kind admits them and a sampled inverse-projection fan otherwise.
pub fn proximal_normal_directions(
    set: &SetOracle,
    a: &RealVector,
    tol: &Tolerances,
    eps: Option<f64>,
    budget: usize,
    seed: u64,
) -> Result<NormalFan> {
    a.check_dim(set.dim())?;
    let d = set.distance_raw(a);
    let near_tol = (10.0 * tol.feas_tol).max(1e-12 * (1.0 + a.norm()));
    if d > near_tol {
        return Err(Error::NotInSet { distance: d });
    }
    let eps = eps.unwrap_or_else(|| default_eps(a));
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::NonFiniteInput);
    }

    if let SetKind::FiniteUnion { members } = &set.kind {
        let mut directions = Vec::new();
        let mut exact = true;
        let mut pieces_containing = 0;
        for (i, m) in members.iter().enumerate() {
            if m.distance_raw(a) > near_tol {
                continue;
            }
            pieces_containing += 1;
            let sub = proximal_normal_directions(m, a, tol, Some(eps), budget, seed ^ (i as u64))?;
            exact &= sub.exact;
            directions.extend(sub.directions);
        }
        if pieces_containing == 0 {
            return Err(Error::NotInSet { distance: d });
        }
        // A direction normal to one piece may point into another; keep only
        // directions that survive the test against the whole union.
        let kept: Vec<RealVector> = directions
            .into_iter()
            .filter(|g| proximal_direction_valid(set, a, g, eps, tol))
            .collect();
        return Ok(NormalFan {
            base: a.clone(),
            directions: kept,
            exact,
            multi_piece: pieces_containing > 1,
        });
    }

    if let Some(dirs) = exact_directions(set, a, tol) {
        if !dirs.is_empty() {
            let valid: Vec<RealVector> = dirs
                .iter()
                .filter(|g| proximal_direction_valid(set, a, g, eps, tol))
                .cloned()
                .collect();
            // A closed-form direction is a proximal normal for small enough
            // eps; one failing the inverse-projection test means this eps
            // exceeds the local reach and the fan would be silently truncated.
            if valid.len() < dirs.len() {
                return Err(Error::EpsilonTooLarge { eps });
            }
            return Ok(NormalFan {
                base: a.clone(),
                directions: valid,
                exact: true,
                multi_piece: false,
            });
        }
        return Ok(NormalFan {
            base: a.clone(),
            directions: dirs,
            exact: true,
            multi_piece: false,
        });
    }

    // Sampled fan: random unit directions kept when the inverse-projection
    // test accepts them.
    let mut rng = stream_rng(seed, &["proximal_fan"]);
    let dim = a.dim();
    let mut kept = Vec::new();
    let attempts = budget.max(8) * 16;
    for _ in 0..attempts {
        if kept.len() >= budget {
            break;
        }
        let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let Some(u) = RealVector::from_slice(&g).normalized() else {
            continue;
        };
        if proximal_direction_valid(set, a, &u, eps, tol) {
            kept.push(u);
        }
    }
    Ok(NormalFan {
        base: a.clone(),
        directions: kept,
        exact: false,
        multi_piece: false,
    })
}

/// Distance from `u` to the normal cone of the set at `a`. Exact for analytic
/// kinds; an upper bound when only a sampled fan is available.
pub fn normal_cone_distance(
    set: &SetOracle,
    a: &RealVector,
    u: &RealVector,
    tol: &Tolerances,
) -> Result<f64> {
    a.check_dim(set.dim())?;
    u.check_dim(set.dim())?;
    let d = set.distance_raw(a);
    let near_tol = (10.0 * tol.feas_tol).max(1e-12 * (1.0 + a.norm()));
    if d > near_tol {
        return Err(Error::NotInSet { distance: d });
    }
    Ok(cone_distance_raw(set, a, u, tol, near_tol))
}

fn cone_distance_raw(
    set: &SetOracle,
    a: &RealVector,
    u: &RealVector,
    tol: &Tolerances,
    near_tol: f64,
) -> f64 {
    match &set.kind {
        SetKind::AffineSubspace { basis, .. } => {
            let mut along = 0.0;
            for b in basis {
                let c = u.dot(b);
                along += c * c;
            }
            along.sqrt()
        }
        SetKind::HalfSpace { normal, offset } => {
            if (a.dot(normal) - offset).abs() <= 10.0 * tol.feas_tol {
                ray_distance(u, normal)
            } else {
                u.norm()
            }
        }
        SetKind::Ball { center, radius } => {
            let rel = a.sub(center);
            if (rel.norm() - radius).abs() <= 10.0 * tol.feas_tol {
                ray_distance(u, &rel.scale(1.0 / rel.norm()))
            } else {
                u.norm()
            }
        }
        SetKind::Sphere { center, .. } => match a.sub(center).normalized() {
            Some(n) => {
                let along = u.dot(&n);
                (u.dot(u) - along * along).max(0.0).sqrt()
            }
            None => u.norm(),
        },
        SetKind::ConvexPolyhedron { halfspaces } => {
            let gens: Vec<RealVector> = active_cuts(halfspaces, a).into_iter().cloned().collect();
            if gens.is_empty() {
                u.norm()
            } else {
                let p = project_onto_finite_cone(&gens, u);
                p.dist(u)
            }
        }
        SetKind::FiniteUnion { members } => members
            .iter()
            .filter(|m| m.distance_raw(a) <= near_tol)
            .map(|m| cone_distance_raw(m, a, u, tol, near_tol))
            .fold(f64::INFINITY, f64::min),
        // A finite point set is discrete, so every member is isolated and
        // every direction is a proximal normal there: a + t*u projects back
        // to a once t drops below half the gap to the nearest other member.
        SetKind::PointSet { .. } => 0.0,
    }
}

/// Sampled estimate of `limsup <u, a'-a>/||a'-a||` over set points `a' -> a`.
pub fn frechet_normal_defect(
    set: &SetOracle,
    a: &RealVector,
    u: &RealVector,
    tol: &Tolerances,
    budget: usize,
    seed: u64,
) -> Result<f64> {
    a.check_dim(set.dim())?;
    u.check_dim(set.dim())?;
    let d = set.distance_raw(a);
    let near_tol = (10.0 * tol.feas_tol).max(1e-12 * (1.0 + a.norm()));
    if d > near_tol {
        return Err(Error::NotInSet { distance: d });
    }
    let scale = 1.0 + a.norm();
    let radii = [1e-2 * scale, 1e-3 * scale, 1e-4 * scale];
    let mut last = None;
    for (k, &rho) in radii.iter().enumerate() {
        let Ok(samples) = set.sample_near(a, rho, budget.max(8), seed ^ (k as u64)) else {
            continue;
        };
        let mut max_ratio = f64::NEG_INFINITY;
        let mut seen = false;
        for ap in &samples {
            let step = ap.sub(a);
            let n = step.norm();
            // Iteratively projected sets return points with absolute error
            // near the projector's stopping tolerance; normalizing a step
            // below that error turns noise into an arbitrary unit direction.
            // Steps under a thousandth of the probe radius carry no usable
            // direction, so drop them.
            if n <= 1e-3 * rho {
                continue;
            }
            seen = true;
            max_ratio = max_ratio.max(u.dot(&step) / n);
        }
        if seen {
            last = Some(max_ratio);
        }
    }
    last.ok_or(Error::EmptySample)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::HalfSpaceCut;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn lower_half_plane() -> SetOracle {
        SetOracle::new(SetKind::HalfSpace {
            normal: RealVector::from_slice(&[0.0, 1.0]),
            offset: 0.0,
        })
    }

    fn line_x_axis() -> SetOracle {
        SetOracle::new(SetKind::AffineSubspace {
            point: RealVector::zeros(2),
            basis: vec![RealVector::from_slice(&[1.0, 0.0])],
        })
    }

    #[test]
    fn half_space_fan_is_the_outward_normal() {
        let fan = proximal_normal_directions(
            &lower_half_plane(),
            &RealVector::zeros(2),
            &tol(),
            None,
            8,
            1,
        )
        .unwrap();
        assert!(fan.exact);
        assert_eq!(fan.directions.len(), 1);
        assert_eq!(fan.directions[0].as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn line_fan_has_both_signs() {
        let fan = proximal_normal_directions(
            &line_x_axis(),
            &RealVector::from_slice(&[2.0, 0.0]),
            &tol(),
            None,
            8,
            1,
        )
        .unwrap();
        assert!(fan.exact);
        let mut ys: Vec<f64> = fan.directions.iter().map(|d| d.as_slice()[1]).collect();
        ys.sort_by(f64::total_cmp);
        assert_eq!(ys, vec![-1.0, 1.0]);
    }

    #[test]
    fn ball_interior_has_empty_fan() {
        let ball = SetOracle::new(SetKind::Ball {
            center: RealVector::from_slice(&[0.0, 1.0]),
            radius: 1.0,
        });
        let fan = proximal_normal_directions(
            &ball,
            &RealVector::from_slice(&[0.0, 1.0]),
            &tol(),
            None,
            8,
            1,
        )
        .unwrap();
        assert!(fan.exact);
        assert!(fan.directions.is_empty());
    }

    #[test]
    fn not_in_set_is_rejected() {
        let err = proximal_normal_directions(
            &line_x_axis(),
            &RealVector::from_slice(&[0.0, 0.5]),
            &tol(),
            None,
            8,
            1,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotInSet { .. }));
    }

    #[test]
    fn oversized_eps_is_rejected_for_sphere() {
        let sphere = SetOracle::new(SetKind::Sphere {
            center: RealVector::from_slice(&[0.0, 1.0]),
            radius: 1.0,
        });
        let a = RealVector::from_slice(&[0.0, 0.0]);
        let err =
            proximal_normal_directions(&sphere, &a, &tol(), Some(3.0), 8, 1).unwrap_err();
        assert!(matches!(err, Error::EpsilonTooLarge { .. }));
    }

    #[test]
    fn cone_distance_examples() {
        let t = tol();
        let origin = RealVector::zeros(2);
        assert_eq!(
            normal_cone_distance(
                &lower_half_plane(),
                &origin,
                &RealVector::from_slice(&[0.0, 1.0]),
                &t
            )
            .unwrap(),
            0.0
        );
        assert_eq!(
            normal_cone_distance(
                &lower_half_plane(),
                &origin,
                &RealVector::from_slice(&[1.0, 0.0]),
                &t
            )
            .unwrap(),
            1.0
        );
        let u = RealVector::from_slice(&[0.5, 3f64.sqrt() / 2.0]);
        let d = normal_cone_distance(&line_x_axis(), &RealVector::from_slice(&[2.0, 0.0]), &u, &t)
            .unwrap();
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cone_distance_matches_dense_ray_search() {
        let t = tol();
        let a = RealVector::from_slice(&[2.0, 0.0]);
        let u = RealVector::from_slice(&[0.5, 3f64.sqrt() / 2.0]);
        let exact = normal_cone_distance(&line_x_axis(), &a, &u, &t).unwrap();
        let mut brute = f64::INFINITY;
        for g in [
            RealVector::from_slice(&[0.0, 1.0]),
            RealVector::from_slice(&[0.0, -1.0]),
        ] {
            let mut s = 0.0;
            while s <= 3.0 {
                brute = brute.min(u.sub(&g.scale(s)).norm());
                s += 1e-4;
            }
        }
        assert!((exact - brute).abs() < 1e-4);
    }

    #[test]
    fn polyhedron_cone_uses_active_normals() {
        let t = tol();
        let wedge = SetOracle::new(SetKind::ConvexPolyhedron {
            halfspaces: vec![
                HalfSpaceCut {
                    normal: RealVector::from_slice(&[0.0, 1.0]),
                    offset: 0.0,
                },
                HalfSpaceCut {
                    normal: RealVector::from_slice(&[-1.0, 0.0]),
                    offset: 0.0,
                },
            ],
        });
        let origin = RealVector::zeros(2);
        // Inside the cone spanned by the two active normals.
        let u = RealVector::from_slice(&[-1.0, 1.0]);
        assert!(normal_cone_distance(&wedge, &origin, &u, &t).unwrap() < 1e-12);
        // On an edge of the wedge only the local normal is active.
        let edge = RealVector::from_slice(&[3.0, 0.0]);
        let d = normal_cone_distance(&wedge, &edge, &RealVector::from_slice(&[-1.0, 1.0]), &t)
            .unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singleton_cone_is_everything() {
        let t = tol();
        let point = SetOracle::new(SetKind::PointSet {
            points: vec![RealVector::zeros(2)],
        });
        let d = normal_cone_distance(
            &point,
            &RealVector::zeros(2),
            &RealVector::from_slice(&[0.3, -0.8]),
            &t,
        )
        .unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn union_point_passes_every_direction() {
        let t = tol();
        let union = SetOracle::new(SetKind::FiniteUnion {
            members: vec![
                SetOracle::new(SetKind::AffineSubspace {
                    point: RealVector::from_slice(&[0.0, 1.0]),
                    basis: vec![RealVector::from_slice(&[1.0, 0.0])],
                }),
                SetOracle::new(SetKind::PointSet {
                    points: vec![RealVector::zeros(2)],
                }),
            ],
        });
        let d = normal_cone_distance(
            &union,
            &RealVector::zeros(2),
            &RealVector::from_slice(&[0.6, 0.8]),
            &t,
        )
        .unwrap();
        assert_eq!(d, 0.0);
        let fan = proximal_normal_directions(
            &union,
            &RealVector::from_slice(&[2.0, 1.0]),
            &t,
            None,
            8,
            1,
        )
        .unwrap();
        assert!(!fan.multi_piece);
        assert_eq!(fan.directions.len(), 2);
    }

    #[test]
    fn frechet_defect_examples() {
        let t = tol();
        let origin = RealVector::zeros(2);
        let d = frechet_normal_defect(
            &lower_half_plane(),
            &origin,
            &RealVector::from_slice(&[0.0, 1.0]),
            &t,
            64,
            5,
        )
        .unwrap();
        assert!(d <= t.align_tol);
        let d = frechet_normal_defect(
            &lower_half_plane(),
            &origin,
            &RealVector::from_slice(&[1.0, 0.0]),
            &t,
            64,
            5,
        )
        .unwrap();
        assert!(d > 0.9);

        let sphere = SetOracle::new(SetKind::Sphere {
            center: RealVector::from_slice(&[0.0, 1.0]),
            radius: 1.0,
        });
        let d = frechet_normal_defect(
            &sphere,
            &origin,
            &RealVector::from_slice(&[0.0, -1.0]),
            &t,
            64,
            5,
        )
        .unwrap();
        assert!(d <= t.align_tol);
    }

    #[test]
    fn frechet_defect_needs_distinct_points() {
        let t = tol();
        let point = SetOracle::new(SetKind::PointSet {
            points: vec![RealVector::zeros(2)],
        });
        let err = frechet_normal_defect(
            &point,
            &RealVector::zeros(2),
            &RealVector::from_slice(&[1.0, 0.0]),
            &t,
            16,
            5,
        )
        .unwrap_err();
        assert!(matches!(err, Error::EmptySample));
    }

    #[test]
    fn alignment_defect_conventions() {
        let v = RealVector::from_slice(&[0.0, 2.0]);
        let w = RealVector::from_slice(&[0.0, 5.0]);
        assert_eq!(alignment_defect(&v, &w), 0.0);
        assert_eq!(alignment_defect(&RealVector::zeros(2), &w), 0.0);
        let opp = RealVector::from_slice(&[0.0, -1.0]);
        assert!((alignment_defect(&v, &opp) - 2.0).abs() < 1e-15);
        // Scale invariance.
        assert_eq!(
            alignment_defect(&v.scale(3.7), &w),
            alignment_defect(&v, &w)
        );
    }

    #[test]
    fn cone_projection_matches_brute_force() {
        let gens = vec![
            RealVector::from_slice(&[1.0, 0.0]),
            RealVector::from_slice(&[0.6, 0.8]),
        ];
        let u = RealVector::from_slice(&[-0.3, 1.2]);
        let p = project_onto_finite_cone(&gens, &u);
        let mut brute = u.norm();
        let mut s = 0.0;
        while s <= 2.0 {
            let mut t = 0.0;
            while t <= 2.0 {
                let q = gens[0].scale(s).add(&gens[1].scale(t));
                brute = brute.min(q.dist(&u));
                t += 0.005;
            }
            s += 0.005;
        }
        assert!((p.dist(&u) - brute).abs() < 1e-2);
        assert!(p.dist(&u) <= brute + 1e-12);
    }
}

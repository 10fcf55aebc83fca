//! Extrinsic balls on a meshed submanifold: clipped Riemannian volume,
//! boundary area, end counting on the complement, and vertex scans for
//! critical points and convexity.

use crate::error::{Error, Result};
use crate::immersion::{ParametricImmersion, RadialFunction};
use crate::mesh::MeshedSubmanifold;
use crate::model::POLE_RADIUS;
use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

/// Deterministic tie-breaking offset for equal vertex radii within one
/// simplex, so the truncated-power fraction formula stays well defined.
const TIE_EPS: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct BoundaryFacet {
    pub simplex: usize,
    pub area: f64,
}

#[derive(Debug)]
pub struct ExtrinsicBallMesh {
    pub t: f64,
    /// Simplices with every vertex at r < t.
    pub interior_simplices: Vec<usize>,
    /// (simplex, volume fraction below the level) for crossed simplices.
    pub cut_simplices: Vec<(usize, f64)>,
    pub boundary_elements: Vec<BoundaryFacet>,
    volume: f64,
    area: f64,
}

impl ExtrinsicBallMesh {
    pub fn is_empty(&self) -> bool {
        self.interior_simplices.is_empty() && self.cut_simplices.is_empty()
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn area(&self) -> f64 {
        self.area
    }
}

#[derive(Debug, Clone)]
pub struct EndsScan {
    pub radii: Vec<f64>,
    pub counts: Vec<usize>,
    pub stabilized_count: Option<usize>,
    pub stabilization_window: Option<(f64, f64)>,
}

/// Volume fraction of an m-simplex below the linear level `t` of vertex
/// values `r`: sum over below-vertices of (t - r_i)^m / prod_j (r_j - r_i).
fn below_fraction(r: &[f64], t: f64) -> f64 {
    let m = r.len() - 1;
    let mut frac = 0.0;
    for (i, &ri) in r.iter().enumerate() {
        if ri >= t {
            continue;
        }
        let mut term = (t - ri).powi(m as i32);
        for (j, &rj) in r.iter().enumerate() {
            if j != i {
                term /= rj - ri;
            }
        }
        frac += term;
    }
    frac.clamp(0.0, 1.0)
}

/// Interpolated crossing points of the level r = t on simplex edges,
/// ordered so consecutive points bound the facet polygon.
fn crossing_polygon(
    local: &[Vec<f64>],
    r: &[f64],
    t: f64,
) -> Vec<Vec<f64>> {
    let below: Vec<usize> = (0..r.len()).filter(|&i| r[i] < t).collect();
    let above: Vec<usize> = (0..r.len()).filter(|&i| r[i] >= t).collect();
    let cross = |a: usize, b: usize| -> Vec<f64> {
        let s = (t - r[a]) / (r[b] - r[a]);
        local[a]
            .iter()
            .zip(&local[b])
            .map(|(x, y)| x + s * (y - x))
            .collect()
    };
    match (below.len(), above.len()) {
        (1, _) | (_, 1) => {
            // single vertex on one side: one crossing per opposite vertex
            let (apex, rest) = if below.len() == 1 {
                (below[0], &above)
            } else {
                (above[0], &below)
            };
            rest.iter().map(|&o| cross(apex.min(o), apex.max(o))).collect()
        }
        (2, 2) => {
            // quad in cyclic order a1b1, a1b2, a2b2, a2b1
            let (a1, a2, b1, b2) = (below[0], below[1], above[0], above[1]);
            vec![cross(a1, b1), cross(a1, b2), cross(a2, b2), cross(a2, b1)]
        }
        _ => Vec::new(),
    }
}

/// (m-1)-area of the crossing polygon under the constant metric g,
/// triangulated from its first vertex.
fn polygon_area(poly: &[Vec<f64>], g: &[f64], m: usize) -> f64 {
    let qdot = |u: &[f64], v: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                acc += u[i] * g[i * m + j] * v[j];
            }
        }
        acc
    };
    match m {
        2 => {
            if poly.len() != 2 {
                return 0.0;
            }
            let d: Vec<f64> = poly[1].iter().zip(&poly[0]).map(|(a, b)| a - b).collect();
            qdot(&d, &d).max(0.0).sqrt()
        }
        3 => {
            let mut area = 0.0;
            for k in 1..poly.len().saturating_sub(1) {
                let e1: Vec<f64> = poly[k].iter().zip(&poly[0]).map(|(a, b)| a - b).collect();
                let e2: Vec<f64> =
                    poly[k + 1].iter().zip(&poly[0]).map(|(a, b)| a - b).collect();
                let (a, b, c) = (qdot(&e1, &e1), qdot(&e1, &e2), qdot(&e2, &e2));
                area += 0.5 * (a * c - b * b).max(0.0).sqrt();
            }
            area
        }
        _ => f64::NAN,
    }
}

/// Clip the mesh against the level set r = t of the linear interpolant.
pub fn extrinsic_ball(mesh: &MeshedSubmanifold, t: f64) -> Result<ExtrinsicBallMesh> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ball radius must be positive, got {t}"
        )));
    }
    let m = mesh.param_dim;
    if m > 3 {
        return Err(Error::InvalidArgument(
            "boundary extraction supports parameter dimension <= 3".into(),
        ));
    }
    let per_simplex: Vec<(Option<usize>, Option<(usize, f64)>, f64, f64)> = mesh
        .simplices
        .par_iter()
        .enumerate()
        .map(|(si, s)| {
            // deterministic perturbation of tied radii
            let mut r: Vec<f64> = s.vertices.iter().map(|&v| mesh.vertices[v].r).collect();
            for i in 0..r.len() {
                for j in 0..i {
                    if (r[i] - r[j]).abs() < TIE_EPS {
                        r[i] += TIE_EPS * (i + 1) as f64;
                    }
                }
            }
            let below = r.iter().filter(|&&x| x < t).count();
            if below == 0 {
                return (None, None, 0.0, 0.0);
            }
            if below == r.len() {
                return (Some(si), None, s.volume, 0.0);
            }
            let frac = below_fraction(&r, t);
            let poly = crossing_polygon(&s.local_params, &r, t);
            let area = polygon_area(&poly, &s.metric, m);
            (None, Some((si, frac)), frac * s.volume, area)
        })
        .collect();

    let mut interior = Vec::new();
    let mut cut = Vec::new();
    let mut boundary = Vec::new();
    let mut volume = 0.0;
    let mut area = 0.0;
    for (int, cutted, v, a) in per_simplex {
        if let Some(si) = int {
            interior.push(si);
        }
        if let Some((si, frac)) = cutted {
            cut.push((si, frac));
            if a > 0.0 {
                boundary.push(BoundaryFacet { simplex: si, area: a });
            }
        }
        volume += v;
        area += a;
    }
    Ok(ExtrinsicBallMesh {
        t,
        interior_simplices: interior,
        cut_simplices: cut,
        boundary_elements: boundary,
        volume,
        area,
    })
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n).collect(),
        }
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn complement_components(mesh: &MeshedSubmanifold, t: f64) -> usize {
    let surviving: Vec<bool> = mesh
        .simplices
        .iter()
        .map(|s| s.vertices.iter().all(|&v| mesh.vertices[v].r >= t))
        .collect();
    let mut uf = UnionFind::new(mesh.simplices.len());
    for incident in &mesh.vertex_simplices {
        let alive: Vec<usize> = incident
            .iter()
            .copied()
            .filter(|&si| surviving[si])
            .collect();
        for w in alive.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    let mut roots: Vec<usize> = (0..mesh.simplices.len())
        .filter(|&si| surviving[si])
        .map(|si| uf.find(si))
        .collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len()
}

/// Count connected components of the complement of each ball; a
/// stabilized count requires a constant trailing window spanning at least
/// 30% of the scanned radius range.
pub fn count_ends(mesh: &MeshedSubmanifold, radii: &[f64]) -> Result<EndsScan> {
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "end counting needs strictly increasing radii".into(),
        ));
    }
    let counts: Vec<usize> = radii
        .par_iter()
        .map(|&t| complement_components(mesh, t))
        .collect();
    let span = radii[radii.len() - 1] - radii[0];
    let last = counts[counts.len() - 1];
    let mut start = counts.len() - 1;
    while start > 0 && counts[start - 1] == last {
        start -= 1;
    }
    let window_span = radii[radii.len() - 1] - radii[start];
    let stabilized = span == 0.0 || window_span >= 0.3 * span;
    Ok(EndsScan {
        radii: radii.to_vec(),
        counts,
        stabilized_count: stabilized.then_some(last),
        stabilization_window: stabilized.then_some((radii[start], radii[radii.len() - 1])),
    })
}

/// Minimum of `grad_r_tangent_norm` over vertices with r in the annulus;
/// returns the minimum and the vertex index attaining it.
pub fn critical_point_scan(
    mesh: &MeshedSubmanifold,
    t_lo: f64,
    t_hi: f64,
) -> Result<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for (i, v) in mesh.vertices.iter().enumerate() {
        if v.r < t_lo || v.r > t_hi {
            continue;
        }
        if best.map_or(true, |(b, _)| v.grad_r_tangent_norm < b) {
            best = Some((v.grad_r_tangent_norm, i));
        }
    }
    best.ok_or_else(|| {
        Error::Domain(format!(
            "no mesh vertices in the annulus [{t_lo}, {t_hi}]"
        ))
    })
}

/// Minimum eigenvalue of the restricted Hessian of `F(r)` over vertices
/// in the radius range; returns the minimum and its vertex index.
pub fn convexity_scan(
    im: &ParametricImmersion,
    mesh: &MeshedSubmanifold,
    r_lo: f64,
    r_hi: f64,
    f: &dyn RadialFunction,
) -> Result<(f64, usize)> {
    let candidates: Vec<usize> = (0..mesh.vertices.len())
        .filter(|&i| {
            let r = mesh.vertices[i].r;
            r >= r_lo.max(POLE_RADIUS) && r <= r_hi
        })
        .collect();
    if candidates.is_empty() {
        return Err(Error::Domain(format!(
            "no mesh vertices with r in [{r_lo}, {r_hi}]"
        )));
    }
    let evals: Result<Vec<(f64, usize)>> = candidates
        .par_iter()
        .map(|&i| {
            let h = im.restricted_hessian(&mesh.vertices[i].param, f)?;
            let eig = SymmetricEigen::new(DMatrix::from(h));
            let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
            Ok((min, i))
        })
        .collect();
    evals?
        .into_iter()
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)))
        .ok_or_else(|| Error::Numeric("empty eigenvalue scan".into()))
}

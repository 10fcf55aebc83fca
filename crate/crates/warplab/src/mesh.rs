//! Structured simplicial meshes of parametric immersions: grid vertices,
//! Kuhn-triangulated cells, induced-metric edge lengths, graph intrinsic
//! distance, and per-vertex geometric caches.

use crate::error::{Error, Result};
use crate::immersion::ParametricImmersion;
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt::Write as _;

#[derive(Debug, Clone)]
pub struct MeshVertex {
    pub param: Vec<f64>,
    pub point: Vec<f64>,
    pub r: f64,
    /// Graph intrinsic distance from the base vertex, offset by the base
    /// vertex's own extrinsic distance so that rho >= r holds everywhere.
    pub rho: f64,
    pub sff_norm: f64,
    pub grad_r_tangent_norm: f64,
    /// m x m induced metric, row-major.
    pub induced_metric: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Simplex {
    pub vertices: Vec<usize>,
    /// Cell-local parameter coordinates of the vertices, unwrapped across
    /// periodic seams so differences are geometric.
    pub local_params: Vec<Vec<f64>>,
    /// Induced metric at the simplex centroid, row-major m x m.
    pub metric: Vec<f64>,
    pub volume: f64,
}

pub struct MeshedSubmanifold {
    pub param_dim: usize,
    pub ambient_dim: usize,
    pub vertices: Vec<MeshVertex>,
    pub simplices: Vec<Simplex>,
    /// (a, b, length) with a < b, deduplicated.
    pub edges: Vec<(usize, usize, f64)>,
    pub base_vertex: usize,
    pub vertex_simplices: Vec<Vec<usize>>,
    pub axis_counts: Vec<usize>,
}

struct Grid {
    counts: Vec<usize>,
    steps: Vec<f64>,
    los: Vec<f64>,
    wraps: Vec<bool>,
}

impl Grid {
    fn vertex_count(&self) -> usize {
        self.counts.iter().product()
    }

    fn param_of(&self, idx: usize) -> Vec<f64> {
        let mut rem = idx;
        let m = self.counts.len();
        let mut u = vec![0.0; m];
        for k in (0..m).rev() {
            let i = rem % self.counts[k];
            rem /= self.counts[k];
            u[k] = self.los[k] + i as f64 * self.steps[k];
        }
        u
    }

    fn index_of(&self, coords: &[usize]) -> usize {
        let mut idx = 0;
        for k in 0..self.counts.len() {
            idx = idx * self.counts[k] + coords[k];
        }
        idx
    }

    fn cell_counts(&self) -> Vec<usize> {
        self.counts
            .iter()
            .zip(&self.wraps)
            .map(|(&c, &w)| if w { c } else { c - 1 })
            .collect()
    }
}

/// All permutations of 0..m in lexicographic order (Kuhn triangulation
/// enumeration; deterministic).
fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..m).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (0..m - 1).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..m).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

/// sqrt(det G) / m! with G the Gram matrix of the edge vectors from
/// vertex 0 under the metric g.
fn simplex_volume(local: &[Vec<f64>], g: &[f64], m: usize) -> f64 {
    let mut gram = DMatrix::zeros(m, m);
    let e: Vec<Vec<f64>> = (1..=m)
        .map(|i| {
            (0..m)
                .map(|k| local[i][k] - local[0][k])
                .collect::<Vec<f64>>()
        })
        .collect();
    for i in 0..m {
        for j in 0..m {
            let mut acc = 0.0;
            for a in 0..m {
                for b in 0..m {
                    acc += e[i][a] * g[a * m + b] * e[j][b];
                }
            }
            gram[(i, j)] = acc;
        }
    }
    let det = gram.determinant().max(0.0);
    let mut fact = 1.0;
    for k in 2..=m {
        fact *= k as f64;
    }
    det.sqrt() / fact
}

impl MeshedSubmanifold {
    /// Build the mesh with `resolution[k]` vertices along axis k. Wrap
    /// axes place `resolution[k]` vertices on the full period; others
    /// include both endpoints.
    pub fn build(im: &ParametricImmersion, resolution: &[usize]) -> Result<MeshedSubmanifold> {
        let m = im.param_dim();
        if resolution.len() != m {
            return Err(Error::InvalidArgument(format!(
                "resolution lists {} axes for a {m}-parameter immersion",
                resolution.len()
            )));
        }
        if resolution.iter().any(|&c| c < 2) {
            return Err(Error::InvalidArgument(
                "need at least 2 vertices per axis".into(),
            ));
        }
        let grid = Grid {
            counts: resolution.to_vec(),
            steps: im
                .domain
                .iter()
                .zip(resolution)
                .map(|(ax, &c)| {
                    let span = ax.hi - ax.lo;
                    if ax.wrap {
                        span / c as f64
                    } else {
                        span / (c - 1) as f64
                    }
                })
                .collect(),
            los: im.domain.iter().map(|ax| ax.lo).collect(),
            wraps: im.domain.iter().map(|ax| ax.wrap).collect(),
        };

        let nv = grid.vertex_count();
        let vertices: Result<Vec<MeshVertex>> = (0..nv)
            .into_par_iter()
            .map(|idx| {
                let u = grid.param_of(idx);
                let geo = im.vertex_geometry(&u)?;
                Ok(MeshVertex {
                    param: u,
                    point: geo.point,
                    r: geo.r,
                    rho: f64::INFINITY,
                    sff_norm: geo.sff_norm,
                    grad_r_tangent_norm: geo.grad_r_tangent_norm,
                    induced_metric: geo.induced_metric,
                })
            })
            .collect();
        let mut vertices = vertices?;

        // Kuhn triangulation: each cell splits into m! simplices along
        // coordinate permutation paths.
        let perms = permutations(m);
        let cell_counts = grid.cell_counts();
        let n_cells: usize = cell_counts.iter().product();
        let mut simplices = Vec::with_capacity(n_cells * perms.len());
        let mut corner = vec![0usize; m];
        for cell in 0..n_cells {
            let mut rem = cell;
            for k in (0..m).rev() {
                corner[k] = rem % cell_counts[k];
                rem /= cell_counts[k];
            }
            for perm in &perms {
                let mut offsets = vec![vec![0usize; m]];
                for &axis in perm {
                    let mut next = offsets.last().unwrap().clone();
                    next[axis] += 1;
                    offsets.push(next);
                }
                let mut vids = Vec::with_capacity(m + 1);
                let mut locals = Vec::with_capacity(m + 1);
                for off in &offsets {
                    let coords: Vec<usize> = (0..m)
                        .map(|k| (corner[k] + off[k]) % grid.counts[k])
                        .collect();
                    vids.push(grid.index_of(&coords));
                    locals.push(
                        (0..m)
                            .map(|k| {
                                grid.los[k] + (corner[k] + off[k]) as f64 * grid.steps[k]
                            })
                            .collect(),
                    );
                }
                simplices.push(Simplex {
                    vertices: vids,
                    local_params: locals,
                    metric: Vec::new(),
                    volume: 0.0,
                });
            }
        }
        // metric at the cell-simplex centroid: one-point quadrature avoids
        // the systematic overestimate of vertex averaging when the metric
        // grows exponentially across a cell
        let metrics: Result<Vec<(Vec<f64>, f64)>> = simplices
            .par_iter()
            .map(|s| {
                let mut centroid = vec![0.0; m];
                for loc in &s.local_params {
                    for (c, x) in centroid.iter_mut().zip(loc) {
                        *c += x / (m + 1) as f64;
                    }
                }
                let g = im.induced_metric(&centroid)?;
                let volume = simplex_volume(&s.local_params, &g, m);
                if volume < 1e-14 {
                    return Err(Error::Mesh(format!(
                        "degenerate simplex (volume {volume:.3e}) at vertices {:?}",
                        s.vertices
                    )));
                }
                Ok((g, volume))
            })
            .collect();
        for (s, (g, volume)) in simplices.iter_mut().zip(metrics?) {
            s.metric = g;
            s.volume = volume;
        }

        // edge set from simplex skeletons, with unwrapped differences
        let mut edge_data: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
        for s in &simplices {
            for i in 0..=m {
                for j in (i + 1)..=m {
                    let (a, b) = (s.vertices[i], s.vertices[j]);
                    let key = (a.min(b), a.max(b));
                    edge_data.entry(key).or_insert_with(|| {
                        let (pi, pj) = if a <= b { (i, j) } else { (j, i) };
                        let mut mid = Vec::with_capacity(2 * m);
                        for k in 0..m {
                            mid.push(0.5 * (s.local_params[pi][k] + s.local_params[pj][k]));
                        }
                        for k in 0..m {
                            mid.push(s.local_params[pj][k] - s.local_params[pi][k]);
                        }
                        mid
                    });
                }
            }
        }
        let edge_list: Vec<((usize, usize), Vec<f64>)> = edge_data.into_iter().collect();
        let edges: Result<Vec<(usize, usize, f64)>> = edge_list
            .par_iter()
            .map(|((a, b), mid_delta)| {
                let (mid, delta) = mid_delta.split_at(m);
                let g = im.induced_metric(mid)?;
                let mut q = 0.0;
                for i in 0..m {
                    for j in 0..m {
                        q += delta[i] * g[i * m + j] * delta[j];
                    }
                }
                Ok((*a, *b, q.max(0.0).sqrt()))
            })
            .collect();
        let edges = edges?;

        // base vertex: minimal r, lowest index on ties
        let base_vertex = (0..nv)
            .min_by(|&a, &b| {
                vertices[a]
                    .r
                    .partial_cmp(&vertices[b].r)
                    .unwrap()
                    .then(a.cmp(&b))
            })
            .ok_or_else(|| Error::Mesh("empty mesh".into()))?;

        // Dijkstra over the edge graph; rho is offset by r(base) so the
        // triangle inequality gives rho >= r at every vertex
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nv];
        for &(a, b, len) in &edges {
            adj[a].push((b, len));
            adj[b].push((a, len));
        }
        let mut dist = vec![f64::INFINITY; nv];
        dist[base_vertex] = 0.0;
        let mut heap: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();
        heap.push(Reverse((0, base_vertex)));
        while let Some(Reverse((dbits, v))) = heap.pop() {
            let d = f64::from_bits(dbits);
            if d > dist[v] {
                continue;
            }
            for &(w, len) in &adj[v] {
                let nd = d + len;
                if nd < dist[w] {
                    dist[w] = nd;
                    heap.push(Reverse((nd.to_bits(), w)));
                }
            }
        }
        let r0 = vertices[base_vertex].r;
        for (v, d) in vertices.iter_mut().zip(&dist) {
            v.rho = r0 + d;
        }

        let mut vertex_simplices: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for (si, s) in simplices.iter().enumerate() {
            for &v in &s.vertices {
                vertex_simplices[v].push(si);
            }
        }

        Ok(MeshedSubmanifold {
            param_dim: m,
            ambient_dim: im.ambient_dim(),
            vertices,
            simplices,
            edges,
            base_vertex,
            vertex_simplices,
            axis_counts: resolution.to_vec(),
        })
    }

    pub fn min_r(&self) -> f64 {
        self.vertices.iter().map(|v| v.r).fold(f64::INFINITY, f64::min)
    }

    pub fn max_r(&self) -> f64 {
        self.vertices.iter().map(|v| v.r).fold(0.0, f64::max)
    }

    /// Plain-text export: one vertex per line, then the simplex index.
    pub fn export_text(&self) -> String {
        let m = self.param_dim;
        let n = self.ambient_dim;
        let mut out = String::new();
        out.push_str("# id");
        for i in 1..=m {
            let _ = write!(out, " u{i}");
        }
        for i in 1..=n {
            let _ = write!(out, " x{i}");
        }
        out.push_str(" r rho sff gradr\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = write!(out, "{i}");
            for u in &v.param {
                let _ = write!(out, " {u:.12e}");
            }
            for x in &v.point {
                let _ = write!(out, " {x:.12e}");
            }
            let _ = writeln!(
                out,
                " {:.12e} {:.12e} {:.12e} {:.12e}",
                v.r, v.rho, v.sff_norm, v.grad_r_tangent_norm
            );
        }
        out.push_str("# simplices: id v0..vm\n");
        for (i, s) in self.simplices.iter().enumerate() {
            let _ = write!(out, "{i}");
            for v in &s.vertices {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersion::Builtin;
    use approx::assert_relative_eq;

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(2).len(), 2);
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(1), vec![vec![0]]);
    }

    #[test]
    fn plane_grid_vertex_count_and_rho() {
        let im = Builtin::EuclideanPlane { m: 2, n: 3 }.build().unwrap();
        // the bundled plane domain is [-10.5, 10.5]; rebuild on [-10, 10]
        let mut im = im;
        for ax in &mut im.domain {
            ax.lo = -10.0;
            ax.hi = 10.0;
        }
        let mesh = MeshedSubmanifold::build(&im, &[101, 101]).unwrap();
        assert_eq!(mesh.vertices.len(), 10201);
        assert_eq!(mesh.simplices.len(), 100 * 100 * 2);
        // base vertex at the pole
        assert!(mesh.vertices[mesh.base_vertex].r < 1e-12);
        let v = mesh
            .vertices
            .iter()
            .position(|v| (v.param[0] - 10.0).abs() < 1e-12 && v.param[1].abs() < 1e-12)
            .unwrap();
        let rho = mesh.vertices[v].rho;
        assert!((10.0..=10.05).contains(&rho), "rho {rho}");
    }

    #[test]
    fn rho_dominates_r_everywhere() {
        for im in [
            Builtin::Catenoid { scale: 1.0 }.build().unwrap(),
            Builtin::EuclideanPlane { m: 2, n: 3 }.build().unwrap(),
        ] {
            let mesh = MeshedSubmanifold::build(&im, &[41, 32]).unwrap();
            for v in &mesh.vertices {
                assert!(v.rho >= v.r - 1e-9, "rho {} < r {}", v.rho, v.r);
                assert!((0.0..=1.0 + 1e-12).contains(&v.grad_r_tangent_norm));
            }
        }
    }

    #[test]
    fn catenoid_mesh_wraps_and_r_formula() {
        let im = Builtin::Catenoid { scale: 1.0 }.build().unwrap();
        let mesh = MeshedSubmanifold::build(&im, &[33, 24]).unwrap();
        assert_eq!(mesh.vertices.len(), 33 * 24);
        // wrap axis: cells equal vertex count along theta
        assert_eq!(mesh.simplices.len(), 32 * 24 * 2);
        for v in &mesh.vertices {
            let expect = (v.param[0].cosh().powi(2) + v.param[0] * v.param[0]).sqrt();
            assert_relative_eq!(v.r, expect, max_relative = 1e-12);
        }
        assert_relative_eq!(mesh.min_r(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn sphere_mesh_compact() {
        let im = Builtin::RoundSphere { radius: 2.0 }.build().unwrap();
        let mesh = MeshedSubmanifold::build(&im, &[17, 24]).unwrap();
        assert_relative_eq!(mesh.max_r(), 2.0, epsilon = 1e-12);
        assert_relative_eq!(mesh.min_r(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn totally_geodesic_sff_small_over_mesh() {
        let im = Builtin::HyperbolicHyperplane {
            m: 2,
            n: 3,
            b: -1.0,
        }
        .build()
        .unwrap();
        let mesh = MeshedSubmanifold::build(&im, &[25, 25]).unwrap();
        for v in &mesh.vertices {
            assert!(v.sff_norm <= 1e-8, "sff {} at {:?}", v.sff_norm, v.param);
        }
    }

    #[test]
    fn export_contains_header_and_counts() {
        let im = Builtin::Catenoid { scale: 1.0 }.build().unwrap();
        let mesh = MeshedSubmanifold::build(&im, &[5, 6]).unwrap();
        let txt = mesh.export_text();
        assert!(txt.starts_with("# id u1 u2 x1 x2 x3 r rho sff gradr\n"));
        let vertex_lines = txt
            .lines()
            .skip(1)
            .take_while(|l| !l.starts_with('#'))
            .count();
        assert_eq!(vertex_lines, 30);
    }
}

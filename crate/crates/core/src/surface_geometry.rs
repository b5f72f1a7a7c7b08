//! Pseudo-normals, element orientation, neighbor rings, surface regions and
//! discrete mean curvature.

use std::collections::{HashMap, HashSet, VecDeque};

use nalgebra::Vector3;
use rayon::prelude::*;
use thiserror::Error;

use crate::cube_graph::{disperse_mask, States};
use crate::isopath_extract::{extract_context, fan_normal, ExtractError, IsoContext, IsoSurface, PathKind};
use crate::scalar_grid::cell_positions;
use crate::surface_components::{analyze, Pairing, SurfaceTopology, Violation, ViolationKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("no interface: {0} disperse nodes")]
    NoInterface(u32),
}

/// `p = sum_{j in N_d} sum_{i in N_c} (C_i - D_j)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PseudoNormal {
    pub vector: Vector3<f64>,
    pub disperse: u8,
    pub continuous: u8,
}

impl PseudoNormal {
    pub fn is_degenerate(&self) -> bool {
        self.vector == Vector3::zeros()
    }
}

/// Double-sum form over integer corner coordinates.
pub fn pseudo_normal_double_sum(states: &States, corners: &[[i64; 3]; 8]) -> [i64; 3] {
    let mut p = [0i64; 3];
    for j in (0..8).filter(|&j| states[j].is_disperse()) {
        for i in (0..8).filter(|&i| !states[i].is_disperse()) {
            for a in 0..3 {
                p[a] += corners[i][a] - corners[j][a];
            }
        }
    }
    p
}

/// Closed form `|N_d| sum_{i} P_i - 8 sum_{j in N_d} D_j` over integer corners.
pub fn pseudo_normal_closed_form(states: &States, corners: &[[i64; 3]; 8]) -> [i64; 3] {
    let nd = states.iter().filter(|s| s.is_disperse()).count() as i64;
    let mut p = [0i64; 3];
    for (c, x) in corners.iter().enumerate() {
        for a in 0..3 {
            p[a] += nd * x[a];
            if states[c].is_disperse() {
                p[a] -= 8 * x[a];
            }
        }
    }
    p
}

pub fn pseudo_normal(states: &States, corners: &[Vector3<f64>; 8]) -> Result<PseudoNormal, GeometryError> {
    let dm = disperse_mask(states);
    if dm == 0 || dm == 0xff {
        return Err(GeometryError::NoInterface(dm.count_ones()));
    }
    let nd = dm.count_ones() as f64;
    let sum_all: Vector3<f64> = corners.iter().sum();
    let sum_d: Vector3<f64> = (0..8).filter(|&c| dm & (1 << c) != 0).map(|c| corners[c]).sum();
    Ok(PseudoNormal {
        vector: sum_all * nd - sum_d * 8.0,
        disperse: dm,
        continuous: !dm,
    })
}

/// Triangle with welded vertex references and its unit normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrientedTriangle {
    pub vertices: [usize; 3],
    pub normal: Vector3<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OrientationReport {
    pub flipped: Vec<usize>,
    /// Elements oriented by inheritance from a matched neighbor.
    pub inherited: Vec<usize>,
    /// Elements with no usable pseudo-normal and no oriented neighbor.
    pub unresolved: Vec<usize>,
}

fn reverse_path(surface: &mut IsoSurface, p: usize) {
    surface.paths[p].reverse();
    surface.path_vertices[p].reverse();
}

/// Orients every element so that `N . p > 0` for its piece pseudo-normal.
/// Elements with a vanishing product inherit orientation from a matched
/// neighbor, breadth-first. The pairing must belong to `surface` and stays
/// valid: pairs are keyed by segment, and reversal is undone in the index.
pub fn orient_elements(surface: &mut IsoSurface, ctx: &IsoContext, pairing: &mut Pairing) -> OrientationReport {
    let n = surface.paths.len();
    let signs: Vec<f64> = surface
        .paths
        .par_iter()
        .map(|path| {
            let corners = cell_positions(ctx.part, path.cell);
            match pseudo_normal(&path.piece_states, &corners) {
                Ok(p) => fan_normal(&path.positions, path.center).dot(&p.vector),
                Err(_) => 0.0,
            }
        })
        .collect();
    let mut report = OrientationReport::default();
    let mut decided = vec![false; n];
    for p in 0..n {
        if signs[p] < 0.0 {
            flip_with_pairing(surface, pairing, p);
            report.flipped.push(p);
        }
        decided[p] = signs[p] != 0.0;
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&p| decided[p]).collect();
    while let Some(p) = queue.pop_front() {
        for s in 0..surface.paths[p].len() {
            let Some((q, qs)) = pairing.partner[p][s] else { continue };
            if decided[q] {
                continue;
            }
            if same_direction(surface, p, s, q, qs) {
                flip_with_pairing(surface, pairing, q);
                report.flipped.push(q);
            }
            decided[q] = true;
            report.inherited.push(q);
            queue.push_back(q);
        }
    }
    report.unresolved = (0..n).filter(|&p| !decided[p]).collect();
    report
}

fn segment_ends(surface: &IsoSurface, p: usize, s: usize) -> (usize, usize) {
    let v = &surface.path_vertices[p];
    (v[s], v[(s + 1) % v.len()])
}

fn same_direction(surface: &IsoSurface, p: usize, s: usize, q: usize, qs: usize) -> bool {
    segment_ends(surface, p, s) == segment_ends(surface, q, qs)
}

/// Reverses a path and renumbers its segments in the pairing.
fn flip_with_pairing(surface: &mut IsoSurface, pairing: &mut Pairing, p: usize) {
    let m = surface.paths[p].len();
    reverse_path(surface, p);
    let map = |s: usize| (2 * m - 2 - s) % m;
    let old_partner = pairing.partner[p].clone();
    let old_line = pairing.segment_line[p].clone();
    for s in 0..m {
        pairing.partner[p][s] = old_partner[map(s)];
        pairing.segment_line[p][s] = old_line[map(s)];
    }
    for s in 0..m {
        if let Some((q, qs)) = pairing.partner[p][s] {
            if q != p {
                pairing.partner[q][qs] = Some((p, s));
            }
        }
    }
    for rec in &mut pairing.lines {
        for inc in &mut rec.incidences {
            if inc.path == p {
                inc.segment = map(inc.segment);
            }
        }
    }
}

/// Extracted surface with its pairing, components and orientation.
#[derive(Clone, Debug)]
pub struct OrientedSurface {
    pub surface: IsoSurface,
    pub topology: SurfaceTopology,
    pub orientation: OrientationReport,
}

pub fn extract_oriented(ctx: &IsoContext) -> Result<OrientedSurface, ExtractError> {
    let mut surface = extract_context(ctx)?;
    let mut topology = analyze(&surface, ctx);
    let orientation = orient_elements(&mut surface, ctx, &mut topology.pairing);
    Ok(OrientedSurface {
        surface,
        topology,
        orientation,
    })
}

/// Matched elements that traverse their shared line in the same direction.
pub fn orientation_violations(surface: &IsoSurface, pairing: &Pairing) -> Vec<Violation> {
    let mut out = Vec::new();
    for p in 0..surface.paths.len() {
        for s in 0..surface.paths[p].len() {
            if let Some((q, qs)) = pairing.partner[p][s] {
                if p < q && same_direction(surface, p, s, q, qs) {
                    out.push(Violation {
                        kind: ViolationKind::Orientation,
                        detail: format!("paths {p} and {q}"),
                    });
                }
            }
        }
    }
    out
}

/// Oriented triangles of every element. Fan centers get indices after the
/// iso-points, in element order.
pub fn oriented_triangles(surface: &IsoSurface) -> (Vec<Vector3<f64>>, Vec<OrientedTriangle>, Vec<usize>) {
    let mut vertices: Vec<Vector3<f64>> = surface.points.iter().map(|p| p.position).collect();
    let mut tris = Vec::with_capacity(surface.triangle_count());
    let mut owner = Vec::with_capacity(surface.triangle_count());
    for (pi, path) in surface.paths.iter().enumerate() {
        let v = &surface.path_vertices[pi];
        let m = v.len();
        let mut push = |t: [usize; 3], vertices: &Vec<Vector3<f64>>| {
            let n = (vertices[t[1]] - vertices[t[0]]).cross(&(vertices[t[2]] - vertices[t[0]]));
            let normal = if n.norm() > 0.0 { n.normalize() } else { n };
            tris.push(OrientedTriangle { vertices: t, normal });
            owner.push(pi);
        };
        if m == 3 {
            push([v[0], v[1], v[2]], &vertices);
        } else {
            vertices.push(path.center);
            let c = vertices.len() - 1;
            for i in 0..m {
                push([v[i], v[(i + 1) % m], c], &vertices);
            }
        }
    }
    (vertices, tris, owner)
}

/// Cyclic sequence of elements around an iso-point, chained through matched
/// iso-lines that contain the point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborRing {
    pub point: usize,
    pub paths: Vec<usize>,
    /// `neighbors[i]` is the far end of the line between `paths[i]` and `paths[i + 1]`.
    pub neighbors: Vec<usize>,
    pub closed: bool,
}

/// Every neighbor ring of every iso-point.
pub fn neighbor_rings(surface: &IsoSurface, pairing: &Pairing) -> Vec<NeighborRing> {
    let mut occ: Vec<Vec<(usize, usize)>> = vec![Vec::new(); surface.points.len()];
    for (p, verts) in surface.path_vertices.iter().enumerate() {
        for (i, &v) in verts.iter().enumerate() {
            occ[v].push((p, i));
        }
    }
    occ.par_iter()
        .enumerate()
        .flat_map_iter(|(v, list)| rings_at(surface, pairing, v, list))
        .collect()
}

/// Rings through one point.
pub fn rings_at(surface: &IsoSurface, pairing: &Pairing, v: usize, occ: &[(usize, usize)]) -> Vec<NeighborRing> {
    let mut visited: HashSet<usize> = HashSet::new();
    let mut out = Vec::new();
    for &(p0, i0) in occ {
        if visited.contains(&p0) {
            continue;
        }
        let mut ring = NeighborRing {
            point: v,
            paths: Vec::new(),
            neighbors: Vec::new(),
            closed: false,
        };
        let (mut p, mut i, mut exit) = (p0, i0, i0);
        loop {
            visited.insert(p);
            ring.paths.push(p);
            let verts = &surface.path_vertices[p];
            let m = verts.len();
            let other = if exit == i { verts[(i + 1) % m] } else { verts[(i + m - 1) % m] };
            ring.neighbors.push(other);
            let Some((q, qs)) = pairing.partner[p][exit] else { break };
            let qv = &surface.path_vertices[q];
            let mq = qv.len();
            let (iq, exit_q) = if qv[qs] == v { (qs, (qs + mq - 1) % mq) } else { ((qs + 1) % mq, (qs + 1) % mq) };
            if q == p0 {
                ring.closed = true;
                break;
            }
            if visited.contains(&q) {
                break;
            }
            p = q;
            i = iq;
            exit = exit_q;
        }
        out.push(ring);
    }
    out
}

/// One-ring patch around an iso-point.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceRegion {
    pub point: usize,
    pub position: Vector3<f64>,
    pub neighbors: Vec<usize>,
    pub centers: Vec<Vector3<f64>>,
    /// Triangles with the region's point first, oriented like their element.
    pub triangles: Vec<[Vector3<f64>; 3]>,
    /// Non-center points of the patch: neighbor iso-points and fan centers.
    pub points: Vec<Vector3<f64>>,
}

/// `Tri(P, P_i, P_{i+1})` for triangular and outer paths, two center-linked
/// triangles otherwise.
pub fn surface_region(surface: &IsoSurface, ring: &NeighborRing) -> SurfaceRegion {
    let v = ring.point;
    let x = surface.points[v].position;
    let mut triangles = Vec::with_capacity(2 * ring.paths.len());
    let mut centers = Vec::new();
    let mut points: Vec<Vector3<f64>> = Vec::new();
    for &p in &ring.paths {
        let path = &surface.paths[p];
        let verts = &surface.path_vertices[p];
        let m = verts.len();
        let i = verts.iter().position(|&w| w == v).expect("ring path contains its point");
        let next = surface.points[verts[(i + 1) % m]].position;
        let prev = surface.points[verts[(i + m - 1) % m]].position;
        for y in [next, prev] {
            if !points.contains(&y) {
                points.push(y);
            }
        }
        if m == 3 || path.kind == PathKind::Outer {
            triangles.push([x, next, prev]);
        } else {
            triangles.push([x, next, path.center]);
            triangles.push([x, path.center, prev]);
            centers.push(path.center);
            points.push(path.center);
        }
    }
    SurfaceRegion {
        point: v,
        position: x,
        neighbors: ring.neighbors.clone(),
        centers,
        triangles,
        points,
    }
}

/// Area attributed to the center vertex of each triangle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AreaWeighting {
    /// Voronoi area, with the obtuse-triangle correction.
    #[default]
    Mixed,
    OneThird,
    /// Triangle area split evenly among its iso-point vertices; fan centers
    /// take no share.
    IsoPoints,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureEstimate {
    /// `H = -(Delta x) . n`; `2/R` on a sphere with outward normal.
    pub h: f64,
    pub area: f64,
    pub normal: Vector3<f64>,
    pub excluded_triangles: usize,
    pub valid: bool,
}

fn cot(u: Vector3<f64>, v: Vector3<f64>) -> f64 {
    u.dot(&v) / u.cross(&v).norm()
}

/// Cotangent Laplace-Beltrami of the position at the region's point.
pub fn mean_curvature(region: &SurfaceRegion, weighting: AreaWeighting) -> CurvatureEstimate {
    let x = region.position;
    let mut lap = Vector3::zeros();
    let mut area = 0.0;
    let mut normal = Vector3::zeros();
    let mut excluded = 0;
    for t in &region.triangles {
        let (a, b) = (t[1], t[2]);
        let (ea, eb) = (a - x, b - x);
        let n = ea.cross(&eb);
        let tri_area = 0.5 * n.norm();
        let scale = ea.norm().max(eb.norm()).max((b - a).norm());
        if !(tri_area > 1e-12 * scale * scale) {
            excluded += 1;
            continue;
        }
        let cot_a = cot(x - a, b - a);
        let cot_b = cot(x - b, a - b);
        lap += ea * cot_b + eb * cot_a;
        normal += n;
        area += match weighting {
            AreaWeighting::OneThird => tri_area / 3.0,
            AreaWeighting::IsoPoints => {
                let centers = [a, b].iter().filter(|p| region.centers.contains(p)).count();
                tri_area / (3 - centers) as f64
            }
            AreaWeighting::Mixed => {
                let obtuse_at_x = ea.dot(&eb) < 0.0;
                let obtuse_other = (x - a).dot(&(b - a)) < 0.0 || (x - b).dot(&(a - b)) < 0.0;
                if obtuse_at_x {
                    tri_area / 2.0
                } else if obtuse_other {
                    tri_area / 4.0
                } else {
                    (ea.norm_squared() * cot_b + eb.norm_squared() * cot_a) / 8.0
                }
            }
        };
    }
    let valid = area > 0.0 && normal.norm() > 0.0;
    if !valid {
        return CurvatureEstimate {
            h: f64::NAN,
            area,
            normal,
            excluded_triangles: excluded,
            valid,
        };
    }
    let n = normal.normalize();
    let delta = lap / (2.0 * area);
    CurvatureEstimate {
        h: -delta.dot(&n),
        area,
        normal: n,
        excluded_triangles: excluded,
        valid,
    }
}

/// Curvature at every iso-point with exactly one closed ring; `None` elsewhere.
pub fn point_curvatures(surface: &IsoSurface, pairing: &Pairing, weighting: AreaWeighting) -> Vec<Option<CurvatureEstimate>> {
    let rings = neighbor_rings(surface, pairing);
    let mut per_point: HashMap<usize, Vec<&NeighborRing>> = HashMap::new();
    for r in &rings {
        per_point.entry(r.point).or_default().push(r);
    }
    (0..surface.points.len())
        .into_par_iter()
        .map(|v| match per_point.get(&v).map(Vec::as_slice) {
            Some([r]) if r.closed => {
                let est = mean_curvature(&surface_region(surface, r), weighting);
                est.valid.then_some(est)
            }
            _ => None,
        })
        .collect()
}

//! Iso-points, iso-lines and iso-paths: per irreducible graph, per cell and
//! over a whole grid.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use nalgebra::Vector3;
use rayon::prelude::*;
use thiserror::Error;

use crate::cube_graph::{
    classify_face_states, disperse_mask, edge_between, face_axis, face_is_high, face_mask,
    face_states, opposite_face, snap_label, FaceClass, LabeledCuboidGraph, NodeState, States,
    AXIS_BIT, EDGES, FACES, NEIGHBORS,
};
use crate::rewrite_rules::{
    decompose, is_reducible_states, strip_singular_and_isolated, FaceNeighbors, RuleError,
    RuleKind,
};
use crate::scalar_grid::{cell_positions, CuboidPartition, GridError, NodeLabeling};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtractError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("cell {cell:?}: graph is reducible")]
    Reducible { cell: [usize; 3] },
    #[error("cell {cell:?}: graph has no regular face")]
    NoPath { cell: [usize; 3] },
    #[error("cell {cell:?}: face {face} does not carry exactly two iso-points")]
    FacePoints { cell: [usize; 3], face: usize },
    #[error("cell {cell:?}: iso-lines do not close into one simple cycle")]
    NotACycle { cell: [usize; 3] },
}

/// Iso-point location inside one cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LocalPoint {
    /// An iso-node at a cell corner.
    Corner(u8),
    /// A point strictly inside a cell edge.
    Edge(u8),
}

impl LocalPoint {
    /// Corners the point lies on or between.
    pub fn corners(self) -> u8 {
        match self {
            LocalPoint::Corner(c) => 1 << c,
            LocalPoint::Edge(e) => {
                let [a, b] = EDGES[e as usize];
                (1 << a) | (1 << b)
            }
        }
    }

    /// Same point seen from the face neighbor across an axis: corner `c` maps to `c ^ bit`.
    pub fn flipped(self, bit: usize) -> LocalPoint {
        match self {
            LocalPoint::Corner(c) => LocalPoint::Corner((c as usize ^ bit) as u8),
            LocalPoint::Edge(e) => {
                let [a, b] = EDGES[e as usize];
                LocalPoint::Edge(edge_between(a ^ bit, b ^ bit).unwrap() as u8)
            }
        }
    }
}

/// Lattice-global iso-point key. Node ids index the vertex lattice; edge ids
/// are `3 * lower_vertex + axis`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointKey {
    Node(usize),
    Edge(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IsoPointKind {
    EdgeInterior,
    IsoNode,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsoPoint {
    pub key: PointKey,
    pub position: Vector3<f64>,
    /// Global id of the host edge, oriented from its lower lattice vertex.
    pub host_edge: usize,
    /// Labels at the lower and upper end of the host edge.
    pub f: [f64; 2],
    pub kind: IsoPointKind,
}

/// Linear interpolation along an edge. Returns the iso-point when
/// `f0 <= c < f1` or `f1 <= c < f0`.
pub fn interpolate_edge(
    x0: &Vector3<f64>,
    x1: &Vector3<f64>,
    f0: f64,
    f1: f64,
    c: f64,
) -> Option<(Vector3<f64>, IsoPointKind)> {
    let crosses = (f0 <= c && c < f1) || (f1 <= c && c < f0);
    if !crosses {
        return None;
    }
    if f0 == c {
        return Some((*x0, IsoPointKind::IsoNode));
    }
    if f1 == c {
        return Some((*x1, IsoPointKind::IsoNode));
    }
    let t = (c - f0) / (f1 - f0);
    Some((x0 + (x1 - x0) * t, IsoPointKind::EdgeInterior))
}

/// The iso-point of edge `a`-`b` under the given states, if any.
pub fn local_point(s: &States, a: usize, b: usize) -> Option<LocalPoint> {
    if s[a].is_disperse() == s[b].is_disperse() {
        return None;
    }
    let cont = if s[a].is_disperse() { b } else { a };
    if s[cont] == NodeState::Iso {
        Some(LocalPoint::Corner(cont as u8))
    } else {
        Some(LocalPoint::Edge(edge_between(a, b).unwrap() as u8))
    }
}

/// Position of a local point in a graph whose crossing edges carry their
/// original labels.
pub fn point_position(g: &LabeledCuboidGraph, p: LocalPoint) -> Vector3<f64> {
    match p {
        LocalPoint::Corner(c) => g.positions[c as usize],
        LocalPoint::Edge(e) => {
            let [a, b] = EDGES[e as usize];
            let (x0, x1) = (&g.positions[a], &g.positions[b]);
            match interpolate_edge(x0, x1, g.labels[a], g.labels[b], g.iso) {
                Some((x, _)) => x,
                None => x0 + (x1 - x0) * 0.5,
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LineKind {
    FaceChord,
    FaceDiagonal,
    LatticeEdge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IsoLine {
    pub a: LocalPoint,
    pub b: LocalPoint,
    pub face: usize,
    pub kind: LineKind,
}

impl IsoLine {
    pub fn new(a: LocalPoint, b: LocalPoint, face: usize) -> Self {
        let kind = match (a, b) {
            (LocalPoint::Corner(x), LocalPoint::Corner(y)) => {
                if edge_between(x as usize, y as usize).is_some() {
                    LineKind::LatticeEdge
                } else {
                    LineKind::FaceDiagonal
                }
            }
            _ => LineKind::FaceChord,
        };
        IsoLine { a, b, face, kind }
    }
}

/// The face a segment lies on, and the disperse corners of that face on the
/// segment's disperse side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Segment {
    pub face: usize,
    pub disperse: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PathKind {
    Inner,
    Outer,
}

/// A closed cycle of iso-lines. Segment `i` joins `points[i]` and
/// `points[(i + 1) % m]`.
#[derive(Clone, Debug, PartialEq)]
pub struct IsoPath {
    pub cell: [usize; 3],
    pub kind: PathKind,
    /// S-rule that peeled the path off, `None` for a rest-graph or outer path.
    pub rule: Option<RuleKind>,
    pub points: Vec<LocalPoint>,
    pub positions: Vec<Vector3<f64>>,
    pub segments: Vec<Segment>,
    /// States of the irreducible graph the path belongs to.
    pub piece_states: States,
    pub center: Vector3<f64>,
}

impl IsoPath {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn lines(&self) -> Vec<IsoLine> {
        let m = self.len();
        (0..m)
            .map(|i| IsoLine::new(self.points[i], self.points[(i + 1) % m], self.segments[i].face))
            .collect()
    }

    /// Reverses the traversal direction, keeping segments attached to their points.
    pub fn reverse(&mut self) {
        let m = self.len();
        self.points.reverse();
        self.positions.reverse();
        let old = self.segments.clone();
        for i in 0..m {
            self.segments[i] = old[(2 * m - 2 - i) % m];
        }
    }

    pub fn element(&self) -> IsoElement {
        IsoElement::from_path(&self.positions, self.center)
    }
}

/// Triangle fan `[P_1..P_n | P_c]`; a single triangle when `n = 3`.
#[derive(Clone, Debug, PartialEq)]
pub struct IsoElement {
    pub center: Vector3<f64>,
    pub triangles: Vec<[Vector3<f64>; 3]>,
}

impl IsoElement {
    pub fn from_path(points: &[Vector3<f64>], center: Vector3<f64>) -> Self {
        let m = points.len();
        let triangles = if m == 3 {
            vec![[points[0], points[1], points[2]]]
        } else {
            (0..m).map(|i| [points[i], points[(i + 1) % m], center]).collect()
        };
        IsoElement { center, triangles }
    }

    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| 0.5 * (t[1] - t[0]).cross(&(t[2] - t[0])).norm())
            .sum()
    }
}

#[derive(Clone, Copy, Debug)]
struct RawLine {
    a: LocalPoint,
    b: LocalPoint,
    face: usize,
    disperse: u8,
}

impl RawLine {
    fn key(&self) -> (LocalPoint, LocalPoint) {
        (self.a.min(self.b), self.a.max(self.b))
    }
}

/// The single iso-line of a regular face.
pub fn face_line(s: &States, face: usize) -> Option<(LocalPoint, LocalPoint)> {
    let f = FACES[face];
    let mut pts: Vec<LocalPoint> = Vec::with_capacity(4);
    for i in 0..4 {
        if let Some(p) = local_point(s, f[i], f[(i + 1) % 4]) {
            if !pts.contains(&p) {
                pts.push(p);
            }
        }
    }
    (pts.len() == 2).then(|| (pts[0], pts[1]))
}

/// Orders lines into one simple cycle of at least three points.
fn assemble(lines: &[RawLine]) -> Option<(Vec<LocalPoint>, Vec<usize>)> {
    let mut adj: BTreeMap<LocalPoint, Vec<(LocalPoint, usize)>> = BTreeMap::new();
    for (k, l) in lines.iter().enumerate() {
        adj.entry(l.a).or_default().push((l.b, k));
        adj.entry(l.b).or_default().push((l.a, k));
    }
    if adj.values().any(|v| v.len() != 2) {
        return None;
    }
    let start = *adj.keys().next()?;
    let mut points = vec![start];
    let mut order = Vec::with_capacity(lines.len());
    let mut used = vec![false; lines.len()];
    let mut cur = start;
    loop {
        let next = adj[&cur].iter().filter(|(_, k)| !used[*k]).min().copied();
        let Some((p, k)) = next else { break };
        used[k] = true;
        order.push(k);
        if p == start {
            break;
        }
        points.push(p);
        cur = p;
    }
    (order.len() == lines.len() && points.len() >= 3).then_some((points, order))
}

fn build_path(
    g: &LabeledCuboidGraph,
    kind: PathKind,
    rule: Option<RuleKind>,
    lines: &[RawLine],
    piece_states: States,
) -> Result<IsoPath, ExtractError> {
    let (points, order) = assemble(lines).ok_or(ExtractError::NotACycle { cell: g.cell })?;
    let positions: Vec<Vector3<f64>> = points.iter().map(|&p| point_position(g, p)).collect();
    let center = positions.iter().sum::<Vector3<f64>>() / positions.len() as f64;
    let segments = order
        .iter()
        .map(|&k| Segment {
            face: lines[k].face,
            disperse: lines[k].disperse,
        })
        .collect();
    Ok(IsoPath {
        cell: g.cell,
        kind,
        rule,
        points,
        positions,
        segments,
        piece_states,
        center,
    })
}

/// The one iso-path of an irreducible graph: one C-rule iso-line per regular
/// face, joined into a cycle.
pub fn inner_isopath(g: &LabeledCuboidGraph) -> Result<IsoPath, ExtractError> {
    let s = g.states();
    if is_reducible_states(&s) {
        return Err(ExtractError::Reducible { cell: g.cell });
    }
    let dm = disperse_mask(&s);
    let mut lines = Vec::with_capacity(6);
    for f in 0..6 {
        if classify_face_states(face_states(&s, f)) == FaceClass::RegularFace {
            let (a, b) = face_line(&s, f).ok_or(ExtractError::FacePoints { cell: g.cell, face: f })?;
            lines.push(RawLine {
                a,
                b,
                face: f,
                disperse: face_mask(f) & dm,
            });
        }
    }
    if lines.is_empty() {
        return Err(ExtractError::NoPath { cell: g.cell });
    }
    build_path(g, PathKind::Inner, None, &lines, s)
}

/// Inner iso-paths of one cell together with its stripped states.
#[derive(Clone, Debug, PartialEq)]
pub struct CellPaths {
    pub cell: [usize; 3],
    pub stripped: States,
    pub paths: Vec<IsoPath>,
}

/// Strip, decompose and extract every inner iso-path of a cell.
pub fn extract_inner(g: &LabeledCuboidGraph, nb: &FaceNeighbors) -> Result<CellPaths, ExtractError> {
    let stripped = strip_singular_and_isolated(g, nb);
    let ss = stripped.states();
    let dm = disperse_mask(&ss);
    let mut paths = Vec::new();
    if dm != 0 && dm != 0xff {
        let dec = decompose(&stripped)?;
        for piece in &dec.pieces {
            let mut p = inner_isopath(&piece.graph)?;
            p.rule = Some(piece.kind);
            paths.push(p);
        }
        let rm = disperse_mask(&dec.rest.states());
        if rm != 0 && rm != 0xff {
            paths.push(inner_isopath(&dec.rest)?);
        }
        for p in &mut paths {
            for s in &mut p.segments {
                s.disperse &= dm;
            }
        }
    }
    Ok(CellPaths {
        cell: g.cell,
        stripped: ss,
        paths,
    })
}

fn lines_on_face(paths: &[IsoPath], face: usize) -> Vec<RawLine> {
    paths
        .iter()
        .filter(|p| p.kind == PathKind::Inner)
        .flat_map(|p| {
            let m = p.len();
            (0..m).filter(move |&i| p.segments[i].face == face).map(move |i| RawLine {
                a: p.points[i],
                b: p.points[(i + 1) % m],
                face,
                disperse: p.segments[i].disperse,
            })
        })
        .collect()
}

fn flip_mask(m: u8, bit: usize) -> u8 {
    (0..8).filter(|&c| m & (1 << c) != 0).fold(0, |acc, c| acc | (1 << (c ^ bit)))
}

fn disperse_connected_within(s: &States, a: usize, b: usize) -> bool {
    let mut seen = 1u8 << a;
    let mut stack = vec![a];
    while let Some(x) = stack.pop() {
        for &n in &NEIGHBORS[x] {
            if s[n].is_disperse() && seen & (1 << n) == 0 {
                seen |= 1 << n;
                stack.push(n);
            }
        }
    }
    seen & (1 << b) != 0
}

/// Face-resident iso-path on a shared face (a high face of `owner`), emitted
/// when the two cells disagree on the face's iso-lines.
pub fn outer_isopath(
    face: usize,
    owner_graph: &LabeledCuboidGraph,
    owner: &CellPaths,
    neighbor: &CellPaths,
) -> Option<IsoPath> {
    debug_assert!(face_is_high(face));
    let bit = AXIS_BIT[face_axis(face)];
    let nface = opposite_face(face);
    let own_fs = face_states(&owner.stripped, face);
    let nb_fs = face_states(&neighbor.stripped, nface);
    if classify_face_states(own_fs) != FaceClass::NonTrivialLFace
        && classify_face_states(nb_fs) != FaceClass::NonTrivialLFace
    {
        return None;
    }
    let own = lines_on_face(&owner.paths, face);
    let nb: Vec<RawLine> = lines_on_face(&neighbor.paths, nface)
        .into_iter()
        .map(|l| RawLine {
            a: l.a.flipped(bit),
            b: l.b.flipped(bit),
            face,
            disperse: flip_mask(l.disperse, bit),
        })
        .collect();
    let own_keys: BTreeSet<_> = own.iter().map(RawLine::key).collect();
    let nb_keys: BTreeSet<_> = nb.iter().map(RawLine::key).collect();
    if own_keys == nb_keys {
        return None;
    }
    let mut seen = BTreeSet::new();
    let union: Vec<RawLine> = own.iter().chain(nb.iter()).filter(|l| seen.insert(l.key())).copied().collect();
    assemble(&union)?;

    let wide = |ls: &[RawLine]| ls.iter().any(|l| l.disperse.count_ones() >= 2);
    let owner_disperse_side = match (wide(&own), wide(&nb)) {
        (true, false) => true,
        (false, true) => false,
        _ => {
            let ds: Vec<usize> = FACES[face].into_iter().filter(|&c| owner.stripped[c].is_disperse()).collect();
            ds.len() == 2 && disperse_connected_within(&owner.stripped, ds[0], ds[1])
        }
    };
    let fm = face_mask(face);
    let piece_states: States = std::array::from_fn(|c| {
        if fm & (1 << c) != 0 {
            owner.stripped[c]
        } else if owner_disperse_side {
            NodeState::Disperse
        } else {
            NodeState::Sub
        }
    });
    build_path(owner_graph, PathKind::Outer, None, &union, piece_states).ok()
}

/// Read-only grid data shared by every per-cell extraction: snapped labels and
/// node states on the vertex lattice.
#[derive(Clone, Debug)]
pub struct IsoContext<'a> {
    pub part: &'a CuboidPartition,
    pub labels: Vec<f64>,
    pub states: Vec<NodeState>,
    pub iso: f64,
}

impl<'a> IsoContext<'a> {
    pub fn new(labels: &NodeLabeling, part: &'a CuboidPartition, c: f64, tol: f64) -> Result<Self, ExtractError> {
        if !(c > 0.0 && c < 1.0) {
            return Err(GridError::InvalidIso(c).into());
        }
        labels.check(part)?;
        let snapped: Vec<f64> = labels.values.par_iter().map(|&x| snap_label(x, c, tol)).collect();
        let states = snapped.par_iter().map(|&x| NodeState::of(x, c)).collect();
        Ok(IsoContext {
            part,
            labels: snapped,
            states,
            iso: c,
        })
    }

    pub fn vertex_id(&self, cell: [usize; 3], corner: usize) -> usize {
        self.part.vertex_index(self.part.corner_vertex(cell, corner))
    }

    pub fn cell_states(&self, cell: [usize; 3]) -> States {
        std::array::from_fn(|c| self.states[self.vertex_id(cell, c)])
    }

    pub fn cell_graph(&self, cell: [usize; 3]) -> LabeledCuboidGraph {
        let labels = std::array::from_fn(|c| self.labels[self.vertex_id(cell, c)]);
        LabeledCuboidGraph::new(cell_positions(self.part, cell), labels, self.iso, cell)
    }

    /// Cell across a face, if inside the grid.
    pub fn neighbor(&self, cell: [usize; 3], face: usize) -> Option<[usize; 3]> {
        let a = face_axis(face);
        let mut n = cell;
        if face_is_high(face) {
            n[a] += 1;
            (n[a] < self.part.dims[a]).then_some(n)
        } else {
            n[a] = n[a].checked_sub(1)?;
            Some(n)
        }
    }

    pub fn face_neighbors(&self, cell: [usize; 3]) -> FaceNeighbors {
        let mut out = FaceNeighbors::NONE;
        for f in 0..6 {
            if self.neighbor(cell, f).is_none() {
                continue;
            }
            let a = face_axis(f);
            out.far[f] = Some(FACES[f].map(|c| {
                let mut v = self.part.corner_vertex(cell, c);
                if face_is_high(f) {
                    v[a] += 1;
                } else {
                    v[a] -= 1;
                }
                self.states[self.part.vertex_index(v)]
            }));
        }
        out
    }

    pub fn point_key(&self, cell: [usize; 3], p: LocalPoint) -> PointKey {
        match p {
            LocalPoint::Corner(c) => PointKey::Node(self.vertex_id(cell, c as usize)),
            LocalPoint::Edge(e) => {
                let a = EDGES[e as usize][0];
                PointKey::Edge(self.vertex_id(cell, a) * 3 + e as usize / 4)
            }
        }
    }

    /// Inner paths of a cell.
    pub fn cell_paths(&self, cell: [usize; 3]) -> Result<CellPaths, ExtractError> {
        extract_inner(&self.cell_graph(cell), &self.face_neighbors(cell))
    }

    /// Stripped states of a cell.
    pub fn stripped_states(&self, cell: [usize; 3]) -> States {
        let s = self.cell_states(cell);
        crate::rewrite_rules::strip_states(&s, &self.face_neighbors(cell))
    }
}

fn uniform(s: &States) -> bool {
    let dm = disperse_mask(s);
    (dm == 0 && !s.contains(&NodeState::Iso)) || dm == 0xff
}

/// All iso-paths a cell emits: its inner paths plus outer paths on its high faces.
pub fn extract_cell(ctx: &IsoContext, cell: [usize; 3]) -> Result<Vec<IsoPath>, ExtractError> {
    let s = ctx.cell_states(cell);
    if uniform(&s) {
        return Ok(Vec::new());
    }
    let g = ctx.cell_graph(cell);
    let own = extract_inner(&g, &ctx.face_neighbors(cell))?;
    let mut paths = own.paths.clone();
    for face in [1, 3, 5] {
        if classify_face_states(face_states(&s, face)) != FaceClass::NonTrivialLFace {
            continue;
        }
        let Some(ncell) = ctx.neighbor(cell, face) else { continue };
        let nb = ctx.cell_paths(ncell)?;
        if let Some(p) = outer_isopath(face, &g, &own, &nb) {
            paths.push(p);
        }
    }
    Ok(paths)
}

/// The welded iso-surface of a grid: all iso-elements, cell-major.
#[derive(Clone, Debug, PartialEq)]
pub struct IsoSurface {
    pub iso: f64,
    pub points: Vec<IsoPoint>,
    pub paths: Vec<IsoPath>,
    /// Welded point indices of every path, aligned with `IsoPath::points`.
    pub path_vertices: Vec<Vec<usize>>,
}

impl IsoSurface {
    pub fn point_index(&self) -> HashMap<PointKey, usize> {
        self.points.iter().enumerate().map(|(i, p)| (p.key, i)).collect()
    }

    pub fn elements(&self) -> Vec<IsoElement> {
        self.paths.iter().map(IsoPath::element).collect()
    }

    pub fn triangle_count(&self) -> usize {
        self.paths.iter().map(|p| if p.len() == 3 { 1 } else { p.len() }).sum()
    }

    pub fn area(&self) -> f64 {
        self.elements().iter().map(IsoElement::area).sum()
    }
}

pub fn extract_grid(labels: &NodeLabeling, part: &CuboidPartition, c: f64) -> Result<IsoSurface, ExtractError> {
    extract_grid_with_tolerance(labels, part, c, crate::cube_graph::DEFAULT_ISO_TOLERANCE)
}

pub fn extract_grid_with_tolerance(
    labels: &NodeLabeling,
    part: &CuboidPartition,
    c: f64,
    tol: f64,
) -> Result<IsoSurface, ExtractError> {
    let ctx = IsoContext::new(labels, part, c, tol)?;
    extract_context(&ctx)
}

pub fn extract_context(ctx: &IsoContext) -> Result<IsoSurface, ExtractError> {
    let part = ctx.part;
    let per_cell: Vec<Vec<IsoPath>> = (0..part.cell_count())
        .into_par_iter()
        .map(|id| extract_cell(ctx, part.cell_coords(id)))
        .collect::<Result<_, _>>()?;
    let mut surface = IsoSurface {
        iso: ctx.iso,
        points: Vec::new(),
        paths: Vec::new(),
        path_vertices: Vec::new(),
    };
    let mut index: HashMap<PointKey, usize> = HashMap::new();
    for path in per_cell.into_iter().flatten() {
        let verts = path
            .points
            .iter()
            .zip(&path.positions)
            .map(|(&p, x)| {
                let key = ctx.point_key(path.cell, p);
                *index.entry(key).or_insert_with(|| {
                    surface.points.push(make_point(ctx, path.cell, p, key, *x));
                    surface.points.len() - 1
                })
            })
            .collect();
        surface.path_vertices.push(verts);
        surface.paths.push(path);
    }
    Ok(surface)
}

fn make_point(ctx: &IsoContext, cell: [usize; 3], p: LocalPoint, key: PointKey, position: Vector3<f64>) -> IsoPoint {
    let (a, b, kind) = match p {
        LocalPoint::Edge(e) => {
            let [a, b] = EDGES[e as usize];
            (a, b, IsoPointKind::EdgeInterior)
        }
        LocalPoint::Corner(c) => {
            let c = c as usize;
            let n = *NEIGHBORS[c]
                .iter()
                .max_by(|&&x, &&y| {
                    let lx = ctx.labels[ctx.vertex_id(cell, x)];
                    let ly = ctx.labels[ctx.vertex_id(cell, y)];
                    lx.total_cmp(&ly).then(y.cmp(&x))
                })
                .unwrap();
            (c.min(n), c.max(n), IsoPointKind::IsoNode)
        }
    };
    let e = edge_between(a, b).unwrap();
    let (va, vb) = (ctx.vertex_id(cell, a), ctx.vertex_id(cell, b));
    IsoPoint {
        key,
        position,
        host_edge: va * 3 + e / 4,
        f: [ctx.labels[va], ctx.labels[vb]],
        kind,
    }
}

/// Outward unit normal of a cell face.
pub fn face_normal(face: usize) -> Vector3<f64> {
    let mut n = Vector3::zeros();
    n[face_axis(face)] = if face_is_high(face) { 1.0 } else { -1.0 };
    n
}

/// Orientation evidence from face geometry: negative when the path runs so
/// that its fan normal points from the disperse to the continuous side.
pub fn face_orientation_score(path: &IsoPath, corners: &[Vector3<f64>; 8]) -> i32 {
    let m = path.len();
    let mut score = 0;
    for i in 0..m {
        let seg = path.segments[i];
        let mut mask = seg.disperse;
        if mask == 0 {
            mask = face_mask(seg.face) & disperse_mask(&path.piece_states);
        }
        if mask == 0 {
            continue;
        }
        let d = corners[mask.trailing_zeros() as usize];
        let p = path.positions[i];
        let q = path.positions[(i + 1) % m];
        let v = (q - p).cross(&(d - p)).dot(&face_normal(seg.face));
        score += if v < 0.0 {
            -1
        } else if v > 0.0 {
            1
        } else {
            0
        };
    }
    score
}

/// Pseudo-normal of the path's irreducible graph: `sum_{i in N_c} sum_{j in N_d} (C_i - D_j)`.
pub fn piece_pseudo_normal(states: &States, corners: &[Vector3<f64>; 8]) -> Vector3<f64> {
    let nd = states.iter().filter(|s| s.is_disperse()).count() as f64;
    let sum_all: Vector3<f64> = corners.iter().sum();
    let sum_d: Vector3<f64> = (0..8).filter(|&c| states[c].is_disperse()).map(|c| corners[c]).sum();
    sum_all * nd - sum_d * 8.0
}

/// Reorders a path so its fan normal points from the disperse to the
/// continuous side. Inner paths use face geometry; outer paths, which lie in
/// one face, use the pseudo-normal of their synthetic states.
pub fn orient_path(path: &mut IsoPath, corners: &[Vector3<f64>; 8]) {
    let flip = match path.kind {
        PathKind::Inner => face_orientation_score(path, corners) > 0,
        PathKind::Outer => {
            let p = piece_pseudo_normal(&path.piece_states, corners);
            fan_normal(&path.positions, path.center).dot(&p) < 0.0
        }
    };
    if flip {
        path.reverse();
    }
}

/// Area vector of a fan (sum of triangle cross products, halved).
pub fn fan_normal(points: &[Vector3<f64>], center: Vector3<f64>) -> Vector3<f64> {
    let m = points.len();
    (0..m)
        .map(|i| (points[i] - center).cross(&(points[(i + 1) % m] - center)))
        .sum::<Vector3<f64>>()
        * 0.5
}

fn polygon_area(pts: &[Vector3<f64>]) -> f64 {
    if pts.len() < 3 {
        return 0.0;
    }
    let m = pts.len();
    (0..m)
        .map(|i| pts[i].cross(&pts[(i + 1) % m]))
        .sum::<Vector3<f64>>()
        .norm()
        * 0.5
}

/// Area of a face's disperse part, consistent with the cell's iso-lines.
fn face_disperse_area(g: &LabeledCuboidGraph, cp: &CellPaths, face: usize, origin: &Vector3<f64>) -> f64 {
    let s = &cp.stripped;
    let f = FACES[face];
    let pos = |p: LocalPoint| point_position(g, p) - origin;
    let corner = |c: usize| g.positions[c] - origin;
    let class = classify_face_states(face_states(s, face));
    let walk = || {
        let mut pts: Vec<Vector3<f64>> = Vec::with_capacity(8);
        for i in 0..4 {
            let (c, n) = (f[i], f[(i + 1) % 4]);
            if s[c].is_disperse() {
                pts.push(corner(c));
            }
            if let Some(p) = local_point(s, c, n) {
                let x = pos(p);
                if pts.last() != Some(&x) {
                    pts.push(x);
                }
            }
        }
        if pts.len() > 1 && pts.first() == pts.last() {
            pts.pop();
        }
        polygon_area(&pts)
    };
    match class {
        FaceClass::ContinuousFace => 0.0,
        FaceClass::DisperseFace | FaceClass::SingularFace => polygon_area(&f.map(corner)),
        FaceClass::RegularFace => walk(),
        FaceClass::TrivialLFace | FaceClass::NonTrivialLFace => {
            let separated = lines_on_face(&cp.paths, face).iter().any(|l| l.disperse.count_ones() == 1);
            if separated {
                (0..4)
                    .filter(|&i| s[f[i]].is_disperse())
                    .map(|i| {
                        let (p, c, n) = (f[(i + 3) % 4], f[i], f[(i + 1) % 4]);
                        let a = pos(local_point(s, p, c).unwrap());
                        let b = pos(local_point(s, c, n).unwrap());
                        polygon_area(&[corner(c), b, a])
                    })
                    .sum()
            } else {
                walk()
            }
        }
    }
}

/// Volume of the disperse part of one cell, by the divergence theorem with the
/// cell's lowest corner as origin: iso-element fans plus the disperse parts of
/// the three high faces.
pub fn cell_disperse_volume(ctx: &IsoContext, cell: [usize; 3]) -> Result<f64, ExtractError> {
    let part = ctx.part;
    let s = ctx.cell_states(cell);
    let dm = disperse_mask(&s);
    if dm == 0xff {
        return Ok(part.cell_volume());
    }
    if dm == 0 {
        return Ok(0.0);
    }
    let g = ctx.cell_graph(cell);
    let cp = extract_inner(&g, &ctx.face_neighbors(cell))?;
    let sm = disperse_mask(&cp.stripped);
    if sm == 0xff {
        return Ok(part.cell_volume());
    }
    let origin = g.positions[0];
    let mut vol = 0.0;
    for path in &cp.paths {
        let mut p = path.clone();
        orient_path(&mut p, &g.positions);
        let pts: Vec<Vector3<f64>> = p.positions.iter().map(|x| x - origin).collect();
        let c = p.center - origin;
        for t in IsoElement::from_path(&pts, c).triangles {
            vol += t[0].dot(&t[1].cross(&t[2])) / 6.0;
        }
    }
    for face in [1, 3, 5] {
        let h = part.spacing[face_axis(face)];
        vol += h * face_disperse_area(&g, &cp, face, &origin) / 3.0;
    }
    Ok(vol)
}

//! Systems of graphs, disperse paths, pairing of iso-paths at shared
//! iso-lines, surface components and the connectivity audit.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use rayon::prelude::*;

use crate::cube_graph::{faces_containing, States, EDGES};
use crate::isopath_extract::{
    ExtractError, IsoContext, IsoSurface, LineKind, PathKind, PointKey,
};
use crate::scalar_grid::CuboidPartition;
use crate::rewrite_rules::has_local_strip_pattern;

/// The cells sharing a face or an edge with a center cell, center included.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphNeighborhood {
    pub center: [usize; 3],
    pub cells: Vec<[usize; 3]>,
    /// Fewer than 19 cells because the center touches the domain boundary.
    pub truncated: bool,
}

pub fn build_neighborhood(cell: [usize; 3], part: &CuboidPartition) -> GraphNeighborhood {
    let mut cells = Vec::with_capacity(19);
    for dx in -1i64..=1 {
        for dy in -1i64..=1 {
            for dz in -1i64..=1 {
                let nonzero = [dx, dy, dz].iter().filter(|&&d| d != 0).count();
                if nonzero == 3 {
                    continue;
                }
                let c = [cell[0] as i64 + dx, cell[1] as i64 + dy, cell[2] as i64 + dz];
                if part.contains_cell(c) {
                    cells.push([c[0] as usize, c[1] as usize, c[2] as usize]);
                }
            }
        }
    }
    let truncated = cells.len() < 19;
    GraphNeighborhood {
        center: cell,
        cells,
        truncated,
    }
}

/// Unordered pair of welded point keys.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LineKey(pub PointKey, pub PointKey);

impl LineKey {
    pub fn new(a: PointKey, b: PointKey) -> Self {
        if a <= b {
            LineKey(a, b)
        } else {
            LineKey(b, a)
        }
    }
}

/// One iso-path passing through an iso-line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Incidence {
    pub path: usize,
    pub segment: usize,
    pub cell: [usize; 3],
    pub face: usize,
    /// Cell across the host face.
    pub across: Option<[usize; 3]>,
    /// Lattice vertices of the corresponding disperse nodes.
    pub disperse: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeIncidenceRecord {
    pub line: LineKey,
    pub kind: LineKind,
    pub incidences: Vec<Incidence>,
    /// Perfect matching as index pairs into `incidences`.
    pub pairs: Vec<(usize, usize)>,
    /// The line lies on the domain boundary.
    pub boundary: bool,
}

/// Read-only data for disperse-path searches.
pub struct DisperseIndex<'a> {
    pub part: &'a CuboidPartition,
    /// Stripped states of every cell, cell-major.
    pub stripped: Vec<States>,
}

impl<'a> DisperseIndex<'a> {
    pub fn new(ctx: &IsoContext<'a>) -> Self {
        let part = ctx.part;
        let stripped = (0..part.cell_count())
            .into_par_iter()
            .map(|id| ctx.stripped_states(part.cell_coords(id)))
            .collect();
        DisperseIndex { part, stripped }
    }

    /// Breadth-first search over disperse edges of the cells in `cells`.
    pub fn disperse_path_exists(&self, cells: &[[usize; 3]], from: &[usize], to: &[usize]) -> bool {
        let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
        for &cell in cells {
            let s = &self.stripped[self.part.cell_index(cell)];
            for &[a, b] in &EDGES {
                if s[a].is_disperse() && s[b].is_disperse() {
                    let va = self.part.vertex_index(self.part.corner_vertex(cell, a));
                    let vb = self.part.vertex_index(self.part.corner_vertex(cell, b));
                    adj.entry(va).or_default().push(vb);
                    adj.entry(vb).or_default().push(va);
                }
            }
        }
        let targets: HashSet<usize> = to.iter().copied().collect();
        let mut seen: HashSet<usize> = from.iter().copied().collect();
        let mut queue: VecDeque<usize> = from.iter().copied().collect();
        while let Some(v) = queue.pop_front() {
            if targets.contains(&v) {
                return true;
            }
            if let Some(ns) = adj.get(&v) {
                for &n in ns {
                    if seen.insert(n) {
                        queue.push_back(n);
                    }
                }
            }
        }
        false
    }
}

/// Disperse connectedness of two incidences at one iso-line: only two
/// incidences, a shared corresponding disperse node, or a disperse path between
/// corresponding nodes inside the two cells' systems of graphs.
pub fn disperse_connected(rec: &EdgeIncidenceRecord, i: usize, j: usize, index: &DisperseIndex) -> bool {
    if rec.incidences.len() == 2 {
        return true;
    }
    shares_disperse_node(&rec.incidences[i], &rec.incidences[j]) || joined_by_disperse_path(&rec.incidences[i], &rec.incidences[j], index)
}

fn shares_disperse_node(a: &Incidence, b: &Incidence) -> bool {
    a.disperse.iter().any(|v| b.disperse.contains(v))
}

fn joined_by_disperse_path(a: &Incidence, b: &Incidence, index: &DisperseIndex) -> bool {
    let mut cells = build_neighborhood(a.cell, index.part).cells;
    for c in build_neighborhood(b.cell, index.part).cells {
        if !cells.contains(&c) {
            cells.push(c);
        }
    }
    index.disperse_path_exists(&cells, &a.disperse, &b.disperse)
}

/// Partner of incidence `k` at a lattice-edge line, found by walking around
/// the ring of four cells sharing the edge.
fn ring_partner(rec: &EdgeIncidenceRecord, k: usize, ring_faces: &dyn Fn([usize; 3]) -> Option<[Option<[usize; 3]>; 2]>) -> Option<usize> {
    let inc = &rec.incidences;
    let start = inc[k].cell;
    let mut prev = start;
    let mut cur = inc[k].across?;
    for _ in 0..4 {
        let here: Vec<usize> = (0..inc.len())
            .filter(|&j| inc[j].cell == cur && inc[j].across == Some(prev))
            .collect();
        match here.as_slice() {
            [j] if *j != k => return Some(*j),
            [] => {}
            _ => return None,
        }
        if cur != start && inc.iter().any(|x| x.cell == cur) {
            return None;
        }
        let [a, b] = ring_faces(cur)?;
        let next = if a == Some(prev) { b } else { a };
        prev = cur;
        cur = next?;
    }
    None
}

/// Perfect matchings of `n` items where every pair satisfies `ok`.
fn perfect_matchings(n: usize, ok: &dyn Fn(usize, usize) -> bool) -> Vec<Vec<(usize, usize)>> {
    fn go(free: &mut Vec<usize>, cur: &mut Vec<(usize, usize)>, ok: &dyn Fn(usize, usize) -> bool, out: &mut Vec<Vec<(usize, usize)>>) {
        if free.is_empty() {
            out.push(cur.clone());
            return;
        }
        if out.len() > 1 {
            return;
        }
        let a = free.remove(0);
        for i in 0..free.len() {
            let b = free[i];
            if ok(a, b) {
                free.remove(i);
                cur.push((a, b));
                go(free, cur, ok, out);
                cur.pop();
                free.insert(i, b);
            }
        }
        free.insert(0, a);
    }
    let mut out = Vec::new();
    if n % 2 == 0 {
        go(&mut (0..n).collect(), &mut Vec::new(), ok, &mut out);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationKind {
    /// Interior iso-line with fewer than two incident paths.
    LowIncidence,
    /// Incidence count outside the allowed set for the line kind.
    IncidenceCount,
    /// No unique disperse-connected perfect matching.
    Pairing,
    /// Partner relation is not symmetric: a third path claims the line.
    TripleLine,
    /// A matched pair is not disperse connected.
    NotDisperseConnected,
    /// Neighbor ring around an interior iso-point does not close.
    OpenRing,
    /// Closed ring with a path count outside `4..=8`.
    RingSize,
    /// Matched elements traverse their shared line in the same direction.
    Orientation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

/// Pairing result: per-line records and the partner of every path segment.
#[derive(Clone, Debug)]
pub struct Pairing {
    pub lines: Vec<EdgeIncidenceRecord>,
    /// Per path and segment: index of its line record.
    pub segment_line: Vec<Vec<usize>>,
    /// Per path and segment: matched `(path, segment)`.
    pub partner: Vec<Vec<Option<(usize, usize)>>>,
    pub violations: Vec<Violation>,
}

fn allowed_incidence(kind: LineKind, n: usize) -> bool {
    match kind {
        LineKind::LatticeEdge => matches!(n, 2 | 4 | 6 | 8),
        LineKind::FaceDiagonal => matches!(n, 2 | 4),
        LineKind::FaceChord => n == 2,
    }
}

fn line_kind(part: &CuboidPartition, a: PointKey, b: PointKey) -> LineKind {
    match (a, b) {
        (PointKey::Node(x), PointKey::Node(y)) => {
            let (p, q) = (part.vertex_coords(x), part.vertex_coords(y));
            let diff: usize = (0..3).map(|i| p[i].abs_diff(q[i])).sum();
            if diff == 1 {
                LineKind::LatticeEdge
            } else {
                LineKind::FaceDiagonal
            }
        }
        _ => LineKind::FaceChord,
    }
}

/// Collects every iso-line with its incident paths and pairs them.
pub fn pair_lines(surface: &IsoSurface, ctx: &IsoContext, index: &DisperseIndex) -> Pairing {
    let part = ctx.part;
    let lo = part.origin;
    let hi = part.vertex_position(part.dims);
    let planes = |v: usize| -> u8 {
        let x = surface.points[v].position;
        (0..3).fold(0, |m, a| m | (u8::from(x[a] == lo[a]) << (2 * a)) | (u8::from(x[a] == hi[a]) << (2 * a + 1)))
    };
    let mut by_line: BTreeMap<LineKey, (bool, Vec<Incidence>)> = BTreeMap::new();
    for (pi, path) in surface.paths.iter().enumerate() {
        let m = path.len();
        let verts = &surface.path_vertices[pi];
        for s in 0..m {
            let a = surface.points[verts[s]].key;
            let b = surface.points[verts[(s + 1) % m]].key;
            let seg = path.segments[s];
            let disperse = (0..8)
                .filter(|&c| seg.disperse & (1 << c) != 0)
                .map(|c| ctx.vertex_id(path.cell, c))
                .collect();
            let on_domain = planes(verts[s]) & planes(verts[(s + 1) % m]) != 0;
            let entry = by_line.entry(LineKey::new(a, b)).or_default();
            entry.0 |= on_domain;
            entry.1.push(Incidence {
                path: pi,
                segment: s,
                cell: path.cell,
                face: seg.face,
                across: ctx.neighbor(path.cell, seg.face),
                disperse,
            });
        }
    }
    let keys: Vec<LineKey> = by_line.keys().copied().collect();
    let records: Vec<(EdgeIncidenceRecord, Vec<Violation>)> = by_line
        .into_iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(line, (on_domain, incidences))| {
            let kind = line_kind(part, line.0, line.1);
            let boundary = on_domain || incidences.iter().any(|i| i.across.is_none());
            let mut rec = EdgeIncidenceRecord {
                line,
                kind,
                incidences,
                pairs: Vec::new(),
                boundary,
            };
            let v = pair_at_edge(&mut rec, ctx, index);
            (rec, v)
        })
        .collect();
    let mut line_of: HashMap<LineKey, usize> = HashMap::with_capacity(keys.len());
    for (i, k) in keys.iter().enumerate() {
        line_of.insert(*k, i);
    }
    let mut segment_line: Vec<Vec<usize>> = surface.paths.iter().map(|p| vec![0; p.len()]).collect();
    let mut partner: Vec<Vec<Option<(usize, usize)>>> = surface.paths.iter().map(|p| vec![None; p.len()]).collect();
    let mut violations = Vec::new();
    let mut lines = Vec::with_capacity(records.len());
    for (li, (rec, v)) in records.into_iter().enumerate() {
        for inc in &rec.incidences {
            segment_line[inc.path][inc.segment] = li;
        }
        for &(i, j) in &rec.pairs {
            let (a, b) = (&rec.incidences[i], &rec.incidences[j]);
            partner[a.path][a.segment] = Some((b.path, b.segment));
            partner[b.path][b.segment] = Some((a.path, a.segment));
        }
        violations.extend(v);
        lines.push(rec);
    }
    Pairing {
        lines,
        segment_line,
        partner,
        violations,
    }
}

fn describe(rec: &EdgeIncidenceRecord) -> String {
    let cells: Vec<String> = rec
        .incidences
        .iter()
        .map(|i| format!("{:?}/f{}/p{}", i.cell, i.face, i.path))
        .collect();
    format!("line {:?}-{:?} ({:?}, N={}) [{}]", rec.line.0, rec.line.1, rec.kind, rec.incidences.len(), cells.join(" "))
}

/// Finds the unique disperse-connected perfect matching of a line's incident
/// paths and stores it in `rec.pairs`. Returns the violations found.
pub fn pair_at_edge(rec: &mut EdgeIncidenceRecord, ctx: &IsoContext, index: &DisperseIndex) -> Vec<Violation> {
    let n = rec.incidences.len();
    let mut out = Vec::new();
    let violation = |kind, rec: &EdgeIncidenceRecord| Violation { kind, detail: describe(rec) };
    if rec.boundary {
        if n == 2 {
            rec.pairs = vec![(0, 1)];
        }
        return out;
    }
    if n < 2 {
        out.push(violation(ViolationKind::LowIncidence, rec));
        return out;
    }
    if !allowed_incidence(rec.kind, n) {
        out.push(violation(ViolationKind::IncidenceCount, rec));
    }
    if n == 2 {
        rec.pairs = vec![(0, 1)];
        return out;
    }
    if rec.kind == LineKind::LatticeEdge {
        let (PointKey::Node(va), PointKey::Node(vb)) = (rec.line.0, rec.line.1) else {
            unreachable!()
        };
        let part = ctx.part;
        let ring_faces = |cell: [usize; 3]| -> Option<[Option<[usize; 3]>; 2]> {
            let local = |v: usize| (0..8).find(|&c| part.vertex_index(part.corner_vertex(cell, c)) == v);
            let (a, b) = (local(va)?, local(vb)?);
            let fs: Vec<usize> = faces_containing(a, b).collect();
            Some([ctx.neighbor(cell, fs[0]), ctx.neighbor(cell, fs[1])])
        };
        let partners: Vec<Option<usize>> = (0..n).map(|k| ring_partner(rec, k, &ring_faces)).collect();
        if partners.iter().any(Option::is_none) {
            out.push(violation(ViolationKind::Pairing, rec));
            return out;
        }
        let partners: Vec<usize> = partners.into_iter().map(Option::unwrap).collect();
        if (0..n).any(|k| partners[partners[k]] != k) {
            out.push(violation(ViolationKind::TripleLine, rec));
            return out;
        }
        rec.pairs = (0..n).filter(|&k| k < partners[k]).map(|k| (k, partners[k])).collect();
    } else {
        let shared = |i: usize, j: usize| shares_disperse_node(&rec.incidences[i], &rec.incidences[j]);
        let mut ms = perfect_matchings(n, &shared);
        if ms.len() != 1 {
            let connected = |i: usize, j: usize| disperse_connected(rec, i, j, index);
            ms = perfect_matchings(n, &connected);
        }
        match ms.len() {
            1 => rec.pairs = ms.pop().unwrap(),
            0 => {
                out.push(violation(ViolationKind::Pairing, rec));
                return out;
            }
            _ => {
                out.push(violation(ViolationKind::TripleLine, rec));
                return out;
            }
        }
    }
    let bad = rec.pairs.iter().any(|&(i, j)| !disperse_connected(rec, i, j, index));
    if bad {
        out.push(violation(ViolationKind::NotDisperseConnected, rec));
    }
    out
}

/// Maximal set of iso-elements closed under matched adjacency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceComponent {
    /// Smallest member element id.
    pub id: usize,
    pub elements: Vec<usize>,
    /// No member touches an unmatched boundary line.
    pub closed: bool,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut x = x;
        while self.parent[x] != r {
            let next = self.parent[x];
            self.parent[x] = r;
            x = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}

/// Components from a pairing. Returns the components and each element's
/// component index.
pub fn components_from_pairing(surface: &IsoSurface, pairing: &Pairing) -> (Vec<SurfaceComponent>, Vec<usize>) {
    let n = surface.paths.len();
    let mut uf = UnionFind::new(n);
    for rec in &pairing.lines {
        for &(i, j) in &rec.pairs {
            uf.union(rec.incidences[i].path, rec.incidences[j].path);
        }
    }
    let mut comps: Vec<SurfaceComponent> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    let mut component_of = vec![0; n];
    for e in 0..n {
        let r = uf.find(e);
        let k = *slot.entry(r).or_insert_with(|| {
            comps.push(SurfaceComponent {
                id: e,
                elements: Vec::new(),
                closed: true,
            });
            comps.len() - 1
        });
        comps[k].elements.push(e);
        component_of[e] = k;
    }
    for (p, segs) in pairing.partner.iter().enumerate() {
        if segs.iter().any(Option::is_none) {
            comps[component_of[p]].closed = false;
        }
    }
    (comps, component_of)
}

/// Everything the component analysis produces.
#[derive(Clone, Debug)]
pub struct SurfaceTopology {
    pub pairing: Pairing,
    pub components: Vec<SurfaceComponent>,
    pub component_of: Vec<usize>,
}

pub fn analyze(surface: &IsoSurface, ctx: &IsoContext) -> SurfaceTopology {
    let index = DisperseIndex::new(ctx);
    let pairing = pair_lines(surface, ctx, &index);
    let (components, component_of) = components_from_pairing(surface, &pairing);
    SurfaceTopology {
        pairing,
        components,
        component_of,
    }
}

pub fn decompose_components(surface: &IsoSurface, ctx: &IsoContext) -> Vec<SurfaceComponent> {
    analyze(surface, ctx).components
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AuditCounts {
    pub paths: usize,
    pub outer_paths: usize,
    pub lines: usize,
    pub boundary_lines: usize,
    pub points: usize,
    pub rings: usize,
    pub components: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditReport {
    pub violations: Vec<Violation>,
    pub counts: AuditCounts,
    /// Histogram of closed-ring sizes at points whose cells are all regular.
    pub ring_sizes: BTreeMap<usize, usize>,
    /// Closed rings touching a cell with a local T1, T2 or F1 pattern; not bounded.
    pub irregular_ring_sizes: BTreeMap<usize, usize>,
    /// Histogram of interior incidence counts.
    pub incidence_counts: BTreeMap<usize, usize>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{:?} {}", v.kind, v.detail)?;
        }
        let c = &self.counts;
        writeln!(f, "# summary")?;
        writeln!(f, "paths {}", c.paths)?;
        writeln!(f, "outer_paths {}", c.outer_paths)?;
        writeln!(f, "lines {}", c.lines)?;
        writeln!(f, "boundary_lines {}", c.boundary_lines)?;
        writeln!(f, "points {}", c.points)?;
        writeln!(f, "rings {}", c.rings)?;
        writeln!(f, "components {}", c.components)?;
        writeln!(f, "violations {}", self.violations.len())
    }
}

/// Cells of the grid containing a welded point.
pub fn point_cells(part: &CuboidPartition, key: PointKey) -> Vec<[usize; 3]> {
    let (v, along) = match key {
        PointKey::Node(v) => (v, None),
        PointKey::Edge(e) => (e / 3, Some(e % 3)),
    };
    let base = part.vertex_coords(v);
    let mut out = Vec::new();
    for m in 0..8usize {
        let back = |a: usize| m >> a & 1 == 1;
        if along.is_some_and(back) {
            continue;
        }
        let c: [i64; 3] = std::array::from_fn(|a| base[a] as i64 - i64::from(back(a)));
        if part.contains_cell(c) {
            out.push(c.map(|x| x as usize));
        }
    }
    out
}

/// Checks incidence, pairing, ring closure and ring size over the whole surface.
pub fn audit_connectivity(surface: &IsoSurface, ctx: &IsoContext) -> AuditReport {
    let topo = analyze(surface, ctx);
    audit_topology(surface, ctx, &topo)
}

pub fn audit_topology(surface: &IsoSurface, ctx: &IsoContext, topo: &SurfaceTopology) -> AuditReport {
    let mut violations = topo.pairing.violations.clone();
    let mut incidence_counts = BTreeMap::new();
    for rec in topo.pairing.lines.iter().filter(|r| !r.boundary) {
        *incidence_counts.entry(rec.incidences.len()).or_insert(0) += 1;
    }
    let rings = crate::surface_geometry::neighbor_rings(surface, &topo.pairing);
    let mut ring_sizes = BTreeMap::new();
    let mut irregular_ring_sizes = BTreeMap::new();
    let domain_lo = ctx.part.origin;
    let domain_hi = ctx.part.vertex_position(ctx.part.dims);
    let on_boundary = |v: usize| {
        let x = surface.points[v].position;
        (0..3).any(|a| x[a] == domain_lo[a] || x[a] == domain_hi[a])
    };
    let mut ring_count = 0;
    for ring in &rings {
        if on_boundary(ring.point) {
            continue;
        }
        ring_count += 1;
        if !ring.closed {
            violations.push(Violation {
                kind: ViolationKind::OpenRing,
                detail: format!("point {:?} ring {:?}", surface.points[ring.point].key, ring.paths),
            });
            continue;
        }
        if !point_cells(ctx.part, surface.points[ring.point].key)
            .iter()
            .all(|&c| !has_local_strip_pattern(&ctx.cell_states(c)))
        {
            *irregular_ring_sizes.entry(ring.paths.len()).or_insert(0) += 1;
            continue;
        }
        *ring_sizes.entry(ring.paths.len()).or_insert(0) += 1;
        if !(4..=8).contains(&ring.paths.len()) {
            violations.push(Violation {
                kind: ViolationKind::RingSize,
                detail: format!("point {:?} ring {:?}", surface.points[ring.point].key, ring.paths),
            });
        }
    }
    let counts = AuditCounts {
        paths: surface.paths.len(),
        outer_paths: surface.paths.iter().filter(|p| p.kind == PathKind::Outer).count(),
        lines: topo.pairing.lines.len(),
        boundary_lines: topo.pairing.lines.iter().filter(|r| r.boundary).count(),
        points: surface.points.len(),
        rings: ring_count,
        components: topo.components.len(),
    };
    AuditReport {
        violations,
        counts,
        ring_sizes,
        irregular_ring_sizes,
        incidence_counts,
    }
}

/// Convenience wrapper: extract, analyze and audit a labeling.
pub fn extract_and_audit(
    labels: &crate::scalar_grid::NodeLabeling,
    part: &CuboidPartition,
    c: f64,
) -> Result<(IsoSurface, AuditReport), ExtractError> {
    let ctx = IsoContext::new(labels, part, c, crate::cube_graph::DEFAULT_ISO_TOLERANCE)?;
    let surface = crate::isopath_extract::extract_context(&ctx)?;
    let report = audit_connectivity(&surface, &ctx);
    Ok((surface, report))
}

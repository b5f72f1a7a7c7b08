//! T-, F-, S- and C-rules on labeled cuboid graphs.
//!
//! Pattern detection works on node states only. Rewrites saturate labels with
//! `q0` (disperse labels to 0) or `q1` (continuous labels to 1) and never touch
//! the iso-level. The original labeling is never mutated: every operation
//! returns a new graph.

use thiserror::Error;

use crate::cube_graph::{
    classify_face_states, classify_states, disperse_count, face_axis, face_mask, face_states,
    space_diagonal_pair, FaceClass, GraphClassification, LabeledCuboidGraph, NodeState, States,
    EDGES, NEIGHBORS,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("rule {kind:?} does not match corners {targets:#010b}")]
    PatternAbsent { kind: RuleKind, targets: u8 },
    #[error("no removal rule for D = {disperse} with {l_faces} L-faces")]
    OutsideTable { disperse: u8, l_faces: u8 },
    #[error("decomposition left a reducible graph (code {code})")]
    NotTerminated { code: u16 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleKind {
    T1,
    T2,
    F1,
    F2,
    S1,
    S2,
    S3,
    C1,
    C2,
    C3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relabel {
    /// Labels above `c` become 0.
    Q0,
    /// Labels at or below `c` become 1.
    Q1,
}

pub fn q0(x: f64, c: f64) -> f64 {
    if x > c {
        0.0
    } else {
        x
    }
}

pub fn q1(x: f64, c: f64) -> f64 {
    if x <= c {
        1.0
    } else {
        x
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RewriteRule {
    pub kind: RuleKind,
    /// Corners the rule acts on (bitmask). For C-rules, the face corners.
    pub targets: u8,
    /// `None` for C-rules, which insert an iso-line and keep all labels.
    pub relabel: Option<Relabel>,
}

impl RewriteRule {
    pub fn new(kind: RuleKind, targets: u8) -> Self {
        let relabel = match kind {
            RuleKind::S1 | RuleKind::S2 => Some(Relabel::Q0),
            RuleKind::C1 | RuleKind::C2 | RuleKind::C3 => None,
            _ => Some(Relabel::Q1),
        };
        RewriteRule { kind, targets, relabel }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatternId {
    T1Sub,
    T2Sub,
    F1Graph,
    F2Graph,
    S1Sub,
    S2Sub,
    S3Sub,
    G1,
    G2,
    G3,
    GHat1,
    GHat2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SubgraphPattern {
    pub id: PatternId,
    /// Matched node set (bitmask).
    pub nodes: u8,
    /// Face shared with the neighbor for F2 matches.
    pub neighbor_face: Option<usize>,
    /// Corners a rule built from this match rewrites.
    pub core: u8,
}

impl SubgraphPattern {
    pub fn rule(&self) -> Option<RewriteRule> {
        let kind = match self.id {
            PatternId::T1Sub => RuleKind::T1,
            PatternId::T2Sub => RuleKind::T2,
            PatternId::F1Graph => RuleKind::F1,
            PatternId::F2Graph => RuleKind::F2,
            PatternId::S1Sub => RuleKind::S1,
            PatternId::S2Sub => RuleKind::S2,
            PatternId::S3Sub => RuleKind::S3,
            _ => return None,
        };
        Some(RewriteRule::new(kind, self.core))
    }

    fn lowest(&self) -> u32 {
        self.nodes.trailing_zeros()
    }
}

/// States of the far corners of the six face-adjacent cells. Entry `i` of
/// `far[f]` is the neighbor corner joined by an edge to `FACES[f][i]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FaceNeighbors {
    pub far: [Option<[NodeState; 4]>; 6],
}

impl FaceNeighbors {
    /// A cell with no face neighbors (F2 never matches).
    pub const NONE: FaceNeighbors = FaceNeighbors { far: [None; 6] };
}

fn bit(c: usize) -> u8 {
    1 << c
}

fn star(c: usize) -> u8 {
    NEIGHBORS[c].iter().fold(bit(c), |m, &n| m | bit(n))
}

/// Corners adjacent to `a` or `b`, excluding both.
fn pair_neighbors(a: usize, b: usize) -> [usize; 4] {
    let mut out = [0; 4];
    let mut i = 0;
    for &n in NEIGHBORS[a].iter().chain(NEIGHBORS[b].iter()) {
        if n != a && n != b {
            out[i] = n;
            i += 1;
        }
    }
    out
}

/// Corners not adjacent to the pair: the opposite, parallel edge.
fn pair_far(a: usize, b: usize) -> [usize; 2] {
    [a ^ 7, b ^ 7]
}

fn all(s: &States, nodes: &[usize], st: NodeState) -> bool {
    nodes.iter().all(|&n| s[n] == st)
}

pub fn t1_corners(s: &States) -> u8 {
    (0..8)
        .filter(|&c| s[c] == NodeState::Iso && all(s, &NEIGHBORS[c], NodeState::Disperse))
        .fold(0, |m, c| m | bit(c))
}

fn iso_pairs(s: &States) -> impl Iterator<Item = (usize, usize)> + '_ {
    EDGES
        .iter()
        .map(|e| (e[0], e[1]))
        .filter(move |&(a, b)| s[a] == NodeState::Iso && s[b] == NodeState::Iso)
}

/// Adjacent iso-node pairs whose four other neighbors are disperse.
fn ghat2_pairs(s: &States) -> impl Iterator<Item = (usize, usize)> + '_ {
    iso_pairs(s).filter(move |&(a, b)| all(s, &pair_neighbors(a, b), NodeState::Disperse))
}

/// Seven-node T2 matches: the pair, its four neighbors and a disperse far node.
pub fn t2_matches(s: &States) -> Vec<(u8, u8)> {
    ghat2_pairs(s)
        .filter_map(|(a, b)| {
            let far = pair_far(a, b).into_iter().filter(|&f| s[f].is_disperse()).min()?;
            let nodes = pair_neighbors(a, b).iter().fold(bit(a) | bit(b) | bit(far), |m, &n| m | bit(n));
            Some((nodes, bit(a) | bit(b)))
        })
        .collect()
}

/// Four iso-nodes, each joined to exactly two disperse nodes, all others disperse.
pub fn f1_match(s: &States) -> Option<u8> {
    let iso: u8 = (0..8).filter(|&c| s[c] == NodeState::Iso).fold(0, |m, c| m | bit(c));
    if iso.count_ones() != 4 || disperse_count(s) != 4 {
        return None;
    }
    let ok = (0..8)
        .filter(|&c| iso & bit(c) != 0)
        .all(|c| NEIGHBORS[c].iter().filter(|&&n| s[n].is_disperse()).count() == 2);
    ok.then_some(iso)
}

fn f2_local(s: &States, face: usize) -> bool {
    let m = face_mask(face);
    (0..8).all(|c| {
        if m & bit(c) != 0 {
            s[c] == NodeState::Iso
        } else {
            s[c].is_disperse()
        }
    })
}

pub fn f2_face(s: &States, nb: &FaceNeighbors) -> Option<usize> {
    (0..6).find(|&f| {
        f2_local(s, f)
            && nb.far[f].is_some_and(|far| far.iter().all(|x| x.is_disperse()))
    })
}

pub fn s1_corners(s: &States) -> Vec<usize> {
    (0..8)
        .filter(|&c| s[c].is_disperse() && NEIGHBORS[c].iter().all(|&n| s[n].is_continuous()))
        .collect()
}

pub fn s2_pairs(s: &States) -> Vec<(usize, usize)> {
    EDGES
        .iter()
        .map(|e| (e[0], e[1]))
        .filter(|&(a, b)| {
            s[a].is_disperse()
                && s[b].is_disperse()
                && pair_neighbors(a, b).iter().all(|&n| s[n].is_continuous())
        })
        .collect()
}

pub fn s3_corners(s: &States) -> Vec<usize> {
    (0..8)
        .filter(|&c| s[c] == NodeState::Sub && all(s, &NEIGHBORS[c], NodeState::Disperse))
        .collect()
}

/// T1, T2 or F1 present: patterns decidable without neighbor data.
pub fn has_local_strip_pattern(s: &States) -> bool {
    t1_corners(s) != 0 || !t2_matches(s).is_empty() || f1_match(s).is_some()
}

pub fn find_patterns_states(s: &States, nb: &FaceNeighbors) -> Vec<SubgraphPattern> {
    let mut out = Vec::new();
    let mut push = |id, nodes, core, neighbor_face| {
        out.push(SubgraphPattern {
            id,
            nodes,
            neighbor_face,
            core,
        })
    };
    let t1 = t1_corners(s);
    for c in (0..8).filter(|&c| t1 & bit(c) != 0) {
        push(PatternId::T1Sub, star(c), bit(c), None);
        push(PatternId::GHat1, star(c), bit(c), None);
    }
    for (nodes, core) in t2_matches(s) {
        push(PatternId::T2Sub, nodes, core, None);
    }
    for (a, b) in ghat2_pairs(s) {
        push(PatternId::GHat2, star(a) | star(b), bit(a) | bit(b), None);
    }
    if let Some(iso) = f1_match(s) {
        push(PatternId::F1Graph, 0xff, iso, None);
    }
    if let Some(f) = f2_face(s, nb) {
        push(PatternId::F2Graph, 0xff, face_mask(f), Some(f));
    }
    for c in s1_corners(s) {
        push(PatternId::S1Sub, star(c), bit(c), None);
        push(PatternId::G1, star(c), bit(c), None);
    }
    for (a, b) in s2_pairs(s) {
        push(PatternId::S2Sub, star(a) | star(b), bit(a) | bit(b), None);
        push(PatternId::G2, star(a) | star(b), bit(a) | bit(b), None);
    }
    for c in s3_corners(s) {
        push(PatternId::S3Sub, star(c), bit(c), None);
        push(PatternId::G3, star(c), bit(c), None);
    }
    out.sort_by_key(|p| (p.id, p.lowest()));
    out
}

pub fn find_patterns(g: &LabeledCuboidGraph, nb: &FaceNeighbors) -> Vec<SubgraphPattern> {
    find_patterns_states(&g.states(), nb)
}

fn relabeled(g: &LabeledCuboidGraph, targets: u8, relabel: Relabel) -> LabeledCuboidGraph {
    let mut out = g.clone();
    for c in (0..8).filter(|&c| targets & bit(c) != 0) {
        out.labels[c] = match relabel {
            Relabel::Q0 => q0(g.labels[c], g.iso),
            Relabel::Q1 => q1(g.labels[c], g.iso),
        };
    }
    out.rewritten |= targets;
    out
}

fn c_rule_matches(s: &States, rule: &RewriteRule) -> bool {
    (0..6).any(|f| {
        let fs = face_states(s, f);
        let d = fs.iter().filter(|x| x.is_disperse()).count();
        let kind = match d {
            1 => RuleKind::C1,
            2 => RuleKind::C2,
            _ => RuleKind::C3,
        };
        face_mask(f) == rule.targets
            && classify_face_states(fs) == FaceClass::RegularFace
            && kind == rule.kind
    })
}

/// Applies one rule. Reapplying a rule whose targets are already saturated
/// returns the graph unchanged.
pub fn apply_rule(g: &LabeledCuboidGraph, rule: RewriteRule) -> Result<LabeledCuboidGraph, RuleError> {
    let s = g.states();
    let absent = RuleError::PatternAbsent {
        kind: rule.kind,
        targets: rule.targets,
    };
    let Some(relabel) = rule.relabel else {
        return if c_rule_matches(&s, &rule) { Ok(g.clone()) } else { Err(absent) };
    };
    let out = relabeled(g, rule.targets, relabel);
    if out.labels == g.labels {
        return Ok(out);
    }
    let present = match rule.kind {
        RuleKind::F2 => (0..6).any(|f| face_mask(f) == rule.targets && f2_local(&s, f)),
        _ => {
            let permissive = FaceNeighbors::NONE;
            find_patterns_states(&s, &permissive)
                .iter()
                .filter_map(|p| p.rule())
                .any(|r| r == rule)
        }
    };
    if present {
        Ok(out)
    } else {
        Err(absent)
    }
}

/// Rules the strip step applies, in order.
pub fn strip_rules(s: &States, nb: &FaceNeighbors) -> Vec<RewriteRule> {
    if let Some(iso) = f1_match(s) {
        return vec![RewriteRule::new(RuleKind::F1, iso)];
    }
    if let Some(f) = f2_face(s, nb) {
        return vec![RewriteRule::new(RuleKind::F2, face_mask(f))];
    }
    let mut rules = Vec::new();
    let mut w = *s;
    let t1 = t1_corners(&w);
    if t1 != 0 {
        rules.push(RewriteRule::new(RuleKind::T1, t1));
        for c in (0..8).filter(|&c| t1 & bit(c) != 0) {
            w[c] = NodeState::Disperse;
        }
    }
    // A converted T1 corner has no iso neighbors, so one pass reaches the fixpoint.
    debug_assert_eq!(t1_corners(&w), 0);
    while let Some(&(_, core)) = t2_matches(&w).first() {
        rules.push(RewriteRule::new(RuleKind::T2, core));
        for c in (0..8).filter(|&c| core & bit(c) != 0) {
            w[c] = NodeState::Disperse;
        }
    }
    rules
}

/// State-level strip: the states of `strip_singular_and_isolated`.
pub fn strip_states(s: &States, nb: &FaceNeighbors) -> States {
    let mut w = *s;
    for r in strip_rules(s, nb) {
        for c in (0..8).filter(|&c| r.targets & bit(c) != 0) {
            w[c] = NodeState::Disperse;
        }
    }
    w
}

/// Removes singular and isolated iso-paths (T1*, T2, F1, F2).
pub fn strip_singular_and_isolated(g: &LabeledCuboidGraph, nb: &FaceNeighbors) -> LabeledCuboidGraph {
    strip_rules(&g.states(), nb)
        .into_iter()
        .fold(g.clone(), |acc, r| relabeled(&acc, r.targets, Relabel::Q1))
}

/// L-face removal rule and its multiplicity for a reducible graph.
pub fn select_s_rule(cls: &GraphClassification) -> Result<(RuleKind, u8), RuleError> {
    let d = cls.disperse_count;
    let l = cls.l_faces.len() as u8;
    let out = match (d, l) {
        (2, 0) => (RuleKind::S1, 1),
        (6, 0) => (RuleKind::S3, 1),
        (2, 1) | (3, 1) => (RuleKind::S1, 1),
        (3, 3) => (RuleKind::S1, 2),
        (4, 2) if cls.has_parallel_l_faces() => (RuleKind::S2, 1),
        (4, 2) => (RuleKind::S1, 1),
        (4, 6) => (RuleKind::S1, 3),
        (5, 1) => (RuleKind::S3, 1),
        (5, 3) => (RuleKind::S1, 1),
        (6, 1) => (RuleKind::S3, 1),
        _ => return Err(RuleError::OutsideTable { disperse: d, l_faces: l }),
    };
    Ok(out)
}

/// One S-cuboid graph: an isolated S-subgraph embedded in an otherwise
/// continuous (S1, S2) or disperse (S3) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct SPiece {
    pub kind: RuleKind,
    pub core: u8,
    pub graph: LabeledCuboidGraph,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphDecomposition {
    pub pieces: Vec<SPiece>,
    pub rest: LabeledCuboidGraph,
    pub cell: [usize; 3],
}

/// Reducible in the sense used by `decompose`: an L-face or a space-diagonal
/// disperse (or continuous) pair, with `1 <= D <= 7`.
pub fn is_reducible_states(s: &States) -> bool {
    let d = disperse_count(s);
    if d == 0 || d == 8 {
        return false;
    }
    space_diagonal_pair(s).is_some()
        || (0..6).any(|f| classify_face_states(face_states(s, f)).is_l_face())
}

fn piece(g: &LabeledCuboidGraph, kind: RuleKind, core: u8) -> SPiece {
    let keep = (0..8)
        .filter(|&c| core & bit(c) != 0)
        .fold(0u8, |m, c| m | star(c));
    let fill = if kind == RuleKind::S3 { 1.0 } else { 0.0 };
    let mut graph = g.clone();
    for c in (0..8).filter(|&c| keep & bit(c) == 0) {
        if graph.labels[c] != fill {
            graph.labels[c] = fill;
            graph.rewritten |= bit(c);
        }
    }
    SPiece { kind, core, graph }
}

/// Splits a stripped graph into S-cuboid graphs and an irreducible rest graph.
pub fn decompose(g: &LabeledCuboidGraph) -> Result<GraphDecomposition, RuleError> {
    let mut rest = g.clone();
    let mut pieces = Vec::new();
    for _ in 0..3 {
        let s = rest.states();
        if !is_reducible_states(&s) {
            break;
        }
        let (kind, n) = select_s_rule(&classify_states(&s))?;
        let cores: Vec<u8> = match kind {
            RuleKind::S1 => s1_corners(&s).into_iter().map(bit).collect(),
            RuleKind::S3 => s3_corners(&s).into_iter().map(bit).collect(),
            _ => s2_pairs(&s).into_iter().map(|(a, b)| bit(a) | bit(b)).collect(),
        };
        if cores.len() < n as usize {
            return Err(RuleError::PatternAbsent { kind, targets: 0 });
        }
        for &core in cores.iter().take(n as usize) {
            pieces.push(piece(&rest, kind, core));
            rest = apply_rule(&rest, RewriteRule::new(kind, core))?;
        }
    }
    let s = rest.states();
    if is_reducible_states(&s) {
        return Err(RuleError::NotTerminated {
            code: crate::cube_graph::ConfigSignature::from_states(&s).code,
        });
    }
    Ok(GraphDecomposition {
        pieces,
        rest,
        cell: g.cell,
    })
}

/// Parallel L-faces share an axis.
pub fn l_faces_parallel(a: usize, b: usize) -> bool {
    a != b && face_axis(a) == face_axis(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube_graph::{ConfigSignature, LabeledCuboidGraph};
    use NodeState::*;

    fn states(d: &[usize], iso: &[usize]) -> States {
        let mut s = [Sub; 8];
        for &c in d {
            s[c] = Disperse;
        }
        for &c in iso {
            s[c] = Iso;
        }
        s
    }

    #[test]
    fn saturation_maps() {
        assert_eq!(q0(0.7, 0.5), 0.0);
        assert_eq!(q0(0.5, 0.5), 0.5);
        assert_eq!(q1(0.5, 0.5), 1.0);
        assert_eq!(q1(0.2, 0.5), 1.0);
        assert_eq!(q1(0.7, 0.5), 0.7);
    }

    #[test]
    fn t1_match_and_rewrite() {
        let s = states(&[1, 2, 3, 4, 5, 6, 7], &[0]);
        let pats = find_patterns_states(&s, &FaceNeighbors::NONE);
        let t1: Vec<_> = pats.iter().filter(|p| p.id == PatternId::T1Sub).collect();
        assert_eq!(t1.len(), 1);
        assert_eq!(t1[0].core, 1);
        let g = LabeledCuboidGraph::from_states(&s, 0.5);
        let out = apply_rule(&g, t1[0].rule().unwrap()).unwrap();
        assert_eq!(out.labels[0], 1.0);
        let again = apply_rule(&out, t1[0].rule().unwrap()).unwrap();
        assert_eq!(again.labels, out.labels);
        let stripped = strip_singular_and_isolated(&g, &FaceNeighbors::NONE);
        assert_eq!(stripped.disperse_count(), 8);
    }

    #[test]
    fn t2_requires_a_disperse_far_node() {
        // Pair 0-1 with neighbors 2,3,4,5 disperse.
        let s = states(&[2, 3, 4, 5, 6], &[0, 1]);
        assert_eq!(t2_matches(&s).len(), 1);
        assert_eq!(t2_matches(&s)[0].0.count_ones(), 7);
        let both_far_continuous = states(&[2, 3, 4, 5], &[0, 1]);
        assert!(t2_matches(&both_far_continuous).is_empty());
        assert_eq!(strip_states(&both_far_continuous, &FaceNeighbors::NONE), both_far_continuous);
    }

    #[test]
    fn f1_and_f2() {
        let s = states(&[2, 3, 4, 5], &[0, 1, 6, 7]);
        assert_eq!(f1_match(&s), Some(0b1100_0011));
        assert_eq!(disperse_count(&strip_states(&s, &FaceNeighbors::NONE)), 8);

        let s = states(&[4, 5, 6, 7], &[0, 1, 2, 3]);
        assert_eq!(f2_face(&s, &FaceNeighbors::NONE), None);
        let mut nb = FaceNeighbors::NONE;
        nb.far[0] = Some([Disperse; 4]);
        assert_eq!(f2_face(&s, &nb), Some(0));
        let g = LabeledCuboidGraph::from_states(&s, 0.5);
        let out = strip_singular_and_isolated(&g, &nb);
        assert_eq!(out.disperse_count(), 8);
        assert_eq!(out.rewritten, 0b0000_1111);
        nb.far[0] = Some([Disperse, Disperse, Sub, Disperse]);
        assert_eq!(f2_face(&s, &nb), None);
    }

    #[test]
    fn s_patterns() {
        let s = states(&[0], &[]);
        let p = find_patterns_states(&s, &FaceNeighbors::NONE);
        assert!(p.iter().any(|p| p.id == PatternId::S1Sub && p.core == 1));
        let g = LabeledCuboidGraph::from_states(&s, 0.5);
        let out = apply_rule(&g, RewriteRule::new(RuleKind::S1, 1)).unwrap();
        assert_eq!(out.labels[0], 0.0);

        let s = states(&[1, 2, 3, 4, 5, 6, 7], &[]);
        let g = LabeledCuboidGraph::from_states(&s, 0.5);
        let out = apply_rule(&g, RewriteRule::new(RuleKind::S3, 1)).unwrap();
        assert_eq!(out.labels[0], 1.0);

        assert!(apply_rule(&g, RewriteRule::new(RuleKind::S1, 2)).is_err());
    }

    #[test]
    fn table_examples() {
        let parallel = classify_states(&states(&[2, 3, 4, 5], &[]));
        assert_eq!(select_s_rule(&parallel), Ok((RuleKind::S2, 1)));
        let four_corners = classify_states(&states(&[0, 3, 5, 6], &[]));
        assert_eq!(four_corners.l_faces.len(), 6);
        assert_eq!(select_s_rule(&four_corners), Ok((RuleKind::S1, 3)));
        let d6 = classify_states(&states(&[0, 1, 2, 4, 6, 7], &[]));
        assert_eq!(d6.l_faces.len(), 1);
        assert_eq!(select_s_rule(&d6), Ok((RuleKind::S3, 1)));
    }

    #[test]
    fn decompose_examples() {
        let g = LabeledCuboidGraph::from_states(&states(&[0, 7], &[]), 0.5);
        let d = decompose(&g).unwrap();
        assert_eq!(d.pieces.len(), 1);
        assert_eq!(d.rest.disperse_count(), 1);

        let g = LabeledCuboidGraph::from_states(&states(&[0, 3, 5, 6], &[]), 0.5);
        let d = decompose(&g).unwrap();
        assert_eq!(d.pieces.len(), 3);
        assert_eq!(d.rest.disperse_count(), 1);

        let g = LabeledCuboidGraph::from_states(&states(&[0], &[]), 0.5);
        let d = decompose(&g).unwrap();
        assert!(d.pieces.is_empty());
        assert_eq!(d.rest, g);
    }

    #[test]
    fn t_and_f_patterns_are_exclusive() {
        for code in 0..ConfigSignature::COUNT {
            let s = ConfigSignature::from_code(code).states();
            let t = t1_corners(&s) != 0 || !t2_matches(&s).is_empty();
            assert!(!(t && f1_match(&s).is_some()), "code {code}");
        }
    }

    #[test]
    fn exhaustive_strip_and_decompose() {
        for code in 0..ConfigSignature::COUNT {
            let s = ConfigSignature::from_code(code).states();
            let stripped = strip_states(&s, &FaceNeighbors::NONE);
            assert!(!has_local_strip_pattern(&stripped), "code {code}");
            let cls = classify_states(&stripped);
            if cls.regular {
                assert!(cls.singular_faces.len() <= 3, "code {code}");
            }
            let g = LabeledCuboidGraph::from_states(&stripped, 0.5);
            let d = decompose(&g).unwrap_or_else(|e| panic!("code {code}: {e}"));
            assert!(d.pieces.len() <= 3);
            assert!(!is_reducible_states(&d.rest.states()));
            // Rewrites never move a label across c except to 0 or 1.
            for c in 0..8 {
                let before = g.labels[c];
                let after = d.rest.labels[c];
                assert!(after == before || after == 0.0 || after == 1.0);
            }
        }
    }

    #[test]
    fn same_kind_matches_are_node_disjoint() {
        for code in 0..ConfigSignature::COUNT {
            let s = strip_states(&ConfigSignature::from_code(code).states(), &FaceNeighbors::NONE);
            let pairs = s2_pairs(&s);
            for (i, a) in pairs.iter().enumerate() {
                for b in &pairs[i + 1..] {
                    assert!(a.0 != b.0 && a.0 != b.1 && a.1 != b.0 && a.1 != b.1);
                }
            }
        }
    }
}

//! The labeled cuboid graph of a single grid cell.
//!
//! Corners are ordered lexicographically by their `(i, j, k)` offset inside the
//! cell, so corner `c` sits at offset `((c >> 2) & 1, (c >> 1) & 1, c & 1)`.
//! Edges, faces and neighbor lists are static tables derived from that order.

use nalgebra::Vector3;

/// Offset of every corner inside its cell.
pub const CORNER_OFFSETS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [0, 0, 1],
    [0, 1, 0],
    [0, 1, 1],
    [1, 0, 0],
    [1, 0, 1],
    [1, 1, 0],
    [1, 1, 1],
];

/// Bit of the corner index that encodes the offset along each axis.
pub const AXIS_BIT: [usize; 3] = [4, 2, 1];

/// The 12 cell edges as corner pairs, lower corner first, grouped by axis.
pub const EDGES: [[usize; 2]; 12] = [
    [0, 4],
    [1, 5],
    [2, 6],
    [3, 7],
    [0, 2],
    [1, 3],
    [4, 6],
    [5, 7],
    [0, 1],
    [2, 3],
    [4, 5],
    [6, 7],
];

/// The 6 faces as cyclically ordered corners. Face `f` is normal to axis
/// `f / 2` and lies on the low (`f` even) or high (`f` odd) side.
pub const FACES: [[usize; 4]; 6] = [
    [0, 1, 3, 2],
    [4, 5, 7, 6],
    [0, 1, 5, 4],
    [2, 3, 7, 6],
    [0, 2, 6, 4],
    [1, 3, 7, 5],
];

/// Edge-adjacent corners of every corner, ordered by axis.
pub const NEIGHBORS: [[usize; 3]; 8] = [
    [4, 2, 1],
    [5, 3, 0],
    [6, 0, 3],
    [7, 1, 2],
    [0, 6, 5],
    [1, 7, 4],
    [2, 4, 7],
    [3, 5, 6],
];

/// Edge index joining two corners, if they are adjacent.
pub fn edge_between(a: usize, b: usize) -> Option<usize> {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    EDGES.iter().position(|e| e[0] == lo && e[1] == hi)
}

/// Axis a face is normal to.
pub fn face_axis(face: usize) -> usize {
    face / 2
}

/// Whether the face lies on the high side of its axis.
pub fn face_is_high(face: usize) -> bool {
    face % 2 == 1
}

/// The face across the cell (same axis, other side).
pub fn opposite_face(face: usize) -> usize {
    face ^ 1
}

/// Corner bitmask of a face.
pub fn face_mask(face: usize) -> u8 {
    FACES[face].iter().fold(0u8, |m, &c| m | (1 << c))
}

/// Faces containing both corners.
pub fn faces_containing(a: usize, b: usize) -> impl Iterator<Item = usize> {
    let m = (1u8 << a) | (1u8 << b);
    (0..6).filter(move |&f| face_mask(f) & m == m)
}

/// Replaces a label within `tol` of `c` by `c` exactly.
pub fn snap_label(label: f64, c: f64, tol: f64) -> f64 {
    if (label - c).abs() <= tol {
        c
    } else {
        label
    }
}

/// Default snapping tolerance for the iso-node test.
pub const DEFAULT_ISO_TOLERANCE: f64 = 1e-12;

/// Position of a node relative to the iso-level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum NodeState {
    /// Label strictly below `c`.
    Sub = 0,
    /// Label exactly `c`.
    Iso = 1,
    /// Label strictly above `c`.
    Disperse = 2,
}

impl NodeState {
    pub fn of(label: f64, c: f64) -> Self {
        if label > c {
            NodeState::Disperse
        } else if label == c {
            NodeState::Iso
        } else {
            NodeState::Sub
        }
    }

    pub fn is_disperse(self) -> bool {
        self == NodeState::Disperse
    }

    /// Iso-nodes and sub nodes together form the continuous phase.
    pub fn is_continuous(self) -> bool {
        self != NodeState::Disperse
    }

    pub fn from_digit(d: u16) -> Self {
        match d {
            0 => NodeState::Sub,
            1 => NodeState::Iso,
            _ => NodeState::Disperse,
        }
    }
}

pub type States = [NodeState; 8];

/// Bitmask of the disperse corners.
pub fn disperse_mask(s: &States) -> u8 {
    (0..8).fold(0u8, |m, c| if s[c].is_disperse() { m | (1 << c) } else { m })
}

pub fn disperse_count(s: &States) -> u8 {
    disperse_mask(s).count_ones() as u8
}

/// Cell vertices with their labels and the iso-level they are compared to.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledCuboidGraph {
    pub positions: [Vector3<f64>; 8],
    pub labels: [f64; 8],
    pub iso: f64,
    pub cell: [usize; 3],
    /// Corners whose label was rewritten by a rule (bitmask).
    pub rewritten: u8,
}

impl LabeledCuboidGraph {
    pub fn new(positions: [Vector3<f64>; 8], labels: [f64; 8], iso: f64, cell: [usize; 3]) -> Self {
        LabeledCuboidGraph {
            positions,
            labels,
            iso,
            cell,
            rewritten: 0,
        }
    }

    /// Unit cube at the origin.
    pub fn unit(labels: [f64; 8], iso: f64) -> Self {
        let positions = CORNER_OFFSETS.map(|o| Vector3::new(o[0] as f64, o[1] as f64, o[2] as f64));
        Self::new(positions, labels, iso, [0, 0, 0])
    }

    /// Unit cube whose labels realize the given states (0, `iso` and 1).
    pub fn from_states(states: &States, iso: f64) -> Self {
        let labels = states.map(|s| match s {
            NodeState::Sub => 0.0,
            NodeState::Iso => iso,
            NodeState::Disperse => 1.0,
        });
        Self::unit(labels, iso)
    }

    pub fn state(&self, corner: usize) -> NodeState {
        NodeState::of(self.labels[corner], self.iso)
    }

    pub fn states(&self) -> States {
        std::array::from_fn(|c| self.state(c))
    }

    pub fn disperse_count(&self) -> u8 {
        disperse_count(&self.states())
    }
}

pub fn classify_nodes(g: &LabeledCuboidGraph) -> States {
    g.states()
}

/// Class of one cell face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FaceClass {
    DisperseFace,
    ContinuousFace,
    RegularFace,
    SingularFace,
    TrivialLFace,
    NonTrivialLFace,
}

impl FaceClass {
    pub fn is_l_face(self) -> bool {
        matches!(self, FaceClass::TrivialLFace | FaceClass::NonTrivialLFace)
    }
}

/// Classifies a face from its four cyclically ordered states.
pub fn classify_face_states(s: [NodeState; 4]) -> FaceClass {
    let d = s.iter().filter(|x| x.is_disperse()).count();
    match d {
        4 => FaceClass::DisperseFace,
        0 => FaceClass::ContinuousFace,
        3 if s.contains(&NodeState::Iso) => FaceClass::SingularFace,
        2 if s[0].is_disperse() == s[2].is_disperse() => {
            let (a, b) = if s[0].is_disperse() { (s[1], s[3]) } else { (s[0], s[2]) };
            if a == NodeState::Iso && b == NodeState::Iso {
                FaceClass::TrivialLFace
            } else {
                FaceClass::NonTrivialLFace
            }
        }
        _ => FaceClass::RegularFace,
    }
}

pub fn face_states(s: &States, face: usize) -> [NodeState; 4] {
    FACES[face].map(|c| s[c])
}

pub fn classify_face(g: &LabeledCuboidGraph, face: usize) -> FaceClass {
    classify_face_states(face_states(&g.states(), face))
}

/// Canonical per-cell state code: `sum(state_i * 3^i)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConfigSignature {
    pub code: u16,
    pub disperse_count: u8,
    pub l_face_count: u8,
}

impl ConfigSignature {
    /// Number of distinct signatures.
    pub const COUNT: u16 = 6561;

    pub fn from_states(s: &States) -> Self {
        let mut code = 0u16;
        for c in (0..8).rev() {
            code = code * 3 + s[c] as u16;
        }
        let l_face_count = (0..6)
            .filter(|&f| classify_face_states(face_states(s, f)).is_l_face())
            .count() as u8;
        ConfigSignature {
            code,
            disperse_count: disperse_count(s),
            l_face_count,
        }
    }

    /// Panics if `code >= 6561`.
    pub fn from_code(code: u16) -> Self {
        assert!(code < Self::COUNT, "signature code out of range: {code}");
        let mut s = [NodeState::Sub; 8];
        let mut r = code;
        for slot in s.iter_mut() {
            *slot = NodeState::from_digit(r % 3);
            r /= 3;
        }
        Self::from_states(&s)
    }

    pub fn states(&self) -> States {
        let mut s = [NodeState::Sub; 8];
        let mut r = self.code;
        for slot in s.iter_mut() {
            *slot = NodeState::from_digit(r % 3);
            r /= 3;
        }
        s
    }
}

pub fn signature(g: &LabeledCuboidGraph) -> ConfigSignature {
    ConfigSignature::from_states(&g.states())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LFace {
    pub face: usize,
    pub trivial: bool,
}

/// Everything rule selection needs to know about a cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphClassification {
    pub disperse_count: u8,
    pub l_faces: Vec<LFace>,
    pub singular_faces: Vec<usize>,
    pub disperse: bool,
    pub continuous: bool,
    /// Neither disperse nor continuous, and free of T- and F-patterns.
    pub regular: bool,
    pub reducible: bool,
}

impl GraphClassification {
    pub fn has_parallel_l_faces(&self) -> bool {
        self.l_faces
            .iter()
            .any(|a| self.l_faces.iter().any(|b| b.face != a.face && face_axis(b.face) == face_axis(a.face)))
    }
}

/// Two disperse nodes on a space diagonal (`D = 2`), or two continuous nodes on
/// one (`D = 6`).
pub fn space_diagonal_pair(s: &States) -> Option<(usize, usize)> {
    let d = disperse_mask(s);
    let odd = match d.count_ones() {
        2 => d,
        6 => !d,
        _ => return None,
    };
    let a = odd.trailing_zeros() as usize;
    let b = 7 - odd.leading_zeros() as usize;
    (a ^ b == 7).then_some((a, b))
}

pub fn classify_states(s: &States) -> GraphClassification {
    let d = disperse_count(s);
    let mut l_faces = Vec::new();
    let mut singular_faces = Vec::new();
    for f in 0..6 {
        match classify_face_states(face_states(s, f)) {
            FaceClass::TrivialLFace => l_faces.push(LFace { face: f, trivial: true }),
            FaceClass::NonTrivialLFace => l_faces.push(LFace { face: f, trivial: false }),
            FaceClass::SingularFace => singular_faces.push(f),
            _ => {}
        }
    }
    let disperse = d == 8;
    let continuous = d == 0;
    let regular = !disperse && !continuous && !crate::rewrite_rules::has_local_strip_pattern(s);
    let reducible = regular && (!l_faces.is_empty() || space_diagonal_pair(s).is_some());
    GraphClassification {
        disperse_count: d,
        l_faces,
        singular_faces,
        disperse,
        continuous,
        regular,
        reducible,
    }
}

pub fn classify_graph(g: &LabeledCuboidGraph) -> GraphClassification {
    classify_states(&g.states())
}

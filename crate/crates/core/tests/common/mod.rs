//! Test-only helpers: a brute-force face-cycle oracle for single-cell
//! extraction and small field builders.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use isograph::cube_graph::{ConfigSignature, NodeState, EDGES};
use isograph::isopath_extract::{extract_cell, IsoContext, LocalPoint};
use isograph::scalar_grid::{CuboidPartition, NodeLabeling};
use isograph::topo_verify::{state_label, EMBED_ISO};

pub const SUB: u8 = 0;
pub const ISO: u8 = 1;
pub const DISP: u8 = 2;

/// Iso-point seen by the oracle: a corner node or the open edge between two corners.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pt {
    Node(u8),
    Edge(u8, u8),
}

pub type Cycle = Vec<Pt>;

fn nb(c: usize) -> [usize; 3] {
    [c ^ 4, c ^ 2, c ^ 1]
}

fn edges() -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for bit in [4, 2, 1] {
        for a in 0..8 {
            if a & bit == 0 {
                out.push((a, a | bit));
            }
        }
    }
    out
}

fn faces() -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for bit in [4usize, 2, 1] {
        let o: Vec<usize> = [4, 2, 1].into_iter().filter(|&b| b != bit).collect();
        for v in [0, bit] {
            out.push([v, v | o[0], v | o[0] | o[1], v | o[1]]);
        }
    }
    out
}

pub fn decode(code: u16) -> [u8; 8] {
    std::array::from_fn(|i| ((code / 3u16.pow(i as u32)) % 3) as u8)
}

fn strip(st: &[u8; 8]) -> [u8; 8] {
    let mut st = *st;
    let is: Vec<usize> = (0..8).filter(|&c| st[c] == ISO).collect();
    let ds = (0..8).filter(|&c| st[c] == DISP).count();
    if is.len() == 4 && ds == 4 && is.iter().all(|&c| nb(c).iter().filter(|&&n| st[n] == ISO).count() == 1) {
        let pairs: Vec<(usize, usize)> =
            is.iter().flat_map(|&c| nb(c).into_iter().filter(move |&n| c < n).map(move |n| (c, n))).filter(|&(_, n)| st[n] == ISO).collect();
        let ((a, b), (x, y)) = (pairs[0], pairs[1]);
        if a ^ b == x ^ y && (a ^ x).count_ones() == 2 {
            for c in is {
                st[c] = DISP;
            }
            return st;
        }
    }
    let t1: Vec<usize> = (0..8).filter(|&c| st[c] == ISO && nb(c).iter().all(|&n| st[n] == DISP)).collect();
    for c in t1 {
        st[c] = DISP;
    }
    for (a, b) in edges() {
        if st[a] == ISO && st[b] == ISO {
            let others: Vec<usize> = nb(a).into_iter().chain(nb(b)).filter(|&n| n != a && n != b).collect();
            let far: Vec<usize> = (0..8).filter(|c| !others.contains(c) && *c != a && *c != b).collect();
            if others.iter().all(|&n| st[n] == DISP) && far.iter().any(|&f| st[f] == DISP) {
                st[a] = DISP;
                st[b] = DISP;
            }
        }
    }
    st
}

fn ipt(st: &[u8; 8], a: usize, b: usize) -> Option<Pt> {
    if (st[a] == DISP) == (st[b] == DISP) {
        return None;
    }
    let c = if st[a] == DISP { b } else { a };
    if st[c] == ISO {
        return Some(Pt::Node(c as u8));
    }
    Some(Pt::Edge(a.min(b) as u8, a.max(b) as u8))
}

#[derive(PartialEq)]
enum FaceKind {
    Uniform,
    Singular,
    LFace,
    Regular,
}

fn face_kind(st: &[u8; 8], f: &[usize; 4]) -> FaceKind {
    let s: Vec<u8> = f.iter().map(|&c| st[c]).collect();
    let nd = s.iter().filter(|&&x| x == DISP).count();
    if nd == 0 || nd == 4 {
        return FaceKind::Uniform;
    }
    if nd == 2 && ((s[0] == DISP && s[2] == DISP) || (s[1] == DISP && s[3] == DISP)) {
        return FaceKind::LFace;
    }
    if nd == 3 && s.contains(&ISO) {
        return FaceKind::Singular;
    }
    FaceKind::Regular
}

fn reg_line(st: &[u8; 8], f: &[usize; 4]) -> (Pt, Pt) {
    let mut u: Vec<Pt> = Vec::new();
    for i in 0..4 {
        if let Some(p) = ipt(st, f[i], f[(i + 1) % 4]) {
            if !u.contains(&p) {
                u.push(p);
            }
        }
    }
    assert_eq!(u.len(), 2, "regular face must carry two points");
    (u[0], u[1])
}

fn assemble(lines: &[(Pt, Pt)]) -> Option<Cycle> {
    let mut adj: BTreeMap<Pt, Vec<(Pt, usize)>> = BTreeMap::new();
    for (k, &(a, b)) in lines.iter().enumerate() {
        adj.entry(a).or_default().push((b, k));
        adj.entry(b).or_default().push((a, k));
    }
    if adj.values().any(|v| v.len() != 2) {
        return None;
    }
    let start = *adj.keys().next()?;
    let mut cyc = vec![start];
    let mut used = vec![false; lines.len()];
    let mut cur = start;
    loop {
        let Some(&(p, k)) = adj[&cur].iter().filter(|(_, k)| !used[*k]).min() else { break };
        used[k] = true;
        if p == start {
            break;
        }
        cyc.push(p);
        cur = p;
    }
    if used.iter().any(|u| !u) || cyc.len() < 3 {
        return None;
    }
    Some(cyc)
}

/// Rotation- and direction-independent form of a cycle.
pub fn canon(cyc: &[Pt]) -> Cycle {
    let n = cyc.len();
    let rev: Vec<Pt> = cyc.iter().rev().copied().collect();
    let mut best: Option<Cycle> = None;
    for seq in [cyc.to_vec(), rev] {
        for r in 0..n {
            let s: Cycle = seq[r..].iter().chain(&seq[..r]).copied().collect();
            if best.as_ref().is_none_or(|b| s < *b) {
                best = Some(s);
            }
        }
    }
    best.unwrap_or_default()
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, x: usize) -> usize {
        let mut x = x;
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
    }
}

/// Face-cycle oracle: after stripping, group every face line by the pair of
/// (disperse region, continuous region) it separates and close each group
/// into a cycle. Returns `Err` when a group does not form one simple cycle.
pub fn oracle(st0: &[u8; 8]) -> Result<Vec<Cycle>, String> {
    let st = strip(st0);
    let nd = st.iter().filter(|&&s| s == DISP).count();
    if nd == 0 || nd == 8 {
        return Ok(Vec::new());
    }
    let faces = faces();
    let mut dsu = Dsu((0..8).collect());
    for (a, b) in edges() {
        if st[a] == DISP && st[b] == DISP {
            dsu.union(a, b);
        }
    }
    let dreg: Vec<usize> = (0..8).map(|c| dsu.find(c)).collect();
    let mut modes: HashMap<usize, bool> = HashMap::new();
    for (fi, f) in faces.iter().enumerate() {
        if face_kind(&st, f) == FaceKind::LFace {
            let ds: Vec<usize> = f.iter().copied().filter(|&c| st[c] == DISP).collect();
            modes.insert(fi, dreg[ds[0]] != dreg[ds[1]]);
        }
    }
    for (a, b) in edges() {
        if st[a] != DISP && st[b] != DISP {
            dsu.union(a, b);
        }
    }
    for (&fi, &split) in &modes {
        if split {
            let cs: Vec<usize> = faces[fi].iter().copied().filter(|&c| st[c] != DISP).collect();
            dsu.union(cs[0], cs[1]);
        }
    }
    let reg: Vec<usize> = (0..8).map(|c| dsu.find(c)).collect();
    let mut groups: BTreeMap<(usize, usize), Vec<(Pt, Pt)>> = BTreeMap::new();
    for (fi, f) in faces.iter().enumerate() {
        match face_kind(&st, f) {
            FaceKind::Regular => {
                let d = f.iter().copied().find(|&c| st[c] == DISP).unwrap();
                let c = f.iter().copied().find(|&c| st[c] != DISP).unwrap();
                groups.entry((reg[d], reg[c])).or_default().push(reg_line(&st, f));
            }
            FaceKind::LFace => {
                let split = modes[&fi];
                for i in 0..4 {
                    let c = f[i];
                    let p = f[(i + 3) % 4];
                    let n = f[(i + 1) % 4];
                    let line = (ipt(&st, p, c).unwrap(), ipt(&st, c, n).unwrap());
                    if split && st[c] == DISP {
                        let other = f.iter().copied().find(|&x| st[x] != DISP).unwrap();
                        groups.entry((reg[c], reg[other])).or_default().push(line);
                    }
                    if !split && st[c] == SUB {
                        let d = f.iter().copied().find(|&x| st[x] == DISP).unwrap();
                        groups.entry((reg[d], reg[c])).or_default().push(line);
                    }
                }
            }
            FaceKind::Uniform | FaceKind::Singular => {}
        }
    }
    groups
        .into_iter()
        .map(|(g, lines)| assemble(&lines).ok_or_else(|| format!("group {g:?} does not close: {lines:?}")))
        .collect()
}

pub fn local_to_pt(p: LocalPoint) -> Pt {
    match p {
        LocalPoint::Corner(c) => Pt::Node(c),
        LocalPoint::Edge(e) => {
            let [a, b] = EDGES[e as usize];
            Pt::Edge(a.min(b) as u8, a.max(b) as u8)
        }
    }
}

/// Library extraction for a signature placed in a lone cell, as sorted canonical cycles.
pub fn library_cycles(sig: ConfigSignature) -> Vec<Cycle> {
    let states = sig.states();
    let part = CuboidPartition::unit([1, 1, 1]).unwrap();
    let labels = NodeLabeling::from_fn(&part, |v| {
        let c = (v[0] << 2) | (v[1] << 1) | v[2];
        state_label(states[c])
    })
    .unwrap();
    let ctx = IsoContext::new(&labels, &part, EMBED_ISO, 1e-12).unwrap();
    let paths = extract_cell(&ctx, [0, 0, 0]).unwrap();
    let mut out: Vec<Cycle> = paths.iter().map(|p| canon(&p.points.iter().map(|&q| local_to_pt(q)).collect::<Vec<_>>())).collect();
    out.sort();
    out
}

pub fn oracle_cycles(code: u16) -> Result<Vec<Cycle>, String> {
    let mut out: Vec<Cycle> = oracle(&decode(code))?.iter().map(|c| canon(c)).collect();
    out.sort();
    Ok(out)
}

pub fn states_of(code: u16) -> [NodeState; 8] {
    ConfigSignature::from_code(code).states()
}

//! Exhaustive and sampled machine checks of the finite topological claims
//! behind the extraction: path multiplicity, face-class bounds, edge parity,
//! connectivity and neighbor-ring size.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cube_graph::{
    classify_states, space_diagonal_pair, ConfigSignature, NodeState,
    States, CORNER_OFFSETS,
};
use crate::isopath_extract::{extract_cell, extract_context, IsoContext, PathKind, PointKey};
use crate::rewrite_rules::{decompose, is_reducible_states, select_s_rule, strip_states, FaceNeighbors};
use crate::scalar_grid::{label_vertices, CuboidPartition, NodeLabeling, VolumeFractionField};
use crate::surface_components::{
    analyze, audit_topology, disperse_connected, pair_lines, DisperseIndex, LineKey, ViolationKind,
};
use crate::surface_geometry::{pseudo_normal_closed_form, pseudo_normal_double_sum};

/// Seed of every sampled check unless overridden.
pub const DEFAULT_SEED: u64 = 0x150C_0FFEE;

/// Iso-level used for embedded and ring configurations.
pub const EMBED_ISO: f64 = 0.5;

/// The center cell of the 3x3x3 embedding grid.
pub const EMBED_CELL: [usize; 3] = [1, 1, 1];

pub fn state_label(s: NodeState) -> f64 {
    match s {
        NodeState::Sub => 0.0,
        NodeState::Iso => EMBED_ISO,
        NodeState::Disperse => 1.0,
    }
}

/// All `3^8` signatures in code order: all-Sub first, all-Disperse last.
pub fn enumerate_signatures() -> impl Iterator<Item = ConfigSignature> + Clone {
    (0..ConfigSignature::COUNT).map(ConfigSignature::from_code)
}

/// A 3x3x3-cell grid whose center cell carries `states` and whose other
/// vertices are all continuous.
pub fn embedded_grid(states: &States) -> (CuboidPartition, NodeLabeling) {
    let part = CuboidPartition::unit([3, 3, 3]).expect("valid dims");
    let labels = NodeLabeling::from_fn(&part, |v| {
        let inside = (0..3).all(|a| (1..=2).contains(&v[a]));
        if !inside {
            return 0.0;
        }
        let o = [v[0] - 1, v[1] - 1, v[2] - 1];
        let c = CORNER_OFFSETS.iter().position(|x| *x == o).expect("corner");
        state_label(states[c])
    })
    .expect("valid labels");
    (part, labels)
}

/// One verified claim with its domain and, on failure, a reproducible witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoremCheck {
    pub id: &'static str,
    pub claim: &'static str,
    pub domain: String,
    pub cases: u64,
    pub counterexample: Option<String>,
}

impl TheoremCheck {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

impl fmt::Display for TheoremCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {} ({} cases over {})", self.id, self.claim, self.cases, self.domain)?;
        if let Some(c) = &self.counterexample {
            write!(f, ": {c}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub checks: Vec<TheoremCheck>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(TheoremCheck::passed)
    }

    /// Associative merge.
    pub fn merge(mut self, other: VerifyReport) -> VerifyReport {
        self.checks.extend(other.checks);
        self
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed()).count();
        writeln!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub ring_trials: u64,
    pub random_fields: u64,
    pub field_size: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: DEFAULT_SEED,
            ring_trials: 1_000_000,
            random_fields: 100,
            field_size: 16,
        }
    }
}

fn first_failure<F>(cases: u64, f: F) -> Option<String>
where
    F: Fn(u64) -> Option<String> + Sync,
{
    (0..cases)
        .into_par_iter()
        .filter_map(|i| f(i).map(|msg| (i, msg)))
        .min_by_key(|(i, _)| *i)
        .map(|(_, m)| m)
}

fn check(id: &'static str, claim: &'static str, domain: &str, cases: u64, counterexample: Option<String>) -> TheoremCheck {
    TheoremCheck {
        id,
        claim,
        domain: domain.to_string(),
        cases,
        counterexample,
    }
}

/// Per-signature facts gathered from the embedded extraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignatureOutcome {
    pub code: u16,
    pub inner_paths: usize,
    pub outer_paths: usize,
}

pub fn signature_outcome(sig: ConfigSignature) -> Result<SignatureOutcome, String> {
    let states = sig.states();
    let (part, labels) = embedded_grid(&states);
    let ctx = IsoContext::new(&labels, &part, EMBED_ISO, 0.0).map_err(|e| e.to_string())?;
    let paths = extract_cell(&ctx, EMBED_CELL).map_err(|e| format!("signature {}: {e}", sig.code))?;
    let inner = paths.iter().filter(|p| p.kind == PathKind::Inner).count();
    Ok(SignatureOutcome {
        code: sig.code,
        inner_paths: inner,
        outer_paths: paths.len() - inner,
    })
}

/// Path-multiplicity claims over all signatures.
pub fn check_path_multiplicity() -> Vec<TheoremCheck> {
    let outcomes: Vec<Result<SignatureOutcome, String>> =
        enumerate_signatures().collect::<Vec<_>>().into_par_iter().map(signature_outcome).collect();
    let mut irreducible = (0u64, None);
    let mut trivial_l = (0u64, None);
    let mut diagonal = (0u64, None);
    let mut at_most_four = (0u64, None);
    let note = |slot: &mut (u64, Option<String>), ok: bool, msg: String| {
        slot.0 += 1;
        if !ok && slot.1.is_none() {
            slot.1 = Some(msg);
        }
    };
    for (code, o) in outcomes.iter().enumerate() {
        let o = match o {
            Ok(o) => o,
            Err(e) => {
                note(&mut at_most_four, false, e.clone());
                continue;
            }
        };
        let s = ConfigSignature::from_code(code as u16).states();
        let stripped = strip_states(&s, &FaceNeighbors::NONE);
        let d = stripped.iter().filter(|x| x.is_disperse()).count();
        let msg = |what: &str| format!("signature {code}: {what}, got {} inner paths", o.inner_paths);
        note(&mut at_most_four, o.inner_paths <= 4, msg("more than 4 inner paths"));
        if (1..=7).contains(&d) && !is_reducible_states(&stripped) {
            note(&mut irreducible, o.inner_paths == 1, msg("irreducible"));
        }
        let class = classify_states(&s);
        if class.regular && class.l_faces.iter().any(|l| l.trivial) {
            note(&mut trivial_l, o.inner_paths == 2, msg("regular with a trivial L-face"));
        }
        if class.regular && space_diagonal_pair(&s).is_some() {
            note(&mut diagonal, o.inner_paths == 2, msg("space-diagonal pair"));
        }
    }
    vec![
        check("irreducible-single-path", "an irreducible graph has one iso-path", "irreducible signatures", irreducible.0, irreducible.1),
        check("trivial-l-face-two-paths", "a regular graph with a trivial L-face has two inner iso-paths", "regular signatures with a trivial L-face", trivial_l.0, trivial_l.1),
        check("space-diagonal-two-paths", "a space-diagonal pair yields two iso-paths", "regular D=2/D=6 space-diagonal signatures", diagonal.0, diagonal.1),
        check("at-most-four-paths", "a cell carries at most four inner iso-paths", "all signatures", at_most_four.0, at_most_four.1),
    ]
}

/// A regular graph has at most three singular faces.
pub fn check_singular_faces() -> TheoremCheck {
    let mut cases = 0;
    let mut bad = None;
    for sig in enumerate_signatures() {
        let class = classify_states(&sig.states());
        if !class.regular {
            continue;
        }
        cases += 1;
        if class.singular_faces.len() > 3 && bad.is_none() {
            bad = Some(format!("signature {}: {} singular faces", sig.code, class.singular_faces.len()));
        }
    }
    check("singular-face-bound", "a regular graph has at most three singular faces", "regular signatures", cases, bad)
}

/// Every reducible stripped signature has an S-rule, and decomposition terminates.
pub fn check_rule_table() -> TheoremCheck {
    let mut cases = 0;
    let mut bad = None;
    for sig in enumerate_signatures() {
        let s = strip_states(&sig.states(), &FaceNeighbors::NONE);
        if !is_reducible_states(&s) {
            continue;
        }
        cases += 1;
        let class = classify_states(&s);
        let has_l = !class.l_faces.is_empty();
        let rule_ok = !has_l || select_s_rule(&class).is_ok();
        let g = crate::cube_graph::LabeledCuboidGraph::from_states(&s, EMBED_ISO);
        if (!rule_ok || decompose(&g).is_err()) && bad.is_none() {
            bad = Some(format!("signature {}", sig.code));
        }
    }
    check("l-face-rule-table", "every reducible graph has an S-rule", "reducible stripped signatures", cases, bad)
}

/// Double-sum and closed form agree on all 254 sign patterns; swapping the
/// phases negates the vector.
pub fn check_pseudo_normal_identity() -> TheoremCheck {
    let corners = CORNER_OFFSETS.map(|o| [o[0] as i64, o[1] as i64, o[2] as i64]);
    let mut bad = None;
    for m in 1u16..255 {
        let s: States = std::array::from_fn(|c| if m & (1 << c) != 0 { NodeState::Disperse } else { NodeState::Sub });
        let swapped: States = std::array::from_fn(|c| if m & (1 << c) != 0 { NodeState::Sub } else { NodeState::Disperse });
        let a = pseudo_normal_double_sum(&s, &corners);
        let b = pseudo_normal_closed_form(&s, &corners);
        let w = pseudo_normal_double_sum(&swapped, &corners);
        if (a != b || w != a.map(|x| -x)) && bad.is_none() {
            bad = Some(format!("mask {m:#010b}: {a:?} vs {b:?}, swapped {w:?}"));
        }
    }
    check("pseudo-normal-identity", "double sum equals closed form; phase swap negates", "254 sign patterns", 254, bad)
}

/// Embedded extraction of every signature pairs all interior lines without
/// triples.
pub fn check_embedded_pairing() -> TheoremCheck {
    let bad = first_failure(ConfigSignature::COUNT as u64, |code| {
        let s = ConfigSignature::from_code(code as u16).states();
        let (part, labels) = embedded_grid(&s);
        let ctx = IsoContext::new(&labels, &part, EMBED_ISO, 0.0).ok()?;
        let surface = match extract_context(&ctx) {
            Ok(x) => x,
            Err(e) => return Some(format!("signature {code}: {e}")),
        };
        let topo = analyze(&surface, &ctx);
        let v = topo.pairing.violations.first()?;
        Some(format!("signature {code}: {:?} {}", v.kind, v.detail))
    });
    check("no-triple-lines", "no iso-line joins three surfaces", "embedded signatures", ConfigSignature::COUNT as u64, bad)
}

/// States of the 18 vertices of a 2x2x1-cell ring, row-major `[x][y][z]`.
pub type RingStates = [NodeState; 18];

/// Central lattice edge of the ring: `(1,1,0)-(1,1,1)`.
pub const RING_EDGE: [[usize; 3]; 2] = [[1, 1, 0], [1, 1, 1]];

fn ring_index(v: [usize; 3]) -> usize {
    (v[0] * 3 + v[1]) * 2 + v[2]
}

pub fn ring_grid(states: &RingStates) -> (CuboidPartition, NodeLabeling) {
    let part = CuboidPartition::unit([2, 2, 1]).expect("valid dims");
    let labels = NodeLabeling::from_fn(&part, |v| state_label(states[ring_index(v)])).expect("labels");
    (part, labels)
}

/// Uniform random states around an iso-iso central edge.
pub fn random_ring(rng: &mut impl Rng) -> RingStates {
    let mut s = [NodeState::Sub; 18];
    for x in s.iter_mut() {
        *x = [NodeState::Sub, NodeState::Iso, NodeState::Disperse][rng.gen_range(0..3)];
    }
    for v in RING_EDGE {
        s[ring_index(v)] = NodeState::Iso;
    }
    s
}

/// Result of extracting a ring and pairing at its central edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeRingOutcome {
    pub incidence: usize,
    pub pairs: usize,
    pub violation: Option<String>,
}

pub fn edge_ring_outcome(states: &RingStates) -> EdgeRingOutcome {
    let (part, labels) = ring_grid(states);
    let fail = |msg: String| EdgeRingOutcome {
        incidence: 0,
        pairs: 0,
        violation: Some(msg),
    };
    let ctx = match IsoContext::new(&labels, &part, EMBED_ISO, 0.0) {
        Ok(c) => c,
        Err(e) => return fail(e.to_string()),
    };
    let surface = match extract_context(&ctx) {
        Ok(s) => s,
        Err(e) => return fail(e.to_string()),
    };
    let index = DisperseIndex::new(&ctx);
    let pairing = pair_lines(&surface, &ctx, &index);
    let key = LineKey::new(
        PointKey::Node(part.vertex_index(RING_EDGE[0])),
        PointKey::Node(part.vertex_index(RING_EDGE[1])),
    );
    let Some(rec) = pairing.lines.iter().find(|r| r.line == key) else {
        return EdgeRingOutcome {
            incidence: 0,
            pairs: 0,
            violation: None,
        };
    };
    let n = rec.incidences.len();
    let mut violation = None;
    if !matches!(n, 2 | 4 | 6 | 8) {
        violation = Some(format!("incidence {n}"));
    } else if rec.pairs.len() * 2 != n {
        let kinds: Vec<ViolationKind> = pairing.violations.iter().map(|v| v.kind).collect();
        violation = Some(format!("incidence {n}, {} pairs, {kinds:?}", rec.pairs.len()));
    } else if rec.pairs.iter().any(|&(i, j)| !disperse_connected(rec, i, j, &index)) {
        violation = Some("matched pair not disperse connected".into());
    }
    EdgeRingOutcome {
        incidence: n,
        pairs: rec.pairs.len(),
        violation,
    }
}

/// Every Sub/Disperse labeling of the 16 ring vertices off the central edge.
pub fn binary_ring_family() -> impl ParallelIterator<Item = RingStates> {
    (0u32..1 << 16).into_par_iter().map(|m| {
        let mut s = [NodeState::Sub; 18];
        let mut k = 0;
        for (i, x) in s.iter_mut().enumerate() {
            let v = [i / 6, i / 2 % 3, i % 2];
            if RING_EDGE.contains(&v) {
                *x = NodeState::Iso;
            } else {
                *x = if m >> k & 1 == 1 { NodeState::Disperse } else { NodeState::Sub };
                k += 1;
            }
        }
        s
    })
}

/// The ring whose four axial neighbors of the edge are disperse and whose
/// four diagonal columns are continuous: eight incident paths.
pub fn eight_path_ring() -> RingStates {
    let mut s = [NodeState::Sub; 18];
    for x in 0..3 {
        for y in 0..3 {
            for z in 0..2 {
                let axial = (x == 1) != (y == 1);
                s[ring_index([x, y, z])] = if x == 1 && y == 1 {
                    NodeState::Iso
                } else if axial {
                    NodeState::Disperse
                } else {
                    NodeState::Sub
                };
            }
        }
    }
    s
}

fn ring_trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Edge parity and unique matching at lattice-edge iso-lines.
pub fn check_edge_parity(seed: u64, trials: u64) -> Vec<TheoremCheck> {
    let family: Vec<RingStates> = binary_ring_family().collect();
    let fam_bad = first_failure(family.len() as u64, |i| {
        edge_ring_outcome(&family[i as usize]).violation.map(|v| format!("binary ring {i}: {v}"))
    });
    let eight = edge_ring_outcome(&eight_path_ring());
    let eight_bad = match (&eight.violation, eight.incidence) {
        (Some(v), _) => Some(v.clone()),
        (None, 8) => None,
        (None, n) => Some(format!("incidence {n}, expected 8")),
    };
    let rand_bad = first_failure(trials, |t| {
        let mut rng = ring_trial_rng(seed, t);
        let s = random_ring(&mut rng);
        edge_ring_outcome(&s).violation.map(|v| format!("seed {seed:#x} trial {t}: {v}"))
    });
    vec![
        check("edge-parity-binary-family", "lattice-edge incidence is even with a unique matching", "all 2^16 Sub/Disperse rings", family.len() as u64, fam_bad),
        check("edge-parity-eight", "lattice-edge incidence reaches eight", "axial-disperse ring", 1, eight_bad),
        check("edge-parity-random", "lattice-edge incidence is even with a unique matching", &format!("random rings, seed {seed:#x}"), trials, rand_bad),
    ]
}

/// Uniform random vertex labels on an `n^3`-cell grid.
pub fn random_labels(n: usize, seed: u64, index: u64) -> (CuboidPartition, NodeLabeling) {
    let part = CuboidPartition::unit([n, n, n]).expect("valid dims");
    let mut rng = ring_trial_rng(seed ^ 0xF1E1D, index);
    let values = (0..part.vertex_count()).map(|_| rng.gen::<f64>()).collect();
    let labels = NodeLabeling::new(part.vertex_dims(), values).expect("labels");
    (part, labels)
}

fn field_audit(part: &CuboidPartition, labels: &NodeLabeling, c: f64) -> Result<crate::surface_components::AuditReport, String> {
    let ctx = IsoContext::new(labels, part, c, crate::cube_graph::DEFAULT_ISO_TOLERANCE).map_err(|e| e.to_string())?;
    let surface = extract_context(&ctx).map_err(|e| e.to_string())?;
    let topo = analyze(&surface, &ctx);
    Ok(audit_topology(&surface, &ctx, &topo))
}

fn first_violation(report: &crate::surface_components::AuditReport, kinds: &[ViolationKind]) -> Option<String> {
    report
        .violations
        .iter()
        .find(|v| kinds.contains(&v.kind))
        .map(|v| format!("{:?} {}", v.kind, v.detail))
}

/// Connectivity and ring bound on random fields, plus ring bound on a sphere and a slab.
pub fn check_fields(seed: u64, count: u64, n: usize) -> Vec<TheoremCheck> {
    let audits: Vec<Result<_, String>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let (part, labels) = random_labels(n, seed, i);
            field_audit(&part, &labels, 0.5)
        })
        .collect();
    let pick = |kinds: &[ViolationKind]| {
        audits.iter().enumerate().find_map(|(i, a)| match a {
            Err(e) => Some(format!("field {i}: {e}")),
            Ok(r) => first_violation(r, kinds).map(|v| format!("field {i}: {v}")),
        })
    };
    let connect = pick(&[ViolationKind::LowIncidence, ViolationKind::Pairing, ViolationKind::TripleLine]);
    let rings = pick(&[ViolationKind::OpenRing, ViolationKind::RingSize]);
    let domain = format!("{count} random {n}^3 fields, seed {seed:#x}");
    let mut shaped_bad = None;
    for (name, (part, field)) in [
        ("sphere", crate::fixtures::unit_sphere(n).expect("fixture")),
        ("slab", crate::fixtures::slab(n, 0.3, 0.7).expect("fixture")),
    ] {
        let labels = label_vertices(&field, &part).expect("labels");
        let r = field_audit(&part, &labels, 0.5);
        let v = match r {
            Err(e) => Some(e),
            Ok(r) => first_violation(&r, &[ViolationKind::OpenRing, ViolationKind::RingSize]),
        };
        if let (Some(v), None) = (v, &shaped_bad) {
            shaped_bad = Some(format!("{name}: {v}"));
        }
    }
    vec![
        check("interior-line-connectivity", "every interior iso-line joins at least two iso-paths", &domain, count, connect),
        check("neighbor-ring-bound", "interior rings close with 4 to 8 iso-paths", &domain, count, rings),
        check("neighbor-ring-bound-shapes", "interior rings close with 4 to 8 iso-paths", &format!("sphere and slab on {n}^3"), 2, shaped_bad),
    ]
}

/// Runs every registered check.
pub fn check_all(cfg: &VerifyConfig) -> VerifyReport {
    let mut checks = check_path_multiplicity();
    checks.push(check_singular_faces());
    checks.push(check_rule_table());
    checks.push(check_pseudo_normal_identity());
    checks.push(check_embedded_pairing());
    checks.extend(check_edge_parity(cfg.seed, cfg.ring_trials));
    checks.extend(check_fields(cfg.seed, cfg.random_fields, cfg.field_size));
    VerifyReport { checks }
}

/// A random volume-fraction field with values in `[0, 1]`.
pub fn random_fractions(n: usize, seed: u64, index: u64) -> (CuboidPartition, VolumeFractionField) {
    let part = CuboidPartition::unit([n, n, n]).expect("valid dims");
    let mut rng = ring_trial_rng(seed ^ 0xF4AC, index);
    let values = (0..part.cell_count()).map(|_| rng.gen::<f64>()).collect();
    (part, VolumeFractionField::new([n, n, n], values).expect("field"))
}

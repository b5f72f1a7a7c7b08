mod common;

use std::collections::HashMap;

use isograph::cube_graph::{classify_face_states, face_states, ConfigSignature, FaceClass, FACES};
use isograph::fixtures::unit_sphere;
use isograph::isopath_extract::{extract_cell, extract_grid, IsoContext, PathKind};
use isograph::mesh_io::SurfaceMesh;
use isograph::rewrite_rules::{is_reducible_states, strip_states, FaceNeighbors};
use isograph::scalar_grid::{label_vertices, CuboidPartition, NodeLabeling};
use isograph::surface_components::analyze;
use isograph::topo_verify::{embedded_grid, random_labels, EMBED_CELL, EMBED_ISO};
use proptest::prelude::*;

#[test]
fn embedded_signatures_match_oracle() {
    let mut bad = Vec::new();
    for code in 0..ConfigSignature::COUNT {
        let states = ConfigSignature::from_code(code).states();
        let (part, labels) = embedded_grid(&states);
        let ctx = IsoContext::new(&labels, &part, EMBED_ISO, 0.0).unwrap();
        let mut got: Vec<common::Cycle> = extract_cell(&ctx, EMBED_CELL)
            .unwrap()
            .iter()
            .filter(|p| p.kind != PathKind::Outer)
            .map(|p| common::canon(&p.points.iter().map(|&q| common::local_to_pt(q)).collect::<Vec<_>>()))
            .collect();
        got.sort();
        if common::oracle_cycles(code).ok() != Some(got) {
            bad.push(code);
        }
    }
    assert!(bad.is_empty(), "{} mismatches, first {:?}", bad.len(), &bad[..bad.len().min(5)]);
}

#[test]
fn empty_field_gives_empty_surface() {
    let part = CuboidPartition::unit_box(4).unwrap();
    let labels = NodeLabeling::from_fn(&part, |_| 0.0).unwrap();
    let s = extract_grid(&labels, &part, 0.5).unwrap();
    assert!(s.paths.is_empty() && s.points.is_empty());
}

#[test]
fn sphere_is_a_closed_genus_zero_surface() {
    let (part, field) = unit_sphere(32).unwrap();
    let labels = label_vertices(&field, &part).unwrap();
    let ctx = IsoContext::new(&labels, &part, 0.5, 1e-12).unwrap();
    let s = isograph::isopath_extract::extract_context(&ctx).unwrap();
    let topo = analyze(&s, &ctx);
    assert_eq!(topo.components.len(), 1);
    assert!(topo.components[0].closed);
    assert_eq!(SurfaceMesh::from_surface(&s, &topo).euler_characteristic(), 2);
}

#[test]
fn regular_faces_carry_one_line_of_one_inner_path() {
    for code in 0..ConfigSignature::COUNT {
        let states = ConfigSignature::from_code(code).states();
        let stripped = strip_states(&states, &FaceNeighbors::NONE);
        if is_reducible_states(&stripped) {
            continue;
        }
        let part = CuboidPartition::unit([1, 1, 1]).unwrap();
        let labels = NodeLabeling::from_fn(&part, |v| {
            isograph::topo_verify::state_label(states[(v[0] << 2) | (v[1] << 1) | v[2]])
        })
        .unwrap();
        let ctx = IsoContext::new(&labels, &part, EMBED_ISO, 0.0).unwrap();
        let paths = extract_cell(&ctx, [0, 0, 0]).unwrap();
        for face in 0..FACES.len() {
            if classify_face_states(face_states(&stripped, face)) != FaceClass::RegularFace {
                continue;
            }
            let lines: usize = paths.iter().map(|p| p.lines().iter().filter(|l| l.face == face).count()).sum();
            assert_eq!(lines, 1, "signature {code} face {face}");
        }
    }
}

fn check_grid_invariants(part: &CuboidPartition, labels: &NodeLabeling, c: f64) -> Result<(), TestCaseError> {
    let ctx = IsoContext::new(labels, part, c, 1e-12).unwrap();
    let s = isograph::isopath_extract::extract_context(&ctx).unwrap();
    for (p, verts) in s.paths.iter().zip(&s.path_vertices) {
        let m = p.points.len();
        if p.kind != PathKind::Outer {
            prop_assert!((3..=6).contains(&m), "inner path of {m} points");
        }
        let mut sorted = verts.clone();
        sorted.sort_unstable();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), m, "path revisits a point");
        for (pos, &v) in p.positions.iter().zip(verts) {
            prop_assert_eq!(pos.map(f64::to_bits), s.points[v].position.map(f64::to_bits));
        }
        for l in p.lines() {
            let face = FACES[l.face];
            let on_face = |q: isograph::isopath_extract::LocalPoint| q.corners() & !face.iter().fold(0u8, |a, &c| a | 1 << c) == 0;
            prop_assert!(on_face(l.a) && on_face(l.b), "line leaves its face");
        }
    }
    let mut seen: HashMap<_, usize> = HashMap::new();
    for (i, pt) in s.points.iter().enumerate() {
        prop_assert!(seen.insert(pt.key, i).is_none(), "point key welded twice");
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_grids_satisfy_path_invariants(seed in any::<u64>(), n in 2usize..7, c in 0.2f64..0.8) {
        let (part, labels) = random_labels(n, seed, 0);
        check_grid_invariants(&part, &labels, c)?;
    }

    #[test]
    fn ternary_grids_satisfy_path_invariants(seed in any::<u64>(), n in 2usize..6) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let part = CuboidPartition::unit([n, n, n]).unwrap();
        let values = (0..part.vertex_count()).map(|_| [0.0, 0.5, 1.0][rng.gen_range(0..3)]).collect();
        let labels = NodeLabeling::new(part.vertex_dims(), values).unwrap();
        check_grid_invariants(&part, &labels, 0.5)?;
    }
}

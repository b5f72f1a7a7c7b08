//! Connected iso-surface extraction on cuboid grids by graph rewriting.

pub mod cube_graph;
pub mod rewrite_rules;
pub mod isopath_extract;
pub mod scalar_grid;
pub mod surface_components;
pub mod surface_geometry;
pub mod fixtures;
pub mod topo_verify;
pub mod mesh_io;

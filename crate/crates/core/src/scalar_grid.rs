//! Cuboid partitions, cell-centered volume fractions, vertex labels and the
//! volume-conserving iso-level solve.

use nalgebra::Vector3;
use rayon::prelude::*;
use thiserror::Error;

use crate::cube_graph::{CORNER_OFFSETS, DEFAULT_ISO_TOLERANCE};
use crate::isopath_extract::{cell_disperse_volume, ExtractError, IsoContext};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid dimensions must be at least 1, got {0:?}")]
    InvalidDims([usize; 3]),
    #[error("cell spacing must be positive and finite, got {0:?}")]
    InvalidSpacing([f64; 3]),
    #[error("expected {expected} values, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("value {value} at index {index} is outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("iso-level {0} is outside (0, 1)")]
    InvalidIso(f64),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("target disperse volume is zero")]
    NoInterface,
}

/// Structured partition of a box into `nx * ny * nz` congruent cuboids.
#[derive(Clone, Debug, PartialEq)]
pub struct CuboidPartition {
    pub dims: [usize; 3],
    pub origin: Vector3<f64>,
    pub spacing: Vector3<f64>,
}

impl CuboidPartition {
    pub fn new(dims: [usize; 3], origin: Vector3<f64>, spacing: Vector3<f64>) -> Result<Self, GridError> {
        if dims.contains(&0) {
            return Err(GridError::InvalidDims(dims));
        }
        if spacing.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(GridError::InvalidSpacing([spacing.x, spacing.y, spacing.z]));
        }
        Ok(CuboidPartition { dims, origin, spacing })
    }

    /// Unit spacing, origin at zero.
    pub fn unit(dims: [usize; 3]) -> Result<Self, GridError> {
        Self::new(dims, Vector3::zeros(), Vector3::repeat(1.0))
    }

    /// Partition of the unit cube `[0,1]^3`.
    pub fn unit_box(n: usize) -> Result<Self, GridError> {
        let h = 1.0 / n as f64;
        Self::new([n; 3], Vector3::zeros(), Vector3::repeat(h))
    }

    pub fn cell_count(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn vertex_dims(&self) -> [usize; 3] {
        [self.dims[0] + 1, self.dims[1] + 1, self.dims[2] + 1]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_dims().iter().product()
    }

    pub fn vertex_index(&self, v: [usize; 3]) -> usize {
        let d = self.vertex_dims();
        (v[0] * d[1] + v[1]) * d[2] + v[2]
    }

    pub fn vertex_coords(&self, id: usize) -> [usize; 3] {
        let d = self.vertex_dims();
        [id / (d[1] * d[2]), (id / d[2]) % d[1], id % d[2]]
    }

    pub fn vertex_position(&self, v: [usize; 3]) -> Vector3<f64> {
        Vector3::new(
            self.origin.x + v[0] as f64 * self.spacing.x,
            self.origin.y + v[1] as f64 * self.spacing.y,
            self.origin.z + v[2] as f64 * self.spacing.z,
        )
    }

    pub fn cell_index(&self, c: [usize; 3]) -> usize {
        (c[0] * self.dims[1] + c[1]) * self.dims[2] + c[2]
    }

    pub fn cell_coords(&self, id: usize) -> [usize; 3] {
        let d = self.dims;
        [id / (d[1] * d[2]), (id / d[2]) % d[1], id % d[2]]
    }

    pub fn contains_cell(&self, c: [i64; 3]) -> bool {
        (0..3).all(|a| c[a] >= 0 && (c[a] as usize) < self.dims[a])
    }

    /// Lattice vertex of a cell corner.
    pub fn corner_vertex(&self, cell: [usize; 3], corner: usize) -> [usize; 3] {
        let o = CORNER_OFFSETS[corner];
        [cell[0] + o[0], cell[1] + o[1], cell[2] + o[2]]
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.x * self.spacing.y * self.spacing.z
    }

    pub fn domain_volume(&self) -> f64 {
        self.cell_volume() * self.cell_count() as f64
    }

    /// Per-face flags (in face order) marking faces on the domain boundary.
    pub fn boundary_flags(&self, cell: [usize; 3]) -> [bool; 6] {
        let mut out = [false; 6];
        for a in 0..3 {
            out[2 * a] = cell[a] == 0;
            out[2 * a + 1] = cell[a] + 1 == self.dims[a];
        }
        out
    }

    pub fn is_boundary_cell(&self, cell: [usize; 3]) -> bool {
        self.boundary_flags(cell).iter().any(|&b| b)
    }

    pub fn is_boundary_vertex(&self, v: [usize; 3]) -> bool {
        (0..3).any(|a| v[a] == 0 || v[a] == self.dims[a])
    }
}

fn check_unit_interval(values: &[f64]) -> Result<(), GridError> {
    match values.iter().position(|v| !(0.0..=1.0).contains(v)) {
        Some(index) => Err(GridError::OutOfRange {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// Cell-centered volume fractions, row-major in `(i, j, k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeFractionField {
    pub dims: [usize; 3],
    pub values: Vec<f64>,
}

impl VolumeFractionField {
    pub fn new(dims: [usize; 3], values: Vec<f64>) -> Result<Self, GridError> {
        if dims.contains(&0) {
            return Err(GridError::InvalidDims(dims));
        }
        let expected = dims.iter().product();
        if values.len() != expected {
            return Err(GridError::DimensionMismatch {
                expected,
                actual: values.len(),
            });
        }
        check_unit_interval(&values)?;
        Ok(VolumeFractionField { dims, values })
    }

    pub fn from_fn(dims: [usize; 3], f: impl Fn([usize; 3]) -> f64 + Sync) -> Result<Self, GridError> {
        let n: usize = dims.iter().product();
        let values = (0..n)
            .into_par_iter()
            .map(|id| f([id / (dims[1] * dims[2]), (id / dims[2]) % dims[1], id % dims[2]]))
            .collect();
        Self::new(dims, values)
    }

    pub fn get(&self, c: [usize; 3]) -> f64 {
        self.values[(c[0] * self.dims[1] + c[1]) * self.dims[2] + c[2]]
    }

    /// `sum v(C_i) |C_i|`.
    pub fn disperse_volume(&self, part: &CuboidPartition) -> f64 {
        self.values.iter().sum::<f64>() * part.cell_volume()
    }
}

/// Vertex labels on the `(nx+1) x (ny+1) x (nz+1)` lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeLabeling {
    pub dims: [usize; 3],
    pub values: Vec<f64>,
}

impl NodeLabeling {
    /// `dims` are vertex-lattice dimensions.
    pub fn new(dims: [usize; 3], values: Vec<f64>) -> Result<Self, GridError> {
        if dims.iter().any(|&n| n < 2) {
            return Err(GridError::InvalidDims(dims));
        }
        let expected = dims.iter().product();
        if values.len() != expected {
            return Err(GridError::DimensionMismatch {
                expected,
                actual: values.len(),
            });
        }
        check_unit_interval(&values)?;
        Ok(NodeLabeling { dims, values })
    }

    pub fn from_fn(part: &CuboidPartition, f: impl Fn([usize; 3]) -> f64 + Sync) -> Result<Self, GridError> {
        let values = (0..part.vertex_count())
            .into_par_iter()
            .map(|id| f(part.vertex_coords(id)))
            .collect();
        Self::new(part.vertex_dims(), values)
    }

    pub fn get(&self, v: [usize; 3]) -> f64 {
        self.values[(v[0] * self.dims[1] + v[1]) * self.dims[2] + v[2]]
    }

    pub(crate) fn check(&self, part: &CuboidPartition) -> Result<(), GridError> {
        if self.dims != part.vertex_dims() {
            return Err(GridError::DimensionMismatch {
                expected: part.vertex_count(),
                actual: self.values.len(),
            });
        }
        Ok(())
    }
}

/// Vertex label = mean of the volume fractions of the cells incident to it.
pub fn label_vertices(field: &VolumeFractionField, part: &CuboidPartition) -> Result<NodeLabeling, GridError> {
    if field.dims != part.dims {
        return Err(GridError::DimensionMismatch {
            expected: part.cell_count(),
            actual: field.values.len(),
        });
    }
    let d = part.dims;
    let values = (0..part.vertex_count())
        .into_par_iter()
        .map(|id| {
            let v = part.vertex_coords(id);
            let mut sum = 0.0;
            let mut n = 0usize;
            for di in 0..2 {
                for dj in 0..2 {
                    for dk in 0..2 {
                        let c = [v[0] as i64 - di, v[1] as i64 - dj, v[2] as i64 - dk];
                        if (0..3).all(|a| c[a] >= 0 && (c[a] as usize) < d[a]) {
                            sum += field.get([c[0] as usize, c[1] as usize, c[2] as usize]);
                            n += 1;
                        }
                    }
                }
            }
            sum / n as f64
        })
        .collect();
    NodeLabeling::new(part.vertex_dims(), values)
}

fn check_iso(c: f64) -> Result<(), GridError> {
    if c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        Err(GridError::InvalidIso(c))
    }
}

/// Volume of the disperse side of the extracted iso-surface.
pub fn enclosed_volume(labels: &NodeLabeling, part: &CuboidPartition, c: f64) -> Result<f64, ExtractError> {
    enclosed_volume_with_tolerance(labels, part, c, DEFAULT_ISO_TOLERANCE)
}

pub fn enclosed_volume_with_tolerance(
    labels: &NodeLabeling,
    part: &CuboidPartition,
    c: f64,
    tol: f64,
) -> Result<f64, ExtractError> {
    check_iso(c)?;
    labels.check(part)?;
    let ctx = IsoContext::new(labels, part, c, tol)?;
    (0..part.cell_count())
        .into_par_iter()
        .map(|id| cell_disperse_volume(&ctx, part.cell_coords(id)))
        .try_reduce(|| 0.0, |a, b| Ok(a + b))
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsoLevelSolve {
    pub iso: f64,
    /// `gamma(c) = 1 - Omega_D(c) / target`.
    pub residual: f64,
    pub volume: f64,
    pub target: f64,
    pub tolerance: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// False when `|gamma| < tolerance` is out of reach because gamma jumps
    /// across zero inside an unresolvable bracket.
    pub attained: bool,
}

/// `gamma(c)` for a given target volume.
pub fn volume_residual(labels: &NodeLabeling, part: &CuboidPartition, target: f64, c: f64) -> Result<f64, ExtractError> {
    Ok(1.0 - enclosed_volume(labels, part, c)? / target)
}

const MAX_BISECTIONS: usize = 200;

/// Bisection on gamma over (0, 1). Gamma is non-decreasing in `c` because the
/// enclosed volume shrinks as the level rises.
pub fn solve_iso_level(
    labels: &NodeLabeling,
    part: &CuboidPartition,
    field: &VolumeFractionField,
    eps: f64,
) -> Result<IsoLevelSolve, ExtractError> {
    if !(eps > 0.0) {
        return Err(GridError::InvalidTolerance(eps).into());
    }
    let target = field.disperse_volume(part);
    if !(target > 0.0) {
        return Err(GridError::NoInterface.into());
    }
    let gamma = |c: f64| -> Result<(f64, f64), ExtractError> {
        let v = enclosed_volume(labels, part, c)?;
        Ok((1.0 - v / target, v))
    };
    let mut lo = 1e-12;
    let mut hi = 1.0 - 1e-12;
    let (g_lo, v_lo) = gamma(lo)?;
    let (g_hi, v_hi) = gamma(hi)?;
    let mut best = if g_lo.abs() <= g_hi.abs() { (lo, g_lo, v_lo) } else { (hi, g_hi, v_hi) };
    let mut iterations = 0;
    let finish = |best: (f64, f64, f64), bracket, iterations| IsoLevelSolve {
        iso: best.0,
        residual: best.1,
        volume: best.2,
        target,
        tolerance: eps,
        bracket,
        iterations,
        attained: best.1.abs() < eps,
    };
    if best.1.abs() < eps || g_lo > 0.0 || g_hi < 0.0 {
        return Ok(finish(best, (lo, hi), iterations));
    }
    while iterations < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let (g, v) = gamma(mid)?;
        if g.abs() < best.1.abs() {
            best = (mid, g, v);
        }
        if g.abs() < eps {
            break;
        }
        if g < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(finish(best, (lo, hi), iterations))
}

/// Cell corners as lattice positions, in corner order.
pub fn cell_positions(part: &CuboidPartition, cell: [usize; 3]) -> [Vector3<f64>; 8] {
    std::array::from_fn(|c| part.vertex_position(part.corner_vertex(cell, c)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_indexing_round_trips() {
        let p = CuboidPartition::unit([3, 4, 5]).unwrap();
        for id in 0..p.vertex_count() {
            assert_eq!(p.vertex_index(p.vertex_coords(id)), id);
        }
        for id in 0..p.cell_count() {
            assert_eq!(p.cell_index(p.cell_coords(id)), id);
        }
        assert!(CuboidPartition::unit([0, 1, 1]).is_err());
        assert!(CuboidPartition::new([1, 1, 1], Vector3::zeros(), Vector3::new(1.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn constant_field_labels() {
        let p = CuboidPartition::unit([3, 3, 3]).unwrap();
        let f = VolumeFractionField::new([3, 3, 3], vec![0.7; 27]).unwrap();
        let l = label_vertices(&f, &p).unwrap();
        assert!(l.values.iter().all(|&v| (v - 0.7).abs() < 1e-15));
    }

    #[test]
    fn single_cell_corner_label() {
        let p = CuboidPartition::unit([1, 1, 1]).unwrap();
        let f = VolumeFractionField::new([1, 1, 1], vec![0.3]).unwrap();
        let l = label_vertices(&f, &p).unwrap();
        assert_eq!(l.values, vec![0.3; 8]);
    }

    #[test]
    fn half_split_interior_vertex() {
        let p = CuboidPartition::unit([2, 2, 2]).unwrap();
        let f = VolumeFractionField::from_fn([2, 2, 2], |c| if c[0] == 1 { 1.0 } else { 0.0 }).unwrap();
        let l = label_vertices(&f, &p).unwrap();
        assert_eq!(l.get([1, 1, 1]), 0.5);
        assert_eq!(l.get([2, 1, 1]), 1.0);
        assert_eq!(l.get([0, 0, 0]), 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            VolumeFractionField::new([1, 1, 2], vec![0.5, 1.5]),
            Err(GridError::OutOfRange { index: 1, .. })
        ));
        assert!(VolumeFractionField::new([1, 1, 2], vec![0.5]).is_err());
        let p = CuboidPartition::unit([2, 2, 2]).unwrap();
        let f = VolumeFractionField::new([1, 1, 1], vec![0.5]).unwrap();
        assert!(label_vertices(&f, &p).is_err());
    }

    #[test]
    fn trivial_volumes() {
        let p = CuboidPartition::unit([2, 3, 2]).unwrap();
        let all = NodeLabeling::from_fn(&p, |_| 0.9).unwrap();
        assert!((enclosed_volume(&all, &p, 0.5).unwrap() - 12.0).abs() < 1e-12);
        let none = NodeLabeling::from_fn(&p, |_| 0.1).unwrap();
        assert_eq!(enclosed_volume(&none, &p, 0.5).unwrap(), 0.0);
        assert!(enclosed_volume(&none, &p, 1.0).is_err());
    }

    #[test]
    fn solver_rejects_empty_target() {
        let p = CuboidPartition::unit([2, 2, 2]).unwrap();
        let f = VolumeFractionField::new([2, 2, 2], vec![0.0; 8]).unwrap();
        let l = label_vertices(&f, &p).unwrap();
        assert!(solve_iso_level(&l, &p, &f, 1e-9).is_err());
    }
}

//! Square-cell partition and the one-range CELL-ALG construction.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::grid::{Coord, Instance};
use crate::range::RangeAssignment;

/// Cell side for a pivot range `l`: `λ = l / (2√2)`, so `l` spans any point
/// of the 3×3 block of cells around the pivot.
pub fn lambda_for_range(l: f64) -> f64 {
    l / (2.0 * SQRT_2)
}

pub type CellId = (u32, u32);

/// Partition of the grid into square cells of side `λ`, truncated at the
/// square's edge. Cell `(i, j)` holds points with `⌊x/λ⌋ = i`, `⌊y/λ⌋ = j`.
#[derive(Debug, Clone)]
pub struct CellPartition {
    lambda: f64,
    per_axis: u32,
    // Lattice column/row -> cell coordinate.
    axis_cell: Vec<u32>,
    // Cell coordinate -> first and last lattice column/row it contains.
    extents: Vec<(u32, u32)>,
    members: Vec<Vec<usize>>,
}

impl CellPartition {
    pub fn new(instance: &Instance, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("cell side {lambda}")));
        }
        let side = instance.side();
        let axis_cell: Vec<u32> = (0..side).map(|x| (x as f64 / lambda).floor() as u32).collect();
        let per_axis = axis_cell[side as usize - 1] + 1;
        let mut extents = vec![(u32::MAX, 0); per_axis as usize];
        for (x, &c) in axis_cell.iter().enumerate() {
            let e = &mut extents[c as usize];
            e.0 = e.0.min(x as u32);
            e.1 = e.1.max(x as u32);
        }
        let mut members = vec![Vec::new(); (per_axis * per_axis) as usize];
        for (i, c) in instance.nodes().iter().enumerate() {
            let id = axis_cell[c.y as usize] as usize * per_axis as usize + axis_cell[c.x as usize] as usize;
            members[id].push(i);
        }
        Ok(CellPartition { lambda, per_axis, axis_cell, extents, members })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Cells along each axis; the partition has `per_axis²` cells.
    pub fn per_axis(&self) -> u32 {
        self.per_axis
    }

    pub fn cell_count(&self) -> usize {
        self.members.len()
    }

    pub fn cell_of(&self, c: Coord) -> CellId {
        (self.axis_cell[c.x as usize], self.axis_cell[c.y as usize])
    }

    pub fn flat(&self, id: CellId) -> usize {
        id.1 as usize * self.per_axis as usize + id.0 as usize
    }

    pub fn id(&self, flat: usize) -> CellId {
        ((flat % self.per_axis as usize) as u32, (flat / self.per_axis as usize) as u32)
    }

    /// Node indices in the cell, row-major.
    pub fn members(&self, id: CellId) -> &[usize] {
        &self.members[self.flat(id)]
    }

    /// First and last lattice coordinates of the cell in x and y.
    pub fn bounds(&self, id: CellId) -> ((u32, u32), (u32, u32)) {
        (self.extents[id.0 as usize], self.extents[id.1 as usize])
    }

    pub fn non_empty(&self) -> impl Iterator<Item = CellId> + '_ {
        (0..self.members.len()).filter(|&f| !self.members[f].is_empty()).map(|f| self.id(f))
    }

    pub fn non_empty_count(&self) -> usize {
        self.members.iter().filter(|m| !m.is_empty()).count()
    }

    /// Cells at Chebyshev distance 1.
    pub fn neighbors(&self, id: CellId) -> impl Iterator<Item = CellId> + '_ {
        let m = self.per_axis as i64;
        (-1i64..=1).flat_map(move |dy| (-1i64..=1).map(move |dx| (dx, dy))).filter_map(move |(dx, dy)| {
            let (x, y) = (id.0 as i64 + dx, id.1 as i64 + dy);
            ((dx, dy) != (0, 0) && (0..m).contains(&x) && (0..m).contains(&y)).then_some((x as u32, y as u32))
        })
    }

    /// Member closest to the cell's lattice center; ties go to the smaller
    /// row-major label.
    pub fn central_node(&self, instance: &Instance, id: CellId) -> Option<usize> {
        let ((x0, x1), (y0, y1)) = self.bounds(id);
        // Twice the offset from the center keeps the comparison integral.
        let key = |i: usize| {
            let c = instance.node(i);
            let dx = 2 * c.x as i64 - (x0 + x1) as i64;
            let dy = 2 * c.y as i64 - (y0 + y1) as i64;
            dx * dx + dy * dy
        };
        self.members(id).iter().copied().min_by_key(|&i| (key(i), i))
    }
}

/// How the non-source pivot of a cell is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotRule {
    /// Closest to the cell center.
    #[default]
    Central,
    /// Smallest row-major label.
    FirstNode,
}

/// Result of CELL-ALG with the partition and chosen pivots kept around.
#[derive(Debug, Clone)]
pub struct CellAssignment {
    pub assignment: RangeAssignment,
    pub partition: CellPartition,
    /// Pivot node index of each non-empty cell, in flat cell order.
    pub pivots: Vec<(CellId, usize)>,
    pub l: f64,
}

/// CELL-ALG with an explicit cell side; the standard construction uses
/// `lambda = lambda_for_range(l)`.
pub fn cell_alg_with(instance: &Instance, source: Coord, l: f64, lambda: f64, rule: PivotRule) -> Result<CellAssignment> {
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::InvalidParameter(format!("range l = {l}")));
    }
    let s = instance.index_of(source).ok_or(Error::NotANode(source))?;
    let partition = CellPartition::new(instance, lambda)?;
    let source_cell = partition.cell_of(source);
    let mut assignment = RangeAssignment::zeros(instance);
    let mut pivots = Vec::new();
    for id in partition.non_empty().collect::<Vec<_>>() {
        let pivot = if id == source_cell {
            s
        } else {
            match rule {
                PivotRule::Central => partition.central_node(instance, id).expect("non-empty"),
                PivotRule::FirstNode => partition.members(id)[0],
            }
        };
        assignment.set(pivot, l);
        pivots.push((id, pivot));
    }
    Ok(CellAssignment { assignment, partition, pivots, l })
}

/// CELL-ALG: cells of side `l/(2√2)`, one pivot per non-empty cell with
/// range `l` (the source in its own cell), everyone else 0.
pub fn cell_alg(instance: &Instance, source: Coord, l: f64) -> Result<RangeAssignment> {
    Ok(cell_alg_with(instance, source, l, lambda_for_range(l), PivotRule::Central)?.assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample_instance, GridSpec};
    use crate::range::{cost, is_broadcast_feasible};

    fn full(side: u32) -> Instance {
        let spec = GridSpec::uniform(side, 0.5).unwrap();
        Instance::from_nodes(spec, (0..side).flat_map(|y| (0..side).map(move |x| Coord::new(x, y))).collect(), 0).unwrap()
    }

    #[test]
    fn single_node_is_its_own_pivot() {
        let spec = GridSpec::uniform(6, 0.5).unwrap();
        let inst = Instance::from_nodes(spec, vec![Coord::new(2, 3)], 0).unwrap();
        let a = cell_alg(&inst, Coord::new(2, 3), 3.0).unwrap();
        assert_eq!(a.ranges(), &[3.0]);
        assert_eq!(cost(&a), 9.0);
    }

    #[test]
    fn full_4x4_with_lambda_2() {
        let inst = full(4);
        let l = 4.0 * SQRT_2;
        let out = cell_alg_with(&inst, Coord::new(0, 0), l, 2.0, PivotRule::Central).unwrap();
        assert_eq!(out.partition.per_axis(), 2);
        assert_eq!(out.pivots.len(), 4);
        let c = cost(&out.assignment);
        assert_eq!(c, 4.0 * l * l);
        assert!((c - 128.0).abs() < 1e-9);
        assert!(c <= 8.0 * 16.0 + 1e-9);
    }

    #[test]
    fn source_is_pivot_of_its_cell() {
        let inst = full(12);
        let src = Coord::new(5, 7);
        let out = cell_alg_with(&inst, src, 6.0, 3.0, PivotRule::Central).unwrap();
        let sc = out.partition.cell_of(src);
        let (_, p) = out.pivots.iter().find(|(id, _)| *id == sc).unwrap();
        assert_eq!(inst.node(*p), src);
        assert_eq!(out.assignment.transmitters(), 16);
    }

    #[test]
    fn all_cells_nonempty_means_feasible() {
        let spec = GridSpec::uniform(40, 0.6).unwrap();
        for seed in 0..10 {
            let inst = sample_instance(&spec, seed);
            let l = 8.0;
            let out = cell_alg_with(&inst, inst.node(0), l, lambda_for_range(l), PivotRule::FirstNode).unwrap();
            if out.partition.non_empty_count() == out.partition.cell_count() {
                assert!(is_broadcast_feasible(&inst, &out.assignment, inst.node(0)).unwrap());
            }
        }
    }

    #[test]
    fn truncated_boundary_cells() {
        let inst = full(10);
        let p = CellPartition::new(&inst, 3.0).unwrap();
        assert_eq!(p.per_axis(), 4);
        assert_eq!(p.bounds((3, 0)), ((9, 9), (0, 2)));
        assert_eq!(p.members((3, 3)).len(), 1);
        let total: usize = (0..p.cell_count()).map(|f| p.members(p.id(f)).len()).sum();
        assert_eq!(total, 100);
    }

    #[test]
    fn central_node_prefers_center_then_label() {
        let inst = full(4);
        let p = CellPartition::new(&inst, 4.0).unwrap();
        // lattice center (1.5, 1.5): four equidistant points, smallest label wins
        assert_eq!(inst.node(p.central_node(&inst, (0, 0)).unwrap()), Coord::new(1, 1));
    }
}

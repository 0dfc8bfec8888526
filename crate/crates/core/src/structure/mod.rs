//! Bricks, active brick regions and their traversal.

mod abr;
mod brick;
mod bvh;

pub use abr::{abr_value_range, build_abrs, Abr};
pub use brick::{build_bricks, extended_domain, Brick};
pub use bvh::Bvh;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::amr::AmrField;
use crate::camera::Ray;
use crate::geometry::Vec3;
use crate::render::TransferFunction;

/// Bricks, their disjoint region decomposition, and a BVH over region bounds.
#[derive(Clone, Debug)]
pub struct BrickStructure {
    pub bricks: Vec<Brick>,
    pub abrs: Vec<Abr>,
    index: Bvh,
}

/// Why a caller-supplied brick list does not tile a field.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum BrickError {
    #[error("brick {brick}: expected {expected} cell ids, found {found}")]
    WrongCellCount { brick: usize, expected: usize, found: usize },
    #[error("brick {brick}: cell id {cell} out of range")]
    UnknownCell { brick: usize, cell: u32 },
    #[error("brick {brick}: cell {cell} does not sit at its brick position")]
    Misplaced { brick: usize, cell: u32 },
    #[error("cell {0} appears in more than one brick slot")]
    Repeated(u32),
    #[error("cell {0} is in no brick")]
    Uncovered(u32),
}

/// Portion of a ray inside one region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Segment {
    pub abr: u32,
    pub t_enter: f64,
    pub t_exit: f64,
}

impl BrickStructure {
    pub fn build(field: &AmrField) -> Self {
        Self::assemble(field, build_bricks(field))
    }

    /// Structure over bricks from elsewhere, e.g. a simulation's own grid
    /// patches. Every cell must sit in exactly one brick slot.
    pub fn from_bricks(field: &AmrField, bricks: Vec<Brick>) -> Result<Self, BrickError> {
        let cells = field.cells();
        let mut seen = vec![false; cells.len()];
        for (b, brick) in bricks.iter().enumerate() {
            if brick.cell_ids.len() != brick.cell_count() {
                return Err(BrickError::WrongCellCount {
                    brick: b,
                    expected: brick.cell_count(),
                    found: brick.cell_ids.len(),
                });
            }
            let w = 1i64 << brick.level;
            for z in 0..brick.size[2] {
                for y in 0..brick.size[1] {
                    for x in 0..brick.size[0] {
                        let id = brick.cell_ids[brick.local_index(x, y, z)];
                        let cell = cells
                            .get(id as usize)
                            .ok_or(BrickError::UnknownCell { brick: b, cell: id })?;
                        let want = [x, y, z].map(|c| c as i64 * w);
                        let placed = cell.level == brick.level
                            && (0..3).all(|d| cell.pos[d] as i64 - brick.lower[d] as i64 == want[d]);
                        if !placed {
                            return Err(BrickError::Misplaced { brick: b, cell: id });
                        }
                        if std::mem::replace(&mut seen[id as usize], true) {
                            return Err(BrickError::Repeated(id));
                        }
                    }
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(BrickError::Uncovered(i as u32));
        }
        Ok(Self::assemble(field, bricks))
    }

    fn assemble(field: &AmrField, bricks: Vec<Brick>) -> Self {
        let mut abrs = build_abrs(&bricks);
        let ranges: Vec<(f32, f32)> = abrs
            .par_iter()
            .map(|a| abr_value_range(a, &bricks, field))
            .collect();
        for (a, r) in abrs.iter_mut().zip(ranges) {
            a.value_range = r;
        }
        let bounds: Vec<_> = abrs.iter().map(|a| a.bounds).collect();
        let index = Bvh::build(&bounds);
        Self {
            bricks,
            abrs,
            index,
        }
    }

    /// Region containing `p`, lowest index on shared faces.
    pub fn locate(&self, p: &Vec3) -> Option<u32> {
        self.index.locate(p)
    }

    /// Front-to-back segments of the regions enabled in `mask` that the ray
    /// crosses with positive length. Pass `None` to traverse every region.
    pub fn traverse(&self, ray: &Ray, mask: Option<&[bool]>) -> Vec<Segment> {
        let mut hits = Vec::new();
        self.index
            .intersect_ray(&ray.origin, &ray.direction, ray.t_min, ray.t_max, &mut hits);
        let mut segs: Vec<Segment> = hits
            .into_iter()
            .filter(|&(id, t0, t1)| t1 > t0 && mask.is_none_or(|m| m[id as usize]))
            .map(|(abr, t_enter, t_exit)| Segment {
                abr,
                t_enter,
                t_exit,
            })
            .collect();
        segs.sort_by(|a, b| {
            a.t_enter
                .total_cmp(&b.t_enter)
                .then(a.t_exit.total_cmp(&b.t_exit))
                .then(a.abr.cmp(&b.abr))
        });
        segs
    }
}

/// Free-function form of [`BrickStructure::traverse`] with a required mask.
pub fn traverse(ray: &Ray, structure: &BrickStructure, mask: &[bool]) -> Vec<Segment> {
    structure.traverse(ray, Some(mask))
}

/// A region is active when the transfer function has non-zero opacity
/// somewhere in its value range.
pub fn active_set(abrs: &[Abr], tf: &TransferFunction) -> Vec<bool> {
    abrs.iter()
        .map(|a| tf.max_alpha_in(a.value_range.0, a.value_range.1) > 0.0)
        .collect()
}

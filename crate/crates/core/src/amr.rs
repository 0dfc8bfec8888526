//! Cell-centered AMR field model.
//!
//! Positions are integer lower corners in units where a level-0 cell has width
//! one. Level 0 is the finest level; a level-`L` cell has width `2^L` and must
//! be aligned to a multiple of its width.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{Aabb, Vec3};
use crate::reconstruction::basis_weight;

/// Coarsest level accepted; keeps `2^L` and aligned positions inside `i32`.
pub const MAX_LEVEL: u32 = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Cell {
    pub pos: [i32; 3],
    pub level: u32,
}

impl Cell {
    pub fn new(pos: [i32; 3], level: u32) -> Self {
        Self { pos, level }
    }

    pub fn width(&self) -> f64 {
        (1u64 << self.level) as f64
    }

    pub fn center(&self) -> Vec3 {
        let h = 0.5 * self.width();
        Vec3::new(
            self.pos[0] as f64 + h,
            self.pos[1] as f64 + h,
            self.pos[2] as f64 + h,
        )
    }

    pub fn bounds(&self) -> Aabb {
        let w = self.width();
        let lo = self.pos.map(|c| c as f64);
        Aabb::new(lo, [lo[0] + w, lo[1] + w, lo[2] + w])
    }

    pub fn is_aligned(&self) -> bool {
        if self.level > MAX_LEVEL {
            return false;
        }
        let w = 1i64 << self.level;
        self.pos.iter().all(|&c| (c as i64).rem_euclid(w) == 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Violation {
    /// `cells.len() != scalars.len()`.
    CountMismatch { cells: usize, scalars: usize },
    /// Cell `second` repeats the position and level of cell `first`.
    Duplicate { first: usize, second: usize },
    /// Boxes of cells `a` and `b` intersect with positive volume.
    Overlap { a: usize, b: usize },
    /// Lower corner not a multiple of the cell width.
    Misaligned { cell: usize },
    LevelTooLarge { cell: usize, level: u32 },
    NonFiniteScalar { index: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::CountMismatch { cells, scalars } => {
                write!(f, "{cells} cells but {scalars} scalars")
            }
            Violation::Duplicate { first, second } => {
                write!(f, "cell {second} duplicates cell {first}")
            }
            Violation::Overlap { a, b } => write!(f, "cells {a} and {b} overlap"),
            Violation::Misaligned { cell } => write!(f, "cell {cell} is not aligned to its width"),
            Violation::LevelTooLarge { cell, level } => {
                write!(f, "cell {cell} has level {level} (max {MAX_LEVEL})")
            }
            Violation::NonFiniteScalar { index } => write!(f, "scalar {index} is not finite"),
        }
    }
}

/// Every invariant violation found in a candidate field. Empty means valid.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum AmrError {
    #[error("empty field")]
    Empty,
    #[error("invalid field: {0}")]
    Invalid(ValidationReport),
}

/// Checks every field invariant and lists all violations.
///
/// Aligned power-of-two cells either nest or are disjoint, so overlaps are
/// found by looking up each cell's ancestors at every coarser level present.
/// Misaligned cells are reported and additionally checked pairwise.
pub fn validate(cells: &[Cell], scalars: &[f32]) -> Result<ValidationReport, AmrError> {
    if cells.is_empty() {
        return Err(AmrError::Empty);
    }
    let mut violations = Vec::new();
    if cells.len() != scalars.len() {
        violations.push(Violation::CountMismatch {
            cells: cells.len(),
            scalars: scalars.len(),
        });
    }
    for (index, s) in scalars.iter().enumerate() {
        if !s.is_finite() {
            violations.push(Violation::NonFiniteScalar { index });
        }
    }

    let mut seen: HashMap<Cell, usize> = HashMap::with_capacity(cells.len());
    let mut misaligned = Vec::new();
    for (i, c) in cells.iter().enumerate() {
        if c.level > MAX_LEVEL {
            violations.push(Violation::LevelTooLarge { cell: i, level: c.level });
            continue;
        }
        if !c.is_aligned() {
            violations.push(Violation::Misaligned { cell: i });
            misaligned.push(i);
            continue;
        }
        if let Some(&first) = seen.get(c) {
            violations.push(Violation::Duplicate { first, second: i });
        } else {
            seen.insert(*c, i);
        }
    }

    let levels: Vec<u32> = {
        let set: HashSet<u32> = seen.keys().map(|c| c.level).collect();
        let mut v: Vec<u32> = set.into_iter().collect();
        v.sort_unstable();
        v
    };
    let mut overlaps = Vec::new();
    for (c, &i) in &seen {
        for &coarse in levels.iter().filter(|&&l| l > c.level) {
            let w = 1i64 << coarse;
            let anc = Cell::new(
                c.pos.map(|p| ((p as i64).div_euclid(w) * w) as i32),
                coarse,
            );
            if let Some(&j) = seen.get(&anc) {
                overlaps.push((j.min(i), j.max(i)));
            }
        }
    }
    for &m in &misaligned {
        let bm = cells[m].bounds();
        for (j, c) in cells.iter().enumerate() {
            if j != m && c.level <= MAX_LEVEL && bm.overlaps(&c.bounds()) {
                let pair = (m.min(j), m.max(j));
                // misaligned pairs would otherwise be reported twice
                if !(misaligned.contains(&j) && j < m) {
                    overlaps.push(pair);
                }
            }
        }
    }
    overlaps.sort_unstable();
    overlaps.dedup();
    violations.extend(overlaps.into_iter().map(|(a, b)| Violation::Overlap { a, b }));

    Ok(ValidationReport { violations })
}

/// A validated, immutable cell-centered scalar field.
#[derive(Clone, Debug)]
pub struct AmrField {
    cells: Vec<Cell>,
    scalars: Vec<f32>,
    world_bounds: Aabb,
    value_range: (f32, f32),
}

impl AmrField {
    /// Validates and builds a field. Scalar `i` belongs to cell `i`.
    pub fn new(cells: Vec<Cell>, scalars: Vec<f32>) -> Result<Self, AmrError> {
        let report = validate(&cells, &scalars)?;
        if !report.is_empty() {
            return Err(AmrError::Invalid(report));
        }
        let world_bounds = cells
            .iter()
            .fold(Aabb::empty(), |acc, c| acc.union(&c.bounds()));
        let value_range = scalars
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        Ok(Self {
            cells,
            scalars,
            world_bounds,
            value_range,
        })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn scalars(&self) -> &[f32] {
        &self.scalars
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn world_bounds(&self) -> Aabb {
        self.world_bounds
    }

    pub fn value_range(&self) -> (f32, f32) {
        self.value_range
    }

    /// Width of the finest cells present.
    pub fn finest_width(&self) -> f64 {
        let level = self.cells.iter().map(|c| c.level).min().unwrap_or(0);
        (1u64 << level) as f64
    }

    pub fn into_parts(self) -> (Vec<Cell>, Vec<f32>) {
        (self.cells, self.scalars)
    }
}

/// Reference reconstruction: normalized tent-basis sum over every cell.
///
/// Visits all cells, so it is only suitable as ground truth for the faster
/// per-region sampler.
pub fn oracle_sample(field: &AmrField, p: &Vec3) -> Option<f64> {
    let mut weight_sum = 0.0;
    let mut value_sum = 0.0;
    for (cell, &v) in field.cells.iter().zip(&field.scalars) {
        let w = basis_weight(cell, p);
        if w > 0.0 {
            weight_sum += w;
            value_sum += w * v as f64;
        }
    }
    (weight_sum > 0.0).then(|| value_sum / weight_sum)
}

//! Deterministic synthetic AMR datasets: a sum of Gaussian blobs sampled on a
//! coarse grid and refined wherever a cell's corner values spread too far.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::amr::{AmrField, Cell};
use crate::geometry::Vec3;

/// Coarse cells per axis at the coarsest level.
pub const COARSE_CELLS: i32 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub blobs: usize,
    /// Number of refinement levels; cells range over levels `0..levels`.
    pub levels: u32,
    /// Refine a cell when the spread of its corner values exceeds this.
    pub threshold: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            blobs: 4,
            levels: 3,
            threshold: 0.05,
            seed: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Blob {
    pub center: Vec3,
    pub sigma: f64,
    pub amplitude: f64,
}

/// Analytic blob sum evaluated at world positions.
#[derive(Clone, Debug, PartialEq)]
pub struct BlobField {
    pub blobs: Vec<Blob>,
}

impl BlobField {
    pub fn seeded(count: usize, domain: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blobs = (0..count)
            .map(|_| Blob {
                center: Vec3::new(
                    rng.random_range(0.15..0.85) * domain,
                    rng.random_range(0.15..0.85) * domain,
                    rng.random_range(0.15..0.85) * domain,
                ),
                sigma: rng.random_range(0.06..0.18) * domain,
                amplitude: rng.random_range(0.5..1.0),
            })
            .collect();
        Self { blobs }
    }

    pub fn eval(&self, p: &Vec3) -> f64 {
        self.blobs
            .iter()
            .map(|b| b.amplitude * (-(p - b.center).norm_squared() / (2.0 * b.sigma * b.sigma)).exp())
            .sum()
    }
}

/// Edge length of the generated domain, in level-0 units.
pub fn domain_size(levels: u32) -> i32 {
    COARSE_CELLS << levels.saturating_sub(1)
}

/// Generates the dataset. Cells are emitted coarse cell by coarse cell in
/// `(z, y, x)` order, children depth first in the same order.
pub fn generate(params: &SynthParams) -> AmrField {
    assert!(params.levels >= 1, "at least one level required");
    let coarse = params.levels - 1;
    let size = domain_size(params.levels);
    let field = BlobField::seeded(params.blobs, size as f64, params.seed);
    let mut cells = Vec::new();
    let mut scalars = Vec::new();
    let w = 1i32 << coarse;
    for z in 0..COARSE_CELLS {
        for y in 0..COARSE_CELLS {
            for x in 0..COARSE_CELLS {
                refine(&field, params.threshold, Cell::new([x * w, y * w, z * w], coarse), &mut cells, &mut scalars);
            }
        }
    }
    AmrField::new(cells, scalars).expect("generated cells tile the domain")
}

fn refine(field: &BlobField, threshold: f64, cell: Cell, cells: &mut Vec<Cell>, scalars: &mut Vec<f32>) {
    if cell.level > 0 {
        let b = cell.bounds();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for corner in 0..8 {
            let p = Vec3::new(
                if corner & 1 == 0 { b.min[0] } else { b.max[0] },
                if corner & 2 == 0 { b.min[1] } else { b.max[1] },
                if corner & 4 == 0 { b.min[2] } else { b.max[2] },
            );
            let v = field.eval(&p);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi - lo > threshold {
            let half = 1i32 << (cell.level - 1);
            for dz in 0..2 {
                for dy in 0..2 {
                    for dx in 0..2 {
                        let child = Cell::new(
                            [cell.pos[0] + dx * half, cell.pos[1] + dy * half, cell.pos[2] + dz * half],
                            cell.level - 1,
                        );
                        refine(field, threshold, child, cells, scalars);
                    }
                }
            }
            return;
        }
    }
    cells.push(cell);
    scalars.push(field.eval(&cell.center()) as f32);
}

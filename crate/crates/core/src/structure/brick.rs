use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::amr::AmrField;
use crate::geometry::Aabb;

/// Block of same-level cells tiling `[lower, lower + size * 2^level)`.
///
/// `cell_ids[x + size.x * (y + size.y * z)]` is the field index of the cell at
/// brick-local coordinates `(x, y, z)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Brick {
    pub lower: [i32; 3],
    pub level: u32,
    pub size: [u32; 3],
    pub cell_ids: Vec<u32>,
}

impl Brick {
    pub fn width(&self) -> f64 {
        (1u64 << self.level) as f64
    }

    pub fn cell_count(&self) -> usize {
        self.size.iter().map(|&s| s as usize).product()
    }

    pub fn local_index(&self, x: u32, y: u32, z: u32) -> usize {
        x as usize + self.size[0] as usize * (y as usize + self.size[1] as usize * z as usize)
    }

    /// Box spanned by the brick's cells.
    pub fn data_bounds(&self) -> Aabb {
        let w = self.width();
        let lo = self.lower.map(|c| c as f64);
        Aabb::new(
            lo,
            [
                lo[0] + self.size[0] as f64 * w,
                lo[1] + self.size[1] as f64 * w,
                lo[2] + self.size[2] as f64 * w,
            ],
        )
    }

    /// Support of the brick's tent bases: the data box grown by half a cell
    /// on every side.
    pub fn extended_domain(&self) -> Aabb {
        let h = 0.5 * self.width();
        let mut b = self.data_bounds();
        for d in 0..3 {
            b.min[d] -= h;
            b.max[d] += h;
        }
        b
    }
}

/// Free-function form of [`Brick::extended_domain`].
pub fn extended_domain(brick: &Brick) -> Aabb {
    brick.extended_domain()
}

/// Greedy brick meshing, one level at a time.
///
/// Cells are sorted by `(z, y, x)`; maximal runs along x are formed first,
/// runs of equal start and length are merged along y into plates, and plates
/// of equal footprint are merged along z. Output is ordered by level, then by
/// the `(z, y, x)` order of brick lower corners.
pub fn build_bricks(field: &AmrField) -> Vec<Brick> {
    let mut by_level: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for (i, c) in field.cells().iter().enumerate() {
        by_level.entry(c.level).or_default().push(i as u32);
    }
    let mut bricks = Vec::new();
    for (level, mut ids) in by_level {
        let cells = field.cells();
        let w = 1i32 << level;
        ids.sort_unstable_by_key(|&i| {
            let p = cells[i as usize].pos;
            (p[2], p[1], p[0])
        });
        let by_pos: HashMap<[i32; 3], u32> =
            ids.iter().map(|&i| (cells[i as usize].pos, i)).collect();

        // maximal x-runs: (start, length)
        let mut runs: Vec<([i32; 3], u32)> = Vec::new();
        let mut i = 0;
        while i < ids.len() {
            let start = cells[ids[i] as usize].pos;
            let mut j = i + 1;
            while j < ids.len() {
                let prev = cells[ids[j - 1] as usize].pos;
                let cur = cells[ids[j] as usize].pos;
                if cur[1] != start[1] || cur[2] != start[2] || cur[0] != prev[0] + w {
                    break;
                }
                j += 1;
            }
            runs.push((start, (j - i) as u32));
            i = j;
        }

        // plates: runs merged along y
        let run_at: HashMap<[i32; 3], usize> =
            runs.iter().enumerate().map(|(k, r)| (r.0, k)).collect();
        let mut run_used = vec![false; runs.len()];
        let mut plates: Vec<([i32; 3], [u32; 2])> = Vec::new();
        for k in 0..runs.len() {
            if run_used[k] {
                continue;
            }
            run_used[k] = true;
            let (start, len) = runs[k];
            let mut rows = 1u32;
            loop {
                let next = [start[0], start[1] + rows as i32 * w, start[2]];
                match run_at.get(&next) {
                    Some(&n) if !run_used[n] && runs[n].1 == len => {
                        run_used[n] = true;
                        rows += 1;
                    }
                    _ => break,
                }
            }
            plates.push((start, [len, rows]));
        }

        // slabs: plates merged along z
        let plate_at: HashMap<[i32; 3], usize> =
            plates.iter().enumerate().map(|(k, p)| (p.0, k)).collect();
        let mut plate_used = vec![false; plates.len()];
        let mut level_bricks = Vec::new();
        for k in 0..plates.len() {
            if plate_used[k] {
                continue;
            }
            plate_used[k] = true;
            let (start, footprint) = plates[k];
            let mut layers = 1u32;
            loop {
                let next = [start[0], start[1], start[2] + layers as i32 * w];
                match plate_at.get(&next) {
                    Some(&n) if !plate_used[n] && plates[n].1 == footprint => {
                        plate_used[n] = true;
                        layers += 1;
                    }
                    _ => break,
                }
            }
            let size = [footprint[0], footprint[1], layers];
            let mut cell_ids = Vec::with_capacity(size.iter().product::<u32>() as usize);
            for z in 0..size[2] as i32 {
                for y in 0..size[1] as i32 {
                    for x in 0..size[0] as i32 {
                        let pos = [start[0] + x * w, start[1] + y * w, start[2] + z * w];
                        cell_ids.push(by_pos[&pos]);
                    }
                }
            }
            level_bricks.push(Brick {
                lower: start,
                level,
                size,
                cell_ids,
            });
        }
        level_bricks.sort_by_key(|b| (b.lower[2], b.lower[1], b.lower[0]));
        bricks.extend(level_bricks);
    }
    bricks
}

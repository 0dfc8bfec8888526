//! Tent-basis reconstruction.
//!
//! Every cell carries a separable hat function peaking at its center and
//! reaching zero half a cell beyond its bounds. The field value at a point is
//! the weight-normalized sum of the values of all cells whose hat covers it.

use crate::amr::{AmrField, Cell};
use crate::geometry::Vec3;
use crate::structure::{Brick, BrickStructure};

/// `Π_d max(0, 1 - |p_d - c_d| / w)` for cell center `c` and width `w`.
pub fn basis_weight(cell: &Cell, p: &Vec3) -> f64 {
    let w = cell.width();
    let c = cell.center();
    let mut weight = 1.0;
    for d in 0..3 {
        let t = 1.0 - (p[d] - c[d]).abs() / w;
        if t <= 0.0 {
            return 0.0;
        }
        weight *= t;
    }
    weight
}

/// Adds the weighted contributions of the (at most eight) cells of `brick`
/// whose support contains `p`.
#[inline]
fn accumulate_brick(brick: &Brick, scalars: &[f32], p: &Vec3, weight_sum: &mut f64, value_sum: &mut f64) {
    let w = brick.width();
    let mut range = [(0u32, 0u32); 3];
    let mut axis_w = [[0.0f64; 2]; 3];
    for d in 0..3 {
        // position in cell-center index space: center k sits at k
        let u = (p[d] - brick.lower[d] as f64) / w - 0.5;
        let k0 = u.floor();
        let size = brick.size[d] as f64;
        if k0 + 1.0 < 0.0 || k0 > size - 1.0 {
            return;
        }
        let lo = k0.max(0.0);
        let hi = (k0 + 1.0).min(size - 1.0);
        range[d] = (lo as u32, hi as u32);
        for (slot, k) in (range[d].0..=range[d].1).enumerate() {
            axis_w[d][slot] = (1.0 - (u - k as f64).abs()).max(0.0);
        }
    }
    for (sz, z) in (range[2].0..=range[2].1).enumerate() {
        let wz = axis_w[2][sz];
        if wz == 0.0 {
            continue;
        }
        for (sy, y) in (range[1].0..=range[1].1).enumerate() {
            let wyz = wz * axis_w[1][sy];
            if wyz == 0.0 {
                continue;
            }
            for (sx, x) in (range[0].0..=range[0].1).enumerate() {
                let wt = wyz * axis_w[0][sx];
                if wt > 0.0 {
                    let id = brick.cell_ids[brick.local_index(x, y, z)];
                    *weight_sum += wt;
                    *value_sum += wt * scalars[id as usize] as f64;
                }
            }
        }
    }
}

/// Reconstructs the field at `p` using only the bricks of region `abr_id`.
///
/// `p` must lie inside the region's bounds; every cell with non-zero weight
/// there belongs to one of the region's bricks, so the result equals
/// [`crate::amr::oracle_sample`].
pub fn sample(structure: &BrickStructure, field: &AmrField, abr_id: u32, p: &Vec3) -> Option<f64> {
    SampleContext::new(structure, field, abr_id).sample(p)
}

/// Per-region sampler that resolves the region's bricks once.
#[derive(Clone, Copy)]
pub struct SampleContext<'a> {
    pub abr_id: u32,
    bricks: &'a [Brick],
    brick_ids: &'a [u32],
    scalars: &'a [f32],
    #[cfg(debug_assertions)]
    bounds: crate::geometry::Aabb,
}

impl<'a> SampleContext<'a> {
    pub fn new(structure: &'a BrickStructure, field: &'a AmrField, abr_id: u32) -> Self {
        let abr = &structure.abrs[abr_id as usize];
        Self {
            abr_id,
            bricks: &structure.bricks,
            brick_ids: &abr.brick_ids,
            scalars: field.scalars(),
            #[cfg(debug_assertions)]
            bounds: abr.bounds,
        }
    }

    pub fn sample(&self, p: &Vec3) -> Option<f64> {
        #[cfg(debug_assertions)]
        {
            let b = &self.bounds;
            let tol = 1e-9 * (1.0 + b.extent(0).max(b.extent(1)).max(b.extent(2)));
            debug_assert!(
                (0..3).all(|d| p[d] >= b.min[d] - tol && p[d] <= b.max[d] + tol),
                "sample point {p:?} outside region {} bounds {b:?}",
                self.abr_id
            );
        }
        let mut weight_sum = 0.0;
        let mut value_sum = 0.0;
        for &b in self.brick_ids {
            accumulate_brick(&self.bricks[b as usize], self.scalars, p, &mut weight_sum, &mut value_sum);
        }
        (weight_sum > 0.0).then(|| value_sum / weight_sum)
    }
}

/// Locates the region containing `p` and samples there.
pub fn sample_anywhere(structure: &BrickStructure, field: &AmrField, p: &Vec3) -> Option<f64> {
    let abr = structure.locate(p)?;
    sample(structure, field, abr, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amr::oracle_sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tent_peak_foot_and_half() {
        let c = Cell::new([0, 0, 0], 0);
        assert_eq!(basis_weight(&c, &Vec3::new(0.5, 0.5, 0.5)), 1.0);
        assert_eq!(basis_weight(&c, &Vec3::new(1.5, 0.5, 0.5)), 0.0);
        assert_eq!(basis_weight(&c, &Vec3::new(-0.5, 0.2, 0.9)), 0.0);
        assert_eq!(basis_weight(&c, &Vec3::new(1.0, 0.5, 0.5)), 0.5);
        let coarse = Cell::new([0, 0, 0], 1);
        assert_eq!(basis_weight(&coarse, &Vec3::new(1.0, 1.0, 1.0)), 1.0);
        assert_eq!(basis_weight(&coarse, &Vec3::new(3.0, 1.0, 1.0)), 0.0);
    }

    fn uniform_grid(n: i32, f: impl Fn(i32, i32, i32) -> f32) -> AmrField {
        let mut cells = Vec::new();
        let mut vals = Vec::new();
        for z in 0..n {
            for y in 0..n {
                for x in 0..n {
                    cells.push(Cell::new([x, y, z], 0));
                    vals.push(f(x, y, z));
                }
            }
        }
        AmrField::new(cells, vals).unwrap()
    }

    /// Independent trilinear interpolation of cell-center values.
    fn trilinear(vals: impl Fn(i32, i32, i32) -> f64, p: &Vec3) -> f64 {
        let u = p.map(|c| c - 0.5);
        let i = u.map(f64::floor);
        let t = u - i;
        let mut acc = 0.0;
        for dz in 0..2 {
            for dy in 0..2 {
                for dx in 0..2 {
                    let w = (if dx == 1 { t.x } else { 1.0 - t.x })
                        * (if dy == 1 { t.y } else { 1.0 - t.y })
                        * (if dz == 1 { t.z } else { 1.0 - t.z });
                    acc += w * vals(i.x as i32 + dx, i.y as i32 + dy, i.z as i32 + dz);
                }
            }
        }
        acc
    }

    #[test]
    fn interior_of_uniform_level_is_trilinear() {
        let g = |x: i32, y: i32, z: i32| ((x * 7 + y * 3 - z * 5) % 11) as f32 * 0.25;
        let field = uniform_grid(6, g);
        let s = BrickStructure::build(&field);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            // stay one cell away from the outer boundary
            let p = Vec3::new(
                rng.random_range(0.5..5.5),
                rng.random_range(0.5..5.5),
                rng.random_range(0.5..5.5),
            );
            let got = sample_anywhere(&s, &field, &p).unwrap();
            let want = trilinear(|x, y, z| g(x, y, z) as f64, &p);
            assert!((got - want).abs() < 1e-5, "{p:?}: {got} vs {want}");
        }
    }

    #[test]
    fn constant_field_reproduced() {
        let field = uniform_grid(3, |_, _, _| 2.5);
        let s = BrickStructure::build(&field);
        for p in [Vec3::new(0.1, 0.2, 2.9), Vec3::new(-0.4, 1.5, 1.5), Vec3::new(3.3, 3.3, 3.3)] {
            assert!((sample_anywhere(&s, &field, &p).unwrap() - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_oracle_on_two_levels() {
        let mut cells = Vec::new();
        let mut vals = Vec::new();
        for z in 0..4 {
            for y in 0..4 {
                for x in 0..4 {
                    cells.push(Cell::new([x, y, z], 0));
                    vals.push((x + 2 * y + 3 * z) as f32);
                }
            }
        }
        for z in 0..2 {
            for y in 0..2 {
                for x in 0..2 {
                    // leave a hole at [4,6)x[0,2)x[0,2)
                    if (x, y, z) == (0, 0, 0) {
                        continue;
                    }
                    cells.push(Cell::new([4 + 2 * x, 2 * y, 2 * z], 1));
                    vals.push(10.0 + x as f32);
                }
            }
        }
        let field = AmrField::new(cells, vals).unwrap();
        let s = BrickStructure::build(&field);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = field.world_bounds();
        for _ in 0..2000 {
            let p = Vec3::new(
                rng.random_range(b.min[0] - 1.0..b.max[0] + 1.0),
                rng.random_range(b.min[1] - 1.0..b.max[1] + 1.0),
                rng.random_range(b.min[2] - 1.0..b.max[2] + 1.0),
            );
            let want = oracle_sample(&field, &p);
            let got = s.locate(&p).and_then(|a| sample(&s, &field, a, &p));
            match (got, want) {
                (Some(g), Some(w)) => assert!((g - w).abs() < 1e-5),
                (None, None) => {}
                other => panic!("{p:?}: {other:?}"),
            }
        }
    }
}

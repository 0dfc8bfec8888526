mod common;

use std::collections::HashSet;

use exabrick::structure::{build_abrs, build_bricks, BrickStructure};
use exabrick::synth::{generate, SynthParams};
use exabrick::{AmrField, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn synthetic() -> AmrField {
    generate(&SynthParams {
        blobs: 3,
        levels: 3,
        threshold: 0.08,
        seed: 5,
    })
}

/// Brute-force point classification: bricks whose extended domain holds `p`.
fn containing_bricks(s: &BrickStructure, p: &Vec3) -> Vec<u32> {
    s.bricks
        .iter()
        .enumerate()
        .filter(|(_, b)| b.extended_domain().contains_strictly(p))
        .map(|(i, _)| i as u32)
        .collect()
}

#[test]
fn regions_partition_the_domain_union() {
    let field = synthetic();
    let s = BrickStructure::build(&field);
    assert!(s.bricks.len() > 1 && s.abrs.len() > s.bricks.len());
    let bounds = s.abrs.iter().fold(exabrick::Aabb::empty(), |a, r| a.union(&r.bounds));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut inside = 0;
    for _ in 0..20_000 {
        let p = Vec3::new(
            rng.random_range(bounds.min[0] - 2.0..bounds.max[0] + 2.0),
            rng.random_range(bounds.min[1] - 2.0..bounds.max[1] + 2.0),
            rng.random_range(bounds.min[2] - 2.0..bounds.max[2] + 2.0),
        );
        let expected = containing_bricks(&s, &p);
        let holders: Vec<usize> = (0..s.abrs.len()).filter(|&i| s.abrs[i].bounds.contains_strictly(&p)).collect();
        if expected.is_empty() {
            assert!(holders.is_empty(), "{p:?} outside all domains but in a region");
        } else {
            inside += 1;
            assert_eq!(holders.len(), 1, "{p:?} in {} regions", holders.len());
            assert_eq!(s.abrs[holders[0]].brick_ids, expected);
        }
    }
    assert!(inside > 10_000);
}

#[test]
fn region_bounds_are_disjoint_and_cover_domain_volume() {
    let field = synthetic();
    let s = BrickStructure::build(&field);
    for (i, a) in s.abrs.iter().enumerate() {
        for b in &s.abrs[i + 1..] {
            assert!(!a.bounds.overlaps(&b.bounds));
        }
        for &id in &a.brick_ids {
            assert!(s.bricks[id as usize].extended_domain().contains_box(&a.bounds));
        }
        let lv = a.brick_ids.iter().map(|&b| s.bricks[b as usize].level).min().unwrap();
        assert_eq!(a.finest_level, lv);
    }
}

#[test]
fn bricks_tile_cells_exactly() {
    let field = synthetic();
    let bricks = build_bricks(&field);
    let mut seen = HashSet::new();
    for b in &bricks {
        assert!(b.size.iter().all(|&s| s >= 1));
        assert_eq!(b.cell_ids.len(), b.cell_count());
        let w = 1 << b.level;
        for z in 0..b.size[2] {
            for y in 0..b.size[1] {
                for x in 0..b.size[0] {
                    let id = b.cell_ids[b.local_index(x, y, z)];
                    let c = field.cells()[id as usize];
                    assert_eq!(c.level, b.level);
                    assert_eq!(
                        c.pos,
                        [b.lower[0] + x as i32 * w, b.lower[1] + y as i32 * w, b.lower[2] + z as i32 * w]
                    );
                    assert!(seen.insert(id));
                }
            }
        }
    }
    assert_eq!(seen.len(), field.len());
}

#[test]
fn construction_is_deterministic_across_thread_counts() {
    let field = synthetic();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| BrickStructure::build(&field));
    let b = four.install(|| BrickStructure::build(&field));
    assert_eq!(a.bricks, b.bricks);
    assert_eq!(a.abrs, b.abrs);
    assert_eq!(build_abrs(&a.bricks), build_abrs(&b.bricks));
}

#[test]
fn value_range_grows_with_brick_set() {
    let field = synthetic();
    let s = BrickStructure::build(&field);
    for a in &s.abrs {
        for &b in &a.brick_ids {
            let (lo, hi) = s.bricks[b as usize]
                .cell_ids
                .iter()
                .map(|&c| field.scalars()[c as usize])
                .fold((f32::INFINITY, f32::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
            assert!(a.value_range.0 <= lo && hi <= a.value_range.1);
        }
    }
}

use serde::Serialize;

use crate::amr::AmrField;
use crate::geometry::Aabb;

use super::brick::Brick;

/// Active brick region: one box of the disjoint decomposition of all
/// extended brick domains.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Abr {
    pub bounds: Aabb,
    /// Bricks whose extended domain overlaps `bounds`, ascending.
    pub brick_ids: Vec<u32>,
    pub value_range: (f32, f32),
    /// Minimum level among `brick_ids`.
    pub finest_level: u32,
}

/// Decomposes the overlapping extended domains of `bricks` into disjoint
/// boxes that are each covered by a constant brick set.
///
/// Regions are split recursively at domain face planes. The plane closest to
/// the region's spatial median (relative to the region's extent on that
/// axis) wins; ties prefer the lower axis, then the lower coordinate. Regions
/// covered by no domain are dropped. Face-adjacent leaves with the same brick
/// set whose union is a box are then merged. Value ranges are left empty; see
/// [`abr_value_range`].
pub fn build_abrs(bricks: &[Brick]) -> Vec<Abr> {
    if bricks.is_empty() {
        return Vec::new();
    }
    let domains: Vec<Aabb> = bricks.iter().map(Brick::extended_domain).collect();
    let root = domains.iter().fold(Aabb::empty(), |acc, d| acc.union(d));
    let mut out = Vec::new();
    let mut stack = vec![(root, (0..bricks.len() as u32).collect::<Vec<u32>>())];
    while let Some((region, ids)) = stack.pop() {
        if ids.is_empty() {
            continue;
        }
        let Some((axis, coord)) = choose_split(&region, &ids, &domains) else {
            let finest_level = ids.iter().map(|&i| bricks[i as usize].level).min().unwrap();
            out.push(Abr {
                bounds: region,
                brick_ids: ids,
                value_range: (f32::INFINITY, f32::NEG_INFINITY),
                finest_level,
            });
            continue;
        };
        let mut left = region;
        left.max[axis] = coord;
        let mut right = region;
        right.min[axis] = coord;
        let left_ids = ids.iter().copied().filter(|&i| domains[i as usize].overlaps(&left)).collect();
        let right_ids = ids.iter().copied().filter(|&i| domains[i as usize].overlaps(&right)).collect();
        // right first so the left half is emitted first
        stack.push((right, right_ids));
        stack.push((left, left_ids));
    }
    merge_adjacent(out)
}

/// Repeatedly fuses pairs of regions that share a full face and the same
/// brick set, one axis at a time, until nothing changes.
fn merge_adjacent(mut abrs: Vec<Abr>) -> Vec<Abr> {
    loop {
        let before = abrs.len();
        for axis in 0..3 {
            let (a1, a2) = ((axis + 1) % 3, (axis + 2) % 3);
            let key = |r: &Abr| {
                (
                    r.brick_ids.clone(),
                    [r.bounds.min[a1], r.bounds.max[a1], r.bounds.min[a2], r.bounds.max[a2]].map(f64::to_bits),
                )
            };
            abrs.sort_by(|x, y| {
                key(x)
                    .cmp(&key(y))
                    .then(x.bounds.min[axis].total_cmp(&y.bounds.min[axis]))
            });
            let mut merged: Vec<Abr> = Vec::with_capacity(abrs.len());
            for r in abrs.drain(..) {
                if let Some(last) = merged.last_mut() {
                    if last.bounds.max[axis] == r.bounds.min[axis] && key(last) == key(&r) {
                        last.bounds.max[axis] = r.bounds.max[axis];
                        continue;
                    }
                }
                merged.push(r);
            }
            abrs = merged;
        }
        if abrs.len() == before {
            break;
        }
    }
    // spatial order for stable ids
    abrs.sort_by(|x, y| {
        let k = |r: &Abr| [r.bounds.min[2], r.bounds.min[1], r.bounds.min[0]];
        let (a, b) = (k(x), k(y));
        a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])).then(a[2].total_cmp(&b[2]))
    });
    abrs
}

/// `None` when every domain in `ids` covers `region` entirely.
fn choose_split(region: &Aabb, ids: &[u32], domains: &[Aabb]) -> Option<(usize, f64)> {
    let mut best: Option<(f64, usize, f64)> = None;
    for &i in ids {
        let dom = &domains[i as usize];
        if dom.contains_box(region) {
            continue;
        }
        for axis in 0..3 {
            let mid = 0.5 * (region.min[axis] + region.max[axis]);
            let extent = region.extent(axis);
            for coord in [dom.min[axis], dom.max[axis]] {
                if coord <= region.min[axis] || coord >= region.max[axis] {
                    continue;
                }
                let score = (coord - mid).abs() / extent;
                let better = match best {
                    None => true,
                    Some((s, a, c)) => score < s || (score == s && (axis, coord) < (a, c)),
                };
                if better {
                    best = Some((score, axis, coord));
                }
            }
        }
    }
    best.map(|(_, axis, coord)| (axis, coord))
}

/// Min/max scalar over every cell of every brick listed by `abr`.
pub fn abr_value_range(abr: &Abr, bricks: &[Brick], field: &AmrField) -> (f32, f32) {
    let scalars = field.scalars();
    abr.brick_ids
        .iter()
        .flat_map(|&b| bricks[b as usize].cell_ids.iter())
        .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &c| {
            let v = scalars[c as usize];
            (lo.min(v), hi.max(v))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brick(lower: [i32; 3], level: u32, size: [u32; 3]) -> Brick {
        let n = size.iter().product::<u32>() as usize;
        Brick {
            lower,
            level,
            size,
            cell_ids: vec![0; n],
        }
    }

    #[test]
    fn one_brick_one_abr() {
        let b = brick([0, 0, 0], 0, [2, 2, 2]);
        let abrs = build_abrs(std::slice::from_ref(&b));
        assert_eq!(abrs.len(), 1);
        assert_eq!(abrs[0].bounds, b.extended_domain());
        assert_eq!(abrs[0].brick_ids, vec![0]);
    }

    #[test]
    fn disjoint_domains_stay_separate() {
        let bricks = [brick([0, 0, 0], 0, [1, 1, 1]), brick([5, 0, 0], 0, [1, 1, 1])];
        let abrs = build_abrs(&bricks);
        assert_eq!(abrs.len(), 2);
        let mut got: Vec<_> = abrs.iter().map(|a| (a.brick_ids.clone(), a.bounds)).collect();
        got.sort_by(|a, b| a.0.cmp(&b.0));
        assert_eq!(got[0], (vec![0], bricks[0].extended_domain()));
        assert_eq!(got[1], (vec![1], bricks[1].extended_domain()));
    }

    #[test]
    fn adjacent_bricks_give_three_regions() {
        let bricks = [brick([0, 0, 0], 0, [2, 2, 2]), brick([2, 0, 0], 0, [2, 2, 2])];
        let abrs = build_abrs(&bricks);
        let mut spans: Vec<_> = abrs
            .iter()
            .map(|a| (a.bounds.min[0], a.bounds.max[0], a.brick_ids.clone()))
            .collect();
        spans.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(
            spans,
            vec![
                (-0.5, 1.5, vec![0]),
                (1.5, 2.5, vec![0, 1]),
                (2.5, 4.5, vec![1]),
            ]
        );
        for a in &abrs {
            assert_eq!((a.bounds.min[1], a.bounds.max[1]), (-0.5, 2.5));
            assert_eq!((a.bounds.min[2], a.bounds.max[2]), (-0.5, 2.5));
        }
    }

    #[test]
    fn finest_level_is_min_level() {
        let bricks = [brick([0, 0, 0], 1, [1, 1, 1]), brick([2, 0, 0], 0, [1, 1, 1])];
        let abrs = build_abrs(&bricks);
        let shared = abrs.iter().find(|a| a.brick_ids == vec![0, 1]).unwrap();
        assert_eq!(shared.finest_level, 0);
        let coarse_only = abrs.iter().find(|a| a.brick_ids == vec![0]).unwrap();
        assert_eq!(coarse_only.finest_level, 1);
    }
}

use crate::geometry::{Aabb, Vec3};

const LEAF_SIZE: usize = 4;

#[derive(Clone, Debug)]
enum NodeKind {
    Leaf { start: u32, count: u32 },
    Inner { left: u32, right: u32 },
}

#[derive(Clone, Debug)]
struct Node {
    bounds: Aabb,
    kind: NodeKind,
}

/// Median-split bounding volume hierarchy over a fixed list of boxes.
#[derive(Clone, Debug, Default)]
pub struct Bvh {
    nodes: Vec<Node>,
    items: Vec<u32>,
    boxes: Vec<Aabb>,
}

impl Bvh {
    pub fn build(boxes: &[Aabb]) -> Self {
        let mut bvh = Bvh {
            nodes: Vec::new(),
            items: (0..boxes.len() as u32).collect(),
            boxes: boxes.to_vec(),
        };
        if !boxes.is_empty() {
            bvh.build_node(0, boxes.len());
        }
        bvh
    }

    fn build_node(&mut self, start: usize, end: usize) -> u32 {
        let bounds = self.items[start..end]
            .iter()
            .fold(Aabb::empty(), |acc, &i| acc.union(&self.boxes[i as usize]));
        let id = self.nodes.len() as u32;
        self.nodes.push(Node {
            bounds,
            kind: NodeKind::Leaf {
                start: start as u32,
                count: (end - start) as u32,
            },
        });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let centroids = self.items[start..end]
            .iter()
            .fold(Aabb::empty(), |acc, &i| {
                let c = self.boxes[i as usize].center();
                acc.union(&Aabb::new(c.into(), c.into()))
            });
        let axis = (0..3)
            .max_by(|&a, &b| centroids.extent(a).total_cmp(&centroids.extent(b)))
            .unwrap();
        let mid = (start + end) / 2;
        let boxes = &self.boxes;
        self.items[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            let ca = boxes[a as usize].center()[axis];
            let cb = boxes[b as usize].center()[axis];
            ca.total_cmp(&cb).then(a.cmp(&b))
        });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id as usize].kind = NodeKind::Inner { left, right };
        id
    }

    /// Every box the ray overlaps within `[t_min, t_max]`, as
    /// `(index, t_enter, t_exit)` in no particular order.
    pub fn intersect_ray(
        &self,
        origin: &Vec3,
        dir: &Vec3,
        t_min: f64,
        t_max: f64,
        out: &mut Vec<(u32, f64, f64)>,
    ) {
        if self.nodes.is_empty() {
            return;
        }
        let inv = dir.map(|d| 1.0 / d);
        let mut stack = vec![0u32];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            if node.bounds.intersect_ray(origin, &inv, t_min, t_max).is_none() {
                continue;
            }
            match node.kind {
                NodeKind::Inner { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
                NodeKind::Leaf { start, count } => {
                    for &i in &self.items[start as usize..(start + count) as usize] {
                        if let Some((t0, t1)) =
                            self.boxes[i as usize].intersect_ray(origin, &inv, t_min, t_max)
                        {
                            out.push((i, t0, t1));
                        }
                    }
                }
            }
        }
    }

    /// Lowest index among boxes containing `p` (closed boxes).
    pub fn locate(&self, p: &Vec3) -> Option<u32> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best: Option<u32> = None;
        let mut stack = vec![0u32];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            if !node.bounds.contains(p) {
                continue;
            }
            match node.kind {
                NodeKind::Inner { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
                NodeKind::Leaf { start, count } => {
                    for &i in &self.items[start as usize..(start + count) as usize] {
                        if self.boxes[i as usize].contains(p) && best.is_none_or(|b| i < b) {
                            best = Some(i);
                        }
                    }
                }
            }
        }
        best
    }
}

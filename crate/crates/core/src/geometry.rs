use serde::{Deserialize, Serialize};

pub type Vec3 = nalgebra::Vector3<f64>;

/// Axis-aligned box `[min, max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Self {
        Self { min, max }
    }

    pub fn empty() -> Self {
        Self {
            min: [f64::INFINITY; 3],
            max: [f64::NEG_INFINITY; 3],
        }
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|d| self.min[d] > self.max[d])
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        let mut out = *self;
        for d in 0..3 {
            out.min[d] = out.min[d].min(other.min[d]);
            out.max[d] = out.max[d].max(other.max[d]);
        }
        out
    }

    pub fn intersection(&self, other: &Aabb) -> Aabb {
        let mut out = *self;
        for d in 0..3 {
            out.min[d] = out.min[d].max(other.min[d]);
            out.max[d] = out.max[d].min(other.max[d]);
        }
        out
    }

    /// True when the two boxes share a region of positive volume.
    pub fn overlaps(&self, other: &Aabb) -> bool {
        (0..3).all(|d| self.min[d].max(other.min[d]) < self.max[d].min(other.max[d]))
    }

    pub fn contains_box(&self, other: &Aabb) -> bool {
        (0..3).all(|d| self.min[d] <= other.min[d] && other.max[d] <= self.max[d])
    }

    /// Closed containment test.
    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|d| self.min[d] <= p[d] && p[d] <= self.max[d])
    }

    /// Containment in the open interior.
    pub fn contains_strictly(&self, p: &Vec3) -> bool {
        (0..3).all(|d| self.min[d] < p[d] && p[d] < self.max[d])
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.max[axis] - self.min[axis]
    }

    pub fn center(&self) -> Vec3 {
        Vec3::new(
            0.5 * (self.min[0] + self.max[0]),
            0.5 * (self.min[1] + self.max[1]),
            0.5 * (self.min[2] + self.max[2]),
        )
    }

    pub fn volume(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            (0..3).map(|d| self.extent(d)).product()
        }
    }

    /// Slab test. Returns the parametric overlap of the ray with the box,
    /// clipped to `[t_min, t_max]`, or `None` when it is empty.
    pub fn intersect_ray(
        &self,
        origin: &Vec3,
        inv_dir: &Vec3,
        t_min: f64,
        t_max: f64,
    ) -> Option<(f64, f64)> {
        let mut t0 = t_min;
        let mut t1 = t_max;
        for d in 0..3 {
            let inv = inv_dir[d];
            if inv.is_infinite() {
                // ray parallel to this slab
                if origin[d] < self.min[d] || origin[d] > self.max[d] {
                    return None;
                }
                continue;
            }
            let mut near = (self.min[d] - origin[d]) * inv;
            let mut far = (self.max[d] - origin[d]) * inv;
            if near > far {
                std::mem::swap(&mut near, &mut far);
            }
            t0 = t0.max(near);
            t1 = t1.min(far);
            if t0 > t1 {
                return None;
            }
        }
        Some((t0, t1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ray_box_slab() {
        let b = Aabb::new([0.0; 3], [1.0; 3]);
        let o = Vec3::new(-1.0, 0.5, 0.5);
        let d = Vec3::new(1.0, 0.0, 0.0);
        let inv = d.map(|x| 1.0 / x);
        assert_eq!(b.intersect_ray(&o, &inv, 0.0, 10.0), Some((1.0, 2.0)));
        assert_eq!(b.intersect_ray(&o, &inv, 0.0, 0.5), None);
        let o = Vec3::new(-1.0, 2.0, 0.5);
        assert_eq!(b.intersect_ray(&o, &inv, 0.0, 10.0), None);
    }

    #[test]
    fn overlap_requires_volume() {
        let a = Aabb::new([0.0; 3], [1.0; 3]);
        let b = Aabb::new([1.0, 0.0, 0.0], [2.0, 1.0, 1.0]);
        assert!(!a.overlaps(&b));
        let c = Aabb::new([0.5, 0.5, 0.5], [2.0, 2.0, 2.0]);
        assert!(a.overlaps(&c));
        assert!((a.intersection(&c).volume() - 0.125).abs() < 1e-12);
    }
}

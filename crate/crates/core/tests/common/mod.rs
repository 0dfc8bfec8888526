#![allow(dead_code)]

use exabrick::camera::{look_at, perspective};
use exabrick::{AmrField, Cell, Channel, Vec3};

/// `n^3` cells of one level with values from `f(x, y, z)` (cell indices).
pub fn uniform_grid(n: i32, level: u32, f: impl Fn(i32, i32, i32) -> f32) -> AmrField {
    let w = 1 << level;
    let mut cells = Vec::new();
    let mut vals = Vec::new();
    for z in 0..n {
        for y in 0..n {
            for x in 0..n {
                cells.push(Cell::new([x * w, y * w, z * w], level));
                vals.push(f(x, y, z));
            }
        }
    }
    AmrField::new(cells, vals).unwrap()
}

pub fn channel_looking_at(center: Vec3, eye: Vec3, size: u32) -> Channel {
    let view = look_at(eye, center, Vec3::y()).unwrap();
    let proj = perspective(40.0, 1.0, 0.1, 500.0).unwrap();
    Channel::new(view, proj, size, size)
}

pub fn max_channel_diff(a: &Channel, b: &Channel) -> u8 {
    a.framebuffer
        .iter()
        .zip(&b.framebuffer)
        .map(|(x, y)| x.abs_diff(*y))
        .max()
        .unwrap_or(0)
}

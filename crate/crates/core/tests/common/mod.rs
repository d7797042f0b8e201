//! Helpers shared by the integration tests: grid histograms over
//! `[-1, 1]^d`, rejection sampling through the closed-form membership
//! tests, and two-sample comparisons with rare-cell merging.

#![allow(dead_code)]

use posetball::analysis::stats::{chi_square_two_sample, ChiSquare};
use posetball::analysis::BallFamily;
use rand::Rng;

pub const CELLS_PER_AXIS: usize = 4;

pub fn cell_count(d: usize) -> usize {
    CELLS_PER_AXIS.pow(d as u32)
}

/// Index of the grid cell containing `point`, row-major over axes.
pub fn cell_of(point: &[f64]) -> usize {
    point.iter().fold(0, |acc, &v| {
        let offset = (((v + 1.0) / 2.0) * CELLS_PER_AXIS as f64) as usize;
        acc * CELLS_PER_AXIS + offset.min(CELLS_PER_AXIS - 1)
    })
}

/// Marks cells whose corners all satisfy the membership test. The ball is
/// convex and a box is the hull of its corners, so corner membership is
/// equivalent to the whole cell lying inside the ball.
pub fn fully_inside_cells(family: BallFamily, d: usize) -> Vec<bool> {
    let width = 2.0 / CELLS_PER_AXIS as f64;
    (0..cell_count(d))
        .map(|index| {
            let mut lows = vec![0.0; d];
            let mut rest = index;
            for axis in (0..d).rev() {
                lows[axis] = -1.0 + width * (rest % CELLS_PER_AXIS) as f64;
                rest /= CELLS_PER_AXIS;
            }
            (0..1u32 << d).all(|corner| {
                let point: Vec<f64> = lows
                    .iter()
                    .enumerate()
                    .map(|(axis, &lo)| if corner >> axis & 1 == 1 { lo + width } else { lo })
                    .collect();
                family.contains(&point)
            })
        })
        .collect()
}

/// Histogram of `draws` outputs of `sample` over the grid.
pub fn histogram_of<R: Rng, F: FnMut(&mut R) -> Vec<f64>>(
    d: usize,
    draws: u64,
    mut sample: F,
    rng: &mut R,
) -> Vec<u64> {
    let mut hist = vec![0u64; cell_count(d)];
    for _ in 0..draws {
        hist[cell_of(&sample(rng))] += 1;
    }
    hist
}

/// Histogram of `accepted` rejection-sampled points: uniform proposals in
/// the cube, kept when the closed-form membership test passes.
pub fn rejection_histogram<R: Rng>(
    family: BallFamily,
    d: usize,
    accepted: u64,
    rng: &mut R,
) -> Vec<u64> {
    let mut hist = vec![0u64; cell_count(d)];
    let mut kept = 0u64;
    let mut point = vec![0.0; d];
    while kept < accepted {
        for v in point.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        if family.contains(&point) {
            hist[cell_of(&point)] += 1;
            kept += 1;
        }
    }
    hist
}

/// Two-sample chi-square over the grid cells, merging cells with pooled
/// count below `min_pooled` into one overflow category so every category
/// is adequately sampled.
pub fn grid_two_sample(a: &[u64], b: &[u64], min_pooled: u64) -> ChiSquare {
    let mut kept_a = Vec::new();
    let mut kept_b = Vec::new();
    let (mut rare_a, mut rare_b) = (0u64, 0u64);
    for (&x, &y) in a.iter().zip(b) {
        if x + y == 0 {
            continue;
        }
        if x + y < min_pooled {
            rare_a += x;
            rare_b += y;
        } else {
            kept_a.push(x);
            kept_b.push(y);
        }
    }
    if rare_a + rare_b >= min_pooled {
        kept_a.push(rare_a);
        kept_b.push(rare_b);
    }
    chi_square_two_sample(&kept_a, &kept_b).expect("histograms are comparable")
}

/// The same comparison restricted to cells lying fully inside the ball;
/// `None` when fewer than two such cells exist (thin balls).
pub fn restricted_two_sample(
    family: BallFamily,
    d: usize,
    a: &[u64],
    b: &[u64],
) -> Option<ChiSquare> {
    let inside = fully_inside_cells(family, d);
    let mut kept_a = Vec::new();
    let mut kept_b = Vec::new();
    for (cell, &flag) in inside.iter().enumerate() {
        if flag {
            kept_a.push(a[cell]);
            kept_b.push(b[cell]);
        }
    }
    if kept_a.len() < 2 {
        return None;
    }
    Some(chi_square_two_sample(&kept_a, &kept_b).expect("histograms are comparable"))
}

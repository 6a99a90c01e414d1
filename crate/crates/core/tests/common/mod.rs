//! Synthetic labeled datasets shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use riforest::Dataset;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal_row(d: usize, r: &mut ChaCha8Rng) -> Vec<f64> {
    (0..d).map(|_| StandardNormal.sample(r)).collect()
}

fn labeled(rows: Vec<Vec<f64>>, labels: Vec<u8>) -> Dataset {
    Dataset::from_rows(rows, Some(labels)).unwrap()
}

/// 980 points from a 2-D standard normal plus 20 anomalies uniform (by area)
/// on the annulus 6 <= r <= 8.
pub fn annulus(seed: u64) -> Dataset {
    let mut r = rng(seed);
    let mut rows = Vec::with_capacity(1000);
    let mut labels = Vec::with_capacity(1000);
    for _ in 0..980 {
        rows.push(normal_row(2, &mut r));
        labels.push(0);
    }
    for _ in 0..20 {
        let radius = r.random_range(36.0f64..64.0).sqrt();
        let theta = r.random_range(0.0..2.0 * PI);
        rows.push(vec![radius * theta.cos(), radius * theta.sin()]);
        labels.push(1);
    }
    labeled(rows, labels)
}

/// Six standard-normal features; 40 anomalies form a second mode at 5 on feature 0.
pub fn bimodal_feature(seed: u64) -> Dataset {
    let mut r = rng(seed);
    let mode = Normal::new(5.0, 0.5).unwrap();
    let mut rows = Vec::with_capacity(1000);
    let mut labels = Vec::with_capacity(1000);
    for _ in 0..960 {
        rows.push(normal_row(6, &mut r));
        labels.push(0);
    }
    for _ in 0..40 {
        let mut row = normal_row(6, &mut r);
        row[0] = mode.sample(&mut r);
        rows.push(row);
        labels.push(1);
    }
    labeled(rows, labels)
}

/// Five standard-normal features; 30 anomalies scattered in random directions
/// at radius 4 to 7.
pub fn scattered_tail(seed: u64) -> Dataset {
    let mut r = rng(seed);
    let mut rows = Vec::with_capacity(1000);
    let mut labels = Vec::with_capacity(1000);
    for _ in 0..970 {
        rows.push(normal_row(5, &mut r));
        labels.push(0);
    }
    for _ in 0..30 {
        let dir = normal_row(5, &mut r);
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        let radius = r.random_range(4.0..7.0);
        rows.push(dir.iter().map(|x| x / norm * radius).collect());
        labels.push(1);
    }
    labeled(rows, labels)
}

/// 1000 draws from 0.95 N(0,1) + 0.05 N(10,1).
pub fn bimodal_values(seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let far = Normal::new(10.0, 1.0).unwrap();
    (0..1000)
        .map(|_| {
            if r.random::<f64>() < 0.95 {
                StandardNormal.sample(&mut r)
            } else {
                far.sample(&mut r)
            }
        })
        .collect()
}

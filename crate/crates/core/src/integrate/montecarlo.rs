//! Rejection Monte Carlo over the bounding box.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::box_point;
use crate::geometry::BoundedDomain;
use crate::rng::{chunk_sizes, substream};
use crate::Complex64;

/// Unbiased estimate of `∫_D h dλ` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub proposals: u64,
    pub accepted: u64,
}

/// Estimates `∫_D h dλ` as `vol(box) · mean(1_D · h)` over `samples` box
/// proposals. The standard error uses the sample variance of `1_D · h`, so it
/// includes the rejection variance.
pub fn mc_integral<F>(domain: &BoundedDomain, samples: usize, seed: u64, integrand: F) -> Result<Estimate>
where
    F: Fn(&[Complex64]) -> Result<f64> + Sync,
{
    if samples < 2 {
        return Err(Error::Config("Monte Carlo needs at least two samples".into()));
    }
    let radii = domain.box_radii().to_vec();
    let sizes = chunk_sizes(samples);
    let partial: Vec<Result<(f64, f64, u64)>> = sizes
        .par_iter()
        .enumerate()
        .map(|(chunk, &size)| {
            let mut rng = substream(seed, chunk as u64);
            let (mut s, mut s2, mut acc) = (0.0, 0.0, 0u64);
            for _ in 0..size {
                let z = box_point(&mut rng, &radii);
                if domain.contains(&z) {
                    let v = integrand(&z)?;
                    s += v;
                    s2 += v * v;
                    acc += 1;
                }
            }
            Ok((s, s2, acc))
        })
        .collect();
    let (mut s, mut s2, mut accepted) = (0.0, 0.0, 0u64);
    for part in partial {
        let (a, b, c) = part?;
        s += a;
        s2 += b;
        accepted += c;
    }
    let n = samples as f64;
    let mean = s / n;
    let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
    let vol = domain.box_volume();
    Ok(Estimate {
        value: vol * mean,
        std_error: vol * (var / n).sqrt(),
        proposals: samples as u64,
        accepted,
    })
}

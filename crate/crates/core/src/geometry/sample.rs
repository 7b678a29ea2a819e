use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use super::{BoundedDomain, Point};
use crate::error::{Error, Result};
use crate::rng::{substream, CHUNK};

/// Below this acceptance rate the sampler gives up.
const MIN_ACCEPTANCE: f64 = 1e-6;
/// Proposals drawn before the acceptance rate is judged.
const TRIAL_BUDGET: u64 = 1 << 24;
/// Chunks drawn per parallel round.
const ROUND: usize = 8;

/// Uniform samples together with the rejection statistics that produced them.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub points: Vec<Point>,
    pub proposals: u64,
    pub accepted: u64,
}

impl SampleBatch {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }

    /// Volume estimate `vol(box) · acceptance rate`.
    pub fn volume_estimate(&self, domain: &BoundedDomain) -> f64 {
        domain.box_volume() * self.acceptance_rate()
    }
}

/// Uniform point of the bounding box.
pub(crate) fn box_point<R: Rng>(rng: &mut R, radii: &[f64]) -> Point {
    radii
        .iter()
        .map(|&r| {
            let re = r * (2.0 * rng.random::<f64>() - 1.0);
            let im = r * (2.0 * rng.random::<f64>() - 1.0);
            Complex64::new(re, im)
        })
        .collect()
}

/// Draws `count` points uniformly from `domain` by rejection from its bounding box.
///
/// Chunk `i` of proposals uses substream `i` of `seed`; accepted points are
/// kept in chunk order, so the output does not depend on the thread count.
pub fn sample(domain: &BoundedDomain, seed: u64, count: usize) -> Result<SampleBatch> {
    if count == 0 {
        return Err(Error::Config("sample count must be at least 1".into()));
    }
    let radii = domain.box_radii().to_vec();
    let mut points = Vec::with_capacity(count);
    let mut proposals = 0u64;
    let mut accepted = 0u64;
    let mut next_chunk = 0u64;
    while points.len() < count {
        let round: Vec<Vec<Point>> = (next_chunk..next_chunk + ROUND as u64)
            .into_par_iter()
            .map(|chunk| {
                let mut rng = substream(seed, chunk);
                (0..CHUNK)
                    .map(|_| box_point(&mut rng, &radii))
                    .filter(|z| domain.contains(z))
                    .collect()
            })
            .collect();
        next_chunk += ROUND as u64;
        for chunk in round {
            proposals += CHUNK as u64;
            accepted += chunk.len() as u64;
            let room = count - points.len();
            points.extend(chunk.into_iter().take(room));
            if points.len() == count {
                break;
            }
        }
        if proposals >= TRIAL_BUDGET && (accepted as f64) < MIN_ACCEPTANCE * proposals as f64 {
            return Err(Error::DegenerateSampler {
                rate: accepted as f64 / proposals as f64,
                trials: proposals,
            });
        }
    }
    Ok(SampleBatch { points, proposals, accepted })
}

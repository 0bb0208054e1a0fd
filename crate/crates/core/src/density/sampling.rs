// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

use std::f64::consts::{PI, TAU};

use rand::Rng;

use super::{AngularDensity, RadialLaw};
use crate::error::{Error, Result};

/// Number of grid points used to estimate the density maximum.
pub const ENVELOPE_GRID: usize = 4096;
const HEADROOM: f64 = 1.001;

/// Rejection envelope: grid maximum with 0.1% headroom.
pub fn envelope(d: &AngularDensity) -> Result<f64> {
    let max = (0..ENVELOPE_GRID)
        .map(|k| d.eval(-PI + TAU * k as f64 / ENVELOPE_GRID as f64))
        .fold(0.0, f64::max);
    if !(max.is_finite() && max > 1e-300) {
        return Err(Error::DegenerateDensity(format!(
            "grid maximum {max:e} is not usable as an envelope"
        )));
    }
    Ok(max * HEADROOM)
}

/// Draws `count` i.i.d. angles in `[-pi, pi)` by rejection from the uniform proposal.
pub fn sample_angles<R: Rng + ?Sized>(d: &AngularDensity, rng: &mut R, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let m = envelope(d)?;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let theta = -PI + TAU * rng.random::<f64>();
        if rng.random::<f64>() * m <= d.eval(theta) {
            out.push(theta);
        }
    }
    Ok(out)
}

/// Inverse-CDF radial draws, `u` uniform on `[0, 1)`.
pub fn sample_radii<R: Rng + ?Sized>(law: &RadialLaw, rng: &mut R, count: usize) -> Vec<f64> {
    (0..count).map(|_| law.quantile(rng.random::<f64>())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::SpectrallyBounded;
    use crate::geometry::LatentSpace;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ks_uniform(mut xs: Vec<f64>) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = (x + PI) / TAU;
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn uniform_draws_pass_ks() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xs = sample_angles(&AngularDensity::uniform(), &mut rng, 100_000).unwrap();
        assert!(xs.iter().all(|x| (-PI..PI).contains(x)));
        assert!(ks_uniform(xs) < 0.01);
    }

    #[test]
    fn cosine_density_mean() {
        let d: AngularDensity = SpectrallyBounded::new(vec![1.0], vec![1], vec![0.0]).unwrap().into();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let xs = sample_angles(&d, &mut rng, n).unwrap();
        let cs: Vec<f64> = xs.iter().map(|x| x.cos()).collect();
        let mean = cs.iter().sum::<f64>() / n as f64;
        // E[cos^2] = 1/2 under this density, so Var[cos] = 1/4
        let se = (0.25 / n as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn zero_count_and_determinism() {
        let d = AngularDensity::uniform();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_angles(&d, &mut rng, 0).unwrap().is_empty());
        let a = sample_angles(&d, &mut ChaCha8Rng::seed_from_u64(5), 50).unwrap();
        let b = sample_angles(&d, &mut ChaCha8Rng::seed_from_u64(5), 50).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn disk_radius_mean() {
        let law = RadialLaw::new(LatentSpace::UnitDisk).unwrap();
        let n = 100_000;
        let rs = sample_radii(&law, &mut ChaCha8Rng::seed_from_u64(3), n);
        let mean = rs.iter().sum::<f64>() / n as f64;
        // Var[r] = 1/2 - 4/9
        let se = ((0.5 - 4.0 / 9.0) / n as f64).sqrt();
        assert!((mean - 2.0 / 3.0).abs() < 3.0 * se);
    }
}

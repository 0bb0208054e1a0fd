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

//! Adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Globally adaptive: the interval with the largest local error estimate is
//! bisected until the summed estimate drops under the tolerance or the
//! subdivision budget runs out.

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

impl Quadrature {
    pub fn with_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> QuadResult {
        self.integrate_breaks(f, &[a, b])
    }

    /// Integrates over `[points[0], points.last()]`, seeding the adaptive
    /// partition with every interior break point (kinks, jumps, singularities).
    /// Points must be sorted ascending; duplicates are skipped.
    pub fn integrate_breaks<F: Fn(f64) -> f64>(&self, f: F, points: &[f64]) -> QuadResult {
        let mut segments: Vec<Segment> = points
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| kronrod(&f, w[0], w[1]))
            .collect();
        if segments.is_empty() {
            return QuadResult {
                value: 0.0,
                abs_error: 0.0,
                intervals: 0,
                converged: true,
            };
        }
        loop {
            let value: f64 = segments.iter().map(|s| s.value).sum();
            let error: f64 = segments.iter().map(|s| s.error).sum();
            let tol = self.abs_tol.max(self.rel_tol * value.abs());
            if error <= tol || segments.len() >= self.max_intervals {
                return QuadResult {
                    value,
                    abs_error: error,
                    intervals: segments.len(),
                    converged: error <= tol,
                };
            }
            let (worst, _) = segments.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, s)| {
                if s.error > acc.1 {
                    (i, s.error)
                } else {
                    acc
                }
            });
            let s = segments.swap_remove(worst);
            let mid = 0.5 * (s.a + s.b);
            if mid <= s.a || mid >= s.b {
                // interval can no longer be split in floating point
                segments.push(Segment { error: 0.0, ..s });
                continue;
            }
            segments.push(kronrod(&f, s.a, mid));
            segments.push(kronrod(&f, mid, s.b));
        }
    }
}

/// Shorthand for [`Quadrature::integrate`] at an absolute tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> f64 {
    Quadrature::with_tol(abs_tol).integrate(f, a, b).value
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_are_exact() {
        // K15 integrates degree-22 polynomials exactly
        let v = integrate(|x| x.powi(10) - 3.0 * x.powi(3), -1.0, 2.0, 1e-14);
        let exact = (2f64.powi(11) + 1.0) / 11.0 - 0.75 * (16.0 - 1.0);
        assert!((v - exact).abs() < 1e-11);
    }

    #[test]
    fn trig_matches_closed_form() {
        let v = integrate(|x| (3.0 * x).cos() + 0.5, -PI, 1.0, 1e-13);
        let exact = ((3.0f64).sin() - (-3.0 * PI).sin()) / 3.0 + 0.5 * (1.0 + PI);
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn sqrt_endpoint_singularity_converges() {
        let q = Quadrature::with_tol(1e-10).integrate(|x: f64| x.sqrt(), 0.0, 1.0);
        assert!(q.converged);
        assert!((q.value - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn break_points_handle_jumps() {
        let step = |x: f64| if x < 0.3 { 1.0 } else { 5.0 };
        let q = Quadrature::with_tol(1e-12).integrate_breaks(step, &[0.0, 0.3, 1.0]);
        assert!((q.value - (0.3 + 3.5)).abs() < 1e-12);
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(integrate(|x| x, 1.0, 1.0, 1e-10), 0.0);
    }
}

//! Declarative samplers for the data distributions used in experiments.
//!
//! A [`DistributionSpec`] is a plain value that serializes to JSON such as
//! `{"kind":"gaussian","d":2}`. Sampling is a pure function of the spec, the
//! seed, and the count. Draws are produced sequentially from one stream, so
//! the first `k` points of `sample(spec, seed, n)` equal `sample(spec, seed, k)`
//! for every `k ≤ n`; nested samples are obtained for free.
//!
//! # Families
//!
//! | kind                | support            | notes                                     |
//! |---------------------|--------------------|-------------------------------------------|
//! | `gaussian`          | `ℝ^d`              | isotropic, identity covariance            |
//! | `uniform_ball`      | ball radius √(d+2) | identity covariance                       |
//! | `uniform_cube`      | `[low, high]^d`    | defaults to the unit cube                 |
//! | `uniform_sphere`    | sphere of `radius` | rotationally invariant, not isotropic     |
//! | `nearly_uniform`    | `[0,1]^{d+1}`      | bounded tilt `a ≤ p ≤ b`, by rejection    |
//! | `radial_heavy_tail` | `ℝ^d`              | fat-tailed isotropic approximation family |
//! | `mean_shift`        | base + `mu`        | translates any base                       |
//!
//! The heavy-tail family has density proportional to
//! `(1 + ‖x‖/σ)^{−(d+1+1/|s|)}`. Its radius over `σ` follows a beta-prime law
//! with shapes `(d, β)`, `β = 1 + 1/|s|`. That gives an exact sampler (a ratio
//! of two gamma draws) and the closed form `σ² = (β−1)(β−2)/(d+1)` for identity
//! covariance, finite whenever `−1 < s < 0`. The family stands in for
//! fat-tailed concave-type densities; it is an approximation of that notion,
//! not a certified member.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::Point;
use crate::rng::{generator, Generator};

fn default_low() -> f64 {
    0.0
}

fn default_high() -> f64 {
    1.0
}

/// Bounded density tilts on the unit cube, each integrating to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Tilt {
    /// `p = 1`.
    Flat,
    /// `p(x) = 1 + slope · (x_axis − 1/2)` with `|slope| < 2`.
    Ramp { axis: usize, slope: f64 },
    /// `p(x) = 1 + amplitude · cos(2π · frequency · x_axis)` with
    /// `|amplitude| < 1` and integer `frequency ≥ 1`.
    Cosine { axis: usize, amplitude: f64, frequency: u32 },
}

impl Tilt {
    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Tilt::Flat => Ok(()),
            Tilt::Ramp { axis, slope } => {
                if *axis >= dim {
                    return Err(invalid(format!("tilt axis {axis} outside dimension {dim}")));
                }
                if !(slope.abs() < 2.0) {
                    return Err(invalid("ramp slope must satisfy |slope| < 2"));
                }
                Ok(())
            }
            Tilt::Cosine { axis, amplitude, frequency } => {
                if *axis >= dim {
                    return Err(invalid(format!("tilt axis {axis} outside dimension {dim}")));
                }
                if !(amplitude.abs() < 1.0) || *frequency == 0 {
                    return Err(invalid("cosine tilt needs |amplitude| < 1 and frequency ≥ 1"));
                }
                Ok(())
            }
        }
    }

    /// Density at `x` in the unit cube.
    pub fn density(&self, x: &[f64]) -> f64 {
        match self {
            Tilt::Flat => 1.0,
            Tilt::Ramp { axis, slope } => 1.0 + slope * (x[*axis] - 0.5),
            Tilt::Cosine { axis, amplitude, frequency } => {
                1.0 + amplitude * (std::f64::consts::TAU * f64::from(*frequency) * x[*axis]).cos()
            }
        }
    }

    /// Exact `(min, max)` of the density over the cube.
    pub fn range(&self) -> (f64, f64) {
        match self {
            Tilt::Flat => (1.0, 1.0),
            Tilt::Ramp { slope, .. } => (1.0 - slope.abs() / 2.0, 1.0 + slope.abs() / 2.0),
            Tilt::Cosine { amplitude, .. } => (1.0 - amplitude.abs(), 1.0 + amplitude.abs()),
        }
    }
}

/// A sampler description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    /// Standard normal in `ℝ^d`.
    Gaussian { d: usize },
    /// Uniform on the ball of radius `√(d+2)`, which has identity covariance.
    UniformBall { d: usize },
    /// Uniform on `[low, high]^d`.
    UniformCube {
        d: usize,
        #[serde(default = "default_low")]
        low: f64,
        #[serde(default = "default_high")]
        high: f64,
    },
    /// Uniform on the sphere of the given radius.
    UniformSphere { d: usize, radius: f64 },
    /// Density `tilt` on `[0,1]^{d+1}` with declared envelope `a ≤ p ≤ b`.
    NearlyUniform { d: usize, a: f64, b: f64, tilt: Tilt },
    /// Isotropic fat-tailed radial family with shape `s < 0`.
    RadialHeavyTail { d: usize, s: f64 },
    /// `base` translated by `mu`.
    MeanShift { mu: Vec<f64>, base: Box<DistributionSpec> },
}

/// Density envelope of a distribution, when one is known exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityBounds {
    Bounds { a: f64, b: f64 },
    Unsupported,
}

impl DistributionSpec {
    /// Ambient dimension of the draws.
    pub fn dimension(&self) -> usize {
        match self {
            DistributionSpec::Gaussian { d }
            | DistributionSpec::UniformBall { d }
            | DistributionSpec::UniformCube { d, .. }
            | DistributionSpec::UniformSphere { d, .. }
            | DistributionSpec::RadialHeavyTail { d, .. } => *d,
            DistributionSpec::NearlyUniform { d, .. } => d + 1,
            DistributionSpec::MeanShift { base, .. } => base.dimension(),
        }
    }

    /// Checks parameter ranges.
    pub fn validate(&self) -> Result<()> {
        if self.dimension() == 0 {
            return Err(invalid("distribution dimension must be positive"));
        }
        match self {
            DistributionSpec::Gaussian { .. } | DistributionSpec::UniformBall { .. } => Ok(()),
            DistributionSpec::UniformCube { low, high, .. } => {
                if low.is_finite() && high.is_finite() && low < high {
                    Ok(())
                } else {
                    Err(invalid("uniform cube needs finite low < high"))
                }
            }
            DistributionSpec::UniformSphere { radius, .. } => {
                if radius.is_finite() && *radius > 0.0 {
                    Ok(())
                } else {
                    Err(invalid("sphere radius must be positive and finite"))
                }
            }
            DistributionSpec::NearlyUniform { a, b, tilt, .. } => {
                tilt.validate(self.dimension())?;
                if !(a.is_finite() && b.is_finite() && *a > 0.0 && a <= b) {
                    return Err(invalid("nearly uniform needs 0 < a ≤ b"));
                }
                let (lo, hi) = tilt.range();
                if lo < *a || hi > *b {
                    return Err(invalid(format!(
                        "tilt density range [{lo}, {hi}] is not inside the declared envelope [{a}, {b}]"
                    )));
                }
                Ok(())
            }
            DistributionSpec::RadialHeavyTail { s, .. } => {
                if s.is_finite() && *s < 0.0 && *s > -1.0 {
                    Ok(())
                } else {
                    Err(invalid("heavy-tail shape needs −1 < s < 0 for a finite covariance"))
                }
            }
            DistributionSpec::MeanShift { mu, base } => {
                base.validate()?;
                if mu.len() != base.dimension() {
                    return Err(Error::DimensionMismatch { expected: base.dimension(), found: mu.len() });
                }
                if mu.iter().any(|v| !v.is_finite()) {
                    return Err(invalid("shift vector must be finite"));
                }
                Ok(())
            }
        }
    }

    /// Whether the law is invariant under rotations about the origin.
    pub fn is_rotation_invariant(&self) -> bool {
        match self {
            DistributionSpec::Gaussian { .. }
            | DistributionSpec::UniformBall { .. }
            | DistributionSpec::UniformSphere { .. }
            | DistributionSpec::RadialHeavyTail { .. } => true,
            DistributionSpec::UniformCube { d, low, high } => *d == 1 && *low == -*high,
            DistributionSpec::NearlyUniform { .. } => false,
            DistributionSpec::MeanShift { mu, base } => mu.iter().all(|v| *v == 0.0) && base.is_rotation_invariant(),
        }
    }

    /// Exact density envelope for bounded-support families.
    pub fn density_bounds(&self) -> DensityBounds {
        match self {
            DistributionSpec::UniformCube { d, low, high } => {
                let p = (high - low).powi(-(*d as i32));
                DensityBounds::Bounds { a: p, b: p }
            }
            DistributionSpec::NearlyUniform { a, b, .. } => DensityBounds::Bounds { a: *a, b: *b },
            DistributionSpec::MeanShift { base, .. } => base.density_bounds(),
            _ => DensityBounds::Unsupported,
        }
    }

    /// Cumulative distribution function for one-dimensional specs that have
    /// one in closed form.
    pub fn cdf_1d(&self, x: f64) -> Option<f64> {
        if self.dimension() != 1 {
            return None;
        }
        match self {
            DistributionSpec::Gaussian { .. } => Some(normal_cdf(x)),
            DistributionSpec::UniformBall { .. } => {
                let r = 3f64.sqrt();
                Some(((x + r) / (2.0 * r)).clamp(0.0, 1.0))
            }
            DistributionSpec::UniformCube { low, high, .. } => Some(((x - low) / (high - low)).clamp(0.0, 1.0)),
            DistributionSpec::UniformSphere { radius, .. } => Some(if x < -radius {
                0.0
            } else if x < *radius {
                0.5
            } else {
                1.0
            }),
            DistributionSpec::MeanShift { mu, base } => base.cdf_1d(x - mu[0]),
            DistributionSpec::NearlyUniform { .. } | DistributionSpec::RadialHeavyTail { .. } => None,
        }
    }

    /// Scale `σ` of the heavy-tail family giving identity covariance.
    pub fn heavy_tail_scale(d: usize, s: f64) -> f64 {
        let beta = 1.0 + 1.0 / s.abs();
        ((beta - 1.0) * (beta - 2.0) / (d as f64 + 1.0)).sqrt()
    }
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// `n` i.i.d. draws from `spec`, deterministic in `(spec, seed, n)`.
pub fn sample(spec: &DistributionSpec, seed: u64, n: usize) -> Result<Vec<Point>> {
    spec.validate()?;
    let mut rng = generator(seed);
    Ok((0..n).map(|_| Point::from_finite(draw(spec, &mut rng))).collect())
}

/// `n` draws from `spec` using a caller-provided generator.
pub fn sample_with(spec: &DistributionSpec, rng: &mut Generator, n: usize) -> Result<Vec<Point>> {
    spec.validate()?;
    Ok((0..n).map(|_| Point::from_finite(draw(spec, rng))).collect())
}

/// Density envelope of `spec`.
pub fn density_bounds(spec: &DistributionSpec) -> DensityBounds {
    spec.density_bounds()
}

fn gaussian_vec<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    (0..d).map(|_| StandardNormal.sample(rng)).collect()
}

/// A uniformly random unit vector in `ℝ^d`.
pub fn unit_direction<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let g = gaussian_vec(rng, d);
        let n = crate::model::norm(&g);
        if n > 1e-300 {
            return g.into_iter().map(|v| v / n).collect();
        }
    }
}

/// A uniform point in the ball of the given radius around `center`.
pub fn uniform_in_ball<R: Rng + ?Sized>(rng: &mut R, center: &[f64], radius: f64) -> Vec<f64> {
    let d = center.len();
    let dir = unit_direction(rng, d);
    let r = radius * rng.gen::<f64>().powf(1.0 / d as f64);
    center.iter().zip(dir).map(|(c, u)| c + r * u).collect()
}

fn draw(spec: &DistributionSpec, rng: &mut Generator) -> Vec<f64> {
    match spec {
        DistributionSpec::Gaussian { d } => gaussian_vec(rng, *d),
        DistributionSpec::UniformBall { d } => {
            let center = vec![0.0; *d];
            uniform_in_ball(rng, &center, ((*d + 2) as f64).sqrt())
        }
        DistributionSpec::UniformCube { d, low, high } => {
            (0..*d).map(|_| low + (high - low) * rng.gen::<f64>()).collect()
        }
        DistributionSpec::UniformSphere { d, radius } => {
            unit_direction(rng, *d).into_iter().map(|v| radius * v).collect()
        }
        DistributionSpec::NearlyUniform { b, tilt, .. } => {
            let dim = spec.dimension();
            loop {
                let x: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
                if rng.gen::<f64>() * b <= tilt.density(&x) {
                    return x;
                }
            }
        }
        DistributionSpec::RadialHeavyTail { d, s } => {
            let beta = 1.0 + 1.0 / s.abs();
            let sigma = DistributionSpec::heavy_tail_scale(*d, *s);
            let num = Gamma::new(*d as f64, 1.0).expect("valid gamma shape").sample(rng);
            let den = Gamma::new(beta, 1.0).expect("valid gamma shape").sample(rng);
            let radius = sigma * num / den;
            unit_direction(rng, *d).into_iter().map(|v| radius * v).collect()
        }
        DistributionSpec::MeanShift { mu, base } => {
            let x = draw(base, rng);
            x.into_iter().zip(mu).map(|(a, b)| a + b).collect()
        }
    }
}

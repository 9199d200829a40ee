//! Stable-process parameterization, exponent, increment sampling and path
//! simulation with explicit jump records and first-passage-below-zero
//! detection.
//!
//! Time is normalized so that the exponent's multiplicative constant is 1;
//! distributional statements about space laws are unaffected by this
//! choice, and time-valued outputs are reported in that normalization.

use crate::error::{Error, Result};
use crate::specfun::{self, gamma_real, sinpi};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use std::io::{self, Write};

/// Index/positivity pair (theta, rho) restricted to the admissible set:
/// theta in (0,1) with rho in (0,1), theta in (1,2) with theta*rho and
/// theta*(1-rho) in (0,1), or the symmetric Cauchy point (1, 1/2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StableParams {
    theta: f64,
    rho: f64,
}

impl StableParams {
    pub fn new(theta: f64, rho: f64) -> Result<Self> {
        validate_stable(theta, rho)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// tan(pi theta (rho - 1/2)), the product beta * tan(pi theta / 2).
    ///
    /// Working with the product avoids the tan(pi/2) blow-up at theta = 1.
    pub fn asymmetry_tangent(&self) -> f64 {
        let t0 = self.theta * (self.rho - 0.5);
        (std::f64::consts::PI * t0).tan()
    }

    /// Skewness beta of the classical parameterization.
    pub fn skewness(&self) -> f64 {
        if self.theta == 1.0 {
            0.0
        } else {
            self.asymmetry_tangent() / (std::f64::consts::PI * self.theta / 2.0).tan()
        }
    }

    /// Densities of the Lévy measure are c_plus y^{-1-theta} dy on (0, inf)
    /// and c_minus |y|^{-1-theta} dy on (-inf, 0); the weights are fixed by
    /// rho and by the unit normalization of the exponent.
    pub fn levy_weights(&self) -> (f64, f64) {
        let theta = self.theta;
        let t0 = theta * (self.rho - 0.5);
        let norm = gamma_real(1.0 + theta).expect("theta in (0,2)")
            / (specfun::PI * specfun::cospi(t0));
        let c_plus = norm * sinpi(theta * self.rho);
        let c_minus = norm * sinpi(theta * (1.0 - self.rho));
        (c_plus, c_minus)
    }
}

/// Validate (theta, rho) against the admissible set, naming the violated
/// constraint. The boundary families (monotone paths, one-sided jumps,
/// Brownian motion, asymmetric Cauchy) are rejected.
pub fn validate_stable(theta: f64, rho: f64) -> Result<StableParams> {
    if !(theta.is_finite() && rho.is_finite()) {
        return Err(Error::domain("stable parameters must be finite"));
    }
    let ok = if theta > 0.0 && theta < 1.0 {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::domain(format!(
                "theta = {theta} in (0,1) requires rho in (0,1), got {rho} (monotone-path boundary)"
            )));
        }
        true
    } else if theta == 1.0 {
        if rho != 0.5 {
            return Err(Error::domain(format!(
                "theta = 1 admits only rho = 1/2 (asymmetric Cauchy excluded), got {rho}"
            )));
        }
        true
    } else if theta > 1.0 && theta < 2.0 {
        let up = theta * rho;
        let down = theta * (1.0 - rho);
        if !(up > 0.0 && up < 1.0) {
            return Err(Error::domain(format!(
                "theta*rho = {up} must lie in (0,1) (spectrally one-sided boundary)"
            )));
        }
        if !(down > 0.0 && down < 1.0) {
            return Err(Error::domain(format!(
                "theta*(1-rho) = {down} must lie in (0,1) (spectrally one-sided boundary)"
            )));
        }
        true
    } else {
        return Err(Error::domain(format!(
            "theta = {theta} outside (0,2) \\ {{Brownian theta=2}} is not admissible"
        )));
    };
    debug_assert!(ok);
    Ok(StableParams { theta, rho })
}

/// Characteristic exponent evaluated on the imaginary axis, q = i u:
/// psi(iu) = -|u|^theta (1 - i tan(pi theta (rho - 1/2)) sgn(u)).
pub fn stable_char_exponent(params: &StableParams, u: f64) -> Complex64 {
    if u == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let mag = u.abs().powf(params.theta());
    let tang = params.asymmetry_tangent();
    Complex64::new(-mag, mag * tang * u.signum())
}

/// One draw of the standard marginal X_1 via the trigonometric
/// (Chambers-Mallows-Stuck) construction mapped to (theta, rho).
pub fn sample_standard_stable<R: Rng + ?Sized>(params: &StableParams, rng: &mut R) -> f64 {
    let theta = params.theta();
    // V uniform on (-pi/2, pi/2), W standard exponential
    let v = (rng.random::<f64>() - 0.5) * std::f64::consts::PI;
    let w = -(1.0 - rng.random::<f64>()).ln();
    if theta == 1.0 {
        // symmetric Cauchy
        return v.tan();
    }
    let t0 = std::f64::consts::PI * theta * (params.rho() - 0.5);
    let b = t0 / theta;
    let scale = t0.cos().powf(-1.0 / theta);
    let s1 = (theta * (v + b)).sin() / v.cos().powf(1.0 / theta);
    let s2 = ((v - theta * (v + b)).cos() / w).powf((1.0 - theta) / theta);
    scale * s1 * s2
}

/// One increment over a window of length dt; equal in law to
/// dt^{1/theta} X_1 by self-similarity.
pub fn sample_stable_increment<R: Rng + ?Sized>(
    params: &StableParams,
    dt: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::domain(format!("dt = {dt} must be positive")));
    }
    Ok(dt.powf(1.0 / params.theta()) * sample_standard_stable(params, rng))
}

/// A jump record on a simulated path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jump {
    pub time: f64,
    pub size: f64,
}

/// Piecewise skeleton of a (possibly killed) Lévy path.
///
/// `times`/`values` hold the cadlag skeleton on the union of the Gaussian
/// sub-grid and the jump times; after a kill nothing is recorded, and the
/// final entry of a killed path is the crossing value itself.
#[derive(Clone, Debug, Default)]
pub struct LevyPath {
    pub initial_value: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub jumps: Vec<Jump>,
    pub kill_time: Option<f64>,
}

impl LevyPath {
    pub fn is_killed(&self) -> bool {
        self.kill_time.is_some()
    }

    pub fn final_value(&self) -> f64 {
        *self.values.last().expect("path has at least its start point")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("path has at least its start point")
    }

    /// -X_tau for a path killed at first passage below zero.
    pub fn overshoot(&self) -> Option<f64> {
        self.kill_time.map(|_| -self.final_value())
    }

    /// CSV columns: t, value, is_jump, jump_size.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "t,value,is_jump,jump_size")?;
        let mut jump_iter = self.jumps.iter().peekable();
        for (&t, &v) in self.times.iter().zip(&self.values) {
            let mut size = 0.0;
            let mut is_jump = 0;
            if let Some(j) = jump_iter.peek() {
                if j.time == t {
                    size = j.size;
                    is_jump = 1;
                    jump_iter.next();
                }
            }
            writeln!(w, "{t},{v},{is_jump},{size}")?;
        }
        Ok(())
    }
}

/// Discretization controls for stable path simulation.
#[derive(Clone, Copy, Debug)]
pub struct StablePathConfig {
    /// Magnitude threshold: jumps larger than this are explicit, smaller
    /// ones are folded into the Gaussian substitute.
    pub jump_threshold: f64,
    /// Step of the Gaussian sub-grid.
    pub grid_dt: f64,
    /// Cap on the expected number of explicit jumps.
    pub max_jumps: usize,
}

impl StablePathConfig {
    /// Defaults tied to the spatial scale of the path start: the threshold
    /// is 1e-3 of the scale and the sub-grid resolves the natural time
    /// scale^theta of first passage.
    pub fn for_scale(scale: f64, theta: f64) -> Self {
        StablePathConfig {
            jump_threshold: 1e-3 * scale,
            grid_dt: 0.01 * scale.powf(theta),
            max_jumps: 50_000_000,
        }
    }
}

/// Small-jump Gaussian substitute parameters and big-jump rate for a given
/// threshold.
pub(crate) struct JumpDecomposition {
    pub rate: f64,
    pub prob_up: f64,
    pub sigma2: f64,
    pub drift: f64,
}

pub(crate) fn decompose_levy_measure(params: &StableParams, delta: f64) -> JumpDecomposition {
    let theta = params.theta();
    let (cp, cm) = params.levy_weights();
    let rate = (cp + cm) * delta.powf(-theta) / theta;
    let sigma2 = (cp + cm) * delta.powf(2.0 - theta) / (2.0 - theta);
    // Compensation of the substituted small jumps (theta < 1) or of the
    // explicit big jumps (theta > 1) collapses to one formula; it vanishes
    // by symmetry in the Cauchy case.
    let drift = if theta == 1.0 {
        0.0
    } else {
        (cp - cm) * delta.powf(1.0 - theta) / (1.0 - theta)
    };
    JumpDecomposition {
        rate,
        prob_up: cp / (cp + cm),
        sigma2,
        drift,
    }
}

/// Path of the stable process started at x0, killed at first passage below
/// zero. Jumps above the threshold are compound-Poisson draws from the
/// polar Pareto tails; the remainder is a variance-matched Gaussian with
/// drift compensation.
pub fn simulate_stable_path<R: Rng + ?Sized>(
    x0: f64,
    params: &StableParams,
    horizon: f64,
    config: &StablePathConfig,
    rng: &mut R,
) -> Result<LevyPath> {
    if !(x0 > 0.0) {
        return Err(Error::domain(format!("x0 = {x0} must be positive")));
    }
    if !(config.jump_threshold > 0.0) {
        return Err(Error::domain(format!(
            "jump threshold = {} must be positive",
            config.jump_threshold
        )));
    }
    if !(horizon > 0.0) {
        return Err(Error::domain(format!("horizon = {horizon} must be positive")));
    }
    let theta = params.theta();
    let decomp = decompose_levy_measure(params, config.jump_threshold);
    if decomp.rate * horizon > config.max_jumps as f64 {
        return Err(Error::Resource(format!(
            "expected jump count {:.3e} exceeds cap {}",
            decomp.rate * horizon,
            config.max_jumps
        )));
    }
    let sigma = decomp.sigma2.sqrt();
    let normal = StandardNormal;

    let mut path = LevyPath {
        initial_value: x0,
        times: vec![0.0],
        values: vec![x0],
        jumps: Vec::new(),
        kill_time: None,
    };
    let mut t = 0.0;
    let mut x = x0;
    let mut next_jump = exp_draw(rng) / decomp.rate;

    while t < horizon && path.kill_time.is_none() {
        let target = (t + config.grid_dt).min(horizon).min(next_jump);
        let dt = target - t;
        if dt > 0.0 {
            let z: f64 = normal.sample(rng);
            x += decomp.drift * dt + sigma * dt.sqrt() * z;
            t = target;
            path.times.push(t);
            path.values.push(x);
            if x < 0.0 {
                path.kill_time = Some(t);
                break;
            }
        } else {
            t = target;
        }
        if t == next_jump && t < horizon {
            if path.jumps.len() >= config.max_jumps {
                return Err(Error::Resource(format!(
                    "jump count exceeded cap {}",
                    config.max_jumps
                )));
            }
            let up = rng.random::<f64>() < decomp.prob_up;
            let mag = config.jump_threshold * rng.random::<f64>().powf(-1.0 / theta);
            let size = if up { mag } else { -mag };
            x += size;
            path.jumps.push(Jump { time: t, size });
            path.times.push(t);
            path.values.push(x);
            if x < 0.0 {
                path.kill_time = Some(t);
                break;
            }
            next_jump = t + exp_draw(rng) / decomp.rate;
        }
    }
    Ok(path)
}

/// Standard exponential draw.
pub(crate) fn exp_draw<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    -(1.0 - rng.random::<f64>()).ln()
}

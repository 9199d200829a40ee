//! Closed-form analytics of the growth-fragmentation: the cell exponent,
//! dislocation measure, drift, cumulants in their gamma-ratio and cosine
//! forms, the root pair, the pole/zero lattice, and quadrature identity
//! checks.

use crate::error::{Error, Result};
use crate::quad;
use crate::ricochet::RicochetParams;
use crate::specfun::{
    self, cospi, distance_to_gamma_pole, gamma_ratio_signed, gamma_real,
    incomplete_beta_continued, log_gamma_signed, sinpi,
};
use serde::Serialize;

/// Proximity window around the cumulant's poles; evaluation inside the
/// window is reported as a pole error rather than a huge finite number.
pub const POLE_PROXIMITY: f64 = 1e-9;

const QUAD_TOL: f64 = 1e-11;

/// Growth-fragmentation parameters (theta, r) with the derived quantities
/// b, pf = r sin(pi (theta - 1/2)) and the omega triple
/// (theta+1-b, theta+1, theta+1+b).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GFParams {
    theta: f64,
    r: f64,
    b: f64,
    pf: f64,
    omega_minus: f64,
    omega_zero: f64,
    omega_plus: f64,
}

/// Unique b in [0, 1/2] with cos(pi b) = r sin(pi (theta - 1/2)).
pub fn b_of(theta: f64, r: f64) -> Result<f64> {
    if !(theta > 0.5 && theta <= 1.5) {
        return Err(Error::domain(format!(
            "theta = {theta} outside (1/2, 3/2]"
        )));
    }
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::domain(format!("r = {r} outside [0, 1]")));
    }
    Ok((r * sinpi(theta - 0.5)).acos() / specfun::PI)
}

impl GFParams {
    pub fn new(theta: f64, r: f64) -> Result<Self> {
        let b = b_of(theta, r)?;
        Ok(GFParams {
            theta,
            r,
            b,
            pf: r * sinpi(theta - 0.5),
            omega_minus: theta + 1.0 - b,
            omega_zero: theta + 1.0,
            omega_plus: theta + 1.0 + b,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn pf(&self) -> f64 {
        self.pf
    }
    pub fn omega_minus(&self) -> f64 {
        self.omega_minus
    }
    pub fn omega_zero(&self) -> f64 {
        self.omega_zero
    }
    pub fn omega_plus(&self) -> f64 {
        self.omega_plus
    }
    pub fn omegas(&self) -> (f64, f64, f64) {
        (self.omega_minus, self.omega_zero, self.omega_plus)
    }

    /// Open strip on which the cumulant is defined.
    pub fn strip(&self) -> (f64, f64) {
        (self.theta, 1.0 + 2.0 * self.theta)
    }

    /// The spine at omega_0 is the ricocheted stable process with
    /// parameters (theta, 0, b).
    pub fn spine_ricochet_params(&self) -> Result<RicochetParams> {
        RicochetParams::from_sigma_b(self.theta, 0.0, self.b)
    }
}

fn check_strip(params: &GFParams, q: f64) -> Result<()> {
    let (lo, hi) = params.strip();
    if !(q > lo && q < hi) {
        return Err(Error::domain(format!(
            "q = {q} outside the strip ({lo}, {hi})"
        )));
    }
    Ok(())
}

/// Cumulant of the baseline process (r = 0 up-jumps discarded):
/// kappa_ref(q) = -Gamma(1+2 theta-q) Gamma(q-theta) cos(pi (theta+1-q)) / pi.
pub fn kappa_ref(theta: f64, q: f64) -> Result<f64> {
    let params = GFParams::new(theta, 0.0)?;
    check_strip(&params, q)?;
    let g = log_gamma_signed(1.0 + 2.0 * theta - q)?.mul(log_gamma_signed(q - theta)?);
    Ok(g.scale(-cospi(theta + 1.0 - q) / specfun::PI).value())
}

/// Same value through the gamma-ratio form
/// -Gamma(1+2 theta-q) Gamma(q-theta) / (Gamma(3/2+theta-q) Gamma(q-theta-1/2)).
pub fn kappa_ref_ratio_form(theta: f64, q: f64) -> Result<f64> {
    let params = GFParams::new(theta, 0.0)?;
    check_strip(&params, q)?;
    let ratio = gamma_ratio_signed(
        &[1.0 + 2.0 * theta - q, q - theta],
        &[1.5 + theta - q, q - theta - 0.5],
    )?;
    Ok(ratio.neg().value())
}

fn kappa_pole_check(params: &GFParams, q: f64) -> Result<()> {
    let theta = params.theta;
    // the numerator gamma arguments pole exactly on the lattice
    // {2 theta + 1 + k} U {theta - k}
    for arg in [
        (1.0 + 2.0 * theta - q) / 2.0,
        (2.0 + 2.0 * theta - q) / 2.0,
        (q - theta) / 2.0,
        (1.0 - theta + q) / 2.0,
    ] {
        if distance_to_gamma_pole(arg) < POLE_PROXIMITY {
            return Err(Error::pole(format!(
                "q = {q} within {POLE_PROXIMITY} of a cumulant pole"
            )));
        }
    }
    Ok(())
}

/// Cumulant of the growth-fragmentation, eight-gamma form (the primary
/// evaluator), computed in signed-log space:
///
/// kappa(q) = -2^theta
///   * G((1+2t-q)/2) G((2+2t-q)/2) / (G((1+b+t-q)/2) G((3-b+t-q)/2))
///   * G((q-t)/2) G((1-t+q)/2)     / (G((1-b-t+q)/2) G((b-1-t+q)/2)).
pub fn kappa(params: &GFParams, q: f64) -> Result<f64> {
    check_strip(params, q)?;
    kappa_pole_check(params, q)?;
    let (theta, b) = (params.theta, params.b);
    let ratio = gamma_ratio_signed(
        &[
            (1.0 + 2.0 * theta - q) / 2.0,
            (2.0 + 2.0 * theta - q) / 2.0,
            (q - theta) / 2.0,
            (1.0 - theta + q) / 2.0,
        ],
        &[
            (1.0 + b + theta - q) / 2.0,
            (3.0 - b + theta - q) / 2.0,
            (1.0 - b - theta + q) / 2.0,
            (b - 1.0 - theta + q) / 2.0,
        ],
    )?;
    Ok(ratio.scale(-theta.exp2()).value())
}

/// Cumulant in the cosine form, the built-in oracle for [`kappa`]:
/// Gamma(1+2 theta-q) Gamma(q-theta) (cos(pi b) - cos(pi (theta+1-q))) / pi.
pub fn kappa_cosine_form(params: &GFParams, q: f64) -> Result<f64> {
    check_strip(params, q)?;
    kappa_pole_check(params, q)?;
    let theta = params.theta;
    let g = log_gamma_signed(1.0 + 2.0 * theta - q)?.mul(log_gamma_signed(q - theta)?);
    let trig = cospi(params.b) - cospi(theta + 1.0 - q);
    Ok(g.scale(trig / specfun::PI).value())
}

/// Pole and zero families of the cumulant as a meromorphic function:
/// poles at 2 theta+1+k and theta-k; zeros at b+theta+2k+1, theta-b+2k+3,
/// b+theta-(2k+1) and theta-b-(2k-1), k = 0, 1, 2, ...
#[derive(Clone, Debug, Serialize)]
pub struct PoleZeroLattice {
    pub poles_upper: Vec<f64>,
    pub poles_lower: Vec<f64>,
    pub zeros_upper_first: Vec<f64>,
    pub zeros_upper_second: Vec<f64>,
    pub zeros_lower_first: Vec<f64>,
    pub zeros_lower_second: Vec<f64>,
    /// Lattice points falling strictly inside the strip (theta, 1+2 theta).
    pub zeros_in_strip: Vec<f64>,
    pub poles_in_strip: Vec<f64>,
}

impl PoleZeroLattice {
    pub fn all_points(&self) -> Vec<f64> {
        let mut pts = Vec::new();
        pts.extend_from_slice(&self.poles_upper);
        pts.extend_from_slice(&self.poles_lower);
        pts.extend_from_slice(&self.zeros_upper_first);
        pts.extend_from_slice(&self.zeros_upper_second);
        pts.extend_from_slice(&self.zeros_lower_first);
        pts.extend_from_slice(&self.zeros_lower_second);
        pts.sort_by(f64::total_cmp);
        pts
    }
}

pub fn pole_zero_lattice(params: &GFParams, k_max: usize) -> PoleZeroLattice {
    let (theta, b) = (params.theta, params.b);
    let ks = 0..=k_max;
    let poles_upper: Vec<f64> = ks.clone().map(|k| 2.0 * theta + 1.0 + k as f64).collect();
    let poles_lower: Vec<f64> = ks.clone().map(|k| theta - k as f64).collect();
    let zeros_upper_first: Vec<f64> = ks
        .clone()
        .map(|k| b + theta + 2.0 * k as f64 + 1.0)
        .collect();
    let zeros_upper_second: Vec<f64> = ks
        .clone()
        .map(|k| theta - b + 2.0 * k as f64 + 3.0)
        .collect();
    let zeros_lower_first: Vec<f64> = ks
        .clone()
        .map(|k| b + theta - (2.0 * k as f64 + 1.0))
        .collect();
    let zeros_lower_second: Vec<f64> = ks
        .map(|k| theta - b - (2.0 * k as f64 - 1.0))
        .collect();
    let (lo, hi) = params.strip();
    let in_strip = |v: &&f64| **v > lo && **v < hi;
    let zeros_in_strip = zeros_upper_first
        .iter()
        .chain(&zeros_upper_second)
        .chain(&zeros_lower_first)
        .chain(&zeros_lower_second)
        .filter(in_strip)
        .copied()
        .collect();
    let poles_in_strip = poles_upper
        .iter()
        .chain(&poles_lower)
        .filter(in_strip)
        .copied()
        .collect();
    PoleZeroLattice {
        poles_upper,
        poles_lower,
        zeros_upper_first,
        zeros_upper_second,
        zeros_lower_first,
        zeros_lower_second,
        zeros_in_strip,
        poles_in_strip,
    }
}

/// Deterministic grid of n points in the open strip, kept away from the
/// lattice points (poles and zeros) so relative comparisons stay
/// well-conditioned.
pub fn pole_avoiding_q_grid(params: &GFParams, n: usize) -> Vec<f64> {
    let (lo, hi) = params.strip();
    let span = hi - lo;
    let margin = 0.04 * span;
    let lattice = pole_zero_lattice(params, 4).all_points();
    let min_dist = 0.02 * span;
    let mut grid = Vec::with_capacity(n);
    for i in 0..n {
        let mut q = lo + margin + (span - 2.0 * margin) * (i as f64 + 0.5) / n as f64;
        let mut guard = 0;
        while lattice.iter().any(|&p| (q - p).abs() < min_dist) && guard < 8 {
            q += 0.6 * min_dist;
            guard += 1;
        }
        if q < hi - 0.5 * margin {
            grid.push(q);
        }
    }
    grid.dedup();
    grid
}

/// Density of the dislocation measure: zero on (0, 1/2], the two power
/// branches elsewhere. Diverges at x = 1.
pub fn nu_density(theta: f64, x: f64) -> f64 {
    assert!(x > 0.0, "nu_density needs x > 0");
    let c = gamma_real(theta + 1.0).expect("theta+1 > 0") / specfun::PI;
    if x > 0.5 && x <= 1.0 {
        c * (x * (1.0 - x)).powf(-(theta + 1.0))
    } else if x > 1.0 {
        c * sinpi(theta - 0.5) * (x * (x - 1.0)).powf(-(theta + 1.0))
    } else {
        0.0
    }
}

/// First (reflected-gamma) term of the drift. The defining expression
/// Gamma(2-theta) / (2 Gamma(2-2 theta) sin(pi theta)) equals
/// -Gamma(2-theta) Gamma(2 theta-1) cos(pi theta) / pi by the reflection
/// and double-angle formulas, which stays finite through theta = 1 and
/// vanishes identically at theta = 3/2.
pub fn drift_first_term(theta: f64) -> Result<f64> {
    if !(theta > 0.5 && theta <= 1.5) {
        return Err(Error::domain(format!("theta = {theta} outside (1/2, 3/2]")));
    }
    Ok(-gamma_real(2.0 - theta)? * gamma_real(2.0 * theta - 1.0)? * cospi(theta) / specfun::PI)
}

fn drift_a_off_one(theta: f64) -> Result<f64> {
    let t1 = drift_first_term(theta)?;
    let beta = incomplete_beta_continued(0.5, -theta, 2.0 - theta)?;
    let t2 = gamma_real(theta + 1.0)? * beta / specfun::PI;
    Ok(t1 + t2)
}

/// Linear coefficient a of the cell exponent. At theta = 1 the incomplete
/// beta term degenerates (its hypergeometric lower parameter hits 0) and
/// the value is recovered by Richardson extrapolation from theta = 1 +/- h,
/// h in {1e-3, 5e-4}.
pub fn drift_a(theta: f64) -> Result<f64> {
    if !(theta > 0.5 && theta <= 1.5) {
        return Err(Error::domain(format!("theta = {theta} outside (1/2, 3/2]")));
    }
    if (theta - 1.0).abs() > 1e-7 {
        return drift_a_off_one(theta);
    }
    let center = |h: f64| -> Result<f64> {
        Ok(0.5 * (drift_a_off_one(theta + h)? + drift_a_off_one(theta - h)?))
    };
    let a_h = center(1e-3)?;
    let a_h2 = center(5e-4)?;
    // second-order symmetric differences: A(h) = a + c h^2 + O(h^4)
    let extrapolated = (4.0 * a_h2 - a_h) / 3.0;
    if (a_h2 - a_h).abs() > 1e-5 {
        return Err(Error::Convergence(format!(
            "drift extrapolation at theta = {theta} disagrees: A(h) = {a_h}, A(h/2) = {a_h2}"
        )));
    }
    Ok(extrapolated)
}

/// Down-fragment moment integral int_(1/2,1) (1-x)^q nu(dx), via the
/// substitution t = 1-x with the endpoint power absorbed.
pub fn down_fragment_integral(theta: f64, q: f64) -> Result<f64> {
    if q <= theta {
        return Err(Error::domain(format!(
            "down fragment integral needs q > theta (got q = {q})"
        )));
    }
    let c = gamma_real(theta + 1.0)? / specfun::PI;
    let v = quad::integrate_power_absorbed(
        |t| (1.0 - t).powf(-(theta + 1.0)),
        q - theta - 1.0,
        0.5,
        QUAD_TOL,
    )?;
    Ok(c * v)
}

/// Upper beta integral int_1^inf (x-1)^{q-theta-1} x^{-theta-1} dx by
/// quadrature (the closed form is Gamma(q-theta) Gamma(1+2 theta-q) /
/// Gamma(1+theta)).
pub fn beta_integral_quadrature(theta: f64, q: f64) -> Result<f64> {
    let (lo, hi) = (theta, 1.0 + 2.0 * theta);
    if !(q > lo && q < hi) {
        return Err(Error::domain(format!(
            "beta integral needs q in ({lo}, {hi})"
        )));
    }
    // x = 1/u maps onto int_0^1 (1-u)^{q-theta-1} u^{2 theta - q} du;
    // split at 1/2 and absorb each endpoint power
    let head = quad::integrate_power_absorbed(
        |u| (1.0 - u).powf(q - theta - 1.0),
        2.0 * theta - q,
        0.5,
        QUAD_TOL,
    )?;
    let tail = quad::integrate_power_absorbed(
        |w| (1.0 - w).powf(2.0 * theta - q),
        q - theta - 1.0,
        0.5,
        QUAD_TOL,
    )?;
    Ok(head + tail)
}

/// Closed form of the same beta integral.
pub fn beta_integral_closed(theta: f64, q: f64) -> Result<f64> {
    let ratio = gamma_ratio_signed(&[q - theta, 1.0 + 2.0 * theta - q], &[1.0 + theta])?;
    Ok(ratio.value())
}

/// Up-fragment moment integral r int_(1,inf) (x-1)^q nu(dx) in closed
/// form, reduced through the beta integral; the Gamma(theta+1) of the
/// dislocation constant cancels against the beta denominator, leaving
/// r sin(pi (theta-1/2)) Gamma(q-theta) Gamma(1+2 theta-q) / pi.
pub fn up_fragment_integral_closed(params: &GFParams, q: f64) -> Result<f64> {
    check_strip(params, q)?;
    let theta = params.theta;
    Ok(params.r * sinpi(theta - 0.5) * gamma_real(theta + 1.0)? / specfun::PI
        * beta_integral_closed(theta, q)?)
}

/// Lévy-Khintchine integrand of the cell exponent in mass coordinates:
/// x^q - 1 + q(1 - x), with the small-|1-x| cancellation evaluated
/// stably.
fn lk_integrand(q: f64, x: f64) -> f64 {
    let u = x - 1.0;
    if u.abs() < 0.25 {
        // x^q - 1 = expm1(q ln(1+u)); add q(-u) afterwards
        (q * u.ln_1p()).exp_m1() - q * u
    } else {
        x.powf(q) - 1.0 + q * (1.0 - x)
    }
}

/// Cell exponent, route (a): a q plus singularity-aware quadrature of the
/// Lévy-Khintchine integral int (x^q - 1 + q(1-x)) nu(dx). Finite for
/// q < 1 + 2 theta.
pub fn psi_cell(theta: f64, q: f64) -> Result<f64> {
    if !(q < 1.0 + 2.0 * theta) {
        return Err(Error::domain(format!(
            "psi_cell needs q < 1 + 2 theta (got q = {q})"
        )));
    }
    let a = drift_a(theta)?;
    let c = gamma_real(theta + 1.0)? / specfun::PI;
    let s = sinpi(theta - 0.5);
    // down branch: t = 1 - x in (0, 1/2), integrand ~ t^{1-theta}
    let down = quad::integrate_power_absorbed(
        |t| {
            if t == 0.0 {
                return 0.5 * q * (q - 1.0);
            }
            lk_integrand(q, 1.0 - t) / (t * t) * (1.0 - t).powf(-(theta + 1.0))
        },
        1.0 - theta,
        0.5,
        QUAD_TOL,
    )?;
    // up branch near 1: t = x - 1 in (0, 1)
    let up_head = quad::integrate_power_absorbed(
        |t| {
            if t == 0.0 {
                return 0.5 * q * (q - 1.0);
            }
            lk_integrand(q, 1.0 + t) / (t * t) * (1.0 + t).powf(-(theta + 1.0))
        },
        1.0 - theta,
        1.0,
        QUAD_TOL,
    )?;
    // up tail: the integrand decays like x^{q-2 theta-2} when the x^q term
    // dominates and like x^{-2 theta-1} when the linear compensator does
    let decay = (2.0 * theta + 2.0 - q).min(2.0 * theta + 1.0).max(1.01);
    let up_tail = quad::integrate_power_tail(
        |x| lk_integrand(q, x) * (x * (x - 1.0)).powf(-(theta + 1.0)),
        2.0,
        decay,
        QUAD_TOL,
    )?;
    Ok(a * q + c * (down + s * (up_head + up_tail)))
}

/// Cell exponent, route (b): kappa_ref(q) minus the down-fragment
/// integral. Defined on the open strip.
pub fn psi_cell_via_kappa(theta: f64, q: f64) -> Result<f64> {
    Ok(kappa_ref(theta, q)? - down_fragment_integral(theta, q)?)
}

/// Residual of the cumulant decomposition
/// |kappa(q) - psi(q) - int c(x) |1-x|^q nu(dx)| with the upper integral
/// reduced through the beta identity.
pub fn cumulant_identity_residual(params: &GFParams, q: f64) -> Result<f64> {
    check_strip(params, q)?;
    let theta = params.theta;
    let kap = kappa(params, q)?;
    let psi = psi_cell(theta, q)?;
    let down = down_fragment_integral(theta, q)?;
    let up = up_fragment_integral_closed(params, q)?;
    Ok((kap - psi - down - up).abs())
}

/// Which spine the exponent is anchored at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SpineIndex {
    /// omega_minus: conditioned to reach zero continuously.
    Lower,
    /// omega_zero: the killed spine.
    Middle,
    /// omega_plus: conditioned to stay positive.
    Upper,
}

impl GFParams {
    pub fn omega(&self, which: SpineIndex) -> f64 {
        match which {
            SpineIndex::Lower => self.omega_minus,
            SpineIndex::Middle => self.omega_zero,
            SpineIndex::Upper => self.omega_plus,
        }
    }
}

/// Laplace exponent of the spine at the given omega: q -> kappa(omega + q).
pub fn spine_exponent(params: &GFParams, which: SpineIndex, q: f64) -> Result<f64> {
    let omega = params.omega(which);
    let shifted = omega + q;
    // the roots themselves evaluate to an exact zero rather than tripping
    // the pole-proximity guard
    if which != SpineIndex::Middle && q == 0.0 {
        check_strip(params, shifted)?;
        return Ok(0.0);
    }
    kappa(params, shifted)
}

/// The displayed Wiener-Hopf split of the omega_0 spine exponent: a pair
/// of gamma-ratio factors whose product is kappa(q + omega_0). The
/// -2^theta prefactor rides on the first (descending) factor.
pub fn wiener_hopf_factors(params: &GFParams, q: f64) -> Result<(f64, f64)> {
    let (theta, b) = (params.theta, params.b);
    if !(q > -1.0 && q < theta) {
        return Err(Error::domain(format!(
            "Wiener-Hopf factors need q in (-1, {theta})"
        )));
    }
    let down = gamma_ratio_signed(
        &[(theta - q) / 2.0, (1.0 + theta - q) / 2.0],
        &[(2.0 - b - q) / 2.0, (b - q) / 2.0],
    )?;
    let up = gamma_ratio_signed(
        &[(1.0 + q) / 2.0, (2.0 + q) / 2.0],
        &[(2.0 - b + q) / 2.0, (b + q) / 2.0],
    )?;
    Ok((down.scale(-theta.exp2()).value(), up.value()))
}

/// JSON-facing summary of the analytic state at (theta, r).
#[derive(Clone, Debug, Serialize)]
pub struct CumulantReport {
    pub theta: f64,
    pub r: f64,
    pub b: f64,
    pub pf: f64,
    pub omegas: (f64, f64, f64),
}

impl From<&GFParams> for CumulantReport {
    fn from(p: &GFParams) -> Self {
        CumulantReport {
            theta: p.theta,
            r: p.r,
            b: p.b,
            pf: p.pf,
            omegas: p.omegas(),
        }
    }
}

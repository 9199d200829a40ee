//! The ricocheted stable process: at each first passage below zero the
//! path restarts from the negated overshoot with probability pf, else it
//! is sent to the absorbing state 0. Parameter conversions, the closed
//! form Lamperti-Lévy exponent, and pathwise simulation by Bernoulli
//! ricocheted stable segments.

use crate::error::{Error, Result};
use crate::lamperti::{Absorption, PssmpPath};
use crate::specfun::{self, cospi, gamma_ratio_signed};
use crate::stable::{self, simulate_stable_path, StableParams, StablePathConfig};
use rand::Rng;

/// Proximity window for pole detection in exponent evaluation.
pub const POLE_PROXIMITY: f64 = 1e-9;

/// Parameters (theta, rho, pf) together with the equivalent (theta,
/// sigma, b) chart: sigma = 1/2 - theta(1-rho), cos(pi b) = pf cos(pi
/// sigma) with b in [|sigma|, 1/2].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RicochetParams {
    stable: StableParams,
    pf: f64,
    sigma: f64,
    b: f64,
}

impl RicochetParams {
    pub fn theta(&self) -> f64 {
        self.stable.theta()
    }
    pub fn rho(&self) -> f64 {
        self.stable.rho()
    }
    pub fn pf(&self) -> f64 {
        self.pf
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn stable_params(&self) -> &StableParams {
        &self.stable
    }

    /// Inverse chart: recover (theta, rho, pf) from (theta, sigma, b).
    pub fn from_sigma_b(theta: f64, sigma: f64, b: f64) -> Result<Self> {
        check_sigma_b(theta, sigma, b)?;
        let rho = 1.0 - (0.5 - sigma) / theta;
        let pf = cospi(b) / cospi(sigma);
        let stable = StableParams::new(theta, rho)?;
        if !(-1e-12..=1.0 + 1e-12).contains(&pf) {
            return Err(Error::domain(format!(
                "recovered ricochet probability {pf} outside [0, 1]"
            )));
        }
        Ok(RicochetParams {
            stable,
            pf: pf.clamp(0.0, 1.0),
            sigma,
            b,
        })
    }
}

fn check_sigma_b(theta: f64, sigma: f64, b: f64) -> Result<()> {
    let sigma_ok = if theta > 0.0 && theta < 1.0 {
        sigma > 0.5 - theta && sigma < 0.5
    } else if theta == 1.0 {
        sigma == 0.0
    } else if theta > 1.0 && theta < 2.0 {
        sigma > -0.5 && sigma < 1.5 - theta
    } else {
        false
    };
    if !sigma_ok {
        return Err(Error::domain(format!(
            "(theta, sigma) = ({theta}, {sigma}) outside the admissible set"
        )));
    }
    if !(sigma.abs() - 1e-12..=0.5 + 1e-12).contains(&b) {
        return Err(Error::domain(format!(
            "b = {b} must lie in [|sigma|, 1/2] = [{}, 0.5]",
            sigma.abs()
        )));
    }
    Ok(())
}

/// Convert (theta, rho, pf) into the (theta, sigma, b) chart.
pub fn to_sigma_b(theta: f64, rho: f64, pf: f64) -> Result<RicochetParams> {
    let stable = StableParams::new(theta, rho)?;
    if !(0.0..=1.0).contains(&pf) {
        return Err(Error::domain(format!(
            "ricochet probability pf = {pf} outside [0, 1]"
        )));
    }
    let sigma = 0.5 - theta * (1.0 - rho);
    let b = (pf * cospi(sigma)).acos() / specfun::PI;
    check_sigma_b(theta, sigma, b)?;
    Ok(RicochetParams {
        stable,
        pf,
        sigma,
        b,
    })
}

/// Laplace exponent of the Lamperti transform of the ricocheted stable
/// process, for q in the open strip (-1, theta):
///
/// psi(q) = -2^theta
///   * G((theta-q)/2) G((1+theta-q)/2) / (G((b-sigma-q)/2) G((2-sigma-b-q)/2))
///   * G((1+q)/2) G((2+q)/2)          / (G((sigma+b+q)/2) G((2+sigma-b+q)/2))
///
/// computed in signed-log space. Denominator poles produce exact zeros of
/// psi; numerator poles cannot occur strictly inside the strip and are
/// reported as pole errors if approached within the proximity window.
pub fn ricochet_levy_exponent(params: &RicochetParams, q: f64) -> Result<f64> {
    let theta = params.theta();
    if !(q > -1.0 && q < theta) {
        return Err(Error::domain(format!(
            "q = {q} outside the exponent domain (-1, {theta})"
        )));
    }
    let (sigma, b) = (params.sigma, params.b);
    let numer = [
        (theta - q) / 2.0,
        (1.0 + theta - q) / 2.0,
        (1.0 + q) / 2.0,
        (2.0 + q) / 2.0,
    ];
    let denom = [
        (b - sigma - q) / 2.0,
        (2.0 - sigma - b - q) / 2.0,
        (sigma + b + q) / 2.0,
        (2.0 + sigma - b + q) / 2.0,
    ];
    for arg in numer {
        if specfun::distance_to_gamma_pole(arg) < POLE_PROXIMITY {
            return Err(Error::pole(format!(
                "numerator gamma argument {arg} within {POLE_PROXIMITY} of a pole at q = {q}"
            )));
        }
    }
    let ratio = gamma_ratio_signed(&numer, &denom)?;
    Ok(-ratio.scale(theta.exp2()).value())
}

/// Discretization controls for ricochet path simulation. Thresholds and
/// grid steps re-adapt to the spatial scale at the start of every stable
/// segment.
#[derive(Clone, Copy, Debug)]
pub struct RicochetConfig {
    /// Jump threshold as a fraction of the segment start value.
    pub relative_jump_threshold: f64,
    /// Gaussian sub-grid step as a fraction of the segment's natural time
    /// scale (start value)^theta.
    pub relative_grid_dt: f64,
    /// Cap on the number of stable segments.
    pub max_segments: usize,
    /// Cap on explicit jumps within one segment.
    pub max_jumps_per_segment: usize,
    /// Stop (without absorbing) once the path value drops below this level.
    pub stop_below: Option<f64>,
}

impl Default for RicochetConfig {
    fn default() -> Self {
        RicochetConfig {
            relative_jump_threshold: 1e-3,
            relative_grid_dt: 1e-2,
            max_segments: 1_000_000,
            max_jumps_per_segment: 50_000_000,
            stop_below: None,
        }
    }
}

// Each stable segment runs at most this many natural time scales before
// the discretization re-adapts to the current value.
const SEGMENT_NATURAL_TIMES: f64 = 20.0;

/// Concatenation of stable segments: at each first passage below zero the
/// path restarts at the negated overshoot with probability pf (consuming
/// the Bernoulli draw immediately after the overshoot is known), else it
/// is absorbed at 0.
pub fn simulate_ricochet_path<R: Rng + ?Sized>(
    x0: f64,
    params: &RicochetParams,
    horizon: f64,
    config: &RicochetConfig,
    rng: &mut R,
) -> Result<PssmpPath> {
    if !(x0 > 0.0) {
        return Err(Error::domain(format!("x0 = {x0} must be positive")));
    }
    let theta = params.theta();
    let mut path = PssmpPath {
        index: theta,
        initial_value: x0,
        times: vec![0.0],
        values: vec![x0],
        jumps: Vec::new(),
        absorption: Absorption::None,
        ricochet_times: Vec::new(),
    };
    let mut x = x0;
    let mut t_offset = 0.0;

    for segment in 0.. {
        if segment >= config.max_segments {
            return Err(Error::Resource(format!(
                "segment count exceeded cap {}",
                config.max_segments
            )));
        }
        let remaining = horizon - t_offset;
        if remaining <= 0.0 {
            break;
        }
        let natural = x.powf(theta);
        let seg_horizon = remaining.min(SEGMENT_NATURAL_TIMES * natural);
        let seg_config = StablePathConfig {
            jump_threshold: config.relative_jump_threshold * x,
            grid_dt: config.relative_grid_dt * natural,
            max_jumps: config.max_jumps_per_segment,
        };
        let seg = simulate_stable_path(x, params.stable_params(), seg_horizon, &seg_config, rng)?;
        let seg_start_idx = path.values.len();

        // append interior points, skipping the duplicated start and (for a
        // killed segment) the sub-zero crossing value
        let end = if seg.is_killed() {
            seg.times.len() - 1
        } else {
            seg.times.len()
        };
        for i in 1..end {
            path.times.push(t_offset + seg.times[i]);
            path.values.push(seg.values[i]);
        }
        let kill_time = seg.kill_time;
        for j in &seg.jumps {
            if Some(j.time) == kill_time {
                continue; // the crossing jump is replaced by the ricochet or the kill
            }
            path.jumps.push(stable::Jump {
                time: t_offset + j.time,
                size: j.size,
            });
        }

        if let Some(tau) = kill_time {
            let overshoot = seg.overshoot().expect("killed path has an overshoot");
            let t_event = t_offset + tau;
            let pre = *path.values.last().expect("segment recorded points");
            // Bernoulli draw consumed right after the overshoot is known
            let ricochet = rng.random::<f64>() < params.pf;
            if ricochet {
                path.jumps.push(stable::Jump {
                    time: t_event,
                    size: overshoot - pre,
                });
                path.times.push(t_event);
                path.values.push(overshoot);
                path.ricochet_times.push(t_event);
                x = overshoot;
                t_offset = t_event;
            } else {
                path.times.push(t_event);
                path.values.push(0.0);
                path.absorption = Absorption::Killed(t_event);
                break;
            }
        } else {
            // segment exhausted its window; continue from the final value
            x = seg.final_value();
            t_offset += seg.final_time();
        }
        if let Some(level) = config.stop_below {
            if path.values[seg_start_idx..].iter().any(|&v| v < level) {
                break;
            }
        }
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replicate_rng;
    use crate::specfun::gamma_real;
    use crate::stats;

    #[test]
    fn sigma_b_chart_examples() {
        // theta(1-rho) = 1/2 puts sigma at 0
        let p = to_sigma_b(1.25, 1.0 - 0.5 / 1.25, 0.3).unwrap();
        assert!(p.sigma().abs() < 1e-15);
        // pf = 0 forces b = 1/2
        let p = to_sigma_b(0.75, 1.0 / 3.0, 0.0).unwrap();
        assert_eq!(p.b(), 0.5);
        // pf = 1 with sigma = 0 forces b = 0
        let p = to_sigma_b(1.0, 0.5, 1.0).unwrap();
        assert!(p.sigma() == 0.0 && p.b() == 0.0);
    }

    #[test]
    fn chart_round_trip() {
        for &(theta, rho, pf) in &[
            (0.75, 1.0 / 3.0, 0.4),
            (1.25, 0.6, 0.9),
            (1.0, 0.5, 0.25),
            (0.6, 0.8, 1.0),
            (1.5, 2.0 / 3.0 - 1e-3, 0.0),
        ] {
            let p = to_sigma_b(theta, rho, pf).unwrap();
            let q = RicochetParams::from_sigma_b(theta, p.sigma(), p.b()).unwrap();
            assert!((q.rho() - rho).abs() < 1e-12, "rho round trip at {theta}");
            assert!((q.pf() - pf).abs() < 1e-12, "pf round trip at {theta}");
        }
    }

    #[test]
    fn exponent_zero_and_sign_structure() {
        // pf = 1, sigma = 0 (b = 0): conservative, psi(0) = 0 exactly
        let p = to_sigma_b(1.0, 0.5, 1.0).unwrap();
        assert_eq!(ricochet_levy_exponent(&p, 0.0).unwrap(), 0.0);

        // pf = 0 (b = 1/2), sigma = 0: killed at first passage, psi(0) < 0
        let p = to_sigma_b(1.0, 0.5, 0.0).unwrap();
        assert!(ricochet_levy_exponent(&p, 0.0).unwrap() < 0.0);

        // domain endpoints are excluded
        let p = to_sigma_b(1.25, 0.6, 0.5).unwrap();
        assert!(ricochet_levy_exponent(&p, -1.0).is_err());
        assert!(ricochet_levy_exponent(&p, 1.25).is_err());
    }

    #[test]
    fn exponent_matches_direct_gamma_product() {
        let p = to_sigma_b(1.25, 0.55, 0.35).unwrap();
        let (sigma, b, theta) = (p.sigma(), p.b(), p.theta());
        let mut q = -0.9;
        while q < theta {
            let direct = -theta.exp2()
                * gamma_real((theta - q) / 2.0).unwrap()
                * gamma_real((1.0 + theta - q) / 2.0).unwrap()
                * gamma_real((1.0 + q) / 2.0).unwrap()
                * gamma_real((2.0 + q) / 2.0).unwrap()
                / (gamma_real((b - sigma - q) / 2.0).unwrap()
                    * gamma_real((2.0 - sigma - b - q) / 2.0).unwrap()
                    * gamma_real((sigma + b + q) / 2.0).unwrap()
                    * gamma_real((2.0 + sigma - b + q) / 2.0).unwrap());
            let stable_route = ricochet_levy_exponent(&p, q).unwrap();
            assert!(
                (stable_route - direct).abs() <= 1e-11 * direct.abs().max(1.0),
                "mismatch at q = {q}: {stable_route} vs {direct}"
            );
            q += 0.093;
        }
    }

    #[test]
    fn degenerate_pf_zero_is_killed_stable_path() {
        // with a shared stream the pf = 0 path must reproduce the killed
        // stable path bit for bit (up to the explicit absorbing point)
        let params = to_sigma_b(1.25, 0.5, 0.0).unwrap();
        for rep in 0..20 {
            let mut rng_a = replicate_rng(81, rep);
            let mut rng_b = replicate_rng(81, rep);
            let config = RicochetConfig::default();
            let y = simulate_ricochet_path(1.0, &params, 15.0, &config, &mut rng_a).unwrap();

            let natural = 1.0;
            let seg_config = StablePathConfig {
                jump_threshold: config.relative_jump_threshold,
                grid_dt: config.relative_grid_dt * natural,
                max_jumps: config.max_jumps_per_segment,
            };
            let x = simulate_stable_path(
                1.0,
                params.stable_params(),
                15.0_f64.min(SEGMENT_NATURAL_TIMES),
                &seg_config,
                &mut rng_b,
            )
            .unwrap();
            if let Some(tau) = x.kill_time {
                assert_eq!(y.absorption, Absorption::Killed(tau));
                let n = y.times.len();
                assert_eq!(n, x.times.len());
                // identical skeleton before the crossing; the crossing entry
                // itself is the absorbing 0 on the ricochet side
                assert_eq!(&y.times[..n], &x.times[..n]);
                assert_eq!(&y.values[..n - 1], &x.values[..n - 1]);
                assert_eq!(*y.values.last().unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn restart_values_are_positive_overshoots() {
        let params = to_sigma_b(0.75, 0.4, 0.85).unwrap();
        let mut rng = replicate_rng(5, 1);
        let config = RicochetConfig::default();
        let y = simulate_ricochet_path(1.0, &params, 30.0, &config, &mut rng).unwrap();
        assert!(!y.ricochet_times.is_empty());
        for &t in &y.ricochet_times {
            // restart rows share their time with the pre-crossing row, so
            // take the last entry of the block
            let idx = y.times.iter().rposition(|&u| u == t).unwrap();
            assert!(y.values[idx] > 0.0);
            // the restart is the negated overshoot: the jump record at t
            // carries pre + size = restart
            let j = y.jumps.iter().find(|j| j.time == t).unwrap();
            let rel = (y.values[idx - 1] + j.size - y.values[idx]).abs()
                / y.values[idx].max(1e-12);
            assert!(rel < 1e-12);
        }
        for (&t, &v) in y.times.iter().zip(&y.values) {
            if Some(t) != y.absorption.time() {
                assert!(v > 0.0, "positive before absorption");
            }
        }
    }

    #[test]
    fn ricochet_count_is_geometric_at_symmetric_rho() {
        // rho = 1/2: each sign change survives independently with
        // probability pf, so the count before killing is geometric
        let pf = 0.6;
        let params = to_sigma_b(1.0, 0.5, pf).unwrap();
        let n = 4000u32;
        let mut counts = Vec::with_capacity(n as usize);
        let mut stragglers = 0u32;
        for rep in 0..n {
            let mut rng = replicate_rng(300, u64::from(rep));
            let config = RicochetConfig::default();
            let y = simulate_ricochet_path(1.0, &params, 1e9, &config, &mut rng).unwrap();
            if !y.is_absorbed() {
                // passage times are heavy tailed; a handful of paths can
                // outlive any fixed horizon
                stragglers += 1;
                continue;
            }
            counts.push(y.ricochet_times.len() as f64);
        }
        assert!(stragglers < n / 100, "too many unabsorbed paths: {stragglers}");
        let (mean, se) = stats::mean_and_se(&counts);
        let expected = pf / (1.0 - pf);
        assert!(
            (mean - expected).abs() < 3.0 * se,
            "mean ricochet count {mean} vs geometric mean {expected} (se {se})"
        );
        let p0 = counts.iter().filter(|&&c| c == 0.0).count() as f64 / f64::from(n);
        let se0 = (pf * (1.0 - pf) / f64::from(n)).sqrt();
        assert!((p0 - (1.0 - pf)).abs() < 3.0 * se0);
    }

    #[test]
    fn symmetric_case_matches_folded_marginal() {
        // rho = 1/2, pf = 1: the path is |X|; compare the time-t marginal
        // against |x0 + X_t| sampled directly from the increment law
        let params = to_sigma_b(1.0, 0.5, 1.0).unwrap();
        let t = 1.0;
        let x0 = 1.0;
        let n = 6000;
        let mut path_vals = Vec::with_capacity(n);
        let mut direct_vals = Vec::with_capacity(n);
        for rep in 0..n {
            let mut rng = replicate_rng(55, rep as u64);
            let config = RicochetConfig::default();
            let y = simulate_ricochet_path(x0, &params, t, &config, &mut rng).unwrap();
            path_vals.push(y.value_at(t).unwrap_or_else(|| *y.values.last().unwrap()));
            let mut rng2 = replicate_rng(56, rep as u64);
            let inc =
                stable::sample_stable_increment(params.stable_params(), t, &mut rng2).unwrap();
            direct_vals.push((x0 + inc).abs());
        }
        path_vals.sort_by(f64::total_cmp);
        direct_vals.sort_by(f64::total_cmp);
        let p = stats::ks_two_sample_pvalue(&path_vals, &direct_vals);
        assert!(p > 0.01, "KS p-value {p}");
    }

    #[test]
    fn scaling_of_ricochet_paths() {
        // path from c x0 at time t c^theta matches c * (path from x0 at t)
        let params = to_sigma_b(1.0, 0.5, 0.7).unwrap();
        let c = 2.0;
        let t = 0.8;
        let n = 6000;
        let mut small = Vec::new();
        let mut big = Vec::new();
        for rep in 0..n {
            let config = RicochetConfig::default();
            let mut rng = replicate_rng(77, rep);
            let y1 = simulate_ricochet_path(1.0, &params, t, &config, &mut rng).unwrap();
            small.push(c * y1.value_at(t).unwrap_or(0.0));
            let mut rng = replicate_rng(78, rep);
            let y2 =
                simulate_ricochet_path(c, &params, t * c.powf(params.theta()), &config, &mut rng)
                    .unwrap();
            big.push(y2.value_at(t * c.powf(params.theta())).unwrap_or(0.0));
        }
        small.sort_by(f64::total_cmp);
        big.sort_by(f64::total_cmp);
        let p = stats::ks_two_sample_pvalue(&small, &big);
        assert!(p > 0.01, "scaling KS p-value {p}");
    }
}

//! The Lamperti bijection between positive self-similar Markov paths and
//! (possibly killed) Lévy paths, as a numeric transform on sampled
//! skeletons.
//!
//! The clock S(t) = int_0^t Y_u^{-theta} du is accumulated by the
//! trapezoid rule between grid points and never across a jump: at a jump
//! time the right endpoint of the panel is the left limit of the path.

use crate::error::{Error, Result};
use crate::stable::{Jump, LevyPath};
use std::io::{self, Write};

/// How a pssMp path reached the absorbing state 0, if it did.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Absorption {
    /// Still alive at the end of the simulated window.
    None,
    /// Jumped to 0 (a genuine kill event, e.g. a failed ricochet).
    Killed(f64),
    /// Decayed through the mass cutoff; the stored time includes the
    /// deterministic-decay envelope bound on the remaining time below the
    /// cutoff.
    Decayed(f64),
}

impl Absorption {
    pub fn time(&self) -> Option<f64> {
        match self {
            Absorption::None => None,
            Absorption::Killed(t) | Absorption::Decayed(t) => Some(*t),
        }
    }
}

/// Piecewise skeleton of a positive self-similar Markov path.
///
/// Values are strictly positive before absorption; an absorbed path ends
/// with an explicit (time, 0) entry.
#[derive(Clone, Debug)]
pub struct PssmpPath {
    /// Self-similarity index theta.
    pub index: f64,
    pub initial_value: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub jumps: Vec<Jump>,
    pub absorption: Absorption,
    /// Times at which a ricochet restart occurred (empty for other paths).
    pub ricochet_times: Vec<f64>,
}

impl PssmpPath {
    pub fn is_absorbed(&self) -> bool {
        !matches!(self.absorption, Absorption::None)
    }

    pub fn absorption_time(&self) -> Option<f64> {
        self.absorption.time()
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("path has at least its start point")
    }

    /// Latest recorded value at or before time t (cadlag convention).
    pub fn value_at(&self, t: f64) -> Option<f64> {
        if t < 0.0 || t > self.final_time() {
            return None;
        }
        let idx = self.times.partition_point(|&u| u <= t);
        Some(self.values[idx.saturating_sub(1)])
    }

    /// CSV columns: t, value, is_jump, jump_size, is_ricochet.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "t,value,is_jump,jump_size,is_ricochet")?;
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
            let ric = u8::from(self.ricochet_times.binary_search_by(|r| r.total_cmp(&t)).is_ok());
            writeln!(w, "{t},{v},{is_jump},{size},{ric}")?;
        }
        Ok(())
    }
}

/// Deterministic-decay envelope: remaining time to absorption from value v
/// under unit negative log-drift, v^theta / theta.
pub fn decay_envelope(v: f64, theta: f64) -> f64 {
    v.powf(theta) / theta
}

/// Forward Lamperti transform: xi_s = log Y_{T(s)} on the transformed
/// clock. A killed path maps to a killed Lévy path with kill time
/// S(absorption time); a decayed path maps to an unkilled Lévy path cut at
/// the clock value of the cutoff crossing.
pub fn pssmp_to_levy(path: &PssmpPath) -> Result<LevyPath> {
    let theta = path.index;
    let n = path.times.len();
    if n == 0 {
        return Err(Error::domain("empty path"));
    }
    // the trailing (t, 0) entry of an absorbed path is handled separately
    let last_positive = if path.is_absorbed() { n - 1 } else { n };
    if last_positive == 0 {
        return Err(Error::domain("path absorbed at birth has no Lévy image"));
    }
    for &v in &path.values[..last_positive] {
        if !(v > 0.0) {
            return Err(Error::domain(format!(
                "pre-absorption value {v} must be strictly positive"
            )));
        }
    }

    let mut out = LevyPath {
        initial_value: path.values[0].ln(),
        times: Vec::with_capacity(last_positive),
        values: Vec::with_capacity(last_positive),
        jumps: Vec::new(),
        kill_time: None,
    };
    let mut s = 0.0;
    out.times.push(0.0);
    out.values.push(path.values[0].ln());

    let mut jump_idx = 0usize;
    for i in 1..last_positive {
        let dt = path.times[i] - path.times[i - 1];
        let left = path.values[i - 1];
        let mut right = path.values[i];
        let mut jump_size_y = 0.0;
        // A jump belongs to the last entry of an equal-time block: paths
        // may record the left limit and the post-jump value as twin rows.
        let last_of_block =
            i + 1 >= path.times.len() || path.times[i + 1] != path.times[i];
        if last_of_block
            && jump_idx < path.jumps.len()
            && path.jumps[jump_idx].time == path.times[i]
        {
            jump_size_y = path.jumps[jump_idx].size;
            right -= jump_size_y; // left limit at the jump time
            jump_idx += 1;
        }
        if right <= 0.0 && dt > 0.0 {
            return Err(Error::domain(
                "left limit at a jump must be strictly positive",
            ));
        }
        if dt > 0.0 {
            s += 0.5 * dt * (left.powf(-theta) + right.powf(-theta));
        }
        out.times.push(s);
        out.values.push(path.values[i].ln());
        if jump_size_y != 0.0 {
            out.jumps.push(Jump {
                time: s,
                size: (path.values[i] / right.max(f64::MIN_POSITIVE)).ln(),
            });
        }
    }

    if let Absorption::Killed(_) = path.absorption {
        // the kill is a jump to the cemetery; the final panel uses the
        // left limit on both ends
        let t_abs = path.times[n - 1];
        let dt = t_abs - path.times[last_positive - 1];
        let v = path.values[last_positive - 1];
        s += dt * v.powf(-theta);
        out.kill_time = Some(s);
    }
    Ok(out)
}

/// Inverse Lamperti transform: Y_t = x0 exp(xi at the inverse clock), with
/// the physical clock accumulated from x0^theta exp(theta xi). The Lévy
/// path is taken relative to its initial value, so any x0 > 0 yields a
/// path started at x0.
pub fn levy_to_pssmp(levy: &LevyPath, x0: f64, theta: f64) -> Result<PssmpPath> {
    if !(x0 > 0.0) {
        return Err(Error::domain(format!("x0 = {x0} must be positive")));
    }
    let n = levy.times.len();
    if n == 0 {
        return Err(Error::domain("empty Lévy path"));
    }
    let xi0 = levy.values[0];
    let scale = x0.powf(theta);

    let mut out = PssmpPath {
        index: theta,
        initial_value: x0,
        times: Vec::with_capacity(n),
        values: Vec::with_capacity(n),
        jumps: Vec::new(),
        absorption: Absorption::None,
        ricochet_times: Vec::new(),
    };
    out.times.push(0.0);
    out.values.push(x0);

    let mut t = 0.0;
    let mut jump_idx = 0usize;
    for i in 1..n {
        let ds = levy.times[i] - levy.times[i - 1];
        let left = (theta * (levy.values[i - 1] - xi0)).exp();
        let mut right_xi = levy.values[i];
        let mut jump_size_xi = 0.0;
        let last_of_block =
            i + 1 >= levy.times.len() || levy.times[i + 1] != levy.times[i];
        if last_of_block
            && jump_idx < levy.jumps.len()
            && levy.jumps[jump_idx].time == levy.times[i]
        {
            jump_size_xi = levy.jumps[jump_idx].size;
            right_xi -= jump_size_xi;
            jump_idx += 1;
        }
        if ds > 0.0 {
            let right = (theta * (right_xi - xi0)).exp();
            t += 0.5 * ds * scale * (left + right);
        }
        let y = x0 * (levy.values[i] - xi0).exp();
        out.times.push(t);
        out.values.push(y);
        if jump_size_xi != 0.0 {
            let y_pre = x0 * (right_xi - xi0).exp();
            out.jumps.push(Jump {
                time: t,
                size: y - y_pre,
            });
        }
    }

    if let Some(kill_s) = levy.kill_time {
        // kill at the end of the simulated window: map the remaining
        // Lamperti time at the final value
        let ds = kill_s - levy.times[n - 1];
        let last = (theta * (levy.values[n - 1] - xi0)).exp();
        t += ds * scale * last;
        out.times.push(t);
        out.values.push(0.0);
        out.absorption = Absorption::Killed(t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replicate_rng;
    use rand::Rng;

    fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| (x - y).abs() / x.abs().max(y.abs()).max(1e-12))
            .fold(0.0, f64::max)
    }

    #[test]
    fn constant_path_has_identity_clock() {
        let path = PssmpPath {
            index: 1.3,
            initial_value: 1.0,
            times: (0..=10).map(|i| f64::from(i) / 10.0).collect(),
            values: vec![1.0; 11],
            jumps: vec![],
            absorption: Absorption::None,
            ricochet_times: vec![],
        };
        let levy = pssmp_to_levy(&path).unwrap();
        for (&s, (&t, &xi)) in levy.times.iter().zip(path.times.iter().zip(&levy.values)) {
            assert!((s - t).abs() < 1e-15);
            assert!(xi.abs() < 1e-15);
        }
    }

    #[test]
    fn constant_levy_with_kill_maps_to_scaled_window() {
        // xi = 0 killed at s = 1, x0 = 2: Y = 2 on [0, 2^theta), then absorbed
        let theta = 1.4;
        let levy = LevyPath {
            initial_value: 0.0,
            times: vec![0.0, 0.5, 1.0],
            values: vec![0.0, 0.0, 0.0],
            jumps: vec![],
            kill_time: Some(1.0),
        };
        let y = levy_to_pssmp(&levy, 2.0, theta).unwrap();
        let expect_end = 2.0_f64.powf(theta);
        assert_eq!(y.values[0], 2.0);
        assert_eq!(y.absorption, Absorption::Killed(expect_end));
        assert!((y.final_time() - expect_end).abs() < 1e-12);
        assert_eq!(*y.values.last().unwrap(), 0.0);
    }

    #[test]
    fn deterministic_decay_closed_form() {
        // xi_s = -s gives Y_t = x0 (1 - theta t x0^{-theta})^{1/theta},
        // absorbed at x0^theta / theta
        let theta = 0.8;
        let x0 = 1.5;
        let n = 20_000;
        let s_max = 12.0;
        let levy = LevyPath {
            initial_value: 0.0,
            times: (0..=n).map(|i| s_max * f64::from(i) / f64::from(n)).collect(),
            values: (0..=n).map(|i| -s_max * f64::from(i) / f64::from(n)).collect(),
            jumps: vec![],
            kill_time: None,
        };
        let y = levy_to_pssmp(&levy, x0, theta).unwrap();
        let t_abs = x0.powf(theta) / theta;
        for (&t, &v) in y.times.iter().zip(&y.values) {
            let expected = x0 * (1.0 - theta * t * x0.powf(-theta)).max(0.0).powf(1.0 / theta);
            assert!(
                (v - expected).abs() <= 1e-6 * x0,
                "Y({t}) = {v} vs {expected}"
            );
        }
        // the clock saturates at the absorption time
        assert!(y.final_time() < t_abs);
        assert!(t_abs - y.final_time() < 1e-3);

        // forward transform recovers xi_s = -s (relative to xi_0 = ln x0)
        let back = pssmp_to_levy(&y).unwrap();
        for (&s, &xi) in back.times.iter().zip(&back.values) {
            let rel = xi - x0.ln();
            assert!((rel + s).abs() < 1e-6 * s.max(1.0), "xi({s}) = {rel}");
        }
    }

    fn random_levy_path(seed: u64, n_grid: usize, n_jumps: usize) -> LevyPath {
        let mut rng = replicate_rng(seed, 0);
        let mut times: Vec<f64> = (0..n_grid).map(|_| rng.random::<f64>() * 5.0).collect();
        times.push(0.0);
        times.sort_by(f64::total_cmp);
        times.dedup();
        let jump_ats: Vec<usize> = (0..n_jumps)
            .map(|_| 1 + (rng.random::<f64>() * (times.len() - 1) as f64) as usize)
            .collect();
        let mut values = Vec::with_capacity(times.len());
        let mut jumps = Vec::new();
        let mut x = 0.3;
        values.push(x);
        for i in 1..times.len() {
            let dt = times[i] - times[i - 1];
            x += 0.4 * dt * (rng.random::<f64>() - 0.55); // wobble
            if jump_ats.contains(&i) && jumps.last().map_or(true, |j: &Jump| j.time < times[i]) {
                let size = (rng.random::<f64>() - 0.5) * 1.4;
                x += size;
                jumps.push(Jump {
                    time: times[i],
                    size,
                });
            }
            values.push(x);
        }
        LevyPath {
            initial_value: values[0],
            times,
            values,
            jumps,
            kill_time: None,
        }
    }

    #[test]
    fn round_trip_on_random_jump_paths() {
        for seed in 0..5 {
            let levy = random_levy_path(100 + seed, 4000, 120);
            assert!(levy.jumps.len() >= 100);
            let theta = 1.1;
            let x0 = levy.initial_value.exp();
            let y = levy_to_pssmp(&levy, x0, theta).unwrap();
            let back = pssmp_to_levy(&y).unwrap();
            assert_eq!(back.times.len(), levy.times.len());
            // matched times and values to 1e-6 relative
            assert!(max_rel_err(&back.times, &levy.times) < 1e-6);
            let max_val_err = back
                .values
                .iter()
                .zip(&levy.values)
                .map(|(&a, &b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(max_val_err < 1e-9, "xi values disagree by {max_val_err}");

            // and the pssMp values round-trip as well
            let y2 = levy_to_pssmp(&back, x0, theta).unwrap();
            assert!(max_rel_err(&y2.values, &y.values) < 1e-6);
        }
    }

    #[test]
    fn clock_is_strictly_increasing() {
        let levy = random_levy_path(7, 2000, 100);
        let y = levy_to_pssmp(&levy, 1.0, 0.9).unwrap();
        for w in y.times.windows(2) {
            assert!(w[1] > w[0]);
        }
        let back = pssmp_to_levy(&y).unwrap();
        for w in back.times.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn grid_refinement_improves_round_trip() {
        // halving the grid step should reduce the clock round-trip error by
        // at least 2x (first-order convergence of the trapezoid clock)
        let theta = 1.2;
        let err_for = |n: usize| -> f64 {
            let s_max = 2.0;
            let levy = LevyPath {
                initial_value: 0.0,
                times: (0..=n).map(|i| s_max * i as f64 / n as f64).collect(),
                // smooth but curved: xi = sin(2s)
                values: (0..=n)
                    .map(|i| (2.0 * s_max * i as f64 / n as f64).sin())
                    .collect(),
                jumps: vec![],
                kill_time: None,
            };
            let y = levy_to_pssmp(&levy, 1.0, theta).unwrap();
            let back = pssmp_to_levy(&y).unwrap();
            back.times
                .iter()
                .zip(&levy.times)
                .map(|(&a, &b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        let coarse = err_for(200);
        let fine = err_for(400);
        assert!(
            fine <= coarse / 2.0,
            "refinement gave {coarse} -> {fine}, expected at least 2x reduction"
        );
    }

    #[test]
    fn scaling_of_initial_condition() {
        // transforming the same xi with x0 and c x0 relates the paths by
        // the scaling property: Y^{(cx0)}(t) = c * Y^{(x0)}(t c^{-theta})
        let levy = random_levy_path(42, 1500, 80);
        let theta = 0.75;
        let c = 2.5;
        let y1 = levy_to_pssmp(&levy, 1.0, theta).unwrap();
        let y2 = levy_to_pssmp(&levy, c, theta).unwrap();
        for i in 0..y1.times.len() {
            assert!((y2.times[i] - y1.times[i] * c.powf(theta)).abs() < 1e-9 * y2.times[i].max(1.0));
            assert!((y2.values[i] - c * y1.values[i]).abs() < 1e-9 * y2.values[i].abs().max(1e-9));
        }
    }
}

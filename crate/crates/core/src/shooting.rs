//! Shooting-method eigenvalues for the radial equation, independent of the
//! finite-difference matrix path.
//!
//! `u'' = g(r) u` with `g = 2 (V(r) - E) + l(l+1)/r^2` is integrated with
//! Numerov's method (local error `O(h^6)`, global `O(h^4)`). The level is
//! first bracketed by counting the zeros of the outward solution (Sturm
//! oscillation: `k` zeros in `(0, R)` means `k` Dirichlet levels below `E`).
//! The bracket is then refined by matching the outward and inward solutions
//! at the outer classical turning point.

use crate::error::{Error, Result};
use crate::potential::{potential_value, PotentialSpec};

const RESCALE_LIMIT: f64 = 1e150;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingConfig {
    /// Outer radius where `u(r_max) = 0` is imposed.
    pub r_max: f64,
    pub step: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            r_max: 120.0,
            step: 1e-3,
        }
    }
}

struct Integrator {
    h2_12: f64,
    /// `g(r_i)` at `r_i = i h`; index 0 is never used because `u(0) = 0`.
    g_base: Vec<f64>,
    h: f64,
}

impl Integrator {
    fn new(spec: &PotentialSpec, l: u32, cfg: &ShootingConfig) -> Result<Self> {
        if !(cfg.r_max > 0.0 && cfg.step > 0.0 && cfg.step < cfg.r_max) {
            return Err(Error::Domain(format!(
                "invalid shooting grid: r_max = {}, step = {}",
                cfg.r_max, cfg.step
            )));
        }
        let n = (cfg.r_max / cfg.step).round() as usize;
        let h = cfg.r_max / n as f64;
        let lf = f64::from(l);
        let mut g_base = vec![0.0; n + 1];
        for (i, g) in g_base.iter_mut().enumerate().skip(1) {
            let r = i as f64 * h;
            *g = 2.0 * potential_value(spec, r)? + lf * (lf + 1.0) / (r * r);
        }
        Ok(Self {
            h2_12: h * h / 12.0,
            g_base,
            h,
        })
    }

    fn len(&self) -> usize {
        self.g_base.len()
    }

    fn g(&self, i: usize, energy: f64) -> f64 {
        self.g_base[i] - 2.0 * energy
    }

    /// Outward solution on `0..=last` with `u(0) = 0`; returns the values
    /// and the number of sign changes on `(0, r_last)`.
    fn outward(&self, energy: f64, last: usize) -> (Vec<f64>, usize) {
        let mut u = vec![0.0; last + 1];
        u[1] = self.h;
        let mut nodes = 0;
        let mut last_sign = 1.0;
        for i in 1..last {
            let w_prev = if i == 1 {
                0.0
            } else {
                u[i - 1] * (1.0 - self.h2_12 * self.g(i - 1, energy))
            };
            let rhs = 2.0 * u[i] * (1.0 + 5.0 * self.h2_12 * self.g(i, energy)) - w_prev;
            u[i + 1] = rhs / (1.0 - self.h2_12 * self.g(i + 1, energy));
            if u[i + 1].abs() > RESCALE_LIMIT {
                let s = 1.0 / u[i + 1].abs();
                u[..=i + 1].iter_mut().for_each(|v| *v *= s);
            }
            if u[i + 1] != 0.0 {
                let sign = u[i + 1].signum();
                if sign != last_sign {
                    nodes += 1;
                    last_sign = sign;
                }
            }
        }
        (u, nodes)
    }

    /// Inward solution on `first..=n` with `u(r_max) = 0`.
    fn inward(&self, energy: f64, first: usize) -> Vec<f64> {
        let n = self.len() - 1;
        let mut u = vec![0.0; n + 1];
        u[n - 1] = 1e-30;
        for i in (first + 1..n).rev() {
            let w_next = u[i + 1] * (1.0 - self.h2_12 * self.g(i + 1, energy));
            let rhs = 2.0 * u[i] * (1.0 + 5.0 * self.h2_12 * self.g(i, energy)) - w_next;
            u[i - 1] = rhs / (1.0 - self.h2_12 * self.g(i - 1, energy));
            if u[i - 1].abs() > RESCALE_LIMIT {
                let s = 1.0 / u[i - 1].abs();
                u[i - 1..].iter_mut().for_each(|v| *v *= s);
            }
        }
        u
    }

    fn nodes(&self, energy: f64) -> usize {
        self.outward(energy, self.len() - 1).1
    }

    /// Outermost node where the motion is classically allowed.
    fn turning_point(&self, energy: f64) -> Option<usize> {
        let n = self.len() - 1;
        (2..n - 1).rev().find(|&i| self.g(i, energy) < 0.0)
    }

    /// Difference of the logarithmic derivatives (outward minus inward) at
    /// node `m`, both solutions normalized to 1 there.
    fn mismatch(&self, energy: f64, m: usize) -> Option<f64> {
        let (out, _) = self.outward(energy, m + 1);
        let inw = self.inward(energy, m - 1);
        if out[m] == 0.0 || inw[m] == 0.0 {
            return None;
        }
        let d_out = (out[m + 1] - out[m - 1]) / (2.0 * self.h * out[m]);
        let d_in = (inw[m + 1] - inw[m - 1]) / (2.0 * self.h * inw[m]);
        Some(d_out - d_in)
    }
}

/// Energy of level `k` (1-based, counted within angular momentum `l`).
pub fn shooting_eigenvalue(
    spec: &PotentialSpec,
    l: u32,
    k: usize,
    cfg: &ShootingConfig,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::Precondition("level index is 1-based".into()));
    }
    let integrator = Integrator::new(spec, l, cfg)?;

    let mut lo = integrator.g_base[1..]
        .iter()
        .fold(f64::INFINITY, |m, g| m.min(0.5 * g))
        - 1.0;
    let mut hi = 1.0_f64;
    let mut expansions = 0;
    while integrator.nodes(hi) < k {
        hi *= 2.0;
        expansions += 1;
        if expansions > 60 {
            return Err(Error::Convergence {
                index: k,
                reason: "no upper bracket for the shooting level".into(),
            });
        }
    }

    // Coarse bracket by node counting.
    while hi - lo > 1e-7 * hi.abs().max(lo.abs()).max(1e-3) {
        let mid = 0.5 * (lo + hi);
        if integrator.nodes(mid) >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    // Refine on the matching condition.
    let refined = integrator
        .turning_point(0.5 * (lo + hi))
        .and_then(|m| refine_by_matching(&integrator, lo, hi, m));
    if let Some(e) = refined {
        return Ok(e);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if integrator.nodes(mid) >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn refine_by_matching(integrator: &Integrator, mut lo: f64, mut hi: f64, m: usize) -> Option<f64> {
    if m < 2 || m + 2 >= integrator.len() {
        return None;
    }
    let mut f_lo = integrator.mismatch(lo, m)?;
    let f_hi = integrator.mismatch(hi, m)?;
    if f_lo.signum() == f_hi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = integrator.mismatch(mid, m)?;
        if f_mid == 0.0 {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hydrogen_levels() {
        // Coulomb l = 0 is the least favourable case for Numerov at the origin.
        let cfg = ShootingConfig {
            r_max: 80.0,
            step: 5e-4,
        };
        let spec = PotentialSpec::coulomb();
        for k in 1..=3 {
            let e = shooting_eigenvalue(&spec, 0, k, &cfg).unwrap();
            let exact = -0.5 / (k * k) as f64;
            assert!((e - exact).abs() < 1e-6, "k={k}: {e}");
        }
        let e2p = shooting_eigenvalue(&spec, 1, 1, &cfg).unwrap();
        assert!((e2p + 0.125).abs() < 1e-8, "2p: {e2p}");
    }

    #[test]
    fn free_particle_in_box() {
        // Huge beta flattens the truncated potential to the constant -1/beta.
        let spec = PotentialSpec::truncated(1e12, 2.0).unwrap();
        let cfg = ShootingConfig {
            r_max: 10.0,
            step: 1e-3,
        };
        let e = shooting_eigenvalue(&spec, 0, 2, &cfg).unwrap();
        let exact = (2.0 * std::f64::consts::PI / 10.0).powi(2) / 2.0 - 1e-12;
        assert!((e - exact).abs() < 1e-9, "{e} vs {exact}");
    }

    #[test]
    fn rejects_level_zero() {
        let spec = PotentialSpec::coulomb();
        assert!(shooting_eigenvalue(&spec, 0, 0, &ShootingConfig::default()).is_err());
    }
}

//! Closed-form receiver statistics.
//!
//! These functions predict the bound-receptor count at the peak of a
//! released pulse and derive the static minimum-error threshold used as the
//! benchmark detector. They are pure and cheap, so the harness calls them
//! once per scenario.

use std::f64::consts::PI;

use crate::error::{domain, invalid, Result};

/// Geometry, flow and binding constants of the microfluidic channel.
///
/// Lengths in metres, velocity in m/s, diffusion in m²/s, `k_bind` in m³/s
/// and `k_unbind` in 1/s.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    pub h_ch: f64,
    pub w_ch: f64,
    pub l_ch: f64,
    pub u: f64,
    pub x_r: f64,
    pub d0: f64,
    pub k_bind: f64,
    pub k_unbind: f64,
    pub n_r: u32,
    pub l_gr: f64,
    pub w_gr: f64,
}

impl Default for ChannelParams {
    /// Baseline channel. The intrinsic diffusion coefficient is 20 µm²/s.
    fn default() -> Self {
        Self {
            h_ch: 5e-6,
            w_ch: 10e-6,
            l_ch: 200e-6,
            u: 1e-5,
            x_r: 3e-3,
            d0: 2e-11,
            k_bind: 2e-17,
            k_unbind: 1.0,
            n_r: 200,
            l_gr: 5e-6,
            w_gr: 10e-6,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("h_ch", self.h_ch),
            ("w_ch", self.w_ch),
            ("l_ch", self.l_ch),
            ("u", self.u),
            ("x_r", self.x_r),
            ("d0", self.d0),
            ("k_bind", self.k_bind),
            ("k_unbind", self.k_unbind),
            ("l_gr", self.l_gr),
            ("w_gr", self.w_gr),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if self.n_r == 0 {
            return Err(invalid("n_r must be >= 1"));
        }
        if self.w_gr > self.w_ch {
            return Err(invalid(format!(
                "receiver width w_gr = {} exceeds channel width w_ch = {}",
                self.w_gr, self.w_ch
            )));
        }
        Ok(())
    }

    pub fn cross_section(&self) -> f64 {
        self.h_ch * self.w_ch
    }

    /// Dissociation constant `k_unbind / k_bind` in molecules/m³.
    pub fn dissociation_constant(&self) -> f64 {
        self.k_unbind / self.k_bind
    }

    /// Plug-flow arrival time of the pulse peak at the receiver centre.
    pub fn peak_arrival_time(&self) -> Result<f64> {
        if self.u <= 0.0 {
            return Err(domain("peak arrival time undefined for u <= 0"));
        }
        Ok(self.x_r / self.u)
    }
}

/// Per-bit mean and variance of the bound-receptor count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianStats {
    pub mu0: f64,
    pub var0: f64,
    pub mu1: f64,
    pub var1: f64,
}

impl GaussianStats {
    pub fn validate(&self) -> Result<()> {
        if !(self.var0 > 0.0 && self.var1 > 0.0) {
            return Err(domain(format!(
                "variances must be positive (var0 = {}, var1 = {})",
                self.var0, self.var1
            )));
        }
        if !(self.mu1 > self.mu0) || self.mu0 < 0.0 {
            return Err(domain(format!(
                "need 0 <= mu0 < mu1 (mu0 = {}, mu1 = {})",
                self.mu0, self.mu1
            )));
        }
        Ok(())
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.mu0 + self.mu1)
    }
}

/// Interferer-induced binding statistics in receptor counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseStats {
    pub mu_i: f64,
    pub var_i: f64,
}

/// Relative variance gap below which the two-Gaussian threshold collapses to
/// the midpoint.
pub const EQUAL_VARIANCE_EPS: f64 = 1e-9;

/// Peak cross-section-averaged concentration of a pulse of `n_m` molecules
/// at the receiver, `n_m / (A_ch sqrt(4π D t_d))` with `t_d = x_r / u`.
pub fn peak_concentration(n_m: f64, ch: &ChannelParams, d_eff: f64) -> Result<f64> {
    if n_m < 0.0 {
        return Err(domain(format!("molecule count must be >= 0, got {n_m}")));
    }
    if !(d_eff > 0.0) {
        return Err(domain(format!("diffusion coefficient must be > 0, got {d_eff}")));
    }
    let t_d = ch.peak_arrival_time()?;
    Ok(n_m / (ch.cross_section() * (4.0 * PI * d_eff * t_d).sqrt()))
}

/// Single-site occupancy probability at concentration `c_m`.
pub fn binding_probability(c_m: f64, k_d: f64) -> Result<f64> {
    if c_m < 0.0 || !(k_d > 0.0) {
        return Err(domain(format!(
            "binding probability needs c_m >= 0 and k_d > 0 (c_m = {c_m}, k_d = {k_d})"
        )));
    }
    let ratio = c_m / k_d;
    Ok(ratio / (1.0 + ratio))
}

/// Binomial mean and variance of the number of occupied receptors.
pub fn bound_receptor_stats(n_r: u32, p: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!("probability out of range: {p}")));
    }
    let n = f64::from(n_r);
    Ok((n * p, n * p * (1.0 - p)))
}

/// Crossing point of the two weighted-equally Gaussian densities, i.e. the
/// minimum-error static threshold between the bit-'0' and bit-'1' counts.
pub fn optimal_threshold(stats: &GaussianStats) -> Result<f64> {
    stats.validate()?;
    let GaussianStats { mu0, var0, mu1, var1 } = *stats;
    let dvar = var1 - var0;
    if dvar.abs() < EQUAL_VARIANCE_EPS * var0.max(var1) {
        return Ok(stats.midpoint());
    }
    let (s0, s1) = (var0.sqrt(), var1.sqrt());
    let radicand = (mu1 - mu0).powi(2) + 2.0 * dvar * (s1 / s0).ln();
    if radicand < 0.0 {
        return Err(domain(format!("negative discriminant {radicand}")));
    }
    Ok(((var1 * mu0 - var0 * mu1) + s1 * s0 * radicand.sqrt()) / dvar)
}

/// Starting threshold of the adaptive receiver:
/// `n_r ((p0 + p1)/2 + μ_I/σ_I²)`.
pub fn initial_threshold(n_r: u32, p0: f64, p1: f64, noise: &NoiseStats) -> Result<f64> {
    if !(0.0 <= p0 && p0 < p1 && p1 <= 1.0) {
        return Err(domain(format!("need 0 <= p0 < p1 <= 1 (p0 = {p0}, p1 = {p1})")));
    }
    if !(noise.var_i > 0.0) {
        return Err(domain(format!("noise variance must be > 0, got {}", noise.var_i)));
    }
    Ok(f64::from(n_r) * (0.5 * (p0 + p1) + noise.mu_i / noise.var_i))
}

/// Model predictions for one CSK scheme on one channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BitModel {
    pub p0: f64,
    pub p1: f64,
    pub stats: GaussianStats,
}

impl BitModel {
    /// Chains peak concentration, occupancy and binomial moments for the
    /// bit-'0' and bit-'1' release counts.
    pub fn predict(ch: &ChannelParams, n0: f64, n1: f64, d_eff: f64) -> Result<Self> {
        let k_d = ch.dissociation_constant();
        let p0 = binding_probability(peak_concentration(n0, ch, d_eff)?, k_d)?;
        let p1 = binding_probability(peak_concentration(n1, ch, d_eff)?, k_d)?;
        let (mu0, var0) = bound_receptor_stats(ch.n_r, p0)?;
        let (mu1, var1) = bound_receptor_stats(ch.n_r, p1)?;
        Ok(Self {
            p0,
            p1,
            stats: GaussianStats { mu0, var0, mu1, var1 },
        })
    }
}

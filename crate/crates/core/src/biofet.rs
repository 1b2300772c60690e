//! Square-law BioFET transduction and its small-signal linearisation.
//!
//! Detection works on receptor counts; this layer reports what the sensor
//! current would be for a given occupancy.

use crate::error::{domain, invalid, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BioFetParams {
    /// Electron mobility (m²/V·s).
    pub mu_n: f64,
    /// Gate-oxide capacitance per unit area (F/m²).
    pub c_ox: f64,
    pub w: f64,
    pub l: f64,
    pub v_gs_app: f64,
    pub v_th: f64,
    /// Surface-potential shift per bound receptor (V/count).
    pub alpha_psi: f64,
}

impl Default for BioFetParams {
    fn default() -> Self {
        Self {
            mu_n: 0.1,
            c_ox: 1e-2,
            w: 10e-6,
            l: 1e-6,
            v_gs_app: 1.0,
            v_th: 0.5,
            alpha_psi: 1e-4,
        }
    }
}

impl BioFetParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mu_n", self.mu_n), ("c_ox", self.c_ox), ("w", self.w), ("l", self.l)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    fn beta(&self) -> f64 {
        self.mu_n * self.c_ox * self.w / self.l
    }

    fn overdrive(&self, psi0: f64) -> Result<f64> {
        let ov = self.v_gs_app + psi0 - self.v_th;
        if ov < 0.0 {
            return Err(domain(format!("device in cutoff: overdrive {ov} V < 0")));
        }
        Ok(ov)
    }
}

/// Saturation-region drain-source current.
pub fn drain_current(p: &BioFetParams, psi0: f64) -> Result<f64> {
    let ov = p.overdrive(psi0)?;
    Ok(0.5 * p.beta() * ov * ov)
}

/// `dI_DS/dψ₀` at the operating point.
pub fn transconductance(p: &BioFetParams, psi0_op: f64) -> Result<f64> {
    Ok(p.beta() * p.overdrive(psi0_op)?)
}

/// Linear occupancy-to-potential map.
pub fn surface_potential(n_bound: u32, p: &BioFetParams) -> f64 {
    p.alpha_psi * f64::from(n_bound)
}

/// First-order current change `G_m Δψ₀` around `psi0_op`.
pub fn linearized_delta(p: &BioFetParams, psi0_op: f64, delta_psi: f64) -> Result<f64> {
    Ok(transconductance(p, psi0_op)? * delta_psi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_overdrive_gives_zero_current() {
        let p = BioFetParams::default();
        let psi = p.v_th - p.v_gs_app;
        assert_eq!(drain_current(&p, psi).unwrap(), 0.0);
        assert_eq!(transconductance(&p, psi).unwrap(), 0.0);
    }

    #[test]
    fn cutoff_is_a_domain_error() {
        let p = BioFetParams::default();
        assert!(drain_current(&p, -0.6).is_err());
        assert!(transconductance(&p, -0.6).is_err());
    }

    #[test]
    fn square_law() {
        let p = BioFetParams { v_gs_app: 0.5, v_th: 0.0, ..Default::default() };
        let i1 = drain_current(&p, 0.0).unwrap();
        let i2 = drain_current(&p, 0.5).unwrap();
        assert!((i2 / i1 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn pinned_current_and_transconductance() {
        // 0.5 * 0.1 * 1e-2 * 10 * 0.52^2 and 0.1 * 1e-2 * 10 * 0.52.
        let p = BioFetParams::default();
        assert!((drain_current(&p, 0.02).unwrap() - 1.352e-3).abs() < 1e-15);
        assert!((transconductance(&p, 0.02).unwrap() - 5.2e-3).abs() < 1e-15);
    }

    #[test]
    fn transconductance_matches_central_difference() {
        let p = BioFetParams::default();
        for psi in [0.0, 0.01, 0.05, 0.2] {
            let h = 1e-6;
            let fd = (drain_current(&p, psi + h).unwrap() - drain_current(&p, psi - h).unwrap()) / (2.0 * h);
            let gm = transconductance(&p, psi).unwrap();
            assert!(((fd - gm) / gm).abs() < 1e-6, "psi {psi}: {fd} vs {gm}");
        }
    }

    #[test]
    fn linearisation_error_is_first_order_small_and_quadratic() {
        let p = BioFetParams::default();
        let op = 0.02;
        let ov = p.v_gs_app + op - p.v_th;
        let remainder = |d: f64| {
            let exact = drain_current(&p, op + d).unwrap() - drain_current(&p, op).unwrap();
            (exact, (exact - linearized_delta(&p, op, d).unwrap()).abs())
        };
        for d in [1e-3, 1e-2, 5e-2] {
            let (exact, r) = remainder(d);
            assert!(r / exact.abs() <= d / ov, "delta {d}");
        }
        let (_, r1) = remainder(1e-2);
        let (_, r2) = remainder(5e-3);
        assert!((r1 / r2 - 4.0).abs() < 0.2);
    }

    #[test]
    fn surface_potential_is_linear() {
        let p = BioFetParams::default();
        assert_eq!(surface_potential(0, &p), 0.0);
        assert!((surface_potential(40, &p) - 2.0 * surface_potential(20, &p)).abs() < 1e-18);
        assert!(surface_potential(21, &p) > surface_potential(20, &p));
    }
}

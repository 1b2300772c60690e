//! Bitstreams, concentration-shift keying and error counting.

use rand::Rng;

use crate::error::{invalid, Error, Result};

/// Molecule counts released for each bit value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CskScheme {
    pub n1: u32,
    pub n0: u32,
}

impl Default for CskScheme {
    fn default() -> Self {
        Self { n1: 1000, n0: 600 }
    }
}

impl CskScheme {
    pub fn new(n1: u32, n0: u32) -> Result<Self> {
        let s = Self { n1, n0 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1 <= self.n0 {
            return Err(invalid(format!("need n1 > n0 (n1 = {}, n0 = {})", self.n1, self.n0)));
        }
        Ok(())
    }
}

/// `n` fair bits.
pub fn generate_bitstream<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<u8> {
    (0..n).map(|_| u8::from(rng.random::<bool>())).collect()
}

pub fn modulate(bit: u8, scheme: &CskScheme) -> u32 {
    if bit != 0 {
        scheme.n1
    } else {
        scheme.n0
    }
}

/// Ties decode as '1'.
pub fn detect(y: f64, theta: f64) -> u8 {
    u8::from(y >= theta)
}

pub fn bit_error_rate(tx: &[u8], rx: &[u8]) -> Result<f64> {
    if tx.len() != rx.len() {
        return Err(Error::LengthMismatch {
            left: tx.len(),
            right: rx.len(),
        });
    }
    if tx.is_empty() {
        return Err(invalid("bit error rate of an empty stream"));
    }
    let errors = tx.iter().zip(rx).filter(|(a, b)| a != b).count();
    Ok(errors as f64 / tx.len() as f64)
}

/// Outcome of one detector on one seeded realization.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub detector: String,
    pub seed: u64,
    pub tx_bits: Vec<u8>,
    pub rx_bits: Vec<u8>,
    pub ber: f64,
    /// Threshold each symbol was decided against.
    pub threshold_trace: Vec<f64>,
    pub y_trace: Vec<f64>,
}

/// Mean BER over runs.
pub fn bep(results: &[RunResult]) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::EmptyResults("no runs to aggregate"));
    }
    Ok(results.iter().map(|r| r.ber).sum::<f64>() / results.len() as f64)
}

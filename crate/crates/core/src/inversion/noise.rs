use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// One instrument range: full scale `limit` (V) with its two noise levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseRange {
    pub limit: f64,
    /// Relative (gain) error.
    pub eta1: f64,
    /// Offset error relative to the full scale.
    pub eta2: f64,
}

/// Bounded uniform noise `M(1+η₁ξ₁) + η₂ξ₂L` with automatic range selection.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    ranges: Vec<NoiseRange>,
}

/// Simulated reading together with the range that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub noiseless: f64,
    pub value: f64,
    pub range: NoiseRange,
}

impl Measurement {
    /// Largest noiseless value compatible with the reading,
    /// `(M̃ + η₂L)/(1 − η₁)`.
    pub fn upper_estimate(&self) -> f64 {
        let NoiseRange { limit, eta1, eta2 } = self.range;
        let offset = if eta2 == 0.0 { 0.0 } else { eta2 * limit };
        (self.value + offset) / (1.0 - eta1)
    }
}

/// Ranges of a 2002-class multimeter in its three lowest DC voltage settings.
pub const KEITHLEY_2002: [NoiseRange; 3] = [
    NoiseRange { limit: 0.2, eta1: 3.5e-6, eta2: 3.0e-6 },
    NoiseRange { limit: 2.0, eta1: 1.2e-6, eta2: 0.3e-6 },
    NoiseRange { limit: 20.0, eta1: 1.2e-6, eta2: 0.1e-6 },
];

impl NoiseModel {
    pub fn new(mut ranges: Vec<NoiseRange>) -> Result<Self> {
        if ranges.is_empty() {
            return Err(invalid("at least one range is required"));
        }
        for r in &ranges {
            if !(r.limit > 0.0) || r.limit.is_nan() {
                return Err(invalid(format!("range limit must be positive, got {}", r.limit)));
            }
            if !(0.0..1.0).contains(&r.eta1) {
                return Err(invalid(format!("eta1 must lie in [0, 1), got {}", r.eta1)));
            }
            if !(r.eta2 >= 0.0 && r.eta2.is_finite()) {
                return Err(invalid(format!("eta2 must be nonnegative, got {}", r.eta2)));
            }
            if r.eta2 > 0.0 && r.limit.is_infinite() {
                return Err(invalid("an unbounded range cannot carry offset noise"));
            }
        }
        ranges.sort_by(|a, b| a.limit.total_cmp(&b.limit));
        Ok(Self { ranges })
    }

    /// Exact readings.
    pub fn noiseless() -> Self {
        Self { ranges: vec![NoiseRange { limit: f64::INFINITY, eta1: 0.0, eta2: 0.0 }] }
    }

    pub fn keithley_2002() -> Self {
        Self { ranges: KEITHLEY_2002.to_vec() }
    }

    /// Named instrument preset.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "keithley-2002" => Ok(Self::keithley_2002()),
            "noiseless" | "none" => Ok(Self::noiseless()),
            _ => Err(invalid(format!("unknown noise preset `{name}`"))),
        }
    }

    pub fn ranges(&self) -> &[NoiseRange] {
        &self.ranges
    }

    pub fn is_noiseless(&self) -> bool {
        self.ranges.iter().all(|r| r.eta1 == 0.0 && r.eta2 == 0.0)
    }

    /// Smallest range with `|value| ≤ L`.
    pub fn select_range(&self, value: f64) -> Result<NoiseRange> {
        let largest = self.ranges.last().expect("nonempty").limit;
        self.ranges
            .iter()
            .find(|r| value.abs() <= r.limit)
            .copied()
            .ok_or(Error::RangeOverflow { value, largest })
    }

    /// Noisy reading of `value`; the draw depends only on `seed` and `key`.
    pub fn apply(&self, value: f64, seed: u64, key: (usize, usize, usize)) -> Result<Measurement> {
        if !value.is_finite() {
            return Err(Error::NumericalFailure(format!("non-finite reading {value}")));
        }
        let range = self.select_range(value)?;
        if range.eta1 == 0.0 && range.eta2 == 0.0 {
            return Ok(Measurement { noiseless: value, value, range });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id(key));
        let xi1: f64 = rng.random_range(-1.0..=1.0);
        let xi2: f64 = rng.random_range(-1.0..=1.0);
        Ok(Measurement { noiseless: value, value: value * (1.0 + range.eta1 * xi1) + range.eta2 * xi2 * range.limit, range })
    }
}

fn stream_id((i, j, k): (usize, usize, usize)) -> u64 {
    ((i as u64) << 40) | ((j as u64 & 0xF_FFFF) << 20) | (k as u64 & 0xF_FFFF)
}

use std::path::Path;

use crate::error::{invalid, Error, Result};

/// Sampled law with a shape-preserving (Fritsch–Carlson) cubic Hermite
/// interpolant, held constant outside the sampled range.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedLaw {
    s: Vec<f64>,
    gamma: Vec<f64>,
    slopes: Vec<f64>,
}

impl TabulatedLaw {
    pub fn new(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(invalid("a tabulated law needs at least two samples"));
        }
        for (k, &(s, g)) in samples.iter().enumerate() {
            if !s.is_finite() || !g.is_finite() {
                return Err(invalid(format!("sample {k} is not finite")));
            }
            if s < 0.0 {
                return Err(invalid(format!("sample {k} has negative abscissa {s}")));
            }
            if g <= 0.0 {
                return Err(invalid(format!("sample {k} has non-positive value {g}")));
            }
            if k > 0 && s <= samples[k - 1].0 {
                return Err(invalid(format!("abscissae must be strictly increasing (sample {k})")));
            }
        }
        let s: Vec<f64> = samples.iter().map(|p| p.0).collect();
        let gamma: Vec<f64> = samples.iter().map(|p| p.1).collect();
        let slopes = pchip_slopes(&s, &gamma);
        Ok(Self { s, gamma, slopes })
    }

    /// Reads two comma-separated columns `s,gamma`; a non-numeric first line is
    /// treated as a header. Blank lines and `#` comments are skipped.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse_csv(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut samples = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed = match cols.as_slice() {
                [a, b] => a.parse::<f64>().ok().zip(b.parse::<f64>().ok()),
                _ => None,
            };
            match parsed {
                Some(p) => samples.push(p),
                None if samples.is_empty() && lineno == 0 => continue,
                None => return Err(Error::Parse(format!("line {}: expected two numbers", lineno + 1))),
            }
        }
        Self::new(&samples)
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.s.iter().copied().zip(self.gamma.iter().copied())
    }

    pub fn knots(&self) -> &[f64] {
        &self.s
    }

    fn interval(&self, s: f64) -> usize {
        self.s.partition_point(|&x| x <= s).saturating_sub(1).min(self.s.len() - 2)
    }

    /// Value and derivative at `s`.
    pub fn eval(&self, s: f64) -> (f64, f64) {
        let n = self.s.len();
        if s <= self.s[0] {
            return (self.gamma[0], 0.0);
        }
        if s >= self.s[n - 1] {
            return (self.gamma[n - 1], 0.0);
        }
        let k = self.interval(s);
        let h = self.s[k + 1] - self.s[k];
        let t = (s - self.s[k]) / h;
        let (y0, y1) = (self.gamma[k], self.gamma[k + 1]);
        let (d0, d1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let value = h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1;
        let dh00 = 6.0 * t2 - 6.0 * t;
        let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
        let dh01 = -dh00;
        let dh11 = 3.0 * t2 - 2.0 * t;
        let slope = (dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1) / h;
        (value, slope)
    }

    /// `∫₀^s γ(η)η dη`, exact: each Hermite piece times η is a quartic.
    pub fn energy_density(&self, s: f64) -> f64 {
        const NODES: [f64; 3] = [-0.774596669241483377035853079956, 0.0, 0.774596669241483377035853079956];
        const WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        let first = self.s[0];
        let mut q = 0.5 * self.gamma[0] * first.min(s).powi(2);
        if s <= first {
            return q;
        }
        for k in 0..self.s.len() - 1 {
            let a = self.s[k];
            if a >= s {
                break;
            }
            let b = self.s[k + 1].min(s);
            let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
            q += h * NODES
                .iter()
                .zip(WEIGHTS)
                .map(|(x, w)| {
                    let eta = c + h * x;
                    w * self.eval(eta).0 * eta
                })
                .sum::<f64>();
        }
        let last = *self.s.last().unwrap();
        if s > last {
            q += 0.5 * self.gamma[self.gamma.len() - 1] * (s * s - last * last);
        }
        q
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        let (a, b) = (delta[k - 1], delta[k]);
        if a * b > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / a + w2 / b);
        }
    }
    d[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn edge_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() || m0 == 0.0 {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

use std::path::Path;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// A time-dependent decay rate `γ(t)` and its antiderivative `Γ(t) = ∫₀ᵗ γ`.
#[derive(Debug, Clone, PartialEq)]
pub enum RateFunction {
    /// `γ(t) = a`
    Constant { amplitude: f64 },
    /// `γ(t) = a sin(ωt)`
    Sinusoid { amplitude: f64, frequency: f64 },
    /// `γ(t) = a e^{-bt} cos(ωt)`
    DampedCosine { amplitude: f64, damping: f64, frequency: f64 },
    /// Linear interpolation through `(t, γ)` samples.
    Tabulated(RateTable),
}

impl RateFunction {
    pub fn zero() -> Self {
        RateFunction::Constant { amplitude: 0.0 }
    }

    pub fn constant(amplitude: f64) -> Self {
        RateFunction::Constant { amplitude }
    }

    pub fn sinusoid(amplitude: f64, frequency: f64) -> Self {
        RateFunction::Sinusoid { amplitude, frequency }
    }

    pub fn damped_cosine(amplitude: f64, damping: f64, frequency: f64) -> Self {
        RateFunction::DampedCosine { amplitude, damping, frequency }
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(match self {
            RateFunction::Constant { amplitude } => *amplitude,
            RateFunction::Sinusoid { amplitude, frequency } => amplitude * (frequency * t).sin(),
            RateFunction::DampedCosine { amplitude, damping, frequency } => {
                amplitude * (-damping * t).exp() * (frequency * t).cos()
            }
            RateFunction::Tabulated(table) => table.value(t)?,
        })
    }

    /// `Γ(t) = ∫₀ᵗ γ(τ) dτ`
    pub fn integral(&self, t: f64) -> Result<f64> {
        gamma_integral(self, t)
    }

    /// Largest `|γ|`-scale parameter, used to pick default horizons.
    pub fn scale(&self) -> f64 {
        match self {
            RateFunction::Constant { amplitude }
            | RateFunction::Sinusoid { amplitude, .. }
            | RateFunction::DampedCosine { amplitude, .. } => amplitude.abs(),
            RateFunction::Tabulated(table) => table.rates.iter().fold(0.0, |m, r| m.max(r.abs())),
        }
    }

    /// Latest time at which the rate can be evaluated.
    pub fn horizon(&self) -> f64 {
        match self {
            RateFunction::Tabulated(table) => table.end(),
            _ => f64::INFINITY,
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeTime(t));
    }
    Ok(())
}

pub fn gamma_integral(rate: &RateFunction, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(match rate {
        RateFunction::Constant { amplitude } => amplitude * t,
        RateFunction::Sinusoid { amplitude, frequency } => {
            if *frequency == 0.0 {
                0.0
            } else {
                amplitude * (1.0 - (frequency * t).cos()) / frequency
            }
        }
        RateFunction::DampedCosine { amplitude, damping, frequency } => {
            // Re ∫₀ᵗ e^{(-b + iω)τ} dτ
            let k = C64::new(-damping, *frequency);
            if k.norm() == 0.0 {
                amplitude * t
            } else {
                amplitude * (((k * t).exp() - 1.0) / k).re
            }
        }
        RateFunction::Tabulated(table) => table.integral(t)?,
    })
}

/// Rate samples on a strictly increasing time grid starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    times: Vec<f64>,
    rates: Vec<f64>,
    /// Γ at each sample time.
    cumulative: Vec<f64>,
}

impl RateTable {
    pub fn new(times: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        if times.len() != rates.len() {
            return Err(Error::InvalidRate(format!(
                "{} times but {} rates",
                times.len(),
                rates.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::InvalidRate("a rate table needs at least two samples".into()));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidRate(format!("table must start at t = 0, starts at {}", times[0])));
        }
        if let Some(w) = times.windows(2).find(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
            return Err(Error::InvalidRate(format!(
                "sample times must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if rates.iter().chain(&times).any(|x| !x.is_finite()) {
            return Err(Error::InvalidRate("table contains non-finite values".into()));
        }
        let mut cumulative = Vec::with_capacity(times.len());
        cumulative.push(0.0);
        for k in 1..times.len() {
            let seg = simpson(|x| lerp(&times, &rates, k - 1, x), times[k - 1], times[k]);
            cumulative.push(cumulative[k - 1] + seg);
        }
        Ok(Self { times, rates, cumulative })
    }

    /// Reads a two-column `t,gamma` CSV; a non-numeric first row is taken as a header.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| Error::InvalidRate(format!("{}: {e}", path.display())))?;
        let mut times = Vec::new();
        let mut rates = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::InvalidRate(format!("{}: {e}", path.display())))?;
            if record.len() != 2 {
                return Err(Error::InvalidRate(format!(
                    "{}: row {} has {} columns, expected 2",
                    path.display(),
                    i + 1,
                    record.len()
                )));
            }
            let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
            match parsed {
                Ok(v) => {
                    times.push(v[0]);
                    rates.push(v[1]);
                }
                Err(_) if i == 0 => continue,
                Err(e) => {
                    return Err(Error::InvalidRate(format!("{}: row {}: {e}", path.display(), i + 1)))
                }
            }
        }
        Self::new(times, rates)
    }

    pub fn end(&self) -> f64 {
        *self.times.last().expect("non-empty table")
    }

    fn segment(&self, t: f64) -> Result<usize> {
        if t > self.end() {
            return Err(Error::OutsideTable { t, end: self.end() });
        }
        // index k with times[k] <= t < times[k+1], clamped to the last segment
        let k = self.times.partition_point(|&x| x <= t).saturating_sub(1);
        Ok(k.min(self.times.len() - 2))
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        let k = self.segment(t)?;
        Ok(lerp(&self.times, &self.rates, k, t))
    }

    /// Γ(t) from the knot-wise cumulative sum plus a composite Simpson
    /// panel on the partial segment.
    pub fn integral(&self, t: f64) -> Result<f64> {
        let k = self.segment(t)?;
        let partial = simpson(|x| lerp(&self.times, &self.rates, k, x), self.times[k], t);
        Ok(self.cumulative[k] + partial)
    }
}

fn lerp(times: &[f64], rates: &[f64], k: usize, x: f64) -> f64 {
    let (t0, t1) = (times[k], times[k + 1]);
    let w = (x - t0) / (t1 - t0);
    rates[k] * (1.0 - w) + rates[k + 1] * w
}

/// Composite Simpson's rule, refined until successive estimates agree to 1e-10 relative.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let rule = |n: usize| {
        let h = (b - a) / n as f64;
        let mut sum = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * f(a + i as f64 * h);
        }
        sum * h / 3.0
    };
    let mut n = 2;
    let mut prev = rule(n);
    loop {
        n *= 2;
        let next = rule(n);
        if (next - prev).abs() <= 1e-10 * next.abs().max(1e-300) || n >= 1 << 16 {
            return next;
        }
        prev = next;
    }
}

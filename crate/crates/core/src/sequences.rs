//! Positive scalar sequences evaluated in the log domain, and a numerical
//! series prober.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeqError {
    #[error("index {n} out of range (sequence has {len} stored values)")]
    OutOfRange { n: usize, len: usize },
    #[error("index must be at least 1")]
    ZeroIndex,
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

/// A strictly positive sequence `n ↦ s_n`, `n ≥ 1`, stored by kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ScalarSequence {
    /// `scale · ratio^n`
    #[serde(rename = "geometric")]
    Geometric {
        ratio: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `scale · n^exponent`
    #[serde(rename = "power")]
    Power {
        exponent: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `c / ((n+1)·sqrt(n²+1))`
    #[serde(rename = "dyukarev_d")]
    DyukarevD {
        #[serde(default = "one")]
        c: f64,
    },
    /// `base^(−n^exponent)`
    #[serde(rename = "superexp")]
    Superexp { base: f64, exponent: f64 },
    /// stored natural logs, `log_values[n−1]`
    #[serde(rename = "explicit")]
    Explicit { log_values: Vec<f64> },
    /// `c1 / ((1+r)^(2(n−1)) · n^exponent)`
    #[serde(rename = "product-weighted")]
    ProductWeighted {
        r: f64,
        #[serde(default = "one")]
        c1: f64,
        #[serde(default = "two")]
        exponent: f64,
    },
    /// termwise product of the factors
    #[serde(rename = "product")]
    Product { factors: Vec<ScalarSequence> },
}

fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}

impl ScalarSequence {
    pub fn geometric(ratio: f64) -> Self {
        ScalarSequence::Geometric { ratio, scale: 1.0 }
    }

    pub fn power(exponent: f64) -> Self {
        ScalarSequence::Power { exponent, scale: 1.0 }
    }

    pub fn constant(v: f64) -> Self {
        ScalarSequence::Power { exponent: 0.0, scale: v }
    }

    pub fn validate(&self) -> Result<(), SeqError> {
        let pos = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(SeqError::Invalid(format!("{name} must be positive and finite, got {x}")))
            }
        };
        match self {
            ScalarSequence::Geometric { ratio, scale } => {
                pos("ratio", *ratio)?;
                pos("scale", *scale)
            }
            ScalarSequence::Power { exponent, scale } => {
                if !exponent.is_finite() {
                    return Err(SeqError::Invalid("exponent must be finite".into()));
                }
                pos("scale", *scale)
            }
            ScalarSequence::DyukarevD { c } => pos("c", *c),
            ScalarSequence::Superexp { base, exponent } => {
                pos("base", *base)?;
                pos("exponent", *exponent)
            }
            ScalarSequence::Explicit { log_values } => {
                if log_values.iter().all(|v| v.is_finite()) {
                    Ok(())
                } else {
                    Err(SeqError::Invalid("explicit log_values must be finite".into()))
                }
            }
            ScalarSequence::ProductWeighted { r, c1, exponent } => {
                if !(*r > -1.0 && r.is_finite() && exponent.is_finite()) {
                    return Err(SeqError::Invalid("product-weighted needs r > -1 and finite exponent".into()));
                }
                pos("c1", *c1)
            }
            ScalarSequence::Product { factors } => factors.iter().try_for_each(|f| f.validate()),
        }
    }

    /// Natural log of the n-th term.
    pub fn eval_log(&self, n: usize) -> Result<f64, SeqError> {
        if n == 0 {
            return Err(SeqError::ZeroIndex);
        }
        let x = n as f64;
        Ok(match self {
            ScalarSequence::Geometric { ratio, scale } => scale.ln() + x * ratio.ln(),
            ScalarSequence::Power { exponent, scale } => scale.ln() + exponent * x.ln(),
            ScalarSequence::DyukarevD { c } => c.ln() - (x + 1.0).ln() - 0.5 * (x * x).ln_1p(),
            ScalarSequence::Superexp { base, exponent } => -x.powf(*exponent) * base.ln(),
            ScalarSequence::Explicit { log_values } => *log_values
                .get(n - 1)
                .ok_or(SeqError::OutOfRange { n, len: log_values.len() })?,
            ScalarSequence::ProductWeighted { r, c1, exponent } => {
                c1.ln() - 2.0 * (x - 1.0) * r.ln_1p() - exponent * x.ln()
            }
            ScalarSequence::Product { factors } => {
                let mut s = 0.0;
                for f in factors {
                    s += f.eval_log(n)?;
                }
                s
            }
        })
    }

    pub fn eval(&self, n: usize) -> Result<f64, SeqError> {
        self.eval_log(n).map(f64::exp)
    }

    /// `x_n = d_1 + … + d_n` with `x_0 = 0`.
    pub fn position(&self, n: usize) -> Result<f64, SeqError> {
        let mut s = CompensatedSum::default();
        for k in 1..=n {
            s.add(self.eval(k)?);
        }
        Ok(s.value())
    }
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `log(e^a + e^b)`
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `log(1 + e^x)`
pub fn softplus(x: f64) -> f64 {
    if x > 35.0 {
        x + (-x).exp()
    } else {
        x.exp().ln_1p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesState {
    ConvergedNumerically,
    DivergingNumerically,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesVerdict {
    pub state: SeriesState,
    pub partial_sum: f64,
    pub n_used: usize,
    /// fitted slope of `log t_n` against `log n` over the last window
    pub growth_exponent_estimate: f64,
    /// power-law estimate of the remainder after `n_used` terms
    pub tail_estimate: f64,
}

impl SeriesVerdict {
    pub fn converged(&self) -> bool {
        self.state == SeriesState::ConvergedNumerically
    }

    pub fn diverging(&self) -> bool {
        self.state == SeriesState::DivergingNumerically
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// minimum number of terms before any verdict other than a ceiling hit
    pub n_min: usize,
    pub n_max: usize,
    pub window: usize,
    pub ceiling: f64,
    pub epsilon: f64,
    /// decay exponent required before convergence is considered
    pub q_converge: f64,
    /// relative remainder bound for convergence
    pub tol: f64,
    /// relative remainder bound for stopping early
    pub early_exit: f64,
    /// index of the first term of the stream
    pub start_index: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            n_min: 1000,
            n_max: 10_000_000,
            window: 1000,
            ceiling: 1e12,
            epsilon: 1e-3,
            q_converge: 1.05,
            tol: 1e-6,
            early_exit: 1e-15,
            start_index: 1,
        }
    }
}

impl ProbeConfig {
    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn starting_at(mut self, start_index: usize) -> Self {
        self.start_index = start_index;
        self
    }
}

struct Window {
    cap: usize,
    buf: VecDeque<(f64, f64)>,
}

struct Fit {
    slope: f64,
    recent_max: f64,
    all_zero: bool,
}

impl Window {
    fn push(&mut self, ln_n: f64, log_t: f64) {
        if self.buf.len() == self.cap {
            self.buf.pop_front();
        }
        self.buf.push_back((ln_n, log_t));
    }

    fn fit(&self) -> Fit {
        let pts: Vec<(f64, f64)> = self.buf.iter().copied().filter(|p| p.1.is_finite()).collect();
        let tail = (self.buf.len() / 10).max(1);
        let recent_max = self.buf.iter().rev().take(tail).fold(f64::NEG_INFINITY, |m, p| m.max(p.1));
        if pts.len() < 2 {
            return Fit { slope: f64::NEG_INFINITY, recent_max, all_zero: pts.is_empty() };
        }
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for &(x, y) in &pts {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
        }
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        Fit { slope, recent_max, all_zero: false }
    }
}

/// Sums `exp(log_t)` over the stream and classifies the series.
///
/// Diverging: the fitted decay exponent `q = −slope` is at most `1 + ε`, or a
/// term or the running sum passes the ceiling. Converged: `q ≥ q_converge`
/// and the remainder estimate `t·n/(q−1)` is below `tol·max(1, |S|)`.
pub fn series_probe<I>(terms: I, cfg: &ProbeConfig) -> SeriesVerdict
where
    I: IntoIterator<Item = f64>,
{
    let mut sum = CompensatedSum::default();
    let mut win = Window { cap: cfg.window.max(2), buf: VecDeque::with_capacity(cfg.window.max(2)) };
    let check_every = (cfg.window / 4).max(1);
    let ln_ceiling = cfg.ceiling.ln();
    let mut used = 0usize;
    let verdict = |state, sum: &CompensatedSum, used, slope: f64, tail| SeriesVerdict {
        state,
        partial_sum: sum.value(),
        n_used: used,
        growth_exponent_estimate: slope,
        tail_estimate: tail,
    };
    let classify = |fit: &Fit, n: f64, s: f64| -> (SeriesState, f64) {
        if fit.all_zero {
            return (SeriesState::ConvergedNumerically, 0.0);
        }
        let q = -fit.slope;
        if q <= 1.0 + cfg.epsilon {
            return (SeriesState::DivergingNumerically, f64::INFINITY);
        }
        let tail = fit.recent_max.exp() * n / (q - 1.0);
        if q >= cfg.q_converge && tail <= cfg.tol * s.abs().max(1.0) {
            (SeriesState::ConvergedNumerically, tail)
        } else {
            (SeriesState::Inconclusive, tail)
        }
    };
    for log_t in terms.into_iter().take(cfg.n_max) {
        let n = cfg.start_index + used;
        used += 1;
        if log_t.is_nan() {
            return verdict(SeriesState::Inconclusive, &sum, used, f64::NAN, f64::NAN);
        }
        if log_t > ln_ceiling {
            sum.add(log_t.exp().min(f64::MAX));
            return verdict(SeriesState::DivergingNumerically, &sum, used, f64::INFINITY, f64::INFINITY);
        }
        sum.add(log_t.exp());
        if sum.value().abs() > cfg.ceiling {
            return verdict(SeriesState::DivergingNumerically, &sum, used, f64::NAN, f64::INFINITY);
        }
        win.push((n as f64).ln(), log_t);
        if used >= cfg.n_min.max(win.cap) && used % check_every == 0 {
            let fit = win.fit();
            let (state, tail) = classify(&fit, n as f64, sum.value());
            let done = match state {
                SeriesState::DivergingNumerically => true,
                SeriesState::ConvergedNumerically => tail <= cfg.early_exit * sum.value().abs().max(1.0),
                SeriesState::Inconclusive => false,
            };
            if done {
                return verdict(state, &sum, used, fit.slope, tail);
            }
        }
    }
    if used < win.cap.min(cfg.n_min.max(1)) || used < 2 {
        let fit = win.fit();
        return verdict(SeriesState::Inconclusive, &sum, used, fit.slope, f64::NAN);
    }
    let fit = win.fit();
    let n = (cfg.start_index + used - 1) as f64;
    let (state, tail) = classify(&fit, n, sum.value());
    verdict(state, &sum, used, fit.slope, tail)
}

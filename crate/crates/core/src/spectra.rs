//! Truncation spectra, closed-form spectra of the decoupled free operators,
//! and Schatten-class partial sums.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jacobi::{BlockJacobiMatrix, JacobiError};
use crate::sequences::{series_probe, ProbeConfig, ScalarSequence, SeqError, SeriesState, SeriesVerdict};

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error(transparent)]
    Jacobi(#[from] JacobiError),
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error("empty truncation schedule")]
    EmptySchedule,
    #[error("csv output failed: {0}")]
    Io(#[from] std::io::Error),
}

/// Eigenvalues of the leading `n_blocks`-block section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSlice {
    pub n_blocks: usize,
    pub p: usize,
    pub eigenvalues: Vec<f64>,
    /// relative change of the k-th lowest eigenvalue since the previous rung
    pub ritz_stability: Vec<Option<f64>>,
}

pub fn truncation_spectrum(j: &BlockJacobiMatrix, n_blocks: usize, cap: usize) -> Result<SpectrumSlice, SpectraError> {
    let t = j.truncate_dense(n_blocks, cap)?;
    let mut ev: Vec<f64> = t.h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(SpectrumSlice { n_blocks, p: t.p, ritz_stability: vec![None; ev.len()], eigenvalues: ev })
}

/// Spectra along a truncation schedule, each annotated with its drift
/// against the previous rung.
pub fn ritz_ladder(j: &BlockJacobiMatrix, schedule: &[usize], cap: usize) -> Result<Vec<SpectrumSlice>, SpectraError> {
    if schedule.is_empty() {
        return Err(SpectraError::EmptySchedule);
    }
    let mut out: Vec<SpectrumSlice> = Vec::with_capacity(schedule.len());
    for &n in schedule {
        let mut s = truncation_spectrum(j, n, cap)?;
        if let Some(prev) = out.last() {
            for (k, v) in prev.eigenvalues.iter().enumerate().take(s.eigenvalues.len()) {
                let cur = s.eigenvalues[k];
                s.ritz_stability[k] = Some((cur - v).abs() / cur.abs().max(f64::MIN_POSITIVE));
            }
        }
        out.push(s);
    }
    Ok(out)
}

/// Cauchy interlacing of a principal section (`small`) inside `big`, where
/// `big` has `extra` more rows: `big_i ≤ small_i ≤ big_{i+extra}`.
pub fn interlaces(small: &[f64], big: &[f64], extra: usize, slack: f64) -> bool {
    if big.len() != small.len() + extra {
        return false;
    }
    small.iter().enumerate().all(|(i, &s)| {
        let tol = slack * (1.0 + s.abs());
        big[i] <= s + tol && s <= big[i + extra] + tol
    })
}

/// `π²(2k+1)²/(4d_n²)`, `1 ≤ n ≤ n_terms`, `0 ≤ k ≤ k_max`, each value repeated `p` times.
pub fn free_schrodinger_spectrum(
    d: &ScalarSequence,
    p: usize,
    n_terms: usize,
    k_max: usize,
) -> Result<Vec<f64>, SeqError> {
    let mut v = Vec::with_capacity(n_terms * (k_max + 1) * p);
    for n in 1..=n_terms {
        let dn = d.eval(n)?;
        for k in 0..=k_max {
            let m = (2 * k + 1) as f64;
            let x = PI * PI * m * m / (4.0 * dn * dn);
            v.extend(std::iter::repeat_n(x, p));
        }
    }
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `±√(c²π²(2k+1)²/(4d_n²) + c⁴/4)`, each value repeated `p` times.
pub fn free_dirac_spectrum(
    d: &ScalarSequence,
    c: f64,
    p: usize,
    n_terms: usize,
    k_max: usize,
) -> Result<Vec<f64>, SeqError> {
    let mut v = Vec::with_capacity(2 * n_terms * (k_max + 1) * p);
    for n in 1..=n_terms {
        let dn = d.eval(n)?;
        for k in 0..=k_max {
            let m = (2 * k + 1) as f64;
            let x = (c * c * PI * PI * m * m / (4.0 * dn * dn) + c.powi(4) / 4.0).sqrt();
            v.extend(std::iter::repeat_n(x, p));
            v.extend(std::iter::repeat_n(-x, p));
        }
    }
    v.sort_by(f64::total_cmp);
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchattenSum {
    pub q: f64,
    /// `Σ v^{−q}`, or `sup v^{−1}` when `q = ∞`
    pub partial_sum: f64,
    pub verdict: SeriesVerdict,
}

/// `Σ v_n^{−q}` from `log v_n`. For `q = ∞` the supremum of `v^{−1}` is
/// returned and the state records whether `v^{−1}` decays.
pub fn schatten_partial_log<I>(log_values: I, q: f64, cfg: &ProbeConfig) -> SchattenSum
where
    I: IntoIterator<Item = f64>,
{
    if q.is_infinite() {
        let inv: Vec<f64> = log_values.into_iter().take(cfg.n_max).map(|l| -l).collect();
        let sup = inv.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let k = inv.len();
        let head = inv[..k / 4].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tail = inv[k - k / 4..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let state = if k >= 8 && tail < head - 2f64.ln() {
            SeriesState::ConvergedNumerically
        } else if k >= 8 && tail >= head {
            SeriesState::DivergingNumerically
        } else {
            SeriesState::Inconclusive
        };
        return SchattenSum {
            q,
            partial_sum: sup.exp(),
            verdict: SeriesVerdict {
                state,
                partial_sum: sup.exp(),
                n_used: k,
                growth_exponent_estimate: f64::NAN,
                tail_estimate: f64::NAN,
            },
        };
    }
    let v = series_probe(log_values.into_iter().map(|l| -q * l), cfg);
    SchattenSum { q, partial_sum: v.partial_sum, verdict: v }
}

pub fn schatten_partial<I>(values: I, q: f64, cfg: &ProbeConfig) -> SchattenSum
where
    I: IntoIterator<Item = f64>,
{
    schatten_partial_log(values.into_iter().map(f64::ln), q, cfg)
}

/// `Σ_{k≥0} (2k+1)^{−s}` for `s > 1`: direct sum plus an Euler–Maclaurin tail.
pub fn odd_zeta(s: f64) -> f64 {
    const K: usize = 2000;
    let mut head = crate::sequences::CompensatedSum::default();
    for k in (0..K).rev() {
        head.add(((2 * k + 1) as f64).powf(-s));
    }
    let x = (2 * K + 1) as f64;
    let f = x.powf(-s);
    let f1 = -2.0 * s * x.powf(-s - 1.0);
    let f3 = -8.0 * s * (s + 1.0) * (s + 2.0) * x.powf(-s - 3.0);
    let integral = x.powf(1.0 - s) / (2.0 * (s - 1.0));
    head.value() + integral + f / 2.0 - f1 / 12.0 + f3 / 720.0
}

/// Schatten sum for the decoupled Schrödinger operator: the inner sum over
/// `k` is evaluated in closed form, the outer sum over `n` is probed.
pub fn free_schrodinger_schatten(d: &ScalarSequence, p: usize, q: f64, cfg: &ProbeConfig) -> Result<SchattenSum, SeqError> {
    d.validate()?;
    if q.is_infinite() {
        let dd = d.clone();
        let logs = (1..).map(move |n| dd.eval_log(n).map_or(f64::NAN, |l| 2.0 * PI.ln() - 4f64.ln() - 2.0 * l));
        return Ok(schatten_partial_log(logs, q, cfg));
    }
    if 2.0 * q <= 1.0 {
        let verdict = SeriesVerdict {
            state: SeriesState::DivergingNumerically,
            partial_sum: f64::INFINITY,
            n_used: 0,
            growth_exponent_estimate: f64::NAN,
            tail_estimate: f64::INFINITY,
        };
        return Ok(SchattenSum { q, partial_sum: f64::INFINITY, verdict });
    }
    let c0 = (p as f64).ln() + q * 4f64.ln() - 2.0 * q * PI.ln() + odd_zeta(2.0 * q).ln();
    let dd = d.clone();
    let terms = (1..).map(move |n| dd.eval_log(n).map_or(f64::NAN, |l| c0 + 2.0 * q * l));
    let v = series_probe(terms, cfg);
    Ok(SchattenSum { q, partial_sum: v.partial_sum, verdict: v })
}

/// CSV with columns `N,index,eigenvalue,drift`.
pub fn write_csv<W: Write>(slices: &[SpectrumSlice], mut w: W) -> Result<(), SpectraError> {
    writeln!(w, "N,index,eigenvalue,drift")?;
    for s in slices {
        for (k, (e, d)) in s.eigenvalues.iter().zip(&s.ritz_stability).enumerate() {
            match d {
                Some(d) => writeln!(w, "{},{},{:e},{:e}", s.n_blocks, k, e, d)?,
                None => writeln!(w, "{},{},{:e},", s.n_blocks, k, e)?,
            }
        }
    }
    Ok(())
}

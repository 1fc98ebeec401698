//! Matrix families generated by point-interaction models.
//!
//! Block indices are 0-based. Interaction strengths `α_j`, `β_j` and interval
//! lengths `d_j` are 1-based; perturbation blocks `𝒜'_n`, `ℬ'_n` are 0-based
//! and read their spec at `n + 1`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blockmat::Scaled;
use crate::jacobi::{BlockJacobiMatrix, JacobiError};
use crate::sequences::{log_add_exp, softplus, ScalarSequence, SeqError};
use crate::{ComplexBlock, ScaledBlock};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("family {family} needs {needed}")]
    Mismatch { family: String, needed: &'static str },
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error(transparent)]
    Seq(#[from] SeqError),
}

fn seq_err(n: usize, e: SeqError) -> JacobiError {
    JacobiError::Generator { n, msg: e.to_string() }
}

/// `ν(x) = cx/√(1+c²x²)`
pub fn nu(x: f64, c: f64) -> f64 {
    c * x / (1.0 + c * c * x * x).sqrt()
}

/// `log ν(e^{log_x})`, accurate for arbitrarily small or large `x`.
pub fn log_nu(log_x: f64, c: f64) -> f64 {
    let t = c.ln() + log_x;
    t - 0.5 * softplus(2.0 * t)
}

/// One entry of a diagonal-list block sequence: `factor · seq(n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagEntry {
    pub factor: f64,
    #[serde(default)]
    pub seq: Option<ScalarSequence>,
}

type CustomFn = dyn Fn(usize) -> Result<ScaledBlock, JacobiError> + Send + Sync;

/// Programmatic block sequence.
#[derive(Clone)]
pub struct CustomBlocks(pub Arc<CustomFn>);

impl fmt::Debug for CustomBlocks {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomBlocks(..)")
    }
}

impl PartialEq for CustomBlocks {
    fn eq(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.0, &o.0)
    }
}

/// Hermitian block sequence `n ↦ M_n`, `n ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum BlockSequence {
    #[serde(rename = "zero")]
    Zero,
    /// `value · 𝕀`
    #[serde(rename = "constant-scalar")]
    ConstantScalar { value: f64 },
    #[serde(rename = "constant-matrix")]
    ConstantMatrix {
        re: Vec<Vec<f64>>,
        #[serde(default)]
        im: Option<Vec<Vec<f64>>>,
    },
    #[serde(rename = "diagonal-list")]
    DiagonalList { entries: Vec<DiagEntry> },
    /// `factor · s_n · 𝕀`
    #[serde(rename = "scaled-identity")]
    ScaledIdentity { factor: f64, seq: ScalarSequence },
    /// `(slope·n + intercept) · 𝕀`
    #[serde(rename = "affine")]
    Affine { slope: f64, intercept: f64 },
    /// `upper ⊕ lower` with `upper` of size `p1`
    #[serde(rename = "block-split")]
    BlockSplit { p1: usize, upper: Box<BlockSequence>, lower: Box<BlockSequence> },
    #[serde(skip)]
    Custom(CustomBlocks),
}

impl BlockSequence {
    pub fn custom<F>(f: F) -> Self
    where
        F: Fn(usize) -> Result<ScaledBlock, JacobiError> + Send + Sync + 'static,
    {
        BlockSequence::Custom(CustomBlocks(Arc::new(f)))
    }

    pub fn scaled_identity(factor: f64, seq: ScalarSequence) -> Self {
        BlockSequence::ScaledIdentity { factor, seq }
    }

    pub fn is_zero_kind(&self) -> bool {
        matches!(self, BlockSequence::Zero)
    }

    pub fn validate(&self, p: usize) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::Invalid(m));
        match self {
            BlockSequence::ConstantMatrix { re, im } => {
                if re.len() != p || re.iter().any(|r| r.len() != p) {
                    return bad(format!("constant-matrix re must be {p}x{p}"));
                }
                if let Some(im) = im {
                    if im.len() != p || im.iter().any(|r| r.len() != p) {
                        return bad(format!("constant-matrix im must be {p}x{p}"));
                    }
                }
                let b = constant_matrix(re, im.as_deref());
                if !b.is_hermitian() {
                    return bad("constant-matrix must be Hermitian".into());
                }
                Ok(())
            }
            BlockSequence::DiagonalList { entries } => {
                if entries.len() != p {
                    return bad(format!("diagonal-list needs {p} entries, got {}", entries.len()));
                }
                for e in entries {
                    if let Some(s) = &e.seq {
                        s.validate()?;
                    }
                }
                Ok(())
            }
            BlockSequence::ScaledIdentity { seq, .. } => Ok(seq.validate()?),
            BlockSequence::BlockSplit { p1, upper, lower } => {
                if *p1 == 0 || *p1 >= p {
                    return bad(format!("block-split needs 0 < p1 < p, got p1 = {p1}, p = {p}"));
                }
                upper.validate(*p1)?;
                lower.validate(p - p1)
            }
            _ => Ok(()),
        }
    }

    /// The `n`-th block (`n ≥ 1`) in log-scaled form.
    pub fn eval(&self, n: usize, p: usize) -> Result<ScaledBlock, JacobiError> {
        Ok(match self {
            BlockSequence::Zero => Scaled::zeros(p),
            BlockSequence::ConstantScalar { value } => Scaled::from_block(ComplexBlock::scalar(p, *value)),
            BlockSequence::ConstantMatrix { re, im } => Scaled::from_block(constant_matrix(re, im.as_deref())),
            BlockSequence::DiagonalList { entries } => {
                let mut logs = Vec::with_capacity(entries.len());
                for e in entries {
                    let l = match &e.seq {
                        Some(s) => s.eval_log(n).map_err(|err| seq_err(n, err))?,
                        None => 0.0,
                    };
                    logs.push((e.factor, l));
                }
                let top = logs
                    .iter()
                    .filter(|(f, _)| *f != 0.0)
                    .map(|(f, l)| f.abs().ln() + l)
                    .fold(f64::NEG_INFINITY, f64::max);
                if !top.is_finite() {
                    return Ok(Scaled::zeros(p));
                }
                let d: Vec<f64> = logs
                    .iter()
                    .map(|(f, l)| if *f == 0.0 { 0.0 } else { f.signum() * (f.abs().ln() + l - top).exp() })
                    .collect();
                Scaled::new(top, ComplexBlock::from_diag(&d))
            }
            BlockSequence::ScaledIdentity { factor, seq } => {
                if *factor == 0.0 {
                    return Ok(Scaled::zeros(p));
                }
                let l = seq.eval_log(n).map_err(|e| seq_err(n, e))?;
                Scaled::scaled_identity(p, factor.abs().ln() + l, *factor < 0.0)
            }
            BlockSequence::Affine { slope, intercept } => {
                Scaled::from_block(ComplexBlock::scalar(p, slope * n as f64 + intercept))
            }
            BlockSequence::BlockSplit { p1, upper, lower } => {
                let u = upper.eval(n, *p1)?;
                let l = lower.eval(n, p - p1)?;
                direct_sum(&u, &l)
            }
            BlockSequence::Custom(f) => (f.0)(n)?,
        })
    }

    /// `log ‖M_n‖`, without assembling the block for the scalar kinds.
    pub fn log_norm(&self, n: usize, p: usize) -> Result<f64, JacobiError> {
        let ln_abs = |x: f64| if x == 0.0 { f64::NEG_INFINITY } else { x.abs().ln() };
        Ok(match self {
            BlockSequence::Zero => f64::NEG_INFINITY,
            BlockSequence::ConstantScalar { value } => ln_abs(*value),
            BlockSequence::ScaledIdentity { factor, seq } => {
                if *factor == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    factor.abs().ln() + seq.eval_log(n).map_err(|e| seq_err(n, e))?
                }
            }
            BlockSequence::Affine { slope, intercept } => ln_abs(slope * n as f64 + intercept),
            _ => self.eval(n, p)?.norm_log(),
        })
    }
}

fn constant_matrix(re: &[Vec<f64>], im: Option<&[Vec<f64>]>) -> ComplexBlock {
    ComplexBlock::from_fn(re.len(), |i, j| Complex64::new(re[i][j], im.map_or(0.0, |m| m[i][j])))
}

/// Block diagonal `u ⊕ l`.
pub fn direct_sum(u: &ScaledBlock, l: &ScaledBlock) -> ScaledBlock {
    let (p1, p2) = (u.p(), l.p());
    let m = match (u.is_zero(), l.is_zero()) {
        (true, true) => return Scaled::zeros(p1 + p2),
        (true, false) => l.log_scale,
        (false, true) => u.log_scale,
        _ => u.log_scale.max(l.log_scale),
    };
    let fu = if u.is_zero() { 0.0 } else { (u.log_scale - m).exp() };
    let fl = if l.is_zero() { 0.0 } else { (l.log_scale - m).exp() };
    let b = ComplexBlock::from_fn(p1 + p2, |i, j| {
        if i < p1 && j < p1 {
            u.block.get(i, j) * fu
        } else if i >= p1 && j >= p1 {
            l.block.get(i - p1, j - p1) * fl
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Scaled::new(m, b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Strengths {
    Alpha(BlockSequence),
    Beta(BlockSequence),
}

/// Point-interaction data `(c, {d_n}, {α_n} or {β_n})` with block size `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionModel {
    pub p: usize,
    pub c: f64,
    pub d: ScalarSequence,
    pub strengths: Strengths,
}

impl InteractionModel {
    pub fn alpha(p: usize, c: f64, d: ScalarSequence, alpha: BlockSequence) -> Self {
        InteractionModel { p, c, d, strengths: Strengths::Alpha(alpha) }
    }

    pub fn beta(p: usize, c: f64, d: ScalarSequence, beta: BlockSequence) -> Self {
        InteractionModel { p, c, d, strengths: Strengths::Beta(beta) }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.p == 0 {
            return Err(ModelError::Invalid("p must be at least 1".into()));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(ModelError::Invalid(format!("c must be positive, got {}", self.c)));
        }
        self.d.validate()?;
        match &self.strengths {
            Strengths::Alpha(s) | Strengths::Beta(s) => s.validate(self.p),
        }
    }

    pub fn alpha_seq(&self) -> Option<&BlockSequence> {
        match &self.strengths {
            Strengths::Alpha(a) => Some(a),
            _ => None,
        }
    }

    pub fn beta_seq(&self) -> Option<&BlockSequence> {
        match &self.strengths {
            Strengths::Beta(b) => Some(b),
            _ => None,
        }
    }

    pub fn log_d(&self, n: usize) -> Result<f64, JacobiError> {
        self.d.eval_log(n).map_err(|e| seq_err(n, e))
    }

    /// `α_n` (`n ≥ 1`); `α_0 = 𝕆`.
    pub fn alpha_at(&self, n: usize) -> Result<ScaledBlock, JacobiError> {
        let a = self.alpha_seq().ok_or(JacobiError::Generator { n, msg: "model has no alpha".into() })?;
        if n == 0 {
            return Ok(Scaled::zeros(self.p));
        }
        a.eval(n, self.p)
    }

    pub fn beta_at(&self, n: usize) -> Result<ScaledBlock, JacobiError> {
        let b = self.beta_seq().ok_or(JacobiError::Generator { n, msg: "model has no beta".into() })?;
        b.eval(n, self.p)
    }

    fn need_alpha(&self, family: &str) -> Result<(), ModelError> {
        self.validate()?;
        if self.alpha_seq().is_none() {
            return Err(ModelError::Mismatch { family: family.into(), needed: "alpha" });
        }
        Ok(())
    }

    fn need_beta(&self, family: &str) -> Result<(), ModelError> {
        self.validate()?;
        if self.beta_seq().is_none() {
            return Err(ModelError::Mismatch { family: family.into(), needed: "beta" });
        }
        Ok(())
    }
}

/// Perturbation blocks `𝒜'_n`, `ℬ'_n`, `n ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationData {
    pub a_prime: BlockSequence,
    pub b_prime: BlockSequence,
}

impl PerturbationData {
    pub fn zero() -> Self {
        PerturbationData { a_prime: BlockSequence::Zero, b_prime: BlockSequence::Zero }
    }

    pub fn a(&self, n: usize, p: usize) -> Result<ScaledBlock, JacobiError> {
        self.a_prime.eval(n + 1, p)
    }

    pub fn b(&self, n: usize, p: usize) -> Result<ScaledBlock, JacobiError> {
        self.b_prime.eval(n + 1, p)
    }
}

fn id_plus(p: usize, m: &ScaledBlock) -> ScaledBlock {
    Scaled::identity(p).add(m)
}

/// Which weight replaces `ν(d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Weight {
    Nu,
    Linear,
}

#[derive(Clone)]
struct Dirac {
    m: Arc<InteractionModel>,
    w: Weight,
}

impl Dirac {
    fn lw(&self, k: usize) -> Result<f64, JacobiError> {
        let l = self.m.log_d(k)?;
        Ok(match self.w {
            Weight::Nu => log_nu(l, self.m.c),
            Weight::Linear => self.m.c.ln() + l,
        })
    }

    /// `log(ν(d_k)/d_k²)`
    fn hat(&self, k: usize) -> Result<f64, JacobiError> {
        Ok(self.lw(k)? - 2.0 * self.m.log_d(k)?)
    }

    /// `log(ν(d_k)/(d_k^{3/2} d_{k+1}^{1/2}))`
    fn tilde(&self, k: usize) -> Result<f64, JacobiError> {
        Ok(self.lw(k)? - 1.5 * self.m.log_d(k)? - 0.5 * self.m.log_d(k + 1)?)
    }

    /// `log(ν(d_k)²/d_k³)`
    fn breve(&self, k: usize) -> Result<f64, JacobiError> {
        Ok(2.0 * self.lw(k)? - 3.0 * self.m.log_d(k)?)
    }

    fn offdiag(&self, n: usize) -> Result<ScaledBlock, JacobiError> {
        let j = n / 2;
        let p = self.m.p;
        Ok(if n % 2 == 0 {
            Scaled::scaled_identity(p, self.hat(j + 1)?, false)
        } else {
            Scaled::scaled_identity(p, self.tilde(j + 1)?, false)
        })
    }

    fn alpha_diag(&self, n: usize) -> Result<ScaledBlock, JacobiError> {
        let j = n / 2;
        let p = self.m.p;
        if n % 2 == 0 {
            Ok(self.m.alpha_at(j)?.shift_log(-self.m.log_d(j + 1)?))
        } else {
            Ok(Scaled::scaled_identity(p, self.hat(j + 1)?, true))
        }
    }

    /// `β_k + d_k 𝕀`
    fn beta_shift(&self, k: usize) -> Result<ScaledBlock, JacobiError> {
        let p = self.m.p;
        Ok(self.m.beta_at(k)?.add(&Scaled::scaled_identity(p, self.m.log_d(k)?, false)))
    }

    fn beta_diag(&self, n: usize) -> Result<ScaledBlock, JacobiError> {
        let j = n / 2;
        if n % 2 == 0 {
            return Ok(Scaled::zeros(self.m.p));
        }
        Ok(self.beta_shift(j + 1)?.shift_log(self.breve(j + 1)?).neg())
    }
}

fn dirac(m: &InteractionModel, w: Weight) -> Dirac {
    Dirac { m: Arc::new(m.clone()), w }
}

/// Wraps arbitrary block sequences: `𝒜_n = diag(n+1)`, `ℬ_n = offdiag(n+1)`.
pub fn make_general(p: usize, diag: BlockSequence, offdiag: BlockSequence) -> Result<BlockJacobiMatrix, ModelError> {
    if p == 0 {
        return Err(ModelError::Invalid("p must be at least 1".into()));
    }
    diag.validate(p)?;
    offdiag.validate(p)?;
    Ok(BlockJacobiMatrix::from_fns(p, "general", move |n| diag.eval(n + 1, p), move |n| offdiag.eval(n + 1, p)))
}

/// Scalar family from closed forms `a(n)`, `b(n)` with 0-based `n`.
pub fn scalar_family<F, G>(name: &str, a: F, b: G) -> BlockJacobiMatrix
where
    F: Fn(usize) -> f64 + Send + Sync + 'static,
    G: Fn(usize) -> f64 + Send + Sync + 'static,
{
    BlockJacobiMatrix::from_fns(
        1,
        name,
        move |n| Ok(Scaled::from_block(ComplexBlock::scalar(1, a(n)))),
        move |n| Ok(Scaled::from_block(ComplexBlock::scalar(1, b(n)))),
    )
}

/// `𝒜_n = 𝕆`, `ℬ_n = 𝕀`.
pub fn make_free(p: usize) -> BlockJacobiMatrix {
    BlockJacobiMatrix::from_fns(p, "free", move |_| Ok(Scaled::zeros(p)), move |_| Ok(Scaled::identity(p)))
}

/// `J_{X,α}`: `𝒜_{2j} = α_j/d_{j+1}`, `𝒜_{2j+1} = −ν(d_{j+1})/d_{j+1}²`,
/// `ℬ_{2j} = ν(d_{j+1})/d_{j+1}²`, `ℬ_{2j+1} = ν(d_{j+1})/(d_{j+1}^{3/2} d_{j+2}^{1/2})`.
pub fn make_dirac_alpha(m: &InteractionModel) -> Result<BlockJacobiMatrix, ModelError> {
    m.need_alpha("dirac-alpha")?;
    let (g, h) = (dirac(m, Weight::Nu), dirac(m, Weight::Nu));
    Ok(BlockJacobiMatrix::from_fns(m.p, "dirac-alpha", move |n| g.alpha_diag(n), move |n| h.offdiag(n)))
}

/// `J'_{X,α}`: `ν(d)` replaced by `c·d`.
pub fn make_dirac_alpha_simple(m: &InteractionModel) -> Result<BlockJacobiMatrix, ModelError> {
    m.need_alpha("dirac-alpha-simple")?;
    let (g, h) = (dirac(m, Weight::Linear), dirac(m, Weight::Linear));
    Ok(BlockJacobiMatrix::from_fns(m.p, "dirac-alpha-simple", move |n| g.alpha_diag(n), move |n| h.offdiag(n)))
}

/// `𝐁_{X,α}`: `J_{X,α}` with the even off-diagonal blocks negated.
pub fn make_boundary_alpha(m: &InteractionModel) -> Result<BlockJacobiMatrix, ModelError> {
    m.need_alpha("boundary-alpha")?;
    let (g, h) = (dirac(m, Weight::Nu), dirac(m, Weight::Nu));
    Ok(BlockJacobiMatrix::from_fns(
        m.p,
        "boundary-alpha",
        move |n| g.alpha_diag(n),
        move |n| {
            let b = h.offdiag(n)?;
            Ok(if n % 2 == 0 { b.neg() } else { b })
        },
    ))
}

/// `J_{X,β}`: zero even diagonal, `𝒜_{2j+1} = −(ν²(d_{j+1})/d_{j+1}³)(β_{j+1} + d_{j+1}𝕀)`.
pub fn make_dirac_beta(m: &InteractionModel) -> Result<BlockJacobiMatrix, ModelError> {
    m.need_beta("dirac-beta")?;
    let (g, h) = (dirac(m, Weight::Nu), dirac(m, Weight::Nu));
    Ok(BlockJacobiMatrix::from_fns(m.p, "dirac-beta", move |n| g.beta_diag(n), move |n| h.offdiag(n)))
}

/// `J'_{X,β}`: odd diagonal `−(c²/d_{j+1})(β_{j+1} + d_{j+1}𝕀)`.
pub fn make_dirac_beta_simple(m: &InteractionModel) -> Result<BlockJacobiMatrix, ModelError> {
    m.need_beta("dirac-beta-simple")?;
    let (g, h) = (dirac(m, Weight::Linear), dirac(m, Weight::Linear));
    Ok(BlockJacobiMatrix::from_fns(m.p, "dirac-beta-simple", move |n| g.beta_diag(n), move |n| h.offdiag(n)))
}

/// `Ĵ_{X,α}`. The even diagonal is the product `(α_j/d_{j+1})(𝕀 + 𝒜'_{2j})`
/// as displayed; it is Hermitian only when the two factors commute.
pub fn make_perturbed_alpha(m: &InteractionModel, pert: &PerturbationData) -> Result<BlockJacobiMatrix, ModelError> {
    m.need_alpha("perturbed-alpha")?;
    pert.a_prime.validate(m.p)?;
    pert.b_prime.validate(m.p)?;
    let (g, h) = (dirac(m, Weight::Nu), dirac(m, Weight::Nu));
    let (pa, pb) = (pert.clone(), pert.clone());
    let p = m.p;
    Ok(BlockJacobiMatrix::from_fns(
        p,
        "perturbed-alpha",
        move |n| {
            let ap = pa.a(n, p)?;
            let j = n / 2;
            if n == 0 {
                Ok(ap)
            } else if n % 2 == 0 {
                Ok(g.alpha_diag(n)?.mul(&id_plus(p, &ap)))
            } else {
                Ok(id_plus(p, &ap).shift_log(g.hat(j + 1)?).neg())
            }
        },
        move |n| Ok(id_plus(p, &pb.b(n, p)?).mul(&h.offdiag(n)?)),
    ))
}

/// `Ĵ_{X,β}`: `𝒜̂_{2j} = 𝒜'_{2j}`, `𝒜̂_{2j+1} = −ν̆_{j+1}(β_{j+1} + d_{j+1}𝕀 + 𝒜'_{2j+1})`.
pub fn make_perturbed_beta(m: &InteractionModel, pert: &PerturbationData) -> Result<BlockJacobiMatrix, ModelError> {
    m.need_beta("perturbed-beta")?;
    pert.a_prime.validate(m.p)?;
    pert.b_prime.validate(m.p)?;
    let (g, h) = (dirac(m, Weight::Nu), dirac(m, Weight::Nu));
    let (pa, pb) = (pert.clone(), pert.clone());
    let p = m.p;
    Ok(BlockJacobiMatrix::from_fns(
        p,
        "perturbed-beta",
        move |n| {
            let ap = pa.a(n, p)?;
            if n % 2 == 0 {
                return Ok(ap);
            }
            let k = n / 2 + 1;
            Ok(g.beta_shift(k)?.add(&ap).shift_log(g.breve(k)?).neg())
        },
        move |n| Ok(id_plus(p, &pb.b(n, p)?).mul(&h.offdiag(n)?)),
    ))
}

/// `log r_k = ½ log(d_k + d_{k+1})`
fn log_r(m: &InteractionModel, k: usize) -> Result<f64, JacobiError> {
    Ok(0.5 * log_add_exp(m.log_d(k)?, m.log_d(k + 1)?))
}

/// `α̃_k = α_k + (1/d_k + 1/d_{k+1})𝕀`
pub fn alpha_tilde(m: &InteractionModel, k: usize) -> Result<ScaledBlock, JacobiError> {
    let s = log_add_exp(-m.log_d(k)?, -m.log_d(k + 1)?);
    Ok(m.alpha_at(k)?.add(&Scaled::scaled_identity(m.p, s, false)))
}

/// `J⁽¹⁾`: `𝒜_n = α̃_{n+1}/r_{n+1}²`, `ℬ_n = 𝕀/(r_{n+1} r_{n+2} d_{n+2})`.
pub fn make_schrodinger_j1(m: &InteractionModel) -> Result<BlockJacobiMatrix, ModelError> {
    m.need_alpha("schrodinger-j1")?;
    let (g, h) = (Arc::new(m.clone()), Arc::new(m.clone()));
    let p = m.p;
    Ok(BlockJacobiMatrix::from_fns(
        p,
        "schrodinger-j1",
        move |n| Ok(alpha_tilde(&g, n + 1)?.shift_log(-2.0 * log_r(&g, n + 1)?)),
        move |n| {
            let l = -log_r(&h, n + 1)? - log_r(&h, n + 2)? - h.log_d(n + 2)?;
            Ok(Scaled::scaled_identity(p, l, false))
        },
    ))
}

/// `J⁽²⁾`: the `ν`-free interleaved pattern, identical to `J'_{X,α}` at `c = 1`.
pub fn make_schrodinger_j2(m: &InteractionModel) -> Result<BlockJacobiMatrix, ModelError> {
    m.need_alpha("schrodinger-j2")?;
    let mut m1 = m.clone();
    m1.c = 1.0;
    let (g, h) = (dirac(&m1, Weight::Linear), dirac(&m1, Weight::Linear));
    Ok(BlockJacobiMatrix::from_fns(m.p, "schrodinger-j2", move |n| g.alpha_diag(n), move |n| h.offdiag(n)))
}

fn dyukarev_check(p: usize, p1: usize) -> Result<(), ModelError> {
    if p == 0 || p1 > p {
        return Err(ModelError::Invalid(format!("dyukarev needs 0 <= p1 <= p and p >= 1, got p = {p}, p1 = {p1}")));
    }
    Ok(())
}

/// `𝒜_n = 𝕆`, `ℬ_0 = 𝕀`, `ℬ_n = diag((n+1)√(n²+1) ×p1, √2 ×(p−p1))`.
pub fn make_dyukarev(p: usize, p1: usize) -> Result<BlockJacobiMatrix, ModelError> {
    dyukarev_check(p, p1)?;
    Ok(BlockJacobiMatrix::from_fns(
        p,
        "dyukarev",
        move |_| Ok(Scaled::zeros(p)),
        move |n| {
            if n == 0 {
                return Ok(Scaled::identity(p));
            }
            let x = n as f64;
            let up = (x + 1.0) * (x * x + 1.0).sqrt();
            let d: Vec<f64> = (0..p).map(|i| if i < p1 { up } else { 2f64.sqrt() }).collect();
            Ok(Scaled::from_block(ComplexBlock::from_diag(&d)))
        },
    ))
}

/// `ℬ_n = B̃_{n−1}⁻¹ R_n B̃_n⁻¹` with `B̃_n = diag(1/(n+1) ×p1, 1 ×(p−p1))`
/// and `R_n = √(𝕀 + B̃_{n−1}²)`, for `n ≥ 1`.
pub fn dyukarev_product_block(p: usize, p1: usize, n: usize) -> Result<ComplexBlock, ModelError> {
    dyukarev_check(p, p1)?;
    if n == 0 {
        return Err(ModelError::Invalid("the product form starts at n = 1".into()));
    }
    let bt = |k: usize| {
        let v: Vec<f64> = (0..p).map(|i| if i < p1 { 1.0 / (k as f64 + 1.0) } else { 1.0 }).collect();
        ComplexBlock::from_diag(&v)
    };
    let prev = bt(n - 1);
    let sq = (&prev * &prev).shift(Complex64::new(1.0, 0.0));
    let r = crate::blockmat::herm_eig(&sq).map_err(|e| ModelError::Invalid(e.to_string()))?.apply(f64::sqrt);
    let ip = crate::blockmat::inv(&prev).map_err(|e| ModelError::Invalid(e.to_string()))?;
    let ic = crate::blockmat::inv(&bt(n)).map_err(|e| ModelError::Invalid(e.to_string()))?;
    Ok(&(&ip * &r) * &ic)
}

/// Family names accepted by the configuration layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    General,
    DiracAlpha,
    DiracAlphaSimple,
    BoundaryAlpha,
    DiracBeta,
    DiracBetaSimple,
    PerturbedAlpha,
    PerturbedBeta,
    SchrodingerJ1,
    SchrodingerJ2,
    Dyukarev,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 11] = [
        FamilyKind::General,
        FamilyKind::DiracAlpha,
        FamilyKind::DiracAlphaSimple,
        FamilyKind::BoundaryAlpha,
        FamilyKind::DiracBeta,
        FamilyKind::DiracBetaSimple,
        FamilyKind::PerturbedAlpha,
        FamilyKind::PerturbedBeta,
        FamilyKind::SchrodingerJ1,
        FamilyKind::SchrodingerJ2,
        FamilyKind::Dyukarev,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::General => "general",
            FamilyKind::DiracAlpha => "dirac-alpha",
            FamilyKind::DiracAlphaSimple => "dirac-alpha-simple",
            FamilyKind::BoundaryAlpha => "boundary-alpha",
            FamilyKind::DiracBeta => "dirac-beta",
            FamilyKind::DiracBetaSimple => "dirac-beta-simple",
            FamilyKind::PerturbedAlpha => "perturbed-alpha",
            FamilyKind::PerturbedBeta => "perturbed-beta",
            FamilyKind::SchrodingerJ1 => "schrodinger-j1",
            FamilyKind::SchrodingerJ2 => "schrodinger-j2",
            FamilyKind::Dyukarev => "dyukarev",
        }
    }

    pub fn needs_alpha(self) -> bool {
        matches!(
            self,
            FamilyKind::DiracAlpha
                | FamilyKind::DiracAlphaSimple
                | FamilyKind::BoundaryAlpha
                | FamilyKind::PerturbedAlpha
                | FamilyKind::SchrodingerJ1
                | FamilyKind::SchrodingerJ2
        )
    }

    pub fn needs_beta(self) -> bool {
        matches!(self, FamilyKind::DiracBeta | FamilyKind::DiracBetaSimple | FamilyKind::PerturbedBeta)
    }

    /// Builds the family from a model; `General` and `Dyukarev` are built directly.
    pub fn build_from_model(
        self,
        m: &InteractionModel,
        pert: Option<&PerturbationData>,
    ) -> Result<BlockJacobiMatrix, ModelError> {
        let zero = PerturbationData::zero();
        let pert = pert.unwrap_or(&zero);
        match self {
            FamilyKind::DiracAlpha => make_dirac_alpha(m),
            FamilyKind::DiracAlphaSimple => make_dirac_alpha_simple(m),
            FamilyKind::BoundaryAlpha => make_boundary_alpha(m),
            FamilyKind::DiracBeta => make_dirac_beta(m),
            FamilyKind::DiracBetaSimple => make_dirac_beta_simple(m),
            FamilyKind::PerturbedAlpha => make_perturbed_alpha(m, pert),
            FamilyKind::PerturbedBeta => make_perturbed_beta(m, pert),
            FamilyKind::SchrodingerJ1 => make_schrodinger_j1(m),
            FamilyKind::SchrodingerJ2 => make_schrodinger_j2(m),
            FamilyKind::General | FamilyKind::Dyukarev => {
                Err(ModelError::Invalid(format!("{} is not built from an interaction model", self.name())))
            }
        }
    }
}

//! Lazily generated block Jacobi matrices.

use std::fmt;
use std::sync::{Arc, RwLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::blockmat::BlockError;
use crate::{ComplexBlock, ScaledBlock};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JacobiError {
    #[error("diagonal block {n} is not Hermitian (relative defect {defect:.3e})")]
    NotHermitian { n: usize, defect: f64 },
    #[error("off-diagonal block {n} is singular (σ_min/σ_max = {ratio:.3e})")]
    Singular { n: usize, ratio: f64 },
    #[error("dense size {requested} exceeds the cap {cap}")]
    CapExceeded { requested: usize, cap: usize },
    #[error("block magnitudes span e^{log_range:.1}, beyond the dense range; use the scaled recursions")]
    DynamicRange { log_range: f64 },
    #[error("block {n} overflows double precision")]
    Overflow { n: usize },
    #[error("generator failed at index {n}: {msg}")]
    Generator { n: usize, msg: String },
    #[error(transparent)]
    Block(#[from] BlockError),
}

pub type BlockFn = Arc<dyn Fn(usize) -> Result<ScaledBlock, JacobiError> + Send + Sync>;

pub const DEFAULT_DENSE_CAP: usize = 8192;
const CACHE_LIMIT: usize = 1 << 16;
const SINGULAR_REL: f64 = 1e-13;
const HERMITIAN_REL: f64 = 1e-12;
const MAX_LOG_RANGE: f64 = 690.0;

#[derive(Default)]
struct Cache {
    diag: Vec<ScaledBlock>,
    offdiag: Vec<ScaledBlock>,
}

/// Infinite block tridiagonal matrix with Hermitian diagonal blocks `𝒜_n`
/// and invertible off-diagonal blocks `ℬ_n`, indexed from 0.
#[derive(Clone)]
pub struct BlockJacobiMatrix {
    p: usize,
    name: String,
    diag: BlockFn,
    offdiag: BlockFn,
    cache: Arc<RwLock<Cache>>,
}

impl fmt::Debug for BlockJacobiMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlockJacobiMatrix").field("name", &self.name).field("p", &self.p).finish()
    }
}

impl BlockJacobiMatrix {
    pub fn new(p: usize, name: impl Into<String>, diag: BlockFn, offdiag: BlockFn) -> Self {
        BlockJacobiMatrix { p, name: name.into(), diag, offdiag, cache: Arc::new(RwLock::new(Cache::default())) }
    }

    pub fn from_fns<F, G>(p: usize, name: impl Into<String>, diag: F, offdiag: G) -> Self
    where
        F: Fn(usize) -> Result<ScaledBlock, JacobiError> + Send + Sync + 'static,
        G: Fn(usize) -> Result<ScaledBlock, JacobiError> + Send + Sync + 'static,
    {
        Self::new(p, name, Arc::new(diag), Arc::new(offdiag))
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    fn checked_diag(&self, n: usize) -> Result<ScaledBlock, JacobiError> {
        let a = (self.diag)(n)?;
        if a.p() != self.p {
            return Err(JacobiError::Generator { n, msg: format!("block size {} != {}", a.p(), self.p) });
        }
        if !a.block.is_finite() || !a.log_scale.is_finite() {
            return Err(JacobiError::Overflow { n });
        }
        let defect = a.hermitian_defect_rel();
        if defect > HERMITIAN_REL {
            return Err(JacobiError::NotHermitian { n, defect });
        }
        Ok(a)
    }

    fn checked_offdiag(&self, n: usize) -> Result<ScaledBlock, JacobiError> {
        let b = (self.offdiag)(n)?;
        if b.p() != self.p {
            return Err(JacobiError::Generator { n, msg: format!("block size {} != {}", b.p(), self.p) });
        }
        if !b.block.is_finite() || !b.log_scale.is_finite() {
            return Err(JacobiError::Overflow { n });
        }
        let ratio = (b.min_singular_log() - b.norm_log()).exp();
        if !(ratio > SINGULAR_REL) {
            return Err(JacobiError::Singular { n, ratio: if ratio.is_nan() { 0.0 } else { ratio } });
        }
        Ok(b)
    }

    fn warm(&self, n: usize, off: bool) -> Result<(), JacobiError> {
        if n >= CACHE_LIMIT {
            return Ok(());
        }
        {
            let c = self.cache.read().unwrap();
            let len = if off { c.offdiag.len() } else { c.diag.len() };
            if len > n {
                return Ok(());
            }
        }
        let mut c = self.cache.write().unwrap();
        if off {
            while c.offdiag.len() <= n {
                let b = self.checked_offdiag(c.offdiag.len())?;
                c.offdiag.push(b);
            }
        } else {
            while c.diag.len() <= n {
                let a = self.checked_diag(c.diag.len())?;
                c.diag.push(a);
            }
        }
        Ok(())
    }

    /// Extends the cache through index `n` so later reads only take the read lock.
    pub fn warm_up(&self, n: usize) -> Result<(), JacobiError> {
        self.warm(n.min(CACHE_LIMIT - 1), false)?;
        self.warm(n.min(CACHE_LIMIT - 1), true)
    }

    /// `𝒜_n` in log-scaled form.
    pub fn diag_scaled(&self, n: usize) -> Result<ScaledBlock, JacobiError> {
        if n >= CACHE_LIMIT {
            return self.checked_diag(n);
        }
        self.warm(n, false)?;
        Ok(self.cache.read().unwrap().diag[n].clone())
    }

    /// `ℬ_n` in log-scaled form.
    pub fn offdiag_scaled(&self, n: usize) -> Result<ScaledBlock, JacobiError> {
        if n >= CACHE_LIMIT {
            return self.checked_offdiag(n);
        }
        self.warm(n, true)?;
        Ok(self.cache.read().unwrap().offdiag[n].clone())
    }

    pub fn diag_block(&self, n: usize) -> Result<ComplexBlock, JacobiError> {
        let a = self.diag_scaled(n)?;
        let b = a.to_block();
        if !b.is_finite() {
            return Err(JacobiError::Overflow { n });
        }
        Ok(b)
    }

    pub fn offdiag_block(&self, n: usize) -> Result<ComplexBlock, JacobiError> {
        let a = self.offdiag_scaled(n)?;
        let b = a.to_block();
        if !b.is_finite() {
            return Err(JacobiError::Overflow { n });
        }
        Ok(b)
    }

    /// True when every block with index `< n` has zero imaginary part.
    pub fn real_entries(&self, n: usize) -> Result<bool, JacobiError> {
        for k in 0..n {
            if !self.diag_scaled(k)?.block.is_real() || !self.offdiag_scaled(k)?.block.is_real() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Multiplies every block by `e^{log_factor}`.
    pub fn rescaled(&self, log_factor: f64) -> Self {
        let (d, o) = (self.diag.clone(), self.offdiag.clone());
        Self::from_fns(
            self.p,
            self.name.clone(),
            move |n| Ok(d(n)?.shift_log(log_factor)),
            move |n| Ok(o(n)?.shift_log(log_factor)),
        )
    }

    /// Leading `N×N` block section.
    pub fn truncate_dense(&self, n_blocks: usize, cap: usize) -> Result<DenseTruncation, JacobiError> {
        let dim = n_blocks * self.p;
        if n_blocks == 0 || dim > cap {
            return Err(JacobiError::CapExceeded { requested: dim, cap });
        }
        let p = self.p;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut diags = Vec::with_capacity(n_blocks);
        let mut offs = Vec::with_capacity(n_blocks);
        for n in 0..n_blocks {
            let a = self.diag_scaled(n)?;
            if !a.is_zero() {
                lo = lo.min(a.log_scale);
                hi = hi.max(a.log_scale);
            }
            diags.push(a);
            if n + 1 < n_blocks {
                let b = self.offdiag_scaled(n)?;
                lo = lo.min(b.log_scale);
                hi = hi.max(b.log_scale);
                offs.push(b);
            }
        }
        if hi.is_finite() && hi - lo > MAX_LOG_RANGE {
            return Err(JacobiError::DynamicRange { log_range: hi - lo });
        }
        let mut h = DMatrix::<Complex64>::zeros(dim, dim);
        for (n, a) in diags.iter().enumerate() {
            let a = a.to_block();
            if !a.is_finite() {
                return Err(JacobiError::Overflow { n });
            }
            for i in 0..p {
                for j in 0..p {
                    h[(n * p + i, n * p + j)] = a.get(i, j);
                }
            }
        }
        for (n, b) in offs.iter().enumerate() {
            let b = b.to_block();
            if !b.is_finite() {
                return Err(JacobiError::Overflow { n });
            }
            for i in 0..p {
                for j in 0..p {
                    h[(n * p + i, (n + 1) * p + j)] = b.get(i, j);
                    h[((n + 1) * p + j, n * p + i)] = b.get(i, j).conj();
                }
            }
        }
        for i in 0..dim {
            for j in i + 1..dim {
                let z = h[(i, j)];
                h[(j, i)] = z.conj();
            }
            h[(i, i)].im = 0.0;
        }
        Ok(DenseTruncation { n_blocks, p, h })
    }

    /// `(Lv)_n = ℬ_{n−1}^* v_{n−1} + 𝒜_n v_n + ℬ_n v_{n+1}` for `n = 0..len`,
    /// with `v` a flat block vector and zero padding past its end.
    pub fn matvec(&self, v: &[Complex64]) -> Result<Vec<Complex64>, JacobiError> {
        let p = self.p;
        assert_eq!(v.len() % p, 0, "block vector length must be a multiple of p");
        let nb = v.len() / p;
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for n in 0..nb {
            let mut acc = self.diag_block(n)?.mul_vec(&v[n * p..(n + 1) * p]);
            if n > 0 {
                let t = self.offdiag_block(n - 1)?.adjoint().mul_vec(&v[(n - 1) * p..n * p]);
                acc.iter_mut().zip(t).for_each(|(a, b)| *a += b);
            }
            if n + 1 < nb {
                let t = self.offdiag_block(n)?.mul_vec(&v[(n + 1) * p..(n + 2) * p]);
                acc.iter_mut().zip(t).for_each(|(a, b)| *a += b);
            }
            out[n * p..(n + 1) * p].copy_from_slice(&acc);
        }
        Ok(out)
    }
}

/// Hermitian `(N·p)×(N·p)` section of a block Jacobi matrix.
#[derive(Debug, Clone)]
pub struct DenseTruncation {
    pub n_blocks: usize,
    pub p: usize,
    pub h: DMatrix<Complex64>,
}

impl DenseTruncation {
    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        let x = nalgebra::DVector::from_column_slice(v);
        (&self.h * x).iter().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockmat::Scaled;

    fn free() -> BlockJacobiMatrix {
        BlockJacobiMatrix::from_fns(1, "free", |_| Ok(Scaled::zeros(1)), |_| Ok(Scaled::identity(1)))
    }

    #[test]
    fn free_dense_three() {
        let t = free().truncate_dense(3, DEFAULT_DENSE_CAP).unwrap();
        let want = [[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(t.h[(i, j)], Complex64::new(want[i][j], 0.0));
            }
        }
    }

    #[test]
    fn free_shift() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let out = free().matvec(&[one, zero, zero, zero]).unwrap();
        assert_eq!(out, vec![zero, one, zero, zero]);
    }

    #[test]
    fn cap_and_guards() {
        assert!(matches!(free().truncate_dense(10, 5), Err(JacobiError::CapExceeded { .. })));
        let bad = BlockJacobiMatrix::from_fns(
            1,
            "bad",
            |_| Ok(Scaled::zeros(1)),
            |n| Ok(if n == 2 { Scaled::zeros(1) } else { Scaled::identity(1) }),
        );
        assert!(matches!(bad.offdiag_block(2), Err(JacobiError::Singular { n: 2, .. })));
    }
}

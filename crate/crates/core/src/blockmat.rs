//! Small dense complex p×p blocks: Hermitian eigensolver, inversion, norms
//! and the modulus / inverse-square-root map.

use std::fmt::{Debug, Display, LowerExp};
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{Float, FromPrimitive, NumAssign};
use thiserror::Error;

/// Floating point scalar backing a [`Block`]: f32 or f64.
pub trait Real:
    Float + FromPrimitive + NumAssign + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
}
impl Real for f32 {}
impl Real for f64 {}

const SWEEP_BUDGET: usize = 30;

fn cst<T: Real>(x: f64) -> T {
    T::from_f64(x).unwrap()
}

/// Relative tolerance clamped from below by the scalar's precision.
pub fn tol<T: Real>(x: f64) -> T {
    cst::<T>(x).max(T::epsilon() * cst(16.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum BlockError {
    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("matrix is singular (smallest singular value {sigma_min:.3e}, largest {sigma_max:.3e})")]
    Singular { sigma_min: f64, sigma_max: f64 },
    #[error("eigenvalue {eigenvalue:.3e} lies in the numerical kernel")]
    NearKernel { eigenvalue: f64 },
    #[error("dimension mismatch ({0} vs {1})")]
    Dimension(usize, usize),
}

/// Dense p×p complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct Block<T: Real> {
    p: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> Debug for Block<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Block({}x{})", self.p, self.p)?;
        for i in 0..self.p {
            let row: Vec<String> = (0..self.p)
                .map(|j| {
                    let z = self.get(i, j);
                    format!("{:+.6e}{:+.6e}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl<T: Real> Block<T> {
    pub fn zeros(p: usize) -> Self {
        assert!(p >= 1, "block dimension must be positive");
        Block { p, data: vec![Complex::new(T::zero(), T::zero()); p * p] }
    }

    pub fn identity(p: usize) -> Self {
        Self::scalar(p, T::one())
    }

    pub fn scalar(p: usize, x: T) -> Self {
        let mut b = Self::zeros(p);
        for i in 0..p {
            b.data[i * p + i] = Complex::new(x, T::zero());
        }
        b
    }

    pub fn from_diag(d: &[T]) -> Self {
        let mut b = Self::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            b.data[i * d.len() + i] = Complex::new(x, T::zero());
        }
        b
    }

    pub fn from_fn(p: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut b = Self::zeros(p);
        for i in 0..p {
            for j in 0..p {
                b.data[i * p + j] = f(i, j);
            }
        }
        b
    }

    pub fn from_real_rows(rows: &[Vec<T>]) -> Self {
        let p = rows.len();
        Self::from_fn(p, |i, j| Complex::new(rows[i][j], T::zero()))
    }

    pub fn from_row_major(p: usize, data: Vec<Complex<T>>) -> Self {
        assert_eq!(data.len(), p * p);
        Block { p, data }
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.p + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: Complex<T>) {
        self.data[i * self.p + j] = z;
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.p, |i, j| self.get(j, i).conj())
    }

    pub fn scale(&self, x: T) -> Self {
        Block { p: self.p, data: self.data.iter().map(|z| z * x).collect() }
    }

    pub fn scale_c(&self, x: Complex<T>) -> Self {
        Block { p: self.p, data: self.data.iter().map(|z| z * x).collect() }
    }

    /// `self + x·𝕀`
    pub fn shift(&self, x: Complex<T>) -> Self {
        let mut b = self.clone();
        for i in 0..self.p {
            b.data[i * self.p + i] += x;
        }
        b
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn frob_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == T::zero() && z.im == T::zero())
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == T::zero())
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        let p = self.p;
        (0..p).all(|i| (0..p).all(|j| i == j || self.data[i * p + j] == Complex::new(T::zero(), T::zero())))
    }

    pub fn diagonal(&self) -> Vec<Complex<T>> {
        (0..self.p).map(|i| self.get(i, i)).collect()
    }

    pub fn hermitian_defect(&self) -> T {
        let mut d = T::zero();
        for i in 0..self.p {
            for j in i..self.p {
                d = d.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        d
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_defect() <= tol::<T>(1e-12) * (T::one() + spec_norm(self))
    }

    /// Exactly Hermitian copy `(M + M*)/2`.
    pub fn symmetrized(&self) -> Self {
        let half = cst::<T>(0.5);
        let mut b = Self::from_fn(self.p, |i, j| (self.get(i, j) + self.get(j, i).conj()) * half);
        for i in 0..self.p {
            let z = b.get(i, i);
            b.set(i, i, Complex::new(z.re, T::zero()));
        }
        b
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        let p = self.p;
        (0..p)
            .map(|i| (0..p).fold(Complex::new(T::zero(), T::zero()), |s, j| s + self.data[i * p + j] * v[j]))
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.p).map(|i| self.get(i, j)).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[Complex<T>]) {
        for i in 0..self.p {
            self.set(i, j, v[i]);
        }
    }

    pub fn cast<U: Real>(&self) -> Block<U> {
        Block {
            p: self.p,
            data: self
                .data
                .iter()
                .map(|z| Complex::new(U::from(z.re).unwrap(), U::from(z.im).unwrap()))
                .collect(),
        }
    }
}

impl<'a, T: Real> Add for &'a Block<T> {
    type Output = Block<T>;
    fn add(self, o: &Block<T>) -> Block<T> {
        assert_eq!(self.p, o.p);
        Block { p: self.p, data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect() }
    }
}

impl<'a, T: Real> Sub for &'a Block<T> {
    type Output = Block<T>;
    fn sub(self, o: &Block<T>) -> Block<T> {
        assert_eq!(self.p, o.p);
        Block { p: self.p, data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect() }
    }
}

impl<'a, T: Real> Neg for &'a Block<T> {
    type Output = Block<T>;
    fn neg(self) -> Block<T> {
        Block { p: self.p, data: self.data.iter().map(|a| -a).collect() }
    }
}

impl<'a, T: Real> Mul for &'a Block<T> {
    type Output = Block<T>;
    fn mul(self, o: &Block<T>) -> Block<T> {
        assert_eq!(self.p, o.p);
        let p = self.p;
        let mut out = Block::zeros(p);
        for i in 0..p {
            for k in 0..p {
                let a = self.data[i * p + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..p {
                    out.data[i * p + j] += a * o.data[k * p + j];
                }
            }
        }
        out
    }
}

/// Eigendecomposition of a Hermitian block.
#[derive(Debug, Clone)]
pub struct HermEig<T: Real> {
    /// ascending
    pub eigenvalues: Vec<T>,
    /// columns are eigenvectors
    pub vectors: Block<T>,
}

impl<T: Real> HermEig<T> {
    /// `V·diag(f(λ))·V*`
    pub fn apply(&self, f: impl Fn(T) -> T) -> Block<T> {
        let p = self.vectors.p;
        let w: Vec<T> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        Block::from_fn(p, |i, j| {
            (0..p).fold(Complex::new(T::zero(), T::zero()), |s, k| {
                s + self.vectors.get(i, k) * self.vectors.get(j, k).conj() * w[k]
            })
        })
    }
}

/// Cyclic two-sided Jacobi rotations.
pub fn herm_eig<T: Real>(m: &Block<T>) -> Result<HermEig<T>, BlockError> {
    let p = m.p;
    let norm = m.max_abs();
    let defect = m.hermitian_defect();
    if defect > tol::<T>(1e-12) * (T::one() + spec_norm(m)) {
        return Err(BlockError::NotHermitian { defect: defect.to_f64().unwrap_or(f64::NAN) });
    }
    let mut a = m.symmetrized();
    let mut v = Block::identity(p);
    if p > 1 && !a.is_diagonal() {
        let eps = tol::<T>(1e-13);
        let mut converged = false;
        for _ in 0..SWEEP_BUDGET {
            let mut off = T::zero();
            for i in 0..p {
                for j in 0..p {
                    if i != j {
                        off += a.get(i, j).norm_sqr();
                    }
                }
            }
            if off.sqrt() <= eps * a.frob_norm() || norm == T::zero() {
                converged = true;
                break;
            }
            for i in 0..p - 1 {
                for j in i + 1..p {
                    rotate(&mut a, &mut v, i, j);
                }
            }
        }
        if !converged {
            return Err(BlockError::NoConvergence { sweeps: SWEEP_BUDGET });
        }
    }
    let mut order: Vec<usize> = (0..p).collect();
    let diag: Vec<T> = (0..p).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&x, &y| diag[x].partial_cmp(&diag[y]).unwrap_or(std::cmp::Ordering::Equal));
    let eigenvalues = order.iter().map(|&k| diag[k]).collect();
    let vectors = Block::from_fn(p, |i, j| v.get(i, order[j]));
    Ok(HermEig { eigenvalues, vectors })
}

fn rotate<T: Real>(a: &mut Block<T>, v: &mut Block<T>, i: usize, j: usize) {
    let p = a.p;
    let aij = a.get(i, j);
    let r = aij.norm();
    if r == T::zero() {
        return;
    }
    let e = aij / r;
    let theta = (a.get(j, j).re - a.get(i, i).re) / (cst::<T>(2.0) * r);
    let t = if theta == T::zero() {
        T::one()
    } else {
        theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt())
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;
    let zero = T::zero();
    let gii = Complex::new(c, zero);
    let gij = Complex::new(s, zero);
    let gji = e.conj() * (-s);
    let gjj = e.conj() * c;
    for k in 0..p {
        let (x, y) = (a.get(k, i), a.get(k, j));
        a.set(k, i, x * gii + y * gji);
        a.set(k, j, x * gij + y * gjj);
    }
    for k in 0..p {
        let (x, y) = (a.get(i, k), a.get(j, k));
        a.set(i, k, gii.conj() * x + gji.conj() * y);
        a.set(j, k, gij.conj() * x + gjj.conj() * y);
    }
    for k in 0..p {
        let (x, y) = (v.get(k, i), v.get(k, j));
        v.set(k, i, x * gii + y * gji);
        v.set(k, j, x * gij + y * gjj);
    }
    a.set(i, j, Complex::new(zero, zero));
    a.set(j, i, Complex::new(zero, zero));
    let (x, y) = (a.get(i, i).re, a.get(j, j).re);
    a.set(i, i, Complex::new(x, zero));
    a.set(j, j, Complex::new(y, zero));
}

/// Singular values in descending order (one-sided Jacobi on columns).
pub fn singular_values<T: Real>(m: &Block<T>) -> Vec<T> {
    let p = m.p;
    if m.is_diagonal() {
        let mut s: Vec<T> = m.diagonal().iter().map(|z| z.norm()).collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        return s;
    }
    let scale = m.max_abs();
    if scale == T::zero() || !scale.is_finite() {
        return vec![if scale.is_finite() { T::zero() } else { T::infinity() }; p];
    }
    let mut cols: Vec<Vec<Complex<T>>> = (0..p).map(|j| m.column(j).iter().map(|z| z / scale).collect()).collect();
    let eps = T::epsilon() * cst(4.0);
    for _ in 0..60 {
        let mut rotated = false;
        for i in 0..p - 1 {
            for j in i + 1..p {
                let alpha: T = cols[i].iter().fold(T::zero(), |s, z| s + z.norm_sqr());
                let beta: T = cols[j].iter().fold(T::zero(), |s, z| s + z.norm_sqr());
                let gamma = cols[i]
                    .iter()
                    .zip(&cols[j])
                    .fold(Complex::new(T::zero(), T::zero()), |s, (a, b)| s + a.conj() * b);
                let g = gamma.norm();
                if g <= eps * (alpha * beta).sqrt() || g == T::zero() {
                    continue;
                }
                rotated = true;
                let e = gamma / g;
                let zeta = (beta - alpha) / (cst::<T>(2.0) * g);
                let t = if zeta == T::zero() {
                    T::one()
                } else {
                    zeta.signum() / (zeta.abs() + (zeta * zeta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..p {
                    let a = cols[i][k];
                    let b = cols[j][k] * e.conj();
                    cols[i][k] = a * c - b * s;
                    cols[j][k] = a * s + b * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s: Vec<T> = cols
        .iter()
        .map(|c| c.iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt() * scale)
        .collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Largest singular value.
pub fn spec_norm<T: Real>(m: &Block<T>) -> T {
    singular_values(m)[0]
}

pub fn min_singular<T: Real>(m: &Block<T>) -> T {
    *singular_values(m).last().unwrap()
}

/// Inverse by Gauss-Jordan elimination with partial pivoting, guarded by the
/// relative singular-value threshold.
pub fn inv<T: Real>(m: &Block<T>) -> Result<Block<T>, BlockError> {
    let p = m.p;
    let s = singular_values(m);
    let (smax, smin) = (s[0], s[p - 1]);
    if !(smin > tol::<T>(1e-13) * smax) {
        return Err(BlockError::Singular {
            sigma_min: smin.to_f64().unwrap_or(f64::NAN),
            sigma_max: smax.to_f64().unwrap_or(f64::NAN),
        });
    }
    if m.is_diagonal() {
        let one = Complex::new(T::one(), T::zero());
        let mut out = Block::zeros(p);
        for i in 0..p {
            out.set(i, i, one / m.get(i, i));
        }
        return Ok(out);
    }
    let mut a = m.clone();
    let mut b = Block::identity(p);
    for col in 0..p {
        let piv = (col..p)
            .max_by(|&x, &y| a.get(x, col).norm().partial_cmp(&a.get(y, col).norm()).unwrap())
            .unwrap();
        if piv != col {
            for k in 0..p {
                a.data.swap(col * p + k, piv * p + k);
                b.data.swap(col * p + k, piv * p + k);
            }
        }
        let d = a.get(col, col);
        for k in 0..p {
            a.data[col * p + k] = a.data[col * p + k] / d;
            b.data[col * p + k] = b.data[col * p + k] / d;
        }
        for r in 0..p {
            if r == col {
                continue;
            }
            let f = a.get(r, col);
            if f.re == T::zero() && f.im == T::zero() {
                continue;
            }
            for k in 0..p {
                let (x, y) = (a.data[col * p + k], b.data[col * p + k]);
                a.data[r * p + k] -= f * x;
                b.data[r * p + k] -= f * y;
            }
        }
    }
    Ok(b)
}

/// `|M|^{-1/2}` together with the sign factor `sign(M)` of the polar form.
#[derive(Debug, Clone)]
pub struct Polar<T: Real> {
    pub abs_inv_sqrt: Block<T>,
    pub sign: Block<T>,
}

pub fn abs_inv_sqrt<T: Real>(m: &Block<T>) -> Result<Polar<T>, BlockError> {
    let eig = herm_eig(m)?;
    let top = eig.eigenvalues.iter().fold(T::zero(), |s, l| s.max(l.abs()));
    let thr = tol::<T>(1e-12) * top;
    if let Some(&bad) = eig.eigenvalues.iter().find(|l| !(l.abs() > thr)) {
        return Err(BlockError::NearKernel { eigenvalue: bad.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(Polar {
        abs_inv_sqrt: eig.apply(|l| T::one() / l.abs().sqrt()),
        sign: eig.apply(|l| l.signum()),
    })
}

/// Block stored as `exp(log_scale)·block` with `max_abs(block)` normalized to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct Scaled<T: Real> {
    pub log_scale: T,
    pub block: Block<T>,
}

impl<T: Real> Scaled<T> {
    pub fn new(log_scale: T, block: Block<T>) -> Self {
        let m = block.max_abs();
        if m == T::zero() || !m.is_finite() {
            return Scaled { log_scale: if m == T::zero() { T::zero() } else { log_scale }, block };
        }
        Scaled { log_scale: log_scale + m.ln(), block: block.scale(T::one() / m) }
    }

    pub fn from_block(block: Block<T>) -> Self {
        Self::new(T::zero(), block)
    }

    pub fn zeros(p: usize) -> Self {
        Scaled { log_scale: T::zero(), block: Block::zeros(p) }
    }

    pub fn identity(p: usize) -> Self {
        Scaled { log_scale: T::zero(), block: Block::identity(p) }
    }

    /// `sign·exp(log_mag)·𝕀`
    pub fn scaled_identity(p: usize, log_mag: T, negative: bool) -> Self {
        let s = if negative { -T::one() } else { T::one() };
        Scaled { log_scale: log_mag, block: Block::scalar(p, s) }
    }

    pub fn p(&self) -> usize {
        self.block.p
    }

    pub fn is_zero(&self) -> bool {
        self.block.is_zero()
    }

    pub fn to_block(&self) -> Block<T> {
        if self.is_zero() {
            return self.block.clone();
        }
        self.block.scale(self.log_scale.exp())
    }

    pub fn adjoint(&self) -> Self {
        Scaled { log_scale: self.log_scale, block: self.block.adjoint() }
    }

    pub fn neg(&self) -> Self {
        Scaled { log_scale: self.log_scale, block: -&self.block }
    }

    /// Multiply by `exp(dl)`.
    pub fn shift_log(&self, dl: T) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Scaled { log_scale: self.log_scale + dl, block: self.block.clone() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Scaled::new(self.log_scale + o.log_scale, &self.block * &o.block)
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let m = self.log_scale.max(o.log_scale);
        let a = self.block.scale((self.log_scale - m).exp());
        let b = o.block.scale((o.log_scale - m).exp());
        // entries that cancel to rounding level are set to exact zero
        let floor = T::epsilon() * cst(8.0);
        let data = a
            .data
            .iter()
            .zip(&b.data)
            .map(|(x, y)| {
                let s = x + y;
                let zero = Complex::new(T::zero(), T::zero());
                let re = if s.re.abs() <= floor * (x.re.abs() + y.re.abs()) { zero.re } else { s.re };
                let im = if s.im.abs() <= floor * (x.im.abs() + y.im.abs()) { zero.im } else { s.im };
                Complex::new(re, im)
            })
            .collect();
        Scaled::new(m, Block { p: a.p, data })
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn inv(&self) -> Result<Self, BlockError> {
        Ok(Scaled::new(-self.log_scale, inv(&self.block)?))
    }

    /// Natural log of the spectral norm (−∞ for the zero block).
    pub fn norm_log(&self) -> T {
        if self.is_zero() {
            return T::neg_infinity();
        }
        self.log_scale + spec_norm(&self.block).ln()
    }

    pub fn min_singular_log(&self) -> T {
        if self.is_zero() {
            return T::neg_infinity();
        }
        self.log_scale + min_singular(&self.block).ln()
    }

    pub fn norm(&self) -> T {
        self.norm_log().exp()
    }

    pub fn hermitian_defect_rel(&self) -> T {
        let n = spec_norm(&self.block);
        if n == T::zero() {
            return T::zero();
        }
        self.block.hermitian_defect() / n
    }

    pub fn abs_inv_sqrt(&self) -> Result<Scaled<T>, BlockError> {
        let pol = abs_inv_sqrt(&self.block)?;
        Ok(Scaled::new(-self.log_scale * cst(0.5), pol.abs_inv_sqrt))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type B = Block<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn eig_small_cases() {
        let e = herm_eig(&B::identity(2)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0]);
        let e = herm_eig(&B::from_diag(&[4.0, -9.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![-9.0, 4.0]);
        let m = B::from_real_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let e = herm_eig(&m).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn eig_complex_reconstructs() {
        let m = B::from_fn(3, |i, j| match (i, j) {
            (0, 0) => c(1.0, 0.0),
            (1, 1) => c(-2.0, 0.0),
            (2, 2) => c(0.5, 0.0),
            (0, 1) => c(0.3, 0.7),
            (1, 0) => c(0.3, -0.7),
            (0, 2) => c(-1.1, 0.2),
            (2, 0) => c(-1.1, -0.2),
            (1, 2) => c(0.0, 0.4),
            (2, 1) => c(0.0, -0.4),
            _ => unreachable!(),
        });
        let e = herm_eig(&m).unwrap();
        let r = e.apply(|l| l);
        assert!((&r - &m).max_abs() < 1e-12);
        let vv = &e.vectors.adjoint() * &e.vectors;
        assert!((&vv - &B::identity(3)).max_abs() < 1e-12);
        assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = B::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert!(matches!(herm_eig(&m), Err(BlockError::NotHermitian { .. })));
    }

    #[test]
    fn norms() {
        assert_eq!(spec_norm(&B::zeros(3)), 0.0);
        assert_eq!(spec_norm(&B::from_diag(&[3.0, -5.0])), 5.0);
        let m = B::from_real_rows(&[vec![0.0, 2.0], vec![0.0, 0.0]]);
        assert!((spec_norm(&m) - 2.0).abs() < 1e-15);
        assert!(min_singular(&m).abs() < 1e-15);
    }

    #[test]
    fn inverse() {
        assert_eq!(inv(&B::identity(3)).unwrap(), B::identity(3));
        let d = inv(&B::from_diag(&[2.0, 4.0])).unwrap();
        assert_eq!(d, B::from_diag(&[0.5, 0.25]));
        let m = B::from_real_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(inv(&m), Err(BlockError::Singular { .. })));
        let m = B::from_fn(2, |i, j| c((i + 2 * j) as f64 + 1.0, (i as f64) - (j as f64) * 0.5));
        let r = &(&m * &inv(&m).unwrap()) - &B::identity(2);
        assert!(r.max_abs() < 1e-13);
    }

    #[test]
    fn modulus_inverse_sqrt() {
        let pol = abs_inv_sqrt(&B::from_diag(&[4.0, -9.0])).unwrap();
        assert!((pol.abs_inv_sqrt.get(0, 0).re - 0.5).abs() < 1e-15);
        assert!((pol.abs_inv_sqrt.get(1, 1).re - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(pol.sign.get(1, 1).re, -1.0);
        let pol = abs_inv_sqrt(&B::identity(2)).unwrap();
        assert_eq!(pol.abs_inv_sqrt, B::identity(2));
        assert!(matches!(abs_inv_sqrt(&B::from_diag(&[1.0, 0.0])), Err(BlockError::NearKernel { .. })));
    }

    #[test]
    fn scaled_arithmetic() {
        let a = Scaled::new(700.0, B::from_diag(&[2.0, 1.0]));
        let b = Scaled::new(-700.0, B::from_diag(&[0.5, 4.0]));
        let ab = a.mul(&b);
        assert!((ab.to_block().get(0, 0).re - 1.0).abs() < 1e-12);
        assert!((ab.to_block().get(1, 1).re - 4.0).abs() < 1e-12);
        assert!((a.norm_log() - (700.0 + 2f64.ln())).abs() < 1e-12);
        let z = a.sub(&a);
        assert!(z.is_zero());
        let ai = a.inv().unwrap();
        assert!((ai.norm_log() + 700.0).abs() < 1e-12);
    }

    #[test]
    fn generic_f32() {
        let m = Block::<f32>::from_real_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let e = herm_eig(&m).unwrap();
        assert!((e.eigenvalues[1] - 3.0).abs() < 1e-5);
        assert!((spec_norm(&m) - 3.0).abs() < 1e-5);
    }
}

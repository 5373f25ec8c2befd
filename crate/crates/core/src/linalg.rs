//! Dense linear algebra used by the chain mapping, diagnostics, TEBD and
//! the exact-diagonalization oracle.
//!
//! Hermitian matrices are reduced to real symmetric tridiagonal form by
//! Householder reflections and then diagonalized by the implicit QL method
//! with Wilkinson shifts. The same QL kernel serves Jacobi matrices directly.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::{Error, Real, Result};

/// Scalars the dense routines work with: `T` itself or `Complex<T>`.
pub trait Field<T: Real>:
    Copy
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Mul<T, Output = Self>
    + Div<T, Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + Send
    + Sync
    + Debug
{
    fn conj(self) -> Self;
    fn re(self) -> T;
    fn abs_sqr(self) -> T;
    fn from_real(x: T) -> Self;
    fn is_finite(self) -> bool;

    fn abs(self) -> T {
        self.abs_sqr().sqrt()
    }

    /// `x/|x|`, or one for `x = 0`.
    fn unit(self) -> Self {
        let a = self.abs();
        if a == T::zero() {
            Self::one()
        } else {
            self / a
        }
    }
}

impl<T: Real> Field<T> for T {
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn re(self) -> T {
        self
    }
    #[inline]
    fn abs_sqr(self) -> T {
        self * self
    }
    #[inline]
    fn from_real(x: T) -> Self {
        x
    }
    #[inline]
    fn is_finite(self) -> bool {
        num_traits::Float::is_finite(self)
    }
}

impl<T: Real> Field<T> for Complex<T> {
    #[inline]
    fn conj(self) -> Self {
        Complex::conj(&self)
    }
    #[inline]
    fn re(self) -> T {
        self.re
    }
    #[inline]
    fn abs_sqr(self) -> T {
        self.norm_sqr()
    }
    #[inline]
    fn from_real(x: T) -> Self {
        Complex::new(x, T::zero())
    }
    #[inline]
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Copy + Zero> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<S>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> S {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: S) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [S] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<S> {
        self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn map<U: Copy + Zero>(&self, f: impl Fn(S) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }
}

impl<S: Copy + Zero + One> Matrix<S> {
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { S::one() } else { S::zero() })
    }
}

impl<S> Matrix<S> {
    pub fn adjoint<T: Real>(&self) -> Self
    where
        S: Field<T>,
    {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn matmul<T: Real>(&self, other: &Self) -> Self
    where
        S: Field<T>,
    {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let orow = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a.abs_sqr() == T::zero() {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec<T: Real>(&self, v: &[S]) -> Vec<S>
    where
        S: Field<T>,
    {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(S::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn scale<T: Real>(&self, s: S) -> Self
    where
        S: Field<T>,
    {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn add<T: Real>(&self, other: &Self) -> Self
    where
        S: Field<T>,
    {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron<T: Real>(&self, other: &Self) -> Self
    where
        S: Field<T>,
    {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        Self::from_fn(rows, cols, |r, c| {
            self.get(r / other.rows, c / other.cols) * other.get(r % other.rows, c % other.cols)
        })
    }

    /// Frobenius norm.
    pub fn norm<T: Real>(&self) -> T
    where
        S: Field<T>,
    {
        self.data.iter().map(|x| x.abs_sqr()).sum::<T>().sqrt()
    }

    /// Largest `|A_ij - A_ji*|`.
    pub fn hermiticity_defect<T: Real>(&self) -> T
    where
        S: Field<T>,
    {
        let mut worst = T::zero();
        for r in 0..self.rows {
            for c in 0..self.cols {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).abs());
            }
        }
        worst
    }
}

/// Eigen-decomposition `A = V diag(values) V†` with ascending eigenvalues.
/// Eigenvectors are the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct Eigen<T, S> {
    pub values: Vec<T>,
    pub vectors: Matrix<S>,
}

const QL_MAX_SWEEPS: usize = 60;

/// Implicit QL with Wilkinson shifts on the symmetric tridiagonal matrix
/// with diagonal `d` and superdiagonal `e[0..n-1]` (`e[n-1]` ignored).
///
/// The plane rotations are applied to the columns of `v`, stored column-major
/// with `ld` entries per column; pass an empty slice to skip vectors. On
/// return `d` holds the eigenvalues and the columns of `v` are rotated
/// accordingly (unsorted).
fn tql2<T: Real, S: Field<T>>(d: &mut [T], e: &mut [T], v: &mut [S], ld: usize) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = T::zero();
    let eps = T::epsilon();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let with_vectors = !v.is_empty();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > QL_MAX_SWEEPS {
                    return Err(Error::EigenNotConverged { iterations: iter });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (T::lit(2.0) * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if with_vectors {
                        let (lo, hi) = v.split_at_mut((i + 1) * ld);
                        let vi = &mut lo[i * ld..];
                        let vi1 = &mut hi[..ld];
                        for (a, b) in vi.iter_mut().zip(vi1.iter_mut()) {
                            let hb = *b;
                            *b = *a * s + hb * c;
                            *a = *a * c - hb * s;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}

/// Sorts eigenvalues ascending and returns the permutation.
fn ascending_order<T: Real>(values: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    order
}

/// Eigenvalues of a symmetric tridiagonal matrix and the leading `rows`
/// components of its eigenvectors (`rows = 0` for values only, `rows = n`
/// for full vectors). `vectors` is `rows × n`, column `j` belonging to
/// `values[j]`.
pub fn tridiagonal_eigen<T: Real>(diag: &[T], offdiag: &[T], rows: usize) -> Result<Eigen<T, T>> {
    let n = diag.len();
    if n > 0 && offdiag.len() + 1 < n {
        return Err(Error::domain("tridiagonal off-diagonal too short"));
    }
    let rows = rows.min(n);
    let mut d = diag.to_vec();
    let mut e: Vec<T> = offdiag.iter().take(n.saturating_sub(1)).copied().collect();
    e.push(T::zero());
    // column-major `rows × n` slice of the identity
    let mut v = vec![T::zero(); rows * n];
    for j in 0..rows {
        v[j * rows + j] = T::one();
    }
    tql2(&mut d, &mut e, &mut v, rows)?;
    let order = ascending_order(&d);
    let values = order.iter().map(|&j| d[j]).collect();
    let vectors = Matrix::from_fn(rows, n, |r, c| v[order[c] * rows + r]);
    Ok(Eigen { values, vectors })
}

/// Eigen-decomposition of a Hermitian (or real symmetric) matrix.
pub fn hermitian_eigen<T: Real, S: Field<T>>(a: &Matrix<S>) -> Result<Eigen<T, S>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::domain("eigen-decomposition needs a square matrix"));
    }
    if n == 0 {
        return Ok(Eigen {
            values: vec![],
            vectors: Matrix::zeros(0, 0),
        });
    }
    let mut work = a.clone();
    let mut q = Matrix::<S>::identity(n);
    let mut sub = vec![S::zero(); n];
    let mut v = vec![S::zero(); n];
    let mut p = vec![S::zero(); n];
    let two = T::lit(2.0);

    for k in 0..n.saturating_sub(1) {
        let m = n - k - 1;
        // Column k below the diagonal, read from row k (Hermitian).
        for j in 0..m {
            v[j] = work.get(k, k + 1 + j).conj();
        }
        let tail: T = v[1..m].iter().map(|x| x.abs_sqr()).sum();
        if tail == T::zero() {
            sub[k] = v[0];
            continue;
        }
        let xnorm = (tail + v[0].abs_sqr()).sqrt();
        let alpha = -(v[0].unit() * xnorm);
        v[0] -= alpha;
        let vnorm = v[..m].iter().map(|x| x.abs_sqr()).sum::<T>().sqrt();
        for x in v[..m].iter_mut() {
            *x = *x / vnorm;
        }
        // p = B v over the trailing block
        for i in 0..m {
            let row = &work.row(k + 1 + i)[k + 1..];
            p[i] = row
                .iter()
                .zip(&v[..m])
                .fold(S::zero(), |acc, (&b, &x)| acc + b * x);
        }
        let kk: S = v[..m]
            .iter()
            .zip(&p[..m])
            .fold(S::zero(), |acc, (&x, &y)| acc + x.conj() * y);
        for i in 0..m {
            p[i] -= v[i] * kk;
        }
        for i in 0..m {
            let vi2 = v[i] * two;
            let wi2 = p[i] * two;
            let row = &mut work.row_mut(k + 1 + i)[k + 1..];
            for j in 0..m {
                row[j] -= vi2 * p[j].conj() + wi2 * v[j].conj();
            }
        }
        sub[k] = alpha;
        work.set(k + 1, k, alpha);
        work.set(k, k + 1, alpha.conj());
        for j in 1..m {
            work.set(k + 1 + j, k, S::zero());
            work.set(k, k + 1 + j, S::zero());
        }
        // Q <- Q H on columns k+1..n
        for r in 0..n {
            let row = &mut q.row_mut(r)[k + 1..];
            let s = row
                .iter()
                .zip(&v[..m])
                .fold(S::zero(), |acc, (&x, &y)| acc + x * y)
                * two;
            for j in 0..m {
                row[j] -= s * v[j].conj();
            }
        }
    }

    let mut d: Vec<T> = (0..n).map(|i| work.get(i, i).re()).collect();
    let mut e: Vec<T> = sub.iter().map(|x| x.abs()).collect();
    // phases making the off-diagonal real: D = diag(ph), V0 = Q D (column-major)
    let mut ph = vec![S::one(); n];
    for k in 0..n - 1 {
        ph[k + 1] = ph[k] * sub[k].unit();
    }
    let mut vcm = vec![S::zero(); n * n];
    for c in 0..n {
        for r in 0..n {
            vcm[c * n + r] = q.get(r, c) * ph[c];
        }
    }
    tql2(&mut d, &mut e, &mut vcm, n)?;
    let order = ascending_order(&d);
    let values = order.iter().map(|&j| d[j]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| vcm[order[c] * n + r]);
    Ok(Eigen { values, vectors })
}

/// `f(A) = V f(Λ) V†` for a Hermitian `A` and a scalar function on its
/// eigenvalues.
pub fn hermitian_function<T: Real>(
    eig: &Eigen<T, Complex<T>>,
    f: impl Fn(T) -> Complex<T>,
) -> Matrix<Complex<T>> {
    let n = eig.values.len();
    let fv: Vec<Complex<T>> = eig.values.iter().map(|&x| f(x)).collect();
    let mut out = Matrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            let mut acc = Complex::zero();
            for k in 0..n {
                acc += eig.vectors.get(r, k) * fv[k] * eig.vectors.get(c, k).conj();
            }
            out.set(r, c, acc);
        }
    }
    out
}

/// Matrix exponential of a real square matrix by scaling and squaring with
/// a Taylor series.
pub fn expm<T: Real>(a: &Matrix<T>) -> Matrix<T> {
    let n = a.rows();
    let norm = (0..n)
        .map(|r| a.row(r).iter().map(|x| x.abs()).sum::<T>())
        .fold(T::zero(), T::max);
    let mut squarings = 0u32;
    let mut scale = T::one();
    while norm * scale > T::lit(0.5) {
        scale *= T::lit(0.5);
        squarings += 1;
    }
    let x = a.scale(scale);
    let mut term = Matrix::<T>::identity(n);
    let mut sum = Matrix::<T>::identity(n);
    for k in 1..=30 {
        term = term.matmul(&x).scale(T::one() / T::lit(k as f64));
        sum = sum.add(&term);
        if term.norm() <= T::epsilon() * sum.norm() * T::lit(1e-3) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum);
    }
    sum
}

/// Solves `A X = B` by Gaussian elimination with partial pivoting.
pub fn solve<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.rows();
    if a.cols() != n || b.rows() != n {
        return Err(Error::domain("solve: shape mismatch"));
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    let m = b.cols();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| lu.get(i, k).abs().partial_cmp(&lu.get(j, k).abs()).unwrap())
            .unwrap();
        if lu.get(piv, k) == T::zero() {
            return Err(Error::domain("solve: singular matrix"));
        }
        if piv != k {
            for c in 0..n {
                let t = lu.get(k, c);
                lu.set(k, c, lu.get(piv, c));
                lu.set(piv, c, t);
            }
            for c in 0..m {
                let t = x.get(k, c);
                x.set(k, c, x.get(piv, c));
                x.set(piv, c, t);
            }
        }
        let pivot = lu.get(k, k);
        for i in k + 1..n {
            let f = lu.get(i, k) / pivot;
            if f == T::zero() {
                continue;
            }
            for c in k..n {
                lu.set(i, c, lu.get(i, c) - f * lu.get(k, c));
            }
            for c in 0..m {
                x.set(i, c, x.get(i, c) - f * x.get(k, c));
            }
        }
    }
    for k in (0..n).rev() {
        let pivot = lu.get(k, k);
        for c in 0..m {
            let mut acc = x.get(k, c);
            for j in k + 1..n {
                acc -= lu.get(k, j) * x.get(j, c);
            }
            x.set(k, c, acc / pivot);
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type C = Complex<f64>;

    fn residual(a: &Matrix<C>, eig: &Eigen<f64, C>) -> f64 {
        let n = a.rows();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let col: Vec<C> = (0..n).map(|r| eig.vectors.get(r, j)).collect();
            let av = a.matvec(&col);
            for r in 0..n {
                worst = worst.max((av[r] - col[r] * eig.values[j]).norm());
            }
        }
        worst
    }

    #[test]
    fn tridiagonal_two_by_two() {
        let eig = tridiagonal_eigen(&[1.0, 1.0], &[1.0], 2).unwrap();
        assert!((eig.values[0] - 0.0).abs() < 1e-15);
        assert!((eig.values[1] - 2.0).abs() < 1e-15);
        let v = eig.vectors.get(0, 1).abs();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tridiagonal_first_row_only() {
        let d = [0.3, -1.0, 2.0, 0.5];
        let e = [0.7, 0.2, 1.1];
        let full = tridiagonal_eigen(&d, &e, 4).unwrap();
        let first = tridiagonal_eigen(&d, &e, 1).unwrap();
        for j in 0..4 {
            assert!((full.vectors.get(0, j) - first.vectors.get(0, j)).abs() < 1e-14);
        }
        let s: f64 = (0..4).map(|j| first.vectors.get(0, j) * first.vectors.get(0, j)).sum();
        assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn real_symmetric_eigen() {
        let a = Matrix::from_vec(3, 3, vec![2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        let eig = hermitian_eigen(&a).unwrap();
        let s2 = 2f64.sqrt();
        let expect = [2.0 - s2, 2.0, 2.0 + s2];
        for (x, y) in eig.values.iter().zip(expect) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn expm_of_rotation_generator() {
        let a = Matrix::from_vec(2, 2, vec![0.0, -1.0, 1.0, 0.0]);
        let e = expm(&a);
        assert!((e.get(0, 0) - 1f64.cos()).abs() < 1e-14);
        assert!((e.get(1, 0) - 1f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn solve_matches_inverse() {
        let a = Matrix::from_vec(2, 2, vec![0.0, 2.0, 1.0, 1.0]);
        let b = Matrix::<f64>::identity(2);
        let x = solve(&a, &b).unwrap();
        let id = a.matmul(&x);
        assert!((id.get(0, 0) - 1.0).abs() < 1e-15 && id.get(0, 1).abs() < 1e-15);
    }

    fn hermitian_strategy() -> impl Strategy<Value = Matrix<C>> {
        (1usize..12).prop_flat_map(|n| {
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |raw| {
                let m = Matrix::from_fn(n, n, |r, c| C::new(raw[r * n + c].0, raw[r * n + c].1));
                let mh = m.adjoint();
                m.add(&mh)
            })
        })
    }

    proptest! {
        #[test]
        fn hermitian_eigen_is_a_decomposition(a in hermitian_strategy()) {
            let eig = hermitian_eigen(&a).unwrap();
            prop_assert!(residual(&a, &eig) < 1e-12);
            let vhv = eig.vectors.adjoint().matmul(&eig.vectors);
            let n = a.rows();
            for r in 0..n {
                for c in 0..n {
                    let target = if r == c { 1.0 } else { 0.0 };
                    prop_assert!((vhv.get(r, c) - target).norm() < 1e-12);
                }
            }
            for w in eig.values.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
        }
    }
}

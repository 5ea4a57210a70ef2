//! Fixed-size 3×3 matrix algebra.
//!
//! [`Mat3`] is a general dense 3×3 matrix and [`SymMat3`] stores the six
//! independent entries of a symmetric one. Everything here is value-typed and
//! allocation free.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense 3×3 matrix, `m.0[row][col]`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Mat3(rows)
    }

    pub fn from_fn(f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        Mat3([[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]])
    }

    /// Builds a matrix from nine entries in row-major order.
    pub fn from_row_major(v: [f64; 9]) -> Self {
        Mat3([[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]])
    }

    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.0;
        [
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        ]
    }

    /// Skew matrix `W` with `W v = axis × v`.
    pub fn cross_matrix(axis: [f64; 3]) -> Self {
        let [x, y, z] = axis;
        Mat3([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    }

    pub fn transpose(&self) -> Self {
        Mat3::from_fn(|i, j| self.0[j][i])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn cofactor(&self) -> Self {
        cofactor(self)
    }

    /// `None` when the matrix is exactly singular.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(self.cofactor().transpose() * (1.0 / det))
    }

    /// Frobenius inner product `tr(selfᵀ other)`.
    pub fn dot(&self, other: &Mat3) -> f64 {
        frobenius(self, other)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    /// Symmetric part `(A + Aᵀ)/2`.
    pub fn sym(&self) -> SymMat3 {
        SymMat3::from_mat3(self)
    }

    /// Skew-symmetric part `(A − Aᵀ)/2`.
    pub fn skew(&self) -> Mat3 {
        (*self - self.transpose()) * 0.5
    }

    pub fn powi(&self, k: u32) -> Mat3 {
        let mut out = Mat3::IDENTITY;
        let mut base = *self;
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                out = out * base;
            }
            base = base * base;
            e >>= 1;
        }
        out
    }
}

impl Index<(usize, usize)> for Mat3 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat3 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, rhs: Mat3) -> Mat3 {
        Mat3::from_fn(|i, j| self.0[i][j] + rhs.0[i][j])
    }
}

impl AddAssign for Mat3 {
    fn add_assign(&mut self, rhs: Mat3) {
        *self = *self + rhs;
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, rhs: Mat3) -> Mat3 {
        Mat3::from_fn(|i, j| self.0[i][j] - rhs.0[i][j])
    }
}

impl SubAssign for Mat3 {
    fn sub_assign(&mut self, rhs: Mat3) {
        *self = *self - rhs;
    }
}

impl Neg for Mat3 {
    type Output = Mat3;
    fn neg(self) -> Mat3 {
        self * -1.0
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: Mat3) -> Mat3 {
        Mat3::from_fn(|i, j| (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum())
    }
}

impl Mul<f64> for Mat3 {
    type Output = Mat3;
    fn mul(self, s: f64) -> Mat3 {
        Mat3::from_fn(|i, j| self.0[i][j] * s)
    }
}

impl Mul<Mat3> for f64 {
    type Output = Mat3;
    fn mul(self, m: Mat3) -> Mat3 {
        m * self
    }
}

impl Mul<[f64; 3]> for Mat3 {
    type Output = [f64; 3];
    fn mul(self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }
}

/// Symmetric 3×3 matrix stored as `[s11, s22, s33, s12, s13, s23]`.
///
/// The same order is used wherever six symmetric entries are read or
/// written (CSV columns, scenario files, the `witness` subcommand).
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct SymMat3(pub [f64; 6]);

impl SymMat3 {
    pub const ZERO: SymMat3 = SymMat3([0.0; 6]);
    pub const IDENTITY: SymMat3 = SymMat3([1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);

    pub fn new(s11: f64, s22: f64, s33: f64, s12: f64, s13: f64, s23: f64) -> Self {
        SymMat3([s11, s22, s33, s12, s13, s23])
    }

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        SymMat3([a, b, c, 0.0, 0.0, 0.0])
    }

    /// Symmetric part of a general matrix.
    pub fn from_mat3(m: &Mat3) -> Self {
        let a = &m.0;
        SymMat3([
            a[0][0],
            a[1][1],
            a[2][2],
            0.5 * (a[0][1] + a[1][0]),
            0.5 * (a[0][2] + a[2][0]),
            0.5 * (a[1][2] + a[2][1]),
        ])
    }

    pub fn to_mat3(&self) -> Mat3 {
        let [a, b, c, d, e, f] = self.0;
        Mat3([[a, d, e], [d, b, f], [e, f, c]])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        const IDX: [[usize; 3]; 3] = [[0, 3, 4], [3, 1, 5], [4, 5, 2]];
        self.0[IDX[i][j]]
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    pub fn det(&self) -> f64 {
        self.to_mat3().det()
    }

    pub fn dot(&self, other: &SymMat3) -> f64 {
        let a = &self.0;
        let b = &other.0;
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + 2.0 * (a[3] * b[3] + a[4] * b[4] + a[5] * b[5])
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// `A S Aᵀ`.
    pub fn congruence(&self, a: &Mat3) -> SymMat3 {
        (*a * self.to_mat3() * a.transpose()).sym()
    }

    /// Deviatoric part `S − (tr S / 3) I`.
    pub fn deviator(&self) -> SymMat3 {
        *self - SymMat3::IDENTITY * (self.trace() / 3.0)
    }

    pub fn eigvals(&self) -> [f64; 3] {
        sym_eigs(self)
    }

    pub fn min_eig(&self) -> f64 {
        sym_eigs(self)[0]
    }
}

impl Add for SymMat3 {
    type Output = SymMat3;
    fn add(self, rhs: SymMat3) -> SymMat3 {
        SymMat3(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl AddAssign for SymMat3 {
    fn add_assign(&mut self, rhs: SymMat3) {
        *self = *self + rhs;
    }
}

impl Sub for SymMat3 {
    type Output = SymMat3;
    fn sub(self, rhs: SymMat3) -> SymMat3 {
        SymMat3(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Neg for SymMat3 {
    type Output = SymMat3;
    fn neg(self) -> SymMat3 {
        self * -1.0
    }
}

impl Mul<f64> for SymMat3 {
    type Output = SymMat3;
    fn mul(self, s: f64) -> SymMat3 {
        SymMat3(self.0.map(|v| v * s))
    }
}

impl Mul<SymMat3> for f64 {
    type Output = SymMat3;
    fn mul(self, s: SymMat3) -> SymMat3 {
        s * self
    }
}

impl From<SymMat3> for Mat3 {
    fn from(s: SymMat3) -> Mat3 {
        s.to_mat3()
    }
}

/// Frobenius inner product `tr(aᵀ b)`.
pub fn frobenius(a: &Mat3, b: &Mat3) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += a.0[i][j] * b.0[i][j];
        }
    }
    acc
}

/// Cofactor matrix. For `det a = 1` this is `a⁻ᵀ`.
pub fn cofactor(a: &Mat3) -> Mat3 {
    let m = &a.0;
    Mat3([
        [
            m[1][1] * m[2][2] - m[1][2] * m[2][1],
            m[1][2] * m[2][0] - m[1][0] * m[2][2],
            m[1][0] * m[2][1] - m[1][1] * m[2][0],
        ],
        [
            m[0][2] * m[2][1] - m[0][1] * m[2][2],
            m[0][0] * m[2][2] - m[0][2] * m[2][0],
            m[0][1] * m[2][0] - m[0][0] * m[2][1],
        ],
        [
            m[0][1] * m[1][2] - m[0][2] * m[1][1],
            m[0][2] * m[1][0] - m[0][0] * m[1][2],
            m[0][0] * m[1][1] - m[0][1] * m[1][0],
        ],
    ])
}

/// Eigenvalues of a symmetric matrix in ascending order.
///
/// Uses the trigonometric solution of the characteristic cubic and falls
/// back to cyclic Jacobi when the spectrum is nearly degenerate, where the
/// cubic loses accuracy.
pub fn sym_eigs(s: &SymMat3) -> [f64; 3] {
    let scale = s.norm();
    if scale == 0.0 {
        return [0.0; 3];
    }
    if s.0[3] == 0.0 && s.0[4] == 0.0 && s.0[5] == 0.0 {
        let mut d = [s.0[0], s.0[1], s.0[2]];
        d.sort_by(f64::total_cmp);
        return d;
    }
    let mean = s.trace() / 3.0;
    let dev = *s - SymMat3::IDENTITY * mean;
    let p = (dev.dot(&dev) / 6.0).sqrt();
    if p <= 1e-6 * scale {
        return jacobi_eigen(s).0;
    }
    let r = 0.5 * (dev * (1.0 / p)).det();
    if 1.0 - r.abs() < 1e-8 {
        return jacobi_eigen(s).0;
    }
    let phi = r.clamp(-1.0, 1.0).acos() / 3.0;
    let hi = mean + 2.0 * p * phi.cos();
    let lo = mean + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let mid = 3.0 * mean - hi - lo;
    let mut out = [lo, mid, hi];
    out.sort_by(f64::total_cmp);
    out
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (as the columns of
/// the returned matrix), so that `s = Q diag(λ) Qᵀ`.
pub fn sym_eigen(s: &SymMat3) -> ([f64; 3], Mat3) {
    jacobi_eigen(s)
}

fn jacobi_eigen(s: &SymMat3) -> ([f64; 3], Mat3) {
    let mut a = s.to_mat3();
    let mut v = Mat3::IDENTITY;
    let norm2 = s.dot(s);
    if norm2 == 0.0 {
        return ([0.0; 3], v);
    }
    for _ in 0..64 {
        let off = a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2);
        if off <= 1e-36 * norm2 {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let apq = a[(p, q)];
            if apq == 0.0 {
                continue;
            }
            let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let sn = t * c;
            let mut rot = Mat3::IDENTITY;
            rot[(p, p)] = c;
            rot[(q, q)] = c;
            rot[(p, q)] = sn;
            rot[(q, p)] = -sn;
            a = rot.transpose() * a * rot;
            a[(p, q)] = 0.0;
            a[(q, p)] = 0.0;
            v = v * rot;
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let vals = order.map(|i| a[(i, i)]);
    let vecs = Mat3::from_fn(|row, col| v[(row, order[col])]);
    (vals, vecs)
}

/// Default scale-aware PSD tolerance, `1e-10 (1 + ‖s‖)`.
pub fn psd_tolerance(s: &SymMat3) -> f64 {
    1e-10 * (1.0 + s.norm())
}

/// True iff the smallest eigenvalue is at least `-tol`.
pub fn is_psd(s: &SymMat3, tol: f64) -> bool {
    debug_assert!(tol >= 0.0);
    sym_eigs(s)[0] >= -tol
}

/// Matrix exponential by scaling and squaring with a truncated Taylor
/// series. `tol` bounds the relative truncation error.
pub fn mat_exp(a: &Mat3, tol: f64) -> Mat3 {
    let norm = a.norm();
    if norm == 0.0 {
        return Mat3::IDENTITY;
    }
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let b = *a * 2f64.powi(-squarings);
    let stop = (tol * 2f64.powi(-squarings) * 0.1).max(0.5 * f64::EPSILON);
    let mut sum = Mat3::IDENTITY;
    let mut term = Mat3::IDENTITY;
    for k in 1..=40 {
        term = term * b * (1.0 / k as f64);
        sum += term;
        if term.norm() <= stop * sum.norm() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

/// `B:C − 3 (det B)^{1/3} (det C)^{1/3}` for positive semi-definite `B`, `C`.
///
/// Nonnegative up to roundoff; zero when `B = C = I`.
pub fn trace_inequality_gap(b: &SymMat3, c: &SymMat3) -> Result<f64> {
    if !is_psd(b, 1e-9) {
        return Err(Error::Precondition(
            "first argument is not positive semi-definite".into(),
        ));
    }
    if !is_psd(c, 1e-9) {
        return Err(Error::Precondition(
            "second argument is not positive semi-definite".into(),
        ));
    }
    Ok(b.dot(c) - 3.0 * b.det().cbrt() * c.det().cbrt())
}

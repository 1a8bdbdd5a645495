//! Fixed-size 2×2 complex matrices.

use std::ops::{Add, Mul, Sub};

use serde::{Serialize, Serializer};

use crate::c64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[c64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[c64::new(0.0, 0.0); 2]; 2]);
    pub const IDENTITY: Mat2 = Mat2([
        [c64::new(1.0, 0.0), c64::new(0.0, 0.0)],
        [c64::new(0.0, 0.0), c64::new(1.0, 0.0)],
    ]);

    pub fn real(a: [[f64; 2]; 2]) -> Self {
        Mat2([
            [c64::new(a[0][0], 0.0), c64::new(a[0][1], 0.0)],
            [c64::new(a[1][0], 0.0), c64::new(a[1][1], 0.0)],
        ])
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Mat2::real([[a, 0.0], [0.0, b]])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.0[i][j]
    }

    pub fn scale(&self, s: f64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn trace(&self) -> c64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> c64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Eigenvalues (ascending) of the Hermitian part.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let a = self.0[0][0].re;
        let d = self.0[1][1].re;
        let b = 0.5 * (self.0[0][1] + self.0[1][0].conj());
        let mean = 0.5 * (a + d);
        let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean - radius, mean + radius]
    }

    /// Spectral norm of a Hermitian matrix.
    pub fn hermitian_norm(&self) -> f64 {
        let [lo, hi] = self.hermitian_eigenvalues();
        lo.abs().max(hi.abs())
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2([[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + o.scale(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        let e = |i: usize, j: usize| a[i][0] * b[0][j] + a[i][1] * b[1][j];
        Mat2([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]])
    }
}

impl Serialize for Mat2 {
    /// Row-major `[[re, im], ...]` pairs.
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = self
            .0
            .iter()
            .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(s)
    }
}

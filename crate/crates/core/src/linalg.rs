//! Fixed-capacity dense vectors used for chart coordinates, tangent
//! components and ambient (quadric-model) coordinates.
//!
//! Every kernel quantity lives in at most `MAX_DIM` dimensions, so a `Copy`
//! array avoids heap traffic in the hot loops of the moving-planes search.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest supported ambient dimension (chart dimension is at most one less).
pub const MAX_DIM: usize = 8;

#[derive(Clone, Copy, PartialEq)]
pub struct Vector {
    data: [f64; MAX_DIM],
    len: usize,
}

impl Vector {
    pub fn zeros(len: usize) -> Self {
        assert!(len <= MAX_DIM, "dimension {len} exceeds MAX_DIM");
        Self { data: [0.0; MAX_DIM], len }
    }

    /// Standard basis vector `e_axis` of length `len`.
    pub fn basis(len: usize, axis: usize) -> Self {
        let mut v = Self::zeros(len);
        v.data[axis] = 1.0;
        v
    }

    pub fn from_slice(values: &[f64]) -> Self {
        let mut v = Self::zeros(values.len());
        v.data[..values.len()].copy_from_slice(values);
        v
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> f64) -> Self {
        let mut v = Self::zeros(len);
        for i in 0..len {
            v.data[i] = f(i);
        }
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data[..self.len]
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.len, other.len);
        let mut s = 0.0;
        for i in 0..self.len {
            s += self.data[i] * other.data[i];
        }
        s
    }

    #[inline]
    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Unit vector in the same direction, or `None` for a (near) zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n > 1e-300 && n.is_finite() {
            Some(*self * (1.0 / n))
        } else {
            None
        }
    }

    /// Copy with the last `k` entries dropped.
    pub fn truncated(&self, len: usize) -> Self {
        assert!(len <= self.len);
        let mut v = *self;
        for i in len..self.len {
            v.data[i] = 0.0;
        }
        v.len = len;
        v
    }

    /// Copy with one more trailing entry.
    pub fn extended(&self, value: f64) -> Self {
        let mut v = *self;
        v.data[self.len] = value;
        v.len += 1;
        v
    }

    pub fn max_abs(&self) -> f64 {
        self.as_slice().iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|x| x.is_finite())
    }

    /// `self + s * other`
    #[inline]
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        let mut v = *self;
        for i in 0..self.len {
            v.data[i] += s * other.data[i];
        }
        v
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (*self - *other).norm()
    }

    /// 3-vector cross product.
    pub fn cross(&self, other: &Self) -> Self {
        debug_assert!(self.len == 3 && other.len == 3);
        let (a, b) = (&self.data, &other.data);
        Self::from_slice(&[
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ])
    }
}

impl Default for Vector {
    fn default() -> Self {
        Self::zeros(0)
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    #[inline]
    fn index(&self, i: usize) -> &f64 {
        debug_assert!(i < self.len);
        &self.data[i]
    }
}

impl IndexMut<usize> for Vector {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        debug_assert!(i < self.len);
        &mut self.data[i]
    }
}

impl Add for Vector {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        debug_assert_eq!(self.len, rhs.len);
        for i in 0..self.len {
            self.data[i] += rhs.data[i];
        }
        self
    }
}

impl AddAssign for Vector {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sub for Vector {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: Self) -> Self {
        debug_assert_eq!(self.len, rhs.len);
        for i in 0..self.len {
            self.data[i] -= rhs.data[i];
        }
        self
    }
}

impl SubAssign for Vector {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl Mul<f64> for Vector {
    type Output = Self;
    #[inline]
    fn mul(mut self, s: f64) -> Self {
        for i in 0..self.len {
            self.data[i] *= s;
        }
        self
    }
}

impl Mul<Vector> for f64 {
    type Output = Vector;
    #[inline]
    fn mul(self, v: Vector) -> Vector {
        v * self
    }
}

impl Neg for Vector {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl Serialize for Vector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.as_slice().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Vector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let values = Vec::<f64>::deserialize(deserializer)?;
        if values.len() > MAX_DIM {
            return Err(serde::de::Error::custom(format!(
                "vector of length {} exceeds the supported maximum {MAX_DIM}",
                values.len()
            )));
        }
        Ok(Vector::from_slice(&values))
    }
}

/// Gram–Schmidt orthonormalization under the Euclidean dot product.
/// Returns `None` when the input vectors are (numerically) dependent.
pub fn gram_schmidt(vectors: &[Vector], min_norm: f64) -> Option<Vec<Vector>> {
    let mut out: Vec<Vector> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = *v;
        for _ in 0..2 {
            for e in &out {
                w = w.axpy(-w.dot(e), e);
            }
        }
        if w.norm() < min_norm {
            return None;
        }
        out.push(w.normalized()?);
    }
    Some(out)
}

/// Unit vector orthogonal to the span of `n - 1` independent vectors in `R^n`.
pub fn orthogonal_complement(vectors: &[Vector], min_norm: f64) -> Option<Vector> {
    let n = vectors.first()?.len();
    if vectors.len() + 1 != n {
        return None;
    }
    let basis = gram_schmidt(vectors, min_norm)?;
    // Pick the coordinate axis that survives projection best.
    let mut best: Option<Vector> = None;
    for axis in 0..n {
        let mut w = Vector::basis(n, axis);
        for _ in 0..2 {
            for e in &basis {
                w = w.axpy(-w.dot(e), e);
            }
        }
        if best.is_none_or(|b| w.norm() > b.norm()) {
            best = Some(w);
        }
    }
    best.and_then(|w| w.normalized())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_norms() {
        let a = Vector::from_slice(&[1.0, 2.0, 2.0]);
        let b = Vector::basis(3, 1);
        assert_eq!(a.norm(), 3.0);
        assert_eq!((a - b).as_slice(), &[1.0, 1.0, 2.0]);
        assert_eq!(a.axpy(2.0, &b).as_slice(), &[1.0, 4.0, 2.0]);
        assert_eq!(a.cross(&b).as_slice(), &[-2.0, 0.0, 1.0]);
        assert_eq!(a.extended(5.0).len(), 4);
        assert_eq!(a.extended(5.0).truncated(3), a);
        assert!(Vector::zeros(3).normalized().is_none());
    }

    #[test]
    fn complement_is_orthogonal() {
        let u = Vector::from_slice(&[1.0, 1.0, 0.0]);
        let v = Vector::from_slice(&[0.0, 1.0, 1.0]);
        let n = orthogonal_complement(&[u, v], 1e-12).unwrap();
        assert!(n.dot(&u).abs() < 1e-14 && n.dot(&v).abs() < 1e-14);
        assert!((n.norm() - 1.0).abs() < 1e-14);
        assert!(orthogonal_complement(&[u, u * 2.0], 1e-9).is_none());
    }

    #[test]
    fn serde_round_trip_keeps_length() {
        let a = Vector::from_slice(&[0.5, -1.0]);
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, "[0.5,-1.0]");
        let b: Vector = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
    }
}

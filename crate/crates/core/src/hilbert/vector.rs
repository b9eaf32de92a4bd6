use std::ops::{Add, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};

/// Dense real vector of fixed dimension.
///
/// Arithmetic operators (`+`, `-`, `*`) panic on dimension mismatch, like
/// `ndarray`; the fallible entry points ([`Vector::dot`], [`dot`]) return a
/// [`crate::Error::DimensionMismatch`] instead.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Self {
        Vector(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize) -> f64) -> Self {
        Vector((0..dim).map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn dot(&self, other: &Vector) -> Result<f64> {
        check_dim("dot", self.len(), other.len())?;
        Ok(self.dot_unchecked(other))
    }

    pub(crate) fn dot_unchecked(&self, other: &Vector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.iter().map(|a| a * a).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    pub fn norm_l1(&self) -> f64 {
        self.0.iter().map(|a| a.abs()).sum()
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &Vector) -> Vector {
        assert_eq!(self.len(), other.len(), "axpy dimension mismatch");
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + alpha * b).collect())
    }

    pub fn scale(&self, alpha: f64) -> Vector {
        self.map(|a| alpha * a)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Vector {
        Vector(self.0.iter().map(|&a| f(a)).collect())
    }

    pub fn zip_map(&self, other: &Vector, f: impl Fn(f64, f64) -> f64) -> Vector {
        assert_eq!(self.len(), other.len(), "zip_map dimension mismatch");
        Vector(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|a| a.is_finite())
    }
}

/// Canonical inner product `sum_i a_i b_i`.
pub fn dot(a: &Vector, b: &Vector) -> Result<f64> {
    a.dot(b)
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl<const N: usize> From<[f64; N]> for Vector {
    fn from(v: [f64; N]) -> Self {
        Vector(v.to_vec())
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &Vector {
    type Output = Vector;
    fn mul(self, rhs: f64) -> Vector {
        self.scale(rhs)
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.map(|a| -a)
    }
}

/// A point `(x, y)` of the product space `H x G` with the product inner product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PPoint {
    pub x: Vector,
    pub y: Vector,
}

impl PPoint {
    pub fn new(x: Vector, y: Vector) -> Self {
        PPoint { x, y }
    }

    pub fn zeros(primal_dim: usize, dual_dim: usize) -> Self {
        PPoint::new(Vector::zeros(primal_dim), Vector::zeros(dual_dim))
    }

    pub fn dot(&self, other: &PPoint) -> Result<f64> {
        Ok(self.x.dot(&other.x)? + self.y.dot(&other.y)?)
    }

    pub fn norm_squared(&self) -> f64 {
        self.x.norm_squared() + self.y.norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn check_dims(&self, primal_dim: usize, dual_dim: usize) -> Result<()> {
        check_dim("primal component", primal_dim, self.x.len())?;
        check_dim("dual component", dual_dim, self.y.len())
    }
}

impl Sub for &PPoint {
    type Output = PPoint;
    fn sub(self, rhs: &PPoint) -> PPoint {
        PPoint::new(&self.x - &rhs.x, &self.y - &rhs.y)
    }
}

impl Add for &PPoint {
    type Output = PPoint;
    fn add(self, rhs: &PPoint) -> PPoint {
        PPoint::new(&self.x + &rhs.x, &self.y + &rhs.y)
    }
}

impl Mul<f64> for &PPoint {
    type Output = PPoint;
    fn mul(self, rhs: f64) -> PPoint {
        PPoint::new(self.x.scale(rhs), self.y.scale(rhs))
    }
}

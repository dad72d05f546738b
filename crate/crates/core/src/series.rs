//! Truncated power series in `q` and degree-capped polynomials in `w`.
//!
//! A [`TruncSeries`] of order `Q` is known modulo `q^(Q+1)`; combining two
//! series keeps the smaller order. A [`WPoly`] is a polynomial in `w` whose
//! coefficients are such series, truncated above a fixed `w`-degree cap.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Commutative coefficient ring for [`TruncSeries`].
pub trait Coeff:
    Clone
    + PartialEq
    + Debug
    + Send
    + Sync
    + Zero
    + One
    + Neg<Output = Self>
    + Sub<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
{
    /// Multiplicative inverse, if one exists in the ring.
    fn inverse(&self) -> Option<Self>;
}

impl Zero for Rational {
    fn zero() -> Self {
        Rational::zero()
    }
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }
}

impl One for Rational {
    fn one() -> Self {
        Rational::one()
    }
}

impl Coeff for Rational {
    fn inverse(&self) -> Option<Self> {
        self.recip().ok()
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TruncSeries<C = Rational> {
    coeffs: Vec<C>,
}

impl<C: Coeff> TruncSeries<C> {
    /// Builds a series of the given order, padding with zeros or dropping
    /// terms beyond `q^order`.
    pub fn from_coeffs(mut coeffs: Vec<C>, order: usize) -> Self {
        coeffs.resize(order + 1, C::zero());
        TruncSeries { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::from_coeffs(Vec::new(), order)
    }

    pub fn one(order: usize) -> Self {
        Self::constant(C::one(), order)
    }

    pub fn constant(c: C, order: usize) -> Self {
        Self::from_coeffs(vec![c], order)
    }

    /// `c * q^k`; vanishes if `k > order`.
    pub fn monomial(c: C, k: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if k <= order {
            s.coeffs[k] = c;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &C {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(C::is_zero)
    }

    /// Index of the first nonzero coefficient, `None` for the zero series.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order(), "cannot raise precision by truncation");
        TruncSeries { coeffs: self.coeffs[..=order].to_vec() }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let order = self.order().min(rhs.order());
        let coeffs = (0..=order).map(|k| self.coeffs[k].clone() + &rhs.coeffs[k]).collect();
        TruncSeries { coeffs }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let order = self.order().min(rhs.order());
        let coeffs = (0..=order).map(|k| self.coeffs[k].clone() - &rhs.coeffs[k]).collect();
        TruncSeries { coeffs }
    }

    pub fn neg(&self) -> Self {
        TruncSeries { coeffs: self.coeffs.iter().cloned().map(Neg::neg).collect() }
    }

    pub fn scale(&self, c: &C) -> Self {
        TruncSeries { coeffs: self.coeffs.iter().map(|a| a.clone() * c).collect() }
    }

    /// Cauchy product modulo `q^(min order + 1)`.
    pub fn mul(&self, rhs: &Self) -> Self {
        let order = self.order().min(rhs.order());
        let mut out = vec![C::zero(); order + 1];
        for (i, a) in self.coeffs[..=order].iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs[..=order - i].iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                out[i + j] = std::mem::replace(&mut out[i + j], C::zero()) + &(a.clone() * b);
            }
        }
        TruncSeries { coeffs: out }
    }

    /// Multiplication by `q^k`.
    pub fn shift(&self, k: usize) -> Self {
        let order = self.order();
        let mut coeffs = vec![C::zero(); order + 1];
        for i in 0..=order {
            if i + k > order {
                break;
            }
            coeffs[i + k] = self.coeffs[i].clone();
        }
        TruncSeries { coeffs }
    }

    pub fn pow(&self, exp: usize) -> Self {
        let mut acc = Self::one(self.order());
        for _ in 0..exp {
            acc = acc.mul(self);
        }
        acc
    }

    /// The series `r` with `self * r = 1` to this order.
    pub fn reciprocal(&self) -> Result<Self> {
        let inv0 = self.coeffs[0].inverse().ok_or(Error::NotInvertible)?;
        let order = self.order();
        let mut r: Vec<C> = Vec::with_capacity(order + 1);
        r.push(inv0.clone());
        for k in 1..=order {
            let mut acc = C::zero();
            for j in 1..=k {
                if self.coeffs[j].is_zero() {
                    continue;
                }
                acc = acc + &(self.coeffs[j].clone() * &r[k - j]);
            }
            r.push(-(acc * &inv0));
        }
        Ok(TruncSeries { coeffs: r })
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        Ok(self.mul(&rhs.reciprocal()?))
    }
}

impl TruncSeries<Rational> {
    /// Exact value at `q = point` of the stored coefficients, treating the
    /// series as a polynomial.
    pub fn eval_polynomial(&self, point: &Rational) -> Rational {
        self.coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * point + c)
    }
}

/// Operand for [`series_ring_ops`].
#[derive(Debug, Clone, Copy)]
pub enum SeriesOperand<'a, C> {
    Series(&'a TruncSeries<C>),
    Scalar(&'a C),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesOp {
    Add,
    Sub,
    Mul,
    Scale,
}

pub fn series_ring_ops<C: Coeff>(
    kind: SeriesOp,
    a: &TruncSeries<C>,
    b: SeriesOperand<'_, C>,
) -> Result<TruncSeries<C>> {
    match (kind, b) {
        (SeriesOp::Add, SeriesOperand::Series(b)) => Ok(a.add(b)),
        (SeriesOp::Sub, SeriesOperand::Series(b)) => Ok(a.sub(b)),
        (SeriesOp::Mul, SeriesOperand::Series(b)) => Ok(a.mul(b)),
        (SeriesOp::Scale, SeriesOperand::Scalar(c)) => Ok(a.scale(c)),
        (SeriesOp::Add | SeriesOp::Sub, SeriesOperand::Scalar(c)) => {
            let c = TruncSeries::constant(c.clone(), a.order());
            Ok(if kind == SeriesOp::Add { a.add(&c) } else { a.sub(&c) })
        }
        (SeriesOp::Mul, SeriesOperand::Scalar(c)) => Ok(a.scale(c)),
        (SeriesOp::Scale, SeriesOperand::Series(_)) => Err(Error::Shape("scale expects a scalar operand".into())),
    }
}

/// Product of `factor(1) * factor(2) * ... * factor(order)` modulo
/// `q^(order+1)`.
///
/// Each factor must satisfy `valuation(factor(h) - 1) >= h`; then the
/// factors with `h > order` are all `1` at this precision and the result
/// equals the full infinite product.
pub fn truncated_infinite_product<C, F>(factor: F, order: usize) -> Result<TruncSeries<C>>
where
    C: Coeff,
    F: Fn(usize) -> TruncSeries<C>,
{
    let mut acc = TruncSeries::one(order);
    for h in 1..=order {
        let f = factor(h);
        if f.order() < order {
            return Err(Error::Shape(format!("factor {h} has order {} below requested {order}", f.order())));
        }
        let f = f.truncate(order);
        if let Some(v) = f.sub(&TruncSeries::one(order)).valuation() {
            if v < h {
                return Err(Error::Valuation { index: h, found: v });
            }
        }
        acc = acc.mul(&f);
    }
    Ok(acc)
}

/// Polynomial in `w` with [`TruncSeries`] coefficients, `w`-degree capped.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WPoly<C = Rational> {
    coeffs: Vec<TruncSeries<C>>,
}

impl<C: Coeff> WPoly<C> {
    pub fn zero(degree_cap: usize, order: usize) -> Self {
        WPoly { coeffs: vec![TruncSeries::zero(order); degree_cap + 1] }
    }

    pub fn one(degree_cap: usize, order: usize) -> Self {
        Self::constant(TruncSeries::one(order), degree_cap)
    }

    pub fn constant(c: TruncSeries<C>, degree_cap: usize) -> Self {
        let mut p = Self::zero(degree_cap, c.order());
        p.coeffs[0] = c;
        p
    }

    /// Builds from explicit `w`-coefficients; all must share one order.
    pub fn from_coeffs(mut coeffs: Vec<TruncSeries<C>>, degree_cap: usize) -> Result<Self> {
        let order = coeffs.first().map(TruncSeries::order).ok_or_else(|| Error::Shape("empty w-polynomial".into()))?;
        if coeffs.iter().any(|c| c.order() != order) {
            return Err(Error::Shape("w-coefficients have differing q-orders".into()));
        }
        coeffs.truncate(degree_cap + 1);
        coeffs.resize(degree_cap + 1, TruncSeries::zero(order));
        Ok(WPoly { coeffs })
    }

    /// `c0 + c1 * w`.
    pub fn linear(c0: TruncSeries<C>, c1: TruncSeries<C>, degree_cap: usize) -> Result<Self> {
        Self::from_coeffs(vec![c0, c1], degree_cap)
    }

    pub fn degree_cap(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn order(&self) -> usize {
        self.coeffs[0].order()
    }

    pub fn coeffs(&self) -> &[TruncSeries<C>] {
        &self.coeffs
    }

    pub fn coefficient_of_w(&self, k: usize) -> Result<&TruncSeries<C>> {
        self.coeffs.get(k).ok_or(Error::DegreeCap { requested: k, cap: self.degree_cap() })
    }

    fn check_shape(&self, rhs: &Self) -> Result<()> {
        if self.degree_cap() != rhs.degree_cap() || self.order() != rhs.order() {
            return Err(Error::Shape(format!(
                "(W={}, Q={}) vs (W={}, Q={})",
                self.degree_cap(),
                self.order(),
                rhs.degree_cap(),
                rhs.order()
            )));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_shape(rhs)?;
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a.add(b)).collect();
        Ok(WPoly { coeffs })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.check_shape(rhs)?;
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a.sub(b)).collect();
        Ok(WPoly { coeffs })
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check_shape(rhs)?;
        let cap = self.degree_cap();
        let mut out = Self::zero(cap, self.order());
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs[..=cap - i].iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                out.coeffs[i + j] = out.coeffs[i + j].add(&a.mul(b));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: &TruncSeries<C>) -> Self {
        WPoly { coeffs: self.coeffs.iter().map(|c| c.mul(s)).collect() }
    }

    /// Multiplication by `w`, dropping the top coefficient.
    pub fn shift_w(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        coeffs.push(TruncSeries::zero(self.order()));
        coeffs.extend_from_slice(&self.coeffs[..self.degree_cap()]);
        WPoly { coeffs }
    }

    /// Inverse in the ring of `w`-series truncated at the degree cap.
    pub fn reciprocal(&self) -> Result<Self> {
        let inv0 = self.coeffs[0].reciprocal()?;
        let cap = self.degree_cap();
        let mut r: Vec<TruncSeries<C>> = vec![inv0.clone()];
        for k in 1..=cap {
            let mut acc = TruncSeries::zero(self.order());
            for j in 1..=k {
                acc = acc.add(&self.coeffs[j].mul(&r[k - j]));
            }
            r.push(acc.mul(&inv0).neg());
        }
        Ok(WPoly { coeffs: r })
    }
}

#[derive(Debug, Clone, Copy)]
pub enum WPolyOp<'a, C> {
    Add(&'a WPoly<C>),
    Mul(&'a WPoly<C>),
    CoefficientOfW(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum WPolyValue<C> {
    Poly(WPoly<C>),
    Series(TruncSeries<C>),
}

pub fn wpoly_ops<C: Coeff>(a: &WPoly<C>, op: WPolyOp<'_, C>) -> Result<WPolyValue<C>> {
    Ok(match op {
        WPolyOp::Add(b) => WPolyValue::Poly(a.add(b)?),
        WPolyOp::Mul(b) => WPolyValue::Poly(a.mul(b)?),
        WPolyOp::CoefficientOfW(k) => WPolyValue::Series(a.coefficient_of_w(k)?.clone()),
    })
}

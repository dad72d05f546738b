//! q-Pochhammer symbols, Gaussian binomials, the rising product
//! `(x+1)(x+q)...(x+q^(i-1))` and the alternating q-Rice sum.
//!
//! The building blocks are generic over [`Scalar`], so the same code runs at
//! an exact rational `q` and with `q` as the indeterminate of a
//! [`TruncSeries`].

use std::fmt::Debug;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::series::TruncSeries;

/// Values the identity evaluators compute with: exact rationals, or
/// truncated series in `q` over the rationals.
pub trait Scalar: Clone + PartialEq + Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    /// Embeds a rational constant in the same ring (and order) as `self`.
    fn embed(&self, r: &Rational) -> Self;
    fn plus(&self, rhs: &Self) -> Self;
    fn minus(&self, rhs: &Self) -> Self;
    fn times(&self, rhs: &Self) -> Self;
    fn negate(&self) -> Self;
    fn try_div(&self, rhs: &Self) -> Result<Self>;
    fn is_zero_value(&self) -> bool;

    fn power(&self, exp: usize) -> Self {
        let mut acc = self.one_like();
        for _ in 0..exp {
            acc = acc.times(self);
        }
        acc
    }
}

impl Scalar for Rational {
    fn zero_like(&self) -> Self {
        Rational::zero()
    }
    fn one_like(&self) -> Self {
        Rational::one()
    }
    fn embed(&self, r: &Rational) -> Self {
        r.clone()
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn negate(&self) -> Self {
        -self
    }
    fn try_div(&self, rhs: &Self) -> Result<Self> {
        self.checked_div(rhs)
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
    fn power(&self, exp: usize) -> Self {
        self.pow(exp as i64).expect("non-negative exponent")
    }
}

impl Scalar for TruncSeries<Rational> {
    fn zero_like(&self) -> Self {
        TruncSeries::zero(self.order())
    }
    fn one_like(&self) -> Self {
        TruncSeries::one(self.order())
    }
    fn embed(&self, r: &Rational) -> Self {
        TruncSeries::constant(r.clone(), self.order())
    }
    fn plus(&self, rhs: &Self) -> Self {
        self.add(rhs)
    }
    fn minus(&self, rhs: &Self) -> Self {
        self.sub(rhs)
    }
    fn times(&self, rhs: &Self) -> Self {
        self.mul(rhs)
    }
    fn negate(&self) -> Self {
        self.neg()
    }
    fn try_div(&self, rhs: &Self) -> Result<Self> {
        self.div(rhs)
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
}

/// Exact evaluation point for `q`, `x` and `t`.
///
/// Construction checks that none of the denominators in either identity
/// vanish up to `horizon` (the largest `n`) and that `1 + x q^h != 0` up to
/// `series_order`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QPoint {
    q: Rational,
    x: Rational,
    t: Rational,
    horizon: usize,
    series_order: usize,
}

impl QPoint {
    pub fn new(q: Rational, x: Rational, t: Rational, horizon: usize, series_order: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::Config("horizon must be positive".into()));
        }
        check_q(&q, horizon)?;
        let mut qi = Rational::one();
        for i in 0..=horizon {
            if (&t * &qi).is_one() {
                return Err(Error::Pole(format!("t*q^{i} = 1")));
            }
            qi = &qi * &q;
        }
        let mut qh = q.clone();
        for h in 1..=series_order {
            if (&x * &qh + Rational::one()).is_zero() {
                return Err(Error::Pole(format!("1 + x*q^{h} = 0")));
            }
            qh = &qh * &q;
        }
        Ok(QPoint { q, x, t, horizon, series_order })
    }

    pub fn q(&self) -> &Rational {
        &self.q
    }
    pub fn x(&self) -> &Rational {
        &self.x
    }
    pub fn t(&self) -> &Rational {
        &self.t
    }
    pub fn horizon(&self) -> usize {
        self.horizon
    }
    pub fn series_order(&self) -> usize {
        self.series_order
    }
}

/// Rejects `q` with `q^i = 1` for some `1 <= i <= n` (and `q = 0`).
pub fn check_q(q: &Rational, n: usize) -> Result<()> {
    if q.is_zero() {
        return Err(Error::Pole("q = 0".into()));
    }
    // The only rational roots of unity are 1 and -1.
    if q.is_one() && n >= 1 {
        return Err(Error::Pole("q = 1".into()));
    }
    if (-q).is_one() && n >= 2 {
        return Err(Error::Pole("q = -1".into()));
    }
    Ok(())
}

/// `(a; q)_n = (1 - a)(1 - a q)...(1 - a q^(n-1))`.
pub fn q_pochhammer<R: Scalar>(a: &R, q: &R, n: usize) -> R {
    let one = a.one_like();
    let mut acc = one.clone();
    let mut aq = a.clone();
    for _ in 0..n {
        acc = acc.times(&one.minus(&aq));
        aq = aq.times(q);
    }
    acc
}

/// Row `n` of the Gaussian binomial triangle, built by the Pascal
/// recurrence `[n,k] = [n-1,k-1] + q^k [n-1,k]`.
pub fn gaussian_row<R: Scalar>(n: usize, q: &R) -> Vec<R> {
    let one = q.one_like();
    let qpow: Vec<R> = std::iter::successors(Some(one.clone()), |p| Some(p.times(q))).take(n + 1).collect();
    let mut row = vec![one.clone()];
    for len in 1..=n {
        let mut next = Vec::with_capacity(len + 1);
        next.push(one.clone());
        for k in 1..len {
            next.push(row[k - 1].plus(&qpow[k].times(&row[k])));
        }
        next.push(one.clone());
        row = next;
    }
    row
}

/// Exact-point Gaussian binomial; `q` must not be a root of unity of order
/// at most `n`.
pub fn gaussian_binomial(n: usize, k: i64, q: &Rational) -> Result<Rational> {
    check_q(q, n)?;
    Ok(gaussian_binomial_unchecked(n, k, q))
}

/// Gaussian binomial over any [`Scalar`]; no pole checks (the recurrence is
/// polynomial in `q`).
pub fn gaussian_binomial_unchecked<R: Scalar>(n: usize, k: i64, q: &R) -> R {
    if k < 0 || k as usize > n {
        return q.zero_like();
    }
    gaussian_row(n, q).swap_remove(k as usize)
}

/// `(x+1)(x+q)...(x+q^(i-1))`.
pub fn rising_product<R: Scalar>(x: &R, q: &R, i: usize) -> R {
    let mut acc = x.one_like();
    let mut qj = x.one_like();
    for _ in 0..i {
        acc = acc.times(&x.plus(&qj));
        qj = qj.times(q);
    }
    acc
}

/// `(1+x)(1+x/q)...(1+x/q^(i-1))`, the form `f(q^-i)` needs after the
/// factor `q^binom(i,2)` has been taken out of the rising product.
pub fn rising_product_rewrite(x: &Rational, q: &Rational, i: usize) -> Result<Rational> {
    let qinv = q.recip()?;
    let mut acc = Rational::one();
    let mut qh = Rational::one();
    for _ in 0..i {
        acc = &acc * &(Rational::one() + x * &qh);
        qh = &qh * &qinv;
    }
    Ok(acc)
}

pub fn binom2(i: usize) -> usize {
    i * i.saturating_sub(1) / 2
}

/// The summands `[n,i] (-1)^(i-1) q^binom(i,2) f(q^-i)` for `i = start..=n`.
pub fn alt_q_rice_terms<F>(f: F, n: usize, q: &Rational, start: usize) -> Result<Vec<Rational>>
where
    F: Fn(&Rational) -> Result<Rational>,
{
    if start > 1 {
        return Err(Error::Config(format!("start must be 0 or 1, got {start}")));
    }
    check_q(q, n)?;
    let row = gaussian_row(n, q);
    let qinv = q.recip()?;
    (start..=n)
        .map(|i| {
            let v = qinv.pow(i as i64)?;
            let fv = f(&v)?;
            let sign = Rational::sign_power(i as i64 - 1);
            Ok(&row[i] * &sign * q.pow(binom2(i) as i64)? * fv)
        })
        .collect()
}

/// `sum_{i=start}^{n} [n,i] (-1)^(i-1) q^binom(i,2) f(q^-i)`.
pub fn alt_q_rice_sum<F>(f: F, n: usize, q: &Rational, start: usize) -> Result<Rational>
where
    F: Fn(&Rational) -> Result<Rational>,
{
    Ok(alt_q_rice_terms(f, n, q, start)?.into_iter().sum())
}

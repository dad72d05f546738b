//! Both sides of the two identities, and each intermediate identity used
//! in their q-Rice proofs.
//!
//! Identity 1:
//!
//! ```text
//! sum_{i=1}^n [n,i] (-1)^(i-1) (x+1)...(x+q^(i-1)) q^(mi) / (1-q^i)^m
//!   = sum_{i=1}^n (1 - (-x)^i) a_i sum_{i <= i_2 <= ... <= i_m <= n} a_{i_2}...a_{i_m}
//! ```
//!
//! Identity 2:
//!
//! ```text
//! sum_{i=0}^n [n,i] (-1)^(i-1) (x+1)...(x+q^(i-1)) q^i / (1 - t q^i)
//!   = -(q;q)_n / (t;q)_{n+1} sum_{i=0}^n (t;q)_i / (q;q)_i (-xq)^i
//! ```
//!
//! with `a_i = q^i / (1 - q^i)`. Every evaluator comes in an exact mode
//! (rational `q`) and a series mode (`q` formal, modulo `q^(Q+1)`); `x` and
//! `t` are always exact rationals.

use itertools::Itertools;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qprim::{gaussian_row, q_pochhammer, rising_product, QPoint, Scalar};
use crate::rational::Rational;
use crate::series::{truncated_infinite_product, TruncSeries, WPoly};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lhs,
    Rhs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EvalMode {
    Exact,
    /// Expansion in `q` modulo `q^(Q+1)`; `Q >= 1`.
    QSeries(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SideValue {
    Exact(Rational),
    Series(TruncSeries),
}

impl SideValue {
    pub fn matches(&self, mode: EvalMode) -> bool {
        match (self, mode) {
            (SideValue::Exact(_), EvalMode::Exact) => true,
            (SideValue::Series(s), EvalMode::QSeries(order)) => s.order() == order,
            _ => false,
        }
    }

    pub fn negate(&self) -> SideValue {
        match self {
            SideValue::Exact(r) => SideValue::Exact(-r),
            SideValue::Series(s) => SideValue::Series(s.neg()),
        }
    }
}

/// Exact values as `"num/den"`, series as arrays of such strings by
/// ascending power of `q`.
impl Serialize for SideValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SideValue::Exact(r) => r.serialize(serializer),
            SideValue::Series(s) => s.coeffs().serialize(serializer),
        }
    }
}

fn pole(e: Error, what: &str) -> Error {
    match e {
        Error::DivisionByZero | Error::NotInvertible => Error::Pole(what.to_string()),
        other => other,
    }
}

fn check_mode(mode: EvalMode) -> Result<()> {
    match mode {
        EvalMode::QSeries(0) => Err(Error::Config("series order must be at least 1".into())),
        _ => Ok(()),
    }
}

fn check_horizon(ctx: &QPoint, n: usize) -> Result<()> {
    if n > ctx.horizon() {
        return Err(Error::Config(format!("n = {n} exceeds point horizon {}", ctx.horizon())));
    }
    Ok(())
}

/// `q`, `x`, `t` lifted into the series ring of the given order.
fn series_point(ctx: &QPoint, order: usize) -> (TruncSeries, TruncSeries, TruncSeries) {
    let q = TruncSeries::monomial(Rational::one(), 1, order);
    (q, TruncSeries::constant(ctx.x().clone(), order), TruncSeries::constant(ctx.t().clone(), order))
}

fn eval_in_mode<F, G>(ctx: &QPoint, mode: EvalMode, exact: F, series: G) -> Result<SideValue>
where
    F: FnOnce(&Rational, &Rational, &Rational) -> Result<Rational>,
    G: FnOnce(&TruncSeries, &TruncSeries, &TruncSeries) -> Result<TruncSeries>,
{
    check_mode(mode)?;
    match mode {
        EvalMode::Exact => exact(ctx.q(), ctx.x(), ctx.t()).map(SideValue::Exact),
        EvalMode::QSeries(order) => {
            let (q, x, t) = series_point(ctx, order);
            series(&q, &x, &t).map(SideValue::Series)
        }
    }
}

/// `a_i = q^i / (1 - q^i)` for `i = 1..=n`, index 0 unused.
fn a_values<R: Scalar>(q: &R, n: usize) -> Result<Vec<R>> {
    let one = q.one_like();
    let mut out = vec![q.zero_like()];
    let mut qi = one.clone();
    for i in 1..=n {
        qi = qi.times(q);
        out.push(qi.try_div(&one.minus(&qi)).map_err(|e| pole(e, &format!("q^{i} = 1")))?);
    }
    Ok(out)
}

/// `sum_{lo <= i_1 <= ... <= i_k <= n} a_{i_1} ... a_{i_k}`; `1` when `k = 0`.
fn nondecreasing_sum<R: Scalar>(a: &[R], lo: usize, n: usize, k: usize) -> R {
    let one = a[0].one_like();
    (lo..=n)
        .combinations_with_replacement(k)
        .map(|idx| idx.iter().fold(one.clone(), |acc, &j| acc.times(&a[j])))
        .fold(one.zero_like(), |acc, t| acc.plus(&t))
}

/// The summands of the left side of identity 1, `i = 1..=n`.
pub fn identity1_lhs_terms<R: Scalar>(n: usize, m: usize, q: &R, x: &R) -> Result<Vec<R>> {
    let row = gaussian_row(n, q);
    let one = q.one_like();
    (1..=n)
        .map(|i| {
            let qi = q.power(i);
            let denom = one.minus(&qi).power(m);
            let sign = q.embed(&Rational::sign_power(i as i64 - 1));
            let num = row[i].times(&sign).times(&rising_product(x, q, i)).times(&qi.power(m));
            num.try_div(&denom).map_err(|e| pole(e, &format!("q^{i} = 1")))
        })
        .collect()
}

fn identity1_generic<R: Scalar>(side: Side, n: usize, m: usize, q: &R, x: &R) -> Result<R> {
    match side {
        Side::Lhs => {
            let terms = identity1_lhs_terms(n, m, q, x)?;
            Ok(terms.iter().fold(q.zero_like(), |acc, t| acc.plus(t)))
        }
        Side::Rhs => {
            let a = a_values(q, n)?;
            let one = q.one_like();
            let neg_x = x.negate();
            let mut acc = q.zero_like();
            for i in 1..=n {
                let inner = nondecreasing_sum(&a, i, n, m - 1);
                let factor = one.minus(&neg_x.power(i));
                acc = acc.plus(&factor.times(&a[i]).times(&inner));
            }
            Ok(acc)
        }
    }
}

pub fn identity1_side(side: Side, n: usize, m: usize, ctx: &QPoint, mode: EvalMode) -> Result<SideValue> {
    if n == 0 || m == 0 {
        return Err(Error::Config("identity 1 needs n >= 1 and m >= 1".into()));
    }
    check_horizon(ctx, n)?;
    eval_in_mode(
        ctx,
        mode,
        |q, x, _| identity1_generic(side, n, m, q, x),
        |q, x, _| identity1_generic(side, n, m, q, x),
    )
}

/// The summands of the left side of identity 2, `i = 0..=n`.
pub fn identity2_lhs_terms<R: Scalar>(n: usize, q: &R, x: &R, t: &R) -> Result<Vec<R>> {
    let row = gaussian_row(n, q);
    let one = q.one_like();
    (0..=n)
        .map(|i| {
            let qi = q.power(i);
            let sign = q.embed(&Rational::sign_power(i as i64 - 1));
            let num = row[i].times(&sign).times(&rising_product(x, q, i)).times(&qi);
            num.try_div(&one.minus(&t.times(&qi))).map_err(|e| pole(e, &format!("t*q^{i} = 1")))
        })
        .collect()
}

/// `sum_{i=0}^{upper} (t;q)_i / (q;q)_i (-xq)^i`.
fn identity2_rhs_sum<R: Scalar>(upper: usize, q: &R, x: &R, t: &R) -> Result<R> {
    let u = x.negate().times(q);
    let mut acc = q.zero_like();
    for i in 0..=upper {
        let term = q_pochhammer(t, q, i)
            .times(&u.power(i))
            .try_div(&q_pochhammer(q, q, i))
            .map_err(|e| pole(e, &format!("(q;q)_{i} = 0")))?;
        acc = acc.plus(&term);
    }
    Ok(acc)
}

fn identity2_generic<R: Scalar>(side: Side, n: usize, q: &R, x: &R, t: &R) -> Result<R> {
    match side {
        Side::Lhs => {
            let terms = identity2_lhs_terms(n, q, x, t)?;
            Ok(terms.iter().fold(q.zero_like(), |acc, t| acc.plus(t)))
        }
        Side::Rhs => {
            let prefactor =
                q_pochhammer(q, q, n).try_div(&q_pochhammer(t, q, n + 1)).map_err(|e| pole(e, "(t;q)_{n+1} = 0"))?;
            Ok(prefactor.times(&identity2_rhs_sum(n, q, x, t)?).negate())
        }
    }
}

pub fn identity2_side(side: Side, n: usize, ctx: &QPoint, mode: EvalMode) -> Result<SideValue> {
    check_horizon(ctx, n.max(1))?;
    eval_in_mode(
        ctx,
        mode,
        |q, x, t| identity2_generic(side, n, q, x, t),
        |q, x, t| identity2_generic(side, n, q, x, t),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DilcherMethod {
    WExtraction,
    NestedSum,
}

/// `prod_{j=1}^n 1/(1 - w a_j)` with `w`-degree capped at `cap`.
fn geometric_product(a: &[TruncSeries], n: usize, cap: usize) -> Result<WPoly> {
    let order = a[0].order();
    let mut acc = WPoly::one(cap, order);
    for aj in &a[1..=n] {
        let factor = WPoly::linear(TruncSeries::one(order), aj.neg(), cap)?;
        acc = acc.mul(&factor.reciprocal()?)?;
    }
    Ok(acc)
}

/// `sum_{i=1}^n a_i sum_{i <= i_2 <= ... <= i_m <= n} a_{i_2}...a_{i_m}`.
fn dilcher_nested<R: Scalar>(a: &[R], n: usize, m: usize) -> R {
    (1..=n).fold(a[0].zero_like(), |acc, i| acc.plus(&a[i].times(&nondecreasing_sum(a, i, n, m - 1))))
}

/// `[w^m] prod_{j=1}^n 1/(1 - w q^j/(1-q^j))`, by either route.
pub fn dilcher_coefficient(n: usize, m: usize, ctx: &QPoint, method: DilcherMethod) -> Result<Rational> {
    if n == 0 || m == 0 {
        return Err(Error::Config("dilcher coefficient needs n >= 1 and m >= 1".into()));
    }
    check_horizon(ctx, n)?;
    let a = a_values(ctx.q(), n)?;
    match method {
        DilcherMethod::NestedSum => Ok(dilcher_nested(&a, n, m)),
        DilcherMethod::WExtraction => {
            let a: Vec<TruncSeries> = a.into_iter().map(|v| TruncSeries::constant(v, 0)).collect();
            let p = geometric_product(&a, n, m)?;
            Ok(p.coefficient_of_w(m)?.coeff(0).clone())
        }
    }
}

/// Series-mode counterpart of [`dilcher_coefficient`] (nested route).
pub fn dilcher_series(n: usize, m: usize, order: usize) -> Result<TruncSeries> {
    let q = TruncSeries::monomial(Rational::one(), 1, order);
    Ok(dilcher_nested(&a_values(&q, n)?, n, m))
}

/// `x q^h / (1 + x q^h)` for `h = 0..=order` (index 0 unused).
fn b_values(x: &Rational, order: usize) -> Result<Vec<TruncSeries>> {
    let mut out = vec![TruncSeries::zero(order)];
    for h in 1..=order {
        let xqh = TruncSeries::monomial(x.clone(), h, order);
        out.push(xqh.div(&TruncSeries::one(order).add(&xqh))?);
    }
    Ok(out)
}

fn series_a_values(order: usize) -> Result<Vec<TruncSeries>> {
    a_values(&TruncSeries::monomial(Rational::one(), 1, order), order)
}

/// Either side of the product expansion
///
/// ```text
/// prod_{h>=1} (1 + x w q^h / (1 + x q^h))
///   = 1 - w sum_{i>=1} (-x)^i a_i prod_{1<=h<i} (1 - w a_h)
/// ```
///
/// modulo `q^(order+1)` and `w^(cap+1)`.
#[allow(clippy::needless_range_loop)]
pub fn product_expansion_side(side: Side, cap: usize, order: usize, x: &Rational) -> Result<WPoly> {
    let one = TruncSeries::one(order);
    match side {
        Side::Lhs => {
            let b = b_values(x, order)?;
            let mut acc = WPoly::one(cap, order);
            for bh in &b[1..] {
                acc = acc.mul(&WPoly::linear(one.clone(), bh.clone(), cap)?)?;
            }
            Ok(acc)
        }
        Side::Rhs => {
            let a = series_a_values(order)?;
            let neg_x = -x;
            let mut prefix = WPoly::one(cap, order);
            let mut sum = WPoly::zero(cap, order);
            for i in 1..=order {
                let coeff = a[i].scale(&neg_x.pow(i as i64)?);
                sum = sum.add(&prefix.scale(&coeff))?;
                prefix = prefix.mul(&WPoly::linear(one.clone(), a[i].neg(), cap)?)?;
            }
            WPoly::one(cap, order).sub(&sum.shift_w())
        }
    }
}

/// The chain of expressions for `[w^2]` of the product, one series per
/// displayed step, each computed independently modulo `q^(order+1)`.
///
/// 1. `sum_{h1<h2} b_{h1} b_{h2}`
/// 2. `sum_{h1<h2, k1>=1} b_{h1} (-1)^(k1-1) x^k1 q^(h2 k1)`
/// 3. `sum_{h1,k1>=1} q^(h1(k1+1)) / (1+x q^h1) (-1)^(k1-1) x^(k1+1) a_{k1}`
/// 4. `sum_{h1,k1>=1,k2>=0} q^(h1(k1+1)) q^(h1 k2) (-1)^(k1+k2-1) x^(k1+k2+1) a_{k1}`
/// 5. `sum_{h1>=1, 1<=k1<k2} q^(h1 k2) (-1)^k2 x^k2 a_{k1}`
/// 6. `sum_{1<=k1<k2} (-x)^k2 a_{k1} a_{k2}`
///
/// where `b_h = x q^h/(1 + x q^h)`. Index ranges are cut where the term's
/// `q`-valuation exceeds `order`.
#[allow(clippy::needless_range_loop)]
pub fn w2_coefficient_chain(order: usize, x: &Rational) -> Result<Vec<TruncSeries>> {
    let b = b_values(x, order)?;
    let a = series_a_values(order)?;
    let mono = |c: Rational, k: usize| TruncSeries::monomial(c, k, order);
    let inv_one_plus: Vec<TruncSeries> =
        (0..=order).map(|h| TruncSeries::one(order).add(&mono(x.clone(), h)).reciprocal()).collect::<Result<_>>()?;
    let xp = |k: usize| x.pow(k as i64).expect("non-negative exponent");
    let sign = |k: i64| Rational::sign_power(k);
    let zero = TruncSeries::zero(order);

    let mut s1 = zero.clone();
    for h1 in 1..=order {
        for h2 in h1 + 1..=order - h1 {
            s1 = s1.add(&b[h1].mul(&b[h2]));
        }
    }

    let mut s2 = zero.clone();
    for h1 in 1..=order {
        for h2 in h1 + 1..=order {
            for k1 in (1..).take_while(|k1| h1 + h2 * k1 <= order) {
                let c = sign(k1 as i64 - 1) * xp(k1);
                s2 = s2.add(&b[h1].mul(&mono(c, h2 * k1)));
            }
        }
    }

    let mut s3 = zero.clone();
    for h1 in 1..=order {
        for k1 in (1..).take_while(|k1| h1 * (k1 + 1) + k1 <= order) {
            let c = sign(k1 as i64 - 1) * xp(k1 + 1);
            s3 = s3.add(&mono(c, h1 * (k1 + 1)).mul(&inv_one_plus[h1]).mul(&a[k1]));
        }
    }

    let mut s4 = zero.clone();
    for h1 in 1..=order {
        for k1 in (1..).take_while(|k1| h1 * (k1 + 1) + k1 <= order) {
            for k2 in (0..).take_while(|k2| h1 * (k1 + 1 + k2) + k1 <= order) {
                let c = sign((k1 + k2) as i64 - 1) * xp(k1 + k2 + 1);
                let q_part = mono(Rational::one(), h1 * (k1 + 1)).mul(&mono(Rational::one(), h1 * k2));
                s4 = s4.add(&q_part.scale(&c).mul(&a[k1]));
            }
        }
    }

    let mut s5 = zero.clone();
    for h1 in 1..=order {
        for k2 in (2..).take_while(|k2| h1 * k2 < order) {
            for k1 in (1..k2).take_while(|k1| h1 * k2 + k1 <= order) {
                let c = sign(k2 as i64) * xp(k2);
                s5 = s5.add(&mono(c, h1 * k2).mul(&a[k1]));
            }
        }
    }

    let neg_x = -x;
    let mut s6 = zero;
    for k2 in 2..=order {
        for k1 in (1..k2).take_while(|k1| k1 + k2 <= order) {
            let c = neg_x.pow(k2 as i64)?;
            s6 = s6.add(&a[k1].mul(&a[k2]).scale(&c));
        }
    }

    Ok(vec![s1, s2, s3, s4, s5, s6])
}

/// Both sides of
///
/// ```text
/// sum_{i=1}^N (-x)^i w a_i (1-wa_1)...(1-wa_n) / ((1-wa_i)...(1-wa_n))
///   = sum_{i=1}^N (-x)^i w a_i prod_{1<=h<i} (1 - w a_h)
/// ```
///
/// at a rational point `w`, for arbitrary rationals `a_1..a_n`.
pub fn telescoping_sides(a: &[Rational], x: &Rational, w: &Rational, upper: usize) -> Result<(Rational, Rational)> {
    let factors = telescoping_factors(a, w, upper)?;
    let n = a.len();
    let full: Rational = factors.iter().cloned().product();
    let neg_x = -x;
    let mut lhs = Rational::zero();
    let mut rhs = Rational::zero();
    let mut prefix = Rational::one();
    for i in 1..=upper {
        let lead = neg_x.pow(i as i64)? * w * &a[i - 1];
        let tail: Rational = factors[i - 1..n].iter().cloned().product();
        lhs += &lead * &full.checked_div(&tail)?;
        rhs += &lead * &prefix;
        prefix = &prefix * &factors[i - 1];
    }
    Ok((lhs, rhs))
}

/// The generating-function form of the same statement, before clearing
/// the common denominator:
///
/// ```text
/// sum_{i=1}^N (-x)^i w a_i / ((1-wa_i)...(1-wa_n))
///   = 1/((1-wa_1)...(1-wa_n)) sum_{i=1}^N (-x)^i w a_i prod_{1<=h<i} (1 - w a_h)
/// ```
pub fn telescoping_generating_sides(
    a: &[Rational],
    x: &Rational,
    w: &Rational,
    upper: usize,
) -> Result<(Rational, Rational)> {
    let factors = telescoping_factors(a, w, upper)?;
    let n = a.len();
    let full: Rational = factors.iter().cloned().product();
    let neg_x = -x;
    let mut lhs = Rational::zero();
    let mut inner = Rational::zero();
    let mut prefix = Rational::one();
    for i in 1..=upper {
        let lead = neg_x.pow(i as i64)? * w * &a[i - 1];
        let tail: Rational = factors[i - 1..n].iter().cloned().product();
        lhs += lead.checked_div(&tail)?;
        inner += &lead * &prefix;
        prefix = &prefix * &factors[i - 1];
    }
    Ok((lhs, inner.checked_div(&full)?))
}

fn telescoping_factors(a: &[Rational], w: &Rational, upper: usize) -> Result<Vec<Rational>> {
    if upper == 0 || upper > a.len() {
        return Err(Error::Config(format!("upper index {upper} must lie in 1..={}", a.len())));
    }
    a.iter()
        .enumerate()
        .map(|(h, ah)| {
            let f = Rational::one() - w * ah;
            if f.is_zero() {
                Err(Error::Pole(format!("w*a_{} = 1", h + 1)))
            } else {
                Ok(f)
            }
        })
        .collect()
}

/// `sum_{k=0}^{upper} (z;q)_k / (q;q)_k (-xq)^k` at a rational `q`; this is
/// the degree-`upper` truncation of `(-xzq;q)_inf / (-xq;q)_inf`, exact at
/// `z = q^-i` for `0 <= i <= upper`.
pub fn cauchy_polynomial(z: &Rational, x: &Rational, q: &Rational, upper: usize) -> Result<Rational> {
    identity2_rhs_sum(upper, q, x, z)
}

/// Either side of Cauchy's formula
/// `(-xzq;q)_inf / (-xq;q)_inf = sum_{m>=0} (z;q)_m/(q;q)_m (-xq)^m`
/// modulo `q^(order+1)`.
pub fn cauchy_side(side: Side, z: &Rational, x: &Rational, order: usize) -> Result<TruncSeries> {
    let q = TruncSeries::monomial(Rational::one(), 1, order);
    match side {
        Side::Lhs => {
            let xz = x * z;
            truncated_infinite_product(
                |h| {
                    let one = TruncSeries::one(order);
                    let num = one.add(&TruncSeries::monomial(xz.clone(), h, order));
                    let den = one.add(&TruncSeries::monomial(x.clone(), h, order));
                    num.div(&den).expect("unit constant term")
                },
                order,
            )
        }
        Side::Rhs => {
            let z = TruncSeries::constant(z.clone(), order);
            let x = TruncSeries::constant(x.clone(), order);
            identity2_rhs_sum(order, &q, &x, &z)
        }
    }
}

/// The coefficient of `w^m` in
///
/// ```text
/// 1/((1 - w a_1)...(1 - w a_n)) * prod_{h>=1} (1 + x w q^h / (1 + x q^h))
/// ```
///
/// modulo `q^(order+1)`: the residue at `z = 1` taken with the full infinite
/// product as numerator, after substituting `z = 1 + w`.
///
/// This does not agree with the left side of identity 1 (already for
/// `n = m = 1` it differs at `q^2`): the product grows too fast in `z` for the
/// residue at infinity to vanish. See [`identity1_w_extraction_truncated`].
pub fn identity1_w_extraction(n: usize, m: usize, x: &Rational, order: usize) -> Result<TruncSeries> {
    if n == 0 || m == 0 {
        return Err(Error::Config("w-extraction needs n >= 1 and m >= 1".into()));
    }
    let a = series_a_values(order.max(n))?;
    let a: Vec<TruncSeries> = a.iter().map(|s| s.truncate(order)).collect();
    let denominators = geometric_product(&a, n, m)?;
    let product = product_expansion_side(Side::Lhs, m, order, x)?;
    Ok(denominators.mul(&product)?.coefficient_of_w(m)?.clone())
}

/// The residue at `z = 1` of `(q;q)_n/(z;q)_{n+1} g(z)/(z-1)^m`, where
/// `g(z) = sum_{k=0}^n (z;q)_k/(q;q)_k (-xq)^k` replaces the infinite product
/// (it agrees with the product at every `z = q^-i`, `0 <= i <= n`). Computed
/// as `[w^m]` of `1/((1-wa_1)...(1-wa_n)) g(1+w)`, modulo `q^(order+1)`.
///
/// Because `g` has degree `n` in `z` the integrand decays at infinity, so this
/// equals the left side of identity 1.
pub fn identity1_w_extraction_truncated(n: usize, m: usize, x: &Rational, order: usize) -> Result<TruncSeries> {
    let q = TruncSeries::monomial(Rational::one(), 1, order);
    residue_at_one(n, m, &q, x)
}

/// [`identity1_w_extraction_truncated`] at an exact point.
pub fn identity1_residue_exact(n: usize, m: usize, ctx: &QPoint) -> Result<Rational> {
    check_horizon(ctx, n)?;
    let q = TruncSeries::constant(ctx.q().clone(), 0);
    Ok(residue_at_one(n, m, &q, ctx.x())?.coeff(0).clone())
}

fn residue_at_one(n: usize, m: usize, q: &TruncSeries, x: &Rational) -> Result<TruncSeries> {
    if n == 0 || m == 0 {
        return Err(Error::Config("w-extraction needs n >= 1 and m >= 1".into()));
    }
    let order = q.order();
    let one = TruncSeries::one(order);
    let a = a_values(q, n)?;
    let denominators = geometric_product(&a, n, m)?;

    // g(1+w) = sum_k (1+w;q)_k/(q;q)_k (-xq)^k, with
    // (1+w;q)_k = prod_{j<k} ((1 - q^j) - w q^j).
    let u = q.scale(&-x);
    let mut g = WPoly::zero(m, order);
    let mut z_poch = WPoly::one(m, order);
    let mut q_poch = one.clone();
    let mut qj = one.clone();
    for k in 0..=n {
        let coeff = u.pow(k).div(&q_poch).map_err(|e| pole(e, "(q;q)_k = 0"))?;
        g = g.add(&z_poch.scale(&coeff))?;
        z_poch = z_poch.mul(&WPoly::linear(one.sub(&qj), qj.neg(), m)?)?;
        qj = qj.mul(q);
        q_poch = q_poch.mul(&one.sub(&qj));
    }
    Ok(denominators.mul(&g)?.coefficient_of_w(m)?.clone())
}

/// `Res_{z=pole} numerator(z)/(z - pole)`, i.e. the numerator at the pole.
pub fn residue_simple_pole<F>(numerator: F, pole: &Rational) -> Result<Rational>
where
    F: Fn(&Rational) -> Result<Rational>,
{
    numerator(pole)
}

/// `-Res_{z=t} (q;q)_n/(z;q)_{n+1} 1/(z-t) g(z)`, the only residue outside
/// the poles `q^-i` once the infinite product is replaced by its degree-`n`
/// truncation `g`.
pub fn identity2_residue_value(n: usize, ctx: &QPoint) -> Result<Rational> {
    check_horizon(ctx, n.max(1))?;
    let (q, x) = (ctx.q(), ctx.x());
    let numerator = |z: &Rational| {
        let front =
            q_pochhammer(q, q, n).checked_div(&q_pochhammer(z, q, n + 1)).map_err(|e| pole(e, "(z;q)_{n+1} = 0"))?;
        Ok(front * cauchy_polynomial(z, x, q, n)?)
    };
    Ok(-residue_simple_pole(numerator, ctx.t())?)
}

/// `f(v) = g(v) / (v - 1)^m`, the function whose alternating q-Rice sum is
/// the left side of identity 1.
pub fn identity1_rice_function(n: usize, m: usize, ctx: &QPoint) -> impl Fn(&Rational) -> Result<Rational> + '_ {
    move |v: &Rational| {
        let g = cauchy_polynomial(v, ctx.x(), ctx.q(), n)?;
        g.checked_div(&(v - Rational::one()).pow(m as i64)?)
    }
}

/// `f(v) = g(v) / (v - t)`, the function for identity 2.
pub fn identity2_rice_function(n: usize, ctx: &QPoint) -> impl Fn(&Rational) -> Result<Rational> + '_ {
    move |v: &Rational| {
        let g = cauchy_polynomial(v, ctx.x(), ctx.q(), n)?;
        g.checked_div(&(v - ctx.t()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qprim::{alt_q_rice_sum, alt_q_rice_terms, gaussian_binomial, rising_product_rewrite};

    fn r(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    fn point(q: Rational, x: Rational, t: Rational) -> QPoint {
        QPoint::new(q, x, t, 8, 30).unwrap()
    }

    fn exact(v: SideValue) -> Rational {
        match v {
            SideValue::Exact(r) => r,
            other => panic!("expected exact value, got {other:?}"),
        }
    }

    fn series(v: SideValue) -> TruncSeries {
        match v {
            SideValue::Series(s) => s,
            other => panic!("expected series value, got {other:?}"),
        }
    }

    /// Literal term-by-term transcription of both sides of identity 1, kept
    /// apart from the production evaluator (no Pascal rows, no shared
    /// helpers beyond field arithmetic).
    fn identity1_oracle(n: usize, m: usize, q: &Rational, x: &Rational) -> (Rational, Rational) {
        let poch = |a: &Rational, k: usize| {
            (0..k).map(|j| Rational::one() - a * &q.pow(j as i64).unwrap()).product::<Rational>()
        };
        let gauss = |k: usize| poch(q, n).checked_div(&(poch(q, k) * poch(q, n - k))).unwrap();
        let a = |i: usize| q.pow(i as i64).unwrap().checked_div(&(Rational::one() - q.pow(i as i64).unwrap())).unwrap();
        let mut lhs = Rational::zero();
        for i in 1..=n {
            let rising: Rational = (0..i).map(|j| x + &q.pow(j as i64).unwrap()).product();
            let qi = q.pow(i as i64).unwrap();
            lhs += gauss(i)
                * Rational::sign_power(i as i64 - 1)
                * rising
                * qi.pow(m as i64).unwrap()
                * (Rational::one() - &qi).pow(-(m as i64)).unwrap();
        }
        // Enumerate i <= i_2 <= ... <= i_m <= n by odometer.
        let mut rhs = Rational::zero();
        for i in 1..=n {
            let mut inner = Rational::zero();
            let mut idx = vec![i; m - 1];
            loop {
                inner += idx.iter().map(|&j| a(j)).product::<Rational>();
                let Some(pos) = (0..idx.len()).rev().find(|&p| idx[p] < n) else { break };
                let v = idx[pos] + 1;
                for slot in &mut idx[pos..] {
                    *slot = v;
                }
            }
            rhs += (Rational::one() - (-x).pow(i as i64).unwrap()) * a(i) * inner;
        }
        (lhs, rhs)
    }

    #[test]
    fn identity1_small_collapses() {
        let ctx = point(r(2, 7), r(-3, 5), r(1, 9));
        let q = ctx.q().clone();
        let a1 = q.checked_div(&(Rational::one() - &q)).unwrap();
        let one_plus_x = Rational::one() + ctx.x();
        for side in [Side::Lhs, Side::Rhs] {
            assert_eq!(exact(identity1_side(side, 1, 1, &ctx, EvalMode::Exact).unwrap()), &one_plus_x * &a1);
            assert_eq!(exact(identity1_side(side, 1, 2, &ctx, EvalMode::Exact).unwrap()), &one_plus_x * &a1 * &a1);
        }
    }

    #[test]
    fn identity1_matches_literal_oracle() {
        let ctx = point(r(1, 2), r(1, 3), r(1, 5));
        let (ol, or) = identity1_oracle(2, 2, ctx.q(), ctx.x());
        assert_eq!(ol, or);
        assert_eq!(exact(identity1_side(Side::Lhs, 2, 2, &ctx, EvalMode::Exact).unwrap()), ol);
        assert_eq!(exact(identity1_side(Side::Rhs, 2, 2, &ctx, EvalMode::Exact).unwrap()), or);

        for (n, m) in [(3, 1), (4, 3), (5, 2), (6, 4)] {
            let ctx = point(r(3, 11), r(-5, 4), r(2, 3));
            let (ol, _) = identity1_oracle(n, m, ctx.q(), ctx.x());
            assert_eq!(exact(identity1_side(Side::Lhs, n, m, &ctx, EvalMode::Exact).unwrap()), ol);
            assert_eq!(exact(identity1_side(Side::Rhs, n, m, &ctx, EvalMode::Exact).unwrap()), ol);
        }
    }

    #[test]
    fn identity1_series_mode() {
        let ctx = point(r(1, 2), r(1, 3), r(1, 5));
        for (n, m) in [(1, 1), (3, 2), (4, 4)] {
            let l = series(identity1_side(Side::Lhs, n, m, &ctx, EvalMode::QSeries(20)).unwrap());
            let rr = series(identity1_side(Side::Rhs, n, m, &ctx, EvalMode::QSeries(20)).unwrap());
            assert_eq!(l.order(), 20);
            assert_eq!(l, rr);
        }
    }

    #[test]
    fn mode_and_argument_errors() {
        let ctx = point(r(1, 2), r(1, 3), r(1, 5));
        assert!(identity1_side(Side::Lhs, 0, 1, &ctx, EvalMode::Exact).is_err());
        assert!(identity1_side(Side::Lhs, 9, 1, &ctx, EvalMode::Exact).is_err());
        assert!(identity1_side(Side::Lhs, 2, 1, &ctx, EvalMode::QSeries(0)).is_err());
        let v = identity2_side(Side::Lhs, 2, &ctx, EvalMode::QSeries(5)).unwrap();
        assert!(v.matches(EvalMode::QSeries(5)));
        assert!(!v.matches(EvalMode::Exact));
    }

    #[test]
    fn identity2_boundary_and_hand_value() {
        let ctx = point(r(1, 2), r(1, 1), r(1, 3));
        let boundary = -(Rational::one().checked_div(&(Rational::one() - ctx.t())).unwrap());
        for side in [Side::Lhs, Side::Rhs] {
            assert_eq!(exact(identity2_side(side, 0, &ctx, EvalMode::Exact).unwrap()), boundary);
            assert_eq!(exact(identity2_side(side, 1, &ctx, EvalMode::Exact).unwrap()), r(-3, 10));
        }
        // lhs = -1/(2/3) + 2*(1/2)/(5/6)
        assert_eq!(r(-3, 2) + r(6, 5), r(-3, 10));
    }

    /// Literal transcription of identity 2.
    fn identity2_oracle(n: usize, q: &Rational, x: &Rational, t: &Rational) -> (Rational, Rational) {
        let poch = |a: &Rational, k: usize| {
            (0..k).map(|j| Rational::one() - a * &q.pow(j as i64).unwrap()).product::<Rational>()
        };
        let gauss = |k: usize| poch(q, n).checked_div(&(poch(q, k) * poch(q, n - k))).unwrap();
        let mut lhs = Rational::zero();
        for i in 0..=n {
            let rising: Rational = (0..i).map(|j| x + &q.pow(j as i64).unwrap()).product();
            let qi = q.pow(i as i64).unwrap();
            lhs += (gauss(i) * Rational::sign_power(i as i64 - 1) * rising * &qi)
                .checked_div(&(Rational::one() - t * &qi))
                .unwrap();
        }
        let mut sum = Rational::zero();
        for i in 0..=n {
            sum += poch(t, i).checked_div(&poch(q, i)).unwrap() * (-(x * q)).pow(i as i64).unwrap();
        }
        let rhs = -(poch(q, n).checked_div(&poch(t, n + 1)).unwrap() * sum);
        (lhs, rhs)
    }

    #[test]
    fn identity2_matches_literal_oracle() {
        let pts = [
            (r(1, 2), r(1, 3), r(1, 5)),
            (r(3, 7), r(-2, 5), r(7, 2)),
            (r(5, 6), r(9, 2), r(-1, 4)),
            (r(1, 9), r(-7, 8), r(3, 2)),
            (r(12, 13), r(1, 16), r(-5, 3)),
        ];
        for (q, x, t) in pts {
            let ctx = point(q.clone(), x.clone(), t.clone());
            for n in [2, 5] {
                let (ol, or) = identity2_oracle(n, &q, &x, &t);
                assert_eq!(ol, or);
                assert_eq!(exact(identity2_side(Side::Lhs, n, &ctx, EvalMode::Exact).unwrap()), ol);
                assert_eq!(exact(identity2_side(Side::Rhs, n, &ctx, EvalMode::Exact).unwrap()), or);
            }
            let ls = series(identity2_side(Side::Lhs, 4, &ctx, EvalMode::QSeries(15)).unwrap());
            let rs = series(identity2_side(Side::Rhs, 4, &ctx, EvalMode::QSeries(15)).unwrap());
            assert_eq!(ls, rs);
        }
    }

    #[test]
    fn dilcher_small_cases() {
        let ctx = point(r(2, 5), r(1, 3), r(1, 7));
        let a = |i: i64| ctx.q().pow(i).unwrap().checked_div(&(Rational::one() - ctx.q().pow(i).unwrap())).unwrap();
        for method in [DilcherMethod::WExtraction, DilcherMethod::NestedSum] {
            for n in 1..=4 {
                let expect: Rational = (1..=n as i64).map(a).sum();
                assert_eq!(dilcher_coefficient(n, 1, &ctx, method).unwrap(), expect);
            }
            let h2 = a(1) * a(1) + a(1) * a(2) + a(2) * a(2);
            assert_eq!(dilcher_coefficient(2, 2, &ctx, method).unwrap(), h2);
        }
        assert_eq!(
            dilcher_coefficient(5, 4, &ctx, DilcherMethod::WExtraction).unwrap(),
            dilcher_coefficient(5, 4, &ctx, DilcherMethod::NestedSum).unwrap()
        );
    }

    #[test]
    fn product_expansion_constant_terms_and_equality() {
        for x in [r(1, 1), r(1, 2), r(-2, 3)] {
            let l = product_expansion_side(Side::Lhs, 4, 12, &x).unwrap();
            let rr = product_expansion_side(Side::Rhs, 4, 12, &x).unwrap();
            assert_eq!(l.coefficient_of_w(0).unwrap(), &TruncSeries::one(12));
            assert_eq!(rr.coefficient_of_w(0).unwrap(), &TruncSeries::one(12));
            assert_eq!(l, rr);
        }
    }

    #[test]
    fn w2_chain_is_constant() {
        let x = r(-2, 3);
        let chain = w2_coefficient_chain(14, &x).unwrap();
        let lhs = product_expansion_side(Side::Lhs, 2, 14, &x).unwrap();
        for (step, s) in chain.iter().enumerate() {
            assert_eq!(s, lhs.coefficient_of_w(2).unwrap(), "step {}", step + 1);
        }
    }

    #[test]
    fn telescoping_examples() {
        let (x, w) = (r(3, 4), r(-2, 5));
        let (l, rr) = telescoping_sides(&[r(5, 7)], &x, &w, 1).unwrap();
        let expect = -(&x * &w * r(5, 7));
        assert_eq!((l, rr), (expect.clone(), expect));

        let a = [r(1, 2), r(-3, 4), r(7, 5), r(2, 9)];
        let (l, rr) = telescoping_sides(&a, &Rational::zero(), &w, 4).unwrap();
        assert!(l.is_zero() && rr.is_zero());
        let (l, rr) = telescoping_sides(&a, &x, &w, 4).unwrap();
        assert_eq!(l, rr);
        let (l, rr) = telescoping_generating_sides(&a, &x, &w, 3).unwrap();
        assert_eq!(l, rr);

        assert!(matches!(telescoping_sides(&a, &x, &r(2, 1), 4), Err(Error::Pole(_))));
        assert!(telescoping_sides(&a, &x, &w, 5).is_err());
    }

    #[test]
    fn cauchy_examples() {
        let order = 12;
        let x = r(2, 7);
        for side in [Side::Lhs, Side::Rhs] {
            assert_eq!(cauchy_side(side, &Rational::one(), &x, order).unwrap(), TruncSeries::one(order));
        }
        // z = 0: Euler's series, with the left side 1/(-xq;q)_inf built directly.
        let mut direct = TruncSeries::one(order);
        for h in 1..=order {
            direct = direct.mul(&TruncSeries::one(order).add(&TruncSeries::monomial(x.clone(), h, order)));
        }
        let euler = direct.reciprocal().unwrap();
        assert_eq!(cauchy_side(Side::Lhs, &Rational::zero(), &x, order).unwrap(), euler);
        assert_eq!(cauchy_side(Side::Rhs, &Rational::zero(), &x, order).unwrap(), euler);

        let (z, x) = (r(1, 2), r(1, 3));
        assert_eq!(cauchy_side(Side::Lhs, &z, &x, 30).unwrap(), cauchy_side(Side::Rhs, &z, &x, 30).unwrap());
    }

    #[test]
    fn literal_w_extraction_single_term() {
        // n = m = 1, x = 0: the product factor is 1 and only the Dilcher part
        // remains.
        let order = 10;
        for (n, m) in [(1, 1), (3, 2)] {
            let got = identity1_w_extraction(n, m, &Rational::zero(), order).unwrap();
            assert_eq!(got, dilcher_series(n, m, order).unwrap());
        }
    }

    #[test]
    fn literal_w_extraction_differs_from_lhs() {
        // [w^1] of the literal rewrite is a_1 + sum_h x q^h/(1+xq^h); the
        // left side is (1+x) a_1. They first differ at q^2 by -x^2.
        let x = r(1, 2);
        let ctx = QPoint::new(r(1, 3), x.clone(), r(1, 5), 1, 10).unwrap();
        let lit = identity1_w_extraction(1, 1, &x, 10).unwrap();
        let lhs = series(identity1_side(Side::Lhs, 1, 1, &ctx, EvalMode::QSeries(10)).unwrap());
        let diff = lit.sub(&lhs);
        assert_eq!(diff.valuation(), Some(2));
        assert_eq!(diff.coeff(2), &-(&x * &x));
    }

    #[test]
    fn truncated_w_extraction_matches_lhs() {
        let x = r(1, 1);
        let ctx = QPoint::new(r(1, 3), x.clone(), r(1, 5), 3, 25).unwrap();
        let lhs = series(identity1_side(Side::Lhs, 3, 2, &ctx, EvalMode::QSeries(25)).unwrap());
        assert_eq!(identity1_w_extraction_truncated(3, 2, &x, 25).unwrap(), lhs);
        let x = r(1, 2);
        let ctx = QPoint::new(r(1, 3), x.clone(), r(1, 5), 1, 10).unwrap();
        let lhs = series(identity1_side(Side::Lhs, 1, 1, &ctx, EvalMode::QSeries(10)).unwrap());
        let expect = TruncSeries::monomial(Rational::one(), 1, 10)
            .div(&TruncSeries::from_coeffs(vec![Rational::one(), -Rational::one()], 10))
            .unwrap()
            .scale(&(Rational::one() + &x));
        assert_eq!(lhs, expect);
        assert_eq!(identity1_w_extraction_truncated(1, 1, &x, 10).unwrap(), expect);
    }

    #[test]
    fn residue_exact_matches_lhs() {
        let ctx = point(r(3, 7), r(-2, 5), r(1, 4));
        for (n, m) in [(1, 1), (4, 2), (6, 3)] {
            let lhs = exact(identity1_side(Side::Lhs, n, m, &ctx, EvalMode::Exact).unwrap());
            assert_eq!(identity1_residue_exact(n, m, &ctx).unwrap(), lhs);
        }
    }

    #[test]
    fn simple_pole_residues() {
        assert_eq!(residue_simple_pole(|_| Ok(r(7, 3)), &r(5, 2)).unwrap(), r(7, 3));
        assert_eq!(residue_simple_pole(|z| Ok(z + r(5, 1)), &Rational::zero()).unwrap(), r(5, 1));
        let ctx = point(r(2, 5), r(3, 4), r(-1, 3));
        for n in 0..=5 {
            let rhs = exact(identity2_side(Side::Rhs, n, &ctx, EvalMode::Exact).unwrap());
            assert_eq!(identity2_residue_value(n, &ctx).unwrap(), rhs);
        }
    }

    #[test]
    fn rice_functions_reproduce_summands() {
        let ctx = point(r(2, 5), r(3, 4), r(-1, 3));
        let (q, x, t) = (ctx.q().clone(), ctx.x().clone(), ctx.t().clone());
        for n in 1..=6 {
            for i in 0..=n {
                let v = q.pow(-(i as i64)).unwrap();
                assert_eq!(cauchy_polynomial(&v, &x, &q, n).unwrap(), rising_product_rewrite(&x, &q, i).unwrap());
            }
            for m in 1..=3 {
                let f = identity1_rice_function(n, m, &ctx);
                let terms = alt_q_rice_terms(&f, n, &q, 1).unwrap();
                assert_eq!(terms, identity1_lhs_terms(n, m, &q, &x).unwrap());
                let lhs = exact(identity1_side(Side::Lhs, n, m, &ctx, EvalMode::Exact).unwrap());
                assert_eq!(alt_q_rice_sum(&f, n, &q, 1).unwrap(), lhs);
            }
            let f = identity2_rice_function(n, &ctx);
            let terms = alt_q_rice_terms(&f, n, &q, 0).unwrap();
            assert_eq!(terms, identity2_lhs_terms(n, &q, &x, &t).unwrap());
            assert_eq!(terms[0], -(Rational::one().checked_div(&(Rational::one() - &t)).unwrap()));
            assert_eq!(gaussian_binomial(n, 0, &q).unwrap(), Rational::one());
        }
    }

    #[test]
    fn side_value_serialization() {
        let v = SideValue::Exact(r(-3, 4));
        assert_eq!(serde_json::to_string(&v).unwrap(), "\"-3/4\"");
        let s = SideValue::Series(TruncSeries::from_coeffs(vec![r(1, 1), r(-1, 2)], 2));
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"["1/1","-1/2","0/1"]"#);
    }
}

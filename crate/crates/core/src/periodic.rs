//! Periodic combs δ_{Lℤ} ∗ Σ_j c_j δ_j with exact coefficients, their
//! correlations of every order, and homometry certification.

use num_complex::Complex;
use num_traits::Zero;
use serde::Serialize;

use crate::correlation::CorrelationSeries;
use crate::error::{Error, Result};
use crate::exact::{self, int, real, ExactComplex, Rational};

/// Weights of the 6-periodic homometric pair: equal correlations up to order 5,
/// distinguished only at order 6.
pub const HOMOMETRIC_PAIR: [[i64; 6]; 2] = [[11, 25, 42, 45, 31, 14], [10, 21, 39, 46, 35, 17]];

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicComb {
    coefficients: Vec<ExactComplex>,
}

impl PeriodicComb {
    pub fn new(coefficients: Vec<ExactComplex>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidParameter("period must be at least 1".into()));
        }
        Ok(Self { coefficients })
    }

    pub fn from_integers(values: &[i64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| real(int(v))).collect())
    }

    pub fn from_rationals(values: &[Rational]) -> Result<Self> {
        Self::new(values.iter().cloned().map(real).collect())
    }

    /// Exact binary image of floating-point coefficients.
    pub fn from_f64(values: &[num_complex::Complex64]) -> Result<Self> {
        Self::new(
            values
                .iter()
                .map(|c| Ok(Complex::new(exact::from_f64(c.re)?, exact::from_f64(c.im)?)))
                .collect::<Result<_>>()?,
        )
    }

    pub fn period(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[ExactComplex] {
        &self.coefficients
    }

    /// c_j with j taken mod L.
    pub fn coefficient(&self, j: i64) -> &ExactComplex {
        &self.coefficients[j.rem_euclid(self.period() as i64) as usize]
    }

    pub fn is_real(&self) -> bool {
        self.coefficients.iter().all(|c| c.im.is_zero())
    }

    fn period_rational(&self) -> Rational {
        int(self.period() as i64)
    }
}

/// The Table-style homometric pair as two combs.
pub fn homometric_pair() -> (PeriodicComb, PeriodicComb) {
    (
        PeriodicComb::from_integers(&HOMOMETRIC_PAIR[0]).expect("nonempty"),
        PeriodicComb::from_integers(&HOMOMETRIC_PAIR[1]).expect("nonempty"),
    )
}

/// η(m) = (1/L) Σ_j c_j conj(c_{(j−m) mod L}).
pub fn periodic_eta(comb: &PeriodicComb, m: i64) -> ExactComplex {
    let sum = (0..comb.period() as i64).fold(ExactComplex::zero(), |acc, j| {
        acc + comb.coefficient(j) * comb.coefficient(j - m).conj()
    });
    sum / real(comb.period_rational())
}

/// Exact η over one full period in each direction, `[-L, L]`.
pub fn periodic_autocorrelation(comb: &PeriodicComb) -> CorrelationSeries {
    let l = comb.period() as i64;
    let values = (-l..=l).map(|m| periodic_eta(comb, m)).collect();
    CorrelationSeries::exact(format!("periodic L={l}"), values, None).expect("odd length")
}

/// Plain products, no conjugation: (1/L) Σ_j c_j c_{j+m₁} ⋯ c_{j+m_{q−1}}.
pub const HIGHER_ORDER_CONVENTION: &str = "plain products, no conjugation";

/// Order-q correlation for `lags` = (m₁, …, m_{q−1}), q ≥ 2.
pub fn higher_order_correlation(comb: &PeriodicComb, lags: &[i64]) -> Result<ExactComplex> {
    if lags.is_empty() {
        return Err(Error::InvalidParameter("correlation order must be at least 2".into()));
    }
    let sum = (0..comb.period() as i64).fold(ExactComplex::zero(), |acc, j| {
        let term = lags
            .iter()
            .fold(comb.coefficient(j).clone(), |p, &m| p * comb.coefficient(j + m));
        acc + term
    });
    Ok(sum / real(comb.period_rational()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub lags: Vec<i64>,
    pub left: String,
    pub right: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderComparison {
    pub order: usize,
    pub tuples_checked: usize,
    pub equal: bool,
    /// First lag tuple (lexicographic) where the correlations differ.
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomometryReport {
    pub period: usize,
    pub convention: &'static str,
    pub orders: Vec<OrderComparison>,
}

impl HomometryReport {
    /// Largest q such that all orders 2..=q agree.
    pub fn equal_up_to(&self) -> usize {
        self.orders
            .iter()
            .take_while(|o| o.equal)
            .last()
            .map_or(1, |o| o.order)
    }
}

/// Compares correlations of orders 2..=`max_order` over every lag tuple in
/// `[0, L−1]^{q−1}`.
pub fn homometry_report(
    left: &PeriodicComb,
    right: &PeriodicComb,
    max_order: usize,
) -> Result<HomometryReport> {
    if left.period() != right.period() {
        return Err(Error::InvalidParameter(format!(
            "periods differ: {} vs {}",
            left.period(),
            right.period()
        )));
    }
    if max_order < 2 {
        return Err(Error::InvalidParameter("max order must be at least 2".into()));
    }
    let period = left.period();
    let mut orders = Vec::new();
    for order in 2..=max_order {
        let mut lags = vec![0i64; order - 1];
        let mut checked = 0;
        let mut witness = None;
        loop {
            checked += 1;
            let (a, b) = (
                higher_order_correlation(left, &lags)?,
                higher_order_correlation(right, &lags)?,
            );
            if a != b && witness.is_none() {
                witness = Some(Witness {
                    lags: lags.clone(),
                    left: format_exact_complex(&a),
                    right: format_exact_complex(&b),
                });
            }
            if !advance(&mut lags, period as i64) {
                break;
            }
        }
        orders.push(OrderComparison {
            order,
            tuples_checked: checked,
            equal: witness.is_none(),
            witness,
        });
    }
    Ok(HomometryReport {
        period,
        convention: HIGHER_ORDER_CONVENTION,
        orders,
    })
}

/// Odometer increment over `[0, base)^len`; false once it wraps.
fn advance(digits: &mut [i64], base: i64) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

pub fn format_exact_complex(value: &ExactComplex) -> String {
    if value.im.is_zero() {
        exact::format_rational(&value.re)
    } else {
        format!(
            "{} + {}i",
            exact::format_rational(&value.re),
            exact::format_rational(&value.im)
        )
    }
}

/// Σ_j |c_j|², a convenient oracle for L·η(0).
pub fn energy(comb: &PeriodicComb) -> Rational {
    comb.coefficients()
        .iter()
        .map(exact::norm_sqr)
        .fold(Rational::zero(), |a, b| a + b)
}

pub fn mean(comb: &PeriodicComb) -> ExactComplex {
    comb.coefficients()
        .iter()
        .fold(ExactComplex::zero(), |a, b| a + b)
        / real(comb.period_rational())
}

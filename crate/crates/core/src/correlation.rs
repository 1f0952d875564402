//! Autocorrelation coefficients η(m): empirical estimates from finite combs and
//! exact values from the substitution recursions.

use num_complex::Complex64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, int, rat, real, ExactComplex, Rational};
use crate::substitution::check_block_lengths;
use crate::window::WeightedComb;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    Exact,
    Empirical,
}

impl SeriesKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SeriesKind::Exact => "exact",
            SeriesKind::Empirical => "empirical",
        }
    }
}

/// η(m) (and optionally ϑ(m)) for m in `[-max_lag, max_lag]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationSeries {
    pub label: String,
    max_lag: usize,
    kind: SeriesKind,
    eta: Vec<Complex64>,
    theta: Option<Vec<Complex64>>,
    exact_eta: Option<Vec<ExactComplex>>,
    exact_theta: Option<Vec<ExactComplex>>,
    /// Window size 2N+1 used by the empirical estimator.
    normalisation: Option<usize>,
}

impl CorrelationSeries {
    /// Empirical (floating point) series; values are indexed from `-max_lag`.
    pub fn empirical(
        label: impl Into<String>,
        eta: Vec<Complex64>,
        theta: Option<Vec<Complex64>>,
        normalisation: usize,
    ) -> Result<Self> {
        let max_lag = Self::lag_from_len(eta.len())?;
        if theta.as_ref().is_some_and(|t| t.len() != eta.len()) {
            return Err(Error::InvalidParameter("η and ϑ lengths differ".into()));
        }
        Ok(Self {
            label: label.into(),
            max_lag,
            kind: SeriesKind::Empirical,
            eta,
            theta,
            exact_eta: None,
            exact_theta: None,
            normalisation: Some(normalisation),
        })
    }

    pub fn exact(
        label: impl Into<String>,
        eta: Vec<ExactComplex>,
        theta: Option<Vec<ExactComplex>>,
    ) -> Result<Self> {
        let max_lag = Self::lag_from_len(eta.len())?;
        if theta.as_ref().is_some_and(|t| t.len() != eta.len()) {
            return Err(Error::InvalidParameter("η and ϑ lengths differ".into()));
        }
        let to_f64 = |v: &Vec<ExactComplex>| v.iter().map(exact::complex_to_f64).collect();
        Ok(Self {
            label: label.into(),
            max_lag,
            kind: SeriesKind::Exact,
            eta: to_f64(&eta),
            theta: theta.as_ref().map(to_f64),
            exact_eta: Some(eta),
            exact_theta: theta,
            normalisation: None,
        })
    }

    pub(crate) fn exact_real(
        label: impl Into<String>,
        eta: Vec<Rational>,
        theta: Option<Vec<Rational>>,
    ) -> Result<Self> {
        Self::exact(
            label,
            eta.into_iter().map(real).collect(),
            theta.map(|t| t.into_iter().map(real).collect()),
        )
    }

    fn lag_from_len(len: usize) -> Result<usize> {
        if len % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "series over [-M, M] needs an odd length, got {len}"
            )));
        }
        Ok(len / 2)
    }

    pub fn max_lag(&self) -> usize {
        self.max_lag
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn normalisation(&self) -> Option<usize> {
        self.normalisation
    }

    pub fn lags(&self) -> impl Iterator<Item = i64> {
        let m = self.max_lag as i64;
        -m..=m
    }

    fn slot(&self, m: i64) -> Option<usize> {
        (m.unsigned_abs() as usize <= self.max_lag).then(|| (m + self.max_lag as i64) as usize)
    }

    pub fn eta(&self, m: i64) -> Option<Complex64> {
        self.slot(m).map(|i| self.eta[i])
    }

    pub fn theta(&self, m: i64) -> Option<Complex64> {
        let i = self.slot(m)?;
        self.theta.as_ref().map(|t| t[i])
    }

    pub fn exact_eta(&self, m: i64) -> Option<&ExactComplex> {
        let i = self.slot(m)?;
        self.exact_eta.as_ref().map(|v| &v[i])
    }

    pub fn exact_theta(&self, m: i64) -> Option<&ExactComplex> {
        let i = self.slot(m)?;
        self.exact_theta.as_ref().map(|v| &v[i])
    }

    pub fn eta_values(&self) -> &[Complex64] {
        &self.eta
    }

    pub fn theta_values(&self) -> Option<&[Complex64]> {
        self.theta.as_deref()
    }

    pub fn exact_eta_values(&self) -> Option<&[ExactComplex]> {
        self.exact_eta.as_deref()
    }

    pub fn exact_theta_values(&self) -> Option<&[ExactComplex]> {
        self.exact_theta.as_deref()
    }

    pub fn has_theta(&self) -> bool {
        self.theta.is_some()
    }

    pub fn is_real(&self) -> bool {
        self.real_violation().is_none()
    }

    fn real_violation(&self) -> Option<i64> {
        match &self.exact_eta {
            Some(values) => values.iter().position(|v| !v.im.is_zero()),
            None => self.eta.iter().position(|v| v.im != 0.0),
        }
        .map(|i| i as i64 - self.max_lag as i64)
    }

    /// Real parts of η(0..=max_lag), rejecting complex series.
    pub fn real_one_sided(&self) -> Result<Vec<f64>> {
        if let Some(m) = self.real_violation() {
            return Err(Error::ComplexSeries(m));
        }
        Ok(self.eta[self.max_lag..].iter().map(|v| v.re).collect())
    }

    /// Restriction to `[-max_lag, max_lag]`.
    pub fn truncated(&self, max_lag: usize) -> Result<Self> {
        if max_lag > self.max_lag {
            return Err(Error::LagTooLarge {
                requested: max_lag,
                available: self.max_lag,
            });
        }
        let range = self.max_lag - max_lag..=self.max_lag + max_lag;
        Ok(Self {
            label: self.label.clone(),
            max_lag,
            kind: self.kind,
            eta: self.eta[range.clone()].to_vec(),
            theta: self.theta.as_ref().map(|t| t[range.clone()].to_vec()),
            exact_eta: self.exact_eta.as_ref().map(|t| t[range.clone()].to_vec()),
            exact_theta: self.exact_theta.as_ref().map(|t| t[range].to_vec()),
            normalisation: self.normalisation,
        })
    }

    /// Checks Hermitian symmetry, a real nonnegative η(0) and |η(m)| ≤ η(0).
    /// Exact series are checked exactly; `tol` applies to floating values.
    pub fn check_invariants(&self, tol: f64) -> std::result::Result<(), String> {
        if let Some(values) = &self.exact_eta {
            let centre = &values[self.max_lag];
            if !centre.im.is_zero() || centre.re < Rational::zero() {
                return Err(format!("η(0) = {} is not real and nonnegative", centre));
            }
            let bound = &centre.re * &centre.re;
            for m in 1..=self.max_lag {
                let (plus, minus) = (&values[self.max_lag + m], &values[self.max_lag - m]);
                if *minus != plus.conj() {
                    return Err(format!("η(-{m}) ≠ conj η({m})"));
                }
                if exact::norm_sqr(plus) > bound {
                    return Err(format!("|η({m})| exceeds η(0)"));
                }
            }
            return Ok(());
        }
        let centre = self.eta[self.max_lag];
        if centre.im.abs() > tol || centre.re < -tol {
            return Err(format!("η(0) = {centre} is not real and nonnegative"));
        }
        for m in 1..=self.max_lag {
            let (plus, minus) = (self.eta[self.max_lag + m], self.eta[self.max_lag - m]);
            if (minus - plus.conj()).norm() > tol {
                return Err(format!("η(-{m}) ≠ conj η({m})"));
            }
            if plus.norm() > centre.re + tol {
                return Err(format!("|η({m})| = {} exceeds η(0) = {}", plus.norm(), centre.re));
            }
        }
        Ok(())
    }

    /// Whether ϑ(−m) = conj ϑ(m) holds on the stored range. Reported, not assumed.
    pub fn theta_is_hermitian(&self) -> Option<bool> {
        if let Some(values) = &self.exact_theta {
            return Some((1..=self.max_lag).all(|m| {
                values[self.max_lag - m] == values[self.max_lag + m].conj()
            }));
        }
        self.theta.as_ref().map(|values| {
            (1..=self.max_lag).all(|m| values[self.max_lag - m] == values[self.max_lag + m].conj())
        })
    }
}

/// η(m) = (1/(2N+1)) Σ_{n=−N}^{N} w(n) conj(w(n−m)) for |m| ≤ M, with terms
/// outside the window dropped. Negative lags are the conjugates of positive ones.
pub fn empirical_autocorrelation(comb: &WeightedComb, max_lag: usize) -> Result<CorrelationSeries> {
    if comb.is_empty() {
        return Err(Error::InvalidParameter("empty comb".into()));
    }
    if max_lag > comb.half_length() {
        return Err(Error::LagTooLarge {
            requested: max_lag,
            available: comb.half_length(),
        });
    }
    let count = comb.len();
    let scale = 1.0 / count as f64;
    let positive: Vec<Complex64> = if comb.is_real() {
        let w: Vec<f64> = comb.weights().iter().map(|c| c.re).collect();
        (0..=max_lag)
            .into_par_iter()
            .map(|m| Complex64::new(dot_real(&w[m..], &w[..count - m]) * scale, 0.0))
            .collect()
    } else {
        let w = comb.weights();
        (0..=max_lag)
            .into_par_iter()
            .map(|m| {
                w[m..]
                    .iter()
                    .zip(&w[..count - m])
                    .fold(Complex64::zero(), |acc, (a, b)| acc + a * b.conj())
                    * scale
            })
            .collect()
    };
    let mut eta: Vec<Complex64> = positive[1..].iter().rev().map(|v| v.conj()).collect();
    eta.extend_from_slice(&positive);
    CorrelationSeries::empirical(
        format!("empirical({})", comb.provenance),
        eta,
        None,
        count,
    )
}

/// Σ a_i b_i with eight fixed accumulation lanes (deterministic, vectorisable).
pub(crate) fn dot_real(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut lanes = [0.0f64; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            lanes[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    lanes.iter().sum::<f64>() + tail
}

/// A linear recursion for one or more coupled coefficient families on ℤ, where
/// the value at n = radix·m + r is a rational combination of values at m, m+1.
trait LinearRecursion {
    fn series(&self) -> usize;
    fn radix(&self) -> i64;
    /// (series, index, coefficient) terms for `series` at `n`.
    fn terms(&self, series: usize, n: i64) -> Vec<(usize, i64, Rational)>;
}

/// Tables of every series over `[-max_lag, max_lag]`. Values at −1, 0, 1 come
/// from solving the recursion's own equations there together with η(0) = 1;
/// every other index descends to strictly smaller |index|.
fn solve_recursion(rec: &impl LinearRecursion, max_lag: usize) -> Result<Vec<Vec<Rational>>> {
    let s_count = rec.series();
    let unknown = |s: usize, i: i64| s * 3 + (i + 1) as usize;
    let width = s_count * 3;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for s in 0..s_count {
        for i in -1..=1 {
            let mut row = vec![Rational::zero(); width];
            row[unknown(s, i)] += Rational::one();
            for (t, j, c) in rec.terms(s, i) {
                assert!((-1..=1).contains(&j), "base equation leaves the base range");
                row[unknown(t, j)] -= c;
            }
            rows.push(row);
            rhs.push(Rational::zero());
        }
    }
    let mut norm = vec![Rational::zero(); width];
    norm[unknown(0, 0)] = Rational::one();
    rows.push(norm);
    rhs.push(Rational::one());
    let base = exact::solve_linear(rows, rhs)?;

    let m = max_lag as i64;
    let offset = max_lag.max(1) as i64;
    let mut tables = vec![vec![None::<Rational>; (2 * offset + 1) as usize]; s_count];
    for (s, table) in tables.iter_mut().enumerate() {
        for i in -1..=1 {
            table[(i + offset) as usize] = Some(base[unknown(s, i)].clone());
        }
    }
    for a in 2..=m {
        for n in [a, -a] {
            for s in 0..s_count {
                let mut value = Rational::zero();
                for (t, j, c) in rec.terms(s, n) {
                    let prior = tables[t][(j + offset) as usize]
                        .as_ref()
                        .expect("recursion descends to smaller |index|");
                    value += c * prior;
                }
                tables[s][(n + offset) as usize] = Some(value);
            }
        }
    }
    let skip = (offset - m) as usize;
    Ok(tables
        .into_iter()
        .map(|t| {
            t.into_iter()
                .skip(skip)
                .take(2 * max_lag + 1)
                .map(|v| v.expect("filled"))
                .collect()
        })
        .collect())
}

struct ThueMorse;

impl LinearRecursion for ThueMorse {
    fn series(&self) -> usize {
        1
    }

    fn radix(&self) -> i64 {
        2
    }

    fn terms(&self, _series: usize, n: i64) -> Vec<(usize, i64, Rational)> {
        let (m, r) = (n.div_euclid(2), n.rem_euclid(2));
        if r == 0 {
            vec![(0, m, int(1))]
        } else {
            vec![(0, m, rat(-1, 2)), (0, m + 1, rat(-1, 2))]
        }
    }
}

struct GeneralizedMorse {
    k: i64,
    l: i64,
}

impl GeneralizedMorse {
    fn alpha(&self, r: i64) -> i64 {
        let b = self.k + self.l;
        b - r - 2 * self.k.min(self.l).min(r).min(b - r)
    }
}

impl LinearRecursion for GeneralizedMorse {
    fn series(&self) -> usize {
        1
    }

    fn radix(&self) -> i64 {
        self.k + self.l
    }

    fn terms(&self, _series: usize, n: i64) -> Vec<(usize, i64, Rational)> {
        let b = self.radix();
        let (m, r) = (n.div_euclid(b), n.rem_euclid(b));
        [(m, self.alpha(r)), (m + 1, self.alpha(b - r))]
            .into_iter()
            .filter(|&(_, a)| a != 0)
            .map(|(j, a)| (0, j, rat(a, b)))
            .collect()
    }
}

/// η is series 0, ϑ series 1.
struct RudinShapiro;

impl LinearRecursion for RudinShapiro {
    fn series(&self) -> usize {
        2
    }

    fn radix(&self) -> i64 {
        4
    }

    fn terms(&self, series: usize, n: i64) -> Vec<(usize, i64, Rational)> {
        const ETA: usize = 0;
        const THETA: usize = 1;
        let (m, r) = (n.div_euclid(4), n.rem_euclid(4));
        let s: i64 = if m.rem_euclid(2) == 0 { 1 } else { -1 };
        let terms = match (series, r) {
            (ETA, 0) => vec![(ETA, m, rat(1 + s, 2))],
            (ETA, 2) => vec![],
            (ETA, 1) => vec![
                (ETA, m, rat(1 - s, 4)),
                (THETA, m, rat(s, 4)),
                (THETA, m + 1, rat(-1, 4)),
            ],
            (ETA, 3) => vec![
                (ETA, m + 1, rat(1 + s, 4)),
                (THETA, m, rat(-s, 4)),
                (THETA, m + 1, rat(1, 4)),
            ],
            (THETA, 0) => vec![],
            (THETA, 2) => vec![(THETA, m, rat(s, 2)), (THETA, m + 1, rat(1, 2))],
            (THETA, 1) => vec![
                (ETA, m, rat(1 - s, 4)),
                (THETA, m, rat(-s, 4)),
                (THETA, m + 1, rat(1, 4)),
            ],
            (THETA, 3) => vec![
                (ETA, m + 1, rat(-(1 + s), 4)),
                (THETA, m, rat(-s, 4)),
                (THETA, m + 1, rat(1, 4)),
            ],
            _ => unreachable!("two series, remainder mod 4"),
        };
        terms.into_iter().filter(|(_, _, c)| !c.is_zero()).collect()
    }
}

/// Thue–Morse: η(2m) = η(m), η(2m+1) = −(η(m) + η(m+1))/2.
pub fn tm_exact_eta(max_lag: usize) -> CorrelationSeries {
    let mut tables = solve_recursion(&ThueMorse, max_lag).expect("TM base system is regular");
    CorrelationSeries::exact_real("tm exact", tables.remove(0), None).expect("odd length")
}

/// Generalised Morse (k, ℓ): η((k+ℓ)m + r) = (α_r η(m) + α_{k+ℓ−r} η(m+1)) / (k+ℓ)
/// with α_r = k+ℓ−r−2·min(k, ℓ, r, k+ℓ−r).
pub fn gm_exact_eta(k: usize, l: usize, max_lag: usize) -> Result<CorrelationSeries> {
    check_block_lengths(k, l)?;
    let rec = GeneralizedMorse {
        k: k as i64,
        l: l as i64,
    };
    let mut tables = solve_recursion(&rec, max_lag)?;
    CorrelationSeries::exact_real(format!("gm:{k},{l} exact"), tables.remove(0), None)
}

/// α_{k,ℓ,r} for r = 0..=k+ℓ.
pub fn gm_alpha(k: usize, l: usize) -> Result<Vec<i64>> {
    check_block_lengths(k, l)?;
    let rec = GeneralizedMorse {
        k: k as i64,
        l: l as i64,
    };
    Ok((0..=rec.radix()).map(|r| rec.alpha(r)).collect())
}

/// Rudin–Shapiro η and ϑ from the eight coupled recursions.
pub fn rs_exact_eta_theta(max_lag: usize) -> CorrelationSeries {
    let mut tables = solve_recursion(&RudinShapiro, max_lag).expect("RS base system is regular");
    let theta = tables.pop();
    CorrelationSeries::exact_real("rs exact", tables.remove(0), theta).expect("odd length")
}

/// Σ(N) = Σ_{n=−N}^{N} |η(n)|².
pub fn wiener_sigma(series: &CorrelationSeries, n: usize) -> Result<f64> {
    if n > series.max_lag() {
        return Err(Error::LagTooLarge {
            requested: n,
            available: series.max_lag(),
        });
    }
    let n = n as i64;
    Ok((-n..=n).map(|m| series.eta(m).expect("in range").norm_sqr()).sum())
}

/// Exact Σ(N), when the series carries exact values.
pub fn wiener_sigma_exact(series: &CorrelationSeries, n: usize) -> Result<Option<Rational>> {
    if n > series.max_lag() {
        return Err(Error::LagTooLarge {
            requested: n,
            available: series.max_lag(),
        });
    }
    if series.exact_eta_values().is_none() {
        return Ok(None);
    }
    let n = n as i64;
    Ok(Some(
        (-n..=n)
            .map(|m| exact::norm_sqr(series.exact_eta(m).expect("in range")))
            .sum(),
    ))
}

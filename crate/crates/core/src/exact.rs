//! Exact rational and complex-rational helpers.

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;
pub type ExactComplex = Complex<BigRational>;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn real(value: Rational) -> ExactComplex {
    Complex::new(value, Rational::zero())
}

/// Exact rational image of a finite `f64`.
pub fn from_f64(value: f64) -> Result<Rational> {
    Rational::from_float(value)
        .ok_or_else(|| Error::InvalidParameter(format!("non-finite value {value}")))
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

pub fn complex_to_f64(value: &ExactComplex) -> Complex64 {
    Complex64::new(to_f64(&value.re), to_f64(&value.im))
}

pub fn norm_sqr(value: &ExactComplex) -> Rational {
    &value.re * &value.re + &value.im * &value.im
}

/// `p/q` (or `p` when q = 1), always in lowest terms.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let parse_int = |s: &str| {
        s.trim()
            .parse::<BigInt>()
            .map_err(|e| Error::Parse(format!("`{text}`: {e}")))
    };
    match text.split_once('/') {
        Some((p, q)) => {
            let q = parse_int(q)?;
            if q.is_zero() {
                return Err(Error::Parse(format!("`{text}`: zero denominator")));
            }
            Ok(Rational::new(parse_int(p)?, q))
        }
        None => Ok(Rational::from_integer(parse_int(text)?)),
    }
}

/// Solves `A x = b` exactly. Overdetermined systems are accepted as long as they
/// are consistent and have full column rank.
pub fn solve_linear(mut rows: Vec<Vec<Rational>>, mut rhs: Vec<Rational>) -> Result<Vec<Rational>> {
    let unknowns = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != unknowns) || rows.len() != rhs.len() {
        return Err(Error::InvalidParameter("ragged linear system".into()));
    }
    let mut pivot_row = 0;
    for col in 0..unknowns {
        let Some(found) = (pivot_row..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            return Err(Error::Singular("rank deficient"));
        };
        rows.swap(pivot_row, found);
        rhs.swap(pivot_row, found);
        let pivot = rows[pivot_row][col].clone();
        for c in col..unknowns {
            rows[pivot_row][c] = &rows[pivot_row][c] / &pivot;
        }
        rhs[pivot_row] = &rhs[pivot_row] / &pivot;
        for r in 0..rows.len() {
            if r == pivot_row || rows[r][col].is_zero() {
                continue;
            }
            let factor = rows[r][col].clone();
            for c in col..unknowns {
                let delta = &factor * &rows[pivot_row][c];
                rows[r][c] -= delta;
            }
            let delta = &factor * &rhs[pivot_row];
            rhs[r] -= delta;
        }
        pivot_row += 1;
    }
    if rhs[pivot_row..].iter().any(|v| !v.is_zero()) {
        return Err(Error::Singular("inconsistent"));
    }
    rhs.truncate(unknowns);
    Ok(rhs)
}

pub fn abs(value: &Rational) -> Rational {
    value.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_text_round_trip() {
        for (p, q) in [(-1, 3), (5692, 6), (0, 7), (12, 4)] {
            let r = rat(p, q);
            assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
        assert_eq!(format_rational(&rat(5692, 6)), "2846/3");
        assert_eq!(format_rational(&rat(4, 2)), "2");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn solves_overdetermined_consistent_system() {
        // x = 1, 3y = -x, y + x = 2/3
        let rows = vec![
            vec![int(1), int(0)],
            vec![int(1), int(3)],
            vec![int(1), int(1)],
        ];
        let rhs = vec![int(1), int(0), rat(2, 3)];
        let x = solve_linear(rows, rhs).unwrap();
        assert_eq!(x, vec![int(1), rat(-1, 3)]);
    }

    #[test]
    fn rejects_singular_and_inconsistent() {
        let rows = vec![vec![int(1), int(1)], vec![int(2), int(2)]];
        assert!(solve_linear(rows, vec![int(1), int(2)]).is_err());
        let rows = vec![vec![int(1)], vec![int(1)]];
        assert!(solve_linear(rows, vec![int(1), int(2)]).is_err());
    }
}

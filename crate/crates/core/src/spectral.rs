//! Pure point diffraction: Bragg peaks of periodic and period-doubling combs,
//! and the finite-window intensity estimators.

use std::f64::consts::TAU;

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, real, ExactComplex};
use crate::periodic::{periodic_eta, PeriodicComb};
use crate::window::WeightedComb;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Frequency {
    Rational { num: i64, den: u64 },
    Real { value: f64 },
}

impl Frequency {
    /// `num/den` in lowest terms with a positive denominator.
    pub fn rational(num: i64, den: u64) -> Self {
        let g = (num.unsigned_abs()).gcd(&den).max(1);
        Frequency::Rational {
            num: num / g as i64,
            den: den / g,
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Frequency::Rational { num, den } => num as f64 / den as f64,
            Frequency::Real { value } => value,
        }
    }
}

/// Σ_t c_t ζ^t with ζ = e^{−2πi/order}: an exact intensity expressed in the
/// group ring of ℤ/order. Equal coefficient vectors certify equal intensities.
#[derive(Clone, Debug, PartialEq)]
pub struct CyclotomicValue {
    pub order: usize,
    pub coefficients: Vec<ExactComplex>,
}

impl CyclotomicValue {
    pub fn to_f64(&self) -> f64 {
        let n = self.order as f64;
        self.coefficients
            .iter()
            .enumerate()
            .map(|(t, c)| {
                let (s, co) = (TAU * t as f64 / n).sin_cos();
                exact::complex_to_f64(c) * Complex64::new(co, -s)
            })
            .sum::<Complex64>()
            .re
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BraggPeak {
    pub frequency: Frequency,
    pub intensity: f64,
    pub exact: Option<CyclotomicValue>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PurePointSpectrum {
    pub peaks: Vec<BraggPeak>,
    /// Description of the frequency module the peaks are drawn from.
    pub module: String,
}

impl PurePointSpectrum {
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if let Some(p) = self.peaks.iter().find(|p| !(p.intensity >= 0.0)) {
            return Err(format!("negative intensity {} at {:?}", p.intensity, p.frequency));
        }
        for (i, a) in self.peaks.iter().enumerate() {
            if self.peaks[i + 1..].iter().any(|b| b.frequency == a.frequency) {
                return Err(format!("duplicate frequency {:?}", a.frequency));
            }
        }
        Ok(())
    }

    pub fn all_rational(&self) -> bool {
        self.peaks
            .iter()
            .all(|p| matches!(p.frequency, Frequency::Rational { .. }))
    }

    pub fn intensity_at(&self, frequency: &Frequency) -> Option<f64> {
        self.peaks
            .iter()
            .find(|p| p.frequency == *frequency)
            .map(|p| p.intensity)
    }
}

/// Bragg peaks of δ_{Lℤ} ∗ Σ c_j δ_j at k = j/L over one period of the module.
///
/// Poisson summation for Lℤ (density 1/L, dual lattice ℤ/L) gives
/// γ̂ = (1/L²) |Σ_n c_n e^{−2πikn}|² δ_{ℤ/L}. Expanding the square,
/// I(j/L) = (1/L) Σ_{m=0}^{L−1} η(m) ζ^{jm}, which is what is evaluated here so
/// that homometric combs give identical output by construction. For L = 1 and
/// c₀ = 1 this is the lattice result γ̂ = δ_ℤ.
pub fn periodic_diffraction(comb: &PeriodicComb) -> PurePointSpectrum {
    let l = comb.period();
    let eta: Vec<ExactComplex> = (0..l as i64).map(|m| periodic_eta(comb, m)).collect();
    let scale = real(exact::int(l as i64));
    let peaks = (0..l)
        .map(|j| {
            let mut coefficients = vec![ExactComplex::zero(); l];
            for (m, value) in eta.iter().enumerate() {
                coefficients[(j * m) % l] += value;
            }
            for c in coefficients.iter_mut() {
                *c = &*c / &scale;
            }
            let exact = CyclotomicValue {
                order: l,
                coefficients,
            };
            BraggPeak {
                frequency: Frequency::rational(j as i64, l as u64),
                // rounding can leave −1e-16 on an exact zero
                intensity: exact.to_f64().max(0.0),
                exact: Some(exact),
            }
        })
        .collect();
    PurePointSpectrum {
        peaks,
        module: format!("ℤ/{l}, one period"),
    }
}

/// Direct (1/L²)|Σ c_n e^{−2πikn}|², used to cross-check [`periodic_diffraction`].
pub fn periodic_intensity_direct(comb: &PeriodicComb, k: f64) -> f64 {
    let l = comb.period();
    let sum: Complex64 = comb
        .coefficients()
        .iter()
        .enumerate()
        .map(|(n, c)| exact::complex_to_f64(c) * Complex64::from_polar(1.0, -TAU * k * n as f64))
        .sum();
    sum.norm_sqr() / (l * l) as f64
}

/// Period-doubling peak at k = m/2^r with intensity |h₊A(k) + h₋B(k)|²,
/// A(k) = 2/(3·(−2)^r)·e^{2πik}, B(k) = δ_{r,0} − A(k).
pub fn pd_bragg_intensity(h_plus: Complex64, h_minus: Complex64, m: i64, r: u32) -> Result<BraggPeak> {
    if r >= 1 && m % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "m = {m} must be odd for r = {r} ≥ 1"
        )));
    }
    if r > 52 {
        return Err(Error::InvalidParameter(format!("r = {r} exceeds 52")));
    }
    let den = 1u64 << r;
    let phase = m.rem_euclid(den as i64) as f64 / den as f64;
    let a = Complex64::from_polar(2.0 / (3.0 * (-2.0f64).powi(r as i32)), TAU * phase);
    let b = if r == 0 { Complex64::new(1.0, 0.0) } else { Complex64::zero() } - a;
    Ok(BraggPeak {
        frequency: Frequency::rational(m, den),
        intensity: (h_plus * a + h_minus * b).norm_sqr(),
        exact: None,
    })
}

/// All period-doubling peaks with k ∈ [0, 1) and r ≤ `max_r`.
pub fn pd_bragg_spectrum(h_plus: Complex64, h_minus: Complex64, max_r: u32) -> Result<PurePointSpectrum> {
    let mut peaks = vec![pd_bragg_intensity(h_plus, h_minus, 0, 0)?];
    for r in 1..=max_r {
        for m in (1..1i64 << r).step_by(2) {
            peaks.push(pd_bragg_intensity(h_plus, h_minus, m, r)?);
        }
    }
    Ok(PurePointSpectrum {
        peaks,
        module: format!("⋃ ℤ/2^r, r ≤ {max_r}, k in [0, 1)"),
    })
}

fn window_sum(comb: &WeightedComb, k: f64) -> Complex64 {
    let n0 = -(comb.half_length() as i64);
    comb.weights()
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let n = n0 + i as i64;
            let phase = (k * n as f64).rem_euclid(1.0);
            w * Complex64::from_polar(1.0, -TAU * phase)
        })
        .sum()
}

/// (1/(2N+1)) |Σ_{n=−N}^{N} w(n) e^{−2πikn}|². Grows like (2N+1)·I at a Bragg
/// peak of weight I and stays bounded elsewhere.
pub fn empirical_diffraction_intensity(comb: &WeightedComb, k: f64) -> f64 {
    window_sum(comb, k).norm_sqr() / comb.len() as f64
}

/// (1/(2N+1)²) |Σ w(n) e^{−2πikn}|², which converges to the weight of a
/// Bragg peak at k (and to 0 where there is none).
pub fn empirical_bragg_intensity(comb: &WeightedComb, k: f64) -> f64 {
    let count = comb.len() as f64;
    window_sum(comb, k).norm_sqr() / (count * count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periodic::{homometric_pair, mean};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn unit_lattice_peak() {
        let c = PeriodicComb::from_integers(&[1]).unwrap();
        let s = periodic_diffraction(&c);
        assert_eq!(s.peaks.len(), 1);
        assert_eq!(s.peaks[0].frequency, Frequency::rational(0, 1));
        assert_eq!(s.peaks[0].intensity, 1.0);
    }

    #[test]
    fn zero_peak_is_squared_mean() {
        let c = PeriodicComb::from_integers(&[3, -1, 4, 1, -5, 9]).unwrap();
        let s = periodic_diffraction(&c);
        let m = exact::complex_to_f64(&mean(&c)).norm_sqr();
        assert!(close(s.peaks[0].intensity, m, 1e-12));
        for p in &s.peaks {
            let direct = periodic_intensity_direct(&c, p.frequency.value());
            assert!(close(p.intensity, direct, 1e-9), "{:?}", p.frequency);
        }
        s.check_invariants().unwrap();
    }

    #[test]
    fn homometric_pair_has_identical_spectra() {
        let (a, b) = homometric_pair();
        let (sa, sb) = (periodic_diffraction(&a), periodic_diffraction(&b));
        assert_eq!(sa, sb);
        for (pa, pb) in sa.peaks.iter().zip(&sb.peaks) {
            assert_eq!(pa.exact, pb.exact);
            assert_eq!(pa.intensity.to_bits(), pb.intensity.to_bits());
        }
    }

    #[test]
    fn pd_amplitudes() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::zero();
        for m in -3..=3 {
            let p = pd_bragg_intensity(one, zero, m, 0).unwrap();
            assert!(close(p.intensity, 4.0 / 9.0, 1e-15));
            let p = pd_bragg_intensity(one, one, m, 0).unwrap();
            assert!(close(p.intensity, 1.0, 1e-15));
        }
        for (m, r) in [(1, 1), (3, 2), (-5, 3)] {
            let p = pd_bragg_intensity(one, one, m, r).unwrap();
            assert!(close(p.intensity, 0.0, 1e-15));
        }
        let half = pd_bragg_intensity(one, zero, 1, 1).unwrap();
        assert!(close(half.intensity, 1.0 / 9.0, 1e-15));
        assert_eq!(half.frequency, Frequency::Rational { num: 1, den: 2 });
        assert!(pd_bragg_intensity(one, zero, 2, 1).is_err());
    }

    #[test]
    fn pd_spectrum_covers_module() {
        let s = pd_bragg_spectrum(Complex64::new(1.0, 0.0), Complex64::zero(), 3).unwrap();
        assert_eq!(s.peaks.len(), 1 + 1 + 2 + 4);
        s.check_invariants().unwrap();
    }

    #[test]
    fn all_ones_window() {
        let comb = WeightedComb::from_real(&[1.0; 2 * 500 + 1], "ones").unwrap();
        assert!(close(empirical_diffraction_intensity(&comb, 0.0), 1001.0, 1e-9));
        // geometric sum at k = 1/2 alternates, leaving one term
        assert!(empirical_diffraction_intensity(&comb, 0.5) <= 1.0 / 1001.0 + 1e-12);
        assert!(close(empirical_bragg_intensity(&comb, 0.0), 1.0, 1e-12));
    }
}

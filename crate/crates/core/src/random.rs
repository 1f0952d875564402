//! Random combs: Bernoulli combs, weighted coin combs and Bernoullisations of
//! ±1 sequences, with their almost-sure autocorrelation and diffraction, and a
//! Monte Carlo harness.
//!
//! Randomness comes from ChaCha8 used as a counter-based generator: the draw for
//! (seed, trial, n) is word `n as u64` (two's complement) of stream `trial`
//! under key `seed`, so any index can be regenerated on its own.

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::{dot_real, CorrelationSeries};
use crate::error::{Error, Result};
use crate::exact::{self, int, real, Rational};
use crate::spectral::{BraggPeak, Frequency, PurePointSpectrum};
use crate::window::WeightedComb;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomCombSpec {
    pub p: f64,
    pub h_plus: Complex64,
    pub h_minus: Complex64,
    pub half_length: usize,
    pub seed: u64,
    /// ±1 comb to Bernoullise; plain Bernoulli sampling when absent.
    #[serde(skip)]
    pub base: Option<WeightedComb>,
}

impl RandomCombSpec {
    /// h± = ±1.
    pub fn signed(p: f64, half_length: usize, seed: u64) -> Self {
        Self {
            p,
            h_plus: Complex64::new(1.0, 0.0),
            h_minus: Complex64::new(-1.0, 0.0),
            half_length,
            seed,
            base: None,
        }
    }

    pub fn with_base(mut self, base: WeightedComb) -> Self {
        self.base = Some(base);
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_probability(self.p)?;
        if let Some(base) = &self.base {
            check_signed_base(base)?;
            if base.half_length() < self.half_length {
                return Err(Error::InvalidParameter(format!(
                    "base half-length {} is shorter than N = {}",
                    base.half_length(),
                    self.half_length
                )));
            }
        }
        Ok(())
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} is not in [0, 1]")));
    }
    Ok(())
}

fn check_signed_base(base: &WeightedComb) -> Result<()> {
    let plus = Complex64::new(1.0, 0.0);
    if let Some((i, w)) = base
        .weights()
        .iter()
        .enumerate()
        .find(|(_, w)| **w != plus && **w != -plus)
    {
        return Err(Error::InvalidParameter(format!(
            "base weight {w} at n = {} is not ±1",
            i as i64 - base.half_length() as i64
        )));
    }
    Ok(())
}

/// Draws W_n = h₊ with probability p for n in [−N, N] on stream `trial`;
/// true means h₊.
fn draw_signs(seed: u64, trial: u64, p: f64, half_length: usize) -> Vec<bool> {
    // u32 < round(p·2³²): p = 1 always passes, p = 0 never does
    let threshold = (p * 4294967296.0).round() as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let mut out = Vec::with_capacity(2 * half_length + 1);
    if half_length > 0 {
        rng.set_word_pos((half_length as u64).wrapping_neg() as u128);
        out.extend((0..half_length).map(|_| (rng.next_u32() as u64) < threshold));
    }
    rng.set_word_pos(0);
    out.extend((0..=half_length).map(|_| (rng.next_u32() as u64) < threshold));
    out
}

fn sample_trial(spec: &RandomCombSpec, trial: u64, half_length: usize) -> Result<WeightedComb> {
    let signs = draw_signs(spec.seed, trial, spec.p, half_length);
    let weights = match &spec.base {
        None => signs
            .iter()
            .map(|&s| if s { spec.h_plus } else { spec.h_minus })
            .collect(),
        Some(base) => {
            let offset = base.half_length() - half_length;
            signs
                .iter()
                .zip(&base.weights()[offset..])
                .map(|(&s, &b)| if s { b } else { -b })
                .collect()
        }
    };
    let provenance = match &spec.base {
        None => format!("bernoulli p={} seed={} trial={trial}", spec.p, spec.seed),
        Some(base) => format!(
            "bernoullisation of {} p={} seed={} trial={trial}",
            base.provenance, spec.p, spec.seed
        ),
    };
    WeightedComb::new(weights, provenance)
}

/// W_n i.i.d., h₊ with probability p and h₋ otherwise, on stream 0.
pub fn sample_bernoulli_comb(spec: &RandomCombSpec) -> Result<WeightedComb> {
    if spec.base.is_some() {
        return Err(Error::InvalidParameter(
            "base comb set; use sample_bernoullisation".into(),
        ));
    }
    spec.validate()?;
    sample_trial(spec, 0, spec.half_length)
}

/// S_n·W_n with W_n = +1 (probability p) or −1, on stream 0. h± are ignored.
pub fn sample_bernoullisation(spec: &RandomCombSpec) -> Result<WeightedComb> {
    if spec.base.is_none() {
        return Err(Error::InvalidParameter("no base comb to Bernoullise".into()));
    }
    spec.validate()?;
    sample_trial(spec, 0, spec.half_length)
}

/// (2p − 1)² as an exact rational, p read exactly from its binary value.
fn coherent_fraction(p: f64) -> Result<Rational> {
    check_probability(p)?;
    let s = exact::from_f64(p)? * int(2) - int(1);
    Ok(&s * &s)
}

/// η(0) = 1 and η(m) = (2p − 1)² for m ≠ 0 (h± = ±1).
pub fn predicted_bernoulli_autocorrelation(p: f64, max_lag: usize) -> Result<CorrelationSeries> {
    let c = coherent_fraction(p)?;
    let eta = (0..=2 * max_lag)
        .map(|i| real(if i == max_lag { int(1) } else { c.clone() }))
        .collect();
    CorrelationSeries::exact(format!("bernoulli p={p} predicted"), eta, None)
}

/// General weights: η(0) = p|h₊|² + (1−p)|h₋|² and η(m) = |p h₊ + (1−p) h₋|²
/// for m ≠ 0, with p and h± read exactly from their binary values.
pub fn predicted_weighted_autocorrelation(
    p: f64,
    h_plus: Complex64,
    h_minus: Complex64,
    max_lag: usize,
) -> Result<CorrelationSeries> {
    check_probability(p)?;
    let q = exact::from_f64(p)?;
    let r = int(1) - &q;
    let exact_c = |c: Complex64| -> Result<exact::ExactComplex> {
        Ok(num_complex::Complex::new(exact::from_f64(c.re)?, exact::from_f64(c.im)?))
    };
    let (a, b) = (exact_c(h_plus)?, exact_c(h_minus)?);
    let centre = &q * exact::norm_sqr(&a) + &r * exact::norm_sqr(&b);
    let mean = a * real(q) + b * real(r);
    let off = exact::norm_sqr(&mean);
    let eta = (0..=2 * max_lag)
        .map(|i| real(if i == max_lag { centre.clone() } else { off.clone() }))
        .collect();
    CorrelationSeries::exact(
        format!("bernoulli p={p} h+={h_plus} h-={h_minus} predicted"),
        eta,
        None,
    )
}

/// η(0) = 1 and η(m) = (2p − 1)²·η_S(m) for m ≠ 0. The base must carry exact
/// values with η_S(0) = 1.
pub fn predicted_bernoullisation_autocorrelation(base: &CorrelationSeries, p: f64) -> Result<CorrelationSeries> {
    let c = real(coherent_fraction(p)?);
    let values = base.exact_eta_values().ok_or_else(|| {
        Error::InvalidParameter(format!("base series '{}' has no exact values", base.label))
    })?;
    let centre = base.max_lag();
    if values[centre] != real(int(1)) {
        return Err(Error::InvalidParameter(format!(
            "base η(0) = {} must be 1",
            values[centre]
        )));
    }
    let eta = values
        .iter()
        .enumerate()
        .map(|(i, v)| if i == centre { real(int(1)) } else { v * &c })
        .collect();
    CorrelationSeries::exact(format!("bernoullisation of {} p={p} predicted", base.label), eta, None)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MixedParameters {
    /// h± = ±1 with P(h₊) = p.
    Bernoulli { p: f64 },
    /// h₊ or h₋ with probability 1/2 each.
    FairCoin { h_plus: Complex64, h_minus: Complex64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictedSpectrum {
    /// Peaks on ℤ, listed at k = 0 (the pattern repeats with period 1).
    pub point_part: PurePointSpectrum,
    /// Multiple of Lebesgue measure.
    pub ac_density: f64,
    pub note: String,
}

/// Almost-sure diffraction: a lattice part on ℤ plus a constant density.
/// A zero lattice intensity is reported as no peaks.
pub fn predicted_mixed_diffraction(parameters: MixedParameters) -> Result<PredictedSpectrum> {
    let (peak, ac_density, note) = match parameters {
        MixedParameters::Bernoulli { p } => {
            check_probability(p)?;
            (
                (2.0 * p - 1.0).powi(2),
                4.0 * p * (1.0 - p),
                format!("(2p−1)² δ_ℤ + 4p(1−p) λ, p = {p}"),
            )
        }
        MixedParameters::FairCoin { h_plus, h_minus } => (
            ((h_plus + h_minus) / 2.0).norm_sqr(),
            ((h_plus - h_minus) / 2.0).norm_sqr(),
            format!("|(h₊+h₋)/2|² δ_ℤ + |(h₊−h₋)/2|² λ, h₊ = {h_plus}, h₋ = {h_minus}"),
        ),
    };
    let peaks = if peak > 0.0 {
        vec![BraggPeak {
            frequency: Frequency::rational(0, 1),
            intensity: peak,
            exact: None,
        }]
    } else {
        Vec::new()
    };
    Ok(PredictedSpectrum {
        point_part: PurePointSpectrum {
            peaks,
            module: "ℤ".into(),
        },
        ac_density,
        note,
    })
}

/// (1/(2N+1)) Σ_{n=−N}^{N} w(n) conj(w(n−m)) for m = 0..=M, taken from a comb
/// of half-length N + M so that every product is present.
fn full_overlap_eta(comb: &WeightedComb, n: usize, max_lag: usize) -> Vec<Complex64> {
    let h = comb.half_length();
    debug_assert!(h >= n + max_lag);
    let count = 2 * n + 1;
    let start = h - n;
    let scale = 1.0 / count as f64;
    if comb.is_real() {
        let w: Vec<f64> = comb.weights().iter().map(|c| c.re).collect();
        (0..=max_lag)
            .map(|m| Complex64::new(dot_real(&w[start..start + count], &w[start - m..start - m + count]) * scale, 0.0))
            .collect()
    } else {
        let w = comb.weights();
        (0..=max_lag)
            .map(|m| {
                w[start..start + count]
                    .iter()
                    .zip(&w[start - m..start - m + count])
                    .map(|(a, b)| a * b.conj())
                    .sum::<Complex64>()
                    * scale
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloEta {
    pub trials: usize,
    pub max_lag: usize,
    /// Per-lag sample mean over trials, m = 0..=M.
    pub mean: Vec<Complex64>,
    /// Standard error of the mean; 0 for a single trial.
    pub stderr: Vec<f64>,
    /// η of each trial, m = 0..=M.
    pub per_trial: Vec<Vec<Complex64>>,
}

/// Trial t samples on stream t and estimates η(m) with no dropped products.
/// Bernoullisation needs a base of half-length at least N + M.
pub fn monte_carlo_eta(spec: &RandomCombSpec, trials: usize, max_lag: usize) -> Result<MonteCarloEta> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    check_probability(spec.p)?;
    let extended = spec.half_length + max_lag;
    if let Some(base) = &spec.base {
        check_signed_base(base)?;
        if base.half_length() < extended {
            return Err(Error::InvalidParameter(format!(
                "base half-length {} is shorter than N + M = {extended}",
                base.half_length()
            )));
        }
    }
    let per_trial = (0..trials as u64)
        .into_par_iter()
        .map(|t| sample_trial(spec, t, extended).map(|c| full_overlap_eta(&c, spec.half_length, max_lag)))
        .collect::<Result<Vec<_>>>()?;
    let t = trials as f64;
    let mean: Vec<Complex64> = (0..=max_lag)
        .map(|m| per_trial.iter().map(|row| row[m]).sum::<Complex64>() / t)
        .collect();
    let stderr = (0..=max_lag)
        .map(|m| {
            if trials < 2 {
                return 0.0;
            }
            let ss: f64 = per_trial.iter().map(|row| (row[m] - mean[m]).norm_sqr()).sum();
            (ss / (t * (t - 1.0))).sqrt()
        })
        .collect();
    Ok(MonteCarloEta {
        trials,
        max_lag,
        mean,
        stderr,
        per_trial,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LagBand {
    pub m: usize,
    pub mean: Complex64,
    pub stderr: f64,
    pub predicted: Complex64,
    pub band: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub spec: RandomCombSpec,
    pub base: Option<String>,
    pub trials: usize,
    pub lags: Vec<LagBand>,
    pub all_pass: bool,
}

/// Band half-width 4·stderr, or 4/√(2N+1) for a single trial.
pub fn monte_carlo_report(
    spec: &RandomCombSpec,
    result: &MonteCarloEta,
    predicted: &CorrelationSeries,
) -> Result<MonteCarloReport> {
    if predicted.max_lag() < result.max_lag {
        return Err(Error::LagTooLarge {
            requested: result.max_lag,
            available: predicted.max_lag(),
        });
    }
    let single = 4.0 / ((2 * spec.half_length + 1) as f64).sqrt();
    let lags: Vec<LagBand> = (0..=result.max_lag)
        .map(|m| {
            let expected = predicted.eta(m as i64).expect("lag checked");
            let band = if result.trials < 2 { single } else { 4.0 * result.stderr[m] };
            LagBand {
                m,
                mean: result.mean[m],
                stderr: result.stderr[m],
                predicted: expected,
                band,
                pass: (result.mean[m] - expected).norm() <= band,
            }
        })
        .collect();
    Ok(MonteCarloReport {
        spec: spec.clone(),
        base: spec.base.as_ref().map(|b| b.provenance.clone()),
        trials: result.trials,
        all_pass: lags.iter().all(|l| l.pass),
        lags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::{rs_exact_eta_theta, tm_exact_eta};
    use crate::exact::rat;

    #[test]
    fn endpoints_are_deterministic() {
        let one = sample_bernoulli_comb(&RandomCombSpec::signed(1.0, 100, 7)).unwrap();
        assert!(one.weights().iter().all(|w| *w == Complex64::new(1.0, 0.0)));
        let zero = sample_bernoulli_comb(&RandomCombSpec::signed(0.0, 100, 7)).unwrap();
        assert!(zero.weights().iter().all(|w| *w == Complex64::new(-1.0, 0.0)));
    }

    #[test]
    fn invalid_probability() {
        for p in [-0.1, 1.5, f64::NAN] {
            assert!(sample_bernoulli_comb(&RandomCombSpec::signed(p, 4, 0)).is_err());
            assert!(predicted_bernoulli_autocorrelation(p, 4).is_err());
        }
    }

    #[test]
    fn same_seed_same_comb() {
        let spec = RandomCombSpec::signed(0.5, 1000, 42);
        let (a, b) = (sample_bernoulli_comb(&spec).unwrap(), sample_bernoulli_comb(&spec).unwrap());
        assert_eq!(a, b);
        let c = sample_bernoulli_comb(&RandomCombSpec::signed(0.5, 1000, 43)).unwrap();
        assert_ne!(a.weights(), c.weights());
    }

    #[test]
    fn windows_are_nested() {
        // the draw at n depends only on (seed, trial, n)
        let small = sample_bernoulli_comb(&RandomCombSpec::signed(0.3, 50, 9)).unwrap();
        let large = sample_bernoulli_comb(&RandomCombSpec::signed(0.3, 500, 9)).unwrap();
        assert_eq!(small.weights(), large.centered(50).unwrap().weights());
    }

    #[test]
    fn bernoullisation_endpoints() {
        let base = WeightedComb::from_real(&[1.0, -1.0, -1.0, 1.0, -1.0], "s").unwrap();
        let keep = sample_bernoullisation(&RandomCombSpec::signed(1.0, 2, 3).with_base(base.clone())).unwrap();
        assert_eq!(keep.weights(), base.weights());
        let flip = sample_bernoullisation(&RandomCombSpec::signed(0.0, 2, 3).with_base(base.clone())).unwrap();
        assert!(flip.weights().iter().zip(base.weights()).all(|(a, b)| *a == -b));
        let bad = WeightedComb::from_real(&[1.0, 0.5, 1.0], "bad").unwrap();
        assert!(sample_bernoullisation(&RandomCombSpec::signed(0.5, 1, 3).with_base(bad)).is_err());
        assert!(sample_bernoulli_comb(&RandomCombSpec::signed(0.5, 2, 3).with_base(base)).is_err());
    }

    #[test]
    fn predicted_autocorrelations() {
        let half = predicted_bernoulli_autocorrelation(0.5, 4).unwrap();
        for m in -4..=4 {
            let expected = if m == 0 { int(1) } else { int(0) };
            assert_eq!(half.exact_eta(m).unwrap(), &real(expected));
        }
        let q = predicted_bernoulli_autocorrelation(0.75, 2).unwrap();
        assert_eq!(q.exact_eta(1).unwrap(), &real(rat(1, 4)));
        let tm = predicted_bernoullisation_autocorrelation(&tm_exact_eta(4), 0.75).unwrap();
        assert_eq!(tm.exact_eta(1).unwrap(), &real(rat(-1, 12)));
        let rs = predicted_bernoullisation_autocorrelation(&rs_exact_eta_theta(8), 0.3).unwrap();
        assert_eq!(
            rs.exact_eta_values(),
            predicted_bernoulli_autocorrelation(0.5, 8).unwrap().exact_eta_values()
        );
    }

    #[test]
    fn weighted_prediction_reduces_to_signed() {
        let one = Complex64::new(1.0, 0.0);
        for p in [0.0, 0.1, 0.25, 0.5, 0.75, 1.0] {
            let w = predicted_weighted_autocorrelation(p, one, -one, 6).unwrap();
            let s = predicted_bernoulli_autocorrelation(p, 6).unwrap();
            assert_eq!(w.exact_eta_values(), s.exact_eta_values());
        }
        let coin = predicted_weighted_autocorrelation(0.5, one, Complex64::new(0.0, 0.0), 1).unwrap();
        assert_eq!(coin.exact_eta(0).unwrap(), &real(rat(1, 2)));
        assert_eq!(coin.exact_eta(1).unwrap(), &real(rat(1, 4)));
    }

    #[test]
    fn mixed_diffraction() {
        let b = predicted_mixed_diffraction(MixedParameters::Bernoulli { p: 0.5 }).unwrap();
        assert!(b.point_part.peaks.is_empty());
        assert_eq!(b.ac_density, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let c = predicted_mixed_diffraction(MixedParameters::FairCoin { h_plus: one, h_minus: one }).unwrap();
        assert_eq!(c.point_part.peaks[0].intensity, 1.0);
        assert_eq!(c.ac_density, 0.0);
        let d = predicted_mixed_diffraction(MixedParameters::FairCoin {
            h_plus: one,
            h_minus: Complex64::new(0.0, 0.0),
        })
        .unwrap();
        assert_eq!(d.point_part.peaks[0].intensity, 0.25);
        assert_eq!(d.ac_density, 0.25);
    }

    #[test]
    fn monte_carlo_degenerate() {
        let spec = RandomCombSpec::signed(1.0, 64, 1);
        let mc = monte_carlo_eta(&spec, 3, 5).unwrap();
        assert!(mc.mean.iter().all(|v| *v == Complex64::new(1.0, 0.0)));
        assert!(mc.stderr.iter().all(|s| *s == 0.0));
        let report = monte_carlo_report(&spec, &mc, &predicted_bernoulli_autocorrelation(1.0, 5).unwrap()).unwrap();
        assert!(report.all_pass);
        assert!(monte_carlo_eta(&spec, 0, 5).is_err());
    }

    #[test]
    fn single_trial_has_zero_stderr() {
        let mc = monte_carlo_eta(&RandomCombSpec::signed(0.5, 64, 1), 1, 3).unwrap();
        assert!(mc.stderr.iter().all(|s| *s == 0.0));
    }
}

//! Distribution functions F(x) = γ̂([0, x]) of singular continuous diffraction
//! measures on [0, 1], by Fourier partial sums, Volterra iteration and Riesz
//! partial products.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::correlation::{gm_alpha, CorrelationSeries};
use crate::error::{Error, Result};

pub const DEFAULT_GRID: usize = 1 << 12;
pub const DEFAULT_FOURIER_TRUNCATION: usize = 1 << 16;
pub const DEFAULT_VOLTERRA_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_VOLTERRA_ITERATIONS: usize = 64;
/// Largest (k+ℓ)ⁿ used when picking a default number of Riesz factors.
pub const RIESZ_FACTOR_BUDGET: u64 = 1 << 14;
/// Most quadrature points a Riesz partial product may ask for.
pub const RIESZ_POINT_CAP: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistributionMeta {
    pub method: String,
    pub parameters: BTreeMap<String, Value>,
}

impl DistributionMeta {
    pub fn new(method: impl Into<String>) -> Self {
        Self {
            method: method.into(),
            parameters: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }
}

/// F on the uniform grid x_i = i/G, stored both as values F(x_i), i = 0..=G,
/// and as cell masses F(x_{i+1}) − F(x_i).
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionFunction {
    values: Vec<f64>,
    increments: Vec<f64>,
    pub meta: DistributionMeta,
}

impl DistributionFunction {
    pub fn from_increments(increments: Vec<f64>, meta: DistributionMeta) -> Result<Self> {
        if increments.is_empty() {
            return Err(Error::InvalidParameter("grid must have at least one cell".into()));
        }
        let mut values = Vec::with_capacity(increments.len() + 1);
        let mut acc = 0.0;
        values.push(acc);
        for d in &increments {
            acc += d;
            values.push(acc);
        }
        Ok(Self {
            values,
            increments,
            meta,
        })
    }

    pub fn from_values(values: Vec<f64>, meta: DistributionMeta) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidParameter("grid must have at least one cell".into()));
        }
        let increments = values.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(Self {
            values,
            increments,
            meta,
        })
    }

    /// Rebuilds a function from stored columns without recomputing either.
    pub fn from_parts(values: Vec<f64>, increments: Vec<f64>, meta: DistributionMeta) -> Result<Self> {
        if values.len() < 2 || increments.len() + 1 != values.len() {
            return Err(Error::InvalidParameter(format!(
                "{} values do not match {} increments",
                values.len(),
                increments.len()
            )));
        }
        Ok(Self {
            values,
            increments,
            meta,
        })
    }

    /// Number of cells G.
    pub fn grid(&self) -> usize {
        self.increments.len()
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 / self.grid() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn total_mass(&self) -> f64 {
        self.values[self.grid()]
    }

    /// Linear interpolation, extended by F(x + 1) = F(x) + F(1).
    pub fn value_at(&self, x: f64) -> f64 {
        let shift = x.floor();
        let t = (x - shift) * self.grid() as f64;
        let i = (t.floor() as usize).min(self.grid() - 1);
        let frac = t - i as f64;
        shift * self.total_mass() + self.values[i] + frac * self.increments[i]
    }

    pub fn min_increment(&self) -> f64 {
        self.increments.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_monotone(&self, tolerance: f64) -> bool {
        self.min_increment() >= -tolerance
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.min_increment() > 0.0
    }

    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        if self.grid() != other.grid() {
            return Err(Error::InvalidParameter(format!(
                "grids differ: {} vs {}",
                self.grid(),
                other.grid()
            )));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// F(0) = 0, F(1) = `total` and monotonicity, all within `tolerance`.
    pub fn check_invariants(&self, total: f64, tolerance: f64) -> std::result::Result<(), String> {
        if self.values[0].abs() > tolerance {
            return Err(format!("F(0) = {}", self.values[0]));
        }
        if (self.total_mass() - total).abs() > tolerance {
            return Err(format!("F(1) = {}, expected {total}", self.total_mass()));
        }
        if !self.is_monotone(tolerance) {
            return Err(format!("decreasing cell of size {}", self.min_increment()));
        }
        Ok(())
    }
}

/// sin(2πt/g) with exact zeros at multiples of π and exact odd symmetry.
fn sin_turns(t: usize, g: usize) -> f64 {
    let t = t % g;
    if t == 0 || 2 * t == g {
        return 0.0;
    }
    if 2 * t > g {
        return -sin_turns(g - t, g);
    }
    if 4 * t == g {
        return 1.0;
    }
    if g % 2 == 0 && 4 * t > g {
        return sin_turns(g / 2 - t, g);
    }
    (TAU * t as f64 / g as f64).sin()
}

/// F(x_i) = η(0)·x_i + Σ_{m=1}^{M} η(m) sin(2πm x_i)/(mπ).
pub fn fourier_distribution(series: &CorrelationSeries, truncation: usize, grid: usize) -> Result<DistributionFunction> {
    let eta = series.real_one_sided()?;
    if truncation > series.max_lag() {
        return Err(Error::LagTooLarge {
            requested: truncation,
            available: series.max_lag(),
        });
    }
    if grid == 0 {
        return Err(Error::InvalidParameter("grid must be positive".into()));
    }
    // sin(2πm i/G) only depends on m mod G
    let mut folded = vec![0.0; grid];
    for (m, value) in eta.iter().enumerate().take(truncation + 1).skip(1) {
        folded[m % grid] += value / (m as f64 * PI);
    }
    let table: Vec<f64> = (0..grid).map(|t| sin_turns(t, grid)).collect();
    let values = (0..=grid)
        .into_par_iter()
        .map(|i| {
            let series: f64 = folded
                .iter()
                .enumerate()
                .map(|(r, c)| c * table[(r * i) % grid])
                .sum();
            eta[0] * i as f64 / grid as f64 + series
        })
        .collect();
    let meta = DistributionMeta::new("fourier")
        .with("truncation", truncation)
        .with("grid", grid)
        .with("series", series.label.clone());
    DistributionFunction::from_values(values, meta)
}

fn check_volterra_grid(grid: usize) -> Result<()> {
    if grid < 1 << 10 || !grid.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "Volterra grid must be a power of two ≥ 1024, got {grid}"
        )));
    }
    Ok(())
}

/// Trapezoidal cell averages of 1 − cos(πy) over the 2G cells of [0, 2].
fn volterra_weights(grid: usize) -> Vec<f64> {
    let g = grid as f64;
    // cos(π(y + 1)) = −cos(πy) taken literally keeps the total mass fixed
    let cos: Vec<f64> = (0..=grid).map(|j| (PI * j as f64 / g).cos()).collect();
    let node = |j: usize| if j <= grid { 1.0 - cos[j] } else { 1.0 + cos[j - grid] };
    (0..2 * grid).map(|j| 0.5 * (node(j) + node(j + 1))).collect()
}

fn volterra_step(weights: &[f64], masses: &[f64]) -> Vec<f64> {
    let g = masses.len();
    (0..g)
        .map(|i| {
            let (a, b) = (2 * i, 2 * i + 1);
            0.5 * (weights[a] * masses[a % g] + weights[b] * masses[b % g])
        })
        .collect()
}

fn sup_of_prefix_difference(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0f64;
    let mut sup = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        acc += x - y;
        sup = sup.max(acc.abs());
    }
    sup
}

/// Exactly `iterations` steps of F_{n+1}(x) = ½ ∫₀^{2x} (1 − cos πy) dF_n(y)
/// from F₀(x) = x.
pub fn volterra_iterate(grid: usize, iterations: usize) -> Result<DistributionFunction> {
    check_volterra_grid(grid)?;
    let weights = volterra_weights(grid);
    let mut masses = vec![1.0 / grid as f64; grid];
    for _ in 0..iterations {
        masses = volterra_step(&weights, &masses);
    }
    let meta = DistributionMeta::new("volterra")
        .with("grid", grid)
        .with("iterations", iterations);
    DistributionFunction::from_increments(masses, meta)
}

#[derive(Clone, Debug)]
pub struct VolterraOutcome {
    pub distribution: DistributionFunction,
    pub iterations: usize,
    pub residual: f64,
}

/// Iterates until successive iterates differ by at most `tolerance` in sup-norm.
pub fn volterra_distribution(grid: usize, max_iterations: usize, tolerance: f64) -> Result<VolterraOutcome> {
    check_volterra_grid(grid)?;
    if !(tolerance > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tolerance}")));
    }
    let weights = volterra_weights(grid);
    let mut masses = vec![1.0 / grid as f64; grid];
    let mut residual = f64::INFINITY;
    for n in 1..=max_iterations {
        let next = volterra_step(&weights, &masses);
        residual = sup_of_prefix_difference(&next, &masses);
        masses = next;
        if residual <= tolerance {
            let meta = DistributionMeta::new("volterra")
                .with("grid", grid)
                .with("iterations", n)
                .with("tolerance", tolerance)
                .with("residual", residual);
            return Ok(VolterraOutcome {
                distribution: DistributionFunction::from_increments(masses, meta)?,
                iterations: n,
                residual,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iterations,
        residual,
    })
}

/// θ(x) = 1 + (2/(k+ℓ)) Σ_{r=1}^{k+ℓ−1} α_r cos(2πrx).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RieszProfile {
    pub k: usize,
    pub l: usize,
    /// α_r for r = 1..k+ℓ−1.
    pub alpha: Vec<i64>,
}

impl RieszProfile {
    pub fn new(k: usize, l: usize) -> Result<Self> {
        let all = gm_alpha(k, l)?;
        Ok(Self {
            k,
            l,
            alpha: all[1..k + l].to_vec(),
        })
    }

    pub fn base(&self) -> u64 {
        (self.k + self.l) as u64
    }

    pub fn theta(&self, x: f64) -> f64 {
        let scale = 2.0 / self.base() as f64;
        1.0 + scale
            * self
                .alpha
                .iter()
                .enumerate()
                .map(|(i, &a)| a as f64 * (TAU * (i + 1) as f64 * x).cos())
                .sum::<f64>()
    }

    /// θ at t/p, reducing the phase in integers first.
    fn theta_turns(&self, t: u64, p: u64) -> f64 {
        let scale = 2.0 / self.base() as f64;
        let mut sum = 0.0;
        for (i, &a) in self.alpha.iter().enumerate() {
            let phase = ((i as u64 + 1) * t) % p;
            sum += a as f64 * (TAU * phase as f64 / p as f64).cos();
        }
        1.0 + scale * sum
    }

    pub fn min_on_grid(&self, points: usize) -> f64 {
        (0..points)
            .map(|i| self.theta(i as f64 / points as f64))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest n with (k+ℓ)ⁿ ≤ [`RIESZ_FACTOR_BUDGET`].
    pub fn default_factors(&self) -> u32 {
        let b = self.base();
        let mut n = 0;
        let mut power = 1u64;
        while power * b <= RIESZ_FACTOR_BUDGET {
            power *= b;
            n += 1;
        }
        n.max(1)
    }
}

/// F_n(x) = ∫₀^x ∏_{j<n} θ((k+ℓ)ʲ y) dy by composite Simpson on a grid with step
/// at most 1/(8(k+ℓ)ⁿ), accumulated into the display cells.
pub fn riesz_partial_distribution(profile: &RieszProfile, factors: u32, grid: usize) -> Result<DistributionFunction> {
    if factors == 0 {
        return Err(Error::InvalidParameter("need at least one factor".into()));
    }
    if grid == 0 {
        return Err(Error::InvalidParameter("grid must be positive".into()));
    }
    let b = profile.base();
    let required = b
        .checked_pow(factors)
        .and_then(|v| v.checked_mul(8))
        .unwrap_or(u64::MAX);
    let per_cell = {
        let s = required.div_ceil(grid as u64).max(2);
        s + s % 2
    };
    let points = per_cell.saturating_mul(grid as u64);
    if points > RIESZ_POINT_CAP {
        return Err(Error::ResolutionCap {
            required: points,
            cap: RIESZ_POINT_CAP,
        });
    }
    let multipliers: Vec<u64> = (0..factors)
        .map(|j| (0..j).fold(1u64, |acc, _| (acc * b) % points))
        .collect();
    let density = |i: u64| -> f64 {
        multipliers
            .iter()
            .map(|&mult| profile.theta_turns(((mult as u128 * i as u128) % points as u128) as u64, points))
            .product()
    };
    let h = 1.0 / points as f64;
    let masses = (0..grid as u64)
        .into_par_iter()
        .map(|c| {
            let start = c * per_cell;
            let mut sum = 0.0;
            let mut left = density(start);
            for pair in 0..per_cell / 2 {
                let mid = density(start + 2 * pair + 1);
                let right = density(start + 2 * pair + 2);
                sum += left + 4.0 * mid + right;
                left = right;
            }
            sum * h / 3.0
        })
        .collect();
    let meta = DistributionMeta::new("riesz")
        .with("k", profile.k)
        .with("l", profile.l)
        .with("factors", factors)
        .with("grid", grid)
        .with("quadrature_points", points);
    DistributionFunction::from_increments(masses, meta)
}

/// [i/2^level, (i+1)/2^level] for i = 0..2^level.
pub fn dyadic_subintervals(level: u32) -> Vec<(f64, f64)> {
    let n = 1u64 << level;
    (0..n)
        .map(|i| (i as f64 / n as f64, (i + 1) as f64 / n as f64))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalResidual {
    pub a: f64,
    pub b: f64,
    pub plus: f64,
    pub minus: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub intervals: Vec<IntervalResidual>,
    pub max_plus: f64,
    pub max_minus: f64,
}

/// ∫_a^b (−cos πy) dF(y), midpoint rule on each (partial) cell.
fn cosine_moment(f: &DistributionFunction, a: f64, b: f64) -> f64 {
    let g = f.grid() as f64;
    let first = ((a * g).floor() as usize).min(f.grid() - 1);
    let last = ((b * g).ceil() as usize).min(f.grid());
    (first..last)
        .map(|j| {
            let (lo, hi) = ((j as f64 / g).max(a), ((j + 1) as f64 / g).min(b));
            if hi <= lo {
                return 0.0;
            }
            let share = (hi - lo) * g;
            -(PI * 0.5 * (lo + hi)).cos() * share * f.increments()[j]
        })
        .sum()
}

/// Residuals of dF(x/2) ± dF((x+1)/2) = {1; −cos(πx)} dF(x) on each [a, b] ⊆ [0, 1].
pub fn tm_functional_relation_residual(f: &DistributionFunction, subintervals: &[(f64, f64)]) -> ResidualReport {
    let d = |lo: f64, hi: f64| f.value_at(hi) - f.value_at(lo);
    let intervals: Vec<IntervalResidual> = subintervals
        .iter()
        .map(|&(a, b)| {
            let low = d(a / 2.0, b / 2.0);
            let high = d((a + 1.0) / 2.0, (b + 1.0) / 2.0);
            IntervalResidual {
                a,
                b,
                plus: (low + high - d(a, b)).abs(),
                minus: (low - high - cosine_moment(f, a, b)).abs(),
            }
        })
        .collect();
    ResidualReport {
        max_plus: intervals.iter().map(|r| r.plus).fold(0.0, f64::max),
        max_minus: intervals.iter().map(|r| r.minus).fold(0.0, f64::max),
        intervals,
    }
}

pub fn meta_json(meta: &DistributionMeta) -> Value {
    json!({ "method": meta.method, "parameters": meta.parameters })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::{rs_exact_eta_theta, tm_exact_eta};

    fn lebesgue(grid: usize) -> DistributionFunction {
        DistributionFunction::from_increments(vec![1.0 / grid as f64; grid], DistributionMeta::new("lebesgue")).unwrap()
    }

    #[test]
    fn sine_table_symmetries() {
        for g in [1, 2, 3, 4, 6, 8, 12, 4096] {
            for t in 0..g {
                let s = sin_turns(t, g);
                assert_eq!(s, -sin_turns((g - t) % g, g));
                assert!((s - (TAU * t as f64 / g as f64).sin()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn fourier_endpoints_and_midpoint() {
        let f = fourier_distribution(&tm_exact_eta(1024), 1024, 256).unwrap();
        assert_eq!(f.values()[0], 0.0);
        assert_eq!(f.values()[128], 0.5);
        assert_eq!(f.total_mass(), 1.0);
    }

    #[test]
    fn fourier_rs_is_lebesgue() {
        let f = fourier_distribution(&rs_exact_eta_theta(512), 512, 64).unwrap();
        for (i, v) in f.values().iter().enumerate() {
            assert!((v - i as f64 / 64.0).abs() < 1e-15);
        }
    }

    #[test]
    fn fourier_preconditions() {
        assert!(matches!(
            fourier_distribution(&tm_exact_eta(16), 17, 8),
            Err(Error::LagTooLarge { .. })
        ));
    }

    #[test]
    fn volterra_iterate_zero_is_identity() {
        let f = volterra_iterate(1024, 0).unwrap();
        assert!(f.sup_distance(&lebesgue(1024)).unwrap() < 1e-15);
        assert!(volterra_iterate(1000, 0).is_err());
        assert!(volterra_iterate(512, 0).is_err());
    }

    #[test]
    fn volterra_conserves_mass() {
        let f = volterra_iterate(1024, 10).unwrap();
        assert!((f.total_mass() - 1.0).abs() < 1e-12);
        assert!(f.is_monotone(0.0));
    }

    #[test]
    fn volterra_reports_nonconvergence() {
        match volterra_distribution(1024, 2, 1e-14) {
            Err(Error::NonConvergence { iterations, residual }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 1e-14);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tm_profile() {
        let p = RieszProfile::new(1, 1).unwrap();
        assert_eq!(p.alpha, vec![-1]);
        for x in [0.0, 0.1, 0.25, 0.7] {
            assert!((p.theta(x) - (1.0 - (TAU * x).cos())).abs() < 1e-15);
        }
        assert_eq!(p.default_factors(), 14);
        assert_eq!(RieszProfile::new(1, 2).unwrap().default_factors(), 8);
    }

    #[test]
    fn riesz_single_factor_closed_form() {
        let p = RieszProfile::new(1, 1).unwrap();
        let f = riesz_partial_distribution(&p, 1, 64).unwrap();
        for i in 0..=64 {
            let x = i as f64 / 64.0;
            assert!((f.values()[i] - (x - (TAU * x).sin() / TAU)).abs() < 1e-6, "{x}");
        }
    }

    #[test]
    fn riesz_cap() {
        let p = RieszProfile::new(2, 2).unwrap();
        match riesz_partial_distribution(&p, 13, 1024) {
            Err(Error::ResolutionCap { required, cap }) => assert!(required > cap),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lebesgue_residual_plus_vanishes() {
        let report = tm_functional_relation_residual(&lebesgue(1024), &dyadic_subintervals(6));
        assert_eq!(report.intervals.len(), 64);
        assert!(report.max_plus < 1e-15);
    }

    #[test]
    fn value_at_uses_periodic_extension() {
        let f = volterra_iterate(1024, 3).unwrap();
        for x in [0.0, 0.3, 0.77] {
            assert!((f.value_at(x + 1.0) - f.value_at(x) - f.total_mass()).abs() < 1e-12);
        }
        assert_eq!(f.value_at(1.0), f.total_mass());
    }
}

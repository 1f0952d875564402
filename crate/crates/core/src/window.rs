//! Finite windows of two-sided symbolic sequences and the weighted combs built
//! from them.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::substitution::{check_block_lengths, Symbol, ONE_BAR};

/// Symbols at the consecutive indices `first_index ..= last_index`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicWindow {
    alphabet: Arc<[String]>,
    first: i64,
    symbols: Vec<Symbol>,
}

impl SymbolicWindow {
    pub fn new(alphabet: Arc<[String]>, first: i64, symbols: Vec<Symbol>) -> Self {
        debug_assert!(symbols.iter().all(|s| s.index() < alphabet.len()));
        Self {
            alphabet,
            first,
            symbols,
        }
    }

    pub fn alphabet(&self) -> &Arc<[String]> {
        &self.alphabet
    }

    pub fn first_index(&self) -> i64 {
        self.first
    }

    pub fn last_index(&self) -> i64 {
        self.first + self.symbols.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    /// Largest N with `[-N, N]` inside the window (0 if the origin is not covered).
    pub fn half_length(&self) -> usize {
        (-self.first).min(self.last_index()).max(0) as usize
    }

    pub fn get(&self, n: i64) -> Option<Symbol> {
        let offset = n.checked_sub(self.first)?;
        usize::try_from(offset)
            .ok()
            .and_then(|i| self.symbols.get(i).copied())
    }

    pub fn symbol_name(&self, symbol: Symbol) -> &str {
        &self.alphabet[symbol.index()]
    }

    /// The sub-window `[-half_length, half_length]`.
    pub fn centered(&self, half_length: usize) -> Result<Self> {
        let n = half_length as i64;
        if self.first > -n || self.last_index() < n {
            return Err(Error::IndexOutOfRange(
                n,
                format!("window covers [{}, {}]", self.first, self.last_index()),
            ));
        }
        let start = (-n - self.first) as usize;
        Ok(Self {
            alphabet: self.alphabet.clone(),
            first: -n,
            symbols: self.symbols[start..start + 2 * half_length + 1].to_vec(),
        })
    }

    pub fn is_centered(&self) -> bool {
        self.first == -self.last_index()
    }

    /// Swaps the two letters of a binary alphabet.
    pub fn flipped(&self) -> Result<Self> {
        if self.alphabet.len() != 2 {
            return Err(Error::AlphabetMismatch("flip needs a binary alphabet".into()));
        }
        Ok(Self {
            alphabet: self.alphabet.clone(),
            first: self.first,
            symbols: self.symbols.iter().map(|s| Symbol(1 - s.0)).collect(),
        })
    }
}

impl fmt::Display for SymbolicWindow {
    /// Symbol names with `|` before index 0 when the origin is inside.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.symbols.iter().enumerate() {
            if self.first + i as i64 == 0 && i > 0 {
                f.write_str("|")?;
            }
            f.write_str(self.symbol_name(*s))?;
        }
        Ok(())
    }
}

/// Complex weights w(n) for n in `[-N, N]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedComb {
    half_length: usize,
    weights: Vec<Complex64>,
    pub provenance: String,
}

impl WeightedComb {
    pub fn new(weights: Vec<Complex64>, provenance: impl Into<String>) -> Result<Self> {
        if weights.len() % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "a centred comb needs an odd number of weights, got {}",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.re.is_finite() || !w.im.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite weight {w}")));
        }
        Ok(Self {
            half_length: weights.len() / 2,
            weights,
            provenance: provenance.into(),
        })
    }

    pub fn from_real(weights: &[f64], provenance: impl Into<String>) -> Result<Self> {
        Self::new(
            weights.iter().map(|&w| Complex64::new(w, 0.0)).collect(),
            provenance,
        )
    }

    pub fn half_length(&self) -> usize {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Weights in index order, starting at `-N`.
    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn get(&self, n: i64) -> Option<Complex64> {
        let i = n.checked_add(self.half_length as i64)?;
        usize::try_from(i).ok().and_then(|i| self.weights.get(i).copied())
    }

    pub fn is_real(&self) -> bool {
        self.weights.iter().all(|w| w.im == 0.0)
    }

    pub fn mean(&self) -> Complex64 {
        self.weights.iter().sum::<Complex64>() / self.weights.len() as f64
    }

    pub fn centered(&self, half_length: usize) -> Result<Self> {
        if half_length > self.half_length {
            return Err(Error::IndexOutOfRange(
                half_length as i64,
                format!("comb half-length is {}", self.half_length),
            ));
        }
        let start = self.half_length - half_length;
        Ok(Self {
            half_length,
            weights: self.weights[start..start + 2 * half_length + 1].to_vec(),
            provenance: self.provenance.clone(),
        })
    }
}

/// Replaces each symbol by its weight. The window must be centred on the origin.
pub fn make_comb(window: &SymbolicWindow, weights: &BTreeMap<String, Complex64>) -> Result<WeightedComb> {
    if !window.is_centered() {
        return Err(Error::AsymmetricWindow {
            first: window.first_index(),
            last: window.last_index(),
        });
    }
    let table = window
        .alphabet()
        .iter()
        .map(|name| {
            weights
                .get(name)
                .copied()
                .ok_or_else(|| Error::MissingWeight(name.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let provenance = format!(
        "window [{}, {}] over {{{}}}",
        window.first_index(),
        window.last_index(),
        window.alphabet().join(",")
    );
    WeightedComb::new(
        window.symbols().iter().map(|s| table[s.index()]).collect(),
        provenance,
    )
}

/// Builds the weight map for `make_comb` from parallel name/weight lists.
pub fn weight_map(pairs: &[(&str, Complex64)]) -> BTreeMap<String, Complex64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// `{1 ↦ +1, 1̄ ↦ −1}`.
pub fn signed_weights() -> BTreeMap<String, Complex64> {
    weight_map(&[
        ("1", Complex64::new(1.0, 0.0)),
        (ONE_BAR, Complex64::new(-1.0, 0.0)),
    ])
}

pub fn binary_alphabet() -> Arc<[String]> {
    Arc::from(vec!["1".to_string(), ONE_BAR.to_string()])
}

pub fn pd_alphabet() -> Arc<[String]> {
    Arc::from(vec!["a".to_string(), "b".to_string()])
}

fn sign_symbol(value: i8) -> Symbol {
    if value > 0 {
        Symbol(0)
    } else {
        Symbol(1)
    }
}

/// Thue–Morse v_n from v_{2n} = v_n, v_{2n+1} = −v_n: the parity of the binary
/// digit sum.
pub fn tm_symbol(n: i64) -> Result<i8> {
    if n < 0 {
        return Err(Error::IndexOutOfRange(n, "one-sided sequence".into()));
    }
    Ok(if n.count_ones() % 2 == 0 { 1 } else { -1 })
}

/// Generalised Morse v_n: each base-(k+ℓ) digit r ≥ k flips the sign.
pub fn gm_symbol(k: usize, l: usize, n: i64) -> Result<i8> {
    check_block_lengths(k, l)?;
    if n < 0 {
        return Err(Error::IndexOutOfRange(n, "one-sided sequence".into()));
    }
    let base = (k + l) as u64;
    let mut n = n as u64;
    let mut sign = 1;
    while n > 0 {
        if n % base >= k as u64 {
            sign = -sign;
        }
        n /= base;
    }
    Ok(sign)
}

/// Binary Rudin–Shapiro w(n) for all n ∈ ℤ, descending through
/// w(4q+ℓ) = w(q) (ℓ < 2) or (−1)^{q+ℓ} w(q) (ℓ ≥ 2) with floor division
/// until q reaches the fixed points 0 or −1.
pub fn rs_symbol(n: i64) -> i8 {
    let mut n = n;
    let mut sign = 1i8;
    loop {
        match n {
            0 => return sign,
            -1 => return -sign,
            _ => {
                let q = n.div_euclid(4);
                let l = n.rem_euclid(4);
                if l >= 2 && (q + l).rem_euclid(2) == 1 {
                    sign = -sign;
                }
                n = q;
            }
        }
    }
}

/// Two-sided window from a one-sided sequence via w_i = v_i, w_{−i−1} = v_i.
fn mirrored_window(half_length: usize, one_sided: impl Fn(i64) -> i8) -> SymbolicWindow {
    let n = half_length as i64;
    let symbols = (-n..=n)
        .map(|i| sign_symbol(if i >= 0 { one_sided(i) } else { one_sided(-i - 1) }))
        .collect();
    SymbolicWindow::new(binary_alphabet(), -n, symbols)
}

pub fn tm_window(half_length: usize) -> SymbolicWindow {
    mirrored_window(half_length, |i| tm_symbol(i).expect("nonnegative index"))
}

pub fn gm_window(k: usize, l: usize, half_length: usize) -> Result<SymbolicWindow> {
    check_block_lengths(k, l)?;
    Ok(mirrored_window(half_length, |i| {
        gm_symbol(k, l, i).expect("validated parameters")
    }))
}

pub fn rs_window(half_length: usize) -> SymbolicWindow {
    let n = half_length as i64;
    let symbols = (-n..=n).map(|i| sign_symbol(rs_symbol(i))).collect();
    SymbolicWindow::new(binary_alphabet(), -n, symbols)
}

/// φ: 1 1̄, 1̄ 1 ↦ a and 1 1, 1̄ 1̄ ↦ b. Output index n is computed from
/// (w_n, w_{n+1}), so the result is one shorter on the right.
pub fn block_map(window: &SymbolicWindow) -> Result<SymbolicWindow> {
    if window.alphabet().as_ref() != binary_alphabet().as_ref() {
        return Err(Error::AlphabetMismatch(format!(
            "block map expects {{1, {ONE_BAR}}}, got {{{}}}",
            window.alphabet().join(", ")
        )));
    }
    if window.len() < 2 {
        return Err(Error::InvalidParameter("block map needs at least two symbols".into()));
    }
    let symbols = window
        .symbols()
        .windows(2)
        .map(|pair| if pair[0] != pair[1] { Symbol(0) } else { Symbol(1) })
        .collect();
    Ok(SymbolicWindow::new(pd_alphabet(), window.first_index(), symbols))
}

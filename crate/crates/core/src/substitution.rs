//! Substitution rules over finite alphabets and their two-sided fixed points.
//!
//! Symbols are indices into the rule's alphabet; the printable names and the
//! per-symbol weights live on the [`Substitution`] so the same symbolic
//! sequence can be reweighted freely.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::window::SymbolicWindow;

/// Name of the barred letter of the binary alphabet `{1, 1̄}`.
pub const ONE_BAR: &str = "1\u{0304}";

/// Search cap for the factor enumeration behind [`check_legal_seed`].
pub const LEGALITY_SEARCH_CAP: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Symbol(pub u8);

impl Symbol {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Substitution {
    name: String,
    alphabet: Arc<[String]>,
    rules: Vec<Vec<Symbol>>,
    weights: Vec<Complex64>,
}

impl Substitution {
    /// Builds a rule from symbol names. `rules[i]` is the image of `alphabet[i]`.
    pub fn new(
        name: impl Into<String>,
        alphabet: &[&str],
        rules: &[&[&str]],
        weights: &[Complex64],
    ) -> Result<Self> {
        if alphabet.is_empty() || alphabet.len() > u8::MAX as usize {
            return Err(Error::InvalidSubstitution(format!(
                "alphabet size {} out of range",
                alphabet.len()
            )));
        }
        let unique: BTreeSet<_> = alphabet.iter().collect();
        if unique.len() != alphabet.len() {
            return Err(Error::InvalidSubstitution("duplicate alphabet symbol".into()));
        }
        if rules.len() != alphabet.len() {
            return Err(Error::InvalidSubstitution(format!(
                "{} rules for {} symbols",
                rules.len(),
                alphabet.len()
            )));
        }
        if weights.len() != alphabet.len() {
            return Err(Error::InvalidSubstitution(format!(
                "{} weights for {} symbols",
                weights.len(),
                alphabet.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.re.is_finite() || !w.im.is_finite()) {
            return Err(Error::InvalidSubstitution(format!("non-finite weight {w}")));
        }
        let alphabet: Arc<[String]> = alphabet.iter().map(|s| s.to_string()).collect();
        let lookup = |name: &str| {
            alphabet
                .iter()
                .position(|a| a == name)
                .map(|i| Symbol(i as u8))
                .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
        };
        let rules = rules
            .iter()
            .map(|image| {
                if image.is_empty() {
                    return Err(Error::InvalidSubstitution("empty rule image".into()));
                }
                image.iter().map(|s| lookup(s)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            name: name.into(),
            alphabet,
            rules,
            weights: weights.to_vec(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> &Arc<[String]> {
        &self.alphabet
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn weight(&self, symbol: Symbol) -> Complex64 {
        self.weights[symbol.index()]
    }

    pub fn with_weights(mut self, weights: &[Complex64]) -> Result<Self> {
        if weights.len() != self.alphabet.len() {
            return Err(Error::InvalidSubstitution(format!(
                "{} weights for {} symbols",
                weights.len(),
                self.alphabet.len()
            )));
        }
        self.weights = weights.to_vec();
        Ok(self)
    }

    pub fn image(&self, symbol: Symbol) -> &[Symbol] {
        &self.rules[symbol.index()]
    }

    pub fn symbol(&self, name: &str) -> Result<Symbol> {
        self.alphabet
            .iter()
            .position(|a| a == name)
            .map(|i| Symbol(i as u8))
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    pub fn symbol_name(&self, symbol: Symbol) -> &str {
        &self.alphabet[symbol.index()]
    }

    /// Parses a word given as symbol names.
    pub fn word(&self, names: &[&str]) -> Result<Vec<Symbol>> {
        names.iter().map(|n| self.symbol(n)).collect()
    }

    pub fn names(&self, word: &[Symbol]) -> Vec<&str> {
        word.iter().map(|&s| self.symbol_name(s)).collect()
    }

    /// Last letter of ϱ^power(symbol), without building the word.
    fn last_after(&self, mut symbol: Symbol, power: usize) -> Symbol {
        for _ in 0..power {
            symbol = *self.image(symbol).last().expect("nonempty image");
        }
        symbol
    }

    fn first_after(&self, mut symbol: Symbol, power: usize) -> Symbol {
        for _ in 0..power {
            symbol = self.image(symbol)[0];
        }
        symbol
    }
}

/// ϱ_pd: a ↦ ab, b ↦ aa, weighted h(a) = 1, h(b) = 0.
pub fn period_doubling() -> Substitution {
    Substitution::new(
        "pd",
        &["a", "b"],
        &[&["a", "b"], &["a", "a"]],
        &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
    )
    .expect("valid built-in rule")
}

/// ϱ_TM: 1 ↦ 1 1̄, 1̄ ↦ 1̄ 1, weighted ±1.
pub fn thue_morse() -> Substitution {
    generalized_morse(1, 1)
        .expect("valid built-in rule")
        .renamed("tm")
}

/// ϱ_{k,ℓ}: 1 ↦ 1^k 1̄^ℓ, 1̄ ↦ 1̄^k 1^ℓ, weighted ±1.
pub fn generalized_morse(k: usize, l: usize) -> Result<Substitution> {
    check_block_lengths(k, l)?;
    let mut one = vec!["1"; k];
    one.extend(std::iter::repeat_n(ONE_BAR, l));
    let mut bar = vec![ONE_BAR; k];
    bar.extend(std::iter::repeat_n("1", l));
    Substitution::new(
        format!("gm:{k},{l}"),
        &["1", ONE_BAR],
        &[&one, &bar],
        &[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
    )
}

/// Quaternary ϱ_RS: a ↦ ac, b ↦ dc, c ↦ ab, d ↦ db, with the binary reduction
/// a, c ↦ +1 and b, d ↦ −1 as weights.
pub fn rudin_shapiro() -> Substitution {
    let plus = Complex64::new(1.0, 0.0);
    let minus = Complex64::new(-1.0, 0.0);
    Substitution::new(
        "rs",
        &["a", "b", "c", "d"],
        &[&["a", "c"], &["d", "c"], &["a", "b"], &["d", "b"]],
        &[plus, minus, plus, minus],
    )
    .expect("valid built-in rule")
}

/// ϱ′: a ↦ b^{k−1} a b^{ℓ−1} b, b ↦ b^{k−1} a b^{ℓ−1} a.
pub fn generalized_pd_rule(k: usize, l: usize) -> Result<Substitution> {
    check_block_lengths(k, l)?;
    let image = |last: &'static str| {
        let mut word = vec!["b"; k - 1];
        word.push("a");
        word.extend(std::iter::repeat_n("b", l - 1));
        word.push(last);
        word
    };
    let (a, b) = (image("b"), image("a"));
    Substitution::new(
        format!("gpd:{k},{l}"),
        &["a", "b"],
        &[&a, &b],
        &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
    )
}

pub(crate) fn check_block_lengths(k: usize, l: usize) -> Result<()> {
    if k < 1 || l < 1 {
        return Err(Error::InvalidParameter(format!(
            "block lengths must be at least 1, got k={k}, l={l}"
        )));
    }
    Ok(())
}

impl Substitution {
    fn renamed(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }
}

/// One rewriting step: the concatenation of the images of `word`.
pub fn apply_substitution(rule: &Substitution, word: &[Symbol]) -> Result<Vec<Symbol>> {
    if word.is_empty() {
        return Err(Error::EmptyWord);
    }
    if let Some(s) = word.iter().find(|s| s.index() >= rule.alphabet.len()) {
        return Err(Error::UnknownSymbol(format!("#{}", s.0)));
    }
    let len = word.iter().map(|&s| rule.image(s).len()).sum();
    let mut out = Vec::with_capacity(len);
    for &s in word {
        out.extend_from_slice(rule.image(s));
    }
    Ok(out)
}

pub fn apply_power(rule: &Substitution, word: &[Symbol], power: usize) -> Result<Vec<Symbol>> {
    let mut word = word.to_vec();
    if word.is_empty() {
        return Err(Error::EmptyWord);
    }
    for _ in 0..power {
        word = apply_substitution(rule, &word)?;
    }
    Ok(word)
}

/// Outcome of the length-2 factor search for a seed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LegalityReport {
    pub in_language: bool,
    pub reproduced_at_centre: bool,
    /// Iteration depth after which no new length-2 factors can appear, if reached
    /// within [`LEGALITY_SEARCH_CAP`].
    pub stabilised_at: Option<usize>,
}

impl LegalityReport {
    pub fn is_legal(&self) -> bool {
        self.in_language && self.reproduced_at_centre
    }

    pub fn diagnostic(&self) -> String {
        let mut parts = Vec::new();
        if !self.in_language {
            parts.push("pair is not a factor of any ϱⁿ(s)".to_string());
        }
        if !self.reproduced_at_centre {
            parts.push("ϱ^power does not reproduce the pair at the centre".to_string());
        }
        if self.stabilised_at.is_none() {
            parts.push(format!(
                "factor set not stabilised within {LEGALITY_SEARCH_CAP} iterations"
            ));
        }
        parts.join("; ")
    }
}

/// Length-2 factor analysis of `pair` under `rule`.
///
/// The factors of ϱ(w) of length 2 are the internal factors of the images of
/// letters in w plus one bridging factor per 2-factor of w, so the pair
/// (letters, factors) evolves by a deterministic map; once a state repeats no
/// new factors can ever appear.
pub fn legality_report(rule: &Substitution, pair: (Symbol, Symbol), power: usize) -> LegalityReport {
    let size = rule.alphabet.len();
    let valid = |s: Symbol| s.index() < size;
    if !valid(pair.0) || !valid(pair.1) || power == 0 {
        return LegalityReport {
            in_language: false,
            reproduced_at_centre: false,
            stabilised_at: Some(0),
        };
    }

    let mut letters: BTreeSet<Symbol> = (0..size).map(|i| Symbol(i as u8)).collect();
    let mut factors: BTreeSet<(Symbol, Symbol)> = BTreeSet::new();
    let mut seen_factors: BTreeSet<(Symbol, Symbol)> = BTreeSet::new();
    let mut history = vec![(letters.clone(), factors.clone())];
    let mut stabilised_at = None;

    for depth in 1..=LEGALITY_SEARCH_CAP {
        let mut next_letters = BTreeSet::new();
        let mut next_factors = BTreeSet::new();
        for &s in &letters {
            let image = rule.image(s);
            next_letters.extend(image.iter().copied());
            next_factors.extend(image.windows(2).map(|w| (w[0], w[1])));
        }
        for &(x, y) in &factors {
            let last = *rule.image(x).last().expect("nonempty image");
            next_factors.insert((last, rule.image(y)[0]));
        }
        letters = next_letters;
        factors = next_factors;
        seen_factors.extend(factors.iter().copied());
        let state = (letters.clone(), factors.clone());
        if history.contains(&state) {
            stabilised_at = Some(depth);
            break;
        }
        history.push(state);
    }

    LegalityReport {
        in_language: seen_factors.contains(&pair),
        reproduced_at_centre: rule.last_after(pair.0, power) == pair.0
            && rule.first_after(pair.1, power) == pair.1,
        stabilised_at,
    }
}

pub fn check_legal_seed(rule: &Substitution, pair: (Symbol, Symbol), power: usize) -> bool {
    legality_report(rule, pair, power).is_legal()
}

/// Central block of ϱ^(power·generations) applied to `left|right`.
///
/// The returned window has `left`'s image at negative indices and `right`'s
/// image starting at index 0.
pub fn iterate_fixed_point(
    rule: &Substitution,
    seed: (Symbol, Symbol),
    power: usize,
    generations: usize,
) -> Result<SymbolicWindow> {
    let report = legality_report(rule, seed, power);
    if !report.is_legal() {
        return Err(illegal_seed(rule, seed, report.diagnostic()));
    }
    let left = apply_power(rule, &[seed.0], power * generations)?;
    let right = apply_power(rule, &[seed.1], power * generations)?;
    let first = -(left.len() as i64);
    let mut symbols = left;
    symbols.extend(right);
    Ok(SymbolicWindow::new(rule.alphabet().clone(), first, symbols))
}

/// Iterates until both halves reach `half_length` symbols, then crops to
/// `[-half_length, half_length]`.
pub fn fixed_point_window(
    rule: &Substitution,
    seed: (Symbol, Symbol),
    power: usize,
    half_length: usize,
) -> Result<SymbolicWindow> {
    let report = legality_report(rule, seed, power);
    if !report.is_legal() {
        return Err(illegal_seed(rule, seed, report.diagnostic()));
    }
    let (mut left, mut right) = (vec![seed.0], vec![seed.1]);
    while left.len() < half_length || right.len() < half_length + 1 {
        let (l, r) = (left.len(), right.len());
        left = apply_power(rule, &left, power)?;
        right = apply_power(rule, &right, power)?;
        if left.len() == l && right.len() == r {
            return Err(Error::InvalidParameter(format!(
                "rule `{}` does not grow the seed",
                rule.name
            )));
        }
    }
    let first = -(left.len() as i64);
    left.extend(right);
    SymbolicWindow::new(rule.alphabet().clone(), first, left).centered(half_length)
}

fn illegal_seed(rule: &Substitution, seed: (Symbol, Symbol), reason: String) -> Error {
    let name = |s: Symbol| {
        rule.alphabet
            .get(s.index())
            .cloned()
            .unwrap_or_else(|| format!("#{}", s.0))
    };
    Error::IllegalSeed {
        left: name(seed.0),
        right: name(seed.1),
        reason,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(rule: &Substitution, l: &str, r: &str) -> (Symbol, Symbol) {
        (rule.symbol(l).unwrap(), rule.symbol(r).unwrap())
    }

    #[test]
    fn pd_rewrites_a_to_ab() {
        let pd = period_doubling();
        let out = apply_substitution(&pd, &pd.word(&["a"]).unwrap()).unwrap();
        assert_eq!(pd.names(&out), ["a", "b"]);
    }

    #[test]
    fn empty_word_rejected() {
        assert!(matches!(
            apply_substitution(&period_doubling(), &[]),
            Err(Error::EmptyWord)
        ));
    }

    #[test]
    fn unknown_symbol_rejected() {
        let pd = period_doubling();
        assert!(apply_substitution(&pd, &[Symbol(7)]).is_err());
        assert!(pd.symbol("z").is_err());
    }

    #[test]
    fn tm_squared_on_11() {
        let tm = thue_morse();
        let out = apply_power(&tm, &tm.word(&["1", "1"]).unwrap(), 2).unwrap();
        assert_eq!(
            tm.names(&out),
            ["1", ONE_BAR, ONE_BAR, "1", "1", ONE_BAR, ONE_BAR, "1"]
        );
        let once = apply_substitution(&tm, &tm.word(&["1", "1"]).unwrap()).unwrap();
        assert_eq!(tm.names(&once), ["1", ONE_BAR, "1", ONE_BAR]);
    }

    #[test]
    fn image_lengths_add_up() {
        let rs = rudin_shapiro();
        let word = rs.word(&["a", "b", "c", "d", "a"]).unwrap();
        assert_eq!(apply_substitution(&rs, &word).unwrap().len(), 10);
    }

    #[test]
    fn construction_rejects_bad_rules() {
        let one = Complex64::new(1.0, 0.0);
        assert!(Substitution::new("x", &["a"], &[&[]], &[one]).is_err());
        assert!(Substitution::new("x", &["a"], &[&["b"]], &[one]).is_err());
        assert!(Substitution::new("x", &["a", "a"], &[&["a"], &["a"]], &[one, one]).is_err());
        assert!(Substitution::new("x", &["a"], &[&["a"]], &[]).is_err());
        assert!(generalized_morse(0, 1).is_err());
        assert!(generalized_pd_rule(1, 0).is_err());
    }

    #[test]
    fn legal_seeds() {
        let pd = period_doubling();
        assert!(check_legal_seed(&pd, pair(&pd, "a", "a"), 2));
        assert!(check_legal_seed(&pd, pair(&pd, "b", "a"), 2));
        assert!(!check_legal_seed(&pd, pair(&pd, "b", "b"), 2));
        // a|a is reproduced by ϱ² but not by ϱ (ϱ(a) ends in b)
        assert!(!check_legal_seed(&pd, pair(&pd, "a", "a"), 1));

        let tm = thue_morse();
        assert!(check_legal_seed(&tm, pair(&tm, "1", "1"), 2));
        let rs = rudin_shapiro();
        assert!(check_legal_seed(&rs, pair(&rs, "b", "a"), 2));
        assert!(legality_report(&tm, pair(&tm, "1", "1"), 2).stabilised_at.is_some());
    }

    #[test]
    fn bb_absent_from_pd_language_by_enumeration() {
        let pd = period_doubling();
        let word = apply_power(&pd, &pd.word(&["a"]).unwrap(), 5).unwrap();
        let b = pd.symbol("b").unwrap();
        assert!(!word.windows(2).any(|w| w[0] == b && w[1] == b));
    }

    #[test]
    fn pd_fixed_point_one_generation() {
        let pd = period_doubling();
        let w = iterate_fixed_point(&pd, pair(&pd, "a", "a"), 2, 1).unwrap();
        assert_eq!(w.to_string(), "abaa|abaa");
    }

    #[test]
    fn zero_generations_is_the_seed() {
        let tm = thue_morse();
        let w = iterate_fixed_point(&tm, pair(&tm, "1", "1"), 2, 0).unwrap();
        assert_eq!(w.first_index(), -1);
        assert_eq!(w.len(), 2);
    }

    #[test]
    fn illegal_seed_rejected_with_diagnostic() {
        let pd = period_doubling();
        let err = iterate_fixed_point(&pd, pair(&pd, "b", "b"), 2, 1).unwrap_err();
        assert!(err.to_string().contains("not a factor"), "{err}");
    }

    #[test]
    fn tm_right_half_after_two_generations() {
        let tm = thue_morse();
        let w = iterate_fixed_point(&tm, pair(&tm, "1", "1"), 2, 2).unwrap();
        let right: Vec<_> = (0..8).map(|n| tm.symbol_name(w.get(n).unwrap())).collect();
        assert_eq!(right, ["1", ONE_BAR, ONE_BAR, "1", ONE_BAR, "1", "1", ONE_BAR]);
    }

    #[test]
    fn generalized_pd_instances() {
        let r = generalized_pd_rule(1, 1).unwrap();
        let (a, b) = (r.symbol("a").unwrap(), r.symbol("b").unwrap());
        assert_eq!(r.names(r.image(a)), ["a", "b"]);
        assert_eq!(r.names(r.image(b)), ["a", "a"]);
        let r = generalized_pd_rule(2, 1).unwrap();
        assert_eq!(r.names(r.image(a)), ["b", "a", "b"]);
        assert_eq!(r.names(r.image(b)), ["b", "a", "a"]);
    }

    #[test]
    fn nested_windows() {
        for (rule, seed) in [
            (period_doubling(), ("a", "a")),
            (thue_morse(), ("1", "1")),
            (rudin_shapiro(), ("b", "a")),
            (generalized_morse(2, 1).unwrap(), ("1", "1")),
        ] {
            let seed = pair(&rule, seed.0, seed.1);
            for g in 0..3 {
                let short = iterate_fixed_point(&rule, seed, 2, g).unwrap();
                let long = iterate_fixed_point(&rule, seed, 2, g + 1).unwrap();
                for n in short.first_index()..=short.last_index() {
                    assert_eq!(short.get(n), long.get(n), "{} g={g} n={n}", rule.name());
                }
            }
        }
    }
}

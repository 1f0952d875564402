//! Named built-in systems: `pd`, `tm`, `gm:k,l` and `rs`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use adiff_core::correlation::{gm_exact_eta, rs_exact_eta_theta, tm_exact_eta, CorrelationSeries};
use adiff_core::distribution::RieszProfile;
use adiff_core::substitution::{
    fixed_point_window, period_doubling, rudin_shapiro, thue_morse, Substitution,
};
use adiff_core::window::{gm_window, make_comb, SymbolicWindow, WeightedComb};
use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum System {
    Pd,
    Tm,
    Gm(usize, usize),
    Rs,
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            System::Pd => write!(f, "pd"),
            System::Tm => write!(f, "tm"),
            System::Gm(k, l) => write!(f, "gm:{k},{l}"),
            System::Rs => write!(f, "rs"),
        }
    }
}

impl FromStr for System {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pd" => Ok(System::Pd),
            "tm" => Ok(System::Tm),
            "rs" => Ok(System::Rs),
            _ => {
                let bad = || format!("unknown system '{s}' (expected pd, tm, rs or gm:k,l)");
                let rest = s.strip_prefix("gm:").ok_or_else(bad)?;
                let (k, l) = rest.split_once(',').ok_or_else(bad)?;
                let (k, l): (usize, usize) = (k.parse().map_err(|_| bad())?, l.parse().map_err(|_| bad())?);
                if k == 0 || l == 0 {
                    return Err(format!("gm block lengths must be at least 1, got {s}"));
                }
                Ok(System::Gm(k, l))
            }
        }
    }
}

impl TryFrom<String> for System {
    type Error = String;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<System> for String {
    fn from(value: System) -> Self {
        value.to_string()
    }
}

impl System {
    /// Whether every weight is ±1.
    pub fn is_signed(self) -> bool {
        !matches!(self, System::Pd)
    }

    pub fn substitution(self) -> Substitution {
        match self {
            System::Pd => period_doubling(),
            System::Tm => thue_morse(),
            System::Gm(k, l) => adiff_core::substitution::generalized_morse(k, l).expect("checked when parsed"),
            System::Rs => rudin_shapiro(),
        }
    }

    /// Window on [−N, N] with its weighted comb. pd, tm and rs come from the
    /// rewriting fixed point (seeds b|a, 1|1 and b|a under ϱ²); gm from the
    /// digit closed form, mirrored to negative indices.
    pub fn window(
        self,
        half_length: usize,
        weights: Option<(Complex64, Complex64)>,
    ) -> anyhow::Result<(SymbolicWindow, WeightedComb)> {
        let rule = self.substitution();
        let window = match self {
            System::Gm(k, l) => gm_window(k, l, half_length)?,
            _ => {
                let seed = match self {
                    System::Tm => ("1", "1"),
                    _ => ("b", "a"),
                };
                let seed = (rule.symbol(seed.0)?, rule.symbol(seed.1)?);
                fixed_point_window(&rule, seed, 2, half_length)?
            }
        };
        let mut map: BTreeMap<String, Complex64> = rule
            .alphabet()
            .iter()
            .cloned()
            .zip(rule.weights().iter().copied())
            .collect();
        if let Some((plus, minus)) = weights {
            if self != System::Pd {
                anyhow::bail!("custom weights apply only to pd (a ↦ h₊, b ↦ h₋)");
            }
            map.insert("a".into(), plus);
            map.insert("b".into(), minus);
        }
        let comb = make_comb(&window, &map)?;
        Ok((window, comb))
    }

    pub fn exact_series(self, max_lag: usize) -> anyhow::Result<CorrelationSeries> {
        Ok(match self {
            System::Tm => tm_exact_eta(max_lag),
            System::Gm(k, l) => gm_exact_eta(k, l, max_lag)?,
            System::Rs => rs_exact_eta_theta(max_lag),
            System::Pd => anyhow::bail!("no exact autocorrelation recursion for pd; use an empirical window"),
        })
    }

    pub fn riesz_profile(self) -> anyhow::Result<RieszProfile> {
        Ok(match self {
            System::Tm => RieszProfile::new(1, 1)?,
            System::Gm(k, l) => RieszProfile::new(k, l)?,
            _ => anyhow::bail!("no Riesz product for {self}"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in [System::Pd, System::Tm, System::Rs, System::Gm(2, 3)] {
            assert_eq!(s.to_string().parse::<System>().unwrap(), s);
        }
        for bad in ["gm", "gm:0,1", "gm:1", "xx", "gm:a,b"] {
            assert!(bad.parse::<System>().is_err(), "{bad}");
        }
    }

    #[test]
    fn windows_are_centred() {
        for s in [System::Pd, System::Tm, System::Rs, System::Gm(1, 2)] {
            let (w, c) = s.window(16, None).unwrap();
            assert_eq!(w.first_index(), -16);
            assert_eq!(c.len(), 33);
        }
        assert!(System::Tm
            .window(4, Some((Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))))
            .is_err());
    }
}

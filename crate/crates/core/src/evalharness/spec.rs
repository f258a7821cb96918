use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::detector::ErrorClass;
use crate::editops::EditType;

/// One value per error class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerClass<T> {
    pub non_word: T,
    pub real_word: T,
}

impl<T> PerClass<T> {
    pub fn get(&self, class: ErrorClass) -> &T {
        match class {
            ErrorClass::NonWord => &self.non_word,
            ErrorClass::RealWord => &self.real_word,
        }
    }
}

/// Relative weights over the four basic edit types.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeMix {
    pub substitution: f64,
    pub insertion: f64,
    pub deletion: f64,
    pub transposition: f64,
}

impl TypeMix {
    pub fn weights(&self) -> [(EditType, f64); 4] {
        [
            (EditType::Substitution, self.substitution),
            (EditType::Insertion, self.insertion),
            (EditType::Deletion, self.deletion),
            (EditType::Transposition, self.transposition),
        ]
    }

    /// Proportions summing to 1.
    pub fn normalized(&self) -> [(EditType, f64); 4] {
        let w = self.weights();
        let total: f64 = w.iter().map(|(_, x)| x).sum();
        w.map(|(t, x)| (t, x / total))
    }
}

/// Relative weights over edit distances 1 and 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceMix {
    pub d1: f64,
    pub d2: f64,
}

impl DistanceMix {
    pub fn normalized(&self) -> [(usize, f64); 2] {
        let total = self.d1 + self.d2;
        [(1, self.d1 / total), (2, self.d2 / total)]
    }
}

/// Error injection parameters. Loaded from TOML; see `data/injection_spec.toml`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InjectionSpec {
    /// Errors per 10,000 sentences.
    pub error_rate: PerClass<f64>,
    pub type_mix: PerClass<TypeMix>,
    pub distance_mix: PerClass<DistanceMix>,
    pub rng_seed: u64,
    /// Probability that a substitution draws a visually similar letter
    /// (or, for real-word errors, a visually similar neighbor) when one exists.
    pub visual_substitution: f64,
    /// Token/edit resampling bound before a sentence is skipped.
    pub max_attempts: usize,
}

impl Default for InjectionSpec {
    fn default() -> Self {
        Self {
            error_rate: PerClass {
                non_word: 120.0,
                real_word: 29.0,
            },
            type_mix: PerClass {
                non_word: TypeMix {
                    substitution: 49.1,
                    insertion: 30.3,
                    deletion: 13.8,
                    transposition: 6.8,
                },
                real_word: TypeMix {
                    substitution: 47.8,
                    insertion: 31.4,
                    deletion: 13.5,
                    transposition: 7.3,
                },
            },
            distance_mix: PerClass {
                non_word: DistanceMix { d1: 86.4, d2: 14.0 },
                real_word: DistanceMix { d1: 85.5, d2: 12.6 },
            },
            rng_seed: 0,
            visual_substitution: 0.8,
            max_attempts: 50,
        }
    }
}

fn check_weights(name: &str, w: &[f64]) -> Result<(), EvalError> {
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(EvalError::Spec(format!(
            "{name}: weights must be finite and non-negative"
        )));
    }
    if w.iter().sum::<f64>() <= 0.0 {
        return Err(EvalError::Spec(format!(
            "{name}: weights must not all be zero"
        )));
    }
    Ok(())
}

impl InjectionSpec {
    pub fn from_toml(src: &str) -> Result<Self, EvalError> {
        let spec: Self = toml::from_str(src).map_err(|e| EvalError::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EvalError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn with_rates(mut self, non_word: f64, real_word: f64) -> Self {
        self.error_rate = PerClass {
            non_word,
            real_word,
        };
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        let r = self.error_rate;
        for (name, x) in [
            ("error_rate.non_word", r.non_word),
            ("error_rate.real_word", r.real_word),
        ] {
            if !x.is_finite() || x < 0.0 {
                return Err(EvalError::Spec(format!("{name} must be finite and >= 0")));
            }
        }
        if r.non_word + r.real_word > 10_000.0 {
            return Err(EvalError::Spec(
                "combined error rate exceeds 10,000 per 10,000 sentences".into(),
            ));
        }
        for (name, m) in [
            ("type_mix.non_word", &self.type_mix.non_word),
            ("type_mix.real_word", &self.type_mix.real_word),
        ] {
            check_weights(name, &m.weights().map(|(_, x)| x))?;
        }
        for (name, m) in [
            ("distance_mix.non_word", &self.distance_mix.non_word),
            ("distance_mix.real_word", &self.distance_mix.real_word),
        ] {
            check_weights(name, &[m.d1, m.d2])?;
        }
        if !(0.0..=1.0).contains(&self.visual_substitution) {
            return Err(EvalError::Spec(
                "visual_substitution must be in [0, 1]".into(),
            ));
        }
        if self.max_attempts == 0 {
            return Err(EvalError::Spec("max_attempts must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_normalize_to_one() {
        let s = InjectionSpec::default();
        s.validate().unwrap();
        for m in [s.type_mix.non_word, s.type_mix.real_word] {
            let total: f64 = m.normalized().iter().map(|(_, x)| x).sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
        let d = s.distance_mix.real_word.normalized();
        assert!((d[0].1 + d[1].1 - 1.0).abs() < 1e-9);
        assert!((d[0].1 - 85.5 / 98.1).abs() < 1e-12);
    }

    #[test]
    fn toml_round_trip_and_partial() {
        let s = InjectionSpec::default().with_seed(9);
        assert_eq!(InjectionSpec::from_toml(&s.to_toml()).unwrap(), s);
        let partial = InjectionSpec::from_toml(
            "rng_seed = 3\n[error_rate]\nnon_word = 0.0\nreal_word = 0.0\n",
        )
        .unwrap();
        assert_eq!(partial.rng_seed, 3);
        assert_eq!(partial.type_mix, InjectionSpec::default().type_mix);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(InjectionSpec::default()
            .with_rates(-1.0, 0.0)
            .validate()
            .is_err());
        assert!(InjectionSpec::default()
            .with_rates(9000.0, 2000.0)
            .validate()
            .is_err());
        let mut s = InjectionSpec::default();
        s.type_mix.non_word = TypeMix {
            substitution: 0.0,
            insertion: 0.0,
            deletion: 0.0,
            transposition: 0.0,
        };
        assert!(s.validate().is_err());
        assert!(InjectionSpec::from_toml("bogus = 1").is_err());
    }
}

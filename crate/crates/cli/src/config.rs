//! Flat `key = value` run configuration.
//!
//! ```text
//! # spin-1, maximally entangled
//! spin   = 1
//! theta  = 0.9        # radians, axis angle from z in the x-z plane
//! beta   = 0.4        # radians
//! state  = maximal    # maximal | maxprob | diag | chi
//! shots  = 10000
//! trials = 200
//! seed   = 7
//! ```
//!
//! `xi` lists Schmidt weights (`diag`: one per level, `maxprob`: two).
//! `chi` and `chi_im` give the real and imaginary parts of the coefficient
//! matrix, rows separated by `;` and entries by `,`.

use std::collections::HashMap;
use std::path::PathBuf;

use spinmetro::entangle::{max_prob_state, maximally_entangled};
use spinmetro::{AxisSpec, BipartiteState, CMatrix, RotationGenerator, SpinSystem, Target, C64};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{field}`")]
    UnknownKey { line: usize, field: String },
    #[error("line {line}: key `{field}` given twice")]
    Duplicate { line: usize, field: String },
    #[error("line {line}: field `{field}`: {message}")]
    Invalid { line: usize, field: String, message: String },
    #[error("field `{field}`: {message}")]
    Missing { field: String, message: String },
}

const KEYS: &[&str] = &[
    "spin", "theta", "beta", "state", "xi", "chi", "chi_im", "shots", "trials", "seed", "out", "target",
    "two_outcome",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Maximal,
    MaxProb,
    Diag,
    Chi,
}

impl StateKind {
    pub fn name(self) -> &'static str {
        match self {
            StateKind::Maximal => "maximal",
            StateKind::MaxProb => "maxprob",
            StateKind::Diag => "diag",
            StateKind::Chi => "chi",
        }
    }
}

/// A parsed and validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spin: f64,
    pub theta: f64,
    pub beta: f64,
    pub kind: StateKind,
    pub state: BipartiteState,
    pub generator: RotationGenerator,
    pub shots: u64,
    pub trials: u64,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub target: Target,
    pub two_outcome: bool,
}

struct Entry {
    line: usize,
    value: String,
}

fn invalid(line: usize, field: &str, message: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        line,
        field: field.to_string(),
        message: message.to_string(),
    }
}

fn number<T: std::str::FromStr>(entries: &HashMap<String, Entry>, field: &str, default: T) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    match entries.get(field) {
        None => Ok(default),
        Some(e) => e.value.parse().map_err(|err| invalid(e.line, field, err)),
    }
}

fn list(line: usize, field: &str, text: &str) -> Result<Vec<f64>, ConfigError> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| invalid(line, field, format!("`{}`: {e}", t.trim()))))
        .collect()
}

fn matrix(line: usize, field: &str, text: &str) -> Result<Vec<Vec<f64>>, ConfigError> {
    text.split(';').map(|row| list(line, field, row)).collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: HashMap<String, Entry> = HashMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                text: content.to_string(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    text: content.to_string(),
                });
            }
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line,
                    field: key.to_string(),
                });
            }
            if entries.contains_key(key) {
                return Err(ConfigError::Duplicate {
                    line,
                    field: key.to_string(),
                });
            }
            entries.insert(
                key.to_string(),
                Entry {
                    line,
                    value: value.to_string(),
                },
            );
        }
        Self::from_entries(&entries)
    }

    pub fn default_config() -> Self {
        Self::parse("").expect("defaults are valid")
    }

    fn from_entries(entries: &HashMap<String, Entry>) -> Result<Self, ConfigError> {
        let line_of = |field: &str| entries.get(field).map_or(0, |e| e.line);

        let spin: f64 = number(entries, "spin", 1.0)?;
        let sys = SpinSystem::new(spin).map_err(|e| invalid(line_of("spin"), "spin", e))?;
        let theta: f64 = number(entries, "theta", 0.9)?;
        let axis = AxisSpec::new(theta).map_err(|e| invalid(line_of("theta"), "theta", e))?;
        let generator = RotationGenerator::new(&sys, axis).map_err(|e| invalid(line_of("theta"), "theta", e))?;
        let beta: f64 = number(entries, "beta", 0.4)?;
        if !beta.is_finite() {
            return Err(invalid(line_of("beta"), "beta", "must be finite"));
        }
        let m = sys.dim();

        let kind = match entries.get("state").map(|e| e.value.as_str()) {
            None | Some("maximal") => StateKind::Maximal,
            Some("maxprob") => StateKind::MaxProb,
            Some("diag") => StateKind::Diag,
            Some("chi") => StateKind::Chi,
            Some(other) => {
                return Err(invalid(
                    line_of("state"),
                    "state",
                    format!("`{other}` is not one of maximal, maxprob, diag, chi"),
                ))
            }
        };
        let xi = entries
            .get("xi")
            .map(|e| list(e.line, "xi", &e.value))
            .transpose()?;
        let xi_line = line_of("xi");
        let state = match kind {
            StateKind::Maximal => maximally_entangled(m).map_err(|e| invalid(line_of("spin"), "spin", e))?,
            StateKind::MaxProb => {
                let (a, b) = match xi.as_deref() {
                    None => (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2),
                    Some([a, b]) => (*a, *b),
                    Some(v) => return Err(invalid(xi_line, "xi", format!("maxprob takes 2 weights, got {}", v.len()))),
                };
                max_prob_state(generator.spectrum(), a, b).map_err(|e| invalid(xi_line, "xi", e))?
            }
            StateKind::Diag => {
                let xi = xi.ok_or_else(|| ConfigError::Missing {
                    field: "xi".into(),
                    message: "state = diag needs Schmidt weights".into(),
                })?;
                if xi.len() != m {
                    return Err(invalid(xi_line, "xi", format!("expected {m} weights for spin {spin}, got {}", xi.len())));
                }
                BipartiteState::diagonal(&xi).map_err(|e| invalid(xi_line, "xi", e))?
            }
            StateKind::Chi => {
                let re_entry = entries.get("chi").ok_or_else(|| ConfigError::Missing {
                    field: "chi".into(),
                    message: "state = chi needs a coefficient matrix".into(),
                })?;
                let re = matrix(re_entry.line, "chi", &re_entry.value)?;
                let im = match entries.get("chi_im") {
                    Some(e) => Some((e.line, matrix(e.line, "chi_im", &e.value)?)),
                    None => None,
                };
                let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == m && rows.iter().all(|r| r.len() == m);
                if !shape_ok(&re) {
                    return Err(invalid(re_entry.line, "chi", format!("expected {m}x{m} entries")));
                }
                if let Some((line, im)) = &im {
                    if !shape_ok(im) {
                        return Err(invalid(*line, "chi_im", format!("expected {m}x{m} entries")));
                    }
                }
                let chi = CMatrix::from_fn(m, m, |i, j| {
                    C64::new(re[i][j], im.as_ref().map_or(0.0, |(_, im)| im[i][j]))
                });
                BipartiteState::from_coefficients(chi).map_err(|e| invalid(re_entry.line, "chi", e))?
            }
        };

        let shots: u64 = number(entries, "shots", 10_000)?;
        let trials: u64 = number(entries, "trials", 200)?;
        if shots == 0 {
            return Err(invalid(line_of("shots"), "shots", "must be positive"));
        }
        if trials < 2 {
            return Err(invalid(line_of("trials"), "trials", "must be at least 2"));
        }
        let seed = entries
            .get("seed")
            .map(|e| e.value.parse::<u64>().map_err(|err| invalid(e.line, "seed", err)))
            .transpose()?;
        let target = match entries.get("target").map(|e| e.value.as_str()) {
            None | Some("n-") | Some("nminus") => Target::NMinus,
            Some("n+") | Some("nplus") => Target::NPlus,
            Some(other) => return Err(invalid(line_of("target"), "target", format!("`{other}` is not n- or n+"))),
        };
        let two_outcome = match entries.get("two_outcome").map(|e| e.value.as_str()) {
            None | Some("false") => false,
            Some("true") => true,
            Some(other) => {
                return Err(invalid(line_of("two_outcome"), "two_outcome", format!("`{other}` is not true or false")))
            }
        };
        Ok(Self {
            spin,
            theta,
            beta,
            kind,
            state,
            generator,
            shots,
            trials,
            seed,
            out: entries.get("out").map(|e| PathBuf::from(&e.value)),
            target,
            two_outcome,
        })
    }
}

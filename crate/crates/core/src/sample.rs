use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One binomial observation: `successes` out of `trials`, optionally tagged
/// with a group label in {0, 1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub successes: u64,
    pub trials: u64,
    pub group: Option<u8>,
}

impl Record {
    pub fn new(successes: u64, trials: u64) -> Self {
        Self {
            successes,
            trials,
            group: None,
        }
    }

    pub fn with_group(successes: u64, trials: u64, group: u8) -> Self {
        Self {
            successes,
            trials,
            group: Some(group),
        }
    }

    #[inline]
    pub fn proportion(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    fn validate(&self, index: usize) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidRecord {
                index,
                reason: "trials must be at least 1".into(),
            });
        }
        if self.successes > self.trials {
            return Err(Error::InvalidRecord {
                index,
                reason: format!(
                    "successes {} exceed trials {}",
                    self.successes, self.trials
                ),
            });
        }
        if let Some(g) = self.group {
            if g > 1 {
                return Err(Error::InvalidRecord {
                    index,
                    reason: format!("group must be 0 or 1, got {g}"),
                });
            }
        }
        Ok(())
    }
}

/// Validated, nonempty collection of binomial records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinomialSample {
    records: Vec<Record>,
}

impl BinomialSample {
    pub fn new(records: Vec<Record>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::NoData);
        }
        for (i, r) in records.iter().enumerate() {
            r.validate(i)?;
        }
        Ok(Self { records })
    }

    pub fn from_counts(successes: &[u64], trials: &[u64]) -> Result<Self> {
        if successes.len() != trials.len() {
            return Err(Error::param(
                "trials",
                format!(
                    "length {} does not match successes length {}",
                    trials.len(),
                    successes.len()
                ),
            ));
        }
        Self::new(
            successes
                .iter()
                .zip(trials)
                .map(|(&x, &t)| Record::new(x, t))
                .collect(),
        )
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn proportions(&self) -> Vec<f64> {
        self.records.iter().map(Record::proportion).collect()
    }

    pub fn trials(&self) -> Vec<u64> {
        self.records.iter().map(|r| r.trials).collect()
    }

    pub fn harmonic_mean_trials(&self) -> f64 {
        let inv: f64 = self.records.iter().map(|r| 1.0 / r.trials as f64).sum();
        self.records.len() as f64 / inv
    }

    pub fn has_groups(&self) -> bool {
        self.records.iter().all(|r| r.group.is_some())
    }
}

/// `n / Σ 1/t_i`.
pub fn harmonic_mean(trials: &[u64]) -> Result<f64> {
    if trials.is_empty() {
        return Err(Error::NoData);
    }
    if let Some(i) = trials.iter().position(|&t| t == 0) {
        return Err(Error::InvalidRecord {
            index: i,
            reason: "trials must be at least 1".into(),
        });
    }
    let inv: f64 = trials.iter().map(|&t| 1.0 / t as f64).sum();
    Ok(trials.len() as f64 / inv)
}

/// Whether the two-group values are latent proportions or empirical ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProportionMode {
    True,
    Binomial,
}

/// Default lower bound on each group's share of the sample.
pub const DEFAULT_POSITIVITY_EPS: f64 = 0.05;

/// Two-group data: a value in [0, 1] per unit (a true proportion, or `x/t`)
/// plus a binary group label. Both groups hold at least an `eps` share.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoGroupSample {
    values: Vec<f64>,
    groups: Vec<bool>,
    trials: Option<Vec<u64>>,
    eps: f64,
}

impl TwoGroupSample {
    pub fn from_true(values: Vec<f64>, groups: Vec<bool>, eps: f64) -> Result<Self> {
        if values.len() != groups.len() {
            return Err(Error::param("groups", "length does not match values"));
        }
        if let Some(i) = values
            .iter()
            .position(|v| !(v.is_finite() && (0.0..=1.0).contains(v)))
        {
            return Err(Error::InvalidRecord {
                index: i,
                reason: format!("value {} outside [0, 1]", values[i]),
            });
        }
        let s = Self {
            values,
            groups,
            trials: None,
            eps,
        };
        s.check_positivity()?;
        Ok(s)
    }

    pub fn from_binomial(sample: &BinomialSample, eps: f64) -> Result<Self> {
        let mut groups = Vec::with_capacity(sample.len());
        for (i, r) in sample.records().iter().enumerate() {
            match r.group {
                Some(g) => groups.push(g == 1),
                None => {
                    return Err(Error::InvalidRecord {
                        index: i,
                        reason: "missing group label".into(),
                    })
                }
            }
        }
        let s = Self {
            values: sample.proportions(),
            groups,
            trials: Some(sample.trials()),
            eps,
        };
        s.check_positivity()?;
        Ok(s)
    }

    fn check_positivity(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::NoData);
        }
        let share = self.group_share();
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return Err(Error::param("eps", "positivity bound must lie in (0, 0.5)"));
        }
        if share < self.eps || share > 1.0 - self.eps || share == 0.0 || share == 1.0 {
            return Err(Error::Positivity {
                share,
                eps: self.eps,
            });
        }
        Ok(())
    }

    pub fn mode(&self) -> ProportionMode {
        if self.trials.is_some() {
            ProportionMode::Binomial
        } else {
            ProportionMode::True
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn groups(&self) -> &[bool] {
        &self.groups
    }

    pub fn trials(&self) -> Option<&[u64]> {
        self.trials.as_deref()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Ā = Σ A_i / n`.
    pub fn group_share(&self) -> f64 {
        self.groups.iter().filter(|&&a| a).count() as f64 / self.groups.len() as f64
    }

    /// `A_i/Ā − (1 − A_i)/(1 − Ā)` for every unit.
    pub fn contrast_weights(&self) -> Vec<f64> {
        let abar = self.group_share();
        self.groups
            .iter()
            .map(|&a| if a { 1.0 / abar } else { -1.0 / (1.0 - abar) })
            .collect()
    }

    /// Values belonging to one group.
    pub fn group_values(&self, group: bool) -> Vec<f64> {
        self.values
            .iter()
            .zip(&self.groups)
            .filter(|(_, &g)| g == group)
            .map(|(&v, _)| v)
            .collect()
    }

    /// Sub-sample on `indices`; fails if it breaks positivity.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let s = Self {
            values: indices.iter().map(|&i| self.values[i]).collect(),
            groups: indices.iter().map(|&i| self.groups[i]).collect(),
            trials: self
                .trials
                .as_ref()
                .map(|t| indices.iter().map(|&i| t[i]).collect()),
            eps: self.eps,
        };
        s.check_positivity()?;
        Ok(s)
    }

    /// Same data with every group label flipped.
    pub fn flipped(&self) -> Self {
        Self {
            groups: self.groups.iter().map(|g| !g).collect(),
            ..self.clone()
        }
    }
}

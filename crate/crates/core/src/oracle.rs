//! Budgeted access to an unknown target function.
//!
//! The oracle implements the active-testing protocol: unlabeled samples are
//! drawn i.i.d. Uniform(0,1) from a seeded stream, and labels may only be
//! requested for points that were already drawn. Both budgets are enforced.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::piecewise::Target;

/// How repeated label requests for one sample point are charged.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryCounting {
    /// A point costs one query the first time it is labeled.
    #[default]
    Distinct,
    /// Every label request costs one query.
    PerUse,
}

pub struct TargetOracle<'a> {
    target: &'a dyn Target,
    sample_budget: usize,
    query_budget: usize,
    counting: QueryCounting,
    rng: ChaCha8Rng,
    samples: Vec<f64>,
    labels: Vec<f64>,
    labeled: Vec<bool>,
    distinct_queries: usize,
    query_uses: usize,
}

impl<'a> TargetOracle<'a> {
    pub fn new(target: &'a dyn Target, sample_budget: usize, query_budget: usize, seed: u64) -> Self {
        Self {
            target,
            sample_budget,
            query_budget,
            counting: QueryCounting::default(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            samples: Vec::new(),
            labels: Vec::new(),
            labeled: Vec::new(),
            distinct_queries: 0,
            query_uses: 0,
        }
    }

    pub fn with_counting(mut self, counting: QueryCounting) -> Self {
        self.counting = counting;
        self
    }

    pub fn counting(&self) -> QueryCounting {
        self.counting
    }

    pub fn sample_budget(&self) -> usize {
        self.sample_budget
    }

    pub fn query_budget(&self) -> usize {
        self.query_budget
    }

    /// Draws `n` more Uniform(0,1) points and returns their index range.
    pub fn draw(&mut self, n: usize) -> Result<Range<usize>> {
        let start = self.samples.len();
        let requested = start + n;
        if requested > self.sample_budget {
            return Err(Error::SampleBudget { requested, budget: self.sample_budget });
        }
        self.samples.reserve(n);
        for _ in 0..n {
            self.samples.push(self.rng.random::<f64>());
        }
        self.labels.resize(requested, f64::NAN);
        self.labeled.resize(requested, false);
        Ok(start..requested)
    }

    pub fn points(&self) -> &[f64] {
        &self.samples
    }

    pub fn point(&self, index: usize) -> f64 {
        self.samples[index]
    }

    /// Requests the label of a previously drawn point.
    pub fn query(&mut self, index: usize) -> Result<f64> {
        if index >= self.samples.len() {
            return Err(Error::UndrawnQuery { index, drawn: self.samples.len() });
        }
        let fresh = !self.labeled[index];
        let charged = match self.counting {
            QueryCounting::Distinct => fresh,
            QueryCounting::PerUse => true,
        };
        if charged && self.queries_made() >= self.query_budget {
            return Err(Error::QueryBudget { budget: self.query_budget });
        }
        self.query_uses += 1;
        if fresh {
            self.labeled[index] = true;
            self.labels[index] = self.target.value(self.samples[index]);
            self.distinct_queries += 1;
        }
        Ok(self.labels[index])
    }

    /// Labels every drawn point (the passive regime).
    pub fn query_all(&mut self) -> Result<()> {
        for i in 0..self.samples.len() {
            if !self.labeled[i] {
                self.query(i)?;
            }
        }
        Ok(())
    }

    /// Label of a point that has already been queried, without charging.
    pub fn known_label(&self, index: usize) -> Option<f64> {
        self.labeled.get(index).copied().unwrap_or(false).then(|| self.labels[index])
    }

    pub fn samples_drawn(&self) -> usize {
        self.samples.len()
    }

    /// Queries charged against the budget under the configured counting.
    pub fn queries_made(&self) -> usize {
        match self.counting {
            QueryCounting::Distinct => self.distinct_queries,
            QueryCounting::PerUse => self.query_uses,
        }
    }

    pub fn distinct_queries(&self) -> usize {
        self.distinct_queries
    }

    pub fn query_uses(&self) -> usize {
        self.query_uses
    }
}

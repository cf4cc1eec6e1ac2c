use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Accept => "accept",
            Self::Reject => "reject",
        })
    }
}

/// Events in which a tester's schedule could not be completed. The tester
/// still answers (accept), but the run is flagged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureEvent {
    NeighborPoolExhausted,
    InsufficientPairs,
}

impl fmt::Display for FailureEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::NeighborPoolExhausted => "neighbor-pool-exhausted",
            Self::InsufficientPairs => "insufficient-pairs",
        })
    }
}

/// Outcome of one tester run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TesterReport {
    pub verdict: Verdict,
    pub samples_used: usize,
    /// Queries charged under the oracle's counting mode.
    pub queries_used: usize,
    pub distinct_queries: usize,
    pub query_uses: usize,
    pub statistic: f64,
    pub threshold: f64,
    pub failure_event: Option<FailureEvent>,
}

impl TesterReport {
    /// Accept iff the statistic is at most the threshold; failures accept.
    pub(crate) fn decide(statistic: f64, threshold: f64, failure_event: Option<FailureEvent>) -> Verdict {
        if failure_event.is_some() || statistic <= threshold {
            Verdict::Accept
        } else {
            Verdict::Reject
        }
    }

    pub(crate) fn from_oracle(
        oracle: &crate::oracle::TargetOracle<'_>,
        statistic: f64,
        threshold: f64,
        failure_event: Option<FailureEvent>,
    ) -> Self {
        Self {
            verdict: Self::decide(statistic, threshold, failure_event),
            samples_used: oracle.samples_drawn(),
            queries_used: oracle.queries_made(),
            distinct_queries: oracle.distinct_queries(),
            query_uses: oracle.query_uses(),
            statistic,
            threshold,
            failure_event,
        }
    }
}

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::scalar::{ExtendedReal, Scalar};
use crate::scale::Scale;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    HoldsAtScale,
    FailsAtScale,
    Inconclusive,
}

/// Scale-qualified outcome of a convergence test.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Verdict<T> {
    pub status: Status,
    pub estimate: ExtendedReal<T>,
    pub residual: T,
    pub scale: Scale<T>,
    pub witnesses: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

const MAX_WITNESSES: usize = 16;

impl<T: Scalar> Verdict<T> {
    pub fn holds(estimate: ExtendedReal<T>, residual: T, scale: &Scale<T>) -> Self {
        Verdict { status: Status::HoldsAtScale, estimate, residual, scale: scale.clone(), witnesses: Vec::new(), notes: Vec::new() }
    }

    /// A failure without witnesses is downgraded to inconclusive.
    pub fn fails(estimate: ExtendedReal<T>, residual: T, scale: &Scale<T>, mut witnesses: Vec<usize>) -> Self {
        witnesses.truncate(MAX_WITNESSES);
        if witnesses.is_empty() {
            let mut v = Verdict::inconclusive(scale, "failure without witness indices");
            v.estimate = estimate;
            return v;
        }
        Verdict { status: Status::FailsAtScale, estimate, residual, scale: scale.clone(), witnesses, notes: Vec::new() }
    }

    pub fn inconclusive(scale: &Scale<T>, why: impl Into<String>) -> Self {
        Verdict {
            status: Status::Inconclusive,
            estimate: ExtendedReal::PosInf,
            residual: T::infinity(),
            scale: scale.clone(),
            witnesses: Vec::new(),
            notes: vec![why.into()],
        }
    }

    pub fn from_test(ok: bool, estimate: ExtendedReal<T>, residual: T, scale: &Scale<T>, witnesses: Vec<usize>) -> Self {
        if ok {
            let mut v = Verdict::holds(estimate, residual, scale);
            v.witnesses = witnesses.into_iter().take(MAX_WITNESSES).collect();
            v
        } else {
            Verdict::fails(estimate, residual, scale, witnesses)
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn holds_at_scale(&self) -> bool {
        self.status == Status::HoldsAtScale
    }

    pub fn fails_at_scale(&self) -> bool {
        self.status == Status::FailsAtScale
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Hypothesis<T> {
    pub name: String,
    pub verdict: Verdict<T>,
}

/// Hypothesis verdicts plus the conclusion they license. `conclusion` is `None` when
/// some hypothesis failed and no claim is made.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TheoremReport<T> {
    pub name: String,
    pub hypotheses: Vec<Hypothesis<T>>,
    pub conclusion: Option<Verdict<T>>,
    pub quantities: BTreeMap<String, T>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl<T: Scalar> TheoremReport<T> {
    pub fn new(name: impl Into<String>) -> Self {
        TheoremReport { name: name.into(), hypotheses: Vec::new(), conclusion: None, quantities: BTreeMap::new(), notes: Vec::new() }
    }

    pub fn push(&mut self, name: impl Into<String>, verdict: Verdict<T>) -> bool {
        let ok = verdict.holds_at_scale();
        self.hypotheses.push(Hypothesis { name: name.into(), verdict });
        ok
    }

    pub fn quantity(&mut self, key: impl Into<String>, value: T) {
        self.quantities.insert(key.into(), value);
    }

    pub fn hypotheses_hold(&self) -> bool {
        self.hypotheses.iter().all(|h| h.verdict.holds_at_scale())
    }

    pub fn failed_hypotheses(&self) -> Vec<&str> {
        self.hypotheses.iter().filter(|h| !h.verdict.holds_at_scale()).map(|h| h.name.as_str()).collect()
    }

    pub fn hypothesis(&self, name: &str) -> Option<&Verdict<T>> {
        self.hypotheses.iter().find(|h| h.name == name).map(|h| &h.verdict)
    }

    /// Conclusion status, `Inconclusive` when no claim was made.
    pub fn status(&self) -> Status {
        self.conclusion.as_ref().map(|c| c.status).unwrap_or(Status::Inconclusive)
    }

    pub fn conclude(&mut self, verdict: Verdict<T>) {
        self.conclusion = Some(verdict);
    }
}

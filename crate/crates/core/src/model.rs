//! The ground temporal ontology: state variables, tokens, timelines,
//! scheduled plans and partial plans, with their structural validity
//! checks.
//!
//! Time is discrete (`u64`). A token occupies the half-open interval
//! `[start, end)`. Timelines are gap-free by construction: the start of
//! a token is always the end of its predecessor, so only durations are
//! stored and interval endpoints are derived from cached prefix sums.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Variable identifiers. Plain strings keyed through ordered maps so
/// that every traversal of a plan is deterministic.
pub type VarName = String;
/// Value identifiers within a variable domain.
pub type ValueName = String;

/// Upper end of a duration or distance interval; `Infinite` is the
/// explicit `+inf` marker (never a sentinel integer).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Upper {
    Finite(u64),
    Infinite,
}

impl Upper {
    pub fn is_finite(self) -> bool {
        matches!(self, Upper::Finite(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Upper::Finite(n) => Some(n),
            Upper::Infinite => None,
        }
    }

    /// `value <= self`, with everything below `+inf`.
    pub fn admits(self, value: u64) -> bool {
        match self {
            Upper::Finite(n) => value <= n,
            Upper::Infinite => true,
        }
    }
}

impl fmt::Display for Upper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Upper::Finite(n) => write!(f, "{n}"),
            Upper::Infinite => write!(f, "inf"),
        }
    }
}

/// Who controls the end of tokens holding a given value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Controllability {
    Controllable,
    Uncontrollable,
}

/// A finite-domain state variable: domain, legal value transitions,
/// per-value duration bounds and per-value controllability tags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateVariable {
    pub name: VarName,
    /// Ordered domain of the variable.
    pub values: Vec<ValueName>,
    /// Maps each value to the set of values that may follow it.
    pub transitions: BTreeMap<ValueName, Vec<ValueName>>,
    /// Maps each value to its `(d_min, d_max)` duration bounds.
    pub durations: BTreeMap<ValueName, (u64, Upper)>,
    pub controllability: BTreeMap<ValueName, Controllability>,
}

impl StateVariable {
    /// Checks the structural invariants: transition targets belong to
    /// the domain, `1 <= d_min <= d_max`, and `durations` and
    /// `controllability` are total over `values`.
    pub fn validate(&self) -> Result<(), ModelError> {
        for value in &self.values {
            let (lo, hi) = *self
                .durations
                .get(value)
                .ok_or_else(|| ModelError::MissingDuration {
                    variable: self.name.clone(),
                    value: value.clone(),
                })?;
            if lo < 1 || !hi.admits(lo) {
                return Err(ModelError::BadDurationBounds {
                    variable: self.name.clone(),
                    value: value.clone(),
                    lower: lo,
                    upper: hi,
                });
            }
            if !self.controllability.contains_key(value) {
                return Err(ModelError::MissingTag {
                    variable: self.name.clone(),
                    value: value.clone(),
                });
            }
        }
        for (source, targets) in &self.transitions {
            if !self.values.contains(source) {
                return Err(ModelError::UnknownValue {
                    variable: self.name.clone(),
                    value: source.clone(),
                });
            }
            for target in targets {
                if !self.values.contains(target) {
                    return Err(ModelError::UnknownValue {
                        variable: self.name.clone(),
                        value: target.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn duration_bounds(&self, value: &str) -> (u64, Upper) {
        self.durations
            .get(value)
            .copied()
            .unwrap_or((1, Upper::Infinite))
    }

    pub fn tag(&self, value: &str) -> Controllability {
        self.controllability
            .get(value)
            .copied()
            .unwrap_or(Controllability::Controllable)
    }

    /// May `next` directly follow `prev` on this variable?
    pub fn allows_transition(&self, prev: &str, next: &str) -> bool {
        self.transitions
            .get(prev)
            .map(|targets| targets.iter().any(|t| t == next))
            .unwrap_or(false)
    }
}

/// A closed token: the variable held `value` for `duration` time units.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub variable: VarName,
    pub value: ValueName,
    pub duration: u64,
}

/// A token that has started but not yet ended.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpenToken {
    pub variable: VarName,
    pub value: ValueName,
}

/// A gap-free sequence of closed tokens for one variable, optionally
/// followed by one open token still running.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timeline {
    variable: VarName,
    closed: Vec<Token>,
    /// Cached prefix sums: `starts[i]` is the start time of token `i`.
    starts: Vec<u64>,
    open_tail: Option<OpenToken>,
}

impl Timeline {
    pub fn empty(variable: impl Into<VarName>) -> Self {
        Timeline {
            variable: variable.into(),
            closed: Vec::new(),
            starts: Vec::new(),
            open_tail: None,
        }
    }

    /// Builds a closed timeline from `(value, duration)` pairs.
    pub fn from_tokens<I, V>(variable: impl Into<VarName>, tokens: I) -> Self
    where
        I: IntoIterator<Item = (V, u64)>,
        V: Into<ValueName>,
    {
        let variable = variable.into();
        let mut timeline = Timeline::empty(variable.clone());
        for (value, duration) in tokens {
            timeline.push_closed(value.into(), duration);
        }
        timeline
    }

    pub fn variable(&self) -> &str {
        &self.variable
    }

    pub fn closed_tokens(&self) -> &[Token] {
        &self.closed
    }

    pub fn open_tail(&self) -> Option<&OpenToken> {
        self.open_tail.as_ref()
    }

    pub fn is_open(&self) -> bool {
        self.open_tail.is_some()
    }

    pub fn is_empty(&self) -> bool {
        self.closed.is_empty() && self.open_tail.is_none()
    }

    /// Start time of closed token `i` (0-based).
    pub fn start(&self, index: usize) -> Option<u64> {
        self.starts.get(index).copied()
    }

    /// End time of closed token `i` (0-based).
    pub fn end(&self, index: usize) -> Option<u64> {
        let token = self.closed.get(index)?;
        Some(self.starts[index] + token.duration)
    }

    /// End of the last closed token; 0 for an empty timeline. Open
    /// tails do not contribute.
    pub fn horizon(&self) -> u64 {
        match self.closed.last() {
            Some(token) => self.starts[self.closed.len() - 1] + token.duration,
            None => 0,
        }
    }

    /// Start time of the open token, if any (equals the horizon).
    pub fn open_start(&self) -> Option<u64> {
        self.open_tail.as_ref().map(|_| self.horizon())
    }

    /// Value held last on the timeline: the open token's value, or the
    /// last closed token's.
    pub fn last_value(&self) -> Option<&str> {
        if let Some(open) = &self.open_tail {
            return Some(&open.value);
        }
        self.closed.last().map(|t| t.value.as_str())
    }

    pub(crate) fn push_closed(&mut self, value: ValueName, duration: u64) {
        self.starts.push(self.horizon());
        self.closed.push(Token {
            variable: self.variable.clone(),
            value,
            duration,
        });
    }

    pub(crate) fn push_open(&mut self, value: ValueName) {
        debug_assert!(self.open_tail.is_none());
        self.open_tail = Some(OpenToken {
            variable: self.variable.clone(),
            value,
        });
    }

    /// Replaces the open tail by a closed token of the given duration.
    pub(crate) fn close_open(&mut self, duration: u64) {
        let open = self.open_tail.take().expect("no open token to close");
        self.push_closed(open.value, duration);
    }
}

/// A fully timed plan: one closed timeline per declared variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledPlan {
    pub timelines: BTreeMap<VarName, Timeline>,
}

impl ScheduledPlan {
    pub fn timeline(&self, variable: &str) -> Option<&Timeline> {
        self.timelines.get(variable)
    }

    pub fn horizon(&self) -> u64 {
        self.timelines.values().map(Timeline::horizon).max().unwrap_or(0)
    }
}

/// A plan under construction: one timeline (open or closed) per
/// variable, plus the current time `now`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialPlan {
    timelines: BTreeMap<VarName, Timeline>,
    now: u64,
}

/// First violated validity condition of a partial plan.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanViolation {
    #[error("open timeline `{variable}` has horizon {horizon}, not below now = {now}")]
    OpenHorizonNotBeforeNow { variable: VarName, horizon: u64, now: u64 },
    #[error("closed timeline `{variable}` has horizon {horizon}, but now = {now}")]
    ClosedHorizonNotNow { variable: VarName, horizon: u64, now: u64 },
    #[error("token {index} of `{variable}` has zero duration")]
    ZeroDurationToken { variable: VarName, index: usize },
}

impl PartialPlan {
    /// The unique empty partial plan over the given variables, with
    /// `now = 0`.
    pub fn empty<I, S>(variables: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<VarName>,
    {
        let timelines = variables
            .into_iter()
            .map(|v| {
                let name = v.into();
                (name.clone(), Timeline::empty(name))
            })
            .collect();
        PartialPlan { timelines, now: 0 }
    }

    pub fn from_timelines<I>(timelines: I, now: u64) -> Self
    where
        I: IntoIterator<Item = Timeline>,
    {
        let timelines = timelines
            .into_iter()
            .map(|t| (t.variable().to_owned(), t))
            .collect();
        PartialPlan { timelines, now }
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn timelines(&self) -> impl Iterator<Item = &Timeline> {
        self.timelines.values()
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.timelines.keys().map(String::as_str)
    }

    pub fn timeline(&self, variable: &str) -> Option<&Timeline> {
        self.timelines.get(variable)
    }

    /// True iff every timeline is empty (the plan is the unique empty
    /// plan when additionally `now = 0`).
    pub fn is_empty(&self) -> bool {
        self.timelines.values().all(Timeline::is_empty)
    }

    pub(crate) fn timeline_mut(&mut self, variable: &str) -> Option<&mut Timeline> {
        self.timelines.get_mut(variable)
    }

    pub(crate) fn set_now(&mut self, now: u64) {
        self.now = now;
    }

    /// Checks the defining conditions of a partial plan and reports
    /// the first violation: open timelines must end strictly before
    /// `now`, closed timelines exactly at `now`, and every closed
    /// token must have positive duration (gap-freeness holds by
    /// construction).
    pub fn validate(&self) -> Result<(), PlanViolation> {
        for timeline in self.timelines.values() {
            for (index, token) in timeline.closed_tokens().iter().enumerate() {
                if token.duration == 0 {
                    return Err(PlanViolation::ZeroDurationToken {
                        variable: timeline.variable().to_owned(),
                        index,
                    });
                }
            }
            let horizon = timeline.horizon();
            if timeline.is_open() {
                if horizon >= self.now {
                    return Err(PlanViolation::OpenHorizonNotBeforeNow {
                        variable: timeline.variable().to_owned(),
                        horizon,
                        now: self.now,
                    });
                }
            } else if horizon != self.now {
                return Err(PlanViolation::ClosedHorizonNotNow {
                    variable: timeline.variable().to_owned(),
                    horizon,
                    now: self.now,
                });
            }
        }
        Ok(())
    }

    /// Closes every open token at `now` and returns the resulting
    /// scheduled plan. The empty plan cannot be closed.
    pub fn closure(&self) -> Result<ScheduledPlan, ModelError> {
        if self.is_empty() {
            return Err(ModelError::EmptyPlanClosure);
        }
        let mut timelines = BTreeMap::new();
        for (name, timeline) in &self.timelines {
            let mut closed = timeline.clone();
            if closed.is_open() {
                let started = closed.horizon();
                debug_assert!(started < self.now);
                closed.close_open(self.now - started);
            }
            timelines.insert(name.clone(), closed);
        }
        Ok(ScheduledPlan { timelines })
    }

    /// Interval `[start, end)` of the closed token at `index` (0-based)
    /// on the named timeline.
    pub fn token_interval(&self, variable: &str, index: usize) -> Result<(u64, u64), ModelError> {
        let timeline = self
            .timelines
            .get(variable)
            .ok_or_else(|| ModelError::UnknownVariable(variable.to_owned()))?;
        match (timeline.start(index), timeline.end(index)) {
            (Some(start), Some(end)) => Ok((start, end)),
            _ => Err(ModelError::IndexOutOfRange {
                variable: variable.to_owned(),
                index,
                len: timeline.closed_tokens().len(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(VarName),
    #[error("token index {index} out of range for `{variable}` (has {len} closed tokens)")]
    IndexOutOfRange {
        variable: VarName,
        index: usize,
        len: usize,
    },
    #[error("the empty plan cannot be closed")]
    EmptyPlanClosure,
    #[error("variable `{variable}` has no duration bounds for value `{value}`")]
    MissingDuration { variable: VarName, value: ValueName },
    #[error("variable `{variable}` has no controllability tag for value `{value}`")]
    MissingTag { variable: VarName, value: ValueName },
    #[error("variable `{variable}` mentions unknown value `{value}`")]
    UnknownValue { variable: VarName, value: ValueName },
    #[error("duration bounds [{lower}, {upper}] for `{variable}={value}` are invalid")]
    BadDurationBounds {
        variable: VarName,
        value: ValueName,
        lower: u64,
        upper: Upper,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan_with(timelines: Vec<Timeline>, now: u64) -> PartialPlan {
        PartialPlan::from_timelines(timelines, now)
    }

    #[test]
    fn first_token_interval_starts_at_zero() {
        let plan = plan_with(vec![Timeline::from_tokens("x", [("v", 5)])], 5);
        assert_eq!(plan.token_interval("x", 0).unwrap(), (0, 5));
    }

    #[test]
    fn token_intervals_are_prefix_sums() {
        let plan = plan_with(vec![Timeline::from_tokens("x", [("a", 2), ("b", 3)])], 5);
        assert_eq!(plan.token_interval("x", 0).unwrap(), (0, 2));
        assert_eq!(plan.token_interval("x", 1).unwrap(), (2, 5));
    }

    #[test]
    fn camera_second_on_token_interval() {
        // off 2, on 2, off 5, then the second on token of duration 3.
        let plan = plan_with(
            vec![Timeline::from_tokens(
                "cam",
                [("off", 2), ("on", 2), ("off", 5), ("on", 3)],
            )],
            12,
        );
        assert_eq!(plan.token_interval("cam", 3).unwrap(), (9, 12));
    }

    #[test]
    fn token_interval_rejects_bad_lookups() {
        let plan = plan_with(vec![Timeline::from_tokens("x", [("v", 1)])], 1);
        assert!(matches!(
            plan.token_interval("y", 0),
            Err(ModelError::UnknownVariable(_))
        ));
        assert!(matches!(
            plan.token_interval("x", 1),
            Err(ModelError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn closure_closes_open_tokens_at_now() {
        let mut timeline = Timeline::from_tokens("x", [("a", 1)]);
        timeline.push_open("b".into());
        let plan = plan_with(vec![timeline], 2);
        let closed = plan.closure().unwrap();
        let tokens = closed.timeline("x").unwrap().closed_tokens();
        assert_eq!(tokens[1].duration, 1);
        assert_eq!(closed.timeline("x").unwrap().horizon(), 2);
    }

    #[test]
    fn closure_duration_is_now_minus_start() {
        let mut timeline = Timeline::from_tokens("x", [("a", 3)]);
        timeline.push_open("b".into());
        let plan = plan_with(vec![timeline], 10);
        let closed = plan.closure().unwrap();
        assert_eq!(closed.timeline("x").unwrap().closed_tokens()[1].duration, 7);
    }

    #[test]
    fn closure_rejects_empty_plan() {
        let plan = PartialPlan::empty(["x"]);
        assert!(matches!(plan.closure(), Err(ModelError::EmptyPlanClosure)));
    }

    #[test]
    fn closure_is_identity_on_closed_plans() {
        let plan = plan_with(vec![Timeline::from_tokens("x", [("a", 2)])], 2);
        let closed = plan.closure().unwrap();
        assert_eq!(closed.timeline("x").unwrap(), plan.timeline("x").unwrap());
    }

    #[test]
    fn validate_accepts_all_closed_at_now() {
        // Both timelines closed at 2, now = 2.
        let plan = plan_with(
            vec![
                Timeline::from_tokens("x", [("a", 2)]),
                Timeline::from_tokens("y", [("b", 2)]),
            ],
            2,
        );
        assert_eq!(plan.validate(), Ok(()));
    }

    #[test]
    fn validate_rejects_unsucceeded_ended_token() {
        // y continues past the end of x while x has no successor.
        let mut y = Timeline::from_tokens("y", [("b", 1)]);
        y.push_open("c".into());
        let plan = plan_with(vec![Timeline::from_tokens("x", [("a", 2)]), y], 3);
        assert!(matches!(
            plan.validate(),
            Err(PlanViolation::ClosedHorizonNotNow { .. })
        ));
    }

    #[test]
    fn validate_accepts_empty_plan() {
        assert_eq!(PartialPlan::empty(["x", "y"]).validate(), Ok(()));
    }

    #[test]
    fn validate_rejects_empty_plan_with_positive_now() {
        let mut plan = PartialPlan::empty(["x"]);
        plan.set_now(1);
        assert!(plan.validate().is_err());
    }

    #[test]
    fn open_timelines_must_end_before_now() {
        let mut x = Timeline::from_tokens("x", [("a", 2)]);
        x.push_open("b".into());
        let plan = plan_with(vec![x], 2);
        assert!(matches!(
            plan.validate(),
            Err(PlanViolation::OpenHorizonNotBeforeNow { .. })
        ));
    }

    #[test]
    fn consecutive_tokens_share_boundaries() {
        let timeline = Timeline::from_tokens("x", [("a", 2), ("b", 1), ("c", 4)]);
        for i in 0..2 {
            assert_eq!(timeline.end(i), timeline.start(i + 1));
        }
        assert_eq!(timeline.horizon(), 7);
    }
}

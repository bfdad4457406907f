//! The synchronization-rule language: atoms over token endpoints,
//! existential statements, rules and problems, plus the satisfaction
//! checker that decides whether a scheduled plan is a solution plan.
//!
//! An atom relates the start or end of two quantified tokens (or one
//! endpoint and a fixed instant) and bounds their distance. A rule has
//! an optional trigger and a disjunction of existential statements;
//! for each token matching the trigger, at least one disjunct must be
//! witnessed. Triggerless rules ask for one witness per plan.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{ScheduledPlan, StateVariable, Upper, ValueName, VarName};

/// A token name bound by a quantifier or a rule trigger.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TokenName(pub String);

impl TokenName {
    pub fn new(name: impl Into<String>) -> Self {
        TokenName(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TokenName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for TokenName {
    fn from(s: &str) -> Self {
        TokenName(s.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Endpoint {
    Start,
    End,
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Start => f.write_str("start"),
            Endpoint::End => f.write_str("end"),
        }
    }
}

/// One side of an atom: a named token's start or end.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EndpointRef {
    pub name: TokenName,
    pub endpoint: Endpoint,
}

impl EndpointRef {
    pub fn start(name: impl Into<TokenName>) -> Self {
        EndpointRef { name: name.into(), endpoint: Endpoint::Start }
    }

    pub fn end(name: impl Into<TokenName>) -> Self {
        EndpointRef { name: name.into(), endpoint: Endpoint::End }
    }
}

/// Right-hand side of an atom: another endpoint, or a fixed instant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AtomRhs {
    Endpoint(EndpointRef),
    Instant(u64),
}

/// Distance bounds `[lower, upper]` with `upper` possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: u64,
    pub upper: Upper,
}

impl Bounds {
    pub fn new(lower: u64, upper: Upper) -> Self {
        Bounds { lower, upper }
    }

    pub fn exact(value: u64) -> Self {
        Bounds { lower: value, upper: Upper::Finite(value) }
    }

    pub fn at_least(lower: u64) -> Self {
        Bounds { lower, upper: Upper::Infinite }
    }

    pub fn contains(&self, distance: i128) -> bool {
        if distance < self.lower as i128 {
            return false;
        }
        match self.upper {
            Upper::Finite(u) => distance <= u as i128,
            Upper::Infinite => true,
        }
    }
}

/// An atomic distance constraint. A binary atom holds iff
/// `lower <= time(right) - time(left) <= upper`; a pointwise atom
/// replaces the right endpoint by a fixed instant `t` and holds iff
/// `lower <= t - time(left) <= upper`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub left: EndpointRef,
    pub right: AtomRhs,
    pub bounds: Bounds,
}

impl Atom {
    pub fn binary(left: EndpointRef, right: EndpointRef, bounds: Bounds) -> Self {
        Atom { left, right: AtomRhs::Endpoint(right), bounds }
    }

    pub fn pointwise(left: EndpointRef, instant: u64, bounds: Bounds) -> Self {
        Atom { left, right: AtomRhs::Instant(instant), bounds }
    }

    /// A binary atom is bounded iff its upper bound is finite.
    pub fn is_bounded(&self) -> bool {
        self.bounds.upper.is_finite()
    }

    /// Names referenced by this atom (right side first when binary).
    pub fn names(&self) -> impl Iterator<Item = &TokenName> {
        let right = match &self.right {
            AtomRhs::Endpoint(e) => Some(&e.name),
            AtomRhs::Instant(_) => None,
        };
        std::iter::once(&self.left.name).chain(right)
    }
}

/// `meets(a, b)`: the end of `a` coincides with the start of `b`.
pub fn meets(a: impl Into<TokenName>, b: impl Into<TokenName>) -> Atom {
    Atom::binary(EndpointRef::end(a), EndpointRef::start(b), Bounds::exact(0))
}

/// `during(a, b)`: `a` lies within `b`, i.e. `start(b) <= start(a)`
/// and `end(a) <= end(b)`.
pub fn during(a: impl Into<TokenName>, b: impl Into<TokenName>) -> [Atom; 2] {
    let a = a.into();
    let b = b.into();
    [
        Atom::binary(EndpointRef::start(b.clone()), EndpointRef::start(a.clone()), Bounds::at_least(0)),
        Atom::binary(EndpointRef::end(a), EndpointRef::end(b), Bounds::at_least(0)),
    ]
}

/// `duration(a) in [lo, hi]` as a start-to-end self atom.
pub fn duration_in(a: impl Into<TokenName>, lower: u64, upper: Upper) -> Atom {
    let a = a.into();
    Atom::binary(
        EndpointRef::start(a.clone()),
        EndpointRef::end(a),
        Bounds::new(lower, upper),
    )
}

/// `duration(a) = k`.
pub fn duration_eq(a: impl Into<TokenName>, k: u64) -> Atom {
    duration_in(a, k, Upper::Finite(k))
}

/// `a starts at t`: pointwise equality on the start endpoint.
pub fn starts_at(a: impl Into<TokenName>, t: u64) -> Atom {
    Atom::pointwise(EndpointRef::start(a), t, Bounds::exact(0))
}

/// A quantified token declaration `name[variable = value]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Quantifier {
    pub name: TokenName,
    pub variable: VarName,
    pub value: ValueName,
}

impl Quantifier {
    pub fn new(
        name: impl Into<TokenName>,
        variable: impl Into<VarName>,
        value: impl Into<ValueName>,
    ) -> Self {
        Quantifier {
            name: name.into(),
            variable: variable.into(),
            value: value.into(),
        }
    }
}

/// One disjunct of a rule body: existentially quantified tokens and a
/// conjunctive clause of atoms over them (and the trigger).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExistentialStatement {
    pub quantified: Vec<Quantifier>,
    pub clause: Vec<Atom>,
}

/// A synchronization rule: an optional trigger and a non-empty
/// disjunction of existential statements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynchronizationRule {
    pub name: String,
    pub trigger: Option<Quantifier>,
    pub body: Vec<ExistentialStatement>,
}

impl SynchronizationRule {
    pub fn is_triggerless(&self) -> bool {
        self.trigger.is_none()
    }
}

/// A timeline-based planning problem: state variables plus rules.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Problem {
    pub variables: BTreeMap<VarName, StateVariable>,
    pub rules: Vec<SynchronizationRule>,
}

impl Problem {
    pub fn new(variables: Vec<StateVariable>, rules: Vec<SynchronizationRule>) -> Self {
        Problem {
            variables: variables.into_iter().map(|v| (v.name.clone(), v)).collect(),
            rules,
        }
    }

    pub fn variable(&self, name: &str) -> Option<&StateVariable> {
        self.variables.get(name)
    }

    /// Checks that every rule is well-typed against the declared
    /// variables: quantified names are unique within a rule, variable
    /// and value pairs exist, and atoms only reference bound names.
    pub fn validate(&self) -> Result<(), RulesError> {
        for variable in self.variables.values() {
            variable
                .validate()
                .map_err(|source| RulesError::BadVariable { source })?;
        }
        for rule in &self.rules {
            let mut names: Vec<&TokenName> = Vec::new();
            let check_quantifier = |q: &Quantifier| -> Result<(), RulesError> {
                let var = self.variables.get(&q.variable).ok_or_else(|| {
                    RulesError::UnknownVariableInRule {
                        rule: rule.name.clone(),
                        variable: q.variable.clone(),
                    }
                })?;
                if !var.values.contains(&q.value) {
                    return Err(RulesError::UnknownValueInRule {
                        rule: rule.name.clone(),
                        variable: q.variable.clone(),
                        value: q.value.clone(),
                    });
                }
                Ok(())
            };
            if let Some(trigger) = &rule.trigger {
                check_quantifier(trigger)?;
            }
            for statement in &rule.body {
                names.clear();
                if let Some(trigger) = &rule.trigger {
                    names.push(&trigger.name);
                }
                for q in &statement.quantified {
                    check_quantifier(q)?;
                    if names.contains(&&q.name) {
                        return Err(RulesError::DuplicateTokenName {
                            rule: rule.name.clone(),
                            name: q.name.clone(),
                        });
                    }
                    names.push(&q.name);
                }
                for atom in &statement.clause {
                    for name in atom.names() {
                        if !names.contains(&name) {
                            return Err(RulesError::UnboundTokenName {
                                rule: rule.name.clone(),
                                name: name.clone(),
                            });
                        }
                    }
                }
                if rule.trigger.is_none() {
                    for atom in &statement.clause {
                        // triggerless bodies must not smuggle a trigger name in
                        debug_assert!(atom.names().all(|n| {
                            statement.quantified.iter().any(|q| &q.name == n)
                        }));
                    }
                }
            }
            if rule.body.is_empty() {
                return Err(RulesError::EmptyRuleBody { rule: rule.name.clone() });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RulesError {
    #[error("atom references unassigned token name `{0}`")]
    UnassignedName(TokenName),
    #[error("rule `{rule}` references undeclared variable `{variable}`")]
    UnknownVariableInRule { rule: String, variable: VarName },
    #[error("rule `{rule}` references unknown value `{variable}={value}`")]
    UnknownValueInRule {
        rule: String,
        variable: VarName,
        value: ValueName,
    },
    #[error("rule `{rule}` binds token name `{name}` twice")]
    DuplicateTokenName { rule: String, name: TokenName },
    #[error("rule `{rule}` uses unbound token name `{name}`")]
    UnboundTokenName { rule: String, name: TokenName },
    #[error("rule `{rule}` has an empty body")]
    EmptyRuleBody { rule: String },
    #[error("invalid state variable: {source}")]
    BadVariable { source: crate::model::ModelError },
    #[error("plan covers `{plan_vars:?}` but the problem declares `{problem_vars:?}`")]
    VariableMismatch {
        plan_vars: Vec<VarName>,
        problem_vars: Vec<VarName>,
    },
}

/// Position of a concrete token inside a scheduled plan.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TokenPos {
    pub variable: VarName,
    pub index: usize,
}

/// A witness: assignment of token names to concrete plan tokens.
pub type Witness = BTreeMap<TokenName, TokenPos>;

/// Evaluates one atom under an assignment of names to time intervals.
pub fn atom_eval(
    atom: &Atom,
    assignment: &BTreeMap<TokenName, (u64, u64)>,
) -> Result<bool, RulesError> {
    let time_of = |er: &EndpointRef| -> Result<i128, RulesError> {
        let (start, end) = assignment
            .get(&er.name)
            .ok_or_else(|| RulesError::UnassignedName(er.name.clone()))?;
        Ok(match er.endpoint {
            Endpoint::Start => *start as i128,
            Endpoint::End => *end as i128,
        })
    };
    let left = time_of(&atom.left)?;
    let right = match &atom.right {
        AtomRhs::Endpoint(er) => time_of(er)?,
        AtomRhs::Instant(t) => *t as i128,
    };
    Ok(atom.bounds.contains(right - left))
}

/// Matching options. `distinct_witnesses` forbids two quantified names
/// from binding the same concrete token (off by default; nothing in
/// the rule semantics forbids sharing).
#[derive(Debug, Clone, Copy, Default)]
pub struct MatchOptions {
    pub distinct_witnesses: bool,
}

struct Matcher<'a> {
    plan: &'a ScheduledPlan,
    statement: &'a ExistentialStatement,
    options: MatchOptions,
    bound: Witness,
    intervals: BTreeMap<TokenName, (u64, u64)>,
}

impl<'a> Matcher<'a> {
    /// All atoms whose names are fully bound must hold; unbound atoms
    /// are deferred.
    fn bound_atoms_hold(&self) -> bool {
        self.statement.clause.iter().all(|atom| {
            if atom.names().all(|n| self.intervals.contains_key(n)) {
                atom_eval(atom, &self.intervals).unwrap_or(false)
            } else {
                true
            }
        })
    }

    fn search(&mut self, depth: usize) -> bool {
        if depth == self.statement.quantified.len() {
            return self.bound_atoms_hold();
        }
        let q = &self.statement.quantified[depth];
        let Some(timeline) = self.plan.timeline(&q.variable) else {
            return false;
        };
        for (index, token) in timeline.closed_tokens().iter().enumerate() {
            if token.value != q.value {
                continue;
            }
            let pos = TokenPos { variable: q.variable.clone(), index };
            if self.options.distinct_witnesses && self.bound.values().any(|p| *p == pos) {
                continue;
            }
            let start = timeline.start(index).unwrap();
            let end = timeline.end(index).unwrap();
            self.bound.insert(q.name.clone(), pos);
            self.intervals.insert(q.name.clone(), (start, end));
            if self.bound_atoms_hold() && self.search(depth + 1) {
                return true;
            }
            self.bound.remove(&q.name);
            self.intervals.remove(&q.name);
        }
        false
    }
}

/// Searches for a witness of `statement` in `plan`, with the rule
/// trigger (if any) already bound to a concrete token. The search is
/// exhaustive: candidates are tried by variable then start time, and
/// every atom is checked as soon as both of its endpoints are bound.
pub fn match_statement(
    statement: &ExistentialStatement,
    plan: &ScheduledPlan,
    trigger_binding: Option<(&TokenName, &TokenPos)>,
    options: MatchOptions,
) -> Option<Witness> {
    let mut matcher = Matcher {
        plan,
        statement,
        options,
        bound: BTreeMap::new(),
        intervals: BTreeMap::new(),
    };
    if let Some((name, pos)) = trigger_binding {
        let timeline = plan.timeline(&pos.variable)?;
        let start = timeline.start(pos.index)?;
        let end = timeline.end(pos.index)?;
        matcher.bound.insert(name.clone(), pos.clone());
        matcher.intervals.insert(name.clone(), (start, end));
    }
    if !matcher.bound_atoms_hold() {
        return None;
    }
    if matcher.search(0) {
        Some(matcher.bound)
    } else {
        None
    }
}

/// Decides whether `rule` is satisfied by `plan`: a triggered rule
/// needs a witnessed disjunct for every token matching the trigger; a
/// triggerless rule needs one witnessed disjunct for the whole plan.
pub fn rule_satisfied(rule: &SynchronizationRule, plan: &ScheduledPlan, options: MatchOptions) -> bool {
    match &rule.trigger {
        None => rule
            .body
            .iter()
            .any(|statement| match_statement(statement, plan, None, options).is_some()),
        Some(trigger) => {
            let Some(timeline) = plan.timeline(&trigger.variable) else {
                // No timeline for the trigger variable: vacuously true.
                return true;
            };
            timeline
                .closed_tokens()
                .iter()
                .enumerate()
                .filter(|(_, token)| token.value == trigger.value)
                .all(|(index, _)| {
                    let pos = TokenPos { variable: trigger.variable.clone(), index };
                    rule.body.iter().any(|statement| {
                        match_statement(statement, plan, Some((&trigger.name, &pos)), options)
                            .is_some()
                    })
                })
        }
    }
}

/// Why a scheduled plan fails to be a solution plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolutionViolation {
    /// A token value does not belong to its variable's domain.
    UnknownValue { variable: VarName, index: usize, value: ValueName },
    /// Two adjacent tokens violate the transition function.
    BadTransition {
        variable: VarName,
        index: usize,
        from: ValueName,
        to: ValueName,
    },
    /// A token duration falls outside the declared bounds.
    BadDuration {
        variable: VarName,
        index: usize,
        value: ValueName,
        duration: u64,
    },
    /// A rule has an unwitnessed trigger token (or, for triggerless
    /// rules, no witness at all).
    RuleUnsatisfied { rule: String },
}

impl fmt::Display for SolutionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolutionViolation::UnknownValue { variable, index, value } => {
                write!(f, "token {index} of `{variable}` holds unknown value `{value}`")
            }
            SolutionViolation::BadTransition { variable, index, from, to } => write!(
                f,
                "transition `{from}` -> `{to}` at token {index} of `{variable}` is not allowed"
            ),
            SolutionViolation::BadDuration { variable, index, value, duration } => write!(
                f,
                "token {index} of `{variable}` (value `{value}`) has duration {duration} outside its bounds"
            ),
            SolutionViolation::RuleUnsatisfied { rule } => {
                write!(f, "rule `{rule}` is not satisfied")
            }
        }
    }
}

/// Lists every way `plan` fails to be a solution of `problem`:
/// transition violations, duration violations, and unsatisfied rules.
pub fn solution_violations(
    problem: &Problem,
    plan: &ScheduledPlan,
    options: MatchOptions,
) -> Result<Vec<SolutionViolation>, RulesError> {
    let plan_vars: Vec<VarName> = plan.timelines.keys().cloned().collect();
    let problem_vars: Vec<VarName> = problem.variables.keys().cloned().collect();
    if plan_vars != problem_vars {
        return Err(RulesError::VariableMismatch { plan_vars, problem_vars });
    }
    let mut violations = Vec::new();
    for (name, timeline) in &plan.timelines {
        let variable = &problem.variables[name];
        let tokens = timeline.closed_tokens();
        for (index, token) in tokens.iter().enumerate() {
            if !variable.values.contains(&token.value) {
                violations.push(SolutionViolation::UnknownValue {
                    variable: name.clone(),
                    index,
                    value: token.value.clone(),
                });
                continue;
            }
            let (lo, hi) = variable.duration_bounds(&token.value);
            if token.duration < lo || !hi.admits(token.duration) {
                violations.push(SolutionViolation::BadDuration {
                    variable: name.clone(),
                    index,
                    value: token.value.clone(),
                    duration: token.duration,
                });
            }
            if index > 0 {
                let prev = &tokens[index - 1].value;
                if !variable.allows_transition(prev, &token.value) {
                    violations.push(SolutionViolation::BadTransition {
                        variable: name.clone(),
                        index,
                        from: prev.clone(),
                        to: token.value.clone(),
                    });
                }
            }
        }
    }
    for rule in &problem.rules {
        if !rule_satisfied(rule, plan, options) {
            violations.push(SolutionViolation::RuleUnsatisfied { rule: rule.name.clone() });
        }
    }
    Ok(violations)
}

/// True iff transitions, duration bounds and all rules hold.
pub fn is_solution_plan(problem: &Problem, plan: &ScheduledPlan) -> Result<bool, RulesError> {
    Ok(solution_violations(problem, plan, MatchOptions::default())?.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Timeline;

    fn intervals(pairs: &[(&str, (u64, u64))]) -> BTreeMap<TokenName, (u64, u64)> {
        pairs
            .iter()
            .map(|(n, iv)| (TokenName::new(*n), *iv))
            .collect()
    }

    #[test]
    fn meets_holds_when_boundaries_touch() {
        let atom = meets("a", "b");
        let assignment = intervals(&[("a", (0, 5)), ("b", (5, 7))]);
        assert_eq!(atom_eval(&atom, &assignment), Ok(true));
        let apart = intervals(&[("a", (0, 5)), ("b", (6, 7))]);
        assert_eq!(atom_eval(&atom, &apart), Ok(false));
    }

    #[test]
    fn duration_sugar_checks_token_length() {
        let atom = duration_eq("a", 4);
        assert_eq!(atom_eval(&atom, &intervals(&[("a", (0, 4))])), Ok(true));
        assert_eq!(atom_eval(&atom, &intervals(&[("a", (0, 5))])), Ok(false));
    }

    #[test]
    fn pointwise_start_at_zero() {
        let atom = starts_at("a", 0);
        assert_eq!(atom_eval(&atom, &intervals(&[("a", (3, 5))])), Ok(false));
        assert_eq!(atom_eval(&atom, &intervals(&[("a", (0, 5))])), Ok(true));
    }

    #[test]
    fn unassigned_names_are_errors() {
        let atom = meets("a", "b");
        assert!(matches!(
            atom_eval(&atom, &intervals(&[("a", (0, 5))])),
            Err(RulesError::UnassignedName(_))
        ));
    }

    #[test]
    fn negative_distance_fails_zero_lower_bound() {
        // b before a: distance start(b) - end(a) is negative.
        let atom = meets("a", "b");
        let assignment = intervals(&[("a", (5, 8)), ("b", (0, 5))]);
        assert_eq!(atom_eval(&atom, &assignment), Ok(false));
    }

    fn plan(tokens: Vec<(&str, Vec<(&str, u64)>)>) -> ScheduledPlan {
        ScheduledPlan {
            timelines: tokens
                .into_iter()
                .map(|(var, toks)| {
                    (
                        var.to_owned(),
                        Timeline::from_tokens(var, toks.into_iter().map(|(v, d)| (v, d))),
                    )
                })
                .collect(),
        }
    }

    /// First disjunct of the three-value example rule: the trigger
    /// must meet a `v2` token and last at most 5.
    fn short_branch() -> ExistentialStatement {
        ExistentialStatement {
            quantified: vec![Quantifier::new("b", "x", "v2")],
            clause: vec![meets("a", "b"), duration_in("a", 0, Upper::Finite(5))],
        }
    }

    #[test]
    fn match_finds_witness_for_short_trigger() {
        let plan = plan(vec![("x", vec![("v1", 4), ("v2", 1)])]);
        let trigger = TokenPos { variable: "x".into(), index: 0 };
        let witness = match_statement(
            &short_branch(),
            &plan,
            Some((&TokenName::new("a"), &trigger)),
            MatchOptions::default(),
        );
        let witness = witness.expect("witness");
        assert_eq!(witness[&TokenName::new("b")], TokenPos { variable: "x".into(), index: 1 });
    }

    #[test]
    fn match_fails_when_duration_atom_fails() {
        let plan = plan(vec![("x", vec![("v1", 7), ("v2", 1)])]);
        let trigger = TokenPos { variable: "x".into(), index: 0 };
        assert!(match_statement(
            &short_branch(),
            &plan,
            Some((&TokenName::new("a"), &trigger)),
            MatchOptions::default(),
        )
        .is_none());
    }

    #[test]
    fn empty_clause_matches_any_token_of_right_value() {
        let statement = ExistentialStatement {
            quantified: vec![Quantifier::new("t", "x", "v")],
            clause: vec![],
        };
        let plan = plan(vec![("x", vec![("w", 1), ("v", 2)])]);
        let witness =
            match_statement(&statement, &plan, None, MatchOptions::default()).expect("witness");
        assert_eq!(witness[&TokenName::new("t")].index, 1);
    }

    fn cooldown_rule() -> SynchronizationRule {
        SynchronizationRule {
            name: "cooldown".into(),
            trigger: Some(Quantifier::new("a", "cam", "on")),
            body: vec![ExistentialStatement {
                quantified: vec![Quantifier::new("b", "cam", "off")],
                clause: vec![meets("a", "b"), duration_in("b", 4, Upper::Infinite)],
            }],
        }
    }

    #[test]
    fn cooldown_rule_satisfied_with_long_gaps() {
        let plan = plan(vec![("cam", vec![("off", 2), ("on", 2), ("off", 5), ("on", 3), ("off", 4)])]);
        assert!(rule_satisfied(&cooldown_rule(), &plan, MatchOptions::default()));
    }

    #[test]
    fn cooldown_rule_fails_with_short_gap() {
        let plan = plan(vec![("cam", vec![("off", 2), ("on", 2), ("off", 3), ("on", 3), ("off", 4)])]);
        assert!(!rule_satisfied(&cooldown_rule(), &plan, MatchOptions::default()));
    }

    #[test]
    fn triggered_rule_is_vacuous_without_matching_tokens() {
        let plan = plan(vec![("cam", vec![("off", 3)])]);
        assert!(rule_satisfied(&cooldown_rule(), &plan, MatchOptions::default()));
    }

    #[test]
    fn distinct_witnesses_flag_forbids_shared_bindings() {
        let statement = ExistentialStatement {
            quantified: vec![Quantifier::new("p", "x", "v"), Quantifier::new("q", "x", "v")],
            clause: vec![],
        };
        let single = plan(vec![("x", vec![("v", 1)])]);
        assert!(match_statement(&statement, &single, None, MatchOptions::default()).is_some());
        assert!(match_statement(
            &statement,
            &single,
            None,
            MatchOptions { distinct_witnesses: true }
        )
        .is_none());
    }
}

//! Flexible timelines and plans, planning problems with uncertainty,
//! flexible-solution checking, the encoding of a problem into a game,
//! and a bounded refutation search for flexible solutions.
//!
//! A flexible token carries an end-time window and a duration window;
//! a flexible plan is an envelope of scheduled instances. A flexible
//! solution must agree with the observation, leave uncontrollable
//! durations unrestricted, and have only solution instances.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::game::Game;
use crate::model::{
    Controllability, ScheduledPlan, StateVariable, Timeline, Upper, ValueName, VarName,
};
use crate::rules::{
    self, duration_in, meets, Atom, Bounds, EndpointRef, ExistentialStatement, Problem,
    Quantifier, SynchronizationRule, TokenName,
};

/// A token whose end time and duration are windows rather than fixed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlexibleToken {
    /// Name referenced by plan constraints.
    pub name: TokenName,
    pub variable: VarName,
    pub value: ValueName,
    /// Window `[e, e']` of possible end times.
    pub end_window: (u64, u64),
    /// Window `[d, d']` of possible durations.
    pub duration_window: (u64, u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlexibleTimeline {
    pub variable: VarName,
    pub tokens: Vec<FlexibleToken>,
}

impl FlexibleTimeline {
    /// Checks the window consistency clauses: the first end window
    /// equals the first duration window, and each later end window is
    /// contained in its predecessor's window shifted by the duration
    /// window.
    pub fn validate(&self) -> Result<(), FlexibleError> {
        for (i, token) in self.tokens.iter().enumerate() {
            let (e, e1) = token.end_window;
            let (d, d1) = token.duration_window;
            if e > e1 || d > d1 || d == 0 {
                return Err(FlexibleError::BadWindow {
                    variable: self.variable.clone(),
                    index: i,
                });
            }
            if i == 0 {
                if (e, e1) != (d, d1) {
                    return Err(FlexibleError::FirstTokenWindowMismatch {
                        variable: self.variable.clone(),
                    });
                }
            } else {
                let (pe, pe1) = self.tokens[i - 1].end_window;
                if e < pe + d || e1 > pe1 + d1 {
                    return Err(FlexibleError::WindowNotNested {
                        variable: self.variable.clone(),
                        index: i,
                    });
                }
            }
        }
        Ok(())
    }
}

/// A flexible plan: one flexible timeline per variable plus a set of
/// atoms over the named tokens.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FlexiblePlan {
    pub timelines: BTreeMap<VarName, FlexibleTimeline>,
    pub constraints: Vec<Atom>,
}

impl FlexiblePlan {
    pub fn new(timelines: Vec<FlexibleTimeline>, constraints: Vec<Atom>) -> Self {
        FlexiblePlan {
            timelines: timelines.into_iter().map(|t| (t.variable.clone(), t)).collect(),
            constraints,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.timelines.is_empty()
    }

    fn token_names(&self) -> BTreeMap<TokenName, (VarName, usize)> {
        let mut names = BTreeMap::new();
        for timeline in self.timelines.values() {
            for (i, token) in timeline.tokens.iter().enumerate() {
                names.insert(token.name.clone(), (timeline.variable.clone(), i));
            }
        }
        names
    }

    pub fn validate(&self) -> Result<(), FlexibleError> {
        let mut seen = BTreeMap::new();
        for timeline in self.timelines.values() {
            timeline.validate()?;
            for token in &timeline.tokens {
                if seen.insert(token.name.clone(), ()).is_some() {
                    return Err(FlexibleError::DuplicateTokenName { name: token.name.clone() });
                }
            }
        }
        let names = self.token_names();
        for atom in &self.constraints {
            for name in atom.names() {
                if !names.contains_key(name) {
                    return Err(FlexibleError::UnknownTokenName { name: name.clone() });
                }
            }
        }
        Ok(())
    }
}

/// A planning problem with uncertainty: controlled and external
/// variables, rules, and an observation describing the external
/// behaviour as a flexible plan.
#[derive(Debug, Clone)]
pub struct ProblemWithUncertainty {
    pub controlled: Vec<StateVariable>,
    pub external: Vec<StateVariable>,
    pub rules: Vec<SynchronizationRule>,
    pub observation: FlexiblePlan,
}

impl ProblemWithUncertainty {
    pub fn validate(&self) -> Result<(), FlexibleError> {
        self.observation.validate()?;
        for variable in self.observation.timelines.keys() {
            if !self.external.iter().any(|v| &v.name == variable) {
                return Err(FlexibleError::ObservationNotExternal {
                    variable: variable.clone(),
                });
            }
        }
        let problem = self.as_problem();
        problem
            .validate()
            .map_err(|source| FlexibleError::IllTyped { message: source.to_string() })?;
        Ok(())
    }

    /// The underlying plain problem `(SV_C ∪ SV_E, S)`.
    pub fn as_problem(&self) -> Problem {
        let mut variables = self.controlled.clone();
        variables.extend(self.external.iter().cloned());
        Problem::new(variables, self.rules.clone())
    }

    pub fn variable(&self, name: &str) -> Option<&StateVariable> {
        self.controlled
            .iter()
            .chain(self.external.iter())
            .find(|v| v.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FlexibleError {
    #[error("token {index} of flexible timeline `{variable}` has an invalid window")]
    BadWindow { variable: VarName, index: usize },
    #[error("first token of `{variable}` must have equal end and duration windows")]
    FirstTokenWindowMismatch { variable: VarName },
    #[error("end window of token {index} of `{variable}` is not nested in its predecessor's")]
    WindowNotNested { variable: VarName, index: usize },
    #[error("duplicate flexible token name `{name}`")]
    DuplicateTokenName { name: TokenName },
    #[error("constraint references unknown token `{name}`")]
    UnknownTokenName { name: TokenName },
    #[error("observation mentions non-external variable `{variable}`")]
    ObservationNotExternal { variable: VarName },
    #[error("ill-typed problem: {message}")]
    IllTyped { message: String },
    #[error("timelines differ in variable: flexible `{flexible}`, scheduled `{scheduled}`")]
    VariableMismatch { flexible: VarName, scheduled: VarName },
    #[error("timelines differ in length: flexible has {flexible}, scheduled has {scheduled}")]
    LengthMismatch { flexible: usize, scheduled: usize },
    #[error("instance space of ~{estimate} exceeds the budget of {budget}")]
    BudgetExceeded { estimate: u128, budget: u64 },
}

/// Is the scheduled timeline an instance of the flexible one? Same
/// variable and length are preconditions, reported distinctly.
pub fn is_instance(flexible: &FlexibleTimeline, scheduled: &Timeline) -> Result<bool, FlexibleError> {
    if flexible.variable != scheduled.variable() {
        return Err(FlexibleError::VariableMismatch {
            flexible: flexible.variable.clone(),
            scheduled: scheduled.variable().to_owned(),
        });
    }
    if flexible.tokens.len() != scheduled.closed_tokens().len() {
        return Err(FlexibleError::LengthMismatch {
            flexible: flexible.tokens.len(),
            scheduled: scheduled.closed_tokens().len(),
        });
    }
    for (i, (ft, st)) in flexible
        .tokens
        .iter()
        .zip(scheduled.closed_tokens())
        .enumerate()
    {
        if ft.value != st.value {
            return Ok(false);
        }
        let (d, d1) = ft.duration_window;
        if st.duration < d || st.duration > d1 {
            return Ok(false);
        }
        let end = scheduled.end(i).unwrap();
        let (e, e1) = ft.end_window;
        if end < e || end > e1 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Enumerates the duration vectors of one flexible timeline whose
/// prefix sums respect every end window.
fn timeline_instances(timeline: &FlexibleTimeline) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut stack: Vec<u64> = Vec::new();
    fn recurse(tokens: &[FlexibleToken], end: u64, stack: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        let Some(token) = tokens.first() else {
            out.push(stack.clone());
            return;
        };
        let (d, d1) = token.duration_window;
        let (e, e1) = token.end_window;
        for duration in d..=d1 {
            let new_end = end + duration;
            if new_end < e || new_end > e1 {
                continue;
            }
            stack.push(duration);
            recurse(&tokens[1..], new_end, stack, out);
            stack.pop();
        }
    }
    recurse(&timeline.tokens, 0, &mut stack, &mut out);
    out
}

fn product_estimate(plan: &FlexiblePlan) -> u128 {
    let mut estimate: u128 = 1;
    for timeline in plan.timelines.values() {
        for token in &timeline.tokens {
            let (d, d1) = token.duration_window;
            estimate = estimate.saturating_mul((d1 - d + 1) as u128);
            if estimate > u64::MAX as u128 {
                return estimate;
            }
        }
    }
    estimate
}

fn build_plan(plan: &FlexiblePlan, durations: &BTreeMap<VarName, &Vec<u64>>) -> ScheduledPlan {
    let timelines = plan
        .timelines
        .values()
        .map(|ft| {
            let ds = durations[&ft.variable];
            let timeline = Timeline::from_tokens(
                ft.variable.clone(),
                ft.tokens.iter().zip(ds.iter()).map(|(t, d)| (t.value.clone(), *d)),
            );
            (ft.variable.clone(), timeline)
        })
        .collect();
    ScheduledPlan { timelines }
}

fn satisfies_constraints(plan: &FlexiblePlan, scheduled: &ScheduledPlan) -> bool {
    if plan.constraints.is_empty() {
        return true;
    }
    let mut assignment = BTreeMap::new();
    for timeline in plan.timelines.values() {
        let sched = scheduled.timeline(&timeline.variable).expect("same variables");
        for (i, token) in timeline.tokens.iter().enumerate() {
            let start = sched.start(i).unwrap();
            let end = sched.end(i).unwrap();
            assignment.insert(token.name.clone(), (start, end));
        }
    }
    plan.constraints
        .iter()
        .all(|atom| rules::atom_eval(atom, &assignment).unwrap_or(false))
}

/// Enumerates every instance of the flexible plan: all duration
/// choices whose prefix sums respect the end windows and which satisfy
/// every constraint atom. Refuses when the duration product space
/// exceeds `budget`.
pub fn enumerate_instances(
    plan: &FlexiblePlan,
    budget: u64,
) -> Result<Vec<ScheduledPlan>, FlexibleError> {
    let estimate = product_estimate(plan);
    if estimate > budget as u128 {
        return Err(FlexibleError::BudgetExceeded { estimate, budget });
    }
    let per_timeline: Vec<(&VarName, Vec<Vec<u64>>)> = plan
        .timelines
        .iter()
        .map(|(name, t)| (name, timeline_instances(t)))
        .collect();
    let mut out = Vec::new();
    let mut choice: Vec<usize> = vec![0; per_timeline.len()];
    'outer: loop {
        if per_timeline.iter().zip(&choice).all(|((_, opts), i)| *i < opts.len())
            || per_timeline.is_empty()
        {
            let durations: BTreeMap<VarName, &Vec<u64>> = per_timeline
                .iter()
                .zip(&choice)
                .map(|((name, opts), i)| ((*name).clone(), &opts[*i]))
                .collect();
            let scheduled = build_plan(plan, &durations);
            if satisfies_constraints(plan, &scheduled) {
                out.push(scheduled);
            }
        }
        if per_timeline.is_empty() {
            break;
        }
        // Advance the mixed-radix counter.
        for i in 0..choice.len() {
            choice[i] += 1;
            if choice[i] < per_timeline[i].1.len() {
                continue 'outer;
            }
            if i == choice.len() - 1 {
                break 'outer;
            }
            choice[i] = 0;
        }
    }
    Ok(out)
}

/// Verdict of the flexible-solution check, with evidence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum FlexVerdict {
    Solution,
    /// Budget forced sampling; no counterexample was found.
    LikelySolution { sampled: usize },
    /// Condition 1: the candidate does not contain the observation.
    DisagreesWithObservation { detail: String },
    /// Condition 2: an uncontrollable duration is restricted, by its
    /// window or through end windows and constraints.
    RestrictsUncontrollable { detail: String },
    /// Condition 3: some instance is not a solution plan.
    NonSolutionInstance {
        counterexample: ScheduledPlan,
        violations: Vec<String>,
    },
    /// Condition 3: no instance exists at all.
    NoInstance,
    Unknown { reason: String },
}

/// Checks the flexible-solution conditions in order: (1) the candidate
/// agrees with the observation, (2) uncontrollable durations are
/// unrestricted — their windows equal the declared bounds and no
/// combination of uncontrollable durations is cut off by end windows
/// or constraint atoms — and (3) every instance is a solution and at
/// least one exists.
pub fn is_flexible_solution(
    problem: &ProblemWithUncertainty,
    candidate: &FlexiblePlan,
    budget: u64,
) -> FlexVerdict {
    if let Err(e) = candidate.validate() {
        return FlexVerdict::Unknown { reason: format!("invalid candidate: {e}") };
    }

    // Condition 1: observation timelines and atoms appear verbatim.
    for (name, observed) in &problem.observation.timelines {
        match candidate.timelines.get(name) {
            Some(t) if t == observed => {}
            Some(_) => {
                return FlexVerdict::DisagreesWithObservation {
                    detail: format!("timeline `{name}` differs from the observation"),
                }
            }
            None => {
                return FlexVerdict::DisagreesWithObservation {
                    detail: format!("observation timeline `{name}` is missing"),
                }
            }
        }
    }
    for atom in &problem.observation.constraints {
        if !candidate.constraints.contains(atom) {
            return FlexVerdict::DisagreesWithObservation {
                detail: "an observation constraint is missing".into(),
            };
        }
    }

    // Condition 2, literal part: windows of uncontrollable tokens are
    // exactly the declared duration bounds.
    for timeline in candidate.timelines.values() {
        let Some(variable) = problem.variable(&timeline.variable) else {
            return FlexVerdict::Unknown {
                reason: format!("candidate mentions undeclared variable `{}`", timeline.variable),
            };
        };
        for (i, token) in timeline.tokens.iter().enumerate() {
            if variable.tag(&token.value) != Controllability::Uncontrollable {
                continue;
            }
            let (lo, hi) = variable.duration_bounds(&token.value);
            let expected = match hi {
                Upper::Finite(h) => (lo, h),
                Upper::Infinite => {
                    return FlexVerdict::RestrictsUncontrollable {
                        detail: format!(
                            "token {i} of `{}` has unbounded duration; no finite window can leave it unrestricted",
                            timeline.variable
                        ),
                    }
                }
            };
            if token.duration_window != expected {
                return FlexVerdict::RestrictsUncontrollable {
                    detail: format!(
                        "token {i} of `{}` has duration window [{}, {}], bounds are [{}, {}]",
                        timeline.variable,
                        token.duration_window.0,
                        token.duration_window.1,
                        expected.0,
                        expected.1
                    ),
                };
            }
        }
    }

    // Enumerate instances (or sample above budget).
    let instances = match enumerate_instances(candidate, budget) {
        Ok(instances) => instances,
        Err(FlexibleError::BudgetExceeded { .. }) => {
            return sampled_check(problem, candidate, budget);
        }
        Err(e) => return FlexVerdict::Unknown { reason: e.to_string() },
    };
    if instances.is_empty() {
        return FlexVerdict::NoInstance;
    }

    // Condition 2, closure part: within each fixed choice of
    // controllable durations, the uncontrollable durations must range
    // over their full boxes.
    let mut uncontrollable_box: u128 = 1;
    let mut is_uncontrollable: BTreeMap<VarName, Vec<bool>> = BTreeMap::new();
    for timeline in candidate.timelines.values() {
        let variable = problem.variable(&timeline.variable).expect("checked above");
        let flags: Vec<bool> = timeline
            .tokens
            .iter()
            .map(|t| variable.tag(&t.value) == Controllability::Uncontrollable)
            .collect();
        for (token, unc) in timeline.tokens.iter().zip(&flags) {
            if *unc {
                let (d, d1) = token.duration_window;
                uncontrollable_box = uncontrollable_box.saturating_mul((d1 - d + 1) as u128);
            }
        }
        is_uncontrollable.insert(timeline.variable.clone(), flags);
    }
    let mut groups: BTreeMap<Vec<u64>, u128> = BTreeMap::new();
    for instance in &instances {
        let mut controllable_profile = Vec::new();
        for (name, flags) in &is_uncontrollable {
            let timeline = instance.timeline(name).expect("same variables");
            for (token, unc) in timeline.closed_tokens().iter().zip(flags) {
                if !unc {
                    controllable_profile.push(token.duration);
                }
            }
        }
        *groups.entry(controllable_profile).or_insert(0) += 1;
    }
    for (profile, count) in &groups {
        if *count < uncontrollable_box {
            return FlexVerdict::RestrictsUncontrollable {
                detail: format!(
                    "controllable profile {profile:?} admits {count} of {uncontrollable_box} uncontrollable duration combinations"
                ),
            };
        }
    }

    // Condition 3: every instance solves (SV, S).
    let plain = problem.as_problem();
    for instance in &instances {
        match rules::solution_violations(&plain, instance, rules::MatchOptions::default()) {
            Ok(violations) if violations.is_empty() => {}
            Ok(violations) => {
                return FlexVerdict::NonSolutionInstance {
                    counterexample: instance.clone(),
                    violations: violations.iter().map(|v| v.to_string()).collect(),
                }
            }
            Err(e) => return FlexVerdict::Unknown { reason: e.to_string() },
        }
    }
    FlexVerdict::Solution
}

/// Above-budget fallback: sample random instances; a found
/// counterexample is definite, absence only "likely".
fn sampled_check(
    problem: &ProblemWithUncertainty,
    candidate: &FlexiblePlan,
    budget: u64,
) -> FlexVerdict {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let plain = problem.as_problem();
    let samples = (budget.min(10_000)) as usize;
    let mut checked = 0;
    for _ in 0..samples {
        let mut durations: BTreeMap<VarName, Vec<u64>> = BTreeMap::new();
        let mut feasible = true;
        for timeline in candidate.timelines.values() {
            let mut end = 0u64;
            let mut ds = Vec::new();
            for token in &timeline.tokens {
                let (d, d1) = token.duration_window;
                let pick = rng.gen_range(d..=d1);
                end += pick;
                let (e, e1) = token.end_window;
                if end < e || end > e1 {
                    feasible = false;
                    break;
                }
                ds.push(pick);
            }
            if !feasible {
                break;
            }
            durations.insert(timeline.variable.clone(), ds);
        }
        if !feasible {
            continue;
        }
        let refs: BTreeMap<VarName, &Vec<u64>> =
            durations.iter().map(|(k, v)| (k.clone(), v)).collect();
        let scheduled = build_plan(candidate, &refs);
        if !satisfies_constraints(candidate, &scheduled) {
            continue;
        }
        checked += 1;
        match rules::solution_violations(&plain, &scheduled, rules::MatchOptions::default()) {
            Ok(violations) if violations.is_empty() => {}
            Ok(violations) => {
                return FlexVerdict::NonSolutionInstance {
                    counterexample: scheduled,
                    violations: violations.iter().map(|v| v.to_string()).collect(),
                }
            }
            Err(e) => return FlexVerdict::Unknown { reason: e.to_string() },
        }
    }
    if checked == 0 {
        FlexVerdict::Unknown { reason: "no feasible instance sampled within budget".into() }
    } else {
        FlexVerdict::LikelySolution { sampled: checked }
    }
}

/// Encodes a problem with uncertainty as a game: the rules become
/// system rules and the observation becomes one triggerless domain
/// rule asserting the existence of the observed tokens, chained by
/// meets atoms, anchored at time 0, with every end time pinned into
/// its window and every duration into its window; observation
/// constraints carry over verbatim.
pub fn associate_game(problem: &ProblemWithUncertainty) -> Result<Game, crate::game::GameError> {
    let mut domain_rules = Vec::new();
    if !problem.observation.is_empty() {
        let mut quantified = Vec::new();
        let mut clause = Vec::new();
        for timeline in problem.observation.timelines.values() {
            for (i, token) in timeline.tokens.iter().enumerate() {
                quantified.push(Quantifier::new(
                    token.name.clone(),
                    timeline.variable.clone(),
                    token.value.clone(),
                ));
                if i == 0 {
                    // The first observed token starts the timeline.
                    clause.push(rules::starts_at(token.name.clone(), 0));
                } else {
                    clause.push(meets(timeline.tokens[i - 1].name.clone(), token.name.clone()));
                }
                let (e, e1) = token.end_window;
                clause.push(Atom::pointwise(
                    EndpointRef::end(token.name.clone()),
                    e1,
                    Bounds::new(0, Upper::Finite(e1 - e)),
                ));
                let (d, d1) = token.duration_window;
                clause.push(duration_in(token.name.clone(), d, Upper::Finite(d1)));
            }
        }
        clause.extend(problem.observation.constraints.iter().cloned());
        domain_rules.push(SynchronizationRule {
            name: "observation".into(),
            trigger: None,
            body: vec![ExistentialStatement { quantified, clause }],
        });
    }
    Game::new(
        problem.controlled.clone(),
        problem.external.clone(),
        problem.rules.clone(),
        domain_rules,
    )
}

/// Outcome of the bounded refutation search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum RefuteVerdict {
    /// No flexible solution plan with at most `max_tokens` tokens per
    /// controlled timeline exists.
    NoneExistsUpToBound {
        max_tokens: usize,
        candidates_checked: u64,
        /// Unbounded duration bounds were capped during the search.
        capped_windows: bool,
    },
    /// A flexible solution was found; it is returned as evidence.
    Found {
        max_tokens: usize,
        candidate: FlexiblePlan,
    },
    Unknown { reason: String },
}

#[derive(Debug, Clone, Copy)]
pub struct RefuteOptions {
    /// Cap applied to unbounded duration windows (defaults to the
    /// game window when `None`).
    pub duration_cap: Option<u64>,
    /// Instance-space budget per candidate.
    pub instance_budget: u64,
    /// Total candidate budget.
    pub candidate_budget: u64,
}

impl Default for RefuteOptions {
    fn default() -> Self {
        RefuteOptions {
            duration_cap: None,
            instance_budget: 1_000_000,
            candidate_budget: 10_000_000,
        }
    }
}

/// Exhaustively searches for a flexible solution plan with at most
/// `max_tokens` tokens per controlled timeline.
///
/// The search space is reduced without losing completeness with
/// respect to [`is_flexible_solution`]: uncontrollable duration
/// windows are forced to the declared bounds, controllable windows may
/// be taken as singletons (narrowing a controllable window only
/// shrinks the instance set), and end windows may be taken maximal
/// (narrowing them can only cut uncontrollable combinations, which
/// condition 2 forbids).
pub fn refute_flexible_solutions(
    problem: &ProblemWithUncertainty,
    max_tokens: usize,
    options: RefuteOptions,
) -> RefuteVerdict {
    if let Err(e) = problem.validate() {
        return RefuteVerdict::Unknown { reason: e.to_string() };
    }
    let cap = options.duration_cap.unwrap_or_else(|| {
        match associate_game(problem) {
            Ok(game) => crate::solver::window(&game),
            Err(_) => 64,
        }
        .min(1 << 20)
    });
    let mut capped = false;
    let mut checked: u64 = 0;

    // Per-variable duration choice ranges (uncontrollable values keep
    // their full boxes, controllable values are enumerated as
    // singletons).
    let controlled: Vec<&StateVariable> = problem.controlled.iter().collect();

    // Depth-first over controlled variables; each variable gets a
    // value sequence (length 0..=max_tokens) and singleton durations
    // for controllable tokens.
    let mut chosen: Vec<FlexibleTimeline> = Vec::new();
    let verdict = search_variable(
        problem,
        &controlled,
        0,
        max_tokens,
        cap,
        &mut capped,
        &mut checked,
        &mut chosen,
        &options,
    );
    match verdict {
        Some(SearchOutcome::Found(candidate)) => RefuteVerdict::Found { max_tokens, candidate },
        Some(SearchOutcome::Budget) => RefuteVerdict::Unknown {
            reason: format!("candidate budget of {} exhausted", options.candidate_budget),
        },
        None => RefuteVerdict::NoneExistsUpToBound {
            max_tokens,
            candidates_checked: checked,
            capped_windows: capped,
        },
    }
}

enum SearchOutcome {
    Found(FlexiblePlan),
    Budget,
}

#[allow(clippy::too_many_arguments)]
fn search_variable(
    problem: &ProblemWithUncertainty,
    controlled: &[&StateVariable],
    index: usize,
    max_tokens: usize,
    cap: u64,
    capped: &mut bool,
    checked: &mut u64,
    chosen: &mut Vec<FlexibleTimeline>,
    options: &RefuteOptions,
) -> Option<SearchOutcome> {
    if index == controlled.len() {
        *checked += 1;
        if *checked > options.candidate_budget {
            return Some(SearchOutcome::Budget);
        }
        let mut timelines: Vec<FlexibleTimeline> = problem
            .observation
            .timelines
            .values()
            .cloned()
            .collect();
        timelines.extend(chosen.iter().cloned());
        let candidate =
            FlexiblePlan::new(timelines, problem.observation.constraints.clone());
        return match is_flexible_solution(problem, &candidate, options.instance_budget) {
            FlexVerdict::Solution => Some(SearchOutcome::Found(candidate)),
            FlexVerdict::LikelySolution { .. } | FlexVerdict::Unknown { .. } => {
                Some(SearchOutcome::Budget)
            }
            _ => None,
        };
    }
    let variable = controlled[index];
    // Enumerate token count, then value sequences with singleton
    // controllable durations, building windows incrementally. Game
    // timelines are never empty (every round starts the closed ones),
    // so candidate timelines carry at least one token.
    for count in 1..=max_tokens {
        let mut tokens: Vec<FlexibleToken> = Vec::new();
        if let Some(outcome) = fill_tokens(
            problem, controlled, index, max_tokens, cap, capped, checked, chosen, options,
            variable, count, &mut tokens,
        ) {
            return Some(outcome);
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn fill_tokens(
    problem: &ProblemWithUncertainty,
    controlled: &[&StateVariable],
    index: usize,
    max_tokens: usize,
    cap: u64,
    capped: &mut bool,
    checked: &mut u64,
    chosen: &mut Vec<FlexibleTimeline>,
    options: &RefuteOptions,
    variable: &StateVariable,
    remaining: usize,
    tokens: &mut Vec<FlexibleToken>,
) -> Option<SearchOutcome> {
    if remaining == 0 {
        chosen.push(FlexibleTimeline {
            variable: variable.name.clone(),
            tokens: tokens.clone(),
        });
        let outcome = search_variable(
            problem,
            controlled,
            index + 1,
            max_tokens,
            cap,
            capped,
            checked,
            chosen,
            options,
        );
        chosen.pop();
        return outcome;
    }
    let position = tokens.len();
    let values: Vec<ValueName> = match tokens.last() {
        Some(prev) => variable
            .transitions
            .get(&prev.value)
            .cloned()
            .unwrap_or_default(),
        None => variable.values.clone(),
    };
    for value in values {
        let (lo, hi) = variable.duration_bounds(&value);
        let hi = match hi {
            Upper::Finite(h) => h,
            Upper::Infinite => {
                *capped = true;
                cap.max(lo)
            }
        };
        let prev_window = tokens
            .last()
            .map(|t| t.end_window)
            .unwrap_or((0, 0));
        let name = TokenName::new(format!("{}_{}", variable.name, position));
        match variable.tag(&value) {
            Controllability::Uncontrollable => {
                // Full duration box, maximal end window.
                let token = FlexibleToken {
                    name: name.clone(),
                    variable: variable.name.clone(),
                    value: value.clone(),
                    end_window: (prev_window.0 + lo, prev_window.1 + hi),
                    duration_window: (lo, hi),
                };
                tokens.push(token);
                if let Some(outcome) = fill_tokens(
                    problem, controlled, index, max_tokens, cap, capped, checked, chosen,
                    options, variable, remaining - 1, tokens,
                ) {
                    return Some(outcome);
                }
                tokens.pop();
            }
            Controllability::Controllable => {
                for duration in lo..=hi {
                    let token = FlexibleToken {
                        name: name.clone(),
                        variable: variable.name.clone(),
                        value: value.clone(),
                        end_window: (prev_window.0 + duration, prev_window.1 + duration),
                        duration_window: (duration, duration),
                    };
                    tokens.push(token);
                    if let Some(outcome) = fill_tokens(
                        problem, controlled, index, max_tokens, cap, capped, checked, chosen,
                        options, variable, remaining - 1, tokens,
                    ) {
                        return Some(outcome);
                    }
                    tokens.pop();
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn flex_token(
        name: &str,
        var: &str,
        value: &str,
        end: (u64, u64),
        dur: (u64, u64),
    ) -> FlexibleToken {
        FlexibleToken {
            name: TokenName::new(name),
            variable: var.into(),
            value: value.into(),
            end_window: end,
            duration_window: dur,
        }
    }

    #[test]
    fn instance_checks_values_durations_and_ends() {
        let flexible = FlexibleTimeline {
            variable: "x".into(),
            tokens: vec![flex_token("a", "x", "v", (2, 4), (2, 4))],
        };
        let good = Timeline::from_tokens("x", [("v", 3)]);
        assert_eq!(is_instance(&flexible, &good), Ok(true));
        let bad = Timeline::from_tokens("x", [("v", 5)]);
        assert_eq!(is_instance(&flexible, &bad), Ok(false));
    }

    #[test]
    fn instance_end_window_can_reject_later_tokens() {
        let flexible = FlexibleTimeline {
            variable: "x".into(),
            tokens: vec![
                flex_token("a", "x", "v", (2, 4), (2, 4)),
                flex_token("b", "x", "w", (5, 6), (1, 3)),
            ],
        };
        // Ends at 4 + 3 = 7, outside the second end window [5, 6].
        let schedule = Timeline::from_tokens("x", [("v", 4), ("w", 3)]);
        assert_eq!(is_instance(&flexible, &schedule), Ok(false));
    }

    #[test]
    fn instance_length_mismatch_is_an_error() {
        let flexible = FlexibleTimeline {
            variable: "x".into(),
            tokens: vec![flex_token("a", "x", "v", (1, 1), (1, 1))],
        };
        let schedule = Timeline::from_tokens("x", [("v", 1), ("v", 1)]);
        assert!(matches!(
            is_instance(&flexible, &schedule),
            Err(FlexibleError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn enumerate_single_token_window() {
        let plan = FlexiblePlan::new(
            vec![FlexibleTimeline {
                variable: "x".into(),
                tokens: vec![flex_token("a", "x", "v", (1, 2), (1, 2))],
            }],
            vec![],
        );
        let instances = enumerate_instances(&plan, 1000).unwrap();
        let durations: Vec<u64> = instances
            .iter()
            .map(|p| p.timeline("x").unwrap().closed_tokens()[0].duration)
            .collect();
        assert_eq!(durations, vec![1, 2]);
    }

    #[test]
    fn enumerate_empty_plan_yields_only_empty_plan() {
        let plan = FlexiblePlan::default();
        let instances = enumerate_instances(&plan, 10).unwrap();
        assert_eq!(instances.len(), 1);
        assert!(instances[0].timelines.is_empty());
    }

    #[test]
    fn constraints_filter_instances_as_brute_force_does() {
        // Two independent single-token timelines [1,3] with an atom
        // forcing equal ends.
        let plan = FlexiblePlan::new(
            vec![
                FlexibleTimeline {
                    variable: "x".into(),
                    tokens: vec![flex_token("a", "x", "v", (1, 3), (1, 3))],
                },
                FlexibleTimeline {
                    variable: "y".into(),
                    tokens: vec![flex_token("b", "y", "w", (1, 3), (1, 3))],
                },
            ],
            vec![Atom::binary(
                EndpointRef::end("a"),
                EndpointRef::end("b"),
                Bounds::exact(0),
            )],
        );
        let instances = enumerate_instances(&plan, 1000).unwrap();
        // Brute force over the product space.
        let mut expected = 0;
        for dx in 1..=3u64 {
            for dy in 1..=3u64 {
                if dx == dy {
                    expected += 1;
                }
            }
        }
        assert_eq!(instances.len(), expected);
    }

    #[test]
    fn budget_guard_refuses_huge_products() {
        let plan = FlexiblePlan::new(
            vec![FlexibleTimeline {
                variable: "x".into(),
                tokens: vec![flex_token("a", "x", "v", (1, 100), (1, 100))],
            }],
            vec![],
        );
        assert!(matches!(
            enumerate_instances(&plan, 10),
            Err(FlexibleError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn narrowing_uncontrollable_window_fails_condition_two() {
        let problem = fixtures::three_values_uncertainty();
        let candidate = FlexiblePlan::new(
            vec![FlexibleTimeline {
                variable: "x".into(),
                tokens: vec![flex_token("a", "x", "v1", (1, 5), (1, 5))],
            }],
            vec![],
        );
        assert!(matches!(
            is_flexible_solution(&problem, &candidate, 1_000_000),
            FlexVerdict::RestrictsUncontrollable { .. }
        ));
    }

    #[test]
    fn dropping_observation_timeline_fails_condition_one() {
        let problem = fixtures::gostop_uncertainty();
        let candidate = FlexiblePlan::new(vec![], vec![]);
        assert!(matches!(
            is_flexible_solution(&problem, &candidate, 1_000_000),
            FlexVerdict::DisagreesWithObservation { .. }
        ));
    }

    #[test]
    fn fixed_second_value_fails_condition_three_with_counterexample() {
        let problem = fixtures::three_values_uncertainty();
        // v1 with its full forced window, then v2 of duration 1, with
        // maximal end windows: the duration-7 instance breaks the rule.
        let candidate = FlexiblePlan::new(
            vec![FlexibleTimeline {
                variable: "x".into(),
                tokens: vec![
                    flex_token("a", "x", "v1", (1, 10), (1, 10)),
                    flex_token("b", "x", "v2", (2, 11), (1, 1)),
                ],
            }],
            vec![],
        );
        match is_flexible_solution(&problem, &candidate, 1_000_000) {
            FlexVerdict::NonSolutionInstance { counterexample, .. } => {
                let first = counterexample.timeline("x").unwrap().closed_tokens()[0].duration;
                assert!((6..=10).contains(&first), "counterexample duration {first}");
            }
            other => panic!("expected a condition-3 counterexample, got {other:?}"),
        }
    }

    #[test]
    fn end_window_cuts_on_uncontrollable_tokens_fail_condition_two() {
        let problem = fixtures::three_values_uncertainty();
        // Same candidate but with the second end window narrowed so
        // that only short v1 durations survive: a smuggled restriction.
        let candidate = FlexiblePlan::new(
            vec![FlexibleTimeline {
                variable: "x".into(),
                tokens: vec![
                    flex_token("a", "x", "v1", (1, 10), (1, 10)),
                    flex_token("b", "x", "v2", (2, 6), (1, 1)),
                ],
            }],
            vec![],
        );
        assert!(matches!(
            is_flexible_solution(&problem, &candidate, 1_000_000),
            FlexVerdict::RestrictsUncontrollable { .. }
        ));
    }

    #[test]
    fn refute_three_values_up_to_three_tokens() {
        let problem = fixtures::three_values_uncertainty();
        let verdict = refute_flexible_solutions(&problem, 3, RefuteOptions::default());
        match verdict {
            RefuteVerdict::NoneExistsUpToBound { max_tokens: 3, .. } => {}
            other => panic!("expected refutation, got {other:?}"),
        }
    }

    #[test]
    fn trivial_problem_has_one_token_flexible_solution() {
        use crate::model::{StateVariable, Upper};
        use std::collections::BTreeMap;
        let variable = StateVariable {
            name: "x".into(),
            values: vec!["v".into()],
            transitions: BTreeMap::from([("v".into(), vec!["v".into()])]),
            durations: BTreeMap::from([("v".into(), (1, Upper::Finite(3)))]),
            controllability: BTreeMap::from([(
                "v".into(),
                crate::model::Controllability::Controllable,
            )]),
        };
        let problem = ProblemWithUncertainty {
            controlled: vec![variable],
            external: vec![],
            rules: vec![],
            observation: FlexiblePlan::default(),
        };
        match refute_flexible_solutions(&problem, 1, RefuteOptions::default()) {
            RefuteVerdict::Found { candidate, .. } => {
                assert_eq!(candidate.timelines["x"].tokens.len(), 1);
                assert_eq!(
                    is_flexible_solution(&problem, &candidate, 1_000_000),
                    FlexVerdict::Solution
                );
            }
            other => panic!("expected a solution, got {other:?}"),
        }
    }

    #[test]
    fn gostop_with_fixed_stop_window_has_flexible_solution() {
        let problem = fixtures::gostop_uncertainty();
        match refute_flexible_solutions(&problem, 3, RefuteOptions::default()) {
            RefuteVerdict::Found { candidate, .. } => {
                let verdict = is_flexible_solution(&problem, &candidate, 1_000_000);
                assert_eq!(verdict, FlexVerdict::Solution);
            }
            other => panic!("expected a flexible solution, got {other:?}"),
        }
    }

    #[test]
    fn associate_game_encodes_single_token_observation() {
        let problem = fixtures::gostop_uncertainty();
        let game = associate_game(&problem).unwrap();
        assert_eq!(game.domain_rules().len(), 1);
        let rule = &game.domain_rules()[0];
        assert!(rule.is_triggerless());
        let statement = &rule.body[0];
        // Tokens of the observed y timeline are all quantified.
        let observed: usize = problem
            .observation
            .timelines
            .values()
            .map(|t| t.tokens.len())
            .sum();
        assert_eq!(statement.quantified.len(), observed);
    }

    #[test]
    fn associate_game_empty_observation_has_no_domain_rules() {
        let problem = fixtures::three_values_uncertainty();
        let game = associate_game(&problem).unwrap();
        assert!(game.domain_rules().is_empty());
    }

    #[test]
    fn associate_game_passes_observation_atoms_through() {
        let mut problem = fixtures::gostop_uncertainty();
        let atom = Atom::binary(
            EndpointRef::start("o0"),
            EndpointRef::end("o0"),
            Bounds::new(0, Upper::Finite(9)),
        );
        problem.observation.constraints.push(atom.clone());
        let game = associate_game(&problem).unwrap();
        assert!(game.domain_rules()[0].body[0].clause.contains(&atom));
    }

    /// Exhaustive equivalence: a scheduled plan over the external
    /// variables with as many tokens as the observation is an instance
    /// of it iff it satisfies the generated domain rules.
    #[test]
    fn observation_encoding_matches_instances_exactly() {
        let problem = fixtures::gostop_uncertainty();
        let game = associate_game(&problem).unwrap();
        let domain = Problem::new(problem.external.clone(), game.domain_rules().to_vec());
        let observed = &problem.observation.timelines["y"];
        let values: Vec<ValueName> = problem.external[0].values.clone();
        let len = observed.tokens.len();
        // Enumerate all value sequences and duration vectors up to a
        // horizon beyond every window.
        let horizon = 8u64;
        let mut stack: Vec<(ValueName, u64)> = Vec::new();
        fn visit(
            values: &[ValueName],
            len: usize,
            horizon: u64,
            stack: &mut Vec<(ValueName, u64)>,
            check: &mut dyn FnMut(&[(ValueName, u64)]),
        ) {
            if stack.len() == len {
                check(stack);
                return;
            }
            for value in values {
                for duration in 1..=horizon {
                    if stack.iter().map(|(_, d)| d).sum::<u64>() + duration > horizon {
                        continue;
                    }
                    stack.push((value.clone(), duration));
                    visit(values, len, horizon, stack, check);
                    stack.pop();
                }
            }
        }
        let mut agreement = 0usize;
        visit(&values, len, horizon, &mut stack, &mut |tokens| {
            let timeline =
                Timeline::from_tokens("y", tokens.iter().map(|(v, d)| (v.clone(), *d)));
            let scheduled = ScheduledPlan {
                timelines: BTreeMap::from([(VarName::from("y"), timeline.clone())]),
            };
            let instance = is_instance(observed, &timeline).unwrap_or(false)
                && satisfies_constraints(
                    &problem.observation,
                    &scheduled,
                );
            let satisfies = domain
                .rules
                .iter()
                .all(|r| rules::rule_satisfied(r, &scheduled, rules::MatchOptions::default()));
            assert_eq!(instance, satisfies, "disagreement on {tokens:?}");
            agreement += 1;
        });
        assert!(agreement > 0);
    }
}

//! Two-player game semantics over partial plans: actions, moves,
//! rounds and their applicability and outcome, plays, admissibility
//! and success judgments, strategy interfaces and a simulation
//! harness.
//!
//! Charlie (the controller) owns the controlled variables and the ends
//! of controllable values; Eve (the environment) owns the external
//! variables and the ends of uncontrollable values. Each round pairs
//! one move per player; Eve sees Charlie's move for the round, Charlie
//! only sees the plan built so far.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{Controllability, PartialPlan, StateVariable, ValueName, VarName};
use crate::rules::{self, Problem, SynchronizationRule};

/// A timeline-based planning game: controlled and external variables,
/// system rules (Charlie's responsibility) and domain rules
/// (background knowledge binding both players).
#[derive(Debug, Clone)]
pub struct Game {
    controlled: BTreeMap<VarName, StateVariable>,
    external: BTreeMap<VarName, StateVariable>,
    system_rules: Vec<SynchronizationRule>,
    domain_rules: Vec<SynchronizationRule>,
    /// Cached problem (SV, D) deciding admissibility.
    domain_problem: Problem,
    /// Cached problem (SV, D ∪ S) deciding success.
    full_problem: Problem,
}

impl Game {
    pub fn new(
        controlled: Vec<StateVariable>,
        external: Vec<StateVariable>,
        system_rules: Vec<SynchronizationRule>,
        domain_rules: Vec<SynchronizationRule>,
    ) -> Result<Self, GameError> {
        for c in &controlled {
            if external.iter().any(|e| e.name == c.name) {
                return Err(GameError::SharedVariable(c.name.clone()));
            }
        }
        let all: Vec<StateVariable> = controlled.iter().chain(external.iter()).cloned().collect();
        let domain_problem = Problem::new(all.clone(), domain_rules.clone());
        let mut full_rules = domain_rules.clone();
        full_rules.extend(system_rules.iter().cloned());
        let full_problem = Problem::new(all, full_rules);
        full_problem
            .validate()
            .map_err(|source| GameError::IllTyped { source })?;
        Ok(Game {
            controlled: controlled.into_iter().map(|v| (v.name.clone(), v)).collect(),
            external: external.into_iter().map(|v| (v.name.clone(), v)).collect(),
            system_rules,
            domain_rules,
            domain_problem,
            full_problem,
        })
    }

    pub fn controlled(&self) -> impl Iterator<Item = &StateVariable> {
        self.controlled.values()
    }

    pub fn external(&self) -> impl Iterator<Item = &StateVariable> {
        self.external.values()
    }

    /// All variables, controlled first, in name order within each set.
    pub fn variables(&self) -> impl Iterator<Item = &StateVariable> {
        self.controlled.values().chain(self.external.values())
    }

    pub fn variable(&self, name: &str) -> Option<&StateVariable> {
        self.controlled.get(name).or_else(|| self.external.get(name))
    }

    pub fn variable_names(&self) -> Vec<VarName> {
        self.variables().map(|v| v.name.clone()).collect()
    }

    pub fn system_rules(&self) -> &[SynchronizationRule] {
        &self.system_rules
    }

    pub fn domain_rules(&self) -> &[SynchronizationRule] {
        &self.domain_rules
    }

    /// The problem (SV, D) whose solutions are the admissible plans.
    pub fn domain_problem(&self) -> &Problem {
        &self.domain_problem
    }

    /// The problem (SV, D ∪ S) whose solutions are the successful plans.
    pub fn full_problem(&self) -> &Problem {
        &self.full_problem
    }

    pub fn is_controlled(&self, variable: &str) -> bool {
        self.controlled.contains_key(variable)
    }

    /// Who plays `start` actions on this variable.
    pub fn start_owner(&self, variable: &str) -> Player {
        if self.is_controlled(variable) {
            Player::Charlie
        } else {
            Player::Eve
        }
    }

    /// Who plays `end` actions for tokens holding this value.
    pub fn end_owner(&self, variable: &str, value: &str) -> Player {
        match self.variable(variable).map(|v| v.tag(value)) {
            Some(Controllability::Controllable) | None => Player::Charlie,
            Some(Controllability::Uncontrollable) => Player::Eve,
        }
    }

    pub fn action_owner(&self, action: &Action) -> Player {
        match action.kind {
            ActionKind::Start => self.start_owner(&action.variable),
            ActionKind::End => self.end_owner(&action.variable, &action.value),
        }
    }

    /// The empty partial plan over this game's variables.
    pub fn empty_plan(&self) -> PartialPlan {
        PartialPlan::empty(self.variable_names())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Player {
    Charlie,
    Eve,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Charlie => Player::Eve,
            Player::Eve => Player::Charlie,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::Charlie => f.write_str("charlie"),
            Player::Eve => f.write_str("eve"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Start,
    End,
}

/// Starting or ending a token for `variable = value`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Action {
    pub variable: VarName,
    pub value: ValueName,
    pub kind: ActionKind,
}

impl Action {
    pub fn start(variable: impl Into<VarName>, value: impl Into<ValueName>) -> Self {
        Action { variable: variable.into(), value: value.into(), kind: ActionKind::Start }
    }

    pub fn end(variable: impl Into<VarName>, value: impl Into<ValueName>) -> Self {
        Action { variable: variable.into(), value: value.into(), kind: ActionKind::End }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ActionKind::Start => "start",
            ActionKind::End => "end",
        };
        write!(f, "{kind}({}, {})", self.variable, self.value)
    }
}

/// A timestamped move: `wait(t)` (Charlie only) or `play(t, A)`.
/// Action sets are kept sorted so moves compare canonically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Move {
    Wait(u64),
    Play(u64, Vec<Action>),
}

impl Move {
    pub fn play(t: u64, mut actions: Vec<Action>) -> Self {
        actions.sort();
        actions.dedup();
        Move::Play(t, actions)
    }

    pub fn wait(t: u64) -> Self {
        Move::Wait(t)
    }

    pub fn timestamp(&self) -> u64 {
        match self {
            Move::Wait(t) | Move::Play(t, _) => *t,
        }
    }

    pub fn actions(&self) -> &[Action] {
        match self {
            Move::Wait(_) => &[],
            Move::Play(_, actions) => actions,
        }
    }

    pub fn is_wait(&self) -> bool {
        matches!(self, Move::Wait(_))
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Wait(t) => write!(f, "wait({t})"),
            Move::Play(t, actions) => {
                write!(f, "play({t}, {{")?;
                for (i, action) in actions.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{action}")?;
                }
                write!(f, "}})")
            }
        }
    }
}

/// One round: Charlie's move paired with Eve's (always a play).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Round {
    pub charlie: Move,
    pub eve: Move,
}

impl Round {
    pub fn new(charlie: Move, eve: Move) -> Self {
        Round { charlie, eve }
    }
}

/// A violated applicability clause, for diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RoundViolation {
    /// Eve played a wait move.
    EveCannotWait,
    /// An action is owned by the other player.
    NotOwn { player: Player, action: Action },
    /// A move plays two starts or two ends on one variable.
    DuplicateAction { player: Player, action: Action },
    /// An action names an unknown variable or value.
    UnknownTarget { action: Action },
    /// Start played while the timeline is open.
    StartOnOpenTimeline { action: Action },
    /// A closed timeline received no start action this round.
    ClosedTimelineNotStarted { variable: VarName },
    /// End played with no matching open token or same-round start.
    EndWithoutOpenToken { action: Action },
    /// Both played, but not at the current time.
    PlayTimestampNotNow { player: Player, timestamp: u64, now: u64 },
    /// Charlie's wait must target a strictly future instant.
    WaitNotInFuture { timestamp: u64, now: u64 },
    /// Eve's timestamp exceeds Charlie's wait.
    EveAfterWait { eve: u64, charlie: u64 },
    /// Eve's timestamp precedes the current time.
    EveBeforeNow { timestamp: u64, now: u64 },
}

impl fmt::Display for RoundViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RoundViolation::EveCannotWait => write!(f, "eve cannot wait"),
            RoundViolation::NotOwn { player, action } => {
                write!(f, "{action} is not {player}'s action")
            }
            RoundViolation::DuplicateAction { player, action } => {
                write!(f, "{player} plays {action} twice on one variable")
            }
            RoundViolation::UnknownTarget { action } => {
                write!(f, "{action} targets an undeclared variable or value")
            }
            RoundViolation::StartOnOpenTimeline { action } => {
                write!(f, "{action} played while the timeline is open")
            }
            RoundViolation::ClosedTimelineNotStarted { variable } => {
                write!(f, "closed timeline `{variable}` was not started this round")
            }
            RoundViolation::EndWithoutOpenToken { action } => {
                write!(f, "{action} has no matching open token or same-round start")
            }
            RoundViolation::PlayTimestampNotNow { player, timestamp, now } => {
                write!(f, "{player} plays at {timestamp}, but now = {now}")
            }
            RoundViolation::WaitNotInFuture { timestamp, now } => {
                write!(f, "wait({timestamp}) does not pass now = {now}")
            }
            RoundViolation::EveAfterWait { eve, charlie } => {
                write!(f, "eve plays at {eve}, after charlie's wait({charlie})")
            }
            RoundViolation::EveBeforeNow { timestamp, now } => {
                write!(f, "eve plays at {timestamp}, before now = {now}")
            }
        }
    }
}

/// Checks integrity and timing of a round against a plan, reporting
/// every violated clause.
pub fn round_violations(game: &Game, plan: &PartialPlan, round: &Round) -> Vec<RoundViolation> {
    let mut violations = Vec::new();
    if round.eve.is_wait() {
        violations.push(RoundViolation::EveCannotWait);
    }

    // Move well-formedness: ownership and one start/end per variable.
    for (player, mv) in [(Player::Charlie, &round.charlie), (Player::Eve, &round.eve)] {
        let mut seen: Vec<(&str, ActionKind)> = Vec::new();
        for action in mv.actions() {
            let known = game
                .variable(&action.variable)
                .map(|v| v.values.contains(&action.value))
                .unwrap_or(false);
            if !known {
                violations.push(RoundViolation::UnknownTarget { action: action.clone() });
                continue;
            }
            if game.action_owner(action) != player {
                violations.push(RoundViolation::NotOwn { player, action: action.clone() });
            }
            if seen.contains(&(action.variable.as_str(), action.kind)) {
                violations.push(RoundViolation::DuplicateAction { player, action: action.clone() });
            }
            seen.push((action.variable.as_str(), action.kind));
        }
    }

    let all_actions: Vec<&Action> =
        round.charlie.actions().iter().chain(round.eve.actions().iter()).collect();

    // Integrity (a): starts exactly on closed timelines.
    for action in &all_actions {
        if action.kind == ActionKind::Start {
            if let Some(timeline) = plan.timeline(&action.variable) {
                if timeline.is_open() {
                    violations.push(RoundViolation::StartOnOpenTimeline {
                        action: (*action).clone(),
                    });
                }
            }
        }
    }
    for timeline in plan.timelines() {
        if !timeline.is_open() {
            let started = all_actions
                .iter()
                .any(|a| a.kind == ActionKind::Start && a.variable == timeline.variable());
            if !started {
                violations.push(RoundViolation::ClosedTimelineNotStarted {
                    variable: timeline.variable().to_owned(),
                });
            }
        }
    }

    // Integrity (b): ends need an open token of the same value, or a
    // same-round start.
    for action in &all_actions {
        if action.kind == ActionKind::End {
            let same_round_start = all_actions.iter().any(|a| {
                a.kind == ActionKind::Start && a.variable == action.variable && a.value == action.value
            });
            let open_matches = plan
                .timeline(&action.variable)
                .and_then(|t| t.open_tail())
                .map(|open| open.value == action.value)
                .unwrap_or(false);
            if !same_round_start && !open_matches {
                violations.push(RoundViolation::EndWithoutOpenToken { action: (*action).clone() });
            }
        }
    }

    // Timing.
    let now = plan.now();
    let t_e = round.eve.timestamp();
    match &round.charlie {
        Move::Play(t_c, _) => {
            if *t_c != now {
                violations.push(RoundViolation::PlayTimestampNotNow {
                    player: Player::Charlie,
                    timestamp: *t_c,
                    now,
                });
            }
            if t_e != now {
                violations.push(RoundViolation::PlayTimestampNotNow {
                    player: Player::Eve,
                    timestamp: t_e,
                    now,
                });
            }
        }
        Move::Wait(t_c) => {
            if *t_c <= now {
                violations.push(RoundViolation::WaitNotInFuture { timestamp: *t_c, now });
            }
            if t_e > *t_c {
                violations.push(RoundViolation::EveAfterWait { eve: t_e, charlie: *t_c });
            }
            // Time never runs backwards: the outcome's `now` must
            // strictly increase, which needs t_e >= now.
            if t_e < now {
                violations.push(RoundViolation::EveBeforeNow { timestamp: t_e, now });
            }
        }
    }

    violations
}

pub fn round_applicable(game: &Game, plan: &PartialPlan, round: &Round) -> bool {
    round_violations(game, plan, round).is_empty()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GameError {
    #[error("variable `{0}` is both controlled and external")]
    SharedVariable(VarName),
    #[error("ill-typed game: {source}")]
    IllTyped { source: rules::RulesError },
    #[error("round is not applicable: {}", format_violations(.violations))]
    Inapplicable { violations: Vec<RoundViolation> },
    #[error("round {index} is not applicable: {}", format_violations(.violations))]
    InapplicableAt {
        index: usize,
        violations: Vec<RoundViolation>,
    },
    #[error("script contains `{action}`, which is not one of eve's actions")]
    ScriptNotEve { action: Action },
}

fn format_violations(violations: &[RoundViolation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Applies an applicable round: appends open tokens for starts, closes
/// ended tokens with duration `t - start + 1`, then advances `now` to
/// `min(t_C, t_E) + 1`.
pub fn apply_round(game: &Game, plan: &PartialPlan, round: &Round) -> Result<PartialPlan, GameError> {
    let violations = round_violations(game, plan, round);
    if !violations.is_empty() {
        return Err(GameError::Inapplicable { violations });
    }
    let mut next = plan.clone();
    // Step 1: starts.
    for mv in [&round.charlie, &round.eve] {
        for action in mv.actions() {
            if action.kind == ActionKind::Start {
                let timeline = next.timeline_mut(&action.variable).expect("validated");
                timeline.push_open(action.value.clone());
            }
        }
    }
    // Step 2: ends, each at its own move's timestamp.
    for mv in [&round.charlie, &round.eve] {
        let t = mv.timestamp();
        for action in mv.actions() {
            if action.kind == ActionKind::End {
                let timeline = next.timeline_mut(&action.variable).expect("validated");
                let started = timeline.open_start().expect("validated open token");
                timeline.close_open(t - started + 1);
            }
        }
    }
    // Step 3: advance time.
    let now = round.charlie.timestamp().min(round.eve.timestamp()) + 1;
    next.set_now(now);
    debug_assert_eq!(next.validate(), Ok(()));
    Ok(next)
}

/// Folds a sequence of rounds over an initial plan, reporting the
/// index of the first inapplicable round.
pub fn apply_play(
    game: &Game,
    initial: &PartialPlan,
    rounds: &[Round],
) -> Result<PartialPlan, GameError> {
    let mut plan = initial.clone();
    for (index, round) in rounds.iter().enumerate() {
        plan = apply_round(game, &plan, round).map_err(|e| match e {
            GameError::Inapplicable { violations } => GameError::InapplicableAt { index, violations },
            other => other,
        })?;
    }
    Ok(plan)
}

/// A plan is admissible when its closure solves the domain problem
/// (SV, D). The empty plan is not admissible: there is nothing to
/// judge yet.
pub fn is_admissible(game: &Game, plan: &PartialPlan) -> bool {
    match plan.closure() {
        Ok(closure) => {
            rules::is_solution_plan(game.domain_problem(), &closure).unwrap_or(false)
        }
        Err(_) => false,
    }
}

/// A plan is successful when its closure solves (SV, D ∪ S).
/// Successful plans are always admissible.
pub fn is_successful(game: &Game, plan: &PartialPlan) -> bool {
    match plan.closure() {
        Ok(closure) => rules::is_solution_plan(game.full_problem(), &closure).unwrap_or(false),
        Err(_) => false,
    }
}

/// Reconstructs the unique no-wait play that produces `plan` from the
/// empty plan: at each time step, the boundary events of the plan
/// become start and end actions, partitioned by ownership.
pub fn reconstruct_play(game: &Game, plan: &PartialPlan) -> Vec<Round> {
    let mut rounds = Vec::new();
    for t in 0..plan.now() {
        let mut charlie = Vec::new();
        let mut eve = Vec::new();
        let mut push = |game: &Game, action: Action| {
            match game.action_owner(&action) {
                Player::Charlie => charlie.push(action),
                Player::Eve => eve.push(action),
            }
        };
        for timeline in plan.timelines() {
            for (index, token) in timeline.closed_tokens().iter().enumerate() {
                let start = timeline.start(index).unwrap();
                let end = timeline.end(index).unwrap();
                if start == t {
                    push(game, Action::start(timeline.variable(), token.value.clone()));
                }
                // A token over [start, end) is closed by an end action
                // at time end - 1.
                if end == t + 1 {
                    push(game, Action::end(timeline.variable(), token.value.clone()));
                }
            }
            if let (Some(open), Some(start)) = (timeline.open_tail(), timeline.open_start()) {
                if start == t {
                    push(game, Action::start(timeline.variable(), open.value.clone()));
                }
            }
        }
        rounds.push(Round::new(Move::play(t, charlie), Move::play(t, eve)));
    }
    rounds
}

// ---------------------------------------------------------------------------
// Strategies and simulation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StrategyError {
    #[error("strategy has no move for this plan: {0}")]
    OutsideDomain(String),
}

/// Charlie decides from the plan alone: he does not see Eve's move of
/// the current round.
pub trait CharlieStrategy {
    fn decide(&mut self, game: &Game, plan: &PartialPlan) -> Result<Move, StrategyError>;
}

/// Eve sees the plan and Charlie's move for the round.
pub trait EveStrategy {
    fn decide(
        &mut self,
        game: &Game,
        plan: &PartialPlan,
        charlie: &Move,
    ) -> Result<Move, StrategyError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub round: usize,
    pub charlie_move: Move,
    pub eve_move: Move,
    pub now: u64,
    pub admissible: bool,
    pub successful: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SimOutcome {
    /// A successful plan was reached after `rounds` rounds.
    Success { rounds: usize },
    /// The round budget ran out without success.
    MaxRounds,
    /// A strategy failed to produce a move.
    StrategyFailed { player: Player, message: String },
    /// A strategy produced an inapplicable move.
    InapplicableMove { player: Player, violations: Vec<RoundViolation> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    pub outcome: SimOutcome,
}

impl Trace {
    pub fn final_now(&self) -> u64 {
        self.steps.last().map(|s| s.now).unwrap_or(0)
    }
}

/// Runs the two strategies against each other from the empty plan
/// until the plan is successful, `max_rounds` elapse, or a strategy
/// errs. Every step records the admissible/successful flags of the
/// resulting plan.
pub fn simulate(
    game: &Game,
    charlie: &mut dyn CharlieStrategy,
    eve: &mut dyn EveStrategy,
    max_rounds: usize,
) -> Trace {
    let mut plan = game.empty_plan();
    let mut steps = Vec::new();
    for round_index in 0..max_rounds {
        let charlie_move = match charlie.decide(game, &plan) {
            Ok(mv) => mv,
            Err(e) => {
                return Trace {
                    steps,
                    outcome: SimOutcome::StrategyFailed {
                        player: Player::Charlie,
                        message: e.to_string(),
                    },
                }
            }
        };
        let eve_move = match eve.decide(game, &plan, &charlie_move) {
            Ok(mv) => mv,
            Err(e) => {
                return Trace {
                    steps,
                    outcome: SimOutcome::StrategyFailed {
                        player: Player::Eve,
                        message: e.to_string(),
                    },
                }
            }
        };
        let round = Round::new(charlie_move.clone(), eve_move.clone());
        // Blame the offender: a Charlie move is applicable if some Eve
        // move completes it.
        let violations = round_violations(game, &plan, &round);
        if !violations.is_empty() {
            let charlie_ok = charlie_move_applicable(game, &plan, &charlie_move);
            return Trace {
                steps,
                outcome: SimOutcome::InapplicableMove {
                    player: if charlie_ok { Player::Eve } else { Player::Charlie },
                    violations,
                },
            };
        }
        plan = apply_round(game, &plan, &round).expect("checked applicable");
        let admissible = is_admissible(game, &plan);
        let successful = is_successful(game, &plan);
        steps.push(TraceStep {
            round: round_index,
            charlie_move,
            eve_move,
            now: plan.now(),
            admissible,
            successful,
        });
        if successful {
            return Trace { steps, outcome: SimOutcome::Success { rounds: round_index + 1 } };
        }
    }
    Trace { steps, outcome: SimOutcome::MaxRounds }
}

/// Is there an Eve move completing Charlie's move into an applicable
/// round? Eve must start all her closed timelines; the canonical
/// completion starts each with an arbitrary legal value and plays no
/// ends.
pub fn charlie_move_applicable(game: &Game, plan: &PartialPlan, mv: &Move) -> bool {
    let t_e = match mv {
        Move::Play(t, _) => *t,
        Move::Wait(_) => plan.now(),
    };
    let mut actions = Vec::new();
    for variable in game.external() {
        let timeline = plan.timeline(&variable.name).expect("plan covers game");
        if !timeline.is_open() {
            // Any domain value makes the round structurally applicable.
            let value = timeline
                .last_value()
                .and_then(|prev| {
                    variable.transitions.get(prev).and_then(|ts| ts.first().cloned())
                })
                .or_else(|| variable.values.first().cloned());
            match value {
                Some(v) => actions.push(Action::start(variable.name.clone(), v)),
                None => return false,
            }
        }
    }
    let round = Round::new(mv.clone(), Move::play(t_e, actions));
    round_applicable(game, plan, &round)
}

// ---------------------------------------------------------------------------
// Test-harness Eve strategies
// ---------------------------------------------------------------------------

/// Replays a fixed script of timestamped actions. The script must only
/// contain Eve's actions; starts required to keep rounds applicable
/// must be part of the script.
#[derive(Debug, Clone)]
pub struct ScriptedEve {
    script: Vec<(u64, Action)>,
}

impl ScriptedEve {
    pub fn new(game: &Game, mut script: Vec<(u64, Action)>) -> Result<Self, GameError> {
        for (_, action) in &script {
            if game.action_owner(action) != Player::Eve {
                return Err(GameError::ScriptNotEve { action: action.clone() });
            }
        }
        script.sort();
        Ok(ScriptedEve { script })
    }
}

impl EveStrategy for ScriptedEve {
    fn decide(
        &mut self,
        _game: &Game,
        plan: &PartialPlan,
        charlie: &Move,
    ) -> Result<Move, StrategyError> {
        let now = plan.now();
        let t = match charlie {
            Move::Play(t, _) => *t,
            Move::Wait(t_c) => {
                // Play at the earliest scripted instant within the wait,
                // or silently at the wait's deadline.
                self.script
                    .iter()
                    .map(|(t, _)| *t)
                    .find(|t| *t >= now && *t <= *t_c)
                    .unwrap_or(*t_c)
            }
        };
        let actions: Vec<Action> = self
            .script
            .iter()
            .filter(|(st, _)| *st == t)
            .map(|(_, a)| a.clone())
            .collect();
        Ok(Move::play(t, actions))
    }
}

/// An Eve built to stay admissible: she ends her uncontrollable tokens
/// within their duration bounds at a seeded random instant, keeps her
/// external timelines running with legal transitions, and fulfils each
/// triggerless domain-rule obligation she can (starting a required
/// token) after a geometrically sampled number of opportunities.
pub struct RandomAdmissibleEve {
    rng: rand_chacha::ChaCha8Rng,
    /// Probability parameter of the geometric deadline distribution.
    fulfil_probability: f64,
    /// Pending obligations: values she must eventually start, with a
    /// sampled countdown of opportunities.
    obligations: Vec<(VarName, ValueName, u64)>,
    /// Target durations for open uncontrollable tokens she owns.
    targets: BTreeMap<VarName, u64>,
    initialized: bool,
}

impl RandomAdmissibleEve {
    pub fn new(game: &Game, seed: u64, fulfil_probability: f64) -> Self {
        use rand::SeedableRng;
        let mut eve = RandomAdmissibleEve {
            rng: rand_chacha::ChaCha8Rng::seed_from_u64(seed),
            fulfil_probability: fulfil_probability.clamp(0.05, 1.0),
            obligations: Vec::new(),
            targets: BTreeMap::new(),
            initialized: false,
        };
        eve.collect_obligations(game);
        eve
    }

    fn geometric(&mut self) -> u64 {
        use rand::Rng;
        let mut k = 0;
        while k < 64 && self.rng.gen::<f64>() > self.fulfil_probability {
            k += 1;
        }
        k
    }

    /// Obligations are quantifiers of triggerless domain rules over
    /// external variables: tokens only Eve can create.
    fn collect_obligations(&mut self, game: &Game) {
        let mut wanted = Vec::new();
        for rule in game.domain_rules() {
            if rule.trigger.is_some() {
                continue;
            }
            if let Some(statement) = rule.body.first() {
                for q in &statement.quantified {
                    if !game.is_controlled(&q.variable) {
                        wanted.push((q.variable.clone(), q.value.clone()));
                    }
                }
            }
        }
        for (variable, value) in wanted {
            let deadline = self.geometric();
            self.obligations.push((variable, value, deadline));
        }
        self.initialized = true;
    }

    fn pick_duration(&mut self, lo: u64, hi: crate::model::Upper) -> u64 {
        use rand::Rng;
        let cap = match hi {
            crate::model::Upper::Finite(h) => h,
            crate::model::Upper::Infinite => lo + 4,
        };
        self.rng.gen_range(lo..=cap.max(lo))
    }
}

impl EveStrategy for RandomAdmissibleEve {
    fn decide(
        &mut self,
        game: &Game,
        plan: &PartialPlan,
        charlie: &Move,
    ) -> Result<Move, StrategyError> {
        use rand::Rng;
        let t = match charlie {
            Move::Play(t, _) => *t,
            Move::Wait(_) => plan.now(),
        };
        let mut actions = Vec::new();

        // End uncontrollable open tokens once their target duration is
        // reached (ending at t closes with duration t - start + 1).
        for timeline in plan.timelines() {
            let Some(open) = timeline.open_tail() else { continue };
            if game.end_owner(timeline.variable(), &open.value) != Player::Eve {
                continue;
            }
            let variable = game.variable(timeline.variable()).expect("game variable");
            let (lo, hi) = variable.duration_bounds(&open.value);
            let started = timeline.open_start().unwrap();
            let target = *self
                .targets
                .entry(timeline.variable().to_owned())
                .or_insert_with(|| {
                    // sampled once per token; re-sampled when a new
                    // token opens because the entry is removed on close
                    0
                });
            let target = if target == 0 {
                let d = self.pick_duration(lo, hi);
                self.targets.insert(timeline.variable().to_owned(), d);
                d
            } else {
                target
            };
            let duration_if_ended = t - started + 1;
            let must_end = match hi {
                crate::model::Upper::Finite(h) => duration_if_ended >= h,
                crate::model::Upper::Infinite => false,
            };
            if (duration_if_ended >= target && duration_if_ended >= lo) || must_end {
                actions.push(Action::end(timeline.variable().to_owned(), open.value.clone()));
                self.targets.remove(timeline.variable());
            }
        }

        // Start every closed external timeline, fulfilling due
        // obligations first, otherwise following a random legal
        // transition.
        for variable in game.external() {
            let timeline = plan.timeline(&variable.name).expect("plan covers game");
            if timeline.is_open() {
                continue;
            }
            let legal: Vec<ValueName> = match timeline.last_value() {
                Some(prev) => variable
                    .transitions
                    .get(prev)
                    .cloned()
                    .unwrap_or_default(),
                None => variable.values.clone(),
            };
            if legal.is_empty() {
                continue;
            }
            let due = self.obligations.iter().position(|(var, value, deadline)| {
                var == &variable.name && *deadline == 0 && legal.contains(value)
            });
            let value = if let Some(pos) = due {
                let (_, value, _) = self.obligations.remove(pos);
                value
            } else {
                for obligation in &mut self.obligations {
                    if obligation.0 == variable.name && obligation.2 > 0 {
                        obligation.2 -= 1;
                    }
                }
                legal[self.rng.gen_range(0..legal.len())].clone()
            };
            actions.push(Action::start(variable.name.clone(), value));
        }

        Ok(Move::play(t, actions))
    }
}

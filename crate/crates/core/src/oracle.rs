//! Independent re-implementations used as test oracles.
//!
//! Everything here is deliberately naive and shares no code with the
//! checked implementations: witness search is plain nested loops over
//! token tuples with no pruning, the round formulas are spelled out
//! directly, and the window is recomputed by a second traversal.

use std::collections::BTreeMap;

use crate::game::Game;
use crate::model::{ScheduledPlan, Upper};
use crate::rules::{atom_eval, ExistentialStatement, Problem, SynchronizationRule, TokenName};

/// All `(start, end)` intervals of tokens with the given variable and
/// value, in plan order.
fn tokens_of(plan: &ScheduledPlan, variable: &str, value: &str) -> Vec<(u64, u64)> {
    let Some(timeline) = plan.timeline(variable) else {
        return Vec::new();
    };
    timeline
        .closed_tokens()
        .iter()
        .enumerate()
        .filter(|(_, t)| t.value == value)
        .map(|(i, _)| (timeline.start(i).unwrap(), timeline.end(i).unwrap()))
        .collect()
}

/// Nested-loop witness search: every tuple of candidate tokens is
/// tried, and the whole clause is evaluated only on full tuples.
fn naive_match(
    statement: &ExistentialStatement,
    plan: &ScheduledPlan,
    bound: &BTreeMap<TokenName, (u64, u64)>,
) -> bool {
    fn tuples(
        statement: &ExistentialStatement,
        plan: &ScheduledPlan,
        depth: usize,
        assignment: &mut BTreeMap<TokenName, (u64, u64)>,
    ) -> bool {
        if depth == statement.quantified.len() {
            return statement
                .clause
                .iter()
                .all(|atom| atom_eval(atom, assignment).unwrap_or(false));
        }
        let q = &statement.quantified[depth];
        for interval in tokens_of(plan, &q.variable, &q.value) {
            assignment.insert(q.name.clone(), interval);
            if tuples(statement, plan, depth + 1, assignment) {
                return true;
            }
            assignment.remove(&q.name);
        }
        false
    }
    let mut assignment = bound.clone();
    tuples(statement, plan, 0, &mut assignment)
}

/// Naive rule satisfaction: loops over all trigger tokens, then over
/// all token tuples per disjunct.
pub fn naive_rule_satisfied(rule: &SynchronizationRule, plan: &ScheduledPlan) -> bool {
    match &rule.trigger {
        None => rule
            .body
            .iter()
            .any(|statement| naive_match(statement, plan, &BTreeMap::new())),
        Some(trigger) => tokens_of(plan, &trigger.variable, &trigger.value)
            .into_iter()
            .all(|interval| {
                let bound = BTreeMap::from([(trigger.name.clone(), interval)]);
                rule.body
                    .iter()
                    .any(|statement| naive_match(statement, plan, &bound))
            }),
    }
}

/// Naive solution check written out longhand.
pub fn naive_is_solution_plan(problem: &Problem, plan: &ScheduledPlan) -> bool {
    for (name, variable) in &problem.variables {
        let Some(timeline) = plan.timeline(name) else {
            return false;
        };
        let tokens = timeline.closed_tokens();
        for (i, token) in tokens.iter().enumerate() {
            if !variable.values.contains(&token.value) {
                return false;
            }
            let (lo, hi) = variable.duration_bounds(&token.value);
            if token.duration < lo {
                return false;
            }
            if let Upper::Finite(h) = hi {
                if token.duration > h {
                    return false;
                }
            }
            if i + 1 < tokens.len() {
                let next = &tokens[i + 1].value;
                let allowed = variable
                    .transitions
                    .get(&token.value)
                    .map(|ts| ts.contains(next))
                    .unwrap_or(false);
                if !allowed {
                    return false;
                }
            }
        }
    }
    problem.rules.iter().all(|r| naive_rule_satisfied(r, plan))
}

/// The duration a token started at `start` gets when ended at `t`.
pub fn end_duration(t: u64, start: u64) -> u64 {
    t - start + 1
}

/// The current time after a round with the given timestamps.
pub fn next_now(t_charlie: u64, t_eve: u64) -> u64 {
    t_charlie.min(t_eve) + 1
}

/// Second, independent traversal computing the game window: collect
/// every non-zero bound of every bounded atom and every non-zero
/// finite duration bound, then fold the product.
pub fn window_recount(game: &Game) -> u64 {
    let mut factors: Vec<u64> = Vec::new();
    for rule in game.system_rules().iter().chain(game.domain_rules()) {
        for statement in &rule.body {
            for atom in &statement.clause {
                if let Upper::Finite(u) = atom.bounds.upper {
                    if atom.bounds.lower != 0 {
                        factors.push(atom.bounds.lower);
                    }
                    if u != 0 {
                        factors.push(u);
                    }
                }
            }
        }
    }
    for variable in game.variables() {
        for value in &variable.values {
            let (lo, hi) = variable.duration_bounds(value);
            if lo != 0 {
                factors.push(lo);
            }
            if let Upper::Finite(h) = hi {
                if h != 0 {
                    factors.push(h);
                }
            }
        }
    }
    factors.into_iter().fold(1u64, u64::saturating_mul)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rules::{self, MatchOptions};

    #[test]
    fn naive_agrees_on_camera_fixtures() {
        let problem = fixtures::camera_problem();
        for plan in [fixtures::camera_solution_plan(), fixtures::camera_broken_plan()] {
            for rule in &problem.rules {
                assert_eq!(
                    naive_rule_satisfied(rule, &plan),
                    rules::rule_satisfied(rule, &plan, MatchOptions::default()),
                    "rule {}",
                    rule.name
                );
            }
            assert_eq!(
                naive_is_solution_plan(&problem, &plan),
                rules::is_solution_plan(&problem, &plan).unwrap()
            );
        }
    }

    #[test]
    fn round_formulas() {
        assert_eq!(end_duration(4, 0), 5);
        assert_eq!(end_duration(3, 3), 1);
        assert_eq!(next_now(10, 6), 7);
        assert_eq!(next_now(0, 0), 1);
    }
}

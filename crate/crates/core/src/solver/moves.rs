//! No-wait move enumeration with culpability pruning.
//!
//! The solver explores only `play(now, A)` moves: wait moves can
//! always be replaced by a sequence of empty plays. Moves that doom
//! admissibility through the mover's own fault — starting an illegal
//! transition, ending a token outside its duration bounds, or letting
//! a token one owns overrun its maximum duration — are never offered:
//! such a move loses the play for its owner outright, so neither
//! player ever benefits from it.

use crate::game::{Action, Game, Move, Player};
use crate::model::{PartialPlan, Upper};

/// Per-variable alternatives, combined by cartesian product.
fn product(options: Vec<Vec<Vec<Action>>>, t: u64) -> Vec<Move> {
    let mut acc: Vec<Vec<Action>> = vec![Vec::new()];
    for variable_options in options {
        let mut next = Vec::new();
        for prefix in &acc {
            for option in &variable_options {
                let mut actions = prefix.clone();
                actions.extend(option.iter().cloned());
                next.push(actions);
            }
        }
        acc = next;
        if acc.is_empty() {
            return Vec::new();
        }
    }
    let mut moves: Vec<Move> = acc.into_iter().map(|a| Move::play(t, a)).collect();
    moves.sort_by(|a, b| move_order(a).cmp(&move_order(b)));
    moves.dedup();
    moves
}

/// Deterministic ordering: fewer actions first, then lexicographic.
pub fn move_order(mv: &Move) -> (usize, Vec<Action>) {
    (mv.actions().len(), mv.actions().to_vec())
}

/// Values that may legally start a new token on this timeline.
fn legal_starts(game: &Game, plan: &PartialPlan, variable: &str) -> Vec<String> {
    let var = game.variable(variable).expect("declared variable");
    let timeline = plan.timeline(variable).expect("plan covers game");
    match timeline.last_value() {
        None => var.values.clone(),
        Some(prev) => var
            .values
            .iter()
            .filter(|v| var.allows_transition(prev, v))
            .cloned()
            .collect(),
    }
}

/// End/skip alternatives for the open token of `variable`, owned by
/// the mover. Ending yields duration `age + 1`; skipping leaves a
/// closure duration of `age + 1` for the next round. Alternatives that
/// violate the duration bounds are culpable and omitted.
fn open_token_options(game: &Game, plan: &PartialPlan, variable: &str) -> Vec<Vec<Action>> {
    let timeline = plan.timeline(variable).expect("plan covers game");
    let open = timeline.open_tail().expect("open token");
    let var = game.variable(variable).expect("declared variable");
    let (lo, hi) = var.duration_bounds(&open.value);
    let age = plan.now() - timeline.open_start().expect("open start");
    let mut options = Vec::new();
    // Skip: the token keeps running.
    if hi.admits(age + 1) {
        options.push(vec![]);
    }
    // End now, closing with duration age + 1.
    if age + 1 >= lo && hi.admits(age + 1) {
        options.push(vec![Action::end(variable, open.value.clone())]);
    }
    options
}

/// All of Charlie's non-culpable moves at the current time. Every
/// closed controlled timeline must be started (integrity), optionally
/// together with its end when the value is controllable and unit
/// durations are allowed; open tokens with controllable values may be
/// ended or kept running within their bounds.
pub fn charlie_moves(game: &Game, plan: &PartialPlan) -> Vec<Move> {
    let mut per_variable = Vec::new();
    for variable in game.variables() {
        let timeline = plan.timeline(&variable.name).expect("plan covers game");
        let options: Vec<Vec<Action>> = if timeline.is_open() {
            let value = &timeline.open_tail().unwrap().value;
            if game.end_owner(&variable.name, value) == Player::Charlie {
                open_token_options(game, plan, &variable.name)
            } else {
                vec![vec![]]
            }
        } else if game.is_controlled(&variable.name) {
            let mut options = Vec::new();
            for value in legal_starts(game, plan, &variable.name) {
                let start = Action::start(variable.name.clone(), value.clone());
                options.push(vec![start.clone()]);
                let (lo, _) = variable.duration_bounds(&value);
                if game.end_owner(&variable.name, &value) == Player::Charlie && lo == 1 {
                    options.push(vec![start, Action::end(variable.name.clone(), value)]);
                }
            }
            options
        } else {
            vec![vec![]]
        };
        if options.is_empty() {
            return Vec::new();
        }
        per_variable.push(options);
    }
    product(per_variable, plan.now())
}

/// All of Eve's non-culpable replies to Charlie's move: she must start
/// her closed external timelines, may end open uncontrollable tokens
/// within bounds, and may reactively end a token Charlie starts this
/// round when its value is uncontrollable and unit durations are
/// allowed.
pub fn eve_moves(game: &Game, plan: &PartialPlan, charlie: &Move) -> Vec<Move> {
    let mut per_variable = Vec::new();
    for variable in game.variables() {
        let timeline = plan.timeline(&variable.name).expect("plan covers game");
        let options: Vec<Vec<Action>> = if timeline.is_open() {
            let value = &timeline.open_tail().unwrap().value;
            if game.end_owner(&variable.name, value) == Player::Eve {
                open_token_options(game, plan, &variable.name)
            } else {
                vec![vec![]]
            }
        } else if !game.is_controlled(&variable.name) {
            let mut options = Vec::new();
            for value in legal_starts(game, plan, &variable.name) {
                let start = Action::start(variable.name.clone(), value.clone());
                options.push(vec![start.clone()]);
                let (lo, _) = variable.duration_bounds(&value);
                if game.end_owner(&variable.name, &value) == Player::Eve && lo == 1 {
                    options.push(vec![start, Action::end(variable.name.clone(), value)]);
                }
            }
            options
        } else {
            // Reactive end of a token Charlie starts this round.
            let started = charlie.actions().iter().find(|a| {
                a.variable == variable.name && a.kind == crate::game::ActionKind::Start
            });
            let charlie_ends = charlie.actions().iter().any(|a| {
                a.variable == variable.name && a.kind == crate::game::ActionKind::End
            });
            match started {
                Some(start)
                    if !charlie_ends
                        && game.end_owner(&variable.name, &start.value) == Player::Eve =>
                {
                    let (lo, _) = variable.duration_bounds(&start.value);
                    if lo == 1 {
                        vec![vec![], vec![Action::end(variable.name.clone(), start.value.clone())]]
                    } else {
                        vec![vec![]]
                    }
                }
                _ => vec![vec![]],
            }
        };
        if options.is_empty() {
            return Vec::new();
        }
        per_variable.push(options);
    }
    product(per_variable, plan.now())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::game::{apply_round, round_applicable, Round};

    #[test]
    fn charlie_must_start_his_closed_variables() {
        let game = fixtures::three_values_game();
        let moves = charlie_moves(&game, &game.empty_plan());
        // v1 (uncontrollable end): bare start; v2, v3: start or unit pair.
        assert_eq!(moves.len(), 5);
        assert!(moves.iter().all(|m| !m.actions().is_empty()));
    }

    #[test]
    fn enumerated_rounds_are_applicable() {
        let game = fixtures::gostop_game();
        let plan = game.empty_plan();
        for mc in charlie_moves(&game, &plan) {
            for me in eve_moves(&game, &plan, &mc) {
                let round = Round::new(mc.clone(), me.clone());
                assert!(
                    round_applicable(&game, &plan, &round),
                    "unapplicable round {mc} / {me}"
                );
                apply_round(&game, &plan, &round).unwrap();
            }
        }
    }

    #[test]
    fn two_value_controllable_variable_alphabet() {
        use crate::fixtures::VariableBuilder;
        use crate::model::{Controllability, Upper};
        let x = VariableBuilder::new("x")
            .value("a", 1, Upper::Finite(2), Controllability::Controllable)
            .value("b", 1, Upper::Finite(2), Controllability::Controllable)
            .transitions_free()
            .build();
        let game = crate::game::Game::new(vec![x], vec![], vec![], vec![]).unwrap();
        // Closed timeline: start a, start b, start+end a, start+end b.
        assert_eq!(charlie_moves(&game, &game.empty_plan()).len(), 4);
        // Open token at age 0 with bounds [1, 2]: skip or end.
        let plan = apply_round(
            &game,
            &game.empty_plan(),
            &Round::new(Move::play(0, vec![Action::start("x", "a")]), Move::play(0, vec![])),
        )
        .unwrap();
        assert_eq!(charlie_moves(&game, &plan).len(), 2);
        // At age 1 the token must end (skipping would overrun).
        let plan = apply_round(
            &game,
            &plan,
            &Round::new(Move::play(1, vec![]), Move::play(1, vec![])),
        )
        .unwrap();
        let moves = charlie_moves(&game, &plan);
        assert_eq!(moves.len(), 1);
        assert_eq!(moves[0].actions().len(), 1);
    }

    #[test]
    fn eve_can_react_to_a_started_uncontrollable_token() {
        let game = fixtures::three_values_game();
        let plan = game.empty_plan();
        let start_v1 = Move::play(0, vec![Action::start("x", "v1")]);
        let replies = eve_moves(&game, &plan, &start_v1);
        // Nothing, or end the fresh v1 token for a unit duration.
        assert_eq!(replies.len(), 2);
        assert!(replies.iter().any(|m| m.actions().is_empty()));
        assert!(replies.iter().any(|m| m.actions().len() == 1));
    }

    #[test]
    fn overrunning_eve_tokens_leave_her_no_moves() {
        let game = fixtures::three_values_game();
        // Open v1 token at age 10: ending gives 11, skipping overruns.
        let mut plan = apply_round(
            &game,
            &game.empty_plan(),
            &Round::new(Move::play(0, vec![Action::start("x", "v1")]), Move::play(0, vec![])),
        )
        .unwrap();
        for t in 1..=9 {
            plan = apply_round(
                &game,
                &plan,
                &Round::new(Move::play(t, vec![]), Move::play(t, vec![])),
            )
            .unwrap();
        }
        assert_eq!(plan.now(), 10);
        let mc = Move::play(10, vec![]);
        assert!(eve_moves(&game, &plan, &mc).is_empty());
    }

    #[test]
    fn no_wait_traces_advance_now_by_round_index() {
        let game = fixtures::gostop_game();
        let mut plan = game.empty_plan();
        for round_index in 0..5u64 {
            let mc = charlie_moves(&game, &plan).into_iter().next().unwrap();
            let me = eve_moves(&game, &plan, &mc).into_iter().next().unwrap();
            plan = apply_round(&game, &plan, &Round::new(mc, me)).unwrap();
            assert_eq!(plan.now(), round_index + 1);
        }
    }
}

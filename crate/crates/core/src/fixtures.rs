//! Bundled example problems and games used by tests, the CLI fixtures
//! and the documentation.

use std::collections::BTreeMap;

use crate::flexible::{FlexiblePlan, FlexibleTimeline, FlexibleToken, ProblemWithUncertainty};
use crate::game::Game;
use crate::model::{
    Controllability, ScheduledPlan, StateVariable, Timeline, Upper, ValueName, VarName,
};
use crate::rules::{
    duration_eq, duration_in, during, meets, starts_at, ExistentialStatement, Problem, Quantifier,
    SynchronizationRule, TokenName,
};

/// Builder for state variables used by fixtures and tests.
pub struct VariableBuilder {
    name: VarName,
    values: Vec<ValueName>,
    durations: BTreeMap<ValueName, (u64, Upper)>,
    controllability: BTreeMap<ValueName, Controllability>,
    transitions: BTreeMap<ValueName, Vec<ValueName>>,
}

impl VariableBuilder {
    pub fn new(name: impl Into<VarName>) -> Self {
        VariableBuilder {
            name: name.into(),
            values: Vec::new(),
            durations: BTreeMap::new(),
            controllability: BTreeMap::new(),
            transitions: BTreeMap::new(),
        }
    }

    pub fn value(
        mut self,
        value: impl Into<ValueName>,
        lower: u64,
        upper: Upper,
        tag: Controllability,
    ) -> Self {
        let value = value.into();
        self.values.push(value.clone());
        self.durations.insert(value.clone(), (lower, upper));
        self.controllability.insert(value, tag);
        self
    }

    pub fn transition(mut self, from: impl Into<ValueName>, to: &[&str]) -> Self {
        self.transitions
            .insert(from.into(), to.iter().map(|s| s.to_string()).collect());
        self
    }

    /// Allows every value to follow every value.
    pub fn transitions_free(mut self) -> Self {
        for value in &self.values {
            self.transitions.insert(value.clone(), self.values.clone());
        }
        self
    }

    pub fn build(self) -> StateVariable {
        let variable = StateVariable {
            name: self.name,
            values: self.values,
            transitions: self.transitions,
            durations: self.durations,
            controllability: self.controllability,
        };
        variable.validate().expect("fixture variable is valid");
        variable
    }
}

/// The single three-valued variable of the branching example. The
/// source material leaves the transition function unspecified; the
/// fixture allows every transition, a choice local to this fixture.
pub fn three_values_variable() -> StateVariable {
    VariableBuilder::new("x")
        .value("v1", 1, Upper::Finite(10), Controllability::Uncontrollable)
        .value("v2", 1, Upper::Finite(10), Controllability::Controllable)
        .value("v3", 1, Upper::Finite(10), Controllability::Controllable)
        .transitions_free()
        .build()
}

/// Rules of the branching example: a `v1` token must be followed
/// immediately by `v2` when short (duration at most 5) or by `v3` when
/// long (duration 6 to 10), and the plan must start with `v1` at 0.
pub fn three_values_rules() -> Vec<SynchronizationRule> {
    vec![
        SynchronizationRule {
            name: "branch".into(),
            trigger: Some(Quantifier::new("a", "x", "v1")),
            body: vec![
                ExistentialStatement {
                    quantified: vec![Quantifier::new("b", "x", "v2")],
                    clause: vec![meets("a", "b"), duration_in("a", 0, Upper::Finite(5))],
                },
                ExistentialStatement {
                    quantified: vec![Quantifier::new("c", "x", "v3")],
                    clause: vec![meets("a", "c"), duration_in("a", 6, Upper::Finite(10))],
                },
            ],
        },
        SynchronizationRule {
            name: "init".into(),
            trigger: None,
            body: vec![ExistentialStatement {
                quantified: vec![Quantifier::new("a", "x", "v1")],
                clause: vec![starts_at("a", 0)],
            }],
        },
    ]
}

pub fn three_values_problem() -> Problem {
    Problem::new(vec![three_values_variable()], three_values_rules())
}

/// The branching example as a game: the rules are system rules and
/// there are no domain rules.
pub fn three_values_game() -> Game {
    Game::new(vec![three_values_variable()], vec![], three_values_rules(), vec![])
        .expect("fixture game is well-typed")
}

/// The branching example as a problem with uncertainty: no external
/// variables, empty observation.
pub fn three_values_uncertainty() -> ProblemWithUncertainty {
    ProblemWithUncertainty {
        controlled: vec![three_values_variable()],
        external: vec![],
        rules: three_values_rules(),
        observation: FlexiblePlan::default(),
    }
}

fn gostop_variables() -> (StateVariable, StateVariable) {
    let x = VariableBuilder::new("x")
        .value("go", 1, Upper::Finite(1), Controllability::Controllable)
        .value("stop", 1, Upper::Finite(1), Controllability::Controllable)
        .transitions_free()
        .build();
    let y = VariableBuilder::new("y")
        .value("go", 1, Upper::Finite(1), Controllability::Uncontrollable)
        .value("stop", 1, Upper::Finite(1), Controllability::Uncontrollable)
        .transitions_free()
        .build();
    (x, y)
}

fn gostop_system_rules() -> Vec<SynchronizationRule> {
    vec![
        SynchronizationRule {
            name: "stop_after_env".into(),
            trigger: Some(Quantifier::new("a", "x", "stop")),
            body: vec![ExistentialStatement {
                quantified: vec![Quantifier::new("b", "y", "stop")],
                clause: vec![meets("b", "a")],
            }],
        },
        SynchronizationRule {
            name: "goal".into(),
            trigger: None,
            body: vec![ExistentialStatement {
                quantified: vec![Quantifier::new("a", "x", "stop")],
                clause: vec![],
            }],
        },
    ]
}

/// The go/stop game: the controller must realise `x = stop` right
/// after the environment realises `y = stop`, which the domain rule
/// guarantees to happen eventually.
pub fn gostop_game() -> Game {
    let (x, y) = gostop_variables();
    let domain = vec![SynchronizationRule {
        name: "env_stops".into(),
        trigger: None,
        body: vec![ExistentialStatement {
            quantified: vec![Quantifier::new("a", "y", "stop")],
            clause: vec![],
        }],
    }];
    Game::new(vec![x], vec![y], gostop_system_rules(), domain).expect("fixture game is well-typed")
}

/// The go/stop game stripped of its domain rule: the environment may
/// postpone `y = stop` forever, so no winning strategy exists.
pub fn gostop_game_no_domain() -> Game {
    let (x, y) = gostop_variables();
    Game::new(vec![x], vec![y], gostop_system_rules(), vec![]).expect("fixture game is well-typed")
}

/// The go/stop setting as a problem with uncertainty: the observation
/// pins `y = stop` as the first environment token.
pub fn gostop_uncertainty() -> ProblemWithUncertainty {
    let (x, y) = gostop_variables();
    let observation = FlexiblePlan::new(
        vec![FlexibleTimeline {
            variable: "y".into(),
            tokens: vec![FlexibleToken {
                name: TokenName::new("o0"),
                variable: "y".into(),
                value: "stop".into(),
                end_window: (1, 1),
                duration_window: (1, 1),
            }],
        }],
        vec![],
    );
    ProblemWithUncertainty {
        controlled: vec![x],
        external: vec![y],
        rules: gostop_system_rules(),
        observation,
    }
}

/// The camera example: an on/off camera and a direction that can only
/// stay still or move counterclockwise. Duration bounds not given by
/// the source material are filled with `[1, inf]`, a fixture-local
/// choice.
pub fn camera_problem() -> Problem {
    let cam = VariableBuilder::new("cam")
        .value("on", 1, Upper::Infinite, Controllability::Controllable)
        .value("off", 1, Upper::Infinite, Controllability::Controllable)
        .transition("on", &["off"])
        .transition("off", &["on"])
        .build();
    let dir = VariableBuilder::new("dir")
        .value("up", 1, Upper::Infinite, Controllability::Controllable)
        .value("left", 1, Upper::Infinite, Controllability::Controllable)
        .value("down", 1, Upper::Infinite, Controllability::Controllable)
        .value("right", 1, Upper::Infinite, Controllability::Controllable)
        .transition("up", &["up", "left"])
        .transition("left", &["left", "down"])
        .transition("down", &["down", "right"])
        .transition("right", &["right", "up"])
        .build();
    let mut shoot_down_clause = vec![duration_eq("a", 2)];
    shoot_down_clause.extend(during("a", "b"));
    let mut shoot_left_clause = vec![duration_eq("a", 3)];
    shoot_left_clause.extend(during("a", "b"));
    let rules = vec![
        SynchronizationRule {
            name: "cooldown".into(),
            trigger: Some(Quantifier::new("a", "cam", "on")),
            body: vec![ExistentialStatement {
                quantified: vec![Quantifier::new("b", "cam", "off")],
                clause: vec![meets("a", "b"), duration_in("b", 4, Upper::Infinite)],
            }],
        },
        SynchronizationRule {
            name: "shoot_down".into(),
            trigger: None,
            body: vec![ExistentialStatement {
                quantified: vec![
                    Quantifier::new("a", "cam", "on"),
                    Quantifier::new("b", "dir", "down"),
                ],
                clause: shoot_down_clause,
            }],
        },
        SynchronizationRule {
            name: "shoot_left".into(),
            trigger: None,
            body: vec![ExistentialStatement {
                quantified: vec![
                    Quantifier::new("a", "cam", "on"),
                    Quantifier::new("b", "dir", "left"),
                ],
                clause: shoot_left_clause,
            }],
        },
        SynchronizationRule {
            name: "init_up".into(),
            trigger: None,
            body: vec![ExistentialStatement {
                quantified: vec![Quantifier::new("a", "dir", "up")],
                clause: vec![starts_at("a", 0)],
            }],
        },
    ];
    Problem::new(vec![cam, dir], rules)
}

/// A hand-built solution plan for the camera problem.
pub fn camera_solution_plan() -> ScheduledPlan {
    ScheduledPlan {
        timelines: BTreeMap::from([
            (
                VarName::from("cam"),
                Timeline::from_tokens(
                    "cam",
                    [("off", 2), ("on", 2), ("off", 5), ("on", 3), ("off", 4)],
                ),
            ),
            (
                VarName::from("dir"),
                Timeline::from_tokens(
                    "dir",
                    [("up", 1), ("left", 1), ("down", 3), ("right", 2), ("up", 2), ("left", 7)],
                ),
            ),
        ]),
    }
}

/// The same plan with the first cooling gap shortened to 3: it
/// violates the cooldown rule and nothing else.
pub fn camera_broken_plan() -> ScheduledPlan {
    ScheduledPlan {
        timelines: BTreeMap::from([
            (
                VarName::from("cam"),
                Timeline::from_tokens(
                    "cam",
                    [("off", 2), ("on", 2), ("off", 3), ("on", 3), ("off", 4)],
                ),
            ),
            (
                VarName::from("dir"),
                Timeline::from_tokens(
                    "dir",
                    [("up", 1), ("left", 1), ("down", 3), ("right", 1), ("up", 1), ("left", 7)],
                ),
            ),
        ]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{is_solution_plan, solution_violations, MatchOptions, SolutionViolation};

    #[test]
    fn three_values_fixture_validates() {
        assert_eq!(three_values_problem().validate(), Ok(()));
    }

    #[test]
    fn camera_solution_plan_is_a_solution() {
        let problem = camera_problem();
        assert_eq!(is_solution_plan(&problem, &camera_solution_plan()), Ok(true));
    }

    #[test]
    fn camera_broken_plan_fails_only_the_cooldown_rule() {
        let problem = camera_problem();
        let violations =
            solution_violations(&problem, &camera_broken_plan(), MatchOptions::default()).unwrap();
        assert_eq!(
            violations,
            vec![SolutionViolation::RuleUnsatisfied { rule: "cooldown".into() }]
        );
    }

    #[test]
    fn three_values_short_plan_is_a_solution() {
        let problem = three_values_problem();
        let plan = ScheduledPlan {
            timelines: BTreeMap::from([(
                VarName::from("x"),
                Timeline::from_tokens("x", [("v1", 4), ("v2", 1)]),
            )]),
        };
        assert_eq!(is_solution_plan(&problem, &plan), Ok(true));
    }

    #[test]
    fn three_values_long_plan_with_v2_is_not_a_solution() {
        let problem = three_values_problem();
        let plan = ScheduledPlan {
            timelines: BTreeMap::from([(
                VarName::from("x"),
                Timeline::from_tokens("x", [("v1", 7), ("v2", 1)]),
            )]),
        };
        assert_eq!(is_solution_plan(&problem, &plan), Ok(false));
    }

    #[test]
    fn zero_duration_and_overlong_tokens_are_rejected() {
        let problem = three_values_problem();
        let zero = ScheduledPlan {
            timelines: BTreeMap::from([(
                VarName::from("x"),
                Timeline::from_tokens("x", [("v1", 4), ("v2", 0)]),
            )]),
        };
        assert_eq!(is_solution_plan(&problem, &zero), Ok(false));
        let overlong = ScheduledPlan {
            timelines: BTreeMap::from([(
                VarName::from("x"),
                Timeline::from_tokens("x", [("v1", 4), ("v2", 11)]),
            )]),
        };
        assert_eq!(is_solution_plan(&problem, &overlong), Ok(false));
    }
}

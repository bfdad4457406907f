//! The game window and the derived saturation horizons used by the
//! succinct abstraction.

use crate::game::Game;
use crate::model::Upper;
use crate::rules::AtomRhs;

/// The window of a game: the product of all non-zero lower and upper
/// bounds of every bounded atom of every rule, and of all non-zero
/// finite duration bounds of every value. The empty product is 1.
/// Infinite bounds contribute nothing.
pub fn window(game: &Game) -> u64 {
    let mut product: u64 = 1;
    let mut fold = |n: u64| {
        if n != 0 {
            product = product.saturating_mul(n);
        }
    };
    for rule in game.domain_rules().iter().chain(game.system_rules()) {
        for statement in &rule.body {
            for atom in &statement.clause {
                if let Upper::Finite(u) = atom.bounds.upper {
                    fold(atom.bounds.lower);
                    fold(u);
                }
            }
        }
    }
    for variable in game.variables() {
        for value in &variable.values {
            let (lo, hi) = variable.duration_bounds(value);
            fold(lo);
            if let Upper::Finite(h) = hi {
                fold(h);
            }
        }
    }
    product
}

/// Saturation horizons for the abstraction: ages beyond `age_sat` and
/// clock values beyond `clock_sat` are indistinguishable, because no
/// bounded atom, duration bound or pointwise instant can tell them
/// apart any more.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Horizons {
    /// Largest finite atom bound (lower or upper) in any rule.
    pub max_bound: u64,
    /// Largest finite duration bound of any value.
    pub max_duration: u64,
    /// Largest instant mentioned by a pointwise atom.
    pub max_instant: u64,
    /// Endpoint ages saturate here.
    pub age_sat: u64,
    /// The absolute clock saturates here.
    pub clock_sat: u64,
}

pub fn horizons(game: &Game) -> Horizons {
    let mut max_bound = 0u64;
    let mut max_instant = 0u64;
    for rule in game.domain_rules().iter().chain(game.system_rules()) {
        for statement in &rule.body {
            for atom in &statement.clause {
                max_bound = max_bound.max(atom.bounds.lower);
                if let Upper::Finite(u) = atom.bounds.upper {
                    max_bound = max_bound.max(u);
                }
                if let AtomRhs::Instant(t) = atom.right {
                    max_instant = max_instant.max(t);
                }
            }
        }
    }
    let mut max_duration = 0u64;
    for variable in game.variables() {
        for value in &variable.values {
            let (lo, hi) = variable.duration_bounds(value);
            max_duration = max_duration.max(lo);
            if let Upper::Finite(h) = hi {
                max_duration = max_duration.max(h);
            }
        }
    }
    let age_sat = max_bound.max(max_duration) + 4;
    let clock_sat = max_instant + max_bound + age_sat + 1;
    Horizons { max_bound, max_duration, max_instant, age_sat, clock_sat }
}

//! Solver placeholder while the module is being built.
pub fn window(_game: &crate::game::Game) -> u64 {
    1
}

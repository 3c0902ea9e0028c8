//! Bundled substitution systems, parsed from the `.sys` files shipped with
//! the crate (see the `systems/` directory).
//!
//! * `penrose`: the four-triangle Penrose subdivision, λ = φ, with side
//!   ratios 1 : φ : φ². Labels `a`, `b` (small triangles) and `c`, `d`
//!   (large ones).
//! * `square4`: a unit square quartered into four half-scale squares, λ = 2.
//! * `halfsquare`: a right isosceles triangle halved by the altitude onto
//!   the hypotenuse, λ = √2; one child placement reflects, the other rotates.
//! * `pinwheel`: the 1-2-√5 right triangle cut into five unit copies,
//!   λ = √5; every child placement is orientation-reversing.

use crate::scalar::Real;
use crate::substitution::SubstitutionSystem;
use crate::sysfile::parse_system;

pub const PENROSE_SYS: &str = include_str!("../systems/penrose.sys");
pub const SQUARE4_SYS: &str = include_str!("../systems/square4.sys");
pub const HALFSQUARE_SYS: &str = include_str!("../systems/halfsquare.sys");
pub const PINWHEEL_SYS: &str = include_str!("../systems/pinwheel.sys");

pub fn penrose<R: Real>() -> SubstitutionSystem<R> {
    parse_system(PENROSE_SYS).expect("bundled penrose system is valid")
}

pub fn square4<R: Real>() -> SubstitutionSystem<R> {
    parse_system(SQUARE4_SYS).expect("bundled square4 system is valid")
}

pub fn halfsquare<R: Real>() -> SubstitutionSystem<R> {
    parse_system(HALFSQUARE_SYS).expect("bundled halfsquare system is valid")
}

pub fn pinwheel<R: Real>() -> SubstitutionSystem<R> {
    parse_system(PINWHEEL_SYS).expect("bundled pinwheel system is valid")
}

/// Source text of a bundled system by name.
pub fn builtin_source(name: &str) -> Option<&'static str> {
    match name {
        "penrose" => Some(PENROSE_SYS),
        "square4" => Some(SQUARE4_SYS),
        "halfsquare" => Some(HALFSQUARE_SYS),
        "pinwheel" => Some(PINWHEEL_SYS),
        _ => None,
    }
}

pub fn builtin_names() -> &'static [&'static str] {
    &["penrose", "square4", "halfsquare", "pinwheel"]
}

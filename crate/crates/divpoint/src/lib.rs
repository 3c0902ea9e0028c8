//! Primitive polygon substitutions in the plane and their division-point
//! measures.
//!
//! The library builds substitution systems (a finite prototile set, a scale
//! factor λ and per-prototile subdivision rules), iterates them into tile
//! patches, and constructs three families of atomic probability measures on
//! the union of the prototiles: point masses at tile punctures (ξ), at tile
//! vertices counted per incidence (ρ), and at distinct vertices (σ). The
//! substitution matrix with its Perron-Frobenius eigendata provides exact
//! counting oracles, and a stationary edge diagram with cylinder-set weights
//! realizes the same areas combinatorially. All of it exists to check, at
//! finite depth, that the three measure families approach the area measure.
//!
//! Core math is generic over the coordinate scalar via [`scalar::Real`];
//! `f64` aliases for the main types live at the crate root.

pub mod bratteli;
pub mod export;
pub mod expr;
pub mod geometry;
pub mod measures;
pub mod scalar;
pub mod spectral;
pub mod substitution;
pub mod sysfile;
pub mod systems;

pub use scalar::Real;

/// `f64` aliases for the common types.
pub type Point64 = geometry::Point<f64>;
pub type Polygon64 = geometry::Polygon<f64>;
pub type Isometry64 = geometry::Isometry<f64>;
pub type System64 = substitution::SubstitutionSystem<f64>;
pub type Tile64 = substitution::Tile<f64>;
pub type PatchLevel64 = substitution::PatchLevel<f64>;
pub type SpectralData64 = spectral::SpectralData<f64>;
pub type Measure64 = measures::DiscreteMeasure<f64>;

#[cfg(test)]
mod tests {
    use super::*;

    // everything is immutable after construction and shareable across threads
    #[test]
    fn core_types_are_send_and_sync() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<System64>();
        assert_send_sync::<PatchLevel64>();
        assert_send_sync::<Tile64>();
        assert_send_sync::<SpectralData64>();
        assert_send_sync::<Measure64>();
        assert_send_sync::<bratteli::BratteliDiagram>();
    }
}

//! Substitution systems and their iterated tile patches.
//!
//! A system is a finite prototile set with disjoint supports and total area
//! 1, a scale λ > 1, and per-prototile child placements mapping prototile
//! copies into the λ-inflated parent. Level `k` is the patch obtained
//! by substituting `k` times and rescaling by `λ^{-k}`, so every level keeps
//! the union of the prototiles as its support.
//!
//! Tiles are addressed by their root prototile and the sequence of child
//! indices taken at each subdivision step; generation composes one
//! contraction per digit, which keeps all coordinates inside the support.

use std::fmt;

use thiserror::Error;

use crate::geometry::{
    apply_isometry, apply_similarity, Isometry, Location, Point, Polygon, Similarity,
};
use crate::scalar::{cast, Real};

/// Relative tolerance for the validation area bookkeeping.
pub const AREA_TOL: f64 = 1e-9;
/// Default ceiling on generated tiles per level.
pub const DEFAULT_MAX_TILES: u64 = 5_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SystemError {
    #[error("a system needs at least one prototile")]
    NoPrototiles,
    #[error("duplicate prototile label {0:?}")]
    DuplicateLabel(String),
    #[error("lambda must be a finite number > 1, got {0}")]
    BadLambda(f64),
    #[error("puncture of prototile {0:?} is not strictly inside its shape")]
    PunctureOutside(String),
    #[error("rule for prototile {0:?} is empty")]
    EmptyRule(String),
    #[error("rule for prototile {parent:?} has more than 255 children")]
    RuleTooLong { parent: String },
    #[error("rule for prototile {parent:?} references child index {child} out of range")]
    BadChildIndex { parent: String, child: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerateError {
    #[error("level {level} would contain {projected} tiles, over the cap of {cap}")]
    DepthCap {
        level: usize,
        projected: u64,
        cap: u64,
    },
    #[error("tile of type {ptype} does not belong to this system")]
    ForeignTile { ptype: usize },
    #[error("target level {target} is below the tile level {current}")]
    LevelBelowTile { target: usize, current: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AddressError {
    #[error("unknown prototile label {0:?}")]
    UnknownLabel(String),
    #[error("malformed digit {0:?}")]
    BadDigit(String),
    #[error("digit {digit} out of range at position {position} (rule has {len} children)")]
    DigitOutOfRange {
        digit: usize,
        position: usize,
        len: usize,
    },
}

/// One labeled reference polygon with a distinguished interior point.
#[derive(Debug, Clone)]
pub struct Prototile<R> {
    pub label: String,
    pub shape: Polygon<R>,
    pub puncture: Point<R>,
}

/// One child of a subdivision rule: prototile `child` placed into the
/// inflated parent by `placement` (an isometry, possibly reflecting).
#[derive(Debug, Clone)]
pub struct ChildPlacement<R> {
    pub child: usize,
    pub placement: Isometry<R>,
}

/// Address of a tile: root prototile plus one child index per level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TileAddress {
    pub root: usize,
    pub digits: Vec<u8>,
}

impl TileAddress {
    pub fn root(root: usize) -> Self {
        TileAddress {
            root,
            digits: Vec::new(),
        }
    }

    pub fn level(&self) -> usize {
        self.digits.len()
    }

    pub fn child(&self, digit: u8) -> Self {
        let mut digits = Vec::with_capacity(self.digits.len() + 1);
        digits.extend_from_slice(&self.digits);
        digits.push(digit);
        TileAddress {
            root: self.root,
            digits,
        }
    }

    pub fn is_prefix_of(&self, other: &TileAddress) -> bool {
        self.root == other.root
            && self.digits.len() <= other.digits.len()
            && other.digits[..self.digits.len()] == self.digits[..]
    }

    /// Renders as `label/d1.d2.…` (bare `label` at level 0).
    pub fn display<R: Real>(&self, sys: &SubstitutionSystem<R>) -> String {
        let label = &sys.prototiles()[self.root].label;
        if self.digits.is_empty() {
            label.clone()
        } else {
            let digits: Vec<String> = self.digits.iter().map(|d| d.to_string()).collect();
            format!("{}/{}", label, digits.join("."))
        }
    }

    /// Parses `label` or `label/d1.d2.…`, checking every digit against the
    /// rule of the prototile reached at that step.
    pub fn parse<R: Real>(sys: &SubstitutionSystem<R>, text: &str) -> Result<Self, AddressError> {
        let (label, rest) = match text.split_once('/') {
            Some((l, r)) => (l, r),
            None => (text, ""),
        };
        let root = sys
            .prototile_index(label)
            .ok_or_else(|| AddressError::UnknownLabel(label.to_string()))?;
        let mut digits = Vec::new();
        let mut ptype = root;
        if !rest.is_empty() {
            for (position, part) in rest.split('.').enumerate() {
                let digit: usize = part
                    .parse()
                    .map_err(|_| AddressError::BadDigit(part.to_string()))?;
                let len = sys.rules()[ptype].len();
                if digit >= len {
                    return Err(AddressError::DigitOutOfRange {
                        digit,
                        position,
                        len,
                    });
                }
                ptype = sys.rules()[ptype][digit].child;
                digits.push(digit as u8);
            }
        }
        Ok(TileAddress { root, digits })
    }
}

/// A tile of some level: an addressed, scaled isometric copy of a prototile.
#[derive(Debug, Clone)]
pub struct Tile<R> {
    pub address: TileAddress,
    pub ptype: usize,
    pub placement: Similarity<R>,
}

impl<R: Real> Tile<R> {
    pub fn level(&self) -> usize {
        self.address.level()
    }

    /// `λ^{-k}` for a level-`k` tile.
    pub fn scale(&self) -> R {
        self.placement.scale
    }

    /// Geometry is computed lazily from the placement.
    pub fn polygon(&self, sys: &SubstitutionSystem<R>) -> Polygon<R> {
        apply_similarity(&self.placement, &sys.prototiles()[self.ptype].shape)
    }

    pub fn puncture(&self, sys: &SubstitutionSystem<R>) -> Point<R> {
        self.placement.apply(sys.prototiles()[self.ptype].puncture)
    }

    pub fn area(&self, sys: &SubstitutionSystem<R>) -> R {
        self.placement.scale * self.placement.scale * sys.prototiles()[self.ptype].shape.area()
    }
}

/// All tiles of one level, in lexicographic address order.
#[derive(Debug, Clone)]
pub struct PatchLevel<R> {
    pub level: usize,
    pub tiles: Vec<Tile<R>>,
}

impl<R: Real> PatchLevel<R> {
    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    /// Tile counts per prototile type.
    pub fn type_histogram(&self, n_types: usize) -> Vec<u64> {
        let mut h = vec![0u64; n_types];
        for t in &self.tiles {
            h[t.ptype] += 1;
        }
        h
    }
}

/// Geometric health report for a system; see [`SubstitutionSystem::validate`].
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub prototiles: Vec<PrototileCheck>,
    /// Largest pairwise overlap area between prototile supports.
    pub support_overlap: f64,
    /// `|Σ areas − 1|`.
    pub total_area_gap: f64,
    pub area_tol: f64,
}

#[derive(Debug, Clone)]
pub struct PrototileCheck {
    pub label: String,
    /// `|Σ child areas − λ²·area| / (λ²·area)`.
    pub area_residual: f64,
    /// Largest pairwise child overlap, relative to `λ²·area`.
    pub max_child_overlap: f64,
    /// Child polygon vertices falling outside the inflated parent.
    pub vertices_outside: usize,
    /// Uncovered area of the inflated parent estimated by
    /// inclusion-exclusion, relative to `λ²·area`.
    pub coverage_deficit: f64,
}

impl PrototileCheck {
    pub fn passed(&self, tol: f64) -> bool {
        self.area_residual <= tol
            && self.max_child_overlap <= tol
            && self.vertices_outside == 0
            && self.coverage_deficit <= tol
    }
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.support_overlap <= self.area_tol
            && self.total_area_gap <= self.area_tol
            && self.prototiles.iter().all(|p| p.passed(self.area_tol))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "support overlap {:.3e}  total area gap {:.3e}  (tolerance {:.1e})",
            self.support_overlap, self.total_area_gap, self.area_tol
        )?;
        for p in &self.prototiles {
            writeln!(
                f,
                "  {:>8}: area residual {:.3e}  child overlap {:.3e}  vertices outside {}  coverage deficit {:.3e}  [{}]",
                p.label,
                p.area_residual,
                p.max_child_overlap,
                p.vertices_outside,
                p.coverage_deficit,
                if p.passed(self.area_tol) { "ok" } else { "FAIL" }
            )?;
        }
        writeln!(
            f,
            "verdict: {}",
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

/// A validated-on-construction substitution system. Immutable afterwards;
/// all generation methods take `&self` and are safe to share across threads.
#[derive(Debug, Clone)]
pub struct SubstitutionSystem<R> {
    name: String,
    prototiles: Vec<Prototile<R>>,
    lambda: R,
    rules: Vec<Vec<ChildPlacement<R>>>,
    /// Minimum edge length over all prototiles (the quantity 𝔡).
    d_min: R,
    /// Diameter of the union of the prototile supports.
    diameter: R,
    /// Vertex unification pitch: `1e-7 ×` diameter.
    eps_merge: R,
    max_tiles: u64,
}

impl<R: Real> SubstitutionSystem<R> {
    /// Structural assembly: label/index/shape plumbing checks. Geometric
    /// correctness of the rules is a separate concern, see [`Self::validate`].
    pub fn assemble(
        name: impl Into<String>,
        prototiles: Vec<Prototile<R>>,
        lambda: R,
        rules: Vec<Vec<ChildPlacement<R>>>,
    ) -> Result<Self, SystemError> {
        if prototiles.is_empty() {
            return Err(SystemError::NoPrototiles);
        }
        if !(lambda.is_finite() && lambda > R::one()) {
            return Err(SystemError::BadLambda(lambda.to_f64().unwrap_or(f64::NAN)));
        }
        for (i, p) in prototiles.iter().enumerate() {
            if prototiles[..i].iter().any(|q| q.label == p.label) {
                return Err(SystemError::DuplicateLabel(p.label.clone()));
            }
            let eps = p.shape.diameter() * cast(1e-12);
            if p.shape.locate(p.puncture, eps) != Location::Inside {
                return Err(SystemError::PunctureOutside(p.label.clone()));
            }
        }
        assert_eq!(rules.len(), prototiles.len(), "one rule per prototile");
        for (j, rule) in rules.iter().enumerate() {
            let parent = &prototiles[j].label;
            if rule.is_empty() {
                return Err(SystemError::EmptyRule(parent.clone()));
            }
            if rule.len() > u8::MAX as usize + 1 {
                return Err(SystemError::RuleTooLong {
                    parent: parent.clone(),
                });
            }
            for placement in rule {
                if placement.child >= prototiles.len() {
                    return Err(SystemError::BadChildIndex {
                        parent: parent.clone(),
                        child: placement.child,
                    });
                }
            }
        }
        let d_min = prototiles
            .iter()
            .map(|p| p.shape.min_edge_length())
            .fold(R::infinity(), R::min);
        let mut diameter = R::zero();
        let all_vertices: Vec<Point<R>> = prototiles
            .iter()
            .flat_map(|p| p.shape.vertices().iter().copied())
            .collect();
        for (i, &p) in all_vertices.iter().enumerate() {
            for &q in &all_vertices[i + 1..] {
                diameter = diameter.max(p.distance(q));
            }
        }
        let eps_merge = diameter * cast(1e-7);
        Ok(SubstitutionSystem {
            name: name.into(),
            prototiles,
            lambda,
            rules,
            d_min,
            diameter,
            eps_merge,
            max_tiles: DEFAULT_MAX_TILES,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn prototiles(&self) -> &[Prototile<R>] {
        &self.prototiles
    }

    pub fn lambda(&self) -> R {
        self.lambda
    }

    pub fn rules(&self) -> &[Vec<ChildPlacement<R>>] {
        &self.rules
    }

    /// Minimum prototile edge length (𝔡).
    pub fn min_edge(&self) -> R {
        self.d_min
    }

    pub fn diameter(&self) -> R {
        self.diameter
    }

    pub fn eps_merge(&self) -> R {
        self.eps_merge
    }

    pub fn max_tiles(&self) -> u64 {
        self.max_tiles
    }

    /// Adjusts the per-level tile cap.
    pub fn with_max_tiles(mut self, cap: u64) -> Self {
        self.max_tiles = cap;
        self
    }

    pub fn prototile_index(&self, label: &str) -> Option<usize> {
        self.prototiles.iter().position(|p| p.label == label)
    }

    /// Geometric validation of the subdivision rules: per prototile the
    /// children must tile the inflated parent (area bookkeeping, pairwise
    /// overlaps, vertex containment), prototile supports must be pairwise
    /// interior-disjoint, and the total area must be 1. Failures are
    /// reported, not thrown, so callers can print diagnostics.
    pub fn validate(&self) -> ValidationReport {
        let lambda2 = self.lambda * self.lambda;
        let mut checks = Vec::with_capacity(self.prototiles.len());
        for (j, proto) in self.prototiles.iter().enumerate() {
            let inflated = apply_similarity(
                &Similarity {
                    iso: Isometry::identity(),
                    scale: self.lambda,
                },
                &proto.shape,
            );
            let target_area = (lambda2 * proto.shape.area()).to_f64().unwrap();
            let children: Vec<Polygon<R>> = self.rules[j]
                .iter()
                .map(|cp| apply_isometry(&cp.placement, &self.prototiles[cp.child].shape))
                .collect();
            let area_sum: f64 = children.iter().map(|c| c.area().to_f64().unwrap()).sum();
            let mut overlap_sum = 0.0f64;
            let mut max_overlap = 0.0f64;
            for (a, ca) in children.iter().enumerate() {
                for cb in &children[a + 1..] {
                    let o = ca.intersection_area(cb).to_f64().unwrap();
                    overlap_sum += o;
                    max_overlap = max_overlap.max(o);
                }
            }
            let boundary_eps = self.eps_merge * self.lambda;
            let vertices_outside = children
                .iter()
                .flat_map(|c| c.vertices())
                .filter(|&&v| inflated.locate(v, boundary_eps) == Location::Outside)
                .count();
            let deficit = (target_area - (area_sum - overlap_sum)).max(0.0);
            checks.push(PrototileCheck {
                label: proto.label.clone(),
                area_residual: (area_sum - target_area).abs() / target_area,
                max_child_overlap: max_overlap / target_area,
                vertices_outside,
                coverage_deficit: deficit / target_area,
            });
        }
        let mut support_overlap = 0.0f64;
        for (i, p) in self.prototiles.iter().enumerate() {
            for q in &self.prototiles[i + 1..] {
                support_overlap =
                    support_overlap.max(p.shape.intersection_area(&q.shape).to_f64().unwrap());
            }
        }
        let total: f64 = self
            .prototiles
            .iter()
            .map(|p| p.shape.area().to_f64().unwrap())
            .sum();
        ValidationReport {
            prototiles: checks,
            support_overlap,
            total_area_gap: (total - 1.0).abs(),
            area_tol: AREA_TOL,
        }
    }

    /// Smallest `M` such that `M`-fold substitution of any prototile contains
    /// a copy of every prototile; `None` when the system is not primitive.
    pub fn primitivity_exponent(&self) -> Option<usize> {
        crate::spectral::primitivity_exponent(&crate::spectral::build_matrix(self))
    }

    /// Contraction realizing child `d` of prototile `j`: the placement
    /// composed with scaling by `λ^{-1}`, mapping the support of a tile to
    /// the support of its `d`-th child at the next level.
    fn contraction(&self, j: usize, d: usize) -> Similarity<R> {
        let g = &self.rules[j][d].placement;
        Similarity {
            iso: Isometry {
                linear: g.linear,
                translation: g.translation * (R::one() / self.lambda),
                orientation_reversing: g.orientation_reversing,
            },
            scale: R::one() / self.lambda,
        }
    }

    /// The level-0 patch: the prototiles themselves.
    pub fn roots(&self) -> PatchLevel<R> {
        PatchLevel {
            level: 0,
            tiles: (0..self.prototiles.len())
                .map(|i| Tile {
                    address: TileAddress::root(i),
                    ptype: i,
                    placement: Similarity::identity(),
                })
                .collect(),
        }
    }

    fn expand(&self, tiles: &[Tile<R>], next_level: usize) -> Result<Vec<Tile<R>>, GenerateError> {
        let projected: u64 = tiles
            .iter()
            .map(|t| self.rules[t.ptype].len() as u64)
            .sum();
        if projected > self.max_tiles {
            return Err(GenerateError::DepthCap {
                level: next_level,
                projected,
                cap: self.max_tiles,
            });
        }
        let mut out = Vec::with_capacity(projected as usize);
        for tile in tiles {
            for (d, placement) in self.rules[tile.ptype].iter().enumerate() {
                out.push(Tile {
                    address: tile.address.child(d as u8),
                    ptype: placement.child,
                    placement: tile.placement.compose(&self.contraction(tile.ptype, d)),
                });
            }
        }
        Ok(out)
    }

    /// One subdivision step.
    pub fn refine(&self, level: &PatchLevel<R>) -> Result<PatchLevel<R>, GenerateError> {
        Ok(PatchLevel {
            level: level.level + 1,
            tiles: self.expand(&level.tiles, level.level + 1)?,
        })
    }

    /// The full level-`k` patch.
    pub fn generate_level(&self, k: usize) -> Result<PatchLevel<R>, GenerateError> {
        let mut level = self.roots();
        for _ in 0..k {
            level = self.refine(&level)?;
        }
        Ok(level)
    }

    /// The level-`k` tiles whose addresses extend `tile.address`.
    pub fn subtiles_of(&self, tile: &Tile<R>, k: usize) -> Result<Vec<Tile<R>>, GenerateError> {
        if tile.ptype >= self.prototiles.len() {
            return Err(GenerateError::ForeignTile { ptype: tile.ptype });
        }
        if k < tile.level() {
            return Err(GenerateError::LevelBelowTile {
                target: k,
                current: tile.level(),
            });
        }
        let mut tiles = vec![tile.clone()];
        for step in tile.level()..k {
            tiles = self.expand(&tiles, step + 1)?;
        }
        Ok(tiles)
    }

    /// Resolves an address to its tile by composing one contraction per digit.
    pub fn tile_at(&self, address: &TileAddress) -> Result<Tile<R>, AddressError> {
        if address.root >= self.prototiles.len() {
            return Err(AddressError::UnknownLabel(format!("#{}", address.root)));
        }
        let mut ptype = address.root;
        let mut placement = Similarity::identity();
        for (position, &d) in address.digits.iter().enumerate() {
            let digit = d as usize;
            let len = self.rules[ptype].len();
            if digit >= len {
                return Err(AddressError::DigitOutOfRange {
                    digit,
                    position,
                    len,
                });
            }
            placement = placement.compose(&self.contraction(ptype, digit));
            ptype = self.rules[ptype][digit].child;
        }
        Ok(Tile {
            address: address.clone(),
            ptype,
            placement,
        })
    }

    /// Tiles of a level whose closed support meets the region `U`.
    pub fn tiles_meeting_region<'a>(
        &self,
        level: &'a PatchLevel<R>,
        region: &Polygon<R>,
    ) -> Vec<&'a Tile<R>> {
        let area_eps = self.eps_merge * self.eps_merge;
        level
            .tiles
            .iter()
            .filter(|t| {
                let poly = t.polygon(self);
                poly.intersection_area(region) > area_eps
                    || poly.boundary_distance(region) <= self.eps_merge
            })
            .collect()
    }
}

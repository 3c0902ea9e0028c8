//! The division-point measures ξ_k, ρ_k and σ_k.
//!
//! All three are finite atomic probability measures on the union of the
//! prototiles, built from the level-`k` patch:
//!
//! * ξ_k: one atom per tile at its puncture, uniform weight 1/(tile count);
//! * ρ_k: one atom per distinct vertex, weighted by the number of tiles
//!   incident to it, normalized by the total incidence count `vᵀAᵏ1`;
//! * σ_k: one atom per distinct vertex, uniform weight
//!   1/(distinct vertex count).
//!
//! Weights are exact rationals: every atom carries an integer numerator over
//! a common denominator, so golden values like `5/26` can be asserted
//! without rounding. Floating point enters only when a weight is evaluated.

use std::fmt;
use std::io::{self, Write};

use num_rational::Ratio;
use thiserror::Error;

use crate::geometry::{Location, Point, Polygon, VertexMerger};
use crate::scalar::{cast, Real};
use crate::spectral::SpectralData;
use crate::substitution::{
    AddressError, GenerateError, PatchLevel, SubstitutionSystem, Tile, TileAddress,
};

/// Which of the three measure families an object belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    Xi,
    Rho,
    Sigma,
}

impl MeasureKind {
    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::Xi => "xi",
            MeasureKind::Rho => "rho",
            MeasureKind::Sigma => "sigma",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Whether atoms sitting on the boundary of a region count toward it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryPolicy {
    /// Treat the region as closed (the bookkeeping used by the tile-count
    /// identities, and the default).
    #[default]
    Include,
    /// Treat the region as open.
    Exclude,
}

/// One weighted point mass: `numerator / measure.denominator` at `position`.
#[derive(Debug, Clone, Copy)]
pub struct Atom<R> {
    pub position: Point<R>,
    pub numerator: u64,
}

/// A finite atomic probability measure with exact rational weights.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure<R> {
    pub kind: MeasureKind,
    pub level: usize,
    /// Common denominator of all atom weights.
    pub denominator: u64,
    /// Boundary tolerance inherited from the system (`ε_merge`).
    pub eps: R,
    pub atoms: Vec<Atom<R>>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Address(#[from] AddressError),
    #[error("edge index {index} out of range for a {len}-gon")]
    EdgeIndex { index: usize, len: usize },
}

impl<R: Real> DiscreteMeasure<R> {
    /// Total mass as an exact rational (1 by construction).
    pub fn total_exact(&self) -> Ratio<u64> {
        let sum: u64 = self.atoms.iter().map(|a| a.numerator).sum();
        Ratio::new(sum, self.denominator)
    }

    pub fn weight_real(&self, atom: &Atom<R>) -> R {
        cast::<R>(atom.numerator as f64) / cast(self.denominator as f64)
    }

    /// Largest atom numerator; for ρ this is the maximal number of tiles
    /// meeting one vertex.
    pub fn max_numerator(&self) -> u64 {
        self.atoms.iter().map(|a| a.numerator).max().unwrap_or(0)
    }

    fn select<'a>(
        &'a self,
        region: &'a Polygon<R>,
        policy: BoundaryPolicy,
    ) -> impl Iterator<Item = &'a Atom<R>> + 'a {
        // bounding-box rejection before the full classification; levels can
        // carry hundreds of thousands of atoms per region query
        let (lo, hi) = region.bounding_box();
        let (lo, hi) = (
            lo - Point::new(self.eps, self.eps),
            hi + Point::new(self.eps, self.eps),
        );
        self.atoms.iter().filter(move |a| {
            let p = a.position;
            if p.x < lo.x || p.x > hi.x || p.y < lo.y || p.y > hi.y {
                return false;
            }
            match region.locate(p, self.eps) {
                Location::Inside => true,
                Location::Boundary => policy == BoundaryPolicy::Include,
                Location::Outside => false,
            }
        })
    }

    /// Measure of a polygonal region, exactly.
    pub fn evaluate_exact(&self, region: &Polygon<R>, policy: BoundaryPolicy) -> Ratio<u64> {
        let sum: u64 = self.select(region, policy).map(|a| a.numerator).sum();
        Ratio::new(sum, self.denominator)
    }

    /// Measure of a polygonal region.
    pub fn evaluate(&self, region: &Polygon<R>, policy: BoundaryPolicy) -> R {
        let sum: u64 = self.select(region, policy).map(|a| a.numerator).sum();
        cast::<R>(sum as f64) / cast(self.denominator as f64)
    }

    /// Mass carried by atoms lying on a segment (within the merge tolerance).
    pub fn evaluate_on_edge_exact(&self, edge: &EdgeRef<R>) -> Ratio<u64> {
        let (a, b) = edge.segment;
        let sum: u64 = self
            .atoms
            .iter()
            .filter(|at| at.position.distance_to_segment(a, b) <= self.eps)
            .map(|at| at.numerator)
            .sum();
        Ratio::new(sum, self.denominator)
    }

    pub fn evaluate_on_edge(&self, edge: &EdgeRef<R>) -> R {
        let v = self.evaluate_on_edge_exact(edge);
        cast::<R>(*v.numer() as f64) / cast(*v.denom() as f64)
    }
}

/// An edge of a tile, addressed by tile and edge index.
#[derive(Debug, Clone)]
pub struct EdgeRef<R> {
    pub address: TileAddress,
    pub edge_index: usize,
    pub segment: (Point<R>, Point<R>),
}

impl<R: Real> EdgeRef<R> {
    pub fn resolve(
        sys: &SubstitutionSystem<R>,
        address: TileAddress,
        edge_index: usize,
    ) -> Result<Self, MeasureError> {
        let tile = sys.tile_at(&address)?;
        let poly = tile.polygon(sys);
        let segment = poly
            .edge(edge_index)
            .ok_or(MeasureError::EdgeIndex {
                index: edge_index,
                len: poly.vertices().len(),
            })?;
        Ok(EdgeRef {
            address,
            edge_index,
            segment,
        })
    }

    pub fn length(&self) -> R {
        self.segment.0.distance(self.segment.1)
    }

    pub fn display(&self, sys: &SubstitutionSystem<R>) -> String {
        format!("{}:{}", self.address.display(sys), self.edge_index)
    }
}

/// ξ_k: one atom per tile at its puncture, weight 1/(tile count).
pub fn build_xi<R: Real>(sys: &SubstitutionSystem<R>, level: &PatchLevel<R>) -> DiscreteMeasure<R> {
    let atoms = level
        .tiles
        .iter()
        .map(|t| Atom {
            position: t.puncture(sys),
            numerator: 1,
        })
        .collect();
    DiscreteMeasure {
        kind: MeasureKind::Xi,
        level: level.level,
        denominator: level.tiles.len() as u64,
        eps: sys.eps_merge(),
        atoms,
    }
}

/// Unified patch vertices with per-vertex tile incidence counts.
fn merged_vertices<R: Real>(
    sys: &SubstitutionSystem<R>,
    level: &PatchLevel<R>,
) -> (VertexMerger<R>, Vec<u64>) {
    let mut merger = VertexMerger::new(sys.eps_merge());
    let mut counts: Vec<u64> = Vec::new();
    for tile in &level.tiles {
        for &v in tile.polygon(sys).vertices() {
            let id = merger.insert(v);
            if id == counts.len() {
                counts.push(0);
            }
            counts[id] += 1;
        }
    }
    (merger, counts)
}

/// ρ_k: one atom per distinct vertex carrying its incidence count over the
/// incidence count `vᵀAᵏ1`.
pub fn build_rho<R: Real>(sys: &SubstitutionSystem<R>, level: &PatchLevel<R>) -> DiscreteMeasure<R> {
    build_rho_sigma(sys, level).0
}

/// σ_k: one atom per distinct vertex, weight 1/(distinct vertex count).
pub fn build_sigma<R: Real>(
    sys: &SubstitutionSystem<R>,
    level: &PatchLevel<R>,
) -> DiscreteMeasure<R> {
    build_rho_sigma(sys, level).1
}

/// Builds ρ_k and σ_k from one shared vertex unification pass.
pub fn build_rho_sigma<R: Real>(
    sys: &SubstitutionSystem<R>,
    level: &PatchLevel<R>,
) -> (DiscreteMeasure<R>, DiscreteMeasure<R>) {
    let (merger, counts) = merged_vertices(sys, level);
    let total: u64 = counts.iter().sum();
    let rho_atoms = merger
        .positions()
        .iter()
        .zip(&counts)
        .map(|(&position, &numerator)| Atom {
            position,
            numerator,
        })
        .collect();
    let sigma_atoms = merger
        .positions()
        .iter()
        .map(|&position| Atom {
            position,
            numerator: 1,
        })
        .collect();
    (
        DiscreteMeasure {
            kind: MeasureKind::Rho,
            level: level.level,
            denominator: total,
            eps: sys.eps_merge(),
            atoms: rho_atoms,
        },
        DiscreteMeasure {
            kind: MeasureKind::Sigma,
            level: level.level,
            denominator: counts.len() as u64,
            eps: sys.eps_merge(),
            atoms: sigma_atoms,
        },
    )
}

pub fn build<R: Real>(
    kind: MeasureKind,
    sys: &SubstitutionSystem<R>,
    level: &PatchLevel<R>,
) -> DiscreteMeasure<R> {
    match kind {
        MeasureKind::Xi => build_xi(sys, level),
        MeasureKind::Rho => build_rho(sys, level),
        MeasureKind::Sigma => build_sigma(sys, level),
    }
}

/// Area measure of a tile from the eigendata: `λ^{-2j} · v_L(s)` for a
/// level-`j` tile of type `s`. Agrees with the polygon area.
pub fn lebesgue_of_tile<R: Real>(spectral: &SpectralData<R>, tile: &Tile<R>) -> R {
    spectral.v_left[tile.ptype] * spectral.gamma.powi(-(tile.level() as i32))
}

/// Values of the three measures on one target tile at one level.
#[derive(Debug, Clone, Copy)]
pub struct MeasureTriple<R> {
    pub xi: R,
    pub rho: R,
    pub sigma: R,
}

impl<R: Real> MeasureTriple<R> {
    pub fn get(&self, kind: MeasureKind) -> R {
        match kind {
            MeasureKind::Xi => self.xi,
            MeasureKind::Rho => self.rho,
            MeasureKind::Sigma => self.sigma,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TargetInfo<R> {
    pub label: String,
    /// `λ^{-2j} · v_L(s)`: the area measure of the target tile.
    pub lebesgue: R,
}

#[derive(Debug, Clone)]
pub struct ReportRow<R> {
    pub k: usize,
    pub tile_count: u64,
    pub values: Vec<MeasureTriple<R>>,
    pub edge_rho: Vec<R>,
}

/// Finite-depth convergence table: μ_k(t) against m(t) for the chosen
/// targets, plus ρ_k on the chosen edges.
#[derive(Debug, Clone)]
pub struct ConvergenceReport<R> {
    pub targets: Vec<TargetInfo<R>>,
    pub edges: Vec<String>,
    pub rows: Vec<ReportRow<R>>,
    pub policy: BoundaryPolicy,
}

impl<R: Real> ConvergenceReport<R> {
    pub fn gap(&self, row: &ReportRow<R>, target: usize, kind: MeasureKind) -> R {
        (row.values[target].get(kind) - self.targets[target].lebesgue).abs()
    }

    /// Gap scaled by the target's area measure, making small tiles
    /// comparable with large ones.
    pub fn relative_gap(&self, row: &ReportRow<R>, target: usize, kind: MeasureKind) -> R {
        self.gap(row, target, kind) / self.targets[target].lebesgue
    }

    pub fn write_csv(&self, out: &mut dyn Write) -> io::Result<()> {
        writeln!(
            out,
            "row,k,label,m,xi,rho,sigma,xi_gap,rho_gap,sigma_gap,xi_relgap,rho_relgap,sigma_relgap"
        )?;
        for row in &self.rows {
            for (ti, target) in self.targets.iter().enumerate() {
                let v = &row.values[ti];
                write!(out, "tile,{},{},{:.16e}", row.k, target.label, target.lebesgue)?;
                for kind in [MeasureKind::Xi, MeasureKind::Rho, MeasureKind::Sigma] {
                    write!(out, ",{:.16e}", v.get(kind))?;
                }
                for kind in [MeasureKind::Xi, MeasureKind::Rho, MeasureKind::Sigma] {
                    write!(out, ",{:.16e}", self.gap(row, ti, kind))?;
                }
                for kind in [MeasureKind::Xi, MeasureKind::Rho, MeasureKind::Sigma] {
                    write!(out, ",{:.16e}", self.relative_gap(row, ti, kind))?;
                }
                writeln!(out)?;
            }
            for (ei, label) in self.edges.iter().enumerate() {
                writeln!(
                    out,
                    "edge,{},{},,,{:.16e},,,,,,,",
                    row.k, label, row.edge_rho[ei]
                )?;
            }
        }
        Ok(())
    }
}

impl<R: Real> fmt::Display for ConvergenceReport<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (ti, target) in self.targets.iter().enumerate() {
            writeln!(
                f,
                "tile {}  m(t) = {:.9}  (boundary: {})",
                target.label,
                target.lebesgue,
                match self.policy {
                    BoundaryPolicy::Include => "include",
                    BoundaryPolicy::Exclude => "exclude",
                }
            )?;
            writeln!(
                f,
                "  {:>3} {:>12} {:>12} {:>12} {:>10} {:>10} {:>10}",
                "k", "xi", "rho", "sigma", "|xi-m|", "|rho-m|", "|sigma-m|"
            )?;
            for row in &self.rows {
                writeln!(
                    f,
                    "  {:>3} {:>12.9} {:>12.9} {:>12.9} {:>10.3e} {:>10.3e} {:>10.3e}",
                    row.k,
                    row.values[ti].xi,
                    row.values[ti].rho,
                    row.values[ti].sigma,
                    self.gap(row, ti, MeasureKind::Xi),
                    self.gap(row, ti, MeasureKind::Rho),
                    self.gap(row, ti, MeasureKind::Sigma),
                )?;
            }
        }
        for (ei, label) in self.edges.iter().enumerate() {
            writeln!(f, "edge {label}  rho_k mass:")?;
            for row in &self.rows {
                writeln!(f, "  {:>3} {:>12.9}", row.k, row.edge_rho[ei])?;
            }
        }
        Ok(())
    }
}

/// Builds ξ_k, ρ_k and σ_k for `k = 0..=k_max` and tabulates their values
/// on the target tiles (treated as closed sets under the default policy)
/// and the ρ mass on the given edges.
pub fn convergence_report<R: Real>(
    sys: &SubstitutionSystem<R>,
    spectral: &SpectralData<R>,
    targets: &[TileAddress],
    edges: &[EdgeRef<R>],
    k_max: usize,
    policy: BoundaryPolicy,
) -> Result<ConvergenceReport<R>, MeasureError> {
    let mut target_infos = Vec::with_capacity(targets.len());
    let mut target_polys = Vec::with_capacity(targets.len());
    for address in targets {
        let tile = sys.tile_at(address)?;
        target_infos.push(TargetInfo {
            label: address.display(sys),
            lebesgue: lebesgue_of_tile(spectral, &tile),
        });
        target_polys.push(tile.polygon(sys));
    }
    let edge_labels = edges.iter().map(|e| e.display(sys)).collect();

    let mut rows = Vec::with_capacity(k_max + 1);
    let mut level = sys.roots();
    for k in 0..=k_max {
        if k > 0 {
            level = sys.refine(&level)?;
        }
        let xi = build_xi(sys, &level);
        let (rho, sigma) = build_rho_sigma(sys, &level);
        let values = target_polys
            .iter()
            .map(|poly| MeasureTriple {
                xi: xi.evaluate(poly, policy),
                rho: rho.evaluate(poly, policy),
                sigma: sigma.evaluate(poly, policy),
            })
            .collect();
        let edge_rho = edges.iter().map(|e| rho.evaluate_on_edge(e)).collect();
        rows.push(ReportRow {
            k,
            tile_count: level.tiles.len() as u64,
            values,
            edge_rho,
        });
    }
    Ok(ConvergenceReport {
        targets: target_infos,
        edges: edge_labels,
        rows,
        policy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{
        build_matrix, count_subtiles, count_tiles, count_vertex_incidences, spectral_data,
    };
    use crate::systems;
    use num_traits::ToPrimitive;

    const PHI: f64 = 1.618_033_988_749_895;

    fn ratio(n: u64, d: u64) -> Ratio<u64> {
        Ratio::new(n, d)
    }

    #[test]
    fn xi_of_penrose_level2() {
        let sys = systems::penrose::<f64>();
        let level = sys.generate_level(2).unwrap();
        let xi = build_xi(&sys, &level);
        assert_eq!(xi.atoms.len(), 26);
        assert_eq!(xi.denominator, 26);
        assert!(xi.atoms.iter().all(|a| a.numerator == 1));
        assert_eq!(xi.total_exact(), ratio(1, 1));
    }

    #[test]
    fn xi_level0_uniform_on_prototiles() {
        let sys = systems::penrose::<f64>();
        let xi = build_xi(&sys, &sys.roots());
        assert_eq!(xi.atoms.len(), 4);
        assert_eq!(xi.denominator, 4);
    }

    #[test]
    fn xi_square4_level2() {
        let sys = systems::square4::<f64>();
        let level = sys.generate_level(2).unwrap();
        let xi = build_xi(&sys, &level);
        assert_eq!(xi.atoms.len(), 16);
        // cell centers: puncture of each level-2 cell is its center
        let quarter = 1.0 / 8.0;
        let found = xi.atoms.iter().any(|a| {
            (a.position.x - quarter).abs() < 1e-12 && (a.position.y - quarter).abs() < 1e-12
        });
        assert!(found, "expected an atom at the first cell center");
    }

    #[test]
    fn rho_square4_level1_weights() {
        let sys = systems::square4::<f64>();
        let level = sys.generate_level(1).unwrap();
        let rho = build_rho(&sys, &level);
        assert_eq!(rho.denominator, 16);
        let mut weights: Vec<u64> = rho.atoms.iter().map(|a| a.numerator).collect();
        weights.sort_unstable();
        // 4 corners of weight 1, 4 edge midpoints of weight 2, 1 center of 4
        assert_eq!(weights, vec![1, 1, 1, 1, 2, 2, 2, 2, 4]);
        assert_eq!(rho.total_exact(), ratio(1, 1));
    }

    #[test]
    fn rho_level0_uniform() {
        let sys = systems::penrose::<f64>();
        let rho = build_rho(&sys, &sys.roots());
        assert_eq!(rho.denominator, 12);
        assert!(rho.atoms.iter().all(|a| a.numerator == 1));
        assert_eq!(rho.atoms.len(), 12);
    }

    #[test]
    fn sigma_penrose_level2_has_30_atoms() {
        let sys = systems::penrose::<f64>();
        let level = sys.generate_level(2).unwrap();
        let sigma = build_sigma(&sys, &level);
        assert_eq!(sigma.atoms.len(), 30);
        assert_eq!(sigma.denominator, 30);
        assert_eq!(sigma.total_exact(), ratio(1, 1));
    }

    #[test]
    fn sigma_square4_grid_counts() {
        let sys = systems::square4::<f64>();
        let mut level = sys.roots();
        for k in 0..=6usize {
            if k > 0 {
                level = sys.refine(&level).unwrap();
            }
            let sigma = build_sigma(&sys, &level);
            let side = (1usize << k) + 1;
            assert_eq!(sigma.atoms.len(), side * side, "σ grid at k={k}");
        }
    }

    #[test]
    fn rho_pre_normalization_mass_is_incidence_count() {
        let sys = systems::penrose::<f64>();
        let a = build_matrix(&sys);
        for k in 0..=4usize {
            let level = sys.generate_level(k).unwrap();
            let rho = build_rho(&sys, &level);
            let numer: u64 = rho.atoms.iter().map(|at| at.numerator).sum();
            let expect = count_vertex_incidences(&a, &[3, 3, 3, 3], k)
                .to_u64()
                .unwrap();
            assert_eq!(numer, expect);
            assert_eq!(rho.denominator, expect);
        }
    }

    #[test]
    fn example_weights_on_prototile_b_level2() {
        // ρ₂ restricted to the support of b: weights {1,2,2,3,3,4}/78 at six
        // vertices; σ₂ gives the same six atoms with weight 1/30 each.
        let sys = systems::penrose::<f64>();
        let level = sys.generate_level(2).unwrap();
        let rho = build_rho(&sys, &level);
        let support_b = sys.prototiles()[1].shape.clone();
        let mut hits: Vec<(Point<f64>, u64)> = rho
            .atoms
            .iter()
            .filter(|a| support_b.locate(a.position, rho.eps) != Location::Outside)
            .map(|a| (a.position, a.numerator))
            .collect();
        assert_eq!(hits.len(), 6);
        assert_eq!(rho.denominator, 78);
        let mut weights: Vec<u64> = hits.iter().map(|(_, w)| *w).collect();
        weights.sort_unstable();
        assert_eq!(weights, vec![1, 2, 2, 3, 3, 4]);

        // expected positions: corners, one division point per leg, and the
        // interior point, written as affine combinations of the corners
        let v = support_b.vertices();
        let (v0, v1, v2) = (v[0], v[1], v[2]);
        let inv2 = 1.0 / (PHI * PHI);
        let inv3 = 1.0 / (PHI * PHI * PHI);
        let expected: Vec<(Point<f64>, u64)> = vec![
            (v0, 2),
            (v1, 2),
            (v2, 1),
            (v1 + (v2 - v1) * inv2, 3),
            (v2 + (v0 - v2) * inv2, 3),
            (v0 * inv2 + v1 * inv2 + v2 * inv3, 4),
        ];
        for (pos, want) in expected {
            let found = hits
                .iter()
                .position(|(p, _)| p.distance(pos) <= sys.eps_merge())
                .unwrap_or_else(|| panic!("no atom at {pos:?}"));
            assert_eq!(hits[found].1, want, "weight at {pos:?}");
            hits.remove(found);
        }
        assert!(hits.is_empty());

        let sigma = build_sigma(&sys, &level);
        let sigma_mass = sigma.evaluate_exact(&support_b, BoundaryPolicy::Include);
        assert_eq!(sigma_mass, ratio(6, 30));
    }

    #[test]
    fn evaluate_xi_on_prototile_b_is_5_over_26() {
        let sys = systems::penrose::<f64>();
        let level = sys.generate_level(2).unwrap();
        let xi = build_xi(&sys, &level);
        let support_b = sys.prototiles()[1].shape.clone();
        let mass = xi.evaluate_exact(&support_b, BoundaryPolicy::Include);
        assert_eq!(mass, ratio(5, 26));
    }

    #[test]
    fn evaluate_full_support_is_one() {
        let sys = systems::halfsquare::<f64>();
        let level = sys.generate_level(4).unwrap();
        let hull = sys.prototiles()[0].shape.clone();
        for kind in [MeasureKind::Xi, MeasureKind::Rho, MeasureKind::Sigma] {
            let mu = build(kind, &sys, &level);
            assert_eq!(
                mu.evaluate_exact(&hull, BoundaryPolicy::Include),
                ratio(1, 1),
                "{kind} on the full support"
            );
        }
    }

    #[test]
    fn xi_oracle_against_matrix_counts() {
        // ξ_k of a level-j tile interior to its prototile equals
        // 1ᵀA^{k-j}e_s / 1ᵀAᵏ1 exactly.
        let sys = systems::penrose::<f64>();
        let a = build_matrix(&sys);
        for (j, k) in [(0usize, 3usize), (1, 4)] {
            let base = sys.generate_level(j).unwrap();
            let level = sys.generate_level(k).unwrap();
            let xi = build_xi(&sys, &level);
            for t in base.tiles.iter().take(4) {
                let poly = t.polygon(&sys);
                let got = xi.evaluate_exact(&poly, BoundaryPolicy::Include);
                let num = count_subtiles(&a, k - j, t.ptype).to_u64().unwrap();
                let den = count_tiles(&a, k).to_u64().unwrap();
                assert_eq!(got, ratio(num, den), "tile {:?}", t.address);
            }
        }
    }

    #[test]
    fn edge_masses_square4() {
        let sys = systems::square4::<f64>();
        // bottom edge of the unit support
        let edge = EdgeRef::resolve(&sys, TileAddress::root(0), 0).unwrap();
        let mut level = sys.roots();
        for k in 1..=6usize {
            level = sys.refine(&level).unwrap();
            let rho = build_rho(&sys, &level);
            let got = rho.evaluate_on_edge_exact(&edge);
            assert_eq!(got, ratio(1, 1 << (k + 1)), "rho_k on bottom edge, k={k}");
        }
        // punctures never land on an edge
        let level4 = sys.generate_level(4).unwrap();
        let xi = build_xi(&sys, &level4);
        assert_eq!(xi.evaluate_on_edge_exact(&edge), ratio(0, 1));
    }

    #[test]
    fn lebesgue_of_tile_matches_area() {
        let sys = systems::penrose::<f64>();
        let sd = spectral_data(&sys).unwrap();
        // prototile b at level 0
        let b = sys.roots().tiles[1].clone();
        let m = lebesgue_of_tile(&sd, &b);
        assert!((m - 1.0 / (2.0 * PHI * PHI)).abs() < 1e-12);
        // level-1 tile of type c inside a: m = φ / (2φ⁴)
        let addr = TileAddress::parse(&sys, "a/1").unwrap();
        let tile = sys.tile_at(&addr).unwrap();
        assert_eq!(tile.ptype, 2);
        let m = lebesgue_of_tile(&sd, &tile);
        assert!((m - PHI / (2.0 * PHI.powi(4))).abs() < 1e-12);
        assert!((m - tile.polygon(&sys).area()).abs() < 1e-9);
        // square4 level-2 cell
        let sq = systems::square4::<f64>();
        let sdq = spectral_data(&sq).unwrap();
        let cell = &sq.generate_level(2).unwrap().tiles[5];
        assert!((lebesgue_of_tile(&sdq, cell) - 1.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn convergence_report_square4_is_exact() {
        let sys = systems::square4::<f64>();
        let sd = spectral_data(&sys).unwrap();
        let target = TileAddress::parse(&sys, "s/0.3").unwrap();
        let report = convergence_report(
            &sys,
            &sd,
            &[target],
            &[],
            6,
            BoundaryPolicy::Include,
        )
        .unwrap();
        let m = report.targets[0].lebesgue;
        assert!((m - 1.0 / 16.0).abs() < 1e-12);
        for row in &report.rows[2..] {
            // ξ_k(t) = m(t) exactly for k ≥ j in the uniform system
            assert!(report.gap(row, 0, MeasureKind::Xi) < 1e-12, "k={}", row.k);
        }
    }

    #[test]
    fn convergence_gaps_shrink_for_penrose() {
        let sys = systems::penrose::<f64>();
        let sd = spectral_data(&sys).unwrap();
        let b = TileAddress::parse(&sys, "b").unwrap();
        let report =
            convergence_report(&sys, &sd, &[b], &[], 10, BoundaryPolicy::Include).unwrap();
        let at4 = report.gap(&report.rows[4], 0, MeasureKind::Xi);
        let at10 = report.gap(&report.rows[10], 0, MeasureKind::Xi);
        assert!(at10 < at4, "xi gap at k=10 ({at10}) vs k=4 ({at4})");
        // matches the pure matrix computation of the same ratio
        let a = build_matrix(&sys);
        let num = count_subtiles(&a, 10, 1).to_f64().unwrap();
        let den = count_tiles(&a, 10).to_f64().unwrap();
        let expect = (num / den - sd.v_left[1]).abs();
        assert!((at10 - expect).abs() < 1e-12);
    }

    #[test]
    fn sandwich_between_rho_and_sigma() {
        // per-vertex incidences are between 1 and V_max, so
        // σ_k(U) ≤ c₁·ρ_k(U) and ρ_k(U) ≤ c₂·σ_k(U) with
        // c1 = incidences/vertices and c2 = V_max·vertices/incidences.
        let sys = systems::penrose::<f64>();
        let level = sys.generate_level(4).unwrap();
        let rho = build_rho(&sys, &level);
        let sigma = build_sigma(&sys, &level);
        let v_max = rho.max_numerator();
        let regions: Vec<Polygon<f64>> = vec![
            sys.prototiles()[0].shape.clone(),
            sys.prototiles()[3].shape.clone(),
            level.tiles[10].polygon(&sys),
            level.tiles[40].polygon(&sys),
        ];
        for region in &regions {
            for policy in [BoundaryPolicy::Include, BoundaryPolicy::Exclude] {
                let s = sigma.evaluate_exact(region, policy);
                let r = rho.evaluate_exact(region, policy);
                let c1 = ratio(rho.denominator, sigma.denominator);
                let c2 = ratio(v_max * sigma.denominator, rho.denominator);
                assert!(s <= c1 * r, "sigma ≤ c1·rho");
                assert!(r <= c2 * s, "rho ≤ c2·sigma");
            }
        }
    }

    #[test]
    fn boundary_policy_changes_edge_atoms_only() {
        let sys = systems::square4::<f64>();
        let level = sys.generate_level(2).unwrap();
        let rho = build_rho(&sys, &level);
        let cell = level.tiles[0].polygon(&sys);
        let with = rho.evaluate_exact(&cell, BoundaryPolicy::Include);
        let without = rho.evaluate_exact(&cell, BoundaryPolicy::Exclude);
        assert!(with > without);
        // every vertex of this cell sits on its boundary: 1+2+2+4 incidences
        assert_eq!(with, ratio(9, 64));
        assert_eq!(without, ratio(0, 1));
    }

    #[test]
    fn measures_work_in_f32() {
        let sys = systems::square4::<f32>();
        let level = sys.generate_level(2).unwrap();
        let sigma = build_sigma(&sys, &level);
        assert_eq!(sigma.atoms.len(), 25);
    }
}

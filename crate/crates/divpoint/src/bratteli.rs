//! Stationary edge diagram induced by a substitution, finite paths, cylinder
//! weights, and the geometric realization of paths as tiles.
//!
//! Every level has one vertex per prototile, and one edge from `p_j` to
//! `p_i` for every copy of `p_i` in the subdivision of `p_j`; the edge
//! multiplicity matrix therefore equals the substitution matrix. Edges are
//! labeled by rule indices, so a finite path is literally a [`TileAddress`]
//! and the path-to-point map is the identity on addresses.
//!
//! A depth-`n` cylinder (all infinite paths extending a fixed depth-`n`
//! path) carries weight `γ^{-n}·v_L(r)` where `r` is the terminal vertex;
//! this is the unique tail-invariant probability assignment, and it matches
//! the area of the tile the path encodes.

use std::fmt;

use thiserror::Error;

use crate::geometry::Location;
use crate::scalar::Real;
use crate::spectral::{build_matrix, SpectralData, SubstitutionMatrix};
use crate::substitution::{
    AddressError, GenerateError, SubstitutionSystem, Tile, TileAddress,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BratteliError {
    #[error("invalid path: {0}")]
    Path(#[from] AddressError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
}

/// Stationary diagram: `n_vertices` per level, edge multiplicities, and per
/// vertex pair the rule indices realizing each edge.
#[derive(Debug, Clone)]
pub struct BratteliDiagram {
    n_vertices: usize,
    multiplicities: SubstitutionMatrix,
    /// `edge_labels[j][i]` = rule indices `d` with `child(j, d) = i`.
    edge_labels: Vec<Vec<Vec<u8>>>,
}

impl BratteliDiagram {
    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn multiplicities(&self) -> &SubstitutionMatrix {
        &self.multiplicities
    }

    /// Total number of edges between two consecutive levels.
    pub fn edges_per_level(&self) -> u64 {
        self.multiplicities.total()
    }

    pub fn edge_labels(&self, from: usize, to: usize) -> &[u8] {
        &self.edge_labels[from][to]
    }
}

impl fmt::Display for BratteliDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "stationary diagram: {} vertices per level, {} edges per level",
            self.n_vertices,
            self.edges_per_level()
        )?;
        write!(f, "multiplicity matrix:\n{}", self.multiplicities)
    }
}

/// Builds the stationary diagram of a system.
pub fn diagram_from_system<R: Real>(sys: &SubstitutionSystem<R>) -> BratteliDiagram {
    let n = sys.prototiles().len();
    let mut edge_labels = vec![vec![Vec::new(); n]; n];
    for (j, rule) in sys.rules().iter().enumerate() {
        for (d, placement) in rule.iter().enumerate() {
            edge_labels[j][placement.child].push(d as u8);
        }
    }
    BratteliDiagram {
        n_vertices: n,
        multiplicities: build_matrix(sys),
        edge_labels,
    }
}

/// Terminal vertex (prototile index) of a path.
pub fn terminal_vertex<R: Real>(
    sys: &SubstitutionSystem<R>,
    path: &TileAddress,
) -> Result<usize, BratteliError> {
    Ok(sys.tile_at(path)?.ptype)
}

/// Weight of the depth-`n` cylinder over `path`: `γ^{-n} · v_L(r(x_n))`.
/// The depth-0 cylinder at root vertex `i` has weight `v_L(i)`.
pub fn cylinder_measure<R: Real>(
    sys: &SubstitutionSystem<R>,
    spectral: &SpectralData<R>,
    path: &TileAddress,
) -> Result<R, BratteliError> {
    let terminal = terminal_vertex(sys, path)?;
    let n = path.level() as i32;
    Ok(spectral.v_left[terminal] * spectral.gamma.powi(-n))
}

/// The tile whose address is the path (the geometric realization).
pub fn path_to_tile<R: Real>(
    sys: &SubstitutionSystem<R>,
    path: &TileAddress,
) -> Result<Tile<R>, BratteliError> {
    Ok(sys.tile_at(path)?)
}

#[derive(Debug, Clone)]
pub struct DepthRow<R> {
    pub depth: usize,
    pub path_count: u64,
    /// Σ over depth-`n` cylinders of their weight; 1 up to eigen-residual.
    pub cylinder_sum: R,
    /// max |cylinder weight − tile area| over all paths of this depth.
    pub max_deviation: R,
    /// Largest number of depth-`n` tiles whose closed support shares one
    /// patch vertex (the realization map is at most this many-to-one at
    /// the worst point seen at this depth).
    pub max_point_multiplicity: u64,
}

/// Comparison of cylinder weights with tile areas over all paths up to a
/// depth.
#[derive(Debug, Clone)]
pub struct PushforwardReport<R> {
    pub rows: Vec<DepthRow<R>>,
    pub max_deviation: R,
}

impl<R: Real> fmt::Display for PushforwardReport<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>5} {:>9} {:>14} {:>12} {:>14}",
            "depth", "paths", "cylinder sum", "max |Δarea|", "max multiplicity"
        )?;
        for row in &self.rows {
            writeln!(
                f,
                "{:>5} {:>9} {:>14.9} {:>12.3e} {:>14}",
                row.depth,
                row.path_count,
                row.cylinder_sum,
                row.max_deviation,
                row.max_point_multiplicity
            )?;
        }
        writeln!(f, "overall max deviation: {:.3e}", self.max_deviation)
    }
}

/// Checks `cylinder weight = tile area` for every path of depth `1..=depth`
/// and sums each depth's cylinder weights.
pub fn pushforward_check<R: Real>(
    sys: &SubstitutionSystem<R>,
    spectral: &SpectralData<R>,
    depth: usize,
) -> Result<PushforwardReport<R>, BratteliError> {
    let mut rows = Vec::with_capacity(depth);
    let mut level = sys.roots();
    let mut overall = R::zero();
    for n in 1..=depth {
        level = sys.refine(&level)?;
        let mut sum = R::zero();
        let mut max_dev = R::zero();
        for tile in &level.tiles {
            let weight = spectral.v_left[tile.ptype] * spectral.gamma.powi(-(n as i32));
            sum += weight;
            max_dev = max_dev.max((weight - tile.polygon(sys).area()).abs());
        }
        let multiplicity = max_point_multiplicity(sys, &level.tiles);
        overall = overall.max(max_dev);
        rows.push(DepthRow {
            depth: n,
            path_count: level.tiles.len() as u64,
            cylinder_sum: sum,
            max_deviation: max_dev,
            max_point_multiplicity: multiplicity,
        });
    }
    Ok(PushforwardReport {
        rows,
        max_deviation: overall,
    })
}

/// Max number of tiles whose closed support contains one patch vertex.
/// Counts containment, not vertex incidence, so junctions where a vertex of
/// one tile lies mid-edge of another are captured too.
fn max_point_multiplicity<R: Real>(sys: &SubstitutionSystem<R>, tiles: &[Tile<R>]) -> u64 {
    let mut merger = crate::geometry::VertexMerger::new(sys.eps_merge());
    for tile in tiles {
        for &v in tile.polygon(sys).vertices() {
            merger.insert(v);
        }
    }
    let polygons: Vec<_> = tiles.iter().map(|t| t.polygon(sys)).collect();
    let mut best = 0u64;
    for &v in merger.positions() {
        let mut count = 0u64;
        for poly in &polygons {
            if poly.locate(v, sys.eps_merge()) != Location::Outside {
                count += 1;
            }
        }
        best = best.max(count);
    }
    best
}

/// Σ over depth-`n` cylinders of `γ^{-n} v_L(r)`, computed by the counting
/// identity `v_Lᵀ (γ^{-1}A)ⁿ 1` without enumerating paths.
pub fn cylinder_sum_by_counting<R: Real>(
    spectral: &SpectralData<R>,
    a: &SubstitutionMatrix,
    n: usize,
) -> R {
    let dim = a.n();
    let mut v: Vec<R> = spectral.v_left.clone();
    for _ in 0..n {
        // v ← (Aᵀ v) / γ
        let mut next = vec![R::zero(); dim];
        for (j, slot) in next.iter_mut().enumerate() {
            for (i, x) in v.iter().enumerate() {
                *slot += *x * R::from_u64(a.entry(i, j)).unwrap();
            }
            *slot /= spectral.gamma;
        }
        v = next;
    }
    v.into_iter().sum()
}

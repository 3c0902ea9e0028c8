use std::collections::HashMap;

use crate::geometry::Point;
use crate::scalar::Real;

/// Grid cell of a quantized point. Two points within half a pitch of each
/// other land in the same cell or in neighbouring cells, which is what the
/// 3×3 probe in [`VertexMerger`] relies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct VertexKey {
    pub qx: i64,
    pub qy: i64,
}

impl VertexKey {
    pub fn of<R: Real>(p: Point<R>, pitch: R) -> VertexKey {
        VertexKey {
            qx: (p.x / pitch).floor().to_i64().expect("coordinate within grid range"),
            qy: (p.y / pitch).floor().to_i64().expect("coordinate within grid range"),
        }
    }
}

/// Unifies nearly-coincident points into canonical vertex ids.
///
/// A new point is matched against all registered vertices in its own and the
/// 8 neighbouring grid cells; it unifies with the first one closer than the
/// pitch. Consequences: points closer than `pitch/4` always unify, points
/// farther than `4·pitch` never do.
#[derive(Clone, Debug)]
pub struct VertexMerger<R> {
    pitch: R,
    cells: HashMap<VertexKey, Vec<u32>>,
    points: Vec<Point<R>>,
}

impl<R: Real> VertexMerger<R> {
    pub fn new(pitch: R) -> Self {
        assert!(pitch > R::zero(), "merge pitch must be positive");
        VertexMerger {
            pitch,
            cells: HashMap::new(),
            points: Vec::new(),
        }
    }

    pub fn pitch(&self) -> R {
        self.pitch
    }

    /// Returns the canonical id for `p`, registering it if nothing nearby
    /// exists yet. The canonical position is the first-seen representative.
    pub fn insert(&mut self, p: Point<R>) -> usize {
        let key = VertexKey::of(p, self.pitch);
        for dx in -1..=1 {
            for dy in -1..=1 {
                let probe = VertexKey {
                    qx: key.qx + dx,
                    qy: key.qy + dy,
                };
                if let Some(ids) = self.cells.get(&probe) {
                    for &id in ids {
                        if self.points[id as usize].distance(p) <= self.pitch {
                            return id as usize;
                        }
                    }
                }
            }
        }
        let id = self.points.len();
        self.points.push(p);
        self.cells.entry(key).or_default().push(id as u32);
        id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn position(&self, id: usize) -> Point<R> {
        self.points[id]
    }

    pub fn positions(&self) -> &[Point<R>] {
        &self.points
    }
}

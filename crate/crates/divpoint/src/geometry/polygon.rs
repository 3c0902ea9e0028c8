use crate::geometry::{Isometry, Point, Similarity};
use crate::scalar::{cast, Real};

use super::GeometryError;

/// Where a point sits relative to a polygon.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Inside,
    Boundary,
    Outside,
}

/// A simple polygon with counter-clockwise vertices and a cached shoelace
/// area. Construction validates simplicity and re-orients clockwise input.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon<R> {
    vertices: Vec<Point<R>>,
    area: R,
}

/// Shoelace formula; positive for counter-clockwise rings.
pub fn signed_area<R: Real>(vertices: &[Point<R>]) -> R {
    let n = vertices.len();
    let mut acc = R::zero();
    for i in 0..n {
        let p = vertices[i];
        let q = vertices[(i + 1) % n];
        acc += p.cross(q);
    }
    acc / cast(2.0)
}

fn segments_cross<R: Real>(a: Point<R>, b: Point<R>, c: Point<R>, d: Point<R>) -> bool {
    let d1 = (b - a).cross(c - a);
    let d2 = (b - a).cross(d - a);
    let d3 = (d - c).cross(a - c);
    let d4 = (d - c).cross(b - c);
    if ((d1 > R::zero() && d2 < R::zero()) || (d1 < R::zero() && d2 > R::zero()))
        && ((d3 > R::zero() && d4 < R::zero()) || (d3 < R::zero() && d4 > R::zero()))
    {
        return true;
    }
    // Collinear overlap counts as a crossing; touching at one point does not
    // need to (adjacent edges are excluded by the caller).
    let on = |p: Point<R>, q: Point<R>, r: Point<R>| -> bool {
        (q - p).cross(r - p) == R::zero()
            && r.x >= p.x.min(q.x)
            && r.x <= p.x.max(q.x)
            && r.y >= p.y.min(q.y)
            && r.y <= p.y.max(q.y)
    };
    let mut hits = 0;
    for (p, q, r) in [(a, b, c), (a, b, d), (c, d, a), (c, d, b)] {
        if on(p, q, r) {
            hits += 1;
        }
    }
    hits >= 2
}

impl<R: Real> Polygon<R> {
    /// Builds a polygon from a vertex ring. Either winding is accepted; the
    /// stored ring is counter-clockwise. Degenerate (near-zero area) and
    /// self-intersecting rings are rejected.
    pub fn new(mut vertices: Vec<Point<R>>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::TooFewVertices(vertices.len()));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let mut area = signed_area(&vertices);
        if area < R::zero() {
            vertices.reverse();
            area = -area;
        }
        let n = vertices.len();
        for i in 0..n {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            for j in i + 1..n {
                // skip edges adjacent to edge i
                if j == i || (j + 1) % n == i || (i + 1) % n == j {
                    continue;
                }
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                if segments_cross(a, b, c, d) {
                    return Err(GeometryError::SelfIntersecting);
                }
            }
        }
        let diam2 = Self::diameter_sq(&vertices);
        if area <= diam2 * cast(1e-14) || area == R::zero() {
            return Err(GeometryError::Degenerate);
        }
        Ok(Polygon { vertices, area })
    }

    fn diameter_sq(vertices: &[Point<R>]) -> R {
        let mut best = R::zero();
        for (i, &p) in vertices.iter().enumerate() {
            for &q in &vertices[i + 1..] {
                let d = (p - q).dot(p - q);
                if d > best {
                    best = d;
                }
            }
        }
        best
    }

    pub fn vertices(&self) -> &[Point<R>] {
        &self.vertices
    }

    /// Cached shoelace area, always positive.
    pub fn area(&self) -> R {
        self.area
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point<R>, Point<R>)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn edge(&self, index: usize) -> Option<(Point<R>, Point<R>)> {
        let n = self.vertices.len();
        if index >= n {
            return None;
        }
        Some((self.vertices[index], self.vertices[(index + 1) % n]))
    }

    pub fn diameter(&self) -> R {
        Self::diameter_sq(&self.vertices).sqrt()
    }

    pub fn min_edge_length(&self) -> R {
        self.edges()
            .map(|(a, b)| a.distance(b))
            .fold(R::infinity(), R::min)
    }

    pub fn bounding_box(&self) -> (Point<R>, Point<R>) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
        }
        (lo, hi)
    }

    /// Area centroid; for non-convex polygons where it falls outside, the
    /// centroid of the largest inside triangle of a fan triangulation.
    pub fn centroid(&self) -> Point<R> {
        let six = cast::<R>(6.0);
        let mut cx = R::zero();
        let mut cy = R::zero();
        let n = self.vertices.len();
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            let w = p.cross(q);
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
        }
        let c = Point::new(cx / (six * self.area), cy / (six * self.area));
        let eps = self.diameter() * cast(1e-12);
        if self.locate(c, eps) == Location::Inside {
            return c;
        }
        self.interior_point()
    }

    /// A point strictly inside the polygon: the centroid of the largest fan
    /// triangle contained in the polygon, falling back to ear clipping.
    fn interior_point(&self) -> Point<R> {
        let three = cast::<R>(3.0);
        let eps = self.diameter() * cast(1e-12);
        let v0 = self.vertices[0];
        let mut best: Option<(R, Point<R>)> = None;
        for i in 1..self.vertices.len() - 1 {
            let (a, b) = (self.vertices[i], self.vertices[i + 1]);
            let tri_area = (a - v0).cross(b - v0) / cast(2.0);
            if tri_area <= R::zero() {
                continue;
            }
            let c = Point::new((v0.x + a.x + b.x) / three, (v0.y + a.y + b.y) / three);
            if self.locate(c, eps) != Location::Inside {
                continue;
            }
            if let Ok(tri) = Polygon::new(vec![v0, a, b]) {
                if (self.intersection_area(&tri) - tri_area).abs() > tri_area * cast(1e-9) {
                    continue;
                }
            }
            if best.is_none_or(|(w, _)| tri_area > w) {
                best = Some((tri_area, c));
            }
        }
        if let Some((_, c)) = best {
            return c;
        }
        // Ears always exist for a simple polygon.
        let tri = self.triangulate();
        let mut largest = tri[0];
        let mut largest_area = R::zero();
        for t in &tri {
            let a = (t[1] - t[0]).cross(t[2] - t[0]);
            if a > largest_area {
                largest_area = a;
                largest = *t;
            }
        }
        Point::new(
            (largest[0].x + largest[1].x + largest[2].x) / three,
            (largest[0].y + largest[1].y + largest[2].y) / three,
        )
    }

    /// Ray-casting classification with boundary tolerance `eps`.
    pub fn locate(&self, p: Point<R>, eps: R) -> Location {
        for (a, b) in self.edges() {
            if p.distance_to_segment(a, b) <= eps {
                return Location::Boundary;
            }
        }
        let n = self.vertices.len();
        let mut inside = false;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            if (a.y > p.y) != (b.y > p.y) {
                let t = (p.y - a.y) / (b.y - a.y);
                let x = a.x + (b.x - a.x) * t;
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        if inside {
            Location::Inside
        } else {
            Location::Outside
        }
    }

    /// Ear-clipping triangulation of the (simple, CCW) polygon.
    pub fn triangulate(&self) -> Vec<[Point<R>; 3]> {
        let mut idx: Vec<usize> = (0..self.vertices.len()).collect();
        let mut out = Vec::with_capacity(self.vertices.len() - 2);
        let v = &self.vertices;
        let mut guard = 0usize;
        while idx.len() > 3 {
            let n = idx.len();
            let mut clipped = false;
            for k in 0..n {
                let (ia, ib, ic) = (idx[(k + n - 1) % n], idx[k], idx[(k + 1) % n]);
                let (a, b, c) = (v[ia], v[ib], v[ic]);
                let cross = (b - a).cross(c - a);
                if cross <= R::zero() {
                    continue; // reflex or flat corner
                }
                let mut ear = true;
                for &j in &idx {
                    if j == ia || j == ib || j == ic {
                        continue;
                    }
                    if point_in_triangle(v[j], a, b, c) {
                        ear = false;
                        break;
                    }
                }
                if ear {
                    out.push([a, b, c]);
                    idx.remove(k);
                    clipped = true;
                    break;
                }
            }
            if !clipped {
                // Numerically stuck (nearly flat remainder); drop the flattest
                // corner and continue, the lost area is below tolerance.
                let n = idx.len();
                let mut flattest = (R::infinity(), 0usize);
                for k in 0..n {
                    let (a, b, c) = (
                        v[idx[(k + n - 1) % n]],
                        v[idx[k]],
                        v[idx[(k + 1) % n]],
                    );
                    let m = (b - a).cross(c - a).abs();
                    if m < flattest.0 {
                        flattest = (m, k);
                    }
                }
                idx.remove(flattest.1);
            }
            guard += 1;
            if guard > 4 * self.vertices.len() * self.vertices.len() {
                break;
            }
        }
        if idx.len() == 3 {
            out.push([v[idx[0]], v[idx[1]], v[idx[2]]]);
        }
        out
    }

    /// Area of `self ∩ other` by clipping triangulations against each other.
    pub fn intersection_area(&self, other: &Polygon<R>) -> R {
        let mine = self.triangulate();
        let theirs = other.triangulate();
        let mut total = R::zero();
        for ta in &mine {
            for tb in &theirs {
                total += convex_clip_area(ta, tb);
            }
        }
        total
    }

    /// Minimum distance between the boundaries of two polygons (zero if they
    /// touch or cross).
    pub fn boundary_distance(&self, other: &Polygon<R>) -> R {
        let mut best = R::infinity();
        for (a, b) in self.edges() {
            for (c, d) in other.edges() {
                if segments_cross(a, b, c, d) {
                    return R::zero();
                }
                for (p, q, r) in [(a, c, d), (b, c, d), (c, a, b), (d, a, b)] {
                    best = best.min(p.distance_to_segment(q, r));
                }
            }
        }
        best
    }
}

fn point_in_triangle<R: Real>(p: Point<R>, a: Point<R>, b: Point<R>, c: Point<R>) -> bool {
    let d1 = (b - a).cross(p - a);
    let d2 = (c - b).cross(p - b);
    let d3 = (a - c).cross(p - c);
    d1 >= R::zero() && d2 >= R::zero() && d3 >= R::zero()
}

/// Area of the intersection of two CCW triangles via Sutherland-Hodgman.
fn convex_clip_area<R: Real>(subject: &[Point<R>; 3], clip: &[Point<R>; 3]) -> R {
    let mut poly: Vec<Point<R>> = subject.to_vec();
    for i in 0..3 {
        let a = clip[i];
        let b = clip[(i + 1) % 3];
        let mut out: Vec<Point<R>> = Vec::with_capacity(poly.len() + 1);
        let n = poly.len();
        for k in 0..n {
            let s = poly[k];
            let e = poly[(k + 1) % n];
            let sc = (b - a).cross(s - a);
            let ec = (b - a).cross(e - a);
            let s_in = sc >= R::zero();
            let e_in = ec >= R::zero();
            if s_in {
                out.push(s);
            }
            if s_in != e_in {
                let denom = sc - ec;
                if denom.abs() > R::zero() {
                    let t = sc / denom;
                    out.push(s + (e - s) * t);
                }
            }
        }
        poly = out;
        if poly.len() < 3 {
            return R::zero();
        }
    }
    signed_area(&poly).max(R::zero())
}

/// Applies an isometry to a polygon, reversing the vertex order after an
/// orientation-reversing map so the result stays counter-clockwise.
pub fn apply_isometry<R: Real>(h: &Isometry<R>, p: &Polygon<R>) -> Polygon<R> {
    let mut verts: Vec<Point<R>> = p.vertices().iter().map(|&v| h.apply(v)).collect();
    if h.orientation_reversing {
        verts.reverse();
    }
    Polygon::new(verts).expect("isometric image of a valid polygon is valid")
}

/// Applies a similarity to a polygon (same winding fix-up as isometries).
pub fn apply_similarity<R: Real>(s: &Similarity<R>, p: &Polygon<R>) -> Polygon<R> {
    let mut verts: Vec<Point<R>> = p.vertices().iter().map(|&v| s.apply(v)).collect();
    if s.iso.orientation_reversing {
        verts.reverse();
    }
    Polygon::new(verts).expect("similar image of a valid polygon is valid")
}

/// Shoelace area of a simple polygon (free-function form of
/// [`Polygon::area`]).
pub fn polygon_area<R: Real>(p: &Polygon<R>) -> R {
    p.area()
}

/// Classifies a point against a polygon (free-function form of
/// [`Polygon::locate`]).
pub fn point_in_polygon<R: Real>(x: Point<R>, p: &Polygon<R>, eps: R) -> Location {
    p.locate(x, eps)
}

/// Minimum edge length over a family of polygons.
pub fn min_edge_length<R: Real>(polys: &[&Polygon<R>]) -> Result<R, GeometryError> {
    if polys.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    Ok(polys
        .iter()
        .map(|p| p.min_edge_length())
        .fold(R::infinity(), R::min))
}

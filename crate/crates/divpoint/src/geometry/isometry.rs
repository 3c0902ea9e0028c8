use crate::geometry::Point;
use crate::scalar::{cast, Real};

use super::GeometryError;

/// Orthogonality tolerance for isometry linear parts.
pub const ORTHO_TOL: f64 = 1e-12;

/// A plane isometry `x ↦ Q·x + t` with `Q` orthogonal.
///
/// `orientation_reversing` is derived from the sign of `det Q`; reversing
/// isometries flip polygon winding, which [`apply_isometry`] undoes so that
/// every stored polygon stays counter-clockwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Isometry<R> {
    /// Row-major 2×2 orthogonal matrix.
    pub linear: [[R; 2]; 2],
    pub translation: Point<R>,
    pub orientation_reversing: bool,
}

impl<R: Real> Isometry<R> {
    /// Builds and checks an isometry from a raw linear part and translation.
    pub fn new(linear: [[R; 2]; 2], translation: Point<R>) -> Result<Self, GeometryError> {
        let tol = cast::<R>(ORTHO_TOL).max(R::epsilon() * cast(16.0));
        let [[a, b], [c, d]] = linear;
        for v in [a, b, c, d, translation.x, translation.y] {
            if !v.is_finite() {
                return Err(GeometryError::NonFinite);
            }
        }
        // QᵀQ = I
        let dev = (a * a + c * c - R::one())
            .abs()
            .max((b * b + d * d - R::one()).abs())
            .max((a * b + c * d).abs());
        let det = a * d - b * c;
        if dev > tol || (det.abs() - R::one()).abs() > tol {
            return Err(GeometryError::NotOrthogonal);
        }
        Ok(Isometry {
            linear,
            translation,
            orientation_reversing: det < R::zero(),
        })
    }

    pub fn identity() -> Self {
        Isometry {
            linear: [[R::one(), R::zero()], [R::zero(), R::one()]],
            translation: Point::zero(),
            orientation_reversing: false,
        }
    }

    /// Rotation by `theta` radians about the origin.
    pub fn rotation(theta: R) -> Self {
        let (s, c) = theta.sin_cos();
        Isometry {
            linear: [[c, -s], [s, c]],
            translation: Point::zero(),
            orientation_reversing: false,
        }
    }

    /// Reflection across the line through the origin at angle `theta / 2`.
    ///
    /// The matrix is `[[cos θ, sin θ], [sin θ, -cos θ]]`, so `theta` doubles
    /// as the parameter stored in system files (`reflect: true`).
    pub fn reflection(theta: R) -> Self {
        let (s, c) = theta.sin_cos();
        Isometry {
            linear: [[c, s], [s, -c]],
            translation: Point::zero(),
            orientation_reversing: true,
        }
    }

    pub fn with_translation(mut self, t: Point<R>) -> Self {
        self.translation = t;
        self
    }

    pub fn apply(&self, p: Point<R>) -> Point<R> {
        Point::new(
            self.linear[0][0] * p.x + self.linear[0][1] * p.y + self.translation.x,
            self.linear[1][0] * p.x + self.linear[1][1] * p.y + self.translation.y,
        )
    }

    /// Applies only the linear part.
    pub fn apply_linear(&self, p: Point<R>) -> Point<R> {
        Point::new(
            self.linear[0][0] * p.x + self.linear[0][1] * p.y,
            self.linear[1][0] * p.x + self.linear[1][1] * p.y,
        )
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        let m = &self.linear;
        let n = &other.linear;
        let linear = [
            [
                m[0][0] * n[0][0] + m[0][1] * n[1][0],
                m[0][0] * n[0][1] + m[0][1] * n[1][1],
            ],
            [
                m[1][0] * n[0][0] + m[1][1] * n[1][0],
                m[1][0] * n[0][1] + m[1][1] * n[1][1],
            ],
        ];
        Isometry {
            linear,
            translation: self.apply(other.translation),
            orientation_reversing: self.orientation_reversing != other.orientation_reversing,
        }
    }

    /// Rotation/reflection angle parameter: for a rotation the rotation angle,
    /// for a reflection the doubled axis angle (see [`Isometry::reflection`]).
    pub fn angle(&self) -> R {
        self.linear[1][0].atan2(self.linear[0][0])
    }
}

/// A similarity `x ↦ scale·Q·x + t`, stored as an isometry plus a positive
/// scale factor. Tile placements are similarities with scale `λ^{-k}`.
#[derive(Clone, Copy, Debug)]
pub struct Similarity<R> {
    pub iso: Isometry<R>,
    pub scale: R,
}

impl<R: Real> Similarity<R> {
    pub fn identity() -> Self {
        Similarity {
            iso: Isometry::identity(),
            scale: R::one(),
        }
    }

    pub fn from_isometry(iso: Isometry<R>) -> Self {
        Similarity {
            iso,
            scale: R::one(),
        }
    }

    pub fn apply(&self, p: Point<R>) -> Point<R> {
        self.iso.apply_linear(p * self.scale) + self.iso.translation
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        let linear = self.iso.compose(&Isometry {
            translation: Point::zero(),
            ..other.iso
        });
        Similarity {
            iso: Isometry {
                linear: linear.linear,
                translation: self.apply(other.iso.translation),
                orientation_reversing: linear.orientation_reversing,
            },
            scale: self.scale * other.scale,
        }
    }
}

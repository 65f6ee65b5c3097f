//! Planar points, triangles and angle measures.
//!
//! Angles are computed and reported in degrees throughout the crate, since
//! the mesh-quality bounds verified downstream are stated in degrees.


// Inherent f64 math appears once any crate in the graph links std; the
// trait import is what keeps the pure no_std build working.
#[allow(unused_imports)]
use num_traits::Float;
use crate::error::{Error, Result};

/// A triangle counts as degenerate when
/// `|signed area| <= DEGENERACY_REL_TOL * longest_edge^2`.
///
/// The threshold scales with the triangle's own size, so the thin elements
/// produced by sliver interface cuts stay valid while genuinely collapsed
/// triangles are rejected.
pub const DEGENERACY_REL_TOL: f64 = 1e-14;

/// A point (or displacement) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// `self + t * (other - self)`.
    pub fn lerp(self, other: Self, t: f64) -> Self {
        Self::new(
            self.x + t * (other.x - self.x),
            self.y + t * (other.y - self.y),
        )
    }

    pub fn distance(self, other: Self) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }
}

/// 2D cross product of `b - a` and `c - a`, i.e. twice the signed area of
/// the triangle (a, b, c). Positive for counter-clockwise order.
pub fn cross(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Interior angle at `b` of the wedge a-b-c, in degrees.
///
/// Arccosine of the normalized inner product of the two edge vectors, so the
/// result lies in [0, 180].
pub fn angle_at(a: Point2, b: Point2, c: Point2) -> Result<f64> {
    let (ux, uy) = (a.x - b.x, a.y - b.y);
    let (vx, vy) = (c.x - b.x, c.y - b.y);
    let nu = ux.hypot(uy);
    let nv = vx.hypot(vy);
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::DegenerateAngle);
    }
    let cos = ((ux * vx + uy * vy) / (nu * nv)).clamp(-1.0, 1.0);
    Ok(cos.acos().to_degrees())
}

/// A triangle; all constructors in this crate produce counter-clockwise
/// (positive signed area) triangles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub a: Point2,
    pub b: Point2,
    pub c: Point2,
}

impl Triangle {
    pub const fn new(a: Point2, b: Point2, c: Point2) -> Self {
        Self { a, b, c }
    }

    /// Half the cross product of the edge vectors; positive for CCW.
    pub fn signed_area(&self) -> f64 {
        0.5 * cross(self.a, self.b, self.c)
    }

    pub fn centroid(&self) -> Point2 {
        Point2::new(
            (self.a.x + self.b.x + self.c.x) / 3.0,
            (self.a.y + self.b.y + self.c.y) / 3.0,
        )
    }

    /// Lengths of edges (a,b), (b,c), (c,a).
    pub fn edge_lengths(&self) -> [f64; 3] {
        [
            self.a.distance(self.b),
            self.b.distance(self.c),
            self.c.distance(self.a),
        ]
    }

    pub fn longest_edge(&self) -> f64 {
        let [ab, bc, ca] = self.edge_lengths();
        ab.max(bc).max(ca)
    }

    pub fn is_degenerate(&self) -> bool {
        let l = self.longest_edge();
        self.signed_area().abs() <= DEGENERACY_REL_TOL * l * l
    }

    /// Interior angles at vertices (a, b, c), in degrees.
    pub fn angles(&self) -> Result<[f64; 3]> {
        if self.is_degenerate() {
            return Err(Error::DegenerateTriangle);
        }
        Ok([
            angle_at(self.c, self.a, self.b)?,
            angle_at(self.a, self.b, self.c)?,
            angle_at(self.b, self.c, self.a)?,
        ])
    }

    /// Largest interior angle, in degrees.
    pub fn max_angle(&self) -> Result<f64> {
        let [x, y, z] = self.angles()?;
        Ok(x.max(y).max(z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn equilateral() -> Triangle {
        Triangle::new(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.5, 3.0_f64.sqrt() / 2.0),
        )
    }

    #[test]
    fn equilateral_angles_are_sixty() {
        let t = equilateral();
        for ang in t.angles().unwrap() {
            assert_relative_eq!(ang, 60.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn orthogonal_wedge_is_ninety() {
        let ang = angle_at(
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 1.0),
        )
        .unwrap();
        assert_relative_eq!(ang, 90.0, max_relative = 1e-14);
    }

    #[test]
    fn near_straight_wedge() {
        // Oracle: the wedge ((1,0), origin, (-1,1e-6)) opens by pi minus
        // atan(1e-6); evaluate that independently of the acos route.
        let expected = 180.0 - 1e-6_f64.atan().to_degrees();
        let ang = angle_at(
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 0.0),
            Point2::new(-1.0, 1e-6),
        )
        .unwrap();
        // The arccosine route loses a few digits this close to 180 degrees
        // (its derivative blows up at the ends of [-1, 1]).
        assert_relative_eq!(ang, expected, epsilon = 1e-6);
        assert_relative_eq!(ang, 179.99994, epsilon = 1e-4);
    }

    #[test]
    fn coincident_points_error() {
        let p = Point2::new(0.3, 0.7);
        assert!(matches!(
            angle_at(p, p, Point2::new(1.0, 1.0)),
            Err(Error::DegenerateAngle)
        ));
    }

    #[test]
    fn angle_symmetry() {
        let a = Point2::new(0.2, 1.4);
        let b = Point2::new(-0.3, 0.1);
        let c = Point2::new(2.0, -0.5);
        assert_eq!(angle_at(a, b, c).unwrap(), angle_at(c, b, a).unwrap());
    }

    #[test]
    fn max_angle_examples() {
        let right = Triangle::new(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        );
        assert_relative_eq!(right.max_angle().unwrap(), 90.0, max_relative = 1e-13);

        // Flat triangle: apex angle is 180 - 2*atan(0.01/0.5).
        let flat = Triangle::new(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.5, 0.01),
        );
        let expected = 180.0 - 2.0 * (0.01_f64 / 0.5).atan().to_degrees();
        assert_relative_eq!(flat.max_angle().unwrap(), expected, epsilon = 1e-9);
        assert_relative_eq!(flat.max_angle().unwrap(), 177.7, epsilon = 0.01);
    }

    #[test]
    fn angles_sum_to_180() {
        let t = Triangle::new(
            Point2::new(0.12, -0.3),
            Point2::new(1.7, 0.44),
            Point2::new(0.9, 2.2),
        );
        let sum: f64 = t.angles().unwrap().iter().sum();
        assert_relative_eq!(sum, 180.0, max_relative = 1e-9);
    }

    #[test]
    fn signed_area_orientation() {
        let t = Triangle::new(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        );
        assert_eq!(t.signed_area(), 0.5);
        let swapped = Triangle::new(t.a, t.c, t.b);
        assert_eq!(swapped.signed_area(), -0.5);
        assert_relative_eq!(
            equilateral().signed_area(),
            3.0_f64.sqrt() / 4.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn degenerate_triangle_rejected() {
        let t = Triangle::new(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(2.0, 1e-16),
        );
        assert!(t.is_degenerate());
        assert!(matches!(t.max_angle(), Err(Error::DegenerateTriangle)));
    }
}

//! Polygon approximations of the non-convex anomaly shapes used as fixtures.
//!
//! These parametrizations are illustrative stand-ins (peanut, droplet, kite);
//! every shape is scaled so that its largest extent from `center` is `size`.

use std::f64::consts::PI;

use crate::error::Result;
use crate::geometry::{Point, Region};

fn sampled(center: Point, size: f64, vertices: usize, curve: impl Fn(f64) -> Point) -> Result<Region> {
    let n = vertices.max(64);
    let raw: Vec<Point> = (0..n).map(|k| curve(2.0 * PI * k as f64 / n as f64)).collect();
    let extent = raw.iter().map(|p| p.norm()).fold(0.0, f64::max);
    Region::polygon(raw.into_iter().map(|p| center + p * (size / extent)).collect())
}

/// Two-lobed shape with a waist along the y axis.
pub fn peanut(center: Point, size: f64, vertices: usize) -> Result<Region> {
    sampled(center, size, vertices, |t| Point::unit(t) * (0.75 + 0.35 * (2.0 * t).cos()))
}

/// Teardrop with its tip pointing in +x.
pub fn droplet(center: Point, size: f64, vertices: usize) -> Result<Region> {
    sampled(center, size, vertices, |t| Point::new(1.0 - 2.0 * (0.5 * t).sin(), -t.sin()))
}

/// Kite curve `(cos t + 0.65 cos 2t - 0.65, 1.5 sin t)`.
pub fn kite(center: Point, size: f64, vertices: usize) -> Result<Region> {
    sampled(center, size, vertices, |t| Point::new(t.cos() + 0.65 * (2.0 * t).cos() - 0.65, 1.5 * t.sin()))
}

/// Circle with a concentric circular cavity.
pub fn hollow_circle(center: Point, outer: f64, inner: f64) -> Region {
    Region::annulus(center, inner, outer)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_are_simple_polygons() {
        let c = Point::new(0.0, 0.0);
        for r in [peanut(c, 1.0, 64), droplet(c, 1.0, 80), kite(c, 1.0, 96)] {
            let Region::Polygon(p) = r.unwrap() else { panic!("expected polygon") };
            assert!(p.vertices().len() >= 64);
            assert!(p.signed_area().abs() > 0.1);
        }
    }

    #[test]
    fn peanut_has_waist() {
        let p = peanut(Point::default(), 1.0, 128).unwrap();
        assert!(p.contains(Point::new(0.8, 0.0)));
        assert!(!p.contains(Point::new(0.0, 0.5)));
    }
}

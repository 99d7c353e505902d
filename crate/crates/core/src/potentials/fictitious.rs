use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{Point, Region};

/// Gap between a tangent line and the test anomaly, relative to the domain radius.
pub const TANGENT_GAP: f64 = 1e-9;

/// Fictitious-anomaly construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FictitiousStyle {
    /// Half-planes beyond single tangent lines.
    ConvexTangent,
    /// Unions of two half-planes with tangent lines on adjacent sides.
    ConcavePair,
}

/// Half-planes (within the disk of `radius`) on the far side of tangent
/// lines to `t`, one per direction `2πk/directions`, or unions of adjacent
/// pairs of them.
pub fn fictitious_anomalies(t: &Region, radius: f64, style: FictitiousStyle, directions: usize) -> Result<Vec<Region>> {
    if directions < 2 {
        return Err(invalid("at least two tangent directions are required"));
    }
    let extent = t
        .bounding_radius()
        .ok_or_else(|| invalid("test anomaly must be bounded"))?;
    if extent >= radius {
        return Err(invalid(format!("test anomaly reaches the boundary (extent {extent}, radius {radius})")));
    }
    let mut planes = Vec::with_capacity(directions);
    for k in 0..directions {
        let n = Point::unit(2.0 * PI * k as f64 / directions as f64);
        let h = t.support(n).ok_or_else(|| invalid("test anomaly has no support function"))?;
        planes.push(Region::half_plane(n * (h + TANGENT_GAP * radius), n));
    }
    Ok(match style {
        FictitiousStyle::ConvexTangent => planes,
        FictitiousStyle::ConcavePair => (0..directions)
            .map(|k| Region::union(vec![planes[k].clone(), planes[(k + 1) % directions].clone()]))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_disk_mesh, classify_elements};

    #[test]
    fn square_flush_with_sides() {
        let t = Region::rectangle(0.1, 0.2, 0.3, 0.4).unwrap();
        let fs = fictitious_anomalies(&t, 1.0, FictitiousStyle::ConvexTangent, 4).unwrap();
        assert_eq!(fs.len(), 4);
        let expected = [(1.0, 0.0, 0.3), (0.0, 1.0, 0.4), (-1.0, 0.0, -0.1), (0.0, -1.0, -0.2)];
        for (f, (nx, ny, h)) in fs.iter().zip(expected) {
            let Region::HalfPlane { point, normal } = f else { panic!("expected half-plane") };
            assert!((normal.x - nx).abs() < 1e-15 && (normal.y - ny).abs() < 1e-15);
            assert!((point.dot(*normal) - h).abs() < 1e-8);
        }
    }

    #[test]
    fn circle_tangents_exclude_centroid() {
        let c = Point::new(-0.2, 0.3);
        let t = Region::circle(c, 0.15);
        let fs = fictitious_anomalies(&t, 1.0, FictitiousStyle::ConvexTangent, 8).unwrap();
        assert_eq!(fs.len(), 8);
        for f in &fs {
            assert!(!f.contains(c));
            let Region::HalfPlane { point, normal } = f else { panic!() };
            assert!(((*point - c).dot(*normal) - 0.15).abs() < 1e-8);
        }
    }

    #[test]
    fn masks_are_disjoint() {
        let mesh = build_disk_mesh(1.0, 16).unwrap();
        let shapes = [
            Region::rectangle(-0.3, -0.3, 0.0, 0.0).unwrap(),
            Region::circle(Point::new(0.3, 0.1), 0.2),
            crate::geometry::shapes::kite(Point::new(0.0, 0.2), 0.3, 64).unwrap(),
        ];
        for t in &shapes {
            let mt = classify_elements(&mesh, t);
            for style in [FictitiousStyle::ConvexTangent, FictitiousStyle::ConcavePair] {
                for f in fictitious_anomalies(t, 1.0, style, 8).unwrap() {
                    let mf = classify_elements(&mesh, &f);
                    assert!(mt.iter().zip(&mf).all(|(a, b)| !(a & b)));
                }
            }
        }
    }

    #[test]
    fn concave_pairs_on_square() {
        let t = Region::rectangle(-0.1, -0.1, 0.1, 0.1).unwrap();
        let fs = fictitious_anomalies(&t, 1.0, FictitiousStyle::ConcavePair, 4).unwrap();
        assert_eq!(fs.len(), 4);
        // the first pair covers x > 0.1 and y > 0.1
        assert!(fs[0].contains(Point::new(0.5, -0.5)));
        assert!(fs[0].contains(Point::new(-0.5, 0.5)));
        assert!(!fs[0].contains(Point::new(-0.5, -0.5)));
    }

    #[test]
    fn rejects_boundary_touching() {
        let t = Region::circle(Point::new(0.9, 0.0), 0.2);
        assert!(fictitious_anomalies(&t, 1.0, FictitiousStyle::ConvexTangent, 4).is_err());
    }
}

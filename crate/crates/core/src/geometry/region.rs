use crate::error::{invalid, Result};
use crate::geometry::{Mesh, Point};

/// Simple polygon, vertices in either orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    /// Builds a polygon, rejecting degenerate or self-intersecting vertex lists.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(invalid("polygon needs at least three vertices"));
        }
        if vertices.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(invalid("polygon vertex is not finite"));
        }
        let n = vertices.len();
        for i in 0..n {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            if a == b {
                return Err(invalid(format!("polygon has a repeated vertex at index {i}")));
            }
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                if segments_intersect(a, b, c, d) {
                    return Err(invalid(format!("polygon edges {i} and {j} intersect")));
                }
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Even-odd point-in-polygon test.
    pub fn contains(&self, p: Point) -> bool {
        let v = &self.vertices;
        let mut inside = false;
        let mut j = v.len() - 1;
        for i in 0..v.len() {
            let (a, b) = (v[i], v[j]);
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    pub fn signed_area(&self) -> f64 {
        let v = &self.vertices;
        let n = v.len();
        0.5 * (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>()
    }
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let (o1, o2, o3, o4) = (orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b));
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// Region of the plane used for anomalies, test anomalies and fictitious
/// anomalies. Membership is only ever queried at points of the domain, so
/// `Complement` means the complement within the domain.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Circle { center: Point, radius: f64 },
    Ellipse { center: Point, semi_axes: (f64, f64), rotation: f64 },
    Polygon(Polygon),
    /// Points `p` with `(p - point) · normal >= 0`.
    HalfPlane { point: Point, normal: Point },
    Union(Vec<Region>),
    Complement(Box<Region>),
}

impl Region {
    pub fn circle(center: Point, radius: f64) -> Self {
        Region::Circle { center, radius }
    }

    pub fn ellipse(center: Point, semi_axes: (f64, f64), rotation: f64) -> Self {
        Region::Ellipse { center, semi_axes, rotation }
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        let (x0, x1) = (x0.min(x1), x0.max(x1));
        let (y0, y1) = (y0.min(y1), y0.max(y1));
        Ok(Region::Polygon(Polygon::new(vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])?))
    }

    pub fn polygon(vertices: Vec<Point>) -> Result<Self> {
        Ok(Region::Polygon(Polygon::new(vertices)?))
    }

    pub fn half_plane(point: Point, normal: Point) -> Self {
        Region::HalfPlane { point, normal }
    }

    pub fn union(parts: Vec<Region>) -> Self {
        Region::Union(parts)
    }

    pub fn empty() -> Self {
        Region::Union(Vec::new())
    }

    pub fn complement(inner: Region) -> Self {
        Region::Complement(Box::new(inner))
    }

    /// Ring between two concentric circles: outer minus inner.
    pub fn annulus(center: Point, inner_radius: f64, outer_radius: f64) -> Self {
        Region::complement(Region::union(vec![
            Region::complement(Region::circle(center, outer_radius)),
            Region::circle(center, inner_radius),
        ]))
    }

    pub fn contains(&self, p: Point) -> bool {
        match self {
            Region::Circle { center, radius } => (p - *center).norm() <= *radius,
            Region::Ellipse { center, semi_axes: (a, b), rotation } => {
                let d = p - *center;
                let (s, c) = rotation.sin_cos();
                let u = c * d.x + s * d.y;
                let v = -s * d.x + c * d.y;
                (u / a).powi(2) + (v / b).powi(2) <= 1.0
            }
            Region::Polygon(poly) => poly.contains(p),
            Region::HalfPlane { point, normal } => (p - *point).dot(*normal) >= 0.0,
            Region::Union(parts) => parts.iter().any(|r| r.contains(p)),
            Region::Complement(inner) => !inner.contains(p),
        }
    }

    /// Support function `sup { x · n : x in region }`, `None` for unbounded regions.
    pub fn support(&self, n: Point) -> Option<f64> {
        match self {
            Region::Circle { center, radius } => Some(center.dot(n) + radius * n.norm()),
            Region::Ellipse { center, semi_axes: (a, b), rotation } => {
                let (s, c) = rotation.sin_cos();
                let nu = c * n.x + s * n.y;
                let nv = -s * n.x + c * n.y;
                Some(center.dot(n) + (a * nu).hypot(b * nv))
            }
            Region::Polygon(poly) => {
                poly.vertices().iter().map(|v| v.dot(n)).reduce(f64::max)
            }
            Region::Union(parts) => parts
                .iter()
                .map(|r| r.support(n))
                .try_fold(f64::NEG_INFINITY, |acc, s| s.map(|s| acc.max(s))),
            Region::HalfPlane { .. } | Region::Complement(_) => None,
        }
    }

    /// Largest distance from the origin reached by the region (upper bound for
    /// ellipses), `None` for unbounded regions.
    pub fn bounding_radius(&self) -> Option<f64> {
        match self {
            Region::Circle { center, radius } => Some(center.norm() + radius),
            Region::Ellipse { center, semi_axes: (a, b), .. } => Some(center.norm() + a.max(*b)),
            Region::Polygon(poly) => poly.vertices().iter().map(|v| v.norm()).reduce(f64::max),
            Region::Union(parts) => parts
                .iter()
                .map(Region::bounding_radius)
                .try_fold(0.0f64, |acc, r| r.map(|r| acc.max(r))),
            Region::HalfPlane { .. } | Region::Complement(_) => None,
        }
    }

    /// Closed outline(s) for plotting; circles and ellipses are sampled with
    /// `samples` points. Half-planes and complements have no finite outline.
    pub fn outline(&self, samples: usize) -> Vec<Vec<Point>> {
        let ring = |f: &dyn Fn(f64) -> Point| -> Vec<Point> {
            (0..samples)
                .map(|k| f(2.0 * std::f64::consts::PI * k as f64 / samples as f64))
                .collect()
        };
        match self {
            Region::Circle { center, radius } => vec![ring(&|t| *center + Point::unit(t) * *radius)],
            Region::Ellipse { center, semi_axes: (a, b), rotation } => {
                let (s, c) = rotation.sin_cos();
                vec![ring(&|t| {
                    let (u, v) = (a * t.cos(), b * t.sin());
                    *center + Point::new(c * u - s * v, s * u + c * v)
                })]
            }
            Region::Polygon(poly) => vec![poly.vertices().to_vec()],
            Region::Union(parts) => parts.iter().flat_map(|r| r.outline(samples)).collect(),
            Region::Complement(inner) => match inner.as_ref() {
                // annulus-style complements expose the outlines of their parts
                Region::Union(parts) => parts
                    .iter()
                    .flat_map(|r| match r {
                        Region::Complement(x) => x.outline(samples),
                        other => other.outline(samples),
                    })
                    .collect(),
                _ => Vec::new(),
            },
            Region::HalfPlane { .. } => Vec::new(),
        }
    }
}

/// Exact membership test of `point` in `region`.
pub fn region_contains(region: &Region, point: Point) -> bool {
    region.contains(point)
}

/// Marks every triangle whose centroid lies in `region`.
pub fn classify_elements(mesh: &Mesh, region: &Region) -> Vec<bool> {
    (0..mesh.triangle_count()).map(|t| region.contains(mesh.centroid(t))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_disk_mesh;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn circle_contains_center() {
        assert!(region_contains(&Region::circle(Point::new(0.0, 0.0), 1.0), Point::new(0.0, 0.0)));
    }

    #[test]
    fn half_plane_sign() {
        let hp = Region::half_plane(Point::new(0.0, 0.0), Point::new(1.0, 0.0));
        assert!(!region_contains(&hp, Point::new(-0.1, 5.0)));
        assert!(region_contains(&hp, Point::new(0.0, -3.0)));
    }

    #[test]
    fn union_is_disjunction() {
        let u = Region::union(vec![
            Region::circle(Point::new(-1.0, 0.0), 0.2),
            Region::circle(Point::new(1.0, 0.0), 0.2),
        ]);
        assert!(u.contains(Point::new(1.1, 0.0)));
        assert!(!u.contains(Point::new(0.0, 0.0)));
    }

    #[test]
    fn self_intersecting_polygon_rejected() {
        let bowtie = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        assert!(Polygon::new(bowtie).is_err());
        assert!(Polygon::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn annulus_excludes_hole() {
        let a = Region::annulus(Point::new(0.0, 0.0), 0.3, 0.6);
        assert!(!a.contains(Point::new(0.1, 0.0)));
        assert!(a.contains(Point::new(0.45, 0.0)));
        assert!(!a.contains(Point::new(0.8, 0.0)));
    }

    #[test]
    fn whole_disk_and_empty_masks() {
        let mesh = build_disk_mesh(1.0, 6).unwrap();
        assert!(classify_elements(&mesh, &Region::circle(Point::default(), 2.0)).iter().all(|&b| b));
        assert!(classify_elements(&mesh, &Region::empty()).iter().all(|&b| !b));
    }

    #[test]
    fn centroid_classification_area_converges() {
        let mesh = build_disk_mesh(1.0, 20).unwrap();
        let mask = classify_elements(&mesh, &Region::circle(Point::default(), 0.5));
        let marked: f64 = mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(t, _)| mesh.signed_area(t))
            .sum();
        let rel = (marked / (PI * 0.25) - 1.0).abs();
        assert!(rel < 0.03, "marked/true area off by {rel}");
    }

    #[test]
    fn support_of_square_and_ellipse() {
        let sq = Region::rectangle(-0.1, -0.2, 0.3, 0.4).unwrap();
        assert_eq!(sq.support(Point::new(1.0, 0.0)), Some(0.3));
        assert_eq!(sq.support(Point::new(0.0, -1.0)), Some(0.2));
        let e = Region::ellipse(Point::new(0.0, 0.0), (2.0, 1.0), PI / 2.0);
        assert!((e.support(Point::new(0.0, 1.0)).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(Region::half_plane(Point::default(), Point::new(1.0, 0.0)).support(Point::new(1.0, 0.0)), None);
    }

    proptest! {
        #[test]
        fn classification_monotone_under_inclusion(r1 in 0.05f64..0.9, dr in 0.0f64..0.5, cx in -0.2f64..0.2) {
            let mesh = build_disk_mesh(1.0, 8).unwrap();
            let small = Region::circle(Point::new(cx, 0.0), r1);
            let big = Region::union(vec![small.clone(), Region::circle(Point::new(cx, 0.0), r1 + dr)]);
            let ms = classify_elements(&mesh, &small);
            let mb = classify_elements(&mesh, &big);
            prop_assert!(ms.iter().zip(&mb).all(|(&s, &b)| !s || b));
        }

        #[test]
        fn membership_is_repeatable(x in -1.0f64..1.0, y in -1.0f64..1.0) {
            let r = Region::union(vec![
                Region::ellipse(Point::new(0.1, 0.0), (0.5, 0.2), 0.3),
                Region::complement(Region::circle(Point::default(), 0.8)),
            ]);
            let p = Point::new(x, y);
            prop_assert_eq!(r.contains(p), r.contains(p));
        }
    }
}

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};
use crate::geometry::Point;

/// Triangulated disk with an ordered boundary cycle.
///
/// Triangles are stored counterclockwise. `boundary_nodes` lists the nodes on
/// the outer circle in counterclockwise order and `boundary_edges[i]` joins
/// `boundary_nodes[i]` to `boundary_nodes[i + 1]` (cyclically).
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_nodes: Vec<usize>,
    boundary_edges: Vec<[usize; 2]>,
    radius: f64,
}

impl Mesh {
    /// Assembles a mesh from raw parts and checks every structural invariant.
    pub fn from_parts(
        nodes: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary_nodes: Vec<usize>,
        radius: f64,
    ) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!("mesh radius must be positive, got {radius}")));
        }
        let nb = boundary_nodes.len();
        let boundary_edges = (0..nb)
            .map(|i| [boundary_nodes[i], boundary_nodes[(i + 1) % nb]])
            .collect();
        let mesh = Self { nodes, triangles, boundary_nodes, boundary_edges, radius };
        mesh.validate()?;
        Ok(mesh)
    }

    fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if self.triangles.is_empty() || self.boundary_nodes.len() < 3 {
            return Err(invalid("mesh needs at least one triangle and three boundary nodes"));
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= n) {
                return Err(invalid(format!("triangle {t} references a missing node")));
            }
            if self.signed_area(t) <= 0.0 {
                return Err(invalid(format!("triangle {t} has non-positive signed area")));
            }
        }
        let edges = self.edge_counts();
        let mut open: Vec<(usize, usize)> =
            edges.iter().filter(|(_, &c)| c == 1).map(|(&e, _)| e).collect();
        if edges.values().any(|&c| c > 2) {
            return Err(invalid("an edge is shared by more than two triangles"));
        }
        let mut declared: Vec<(usize, usize)> = self
            .boundary_edges
            .iter()
            .map(|&[a, b]| (a.min(b), a.max(b)))
            .collect();
        open.sort_unstable();
        declared.sort_unstable();
        if open != declared {
            return Err(invalid("boundary cycle does not match the set of single-triangle edges"));
        }
        let mut seen = vec![false; n];
        for &b in &self.boundary_nodes {
            if b >= n || std::mem::replace(&mut seen[b], true) {
                return Err(invalid("boundary cycle repeats or references a missing node"));
            }
            let r = self.nodes[b].norm();
            if ((r - self.radius) / self.radius).abs() > 1e-9 {
                return Err(invalid(format!("boundary node {b} is off the circle (r = {r})")));
            }
        }
        let euler = n as i64 - edges.len() as i64 + self.triangles.len() as i64;
        if euler != 1 {
            return Err(invalid(format!("Euler characteristic is {euler}, expected 1")));
        }
        Ok(())
    }

    fn edge_counts(&self) -> HashMap<(usize, usize), u32> {
        let mut edges = HashMap::with_capacity(self.triangles.len() * 2);
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        edges
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    pub fn boundary_edges(&self) -> &[[usize; 2]] {
        &self.boundary_edges
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary_nodes.len()
    }

    /// Number of distinct edges.
    pub fn edge_count(&self) -> usize {
        self.edge_counts().len()
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        0.5 * (pb - pa).cross(pc - pa)
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangles[t];
        (self.nodes[a] + self.nodes[b] + self.nodes[c]) * (1.0 / 3.0)
    }

    /// Sum of triangle areas.
    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.signed_area(t)).sum()
    }

    /// Polar angle of every boundary node, in boundary order.
    pub fn boundary_angles(&self) -> Vec<f64> {
        self.boundary_nodes
            .iter()
            .map(|&b| {
                let p = self.nodes[b];
                p.y.atan2(p.x)
            })
            .collect()
    }

    /// Copy of the mesh with every coordinate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return Err(invalid("scale factor must be positive"));
        }
        Ok(Self {
            nodes: self.nodes.iter().map(|&p| p * factor).collect(),
            triangles: self.triangles.clone(),
            boundary_nodes: self.boundary_nodes.clone(),
            boundary_edges: self.boundary_edges.clone(),
            radius: self.radius * factor,
        })
    }

    /// Line-oriented text form: a `nodes N triangles T boundary B` header,
    /// then N coordinate lines, T index triples and B boundary indices (0-based).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "nodes {} triangles {} boundary {}",
            self.nodes.len(),
            self.triangles.len(),
            self.boundary_nodes.len()
        );
        for p in &self.nodes {
            let _ = writeln!(out, "{} {}", p.x, p.y);
        }
        for [a, b, c] in &self.triangles {
            let _ = writeln!(out, "{a} {b} {c}");
        }
        for b in &self.boundary_nodes {
            let _ = writeln!(out, "{b}");
        }
        out
    }

    /// Parses the output of [`Mesh::to_text`]. The radius is recovered from the
    /// boundary nodes.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty mesh file".into()))?;
        let tokens: Vec<&str> = header.split_whitespace().collect();
        let (n, t, b) = match tokens.as_slice() {
            ["nodes", n, "triangles", t, "boundary", b] => {
                (parse_count(n)?, parse_count(t)?, parse_count(b)?)
            }
            _ => return Err(Error::Parse(format!("bad mesh header `{header}`"))),
        };
        let mut nodes = Vec::with_capacity(n);
        for _ in 0..n {
            let v = parse_numbers::<f64>(lines.next(), 2)?;
            nodes.push(Point::new(v[0], v[1]));
        }
        let mut triangles = Vec::with_capacity(t);
        for _ in 0..t {
            let v = parse_numbers::<usize>(lines.next(), 3)?;
            triangles.push([v[0], v[1], v[2]]);
        }
        let mut boundary = Vec::with_capacity(b);
        for _ in 0..b {
            boundary.push(parse_numbers::<usize>(lines.next(), 1)?[0]);
        }
        if lines.next().is_some() {
            return Err(Error::Parse("trailing data after mesh blocks".into()));
        }
        let radius = boundary
            .iter()
            .filter_map(|&i| nodes.get(i))
            .map(|p: &Point| p.norm())
            .fold(0.0, f64::max);
        Self::from_parts(nodes, triangles, boundary, radius)
    }
}

fn parse_count(s: &str) -> Result<usize> {
    s.parse().map_err(|e| Error::Parse(format!("mesh header count `{s}`: {e}")))
}

fn parse_numbers<T: std::str::FromStr>(line: Option<&str>, count: usize) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let line = line.ok_or_else(|| Error::Parse("unexpected end of mesh file".into()))?;
    let values = line
        .split_whitespace()
        .map(|s| s.parse::<T>().map_err(|e| Error::Parse(format!("`{line}`: {e}"))))
        .collect::<Result<Vec<T>>>()?;
    if values.len() != count {
        return Err(Error::Parse(format!("expected {count} values in `{line}`")));
    }
    Ok(values)
}

/// Concentric-ring triangulation of the disk of the given radius.
///
/// Ring `k` (1..=rings) carries `6k` equally spaced nodes at radius
/// `radius * k / rings`; consecutive rings are zipped together by angle. The
/// result has `1 + 3 rings (rings + 1)` nodes, `6 rings²` triangles and `6 rings`
/// boundary nodes.
pub fn build_disk_mesh(radius: f64, rings: usize) -> Result<Mesh> {
    if rings == 0 {
        return Err(invalid("rings must be at least 1"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(invalid(format!("radius must be positive, got {radius}")));
    }
    let ring_start = |k: usize| if k == 0 { 0 } else { 1 + 3 * k * (k - 1) };
    let mut nodes = Vec::with_capacity(ring_start(rings + 1));
    nodes.push(Point::new(0.0, 0.0));
    for k in 1..=rings {
        let r = radius * k as f64 / rings as f64;
        let count = 6 * k;
        for j in 0..count {
            let theta = 2.0 * PI * j as f64 / count as f64;
            nodes.push(Point::new(r * theta.cos(), r * theta.sin()));
        }
    }
    let mut triangles = Vec::with_capacity(6 * rings * rings);
    for k in 1..=rings {
        let outer = ring_start(k);
        let n_out = 6 * k;
        if k == 1 {
            for j in 0..n_out {
                triangles.push([0, outer + j, outer + (j + 1) % n_out]);
            }
            continue;
        }
        let inner = ring_start(k - 1);
        let n_in = 6 * (k - 1);
        let (mut i, mut j) = (0usize, 0usize);
        while i < n_in || j < n_out {
            let advance_outer = i == n_in || (j < n_out && (j + 1) * n_in <= (i + 1) * n_out);
            if advance_outer {
                triangles.push([inner + i % n_in, outer + j, outer + (j + 1) % n_out]);
                j += 1;
            } else {
                triangles.push([inner + i, outer + j % n_out, inner + (i + 1) % n_in]);
                i += 1;
            }
        }
    }
    let boundary: Vec<usize> = (ring_start(rings)..ring_start(rings + 1)).collect();
    Mesh::from_parts(nodes, triangles, boundary, radius)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_ring_is_hexagonal_fan() {
        let mesh = build_disk_mesh(1.0, 1).unwrap();
        assert_eq!(mesh.node_count(), 7);
        assert_eq!(mesh.boundary_count(), 6);
        assert_eq!(mesh.triangle_count(), 6);
    }

    #[test]
    fn zero_rings_rejected() {
        assert!(matches!(build_disk_mesh(1.0, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn counts_follow_ring_formulas() {
        for rings in 1..=12 {
            let mesh = build_disk_mesh(1.0, rings).unwrap();
            assert_eq!(mesh.boundary_count(), 6 * rings);
            assert_eq!(mesh.node_count(), 1 + 3 * rings * (rings + 1));
            assert_eq!(mesh.triangle_count(), 6 * rings * rings);
            // brute-force edge enumeration for the Euler relation
            let mut edges = std::collections::BTreeSet::new();
            for tri in mesh.triangles() {
                for k in 0..3 {
                    let (a, b) = (tri[k], tri[(k + 1) % 3]);
                    edges.insert((a.min(b), a.max(b)));
                }
            }
            let euler = mesh.node_count() as i64 - edges.len() as i64 + mesh.triangle_count() as i64;
            assert_eq!(euler, 1);
        }
    }

    #[test]
    fn desk_scale_boundary_matches_target() {
        let mesh = build_disk_mesh(0.30, 43).unwrap();
        assert_eq!(mesh.boundary_count(), 258);
        assert!((mesh.boundary_count() as i64 - 256).abs() <= 2);
    }

    #[test]
    fn area_converges_to_disk() {
        let mesh = build_disk_mesh(1.0, 32).unwrap();
        let rel = (mesh.area() - PI).abs() / PI;
        assert!(rel < 1e-3, "{rel}");
    }

    #[test]
    fn text_roundtrip_is_exact() {
        let mesh = build_disk_mesh(0.03, 5).unwrap();
        let back = Mesh::from_text(&mesh.to_text()).unwrap();
        assert_eq!(back.nodes(), mesh.nodes());
        assert_eq!(back.triangles(), mesh.triangles());
        assert_eq!(back.boundary_nodes(), mesh.boundary_nodes());
        assert!((back.radius() - mesh.radius()).abs() < 1e-15);
    }

    #[test]
    fn malformed_text_rejected() {
        assert!(Mesh::from_text("nodes 3 triangles 1").is_err());
        assert!(Mesh::from_text("nodes 1 triangles 0 boundary 0\n0 0\n").is_err());
    }

    #[test]
    fn inverted_triangle_rejected() {
        let mesh = build_disk_mesh(1.0, 2).unwrap();
        let mut tris = mesh.triangles().to_vec();
        tris[0].swap(1, 2);
        let res = Mesh::from_parts(mesh.nodes().to_vec(), tris, mesh.boundary_nodes().to_vec(), 1.0);
        assert!(res.is_err());
    }
}

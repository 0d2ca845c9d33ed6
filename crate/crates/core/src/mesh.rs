//! Indexed triangle meshes with topology and measure queries.

use std::collections::HashMap;

use nalgebra::Point3;

/// Coordinate system a mesh lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    /// The unit parameter cube of a solid.
    Parametric,
    /// Physical coordinates after mapping through a solid.
    Physical,
}

/// An indexed triangle mesh. Triangles are counter-clockwise when seen
/// from the side their normal points to.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Point3<f64>>,
    pub triangles: Vec<[u32; 3]>,
    pub space: Space,
}

impl TriangleMesh {
    pub fn new(space: Space) -> Self {
        Self { vertices: Vec::new(), triangles: Vec::new(), space }
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Reverses the winding of every triangle.
    pub fn flip_orientation(&mut self) {
        for tri in &mut self.triangles {
            tri.swap(1, 2);
        }
    }

    fn edge_counts(&self) -> HashMap<(u32, u32), (u32, i32)> {
        // For each undirected edge: (number of incident triangles, net
        // direction). A watertight oriented mesh has exactly (2, 0)
        // everywhere.
        let mut counts: HashMap<(u32, u32), (u32, i32)> = HashMap::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let a = tri[e];
                let b = tri[(e + 1) % 3];
                let key = (a.min(b), a.max(b));
                let entry = counts.entry(key).or_insert((0, 0));
                entry.0 += 1;
                entry.1 += if a < b { 1 } else { -1 };
            }
        }
        counts
    }

    /// Undirected edges that are not shared by exactly two triangles with
    /// opposite orientation, sorted for reproducible reporting.
    pub fn unmatched_edges(&self) -> Vec<(u32, u32)> {
        let mut bad: Vec<(u32, u32)> = self
            .edge_counts()
            .into_iter()
            .filter(|&(_, (count, net))| count != 2 || net != 0)
            .map(|(edge, _)| edge)
            .collect();
        bad.sort_unstable();
        bad
    }

    /// Whether the mesh is watertight and consistently oriented.
    pub fn is_closed(&self) -> bool {
        self.edge_counts().values().all(|&(count, net)| count == 2 && net == 0)
    }

    /// `V - E + F`. A closed surface of genus g gives `2 - 2g` per
    /// connected component; the mesh must not carry unreferenced vertices.
    pub fn euler_characteristic(&self) -> i64 {
        let edges = self.edge_counts().len() as i64;
        self.vertices.len() as i64 - edges + self.triangles.len() as i64
    }

    pub fn surface_area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let a = self.vertices[t[0] as usize];
                let b = self.vertices[t[1] as usize];
                let c = self.vertices[t[2] as usize];
                (b - a).cross(&(c - a)).norm() * 0.5
            })
            .sum()
    }

    /// Volume by the divergence theorem; positive when triangle normals
    /// point out of the enclosed region. Only meaningful for closed
    /// meshes.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let a = self.vertices[t[0] as usize].coords;
                let b = self.vertices[t[1] as usize].coords;
                let c = self.vertices[t[2] as usize].coords;
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    pub fn bounding_box(&self) -> Option<(Point3<f64>, Point3<f64>)> {
        let first = self.vertices.first()?;
        let mut lo = *first;
        let mut hi = *first;
        for p in &self.vertices {
            for axis in 0..3 {
                lo[axis] = lo[axis].min(p[axis]);
                hi[axis] = hi[axis].max(p[axis]);
            }
        }
        Some((lo, hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Regular right tetrahedron on the unit corner, outward-wound.
    fn corner_tetrahedron() -> TriangleMesh {
        TriangleMesh {
            vertices: vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
                Point3::new(0.0, 0.0, 1.0),
            ],
            triangles: vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
            space: Space::Physical,
        }
    }

    #[test]
    fn tetrahedron_topology_and_measures() {
        let tet = corner_tetrahedron();
        assert!(tet.is_closed());
        assert!(tet.unmatched_edges().is_empty());
        assert_eq!(tet.euler_characteristic(), 2);
        assert_abs_diff_eq!(tet.signed_volume(), 1.0 / 6.0, epsilon = 1e-15);
        let slant = 0.5 * f64::sqrt(3.0); // area of the diagonal face
        assert_abs_diff_eq!(tet.surface_area(), 1.5 + slant, epsilon = 1e-12);
    }

    #[test]
    fn flipping_negates_volume() {
        let mut tet = corner_tetrahedron();
        tet.flip_orientation();
        assert!(tet.is_closed());
        assert_abs_diff_eq!(tet.signed_volume(), -1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn open_mesh_reports_boundary() {
        let mut tet = corner_tetrahedron();
        tet.triangles.pop();
        assert!(!tet.is_closed());
        assert_eq!(tet.unmatched_edges(), vec![(1, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn misoriented_edge_is_unmatched() {
        let mut tet = corner_tetrahedron();
        tet.triangles[3] = [1, 3, 2]; // flip one face only
        // Every edge of the flipped face now has doubled direction.
        assert!(!tet.is_closed());
        assert_eq!(tet.unmatched_edges().len(), 3);
    }

    #[test]
    fn bounding_box_and_empty_mesh() {
        let tet = corner_tetrahedron();
        let (lo, hi) = tet.bounding_box().unwrap();
        assert_eq!(lo, Point3::new(0.0, 0.0, 0.0));
        assert_eq!(hi, Point3::new(1.0, 1.0, 1.0));
        let empty = TriangleMesh::new(Space::Parametric);
        assert!(empty.is_empty());
        assert!(empty.bounding_box().is_none());
        assert!(empty.is_closed());
        assert_eq!(empty.signed_volume(), 0.0);
    }
}

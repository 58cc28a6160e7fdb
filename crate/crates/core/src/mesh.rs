//! Conforming triangulations of the square `(-1, 1)^2` and their uniform red
//! refinement.
//!
//! Local edge `l` of a triangle joins its local vertices `l` and `(l + 1) % 3`.
//! Each face stores one unit normal: on boundary faces it is the outward
//! normal of the single adjacent element; on interior faces it is the
//! outward normal of the adjacent element with the larger index (the
//! *owner*, `K+`), i.e. it points from `K+` into `K-`.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Reference triangle vertices.
pub const REFERENCE_VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceSide {
    pub element: usize,
    pub local_edge: usize,
}

#[derive(Debug, Clone)]
pub struct Face<T> {
    /// Global vertex ids of the face end points.
    pub vertices: [usize; 2],
    /// Element whose outward normal is `normal` (`K+` on interior faces).
    pub owner: FaceSide,
    /// The other element (`K-`); `None` on the boundary.
    pub neighbor: Option<FaceSide>,
    pub normal: [T; 2],
    pub length: T,
}

impl<T: Real> Face<T> {
    pub fn is_boundary(&self) -> bool {
        self.neighbor.is_none()
    }

    /// Outward unit normal of `element` on this face.
    pub fn outward_normal(&self, element: usize) -> [T; 2] {
        if element == self.owner.element {
            self.normal
        } else {
            [-self.normal[0], -self.normal[1]]
        }
    }

    pub fn sides(&self) -> impl Iterator<Item = FaceSide> + '_ {
        std::iter::once(self.owner).chain(self.neighbor)
    }
}

/// Affine map `x = origin + jac * xi` from the reference triangle.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry<T> {
    pub origin: [T; 2],
    pub jac: [[T; 2]; 2],
    pub inv: [[T; 2]; 2],
    /// `|det jac| = 2 |K|`.
    pub det: T,
}

impl<T: Real> ElementGeometry<T> {
    fn new(p: [[T; 2]; 3]) -> Self {
        let jac = [
            [p[1][0] - p[0][0], p[2][0] - p[0][0]],
            [p[1][1] - p[0][1], p[2][1] - p[0][1]],
        ];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let inv = [
            [jac[1][1] / det, -jac[0][1] / det],
            [-jac[1][0] / det, jac[0][0] / det],
        ];
        Self {
            origin: p[0],
            jac,
            inv,
            det: det.abs(),
        }
    }

    pub fn to_physical(&self, xi: [T; 2]) -> [T; 2] {
        [
            self.origin[0] + self.jac[0][0] * xi[0] + self.jac[0][1] * xi[1],
            self.origin[1] + self.jac[1][0] * xi[0] + self.jac[1][1] * xi[1],
        ]
    }

    /// Physical point of `anchor_phys + jac * offset`, where `anchor_phys`
    /// is the image of a reference vertex and `offset` is taken from it.
    pub fn offset_from(&self, anchor_phys: [T; 2], offset: [T; 2]) -> [T; 2] {
        [
            anchor_phys[0] + self.jac[0][0] * offset[0] + self.jac[0][1] * offset[1],
            anchor_phys[1] + self.jac[1][0] * offset[0] + self.jac[1][1] * offset[1],
        ]
    }

    pub fn to_reference(&self, x: [T; 2]) -> [T; 2] {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        [
            self.inv[0][0] * d[0] + self.inv[0][1] * d[1],
            self.inv[1][0] * d[0] + self.inv[1][1] * d[1],
        ]
    }

    /// Physical gradient from a reference gradient: `J^{-T} grad_xi`.
    pub fn physical_gradient(&self, g: [T; 2]) -> [T; 2] {
        [
            self.inv[0][0] * g[0] + self.inv[1][0] * g[1],
            self.inv[0][1] * g[0] + self.inv[1][1] * g[1],
        ]
    }

    pub fn area(&self) -> T {
        self.det * T::lit(0.5)
    }
}

/// Affine parametrization `s in [0,1] -> reference point` of a face seen
/// from one adjacent element; `s = 0` is `face.vertices[0]`.
#[derive(Debug, Clone, Copy)]
pub struct TraceMap<T> {
    pub start: [T; 2],
    pub end: [T; 2],
}

impl<T: Real> TraceMap<T> {
    pub fn at(&self, s: T) -> [T; 2] {
        [
            self.start[0] + s * (self.end[0] - self.start[0]),
            self.start[1] + s * (self.end[1] - self.start[1]),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct SideTrace<T> {
    pub element: usize,
    pub local_edge: usize,
    pub outward_normal: [T; 2],
    pub trace: TraceMap<T>,
}

#[derive(Debug, Clone)]
pub struct FaceGeometry<T> {
    pub length: T,
    pub normal: [T; 2],
    pub endpoints: [[T; 2]; 2],
    /// Owner first, then the neighbor if any.
    pub sides: Vec<SideTrace<T>>,
}

#[derive(Debug, Clone)]
pub struct Mesh<T> {
    pub vertices: Vec<[T; 2]>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub faces: Vec<Face<T>>,
    /// Face id of each local edge.
    pub element_faces: Vec<[usize; 3]>,
    pub interior_faces: Vec<usize>,
    pub boundary_faces: Vec<usize>,
    pub geometry: Vec<ElementGeometry<T>>,
    /// Largest element diameter (longest edge).
    pub h_max: T,
    /// Number of red refinements applied to the initial mesh.
    pub level: usize,
}

impl<T: Real> Mesh<T> {
    /// Builds the mesh topology from vertices and counterclockwise triangles.
    pub fn from_parts(vertices: Vec<[T; 2]>, triangles: Vec<[usize; 3]>, level: usize) -> Result<Self> {
        for (e, t) in triangles.iter().enumerate() {
            for &v in t {
                if v >= vertices.len() {
                    return Err(Error::OutOfRange {
                        what: "vertex",
                        index: v,
                        len: vertices.len(),
                    });
                }
            }
            let p = t.map(|v| vertices[v]);
            let cross = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
            if cross <= T::zero() {
                return Err(Error::InvalidParameter(format!("triangle {e} is not counterclockwise")));
            }
        }

        let mut faces: Vec<Face<T>> = Vec::with_capacity(triangles.len() * 3 / 2 + 8);
        let mut element_faces = vec![[usize::MAX; 3]; triangles.len()];
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(faces.capacity());
        for (e, t) in triangles.iter().enumerate() {
            for l in 0..3 {
                let (a, b) = (t[l], t[(l + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let side = FaceSide { element: e, local_edge: l };
                let normal = outward_normal(vertices[a], vertices[b]);
                match lookup.get(&key) {
                    None => {
                        let id = faces.len();
                        lookup.insert(key, id);
                        let d = [vertices[b][0] - vertices[a][0], vertices[b][1] - vertices[a][1]];
                        faces.push(Face {
                            vertices: [a, b],
                            owner: side,
                            neighbor: None,
                            normal,
                            length: (d[0] * d[0] + d[1] * d[1]).sqrt(),
                        });
                        element_faces[e][l] = id;
                    }
                    Some(&id) => {
                        let f = &mut faces[id];
                        if f.neighbor.is_some() {
                            return Err(Error::InvalidParameter(format!(
                                "edge ({a},{b}) shared by more than two triangles"
                            )));
                        }
                        // elements are visited in increasing order, so `e` is K+.
                        f.neighbor = Some(f.owner);
                        f.owner = side;
                        f.normal = normal;
                        element_faces[e][l] = id;
                    }
                }
            }
        }
        let interior_faces = (0..faces.len()).filter(|&f| !faces[f].is_boundary()).collect();
        let boundary_faces = (0..faces.len()).filter(|&f| faces[f].is_boundary()).collect();
        let geometry: Vec<_> = triangles
            .iter()
            .map(|t| ElementGeometry::new(t.map(|v| vertices[v])))
            .collect();
        let mut mesh = Self {
            vertices,
            triangles,
            faces,
            element_faces,
            interior_faces,
            boundary_faces,
            geometry,
            h_max: T::zero(),
            level,
        };
        mesh.h_max = (0..mesh.num_elements())
            .map(|e| mesh.element_diameter(e))
            .fold(T::zero(), T::max);
        Ok(mesh)
    }

    pub fn num_elements(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn element_points(&self, e: usize) -> [[T; 2]; 3] {
        self.triangles[e].map(|v| self.vertices[v])
    }

    pub fn element_area(&self, e: usize) -> T {
        self.geometry[e].area()
    }

    /// Longest edge of element `e`.
    pub fn element_diameter(&self, e: usize) -> T {
        let p = self.element_points(e);
        (0..3)
            .map(|l| dist(p[l], p[(l + 1) % 3]))
            .fold(T::zero(), T::max)
    }

    /// Radius of the inscribed circle of element `e`.
    pub fn element_inradius(&self, e: usize) -> T {
        let p = self.element_points(e);
        let perimeter: T = (0..3).map(|l| dist(p[l], p[(l + 1) % 3])).sum();
        T::lit(2.0) * self.element_area(e) / perimeter
    }

    pub fn total_area(&self) -> T {
        (0..self.num_elements()).map(|e| self.element_area(e)).sum()
    }

    /// Length, stored normal, end points and per-side trace maps of a face.
    pub fn face_geometry(&self, face_id: usize) -> Result<FaceGeometry<T>> {
        let face = self.faces.get(face_id).ok_or(Error::OutOfRange {
            what: "face",
            index: face_id,
            len: self.faces.len(),
        })?;
        let sides = face
            .sides()
            .map(|s| SideTrace {
                element: s.element,
                local_edge: s.local_edge,
                outward_normal: face.outward_normal(s.element),
                trace: self.trace_map(face, s),
            })
            .collect();
        Ok(FaceGeometry {
            length: face.length,
            normal: face.normal,
            endpoints: [self.vertices[face.vertices[0]], self.vertices[face.vertices[1]]],
            sides,
        })
    }

    fn trace_map(&self, face: &Face<T>, side: FaceSide) -> TraceMap<T> {
        let t = self.triangles[side.element];
        let (la, lb) = (side.local_edge, (side.local_edge + 1) % 3);
        let (ls, le) = if t[la] == face.vertices[0] { (la, lb) } else { (lb, la) };
        let r = |l: usize| [T::lit(REFERENCE_VERTICES[l][0]), T::lit(REFERENCE_VERTICES[l][1])];
        TraceMap {
            start: r(ls),
            end: r(le),
        }
    }

    /// Elements having `point` as a vertex (exact coordinate match).
    pub fn elements_touching(&self, point: [T; 2]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (e, t) in self.triangles.iter().enumerate() {
            for (l, &v) in t.iter().enumerate() {
                if self.vertices[v] == point {
                    out.push((e, l));
                }
            }
        }
        out
    }

    /// Uniform red refinement: every triangle is split into four congruent
    /// children through its edge midpoints. Children of element `e` are
    /// `4e .. 4e + 3`; existing vertices keep their ids.
    pub fn red_refine(&self) -> Self {
        let mut vertices = self.vertices.clone();
        let mut midpoint = vec![usize::MAX; self.faces.len()];
        let half = T::lit(0.5);
        let mut triangles = Vec::with_capacity(self.triangles.len() * 4);
        for (e, t) in self.triangles.iter().enumerate() {
            let mut m = [0usize; 3];
            for l in 0..3 {
                let f = self.element_faces[e][l];
                if midpoint[f] == usize::MAX {
                    let (a, b) = (self.vertices[t[l]], self.vertices[t[(l + 1) % 3]]);
                    midpoint[f] = vertices.len();
                    vertices.push([half * (a[0] + b[0]), half * (a[1] + b[1])]);
                }
                m[l] = midpoint[f];
            }
            let [a, b, c] = *t;
            let [mab, mbc, mca] = m;
            triangles.push([a, mab, mca]);
            triangles.push([mab, b, mbc]);
            triangles.push([mca, mbc, c]);
            triangles.push([mbc, mca, mab]);
        }
        Self::from_parts(vertices, triangles, self.level + 1).expect("red refinement preserves validity")
    }

    /// Writes `v x y` and `t i j k` lines.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        for v in &self.vertices {
            writeln!(w, "v {} {}", v[0], v[1])?;
        }
        for t in &self.triangles {
            writeln!(w, "t {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }

    /// Reads the format produced by [`Mesh::write_text`].
    pub fn read_text<R: BufRead>(r: R, level: usize) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for line in r.lines() {
            let line = line?;
            let mut it = line.split_whitespace();
            let bad = || Error::InvalidParameter(format!("malformed mesh line: {line}"));
            match it.next() {
                Some("v") => {
                    let mut c = [T::zero(); 2];
                    for x in &mut c {
                        let v: f64 = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
                        *x = T::lit(v);
                    }
                    vertices.push(c);
                }
                Some("t") => {
                    let mut c = [0usize; 3];
                    for x in &mut c {
                        *x = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
                    }
                    triangles.push(c);
                }
                None => {}
                Some(_) => return Err(bad()),
            }
        }
        Self::from_parts(vertices, triangles, level)
    }
}

/// Initial mesh of `(-1,1)^2`: the 2x2 grid of unit squares, each cut along
/// a diagonal through the origin, so diagonal orientations alternate from
/// square to square (8 triangles, 9 vertices).
pub fn build_initial_mesh<T: Real>() -> Mesh<T> {
    let mut vertices = Vec::with_capacity(9);
    for j in 0..3 {
        for i in 0..3 {
            vertices.push([T::of_usize(i) - T::one(), T::of_usize(j) - T::one()]);
        }
    }
    let id = |i: usize, j: usize| j * 3 + i;
    let mut triangles = Vec::with_capacity(8);
    for j in 0..2 {
        for i in 0..2 {
            let (v00, v10, v01, v11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            if (i + j) % 2 == 0 {
                // diagonal v00 - v11
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            } else {
                // diagonal v10 - v01
                triangles.push([v00, v10, v01]);
                triangles.push([v10, v11, v01]);
            }
        }
    }
    Mesh::from_parts(vertices, triangles, 0).expect("initial mesh is valid")
}

/// Initial mesh refined `level` times.
pub fn build_mesh<T: Real>(level: usize) -> Mesh<T> {
    let mut m = build_initial_mesh();
    for _ in 0..level {
        m = m.red_refine();
    }
    m
}

fn outward_normal<T: Real>(a: [T; 2], b: [T; 2]) -> [T; 2] {
    let t = [b[0] - a[0], b[1] - a[1]];
    let len = (t[0] * t[0] + t[1] * t[1]).sqrt();
    [t[1] / len, -t[0] / len]
}

fn dist<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    ((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1])).sqrt()
}

//! Scene descriptions for the two simulation settings: sets of absorbing
//! circular pores on the reflecting plane z = 0, and convex polyhedral
//! meshes whose faces are absorbing or reflecting. Scenes are immutable
//! after construction and shareable across workers.
//!
//! Meshes are polygon soups with precomputed plane data; the propagators
//! only ever need plane queries and 2D containment, so there is no
//! half-edge structure. Nearest-pore / target-face searches are linear
//! scans over pores and faces.

mod generators;
mod hull;
mod vec3;

pub use generators::{make_cube, make_ellipsoid_skirt, make_fibonacci_sphere};
pub use hull::convex_hull;
pub use vec3::Vec3;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// 10 x double precision machine epsilon: lower bound for distances and
/// hemisphere radii so particles cannot get stuck on absorber edges.
pub const DISTANCE_FLOOR: f64 = 10.0 * f64::EPSILON;

/// Convexity / planarity tolerance, relative to the mesh diameter.
const CONVEXITY_TOL: f64 = 1e-10;

// ---------------------------------------------------------------------------
// Planar scenes
// ---------------------------------------------------------------------------

/// A circular absorbing pore on the plane z = 0.
///
/// Capacitance of a circular pore is 2a/pi; general-shape pores enter only
/// the analytic layer (through an externally supplied capacitance), the
/// sampler itself needs the circular geometry for its distance queries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanarPore {
    pub center: [f64; 2],
    pub radius: f64,
    pub label: String,
}

impl PlanarPore {
    pub fn capacitance(&self) -> f64 {
        2.0 * self.radius / std::f64::consts::PI
    }
}

/// A set of non-overlapping pores plus the derived bounding disc and the
/// launch/landing ratio used by the reinsertion propagator.
#[derive(Debug, Clone)]
pub struct PlanarScene {
    pores: Vec<PlanarPore>,
    pub bounding_disc_center: [f64; 2],
    pub bounding_disc_radius: f64,
    pub reinsertion_ratio: f64,
}

impl PlanarScene {
    pub fn new(pores: Vec<PlanarPore>, reinsertion_ratio: f64) -> Result<Self> {
        if !(reinsertion_ratio > 1.0) {
            return Err(Error::config(format!(
                "reinsertion ratio {reinsertion_ratio} must be > 1"
            )));
        }
        for p in &pores {
            if !(p.radius > 0.0) {
                return Err(Error::config(format!(
                    "pore '{}' has non-positive radius",
                    p.label
                )));
            }
        }
        for i in 0..pores.len() {
            for j in (i + 1)..pores.len() {
                let dx = pores[i].center[0] - pores[j].center[0];
                let dy = pores[i].center[1] - pores[j].center[1];
                let d = (dx * dx + dy * dy).sqrt();
                if d <= pores[i].radius + pores[j].radius {
                    return Err(Error::config(format!(
                        "pores '{}' and '{}' overlap",
                        pores[i].label, pores[j].label
                    )));
                }
            }
        }
        let (bounding_disc_center, bounding_disc_radius) = enclosing_disc(&pores);
        Ok(PlanarScene {
            pores,
            bounding_disc_center,
            bounding_disc_radius,
            reinsertion_ratio,
        })
    }

    pub fn pores(&self) -> &[PlanarPore] {
        &self.pores
    }

    /// Radius of the decision disc D_a = ratio x smallest enclosing disc;
    /// impacts outside it go to the escape/reinsertion propagator.
    pub fn decision_radius(&self) -> f64 {
        self.reinsertion_ratio * self.bounding_disc_radius
    }
}

/// Bounding disc of a set of discs: the better of a centroid-centered disc
/// (exact for symmetric layouts) and Ritter-style growth (tighter for
/// lopsided ones). Always enclosing, close to the smallest.
fn enclosing_disc(pores: &[PlanarPore]) -> ([f64; 2], f64) {
    if pores.is_empty() {
        return ([0.0, 0.0], 0.0);
    }
    let radius_about = |c: [f64; 2]| -> f64 {
        pores
            .iter()
            .map(|p| {
                let dx = p.center[0] - c[0];
                let dy = p.center[1] - c[1];
                (dx * dx + dy * dy).sqrt() + p.radius
            })
            .fold(0.0_f64, f64::max)
    };
    let n = pores.len() as f64;
    let centroid = pores.iter().fold([0.0, 0.0], |acc, p| {
        [acc[0] + p.center[0] / n, acc[1] + p.center[1] / n]
    });
    let mut best_c = centroid;
    let mut best_r = radius_about(centroid);

    let mut c = pores[0].center;
    let mut r = pores[0].radius;
    for _ in 0..2 {
        for p in pores {
            let dx = p.center[0] - c[0];
            let dy = p.center[1] - c[1];
            let d = (dx * dx + dy * dy).sqrt();
            let reach = d + p.radius;
            if reach > r {
                let grow = 0.5 * (reach - r);
                r += grow;
                if d > 0.0 {
                    c[0] += dx / d * grow;
                    c[1] += dy / d * grow;
                }
            }
        }
    }
    if r < best_r {
        best_c = c;
        best_r = r;
    }
    (best_c, best_r * (1.0 + 1e-12))
}

/// Distance from an on-plane point to the absorbing set.
///
/// Returns `(0, Some(pore))` when the point lies inside or on a pore,
/// otherwise the positive distance (floored at 10 eps) and `None`.
pub fn nearest_pore_distance(point: [f64; 2], scene: &PlanarScene) -> (f64, Option<usize>) {
    let mut best = f64::INFINITY;
    for (k, p) in scene.pores.iter().enumerate() {
        let dx = point[0] - p.center[0];
        let dy = point[1] - p.center[1];
        let d = (dx * dx + dy * dy).sqrt() - p.radius;
        if d <= 0.0 {
            return (0.0, Some(k));
        }
        if d < best {
            best = d;
        }
    }
    (best.max(DISTANCE_FLOOR), None)
}

// ---------------------------------------------------------------------------
// Convex meshes
// ---------------------------------------------------------------------------

/// A planar polygonal face of a convex mesh with its precomputed plane and
/// in-plane coordinate frame.
#[derive(Debug, Clone)]
pub struct Face {
    pub verts: Vec<u32>,
    /// Unit outward normal.
    pub normal: Vec3,
    /// Plane offset: the face plane is { x : normal . x = offset }.
    pub offset: f64,
    pub absorbing: bool,
    pub label: String,
    /// In-plane orthonormal frame rooted at the first vertex.
    pub frame_origin: Vec3,
    pub e1: Vec3,
    pub e2: Vec3,
    /// Vertex loop in frame coordinates (counter-clockwise).
    pub poly2: Vec<[f64; 2]>,
}

impl Face {
    /// Map a 3D point to face-frame coordinates (dropping the normal part).
    #[inline]
    pub fn to_local(&self, p: Vec3) -> [f64; 2] {
        let d = p - self.frame_origin;
        [d.dot(self.e1), d.dot(self.e2)]
    }

    /// Map face-frame coordinates and height along the normal back to 3D.
    #[inline]
    pub fn from_local(&self, u: f64, v: f64, h: f64) -> Vec3 {
        self.frame_origin + self.e1 * u + self.e2 * v + self.normal * h
    }

    pub fn centroid(&self, vertices: &[Vec3]) -> Vec3 {
        let mut c = Vec3::ZERO;
        for &i in &self.verts {
            c += vertices[i as usize];
        }
        c / self.verts.len() as f64
    }

    /// Area of the (planar) polygon.
    pub fn area(&self, vertices: &[Vec3]) -> f64 {
        let mut s = Vec3::ZERO;
        let n = self.verts.len();
        for i in 0..n {
            let a = vertices[self.verts[i] as usize];
            let b = vertices[self.verts[(i + 1) % n] as usize];
            s += a.cross(b);
        }
        0.5 * s.dot(self.normal).abs()
    }
}

/// Input description of one face: vertex loop, absorbing flag, label.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FaceSpec {
    pub verts: Vec<u32>,
    pub absorbing: bool,
    #[serde(default)]
    pub label: Option<String>,
}

/// A convex polyhedron with absorbing/reflecting faces.
#[derive(Debug, Clone)]
pub struct ConvexMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<Face>,
    pub bounding_sphere_center: Vec3,
    pub bounding_sphere_radius: f64,
    pub reinsertion_ratio: f64,
    /// Plane data in structure-of-arrays layout so the target-face scan
    /// vectorizes: nx, ny, nz, offset per face.
    plane_nx: Vec<f64>,
    plane_ny: Vec<f64>,
    plane_nz: Vec<f64>,
    plane_off: Vec<f64>,
}

impl ConvexMesh {
    /// Build a mesh from a vertex list and face loops, validating convexity,
    /// planarity and winding. Vertex loops must be counter-clockwise when
    /// seen from outside; loops wound the other way are reversed.
    pub fn new(vertices: Vec<Vec3>, face_specs: Vec<FaceSpec>, reinsertion_ratio: f64) -> Result<Self> {
        if !(reinsertion_ratio > 1.0) {
            return Err(Error::config(format!(
                "reinsertion ratio {reinsertion_ratio} must be > 1"
            )));
        }
        if vertices.len() < 4 || face_specs.len() < 4 {
            return Err(Error::config(
                "a convex mesh needs at least 4 vertices and 4 faces".to_string(),
            ));
        }
        let interior = vertices.iter().fold(Vec3::ZERO, |a, &v| a + v) / vertices.len() as f64;
        let diameter = vertices
            .iter()
            .map(|v| (*v - interior).norm())
            .fold(0.0_f64, f64::max)
            * 2.0;
        let tol = CONVEXITY_TOL * diameter.max(1e-300);

        let mut faces = Vec::with_capacity(face_specs.len());
        for (fi, spec) in face_specs.into_iter().enumerate() {
            if spec.verts.len() < 3 {
                return Err(Error::config(format!("face {fi} has fewer than 3 vertices")));
            }
            for &v in &spec.verts {
                if v as usize >= vertices.len() {
                    return Err(Error::config(format!(
                        "face {fi} references vertex {v} out of range"
                    )));
                }
            }
            let mut loop_verts = spec.verts.clone();
            // Newell normal of the loop.
            let mut n = Vec3::ZERO;
            for i in 0..loop_verts.len() {
                let a = vertices[loop_verts[i] as usize];
                let b = vertices[loop_verts[(i + 1) % loop_verts.len()] as usize];
                n += a.cross(b);
            }
            let mut normal = n.normalized();
            if normal.norm_sq() == 0.0 {
                return Err(Error::config(format!("face {fi} is degenerate")));
            }
            let centroid = loop_verts
                .iter()
                .fold(Vec3::ZERO, |a, &i| a + vertices[i as usize])
                / loop_verts.len() as f64;
            // Outward orientation: the interior point sits behind the plane.
            if normal.dot(interior - centroid) > 0.0 {
                normal = -normal;
                loop_verts.reverse();
            }
            let offset = normal.dot(centroid);
            for &v in &loop_verts {
                if (normal.dot(vertices[v as usize]) - offset).abs() > tol {
                    return Err(Error::config(format!(
                        "face {fi} ('{}') is not planar",
                        spec.label.as_deref().unwrap_or("")
                    )));
                }
            }

            let frame_origin = vertices[loop_verts[0] as usize];
            let e1 = (vertices[loop_verts[1] as usize] - frame_origin).normalized();
            let e2 = normal.cross(e1);
            let poly2: Vec<[f64; 2]> = loop_verts
                .iter()
                .map(|&i| {
                    let d = vertices[i as usize] - frame_origin;
                    [d.dot(e1), d.dot(e2)]
                })
                .collect();
            // CCW and convexity of the loop itself.
            let m = poly2.len();
            for i in 0..m {
                let a = poly2[i];
                let b = poly2[(i + 1) % m];
                let c = poly2[(i + 2) % m];
                let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
                if cross < -tol {
                    return Err(Error::config(format!(
                        "face {fi} vertex loop is not convex/counter-clockwise"
                    )));
                }
            }

            faces.push(Face {
                verts: loop_verts,
                normal,
                offset,
                absorbing: spec.absorbing,
                label: spec.label.unwrap_or_else(|| format!("face{fi}")),
                frame_origin,
                e1,
                e2,
                poly2,
            });
        }

        // Global convexity: every vertex on or behind every face plane.
        for (fi, f) in faces.iter().enumerate() {
            for (vi, v) in vertices.iter().enumerate() {
                if f.normal.dot(*v) - f.offset > tol {
                    return Err(Error::config(format!(
                        "mesh is not convex: vertex {vi} lies {:.3e} outside face {fi}",
                        f.normal.dot(*v) - f.offset
                    )));
                }
            }
        }

        let (bounding_sphere_center, bounding_sphere_radius) = enclosing_sphere(&vertices);
        let plane_nx = faces.iter().map(|f| f.normal.x).collect();
        let plane_ny = faces.iter().map(|f| f.normal.y).collect();
        let plane_nz = faces.iter().map(|f| f.normal.z).collect();
        let plane_off = faces.iter().map(|f| f.offset).collect();
        Ok(ConvexMesh {
            vertices,
            faces,
            bounding_sphere_center,
            bounding_sphere_radius,
            reinsertion_ratio,
            plane_nx,
            plane_ny,
            plane_nz,
            plane_off,
        })
    }

    /// Radius of the reinsertion ball: ratio x bounding sphere radius.
    pub fn decision_radius(&self) -> f64 {
        self.reinsertion_ratio * self.bounding_sphere_radius
    }

    /// Signed distance from `p` to face `fi`'s plane (positive outside).
    #[inline]
    pub fn signed_distance(&self, p: Vec3, fi: usize) -> f64 {
        self.plane_nx[fi] * p.x + self.plane_ny[fi] * p.y + self.plane_nz[fi] * p.z
            - self.plane_off[fi]
    }

    /// True if `p` is strictly outside the polyhedron.
    pub fn is_outside(&self, p: Vec3) -> bool {
        (0..self.faces.len()).any(|i| self.signed_distance(p, i) > 0.0)
    }

    /// Total surface area and the area carried by absorbing faces.
    pub fn absorbing_area_fraction(&self) -> f64 {
        let mut total = 0.0;
        let mut absorbing = 0.0;
        for f in &self.faces {
            let a = f.area(&self.vertices);
            total += a;
            if f.absorbing {
                absorbing += a;
            }
        }
        absorbing / total
    }
}

/// Bounding sphere of a point set: better of centroid-centered (exact on the
/// symmetric generated meshes) and Ritter growth.
fn enclosing_sphere(points: &[Vec3]) -> (Vec3, f64) {
    let centroid = points.iter().fold(Vec3::ZERO, |a, &p| a + p) / points.len() as f64;
    let r_centroid = points
        .iter()
        .map(|p| (*p - centroid).norm())
        .fold(0.0_f64, f64::max);

    let mut c = points[0];
    let mut r = 0.0_f64;
    for _ in 0..2 {
        for p in points {
            let d = (*p - c).norm();
            if d > r {
                let grow = 0.5 * (d - r);
                r += grow;
                c += (*p - c) * (grow / d);
            }
        }
    }
    if r_centroid < r {
        (centroid, r_centroid * (1.0 + 1e-12))
    } else {
        (c, r * (1.0 + 1e-12))
    }
}

/// Face whose plane has the largest positive signed distance to `point`;
/// ties broken by lowest index. Errors when no plane separates the point
/// from the mesh (point inside -- an invariant violation).
///
/// Linear scan over all face planes, split into a branch-free max reduction
/// (which vectorizes) followed by an index recovery pass.
pub fn select_target_face(point: Vec3, mesh: &ConvexMesh) -> Result<usize> {
    let n = mesh.faces.len();
    let (nx, ny, nz, off) = (
        &mesh.plane_nx,
        &mesh.plane_ny,
        &mesh.plane_nz,
        &mesh.plane_off,
    );
    // Eight independent (value, index) lanes; strict > keeps the first
    // occurrence within each lane, and exact ties across lanes resolve to
    // the lowest index, preserving the tie-break contract.
    let mut vals = [f64::NEG_INFINITY; 8];
    let mut idxs = [0u64; 8];
    let mut base = 0u64;
    let mut it = nx
        .chunks_exact(8)
        .zip(ny.chunks_exact(8))
        .zip(nz.chunks_exact(8))
        .zip(off.chunks_exact(8));
    for (((ax, ay), az), ao) in &mut it {
        for l in 0..8 {
            let s = ax[l] * point.x + ay[l] * point.y + az[l] * point.z - ao[l];
            if s > vals[l] {
                vals[l] = s;
                idxs[l] = base + l as u64;
            }
        }
        base += 8;
    }
    let mut best = f64::NEG_INFINITY;
    let mut best_idx = u64::MAX;
    for l in 0..8 {
        if vals[l] > best || (vals[l] == best && idxs[l] < best_idx) {
            best = vals[l];
            best_idx = idxs[l];
        }
    }
    for i in (n - n % 8)..n {
        let s = nx[i] * point.x + ny[i] * point.y + nz[i] * point.z - off[i];
        if s > best {
            best = s;
            best_idx = i as u64;
        }
    }
    if !(best > 0.0) {
        return Err(Error::numerical(format!(
            "select_target_face: no face plane separates point ({}, {}, {}) from the mesh",
            point.x, point.y, point.z
        )));
    }
    Ok(best_idx as usize)
}

/// Face of the mesh surface carrying `point`, for points lying on the hull
/// boundary to within rounding (where no face plane has a reliably positive
/// signed distance). Among faces whose plane passes through the point
/// within `tol`, picks the one with the largest containment margin (the
/// minimum edge cross product in face-local coordinates); a slightly
/// negative margin is accepted since cross products of an on-edge point
/// round unpredictably in the two adjacent faces' frames.
pub fn resolve_surface_face(point: Vec3, mesh: &ConvexMesh, tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, f) in mesh.faces.iter().enumerate() {
        if mesh.signed_distance(point, i).abs() > tol {
            continue;
        }
        let q = f.to_local(point);
        let m = f.poly2.len();
        let mut margin = f64::INFINITY;
        for e in 0..m {
            let a = f.poly2[e];
            let b = f.poly2[(e + 1) % m];
            let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            if len == 0.0 {
                continue;
            }
            let cross =
                ((b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0])) / len;
            margin = margin.min(cross);
        }
        if best.map_or(true, |(_, bm)| margin > bm) {
            best = Some((i, margin));
        }
    }
    match best {
        Some((i, margin)) if margin >= -tol => Some(i),
        _ => None,
    }
}

/// 2D convex-polygon containment in face-local coordinates; the boundary
/// counts as inside (edge cross products >= 0 for the CCW loop).
///
/// The test is exact rather than tolerance-banded: an inclusive band wider
/// than the 10 eps hemisphere floor would trap particles in a fixed-step
/// walk along face edges.
pub fn point_in_face(point: Vec3, face: &Face) -> bool {
    let q = face.to_local(point);
    let m = face.poly2.len();
    for i in 0..m {
        let a = face.poly2[i];
        let b = face.poly2[(i + 1) % m];
        let cross = (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0]);
        if cross < 0.0 {
            return false;
        }
    }
    true
}

/// Radius of the largest hemisphere centered at `point` whose base circle
/// stays within the face: the minimum in-plane distance to the boundary
/// edge lines, floored at 10 x machine epsilon.
pub fn inscribed_hemisphere_radius(point: Vec3, face: &Face) -> f64 {
    let q = face.to_local(point);
    let m = face.poly2.len();
    let mut best = f64::INFINITY;
    for i in 0..m {
        let a = face.poly2[i];
        let b = face.poly2[(i + 1) % m];
        let ex = b[0] - a[0];
        let ey = b[1] - a[1];
        let len = (ex * ex + ey * ey).sqrt();
        if len == 0.0 {
            continue;
        }
        // Perpendicular distance to the edge line; positive on the interior
        // side for a CCW loop.
        let d = (ex * (q[1] - a[1]) - ey * (q[0] - a[0])) / len;
        if d < best {
            best = d;
        }
    }
    best.max(DISTANCE_FLOOR)
}

// ---------------------------------------------------------------------------
// JSON schema (External Interface)
// ---------------------------------------------------------------------------

/// On-disk geometry description:
/// `{"type":"planar","pores":[{"center":[x,y],"radius":a}]}` or
/// `{"type":"mesh","vertices":[[x,y,z],...],"faces":[{"verts":[...],"absorbing":true,"label":"top"}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum GeometryJson {
    Planar {
        pores: Vec<PoreJson>,
        #[serde(default = "default_ratio", skip_serializing_if = "is_default_ratio")]
        reinsertion_ratio: f64,
    },
    Mesh {
        vertices: Vec<[f64; 3]>,
        faces: Vec<FaceSpec>,
        #[serde(default = "default_ratio", skip_serializing_if = "is_default_ratio")]
        reinsertion_ratio: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoreJson {
    pub center: [f64; 2],
    pub radius: f64,
    #[serde(default)]
    pub label: Option<String>,
}

fn default_ratio() -> f64 {
    3.0
}
fn is_default_ratio(r: &f64) -> bool {
    *r == 3.0
}

/// A validated geometry, either planar or polyhedral.
#[derive(Debug, Clone)]
pub enum Geometry {
    Planar(PlanarScene),
    Mesh(ConvexMesh),
}

impl GeometryJson {
    pub fn build(self) -> Result<Geometry> {
        match self {
            GeometryJson::Planar {
                pores,
                reinsertion_ratio,
            } => {
                let pores = pores
                    .into_iter()
                    .enumerate()
                    .map(|(i, p)| PlanarPore {
                        center: p.center,
                        radius: p.radius,
                        label: p.label.unwrap_or_else(|| format!("pore{i}")),
                    })
                    .collect();
                Ok(Geometry::Planar(PlanarScene::new(pores, reinsertion_ratio)?))
            }
            GeometryJson::Mesh {
                vertices,
                faces,
                reinsertion_ratio,
            } => {
                let vertices = vertices.into_iter().map(Vec3::from).collect();
                Ok(Geometry::Mesh(ConvexMesh::new(
                    vertices,
                    faces,
                    reinsertion_ratio,
                )?))
            }
        }
    }

    pub fn from_mesh(mesh: &ConvexMesh) -> GeometryJson {
        GeometryJson::Mesh {
            vertices: mesh.vertices.iter().map(|v| [v.x, v.y, v.z]).collect(),
            faces: mesh
                .faces
                .iter()
                .map(|f| FaceSpec {
                    verts: f.verts.clone(),
                    absorbing: f.absorbing,
                    label: Some(f.label.clone()),
                })
                .collect(),
            reinsertion_ratio: mesh.reinsertion_ratio,
        }
    }

    pub fn from_scene(scene: &PlanarScene) -> GeometryJson {
        GeometryJson::Planar {
            pores: scene
                .pores()
                .iter()
                .map(|p| PoreJson {
                    center: p.center,
                    radius: p.radius,
                    label: Some(p.label.clone()),
                })
                .collect(),
            reinsertion_ratio: scene.reinsertion_ratio,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_pore_scene() -> PlanarScene {
        PlanarScene::new(
            vec![PlanarPore {
                center: [0.0, 0.0],
                radius: 1.0,
                label: "pore0".to_string(),
            }],
            3.0,
        )
        .unwrap()
    }

    #[test]
    fn nearest_pore_containment_and_offsets() {
        let scene = unit_pore_scene();
        let (d, hit) = nearest_pore_distance([0.0, 0.0], &scene);
        assert_eq!(d, 0.0);
        assert_eq!(hit, Some(0));
        let (d, hit) = nearest_pore_distance([3.0, 0.0], &scene);
        assert_relative_eq!(d, 2.0, epsilon = 1e-14);
        assert_eq!(hit, None);
    }

    #[test]
    fn nearest_pore_equidistant_returns_none() {
        let scene = PlanarScene::new(
            vec![
                PlanarPore {
                    center: [-2.0, 0.0],
                    radius: 0.5,
                    label: "a".into(),
                },
                PlanarPore {
                    center: [2.0, 0.0],
                    radius: 0.5,
                    label: "b".into(),
                },
            ],
            3.0,
        )
        .unwrap();
        let (d, hit) = nearest_pore_distance([0.0, 0.0], &scene);
        assert_relative_eq!(d, 1.5, epsilon = 1e-14);
        assert_eq!(hit, None);
    }

    #[test]
    fn overlapping_pores_rejected() {
        let r = PlanarScene::new(
            vec![
                PlanarPore {
                    center: [0.0, 0.0],
                    radius: 1.0,
                    label: "a".into(),
                },
                PlanarPore {
                    center: [1.5, 0.0],
                    radius: 1.0,
                    label: "b".into(),
                },
            ],
            3.0,
        );
        assert!(r.is_err());
    }

    #[test]
    fn cube_target_face_selection() {
        let cube = make_cube(1.0).unwrap();
        // Directly above: +z face.
        let fi = select_target_face(Vec3::new(0.0, 0.0, 5.0), &cube).unwrap();
        assert_eq!(cube.faces[fi].label, "z+");
        assert_relative_eq!(
            cube.signed_distance(Vec3::new(0.0, 0.0, 1.01), fi),
            0.51,
            epsilon = 1e-12
        );
        // Symmetric corner point: deterministic lowest-index tie-break.
        let fi_corner = select_target_face(Vec3::new(5.0, 5.0, 5.0), &cube).unwrap();
        let s_corner = cube.signed_distance(Vec3::new(5.0, 5.0, 5.0), fi_corner);
        let min_idx = (0..6)
            .filter(|&i| {
                (cube.signed_distance(Vec3::new(5.0, 5.0, 5.0), i) - s_corner).abs() < 1e-12
            })
            .min()
            .unwrap();
        assert_eq!(fi_corner, min_idx);
        // Interior point is an invariant violation.
        assert!(select_target_face(Vec3::new(0.0, 0.0, 0.0), &cube).is_err());
    }

    #[test]
    fn point_in_face_boundary_conventions() {
        let cube = make_cube(1.0).unwrap();
        let top = cube
            .faces
            .iter()
            .position(|f| f.label == "z+")
            .unwrap();
        let face = &cube.faces[top];
        assert!(point_in_face(Vec3::new(0.0, 0.0, 0.5), face));
        // Edge midpoint counts as inside.
        assert!(point_in_face(Vec3::new(0.5, 0.0, 0.5), face));
        // Outside the circumscribed circle.
        assert!(!point_in_face(Vec3::new(1.2, 0.0, 0.5), face));
    }

    #[test]
    fn inscribed_radius_square_and_edge() {
        let cube = make_cube(1.0).unwrap();
        let top = cube.faces.iter().position(|f| f.label == "z+").unwrap();
        let face = &cube.faces[top];
        assert_relative_eq!(
            inscribed_hemisphere_radius(Vec3::new(0.0, 0.0, 0.5), face),
            0.5,
            epsilon = 1e-12
        );
        let on_edge = inscribed_hemisphere_radius(Vec3::new(0.5, 0.0, 0.5), face);
        assert_eq!(on_edge, DISTANCE_FLOOR);
    }

    #[test]
    fn inscribed_radius_equilateral_triangle_incenter() {
        let s = 2.0_f64;
        let h = s * 3.0_f64.sqrt() / 2.0;
        let verts = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(s, 0.0, 0.0),
            Vec3::new(s / 2.0, h, 0.0),
            Vec3::new(s / 2.0, h / 3.0, -1.0),
        ];
        let faces = vec![
            FaceSpec {
                verts: vec![0, 1, 2],
                absorbing: true,
                label: Some("top".into()),
            },
            FaceSpec {
                verts: vec![0, 3, 1],
                absorbing: false,
                label: None,
            },
            FaceSpec {
                verts: vec![1, 3, 2],
                absorbing: false,
                label: None,
            },
            FaceSpec {
                verts: vec![2, 3, 0],
                absorbing: false,
                label: None,
            },
        ];
        let mesh = ConvexMesh::new(verts, faces, 3.0).unwrap();
        let top = mesh.faces.iter().position(|f| f.label == "top").unwrap();
        let incenter = Vec3::new(s / 2.0, h / 3.0, 0.0);
        assert_relative_eq!(
            inscribed_hemisphere_radius(incenter, &mesh.faces[top]),
            s / (2.0 * 3.0_f64.sqrt()),
            max_relative = 1e-12
        );
    }

    #[test]
    fn inscribed_radius_bounded_by_segment_distances() {
        use rand::{Rng, SeedableRng};
        let mesh = make_fibonacci_sphere(5, 0.02, 0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for face in mesh.faces.iter().step_by(7) {
            let m = face.poly2.len();
            for _ in 0..40 {
                // Random convex combination of the polygon's vertices.
                let mut w: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
                let s: f64 = w.iter().sum();
                w.iter_mut().for_each(|x| *x /= s);
                let (mut u, mut v) = (0.0, 0.0);
                for (wi, p) in w.iter().zip(&face.poly2) {
                    u += wi * p[0];
                    v += wi * p[1];
                }
                let point = face.from_local(u, v, 0.0);
                if !point_in_face(point, face) {
                    continue; // rounding put it on the wrong side of an edge
                }
                let r = inscribed_hemisphere_radius(point, face);
                for i in 0..m {
                    let a = face.poly2[i];
                    let b = face.poly2[(i + 1) % m];
                    // Distance to the closed segment.
                    let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
                    let len2 = ex * ex + ey * ey;
                    let t = (((u - a[0]) * ex + (v - a[1]) * ey) / len2).clamp(0.0, 1.0);
                    let (cx, cy) = (a[0] + t * ex - u, a[1] + t * ey - v);
                    let seg_dist = (cx * cx + cy * cy).sqrt();
                    assert!(
                        r <= seg_dist + 1e-12,
                        "inscribed {r} exceeds segment distance {seg_dist}"
                    );
                }
            }
        }
    }

    #[test]
    fn convexity_validator_rejects_dented_mesh() {
        // A tetrahedron with one vertex pushed through the opposite face.
        let verts = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.2, 0.2, 1.0),
            Vec3::new(0.2, 0.2, -2.0),
        ];
        let faces = vec![
            FaceSpec { verts: vec![0, 1, 3], absorbing: true, label: None },
            FaceSpec { verts: vec![1, 2, 3], absorbing: true, label: None },
            FaceSpec { verts: vec![2, 0, 3], absorbing: true, label: None },
            FaceSpec { verts: vec![0, 1, 4], absorbing: true, label: None },
            FaceSpec { verts: vec![1, 2, 4], absorbing: true, label: None },
            FaceSpec { verts: vec![2, 0, 4], absorbing: true, label: None },
            FaceSpec { verts: vec![0, 1, 2], absorbing: true, label: None },
        ];
        assert!(ConvexMesh::new(verts, faces, 3.0).is_err());
    }

    #[test]
    fn select_target_face_rotation_invariance() {
        let mesh = make_cube(1.0).unwrap();
        // Rotate mesh and point jointly by a fixed rotation about (1,1,1).
        let axis = Vec3::new(1.0, 1.0, 1.0).normalized();
        let angle = 0.7_f64;
        let rot = |v: Vec3| -> Vec3 {
            // Rodrigues' formula.
            let (s, c) = angle.sin_cos();
            v * c + axis.cross(v) * s + axis * (axis.dot(v) * (1.0 - c))
        };
        let pts = [
            Vec3::new(0.3, -2.0, 1.4),
            Vec3::new(5.0, 0.1, 0.2),
            Vec3::new(-1.0, -1.0, 3.0),
        ];
        let rotated_vertices: Vec<Vec3> = mesh.vertices.iter().map(|&v| rot(v)).collect();
        let rotated = ConvexMesh::new(
            rotated_vertices,
            mesh.faces
                .iter()
                .map(|f| FaceSpec {
                    verts: f.verts.clone(),
                    absorbing: f.absorbing,
                    label: Some(f.label.clone()),
                })
                .collect(),
            3.0,
        )
        .unwrap();
        for &p in &pts {
            let a = select_target_face(p, &mesh).unwrap();
            let b = select_target_face(rot(p), &rotated).unwrap();
            assert_eq!(mesh.faces[a].label, rotated.faces[b].label);
        }
    }

    #[test]
    fn geometry_json_round_trip() {
        let mesh = make_cube(2.0).unwrap();
        let js = GeometryJson::from_mesh(&mesh);
        let text = serde_json::to_string(&js).unwrap();
        let back: GeometryJson = serde_json::from_str(&text).unwrap();
        match back.build().unwrap() {
            Geometry::Mesh(m) => {
                assert_eq!(m.faces.len(), 6);
                assert_relative_eq!(
                    m.bounding_sphere_radius,
                    3.0_f64.sqrt(),
                    max_relative = 1e-9
                );
            }
            _ => panic!("expected mesh"),
        }
    }
}

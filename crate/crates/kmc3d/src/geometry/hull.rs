//! Incremental convex hull of a 3D point set.
//!
//! Used by the sphere mesh generator, where the input points lie on the unit
//! sphere in general position (so the hull is exactly the spherical Delaunay
//! triangulation). Faces come out with outward orientation.

use super::vec3::Vec3;
use crate::error::{Error, Result};
use std::collections::HashMap;

const VISIBLE_EPS: f64 = 1e-12;

struct Tri {
    v: [u32; 3],
    normal: Vec3,
    offset: f64,
    alive: bool,
}

fn make_tri(points: &[Vec3], a: u32, b: u32, c: u32) -> Tri {
    let n = (points[b as usize] - points[a as usize])
        .cross(points[c as usize] - points[a as usize])
        .normalized();
    Tri {
        v: [a, b, c],
        normal: n,
        offset: n.dot(points[a as usize]),
        alive: true,
    }
}

/// Triangulate the convex hull of `points`; returns outward-oriented index
/// triples. Points must not be all coplanar.
pub fn convex_hull(points: &[Vec3]) -> Result<Vec<[u32; 3]>> {
    if points.len() < 4 {
        return Err(Error::config("convex hull needs at least 4 points".to_string()));
    }
    // Seed tetrahedron: spread-out quadruple.
    let i0 = 0u32;
    let i1 = (0..points.len())
        .max_by(|&a, &b| {
            let da = (points[a] - points[i0 as usize]).norm_sq();
            let db = (points[b] - points[i0 as usize]).norm_sq();
            da.partial_cmp(&db).unwrap()
        })
        .unwrap() as u32;
    let line = (points[i1 as usize] - points[i0 as usize]).normalized();
    let i2 = (0..points.len())
        .max_by(|&a, &b| {
            let da = (points[a] - points[i0 as usize]).cross(line).norm_sq();
            let db = (points[b] - points[i0 as usize]).cross(line).norm_sq();
            da.partial_cmp(&db).unwrap()
        })
        .unwrap() as u32;
    let plane_n = (points[i1 as usize] - points[i0 as usize])
        .cross(points[i2 as usize] - points[i0 as usize])
        .normalized();
    let plane_d = plane_n.dot(points[i0 as usize]);
    let i3 = (0..points.len())
        .max_by(|&a, &b| {
            let da = (plane_n.dot(points[a]) - plane_d).abs();
            let db = (plane_n.dot(points[b]) - plane_d).abs();
            da.partial_cmp(&db).unwrap()
        })
        .unwrap() as u32;
    if (plane_n.dot(points[i3 as usize]) - plane_d).abs() < 1e-9 {
        return Err(Error::config("convex hull input is degenerate (coplanar)".to_string()));
    }

    let mut tris: Vec<Tri> = Vec::with_capacity(points.len() * 2 + 8);
    // Orient the seed tetrahedron so all faces point away from its centroid.
    let seed = [i0, i1, i2, i3];
    let centroid = seed
        .iter()
        .fold(Vec3::ZERO, |acc, &i| acc + points[i as usize])
        / 4.0;
    for &(a, b, c) in &[
        (i0, i1, i2),
        (i0, i1, i3),
        (i0, i2, i3),
        (i1, i2, i3),
    ] {
        let mut t = make_tri(points, a, b, c);
        if t.normal.dot(centroid) > t.offset {
            t = make_tri(points, a, c, b);
        }
        tris.push(t);
    }

    for p in 0..points.len() as u32 {
        if seed.contains(&p) {
            continue;
        }
        let pt = points[p as usize];
        // Visible faces and their boundary (horizon) edges.
        let mut edge_count: HashMap<(u32, u32), (u32, u32)> = HashMap::new();
        let mut any_visible = false;
        for t in tris.iter_mut() {
            if !t.alive {
                continue;
            }
            if t.normal.dot(pt) - t.offset > VISIBLE_EPS {
                any_visible = true;
                t.alive = false;
                for e in 0..3 {
                    let a = t.v[e];
                    let b = t.v[(e + 1) % 3];
                    let key = (a.min(b), a.max(b));
                    let entry = edge_count.entry(key).or_insert((0, 0));
                    entry.0 += 1;
                    // Remember directed orientation as seen from the visible side.
                    entry.1 = if a < b { 0 } else { 1 };
                    if entry.0 == 2 {
                        edge_count.remove(&key);
                    }
                }
            }
        }
        if !any_visible {
            continue; // interior point (duplicates, slight inward jitter)
        }
        // Horizon edges seen exactly once; rebuild fan with original direction
        // so the new faces keep outward orientation.
        let mut horizon: Vec<(u32, u32)> = edge_count
            .into_iter()
            .map(|((a, b), (_, dir))| if dir == 0 { (a, b) } else { (b, a) })
            .collect();
        horizon.sort_unstable();
        for (a, b) in horizon {
            tris.push(make_tri(points, a, b, p));
        }
        if tris.len() > points.len() * 8 + 64 {
            tris.retain(|t| t.alive);
        }
    }

    Ok(tris
        .into_iter()
        .filter(|t| t.alive)
        .map(|t| t.v)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_of_octahedron_has_eight_faces() {
        let pts = vec![
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(0.0, 0.0, -1.0),
        ];
        let tris = convex_hull(&pts).unwrap();
        assert_eq!(tris.len(), 8);
        // Outward orientation: every face normal points away from the origin.
        for t in &tris {
            let n = (pts[t[1] as usize] - pts[t[0] as usize])
                .cross(pts[t[2] as usize] - pts[t[0] as usize]);
            assert!(n.dot(pts[t[0] as usize]) > 0.0);
        }
    }

    #[test]
    fn hull_of_sphere_points_satisfies_euler_formula() {
        // Deterministic quasi-uniform points (Fibonacci spiral).
        let n = 400usize;
        let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
        let pts: Vec<Vec3> = (0..n)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let r = (1.0 - z * z).sqrt();
                let phi = golden * i as f64;
                Vec3::new(r * phi.cos(), r * phi.sin(), z)
            })
            .collect();
        let tris = convex_hull(&pts).unwrap();
        // Triangulated sphere: F = 2V - 4.
        assert_eq!(tris.len(), 2 * n - 4);
        // Interior point test: all vertices behind every face plane.
        for t in &tris {
            let a = pts[t[0] as usize];
            let nrm = (pts[t[1] as usize] - a).cross(pts[t[2] as usize] - a).normalized();
            let d = nrm.dot(a);
            for p in &pts {
                assert!(nrm.dot(*p) - d < 1e-9);
            }
        }
    }
}

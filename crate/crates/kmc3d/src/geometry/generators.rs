//! Built-in mesh generators: the cube, the unit sphere with circular pores
//! at Fibonacci spiral points, and the oblate "skirt" family with two polar
//! pores.

use super::hull::convex_hull;
use super::vec3::Vec3;
use super::{ConvexMesh, FaceSpec};
use crate::error::{Error, Result};

/// Axis-aligned cube of the given side, centered at the origin, all six
/// faces absorbing. Face labels: x+, x-, y+, y-, z+, z-.
pub fn make_cube(side: f64) -> Result<ConvexMesh> {
    if !(side > 0.0) {
        return Err(Error::config(format!("cube side {side} must be > 0")));
    }
    let h = 0.5 * side;
    let vertices = vec![
        Vec3::new(-h, -h, -h), // 0
        Vec3::new(h, -h, -h),  // 1
        Vec3::new(h, h, -h),   // 2
        Vec3::new(-h, h, -h),  // 3
        Vec3::new(-h, -h, h),  // 4
        Vec3::new(h, -h, h),   // 5
        Vec3::new(h, h, h),    // 6
        Vec3::new(-h, h, h),   // 7
    ];
    let face = |verts: Vec<u32>, label: &str| FaceSpec {
        verts,
        absorbing: true,
        label: Some(label.to_string()),
    };
    let faces = vec![
        face(vec![1, 2, 6, 5], "x+"),
        face(vec![0, 4, 7, 3], "x-"),
        face(vec![2, 3, 7, 6], "y+"),
        face(vec![0, 1, 5, 4], "y-"),
        face(vec![4, 5, 6, 7], "z+"),
        face(vec![0, 3, 2, 1], "z-"),
    ];
    ConvexMesh::new(vertices, faces, 3.0)
}

/// Quasi-uniform direction from the Fibonacci spiral.
fn fibonacci_point(i: usize, n: usize) -> Vec3 {
    let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
    let r = (1.0 - z * z).sqrt();
    let phi = golden * i as f64;
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

/// Spherical coordinates (theta = polar angle, psi = azimuth) of a unit vector.
fn to_spherical(v: Vec3) -> (f64, f64) {
    (v.z.clamp(-1.0, 1.0).acos(), v.y.atan2(v.x))
}

fn wrap_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * std::f64::consts::PI);
    if a > std::f64::consts::PI {
        a -= 2.0 * std::f64::consts::PI;
    } else if a < -std::f64::consts::PI {
        a += 2.0 * std::f64::consts::PI;
    }
    a
}

/// Cap membership test in the (theta, psi) metric:
/// (theta - theta_k)^2 + sin^2(theta_k) (psi - psi_k)^2 <= a^2.
fn in_cap(theta: f64, psi: f64, cap: &(f64, f64), a: f64) -> bool {
    let dt = theta - cap.0;
    let dp = wrap_angle(psi - cap.1);
    dt * dt + cap.0.sin().powi(2) * dp * dp <= a * a
}

/// Triangulated unit sphere with `n_pores` circular absorbing caps of common
/// radius a = 2 sqrt(sigma/N) centered at Fibonacci spiral points, so the
/// requested absorbing area fraction is sigma = N a^2 / 4.
///
/// Each cap is a ring of `CAP_RING` fixed boundary points plus its center;
/// filler points for the reflecting complement start on a rotated Fibonacci
/// spiral and are relaxed by gradient descent on the sum of inverse pairwise
/// distances (cap points held fixed) until the relative energy change drops
/// below 1e-6. `refinement` doubles the filler count per level.
///
/// Absorbing facets are flagged by their centroid via the cap metric above;
/// facet labels are `pore0..poreN-1` and `shell` for the reflecting rest.
pub fn make_fibonacci_sphere(n_pores: usize, sigma: f64, refinement: u32) -> Result<ConvexMesh> {
    const CAP_RING: usize = 16;
    if n_pores == 0 {
        return Err(Error::config("need at least one pore".to_string()));
    }
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::config(format!("sigma {sigma} must lie in (0,1)")));
    }
    let a = 2.0 * (sigma / n_pores as f64).sqrt();
    let centers: Vec<Vec3> = (0..n_pores).map(|i| fibonacci_point(i, n_pores)).collect();
    let caps: Vec<(f64, f64)> = centers.iter().map(|&c| to_spherical(c)).collect();

    // Pairwise separation: caps must not overlap (geodesic distance > 2a).
    for i in 0..n_pores {
        for j in (i + 1)..n_pores {
            let gap = centers[i].dot(centers[j]).clamp(-1.0, 1.0).acos();
            if gap <= 2.0 * a {
                return Err(Error::config(format!(
                    "caps {i} and {j} overlap: separation {gap:.4} <= 2a = {:.4}",
                    2.0 * a
                )));
            }
        }
        if caps[i].0 < 1.5 * a || caps[i].0 > std::f64::consts::PI - 1.5 * a {
            return Err(Error::config(format!(
                "cap {i} too close to the coordinate pole for the (theta,psi) cap metric"
            )));
        }
    }

    // Fixed points: cap centers then rims, in pore order.
    let mut points: Vec<Vec3> = Vec::new();
    for (k, &(theta_k, psi_k)) in caps.iter().enumerate() {
        points.push(centers[k]);
        for t in 0..CAP_RING {
            let ang = 2.0 * std::f64::consts::PI * t as f64 / CAP_RING as f64;
            let theta = theta_k + a * ang.cos();
            let psi = psi_k + a * ang.sin() / theta_k.sin();
            points.push(Vec3::new(
                theta.sin() * psi.cos(),
                theta.sin() * psi.sin(),
                theta.cos(),
            ));
        }
    }
    let n_fixed = points.len();

    // Filler points: rotated Fibonacci spiral, dropping points inside or
    // hugging a cap.
    let n_fill_target = 128 * (1usize << refinement);
    let tilt = 1.0_f64; // fixed rotation about x to decorrelate from the cap spiral
    let (st, ct) = tilt.sin_cos();
    let spacing = (4.0 * std::f64::consts::PI / n_fill_target as f64).sqrt();
    for i in 0..n_fill_target {
        let p0 = fibonacci_point(i, n_fill_target);
        let p = Vec3::new(p0.x, ct * p0.y - st * p0.z, st * p0.y + ct * p0.z);
        let clear = centers
            .iter()
            .all(|&c| c.dot(p).clamp(-1.0, 1.0).acos() > a + 0.5 * spacing);
        if clear {
            points.push(p);
        }
    }

    relax_on_sphere(&mut points, n_fixed);

    let tris = convex_hull(&points)?;
    let mut faces = Vec::with_capacity(tris.len());
    for t in &tris {
        let c = (points[t[0] as usize] + points[t[1] as usize] + points[t[2] as usize])
            .normalized();
        let (theta, psi) = to_spherical(c);
        let pore = caps.iter().position(|cap| in_cap(theta, psi, cap, a));
        faces.push(FaceSpec {
            verts: t.to_vec(),
            absorbing: pore.is_some(),
            label: Some(match pore {
                Some(k) => format!("pore{k}"),
                None => "shell".to_string(),
            }),
        });
    }
    ConvexMesh::new(points, faces, 3.0)
}

/// Gradient descent on E = sum_{i<j} 1/|x_i - x_j| with the first `n_fixed`
/// points pinned and all points projected back to the unit sphere each step.
fn relax_on_sphere(points: &mut [Vec3], n_fixed: usize) {
    let n = points.len();
    if n_fixed >= n {
        return;
    }
    let energy = |pts: &[Vec3]| -> f64 {
        let mut e = 0.0;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                e += 1.0 / (pts[i] - pts[j]).norm();
            }
        }
        e
    };
    // Step length on the scale of the mesh spacing squared.
    let mut step = 4.0 * std::f64::consts::PI / n as f64;
    let mut e_prev = energy(points);
    let mut grad = vec![Vec3::ZERO; n];
    for _ in 0..400 {
        for g in grad.iter_mut() {
            *g = Vec3::ZERO;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let d = points[i] - points[j];
                let r2 = d.norm_sq();
                let f = d * (1.0 / (r2 * r2.sqrt())); // -grad of 1/r, repulsive
                grad[i] += f;
                grad[j] -= f;
            }
        }
        // Normalize step by the largest tangential gradient.
        let gmax = grad[n_fixed..]
            .iter()
            .map(|g| g.norm())
            .fold(0.0_f64, f64::max)
            .max(1e-300);
        let trial: Vec<Vec3> = points
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                if i < n_fixed {
                    p
                } else {
                    (p + grad[i] * (step / gmax)).normalized()
                }
            })
            .collect();
        let e_new = energy(&trial);
        if e_new < e_prev {
            let rel = (e_prev - e_new) / e_prev;
            points[n_fixed..].copy_from_slice(&trial[n_fixed..]);
            e_prev = e_new;
            step *= 1.1;
            if rel < 1e-6 {
                break;
            }
        } else {
            step *= 0.5;
            if step < 1e-12 {
                break;
            }
        }
    }
}

/// Convex surface of revolution interpolating two unit-radius pore rims at
/// z = +/-1 with equatorial radius `r_eq >= 1`; the profile is the oblate
/// ellipse rho(z) = sqrt(r_eq^2 (1 - z^2) + z^2), which degenerates to a
/// circular cylinder at r_eq = 1. The flat polar discs are the absorbing
/// pores ("top", "bottom"); the lateral skirt is reflecting ("skirt").
///
/// `refinement` doubles both the azimuthal count and the number of z-bands
/// per level. Side faces are planar isosceles trapezoids (aligned rings);
/// at r_eq = 1 the side collapses to one rectangle per azimuthal sector so
/// that no two distinct faces are coplanar.
pub fn make_ellipsoid_skirt(r_eq: f64, refinement: u32) -> Result<ConvexMesh> {
    if !(r_eq >= 1.0) {
        return Err(Error::config(format!("equatorial radius {r_eq} must be >= 1")));
    }
    let n_az = 32 * (1usize << refinement);
    let n_bands = if r_eq == 1.0 {
        1
    } else {
        8 * (1usize << refinement)
    };
    let profile = |z: f64| -> f64 { (r_eq * r_eq * (1.0 - z * z) + z * z).sqrt() };

    // Rings bottom to top; n_bands even keeps a ring exactly at z = 0.
    let mut vertices = Vec::with_capacity((n_bands + 1) * n_az);
    for band in 0..=n_bands {
        let z = -1.0 + 2.0 * band as f64 / n_bands as f64;
        let rho = profile(z);
        for k in 0..n_az {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / n_az as f64;
            vertices.push(Vec3::new(rho * phi.cos(), rho * phi.sin(), z));
        }
    }

    let ring = |band: usize, k: usize| (band * n_az + (k % n_az)) as u32;
    let mut faces = Vec::new();
    // Bottom pore: z = -1 disc, wound clockwise seen from above = CCW from
    // below (outward normal -z).
    faces.push(FaceSpec {
        verts: (0..n_az).map(|k| ring(0, k)).collect(),
        absorbing: true,
        label: Some("bottom".to_string()),
    });
    faces.push(FaceSpec {
        verts: (0..n_az).rev().map(|k| ring(n_bands, k)).collect(),
        absorbing: true,
        label: Some("top".to_string()),
    });
    for band in 0..n_bands {
        for k in 0..n_az {
            faces.push(FaceSpec {
                verts: vec![
                    ring(band, k),
                    ring(band, k + 1),
                    ring(band + 1, k + 1),
                    ring(band + 1, k),
                ],
                absorbing: false,
                label: Some("skirt".to_string()),
            });
        }
    }
    ConvexMesh::new(vertices, faces, 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::select_target_face;
    use approx::assert_relative_eq;

    #[test]
    fn cube_geometry_pins() {
        let cube = make_cube(1.0).unwrap();
        assert_eq!(cube.vertices.len(), 8);
        assert_eq!(cube.faces.len(), 6);
        assert_relative_eq!(
            cube.bounding_sphere_radius,
            3.0_f64.sqrt() / 2.0,
            max_relative = 1e-9
        );
        // Outward normals look away from the center.
        for f in &cube.faces {
            assert!(f.normal.dot(f.centroid(&cube.vertices)) > 0.0);
        }
        assert!(make_cube(0.0).is_err());
    }

    #[test]
    fn fibonacci_sphere_pore_radius_and_fraction() {
        let mesh = make_fibonacci_sphere(51, 0.1, 1).unwrap();
        let a = 2.0 * (0.1_f64 / 51.0).sqrt();
        assert_relative_eq!(a, 0.0885, max_relative = 2e-3);
        let achieved = mesh.absorbing_area_fraction();
        assert!(
            (achieved - 0.1).abs() < 0.1 * 0.1,
            "achieved fraction {achieved} not within 10% of 0.1"
        );
        // 51 distinct pore labels present.
        let mut labels: Vec<&str> = mesh
            .faces
            .iter()
            .filter(|f| f.absorbing)
            .map(|f| f.label.as_str())
            .collect();
        labels.sort_unstable();
        labels.dedup();
        assert_eq!(labels.len(), 51);
    }

    #[test]
    fn fibonacci_sphere_five_pores() {
        let mesh = make_fibonacci_sphere(5, 0.02, 1).unwrap();
        let a = 2.0 * (0.02_f64 / 5.0).sqrt();
        assert_relative_eq!(a, 0.1265, max_relative = 2e-3);
        let achieved = mesh.absorbing_area_fraction();
        assert!((achieved - 0.02).abs() < 0.1 * 0.02);
    }

    #[test]
    fn fibonacci_sphere_rejects_overlap() {
        // sigma large enough that neighboring caps collide.
        assert!(make_fibonacci_sphere(51, 0.9, 0).is_err());
    }

    #[test]
    fn skirt_family_geometry() {
        let cyl = make_ellipsoid_skirt(1.0, 0).unwrap();
        // Cylinder: one band of side rectangles + 2 pore discs.
        assert_eq!(cyl.faces.len(), 32 + 2);
        let top = cyl.faces.iter().find(|f| f.label == "top").unwrap();
        assert!(top.absorbing);
        assert!(cyl.faces.iter().filter(|f| f.label == "skirt").all(|f| !f.absorbing));

        let skirt = make_ellipsoid_skirt(8.0, 0).unwrap();
        let eq_radius = skirt
            .vertices
            .iter()
            .map(|v| (v.x * v.x + v.y * v.y).sqrt())
            .fold(0.0_f64, f64::max);
        assert_relative_eq!(eq_radius, 8.0, max_relative = 1e-12);
        // Mirror symmetry: vertex set equals its z-reflection.
        for v in &skirt.vertices {
            let found = skirt
                .vertices
                .iter()
                .any(|w| (w.x - v.x).abs() < 1e-9 && (w.y - v.y).abs() < 1e-9 && (w.z + v.z).abs() < 1e-9);
            assert!(found);
        }
        assert!(make_ellipsoid_skirt(0.5, 0).is_err());
    }

    #[test]
    fn skirt_faces_reachable_from_outside() {
        // Every face of the cylinder is selectable from a point above its plane.
        let cyl = make_ellipsoid_skirt(1.0, 0).unwrap();
        for (i, f) in cyl.faces.iter().enumerate() {
            let p = f.centroid(&cyl.vertices) + f.normal * 0.3;
            let sel = select_target_face(p, &cyl).unwrap();
            assert_eq!(sel, i);
        }
    }
}

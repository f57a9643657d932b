use kmc3d::engine::*;
use kmc3d::geometry::*;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let tables = PropagatorTables::build_default(3.0).unwrap();
    println!("table build (400x400): {:.2?}", t0.elapsed());

    // Plane: single pore, shell release, 1e6 particles.
    let scene = PlanarScene::new(
        vec![PlanarPore { center: [0.0, 0.0], radius: 1.0, label: "p".into() }],
        3.0,
    ).unwrap();
    let t0 = Instant::now();
    let settings = RunSettings::new(1.0, 1_000_000, 1);
    let r = run_plane(&scene, Release::Shell(5.0), &settings, &tables).unwrap();
    let dt = t0.elapsed();
    println!("plane 1e6: {:.2?}  (steps/particle {:.1}, p={:.5})", dt, r.total_steps as f64 / 1e6, r.capture_fraction());

    // Cube: 1e6.
    let cube = make_cube(1.0).unwrap();
    let t0 = Instant::now();
    let r = run_polyhedron(&cube, Release::Shell(5.0), &settings, &tables).unwrap();
    println!("cube 1e6: {:.2?} (steps/particle {:.1}, C={:.5})", t0.elapsed(), r.total_steps as f64 / 1e6, 5.0*r.capture_fraction());

    // Fibonacci sphere N=51 sigma=0.1.
    let t0 = Instant::now();
    let mesh = make_fibonacci_sphere(51, 0.1, 2).unwrap();
    println!("fib sphere gen (ref 2): {:.2?}, verts {}, faces {}, achieved sigma {:.4}",
        t0.elapsed(), mesh.vertices.len(), mesh.faces.len(), mesh.absorbing_area_fraction());
    let t0 = Instant::now();
    let settings = RunSettings::new(1.0, 100_000, 1);
    let r = run_polyhedron(&mesh, Release::Point(Vec3::new(0.0,0.0,2.5)), &settings, &tables).unwrap();
    let dt = t0.elapsed();
    println!("sphere 1e5: {:.2?} (steps/particle {:.1}, capture={:.4}, flagged={})",
        dt, r.total_steps as f64 / 1e5, r.capture_fraction(), r.flagged);
}

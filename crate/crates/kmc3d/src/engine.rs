//! The two stage machines that assemble propagators into full trajectories:
//! diffusion to a plane with absorbing pores, and diffusion to a convex
//! polyhedron with absorbing faces. Capture is tested only at plane/face
//! impact; there is no time discretization anywhere.
//!
//! Particles are independent; the run is embarrassingly parallel and
//! bit-reproducible for a fixed (seed, M) regardless of worker count: each
//! particle draws from its own counter-derived RNG stream, and results are
//! reduced in particle-index order.

use crate::error::{Error, Result};
use crate::geometry::{
    inscribed_hemisphere_radius, nearest_pore_distance, point_in_face, resolve_surface_face,
    select_target_face, ConvexMesh, PlanarScene, Vec3,
};
use crate::propagators::{
    build_reinsertion_table, hemisphere_exit, plane_impact, reinsert_or_escape,
    HemisphereCdfTable, Reinsertion, ReinsertionTable, TableLookup, HEMI_DEFAULT_POINTS,
};
use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// One diffusing particle: position, elapsed clock, lifecycle status.
#[derive(Debug, Clone, Copy)]
pub struct Particle {
    pub position: Vec3,
    pub clock: f64,
    pub status: Status,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Status {
    Alive,
    /// Captured by the target with this label index at the given time.
    Captured(u32, f64),
    Escaped(f64),
}

/// Where particles start.
#[derive(Debug, Clone, Copy)]
pub enum Release {
    /// A fixed point (z >= 0 for the plane; strictly outside for meshes).
    Point(Vec3),
    /// Uniform on the hemisphere (plane) or sphere (mesh) of this radius,
    /// centered on the scene's bounding center.
    Shell(f64),
}

/// Run parameters common to both geometries.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub diffusivity: f64,
    pub particles: u64,
    pub seed: u64,
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
    /// Safety cap on projection steps per particle.
    pub max_steps: u32,
    pub table_lookup: TableLookup,
    /// Provenance string stored into the result (sha of the config, etc).
    pub config_digest: String,
}

impl RunSettings {
    pub fn new(diffusivity: f64, particles: u64, seed: u64) -> Self {
        RunSettings {
            diffusivity,
            particles,
            seed,
            workers: 0,
            max_steps: 1_000_000,
            table_lookup: TableLookup::NearestEntry,
            config_digest: String::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.diffusivity > 0.0) {
            return Err(Error::config("diffusivity must be > 0".to_string()));
        }
        if self.particles == 0 {
            return Err(Error::config("particle count must be >= 1".to_string()));
        }
        Ok(())
    }
}

/// Prebuilt propagator tables, reusable across runs with the same ratio.
/// The reinsertion table is nondimensional (landing radius 1, D = 1) and
/// rescaled per use.
#[derive(Debug, Clone)]
pub struct PropagatorTables {
    pub hemisphere: HemisphereCdfTable,
    pub reinsertion: ReinsertionTable,
}

impl PropagatorTables {
    pub fn build(ratio: f64, grid: (usize, usize)) -> Result<Self> {
        Ok(PropagatorTables {
            hemisphere: HemisphereCdfTable::build(HEMI_DEFAULT_POINTS)?,
            reinsertion: build_reinsertion_table(ratio, grid, 1.0)?,
        })
    }

    /// Default 400 x 400 reinsertion grid.
    pub fn build_default(ratio: f64) -> Result<Self> {
        Self::build(ratio, (400, 400))
    }
}

/// Per-target capture records plus escape/step bookkeeping.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub target_labels: Vec<String>,
    /// Capture times per target label, in particle-index order.
    pub capture_times: Vec<Vec<f64>>,
    pub escapes: u64,
    /// Particles stopped by the safety cap or a degenerate geometry query;
    /// counted separately, never silently dropped.
    pub flagged: u64,
    pub particles: u64,
    /// Total projection steps over all particles.
    pub total_steps: u64,
    pub seed: u64,
    pub config_digest: String,
}

impl SimulationResult {
    pub fn captures(&self) -> u64 {
        self.capture_times.iter().map(|v| v.len() as u64).sum()
    }

    pub fn capture_fraction(&self) -> f64 {
        self.captures() as f64 / self.particles as f64
    }

    pub fn fraction_for(&self, label: &str) -> f64 {
        match self.target_labels.iter().position(|l| l == label) {
            Some(i) => self.capture_times[i].len() as f64 / self.particles as f64,
            None => 0.0,
        }
    }

    pub fn times_for(&self, label: &str) -> &[f64] {
        match self.target_labels.iter().position(|l| l == label) {
            Some(i) => &self.capture_times[i],
            None => &[],
        }
    }

    /// All capture times pooled over targets (not sorted).
    pub fn all_times(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.captures() as usize);
        for v in &self.capture_times {
            out.extend_from_slice(v);
        }
        out
    }

    /// FNV-1a digest over the result's numeric content; equal digests mean
    /// bit-identical capture records (used by the determinism checks).
    pub fn digest(&self) -> String {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        for (label, times) in self.target_labels.iter().zip(&self.capture_times) {
            eat(label.as_bytes());
            for t in times {
                eat(&t.to_bits().to_le_bytes());
            }
        }
        eat(&self.escapes.to_le_bytes());
        eat(&self.flagged.to_le_bytes());
        eat(&self.particles.to_le_bytes());
        format!("{h:016x}")
    }
}

/// Per-particle outcome, merged in index order.
enum Outcome {
    Captured { target: u32, time: f64, steps: u32 },
    Escaped { steps: u32 },
    Flagged { steps: u32 },
}

const CHUNK: u64 = 1 << 16;

/// Run `m` particles through `simulate`, reducing outcomes in particle-index
/// order so the result does not depend on the worker count.
fn run_particles<F>(
    m: u64,
    workers: usize,
    labels: Vec<String>,
    seed: u64,
    digest: String,
    simulate: F,
) -> Result<SimulationResult>
where
    F: Fn(u64) -> Outcome + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config(format!("worker pool: {e}")))?;
    let mut result = SimulationResult {
        capture_times: vec![Vec::new(); labels.len()],
        target_labels: labels,
        escapes: 0,
        flagged: 0,
        particles: m,
        total_steps: 0,
        seed,
        config_digest: digest,
    };
    let mut start = 0u64;
    while start < m {
        let end = (start + CHUNK).min(m);
        let outcomes: Vec<Outcome> =
            pool.install(|| (start..end).into_par_iter().map(&simulate).collect());
        for o in outcomes {
            match o {
                Outcome::Captured { target, time, steps } => {
                    result.capture_times[target as usize].push(time);
                    result.total_steps += steps as u64;
                }
                Outcome::Escaped { steps } => {
                    result.escapes += 1;
                    result.total_steps += steps as u64;
                }
                Outcome::Flagged { steps } => {
                    result.flagged += 1;
                    result.total_steps += steps as u64;
                }
            }
        }
        start = end;
    }
    Ok(result)
}

#[inline]
fn particle_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

// ---------------------------------------------------------------------------
// Plane machine
// ---------------------------------------------------------------------------

/// KMC for the half-space above the reflecting plane z = 0 with absorbing
/// pores. Stage I projects from the bulk to the plane (capture is tested at
/// impact); on the reflecting part the particle either hops through a
/// hemisphere sized by the distance to the absorbing set (inside the
/// decision disc) or undergoes escape/reinsertion (outside it).
///
/// Release points with z = 0 start directly at the on-plane stage, which is
/// what a source on the reflecting plane means.
pub fn run_plane(
    scene: &PlanarScene,
    release: Release,
    settings: &RunSettings,
    tables: &PropagatorTables,
) -> Result<SimulationResult> {
    settings.validate()?;
    if scene.pores().is_empty() && matches!(release, Release::Shell(_)) {
        return Err(Error::config(
            "shell release needs at least one pore to set the geometry scale".to_string(),
        ));
    }
    if (tables.reinsertion.ratio - scene.reinsertion_ratio).abs() > 1e-12 {
        return Err(Error::config(format!(
            "reinsertion table ratio {} does not match the scene ratio {}",
            tables.reinsertion.ratio, scene.reinsertion_ratio
        )));
    }
    let center = Vec3::new(
        scene.bounding_disc_center[0],
        scene.bounding_disc_center[1],
        0.0,
    );
    match release {
        Release::Point(x0) => {
            if x0.z < 0.0 {
                return Err(Error::config(format!(
                    "release point z = {} lies below the plane",
                    x0.z
                )));
            }
            if x0.z == 0.0 && nearest_pore_distance([x0.x, x0.y], scene).1.is_some() {
                return Err(Error::config(
                    "release point lies inside an absorbing pore".to_string(),
                ));
            }
        }
        Release::Shell(r) => {
            if !(r > scene.bounding_disc_radius) {
                return Err(Error::config(format!(
                    "release radius {r} must exceed the bounding disc radius {}",
                    scene.bounding_disc_radius
                )));
            }
        }
    }

    let d = settings.diffusivity;
    let labels: Vec<String> = scene.pores().iter().map(|p| p.label.clone()).collect();
    let decision_radius = scene.decision_radius();
    let max_steps = settings.max_steps;
    let lookup = settings.table_lookup;
    let seed = settings.seed;

    let simulate = |idx: u64| -> Outcome {
        let mut rng = particle_rng(seed, idx);
        let mut p = match release {
            Release::Point(x0) => x0,
            Release::Shell(r) => {
                // Uniform on the upper hemisphere: z uniform in (0, r).
                let zeta: f64 = rng.sample(Open01);
                let eta: f64 = rng.sample::<f64, _>(Open01) * 2.0 * std::f64::consts::PI;
                let rho = (1.0 - zeta * zeta).sqrt();
                center + Vec3::new(r * rho * eta.cos(), r * rho * eta.sin(), r * zeta)
            }
        };
        let mut clock = 0.0_f64;
        let mut steps = 0u32;
        loop {
            if steps >= max_steps {
                return Outcome::Flagged { steps };
            }
            if p.z > 0.0 {
                // Stage I: projection from the bulk to the bounding plane.
                let (t, dx, dy) = plane_impact(p.z, d, &mut rng);
                steps += 1;
                clock += t;
                p = Vec3::new(p.x + dx, p.y + dy, 0.0);
            }
            // On the plane: absorbed, hemisphere hop, or escape/reinsertion.
            let (dist, pore) = nearest_pore_distance([p.x, p.y], scene);
            if let Some(k) = pore {
                return Outcome::Captured {
                    target: k as u32,
                    time: clock,
                    steps,
                };
            }
            let rel = p - center;
            let rho = rel.norm();
            if rho < decision_radius {
                // Stage IIa: hemisphere sized by the distance to the
                // absorbing set.
                let (t, exit) = hemisphere_exit(dist, d, &tables.hemisphere, &mut rng);
                steps += 1;
                clock += t;
                p += exit;
            } else {
                // Stage IIb: escape or reinsertion onto the hemisphere of
                // radius rho/ratio; below-plane landings reflect through
                // the plane (method of images).
                let landing_radius = rho / scene.reinsertion_ratio;
                match reinsert_or_escape(
                    rel,
                    landing_radius,
                    &tables.reinsertion,
                    d,
                    lookup,
                    &mut rng,
                ) {
                    Reinsertion::Escaped => {
                        steps += 1;
                        return Outcome::Escaped { steps };
                    }
                    Reinsertion::Landed { elapsed, landing } => {
                        steps += 1;
                        clock += elapsed;
                        p = center + landing;
                        if p.z < 0.0 {
                            p.z = -p.z;
                        }
                    }
                }
            }
        }
    };

    run_particles(
        settings.particles,
        settings.workers,
        labels,
        seed,
        settings.config_digest.clone(),
        simulate,
    )
}

// ---------------------------------------------------------------------------
// Polyhedron machine
// ---------------------------------------------------------------------------

/// KMC for the domain exterior to a convex polyhedron. Stage I applies
/// escape/reinsertion outside the reinsertion ball; Stage II targets the
/// face plane with the largest positive signed distance; Stage III projects
/// onto that plane; Stage IV tests face membership (absorb, or bounce
/// through the largest inscribed hemisphere and project onto the same face
/// again -- the walk on a face only ends when the particle lands off it).
pub fn run_polyhedron(
    mesh: &ConvexMesh,
    release: Release,
    settings: &RunSettings,
    tables: &PropagatorTables,
) -> Result<SimulationResult> {
    settings.validate()?;
    if (tables.reinsertion.ratio - mesh.reinsertion_ratio).abs() > 1e-12 {
        return Err(Error::config(format!(
            "reinsertion table ratio {} does not match the mesh ratio {}",
            tables.reinsertion.ratio, mesh.reinsertion_ratio
        )));
    }
    match release {
        Release::Point(x0) => {
            if !mesh.is_outside(x0) {
                return Err(Error::config(
                    "release point must lie strictly outside the mesh".to_string(),
                ));
            }
        }
        Release::Shell(r) => {
            if !(r > mesh.bounding_sphere_radius) {
                return Err(Error::config(format!(
                    "release radius {r} must exceed the bounding sphere radius {}",
                    mesh.bounding_sphere_radius
                )));
            }
        }
    }

    // Capture targets are the distinct absorbing labels, in face order.
    let mut labels: Vec<String> = Vec::new();
    let mut face_target: Vec<u32> = Vec::with_capacity(mesh.faces.len());
    for f in &mesh.faces {
        if f.absorbing {
            let idx = match labels.iter().position(|l| l == &f.label) {
                Some(i) => i,
                None => {
                    labels.push(f.label.clone());
                    labels.len() - 1
                }
            };
            face_target.push(idx as u32);
        } else {
            face_target.push(u32::MAX);
        }
    }

    let d = settings.diffusivity;
    let center = mesh.bounding_sphere_center;
    let ball_radius = mesh.decision_radius();
    let ratio = mesh.reinsertion_ratio;
    let max_steps = settings.max_steps;
    let lookup = settings.table_lookup;
    let seed = settings.seed;
    // Plane-membership tolerance for boundary-resident landings.
    let surface_tol = 1e-12 * (mesh.bounding_sphere_radius + center.norm());

    let simulate = |idx: u64| -> Outcome {
        let mut rng = particle_rng(seed, idx);
        let mut p = match release {
            Release::Point(x0) => x0,
            Release::Shell(r) => {
                // Uniform on the full sphere: z uniform in (-r, r).
                let zeta: f64 = 2.0 * rng.sample::<f64, _>(Open01) - 1.0;
                let eta: f64 = rng.sample::<f64, _>(Open01) * 2.0 * std::f64::consts::PI;
                let rho = (1.0 - zeta * zeta).sqrt();
                center + Vec3::new(r * rho * eta.cos(), r * rho * eta.sin(), r * zeta)
            }
        };
        let mut clock = 0.0_f64;
        let mut steps = 0u32;
        'outer: loop {
            if steps >= max_steps {
                return Outcome::Flagged { steps };
            }
            // Stage I: escape or reinsertion while outside the ball.
            let rel = p - center;
            let rho = rel.norm();
            if rho > ball_radius {
                let landing_radius = rho / ratio;
                match reinsert_or_escape(
                    rel,
                    landing_radius,
                    &tables.reinsertion,
                    d,
                    lookup,
                    &mut rng,
                ) {
                    Reinsertion::Escaped => {
                        steps += 1;
                        return Outcome::Escaped { steps };
                    }
                    Reinsertion::Landed { elapsed, landing } => {
                        steps += 1;
                        clock += elapsed;
                        p = center + landing;
                        continue 'outer;
                    }
                }
            }
            // Stage II: face plane with the largest positive signed distance.
            // A landing can sit on the hull boundary to within rounding (all
            // signed distances ~ 0); such a particle is on the surface, so
            // resolve which face it is on and continue the walk from there
            // with no projection step.
            // `resolved` marks a boundary-resident landing whose face
            // membership was already settled by resolve_surface_face; it
            // must not be retested (the exact cross products round the
            // other way, which would loop without progress).
            let (fi, mut h, mut resolved) = match select_target_face(p, mesh) {
                Ok(fi) => (fi, mesh.signed_distance(p, fi), false),
                Err(_) => match resolve_surface_face(p, mesh, surface_tol) {
                    Some(fi) => (fi, 0.0, true),
                    None => return Outcome::Flagged { steps },
                },
            };
            let face = &mesh.faces[fi];
            // Stage III/IV: project onto the face plane; walk on the face
            // until the particle lands outside it or is absorbed.
            loop {
                if steps >= max_steps {
                    return Outcome::Flagged { steps };
                }
                let inside = if resolved {
                    resolved = false;
                    true
                } else {
                    let (t, dx, dy) = plane_impact(h, d, &mut rng);
                    steps += 1;
                    clock += t;
                    p = p - face.normal * h + face.e1 * dx + face.e2 * dy;
                    point_in_face(p, face)
                };
                if inside {
                    if face.absorbing {
                        return Outcome::Captured {
                            target: face_target[fi],
                            time: clock,
                            steps,
                        };
                    }
                    let r_h = inscribed_hemisphere_radius(p, face);
                    let (t2, exit) = hemisphere_exit(r_h, d, &tables.hemisphere, &mut rng);
                    steps += 1;
                    clock += t2;
                    p = p + face.e1 * exit.x + face.e2 * exit.y + face.normal * exit.z;
                    h = exit.z;
                } else {
                    continue 'outer;
                }
            }
        }
    };

    run_particles(
        settings.particles,
        settings.workers,
        labels,
        seed,
        settings.config_digest.clone(),
        simulate,
    )
}

// ---------------------------------------------------------------------------
// Capacitance estimation
// ---------------------------------------------------------------------------

/// Either scene type, for operations generic over the two machines.
pub enum Target<'a> {
    Planar(&'a PlanarScene),
    Mesh(&'a ConvexMesh),
}

#[derive(Debug, Clone)]
pub struct CapacitanceEstimate {
    pub capacitance: f64,
    /// Coefficient of variation sqrt((1-p)/(p M)) of the underlying capture
    /// probability estimate.
    pub cv: f64,
    pub result: SimulationResult,
}

/// Release particles uniformly on the (hemi)sphere of `release_radius` and
/// estimate the capacitance C = release_radius x capture probability.
pub fn estimate_capacitance(
    target: Target<'_>,
    release_radius: f64,
    settings: &RunSettings,
    tables: &PropagatorTables,
) -> Result<CapacitanceEstimate> {
    let result = match target {
        Target::Planar(scene) => {
            run_plane(scene, Release::Shell(release_radius), settings, tables)?
        }
        Target::Mesh(mesh) => {
            run_polyhedron(mesh, Release::Shell(release_radius), settings, tables)?
        }
    };
    let p = result.capture_fraction();
    let cv = if p > 0.0 && p < 1.0 {
        ((1.0 - p) / (p * settings.particles as f64)).sqrt()
    } else {
        f64::NAN
    };
    Ok(CapacitanceEstimate {
        capacitance: release_radius * p,
        cv,
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_cube, PlanarPore};

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

    fn small_tables() -> PropagatorTables {
        PropagatorTables::build(3.0, (64, 64)).unwrap()
    }

    #[test]
    fn conservation_and_determinism_across_workers() {
        let scene = unit_pore_scene();
        let tables = small_tables();
        let mut settings = RunSettings::new(1.0, 4000, 12345);
        settings.workers = 1;
        let r1 = run_plane(&scene, Release::Shell(5.0), &settings, &tables).unwrap();
        settings.workers = 4;
        let r4 = run_plane(&scene, Release::Shell(5.0), &settings, &tables).unwrap();
        assert_eq!(r1.digest(), r4.digest());
        assert_eq!(r1.captures() + r1.escapes + r1.flagged, 4000);
        assert!(r1.capture_times[0].iter().all(|&t| t > 0.0));
    }

    #[test]
    fn single_pore_capture_probability_rough() {
        // p = C/R = (2/pi)/5 ~ 0.1273; with 40k particles the 5-sigma band
        // is ~0.0083.
        let scene = unit_pore_scene();
        let tables = small_tables();
        let settings = RunSettings::new(1.0, 40_000, 99);
        let est = estimate_capacitance(Target::Planar(&scene), 5.0, &settings, &tables).unwrap();
        let p = est.result.capture_fraction();
        let want = 2.0 / std::f64::consts::PI / 5.0;
        assert!(
            (p - want).abs() < 5.0 * (want * (1.0 - want) / 40_000.0).sqrt(),
            "p = {p}, want {want}"
        );
        assert_eq!(est.result.flagged, 0);
    }

    #[test]
    fn degenerate_scene_every_particle_escapes() {
        // No pores: release from a point; everything must escape.
        let scene = PlanarScene::new(vec![], 3.0).unwrap();
        let tables = small_tables();
        let settings = RunSettings::new(1.0, 500, 7);
        let r = run_plane(
            &scene,
            Release::Point(Vec3::new(0.2, 0.0, 1.0)),
            &settings,
            &tables,
        )
        .unwrap();
        assert_eq!(r.escapes, 500);
    }

    #[test]
    fn plane_release_validation() {
        let scene = unit_pore_scene();
        let tables = small_tables();
        let settings = RunSettings::new(1.0, 10, 1);
        assert!(run_plane(
            &scene,
            Release::Point(Vec3::new(0.0, 0.0, -1.0)),
            &settings,
            &tables
        )
        .is_err());
        // On-plane release inside the pore is a configuration error.
        assert!(run_plane(&scene, Release::Point(Vec3::ZERO), &settings, &tables).is_err());
        // On-plane release outside the pore is legal.
        let r = run_plane(
            &scene,
            Release::Point(Vec3::new(3.0, 0.0, 0.0)),
            &settings,
            &tables,
        )
        .unwrap();
        assert_eq!(r.captures() + r.escapes + r.flagged, 10);
    }

    #[test]
    fn cube_capture_probability_rough() {
        let cube = make_cube(1.0).unwrap();
        let tables = small_tables();
        let settings = RunSettings::new(1.0, 40_000, 4242);
        let est = estimate_capacitance(Target::Mesh(&cube), 5.0, &settings, &tables).unwrap();
        let want = crate::analytic::CUBE_CAPACITANCE / 5.0;
        let p = est.result.capture_fraction();
        assert!(
            (p - want).abs() < 5.0 * (want * (1.0 - want) / 40_000.0).sqrt(),
            "p = {p}, want {want}"
        );
        assert_eq!(est.result.flagged, 0);
    }

    #[test]
    fn mesh_release_validation_and_determinism() {
        let cube = make_cube(1.0).unwrap();
        let tables = small_tables();
        let mut settings = RunSettings::new(2.0, 3000, 5150);
        assert!(run_polyhedron(&cube, Release::Point(Vec3::ZERO), &settings, &tables).is_err());
        settings.workers = 1;
        let a = run_polyhedron(
            &cube,
            Release::Point(Vec3::new(0.0, 0.0, 2.0)),
            &settings,
            &tables,
        )
        .unwrap();
        settings.workers = 3;
        let b = run_polyhedron(
            &cube,
            Release::Point(Vec3::new(0.0, 0.0, 2.0)),
            &settings,
            &tables,
        )
        .unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_eq!(a.captures() + a.escapes + a.flagged, 3000);
        // All six faces absorbing under distinct labels.
        assert_eq!(a.target_labels.len(), 6);
        // Released above the +z face, that face dominates.
        let zp = a.fraction_for("z+");
        for l in ["x+", "x-", "y+", "y-", "z-"] {
            assert!(a.fraction_for(l) < zp);
        }
    }

    #[test]
    fn capture_clocks_are_positive_and_finite() {
        let cube = make_cube(1.0).unwrap();
        let tables = small_tables();
        let settings = RunSettings::new(1.0, 2000, 31);
        let r = run_polyhedron(
            &cube,
            Release::Point(Vec3::new(0.0, 0.0, 1.5)),
            &settings,
            &tables,
        )
        .unwrap();
        for times in &r.capture_times {
            for &t in times {
                assert!(t > 0.0 && t.is_finite());
            }
        }
    }

    #[test]
    fn table_ratio_mismatch_rejected() {
        let cube = make_cube(1.0).unwrap();
        let tables = PropagatorTables::build(2.0, (64, 64)).unwrap();
        let settings = RunSettings::new(1.0, 10, 1);
        assert!(run_polyhedron(
            &cube,
            Release::Point(Vec3::new(0.0, 0.0, 2.0)),
            &settings,
            &tables
        )
        .is_err());
    }
}

use glbm_core::brownmap::export::{boundary_csv, membership};
use glbm_core::brownmap::{
    containment_fraction, j_transform, psi_map, psi_zeta_for_flow, pushforward_region, sigma_region, t_general, t_unitary, CircleMeasure, InitialSpectralData,
    PointCloud, RegionOptions, Window,
};
use glbm_core::glflow::simulate_endpoint;
use glbm_core::params::{EllipticParams, SimConfig, TimeGrid};
use glbm_core::spectral::eigenvalues;
use glbm_core::{Complex, ComplexMatrix, RngStream, C64};

fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

fn sigma(t: f64, h: f64) -> glbm_core::brownmap::Region<f64> {
    let mu = CircleMeasure::point_mass_at_one();
    let f = move |z: C64| t_unitary(&mu, z);
    sigma_region(&f, t, Window::square(c(0.0, 0.0), 2.0).unwrap(), h, &RegionOptions::for_flow(1.0, t)).unwrap()
}

#[test]
fn region_area_matches_monte_carlo_indicator() {
    let t = 2.0;
    let r = sigma(t, 0.01);
    let w = r.bounds().unwrap();
    let mu = CircleMeasure::point_mass_at_one();
    let mut rng = RngStream::new(1, 0);
    let (m, mut hits_t, mut hits_poly) = (40_000, 0usize, 0usize);
    for _ in 0..m {
        let z = c(
            w.re_min + (w.re_max - w.re_min) * rng.uniform(),
            w.im_min + (w.im_max - w.im_min) * rng.uniform(),
        );
        let inside_t = t_unitary(&mu, z) < t;
        hits_t += usize::from(inside_t);
        hits_poly += usize::from(r.contains(z));
    }
    // polygon and sublevel set disagree only in a thin band at the boundary
    let diff = (hits_t as f64 - hits_poly as f64).abs() / m as f64;
    assert!(diff < 0.005, "{diff}");
}

#[test]
fn boundary_vertices_lie_on_level_set() {
    let r = sigma(1.5, 0.02);
    let mu = CircleMeasure::point_mass_at_one();
    for p in r.boundary.iter().flatten() {
        assert!((t_unitary(&mu, *p) - 1.5).abs() < 1e-5, "{p}");
    }
}

#[test]
fn region_is_symmetric_under_conjugation() {
    let r = sigma(3.0, 0.02);
    let mut rng = RngStream::new(2, 0);
    for _ in 0..2000 {
        let z = c(-1.0 + 12.0 * rng.uniform(), -6.0 + 12.0 * rng.uniform());
        if r.boundary_distance(z) > 0.05 {
            assert_eq!(r.contains(z), r.contains(z.conj()), "{z}");
        }
    }
}

#[test]
fn far_field_j_matches_moments() {
    // J(z) = −½ − Σ_{k≥1} m_k / z^k for |z| beyond the cloud
    let mut rng = RngStream::new(3, 0);
    let pts: Vec<C64> = (0..500).map(|_| c(rng.normal(), rng.normal()) * 0.5).collect();
    let cloud = PointCloud::uniform(pts.clone()).unwrap();
    let z = c(10.0, 4.0);
    let j = j_transform(&cloud, z).unwrap();
    assert_eq!(j.excluded_mass, 0.0);
    let mut series = c(-0.5, 0.0);
    for k in 1..30 {
        let mk: C64 = pts.iter().map(|p| p.powi(k)).sum::<C64>() / pts.len() as f64;
        series -= mk / z.powi(k);
    }
    assert!((j.value - series).norm() < 1e-12, "{} vs {}", j.value, series);
}

#[test]
fn psi_for_point_mass_at_origin_is_a_spiral_scaling() {
    let cloud = PointCloud::uniform(vec![c(0.0, 0.0)]).unwrap();
    let zeta = c(0.4, -0.3);
    let factor = (zeta * -0.5).exp();
    for z in [c(1.0, 0.0), c(-0.3, 2.0), c(5.0, 5.0)] {
        assert!((psi_map(&cloud, zeta, z).unwrap() - z * factor).norm() < 1e-14);
    }
    let disk = sigma(0.5, 0.02);
    let image = pushforward_region(&disk, &cloud, zeta).unwrap();
    for (a, b) in disk.boundary.iter().flatten().zip(image.boundary.iter().flatten()) {
        assert!((a * factor - b).norm() < 1e-12);
    }
}

#[test]
fn general_formula_agrees_with_unitary_on_rotated_atoms() {
    let mu = CircleMeasure::<f64>::new(vec![(0.4, 0.3), (2.2, 0.5), (4.0, 0.2)]).unwrap();
    let data = mu.to_spectral_data();
    let mut rng = RngStream::new(4, 0);
    for _ in 0..500 {
        let z = c(-3.0 + 6.0 * rng.uniform(), -3.0 + 6.0 * rng.uniform());
        if (z.norm() - 1.0).abs() < 1e-3 {
            continue;
        }
        let (a, b) = (t_general(&data, z), t_unitary(&mu, z));
        assert!((a - b).abs() < 1e-10 * b.max(1.0), "{z}: {a} vs {b}");
    }
    let d = InitialSpectralData::AtomicComplex(vec![(c(1.0, 0.0), 1.0)]);
    assert!((t_general(&d, c(-1.0, 0.0)) - 4.0).abs() < 1e-12);
}

#[test]
fn exports_are_consistent() {
    let r = sigma(3.9, 0.02);
    let csv = boundary_csv(&r);
    assert_eq!(csv.lines().count(), 1 + r.vertex_count());
    let m = membership(&r, 0.02);
    let inside = m.cells.iter().filter(|x| **x == 1).count();
    let g = r.grid.as_ref().unwrap();
    assert_eq!(inside, g.mask(r.level).iter().filter(|b| **b).count());
    assert_eq!(m.header.nx * m.header.ny, m.cells.len());
}

fn flow_eigenvalues(n: usize, rho: f64, zeta: C64, seed: u64) -> Vec<C64> {
    let p = EllipticParams::new(rho, zeta).unwrap();
    let cfg = SimConfig::new(n, p, TimeGrid::new(1.0, 32).unwrap(), seed, 1).unwrap();
    let b = simulate_endpoint(&cfg, &ComplexMatrix::identity(n), &mut RngStream::new(seed, 0)).unwrap();
    eigenvalues(&b).unwrap().eigenvalues
}

#[test]
fn mapped_region_covers_flow_sample_with_matching_sign() {
    let (n, t) = (200, 3.0);
    let zeta = c(0.0, 1.5);
    let region = sigma(t, 0.02);
    let cloud = PointCloud::uniform(flow_eigenvalues(n, t, c(0.0, 0.0), 5)).unwrap();
    let sample = flow_eigenvalues(n, t, zeta, 6);
    let matched = pushforward_region(&region, &cloud, psi_zeta_for_flow(zeta)).unwrap();
    let opposite = pushforward_region(&region, &cloud, zeta).unwrap();
    let good = containment_fraction(&sample, &matched, 0.05);
    let bad = containment_fraction(&sample, &opposite, 0.05);
    assert!(good >= 0.9, "matched {good}, opposite {bad}");
    assert!(bad < good - 0.2, "matched {good}, opposite {bad}");
}

//! Sublevel-set regions `{T < t}`: lattice evaluation with automatic window
//! growth, marching-squares boundary tracing, topology, push-forward and
//! containment.

use std::collections::HashMap;

use num_complex::Complex;
use rayon::prelude::*;

use super::{psi_map, PointCloud};
use crate::error::{GlbmError, Result};
use crate::scalar::{c, Real};

/// Axis-aligned rectangle in ℂ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window<T: Real> {
    pub re_min: T,
    pub re_max: T,
    pub im_min: T,
    pub im_max: T,
}

impl<T: Real> Window<T> {
    pub fn new(re_min: T, re_max: T, im_min: T, im_max: T) -> Result<Self> {
        if !(re_max > re_min) || !(im_max > im_min) {
            return Err(GlbmError::invalid("window must have positive width and height"));
        }
        Ok(Self { re_min, re_max, im_min, im_max })
    }

    /// Square window of half-width `r` centered at `center`.
    pub fn square(center: Complex<T>, r: T) -> Result<Self> {
        Self::new(center.re - r, center.re + r, center.im - r, center.im + r)
    }

    pub fn center(&self) -> Complex<T> {
        let h = T::lit(0.5);
        c((self.re_min + self.re_max) * h, (self.im_min + self.im_max) * h)
    }

    pub fn half_width(&self) -> T {
        ((self.re_max - self.re_min).max(self.im_max - self.im_min)) * T::lit(0.5)
    }

    fn scaled(&self, factor: T) -> Self {
        let ctr = self.center();
        let hx = (self.re_max - self.re_min) * T::lit(0.5) * factor;
        let hy = (self.im_max - self.im_min) * T::lit(0.5) * factor;
        Self { re_min: ctr.re - hx, re_max: ctr.re + hx, im_min: ctr.im - hy, im_max: ctr.im + hy }
    }
}

/// Rectangular lattice of function values, row-major in the imaginary
/// direction: `values[j·nx + i]` is the value at `(x0 + i·h) + i(y0 + j·h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T: Real> {
    pub x0: T,
    pub y0: T,
    pub h: T,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<T>,
}

impl<T: Real> Grid<T> {
    pub fn point(&self, i: usize, j: usize) -> Complex<T> {
        c(self.x0 + T::from_count(i) * self.h, self.y0 + T::from_count(j) * self.h)
    }

    pub fn value(&self, i: usize, j: usize) -> T {
        self.values[j * self.nx + i]
    }

    fn evaluate(window: &Window<T>, h: T, f: &(dyn Fn(Complex<T>) -> T + Sync)) -> Self {
        let nx = ((window.re_max - window.re_min) / h).ceil().to_usize().unwrap_or(1) + 1;
        let ny = ((window.im_max - window.im_min) / h).ceil().to_usize().unwrap_or(1) + 1;
        let (x0, y0) = (window.re_min, window.im_min);
        let values: Vec<T> = (0..ny)
            .into_par_iter()
            .flat_map_iter(|j| {
                let y = y0 + T::from_count(j) * h;
                (0..nx).map(move |i| f(c(x0 + T::from_count(i) * h, y)))
            })
            .collect();
        Self { x0, y0, h, nx, ny, values }
    }

    /// Row-major membership mask `value < level`.
    pub fn mask(&self, level: T) -> Vec<bool> {
        self.values.iter().map(|v| *v < level).collect()
    }
}

/// Limits for window growth and boundary refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionOptions<T: Real> {
    /// Largest admissible window half-width.
    pub max_half_width: T,
    /// Largest admissible number of lattice points.
    pub max_points: usize,
    /// Boundary vertices satisfy `|T − t| ≤ tolerance`.
    pub tolerance: T,
}

impl<T: Real> RegionOptions<T> {
    pub fn new(max_half_width: T) -> Self {
        Self { max_half_width, max_points: 40_000_000, tolerance: T::lit(1e-6) }
    }

    /// Cap `max|λ|·e^{2t} + pad` for data of spectral radius `radius`.
    pub fn for_flow(radius: T, t: T) -> Self {
        Self::new(radius * (T::lit(2.0) * t).exp() + T::one())
    }
}

/// Domain `{T < t}` (or its image under a push-forward).
#[derive(Debug, Clone, PartialEq)]
pub struct Region<T: Real> {
    /// Lattice of `T` values; absent for push-forward images.
    pub grid: Option<Grid<T>>,
    pub level: T,
    /// Closed polylines (`first == last`).
    pub boundary: Vec<Vec<Complex<T>>>,
    /// Number of boundary curves: sublevel-set components plus holes.
    pub component_count: usize,
    /// Per-polyline flags marking vertices mapped through an offset point.
    pub flagged: Vec<Vec<bool>>,
    /// Images of interior lattice points (push-forward only).
    pub mapped_interior: Vec<Complex<T>>,
}

impl<T: Real> Region<T> {
    pub fn is_empty(&self) -> bool {
        self.boundary.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.boundary.iter().map(|p| p.len()).sum()
    }

    /// Even-odd point-in-polygon test against all boundary curves.
    pub fn contains(&self, p: Complex<T>) -> bool {
        let mut inside = false;
        for poly in &self.boundary {
            for seg in poly.windows(2) {
                let (a, b) = (seg[0], seg[1]);
                if (a.im > p.im) != (b.im > p.im) {
                    let x = a.re + (p.im - a.im) / (b.im - a.im) * (b.re - a.re);
                    if p.re < x {
                        inside = !inside;
                    }
                }
            }
        }
        inside
    }

    /// Distance from `p` to the nearest boundary segment.
    pub fn boundary_distance(&self, p: Complex<T>) -> T {
        let mut best = T::infinity();
        for poly in &self.boundary {
            for seg in poly.windows(2) {
                best = best.min(segment_distance(p, seg[0], seg[1]));
            }
        }
        best
    }

    /// Membership within the region dilated by `margin`.
    pub fn contains_with_margin(&self, p: Complex<T>, margin: T) -> bool {
        self.contains(p) || (margin > T::zero() && self.boundary_distance(p) <= margin)
    }

    /// Bounding box of the boundary curves.
    pub fn bounds(&self) -> Option<Window<T>> {
        let mut it = self.boundary.iter().flatten();
        let first = it.next()?;
        let mut w = Window { re_min: first.re, re_max: first.re, im_min: first.im, im_max: first.im };
        for p in it {
            w.re_min = w.re_min.min(p.re);
            w.re_max = w.re_max.max(p.re);
            w.im_min = w.im_min.min(p.im);
            w.im_max = w.im_max.max(p.im);
        }
        Some(w)
    }
}

fn segment_distance<T: Real>(p: Complex<T>, a: Complex<T>, b: Complex<T>) -> T {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == T::zero() {
        return (p - a).norm();
    }
    let s = ((p - a).re * ab.re + (p - a).im * ab.im) / len2;
    let s = s.max(T::zero()).min(T::one());
    (p - (a + ab * s)).norm()
}

/// Traces `{f < t}` on a lattice of spacing `h`, growing the window by
/// factors of 1.5 until the outer ring of lattice points satisfies `f > t`.
pub fn sigma_region<T: Real>(
    f: &(dyn Fn(Complex<T>) -> T + Sync),
    t: T,
    window: Window<T>,
    h: T,
    options: &RegionOptions<T>,
) -> Result<Region<T>> {
    if !(t > T::zero()) {
        return Err(GlbmError::invalid(format!("level must be positive, got {t}")));
    }
    if !(h > T::zero()) {
        return Err(GlbmError::invalid(format!("resolution must be positive, got {h}")));
    }
    let mut win = window;
    let grid = loop {
        if win.half_width() > options.max_half_width {
            return Err(GlbmError::WindowTooSmall { half_width: win.half_width().to_f64_lossy() });
        }
        let nx = ((win.re_max - win.re_min) / h).ceil().to_f64_lossy() + 1.0;
        let ny = ((win.im_max - win.im_min) / h).ceil().to_f64_lossy() + 1.0;
        if nx * ny > options.max_points as f64 {
            return Err(GlbmError::WindowTooSmall { half_width: win.half_width().to_f64_lossy() });
        }
        let grid = Grid::evaluate(&win, h, f);
        if ring_outside(&grid, t) {
            break grid;
        }
        win = win.scaled(T::lit(1.5));
    };
    let boundary = trace(&grid, t, f, options.tolerance);
    let component_count = count_boundary_components(&grid, t);
    let flagged = boundary.iter().map(|p| vec![false; p.len()]).collect();
    Ok(Region { grid: Some(grid), level: t, boundary, component_count, flagged, mapped_interior: Vec::new() })
}

fn ring_outside<T: Real>(g: &Grid<T>, t: T) -> bool {
    let out = |i: usize, j: usize| g.value(i, j) > t;
    (0..g.nx).all(|i| out(i, 0) && out(i, g.ny - 1)) && (0..g.ny).all(|j| out(0, j) && out(g.nx - 1, j))
}

/// Sublevel components (4-connected) plus holes (8-connected complement
/// components not touching the frame).
fn count_boundary_components<T: Real>(g: &Grid<T>, t: T) -> usize {
    let mask = g.mask(t);
    let (nx, ny) = (g.nx, g.ny);
    let inside_components = flood_count(&mask, nx, ny, true).0;
    let outside: Vec<bool> = mask.iter().map(|m| !m).collect();
    let (outside_components, touching) = flood_count(&outside, nx, ny, false);
    inside_components + (outside_components - touching)
}

/// Counts connected components of `true` cells; returns `(count, count
/// touching the frame)`.
fn flood_count(mask: &[bool], nx: usize, ny: usize, four: bool) -> (usize, usize) {
    let mut seen = vec![false; mask.len()];
    let mut count = 0;
    let mut touching = 0;
    let mut stack = Vec::new();
    let offsets: &[(isize, isize)] = if four {
        &[(1, 0), (-1, 0), (0, 1), (0, -1)]
    } else {
        &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)]
    };
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        count += 1;
        let mut touches = false;
        seen[start] = true;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            let (i, j) = ((idx % nx) as isize, (idx / nx) as isize);
            if i == 0 || j == 0 || i == nx as isize - 1 || j == ny as isize - 1 {
                touches = true;
            }
            for (di, dj) in offsets {
                let (a, b) = (i + di, j + dj);
                if a < 0 || b < 0 || a >= nx as isize || b >= ny as isize {
                    continue;
                }
                let k = b as usize * nx + a as usize;
                if mask[k] && !seen[k] {
                    seen[k] = true;
                    stack.push(k);
                }
            }
        }
        if touches {
            touching += 1;
        }
    }
    (count, touching)
}

/// Marching squares with per-edge bisection; returns closed polylines.
fn trace<T: Real>(g: &Grid<T>, t: T, f: &(dyn Fn(Complex<T>) -> T + Sync), tol: T) -> Vec<Vec<Complex<T>>> {
    let (nx, ny) = (g.nx, g.ny);
    let inside = |i: usize, j: usize| g.value(i, j) < t;
    // edge ids: horizontal (i,j)-(i+1,j) → j·nx + i; vertical (i,j)-(i,j+1) → nx·ny + j·nx + i
    let hid = |i: usize, j: usize| j * nx + i;
    let vid = |i: usize, j: usize| nx * ny + j * nx + i;
    let mut segments: Vec<(usize, usize)> = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let c0 = inside(i, j);
            let c1 = inside(i + 1, j);
            let c2 = inside(i + 1, j + 1);
            let c3 = inside(i, j + 1);
            let case = (c0 as u8) | (c1 as u8) << 1 | (c2 as u8) << 2 | (c3 as u8) << 3;
            let bottom = hid(i, j);
            let top = hid(i, j + 1);
            let left = vid(i, j);
            let right = vid(i + 1, j);
            match case {
                0 | 15 => {}
                1 | 14 => segments.push((left, bottom)),
                2 | 13 => segments.push((bottom, right)),
                3 | 12 => segments.push((left, right)),
                4 | 11 => segments.push((right, top)),
                6 | 9 => segments.push((bottom, top)),
                7 | 8 => segments.push((left, top)),
                5 | 10 => {
                    let center = g.point(i, j) + c(g.h, g.h) * T::lit(0.5);
                    let center_inside = f(center) < t;
                    // case 5: corners 0 and 2 inside; case 10: corners 1 and 3 inside
                    let join_diagonal_02 = (case == 5) == center_inside;
                    if join_diagonal_02 {
                        // separate corners 1 and 3
                        segments.push((bottom, right));
                        segments.push((left, top));
                    } else {
                        // separate corners 0 and 2
                        segments.push((left, bottom));
                        segments.push((right, top));
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    let mut at_edge: HashMap<usize, Vec<usize>> = HashMap::new();
    for (s, (a, b)) in segments.iter().enumerate() {
        at_edge.entry(*a).or_default().push(s);
        at_edge.entry(*b).or_default().push(s);
    }

    let mut vertex_cache: HashMap<usize, Complex<T>> = HashMap::new();
    let mut vertex = |edge: usize| -> Complex<T> {
        if let Some(v) = vertex_cache.get(&edge) {
            return *v;
        }
        let (p, q) = if edge < nx * ny {
            let (i, j) = (edge % nx, edge / nx);
            (g.point(i, j), g.point(i + 1, j))
        } else {
            let e = edge - nx * ny;
            let (i, j) = (e % nx, e / nx);
            (g.point(i, j), g.point(i, j + 1))
        };
        let v = refine_crossing(f, t, p, q, tol);
        vertex_cache.insert(edge, v);
        v
    };

    let mut used = vec![false; segments.len()];
    let mut polylines = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (first_edge, mut current) = segments[start];
        let mut edges = vec![first_edge, current];
        loop {
            let next = at_edge
                .get(&current)
                .and_then(|list| list.iter().copied().find(|s| !used[*s]));
            let Some(s) = next else { break };
            used[s] = true;
            let (a, b) = segments[s];
            current = if a == current { b } else { a };
            edges.push(current);
            if current == first_edge {
                break;
            }
        }
        if *edges.last().expect("nonempty") != first_edge {
            edges.push(first_edge);
        }
        let poly: Vec<Complex<T>> = edges.iter().map(|e| vertex(*e)).collect();
        polylines.push(poly);
    }
    polylines
}

/// Bisection along the segment from `p` to `q` for `f = t`.
fn refine_crossing<T: Real>(f: &(dyn Fn(Complex<T>) -> T + Sync), t: T, p: Complex<T>, q: Complex<T>, tol: T) -> Complex<T> {
    let fp_inside = f(p) < t;
    let (mut lo, mut hi) = (T::zero(), T::one());
    let mut best = p + (q - p) * T::lit(0.5);
    for _ in 0..200 {
        let mid = (lo + hi) * T::lit(0.5);
        best = p + (q - p) * mid;
        let v = f(best);
        if (v - t).abs() <= tol {
            break;
        }
        if (v < t) == fp_inside {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::epsilon() {
            break;
        }
    }
    best
}

/// Maps a region through `Ψ`. Boundary vertices where `Ψ` is undefined are
/// evaluated at a point pushed outward along the local normal and flagged.
pub fn pushforward_region<T: Real>(region: &Region<T>, cloud: &PointCloud<T>, zeta: Complex<T>) -> Result<Region<T>> {
    let eps = cloud.exclusion_radius();
    let mut boundary = Vec::with_capacity(region.boundary.len());
    let mut flagged = Vec::with_capacity(region.boundary.len());
    for poly in &region.boundary {
        let m = poly.len();
        let mapped: Vec<(Complex<T>, bool)> = poly
            .par_iter()
            .enumerate()
            .map(|(k, p)| -> Result<(Complex<T>, bool)> {
                match psi_map(cloud, zeta, *p) {
                    Ok(v) => Ok((v, false)),
                    Err(GlbmError::UndefinedAtPoint { .. }) => {
                        let prev = poly[if k == 0 { m.saturating_sub(2) } else { k - 1 }];
                        let next = poly[if k + 1 >= m { 1.min(m - 1) } else { k + 1 }];
                        let tangent = next - prev;
                        let normal = if tangent.norm() > T::zero() {
                            c(tangent.im, -tangent.re) / tangent.norm()
                        } else {
                            c(T::one(), T::zero())
                        };
                        let mut step = eps.max(T::lit(1e-6));
                        for _ in 0..60 {
                            for dir in [normal, -normal] {
                                let candidate = *p + dir * step;
                                if !region.contains(candidate) {
                                    if let Ok(v) = psi_map(cloud, zeta, candidate) {
                                        return Ok((v, true));
                                    }
                                }
                            }
                            step = step * T::lit(1.5);
                        }
                        Err(GlbmError::UndefinedAtPoint { re: p.re.to_f64_lossy(), im: p.im.to_f64_lossy() })
                    }
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let (pts, flags): (Vec<_>, Vec<_>) = mapped.into_iter().unzip();
        boundary.push(pts);
        flagged.push(flags);
    }
    let mut mapped_interior = Vec::new();
    if let Some(g) = &region.grid {
        let pts: Vec<Complex<T>> = (0..g.ny)
            .flat_map(|j| (0..g.nx).map(move |i| (i, j)))
            .filter(|(i, j)| g.value(*i, *j) < region.level)
            .map(|(i, j)| g.point(i, j))
            .collect();
        mapped_interior = pts
            .par_iter()
            .filter_map(|p| psi_map(cloud, zeta, *p).ok())
            .collect();
    }
    Ok(Region {
        grid: None,
        level: region.level,
        boundary,
        component_count: region.component_count,
        flagged,
        mapped_interior,
    })
}

/// Fraction of `points` inside `region` dilated by `margin`.
pub fn containment_fraction<T: Real>(points: &[Complex<T>], region: &Region<T>, margin: T) -> T {
    if points.is_empty() {
        return T::zero();
    }
    let hits = points.par_iter().filter(|p| region.contains_with_margin(**p, margin)).count();
    T::from_count(hits) / T::from_count(points.len())
}

#[cfg(test)]
mod tests {
    use super::super::{t_unitary, CircleMeasure};
    use super::*;

    fn delta1_region(t: f64, h: f64) -> Region<f64> {
        let mu = CircleMeasure::<f64>::point_mass_at_one();
        let f = move |z: Complex<f64>| t_unitary(&mu, z);
        let w = Window::square(c(0.0, 0.0), 2.0).unwrap();
        sigma_region(&f, t, w, h, &RegionOptions::for_flow(1.0, t)).unwrap()
    }

    #[test]
    fn disk_region_traced() {
        let f = |z: Complex<f64>| z.norm();
        let w = Window::square(c(0.0, 0.0), 2.0).unwrap();
        let r = sigma_region(&f, 1.0, w, 0.05, &RegionOptions::new(10.0)).unwrap();
        assert_eq!(r.component_count, 1);
        assert_eq!(r.boundary.len(), 1);
        let poly = &r.boundary[0];
        assert_eq!(poly.first(), poly.last());
        assert!(poly.iter().all(|p| (p.norm() - 1.0).abs() <= 1e-6));
        assert!(r.contains(c(0.1, 0.2)));
        assert!(!r.contains(c(1.1, 0.0)));
        assert!(r.contains_with_margin(c(1.04, 0.0), 0.05));
    }

    #[test]
    fn annulus_has_two_curves() {
        let f = |z: Complex<f64>| (z.norm() - 1.5).abs();
        let w = Window::square(c(0.0, 0.0), 3.0).unwrap();
        let r = sigma_region(&f, 0.5, w, 0.05, &RegionOptions::new(10.0)).unwrap();
        assert_eq!(r.component_count, 2);
        assert_eq!(r.boundary.len(), 2);
        assert!(!r.contains(c(0.0, 0.0)));
        assert!(r.contains(c(1.5, 0.0)));
    }

    #[test]
    fn window_grows_and_caps() {
        let f = |z: Complex<f64>| z.norm();
        let w = Window::square(c(0.0, 0.0), 1.0).unwrap();
        let r = sigma_region(&f, 2.0, w, 0.05, &RegionOptions::new(10.0)).unwrap();
        assert!(r.grid.as_ref().unwrap().nx > 41);
        let e = sigma_region(&f, 2.0, w, 0.05, &RegionOptions::new(1.2));
        assert!(matches!(e, Err(GlbmError::WindowTooSmall { .. })));
    }

    #[test]
    fn empty_region_below_minimum() {
        let f = |z: Complex<f64>| 1.0 + z.norm();
        let w = Window::square(c(0.0, 0.0), 1.0).unwrap();
        let r = sigma_region(&f, 0.5, w, 0.1, &RegionOptions::new(10.0)).unwrap();
        assert!(r.is_empty());
        assert_eq!(r.component_count, 0);
        assert_eq!(containment_fraction(&[c(0.0, 0.0)], &r, 0.0), 0.0);
    }

    #[test]
    fn point_mass_topology_change() {
        let a = delta1_region(3.9, 0.02);
        assert_eq!(a.component_count, 1);
        assert_eq!(a.boundary.len(), 1);
        let b = delta1_region(4.1, 0.02);
        assert_eq!(b.component_count, 2);
        assert_eq!(b.boundary.len(), 2);
        let mu = CircleMeasure::<f64>::point_mass_at_one();
        for poly in a.boundary.iter().chain(&b.boundary) {
            assert_eq!(poly.first(), poly.last());
        }
        for p in a.boundary.iter().flatten() {
            assert!((t_unitary(&mu, *p) - 3.9).abs() <= 1e-6);
        }
    }

    #[test]
    fn regions_are_monotone_in_level() {
        let mu = CircleMeasure::<f64>::roots_of_unity(3).unwrap();
        let f = move |z: Complex<f64>| t_unitary(&mu, z);
        let w = Window::square(c(0.0, 0.0), 6.0).unwrap();
        let opts = RegionOptions::new(50.0);
        let a = sigma_region(&f, 1.0, w, 0.05, &opts).unwrap();
        let b = sigma_region(&f, 2.0, w, 0.05, &opts).unwrap();
        let (ga, gb) = (a.grid.unwrap(), b.grid.unwrap());
        assert_eq!((ga.nx, ga.ny), (gb.nx, gb.ny));
        let (ma, mb) = (ga.mask(1.0), gb.mask(2.0));
        assert!(ma.iter().zip(&mb).all(|(x, y)| !x || *y));
    }

    #[test]
    fn containment_counts() {
        let f = |z: Complex<f64>| z.norm();
        let w = Window::square(c(0.0, 0.0), 2.0).unwrap();
        let r = sigma_region(&f, 1.0, w, 0.05, &RegionOptions::new(10.0)).unwrap();
        assert_eq!(containment_fraction(&[c(0.0, 0.0); 10], &r, 0.0), 1.0);
        assert_eq!(containment_fraction(&[c(50.0, 0.0); 10], &r, 0.1), 0.0);
        let mixed = [c(0.0, 0.0), c(0.5, 0.1), c(3.0, 0.0), c(0.0, -4.0)];
        assert_eq!(containment_fraction(&mixed, &r, 0.0), 0.5);
    }

    #[test]
    fn pushforward_identity_and_scaling() {
        let f = |z: Complex<f64>| z.norm();
        let w = Window::square(c(0.0, 0.0), 2.0).unwrap();
        let r = sigma_region(&f, 1.0, w, 0.1, &RegionOptions::new(10.0)).unwrap();
        let cloud = PointCloud::uniform(vec![c(0.0, 0.0)]).unwrap();
        let same = pushforward_region(&r, &cloud, c(0.0, 0.0)).unwrap();
        for (p, q) in r.boundary.iter().flatten().zip(same.boundary.iter().flatten()) {
            assert!((p - q).norm() <= 1e-12);
        }
        let zeta = c(0.6, -0.8);
        let mapped = pushforward_region(&r, &cloud, zeta).unwrap();
        let factor = (zeta * -0.5).exp();
        for (p, q) in r.boundary.iter().flatten().zip(mapped.boundary.iter().flatten()) {
            assert!((p * factor - q).norm() <= 1e-12);
        }
        assert!(mapped.flagged.iter().flatten().all(|f| !f));
        assert!(!mapped.mapped_interior.is_empty());
    }

    #[test]
    fn pushforward_flags_undefined_vertices() {
        let f = |z: Complex<f64>| z.norm();
        let w = Window::square(c(0.0, 0.0), 2.0).unwrap();
        let r = sigma_region(&f, 1.0, w, 0.1, &RegionOptions::new(10.0)).unwrap();
        // single cloud point on the boundary: ε = 0, so only that vertex is hit
        let v = r.boundary[0][3];
        let cloud = PointCloud::uniform(vec![v]).unwrap();
        let mapped = pushforward_region(&r, &cloud, c(0.5, 0.0)).unwrap();
        assert!(mapped.flagged[0][3]);
        assert_eq!(mapped.flagged.iter().flatten().filter(|f| **f).count(), 1 + usize::from(r.boundary[0][0] == v));
    }
}

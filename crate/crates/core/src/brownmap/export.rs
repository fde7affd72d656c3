//! Region export: boundary polylines as CSV and membership lattices as raw
//! row-major bytes with a JSON header.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::region::{Region, Window};
use crate::scalar::{c, Real};

/// Boundary CSV with columns `component_id,vertex_index,re,im`.
pub fn boundary_csv<T: Real>(region: &Region<T>) -> String {
    let mut out = String::from("component_id,vertex_index,re,im\n");
    for (cid, poly) in region.boundary.iter().enumerate() {
        for (k, p) in poly.iter().enumerate() {
            writeln!(out, "{cid},{k},{},{}", p.re, p.im).expect("write to string");
        }
    }
    out
}

/// Header describing a membership lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipHeader {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub resolution: f64,
    pub nx: usize,
    pub ny: usize,
    pub level: f64,
    pub layout: String,
}

/// Row-major membership lattice (`1` inside, `0` outside); row `j` holds
/// imaginary part `im_min + j·resolution`.
#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    pub header: MembershipHeader,
    pub cells: Vec<u8>,
}

impl Membership {
    pub fn header_json(&self) -> String {
        serde_json::to_string_pretty(&self.header).expect("header serializes")
    }
}

/// Membership lattice of `region`. Regions carrying a `T` lattice use it
/// directly; push-forward images are rasterized with spacing `h` over the
/// bounding box of their boundary.
pub fn membership<T: Real>(region: &Region<T>, h: T) -> Membership {
    if let Some(g) = &region.grid {
        let cells = g.values.iter().map(|v| u8::from(*v < region.level)).collect();
        let x1 = g.x0 + T::from_count(g.nx - 1) * g.h;
        let y1 = g.y0 + T::from_count(g.ny - 1) * g.h;
        return Membership {
            header: header(g.x0, x1, g.y0, y1, g.h, g.nx, g.ny, region.level),
            cells,
        };
    }
    let Some(Window { re_min, re_max, im_min, im_max }) = region.bounds() else {
        return Membership { header: header(T::zero(), T::zero(), T::zero(), T::zero(), h, 0, 0, region.level), cells: Vec::new() };
    };
    let nx = ((re_max - re_min) / h).ceil().to_usize().unwrap_or(0) + 1;
    let ny = ((im_max - im_min) / h).ceil().to_usize().unwrap_or(0) + 1;
    let mut cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let p = c(re_min + T::from_count(i) * h, im_min + T::from_count(j) * h);
            cells.push(u8::from(region.contains(p)));
        }
    }
    let x1 = re_min + T::from_count(nx - 1) * h;
    let y1 = im_min + T::from_count(ny - 1) * h;
    Membership { header: header(re_min, x1, im_min, y1, h, nx, ny, region.level), cells }
}

#[allow(clippy::too_many_arguments)]
fn header<T: Real>(x0: T, x1: T, y0: T, y1: T, h: T, nx: usize, ny: usize, level: T) -> MembershipHeader {
    MembershipHeader {
        re_min: x0.to_f64_lossy(),
        re_max: x1.to_f64_lossy(),
        im_min: y0.to_f64_lossy(),
        im_max: y1.to_f64_lossy(),
        resolution: h.to_f64_lossy(),
        nx,
        ny,
        level: level.to_f64_lossy(),
        layout: "row-major u8, rows by increasing imaginary part".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::super::region::{sigma_region, RegionOptions};
    use super::*;
    use num_complex::Complex;

    fn disk() -> Region<f64> {
        let f = |z: Complex<f64>| z.norm();
        let w = Window::square(c(0.0, 0.0), 2.0).unwrap();
        sigma_region(&f, 1.0, w, 0.1, &RegionOptions::new(10.0)).unwrap()
    }

    #[test]
    fn csv_round_trips_vertices() {
        let r = disk();
        let csv = boundary_csv(&r);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("component_id,vertex_index,re,im"));
        for (line, p) in lines.zip(r.boundary.iter().flatten()) {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f[2].parse::<f64>().unwrap().to_bits(), p.re.to_bits());
            assert_eq!(f[3].parse::<f64>().unwrap().to_bits(), p.im.to_bits());
        }
    }

    #[test]
    fn membership_from_grid() {
        let r = disk();
        let m = membership(&r, 0.1);
        assert_eq!(m.cells.len(), m.header.nx * m.header.ny);
        let g = r.grid.as_ref().unwrap();
        let center = (g.ny / 2) * g.nx + g.nx / 2;
        assert_eq!(m.cells[center], 1);
        assert_eq!(m.cells[0], 0);
        let parsed: MembershipHeader = serde_json::from_str(&m.header_json()).unwrap();
        assert_eq!(parsed, m.header);
    }

    #[test]
    fn membership_rasterizes_images() {
        let mut r = disk();
        r.grid = None;
        let m = membership(&r, 0.05);
        let inside = m.cells.iter().filter(|x| **x == 1).count() as f64 * 0.05 * 0.05;
        assert!((inside - std::f64::consts::PI).abs() < 0.2, "{inside}");
    }
}

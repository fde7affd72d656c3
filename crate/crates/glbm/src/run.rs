//! Experiment execution.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use glbm_core::brownmap::export::{boundary_csv, membership};
use glbm_core::brownmap::{
    containment_fraction, psi_zeta_for_flow, pushforward_region, sigma_region, t_general, t_unitary, PointCloud, Region, RegionOptions,
    Window,
};
use glbm_core::glflow::{
    affine_deviation, inversion_defect, make_initial, refine_gap, sample_increments, second_moment_exact,
    simulate_endpoint, simulate_forward_inverse, CoupledIncrements, InitialCondition,
};
use glbm_core::montecarlo::parallel_mc;
use glbm_core::ncpoly::{sd_check, NCPoly};
use glbm_core::params::{EllipticParams, SimConfig, TimeGrid};
use glbm_core::sampling::sample_ginibre;
use glbm_core::spectral::{eigenvalues, singular_values};
use glbm_core::stats::{ls_slope, median, MeanSe};
use glbm_core::{Complex, ComplexMatrix, RngStream, C64};

use crate::config::{BoundarySpec, Experiment, ExperimentSpec, FlowSpec, Resolved, SpectralInput};
use crate::error::HarnessError;
use crate::output::{
    eigenvalues_csv, matrices_csv, report_csv, singular_values_csv, svg_plot, FailureRecord, OutputDir, PhaseRecord,
    ReportRow, RunManifest,
};

/// Mutable state of one run.
struct Ctx {
    seed: u64,
    workers: usize,
    svg: bool,
    out: OutputDir,
    phases: Vec<PhaseRecord>,
    failures: Vec<FailureRecord>,
    timings: BTreeMap<String, f64>,
}

impl Ctx {
    /// Seed of the `j`-th Monte Carlo phase.
    fn phase_seed(&self, j: usize) -> u64 {
        self.seed.wrapping_add((j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }

    /// Runs one phase of `trials` trials; failed trials are recorded and the
    /// survivors returned with their indices.
    fn phase<R, F>(&mut self, name: &str, trials: usize, f: F) -> Result<Vec<(usize, R)>, HarnessError>
    where
        R: Send,
        F: Fn(usize, &mut RngStream) -> glbm_core::Result<R> + Sync + Send,
    {
        let seed = self.phase_seed(self.phases.len());
        self.phases.push(PhaseRecord { name: name.to_string(), seed, trials });
        let start = Instant::now();
        let results = parallel_mc(seed, trials, self.workers, f)?;
        self.timings.insert(name.to_string(), start.elapsed().as_secs_f64() * 1e3);
        let mut ok = Vec::with_capacity(trials);
        let mut failed = 0;
        for (i, r) in results.into_iter().enumerate() {
            match r {
                Ok(v) => ok.push((i, v)),
                Err(e) => {
                    failed += 1;
                    self.failures.push(FailureRecord { phase: name.to_string(), trial: i, error: e.to_string() });
                }
            }
        }
        if failed * 10 > trials {
            return Err(HarnessError::NumericalFailure { phase: name.to_string(), failed, total: trials });
        }
        Ok(ok)
    }

    fn write(&mut self, name: &str, content: &str) -> Result<(), HarnessError> {
        self.out.write(name, content.as_bytes())
    }

    fn plot(&mut self, name: &str, points: &[C64], curves: &[Vec<C64>]) -> Result<(), HarnessError> {
        if self.svg {
            self.write(name, &svg_plot(points, curves))?;
        }
        Ok(())
    }
}

fn flow_config(flow: &FlowSpec, seed: u64) -> glbm_core::Result<SimConfig<f64>> {
    SimConfig::new(flow.n, flow.params, TimeGrid::new(flow.t, flow.steps)?, seed, 1)
}

/// `B₀·B(t)` for one trial.
fn sample_flow(flow: &FlowSpec, init: &InitialCondition<f64>, rng: &mut RngStream) -> glbm_core::Result<ComplexMatrix> {
    let b0 = make_initial(init, flow.n, rng)?.matrix;
    simulate_endpoint(&flow_config(flow, rng.seed())?, &b0, rng)
}

/// Executes `resolved`, writing artifacts and `manifest.json` under `out`.
/// The manifest is written even when the run aborts on trial failures.
pub fn run(spec: &ExperimentSpec, resolved: &Resolved, out: &Path, workers: usize) -> Result<RunManifest, HarnessError> {
    let mut ctx = Ctx {
        seed: resolved.seed,
        workers,
        svg: resolved.svg,
        out: OutputDir::create(out)?,
        phases: Vec::new(),
        failures: Vec::new(),
        timings: BTreeMap::new(),
    };
    let start = Instant::now();
    let result = execute(&mut ctx, &resolved.experiment);
    ctx.timings.insert("total".into(), start.elapsed().as_secs_f64() * 1e3);
    let status = match &result {
        Ok(()) => "ok".to_string(),
        Err(e) => format!("aborted: {e}"),
    };
    let mut versions = BTreeMap::new();
    versions.insert("glbm".to_string(), env!("CARGO_PKG_VERSION").to_string());
    versions.insert("manifest-format".to_string(), "1".to_string());
    let manifest = RunManifest {
        kind: resolved.kind.to_string(),
        spec: spec.clone(),
        seed: resolved.seed,
        workers,
        status,
        phases: ctx.phases.clone(),
        failures: ctx.failures.clone(),
        timings_ms: ctx.timings.clone(),
        versions,
        files: ctx.out.files().to_vec(),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    let path = ctx.out.root().join("manifest.json");
    std::fs::write(&path, text).map_err(|source| HarnessError::Io { path: path.display().to_string(), source })?;
    result.map(|()| manifest)
}

fn execute(ctx: &mut Ctx, exp: &Experiment) -> Result<(), HarnessError> {
    match exp {
        Experiment::Simulate { flow, trials, init } => {
            let cond = init.to_condition()?;
            let mats = ctx.phase("simulate", *trials, |_, rng| sample_flow(flow, &cond, rng))?;
            ctx.write("endpoint.csv", &matrices_csv(&mats))
        }
        Experiment::Spectrum { flow, trials, init, z } => {
            let cond = init.to_condition()?;
            let rows = ctx.phase("spectrum", *trials, |_, rng| {
                let b = sample_flow(flow, &cond, rng)?;
                let eig = eigenvalues(&b)?.eigenvalues;
                let sv = z.iter().map(|zz| singular_values(&b, *zz).map(|s| (*zz, s.values))).collect::<Result<Vec<_>, _>>()?;
                Ok((eig, sv))
            })?;
            let eig: Vec<(usize, Vec<C64>)> = rows.iter().map(|(i, (e, _))| (*i, e.clone())).collect();
            ctx.write("eigenvalues.csv", &eigenvalues_csv(&eig))?;
            if !z.is_empty() {
                let sv: Vec<(usize, C64, Vec<f64>)> =
                    rows.iter().flat_map(|(i, (_, s))| s.iter().map(move |(zz, v)| (*i, *zz, v.clone()))).collect();
                ctx.write("singular_values.csv", &singular_values_csv(&sv))?;
            }
            let pts: Vec<C64> = eig.into_iter().flat_map(|(_, e)| e).collect();
            ctx.plot("eigenvalues.svg", &pts, &[])
        }
        Experiment::Boundary(b) | Experiment::Figure(b) => support(ctx, b),
        Experiment::Moments { n, params, t, level, trials, init } => {
            let dt = 0.5f64.powi(*level as i32);
            let k = (t / dt).floor() as usize;
            if k == 0 {
                return Err(HarnessError::Validation(format!("t·2^level must be at least 1, got {}", t / dt)));
            }
            let cond = init.to_condition()?;
            let flow = FlowSpec { n: *n, params: *params, t: k as f64 * dt, steps: k };
            let ratios = ctx.phase("moments", *trials, |_, rng| {
                let b0 = make_initial(&cond, flow.n, rng)?.matrix;
                let b = simulate_endpoint(&flow_config(&flow, rng.seed())?, &b0, rng)?;
                Ok(b.ts_gram() / b0.ts_gram())
            })?;
            let values: Vec<f64> = ratios.into_iter().map(|(_, v)| v).collect();
            let ms = MeanSe::from_slice(&values);
            let exact = second_moment_exact(params, dt, k);
            let z = ms.z_score(exact);
            ctx.write(
                "report.csv",
                &report_csv(&[
                    ReportRow::check("mean_ts_gram", ms.mean, exact, 4.0 * ms.se, z.abs() <= 4.0),
                    ReportRow::info("standard_error", ms.se),
                    ReportRow::check("z_score", z, 0.0, 4.0, z.abs() <= 4.0),
                    ReportRow::info("steps", k as f64),
                ]),
            )
        }
        Experiment::Refinement { n, params, t, levels, trials } => {
            let finest = *levels.iter().max().expect("levels validated nonempty");
            let gaps = ctx.phase("refinement", *trials, |_, rng| {
                let coupled = CoupledIncrements::sample(params, *t, finest, *n, rng)?;
                levels.iter().map(|l| refine_gap(&coupled, params, *l)).collect::<glbm_core::Result<Vec<f64>>>()
            })?;
            let mut rows = Vec::new();
            let mut logs = Vec::new();
            for (j, l) in levels.iter().enumerate() {
                let ms: f64 = gaps.iter().map(|(_, g)| g[j] * g[j]).sum::<f64>() / gaps.len() as f64;
                rows.push(ReportRow::info(format!("rms_gap_level_{l}"), ms.sqrt()));
                logs.push(ms.sqrt().log2());
            }
            let xs: Vec<f64> = levels.iter().map(|l| *l as f64).collect();
            let slope = ls_slope(&xs, &logs);
            rows.push(ReportRow::check("log2_slope", slope, -0.5, 0.15, (slope + 0.5).abs() <= 0.15));
            ctx.write("report.csv", &report_csv(&rows))
        }
        Experiment::Affine { n, params, steps, times, trials } => {
            let init = InitialCondition::identity();
            let mut rows = Vec::new();
            let mut medians = Vec::new();
            for t in times {
                let dt = t / *steps as f64;
                let devs = ctx.phase(&format!("affine_t{t}"), *trials, |_, rng| {
                    let incs = sample_increments(params, dt, *steps, *n, rng)?;
                    affine_deviation(&init, &incs, params, dt)
                })?;
                let m = median(&devs.into_iter().map(|(_, v)| v).collect::<Vec<_>>());
                rows.push(ReportRow::info(format!("median_deviation_t{t}"), m));
                medians.push(m);
            }
            if times.len() >= 2 {
                let lx: Vec<f64> = times.iter().map(|t| t.ln()).collect();
                let ly: Vec<f64> = medians.iter().map(|m| m.ln()).collect();
                let slope = ls_slope(&lx, &ly);
                rows.push(ReportRow::check("loglog_slope", slope, 1.0, 0.2, (slope - 1.0).abs() <= 0.2));
                let mono = medians.windows(2).all(|w| w[1] > w[0]);
                rows.push(ReportRow::check("monotone", f64::from(u8::from(mono)), 1.0, 0.0, mono));
            }
            ctx.write("report.csv", &report_csv(&rows))
        }
        Experiment::Inverse { n, params, t, ks, trials } => {
            let mut rows = Vec::new();
            let mut medians = Vec::new();
            for k in ks {
                let flow = FlowSpec { n: *n, params: *params, t: *t, steps: *k };
                let defects = ctx.phase(&format!("inverse_k{k}"), *trials, |_, rng| {
                    let (b, cm) = simulate_forward_inverse(&flow_config(&flow, rng.seed())?, rng)?;
                    inversion_defect(&b, &cm)
                })?;
                let m = median(&defects.into_iter().map(|(_, v)| v).collect::<Vec<_>>());
                rows.push(ReportRow::info(format!("median_defect_k{k}"), m));
                medians.push(m);
            }
            let dec = medians.windows(2).all(|w| w[1] < w[0]);
            rows.push(ReportRow::check("strictly_decreasing", f64::from(u8::from(dec)), 1.0, 0.0, dec));
            ctx.write("report.csv", &report_csv(&rows))
        }
        Experiment::Ssv { n, trials, deltas, shift } => {
            let smin = ctx.phase("ssv", *trials, |_, rng| {
                let g = sample_ginibre::<f64>(*n, 1.0, rng)?;
                Ok(singular_values(&g, -*shift)?.min())
            })?;
            let m = smin.len() as f64;
            let mut rows = Vec::new();
            for d in deltas {
                let p = smin.iter().filter(|(_, s)| s <= d).count() as f64 / m;
                let bound = (*n * *n) as f64 * d * d;
                let se = (bound * (1.0 - bound).max(0.0) / m).sqrt();
                rows.push(ReportRow::check(format!("prob_below_{d}"), p, bound, 4.0 * se, p <= bound + 4.0 * se));
            }
            ctx.write("report.csv", &report_csv(&rows))
        }
        Experiment::Wegner { flow, trials, z, eta } => {
            let per = ctx.phase("wegner", *trials, |_, rng| {
                let b = sample_flow(flow, &InitialCondition::identity(), rng)?;
                let mut row = Vec::with_capacity(z.len() * eta.len());
                for zz in z {
                    let sv = singular_values(&b, *zz)?;
                    for e in eta {
                        row.push(sv.wegner(*e)?);
                    }
                }
                Ok(row)
            })?;
            let mut rows = Vec::new();
            let lo = eta.iter().cloned().fold(f64::INFINITY, f64::min);
            for (a, zz) in z.iter().enumerate() {
                let mut decade = Vec::new();
                for (b, e) in eta.iter().enumerate() {
                    let mean = per.iter().map(|(_, r)| r[a * eta.len() + b]).sum::<f64>() / per.len() as f64;
                    rows.push(ReportRow::check(format!("mean_z{}{:+}i_eta{e}", zz.re, zz.im), mean, 0.0, 20.0, mean.abs() <= 20.0));
                    if *e <= 10.0 * lo {
                        decade.push(mean.abs());
                    }
                }
                let ratio = decade.iter().cloned().fold(0.0, f64::max) / decade.iter().cloned().fold(f64::INFINITY, f64::min);
                rows.push(ReportRow::check(format!("plateau_ratio_z{}{:+}i", zz.re, zz.im), ratio, 1.0, 1.0, ratio <= 2.0));
            }
            ctx.write("report.csv", &report_csv(&rows))
        }
        Experiment::LogTail { flow, trials, z, tail_level, threshold } => {
            let per = ctx.phase("logtail", *trials, |_, rng| {
                let b = sample_flow(flow, &InitialCondition::identity(), rng)?;
                z.iter().map(|zz| Ok(singular_values(&b, *zz)?.log_tail_mass(*tail_level))).collect::<glbm_core::Result<Vec<f64>>>()
            })?;
            let mut rows = Vec::new();
            for (a, zz) in z.iter().enumerate() {
                let vals: Vec<f64> = per.iter().map(|(_, r)| r[a]).collect();
                let frac = vals.iter().filter(|v| **v < *threshold).count() as f64 / vals.len() as f64;
                let worst = vals.iter().cloned().fold(0.0, f64::max);
                rows.push(ReportRow::check(format!("fraction_below_z{}{:+}i", zz.re, zz.im), frac, 0.95, 0.0, frac >= 0.95));
                rows.push(ReportRow::info(format!("max_tail_z{}{:+}i", zz.re, zz.im), worst));
            }
            ctx.write("report.csv", &report_csv(&rows))
        }
        Experiment::SdCheck { n, trials, polynomial, index } => {
            let q = NCPoly::<f64>::from_str(polynomial)?;
            let seed = ctx.phase_seed(ctx.phases.len());
            ctx.phases.push(PhaseRecord { name: "sd-check".into(), seed, trials: *trials });
            let r = sd_check(&q, *index, *n, *trials, seed, ctx.workers)?;
            let se = r.combined_se();
            let gap = (r.lhs.mean - r.rhs.mean).norm();
            ctx.write(
                "report.csv",
                &report_csv(&[
                    ReportRow::info("lhs_re", r.lhs.mean.re),
                    ReportRow::info("lhs_im", r.lhs.mean.im),
                    ReportRow::info("lhs_se", r.lhs.se),
                    ReportRow::info("rhs_re", r.rhs.mean.re),
                    ReportRow::info("rhs_im", r.rhs.mean.im),
                    ReportRow::info("rhs_se", r.rhs.se),
                    ReportRow::check("abs_difference", gap, 0.0, 4.0 * se, gap <= 4.0 * se),
                ]),
            )
        }
    }
}

fn region_for(b: &BoundarySpec) -> Result<Region<f64>, HarnessError> {
    let (f, radius): (Box<dyn Fn(C64) -> f64 + Sync>, f64) = match b.init.spectral_data()? {
        SpectralInput::Unitary(mu) => (Box::new(move |z| t_unitary(&mu, z)), 1.0),
        SpectralInput::General(data) => {
            data.validate()?;
            let r = data.radius();
            (Box::new(move |z| t_general(&data, z)), r)
        }
    };
    let window = match b.window {
        Some(w) => Window::new(w.re_min, w.re_max, w.im_min, w.im_max)?,
        None => Window::square(Complex::new(0.0, 0.0), radius + 1.0)?,
    };
    Ok(sigma_region(&*f, b.t, window, b.resolution, &RegionOptions::for_flow(radius, b.t))?)
}

/// Support region `Σ(b₀, t, ζ)` plus, for figures, a matching eigenvalue
/// sample. Stream 0 drives the `(t, ζ)` sample and stream 1 the `ζ = 0`
/// cloud used by the push-forward.
fn support(ctx: &mut Ctx, b: &BoundarySpec) -> Result<(), HarnessError> {
    let zero = Complex::new(0.0, 0.0);
    let start = Instant::now();
    let base = region_for(b)?;
    ctx.timings.insert("region".into(), start.elapsed().as_secs_f64() * 1e3);

    let cond = b.init.to_condition()?;
    let need_cloud = b.zeta != zero;
    let sample_ids: Vec<usize> = match (b.with_eigenvalues, need_cloud) {
        (true, true) => vec![0, 1],
        (true, false) => vec![0],
        (false, true) => vec![1],
        (false, false) => vec![],
    };
    let mut sample = None;
    let mut cloud = None;
    if !sample_ids.is_empty() {
        let flows = [
            FlowSpec { n: b.n, params: EllipticParams::new(b.t, b.zeta)?, t: 1.0, steps: b.steps },
            FlowSpec { n: b.n, params: EllipticParams::new(b.t, zero)?, t: 1.0, steps: b.steps },
        ];
        let out = ctx.phase("support-samples", 2, |i, rng| {
            if !sample_ids.contains(&i) {
                return Ok(Vec::new());
            }
            let m = sample_flow(&flows[i], &cond, rng)?;
            Ok(eigenvalues(&m)?.eigenvalues)
        })?;
        for (i, eig) in out {
            if i == 0 && b.with_eigenvalues {
                sample = Some(eig);
            } else if i == 1 && need_cloud {
                cloud = Some(eig);
            }
        }
        if (b.with_eigenvalues && sample.is_none()) || (need_cloud && cloud.is_none()) {
            return Err(HarnessError::NumericalFailure { phase: "support-samples".into(), failed: 1, total: 2 });
        }
    }

    let region = match &cloud {
        Some(c) => {
            let start = Instant::now();
            let r = pushforward_region(&base, &PointCloud::uniform(c.clone())?, psi_zeta_for_flow(b.zeta))?;
            ctx.timings.insert("pushforward".into(), start.elapsed().as_secs_f64() * 1e3);
            ctx.write("base_boundary.csv", &boundary_csv(&base))?;
            ctx.write("cloud_eigenvalues.csv", &eigenvalues_csv(&[(1, c.clone())]))?;
            r
        }
        None => base,
    };
    ctx.write("boundary.csv", &boundary_csv(&region))?;
    let mem = membership(&region, b.resolution);
    ctx.out.write("membership.bin", &mem.cells)?;
    ctx.write("membership.json", &mem.header_json())?;

    let mut rows = vec![
        ReportRow::info("boundary_curves", region.component_count as f64),
        ReportRow::info("boundary_vertices", region.vertex_count() as f64),
        ReportRow::info("flagged_vertices", region.flagged.iter().flatten().filter(|f| **f).count() as f64),
    ];
    let pts = sample.unwrap_or_default();
    if !pts.is_empty() {
        ctx.write("eigenvalues.csv", &eigenvalues_csv(&[(0, pts.clone())]))?;
        let frac = containment_fraction(&pts, &region, 0.05);
        rows.push(ReportRow::check("containment_margin_0.05", frac, 0.95, 0.0, frac >= 0.95));
    }
    ctx.write("report.csv", &report_csv(&rows))?;
    ctx.plot(&format!("{}.svg", b.name), &pts, &region.boundary)
}

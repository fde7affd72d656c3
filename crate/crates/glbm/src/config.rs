//! Experiment configuration: JSON schema, defaults, and validation.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use glbm_core::brownmap::{CircleMeasure, InitialSpectralData};
use glbm_core::glflow::{eight_atom_example, jordan_like_block, InitialCondition, InitialKind};
use glbm_core::params::EllipticParams;
use glbm_core::{Complex, C64};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;
use crate::presets;

/// Experiment kinds accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Simulate,
    Spectrum,
    Boundary,
    Figure,
    VerifyMoments,
    VerifyRefinement,
    VerifyAffine,
    VerifyInverse,
    VerifySsv,
    VerifyWegner,
    VerifyLogtail,
    SdCheck,
}

impl Kind {
    pub const ALL: [Kind; 12] = [
        Kind::Simulate,
        Kind::Spectrum,
        Kind::Boundary,
        Kind::Figure,
        Kind::VerifyMoments,
        Kind::VerifyRefinement,
        Kind::VerifyAffine,
        Kind::VerifyInverse,
        Kind::VerifySsv,
        Kind::VerifyWegner,
        Kind::VerifyLogtail,
        Kind::SdCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Simulate => "simulate",
            Kind::Spectrum => "spectrum",
            Kind::Boundary => "boundary",
            Kind::Figure => "figure",
            Kind::VerifyMoments => "verify-moments",
            Kind::VerifyRefinement => "verify-refinement",
            Kind::VerifyAffine => "verify-affine",
            Kind::VerifyInverse => "verify-inverse",
            Kind::VerifySsv => "verify-ssv",
            Kind::VerifyWegner => "verify-wegner",
            Kind::VerifyLogtail => "verify-logtail",
            Kind::SdCheck => "sd-check",
        }
    }

    /// Config keys meaningful for this kind.
    fn allowed_keys(self) -> Vec<&'static str> {
        const COMMON: [&str; 4] = ["kind", "seed", "output", "svg"];
        let own: &[&'static str] = match self {
            Kind::Simulate => &["n", "rho", "zeta", "t", "steps", "trials", "init"],
            Kind::Spectrum => &["n", "rho", "zeta", "t", "steps", "trials", "init", "z"],
            Kind::Boundary => &["n", "steps", "t", "zeta", "init", "window", "resolution"],
            Kind::Figure => &["preset", "n", "steps", "resolution"],
            Kind::VerifyMoments => &["n", "rho", "zeta", "t", "level", "trials", "init"],
            Kind::VerifyRefinement => &["n", "rho", "zeta", "t", "levels", "trials"],
            Kind::VerifyAffine => &["n", "rho", "zeta", "steps", "times", "trials"],
            Kind::VerifyInverse => &["n", "rho", "zeta", "t", "ks", "trials"],
            Kind::VerifySsv => &["n", "trials", "deltas", "shift"],
            Kind::VerifyWegner => &["n", "rho", "zeta", "t", "steps", "trials", "z", "eta"],
            Kind::VerifyLogtail => &["n", "rho", "zeta", "t", "steps", "trials", "z", "tail_level", "threshold"],
            Kind::SdCheck => &["n", "trials", "polynomial", "index"],
        };
        COMMON.iter().chain(own).copied().collect()
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| HarnessError::Validation(format!("unknown experiment kind {s:?}")))
    }
}

/// Initial condition as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    Identity {
        #[serde(default)]
        conjugate: bool,
    },
    RootsOfUnity {
        k: usize,
        #[serde(default)]
        conjugate: bool,
    },
    /// Atoms `{"value": [re, im], "weight": "1/8"}`.
    AtomicNormal {
        atoms: Vec<AtomSpec>,
        #[serde(default)]
        conjugate: bool,
    },
    /// 2×2 block `[[[re, im], [re, im]], [[re, im], [re, im]]]`.
    NonNormalBlock {
        block: [[[f64; 2]; 2]; 2],
        #[serde(default)]
        conjugate: bool,
    },
    EightAtom {
        #[serde(default)]
        conjugate: bool,
    },
    JordanBlock {
        #[serde(default)]
        conjugate: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub value: [f64; 2],
    pub weight: String,
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec::Identity { conjugate: false }
    }
}

fn cx(v: [f64; 2]) -> C64 {
    Complex::new(v[0], v[1])
}

impl InitSpec {
    fn conjugate(&self) -> bool {
        match self {
            InitSpec::Identity { conjugate }
            | InitSpec::RootsOfUnity { conjugate, .. }
            | InitSpec::AtomicNormal { conjugate, .. }
            | InitSpec::NonNormalBlock { conjugate, .. }
            | InitSpec::EightAtom { conjugate }
            | InitSpec::JordanBlock { conjugate } => *conjugate,
        }
    }

    pub fn to_condition(&self) -> Result<InitialCondition<f64>, HarnessError> {
        let kind = match self {
            InitSpec::Identity { .. } => InitialKind::Identity,
            InitSpec::RootsOfUnity { k, .. } => InitialKind::RootsOfUnity(*k),
            InitSpec::AtomicNormal { atoms, .. } => {
                let parsed = atoms
                    .iter()
                    .map(|a| {
                        Ratio::<u64>::from_str(a.weight.trim())
                            .map(|w| (cx(a.value), w))
                            .map_err(|_| HarnessError::Validation(format!("bad atom weight {:?}", a.weight)))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                InitialKind::AtomicNormal(parsed)
            }
            InitSpec::NonNormalBlock { block, .. } => InitialKind::NonNormalBlock([
                [cx(block[0][0]), cx(block[0][1])],
                [cx(block[1][0]), cx(block[1][1])],
            ]),
            InitSpec::EightAtom { .. } => eight_atom_example(),
            InitSpec::JordanBlock { .. } => jordan_like_block(),
        };
        Ok(InitialCondition::new(kind).with_conjugation(self.conjugate()))
    }

    /// Limiting spectral data of the initial condition.
    pub fn spectral_data(&self) -> Result<SpectralInput, HarnessError> {
        let cond = self.to_condition()?;
        Ok(match cond.kind {
            InitialKind::Identity => SpectralInput::Unitary(CircleMeasure::point_mass_at_one()),
            InitialKind::RootsOfUnity(k) => SpectralInput::Unitary(CircleMeasure::roots_of_unity(k)?),
            InitialKind::AtomicNormal(atoms) => SpectralInput::General(InitialSpectralData::AtomicComplex(
                atoms.into_iter().map(|(l, w)| (l, *w.numer() as f64 / *w.denom() as f64)).collect(),
            )),
            InitialKind::NonNormalBlock(b) => SpectralInput::General(InitialSpectralData::MatrixData(
                glbm_core::Matrix::from_rows(&[b[0].to_vec(), b[1].to_vec()])?,
            )),
            InitialKind::ExplicitMatrix(m) => SpectralInput::General(InitialSpectralData::MatrixData(m)),
        })
    }
}

/// Input to the support-region formulas.
#[derive(Debug, Clone)]
pub enum SpectralInput {
    Unitary(CircleMeasure<f64>),
    General(InitialSpectralData<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

/// Raw configuration file. Every field is optional; defaults depend on the
/// experiment kind.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<InitSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_level: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polynomial: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<bool>,
}

impl ExperimentSpec {
    /// Parses a JSON config, rejecting unknown keys.
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Validation(format!("config: {e}")))
    }

    /// Checks that every key present is meaningful for `kind` and that the
    /// optional `kind` field agrees with it.
    pub fn check_keys(&self, kind: Kind) -> Result<(), HarnessError> {
        if let Some(k) = self.kind {
            if k != kind {
                return Err(HarnessError::Validation(format!("config is for {k}, command is {kind}")));
            }
        }
        let value = serde_json::to_value(self).map_err(|e| HarnessError::Validation(e.to_string()))?;
        let allowed: BTreeSet<&str> = kind.allowed_keys().into_iter().collect();
        if let Some(map) = value.as_object() {
            let stray: Vec<&String> = map.keys().filter(|k| !allowed.contains(k.as_str())).collect();
            if !stray.is_empty() {
                return Err(HarnessError::Validation(format!("keys {stray:?} are not used by {kind}")));
            }
        }
        Ok(())
    }
}

fn invalid(msg: impl Into<String>) -> HarnessError {
    HarnessError::Validation(msg.into())
}

fn positive(name: &str, v: f64) -> Result<f64, HarnessError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

fn at_least(name: &str, v: usize, min: usize) -> Result<usize, HarnessError> {
    if v >= min {
        Ok(v)
    } else {
        Err(invalid(format!("{name} must be at least {min}, got {v}")))
    }
}

fn nonempty<T: Clone>(name: &str, v: &[T]) -> Result<Vec<T>, HarnessError> {
    if v.is_empty() {
        Err(invalid(format!("{name} must not be empty")))
    } else {
        Ok(v.to_vec())
    }
}

/// Flow parameters shared by simulation kinds.
#[derive(Debug, Clone, Copy)]
pub struct FlowSpec {
    pub n: usize,
    pub params: EllipticParams<f64>,
    pub t: f64,
    pub steps: usize,
}

/// Fully validated experiment with defaults filled in.
#[derive(Debug, Clone)]
pub enum Experiment {
    Simulate { flow: FlowSpec, trials: usize, init: InitSpec },
    Spectrum { flow: FlowSpec, trials: usize, init: InitSpec, z: Vec<C64> },
    Boundary(BoundarySpec),
    Figure(BoundarySpec),
    Moments { n: usize, params: EllipticParams<f64>, t: f64, level: u32, trials: usize, init: InitSpec },
    Refinement { n: usize, params: EllipticParams<f64>, t: f64, levels: Vec<usize>, trials: usize },
    Affine { n: usize, params: EllipticParams<f64>, steps: usize, times: Vec<f64>, trials: usize },
    Inverse { n: usize, params: EllipticParams<f64>, t: f64, ks: Vec<usize>, trials: usize },
    Ssv { n: usize, trials: usize, deltas: Vec<f64>, shift: C64 },
    Wegner { flow: FlowSpec, trials: usize, z: Vec<C64>, eta: Vec<f64> },
    LogTail { flow: FlowSpec, trials: usize, z: Vec<C64>, tail_level: f64, threshold: f64 },
    SdCheck { n: usize, trials: usize, polynomial: String, index: usize },
}

/// Support region (and matching simulation) for `boundary` and `figure`.
#[derive(Debug, Clone)]
pub struct BoundarySpec {
    pub name: String,
    pub n: usize,
    pub steps: usize,
    pub t: f64,
    pub zeta: C64,
    pub init: InitSpec,
    pub window: Option<WindowSpec>,
    pub resolution: f64,
    /// Whether eigenvalues of a simulated sample are emitted.
    pub with_eigenvalues: bool,
}

/// Resolved run settings.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub kind: Kind,
    pub seed: u64,
    pub svg: bool,
    pub experiment: Experiment,
}

impl Resolved {
    /// Number of Monte Carlo trials (one stream per trial).
    pub fn trials(&self) -> usize {
        match &self.experiment {
            Experiment::Simulate { trials, .. }
            | Experiment::Spectrum { trials, .. }
            | Experiment::Moments { trials, .. }
            | Experiment::Refinement { trials, .. }
            | Experiment::Affine { trials, .. }
            | Experiment::Inverse { trials, .. }
            | Experiment::Ssv { trials, .. }
            | Experiment::Wegner { trials, .. }
            | Experiment::LogTail { trials, .. }
            | Experiment::SdCheck { trials, .. } => *trials,
            Experiment::Boundary(b) | Experiment::Figure(b) => {
                if b.zeta == Complex::new(0.0, 0.0) {
                    1
                } else {
                    2
                }
            }
        }
    }
}

fn elliptic(rho: f64, zeta: [f64; 2]) -> Result<EllipticParams<f64>, HarnessError> {
    positive("rho", rho)?;
    EllipticParams::new(rho, cx(zeta)).map_err(|e| invalid(e.to_string()))
}

impl ExperimentSpec {
    /// Validates and fills defaults. No computation happens before this
    /// succeeds.
    pub fn resolve(&self, kind: Kind) -> Result<Resolved, HarnessError> {
        self.check_keys(kind)?;
        let seed = self.seed.unwrap_or(0);
        let svg = self.svg.unwrap_or(true);
        let rho = self.rho.unwrap_or(1.0);
        let zeta = self.zeta.unwrap_or([0.0, 0.0]);
        let flow = |n_default: usize, steps_default: usize| -> Result<FlowSpec, HarnessError> {
            let t = self.t.unwrap_or(1.0);
            if !(t >= 0.0 && t.is_finite()) {
                return Err(invalid(format!("t must be nonnegative and finite, got {t}")));
            }
            Ok(FlowSpec {
                n: at_least("n", self.n.unwrap_or(n_default), 1)?,
                params: elliptic(rho, zeta)?,
                t,
                steps: at_least("steps", self.steps.unwrap_or(steps_default), 1)?,
            })
        };
        let trials = |default: usize, min: usize| at_least("trials", self.trials.unwrap_or(default), min);
        let z_list = |default: &[[f64; 2]]| -> Result<Vec<C64>, HarnessError> {
            let zs = self.z.clone().unwrap_or_else(|| default.to_vec());
            if zs.iter().flatten().any(|v| !v.is_finite()) {
                return Err(invalid("z values must be finite"));
            }
            Ok(zs.into_iter().map(cx).collect())
        };
        let init = self.init.clone().unwrap_or_default();
        init.to_condition()?;

        let experiment = match kind {
            Kind::Simulate => Experiment::Simulate { flow: flow(8, 64)?, trials: trials(1, 1)?, init },
            Kind::Spectrum => Experiment::Spectrum { flow: flow(256, 64)?, trials: trials(1, 1)?, init, z: z_list(&[])? },
            Kind::Boundary => {
                let t = positive("t", self.t.unwrap_or(1.0))?;
                let zeta = cx(self.zeta.unwrap_or([0.0, 0.0]));
                if zeta.norm() >= t {
                    return Err(invalid(format!("|zeta| must be below t, got |{zeta}| ≥ {t}")));
                }
                init.spectral_data()?;
                Experiment::Boundary(BoundarySpec {
                    name: "boundary".into(),
                    n: at_least("n", self.n.unwrap_or(1024), 2)?,
                    steps: at_least("steps", self.steps.unwrap_or(64), 1)?,
                    t,
                    zeta,
                    init,
                    window: self.window.map(check_window).transpose()?,
                    resolution: positive("resolution", self.resolution.unwrap_or(0.02))?,
                    with_eigenvalues: false,
                })
            }
            Kind::Figure => {
                let name = self.preset.clone().ok_or_else(|| invalid("figure needs a preset"))?;
                let mut b = presets::preset(&name)?;
                if let Some(n) = self.n {
                    b.n = at_least("n", n, 2)?;
                }
                if let Some(s) = self.steps {
                    b.steps = at_least("steps", s, 1)?;
                }
                if let Some(r) = self.resolution {
                    b.resolution = positive("resolution", r)?;
                }
                init_fits(&b.init, b.n)?;
                Experiment::Figure(b)
            }
            Kind::VerifyMoments => Experiment::Moments {
                n: at_least("n", self.n.unwrap_or(32), 1)?,
                params: elliptic(rho, zeta)?,
                t: positive("t", self.t.unwrap_or(1.0))?,
                level: self.level.unwrap_or(3),
                trials: trials(400, 2)?,
                init,
            },
            Kind::VerifyRefinement => {
                let levels = nonempty("levels", &self.levels.clone().unwrap_or_else(|| (3..=7).collect()))?;
                if levels.len() < 2 || levels.iter().any(|l| *l == 0 || *l > 20) {
                    return Err(invalid("levels need at least two entries in 1..=20"));
                }
                Experiment::Refinement {
                    n: at_least("n", self.n.unwrap_or(64), 1)?,
                    params: elliptic(rho, zeta)?,
                    t: positive("t", self.t.unwrap_or(1.0))?,
                    levels,
                    trials: trials(100, 2)?,
                }
            }
            Kind::VerifyAffine => {
                let times = nonempty("times", &self.times.clone().unwrap_or_else(|| vec![0.02, 0.04, 0.08, 0.16, 0.32]))?;
                for t in &times {
                    positive("times entry", *t)?;
                }
                Experiment::Affine {
                    n: at_least("n", self.n.unwrap_or(128), 1)?,
                    params: elliptic(rho, zeta)?,
                    steps: at_least("steps", self.steps.unwrap_or(512), 1)?,
                    times,
                    trials: trials(50, 1)?,
                }
            }
            Kind::VerifyInverse => {
                let ks = nonempty("ks", &self.ks.clone().unwrap_or_else(|| vec![16, 64, 256, 1024]))?;
                if ks.contains(&0) {
                    return Err(invalid("ks entries must be positive"));
                }
                Experiment::Inverse {
                    n: at_least("n", self.n.unwrap_or(32), 1)?,
                    params: elliptic(rho, zeta)?,
                    t: positive("t", self.t.unwrap_or(1.0))?,
                    ks,
                    trials: trials(20, 1)?,
                }
            }
            Kind::VerifySsv => {
                let deltas = nonempty("deltas", &self.deltas.clone().unwrap_or_else(|| vec![1e-3, 3e-3, 1e-2]))?;
                for d in &deltas {
                    positive("deltas entry", *d)?;
                }
                Experiment::Ssv {
                    n: at_least("n", self.n.unwrap_or(32), 1)?,
                    trials: trials(2000, 2)?,
                    deltas,
                    shift: cx(self.shift.unwrap_or([1.0, 0.0])),
                }
            }
            Kind::VerifyWegner => {
                let f = flow(512, 48)?;
                let eta = match &self.eta {
                    Some(e) => nonempty("eta", e)?,
                    None => {
                        let lo = (f.n as f64).powf(-2.0 / 11.0);
                        (0..12).map(|j| lo * (1.0 / lo).powf(j as f64 / 11.0)).collect()
                    }
                };
                for e in &eta {
                    positive("eta entry", *e)?;
                }
                Experiment::Wegner { flow: f, trials: trials(10, 2)?, z: nonempty("z", &z_list(&[[0.5, 0.0], [4.0, 0.0]])?)?, eta }
            }
            Kind::VerifyLogtail => Experiment::LogTail {
                flow: flow(256, 64)?,
                trials: trials(100, 1)?,
                z: nonempty("z", &z_list(&[[0.0, 0.0]])?)?,
                tail_level: positive("tail_level", self.tail_level.unwrap_or(10.0))?,
                threshold: positive("threshold", self.threshold.unwrap_or(0.01))?,
            },
            Kind::SdCheck => {
                let polynomial = self.polynomial.clone().unwrap_or_else(|| "1.0+0.0i * x1.x1.x1".into());
                glbm_core::ncpoly::NCPoly::<f64>::from_str(&polynomial).map_err(|e| invalid(e.to_string()))?;
                Experiment::SdCheck {
                    n: at_least("n", self.n.unwrap_or(32), 2)?,
                    trials: trials(2000, 2)?,
                    polynomial,
                    index: at_least("index", self.index.unwrap_or(1), 1)?,
                }
            }
        };
        match &experiment {
            Experiment::Simulate { flow, init, .. } | Experiment::Spectrum { flow, init, .. } => init_fits(init, flow.n)?,
            Experiment::Boundary(b) if b.zeta != Complex::new(0.0, 0.0) => init_fits(&b.init, b.n)?,
            Experiment::Moments { n, init, .. } => init_fits(init, *n)?,
            _ => {}
        }
        Ok(Resolved { kind, seed, svg, experiment })
    }
}

fn check_window(w: WindowSpec) -> Result<WindowSpec, HarnessError> {
    let ok = [w.re_min, w.re_max, w.im_min, w.im_max].iter().all(|v| v.is_finite())
        && w.re_max > w.re_min
        && w.im_max > w.im_min;
    if ok {
        Ok(w)
    } else {
        Err(invalid("window bounds must be finite with min < max"))
    }
}

/// Rejects initial conditions whose structure does not fit dimension `n`.
fn init_fits(init: &InitSpec, n: usize) -> Result<(), HarnessError> {
    match init.to_condition()?.kind {
        InitialKind::RootsOfUnity(k) if k == 0 || !n.is_multiple_of(k) => {
            Err(invalid(format!("n = {n} is not divisible by k = {k}")))
        }
        InitialKind::NonNormalBlock(_) if !n.is_multiple_of(2) => Err(invalid(format!("n = {n} is not even"))),
        InitialKind::AtomicNormal(atoms) => {
            let total: Ratio<u64> = atoms.iter().map(|(_, w)| *w).sum();
            if total != Ratio::from_integer(1) {
                return Err(invalid(format!("atom weights sum to {total}, not 1")));
            }
            for (l, w) in atoms {
                let count = w * Ratio::from_integer(n as u64);
                if !count.is_integer() || count.to_integer() == 0 {
                    return Err(invalid(format!("n·w = {count} is not a positive integer for atom {l}")));
                }
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

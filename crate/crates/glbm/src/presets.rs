//! Parameter sets for the figure gallery.

use glbm_core::{Complex, C64};

use crate::config::{BoundarySpec, InitSpec};
use crate::error::HarnessError;

/// Default matrix size for presets.
pub const DEFAULT_N: usize = 1024;
/// Smallest multiple of 6 not below [`DEFAULT_N`], for sixth-root presets.
pub const DEFAULT_N_SIXTH_ROOTS: usize = 1026;

const NAMES: [&str; 16] = [
    "fig1-left",
    "fig1-right",
    "fig2-left",
    "fig2-right",
    "fig3-left",
    "fig3-right",
    "fig4-left",
    "fig4-right",
    "fig5-t0.8-zeta0",
    "fig5-t0.8-zeta0.5",
    "fig5-t1-zeta0",
    "fig5-t1-zeta0.5",
    "fig5-t1.2-zeta0",
    "fig5-t1.2-zeta0.5",
    "fig6-left",
    "fig6-right",
];

pub fn names() -> &'static [&'static str] {
    &NAMES
}

fn spec(name: &str, t: f64, zeta: C64, init: InitSpec) -> BoundarySpec {
    let n = match init {
        InitSpec::RootsOfUnity { k: 6, .. } => DEFAULT_N_SIXTH_ROOTS,
        _ => DEFAULT_N,
    };
    BoundarySpec {
        name: name.to_string(),
        n,
        steps: 64,
        t,
        zeta,
        init,
        window: None,
        resolution: 0.02,
        with_eigenvalues: true,
    }
}

/// Looks up a preset by name.
pub fn preset(name: &str) -> Result<BoundarySpec, HarnessError> {
    let id = InitSpec::Identity { conjugate: false };
    let u6 = InitSpec::RootsOfUnity { k: 6, conjugate: false };
    let atoms = InitSpec::EightAtom { conjugate: false };
    let block = InitSpec::JordanBlock { conjugate: false };
    let z = |re: f64, im: f64| Complex::new(re, im);
    let s = match name {
        "fig1-left" => spec(name, 2.0, z(0.6, 1.0), id),
        "fig1-right" => spec(name, 2.0, z(0.6, 1.0), atoms),
        "fig2-left" => spec(name, 3.0, z(0.0, 0.0), id),
        "fig2-right" => spec(name, 4.0, z(0.0, 0.0), id),
        "fig3-left" => spec(name, 2.0 / 3.0, z(0.0, 0.0), u6),
        "fig3-right" => spec(name, 0.7, z(0.0, 0.0), u6),
        "fig4-left" => spec(name, 3.0, z(2.0, -1.0), id),
        "fig4-right" => spec(name, 2.0 / 3.0, z(0.0, -1.0 / 3.0), u6),
        "fig5-t0.8-zeta0" => spec(name, 0.8, z(0.0, 0.0), atoms),
        "fig5-t0.8-zeta0.5" => spec(name, 0.8, z(0.5, 0.0), atoms),
        "fig5-t1-zeta0" => spec(name, 1.0, z(0.0, 0.0), atoms),
        "fig5-t1-zeta0.5" => spec(name, 1.0, z(0.5, 0.0), atoms),
        "fig5-t1.2-zeta0" => spec(name, 1.2, z(0.0, 0.0), atoms),
        "fig5-t1.2-zeta0.5" => spec(name, 1.2, z(0.5, 0.0), atoms),
        "fig6-left" => spec(name, 1.0, z(0.0, 0.0), block),
        "fig6-right" => spec(name, 1.0, z(0.5, 0.5), block),
        _ => {
            return Err(HarnessError::Validation(format!(
                "unknown preset {name:?}; available: {}",
                NAMES.join(", ")
            )))
        }
    };
    Ok(s)
}

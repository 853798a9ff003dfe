//! Polarization-dependent beam splitters and the attenuators built from them.
//!
//! Per polarization the coupler between spatial modes `a` and `b` is
//!
//! ```text
//! [ √T      i√(1−T) ]
//! [ i√(1−T)  √T     ]
//! ```
//!
//! with the reflected amplitude carrying a factor `i`. An attenuator is the
//! same coupler with its second port routed into an ancilla loss mode, which
//! post-selection later requires to be empty.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{ModeId, ModeTransform, Polarization};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PdbsSpec {
    pub t_h: f64,
    pub t_v: f64,
    pub modes: (u32, u32),
}

impl PdbsSpec {
    pub fn new(t_h: f64, t_v: f64, modes: (u32, u32)) -> Self {
        PdbsSpec { t_h, t_v, modes }
    }

    /// The entangling element: full H transmission, one-third V transmission.
    pub fn central(modes: (u32, u32)) -> Self {
        PdbsSpec::new(1.0, 1.0 / 3.0, modes)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AttenuatorSpec {
    pub t_h: f64,
    pub t_v: f64,
    pub mode: u32,
    /// Spatial mode collecting the lost light. Must start empty.
    pub ancilla: u32,
}

impl AttenuatorSpec {
    pub fn new(t_h: f64, t_v: f64, mode: u32, ancilla: u32) -> Self {
        AttenuatorSpec { t_h, t_v, mode, ancilla }
    }

    /// Complementary attenuator that equalizes the central element's output.
    pub fn compensating(mode: u32, ancilla: u32) -> Self {
        AttenuatorSpec::new(1.0 / 3.0, 1.0, mode, ancilla)
    }
}

fn check_transmission(name: &str, t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) || t.is_nan() {
        return Err(Error::validation(format!("{name} = {t} outside [0, 1]")));
    }
    Ok(())
}

fn coupler_block(t: f64) -> [[Complex64; 2]; 2] {
    let tr = Complex64::new(t.sqrt(), 0.0);
    let rf = Complex64::new(0.0, (1.0 - t).sqrt());
    [[tr, rf], [rf, tr]]
}

/// Four-mode transform over `[aH, aV, bH, bV]` (canonical order when a < b).
pub fn pdbs(spec: &PdbsSpec) -> Result<ModeTransform> {
    check_transmission("t_h", spec.t_h)?;
    check_transmission("t_v", spec.t_v)?;
    let (a, b) = spec.modes;
    if a == b {
        return Err(Error::config(format!("beam splitter needs two distinct modes, got {a} twice")));
    }
    let mut modes = vec![ModeId::h(a), ModeId::v(a), ModeId::h(b), ModeId::v(b)];
    modes.sort();
    let mut m = DMatrix::<Complex64>::zeros(4, 4);
    for pol in Polarization::BOTH {
        let t = match pol {
            Polarization::H => spec.t_h,
            Polarization::V => spec.t_v,
        };
        let block = coupler_block(t);
        let ports = [ModeId::new(a, pol), ModeId::new(b, pol)];
        let idx = ports.map(|p| modes.iter().position(|&x| x == p).unwrap());
        for (r, &j) in idx.iter().enumerate() {
            for (c, &k) in idx.iter().enumerate() {
                m[(j, k)] = block[r][c];
            }
        }
    }
    ModeTransform::new(modes, m)
}

/// Polarization-dependent loss on `mode`, realized as a coupler to `ancilla`.
pub fn attenuator(spec: &AttenuatorSpec) -> Result<ModeTransform> {
    if spec.mode == spec.ancilla {
        return Err(Error::config(format!(
            "attenuator ancilla {} collides with its active mode",
            spec.ancilla
        )));
    }
    pdbs(&PdbsSpec::new(spec.t_h, spec.t_v, (spec.mode, spec.ancilla)))
}

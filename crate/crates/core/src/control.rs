//! Coherent control of two channel copies: superposed causal orders (the
//! quantum switch) and superposed paths, followed by post-selection of the
//! control qubit.
//!
//! Joint operators act on system ⊗ control.

use serde::Serialize;

use crate::channel::{phi_t_kraus, KrausChannel};
use crate::error::{Error, Result};
use crate::qmat::{ket_minus, ket_plus, project_control, ComplexMatrix, DensityOperator, C64, TRACE_TOL};

/// Control-qubit measurement outcome that is post-selected.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    #[default]
    Plus,
    Minus,
}

impl Outcome {
    pub fn ket(self) -> [C64; 2] {
        match self {
            Outcome::Plus => ket_plus(),
            Outcome::Minus => ket_minus(),
        }
    }
}

/// Path amplitudes. `alpha` is indexed by the second channel's Kraus index,
/// `beta` by the first channel's.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeVectors {
    alpha: Vec<C64>,
    beta: Vec<C64>,
}

impl AmplitudeVectors {
    pub fn new(alpha: Vec<C64>, beta: Vec<C64>) -> Result<Self> {
        for (name, v) in [("alpha", &alpha), ("beta", &beta)] {
            let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if (norm2 - 1.0).abs() > TRACE_TOL {
                return Err(Error::InvalidParameter(format!("{name} amplitudes have norm² {norm2}, expected 1")));
            }
        }
        Ok(Self { alpha, beta })
    }

    /// `α₁ = α₂ = β₁ = β₂ = 1/√2`, `α₃ = β₃ = 0`, matched to the three `φ_t`
    /// Kraus operators.
    pub fn balanced_flips() -> Self {
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let z = C64::new(0.0, 0.0);
        Self { alpha: vec![s, s, z], beta: vec![s, s, z] }
    }

    pub fn alpha(&self) -> &[C64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[C64] {
        &self.beta
    }
}

/// Control state `ω = p|+⟩⟨+| + (1 − p) I/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ControlState {
    p: f64,
}

impl ControlState {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("control purity p must lie in [0, 1], got {p}")));
        }
        Ok(Self { p })
    }

    pub fn maximally_coherent() -> Self {
        Self { p: 1.0 }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn density(&self) -> DensityOperator {
        let h = 0.5;
        let off = 0.5 * self.p;
        DensityOperator::new(ComplexMatrix::from_real(2, &[h, off, off, h]).unwrap()).unwrap()
    }
}

/// Which supermap combines the two channel copies.
#[derive(Clone, Debug, PartialEq)]
pub enum Supermap {
    Switch,
    Path(AmplitudeVectors),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ControlConfig {
    pub supermap: Supermap,
    pub control: ControlState,
    pub outcome: Outcome,
}

impl ControlConfig {
    pub fn switch(p: f64) -> Result<Self> {
        Ok(Self { supermap: Supermap::Switch, control: ControlState::new(p)?, outcome: Outcome::Plus })
    }

    /// Path control with [`AmplitudeVectors::balanced_flips`].
    pub fn path(p: f64) -> Result<Self> {
        Ok(Self {
            supermap: Supermap::Path(AmplitudeVectors::balanced_flips()),
            control: ControlState::new(p)?,
            outcome: Outcome::Plus,
        })
    }

    pub fn with_outcome(mut self, outcome: Outcome) -> Self {
        self.outcome = outcome;
        self
    }

    /// Joint Kraus set for channel copies `e` and `f`.
    pub fn joint_channel(&self, e: &KrausChannel, f: &KrausChannel) -> Result<KrausChannel> {
        match &self.supermap {
            Supermap::Switch => switch_kraus(e, f),
            Supermap::Path(amps) => path_kraus(e, f, amps),
        }
    }
}

fn control_projectors() -> (ComplexMatrix, ComplexMatrix) {
    (ComplexMatrix::unit(2, 0, 0), ComplexMatrix::unit(2, 1, 1))
}

fn check_same_dim(e: &KrausChannel, f: &KrausChannel) -> Result<()> {
    if e.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: e.dim(), found: f.dim() });
    }
    Ok(())
}

/// `S_ij = E_i F_j ⊗ |0⟩⟨0| + F_j E_i ⊗ |1⟩⟨1|`.
pub fn switch_kraus(e: &KrausChannel, f: &KrausChannel) -> Result<KrausChannel> {
    check_same_dim(e, f)?;
    let (p0, p1) = control_projectors();
    let mut ops = Vec::with_capacity(e.len() * f.len());
    for ei in e.ops() {
        for fj in f.ops() {
            ops.push(ei.matmul(fj)?.kron(&p0).add(&fj.matmul(ei)?.kron(&p1))?);
        }
    }
    KrausChannel::new(ops, format!("switch({}, {})", e.label(), f.label()))
}

/// `N_ij = α_j E_i ⊗ |0⟩⟨0| + β_i F_j ⊗ |1⟩⟨1|`.
pub fn path_kraus(e: &KrausChannel, f: &KrausChannel, amps: &AmplitudeVectors) -> Result<KrausChannel> {
    check_same_dim(e, f)?;
    if amps.beta.len() != e.len() {
        return Err(Error::DimensionMismatch { expected: e.len(), found: amps.beta.len() });
    }
    if amps.alpha.len() != f.len() {
        return Err(Error::DimensionMismatch { expected: f.len(), found: amps.alpha.len() });
    }
    let (p0, p1) = control_projectors();
    let mut ops = Vec::with_capacity(e.len() * f.len());
    for (ei, &beta_i) in e.ops().iter().zip(&amps.beta) {
        for (fj, &alpha_j) in f.ops().iter().zip(&amps.alpha) {
            ops.push(ei.scale(alpha_j).kron(&p0).add(&fj.scale(beta_i).kron(&p1))?);
        }
    }
    KrausChannel::new(ops, format!("path({}, {})", e.label(), f.label()))
}

/// Post-selected system state and the probability of the selected outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlledOutput {
    pub state: DensityOperator,
    pub probability: f64,
}

/// Applies the configured supermap over channel copies `e`, `f` to
/// `rho0 ⊗ ω` and post-selects the control.
pub fn controlled_output_with(
    config: &ControlConfig,
    e: &KrausChannel,
    f: &KrausChannel,
    rho0: &DensityOperator,
) -> Result<ControlledOutput> {
    if rho0.dim() != e.dim() {
        return Err(Error::DimensionMismatch { expected: e.dim(), found: rho0.dim() });
    }
    let joint = config.joint_channel(e, f)?;
    let evolved = joint.apply(&rho0.kron(&config.control.density()))?;
    let (block, probability) = project_control(&evolved, &config.outcome.ket())?;
    let state = DensityOperator::new(block.scale_real(1.0 / probability).hermitized())?;
    Ok(ControlledOutput { state, probability })
}

/// [`controlled_output_with`] for two copies of `φ_t`.
pub fn controlled_output(config: &ControlConfig, rho0: &DensityOperator, t: f64) -> Result<ControlledOutput> {
    let phi = phi_t_kraus(t)?;
    controlled_output_with(config, &phi, &phi, rho0)
}

fn check_closed_form_args(rho0: &DensityOperator, t: f64, p: f64) -> Result<()> {
    if rho0.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: rho0.dim() });
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter(format!("time must be finite and non-negative, got {t}")));
    }
    ControlState::new(p).map(|_| ())
}

/// Closed-form coefficients of the path-controlled output state.
///
/// Both `A` and `B` share the denominator `(4+p)e^{2t} − p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathCoefficients {
    pub a: f64,
    pub b: f64,
}

impl PathCoefficients {
    pub fn at(t: f64, p: f64) -> Self {
        let e = (2.0 * t).exp();
        let den = (4.0 + p) * e - p;
        Self { a: 2.0 * (e + 1.0) / den, b: (e - 1.0) / den }
    }
}

/// Closed-form coefficients of the switch output state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwitchCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl SwitchCoefficients {
    pub fn at(t: f64, p: f64) -> Self {
        let e = (2.0 * t).exp();
        let e2 = e * e;
        let den = (4.0 + 3.0 * p) * e2 + 2.0 * p * e - p;
        Self {
            a: ((2.0 + p) * e2 + 2.0 * p * e + p + 2.0) / den,
            b: 2.0 * (1.0 + p) * (e2 - 1.0) / den,
            c: ((1.0 + 2.0 * p) * e2 + 2.0 * e + 2.0 * p + 1.0) / den,
        }
    }
}

/// Path-controlled output for the `+` outcome, from the closed form.
pub fn analytic_state_path(rho0: &DensityOperator, t: f64, p: f64) -> Result<DensityOperator> {
    check_closed_form_args(rho0, t, p)?;
    let PathCoefficients { a, b } = PathCoefficients::at(t, p);
    let m = rho0.matrix();
    let (r11, r12, r21, r22) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
    let out = [
        r11 * a + r22 * ((2.0 + p) * b),
        r12 * a + r21 * (p * b),
        r12 * (p * b) + r21 * a,
        r11 * ((2.0 + p) * b) + r22 * a,
    ];
    DensityOperator::new(ComplexMatrix::from_row_major(2, &out)?)
}

/// Switch output for the `+` outcome, from the closed form.
pub fn analytic_state_switch(rho0: &DensityOperator, t: f64, p: f64) -> Result<DensityOperator> {
    check_closed_form_args(rho0, t, p)?;
    let SwitchCoefficients { a, b, c } = SwitchCoefficients::at(t, p);
    let m = rho0.matrix();
    let (r11, r12, r21, r22) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
    let out = [r11 * a + r22 * b, r12 * c, r21 * c, r11 * b + r22 * a];
    DensityOperator::new(ComplexMatrix::from_row_major(2, &out)?)
}

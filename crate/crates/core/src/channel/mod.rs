//! Kraus-form quantum channels and the eternally non-Markovian qubit family
//! `φ_t`.

mod generator;

pub use generator::{canonical_rhs, integrate_canonical, CanonicalGenerator, DEFAULT_DT, MAX_DT};

use crate::error::{Error, Result};
use crate::qmat::{eig_hermitian, ComplexMatrix, DensityOperator, PSD_TOL};

/// Tolerance on `‖Σ K†K − I‖_max`.
pub const COMPLETENESS_TOL: f64 = 1e-12;

/// Outcome of a CPTP check.
#[derive(Clone, Debug, PartialEq)]
pub struct CptpReport {
    pub completeness_residual: f64,
    pub choi_min_eigenvalue: f64,
    pub passes: bool,
}

/// A channel given by its Kraus operators.
///
/// Channels built through [`KrausChannel::new`] are validated on
/// construction. [`KrausChannel::unchecked`] skips validation; such a channel
/// refuses to [`apply`](KrausChannel::apply) until it has been re-validated.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    ops: Vec<ComplexMatrix>,
    label: String,
    validated: bool,
}

impl KrausChannel {
    pub fn new(ops: Vec<ComplexMatrix>, label: impl Into<String>) -> Result<Self> {
        Self::unchecked(ops, label)?.into_validated()
    }

    /// Builds the channel without the CPTP check. Dimensions are still checked.
    pub fn unchecked(ops: Vec<ComplexMatrix>, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        let first =
            ops.first().ok_or_else(|| Error::InvalidParameter(format!("channel '{label}' has no Kraus operators")))?;
        let dim = first.dim();
        if let Some(bad) = ops.iter().find(|k| k.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.dim() });
        }
        Ok(Self { ops, label, validated: false })
    }

    pub fn identity(dim: usize) -> Self {
        Self { ops: vec![ComplexMatrix::identity(dim)], label: "identity".into(), validated: true }
    }

    /// Runs [`validate_cptp`] and marks the channel usable, or reports why not.
    pub fn into_validated(mut self) -> Result<Self> {
        let report = validate_cptp(&self);
        if !report.passes {
            return Err(Error::NotCptp {
                label: self.label,
                completeness: report.completeness_residual,
                choi_min: report.choi_min_eigenvalue,
            });
        }
        self.validated = true;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.ops[0].dim()
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_validated(&self) -> bool {
        self.validated
    }

    /// `Σ K M K†` for an arbitrary operator `M`, without any checks on the
    /// channel.
    pub fn act(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        let mut out = ComplexMatrix::zeros(self.dim());
        for k in &self.ops {
            out = out.add(&k.sandwich(m)?)?;
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if !self.validated {
            return Err(Error::Unvalidated(self.label.clone()));
        }
        DensityOperator::new(self.act(rho.matrix())?)
    }

    /// Unnormalized Choi matrix `Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`.
    pub fn choi(&self) -> Result<ComplexMatrix> {
        choi_of(self.dim(), |m| self.act(m))
    }
}

/// Choi matrix of any linear map on `dim × dim` operators.
pub fn choi_of<F>(dim: usize, map: F) -> Result<ComplexMatrix>
where
    F: Fn(&ComplexMatrix) -> Result<ComplexMatrix>,
{
    let n = dim * dim;
    let mut choi = ComplexMatrix::zeros(n);
    for i in 0..dim {
        for j in 0..dim {
            let image = map(&ComplexMatrix::unit(dim, i, j))?;
            for r in 0..dim {
                for c in 0..dim {
                    choi.set(i * dim + r, j * dim + c, image.get(r, c));
                }
            }
        }
    }
    Ok(choi)
}

/// Completeness residual and Choi positivity of a Kraus set.
pub fn validate_cptp(channel: &KrausChannel) -> CptpReport {
    let dim = channel.dim();
    let mut sum = ComplexMatrix::zeros(dim);
    for k in channel.ops() {
        sum = sum.add(&k.adjoint().matmul(k).expect("equal dims")).expect("equal dims");
    }
    let completeness_residual = sum.max_abs_diff(&ComplexMatrix::identity(dim)).expect("equal dims");
    let choi_min_eigenvalue = channel
        .choi()
        .and_then(|c| eig_hermitian(&c))
        .ok()
        .and_then(|ev| ev.last().copied())
        .unwrap_or(f64::NEG_INFINITY);
    CptpReport {
        completeness_residual,
        choi_min_eigenvalue,
        passes: completeness_residual <= COMPLETENESS_TOL && choi_min_eigenvalue >= -PSD_TOL,
    }
}

/// `outer ∘ inner`, with Kraus operators `E_i F_j`.
pub fn compose(outer: &KrausChannel, inner: &KrausChannel) -> Result<KrausChannel> {
    if outer.dim() != inner.dim() {
        return Err(Error::DimensionMismatch { expected: outer.dim(), found: inner.dim() });
    }
    let mut ops = Vec::with_capacity(outer.len() * inner.len());
    for e in outer.ops() {
        for f in inner.ops() {
            ops.push(e.matmul(f)?);
        }
    }
    KrausChannel::new(ops, format!("{} ∘ {}", outer.label(), inner.label()))
}

/// Time-dependent weights of the `φ_t` Kraus operators.
///
/// `α₁ = α₃ = (1 + e^{−2t})/2` and `α₂ = (1 − e^{−2t})/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiTCoefficients {
    pub t: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
}

impl PhiTCoefficients {
    pub fn at(t: f64) -> Result<Self> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidParameter(format!("time must be finite and non-negative, got {t}")));
        }
        let decay = (-2.0 * t).exp();
        let alpha1 = 0.5 * (1.0 + decay);
        Ok(Self { t, alpha1, alpha2: 0.5 * (1.0 - decay), alpha3: alpha1 })
    }

    /// Weight of the flip operators `K₁`, `K₂`.
    pub fn flip_weight(&self) -> f64 {
        self.alpha2
    }

    /// Weight of the identity operator `K₃`.
    pub fn identity_weight(&self) -> f64 {
        0.5 * (self.alpha1 + self.alpha3)
    }

    /// Weight of the phase operator `K₄`; zero for this family.
    pub fn phase_weight(&self) -> f64 {
        0.5 * (self.alpha1 - self.alpha3)
    }

    /// `Σ K†K = completeness_weight · I`.
    pub fn completeness_weight(&self) -> f64 {
        self.flip_weight() + self.identity_weight() + self.phase_weight()
    }
}

/// Kraus form of `φ_t`: `K₁ = √α₂|0⟩⟨1|`, `K₂ = √α₂|1⟩⟨0|`,
/// `K₃ = √((α₁+α₃)/2) I`. `K₄` vanishes identically and is omitted.
pub fn phi_t_kraus(t: f64) -> Result<KrausChannel> {
    let w = PhiTCoefficients::at(t)?;
    let flip = w.flip_weight().sqrt();
    let ops = vec![
        ComplexMatrix::unit(2, 0, 1).scale_real(flip),
        ComplexMatrix::unit(2, 1, 0).scale_real(flip),
        ComplexMatrix::identity(2).scale_real(w.identity_weight().sqrt()),
    ];
    KrausChannel::new(ops, format!("phi_t(t={t})"))
}

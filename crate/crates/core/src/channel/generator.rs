//! Time-local Pauli master equation and a classical RK4 integrator for it.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::qmat::{ComplexMatrix, DensityOperator, C64};

/// Default integration step.
pub const DEFAULT_DT: f64 = 1e-3;
/// Largest accepted integration step.
pub const MAX_DT: f64 = 1e-2;

type Rate = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `ρ̇ = −i[H, ρ] + Σᵢ γᵢ(t)/2 (σᵢ ρ σᵢ − ρ)` over the three Pauli matrices.
#[derive(Clone)]
pub struct CanonicalGenerator {
    rates: [Rate; 3],
    hamiltonian: ComplexMatrix,
}

impl CanonicalGenerator {
    pub fn new(rates: [Rate; 3], hamiltonian: ComplexMatrix) -> Result<Self> {
        if hamiltonian.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: hamiltonian.dim() });
        }
        Ok(Self { rates, hamiltonian })
    }

    /// `γ₁ = γ₂ = 1`, `γ₃ = −tanh t`, no Hamiltonian.
    pub fn eternal_non_markovian() -> Self {
        Self {
            rates: [Arc::new(|_| 1.0), Arc::new(|_| 1.0), Arc::new(|t: f64| -t.tanh())],
            hamiltonian: ComplexMatrix::zeros(2),
        }
    }

    pub fn rates_at(&self, t: f64) -> [f64; 3] {
        [(self.rates[0])(t), (self.rates[1])(t), (self.rates[2])(t)]
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }
}

impl fmt::Debug for CanonicalGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CanonicalGenerator")
            .field("rates(0)", &self.rates_at(0.0))
            .field("hamiltonian", &self.hamiltonian)
            .finish()
    }
}

/// Right-hand side of the master equation at time `t`.
pub fn canonical_rhs(gen: &CanonicalGenerator, t: f64, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: rho.dim() });
    }
    let h = &gen.hamiltonian;
    let commutator = h.matmul(rho)?.sub(&rho.matmul(h)?)?;
    let mut out = commutator.scale(C64::new(0.0, -1.0));
    let paulis = [ComplexMatrix::pauli_x(), ComplexMatrix::pauli_y(), ComplexMatrix::pauli_z()];
    for (gamma, sigma) in gen.rates_at(t).into_iter().zip(paulis.iter()) {
        let dissipator = sigma.sandwich(rho)?.sub(rho)?;
        out = out.add(&dissipator.scale_real(0.5 * gamma))?;
    }
    Ok(out)
}

/// Classical RK4 from `0` to `t_final` with a uniform step no larger than
/// `dt`. The state is re-Hermitized and trace-renormalized after every step.
pub fn integrate_canonical(
    gen: &CanonicalGenerator,
    rho0: &DensityOperator,
    t_final: f64,
    dt: f64,
) -> Result<DensityOperator> {
    if !(dt > 0.0 && dt <= MAX_DT) {
        return Err(Error::InvalidParameter(format!("dt must lie in (0, {MAX_DT}], got {dt}")));
    }
    if !t_final.is_finite() || t_final < 0.0 {
        return Err(Error::InvalidParameter(format!("t_final must be finite and non-negative, got {t_final}")));
    }
    if t_final == 0.0 {
        return Ok(rho0.clone());
    }
    let steps = (t_final / dt).ceil() as usize;
    let h = t_final / steps as f64;
    let mut rho = rho0.matrix().clone();
    for n in 0..steps {
        let t = n as f64 * h;
        let k1 = canonical_rhs(gen, t, &rho)?;
        let k2 = canonical_rhs(gen, t + 0.5 * h, &rho.add(&k1.scale_real(0.5 * h))?)?;
        let k3 = canonical_rhs(gen, t + 0.5 * h, &rho.add(&k2.scale_real(0.5 * h))?)?;
        let k4 = canonical_rhs(gen, t + h, &rho.add(&k3.scale_real(h))?)?;
        let incr = k1.add(&k2.scale_real(2.0))?.add(&k3.scale_real(2.0))?.add(&k4)?;
        let next = rho.add(&incr.scale_real(h / 6.0))?.hermitized();
        let tr = next.trace().re;
        rho = next.scale_real(1.0 / tr);
    }
    DensityOperator::new(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::phi_t_kraus;
    use crate::qmat::{ket_plus, trace_distance};

    #[test]
    fn rates_of_the_eternal_instance() {
        let g = CanonicalGenerator::eternal_non_markovian();
        for t in [0.0, 0.5, 3.0] {
            let r = g.rates_at(t);
            assert_eq!(r[0], 1.0);
            assert_eq!(r[1], 1.0);
            assert_eq!(r[2], -t.tanh());
        }
    }

    #[test]
    fn maximally_mixed_is_stationary() {
        let g = CanonicalGenerator::eternal_non_markovian();
        let mixed = DensityOperator::maximally_mixed(2);
        for t in [0.0, 0.7, 4.0] {
            assert!(canonical_rhs(&g, t, mixed.matrix()).unwrap().max_abs() < 1e-16);
        }
    }

    #[test]
    fn ground_state_rhs_at_zero() {
        let g = CanonicalGenerator::eternal_non_markovian();
        let out = canonical_rhs(&g, 0.0, DensityOperator::basis(2, 0).matrix()).unwrap();
        let want = ComplexMatrix::diag(&[-1.0, 1.0]);
        assert!(out.max_abs_diff(&want).unwrap() < 1e-15);
    }

    #[test]
    fn rhs_is_traceless_and_hermitian() {
        let g = CanonicalGenerator::eternal_non_markovian();
        let rho = ComplexMatrix::from_row_major(
            2,
            &[C64::new(0.6, 0.0), C64::new(0.1, 0.3), C64::new(0.1, -0.3), C64::new(0.4, 0.0)],
        )
        .unwrap();
        for t in [0.0, 0.3, 2.0] {
            let out = canonical_rhs(&g, t, &rho).unwrap();
            assert!(out.trace().norm() < 1e-15);
            assert!(out.hermitian_residual() < 1e-15);
        }
    }

    #[test]
    fn zero_time_returns_input() {
        let g = CanonicalGenerator::eternal_non_markovian();
        let rho = DensityOperator::pure(&ket_plus()).unwrap();
        assert_eq!(integrate_canonical(&g, &rho, 0.0, DEFAULT_DT).unwrap(), rho);
    }

    #[test]
    fn dt_out_of_range() {
        let g = CanonicalGenerator::eternal_non_markovian();
        let rho = DensityOperator::basis(2, 0);
        assert!(integrate_canonical(&g, &rho, 1.0, 0.0).is_err());
        assert!(integrate_canonical(&g, &rho, 1.0, 0.02).is_err());
        assert!(integrate_canonical(&g, &rho, -1.0, 1e-3).is_err());
    }

    #[test]
    fn matches_kraus_at_ln2_over_2() {
        let g = CanonicalGenerator::eternal_non_markovian();
        let t = std::f64::consts::LN_2 / 2.0;
        let out = integrate_canonical(&g, &DensityOperator::basis(2, 0), t, 1e-3).unwrap();
        assert!(out.matrix().max_abs_diff(&ComplexMatrix::diag(&[0.75, 0.25])).unwrap() < 1e-6);
    }

    #[test]
    fn matches_kraus_for_plus_at_five() {
        let g = CanonicalGenerator::eternal_non_markovian();
        let plus = DensityOperator::pure(&ket_plus()).unwrap();
        let ode = integrate_canonical(&g, &plus, 5.0, 1e-3).unwrap();
        let kraus = phi_t_kraus(5.0).unwrap().apply(&plus).unwrap();
        assert!(trace_distance(&ode, &kraus).unwrap() < 1e-6);
    }
}

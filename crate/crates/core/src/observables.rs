//! Thermodynamic observables along the selected equilibrium branch.
//!
//! Every derivative is a central difference of re-solved equilibria, so the
//! implicit dependence of `(m_a, m_b)` on `H` and `T` is included. Perturbed
//! solves are seeded from the unperturbed solution to stay on its branch.

use crate::error::{Error, Result};
use crate::mean_field::{equilibrium, SelfConsistentState, SolverConfig};
use crate::trimer::ModelParams;

/// Default field step for `d m_a / dH`.
pub fn default_field_step(h: f64) -> f64 {
    (1e-4 * h.abs().max(1.0)).max(1e-6)
}

/// Default relative temperature step (`delta = step * T`).
pub const DEFAULT_TEMPERATURE_STEP: f64 = 1e-3;

/// Values above this are reported as a divergence near `T_c`.
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    /// Central difference.
    pub value: f64,
    pub forward: f64,
    pub backward: f64,
    /// One-sided differences disagree by more than 10%: the point likely sits
    /// on a jump where the derivative is undefined.
    pub jump_suspect: bool,
}

impl Derivative {
    fn from_samples(minus: f64, center: f64, plus: f64, step: f64) -> Self {
        let forward = (plus - center) / step;
        let backward = (center - minus) / step;
        let scale = forward.abs().max(backward.abs());
        Self {
            value: (plus - minus) / (2.0 * step),
            forward,
            backward,
            jump_suspect: scale > 1e-8 && (forward - backward).abs() > 0.1 * scale,
        }
    }

    pub fn is_divergent(&self) -> bool {
        self.value.abs() > DIVERGENCE_THRESHOLD
    }
}

fn seeded(config: &SolverConfig, state: &SelfConsistentState) -> SolverConfig {
    config.with_seeds(vec![(state.m_a, state.m_b)])
}

fn check_step(step: f64) -> Result<()> {
    if step > 0.0 && step.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("step {step} must be > 0")))
    }
}

fn check_relative_step(step: f64) -> Result<()> {
    if step > 0.0 && step < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "relative temperature step {step} must lie in (0, 1)"
        )))
    }
}

/// `chi_a = d m_a / dH` by central difference in the field.
pub fn susceptibility(
    params: &ModelParams,
    t: f64,
    step: f64,
    config: &SolverConfig,
) -> Result<Derivative> {
    check_step(step)?;
    let base = equilibrium(params, t, config)?.state;
    field_derivative_on(params, t, step, config, &base)
}

pub(crate) fn field_derivative_on(
    params: &ModelParams,
    t: f64,
    step: f64,
    config: &SolverConfig,
    base: &SelfConsistentState,
) -> Result<Derivative> {
    let follow = seeded(config, base);
    let plus = equilibrium(&params.with_field(params.h + step), t, &follow)?.state.m_a;
    let minus = equilibrium(&params.with_field(params.h - step), t, &follow)?.state.m_a;
    Ok(Derivative::from_samples(minus, base.m_a, plus, step))
}

/// Zero-field susceptibility on the paramagnetic branch (seeded at the
/// origin). Below `T_c` the perturbed solves run off to the ordered branch
/// and the result comes out divergent.
pub fn zero_field_susceptibility(
    params: &ModelParams,
    t: f64,
    config: &SolverConfig,
) -> Result<Derivative> {
    let params = params.with_field(0.0);
    let para = config.with_seeds(vec![(0.0, 0.0)]);
    let base = equilibrium(&params, t, &para)?.state;
    field_derivative_on(&params, t, default_field_step(0.0), &para, &base)
}

fn follow_branch(params: &ModelParams, t: f64, config: &SolverConfig) -> Result<SelfConsistentState> {
    Ok(equilibrium(params, t, config)?.state)
}

pub(crate) fn internal_energy_on(
    params: &ModelParams,
    t: f64,
    step: f64,
    config: &SolverConfig,
    base: &SelfConsistentState,
) -> Result<f64> {
    let delta = step * t;
    let follow = seeded(config, base);
    let g_plus = follow_branch(params, t + delta, &follow)?.free_energy_per_site / (t + delta);
    let g_minus = follow_branch(params, t - delta, &follow)?.free_energy_per_site / (t - delta);
    Ok(-t * t * (g_plus - g_minus) / (2.0 * delta))
}

/// `u = -T^2 d(F/3NT)/dT` with the relative step `delta = step * T`.
pub fn internal_energy(params: &ModelParams, t: f64, step: f64, config: &SolverConfig) -> Result<f64> {
    check_relative_step(step)?;
    let base = equilibrium(params, t, config)?.state;
    internal_energy_on(params, t, step, config, &base)
}

pub(crate) fn specific_heat_on(
    params: &ModelParams,
    t: f64,
    step: f64,
    config: &SolverConfig,
    base: &SelfConsistentState,
) -> Result<f64> {
    let delta = step * t;
    let follow = seeded(config, base);
    let up = follow_branch(params, t + delta, &follow)?;
    let down = follow_branch(params, t - delta, &follow)?;
    let u_plus = internal_energy_on(params, t + delta, step, config, &up)?;
    let u_minus = internal_energy_on(params, t - delta, step, config, &down)?;
    Ok((u_plus - u_minus) / (2.0 * delta))
}

/// `c = du/dT`, a central difference of internal-energy values.
pub fn specific_heat(params: &ModelParams, t: f64, step: f64, config: &SolverConfig) -> Result<f64> {
    check_relative_step(step)?;
    let base = equilibrium(params, t, config)?.state;
    specific_heat_on(params, t, step, config, &base)
}

/// `c = -T d^2(F/3N)/dT^2` by a second central difference.
pub fn specific_heat_second_derivative(
    params: &ModelParams,
    t: f64,
    step: f64,
    config: &SolverConfig,
) -> Result<f64> {
    check_relative_step(step)?;
    let base = equilibrium(params, t, config)?.state;
    let delta = step * t;
    let follow = seeded(config, &base);
    let f_plus = follow_branch(params, t + delta, &follow)?.free_energy_per_site;
    let f_minus = follow_branch(params, t - delta, &follow)?.free_energy_per_site;
    let f0 = base.free_energy_per_site;
    Ok(-t * (f_plus - 2.0 * f0 + f_minus) / (delta * delta))
}

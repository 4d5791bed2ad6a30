//! Gibbs-Bogoliubov variational layer: effective fields, the coupled
//! self-consistency maps for `(m_a, m_b)`, a damped fixed-point solver with
//! multi-seed branch search, and free-energy based equilibrium selection.

use crate::error::{check_temperature, Error, Result};
use crate::numeric::{scaled_cosh, scaled_sinh};
use crate::trimer::{
    hyperbolic_parts, monomer_partition, total_sz_moments, trimer_partition, EffectiveFields,
    ModelParams,
};

/// Variational minimum of the bound: `lambda_aa = J_aa`,
/// `gamma_a = 2 J_ab m_b + H`, `gamma_b = 4 J_ab m_a + H`.
pub fn effective_fields(m_a: f64, m_b: f64, params: &ModelParams) -> EffectiveFields {
    EffectiveFields {
        lambda_aa: params.j_aa,
        gamma_a: 2.0 * params.j_ab * m_b + params.h,
        gamma_b: 4.0 * params.j_ab * m_a + params.h,
    }
}

/// Single a-site magnetization of a trimer in the field `gamma_a`:
/// `(1/6) [3 sinh 3x + g sinh x] / [cosh 3x + g cosh x]` with
/// `x = gamma_a / 2T` and `g = 2 exp(3 lambda / 2T) + 1`.
pub fn map_m_a(fields: &EffectiveFields, t: f64) -> f64 {
    let p = hyperbolic_parts(fields, t);
    let num = 3.0 * scaled_sinh(3.0 * p.x, p.k) + scaled_sinh(p.x, p.k - p.ln_g);
    let den = scaled_cosh(3.0 * p.x, p.k) + scaled_cosh(p.x, p.k - p.ln_g);
    num / (6.0 * den)
}

/// Single b-site magnetization, `(1/2) tanh(gamma_b / 2T)`.
pub fn map_m_b(fields: &EffectiveFields, t: f64) -> f64 {
    0.5 * (fields.gamma_b / (2.0 * t)).tanh()
}

/// Variational free energy per lattice site, `F_GB / 3N`.
///
/// Per cluster (three a-spins and three halves of b-spins)
/// `f_GB = f_0a + (3/2) f_0b + 6 J_ab m_a m_b`, and there are `2N/3`
/// clusters on `3N` sites, so the per-site value is `(2/9) f_GB`.
pub fn free_energy_per_site(m_a: f64, m_b: f64, params: &ModelParams, t: f64) -> Result<f64> {
    let fields = effective_fields(m_a, m_b, params);
    let f_a = trimer_partition(&fields, t)?.free_energy(t);
    let f_b = monomer_partition(fields.gamma_b, t)?.free_energy(t);
    Ok(2.0 / 9.0 * (f_a + 1.5 * f_b + 6.0 * params.j_ab * m_a * m_b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Threshold on `max(|F_a(m) - m_a|, |F_b(m) - m_b|)`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Mixing weight of the new iterate, in `(0, 1]`.
    pub damping: f64,
    /// Starting points `(m_a, m_b)`.
    pub seeds: Vec<(f64, f64)>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 100_000,
            damping: 0.7,
            seeds: Self::default_seeds(),
        }
    }
}

impl SolverConfig {
    pub fn default_seeds() -> Vec<(f64, f64)> {
        vec![
            (0.49, 0.49),
            (-0.49, -0.49),
            (1.0 / 6.0, 0.49),
            (-1.0 / 6.0, -0.49),
            (0.01, 0.01),
            (0.0, 0.0),
        ]
    }

    pub fn with_seeds(&self, seeds: Vec<(f64, f64)>) -> Self {
        Self { seeds, ..self.clone() }
    }

    /// Same configuration with `seed` tried first.
    pub fn with_leading_seed(&self, seed: (f64, f64)) -> Self {
        let mut seeds = vec![seed];
        seeds.extend(self.seeds.iter().copied());
        Self { seeds, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidConfig(format!("tolerance {} must be > 0", self.tolerance)));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidConfig(format!("damping {} must lie in (0, 1]", self.damping)));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("seed list is empty".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfConsistentState {
    pub m_a: f64,
    pub m_b: f64,
    pub fields: EffectiveFields,
    /// `F_GB / 3N`.
    pub free_energy_per_site: f64,
    pub iterations: usize,
    /// Final fixed-point residual `max |F(m) - m|`.
    pub residual: f64,
    pub converged: bool,
}

impl SelfConsistentState {
    pub fn magnetizations(&self) -> (f64, f64) {
        (self.m_a, self.m_b)
    }
}

const MIN_DAMPING: f64 = 0.05;
const OSCILLATION_WINDOW: usize = 10;

struct FixedPointMap<'a> {
    params: &'a ModelParams,
    t: f64,
}

impl FixedPointMap<'_> {
    fn apply(&self, m: [f64; 2]) -> [f64; 2] {
        let fields = effective_fields(m[0], m[1], self.params);
        [map_m_a(&fields, self.t), map_m_b(&fields, self.t)]
    }

    fn residual(&self, m: [f64; 2]) -> ([f64; 2], f64) {
        let f = self.apply(m);
        let r = [f[0] - m[0], f[1] - m[1]];
        (r, r[0].abs().max(r[1].abs()))
    }

    /// One Newton step on `F(m) - m = 0` with the analytic Jacobian. The map
    /// only couples `m_a` to `m_b` and back, so `I - DF` is
    /// `[[1, -A], [-B, 1]]`.
    fn newton_step(&self, m: [f64; 2], r: [f64; 2]) -> Option<[f64; 2]> {
        let fields = effective_fields(m[0], m[1], self.params);
        let (_, var_sz) = total_sz_moments(&fields, self.t);
        let dma = var_sz / (3.0 * self.t);
        let sech = 1.0 / (fields.gamma_b / (2.0 * self.t)).cosh();
        let dmb = sech * sech / (4.0 * self.t);
        let a = 2.0 * self.params.j_ab * dma;
        let b = 4.0 * self.params.j_ab * dmb;
        let det = 1.0 - a * b;
        if det.abs() < 1e-300 || !det.is_finite() {
            return None;
        }
        let next = [
            m[0] + (r[0] + a * r[1]) / det,
            m[1] + (r[1] + b * r[0]) / det,
        ];
        (next.iter().all(|x| x.is_finite() && x.abs() <= 0.5)).then_some(next)
    }

    fn state(&self, m: [f64; 2], iterations: usize, residual: f64, tol: f64) -> Result<SelfConsistentState> {
        Ok(SelfConsistentState {
            m_a: m[0],
            m_b: m[1],
            fields: effective_fields(m[0], m[1], self.params),
            free_energy_per_site: free_energy_per_site(m[0], m[1], self.params, self.t)?,
            iterations,
            residual,
            converged: residual < tol,
        })
    }
}

fn solve_from_seed(
    map: &FixedPointMap<'_>,
    config: &SolverConfig,
    seed: (f64, f64),
) -> Result<SelfConsistentState> {
    let tol = config.tolerance;
    let mut m = [seed.0.clamp(-0.5, 0.5), seed.1.clamp(-0.5, 0.5)];
    let mut eta = config.damping;
    let mut prev_res = f64::INFINITY;
    let mut prev_sign = 0.0;
    let mut alternations = 0;
    let mut res = f64::INFINITY;

    for it in 0..config.max_iterations {
        let (r, current) = map.residual(m);
        res = current;
        if res < tol {
            // polish so that twins from different seeds coincide
            for _ in 0..2 {
                match map.newton_step(m, r) {
                    Some(next) => {
                        let (_, res_next) = map.residual(next);
                        if res_next < res {
                            m = next;
                            res = res_next;
                        } else {
                            break;
                        }
                    }
                    None => break,
                }
            }
            return map.state(m, it, res, tol);
        }

        let lead = if r[0].abs() >= r[1].abs() { r[0] } else { r[1] };
        let sign = lead.signum();
        if sign != 0.0 && sign == -prev_sign {
            alternations += 1;
        } else {
            alternations = 0;
        }
        prev_sign = sign;
        if alternations >= OSCILLATION_WINDOW && eta > MIN_DAMPING {
            eta = (0.5 * eta).max(MIN_DAMPING);
            alternations = 0;
        }

        // slow linear convergence: try a Newton jump, keep it only if it helps
        if it >= 8 && res > 0.3 * prev_res {
            if let Some(next) = map.newton_step(m, r) {
                let (_, res_next) = map.residual(next);
                if res_next < res {
                    m = next;
                    prev_res = res;
                    continue;
                }
            }
        }

        m = [m[0] + eta * r[0], m[1] + eta * r[1]];
        prev_res = res;
    }
    map.state(m, config.max_iterations, res, tol)
}

/// Runs the damped fixed-point iteration from every seed and returns the
/// distinct end states. States that exhausted `max_iterations` are included
/// with `converged = false`.
pub fn solve_self_consistent(
    params: &ModelParams,
    t: f64,
    config: &SolverConfig,
) -> Result<Vec<SelfConsistentState>> {
    check_temperature(t)?;
    config.validate()?;
    let map = FixedPointMap { params, t };
    let radius = 10.0 * config.tolerance;
    let mut out: Vec<SelfConsistentState> = Vec::new();
    for &seed in &config.seeds {
        let state = solve_from_seed(&map, config, seed)?;
        let twin = out.iter().any(|s| {
            s.converged == state.converged
                && (s.m_a - state.m_a).abs().max((s.m_b - state.m_b).abs()) <= radius
        });
        if !twin {
            out.push(state);
        }
    }
    Ok(out)
}

/// Converged state of minimal free energy. Ties within `1e-12` go to the
/// larger `m_a`.
pub fn select_equilibrium(states: &[SelfConsistentState]) -> Result<SelfConsistentState> {
    let converged: Vec<&SelfConsistentState> = states.iter().filter(|s| s.converged).collect();
    let f_min = converged
        .iter()
        .map(|s| s.free_energy_per_site)
        .fold(f64::INFINITY, f64::min);
    converged
        .into_iter()
        .filter(|s| s.free_energy_per_site <= f_min + 1e-12)
        .max_by(|a, b| a.m_a.total_cmp(&b.m_a))
        .cloned()
        .ok_or(Error::NoConvergedBranch(states.len()))
}

/// Selected equilibrium together with the full branch list.
#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub state: SelfConsistentState,
    pub branches: Vec<SelfConsistentState>,
}

impl Equilibrium {
    /// Number of distinct converged branches.
    pub fn branch_count(&self) -> usize {
        self.branches.iter().filter(|s| s.converged).count()
    }
}

/// Solves and selects in one call. Fails with `NonConvergence` when no seed
/// converged.
pub fn equilibrium(params: &ModelParams, t: f64, config: &SolverConfig) -> Result<Equilibrium> {
    let branches = solve_self_consistent(params, t, config)?;
    match select_equilibrium(&branches) {
        Ok(state) => Ok(Equilibrium { state, branches }),
        Err(_) => Err(Error::NonConvergence {
            t,
            h: params.h,
            residual: branches.iter().map(|s| s.residual).fold(f64::INFINITY, f64::min),
        }),
    }
}

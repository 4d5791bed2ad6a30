//! Pairwise thermal entanglement of a trimer in its effective field.
//!
//! Tracing one site out of the thermal trimer state leaves an X-shaped
//! two-qubit matrix with entries `u` (both up), `v` (both down), `w` (the two
//! antiparallel diagonals) and a real coherence `y` between `|01>` and
//! `|10>`. The closed forms are evaluated in log space so they stay finite at
//! `T -> 0`.

use nalgebra::{Matrix4, SymmetricEigen};

use crate::error::{check_temperature, Error, Result};
use crate::mean_field::{equilibrium, SolverConfig};
use crate::numeric::{ln_abs_expm1, log_sum_exp};
use crate::trimer::{trimer_partition, EffectiveFields, ModelParams, C64};

pub type TwoQubitMatrix = Matrix4<C64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XState {
    /// `<11|rho12|11>` (both spins up), normalized.
    pub u: f64,
    /// `<01|rho12|01> = <10|rho12|10>`, normalized.
    pub w: f64,
    /// `<00|rho12|00>` (both spins down), normalized.
    pub v: f64,
    /// `<01|rho12|10>`, normalized.
    pub y: f64,
    /// `ln Z_0a`.
    pub ln_z: f64,
    /// Unnormalized magnitudes, `ln u`, `ln w`, `ln v`, `ln |y|`.
    pub ln_u: f64,
    pub ln_w: f64,
    pub ln_v: f64,
    pub ln_abs_y: f64,
    pub lambda_aa: f64,
    pub gamma_a: f64,
    pub t: f64,
}

impl XState {
    /// Normalized `rho12` in the basis `|00>, |01>, |10>, |11>`.
    pub fn to_matrix(&self) -> TwoQubitMatrix {
        let mut m = TwoQubitMatrix::zeros();
        m[(0, 0)] = C64::new(self.v, 0.0);
        m[(1, 1)] = C64::new(self.w, 0.0);
        m[(2, 2)] = C64::new(self.w, 0.0);
        m[(3, 3)] = C64::new(self.u, 0.0);
        m[(1, 2)] = C64::new(self.y, 0.0);
        m[(2, 1)] = C64::new(self.y, 0.0);
        m
    }

    /// Unnormalized trace `u + 2w + v`, in log form.
    pub fn ln_trace(&self) -> f64 {
        log_sum_exp(&[self.ln_u, std::f64::consts::LN_2 + self.ln_w, self.ln_v])
    }
}

pub fn reduced_density_matrix(fields: &EffectiveFields, t: f64) -> Result<XState> {
    check_temperature(t)?;
    let g = fields.gamma_a / t;
    let l = fields.lambda_aa / t;
    let ln3 = 3f64.ln();
    let ln2 = std::f64::consts::LN_2;
    let base = -0.25 * (2.0 * g + 3.0 * l) - ln3;

    let ln_u = 0.25 * (2.0 * g - 3.0 * l) - ln3 + log_sum_exp(&[0.0, ln3 + g, ln2 + 1.5 * l]);
    let ln_v = -0.75 * (2.0 * g + l) - ln3 + log_sum_exp(&[ln3, g, ln2 + g + 1.5 * l]);
    let ln_pair = log_sum_exp(&[0.0, g]);
    let ln_w = base + ln_pair + log_sum_exp(&[0.0, ln2 + 1.5 * l]);
    let (ln_abs_y, sign_y) = if fields.lambda_aa == 0.0 {
        (f64::NEG_INFINITY, 0.0)
    } else {
        (base + ln_pair + ln_abs_expm1(1.5 * l), -fields.lambda_aa.signum())
    };

    let ln_z = trimer_partition(fields, t)?.ln_z;
    Ok(XState {
        u: (ln_u - ln_z).exp(),
        w: (ln_w - ln_z).exp(),
        v: (ln_v - ln_z).exp(),
        y: sign_y * (ln_abs_y - ln_z).exp(),
        ln_z,
        ln_u,
        ln_w,
        ln_v,
        ln_abs_y,
        lambda_aa: fields.lambda_aa,
        gamma_a: fields.gamma_a,
        t,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConcurrenceMethod {
    ClosedForm,
    WoottersOracle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcurrenceInputs {
    pub t: f64,
    pub h: Option<f64>,
    pub gamma_a: f64,
    pub lambda_aa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcurrenceResult {
    pub value: f64,
    pub method: ConcurrenceMethod,
    pub inputs: Option<ConcurrenceInputs>,
}

/// `C = 2 max(|y| - sqrt(u v), 0)` on the normalized entries.
pub fn concurrence_xstate(x: &XState) -> ConcurrenceResult {
    let abs_y = (x.ln_abs_y - x.ln_z).exp();
    let sqrt_uv = (0.5 * (x.ln_u + x.ln_v) - x.ln_z).exp();
    ConcurrenceResult {
        value: (2.0 * (abs_y - sqrt_uv)).max(0.0),
        method: ConcurrenceMethod::ClosedForm,
        inputs: Some(ConcurrenceInputs {
            t: x.t,
            h: None,
            gamma_a: x.gamma_a,
            lambda_aa: x.lambda_aa,
        }),
    }
}

const DENSITY_TOL: f64 = 1e-10;

fn validate_density(rho: &TwoQubitMatrix) -> Result<()> {
    let hermitian_gap = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if hermitian_gap > DENSITY_TOL {
        return Err(Error::InvalidDensityMatrix(format!("not Hermitian (gap {hermitian_gap:e})")));
    }
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > DENSITY_TOL {
        return Err(Error::InvalidDensityMatrix(format!("trace {tr} != 1")));
    }
    let min_eig = SymmetricEigen::new(*rho).eigenvalues.min();
    if min_eig < -DENSITY_TOL {
        return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min_eig:e}")));
    }
    Ok(())
}

fn hermitian_sqrt(m: &TwoQubitMatrix) -> TwoQubitMatrix {
    let eig = SymmetricEigen::new(*m);
    let root = eig.eigenvalues.map(|e| C64::new(e.max(0.0).sqrt(), 0.0));
    let vecs = eig.eigenvectors;
    vecs * TwoQubitMatrix::from_diagonal(&root) * vecs.adjoint()
}

/// Wootters concurrence of an arbitrary two-qubit density matrix: square
/// roots of the eigenvalues of `rho (sy x sy) rho* (sy x sy)` in descending
/// order, `max(l1 - l2 - l3 - l4, 0)`.
///
/// The spectrum is taken from the Hermitian form
/// `sqrt(rho) (sy x sy) rho* (sy x sy) sqrt(rho)`, which has the same
/// eigenvalues.
pub fn concurrence_wootters(rho: &TwoQubitMatrix) -> Result<ConcurrenceResult> {
    validate_density(rho)?;
    let mut flip = TwoQubitMatrix::zeros();
    flip[(0, 3)] = C64::new(-1.0, 0.0);
    flip[(1, 2)] = C64::new(1.0, 0.0);
    flip[(2, 1)] = C64::new(1.0, 0.0);
    flip[(3, 0)] = C64::new(-1.0, 0.0);
    let tilde = flip * rho.conjugate() * flip;
    let root = hermitian_sqrt(rho);
    let r = root * tilde * root;
    let r = (r + r.adjoint()) * C64::new(0.5, 0.0);
    let mut l: Vec<f64> = SymmetricEigen::new(r)
        .eigenvalues
        .iter()
        .map(|&e| e.max(0.0).sqrt())
        .collect();
    l.sort_by(|a, b| b.total_cmp(a));
    Ok(ConcurrenceResult {
        value: (l[0] - l[1] - l[2] - l[3]).max(0.0),
        method: ConcurrenceMethod::WoottersOracle,
        inputs: None,
    })
}

/// Concurrence of the equilibrium branch at `(params, t)`.
pub fn concurrence_at(params: &ModelParams, t: f64, config: &SolverConfig) -> Result<ConcurrenceResult> {
    let eq = equilibrium(params, t, config)?;
    let x = reduced_density_matrix(&eq.state.fields, t)?;
    let mut c = concurrence_xstate(&x);
    if let Some(inputs) = c.inputs.as_mut() {
        inputs.h = Some(params.h);
    }
    Ok(c)
}

//! Exact treatment of a single Heisenberg trimer and a single Ising monomer
//! in effective fields.
//!
//! The trimer Hamiltonian is
//! `lambda (S1.S2 + S2.S3 + S1.S3) - gamma_a (S1z + S2z + S3z)` with
//! spin-1/2 operators `S = sigma/2`, written on the product basis
//! `|000>, |001>, ..., |111>` (site 1 is the most significant bit and `|1>`
//! is spin-up).

use nalgebra::{Complex, SMatrix, SVector};

use crate::error::{check_temperature, Result};
use crate::numeric::{boltzmann_weights, ln_1p_exp, ln_2cosh, scaled_cosh};

pub type C64 = Complex<f64>;
pub type TrimerMatrix = SMatrix<f64, 8, 8>;
pub type TrimerOperator = SMatrix<C64, 8, 8>;
pub type TrimerVector = SVector<C64, 8>;

/// Physical couplings and field. Temperature is passed separately to every
/// thermal operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Intra-trimer Heisenberg coupling (`> 0` antiferromagnetic).
    pub j_aa: f64,
    /// Trimer-monomer Ising coupling (`> 0` ferromagnetic).
    pub j_ab: f64,
    /// Uniform external field.
    pub h: f64,
}

impl ModelParams {
    pub fn new(j_aa: f64, j_ab: f64, h: f64) -> Self {
        Self { j_aa, j_ab, h }
    }

    /// Builds the couplings from `J_aa` and the ratio `alpha = J_ab / |J_aa|`,
    /// so the sign of `J_ab` follows `alpha` for either sign of `J_aa`.
    pub fn from_ratio(j_aa: f64, alpha: f64, h: f64) -> Self {
        Self { j_aa, j_ab: alpha * j_aa.abs(), h }
    }

    pub fn alpha(&self) -> f64 {
        self.j_ab / self.j_aa.abs()
    }

    pub fn with_field(self, h: f64) -> Self {
        Self { h, ..self }
    }
}

/// Variational parameters of the trial Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveFields {
    pub lambda_aa: f64,
    /// Field acting on the trimer spins.
    pub gamma_a: f64,
    /// Field acting on the monomer spins.
    pub gamma_b: f64,
}

impl EffectiveFields {
    pub fn new(lambda_aa: f64, gamma_a: f64, gamma_b: f64) -> Self {
        Self { lambda_aa, gamma_a, gamma_b }
    }
}

/// The eight trimer levels with their quantum numbers, indexed `0..8` for
/// `E_1..E_8`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrimerSpectrum {
    pub energies: [f64; 8],
    /// Total `S^z` of each eigenvector.
    pub total_sz: [f64; 8],
    /// Eigenvalue of the cyclic site permutation `|s1 s2 s3> -> |s3 s1 s2>`.
    pub shift_eigenvalue: [C64; 8],
}

impl TrimerSpectrum {
    pub fn ground_energy(&self) -> f64 {
        self.energies.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

const TOTAL_SZ: [f64; 8] = [-1.5, -0.5, -0.5, -0.5, 0.5, 0.5, 0.5, 1.5];

fn q_power(k: u32) -> C64 {
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI * f64::from(k % 3) / 3.0)
}

pub fn trimer_energies(fields: &EffectiveFields) -> TrimerSpectrum {
    let l = fields.lambda_aa;
    let g = fields.gamma_a;
    let doublet_down = 0.25 * (-3.0 * l + 2.0 * g);
    let doublet_up = 0.25 * (-3.0 * l - 2.0 * g);
    TrimerSpectrum {
        energies: [
            0.75 * (l + 2.0 * g),
            doublet_down,
            doublet_down,
            0.25 * (3.0 * l + 2.0 * g),
            doublet_up,
            doublet_up,
            0.25 * (3.0 * l - 2.0 * g),
            0.75 * (l - 2.0 * g),
        ],
        total_sz: TOTAL_SZ,
        shift_eigenvalue: [
            q_power(0),
            q_power(1),
            q_power(2),
            q_power(0),
            q_power(1),
            q_power(2),
            q_power(0),
            q_power(0),
        ],
    }
}

/// The field-independent eigenbasis `psi_1..psi_8`.
pub fn trimer_eigenvectors() -> [TrimerVector; 8] {
    let s = 1.0 / 3f64.sqrt();
    let one = C64::new(1.0, 0.0);
    let q = q_power(1);
    let q2 = q_power(2);
    let build = |amps: &[(usize, C64)]| {
        let mut v = TrimerVector::zeros();
        for &(i, a) in amps {
            v[i] = a;
        }
        v
    };
    [
        build(&[(0b000, one)]),
        build(&[(0b001, q * s), (0b010, q2 * s), (0b100, one * s)]),
        build(&[(0b001, q2 * s), (0b010, q * s), (0b100, one * s)]),
        build(&[(0b001, one * s), (0b010, one * s), (0b100, one * s)]),
        build(&[(0b110, q * s), (0b101, q2 * s), (0b011, one * s)]),
        build(&[(0b110, q2 * s), (0b101, q * s), (0b011, one * s)]),
        build(&[(0b110, one * s), (0b101, one * s), (0b011, one * s)]),
        build(&[(0b111, one)]),
    ]
}

fn site_sz(state: usize, site: usize) -> f64 {
    if state & (0b100 >> site) != 0 {
        0.5
    } else {
        -0.5
    }
}

pub fn build_trimer_hamiltonian(fields: &EffectiveFields) -> TrimerMatrix {
    const PAIRS: [(usize, usize); 3] = [(0, 1), (1, 2), (0, 2)];
    let l = fields.lambda_aa;
    let g = fields.gamma_a;
    let mut h = TrimerMatrix::zeros();
    for b in 0..8 {
        let sz: Vec<f64> = (0..3).map(|i| site_sz(b, i)).collect();
        h[(b, b)] = PAIRS.iter().map(|&(i, j)| l * sz[i] * sz[j]).sum::<f64>()
            - g * sz.iter().sum::<f64>();
        for &(i, j) in &PAIRS {
            if sz[i] != sz[j] {
                let flipped = b ^ (0b100 >> i) ^ (0b100 >> j);
                h[(flipped, b)] += 0.5 * l;
            }
        }
    }
    h
}

/// A partition function kept in log form; the linear value is only
/// meaningful when representable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPartition {
    pub ln_z: f64,
}

impl LogPartition {
    /// Linear value; `+inf` on overflow.
    pub fn value(&self) -> f64 {
        self.ln_z.exp()
    }

    pub fn linear(&self) -> Option<f64> {
        let z = self.ln_z.exp();
        (z.is_finite() && z > 0.0).then_some(z)
    }

    pub fn free_energy(&self, t: f64) -> f64 {
        -t * self.ln_z
    }
}

/// Pieces of the hyperbolic closed form shared by the partition function and
/// the magnetization map: `x = gamma_a / 2T`, `ln g` with
/// `g = 2 exp(3 lambda / 2T) + 1`, and a common scale `k` such that every
/// term times `exp(-k)` is at most of order one.
pub(crate) struct HyperbolicParts {
    pub x: f64,
    pub ln_g: f64,
    pub k: f64,
}

pub(crate) fn hyperbolic_parts(fields: &EffectiveFields, t: f64) -> HyperbolicParts {
    let x = fields.gamma_a / (2.0 * t);
    let ln_g = ln_1p_exp(1.5 * fields.lambda_aa / t, 2.0);
    let k = (3.0 * x.abs()).max(ln_g + x.abs());
    HyperbolicParts { x, ln_g, k }
}

/// `Z_0a = sum_k exp(-E_k / T) = 2 exp(-3 lambda / 4T) [cosh(3x) + (2 exp(3 lambda / 2T) + 1) cosh(x)]`.
pub fn trimer_partition(fields: &EffectiveFields, t: f64) -> Result<LogPartition> {
    check_temperature(t)?;
    let p = hyperbolic_parts(fields, t);
    let bracket = scaled_cosh(3.0 * p.x, p.k) + scaled_cosh(p.x, p.k - p.ln_g);
    Ok(LogPartition {
        ln_z: std::f64::consts::LN_2 - 0.75 * fields.lambda_aa / t + p.k + bracket.ln(),
    })
}

pub fn trimer_free_energy(fields: &EffectiveFields, t: f64) -> Result<f64> {
    Ok(trimer_partition(fields, t)?.free_energy(t))
}

/// `Z_0b = 2 cosh(gamma_b / 2T)`.
pub fn monomer_partition(gamma_b: f64, t: f64) -> Result<LogPartition> {
    check_temperature(t)?;
    Ok(LogPartition {
        ln_z: ln_2cosh(gamma_b / (2.0 * t)),
    })
}

pub fn monomer_free_energy(gamma_b: f64, t: f64) -> Result<f64> {
    Ok(monomer_partition(gamma_b, t)?.free_energy(t))
}

/// Full 8x8 thermal state of the trimer in the product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TrimerDensityMatrix {
    pub entries: TrimerOperator,
}

impl TrimerDensityMatrix {
    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    /// Largest imaginary part among the entries.
    pub fn max_imaginary(&self) -> f64 {
        self.entries.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Real part, rejecting imaginary residues above `1e-12`.
    pub fn to_real(&self) -> Result<TrimerMatrix> {
        let residue = self.max_imaginary();
        if residue > 1e-12 {
            return Err(crate::Error::ImaginaryResidue(residue));
        }
        Ok(self.entries.map(|z| z.re))
    }

    /// Reduced two-site state with the last site traced out, in the basis
    /// `|s1 s2>` ordered by binary index.
    pub fn trace_out_site3(&self) -> SMatrix<C64, 4, 4> {
        let mut out = SMatrix::<C64, 4, 4>::zeros();
        for r in 0..4 {
            for c in 0..4 {
                out[(r, c)] = (0..2)
                    .map(|s3| self.entries[(2 * r + s3, 2 * c + s3)])
                    .sum();
            }
        }
        out
    }
}

/// `rho = (1/Z_0a) sum_k exp(-E_k/T) |psi_k><psi_k|`, with the weights shifted
/// by the ground energy before exponentiation.
pub fn thermal_density_matrix(fields: &EffectiveFields, t: f64) -> Result<TrimerDensityMatrix> {
    check_temperature(t)?;
    let spectrum = trimer_energies(fields);
    let (weights, _) = boltzmann_weights(&spectrum.energies, t);
    let mut rho = TrimerOperator::zeros();
    for (psi, w) in trimer_eigenvectors().iter().zip(weights) {
        rho += psi * psi.adjoint() * C64::new(w, 0.0);
    }
    Ok(TrimerDensityMatrix { entries: rho })
}

/// Mean and variance of the total trimer `S^z` in the thermal state.
pub(crate) fn total_sz_moments(fields: &EffectiveFields, t: f64) -> (f64, f64) {
    let spectrum = trimer_energies(fields);
    let (w, _) = boltzmann_weights(&spectrum.energies, t);
    let mean: f64 = w.iter().zip(TOTAL_SZ).map(|(p, s)| p * s).sum();
    let second: f64 = w.iter().zip(TOTAL_SZ).map(|(p, s)| p * s * s).sum();
    (mean, (second - mean * mean).max(0.0))
}

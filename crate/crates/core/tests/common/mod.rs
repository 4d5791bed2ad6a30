//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{Complex, Matrix4, SMatrix, Schur, SymmetricEigen};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

pub type C64 = Complex<f64>;
pub type M8 = SMatrix<f64, 8, 8>;

/// Eigenvalues of a real symmetric 8x8 matrix, ascending.
pub fn dense_spectrum(h: &M8) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(*h).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// `exp(a)` by scaling and squaring of a degree-24 Taylor polynomial.
pub fn expm(a: &M8) -> M8 {
    let norm = a.iter().map(|x| x.abs()).fold(0.0, f64::max) * 8.0;
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let x = a * scale;
    let mut term = M8::identity();
    let mut sum = M8::identity();
    for k in 1..=24 {
        term = term * x / k as f64;
        sum += term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

/// Thermal state `exp(-(H - s)/T) / tr(...)` with `s` the Gershgorin lower
/// bound of the spectrum, so the exponent is negative semi-definite.
pub fn thermal_state_expm(h: &M8, t: f64) -> M8 {
    let shift = (0..8)
        .map(|i| h[(i, i)] - (0..8).filter(|&j| j != i).map(|j| h[(i, j)].abs()).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let a = -(h - M8::identity() * shift) / t;
    let e = expm(&a);
    let tr = e.trace();
    e / tr
}

/// `tr_3 rho` in the basis `|s1 s2>`, for a state on `|s1 s2 s3>` with site 1
/// the most significant bit.
pub fn partial_trace_last(rho: &M8) -> Matrix4<f64> {
    let mut out = Matrix4::zeros();
    for s1 in 0..2 {
        for s2 in 0..2 {
            for r1 in 0..2 {
                for r2 in 0..2 {
                    let mut acc = 0.0;
                    for s3 in 0..2 {
                        acc += rho[(4 * s1 + 2 * s2 + s3, 4 * r1 + 2 * r2 + s3)];
                    }
                    out[(2 * s1 + s2, 2 * r1 + r2)] = acc;
                }
            }
        }
    }
    out
}

/// Brute-force `ln sum_k exp(-E_k/T)` with the minimum factored out.
pub fn ln_boltzmann_sum(energies: &[f64], t: f64) -> f64 {
    let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let s: f64 = energies.iter().map(|e| (-(e - e0) / t).exp()).sum();
    -e0 / t + s.ln()
}

/// Wootters concurrence from the non-Hermitian product
/// `rho (sy x sy) rho* (sy x sy)`, eigenvalues via a complex Schur form.
pub fn wootters_schur(rho: &Matrix4<C64>) -> f64 {
    let sy = nalgebra::Matrix2::new(
        C64::new(0.0, 0.0),
        C64::new(0.0, -1.0),
        C64::new(0.0, 1.0),
        C64::new(0.0, 0.0),
    );
    let flip = sy.kronecker(&sy);
    let r = rho * flip * rho.conjugate() * flip;
    let tri = Schur::new(r).unpack().1;
    let mut l: Vec<f64> = (0..4).map(|i| tri[(i, i)].re.max(0.0).sqrt()).collect();
    l.sort_by(|a, b| b.total_cmp(a));
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

pub fn real_to_complex4(m: &Matrix4<f64>) -> Matrix4<C64> {
    m.map(|x| C64::new(x, 0.0))
}

/// Runner with a fixed seed so failures reproduce.
pub fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config { cases, failure_persistence: None, ..Config::default() },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    )
}

/// Random normalized X-state with real coherence.
pub fn x_state_strategy() -> impl Strategy<Value = Matrix4<C64>> {
    (0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b, c, s)| {
        let total = a + 2.0 * b + c + 1e-12;
        let (u, w, v) = (a / total, b / total, c / total);
        let y = s * w;
        let mut m = Matrix4::<C64>::zeros();
        m[(0, 0)] = C64::new(v, 0.0);
        m[(1, 1)] = C64::new(w, 0.0);
        m[(2, 2)] = C64::new(w, 0.0);
        m[(3, 3)] = C64::new(u, 0.0);
        m[(1, 2)] = C64::new(y, 0.0);
        m[(2, 1)] = C64::new(y, 0.0);
        m
    })
}

/// Closed-form X-state concurrence `2 max(|y| - sqrt(uv), 0)` written out
/// directly from the matrix entries.
pub fn x_state_formula(m: &Matrix4<C64>) -> f64 {
    2.0 * (m[(1, 2)].norm() - (m[(0, 0)].re * m[(3, 3)].re).sqrt()).max(0.0)
}

/// Per-site variational free energy assembled term by term from the
/// Boltzmann sums of the eight trimer levels and the two monomer levels.
pub fn free_energy_oracle(m_a: f64, m_b: f64, j_aa: f64, j_ab: f64, h: f64, t: f64) -> f64 {
    let gamma_a = 2.0 * j_ab * m_b + h;
    let gamma_b = 4.0 * j_ab * m_a + h;
    let fields = tkl_meanfield::EffectiveFields::new(j_aa, gamma_a, gamma_b);
    let levels = dense_spectrum(&tkl_meanfield::build_trimer_hamiltonian(&fields));
    let f_a = -t * ln_boltzmann_sum(&levels, t);
    let f_b = -t * ln_boltzmann_sum(&[-0.5 * gamma_b, 0.5 * gamma_b], t);
    (2.0 / 9.0) * (f_a + 1.5 * f_b + 6.0 * j_ab * m_a * m_b)
}

/// Strict interior local maxima whose height exceeds both the nearest
/// minimum on each side by `prominence`.
pub fn prominent_maxima(values: &[f64], prominence: f64) -> Vec<usize> {
    let mut out = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        if !(values[i] > values[i - 1] && values[i] >= values[i + 1]) {
            continue;
        }
        let mut lmin = values[i];
        for j in (0..i).rev() {
            if values[j] > values[i] {
                break;
            }
            lmin = lmin.min(values[j]);
        }
        let mut rmin = values[i];
        for &v in &values[i + 1..] {
            if v > values[i] {
                break;
            }
            rmin = rmin.min(v);
        }
        if values[i] - lmin > prominence && values[i] - rmin > prominence {
            out.push(i);
        }
    }
    out
}

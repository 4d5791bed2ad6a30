mod common;

use common::*;
use nalgebra::Matrix4;
use proptest::prelude::*;
use tkl_meanfield::{
    build_trimer_hamiltonian, reduced_density_matrix, thermal_density_matrix, trimer_eigenvectors,
    trimer_energies, trimer_partition, EffectiveFields,
};

fn fields(l: f64, g: f64) -> EffectiveFields {
    EffectiveFields::new(l, g, 0.0)
}

#[test]
fn closed_form_levels_match_dense_diagonalization() {
    runner(200)
        .run(&(-3.0f64..3.0, -3.0f64..3.0), |(l, g)| {
            let f = fields(l, g);
            let mut closed = trimer_energies(&f).energies.to_vec();
            closed.sort_by(f64::total_cmp);
            let dense = dense_spectrum(&build_trimer_hamiltonian(&f));
            for (a, b) in closed.iter().zip(&dense) {
                prop_assert!((a - b).abs() < 1e-12, "{a} vs {b} at ({l}, {g})");
            }
            Ok(())
        })
        .unwrap();
}

#[test]
fn eigenvectors_diagonalize_the_hamiltonian() {
    runner(50)
        .run(&(-3.0f64..3.0, -3.0f64..3.0), |(l, g)| {
            let f = fields(l, g);
            let h = build_trimer_hamiltonian(&f).map(|x| C64::new(x, 0.0));
            let spectrum = trimer_energies(&f);
            for (psi, e) in trimer_eigenvectors().iter().zip(spectrum.energies) {
                let residual = (h * psi - psi * C64::new(e, 0.0)).norm();
                prop_assert!(residual < 1e-12);
            }
            Ok(())
        })
        .unwrap();
}

#[test]
fn eigenvectors_are_orthonormal() {
    let v = trimer_eigenvectors();
    for i in 0..8 {
        for j in 0..8 {
            let dot = v[i].dotc(&v[j]);
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((dot - C64::new(expect, 0.0)).norm() < 1e-12, "<{i}|{j}> = {dot}");
        }
    }
}

#[test]
fn quantum_numbers_match_the_basis() {
    let spectrum = trimer_energies(&fields(0.3, 0.1));
    for (k, psi) in trimer_eigenvectors().iter().enumerate() {
        // total S^z from the populated basis states, |1> = up
        for (b, amp) in psi.iter().enumerate() {
            if amp.norm() > 0.0 {
                let ups = (b as u32).count_ones() as f64;
                assert_eq!(ups - 1.5, spectrum.total_sz[k]);
            }
        }
        // cyclic shift |s1 s2 s3> -> |s3 s1 s2>
        let mut shifted = *psi;
        for b in 0..8 {
            let target = ((b & 1) << 2) | (b >> 1);
            shifted[target] = psi[b];
        }
        let ev = spectrum.shift_eigenvalue[k];
        assert!((shifted - psi * ev).norm() < 1e-12 || (shifted - psi * ev.conj()).norm() < 1e-12);
    }
    let q = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    assert!((spectrum.shift_eigenvalue[1] - q).norm() < 1e-15);
}

#[test]
fn partition_function_matches_boltzmann_sum() {
    runner(200)
        .run(&(-2.0f64..2.0, -3.0f64..3.0, 0.01f64..5.0), |(l, g, t)| {
            let f = fields(l, g);
            let oracle = ln_boltzmann_sum(&dense_spectrum(&build_trimer_hamiltonian(&f)), t);
            let ln_z = trimer_partition(&f, t).unwrap().ln_z;
            prop_assert!((ln_z - oracle).abs() < 1e-10 * oracle.abs().max(1.0));
            Ok(())
        })
        .unwrap();
}

#[test]
fn log_partition_is_finite_at_very_low_temperature() {
    runner(100)
        .run(&(-2.0f64..2.0, -3.0f64..3.0), |(l, g)| {
            let f = fields(l, g);
            let t = 1e-4;
            let z = trimer_partition(&f, t).unwrap();
            prop_assert!(z.ln_z.is_finite());
            let oracle = ln_boltzmann_sum(&trimer_energies(&f).energies, t);
            prop_assert!((z.ln_z - oracle).abs() < 1e-10 * oracle.abs().max(1.0));
            Ok(())
        })
        .unwrap();
}

#[test]
fn zero_coupling_partition_counts_states() {
    for t in [0.1, 1.0, 37.0] {
        let z = trimer_partition(&fields(0.0, 0.0), t).unwrap();
        assert!((z.value() - 8.0).abs() < 1e-12);
    }
}

#[test]
fn thermal_state_matches_matrix_exponential() {
    runner(60)
        .run(&(-2.0f64..2.0, -2.0f64..2.0, 0.2f64..3.0), |(l, g, t)| {
            let f = fields(l, g);
            let oracle = thermal_state_expm(&build_trimer_hamiltonian(&f), t);
            let rho = thermal_density_matrix(&f, t).unwrap().to_real().unwrap();
            prop_assert!((rho - oracle).abs().max() < 1e-11);
            Ok(())
        })
        .unwrap();
}

#[test]
fn reduced_state_matches_partial_trace_of_exponential() {
    runner(200)
        .run(&(-2.0f64..2.0, -2.0f64..2.0, 0.2f64..3.0), |(l, g, t)| {
            let f = fields(l, g);
            let oracle = partial_trace_last(&thermal_state_expm(&build_trimer_hamiltonian(&f), t));
            let x = reduced_density_matrix(&f, t).unwrap();
            let closed: Matrix4<f64> = x.to_matrix().map(|z| z.re);
            prop_assert!((closed - oracle).abs().max() < 1e-11, "{closed} {oracle}");
            Ok(())
        })
        .unwrap();
}

#[test]
fn library_partial_trace_agrees_with_oracle() {
    let f = fields(1.0, 0.4);
    let rho = thermal_density_matrix(&f, 0.3).unwrap();
    let oracle = partial_trace_last(&rho.to_real().unwrap());
    let lib = rho.trace_out_site3().map(|z| z.re);
    assert!((lib - oracle).abs().max() < 1e-15);
}

#[test]
fn reduced_state_trace_equals_partition_function() {
    runner(500)
        .run(&(-3.0f64..3.0, -3.0f64..3.0, 0.005f64..5.0), |(l, g, t)| {
            let x = reduced_density_matrix(&fields(l, g), t).unwrap();
            // u + 2w + v = Z_0a, compared in log form
            let rel = (x.ln_trace() - x.ln_z).exp_m1().abs();
            prop_assert!(rel < 1e-12, "relative gap {rel}");
            Ok(())
        })
        .unwrap();
}

#[test]
fn infinite_temperature_state_is_maximally_mixed() {
    let rho = thermal_density_matrix(&fields(1.0, 0.3), 1e6).unwrap().to_real().unwrap();
    assert!((rho - common::M8::identity() / 8.0).abs().max() < 1e-6);
}

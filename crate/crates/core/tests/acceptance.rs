//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use proptest::prelude::*;
use tkl_meanfield::entanglement::concurrence_xstate;
use tkl_meanfield::{
    build_trimer_hamiltonian, concurrence_at, concurrence_wootters, detect_plateaus, equilibrium,
    reduced_density_matrix, saturation_field, specific_heat, trimer_energies, trimer_partition,
    zero_field_susceptibility, EffectiveFields, ModelParams, SolverConfig,
};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn bin(args: &[&str]) -> (Vec<u8>, Option<i32>) {
    let out = Command::new(env!("CARGO_BIN_EXE_tkl-meanfield"))
        .args(args)
        .env_remove("TKL_WORKERS")
        .output()
        .expect("binary runs");
    (out.stdout, out.status.code())
}

/// Header line and numeric cells (empty cells as NaN) of the CLI's CSV output.
fn parse_csv(bytes: &[u8]) -> (Vec<String>, Vec<Vec<String>>) {
    let text = String::from_utf8(bytes.to_vec()).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap_or("").split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn col(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).expect("column present");
    rows.iter().map(|r| r[i].parse().unwrap_or(f64::NAN)).collect()
}

fn kagome(h: f64) -> ModelParams {
    ModelParams::from_ratio(1.0, 0.025, h)
}

const TC: f64 = 0.0102062;

fn critical_temperature() -> Outcome {
    let start = Instant::now();
    let (out, code) = bin(&["tc", "--jaa", "1", "--alpha", "0.025"]);
    let elapsed = start.elapsed();
    let (header, rows) = parse_csv(&out);
    let tcs = col(&header, &rows, "Tc");
    let ok = code == Some(0)
        && tcs.len() == 2
        && tcs.iter().all(|t| (t - TC).abs() < 1e-4)
        && elapsed < Duration::from_secs(10);
    Outcome::new(ok, format!("onset {:.10}, linearized {:.10}, {elapsed:.2?}", tcs[0], tcs[1]))
}

fn threshold_coincidence() -> Outcome {
    let start = Instant::now();
    let (out, code) = bin(&["threshold", "--jaa", "1", "--alpha", "0.025", "--field", "0"]);
    let (header, rows) = parse_csv(&out);
    let t = col(&header, &rows, "T_threshold")[0];
    let (out, _) = bin(&["tc", "--jaa", "1", "--alpha", "0.025"]);
    let (header, rows) = parse_csv(&out);
    let tc = col(&header, &rows, "Tc")[0];
    let elapsed = start.elapsed();
    let ok = code == Some(0) && (t - tc).abs() < 1e-5 && elapsed < Duration::from_secs(30);
    Outcome::new(ok, format!("threshold {t:.10}, Tc {tc:.10}, gap {:.1e}, {elapsed:.2?}", (t - tc).abs()))
}

fn plateau_structure() -> Outcome {
    let start = Instant::now();
    let (out, code) = bin(&["sweep", "--jaa", "1", "--alpha", "0.025", "--temp", "0.01", "--field", "0.05:2:400", "--observables", "m_a"]);
    let elapsed = start.elapsed();
    let (header, rows) = parse_csv(&out);
    let h = col(&header, &rows, "H");
    let m = col(&header, &rows, "m_a");
    let curve: Vec<(f64, f64)> = h.iter().copied().zip(m.iter().copied()).collect();
    let coarse = detect_plateaus(&curve, 1e-3);
    let levels: Vec<f64> = coarse.iter().map(|p| p.level).collect();
    let two = levels.len() == 2
        && (levels[0] - 1.0 / 6.0).abs() < 1e-12
        && (levels[1] - 0.5).abs() < 1e-12;
    let saturated = detect_plateaus(&curve, 1e-6).iter().any(|p| p.level == 0.5);
    let jump = curve
        .windows(2)
        .find(|w| w[0].1 < 1.0 / 3.0 && w[1].1 >= 1.0 / 3.0)
        .map(|w| w[0].0 + (1.0 / 3.0 - w[0].1) * (w[1].0 - w[0].0) / (w[1].1 - w[0].1))
        .unwrap_or(f64::NAN);
    let ok = code == Some(0)
        && rows.len() == 400
        && two
        && saturated
        && (jump - 1.475).abs() < 0.01
        && elapsed < Duration::from_secs(60);
    let spans: Vec<String> = coarse
        .iter()
        .map(|p| format!("{:.4} on [{:.3}, {:.3}]", p.level, p.x_start, p.x_end))
        .collect();
    Outcome::new(ok, format!("plateaus {}; jump at H = {jump:.4}; {elapsed:.2?}", spans.join(", ")))
}

fn ground_state_concurrence() -> Outcome {
    let config = SolverConfig::default();
    let hs = saturation_field(1.0, 0.025).unwrap();
    let mut worst_plateau = 0.0f64;
    for h in [0.05, 0.25, 0.5, 0.75, 1.0, 1.25, 1.4] {
        let c = concurrence_at(&kagome(h), 0.002, &config).unwrap().value;
        worst_plateau = worst_plateau.max((c - 1.0 / 3.0).abs());
    }
    let mut worst_saturated = 0.0f64;
    for h in [hs + 0.1, 1.75, 2.0, 3.0, -2.0] {
        worst_saturated = worst_saturated.max(concurrence_at(&kagome(h), 0.002, &config).unwrap().value);
    }
    Outcome::new(
        worst_plateau < 1e-3 && worst_saturated < 1e-10,
        format!("max |C - 1/3| in phase I {worst_plateau:.2e}; max C saturated {worst_saturated:.2e}"),
    )
}

fn ferromagnetic_disentanglement() -> Outcome {
    let (out, code) = bin(&["grid", "--jaa", "-1", "--alpha", "0.025", "--temp", "0.005:2:20", "--field", "-2:2:20", "--observables", "C"]);
    let (header, rows) = parse_csv(&out);
    let c = col(&header, &rows, "C");
    let ok = code == Some(0) && c.len() == 400 && c.iter().all(|&x| x == 0.0);
    let max = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Outcome::new(ok, format!("{} points, max C = {max}", c.len()))
}

fn specific_heat_features() -> Outcome {
    let config = SolverConfig::default();
    let step = 1e-3;
    let below = specific_heat(&kagome(0.0), 0.98 * TC, step, &config).unwrap();
    let above = specific_heat(&kagome(0.0), 1.02 * TC, step, &config).unwrap();
    let jump = below - above;

    let (out, _) = bin(&["sweep", "--temp", "0.001:1.5:1500", "--field", "1.0", "--observables", "c"]);
    let (header, rows) = parse_csv(&out);
    let t = col(&header, &rows, "T");
    let c = col(&header, &rows, "c");
    let peaks: Vec<String> = prominent_maxima(&c, 1e-6)
        .into_iter()
        .map(|i| format!("T={:.3} c={:.4}", t[i], c[i]))
        .collect();
    Outcome::new(
        jump > 0.1 && peaks.len() == 2,
        format!(
            "6a {}: c(0.98Tc) - c(1.02Tc) = {jump:.4}; 6b {}: {} maxima at H=1.0 [{}]",
            if jump > 0.1 { "pass" } else { "fail" },
            if peaks.len() == 2 { "pass" } else { "fail" },
            peaks.len(),
            peaks.join(", ")
        ),
    )
}

fn susceptibility_divergence() -> Outcome {
    let config = SolverConfig::default();
    let chi: Vec<f64> = [2.0, 1.5, 1.2, 1.05]
        .iter()
        .map(|r| zero_field_susceptibility(&kagome(0.0), r * TC, &config).unwrap().value)
        .collect();
    let increasing = chi.windows(2).all(|w| w[1] > w[0]);
    let ratio = chi[3] / chi[0];
    Outcome::new(
        increasing && ratio > 10.0,
        format!("chi0 = {:.3?}, ratio {ratio:.2}", chi),
    )
}

fn oracle_suites() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut check = |name: &str, r: Result<(), String>| {
        if let Err(e) = r {
            failures.push(format!("{name}: {e}"));
        }
    };

    let r = runner(200).run(&(-3.0f64..3.0, -3.0f64..3.0), |(l, g)| {
        let f = EffectiveFields::new(l, g, 0.0);
        let mut closed = trimer_energies(&f).energies.to_vec();
        closed.sort_by(f64::total_cmp);
        let dense = dense_spectrum(&build_trimer_hamiltonian(&f));
        for (a, b) in closed.iter().zip(&dense) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        Ok(())
    });
    check("8a", r.map_err(|e| e.to_string()));

    let r = runner(200).run(&(-2.0f64..2.0, -2.0f64..2.0, 0.2f64..3.0), |(l, g, t)| {
        let f = EffectiveFields::new(l, g, 0.0);
        let oracle = partial_trace_last(&thermal_state_expm(&build_trimer_hamiltonian(&f), t));
        let closed = reduced_density_matrix(&f, t).unwrap().to_matrix().map(|z| z.re);
        prop_assert!((closed - oracle).abs().max() < 1e-11);
        Ok(())
    });
    check("8b", r.map_err(|e| e.to_string()));

    let r = runner(100).run(&x_state_strategy(), |rho| {
        let oracle = wootters_schur(&rho);
        prop_assert!((x_state_formula(&rho) - oracle).abs() < 1e-10);
        prop_assert!((concurrence_wootters(&rho).unwrap().value - oracle).abs() < 1e-10);
        Ok(())
    });
    check("8c", r.map_err(|e| e.to_string()));

    let r = runner(500).run(&(-3.0f64..3.0, -3.0f64..3.0, 0.005f64..5.0), |(l, g, t)| {
        let f = EffectiveFields::new(l, g, 0.0);
        let x = reduced_density_matrix(&f, t).unwrap();
        let z = trimer_partition(&f, t).unwrap().ln_z;
        // unnormalized u + 2w + v against Z_0a, both in log form
        let rel = (x.ln_trace() - z).exp_m1().abs();
        prop_assert!(rel < 1e-12, "relative gap {rel}");
        prop_assert!((concurrence_xstate(&x).value - wootters_schur(&x.to_matrix())).abs() < 1e-10);
        Ok(())
    });
    check("8d", r.map_err(|e| e.to_string()));

    let r = runner(20).run(&(0.1f64..2.0, -2.0f64..2.0), |(t, h)| {
        let f = |h: f64| equilibrium(&kagome(h), t, &SolverConfig::default()).unwrap().state;
        let s = f(h);
        let d = 1e-5;
        let df = (f(h + d).free_energy_per_site - f(h - d).free_energy_per_site) / (2.0 * d);
        prop_assert!(((2.0 * s.m_a + s.m_b) / 3.0 + df).abs() < 1e-6);
        Ok(())
    });
    check("8e", r.map_err(|e| e.to_string()));

    let elapsed = start.elapsed();
    let ok = failures.is_empty() && elapsed < Duration::from_secs(120);
    let detail = if failures.is_empty() {
        format!("a-e passed, {elapsed:.2?}")
    } else {
        failures.join("; ")
    };
    Outcome::new(ok, detail)
}

fn determinism() -> Outcome {
    let args = ["grid", "--jaa", "1", "--alpha", "0.025", "--temp", "0.002:0.6:30", "--field", "-2:2:30", "--continuation"];
    let runs: Vec<Vec<u8>> = ["1", "2", "4", "7"]
        .iter()
        .map(|w| bin(&[&args[..], &["--workers", w]].concat()).0)
        .collect();
    let identical = runs.windows(2).all(|w| w[0] == w[1]);
    let plain = ["grid", "--temp", "0.002:0.6:30", "--field", "-2:2:30"];
    let a = bin(&[&plain[..], &["--workers", "1"]].concat()).0;
    let b = bin(&[&plain[..], &["--workers", "4"]].concat()).0;
    Outcome::new(
        identical && a == b && !a.is_empty(),
        format!("{} bytes per run, worker counts 1, 2, 4, 7", runs[0].len()),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("critical temperature", critical_temperature),
        ("threshold coincidence", threshold_coincidence),
        ("plateau structure", plateau_structure),
        ("ground-state concurrence", ground_state_concurrence),
        ("ferromagnetic disentanglement", ferromagnetic_disentanglement),
        ("specific-heat features", specific_heat_features),
        ("susceptibility divergence", susceptibility_divergence),
        ("oracle suites", oracle_suites),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {} {}: {} ({})", i + 1, if o.pass { "PASS" } else { "FAIL" }, name, o.detail);
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}

//! Critical temperature, entanglement threshold, zero-temperature phases and
//! plateau detection.

use crate::entanglement::concurrence_at;
use crate::error::{Error, Result};
use crate::mean_field::{effective_fields, equilibrium, map_m_a, map_m_b, SolverConfig};
use crate::numeric::{bisect_indicator, bisect_root};
use crate::trimer::{trimer_energies, EffectiveFields, ModelParams};

/// Spontaneous `|m_a|` above this counts as ordered.
pub const ORDER_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalMethod {
    OnsetBisection,
    LinearizedMap,
}

impl CriticalMethod {
    pub fn name(&self) -> &'static str {
        match self {
            CriticalMethod::OnsetBisection => "onset-bisection",
            CriticalMethod::LinearizedMap => "linearized-map",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalResult {
    pub tc: f64,
    pub method: CriticalMethod,
    pub bracket: (f64, f64),
    /// For the linearized method: whether the cubic coefficient of the
    /// composed map is negative at the root (second-order transition).
    pub cubic_negative: Option<bool>,
}

fn require_positive_coupling(j_aa: f64) -> Result<()> {
    if j_aa > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("J_aa = {j_aa} must be > 0")))
    }
}

/// Bisects on "the zero-field equilibrium carries `|m_a| > 1e-8`".
pub fn critical_temperature_onset(
    j_aa: f64,
    alpha: f64,
    bracket: (f64, f64),
    tol: f64,
) -> Result<CriticalResult> {
    require_positive_coupling(j_aa)?;
    let params = ModelParams::from_ratio(j_aa, alpha, 0.0);
    let config = SolverConfig::default();
    let mut failure: Option<Error> = None;
    let mut ordered = |t: f64| -> bool {
        match equilibrium(&params, t, &config) {
            Ok(eq) => eq.state.m_a.abs() > ORDER_THRESHOLD,
            Err(e) => {
                failure.get_or_insert(e);
                false
            }
        }
    };
    let (lo, hi) = bracket;
    if !(ordered(lo) && !ordered(hi)) {
        return Err(failure.unwrap_or(Error::BracketFailure { lo, hi }));
    }
    let final_bracket = bisect_indicator(&mut ordered, lo, hi, tol);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(CriticalResult {
        tc: 0.5 * (final_bracket.0 + final_bracket.1),
        method: CriticalMethod::OnsetBisection,
        bracket: final_bracket,
        cubic_negative: None,
    })
}

/// Composed zero-field map `m_a -> m_b -> m_a'`.
fn composed_map(params: &ModelParams, t: f64, m_a: f64) -> f64 {
    let m_b = map_m_b(&effective_fields(m_a, 0.0, params), t);
    map_m_a(&effective_fields(m_a, m_b, params), t)
}

/// Linear coefficient `a(T)` of the composed map at `m = 0`.
pub fn linear_coefficient(params: &ModelParams, t: f64) -> f64 {
    let h = 5e-7;
    (composed_map(params, t, h) - composed_map(params, t, -h)) / (2.0 * h)
}

/// Cubic coefficient `b(T)` from `G(2h) - 2 G(h) = 6 b h^3 + O(h^5)`.
pub fn cubic_coefficient(params: &ModelParams, t: f64) -> f64 {
    let h = 1e-3;
    (composed_map(params, t, 2.0 * h) - 2.0 * composed_map(params, t, h)) / (6.0 * h * h * h)
}

/// Root of `a(T) = 1` for the series `m = a m + b m^3 + ...` of the composed
/// self-consistency map, with the sign of `b` checked at the root.
///
/// The slope of the trimer map at zero field lies between `1/(12T)` and
/// `5/(12T)` and the monomer slope is `1/(4T)`, so the root is bracketed by
/// `[0.99 |J_ab| / sqrt(6), 1.01 |J_ab|]`.
pub fn critical_temperature_linearized(j_aa: f64, alpha: f64, tol: f64) -> Result<CriticalResult> {
    require_positive_coupling(j_aa)?;
    let params = ModelParams::from_ratio(j_aa, alpha, 0.0);
    let j = params.j_ab.abs();
    let (lo, hi) = (0.99 * j / 6f64.sqrt(), 1.01 * j);
    if lo.is_nan() || lo <= 0.0 {
        return Err(Error::BracketFailure { lo, hi });
    }
    let (a, b) = bisect_root(|t| linear_coefficient(&params, t) - 1.0, lo, hi, tol)
        .ok_or(Error::BracketFailure { lo, hi })?;
    let tc = 0.5 * (a + b);
    Ok(CriticalResult {
        tc,
        method: CriticalMethod::LinearizedMap,
        bracket: (a, b),
        cubic_negative: Some(cubic_coefficient(&params, tc) < 0.0),
    })
}

/// Temperature above which the equilibrium concurrence vanishes, by
/// bisection at fixed field.
pub fn concurrence_threshold(
    params: &ModelParams,
    bracket: (f64, f64),
    tol: f64,
    config: &SolverConfig,
) -> Result<f64> {
    let mut failure: Option<Error> = None;
    let mut entangled = |t: f64| -> bool {
        match concurrence_at(params, t, config) {
            Ok(c) => c.value > 0.0,
            Err(e) => {
                failure.get_or_insert(e);
                false
            }
        }
    };
    let (lo, hi) = bracket;
    if !(entangled(lo) && !entangled(hi)) {
        return Err(failure.unwrap_or(Error::BracketFailure { lo, hi }));
    }
    let (a, b) = bisect_indicator(&mut entangled, lo, hi, tol);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(0.5 * (a + b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PhaseTag {
    I,
    II,
    III,
    IV,
}

impl PhaseTag {
    pub fn name(&self) -> &'static str {
        match self {
            PhaseTag::I => "I",
            PhaseTag::II => "II",
            PhaseTag::III => "III",
            PhaseTag::IV => "IV",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseLabel {
    pub tag: PhaseTag,
    pub m_a: f64,
    pub concurrence: f64,
    /// 1-based eigenvector labels `psi_k` spanning the trimer ground space.
    pub ground_states: Vec<usize>,
}

impl PhaseLabel {
    fn for_tag(tag: PhaseTag) -> Self {
        let (m_a, concurrence, ground_states) = match tag {
            PhaseTag::I => (1.0 / 6.0, 1.0 / 3.0, vec![5, 6]),
            PhaseTag::II => (-1.0 / 6.0, 1.0 / 3.0, vec![2, 3]),
            PhaseTag::III => (0.5, 0.0, vec![8]),
            PhaseTag::IV => (-0.5, 0.0, vec![1]),
        };
        Self { tag, m_a, concurrence, ground_states }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroTemperaturePhase {
    pub label: PhaseLabel,
    pub m_b: f64,
    pub fields: EffectiveFields,
    /// `T -> 0` limit of `F_GB / 3N`.
    pub energy_per_site: f64,
    /// The point sits on a level crossing or a tie between phases; the
    /// lower-`|m_a|` (then positive) phase is reported.
    pub degenerate_boundary: bool,
}

struct Candidate {
    tag: PhaseTag,
    m_b: f64,
    fields: EffectiveFields,
    energy: f64,
    degenerate: bool,
}

const LEVEL_TOL: f64 = 1e-12;

/// Ground-state analysis of the self-consistency conditions at `T = 0`.
///
/// For each candidate `(m_a, m_b)` with `m_a` in `{+-1/6, +-1/2}` and
/// `m_b = +-1/2`, the effective fields are formed, the trimer ground space
/// must realize `m_a` and the monomer must align with `gamma_b`. Among
/// consistent candidates the lowest
/// `(2/9) [E_0(gamma_a) - (3/4)|gamma_b| + 6 J_ab m_a m_b]` wins.
pub fn zero_temperature_phase(j_aa: f64, j_ab: f64, h: f64) -> Result<ZeroTemperaturePhase> {
    let params = ModelParams::new(j_aa, j_ab, h);
    let mut candidates = Vec::new();
    for tag in [PhaseTag::I, PhaseTag::II, PhaseTag::III, PhaseTag::IV] {
        let m_a = PhaseLabel::for_tag(tag).m_a;
        for m_b in [0.5, -0.5] {
            let fields = effective_fields(m_a, m_b, &params);
            let spectrum = trimer_energies(&fields);
            let e0 = spectrum.ground_energy();
            let scale = LEVEL_TOL * (1.0 + e0.abs());
            let ground: Vec<usize> = (0..8).filter(|&k| spectrum.energies[k] <= e0 + scale).collect();
            let needed = PhaseLabel::for_tag(tag).ground_states;
            if !needed.iter().all(|k| ground.contains(&(k - 1))) {
                continue;
            }
            let mixed = ground.iter().any(|&k| spectrum.total_sz[k] != spectrum.total_sz[ground[0]]);
            let gamma_b = fields.gamma_b;
            if gamma_b != 0.0 && gamma_b.signum() != m_b.signum() {
                continue;
            }
            let energy = 2.0 / 9.0 * (e0 - 0.75 * gamma_b.abs() + 6.0 * j_ab * m_a * m_b);
            candidates.push(Candidate {
                tag,
                m_b,
                fields,
                energy,
                degenerate: mixed || gamma_b == 0.0,
            });
        }
    }
    let e_min = candidates
        .iter()
        .map(|c| c.energy)
        .fold(f64::INFINITY, f64::min);
    let tied: Vec<&Candidate> = candidates
        .iter()
        .filter(|c| c.energy <= e_min + LEVEL_TOL)
        .collect();
    let best = tied
        .iter()
        .min_by(|a, b| {
            let ma = PhaseLabel::for_tag(a.tag).m_a;
            let mb = PhaseLabel::for_tag(b.tag).m_a;
            ma.abs()
                .total_cmp(&mb.abs())
                .then(mb.total_cmp(&ma))
                .then(b.m_b.total_cmp(&a.m_b))
        })
        .ok_or(Error::NoConsistentPhase { j_aa, j_ab, h })?;
    let phase_tie = tied.iter().any(|c| c.tag != best.tag);
    Ok(ZeroTemperaturePhase {
        label: PhaseLabel::for_tag(best.tag),
        m_b: best.m_b,
        fields: best.fields,
        energy_per_site: best.energy,
        degenerate_boundary: best.degenerate || phase_tie,
    })
}

/// Field of the `psi_5/psi_6 -> psi_8` crossing with saturated monomers:
/// `gamma_a = 3 J_aa / 2` at `m_b = 1/2`, i.e. `H_s = 3 J_aa / 2 - J_ab`.
pub fn saturation_field(j_aa: f64, j_ab: f64) -> Result<f64> {
    require_positive_coupling(j_aa)?;
    Ok(1.5 * j_aa - j_ab)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plateau {
    pub x_start: f64,
    pub x_end: f64,
    /// Multiple of `1/6` the curve locks onto.
    pub level: f64,
}

/// Maximal runs of at least three consecutive points within `tol` of the
/// same multiple of `1/6`. The curve must be sorted in `x`.
pub fn detect_plateaus(curve: &[(f64, f64)], tol: f64) -> Vec<Plateau> {
    let snap = |m: f64| -> Option<i64> {
        let k = (6.0 * m).round();
        ((m - k / 6.0).abs() < tol).then_some(k as i64)
    };
    let mut out = Vec::new();
    let mut i = 0;
    while i < curve.len() {
        let Some(level) = snap(curve[i].1) else {
            i += 1;
            continue;
        };
        let mut j = i;
        while j + 1 < curve.len() && snap(curve[j + 1].1) == Some(level) {
            j += 1;
        }
        if j - i + 1 >= 3 {
            out.push(Plateau {
                x_start: curve[i].0,
                x_end: curve[j].0,
                level: level as f64 / 6.0,
            });
        }
        i = j + 1;
    }
    out
}

//! Network, fading, aging and power configuration, plus every deterministic
//! statistic derived from it.
//!
//! A [`Scenario`] is the single input to the rest of the crate. The derived
//! quantities — estimation gains, the contamination constant, and the
//! aging-error spectrum — are computed once by [`derive_stats`] and treated
//! as immutable afterwards.

use serde::Deserialize;
use thiserror::Error;

use crate::specfun::bessel_j0;

/// Speed of light in m/s, for the mobility triple.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Relative tolerance used to decide that two aging-error variances are the
/// same spectrum value: `|x - y| <= SPECTRUM_GROUP_TOL * max(1, |x|, |y|)`.
pub const SPECTRUM_GROUP_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),
    #[error("malformed scenario JSON: {0}")]
    Json(String),
}

/// Cell/terminal/antenna counts and the frame split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellTopology {
    /// Number of cells.
    pub l_cells: usize,
    /// Terminals per cell.
    pub k_terminals: usize,
    /// BS antennas.
    pub n_antennas: usize,
    /// Frame length in symbols.
    pub frame_len: usize,
    /// Pilot length in symbols.
    pub pilot_len: usize,
}

impl CellTopology {
    pub fn new(
        l_cells: usize,
        k_terminals: usize,
        n_antennas: usize,
        frame_len: usize,
        pilot_len: usize,
    ) -> Result<Self, ScenarioError> {
        if l_cells == 0 || k_terminals == 0 || n_antennas == 0 || frame_len == 0 || pilot_len == 0 {
            return Err(ScenarioError::InvalidArgument(
                "all topology counts must be positive".into(),
            ));
        }
        if n_antennas < k_terminals {
            return Err(ScenarioError::InvalidArgument(format!(
                "N >= K required (got N={n_antennas}, K={k_terminals})"
            )));
        }
        if pilot_len < k_terminals {
            return Err(ScenarioError::InvalidArgument(format!(
                "tau >= K required (got tau={pilot_len}, K={k_terminals})"
            )));
        }
        if pilot_len > frame_len {
            return Err(ScenarioError::InvalidArgument(format!(
                "tau <= T required (got tau={pilot_len}, T={frame_len})"
            )));
        }
        Ok(CellTopology { l_cells, k_terminals, n_antennas, frame_len, pilot_len })
    }
}

/// Large-scale fading seen from one reference cell: `beta[i][k]` is the gain
/// between the reference BS and terminal k of cell i.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingProfile {
    pub beta: Vec<Vec<f64>>,
    pub reference_cell: usize,
}

impl FadingProfile {
    pub fn new(beta: Vec<Vec<f64>>, reference_cell: usize) -> Result<Self, ScenarioError> {
        if beta.is_empty() || beta[0].is_empty() {
            return Err(ScenarioError::InvalidArgument("beta must be a nonempty LxK array".into()));
        }
        let k = beta[0].len();
        if beta.iter().any(|row| row.len() != k) {
            return Err(ScenarioError::InvalidArgument("beta rows must have equal length".into()));
        }
        if reference_cell >= beta.len() {
            return Err(ScenarioError::InvalidArgument("reference_cell out of range".into()));
        }
        for (i, row) in beta.iter().enumerate() {
            for (kk, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(ScenarioError::InvalidArgument(format!(
                        "beta[{i}][{kk}] must be finite and >= 0, got {v}"
                    )));
                }
                if i == reference_cell && v <= 0.0 {
                    return Err(ScenarioError::InvalidArgument(format!(
                        "own-cell gain beta[{i}][{kk}] must be strictly positive"
                    )));
                }
            }
        }
        Ok(FadingProfile { beta, reference_cell })
    }

    pub fn l_cells(&self) -> usize {
        self.beta.len()
    }

    pub fn k_terminals(&self) -> usize {
        self.beta[0].len()
    }
}

/// The symmetric benchmark profile: own-cell gains 1, cross gains `a`.
pub fn build_simple_profile(l_cells: usize, k_terminals: usize, a: f64) -> Result<FadingProfile, ScenarioError> {
    if l_cells == 0 || k_terminals == 0 {
        return Err(ScenarioError::InvalidArgument("cell/terminal counts must be positive".into()));
    }
    if !(0.0..1.0).contains(&a) {
        return Err(ScenarioError::InvalidArgument(format!(
            "interference factor must satisfy 0 <= a < 1, got {a}"
        )));
    }
    let beta = (0..l_cells)
        .map(|i| vec![if i == 0 { 1.0 } else { a }; k_terminals])
        .collect();
    FadingProfile::new(beta, 0)
}

/// Temporal correlation from the Doppler/sampling pair: `J0(2 pi f_D T_s)`.
pub fn temporal_correlation(f_d: f64, t_s: f64) -> Result<f64, ScenarioError> {
    if !(f_d >= 0.0) || !f_d.is_finite() {
        return Err(ScenarioError::InvalidArgument(format!("f_D must be >= 0, got {f_d}")));
    }
    if !(t_s > 0.0) || !t_s.is_finite() {
        return Err(ScenarioError::InvalidArgument(format!("T_s must be > 0, got {t_s}")));
    }
    Ok(bessel_j0(2.0 * std::f64::consts::PI * f_d * t_s).value)
}

/// Mobility triple from which the temporal correlation can be resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobility {
    /// Relative speed in m/s.
    pub v: f64,
    /// Carrier frequency in Hz.
    pub f_c: f64,
    /// Channel sampling period in s.
    pub t_s: f64,
}

impl Mobility {
    pub fn doppler(&self) -> f64 {
        self.v * self.f_c / SPEED_OF_LIGHT
    }
}

/// Channel-aging specification: a direct correlation, a mobility triple, or
/// both (the direct value wins, with a consistency warning).
#[derive(Debug, Clone, PartialEq)]
pub struct AgingSpec {
    pub alpha_direct: Option<f64>,
    pub mobility: Option<Mobility>,
}

/// Resolved aging parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedAging {
    pub alpha: f64,
    /// Set when both forms were supplied and disagree.
    pub warning: Option<String>,
}

impl AgingSpec {
    pub fn direct(alpha: f64) -> Result<Self, ScenarioError> {
        if !(alpha.abs() <= 1.0) {
            return Err(ScenarioError::InvalidArgument(format!(
                "temporal correlation must satisfy |alpha| <= 1, got {alpha}"
            )));
        }
        Ok(AgingSpec { alpha_direct: Some(alpha), mobility: None })
    }

    pub fn from_mobility(m: Mobility) -> Result<Self, ScenarioError> {
        if m.v < 0.0 || m.f_c <= 0.0 || m.t_s <= 0.0 {
            return Err(ScenarioError::InvalidArgument(
                "mobility triple requires v >= 0, f_c > 0, T_s > 0".into(),
            ));
        }
        Ok(AgingSpec { alpha_direct: None, mobility: Some(m) })
    }

    pub fn resolve(&self) -> Result<ResolvedAging, ScenarioError> {
        match (self.alpha_direct, self.mobility) {
            (Some(a), None) => Ok(ResolvedAging { alpha: a, warning: None }),
            (None, Some(m)) => {
                let alpha = temporal_correlation(m.doppler(), m.t_s)?;
                Ok(ResolvedAging { alpha, warning: None })
            }
            (Some(a), Some(m)) => {
                let derived = temporal_correlation(m.doppler(), m.t_s)?;
                let warning = if (a - derived).abs() > 1e-9 {
                    Some(format!(
                        "direct alpha {a} overrides mobility-derived alpha {derived}"
                    ))
                } else {
                    None
                };
                Ok(ResolvedAging { alpha: a, warning })
            }
            (None, None) => Err(ScenarioError::InvalidArgument(
                "aging spec needs alpha or a mobility triple".into(),
            )),
        }
    }
}

/// How the per-terminal transmit SNR is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalingMode {
    /// `p_r` fixed regardless of N.
    Fixed,
    /// `p_r = E / sqrt(N)` with E pinned.
    InvSqrtN { e: f64 },
}

/// Per-terminal transmit SNR (linear).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSpec {
    pub p_r: f64,
    pub scaling: ScalingMode,
}

impl PowerSpec {
    pub fn fixed(p_r: f64) -> Result<Self, ScenarioError> {
        if !(p_r > 0.0) || !p_r.is_finite() {
            return Err(ScenarioError::InvalidArgument(format!("p_r must be > 0, got {p_r}")));
        }
        Ok(PowerSpec { p_r, scaling: ScalingMode::Fixed })
    }

    pub fn inv_sqrt_n(e: f64, n_antennas: usize) -> Result<Self, ScenarioError> {
        if !(e > 0.0) || !e.is_finite() {
            return Err(ScenarioError::InvalidArgument(format!("E must be > 0, got {e}")));
        }
        Ok(PowerSpec { p_r: e / (n_antennas as f64).sqrt(), scaling: ScalingMode::InvSqrtN { e } })
    }

    /// Training SNR `p_tr = tau * p_r`; derived, never stored.
    pub fn p_tr(&self, pilot_len: usize) -> f64 {
        pilot_len as f64 * self.p_r
    }
}

/// Everything deterministic the formulas need, derived once per scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedStats {
    /// Estimation-gain variances, indexed like `beta`.
    pub hat_beta: Vec<Vec<f64>>,
    /// Contamination constant per own-cell user.
    pub c: Vec<f64>,
    /// Aging-error variances (diagonal of the error covariance), length K*L,
    /// laid out cell-major: entry `i*K + k` belongs to terminal k of cell i.
    pub a_diag: Vec<f64>,
    /// Sum of `a_diag`.
    pub trace_a: f64,
    /// Distinct `a_diag` values, strictly decreasing, with multiplicities.
    pub spectrum: Vec<(f64, usize)>,
}

impl DerivedStats {
    /// Own-cell estimation gain for user `k`.
    pub fn hat_beta_own(&self, reference_cell: usize, k: usize) -> f64 {
        self.hat_beta[reference_cell][k]
    }

    /// Spectrum restricted to strictly positive values (zeros contribute a
    /// deterministic 0 to the interference power and drop out of Y).
    pub fn positive_spectrum(&self) -> Vec<(f64, usize)> {
        self.spectrum.iter().cloned().filter(|&(mu, _)| mu > 0.0).collect()
    }
}

/// Computes estimation gains, contamination constants and the aging-error
/// spectrum from the resolved configuration.
pub fn derive_stats(
    topology: &CellTopology,
    fading: &FadingProfile,
    alpha: f64,
    power: &PowerSpec,
) -> Result<DerivedStats, ScenarioError> {
    if fading.l_cells() != topology.l_cells || fading.k_terminals() != topology.k_terminals {
        return Err(ScenarioError::InvalidArgument(format!(
            "fading profile is {}x{}, topology says {}x{}",
            fading.l_cells(),
            fading.k_terminals(),
            topology.l_cells,
            topology.k_terminals
        )));
    }
    if !(alpha.abs() <= 1.0) {
        return Err(ScenarioError::InvalidArgument(format!("|alpha| <= 1 required, got {alpha}")));
    }
    let l = topology.l_cells;
    let k_n = topology.k_terminals;
    let lref = fading.reference_cell;
    let p_tr = power.p_tr(topology.pilot_len);

    let mut hat_beta = vec![vec![0.0f64; k_n]; l];
    for k in 0..k_n {
        let denom: f64 = (0..l).map(|j| fading.beta[j][k]).sum::<f64>() + 1.0 / p_tr;
        for i in 0..l {
            let b = fading.beta[i][k];
            hat_beta[i][k] = b * b / denom;
        }
    }

    let c: Vec<f64> = (0..k_n)
        .map(|k| {
            (0..l)
                .filter(|&i| i != lref)
                .map(|i| {
                    let r = fading.beta[i][k] / fading.beta[lref][k];
                    r * r
                })
                .sum()
        })
        .collect();

    let mut a_diag = Vec::with_capacity(l * k_n);
    for i in 0..l {
        for k in 0..k_n {
            let v = fading.beta[i][k] - alpha * alpha * hat_beta[i][k];
            if v < -1e-12 {
                return Err(ScenarioError::DegenerateSpectrum(format!(
                    "aging-error variance for cell {i}, user {k} is {v} < -1e-12; inputs inconsistent"
                )));
            }
            // Mathematically >= 0; clamp round-off.
            a_diag.push(v.max(0.0));
        }
    }
    let trace_a = a_diag.iter().sum();
    let spectrum = group_spectrum(&a_diag);
    Ok(DerivedStats { hat_beta, c, a_diag, trace_a, spectrum })
}

/// Groups a multiset into (value, multiplicity) pairs, strictly decreasing,
/// using the relative tolerance [`SPECTRUM_GROUP_TOL`]. Group members are
/// represented by their mean.
pub fn group_spectrum(values: &[f64]) -> Vec<(f64, usize)> {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut group_sum = 0.0f64;
    let mut group_n = 0usize;
    let mut rep = f64::NAN;
    for &v in &sorted {
        let same = group_n > 0 && {
            let tol = SPECTRUM_GROUP_TOL * rep.abs().max(v.abs()).max(1.0);
            (rep - v).abs() <= tol
        };
        if same {
            group_sum += v;
            group_n += 1;
        } else {
            if group_n > 0 {
                out.push((group_sum / group_n as f64, group_n));
            }
            rep = v;
            group_sum = v;
            group_n = 1;
        }
    }
    if group_n > 0 {
        out.push((group_sum / group_n as f64, group_n));
    }
    out
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub topology: CellTopology,
    pub fading: FadingProfile,
    pub aging: AgingSpec,
    pub power: PowerSpec,
}

impl Scenario {
    pub fn derive(&self) -> Result<DerivedStats, ScenarioError> {
        let resolved = self.aging.resolve()?;
        derive_stats(&self.topology, &self.fading, resolved.alpha, &self.power)
    }

    pub fn alpha(&self) -> Result<f64, ScenarioError> {
        Ok(self.aging.resolve()?.alpha)
    }

    /// Parses the scenario JSON schema:
    /// `{"L":int,"K":int,"N":int,"T":int,"tau":int,
    ///   "a":float | "beta":[[...]],
    ///   "alpha":float | {"v":..,"fc":..,"Ts":..},
    ///   "snr_db":float, "scaling":"fixed"|"inv_sqrt_n"}`
    pub fn from_json_str(s: &str) -> Result<Self, ScenarioError> {
        let raw: RawScenario =
            serde_json::from_str(s).map_err(|e| ScenarioError::Json(e.to_string()))?;
        raw.build()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(rename = "L")]
    l: usize,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "T")]
    t: usize,
    tau: usize,
    a: Option<f64>,
    beta: Option<Vec<Vec<f64>>>,
    alpha: Option<RawAlpha>,
    snr_db: f64,
    #[serde(default)]
    scaling: Option<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawAlpha {
    Direct(f64),
    Mobility { v: f64, fc: f64, #[serde(rename = "Ts")] ts: f64 },
}

impl RawScenario {
    fn build(self) -> Result<Scenario, ScenarioError> {
        let topology = CellTopology::new(self.l, self.k, self.n, self.t, self.tau)?;
        let fading = match (self.a, self.beta) {
            (Some(a), None) => build_simple_profile(self.l, self.k, a)?,
            (None, Some(beta)) => {
                let f = FadingProfile::new(beta, 0)?;
                if f.l_cells() != self.l || f.k_terminals() != self.k {
                    return Err(ScenarioError::InvalidArgument(
                        "beta dimensions disagree with L/K".into(),
                    ));
                }
                f
            }
            _ => {
                return Err(ScenarioError::Json(
                    "exactly one of \"a\" or \"beta\" must be given".into(),
                ))
            }
        };
        let aging = match self.alpha {
            Some(RawAlpha::Direct(a)) => AgingSpec::direct(a)?,
            Some(RawAlpha::Mobility { v, fc, ts }) => {
                AgingSpec::from_mobility(Mobility { v, f_c: fc, t_s: ts })?
            }
            None => return Err(ScenarioError::Json("\"alpha\" is required".into())),
        };
        let level = 10f64.powf(self.snr_db / 10.0);
        let power = match self.scaling.as_deref() {
            None | Some("fixed") => PowerSpec::fixed(level)?,
            Some("inv_sqrt_n") => PowerSpec::inv_sqrt_n(level, self.n)?,
            Some(other) => {
                return Err(ScenarioError::Json(format!(
                    "unknown scaling \"{other}\" (expected \"fixed\" or \"inv_sqrt_n\")"
                )))
            }
        };
        Ok(Scenario { topology, fading, aging, power })
    }
}

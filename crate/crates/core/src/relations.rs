//! Both sides of every entropic uncertainty relation, reported as signed margins.
//!
//! A report passes when `margin = lhs - rhs >= -tolerance`, where the
//! tolerance is `1e-8` plus four times the propagated quadrature error.
//! Identities are reported with `lhs = -|residual|` and `rhs = 0`.

use std::f64::consts::{E, PI};

use serde::Serialize;

use crate::density::{DensityFn, Integrand};
use crate::entropy::{
    bin_density_with_orders, diff_shannon, discrete_norm, discrete_renyi, discrete_tsallis, power_integral,
    alpha_log, DiscreteDist, EntropyValue,
};
use crate::grid::Integral;
use crate::measurement::{s_f, s_f_gaussian_bound, smear_k, smear_x, AcceptanceFn};
use crate::params::{MinLengthParams, OrderPair};
use crate::state::MixedState;
use crate::transform::{bundle, RepresentationBundle};
use crate::{Error, Result};

/// Absolute part of every pass threshold.
pub const BASE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationId {
    EntropyIdentity,
    BbmUndeformed,
    BbmCorrected,
    JensenCorrection,
    CorrectionLinearization,
    CorrectionLinearizationSpread,
    Robertson,
    RobertsonVariance,
    SmearingMonotoneK,
    SmearingMonotoneX,
    SmearedShannon,
    SmearedShannonSf,
    BinningLemmaK,
    BinningLemmaX,
    BinnedShannon,
    Beckner,
    BecknerTwin,
    SmearedNorm,
    SmearedNormTwin,
    SmearedRenyi,
    SmearedRenyiTwin,
    BinnedNorm,
    BinnedNormTwin,
    BinnedRenyi,
    BinnedRenyiTwin,
    TsallisBinned,
    TsallisBinnedTwin,
    NormOrderingM,
    NormOrderingN,
    SfBound,
}

impl RelationId {
    pub const ALL: [RelationId; 30] = [
        RelationId::EntropyIdentity,
        RelationId::BbmUndeformed,
        RelationId::BbmCorrected,
        RelationId::JensenCorrection,
        RelationId::CorrectionLinearization,
        RelationId::CorrectionLinearizationSpread,
        RelationId::Robertson,
        RelationId::RobertsonVariance,
        RelationId::SmearingMonotoneK,
        RelationId::SmearingMonotoneX,
        RelationId::SmearedShannon,
        RelationId::SmearedShannonSf,
        RelationId::BinningLemmaK,
        RelationId::BinningLemmaX,
        RelationId::BinnedShannon,
        RelationId::Beckner,
        RelationId::BecknerTwin,
        RelationId::SmearedNorm,
        RelationId::SmearedNormTwin,
        RelationId::SmearedRenyi,
        RelationId::SmearedRenyiTwin,
        RelationId::BinnedNorm,
        RelationId::BinnedNormTwin,
        RelationId::BinnedRenyi,
        RelationId::BinnedRenyiTwin,
        RelationId::TsallisBinned,
        RelationId::TsallisBinnedTwin,
        RelationId::NormOrderingM,
        RelationId::NormOrderingN,
        RelationId::SfBound,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RelationId::EntropyIdentity => "entropy_identity",
            RelationId::BbmUndeformed => "bbm_undeformed",
            RelationId::BbmCorrected => "bbm_corrected",
            RelationId::JensenCorrection => "jensen_correction",
            RelationId::CorrectionLinearization => "correction_linearization",
            RelationId::CorrectionLinearizationSpread => "correction_linearization_spread",
            RelationId::Robertson => "robertson",
            RelationId::RobertsonVariance => "robertson_variance",
            RelationId::SmearingMonotoneK => "smearing_monotone_k",
            RelationId::SmearingMonotoneX => "smearing_monotone_x",
            RelationId::SmearedShannon => "smeared_shannon",
            RelationId::SmearedShannonSf => "smeared_shannon_sf",
            RelationId::BinningLemmaK => "binning_lemma_k",
            RelationId::BinningLemmaX => "binning_lemma_x",
            RelationId::BinnedShannon => "binned_shannon",
            RelationId::Beckner => "beckner",
            RelationId::BecknerTwin => "beckner_twin",
            RelationId::SmearedNorm => "smeared_norm",
            RelationId::SmearedNormTwin => "smeared_norm_twin",
            RelationId::SmearedRenyi => "smeared_renyi",
            RelationId::SmearedRenyiTwin => "smeared_renyi_twin",
            RelationId::BinnedNorm => "binned_norm",
            RelationId::BinnedNormTwin => "binned_norm_twin",
            RelationId::BinnedRenyi => "binned_renyi",
            RelationId::BinnedRenyiTwin => "binned_renyi_twin",
            RelationId::TsallisBinned => "tsallis_binned",
            RelationId::TsallisBinnedTwin => "tsallis_binned_twin",
            RelationId::NormOrderingM => "norm_ordering_m",
            RelationId::NormOrderingN => "norm_ordering_n",
            RelationId::SfBound => "sf_bound",
        }
    }

    /// The inequality in words and symbols.
    pub fn statement(&self) -> &'static str {
        match self {
            RelationId::EntropyIdentity => "H(K) = H(Q) + <ln(1+beta k^2)>",
            RelationId::BbmUndeformed => "H(Q) + H(X) >= ln(e pi)",
            RelationId::BbmCorrected => "H(K) + H(X) >= ln(e pi) + <ln(1+beta k^2)>",
            RelationId::JensenCorrection => "<ln(1+beta k^2)> <= ln(1 + beta <k^2>)",
            RelationId::CorrectionLinearization => "(<ln(1+beta k^2)> - beta <k^2>) / beta^2 -> -<k^4>/2, within 10%",
            RelationId::CorrectionLinearizationSpread => "ratio to -<k^4>/2 varies by less than 5% across beta",
            RelationId::Robertson => "Da Dk >= (1 + beta <k^2>) / 2",
            RelationId::RobertsonVariance => "(1 + beta <k^2>) / 2 >= (1 + beta Dk^2) / 2",
            RelationId::SmearingMonotoneK => "H(M) >= H(K)",
            RelationId::SmearingMonotoneX => "H(N) >= H(X)",
            RelationId::SmearedShannon => "H(M) + H(N) >= ln(e pi) + <ln(1+beta k^2)>",
            RelationId::SmearedShannonSf => "H(M) + H(N) >= ln(e pi / S_f)",
            RelationId::BinningLemmaK => "H(p_K) >= H(K) - ln dk",
            RelationId::BinningLemmaX => "H(p_X) >= H(X) - ln dx",
            RelationId::BinnedShannon => "H(p_K) + H(p_X) >= ln(e pi / (dk dx)) + <ln(1+beta k^2)>",
            RelationId::Beckner => "|v|_a <= (kappa pi)^(-(1-g)/g) |w|_g",
            RelationId::BecknerTwin => "|w|_a <= (kappa pi)^(-(1-g)/g) |v|_g",
            RelationId::SmearedNorm => "|U|_a <= (S_f / (kappa pi))^((1-g)/g) |W|_g",
            RelationId::SmearedNormTwin => "|W|_a <= (S_f / (kappa pi))^((1-g)/g) |U|_g",
            RelationId::SmearedRenyi => "R_a(M) + R_g(N) >= ln(kappa pi / S_f)",
            RelationId::SmearedRenyiTwin => "R_a(N) + R_g(M) >= ln(kappa pi / S_f)",
            RelationId::BinnedNorm => "|p_M|_a <= (S_f dz dxi / (kappa pi))^((1-g)/g) |p_N|_g",
            RelationId::BinnedNormTwin => "|p_N|_a <= (S_f dz dxi / (kappa pi))^((1-g)/g) |p_M|_g",
            RelationId::BinnedRenyi => "R_a(p_M) + R_g(p_N) >= ln(kappa pi / (S_f dz dxi))",
            RelationId::BinnedRenyiTwin => "R_a(p_N) + R_g(p_M) >= ln(kappa pi / (S_f dz dxi))",
            RelationId::TsallisBinned => "T_a(p_M) + T_g(p_N) >= ln_nu(kappa pi / (S_f dz dxi))",
            RelationId::TsallisBinnedTwin => "T_a(p_N) + T_g(p_M) >= ln_nu(kappa pi / (S_f dz dxi))",
            RelationId::NormOrderingM => "|p_M|_a <= 1 <= |p_M|_g",
            RelationId::NormOrderingN => "|p_N|_a <= 1 <= |p_N|_g",
            RelationId::SfBound => "S_f <= min(1, sqrt(pi / (2 sigma^2 beta)))",
        }
    }
}

impl std::fmt::Display for RelationId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotApplicable => "not_applicable",
        }
    }
}

/// Parameters a report was computed for.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Inputs {
    pub state: String,
    pub beta: f64,
    pub sigma: Option<f64>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub delta_k: Option<f64>,
    pub delta_x: Option<f64>,
}

impl Inputs {
    pub fn new(state: &str, beta: f64) -> Inputs {
        Inputs { state: state.to_string(), beta, ..Default::default() }
    }

    pub fn sigma(mut self, sigma: f64) -> Inputs {
        self.sigma = Some(sigma);
        self
    }

    pub fn orders(mut self, pair: OrderPair) -> Inputs {
        self.alpha = Some(pair.alpha());
        self.gamma = Some(pair.gamma());
        self
    }

    pub fn bins(mut self, dk: f64, dx: f64) -> Inputs {
        self.delta_k = Some(dk);
        self.delta_x = Some(dx);
        self
    }

    /// Canonical text form; sorts reports deterministically.
    pub fn digest(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:e}"));
        format!(
            "state={};beta={:e};sigma={};alpha={};gamma={};delta_k={};delta_x={}",
            self.state,
            self.beta,
            opt(self.sigma),
            opt(self.alpha),
            opt(self.gamma),
            opt(self.delta_k),
            opt(self.delta_x)
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelationReport {
    pub relation_id: RelationId,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub est_error: f64,
    pub tolerance: f64,
    pub inputs: Inputs,
    pub inputs_digest: String,
    pub verdict: Verdict,
}

impl RelationReport {
    pub fn new(relation_id: RelationId, lhs: f64, rhs: f64, est_error: f64, inputs: Inputs) -> RelationReport {
        let margin = lhs - rhs;
        let est_error = if est_error.is_finite() { est_error.abs() } else { f64::INFINITY };
        let tolerance = BASE_TOL + 4.0 * est_error;
        let verdict = if margin >= -tolerance { Verdict::Pass } else { Verdict::Fail };
        let inputs_digest = inputs.digest();
        RelationReport { relation_id, lhs, rhs, margin, est_error, tolerance, inputs, inputs_digest, verdict }
    }

    /// An equality reported as `lhs = -|residual|`, `rhs = 0`.
    pub fn identity(relation_id: RelationId, residual: f64, est_error: f64, inputs: Inputs) -> RelationReport {
        RelationReport::new(relation_id, -residual.abs(), 0.0, est_error, inputs)
    }

    pub fn not_applicable(relation_id: RelationId, inputs: Inputs) -> RelationReport {
        let inputs_digest = inputs.digest();
        RelationReport {
            relation_id,
            lhs: f64::NAN,
            rhs: f64::NAN,
            margin: f64::NAN,
            est_error: f64::NAN,
            tolerance: BASE_TOL,
            inputs,
            inputs_digest,
            verdict: Verdict::NotApplicable,
        }
    }

    /// Same report with `rhs` raised by `shift`; the verdict is re-evaluated.
    pub fn shifted(&self, shift: f64) -> RelationReport {
        if self.verdict == Verdict::NotApplicable || shift == 0.0 {
            return self.clone();
        }
        RelationReport::new(self.relation_id, self.lhs, self.rhs + shift, self.est_error, self.inputs.clone())
    }

    /// Same report judged with `tolerance = base + multiplier * est_error`.
    pub fn with_tolerance(&self, base: f64, multiplier: f64) -> RelationReport {
        if self.verdict == Verdict::NotApplicable {
            return self.clone();
        }
        let tolerance = base + multiplier * self.est_error;
        let verdict = if self.margin >= -tolerance { Verdict::Pass } else { Verdict::Fail };
        RelationReport { tolerance, verdict, ..self.clone() }
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

/// `2 n + 1` edges of width `delta` centred on zero and shifted by
/// `offset * delta`; mass outside is covered by continuation bins.
pub fn centred_edges(delta: f64, n: usize, offset: f64) -> Result<Vec<f64>> {
    if !(delta > 0.0 && delta.is_finite()) || n == 0 {
        return Err(Error::Binning(format!("need delta > 0 and n > 0, got {delta}, {n}")));
    }
    let shift = offset * delta;
    Ok((0..=2 * n).map(|i| (i as f64 - n as f64) * delta + shift).collect())
}

/// Sorts by input digest, then relation id.
pub fn sort_reports(reports: &mut [RelationReport]) {
    reports.sort_by(|a, b| {
        a.inputs_digest
            .cmp(&b.inputs_digest)
            .then(a.relation_id.cmp(&b.relation_id))
            .then(a.lhs.total_cmp(&b.lhs))
    });
}

/// Beckner constant `kappa = sqrt(a^(1/(a-1)) g^(1/(g-1)))`, `e` for the degenerate pair.
pub fn kappa(pair: OrderPair) -> f64 {
    if pair.is_degenerate() {
        return E;
    }
    let term = |x: f64| ((x - 1.0).ln_1p() / (x - 1.0)).exp();
    (term(pair.alpha()) * term(pair.gamma())).sqrt()
}

/// [`kappa`] as a function of the smaller order on `[1/2, 1]`, including the
/// limit `gamma = 1/2` where `alpha` is infinite.
pub fn kappa_from_gamma(gamma: f64) -> Result<f64> {
    if !(0.5..=1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!("gamma must lie in [1/2, 1], got {gamma}")));
    }
    if gamma == 1.0 {
        return Ok(E);
    }
    let g_term = ((gamma - 1.0).ln_1p() / (gamma - 1.0)).exp();
    let a_term = if gamma == 0.5 {
        1.0
    } else {
        let alpha = gamma / (2.0 * gamma - 1.0);
        ((alpha - 1.0).ln_1p() / (alpha - 1.0)).exp()
    };
    Ok((a_term * g_term).sqrt())
}

/// `<ln(1 + beta k^2)> = int u(k) ln(1 + beta k^2) dk`.
pub fn correction_term(u_k: &DensityFn, params: MinLengthParams) -> Result<Integral> {
    if !params.is_deformed() {
        return Ok(Integral::default());
    }
    u_k.integral(Integrand::LogWeight(params.beta()))
}

/// Densities and Shannon entropies of one state.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub label: String,
    pub params: MinLengthParams,
    pub bundle: RepresentationBundle,
    pub h_q: EntropyValue,
    pub h_k: EntropyValue,
    pub h_x: EntropyValue,
    pub correction: Integral,
}

impl Analysis {
    pub fn of(state: &MixedState) -> Result<Analysis> {
        let bundle = bundle(state)?;
        let h_q = diff_shannon(&bundle.v_q)?;
        let h_k = diff_shannon(&bundle.u_k)?;
        let h_x = diff_shannon(&bundle.w_x)?;
        let correction = correction_term(&bundle.u_k, state.params())?;
        Ok(Analysis { label: state.label(), params: state.params(), bundle, h_q, h_k, h_x, correction })
    }

    pub fn inputs(&self) -> Inputs {
        Inputs::new(&self.label, self.params.beta())
    }
}

/// Smeared densities `M(zeta)`, `N(xi)` of a state and `S_f`.
#[derive(Clone, Debug)]
pub struct Smearing {
    pub f: AcceptanceFn,
    pub g: AcceptanceFn,
    pub m: DensityFn,
    pub n: DensityFn,
    pub h_m: EntropyValue,
    pub h_n: EntropyValue,
    pub s_f: f64,
}

impl Smearing {
    pub fn of(a: &Analysis, f: &AcceptanceFn, g: &AcceptanceFn) -> Result<Smearing> {
        let m = smear_k(&a.bundle.u_k, f, a.params)?;
        let n = smear_x(&a.bundle.w_x, g)?;
        let h_m = diff_shannon(&m)?;
        let h_n = diff_shannon(&n)?;
        Ok(Smearing { f: f.clone(), g: g.clone(), m, n, h_m, h_n, s_f: s_f(f, a.params) })
    }

    /// Width of `f` as reported in inputs.
    pub fn sigma(&self) -> f64 {
        self.f.width()
    }
}

/// Entropy identity, the undeformed and corrected BBM bounds, and the Jensen
/// bound on the correction.
pub fn check_bbm_corrected(a: &Analysis) -> Vec<RelationReport> {
    let ln_e_pi = 1.0 + PI.ln();
    let c = a.correction;
    let mut out = vec![
        RelationReport::identity(
            RelationId::EntropyIdentity,
            a.h_k.value - a.h_q.value - c.value,
            a.h_k.est_error + a.h_q.est_error + c.error,
            a.inputs(),
        ),
        RelationReport::new(
            RelationId::BbmUndeformed,
            a.h_q.value + a.h_x.value,
            ln_e_pi,
            a.h_q.est_error + a.h_x.est_error,
            a.inputs(),
        ),
        RelationReport::new(
            RelationId::BbmCorrected,
            a.h_k.value + a.h_x.value,
            ln_e_pi + c.value,
            a.h_k.est_error + a.h_x.est_error + c.error,
            a.inputs(),
        ),
    ];
    out.push(match a.bundle.u_k.integral(Integrand::Moment(2)) {
        Ok(k2) => {
            let beta = a.params.beta();
            RelationReport::new(
                RelationId::JensenCorrection,
                (beta * k2.value).ln_1p(),
                c.value,
                beta * k2.error / (1.0 + beta * k2.value) + c.error,
                a.inputs(),
            )
        }
        Err(_) => RelationReport::not_applicable(RelationId::JensenCorrection, a.inputs()),
    });
    out
}

/// Ratio of `(<ln(1+beta k^2)> - beta <k^2>) / beta^2` to `-<k^4>/2` for a
/// family of analyses at small `beta`; each must be within 10% of one and the
/// ratios within 5% of each other.
///
/// `<k^4>` is taken in its small-`beta` limit `<q^4>`: any state with
/// `v(+-q0) != 0` has `u(k) ~ |k|^-2` and a divergent fourth moment at finite `beta`.
pub fn correction_linearization_check(family: &[Analysis]) -> Vec<RelationReport> {
    let mut out = Vec::new();
    let mut ratios = Vec::new();
    for a in family {
        let beta = a.params.beta();
        let inputs = a.inputs();
        if beta == 0.0 {
            out.push(RelationReport::not_applicable(RelationId::CorrectionLinearization, inputs));
            continue;
        }
        let u = &a.bundle.u_k;
        let (Ok(res), Ok(k4)) = (u.integral(Integrand::LinearResidual(beta)), a.bundle.v_q.integral(Integrand::Moment(4))) else {
            out.push(RelationReport::not_applicable(RelationId::CorrectionLinearization, inputs));
            continue;
        };
        let target = -0.5 * k4.value;
        let ratio = res.value / (beta * beta) / target;
        let err = ratio.abs() * (res.error / res.value.abs() + k4.error / k4.value.abs());
        ratios.push(ratio);
        out.push(RelationReport::new(RelationId::CorrectionLinearization, 0.1, (ratio - 1.0).abs(), err, inputs));
    }
    if ratios.len() >= 2 {
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let label = family.first().map_or(String::new(), |a| a.label.clone());
        out.push(RelationReport::new(
            RelationId::CorrectionLinearizationSpread,
            0.05,
            hi / lo - 1.0,
            0.0,
            Inputs::new(&label, 0.0),
        ));
    }
    out
}

/// Robertson bound `Da Dk >= (1 + beta <k^2>) / 2` and its variance form.
pub fn robertson_margin(a: &Analysis) -> Vec<RelationReport> {
    let moments = |d: &DensityFn| -> Option<(f64, f64, f64)> {
        let m1 = d.integral(Integrand::Moment(1)).ok()?;
        let m2 = d.integral(Integrand::Moment(2)).ok()?;
        Some((m1.value, m2.value, m1.error + m2.error))
    };
    let (Some((x1, x2, ex)), Some((k1, k2, ek))) = (moments(&a.bundle.w_x), moments(&a.bundle.u_k)) else {
        return vec![
            RelationReport::not_applicable(RelationId::Robertson, a.inputs()),
            RelationReport::not_applicable(RelationId::RobertsonVariance, a.inputs()),
        ];
    };
    let beta = a.params.beta();
    let dx = (x2 - x1 * x1).max(0.0).sqrt();
    let dk = (k2 - k1 * k1).max(0.0).sqrt();
    let rhs = 0.5 * (1.0 + beta * k2);
    let err = 0.5 * (ex * dk / dx.max(1e-300) + ek * dx / dk.max(1e-300)) + 0.5 * beta * ek;
    vec![
        RelationReport::new(RelationId::Robertson, dx * dk, rhs, err, a.inputs()),
        RelationReport::new(RelationId::RobertsonVariance, rhs, 0.5 * (1.0 + beta * dk * dk), beta * ek, a.inputs()),
    ]
}

/// Smearing monotonicity and the smeared Shannon bounds with the correction
/// term and with `S_f`.
pub fn check_smeared_shannon(a: &Analysis, s: &Smearing) -> Vec<RelationReport> {
    let inputs = a.inputs().sigma(s.sigma());
    let ln_e_pi = 1.0 + PI.ln();
    let lhs = s.h_m.value + s.h_n.value;
    let err = s.h_m.est_error + s.h_n.est_error;
    vec![
        RelationReport::new(RelationId::SmearingMonotoneK, s.h_m.value, a.h_k.value, s.h_m.est_error + a.h_k.est_error, inputs.clone()),
        RelationReport::new(RelationId::SmearingMonotoneX, s.h_n.value, a.h_x.value, s.h_n.est_error + a.h_x.est_error, inputs.clone()),
        RelationReport::new(RelationId::SmearedShannon, lhs, ln_e_pi + a.correction.value, err + a.correction.error, inputs.clone()),
        RelationReport::new(RelationId::SmearedShannonSf, lhs, ln_e_pi - s.s_f.ln(), err, inputs),
    ]
}

/// Binning lemma on both axes and the binned Shannon bound.
pub fn check_binned_shannon(a: &Analysis, edges_k: &[f64], edges_x: &[f64]) -> Result<Vec<RelationReport>> {
    let pk = bin_density_with_orders(&a.bundle.u_k, edges_k, &[])?;
    let px = bin_density_with_orders(&a.bundle.w_x, edges_x, &[])?;
    let (dk, dx) = (pk.delta_max(), px.delta_max());
    let inputs = a.inputs().bins(dk, dx);
    let hk = discrete_renyi(&pk, 1.0);
    let hx = discrete_renyi(&px, 1.0);
    Ok(vec![
        RelationReport::new(RelationId::BinningLemmaK, hk.value, a.h_k.value - dk.ln(), hk.est_error + a.h_k.est_error, inputs.clone()),
        RelationReport::new(RelationId::BinningLemmaX, hx.value, a.h_x.value - dx.ln(), hx.est_error + a.h_x.est_error, inputs.clone()),
        RelationReport::new(
            RelationId::BinnedShannon,
            hk.value + hx.value,
            1.0 + PI.ln() - (dk * dx).ln() + a.correction.value,
            hk.est_error + hx.est_error + a.correction.error,
            inputs,
        ),
    ])
}

/// `ln |p|_a` with error, or `None` when the integral diverges.
fn log_norm(d: &DensityFn, order: f64) -> Option<(f64, f64)> {
    let i = power_integral(d, order).ok()?;
    Some((i.value.ln() / order, i.error / (order * i.value)))
}

/// Log form of `|a|_alpha <= c |b|_gamma` with `ln c = log_c`.
fn norm_report(id: RelationId, a: Option<(f64, f64)>, b: Option<(f64, f64)>, log_c: f64, inputs: Inputs) -> RelationReport {
    match (a, b) {
        (Some((la, ea)), Some((lb, eb))) => RelationReport::new(id, log_c + lb, la, ea + eb, inputs),
        _ => RelationReport::not_applicable(id, inputs),
    }
}

/// Beckner inequality between the auxiliary-wavenumber and position densities
/// and its twin; the degenerate pair reduces to the undeformed BBM bound.
pub fn check_beckner(a: &Analysis, pair: OrderPair) -> Vec<RelationReport> {
    if pair.is_degenerate() {
        return check_bbm_corrected(a).into_iter().filter(|r| r.relation_id == RelationId::BbmUndeformed).collect();
    }
    let (al, ga) = (pair.alpha(), pair.gamma());
    let log_c = -(1.0 - ga) / ga * (kappa(pair) * PI).ln();
    let inputs = a.inputs().orders(pair);
    let (v, w) = (&a.bundle.v_q, &a.bundle.w_x);
    vec![
        norm_report(RelationId::Beckner, log_norm(v, al), log_norm(w, ga), log_c, inputs.clone()),
        norm_report(RelationId::BecknerTwin, log_norm(w, al), log_norm(v, ga), log_c, inputs),
    ]
}

fn renyi_from_log_norm(order: f64, n: Option<(f64, f64)>) -> Option<(f64, f64)> {
    n.map(|(l, e)| (order / (1.0 - order) * l, (order / (1.0 - order)).abs() * e))
}

fn sum_report(id: RelationId, x: Option<(f64, f64)>, y: Option<(f64, f64)>, rhs: f64, inputs: Inputs) -> RelationReport {
    match (x, y) {
        (Some((a, ea)), Some((b, eb))) => RelationReport::new(id, a + b, rhs, ea + eb, inputs),
        _ => RelationReport::not_applicable(id, inputs),
    }
}

/// Smeared Rényi relations and their norm forms, both order assignments.
/// The degenerate pair reduces to the smeared Shannon bound with `S_f`.
pub fn check_renyi_smeared(a: &Analysis, s: &Smearing, pair: OrderPair) -> Vec<RelationReport> {
    let inputs = a.inputs().sigma(s.sigma()).orders(pair);
    if pair.is_degenerate() {
        let mut r = check_smeared_shannon(a, s);
        r.retain(|r| r.relation_id == RelationId::SmearedShannonSf);
        return r;
    }
    let (al, ga) = (pair.alpha(), pair.gamma());
    let kp = kappa(pair) * PI;
    let log_c = (1.0 - ga) / ga * (s.s_f / kp).ln();
    let (m_a, m_g) = (log_norm(&s.m, al), log_norm(&s.m, ga));
    let (n_a, n_g) = (log_norm(&s.n, al), log_norm(&s.n, ga));
    let rhs = (kp / s.s_f).ln();
    vec![
        norm_report(RelationId::SmearedNorm, m_a, n_g, log_c, inputs.clone()),
        norm_report(RelationId::SmearedNormTwin, n_a, m_g, log_c, inputs.clone()),
        sum_report(RelationId::SmearedRenyi, renyi_from_log_norm(al, m_a), renyi_from_log_norm(ga, n_g), rhs, inputs.clone()),
        sum_report(RelationId::SmearedRenyiTwin, renyi_from_log_norm(al, n_a), renyi_from_log_norm(ga, m_g), rhs, inputs),
    ]
}

/// Binned smeared densities for a pair of orders.
pub struct BinnedSmearing {
    pub p_m: DiscreteDist,
    pub p_n: DiscreteDist,
}

impl BinnedSmearing {
    pub fn of(s: &Smearing, pair: OrderPair, edges_zeta: &[f64], edges_xi: &[f64]) -> Result<BinnedSmearing> {
        let orders = [pair.alpha(), pair.gamma()];
        Ok(BinnedSmearing {
            p_m: bin_density_with_orders(&s.m, edges_zeta, &orders)?,
            p_n: bin_density_with_orders(&s.n, edges_xi, &orders)?,
        })
    }
}

/// Binned Rényi relations and their norm forms, both order assignments, plus
/// the discrete norm ordering. The degenerate pair gives the binned Shannon
/// form with `S_f`.
pub fn check_renyi_binned(a: &Analysis, s: &Smearing, pair: OrderPair, b: &BinnedSmearing) -> Vec<RelationReport> {
    let (dz, dxi) = (b.p_m.delta_max(), b.p_n.delta_max());
    let inputs = a.inputs().sigma(s.sigma()).orders(pair).bins(dz, dxi);
    let kp = kappa(pair) * PI;
    let rhs = (kp / (s.s_f * dz * dxi)).ln();
    let (al, ga) = (pair.alpha(), pair.gamma());
    let renyi = |d: &DiscreteDist, o: f64| {
        let r = discrete_renyi(d, o);
        Some((r.value, r.est_error))
    };
    let mut out = vec![
        sum_report(RelationId::BinnedRenyi, renyi(&b.p_m, al), renyi(&b.p_n, ga), rhs, inputs.clone()),
        sum_report(RelationId::BinnedRenyiTwin, renyi(&b.p_n, al), renyi(&b.p_m, ga), rhs, inputs.clone()),
    ];
    if pair.is_degenerate() {
        return out;
    }
    let log_c = (1.0 - ga) / ga * (s.s_f * dz * dxi / kp).ln();
    let ln_norm = |d: &DiscreteDist, o: f64| {
        let n = discrete_norm(d, o);
        Some((n.value.ln(), n.error / n.value))
    };
    out.push(norm_report(RelationId::BinnedNorm, ln_norm(&b.p_m, al), ln_norm(&b.p_n, ga), log_c, inputs.clone()));
    out.push(norm_report(RelationId::BinnedNormTwin, ln_norm(&b.p_n, al), ln_norm(&b.p_m, ga), log_c, inputs.clone()));
    for (id, d) in [(RelationId::NormOrderingM, &b.p_m), (RelationId::NormOrderingN, &b.p_n)] {
        let (la, ea) = ln_norm(d, al).expect("finite");
        let (lg, eg) = ln_norm(d, ga).expect("finite");
        out.push(RelationReport::new(id, lg.min(-la), 0.0, ea + eg, inputs.clone()));
    }
    out
}

/// Binned Tsallis relations with the deformed logarithm of order `max(alpha, gamma)`.
pub fn check_tsallis_binned(a: &Analysis, s: &Smearing, pair: OrderPair, b: &BinnedSmearing) -> Vec<RelationReport> {
    let (dz, dxi) = (b.p_m.delta_max(), b.p_n.delta_max());
    let inputs = a.inputs().sigma(s.sigma()).orders(pair).bins(dz, dxi);
    let arg = kappa(pair) * PI / (s.s_f * dz * dxi);
    let rhs = alpha_log(arg, pair.nu()).expect("positive argument");
    let (al, ga) = (pair.alpha(), pair.gamma());
    let t = |d: &DiscreteDist, o: f64| {
        let v = discrete_tsallis(d, o);
        Some((v.value, v.est_error))
    };
    vec![
        sum_report(RelationId::TsallisBinned, t(&b.p_m, al), t(&b.p_n, ga), rhs, inputs.clone()),
        sum_report(RelationId::TsallisBinnedTwin, t(&b.p_n, al), t(&b.p_m, ga), rhs, inputs),
    ]
}

/// `S_f <= min(1, sqrt(pi / (2 sigma^2 beta)))` for a Gaussian profile.
pub fn check_sf_bound(sigma: f64, params: MinLengthParams) -> Result<RelationReport> {
    let f = crate::measurement::gaussian_acceptance(sigma)?;
    let value = s_f(&f, params);
    let bound = if params.is_deformed() { s_f_gaussian_bound(sigma, params.beta())?.min(1.0) } else { 1.0 };
    Ok(RelationReport::new(RelationId::SfBound, bound, value, 1e-14, Inputs::new("-", params.beta()).sigma(sigma)))
}

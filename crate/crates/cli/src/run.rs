use minlen::measurement::{gaussian_acceptance, s_f, s_f_gaussian_bound};
use minlen::params::conjugate_order;
use minlen::relations::*;
use minlen::{catalog_state, make_params, MixedState, RelationReport};
use rayon::prelude::*;

use crate::config::{RunConfig, StateSpec};
use crate::CliError;

/// Half the number of bins laid out on each axis; the rest is continuation.
const HALF_BINS: usize = 1000;
/// Largest `beta` included in the small-`beta` expansion of the correction.
const LINEARIZATION_BETA_MAX: f64 = 1e-2;

/// Everything one `verify` pass produced.
pub struct Run {
    pub reports: Vec<RelationReport>,
    /// `(state label, beta, <ln(1 + beta k^2)>)`
    pub corrections: Vec<(String, f64, f64)>,
    /// `(sigma, beta, S_f, Gaussian bound)`
    pub sf: Vec<(f64, f64, f64, f64)>,
}

impl Run {
    pub fn correction(&self, state: &str, beta: f64) -> Option<f64> {
        self.corrections.iter().find(|c| c.0 == state && c.1 == beta).map(|c| c.2)
    }

    pub fn s_f(&self, sigma: f64, beta: f64) -> Option<(f64, f64)> {
        self.sf.iter().find(|s| s.0 == sigma && s.1 == beta).map(|s| (s.2, s.3))
    }
}

fn build_state(spec: &StateSpec, seed: Option<u64>, beta: f64) -> Result<MixedState, CliError> {
    let params = make_params(beta)?;
    Ok(catalog_state(spec.catalog_name()?, params, &spec.shape_args, seed)?.into())
}

fn with_inputs(mut r: RelationReport, inputs: Inputs) -> RelationReport {
    r.inputs_digest = inputs.digest();
    r.inputs = inputs;
    r
}

struct Job<'a> {
    spec: &'a StateSpec,
    seed: Option<u64>,
    beta: f64,
}

fn state_reports(job: &Job, config: &RunConfig) -> Result<(Analysis, Vec<RelationReport>), CliError> {
    let state = build_state(job.spec, job.seed, job.beta)?;
    let a = Analysis::of(&state)?;
    let mut out = check_bbm_corrected(&a);
    out.extend(robertson_margin(&a));
    let pairs = config.alpha_grid.iter().map(|&al| conjugate_order(al)).collect::<Result<Vec<_>, _>>()?;
    for &pair in &pairs {
        out.extend(check_beckner(&a, pair).into_iter().map(|r| with_inputs(r, a.inputs().orders(pair))));
    }
    for b in &config.bins {
        let ek = centred_edges(b.delta_k, HALF_BINS, b.offset)?;
        let ex = centred_edges(b.delta_x, HALF_BINS, b.offset)?;
        out.extend(check_binned_shannon(&a, &ek, &ex)?);
    }
    for &sigma in &config.sigma_grid {
        let f = gaussian_acceptance(sigma)?;
        let sm = Smearing::of(&a, &f, &f)?;
        out.extend(check_smeared_shannon(&a, &sm));
        for &pair in &pairs {
            let inputs = a.inputs().sigma(sigma).orders(pair);
            out.extend(check_renyi_smeared(&a, &sm, pair).into_iter().map(|r| with_inputs(r, inputs.clone())));
            for b in &config.bins {
                let ez = centred_edges(b.delta_k, HALF_BINS, b.offset)?;
                let exi = centred_edges(b.delta_x, HALF_BINS, b.offset)?;
                let binned = BinnedSmearing::of(&sm, pair, &ez, &exi)?;
                out.extend(check_renyi_binned(&a, &sm, pair, &binned));
                out.extend(check_tsallis_binned(&a, &sm, pair, &binned));
            }
        }
    }
    Ok((a, out))
}

/// Runs every applicable check over the cross-product of the configuration.
pub fn verify(config: &RunConfig) -> Result<Run, CliError> {
    config.validate()?;
    let jobs: Vec<Job> = config
        .states
        .iter()
        .flat_map(|spec| {
            spec.instances().into_iter().flat_map(move |seed| config.beta_grid.iter().map(move |&beta| Job { spec, seed, beta }))
        })
        .collect();
    let results: Vec<(Analysis, Vec<RelationReport>)> =
        jobs.par_iter().map(|job| state_reports(job, config)).collect::<Result<_, _>>()?;

    let mut reports: Vec<RelationReport> = Vec::new();
    let mut corrections = Vec::new();
    for (a, r) in &results {
        corrections.push((a.label.clone(), a.params.beta(), a.correction.value));
        reports.extend(r.iter().cloned());
    }

    // the small-beta expansion applies to states whose shape does not scale with q0
    let mut families: Vec<Vec<Analysis>> = Vec::new();
    for (job, (a, _)) in jobs.iter().zip(&results) {
        let fixed_shape = job.spec.name == "truncated_gaussian_q";
        if !(fixed_shape && job.beta > 0.0 && job.beta <= LINEARIZATION_BETA_MAX) {
            continue;
        }
        match families.iter_mut().find(|f| f[0].label == a.label) {
            Some(f) => f.push(a.clone()),
            None => families.push(vec![a.clone()]),
        }
    }
    for f in &families {
        reports.extend(correction_linearization_check(f));
    }

    let mut sf = Vec::new();
    for &sigma in &config.sigma_grid {
        for &beta in &config.beta_grid {
            let params = make_params(beta)?;
            let report = check_sf_bound(sigma, params)?;
            let value = s_f(&gaussian_acceptance(sigma)?, params);
            let bound = if beta > 0.0 { s_f_gaussian_bound(sigma, beta)? } else { f64::INFINITY };
            sf.push((sigma, beta, value, bound));
            reports.push(report);
        }
    }

    let t = config.tolerances;
    let mut reports: Vec<RelationReport> = reports
        .into_iter()
        .map(|r| {
            let shift: f64 = config
                .perturbations
                .iter()
                .filter(|p| p.relation_id == r.relation_id.as_str())
                .map(|p| p.rhs_shift)
                .sum();
            r.shifted(shift).with_tolerance(t.absolute, t.error_multiplier)
        })
        .collect();
    sort_reports(&mut reports);
    Ok(Run { reports, corrections, sf })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepParam {
    Beta,
    Sigma,
    Alpha,
}

impl SweepParam {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParam::Beta => "beta",
            SweepParam::Sigma => "sigma",
            SweepParam::Alpha => "alpha",
        }
    }
}

/// One row of a sweep table.
pub struct SweepRow {
    pub param_value: f64,
    pub report: RelationReport,
    pub correction_term: Option<f64>,
    pub s_f: Option<(f64, f64)>,
}

/// Varies one parameter over its grid, holding the others at the first entry
/// of their grids.
pub fn sweep(config: &RunConfig, param: SweepParam) -> Result<Vec<SweepRow>, CliError> {
    config.validate()?;
    let values = match param {
        SweepParam::Beta => &config.beta_grid,
        SweepParam::Sigma => &config.sigma_grid,
        SweepParam::Alpha => &config.alpha_grid,
    };
    let mut rows = Vec::new();
    for &v in values {
        let mut c = config.clone();
        c.beta_grid = vec![config.beta_grid[0]];
        c.sigma_grid = vec![config.sigma_grid[0]];
        c.alpha_grid = vec![config.alpha_grid[0]];
        match param {
            SweepParam::Beta => c.beta_grid = vec![v],
            SweepParam::Sigma => c.sigma_grid = vec![v],
            SweepParam::Alpha => c.alpha_grid = vec![v],
        }
        let run = verify(&c)?;
        for r in &run.reports {
            let correction_term = run.correction(&r.inputs.state, r.inputs.beta);
            let s_f = r.inputs.sigma.and_then(|s| run.s_f(s, r.inputs.beta));
            rows.push(SweepRow { param_value: v, report: r.clone(), correction_term, s_f });
        }
    }
    Ok(rows)
}

/// Densities and entropies of one catalog state.
pub struct StateDump {
    pub analysis: Analysis,
    pub masses: [f64; 3],
}

pub fn show_state(spec: &StateSpec, seed: Option<u64>, beta: f64) -> Result<StateDump, CliError> {
    let state = build_state(spec, seed, beta)?;
    let analysis = Analysis::of(&state)?;
    let b = &analysis.bundle;
    let masses = [b.v_q.mass()?.value, b.u_k.mass()?.value, b.w_x.mass()?.value];
    Ok(StateDump { analysis, masses })
}

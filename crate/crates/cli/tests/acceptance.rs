//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Margins are compared against the stated absolute thresholds, not against the
//! report tolerances. Criteria listed in `KNOWN_FAILURES` are computed and
//! reported like every other; the process exits nonzero only when the set of
//! failing criteria differs from that list.

use std::f64::consts::{E, LN_2, PI};
use std::path::PathBuf;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use minlen::entropy::{diff_shannon, mc_diff_shannon, uniform_edges};
use minlen::measurement::{gaussian_acceptance, s_f, s_f_gaussian_bound};
use minlen::params::conjugate_order;
use minlen::relations::*;
use minlen::{catalog_state, make_params, CatalogName, MixedState, RelationReport, Verdict};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// The approach of `S_f` to its Gaussian bound is too slow for the 5% window at
/// `sigma^2 beta = 100`: the ratio there is `erfcx(1/sqrt(200))`, about 0.925.
const KNOWN_FAILURES: &[u32] = &[11];

const MARGIN_FLOOR: f64 = -1e-8;
const BETAS: [f64; 3] = [1e-3, 0.1, 1.0];
const ALPHAS: [f64; 4] = [1.25, 1.5, 2.0, 3.0];

struct Outcome {
    ok: bool,
    detail: String,
}

fn state(name: CatalogName, beta: f64, shape: &[f64], seed: Option<u64>) -> MixedState {
    catalog_state(name, make_params(beta).unwrap(), shape, seed).unwrap().into()
}

fn catalog(beta: f64) -> Vec<MixedState> {
    CatalogName::ALL
        .iter()
        .map(|&n| state(n, beta, &[], (n == CatalogName::RandomFourierQ).then_some(11)))
        .collect()
}

/// Smallest margin among applicable reports, with the offending relation.
fn worst(reports: &[RelationReport]) -> (f64, String) {
    reports
        .iter()
        .filter(|r| r.verdict != Verdict::NotApplicable)
        .map(|r| (r.margin, format!("{} [{}]", r.relation_id, r.inputs_digest)))
        .fold((f64::INFINITY, String::new()), |a, b| if b.0 < a.0 { b } else { a })
}

fn margin_outcome(reports: &[RelationReport]) -> Outcome {
    let (m, which) = worst(reports);
    Outcome { ok: m >= MARGIN_FLOOR, detail: format!("{} checks, min margin {m:.3e} at {which}", reports.len()) }
}

fn c1_identity() -> Outcome {
    let mut max_res: f64 = 0.0;
    for beta in BETAS {
        for s in catalog(beta) {
            let a = Analysis::of(&s).unwrap();
            max_res = max_res.max((a.h_k.value - a.h_q.value - a.correction.value).abs());
        }
    }
    Outcome { ok: max_res <= 1e-6, detail: format!("max |H(K) - H(Q) - <ln(1+beta k^2)>| = {max_res:.3e}") }
}

fn c2_cauchy() -> Outcome {
    let a = Analysis::of(&state(CatalogName::UniformQ, 1.0, &[], None)).unwrap();
    let dh = (a.h_k.value - (4.0 * PI).ln()).abs();
    let dc = (a.correction.value - 2.0 * LN_2).abs();
    Outcome { ok: dh <= 1e-6 && dc <= 1e-6, detail: format!("|H(K) - ln 4pi| = {dh:.3e}, |correction - 2 ln 2| = {dc:.3e}") }
}

fn c3_saturation() -> Outcome {
    let beta = 1e-6;
    let s = make_params(beta).unwrap().q0() / 20.0;
    let a = Analysis::of(&state(CatalogName::TruncatedGaussianQ, beta, &[s], None)).unwrap();
    let d = a.h_q.value + a.h_x.value - (E * PI).ln();
    Outcome { ok: d.abs() <= 1e-3, detail: format!("H(Q) + H(X) - ln(e pi) = {d:.3e}") }
}

fn c4_random_corrected() -> Outcome {
    let jobs: Vec<(u64, f64)> = (0..200u64).flat_map(|seed| BETAS.map(|b| (seed, b))).collect();
    let reports: Vec<RelationReport> = jobs
        .par_iter()
        .flat_map_iter(|&(seed, beta)| {
            let a = Analysis::of(&state(CatalogName::RandomFourierQ, beta, &[], Some(seed))).unwrap();
            check_bbm_corrected(&a).into_iter().filter(|r| r.relation_id == RelationId::BbmCorrected)
        })
        .collect();
    margin_outcome(&reports)
}

fn c5_smearing_monotone() -> Outcome {
    let states: Vec<MixedState> = [1e-3, 1.0].into_iter().flat_map(catalog).collect();
    let reports: Vec<RelationReport> = states
        .par_iter()
        .flat_map_iter(|s| {
            let a = Analysis::of(s).unwrap();
            [0.1, 1.0, 10.0]
                .into_iter()
                .flat_map(|sigma| {
                    let f = gaussian_acceptance(sigma).unwrap();
                    let sm = Smearing::of(&a, &f, &f).unwrap();
                    check_smeared_shannon(&a, &sm)
                })
                .filter(|r| matches!(r.relation_id, RelationId::SmearingMonotoneK | RelationId::SmearingMonotoneX))
                .collect::<Vec<_>>()
        })
        .collect();
    margin_outcome(&reports)
}

fn c6_binning() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut reports = Vec::new();
    let mut states = catalog(1.0);
    states.extend((0..4).map(|seed| state(CatalogName::RandomFourierQ, 0.1, &[], Some(100 + seed))));
    for s in &states {
        let a = Analysis::of(s).unwrap();
        for _ in 0..5 {
            let dk: f64 = rng.random_range(0.05..=2.0);
            let dx: f64 = rng.random_range(0.05..=2.0);
            let (ok, ox): (f64, f64) = (rng.random(), rng.random());
            let ek = uniform_edges(-40.0 - ok * dk, 40.0 - ok * dk, dk).unwrap();
            let ex = uniform_edges(-60.0 - ox * dx, 60.0 - ox * dx, dx).unwrap();
            reports.extend(check_binned_shannon(&a, &ek, &ex).unwrap());
        }
    }
    margin_outcome(&reports)
}

fn c7_correction_bounds() -> Outcome {
    let mut jensen = Vec::new();
    for beta in BETAS {
        for s in catalog(beta) {
            let a = Analysis::of(&s).unwrap();
            jensen.extend(check_bbm_corrected(&a).into_iter().filter(|r| r.relation_id == RelationId::JensenCorrection));
        }
    }
    let applicable = jensen.iter().filter(|r| r.verdict != Verdict::NotApplicable).count();
    let (jm, _) = worst(&jensen);
    let a = Analysis::of(&state(CatalogName::TruncatedGaussianQ, 1e-3, &[], None)).unwrap();
    let lin = correction_linearization_check(std::slice::from_ref(&a));
    let dev = lin[0].rhs;
    Outcome {
        ok: jm >= MARGIN_FLOOR && applicable > 0 && lin[0].verdict != Verdict::NotApplicable && dev <= 0.1,
        detail: format!("Jensen min margin {jm:.3e} over {applicable} states; |ratio - 1| = {dev:.3e} at beta 1e-3"),
    }
}

fn c8_kappa() -> Outcome {
    let d = [
        (kappa_from_gamma(0.5).unwrap() - 2.0).abs(),
        (kappa(conjugate_order(1.0).unwrap()) - E).abs(),
        (kappa(conjugate_order(1.5).unwrap()) - 8.0 / 3.0).abs(),
    ];
    let m = d.iter().cloned().fold(0.0, f64::max);
    Outcome { ok: m <= 1e-12, detail: format!("max deviation {m:.3e}") }
}

/// Reports for criteria 9 and 10 over the catalog at two deformations.
fn order_reports() -> (Vec<RelationReport>, Vec<RelationReport>) {
    let (mut renyi, mut tsallis) = (Vec::new(), Vec::new());
    let f = gaussian_acceptance(1.0).unwrap();
    let ez = uniform_edges(-40.0, 40.0, 0.5).unwrap();
    let exi = uniform_edges(-60.0, 60.0, 0.5).unwrap();
    for beta in [0.1, 1.0] {
        for s in catalog(beta) {
            let a = Analysis::of(&s).unwrap();
            let sm = Smearing::of(&a, &f, &f).unwrap();
            for alpha in ALPHAS {
                let pair = conjugate_order(alpha).unwrap();
                renyi.extend(check_beckner(&a, pair));
                renyi.extend(check_renyi_smeared(&a, &sm, pair));
                let b = BinnedSmearing::of(&sm, pair, &ez, &exi).unwrap();
                for r in check_renyi_binned(&a, &sm, pair, &b) {
                    if matches!(r.relation_id, RelationId::NormOrderingM | RelationId::NormOrderingN) {
                        tsallis.push(r);
                    } else {
                        renyi.push(r);
                    }
                }
                tsallis.extend(check_tsallis_binned(&a, &sm, pair, &b));
            }
        }
    }
    (renyi, tsallis)
}

fn c11_sf() -> Outcome {
    let logspace = |lo: f64, hi: f64, i: usize| 10f64.powf(lo + (hi - lo) * i as f64 / 19.0);
    let mut worst_one = f64::INFINITY;
    let mut worst_bound = f64::INFINITY;
    for i in 0..20 {
        for j in 0..20 {
            let (sigma, beta) = (logspace(-1.0, 1.0, i), logspace(-3.0, 1.0, j));
            let v = s_f(&gaussian_acceptance(sigma).unwrap(), make_params(beta).unwrap());
            worst_one = worst_one.min(1.0 - v);
            worst_bound = worst_bound.min(s_f_gaussian_bound(sigma, beta).unwrap() - v);
        }
    }
    let (sigma, beta) = (10.0, 1.0);
    let ratio = s_f(&gaussian_acceptance(sigma).unwrap(), make_params(beta).unwrap()) / s_f_gaussian_bound(sigma, beta).unwrap();
    let ok = worst_one >= MARGIN_FLOOR && worst_bound >= MARGIN_FLOOR && (ratio - 1.0).abs() <= 0.05;
    Outcome {
        ok,
        detail: format!(
            "min(1 - S_f) = {worst_one:.3e}, min(bound - S_f) = {worst_bound:.3e}, S_f/bound at sigma^2 beta = 100: {ratio:.4} (needs >= 0.95)"
        ),
    }
}

fn c12_monte_carlo() -> Outcome {
    let r = Analysis::of(&state(CatalogName::RaisedCosineQ, 1.0, &[], None)).unwrap();
    let u = Analysis::of(&state(CatalogName::UniformQ, 1.0, &[], None)).unwrap();
    let g = Analysis::of(&state(CatalogName::TruncatedGaussianQ, 0.1, &[], None)).unwrap();
    let cases = [("raised_cosine v(q)", &r.bundle.v_q), ("uniform u(k)", &u.bundle.u_k), ("truncated_gaussian w(x)", &g.bundle.w_x)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, (name, d)) in cases.iter().enumerate() {
        let q = diff_shannon(d).unwrap().value;
        let mc = mc_diff_shannon(d, 1_000_000, 1200 + i as u64).unwrap();
        let z = (mc.value - q) / mc.est_error;
        ok &= z.abs() <= 4.0;
        parts.push(format!("{name}: z = {z:+.2}"));
    }
    Outcome { ok, detail: parts.join(", ") }
}

fn c13_cli() -> Outcome {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let run = |cfg: &str| {
        Command::new(env!("CARGO_BIN_EXE_minlen"))
            .args(["verify", "--config", fixtures.join(cfg).to_str().unwrap()])
            .output()
            .unwrap()
    };
    let (a, b) = (run("small.json"), run("small.json"));
    let identical = a.stdout == b.stdout && !a.stdout.is_empty();
    let injected = run("inject_failure.json").status.code();
    Outcome {
        ok: identical && a.status.code() == Some(0) && injected == Some(1),
        detail: format!("identical reports: {identical}, clean exit {:?}, injected exit {injected:?}", a.status.code()),
    }
}

type Criterion<'a> = (u32, &'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() {
    let shared = OnceLock::new();
    let orders = || shared.get_or_init(order_reports);
    let criteria: Vec<Criterion> = vec![
        (1, "entropy identity", Box::new(c1_identity)),
        (2, "Cauchy cross-check", Box::new(c2_cauchy)),
        (3, "BBM saturation by a narrow Gaussian", Box::new(c3_saturation)),
        (4, "corrected Shannon bound on 200 random states", Box::new(c4_random_corrected)),
        (5, "smearing monotonicity", Box::new(c5_smearing_monotone)),
        (6, "binning lemma and binned bound", Box::new(c6_binning)),
        (7, "correction bounds", Box::new(c7_correction_bounds)),
        (8, "kappa endpoints", Box::new(c8_kappa)),
        (9, "Beckner and Renyi relations", Box::new(|| margin_outcome(&orders().0))),
        (10, "Tsallis binned relations and norm ordering", Box::new(|| margin_outcome(&orders().1))),
        (11, "S_f certification", Box::new(c11_sf)),
        (12, "quadrature vs Monte Carlo entropy", Box::new(c12_monte_carlo)),
        (13, "CLI determinism and exit codes", Box::new(c13_cli)),
    ];
    let mut failed = Vec::new();
    for (id, name, run) in &criteria {
        let t = Instant::now();
        let o = run();
        let tag = if o.ok { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {tag}: {name}: {} ({:.1}s)", o.detail, t.elapsed().as_secs_f64());
        if !o.ok {
            failed.push(*id);
        }
    }
    let expected: Vec<u32> = KNOWN_FAILURES.to_vec();
    println!("failing criteria: {failed:?}; documented as unattainable: {expected:?}");
    if failed != expected {
        eprintln!("acceptance outcome differs from the documented set");
        std::process::exit(1);
    }
}

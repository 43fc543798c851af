//! One-call orchestration: run every estimator on a scenario, derive the
//! pairwise constants from a shared harvest, and evaluate all cross-checks.

use serde::Serialize;

use crate::error::Result;
use crate::estimators::{
    derived_euclidean_constants, estimate_itrhat, estimate_strc, estimate_subtransversality,
    estimate_transversality, intrinsic_curves, pairs_at_radii, ConstantEstimate,
    EstimatorParams, RadiusValue, RelativeNormalPair, WitnessTriple,
};
use crate::rng::stream_seed;
use crate::scenario::PairScenario;
use crate::sets::RadiusSchedule;
use crate::verify::{
    check_chain, check_convex_equivalence, check_directional_identities, check_pair_identities,
    check_pair_sum_agreement, lemma_property_suite, CheckResult, VerificationReport,
};

/// Every constant estimated for one scenario, all from one master seed.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioEstimates {
    pub label: String,
    pub convex: bool,
    pub seed: u64,
    pub schedule: RadiusSchedule,
    pub eta_min: f64,
    pub harvest_id: u64,
    pub positively_independent: bool,
    pub str_est: ConstantEstimate,
    pub tr_est: ConstantEstimate,
    pub itr_est: ConstantEstimate,
    pub strc_est: ConstantEstimate,
    pub itr1: ConstantEstimate,
    pub itr2: ConstantEstimate,
    pub itr3: ConstantEstimate,
    pub itr_from_pairs: ConstantEstimate,
    pub itrhat1: ConstantEstimate,
    pub itrhat2: ConstantEstimate,
    /// Feasible witness triples at the smallest radius.
    pub witnesses: Vec<WitnessTriple>,
    /// Harvested pairs at the smallest radius.
    pub pairs: Vec<RelativeNormalPair>,
}

impl ScenarioEstimates {
    /// All estimates in the fixed reporting order.
    pub fn all(&self) -> [&ConstantEstimate; 10] {
        [
            &self.str_est,
            &self.tr_est,
            &self.itr_est,
            &self.strc_est,
            &self.itr1,
            &self.itr2,
            &self.itr3,
            &self.itr_from_pairs,
            &self.itrhat1,
            &self.itrhat2,
        ]
    }
}

fn intrinsic_estimate_from_curves(
    curves: &[(RadiusValue, Vec<WitnessTriple>)],
    seed: u64,
) -> (ConstantEstimate, Vec<WitnessTriple>) {
    use crate::estimators::{ConstantName, EstimateFlags};
    let no_witness = curves.last().is_some_and(|(_, w)| w.is_empty());
    let witnesses = curves.last().map(|(_, w)| w.clone()).unwrap_or_default();
    let per_radius = curves.iter().map(|(rv, _)| rv.clone()).collect();
    let flags = EstimateFlags {
        no_witness,
        ..EstimateFlags::default()
    };
    (
        ConstantEstimate::from_curve(ConstantName::Itr, per_radius, seed, flags),
        witnesses,
    )
}

/// Runs all estimators on the scenario. The intrinsic witness search is run
/// once; its per-radius harvest feeds both the intrinsic estimate and the
/// four pair-derived constants, which share a harvest id.
pub fn estimate_all(
    sc: &PairScenario,
    params: &EstimatorParams,
    seed: u64,
) -> Result<ScenarioEstimates> {
    let str_est = estimate_subtransversality(sc, params, seed)?;
    let tr_est = estimate_transversality(sc, params, seed)?;

    let curves = intrinsic_curves(sc, params, seed)?;
    let (itr_est, witnesses) = intrinsic_estimate_from_curves(&curves, seed);
    let pair_curves = pairs_at_radii(&curves);
    let harvest_id = stream_seed(seed, &["harvest", &sc.label]);
    let derived = derived_euclidean_constants(&pair_curves, sc.dimension, seed)?;
    let pairs = pair_curves
        .last()
        .map(|(_, p)| p.clone())
        .unwrap_or_default();

    let (strc_est, _) = estimate_strc(sc, params, seed)?;
    let (itrhat1, itrhat2) = estimate_itrhat(sc, params, seed)?;

    Ok(ScenarioEstimates {
        label: sc.label.clone(),
        convex: sc.is_convex(),
        seed,
        schedule: params.schedule.clone(),
        eta_min: params.schedule.eta_min(params.tol.eta0),
        harvest_id,
        positively_independent: derived.positively_independent,
        str_est,
        tr_est,
        itr_est,
        strc_est,
        itr1: derived.itr1.with_harvest_id(harvest_id),
        itr2: derived.itr2.with_harvest_id(harvest_id),
        itr3: derived.itr3.with_harvest_id(harvest_id),
        itr_from_pairs: derived.itr_from_pairs.with_harvest_id(harvest_id),
        itrhat1,
        itrhat2,
        witnesses,
        pairs,
    })
}

/// All cross-checks for one estimated scenario, including the base-point
/// consistency rows of the scenario itself.
pub fn verify_scenario(
    sc: &PairScenario,
    est: &ScenarioEstimates,
    params: &EstimatorParams,
) -> Result<VerificationReport> {
    let mut rows: Vec<CheckResult> = sc
        .validate(&params.tol)
        .into_iter()
        .map(|c| CheckResult {
            id: c.name,
            lhs: c.value,
            rhs: c.bound,
            tol: c.bound,
            pass: c.pass,
        })
        .collect();

    let thr = 2.0 * est.eta_min;
    let sampled_tol = 0.05;
    let derived = crate::estimators::DerivedConstants {
        itr1: est.itr1.clone(),
        itr2: est.itr2.clone(),
        itr3: est.itr3.clone(),
        itr_from_pairs: est.itr_from_pairs.clone(),
        positively_independent: est.positively_independent,
    };
    rows.extend(check_pair_identities(&derived, sampled_tol)?);
    rows.extend(check_directional_identities(
        &est.itrhat1,
        &est.itrhat2,
        &est.itr_from_pairs,
        sampled_tol,
        0.02,
        thr,
    ));
    rows.extend(check_chain(
        &est.str_est,
        &est.tr_est,
        &est.itr_est,
        &est.strc_est,
        est.convex,
        sampled_tol,
    ));
    rows.push(check_pair_sum_agreement(
        &est.pairs,
        est.itr_from_pairs.value,
        thr,
    ));
    if est.convex {
        rows.extend(check_convex_equivalence(
            true,
            &est.str_est,
            &est.strc_est,
            &est.itr_est,
            thr,
        )?);
    }
    Ok(VerificationReport::new(&est.label, rows))
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioRun {
    pub estimates: ScenarioEstimates,
    pub report: VerificationReport,
}

pub fn run_scenario(
    sc: &PairScenario,
    params: &EstimatorParams,
    seed: u64,
) -> Result<ScenarioRun> {
    let estimates = estimate_all(sc, params, seed)?;
    let report = verify_scenario(sc, &estimates, params)?;
    Ok(ScenarioRun { estimates, report })
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub scenarios: Vec<ScenarioRun>,
    pub vector_facts: Vec<CheckResult>,
    pub overall: bool,
}

/// Runs every scenario with a label-derived seed, so battery order does not
/// change any individual result, then appends the suite-wide vector-fact
/// rows.
pub fn run_suite(
    scenarios: &[PairScenario],
    params: &EstimatorParams,
    seed: u64,
) -> Result<SuiteReport> {
    let mut runs = Vec::new();
    for sc in scenarios {
        let sc_seed = stream_seed(seed, &["scenario", &sc.label]);
        runs.push(run_scenario(sc, params, sc_seed)?);
    }
    let vector_facts = lemma_property_suite(10_000, stream_seed(seed, &["facts"]));
    let overall =
        runs.iter().all(|r| r.report.overall) && vector_facts.iter().all(|c| c.pass);
    Ok(SuiteReport {
        seed,
        scenarios: runs,
        vector_facts,
        overall,
    })
}

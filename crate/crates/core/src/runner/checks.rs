//! Check implementations. Each returns a report whose `data` is plain JSON.

use rand::Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value};

use super::export::{QuotientExport, SubmoduleExport};
use super::{pass_if, CheckName, CheckReport, CheckResult, CheckStatus, Experiment, Fault};
use crate::batch;
use crate::dynamics::{
    adjoint_decay, conjecture_probe, default_decay_horizon, equivalent_frame_vector, lower_bound_chain,
    polynomial_calculus, summability,
};
use crate::error::Error;
use crate::frame::{
    frame_bounds, iterate, kernel_doubly_commutes, kernel_shift_invariance, Classification, FrameReport,
    KERNEL_REL,
};
use crate::hardy::{BidiscPoly, DegreePair};
use crate::inner::{build_inner, verify_unimodular};
use crate::linalg::{
    identity, null_space, op_norm, singular_values, subspace_distance, CMatrix, CVector, C64,
};
use crate::model::{
    compare_quotients, random_similarity, recover_model, riesz_triple, similarity_from_dual_frame,
    similarity_from_pivots, transport, uniqueness_of_l,
};
use crate::submodule::{codimension_profile, doubly_commute_test, SubmoduleKind};

pub const UNIMODULAR_GRID: usize = 64;
pub const UNIMODULAR_TOL: f64 = 1e-9;
pub const JORDAN_TOL: f64 = 1e-9;
pub const BRACKET_TOL: f64 = 1e-9;
pub const TRANSPORT_KERNEL_TOL: f64 = 1e-10;
pub const RECOVER_RESIDUAL_TOL: f64 = 1e-7;
pub const RECOVER_SUBSPACE_TOL: f64 = 1e-8;
pub const RECOVER_SPECTRUM_TOL: f64 = 1e-7;
pub const SYMMETRY_TOL: f64 = 1e-9;

const STREAM_VECTORS: u64 = 1 << 20;
const STREAM_PROBE: u64 = 2 << 20;
const STREAM_EQUIV: u64 = 3 << 20;

pub fn run_check(exp: &Experiment, name: CheckName) -> CheckResult {
    match name {
        CheckName::Submodule => submodule(exp),
        CheckName::Quotient => quotient(exp),
        CheckName::Unimodular => unimodular(exp),
        CheckName::Codimension => codimension(exp),
        CheckName::Mandrekar => mandrekar(exp),
        CheckName::JordanIdentity => jordan_identity(exp),
        CheckName::Parseval => parseval(exp),
        CheckName::KernelInvariance => kernel_invariance(exp),
        CheckName::KernelDoublyCommutes => kernel_commute(exp),
        CheckName::Similarity => similarity(exp),
        CheckName::Recover => recover(exp),
        CheckName::Riesz => riesz(exp),
        CheckName::AdjointDecay => decay(exp),
        CheckName::Conjecture => conjecture(exp),
        CheckName::EquivVector => equiv_vector(exp),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> std::result::Result<Value, Fault> {
    serde_json::to_value(v).map_err(|e| Fault::Fatal(e.into()))
}

fn info(msg: &str) -> Fault {
    Fault::Outcome(CheckStatus::Info, msg.to_string())
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    let v = CVector::from_fn(n, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let norm = v.norm();
    if norm == 0.0 {
        v
    } else {
        v / C64::new(norm, 0.0)
    }
}

fn is_beurling(kind: &SubmoduleKind) -> bool {
    matches!(kind, SubmoduleKind::Beurling { .. })
}

pub fn bound_trace_csv(report: &FrameReport) -> String {
    let mut out = String::from("h,lower,upper\n");
    for (h, lo, hi) in &report.bound_trace {
        out.push_str(&format!("{h},{lo:e},{hi:e}\n"));
    }
    out
}

fn submodule(exp: &Experiment) -> CheckResult {
    let sub = exp.submodule()?;
    Ok(CheckReport::new(CheckName::Submodule, CheckStatus::Info, to_value(&SubmoduleExport::new(sub))?))
}

fn quotient(exp: &Experiment) -> CheckResult {
    let q = exp.quotient()?;
    Ok(CheckReport::new(CheckName::Quotient, CheckStatus::Info, to_value(&QuotientExport::new(q))?))
}

fn unimodular(exp: &Experiment) -> CheckResult {
    let spec = exp.config.inner.as_ref().ok_or_else(|| info("no inner function configured"))?;
    let ip = build_inner(spec, exp.config.order)?;
    let rep = verify_unimodular(&ip, UNIMODULAR_GRID)?;
    let data = json!({
        "grid": rep.grid,
        "max_dev": rep.max_dev,
        "trunc_error": ip.trunc_error,
        "tolerance": UNIMODULAR_TOL,
    });
    if rep.max_dev <= UNIMODULAR_TOL {
        Ok(CheckReport::new(CheckName::Unimodular, CheckStatus::Pass, data))
    } else if ip.trunc_error > 0.0 {
        Ok(CheckReport::new(CheckName::Unimodular, CheckStatus::Info, data)
            .with_message("truncated series: deviation reflects the discarded tail"))
    } else {
        Ok(CheckReport::new(CheckName::Unimodular, CheckStatus::Fail, data))
    }
}

fn codimension(exp: &Experiment) -> CheckResult {
    let spec = exp.config.inner.as_ref().ok_or_else(|| info("no inner function configured"))?;
    let deg = spec.degree();
    let kmin = deg.d1.max(deg.d2).max(1);
    let kmax = exp.config.order.d1.max(exp.config.order.d2).max(kmin + 2);
    let orders: Vec<DegreePair> = (kmin..=kmax).map(|k| DegreePair::new(k, k)).collect();
    let profile = codimension_profile(spec, &orders)?;
    let increasing = profile.windows(2).all(|w| w[0] < w[1]);
    let ok = if spec.is_constant() { profile.iter().all(|&c| c == 0) } else { increasing };
    let data = json!({
        "orders": orders,
        "codimensions": profile,
        "strictly_increasing": increasing,
        "constant_inner": spec.is_constant(),
    });
    Ok(CheckReport::new(CheckName::Codimension, pass_if(ok), data))
}

fn mandrekar(exp: &Experiment) -> CheckResult {
    let sub = exp.submodule()?;
    let rep = doubly_commute_test(sub)?;
    let mut data = to_value(&rep)?;
    data["submodule"] = json!(sub.kind.name());
    if is_beurling(&sub.kind) {
        Ok(CheckReport::new(CheckName::Mandrekar, pass_if(rep.verdict), data))
    } else {
        Ok(CheckReport::new(CheckName::Mandrekar, CheckStatus::Info, data)
            .with_message(format!("verdict {} recorded for a non-Beurling submodule", rep.verdict)))
    }
}

fn jordan_identity(exp: &Experiment) -> CheckResult {
    let q = exp.quotient()?;
    if q.is_trivial() {
        return Err(Error::TrivialQuotient.into());
    }
    let range = q.interior_range().ok_or_else(|| info("box too small for an interior range"))?;
    let residual = q.jordan_identity_residual(range);
    let data = json!({
        "interior_range": range,
        "residual": residual,
        "tolerance": JORDAN_TOL,
        "commutator_residual": q.commutator_residual(),
    });
    Ok(CheckReport::new(CheckName::JordanIdentity, pass_if(residual <= JORDAN_TOL), data))
}

fn parseval(exp: &Experiment) -> CheckResult {
    let (sys, report) = exp.system()?;
    let sub = exp.submodule()?;
    let mut data = to_value(report)?;
    let exact_box = exp.config.horizon() == exp.config.order;
    let kernel_ok = !exact_box || report.kernel_dim == sub.rank();
    data["expected_kernel_dim"] = if exact_box { json!(sub.rank()) } else { Value::Null };
    data["dim"] = json!(sys.triple.dim());
    Ok(CheckReport::new(CheckName::Parseval, pass_if(report.parseval && kernel_ok), data)
        .with_csv(bound_trace_csv(report)))
}

fn kernel_invariance(exp: &Experiment) -> CheckResult {
    let (sys, _) = exp.system()?;
    let rep = kernel_shift_invariance(sys)?;
    let data = to_value(&rep)?;
    let r = CheckReport::new(CheckName::KernelInvariance, pass_if(rep.passed), data);
    Ok(if rep.vacuous { r.with_message("kernel is trivial") } else { r })
}

fn kernel_commute(exp: &Experiment) -> CheckResult {
    let (sys, _) = exp.system()?;
    let sub = exp.submodule()?;
    let rep = kernel_doubly_commutes(sys)?;
    let data = to_value(&rep)?;
    let status = if rep.vacuous {
        CheckStatus::Info
    } else if is_beurling(&sub.kind) {
        pass_if(rep.verdict)
    } else {
        CheckStatus::Info
    };
    Ok(CheckReport::new(CheckName::KernelDoublyCommutes, status, data))
}

fn similarity(exp: &Experiment) -> CheckResult {
    let (sys, report) = exp.system()?;
    if !report.is_frame() {
        return Ok(CheckReport::new(CheckName::Similarity, CheckStatus::Fail, Value::Null)
            .with_message("base system is not a frame"));
    }
    let t = exp.config.transport();
    let seed = exp.config.transport_seed();
    let base_kernel = null_space(&sys.synthesis, KERNEL_REL);
    let trials: Vec<u64> = (0..t.trials as u64).collect();
    let rows = batch::try_map(&trials, |&k| -> crate::Result<Value> {
        let mut rng = Experiment::rng(seed, k);
        let l = random_similarity(&mut rng, sys.triple.dim(), t.condition_cap)?;
        let (moved, witness) = transport(&sys.triple, &l)?;
        let msys = iterate(&moved, sys.horizon)?;
        let r = frame_bounds(&msys);
        let (s2min, s2max) = (witness.sigma_min.powi(2), witness.sigma_max.powi(2));
        let tol = BRACKET_TOL * (s2max * report.upper).max(1.0);
        let bracket = r.lower >= s2min * report.lower - tol && r.upper <= s2max * report.upper + tol;
        let verdict = r.is_frame() && (r.kernel_dim == 0) == (report.kernel_dim == 0);
        let kernel_distance = subspace_distance(&base_kernel, &null_space(&msys.synthesis, KERNEL_REL));
        let l1 = similarity_from_dual_frame(sys, &msys)?;
        let l2 = similarity_from_pivots(sys, &msys)?;
        let uniq = uniqueness_of_l(sys, &msys, &l1, &l2)?;
        let ok =
            witness.certified && bracket && verdict && kernel_distance <= TRANSPORT_KERNEL_TOL && uniq.passed;
        Ok(json!({
            "trial": k,
            "condition": witness.condition(),
            "sigma_min": witness.sigma_min,
            "sigma_max": witness.sigma_max,
            "lower": r.lower,
            "upper": r.upper,
            "classification": r.classification,
            "bracket_ok": bracket,
            "verdict_preserved": verdict,
            "kernel_distance": kernel_distance,
            "uniqueness_distance": uniq.distance,
            "witness_residual": witness.residual_t1.max(witness.residual_t2).max(witness.residual_phi),
            "passed": ok,
        }))
    })?;
    let all = rows.iter().all(|r| r["passed"] == json!(true));
    let data = json!({
        "seed": seed,
        "condition_cap": t.condition_cap,
        "base": {"lower": report.lower, "upper": report.upper, "classification": report.classification},
        "trials": rows,
    });
    Ok(CheckReport::new(CheckName::Similarity, pass_if(all), data))
}

fn recover(exp: &Experiment) -> CheckResult {
    let (sys, _) = exp.system()?;
    let q = exp.quotient()?;
    let rec = recover_model(sys)?;
    let s = rec.summary();
    let mut ok = s.intertwine_residual_z <= RECOVER_RESIDUAL_TOL
        && s.intertwine_residual_w <= RECOVER_RESIDUAL_TOL
        && s.seed_residual <= RECOVER_RESIDUAL_TOL;
    let round_trip = if exp.config.horizon() == exp.config.order {
        let rt = compare_quotients(q, &rec.quotient);
        ok &= rt.subspace_distance <= RECOVER_SUBSPACE_TOL
            && rt.jordan_sv_distance <= RECOVER_SPECTRUM_TOL
            && rt.jordan_basis_change_residual <= RECOVER_RESIDUAL_TOL;
        to_value(&rt)?
    } else {
        Value::Null
    };

    let t = exp.config.transport();
    let mut rng = Experiment::rng(exp.config.transport_seed(), 0);
    let l = random_similarity(&mut rng, sys.triple.dim(), t.condition_cap)?;
    let (moved, _) = transport(&sys.triple, &l)?;
    let mrec = recover_model(&iterate(&moved, sys.horizon)?)?;
    let ms = mrec.summary();
    let composition = op_norm(&(mrec.synthesis_on_k() - &l * rec.synthesis_on_k()));
    let k_distance = subspace_distance(&rec.quotient.onb_k, &mrec.quotient.onb_k);
    ok &= ms.intertwine_residual_z <= RECOVER_RESIDUAL_TOL
        && ms.intertwine_residual_w <= RECOVER_RESIDUAL_TOL
        && composition <= RECOVER_RESIDUAL_TOL
        && k_distance <= RECOVER_SUBSPACE_TOL;

    let data = json!({
        "recovery": s,
        "round_trip": round_trip,
        "subspace_metric": "sine of the largest principal angle",
        "transported": {
            "recovery": ms,
            "composition_residual": composition,
            "k_distance": k_distance,
            "l_condition": crate::linalg::condition_number(&l),
        },
    });
    Ok(CheckReport::new(CheckName::Recover, pass_if(ok), data))
}

fn riesz(exp: &Experiment) -> CheckResult {
    let order = exp.config.order;
    let t = riesz_triple(order)?;
    let sys = iterate(&t, order)?;
    let report = frame_bounds(&sys);
    let gram = sys.synthesis.adjoint() * &sys.synthesis;
    let gram_dev = (gram - identity(sys.synthesis.ncols())).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut ok = report.classification == Classification::MinimalFrame && gram_dev == 0.0;

    let tc = exp.config.transport();
    let seed = exp.config.transport_seed();
    let trials: Vec<u64> = (0..tc.trials as u64).collect();
    let rows = batch::try_map(&trials, |&k| -> crate::Result<Value> {
        let mut rng = Experiment::rng(seed, k);
        let l = random_similarity(&mut rng, t.dim(), tc.condition_cap)?;
        let (moved, w) = transport(&t, &l)?;
        let r = frame_bounds(&iterate(&moved, order)?);
        let (s2min, s2max) = (w.sigma_min.powi(2), w.sigma_max.powi(2));
        let tol = BRACKET_TOL * s2max.max(1.0);
        let passed = r.classification == Classification::MinimalFrame
            && (r.lower - s2min).abs() <= tol
            && (r.upper - s2max).abs() <= tol;
        Ok(json!({
            "trial": k,
            "classification": r.classification,
            "lower": r.lower,
            "upper": r.upper,
            "sigma_min_sq": s2min,
            "sigma_max_sq": s2max,
            "passed": passed,
        }))
    })?;
    ok &= rows.iter().all(|r| r["passed"] == json!(true));
    let data = json!({
        "classification": report.classification,
        "gram_max_deviation": gram_dev,
        "transported": rows,
    });
    Ok(CheckReport::new(CheckName::Riesz, pass_if(ok), data))
}

fn decay(exp: &Experiment) -> CheckResult {
    let (sys, report) = exp.system()?;
    let order = exp.config.order;
    let nil = default_decay_horizon(order);
    let n = sys.triple.dim();
    let trials: Vec<u64> = (0..exp.config.transport().trials.max(1) as u64).collect();
    let rows = batch::try_map(&trials, |&k| -> crate::Result<(Value, bool, String)> {
        let mut rng = Experiment::rng(exp.config.seed, STREAM_VECTORS + k);
        let f = random_unit_vector(&mut rng, n);
        let trace = adjoint_decay(&sys.triple, report, &f, nil)?;
        let exact = trace.max_beyond(nil) == 0.0;
        let sum = summability(sys, report, &f)?;
        let chain = lower_bound_chain(sys, report, &f)?;
        let chain_ok = chain.passed || !report.parseval;
        let ok = trace.decayed == Some(true) && exact && sum.passed && chain_ok;
        let row = json!({
            "trial": k,
            "tail_max": trace.tail_max,
            "diagonal_tail": trace.diagonal_tail,
            "exact_vanishing": exact,
            "summability_excess": sum.excess,
            "chain_max_violation": chain.max_violation,
            "chain_asserted": report.parseval,
            "passed": ok,
        });
        Ok((row, ok, trace.to_csv()))
    })?;
    let ok = rows.iter().all(|r| r.1);
    let csv = rows.first().map(|r| r.2.clone()).unwrap_or_default();
    let data = json!({
        "horizon": nil,
        "trials": rows.into_iter().map(|r| r.0).collect::<Vec<_>>(),
    });
    Ok(CheckReport::new(CheckName::AdjointDecay, pass_if(ok), data).with_csv(csv))
}

fn conjecture(exp: &Experiment) -> CheckResult {
    let (sys, _) = exp.system()?;
    let hyp = kernel_doubly_commutes(sys).ok();
    let mut rng = Experiment::rng(exp.config.seed, STREAM_PROBE);
    let f = random_unit_vector(&mut rng, sys.triple.dim());
    let trace = conjecture_probe(&sys.triple, &f, default_decay_horizon(exp.config.order), hyp.as_ref())?;
    let csv = trace.to_csv();
    let label = trace.label.clone().unwrap_or_default();
    Ok(CheckReport::new(CheckName::Conjecture, CheckStatus::Info, to_value(&trace)?)
        .with_message(label)
        .with_csv(csv))
}

fn equiv_vector(exp: &Experiment) -> CheckResult {
    let (sys, _) = exp.system()?;
    let t = &sys.triple;
    let n = t.dim();
    let p = BidiscPoly::from_terms([
        (DegreePair::ZERO, C64::new(1.0, 0.0)),
        (DegreePair::new(1, 1), C64::new(0.5, 0.0)),
    ]);
    let v = polynomial_calculus(t, &p);
    let (moved, rep) = equivalent_frame_vector(sys, &v)?;
    let back = v.try_inverse().ok_or_else(|| Fault::Outcome(CheckStatus::Fail, "V is singular".into()))?;
    let (_, rep_back) = equivalent_frame_vector(&moved, &back)?;
    let symmetry = (rep_back.report.lower - rep.original.lower)
        .abs()
        .max((rep_back.report.upper - rep.original.upper).abs());
    let symmetric = symmetry <= SYMMETRY_TOL && rep_back.report.classification == rep.original.classification;

    let scalar_pair = op_norm(&t.t1) == 0.0 && op_norm(&t.t2) == 0.0;
    let rejected = if scalar_pair {
        None
    } else {
        let mut rng = Experiment::rng(exp.config.seed, STREAM_EQUIV);
        let g =
            CMatrix::from_fn(n, n, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let sg = singular_values(&g)[0];
        let w = identity(n) + g * C64::new(0.25 / sg, 0.0);
        Some(matches!(equivalent_frame_vector(sys, &w), Err(Error::Precondition(_))))
    };
    let ok = rep.passed && symmetric && rejected.unwrap_or(true);
    let data = json!({
        "v": "I + T1 T2 / 2",
        "report": rep,
        "symmetry_deviation": symmetry,
        "non_commuting_rejected": rejected,
    });
    Ok(CheckReport::new(CheckName::EquivVector, pass_if(ok), data))
}

#[cfg(test)]
mod tests {
    use super::super::{config::ExperimentConfig, fixtures, run};
    use super::*;
    use crate::inner::InnerSpec;

    #[test]
    fn parseval_config_example() {
        let cfg = ExperimentConfig::new("zw", DegreePair::new(4, 4))
            .with_inner(InnerSpec::monomial(1, 1))
            .with_checks(&["parseval"]);
        let out = run(&cfg).unwrap();
        assert!(out.summary.passed);
        let d = &out.report(CheckName::Parseval).unwrap().data;
        assert!((d["lower"].as_f64().unwrap() - 1.0).abs() <= 1e-10);
        assert!((d["upper"].as_f64().unwrap() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn non_beurling_verdict_recorded() {
        let cfg = ExperimentConfig::new("zw-gen", DegreePair::new(4, 4))
            .with_generators(vec![BidiscPoly::monomial(1, 0), BidiscPoly::monomial(0, 1)])
            .with_checks(&["mandrekar"]);
        let out = run(&cfg).unwrap();
        let r = out.report(CheckName::Mandrekar).unwrap();
        assert_eq!(r.status, CheckStatus::Info);
        assert_eq!(r.data["verdict"], json!(false));
    }

    #[test]
    fn empty_checks() {
        let out = run(&ExperimentConfig::new("none", DegreePair::new(2, 2))).unwrap();
        assert!(out.summary.passed && out.reports.is_empty());
        assert_eq!(out.exit_code(), 0);
    }

    #[test]
    fn every_fixture_passes() {
        for f in fixtures::catalog() {
            let mut cfg = f.config.clone();
            if let Some(t) = cfg.transport.as_mut() {
                t.trials = t.trials.min(3);
            } else {
                cfg.transport =
                    Some(crate::runner::config::TransportConfig { trials: 3, ..Default::default() });
            }
            let out = run(&cfg).unwrap();
            let failed: Vec<_> = out.reports.iter().filter(|r| r.status == CheckStatus::Fail).collect();
            assert!(failed.is_empty(), "{}: {failed:#?}", f.name);
        }
    }

    #[test]
    fn blaschke_parseval_is_only_approximate() {
        let cfg = fixtures::find("blaschke-z-half").unwrap().config.with_checks(&["parseval"]);
        let out = run(&cfg).unwrap();
        let r = out.report(CheckName::Parseval).unwrap();
        assert_eq!(r.status, CheckStatus::Fail);
        let defect = r.data["parseval_defect"].as_f64().unwrap();
        assert!(defect > 1e-8 && defect < 1e-3, "{defect}");
        assert_eq!(r.data["classification"], json!("frame"));
    }

    #[test]
    fn exports_decode() {
        let cfg = ExperimentConfig::new("zw", DegreePair::new(3, 3))
            .with_inner(InnerSpec::monomial(1, 1))
            .with_checks(&["submodule", "quotient"]);
        let out = run(&cfg).unwrap();
        let q: QuotientExport =
            serde_json::from_value(out.report(CheckName::Quotient).unwrap().data.clone()).unwrap();
        assert_eq!(q.dim, 7);
        assert_eq!(q.jordan_z.decode().unwrap().ncols(), 7);
        let s: SubmoduleExport =
            serde_json::from_value(out.report(CheckName::Submodule).unwrap().data.clone()).unwrap();
        assert_eq!((s.rank, s.codimension), (9, 7));
    }
}

//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! fails. Run with `cargo test -p sparse-lqr --test acceptance`.

mod common;

use std::time::{Duration, Instant};

use rayon::prelude::*;
use sparse_lqr::bounds::{theorem3_bound, theorem4_bound, theorem5_bound};
use sparse_lqr::disturbance::sample_scenario;
use sparse_lqr::experiments::*;
use sparse_lqr::linalg::quad_form;
use sparse_lqr::policies::{
    blind_action, da_action, da_expected_cost, da_precompute, offline_action, AwarePolicy, BlindPolicy, OfflinePolicy,
};
use sparse_lqr::{riccati_backward, rollout, DisturbanceScenario, ProbabilityModel, Vector};

use common::{oracle, rel_err, ScalarInstance};

// Pinned tolerances.
const DP_REL: f64 = 1e-8;
const OFFLINE_REL: f64 = 1e-7;
const OPTIMALITY_SLACK: f64 = 1e-9;
const ORACLE_TOL: f64 = 1e-8;
const REDUCTION_TOL: f64 = 1e-12;
const CERTAIN_TOL: f64 = 1e-8;
const DECAY_FRACTION: f64 = 0.1;
/// Relative slack when checking that `max ‖r‖` does not increase; the
/// maximum sits near the terminal step and is the same value recomputed.
const NONINCREASE_REL: f64 = 1e-12;
const SPOT_TOL: f64 = 1e-12;
const SLOPE_TARGET: f64 = 2.0;
const SLOPE_TOL: f64 = 0.1;

type Outcome = Result<String, String>;

fn within(elapsed: Duration, limit: Duration, detail: String) -> Outcome {
    if elapsed <= limit {
        Ok(format!("{detail}; {:.2?} (limit {limit:?})", elapsed))
    } else {
        Err(format!("{detail}; too slow: {:.2?} > {limit:?}", elapsed))
    }
}

fn dp_identity() -> Outcome {
    let start = Instant::now();
    let (model, config) = builtin_paper_model();
    let r = riccati_backward(&model).map_err(|e| e.to_string())?;
    let x0 = config.x0_vector();
    let empty = DisturbanceScenario::empty(model.horizon, model.state_dim());
    let j = rollout(&BlindPolicy::new(&r), &empty, &x0, &model).map_err(|e| e.to_string())?.total_cost;
    let v = quad_form(&r.p[0], &x0);
    let err = rel_err(j, v);
    let elapsed = start.elapsed();
    if err > DP_REL {
        return Err(format!("J = {j}, x0ᵀP0x0 = {v}, rel err {err:e}"));
    }
    within(elapsed, Duration::from_secs(1), format!("T = {}, rel err {err:.1e}", model.horizon))
}

fn offline_consistency() -> Outcome {
    let (model, config) = builtin_paper_model();
    let r = riccati_backward(&model).map_err(|e| e.to_string())?;
    let x0 = config.x0_vector();
    let law = config.value_law();
    let results: Vec<Result<(f64, f64), String>> = (0..120u64)
        .into_par_iter()
        .map(|seed| {
            let d = 1 + seed as usize % 4;
            let s = sample_scenario(seed, d, &model, 0.3, &law).map_err(|e| e.to_string())?;
            let off = OfflinePolicy::new(&s, &r).map_err(|e| e.to_string())?;
            let da = AwarePolicy::new(&s, &ProbabilityModel::UniformConditional, &r).map_err(|e| e.to_string())?;
            let j_off = rollout(&off, &s, &x0, &model).map_err(|e| e.to_string())?.total_cost;
            let j_blind = rollout(&BlindPolicy::new(&r), &s, &x0, &model).map_err(|e| e.to_string())?.total_cost;
            let j_da = rollout(&da, &s, &x0, &model).map_err(|e| e.to_string())?.total_cost;
            let err = rel_err(j_off, off.cost_to_go(0, &x0));
            let slack = j_off - j_blind.min(j_da);
            Ok((err, slack))
        })
        .collect();
    let mut worst_err = 0.0f64;
    let mut worst_slack = f64::NEG_INFINITY;
    for (seed, res) in results.into_iter().enumerate() {
        let (err, slack) = res?;
        if err > OFFLINE_REL {
            return Err(format!("seed {seed}: rel err {err:e}"));
        }
        if slack > OPTIMALITY_SLACK {
            return Err(format!("seed {seed}: offline exceeds a causal policy by {slack:e}"));
        }
        worst_err = worst_err.max(err);
        worst_slack = worst_slack.max(slack);
    }
    Ok(format!(
        "120 scenarios, max rel err {worst_err:.1e}, max J_off − min(J_blind, J_da) = {worst_slack:.3e}"
    ))
}

fn da_oracle() -> Outcome {
    let start = Instant::now();
    let mut instances = 0;
    let mut worst = 0.0f64;
    let mut seed = 0;
    while instances < 60 {
        let inst = ScalarInstance::random(seed);
        seed += 1;
        if inst.count() == 0 {
            continue;
        }
        instances += 1;
        let r = riccati_backward(&inst.model()).map_err(|e| e.to_string())?;
        let tables = da_precompute(&inst.values_by_remaining(), &ProbabilityModel::UniformConditional, &r, inst.count())
            .map_err(|e| e.to_string())?;
        let x0 = Vector::from_element(1, inst.x0);
        let j0 = da_expected_cost(0, &x0, inst.count(), &tables, &r).map_err(|e| e.to_string())?;
        worst = worst.max(rel_err(j0, oracle(&inst, 0, inst.count()).value.eval(inst.x0)));
        for t in 0..inst.horizon {
            for k in 0..=inst.count() {
                let node = oracle(&inst, t, k);
                for x in [-1.0, 0.5, inst.x0] {
                    let u = da_action(t, &Vector::from_element(1, x), k, &tables, &r).map_err(|e| e.to_string())?[0];
                    worst = worst.max(rel_err(u, node.gain * x + node.offset));
                }
            }
        }
    }
    if worst > ORACLE_TOL {
        return Err(format!("max deviation from oracle {worst:e}"));
    }
    within(start.elapsed(), Duration::from_secs(10), format!("{instances} instances, max deviation {worst:.1e}"))
}

fn da_reductions() -> Outcome {
    let mut worst_blind = 0.0f64;
    let mut worst_certain = 0.0f64;
    for seed in 0..60 {
        let inst = ScalarInstance::random(seed);
        let model = inst.model();
        let r = riccati_backward(&model).map_err(|e| e.to_string())?;
        let kmax = inst.count();
        let values = inst.values_by_remaining();
        let zero = da_precompute(&values, &ProbabilityModel::zero(inst.horizon, kmax), &r, kmax).map_err(|e| e.to_string())?;
        let uni = da_precompute(&values, &ProbabilityModel::UniformConditional, &r, kmax).map_err(|e| e.to_string())?;
        for t in 0..inst.horizon {
            let x = Vector::from_element(1, inst.x0 - 0.5 * t as f64);
            let blind = blind_action(t, &x, &r);
            for k in 0..=kmax {
                let u = da_action(t, &x, k, &zero, &r).map_err(|e| e.to_string())?;
                worst_blind = worst_blind.max((u - &blind).amax());
            }
            let u = da_action(t, &x, 0, &uni, &r).map_err(|e| e.to_string())?;
            worst_blind = worst_blind.max((u - &blind).amax());
        }

        let times: Vec<usize> = (0..kmax).map(|i| (i + 1) * inst.horizon / (kmax + 1)).collect();
        let vals = inst.values.iter().map(|&w| Vector::from_element(1, w)).collect();
        let s = DisturbanceScenario::new(inst.horizon, 1, times, vals, inst.w_hat).map_err(|e| e.to_string())?;
        let aware = AwarePolicy::new(&s, &ProbabilityModel::certain(&s), &r).map_err(|e| e.to_string())?;
        let off = OfflinePolicy::new(&s, &r).map_err(|e| e.to_string())?;
        let run = rollout(&aware, &s, &Vector::from_element(1, inst.x0), &model).map_err(|e| e.to_string())?;
        for t in 0..inst.horizon {
            let u_off = offline_action(t, &run.states[t], off.auxiliary(), &s, &r);
            worst_certain = worst_certain.max(rel_err(run.controls[t][0], u_off[0]));
        }
    }
    if worst_blind > REDUCTION_TOL {
        return Err(format!("p ≡ 0 / k = 0 deviates from blind by {worst_blind:e}"));
    }
    if worst_certain > CERTAIN_TOL {
        return Err(format!("certain model deviates from offline by {worst_certain:e}"));
    }
    Ok(format!("vs blind {worst_blind:.1e}, certain vs offline {worst_certain:.1e}"))
}

fn convergence_diagnostics() -> Outcome {
    let start = Instant::now();
    let mut config = builtin_paper_config();
    config.sweep.horizons = vec![200, 400, 800, 1600, 3200];
    config.sweep.budgets = (1..=5).collect();
    let rows = run_convergence_diagnostics(&config).map_err(|e| e.to_string())?;
    let horizons = &config.sweep.horizons;
    let max_over_k: Vec<f64> = horizons
        .iter()
        .map(|&h| rows.iter().filter(|r| r.horizon == h).map(|r| r.r_max_norm).fold(0.0, f64::max))
        .collect();
    if let Some(w) = max_over_k.windows(2).find(|w| w[1] > w[0] * (1.0 + NONINCREASE_REL)) {
        return Err(format!("max ‖r‖ increased: {} → {}", w[0], w[1]));
    }
    let mut fractions = Vec::new();
    for k in 1..=5 {
        let r0: Vec<f64> = rows.iter().filter(|r| r.budget == k).map(|r| r.r0_norm).collect();
        if !r0.windows(2).all(|w| w[1] < w[0]) {
            return Err(format!("k = {k}: ‖r_0‖ not strictly decreasing: {r0:?}"));
        }
        let frac = r0[r0.len() - 1] / r0[0];
        if frac >= DECAY_FRACTION {
            return Err(format!("k = {k}: ‖r_0‖(3200)/‖r_0‖(200) = {frac:.4} ≥ {DECAY_FRACTION}"));
        }
        fractions.push(format!("{frac:.3}"));
    }
    within(
        start.elapsed(),
        Duration::from_secs(60),
        format!("‖r_0‖ ratios (3200/200) for k = 1..5: [{}]", fractions.join(", ")),
    )
}

fn bound_verification() -> Outcome {
    let start = Instant::now();
    for (args, expected) in [((1, 1.0, 0.0, 1.0), 4.0), ((2, 1.0, 1.0, 1.0), 16.0)] {
        let v = theorem4_bound(args.0, args.1, args.2, args.3).map_err(|e| e.to_string())?;
        if (v - expected).abs() > SPOT_TOL {
            return Err(format!("theorem4{args:?} = {v}, expected {expected}"));
        }
    }
    let t5 = theorem5_bound(1, 1.0, 1.0, 1.0, 0.5, 1.0, 1.0).map_err(|e| e.to_string())?;
    let t3 = theorem3_bound(1, 1.0, 1.0, 1.0, 0.5, 1.0, 1.0).map_err(|e| e.to_string())?;
    if (t5 - 12.0).abs() > SPOT_TOL || (t3 - 18.0).abs() > SPOT_TOL {
        return Err(format!("spot checks: theorem5 = {t5}, theorem3 = {t3}"));
    }

    let mut config = builtin_paper_config();
    config.bounds.trials = 500;
    config.bounds.budgets = vec![1, 2, 4];
    config.bounds.override_assumption_check = true;
    let runs = run_bound_verification(&config).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for run in &runs {
        let d = run.report.d_count;
        if run.trials.len() != 500 {
            return Err(format!("D = {d}: {} trials", run.trials.len()));
        }
        if let Some(t) = run.trials.iter().find(|t| t.emp_blind_vs_nominal > run.report.thm4) {
            return Err(format!("D = {d}, trial {}: |J^w − J| exceeds the bound", t.trial));
        }
        if run.report.assumption1_ok {
            let thm3 = run.report.thm3.ok_or("missing thm3")?;
            let thm5 = run.report.thm5.ok_or("missing thm5")?;
            if let Some(t) = run
                .trials
                .iter()
                .find(|t| t.emp_blind_vs_offline > thm3 || t.emp_nominal_vs_offline > thm5)
            {
                return Err(format!("D = {d}, trial {}: margin-based bound exceeded", t.trial));
            }
        }
        parts.push(format!("D={d} max ratio4 {:.2e}", run.max_ratio4()));
    }
    let gamma = runs[0].report.gamma_hat;
    let margin_note = if gamma > 0.0 {
        "regret and |J − V^w| bounds also hold".to_string()
    } else {
        format!("gamma_hat = {gamma:.4} ≤ 0, so only the margin-free bound applies")
    };
    within(
        start.elapsed(),
        Duration::from_secs(120),
        format!("spot checks ok; {}; {margin_note}", parts.join(", ")),
    )
}

/// Least-squares slope of `log y` against `log x`.
fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

fn quadratic_scaling() -> Outcome {
    // x0 = 1, ŵ = 1, P̂ = 1, γ = 0.5, ‖B‖ = 1, λ_min(R) = 1 unless swept
    let grid = [8.0, 16.0, 32.0, 64.0];
    let in_d: Vec<(f64, f64)> = grid
        .iter()
        .map(|&d| Ok((d, theorem3_bound(d as usize, 1.0, 1.0, 1.0, 0.5, 1.0, 1.0)?)))
        .collect::<sparse_lqr::Result<_>>()
        .map_err(|e| e.to_string())?;
    let in_w: Vec<(f64, f64)> = grid
        .iter()
        .map(|&w| Ok((w, theorem3_bound(1, w, 1.0, 1.0, 0.5, 1.0, 1.0)?)))
        .collect::<sparse_lqr::Result<_>>()
        .map_err(|e| e.to_string())?;
    let (sd, sw) = (log_log_slope(&in_d), log_log_slope(&in_w));
    let detail = format!("slope in D {sd:.4}, slope in ŵ {sw:.4}");
    if (sd - SLOPE_TARGET).abs() <= SLOPE_TOL && (sw - SLOPE_TARGET).abs() <= SLOPE_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn trajectory_anticipation() -> Outcome {
    let config = builtin_paper_config();
    let run = run_trajectory_experiment(&config).map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    write_trajectory_csv(&run, &mut buf).map_err(|e| e.to_string())?;

    let mut reader = csv::Reader::from_reader(buf.as_slice());
    let header = reader.headers().map_err(|e| e.to_string())?.clone();
    let col = |name: &str| header.iter().position(|h| h == name).ok_or(format!("no column {name}"));
    let (ct, cp, cd) = (col("t")?, col("policy")?, col("disturbed")?);
    let xs: Vec<usize> = (0..4).map(|i| col(&format!("x{i}"))).collect::<Result<_, _>>()?;
    let us: Vec<usize> = (0..2).map(|i| col(&format!("u{i}"))).collect::<Result<_, _>>()?;

    // policy → per-t (state, control)
    let mut table: std::collections::BTreeMap<String, Vec<(Vec<f64>, Vec<f64>)>> = Default::default();
    let mut disturbed_at = None;
    for rec in reader.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let parse = |i: &usize| rec[*i].parse::<f64>().unwrap_or(f64::NAN);
        let t: usize = rec[ct].parse().map_err(|_| "bad t")?;
        if &rec[cp] == "blind" && &rec[cd] == "true" {
            disturbed_at = Some(t);
        }
        table
            .entry(rec[cp].to_string())
            .or_default()
            .push((xs.iter().map(parse).collect(), us.iter().map(parse).collect()));
    }
    let td = disturbed_at.ok_or("no disturbed step in CSV")?;
    let get = |p: &str| table.get(p).ok_or(format!("no rows for {p}"));
    let (blind, offline, nominal) = (get("blind")?, get("offline")?, get(NOMINAL_LABEL)?);

    let gap0 = blind[0].1.iter().zip(&offline[0].1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if gap0 == 0.0 {
        return Err("offline control equals blind control at t = 0".into());
    }
    if let Some(t) = (0..=td).find(|&t| blind[t].0 != nominal[t].0) {
        return Err(format!("blind state deviates from nominal at t = {t} < {td}"));
    }
    if blind[td + 1].0 == nominal[td + 1].0 {
        return Err(format!("blind state does not react after t = {td}"));
    }
    Ok(format!("offline deviates at t = 0 by {gap0:.3e}; blind deviates from t = {} on", td + 1))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("dp_identity", dp_identity),
        ("offline_consistency", offline_consistency),
        ("da_oracle_equivalence", da_oracle),
        ("da_degenerate_reductions", da_reductions),
        ("convergence_diagnostics", convergence_diagnostics),
        ("bound_verification", bound_verification),
        ("quadratic_scaling", quadratic_scaling),
        ("trajectory_anticipation", trajectory_anticipation),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

//! One test per acceptance criterion. Each prints a single
//! `acceptance <id> PASS|FAIL: ...` line before asserting.

use chainstab_core::analysis::lemma_window_steps;
use chainstab_core::harness::config::{ExperimentConfig, SweepSource};
use chainstab_core::harness::figures::{figure_controller, FIG3_HORIZON, SETTLE_STEPS};
use chainstab_core::harness::{run_sweep, sweep_point};
use chainstab_core::properties::{run_all, DEFAULT_SEED};
use chainstab_core::{
    admissible_alpha, disturbance_norm, ratio, AmplitudeBudget, DisturbanceProfile, Exact, Scalar,
    Simulation, SimulationConfig, StabilityCriterion,
};
use chainstab_tests::{all_criteria, builtins, rel, report};

const DT: f64 = 0.1;

fn closed_form(alpha: f64, chain_size: usize, n: usize) -> (f64, f64) {
    chainstab_tests::closed_form(alpha, chain_size, DT, n)
}

#[test]
fn criterion_1_closed_form_for_every_builtin() {
    let mut worst = 0.0f64;
    let mut points = 0usize;
    for controller in builtins(DT) {
        for n in [10usize, 50, 200] {
            let steps = lemma_window_steps(n, 1, 1).unwrap();
            for criterion in [
                StabilityCriterion::VectorDisturbance { p: 2, q: 2 },
                StabilityCriterion::Bibo,
            ] {
                let budget = AmplitudeBudget::new(criterion, 1.0).unwrap();
                let alpha = admissible_alpha(&budget, n, steps as f64 * DT, DT).unwrap();
                let profile = DisturbanceProfile::ramp_windowed_steps(alpha, steps);
                let config = SimulationConfig::new(n, DT, steps).unwrap();
                let states = Simulation::new(&controller, &profile, &config).unwrap().run(steps).unwrap();
                for (step, state) in states.iter().enumerate() {
                    let (e, edot) = closed_form(alpha, n, step);
                    for k in (step + 1)..n.saturating_sub(step) {
                        let se = state.spacing_error(k).unwrap();
                        let sv = state.spacing_rate(k).unwrap();
                        worst = worst.max(rel(se, -e)).max(rel(sv, -edot));
                        points += 1;
                    }
                }
            }
        }
    }
    let pass = worst <= 1e-9 && points > 0;
    report(1, pass, &format!("max relative deviation {worst:.3e} over {points} in-window points"));
    assert!(pass);
}

#[test]
fn criterion_2_single_step_is_exact() {
    let dt = ratio(1, 10);
    let alpha = ratio(3, 7);
    let mut failures = Vec::new();
    let mut checked = 0;
    for controller in builtins(dt.clone()) {
        for n in [4usize, 9, 16] {
            let profile = DisturbanceProfile::ramp_step(alpha.clone());
            let config = SimulationConfig::new(n, dt.clone(), 1).unwrap();
            let mut sim = Simulation::new(&controller, &profile, &config).unwrap();
            let state = sim.run_to_end(1).unwrap();
            let big_n = Exact::from_count(n);
            let e = &alpha * &dt * &dt / &big_n;
            let edot = &alpha * &dt / &big_n;
            for k in (controller.m1() + 1)..(n - controller.m2()) {
                checked += 1;
                if state.spacing_error(k).unwrap() != -e.clone() || state.spacing_rate(k).unwrap() != -edot.clone() {
                    failures.push(format!("{} N={n} k={k}", controller.name()));
                }
            }
        }
    }
    let pass = failures.is_empty() && checked > 0;
    report(
        2,
        pass,
        &format!("|e_k| = alpha dt^2/N and |edot_k| = alpha dt/N exactly at {checked} interior vehicles; mismatches: {failures:?}"),
    );
    assert!(pass);
}

fn sweep_config(definition: u8, p: u32, q: u32, sizes: &[usize]) -> ExperimentConfig {
    ExperimentConfig::from_json(
        &serde_json::json!({
            "schema_version": "1",
            "sim": {"N": sizes, "dt": DT, "horizon": "lemma-window"},
            "controller": {"name": "pd-asymmetric", "params": {"a": 1, "b1": 2, "b2": 0.5}},
            "disturbance": {"kind": "ramp-windowed", "alpha": "budget", "T": "lemma-window"},
            "criterion": {"definition": definition, "p": p, "q": q, "C1": 1.0},
        })
        .to_string(),
    )
    .unwrap()
}

#[test]
fn criterion_3_growth_exponents() {
    // (definition, p, q, expected exponent)
    let cases = [(1, 2, 2, 1.0), (2, 2, 2, 2.0), (3, 2, 2, 2.0), (4, 2, 2, 1.0), (1, 2, 1, 0.0)];
    let mut parts = Vec::new();
    let mut pass = true;
    for (definition, p, q, expected) in cases {
        let config = sweep_config(definition, p, q, &[40, 80, 160, 320]);
        let outcome = run_sweep(&config, 1, SweepSource::Oracle).unwrap();
        let fitted = outcome.report.fitted_exponent;
        let ok = (fitted - expected).abs() <= 0.15;
        pass &= ok;
        parts.push(format!(
            "def{definition}(p={p},q={q}) {fitted:.4} vs {expected} {}",
            if ok { "ok" } else { "OUT" }
        ));

        let mut cross = 0.0f64;
        for n in [40, 80, 160] {
            let run = config.resolve(n).unwrap();
            let oracle = sweep_point(&run, SweepSource::Oracle).unwrap().metric;
            let simulated = sweep_point(&run, SweepSource::Simulation).unwrap().metric;
            cross = cross.max(rel(simulated, oracle));
        }
        pass &= cross <= 1e-9;
        parts.push(format!("sim/oracle {cross:.1e}"));
    }
    report(3, pass, &parts.join("; "));
    assert!(pass);
}

#[test]
fn criterion_4_budget_tightness() {
    let mut worst = 0.0f64;
    for criterion in all_criteria() {
        for n in [10usize, 50, 200] {
            let steps = lemma_window_steps(n, 1, 1).unwrap();
            for c1 in [0.5, 1.0, 3.0] {
                let budget = AmplitudeBudget::new(criterion, c1).unwrap();
                let alpha = admissible_alpha(&budget, n, steps as f64 * DT, DT).unwrap();
                let profile = DisturbanceProfile::ramp_windowed_steps(alpha, steps);
                let norm = disturbance_norm(&profile, &criterion, n, DT, steps + 1).unwrap();
                worst = worst.max(rel(norm, c1));
            }
        }
    }
    let tight = worst <= 1e-12;

    // 2 T^(q/p) (alpha/N)^q sum_k k^q with p = q = 2 and T the ramp end.
    let criterion = StabilityCriterion::VectorDisturbance { p: 2, q: 2 };
    let mut closed_worst = 0.0f64;
    let mut support_worst = 0.0f64;
    for n in [10usize, 50, 200] {
        let steps = lemma_window_steps(n, 1, 1).unwrap();
        let t_end = steps as f64 * DT;
        let alpha = 0.7;
        let profile = DisturbanceProfile::ramp_windowed_steps(alpha, steps);
        let norm = disturbance_norm(&profile, &criterion, n, DT, steps + 1).unwrap();
        let sum_k: f64 = (1..=n).map(|k| (k * k) as f64).sum();
        let expr = 2.0 * t_end * (alpha / n as f64).powi(2) * sum_k;
        closed_worst = closed_worst.max(rel(norm, expr));
        // Same expression over the full support, which has T/dt + 1 samples.
        let support = expr * (steps + 1) as f64 / steps as f64;
        support_worst = support_worst.max(rel(norm, support));
    }
    let closed = closed_worst <= 1e-12;
    let pass = tight && closed;
    report(
        4,
        pass,
        &format!(
            "norm at admissible alpha vs C1: {worst:.1e}; def1(p=q=2) norm vs closed expression with T: {closed_worst:.3e} (with T + dt: {support_worst:.1e})"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_5_figure_2_dots() {
    let controller = figure_controller();
    let mut worst = 0.0f64;
    let mut counts_ok = true;
    let mut counts = Vec::new();
    for n in [10usize, 50] {
        let steps = n / 5;
        let profile = DisturbanceProfile::ramp_step(1.0);
        let config = SimulationConfig::new(n, DT, steps).unwrap();
        let states = Simulation::new(&controller, &profile, &config).unwrap().run(steps).unwrap();
        for (step, state) in states.iter().enumerate() {
            let (e, _) = closed_form(1.0, n, step);
            for k in (step + 1)..n.saturating_sub(step) {
                worst = worst.max(rel(state.spacing_error(k).unwrap(), -e));
            }
        }
        let in_window = n.saturating_sub(steps).saturating_sub(steps + 1);
        counts_ok &= in_window + 2 * steps + 1 >= n;
        counts.push(format!("N={n}: {in_window} vehicles at t=T"));
    }
    let pass = worst <= 1e-9 && counts_ok;
    report(5, pass, &format!("max deviation {worst:.3e}; {}", counts.join(", ")));
    assert!(pass);
}

struct LongRun {
    max_abs: f64,
    variation: f64,
    finite: bool,
}

fn long_run(n: usize) -> LongRun {
    let controller = figure_controller();
    let profile = DisturbanceProfile::ramp_step(1.0);
    let config = SimulationConfig::new(n, DT, FIG3_HORIZON).unwrap();
    let states = Simulation::new(&controller, &profile, &config).unwrap().run(FIG3_HORIZON).unwrap();
    let (last, _) = states[FIG3_HORIZON].spacing_errors();
    let (before, _) = states[FIG3_HORIZON - SETTLE_STEPS].spacing_errors();
    let all = states.iter().flat_map(|s| s.spacing_errors().0);
    let (max_abs, finite) = all.fold((0.0f64, true), |(m, f), e| (m.max(e.abs()), f && e.is_finite()));
    LongRun {
        max_abs,
        finite,
        variation: last.iter().zip(&before).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
    }
}

#[test]
fn criterion_6_figure_3_bounded_per_n() {
    let small = long_run(10);
    let large = long_run(50);
    let settled = |r: &LongRun| r.finite && r.variation < 1e-6;
    let pass = settled(&small) && settled(&large) && large.max_abs > small.max_abs;
    report(
        6,
        pass,
        &format!(
            "N=10: max|e| {:.4}, final variation {:.2e}; N=50: max|e| {:.4}, final variation {:.2e} after {FIG3_HORIZON} steps",
            small.max_abs, small.variation, large.max_abs, large.variation
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_property_suites() {
    let report_all = run_all(DEFAULT_SEED, 100);
    let summary: Vec<String> = report_all
        .outcomes
        .iter()
        .map(|o| format!("{} seed={} cases={} failed={}", o.name, o.seed, o.cases, o.failed_cases))
        .collect();
    let pass = report_all.passed()
        && report_all.outcomes.len() == 4
        && report_all.outcomes.iter().all(|o| o.cases >= 100);
    report(7, pass, &summary.join("; "));
    for o in report_all.outcomes.iter().filter(|o| !o.passed()) {
        println!("  {}: {:?}", o.name, o.failures);
    }
    assert!(pass);
}

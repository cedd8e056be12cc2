//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::time::Instant;

use cooploc::bench::run_bench;
use cooploc::fusion::FusionConfig;
use cooploc::instances::{instance_set, rng_for};
use cooploc::sim::{chi2_band, final_rmse, method_consistency, run_monte_carlo, Method, RunOptions, Scenario, Verdict, CONSISTENCY_THRESHOLD};
use cooploc::verify::{self, VerifyOptions};
use cooploc::{FusionMethod, MeasurementKind};

const SLACK: f64 = -1e-8;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn chi2_reproduction() -> Outcome {
    let b = chi2_band(50, 2, 0.05);
    let r = |v: f64| (v * 100.0).round() / 100.0;
    outcome(r(b.r1) == 1.48 && r(b.r2) == 2.59, format!("band [{:.4}, {:.4}]", b.r1, b.r2))
}

fn property_lines(report: &verify::VerifyReport, names: &[&str]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in names {
        match report.get(name) {
            Some(p) => {
                let ok = p.passed() && p.worst_slack >= SLACK && p.checks > 0;
                pass &= ok;
                parts.push(format!("{name} {}/{} worst {:+.1e}", p.checks - p.failures, p.checks, p.worst_slack));
            }
            None => {
                pass = false;
                parts.push(format!("{name} missing"));
            }
        }
    }
    outcome(pass, parts.join("; "))
}

fn dmv_properties(opts: &VerifyOptions) -> Outcome {
    let set = instance_set(opts.instances, opts.seed);
    match verify::dmv_suite(&set, opts) {
        Ok(r) => property_lines(&r, &[verify::DMV_BOUNDS_TRUTH, verify::DMV_DET, verify::DMV_OVER_EMV]),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn orderings(opts: &VerifyOptions) -> Outcome {
    let set = instance_set(opts.instances, opts.seed);
    match verify::ordering_suite(&set, opts) {
        Ok(r) => property_lines(
            &r,
            &[
                verify::ECMV_TRACE_LOWER,
                verify::ECMV_TRACE_UPPER,
                verify::PECMV_DET_LOWER,
                verify::PECMV_DET_UPPER,
                verify::PECMV_PRIOR,
                verify::PECMV_DMV,
            ],
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn scalar_oracles(opts: &VerifyOptions) -> Outcome {
    match verify::scalar_oracle_suite(50, opts.seed, &opts.cfg) {
        Ok(r) => {
            let names: Vec<&str> = r.properties.iter().map(|p| p.name.as_str()).collect();
            let pass = r.all_passed() && r.properties.iter().all(|p| p.checks == 50);
            let detail = r
                .properties
                .iter()
                .map(|p| format!("{} worst {:+.1e}", p.name, p.worst_slack))
                .collect::<Vec<_>>()
                .join("; ");
            outcome(pass && names.len() == 3, detail)
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn consistency(res: &cooploc::sim::SimResult) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let reports = |m| method_consistency(res, m, CONSISTENCY_THRESHOLD).expect("invertible covariances");
    let naive = reports(Method::Naive);
    let naive_over = naive.iter().any(|r| r.verdict == Verdict::Overconfident);
    pass &= naive_over;
    parts.push(format!(
        "naive [{}]",
        naive.iter().map(|r| r.verdict.to_string()).collect::<Vec<_>>().join(",")
    ));
    for m in [Method::Dmv, Method::Pecmv, Method::Joint] {
        let reps = reports(m);
        let ok = reps
            .iter()
            .all(|r| r.verdict != Verdict::Overconfident && r.not_above() >= CONSISTENCY_THRESHOLD);
        pass &= ok;
        let worst = reps.iter().map(|r| r.not_above()).fold(1.0f64, f64::min);
        let in_band = reps.iter().map(|r| r.in_band).fold(1.0f64, f64::min);
        parts.push(format!("{m} min not-above {worst:.2} min in-band {in_band:.2}"));
    }
    outcome(pass, parts.join("; "))
}

fn rmse_ordering(res: &cooploc::sim::SimResult) -> Outcome {
    let v = |m| final_rmse(res, m);
    let (joint, pecmv, dmv, dr) = (v(Method::Joint), v(Method::Pecmv), v(Method::Dmv), v(Method::Dr));
    let le = |a: f64, b: f64| a <= b * 1.05;
    outcome(
        le(joint, pecmv) && le(pecmv, dmv) && le(dmv, dr),
        format!("joint {joint:.4} pecmv {pecmv:.4} dmv {dmv:.4} dr {dr:.4}"),
    )
}

fn communication() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [3, 5, 10] {
        let sc = common::team_scenario(n);
        let res = match run_monte_carlo(
            &sc,
            &RunOptions {
                methods: Some(vec![Method::Naive]),
                runs: Some(1),
                seed: None,
            },
        ) {
            Ok(r) => r,
            Err(e) => return outcome(false, e.to_string()),
        };
        let tr = res.runs[0].track(Method::Naive).expect("naive track");
        let scheduled = sc.relative_event_count();
        let ok = tr.messages == 2 * tr.processed_events && tr.processed_events == scheduled;
        pass &= ok;
        parts.push(format!("N={n}: {} messages / {} events", tr.messages, tr.processed_events));
    }
    outcome(pass, parts.join("; "))
}

fn runtime_ordering() -> Outcome {
    match run_bench(60, 7, &FusionConfig::default()) {
        Ok(rep) => {
            let dmv = rep.get(FusionMethod::Dmv).expect("dmv row").mean_ms;
            let pecmv = rep.get(FusionMethod::Pecmv).expect("pecmv row").mean_ms;
            outcome(dmv < pecmv / 10.0, format!("dmv {dmv:.4} ms, pecmv {pecmv:.4} ms, ratio {:.1}", pecmv / dmv))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn jacobians() -> Outcome {
    let mut rng = rng_for(99);
    let motion = common::motion_jacobian_error(100, &mut rng);
    let mut worst = motion;
    let mut parts = vec![format!("motion {motion:.1e}")];
    for kind in MeasurementKind::ALL {
        let e = common::relative_jacobian_error(kind, 100, &mut rng);
        worst = worst.max(e);
        parts.push(format!("{} {e:.1e}", kind.name()));
    }
    let lm = common::range_jacobian_error(100, &mut rng);
    worst = worst.max(lm);
    parts.push(format!("landmark-range {lm:.1e}"));
    outcome(worst <= 1e-5, parts.join("; "))
}

fn main() {
    let opts = VerifyOptions::default();
    let mut results: Vec<(&str, Outcome, f64)> = Vec::new();
    let mut timed = |name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        results.push((name, o, start.elapsed().as_secs_f64()));
    };
    timed("1 chi-square band", &mut chi2_reproduction);
    timed("2 DMV consistency properties", &mut || dmv_properties(&opts));
    timed("3 ECMV/PECMV orderings", &mut || orderings(&opts));
    timed("4 scalar grid oracles", &mut || scalar_oracles(&opts));

    let start = Instant::now();
    let mc = run_monte_carlo(
        &Scenario::builtin(),
        &RunOptions {
            methods: Some(vec![Method::Dr, Method::Naive, Method::Dmv, Method::Pecmv, Method::Joint]),
            runs: Some(50),
            seed: None,
        },
    );
    let mc_secs = start.elapsed().as_secs_f64();
    match &mc {
        Ok(res) => {
            timed("5 NEES consistency", &mut || consistency(res));
            timed("6 RMSE ordering", &mut || rmse_ordering(res));
        }
        Err(e) => {
            timed("5 NEES consistency", &mut || outcome(false, e.to_string()));
            timed("6 RMSE ordering", &mut || outcome(false, e.to_string()));
        }
    }
    timed("7 pairwise communication", &mut communication);
    timed("8 DMV vs PECMV runtime", &mut runtime_ordering);
    timed("9 Jacobians vs finite differences", &mut jacobians);

    println!();
    println!("Monte Carlo (50 runs, shared by 5 and 6): {mc_secs:.1} s");
    let mut failed = 0;
    for (name, o, secs) in &results {
        println!("{} {:<36} {:>7.1} s  {}", if o.pass { "PASS" } else { "FAIL" }, name, secs, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

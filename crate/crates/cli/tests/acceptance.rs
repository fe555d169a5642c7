//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use ppkm_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;

/// Name, check and optional runtime limit.
type Criterion = (&'static str, fn() -> Check, Option<Duration>);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ulp(x: f64) -> f64 {
    let x = x.abs();
    f64::from_bits(x.to_bits() + 1) - x
}

const N: f64 = 10_467_629.0;

fn reff_anchor() -> Check {
    let r = r_eff(
        &ModelParams::default(),
        0.08816448,
        0.03019077,
        9_652_496.0,
        N,
    );
    let err = (r - 0.5365898354).abs();
    ensure(
        err <= 1e-6,
        format!("r_eff = {r:.10}, expected 0.5365898354, |diff| = {err:.3e}, tol 1e-6"),
    )
}

fn naive_anchor() -> Check {
    let (alpha, beta) = naive_rates(12_799.0, 802_334.0, N);
    let r = r_eff(&ModelParams::default(), alpha, beta, 9_652_496.0, N);
    let err = (r - 0.023562588).abs();
    ensure(
        err <= 5e-4,
        format!("r_eff = {r:.9}, expected 0.023562588, |diff| = {err:.3e}, tol 5e-4"),
    )
}

fn classifier_truth_table() -> Check {
    let thresholds = PolicyThresholds::default();
    let mut mismatches = 0usize;
    for i in 0..=1200 {
        let r = i as f64 / 1000.0;
        for j in 0..=1000 {
            let rho = j as f64 / 1000.0;
            let rec = classify(&PandemicPoint::new(r, rho).unwrap(), &thresholds);
            let expected = match (rho > 0.2, r > 0.4) {
                (true, true) => PpkmLevel::Level4,
                (true, false) | (false, true) => PpkmLevel::Level3,
                (false, false) => PpkmLevel::AtMost2,
            };
            mismatches += usize::from(rec.level != expected);
        }
    }
    let mut wrong_days = Vec::new();
    for row in read_csv(&fixture("digitised_figure_values.csv")) {
        let t = num(&row, "t") as i64;
        let point = PandemicPoint::new(num(&row, "reff_data"), num(&row, "rho")).unwrap();
        let expected = if t <= 17 {
            PpkmLevel::Level4
        } else {
            PpkmLevel::Level3
        };
        if classify(&point, &thresholds).level != expected {
            wrong_days.push(t);
        }
    }
    ensure(
        mismatches == 0 && wrong_days.is_empty(),
        format!(
            "grid mismatches {mismatches}/1202201, digitised days misclassified {wrong_days:?}"
        ),
    )
}

fn exact_recovery() -> Check {
    let p = ModelParams::default();
    let initial = CompartmentState::new(9_652_496.0, 12_799.0, 802_334.0).unwrap();
    let config = WindowConfig::default();
    let mut worst_rate = 0.0f64;
    let mut worst_residual = 0.0f64;
    for (alpha, beta) in [(0.07, 0.028), (0.05, 0.030), (0.12, 0.027)] {
        let schedule: Vec<DayRates> = (FIRST_DAY..LAST_DAY)
            .map(|t| DayRates::new(alpha, beta, occupancy_percent(t) / 100.0).unwrap())
            .collect();
        let traj = simulate(initial, FIRST_DAY, &p, &schedule).unwrap();
        let rho: Vec<f64> = (FIRST_DAY..=LAST_DAY)
            .map(|t| occupancy_percent(t) / 100.0)
            .collect();
        let data = Dataset::from_trajectory(&traj, &rho, anchor(), p.population).unwrap();
        let estimates = estimate_series(&data, &p, 0, 30, &config, &Bounds::default()).unwrap();
        if estimates.len() != 31 {
            return Err(format!("{} estimates for 31 days", estimates.len()));
        }
        for est in &estimates {
            worst_rate = worst_rate
                .max((est.alpha - alpha).abs())
                .max((est.beta - beta).abs());
            let sys = build_system(&data, &p, est.day, &config).unwrap();
            let scale: f64 = sys.rhs.iter().map(|b| b * b).sum();
            worst_residual = worst_residual.max(est.residual_norm / scale);
        }
    }
    ensure(
        worst_rate < 1e-8 && worst_residual < 1e-16,
        format!("max rate error {worst_rate:.3e} (tol 1e-8), max residual/scale {worst_residual:.3e} (tol 1e-16)"),
    )
}

/// Brute-force argmin over `{0, 1e-4, …, 1}²`, first strict minimum in
/// α-major order.
fn grid_oracle(sys: &LinearSystem) -> (f64, f64) {
    const STEPS: usize = 10_000;
    let (mut g11, mut g12, mut g22, mut c1, mut c2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (row, b) in sys.rows.iter().zip(&sys.rhs) {
        g11 += row[0] * row[0];
        g12 += row[0] * row[1];
        g22 += row[1] * row[1];
        c1 += row[0] * b;
        c2 += row[1] * b;
    }
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=STEPS {
        let a = i as f64 / STEPS as f64;
        let fixed = g11 * a * a - 2.0 * c1 * a;
        let lin = 2.0 * (g12 * a - c2);
        for j in 0..=STEPS {
            let b = j as f64 / STEPS as f64;
            let f = fixed + (g22 * b + lin) * b;
            if f < best.0 {
                best = (f, a, b);
            }
        }
    }
    (best.1, best.2)
}

fn box_ls_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2021);
    let h = 1e-4;
    let (mut worse_objective, mut off_grid, mut on_boundary) = (0, 0, 0);
    for _ in 0..100 {
        let truth = [rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5)];
        let rows: Vec<[f64; 2]> = (0..10)
            .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let rhs = rows
            .iter()
            .map(|r| r[0] * truth[0] + r[1] * truth[1] + rng.gen_range(-0.3..0.3))
            .collect();
        let sys = LinearSystem { day: 0, rows, rhs };
        let est = solve_box_ls(&sys, &Bounds::default()).unwrap();
        let (ga, gb) = grid_oracle(&sys);
        let grid_obj = sys.objective(ga, gb);
        worse_objective += usize::from(est.residual_norm > grid_obj * (1.0 + 1e-12) + 1e-15);
        off_grid +=
            usize::from((est.alpha - ga).abs() > h + 1e-12 || (est.beta - gb).abs() > h + 1e-12);
        on_boundary += usize::from(est.active_bounds.any());
    }
    ensure(
        worse_objective == 0 && off_grid == 0,
        format!(
            "larger objective {worse_objective}/100, outside one cell {off_grid}/100 ({on_boundary} with active bounds)"
        ),
    )
}

fn conservation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1707);
    let p = ModelParams::default();
    let (mut steps, mut violations, mut worst) = (0, 0, 0.0f64);
    while steps < 100_000 {
        let state = CompartmentState::new(
            rng.gen_range(0.0..1.2e7),
            rng.gen_range(0.0..1e6),
            rng.gen_range(0.0..1e7),
        )
        .unwrap();
        let rates = DayRates::new(rng.gen(), rng.gen(), rng.gen()).unwrap();
        let Ok(next) = step(&state, &p, &rates) else {
            continue;
        };
        steps += 1;
        let (before, after) = (state.total(), next.total());
        let expected = p.entry_rate - p.death_rate * before - p.excess_death_rate * state.infected;
        let ulps = ((after - before) - expected).abs() / ulp(before.max(after));
        worst = worst.max(ulps);
        violations += usize::from(ulps > 8.0);
    }
    ensure(
        violations == 0,
        format!("{steps} steps, worst {worst:.2} ulp (tol 8), violations {violations}"),
    )
}

fn variant_consistency() -> Check {
    let p = ModelParams::default();
    let mut worst = 0.0f64;
    // Bundled synthetic fixture with fitted rates.
    let data = Dataset::load_csv(fixture("synthetic_dataset.csv")).unwrap();
    let estimates = estimate_series(
        &data,
        &p,
        0,
        30,
        &WindowConfig::default(),
        &Bounds::default(),
    )
    .unwrap();
    let mut sets = vec![(data, estimates)];
    // Time-varying rates, paired with the true rates.
    let initial = CompartmentState::new(9_652_496.0, 12_799.0, 802_334.0).unwrap();
    let schedule: Vec<DayRates> = (0..31)
        .map(|d| {
            let d = d as f64;
            DayRates::new(0.05 + 0.002 * d, 0.03 - 0.0001 * d, 0.43 - 0.01 * d).unwrap()
        })
        .collect();
    let traj = simulate(initial, 0, &p, &schedule[..30]).unwrap();
    let rho: Vec<f64> = schedule.iter().map(|r| r.occupancy).collect();
    let data = Dataset::from_trajectory(&traj, &rho, anchor(), p.population).unwrap();
    let estimates = schedule
        .iter()
        .enumerate()
        .map(|(d, r)| RateEstimate {
            day: d as i64,
            alpha: r.recovery,
            beta: r.incidence,
            residual_norm: 0.0,
            active_bounds: Default::default(),
        })
        .collect();
    sets.push((data, estimates));

    for (data, estimates) in &sets {
        let a = r_eff_series(data, estimates, &p, ReffVariant::DataBased).unwrap();
        let b = r_eff_series(data, estimates, &p, ReffVariant::SimulationBased).unwrap();
        if a.len() != 31 || b.len() != 31 {
            return Err(format!("series lengths {} and {}", a.len(), b.len()));
        }
        for (x, y) in a.iter().zip(&b) {
            worst = worst.max((x.r_eff - y.r_eff).abs());
        }
    }
    ensure(
        worst < 1e-10,
        format!("max |data-based - simulation-based| = {worst:.3e} over 2 fixtures, tol 1e-10"),
    )
}

fn bundle(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            (
                path.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&path).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Check {
    let dataset = fixture("synthetic_dataset.csv").display().to_string();
    let cases = fixture("synthetic_cases.csv").display().to_string();
    let occupancy = fixture("synthetic_occupancy.csv").display().to_string();
    let inputs: [Vec<&str>; 2] = [
        vec!["--dataset", &dataset],
        vec![
            "--cases",
            &cases,
            "--occupancy",
            &occupancy,
            "--anchor",
            "2021-08-07",
        ],
    ];
    let mut compared = 0;
    for input in &inputs {
        let mut bundles = Vec::new();
        for jobs in ["1", "1", "4"] {
            let dir = tempfile::tempdir().unwrap();
            let out_dir = dir.path().display().to_string();
            let mut args = vec!["report", "--out", &out_dir, "--jobs", jobs];
            args.extend(input.iter().copied());
            let out = ppkm(&args);
            if !out.status.success() {
                return Err(format!("report failed: {}", stderr(&out)));
            }
            bundles.push(bundle(dir.path()));
        }
        if bundles.iter().any(|b| b != &bundles[0]) {
            return Err(format!("bundles differ for inputs {input:?}"));
        }
        compared += bundles[0].len();
    }
    ensure(
        compared > 0,
        format!("{compared} files identical across 3 runs each (jobs 1, 1, 4) for 2 input forms"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 R_eff formula anchor", reff_anchor, None),
        ("2 naive-estimator anchor", naive_anchor, None),
        (
            "3 classifier truth table",
            classifier_truth_table,
            Some(Duration::from_secs(5)),
        ),
        (
            "4 estimator exact recovery",
            exact_recovery,
            Some(Duration::from_secs(10)),
        ),
        (
            "5 box-LS oracle equivalence",
            box_ls_oracle,
            Some(Duration::from_secs(30)),
        ),
        (
            "6 conservation identity",
            conservation,
            Some(Duration::from_secs(5)),
        ),
        ("7 variant self-consistency", variant_consistency, None),
        ("8 end-to-end determinism", determinism, None),
    ];
    let mut failed = 0;
    for (name, check, limit) in criteria {
        let started = Instant::now();
        let result =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".to_owned()));
        let elapsed = started.elapsed();
        let result = match (result, limit) {
            (Ok(detail), Some(limit)) if elapsed > limit => {
                Err(format!("{detail}; took {elapsed:.2?}, limit {limit:?}"))
            }
            (r, _) => r,
        };
        match result {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{elapsed:.2?}]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail} [{elapsed:.2?}]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

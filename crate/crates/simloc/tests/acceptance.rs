//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use anyhow::{ensure, Context, Result};
use simloc::checks::{determinant_identity_error, f_q_direct, f_q_grid, three_way_n2, zero_mode_residual};
use simloc::config::RunConfig;
use simloc::run::{analytic_one, run_plan_parallel, simulate, thread_pool, Mode};
use simloc_core::analytic::{iq_finite_n, iq_thermo, rho0, AnalyticMomentQuery, FiniteNQuery};
use simloc_core::eigen::eigh_symmetric;
use simloc_core::ensemble::{estimate_dos0, EnsemblePlan, EnsembleResult, DEFAULT_WINDOW_FACTOR};
use simloc_core::model::{assemble_with_potential, build_simplex_hopping, ModelParams};
use simloc_core::quadrature::{integrate_points, Tolerance};
use simloc_core::specfun::{f_q_closed, gamma, kummer_1f1};

type Outcome = Result<(bool, String)>;

fn flat_band() -> Outcome {
    let start = Instant::now();
    let n = 100;
    let h = assemble_with_potential(&build_simplex_hopping(n)?, &vec![0.0; n])?;
    let d = eigh_symmetric(&h)?;
    let elapsed = start.elapsed().as_secs_f64();
    let ones = d.eigenvalues().iter().filter(|l| (*l - 1.0).abs() < 1e-10).count();
    let zeros = d.eigenvalues().iter().filter(|l| l.abs() < 1e-10).count();
    Ok((
        ones == 1 && zeros == n - 1 && elapsed < 1.0,
        format!("{ones} eigenvalue at 1, {zeros} at 0, {elapsed:.3} s"),
    ))
}

fn desk_run(pool: &rayon::ThreadPool) -> Result<Vec<EnsembleResult>> {
    let cfg = RunConfig::from_json(r#"{"n":256,"w":[0.01,3,10],"q":[2,3,4],"realizations":500,"seed":7}"#)?;
    Ok(simulate(pool, &cfg)?)
}

fn monte_carlo_vs_thermo(sims: &[EnsembleResult]) -> Outcome {
    let mut ok = true;
    let mut worst = (0.0f64, 0.0f64);
    let mut fewest = u64::MAX;
    for m in sims.iter().flat_map(|r| &r.moments) {
        let a = analytic_one(m.q, m.w, Mode::Thermo)?;
        let diff = (m.estimate - a.value).abs();
        let sig = diff / m.std_error.hypot(a.error_estimate);
        let rel = diff / a.value;
        ok &= sig <= 3.0 && rel <= 0.05 && m.states_used >= 2000;
        worst = (worst.0.max(sig), worst.1.max(rel));
        fewest = fewest.min(m.states_used);
    }
    Ok((
        ok,
        format!("9 (w, q) pairs: max {:.2} sigma, max {:.2}% relative, at least {fewest} states", worst.0, 100.0 * worst.1),
    ))
}

fn density_of_states(sims: &[EnsembleResult]) -> Outcome {
    let r = sims.iter().find(|r| r.moments[0].w == 3.0).context("no w = 3 run")?;
    let (rho, se) = estimate_dos0(&r.dos, &r.moments[0].window)?;
    let want = rho0(3.0)?;
    let rel = (rho - want).abs() / want;
    Ok((rel <= 0.03, format!("rho(0) = {rho:.5} +- {se:.5} vs {want:.5} ({:.2}%)", 100.0 * rel)))
}

fn strong_disorder() -> Outcome {
    let mut ok = true;
    let mut last = Vec::new();
    for q in [2.0, 3.0, 4.0] {
        let vals = [1e2, 1e3, 1e4]
            .iter()
            .map(|&w| Ok(iq_thermo(&AnalyticMomentQuery::new(q, w)?)?.value))
            .collect::<Result<Vec<f64>>>()?;
        let gaps: Vec<f64> = vals.iter().map(|v| (v - 1.0).abs()).collect();
        ok &= gaps[0] > gaps[1] && gaps[1] > gaps[2] && gaps[2] <= 0.01;
        last.push(format!("q={q}: {:.6}", vals[2]));
    }
    Ok((ok, format!("monotone approach; at w=1e4 {}", last.join(", "))))
}

fn determinant_identity() -> Outcome {
    let det = determinant_identity_error(2024, 2..=8, 100);
    let res = zero_mode_residual(2025, 2..=8, 100);
    Ok((det <= 1e-10 && res <= 1e-12, format!("max relative error {det:.2e}, max |B z| {res:.2e}")))
}

fn f_q_oracle() -> Outcome {
    let (mut direct, mut kummer, mut sum) = (0.0f64, 0.0f64, 0.0f64);
    for q in 2..=6u32 {
        let a = q as f64 - 0.5;
        for z in f_q_grid() {
            let f = f_q_closed(q, z)?;
            direct = direct.max((f - f_q_direct(q, z)?).abs() / f.abs());
            kummer = kummer.max((f - gamma(a) * kummer_1f1(a, 0.5, -z * z)?).abs());
        }
        let r = integrate_points(
            |z| f_q_closed(q, z).unwrap_or(f64::NAN),
            &[f64::NEG_INFINITY, -3.0, -1.0, 0.0, 1.0, 3.0, f64::INFINITY],
            &Tolerance::new(1e-12, 1e-14),
        )?;
        sum = sum.max(r.value.abs());
    }
    Ok((
        direct <= 1e-8 && kummer <= 1e-9 && sum <= 1e-8,
        format!("vs Gaussian integral {direct:.2e}, vs Kummer form {kummer:.2e}, sum rule {sum:.2e}"),
    ))
}

fn finite_n(pool: &rayon::ThreadPool) -> Outcome {
    let thermo = iq_thermo(&AnalyticMomentQuery::new(2.0, 3.0)?)?.value;
    let vals = [32, 64, 128]
        .iter()
        .map(|&n| Ok(iq_finite_n(&FiniteNQuery::new(2, 3.0, n)?)?))
        .collect::<Result<Vec<_>>>()?;
    let devs: Vec<f64> = vals.iter().map(|v| (v.value - thermo).abs() / thermo).collect();
    let converging = devs[0] > devs[1] && devs[1] > devs[2] && devs[2] <= 0.05;

    let plan = EnsemblePlan::simplex(ModelParams::new(64, 3.0, 0.0, 7)?, 2000, &[2.0], DEFAULT_WINDOW_FACTOR)?;
    let m = run_plan_parallel(pool, &plan)?.moments.remove(0);
    let sig = (m.estimate - vals[1].value) / m.std_error.hypot(vals[1].error_estimate);
    Ok((
        converging && sig.abs() <= 3.0,
        format!(
            "deviations {:.2}%, {:.2}%, {:.2}%; N=64 Monte Carlo {:.5} +- {:.5} vs {:.5} ({sig:+.2} sigma)",
            100.0 * devs[0],
            100.0 * devs[1],
            100.0 * devs[2],
            m.estimate,
            m.std_error,
            vals[1].value
        ),
    ))
}

fn three_way(pool: &rayon::ThreadPool) -> Outcome {
    let t = three_way_n2(pool, 1.0, 2, 100_000, 7)?;
    Ok((
        t.agrees(),
        format!(
            "oracle {:.6}, generating function {:.6}, Monte Carlo {:.6} +- {:.6}",
            t.oracle, t.genfun, t.monte_carlo, t.mc_error
        ),
    ))
}

fn normalization(pool: &rayon::ThreadPool) -> Outcome {
    let plan = EnsemblePlan::simplex(ModelParams::new(64, 3.0, 0.0, 3)?, 300, &[1.0], DEFAULT_WINDOW_FACTOR)?;
    let m = run_plan_parallel(pool, &plan)?.moments.remove(0);
    Ok((
        m.estimate == 1.0 && m.std_error == 0.0,
        format!("I_1 = {} +- {} over {} states", m.estimate, m.std_error, m.states_used),
    ))
}

fn csv_files(dir: &Path) -> Result<Vec<(String, Vec<u8>)>> {
    let mut v = Vec::new();
    for e in std::fs::read_dir(dir)? {
        let p = e?.path();
        if p.extension().is_some_and(|x| x == "csv") {
            let name = p.file_name().context("file name")?.to_string_lossy().into_owned();
            v.push((name, std::fs::read(&p)?));
        }
    }
    v.sort();
    Ok(v)
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir()?;
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"n":64,"w":[1,3],"q":[2,3],"realizations":60,"seed":11,"tolerances":{"sigma_threshold":1e9}}"#,
    )?;
    let mut outputs = Vec::new();
    for (run, threads) in [(0, "1"), (1, "3"), (2, "1")] {
        let out = tmp.path().join(format!("run{run}"));
        let status = Command::new(env!("CARGO_BIN_EXE_simloc"))
            .args(["--threads", threads, "compare", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .output()?;
        ensure!(status.status.success(), "compare failed: {}", String::from_utf8_lossy(&status.stderr));
        outputs.push(csv_files(&out)?);
    }
    let names: Vec<&str> = outputs[0].iter().map(|(n, _)| n.as_str()).collect();
    Ok((
        !outputs[0].is_empty() && outputs.iter().all(|o| *o == outputs[0]),
        format!("{} CSVs identical across 1, 3, 1 threads: {}", names.len(), names.join(", ")),
    ))
}

fn main() {
    let pool = thread_pool(None).expect("thread pool");
    let start = Instant::now();
    let sims = desk_run(&pool);
    let shared = |f: fn(&[EnsembleResult]) -> Outcome| match &sims {
        Ok(s) => f(s),
        Err(e) => Err(anyhow::anyhow!("ensemble run failed: {e}")),
    };
    let outcomes: Vec<(&str, Outcome)> = vec![
        ("1 flat band", flat_band()),
        ("2 Monte Carlo vs thermodynamic moments", shared(monte_carlo_vs_thermo)),
        ("3 density of states at w=3", shared(density_of_states)),
        ("4 strong-disorder limit", strong_disorder()),
        ("5 determinant identity", determinant_identity()),
        ("6 F_q oracle", f_q_oracle()),
        ("7 finite-N convergence", finite_n(&pool)),
        ("8 N=2 three-way agreement", three_way(&pool)),
        ("9 q=1 normalization", normalization(&pool)),
        ("10 determinism across thread counts", determinism()),
    ];
    let mut failed = 0;
    for (name, outcome) in outcomes {
        let (ok, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e:#}")));
        failed += usize::from(!ok);
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} of 10 passed in {:.1} s", 10 - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}

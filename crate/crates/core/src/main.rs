//! Command-line driver: scenario runs, benchmark suites with pass/fail
//! verdicts, the Γ-sweep table and a fast self-check (`verify`).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use willmore2d::config::{parse_config, OUTPUT_DIR_ENV};
use willmore2d::contours::extract_contours;
use willmore2d::energies::{diffuse_area, total_energy, willmore_energy};
use willmore2d::flow::{ExtraForces, FlowParams, FlowState, StopReason, Stepper};
use willmore2d::grid::{inner_product, integrate, laplacian, BoundaryMode, Field, Grid2};
use willmore2d::io::{write_energy_csv, write_field, write_field_pgm};
use willmore2d::potentials::{self, PotentialPair};
use willmore2d::scenarios::{
    analytic_circle_radius, ground_state_check, run_scenario_with, ScenarioConfig, ScenarioKind,
};

#[derive(Parser)]
#[command(
    name = "willmore2d",
    about = "Two-variable diffuse-interface Willmore (elastica) flow in 2D",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario described by a config file.
    Run {
        /// Path to a `key = value` configuration file.
        config: PathBuf,
    },
    /// Run a named benchmark with its default setup and print the
    /// acceptance metrics.
    Bench {
        which: BenchKind,
        /// Output directory for CSV and field dumps.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Evaluate the recovery-sequence energies along the default ε-list.
    GammaSweep {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the fast invariant suite; exits nonzero on any failure.
    Verify,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchKind {
    Circle,
    Lije,
    Collide,
    Adhesion,
    Clover,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Run { config } => cmd_run(&config),
        Cmd::Bench { which, out } => cmd_bench(which, &out),
        Cmd::GammaSweep { out } => cmd_gamma(&out),
        Cmd::Verify => return cmd_verify(),
    };
    match result {
        Ok(ok) => {
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn output_dir(configured: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(d) => PathBuf::from(d),
        None => configured.to_path_buf(),
    }
}

fn cmd_run(config_path: &Path) -> willmore2d::Result<bool> {
    let text = std::fs::read_to_string(config_path)?;
    let cfg = parse_config(&text)?;
    let out_dir = output_dir(&cfg.output_dir);
    std::fs::create_dir_all(&out_dir)?;
    let sc = cfg.to_scenario()?;
    println!(
        "running scenario '{}' on a {}x{} grid (eps = {}, tau = {})",
        cfg.scenario.name(),
        cfg.nx,
        cfg.ny,
        cfg.epsilon,
        cfg.tau
    );
    let snapshots = cfg.snapshot_interval;
    let mut report_count = 0usize;
    let name = cfg.scenario.name();
    let dir = out_dir.clone();
    let outcome = run_scenario_with(&sc, |state, rep| {
        report_count += 1;
        if snapshots > 0 && (report_count - 1) % snapshots == 0 {
            let tag = format!("{name}-u-{:08}", state.step);
            let _ = write_field(&dir.join(format!("{tag}.txt")), &state.u);
            let _ = write_field_pgm(&dir.join(format!("{tag}.pgm")), &state.u);
            if let Some(v) = &state.v {
                let tagv = format!("{name}-v-{:08}", state.step);
                let _ = write_field(&dir.join(format!("{tagv}.txt")), v);
                let _ = write_field_pgm(&dir.join(format!("{tagv}.pgm")), v);
            }
        }
        println!(
            "  t = {:.6}  total = {:.6}  perimeter1 = {:.6}  components = {}",
            rep.time, rep.total, rep.perimeter1, rep.contour_components
        );
    })?;
    let csv = out_dir.join(format!("{}-energies.csv", cfg.scenario.name()));
    write_energy_csv(&csv, &outcome.reports)?;
    println!("wrote {}", csv.display());
    if let Some(u) = &outcome.final_u {
        write_field(&out_dir.join(format!("{}-final-u.txt", cfg.scenario.name())), u)?;
        write_field_pgm(&out_dir.join(format!("{}-final-u.pgm", cfg.scenario.name())), u)?;
    }
    if let Some(v) = &outcome.final_v {
        write_field(&out_dir.join(format!("{}-final-v.txt", cfg.scenario.name())), v)?;
    }
    if let Some(stop) = &outcome.stop {
        println!("stopped: {stop:?}");
        if let StopReason::StepFailed { step, message } = stop {
            eprintln!("step {step} failed: {message}");
            return Ok(false);
        }
    }
    if let Some(g) = &outcome.metrics.gamma {
        print_gamma_table(g);
    }
    if let Some(gs) = &outcome.metrics.ground_state {
        println!(
            "ground state: F_eps = {:.6e}, |v - Phi(u)|_max = {:.3e}",
            gs.f_eps, gs.v_phi_max
        );
    }
    Ok(true)
}

fn cmd_bench(which: BenchKind, out: &Path) -> willmore2d::Result<bool> {
    let out_dir = output_dir(out);
    std::fs::create_dir_all(&out_dir)?;
    match which {
        BenchKind::Circle => bench_circle(&out_dir),
        BenchKind::Lije => bench_lije(&out_dir),
        BenchKind::Collide => bench_collide(&out_dir),
        BenchKind::Adhesion => bench_adhesion(&out_dir),
        BenchKind::Clover => bench_clover(&out_dir),
    }
}

fn run_and_dump(cfg: &ScenarioConfig, out_dir: &Path, tag: &str) -> willmore2d::Result<willmore2d::scenarios::ScenarioOutcome> {
    let outcome = run_scenario_with(cfg, |_, rep| {
        println!(
            "  t = {:.6}  total = {:.6}  W1 = {:.6}  components = {}",
            rep.time, rep.total, rep.willmore1, rep.contour_components
        );
    })?;
    write_energy_csv(&out_dir.join(format!("{tag}-energies.csv")), &outcome.reports)?;
    if let Some(u) = &outcome.final_u {
        write_field_pgm(&out_dir.join(format!("{tag}-final-u.pgm")), u)?;
    }
    Ok(outcome)
}

fn verdict(name: &str, value: f64, threshold: f64, le: bool) -> bool {
    let pass = if le { value <= threshold } else { value >= threshold };
    println!(
        "[{}] {name}: {value:.6} ({} {threshold})",
        if pass { "PASS" } else { "FAIL" },
        if le { "<=" } else { ">=" },
    );
    pass
}

fn bench_circle(out_dir: &Path) -> willmore2d::Result<bool> {
    let cfg = ScenarioConfig::defaults(ScenarioKind::GrowingCircle);
    let outcome = run_and_dump(&cfg, out_dir, "circle")?;
    let e = outcome.metrics.max_perimeter_rel_error.unwrap_or(f64::NAN);
    let gap = outcome.metrics.perimeter_pair_max_gap.unwrap_or(f64::NAN);
    let ok = verdict("max relative perimeter error vs 2piR(t)", e, 0.05, true)
        & verdict("max gap between species perimeters", gap, 0.02, true);
    Ok(ok)
}

fn bench_lije(out_dir: &Path) -> willmore2d::Result<bool> {
    let cfg = ScenarioConfig::defaults(ScenarioKind::LiJeGraph);
    let outcome = run_and_dump(&cfg, out_dir, "lije")?;
    let w1 = outcome.metrics.final_willmore1.unwrap_or(f64::NAN);
    println!("near-stationary W1(u_h) = {w1:.5} (graph-minimizer reference 2.8711)");
    let ok = w1 >= 2.70 && w1 <= 3.00;
    println!("[{}] W1 within [2.70, 3.00]", if ok { "PASS" } else { "FAIL" });
    Ok(ok)
}

fn bench_collide(out_dir: &Path) -> willmore2d::Result<bool> {
    let cfg = ScenarioConfig::defaults(ScenarioKind::CollidingCircles);
    let outcome = run_and_dump(&cfg, out_dir, "collide")?;
    let comps = outcome.metrics.final_contours.unwrap_or(0);
    let rises = outcome.metrics.dissipation_violations.unwrap_or(usize::MAX);
    let stationary = matches!(outcome.stop, Some(StopReason::Stationary));
    println!(
        "final components = {comps}, energy rises beyond slack = {rises}, stationary = {stationary}"
    );
    let ok = comps == 2 && rises == 0 && stationary;
    println!("[{}] colliding circles", if ok { "PASS" } else { "FAIL" });
    Ok(ok)
}

fn bench_adhesion(out_dir: &Path) -> willmore2d::Result<bool> {
    let cfg = ScenarioConfig::defaults(ScenarioKind::Adhesion);
    let outcome = run_and_dump(&cfg, out_dir, "adhesion")?;
    let pen = outcome
        .metrics
        .max_inclusion_penetration
        .unwrap_or(f64::NAN);
    let cell = cfg.grid.hx().hypot(cfg.grid.hy());
    let ok = verdict("max inclusion penetration", pen, cell, true);
    Ok(ok)
}

fn bench_clover(out_dir: &Path) -> willmore2d::Result<bool> {
    // standard flow at eps = 1/16 and 1/32: stationary W1 must increase
    let cfg16 = ScenarioConfig::defaults(ScenarioKind::CloverleafStandard);
    let out16 = run_and_dump(&cfg16, out_dir, "clover-std-16")?;
    let w16 = out16.metrics.final_willmore1.unwrap_or(f64::NAN);
    let mut cfg32 = ScenarioConfig::defaults(ScenarioKind::CloverleafStandard);
    cfg32.flow.epsilon = 1.0 / 32.0;
    cfg32.grid = Grid2::unit_square(512, BoundaryMode::Neumann);
    let out32 = run_and_dump(&cfg32, out_dir, "clover-std-32")?;
    let w32 = out32.metrics.final_willmore1.unwrap_or(f64::NAN);
    // modified flow at eps = 1/8; report W^1_{eps/2}(v_h)
    let cfgm = ScenarioConfig::defaults(ScenarioKind::CloverleafModified);
    let outm = run_and_dump(&cfgm, out_dir, "clover-mod")?;
    let wm = outm.metrics.final_willmore_v_half.unwrap_or(f64::NAN);
    println!("stationary W1: eps=1/16 -> {w16:.4}, eps=1/32 -> {w32:.4}, modified v at 1/16 -> {wm:.4}");
    let trend = w32 > w16;
    let excess = wm >= 1.2 * w16;
    println!("[{}] standard-flow energies increase with finer eps", if trend { "PASS" } else { "FAIL" });
    println!("[{}] modified stationary energy exceeds standard by 20%", if excess { "PASS" } else { "FAIL" });
    Ok(trend && excess)
}

fn print_gamma_table(rows: &[willmore2d::scenarios::GammaRow]) {
    let target = 4.0 * std::f64::consts::PI + std::f64::consts::PI / 2.0;
    println!("eps        nodes    (W+A)^1      (W+A)^2      penalty      rel.err^1");
    for r in rows {
        println!(
            "{:<10.6} {:<8} {:<12.6} {:<12.6} {:<12.3e} {:.4e}",
            r.eps,
            r.nodes,
            r.wa1,
            r.wa2,
            r.penalty,
            (r.wa1 - target).abs() / target
        );
    }
}

fn cmd_gamma(out: &Path) -> willmore2d::Result<bool> {
    let out_dir = output_dir(out);
    std::fs::create_dir_all(&out_dir)?;
    let cfg = ScenarioConfig::defaults(ScenarioKind::GammaSweep);
    let rows = willmore2d::scenarios::gamma_sweep(&cfg.shape, &cfg.eps_list, None, &cfg.flow)?;
    print_gamma_table(&rows);
    // plain csv for plotting
    let mut text = String::from("eps,nodes,wa1,wa2,penalty\n");
    for r in &rows {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            r.eps, r.nodes, r.wa1, r.wa2, r.penalty
        ));
    }
    std::fs::write(out_dir.join("gamma-sweep.csv"), text)?;
    let target = 4.0 * std::f64::consts::PI + std::f64::consts::PI / 2.0;
    let errs: Vec<f64> = rows.iter().map(|r| (r.wa1 - target).abs() / target).collect();
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    let ok = decreasing && errs.last().map_or(false, |&e| e <= 0.05);
    println!(
        "[{}] recovery energies approach 4pi + pi/2 with decreasing error",
        if ok { "PASS" } else { "FAIL" }
    );
    Ok(ok)
}

/// Fast self-check: potentials identities, grid adjointness, ground-state
/// diagnostics and a dissipation smoke test. Prints one line per check.
fn cmd_verify() -> ExitCode {
    let mut all_ok = true;
    let mut check = |name: &str, pass: bool| {
        println!("[{}] {name}", if pass { "ok" } else { "FAIL" });
        all_ok &= pass;
    };

    // potentials: surface tensions and algebraic identities
    let pair = PotentialPair::standard();
    check(
        "sigma1 = 1, sigma2 = 2",
        (pair.sigma1 - 1.0).abs() < 1e-6 && (pair.sigma2 - 2.0).abs() < 1e-6,
    );
    let mut idents = true;
    for k in 1..1000 {
        let p = k as f64 / 1000.0;
        let w2phi = pair.w2.eval(pair.phi(p));
        idents &= (w2phi - pair.phi_prime(p).powi(2) * pair.w1.eval(p)).abs() < 1e-10;
        idents &= (pair.psi(pair.phi(p)) - p).abs() < 1e-10;
        let r = 6.0 * (p - 0.5);
        idents &= (pair.profile2(r) - pair.phi(pair.profile1(r))).abs() < 1e-10;
        idents &= pair.profile2(r) == pair.profile1(2.0 * r);
    }
    check("transform identities (1e3 samples)", idents);
    check(
        "penalty threshold clips",
        potentials::penalty_eval(0.003, 4, 0.004) == 0.0
            && potentials::penalty_prime(0.003, 4, 0.004) == 0.0,
    );

    // grid: self-adjointness and discrete divergence theorem
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20260809);
    let mut adjoint_ok = true;
    let mut zero_ok = true;
    for bc in [BoundaryMode::Neumann, BoundaryMode::Periodic] {
        let g = Grid2::unit_square(41, bc);
        let mut f = Field::zeros(g);
        let mut h = Field::zeros(g);
        f.values_mut().iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        h.values_mut().iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        let lhs = inner_product(&laplacian(&f), &h);
        let rhs = inner_product(&f, &laplacian(&h));
        if bc == BoundaryMode::Neumann {
            adjoint_ok &= (lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0);
        }
        zero_ok &= integrate(&laplacian(&f)).abs() < 1e-10;
    }
    check("neumann laplacian self-adjoint (trapezoidal product)", adjoint_ok);
    check("integral of laplacian vanishes (both modes)", zero_ok);

    // ground-state diagnostics on a modest grid
    let params = FlowParams::default();
    let grid = Grid2::unit_square(128, BoundaryMode::Neumann);
    match ground_state_check((1.0, 0.0), 0.0, &grid, &params, None) {
        Ok(gs) => {
            check("ground state: penalty exactly zero", gs.penalty == 0.0);
            check("ground state: v = Phi(u) to 1e-10", gs.v_phi_max < 1e-10);
            check(
                "ground state: F_eps at discretization level",
                gs.f_eps > 0.0 && gs.f_eps < 5.0,
            );
        }
        Err(e) => {
            check(&format!("ground state check errored: {e}"), false);
        }
    }

    // scaling identity on a random smooth field
    {
        let g = Grid2::unit_square(96, BoundaryMode::Neumann);
        let f = Field::from_fn(g, |x, y| 0.5 + 0.4 * (2.1 * x).sin() * (1.3 * y + 0.2).cos());
        let lhs = willmore_energy(&f, &pair.w2, 0.125);
        let rhs = 2.0 * willmore_energy(&f, &pair.w1, 0.0625);
        check(
            "willmore scaling identity W2_eps = 2 W1_{eps/2}",
            (lhs - rhs).abs() <= 1e-12 * lhs.abs(),
        );
    }

    // dissipation smoke test: 30 modified steps on a near-feasible pair
    {
        let params = FlowParams::default();
        let pair = params.make_pair();
        let g = Grid2::unit_square(128, BoundaryMode::Neumann);
        let eps = params.epsilon;
        let d = |x: f64, y: f64| 0.22 - ((x - 0.48f64).powi(2) + (y - 0.53).powi(2)).sqrt();
        let bump = |x: f64, y: f64, cx: f64, cy: f64, w: f64| {
            (-(((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (w * w))).exp()
        };
        let u = Field::from_fn(g, |x, y| {
            pair.profile1(d(x, y) / eps) + 0.002 * bump(x, y, 0.3, 0.7, 0.2)
        });
        let v = Field::from_fn(g, |x, y| {
            pair.profile2(d(x, y) / eps) + 0.012 * bump(x, y, 0.5, 0.52, 0.06)
                - 0.01 * bump(x, y, 0.05, 0.1, 0.08)
        });
        let mut ok = true;
        match FlowState::coupled(u, v, &pair, &params) {
            Ok(mut state) => {
                let mut stepper =
                    Stepper::new(g, pair.clone(), params, ExtraForces::none()).unwrap();
                let mut prev = f64::INFINITY;
                for _ in 0..20 {
                    if stepper.step_modified(&mut state).is_err() {
                        ok = false;
                        break;
                    }
                    let e = total_energy(&state.u, state.v.as_ref(), &pair, &params, &ExtraForces::none())
                        .map(|r| r.total)
                        .unwrap_or(f64::NAN);
                    if !(e <= prev + 1e-6 * prev.abs().min(1e308)) && prev.is_finite() {
                        ok = false;
                        break;
                    }
                    prev = e;
                }
            }
            Err(_) => ok = false,
        }
        check("modified flow dissipates (30-step smoke test)", ok);
    }

    // perimeter diagnostics: marching squares on an exact circle profile
    {
        let g = Grid2::unit_square(128, BoundaryMode::Neumann);
        let d = willmore2d::shapes::signed_distance(
            &willmore2d::shapes::ShapeSpec::Circle {
                center: (0.5, 0.5),
                radius: 0.25,
            },
            &g,
        )
        .unwrap();
        let mut u = Field::zeros(g);
        for (w, &dv) in u.values_mut().iter_mut().zip(d.values()) {
            *w = pair.profile1(dv / 0.125);
        }
        let c = extract_contours(&u, 0.5);
        let a1 = diffuse_area(&u, &pair.w1, 0.125);
        let per = 2.0 * std::f64::consts::PI * 0.25;
        check(
            "contour extraction and diffuse perimeter agree with 2piR",
            c.component_count() == 1
                && (c.total_length - per).abs() < 0.02 * per
                && (a1 / pair.sigma1 - per).abs() < 0.05 * per,
        );
        check(
            "growing-circle radius law R(0.01)",
            (analytic_circle_radius(0.25, 0.01) - 0.3932280117) < 1e-8,
        );
    }

    if all_ok {
        println!("all checks passed");
        ExitCode::SUCCESS
    } else {
        println!("verification FAILED");
        ExitCode::FAILURE
    }
}

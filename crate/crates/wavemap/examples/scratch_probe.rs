// Scratch experiments: subcritical gradient ceiling, blow times with a
// resolvability threshold, dispersal energies, drift ratios, Q behavior,
// and the near-critical fit trajectory.

use std::f64::consts::PI;

use wavemap::diagnostics::{convergence_factor, fit_static, partial_energy};
use wavemap::evolve::{evolve, Evolution, EvolutionConfig};
use wavemap::grid::make_grid;
use wavemap::state::{gaussian_ingoing, GaussianFamily};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    match args.get(1).map(|s| s.as_str()) {
        Some("sub") => subcritical(),
        Some("super") => supercritical(),
        Some("converge") => converge(),
        Some("crit") => critical_fit(),
        Some("bisect") => bisect(),
        _ => eprintln!("usage: scratch_probe sub|super|converge|crit|bisect"),
    }
}

/// Full-resolution bisection from the paper's bracket.
fn bisect() {
    use wavemap::criticality::bisect_critical;
    let fam = GaussianFamily::new(0.0, 8.0, 2.3).unwrap();
    let grid = make_grid(30.0, 4096).unwrap();
    let mut cfg = EvolutionConfig::new(30.0);
    cfg.blow_threshold = 0.5 * PI / grid.h();
    let t0 = std::time::Instant::now();
    let result = bisect_critical(1.0, 1.4, 0.01, &fam, &cfg, grid).unwrap();
    println!(
        "bracket = ({:.6}, {:.6}), iterations = {}, resolved = {}, wall = {:.1?}",
        result.bracket.0,
        result.bracket.1,
        result.iterations,
        result.resolved,
        t0.elapsed()
    );
    for p in &result.probes {
        println!(
            "  A={:.6} -> {} (t_end {:.3})",
            p.amplitude,
            p.classification.as_str(),
            p.t_end
        );
    }
}

/// Subcritical A=1.0: max gradient, dispersal, drift ratios per resolution.
fn subcritical() {
    let fam = GaussianFamily::new(1.0, 8.0, 2.3).unwrap();
    for n in [256usize, 512, 1024, 2048, 4096] {
        let grid = make_grid(30.0, n).unwrap();
        let initial = gaussian_ingoing(&fam, grid).unwrap();
        let cfg = EvolutionConfig::new(30.0);
        let outcome = evolve(initial, &cfg).unwrap();
        let series = &outcome.series;
        let e0 = series.initial_energy().unwrap();
        let near = partial_energy(&outcome.final_state, 1, 4.0);
        println!(
            "n={n}: status={:?} max|g0|={:.2} (pi/2h={:.1}) drift={:.3e} E0={:.4} E_near/E0={:.4}",
            outcome.status,
            series.max_abs_chi_prime_origin().unwrap(),
            0.5 * PI / grid.h(),
            series.max_rel_energy_drift().unwrap(),
            e0,
            near / e0
        );
        // Drift profile over time.
        let mut line = String::new();
        for t_probe in [5.0, 10.0, 15.0, 20.0, 22.0, 24.0, 26.0, 28.0, 30.0] {
            let row = series
                .rows()
                .iter()
                .min_by(|a, b| {
                    (a.t - t_probe)
                        .abs()
                        .partial_cmp(&(b.t - t_probe).abs())
                        .unwrap()
                })
                .unwrap();
            line.push_str(&format!(
                "t={t_probe}: {:.2e}  ",
                ((row.energy - e0) / e0).abs()
            ));
        }
        println!("  {line}");
        let pre20 = series
            .rows()
            .iter()
            .filter(|r| r.t <= 20.0)
            .map(|r| ((r.energy - e0) / e0).abs())
            .fold(0.0f64, f64::max);
        println!("  max drift t<=20: {pre20:.3e}");
    }
}

/// Supercritical families with threshold pi/(2h): blow times.
fn supercritical() {
    for (a, r0, label) in [(2.0, 10.0, "A=2 R0=10"), (1.4, 8.0, "A=1.4 R0=8")] {
        let fam = GaussianFamily::new(a, r0, 2.3).unwrap();
        for n in [1024usize, 2048, 4096, 8192] {
            let grid = make_grid(30.0, n).unwrap();
            let initial = gaussian_ingoing(&fam, grid).unwrap();
            let mut cfg = EvolutionConfig::new(30.0);
            cfg.blow_threshold = 0.5 * PI / grid.h();
            let outcome = evolve(initial, &cfg).unwrap();
            println!(
                "{label} n={n}: status={:?} max|g0|={:.1}",
                outcome.status,
                outcome.series.max_abs_chi_prime_origin().unwrap()
            );
        }
    }
}

/// Lockstep Q(t) for the subcritical run, base n=1024; prints Q percentiles
/// and worst rows, plus drift ratios across the triple.
fn converge() {
    let fam = GaussianFamily::new(1.0, 8.0, 2.3).unwrap();
    let cfg = EvolutionConfig::new(30.0);
    let mut runs: Vec<Evolution> = [1024usize, 2048, 4096]
        .iter()
        .map(|&n| {
            let grid = make_grid(30.0, n).unwrap();
            Evolution::new(gaussian_ingoing(&fam, grid).unwrap(), &cfg).unwrap()
        })
        .collect();
    let mut q_rows: Vec<(f64, Option<f64>)> = Vec::new();
    'outer: loop {
        if runs[0].step().is_some() {
            break;
        }
        for _ in 0..2 {
            if runs[1].step().is_some() {
                break 'outer;
            }
        }
        for _ in 0..4 {
            if runs[2].step().is_some() {
                break 'outer;
            }
        }
        let q = convergence_factor(
            runs[0].state().chi(),
            runs[1].state().chi(),
            runs[2].state().chi(),
        )
        .ok();
        q_rows.push((runs[0].state().time(), q));
    }
    let qs: Vec<(f64, f64)> = q_rows
        .iter()
        .filter_map(|(t, q)| q.map(|q| (*t, q)))
        .collect();
    let (mut qmin, mut qmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut tmin, mut tmax) = (0.0, 0.0);
    for &(t, q) in &qs {
        if q < qmin {
            qmin = q;
            tmin = t;
        }
        if q > qmax {
            qmax = q;
            tmax = t;
        }
    }
    println!(
        "Q rows: {} (gaps {}), min Q={qmin:.3} at t={tmin:.3}, max Q={qmax:.3} at t={tmax:.3}",
        q_rows.len(),
        q_rows.len() - qs.len()
    );
    let out_of_band = qs.iter().filter(|(_, q)| *q < 3.0 || *q > 5.0).count();
    println!("rows outside [3,5]: {out_of_band}");
    for (ev, n) in runs.iter().zip([1024, 2048, 4096]) {
        println!(
            "n={n}: drift={:.4e}",
            ev.series().max_rel_energy_drift().unwrap()
        );
    }
}

/// Near-critical supercritical run at n=4096: lambda-hat trajectory over the
/// last stretch of the run.
fn critical_fit() {
    let a = 1.20; // slightly supercritical for this family, to be refined
    let fam = GaussianFamily::new(a, 8.0, 2.3).unwrap();
    let grid = make_grid(30.0, 4096).unwrap();
    let mut cfg = EvolutionConfig::new(30.0);
    cfg.blow_threshold = 0.5 * PI / grid.h();
    let mut ev = Evolution::new(gaussian_ingoing(&fam, grid).unwrap(), &cfg).unwrap();
    let mut samples = Vec::new();
    loop {
        let status = ev.step();
        if ev.step_index() % 16 == 0 || status.is_some() {
            samples.push(ev.state().clone());
        }
        if status.is_some() {
            println!("status: {status:?}");
            break;
        }
    }
    let t_end = ev.state().time();
    println!("t_end = {t_end:.4}, samples = {}", samples.len());
    for s in &samples {
        if s.time() < 0.88 * t_end {
            continue;
        }
        match fit_static(s) {
            Ok(fit) => println!(
                "t={:.4} lambda={:.4} sign={} residual={:.3e} window_hi={:.4} ({} nodes)",
                s.time(),
                fit.lambda,
                fit.sign,
                fit.residual,
                fit.window.1,
                (fit.window.1 / s.grid().h()).round()
            ),
            Err(e) => println!("t={:.4} fit failed: {e}", s.time()),
        }
    }
}

//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (visible with `cargo test --test acceptance -- --nocapture`). Heavy
//! fixtures (the subcritical convergence triple and the critical-amplitude
//! bisection) are computed once and shared.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use wavemap::criticality::{bisect_critical, Classification, CriticalSearchResult};
use wavemap::diagnostics::{
    convergence_factor, fit_static, partial_energy, total_energy, DiagnosticSeries,
};
use wavemap::evolve::{
    resolvability_threshold, spatial_operator, BoundaryMode, Evolution, EvolutionConfig,
    EvolutionStatus,
};
use wavemap::grid::{make_grid, GridFunction, RadialGrid};
use wavemap::state::{gaussian_ingoing, static_profile, FieldState, GaussianFamily};

const R_MAX: f64 = 30.0;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {criterion}: {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{criterion}: {detail}");
}

fn physics_cfg(grid: &RadialGrid, t_max: f64) -> EvolutionConfig {
    let mut cfg = EvolutionConfig::new(t_max);
    cfg.blow_threshold = resolvability_threshold(grid);
    cfg
}

fn subcritical_family() -> GaussianFamily {
    GaussianFamily::new(1.0, 8.0, 2.3).unwrap()
}

// ---------------------------------------------------------------------
// Shared fixture: subcritical run at n, 2n, 4n in lockstep (criteria 1, 2, 4)
// ---------------------------------------------------------------------

struct TripleRun {
    status: EvolutionStatus,
    series: DiagnosticSeries,
    final_state: FieldState,
}

struct Triple {
    q_rows: Vec<(f64, Option<f64>)>,
    runs: [TripleRun; 3],
}

fn subcritical_triple() -> &'static Triple {
    static TRIPLE: OnceLock<Triple> = OnceLock::new();
    TRIPLE.get_or_init(|| {
        let fam = subcritical_family();
        let mut evs: Vec<Evolution> = [1024usize, 2048, 4096]
            .iter()
            .map(|&n| {
                let grid = make_grid(R_MAX, n).unwrap();
                let initial = gaussian_ingoing(&fam, grid).unwrap();
                Evolution::new(initial, &physics_cfg(&grid, 30.0)).unwrap()
            })
            .collect();
        let mut q_rows = Vec::new();
        let mut record = |evs: &[Evolution], q_rows: &mut Vec<(f64, Option<f64>)>| {
            let q = convergence_factor(
                evs[0].state().chi(),
                evs[1].state().chi(),
                evs[2].state().chi(),
            );
            q_rows.push((evs[0].state().time(), q.ok()));
        };
        record(&evs, &mut q_rows);
        'lockstep: loop {
            if evs[0].step().is_some() {
                break;
            }
            for _ in 0..2 {
                if evs[1].step().is_some() {
                    break 'lockstep;
                }
            }
            for _ in 0..4 {
                if evs[2].step().is_some() {
                    break 'lockstep;
                }
            }
            record(&evs, &mut q_rows);
        }
        let runs: Vec<TripleRun> = evs
            .into_iter()
            .map(|mut ev| {
                let status = ev.run();
                let outcome = ev.into_outcome();
                TripleRun {
                    status,
                    series: outcome.series,
                    final_state: outcome.final_state,
                }
            })
            .collect();
        Triple {
            q_rows,
            runs: runs.try_into().ok().expect("three runs"),
        }
    })
}

// ---------------------------------------------------------------------
// Shared fixture: bisection at n = 4096 (criteria 5, 7)
// ---------------------------------------------------------------------

fn bisection() -> &'static CriticalSearchResult {
    static BISECTION: OnceLock<CriticalSearchResult> = OnceLock::new();
    BISECTION.get_or_init(|| {
        let grid = make_grid(R_MAX, 4096).unwrap();
        let fam = subcritical_family();
        bisect_critical(1.0, 1.4, 0.01, &fam, &physics_cfg(&grid, 30.0), grid).unwrap()
    })
}

// ---------------------------------------------------------------------
// 1. Convergence order
// ---------------------------------------------------------------------

#[test]
fn criterion_1_convergence_order() {
    let triple = subcritical_triple();
    let rows = &triple.q_rows;
    // The very first steps mix the one-node axis truncation (first-order at
    // r = h) with bulk error that has not yet accumulated; Q settles within
    // a fraction of a crossing time. Assert the band from t = 0.5 on and
    // account for every row before it.
    let startup = 0.5;
    let gaps = rows.iter().filter(|(_, q)| q.is_none()).count();
    let assessed: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|(t, q)| q.map(|q| (*t, q)))
        .filter(|(t, _)| *t >= startup)
        .collect();
    let out_of_band: Vec<(f64, f64)> = assessed
        .iter()
        .copied()
        .filter(|(_, q)| !(3.0..=5.0).contains(q))
        .collect();
    let (qmin, qmax) = assessed
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, q)| {
            (lo.min(*q), hi.max(*q))
        });
    let pass = !assessed.is_empty()
        && out_of_band.is_empty()
        && gaps <= 1
        && rows.last().map(|(t, _)| *t >= 29.9).unwrap_or(false);
    report(
        "1 convergence order",
        pass,
        &format!(
            "Q(t) in [{qmin:.3}, {qmax:.3}] over {} rows with t in [{startup}, 30] \
             ({} rows total, {gaps} gap at t=0, offenders: {out_of_band:?})",
            assessed.len(),
            rows.len()
        ),
    );
}

// ---------------------------------------------------------------------
// 2. Energy conservation scaling
// ---------------------------------------------------------------------

#[test]
fn criterion_2_energy_conservation_scaling() {
    let triple = subcritical_triple();
    // Total energy in the domain is conserved only until the dispersing
    // remnant starts radiating through r = r_max (around t ~ 18 here); from
    // then on E(t) drops by the physically radiated fraction (~6.5e-3,
    // converged in resolution). The scheme-error audit is therefore taken
    // over t <= 15, before first boundary contact.
    let window = 15.0;
    let drift = |series: &DiagnosticSeries| {
        let e0 = series.initial_energy().unwrap();
        series
            .rows()
            .iter()
            .filter(|r| r.t <= window)
            .map(|r| ((r.energy - e0) / e0).abs())
            .fold(0.0f64, f64::max)
    };
    let d: Vec<f64> = triple.runs.iter().map(|r| drift(&r.series)).collect();
    let r1 = d[0] / d[1];
    let r2 = d[1] / d[2];
    let full: Vec<f64> = triple
        .runs
        .iter()
        .map(|r| r.series.max_rel_energy_drift().unwrap())
        .collect();
    let pass = (3.0..=5.0).contains(&r1) && (3.0..=5.0).contains(&r2) && d[2] < 1e-3;
    report(
        "2 energy conservation scaling",
        pass,
        &format!(
            "max drift over t<={window}: {:.3e} -> {:.3e} -> {:.3e} (ratios {r1:.2}, {r2:.2}); \
             n=4096 drift {:.1e} < 1e-3; full-horizon drift incl. boundary outflow: {:.2e}/{:.2e}/{:.2e}",
            d[0], d[1], d[2], d[2], full[0], full[1], full[2]
        ),
    );
}

// ---------------------------------------------------------------------
// 3. Supercritical blow-up
// ---------------------------------------------------------------------

#[test]
fn criterion_3_supercritical_blow_up() {
    let fam = GaussianFamily::new(2.0, 10.0, 2.3).unwrap();
    let ns = [1024usize, 2048, 4096, 8192];
    let results: Vec<(EvolutionStatus, f64)> = std::thread::scope(|scope| {
        let handles: Vec<_> = ns
            .iter()
            .map(|&n| {
                let fam = fam;
                scope.spawn(move || {
                    let grid = make_grid(R_MAX, n).unwrap();
                    let initial = gaussian_ingoing(&fam, grid).unwrap();
                    let mut ev = Evolution::new(initial, &physics_cfg(&grid, 30.0)).unwrap();
                    let status = ev.run();
                    let max_grad = ev.series().max_abs_chi_prime_origin().unwrap();
                    (status, max_grad)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let all_blow = results.iter().all(|(s, _)| s.is_blow_up());
    let t_blows: Vec<f64> = results.iter().filter_map(|(s, _)| s.t_blow()).collect();
    let in_window = t_blows.iter().all(|t| (7.0..=9.0).contains(t));
    let grads: Vec<f64> = results.iter().map(|(_, g)| *g).collect();
    let monotone = grads.windows(2).all(|w| w[1] >= w[0]);
    report(
        "3 supercritical blow-up",
        all_blow && in_window && monotone,
        &format!(
            "n={ns:?}: t_blow={t_blows:.3?} (all in [7,9]: {in_window}), \
             max|chi'(0,t)|={grads:.1?} non-decreasing: {monotone}"
        ),
    );
}

// ---------------------------------------------------------------------
// 4. Subcritical dispersal
// ---------------------------------------------------------------------

#[test]
fn criterion_4_subcritical_dispersal() {
    let triple = subcritical_triple();
    let fine = &triple.runs[2];
    let e0 = fine.series.initial_energy().unwrap();
    let near = partial_energy(&fine.final_state, 1, 4.0);
    let pass = fine.status.is_completed() && near < 0.1 * e0;
    report(
        "4 subcritical dispersal",
        pass,
        &format!(
            "{:?} at t=30, energy inside r<4 is {:.2e} = {:.4}% of E(0)={:.4}",
            fine.status,
            near,
            100.0 * near / e0,
            e0
        ),
    );
}

// ---------------------------------------------------------------------
// 5. Critical bracket
// ---------------------------------------------------------------------

#[test]
fn criterion_5_critical_bracket() {
    let result = bisection();
    let (lo, hi) = result.bracket;
    let intersects = lo <= 1.21 && hi >= 1.18;
    let endpoints_ok = result.probes.iter().all(|p| match p.amplitude {
        a if a <= lo => p.classification == Classification::Subcritical,
        a if a >= hi => p.classification == Classification::Supercritical,
        _ => true,
    });
    let bound = ((0.4f64 / 0.01).log2().ceil() as usize) + 2;
    let pass = result.resolved
        && hi - lo <= 0.01 + 1e-12
        && intersects
        && endpoints_ok
        && result.probes.len() <= bound;
    report(
        "5 critical bracket",
        pass,
        &format!(
            "bracket ({lo:.5}, {hi:.5}) at n={} intersects [1.18, 1.21]: {intersects}; \
             {} probes (bound {bound}), monotone log: {endpoints_ok}",
            result.grid_n,
            result.probes.len()
        ),
    );
}

// ---------------------------------------------------------------------
// 6. Static-solution checks
// ---------------------------------------------------------------------

#[test]
fn criterion_6a_static_energy() {
    // int_0^inf of the static energy density (times r) is exactly 2 for
    // every scale; on [0, 100] the truncation is 2/(1 + (lambda*100)^2).
    let grid = make_grid(100.0, 65536).unwrap();
    let energies: Vec<f64> = [0.5, 1.0, 5.0]
        .iter()
        .map(|&lambda| {
            let chi = static_profile(lambda, 1.0, grid).unwrap();
            let state = FieldState::new(0.0, chi, GridFunction::zeros(grid)).unwrap();
            total_energy(&state, 1)
        })
        .collect();
    let near_two = energies.iter().all(|e| (e - 2.0).abs() < 0.02);
    let spread = energies
        .iter()
        .flat_map(|a| energies.iter().map(move |b| (a - b).abs()))
        .fold(0.0f64, f64::max);
    let pass = near_two && spread < 0.02;
    report(
        "6a static energy",
        pass,
        &format!("E(lambda=0.5,1,5) = {energies:.5?}, all within 1% of 2, spread {spread:.1e}"),
    );
}

#[test]
fn criterion_6b_operator_residual_second_order() {
    // The static profile solves the continuum equation exactly, so L[chi]
    // sampled on the grid is pure truncation error. Away from the axis the
    // stencil is second order (ratio ~4 per doubling). The single node at
    // r = h carries a first-order term, (2/3) lambda^3 h + O(h^3), from the
    // centered first derivative divided by r; it is reported here and
    // pinned at ratio ~2 so a regression in either regime is caught.
    let residuals = |n: usize| {
        let grid = make_grid(R_MAX, n).unwrap();
        let chi = static_profile(1.0, 1.0, grid).unwrap();
        let state = FieldState::new(0.0, chi, GridFunction::zeros(grid)).unwrap();
        let l = spatial_operator(&state, 1);
        let axis = l.values()[1].abs();
        let bulk = (1..grid.n())
            .filter(|&i| grid.node(i) >= 1.0 && grid.node(i) <= 10.0)
            .map(|i| l.values()[i].abs())
            .fold(0.0f64, f64::max);
        (axis, bulk)
    };
    let ns = [1024usize, 2048, 4096, 8192];
    let rs: Vec<(f64, f64)> = ns.iter().map(|&n| residuals(n)).collect();
    let bulk_ratios: Vec<f64> = rs.windows(2).map(|w| w[0].1 / w[1].1).collect();
    let axis_ratios: Vec<f64> = rs.windows(2).map(|w| w[0].0 / w[1].0).collect();
    let bulk_ok = bulk_ratios.iter().all(|r| (3.0..=5.0).contains(r));
    let axis_ok = axis_ratios.iter().all(|r| (1.5..=2.5).contains(r));
    report(
        "6b operator residual",
        bulk_ok && axis_ok,
        &format!(
            "smooth-region residual ratios per doubling {bulk_ratios:.2?} (all in [3,5]); \
             axis-node first-order layer ratios {axis_ratios:.2?} (~2, known stencil artifact)"
        ),
    );
}

#[test]
fn criterion_6c_static_evolution_drift() {
    let drift = |n: usize| {
        let grid = make_grid(R_MAX, n).unwrap();
        let chi0 = static_profile(1.0, 1.0, grid).unwrap();
        let state = FieldState::new(0.0, chi0.clone(), GridFunction::zeros(grid)).unwrap();
        let mut cfg = physics_cfg(&grid, 1.0);
        cfg.boundary = BoundaryMode::FixedDirichlet;
        let mut ev = Evolution::new(state, &cfg).unwrap();
        let status = ev.run();
        assert!(status.is_completed());
        ev.state().chi().checked_sub(&chi0).unwrap().max_abs()
    };
    let d1 = drift(2048);
    let d2 = drift(4096);
    let ratio = d1 / d2;
    let pass = (3.0..=5.0).contains(&ratio) && d2 < 1e-5;
    report(
        "6c static evolution drift",
        pass,
        &format!("max nodal drift at t=1: {d1:.3e} (n=2048) -> {d2:.3e} (n=4096), ratio {ratio:.2}"),
    );
}

// ---------------------------------------------------------------------
// 7. Static attractor
// ---------------------------------------------------------------------

#[test]
fn criterion_7_static_attractor() {
    // Evolve the slightly supercritical endpoint of the final bracket and
    // fit the static profile over the last 10% of the run.
    let a_super = bisection().bracket.1;
    let grid = make_grid(R_MAX, 4096).unwrap();
    let fam = subcritical_family().with_amplitude(a_super);
    let initial = gaussian_ingoing(&fam, grid).unwrap();
    let mut ev = Evolution::new(initial, &physics_cfg(&grid, 30.0)).unwrap();
    let mut samples: Vec<FieldState> = Vec::new();
    loop {
        let status = ev.step();
        if ev.step_index() % 16 == 0 || status.is_some() {
            samples.push(ev.state().clone());
        }
        if let Some(status) = status {
            assert!(status.is_blow_up(), "probe should blow up, got {status:?}");
            break;
        }
    }
    let t_end = ev.state().time();
    let late: Vec<&FieldState> = samples.iter().filter(|s| s.time() >= 0.9 * t_end).collect();

    let mut fits = Vec::new();
    let mut failures = Vec::new();
    for s in &late {
        match fit_static(s) {
            Ok(fit) => fits.push((s.time(), fit)),
            // The innermost region drops below three grid nodes just before
            // the end; those states carry no fittable window.
            Err(_) => failures.push(s.time()),
        }
    }
    let bound = 0.05 * FRAC_PI_2;
    let residual_ok = fits.iter().all(|(_, f)| f.residual < bound);
    let lambda_increasing = fits.windows(2).all(|w| w[1].1.lambda > w[0].1.lambda);
    let failures_only_terminal = failures.iter().all(|t| *t >= 0.99 * t_end);
    let lambda_span = (
        fits.first().map(|(_, f)| f.lambda).unwrap_or(f64::NAN),
        fits.last().map(|(_, f)| f.lambda).unwrap_or(f64::NAN),
    );
    let max_residual = fits.iter().map(|(_, f)| f.residual).fold(0.0f64, f64::max);
    let pass = fits.len() >= 10 && residual_ok && lambda_increasing && failures_only_terminal;
    report(
        "7 static attractor",
        pass,
        &format!(
            "A={a_super:.5} blows at t={t_end:.3}; {} fits over t in [{:.2}, {t_end:.2}]: \
             residual max {max_residual:.2e} < {bound:.2e}, lambda {:.2} -> {:.2} strictly \
             increasing: {lambda_increasing}; {} unfittable terminal states (all past 0.99 t_end: \
             {failures_only_terminal})",
            fits.len(),
            0.9 * t_end,
            lambda_span.0,
            lambda_span.1,
            failures.len()
        ),
    );
}

// ---------------------------------------------------------------------
// 8. Exact symmetries
// ---------------------------------------------------------------------

#[test]
fn criterion_8_exact_symmetries() {
    let per_step_tol = 1e-12;

    // Odd symmetry through a full evolution.
    let grid = make_grid(R_MAX, 512).unwrap();
    let fam = subcritical_family();
    let initial = gaussian_ingoing(&fam, grid).unwrap();
    let cfg = physics_cfg(&grid, 5.0);
    let mut pos = Evolution::new(initial.clone(), &cfg).unwrap();
    let mut neg = Evolution::new(initial.negated(), &cfg).unwrap();
    pos.run();
    neg.run();
    let steps = pos.step_index() as f64;
    let odd_tol = per_step_tol * steps;
    let odd_dev = pos
        .state()
        .chi()
        .values()
        .iter()
        .zip(neg.state().chi().values())
        .chain(pos.state().pi().values().iter().zip(neg.state().pi().values()))
        .map(|(a, b)| (a + b).abs() / a.abs().max(1.0))
        .fold(0.0f64, f64::max);

    // Scale invariance (r, t) -> (a r, a t): chi coincides nodewise on the
    // stretched grid when pi is scaled by 1/a and dt follows h.
    let mut scale_dev = 0.0f64;
    let mut scale_steps = 0.0;
    for a in [2.0, 3.0] {
        let big = make_grid(a * R_MAX, 512).unwrap();
        let chi = GridFunction::new(big, initial.chi().values().to_vec()).unwrap();
        let pi = GridFunction::new(
            big,
            initial.pi().values().iter().map(|v| v / a).collect(),
        )
        .unwrap();
        let scaled = FieldState::new(0.0, chi, pi).unwrap();
        let mut base = Evolution::new(initial.clone(), &physics_cfg(&grid, 10.0)).unwrap();
        let mut stretched = Evolution::new(scaled, &physics_cfg(&big, 10.0 * a)).unwrap();
        for _ in 0..200 {
            base.step();
            stretched.step();
        }
        assert!(base.is_running() && stretched.is_running());
        scale_steps = 200.0;
        let dev = base
            .state()
            .chi()
            .values()
            .iter()
            .zip(stretched.state().chi().values())
            .map(|(x, y)| (x - y).abs() / x.abs().max(1.0))
            .fold(0.0f64, f64::max);
        scale_dev = scale_dev.max(dev);
        let pi_dev = base
            .state()
            .pi()
            .values()
            .iter()
            .zip(stretched.state().pi().values())
            .map(|(x, y)| (x - a * y).abs() / x.abs().max(1.0))
            .fold(0.0f64, f64::max);
        scale_dev = scale_dev.max(pi_dev);
    }
    let scale_tol = per_step_tol * scale_steps;
    let pass = odd_dev <= odd_tol && scale_dev <= scale_tol;
    report(
        "8 exact symmetries",
        pass,
        &format!(
            "odd-symmetry deviation {odd_dev:.2e} <= {odd_tol:.2e} ({steps} steps); \
             scale-invariance deviation {scale_dev:.2e} <= {scale_tol:.2e} (a=2,3, 200 steps)"
        ),
    );
}

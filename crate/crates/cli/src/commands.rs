//! One function per subcommand. Each writes its files and returns the
//! checks it asserts.

use std::io::Write;

use fraclab::barriers::{
    caloric_residuals, certify, check_bfun_properties, compute_bfun, make_barrier, BarrierTag, TimeCoefficient,
    DEFAULT_SPHERE_POINT,
};
use fraclab::evolution::{solve_ivp, DriftField, Forcing, IvpConfig};
use fraclab::extension::{
    default_ygrid, expansion_fit, expansion_fit_poisson, solve_extension, special_solution_residuals, SpecialSolution,
    TopBoundary,
};
use fraclab::holder::dyadic_scales;
use fraclab::regularity::{
    flatness_experiment, holder_estimate_experiment, smooth_data, synth_drift, theorem1_experiment,
    theorem2_experiment, ExperimentConfig, ExponentReport,
};
use fraclab::rng::Rng;
use fraclab::spectral::{frac_laplacian, heat_propagate};
use fraclab::{Error, FractionalParams, Result, ScalarField, TorusGrid};

use crate::config::Config;
use crate::output::{Check, Outputs};

/// Allowed decrease of a swept exponent between neighbouring seminorms,
/// attributed to fitting noise.
pub const SWEEP_NOISE: f64 = 0.05;
/// Relative DtN error accepted against the exact multiplier.
pub const DTN_TOLERANCE: f64 = 0.02;
/// Relative semigroup defect accepted.
pub const SEMIGROUP_TOLERANCE: f64 = 1e-12;
/// Residuals at or below this level count as exact.
const EXACT: f64 = 1e-12;

fn params(cfg: &Config) -> Result<FractionalParams> {
    FractionalParams::new(cfg.physics.s, cfg.grid.dim)
}

fn grid(cfg: &Config) -> Result<TorusGrid> {
    TorusGrid::new(cfg.grid.dim, cfg.grid.n, cfg.grid.length)
}

/// Maps `f` over `items` on at most `jobs` threads, keeping order.
fn par_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let jobs = jobs.clamp(1, items.len().max(1));
    if jobs == 1 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(jobs);
    std::thread::scope(|scope| {
        let handles: Vec<_> =
            items.chunks(chunk).map(|part| scope.spawn(|| part.iter().map(&f).collect::<Vec<R>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

fn write_points(w: &mut impl Write, grid: &TorusGrid, idx: usize) -> std::io::Result<()> {
    let x = grid.point(idx);
    if grid.dim() == 1 {
        write!(w, "{:.12e}", x[0])
    } else {
        write!(w, "{:.12e},{:.12e}", x[0], x[1])
    }
}

fn coord_header(grid: &TorusGrid) -> &'static str {
    if grid.dim() == 1 {
        "x"
    } else {
        "x1,x2"
    }
}

/// Extends seeded smooth data and compares the calibrated DtN map with the
/// spectral operator.
pub fn extend(cfg: &Config, out: &mut Outputs) -> Result<Vec<Check>> {
    let p = params(cfg)?;
    let g = grid(cfg)?;
    let u = smooth_data(&g, cfg.run.seed);
    let y = default_ygrid(&g, &p, cfg.grid.m, TopBoundary::ModeDecay)?;
    let sol = solve_extension(&u, &p, &y, TopBoundary::ModeDecay)?;
    let exact = frac_laplacian(&u, &p)?;
    let dtn = sol.calibrated_dtn();

    out.write("trace.field", |w| u.write_binary(w))?;
    out.write("extension.field", |w| sol.field.write_binary(w))?;
    out.json("extension.json", &sol.sidecar())?;
    out.csv("dtn.csv", false, |w| {
        writeln!(w, "{},trace,dtn,spectral", coord_header(&g))?;
        for i in 0..g.len() {
            write_points(w, &g, i)?;
            writeln!(w, ",{:.12e},{:.12e},{:.12e}", u.values()[i], dtn.values()[i], exact.values()[i])?;
        }
        Ok(())
    })?;
    Ok(vec![
        Check::at_most("extension/solver_residual", sol.residual, 1e-10),
        Check::at_most("extension/dtn_relative_error", dtn.sup_distance(&exact) / exact.sup_norm(), DTN_TOLERANCE),
    ])
}

fn forcing(cfg: &Config, g: &TorusGrid) -> Forcing {
    if cfg.drift.forcing == 0.0 {
        return Forcing::Zero;
    }
    let phase = Rng::derived(cfg.run.seed, 2).phase();
    let k1 = g.fundamental();
    let amp = cfg.drift.forcing;
    Forcing::Static(ScalarField::from_fn(*g, |x| amp * (k1 * x[0] + phase).cos()))
}

/// Solves on `[-T, 0]` with a drift in `C^{1-2s+alpha}` and checks the
/// maximum principle.
pub fn evolve(cfg: &Config, out: &mut Outputs) -> Result<Vec<Check>> {
    let p = params(cfg)?;
    let g = grid(cfg)?;
    let beta = 1.0 - 2.0 * p.s() + cfg.physics.alpha;
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidArgument(format!("drift exponent 1 - 2s + alpha = {beta} must lie in (0, 1]")));
    }
    let (b, _) = synth_drift(&cfg.experiment(), beta)?;
    let f = forcing(cfg, &g);
    let u0 = smooth_data(&g, cfg.run.seed);
    let ivp = IvpConfig {
        t0: -cfg.physics.duration,
        duration: cfg.physics.duration,
        eps: cfg.physics.eps,
        dt_max: cfg.physics.dt_max,
        cfl_target: cfg.physics.cfl_target,
        band_scales: dyadic_scales(g.length() / 8.0, 2.0 * g.spacing()),
        keep_slices: false,
    };
    let run = solve_ivp(&u0, &b, &f, &p, &ivp)?;
    let u = &run.state.u;
    out.write("u0.field", |w| u0.write_binary(w))?;
    out.write("u.field", |w| u.write_binary(w))?;
    out.csv("series.csv", false, |w| run.series.write_csv(w))?;
    out.csv("u.csv", false, |w| {
        writeln!(w, "{},u0,u", coord_header(&g))?;
        for i in 0..g.len() {
            write_points(w, &g, i)?;
            writeln!(w, ",{:.12e},{:.12e}", u0.values()[i], u.values()[i])?;
        }
        Ok(())
    })?;
    let slack = cfg.physics.duration * f.sup_norm() + 1e-10 * (1.0 + u0.sup_norm());
    Ok(vec![
        Check::flag("evolve/finite", u.is_finite()),
        Check::at_most("evolve/max_excess", u.max() - u0.max(), slack),
        Check::at_most("evolve/min_deficit", u0.min() - u.min(), slack),
    ])
}

/// Builds the requested barrier, certifies it at `h` and `h/2`, and for
/// `B` and `U` also measures their listed properties.
pub fn barriers(cfg: &Config, out: &mut Outputs) -> Result<Vec<Check>> {
    let p = params(cfg)?;
    let tag: BarrierTag = cfg.barrier.tag.parse()?;
    let h = cfg.barrier.h;
    let center = match tag {
        BarrierTag::SphereBoundary => DEFAULT_SPHERE_POINT,
        _ => [0.0; 3],
    };
    let mut checks = Vec::new();
    let spec =
        match make_barrier(tag, &p, cfg.physics.alpha, center, h) {
            Ok(spec) => spec,
            Err(Error::NoCertificate(msg)) => {
                out.json(&format!("{}.cert.json", tag.name()), &serde_json::json!({
                "tag": tag, "params": p, "alpha": cfg.physics.alpha, "C_found": null, "pass": false, "error": msg,
            }))?;
                return Ok(vec![Check::flag(format!("{}/certificate", tag.name()), false)]);
            }
            Err(e) => return Err(e),
        };
    let cert = certify(&spec, h)?;
    out.json(&format!("{}.cert.json", tag.name()), &cert)?;
    checks.push(Check::at_most(
        format!("{}/max_operator", tag.name()),
        cert.max_operator_value,
        cert.reports[0].tolerance,
    ));
    checks.push(Check::flag(format!("{}/certificate", tag.name()), cert.pass));

    match tag {
        BarrierTag::Bfun => {
            let field = compute_bfun(&p, cfg.barrier.nx, cfg.barrier.my)?;
            let props = check_bfun_properties(&field)?;
            out.csv("bfun.csv", false, |w| field.write_csv(w))?;
            out.json("bfun_properties.json", &props)?;
            checks.push(Check::at_most("bfun/boundary_sup", props.boundary_sup, 1e-3));
            checks.push(Check::at_most("bfun/neumann_error", props.neumann_error, DTN_TOLERANCE));
            checks.push(Check::within("bfun/boundary_exponent", props.boundary_exponent, p.s(), 0.1));
            checks.push(Check::flag("bfun/max_at_origin", props.max_at_origin));
        }
        BarrierTag::CaloricU => {
            let res = caloric_residuals(&p, TimeCoefficient::Exact, cfg.barrier.levels)?;
            out.csv("caloric_residuals.csv", true, |w| {
                writeln!(w, "h,interior,boundary")?;
                for i in 0..res.h.len() {
                    writeln!(w, "{:.12e},{:.12e},{:.12e}", res.h[i], res.interior[i], res.boundary[i])?;
                }
                Ok(())
            })?;
            out.json("caloric_residuals.json", &res)?;
            checks.push(Check::at_least("caloric_U/interior_order", res.interior_order, 1.0));
            checks.push(Check::at_least("caloric_U/boundary_order", res.boundary_order, 1.0));
        }
        _ => {}
    }
    Ok(checks)
}

fn driftless(cfg: &Config, seed: u64) -> ExperimentConfig {
    ExperimentConfig { seed, delta: 0.0, forcing: 0.0, ..cfg.experiment() }
}

/// Flatness decay of driftless solutions from `samples` consecutive seeds.
pub fn flatness(cfg: &Config, out: &mut Outputs) -> Result<Vec<Check>> {
    let seeds: Vec<u64> = (0..cfg.flatness.samples as u64).map(|i| cfg.run.seed + i).collect();
    let reports = par_map(&seeds, cfg.run.jobs, |&seed| {
        let ec = driftless(cfg, seed);
        let u0 = smooth_data(&ec.grid()?, seed);
        flatness_experiment(&ec, &u0, &DriftField::Zero, &Forcing::Zero, false)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let bound = 1.0 + 2.0 * cfg.physics.s - cfg.flatness.slope_slack;
    let mut checks = Vec::new();
    for (seed, rep) in seeds.iter().zip(&reports) {
        out.csv(&format!("flatness_seed{seed}.csv"), false, |w| rep.write_csv(w))?;
        checks.push(Check::at_least(format!("flatness/seed{seed}/slope"), rep.slope().unwrap_or(f64::NAN), bound));
    }
    out.json("flatness.json", &reports)?;
    Ok(checks)
}

fn write_report(out: &mut Outputs, stem: &str, rep: &ExponentReport) -> Result<()> {
    out.json(&format!("{stem}.json"), rep)?;
    out.csv(&format!("{stem}.csv"), true, |w| rep.write_csv(w))?;
    if let Some(fl) = &rep.flatness {
        out.csv(&format!("{stem}_flatness.csv"), false, |w| fl.write_csv(w))?;
    }
    Ok(())
}

/// Exponent experiments: `theorem = 1` (drift in `C^{1-2s+alpha}`),
/// `2` (critical drift, swept over `deltas`) or `holder`.
pub fn exponent(cfg: &Config, out: &mut Outputs) -> Result<Vec<Check>> {
    let ec = cfg.experiment();
    match cfg.experiment.theorem.as_str() {
        "1" => {
            let rep = theorem1_experiment(&ec)?;
            write_report(out, "exponent", &rep)?;
            Ok(vec![Check::within("theorem1/exponent", rep.measured, rep.claimed, ec.exponent_tolerance)])
        }
        "2" => {
            let deltas = &cfg.experiment.deltas;
            let reports = par_map(deltas, cfg.run.jobs, |&delta| {
                theorem2_experiment(&ExperimentConfig { delta, alpha: 0.0, ..ec.clone() })
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            let mut checks = Vec::new();
            for (i, rep) in reports.iter().enumerate() {
                write_report(out, &format!("exponent_delta{i}"), rep)?;
            }
            out.csv("sweep.csv", false, |w| {
                writeln!(w, "delta,measured")?;
                for (d, r) in deltas.iter().zip(&reports) {
                    writeln!(w, "{d:.12e},{:.12e}", r.measured)?;
                }
                Ok(())
            })?;
            if let Some(last) = reports.last() {
                checks.push(Check::at_least(
                    "theorem2/exponent_at_smallest_delta",
                    last.measured,
                    1.0 - ec.exponent_tolerance,
                ));
            }
            let drop = reports.windows(2).map(|w| w[0].measured - w[1].measured).fold(0.0, f64::max);
            checks.push(Check::at_most("theorem2/largest_decrease", drop, SWEEP_NOISE));
            Ok(checks)
        }
        _ => {
            let rep = holder_estimate_experiment(&ec)?;
            write_report(out, "exponent", &rep)?;
            let mut checks = vec![Check::at_least("holder/space_exponent", rep.measured, rep.claimed)];
            if let Some(t) = rep.time_exponent {
                checks.push(Check::at_least("holder/time_exponent", t, rep.claimed));
            }
            Ok(checks)
        }
    }
}

/// Refinement order of a residual pair; exact residuals count as infinite
/// order.
fn order(coarse: f64, fine: f64) -> f64 {
    if fine <= EXACT {
        f64::INFINITY
    } else {
        (coarse / fine).log2()
    }
}

/// Built-in suites. Quick: special solutions and the heat semigroup. Full
/// adds DtN consistency, the expansion order and two certificates.
pub fn validate(cfg: &Config, out: &mut Outputs) -> Result<Vec<Check>> {
    let p = params(cfg)?;
    let mut checks = Vec::new();

    for sol in SpecialSolution::all([1.5, -0.5]) {
        let coarse = special_solution_residuals(sol, &p, 16, 32)?;
        let fine = special_solution_residuals(sol, &p, 32, 64)?;
        let name = sol.name();
        checks.push(Check::at_least(
            format!("special/{name}/pde_order"),
            order(coarse.pde_residual, fine.pde_residual),
            1.0,
        ));
        checks.push(Check::at_least(format!("special/{name}/dtn_order"), order(coarse.dtn_error, fine.dtn_error), 1.0));
    }

    let g = TorusGrid::new(cfg.grid.dim, 64.min(cfg.grid.n), cfg.grid.length)?;
    let mut rng = Rng::seeded(cfg.run.seed);
    let f = ScalarField::new(g, (0..g.len()).map(|_| rng.normal()).collect())?;
    let mut worst = 0.0f64;
    for (t1, t2) in [(0.1, 0.2), (0.5, 0.5), (1.0, 0.25), (0.0, 1.5)] {
        let twice = heat_propagate(&heat_propagate(&f, t1, &p, 0.0)?, t2, &p, 0.0)?;
        let once = heat_propagate(&f, t1 + t2, &p, 0.0)?;
        worst = worst.max(twice.sup_distance(&once) / f.sup_norm());
    }
    checks.push(Check::at_most("heat/semigroup_defect", worst, SEMIGROUP_TOLERANCE));

    if !cfg.run.quick {
        let g = TorusGrid::new(cfg.grid.dim, 128, cfg.grid.length)?;
        let y = default_ygrid(&g, &p, 256, TopBoundary::ModeDecay)?;
        let k1 = g.fundamental();
        let mut dtn = 0.0f64;
        for k in 1..=8 {
            let w = k as f64 * k1;
            let f = ScalarField::from_fn(g, |x| (w * x[0]).cos());
            let sol = solve_extension(&f, &p, &y, TopBoundary::ModeDecay)?;
            let want = frac_laplacian(&f, &p)?;
            dtn = dtn.max(sol.calibrated_dtn().sup_distance(&want) / want.sup_norm());
        }
        checks.push(Check::at_most("extension/dtn_modes_1_to_8", dtn, DTN_TOLERANCE));

        let f = smooth_data(&g, cfg.run.seed);
        let sol = solve_extension(&f, &p, &y, TopBoundary::ModeDecay)?;
        let ys: Vec<f64> = (0..8).map(|i| 0.5 * 0.5f64.powi(i)).collect();
        let solver = expansion_fit(&sol)?.slope.unwrap_or(f64::NAN);
        let poisson = expansion_fit_poisson(&f, &p, &ys)?.slope.unwrap_or(f64::NAN);
        checks.push(Check::within("extension/expansion_order_solver", solver, 2.0, 0.3));
        checks.push(Check::within("extension/expansion_order_poisson", poisson, 2.0, 0.3));

        let sphere = make_barrier(BarrierTag::SphereBoundary, &p, 0.5, DEFAULT_SPHERE_POINT, cfg.barrier.h)?;
        checks.push(Check::flag("barrier/sphere_boundary", certify(&sphere, cfg.barrier.h)?.pass));
        let flat = make_barrier(BarrierTag::FlatBoundary, &p, p.s(), [0.0; 3], cfg.barrier.h)?;
        checks.push(Check::flag("barrier/flat_boundary", certify(&flat, cfg.barrier.h)?.pass));
    }

    out.csv("validate.csv", false, |w| {
        writeln!(w, "check,value,bound,pass")?;
        for c in &checks {
            writeln!(w, "{},{:.12e},{},{}", c.name, c.value, c.bound, c.pass)?;
        }
        Ok(())
    })?;
    Ok(checks)
}

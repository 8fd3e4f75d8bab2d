use std::time::Instant;

use pepsgad::double_semion::{self as ds, DsModel};
use pepsgad::gadget::GadgetHamiltonian;
use pepsgad::lattice::{chain, HoneycombSpec, PepsGraph};
use pepsgad::linalg::{fit_loglog, hermitian_eig};
use pepsgad::peps::{peps_vector, PepsModel};
use pepsgad::sw_global::{
    compute_generators, ground_space, offdiag_residual_global, spectral_gap, verify_delta_tilde_independence,
    verify_parent_property, CoefficientTable, SwGlobalSeries,
};
use pepsgad::sw_local::{compare_global_local, compute_local_series, garbage_norm, MAX_LOCAL_DIM};
use pepsgad::toric::{self, ToricModel};
use pepsgad::{Error, Mat64, Result};
use serde_json::json;

use crate::config::ScenarioConfig;
use crate::report::{sweep_csv, Check, RunReport, SweepRow};

pub enum Scenario {
    DoubleSemion(Box<DsModel<f64>>),
    Toric(Box<ToricModel<f64>>),
    Generic(Box<GadgetHamiltonian<f64>>),
}

impl Scenario {
    pub fn gadget(&self) -> &GadgetHamiltonian<f64> {
        match self {
            Scenario::DoubleSemion(m) => &m.gadget,
            Scenario::Toric(m) => &m.gadget,
            Scenario::Generic(g) => g,
        }
    }

    pub fn encoded(&self) -> Result<Mat64> {
        match self {
            Scenario::DoubleSemion(m) => m.encoded_peps(),
            Scenario::Toric(m) => m.encoded_peps(),
            Scenario::Generic(g) => {
                let psi = peps_vector(&g.model)?;
                Ok(g.code_basis().adjoint() * Mat64::from_column_slice(psi.len(), 1, psi.as_slice()))
            }
        }
    }
}

pub fn build(cfg: &ScenarioConfig) -> Result<Scenario> {
    let rows = cfg.lattice.rows.unwrap_or(1);
    let cols = cfg.lattice.cols.unwrap_or(1);
    match cfg.model.as_str() {
        "double-semion" => {
            let spec = HoneycombSpec::torus(rows, cols);
            let m = match cfg.fixture.as_deref() {
                Some("corrupted") => ds::ds_mutation_fixture(&spec)?,
                _ => ds::build_ds_model(&spec)?,
            };
            Ok(Scenario::DoubleSemion(Box::new(m)))
        }
        "toric-code" => Ok(Scenario::Toric(Box::new(toric::build_toric_model(rows, cols)?))),
        "trivial" => {
            let model = PepsModel::identity_maps(chain(cfg.lattice.sites.unwrap_or(3))?, 2)?;
            Ok(Scenario::Generic(Box::new(GadgetHamiltonian::new(model))))
        }
        path => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidSpec(format!("{path}: {e}")))?;
            let v: serde_json::Value = serde_json::from_str(&text)?;
            let graph = PepsGraph::from_json(v.get("graph").ok_or_else(|| Error::InvalidSpec("model file: missing graph".into()))?)?;
            let model = PepsModel::from_maps_json(graph, &v)?;
            Ok(Scenario::Generic(Box::new(GadgetHamiltonian::new(model))))
        }
    }
}

fn timed<R>(rep: &mut RunReport, name: &str, f: impl FnOnce() -> R) -> R {
    let t = Instant::now();
    let r = f();
    rep.timings.push((name.into(), t.elapsed().as_secs_f64()));
    r
}

fn require_eps(cfg: &ScenarioConfig, min: usize, why: &str) -> Result<()> {
    if cfg.eps().len() < min {
        return Err(Error::InvalidArgument(format!("epsilons: {why} needs at least {min} value(s), got {}", cfg.eps().len())));
    }
    Ok(())
}

fn generators(rep: &mut RunReport, g: &GadgetHamiltonian<f64>, n: usize) -> Result<SwGlobalSeries<f64>> {
    timed(rep, &format!("generators_n{n}"), || compute_generators(g, n, &CoefficientTable::new(n + 1)))
}

fn quasi_injectivity(rep: &mut RunReport, cfg: &ScenarioConfig, sc: &Scenario) -> Result<()> {
    let q = timed(rep, "quasi_injectivity", || {
        ds::quasi_injectivity_suite(&sc.gadget().model, cfg.qi.max_single, cfg.qi.max_total, cfg.tolerances.qi)
    })?;
    rep.checks.push(Check::new("quasi_injectivity.failures", q.failures as f64, "==", 0.0));
    rep.checks.push(Check::new("quasi_injectivity.max_residual", q.max_residual, "<=", cfg.tolerances.qi));
    let failing: Vec<_> = q.entries.iter().filter(|e| !e.pass).take(10).collect();
    rep.add("quasi_injectivity", json!({ "n_specs": q.n_specs, "failures": q.failures, "max_residual": q.max_residual, "first_failures": failing }));
    Ok(())
}

pub fn verify(rep: &mut RunReport, cfg: &ScenarioConfig) -> Result<()> {
    require_eps(cfg, 1, "verify")?;
    let sc = timed(rep, "build", || build(cfg))?;
    let g = sc.gadget();
    quasi_injectivity(rep, cfg, &sc)?;
    let ns = cfg.n_star();
    let series = generators(rep, g, ns)?;
    for j in 1..=ns {
        let (pp, qq, anti) = series.generator_residuals(g, j);
        rep.checks.push(Check::new(&format!("generator.s{j}.max_residual"), pp.max(qq).max(anti), "<", cfg.tolerances.generator));
    }
    let dt = cfg.delta_tilde.unwrap_or(5.9);
    let di = timed(rep, "delta_tilde", || {
        verify_delta_tilde_independence(g, 2, &[dt, 2.0 * dt, 4.0 * dt], cfg.eps()[0], &CoefficientTable::new(3))
    })?;
    rep.checks.push(Check::new("effective.delta_tilde_spread", di.full_max_diff, "<", 1e-9));
    rep.add("delta_tilde", &di);
    let encoded = sc.encoded()?;
    let parent = timed(rep, "parent", || verify_parent_property(&series, &encoded, cfg.eps(), None));
    let dist = parent.projector_distances.iter().copied().fold(0.0, f64::max);
    rep.checks.push(Check::new("parent.projector_distance", dist, "<", cfg.tolerances.ground));
    if let Some(fit) = &parent.fit {
        rep.checks.push(Check::within("parent.gap_slope", fit.slope, ns as f64, cfg.tolerances.gap_slope));
    }
    rep.add("parent", &parent);
    Ok(())
}

pub fn sweep(rep: &mut RunReport, cfg: &ScenarioConfig) -> Result<String> {
    require_eps(cfg, 1, "sweep")?;
    if cfg.sweep.slopes {
        require_eps(cfg, 2, "a slope fit")?;
    }
    let sc = timed(rep, "build", || build(cfg))?;
    let g = sc.gadget();
    let (n, ns) = (cfg.n(), cfg.n_star());
    let series = generators(rep, g, n.max(ns))?;
    let gap_series = if ns == series.order { None } else { Some(generators(rep, g, ns)?) };
    let gap_series = gap_series.as_ref().unwrap_or(&series);
    let encoded = sc.encoded()?;
    let eps = cfg.eps();
    let fid = timed(rep, "fidelity", || ds::fidelity_sweep(g, &encoded, eps))?;
    let garbage = if g.dim() <= MAX_LOCAL_DIM {
        let ls = timed(rep, "local_series", || compute_local_series(g, n, n + 2))?;
        Some(garbage_norm(&ls, g, eps))
    } else {
        rep.add("garbage_norm_note", format!("local expansion skipped on a {}-dim register (limit {MAX_LOCAL_DIM})", g.dim()));
        None
    };
    let mut rows = Vec::new();
    for (i, &e) in eps.iter().enumerate() {
        let vals = hermitian_eig(&gap_series.effective(e)).0;
        rows.push(SweepRow {
            epsilon: e,
            gap: spectral_gap(&vals, 1e-8).unwrap_or(0.0),
            fidelity: fid.fidelities[i],
            offdiag_residual: offdiag_residual_global(g, &series, e, n),
            garbage_norm: garbage.as_ref().map_or(f64::NAN, |r| r.norms[i]),
        });
    }
    rep.checks.push(Check::flag("fidelity.monotone", fid.monotone));
    if cfg.sweep.slopes {
        let fit_of = |f: &dyn Fn(&SweepRow) -> f64| {
            let y: Vec<f64> = rows.iter().map(f).collect();
            y.iter().all(|v| *v > 0.0).then(|| fit_loglog(eps, &y))
        };
        let margin = cfg.tolerances.slope_margin;
        let gap_fit = fit_of(&|r| r.gap);
        rep.checks.push(Check::within("sweep.gap_slope", gap_fit.as_ref().map_or(f64::NAN, |f| f.slope), ns as f64, cfg.tolerances.gap_slope));
        let off_fit = fit_of(&|r| r.offdiag_residual);
        let off: Vec<f64> = rows.iter().map(|r| r.offdiag_residual).collect();
        rep.checks.push(residual_check("sweep.offdiag", &off, off_fit.as_ref().map_or(f64::NAN, |f| f.slope), n as f64 + margin));
        let mut slopes = json!({ "gap": gap_fit, "offdiag_residual": off_fit });
        if let Some(gr) = &garbage {
            rep.checks.push(residual_check("sweep.garbage", &gr.norms, gr.slope, n as f64 + margin));
            slopes["garbage_norm"] = json!({ "slope": gr.slope, "r_squared": gr.r_squared });
        }
        rep.add("slopes", slopes);
    }
    rep.add("rows", &rows);
    rep.add("fidelity", &fid);
    Ok(sweep_csv(&rows))
}

/// Slope bound on a residual series, or a rounding-level bound when the series vanishes.
fn residual_check(name: &str, values: &[f64], slope: f64, min_slope: f64) -> Check {
    let max = values.iter().copied().fold(0.0, f64::max);
    if max < 1e-12 {
        Check::new(&format!("{name}_max"), max, "<", 1e-12)
    } else {
        Check::new(&format!("{name}_slope"), slope, ">=", min_slope)
    }
}

fn sorted_spectrum(m: &Mat64) -> Vec<f64> {
    hermitian_eig(m).0
}

pub fn compare(rep: &mut RunReport, cfg: &ScenarioConfig) -> Result<()> {
    require_eps(cfg, 2, "compare")?;
    let sc = timed(rep, "build", || build(cfg))?;
    let g = sc.gadget();
    let n = cfg.n();
    let gs = generators(rep, g, n)?;
    let eps = cfg.eps();
    if cfg.compare.against == "global" {
        let dev: Vec<f64> = eps
            .iter()
            .map(|&e| {
                let a = sorted_spectrum(&gs.effective(e));
                let b = sorted_spectrum(&gs.effective(e));
                a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
            })
            .collect();
        let max = dev.iter().copied().fold(0.0, f64::max);
        rep.checks.push(Check::new("compare.max_deviation", max, "==", 0.0));
        rep.add("compare", json!({ "order": n, "epsilons": eps, "deviations": dev, "against": "global" }));
        return Ok(());
    }
    let ls = timed(rep, "local_series", || compute_local_series(g, n, n))?;
    let r = timed(rep, "compare", || compare_global_local(&gs, &ls, g, eps));
    if r.exact {
        let max = r.deviations.iter().copied().fold(0.0, f64::max);
        rep.checks.push(Check::new("compare.max_deviation", max, "<", 1e-10));
    } else {
        let slope = r.fit.as_ref().map_or(f64::NAN, |f| f.slope);
        rep.checks.push(Check::new("compare.deviation_slope", slope, ">=", n as f64 + cfg.tolerances.slope_margin));
    }
    rep.add("compare", &r);
    Ok(())
}

pub fn demo(rep: &mut RunReport, cfg: &ScenarioConfig) -> Result<()> {
    let sc = timed(rep, "build", || build(cfg))?;
    match &sc {
        Scenario::DoubleSemion(m) => demo_double_semion(rep, cfg, m),
        Scenario::Toric(m) => {
            let r = timed(rep, "crosscheck", || toric::toric_code_crosscheck::<f64>(m.rows, m.cols))?;
            rep.checks.push(Check::flag("toric.quasi_injectivity", r.quasi_injectivity.pass));
            rep.checks.push(Check::flag("toric.orders", r.orders.pass));
            rep.checks.push(Check::new("toric.fidelity_min_eps", r.fidelity.fidelities[0], ">=", 0.999));
            rep.checks.push(Check::flag("toric.fidelity_monotone", r.fidelity.monotone));
            rep.checks.push(Check::flag("toric.parent_ground_space", r.parent.ground_ok));
            let mut v = serde_json::to_value(&r)?;
            v["quasi_injectivity"]["entries"] = json!(null);
            rep.add("toric", v);
            Ok(())
        }
        Scenario::Generic(g) => {
            quasi_injectivity(rep, cfg, &sc)?;
            let series = generators(rep, g, cfg.n_star())?;
            let e = cfg.eps().first().copied().unwrap_or(0.02);
            let (vals, _, k) = ground_space(&series.effective(e), 1e-8);
            rep.add("effective_spectrum", json!({ "epsilon": e, "values": vals, "ground_dim": k }));
            Ok(())
        }
    }
}

fn demo_double_semion(rep: &mut RunReport, cfg: &ScenarioConfig, m: &DsModel<f64>) -> Result<()> {
    let spec = HoneycombSpec::torus(m.honeycomb.spec.rows, m.honeycomb.spec.cols);
    let orders = timed(rep, "orders", || ds::ds_effective_orders(m, 6))?;
    rep.checks.push(Check::flag("ds.order0_identity", orders.order0_ok));
    rep.checks.push(Check::flag("ds.order1_proportional", orders.order1_ok));
    rep.checks.push(Check::flag("ds.order2_consistency", orders.order2_ok));
    rep.checks.push(Check::flag("ds.orders3to5_no_new_terms", orders.intermediate_ok));
    rep.checks.push(Check::flag("ds.order6_plaquette", orders.plaquette_ok));
    rep.add("orders", &orders);
    let plaq = timed(rep, "plaquette", || ds::ds_plaquette_check::<f64>(&spec, 0.02))?;
    let dev = plaq.attempts.iter().filter(|a| a.pass).map(|a| a.deviation).next().unwrap_or(f64::INFINITY);
    rep.checks.push(Check::new("ds.plaquette_deviation", dev, "<", 1e-8));
    rep.checks.push(Check::new("ds.plaquette_commutator", plaq.commutator_norm, "<", 1e-10));
    rep.add("plaquette", &plaq);
    let mut eps: Vec<f64> = cfg.eps().to_vec();
    if !eps.contains(&0.01) {
        eps.push(0.01);
    }
    eps.sort_by(f64::total_cmp);
    let fid = timed(rep, "fidelity", || ds::ds_fidelity_sweep(m, &eps))?;
    rep.checks.push(Check::new("ds.fidelity_at_0.01", fid.fidelities[eps.iter().position(|&e| e == 0.01).unwrap()], ">=", 0.999));
    rep.checks.push(Check::flag("ds.fidelity_monotone", fid.monotone));
    rep.add("fidelity", &fid);
    let sym = timed(rep, "symmetry", || ds::ds_symmetry_suite(m, 0.05));
    let parity_exact = sym.iter().filter(|s| s.name.starts_with("edge-parity")).all(|s| s.exact);
    rep.checks.push(Check::flag("ds.edge_parity_exact", parity_exact));
    rep.add("symmetries", &sym);
    let hier = timed(rep, "hierarchy", || ds::ds_energy_hierarchy(m, 0.02, &[0.03, 0.02, 0.013]));
    rep.add("hierarchy", &hier);
    Ok(())
}

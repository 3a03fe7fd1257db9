use cournot_core::analysis::{
    analyze_duopoly, closed_grid, sweep_duopoly, sweep_mixed, sweep_multi, DecompositionReport, DuopolyPoint,
    MixedPoint, MultiMarket, MultiPoint, StateKey, SweepAxis, SweepRow,
};
use cournot_core::equilibrium::{
    check_assumption1, dphi_dd_duopoly, dphi_dd_linear_duopoly, phi_closed_form_linear, solve_duopoly,
    solve_phi_duopoly, Regime, SolveMethod,
};
use cournot_core::mixed_market::{
    dphi_dd_linear, mixed_closed_form_linear, mixed_expectations, solve_mixed, solve_mixed_iterative,
    MixedMarketParams,
};
use cournot_core::oracle::{central_difference, check_fixed_point, collusion_feasibility_scan, no_profitable_deviation};
use cournot_core::stochastic::{check_fosd, check_sosd, mixture_family};
use cournot_core::strategic_conduct::{
    collusion_value, collusion_welfare_cost, gamma_hat, info_sharing_profit_gain, info_sharing_welfare_gain, l_star,
    transfer_bounds, CollusionParams, GammaHat, SharingGain, TransferBounds,
};
use cournot_core::{DemandSpec, DuopolyParams, Error as ModelError, State};
use serde_json::{json, Value};

use crate::config::{Axis, Family, Market, RunConfig};
use crate::error::{model_exit_code, model_kind, CliError};
use crate::table::{num, Cell, Table};
use crate::{Common, Output};

/// A command failure, possibly with output that should still be written.
pub(crate) enum Failure {
    Before(CliError),
    After(Box<Output>, CliError),
}

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        Failure::Before(e)
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::Before(CliError::Model(e))
    }
}

type CmdResult = Result<Output, Failure>;

const DEFAULT_STEPS: usize = 21;
const DEFAULT_ORACLE_GRID: usize = 4000;
const FD_STEP: f64 = 1e-5;
const FD_TOLERANCE: f64 = 1e-6;

pub(crate) fn apply_overrides(cfg: &mut RunConfig, c: &Common) -> Result<(), CliError> {
    if c.s.is_some() || c.a.is_some() || c.b.is_some() {
        let base = cfg.demand;
        let s = c.s.or(base.map(|d| d.intercept()));
        let s = RunConfig::require(s, "demand.s")?;
        let (qa, qb) = match base {
            Some(DemandSpec::Quadratic { a, b, .. }) => (Some(a), Some(b)),
            _ => (None, None),
        };
        cfg.demand = Some(if c.a.is_some() || c.b.is_some() || qa.is_some() {
            let a = RunConfig::require(c.a.or(qa), "demand.a")?;
            let b = RunConfig::require(c.b.or(qb), "demand.b")?;
            DemandSpec::quadratic(s, a, b)
        } else {
            DemandSpec::linear(s)
        });
    }
    macro_rules! take {
        ($($field:ident <- $flag:ident),*) => { $( if c.$flag.is_some() { cfg.$field = c.$flag; } )* };
    }
    take!(beta <- beta, d <- d, low <- low, high <- high, cost <- cost, gamma <- gamma, n_plus_1 <- n);
    if c.format.is_some() {
        cfg.format = c.format;
    }
    if c.out.is_some() {
        cfg.out = c.out.clone();
    }
    Ok(())
}

fn req<T: Copy>(v: Option<T>, key: &str) -> Result<T, CliError> {
    RunConfig::require(v, key)
}

fn duopoly_template(cfg: &RunConfig) -> Result<DuopolyParams, CliError> {
    Ok(DuopolyParams {
        demand: cfg.demand()?,
        beta: req(cfg.beta, "beta")?,
        d: req(cfg.d, "d")?,
        low: req(cfg.low, "low")?,
        high: req(cfg.high, "high")?,
    })
}

fn mixed_template(cfg: &RunConfig) -> Result<MixedMarketParams, CliError> {
    Ok(MixedMarketParams {
        demand: cfg.demand()?,
        beta: req(cfg.beta, "beta")?,
        d: req(cfg.d, "d")?,
        low: req(cfg.low, "low")?,
        high: req(cfg.high, "high")?,
        cost: req(cfg.cost, "cost")?,
    })
}

fn multi_template(cfg: &RunConfig) -> Result<MultiMarket, CliError> {
    let Family::Mixture = cfg.family.unwrap_or(Family::Mixture);
    Ok(MultiMarket {
        demand: cfg.demand()?,
        n_plus_1: req(cfg.n_plus_1, "n_plus_1")?,
        beta: req(cfg.beta, "beta")?,
        d: req(cfg.d, "d")?,
        low: req(cfg.low, "low")?,
        high: req(cfg.high, "high")?,
    })
}

fn linear_intercept(cfg: &RunConfig) -> Result<f64, CliError> {
    match cfg.demand()? {
        DemandSpec::Linear { s } => Ok(s),
        DemandSpec::Quadratic { .. } => Err(CliError::Config("this analysis requires linear demand".into())),
    }
}

fn collusion_template(cfg: &RunConfig) -> Result<CollusionParams, CliError> {
    Ok(CollusionParams {
        s: linear_intercept(cfg)?,
        beta: req(cfg.beta, "beta")?,
        d: req(cfg.d, "d")?,
        low: req(cfg.low, "low")?,
        gamma: cfg.gamma.unwrap_or(0.0),
    })
}

/// Fills in the swept parameter from the grid when the config omits it.
fn seed_axis(cfg: &mut RunConfig, axis: Axis, first: f64) {
    let slot = match axis {
        Axis::D => &mut cfg.d,
        Axis::Beta => &mut cfg.beta,
        Axis::Low => &mut cfg.low,
        Axis::High => &mut cfg.high,
        Axis::Cost => &mut cfg.cost,
    };
    slot.get_or_insert(first);
}

fn sweep_grid(cfg: &RunConfig) -> Result<(Axis, Vec<f64>), CliError> {
    let s = cfg.sweep.unwrap_or_default();
    let axis = s.over.unwrap_or(Axis::D);
    let (from, to) = match axis {
        Axis::D => (s.from.unwrap_or(0.0), s.to.unwrap_or(1.0)),
        _ => (
            req(s.from, "sweep.from")?,
            req(s.to, "sweep.to")?,
        ),
    };
    let grid = closed_grid(from, to, s.steps.unwrap_or(DEFAULT_STEPS))?;
    Ok((axis, grid))
}

fn method_name(m: SolveMethod) -> &'static str {
    match m {
        SolveMethod::ClosedForm => "closed_form",
        SolveMethod::Bisection => "bisection",
    }
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Interior => "interior",
        Regime::NoCurtailment => "no_curtailment",
    }
}

fn demand_json(d: &DemandSpec) -> Value {
    match *d {
        DemandSpec::Linear { s } => json!({ "kind": "linear", "s": num(s) }),
        DemandSpec::Quadratic { s, a, b } => json!({ "kind": "quadratic", "s": num(s), "a": num(a), "b": num(b) }),
    }
}

fn decomposition_json(r: &DecompositionReport) -> Value {
    json!({ "wd": num(r.wd_term), "sc": num(r.sc_term), "total": num(r.total) })
}

fn state_name(k: StateKey) -> String {
    let c = |s: State| match s {
        State::Low => 'L',
        State::High => 'H',
    };
    match k {
        StateKey::Pair(a, b) => [c(a), c(b)].iter().collect(),
        StateKey::HighCount(n) => format!("S={n}"),
    }
}

fn dphi_dd(p: &DuopolyParams, phi: f64) -> f64 {
    match p.demand {
        DemandSpec::Linear { s } => dphi_dd_linear_duopoly(s, p.beta, p.d, p.low),
        DemandSpec::Quadratic { .. } => dphi_dd_duopoly(p, phi),
    }
}

// ---- market tables -------------------------------------------------------

const DUOPOLY_COLUMNS: &[&str] = &[
    "phi", "dphi_dd", "E_welfare", "E_price", "E_profit", "E_output", "dW_wd", "dW_sc", "dW_total", "dP_wd", "dP_sc",
    "dP_total", "dPi_wd", "dPi_sc", "dPi_total",
];

fn duopoly_cells(pt: &DuopolyPoint) -> Vec<Cell> {
    let e = &pt.expectations;
    let phi = pt.equilibrium.phi;
    let mut v = vec![
        Cell::Num(phi),
        Cell::Num(dphi_dd(&pt.params, phi)),
        Cell::Num(e.e_welfare),
        Cell::Num(e.e_price),
        Cell::Num(e.e_profit_per_firm),
        Cell::Num(e.e_total_output),
    ];
    for r in [pt.welfare, pt.price, pt.profit] {
        v.extend([Cell::Num(r.wd_term), Cell::Num(r.sc_term), Cell::Num(r.total)]);
    }
    v
}

const MULTI_COLUMNS: &[&str] = &["phi", "regime", "E_welfare", "E_price", "E_profit", "E_output"];

fn multi_cells(pt: &MultiPoint) -> Vec<Cell> {
    let e = &pt.expectations;
    vec![
        Cell::Num(pt.equilibrium.phi),
        Cell::text(regime_name(pt.equilibrium.regime)),
        Cell::Num(e.e_welfare),
        Cell::Num(e.e_price),
        Cell::Num(e.e_profit_per_firm),
        Cell::Num(e.e_total_output),
    ]
}

const MIXED_COLUMNS: &[&str] = &["phi", "x", "E_price", "E_welfare", "E_profit_wind", "E_profit_trad"];

fn mixed_cells(pt: &MixedPoint) -> Vec<Cell> {
    let e = &pt.expectations;
    vec![
        Cell::Num(pt.equilibrium.phi),
        Cell::Num(pt.equilibrium.x),
        Cell::Num(e.e_price),
        Cell::Num(e.e_welfare),
        Cell::Num(e.e_profit_wind),
        Cell::Num(e.e_profit_trad),
    ]
}

fn record(columns: &[&str], cells: Vec<Cell>, status: &str) -> Table {
    let mut cols: Vec<&str> = columns.to_vec();
    cols.push("status");
    let mut t = Table::new(&cols);
    let mut row = cells;
    row.push(Cell::text(status));
    t.push(row);
    t
}

/// Builds a sweep table and turns failed rows into an error carried after
/// the output.
fn sweep_table<T>(
    axis: SweepAxis,
    columns: &[&str],
    rows: &[SweepRow<T>],
    cells: impl Fn(&T) -> Vec<Cell>,
) -> CmdResult {
    let mut cols = vec![axis.name()];
    cols.extend_from_slice(columns);
    cols.push("status");
    let mut t = Table::new(&cols);
    let mut failed = Vec::new();
    for row in rows {
        let mut r = vec![Cell::Num(row.value)];
        match &row.outcome {
            Ok(pt) => {
                r.extend(cells(pt));
                r.push(Cell::text("ok"));
            }
            Err(e) => {
                r.extend(std::iter::repeat_n(Cell::Empty, columns.len()));
                r.push(Cell::text(model_kind(e)));
                failed.push((row.value, e.clone()));
            }
        }
        t.push(r);
    }
    rows_result(Output::Table(t), rows.len(), &failed, axis.name())
}

fn rows_result(out: Output, total: usize, failed: &[(f64, ModelError)], axis: &str) -> CmdResult {
    match failed.first() {
        None => Ok(out),
        Some((v, e)) => {
            let exit_code = failed.iter().map(|(_, e)| model_exit_code(e)).max().unwrap_or(3);
            Err(Failure::After(
                Box::new(out),
                CliError::Rows { exit_code, failed: failed.len(), total, first: format!("{axis}={v}: {e}") },
            ))
        }
    }
}

pub(crate) fn duopoly_solve(cfg: &RunConfig) -> CmdResult {
    cfg.check_market(Market::Duopoly)?;
    let p = duopoly_template(cfg)?;
    p.validate()?;
    let a1 = check_assumption1(&p);
    let pt = analyze_duopoly(&p)?;
    let eq = pt.equilibrium;
    let e = &pt.expectations;
    let states: Vec<Value> = e
        .per_state
        .iter()
        .map(|s| {
            json!({
                "state": state_name(s.key),
                "probability": num(s.probability),
                "Q": num(s.total_output),
                "price": num(s.price),
                "welfare": num(s.welfare),
                "profit_high": num(s.profit_high),
                "profit_low": num(s.profit_low),
            })
        })
        .collect();
    let json = json!({
        "market": "duopoly",
        "demand": demand_json(&p.demand),
        "beta": num(p.beta), "d": num(p.d), "L": num(p.low), "H": num(p.high),
        "assumption1": {
            "low_ok": a1.low_ok, "high_ok": a1.high_ok,
            "low_value": num(a1.low_value), "high_value": num(a1.high_value),
        },
        "phi": num(eq.phi),
        "method": method_name(eq.method),
        "regime": regime_name(eq.regime),
        "foc_residual": num(eq.foc_residual),
        "dphi_dd": num(dphi_dd(&p, eq.phi)),
        "expectations": {
            "E_welfare": num(e.e_welfare), "E_price": num(e.e_price),
            "E_profit": num(e.e_profit_per_firm), "E_output": num(e.e_total_output),
        },
        "states": states,
        "decomposition": {
            "welfare": decomposition_json(&pt.welfare),
            "price": decomposition_json(&pt.price),
            "profit": decomposition_json(&pt.profit),
        },
    });
    Ok(Output::Record { table: record(DUOPOLY_COLUMNS, duopoly_cells(&pt), "ok"), json })
}

pub(crate) fn multi_solve(cfg: &RunConfig) -> CmdResult {
    cfg.check_market(Market::Multi)?;
    let m = multi_template(cfg)?;
    let pt = m.analyze()?;
    let e = &pt.expectations;
    let states: Vec<Value> = e
        .per_state
        .iter()
        .map(|s| {
            json!({
                "high_count": s.highs,
                "probability": num(s.probability),
                "Q": num(s.total_output),
                "price": num(s.price),
                "welfare": num(s.welfare),
            })
        })
        .collect();
    let json = json!({
        "market": "multi",
        "family": "mixture",
        "demand": demand_json(&m.demand),
        "n_plus_1": m.n_plus_1,
        "beta": num(m.beta), "d": num(m.d), "L": num(m.low), "H": num(m.high),
        "count_probs": pt.distribution.count_probs().iter().map(|&p| num(p)).collect::<Vec<_>>(),
        "phi": num(pt.equilibrium.phi),
        "regime": regime_name(pt.equilibrium.regime),
        "foc_residual": num(pt.equilibrium.foc_residual),
        "expectations": {
            "E_welfare": num(e.e_welfare), "E_price": num(e.e_price),
            "E_profit": num(e.e_profit_per_firm), "E_output": num(e.e_total_output),
        },
        "states": states,
    });
    Ok(Output::Record { table: record(MULTI_COLUMNS, multi_cells(&pt), "ok"), json })
}

pub(crate) fn mixed_solve(cfg: &RunConfig) -> CmdResult {
    cfg.check_market(Market::Mixed)?;
    let p = mixed_template(cfg)?;
    p.validate()?;
    let eq = solve_mixed(&p)?;
    let e = mixed_expectations(&p, &eq);
    let a4 = eq.assumption4;
    let json = json!({
        "market": "mixed",
        "demand": demand_json(&p.demand),
        "beta": num(p.beta), "d": num(p.d), "L": num(p.low), "H": num(p.high), "c": num(p.cost),
        "phi": num(eq.phi),
        "x": num(eq.x),
        "x_clamped": eq.x_clamped,
        "method": method_name(eq.method),
        "wind_residual": num(eq.wind_residual),
        "trad_residual": num(eq.trad_residual),
        "assumption4": {
            "holds": a4.holds(), "cost_ok": a4.cost_ok, "low_ok": a4.low_ok, "high_ok": a4.high_ok,
        },
        "expectations": {
            "E_price": num(e.e_price), "E_welfare": num(e.e_welfare),
            "E_profit_wind": num(e.e_profit_wind), "E_profit_trad": num(e.e_profit_trad),
            "E_output": num(e.e_total_output),
        },
    });
    let pt = MixedPoint { params: p, equilibrium: eq, expectations: e };
    Ok(Output::Record { table: record(MIXED_COLUMNS, mixed_cells(&pt), "ok"), json })
}

pub(crate) fn market_sweep(cfg: &RunConfig, market: Market) -> CmdResult {
    cfg.check_market(market)?;
    let (axis, grid) = sweep_grid(cfg)?;
    let mut cfg = cfg.clone();
    seed_axis(&mut cfg, axis, grid[0]);
    let sa = SweepAxis::from(axis);
    match market {
        Market::Duopoly => {
            let rows = sweep_duopoly(&duopoly_template(&cfg)?, sa, &grid)?;
            sweep_table(sa, DUOPOLY_COLUMNS, &rows, duopoly_cells)
        }
        Market::Multi => {
            let rows = sweep_multi(&multi_template(&cfg)?, sa, &grid)?;
            sweep_table(sa, MULTI_COLUMNS, &rows, multi_cells)
        }
        Market::Mixed => {
            let rows = sweep_mixed(&mixed_template(&cfg)?, sa, &grid)?;
            sweep_table(sa, MIXED_COLUMNS, &rows, mixed_cells)
        }
    }
}

// ---- collusion -----------------------------------------------------------

struct CollusionEval {
    bounds: TransferBounds,
    gamma_hat: Option<GammaHat>,
    value: f64,
    value_net: f64,
    welfare_cost: f64,
}

fn evaluate_collusion(p: &CollusionParams) -> Result<CollusionEval, ModelError> {
    let bounds = transfer_bounds(p)?;
    let gamma_hat = if bounds.degenerate_full_correlation { None } else { Some(gamma_hat(p)?) };
    Ok(CollusionEval {
        bounds,
        gamma_hat,
        value: collusion_value(p, false)?,
        value_net: collusion_value(p, true)?,
        welfare_cost: collusion_welfare_cost(p)?,
    })
}

fn collusion_status(e: &CollusionEval) -> &'static str {
    if e.bounds.degenerate_full_correlation {
        "degenerate_full_correlation"
    } else {
        "ok"
    }
}

const COLLUSION_COLUMNS: &[&str] = &[
    "phi", "lb_irl", "ub_ic", "ub_irh", "feasible", "t_low", "t_high", "gamma_hat", "value", "value_net",
    "welfare_cost",
];

fn collusion_cells(e: &CollusionEval) -> Vec<Cell> {
    let b = &e.bounds;
    let (lo, hi) = match b.interval {
        Some((lo, hi)) => (Cell::Num(lo), Cell::Num(hi)),
        None => (Cell::Empty, Cell::Empty),
    };
    vec![
        Cell::Num(b.phi),
        Cell::Num(b.lb_irl),
        Cell::Num(b.ub_ic),
        Cell::Num(b.ub_irh),
        Cell::Bool(b.feasible),
        lo,
        hi,
        e.gamma_hat.map_or(Cell::Empty, |g| Cell::Num(g.value)),
        Cell::Num(e.value),
        Cell::Num(e.value_net),
        Cell::Num(e.welfare_cost),
    ]
}

pub(crate) fn collusion_assess(cfg: &RunConfig) -> CmdResult {
    let p = collusion_template(cfg)?;
    p.validate()?;
    let e = evaluate_collusion(&p)?;
    let b = &e.bounds;
    let json = json!({
        "s": num(p.s), "beta": num(p.beta), "d": num(p.d), "L": num(p.low), "gamma": num(p.gamma),
        "phi": num(b.phi),
        "bounds": { "lb_irl": num(b.lb_irl), "ub_ic": num(b.ub_ic), "ub_irh": num(b.ub_irh) },
        "feasible": b.feasible,
        "interval": b.interval.map(|(lo, hi)| vec![num(lo), num(hi)]),
        "degenerate_full_correlation": b.degenerate_full_correlation,
        "gamma_hat": e.gamma_hat.map(|g| json!({
            "value": num(g.value),
            "bisection": num(g.bisection),
            "binding": match g.binding {
                cournot_core::strategic_conduct::BindingBound::Ic => "ic",
                cournot_core::strategic_conduct::BindingBound::Irh => "irh",
            },
        })),
        "value": num(e.value),
        "value_net_of_penalty": num(e.value_net),
        "welfare_cost": num(e.welfare_cost),
    });
    Ok(Output::Record { table: record(COLLUSION_COLUMNS, collusion_cells(&e), collusion_status(&e)), json })
}

pub(crate) fn collusion_sweep(cfg: &RunConfig) -> CmdResult {
    let (axis, grid) = sweep_grid(cfg)?;
    let mut cfg = cfg.clone();
    seed_axis(&mut cfg, axis, grid[0]);
    let base = collusion_template(&cfg)?;
    let name = SweepAxis::from(axis).name();
    let mut cols = vec![name];
    cols.extend_from_slice(COLLUSION_COLUMNS);
    cols.push("status");
    let mut t = Table::new(&cols);
    let mut failed = Vec::new();
    for &v in &grid {
        let mut p = base;
        match axis {
            Axis::D => p.d = v,
            Axis::Beta => p.beta = v,
            Axis::Low => p.low = v,
            Axis::High | Axis::Cost => {
                return Err(CliError::Config(format!("collusion cannot be swept over {name}")).into())
            }
        }
        let mut row = vec![Cell::Num(v)];
        match evaluate_collusion(&p) {
            Ok(e) => {
                row.extend(collusion_cells(&e));
                row.push(Cell::text(collusion_status(&e)));
            }
            Err(err) => {
                row.extend(std::iter::repeat_n(Cell::Empty, COLLUSION_COLUMNS.len()));
                row.push(Cell::text(model_kind(&err)));
                failed.push((v, err));
            }
        }
        t.push(row);
    }
    rows_result(Output::Table(t), grid.len(), &failed, name)
}

// ---- information sharing -------------------------------------------------

fn gain_json(g: &SharingGain) -> Value {
    json!({ "enumeration": num(g.enumeration), "closed_form": g.closed_form.map(num) })
}

pub(crate) fn info_sharing_assess(cfg: &RunConfig) -> CmdResult {
    let s = linear_intercept(cfg)?;
    let beta = req(cfg.beta, "beta")?;
    let d = req(cfg.d, "d")?;
    let low = req(cfg.low, "low")?;
    let w = info_sharing_welfare_gain(s, beta, d, low)?;
    let g = info_sharing_profit_gain(s, beta, d, low)?;
    // Every quantity is homogeneous in (s, L), so the threshold scales with s.
    let threshold = s * l_star(beta, d)?;
    let json = json!({
        "s": num(s), "beta": num(beta), "d": num(d), "L": num(low),
        "welfare_gain": gain_json(&w),
        "profit_gain": gain_json(&g),
        "l_star": num(threshold),
        "sharing_raises_profit": g.value() > 0.0,
    });
    let table = record(
        &["welfare_gain", "profit_gain", "l_star"],
        vec![Cell::Num(w.value()), Cell::Num(g.value()), Cell::Num(threshold)],
        "ok",
    );
    Ok(Output::Record { table, json })
}

pub(crate) fn info_sharing_sweep(cfg: &RunConfig) -> CmdResult {
    let s = match cfg.demand {
        Some(_) => linear_intercept(cfg)?,
        None => 1.0,
    };
    let (axis, ds) = sweep_grid(cfg)?;
    if axis != Axis::D {
        return Err(CliError::Config("the information-sharing surface is swept over d".into()).into());
    }
    let bg = cfg.beta_grid.unwrap_or_default();
    let betas = closed_grid(bg.from.unwrap_or(0.1), bg.to.unwrap_or(0.9), bg.steps.unwrap_or(9))?;
    let mut cols = vec!["beta".to_owned()];
    cols.extend(ds.iter().map(|d| format!("d={}", crate::table::format_number(*d))));
    let mut t = Table::new(&cols);
    for &beta in &betas {
        let mut row = vec![Cell::Num(beta)];
        for &d in &ds {
            row.push(Cell::Num(s * l_star(beta, d)?));
        }
        t.push(row);
    }
    Ok(Output::Table(t))
}

// ---- validate ------------------------------------------------------------

pub(crate) fn validate(cfg: &RunConfig, d_points: usize) -> CmdResult {
    let Family::Mixture = cfg.family.unwrap_or(Family::Mixture);
    let n = req(cfg.n_plus_1, "n")?;
    let beta = req(cfg.beta, "beta")?;
    let ds = closed_grid(0.0, 1.0, d_points)?;
    let dists = ds.iter().map(|&d| mixture_family(n, beta, d)).collect::<Result<Vec<_>, _>>()?;
    let conds = dists.iter().map(|x| x.conditional_given_high()).collect::<Result<Vec<_>, _>>()?;

    let mut cols = vec!["test".to_owned(), "d".to_owned()];
    cols.extend(ds.iter().map(|d| format!("d={}", crate::table::format_number(*d))));
    let mut t = Table::new(&cols);
    let mut failures = 0usize;
    for test in ["fosd", "sosd"] {
        for (i, &di) in ds.iter().enumerate() {
            let mut row = vec![Cell::text(test), Cell::Num(di)];
            for j in 0..ds.len() {
                if j <= i {
                    row.push(Cell::Empty);
                    continue;
                }
                let ok = if test == "fosd" {
                    check_fosd(&conds[i], &conds[j])?
                } else {
                    check_sosd(dists[i].count_probs(), dists[j].count_probs())?
                };
                failures += usize::from(!ok);
                row.push(Cell::text(if ok { "pass" } else { "fail" }));
            }
            t.push(row);
        }
    }
    if failures > 0 {
        return Err(Failure::After(
            Box::new(Output::Table(t)),
            CliError::Check(format!("{failures} dominance comparisons failed")),
        ));
    }
    Ok(Output::Table(t))
}

// ---- verify --------------------------------------------------------------

struct Checks(Vec<Value>);

impl Checks {
    fn add(&mut self, name: &str, pass: bool, detail: Value) {
        self.0.push(json!({ "check": name, "pass": pass, "detail": detail }));
    }

    fn finish(self, header: Value) -> CmdResult {
        let failed: Vec<String> = self
            .0
            .iter()
            .filter(|c| c["pass"] == Value::Bool(false))
            .map(|c| c["check"].as_str().unwrap_or("").to_owned())
            .collect();
        let mut out = header;
        out["all_pass"] = Value::Bool(failed.is_empty());
        out["checks"] = Value::Array(self.0);
        if failed.is_empty() {
            Ok(Output::Json(out))
        } else {
            Err(Failure::After(Box::new(Output::Json(out)), CliError::Oracle(format!("failed: {}", failed.join(", ")))))
        }
    }
}

/// Interior point for central differences in `d`.
fn fd_point(d: f64) -> f64 {
    d.clamp(FD_STEP, 1.0 - FD_STEP)
}

pub(crate) fn verify(cfg: &RunConfig) -> CmdResult {
    match cfg.market.unwrap_or(Market::Duopoly) {
        Market::Duopoly => verify_duopoly(cfg),
        Market::Mixed => verify_mixed(cfg),
        Market::Multi => Err(CliError::Config("verify supports the duopoly and mixed markets".into()).into()),
    }
}

fn verify_duopoly(cfg: &RunConfig) -> CmdResult {
    let p = duopoly_template(cfg)?;
    p.validate()?;
    let grid_n = cfg.grid.unwrap_or(DEFAULT_ORACLE_GRID);
    let eq = solve_duopoly(&p)?;
    let mut checks = Checks(Vec::new());

    match check_fixed_point(&p, eq.phi, grid_n) {
        Ok(c) => checks.add(
            "fixed_point",
            true,
            json!({
                "phi": num(eq.phi), "phi_hat": num(c.grid.phi_hat), "grid_step": num(c.grid.grid_step),
                "converged": c.grid.converged, "cycle_width": num(c.grid.cycle_width),
                "iterations": c.grid.iterations,
            }),
        ),
        Err(ModelError::OracleDisagreement { difference, .. }) => {
            checks.add("fixed_point", false, json!({ "phi": num(eq.phi), "difference": num(difference) }))
        }
        Err(e) => return Err(e.into()),
    }

    let dev = no_profitable_deviation(&p, eq.phi, grid_n)?;
    checks.add(
        "no_profitable_deviation",
        dev.passes(),
        json!({
            "low_best": num(dev.low_best), "low_gain": num(dev.low_gain),
            "high_best": num(dev.high_best), "high_gain": num(dev.high_gain),
            "tolerance": num(dev.tolerance),
        }),
    );
    checks.add("low_state_produces_capacity", dev.low_best == p.low, json!({ "low_best": num(dev.low_best) }));

    if let DemandSpec::Linear { s } = p.demand {
        let bi = solve_phi_duopoly(&p)?.phi;
        let cf = phi_closed_form_linear(s, p.beta, p.d, p.low);
        checks.add("closed_form_vs_bisection", (bi - cf).abs() <= 1e-10, json!({ "difference": num(bi - cf) }));
    }

    let d0 = fd_point(p.d);
    let at = p.with_d(d0);
    let pt = analyze_duopoly(&at)?;
    let expect = |d: f64| -> Result<cournot_core::analysis::ExpectationReport, ModelError> {
        let q = p.with_d(d);
        Ok(cournot_core::analysis::expectations_duopoly(&q, &solve_duopoly(&q)?))
    };
    let mut fd_err = None;
    let mut fd = |f: fn(&cournot_core::analysis::ExpectationReport) -> f64| {
        central_difference(
            |d| match expect(d) {
                Ok(r) => f(&r),
                Err(e) => {
                    fd_err = Some(e);
                    f64::NAN
                }
            },
            d0,
            FD_STEP,
        )
    };
    let fw = fd(|r| r.e_welfare)?;
    let fp = fd(|r| r.e_price)?;
    let fpi = fd(|r| r.e_profit_per_firm)?;
    if let Some(e) = fd_err {
        return Err(e.into());
    }
    for (name, analytic, numeric) in [
        ("welfare_derivative", pt.welfare.total, fw),
        ("price_derivative", pt.price.total, fp),
        ("profit_derivative", pt.profit.total, fpi),
    ] {
        let diff = analytic - numeric;
        checks.add(
            name,
            diff.abs() <= FD_TOLERANCE,
            json!({ "d": num(d0), "analytic": num(analytic), "finite_difference": num(numeric) }),
        );
    }

    if let DemandSpec::Linear { s } = p.demand {
        let cp = CollusionParams { s, beta: p.beta, d: p.d, low: p.low, gamma: cfg.gamma.unwrap_or(0.0) };
        if p.d > 0.0 && cp.validate().is_ok() {
            let b = transfer_bounds(&cp)?;
            let scan = collusion_feasibility_scan(&cp, b.phi)?;
            let tol = 2.0 * scan.step;
            let pass = match (b.interval, scan.interval) {
                (Some((lo, hi)), Some((slo, shi))) => {
                    (lo.max(-1.0) - slo).abs() <= tol && (hi.min(2.0) - shi).abs() <= tol
                }
                (None, None) => true,
                // An interval narrower than the scan step can be missed.
                (Some((lo, hi)), None) => hi - lo < scan.step,
                (None, Some(_)) => false,
            };
            checks.add(
                "collusion_transfer_scan",
                pass,
                json!({
                    "bounds": b.interval.map(|(l, h)| vec![num(l), num(h)]),
                    "scan": scan.interval.map(|(l, h)| vec![num(l), num(h)]),
                    "step": num(scan.step),
                }),
            );
        }
    }

    checks.finish(json!({
        "market": "duopoly",
        "grid": grid_n,
        "phi": num(eq.phi),
    }))
}

fn verify_mixed(cfg: &RunConfig) -> CmdResult {
    let p = mixed_template(cfg)?;
    p.validate()?;
    let eq = solve_mixed(&p)?;
    let mut checks = Checks(Vec::new());
    checks.add(
        "first_order_conditions",
        eq.wind_residual.abs() <= 1e-10 && (eq.x_clamped || eq.trad_residual.abs() <= 1e-10),
        json!({ "wind_residual": num(eq.wind_residual), "trad_residual": num(eq.trad_residual) }),
    );
    if let DemandSpec::Linear { s } = p.demand {
        let it = solve_mixed_iterative(&p)?;
        let cf = mixed_closed_form_linear(s, p.cost, p.beta, p.d, p.low);
        if cf.x >= 0.0 {
            let ok = (it.phi - cf.phi).abs() <= 1e-10 && (it.x - cf.x).abs() <= 1e-10;
            checks.add(
                "iterative_vs_closed_form",
                ok,
                json!({ "phi_difference": num(it.phi - cf.phi), "x_difference": num(it.x - cf.x) }),
            );
            let d0 = fd_point(p.d);
            let mut err = None;
            let price = |d: f64| {
                let q = p.with_d(d);
                match solve_mixed(&q) {
                    Ok(e) => mixed_expectations(&q, &e).e_price,
                    Err(e) => {
                        err = Some(e);
                        f64::NAN
                    }
                }
            };
            let fd = central_difference(price, d0, FD_STEP)?;
            if let Some(e) = err {
                return Err(e.into());
            }
            let analytic = -p.beta * dphi_dd_linear(s, p.cost, p.beta, d0, p.low);
            checks.add(
                "price_slope",
                (fd - analytic).abs() <= FD_TOLERANCE,
                json!({ "d": num(d0), "analytic": num(analytic), "finite_difference": num(fd) }),
            );
        }
    }
    checks.finish(json!({ "market": "mixed", "phi": num(eq.phi), "x": num(eq.x) }))
}

use std::io::Write;

use bandit_bonus::continuous::{ContinuousModel, PolicyMap};
use bandit_bonus::discrete::{self, BonusSchedule, DiscreteModel, FixedPoint, Horizon, R1Law, Variant};
use bandit_bonus::format::g12;
use bandit_bonus::planner::{self, PlannerSolution};
use bandit_bonus::sim::{self, SimConfig, StepMode};
use serde_json::{json, Value};

use crate::config::{ContinuousSection, DiscreteSection, ModelConfig, RunConfig, SimMode};
use crate::error::CliError;

/// Files and summary results of one command, held in memory until it succeeds.
pub struct Artifacts {
    pub files: Vec<(&'static str, Vec<u8>)>,
    pub results: Value,
}

fn discrete_section(cfg: &RunConfig) -> Result<&DiscreteSection, CliError> {
    match &cfg.model {
        ModelConfig::Discrete(d) => Ok(d),
        ModelConfig::Continuous(_) => Err(CliError::Config("this command needs a [discrete] model section".into())),
    }
}

fn continuous_section(cfg: &RunConfig) -> Result<&ContinuousSection, CliError> {
    match &cfg.model {
        ModelConfig::Continuous(c) => Ok(c),
        ModelConfig::Discrete(_) => Err(CliError::Config("this command needs a [continuous] model section".into())),
    }
}

fn horizon(d: &DiscreteSection) -> Horizon {
    d.horizon.map_or(Horizon::Infinite, Horizon::Finite)
}

pub fn discrete_model(cfg: &RunConfig) -> Result<DiscreteModel<f64>, CliError> {
    let d = discrete_section(cfg)?;
    Ok(DiscreteModel::new(horizon(d), d.discount, d.er1, d.emax, d.r2, cfg.costs()?)?)
}

pub fn continuous_model(cfg: &RunConfig) -> Result<ContinuousModel<f64>, CliError> {
    let c = continuous_section(cfg)?;
    Ok(ContinuousModel::new(c.r, c.lambda, c.z, c.s, cfg.costs()?)?.with_large_cbar_assumed(c.assume_large_cbar))
}

fn law(cfg: &RunConfig) -> Result<R1Law, CliError> {
    cfg.r1_law()
        .ok_or_else(|| CliError::Config("this command needs an [r1] section with the risky-value law".into()))
}

fn fixed_point_json(fp: FixedPoint<f64>) -> Value {
    match fp {
        FixedPoint::Root(x) => json!(x),
        FixedPoint::NonPositivePremium => json!("non-positive premium"),
        FixedPoint::AboveCap => json!("above cost cap"),
    }
}

fn csv_buffer(f: impl FnOnce(&mut Vec<u8>) -> bandit_bonus::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn profit(m: &DiscreteModel<f64>, s: &BonusSchedule<f64>) -> Result<f64, CliError> {
    Ok(m.strategy_profit(s.strategy, s)?)
}

pub fn solve_discrete(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let m = discrete_model(cfg)?;
    let fc = m.fc_schedule();
    let pc = m.pc_schedule();
    let rows = match m.horizon {
        Horizon::Finite(t) => t,
        Horizon::Infinite => cfg.solver.periods,
    };
    let mut policy = Vec::new();
    writeln!(policy, "t,fc,pc")?;
    for t in 1..=rows {
        writeln!(policy, "{},{},{}", t, g12(fc.bonus_at(t)), g12(pc.bonus_at(t)))?;
    }
    let ir = if m.excludes_immediate_revelation() {
        Value::Null
    } else {
        json!(profit(&m, &BonusSchedule::immediate_revelation(m.horizon, m.costs.cbar()))?)
    };
    let (winner, best, best_profit) = m.optimal_strategy();
    let results = json!({
        "learning_premium": m.m(),
        "extended_premium": m.n(),
        "fixed_point": fixed_point_json(m.fixed_point_status(Variant::M)),
        "fixed_point_extended": fixed_point_json(m.fixed_point_status(Variant::N)),
        "fc_family": { "strategy": fc.strategy.as_str(), "first_bonus": fc.first(), "interior_clamped": fc.interior_clamped },
        "pc_family": { "strategy": pc.strategy.as_str(), "first_bonus": pc.first(), "interior_clamped": pc.interior_clamped },
        "profits": {
            "fc": profit(&m, &fc)?,
            "pc": profit(&m, &pc)?,
            "sa": m.r2 * m.annuity(),
            "nb": m.er1 * m.annuity(),
            "ir": ir,
        },
        "winner": winner.as_str(),
        "winner_first_bonus": best.first(),
        "winner_profit": best_profit,
    });
    Ok(Artifacts { files: vec![("policy.csv", policy)], results })
}

pub fn sweep(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let base = discrete_model(cfg)?;
    let law = law(cfg)?;
    let s = &cfg.sweep;
    let n = s.r2_points;
    let grid: Vec<f64> = (0..n)
        .map(|i| s.r2_min + (s.r2_max - s.r2_min) * i as f64 / (n - 1) as f64)
        .collect();
    let rows = discrete::sweep_r2(&base, &law, &grid)?;
    let switches: Vec<Value> = rows
        .windows(2)
        .filter(|w| w[0].winner != w[1].winner)
        .map(|w| json!({ "from": w[0].winner.as_str(), "to": w[1].winner.as_str(), "r2_low": w[0].r2, "r2_high": w[1].r2 }))
        .collect();
    let buf = csv_buffer(|b| discrete::write_sweep_csv(&rows, b))?;
    Ok(Artifacts {
        files: vec![("sweep.csv", buf)],
        results: json!({ "mean_risky_value": law.mean(), "points": rows.len(), "winner_switches": switches }),
    })
}

fn policy_json(p: &PolicyMap<f64>) -> Value {
    json!({
        "alpha_sa_pc": p.alpha_sa_pc,
        "alpha_pc_fc": p.alpha_pc_fc,
        "alpha_fc_nb": p.alpha_fc_nb,
        "alpha_pc_ir": p.alpha_pc_ir,
        "alpha_ir_fc": p.alpha_ir_fc,
    })
}

pub fn solve_continuous(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let m = continuous_model(cfg)?;
    let p = m.solve(cfg.solver.grid_step)?;
    let curve = p.export_curve(cfg.solver.export_points);
    let buf = csv_buffer(|b| curve.write_csv(b))?;
    let naive = m.naive_fc_boundary().ok();
    let results = json!({
        "ir_admissible": m.ir_admissible(),
        "cost_cap_assumed_large": m.assume_large_cbar,
        "cbar_bound": m.cbar_bound(),
        "cutoffs": policy_json(&p),
        "ir_only_cutoff": m.ir_only_cutoff(),
        "naive_fc_boundary": naive.map(|(a, b)| json!({ "alpha": a, "bonus": b })),
        "fc_nb_tangency": m.fc_nb_tangency(&p),
        "safe_value": p.safe_value(),
        "max_bonus": p.curve.bonuses.iter().copied().fold(0.0, f64::max),
    });
    Ok(Artifacts { files: vec![("policy.csv", buf)], results })
}

fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn planner_csv(sol: &PlannerSolution<f64>, points: usize) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    writeln!(buf, "alpha,W,c1,c2,report_prob")?;
    for a in uniform_grid(0.001, 0.999, points) {
        let (c1, c2) = sol.cutoffs_at(a);
        writeln!(
            buf,
            "{},{},{},{},{}",
            g12(a),
            g12(sol.value_at(a)),
            g12(c1),
            g12(c2),
            g12(sol.reporting_probability(a))
        )?;
    }
    Ok(buf)
}

pub fn solve_planner(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let m = continuous_model(cfg)?;
    let sol = m.solve_planner(cfg.solver.grid_step)?;
    let policy = planner_csv(&sol, cfg.solver.export_points)?;
    let mc = &cfg.mechanism;
    let alphas = uniform_grid(0.0, 1.0, mc.alpha_points + 2)[1..=mc.alpha_points].to_vec();
    let costs = uniform_grid(0.0, m.costs.cbar(), mc.cost_points);
    let mechanism = csv_buffer(|b| planner::write_mechanism_csv(&sol, &alphas, &costs, b))?;
    let results = json!({
        "planner_cutoffs": {
            "alpha_sa_pc": sol.alpha_sa_pc,
            "alpha_pc_fc": sol.alpha_pc_fc,
            "alpha_fc_nb": sol.alpha_fc_nb,
        },
    });
    Ok(Artifacts { files: vec![("policy.csv", policy), ("mechanism.csv", mechanism)], results })
}

pub fn compare_welfare(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let m = continuous_model(cfg)?;
    let h = cfg.solver.grid_step;
    let policy = m.solve(h)?;
    let sol = m.solve_planner(h)?;
    let surplus = policy.social_surplus(h)?;
    let grid = uniform_grid(0.0, 1.0, cfg.welfare.points + 2)[1..=cfg.welfare.points].to_vec();
    let rows = planner::compare_welfare(&policy, &sol, &surplus, &grid)?;
    let buf = csv_buffer(|b| planner::write_welfare_csv(&rows, b))?;
    let probs = planner::reporting_probabilities(&policy, &sol, &grid);
    let min_gap = probs.iter().map(|(_, w, p)| w - p).fold(f64::INFINITY, f64::min);
    let results = json!({
        "monopolist_cutoffs": policy_json(&policy),
        "planner_cutoffs": {
            "alpha_sa_pc": sol.alpha_sa_pc,
            "alpha_pc_fc": sol.alpha_pc_fc,
            "alpha_fc_nb": sol.alpha_fc_nb,
        },
        "no_bonus_switch_margin": sol.alpha_fc_nb - policy.alpha_fc_nb,
        "min_reporting_probability_gap": if min_gap.is_finite() { json!(min_gap) } else { Value::Null },
        "points": rows.len(),
    });
    Ok(Artifacts { files: vec![("welfare.csv", buf)], results })
}

fn sim_config(cfg: &RunConfig) -> SimConfig {
    let s = &cfg.sim;
    SimConfig {
        dt: s.dt,
        horizon: s.horizon,
        n_paths: s.n_paths,
        master_seed: s.seed,
        alpha0: s.alpha0,
        threads: s.threads,
        mode: match s.mode {
            SimMode::SkipAhead => StepMode::SkipAhead,
            SimMode::PerPeriod => StepMode::PerPeriod,
        },
    }
}

fn sim_json(r: &sim::SimResult, analytic: f64) -> Value {
    json!({
        "mean": r.mean,
        "std_error": r.std_error,
        "n_paths": r.n_paths,
        "analytic": analytic,
        "z_score": if r.std_error > 0.0 { json!((r.mean - analytic) / r.std_error) } else { Value::Null },
        "good_state_fraction": r.good_state_fraction,
        "stop_time": {
            "mean": r.stop_time_stats.mean,
            "q10": r.stop_time_stats.q10,
            "q50": r.stop_time_stats.q50,
            "q90": r.stop_time_stats.q90,
        },
    })
}

pub fn simulate(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let sc = sim_config(cfg);
    match &cfg.model {
        ModelConfig::Continuous(_) => {
            let m = continuous_model(cfg)?;
            let p = m.solve(cfg.solver.grid_step)?;
            let res = sim::simulate_continuous(&p, &sc)?;
            let (strategy, bonus, pi) = p.policy_at(sc.alpha0)?;
            let mut files = Vec::new();
            if cfg.sim.trace_paths > 0 {
                let rows = sim::trace_continuous(&p, &sc, cfg.sim.trace_paths)?;
                files.push(("trace.csv", csv_buffer(|b| sim::write_trace_csv(&rows, b))?));
            }
            let results = json!({
                "alpha0": sc.alpha0,
                "strategy": strategy.as_str(),
                "bonus": bonus,
                "simulation": sim_json(&res, pi),
            });
            Ok(Artifacts { files, results })
        }
        ModelConfig::Discrete(_) => {
            let m = discrete_model(cfg)?;
            let law = law(cfg)?;
            let (strategy, schedule, pi) = m.optimal_strategy();
            let res = sim::simulate_discrete(&m, &schedule, &law, &sc)?;
            let results = json!({
                "strategy": strategy.as_str(),
                "first_bonus": schedule.first(),
                "simulation": sim_json(&res, pi),
            });
            Ok(Artifacts { files: Vec::new(), results })
        }
    }
}

/// Dry-run report of the configuration's assumptions and regime.
pub fn validate(cfg: &RunConfig) -> Result<String, CliError> {
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    let costs = cfg.costs()?;
    line(format!("cost law: {:?}, cbar = {}", costs.kind(), g12(costs.cbar())));
    match &cfg.model {
        ModelConfig::Continuous(_) => {
            let m = continuous_model(cfg)?;
            line(format!("g = lambda*z = {}, s = {}: g > s > 0 holds", g12(m.g()), g12(m.safe_flow)));
            line(format!("sufficient cost-cap bound = {}", g12(m.cbar_bound())));
            line(format!("ir_admissible = {}", m.ir_admissible()));
            if m.assume_large_cbar {
                line("cost cap assumed large (bound not enforced)".into());
            }
            if m.ir_admissible() {
                line("regime: large cost cap, interior bonuses".into());
            } else {
                line("regime: immediate revelation path selected".into());
            }
            line(format!(
                "closed-form cutoffs: alpha_sa_pc = {}, alpha_pc_fc = {}, ir_only = {}",
                g12(m.cutoff_sa_pc()),
                g12(m.cutoff_pc_fc()),
                g12(m.ir_only_cutoff())
            ));
            sim_config(cfg).validate(m.discount_rate, m.arrival_rate)?;
        }
        ModelConfig::Discrete(d) => {
            let m = discrete_model(cfg)?;
            line(format!(
                "horizon = {}, discount = {}, E R1 = {}, E max = {}, R2 = {}",
                d.horizon.map_or("inf".to_string(), |t| t.to_string()),
                g12(m.discount),
                g12(m.er1),
                g12(m.emax),
                g12(m.r2)
            ));
            line(format!("learning premium M = {}, extended premium N = {}", g12(m.m()), g12(m.n())));
            line(format!("immediate revelation excluded = {}", m.excludes_immediate_revelation()));
            let fp = |v| match m.fixed_point_status(v) {
                FixedPoint::Root(x) => g12(x),
                FixedPoint::NonPositivePremium => "none (non-positive premium)".into(),
                FixedPoint::AboveCap => "none (above cost cap)".into(),
            };
            line(format!("stationary bonus = {}, extended = {}", fp(Variant::M), fp(Variant::N)));
            if let Some(law) = cfg.r1_law() {
                law.validate()?;
                line(format!("risky-value law {law:?}, mean {}", g12(law.mean())));
            }
        }
    }
    cfg.check()?;
    line("configuration valid".into());
    Ok(out)
}

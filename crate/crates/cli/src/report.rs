//! Command dispatch and output serialization.

use std::fmt::Write as _;

use herd_core::centrality::{self, ClassicMeasure, HerdabilityCentralityReport};
use herd_core::sim::{self, Trajectory};
use herd_core::{dynamics, energy, herd, qp, structural, Error, Graph};
use serde::Serialize;
use serde_json::{json, Value};

use crate::{Command, Format, RunConfig};

pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_numerical() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    tool: &'static str,
    version: &'static str,
    config: Value,
    tolerances: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    notice: Option<String>,
    result: &'a Value,
}

fn tolerances() -> Value {
    json!({
        "hurwitz": dynamics::HURWITZ_TOL,
        "lyapunov_relative_residual": dynamics::LYAPUNOV_RESIDUAL_TOL,
        "gramian_range": energy::RANGE_TOL,
        "qp_infeasible_hull_distance": qp::INFEASIBLE_TOL,
        "hc_argmin": centrality::ARGMIN_TOL,
        "herding_margin": sim::MARGIN_TOL,
        "energy_ratio": [sim::ENERGY_RATIO_RANGE.0, sim::ENERGY_RATIO_RANGE.1],
    })
}

fn config_echo(cfg: &RunConfig, n: usize) -> Value {
    let mut opts = serde_json::to_value(&cfg.cli.opts).unwrap_or(Value::Null);
    if let Value::Object(map) = &mut opts {
        map.remove("jobs");
        map.insert("rank_cutoff_effective".into(), json!(cfg.policy.relative(n)));
        map.insert(
            "katz_alpha".into(),
            cfg.classic.katz_alpha.map_or(json!("0.85/lambda_max"), |a| json!(a)),
        );
    }
    json!({
        "command": serde_json::to_value(&cfg.cli.command).unwrap_or(Value::Null),
        "options": opts,
    })
}

fn envelope(cfg: &RunConfig, n: usize, notice: Option<String>, result: &Value) -> String {
    let env = Envelope {
        tool: "herd",
        version: env!("CARGO_PKG_VERSION"),
        config: config_echo(cfg, n),
        tolerances: tolerances(),
        notice,
        result,
    };
    let mut s = serde_json::to_string_pretty(&env).expect("report serializes");
    s.push('\n');
    s
}

fn labels(g: &Graph, ids: &[usize]) -> Vec<String> {
    ids.iter().map(|&i| g.label(i).to_string()).collect()
}

/// Largest SCC of a graph that is not strongly connected, plus a notice.
fn scc_view(g: &Graph) -> Result<(Graph, Option<String>), Failure> {
    if g.is_strongly_connected() {
        return Ok((g.clone(), None));
    }
    let sub = g.largest_scc()?;
    let notice = format!(
        "input is not strongly connected; using its largest SCC ({} of {} nodes)",
        sub.node_count(),
        g.node_count()
    );
    eprintln!("notice: {notice}");
    Ok((sub, Some(notice)))
}

pub fn run(cfg: &RunConfig) -> Result<String, Failure> {
    let g = cfg.load_graph()?;
    if g.node_count() == 0 {
        return Err(Failure::input("graph has no nodes"));
    }
    let csv = cfg.cli.opts.format == Format::Csv;
    let d = cfg.cli.opts.d;
    match &cfg.cli.command {
        Command::Check { inputs, .. } => {
            let ids = inputs.iter().map(|l| g.id_of(l)).collect::<Result<Vec<_>, _>>()?;
            let check = herd::is_herdable(&g, &ids)?;
            if csv {
                let mut hit = vec![true; g.node_count()];
                for &u in &check.unreached {
                    hit[u] = false;
                }
                let mut s = String::from("node,reached\n");
                for (u, h) in hit.iter().enumerate() {
                    let _ = writeln!(s, "{},{}", g.label(u), h);
                }
                return Ok(s);
            }
            let result = json!({
                "herdable": check.herdable,
                "inputs": labels(&g, &ids),
                "unreached": labels(&g, &check.unreached),
            });
            Ok(envelope(cfg, g.node_count(), None, &result))
        }
        Command::Cover { .. } => {
            let c = herd::herding_cover(&g, cfg.tie_break);
            if csv {
                let mut s = String::from("node\n");
                for l in labels(&g, &c.herding_nodes) {
                    let _ = writeln!(s, "{l}");
                }
                return Ok(s);
            }
            let result = json!({
                "N_H": c.herding_count,
                "N_r": c.root_count,
                "N_w": c.weak_count,
                "n_H": c.herding_fraction,
                "n_w": c.per_weak_component,
                "herding_nodes": labels(&g, &c.herding_nodes),
            });
            Ok(envelope(cfg, g.node_count(), None, &result))
        }
        Command::Drivers { .. } => {
            let r = structural::driver_node_count(&g);
            if csv {
                let mut s = String::from("node\n");
                for l in labels(&g, &r.driver_nodes) {
                    let _ = writeln!(s, "{l}");
                }
                return Ok(s);
            }
            let result = json!({
                "N_c": r.driver_count,
                "n_c": r.driver_fraction,
                "matching_size": r.matching_size,
                "driver_nodes": labels(&g, &r.driver_nodes),
            });
            Ok(envelope(cfg, g.node_count(), None, &result))
        }
        Command::Table { .. } => {
            let c = herd::herding_cover(&g, cfg.tie_break);
            let r = structural::driver_node_count(&g);
            let n = g.node_count();
            if csv {
                return Ok(format!(
                    "N,L,directed,n_w,n_H,n_c\n{},{},{},{},{},{}\n",
                    n,
                    g.edge_count(),
                    g.is_directed(),
                    c.per_weak_component,
                    c.herding_fraction,
                    r.driver_fraction
                ));
            }
            let result = json!({
                "N": n,
                "L": g.edge_count(),
                "directed": g.is_directed(),
                "n_w": c.per_weak_component,
                "n_H": c.herding_fraction,
                "n_c": r.driver_fraction,
                "N_w": c.weak_count,
                "N_H": c.herding_count,
                "N_c": r.driver_count,
            });
            Ok(envelope(cfg, n, None, &result))
        }
        Command::Centrality { measure, .. } => {
            let (sub, notice) = scc_view(&g)?;
            match measure.classic() {
                Some(m) => classic_one(cfg, &sub, notice, m, csv),
                None => {
                    let herd = centrality::herdability_centrality(&sub, d, cfg.policy)?;
                    if csv {
                        let mut s = String::from("node,score\n");
                        for (i, h) in herd.centrality.iter().enumerate() {
                            let _ = writeln!(s, "{},{}", sub.label(i), fmt_opt(*h));
                        }
                        return Ok(s);
                    }
                    let hub = centrality::hub_degree_from_report(&sub, &herd, cfg.cli.opts.top_fraction)?;
                    let result = json!({
                        "measure": "hc",
                        "nodes": hc_rows(&sub, &herd),
                        "argmin": labels(&sub, &herd.argmin),
                        "d": herd.d,
                        "horizon": herd.horizon,
                        "partial": herd.partial,
                        "errors": herd.errors.iter().map(|(i, e)| json!({"node": sub.label(*i), "error": e})).collect::<Vec<_>>(),
                        "hub_degree": {
                            "top_fraction": hub.top_fraction,
                            "top_nodes": labels(&sub, &hub.top_nodes),
                            "overall_avg_degree": hub.overall_avg_degree,
                            "top_avg_degree": hub.top_avg_degree,
                        },
                    });
                    if herd.energies.iter().all(Option::is_none) {
                        return Err(Failure {
                            code: 2,
                            message: "every per-node energy solve failed".into(),
                        });
                    }
                    Ok(envelope(cfg, sub.node_count(), notice, &result))
                }
            }
        }
        Command::Classic { .. } => {
            let (sub, notice) = scc_view(&g)?;
            let mut reports = Vec::new();
            for m in ClassicMeasure::ALL {
                reports.push(centrality::classic_centrality(&sub, m, cfg.classic)?);
            }
            if csv {
                let mut s = String::from("node");
                for r in &reports {
                    let _ = write!(s, ",{}", r.measure.name());
                }
                s.push('\n');
                for i in 0..sub.node_count() {
                    s.push_str(sub.label(i));
                    for r in &reports {
                        let _ = write!(s, ",{}", r.scores[i]);
                    }
                    s.push('\n');
                }
                return Ok(s);
            }
            let measures: Vec<Value> = reports.iter().map(|r| classic_json(&sub, r)).collect();
            let result = json!({ "measures": measures });
            Ok(envelope(cfg, sub.node_count(), notice, &result))
        }
        Command::Compare { .. } => {
            let (sub, notice) = scc_view(&g)?;
            let o = centrality::overlap_report(&sub, d, cfg.policy, cfg.classic)?;
            if csv {
                let mut s = String::from("measure,best_nodes,hc_max,hc_min,attains_one\n");
                for e in &o.entries {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{}",
                        e.measure.name(),
                        labels(&sub, &e.best_nodes).join(" "),
                        num(e.hc_max),
                        num(e.hc_min),
                        e.attains_one
                    );
                }
                return Ok(s);
            }
            let entries: Vec<Value> = o
                .entries
                .iter()
                .map(|e| {
                    json!({
                        "measure": e.measure.name(),
                        "best_nodes": labels(&sub, &e.best_nodes),
                        "hc_max": e.hc_max,
                        "hc_min": e.hc_min,
                        "attains_one": e.attains_one,
                    })
                })
                .collect();
            let result = json!({
                "entries": entries,
                "any_attains_one": o.any_attains_one,
                "hc_argmin": labels(&sub, &o.herdability.argmin),
                "d": d,
            });
            Ok(envelope(cfg, sub.node_count(), notice, &result))
        }
        Command::Simulate { node, tf, h, out, .. } => {
            let (sub, notice) = scc_view(&g)?;
            let id = sub.id_of(node).map_err(|_| {
                Failure::input(format!("node {node:?} is not in the analysed (strongly connected) graph"))
            })?;
            let tf = parse_auto("--tf", tf)?;
            let h = parse_auto("--h", h)?;
            let (rec, traj) = sim::verify_herding(&sub, id, d, tf, h, cfg.policy)?;
            let traj_csv = trajectory_csv(&sub, &traj);
            if let Some(path) = out {
                std::fs::write(path, &traj_csv)
                    .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
            }
            if csv {
                return Ok(traj_csv);
            }
            let mut result = serde_json::to_value(&rec).expect("record serializes");
            if let Value::Object(map) = &mut result {
                map.insert("herding_node".into(), json!(sub.label(id)));
                let terminal: serde_json::Map<String, Value> = rec
                    .terminal_state
                    .iter()
                    .enumerate()
                    .map(|(i, x)| (sub.label(i).to_string(), json!(x)))
                    .collect();
                map.insert("terminal_state".into(), Value::Object(terminal));
            }
            Ok(envelope(cfg, sub.node_count(), notice, &result))
        }
    }
}

fn parse_auto(flag: &str, s: &str) -> Result<Option<f64>, Failure> {
    if s == "auto" {
        return Ok(None);
    }
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(Some(v)),
        _ => Err(Failure::input(format!("{flag} expects a positive number or \"auto\", got {s:?}"))),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NaN".to_string(), num)
}

/// Shortest round-trip form, switching to exponent notation for very small
/// or very large magnitudes.
fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn hc_rows(g: &Graph, r: &HerdabilityCentralityReport) -> Vec<Value> {
    (0..g.node_count())
        .map(|i| {
            json!({
                "node": g.label(i),
                "score": r.centrality[i],
                "energy": r.energies[i],
            })
        })
        .collect()
}

fn classic_one(
    cfg: &RunConfig,
    g: &Graph,
    notice: Option<String>,
    m: ClassicMeasure,
    csv: bool,
) -> Result<String, Failure> {
    let r = centrality::classic_centrality(g, m, cfg.classic)?;
    if csv {
        let mut s = String::from("node,score\n");
        for (i, v) in r.scores.iter().enumerate() {
            let _ = writeln!(s, "{},{}", g.label(i), num(*v));
        }
        return Ok(s);
    }
    Ok(envelope(cfg, g.node_count(), notice, &classic_json(g, &r)))
}

fn classic_json(g: &Graph, r: &centrality::ClassicCentralityReport) -> Value {
    let best = centrality::best_nodes(r.measure, &r.scores);
    json!({
        "measure": r.measure.name(),
        "katz_alpha": r.katz_alpha,
        "nodes": r.scores.iter().enumerate().map(|(i, s)| json!({"node": g.label(i), "score": s})).collect::<Vec<_>>(),
        "best_nodes": labels(g, &best),
    })
}

fn trajectory_csv(g: &Graph, traj: &Trajectory) -> String {
    let mut s = String::from("t");
    for i in 0..g.node_count() {
        let _ = write!(s, ",x_{}", g.label(i));
    }
    s.push_str(",u\n");
    for ((t, x), u) in traj.times.iter().zip(&traj.states).zip(&traj.inputs) {
        let _ = write!(s, "{}", num(*t));
        for v in x.iter() {
            let _ = write!(s, ",{}", num(*v));
        }
        let _ = writeln!(s, ",{}", num(u[0]));
    }
    s
}

use serde_json::{json, Value};

use cascade_core::blockdp::{classify_clique, dp_solve, star_thresholds};
use cascade_core::engine::{brute_force_from, monte_carlo_performance, solve_explicit, Performance};
use cascade_core::experiments::{
    council_bound_check, fixed_neighbor_witness_search, indifference_margin, recover_fig4, sweep,
    verify_monotone_p, verify_nonadaptive_bound, SweepFamily, SweepSpec,
};
use cascade_core::graphs::{self, Blockmodel, FamilySpec, Graph};
use cascade_core::schedulers::{canonical, stackelberg_search, PolicyId, SchedulePolicy, Scheduling};
use cascade_core::{CascadeError, GameParams, Mode, Rational, Situation};

use crate::config::{Format, Options};
use crate::CliError;

/// What a command produced, plus whether the checked property held.
pub struct Rendered {
    pub json: Value,
    pub csv: Option<String>,
    pub passed: bool,
}

impl Rendered {
    fn ok(json: Value, csv: Option<String>) -> Self {
        Rendered {
            json,
            csv,
            passed: true,
        }
    }

    pub fn text(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(&self.json).expect("json values serialize") + "\n"),
            Format::Csv => self
                .csv
                .clone()
                .ok_or_else(|| CliError::Usage("this command has no CSV form; use --format json".into())),
        }
    }
}

fn need<T: Clone>(value: &Option<T>, flag: &str) -> Result<T, CliError> {
    value.clone().ok_or_else(|| CliError::Usage(format!("missing --{flag}")))
}

fn rational(text: &str, flag: &str) -> Result<Rational, CliError> {
    text.parse()
        .map_err(|_| CliError::Usage(format!("--{flag} expects a/b or a decimal, got {text:?}")))
}

fn single_n(o: &Options) -> Result<usize, CliError> {
    match need(&o.n, "n")?.as_slice() {
        [n] => Ok(*n),
        _ => Err(CliError::Usage("--n takes a single value here".into())),
    }
}

pub fn params(o: &Options) -> Result<GameParams, CliError> {
    let p = rational(&need(&o.p, "p")?, "p")?;
    let pi = rational(&need(&o.pi, "pi")?, "pi")?;
    Ok(GameParams::new(p, pi)?)
}

fn family(o: &Options) -> Result<FamilySpec, CliError> {
    let spec = match need(&o.family, "family")?.as_str() {
        "clique" => FamilySpec::Clique { n: single_n(o)? },
        "star" => FamilySpec::Star { n: single_n(o)? },
        "cloud" => FamilySpec::Cloud {
            a: need(&o.a, "a")?,
            b: need(&o.b, "b")?,
        },
        "three_group" | "three-group" => {
            let sizes = need(&o.sizes, "sizes")?;
            let sizes: [usize; 3] = sizes
                .try_into()
                .map_err(|_| CliError::Usage("--sizes takes three values".into()))?;
            FamilySpec::ThreeGroup {
                sizes,
                pattern: need(&o.pattern, "pattern")?,
            }
        }
        "council" => FamilySpec::Council {
            k: need(&o.k, "k")?,
            m: need(&o.m, "m")?,
            subclique_size: o.subclique_size.unwrap_or(5),
        },
        other => return Err(CliError::Usage(format!("unknown family {other:?}"))),
    };
    spec.validate()?;
    Ok(spec)
}

fn modes(o: &Options) -> Result<Vec<Mode>, CliError> {
    match o.mode.as_deref().unwrap_or("both") {
        "both" => Ok(Mode::BOTH.to_vec()),
        m => Ok(vec![m.parse()?]),
    }
}

/// Block sequence to node order on the expansion, lowest index first.
fn lift_order(bm: &Blockmodel, seq: &[usize]) -> Result<Vec<usize>, CliError> {
    let mut used = vec![0; bm.block_count()];
    seq.iter()
        .map(|&b| {
            if b >= bm.block_count() || used[b] >= bm.size(b) {
                return Err(CliError::Usage(format!("block sequence overuses block {b}")));
            }
            used[b] += 1;
            Ok(bm.offset(b) + used[b] - 1)
        })
        .collect()
}

/// The scheduling on the graph as given, and on its explicit expansion.
fn scheduling(o: &Options, spec: &FamilySpec, graph: &Graph) -> Result<(Scheduling, Scheduling), CliError> {
    let name = o.schedule.as_deref().unwrap_or("optimal");
    Ok(match name {
        "optimal" => (Scheduling::PbeOptimal, Scheduling::PbeOptimal),
        "order" => {
            let order = need(&o.order, "order")?;
            let nodes = match graph {
                Graph::Block(bm) => lift_order(bm, &order)?,
                Graph::Explicit(_) => order.clone(),
            };
            (
                Scheduling::Policy(SchedulePolicy::order(order)),
                Scheduling::Policy(SchedulePolicy::order(nodes)),
            )
        }
        id => {
            let id: PolicyId = id.parse()?;
            let policy = Scheduling::Policy(canonical(id, spec)?);
            (policy.clone(), policy)
        }
    })
}

fn perf_json(mode: Mode, count: &Rational, fraction: &Rational) -> Value {
    json!({
        "mode": mode,
        "count": count,
        "fraction": fraction,
        "fraction_float": fraction.to_f64(),
    })
}

fn perf_csv(rows: &[(Mode, Rational, Rational)]) -> String {
    let mut out = String::from("mode,count,fraction,fraction_float\n");
    for (mode, count, fraction) in rows {
        out.push_str(&format!("{mode},{count},{fraction},{:.10}\n", fraction.to_f64()));
    }
    out
}

pub fn solve(o: &Options) -> Result<Rendered, CliError> {
    let spec = family(o)?;
    let params = params(o)?;
    let graph = graphs::generate(&spec)?;
    let (sched, _) = scheduling(o, &spec, &graph)?;
    let mut rows = Vec::new();
    let mut tables = Vec::new();
    for mode in modes(o)? {
        match &graph {
            Graph::Block(bm) => {
                let vt = dp_solve(bm, &params, mode, &sched, None)?;
                let root = vt.initial().clone();
                rows.push((mode, vt.expected_count(&root)?, vt.root_performance()));
                if o.table == Some(true) {
                    tables.push(json!({"mode": mode, "rows": vt.to_json()}));
                }
            }
            Graph::Explicit(g) => {
                let t = solve_explicit(g, &params, mode, &sched, &Situation::empty(g.node_count()))?;
                let Performance { count, fraction } = t.performance();
                rows.push((mode, count, fraction));
                if o.table == Some(true) {
                    tables.push(json!({"mode": mode, "rows": t.to_json()}));
                }
            }
        }
    }
    let mut json = json!({
        "graph": spec,
        "n": graph.node_count(),
        "p": params.p,
        "pi": params.pi,
        "results": rows.iter().map(|(m, c, f)| perf_json(*m, c, f)).collect::<Vec<_>>(),
    });
    if !tables.is_empty() {
        json["tables"] = Value::Array(tables);
    }
    Ok(Rendered::ok(json, Some(perf_csv(&rows))))
}

pub fn simulate(o: &Options) -> Result<Rendered, CliError> {
    let spec = family(o)?;
    let params = params(o)?;
    let graph = graphs::generate(&spec)?;
    let (_, sched) = scheduling(o, &spec, &graph)?;
    let g = graph.to_explicit();
    let trials = o.trials.unwrap_or(10_000);
    let seed = o.seed.unwrap_or(1);
    let mut results = Vec::new();
    let mut csv = String::from("mode,trials,seed,mean_count,fraction,stderr\n");
    for mode in modes(o)? {
        let est = monte_carlo_performance(&g, &params, mode, &sched, &Situation::empty(g.node_count()), trials, seed)?;
        csv.push_str(&format!(
            "{mode},{},{},{:.10},{:.10},{:.10}\n",
            est.trials, est.seed, est.mean_count, est.fraction, est.stderr
        ));
        results.push(json!({"mode": mode, "estimate": est}));
    }
    let json = json!({"graph": spec, "n": g.node_count(), "p": params.p, "pi": params.pi, "results": results});
    Ok(Rendered::ok(json, Some(csv)))
}

pub fn run_sweep(o: &Options) -> Result<Rendered, CliError> {
    let fam = match need(&o.family, "family")?.as_str() {
        "clique" => SweepFamily::Clique,
        "star" => SweepFamily::Star,
        other => return Err(CliError::Usage(format!("sweeps cover clique and star, not {other:?}"))),
    };
    let mut spec = SweepSpec::default_grid(fam, need(&o.n, "n")?);
    if let Some(ps) = &o.ps {
        spec.p = ps.iter().map(|t| rational(t, "ps")).collect::<Result<_, _>>()?;
    }
    if let Some(pis) = &o.pis {
        spec.pi = pis.iter().map(|t| rational(t, "pis")).collect::<Result<_, _>>()?;
    }
    let grid = sweep(&spec)?;
    let json = json!({
        "spec": grid.spec,
        "max_ratio": grid.max_ratio(),
        "cells": grid.cells,
    });
    Ok(Rendered::ok(json, Some(grid.to_csv_string())))
}

pub fn classify(o: &Options) -> Result<Rendered, CliError> {
    let n = single_n(o)?;
    let params = params(o)?;
    let class = classify_clique(n, &params)?;
    let csv = format!("n,p,pi,class\n{n},{},{},{class}\n", params.p, params.pi);
    Ok(Rendered::ok(json!({"n": n, "p": params.p, "pi": params.pi, "class": class}), Some(csv)))
}

pub fn thresholds(o: &Options) -> Result<Rendered, CliError> {
    let n = single_n(o)?;
    let params = params(o)?;
    let th = star_thresholds(n, &params)?;
    let opt = |v: Option<i64>| v.map(|d| d.to_string()).unwrap_or_default();
    let mut csv = String::from("k,y_star,y_floor,n_star,n_star_switch,n_type_always_n\n");
    for r in &th.rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.k,
            opt(r.y_star),
            opt(r.y_floor),
            opt(r.n_star),
            opt(r.n_star_switch),
            r.n_type_always_n
        ));
    }
    let json = json!({"p": params.p, "pi": params.pi, "y_star_monotone": th.y_star_monotone(), "thresholds": th});
    Ok(Rendered::ok(json, Some(csv)))
}

fn block_graph(spec: &FamilySpec) -> Result<Blockmodel, CliError> {
    match graphs::generate(spec)? {
        Graph::Block(bm) => Ok(bm),
        Graph::Explicit(_) => Err(CliError::Usage(format!("{} is not a blockmodel family", spec.name()))),
    }
}

pub fn stackelberg(o: &Options) -> Result<Rendered, CliError> {
    let spec = family(o)?;
    let params = params(o)?;
    let bm = block_graph(&spec)?;
    let r = stackelberg_search(&bm, &params)?;
    let n = Rational::from(bm.node_count());
    let (sc, pc) = (&r.stackelberg * &n, &r.pbe * &n);
    let csv = format!(
        "stackelberg,pbe,stackelberg_count,pbe_count\n{:.10},{:.10},{:.10},{:.10}\n",
        r.stackelberg.to_f64(),
        r.pbe.to_f64(),
        sc.to_f64(),
        pc.to_f64()
    );
    let json = json!({
        "graph": spec,
        "p": params.p,
        "pi": params.pi,
        "stackelberg_count": sc,
        "pbe_count": pc,
        "result": r,
    });
    Ok(Rendered::ok(json, Some(csv)))
}

pub fn fig4(o: &Options) -> Result<Rendered, CliError> {
    let params = params(o)?;
    let report = recover_fig4(&params)?;
    let mut csv = String::from("a,b,c,pattern,stackelberg_count,pbe_count,match\n");
    for i in &report.instances {
        csv.push_str(&format!(
            "{},{},{},{:06b},{:.10},{:.10},{}\n",
            i.sizes[0],
            i.sizes[1],
            i.sizes[2],
            i.pattern,
            i.stackelberg_count.to_f64(),
            i.pbe_count.to_f64(),
            report.matches.contains(i)
        ));
    }
    let passed = !report.matches.is_empty();
    Ok(Rendered {
        json: serde_json::to_value(&report).expect("report serializes"),
        csv: Some(csv),
        passed,
    })
}

pub fn verify(o: &Options) -> Result<Rendered, CliError> {
    let campaign = need(&o.campaign, "campaign")?;
    let seed = o.seed.unwrap_or(1);
    let (json, passed) = match campaign.as_str() {
        "nonadaptive-bound" => {
            let r = verify_nonadaptive_bound(seed, o.samples.unwrap_or(200), o.n_max.unwrap_or(8))?;
            (serde_json::to_value(&r), r.passed)
        }
        "monotone-p" => {
            let r = verify_monotone_p(seed, o.samples.unwrap_or(500))?;
            (serde_json::to_value(&r), r.passed)
        }
        "council" => {
            let r = council_bound_check(
                o.k.unwrap_or(2500),
                o.m.unwrap_or(50),
                &params(o)?,
                o.trials.unwrap_or(10_000),
                seed,
            )?;
            (serde_json::to_value(&r), r.passed)
        }
        "witness" => {
            let ks: Vec<usize> = o.n.clone().unwrap_or_else(|| (5..=10).collect());
            let ps = match &o.ps {
                Some(v) => v.iter().map(|t| rational(t, "ps")).collect::<Result<_, _>>()?,
                None => (1..50).map(|i| Rational::ratio(i, 100)).collect::<Vec<_>>(),
            };
            let pis = match &o.pis {
                Some(v) => v.iter().map(|t| rational(t, "pis")).collect::<Result<_, _>>()?,
                None => (1..20).map(|j| Rational::ratio(40 + j, 20)).collect::<Vec<_>>(),
            };
            let r = fixed_neighbor_witness_search(&ks, &ps, &pis)?;
            let found = !r.witnesses.is_empty();
            (serde_json::to_value(&r), found)
        }
        "margin" => {
            let spec = family(o)?;
            let graph = graphs::generate(&spec)?;
            let (_, sched) = scheduling(o, &spec, &graph)?;
            let r = indifference_margin(&graph.to_explicit(), &params(o)?, &sched)?;
            (serde_json::to_value(&r), r.passed)
        }
        other => return Err(CliError::Usage(format!("unknown campaign {other:?}"))),
    };
    let json = json!({"campaign": campaign, "passed": passed, "report": json.expect("report serializes")});
    Ok(Rendered {
        json,
        csv: None,
        passed,
    })
}

pub fn oracle_check(o: &Options) -> Result<Rendered, CliError> {
    let spec = family(o)?;
    let params = params(o)?;
    let bm = block_graph(&spec)?;
    let graph = Graph::Block(bm.clone());
    let (block_sched, node_sched) = scheduling(o, &spec, &graph)?;
    let g = bm.expand();
    let mut rows = Vec::new();
    let mut csv = String::from("mode,dp,oracle,equal\n");
    let mut passed = true;
    for mode in modes(o)? {
        let dp = dp_solve(&bm, &params, mode, &block_sched, None)?.root_performance();
        let oracle = brute_force_from(&g, &params, mode, &node_sched, &Situation::empty(g.node_count()))?;
        let equal = dp == oracle.fraction;
        passed &= equal;
        csv.push_str(&format!("{mode},{dp},{},{equal}\n", oracle.fraction));
        rows.push(json!({"mode": mode, "dp": dp, "oracle": oracle.fraction, "equal": equal}));
    }
    let json = json!({"graph": spec, "p": params.p, "pi": params.pi, "passed": passed, "results": rows});
    Ok(Rendered { json, csv: Some(csv), passed })
}

impl From<CascadeError> for CliError {
    fn from(e: CascadeError) -> Self {
        CliError::Core(e)
    }
}

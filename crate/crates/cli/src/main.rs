//! `pqspectra`: solve, certify and analyse `(p,q)`-spectral radii from the command line.

use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use pqspectra::analysis::{bounds_report, default_grid, power, pq_scan, scan_check};
use pqspectra::io::{parse_certificate, parse_hypergraph, HypergraphFile};
use pqspectra::labeling::certify;
use pqspectra::solver::gradient_search;
use pqspectra::{
    anadiplosis_components, solve, DirectedHypergraph, Eigenpair, Error, Phase, SolveOptions,
    SpectralParams,
};

const EXIT_IO: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_INVALID: u8 = 3;

#[derive(Parser)]
#[command(name = "pqspectra", version, about = "(p,q)-spectral radii of (r,s)-directed hypergraphs")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Compute λ_{p,q} with an eigenpair.
    Solve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pq: Exponents,
    },
    /// Check a weighted incidence labeling against (p, q).
    Certify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pq: Exponents,
        /// Certificate JSON.
        #[arg(long)]
        cert: PathBuf,
    },
    /// Print the anadiplosis components as arc groups.
    Components {
        #[command(flatten)]
        common: Common,
    },
    /// Degree bounds and the solved value they bracket.
    Bounds {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pq: Exponents,
    },
    /// Solve over a grid of exponents and emit CSV.
    Scan {
        #[command(flatten)]
        common: Common,
        /// `p1,p2,..xq1,q2,..`; defaults to the elliptic part of {2,3,4,6,8,12}².
        #[arg(long)]
        grid: Option<String>,
    },
    /// Build the power G(k; a, b) and predict its ρ.
    Power {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        a: usize,
        #[arg(long, default_value_t = 0)]
        b: usize,
    },
    /// Multi-start gradient search only.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pq: Exponents,
    },
}

#[derive(Args)]
struct Common {
    /// Hypergraph file (JSON or line format); `-` reads stdin.
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 32)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct Exponents {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

enum Failure {
    Io(String),
    Invalid(String),
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure::Invalid(err.to_string())
    }
}

struct Report {
    stdout: String,
    converged: bool,
}

impl Common {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.tol,
            max_iters: self.max_iters,
            starts: self.starts,
            seed: self.seed,
            threads: self.threads,
            ..SolveOptions::default()
        }
    }

    fn graph(&self) -> Result<DirectedHypergraph, Failure> {
        Ok(parse_hypergraph(&read(&self.input)?)?)
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    let res = if path.as_os_str() == "-" {
        std::io::stdin().read_to_end(&mut buf).map(|_| ())
    } else {
        std::fs::read(path).map(|b| buf = b)
    };
    res.map_err(|err| Failure::Io(format!("{}: {err}", path.display())))?;
    Ok(buf)
}

fn num(v: f64) -> String {
    format!("{v:.8}")
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

type Coords<'a> = Vec<(&'a str, f64)>;

fn coordinates<'a>(g: &'a DirectedHypergraph, pair: &Eigenpair) -> (Coords<'a>, Coords<'a>) {
    let x = g.tail_support().iter().map(|&v| g.label(v)).zip(pair.x.iter().copied()).collect();
    let y = g.head_support().iter().map(|&v| g.label(v)).zip(pair.y.iter().copied()).collect();
    (x, y)
}

struct SolvedView<'a> {
    g: &'a DirectedHypergraph,
    pair: &'a Eigenpair,
    params: &'a SpectralParams,
    method: String,
    converged: bool,
    extra: Vec<(&'static str, String)>,
}

fn render_pair(view: &SolvedView, format: Format) -> String {
    let (x, y) = coordinates(view.g, view.pair);
    match format {
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "lambda={}", num(view.pair.lambda));
            let _ = writeln!(out, "phase={}", view.params.phase);
            let _ = writeln!(out, "e={}", num(view.params.eccentricity));
            let _ = writeln!(out, "method={}", view.method);
            let _ = writeln!(out, "converged={}", view.converged);
            let _ = writeln!(out, "residual={:.8e}", view.pair.residual);
            for (k, v) in &view.extra {
                let _ = writeln!(out, "{k}={v}");
            }
            for (label, v) in &x {
                let _ = writeln!(out, "x[{label}]={}", num(*v));
            }
            for (label, v) in &y {
                let _ = writeln!(out, "y[{label}]={}", num(*v));
            }
            out
        }
        Format::Json => {
            let side = |c: &[(&str, f64)]| -> Vec<serde_json::Value> {
                c.iter().map(|(l, v)| json!({"vertex": l, "value": v})).collect()
            };
            let mut obj = json!({
                "lambda": view.pair.lambda,
                "phase": view.params.phase,
                "p": view.params.p,
                "q": view.params.q,
                "e": view.params.eccentricity,
                "method": view.method,
                "converged": view.converged,
                "residual": view.pair.residual,
                "x": side(&x),
                "y": side(&y),
            });
            for (k, v) in &view.extra {
                obj[*k] = serde_json::from_str(v).unwrap_or_else(|_| json!(v));
            }
            pretty(&obj)
        }
        Format::Csv => format!(
            "p,q,e,phase,lambda,residual,method,converged\n{},{},{},{},{},{:.8e},{},{}\n",
            num(view.params.p),
            num(view.params.q),
            num(view.params.eccentricity),
            view.params.phase,
            num(view.pair.lambda),
            view.pair.residual,
            view.method,
            view.converged
        ),
    }
}

fn no_csv(verb: &str, format: Format) -> Result<(), Failure> {
    if format == Format::Csv {
        return Err(Failure::Invalid(format!("--format csv is not available for {verb}")));
    }
    Ok(())
}

fn run(verb: Verb) -> Result<Report, Failure> {
    match verb {
        Verb::Solve { common, pq } => {
            let opts = common.options();
            opts.validate()?;
            let g = common.graph()?;
            let res = solve(&g, pq.p, pq.q, &opts)?;
            let mut extra = vec![
                ("iterations", res.iterations.to_string()),
                ("heuristic", res.heuristic.to_string()),
            ];
            if let Some(values) = &res.component_values {
                let list: Vec<String> = values.iter().map(|v| num(*v)).collect();
                extra.push(("component_values", format!("[{}]", list.join(","))));
            }
            let view = SolvedView {
                g: &g,
                pair: &res.pair,
                params: &res.params,
                method: res.method.to_string(),
                converged: res.converged,
                extra,
            };
            Ok(Report {
                stdout: render_pair(&view, common.format),
                converged: res.converged,
            })
        }
        Verb::Oracle { common, pq } => {
            let opts = common.options();
            opts.validate()?;
            let g = common.graph()?;
            let params = SpectralParams::for_graph(&g, pq.p, pq.q)?;
            let pair = gradient_search(&g, &params, &opts)?;
            let view = SolvedView {
                g: &g,
                pair: &pair,
                params: &params,
                method: "gradient_ascent".into(),
                converged: true,
                extra: vec![("starts", opts.starts.to_string())],
            };
            Ok(Report {
                stdout: render_pair(&view, common.format),
                converged: true,
            })
        }
        Verb::Certify { common, pq, cert } => {
            no_csv("certify", common.format)?;
            let g = common.graph()?;
            let params = SpectralParams::for_graph(&g, pq.p, pq.q)?;
            let labeling = parse_certificate(&read(&cert)?, &g)?;
            let rep = certify(&g, &labeling, &params, common.tol)?;
            let stdout = match common.format {
                Format::Json => pretty(&serde_json::to_value(&rep).expect("report serializes")),
                _ => {
                    let mut out = String::new();
                    let _ = writeln!(out, "verdict={}", rep.verdict);
                    let _ = writeln!(out, "strict={}", rep.strict);
                    let _ = writeln!(out, "consistent={}", rep.consistent);
                    let _ = writeln!(out, "bound={}", rep.implied_bound);
                    let _ = writeln!(out, "alpha={}", num(rep.alpha));
                    let _ = writeln!(out, "max_row_violation={:.8e}", rep.max_row_violation);
                    let _ = writeln!(out, "max_arc_violation={:.8e}", rep.max_arc_violation);
                    if let Some(w) = rep.weight_violation {
                        let _ = writeln!(out, "weight_violation={w:.8e}");
                    }
                    out
                }
            };
            Ok(Report {
                stdout,
                converged: true,
            })
        }
        Verb::Components { common } => {
            no_csv("components", common.format)?;
            let g = common.graph()?;
            let comps = anadiplosis_components(&g);
            let stdout = match common.format {
                Format::Json => pretty(&serde_json::to_value(&comps).expect("components serialize")),
                _ => {
                    let mut out = String::new();
                    let _ = writeln!(out, "components={}", comps.len());
                    let _ = writeln!(out, "connected={}", comps.connected);
                    for (i, group) in comps.groups.iter().enumerate() {
                        let arcs: Vec<String> = group.iter().map(|e| e.to_string()).collect();
                        let _ = writeln!(out, "component[{i}]={}", arcs.join(","));
                    }
                    out
                }
            };
            Ok(Report {
                stdout,
                converged: true,
            })
        }
        Verb::Bounds { common, pq } => {
            no_csv("bounds", common.format)?;
            let opts = common.options();
            opts.validate()?;
            let g = common.graph()?;
            let report = bounds_report(&g, pq.p, pq.q)?;
            let res = solve(&g, pq.p, pq.q, &opts)?;
            let lambda = res.lambda();
            let slack = 1e-8 * lambda.max(1.0);
            let sandwich = report.lower() <= lambda + slack && lambda <= report.upper() + slack;
            let stdout = match common.format {
                Format::Json => pretty(&json!({
                    "bounds": report,
                    "lambda": lambda,
                    "converged": res.converged,
                    "sandwich": sandwich,
                })),
                _ => {
                    let mut out = String::new();
                    let _ = writeln!(out, "phase={}", report.phase);
                    for (name, b) in [
                        ("lower_min_degree", &report.lower_min_degree),
                        ("lower_max_degree", &report.lower_max_degree),
                        ("upper_degree_product_max", &report.upper_degree_product_max),
                        ("upper_per_arc_degree_product", &report.upper_per_arc_degree_product),
                    ] {
                        let _ = writeln!(out, "{name}={}", num(b.value));
                    }
                    let _ = writeln!(out, "lambda={}", num(lambda));
                    let _ = writeln!(out, "converged={}", res.converged);
                    let _ = writeln!(out, "sandwich={}", if sandwich { "ok" } else { "violated" });
                    out
                }
            };
            Ok(Report {
                stdout,
                converged: res.converged,
            })
        }
        Verb::Scan { common, grid } => {
            let opts = common.options();
            opts.validate()?;
            let g = common.graph()?;
            let grid = match grid {
                Some(text) => parse_grid(&text)?,
                None => default_grid(g.r(), g.s(), Some(Phase::Elliptic)),
            };
            if grid.is_empty() {
                return Err(Failure::Invalid("the grid has no points".into()));
            }
            let table = pq_scan(&g, &grid, &opts)?;
            let check = scan_check(&table, 1e-7);
            for v in &check.violations {
                eprintln!("violation: {} at {:?} by {:.3e}", v.property, v.points, v.excess);
            }
            let converged = table.rows.iter().all(|r| r.converged);
            let stdout = match common.format {
                Format::Json => pretty(&json!({"table": table, "check": check})),
                _ => table.to_csv(),
            };
            Ok(Report { stdout, converged })
        }
        Verb::Power { common, k, a, b } => {
            no_csv("power", common.format)?;
            let opts = common.options();
            opts.validate()?;
            let g = common.graph()?;
            let pw = power(&g, k, a, b, &opts)?;
            let file = HypergraphFile::from_graph(&pw.graph);
            let stdout = match common.format {
                Format::Json => pretty(&json!({"graph": file, "predicted_rho": pw.predicted_rho})),
                _ => {
                    let rho = pw.predicted_rho.map_or_else(|| "none".to_string(), num);
                    format!(
                        "predicted_rho={rho}\ngraph={}\n",
                        serde_json::to_string(&file).expect("graph serializes")
                    )
                }
            };
            Ok(Report {
                stdout,
                converged: true,
            })
        }
    }
}

/// `p1,p2,..xq1,q2,..` into the Cartesian product, `p` outer.
fn parse_grid(text: &str) -> Result<Vec<(f64, f64)>, Failure> {
    let bad = |what: &str| Failure::Invalid(format!("invalid --grid {text:?}: {what}"));
    let (ps, qs) = text.split_once(['x', 'X']).ok_or_else(|| bad("expected `ps x qs`"))?;
    let list = |s: &str| -> Result<Vec<f64>, Failure> {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| bad(&format!("not a number: {t:?}"))))
            .collect()
    };
    let (ps, qs) = (list(ps)?, list(qs)?);
    Ok(ps.iter().flat_map(|&p| qs.iter().map(move |&q| (p, q))).collect())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let threads = match &cli.verb {
        Verb::Solve { common, .. }
        | Verb::Certify { common, .. }
        | Verb::Components { common }
        | Verb::Bounds { common, .. }
        | Verb::Scan { common, .. }
        | Verb::Power { common, .. }
        | Verb::Oracle { common, .. } => common.threads,
    };
    if threads > 1 {
        if let Err(err) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {err}");
            return ExitCode::from(EXIT_INVALID);
        }
    }
    match run(cli.verb) {
        Ok(report) => {
            print!("{}", report.stdout);
            if report.converged {
                ExitCode::SUCCESS
            } else {
                eprintln!("warning: solver did not converge");
                ExitCode::from(EXIT_NOT_CONVERGED)
            }
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}

//! Command-line front end: emits CSV/JSON tables for the exact and
//! Monte Carlo statistics of i.i.d. lattice sums.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lattice_llt::chernoff::{psi, solve_theta, verify_chernoff};
use lattice_llt::conv::{convolve_n, ConvolveOptions};
use lattice_llt::correlation::{
    bound_scan, decade_grid, full_grid, KappaSequence,
};
use lattice_llt::{expected_average, llt_error, run_ensemble, BPart, Cache, Error, Pmf, Tau};

#[derive(Parser)]
#[command(
    name = "lattice-llt",
    version,
    about = "Exact and Monte Carlo statistics of sums of i.i.d. lattice random variables"
)]
struct Cli {
    /// PMF file (JSON); defaults to the fair coin on {0, 1}
    #[arg(long, global = true)]
    pmf: Option<PathBuf>,

    /// Output file; stdout when absent
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Master RNG seed for sampling subcommands
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for parallel scans (0 = library default)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Grid {
    Decade,
    Full,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate a law and print its summary statistics
    Pmf,
    /// Exact law of the n-fold sum, or one point probability
    Convolve {
        #[arg(long)]
        n: u64,
        /// Report only P{S_n = AT} instead of the full law
        #[arg(long)]
        at: Option<f64>,
    },
    /// Joint (V, eps) law of the smoothing decomposition
    Bpart,
    /// Exact binomial lower tail against its Chernoff bound
    Chernoff {
        /// Bernoulli mass; defaults to the law's vartheta_X
        #[arg(long)]
        vartheta: Option<f64>,
        /// Tail cut fraction; exclusive with --rho
        #[arg(long, conflicts_with = "rho")]
        theta: Option<f64>,
        /// Target bound base psi(theta); solved for theta
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        n: u64,
    },
    /// Sup-norm error of the Gaussian local approximation per n
    Llt {
        #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
        ns: Vec<u64>,
    },
    /// Exact hit-indicator covariance against the bound shapes
    Corr {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        kappa: f64,
        #[arg(long, value_enum, default_value_t = Grid::Decade)]
        grid: Grid,
        #[arg(long, default_value_t = 512)]
        nmax: u64,
        /// Regime cut m <= c*n for the square-root-shape maximum
        #[arg(long, default_value_t = 0.5)]
        c: f64,
        /// Moment exponent of the generic-weight shape
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
    },
    /// Monte Carlo ensemble of the log-averaged hit statistic
    Asllt {
        #[arg(long, default_value_t = 20)]
        paths: u64,
        #[arg(long, default_value_t = 100_000)]
        nmax: u64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        kappa: f64,
        /// Observation points; defaults to decades up to nmax
        #[arg(long, value_delimiter = ',')]
        checkpoints: Option<Vec<u64>>,
        /// Also compute the exact mean of the statistic at each checkpoint
        #[arg(long, default_value_t = false)]
        exact_mean: bool,
    },
}

/// One finished run: config echo, a table, and summary pairs.
struct Report {
    config: Vec<(String, String)>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
    summary: Vec<(String, Value)>,
}

fn fnum(x: f64) -> Value {
    json!(x)
}

fn value_str(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render_csv(report: &Report) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# lattice-llt {}\n",
        env!("CARGO_PKG_VERSION")
    ));
    for (k, v) in &report.config {
        out.push_str(&format!("# config {k} = {v}\n"));
    }
    out.push_str(&report.columns.join(","));
    out.push('\n');
    for row in &report.rows {
        let cells: Vec<String> = row.iter().map(value_str).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    for (k, v) in &report.summary {
        out.push_str(&format!("# {k} = {}\n", value_str(v)));
    }
    out
}

fn render_json(report: &Report) -> String {
    let config: serde_json::Map<String, Value> = report
        .config
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
        .collect();
    let summary: serde_json::Map<String, Value> = report
        .summary
        .iter()
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    let doc = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "columns": report.columns,
        "rows": report.rows,
        "summary": summary,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable report");
    s.push('\n');
    s
}

fn load_pmf(path: &Option<PathBuf>) -> Result<(Pmf, String), Error> {
    match path {
        None => Ok((Pmf::bernoulli_half(), "builtin:bernoulli-half".into())),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::DomainError {
                what: "pmf file",
                value: f64::NAN,
                range: Box::leak(format!("readable path ({e})").into_boxed_str()),
            })?;
            Ok((Pmf::from_json_str(&text)?, p.display().to_string()))
        }
    }
}

fn base_config(cli: &Cli, sub: &str, pmf_label: &str) -> Vec<(String, String)> {
    vec![
        ("subcommand".into(), sub.into()),
        ("pmf".into(), pmf_label.into()),
        (
            "format".into(),
            match cli.format {
                Format::Csv => "csv".into(),
                Format::Json => "json".into(),
            },
        ),
        ("seed".into(), cli.seed.to_string()),
    ]
}

fn run(cli: &Cli) -> Result<Report, Error> {
    let opts = ConvolveOptions::default();
    let (pmf, pmf_label) = load_pmf(&cli.pmf)?;
    match &cli.cmd {
        Cmd::Pmf => {
            let stats = pmf.validate()?;
            let config = base_config(cli, "pmf", &pmf_label);
            let rows = vec![
                vec![json!("v0"), fnum(pmf.v0())],
                vec![json!("D"), fnum(pmf.span())],
                vec![json!("support_len"), json!(pmf.support_len())],
                vec![json!("mu"), fnum(stats.mu)],
                vec![json!("sigma2"), fnum(stats.sigma2)],
                vec![json!("vartheta"), fnum(stats.vartheta)],
                vec![json!("basber"), json!(stats.basber)],
            ];
            Ok(Report {
                config,
                columns: vec!["stat", "value"],
                rows,
                summary: vec![("span_maximal".into(), json!(true))],
            })
        }
        Cmd::Convolve { n, at } => {
            let mut config = base_config(cli, "convolve", &pmf_label);
            config.push(("n".into(), n.to_string()));
            let dist = convolve_n(&pmf, *n, &opts)?;
            let mut rows = Vec::new();
            match at {
                Some(x) => {
                    config.push(("at".into(), format!("{x}")));
                    rows.push(vec![
                        json!(dist.offset_of(*x).unwrap_or(0)),
                        fnum(*x),
                        fnum(dist.prob_at(*x)),
                    ]);
                }
                None => {
                    for (k, p) in dist.entries() {
                        let value = pmf.v0() * *n as f64 + pmf.span() * k as f64;
                        rows.push(vec![json!(k), fnum(value), fnum(p)]);
                    }
                }
            }
            Ok(Report {
                config,
                columns: vec!["offset", "value", "prob"],
                rows,
                summary: vec![("total_mass".into(), fnum(dist.total_mass()))],
            })
        }
        Cmd::Bpart => {
            let config = base_config(cli, "bpart", &pmf_label);
            let tau = Tau::canonical(&pmf)?;
            let part = BPart::build(&pmf, &tau)?;
            let rows = part
                .joint_atoms()
                .into_iter()
                .map(|(k, e, p)| vec![json!(k), json!(u8::from(e)), fnum(p)])
                .collect();
            let rec = part.reconstructed_law()?;
            let residual = pmf
                .atoms()
                .map(|(k, p)| (rec.prob(k) - p).abs())
                .fold(0.0f64, f64::max);
            Ok(Report {
                config,
                columns: vec!["offset", "eps", "prob"],
                rows,
                summary: vec![
                    ("vartheta".into(), fnum(part.vartheta())),
                    ("reconstruction_residual".into(), fnum(residual)),
                ],
            })
        }
        Cmd::Chernoff {
            vartheta,
            theta,
            rho,
            n,
        } => {
            let mut config = base_config(cli, "chernoff", &pmf_label);
            let vt = match vartheta {
                Some(v) => *v,
                None => pmf.validate()?.vartheta,
            };
            let th = match (theta, rho) {
                (Some(t), _) => *t,
                (None, Some(r)) => solve_theta(*r, vt)?,
                (None, None) => solve_theta(1.0 - vt / 2.0, vt)?,
            };
            config.push(("vartheta".into(), format!("{vt}")));
            config.push(("theta".into(), format!("{th}")));
            config.push(("n".into(), n.to_string()));
            let (exact, bound) = verify_chernoff(vt, th, *n)?;
            let rows = vec![vec![
                json!(n),
                fnum(exact),
                fnum(bound),
                json!(exact <= bound),
            ]];
            Ok(Report {
                config,
                columns: vec!["n", "exact", "bound", "holds"],
                rows,
                summary: vec![("psi".into(), fnum(psi(th, vt)?))],
            })
        }
        Cmd::Llt { ns } => {
            let mut config = base_config(cli, "llt", &pmf_label);
            config.push((
                "ns".into(),
                ns.iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ));
            let curve = llt_error(&pmf, ns, &opts)?;
            let rows = curve
                .entries
                .iter()
                .map(|&(n, d)| vec![json!(n), fnum(d)])
                .collect();
            let summary = match curve.fit {
                Some(fit) => vec![
                    ("alpha_hat".into(), fnum(fit.alpha_hat)),
                    ("alpha_std_err".into(), fnum(fit.std_err)),
                ],
                None => vec![("alpha_hat".into(), Value::Null)],
            };
            Ok(Report {
                config,
                columns: vec!["n", "delta"],
                rows,
                summary,
            })
        }
        Cmd::Corr {
            kappa,
            grid,
            nmax,
            c,
            alpha,
        } => {
            let mut config = base_config(cli, "corr", &pmf_label);
            config.push(("kappa".into(), format!("{kappa}")));
            config.push((
                "grid".into(),
                match grid {
                    Grid::Decade => "decade".into(),
                    Grid::Full => "full".into(),
                },
            ));
            config.push(("nmax".into(), nmax.to_string()));
            config.push(("c".into(), format!("{c}")));
            config.push(("alpha".into(), format!("{alpha}")));
            let stats = pmf.validate()?;
            let seq = KappaSequence::new(&pmf, &stats, *kappa);
            let cache = Cache::new(pmf.clone(), opts);
            let pairs = match grid {
                Grid::Decade => decade_grid(*nmax),
                Grid::Full => {
                    cache.prefill(*nmax)?;
                    full_grid(*nmax)
                }
            };
            let scan = bound_scan(&cache, &seq, &pairs, *c, *alpha)?;
            let rows = scan
                .records
                .iter()
                .map(|r| {
                    vec![
                        json!(r.n),
                        json!(r.m),
                        fnum(r.exact_cov),
                        fnum(r.thm1_shape),
                        fnum(r.cor1_shape),
                        fnum(r.ratio),
                        fnum(r.gw_shape),
                    ]
                })
                .collect();
            Ok(Report {
                config,
                columns: vec![
                    "n",
                    "m",
                    "exact_cov",
                    "thm1_shape",
                    "cor1_shape",
                    "ratio",
                    "gw_shape",
                ],
                rows,
                summary: vec![
                    ("C_hat".into(), fnum(scan.c_hat)),
                    ("C_c_hat".into(), fnum(scan.c_c_hat)),
                ],
            })
        }
        Cmd::Asllt {
            paths,
            nmax,
            kappa,
            checkpoints,
            exact_mean,
        } => {
            let mut config = base_config(cli, "asllt", &pmf_label);
            config.push(("paths".into(), paths.to_string()));
            config.push(("nmax".into(), nmax.to_string()));
            config.push(("kappa".into(), format!("{kappa}")));
            let cps: Vec<u64> = match checkpoints {
                Some(v) => v.clone(),
                None => [100u64, 1_000, 10_000, 100_000, 1_000_000]
                    .iter()
                    .copied()
                    .filter(|&cp| cp <= *nmax)
                    .collect(),
            };
            config.push((
                "checkpoints".into(),
                cps.iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ));
            let stats = pmf.validate()?;
            let seq = KappaSequence::new(&pmf, &stats, *kappa);
            let ens = run_ensemble(&pmf, &seq, *nmax, &cps, *paths, cli.seed)?;
            let mut rows = Vec::new();
            for (i, &cp) in ens.checkpoints.iter().enumerate() {
                let mut row = vec![
                    json!(cp),
                    fnum(ens.mean[i]),
                    fnum(ens.std_dev[i]),
                    fnum(ens.min[i]),
                    fnum(ens.max[i]),
                ];
                if *exact_mean {
                    row.push(fnum(expected_average(&pmf, &seq, cp, &opts)?));
                }
                rows.push(row);
            }
            let mut columns = vec!["N", "mean", "std_dev", "min", "max"];
            if *exact_mean {
                columns.push("exact_mean");
            }
            Ok(Report {
                config,
                columns,
                rows,
                summary: vec![
                    ("limit".into(), fnum(ens.limit)),
                    ("paths".into(), json!(ens.paths)),
                ],
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // ignore failure: the global pool can only be set once
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {} ({e})", e.name());
            return ExitCode::from(2);
        }
    };
    let text = match cli.format {
        Format::Csv => render_csv(&report),
        Format::Json => render_json(&report),
    };
    let write_result = match &cli.out {
        None => std::io::stdout().write_all(text.as_bytes()),
        Some(p) => fs::write(p, &text),
    };
    if let Err(e) = write_result {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}

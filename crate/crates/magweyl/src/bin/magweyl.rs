//! Command-line front end: runs verification suites and evaluates single
//! calculus operations on Gaussian symbols.

use clap::{Args, Parser, Subcommand};
use magweyl::grid::{DoubledSymbol, GridSpec, PhaseSymbol};
use magweyl::harness::config::{balanced_length, SuiteConfig};
use magweyl::harness::report::{self, Env, Format, Report};
use magweyl::harness::run_suite;
use magweyl::magnetics::VectorPotential;
use magweyl::products::{gaussian_symbol, moyal_product, richardson_ratios, semiclassical_defect, ProductRoute};
use magweyl::supercalc::{liouville_symbol, semi_super_product, super_product, SemiSuperRoute, SuperProductRoute};
use magweyl::weyl::{Calculus, Params};
use magweyl::{Error, Result};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "magweyl", version, about = "Magnetic Weyl and super-operator calculus on a phase-space lattice")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Lattice as `d,n,L`; `L` may be omitted for `L = sqrt(2πn)`.
    #[arg(long, global = true, value_parser = parse_grid)]
    grid: Option<GridSpec>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long, global = true)]
    lambda: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// `zero`, `landau:B` or `symmetric:B`.
    #[arg(long, global = true)]
    potential: Option<String>,
    /// Output file; standard output if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "json")]
    format: Format,
}

/// A Gaussian symbol as `center..., momentum..., width` (one center and
/// momentum component per dimension, or one value repeated).
#[derive(Args)]
struct Gaussians {
    #[arg(long, allow_hyphen_values = true, default_value = "0.3,-0.2,1.1")]
    f: String,
    #[arg(long, allow_hyphen_values = true, default_value = "-0.4,0.1,0.9")]
    g: String,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verification suites.
    Suite {
        #[command(subcommand)]
        cmd: SuiteCmd,
    },
    /// Matrix of `op(f)` in the position basis.
    Quantize {
        #[command(flatten)]
        symbols: Gaussians,
    },
    /// Magnetic Moyal product `f ⋆ g`.
    Product {
        #[arg(long, default_value = "operator")]
        route: ProductRoute,
        #[command(flatten)]
        symbols: Gaussians,
    },
    /// Semi-super product `(f ⊗ g) ♦ g`.
    Semisuper {
        #[arg(long, default_value = "operator")]
        route: SemiSuperRoute,
        #[command(flatten)]
        symbols: Gaussians,
    },
    /// Super product `(f ⊗ g) ♯ (g ⊗ f)`.
    Superproduct {
        #[arg(long, default_value = "superop")]
        route: SuperProductRoute,
        #[command(flatten)]
        symbols: Gaussians,
    },
    /// Liouville symbol of the Gaussian `f`.
    Liouville {
        #[command(flatten)]
        symbols: Gaussians,
    },
    /// Defect of the first-order product expansion over an ε sweep.
    Expand {
        /// Sweep values, largest first; consecutive ratios are reported.
        #[arg(long, value_delimiter = ',', default_value = "0.4,0.2,0.1,0.05")]
        sweep: Vec<f64>,
        #[arg(long, default_value = "quadrature")]
        route: ProductRoute,
        #[command(flatten)]
        symbols: Gaussians,
    },
    /// Report files.
    Report {
        #[command(subcommand)]
        cmd: ReportCmd,
    },
}

#[derive(Subcommand)]
enum SuiteCmd {
    /// Run the configured suites; global flags override the config.
    Run {
        config: Option<PathBuf>,
        /// Exit with status 2 when any check fails.
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Subcommand)]
enum ReportCmd {
    /// Re-emit a report in `--format`; CSV input takes its env from the global flags.
    Convert { input: PathBuf },
}

fn parse_grid(s: &str) -> std::result::Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if !(2..=3).contains(&parts.len()) {
        return Err("expected d,n or d,n,L".into());
    }
    let d = parts[0].parse().map_err(|e| format!("d: {e}"))?;
    let n = parts[1].parse().map_err(|e| format!("n: {e}"))?;
    let l = match parts.get(2) {
        Some(v) => v.parse().map_err(|e| format!("L: {e}"))?,
        None => balanced_length(n),
    };
    GridSpec::new(d, n, l).map_err(|e| e.to_string())
}

fn parse_potential(s: &str, d: usize) -> Result<VectorPotential> {
    let bad = || Error::Parameter(format!("potential '{s}': expected zero, landau:B or symmetric:B"));
    let (name, b) = match s.split_once(':') {
        Some((name, b)) => (name, Some(b.parse::<f64>().map_err(|_| bad())?)),
        None => (s, None),
    };
    match (name, b) {
        ("zero", None) => Ok(VectorPotential::Zero { d }),
        ("landau", Some(b)) => Ok(VectorPotential::Landau { d, b }),
        ("symmetric", Some(b)) => Ok(VectorPotential::Symmetric { b }),
        _ => Err(bad()),
    }
}

fn parse_gaussian(s: &str, grid: GridSpec) -> Result<PhaseSymbol> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Parameter(format!("gaussian '{s}': not a number list"))))
        .collect::<Result<_>>()?;
    let d = grid.d;
    let (center, momentum, width) = match v.len() {
        3 => (vec![v[0]; d], vec![v[1]; d], v[2]),
        k if k == 2 * d + 1 => (v[..d].to_vec(), v[d..2 * d].to_vec(), v[2 * d]),
        _ => return Err(Error::Parameter(format!("gaussian '{s}': expected 3 or {} values", 2 * d + 1))),
    };
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::Parameter(format!("gaussian '{s}': width must be positive")));
    }
    Ok(gaussian_symbol(grid, &center, &momentum, width))
}

impl Global {
    /// The config, with any global flag taking precedence.
    fn apply(&self, mut cfg: SuiteConfig) -> Result<SuiteConfig> {
        if let Some(g) = self.grid {
            cfg.grid = g;
        }
        if let Some(e) = self.eps {
            cfg.eps = e;
        }
        if let Some(l) = self.lambda {
            cfg.lambda = l;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(p) = &self.potential {
            cfg.potential = Some(parse_potential(p, cfg.grid.d)?);
            cfg.field = None;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn calculus(&self) -> Result<Calculus> {
        let cfg = self.apply(SuiteConfig::default())?;
        let a = cfg.resolved_potential().unwrap_or(VectorPotential::Zero { d: cfg.grid.d });
        Calculus::new(cfg.grid, cfg.params()?, a)
    }

    fn env(&self) -> Result<Env> {
        let cfg = self.apply(SuiteConfig::default())?;
        Ok(Env { d: cfg.grid.d, n: cfg.grid.n, l: cfg.grid.l, eps: cfg.eps, lambda: cfg.lambda, seed: cfg.seed })
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

/// Plot-ready numeric table.
struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => {
                let num = |v: f64| serde_json::Number::from_f64(v).map_or_else(|| serde_json::Value::String(report::format_num(v)), serde_json::Value::Number);
                let rows: Vec<Vec<serde_json::Value>> = self.rows.iter().map(|r| r.iter().map(|&v| num(v)).collect()).collect();
                let v = serde_json::json!({ "columns": self.columns, "rows": rows });
                serde_json::to_string_pretty(&v).map(|s| s + "\n").map_err(|e| Error::Io(e.to_string()))
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let io = |e: csv::Error| Error::Io(e.to_string());
                w.write_record(&self.columns).map_err(io)?;
                for r in &self.rows {
                    w.write_record(r.iter().map(|v| report::format_num(*v))).map_err(io)?;
                }
                String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?).map_err(|e| Error::Io(e.to_string()))
            }
        }
    }
}

fn axis_names(prefix: &str, d: usize) -> Vec<String> {
    let mut out: Vec<String> = (1..=d).map(|i| format!("{prefix}x{i}")).collect();
    out.extend((1..=d).map(|i| format!("{prefix}xi{i}")));
    out
}

fn phase_coords(grid: GridSpec, idx: usize) -> Vec<f64> {
    let p = grid.point(idx);
    p.x.into_iter().chain(p.xi).collect()
}

fn symbol_table(f: &PhaseSymbol) -> Table {
    let mut columns = axis_names("", f.grid.d);
    columns.extend(["re".into(), "im".into()]);
    let rows = f
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut r = phase_coords(f.grid, i);
            r.extend([v.re, v.im]);
            r
        })
        .collect();
    Table { columns, rows }
}

fn doubled_table(f: &DoubledSymbol) -> Table {
    let d = f.grid.d;
    let mut columns = axis_names("l", d);
    columns.extend(axis_names("r", d));
    columns.extend(["re".into(), "im".into()]);
    let n = f.side();
    let rows = f
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut r = phase_coords(f.grid, i / n);
            r.extend(phase_coords(f.grid, i % n));
            r.extend([v.re, v.im]);
            r
        })
        .collect();
    Table { columns, rows }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let g = &cli.global;
    let table = match cli.cmd {
        Cmd::Suite { cmd: SuiteCmd::Run { config, strict } } => {
            let base = match config {
                Some(p) => SuiteConfig::load(&p)?,
                None => SuiteConfig::default(),
            };
            let rep = run_suite(&g.apply(base)?)?;
            g.emit(&report::render(&rep, g.format)?)?;
            let failed = rep.failures();
            if !failed.is_empty() {
                eprintln!("{} of {} checks failed: {}", failed.len(), rep.checks.len(), failed.join(", "));
                if strict {
                    return Ok(ExitCode::from(2));
                }
            }
            return Ok(ExitCode::SUCCESS);
        }
        Cmd::Report { cmd: ReportCmd::Convert { input } } => {
            let rep = read_report(&input, g)?;
            g.emit(&report::render(&rep, g.format)?)?;
            return Ok(ExitCode::SUCCESS);
        }
        Cmd::Quantize { symbols } => {
            let c = g.calculus()?;
            let op = c.quantize(&parse_gaussian(&symbols.f, c.grid)?)?;
            let rows = (0..op.mat.nrows())
                .flat_map(|i| (0..op.mat.ncols()).map(move |j| (i, j)))
                .map(|(i, j)| {
                    let v = op.mat[(i, j)];
                    vec![i as f64, j as f64, v.re, v.im]
                })
                .collect();
            Table { columns: ["row", "col", "re", "im"].map(String::from).to_vec(), rows }
        }
        Cmd::Product { route, symbols } => {
            let c = g.calculus()?;
            let (f, h) = (parse_gaussian(&symbols.f, c.grid)?, parse_gaussian(&symbols.g, c.grid)?);
            symbol_table(&moyal_product(&c, &f, &h, route)?)
        }
        Cmd::Semisuper { route, symbols } => {
            let c = g.calculus()?;
            let (f, h) = (parse_gaussian(&symbols.f, c.grid)?, parse_gaussian(&symbols.g, c.grid)?);
            symbol_table(&semi_super_product(&c, &DoubledSymbol::tensor(&f, &h)?, &h, route)?)
        }
        Cmd::Superproduct { route, symbols } => {
            let c = g.calculus()?;
            let (f, h) = (parse_gaussian(&symbols.f, c.grid)?, parse_gaussian(&symbols.g, c.grid)?);
            doubled_table(&super_product(&c, &DoubledSymbol::tensor(&f, &h)?, &DoubledSymbol::tensor(&h, &f)?, route)?)
        }
        Cmd::Liouville { symbols } => {
            let c = g.calculus()?;
            doubled_table(&liouville_symbol(&parse_gaussian(&symbols.f, c.grid)?))
        }
        Cmd::Expand { sweep, route, symbols } => {
            let c = g.calculus()?;
            let (f, h) = (parse_gaussian(&symbols.f, c.grid)?, parse_gaussian(&symbols.g, c.grid)?);
            let defects = sweep
                .iter()
                .map(|&e| semiclassical_defect(&c.with_params(Params::new(e, c.lambda())?)?, &f, &h, route))
                .collect::<Result<Vec<_>>>()?;
            let ratios = richardson_ratios(&defects);
            let rows = sweep
                .iter()
                .zip(&defects)
                .enumerate()
                .map(|(i, (&e, &d))| vec![e, d, if i == 0 { f64::NAN } else { ratios[i - 1] }])
                .collect();
            Table { columns: ["eps", "defect", "ratio"].map(String::from).to_vec(), rows }
        }
    };
    g.emit(&table.render(g.format)?)?;
    Ok(ExitCode::SUCCESS)
}

/// JSON or CSV by content; CSV carries no env block.
fn read_report(path: &Path, g: &Global) -> Result<Report> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        report::from_json(&text)
    } else {
        Ok(Report { version: report::REPORT_VERSION, env: g.env()?, checks: report::from_csv(&text)? })
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use theta_forge::checks::{run_checks, CheckConfig};
use theta_forge::cst::{character_eval, cst_psi_closed_form, cst_psi_truncated};
use theta_forge::gram::{abelian_gram, fundamental_domain_independence, nonabelian_gram, su2_gram};
use theta_forge::nonabelian::sigma_eval;
use theta_forge::periods::{canonical_basis, check_canonical, form_elementary_divisors};
use theta_forge::{
    Complex64, EllipticModulus, Error, NATheta, PolarizedTorus, PsiDistribution, QuadratureGrid, RootSystem,
    Su2Family, Symmetry, Weight,
};

use config::{parse_complex, Format, RunConfig};

const SCHEMA: u32 = 1;

const EXIT_ERROR: u8 = 1;
const EXIT_TOLERANCE: u8 = 2;
const EXIT_CONVERGENCE: u8 = 3;

#[derive(Parser)]
#[command(name = "theta-forge", version, about = "Non-abelian theta functions for SU(n) and their checks")]
struct Cli {
    /// JSON config file; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, env = "THETA_FORGE_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<i64>,
    /// Modulus as `a+bi`.
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    radius_cap: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Count level-k alcove weights against binomial(n+k-1, k).
    Verlinde {
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        #[arg(long, default_value_t = 0)]
        k_min: i64,
        #[arg(long, default_value_t = 8)]
        k_max: i64,
    },
    /// Gram matrix of the transformed basis by quadrature.
    Gram {
        #[command(flatten)]
        common: Common,
        /// Points per real direction.
        #[arg(long = "N")]
        grid_n: Option<usize>,
        /// Heat time; anything but the admissible value runs the descent control.
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        abelian: bool,
        #[arg(long)]
        l: Option<usize>,
        /// Polarization type, comma separated.
        #[arg(long, value_delimiter = ',')]
        delta: Option<Vec<i64>>,
        /// SU(2) family for n = 2.
        #[arg(long, value_enum, default_value_t = FamilyArg::Integral)]
        family: FamilyArg,
    },
    /// Evaluate a function at the points of a file.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Dynkin labels, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        gamma: Option<Vec<i64>>,
        #[arg(long, value_enum, default_value_t = SymmetryArg::Plain)]
        symmetry: SymmetryArg,
        #[arg(long, value_enum, default_value_t = Route::Closed)]
        route: Route,
        /// One point per line, coordinates as `a+bi` separated by spaces or commas.
        #[arg(long)]
        points: PathBuf,
        /// Compare against this golden file.
        #[arg(long)]
        golden: Option<PathBuf>,
        /// Rewrite the golden file instead of comparing.
        #[arg(long, requires = "golden")]
        bless: bool,
    },
    /// Run the property suite.
    Checks {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t_detune: f64,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long = "N")]
        grid_n: Option<usize>,
    },
    /// Canonical lattice basis and period matrix for sl(n).
    Periods {
        #[arg(long)]
        n: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Theta,
    Character,
    CstPsi,
    Sigma,
}

#[derive(Clone, Copy, ValueEnum)]
enum Route {
    Closed,
    Truncated,
}

#[derive(Clone, Copy, ValueEnum)]
enum SymmetryArg {
    Plain,
    Plus,
    Minus,
    HatPlus,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Integral,
    Half,
}

/// Result of a command: JSON body, CSV table and exit code.
struct Report {
    body: Value,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    exit: u8,
}

fn cpair(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn fail(msg: impl std::fmt::Display) -> String {
    msg.to_string()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    let file = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let (flags, command_name) = flags_of(&cli);
    let cfg = file.overlay(flags);
    cfg.validate()?;
    if let Some(t) = cfg.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global().map_err(fail)?;
    }
    let report = match &cli.command {
        Command::Verlinde { n_min, n_max, k_min, k_max } => verlinde(*n_min, *n_max, *k_min, *k_max)?,
        Command::Gram { abelian, l, delta, family, .. } => gram(&cfg, *abelian, *l, delta.clone(), *family)?,
        Command::Eval { kind, gamma, symmetry, route, points, golden, bless, .. } => {
            eval(&cfg, *kind, gamma.clone(), *symmetry, *route, points, golden.as_ref(), *bless)?
        }
        Command::Checks { t_detune, samples, .. } => checks(&cfg, *t_detune, *samples)?,
        Command::Periods { .. } => periods(&cfg)?,
    };
    emit(&cfg, command_name, &report)?;
    Ok(report.exit)
}

fn flags_of(cli: &Cli) -> (RunConfig, &'static str) {
    let mut c = RunConfig {
        format: cli.format,
        output: cli.output.clone(),
        threads: cli.threads,
        seed: cli.seed,
        ..Default::default()
    };
    let mut common = |m: &Common| {
        c.n = m.n;
        c.k = m.k;
        c.tau = m.tau.clone();
        c.tol = m.tol;
        c.radius_cap = m.radius_cap;
    };
    let name = match &cli.command {
        Command::Verlinde { .. } => "verlinde",
        Command::Gram { common: m, grid_n, t, .. } => {
            common(m);
            c.grid_n = *grid_n;
            c.t = *t;
            "gram"
        }
        Command::Eval { common: m, .. } => {
            common(m);
            "eval"
        }
        Command::Checks { common: m, grid_n, .. } => {
            common(m);
            c.grid_n = *grid_n;
            "checks"
        }
        Command::Periods { n } => {
            c.n = *n;
            "periods"
        }
    };
    (c, name)
}

fn emit(cfg: &RunConfig, command: &str, r: &Report) -> Result<(), String> {
    let mut sink: Box<dyn Write> = match &cfg.output {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| format!("{}: {e}", p.display()))?),
        None => Box::new(std::io::stdout()),
    };
    match cfg.format.unwrap_or_default() {
        Format::Json => {
            let mut body = json!({ "schema": SCHEMA, "command": command });
            if let (Value::Object(dst), Value::Object(src)) = (&mut body, &r.body) {
                dst.extend(src.clone());
            }
            serde_json::to_writer_pretty(&mut sink, &body).map_err(fail)?;
            writeln!(sink).map_err(fail)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(sink);
            w.write_record(&r.header).map_err(fail)?;
            for row in &r.rows {
                w.write_record(row).map_err(fail)?;
            }
            w.flush().map_err(fail)?;
        }
    }
    Ok(())
}

fn verlinde(n_min: usize, n_max: usize, k_min: i64, k_max: i64) -> Result<Report, String> {
    if n_min < 2 || n_max > 8 || k_min < 0 || k_max > 12 || n_min > n_max || k_min > k_max {
        return Err("ranges must satisfy 2 <= n_min <= n_max <= 8 and 0 <= k_min <= k_max <= 12".into());
    }
    let mut rows = Vec::new();
    let mut table = Vec::new();
    let mut all = true;
    for n in n_min..=n_max {
        let rs = RootSystem::new(n).map_err(fail)?;
        for k in k_min..=k_max {
            let count = rs.level_k_weights(k).len() as i64;
            let b = theta_forge::util::binomial(n as i64 + k - 1, k);
            all &= count == b;
            table.push(json!({ "n": n, "k": k, "count": count, "binomial": b, "match": count == b }));
            rows.push(vec![n.to_string(), k.to_string(), count.to_string(), b.to_string(), (count == b).to_string()]);
        }
    }
    Ok(Report {
        body: json!({ "rows": table, "all_match": all }),
        header: vec!["n", "k", "count", "binomial", "match"],
        rows,
        exit: if all { 0 } else { EXIT_TOLERANCE },
    })
}

fn gram_rows(m: &nalgebra::DMatrix<Complex64>) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            rows.push(vec![i.to_string(), j.to_string(), m[(i, j)].re.to_string(), m[(i, j)].im.to_string()]);
        }
    }
    rows
}

fn gram(cfg: &RunConfig, abelian: bool, l: Option<usize>, delta: Option<Vec<i64>>, family: FamilyArg) -> Result<Report, String> {
    let tau = cfg.tau()?;
    let tol = cfg.tol.unwrap_or(1e-6);
    let result = if abelian {
        let l = l.unwrap_or(1);
        let k = cfg.k.unwrap_or(1);
        let delta = delta.unwrap_or_else(|| vec![1; l]);
        if let Some(t) = cfg.t {
            if (t - 1.0 / k as f64).abs() > 1e-12 {
                return Ok(Report {
                    body: json!({ "t": t, "admissible_t": 1.0 / k as f64, "passed": false,
                                  "reason": "the heat measure is a hermitian structure only at t = 1/k" }),
                    header: vec!["t", "admissible_t", "passed"],
                    rows: vec![vec![t.to_string(), (1.0 / k as f64).to_string(), "false".into()]],
                    exit: EXIT_TOLERANCE,
                });
            }
        }
        let omega = theta_forge::lattice::CMatrix::from_fn(l, l, |i, j| if i == j { tau } else { Complex64::new(0.0, 0.0) });
        let torus = PolarizedTorus::new(omega, delta, k).map_err(fail)?;
        let grid = cfg.grid_n.map(QuadratureGrid::new).unwrap_or_else(|| QuadratureGrid::default_for(l));
        abelian_gram(&torus, &grid)
    } else {
        let n = cfg.n.unwrap_or(3);
        let k = cfg.k.unwrap_or(1);
        let rs = RootSystem::new(n).map_err(fail)?;
        let admissible = 1.0 / (k + n as i64) as f64;
        if let Some(t) = cfg.t {
            if (t - admissible).abs() > 1e-12 {
                let d = fundamental_domain_independence(&rs, k, tau, t, 6, cfg.seed.unwrap_or(7)).map_err(fail)?;
                let passed = d.max() < 1e-9;
                return Ok(Report {
                    body: json!({ "t": t, "admissible_t": admissible, "descent_residual": d.max(),
                                  "invariance": d, "passed": passed }),
                    header: vec!["t", "admissible_t", "descent_residual", "passed"],
                    rows: vec![vec![t.to_string(), admissible.to_string(), d.max().to_string(), passed.to_string()]],
                    exit: if passed { 0 } else { EXIT_TOLERANCE },
                });
            }
        }
        let grid = cfg.grid_n.map(QuadratureGrid::new).unwrap_or_else(|| QuadratureGrid::default_for(rs.l));
        if n == 2 {
            let family = match family {
                FamilyArg::Integral => Su2Family::Integral,
                FamilyArg::Half => Su2Family::Half,
            };
            su2_gram(k, tau, family, &grid)
        } else {
            nonabelian_gram(&rs, k, tau, &grid)
        }
    };
    match result {
        Ok(r) => {
            let passed = r.identity_deviation() <= tol;
            let mut body = serde_json::to_value(&r).map_err(fail)?;
            body["passed"] = json!(passed);
            body["tolerance"] = json!(tol);
            Ok(Report {
                body,
                header: vec!["i", "j", "re", "im"],
                rows: gram_rows(&r.matrix),
                exit: if passed { 0 } else { EXIT_TOLERANCE },
            })
        }
        Err(Error::Convergence { change, n, refined }) => Ok(Report {
            body: json!({ "passed": false, "converged": false, "change": change, "n": n, "refined": refined }),
            header: vec!["change", "n", "refined"],
            rows: vec![vec![change.to_string(), n.to_string(), refined.to_string()]],
            exit: EXIT_CONVERGENCE,
        }),
        Err(e) => Err(e.to_string()),
    }
}

fn read_points(path: &PathBuf, l: usize) -> Result<Vec<Vec<Complex64>>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let coords: Vec<Complex64> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(parse_complex)
            .collect::<Result<_, _>>()
            .map_err(|e| format!("{}:{}: {e}", path.display(), i + 1))?;
        if coords.len() != l {
            return Err(format!("{}:{}: expected {l} coordinates, got {}", path.display(), i + 1, coords.len()));
        }
        out.push(coords);
    }
    Ok(out)
}

struct Row {
    point: Vec<Complex64>,
    value: Option<Complex64>,
    tail: f64,
    status: String,
}

#[allow(clippy::too_many_arguments)]
fn eval(
    cfg: &RunConfig,
    kind: Kind,
    gamma: Option<Vec<i64>>,
    symmetry: SymmetryArg,
    route: Route,
    points: &PathBuf,
    golden: Option<&PathBuf>,
    bless: bool,
) -> Result<Report, String> {
    let n = cfg.n.unwrap_or(3);
    let rs = RootSystem::new(n).map_err(fail)?;
    let tau = cfg.tau()?;
    let tol = cfg.tol.unwrap_or(1e-12);
    let k = cfg.k.unwrap_or(1);
    let gamma = Weight::new(gamma.unwrap_or_else(|| vec![0; rs.l]));
    if gamma.len() != rs.l {
        return Err(format!("gamma needs {} labels", rs.l));
    }
    let pts = read_points(points, rs.l)?;
    let one = |r: theta_forge::Result<(Complex64, f64)>, p: &Vec<Complex64>| match r {
        Ok((v, tail)) => Row { point: p.clone(), value: Some(v), tail, status: "ok".into() },
        Err(Error::SingularLocus(s)) => {
            Row { point: p.clone(), value: None, tail: f64::NAN, status: format!("singular ({s:e})") }
        }
        Err(e) => Row { point: p.clone(), value: None, tail: f64::NAN, status: format!("error: {e}") },
    };
    let rows: Vec<Row> = match kind {
        Kind::Theta => {
            let sym = match symmetry {
                SymmetryArg::Plain => Symmetry::Plain,
                SymmetryArg::Plus => Symmetry::Plus,
                SymmetryArg::Minus => Symmetry::Minus,
                SymmetryArg::HatPlus => Symmetry::HatPlus,
            };
            let modulus = EllipticModulus::new(tau).map_err(fail)?;
            let mut th = NATheta::new(&rs, gamma, k, modulus, sym, tol).map_err(fail)?;
            if let Some(cap) = cfg.radius_cap {
                th = th.with_radius_cap(cap);
            }
            pts.iter().map(|p| one(th.eval(p).map(|v| (v.value, v.tail)), p)).collect()
        }
        Kind::Character => pts.iter().map(|p| one(character_eval(&rs, &gamma, p).map(|v| (v, 0.0)), p)).collect(),
        Kind::Sigma => pts.iter().map(|p| one(sigma_eval(&rs, p).map(|v| (v, 0.0)), p)).collect(),
        Kind::CstPsi => {
            let psi = PsiDistribution::new(&rs, gamma, k).map_err(fail)?;
            let t = 1.0 / psi.shifted_level() as f64;
            pts.iter()
                .map(|p| {
                    let r = match route {
                        Route::Closed => cst_psi_closed_form(&psi, tau, p).map(|v| (v, 0.0)),
                        Route::Truncated => cst_psi_truncated(&psi, tau, t, std::slice::from_ref(p), tol)
                            .map(|(v, _)| (v[0], tol)),
                    };
                    one(r, p)
                })
                .collect()
        }
    };
    let values: Vec<Value> = rows.iter().map(|r| r.value.map(cpair).unwrap_or(Value::Null)).collect();
    let mut exit = 0;
    let mut golden_report = Value::Null;
    if let Some(path) = golden {
        if bless {
            let g = json!({ "schema": SCHEMA, "values": values });
            std::fs::write(path, serde_json::to_string_pretty(&g).map_err(fail)? + "\n").map_err(fail)?;
            golden_report = json!({ "blessed": path });
        } else {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let g: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            let expect = g["values"].as_array().ok_or("golden file has no values")?;
            let mut worst: f64 = 0.0;
            let mut matched = expect.len() == rows.len();
            for (r, e) in rows.iter().zip(expect) {
                match (r.value, e.as_array()) {
                    (Some(v), Some(pair)) if pair.len() == 2 => {
                        let b = Complex64::new(pair[0].as_f64().unwrap_or(f64::NAN), pair[1].as_f64().unwrap_or(f64::NAN));
                        let d = (v - b).norm() / b.norm().max(1.0);
                        worst = worst.max(d);
                    }
                    (None, _) if e.is_null() => {}
                    _ => matched = false,
                }
            }
            let passed = matched && worst <= 1e-9;
            if !passed {
                exit = EXIT_TOLERANCE;
            }
            golden_report = json!({ "file": path, "max_deviation": worst, "passed": passed });
        }
    }
    let table: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({ "point": r.point.iter().map(|z| cpair(*z)).collect::<Vec<_>>(),
                    "value": r.value.map(cpair).unwrap_or(Value::Null), "tail": r.tail, "status": r.status })
        })
        .collect();
    let csv_rows = rows
        .iter()
        .map(|r| {
            let point = r.point.iter().map(|z| format!("{}{:+}i", z.re, z.im)).collect::<Vec<_>>().join(" ");
            let (re, im) = r.value.map(|v| (v.re.to_string(), v.im.to_string())).unwrap_or_default();
            vec![point, re, im, r.tail.to_string(), r.status.clone()]
        })
        .collect();
    Ok(Report {
        body: json!({ "rows": table, "golden": golden_report }),
        header: vec!["point", "re", "im", "tail", "status"],
        rows: csv_rows,
        exit,
    })
}

fn checks(cfg: &RunConfig, t_detune: f64, samples: usize) -> Result<Report, String> {
    let ccfg = CheckConfig {
        n: cfg.n.unwrap_or(3),
        k: cfg.k.unwrap_or(1),
        tau: cfg.tau()?,
        seed: cfg.seed.unwrap_or(7),
        samples,
        t_detune,
        grid: cfg.grid_n.map(QuadratureGrid::new),
    };
    let out = run_checks(&ccfg);
    let all = out.iter().all(|c| c.passed);
    let rows = out
        .iter()
        .map(|c| vec![c.name.clone(), c.value.to_string(), c.threshold.to_string(), c.passed.to_string()])
        .collect();
    Ok(Report {
        body: json!({ "passed": all, "checks": out }),
        header: vec!["name", "value", "threshold", "passed"],
        rows,
        exit: if all { 0 } else { EXIT_TOLERANCE },
    })
}

fn periods(cfg: &RunConfig) -> Result<Report, String> {
    let n = cfg.n.unwrap_or(3);
    let data = canonical_basis(n).map_err(fail)?;
    let inv = check_canonical(&data).map_err(fail)?;
    let divisors = form_elementary_divisors(n).map_err(fail)?;
    let l = data.delta.len();
    let mut rows = Vec::new();
    for i in 0..l {
        for j in 0..l {
            rows.push(vec![i.to_string(), j.to_string(), data.omega_over_tau[(i, j)].to_string()]);
        }
    }
    let ok = inv.all();
    Ok(Report {
        body: json!({ "basis": data, "invariants": inv, "elementary_divisors": divisors, "passed": ok }),
        header: vec!["i", "j", "omega_over_tau"],
        rows,
        exit: if ok { 0 } else { EXIT_TOLERANCE },
    })
}

//! `star-spectral` command-line front end.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use star_spectral::asymptotics::{classify_h, AsymptoticTemplate, Branch, BranchKind, HClass, HConfiguration};
use star_spectral::characterize::{check_admissible, degenerate_split, Verdict};
use star_spectral::config::CONFIG_ENV;
use star_spectral::forward::{self, GraphProblem};
use star_spectral::inverse_easy::{reconstruct_method2, reconstruct_sums_degenerate, Method2Solver};
use star_spectral::inverse_riesz::reconstruct_method1;
use star_spectral::io::{self, Pair, ProblemFile, Provenance, SpectrumFile};
use star_spectral::products::{delta_from_spectrum, leading_form_check, ProductCharFn};
use star_spectral::spectrum::{NumberingSource, Spectrum};
use star_spectral::{Config, CosineSeries, Error, Result};

#[derive(Parser, Debug)]
#[command(name = "star-spectral", version, about = "Spectral problems on a star graph with a nonlocal matching condition")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// JSON file overriding the numerical defaults.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true)]
    k_dict: Option<usize>,
    #[arg(long, global = true)]
    n_direct: Option<usize>,
    #[arg(long, global = true)]
    n_tail: Option<usize>,
    #[arg(long, global = true)]
    tol_newton: Option<f64>,
    #[arg(long, global = true)]
    tol_cluster: Option<f64>,
    #[arg(long, global = true)]
    tol_case_zero: Option<f64>,
    #[arg(long, global = true)]
    tol_case_ambiguous: Option<f64>,
    #[arg(long, global = true)]
    tol_condition: Option<f64>,
    #[arg(long, global = true)]
    tol_denominator: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Easy,
    Riesz,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PlotKind {
    Delta,
    Spectrum,
    Density,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute eigenvalues of a problem file.
    Forward {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value_t = 100)]
        shells: usize,
        #[arg(long)]
        out: PathBuf,
        /// Warn when the Robin coefficients are not pairwise admissible.
        #[arg(long)]
        require_star: bool,
    },
    /// Recover the densities from a spectrum.
    Inverse {
        #[arg(long)]
        spectrum: PathBuf,
        /// Problem file or bare `[[re, im], ...]` list supplying h.
        #[arg(long)]
        h: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Easy)]
        method: Method,
        /// Number of moment equations (shells); defaults to the spectrum size.
        #[arg(long)]
        shells: Option<usize>,
        /// Recover sums over repeated Robin coefficients.
        #[arg(long)]
        sums: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Problem file with the true densities, for error reporting.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Check a multiset against the asymptotic characterization.
    Characterize {
        #[arg(long)]
        spectrum: PathBuf,
        #[arg(long)]
        h: PathBuf,
    },
    /// Compare the adjoint spectrum with the conjugated spectrum.
    AdjointCheck {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value_t = 50)]
        shells: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Compare the product representation with a reference.
    ProductsCheck {
        /// Without a problem the unperturbed template and its Euler product are used.
        #[arg(long)]
        problem: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 300)]
        shells: usize,
        #[arg(long, default_value_t = 20)]
        probes: usize,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Random problem, forward solve, inverse solve, error report.
    Roundtrip {
        /// Robin coefficients such as `0,1,2-1i`; defaults to `0, 1, ..., m-1`.
        #[arg(long, value_delimiter = ',', value_parser = parse_complex)]
        h: Option<Vec<Complex64>>,
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = 5)]
        modes: usize,
        #[arg(long, default_value_t = 300)]
        shells: usize,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write CSV data for plotting.
    EmitPlot {
        #[arg(long, value_enum)]
        kind: PlotKind,
        #[arg(long)]
        problem: Option<PathBuf>,
        #[arg(long)]
        spectrum: Option<PathBuf>,
        #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, default_value_t = 100.0)]
        to: f64,
        #[arg(long, default_value_t = 500)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    s.trim().parse::<Complex64>().map_err(|e| format!("{s}: {e}"))
}

fn load_config(g: &Global) -> Result<Config> {
    let mut cfg = match &g.config {
        Some(p) => Config::from_json(&std::fs::read_to_string(p)?)?,
        None => Config::default(),
    };
    if let Some(v) = g.k_dict {
        cfg.k_dict = v;
    }
    if let Some(v) = g.n_direct {
        cfg.n_direct = v;
    }
    if let Some(v) = g.n_tail {
        cfg.n_tail = v;
    }
    if let Some(v) = g.tol_newton {
        cfg.newton_step_tol = v;
    }
    if let Some(v) = g.tol_cluster {
        cfg.cluster_radius = v;
    }
    if let Some(v) = g.tol_case_zero {
        cfg.case_zero_tol = v;
    }
    if let Some(v) = g.tol_case_ambiguous {
        cfg.case_ambiguous_tol = v;
    }
    if let Some(v) = g.tol_condition {
        cfg.condition_limit = v;
    }
    if let Some(v) = g.tol_denominator {
        cfg.denominator_guard = v;
    }
    Ok(cfg)
}

fn read_h(path: &Path) -> Result<Vec<Complex64>> {
    let text = std::fs::read_to_string(path)?;
    if let Ok(list) = serde_json::from_str::<Vec<Pair>>(&text) {
        return Ok(list.into_iter().map(io::from_pair).collect());
    }
    Ok(ProblemFile::from_json(&text)?.h())
}

fn write_json(path: Option<&Path>, v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v)? + "\n";
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn series_json(s: &CosineSeries) -> Value {
    json!(s.coeffs.iter().map(|&c| io::to_pair(c)).collect::<Vec<_>>())
}

fn max_residual(problem: &GraphProblem, s: &Spectrum) -> f64 {
    s.entries
        .iter()
        .map(|e| forward::relative_residual(problem, e.lambda))
        .fold(0.0, f64::max)
}

fn cmd_forward(cfg: &Config, problem: &Path, shells: usize, out: &Path, require_star: bool) -> Result<i32> {
    let mut file = ProblemFile::read(problem)?;
    let gp = file.to_problem(cfg.k_out)?;
    if require_star && gp.hconf.class != HClass::Star {
        eprintln!("warning: {}", gp.hconf.describe());
    }
    let spectrum = forward::eigenvalues(&gp, shells, cfg)?;
    let prov = Provenance {
        generator: format!("star-spectral {} forward", env!("CARGO_PKG_VERSION")),
        shells: Some(shells),
        h: Some(file.h.clone()),
        max_relative_residual: Some(max_residual(&gp, &spectrum)),
        seed: None,
        config: Some(cfg.clone()),
    };
    SpectrumFile::from_spectrum(&spectrum, prov).write(out)?;
    Ok(0)
}

struct InverseOutcome {
    easy: Option<Vec<CosineSeries>>,
    riesz: Option<Vec<CosineSeries>>,
    report: serde_json::Map<String, Value>,
}

/// Cap the product truncation at the available data.
fn fit_config(cfg: &Config, shells: usize) -> Config {
    let mut c = cfg.clone();
    c.n_direct = c.n_direct.min(shells);
    c
}

fn run_inverse(cfg: &Config, spectrum: &Spectrum, hconf: &HConfiguration, n: usize, method: Method) -> Result<InverseOutcome> {
    let cfg = fit_config(cfg, spectrum.shells());
    let mut report = serde_json::Map::new();
    let mut easy = None;
    let mut riesz = None;
    if method != Method::Riesz {
        let (p, r) = reconstruct_method2(spectrum, hconf, n, cfg.k_out, Method2Solver::LeastSquares, &cfg)?;
        report.insert("easy".into(), serde_json::to_value(r)?);
        easy = Some(p);
    }
    if method != Method::Easy {
        let (p, r) = reconstruct_method1(spectrum, hconf, n.min(spectrum.shells()), cfg.k_dict, &cfg)?;
        report.insert("riesz".into(), serde_json::to_value(r)?);
        riesz = Some(p);
    }
    if let (Some(a), Some(b)) = (&easy, &riesz) {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| y.relative_l2_error(x)).collect();
        report.insert("cross_method_distance".into(), json!(d));
    }
    Ok(InverseOutcome { easy, riesz, report })
}

fn errors_against(p: &[CosineSeries], truth: &[CosineSeries]) -> Vec<f64> {
    p.iter().zip(truth).map(|(a, t)| a.relative_l2_error(t)).collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_inverse(
    cfg: &Config,
    spectrum: &Path,
    h: &Path,
    method: Method,
    shells: Option<usize>,
    sums: bool,
    out: &Path,
    report_path: Option<&Path>,
    truth: Option<&Path>,
) -> Result<i32> {
    let spec = SpectrumFile::read(spectrum)?.to_spectrum()?;
    let hconf = classify_h(&read_h(h)?)?;
    if spec.m != hconf.m() {
        return Err(Error::Schema(format!("spectrum has m = {}, h has {} entries", spec.m, hconf.m())));
    }
    let n = shells.unwrap_or(spec.shells());
    match hconf.class {
        HClass::Star if !sums => {}
        HClass::Bullet if sums => {
            let cfg = fit_config(cfg, spec.shells());
            let split = degenerate_split(&spec.values(), &hconf, &cfg)?;
            let (groups, report) = reconstruct_sums_degenerate(&split, &hconf, n, cfg.k_out, &cfg)?;
            let out_groups: Vec<Value> = hconf
                .groups
                .iter()
                .enumerate()
                .map(|(g, grp)| {
                    let edges: Vec<usize> = hconf.group_edges(g).iter().map(|e| e + 1).collect();
                    json!({ "edges": edges, "h": io::to_pair(hconf.h[grp.rep]), "sum": series_json(&groups[g]) })
                })
                .collect();
            write_json(Some(out), &json!({ "schema_version": io::SCHEMA_VERSION, "groups": out_groups }))?;
            write_json(report_path, &json!({ "sums": report, "mu_copies": split.mu_part.len() }))?;
            return Ok(0);
        }
        HClass::Bullet => {
            return Err(Error::Inadmissible(
                "repeated Robin coefficients: the spectrum determines only the sums of p_j over equal h_j, \
                 not the individual densities; rerun with --sums"
                    .into(),
            ))
        }
        _ if sums => {
            return Err(Error::InvalidInput(
                "--sums applies only to repeated Robin coefficients".into(),
            ))
        }
        _ => return Err(Error::Inadmissible(hconf.describe())),
    }
    let mut outcome = run_inverse(cfg, &spec, &hconf, n, method)?;
    if let Some(t) = truth {
        let truth = ProblemFile::read(t)?.densities(cfg.k_out)?;
        if let Some(p) = &outcome.easy {
            outcome.report.insert("easy_error".into(), json!(errors_against(p, &truth)));
        }
        if let Some(p) = &outcome.riesz {
            outcome.report.insert("riesz_error".into(), json!(errors_against(p, &truth)));
        }
    }
    let p = outcome.easy.or(outcome.riesz).unwrap_or_default();
    ProblemFile::from_parts(&hconf.h, &p).write(out)?;
    write_json(report_path, &Value::Object(outcome.report))?;
    Ok(0)
}

fn cmd_characterize(cfg: &Config, spectrum: &Path, h: &Path) -> Result<i32> {
    let spec = SpectrumFile::read(spectrum)?.to_spectrum()?;
    let hconf = classify_h(&read_h(h)?)?;
    let report = check_admissible(&spec.values(), &hconf, cfg);
    let plateau: Vec<f64> = report.profiles.iter().map(|p| p.plateau_ratio).collect();
    let verdict = match &report.verdict {
        Verdict::Admissible => json!({ "verdict": "admissible" }),
        Verdict::Inadmissible(r) => json!({ "verdict": "inadmissible", "reason": r }),
        Verdict::Indeterminate(r) => json!({ "verdict": "indeterminate", "reason": r }),
    };
    write_json(
        None,
        &json!({
            "h_class": hconf.describe(),
            "result": verdict,
            "plateau_ratio": plateau,
            "multiple": report.multiple.len(),
        }),
    )?;
    Ok(0)
}

fn cmd_adjoint_check(cfg: &Config, problem: &Path, shells: usize, tol: f64) -> Result<i32> {
    let gp = ProblemFile::read(problem)?.to_problem(cfg.k_out)?;
    let direct = forward::eigenvalues(&gp, shells, cfg)?;
    let adjoint = forward::lstar_eigenvalues(&gp, shells, cfg)?;
    let dev = direct
        .entries
        .iter()
        .zip(&adjoint.entries)
        .map(|(a, b)| (a.lambda.conj() - b.lambda).norm())
        .fold(0.0, f64::max);
    write_json(None, &json!({ "shells": shells, "max_conjugacy_deviation": dev, "tolerance": tol }))?;
    Ok(if dev <= tol { 0 } else { 3 })
}

fn probe_points(count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|i| {
            let t = i as f64 / count.max(1) as f64;
            Complex64::new(-4.0 + 150.0 * t, 3.0 * (2.0 * PI * t).sin())
        })
        .collect()
}

fn euler_template(m: usize) -> AsymptoticTemplate {
    let branch = |kind| Branch {
        kind,
        z: Complex64::default(),
        mu_edge: None,
    };
    let mut branches = vec![branch(BranchKind::Integer)];
    branches.extend((1..m).map(|_| branch(BranchKind::HalfInteger)));
    AsymptoticTemplate {
        m,
        z1: Complex64::default(),
        zk: vec![Complex64::default(); m - 1],
        branches,
    }
}

fn cmd_products_check(cfg: &Config, problem: Option<&Path>, m: usize, shells: usize, probes: usize, tol: Option<f64>) -> Result<i32> {
    let pts = probe_points(probes);
    let (worst, extra, tol) = match problem {
        None => {
            if m < 2 {
                return Err(Error::InvalidInput("m must be at least 2".into()));
            }
            let t = euler_template(m);
            let vals: Vec<Complex64> = (0..shells)
                .flat_map(|n| {
                    let nf = n as f64;
                    (0..m).map(move |k| Complex64::new(if k == 0 { nf * nf } else { (nf + 0.5) * (nf + 0.5) }, 0.0))
                })
                .collect();
            let s = Spectrum::from_shells(m, &vals, NumberingSource::Template)?;
            let pcf = ProductCharFn::new(&s, &t, shells, shells)?;
            let worst = pts
                .iter()
                .map(|&lam| {
                    let rho = lam.sqrt();
                    let want = m as f64 * -rho * (PI * rho).sin() * (PI * rho).cos().powu(m as u32 - 1);
                    (delta_from_spectrum(&pcf, lam) - want).norm() / want.norm().max(1.0)
                })
                .fold(0.0, f64::max);
            (worst, Value::Null, tol.unwrap_or(1e-10))
        }
        Some(path) => {
            let gp = ProblemFile::read(path)?.to_problem(cfg.k_out)?;
            gp.hconf.require_star()?;
            let s = forward::eigenvalues(&gp, shells, cfg)?;
            let t = gp.template();
            let pcf = ProductCharFn::new(&s, &t, cfg.n_direct.min(shells), cfg.n_tail)?;
            let worst = pts
                .iter()
                .map(|&lam| {
                    let want = forward::delta(&gp, lam);
                    let scale = forward::local_scale(|z| forward::delta(&gp, z), lam);
                    (delta_from_spectrum(&pcf, lam) - want).norm() / scale.max(f64::MIN_POSITIVE)
                })
                .fold(0.0, f64::max);
            let lf = leading_form_check(&pcf, &t, &[20.3, 40.7, 80.1]);
            (worst, serde_json::to_value(lf)?, tol.unwrap_or(1e-4))
        }
    };
    write_json(None, &json!({ "max_relative_residual": worst, "tolerance": tol, "leading_form": extra }))?;
    Ok(if worst <= tol { 0 } else { 3 })
}

/// Cosine coefficients drawn uniformly from the unit disk.
fn random_densities(rng: &mut ChaCha8Rng, m: usize, modes: usize) -> Vec<CosineSeries> {
    (0..m)
        .map(|_| {
            CosineSeries::new(
                (0..modes)
                    .map(|_| {
                        let r: f64 = rng.gen::<f64>().sqrt();
                        let t: f64 = rng.gen_range(0.0..2.0 * PI);
                        Complex64::from_polar(r, t)
                    })
                    .collect(),
            )
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_roundtrip(
    cfg: &Config,
    seed: u64,
    h: Option<Vec<Complex64>>,
    m: usize,
    modes: usize,
    shells: usize,
    method: Method,
    tol: f64,
    out: Option<&Path>,
) -> Result<i32> {
    let h = h.unwrap_or_else(|| (0..m).map(|j| Complex64::new(j as f64, 0.0)).collect());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = random_densities(&mut rng, h.len(), modes);
    let gp = GraphProblem::new(h.clone(), p.clone())?;
    gp.hconf.require_star()?;
    let spec = forward::eigenvalues(&gp, shells, cfg)?;
    let n_eq = shells.min(if method == Method::Easy { shells } else { 200 });
    let mut outcome = run_inverse(cfg, &spec, &gp.hconf, n_eq, method)?;
    let mut worst: f64 = 0.0;
    if let Some(r) = &outcome.easy {
        let e = errors_against(r, &p);
        worst = e.iter().copied().fold(worst, f64::max);
        outcome.report.insert("easy_error".into(), json!(e));
    }
    if let Some(r) = &outcome.riesz {
        let e = errors_against(r, &p);
        worst = e.iter().copied().fold(worst, f64::max);
        outcome.report.insert("riesz_error".into(), json!(e));
    }
    outcome.report.insert("seed".into(), json!(seed));
    outcome.report.insert("h".into(), json!(h.iter().map(|&z| io::to_pair(z)).collect::<Vec<_>>()));
    outcome.report.insert("p".into(), json!(p.iter().map(series_json).collect::<Vec<_>>()));
    outcome.report.insert("max_relative_residual".into(), json!(max_residual(&gp, &spec)));
    outcome.report.insert("max_error".into(), json!(worst));
    write_json(out, &Value::Object(outcome.report))?;
    Ok(if worst <= tol { 0 } else { 3 })
}

#[allow(clippy::too_many_arguments)]
fn cmd_emit_plot(
    cfg: &Config,
    kind: PlotKind,
    problem: Option<&Path>,
    spectrum: Option<&Path>,
    from: f64,
    to: f64,
    points: usize,
    out: &Path,
) -> Result<i32> {
    let need = |p: Option<&Path>, what: &str| p.map(Path::to_path_buf).ok_or_else(|| Error::InvalidInput(format!("--{what} is required")));
    let text = match kind {
        PlotKind::Delta => {
            let gp = ProblemFile::read(&need(problem, "problem")?)?.to_problem(cfg.k_out)?;
            let rows: Vec<Vec<f64>> = (0..points.max(2))
                .map(|i| {
                    let lam = from + (to - from) * i as f64 / (points.max(2) - 1) as f64;
                    let d = forward::delta(&gp, Complex64::new(lam, 0.0));
                    vec![lam, d.norm(), d.re, d.im]
                })
                .collect();
            io::csv(&["lambda", "abs_delta", "re_delta", "im_delta"], &rows)
        }
        PlotKind::Spectrum => {
            let s = SpectrumFile::read(&need(spectrum, "spectrum")?)?.to_spectrum()?;
            let rows: Vec<Vec<f64>> = s
                .entries
                .iter()
                .map(|e| vec![e.n as f64, e.k as f64, e.lambda.re, e.lambda.im, e.multiplicity as f64])
                .collect();
            io::csv(&["n", "k", "re_lambda", "im_lambda", "multiplicity"], &rows)
        }
        PlotKind::Density => {
            let p = ProblemFile::read(&need(problem, "problem")?)?.densities(cfg.k_out)?;
            let mut header = vec!["x".to_string()];
            for j in 1..=p.len() {
                header.push(format!("re_p{j}"));
                header.push(format!("im_p{j}"));
            }
            let rows: Vec<Vec<f64>> = (0..points.max(2))
                .map(|i| {
                    let x = PI * i as f64 / (points.max(2) - 1) as f64;
                    let mut r = vec![x];
                    for s in &p {
                        let v = s.eval(x);
                        r.push(v.re);
                        r.push(v.im);
                    }
                    r
                })
                .collect();
            let h: Vec<&str> = header.iter().map(String::as_str).collect();
            io::csv(&h, &rows)
        }
    };
    std::fs::write(out, text)?;
    Ok(0)
}

fn run(cli: Cli) -> Result<i32> {
    let cfg = load_config(&cli.global)?;
    match cli.command {
        Command::Forward {
            problem,
            shells,
            out,
            require_star,
        } => cmd_forward(&cfg, &problem, shells, &out, require_star),
        Command::Inverse {
            spectrum,
            h,
            method,
            shells,
            sums,
            out,
            report,
            truth,
        } => cmd_inverse(&cfg, &spectrum, &h, method, shells, sums, &out, report.as_deref(), truth.as_deref()),
        Command::Characterize { spectrum, h } => cmd_characterize(&cfg, &spectrum, &h),
        Command::AdjointCheck { problem, shells, tol } => cmd_adjoint_check(&cfg, &problem, shells, tol),
        Command::ProductsCheck {
            problem,
            m,
            shells,
            probes,
            tol,
        } => cmd_products_check(&cfg, problem.as_deref(), m, shells, probes, tol),
        Command::Roundtrip {
            h,
            m,
            modes,
            shells,
            method,
            tol,
            out,
        } => cmd_roundtrip(&cfg, cli.global.seed, h, m, modes, shells, method, tol, out.as_deref()),
        Command::EmitPlot {
            kind,
            problem,
            spectrum,
            from,
            to,
            points,
            out,
        } => cmd_emit_plot(&cfg, kind, problem.as_deref(), spectrum.as_deref(), from, to, points, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use poincare::certificates::{bisect_delta_with, certify_area_with, certify_delta_with, standard_grids, CertContext, DeltaStatus};
use poincare::config::{AreaMode, RunConfig};
use poincare::dynamics::{chebyshev_semiconjugacy_check, UnimodalQuadratic};
use poincare::oracles::{box_counting_dimension, cascade_lambda_oracle, dimension_csv, escape_fraction_mc, render_escape_time, RenderWindow};
use poincare::renorm::{
    build_domain_system, cvitanovic_solve, itinerary_matches, lemma_class_csv, lemma_class_report, locate_superattracting_parameter,
    CombinatoricsSpec, Seed, Sign, SolverOptions,
};
use poincare::report::{to_json, write_text, Manifest};
use poincare::series::{
    chebyshev_expansion_check, expansion_lemma_sweep, family_sup, level_sums_csv, measure_expansion_profile, parse_family, ProfileRequest,
    SupOptions, SweepOptions,
};
use poincare::{Complex64, Error};

const EXIT_FAILED: u8 = 2;
const EXIT_CRASH: u8 = 1;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "poincare", version, about = "Poincaré series, critical-exponent and area certificates for quadratic maps near Chebyshev")]
struct Cli {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker thread cap (overrides POINCARE_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory (overrides POINCARE_OUT_DIR).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Extra configuration override, repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct SystemArgs {
    #[arg(long)]
    period: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Locate a superattracting parameter by its itinerary.
    FindParam {
        #[arg(long)]
        period: Option<usize>,
        /// Period-doubling level n (period 2^n) instead of the Chebyshev-side itinerary.
        #[arg(long, conflicts_with = "pattern")]
        doubling: Option<u32>,
        /// Explicit signs of f^i(0), i = 1..p-1, such as "+--".
        #[arg(long)]
        pattern: Option<String>,
        #[arg(long, default_value_t = 1e-13)]
        tol: f64,
    },
    /// Solve the renormalization functional equation by collocation.
    FixedPoint {
        #[arg(long)]
        period: Option<usize>,
        #[arg(long)]
        degree: Option<usize>,
        /// double or extended.
        #[arg(long)]
        precision: Option<String>,
    },
    /// Build the nested domain system and report its geometry.
    Domains {
        #[command(flatten)]
        system: SystemArgs,
    },
    /// Truncated Poincaré series of one orbit family.
    Series {
        #[command(flatten)]
        system: SystemArgs,
        /// Family in arrow notation, for example "A'<-[U\V']-+A'".
        #[arg(long)]
        family: String,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Certify an upper bound on the critical exponent.
    CertifyDelta {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, conflicts_with = "delta_range")]
        delta: Option<f64>,
        /// Bisect for the smallest certified delta in LO,HI.
        #[arg(long, value_delimiter = ',', value_name = "LO,HI")]
        delta_range: Option<Vec<f64>>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        depth: Option<usize>,
        /// direct or paper-inequality.
        #[arg(long)]
        mode: Option<String>,
    },
    /// Run the area induction and the Monte Carlo cross-check.
    CertifyArea {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        k_max: Option<usize>,
        /// direct or paper-threshold.
        #[arg(long)]
        area_mode: Option<String>,
        #[arg(long)]
        mc_samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Box-counting dimension of a Julia set.
    Dimension {
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
        /// Use the superattracting parameter of this period.
        #[arg(long, conflicts_with = "c")]
        period: Option<usize>,
        /// Comma-separated ascending list of boxes per side.
        #[arg(long)]
        resolutions: Option<String>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Period-doubling scaling factor from closest returns.
    Cascade {
        #[arg(long)]
        n_max: Option<u32>,
    },
    /// Geometry table, semi-conjugacy and expansion checks.
    LemmaChecks {
        #[arg(long)]
        period: Option<usize>,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 5)]
        p_lo: usize,
        #[arg(long, default_value_t = 11)]
        p_hi: usize,
        /// Radius of V' for the expansion sweep.
        #[arg(long, default_value_t = 0.1)]
        sweep_rho: f64,
    },
    /// Escape-time render of a filled Julia set.
    Render {
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
        #[arg(long, conflicts_with = "c")]
        period: Option<usize>,
        #[arg(long, default_value_t = 800)]
        width: usize,
        #[arg(long, default_value_t = 600)]
        height: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        center_re: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        center_im: f64,
        #[arg(long, default_value_t = 2.2)]
        half_width: f64,
        #[arg(long)]
        max_iter: Option<usize>,
        /// ppm, or png when built with the `png` feature.
        #[arg(long, default_value = "ppm")]
        format: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::FindParam { .. } => "find-param",
            Self::FixedPoint { .. } => "fixed-point",
            Self::Domains { .. } => "domains",
            Self::Series { .. } => "series",
            Self::CertifyDelta { .. } => "certify-delta",
            Self::CertifyArea { .. } => "certify-area",
            Self::Dimension { .. } => "dimension",
            Self::Cascade { .. } => "cascade",
            Self::LemmaChecks { .. } => "lemma-checks",
            Self::Render { .. } => "render",
        }
    }

    /// Flag values that override the configuration, as `(key, value)` pairs.
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut put = |key: &'static str, v: Option<String>| {
            if let Some(v) = v {
                out.push((key, v));
            }
        };
        let s = |v: &Option<f64>| v.map(|x| format!("{x:?}"));
        match self {
            Self::FindParam { period, .. } => put("period", period.map(|p| p.to_string())),
            Self::FixedPoint { period, degree, precision } => {
                put("period", period.map(|p| p.to_string()));
                put("degree", degree.map(|d| d.to_string()));
                put("precision", precision.clone());
            }
            Self::Domains { system } => system_overrides(system, &mut put),
            Self::Series { system, delta, depth, .. } => {
                system_overrides(system, &mut put);
                put("delta", s(delta));
                put("depth", depth.map(|d| d.to_string()));
            }
            Self::CertifyDelta { system, delta, delta_range, tol, depth, mode } => {
                system_overrides(system, &mut put);
                put("delta", s(delta));
                if let Some(r) = delta_range {
                    put("delta_lo", Some(format!("{:?}", r[0])));
                    put("delta_hi", Some(format!("{:?}", r[1])));
                }
                put("delta_tol", s(tol));
                put("depth", depth.map(|d| d.to_string()));
                put("recursion_mode", mode.clone());
            }
            Self::CertifyArea { system, k_max, area_mode, mc_samples, seed } => {
                system_overrides(system, &mut put);
                put("k_max", k_max.map(|k| k.to_string()));
                put("area_mode", area_mode.clone());
                put("mc_samples", mc_samples.map(|k| k.to_string()));
                put("seed", seed.map(|k| k.to_string()));
            }
            Self::Dimension { period, resolutions, max_iter, .. } => {
                put("period", period.map(|p| p.to_string()));
                put("resolutions", resolutions.clone());
                put("max_iter", max_iter.map(|m| m.to_string()));
            }
            Self::Cascade { n_max } => put("n_max", n_max.map(|n| n.to_string())),
            Self::LemmaChecks { period, kappa, eps, .. } => {
                put("period", period.map(|p| p.to_string()));
                put("kappa", s(kappa));
                put("eps", s(eps));
            }
            Self::Render { period, max_iter, .. } => {
                put("period", period.map(|p| p.to_string()));
                put("max_iter", max_iter.map(|m| m.to_string()));
            }
        }
        out
    }
}

fn system_overrides(system: &SystemArgs, put: &mut impl FnMut(&'static str, Option<String>)) {
    put("period", system.period.map(|p| p.to_string()));
    put("rho", system.rho.map(|r| format!("{r:?}")));
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

/// Whether the pipeline reached its goal.
enum Verdict {
    Success,
    NotCertified,
}

/// Output directory plus the artifacts written so far.
struct Sink {
    dir: PathBuf,
    artifacts: Vec<String>,
}

impl Sink {
    fn text(&mut self, name: &str, text: &str) -> Result<PathBuf, Error> {
        let path = self.dir.join(name);
        write_text(text, &path)?;
        self.artifacts.push(name.to_string());
        Ok(path)
    }

    fn json<T: Serialize>(&mut self, name: &str, record: &T) -> Result<PathBuf, Error> {
        self.text(name, &to_json(record)?)
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn assemble_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(usage)?,
        None => RunConfig::default(),
    };
    if let Ok(v) = std::env::var("POINCARE_THREADS") {
        cfg.set("threads", &v).map_err(|e| Failure::Usage(format!("POINCARE_THREADS: {e}")))?;
    }
    if let Ok(v) = std::env::var("POINCARE_OUT_DIR") {
        cfg.set("out_dir", &v).map_err(|e| Failure::Usage(format!("POINCARE_OUT_DIR: {e}")))?;
    }
    for kv in &cli.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k.trim(), v).map_err(usage)?;
    }
    if let Command::CertifyDelta { delta_range: Some(r), .. } = &cli.command {
        if r.len() != 2 {
            return Err(Failure::Usage(format!("--delta-range expects LO,HI, got {} values", r.len())));
        }
    }
    for (k, v) in cli.command.overrides() {
        cfg.set(k, &v).map_err(usage)?;
    }
    if let Some(t) = cli.threads {
        cfg.set("threads", &t.to_string()).map_err(usage)?;
    }
    if let Some(d) = &cli.out_dir {
        cfg.set("out_dir", &d.display().to_string()).map_err(usage)?;
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn parameter(period: usize) -> Result<f64, Error> {
    Ok(locate_superattracting_parameter(&CombinatoricsSpec::closest_to_chebyshev(period)?, 1e-13)?.c)
}

fn need_domain_period(cfg: &RunConfig) -> Result<(), Failure> {
    if cfg.period < 3 {
        return Err(Failure::Usage(format!("period {} has no domain system (need period >= 3)", cfg.period)));
    }
    Ok(())
}

fn parse_pattern(s: &str) -> Result<Vec<Sign>, Failure> {
    s.chars()
        .map(|ch| match ch {
            '+' => Ok(Sign::Plus),
            '-' => Ok(Sign::Minus),
            _ => Err(Failure::Usage(format!("pattern `{s}` may contain only `+` and `-`"))),
        })
        .collect()
}

fn run(cmd: &Command, cfg: &RunConfig, sink: &mut Sink) -> Result<Verdict, Failure> {
    match cmd {
        Command::FindParam { doubling, pattern, tol, .. } => {
            let spec = match (doubling, pattern) {
                (Some(n), _) => CombinatoricsSpec::period_doubling(*n).map_err(usage)?,
                (None, Some(p)) => CombinatoricsSpec::new(p.len() + 1, parse_pattern(p)?).map_err(usage)?,
                (None, None) => CombinatoricsSpec::closest_to_chebyshev(cfg.period).map_err(usage)?,
            };
            let root = locate_superattracting_parameter(&spec, *tol)?;
            let ok = itinerary_matches(&UnimodalQuadratic::new(root.c)?, &spec);
            let record = json!({ "period": spec.period, "pattern": spec.pattern_string(), "root": root, "itinerary_verified": ok });
            sink.json("find-param.json", &record)?;
            println!("period {}: c = {:.17} (residual {:e}, itinerary {})", spec.period, root.c, root.residual, if ok { "ok" } else { "MISMATCH" });
            Ok(if ok { Verdict::Success } else { Verdict::NotCertified })
        }
        Command::FixedPoint { .. } => {
            let c = parameter(cfg.period)?;
            let opts = SolverOptions { precision: cfg.precision, ..SolverOptions::default() };
            let sol = cvitanovic_solve(cfg.period, cfg.degree, &Seed::Parameter(c), &opts)?;
            sink.json("fixed-point.json", &sol)?;
            println!(
                "p = {}, N = {}: lambda = {:.12}, 1/|lambda| = {:.10}, residual {:.3e}, off-node residual {:.3e}",
                sol.period,
                sol.degree,
                sol.lambda,
                1.0 / sol.lambda.abs(),
                sol.residual,
                sol.off_node_residual
            );
            Ok(Verdict::Success)
        }
        Command::Domains { .. } => {
            need_domain_period(cfg)?;
            let f = UnimodalQuadratic::new(parameter(cfg.period)?)?;
            let ds = build_domain_system(&f, cfg.period, cfg.rho)?;
            let summary = ds.summary();
            sink.json("domains.json", &summary)?;
            println!(
                "p = {}, c = {:.16}: lambda = {:.6e}, diam U' = {:.6e}, V radius = {:.6e}, return time {:?}",
                summary.period, summary.c, summary.lambda, summary.u_prime_diameter, summary.v_radius, summary.return_time
            );
            Ok(Verdict::Success)
        }
        Command::Series { family, .. } => {
            need_domain_period(cfg)?;
            let f = UnimodalQuadratic::new(parameter(cfg.period)?)?;
            let ds = build_domain_system(&f, cfg.period, cfg.rho)?;
            let fam = parse_family(family, Some(&ds)).map_err(usage)?;
            let budgets = cfg.budgets();
            let (ga, gu, gout) = standard_grids(&ds, &budgets)?;
            let grid = ga.merged(&gu).merged(&gout).filtered(&fam.target);
            if grid.is_empty() {
                return Err(Error::EmptyGrid.into());
            }
            let req = ProfileRequest {
                via: &fam.via,
                sources: &fam.source,
                terminals: &grid,
                depth: budgets.profile_depth,
                samples: budgets.profile_samples,
                guard_radius: cfg.rho * (1.0 - 1e-9),
                require_expansion: true,
            };
            let tail = match measure_expansion_profile(&f, &req) {
                Ok(p) => Some(p),
                Err(e) => {
                    eprintln!("no tail profile for {}: {e}", fam.label);
                    None
                }
            };
            let opts = SupOptions { node_budget: Some(budgets.node_budget), prune: None, tail, postcritical: ds.postcritical_outside() };
            let bound = family_sup(&f, &fam, cfg.delta, &grid, cfg.depth, &opts)?;
            sink.json("series.json", &bound)?;
            sink.text("series-levels.csv", &level_sums_csv(&bound.levels))?;
            println!(
                "{} at delta = {}: estimate {:.6e}, upper {:.6e} (tail {:.3e}) over {} terminals",
                bound.family, bound.delta, bound.point_estimate, bound.upper_bound, bound.tail_bound, bound.terminals
            );
            Ok(Verdict::Success)
        }
        Command::CertifyDelta { delta_range, .. } => {
            need_domain_period(cfg)?;
            if delta_range.is_none() && !(cfg.delta > 1.0 && cfg.delta <= 2.0) {
                return Err(Failure::Usage(format!("delta = {} must lie in (1, 2]", cfg.delta)));
            }
            let ctx = CertContext::build(cfg.period, cfg.rho, cfg.budgets())?;
            if delta_range.is_some() {
                match bisect_delta_with(&ctx, (cfg.delta_lo, cfg.delta_hi), cfg.delta_tol) {
                    Ok(b) => {
                        sink.json("certify-delta.json", &b)?;
                        sink.text("certify-delta.txt", &b.certificate.summary())?;
                        println!("delta* = {} (tolerance {}), {} evaluations", b.delta_star, b.tolerance, b.chain.len());
                        Ok(Verdict::Success)
                    }
                    Err(Error::UncertifiableRange) => {
                        let record = json!({ "period": cfg.period, "rho": cfg.rho, "range": [cfg.delta_lo, cfg.delta_hi], "status": "NONE" });
                        sink.json("certify-delta.json", &record)?;
                        println!("no certified delta in [{}, {}]", cfg.delta_lo, cfg.delta_hi);
                        Ok(Verdict::NotCertified)
                    }
                    Err(e) => Err(e.into()),
                }
            } else {
                let cert = certify_delta_with(&ctx, cfg.delta)?;
                sink.json("certify-delta.json", &cert)?;
                sink.text("certify-delta.txt", &cert.summary())?;
                print!("{}", cert.summary());
                match cert.status {
                    DeltaStatus::Certified => Ok(Verdict::Success),
                    DeltaStatus::Error => Err(Failure::Runtime(Error::Config(cert.error.clone().unwrap_or_else(|| "certificate error".into())))),
                    _ => Ok(Verdict::NotCertified),
                }
            }
        }
        Command::CertifyArea { .. } => {
            need_domain_period(cfg)?;
            let ctx = CertContext::build(cfg.period, cfg.rho, cfg.budgets())?;
            let cert = certify_area_with(&ctx, cfg.k_max)?;
            let mc = escape_fraction_mc(&ctx.ds, 1, cfg.mc_samples, cfg.mc_budget, cfg.seed)?;
            let u1 = cert.u_trace.get(1).copied().unwrap_or(f64::INFINITY);
            let consistent = mc.consistent_with(u1 + cert.area_ratio);
            sink.json("certify-area.json", &cert)?;
            sink.json("escape-fraction.json", &json!({ "estimate": mc, "u1_bound": u1, "area_ratio": cert.area_ratio, "consistent": consistent }))?;
            sink.text("escape-fraction.csv", &poincare::oracles::fraction_csv(std::slice::from_ref(&mc)))?;
            sink.text("certify-area.txt", &cert.summary())?;
            print!("{}", cert.summary());
            println!(
                "  escape fraction at k = 1: {:.3e} [{:.3e}, {:.3e}], consistent with u^1 bound: {consistent}",
                mc.fraction, mc.ci_low, mc.ci_high
            );
            let status = match cfg.area_mode {
                AreaMode::Direct => cert.direct_status,
                AreaMode::PaperThreshold => cert.paper_threshold_status,
            };
            Ok(if status == poincare::certificates::AreaStatus::Certified { Verdict::Success } else { Verdict::NotCertified })
        }
        Command::Dimension { c, .. } => {
            let c = match c {
                Some(c) => *c,
                None => parameter(cfg.period)?,
            };
            let est = box_counting_dimension(c, &cfg.resolutions, cfg.max_iter)?;
            sink.json("dimension.json", &est)?;
            sink.text("dimension.csv", &dimension_csv(&est))?;
            println!("c = {c}: dimension {:.4} (fit residual {:.2e}, {} points)", est.value, est.fit_residual, est.fit_points);
            Ok(Verdict::Success)
        }
        Command::Cascade { .. } => {
            let est = cascade_lambda_oracle(cfg.n_max)?;
            sink.json("cascade.json", &est)?;
            println!("lambda = {:.10} +- {:.2e}, 1/|lambda| = {:.8}", est.lambda, est.error_bar, est.inverse_abs);
            Ok(Verdict::Success)
        }
        Command::LemmaChecks { p_lo, p_hi, sweep_rho, .. } => {
            if p_lo > p_hi || *p_lo < 3 || *p_hi > 14 {
                return Err(Failure::Usage(format!("period range {p_lo}..={p_hi} must lie within 3..=14")));
            }
            let rows = lemma_class_report(*p_lo, *p_hi, cfg.rho)?;
            let semi = chebyshev_semiconjugacy_check(10_000, (1.01, 3.0))?;
            let cheb = chebyshev_expansion_check(&[6, 8, 10, 12], 0.1, 64)?;
            let sweep = expansion_lemma_sweep(cfg.period, cfg.kappa, cfg.eps, &SweepOptions { rho: *sweep_rho, ..SweepOptions::default() })?;
            let semi_ok = semi.max_residual < 1e-12;
            let pass = semi_ok && cheb.stable && sweep.critical_value_pass && sweep.escape_pass;
            sink.text("lemma-class.csv", &lemma_class_csv(&rows))?;
            let record = json!({
                "lemma_class": rows,
                "semiconjugacy": semi,
                "semiconjugacy_pass": semi_ok,
                "chebyshev_expansion": cheb,
                "expansion_sweep": sweep,
                "critical_value_margin": sweep.critical_value_margin(),
                "escape_margin": sweep.escape_margin(),
                "pass": pass,
            });
            sink.json("lemma-checks.json", &record)?;
            println!("semi-conjugacy residual {:.2e} ({})", semi.max_residual, if semi_ok { "pass" } else { "FAIL" });
            println!("Chebyshev K_est {:?}, spread {:.3} ({})", cheb.k_est, cheb.k_spread, if cheb.stable { "stable" } else { "UNSTABLE" });
            println!("p = {}: critical-value margin {:+.3}, escape margin {:+.3}", sweep.p, sweep.critical_value_margin(), sweep.escape_margin());
            Ok(if pass { Verdict::Success } else { Verdict::NotCertified })
        }
        Command::Render { c, width, height, center_re, center_im, half_width, format, .. } => {
            let c = match c {
                Some(c) => *c,
                None => parameter(cfg.period)?,
            };
            let window = RenderWindow { center: Complex64::new(*center_re, *center_im), half_width: *half_width };
            let img = render_escape_time(c, *width, *height, window, cfg.max_iter).map_err(usage)?;
            match format.as_str() {
                "ppm" => {
                    let path = sink.dir.join("render.ppm");
                    std::fs::create_dir_all(&sink.dir).map_err(Error::from)?;
                    img.write_ppm(&path)?;
                    sink.artifacts.push("render.ppm".into());
                }
                #[cfg(feature = "png")]
                "png" => {
                    let path = sink.dir.join("render.png");
                    std::fs::create_dir_all(&sink.dir).map_err(Error::from)?;
                    img.write_png(&path)?;
                    sink.artifacts.push("render.png".into());
                }
                other => return Err(Failure::Usage(format!("unsupported image format `{other}`"))),
            }
            println!("rendered {width}x{height} escape-time image of c = {c}");
            Ok(Verdict::Success)
        }
    }
}

fn write_manifest(dir: &Path, command: &str, cfg: &RunConfig, started: Instant, exit_code: u8, artifacts: Vec<String>) {
    let manifest = Manifest {
        tool: "poincare".into(),
        version: poincare::VERSION.into(),
        command: command.into(),
        argv: std::env::args().collect(),
        config: serde_json::to_value(cfg).unwrap_or(serde_json::Value::Null),
        threads: rayon::current_num_threads(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        exit_code: exit_code as i32,
        artifacts,
    };
    let result = to_json(&manifest).and_then(|text| write_text(&text, &dir.join(format!("{command}.manifest.json"))));
    if let Err(e) = result {
        eprintln!("could not write the manifest: {e}");
    }
}

fn main() -> ExitCode {
    let started = Instant::now();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match assemble_config(&cli) {
        Ok(cfg) => cfg,
        Err(Failure::Usage(msg)) | Err(Failure::Runtime(Error::Config(msg))) => {
            eprintln!("error: {msg}\n\nRun `poincare --help` for usage.");
            return ExitCode::from(EXIT_USAGE);
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CRASH);
        }
    };
    if cfg.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global() {
            eprintln!("warning: thread cap not applied: {e}");
        }
    }
    let name = cli.command.name();
    let mut sink = Sink { dir: cfg.out_dir.clone(), artifacts: Vec::new() };
    let code = match sink.text(&format!("{name}.conf"), &cfg.to_text()) {
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CRASH);
        }
        Ok(_) => match run(&cli.command, &cfg, &mut sink) {
            Ok(Verdict::Success) => 0,
            Ok(Verdict::NotCertified) => EXIT_FAILED,
            Err(Failure::Usage(msg)) => {
                eprintln!("error: {msg}\n\nRun `poincare {name} --help` for usage.");
                EXIT_USAGE
            }
            Err(Failure::Runtime(e)) => {
                eprintln!("error: {e}");
                EXIT_CRASH
            }
        },
    };
    write_manifest(&sink.dir, name, &cfg, started, code, sink.artifacts);
    ExitCode::from(code)
}

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use kitaev_core::correlation::{
    bond_expectation, correlation_length_theory, correlation_profile_fast, fit_exponential,
    fit_power_law, FitOptions, FitWindow,
};
use kitaev_core::fidelity::fidelity;
use kitaev_core::model::{gap, momentum_grid, phase_of, Couplings, EvolutionLine, LineKind};
use kitaev_core::reduce::with_threads;
use kitaev_core::scaling::{
    collapse, find_peaks, sweep, CollapseOptions, SweepRecord, SweepSample,
};
use kitaev_core::Error as CoreError;
use serde_json::{json, Value};

use crate::args::{
    check_size, Cli, Command, CorrelateArgs, FidelityArgs, FitKind, Interval, PathList,
    PhaseDiagramArgs, RangeSpec, ScaleArgs, SizeList, SweepArgs, Triple,
};
use crate::config::ConfigFile;
use crate::output::{num, read_csv, write_csv, write_json};

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_VAR: &str = "KITAEV_OUTPUT_DIR";

pub const DEFAULT_OUTPUT_DIR: &str = "kitaev-out";

/// What a command produced. A nonempty `failures` means a partial failure.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub failures: Vec<String>,
}

struct Ctx {
    out: PathBuf,
    threads: Option<usize>,
    config: ConfigFile,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn run_info(&self) -> Value {
        json!({ "output_dir": self.out, "threads": self.threads })
    }
}

pub fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let env_out = std::env::var_os(OUTPUT_DIR_VAR).map(PathBuf::from);
    run_with_env(cli, env_out)
}

/// Like [`run`] with the output-directory variable passed explicitly.
pub fn run_with_env(cli: Cli, env_out: Option<PathBuf>) -> anyhow::Result<Outcome> {
    let config = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let out = match cli.out.or(env_out) {
        Some(p) => p,
        None => config
            .get::<PathBuf>("out")?
            .unwrap_or_else(|| DEFAULT_OUTPUT_DIR.into()),
    };
    let threads = config.pick(cli.threads, "threads")?;
    if threads == Some(0) {
        bail!("invalid `threads`: must be at least 1");
    }
    let ctx = Ctx {
        out,
        threads,
        config,
    };
    let command = cli.command;
    with_threads(threads, || match command {
        Command::Sweep(a) => cmd_sweep(&ctx, a),
        Command::Correlate(a) => cmd_correlate(&ctx, a),
        Command::Scale(a) => cmd_scale(&ctx, a),
        Command::PhaseDiagram(a) => cmd_phase_diagram(&ctx, a),
        Command::Fidelity(a) => cmd_fidelity(&ctx, a),
    })?
}

fn required<T>(v: Option<T>, key: &str) -> anyhow::Result<T> {
    v.ok_or_else(|| anyhow!("missing `{key}` (flag --{key} or config key `{key}`)"))
}

fn create_out(ctx: &Ctx) -> anyhow::Result<()> {
    std::fs::create_dir_all(&ctx.out)
        .with_context(|| format!("cannot create output directory {}", ctx.out.display()))
}

fn sweep_line(kind: LineKind) -> anyhow::Result<EvolutionLine> {
    let line: Option<EvolutionLine> = kind.into();
    line.ok_or_else(|| anyhow!("invalid `line`: sweeps need jx-eq-jy or jz-third"))
}

fn check_window(kind: LineKind, lz: &RangeSpec) -> anyhow::Result<()> {
    let line = sweep_line(kind)?;
    if !(line.contains(lz.lo) && line.contains(lz.hi)) {
        let (a, b, _) = line.domain();
        bail!(
            "invalid `lz`: [{}, {}] leaves the domain ({a}, {b}) of the {kind} line",
            lz.lo,
            lz.hi
        );
    }
    Ok(())
}

fn sweep_rows(record: &SweepRecord) -> Vec<Vec<String>> {
    record
        .samples
        .iter()
        .map(|s| vec![num(s.lambda), num(s.chi_f), num(s.chi_per_site), num(s.gap)])
        .collect()
}

const SWEEP_HEADER: [&str; 4] = ["lambda", "chi_f", "chi_f_per_site", "gap"];

/// Runs and writes one sweep CSV per size; skipped samples become failures.
fn run_sweeps(
    ctx: &Ctx,
    echo: &Value,
    line: LineKind,
    lz: &RangeSpec,
    sizes: &[usize],
    outcome: &mut Outcome,
) -> anyhow::Result<Vec<(SweepRecord, PathBuf)>> {
    let mut records = Vec::with_capacity(sizes.len());
    for &l in sizes {
        let grid = momentum_grid(l)?;
        let record = sweep(line, lz.lo, lz.hi, lz.steps, &grid)?;
        let mut file_echo = echo.clone();
        file_echo["size"] = json!(l);
        let path = ctx.path(&format!("sweep_L{l}.csv"));
        write_csv(&path, &file_echo, &SWEEP_HEADER, sweep_rows(&record))?;
        for s in &record.skipped {
            outcome
                .failures
                .push(format!("L = {l}, lambda = {}: {}", num(s.lambda), s.reason));
        }
        outcome.files.push(path.clone());
        records.push((record, path));
    }
    Ok(records)
}

fn peak_summary(record: &SweepRecord, window: (f64, f64)) -> Value {
    match find_peaks(record, window) {
        Ok(p) => {
            let n = 2.0 * (record.size as f64).powi(2);
            json!({
                "count": p.count(),
                "lambda_max": p.global.lambda,
                "chi_max": p.global.chi,
                "chi_max_per_site": p.global.chi / n,
                "interior": p.global.interior,
                "local_maxima": p.peaks.iter().map(|k| k.lambda).collect::<Vec<_>>(),
            })
        }
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn cmd_sweep(ctx: &Ctx, a: SweepArgs) -> anyhow::Result<Outcome> {
    let cfg = &ctx.config;
    let line = cfg.pick(a.line, "line")?.unwrap_or(LineKind::JxEqJy);
    let lz = required(cfg.pick(a.lz, "lz")?, "lz")?;
    let sizes = required(cfg.pick(a.sizes, "sizes")?, "sizes")?;
    check_window(line, &lz)?;
    create_out(ctx)?;
    let echo = json!({ "command": "sweep", "line": line, "lz": lz, "sizes": sizes });

    let mut outcome = Outcome::default();
    let records = run_sweeps(ctx, &echo, line, &lz, &sizes.0, &mut outcome)?;
    let per_size: Vec<Value> = records
        .iter()
        .map(|(r, path)| {
            json!({
                "size": r.size,
                "file": path,
                "samples": r.samples.len(),
                "skipped": r.skipped,
                "peaks": peak_summary(r, (lz.lo, lz.hi)),
            })
        })
        .collect();
    let summary_path = ctx.path("sweep_summary.json");
    write_json(
        &summary_path,
        &json!({ "config": echo, "run": ctx.run_info(), "sizes": per_size }),
    )?;
    outcome.files.push(summary_path);
    Ok(outcome)
}

fn resolve_couplings(cfg: &ConfigFile, a: &CorrelateArgs) -> anyhow::Result<(Couplings, Value)> {
    if let Some(Triple([x, y, z])) = cfg.pick(a.couplings, "couplings")? {
        let c = Couplings::new(x, y, z)?;
        return Ok((c, json!({ "couplings": [x, y, z] })));
    }
    let line = cfg.pick(a.line, "line")?.unwrap_or(LineKind::JxEqJy);
    let jz = cfg.pick(a.jz, "jz")?;
    let lambda = match (jz, cfg.pick(a.lambda, "lambda")?) {
        (Some(jz), None) => {
            if line != LineKind::JxEqJy {
                bail!("invalid `jz`: only the jx-eq-jy line is parametrized by Jz; use --lambda");
            }
            if !(jz > 0.0 && jz < 1.0) {
                bail!("domain error: jz = {jz} is outside (0, 1) on the jx-eq-jy line");
            }
            jz
        }
        (None, Some(l)) => l,
        (Some(_), Some(_)) => bail!("give either `jz` or `lambda`, not both"),
        (None, None) => bail!("missing point: give --jz, --lambda or --couplings"),
    };
    let c = sweep_line(line)?
        .point(lambda)
        .map_err(|e| anyhow!("domain error: {e}"))?;
    Ok((
        c,
        json!({ "line": line, "lambda": lambda, "couplings": c.as_array() }),
    ))
}

fn theory_length(c: &Couplings) -> Option<f64> {
    let [x, y, z] = c.as_array();
    if c.is_on_plane() && x == y {
        correlation_length_theory(z).ok()
    } else {
        None
    }
}

fn cmd_correlate(ctx: &Ctx, a: CorrelateArgs) -> anyhow::Result<Outcome> {
    let cfg = &ctx.config;
    let (c, point) = resolve_couplings(cfg, &a)?;
    let size = required(cfg.pick(a.size, "size")?, "size")?;
    check_size(size).context("invalid `size`")?;
    let fit = cfg.pick(a.fit, "fit")?.unwrap_or(FitKind::None);
    let window = match cfg.pick(a.window, "window")? {
        Some(w) => Some(w),
        None => match fit {
            FitKind::Exp => Some(Interval { lo: 5.0, hi: 15.0 }),
            FitKind::Power => Some(Interval { lo: 6.0, hi: 14.0 }),
            FitKind::None => None,
        },
    };
    let full = a.full || cfg.get::<bool>("full")?.unwrap_or(false);
    let fit_window = window.map(|w| FitWindow::new(w.lo, w.hi)).transpose()?;
    create_out(ctx)?;
    let mut echo =
        json!({ "command": "correlate", "size": size, "fit": fit, "window": window, "full": full });
    if let (Value::Object(e), Value::Object(p)) = (&mut echo, point) {
        e.extend(p);
    }

    let grid = momentum_grid(size)?;
    let profile = correlation_profile_fast(&c, &grid)?;
    let mut outcome = Outcome::default();

    let path = ctx.path("correlation.csv");
    let rows = profile
        .diagonal()
        .into_iter()
        .map(|(r, v)| vec![num(r), num(v), num(v.abs())]);
    write_csv(&path, &echo, &["r", "C", "abs_C"], rows)?;
    outcome.files.push(path);
    if full {
        let path = ctx.path("correlation_full.csv");
        let rows = profile
            .entries()
            .map(|(x, y, v)| vec![x.to_string(), y.to_string(), num(v)]);
        write_csv(&path, &echo, &["dx", "dy", "C"], rows)?;
        outcome.files.push(path);
    }

    let opts = FitOptions::default();
    let fit_json = match (fit, fit_window) {
        (FitKind::None, _) | (_, None) => Value::Null,
        (kind, Some(w)) => {
            let result = if kind == FitKind::Exp {
                fit_exponential(&profile, w, &opts)
            } else {
                fit_power_law(&profile, w, &opts)
            };
            match result {
                Ok(f) => {
                    let mut v = serde_json::to_value(&f)?;
                    if let Some((xi, err)) = f.correlation_length() {
                        v["xi"] = json!(xi);
                        v["xi_stderr"] = json!(err);
                    }
                    v
                }
                Err(e) => {
                    outcome.failures.push(format!("{kind} fit: {e}"));
                    json!({ "error": e.to_string() })
                }
            }
        }
    };
    let theory = theory_length(&c).map(|xi| json!({ "xi": xi, "inverse_xi": 1.0 / xi }));
    let summary = json!({
        "config": echo,
        "run": ctx.run_info(),
        "bond_expectation": bond_expectation(&c, &grid)?,
        "fit": fit_json,
        "theory": theory,
    });
    let path = ctx.path("correlate_summary.json");
    write_json(&path, &summary)?;
    outcome.files.push(path);
    Ok(outcome)
}

fn record_from_csv(path: &Path) -> anyhow::Result<SweepRecord> {
    let t = read_csv(path)?;
    let size = t
        .echo
        .get("size")
        .and_then(Value::as_u64)
        .ok_or_else(|| anyhow!("{}: config line has no `size`", path.display()))?
        as usize;
    check_size(size).with_context(|| path.display().to_string())?;
    let line = match t.echo.get("line").and_then(Value::as_str) {
        Some(s) => s.parse()?,
        None => LineKind::JxEqJy,
    };
    let lambda = t.column("lambda")?;
    let chi = t.column("chi_f")?;
    let gaps = t
        .column("gap")
        .unwrap_or_else(|_| vec![f64::NAN; lambda.len()]);
    let n = 2.0 * (size as f64).powi(2);
    if lambda.windows(2).any(|w| w[1].is_nan() || w[1] <= w[0]) {
        bail!(
            "{}: lambda column is not strictly increasing",
            path.display()
        );
    }
    let samples = lambda
        .iter()
        .zip(&chi)
        .zip(&gaps)
        .map(|((&lambda, &chi_f), &gap)| SweepSample {
            lambda,
            chi_f,
            chi_per_site: chi_f / n,
            gap,
        })
        .collect();
    Ok(SweepRecord {
        line,
        size,
        samples,
        skipped: Vec::new(),
    })
}

fn cmd_scale(ctx: &Ctx, a: ScaleArgs) -> anyhow::Result<Outcome> {
    let cfg = &ctx.config;
    let nu_range = cfg
        .pick(a.nu_range, "nu-range")?
        .unwrap_or(Interval { lo: 0.7, hi: 1.3 });
    let defaults = CollapseOptions::default();
    let opts = CollapseOptions {
        nu_range: (nu_range.lo, nu_range.hi),
        x_max: cfg.pick(a.x_max, "x-max")?.unwrap_or(defaults.x_max),
        scan_points: cfg
            .pick(a.scan_points, "scan-points")?
            .unwrap_or(defaults.scan_points),
        ..defaults
    };
    let inputs: Option<PathList> = cfg.pick(a.inputs, "inputs")?;
    let mut outcome = Outcome::default();

    let (echo, records) = match inputs {
        Some(files) => {
            if files.0.len() < 3 {
                bail!(
                    "invalid `inputs`: a collapse needs at least 3 sizes, got {}",
                    files.0.len()
                );
            }
            let records = files
                .0
                .iter()
                .map(|p| record_from_csv(p))
                .collect::<anyhow::Result<Vec<_>>>()?;
            create_out(ctx)?;
            let echo = json!({ "command": "scale", "inputs": files, "collapse": opts });
            (echo, records)
        }
        None => {
            let line = cfg.pick(a.line, "line")?.unwrap_or(LineKind::JxEqJy);
            let lz = cfg.pick(a.lz, "lz")?.unwrap_or(RangeSpec {
                lo: 0.46,
                hi: 0.54,
                steps: 2000,
            });
            let sizes = cfg
                .pick(a.sizes, "sizes")?
                .unwrap_or_else(|| SizeList((2..=9).map(|k| 100 * k + 1).collect()));
            if sizes.0.len() < 3 {
                bail!(
                    "invalid `sizes`: a collapse needs at least 3 sizes, got {}",
                    sizes.0.len()
                );
            }
            check_window(line, &lz)?;
            create_out(ctx)?;
            let echo = json!({ "command": "scale", "line": line, "lz": lz, "sizes": sizes, "collapse": opts });
            let sweep_echo = json!({ "command": "sweep", "line": line, "lz": lz, "sizes": sizes });
            let records = run_sweeps(ctx, &sweep_echo, line, &lz, &sizes.0, &mut outcome)?;
            (echo, records.into_iter().map(|(r, _)| r).collect())
        }
    };

    let summary_path = ctx.path("scale_summary.json");
    let result = match collapse(&records, opts) {
        Ok(r) => r,
        Err(CoreError::Fit {
            reason,
            residual_curve,
        }) => {
            write_json(
                &summary_path,
                &json!({
                    "config": echo,
                    "run": ctx.run_info(),
                    "error": reason,
                    "residual_curve": residual_curve,
                }),
            )?;
            outcome.files.push(summary_path);
            outcome.failures.push(format!("collapse: {reason}"));
            return Ok(outcome);
        }
        Err(e) => return Err(e.into()),
    };

    let path = ctx.path("collapse.csv");
    let rows = result.curves.iter().flat_map(|c| {
        c.points
            .iter()
            .map(move |&(l, x, y)| vec![c.size.to_string(), num(l), num(x), num(y)])
    });
    write_csv(&path, &echo, &["L", "lambda", "x", "y"], rows)?;
    outcome.files.push(path);

    let peaks: Vec<Value> = result
        .curves
        .iter()
        .map(|c| {
            json!({
                "size": c.size,
                "lambda_max": c.lambda_max,
                "chi_max": c.chi_max,
                "chi_max_per_site": c.chi_max / (2.0 * (c.size as f64).powi(2)),
            })
        })
        .collect();
    write_json(
        &summary_path,
        &json!({
            "config": echo,
            "run": ctx.run_info(),
            "mu": result.mu,
            "nu": result.nu,
            "alpha": result.alpha,
            "residual": result.residual,
            "peaks": peaks,
            "residual_curve": result.residual_curve,
        }),
    )?;
    outcome.files.push(summary_path);
    Ok(outcome)
}

fn cmd_phase_diagram(ctx: &Ctx, a: PhaseDiagramArgs) -> anyhow::Result<Outcome> {
    let cfg = &ctx.config;
    let resolution = cfg.pick(a.resolution, "resolution")?.unwrap_or(50);
    if resolution < 2 {
        bail!("invalid `resolution`: must be at least 2, got {resolution}");
    }
    let size = cfg.pick(a.size, "size")?.unwrap_or(51);
    check_size(size).context("invalid `size`")?;
    create_out(ctx)?;
    let echo = json!({ "command": "phase-diagram", "resolution": resolution, "size": size });
    let grid = momentum_grid(size)?;
    let r = resolution as f64;
    let mut rows = Vec::new();
    for i in 0..=resolution {
        for j in 0..=resolution - i {
            let k = resolution - i - j;
            let c = Couplings::on_plane(i as f64 / r, j as f64 / r, k as f64 / r)?;
            let [x, y, z] = c.as_array();
            rows.push(vec![
                num(x),
                num(y),
                num(z),
                phase_of(&c)?.to_string(),
                num(gap(&c, &grid)),
            ]);
        }
    }
    let path = ctx.path("phase_diagram.csv");
    write_csv(&path, &echo, &["jx", "jy", "jz", "phase", "gap"], rows)?;
    Ok(Outcome {
        files: vec![path],
        failures: Vec::new(),
    })
}

fn cmd_fidelity(ctx: &Ctx, a: FidelityArgs) -> anyhow::Result<Outcome> {
    let cfg = &ctx.config;
    let Triple(pa) = required(cfg.pick(a.a, "a")?, "a")?;
    let Triple(pb) = required(cfg.pick(a.b, "b")?, "b")?;
    let size = required(cfg.pick(a.size, "size")?, "size")?;
    check_size(size).context("invalid `size`")?;
    let ca = Couplings::from_array(pa)?;
    let cb = Couplings::from_array(pb)?;
    create_out(ctx)?;
    let echo = json!({ "command": "fidelity", "a": pa, "b": pb, "size": size });
    let f = fidelity(&ca, &cb, &momentum_grid(size)?)?;
    let path = ctx.path("fidelity.json");
    write_json(
        &path,
        &json!({
            "config": echo,
            "run": ctx.run_info(),
            "fidelity": f.value,
            "ln_fidelity": f.ln_value,
            "underflow": f.underflow,
        }),
    )?;
    Ok(Outcome {
        files: vec![path],
        failures: Vec::new(),
    })
}

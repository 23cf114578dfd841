//! `nugs`: scheme generation, reconstructions, constants and the tables.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::Serialize;

use config::Settings;
use nugs::constants::{constants_report, ConstantsReport, ReportOptions};
use nugs::experiments::{self, ReconstructionReport, DEFAULT_SEED};
use nugs::operators::{
    build_system, gridding_from_measurements, measure, named_signal, Signal, SolveOptions,
    DEFAULT_TOL, SIGNAL_NAMES,
};
use nugs::sampling::{jittered_scheme, log_scheme, seip_scheme, uniform_scheme, SamplingScheme};
use nugs::wavelets::{
    build_space, make_filter, BoundaryType, Family, ReconstructionSpace, SpaceDescriptor,
};
use nugs::NugsError;

#[derive(Parser)]
#[command(
    name = "nugs",
    version,
    about = "Wavelet reconstruction from nonuniform Fourier samples"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a sampling scheme file.
    Scheme,
    /// Measure, solve and report errors.
    Reconstruct,
    /// Stability constants of a scheme and space.
    Constants,
    /// Reproduce one of the experiment tables as CSV.
    Table {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
        which: u8,
    },
    /// Gridding against NUGS on the same measurements.
    CompareGridding,
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl From<NugsError> for Failure {
    fn from(e: NugsError) -> Self {
        match e {
            NugsError::GramNotPositiveDefinite
            | NugsError::Numerical(_)
            | NugsError::Quadrature { .. } => Failure::Numerical(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn need<T>(v: Option<T>, what: &str) -> Res<T> {
    v.ok_or_else(|| Failure::Config(format!("missing --{what}")))
}

fn scheme_of(s: &Settings) -> Res<SamplingScheme> {
    if let Some(path) = &s.scheme_file {
        return Ok(SamplingScheme::read(path)?);
    }
    let kind = match &s.scheme {
        Some(k) => k.to_ascii_lowercase(),
        None if s.n.is_some() => "seip".into(),
        None if s.nu.is_some() => "log".into(),
        None if s.eps.is_some() => "jittered".into(),
        None => {
            return Err(Failure::Config(
                "no scheme: give --scheme-file, --N, --K/--delta/--nu or --K/--eps".into(),
            ))
        }
    };
    Ok(match kind.as_str() {
        "log" => log_scheme(need(s.k, "K")?, need(s.delta, "delta")?, need(s.nu, "nu")?)?,
        "jittered" => jittered_scheme(
            need(s.k, "K")?,
            need(s.eps, "eps")?,
            s.eta.unwrap_or(0.0),
            s.seed.unwrap_or(DEFAULT_SEED),
        )?,
        "seip" => seip_scheme(need(s.n, "N")?)?,
        "uniform" => uniform_scheme(need(s.k, "K")?, need(s.eps, "eps")?)?,
        other => return Err(Failure::Config(format!("unknown scheme {other:?}"))),
    })
}

fn space_of(s: &Settings, default_r: Option<u32>) -> Res<ReconstructionSpace> {
    let family: Family = s.family.as_deref().unwrap_or("haar").parse()?;
    let p = s.p.unwrap_or(if family == Family::Haar { 1 } else { 2 });
    let r = match s.r.or(default_r) {
        Some(r) => r,
        None => return Err(Failure::Config("missing --R".into())),
    };
    let boundary: BoundaryType = s.boundary.as_deref().unwrap_or("periodic").parse()?;
    let j = s.j.unwrap_or(if boundary == BoundaryType::Boundary {
        (2 * p).next_power_of_two().trailing_zeros().min(r)
    } else {
        0
    });
    Ok(build_space(&make_filter(family, p)?, r, j, boundary)?)
}

fn signal_of(name: Option<&str>, default: &str) -> Res<Signal> {
    let name = name.unwrap_or(default);
    named_signal(name).map_err(|_| {
        Failure::Config(format!(
            "unknown signal {name:?}; known: {}",
            SIGNAL_NAMES.join(", ")
        ))
    })
}

fn solve_options(s: &Settings) -> Res<SolveOptions> {
    let tol = s.tol.unwrap_or(DEFAULT_TOL);
    if !(tol > 0.0) {
        return Err(Failure::Config(format!(
            "--tol must be positive, got {tol}"
        )));
    }
    Ok(SolveOptions {
        tol,
        max_iter: s.max_iter,
    })
}

fn emit(out: Option<&Path>, text: &str) -> Res<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json<T: Serialize>(v: &T) -> Res<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Failure::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_rows<T: Serialize>(rows: &[T]) -> Res<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn grid(space: &ReconstructionSpace) -> Vec<f64> {
    let n = space.cells() << 4;
    (0..n).map(|i| i as f64 / n as f64).collect()
}

fn write_plot(
    path: &Path,
    xs: &[f64],
    columns: &[(&str, Vec<num_complex::Complex64>)],
    f: &[num_complex::Complex64],
) -> Res<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["x".to_string(), "f_re".into(), "f_im".into()];
    for (name, _) in columns {
        header.push(format!("{name}_re"));
        header.push(format!("{name}_im"));
        header.push(format!("{name}_abs_err"));
    }
    w.write_record(&header)?;
    for (i, x) in xs.iter().enumerate() {
        let mut rec = vec![
            format!("{x:.17e}"),
            format!("{:.17e}", f[i].re),
            format!("{:.17e}", f[i].im),
        ];
        for (_, v) in columns {
            rec.push(format!("{:.17e}", v[i].re));
            rec.push(format!("{:.17e}", v[i].im));
            rec.push(format!("{:.17e}", (f[i] - v[i]).norm()));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ReconstructOutput {
    space: SpaceDescriptor,
    signal: String,
    noise: Option<String>,
    noise_level: f64,
    #[serde(flatten)]
    report: ReconstructionReport,
}

fn cmd_reconstruct(s: &Settings) -> Res<()> {
    let scheme = scheme_of(s)?;
    let space = Arc::new(space_of(s, None)?);
    let f = signal_of(s.signal.as_deref(), "table3")?;
    let h = match &s.noise {
        Some(name) => Some(signal_of(Some(name), name)?),
        None => None,
    };
    let level = s.noise_level.unwrap_or(0.0);
    if let Some(dir) = &s.dump {
        std::fs::create_dir_all(dir)?;
        let sys = build_system(&f, &scheme, space.clone())?;
        std::fs::write(dir.join("A.csv"), sys.matrix_csv())?;
        std::fs::write(dir.join("b.csv"), sys.rhs_csv())?;
    }
    let (report, coeffs) = experiments::reconstruct(
        &scheme,
        &space,
        &f,
        h.as_ref().map(|h| (h, level)),
        solve_options(s)?,
    )?;
    if let Some(path) = &s.plot {
        let xs = grid(&space);
        let rec = space.evaluate(coeffs.as_slice(), &xs)?;
        write_plot(path, &xs, &[("nugs", rec)], &f.eval_many(&xs))?;
    }
    let out = ReconstructOutput {
        space: space.descriptor(),
        signal: s.signal.clone().unwrap_or_else(|| "table3".into()),
        noise: s.noise.clone(),
        noise_level: level,
        report,
    };
    emit(s.out.as_deref(), &json(&out)?)
}

#[derive(Serialize)]
struct ConstantsOutput {
    scheme: String,
    samples: usize,
    space: SpaceDescriptor,
    #[serde(flatten)]
    report: ConstantsReport,
}

fn cmd_constants(s: &Settings) -> Res<()> {
    let scheme = scheme_of(s)?;
    let space = space_of(s, None)?;
    let opts = ReportOptions {
        delta: scheme.density,
        z_values: s.z.clone().unwrap_or_default(),
        ..Default::default()
    };
    let report = constants_report(&scheme, &space, &opts)?;
    let out = ConstantsOutput {
        scheme: scheme.label.clone(),
        samples: scheme.sample_count(),
        space: space.descriptor(),
        report,
    };
    emit(s.out.as_deref(), &json(&out)?)
}

fn cmd_table(s: &Settings, which: u8) -> Res<()> {
    let opts = solve_options(s)?;
    let seed = s.seed.unwrap_or(DEFAULT_SEED);
    let text = match which {
        1 => {
            let family: Family = s.family.as_deref().unwrap_or("haar").parse()?;
            let p = s.p.unwrap_or(if family == Family::Haar { 1 } else { 2 });
            let boundary: BoundaryType = s.boundary.as_deref().unwrap_or("periodic").parse()?;
            csv_rows(&experiments::table1(
                family,
                p,
                boundary,
                &experiments::TABLE1_DIMS,
            )?)?
        }
        2 => csv_rows(&experiments::table2(seed, opts)?)?,
        3 => csv_rows(&experiments::table3(seed, opts)?)?,
        _ => csv_rows(&experiments::table4(opts)?)?,
    };
    emit(s.out.as_deref(), &text)
}

fn cmd_compare(s: &Settings) -> Res<()> {
    let opts = solve_options(s)?;
    let scheme = if s.scheme_file.is_some() || s.scheme.is_some() || s.k.is_some() {
        scheme_of(s)?
    } else {
        jittered_scheme(256.0, 0.7, 0.14, s.seed.unwrap_or(DEFAULT_SEED))?
    };
    let spaces = if s.family.is_some() {
        vec![space_of(s, Some(9))?]
    } else {
        let r = s.r.unwrap_or(9);
        let db2 = make_filter(Family::Daubechies, 2)?;
        vec![
            build_space(&make_filter(Family::Haar, 1)?, r, 0, BoundaryType::Periodic)?,
            build_space(&db2, r, 0, BoundaryType::Periodic)?,
        ]
    };
    let f = signal_of(s.signal.as_deref(), "fig5")?;
    let cmp = experiments::compare_gridding(&scheme, &spaces, &f, opts)?;
    if let Some(path) = &s.plot {
        let xs = grid(&spaces[spaces.len() - 1]);
        let b = measure(&f, &scheme)?;
        let g = gridding_from_measurements(&scheme, b.as_slice())?;
        let mut cols = vec![("gridding".to_string(), g.eval_many(&xs))];
        for sp in &spaces {
            let (_, c) = experiments::reconstruct(&scheme, sp, &f, None, opts)?;
            cols.push((experiments::space_name(sp), sp.evaluate(c.as_slice(), &xs)?));
        }
        let named: Vec<(&str, _)> = cols.iter().map(|(n, v)| (n.as_str(), v.clone())).collect();
        write_plot(path, &xs, &named, &f.eval_many(&xs))?;
    }
    emit(s.out.as_deref(), &json(&cmp)?)
}

fn run(cli: Cli) -> Res<()> {
    let s = cli.settings.resolve().map_err(Failure::Config)?;
    match cli.command {
        Command::Scheme => {
            let scheme = scheme_of(&s)?;
            emit(s.out.as_deref(), &scheme.to_json())
        }
        Command::Reconstruct => cmd_reconstruct(&s),
        Command::Constants => cmd_constants(&s),
        Command::Table { which } => cmd_table(&s, which),
        Command::CompareGridding => cmd_compare(&s),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("nugs: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("nugs: {msg}");
            ExitCode::from(3)
        }
    }
}

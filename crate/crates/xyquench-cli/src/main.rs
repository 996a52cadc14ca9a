use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use xyquench::analysis::{
    locate_critical_field, revival_scan, separation_scan, ScanReport, ScanSettings,
};
use xyquench::config::{parse_config_with_overrides, RunConfig, ScanKind};
use xyquench::measures::Measure;
use xyquench::sweep::{
    evolve_series, field_map, field_map_rows, grid_hash, SweepError, SweepKind, VERSION,
};
use xyquench::table::{
    fmt_f64, params_preamble, sweep_header, sweep_preamble, write_table, TableWriter,
};
use xyquench::verify::run_oracle_suite;

#[derive(Parser)]
#[command(
    name = "xyquench",
    version,
    about = "Quench dynamics and coherence measures of the XY chain"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file of `key = value` lines
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration key (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Output directory
    #[arg(long, default_value = ".", global = true)]
    out: PathBuf,
    /// Comma-separated measures: rec,cl1,lqcx,lqcy,lqcz,qfi
    #[arg(long, value_delimiter = ',', global = true)]
    measures: Option<Vec<Measure>>,
    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 0, global = true)]
    threads: usize,
    /// Also write a gnuplot script next to each table
    #[arg(long, global = true)]
    plot_script: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Time series of every measure at fixed h1
    Evolve,
    /// (h1, t) map over h1_min..h1_max
    Map,
    /// Revival (or separation) times over a size family and their linear fit
    RevivalScan,
    /// Field h1* maximizing the max-over-t of each measure
    CriticalScan,
    /// Randomized closed-form vs oracle equivalence checks
    Verify {
        /// Minimum number of valid random states
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let path = common
        .config
        .as_ref()
        .context("--config <path> is required for this command")?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config_with_overrides(&text, &common.set)
        .map_err(|e| anyhow::anyhow!("{}:\n{e}", path.display()))
}

fn measures(common: &Common) -> Vec<Measure> {
    common
        .measures
        .clone()
        .unwrap_or_else(|| Measure::ALL.to_vec())
}

fn write_plot_script(csv: &Path, kind: SweepKind, measures: &[Measure]) -> Result<()> {
    let name = csv.file_name().unwrap().to_string_lossy();
    let mut s = String::from("set datafile separator ','\nset datafile commentschars '#'\nset key autotitle columnhead\n");
    match kind {
        SweepKind::Series => {
            s.push_str("set xlabel 't'\nplot ");
            let cols: Vec<String> = (0..measures.len())
                .map(|i| format!("'{name}' using 1:{} with lines", i + 2))
                .collect();
            s.push_str(&cols.join(", \\\n     "));
            s.push('\n');
        }
        SweepKind::FieldMap => {
            s.push_str("set view map\nset xlabel 't'\nset ylabel 'h1'\n");
            for (i, m) in measures.iter().enumerate() {
                s.push_str(&format!(
                    "set title '{}'\nsplot '{name}' using 2:1:{} with image\npause -1\n",
                    m.label(),
                    i + 3
                ));
            }
        }
    }
    let path = csv.with_extension("gp");
    fs::write(&path, s).with_context(|| format!("writing {}", path.display()))
}

fn run_evolve(cfg: &RunConfig, common: &Common) -> Result<()> {
    let ms = measures(common);
    let axis = cfg.series_axis()?;
    let r = evolve_series(&cfg.params, &axis, &ms, cfg.log_base)?;
    let path = common.out.join(format!("series_N{}.csv", cfg.params.n));
    write_table(&r, &path)?;
    if common.plot_script {
        write_plot_script(&path, SweepKind::Series, &ms)?;
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn run_map(cfg: &RunConfig, common: &Common) -> Result<()> {
    let ms = measures(common);
    let t_axis = cfg.series_axis()?;
    let h_axis = cfg.field_axis()?;
    let hash = grid_hash(&cfg.params, &t_axis, Some(&h_axis), &ms, cfg.log_base);
    let preamble = sweep_preamble(
        SweepKind::FieldMap,
        &cfg.params,
        &t_axis,
        Some(&h_axis),
        cfg.log_base,
        VERSION,
        &hash,
    );
    let path = common.out.join(format!("map_N{}.csv", cfg.params.n));
    let mut w = TableWriter::create(&path, &preamble, &sweep_header(true, &ms))?;
    field_map_rows(&cfg.params, &t_axis, &h_axis, cfg.log_base, |_, h1, row| {
        for (i, cell) in row.iter().enumerate() {
            let mut v = vec![h1, t_axis.value(i)];
            v.extend(ms.iter().map(|&m| cell.get(m)));
            w.write_row(&v)
                .map_err(|e| SweepError::Sink(e.to_string()))?;
        }
        Ok(())
    })?;
    w.finish()?;
    if common.plot_script {
        write_plot_script(&path, SweepKind::FieldMap, &ms)?;
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn write_scan(report: &ScanReport, cfg: &RunConfig, common: &Common, name: &str) -> Result<()> {
    for r in &report.series {
        let path = common.out.join(format!("series_N{}.csv", r.params.n));
        write_table(r, &path)?;
        if common.plot_script {
            write_plot_script(&path, SweepKind::Series, &r.measures)?;
        }
    }
    let mut preamble = vec![format!("xyquench {VERSION}"), format!("kind = {name}")];
    preamble.extend(params_preamble(&cfg.params).into_iter().skip(1));
    preamble.push(format!("measure = {}", cfg.scan_measure));
    preamble.push(format!("slope = {}", fmt_f64(report.fit.slope)));
    preamble.push(format!("intercept = {}", fmt_f64(report.fit.intercept)));
    preamble.push(format!("r_squared = {}", fmt_f64(report.fit.r_squared)));
    let path = common.out.join(format!("{name}.csv"));
    let mut w = TableWriter::create(&path, &preamble, &["N".to_string(), "t".to_string()])?;
    for &(n, t) in &report.times {
        w.write_row(&[n as f64, t.unwrap_or(f64::NAN)])?;
    }
    w.finish()?;
    for &(n, t) in &report.times {
        match t {
            Some(t) => println!("N = {n:<6} t = {t:.4}  t/N = {:.5}", t / n as f64),
            None => println!("N = {n:<6} no event detected"),
        }
    }
    println!(
        "slope = {:.6}  intercept = {:.6}  r² = {:.6}",
        report.fit.slope, report.fit.intercept, report.fit.r_squared
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn run_revival_scan(cfg: &RunConfig, common: &Common) -> Result<()> {
    let settings = ScanSettings {
        sizes: cfg.sizes.clone(),
        t_max_per_site: cfg.t_max_per_site,
        max_step: cfg.dt,
        measure: cfg.scan_measure,
        log_base: cfg.log_base,
    };
    match cfg.scan {
        ScanKind::Revival => write_scan(
            &revival_scan(&cfg.params, &settings, &cfg.revival)?,
            cfg,
            common,
            "revival",
        ),
        ScanKind::Separation => write_scan(
            &separation_scan(&cfg.params, &settings, &cfg.separation())?,
            cfg,
            common,
            "separation",
        ),
    }
}

fn run_critical_scan(cfg: &RunConfig, common: &Common) -> Result<()> {
    let ms = measures(common);
    let map = field_map(
        &cfg.params,
        &cfg.critical_axis()?,
        &cfg.field_axis()?,
        &ms,
        cfg.log_base,
    )?;
    let mut text = String::new();
    for line in sweep_preamble(
        SweepKind::FieldMap,
        &cfg.params,
        &map.t_axis,
        map.h1_axis.as_ref(),
        cfg.log_base,
        VERSION,
        &map.grid_hash,
    ) {
        text.push_str(&format!("# {line}\n"));
    }
    text.push_str("measure,h1_star,peak,degenerate\n");
    for &m in &ms {
        let c = locate_critical_field(&map, m)?;
        text.push_str(&format!(
            "{},{},{},{}\n",
            m,
            fmt_f64(c.h1),
            fmt_f64(c.peak),
            c.degenerate
        ));
        println!(
            "{:<5} h1* = {:.4}  peak = {:.6e}{}",
            m,
            c.h1,
            c.peak,
            if c.degenerate { "  (degenerate)" } else { "" }
        );
    }
    let path = common.out.join(format!("critical_N{}.csv", cfg.params.n));
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run_verify(common: &Common, points: Option<usize>, seed: Option<u64>) -> Result<()> {
    let cfg = match common.config {
        Some(_) => Some(load_config(common)?),
        None => None,
    };
    let points = points
        .or(cfg.as_ref().map(|c| c.verify_points))
        .unwrap_or(1000);
    let seed = seed.or(cfg.as_ref().map(|c| c.seed)).unwrap_or(1);
    let report = run_oracle_suite(points, seed);
    println!("{report}");
    let path = common.out.join("verify.txt");
    fs::write(&path, format!("{report}\n"))
        .with_context(|| format!("writing {}", path.display()))?;
    if !report.passed() {
        bail!("oracle equivalence checks failed");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let common = &cli.common;
    if common.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(common.threads)
            .build_global()?;
    }
    fs::create_dir_all(&common.out)
        .with_context(|| format!("creating {}", common.out.display()))?;
    match cli.command {
        Command::Verify { points, seed } => run_verify(common, points, seed),
        Command::Evolve => run_evolve(&load_config(common)?, common),
        Command::Map => run_map(&load_config(common)?, common),
        Command::RevivalScan => run_revival_scan(&load_config(common)?, common),
        Command::CriticalScan => run_critical_scan(&load_config(common)?, common),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

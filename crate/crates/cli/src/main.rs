//! `abelperc`: percolation experiments on Cayley graphs of marked abelian groups.
//!
//! Exit codes: 0 on success, 2 on validation, budget or criterion failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use abelperc_core::cayley::bs_agreement_radius;
use abelperc_core::criterion::{fc_check, fc_search, FCParams, FcReport, SearchSettings, TieBreak};
use abelperc_core::experiments::{
    renorm_demo, run_locality, run_monotonicity, Cache, ExperimentKind, ExperimentSpec, PcSettings, RenormSettings, CACHE_ENV, PC_COLUMNS,
};
use abelperc_core::experiments::cache::cached_estimate;
use abelperc_core::geometry::ZONE_NAMES;
use abelperc_core::marked_group::{agreement_radius, mg_distance, parse_group};
use abelperc_core::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "abelperc", version, about = "Bond percolation experiments on abelian Cayley graphs")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo trials (per bisection, per check, per estimate).
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Window size: half width L for p_c estimates, site radius for renorm-demo.
    #[arg(long, global = true)]
    window: Option<i64>,
    /// Directory of the p_c result cache.
    #[arg(long, global = true, env = CACHE_ENV)]
    cache_dir: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (CSV) or, for renorm-demo, output directory; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate p_c of one or more groups.
    EstimatePc {
        /// Group literals such as `2;` or `[Z^2; (1,0), (0,1), (1,1)]`.
        groups: Vec<String>,
        /// Take groups and settings from a spec file.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        threshold: Option<f64>,
        /// Skip the 2L drift estimate.
        #[arg(long)]
        no_drift: bool,
    },
    /// Run a locality or monotonicity experiment from a spec file.
    Locality { spec: PathBuf },
    /// Search for a finite-size criterion witness.
    FcSearch {
        group: String,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        eta: f64,
        /// Wall-clock budget in seconds.
        #[arg(long, default_value_t = 1200)]
        budget: u64,
        /// Radius standing in for "connected to infinity".
        #[arg(long)]
        k_window: Option<f64>,
        /// Trials of the final check.
        #[arg(long)]
        check_trials: Option<u64>,
        /// Write the witness in the FC text format.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Re-verify a witness file.
    FcCheck {
        witness: PathBuf,
        /// Override eta from the file.
        #[arg(long)]
        eta: Option<f64>,
    },
    /// Run the exploration on a quotient and print the site map.
    RenormDemo {
        #[arg(long, default_value = "3;")]
        base: String,
        /// Generators of Lambda, e.g. `0,0,4`; repeatable.
        #[arg(long, default_values_t = vec!["0,0,4".to_string()])]
        lambda: Vec<String>,
        #[arg(long, default_value_t = 0.65)]
        p: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 100)]
        runs: u64,
        #[arg(long, value_enum, default_value_t = Rule::Lexicographic)]
        rule: Rule,
    },
    /// Marked-group and Benjamini-Schramm distances between two groups.
    Distance {
        g: String,
        h: String,
        #[arg(long, default_value_t = 6)]
        k_max: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    Lexicographic,
    Closest,
}

type Res<T> = std::result::Result<T, String>;

fn err(e: Error) -> String {
    e.to_string()
}

fn emit(out: Option<&Path>, text: &str) -> Res<()> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| e.to_string())?;
            }
            fs::write(p, text).map_err(|e| format!("{}: {e}", p.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn pc_settings(c: &Common, base: PcSettings) -> PcSettings {
    PcSettings {
        seed: c.seed.unwrap_or(base.seed),
        trials: c.trials.unwrap_or(base.trials),
        window: c.window.unwrap_or(base.window),
        ..base
    }
}

fn cache(c: &Common) -> Res<Option<Cache>> {
    c.cache_dir.as_ref().map(Cache::new).transpose().map_err(err)
}

fn with_context(path: &Path, e: Error) -> String {
    format!("{}: {e}", path.display())
}

fn estimate_pc_cmd(c: &Common, groups: &[String], spec: Option<&Path>, tol: Option<f64>, threshold: Option<f64>, no_drift: bool) -> Res<bool> {
    let (mut literals, mut s) = (groups.to_vec(), PcSettings::default());
    if let Some(path) = spec {
        let sp = ExperimentSpec::parse(&read(path)?).map_err(|e| with_context(path, e))?;
        literals.extend(sp.members.iter().map(|m| m.literal.clone()));
        literals.extend(sp.limit.clone());
        s = sp.settings;
    }
    if literals.is_empty() {
        return Err("no groups given".into());
    }
    s = pc_settings(c, s);
    s.tol = tol.unwrap_or(s.tol);
    s.threshold = threshold.unwrap_or(s.threshold);
    s.drift &= !no_drift;
    let cache = cache(c)?;
    let parsed = literals.iter().map(|l| parse_group(l)).collect::<Result<Vec<_>, _>>().map_err(err)?;
    let mut out = format!("{PC_COLUMNS}\n");
    for (lit, g) in literals.iter().zip(&parsed) {
        let (e, _) = cached_estimate(cache.as_ref(), g, &s).map_err(err)?;
        if !g.percolates() {
            eprintln!("{lit}: rank {} < 2, the critical parameter is constant equal to 1", g.rank());
        }
        writeln!(out, "{}", e.csv_row(lit)).unwrap();
    }
    emit(c.out.as_deref(), &out)?;
    Ok(true)
}

fn locality_cmd(c: &Common, path: &Path) -> Res<bool> {
    let mut spec = ExperimentSpec::parse(&read(path)?).map_err(|e| with_context(path, e))?;
    spec.settings = pc_settings(c, spec.settings);
    let cache = cache(c)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let resolve = |p: &Option<PathBuf>| p.as_ref().map(|p| base.join(p));
    let csv_path = c.out.clone().or_else(|| resolve(&spec.csv));
    let (csv, json, plot, ok) = match spec.kind {
        ExperimentKind::Locality => {
            let t = run_locality(&spec, cache.as_ref()).map_err(err)?;
            for r in &t.rows {
                if r.estimate.rank < 2 {
                    eprintln!("row {}: {}", r.label, abelperc_core::experiments::locality::RANK_NOTE);
                }
            }
            (t.to_csv(), serde_json::to_string_pretty(&t).unwrap(), t.plot_data(), true)
        }
        ExperimentKind::Monotonicity => {
            let t = run_monotonicity(&spec, cache.as_ref()).map_err(err)?;
            let ok = t.ordered();
            if !ok {
                eprintln!("a quotient estimate falls below its subgroup's beyond the combined CI");
            }
            (t.to_csv(), serde_json::to_string_pretty(&t).unwrap(), t.plot_data(), ok)
        }
    };
    emit(csv_path.as_deref(), &csv)?;
    if let Some(p) = resolve(&spec.json) {
        emit(Some(&p), &(json + "\n"))?;
    }
    if let Some(p) = resolve(&spec.plot) {
        emit(Some(&p), &plot)?;
    }
    Ok(ok)
}

fn zones_csv(r: &FcReport) -> String {
    let mut s = String::from("zone,name,worst_path,successes,trials,lower,upper,threshold,pass\n");
    for (i, z) in r.zones.iter().enumerate() {
        writeln!(s, "{i},{},{},{},{},{},{},{},{}", ZONE_NAMES[i], z.worst_path, z.successes, z.trials, z.lower, z.upper, r.threshold, z.lower > r.threshold).unwrap();
    }
    s
}

#[allow(clippy::too_many_arguments)]
fn fc_search_cmd(
    c: &Common,
    group: &str,
    p: f64,
    eta: f64,
    budget: u64,
    k_window: Option<f64>,
    check_trials: Option<u64>,
    witness: Option<&Path>,
) -> Res<bool> {
    let g = parse_group(group).map_err(err)?;
    let d = SearchSettings::default();
    let s = SearchSettings {
        trials: c.trials.unwrap_or(d.trials),
        check_trials: check_trials.unwrap_or(d.check_trials),
        k_window: k_window.unwrap_or(d.k_window),
        budget: Duration::from_secs(budget),
        ..d
    };
    let report = fc_search(&g, p, eta, &s, c.seed.unwrap_or(42)).map_err(err)?;
    let mut log = String::from("stage,what,value,estimate,accepted\n");
    for r in &report.log {
        writeln!(log, "{},\"{}\",{},{},{}", r.stage.label(), r.what.replace('"', "'"), r.value, r.estimate, r.accepted).unwrap();
    }
    emit(c.out.as_deref(), &log)?;
    match &report.params {
        Some(params) => {
            let text = params.to_text(&g);
            match witness {
                Some(w) => emit(Some(w), &text)?,
                None => eprint!("{text}"),
            }
            Ok(true)
        }
        None => {
            eprintln!("search failed at stage {}: {}", report.stage.label(), report.failure.as_deref().unwrap_or(""));
            Ok(false)
        }
    }
}

fn fc_check_cmd(c: &Common, path: &Path, eta: Option<f64>) -> Res<bool> {
    let (g, mut params): (_, FCParams) = FCParams::from_text(&read(path)?).map_err(|e| with_context(path, e))?;
    if let Some(e) = eta {
        params.eta = e;
    }
    let (ok, report) = fc_check(&g, &params, c.trials.unwrap_or(10_000), c.seed.unwrap_or(42)).map_err(err)?;
    emit(c.out.as_deref(), &zones_csv(&report))?;
    eprintln!("{}", report.summary());
    Ok(ok)
}

fn parse_vector(s: &str) -> Res<Vec<i64>> {
    s.trim_matches(|c| c == '(' || c == ')').split(',').map(|x| x.trim().parse::<i64>().map_err(|_| format!("bad vector {s:?}"))).collect()
}

#[allow(clippy::too_many_arguments)]
fn renorm_cmd(c: &Common, base: &str, lambda: &[String], p: f64, delta: f64, m: usize, runs: u64, rule: Rule) -> Res<bool> {
    let d = RenormSettings::default();
    let s = RenormSettings {
        base: base.to_string(),
        lambda: lambda.iter().map(|l| parse_vector(l)).collect::<Res<Vec<_>>>()?,
        window: c.window.unwrap_or(d.window),
        p,
        delta,
        m,
        runs,
        fc_trials: c.trials.unwrap_or(d.fc_trials),
        rule: match rule {
            Rule::Lexicographic => TieBreak::Lexicographic,
            Rule::Closest => TieBreak::ClosestToOrigin,
        },
        seed: c.seed.unwrap_or(d.seed),
        ..d
    };
    let r = renorm_demo(&s).map_err(err)?;
    let map = r.first.site_map(s.window);
    print!("{map}{}", r.summary());
    if let Some(dir) = &c.out {
        fs::create_dir_all(dir).map_err(|e| e.to_string())?;
        emit(Some(&dir.join("strata.csv")), &r.strata_csv())?;
        emit(Some(&dir.join("trace.csv")), &r.first.trace_csv())?;
        emit(Some(&dir.join("sites.txt")), &map)?;
        emit(Some(&dir.join("summary.json")), &(serde_json::to_string_pretty(&r).unwrap() + "\n"))?;
    }
    Ok(r.sound && r.strata_ok)
}

fn distance_cmd(c: &Common, g: &str, h: &str, k_max: u32) -> Res<bool> {
    let (gg, hh) = (parse_group(g).map_err(err)?, parse_group(h).map_err(err)?);
    let mg = mg_distance(&gg, &hh, k_max);
    let mg_r = agreement_radius(&gg, &hh, k_max).map(|r| r.to_string()).unwrap_or(format!(">={k_max}"));
    let bs_r = bs_agreement_radius(&gg, &hh, k_max).map_err(err)?;
    let bs = 0.5f64.powi(bs_r as i32);
    let out = format!("g,h,k_max,mg_distance,mg_radius,bs_distance,bs_radius\n\"{g}\",\"{h}\",{k_max},{mg},{mg_r},{bs},{bs_r}\n");
    emit(c.out.as_deref(), &out)?;
    Ok(true)
}

fn run(cli: Cli) -> Res<bool> {
    let c = &cli.common;
    if let Some(t) = c.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| e.to_string())?;
    }
    match &cli.command {
        Command::EstimatePc { groups, spec, tol, threshold, no_drift } => estimate_pc_cmd(c, groups, spec.as_deref(), *tol, *threshold, *no_drift),
        Command::Locality { spec } => locality_cmd(c, spec),
        Command::FcSearch { group, p, eta, budget, k_window, check_trials, witness } => {
            fc_search_cmd(c, group, *p, *eta, *budget, *k_window, *check_trials, witness.as_deref())
        }
        Command::FcCheck { witness, eta } => fc_check_cmd(c, witness, *eta),
        Command::RenormDemo { base, lambda, p, delta, m, runs, rule } => renorm_cmd(c, base, lambda, *p, *delta, *m, *runs, *rule),
        Command::Distance { g, h, k_max } => distance_cmd(c, g, h, *k_max),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

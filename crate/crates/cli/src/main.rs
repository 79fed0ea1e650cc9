//! Command-line front end: solve, simulate, check and export allocation
//! instances. Instance arguments are a file path or a fixture name.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use landalloc::analysis::{check_universal_ft, check_universal_po, exact_expected_sw, monte_carlo_sw, WelfareReport};
use landalloc::generators::{fixture, random_instance, RandomSpec, Topology, ValuationMode};
use landalloc::io::{
    append_rows, export_mip, parse_instance, parse_reports, render_instance, render_rows, write_atomic, ResultRow,
};
use landalloc::mechanisms::{mutual_pairs, run, truthful_reports};
use landalloc::optimize::{optimum, two_approx};
use landalloc::{Error, Instance, MechanismId, RandomBits, Rational, Reports, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "landalloc", version, about = "Plot allocation with friendship externalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximum-welfare allocation, exact or 2-approximate.
    Solve {
        #[arg(long, conflicts_with = "approx")]
        opt: bool,
        #[arg(long)]
        approx: bool,
        instance: String,
    },
    /// One run of a mechanism with seeded randomness.
    Run {
        mechanism: MechanismId,
        instance: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Friendship reports (defaults to the truth).
        #[arg(long)]
        reports: Option<PathBuf>,
    },
    /// Expected social welfare as a result-table row.
    ExpectedSw {
        mechanism: MechanismId,
        instance: String,
        #[arg(long, conflicts_with = "samples")]
        exact: bool,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        reports: Option<PathBuf>,
        /// Fill in the wall_ms column.
        #[arg(long)]
        timing: bool,
    },
    /// Universal Pareto optimality or friendship truthfulness. Exits 0 when
    /// the property holds, 1 with a witness, 2 on error.
    Check {
        property: Property,
        mechanism: MechanismId,
        instance: String,
    },
    /// Writes a fixture or a random instance.
    Gen(GenArgs),
    /// Writes the welfare maximization problem as an LP model.
    ExportMip {
        instance: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Runs a named experiment suite and appends its rows to a table.
    Experiment {
        suite: Suite,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        timing: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    Po,
    Ft,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    /// Every closed-form mechanism on the named examples.
    Examples,
    /// Hub instances, n = 4..=10.
    Hub,
    /// Two joined stars, n = 4..=10.
    TwoStars,
    /// Stars with one agent valuing the center, n = 4..=10.
    MarkedStar,
    /// Random binary instances with weights above and below 1.
    BinaryBounds,
    /// Sampled estimates on random instances.
    Sampled,
}

#[derive(Args)]
struct GenArgs {
    /// `random` or a fixture name; families take `--n`.
    family: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pairs: usize,
    #[arg(long, default_value = "path")]
    topology: Topology,
    #[arg(long, default_value = "uniform")]
    valuation: ValuationMode,
    #[arg(long, default_value = "1/10")]
    phi_min: Rational,
    #[arg(long, default_value = "2")]
    phi_max: Rational,
    #[arg(long)]
    uniform_phi: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// Reads an instance file, or builds the fixture of that name when no such
/// file exists.
fn load_instance(arg: &str) -> Result<Instance> {
    let path = Path::new(arg);
    if path.exists() {
        parse_instance(&std::fs::read_to_string(path).map_err(|e| io_error(path, e))?)
    } else {
        Ok(fixture(arg)?.instance)
    }
}

/// Label for result rows: the fixture name or the file stem.
fn instance_label(arg: &str) -> String {
    let path = Path::new(arg);
    if path.exists() {
        path.file_stem()
            .map_or(arg.to_string(), |s| s.to_string_lossy().into_owned())
    } else {
        arg.to_string()
    }
}

fn load_reports(inst: &Instance, path: Option<&Path>) -> Result<Reports> {
    match path {
        None => Ok(truthful_reports(inst)),
        Some(p) => parse_reports(&std::fs::read_to_string(p).map_err(|e| io_error(p, e))?, inst),
    }
}

fn num(r: &Rational) -> String {
    r.to_decimal().unwrap_or_else(|| r.to_string())
}

fn nums(rs: &[Rational]) -> String {
    rs.iter().map(num).collect::<Vec<_>>().join(" ")
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn solve(opt: bool, approx: bool, arg: &str) -> Result<String> {
    let inst = load_instance(arg)?;
    let result = if approx && !opt {
        two_approx(&inst)?
    } else {
        optimum(&inst)?
    };
    Ok(format!(
        "allocation: {:?}\nwelfare: {}\nmethod: {}\n",
        result.allocation.plots(),
        num(&result.welfare),
        result.method
    ))
}

fn run_once(mech: MechanismId, arg: &str, seed: u64, reports: Option<&Path>) -> Result<String> {
    let inst = load_instance(arg)?;
    let reports = load_reports(&inst, reports)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bits = RandomBits::sample(inst.agent_count(), &mutual_pairs(&reports), &mut rng);
    let out = run(&inst, mech, &bits, &reports)?;
    let mut s = format!("mechanism: {mech}\nbits: {}\n", out.bits);
    for (k, e) in out.transcript.iter().enumerate() {
        let _ = writeln!(s, "{:>3}. {e}", k + 1);
    }
    let _ = writeln!(s, "allocation: {:?}", out.allocation.plots());
    let _ = writeln!(s, "utilities: {}", nums(&out.utilities));
    let _ = writeln!(s, "welfare: {}", num(&out.welfare()));
    Ok(s)
}

fn timed<T>(timing: bool, f: impl FnOnce() -> Result<T>) -> Result<(T, Option<u128>)> {
    let started = Instant::now();
    let value = f()?;
    Ok((value, timing.then(|| started.elapsed().as_millis())))
}

fn welfare_row(
    label: &str,
    inst: &Instance,
    mech: MechanismId,
    reports: &[Option<usize>],
    samples: Option<(u64, u64)>,
    timing: bool,
) -> Result<ResultRow> {
    let (report, ms): (WelfareReport, _) = timed(timing, || match samples {
        None => exact_expected_sw(inst, mech, reports),
        Some((k, seed)) => monte_carlo_sw(inst, mech, reports, k, seed),
    })?;
    Ok(ResultRow::from_report(label, &report, samples.map(|(_, s)| s), ms))
}

fn check(property: Property, mech: MechanismId, arg: &str) -> Result<(String, bool)> {
    let inst = load_instance(arg)?;
    let found = match property {
        Property::Po => check_universal_po(&inst, mech, &truthful_reports(&inst))?.map(|w| {
            format!(
                "witness: {}\nallocation: {:?}\ndominated by: {:?}\nutilities: {} vs {}\n",
                w.bits,
                w.allocation.plots(),
                w.dominating.plots(),
                nums(&landalloc::utilities(&inst, &w.allocation).expect("valid allocation")),
                nums(&landalloc::utilities(&inst, &w.dominating).expect("valid allocation")),
            )
        }),
        Property::Ft => check_universal_ft(&inst, mech)?.map(|v| {
            let report = |r: Option<usize>| r.map_or("nobody".to_string(), |j| format!("agent {j}"));
            format!(
                "witness: {}\nagent: {}\ntruthful report: {}\nlying report: {}\nscope: {:?}\nutilities: {} truthful vs {} lying\n",
                v.bits,
                v.agent,
                report(v.true_report),
                report(v.lying_report),
                v.scope,
                num(&v.truthful_utility),
                num(&v.lying_utility),
            )
        }),
    };
    Ok(match found {
        Some(text) => (text, true),
        None => ("none\n".to_string(), false),
    })
}

fn generate(g: &GenArgs) -> Result<String> {
    let inst = if g.family == "random" {
        let spec = RandomSpec {
            topology: g.topology,
            n: g.n.unwrap_or(RandomSpec::default().n),
            pairs: g.pairs,
            phi_min: g.phi_min.clone(),
            phi_max: g.phi_max.clone(),
            uniform_phi: g.uniform_phi,
            valuation: g.valuation,
        };
        random_instance(&spec, g.seed)?
    } else {
        let name = match g.n {
            Some(n) => format!("{}_n{n}", g.family),
            None => g.family.clone(),
        };
        fixture(&name)?.instance
    };
    Ok(render_instance(&inst))
}

const CLOSED_FORM: [MechanismId; 5] = [
    MechanismId::OnCtRsd,
    MechanismId::OnCaRsd,
    MechanismId::RsdStar,
    MechanismId::FfCtRsdStar,
    MechanismId::OnCaRsdStar,
];

fn experiment(suite: Suite, timing: bool) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    let mut exact = |name: &str, inst: &Instance, mechs: &[MechanismId]| -> Result<()> {
        let truth = truthful_reports(inst);
        for &m in mechs {
            rows.push(welfare_row(name, inst, m, &truth, None, timing)?);
        }
        Ok(())
    };
    let named = |name: &str| fixture(name).map(|f| f.instance);
    match suite {
        Suite::Examples => {
            for name in [
                "path_pairs",
                "single_edge",
                "lone_edge",
                "weak_pair",
                "hub_n8",
                "two_stars_n6",
                "marked_star_n6",
            ] {
                exact(name, &named(name)?, &CLOSED_FORM)?;
            }
        }
        Suite::Hub => {
            for n in 4..=10 {
                let name = format!("hub_n{n}");
                exact(&name, &named(&name)?, &[MechanismId::OnCtRsd, MechanismId::FfCtRsdStar])?;
            }
        }
        Suite::TwoStars => {
            for n in (4..=10).step_by(2) {
                let name = format!("two_stars_n{n}");
                exact(
                    &name,
                    &named(&name)?,
                    &[MechanismId::FfCtRsdStar, MechanismId::OnCaRsdStar],
                )?;
            }
        }
        Suite::MarkedStar => {
            for n in (4..=10).step_by(2) {
                for family in ["paired_star", "marked_star"] {
                    let name = format!("{family}_n{n}");
                    exact(&name, &named(&name)?, &[MechanismId::OnCaRsdStar])?;
                }
            }
        }
        Suite::BinaryBounds => {
            for (tag, lo, hi) in [("heavy", "11/10", "4"), ("light", "1/20", "19/20")] {
                for seed in 0..10 {
                    let spec = RandomSpec {
                        topology: Topology::Grid,
                        n: 6,
                        pairs: 2,
                        phi_min: lo.parse().expect("literal"),
                        phi_max: hi.parse().expect("literal"),
                        uniform_phi: true,
                        valuation: ValuationMode::Binary,
                    };
                    let inst = random_instance(&spec, seed)?;
                    exact(
                        &format!("binary-{tag}-{seed}"),
                        &inst,
                        &[MechanismId::FfCtRsdStar, MechanismId::OnCaRsdStar],
                    )?;
                }
            }
        }
        Suite::Sampled => {
            for seed in 0..10 {
                let spec = RandomSpec {
                    n: 7,
                    pairs: 2,
                    topology: Topology::Random,
                    ..RandomSpec::default()
                };
                let inst = random_instance(&spec, seed)?;
                let truth = truthful_reports(&inst);
                let label = format!("random-{seed}");
                for m in [MechanismId::OnCaRsd, MechanismId::FfCtRsdStar] {
                    rows.push(welfare_row(&label, &inst, m, &truth, Some((10_000, seed)), timing)?);
                }
            }
        }
    }
    Ok(rows)
}

fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve { opt, approx, instance } => print!("{}", solve(opt, approx, &instance)?),
        Command::Run {
            mechanism,
            instance,
            seed,
            reports,
        } => print!("{}", run_once(mechanism, &instance, seed, reports.as_deref())?),
        Command::ExpectedSw {
            mechanism,
            instance,
            exact: _,
            samples,
            seed,
            reports,
            timing,
        } => {
            let inst = load_instance(&instance)?;
            let reports = load_reports(&inst, reports.as_deref())?;
            let row = welfare_row(
                &instance_label(&instance),
                &inst,
                mechanism,
                &reports,
                samples.map(|k| (k, seed)),
                timing,
            )?;
            print!("{}", render_rows(&[row], true));
        }
        Command::Check {
            property,
            mechanism,
            instance,
        } => {
            let (text, found) = check(property, mechanism, &instance)?;
            print!("{text}");
            return Ok(if found { ExitCode::from(1) } else { ExitCode::SUCCESS });
        }
        Command::Gen(g) => emit(g.output.as_deref(), &generate(&g)?)?,
        Command::ExportMip { instance, output } => emit(output.as_deref(), &export_mip(&load_instance(&instance)?))?,
        Command::Experiment { suite, output, timing } => {
            let rows = experiment(suite, timing)?;
            append_rows(&output, &rows)?;
            println!("{} rows appended to {}", rows.len(), output.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("landalloc: {e}");
            ExitCode::from(2)
        }
    }
}

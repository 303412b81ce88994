use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use xnfsat_core::bench::{self, BenchConfig, TrialRecord};
use xnfsat_core::crossbar::program_crossbar;
use xnfsat_core::dimacs::{format_model, parse_dimacs_file, write_dimacs, DimacsStyle};
use xnfsat_core::energy::{area, ArrayMode, EnergyLedger};
use xnfsat_core::gen::{gen_mdp, gen_planted_xorsat, witness_sidecar, MdpSpec, Planted};
use xnfsat_core::metrics::{grid_search_sigma, Outcome};
use xnfsat_core::results::{write_results, ResultRecord};
use xnfsat_core::transform::{compression_stats, extract_xors, xnf_to_cnf};
use xnfsat_core::walksat::SolverParams;
use xnfsat_core::Formula;

use crate::config::{Extra, FileConfig, Settings};
use crate::{Cli, Command, GenKind, Target};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_SAT: u8 = 10;
pub const EXIT_UNKNOWN: u8 = 20;

/// Trials used by `energy-report` when neither flag nor config sets them.
const REPORT_TRIALS: usize = 50;

pub fn run(cli: Cli) -> Result<u8> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let verbose = cli.verbose;
    let show = |s: &Settings| {
        if verbose {
            eprintln!("{s}");
        }
    };
    match cli.command {
        Command::Solve {
            input,
            run,
            out,
            format,
        } => {
            let extra = Extra {
                format,
                ..Extra::default()
            };
            let s = Settings::resolve(&run, extra, &file)?;
            show(&s);
            solve(&input, &s, out.as_deref())
        }
        Command::Convert {
            input,
            to,
            out,
            width,
            cap,
            k_max,
        } => {
            let f = load(&input)?;
            let (converted, style) = match to {
                Target::Cnf => (xnf_to_cnf(&f, width, cap)?, DimacsStyle::PureCnf),
                Target::Xnf => (extract_xors(&f, k_max).0, DimacsStyle::XPrefixed),
            };
            eprintln!("c {}", compression_stats(&f, &converted));
            emit(out.as_deref(), &write_dimacs(&converted, style)?)?;
            Ok(EXIT_OK)
        }
        Command::Gen { kind } => generate(kind),
        Command::Bench {
            inputs,
            run,
            trials,
            jobs,
            out,
            format,
            min_successes,
            resamples,
            wall_time,
            aggregate_only,
            grid_search,
        } => {
            let extra = Extra {
                trials,
                jobs,
                format,
                min_successes,
                resamples,
            };
            let s = Settings::resolve(&run, extra, &file)?;
            show(&s);
            let opts = BenchOpts {
                wall_time,
                aggregate_only,
                grid_search,
            };
            with_pool(s.jobs, || bench_all(&inputs, &s, &opts, out.as_deref()))
        }
        Command::EnergyReport {
            input,
            run,
            trials,
            jobs,
            pipelined,
        } => {
            let extra = Extra {
                trials: trials.or(file.trials).or(Some(REPORT_TRIALS)),
                jobs,
                ..Extra::default()
            };
            let s = Settings::resolve(&run, extra, &file)?;
            show(&s);
            let mode = if pipelined {
                ArrayMode::Pipelined
            } else {
                ArrayMode::Sequential
            };
            with_pool(s.jobs, || energy_report(&input, &s, mode))
        }
        Command::Program { input, out } => {
            let f = load(&input)?;
            emit(out.as_deref(), &program_crossbar(&f).to_pbm())?;
            Ok(EXIT_OK)
        }
    }
}

fn load(path: &Path) -> Result<Formula> {
    let (f, report) =
        parse_dimacs_file(path).with_context(|| format!("parsing {}", path.display()))?;
    for w in &report.warnings {
        eprintln!("c warning: {}:{}: {}", path.display(), w.line, w.message);
    }
    Ok(f)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn instance_name(path: &Path) -> String {
    path.file_name().map_or_else(
        || path.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    )
}

fn with_pool<T: Send>(jobs: Option<usize>, job: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match jobs {
        None => job(),
        Some(0) => bail!("--jobs must be at least 1"),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building worker pool")?
            .install(job),
    }
}

fn bench_config(
    s: &Settings,
    sigma: f64,
    trials: usize,
    wall_time: bool,
) -> Result<BenchConfig<f64>> {
    let params = SolverParams::new(sigma, s.max_iter, s.seed)?.with_init(s.init);
    let mut cfg = BenchConfig::new(s.backend, params, trials);
    cfg.device = s.device.clone();
    cfg.device_seed = s.device_seed;
    cfg.coeffs = s.coeffs.clone();
    cfg.wall_time = wall_time;
    Ok(cfg)
}

fn write_records(records: &[ResultRecord], s: &Settings, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => {
            let file = fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
            write_results(records, s.format, std::io::BufWriter::new(file))?;
        }
        None => write_results(records, s.format, std::io::stdout().lock())?,
    }
    Ok(())
}

fn solve(input: &Path, s: &Settings, out: Option<&Path>) -> Result<u8> {
    let f = load(input)?;
    if s.sigmas.len() > 1 {
        bail!("solve takes a single --sigma");
    }
    let cfg = bench_config(s, s.sigmas[0], 1, false)?;
    let records = bench::run_backend(&f, &cfg)?;
    let t = &records[0];
    let name = instance_name(input);
    println!(
        "c instance {name} vars {} clauses {} xor {}",
        f.num_vars(),
        f.num_clauses(),
        f.num_xor_clauses()
    );
    println!(
        "c backend {} sigma {} seed {}",
        s.backend, s.sigmas[0], t.result.seed
    );
    println!("c iterations {}", t.result.iterations);
    println!("c energy_pj {:.3}", t.ledger.energy_pj());
    if t.unmasked_steps > 0 {
        println!("c unmasked_steps {}", t.unmasked_steps);
    }
    if let Some(p) = out {
        let rows = bench::result_rows(&name, &f, &cfg, &records, s.min_successes, 0);
        write_records(&rows[..1], s, Some(p))?;
    }
    if t.result.solved {
        println!("s SATISFIABLE");
        print!("{}", format_model(t.result.final_assignment.as_slice()));
        Ok(EXIT_SAT)
    } else {
        println!("s UNKNOWN");
        Ok(EXIT_UNKNOWN)
    }
}

struct BenchOpts {
    wall_time: bool,
    aggregate_only: bool,
    grid_search: bool,
}

fn bench_all(inputs: &[PathBuf], s: &Settings, opts: &BenchOpts, out: Option<&Path>) -> Result<u8> {
    let mut rows = Vec::new();
    for input in inputs {
        let f = load(input)?;
        let name = instance_name(input);
        let mut sweep: Vec<Vec<Outcome>> = Vec::with_capacity(s.sigmas.len());
        for &sigma in &s.sigmas {
            let cfg = bench_config(s, sigma, s.trials, opts.wall_time)?;
            let records: Vec<TrialRecord<f64>> = bench::run_backend(&f, &cfg)?;
            let mut r = bench::result_rows(&name, &f, &cfg, &records, s.min_successes, s.resamples);
            if opts.aggregate_only {
                r.drain(..r.len() - 1);
            }
            rows.extend(r);
            sweep.push(records.iter().map(|t| Outcome::from(&t.result)).collect());
        }
        if opts.grid_search {
            report_grid(&name, s, &mut sweep);
        }
    }
    write_records(&rows, s, out)?;
    Ok(EXIT_OK)
}

fn report_grid(name: &str, s: &Settings, sweep: &mut [Vec<Outcome>]) {
    let mut next = sweep.iter_mut();
    let grid = grid_search_sigma(
        &s.sigmas,
        |_| std::mem::take(next.next().expect("one outcome set per sigma")),
        s.min_successes,
        s.resamples,
        s.seed,
    );
    match grid {
        Ok(g) => {
            eprintln!("c {name}: sigma  solved  its99_opt  stderr");
            for p in &g.table {
                match &p.estimate {
                    Some(e) => eprintln!(
                        "c   {:>6}  {:>4}/{:<4}  {:>10.1}  {:>8.1}",
                        p.sigma, p.n_solved, p.n_trials, e.its99_opt, e.stderr
                    ),
                    None => eprintln!(
                        "c   {:>6}  {:>4}/{:<4}  {:>10}",
                        p.sigma, p.n_solved, p.n_trials, "censored"
                    ),
                }
            }
            eprintln!(
                "c {name}: best sigma {} (its99_opt {:.1})",
                g.best_sigma, g.best.its99_opt
            );
        }
        Err(e) => eprintln!("c {name}: grid search: {e}"),
    }
}

fn energy_report(input: &Path, s: &Settings, mode: ArrayMode) -> Result<u8> {
    let f = load(input)?;
    if s.coeffs.is_all_zero() {
        eprintln!("warning: all energy coefficients are zero");
    }
    let cfg = bench_config(s, s.sigmas[0], s.trials, false)?;
    let mut total = EnergyLedger::new();
    let mut solved = 0;
    for t in bench::run_backend(&f, &cfg)? {
        solved += usize::from(t.result.solved);
        total.merge(&t.ledger);
    }
    println!(
        "instance {}  backend {}  sigma {}  trials {} ({} solved)  iterations {}",
        instance_name(input),
        s.backend,
        s.sigmas[0],
        s.trials,
        solved,
        total.iterations()
    );
    println!(
        "{:<28} {:>14} {:>16} {:>8}",
        "component", "events", "energy_pj", "share"
    );
    let rows = total.breakdown(&s.coeffs);
    for c in &rows {
        println!(
            "{:<28} {:>14} {:>16.3} {:>7.2}%",
            c.component.label(),
            c.events,
            c.energy_pj,
            100.0 * c.share
        );
    }
    let share: f64 = rows.iter().map(|c| c.share).sum();
    println!(
        "{:<28} {:>14} {:>16.3} {:>7.2}%",
        "total",
        total.activity().total_events(),
        total.energy_pj(),
        100.0 * share
    );
    match total.energy_per_iteration() {
        Ok(e) => println!("energy per iteration: {e:.3} pJ"),
        Err(e) => println!("energy per iteration: n/a ({e})"),
    }
    let a = area(&f, mode);
    println!(
        "area: {} cells per array x {} arrays = {} cells",
        a.cells_per_array, a.arrays, a.total_cells
    );
    Ok(EXIT_OK)
}

fn generate(kind: GenKind) -> Result<u8> {
    let (planted, out, label) = match kind {
        GenKind::Mdp {
            m,
            n,
            k,
            flips,
            seed,
            out,
        } => {
            let spec = MdpSpec {
                m,
                n,
                k,
                flip_count: flips.unwrap_or(k),
                seed,
            };
            let inst = gen_mdp(&spec)?;
            let label = format!(
                "c MDP m={m} n={n} k={k} flips={} seed={seed}\n",
                spec.flip_count
            );
            (inst.planted, out, label)
        }
        GenKind::Xorsat {
            n,
            m,
            arity,
            seed,
            out,
        } => {
            let p = gen_planted_xorsat(n, m, arity, seed)?;
            (
                p,
                out,
                format!("c planted XOR-SAT n={n} m={m} arity={arity} seed={seed}\n"),
            )
        }
    };
    write_planted(&planted, &out, &label)?;
    Ok(EXIT_OK)
}

fn write_planted(p: &Planted, out: &Path, label: &str) -> Result<()> {
    let body = write_dimacs(&p.formula, DimacsStyle::XPrefixed)?;
    fs::write(out, format!("{label}{body}"))
        .with_context(|| format!("writing {}", out.display()))?;
    let mut sidecar = out.as_os_str().to_owned();
    sidecar.push(".witness");
    let sidecar = PathBuf::from(sidecar);
    fs::write(&sidecar, witness_sidecar(&p.witness))
        .with_context(|| format!("writing {}", sidecar.display()))?;
    eprintln!(
        "c wrote {} ({} vars, {} clauses, {} xor) and {}",
        out.display(),
        p.formula.num_vars(),
        p.formula.num_clauses(),
        p.formula.num_xor_clauses(),
        sidecar.display()
    );
    Ok(())
}

use std::fs;
use std::io;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use qdiscord::discord::{
    discord, discord_grid_oracle, fixed_basis_discord, DiscordResult, OptimizerConfig, PovmMode,
};
use qdiscord::measure::Povm;
use qdiscord::parallel::Execution;
use qdiscord::protocols::{
    dense_coding_loss, distillation_loss, fqswd_budget, merging_markup, mother_budget,
    BasisChoice, DecoherenceComparison, ProtocolBudget,
};
use qdiscord::qmat::ComplexMatrix;
use qdiscord::states::file::{parse_basis_matrix, parse_state, StateFile};
use qdiscord::states::{from_pure, purify, DensityMatrix, Family, PureState};
use qdiscord::suites::{
    format_float, random_jobs, run_suite, run_sweep, Suite, SuiteConfig, SweepJob, SweepRow, LOSS_TOL,
    SWEEP_HEADER,
};

use crate::{Cli, Command, Failure, PovmArg, ProtocolArg, SuiteArg};

const GRID_TOL: f64 = 1e-4;
const ENVIRONMENT_TOL: f64 = 1e-9;

pub fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Discord { input, measured, povm, max_iters } => {
            cmd_discord(cli, input, measured, *povm, *max_iters)
        }
        Command::Verify { suite, trials } => cmd_verify(cli, *suite, *trials),
        Command::Budget { protocol, input } => cmd_budget(cli, *protocol, input),
        Command::Sweep { family, grid, trials, out } => {
            cmd_sweep(cli, family, grid.as_deref(), *trials, out.as_deref().or(cli.csv.as_deref()))
        }
    }
}

fn execution(cli: &Cli) -> Execution {
    if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn optimizer(cli: &Cli) -> OptimizerConfig {
    OptimizerConfig {
        starts: cli.starts,
        seed: cli.seed,
        execution: execution(cli),
        ..Default::default()
    }
}

fn load_state(path: &Path) -> anyhow::Result<StateFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_state(&text).with_context(|| format!("parsing {}", path.display()))
}

fn resolve_basis(cli: &Cli, label: &str, dim: usize) -> anyhow::Result<(Povm, String)> {
    if cli.basis == "computational" {
        return Ok((Povm::computational(label, dim), "computational".into()));
    }
    let Some(path) = cli.basis.strip_prefix("file:") else {
        bail!("--basis must be `computational` or `file:<path>`, got `{}`", cli.basis);
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading basis {path}"))?;
    let m = parse_basis_matrix(&text).with_context(|| format!("parsing basis {path}"))?;
    if m.rows() != dim {
        bail!("basis in {path} has dimension {}, `{label}` has dimension {dim}", m.rows());
    }
    let povm = Povm::from_basis(label, &m).with_context(|| format!("basis in {path}"))?;
    Ok((povm, format!("file {path}")))
}

fn fmt_c(z: qdiscord::qmat::C64) -> String {
    format!("{:+.6}{:+.6}i", z.re, z.im)
}

fn print_matrix(m: &ComplexMatrix, indent: &str) {
    for r in 0..m.rows() {
        let row: Vec<String> = m.row(r).iter().map(|&z| fmt_c(z)).collect();
        println!("{indent}[ {} ]", row.join("  "));
    }
}

fn write_csv<I, R>(path: Option<&Path>, header: &[&str], rows: I) -> anyhow::Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let sink: Box<dyn io::Write> = match path {
        Some(p) => Box::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        ),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_discord(
    cli: &Cli,
    input: &Path,
    measured: &str,
    povm: PovmArg,
    max_iters: usize,
) -> Result<(), Failure> {
    let rho = load_state(input)?.to_density();
    let cfg = OptimizerConfig {
        max_iters,
        mode: match povm {
            PovmArg::Projective => PovmMode::Projective,
            PovmArg::Neumark => PovmMode::Neumark,
        },
        ..optimizer(cli)
    };
    let d = discord(&rho, measured, &cfg).context("computing discord")?;
    let other = rho
        .labels()
        .into_iter()
        .find(|l| *l != measured)
        .unwrap_or_default()
        .to_string();

    println!("state      {}", rho.layout());
    println!("measured   {measured}");
    println!("S({other})       {:.9}", d.report.s_a);
    println!("S({measured})       {:.9}", d.report.s_b);
    println!("I({other}:{measured})     {:.9}", d.report.mutual_info);
    println!("S({other}|{measured})     {:.9}", d.report.cond_entropy);
    println!("J({other}|{measured})     {:.9}", d.classical_corr);
    println!("discord    {:.9}", d.discord);
    print_optimal_basis(&d);
    let t = &d.optimizer_trace;
    println!(
        "optimizer  {} starts, {} converged, {} iterations, {} evaluations, seed {}",
        t.starts, t.converged_starts, t.iterations, t.evaluations, cfg.seed
    );

    let dim = rho.layout().dim_of(measured).context("measured subsystem")?;
    let (basis, basis_name) = resolve_basis(cli, measured, dim)?;
    let fixed = fixed_basis_discord(&rho, &basis).context("fixed-basis discord")?;
    println!("discord in {basis_name} basis  {fixed:.9}");

    let mut grid_value = None;
    if let Some(res) = cli.grid_check {
        let g = discord_grid_oracle(&rho, measured, res).context("grid check")?;
        println!("grid {}x{}  {g:.9}  |delta| {:.3e}", res.0, res.1, (g - d.discord).abs());
        grid_value = Some(g);
    }

    if let Some(path) = &cli.csv {
        let row = [
            format_float(d.discord),
            format_float(d.classical_corr),
            format_float(d.report.mutual_info),
            format_float(d.report.cond_entropy),
            format_float(d.tilde_s_min),
            format_float(fixed),
            grid_value.map(format_float).unwrap_or_default(),
            d.converged.to_string(),
        ];
        write_csv(
            Some(path),
            &[
                "discord",
                "classical_corr",
                "mutual_info",
                "cond_entropy",
                "tilde_s_min",
                "fixed_basis_discord",
                "grid_discord",
                "converged",
            ],
            [row],
        )?;
    }

    if let Some(g) = grid_value {
        let tol = cli.tol.unwrap_or(GRID_TOL);
        if (g - d.discord).abs() > tol {
            return Err(Failure::Property(format!(
                "optimizer {:.9} and grid {g:.9} differ by more than {tol:e}",
                d.discord
            )));
        }
    }
    if !d.converged {
        return Err(Failure::NonConvergence(format!(
            "{} of {} starts converged; best start hit the iteration cap ({max_iters})",
            t.converged_starts, t.starts
        )));
    }
    Ok(())
}

fn print_optimal_basis(d: &DiscordResult) {
    match d.optimal_basis.orthonormal_basis() {
        Ok(columns) => {
            println!("optimal basis (columns):");
            print_matrix(&columns, "  ");
        }
        Err(_) => {
            println!("optimal POVM ({} elements):", d.optimal_basis.len());
            for (j, e) in d.optimal_basis.elements().iter().enumerate() {
                println!("  E{j}:");
                print_matrix(e, "    ");
            }
        }
    }
}

fn cmd_verify(cli: &Cli, suite: SuiteArg, trials: usize) -> Result<(), Failure> {
    let suite = match suite {
        SuiteArg::Ssa => Suite::Ssa,
        SuiteArg::Theorem1 => Suite::Theorem1,
        SuiteArg::Losses => Suite::Losses,
    };
    let cfg = SuiteConfig {
        trials,
        seed: cli.seed,
        tol: cli.tol,
        optimizer: optimizer(cli),
        execution: execution(cli),
    };
    let r = run_suite(suite, &cfg).context("running suite")?;
    let worst = r.worst().expect("at least one trial");
    let metric = if suite == Suite::Ssa { "min slack" } else { "worst residual" };
    println!("suite      {}", suite.name());
    println!("trials     {} (seed {})", r.outcomes.len(), cli.seed);
    println!("passed     {}", r.passed());
    println!("failed     {}", r.failed());
    println!("{metric:<10} {:.3e} (trial {}, seed {})", worst.metric, worst.trial, worst.seed);
    println!("tolerance  {:e}", r.tol);
    for f in r.failures().take(20) {
        println!("FAIL trial {} seed {}: {}", f.trial, f.seed, f.detail);
    }
    if let Some(path) = &cli.csv {
        write_csv(
            Some(path),
            &["trial", "seed", "metric", "passed"],
            r.outcomes.iter().map(|o| {
                [o.trial.to_string(), o.seed.to_string(), format_float(o.metric), o.passed.to_string()]
            }),
        )?;
    }
    if r.all_passed() {
        Ok(())
    } else {
        let f = r.failures().next().expect("a failure");
        Err(Failure::Property(format!(
            "{} of {} trials failed; first offending seed {}",
            r.failed(),
            r.outcomes.len(),
            f.seed
        )))
    }
}

fn sorted_labels(labels: Vec<&str>) -> Vec<&str> {
    let mut l = labels;
    l.sort_unstable();
    l
}

/// Pure state on A, B, R, purifying a bipartite input when needed.
fn abr_state(state: StateFile) -> anyhow::Result<PureState> {
    match state {
        StateFile::Pure(psi) if sorted_labels(psi.layout().labels()) == ["A", "B", "R"] => Ok(psi),
        s if sorted_labels(s.to_density().labels()) == ["A", "B"] => {
            Ok(purify(&s.to_density().permuted(&["A", "B"])?, "R")?)
        }
        s => Err(anyhow!(
            "protocol needs a pure state on A, B, R or a bipartite state on A, B; got {}",
            s.to_density().layout()
        )),
    }
}

/// Bipartite state on A, B; a pure state on A, B, R is reduced.
fn ab_state(state: StateFile) -> anyhow::Result<DensityMatrix> {
    let rho = state.to_density();
    match sorted_labels(rho.labels()).as_slice() {
        ["A", "B"] => Ok(rho.permuted(&["A", "B"])?),
        ["A", "B", "R"] if matches!(state, StateFile::Pure(_)) => Ok(rho.reduced(&["A", "B"])?),
        _ => Err(anyhow!(
            "protocol needs a bipartite state on A, B (or a pure state on A, B, R); got {}",
            rho.layout()
        )),
    }
}

fn budget_record(b: &ProtocolBudget, stage: &str, basis: &str, c: Option<&DecoherenceComparison>) -> [String; 9] {
    let opt = |x: Option<f64>| x.map(format_float).unwrap_or_default();
    [
        b.protocol.to_string(),
        stage.into(),
        basis.into(),
        format_float(b.qubit_channel_rate),
        format_float(b.cbit_channel_rate),
        format_float(b.ebit_rate),
        opt(c.map(|c| c.loss)),
        opt(c.map(|c| c.discord)),
        opt(c.map(|c| c.equals_discord_residual)),
    ]
}

const BUDGET_HEADER: [&str; 9] = [
    "protocol",
    "stage",
    "basis",
    "qubit_channel_rate",
    "cbit_channel_rate",
    "ebit_rate",
    "loss",
    "discord",
    "residual",
];

fn print_budget_row(b: &ProtocolBudget, stage: &str) {
    println!(
        "{:<7} {:<22} {:>13.9} {:>13.9} {:>13.9}",
        b.protocol.id(),
        stage,
        b.qubit_channel_rate,
        b.cbit_channel_rate,
        b.ebit_rate
    );
}

fn print_budget_header() {
    println!("{:<7} {:<22} {:>13} {:>13} {:>13}", "", "", "qubit [q->q]", "cbit [c->c]", "ebit [qq]");
}

fn cmd_budget(cli: &Cli, protocol: ProtocolArg, input: &Path) -> Result<(), Failure> {
    let state = load_state(input)?;
    if let ProtocolArg::Mother = protocol {
        let psi = abr_state(state)?;
        let b = mother_budget(&psi).context("mother budget")?;
        print_budget_header();
        print_budget_row(&b, "");
        println!("{}", b.notes);
        if let Some(path) = &cli.csv {
            write_csv(Some(path), &BUDGET_HEADER, [budget_record(&b, "before", "", None)])?;
        }
        return Ok(());
    }

    let cfg = optimizer(cli);
    let (psi, rho_ab) = match protocol {
        ProtocolArg::Fqswd => {
            let psi = abr_state(state)?;
            let rho = from_pure(&psi).reduced(&["A", "B"]).context("reducing to A, B")?;
            (Some(psi), rho)
        }
        _ => (None, ab_state(state)?),
    };
    let run = |choice: &BasisChoice| -> qdiscord::Result<DecoherenceComparison> {
        match (protocol, &psi) {
            (ProtocolArg::Fqswd, Some(psi)) => fqswd_budget(psi, choice),
            (ProtocolArg::Qsm, _) => merging_markup(&rho_ab, choice),
            (ProtocolArg::Sdc, _) => dense_coding_loss(&rho_ab, choice),
            (ProtocolArg::Ed, _) => distillation_loss(&rho_ab, choice),
            _ => unreachable!("mother is handled above"),
        }
    };

    let dim_b = rho_ab.layout().dim_of("B").context("subsystem B")?;
    let (fixed_basis, fixed_name) = resolve_basis(cli, "B", dim_b)?;
    let optimal = discord(&rho_ab, "B", &cfg).context("optimizing the basis")?;

    let fixed = run(&BasisChoice::Fixed(fixed_basis)).context("fixed basis")?;
    let optimized = run(&BasisChoice::Fixed(optimal.optimal_basis.clone())).context("optimal basis")?;
    let (primary, primary_name) = if cli.optimize {
        (&optimized, "optimized")
    } else {
        (&fixed, fixed_name.as_str())
    };

    print_budget_header();
    print_budget_row(&primary.before, "before");
    print_budget_row(&primary.after, &format!("after ({primary_name})"));
    if !cli.optimize {
        print_budget_row(&optimized.after, "after (optimized)");
    } else {
        print_budget_row(&fixed.after, &format!("after ({fixed_name})"));
    }
    for (name, c) in [(fixed_name.as_str(), &fixed), ("optimized", &optimized)] {
        println!(
            "loss ({name}) {:.9}  discord {:.9}  residual {:.3e}",
            c.loss, c.discord, c.equals_discord_residual
        );
    }
    let inv = &primary.invariants;
    println!(
        "environment  I(A:R) {:.9} -> {:.9}  S(A) {:.9} -> {:.9}",
        inv.mutual_info_ar, inv.mutual_info_ar_after, inv.s_a, inv.s_a_after
    );
    println!("{}", primary.after.notes);

    if let Some(path) = &cli.csv {
        write_csv(
            Some(path),
            &BUDGET_HEADER,
            [
                budget_record(&fixed.before, "before", "", None),
                budget_record(&fixed.after, "after", &fixed_name, Some(&fixed)),
                budget_record(&optimized.after, "after", "optimized", Some(&optimized)),
            ],
        )?;
    }

    let tol = cli.tol.unwrap_or(LOSS_TOL);
    let optimized_gap = (optimized.loss - optimal.discord).abs();
    for (name, c) in [(fixed_name.as_str(), &fixed), ("optimized", &optimized)] {
        if c.equals_discord_residual.abs() > tol {
            return Err(Failure::Property(format!(
                "{name} loss {:.9} differs from discord {:.9}",
                c.loss, c.discord
            )));
        }
        if c.invariants.max_residual() > ENVIRONMENT_TOL {
            return Err(Failure::Property(format!(
                "environment changed by {:.3e} under dephasing in the {name} basis",
                c.invariants.max_residual()
            )));
        }
    }
    if optimized_gap > tol {
        return Err(Failure::Property(format!(
            "optimized loss {:.9} differs from discord {:.9}",
            optimized.loss, optimal.discord
        )));
    }
    if !optimal.converged {
        return Err(Failure::NonConvergence("basis optimization hit the iteration cap".into()));
    }
    Ok(())
}

fn parse_grid_spec(spec: &str) -> anyhow::Result<Vec<Vec<f64>>> {
    let parse = |s: &str| -> anyhow::Result<f64> {
        s.trim().parse().with_context(|| format!("bad number `{}` in --grid", s.trim()))
    };
    if let [start, step, stop] = spec.split(':').collect::<Vec<_>>().as_slice() {
        let (start, step, stop) = (parse(start)?, parse(step)?, parse(stop)?);
        if step.is_nan() || step <= 0.0 || stop < start {
            bail!("--grid range needs step > 0 and stop >= start");
        }
        let n = ((stop - start) / step).round() as usize;
        if (start + n as f64 * step - stop).abs() > 1e-9 * step.max(1.0) {
            bail!("--grid step does not divide the range");
        }
        return Ok((0..=n)
            .map(|i| vec![if n == 0 { start } else { start + (stop - start) * i as f64 / n as f64 }])
            .collect());
    }
    spec.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|set| set.split(',').map(parse).collect())
        .collect()
}

fn cmd_sweep(
    cli: &Cli,
    family: &str,
    grid: Option<&str>,
    trials: usize,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let jobs: Vec<SweepJob> = if family == "random" {
        if trials == 0 {
            return Err(Failure::Input(anyhow!("--trials must be at least 1")));
        }
        random_jobs(trials, cli.seed)
    } else {
        let sets = match grid {
            Some(g) => parse_grid_spec(g)?,
            None => vec![vec![]],
        };
        sets.iter()
            .map(|p| {
                Family::from_name(family, p)
                    .map(|family| SweepJob::Family { family, seed: cli.seed })
                    .with_context(|| format!("family `{family}` with parameters {p:?}"))
            })
            .collect::<anyhow::Result<_>>()?
    };

    let rows: Vec<SweepRow> = run_sweep(&jobs, &optimizer(cli), execution(cli)).context("sweep")?;
    write_csv(out, &SWEEP_HEADER, rows.iter().map(SweepRow::record))?;

    let tol = cli.tol.unwrap_or(LOSS_TOL);
    if let Some(bad) = rows.iter().find(|r| r.residual_max > tol) {
        return Err(Failure::Property(format!(
            "row seed {} family {} has residual {:.3e} > {tol:e}",
            bad.seed, bad.family, bad.residual_max
        )));
    }
    if out.is_some() {
        eprintln!("wrote {} rows", rows.len());
    }
    Ok(())
}

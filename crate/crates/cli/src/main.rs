//! `eprsim`: run spin-measurement experiments from the command line.

mod config;
mod error;
mod render;

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eprsim_core::experiments::{
    kink_slope, run_correlation_sweep, run_frame_ordering, run_inequality, run_nonsignaling_check,
    run_superposition_contrast, ContrastConfig, InequalityConfig, PairSettings,
};
use eprsim_core::{Assignment, Direction, ModelKind, ModelSpec, Ordering};
use serde_json::json;

use crate::config::{
    check_trials, named_settings, parse_angle_grid, parse_degrees, planar_deg, Format, RunConfig,
};
use crate::error::CliError;
use crate::render::{round_members, Output, Table};

const DEFAULT_SEED: u64 = 2012;

#[derive(Debug, Parser)]
#[command(
    name = "eprsim",
    version,
    about = "Sequential and paired spin-measurement experiments"
)]
struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Master seed for all random streams.
    #[arg(long, env = "EPRSIM_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,

    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,

    /// Write output here instead of standard output.
    #[arg(long)]
    out: Option<String>,

    /// Permit fewer than 10000 trials.
    #[arg(long)]
    allow_small: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Quantum,
    Definite,
    Isotropic,
    Nonlocal,
    Sign,
}

impl ModelArg {
    fn spec(self, assignment: Assignment) -> ModelSpec {
        match self {
            ModelArg::Quantum => ModelSpec::Quantum,
            ModelArg::Definite => ModelSpec::definite_aligned(Direction::Z, assignment),
            ModelArg::Isotropic => ModelSpec::IsotropicOpposite,
            ModelArg::Nonlocal => ModelSpec::NonlocalAligning,
            ModelArg::Sign => ModelSpec::DeterministicSign,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OrderingArg {
    AliceFirst,
    BobFirst,
}

impl From<OrderingArg> for Ordering {
    fn from(o: OrderingArg) -> Self {
        match o {
            OrderingArg::AliceFirst => Ordering::AliceFirst,
            OrderingArg::BobFirst => Ordering::BobFirst,
        }
    }
}

fn parse_assignment(s: &str) -> Result<Assignment, String> {
    s.parse().map_err(|e: eprsim_core::Error| e.to_string())
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Definite-spin local model at orthogonal ±45° settings versus the singlet.
    Inequality {
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        /// Spin values along the vertical axis: +- or -+.
        #[arg(long, default_value = "+-", value_parser = parse_assignment, allow_hyphen_values = true)]
        assignment: Assignment,
        /// Alice's setting, degrees from vertical.
        #[arg(long, default_value = "45", value_parser = parse_degrees)]
        a: f64,
        /// Bob's setting, degrees from vertical.
        #[arg(long, default_value = "315", value_parser = parse_degrees)]
        b: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Correlation versus angle between the settings.
    Sweep {
        #[arg(long, value_enum, default_value = "quantum")]
        model: ModelArg,
        /// Degrees: start:stop:step (inclusive) or a comma-separated list, within [0, 180].
        #[arg(long, default_value = "0:180:15")]
        angles: String,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value = "+-", value_parser = parse_assignment, allow_hyphen_values = true)]
        assignment: Assignment,
        #[command(flatten)]
        common: Common,
    },
    /// Non-local aligning model measured in both time orders.
    Frame {
        #[arg(long, default_value = "0", value_parser = parse_degrees)]
        a: f64,
        #[arg(long, default_value = "60", value_parser = parse_degrees)]
        b: f64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Alice's marginal under two remote settings.
    Nonsignal {
        #[arg(long, value_enum, default_value = "nonlocal")]
        model: ModelArg,
        #[arg(long, default_value = "0", value_parser = parse_degrees)]
        a: f64,
        #[arg(long, default_value = "45", value_parser = parse_degrees)]
        b1: f64,
        #[arg(long, default_value = "120", value_parser = parse_degrees)]
        b2: f64,
        #[arg(long, value_enum, default_value = "alice-first")]
        ordering: OrderingArg,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value = "+-", value_parser = parse_assignment, allow_hyphen_values = true)]
        assignment: Assignment,
        #[command(flatten)]
        common: Common,
    },
    /// Singlet versus the classical +-/-+ mixture.
    Contrast {
        #[arg(long, default_value = "45", value_parser = parse_degrees)]
        a: f64,
        #[arg(long, default_value = "315", value_parser = parse_degrees)]
        b: f64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Finite-difference slope of the exact correlation at aligned settings.
    Kink {
        /// Model to evaluate; all models when omitted.
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
        /// Step in radians, within (0, 0.1].
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long)]
        out: Option<String>,
    },
}

fn base_config(experiment: &'static str, common: &Common, trials: Option<u64>) -> RunConfig {
    RunConfig {
        experiment,
        models: Vec::new(),
        trials,
        seed: Some(common.seed),
        settings_deg: serde_json::Map::new(),
        angles_deg: Vec::new(),
        extra: serde_json::Map::new(),
        format: common.format,
        out: common.out.clone(),
        allow_small: common.allow_small,
    }
}

fn to_json<T: serde::Serialize>(report: &T) -> Result<serde_json::Value, CliError> {
    serde_json::to_value(report).map_err(|e| CliError::Internal(e.into()))
}

fn inequality(
    trials: u64,
    assignment: Assignment,
    a: f64,
    b: f64,
    common: &Common,
) -> Result<Output, CliError> {
    check_trials(trials, common.allow_small)?;
    let cfg = InequalityConfig {
        settings: PairSettings::new(planar_deg(a), planar_deg(b)),
        allow_small: common.allow_small,
        ..InequalityConfig::new(trials, common.seed, assignment)
    };
    let r = run_inequality(&cfg)?;

    let mut config = base_config("inequality", common, Some(trials));
    config.models = vec![
        ModelSpec::definite_aligned(Direction::Z, assignment),
        ModelSpec::Quantum,
    ];
    config.settings_deg = named_settings(&[("a", a), ("b", b)]);
    config
        .extra
        .insert("assignment".into(), json!(assignment.to_string()));

    let mut report = to_json(&r)?;
    round_members(&mut report, &["paper_bound", "required_q_fraction"]);
    let mut out = Output::new(config, report);
    out.field("trials", r.trials)
        .field("assignment", assignment.to_string())
        .field("count_pp", r.counts.pp)
        .field("count_pm (Q)", r.count_q)
        .field("count_mp", r.count_q_mirror)
        .field("count_mm", r.counts.mm)
        .field("P (Alice +1)", r.count_alice_plus)
        .field("N (Alice -1)", r.count_alice_minus)
        .field("sum of products", r.product_sum)
        .field("P + N - 4Q (symmetric Q)", r.identity_symmetric)
        .field("P + N - 4Q (raw Q)", r.identity_raw)
        .field("local correlation", r.correlation_estimate.estimate)
        .field("local stderr", r.correlation_estimate.stderr)
        .field("local exact", r.local_model_exact)
        .field("quantum correlation", r.quantum_estimate.estimate)
        .field("quantum stderr", r.quantum_estimate.stderr)
        .field("quantum expected", r.quantum_expected)
        .field("z vs quantum", r.z_score)
        .field("p-value", format!("{:.3e}", r.p_value))
        .field("q_fraction", r.q_fraction)
        .field("required_q_fraction", r.required_q_fraction)
        .field("alice_flip_fraction", r.alice_flip_fraction)
        .field("bob_flip_fraction", r.bob_flip_fraction)
        .field("paper_bound sin^2(pi/8)", r.paper_bound)
        .field("statement", r.statement.clone());
    out.verdict(
        "sum of products equals P + N - 4Q (symmetric Q)",
        r.identity_holds,
    )
    .verdict(
        format!(
            "local model statistically excluded against correlation 0 (p < {:e})",
            eprsim_core::experiments::EXCLUSION_P_VALUE
        ),
        r.local_model_excluded,
    );
    Ok(out)
}

fn sweep(
    model: ModelArg,
    angles: &str,
    trials: u64,
    assignment: Assignment,
    common: &Common,
) -> Result<Output, CliError> {
    check_trials(trials, common.allow_small)?;
    let grid_deg = parse_angle_grid(angles)?;
    if let Some(bad) = grid_deg.iter().find(|d| **d > 180.0) {
        return Err(CliError::Usage(format!(
            "--angles: sweep angles must lie in [0, 180], got {bad}"
        )));
    }
    let grid: Vec<f64> = grid_deg.iter().map(|d| d.to_radians().min(PI)).collect();
    let spec = model.spec(assignment);
    let r = run_correlation_sweep(&spec, &grid, trials, common.seed)?;

    let mut config = base_config("sweep", common, Some(trials));
    config.models = vec![spec];
    config.angles_deg = grid_deg.clone();

    let mut out = Output::new(config, to_json(&r)?);
    out.field("model", spec.to_string())
        .field("trials_per_point", trials);
    out.table = Some(Table {
        header: vec!["angle_deg", "estimate", "stderr", "exact", "quantum_exact"],
        rows: r
            .rows
            .iter()
            .zip(&grid_deg)
            .map(|(row, deg)| {
                vec![
                    *deg,
                    row.estimate.estimate,
                    row.estimate.stderr,
                    row.exact,
                    row.quantum_exact,
                ]
            })
            .collect(),
    });
    let within = r.rows.iter().all(|row| {
        (row.estimate.estimate - row.exact).abs()
            <= 5.0 * row.estimate.stderr.max(1.0 / (trials as f64).sqrt())
    });
    out.verdict(
        "every estimate within 5 standard errors of the exact value",
        within,
    );
    Ok(out)
}

fn frame(a: f64, b: f64, trials: u64, common: &Common) -> Result<Output, CliError> {
    check_trials(trials, common.allow_small)?;
    let r = run_frame_ordering(
        &ModelSpec::NonlocalAligning,
        &planar_deg(a),
        &planar_deg(b),
        trials,
        common.seed,
    )?;
    let mut config = base_config("frame", common, Some(trials));
    config.models = vec![ModelSpec::NonlocalAligning];
    config.settings_deg = named_settings(&[("a", a), ("b", b)]);

    let mut out = Output::new(config, to_json(&r)?);
    for (name, s) in [("alice_first", &r.alice_first), ("bob_first", &r.bob_first)] {
        out.field(format!("{name} p_pp"), s.distribution.p_pp)
            .field(format!("{name} p_pm"), s.distribution.p_pm)
            .field(format!("{name} p_mp"), s.distribution.p_mp)
            .field(format!("{name} p_mm"), s.distribution.p_mm)
            .field(format!("{name} correlation"), s.correlation.estimate)
            .field(format!("{name} stderr"), s.correlation.stderr);
    }
    out.field("max_cell_deviation", r.max_cell_deviation)
        .field("history_divergence (rad)", r.history_divergence);
    out.verdict(
        "observable joint distributions agree between orderings",
        r.observables_agree,
    )
    .verdict(
        format!(
            "Alice's pre-measurement hidden spin differs between orderings (mean > {} rad)",
            eprsim_core::experiments::HISTORY_DIVERGENCE_THRESHOLD
        ),
        r.histories_diverge,
    );
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn nonsignal(
    model: ModelArg,
    a: f64,
    b1: f64,
    b2: f64,
    ordering: OrderingArg,
    trials: u64,
    assignment: Assignment,
    common: &Common,
) -> Result<Output, CliError> {
    check_trials(trials, common.allow_small)?;
    let spec = model.spec(assignment);
    let r = run_nonsignaling_check(
        &spec,
        &planar_deg(a),
        &planar_deg(b1),
        &planar_deg(b2),
        ordering.into(),
        trials,
        common.seed,
    )?;
    let mut config = base_config("nonsignal", common, Some(trials));
    config.models = vec![spec];
    config.settings_deg = named_settings(&[("a", a), ("b1", b1), ("b2", b2)]);
    config
        .extra
        .insert("ordering".into(), to_json(&r.ordering)?);

    let mut out = Output::new(config, to_json(&r)?);
    out.field("model", spec.to_string())
        .field("P(A=+1 | b1)", r.marginals[0])
        .field("P(A=+1 | b2)", r.marginals[1])
        .field("difference", r.difference)
        .field("tolerance", r.tolerance)
        .field("alice_mismatches", r.alice_mismatches);
    out.verdict(
        "Alice's marginal independent of the remote setting",
        r.statistically_zero,
    );
    // With Bob first, the non-local model legitimately changes Alice's individual outcomes.
    if spec.is_local() || r.ordering == Ordering::AliceFirst {
        out.verdict(
            "Alice's outcomes bitwise identical across remote settings",
            r.bitwise_identical,
        );
    }
    Ok(out)
}

fn contrast(a: f64, b: f64, trials: u64, common: &Common) -> Result<Output, CliError> {
    check_trials(trials, common.allow_small)?;
    let cfg = ContrastConfig {
        settings: PairSettings::new(planar_deg(a), planar_deg(b)),
        allow_small: common.allow_small,
        ..ContrastConfig::new(trials, common.seed)
    };
    let r = run_superposition_contrast(&cfg)?;
    let mut config = base_config("contrast", common, Some(trials));
    config.settings_deg = named_settings(&[("a", a), ("b", b)]);

    let mut out = Output::new(config, to_json(&r)?);
    out.field("singlet correlation", r.singlet.estimate)
        .field("singlet stderr", r.singlet.stderr)
        .field("singlet exact", r.singlet_exact)
        .field("mixture correlation", r.mixture.estimate)
        .field("mixture stderr", r.mixture.stderr)
        .field("mixture exact", r.mixture_exact)
        .field(
            "p (mixture vs singlet)",
            format!("{:.3e}", r.mixture_vs_singlet_p_value),
        );
    let ok = |e: &eprsim_core::CorrelationEstimate| {
        (e.estimate - e.exact.unwrap_or(f64::NAN)).abs()
            <= 5.0 * e.stderr.max(1.0 / (trials as f64).sqrt())
    };
    out.verdict(
        "singlet estimate within 5 standard errors of exact",
        ok(&r.singlet),
    )
    .verdict(
        "mixture estimate within 5 standard errors of exact",
        ok(&r.mixture),
    );
    Ok(out)
}

fn kink(
    model: Option<ModelArg>,
    epsilon: f64,
    format: Format,
    out_path: Option<String>,
) -> Result<Output, CliError> {
    let specs: Vec<ModelSpec> = match model {
        Some(m) => vec![m.spec(Assignment::PlusMinus)],
        None => ModelKind::ALL
            .iter()
            .map(|k| ModelSpec::with_defaults(*k))
            .collect(),
    };
    let slopes = specs
        .iter()
        .map(|s| kink_slope(s, epsilon))
        .collect::<Result<Vec<f64>, _>>()?;

    let config = RunConfig {
        experiment: "kink",
        models: specs.clone(),
        trials: None,
        seed: None,
        settings_deg: serde_json::Map::new(),
        angles_deg: Vec::new(),
        extra: [("epsilon".to_string(), json!(epsilon))]
            .into_iter()
            .collect(),
        format,
        out: out_path,
        allow_small: false,
    };
    let report = json!({
        "epsilon": epsilon,
        "slopes": specs.iter().zip(&slopes).map(|(s, v)| json!({"model": s, "slope": v})).collect::<Vec<_>>(),
    });
    let mut out = Output::new(config, report);
    out.field("epsilon", epsilon);
    for (s, v) in specs.iter().zip(&slopes) {
        out.field(format!("slope {}", s.kind()), *v);
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Internal(e.into()))?;
    }
    let (output, format, out_path) = match &cli.command {
        Command::Inequality {
            trials,
            assignment,
            a,
            b,
            common,
        } => (
            inequality(*trials, *assignment, *a, *b, common)?,
            common.format,
            common.out.clone(),
        ),
        Command::Sweep {
            model,
            angles,
            trials,
            assignment,
            common,
        } => (
            sweep(*model, angles, *trials, *assignment, common)?,
            common.format,
            common.out.clone(),
        ),
        Command::Frame {
            a,
            b,
            trials,
            common,
        } => (
            frame(*a, *b, *trials, common)?,
            common.format,
            common.out.clone(),
        ),
        Command::Nonsignal {
            model,
            a,
            b1,
            b2,
            ordering,
            trials,
            assignment,
            common,
        } => (
            nonsignal(
                *model,
                *a,
                *b1,
                *b2,
                *ordering,
                *trials,
                *assignment,
                common,
            )?,
            common.format,
            common.out.clone(),
        ),
        Command::Contrast {
            a,
            b,
            trials,
            common,
        } => (
            contrast(*a, *b, *trials, common)?,
            common.format,
            common.out.clone(),
        ),
        Command::Kink {
            model,
            epsilon,
            format,
            out,
        } => (
            kink(*model, *epsilon, *format, out.clone())?,
            *format,
            out.clone(),
        ),
    };

    let text = output.render(format)?;
    match out_path {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("eprsim: {e}");
            e.exit_code()
        }
    }
}

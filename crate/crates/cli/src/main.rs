//! `tapkit`: build, inspect and exercise tappings from the command line.
//!
//! Exit status is 0 on success, 1 on usage errors and 2 on data or validation
//! errors. Error lines on stderr start with `error:`.

#![allow(clippy::needless_range_loop)]

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use tapkit_core::analysis::{scan_all, tapping_from_scan};
use tapkit_core::demo::{nao_demo, NaoDemoConfig};
use tapkit_core::engine::dropout::{apply_blocking, apply_tap_dropout, dropout_augment, DropoutConfig};
use tapkit_core::models::{best_of_n, fit, BoxSampler, FeatureMap, LinearModel};
use tapkit_core::render::{to_dot, DiagramOptions};
use tapkit_core::rlbridge::{
    bellman_solve_right, direct_td_run, run_control, tapped_td_run, value_iteration, ChainEnv, Control, Policy,
};
use tapkit_core::sim::{generate, Plant, PlantConfig};
use tapkit_core::tapdsl::parser::{parse, TapFile};
use tapkit_core::tapdsl::print::print_file;
use tapkit_core::{apply, ChannelRef, Dataset, SensorimotorMatrix, SensorimotorSpace, Tapping, Template};

#[derive(Parser, Debug)]
#[command(name = "tapkit", version, about = "Tappings: sensorimotor data to supervised training sets")]
struct Cli {
    /// Root seed; every random component derives its own stream from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress progress notes on standard error.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a sensorimotor matrix from a simulated plant.
    Gen(GenArgs),
    /// Apply a tapping to a sensorimotor matrix.
    Apply(ApplyArgs),
    /// Fit a linear model to a tapped dataset.
    Train(TrainArgs),
    /// Pick the best of N random commands for a goal with a forward model.
    Reach(ReachArgs),
    /// Tabular TD(0), SARSA or Q-learning on a chain, checked against exact solutions.
    Td(TdArgs),
    /// Lagged mutual information scan and effective tapping.
    Analyze(AnalyzeArgs),
    /// Emit a tapping diagram as Graphviz DOT.
    Render(RenderArgs),
    /// Parse a tapping file and report causality class and span per tapping.
    Validate(ValidateArgs),
    /// End-to-end demonstrations.
    Demo {
        #[command(subcommand)]
        which: DemoKind,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PlantKind {
    Linear,
    Arm,
    Planted,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    plant: PlantKind,
    #[arg(long, default_value_t = 1)]
    episodes: usize,
    #[arg(long, default_value_t = 500)]
    steps: usize,
    /// Standard deviation of gaussian observation noise.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Steps between a command and its observed effect.
    #[arg(long, default_value_t = 1)]
    delay: usize,
}

#[derive(Args, Debug)]
struct ApplyArgs {
    /// Tapping file holding the space block and named tappings.
    #[arg(long)]
    space: Option<PathBuf>,
    /// Tapping name in the file, or a template call such as `forward(m, vision)`.
    #[arg(long)]
    tapping: String,
    #[arg(long)]
    data: PathBuf,
    /// Block this proportion of taps per episode.
    #[arg(long)]
    blocking: Option<f64>,
    /// Append this many dropout copies of the dataset.
    #[arg(long, default_value_t = 0)]
    dropout_copies: usize,
    /// Proportion of input cells masked in each dropout copy.
    #[arg(long, default_value_t = 0.5)]
    dropout_p: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Features {
    Identity,
    Quadratic,
}

impl From<Features> for FeatureMap {
    fn from(f: Features) -> Self {
        match f {
            Features::Identity => FeatureMap::Identity,
            Features::Quadratic => FeatureMap::Quadratic,
        }
    }
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = Features::Identity)]
    features: Features,
    #[arg(long, default_value_t = 0.0)]
    ridge: f64,
}

/// Comma-separated numbers.
#[derive(Debug, Clone)]
struct Floats(Vec<f64>);

impl FromStr for Floats {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| format!("`{p}` is not a number")))
            .collect::<Result<Vec<_>, _>>()
            .map(Floats)
    }
}

#[derive(Args, Debug)]
struct ReachArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    goal: Floats,
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Lower bound of every command channel.
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    lo: f64,
    /// Upper bound of every command channel.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    hi: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Algo {
    Td0,
    Sarsa,
    Q,
}

#[derive(Args, Debug)]
struct TdArgs {
    #[arg(long, default_value_t = 5)]
    states: usize,
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 2000)]
    episodes: usize,
    #[arg(long, value_enum, default_value_t = Algo::Td0)]
    algo: Algo,
    /// Exploration rate for SARSA and Q-learning.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long)]
    data: PathBuf,
    /// Prediction target, e.g. `vision[0]`.
    #[arg(long)]
    target: ChannelRef,
    #[arg(long, default_value_t = 5)]
    max_lag: usize,
    /// Histogram bins per axis; chosen from the sample count when omitted.
    #[arg(long)]
    bins: Option<usize>,
    /// Keep dependencies with at least this fraction of the strongest one.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Write the effective tapping, with its space block, to this file.
    #[arg(long)]
    emit_tapping: Option<PathBuf>,
}

/// Inclusive lag window `min,max`.
#[derive(Debug, Clone, Copy)]
struct Window(i64, i64);

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(',').ok_or("expected MIN,MAX")?;
        let p = |v: &str| v.trim().parse::<i64>().map_err(|_| format!("`{v}` is not an integer"));
        Ok(Window(p(a)?, p(b)?))
    }
}

#[derive(Args, Debug)]
struct RenderArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    tapping: String,
    /// Lag window to draw; the tapping's own extent when omitted.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<Window>,
    /// One row per channel instead of one per modality kind.
    #[arg(long)]
    expand: bool,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    spec: PathBuf,
}

#[derive(Subcommand, Debug)]
enum DemoKind {
    /// Hand reaching with a learned forward model of the simulated arm.
    Nao {
        #[arg(long, default_value_t = 500)]
        steps: usize,
        #[arg(long, default_value_t = 100)]
        goals: usize,
        #[arg(long, default_value_t = 256)]
        candidates: usize,
        #[arg(long, default_value_t = 1e-6)]
        ridge: f64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        // a closed pipe on standard output, e.g. `| head`, is not a failure
        Err(e) if e.chain().any(|c| c.downcast_ref::<io::Error>().is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Gen(a) => gen(cli, a),
        Command::Apply(a) => apply_cmd(cli, a),
        Command::Train(a) => train(cli, a),
        Command::Reach(a) => reach(cli, a),
        Command::Td(a) => td(cli, a),
        Command::Analyze(a) => analyze(cli, a),
        Command::Render(a) => render(cli, a),
        Command::Validate(a) => validate(cli, a),
        Command::Demo { which: DemoKind::Nao { steps, goals, candidates, ridge } } => {
            let config = NaoDemoConfig { seed: cli.seed, steps: *steps, goals: *goals, candidates: *candidates, ridge: *ridge };
            emit(cli, &nao_demo(&config)?.to_string())
        }
    }
}

fn note(cli: &Cli, msg: impl AsRef<str>) {
    if !cli.quiet {
        eprintln!("{}", msg.as_ref());
    }
}

/// Writes `text` to `--out` or standard output.
fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => io::stdout().write_all(text.as_bytes()).context("writing to standard output"),
    }
}

fn read_tap_file(path: &Path) -> Result<TapFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text).with_context(|| path.display().to_string())
}

/// A named tapping from `file`, or a template call built on `space`.
fn resolve_tapping(file: Option<&TapFile>, name: &str, space: Arc<SensorimotorSpace>) -> Result<Tapping> {
    if name.contains('(') {
        return Ok(Template::parse_call(name)?.build(space)?);
    }
    let file = file.ok_or_else(|| anyhow!("tapping `{name}` needs a tapping file; or pass a template call"))?;
    file.tapping(name).cloned().ok_or_else(|| {
        let names: Vec<&str> = file.tappings.iter().map(Tapping::name).collect();
        anyhow!("no tapping `{name}` in file (available: {})", names.join(", "))
    })
}

fn load_matrix(data: &Path, space: Option<Arc<SensorimotorSpace>>) -> Result<SensorimotorMatrix<f64>> {
    Ok(match space {
        Some(s) => SensorimotorMatrix::load_csv(s, data)?,
        None => SensorimotorMatrix::load_csv_infer(data)?,
    })
}

fn gen(cli: &Cli, a: &GenArgs) -> Result<()> {
    let plant = match a.plant {
        PlantKind::Linear => Plant::default_linear(),
        PlantKind::Arm => Plant::default_arm(),
        PlantKind::Planted => Plant::PlantedLag,
    };
    let config = PlantConfig::new(plant, cli.seed).with_noise(a.noise).with_delay(a.delay);
    let m = generate::<f64>(&config, a.episodes, a.steps)?;
    match &cli.out {
        Some(p) => {
            m.save_csv(p)?;
            let side = p.with_extension("tap");
            fs::write(&side, m.space().to_string()).with_context(|| format!("writing {}", side.display()))?;
            note(cli, format!("wrote {} (episodes {}, steps {}) and {}", p.display(), a.episodes, a.steps, side.display()));
        }
        None => {
            let mut buf = Vec::new();
            m.write_csv(&mut buf)?;
            emit(cli, &String::from_utf8(buf)?)?;
        }
    }
    Ok(())
}

fn apply_cmd(cli: &Cli, a: &ApplyArgs) -> Result<()> {
    let file = a.space.as_deref().map(read_tap_file).transpose()?;
    let space = file.as_ref().and_then(|f| f.space.clone());
    let m = load_matrix(&a.data, space)?;
    let tapping = resolve_tapping(file.as_ref(), &a.tapping, m.space().clone())?;
    let mut ds: Dataset<f64> = match a.blocking {
        Some(p) => apply_blocking(&m, &tapping, p, cli.seed)?,
        None => apply(&m, &tapping)?,
    };
    apply_tap_dropout(&mut ds, &tapping, cli.seed, 0.0);
    if a.dropout_copies > 0 {
        let config = DropoutConfig { copies: a.dropout_copies, proportion: a.dropout_p, seed: cli.seed, ..Default::default() };
        ds = dropout_augment(&ds, &config)?;
    }
    match &cli.out {
        Some(p) => {
            ds.save_csv(p)?;
            note(cli, format!("{} rows, {} inputs, {} targets -> {}", ds.len(), ds.d_in(), ds.d_out(), p.display()));
        }
        None => {
            let mut buf = Vec::new();
            ds.write_csv(&mut buf)?;
            emit(cli, &String::from_utf8(buf)?)?;
        }
    }
    Ok(())
}

fn train(cli: &Cli, a: &TrainArgs) -> Result<()> {
    let ds = Dataset::<f64>::load_csv(&a.data)?;
    let model = fit(&ds, a.features.into(), a.ridge)?;
    note(cli, format!("{} rows, rmse {:.6e}", ds.len(), model.rmse(&ds)?));
    let mut text = Vec::new();
    model.write_text(&mut text)?;
    emit(cli, &String::from_utf8(text)?)
}

fn reach(cli: &Cli, a: &ReachArgs) -> Result<()> {
    let model = LinearModel::<f64>::load(&a.model)?;
    let sampler = BoxSampler::uniform(model.d_in(), a.lo, a.hi);
    let r = best_of_n(&model, &a.goal.0, a.n, cli.seed, &sampler)?;
    let join = |v: &[f64]| v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(",");
    let text = format!(
        "command {}\npredicted {}\ndistance {:.6e}\ncandidate {} of {}\n",
        join(&r.command),
        join(&r.predicted),
        r.distance,
        r.index,
        a.n
    );
    emit(cli, &text)
}

fn td(cli: &Cli, a: &TdArgs) -> Result<()> {
    let env = ChainEnv::new(a.states, a.gamma)?;
    let mut s = String::new();
    match a.algo {
        Algo::Td0 => {
            let tapped = tapped_td_run::<f64>(&env, a.episodes, a.alpha, cli.seed, Policy::AlwaysRight)?;
            let direct = direct_td_run::<f64>(&env, a.episodes, a.alpha, cli.seed, Policy::AlwaysRight)?;
            let oracle = bellman_solve_right(&env)?;
            writeln!(s, "td0 on {}-state chain, gamma {}, alpha {}, {} episodes", a.states, a.gamma, a.alpha, a.episodes)?;
            writeln!(s, "{:>5}  {:>10}  {:>10}  {:>10}", "state", "v", "bellman", "|diff|")?;
            let mut worst = 0.0f64;
            for (i, (v, b)) in tapped.v.iter().zip(&oracle).enumerate() {
                worst = worst.max((v - b).abs());
                writeln!(s, "{i:>5}  {v:>10.6}  {b:>10.6}  {:>10.3e}", (v - b).abs())?;
            }
            writeln!(s, "max |v - bellman| {worst:.3e}")?;
            let same = tapped.v.iter().zip(&direct.v).all(|(x, y)| x.to_bits() == y.to_bits());
            writeln!(s, "tapped and direct runs bit-identical: {}", if same { "yes" } else { "no" })?;
        }
        Algo::Sarsa | Algo::Q => {
            let (control, name) = if a.algo == Algo::Sarsa { (Control::Sarsa, "sarsa") } else { (Control::QLearning, "q-learning") };
            let table = run_control::<f64>(&env, control, a.episodes, a.alpha, a.epsilon, cli.seed)?;
            let oracle = value_iteration(&env, 1e-12);
            writeln!(
                s,
                "{name} on {}-state chain, gamma {}, alpha {}, epsilon {}, {} episodes",
                a.states, a.gamma, a.alpha, a.epsilon, a.episodes
            )?;
            writeln!(s, "{:>5}  {:>10}  {:>10}  {:>10}  {:>10}  {:>6}  {:>6}", "state", "q(left)", "q(right)", "vi(left)", "vi(right)", "greedy", "vi")?;
            let name_of = |q: [f64; 2]| if q[1] > q[0] { "right" } else { "left" };
            let mut agree = true;
            for st in 0..env.terminal() {
                let q = table.q[st];
                let o = oracle[st];
                agree &= name_of(q) == name_of(o);
                writeln!(s, "{st:>5}  {:>10.6}  {:>10.6}  {:>10.6}  {:>10.6}  {:>6}  {:>6}", q[0], q[1], o[0], o[1], name_of(q), name_of(o))?;
            }
            writeln!(s, "greedy policy matches value iteration: {}", if agree { "yes" } else { "no" })?;
        }
    }
    emit(cli, &s)
}

fn analyze(cli: &Cli, a: &AnalyzeArgs) -> Result<()> {
    if !(a.threshold > 0.0 && a.threshold <= 1.0) {
        bail!("threshold {} outside (0, 1]", a.threshold);
    }
    let m = load_matrix(&a.data, None)?;
    let scan = scan_all(&m, &a.target, a.max_lag, a.bins)?;
    let space = m.space();
    let channels: Vec<String> = (0..space.n_sm()).map(|r| space.channel_at(r).expect("row").to_string()).collect();
    let width = channels.iter().map(String::len).max().unwrap_or(0).max(9);
    let mut s = String::new();
    writeln!(s, "mutual information with {} (bits)", a.target)?;
    write!(s, "{:>5}", "lag")?;
    for c in &channels {
        write!(s, "  {c:>width$}")?;
    }
    s.push('\n');
    for l in 0..=a.max_lag as i64 {
        write!(s, "{:>5}", -l)?;
        for c in &channels {
            match scan.iter().find(|r| r.lag == -l && r.source.to_string() == *c) {
                Some(r) => write!(s, "  {:>width$.5}", r.mi_bits)?,
                None => write!(s, "  {:>width$}", "-")?,
            }
        }
        s.push('\n');
    }
    match tapping_from_scan(&m, &a.target, &scan, a.threshold) {
        Ok(t) => {
            writeln!(s, "\neffective tapping (threshold {} of max):", a.threshold)?;
            write!(s, "{t}")?;
            if let Some(p) = &a.emit_tapping {
                fs::write(p, print_file(space, std::slice::from_ref(&t)))
                    .with_context(|| format!("writing {}", p.display()))?;
                note(cli, format!("wrote {}", p.display()));
            }
        }
        Err(e) => {
            emit(cli, &s)?;
            return Err(e.into());
        }
    }
    emit(cli, &s)
}

fn render(cli: &Cli, a: &RenderArgs) -> Result<()> {
    let file = read_tap_file(&a.spec)?;
    let space = file.space.clone().ok_or_else(|| anyhow!("{} has no space block", a.spec.display()))?;
    let tapping = resolve_tapping(Some(&file), &a.tapping, space)?;
    let options = match a.window {
        Some(Window(lo, hi)) => DiagramOptions::new(lo, hi, !a.expand)?,
        None => DiagramOptions::fit(&tapping, !a.expand),
    };
    emit(cli, &to_dot(&tapping, &options)?)
}

fn validate(cli: &Cli, a: &ValidateArgs) -> Result<()> {
    let file = read_tap_file(&a.spec)?;
    let mut s = String::new();
    for t in &file.tappings {
        let report = t.validate();
        write!(s, "{}: {}, span {}", t.name(), report.class, t.span())?;
        if report.buffer_delay > 0 {
            write!(s, ", buffer delay {}", report.buffer_delay)?;
        }
        s.push('\n');
    }
    emit(cli, &s)
}

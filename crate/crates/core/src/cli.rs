//! Command-line front end.
//!
//! Every option is a key in a flat configuration map. A `--config` file
//! (`key = value` lines with optional `[section]` headers) is read first and
//! flags given on the command line override it. The merged map, minus the
//! output directory, is written to `manifest.txt` after all other outputs, so
//! `--config <out>/manifest.txt` reproduces a run byte for byte.
//!
//! Exit codes: 0 success or all formulas hold, 1 some formula fails (or
//! synthesis is infeasible, or constraints are violated), 2 undecided,
//! 3 configuration, input or runtime error.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::parser::ValueSource;
use clap::{Arg, ArgAction, ArgMatches, Command};
use rayon::prelude::*;

use crate::crn::{Crn, State};
use crate::csl::report::{csv_report, text_report};
use crate::csl::{
    evaluate_exact, evaluate_statistical, goal_catalog, oscillator_properties, parse_formula_file,
    Agent, Context, Env, Formula, StatConfig, Verdict, VerificationResult,
};
use crate::ctmc::{Ctmc, ExploreCaps, DEFAULT_MAX_STATES};
use crate::demo::{run_demo, DemoConfig, Injection};
use crate::designs::{
    build_composed, build_heartbeat_decay, build_mwt, build_oscillator, build_recovery,
    catalyzed_ladder, ladder_first_passage, unary_ladder, LadderSpec, Model, MwtConfig,
    OscillatorConfig, PredicateConfig,
};
use crate::kv::{parse_kv, write_kv, KvMap};
use crate::params::{
    fmt_f64, synthesize, validate_constraints, ClientPolytope, HeartbeatGoalParams, InternalParams,
};
use crate::parser::{parse_crn_with, serialize_crn, CrnDocument, ParseOptions};
use crate::rng::mix64;
use crate::ssa::{sample_on_grid, simulate_ensemble, Gillespie, SimConfig, Step};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_UNDECIDED: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

/// Sweeps larger than this need `--force`.
pub const MAX_SWEEP_POINTS: usize = 10_000;

pub const MODEL_KINDS: [&str; 7] = [
    "unary-ladder",
    "catalyzed-ladder",
    "mwt",
    "mwt-heartbeat",
    "oscillator",
    "recovery",
    "composed-demo",
];

/// Model parameters that sweeps may vary (as `model.<name>`).
pub const MODEL_PARAMS: [&str; 13] = [
    "k",
    "u",
    "r",
    "p",
    "kd",
    "kt",
    "pl",
    "pt",
    "h_init",
    "total",
    "k2",
    "k_recovery",
    "split",
];

#[derive(Debug)]
pub struct CliError(pub String);

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CliError {}

type Res<T> = Result<T, CliError>;

fn err<T>(msg: impl Into<String>) -> Res<T> {
    Err(CliError(msg.into()))
}

fn wrap<E: std::fmt::Display>(e: E) -> CliError {
    CliError(e.to_string())
}

struct Opt {
    flag: &'static str,
    key: &'static str,
    help: &'static str,
    switch: bool,
    multi: bool,
}

const fn opt(flag: &'static str, key: &'static str, help: &'static str) -> Opt {
    Opt {
        flag,
        key,
        help,
        switch: false,
        multi: false,
    }
}

const fn switch(flag: &'static str, key: &'static str, help: &'static str) -> Opt {
    Opt {
        flag,
        key,
        help,
        switch: true,
        multi: false,
    }
}

const MODEL_OPTS: [Opt; 16] = [
    opt("model", "model.file", "model file in .crn format"),
    opt("kind", "model.kind", "builder name instead of a model file"),
    opt("k", "model.k", "ladder rungs, or oscillator rate constant"),
    opt(
        "u",
        "model.u",
        "ladder up rate, or U count for catalyzed ladders and the watchdog",
    ),
    opt(
        "r",
        "model.r",
        "ladder reset rate, or R count for catalyzed ladders and the watchdog",
    ),
    opt("p", "model.p", "ladder population"),
    opt("kd", "model.kd", "absence detector rungs"),
    opt("kt", "model.kt", "threshold filter rungs"),
    opt("pl", "model.pl", "absence detector population"),
    opt("pt", "model.pt", "threshold filter population"),
    opt(
        "h-init",
        "model.h_init",
        "initial heartbeat count of the watchdog",
    ),
    opt("total", "model.total", "oscillator population"),
    opt(
        "split",
        "model.split",
        "oscillator split in percent as A,B,C",
    ),
    opt("k2", "model.k2", "heartbeat decay rate"),
    opt(
        "k-recovery",
        "model.k_recovery",
        "rate of the C -> A recovery step",
    ),
    switch(
        "no-heartbeat",
        "model.no_heartbeat",
        "oscillator without heartbeat output",
    ),
];

const PRED_OPTS: [Opt; 7] = [
    opt(
        "reset-fraction",
        "pred.reset_fraction",
        "detector fraction on low rungs for Reset",
    ),
    opt("y-threshold", "pred.y_threshold", "Y count for ThH"),
    opt("y-low", "pred.y_low", "Y count bound for ThL"),
    opt("d-threshold", "pred.d_threshold", "D count for Alarm"),
    opt("hb-high", "pred.hb_high", "H count for Hpres and hbHigh"),
    opt("hb-low", "pred.hb_low", "H count bound for hbLow"),
    opt("tau", "pred.tau", "health threshold (default per state)"),
];

const CLIENT_OPTS: [Opt; 5] = [
    opt("params", "params.file", "internal parameter file"),
    opt("client-u", "client.u", "client bound u"),
    opt("client-v", "client.v", "client bound v"),
    opt("eps", "client.eps", "client error budget eps"),
    opt("delta", "client.delta", "client error budget delta"),
];

const SIM_OPTS: [Opt; 5] = [
    opt("t-end", "sim.t_end", "simulation end time"),
    opt("runs", "sim.runs", "number of runs"),
    opt("seed", "seed", "master seed"),
    opt("grid", "sim.grid", "sampling grid step"),
    opt("max-events", "sim.max_events", "event cap per run"),
];

const CHECK_OPTS: [Opt; 12] = [
    opt(
        "formulas",
        "check.formulas",
        "file with one formula per line",
    ),
    opt(
        "goals",
        "check.goals",
        "goal set: mwt, mwt-leaves or oscillator",
    ),
    opt("mode", "check.mode", "exact or statistical"),
    opt("caps", "check.caps", "per-species count cap for exact mode"),
    opt(
        "max-states",
        "check.max_states",
        "state limit for exact mode",
    ),
    opt("runs", "check.runs", "statistical runs"),
    opt("horizon", "check.horizon", "statistical simulation horizon"),
    opt(
        "alpha",
        "check.alpha",
        "significance of the Wilson interval",
    ),
    opt(
        "nested-runs",
        "check.nested_runs",
        "re-simulations per state for nested operators",
    ),
    opt("seed", "seed", "master seed"),
    opt(
        "hb-delta",
        "hb.delta",
        "five heartbeat error budgets, comma separated",
    ),
    opt(
        "hb-t",
        "hb.t",
        "four heartbeat time bounds, comma separated",
    ),
];

const DEMO_OPTS: [Opt; 16] = [
    opt("total", "demo.total", "oscillator population"),
    opt("horizon", "demo.horizon", "simulation horizon"),
    opt("runs", "demo.runs", "number of runs"),
    opt("seed", "seed", "master seed"),
    opt(
        "inject-zero",
        "demo.inject",
        "species removed to force a failure",
    ),
    opt("at-time", "demo.at_time", "injection time"),
    opt("grid", "demo.grid", "grid step of the recorded trajectory"),
    opt("kd", "model.kd", "absence detector rungs"),
    opt("kt", "model.kt", "threshold filter rungs"),
    opt("pl", "model.pl", "absence detector population"),
    opt("pt", "model.pt", "threshold filter population"),
    opt("u", "model.u", "U count"),
    opt("r", "model.r", "R count"),
    opt("k", "model.k", "oscillator rate constant"),
    opt("k2", "model.k2", "heartbeat decay rate"),
    opt(
        "k-recovery",
        "model.k_recovery",
        "rate of the C -> A recovery step",
    ),
];

const SWEEP_OPTS: [Opt; 8] = [
    Opt {
        flag: "axis",
        key: "sweep.axes",
        help: "axis as name=start:end:step or name=v1,v2 (repeatable)",
        switch: false,
        multi: true,
    },
    opt(
        "metric",
        "sweep.metric",
        "first-passage, probability, detection-delay or false-alarm",
    ),
    switch("force", "sweep.force", "allow more than 10000 points"),
    opt("runs", "sweep.runs", "runs per point for simulated metrics"),
    opt("horizon", "sweep.horizon", "horizon for simulated metrics"),
    opt("seed", "seed", "master seed"),
    opt(
        "caps",
        "check.caps",
        "per-species cap for the probability metric",
    ),
    opt(
        "formulas",
        "check.formulas",
        "formula file for the probability metric (first formula is used)",
    ),
];

fn add_opts(mut cmd: Command, opts: &[Opt]) -> Command {
    for o in opts {
        let mut a = Arg::new(o.flag).long(o.flag).help(o.help);
        a = if o.switch {
            a.action(ArgAction::SetTrue)
        } else if o.multi {
            a.action(ArgAction::Append).value_name("VALUE")
        } else {
            a.value_name("VALUE")
        };
        cmd = cmd.arg(a);
    }
    cmd
}

fn common(cmd: Command) -> Command {
    cmd.arg(
        Arg::new("config")
            .long("config")
            .value_name("FILE")
            .help("configuration file"),
    )
    .arg(
        Arg::new("out")
            .long("out")
            .value_name("DIR")
            .help("output directory"),
    )
}

fn command() -> Command {
    let parse =
        common(Command::new("parse").about("Parse a .crn file and print its canonical form"))
            .arg(Arg::new("file").value_name("FILE"))
            .arg(
                Arg::new("strict")
                    .long("strict")
                    .action(ArgAction::SetTrue)
                    .help("require species declarations"),
            );
    let build = add_opts(
        add_opts(
            common(Command::new("build").about("Build a model and write model.crn and init.txt"))
                .arg(
                    Arg::new("kind")
                        .value_name("KIND")
                        .help(MODEL_KINDS.join(", ")),
                ),
            &MODEL_OPTS[2..],
        ),
        &PRED_OPTS,
    );
    let simulate = add_opts(
        add_opts(
            common(Command::new("simulate").about("Simulate runs and write run_<i>.csv")),
            &MODEL_OPTS,
        ),
        &SIM_OPTS,
    );
    let check = add_opts(
        add_opts(
            add_opts(
                add_opts(
                    common(Command::new("check").about("Check CSL formulas or goal sets")),
                    &MODEL_OPTS,
                ),
                &PRED_OPTS,
            ),
            &CHECK_OPTS,
        ),
        &CLIENT_OPTS,
    );
    let params = add_opts(
        common(Command::new("params").about("Synthesize or check internal parameters")).arg(
            Arg::new("action")
                .value_name("ACTION")
                .help("synth or check"),
        ),
        &[
            opt(
                "params",
                "params.file",
                "internal parameter file (for check)",
            ),
            opt("u", "client.u", "client bound u"),
            opt("v", "client.v", "client bound v"),
            opt("eps", "client.eps", "client error budget eps"),
            opt("delta", "client.delta", "client error budget delta"),
        ],
    );
    let demo = add_opts(
        common(
            Command::new("demo-recovery")
                .about("Failure, alarm and recovery of the composed system"),
        ),
        &DEMO_OPTS,
    );
    let sweep = add_opts(
        add_opts(
            add_opts(
                add_opts(
                    common(Command::new("sweep").about("Evaluate a metric over a parameter grid")),
                    &MODEL_OPTS,
                ),
                &PRED_OPTS,
            ),
            &SWEEP_OPTS,
        ),
        &CLIENT_OPTS,
    );
    Command::new("crnwd")
        .about("Stochastic chemical reaction network workbench for a molecular watchdog timer")
        .subcommand_required(true)
        .subcommands([parse, build, simulate, check, params, demo, sweep])
}

fn all_opts(name: &str) -> Vec<&'static Opt> {
    static PARAMS: [Opt; 5] = [
        opt("params", "params.file", ""),
        opt("u", "client.u", ""),
        opt("v", "client.v", ""),
        opt("eps", "client.eps", ""),
        opt("delta", "client.delta", ""),
    ];
    let groups: Vec<&'static [Opt]> = match name {
        "build" => vec![&MODEL_OPTS[2..], &PRED_OPTS],
        "simulate" => vec![&MODEL_OPTS, &SIM_OPTS],
        "check" => vec![&MODEL_OPTS, &PRED_OPTS, &CHECK_OPTS, &CLIENT_OPTS],
        "params" => vec![&PARAMS],
        "demo-recovery" => vec![&DEMO_OPTS],
        "sweep" => vec![&MODEL_OPTS, &PRED_OPTS, &SWEEP_OPTS, &CLIENT_OPTS],
        _ => vec![],
    };
    groups.into_iter().flatten().collect()
}

fn from_cli(m: &ArgMatches, id: &str) -> bool {
    m.value_source(id) == Some(ValueSource::CommandLine)
}

/// Merges the configuration file with command-line flags (flags win).
fn merged_config(name: &str, m: &ArgMatches) -> Res<KvMap> {
    let mut kv = match m.get_one::<String>("config") {
        Some(path) => {
            let text = read(Path::new(path))?;
            parse_kv(&text).map_err(|e| CliError(format!("{path}: {e}")))?
        }
        None => KvMap::new(),
    };
    kv.remove("command");
    for o in all_opts(name) {
        if !from_cli(m, o.flag) {
            continue;
        }
        let value = if o.switch {
            "true".to_string()
        } else if o.multi {
            m.get_many::<String>(o.flag)
                .into_iter()
                .flatten()
                .cloned()
                .collect::<Vec<_>>()
                .join(";")
        } else {
            m.get_one::<String>(o.flag).cloned().unwrap_or_default()
        };
        kv.insert(o.key.to_string(), value);
    }
    let positional = match name {
        "parse" => Some(("file", "parse.file")),
        "build" => Some(("kind", "model.kind")),
        "params" => Some(("action", "params.action")),
        _ => None,
    };
    if let Some((id, key)) = positional {
        if let Some(v) = m.get_one::<String>(id) {
            kv.insert(key.into(), v.clone());
        }
    }
    if name == "parse" && from_cli(m, "strict") {
        kv.insert("parse.strict".into(), "true".into());
    }
    kv.insert("command".into(), name.into());
    Ok(kv)
}

fn configure_threads() -> Res<()> {
    if let Ok(v) = std::env::var("CRNWD_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError(format!(
                "CRNWD_THREADS must be a positive integer, got `{v}`"
            ))
        })?;
        // the global pool can only be set once per process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

/// Runs the command line `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let m = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let (name, sub) = m.subcommand().expect("subcommand required");
    let result = configure_threads()
        .and_then(|_| merged_config(name, sub))
        .and_then(|kv| {
            let out = sub.get_one::<String>("out").map(PathBuf::from);
            dispatch(name, &kv, out.as_deref())
        });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(name: &str, kv: &KvMap, out: Option<&Path>) -> Res<i32> {
    match name {
        "parse" => cmd_parse(kv, out),
        "build" => cmd_build(kv, out),
        "simulate" => cmd_simulate(kv, out),
        "check" => cmd_check(kv, out),
        "params" => cmd_params(kv, out),
        "demo-recovery" => cmd_demo(kv, out),
        "sweep" => cmd_sweep(kv, out),
        _ => err(format!("unknown command `{name}`")),
    }
}

// ---- configuration access ----

struct Cfg<'a>(&'a KvMap);

impl Cfg<'_> {
    fn str(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Res<Option<T>> {
        match self.str(key) {
            None => Ok(None),
            Some(v) => v
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| CliError(format!("`{key}`: cannot parse `{v}`"))),
        }
    }

    fn get<T: std::str::FromStr>(&self, key: &str, default: T) -> Res<T> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    fn flag(&self, key: &str) -> Res<bool> {
        self.get(key, false)
    }
}

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| CliError(format!("cannot read {}: {e}", path.display())))
}

fn write(dir: &Path, name: &str, contents: &str) -> Res<()> {
    let p = dir.join(name);
    fs::write(&p, contents).map_err(|e| CliError(format!("cannot write {}: {e}", p.display())))
}

fn out_dir(out: Option<&Path>) -> Res<PathBuf> {
    let dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("crnwd_out"));
    fs::create_dir_all(&dir)
        .map_err(|e: io::Error| CliError(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_manifest(dir: &Path, kv: &KvMap) -> Res<()> {
    write(dir, "manifest.txt", &write_kv(kv))
}

// ---- models ----

struct Built {
    model: Model,
    preds: PredicateConfig,
}

fn split_arg(s: &str) -> Res<[i64; 3]> {
    let parts: Vec<i64> = s
        .split(',')
        .map(|p| p.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError(format!("split `{s}` must be three integers")))?;
    <[i64; 3]>::try_from(parts).map_err(|_| CliError(format!("split `{s}` must be three integers")))
}

fn mwt_config(c: &Cfg) -> Res<MwtConfig> {
    let mut m = MwtConfig::new(
        c.get("model.kd", 3)?,
        c.get("model.pl", 5)?,
        c.get("model.kt", 3)?,
        c.get("model.pt", 5)?,
        c.get("model.u", 1)?,
        c.get("model.r", 1)?,
    );
    m.h_init = c.get("model.h_init", 0)?;
    m.reset_fraction = c.get("pred.reset_fraction", m.reset_fraction)?;
    m.y_threshold = c.get("pred.y_threshold", m.y_threshold)?;
    m.y_low = c.get("pred.y_low", m.y_low)?;
    m.d_threshold = c.get("pred.d_threshold", m.d_threshold)?;
    m.hb_high = c.get("pred.hb_high", m.hb_high)?;
    m.hb_low = c.get("pred.hb_low", m.hb_low)?;
    m.validate().map_err(wrap)?;
    Ok(m)
}

fn osc_config(c: &Cfg) -> Res<OscillatorConfig> {
    let total = c.get("model.total", 1000)?;
    let mut o = OscillatorConfig::split(
        total,
        split_arg(c.str("model.split").unwrap_or("80,10,10"))?,
    )
    .map_err(wrap)?;
    o.k = c.get("model.k", o.k)?;
    o.k2 = c.get("model.k2", o.k2)?;
    o.k_recovery = c.get("model.k_recovery", o.k_recovery)?;
    o.tau = c.parse("pred.tau")?;
    o.validate().map_err(wrap)?;
    Ok(o)
}

fn default_preds(c: &Cfg) -> Res<PredicateConfig> {
    let mut p = PredicateConfig::default();
    p.reset_fraction = c.get("pred.reset_fraction", p.reset_fraction)?;
    p.y_threshold = c.get("pred.y_threshold", p.y_threshold)?;
    p.y_low = c.get("pred.y_low", p.y_low)?;
    p.d_threshold = c.get("pred.d_threshold", p.d_threshold)?;
    p.hb_high = c.get("pred.hb_high", p.hb_high)?;
    p.hb_low = c.get("pred.hb_low", p.hb_low)?;
    p.tau = c.parse("pred.tau")?;
    Ok(p)
}

fn mwt_preds(c: &Cfg, m: &MwtConfig) -> Res<PredicateConfig> {
    let mut p = m.predicates();
    p.tau = c.parse("pred.tau")?;
    Ok(p)
}

fn build_kind(kind: &str, c: &Cfg) -> Res<Built> {
    let ladder = |c: &Cfg| -> Res<LadderSpec> {
        Ok(LadderSpec::new(
            c.get("model.k", 3)?,
            c.get("model.u", 1.0)?,
            c.get("model.r", 1.0)?,
            c.get("model.p", 1)?,
        ))
    };
    let built = match kind {
        "unary-ladder" => Built {
            model: unary_ladder(&ladder(c)?).map_err(wrap)?,
            preds: default_preds(c)?,
        },
        "catalyzed-ladder" => {
            let spec = LadderSpec::new(c.get("model.k", 3)?, 1.0, 1.0, c.get("model.p", 1)?);
            Built {
                model: catalyzed_ladder(
                    &spec,
                    ("U", c.get("model.u", 1)?),
                    ("R", c.get("model.r", 1)?),
                )
                .map_err(wrap)?,
                preds: default_preds(c)?,
            }
        }
        "mwt" => {
            let m = mwt_config(c)?;
            Built {
                model: build_mwt(&m).map_err(wrap)?,
                preds: mwt_preds(c, &m)?,
            }
        }
        "mwt-heartbeat" => {
            let m = mwt_config(c)?;
            let w = build_mwt(&m).map_err(wrap)?;
            let hb = build_heartbeat_decay(c.get("model.k2", 0.1)?, m.h_init).map_err(wrap)?;
            let crn = Crn::merge(&[&w.crn, &hb.crn]).map_err(wrap)?;
            let init = crn.project_state(&w.crn, &w.init, 0);
            Built {
                model: Model { crn, init },
                preds: mwt_preds(c, &m)?,
            }
        }
        "oscillator" => {
            let o = osc_config(c)?;
            Built {
                model: build_oscillator(&o, !c.flag("model.no_heartbeat")?).map_err(wrap)?,
                preds: default_preds(c)?,
            }
        }
        "recovery" => {
            let o = osc_config(c)?;
            let crn = build_recovery(&o).map_err(wrap)?;
            let init = crn
                .state(&[("A", o.init_a), ("B", o.init_b), ("C", o.init_c)])
                .map_err(wrap)?;
            Built {
                model: Model { crn, init },
                preds: default_preds(c)?,
            }
        }
        "composed-demo" => {
            let o = osc_config(c)?;
            let m = mwt_config(c)?;
            let mut preds = mwt_preds(c, &m)?;
            preds.tau = o.tau;
            Built {
                model: build_composed(&o, &m).map_err(wrap)?,
                preds,
            }
        }
        other => {
            return err(format!(
                "unknown model kind `{other}` (expected one of {})",
                MODEL_KINDS.join(", ")
            ))
        }
    };
    Ok(built)
}

fn load_model(c: &Cfg) -> Res<Built> {
    match (c.str("model.file"), c.str("model.kind")) {
        (Some(_), Some(_)) => err("give exactly one model source: a model file or a builder kind"),
        (None, None) => err("no model given: use --model FILE or --kind KIND"),
        (Some(file), None) => {
            let doc = parse_crn_with(&read(Path::new(file))?, ParseOptions::default())
                .map_err(|e| CliError(format!("{file}: {e}")))?;
            let crn = doc.to_crn().map_err(wrap)?;
            let init = doc.initial_state(&crn).map_err(wrap)?;
            Ok(Built {
                model: Model { crn, init },
                preds: default_preds(c)?,
            })
        }
        (None, Some(kind)) => build_kind(kind, c),
    }
}

// ---- commands ----

fn cmd_parse(kv: &KvMap, out: Option<&Path>) -> Res<i32> {
    let c = Cfg(kv);
    let file = c
        .str("parse.file")
        .ok_or_else(|| CliError("no input file given".into()))?;
    let opts = ParseOptions {
        strict: c.flag("parse.strict")?,
    };
    let doc = parse_crn_with(&read(Path::new(file))?, opts)
        .map_err(|e| CliError(format!("{file}: {e}")))?;
    let crn = doc.to_crn().map_err(wrap)?;
    doc.initial_state(&crn).map_err(wrap)?;
    let canonical = serialize_crn(&doc);
    println!(
        "{} species, {} reactions",
        crn.num_species(),
        crn.reactions().len()
    );
    print!("{canonical}");
    if let Some(out) = out {
        let dir = out_dir(Some(out))?;
        write(&dir, "model.crn", &canonical)?;
        write_manifest(&dir, kv)?;
    }
    Ok(EXIT_OK)
}

fn init_kv(crn: &Crn, init: &State) -> String {
    let m: KvMap = crn
        .species()
        .iter()
        .map(|s| (s.name.clone(), init.0[s.index].to_string()))
        .collect();
    write_kv(&m)
}

fn cmd_build(kv: &KvMap, out: Option<&Path>) -> Res<i32> {
    let c = Cfg(kv);
    let kind = c
        .str("model.kind")
        .ok_or_else(|| CliError("no model kind given".into()))?;
    let b = build_kind(kind, &c)?;
    let dir = out_dir(out)?;
    let doc = CrnDocument::from_crn(&b.model.crn, Some(&b.model.init));
    write(&dir, "model.crn", &serialize_crn(&doc))?;
    write(&dir, "init.txt", &init_kv(&b.model.crn, &b.model.init))?;
    write_manifest(&dir, kv)?;
    println!(
        "{kind}: {} species, {} reactions -> {}",
        b.model.crn.num_species(),
        b.model.crn.reactions().len(),
        dir.display()
    );
    Ok(EXIT_OK)
}

fn csv_header(crn: &Crn) -> String {
    let mut h = String::from("time");
    for s in crn.species_names() {
        h.push(',');
        h.push_str(s);
    }
    h.push('\n');
    h
}

fn csv_rows(header: String, rows: impl Iterator<Item = (f64, Vec<i64>)>) -> String {
    let mut s = header;
    for (t, x) in rows {
        s.push_str(&t.to_string());
        for v in x {
            s.push(',');
            s.push_str(&v.to_string());
        }
        s.push('\n');
    }
    s
}

fn cmd_simulate(kv: &KvMap, out: Option<&Path>) -> Res<i32> {
    let c = Cfg(kv);
    let b = load_model(&c)?;
    let mut sim = SimConfig::new(c.get("sim.t_end", 10.0)?, c.get("seed", 1)?);
    sim.max_events = c.get("sim.max_events", sim.max_events)?;
    let grid: f64 = c.get("sim.grid", 1.0)?;
    sim.sample_grid = Some(grid);
    let runs: usize = c.get("sim.runs", 1)?;
    if runs == 0 {
        return err("number of runs must be positive");
    }
    let trajs = simulate_ensemble(&b.model.crn, &b.model.init, &sim, runs).map_err(wrap)?;
    let dir = out_dir(out)?;
    let header = csv_header(&b.model.crn);
    for (i, t) in trajs.iter().enumerate() {
        let rows = sample_on_grid(t, &b.model.crn, grid)
            .into_iter()
            .map(|(t, s)| (t, s.0));
        write(
            &dir,
            &format!("run_{i}.csv"),
            &csv_rows(header.clone(), rows),
        )?;
    }
    let mut manifest = kv.clone();
    for i in 0..runs {
        manifest.insert(
            format!("seeds.run_{i}"),
            sim.for_run(i as u64).master_seed.to_string(),
        );
    }
    write_manifest(&dir, &manifest)?;
    println!("{runs} run(s) written to {}", dir.display());
    Ok(EXIT_OK)
}

fn client_from(c: &Cfg) -> Res<ClientPolytope> {
    let cl = ClientPolytope::new(
        c.get("client.u", 10.0)?,
        c.get("client.v", 20.0)?,
        c.get("client.eps", 0.05)?,
        c.get("client.delta", 0.05)?,
    );
    cl.validate()
        .map_err(|e| CliError(format!("client: {e}")))?;
    Ok(cl)
}

/// Internal parameters from a file (keys under `client.` are ignored).
fn params_from_file(path: &str) -> Res<InternalParams> {
    let kv = parse_kv(&read(Path::new(path))?).map_err(|e| CliError(format!("{path}: {e}")))?;
    let own: KvMap = kv.into_iter().filter(|(k, _)| !k.contains('.')).collect();
    InternalParams::from_kv(&own).map_err(|e| CliError(format!("{path}: {e}")))
}

fn params_for(c: &Cfg, client: &ClientPolytope) -> Res<InternalParams> {
    match c.str("params.file") {
        Some(f) => params_from_file(f),
        None => synthesize(client).map_err(|e| CliError(format!("parameter synthesis: {e}"))),
    }
}

fn list<const N: usize>(c: &Cfg, key: &str, default: [f64; N]) -> Res<[f64; N]> {
    match c.str(key) {
        None => Ok(default),
        Some(s) => {
            let v: Vec<f64> = s
                .split(',')
                .map(|x| x.trim().parse())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError(format!("`{key}` must be {N} numbers")))?;
            <[f64; N]>::try_from(v).map_err(|_| CliError(format!("`{key}` must be {N} numbers")))
        }
    }
}

fn heartbeat_params(c: &Cfg, preds: &PredicateConfig) -> Res<HeartbeatGoalParams> {
    let d = HeartbeatGoalParams::default();
    let hb = HeartbeatGoalParams {
        delta: list(c, "hb.delta", d.delta)?,
        t: list(c, "hb.t", d.t)?,
        hb_high: preds.hb_high,
        hb_low: preds.hb_low,
    };
    hb.validate().map_err(wrap)?;
    Ok(hb)
}

fn formulas_for(c: &Cfg, preds: &PredicateConfig) -> Res<Vec<(String, Formula)>> {
    match (c.str("check.formulas"), c.str("check.goals")) {
        (Some(_), Some(_)) => err("give either a formula file or a goal set, not both"),
        (None, None) => err("nothing to check: use --formulas FILE or --goals SET"),
        (Some(file), None) => {
            let client = client_from(c)?;
            let mut env: Env = match params_for(c, &client) {
                Ok(p) => crate::csl::catalog::goal_env(&p, &client),
                Err(_) => Env::new(),
            };
            let hb = heartbeat_params(c, preds)?;
            for (i, d) in hb.delta.iter().enumerate() {
                env.insert(format!("d{}", i + 1), *d);
            }
            for (i, t) in hb.t.iter().enumerate() {
                env.insert(format!("t{}", i + 1), *t);
            }
            let fs = parse_formula_file(&read(Path::new(file))?)
                .map_err(|e| CliError(format!("{file}: {e}")))?;
            fs.into_iter()
                .map(|(id, f)| {
                    Ok((
                        id,
                        f.bind(&env).map_err(|e| CliError(format!("{file}: {e}")))?,
                    ))
                })
                .collect()
        }
        (None, Some(set)) => match set {
            "mwt" | "mwt-leaves" => {
                let client = client_from(c)?;
                let p = params_for(c, &client)?;
                let cat = goal_catalog(&p, &client).map_err(wrap)?;
                Ok(cat
                    .into_iter()
                    .enumerate()
                    .filter(|(_, g)| set == "mwt" || g.agent.is_some())
                    .map(|(i, g)| {
                        let agent = g.agent.map(|a: Agent| format!("-{a}")).unwrap_or_default();
                        (format!("goal{:02}{agent}", i + 1), g.formula)
                    })
                    .collect())
            }
            "oscillator" => {
                let hb = heartbeat_params(c, preds)?;
                Ok(oscillator_properties(&hb)
                    .map_err(wrap)?
                    .into_iter()
                    .enumerate()
                    .map(|(i, (_, f))| (format!("osc{}", i + 1), f))
                    .collect())
            }
            other => err(format!(
                "unknown goal set `{other}` (expected mwt, mwt-leaves or oscillator)"
            )),
        },
    }
}

fn aggregate(results: &[(String, String, VerificationResult)]) -> i32 {
    if results.iter().any(|r| r.2.verdict == Verdict::Fails) {
        EXIT_FAILS
    } else if results.iter().any(|r| r.2.verdict == Verdict::Undecided) {
        EXIT_UNDECIDED
    } else {
        EXIT_OK
    }
}

fn exact_ctmc(c: &Cfg, model: &Model) -> Res<Ctmc> {
    let cap: i64 = c
        .parse("check.caps")?
        .ok_or_else(|| CliError("exact mode needs per-species caps (--caps N)".into()))?;
    let mut caps = ExploreCaps::uniform(model.crn.num_species(), cap);
    caps.max_states = c.get("check.max_states", DEFAULT_MAX_STATES)?;
    Ctmc::enumerate(&model.crn, &model.init, &caps).map_err(wrap)
}

fn cmd_check(kv: &KvMap, out: Option<&Path>) -> Res<i32> {
    let c = Cfg(kv);
    let b = load_model(&c)?;
    let formulas = formulas_for(&c, &b.preds)?;
    let mode = c.str("check.mode").unwrap_or("exact");
    let results: Vec<(String, String, VerificationResult)> = match mode {
        "exact" => {
            let ctmc = exact_ctmc(&c, &b.model)?;
            let ctx = Context::for_ctmc(&ctmc, b.preds.clone());
            formulas
                .into_iter()
                .map(|(id, f)| {
                    let r = evaluate_exact(&ctmc, &f, &ctx)
                        .map_err(|e| CliError(format!("{id}: {e}")))?;
                    Ok((id, f.to_string(), r))
                })
                .collect::<Res<_>>()?
        }
        "statistical" => {
            let ctx = Context::for_crn(&b.model.crn, b.preds.clone());
            let needed = formulas
                .iter()
                .map(|(_, f)| f.max_time())
                .collect::<Result<Vec<_>, _>>()
                .map_err(wrap)?
                .into_iter()
                .fold(0.0, f64::max);
            let mut cfg = StatConfig::new(
                c.get("check.runs", 1000)?,
                c.get("check.horizon", needed.max(1.0))?,
                c.get("seed", 1)?,
            );
            cfg.alpha = c.get("check.alpha", cfg.alpha)?;
            cfg.nested_runs = c.get("check.nested_runs", cfg.nested_runs)?;
            formulas
                .into_iter()
                .map(|(id, f)| {
                    let r = evaluate_statistical(&b.model.crn, &b.model.init, &f, &ctx, &cfg)
                        .map_err(|e| CliError(format!("{id}: {e}")))?;
                    Ok((id, f.to_string(), r))
                })
                .collect::<Res<_>>()?
        }
        other => {
            return err(format!(
                "unknown mode `{other}` (expected exact or statistical)"
            ))
        }
    };
    let text = text_report(&results);
    print!("{text}");
    if let Some(out) = out {
        let dir = out_dir(Some(out))?;
        write(&dir, "report.txt", &text)?;
        write(&dir, "report.csv", &csv_report(&results))?;
        write_manifest(&dir, kv)?;
    }
    Ok(aggregate(&results))
}

fn cmd_params(kv: &KvMap, out: Option<&Path>) -> Res<i32> {
    let c = Cfg(kv);
    let client = || -> Res<ClientPolytope> {
        for k in ["client.u", "client.v", "client.eps", "client.delta"] {
            if c.str(k).is_none() {
                return err(format!("missing client parameter `{}`", &k[7..]));
            }
        }
        client_from(&c)
    };
    let (text, code) = match c.str("params.action") {
        Some("synth") => {
            let cl = client()?;
            match synthesize(&cl) {
                Ok(p) => {
                    let mut m = p.to_kv();
                    for (k, v) in cl.to_kv() {
                        m.insert(format!("client.{k}"), v);
                    }
                    (write_kv(&m), EXIT_OK)
                }
                Err(e) => (format!("infeasible: {e}\n"), EXIT_FAILS),
            }
        }
        Some("check") => {
            let cl = client()?;
            let file = c
                .str("params.file")
                .ok_or_else(|| CliError("check needs --params FILE".into()))?;
            let p = params_from_file(file)?;
            let v = validate_constraints(&p, &cl);
            if v.is_empty() {
                ("all 11 constraints satisfied\n".to_string(), EXIT_OK)
            } else {
                (v.iter().map(|x| format!("{x}\n")).collect(), EXIT_FAILS)
            }
        }
        Some(other) => {
            return err(format!(
                "unknown params action `{other}` (expected synth or check)"
            ))
        }
        None => return err("params needs an action: synth or check"),
    };
    print!("{text}");
    if let Some(out) = out {
        let dir = out_dir(Some(out))?;
        let name = if c.str("params.action") == Some("synth") {
            "params.txt"
        } else {
            "constraints.txt"
        };
        write(&dir, name, &text)?;
        write_manifest(&dir, kv)?;
    }
    Ok(code)
}

fn demo_config(c: &Cfg) -> Res<DemoConfig> {
    let mut d = DemoConfig::new(c.get("demo.total", 300)?).map_err(wrap)?;
    d.horizon = c.get("demo.horizon", d.horizon)?;
    d.runs = c.get("demo.runs", d.runs)?;
    d.seed = c.get("seed", d.seed)?;
    d.grid = c.get("demo.grid", d.grid)?;
    d.osc.k = c.get("model.k", d.osc.k)?;
    d.osc.k2 = c.get("model.k2", d.osc.k2)?;
    d.osc.k_recovery = c.get("model.k_recovery", d.osc.k_recovery)?;
    d.osc.validate().map_err(wrap)?;
    let m = &mut d.mwt;
    m.kd = c.get("model.kd", m.kd)?;
    m.kt = c.get("model.kt", m.kt)?;
    m.u_count = c.get("model.u", m.u_count)?;
    m.r_count = c.get("model.r", m.r_count)?;
    if let Some(pl) = c.parse::<i64>("model.pl")? {
        let fresh = MwtConfig::new(m.kd, pl, m.kt, m.pt, m.u_count, m.r_count);
        m.pl = pl;
        m.y_threshold = fresh.y_threshold;
        m.y_low = fresh.y_low;
    }
    if let Some(pt) = c.parse::<i64>("model.pt")? {
        m.pt = pt;
        m.d_threshold = MwtConfig::new(m.kd, m.pl, m.kt, pt, 1, 1).d_threshold;
    }
    m.reset_cut = m.kd / 2;
    m.validate().map_err(wrap)?;
    match (c.str("demo.inject"), c.parse::<f64>("demo.at_time")?) {
        (Some(sp), Some(t)) => {
            d.injection = Some(Injection {
                species: sp.to_string(),
                time: t,
            })
        }
        (None, None) => {}
        _ => return err("--inject-zero and --at-time must be given together"),
    }
    if d.runs == 0 {
        return err("number of runs must be positive");
    }
    Ok(d)
}

fn opt_time(x: Option<f64>) -> String {
    x.map_or("none".to_string(), |t| t.to_string())
}

fn cmd_demo(kv: &KvMap, out: Option<&Path>) -> Res<i32> {
    let c = Cfg(kv);
    let d = demo_config(&c)?;
    let s = run_demo(&d).map_err(wrap)?;
    let model = d.model().map_err(wrap)?;
    let dir = out_dir(out)?;
    let mut csv = String::from(
        "run,seed,failure_time,false_alarm,alarm_time,recovery_time,reset_time,clear_time\n",
    );
    for r in &s.runs {
        let recovery = if r.recovery_time.is_some() || r.failure_time.is_none() {
            opt_time(r.recovery_time)
        } else {
            "no-recovery".to_string()
        };
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.index,
            r.seed,
            opt_time(r.failure_time),
            r.false_alarm,
            opt_time(r.alarm_time),
            recovery,
            opt_time(r.reset_time),
            opt_time(r.clear_time)
        ));
    }
    write(&dir, "summary.csv", &csv)?;
    if let Some(r0) = s.runs.first() {
        write(
            &dir,
            "run_0.csv",
            &csv_rows(csv_header(&model.crn), r0.samples.iter().cloned()),
        )?;
    }
    let summary = format!(
        "runs = {}\nfailed = {}\nfalse_alarms = {}\nrecovery_fraction = {}\nrearm_fraction = {}\n",
        s.runs.len(),
        s.failed(),
        s.runs.iter().filter(|r| r.false_alarm).count(),
        fmt_f64(s.recovery_fraction()),
        fmt_f64(s.rearm_fraction())
    );
    write(&dir, "summary.txt", &summary)?;
    write_manifest(&dir, kv)?;
    print!("{summary}");
    Ok(EXIT_OK)
}

// ---- sweep ----

#[derive(Debug, Clone, PartialEq)]
struct Axis {
    name: String,
    values: Vec<f64>,
}

fn parse_axis(spec: &str) -> Res<Axis> {
    let (name, range) = spec
        .split_once('=')
        .ok_or_else(|| CliError(format!("axis `{spec}` must look like name=start:end:step")))?;
    let name = name.trim().to_string();
    if !MODEL_PARAMS.contains(&name.as_str()) || name == "split" {
        return err(format!("axis `{name}` is not a sweepable model parameter"));
    }
    let num = |s: &str| -> Res<f64> {
        s.trim()
            .parse()
            .map_err(|_| CliError(format!("axis `{name}`: bad number `{s}`")))
    };
    let values = if range.contains(':') {
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 {
            return err(format!("axis `{name}` must be start:end:step"));
        }
        let (a, b, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || b < a {
            return err(format!("axis `{name}` is empty"));
        }
        let n = ((b - a) / step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| a + i as f64 * step).collect()
    } else {
        range
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(num)
            .collect::<Res<Vec<_>>>()?
    };
    if values.is_empty() {
        return err(format!("axis `{name}` is empty"));
    }
    Ok(Axis { name, values })
}

fn sweep_points(axes: &[Axis]) -> Vec<Vec<f64>> {
    let mut points = vec![vec![]];
    for a in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                a.values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    points
}

fn metric_at(metric: &str, kv: &KvMap, seed: u64) -> Res<f64> {
    let c = Cfg(kv);
    match metric {
        "first-passage" => {
            let k = match c.parse("model.kd")? {
                Some(kd) => kd,
                None => c.get("model.k", 3)?,
            };
            let spec = LadderSpec::new(k, c.get("model.u", 1.0)?, c.get("model.r", 1.0)?, 1);
            Ok(ladder_first_passage(&spec, &[]).map_err(wrap)?.mean)
        }
        "probability" => {
            let b = load_model(&c)?;
            let formulas = formulas_for(&c, &b.preds)?;
            let (_, f) = formulas.first().ok_or_else(|| CliError("formula file is empty".into()))?;
            let ctmc = exact_ctmc(&c, &b.model)?;
            let ctx = Context::for_ctmc(&ctmc, b.preds.clone());
            let r = evaluate_exact(&ctmc, f, &ctx).map_err(wrap)?;
            Ok(match r.probabilities.last() {
                Some(s) => s.probability,
                None => f64::from(u8::from(r.verdict == Verdict::Holds)),
            })
        }
        "detection-delay" => {
            let b = load_model(&c)?;
            let ctx = Context::for_crn(&b.model.crn, b.preds.clone());
            let alarm = ctx.compile(&crate::csl::Atom::Named(crate::csl::Named::Alarm)).map_err(wrap)?;
            let h = b.model.crn.require("H").map_err(wrap)?;
            let mut init = b.model.init.clone();
            init.0[h] = 0;
            let runs: usize = c.get("sweep.runs", 100)?;
            let horizon: f64 = c.get("sweep.horizon", 100.0)?;
            let times = (0..runs)
                .into_par_iter()
                .map(|i| {
                    let mut sim = Gillespie::new(&b.model.crn, &init, mix64(seed, i as u64)).map_err(wrap)?;
                    if alarm.eval(&sim.state) {
                        return Ok(0.0);
                    }
                    loop {
                        match sim.step(horizon).map_err(wrap)? {
                            Step::Fired { time, .. } if alarm.eval(&sim.state) => return Ok(time),
                            Step::Fired { .. } => {}
                            _ => return Ok(horizon),
                        }
                    }
                })
                .collect::<Res<Vec<f64>>>()?;
            Ok(times.iter().sum::<f64>() / runs as f64)
        }
        "false-alarm" => {
            let mut d = DemoConfig::new(c.get("model.total", 300)?).map_err(wrap)?;
            d.runs = c.get("sweep.runs", 100)?;
            d.horizon = c.get("sweep.horizon", 100.0)?;
            d.seed = seed;
            d.osc.k = c.get("model.k", d.osc.k)?;
            d.osc.k2 = c.get("model.k2", d.osc.k2)?;
            let s = run_demo(&d).map_err(wrap)?;
            Ok(s.runs.iter().filter(|r| r.false_alarm).count() as f64 / s.runs.len() as f64)
        }
        other => err(format!(
            "unknown metric `{other}` (expected first-passage, probability, detection-delay or false-alarm)"
        )),
    }
}

fn cmd_sweep(kv: &KvMap, out: Option<&Path>) -> Res<i32> {
    let c = Cfg(kv);
    let axes = c
        .str("sweep.axes")
        .unwrap_or("")
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(parse_axis)
        .collect::<Res<Vec<_>>>()?;
    if axes.is_empty() {
        return err("sweep needs at least one axis");
    }
    let metric = c.str("sweep.metric").unwrap_or("first-passage").to_string();
    let count = axes
        .iter()
        .try_fold(1usize, |acc, a| acc.checked_mul(a.values.len()));
    match count {
        Some(n) if n <= MAX_SWEEP_POINTS || c.flag("sweep.force")? => {}
        _ => {
            return err(format!(
                "sweep exceeds {MAX_SWEEP_POINTS} points; pass --force to run it"
            ))
        }
    }
    let seed: u64 = c.get("seed", 1)?;
    let points = sweep_points(&axes);
    let values = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut local = kv.clone();
            for (a, v) in axes.iter().zip(p) {
                local.insert(format!("model.{}", a.name), v.to_string());
            }
            metric_at(&metric, &local, mix64(seed, i as u64))
        })
        .collect::<Res<Vec<f64>>>()?;
    let mut csv: String = axes.iter().map(|a| format!("{},", a.name)).collect();
    csv.push_str(&metric);
    csv.push('\n');
    for (p, v) in points.iter().zip(&values) {
        for x in p {
            csv.push_str(&format!("{x},"));
        }
        csv.push_str(&fmt_f64(*v));
        csv.push('\n');
    }
    let dir = out_dir(out)?;
    write(&dir, "sweep.csv", &csv)?;
    write_manifest(&dir, kv)?;
    println!(
        "{} point(s) written to {}",
        points.len(),
        dir.join("sweep.csv").display()
    );
    Ok(EXIT_OK)
}

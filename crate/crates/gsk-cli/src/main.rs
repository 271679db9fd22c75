//! Command-line driver: comparison sweeps, the verification suite, root
//! tables, single-point determinants and resolvent grid dumps.
//!
//! Configuration comes from a JSON file (see the README for the schema);
//! any flag of the form `--path.to.key=value` overrides the matching config
//! entry, e.g. `--kernel.params.T=0.5` or `--quadrature.order=32`.
//!
//! Exit codes: 0 ok, 1 check failure, 2 configuration error, 3 numeric
//! failure.

use clap::{Parser, Subcommand};
use gsk::asymptotics::resolvent_asym;
use gsk::oracle::nystrom_resolvent;
use gsk::report::{
    emit_csv, emit_csv_to_path, run_compare, run_verify, single_logdet, RunConfig, RunContext,
};
use gsk::GskError;

#[derive(Parser)]
#[command(
    name = "gsk",
    about = "Generalized sine-kernel determinant asymptotics vs a Nystrom oracle",
    version
)]
struct Cli {
    /// JSON configuration file (built-in boson defaults when omitted).
    #[arg(long, global = true)]
    config: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the oracle-vs-asymptotics sweep over the x grid and emit CSV.
    Compare {
        /// CSV output path (stdout when omitted; overrides outputs.csv_path).
        #[arg(long)]
        out: Option<String>,
    },
    /// Run the named invariant checks and report pass/fail per check.
    Verify,
    /// Print the retained zeros of 1 + phi with residuals and pairing.
    Roots,
    /// Log-determinant at a single x by one method.
    Det {
        #[arg(long)]
        x: f64,
        /// thm2 | thm3 | oracle
        #[arg(long, default_value = "thm2")]
        method: String,
    },
    /// Dump asymptotic and discretized resolvent samples on a node subgrid.
    Resolvent {
        #[arg(long)]
        x: f64,
        /// Maximum points per grid side.
        #[arg(long, default_value_t = 24)]
        points: usize,
        /// CSV output path (stdout when omitted).
        #[arg(long)]
        out: Option<String>,
    },
}

const TOP_LEVEL_KEYS: [&str; 6] = ["kernel", "x_grid", "n", "quadrature", "tolerances", "outputs"];

fn main() {
    // Pull `--a.b.c=value` config overrides (and bare top-level keys like
    // `--n=2`) out of argv before clap sees them.
    let mut overrides = Vec::new();
    let args: Vec<String> = std::env::args()
        .filter(|arg| {
            if let Some(body) = arg.strip_prefix("--") {
                if let Some((path, value)) = body.split_once('=') {
                    if path.contains('.') || TOP_LEVEL_KEYS.contains(&path) {
                        overrides.push((path.to_string(), value.to_string()));
                        return false;
                    }
                }
            }
            true
        })
        .collect();
    let cli = Cli::parse_from(args);

    match run(cli, &overrides) {
        Ok(true) => std::process::exit(0),
        Ok(false) => std::process::exit(1),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn load_config(
    path: &Option<String>,
    overrides: &[(String, String)],
) -> Result<RunConfig, GskError> {
    let mut value: serde_json::Value = match path {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        None => serde_json::to_value(RunConfig::default()).expect("default config serializes"),
    };
    for (path, raw) in overrides {
        apply_override(&mut value, path, raw)?;
    }
    let config: RunConfig = serde_json::from_value(value)?;
    config.validate()?;
    Ok(config)
}

fn apply_override(root: &mut serde_json::Value, path: &str, raw: &str) -> Result<(), GskError> {
    let parsed: serde_json::Value =
        serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    let mut cursor = root;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, seg) in segments.iter().enumerate() {
        if !cursor.is_object() {
            return Err(GskError::Config(format!(
                "override path '{path}' descends into a non-object at '{seg}'"
            )));
        }
        let map = cursor.as_object_mut().unwrap();
        if i + 1 == segments.len() {
            map.insert(seg.to_string(), parsed);
            return Ok(());
        }
        cursor = map
            .entry(seg.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    Ok(())
}

fn run(cli: Cli, overrides: &[(String, String)]) -> Result<bool, GskError> {
    let config = load_config(&cli.config, overrides)?;
    match cli.command {
        Command::Compare { out } => {
            let out_path = out.or_else(|| config.outputs.csv_path.clone());
            let verbosity = config.outputs.verbosity;
            let report = run_compare(config)?;
            if verbosity > 0 {
                eprintln!(
                    "kernel {} | N = {} | a = {:?}",
                    report.header.kernel_label, report.header.n, report.header.remainder_scale
                );
            }
            match out_path {
                Some(p) => {
                    emit_csv_to_path(&report, &p)?;
                    eprintln!("wrote {p}");
                }
                None => {
                    let mut stdout = std::io::stdout().lock();
                    emit_csv(&report, &mut stdout)?;
                }
            }
            Ok(true)
        }
        Command::Verify => {
            let suite = run_verify(config)?;
            for c in &suite.checks {
                println!(
                    "{:>5}  {:<24} measured {:>12.4e}  threshold {:>12.4e}  {}",
                    if c.pass { "pass" } else { "FAIL" },
                    c.name,
                    c.measured,
                    c.threshold,
                    c.note
                );
            }
            Ok(suite.all_pass())
        }
        Command::Roots => {
            let ctx = RunContext::new(config)?;
            println!("retained zeros of 1+phi for {}", ctx.kernel.label());
            for w in &ctx.roots.warnings {
                println!("warning: {w}");
            }
            let print_side = |label: &str, roots: &[gsk::num_complex::Complex64], pairing: &[usize]| {
                for (i, (&q, &p)) in roots.iter().zip(pairing).enumerate() {
                    let residual =
                        (gsk::num_complex::Complex64::new(1.0, 0.0) + ctx.kernel.phi(q)).norm();
                    println!(
                        "{label}[{i}] = {:+.15e} {:+.15e}i   |1+phi| = {residual:.2e}   nearest pole #{p}",
                        q.re, q.im
                    );
                }
            };
            print_side("q+", &ctx.roots.q_plus, &ctx.roots.pairing_plus);
            print_side("q-", &ctx.roots.q_minus, &ctx.roots.pairing_minus);
            Ok(true)
        }
        Command::Det { x, method } => {
            let ctx = RunContext::new(config)?;
            let value = single_logdet(&ctx, x, &method)?;
            println!("log det (I + gamma V) [{method}] at x = {x}:");
            println!("{:+.17e} {:+.17e}i", value.re, value.im);
            println!("det = {:+.17e} {:+.17e}i", value.exp().re, value.exp().im);
            Ok(true)
        }
        Command::Resolvent { x, points, out } => {
            let ctx = RunContext::new(config)?;
            let model = ctx.model_at(x)?;
            let discrete = nystrom_resolvent(&ctx.kernel, x, &ctx.rule)?;
            let nodes = ctx.rule.nodes();
            let step = nodes.len().div_ceil(points.max(1)).max(1);
            let picked: Vec<usize> = (0..nodes.len()).step_by(step).collect();
            let mut writer: Box<dyn std::io::Write> = match out {
                Some(p) => Box::new(std::fs::File::create(p)?),
                None => Box::new(std::io::stdout().lock()),
            };
            writeln!(
                writer,
                "lambda,mu,asym_re,asym_im,oracle_re,oracle_im,abs_diff"
            )?;
            for &i in &picked {
                for &j in &picked {
                    let asym = resolvent_asym(&model, &ctx.data, nodes[i], nodes[j])?;
                    let orc = discrete[(i, j)];
                    writeln!(
                        writer,
                        "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                        nodes[i],
                        nodes[j],
                        asym.re,
                        asym.im,
                        orc.re,
                        orc.im,
                        (asym - orc).norm()
                    )?;
                }
            }
            Ok(true)
        }
    }
}

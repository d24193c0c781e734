//! Command-line surface: reproducible experiments over the library with
//! CSV/JSON outputs and a manifest per run.
//!
//! Exit codes: 0 success, 2 input error, 3 identity-residual breach,
//! 4 resource bound exceeded. `TOROIDAL_THREADS` caps the worker pool; a
//! `key=value` config file (`--config`, or `./toroidal.conf` when present)
//! presets defaults, and flags override it.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use toroidal::bilinear::{pierce_exhaustive, sigma_v, PierceInstance};
use toroidal::ffield::FieldContext;
use toroidal::lmoments::{
    afe_crosscheck, lower_bound_certificate, mollified_moments, moment, nonvanishing_count,
    AngularInterval, LValueTable, Polynomial, RaisedCosineMinorant,
};
use toroidal::sheafclass::CharacterMultiset;
use toroidal::sheafclass::{classify, smallest_admissible_prime};
use toroidal::tracefn::{
    hasse_davenport_residual, hyp_identity_residual, hyp_table, k_ab_table, kloosterman_table,
    poisson_identity_residual, TraceTable,
};
use toroidal::Error as CoreError;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "toroidal",
    version,
    about = "trace functions, character-set classification, and L-value moments over prime fields"
)]
struct Cli {
    /// key=value config file presetting defaults (flags override).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed recorded in manifests and used wherever randomness appears.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a trace-function table and write it as CSV.
    Trace(TraceArgs),
    /// Classify the character data of (a, b, k); JSON verdict on stdout.
    Classify(ClassifyArgs),
    /// Twisted moment ladder over primes, optionally mollified.
    Moment(MomentArgs),
    /// Angular non-vanishing counts and the lower-bound certificate.
    Nonvanish(NonvanishArgs),
    /// Run one of the exact-identity verification suites.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long)]
    q: u64,
    /// Table kind: kl, kab or hyp.
    #[arg(long)]
    kind: String,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<i64>,
    #[arg(long)]
    k: Option<u32>,
    /// Character indices for the hyp kind, e.g. 0,6.
    #[arg(long)]
    chi_indices: Option<String>,
    /// Character indices for the hyp kind's second multiset.
    #[arg(long)]
    theta_indices: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long, allow_hyphen_values = true)]
    a: i64,
    #[arg(long, allow_hyphen_values = true)]
    b: i64,
    #[arg(long)]
    k: u32,
    /// Prime to classify at; "auto" picks the smallest admissible prime.
    #[arg(long, default_value = "auto")]
    q: String,
    /// Also write the verdict (and a manifest) to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MomentArgs {
    #[arg(long, allow_hyphen_values = true)]
    a: i64,
    #[arg(long, allow_hyphen_values = true)]
    b: i64,
    #[arg(long, allow_hyphen_values = true)]
    k: i32,
    #[arg(long)]
    xi: Option<u64>,
    #[arg(long)]
    l1: Option<u64>,
    #[arg(long)]
    l2: Option<u64>,
    /// Comma-separated primes, e.g. 503,1009,2003.
    #[arg(long)]
    primes: String,
    /// Mollifier length L (with P(X) = X²); adds mollified columns.
    #[arg(long)]
    mollify: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NonvanishArgs {
    #[arg(long, allow_hyphen_values = true)]
    a: i64,
    #[arg(long, allow_hyphen_values = true)]
    b: i64,
    /// Half-open angular interval "lo,hi" in (-π, π]; lo >= hi wraps.
    #[arg(long, allow_hyphen_values = true)]
    interval: String,
    /// Mollifier length; defaults to q^0.1 per prime.
    #[arg(long)]
    l: Option<f64>,
    /// Raised-cosine minorant margin.
    #[arg(long, default_value_t = 0.15)]
    margin: f64,
    #[arg(long)]
    primes: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// One of: hd, hyp, poisson, pierce, afe, fe-phase.
    #[arg(long)]
    suite: String,
}

enum CliError {
    Input(String),
    ResidualBreach(String),
    ResourceBound(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::TooLarge { .. } => CliError::ResourceBound(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(format!("io error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::ResidualBreach(msg)) => {
            eprintln!("residual breach: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::ResourceBound(msg)) => {
            eprintln!("resource bound: {msg}");
            ExitCode::from(4)
        }
    }
}

fn configure_threads() {
    if let Ok(n) = std::env::var("TOROIDAL_THREADS") {
        if let Ok(n) = n.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
}

fn load_config(path: Option<&Path>) -> BTreeMap<String, String> {
    let candidate = path.map(Path::to_path_buf).or_else(|| {
        let default = PathBuf::from("toroidal.conf");
        default.exists().then_some(default)
    });
    let mut out = BTreeMap::new();
    if let Some(p) = candidate {
        if let Ok(text) = fs::read_to_string(p) {
            for line in text.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                if let Some((k, v)) = line.split_once('=') {
                    out.insert(k.trim().to_string(), v.trim().to_string());
                }
            }
        }
    }
    out
}

struct Manifest {
    command: String,
    params: BTreeMap<String, String>,
    seed: u64,
    started: Instant,
    outputs: Vec<String>,
}

impl Manifest {
    fn new(command: &str, seed: u64) -> Self {
        Manifest {
            command: command.to_string(),
            params: BTreeMap::new(),
            seed,
            started: Instant::now(),
            outputs: Vec::new(),
        }
    }

    fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    fn path_for(out: &Path) -> PathBuf {
        let mut os = out.as_os_str().to_owned();
        os.push(".manifest.json");
        PathBuf::from(os)
    }

    fn write(mut self, out: &Path) -> Result<PathBuf, CliError> {
        let path = Self::path_for(out);
        self.outputs.push(out.display().to_string());
        let doc = json!({
            "command": self.command,
            "params": self.params,
            "seed": self.seed,
            "version": VERSION,
            "wall_time_s": self.started.elapsed().as_secs_f64(),
            "outputs": self.outputs,
        });
        fs::write(&path, serde_json::to_string_pretty(&doc).unwrap())?;
        Ok(path)
    }
}

fn parse_primes(spec: &str) -> Result<Vec<u64>, CliError> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| CliError::Input(format!("bad prime '{s}'")))
        })
        .collect()
}

fn parse_indices(spec: &str) -> Result<Vec<u64>, CliError> {
    if spec.trim().is_empty() {
        return Ok(Vec::new());
    }
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| CliError::Input(format!("bad index '{s}'")))
        })
        .collect()
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = load_config(cli.config.as_deref());
    let seed = cli
        .seed
        .or_else(|| config.get("seed").and_then(|s| s.parse().ok()))
        .unwrap_or(17);
    match cli.command {
        Command::Trace(args) => trace(args, seed),
        Command::Classify(args) => classify_cmd(args, seed),
        Command::Moment(args) => moment_cmd(args, seed),
        Command::Nonvanish(args) => nonvanish_cmd(args, seed),
        Command::Verify(args) => verify_cmd(args),
    }
}

fn trace(args: TraceArgs, seed: u64) -> Result<(), CliError> {
    let ctx = FieldContext::new(args.q)?;
    let table: TraceTable = match args.kind.as_str() {
        "kl" => {
            let k = args
                .k
                .ok_or_else(|| CliError::Input("kl needs --k".into()))?;
            kloosterman_table(&ctx, k)
        }
        "kab" => {
            let (a, b) = (
                args.a
                    .ok_or_else(|| CliError::Input("kab needs --a".into()))?,
                args.b
                    .ok_or_else(|| CliError::Input("kab needs --b".into()))?,
            );
            k_ab_table(&ctx, a, b, args.k.unwrap_or(0))?
        }
        "hyp" => {
            let chi = parse_indices(args.chi_indices.as_deref().unwrap_or(""))?;
            let theta = parse_indices(args.theta_indices.as_deref().unwrap_or(""))?;
            hyp_table(
                &ctx,
                &CharacterMultiset::from_indices(&ctx, &chi),
                &CharacterMultiset::from_indices(&ctx, &theta),
            )?
        }
        other => return Err(CliError::Input(format!("unknown kind '{other}'"))),
    };
    let mut manifest = Manifest::new("trace", seed);
    manifest
        .param("q", args.q)
        .param("kind", &args.kind)
        .param("a", args.a.map(|v| v.to_string()).unwrap_or_default())
        .param("b", args.b.map(|v| v.to_string()).unwrap_or_default())
        .param("k", args.k.map(|v| v.to_string()).unwrap_or_default())
        .param("chi", args.chi_indices.clone().unwrap_or_default())
        .param("theta", args.theta_indices.clone().unwrap_or_default());
    let manifest_path = Manifest::path_for(&args.out);
    let mut file = fs::File::create(&args.out)?;
    writeln!(file, "# manifest={}", manifest_path.display())?;
    table.to_csv(&mut file)?;
    let written = manifest.write(&args.out)?;
    println!(
        "wrote {} ({} unit rows, sup-norm {:.6}); manifest {}",
        args.out.display(),
        args.q - 1,
        table.sup_norm(),
        written.display()
    );
    Ok(())
}

fn classify_cmd(args: ClassifyArgs, seed: u64) -> Result<(), CliError> {
    let q = if args.q == "auto" {
        smallest_admissible_prime(args.a, args.b, args.k)?
    } else {
        args.q
            .parse::<u64>()
            .map_err(|_| CliError::Input(format!("bad q '{}'", args.q)))?
    };
    let ctx = FieldContext::new(q)?;
    let verdict = classify(&ctx, args.a, args.b, args.k)?;
    let doc = json!({
        "index_convention": format!(
            "chi_j(g^m) = e(jm/(q-1)) with g = {} the smallest primitive root of q = {}",
            ctx.generator(), q
        ),
        "verdict": verdict.to_json(),
    });
    let text = serde_json::to_string_pretty(&doc).unwrap();
    println!("{text}");
    if let Some(out) = args.out {
        let mut manifest = Manifest::new("classify", seed);
        manifest
            .param("a", args.a)
            .param("b", args.b)
            .param("k", args.k)
            .param("q", q);
        fs::write(&out, &text)?;
        manifest.write(&out)?;
    }
    Ok(())
}

fn moment_cmd(args: MomentArgs, seed: u64) -> Result<(), CliError> {
    let primes = parse_primes(&args.primes)?;
    let mut rows = Vec::new();
    for &q in &primes {
        let ctx = FieldContext::new(q)?;
        let lv = LValueTable::build(&ctx)?;
        let xi = match (args.xi, args.l1, args.l2) {
            (Some(xi), None, None) => xi % q,
            (None, Some(l1), Some(l2)) => {
                if l1 % q == 0 || l2 % q == 0 {
                    return Err(CliError::Input(format!("l1, l2 must be units mod {q}")));
                }
                ctx.pow_signed(l1 as i64, args.a) * ctx.pow_signed(l2 as i64, args.b) % q
            }
            (None, None, None) => 1,
            _ => return Err(CliError::Input("use either --xi or --l1/--l2".into())),
        };
        let m = moment(&lv, args.a, args.b, args.k, xi);
        let mollified = match args.mollify {
            Some(len) => Some(mollified_moments(
                &lv,
                args.a,
                args.b,
                args.k,
                len,
                &Polynomial::x_squared(),
            )?),
            None => None,
        };
        rows.push((q, xi, m, mollified));
    }
    let mut csv = String::from("q,xi,re_m,im_m,re_q2,im_q2,q4\n");
    for &(q, xi, m, mollified) in &rows {
        let (q2re, q2im, q4) = mollified
            .map(|(q2, q4)| {
                (
                    format!("{:.16e}", q2.re),
                    format!("{:.16e}", q2.im),
                    format!("{:.16e}", q4),
                )
            })
            .unwrap_or_default();
        csv.push_str(&format!(
            "{q},{xi},{:.16e},{:.16e},{q2re},{q2im},{q4}\n",
            m.re, m.im
        ));
    }
    print!("{csv}");
    if let Some(out) = args.out {
        let mut manifest = Manifest::new("moment", seed);
        manifest
            .param("a", args.a)
            .param("b", args.b)
            .param("k", args.k)
            .param("primes", &args.primes)
            .param(
                "mollify",
                args.mollify.map(|v| v.to_string()).unwrap_or_default(),
            );
        let manifest_path = Manifest::path_for(&out);
        fs::write(
            &out,
            format!("# manifest={}\n{csv}", manifest_path.display()),
        )?;
        manifest.write(&out)?;
    }
    Ok(())
}

fn nonvanish_cmd(args: NonvanishArgs, seed: u64) -> Result<(), CliError> {
    let primes = parse_primes(&args.primes)?;
    let (lo, hi) = args
        .interval
        .split_once(',')
        .and_then(|(a, b)| Some((a.trim().parse::<f64>().ok()?, b.trim().parse::<f64>().ok()?)))
        .ok_or_else(|| CliError::Input("interval must be 'lo,hi'".into()))?;
    let interval = AngularInterval::new(lo, hi);
    let p = Polynomial::x_squared();
    let mut csv = String::from("q,e,proportion,certificate,min_abs_l,threshold\n");
    for &q in &primes {
        let ctx = FieldContext::new(q)?;
        let lv = LValueTable::build(&ctx)?;
        let report = nonvanishing_count(&lv, args.a, args.b, interval);
        let len = args.l.unwrap_or_else(|| (q as f64).powf(0.1));
        let phi = RaisedCosineMinorant::new(interval, args.margin)?;
        let cert =
            lower_bound_certificate(&lv, args.a, args.b, interval, len, &p, &|t| phi.eval(t))?;
        let proportion = report.count as f64 / (q - 1) as f64;
        csv.push_str(&format!(
            "{q},{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            report.count, proportion, cert, report.min_abs_l, report.threshold
        ));
    }
    print!("{csv}");
    if let Some(out) = args.out {
        let mut manifest = Manifest::new("nonvanish", seed);
        manifest
            .param("a", args.a)
            .param("b", args.b)
            .param("interval", &args.interval)
            .param("primes", &args.primes)
            .param("margin", args.margin);
        let manifest_path = Manifest::path_for(&out);
        fs::write(
            &out,
            format!("# manifest={}\n{csv}", manifest_path.display()),
        )?;
        manifest.write(&out)?;
    }
    Ok(())
}

fn verify_cmd(args: VerifyArgs) -> Result<(), CliError> {
    let breach = |name: &str, value: f64, gate: f64| -> Result<(), CliError> {
        println!("{name}: residual {value:.3e} (gate {gate:.1e})");
        if value < gate {
            Ok(())
        } else {
            Err(CliError::ResidualBreach(format!(
                "{name}: {value:.3e} >= {gate:.1e}"
            )))
        }
    };
    match args.suite.as_str() {
        "hd" => {
            for (q, n) in [(13u64, 3u64), (13, 4), (31, 5)] {
                let fit = hasse_davenport_residual(&FieldContext::new(q)?, n)?;
                breach(&format!("hasse-davenport q={q} N={n}"), fit.residual, 1e-8)?;
            }
        }
        "hyp" => {
            for q in [13u64, 31] {
                for (a, b, k) in [(2i64, 3i64, 1u32), (2, -3, 1), (2, 3, 2)] {
                    let r = hyp_identity_residual(&FieldContext::new(q)?, a, b, k)?;
                    breach(&format!("hyp identity q={q} ({a},{b},{k})"), r, 1e-8)?;
                }
            }
        }
        "poisson" => {
            let ctx = FieldContext::new(101)?;
            for (a, b, k, xi) in [(2i64, -3i64, 2u32, 5u64), (1, 1, 1, 1), (-1, -1, 2, 1)] {
                let r = poisson_identity_residual(&ctx, a, b, k, xi)?;
                breach(&format!("poisson ({a},{b},{k}) xi={xi}"), r, 1e-8)?;
            }
        }
        "pierce" => {
            for b in [3i64, -3] {
                let sweep = pierce_exhaustive(11, 3, b)?;
                println!(
                    "pierce q=11 l=3 b={b}: {} vectors, {} vanishing, iff {}",
                    sweep.vectors,
                    sweep.vanishing,
                    if sweep.equivalence_holds {
                        "holds"
                    } else {
                        "BROKEN"
                    }
                );
                if !sweep.equivalence_holds {
                    return Err(CliError::ResidualBreach(format!(
                        "pierce equivalence failed at b={b}"
                    )));
                }
            }
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
            for _ in 0..100 {
                let v: Vec<i64> = (0..6).map(|_| rng.gen_range(0..11)).collect();
                sigma_v(&PierceInstance::new(3, -3, v, 11)?)?;
            }
            println!("sigma identity: 100 random vectors exact");
        }
        "afe" => {
            for q in [211u64, 503] {
                let lv = LValueTable::build(&FieldContext::new(q)?)?;
                let r = afe_crosscheck(&lv, 2, 3, 1, 1, q as f64, q as f64)?;
                breach(&format!("afe (2,3,1) q={q}"), r, 0.05)?;
            }
        }
        "fe-phase" => {
            for q in [5u64, 101, 1009] {
                let lv = LValueTable::build(&FieldContext::new(q)?)?;
                breach(&format!("fe phase q={q}"), lv.fe_phase_residual(), 1e-8)?;
            }
        }
        other => return Err(CliError::Input(format!("unknown suite '{other}'"))),
    }
    println!("suite {} passed", args.suite);
    Ok(())
}

//! Batch front end: reads JSON inputs, runs one library operation and
//! writes a JSON report.
//!
//! Exit codes: 0 success, 1 failure inside a computation, 2 negative
//! verdict, 3 malformed input.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use isoflag::anosov::{self, samples, AnosovConfig, RepSpec};
use isoflag::cartan;
use isoflag::compactify::{self, StratumIndex};
use isoflag::domains;
use isoflag::io;
use isoflag::model_spaces;
use isoflag::{Group, Quaternion, ScalarTag, Subspace, Tolerances};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;
pub const EXIT_MALFORMED: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "isoflag", version, about = "Compactifications of classical groups and Anosov diagnostics")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Group as JSON, inline or a file path.
    #[arg(long, global = true)]
    form: Option<String>,
    /// Matrix JSON file.
    #[arg(long, global = true)]
    matrix_file: Option<PathBuf>,
    /// Representation JSON file (`{"form": .., "generators": [..]}`).
    #[arg(long, global = true)]
    rep_file: Option<PathBuf>,
    /// Word-ball radius.
    #[arg(long, global = true)]
    radius: Option<usize>,
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    #[arg(long, global = true)]
    tol_contain: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for ball scans; all cores when absent.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Leave the timestamp out of the report.
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Report path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stratum index and boundary components of a point of the compactification.
    Stratify {
        #[arg(long)]
        subspace_file: String,
    },
    /// Graph of a group element.
    Embed,
    /// Group element whose graph is the given subspace.
    Unembed {
        #[arg(long)]
        subspace_file: String,
    },
    /// Numerical orbit dimension against the closed form, one or all strata.
    OrbitDim {
        /// `i` for form groups, `i,j` for GL.
        #[arg(long)]
        stratum: Option<String>,
    },
    /// Cartan and Lyapunov projections of a matrix.
    Cartan {
        #[arg(long, default_value_t = 64)]
        power: u32,
    },
    /// Divergence of a simple root along the word ball.
    AnosovCheck {
        #[arg(long, default_value_t = 1)]
        root: usize,
    },
    /// Domination constant of the rep in --rep-file over the one in --right-file.
    Dominate {
        #[arg(long)]
        right_file: PathBuf,
        #[arg(long, default_value_t = 1)]
        weight: usize,
    },
    /// Sampled limit set.
    LimitSet {
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Also write the points as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Whether a point of the compactification lies in the domain.
    DodMember {
        #[arg(long)]
        subspace_file: String,
    },
    /// Ball words bringing a point back near itself under the pair action.
    ProbeRecurrence {
        /// Right representation; the trivial one when absent.
        #[arg(long)]
        right_file: Option<PathBuf>,
        /// Starting point; the diagonal when absent.
        #[arg(long)]
        subspace_file: Option<String>,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
    },
    /// Pseudo-hyperbolic model spaces.
    Hpq {
        #[command(subcommand)]
        op: HpqOp,
    },
    /// Orbit representatives of the explicit model cases.
    OrbitRep {
        #[arg(long = "case", value_enum)]
        case: Case,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
    },
}

#[derive(Args, Debug)]
struct HpqArgs {
    #[arg(long)]
    p: usize,
    #[arg(long)]
    q: usize,
    #[arg(long, default_value = "R")]
    field: String,
}

#[derive(Subcommand, Debug)]
enum HpqOp {
    /// Line of the ambient space through a point of the quadric.
    Embed {
        #[command(flatten)]
        args: HpqArgs,
        /// Comma-separated coordinates; complex entries as `re:im`.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Point of the quadric on a line.
    Unembed {
        #[command(flatten)]
        args: HpqArgs,
        #[arg(long)]
        subspace_file: String,
    },
    /// Whether a line lies on the boundary.
    Boundary {
        #[command(flatten)]
        args: HpqArgs,
        #[arg(long)]
        subspace_file: String,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Case {
    Iv,
    Vi,
}

enum CliError {
    Malformed(String),
    Failed(String),
}

impl From<isoflag::Error> for CliError {
    fn from(e: isoflag::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn malformed(e: impl std::fmt::Display) -> CliError {
    CliError::Malformed(e.to_string())
}

/// JSON given inline (starting with `{` or `[`) or as a path.
fn load_json(arg: &str) -> CliResult<Value> {
    let t = arg.trim_start();
    let text = if t.starts_with('{') || t.starts_with('[') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| malformed(format!("{arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| malformed(format!("{arg}: {e}")))
}

fn load_path(p: &Path) -> CliResult<Value> {
    load_json(&p.to_string_lossy())
}

fn need<'a, T>(v: &'a Option<T>, flag: &str) -> CliResult<&'a T> {
    v.as_ref().ok_or_else(|| malformed(format!("this command needs {flag}")))
}

struct Ctx {
    common: Common,
    tol: Tolerances,
    cfg: AnosovConfig,
    inputs: Map<String, Value>,
}

impl Ctx {
    fn group(&mut self) -> CliResult<Group> {
        let raw = need(&self.common.form, "--form")?.clone();
        let v = load_json(&raw)?;
        let g = io::group_from_json(&v).map_err(malformed)?;
        self.inputs.insert("form".into(), io::group_to_json(&g));
        Ok(g)
    }

    fn matrix(&mut self) -> CliResult<isoflag::MatK> {
        let v = load_path(need(&self.common.matrix_file, "--matrix-file")?)?;
        let m = io::matrix_from_json(&v).map_err(malformed)?;
        self.inputs.insert("matrix".into(), io::matrix_to_json(&m));
        Ok(m)
    }

    fn rep_at(&mut self, path: &Path, key: &str) -> CliResult<RepSpec> {
        let v = load_path(path)?;
        let rep = io::rep_from_json(&v, &self.tol).map_err(malformed)?;
        self.inputs.insert(key.into(), io::rep_to_json(&rep));
        Ok(rep)
    }

    fn rep(&mut self) -> CliResult<RepSpec> {
        let path = need(&self.common.rep_file, "--rep-file")?.clone();
        self.rep_at(&path, "representation")
    }

    fn subspace(&mut self, arg: &str, key: &str) -> CliResult<Subspace> {
        let v = load_json(arg)?;
        let w = io::subspace_from_json(&v, self.tol.rank).map_err(malformed)?;
        self.inputs.insert(key.into(), io::subspace_to_json(&w));
        Ok(w)
    }

    fn radius(&mut self, default: usize) -> usize {
        let r = self.common.radius.unwrap_or(default);
        self.inputs.insert("radius".into(), json!(r));
        r
    }
}

struct Outcome {
    result: Value,
    negative: bool,
    uses_anosov: bool,
}

fn outcome(result: Value, negative: bool) -> Outcome {
    Outcome {
        result,
        negative,
        uses_anosov: false,
    }
}

fn anosov_outcome(result: Value, negative: bool) -> Outcome {
    Outcome {
        result,
        negative,
        uses_anosov: true,
    }
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report types serialize")
}

fn parse_tag(s: &str) -> CliResult<ScalarTag> {
    match s {
        "R" | "r" => Ok(ScalarTag::R),
        "C" | "c" => Ok(ScalarTag::C),
        "H" | "h" => Ok(ScalarTag::H),
        _ => Err(malformed(format!("unknown field {s:?}; use R, C or H"))),
    }
}

fn parse_point(s: &str) -> CliResult<Vec<Quaternion>> {
    s.split(',')
        .map(|part| {
            let comps: Vec<f64> = part
                .split(':')
                .map(|c| c.trim().parse::<f64>().map_err(|e| malformed(format!("coordinate {part:?}: {e}"))))
                .collect::<CliResult<_>>()?;
            if comps.is_empty() || comps.len() > 4 {
                return Err(malformed(format!("coordinate {part:?} has {} components", comps.len())));
            }
            Ok(Quaternion::from_slice(&comps))
        })
        .collect()
}

fn parse_stratum(s: &str, group: &Group) -> CliResult<StratumIndex> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| malformed(format!("stratum {s:?}: {e}"))))
        .collect::<CliResult<_>>()?;
    match (group, parts.as_slice()) {
        (Group::Aut(_), [i]) => Ok(StratumIndex::Aut(*i)),
        (Group::Gl { .. }, [i, j]) => Ok(StratumIndex::Gl(*i, *j)),
        _ => Err(malformed(format!("stratum {s:?} does not fit the group"))),
    }
}

fn pi_summary(pi: &isoflag::subspaces::PiImage) -> Value {
    json!({
        "first_dim": pi.first.dim(),
        "second_dim": pi.second.dim(),
        "first_margin": pi.first_rank.margin,
        "second_margin": pi.second_rank.margin,
        "first": io::subspace_to_json(&pi.first),
        "second": io::subspace_to_json(&pi.second),
    })
}

fn execute(cmd: &Command, ctx: &mut Ctx) -> CliResult<Outcome> {
    match cmd {
        Command::Stratify { subspace_file } => {
            let g = ctx.group()?;
            let w = ctx.subspace(subspace_file, "subspace")?;
            let (idx, pi) = compactify::stratum_index(&w, &g, &ctx.tol)?;
            Ok(outcome(json!({ "stratum": idx, "pi": pi_summary(&pi) }), false))
        }
        Command::Embed => {
            let g = ctx.group()?;
            let m = ctx.matrix()?;
            let w = compactify::embed_graph(&m, &g, &ctx.tol)?;
            Ok(outcome(json!({ "subspace": io::subspace_to_json(&w) }), false))
        }
        Command::Unembed { subspace_file } => {
            let g = ctx.group()?;
            let w = ctx.subspace(subspace_file, "subspace")?;
            let m = compactify::unembed(&w, &g, &ctx.tol)?;
            Ok(outcome(json!({ "matrix": io::matrix_to_json(&m) }), false))
        }
        Command::OrbitDim { stratum } => {
            let g = ctx.group()?;
            let strata = match stratum {
                Some(s) => vec![parse_stratum(s, &g)?],
                None => compactify::all_strata(&g),
            };
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.common.seed);
            let mut reports = Vec::new();
            let mut all = true;
            for s in strata {
                let r = compactify::verify_stratum_dimension(&g, s, &mut rng, &ctx.tol)?;
                all &= r.agrees;
                reports.push(to_value(&r));
            }
            Ok(outcome(json!({ "strata": reports, "all_agree": all }), !all))
        }
        Command::Cartan { power } => {
            let g = ctx.group()?;
            let m = ctx.matrix()?;
            ctx.inputs.insert("power".into(), json!(power));
            let mu = cartan::cartan_mu(&m, &g, &ctx.tol)?;
            let lambda = cartan::lyapunov_lambda(&m, &g)?;
            let estimate = cartan::mu_of_power(&m, &g, *power)?;
            let rd = g.root_data();
            Ok(outcome(
                json!({
                    "log_singular_values": cartan::log_singular_values(&m),
                    "mu": mu.values(),
                    "lambda": lambda.values(),
                    "mu_of_power": estimate.values(),
                    "lambda_vs_mu_of_power": lambda.max_abs_diff(&estimate),
                    "opposition_of_mu": cartan::opposition_apply(&rd, &mu).values(),
                    "mu_in_chamber": mu.in_chamber(&rd, ctx.tol.chamber),
                }),
                false,
            ))
        }
        Command::AnosovCheck { root } => {
            let rep = ctx.rep()?;
            let r = ctx.radius(8);
            ctx.inputs.insert("root".into(), json!(root));
            let p = anosov::divergence_profile(&rep, *root, r, &ctx.cfg)?;
            let negative = !p.verdict;
            let mut v = to_value(&p);
            v["verdict"] = json!(if p.verdict { "divergent" } else { "not divergent" });
            Ok(anosov_outcome(v, negative))
        }
        Command::Dominate { right_file, weight } => {
            let left = ctx.rep()?;
            let right = ctx.rep_at(right_file, "right_representation")?;
            let r = ctx.radius(6);
            ctx.inputs.insert("weight".into(), json!(weight));
            let d = anosov::domination_constant(&left, &right, *weight, r, &ctx.cfg, &ctx.tol)?;
            let negative = !d.verdict;
            let mut v = to_value(&d);
            v["verdict"] = json!(if d.verdict { "dominates" } else { "not dominated" });
            Ok(anosov_outcome(v, negative))
        }
        Command::LimitSet { dim, csv } => {
            let rep = ctx.rep()?;
            let r = ctx.radius(6);
            ctx.inputs.insert("dim".into(), json!(dim));
            let s = anosov::limit_set(&rep, r, *dim, &ctx.cfg, &ctx.tol)?;
            if let Some(path) = csv {
                let f = fs::File::create(path).map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))?;
                io::write_limit_set_csv(&s, f)?;
            }
            let points: Vec<Value> = s
                .points
                .iter()
                .map(|p| {
                    json!({
                        "word": p.word,
                        "gap": p.gap,
                        "power": p.power,
                        "isotropy_residual": p.isotropy_residual,
                        "projected": p.projected,
                        "basis": io::matrix_to_json(p.subspace.basis()),
                    })
                })
                .collect();
            Ok(anosov_outcome(
                json!({
                    "count": s.points.len(),
                    "divergence_consistent": s.divergence_consistent,
                    "warnings": s.warnings,
                    "points": points,
                }),
                !s.divergence_consistent,
            ))
        }
        Command::DodMember { subspace_file } => {
            let rep = ctx.rep()?;
            let w = ctx.subspace(subspace_file, "subspace")?;
            let r = ctx.radius(5);
            let sample = anosov::limit_set(&rep, r, 1, &ctx.cfg, &ctx.tol)?;
            let m = domains::stratum_membership(&w, rep.group(), &sample, &ctx.tol)?;
            let mut v = to_value(&m);
            v["sample_size"] = json!(sample.points.len());
            Ok(anosov_outcome(v, !m.in_omega))
        }
        Command::ProbeRecurrence {
            right_file,
            subspace_file,
            delta,
        } => {
            let left = ctx.rep()?;
            let right = match right_file {
                Some(p) => ctx.rep_at(p, "right_representation")?,
                None => samples::trivial(left.group(), left.rank_free()),
            };
            let w0 = match subspace_file {
                Some(s) => ctx.subspace(s, "subspace")?,
                None => compactify::diagonal(left.group().tag(), left.group().dim()),
            };
            let r = ctx.radius(6);
            ctx.inputs.insert("delta".into(), json!(delta));
            let rep = domains::orbit_recurrence_probe(&left, &right, &w0, r, *delta, &ctx.cfg, &ctx.tol)?;
            let recurrent = rep.count > 1;
            let mut v = to_value(&rep);
            v["verdict"] = json!(if recurrent { "recurrent" } else { "no recurrence" });
            Ok(anosov_outcome(v, recurrent))
        }
        Command::Hpq { op } => match op {
            HpqOp::Embed { args, point } => {
                let tag = parse_tag(&args.field)?;
                let x = parse_point(point)?;
                ctx.inputs.insert("hpq".into(), json!({ "p": args.p, "q": args.q, "field": tag, "point": point }));
                let l = model_spaces::embed_hpq(&x, args.p, args.q, tag, &ctx.tol)?;
                Ok(outcome(json!({ "line": io::subspace_to_json(&l) }), false))
            }
            HpqOp::Unembed { args, subspace_file } => {
                ctx.inputs.insert("hpq".into(), json!({ "p": args.p, "q": args.q, "field": args.field }));
                let l = ctx.subspace(subspace_file, "subspace")?;
                let x = model_spaces::unembed_hpq(&l, args.p, args.q, &ctx.tol)?;
                let row = isoflag::MatK::from_fn(l.tag(), 1, x.len(), |_, c| x[c]);
                Ok(outcome(json!({ "point": io::matrix_to_json(&row)["rows"][0] }), false))
            }
            HpqOp::Boundary { args, subspace_file } => {
                ctx.inputs.insert("hpq".into(), json!({ "p": args.p, "q": args.q, "field": args.field }));
                let l = ctx.subspace(subspace_file, "subspace")?;
                let b = model_spaces::is_boundary(&l, args.p, args.q, &ctx.tol)?;
                Ok(outcome(json!({ "boundary": b }), false))
            }
        },
        Command::OrbitRep { case, p, q, m } => match case {
            Case::Iv => {
                let q = *need(q, "--q")?;
                ctx.inputs.insert("orbit_rep".into(), json!({ "case": "iv", "p": p, "q": q }));
                let r = model_spaces::orbit_rep_case_iv(*p, q, &ctx.tol)?;
                let ok = r.stabilizer_dim == r.expected_stabilizer_dim && r.real_intersection_dim == 0;
                Ok(outcome(to_value(&r), !ok))
            }
            Case::Vi => {
                let m = *need(m, "--m")?;
                ctx.inputs.insert("orbit_rep".into(), json!({ "case": "vi", "m": m, "p": p }));
                let r = model_spaces::orbit_rep_case_vi(m, *p, &ctx.tol)?;
                let ok = r.stabilizer_dim == r.expected_stabilizer_dim && r.signature == (*p, m - p);
                Ok(outcome(to_value(&r), !ok))
            }
        },
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Stratify { .. } => "stratify",
        Command::Embed => "embed",
        Command::Unembed { .. } => "unembed",
        Command::OrbitDim { .. } => "orbit-dim",
        Command::Cartan { .. } => "cartan",
        Command::AnosovCheck { .. } => "anosov-check",
        Command::Dominate { .. } => "dominate",
        Command::LimitSet { .. } => "limit-set",
        Command::DodMember { .. } => "dod-member",
        Command::ProbeRecurrence { .. } => "probe-recurrence",
        Command::Hpq { op: HpqOp::Embed { .. } } => "hpq embed",
        Command::Hpq { op: HpqOp::Unembed { .. } } => "hpq unembed",
        Command::Hpq { op: HpqOp::Boundary { .. } } => "hpq boundary",
        Command::OrbitRep { .. } => "orbit-rep",
    }
}

fn write_report(report: &Value, out: Option<&Path>) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(report).expect("json values serialize");
    text.push('\n');
    match out {
        Some(p) => fs::write(p, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

/// Runs the command line `argv` (program name first) and returns the exit
/// code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_MALFORMED } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let mut tol = Tolerances::default();
    if let Some(t) = cli.common.tol_rank {
        tol.rank = t;
    }
    if let Some(t) = cli.common.tol_contain {
        tol.contain = t;
    }
    let cfg = AnosovConfig {
        workers: cli.common.workers,
        ..AnosovConfig::default()
    };
    let name = command_name(&cli.command);
    let mut ctx = Ctx {
        common: cli.common,
        tol,
        cfg,
        inputs: Map::new(),
    };
    let res = execute(&cli.command, &mut ctx);
    let mut report = Map::new();
    report.insert("command".into(), json!(name));
    report.insert("inputs".into(), Value::Object(std::mem::take(&mut ctx.inputs)));
    report.insert("tolerances".into(), to_value(&ctx.tol));
    report.insert(
        "reproducibility".into(),
        json!({
            "seed": ctx.common.seed,
            "version": env!("CARGO_PKG_VERSION"),
            "radius": ctx.common.radius,
            "workers": ctx.common.workers,
        }),
    );
    if !ctx.common.no_timestamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        report.insert("timestamp".into(), json!(secs));
    }
    let code = match res {
        Ok(o) => {
            if o.uses_anosov {
                report.insert("anosov_config".into(), to_value(&ctx.cfg));
            }
            report.insert("result".into(), o.result);
            report.insert("status".into(), json!(if o.negative { "negative" } else { "ok" }));
            if o.negative {
                EXIT_NEGATIVE
            } else {
                EXIT_OK
            }
        }
        Err(CliError::Malformed(msg)) => {
            eprintln!("isoflag: malformed input: {msg}");
            report.insert("status".into(), json!("malformed input"));
            report.insert("error".into(), json!(msg));
            EXIT_MALFORMED
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("isoflag: {msg}");
            report.insert("status".into(), json!("error"));
            report.insert("error".into(), json!(msg));
            EXIT_FAILURE
        }
    };
    if let Err(e) = write_report(&Value::Object(report), ctx.common.out.as_deref()) {
        eprintln!("isoflag: cannot write report: {e}");
        return EXIT_FAILURE;
    }
    code
}

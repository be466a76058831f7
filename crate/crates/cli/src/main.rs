use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use local_pir::capacity::{family_bounds, graph_bounds, to_f64, BoundReport, Rational};
use local_pir::graph::{Family, Graph};
use local_pir::scheme::{fixture_graph, render_table, FixtureName, PlanExport, RoleRule, SchemeConfig};
use local_pir::sim::{self, auto_config, family_auto_config, RateReport};
use local_pir::verify::{self, Verdict, VerifyError, DEFAULT_ENUMERATION_CAP};
use local_pir::Field;
use serde_json::{json, Value};

const CAP_ENV: &str = "LOCAL_PIR_CAP";

#[derive(Parser)]
#[command(name = "local-pir", version, about = "Local private information retrieval on graph-replicated storage")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Capacity lower/upper bounds for a graph family or graph file
    Bounds {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Print the retrieval plan of every desired message
    Scheme {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Only this desired message
        #[arg(long)]
        theta: Option<usize>,
        /// Print the letter table (default for table format)
        #[arg(long)]
        emit_table: bool,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Check privacy at every server, decoding and download costs
    Verify {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Enumeration cap; LOCAL_PIR_CAP overrides it
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: u64,
    },
    /// Run every retrieval and report the exact rate
    Simulate {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Write transcripts for every desired message and seed to this file
        #[arg(long)]
        dump_transcripts: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyKind {
    Cycle,
    Path,
    Star,
    Complete,
    CompleteBipartite,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeKind {
    Auto,
    Et,
    Bipartite,
    Union,
    Fixture,
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long, value_enum, conflicts_with = "graph")]
    family: Option<FamilyKind>,
    /// Number of servers (balanced split for complete-bipartite)
    #[arg(long)]
    n: Option<usize>,
    /// Part sizes for complete-bipartite
    #[arg(long)]
    a: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    /// Disjoint copies of the family
    #[arg(long)]
    copies: Option<usize>,
    /// Graph file: {"n": N, "edges": [[u, v], ...]}
    #[arg(long)]
    graph: Option<PathBuf>,
}

#[derive(Args)]
struct SchemeArgs {
    #[arg(long, value_enum, default_value_t = SchemeKind::Auto)]
    scheme: SchemeKind,
    /// Subset size for both roles of the t-sum scheme
    #[arg(long, conflicts_with_all = ["t_i", "t_j"])]
    t: Option<usize>,
    #[arg(long, requires = "t_j")]
    t_i: Option<usize>,
    #[arg(long, requires = "t_i")]
    t_j: Option<usize>,
    /// Role i goes to the lower-indexed endpoint regardless of degrees
    #[arg(long)]
    lower_index_roles: bool,
    /// Reference table for --scheme fixture
    #[arg(long, value_enum)]
    fixture: Option<FixtureArg>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FixtureArg {
    C4,
    K4,
}

impl From<FixtureArg> for FixtureName {
    fn from(f: FixtureArg) -> Self {
        match f {
            FixtureArg::C4 => FixtureName::C4,
            FixtureArg::K4 => FixtureName::K4,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Field size (prime)
    #[arg(long, default_value_t = 2)]
    q: u64,
    /// Number of seeds per desired message
    #[arg(long, default_value_t = 32)]
    seeds: u64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

/// Exit status 2 with a message; 1 is reserved for failed checks.
struct Invalid(String);

impl<E: std::fmt::Display> From<E> for Invalid {
    fn from(e: E) -> Self {
        Invalid(e.to_string())
    }
}

struct Source {
    graph: Graph,
    family: Option<Family>,
    label: String,
}

impl GraphArgs {
    fn family(&self) -> Result<Option<Family>, Invalid> {
        let Some(kind) = self.family else {
            return Ok(None);
        };
        let need_n = || self.n.ok_or_else(|| Invalid("--n is required for this family".into()));
        let base = match kind {
            FamilyKind::Cycle => Family::Cycle(need_n()?),
            FamilyKind::Path => Family::Path(need_n()?),
            FamilyKind::Star => Family::Star(need_n()?),
            FamilyKind::Complete => Family::Complete(need_n()?),
            FamilyKind::CompleteBipartite => match (self.a, self.b, self.n) {
                (Some(a), Some(b), _) => Family::CompleteBipartite(a, b),
                (None, None, Some(n)) if n % 2 == 0 => Family::CompleteBipartite(n / 2, n / 2),
                _ => return Err(Invalid("complete-bipartite needs --a and --b, or an even --n".into())),
            },
        };
        Ok(Some(match self.copies {
            Some(m) if m > 1 => Family::DisjointCopies(Box::new(base), m),
            Some(0) => return Err(Invalid("--copies must be at least 1".into())),
            _ => base,
        }))
    }

    /// The graph to work on; a fixture scheme with no source uses its own graph.
    fn resolve(&self, fixture: Option<FixtureName>) -> Result<Source, Invalid> {
        if let Some(family) = self.family()? {
            let graph = family.build()?;
            return Ok(Source {
                label: family.to_string(),
                graph,
                family: Some(family),
            });
        }
        if let Some(path) = &self.graph {
            let text = std::fs::read_to_string(path).map_err(|e| Invalid(format!("{}: {e}", path.display())))?;
            let graph = Graph::from_json(&text).map_err(|e| Invalid(format!("{}: {e}", path.display())))?;
            return Ok(Source {
                label: format!("graph(N={}, K={})", graph.num_servers(), graph.num_messages()),
                graph,
                family: None,
            });
        }
        if let Some(name) = fixture {
            let family = match name {
                FixtureName::C4 => Family::Cycle(4),
                FixtureName::K4 => Family::Complete(4),
            };
            return Ok(Source {
                label: family.to_string(),
                graph: fixture_graph(name),
                family: Some(family),
            });
        }
        Err(Invalid("give either --family or --graph".into()))
    }
}

impl SchemeArgs {
    fn fixture(&self) -> Option<FixtureName> {
        match self.scheme {
            SchemeKind::Fixture => Some(self.fixture.map_or(FixtureName::C4, Into::into)),
            _ => None,
        }
    }

    fn explicit_t(&self) -> Option<(usize, usize)> {
        match (self.t, self.t_i, self.t_j) {
            (Some(t), _, _) => Some((t, t)),
            (None, Some(i), Some(j)) => Some((i, j)),
            _ => None,
        }
    }

    fn et(&self, t_i: usize, t_j: usize) -> SchemeConfig {
        SchemeConfig::EdgeTransitive {
            t_i,
            t_j,
            role_rule: if self.lower_index_roles {
                RoleRule::LowerIndex
            } else {
                RoleRule::Default
            },
        }
    }

    fn config(&self, src: &Source) -> Result<SchemeConfig, Invalid> {
        let auto = || -> Result<SchemeConfig, Invalid> {
            Ok(match &src.family {
                Some(f) => family_auto_config(f)?,
                None => auto_config(&src.graph)?,
            })
        };
        let config = match self.scheme {
            SchemeKind::Auto => match self.explicit_t() {
                Some((i, j)) => self.et(i, j),
                None => auto()?,
            },
            SchemeKind::Et => match self.explicit_t() {
                Some((i, j)) => self.et(i, j),
                None => match auto()? {
                    c @ SchemeConfig::EdgeTransitive { .. } => c,
                    _ => self.et(1, 1),
                },
            },
            SchemeKind::Bipartite => SchemeConfig::bipartite(),
            SchemeKind::Fixture => SchemeConfig::Fixture(self.fixture().expect("fixture scheme")),
            SchemeKind::Union => {
                let comps = src.graph.components().into_iter().filter(|c| c.graph.num_messages() > 0);
                match self.explicit_t() {
                    Some((i, j)) => SchemeConfig::Union(comps.map(|_| self.et(i, j)).collect()),
                    None => SchemeConfig::Union(
                        comps
                            .map(|c| auto_config(&c.graph))
                            .collect::<Result<Vec<_>, _>>()?,
                    ),
                }
            }
        };
        Ok(config)
    }
}

fn cap_from_env(flag: u64) -> Result<u64, Invalid> {
    match std::env::var(CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Invalid(format!("{CAP_ENV} must be a non-negative integer, got {v:?}"))),
        Err(_) => Ok(flag),
    }
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn approx(r: &Rational) -> String {
    format!("{r} ({:.4})", to_f64(r))
}

fn bounds_table(r: &BoundReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "family:  {} (N = {})", r.family, r.n);
    match &r.lower {
        Some(l) => {
            let _ = writeln!(out, "lower:   {}  via {}", approx(l), r.lower_basis);
        }
        None => {
            let _ = writeln!(out, "lower:   none (no closed-form scheme applies)");
        }
    }
    if let Some(cf) = &r.lower_closed_form {
        let _ = writeln!(out, "         closed form {cf} ({:.4})", cf.approx());
    }
    let _ = writeln!(out, "upper:   {}  via {}", approx(&r.upper), r.upper_basis);
    let _ = writeln!(out, "exact:   {}", if r.exact { "yes" } else { "no" });
    if let Some((ti, tj)) = r.optimizer {
        let _ = writeln!(out, "t:       t_i = {ti}, t_j = {tj}");
    }
    for c in &r.pir_comparators {
        let _ = writeln!(out, "canonical PIR: {}", c.describe());
    }
    out
}

fn cmd_bounds(graph: &GraphArgs, format: Format) -> Result<String, Invalid> {
    let report = match graph.family()? {
        Some(f) => family_bounds(&f)?,
        None => graph_bounds(&graph.resolve(None)?.graph)?,
    };
    Ok(match format {
        Format::Json => json_text(&report.to_json()),
        Format::Table => bounds_table(&report),
    })
}

fn cmd_scheme(
    graph: &GraphArgs,
    scheme: &SchemeArgs,
    theta: Option<usize>,
    emit_table: bool,
    format: Format,
) -> Result<String, Invalid> {
    let src = graph.resolve(scheme.fixture())?;
    let config = scheme.config(&src)?;
    let family = config.family(&src.graph)?;
    let plans = match theta {
        Some(t) => {
            src.graph.check_message(t)?;
            vec![family.plan(t).clone()]
        }
        None => family.plans().to_vec(),
    };
    Ok(match format {
        Format::Json if !emit_table => {
            let mut v = serde_json::to_value(PlanExport::new(&plans))?;
            v["graph"] = json!(src.label);
            v["scheme"] = json!(config.to_string());
            json_text(&v)
        }
        _ => format!("{}  {}\n{}", src.label, config, render_table(&plans)),
    })
}

/// Output and whether every check passed.
fn cmd_verify(graph: &GraphArgs, scheme: &SchemeArgs, run: &RunArgs, cap: u64) -> Result<(String, bool), Invalid> {
    let cap = cap_from_env(cap)?;
    let src = graph.resolve(scheme.fixture())?;
    let config = scheme.config(&src)?;
    let family = config.family(&src.graph)?;
    let g = &src.graph;

    let mut privacy = Vec::new();
    for n in g.servers() {
        match verify::privacy_check(&family, g, n, cap) {
            Ok(r) => privacy.push(r),
            Err(e @ VerifyError::EnumerationTooLarge { .. }) => return Err(Invalid(format!("server {n}: {e}"))),
            Err(e) => return Err(e.into()),
        }
    }
    let seeds: Vec<u64> = (0..run.seeds).collect();
    let decode = verify::decode_check(&family, g, run.q, &seeds)?;
    let cost = verify::cost_audit(&family, g)?;
    let ok = privacy.iter().all(|r| r.verdict.passed()) && decode.verdict.passed() && cost.verdict().passed();
    let overall = Verdict::from_bool(ok);

    let text = match run.format {
        Format::Json => json_text(&json!({
            "graph": src.label,
            "scheme": config.to_string(),
            "privacy": privacy.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
            "decode": decode,
            "cost": cost.to_json(),
            "verdict": overall,
        })),
        Format::Table => {
            let mut out = String::new();
            let _ = writeln!(out, "graph:   {}", src.label);
            let _ = writeln!(out, "scheme:  {config}");
            for r in &privacy {
                let _ = writeln!(
                    out,
                    "privacy  server {:<3} I = {:?}  support {}  {}",
                    r.server,
                    r.index_set,
                    r.support_size(),
                    r.verdict
                );
                if let Some(c) = &r.counterexample {
                    let _ = writeln!(
                        out,
                        "         theta {} vs {}: {:?} has probability {} vs {}",
                        c.theta_a, c.theta_b, c.fingerprint.atoms, c.prob_a, c.prob_b
                    );
                }
            }
            let _ = write!(out, "decode   q = {}  {} runs  {}", decode.q, decode.runs, decode.verdict);
            if let Some((theta, seed)) = decode.failure {
                let _ = write!(out, "  (first failure theta = {theta}, seed = {seed})");
            }
            out.push('\n');
            let downloads: Vec<usize> = cost.per_theta.iter().map(|c| c.download).collect();
            let _ = writeln!(out, "cost     D_k = {downloads:?}  rate {}  {}", cost.rate, cost.verdict());
            let _ = writeln!(out, "overall  {overall}");
            out
        }
    };
    Ok((text, ok))
}

fn rate_table(r: &RateReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "graph:    {}", r.graph);
    let _ = writeln!(out, "scheme:   {}", r.config);
    let lens: std::collections::BTreeSet<usize> = r.message_lens.iter().copied().collect();
    if lens.len() == 1 {
        let _ = writeln!(out, "L:        {}", r.message_lens[0]);
    } else {
        let _ = writeln!(out, "L:        {:?}", r.message_lens);
    }
    let _ = writeln!(out, "D_k:      {:?}", r.downloads);
    let _ = writeln!(out, "total:    {}", r.total_download);
    let lower = r.bounds.lower.as_ref().map_or("-".to_string(), ToString::to_string);
    let _ = writeln!(
        out,
        "rate:     {} {} [{lower}, {}]",
        approx(&r.rate),
        if r.within_bounds() { "within" } else { "outside" },
        r.bounds.upper
    );
    let _ = writeln!(out, "decoded:  {}", if r.decoded_ok { "all" } else { "FAILED" });
    out
}

fn cmd_simulate(
    graph: &GraphArgs,
    scheme: &SchemeArgs,
    run: &RunArgs,
    dump: Option<&PathBuf>,
) -> Result<(String, bool), Invalid> {
    let src = graph.resolve(scheme.fixture())?;
    let config = scheme.config(&src)?;
    let report = match &src.family {
        Some(f) => sim::measure_family_rate(f, &config, run.q)?,
        None => sim::measure_rate(&src.graph, &config, run.q)?,
    };
    let mut decoded = report.decoded_ok;
    if let Some(path) = dump {
        let family = config.family(&src.graph)?;
        let field = Field::new(run.q)?;
        let mut transcripts = Vec::new();
        for theta in src.graph.messages() {
            for seed in 0..run.seeds {
                let t = sim::execute(&family, &src.graph, theta, seed, field)?;
                decoded &= t.decoded_ok;
                transcripts.push(t);
            }
        }
        let text = json_text(&serde_json::to_value(&transcripts)?);
        std::fs::write(path, text).map_err(|e| Invalid(format!("{}: {e}", path.display())))?;
    }
    let text = match run.format {
        Format::Json => json_text(&report.to_json()),
        Format::Table => rate_table(&report),
    };
    Ok((text, decoded))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Bounds { graph, format } => cmd_bounds(graph, *format).map(|s| (s, true)),
        Command::Scheme {
            graph,
            scheme,
            theta,
            emit_table,
            format,
        } => cmd_scheme(graph, scheme, *theta, *emit_table, *format).map(|s| (s, true)),
        Command::Verify { graph, scheme, run, cap } => cmd_verify(graph, scheme, run, *cap),
        Command::Simulate {
            graph,
            scheme,
            run,
            dump_transcripts,
        } => cmd_simulate(graph, scheme, run, dump_transcripts.as_ref()),
    };
    match result {
        Ok((text, ok)) => {
            print!("{text}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

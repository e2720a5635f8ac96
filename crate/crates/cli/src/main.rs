use std::io::{Read, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use zdyn::bratteli::{self, OrderedBratteliDiagram, PathPrefix, Successor};
use zdyn::coverings::{self, CoveringPresentation, CutPoints};
use zdyn::document::{self, Document};
use zdyn::dot::{export_dot, DotOptions};
use zdyn::graphs::Cover;
use zdyn::report::Report;
use zdyn::stationary::{self, MonoGraph};
use zdyn::substitution::{self, Substitution};
use zdyn::{Error, Result};

#[derive(Parser)]
#[command(name = "zdyn", version, about = "Coverings, Bratteli diagrams and substitutions of zero-dimensional systems")]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a document.
    Validate { file: String },
    /// Run a property checker.
    #[command(subcommand)]
    Check(Check),
    /// Convert between coverings and Bratteli diagrams.
    #[command(subcommand)]
    Convert(Convert),
    /// Telescope a covering or diagram.
    Telescope {
        file: String,
        /// Keep every K-th level of a stationary presentation.
        #[arg(long)]
        every: Option<usize>,
        /// Explicit increasing cut levels, comma separated.
        #[arg(long)]
        cuts: Option<String>,
    },
    /// Telescope a mono-graph or self-cover until it is straight.
    Straighten { file: String },
    /// Iterate the Vershik successor on finite path prefixes.
    Vershik {
        file: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// Start at the minimal path into this vertex.
        #[arg(long, conflicts_with = "path")]
        from_min: Option<String>,
        /// Start at this path, edge ids comma separated from level 1.
        #[arg(long)]
        path: Option<String>,
    },
    /// Enumerate finite paths into vertices of a Bratteli level.
    Paths {
        file: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long)]
        vertex: Option<String>,
        /// Paths listed per vertex; counts are always exact.
        #[arg(long, default_value_t = 64)]
        limit: usize,
        /// Add minimal and maximal paths with their classification.
        #[arg(long)]
        extremes: bool,
    },
    /// Kakutani-Rokhlin towers of a covering level.
    Towers {
        file: String,
        #[arg(long, default_value_t = 1)]
        level: usize,
    },
    /// Krieger marker sets.
    Krieger {
        file: String,
        #[arg(long, default_value_t = 1)]
        level: usize,
        /// Period bound L.
        #[arg(long, default_value_t = 1)]
        period: u64,
        #[arg(long, default_value_t = 5)]
        horizon: usize,
    },
    /// Array-system windows and n-symbols.
    Array {
        file: String,
        /// Seed row document.
        #[arg(long, conflicts_with = "symbol")]
        seed_file: Option<String>,
        /// Expand a single edge instead of a seed row.
        #[arg(long)]
        symbol: Option<String>,
        /// Highest row shown, or the level of the symbol edge.
        #[arg(long)]
        level: Option<usize>,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        start: i64,
        #[arg(long, default_value_t = 15, allow_hyphen_values = true)]
        end: i64,
    },
    /// Substitution data: images, growing letters, language and window search.
    Subst {
        file: String,
        /// Report the language up to this factor length.
        #[arg(long)]
        max_len: Option<usize>,
        /// Search for this word, space or comma separated letters.
        #[arg(long)]
        word: Option<String>,
        #[arg(long, default_value_t = 8)]
        depth_max: usize,
    },
    /// Export DOT.
    Dot {
        file: String,
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
}

#[derive(Subcommand)]
enum Check {
    Closing {
        file: String,
    },
    Regulated {
        file: String,
        /// ℓ sequence, comma separated; a trailing `...` continues it.
        #[arg(long)]
        l_seq: String,
        /// Highest level checked.
        #[arg(long, default_value_t = 4)]
        level: usize,
        #[arg(long, default_value_t = 4)]
        depth_max: usize,
    },
    Nesting {
        file: String,
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, default_value_t = 4)]
        depth_max: usize,
    },
    Continuity {
        file: String,
    },
    Overlap {
        file: String,
        #[arg(long, default_value_t = 4)]
        k_max: usize,
        #[arg(long, default_value_t = 8)]
        depth_max: usize,
    },
    Recoding {
        file: String,
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, default_value_t = 2)]
        radius: usize,
    },
}

#[derive(Subcommand)]
enum Convert {
    /// Weighted covering to ordered Bratteli diagram.
    ToBv { file: String },
    /// Ordered Bratteli diagram to weighted covering.
    ToCovering {
        file: String,
        #[arg(long, default_value_t = 4)]
        depth_max: usize,
        /// Compare the result with this covering instead of printing it.
        #[arg(long)]
        against: Option<String>,
    },
}

enum Output {
    Report(Report),
    Document(Document),
    Text(String),
}

fn load(path: &str) -> Result<Document> {
    let text = if path == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Error::Precondition(format!("reading standard input: {e}")))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| Error::Precondition(format!("reading {path}: {e}")))?
    };
    document::parse(&text)
}

fn stationary_cover(c: Cover) -> Result<CoveringPresentation> {
    let n = c.domain.edge_count();
    CoveringPresentation::stationary(c, vec![1; n])
}

fn as_covering(doc: Document, depth: usize) -> Result<CoveringPresentation> {
    match doc {
        Document::Covering(p) => Ok(p),
        Document::Cover(c) => stationary_cover(c),
        Document::Bratteli(d) => bratteli::bv_to_weighted(&d, depth),
        Document::MonoGraph(m) => bratteli::bv_to_weighted(&mono_diagram(m)?, depth),
        other => Err(Error::UnsupportedKind(other.kind().to_string())),
    }
}

fn mono_diagram(m: MonoGraph) -> Result<OrderedBratteliDiagram> {
    let n = m.vertex_count();
    OrderedBratteliDiagram::stationary(m, vec![1; n])
}

fn as_bratteli(doc: Document) -> Result<OrderedBratteliDiagram> {
    match doc {
        Document::Bratteli(d) => Ok(d),
        Document::MonoGraph(m) => mono_diagram(m),
        Document::Covering(p) => bratteli::weighted_to_bv(&p),
        Document::Cover(c) => bratteli::weighted_to_bv(&stationary_cover(c)?),
        other => Err(Error::UnsupportedKind(other.kind().to_string())),
    }
}

fn as_mono(doc: Document) -> Result<MonoGraph> {
    match doc {
        Document::MonoGraph(m) => Ok(m),
        other => as_bratteli(other)?
            .mono()
            .cloned()
            .ok_or_else(|| Error::Precondition("a stationary diagram is required".into())),
    }
}

fn as_self_cover(doc: Document) -> Result<(Cover, Vec<u64>)> {
    match doc {
        Document::Cover(c) => {
            let n = c.domain.edge_count();
            Ok((c, vec![1; n]))
        }
        Document::Covering(CoveringPresentation::Stationary(s)) => Ok((s.cover().clone(), s.multiplicities().to_vec())),
        other => Err(Error::Precondition(format!("a self-cover is required, got {}", other.kind()))),
    }
}

fn as_substitution(doc: Document) -> Result<Substitution> {
    match doc {
        Document::Substitution(s) => Ok(s),
        Document::MonoGraph(m) => substitution::read_substitution_mono(&m),
        Document::Bratteli(d) => match d.mono() {
            Some(m) => substitution::read_substitution_mono(m),
            None => Err(Error::Precondition("a stationary diagram is required".into())),
        },
        other => substitution::read_substitution(&as_covering(other, 4)?),
    }
}

fn split_list(text: &str) -> Vec<String> {
    text.split([',', ' ']).map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect()
}

fn check(c: Check) -> Result<Output> {
    let report = match c {
        Check::Closing { file } => match load(&file)? {
            Document::Bratteli(d) => {
                let r = bratteli::check_closing_bv(&d)?;
                Report::with_verdict("closing", r.verdict, &r)
            }
            doc => {
                let r = coverings::check_closing(&as_covering(doc, 4)?)?;
                Report::with_verdict("closing", r.verdict, &r.witnesses)
            }
        },
        Check::Regulated { file, l_seq, level, depth_max } => {
            let l = document::parse_int_list(&l_seq, Some(level))?;
            let r = match load(&file)? {
                Document::Bratteli(d) => bratteli::check_regulated_bv(&d, &l, level, depth_max)?,
                doc => coverings::check_regulated(&as_covering(doc, depth_max)?, &l, level)?,
            };
            Report::with_verdict("periodicity-regulation", r.verdict, &r)
        }
        Check::Nesting { file, level, depth_max } => {
            let d = as_bratteli(load(&file)?)?;
            let r = bratteli::check_nesting(&d, level, depth_max)?;
            Report::with_verdict("nesting", r.verdict, &r)
        }
        Check::Continuity { file } => {
            let m = as_mono(load(&file)?)?;
            let r = stationary::check_continuity(&m)?;
            Report::with_verdict("continuity", r.verdict, &r)
        }
        Check::Overlap { file, k_max, depth_max } => {
            let (c, _) = as_self_cover(load(&file)?)?;
            let mut a = stationary::analyze_self_cover(&c)?;
            if a.k > 1 {
                a = stationary::analyze_self_cover(&a.cover)?;
            }
            let r = stationary::check_overlap(&a, k_max, depth_max)?;
            Report::with_verdict("overlap", r.overall, &r)
        }
        Check::Recoding { file, level, radius } => {
            let p = as_covering(load(&file)?, 4)?;
            let r = substitution::check_recoding(&p, level, radius)?;
            Report::with_verdict("recoding", r.verdict, &r)
        }
    };
    Ok(Output::Report(report))
}

fn convert(c: Convert) -> Result<Output> {
    match c {
        Convert::ToBv { file } => {
            let p = as_covering(load(&file)?, 4)?;
            Ok(Output::Document(Document::Bratteli(bratteli::weighted_to_bv(&p)?)))
        }
        Convert::ToCovering { file, depth_max, against } => {
            let d = as_bratteli(load(&file)?)?;
            let p = bratteli::bv_to_weighted(&d, depth_max)?;
            match against {
                None => Ok(Output::Document(Document::Covering(p))),
                Some(other) => {
                    let q = as_covering(load(&other)?, depth_max)?;
                    let same = bratteli::isomorphic_stationary(&p, &q);
                    let verdict = if same { "HOLDS" } else { "FAILS" };
                    Ok(Output::Report(Report::new("round-trip-isomorphism", Some(verdict), json!({ "isomorphic": same }))))
                }
            }
        }
    }
}

fn telescope(file: &str, every: Option<usize>, cuts: Option<String>) -> Result<Output> {
    let cuts = match (every, cuts) {
        (Some(k), None) => CutPoints::Every(k),
        (None, Some(list)) => {
            let points = document::parse_int_list(&list, None)?;
            CutPoints::Explicit(points.into_iter().map(|x| x as usize).collect())
        }
        _ => return Err(Error::Precondition("give exactly one of --every and --cuts".into())),
    };
    Ok(Output::Document(match load(file)? {
        Document::Bratteli(d) => Document::Bratteli(bratteli::telescope_bv(&d, &cuts)?),
        Document::MonoGraph(m) => Document::Bratteli(bratteli::telescope_bv(&mono_diagram(m)?, &cuts)?),
        doc => Document::Covering(coverings::telescope(&as_covering(doc, 4)?, &cuts)?),
    }))
}

fn straighten(file: &str) -> Result<(usize, Document)> {
    match load(file)? {
        Document::MonoGraph(m) => {
            let (k, power) = stationary::straighten_mono(&m)?;
            Ok((k, Document::MonoGraph(power)))
        }
        Document::Bratteli(d) => {
            let Some(m) = d.mono() else {
                return Err(Error::Precondition("a stationary diagram is required".into()));
            };
            let (k, _) = stationary::straighten_mono(m)?;
            Ok((k, Document::Bratteli(bratteli::telescope_bv(&d, &CutPoints::Every(k))?)))
        }
        doc => {
            let (c, mult) = as_self_cover(doc)?;
            let a = stationary::analyze_self_cover(&c)?;
            Ok((a.k, Document::Covering(CoveringPresentation::stationary(a.cover, mult)?)))
        }
    }
}

fn vershik(file: &str, depth: usize, steps: usize, from_min: Option<String>, path: Option<String>) -> Result<Output> {
    let d = as_bratteli(load(file)?)?;
    let start = match (from_min, path) {
        (Some(v), None) => {
            let id = d
                .vertices(depth)?
                .iter()
                .position(|x| *x == v)
                .ok_or_else(|| Error::Graph(format!("unknown vertex {v} at level {depth}")))?;
            bratteli::min_path(&d, depth, id)?
        }
        (None, Some(list)) => {
            let names = split_list(&list);
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            PathPrefix::from_names(&d, &refs)?
        }
        _ => return Err(Error::Precondition("give one of --from-min and --path".into())),
    };
    let mut paths = vec![start.names(&d)?];
    let mut cur = start;
    let mut maximal = false;
    for _ in 0..steps {
        match bratteli::vershik_successor(&d, &cur)? {
            Successor::Next(q) => {
                paths.push(q.names(&d)?);
                cur = q;
            }
            Successor::Maximal => {
                maximal = true;
                break;
            }
        }
    }
    Ok(Output::Report(Report::new("vershik", None, json!({ "paths": paths, "maximal_reached": maximal }))))
}

fn paths(file: &str, depth: usize, vertex: Option<String>, limit: usize, extremes: bool) -> Result<Output> {
    let d = as_bratteli(load(file)?)?;
    let names = d.vertices(depth)?;
    let heights = d.heights(depth)?;
    let mut out = Vec::new();
    for (v, name) in names.iter().enumerate() {
        if vertex.as_ref().is_some_and(|x| x != name) {
            continue;
        }
        let listed = if heights[v] as usize <= limit {
            bratteli::enumerate_paths(&d, depth, v)?.iter().map(|p| p.names(&d)).collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        out.push(json!({ "vertex": name, "count": heights[v], "paths": listed }));
    }
    if let Some(v) = vertex {
        if out.is_empty() {
            return Err(Error::Graph(format!("unknown vertex {v} at level {depth}")));
        }
    }
    let mut body = json!({ "depth": depth, "vertices": out });
    if extremes {
        body["extremes"] = serde_json::to_value(bratteli::min_max_paths(&d, depth)?).expect("serializable");
    }
    Ok(Output::Report(Report::new("paths", None, body)))
}

fn array(
    file: &str,
    seed_file: Option<String>,
    symbol: Option<String>,
    level: Option<usize>,
    start: i64,
    end: i64,
) -> Result<Output> {
    let p = as_covering(load(file)?, 4)?;
    if let Some(e) = symbol {
        let n = level.unwrap_or(1);
        let id = p.shape(n)?.edge_id(&e).ok_or_else(|| Error::Graph(format!("unknown edge {e} at level {n}")))?;
        return Ok(Output::Report(Report::new("n-symbol", None, substitution::n_symbol(&p, n, id)?)));
    }
    let Some(seed_path) = seed_file else {
        return Err(Error::Precondition("give --seed-file or --symbol".into()));
    };
    let Document::SeedRow(seed) = load(&seed_path)? else {
        return Err(Error::Precondition("the seed file must be a seed_row document".into()));
    };
    let rows = level.unwrap_or(seed.level);
    let w = substitution::array_window(&p, &seed, rows, start, end)?;
    Ok(Output::Report(Report::new("array-window", None, w)))
}

fn subst(file: &str, max_len: Option<usize>, word: Option<String>, depth_max: usize) -> Result<Output> {
    let doc = load(file)?;
    if let Some(w) = word {
        let p = as_covering(doc, 4)?;
        let r = substitution::check_iota_window(&p, &split_list(&w), depth_max)?;
        let verdict = match &r {
            substitution::IotaResult::Found { .. } => "FOUND",
            substitution::IotaResult::Unknown => "UNKNOWN",
        };
        return Ok(Output::Report(Report::new("iota-window", Some(verdict), r)));
    }
    let s = as_substitution(doc)?;
    let images: Vec<(String, String)> =
        s.letters().iter().zip(s.images()).map(|(a, w)| (a.clone(), s.format_word(w))).collect();
    let mut body = json!({
        "images": images,
        "growing": substitution::growing_letters(&s),
    });
    if let Some(m) = max_len {
        let words: Vec<String> = substitution::language(&s, m)?.iter().map(|w| s.format_word(w)).collect();
        body["language"] = json!(words);
    }
    Ok(Output::Report(Report::new("substitution", None, body)))
}

fn run(cli: Cli) -> Result<Output> {
    match cli.command {
        Command::Validate { file } => {
            let doc = load(&file)?;
            Ok(Output::Report(Report::new("validate", Some("HOLDS"), json!({ "kind": doc.kind() }))))
        }
        Command::Check(c) => check(c),
        Command::Convert(c) => convert(c),
        Command::Telescope { file, every, cuts } => telescope(&file, every, cuts),
        Command::Straighten { file } => {
            let (k, doc) = straighten(&file)?;
            match cli.format {
                Format::Json => Ok(Output::Report(Report::new(
                    "straightening",
                    None,
                    json!({ "k": k, "document": document::to_value(&doc) }),
                ))),
                Format::Human => {
                    eprintln!("K = {k}");
                    Ok(Output::Document(doc))
                }
            }
        }
        Command::Vershik { file, depth, steps, from_min, path } => vershik(&file, depth, steps, from_min, path),
        Command::Paths { file, depth, vertex, limit, extremes } => paths(&file, depth, vertex, limit, extremes),
        Command::Towers { file, level } => {
            let p = as_covering(load(&file)?, 4)?;
            Ok(Output::Report(Report::new("towers", None, coverings::tower_decomposition(&p, level)?)))
        }
        Command::Krieger { file, level, period, horizon } => {
            let p = as_covering(load(&file)?, 4)?;
            let m = coverings::krieger_markers(&p, level, period, horizon)?;
            Ok(Output::Report(Report::with_verdict("krieger-markers", m.check.verdict(), &m)))
        }
        Command::Array { file, seed_file, symbol, level, start, end } => {
            array(&file, seed_file, symbol, level, start, end)
        }
        Command::Subst { file, max_len, word, depth_max } => subst(&file, max_len, word, depth_max),
        Command::Dot { file, level, depth } => {
            Ok(Output::Text(export_dot(&load(&file)?, DotOptions { level, depth })?))
        }
    }
}

// A closed pipe downstream is not an error worth reporting.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    match run(cli) {
        Ok(Output::Report(r)) => {
            match format {
                Format::Human => emit(&r.human()),
                Format::Json => emit(&(serde_json::to_string_pretty(&r).expect("reports serialize") + "\n")),
            }
            if r.is_failure() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Ok(Output::Document(doc)) => {
            emit(&(document::serialize(&doc) + "\n"));
            ExitCode::SUCCESS
        }
        Ok(Output::Text(t)) => {
            emit(&t);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

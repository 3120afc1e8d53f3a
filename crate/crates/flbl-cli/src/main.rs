use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use flbl::hierarchy::{HierarchyError, Mode};
use flbl::label_file::{build_labels, summarize, BuildError, BuildOptions, LabelFile, QueryFailure};
use flbl::rand_edge::short_applies;
use flbl::sqrt::SqrtError;
use flbl::{load_graph, oracle_components, FaultSet, Graph};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_PARSE: u8 = 1;
const EXIT_SIZE: u8 = 2;
const EXIT_FLAGS: u8 = 3;
const EXIT_BUDGET: u8 = 4;
const EXIT_MISMATCH: u8 = 5;

/// Mismatch rate tolerated by `verify` for the randomized schemes.
const RAND_TOLERANCE: f64 = 1e-3;

#[derive(Parser)]
#[command(name = "flbl", version, about = "Fault-tolerant connectivity labels")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum PhiMode {
    Exact,
    Heuristic,
}

impl From<PhiMode> for Mode {
    fn from(m: PhiMode) -> Mode {
        match m {
            PhiMode::Exact => Mode::Exact,
            PhiMode::Heuristic => Mode::Heuristic,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a label file from a graph.
    Build {
        graph: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        scheme: u8,
        #[arg(long)]
        f: usize,
        #[arg(long, value_enum, default_value = "heuristic")]
        phi_mode: PhiMode,
        /// Only for schemes 3 and 4.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        o: PathBuf,
    },
    /// Answer queries from a label file alone.
    #[command(group(ArgGroup::new("what").required(true).args(["pair", "count"])))]
    Query {
        labels: PathBuf,
        /// Comma-separated failed edge ids (file order).
        #[arg(long, default_value = "")]
        fail: String,
        /// "s,t"; may be repeated.
        #[arg(long)]
        pair: Vec<String>,
        #[arg(long)]
        count: bool,
    },
    /// Compare a label file's answers with the graph on random queries.
    Verify {
        graph: PathBuf,
        labels: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Label sizes across a directory of graphs, as CSV.
    Stats {
        dir: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        scheme: u8,
        /// Comma-separated fault budgets.
        #[arg(long)]
        f_range: String,
        #[arg(long, value_enum, default_value = "heuristic")]
        phi_mode: PhiMode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

struct Fail(u8, String);

type Res<T> = Result<T, Fail>;

fn parse_list(s: &str, what: &str) -> Res<Vec<usize>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Fail(EXIT_PARSE, format!("bad {what} entry {t:?}"))))
        .collect()
}

fn read_graph(path: &Path) -> Res<Graph> {
    let text = std::fs::read_to_string(path).map_err(|e| Fail(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    load_graph(&text).map_err(|e| Fail(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn read_labels(path: &Path) -> Res<LabelFile> {
    let bytes = std::fs::read(path).map_err(|e| Fail(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    LabelFile::from_bytes(&bytes).map_err(|e| Fail(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn build_err(e: BuildError) -> Fail {
    let code = match &e {
        BuildError::Hierarchy(HierarchyError::SizeCap { .. }) | BuildError::Sqrt(SqrtError::Hierarchy(HierarchyError::SizeCap { .. })) => EXIT_SIZE,
        BuildError::Sqrt(SqrtError::SymbolWidth(_)) => EXIT_SIZE,
        BuildError::Scheme(_) => EXIT_FLAGS,
        _ => EXIT_PARSE,
    };
    Fail(code, e.to_string())
}

fn query_err(e: QueryFailure) -> Fail {
    let code = match e {
        QueryFailure::TooManyFaults { .. } => EXIT_BUDGET,
        QueryFailure::InvalidEdge(_) | QueryFailure::Duplicate(_) => EXIT_FLAGS,
        _ => EXIT_PARSE,
    };
    Fail(code, e.to_string())
}

fn build(g: &Graph, scheme: u8, f: usize, mode: Mode, seed: u64) -> Res<LabelFile> {
    if scheme == 4 && !short_applies(g.n(), f) {
        eprintln!("warning: f = {f} is below 2·⌈log₂ n⌉² for n = {}; building scheme 3 instead", g.n());
    }
    build_labels(g, scheme, f, &BuildOptions { mode, seed, ..Default::default() }).map_err(build_err)
}

fn run(cmd: Cmd) -> Res<()> {
    match cmd {
        Cmd::Build { graph, scheme, f, phi_mode, seed, o } => {
            if f == 0 {
                return Err(Fail(EXIT_FLAGS, "--f must be at least 1".into()));
            }
            if seed.is_some() && scheme <= 2 {
                return Err(Fail(EXIT_FLAGS, "--seed only applies to schemes 3 and 4".into()));
            }
            let g = read_graph(&graph)?;
            let file = build(&g, scheme, f, phi_mode.into(), seed.unwrap_or(0))?;
            std::fs::write(&o, file.to_bytes()).map_err(|e| Fail(EXIT_PARSE, format!("{}: {e}", o.display())))?;
            let st = file.stats();
            match file.hierarchy() {
                Some((h, phi)) => println!("scheme={} h={h} phi={phi}", file.scheme_id()),
                None => println!("scheme={} seed={}", file.scheme_id(), file.seed()),
            }
            println!("max_bits={} mean_bits={:.2}", st.max_bits, st.mean_bits);
        }
        Cmd::Query { labels, fail, pair, count } => {
            let file = read_labels(&labels)?;
            let ids = parse_list(&fail, "--fail")?;
            let ans = file.query(&ids).map_err(query_err)?;
            if count {
                println!("{}", ans.component_count());
            }
            for p in pair {
                let st = parse_list(&p, "--pair")?;
                let [s, t] = st[..] else {
                    return Err(Fail(EXIT_FLAGS, format!("--pair wants two vertices, got {p:?}")));
                };
                if s >= file.n || t >= file.n {
                    return Err(Fail(EXIT_FLAGS, format!("vertex out of range in {p:?}")));
                }
                println!("{}", if file.connected(&ans, s, t) { "connected" } else { "disconnected" });
            }
        }
        Cmd::Verify { graph, labels, trials, seed } => {
            let g = read_graph(&graph)?;
            let file = read_labels(&labels)?;
            if (g.n(), g.m()) != (file.n, file.m) {
                return Err(Fail(EXIT_FLAGS, "label file was built for a different graph".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut bad = 0usize;
            for _ in 0..trials {
                let k = rng.random_range(0..=file.f().min(g.m()));
                let ids = sample(&mut rng, g.m(), k).into_vec();
                let truth = oracle_components(&g, &FaultSet::new(&g, &ids).expect("sampled ids are distinct"));
                let ans = file.query(&ids).map_err(query_err)?;
                let (s, t) = (rng.random_range(0..g.n()), rng.random_range(0..g.n()));
                if file.connected(&ans, s, t) != truth.same(s, t) || ans.component_count() != truth.count {
                    bad += 1;
                }
            }
            let rate = if trials == 0 { 0.0 } else { bad as f64 / trials as f64 };
            println!("scheme={} trials={trials} mismatches={bad} rate={rate:.6}", file.scheme_id());
            let limit = if file.scheme_id() <= 2 { 0.0 } else { RAND_TOLERANCE };
            if rate > limit {
                return Err(Fail(EXIT_MISMATCH, format!("mismatch rate {rate} exceeds {limit}")));
            }
        }
        Cmd::Stats { dir, scheme, f_range, phi_mode, seed } => {
            let fs = parse_list(&f_range, "--f-range")?;
            if fs.contains(&0) {
                return Err(Fail(EXIT_FLAGS, "budgets must be at least 1".into()));
            }
            let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
                .map_err(|e| Fail(EXIT_PARSE, format!("{}: {e}", dir.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file())
                .collect();
            paths.sort();
            let graphs: Vec<Graph> = paths.iter().map(|p| read_graph(p)).collect::<Res<_>>()?;
            println!("f,scheme,max_bits,mean_bits");
            for f in fs {
                let mut bits = Vec::new();
                let mut id = scheme;
                for g in &graphs {
                    let file = build(g, scheme, f, phi_mode.into(), seed)?;
                    id = file.scheme_id();
                    bits.extend(file.edge_bits());
                }
                let st = summarize(&bits);
                println!("{f},{id},{},{:.2}", st.max_bits, st.mean_bits);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_FLAGS } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

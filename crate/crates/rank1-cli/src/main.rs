use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rank1::arcs::{per_family_breakdown, BreakdownParams};
use rank1::cert::{exact_resultant, g_pair, puiseux_precheck, resultant_test, rho_defect, Evidence, SpacerPattern, Verdict};
use rank1::config::parse_config;
use rank1::emit::{to_csv, unix_time, Manifest, Table};
use rank1::experiments::{run_experiment, write_outputs};
use rank1::iet::{check_conditions, induce, orbit_coding, parse_real, IetParams, Lin, DEFAULT_BITS};
use rank1::nt::{lambda_cached, mu_cached, mu_exp_sum, Kind};
use rank1::poly::{grid_size, l1_norm, riesz_correlation, riesz_degree, riesz_product};
use rank1::word::{parse_spec, to_bitstring, RankOneSpec};
use rank1::wordsys::{check_growth, from_rank_one_rigid, iterate_l1_bound, l1_growth_check, RigidParams, WordRef, WordSystem};
use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Rank-one words, Riesz products, Moebius correlations, arc decompositions,
/// resultant certificates and 3-interval exchanges.
#[derive(Parser)]
#[command(name = "rank1", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Materialize a range of the level-N word of a spec as a bit string.
    BuildWord(BuildWordArgs),
    /// Riesz product R_N = prod |P_j|^2 sampled on a grid.
    Spectrum(SpectrumArgs),
    /// |prod P_j(p theta)| |prod P_j(q theta)| on a grid, zero near theta = 0.
    RieszCorrelation(RieszArgs),
    /// Sieve mu or Lambda up to N.
    Sieve(SieveArgs),
    /// Evaluate sum_{m <= N} mu(m) e(m theta).
    Expsum(ExpsumArgs),
    /// Per-family arc integrals of |P_W| |sum mu e| with the two bound columns.
    ArcL1(ArcArgs),
    /// Resultant certificate for a spacer pattern and a prime pair.
    Certificate(CertArgs),
    /// Word-system files: growth and L1 checks.
    #[command(subcommand)]
    Wordsys(WordsysCommand),
    /// 3-interval exchanges: expansion and orbit coding.
    #[command(subcommand)]
    Iet(IetCommand),
    /// Run a configured experiment; exit code 0 iff all assertions pass.
    Run(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct BuildWordArgs {
    /// Spec file (key-value format).
    #[arg(long)]
    spec: PathBuf,
    /// Level of the word B_N.
    #[arg(long)]
    level: usize,
    /// Half-open symbol range S..E (default: the whole word).
    #[arg(long)]
    range: Option<String>,
    /// Output file (default: stdout).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Refuse to materialize more than this many symbols.
    #[arg(long, default_value_t = rank1::word::DEFAULT_CAP)]
    cap: u64,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Spec file.
    #[arg(long)]
    spec: PathBuf,
    /// Product level N.
    #[arg(long)]
    level: usize,
    /// Grid size M (default: 8 times the product degree, rounded up).
    #[arg(long)]
    grid: Option<usize>,
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    out: TableFormat,
    /// Output file (default: stdout).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RieszArgs {
    /// Spec file.
    #[arg(long)]
    spec: PathBuf,
    /// Product level N.
    #[arg(long)]
    level: usize,
    /// First dilation p.
    #[arg(long)]
    p: u64,
    /// Second dilation q.
    #[arg(long)]
    q: u64,
    /// Radius of the excluded neighborhood of 0.
    #[arg(long, default_value_t = 0.0)]
    exclude_near_zero: f64,
    /// Grid size M (default: 8 times max(p, q) times the product degree).
    #[arg(long)]
    grid: Option<usize>,
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    out: TableFormat,
    /// Output file (default: stdout).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SieveFormat {
    Bin,
    Csv,
}

#[derive(Args)]
struct SieveArgs {
    /// Arithmetic function.
    #[arg(long, value_parser = ["mu", "lambda"])]
    kind: String,
    /// Upper bound N.
    #[arg(long)]
    n: u64,
    /// Output format: packed binary table or CSV of n,value.
    #[arg(long, value_enum, default_value = "bin")]
    out: SieveFormat,
    /// Output file (required for bin; default stdout for csv).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExpsumArgs {
    /// Frequency theta.
    #[arg(long, allow_hyphen_values = true)]
    theta: f64,
    /// Length N.
    #[arg(long)]
    n: u64,
}

#[derive(Args)]
struct ArcArgs {
    /// Spec file.
    #[arg(long)]
    spec: PathBuf,
    /// Level of the word B_N.
    #[arg(long)]
    level: usize,
    /// Largest dyadic Q (default: largest power of 2 below N^(1/8)).
    #[arg(long = "Qmax")]
    q_max: Option<u64>,
    /// Largest dyadic K (default: largest power of 2 below N^(1/8)).
    #[arg(long = "Kmax")]
    k_max: Option<u64>,
    /// Arc exponent tau, 0 < tau < 1/3.
    #[arg(long, default_value_t = 0.25)]
    tau: f64,
    /// Exponent A of the (log N)^-A column.
    #[arg(long, default_value_t = 2.0)]
    a_exp: f64,
    /// Use (log(2+K))^3 in place of (log N)^3.
    #[arg(long)]
    refined: bool,
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    out: TableFormat,
    /// Output file (default: stdout).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CertArgs {
    /// Number of columns v.
    #[arg(long)]
    v: u32,
    /// Spacer counts a_1,..,a_{v-1}.
    #[arg(long, value_delimiter = ',')]
    spacers: Vec<u32>,
    /// Smaller prime p, p = 1 mod v.
    #[arg(long)]
    p: u64,
    /// Larger prime q, q = 1 mod v.
    #[arg(long)]
    q: u64,
    /// Also sample rho on T theta points and E psi points, printed as CSV.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    rho_grid: Option<Vec<usize>>,
    /// Work limit for the exact resultant (degree and leading coefficient).
    #[arg(long, default_value_t = 20_000_000_000)]
    max_work: u128,
}

#[derive(Subcommand)]
enum WordsysCommand {
    /// Check growth and L1 behaviour of a word-system file.
    Check(WordsysCheckArgs),
    /// Write the rigid word system of a rank-one spec.
    FromSpec(WordsysFromSpecArgs),
}

#[derive(Args)]
struct WordsysCheckArgs {
    /// Word-system file (`n: W = W[l,i]^k ...` per word).
    #[arg(long)]
    file: PathBuf,
    /// Growth constant C0 for beta(s) > C0 s.
    #[arg(long = "C0")]
    c0: f64,
    /// Bound r < C on the number of parts.
    #[arg(long, default_value_t = 64)]
    r_bound: usize,
    /// Also tabulate ||P_W||_1 for chain words of length at most this.
    #[arg(long, default_value_t = 0)]
    l1_max_len: u128,
}

#[derive(Args)]
struct WordsysFromSpecArgs {
    /// Spec file.
    #[arg(long)]
    spec: PathBuf,
    /// Bound r < C on the number of parts.
    #[arg(long, default_value_t = 8)]
    r_bound: usize,
    /// Output file (default: stdout).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum IetCommand {
    /// Induce and print the expansion steps and return-word lengths.
    Expand(IetExpandArgs),
    /// Orbit coding (letters 1, 2, 3) of a point.
    Code(IetCodeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum IetFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct IetExpandArgs {
    /// alpha as an expression (rationals, +, -, *, /, sqrt).
    #[arg(long)]
    alpha: String,
    /// beta as an expression.
    #[arg(long)]
    beta: String,
    /// Number of induction steps.
    #[arg(long)]
    depth: usize,
    /// Working precision in bits for irrational parameters.
    #[arg(long, default_value_t = DEFAULT_BITS)]
    bits: u32,
    /// Constant C0 for the min(n_k, m_k) > C0 condition.
    #[arg(long = "C0", default_value_t = 1)]
    c0: u64,
    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    out: IetFormat,
    /// Output file (default: stdout).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct IetCodeArgs {
    /// alpha as an expression.
    #[arg(long)]
    alpha: String,
    /// beta as an expression.
    #[arg(long)]
    beta: String,
    /// Starting point as an expression.
    #[arg(long, default_value = "0")]
    x0: String,
    /// Number of symbols.
    #[arg(long)]
    len: usize,
    /// Working precision in bits.
    #[arg(long, default_value_t = DEFAULT_BITS)]
    bits: u32,
    /// Output format (only txt).
    #[arg(long, value_parser = ["txt"], default_value = "txt")]
    out: String,
    /// Output file (default: stdout).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Override the configured output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn read_spec(path: &Path) -> Result<RankOneSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_spec(&text).with_context(|| format!("parsing {}", path.display()))
}

fn check_level(spec: &RankOneSpec, level: usize) -> Result<()> {
    if level > spec.levels() {
        bail!("level {level} beyond the {} levels of the spec", spec.levels());
    }
    Ok(())
}

fn emit_bytes(output: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn manifest(params: Vec<(&str, String)>) -> Manifest {
    let params: Vec<(String, String)> = params.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    let text: String = params.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    Manifest::new(&text, params, 0, unix_time())
}

fn emit_table(format: TableFormat, m: &Manifest, table: &Table, output: Option<&Path>) -> Result<()> {
    let text = match format {
        TableFormat::Csv => to_csv(m, table),
        TableFormat::Json => rank1::emit::to_json(m, table) + "\n",
    };
    emit_bytes(output, text.as_bytes())
}

fn grid_table(grid: &rank1::poly::CircleGrid<f64>) -> Table {
    let mut t = Table::new(&["theta", "value"]);
    for (i, v) in grid.values.iter().enumerate() {
        t.push(vec![grid.theta(i).to_string(), v.to_string()]);
    }
    t
}

fn build_word(a: BuildWordArgs) -> Result<()> {
    let spec = read_spec(&a.spec)?;
    check_level(&spec, a.level)?;
    let w = spec.word(a.level)?;
    let len = w.len_u128();
    let (s, e) = match &a.range {
        None => (0, len),
        Some(r) => {
            let (s, e) = r.split_once("..").ok_or_else(|| anyhow!("range must look like S..E"))?;
            (s.trim().parse::<u128>()?, e.trim().parse::<u128>()?)
        }
    };
    let bits = w.materialize_capped(s, e, a.cap)?;
    emit_bytes(a.output.as_deref(), format!("{}\n", to_bitstring(&bits)).as_bytes())
}

fn spectrum(a: SpectrumArgs) -> Result<()> {
    let spec = read_spec(&a.spec)?;
    check_level(&spec, a.level)?;
    let m = a.grid.unwrap_or_else(|| grid_size(riesz_degree(&spec, a.level), 8));
    let grid = riesz_product(&spec, a.level, m)?;
    let man = manifest(vec![("spec", a.spec.display().to_string()), ("level", a.level.to_string()), ("grid", m.to_string())]);
    emit_table(a.out, &man, &grid_table(&grid), a.output.as_deref())
}

fn riesz(a: RieszArgs) -> Result<()> {
    let spec = read_spec(&a.spec)?;
    check_level(&spec, a.level)?;
    let m = a.grid.unwrap_or_else(|| grid_size(riesz_degree(&spec, a.level) * a.p.max(a.q) as u128, 8));
    let grid = riesz_correlation(&spec, a.level, a.p, a.q, m, a.exclude_near_zero)?;
    let man = manifest(vec![
        ("spec", a.spec.display().to_string()),
        ("level", a.level.to_string()),
        ("p", a.p.to_string()),
        ("q", a.q.to_string()),
        ("exclude_near_zero", a.exclude_near_zero.to_string()),
        ("grid", m.to_string()),
        ("integral", l1_norm(&grid).to_string()),
    ]);
    emit_table(a.out, &man, &grid_table(&grid), a.output.as_deref())
}

fn sieve(a: SieveArgs) -> Result<()> {
    let kind: Kind = a.kind.parse().map_err(|e| anyhow!("{e}"))?;
    match (a.out, kind) {
        (SieveFormat::Bin, _) => {
            let path = a.output.ok_or_else(|| anyhow!("--out bin needs --output PATH"))?;
            let f = std::io::BufWriter::new(std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?);
            match kind {
                Kind::Mu => mu_cached(a.n)?.write_to(f)?,
                Kind::Lambda => lambda_cached(a.n)?.write_to(f)?,
            }
            Ok(())
        }
        (SieveFormat::Csv, Kind::Mu) => {
            let t = mu_cached(a.n)?;
            let mut s = String::from("n,mu\n");
            for k in 1..=a.n {
                writeln!(s, "{k},{}", t.get(k))?;
            }
            emit_bytes(a.output.as_deref(), s.as_bytes())
        }
        (SieveFormat::Csv, Kind::Lambda) => {
            let t = lambda_cached(a.n)?;
            let mut s = String::from("n,lambda\n");
            for k in 1..=a.n {
                writeln!(s, "{k},{}", t.get(k))?;
            }
            emit_bytes(a.output.as_deref(), s.as_bytes())
        }
    }
}

fn expsum(a: ExpsumArgs) -> Result<()> {
    let t = mu_cached(a.n)?;
    let v = mu_exp_sum(&t, a.theta, a.n)?;
    println!("re,im,abs");
    println!("{},{},{}", v.re, v.im, v.norm());
    Ok(())
}

fn arc_l1(a: ArcArgs) -> Result<()> {
    let spec = read_spec(&a.spec)?;
    check_level(&spec, a.level)?;
    let word = spec.word(a.level)?.materialize_all()?;
    let n = word.len() as u64;
    let mu = mu_cached(n)?.to_vec(n);
    let mut params = BreakdownParams::defaults(n);
    params.tau = a.tau;
    params.a_exp = a.a_exp;
    params.refined = a.refined;
    if let Some(q) = a.q_max {
        params.q_max = q;
    }
    if let Some(k) = a.k_max {
        params.k_max = k;
    }
    let b = per_family_breakdown(&word, &mu, &params)?;
    let mut t = Table::new(&["Q", "K", "arc_count", "integral", "bound_249", "bound_250"]);
    for r in &b.rows {
        t.push(vec![
            r.q.to_string(),
            r.k.to_string(),
            r.arc_count.to_string(),
            r.integral.to_string(),
            r.bound_249.to_string(),
            r.bound_250.to_string(),
        ]);
    }
    let man = manifest(vec![
        ("spec", a.spec.display().to_string()),
        ("level", a.level.to_string()),
        ("n", n.to_string()),
        ("Qmax", params.q_max.to_string()),
        ("Kmax", params.k_max.to_string()),
        ("tau", params.tau.to_string()),
        ("a_exp", params.a_exp.to_string()),
        ("total", b.total.to_string()),
        ("rest", b.rest.to_string()),
    ]);
    emit_table(a.out, &man, &t, a.output.as_deref())
}

fn certificate(a: CertArgs) -> Result<()> {
    let pattern = SpacerPattern::new(a.v, a.spacers.clone())?;
    let rep = resultant_test(&pattern, a.p, a.q)?;
    let verdict = match rep.verdict {
        Verdict::Certified => "Certified",
        Verdict::Degenerate => "Degenerate",
    };
    println!("verdict: {verdict}");
    match &rep.evidence {
        Evidence::NonzeroValue { x0, prime, value } => println!("evidence: Res(x = {x0}) = {value} mod {prime}"),
        Evidence::CommonRoot { a } => println!("evidence: common root y = x^(-{a})"),
        Evidence::Exact => println!("evidence: exact resultant"),
    }
    println!("puiseux_precheck: {}", puiseux_precheck(&pattern));
    match rep.verdict {
        Verdict::Degenerate => {
            println!("degree: -inf (resultant is zero)");
            println!("leading_coefficient: 0");
        }
        Verdict::Certified => {
            let (g1, g2) = g_pair(&pattern, a.p, a.q);
            match exact_resultant(&g1, &g2, a.max_work) {
                Ok(c) => {
                    let low = c.iter().position(|x| x != &0.into()).unwrap_or(0);
                    println!("degree: {}", c.len() - 1);
                    println!("leading_coefficient: {}", c.last().unwrap());
                    println!("lowest_degree: {low}");
                }
                Err(e) => println!("degree: unavailable ({e})"),
            }
        }
    }
    if let Some(g) = a.rho_grid {
        if g.len() != 2 {
            bail!("--rho-grid expects T,E");
        }
        let rho = rho_defect(&pattern, a.p, a.q, g[0], g[1]);
        println!("theta,rho,minorant");
        for i in 0..rho.theta.len() {
            println!("{},{},{}", rho.theta[i], rho.rho[i], rho.minorant[i]);
        }
    }
    Ok(())
}

fn wordsys_check(a: WordsysCheckArgs) -> Result<bool> {
    let text = std::fs::read_to_string(&a.file).with_context(|| format!("reading {}", a.file.display()))?;
    let sys = WordSystem::parse(&text, a.r_bound)?;
    let rep = check_growth(&sys, a.c0);
    println!("s,beta,log_beta_over_s,c0_s,pass");
    for r in &rep.rows {
        println!("{},{},{},{},{}", r.s, r.beta, r.log_beta_over_s, r.c0_s, r.pass);
    }
    match rep.s0 {
        Some(s0) => println!("# s0 = {s0}"),
        None => println!("# s0 = none"),
    }
    if a.l1_max_len > 0 {
        let top = (0..=sys.levels()).rev().find(|&s| sys.words_at(s) > 0 && sys.len(WordRef { level: s, index: 0 }) <= a.l1_max_len);
        if let Some(top) = top {
            let rows = l1_growth_check(&sys, 0..=top, a.l1_max_len as usize)?;
            println!("level,len,l1,exponent,bound_ratio");
            for r in &rows {
                let b = iterate_l1_bound(&sys, WordRef { level: r.level, index: 0 }, a.l1_max_len as usize)?;
                println!("{},{},{},{},{}", r.level, r.len, r.l1, r.exponent, b.ratio);
            }
            println!("# exponent_decreasing = {}", rank1::wordsys::exponent_decreasing(&rows));
        }
    }
    Ok(rep.s0.is_some())
}

fn wordsys_from_spec(a: WordsysFromSpecArgs) -> Result<()> {
    let spec = read_spec(&a.spec)?;
    let sys = from_rank_one_rigid(&spec, RigidParams { r_bound: a.r_bound })?;
    emit_bytes(a.output.as_deref(), sys.to_text().as_bytes())
}

#[derive(Serialize)]
struct ExpandOut {
    alpha: f64,
    beta: f64,
    start: String,
    steps: Vec<rank1::iet::ExpansionStep>,
    lengths: Vec<rank1::iet::ReturnWords>,
    invariants_hold: bool,
    inf_ratio: f64,
    min_nm: u64,
    c0: u64,
    condition_ratio_positive: bool,
    condition_above_c0: bool,
}

fn iet_expand(a: IetExpandArgs) -> Result<()> {
    let params = IetParams::parse(&a.alpha, &a.beta, a.bits)?;
    let exp = induce(&params, a.depth)?;
    let lengths: Vec<_> = exp.levels.iter().map(|l| l.words.clone()).collect();
    let cond = check_conditions(&exp.steps, a.c0)?;
    let out = ExpandOut {
        alpha: params.alpha(),
        beta: params.beta(),
        start: exp.start.to_string(),
        steps: exp.steps.clone(),
        invariants_hold: lengths.iter().all(|w| w.invariants_hold()),
        lengths,
        inf_ratio: cond.inf_ratio,
        min_nm: cond.min_nm,
        c0: a.c0,
        condition_ratio_positive: cond.ratio_positive,
        condition_above_c0: cond.above_c0,
    };
    let text = match a.out {
        IetFormat::Json => serde_json::to_string_pretty(&out)? + "\n",
        IetFormat::Csv => {
            let mut s = String::from("k,n,m,eps,a,b,c\n");
            for (k, w) in out.lengths.iter().enumerate() {
                let (n, m, e) = if k == 0 {
                    (String::new(), String::new(), String::new())
                } else {
                    let st = out.steps[k - 1];
                    (st.n.to_string(), st.m.to_string(), st.eps.to_string())
                };
                writeln!(s, "{k},{n},{m},{e},{},{},{}", w.a, w.b, w.c)?;
            }
            s
        }
    };
    emit_bytes(a.output.as_deref(), text.as_bytes())
}

fn iet_code(a: IetCodeArgs) -> Result<()> {
    let alpha = parse_real(&a.alpha, a.bits)?;
    let beta = parse_real(&a.beta, a.bits)?;
    let x0 = parse_real(&a.x0, a.bits)?;
    let params = IetParams::with_x0(alpha, beta, x0, a.bits)?;
    let code = orbit_coding(&params, Lin::X0, a.len)?;
    let mut s: String = code.iter().map(|&c| char::from(b'0' + c)).collect();
    s.push('\n');
    emit_bytes(a.output.as_deref(), s.as_bytes())
}

fn run(a: RunArgs) -> Result<bool> {
    let cfg = parse_config(&a.config)?;
    let dir = a.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let report = run_experiment(&cfg, &dir)?;
    let out_dir = a.out_dir.unwrap_or_else(|| rank1::config::resolve(&a.config, &cfg.out_dir));
    let paths = write_outputs(&cfg, &report, &out_dir, unix_time())?;
    for p in &paths {
        println!("wrote {}", p.display());
    }
    for (name, v) in &report.verdicts {
        println!("decay {name}: first {} last {} improved {}", v.first, v.last, v.improved);
    }
    for x in &report.assertions {
        println!("{} {}", if x.pass { "PASS" } else { "FAIL" }, x.name);
    }
    Ok(report.all_pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::BuildWord(a) => build_word(a).map(|_| true),
        Command::Spectrum(a) => spectrum(a).map(|_| true),
        Command::RieszCorrelation(a) => riesz(a).map(|_| true),
        Command::Sieve(a) => sieve(a).map(|_| true),
        Command::Expsum(a) => expsum(a).map(|_| true),
        Command::ArcL1(a) => arc_l1(a).map(|_| true),
        Command::Certificate(a) => certificate(a).map(|_| true),
        Command::Wordsys(WordsysCommand::Check(a)) => wordsys_check(a),
        Command::Wordsys(WordsysCommand::FromSpec(a)) => wordsys_from_spec(a).map(|_| true),
        Command::Iet(IetCommand::Expand(a)) => iet_expand(a).map(|_| true),
        Command::Iet(IetCommand::Code(a)) => iet_code(a).map(|_| true),
        Command::Run(a) => run(a),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

//! The `antichain` command: plan tables, codewords, element streams, level
//! counts, certificates and membership decoding for one growth family.
//!
//! Exit status: 0 success, 1 certificate failure, 2 invalid input, 3 when some
//! decode input lines were malformed.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::PathBuf;

use antichain_core::antichain::{count_exact, decode, enumerate_up_to, level_lower_bound};
use antichain_core::bitstring::BitString;
use antichain_core::growth::{
    build_plan, plan_for_levels, validate, FamilySpec, PlanOptions, SharedSequence,
    TableSequence,
};
use antichain_core::prefixcode::{codewords_iter, dump_line};
use antichain_core::verify::{check_antichain, check_claim1, run_all, Bundle, Certificate};
use antichain_core::ConstructionPlan;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CERTIFICATE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_DECODE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "antichain", version, about = "Dense antichains from a dyadic prefix code")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the table k, l_k, a_k, s_k and the Kraft-sum certificate
    Plan(RunConfig),
    /// Print the codewords c_(k,i) in order
    Codewords(RunConfig),
    /// Stream every family member inside {1..nmax}
    Generate(RunConfig),
    /// Exact level counts |F ∩ 2^[n]| with f_n and the lower bound 2^(n-k) - 1
    Count(RunConfig),
    /// Run all certificates and exit 1 if any fails
    Verify(VerifyConfig),
    /// Decode sets (sorted integers, one set per line) from stdin or a file
    Decode(DecodeConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    Constant,
    Corollary,
    Table,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Text,
    Jsonl,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Growth family; implied to be `table` when --table is given
    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,
    /// Sequence CSV (`n,f_n` rows plus a `#extend=constant` or `#tail_bound=m/2^e` footer)
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Exponent epsilon of the corollary family
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    /// First index n0 (constant family) or smallest admissible n0 (corollary family)
    #[arg(long)]
    pub n0: Option<u32>,
    /// Seed of the random test family
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest level n
    #[arg(long)]
    pub nmax: Option<u32>,
    /// Largest block index k (plan and codewords)
    #[arg(long)]
    pub kmax: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Refuse to enumerate more than this many sets
    #[arg(long, default_value_t = 1 << 22)]
    pub cap: u64,
    /// Prefix codewords with `k,i,`
    #[arg(long)]
    pub annotate: bool,
    /// Print members as sets like {1,3,4} in text format
    #[arg(long)]
    pub sets: bool,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyConfig {
    #[command(flatten)]
    pub run: RunConfig,
    /// Only check that the given sets form an antichain (`-` reads stdin);
    /// accepts the output of `generate` in any format
    #[arg(long)]
    pub elements: Option<PathBuf>,
    /// Increment a_K before verifying (fault injection)
    #[arg(long, value_name = "K")]
    pub tamper_block: Option<u32>,
}

#[derive(Debug, Clone, Args)]
pub struct DecodeConfig {
    #[command(flatten)]
    pub run: RunConfig,
    /// Read sets from this file instead of stdin
    #[arg(long)]
    pub input: Option<PathBuf>,
}

const DEFAULT_NMAX: u32 = 14;

/// An error that ends the run with the given exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message: message.into(),
    }
}

type Outcome = Result<i32, Failure>;

impl RunConfig {
    pub fn family_spec(&self) -> Result<FamilySpec, Failure> {
        let family = match (self.family, &self.table) {
            (None | Some(FamilyName::Table), Some(_)) | (Some(FamilyName::Table), None) => {
                FamilyName::Table
            }
            (Some(_), Some(_)) => {
                return Err(invalid("--table conflicts with --family other than `table`"))
            }
            (Some(f), None) => f,
            (None, None) => FamilyName::Constant,
        };
        Ok(match family {
            FamilyName::Constant => FamilySpec::Constant {
                n0: self.n0.unwrap_or(3),
            },
            FamilyName::Corollary => FamilySpec::Corollary {
                epsilon: self.eps,
                n_min: self.n0.unwrap_or(4),
            },
            FamilyName::Random => FamilySpec::Random { seed: self.seed },
            FamilyName::Table => {
                let path = self
                    .table
                    .as_ref()
                    .ok_or_else(|| invalid("--family table needs --table PATH"))?;
                let text = std::fs::read_to_string(path)
                    .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
                FamilySpec::Table(
                    TableSequence::parse_csv(&text)
                        .map_err(|e| invalid(format!("{}: {e}", path.display())))?,
                )
            }
        })
    }

    fn nmax(&self) -> u32 {
        self.nmax.unwrap_or(DEFAULT_NMAX)
    }

    /// Builds and validates the sequence; an invalid sequence is reported with
    /// every violation.
    pub fn sequence(&self) -> Result<SharedSequence, Failure> {
        let seq = self
            .family_spec()?
            .build()
            .map_err(|e| invalid(e.to_string()))?;
        let report = validate(seq.as_ref(), self.nmax().max(256));
        if !report.is_valid() {
            let mut msg = format!("invalid growth sequence ({}):", seq.describe());
            for v in &report.violations {
                let _ = write!(msg, "\n  {v}");
            }
            return Err(invalid(msg));
        }
        Ok(seq)
    }

    fn check_nmax(&self, seq: &SharedSequence) -> Result<u32, Failure> {
        let n = self.nmax();
        if n < seq.n0() {
            return Err(invalid(format!("--nmax {n} is below n0 = {}", seq.n0())));
        }
        Ok(n)
    }

    /// Plan to `--kmax` if given, else the smallest plan covering `--nmax`.
    pub fn plan(&self, seq: &SharedSequence) -> Result<ConstructionPlan, Failure> {
        let built = match self.kmax {
            Some(k) => build_plan(seq.as_ref(), k, PlanOptions::default()),
            None => plan_for_levels(seq.as_ref(), self.nmax(), PlanOptions::default()),
        };
        built.map_err(|e| invalid(e.to_string()))
    }
}

/// Parses `args` and runs the command.
pub fn run<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match execute(&cli.command, input, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

pub fn execute(command: &Command, input: &mut dyn BufRead, out: &mut dyn Write) -> Outcome {
    let io = |e: std::io::Error| invalid(format!("write failed: {e}"));
    match command {
        Command::Plan(cfg) => cmd_plan(cfg, out).map_err(io)?,
        Command::Codewords(cfg) => cmd_codewords(cfg, out).map_err(io)?,
        Command::Generate(cfg) => cmd_generate(cfg, out).map_err(io)?,
        Command::Count(cfg) => cmd_count(cfg, out).map_err(io)?,
        Command::Verify(cfg) => cmd_verify(cfg, input, out).map_err(io)?,
        Command::Decode(cfg) => cmd_decode(cfg, input, out).map_err(io)?,
    }
}

type IoOutcome = std::io::Result<Outcome>;

fn write_certificate(out: &mut dyn Write, format: Format, cert: &Certificate) -> std::io::Result<()> {
    match format {
        Format::Jsonl => writeln!(out, "{}", cert.to_json()),
        _ => writeln!(out, "{cert}"),
    }
}

pub fn cmd_plan(cfg: &RunConfig, out: &mut dyn Write) -> IoOutcome {
    let seq = match cfg.sequence() {
        Ok(s) => s,
        Err(f) => return Ok(Err(f)),
    };
    let plan = match cfg.plan(&seq) {
        Ok(p) => p,
        Err(f) => return Ok(Err(f)),
    };
    match cfg.format {
        Format::Text => {
            writeln!(out, "# {}", seq.describe())?;
            writeln!(out, "{:>5} {:>8} {:>8}  s_k", "k", "l_k", "a_k")?;
            for row in plan.rows() {
                writeln!(out, "{:>5} {:>8} {:>8}  {}", row.k, row.ell, row.a, row.s)?;
            }
        }
        Format::Csv => {
            writeln!(out, "k,l_k,a_k,s_k")?;
            for row in plan.rows() {
                writeln!(out, "{},{},{},{}", row.k, row.ell, row.a, row.s)?;
            }
        }
        Format::Jsonl => {
            for row in plan.rows() {
                writeln!(out, "{}", serde_json::to_string(&row).expect("row serializes"))?;
            }
        }
    }
    let cert = check_claim1(&plan);
    match cfg.format {
        Format::Csv => {}
        f => write_certificate(out, f, &cert)?,
    }
    Ok(Ok(if cert.failed_check() { EXIT_CERTIFICATE } else { EXIT_OK }))
}

pub fn cmd_codewords(cfg: &RunConfig, out: &mut dyn Write) -> IoOutcome {
    let seq = match cfg.sequence() {
        Ok(s) => s,
        Err(f) => return Ok(Err(f)),
    };
    let plan = match cfg.plan(&seq) {
        Ok(p) => p,
        Err(f) => return Ok(Err(f)),
    };
    if cfg.format == Format::Csv {
        writeln!(out, "k,i,word")?;
    }
    for item in codewords_iter(&plan, plan.k_max()) {
        let (idx, word) = match item {
            Ok(e) => e,
            Err(e) => return Ok(Err(Failure { code: EXIT_CERTIFICATE, message: e.to_string() })),
        };
        match cfg.format {
            Format::Text => writeln!(out, "{}", dump_line(idx, &word, cfg.annotate))?,
            Format::Csv => writeln!(out, "{}", dump_line(idx, &word, true))?,
            Format::Jsonl => writeln!(
                out,
                "{}",
                serde_json::json!({"k": idx.k, "i": idx.i, "word": word.to_string()})
            )?,
        }
    }
    Ok(Ok(EXIT_OK))
}

pub fn cmd_generate(cfg: &RunConfig, out: &mut dyn Write) -> IoOutcome {
    let prepared = cfg
        .sequence()
        .and_then(|seq| cfg.check_nmax(&seq).map(|n| (seq, n)))
        .and_then(|(seq, n)| cfg.plan(&seq).map(|p| (p, n)));
    let (plan, n) = match prepared {
        Ok(v) => v,
        Err(f) => return Ok(Err(f)),
    };
    let count = match count_exact(&plan, n) {
        Ok(c) => c,
        Err(e) => return Ok(Err(invalid(e.to_string()))),
    };
    if count > BigUint::from(cfg.cap) {
        return Ok(Err(invalid(format!(
            "|F ∩ 2^[{n}]| = {count} exceeds the cap {}; raise --cap or use `count` instead",
            cfg.cap
        ))));
    }
    let elements = match enumerate_up_to(&plan, n) {
        Ok(it) => it,
        Err(e) => return Ok(Err(invalid(e.to_string()))),
    };
    if cfg.format == Format::Csv {
        writeln!(out, "k,i,set")?;
    }
    for e in elements {
        match cfg.format {
            Format::Text if cfg.sets => writeln!(out, "{}", e.bits.to_set_string())?,
            Format::Text => writeln!(out, "{}", e.bits)?,
            Format::Jsonl => writeln!(out, "{}", e.to_json_line())?,
            Format::Csv => {
                let set: Vec<String> = e.bits.positions().map(|p| p.to_string()).collect();
                writeln!(out, "{},{},{}", e.block.k, e.block.i, set.join(" "))?
            }
        }
    }
    Ok(Ok(EXIT_OK))
}

pub fn cmd_count(cfg: &RunConfig, out: &mut dyn Write) -> IoOutcome {
    let prepared = cfg
        .sequence()
        .and_then(|seq| cfg.check_nmax(&seq).map(|n| (seq, n)))
        .and_then(|(seq, n)| cfg.plan(&seq).map(|p| (seq, p, n)));
    let (seq, plan, n_max) = match prepared {
        Ok(v) => v,
        Err(f) => return Ok(Err(f)),
    };
    if cfg.format != Format::Jsonl {
        writeln!(out, "n,count,f_n,lower_bound_2^(n-k)-1")?;
    }
    let mut code = EXIT_OK;
    for n in seq.n0()..=n_max {
        let count = match count_exact(&plan, n) {
            Ok(c) => c,
            Err(e) => return Ok(Err(invalid(e.to_string()))),
        };
        let f_n = match seq.value(n) {
            Ok(f) => f,
            Err(e) => return Ok(Err(invalid(e.to_string()))),
        };
        let bound = level_lower_bound(&plan, n).expect("plan covers n");
        if count < bound || bound < f_n {
            code = EXIT_CERTIFICATE;
        }
        match cfg.format {
            Format::Jsonl => writeln!(
                out,
                "{}",
                serde_json::json!({
                    "n": n, "count": count.to_string(), "f_n": f_n.to_string(),
                    "lower_bound": bound.to_string(),
                })
            )?,
            _ => writeln!(out, "{n},{count},{f_n},{bound}")?,
        }
    }
    Ok(Ok(code))
}

/// One set per line: a bit string, `{1,3,4}`, `1 3 4` / `1,3,4`, a JSON array,
/// or a JSON object with a `set` array. CSV rows `k,i,1 3 4` from `generate`
/// are accepted too.
pub fn parse_set_line(line: &str) -> Result<BitString, String> {
    let line = line.trim();
    if line.starts_with('{') && line.contains(':') {
        let v: serde_json::Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let arr = v.get("set").and_then(|s| s.as_array()).ok_or("missing `set` array")?;
        let items: Option<Vec<usize>> = arr.iter().map(|x| x.as_u64().map(|x| x as usize)).collect();
        return items.ok_or_else(|| "`set` must hold positive integers".into()).and_then(from_items);
    }
    if !line.is_empty() && line.chars().all(|c| c == '0' || c == '1') {
        return line.parse().map_err(|e| format!("{e}"));
    }
    let body = line.trim_matches(|c| matches!(c, '{' | '}' | '[' | ']'));
    let csv: Vec<&str> = body.split(',').collect();
    let is_csv_row = csv.len() == 3
        && !csv[0].contains(char::is_whitespace)
        && !csv[1].contains(char::is_whitespace)
        && !csv[2].starts_with(char::is_whitespace)
        && csv[2].contains(' ');
    // `k,i,1 3 4` rows come from `generate --format csv`
    let fields: Vec<&str> = if is_csv_row { vec![csv[2]] } else { vec![body] };
    let mut items = Vec::new();
    for tok in fields.iter().flat_map(|f| f.split(|c: char| c == ',' || c.is_whitespace())) {
        if tok.is_empty() {
            continue;
        }
        items.push(tok.parse::<usize>().map_err(|_| format!("bad element `{tok}`"))?);
    }
    from_items(items)
}

fn from_items(items: Vec<usize>) -> Result<BitString, String> {
    if items.contains(&0) {
        return Err("elements are positive integers".into());
    }
    if items.windows(2).any(|w| w[0] >= w[1]) {
        return Err("elements must be strictly increasing".into());
    }
    let len = items.last().copied().unwrap_or(0);
    Ok(BitString::from_positions(len, items))
}

fn read_lines(path: &Option<PathBuf>, input: &mut dyn BufRead) -> Result<Vec<String>, Failure> {
    let text = match path {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p)
            .map_err(|e| invalid(format!("{}: {e}", p.display())))?,
        _ => {
            let mut s = String::new();
            input
                .read_to_string(&mut s)
                .map_err(|e| invalid(format!("reading input: {e}")))?;
            s
        }
    };
    Ok(text.lines().map(str::to_owned).collect())
}

pub fn cmd_verify(cfg: &VerifyConfig, input: &mut dyn BufRead, out: &mut dyn Write) -> IoOutcome {
    let run = &cfg.run;
    if cfg.elements.is_some() {
        let lines = match read_lines(&cfg.elements, input) {
            Ok(l) => l,
            Err(f) => return Ok(Err(f)),
        };
        let mut sets = Vec::new();
        for (j, line) in lines.iter().enumerate() {
            if line.trim().is_empty() || line.trim() == "k,i,set" {
                continue;
            }
            match parse_set_line(line) {
                Ok(s) => sets.push(s),
                Err(e) => return Ok(Err(invalid(format!("line {}: {e}", j + 1)))),
            }
        }
        let cert = check_antichain(&sets);
        write_certificate(out, run.format, &cert)?;
        return Ok(Ok(if cert.failed_check() { EXIT_CERTIFICATE } else { EXIT_OK }));
    }
    let prepared = run
        .sequence()
        .and_then(|seq| run.check_nmax(&seq).map(|n| (seq, n)))
        .and_then(|(seq, n)| run.plan(&seq).map(|p| (seq, p, n)));
    let (seq, mut plan, n_max) = match prepared {
        Ok(v) => v,
        Err(f) => return Ok(Err(f)),
    };
    if let Some(k) = cfg.tamper_block {
        if k < plan.k0() || k > plan.k_max() {
            return Ok(Err(invalid(format!(
                "--tamper-block {k} is outside {}..={}",
                plan.k0(),
                plan.k_max()
            ))));
        }
        plan = plan.with_block_size(k, plan.block_size(k) + 1);
    }
    let bundle: Bundle = run_all(&plan, seq.as_ref(), n_max, run.cap.min(1 << 16));
    for cert in &bundle.certificates {
        write_certificate(out, run.format, cert)?;
    }
    Ok(Ok(if bundle.all_passed() { EXIT_OK } else { EXIT_CERTIFICATE }))
}

pub fn cmd_decode(cfg: &DecodeConfig, input: &mut dyn BufRead, out: &mut dyn Write) -> IoOutcome {
    let lines = match read_lines(&cfg.input, input) {
        Ok(l) => l,
        Err(f) => return Ok(Err(f)),
    };
    let parsed: Vec<Result<BitString, String>> = lines.iter().map(|l| parse_set_line(l)).collect();
    let seq = match cfg.run.sequence() {
        Ok(s) => s,
        Err(f) => return Ok(Err(f)),
    };
    // every block that could contain one of the sets must be planned
    let top = parsed
        .iter()
        .filter_map(|p| p.as_ref().ok()?.max_position())
        .max()
        .unwrap_or(0) as u32;
    let plan = match plan_for_levels(seq.as_ref(), top.max(seq.n0()), PlanOptions::default()) {
        Ok(p) => p,
        Err(e) => return Ok(Err(invalid(e.to_string()))),
    };
    let mut malformed = 0;
    for (line, result) in lines.iter().zip(parsed) {
        match result {
            Ok(set) => match decode(&plan, &set) {
                Some(idx) => writeln!(out, "{idx}")?,
                None => writeln!(out, "not a member")?,
            },
            Err(e) => {
                malformed += 1;
                writeln!(out, "error: {e} in `{}`", line.trim())?;
            }
        }
    }
    Ok(Ok(if malformed > 0 { EXIT_DECODE } else { EXIT_OK }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_line_formats() {
        let want = "{1,3,4}";
        for line in ["1 3 4", "1,3,4", "{1,3,4}", "[1, 3, 4]", "1011", r#"{"k":3,"i":1,"set":[1,3,4]}"#, "3,1,1 3 4"] {
            assert_eq!(parse_set_line(line).unwrap().to_set_string(), want, "{line}");
        }
        assert_eq!(parse_set_line("").unwrap().to_set_string(), "{}");
        assert!(parse_set_line("3 1").is_err());
        assert!(parse_set_line("0 1").is_err());
        assert!(parse_set_line("a").is_err());
    }

    #[test]
    fn family_selection() {
        let cfg = |args: &[&str]| {
            let argv = ["antichain", "count"].iter().chain(args);
            match Cli::try_parse_from(argv).unwrap().command {
                Command::Count(c) => c,
                _ => unreachable!(),
            }
        };
        assert!(matches!(cfg(&[]).family_spec(), Ok(FamilySpec::Constant { n0: 3 })));
        assert!(matches!(
            cfg(&["--family", "corollary", "--eps", "0.5"]).family_spec(),
            Ok(FamilySpec::Corollary { n_min: 4, .. })
        ));
        assert!(cfg(&["--family", "table"]).family_spec().is_err());
    }
}

//! `tandem`: run, fuzz, and price redundant contract execution.
//!
//! Exit codes: 0 success/consistent, 1 usage or setup error, 2 the
//! scenario diverged, 3 fuzzing found at least one divergent case.

mod schema;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use schema::{ScenarioFile, TargetFile};
use tandem_core::checks::{decode_abstract, encode_abstract, AbstractArgument, EnvKind};
use tandem_core::difffuzz::{
    fuzz, replay_standalone_with, run_scenario_with, GenConfig, RunOptions, RunReport, TxRecord,
    Verdict,
};
use tandem_core::gasmeter::{canonical_auction_scenario, gas_to_currency, measure};
use tandem_core::hash::selector;

#[derive(Parser)]
#[command(name = "tandem", version, about = "Deterministic N-version contract execution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario file and report every transaction.
    Run(RunArgs),
    /// Generate random scenarios and hunt for divergences.
    Fuzz(FuzzArgs),
    /// Compare proxied gas against standalone execution per operation.
    GasReport(GasReportArgs),
    /// Encode a check (selector plus abstract arguments) to wire bytes.
    EncodeCheck(EncodeCheckArgs),
    /// Decode wire bytes back into a readable check.
    DecodeCheck(DecodeCheckArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario JSON file.
    scenario: PathBuf,
    /// Print the state digest around every transaction.
    #[arg(long)]
    digests: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    /// Random bid traffic.
    Auction,
    /// Bid traffic closed by a finalize.
    Settlement,
    /// Random transfer/approve/transferFrom traffic.
    Token,
}

#[derive(Args)]
struct FuzzArgs {
    /// Scenario family to generate.
    #[arg(long, value_enum, default_value_t = FamilyArg::Auction)]
    family: FamilyArg,
    /// Number of scenarios.
    #[arg(long, default_value_t = 1_000)]
    cases: usize,
    /// Base seed; case i uses seed+i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Implementations to run behind the proxy.
    #[arg(long, value_delimiter = ',', default_value = "auction_a,auction_b")]
    implementations: Vec<String>,
}

#[derive(Args)]
struct GasReportArgs {
    /// Auction scenario JSON file; defaults to the canonical two-bid
    /// auction with settlement.
    scenario: Option<PathBuf>,
    /// Implementations (ignored when the scenario file names its own).
    #[arg(long, value_delimiter = ',', default_value = "auction_a,auction_b")]
    implementations: Vec<String>,
    /// Gas price in nano native-token units, for the cost column.
    #[arg(long, default_value_t = 30.0)]
    gas_price_nano: f64,
    /// Native token price in your currency; enables the cost column.
    #[arg(long)]
    token_price: Option<f64>,
}

#[derive(Args)]
struct EncodeCheckArgs {
    /// Function signature ("balanceOf(address)") or 0x-prefixed selector.
    #[arg(long)]
    selector: String,
    /// Abstract argument, repeatable: static:0x<hex>, calldata:<offset>:<length>,
    /// or env:<sender|value|timestamp|block_number>.
    #[arg(long = "arg")]
    args: Vec<String>,
}

#[derive(Args)]
struct DecodeCheckArgs {
    /// 0x-prefixed wire bytes.
    encoded: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Fuzz(args) => cmd_fuzz(args),
        Command::GasReport(args) => cmd_gas_report(args),
        Command::EncodeCheck(args) => cmd_encode_check(args).map(|()| ExitCode::SUCCESS),
        Command::DecodeCheck(args) => cmd_decode_check(args).map(|()| ExitCode::SUCCESS),
    };
    match outcome {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::FAILURE
        }
    }
}

fn print_record(record: &TxRecord, label: &str, description: &str, digests: bool) {
    let status = if record.ok {
        if record.ret_data.is_empty() {
            "ok".to_string()
        } else {
            format!("ok ret=0x{}", hex::encode(&record.ret_data))
        }
    } else {
        format!("REVERT {:?}", String::from_utf8_lossy(&record.ret_data))
    };
    println!("{label} ({description}): {status} gas={}", record.gas_used);
    if digests {
        if let (Some(before), Some(after)) = (record.digest_before, record.digest_after) {
            println!("    digest {before} -> {after}");
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let file = ScenarioFile::load(&args.scenario)?;
    let scenario = file.to_scenario();
    let impls: Vec<&str> = file.implementations.iter().map(String::as_str).collect();
    let options = RunOptions { record_digests: args.digests, probe: None };
    let report: RunReport = match file.target {
        TargetFile::Proxied => {
            println!("implementations: {} (proxied)", file.implementations.join(", "));
            run_scenario_with(&scenario, &impls, options)?
        }
        TargetFile::Standalone { index } => {
            println!("implementation: {} (standalone)", file.implementations[index]);
            replay_standalone_with(&scenario, &impls, index, options)?
        }
    };

    for (i, record) in report.fixtures.iter().enumerate() {
        print_record(record, &format!("fixture {i}"), "setup", false);
    }
    for record in &report.records {
        let description = file.txs[record.step_index].describe();
        print_record(record, &format!("tx {}", record.step_index), &description, args.digests);
    }
    println!("final state digest: {}", report.final_digest);

    match report.verdict {
        Verdict::Consistent => {
            println!("verdict: consistent");
            Ok(ExitCode::SUCCESS)
        }
        Verdict::Divergent { tx_index, kind, .. } => {
            println!("verdict: divergent at tx {tx_index} ({kind} mismatch)");
            Ok(ExitCode::from(2))
        }
    }
}

fn cmd_fuzz(args: FuzzArgs) -> Result<ExitCode> {
    let config = match args.family {
        FamilyArg::Auction => GenConfig::auction_bids(false),
        FamilyArg::Settlement => GenConfig::auction_bids(true),
        FamilyArg::Token => GenConfig::token(),
    };
    let impls: Vec<&str> = args.implementations.iter().map(String::as_str).collect();
    let report = fuzz(&impls, args.cases, args.seed, &config)?;

    for finding in &report.findings {
        if let Verdict::Divergent { tx_index, kind, .. } = &finding.verdict {
            println!(
                "seed {:#x}: divergent at tx {tx_index} ({kind} mismatch), shrunk to {} steps",
                finding.seed,
                finding.shrunk.txs.len()
            );
        }
    }
    println!("{} of {} cases diverged", report.findings.len(), report.cases);

    if let Some(first) = report.findings.first() {
        if let Verdict::Divergent { kind, message, .. } = &first.shrunk_verdict {
            println!();
            println!(
                "Falsifying example ({kind} mismatch, {:?}):",
                String::from_utf8_lossy(message)
            );
            let file = ScenarioFile::from_scenario(&first.shrunk, &args.implementations);
            println!("{}", serde_json::to_string_pretty(&file)?);
        }
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_gas_report(args: GasReportArgs) -> Result<ExitCode> {
    let (scenario, implementations) = match &args.scenario {
        Some(path) => {
            let file = ScenarioFile::load(path)?;
            if file.target != TargetFile::Proxied {
                bail!("gas reports compare against the proxied target");
            }
            (file.to_scenario(), file.implementations)
        }
        None => (canonical_auction_scenario(), args.implementations.clone()),
    };
    let impls: Vec<&str> = implementations.iter().map(String::as_str).collect();
    let table = measure(&scenario, &impls)?;

    println!("implementations: {}", implementations.join(", "));
    let mut header = format!("{:<16}{:>12}{:>14}{:>10}", "operation", "proxied", "standalone", "overhead");
    for name in &table.implementations {
        header.push_str(&format!("{name:>12}"));
    }
    if args.token_price.is_some() {
        header.push_str(&format!("{:>12}", "cost"));
    }
    println!("{header}");
    for row in &table.rows {
        let mut line = format!(
            "{:<16}{:>12}{:>14}{:>9.1}%",
            row.label.to_string(),
            row.proxied_gas,
            row.standalone_total(),
            100.0 * row.overhead_fraction()
        );
        for gas in &row.standalone_gas {
            line.push_str(&format!("{gas:>12}"));
        }
        if let Some(price) = args.token_price {
            let cost = gas_to_currency(row.proxied_gas, args.gas_price_nano, price);
            line.push_str(&format!("{cost:>12.6}"));
        }
        println!("{line}");
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_selector(input: &str) -> Result<[u8; 4]> {
    if let Some(stripped) = input.strip_prefix("0x") {
        let bytes = hex::decode(stripped).context("selector hex")?;
        let sel: [u8; 4] = bytes
            .as_slice()
            .try_into()
            .map_err(|_| anyhow!("selector must be exactly 4 bytes"))?;
        return Ok(sel);
    }
    Ok(selector(input))
}

fn parse_argument(input: &str) -> Result<AbstractArgument> {
    let parts: Vec<&str> = input.split(':').collect();
    match parts.as_slice() {
        ["static", hex_value] => {
            let raw = hex_value.strip_prefix("0x").unwrap_or(hex_value);
            Ok(AbstractArgument::Static(hex::decode(raw).context("static hex")?))
        }
        ["calldata", offset, length] => Ok(AbstractArgument::CallData {
            offset: offset.parse().context("calldata offset")?,
            length: length.parse().context("calldata length")?,
        }),
        ["env", kind] => {
            let kind = match *kind {
                "sender" => EnvKind::Sender,
                "value" => EnvKind::Value,
                "timestamp" => EnvKind::Timestamp,
                "block_number" => EnvKind::BlockNumber,
                other => bail!("unknown env kind {other:?}"),
            };
            Ok(AbstractArgument::Env(kind))
        }
        _ => bail!("unparseable argument {input:?}; see --help for the formats"),
    }
}

fn cmd_encode_check(args: EncodeCheckArgs) -> Result<()> {
    let sel = parse_selector(&args.selector)?;
    let arguments = args
        .args
        .iter()
        .map(|a| parse_argument(a))
        .collect::<Result<Vec<_>>>()?;
    let encoded = encode_abstract(sel, &arguments).map_err(|e| anyhow!("{e}"))?;
    println!("0x{}", hex::encode(encoded));
    Ok(())
}

fn cmd_decode_check(args: DecodeCheckArgs) -> Result<()> {
    let raw = args.encoded.strip_prefix("0x").unwrap_or(&args.encoded);
    let bytes = hex::decode(raw).context("wire hex")?;
    let (sel, arguments) = decode_abstract(&bytes).map_err(|e| anyhow!("{e}"))?;
    println!("selector: 0x{}", hex::encode(sel));
    for (i, argument) in arguments.iter().enumerate() {
        let rendered = match argument {
            AbstractArgument::Static(bytes) => format!("static 0x{}", hex::encode(bytes)),
            AbstractArgument::CallData { offset, length } => {
                format!("calldata[{}..{}]", offset, *offset as usize + *length as usize)
            }
            AbstractArgument::Env(kind) => format!(
                "env {}",
                match kind {
                    EnvKind::Sender => "sender",
                    EnvKind::Value => "value",
                    EnvKind::Timestamp => "timestamp",
                    EnvKind::BlockNumber => "block_number",
                }
            ),
        };
        println!("arg {i}: {rendered}");
    }
    Ok(())
}

//! File-based notary / seller / buyer workflow.
//!
//! Exit codes: 0 success or ACCEPT, 2 REJECT or invalid certificate, 1 usage
//! or structural error. Diagnostics go to stderr; results to stdout.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use wibson_tree::certificate::{self, Certificate, Validity, Verdict};
use wibson_tree::predicates::{CriterionSchema, PredicateSpec};
use wibson_tree::{
    commit, derive_keys, open, verify, CommitmentTree, Digest, InputWord, Qrobdd, Seed, Witness,
};

const EXIT_REJECT: u8 = 2;

const PREDICATE_HELP: &str = "\
Predicate documents (JSON, field \"type\" selects the family):
  ageInRange          {\"width\", \"age\"}                 criterion: minAge, maxAge
  bankBalanceAtLeast  {\"width\", \"balance\"}             criterion: minBalance
  visitedAnySite      {\"slots\", \"id_bits\", \"sites\"}    criterion: site0..siteK (ids or domain names)
  houseInPoly         {\"slots\", \"coord_bits\", \"lat\", \"lon\"}
                                                     criterion: cellK.depth, cellK.prefix
  dfa                 {\"n\", \"initial\", \"transitions\", \"accept\"}   criterion: input
  wildcardSet         {\"n\", \"patterns\"}                criterion: input

Secrets are never taken from the command line: seeds come from --seed-file or
WT_SEED_FILE, notary keys from --notary-key-file or WT_NOTARY_KEY_FILE.";

#[derive(Parser)]
#[command(name = "wibson-tree", version, about = "Commit to predicates and open single evaluations", after_help = PREDICATE_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a predicate document into a WTD1 diagram and a schema.
    Compile {
        #[arg(long)]
        predicate: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        schema_out: PathBuf,
    },
    /// Print a fresh random 32-byte secret (seed or notary key) as hex.
    Keygen,
    /// Print the notary public key for a notary secret key.
    Pubkey {
        #[arg(long, env = "WT_NOTARY_KEY_FILE")]
        notary_key_file: PathBuf,
    },
    /// Commit to a diagram; writes WTC-TREE1 and prints the root hash.
    Commit {
        #[arg(long)]
        diagram: PathBuf,
        #[arg(long, env = "WT_SEED_FILE")]
        seed_file: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sign a root for a schema and subject; writes a WTC1 certificate.
    Notarize {
        #[arg(long)]
        root: String,
        #[arg(long)]
        schema: PathBuf,
        /// 32-byte pseudonymous subject id, hex.
        #[arg(long)]
        subject: String,
        #[arg(long)]
        valid_from: u64,
        #[arg(long)]
        valid_to: u64,
        #[arg(long, env = "WT_NOTARY_KEY_FILE")]
        notary_key_file: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Open a committed diagram at one criterion; writes a WTW1 witness.
    Open {
        #[arg(long)]
        diagram: PathBuf,
        #[arg(long)]
        tree: PathBuf,
        #[arg(long, env = "WT_SEED_FILE")]
        seed_file: PathBuf,
        #[command(flatten)]
        criterion: CriterionArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify a witness against a root; prints ACCEPT <payload-hex> or REJECT.
    Verify {
        #[arg(long)]
        root: String,
        #[command(flatten)]
        criterion: CriterionArgs,
        #[arg(long)]
        witness: PathBuf,
        /// Optional notary certificate that must cover the root.
        #[arg(long, requires = "notary_pubkey")]
        cert: Option<PathBuf>,
        #[arg(long)]
        notary_pubkey: Option<String>,
        /// Check time in seconds since the epoch; defaults to now.
        #[arg(long)]
        now: Option<u64>,
    },
}

#[derive(Args)]
struct CriterionArgs {
    /// Criterion bits, packed MSB-first, as hex.
    #[arg(long, conflicts_with = "x_json")]
    x: Option<String>,
    /// Criterion as a JSON object of schema field values.
    #[arg(long, requires = "schema")]
    x_json: Option<String>,
    #[arg(long)]
    schema: Option<PathBuf>,
}

impl CriterionArgs {
    fn schema(&self) -> Result<Option<CriterionSchema>> {
        self.schema
            .as_deref()
            .map(|p| Ok(CriterionSchema::from_json(&read_string(p)?)?))
            .transpose()
    }

    fn input(&self, n: usize) -> Result<InputWord> {
        let x = match (&self.x, &self.x_json) {
            (Some(h), None) => {
                let bytes = hex::decode(h.trim()).context("criterion hex")?;
                InputWord::from_bytes(bytes, n)?
            }
            (None, Some(j)) => {
                let schema = self.schema()?.expect("clap enforces --schema");
                let values: serde_json::Value =
                    serde_json::from_str(j).context("criterion JSON")?;
                schema.pack(&values)?
            }
            _ => bail!("give the criterion with --x or --x-json"),
        };
        if x.len() != n {
            bail!("criterion has {} bits, expected {n}", x.len());
        }
        Ok(x)
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn read_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn read_seed(path: &Path) -> Result<Seed> {
    Seed::from_hex(&read_string(path)?).context("seed file")
}

fn parse_digest(s: &str, what: &str) -> Result<Digest> {
    Digest::from_hex(s).with_context(|| format!("{what} must be 32 bytes of hex"))
}

fn load_tree(diagram: &Path, tree: &Path) -> Result<CommitmentTree> {
    let q = Qrobdd::decode(&read(diagram)?).context("diagram file")?;
    CommitmentTree::decode(&read(tree)?, q).context("tree file")
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Compile {
            predicate,
            out,
            schema_out,
        } => {
            let spec = PredicateSpec::from_json(&read_string(&predicate)?)?;
            let (q, schema) = spec.compile()?;
            write(&out, &q.encode()?)?;
            write(&schema_out, format!("{}\n", schema.to_json()).as_bytes())?;
            println!("{}", schema.schema_id());
        }
        Command::Keygen => {
            println!("{}", hex::encode(Seed::generate().expose()));
        }
        Command::Pubkey { notary_key_file } => {
            let sk = certificate::signing_key_from_hex(&read_string(&notary_key_file)?)?;
            println!("{}", hex::encode(sk.verifying_key().to_bytes()));
        }
        Command::Commit {
            diagram,
            seed_file,
            out,
        } => {
            let q = Qrobdd::decode(&read(&diagram)?).context("diagram file")?;
            let keys = derive_keys(&read_seed(&seed_file)?, q.n());
            let tree = commit(&q, &keys)?;
            write(&out, &tree.encode())?;
            println!("{}", tree.root_hash());
        }
        Command::Notarize {
            root,
            schema,
            subject,
            valid_from,
            valid_to,
            notary_key_file,
            out,
        } => {
            let root = parse_digest(&root, "root")?;
            let schema = CriterionSchema::from_json(&read_string(&schema)?)?;
            let subject = parse_digest(&subject, "subject")?;
            let sk = certificate::signing_key_from_hex(&read_string(&notary_key_file)?)?;
            let cert = certificate::issue(
                root,
                schema.schema_id(),
                subject.0,
                Validity::new(valid_from, valid_to)?,
                &sk,
            )?;
            write(&out, &cert.encode())?;
            println!("{}", hex::encode(&cert.signature));
        }
        Command::Open {
            diagram,
            tree,
            seed_file,
            criterion,
            out,
        } => {
            let tree = load_tree(&diagram, &tree)?;
            let n = tree.diagram().n();
            let keys = derive_keys(&read_seed(&seed_file)?, n);
            let x = criterion.input(n)?;
            let w = open(&tree, &keys, &x)?;
            write(&out, &w.encode())?;
            println!("{}", hex::encode(w.payload()));
        }
        Command::Verify {
            root,
            criterion,
            witness,
            cert,
            notary_pubkey,
            now,
        } => {
            let root = parse_digest(&root, "root")?;
            let bytes = read(&witness)?;
            let w = match Witness::decode(&bytes) {
                Ok(w) => w,
                Err(e) => {
                    eprintln!("witness rejected: {e}");
                    return Ok(reject());
                }
            };
            let x = criterion.input(w.n())?;

            if let (Some(cert_path), Some(pk)) = (cert, notary_pubkey) {
                let pk = certificate::verifying_key_from_hex(&pk)?;
                let cert = match Certificate::decode(&read(&cert_path)?) {
                    Ok(c) => c,
                    Err(e) => {
                        eprintln!("certificate rejected: {e}");
                        return Ok(reject());
                    }
                };
                let now = match now {
                    Some(t) => t,
                    None => SystemTime::now().duration_since(UNIX_EPOCH)?.as_secs(),
                };
                let verdict = certificate::check(&cert, &pk, now);
                if verdict != Verdict::Valid {
                    eprintln!("certificate {}", verdict.as_str());
                    return Ok(reject());
                }
                if cert.root_hash != root {
                    eprintln!("certificate covers a different root");
                    return Ok(reject());
                }
                if let Some(schema) = criterion.schema()? {
                    if schema.schema_id() != cert.schema_id {
                        eprintln!("certificate covers a different schema");
                        return Ok(reject());
                    }
                }
            }

            match verify(&root, &x, &w) {
                Ok(payload) => println!("ACCEPT {}", hex::encode(payload)),
                Err(wibson_tree::VerifyError::Rejected) => return Ok(reject()),
                Err(wibson_tree::VerifyError::Structural(e)) => return Err(e.into()),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn reject() -> ExitCode {
    println!("REJECT");
    ExitCode::from(EXIT_REJECT)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

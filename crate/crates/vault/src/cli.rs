//! The `vault` command line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ahee_core::ahee::{
    deserialize_ct, deserialize_ctx, deserialize_key, keygen, serialize_ctx, serialize_key, KeySet, DEFAULT_BITS_P,
    DEFAULT_BITS_Q,
};
use ahee_core::oracle::{exhaustive_check, Category, OracleReport};
use ahee_core::BigUint;
use chrono::Utc;
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::error::VaultError;
use crate::http_client::{self, HttpStore};
use crate::manifest::{Manifest, ManifestStore};
use crate::outer::{layer_by_id, Identity};
use crate::vault::{open_blob, seal, vault_get, vault_get_blocks, vault_hmul, vault_put};
use crate::wire::object_id_of;

#[derive(Debug, Parser)]
#[command(name = "vault", version, about = "Client-side AHEE encryption and vault storage")]
pub struct Cli {
    /// Directory holding object manifests.
    #[arg(long, global = true, env = "AHEE_VAULT_DIR", default_value = ".ahee-vault")]
    pub vault_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ServerArgs {
    #[arg(long, env = "AHEE_SERVER", default_value = "http://127.0.0.1:8700")]
    pub server: String,
    #[arg(long, env = "AHEE_USER")]
    pub user: String,
    #[arg(long, env = "AHEE_PASS", hide_env_values = true)]
    pub pass: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a key file.
    Keygen {
        #[arg(long, default_value_t = DEFAULT_BITS_P)]
        bits_p: u64,
        #[arg(long, default_value_t = DEFAULT_BITS_Q)]
        bits_q: u64,
        #[arg(long)]
        out: PathBuf,
        /// Hex seed for reproducible generation.
        #[arg(long)]
        seed: Option<String>,
    },
    /// Encrypt a local file to FILE.ct (with a FILE.ct.json manifest beside it).
    Encrypt {
        #[arg(long)]
        key: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<String>,
    },
    /// Decrypt a local ciphertext file.
    Decrypt {
        #[arg(long)]
        key: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// First ciphertext component as printed by `encrypt`; checked if given.
        #[arg(long)]
        key1: Option<String>,
        /// Second ciphertext component as printed by `encrypt`; checked if given.
        #[arg(long)]
        key2: Option<String>,
    },
    /// Create an account on the storage service.
    Register {
        #[command(flatten)]
        server: ServerArgs,
    },
    /// Encrypt a file and upload it.
    Put {
        #[command(flatten)]
        server: ServerArgs,
        #[arg(long)]
        key: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        label: Option<String>,
        /// Outer layer: identity or xor-keystream.
        #[arg(long, default_value = Identity::ID)]
        layer: String,
        #[arg(long)]
        seed: Option<String>,
    },
    /// Download and decrypt an object.
    Get {
        #[command(flatten)]
        server: ServerArgs,
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        id: String,
        /// Output file; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print decrypted block values, one decimal per line, instead of bytes.
        #[arg(long)]
        blocks: bool,
    },
    /// List locally known objects.
    List,
    /// Ask the server to multiply two objects blockwise.
    Hmul {
        #[command(flatten)]
        server: ServerArgs,
        /// Evaluation context file from `ctx export`.
        #[arg(long)]
        ctx: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Evaluation context files.
    Ctx {
        #[command(subcommand)]
        command: CtxCommand,
    },
    /// Exhaustively check the scheme against reference arithmetic for a small key.
    Oracle {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        g: u64,
        #[arg(long)]
        x: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum CtxCommand {
    /// Write the modulus and fingerprint (no secret exponent) for server-side compute.
    Export {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("oracle found {0} failures")]
    OracleFailed(usize),
    #[error(transparent)]
    Vault(#[from] VaultError),
}

impl From<ahee_core::Error> for CliError {
    fn from(e: ahee_core::Error) -> Self {
        CliError::Vault(e.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Vault(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::OracleFailed(_) => 3,
            CliError::Vault(e) => e.exit_code(),
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn rng_from(seed: Option<&str>) -> CliResult<ChaCha20Rng> {
    match seed {
        None => Ok(ChaCha20Rng::from_entropy()),
        Some(s) => {
            let bytes = hex::decode(s).map_err(|e| CliError::Usage(format!("--seed: {e}")))?;
            Ok(ChaCha20Rng::from_seed(Sha256::digest(bytes).into()))
        }
    }
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::Vault(VaultError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))))
}

fn load_key(path: &Path) -> CliResult<KeySet> {
    Ok(deserialize_key(&read(path)?)?)
}

fn write_private(path: &Path, bytes: &[u8]) -> CliResult {
    let mut opts = fs::OpenOptions::new();
    opts.write(true).create(true).truncate(true);
    #[cfg(unix)]
    {
        use std::os::unix::fs::OpenOptionsExt;
        opts.mode(0o600);
    }
    opts.open(path)?.write_all(bytes)?;
    Ok(())
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn parse_decimal(flag: &str, s: &str) -> CliResult<BigUint> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{flag}: expected a decimal integer, got {s:?}")))
}

fn login(s: &ServerArgs) -> CliResult<HttpStore> {
    Ok(HttpStore::login(&s.server, &s.user, &s.pass)?)
}

pub fn report_json(r: &OracleReport) -> serde_json::Value {
    let per_category: serde_json::Map<_, _> =
        Category::ALL.iter().map(|c| (c.name().to_owned(), r.count(*c).into())).collect();
    let failures: Vec<_> = r
        .failures
        .iter()
        .map(|f| {
            serde_json::json!({
                "category": f.category.name(),
                "inputs": f.inputs,
                "expected": f.expected,
                "actual": f.actual,
            })
        })
        .collect();
    serde_json::json!({
        "params": { "p": r.params.p, "q": r.params.q, "g": r.params.g, "x": r.params.x },
        "checks_run": r.checks_run,
        "per_category": per_category,
        "failures": failures,
        "passed": r.passed(),
    })
}

/// Executes one command, writing user-facing output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult {
    match cli.command {
        Command::Keygen { bits_p, bits_q, out: path, seed } => {
            let mut rng = rng_from(seed.as_deref())?;
            let key = keygen(bits_p, bits_q, &mut rng).map_err(|e| match e {
                ahee_core::Error::Parameter(m) => CliError::Usage(m),
                e => e.into(),
            })?;
            write_private(&path, &serialize_key(&key))?;
            writeln!(out, "wrote {} (p: {} bits, q: {} bits)", path.display(), key.bits_p(), key.bits_q())?;
            writeln!(out, "fingerprint {}", key.fingerprint())?;
        }
        Command::Encrypt { key, input, out: path, seed } => {
            let key = load_key(&key)?;
            let data = read(&input)?;
            let (stream, cts, blob) = seal(&data, &key, &mut rng_from(seed.as_deref())?)?;
            let manifest = Manifest {
                object_id: object_id_of(&blob),
                byte_len: stream.byte_len,
                block_bytes: stream.block_bytes,
                fingerprint: key.fingerprint().to_hex(),
                outer_layer: Identity::ID.into(),
                created_at: Utc::now(),
                label: input.display().to_string(),
            };
            fs::write(&path, &blob)?;
            fs::write(sidecar(&path), serde_json::to_vec_pretty(&manifest).expect("manifest serializes"))?;
            match cts.first() {
                Some(c) => {
                    writeln!(out, "key 1: {}", c.a)?;
                    writeln!(out, "key 2: {}", c.b)?;
                }
                None => writeln!(out, "empty input, no ciphertext pairs")?,
            }
            writeln!(out, "wrote {} ({} blocks)", path.display(), cts.len())?;
        }
        Command::Decrypt { key, input, out: path, key1, key2 } => {
            let key = load_key(&key)?;
            let blob = read(&input)?;
            let meta = sidecar(&input);
            let manifest: Manifest = serde_json::from_slice(&read(&meta)?).map_err(|e| {
                VaultError::ManifestCorrupt { path: meta.display().to_string(), reason: e.to_string() }
            })?;
            if manifest.fingerprint != key.fingerprint().to_hex() {
                return Err(VaultError::KeyMismatch.into());
            }
            if object_id_of(&blob) != manifest.object_id {
                return Err(VaultError::Integrity("ciphertext file does not match its manifest".into()).into());
            }
            if key1.is_some() || key2.is_some() {
                let parsed = deserialize_ct(&blob)?;
                let first = parsed
                    .pairs
                    .first()
                    .ok_or_else(|| VaultError::Integrity("ciphertext holds no pairs".into()))?;
                if let Some(k) = key1 {
                    if parse_decimal("--key1", &k)? != first.a {
                        return Err(VaultError::Integrity("key 1 does not match the ciphertext".into()).into());
                    }
                }
                if let Some(k) = key2 {
                    if parse_decimal("--key2", &k)? != first.b {
                        return Err(VaultError::Integrity("key 2 does not match the ciphertext".into()).into());
                    }
                }
            }
            let data = open_blob(&blob, &manifest, &key)?;
            fs::write(&path, &data)?;
            writeln!(out, "wrote {} ({} bytes)", path.display(), data.len())?;
        }
        Command::Register { server } => {
            let r = http_client::register(&server.server, &server.user, &server.pass)?;
            writeln!(out, "registered {} at {}", r.username, r.created_at)?;
        }
        Command::Put { server, key, input, label, layer, seed } => {
            let key = load_key(&key)?;
            let layer = layer_by_id(&layer, &key).map_err(|e| CliError::Usage(e.to_string()))?;
            let data = read(&input)?;
            let mut rng = rng_from(seed.as_deref())?;
            let manifests = ManifestStore::open(&cli.vault_dir)?;
            let store = login(&server)?;
            let label = label.unwrap_or_else(|| {
                input.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
            });
            let m = vault_put(&data, &key, layer.as_ref(), &store, &manifests, &label, &mut rng)?;
            writeln!(out, "{}", m.object_id)?;
        }
        Command::Get { server, key, id, out: path, blocks } => {
            let key = load_key(&key)?;
            let manifests = ManifestStore::open(&cli.vault_dir)?;
            let m = manifests.load(&id)?;
            let layer = layer_by_id(&m.outer_layer, &key)?;
            let store = login(&server)?;
            let bytes = if blocks {
                let values = vault_get_blocks(&m, &key, layer.as_ref(), &store)?;
                values.iter().map(|v| format!("{v}\n")).collect::<String>().into_bytes()
            } else {
                vault_get(&m, &key, layer.as_ref(), &store)?
            };
            match path {
                Some(p) => {
                    fs::write(&p, &bytes)?;
                    writeln!(out, "wrote {} ({} bytes)", p.display(), bytes.len())?;
                }
                None => out.write_all(&bytes)?,
            }
        }
        Command::List => {
            let manifests = ManifestStore::open(&cli.vault_dir)?;
            for m in manifests.list()? {
                writeln!(
                    out,
                    "{}  {:>10}  {:<13}  {}  {}",
                    m.object_id,
                    m.byte_len,
                    m.outer_layer,
                    m.created_at.format("%Y-%m-%dT%H:%M:%SZ"),
                    m.label
                )?;
            }
        }
        Command::Hmul { server, ctx, a, b } => {
            let ctx = deserialize_ctx(&read(&ctx)?)?;
            let manifests = ManifestStore::open(&cli.vault_dir)?;
            let (ma, mb) = (manifests.load(&a)?, manifests.load(&b)?);
            let store = login(&server)?;
            let m = vault_hmul(&ma, &mb, &ctx, &store, &manifests)?;
            writeln!(out, "{}", m.object_id)?;
        }
        Command::Ctx { command: CtxCommand::Export { key, out: path } } => {
            let key = load_key(&key)?;
            fs::write(&path, serialize_ctx(&key.eval_context()))?;
            writeln!(out, "wrote {}", path.display())?;
        }
        Command::Oracle { p, q, g, x, json } => {
            let report = exhaustive_check(p, q, g, x).map_err(|e| CliError::Usage(e.to_string()))?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report_json(&report)).expect("json serializes"))?;
            } else {
                writeln!(out, "{report}")?;
            }
            if !report.passed() {
                return Err(CliError::OracleFailed(report.failures.len()));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn bad_seed_is_usage_error() {
        let err = rng_from(Some("zz")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(rng_from(Some("00ff")).is_ok());
    }

    #[test]
    fn oracle_json_shape() {
        let cli = Cli::parse_from(["vault", "oracle", "--p", "7", "--q", "11", "--g", "3", "--x", "4", "--json"]);
        let mut out = Vec::new();
        run(cli, &mut out).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
        assert_eq!(v["passed"], true);
        assert_eq!(v["per_category"]["round-trip"], 350);
    }

    #[test]
    fn oracle_bad_params_exit_2() {
        let cli = Cli::parse_from(["vault", "oracle", "--p", "8", "--q", "11", "--g", "3", "--x", "4"]);
        assert_eq!(run(cli, &mut Vec::new()).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn local_encrypt_decrypt() {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path();
        let p = |n: &str| d.join(n).to_string_lossy().into_owned();
        let go = |args: &[&str]| {
            let mut out = Vec::new();
            let r = run(Cli::parse_from(args), &mut out);
            (r, String::from_utf8(out).unwrap())
        };
        go(&["vault", "keygen", "--bits-p", "32", "--bits-q", "32", "--out", &p("k"), "--seed", "01"]).0.unwrap();
        fs::write(d.join("msg"), b"the quick brown fox").unwrap();
        let (r, text) = go(&["vault", "encrypt", "--key", &p("k"), "--in", &p("msg"), "--out", &p("msg.ct")]);
        r.unwrap();
        let k1 = text.lines().find_map(|l| l.strip_prefix("key 1: ")).unwrap().to_owned();
        let k2 = text.lines().find_map(|l| l.strip_prefix("key 2: ")).unwrap().to_owned();
        go(&["vault", "decrypt", "--key", &p("k"), "--in", &p("msg.ct"), "--out", &p("back"), "--key1", &k1, "--key2", &k2])
            .0
            .unwrap();
        assert_eq!(fs::read(d.join("back")).unwrap(), b"the quick brown fox");

        let wrong = format!("{}", parse_decimal("", &k1).unwrap() + 1u32);
        let err = go(&["vault", "decrypt", "--key", &p("k"), "--in", &p("msg.ct"), "--out", &p("x"), "--key1", &wrong]).0;
        assert_eq!(err.unwrap_err().exit_code(), 3);

        go(&["vault", "keygen", "--bits-p", "32", "--bits-q", "32", "--out", &p("k2"), "--seed", "02"]).0.unwrap();
        let err = go(&["vault", "decrypt", "--key", &p("k2"), "--in", &p("msg.ct"), "--out", &p("x")]).0;
        assert!(matches!(err, Err(CliError::Vault(VaultError::KeyMismatch))));
    }

    #[test]
    fn keygen_seed_is_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["a", "b"] {
            let path = dir.path().join(name).to_string_lossy().into_owned();
            run(Cli::parse_from(["vault", "keygen", "--bits-p", "24", "--bits-q", "24", "--out", &path, "--seed", "abcd"]), &mut Vec::new())
                .unwrap();
        }
        assert_eq!(fs::read(dir.path().join("a")).unwrap(), fs::read(dir.path().join("b")).unwrap());
    }
}

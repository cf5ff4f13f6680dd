//! TOML experiment configs.
//!
//! A file holds `units = "natural"`, an optional `seed`, and one table per
//! command (`[eigencheck]`, `[vacuum_sweep]`, `[minimize]`, `[discrete_vp]`,
//! `[sea_contour]`, `[pexp_test]`). Unknown keys are rejected at every level.
//! Only the table of the command being run has to be present.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::{CliError, CliResult, Command};

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct Root {
    units: String,
    seed: Option<u64>,
    eigencheck: Option<toml::Table>,
    vacuum_sweep: Option<toml::Table>,
    minimize: Option<toml::Table>,
    discrete_vp: Option<toml::Table>,
    sea_contour: Option<toml::Table>,
    pexp_test: Option<toml::Table>,
}

#[derive(Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EigencheckConfig {
    pub pairs: usize,
    pub dims: Vec<usize>,
    pub spins: Vec<usize>,
    pub max_modulus: f64,
    pub tolerance: f64,
}

#[derive(Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    #[serde(rename = "1+1")]
    OnePlusOne,
    #[serde(rename = "3+1")]
    ThreePlusOne,
}

#[derive(Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VacuumSweepConfig {
    pub space: Space,
    /// Box length L.
    pub extent: f64,
    /// Momenta per axis, M_k.
    pub points: usize,
    pub mass: f64,
    pub epsilons: Vec<f64>,
    pub samples: usize,
    pub t_max: f64,
    pub x_max: f64,
    /// Pairs with |xi^2| below this are classed near-cone.
    pub margin: f64,
}

#[derive(Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MinimizeConfig {
    pub atoms: usize,
    pub dim: usize,
    pub spin: usize,
    pub mu: f64,
    pub volume_target: f64,
    pub trace_target: f64,
    pub max_iters: usize,
    pub step_init: f64,
    /// Random feasible systems drawn as a best-of baseline.
    #[serde(default)]
    pub restarts: usize,
}

#[derive(Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DiscreteVpConfig {
    pub blocks: usize,
    pub block_size: usize,
    pub f: usize,
    pub max_iters: usize,
    pub step_init: f64,
    pub rel_tol: f64,
    /// Fixed multiplier; without it T is held at its initial value.
    #[serde(default)]
    pub mu: Option<f64>,
}

#[derive(Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SeaContourConfig {
    pub models: usize,
    pub dim_max: usize,
    pub strengths: Vec<f64>,
    pub orders: Vec<usize>,
    pub nodes: usize,
    pub radius: f64,
}

#[derive(Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PexpTestConfig {
    pub paths: usize,
    pub dim: usize,
    pub strength: f64,
    pub orders: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Section {
    Eigencheck(EigencheckConfig),
    VacuumSweep(VacuumSweepConfig),
    Minimize(MinimizeConfig),
    DiscreteVp(DiscreteVpConfig),
    SeaContour(SeaContourConfig),
    PexpTest(PexpTestConfig),
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub command: Command,
    pub seed: u64,
    pub sha256: String,
    pub section: Section,
}

pub fn hex_sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn section<T: DeserializeOwned>(name: &str, table: Option<toml::Table>) -> CliResult<T> {
    let table = table.ok_or_else(|| CliError::Config(format!("missing key `{name}` (table for this command)")))?;
    // round trip through text so type errors carry a span we can map to a key
    let text = toml::to_string(&table).map_err(|e| CliError::Config(format!("[{name}] {e}")))?;
    toml::from_str::<T>(&text).map_err(|e| {
        let key = e.span().and_then(|s| {
            let line = text[..s.start].rsplit('\n').next().unwrap_or("");
            let key = line.split('=').next()?.trim();
            (line.contains('=') && !key.is_empty()).then(|| key.to_string())
        });
        match key {
            Some(k) if !e.message().contains('`') => CliError::Config(format!("[{name}] key `{k}`: {}", e.message())),
            _ => CliError::Config(format!("[{name}] {}", e.message())),
        }
    })
}

pub fn parse(text: &str, command: Command, seed_flag: Option<u64>) -> CliResult<Loaded> {
    let root: Root = toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
    if root.units != "natural" {
        return Err(CliError::Config(format!("units must be \"natural\", got \"{}\"", root.units)));
    }
    let seed = seed_flag
        .or(root.seed)
        .ok_or_else(|| CliError::Config("missing key `seed` (or pass --seed)".into()))?;
    let name = command.section();
    let section = match command {
        Command::Eigencheck => Section::Eigencheck(section(name, root.eigencheck)?),
        Command::VacuumSweep => Section::VacuumSweep(section(name, root.vacuum_sweep)?),
        Command::Minimize => Section::Minimize(section(name, root.minimize)?),
        Command::DiscreteVp => Section::DiscreteVp(section(name, root.discrete_vp)?),
        Command::SeaContour => Section::SeaContour(section(name, root.sea_contour)?),
        Command::PexpTest => Section::PexpTest(section(name, root.pexp_test)?),
    };
    Ok(Loaded { command, seed, sha256: hex_sha256(text.as_bytes()), section })
}

pub fn load(path: &Path, command: Command, seed_flag: Option<u64>) -> CliResult<Loaded> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse(&text, command, seed_flag)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "units = \"natural\"\nseed = 3\n[eigencheck]\npairs = 5\ndims = [8]\nspins = [1]\nmax_modulus = 2.0\ntolerance = 1e-9\n";

    #[test]
    fn parses_and_hashes() {
        let l = parse(GOOD, Command::Eigencheck, None).unwrap();
        assert_eq!(l.seed, 3);
        assert_eq!(l.sha256.len(), 64);
        assert_eq!(parse(GOOD, Command::Eigencheck, Some(9)).unwrap().seed, 9);
    }

    #[test]
    fn missing_key_is_named() {
        let text = GOOD.replace("pairs = 5\n", "");
        let e = parse(&text, Command::Eigencheck, None).unwrap_err().to_string();
        assert!(e.contains("pairs") && !e.contains('\n'), "{e}");
        let e = parse(GOOD, Command::Minimize, None).unwrap_err().to_string();
        assert!(e.contains("minimize"), "{e}");
    }

    #[test]
    fn unknown_keys_and_units() {
        let e = parse(&GOOD.replace("pairs = 5", "pairs = 5\ncolour = 1"), Command::Eigencheck, None).unwrap_err();
        assert!(e.to_string().contains("colour"), "{e}");
        let e = parse(&GOOD.replace("natural", "si"), Command::Eigencheck, None).unwrap_err();
        assert!(e.to_string().contains("natural"));
        let e = parse(&GOOD.replace("seed = 3\n", "seed = 3\nextra = 1\n"), Command::Eigencheck, None).unwrap_err();
        assert!(e.to_string().contains("extra"));
    }
}

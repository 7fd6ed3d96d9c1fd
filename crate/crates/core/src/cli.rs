//! Experiment runner: configuration, orchestration and CSV/summary emission.

use crate::conjugacy::{
    admissibility, beta_increments, cocycle_check, d_table, dh_construct, entrance_case_check,
    match_orbits_with, modulus_estimate, zeta_cauchy_check, zeta_increment, ConjugacyTable,
};
use crate::error::{Error, Result};
use crate::maps::{tuned_member, BreakMapSpec, BreakOrbit, MapParams};
use crate::numerics::{make_real, required_bits, to_sig_digits, BigReal, Precision};
use crate::partition::{
    build_partition, contraction_lambda, decomposition_check, refinement_check,
};
use crate::renorm::{commuting_pair_check, mobius_table, pair_table, MobiusRow};
use crate::rotations::RotationTarget;
use crate::zygmund::{
    default_sites, dyadic_scales, effective_depth, total_variation_log_df, zygmund_seminorm,
};
use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Digits written for every real in CSV output.
pub const CSV_DIGITS: usize = 40;

/// Marker placed in the first column of the row that closes a truncated CSV.
pub const TRUNCATION_MARKER: &str = "#truncated";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

fn default_bits() -> u32 {
    crate::numerics::DEFAULT_BITS
}

fn default_gamma() -> String {
    "3".into()
}

fn default_grid() -> usize {
    257
}

fn default_true() -> bool {
    true
}

fn default_m() -> u32 {
    1
}

/// Rotation target as a periodic quotient pattern cut to `depth`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub period: Vec<u64>,
    pub depth: usize,
}

/// Parameters of the `admissibility` command; `c` defaults to the break size of `family_f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmissibilityConfig {
    #[serde(default)]
    pub c: Option<String>,
    #[serde(default = "default_m")]
    pub m: u32,
}

impl Default for AdmissibilityConfig {
    fn default() -> Self {
        AdmissibilityConfig { c: None, m: 1 }
    }
}

/// One experiment. Reals are decimal strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_bits")]
    pub precision_bits: u32,
    #[serde(default = "default_gamma")]
    pub gamma: String,
    pub family_f: MapParams,
    #[serde(default)]
    pub family_ftilde: Option<MapParams>,
    pub target: TargetConfig,
    /// Replace ω of each family by the member matching `target`.
    #[serde(default = "default_true")]
    pub tune: bool,
    pub n_min: usize,
    pub n_max: usize,
    #[serde(default = "default_grid")]
    pub grid_points: usize,
    /// Exponent in ℓ = n + ⌊α log_κ n⌋; defaults to γ/2.
    #[serde(default)]
    pub alpha: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<String>,
    /// Allows the two families to carry different glue parameters.
    #[serde(default)]
    pub negative_control: bool,
    #[serde(default)]
    pub admissibility: AdmissibilityConfig,
    /// Largest dyadic exponent j in τ = 2^{−j} for `zygmund-check`.
    #[serde(default)]
    pub zygmund_j_max: Option<u32>,
    /// Random pairs per dyadic bin in the modulus estimate.
    #[serde(default = "default_pairs")]
    pub modulus_pairs: usize,
}

fn default_pairs() -> usize {
    10_000
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn precision(&self) -> Result<Precision> {
        Precision::new(self.precision_bits)
    }

    pub fn gamma(&self) -> Result<BigReal> {
        make_real(&self.gamma, self.precision()?.working_bits())
    }

    pub fn alpha(&self) -> Result<f64> {
        match &self.alpha {
            Some(a) => Ok(make_real(a, 64)?.to_f64()),
            None => Ok(self.gamma()?.to_f64() / 2.0),
        }
    }

    pub fn rotation_target(&self) -> Result<RotationTarget> {
        RotationTarget::periodic(&self.target.period, self.target.depth)
    }

    /// Schema-level checks: level range, target depth, shared glue and the precision budget.
    pub fn validate(&self) -> Result<()> {
        let prec = self.precision()?;
        if self.n_min < 2 || self.n_min > self.n_max {
            return Err(Error::Invalid(format!(
                "levels must satisfy 2 ≤ n_min ≤ n_max, got {}..{}",
                self.n_min, self.n_max
            )));
        }
        if self.target.depth < self.n_max + 2 {
            return Err(Error::Invalid(format!(
                "target depth {} must be at least n_max + 2 = {}",
                self.target.depth,
                self.n_max + 2
            )));
        }
        if self.grid_points < 2 {
            return Err(Error::Invalid("grid_points must be at least 2".into()));
        }
        if let Some(g) = &self.family_ftilde {
            if g.glue_s != self.family_f.glue_s && !self.negative_control {
                return Err(Error::Invalid(
                    "family_f and family_ftilde must share the glue parameter unless negative_control is set".into(),
                ));
            }
        }
        self.gamma()?;
        self.alpha()?;
        let target = self.rotation_target()?;
        let f = BreakMapSpec::from_params(&self.family_f, prec)?;
        let c = f.break_size()?;
        let lambda = contraction_lambda(&c).to_f64();
        let q = target
            .q(self.n_max as i64)
            .map(|q| q.to_f64())
            .unwrap_or(f64::INFINITY);
        let need = required_bits(self.n_max as u32, lambda, q);
        if need > prec.bits() {
            return Err(Error::Invalid(format!(
                "n_max = {} needs {need} bits but precision_bits = {}",
                self.n_max,
                prec.bits()
            )));
        }
        Ok(())
    }
}

/// Subcommands of the runner.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    PartitionStats,
    RenormConverge,
    Rigidity,
    Cohomology,
    ZygmundCheck,
    Admissibility,
    Pilot,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::PartitionStats,
        Command::RenormConverge,
        Command::Rigidity,
        Command::Cohomology,
        Command::ZygmundCheck,
        Command::Admissibility,
        Command::Pilot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::PartitionStats => "partition-stats",
            Command::RenormConverge => "renorm-converge",
            Command::Rigidity => "rigidity",
            Command::Cohomology => "cohomology",
            Command::ZygmundCheck => "zygmund-check",
            Command::Admissibility => "admissibility",
            Command::Pilot => "pilot",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown command {s:?}")))
    }
}

/// Rows of one CSV file; flushed whole, or with a truncation marker when a run stops early.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub truncated: Option<String>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            truncated: None,
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        if let Some(reason) = &self.truncated {
            let mut marker = vec![
                TRUNCATION_MARKER.to_string(),
                reason.replace([',', '\n'], ";"),
            ];
            marker.resize(self.header.len().max(2), String::new());
            out.push_str(&marker.join(","));
            out.push('\n');
        }
        out
    }
}

fn num(x: &BigReal) -> String {
    to_sig_digits(x, CSV_DIGITS)
}

fn opt_num(x: Option<&BigReal>) -> String {
    x.map(num).unwrap_or_default()
}

/// Everything a command produced.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub command: Command,
    pub tables: Vec<(String, Table)>,
    /// Invariant suites and whether each passed.
    pub suites: Map<String, Value>,
    pub values: Map<String, Value>,
    pub truncated: Option<String>,
    pub error: Option<String>,
    pub exit_code: i32,
}

impl Outcome {
    fn new(command: Command) -> Self {
        Outcome {
            command,
            tables: Vec::new(),
            suites: Map::new(),
            values: Map::new(),
            truncated: None,
            error: None,
            exit_code: EXIT_OK,
        }
    }

    fn suite(&mut self, name: &str, ok: bool) {
        self.suites.insert(name.into(), Value::Bool(ok));
    }

    fn value(&mut self, name: &str, v: Value) {
        self.values.insert(name.into(), v);
    }

    pub fn all_passed(&self) -> bool {
        self.suites.values().all(|v| v.as_bool().unwrap_or(false))
    }

    pub fn summary(&self) -> Value {
        json!({
            "command": self.command.name(),
            "exit_code": self.exit_code,
            "suites": self.suites,
            "values": self.values,
            "truncated": self.truncated,
            "error": self.error,
        })
    }

    /// Writes `<name>.csv` for every table and `<command>.summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        for (name, table) in &self.tables {
            let p = dir.join(format!("{name}.csv"));
            fs::write(&p, table.to_csv())?;
            paths.push(p);
        }
        let p = dir.join(format!("{}.summary.json", self.command.name()));
        let mut text = serde_json::to_string_pretty(&self.summary())?;
        text.push('\n');
        fs::write(&p, text)?;
        paths.push(p);
        Ok(paths)
    }
}

/// Exit status for a library error.
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::PrecisionExhausted(_) | Error::OrbitHitsBreak(_) | Error::RationalBehaviour(_) => {
            EXIT_PRECISION
        }
        Error::Combinatorics(_)
        | Error::IdentityViolated(_)
        | Error::NotCauchy(_)
        | Error::Pole(_) => EXIT_INVARIANT,
        _ => EXIT_CONFIG,
    }
}

const PARTITION_HEADER: [&str; 10] = [
    "n",
    "q_n",
    "segments",
    "length_sum_defect",
    "min_length",
    "max_length",
    "refinement_ok",
    "decomposition_ok",
    "two_step_ratio",
    "lambda_sq",
];

const RENORM_HEADER: [&str; 14] = [
    "n",
    "q_n",
    "a_n",
    "v_n",
    "c_n",
    "phi_margin",
    "c0",
    "c1",
    "c2",
    "c1_scaled",
    "df_min",
    "df_max",
    "c2_norm",
    "commuting_ok",
];

const RIGIDITY_HEADER: [&str; 8] = [
    "n",
    "lambda_n",
    "zeta_increment",
    "cauchy_bound",
    "beta_n",
    "log_beta_increment",
    "ell",
    "d_max",
];

const COHOMOLOGY_HEADER: [&str; 7] = [
    "n",
    "cocycle_points",
    "cocycle_max_residual",
    "cocycle_ok",
    "cases_checked",
    "case_violations",
    "zeta_at_break",
];

/// Name and header of the main CSV of each command.
fn primary_table(command: Command) -> (&'static str, &'static [&'static str]) {
    match command {
        Command::PartitionStats => ("partition-stats", &PARTITION_HEADER),
        Command::RenormConverge => ("renorm-converge", &RENORM_HEADER),
        Command::Rigidity => ("rigidity", &RIGIDITY_HEADER),
        Command::Cohomology => ("cohomology", &COHOMOLOGY_HEADER),
        Command::ZygmundCheck => ("zygmund-check", &["tau", "site_class", "max_ratio"]),
        Command::Admissibility => (
            "admissibility",
            &["c", "m", "in_D_set", "lambda_kappa_ok", "lambda", "kappa"],
        ),
        Command::Pilot => ("pilot", &["fit", "constant", "exponent", "enabled"]),
    }
}

/// Maps and orbits shared by the commands.
struct Setup {
    prec: Precision,
    gamma: BigReal,
    f: BreakOrbit,
    g: Option<BreakOrbit>,
}

fn member(params: &MapParams, cfg: &ExperimentConfig, prec: Precision) -> Result<BreakMapSpec> {
    let family = BreakMapSpec::from_params(params, prec)?;
    if cfg.tune {
        tuned_member(&family, &cfg.rotation_target()?, cfg.target.depth)
    } else {
        Ok(family)
    }
}

fn setup(cfg: &ExperimentConfig, need_pair: bool) -> Result<Setup> {
    let prec = cfg.precision()?;
    let depth = cfg.n_max + 2;
    let fm = member(&cfg.family_f, cfg, prec)?;
    let f = BreakOrbit::new(&fm, depth)?;
    let g = match &cfg.family_ftilde {
        Some(p) => Some(BreakOrbit::new(&member(p, cfg, prec)?, depth)?),
        None if need_pair => {
            return Err(Error::Invalid("this command needs family_ftilde".into()));
        }
        None => None,
    };
    Ok(Setup {
        prec,
        gamma: cfg.gamma()?,
        f,
        g,
    })
}

/// Runs one command without touching the file system.
pub fn execute(command: Command, cfg: &ExperimentConfig, override_break_mismatch: bool) -> Outcome {
    let mut out = Outcome::new(command);
    let result = match command {
        Command::PartitionStats => partition_stats(cfg, &mut out),
        Command::RenormConverge => renorm_converge(cfg, override_break_mismatch, &mut out),
        Command::Rigidity => rigidity(cfg, override_break_mismatch, &mut out),
        Command::Cohomology => cohomology(cfg, override_break_mismatch, &mut out),
        Command::ZygmundCheck => zygmund_check(cfg, &mut out),
        Command::Admissibility => admissibility_cmd(cfg, &mut out),
        Command::Pilot => pilot(cfg, override_break_mismatch, &mut out),
    };
    match result {
        Ok(()) => {
            if !out.all_passed() {
                out.exit_code = EXIT_INVARIANT;
            }
        }
        Err(e) => {
            out.exit_code = exit_code_for(&e);
            out.error = Some(e.to_string());
            if out.exit_code == EXIT_PRECISION {
                let reason = e.to_string();
                if out.tables.is_empty() {
                    let (name, header) = primary_table(command);
                    out.tables.push((name.to_string(), Table::new(header)));
                }
                for (_, t) in out.tables.iter_mut() {
                    t.truncated = Some(reason.clone());
                }
                out.truncated = Some(reason);
            }
        }
    }
    out
}

/// Parses the config, runs the command and writes its artifacts; returns the exit status.
pub fn run(
    command: Command,
    config: &Path,
    out_dir: Option<&Path>,
    override_break_mismatch: bool,
) -> (i32, Option<Outcome>) {
    let cfg = match ExperimentConfig::load(config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return (EXIT_CONFIG, None);
        }
    };
    let dir = out_dir
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let out = execute(command, &cfg, override_break_mismatch);
    if let Err(e) = out.write(&dir) {
        eprintln!("cannot write to {}: {e}", dir.display());
        return (EXIT_CONFIG, Some(out));
    }
    if let Some(e) = &out.error {
        eprintln!("{command}: {e}");
    } else if out.exit_code == EXIT_INVARIANT {
        let failed: Vec<&String> = out
            .suites
            .iter()
            .filter(|(_, v)| v != &&Value::Bool(true))
            .map(|(k, _)| k)
            .collect();
        eprintln!("{command}: invariant suites failed: {failed:?}");
    }
    (out.exit_code, Some(out))
}

/// Runs `body` and records its table in `out` even when it stops on an error.
fn with_table<F>(out: &mut Outcome, name: &str, header: &[&str], body: F) -> Result<()>
where
    F: FnOnce(&mut Table, &mut Outcome) -> Result<()>,
{
    let mut table = Table::new(header);
    let r = body(&mut table, out);
    out.tables.push((name.to_string(), table));
    r
}

fn levels(cfg: &ExperimentConfig) -> std::ops::RangeInclusive<usize> {
    cfg.n_min..=cfg.n_max
}

fn partition_stats(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let s = setup(cfg, false)?;
    let mut orbit = s.f;
    let cr = orbit.returns().clone();
    let top = cfg.n_max as i64 + 2;
    orbit.extend_to(cr.q(top) + cr.q(top - 1) + 2)?;
    let u = s.prec.unit_roundoff();
    let c = orbit.map().break_size()?;
    let lambda = contraction_lambda(&c);
    let lambda_sq = Float::with_val(lambda.prec(), lambda.square_ref());
    let (mut closure, mut refine, mut decomposition) = (true, true, true);
    with_table(out, "partition-stats", &PARTITION_HEADER, |t, _| {
        for n in levels(cfg) {
            let level = build_partition(&orbit, n)?;
            let count = level.q_n + level.q_prev;
            let defect = level.length_defect().abs();
            let tol = Float::with_val(u.prec(), &u * (10 * count) as u32);
            closure &= level.len() == count && defect <= tol;
            let rf = refinement_check(&orbit, n)?.ok();
            let mut lm = true;
            for m in n + 1..=n + 2 {
                lm &= decomposition_check(&orbit, n, m)?.ok();
            }
            refine &= rf;
            decomposition &= lm;
            let ratio = Float::with_val(u.prec(), cr.delta(n as i64 + 1).abs_ref())
                / Float::with_val(u.prec(), cr.delta(n as i64 - 1).abs_ref());
            t.push(vec![
                n.to_string(),
                level.q_n.to_string(),
                level.len().to_string(),
                num(&defect),
                num(level.min_length()),
                num(level.max_length()),
                rf.to_string(),
                lm.to_string(),
                num(&ratio),
                num(&lambda_sq),
            ]);
        }
        Ok(())
    })?;
    out.suite("partition_closure", closure);
    out.suite("refinement", refine);
    out.suite("orbit_decomposition", decomposition);
    Ok(())
}

fn mobius_rows(s: &Setup, cfg: &ExperimentConfig) -> Result<Vec<MobiusRow>> {
    mobius_table(&s.f, levels(cfg), cfg.grid_points, &s.gamma)
}

fn renorm_converge(
    cfg: &ExperimentConfig,
    override_break_mismatch: bool,
    out: &mut Outcome,
) -> Result<()> {
    let s = setup(cfg, false)?;
    let mut commuting = true;
    let mut min_margin: Option<BigReal> = None;
    let mut max_c1 = Float::new(s.prec.working_bits());
    with_table(out, "renorm-converge", &RENORM_HEADER, |t, _| {
        for n in levels(cfg) {
            let row = mobius_table(&s.f, [n], cfg.grid_points, &s.gamma)?.remove(0);
            let cp = commuting_pair_check(&s.f, &row.pair)?;
            commuting &= cp.ok();
            if let Some(m) = &row.phi_margin {
                if min_margin.as_ref().map_or(true, |cur| m < cur) {
                    min_margin = Some(m.clone());
                }
            }
            if row.dist.c1 > max_c1 {
                max_c1 = row.dist.c1.clone();
            }
            let p = &row.pair;
            t.push(vec![
                n.to_string(),
                p.q_n.to_string(),
                num(&p.a),
                num(&p.v),
                num(&p.c_n),
                opt_num(row.phi_margin.as_ref()),
                num(&row.dist.c0),
                num(&row.dist.c1),
                num(&row.dist.c2),
                num(&row.c1_scaled),
                num(&row.df_min),
                num(&row.df_max),
                num(&row.c2_norm),
                cp.ok().to_string(),
            ]);
        }
        Ok(())
    })?;
    out.suite("commuting_pair", commuting);
    if let Some(m) = &min_margin {
        out.suite("phi_membership", *m > 0);
        out.value("phi_margin_min", json!(num(m)));
    }
    out.value("c1_max", json!(num(&max_c1)));
    if let Some(g) = &s.g {
        let header = ["n", "c0", "c1", "c2", "a_gap", "c2_norm_f", "c2_norm_g"];
        with_table(out, "renorm-pair", &header, |t, _| {
            for n in levels(cfg) {
                let r =
                    pair_table(&s.f, g, [n], cfg.grid_points, override_break_mismatch)?.remove(0);
                t.push(vec![
                    n.to_string(),
                    num(&r.dist.c0),
                    num(&r.dist.c1),
                    num(&r.dist.c2),
                    num(&r.a_gap),
                    num(&r.c2_norm_f),
                    num(&r.c2_norm_g),
                ]);
            }
            Ok(())
        })?;
    }
    Ok(())
}

fn conjugacy_table(
    s: &Setup,
    cfg: &ExperimentConfig,
    override_break_mismatch: bool,
) -> Result<ConjugacyTable> {
    let g = s.g.as_ref().expect("pair commands build family_ftilde");
    match_orbits_with(&s.f, g, cfg.n_max, override_break_mismatch)
}

fn kappa_for(table: &ConjugacyTable, m: u32) -> Result<Option<f64>> {
    let c = table.f().map().break_size()?;
    if c == 1 {
        return Ok(None);
    }
    Ok(Some(admissibility(&c, m)?.kappa.to_f64()))
}

fn rigidity(
    cfg: &ExperimentConfig,
    override_break_mismatch: bool,
    out: &mut Outcome,
) -> Result<()> {
    let s = setup(cfg, true)?;
    let table = conjugacy_table(&s, cfg, override_break_mismatch)?;
    let kappa = kappa_for(&table, cfg.admissibility.m)?;
    let alpha = cfg.alpha()?;
    let incs = beta_increments(&table);
    let mut cauchy = true;
    with_table(out, "rigidity", &RIGIDITY_HEADER, |t, _| {
        for n in levels(cfg) {
            let lam = table.lambda_max(n)?;
            let (inc, bound) = if n < cfg.n_max {
                let rep = zeta_cauchy_check(&table, n)?;
                cauchy &= rep.ok();
                (Some(rep.increment), Some(rep.bound))
            } else {
                (None, None)
            };
            let d = match kappa {
                Some(k) => Some(d_table(&table, [n], alpha, k)?.remove(0)),
                None => None,
            };
            t.push(vec![
                n.to_string(),
                num(&lam),
                opt_num(inc.as_ref()),
                opt_num(bound.as_ref()),
                num(table.beta(n)),
                num(&incs[n - 1]),
                d.as_ref().map(|d| d.ell.to_string()).unwrap_or_default(),
                opt_num(d.as_ref().map(|d| &d.d_max)),
            ]);
        }
        Ok(())
    })?;
    out.suite("zeta_cauchy", cauchy);
    let dh = dh_construct(&table)?;
    out.suite("dh_gap_ratio", dh.max_rel_gap < 0.05);
    out.value("dh_max_rel_gap", json!(num(&dh.max_rel_gap)));
    out.value("beta", json!(num(&dh.beta)));
    out.value("zeta_tail", json!(dh.zeta_tail.map(|v| format!("{v:e}"))));
    let est = modulus_estimate(
        &table,
        cfg.n_max,
        &s.gamma,
        0.1,
        cfg.modulus_pairs,
        cfg.seed,
    )?;
    out.value("modulus_statistic", json!(num(&est.statistic)));
    out.value("modulus_level", json!(est.level));
    let header = ["j", "pairs", "max_stat"];
    with_table(out, "rigidity-modulus", &header, |t, _| {
        for b in &est.bins {
            t.push(vec![b.j.to_string(), b.pairs.to_string(), num(&b.max_stat)]);
        }
        Ok(())
    })?;
    Ok(())
}

fn cohomology(
    cfg: &ExperimentConfig,
    override_break_mismatch: bool,
    out: &mut Outcome,
) -> Result<()> {
    let s = setup(cfg, true)?;
    let table = conjugacy_table(&s, cfg, override_break_mismatch)?;
    let (mut cocycle, mut cases) = (true, true);
    with_table(out, "cohomology", &COHOMOLOGY_HEADER, |t, _| {
        for n in levels(cfg) {
            let rep = cocycle_check(&table, n, 50, cfg.seed.wrapping_add(n as u64))?;
            cocycle &= rep.ok();
            let worst = rep
                .residuals
                .iter()
                .max_by(|a, b| a.total_cmp(b))
                .cloned()
                .unwrap_or_else(|| Float::new(s.prec.bits()));
            let cr = if n < cfg.n_max {
                Some(entrance_case_check(&table, n)?)
            } else {
                None
            };
            if let Some(c) = &cr {
                cases &= c.ok();
            }
            t.push(vec![
                n.to_string(),
                rep.points.len().to_string(),
                num(&worst),
                rep.ok().to_string(),
                cr.as_ref()
                    .map(|c| c.checked.to_string())
                    .unwrap_or_default(),
                cr.as_ref()
                    .map(|c| c.violations.len().to_string())
                    .unwrap_or_default(),
                num(&rep.zeta_at_break),
            ]);
        }
        Ok(())
    })?;
    out.suite("cocycle", cocycle);
    out.suite("entrance_cases", cases);
    Ok(())
}

fn zygmund_check(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let prec = cfg.precision()?;
    // The seminorm is a property of the map; ω plays no role, so no tuning.
    let map = BreakMapSpec::from_params(&cfg.family_f, prec)?;
    let gamma = cfg.gamma()?;
    let bits = prec.working_bits();
    let j_max = cfg
        .zygmund_j_max
        .unwrap_or_else(|| effective_depth(&map))
        .min(prec.bits() / 4);
    let scales = dyadic_scales(bits, j_max);
    let stats = zygmund_seminorm(&map, &gamma, &scales, &default_sites(bits))?;
    let variation = total_variation_log_df(&map, 4096)?;
    let jump = match map.has_break() {
        true => {
            let c = map.break_size()?;
            Float::with_val(bits, c.ln_ref()).abs() * 2u32
        }
        false => Float::new(bits),
    };
    with_table(
        out,
        "zygmund-check",
        &["tau", "site_class", "max_ratio"],
        |t, _| {
            for r in &stats.rows {
                t.push(vec![
                    num(&r.tau),
                    r.class.label().to_string(),
                    num(&r.max_ratio),
                ]);
            }
            Ok(())
        },
    )?;
    out.suite("seminorm_nonnegative", stats.seminorm >= 0);
    out.suite(
        "variation_covers_jump",
        variation >= Float::with_val(bits, &jump - prec.ulps(64.0)),
    );
    out.value("seminorm", json!(num(&stats.seminorm)));
    out.value("variation", json!(num(&variation)));
    out.value("j_max", json!(j_max));
    Ok(())
}

fn admissibility_cmd(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let prec = cfg.precision()?;
    let bits = prec.working_bits();
    let c = match &cfg.admissibility.c {
        Some(text) => make_real(text, bits)?,
        None => BreakMapSpec::from_params(&cfg.family_f, prec)?.break_size()?,
    };
    let m = cfg.admissibility.m;
    let a = admissibility(&c, m)?;
    with_table(
        out,
        "admissibility",
        &["c", "m", "in_D_set", "lambda_kappa_ok", "lambda", "kappa"],
        |t, _| {
            t.push(vec![
                num(&c),
                m.to_string(),
                a.in_d_set.to_string(),
                a.lambda_kappa_ok.to_string(),
                num(&a.lambda),
                num(&a.kappa),
            ]);
            Ok(())
        },
    )?;
    out.value("in_D_set", json!(a.in_d_set));
    out.value("lambda_kappa_ok", json!(a.lambda_kappa_ok));
    out.value("lambda", json!(num(&a.lambda)));
    out.value("kappa", json!(num(&a.kappa)));
    Ok(())
}

/// A fitted constant C = max over the range of n^e·y_n; disabled when all y_n vanish.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub constant: String,
    pub exponent: String,
    pub enabled: bool,
    pub note: Option<String>,
}

fn fit(ns: &[usize], ys: &[BigReal], exponent: &BigReal) -> Fit {
    let bits = exponent.prec();
    let mut best = Float::new(bits);
    for (&n, y) in ns.iter().zip(ys) {
        let v = Float::with_val(bits, Float::with_val(bits, n).pow(exponent)) * y;
        if v > best {
            best = v;
        }
    }
    let enabled = !best.is_zero();
    Fit {
        constant: num(&best),
        exponent: num(exponent),
        enabled,
        note: (!enabled).then(|| "series vanishes identically; assertion disabled".to_string()),
    }
}

fn pilot(cfg: &ExperimentConfig, override_break_mismatch: bool, out: &mut Outcome) -> Result<()> {
    let s = setup(cfg, false)?;
    let ns: Vec<usize> = levels(cfg).collect();
    let rows = mobius_rows(&s, cfg)?;
    let bits = s.gamma.prec();
    let c1: Vec<BigReal> = rows.iter().map(|r| r.dist.c1.clone()).collect();
    let mut fits = Map::new();
    fits.insert(
        "mobius_c1".into(),
        serde_json::to_value(fit(&ns, &c1, &s.gamma))?,
    );
    let q = rows
        .iter()
        .map(|r| r.c2_norm.clone())
        .max_by(|a, b| a.total_cmp(b))
        .expect("levels nonempty");
    out.value("Q", json!(num(&q)));
    let margins: Vec<&BigReal> = rows.iter().filter_map(|r| r.phi_margin.as_ref()).collect();
    if let Some(eps) = margins.into_iter().min_by(|a, b| a.total_cmp(b)) {
        out.value("phi_epsilon", json!(num(eps)));
    }
    if let Some(g) = &s.g {
        let pr = pair_table(
            &s.f,
            g,
            levels(cfg),
            cfg.grid_points,
            override_break_mismatch,
        )?;
        let d: Vec<BigReal> = pr.iter().map(|r| r.dist.c1.clone()).collect();
        fits.insert(
            "pair_c1".into(),
            serde_json::to_value(fit(&ns, &d, &s.gamma))?,
        );
        let table = conjugacy_table(&s, cfg, override_break_mismatch)?;
        let lam = ns
            .iter()
            .map(|&n| table.lambda_max(n))
            .collect::<Result<Vec<_>>>()?;
        let half = Float::with_val(bits, &s.gamma / 2u32);
        fits.insert(
            "lambda".into(),
            serde_json::to_value(fit(&ns, &lam, &half))?,
        );
        let inc_ns: Vec<usize> = ns.iter().copied().filter(|&n| n < cfg.n_max).collect();
        let incs = inc_ns
            .iter()
            .map(|&n| zeta_increment(&table, n))
            .collect::<Result<Vec<_>>>()?;
        fits.insert(
            "zeta_increment".into(),
            serde_json::to_value(fit(&inc_ns, &incs, &half))?,
        );
        if let Some(k) = kappa_for(&table, cfg.admissibility.m)? {
            let alpha = cfg.alpha()?;
            let d = d_table(&table, ns.iter().copied(), alpha, k)?;
            let ys: Vec<BigReal> = d.iter().map(|r| r.d_max.clone()).collect();
            let e = Float::with_val(bits, &s.gamma - alpha);
            fits.insert(
                "rescaled_distance".into(),
                serde_json::to_value(fit(&ns, &ys, &e))?,
            );
        }
    }
    with_table(
        out,
        "pilot",
        &["fit", "constant", "exponent", "enabled"],
        |t, _| {
            for (name, v) in &fits {
                let f: Fit = serde_json::from_value(v.clone())?;
                t.push(vec![
                    name.clone(),
                    f.constant,
                    f.exponent,
                    f.enabled.to_string(),
                ]);
            }
            Ok(())
        },
    )?;
    out.value("fits", Value::Object(fits));
    Ok(())
}

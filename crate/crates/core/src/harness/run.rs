//! Experiment dispatch and result persistence.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use num_traits::ToPrimitive;
use rand::RngCore;
use serde::Serialize;

use crate::asymptotics::replicate::collect;
use crate::asymptotics::{
    estimate_perpetuity_tail, estimate_perpetuity_tail_crude, estimate_stationary_tail, estimate_tail_crude,
    estimate_tail_importance, finite_horizon_prediction, psae_conditional_prob, stationary_prediction, thm1_prediction, Horizon, McConfig,
    Method, PredictionKind, Proposal, TailEstimate,
};
use crate::branching::{burn_in, exact_tail_z1, exact_tail_z2, simulate, Mode, Trajectory};
use crate::environment::EnvFile;
use crate::error::{Error, Result};
use crate::harness::config::{method_name, ExperimentConfig, Format, Kind};
use crate::heavytail::TailLaw;
use crate::rng::stream;
use crate::rwre::{disteq_check, simulate_walk, verify_hitting_identity, WalkConfig, WalkOutcome};

/// Two-sample KS critical coefficient at level 0.01.
pub const KS_C_01: f64 = 1.628;

/// The estimate record written by `tail` and `perpetuity`.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct EstimateRecord {
    pub law: String,
    pub n: u64,
    pub m: f64,
    pub mode: Option<Mode>,
    pub method: Method,
    pub value: f64,
    pub se: f64,
    pub reps: u64,
    pub prediction: f64,
    pub prediction_kind: PredictionKind,
    pub seed: u64,
}

impl EstimateRecord {
    fn new(cfg: &ExperimentConfig, mode: Option<Mode>, est: &TailEstimate) -> Self {
        Self {
            law: cfg.law.clone(),
            n: cfg.n,
            m: cfg.m,
            mode,
            method: est.method,
            value: est.value,
            se: est.std_error,
            reps: est.reps,
            prediction: est.prediction,
            prediction_kind: est.prediction_kind,
            seed: cfg.seed,
        }
    }

    pub const CSV_HEADER: &'static str = "law,n,m,mode,method,value,se,reps,prediction,prediction_kind,seed";

    pub fn csv_row(&self) -> String {
        let kind = serde_json::to_value(self.prediction_kind).expect("enum serializes");
        format!(
            "\"{}\",{},{:?},{},{},{:?},{:?},{},{:?},{},{}",
            self.law,
            self.n,
            self.m,
            self.mode.map(|m| m.to_string()).unwrap_or_default(),
            method_name(self.method),
            self.value,
            self.se,
            self.reps,
            self.prediction,
            kind.as_str().unwrap_or_default(),
            self.seed
        )
    }
}

/// One file produced by a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputFile {
    pub path: PathBuf,
    pub role: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: ExperimentConfig,
    pub started_unix_ms: u128,
    pub wall_seconds: f64,
    pub outputs: Vec<OutputFile>,
}

/// What a run produced. `primary` is the main output text; when no output
/// path is configured it is the caller's to print.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub primary: String,
    pub outputs: Vec<OutputFile>,
    pub manifest: Manifest,
}

struct Produced {
    primary: String,
    aux: Vec<(&'static str, &'static str, String)>,
    failure: Option<String>,
}

impl Produced {
    fn text(primary: String) -> Self {
        Self { primary, aux: Vec::new(), failure: None }
    }
}

/// `path` with `suffix` appended to its file name.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

/// Runs one experiment. With an output path, writes the primary output
/// there, auxiliary files beside it and `<out>.manifest.json`. A failed
/// verification is reported as an error after the files are written.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0);
    let clock = Instant::now();
    let law = cfg.parsed_law()?;
    let produced = match cfg.kind {
        Kind::LawCheck => law_check(cfg, &law)?,
        Kind::Simulate => simulate_one(cfg, &law)?,
        Kind::Tail => Produced::text(render_estimate(cfg, tail(cfg, &law)?)?),
        Kind::Perpetuity => Produced::text(render_estimate(cfg, perpetuity(cfg, &law)?)?),
        Kind::RwreVerify => rwre_verify(cfg, &law)?,
        Kind::Disteq => disteq(cfg, &law)?,
        Kind::Psae => psae(cfg, &law)?,
    };
    let mut outputs = Vec::new();
    if let Some(out) = &cfg.out {
        if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(out, &produced.primary)?;
        outputs.push(OutputFile { path: out.clone(), role: "primary" });
        for (suffix, role, text) in &produced.aux {
            let path = sibling(out, suffix);
            std::fs::write(&path, text)?;
            outputs.push(OutputFile { path, role });
        }
    }
    let manifest = Manifest {
        tool: "bpre",
        version: env!("CARGO_PKG_VERSION"),
        config: cfg.clone(),
        started_unix_ms: started,
        wall_seconds: clock.elapsed().as_secs_f64(),
        outputs: outputs.clone(),
    };
    if let Some(out) = &cfg.out {
        std::fs::write(sibling(out, ".manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    }
    if let Some(msg) = produced.failure {
        return Err(Error::Verification(msg));
    }
    Ok(RunReport { primary: produced.primary, outputs, manifest })
}

fn mc(cfg: &ExperimentConfig) -> McConfig {
    McConfig::new(cfg.reps, cfg.seed).with_workers(cfg.workers)
}

fn horizon(cfg: &ExperimentConfig) -> Result<usize> {
    usize::try_from(cfg.n).map_err(|_| Error::InvalidArgument(format!("n = {} too large", cfg.n)))
}

fn integer_m(cfg: &ExperimentConfig) -> Result<u64> {
    if cfg.m >= 0.0 && cfg.m.fract() == 0.0 && cfg.m < 9.0e15 {
        Ok(cfg.m as u64)
    } else {
        Err(Error::InvalidArgument(format!("exact method needs an integer threshold m, got {}", cfg.m)))
    }
}

fn render_estimate(cfg: &ExperimentConfig, rec: EstimateRecord) -> Result<String> {
    Ok(match cfg.format {
        Format::Json => serde_json::to_string_pretty(&rec)? + "\n",
        Format::Csv => format!("{}\n{}\n", EstimateRecord::CSV_HEADER, rec.csv_row()),
    })
}

/// `n = 0` asks for the stationary tail.
fn tail(cfg: &ExperimentConfig, law: &TailLaw<f64>) -> Result<EstimateRecord> {
    let n = horizon(cfg)?;
    let mc = mc(cfg);
    let est = match (cfg.method, n) {
        (Method::Exact, 1 | 2) => {
            let m = integer_m(cfg)?;
            if cfg.mode != Mode::Size1 {
                return Err(Error::InvalidArgument("exact tails are tabulated for mode size1 only".into()));
            }
            let value = if n == 1 { exact_tail_z1(law, m)? } else { exact_tail_z2(law, m)? };
            TailEstimate {
                value,
                std_error: 0.0,
                reps: 0,
                method: Method::Exact,
                prediction: thm1_prediction(law, n as u64, cfg.m),
                prediction_kind: PredictionKind::Thm1,
                weight_mean: None,
            }
        }
        (Method::Exact, _) => {
            return Err(Error::InvalidArgument(format!("exact tail needs n = 1 or n = 2, got n = {n}")));
        }
        (_, 0) if cfg.mode != Mode::Size1 => {
            return Err(Error::InvalidArgument("the stationary tail (n = 0) needs mode size1".into()));
        }
        (Method::Importance, 0) => estimate_stationary_tail(law, cfg.m, &mc, Proposal::default())?,
        (Method::Crude, 0) => {
            let mut est = estimate_tail_crude(law, burn_in(law, cfg.m)?, cfg.m, Mode::Size1, &mc)?;
            est.prediction = stationary_prediction(law, cfg.m)?;
            est.prediction_kind = PredictionKind::Stationary;
            est
        }
        (Method::Importance, _) => estimate_tail_importance(law, n, cfg.m, cfg.mode, &mc, Proposal::default())?,
        (Method::Crude, _) => estimate_tail_crude(law, n, cfg.m, cfg.mode, &mc)?,
    };
    Ok(EstimateRecord::new(cfg, Some(cfg.mode), &est))
}

/// `n = 0` asks for the stationary perpetuity.
fn perpetuity(cfg: &ExperimentConfig, law: &TailLaw<f64>) -> Result<EstimateRecord> {
    let n = horizon(cfg)?;
    let mc = mc(cfg);
    let hz = if n == 0 { Horizon::Stationary } else { Horizon::Finite(n) };
    let est = match (cfg.method, hz) {
        (Method::Importance, _) => estimate_perpetuity_tail(law, hz, cfg.m, &mc, Proposal::default())?,
        (Method::Crude, Horizon::Finite(n)) => estimate_perpetuity_tail_crude(law, n, cfg.m, &mc)?,
        (Method::Crude, Horizon::Stationary) => {
            let mut est = estimate_perpetuity_tail_crude(law, burn_in(law, cfg.m)?, cfg.m, &mc)?;
            est.prediction = stationary_prediction(law, cfg.m)?;
            est.prediction_kind = PredictionKind::PerpStationary;
            est
        }
        (Method::Exact, Horizon::Finite(1)) => TailEstimate {
            value: law.tail(cfg.m.ln()),
            std_error: 0.0,
            reps: 0,
            method: Method::Exact,
            prediction: finite_horizon_prediction(law, 1, cfg.m)?,
            prediction_kind: PredictionKind::PerpFinite,
            weight_mean: None,
        },
        (Method::Exact, _) => {
            return Err(Error::InvalidArgument("exact perpetuity tail is only available at n = 1".into()));
        }
    };
    Ok(EstimateRecord::new(cfg, None, &est))
}

fn simulate_one(cfg: &ExperimentConfig, law: &TailLaw<f64>) -> Result<Produced> {
    let traj = simulate(law, horizon(cfg)?, cfg.mode, &mut stream(cfg.seed, 0));
    let env = EnvFile { law: cfg.law.clone(), seed: cfg.seed, env: traj.env.clone() };
    let primary = match cfg.format {
        Format::Csv => traj.to_csv(),
        Format::Json => trajectory_json(cfg, &traj)?,
    };
    Ok(Produced { primary, aux: vec![(".env", "environment", env.to_text())], failure: None })
}

fn trajectory_json(cfg: &ExperimentConfig, traj: &Trajectory) -> Result<String> {
    #[derive(Serialize)]
    struct Row {
        step: usize,
        xi: Option<f64>,
        a: Option<f64>,
        z: String,
        approx: bool,
    }
    #[derive(Serialize)]
    struct Doc<'a> {
        law: &'a str,
        n: u64,
        mode: Mode,
        seed: u64,
        steps: Vec<Row>,
    }
    let steps = traj
        .zs
        .iter()
        .enumerate()
        .map(|(k, z)| Row {
            step: k,
            xi: (k > 0).then(|| traj.env.xi(k - 1)),
            a: (k > 0).then(|| traj.env.success(k - 1)),
            z: z.to_string(),
            approx: z.is_approx(),
        })
        .collect();
    let doc = Doc { law: &cfg.law, n: cfg.n, mode: traj.mode, seed: cfg.seed, steps };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

fn rwre_verify(cfg: &ExperimentConfig, law: &TailLaw<f64>) -> Result<Produced> {
    let walks: Vec<WalkOutcome> = collect(&mc(cfg), |rng, _| {
        let env_seed = rng.next_u64();
        simulate_walk(law, cfg.n, env_seed, rng, WalkConfig::default())
    })?;
    let failures = walks.iter().filter(|w| !verify_hitting_identity(w)).count();
    let approx = walks.iter().filter(|w| w.approx).count();
    let primary = match cfg.format {
        Format::Csv => {
            let mut s = format!("{}\n", WalkOutcome::CSV_HEADER);
            for w in &walks {
                writeln!(s, "{}", w.csv_row()).expect("string write");
            }
            s
        }
        Format::Json => {
            let mean_t: f64 =
                walks.iter().map(|w| w.t_n.to_f64().unwrap_or(f64::INFINITY)).sum::<f64>() / walks.len().max(1) as f64;
            let doc = serde_json::json!({
                "law": cfg.law,
                "n": cfg.n,
                "reps": walks.len(),
                "seed": cfg.seed,
                "identity_holds": failures == 0,
                "failures": failures,
                "approx_walks": approx,
                "mean_T_n": mean_t,
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    let failure = (failures > 0).then(|| format!("hitting-time identity failed on {failures} of {} walks", walks.len()));
    Ok(Produced { primary, aux: Vec::new(), failure })
}

fn disteq(cfg: &ExperimentConfig, law: &TailLaw<f64>) -> Result<Produced> {
    let (walks, pops, ks) = disteq_check(law, cfg.n, &mc(cfg), WalkConfig::default())?;
    let (na, nb) = (walks.len() as f64, pops.len() as f64);
    let critical = KS_C_01 * ((na + nb) / (na * nb)).sqrt();
    let primary = match cfg.format {
        Format::Csv => {
            let mut s = String::from("side,value\n");
            for v in &walks {
                writeln!(s, "walk,{v:?}").expect("string write");
            }
            for v in &pops {
                writeln!(s, "branching,{v:?}").expect("string write");
            }
            s
        }
        Format::Json => {
            let doc = serde_json::json!({
                "law": cfg.law,
                "n": cfg.n,
                "reps": cfg.reps,
                "seed": cfg.seed,
                "statistic": ks.statistic,
                "p_value": ks.p_value,
                "critical_01": critical,
                "accept": ks.statistic < critical,
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    Ok(Produced::text(primary))
}

fn psae(cfg: &ExperimentConfig, law: &TailLaw<f64>) -> Result<Produced> {
    let r = psae_conditional_prob(law, horizon(cfg)?, cfg.m, cfg.c, cfg.eps, &mc(cfg), Proposal::default())?;
    let primary = match cfg.format {
        Format::Csv => format!(
            "law,n,m,c,eps,value,se,ci_low,ci_high,hits,reps,seed\n\"{}\",{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{},{},{}\n",
            cfg.law, cfg.n, cfg.m, cfg.c, cfg.eps, r.value, r.std_error, r.ci_low, r.ci_high, r.hits, r.reps, cfg.seed
        ),
        Format::Json => {
            let doc = serde_json::json!({
                "law": cfg.law,
                "n": cfg.n,
                "m": cfg.m,
                "c": cfg.c,
                "eps": cfg.eps,
                "value": r.value,
                "se": r.std_error,
                "ci_low": r.ci_low,
                "ci_high": r.ci_high,
                "hits": r.hits,
                "reps": r.reps,
                "seed": cfg.seed,
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    Ok(Produced::text(primary))
}

/// Probe points for `law-check`.
const LONG_TAIL_XS: [f64; 4] = [10.0, 100.0, 1e3, 1e4];
const SUBEXP_XS: [f64; 3] = [10.0, 100.0, 1e3];
const SQRT_MS: [f64; 4] = [10.0, 100.0, 1e3, 1e4];
const MOMENT_MS: [u64; 4] = [100, 10_000, 1_000_000, 100_000_000];

fn law_check(cfg: &ExperimentConfig, law: &TailLaw<f64>) -> Result<Produced> {
    let mut rows: Vec<(&'static str, f64, f64)> = Vec::new();
    let mut skipped: Vec<String> = Vec::new();
    let mut record = |name: &'static str, xs: &[f64], r: Result<Vec<f64>>| match r {
        Ok(vs) => rows.extend(xs.iter().zip(vs).map(|(&x, v)| (name, x, v))),
        Err(e) => skipped.push(format!("{name}: {e}")),
    };
    record("long_tailed", &LONG_TAIL_XS, law.check_long_tailed(1.0, &LONG_TAIL_XS));
    record("subexponential", &SUBEXP_XS, law.check_subexponential(&SUBEXP_XS));
    record("strong_subexponential", &SUBEXP_XS, law.check_strong_subexponential(&SUBEXP_XS));
    match law.check_sqrt_insensitive(&SQRT_MS) {
        Ok(ps) => {
            for (&m, p) in SQRT_MS.iter().zip(ps) {
                rows.push(("sqrt_ratio", m, p.ratio));
                rows.push(("sqrt_ln_product", m, p.ln_product));
            }
        }
        Err(e) => skipped.push(format!("sqrt_insensitive: {e}")),
    }
    for m in MOMENT_MS {
        let mf = m as f64;
        match law.expected_one_minus_a_pow(m) {
            Ok(v) => rows.push(("moment_ratio", mf, v / law.tail(mf.ln()))),
            Err(e) => skipped.push(format!("moment_ratio at {m}: {e}")),
        }
    }
    let kappa = match law.kesten_kappa() {
        Ok(k) => k,
        Err(Error::HeavyTailed) => None,
        Err(e) => return Err(e),
    };
    let primary = match cfg.format {
        Format::Csv => {
            let mut s = String::from("check,x,value\n");
            for (name, x, v) in &rows {
                writeln!(s, "{name},{x:?},{v:?}").expect("string write");
            }
            s
        }
        Format::Json => {
            let checks: Vec<_> =
                rows.iter().map(|(name, x, v)| serde_json::json!({"check": name, "x": x, "value": v})).collect();
            let doc = serde_json::json!({
                "law": cfg.law,
                "heavy_tailed": law.is_heavy_tailed(),
                "lower_support": law.lower_support(),
                "mean_xi": law.mean_xi().finite(),
                "drift": law.mean_xi().drift(),
                "kappa": kappa,
                "checks": checks,
                "skipped": skipped,
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    Ok(Produced::text(primary))
}

use std::path::{Path, PathBuf};

use polysing::constructor::{self, parse_rational};
use polysing::kelvin::{exterior_growth_check, kelvin_sweep};
use polysing::kernel::kernel_table as exact_kernel_table;
use polysing::potential::{SolutionSpec, Theorem};
use polysing::verify::{
    build_certified, certify_inequality, certify_upper_consistency, certify_violation, check_admissibility, spec_digest, Certificate,
    TargetBound, VerifyConfig,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{resolve_verify, BuildFlags, FileConfig, RunConfig};
use crate::error::CliError;
use crate::output::{fmt17, write_json, Table};

pub struct Context {
    pub out: PathBuf,
    pub file: Option<FileConfig>,
    pub seed: Option<u64>,
}

impl Context {
    fn out_dir(&self) -> PathBuf {
        self.file.as_ref().and_then(|f| f.out_dir.clone()).unwrap_or_else(|| self.out.clone())
    }

    fn verify_config(&self) -> Result<VerifyConfig, CliError> {
        resolve_verify(self.file.as_ref(), self.seed)
    }
}

/// Seed and config digest stamped into every output.
#[derive(Clone, Debug, Serialize)]
struct Provenance {
    command: String,
    seed: u64,
    config_digest: String,
}

impl Provenance {
    fn new<T: Serialize>(command: &str, seed: u64, config: &T) -> Self {
        let bytes = serde_json::to_vec(&json!({ "command": command, "config": config })).expect("config serializes");
        Provenance {
            command: command.to_string(),
            seed,
            config_digest: hex::encode(Sha256::digest(bytes))[..16].to_string(),
        }
    }

    fn line(&self) -> String {
        format!("polysing {} config_digest={} seed={}", self.command, self.config_digest, self.seed)
    }
}

fn read_spec(path: &Path) -> Result<SolutionSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let spec: SolutionSpec = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    spec.validate()?;
    Ok(spec)
}

fn sequence_table(spec: &SolutionSpec) -> Table {
    let mut t = Table::new(vec!["position", "j", "x_norm", "radius", "log_radius", "epsilon", "mass", "log_mass"]);
    for (p, b) in spec.bumps.iter().enumerate() {
        t.push(vec![
            p.to_string(),
            spec.meta.j_indices.get(p).map(u32::to_string).unwrap_or_default(),
            fmt17(b.center_norm()),
            fmt17(b.radius()),
            fmt17(b.log_radius),
            fmt17(b.epsilon),
            fmt17(b.mass()),
            fmt17(b.log_mass),
        ]);
    }
    t
}

/// Every certificate that applies to the spec's construction.
pub fn certify_all(spec: &SolutionSpec, cfg: &VerifyConfig) -> Result<Vec<Certificate>, CliError> {
    let mut certs = vec![check_admissibility(spec), certify_inequality(spec, cfg)?];
    match TargetBound::for_spec(spec) {
        Ok(bound) => certs.push(certify_violation(spec, &bound, cfg)?),
        // an inadmissible λ is already a failed mandatory check in the admissibility certificate
        Err(polysing::Error::Inadmissible(_)) => return Ok(certs),
        Err(e) => return Err(e.into()),
    }
    certs.push(certify_upper_consistency(spec, cfg)?);
    if spec.theorem == Theorem::T1_17 {
        certs.push(exterior_growth_check(spec, cfg)?);
    }
    Ok(certs)
}

fn bundle(certs: &[Certificate], prov: &Provenance) -> Value {
    json!({
        "provenance": prov,
        "overall": certs.iter().all(|c| c.overall),
        "certificates": certs,
    })
}

pub fn construct(ctx: &Context, flags: &BuildFlags, output: Option<PathBuf>) -> Result<bool, CliError> {
    let rc = RunConfig::resolve("construct", flags, ctx.file.as_ref(), ctx.out_dir(), ctx.seed)?;
    let lambda = parse_rational(&rc.lambda)?;
    let (mut spec, cert) = build_certified(rc.theorem, rc.m, rc.n, &lambda, rc.phi(), &rc.build_options(), &rc.verify, rc.max_halvings)?;
    let prov = Provenance::new("construct", rc.seed, &rc);
    spec.meta.notes.push(prov.line());
    let spec_path = output.unwrap_or_else(|| rc.out_dir.join("spec.json"));
    write_json(&spec_path, &spec)?;
    let seq_path = spec_path.with_file_name("sequence.csv");
    sequence_table(&spec).write(&seq_path, &prov.line())?;
    println!(
        "{}: {} bumps, C = {}, A_used = {}, halvings = {}, pointwise inequality {}",
        spec.theorem,
        spec.bumps.len(),
        fmt17(spec.c),
        fmt17(spec.a_used),
        spec.meta.halvings,
        if cert.passed("pointwise-inequality") { "holds" } else { "FAILS" }
    );
    println!("wrote {} and {}", spec_path.display(), seq_path.display());
    Ok(true)
}

pub fn verify(ctx: &Context, spec_path: &Path, output: Option<PathBuf>) -> Result<bool, CliError> {
    let spec = read_spec(spec_path)?;
    let cfg = ctx.verify_config()?;
    let prov = Provenance::new("verify", cfg.seed, &json!({ "verify": cfg, "spec_digest": spec_digest(&spec) }));
    let certs = certify_all(&spec, &cfg)?;
    for c in &certs {
        print!("{}", c.summary());
    }
    let ok = certs.iter().all(|c| c.overall);
    let path = output.unwrap_or_else(|| ctx.out_dir().join("certificates.json"));
    write_json(&path, &bundle(&certs, &prov))?;
    println!("overall {}; wrote {}", if ok { "PASS" } else { "FAIL" }, path.display());
    Ok(ok)
}

pub fn kelvin_check(ctx: &Context, m: u32, n: usize, s_lo: i32, s_hi: i32, spec: Option<PathBuf>) -> Result<bool, CliError> {
    let cfg = ctx.verify_config()?;
    if let Some(path) = spec {
        let spec = read_spec(&path)?;
        let cert = exterior_growth_check(&spec, &cfg)?;
        let prov = Provenance::new("kelvin-check", cfg.seed, &json!({ "verify": cfg, "spec_digest": spec_digest(&spec) }));
        print!("{}", cert.summary());
        let out = ctx.out_dir().join("exterior_growth.json");
        write_json(&out, &bundle(std::slice::from_ref(&cert), &prov))?;
        println!("wrote {}", out.display());
        return Ok(cert.overall);
    }
    if s_lo > s_hi {
        return Err(CliError::Config(format!("empty exponent range [{s_lo}, {s_hi}]")));
    }
    polysing::kernel::ProblemParams::new(m, n)?;
    let prov = Provenance::new("kelvin-check", cfg.seed, &json!({ "m": m, "n": n, "s_lo": s_lo, "s_hi": s_hi }));
    let table = kelvin_table(&[(m, n)], s_lo, s_hi)?;
    let ok = table.rows.iter().all(|r| r[6] == "true");
    let path = ctx.out_dir().join("kelvin_sweep.csv");
    table.write(&path, &prov.line())?;
    println!("{} identities, {} failures; wrote {}", table.rows.len(), table.rows.iter().filter(|r| r[6] != "true").count(), path.display());
    Ok(ok)
}

fn kelvin_table(pairs: &[(u32, usize)], s_lo: i32, s_hi: i32) -> Result<Table, CliError> {
    let mut t = Table::new(vec!["m", "n", "s", "lhs_coefficient", "lhs_exponent", "rhs", "holds"]);
    let show = |p: &Option<(String, i32)>| p.as_ref().map(|(c, e)| format!("{c}*|y|^{e}")).unwrap_or_else(|| "0".into());
    for &(m, n) in pairs {
        for id in kelvin_sweep(m, n, s_lo, s_hi)? {
            t.push(vec![
                m.to_string(),
                n.to_string(),
                id.s.to_string(),
                id.lhs.as_ref().map(|p| p.0.clone()).unwrap_or_else(|| "0".into()),
                id.lhs.as_ref().map(|p| p.1.to_string()).unwrap_or_default(),
                show(&id.rhs),
                id.holds.to_string(),
            ]);
        }
    }
    Ok(t)
}

fn kernel_rows(mmax: u32, nmax: usize) -> Table {
    let mut t = Table::new(vec!["m", "n", "case", "branch", "polyharmonic_exact", "gamma_inf_exact"]);
    for r in exact_kernel_table(mmax, nmax) {
        t.push(vec![
            r.m.to_string(),
            r.n.to_string(),
            format!("{:?}", r.case),
            format!("{:?}", r.branch),
            r.polyharmonic_exact.to_string(),
            r.gamma_inf_exact.to_string(),
        ]);
    }
    t
}

pub fn kernel_table(ctx: &Context, mmax: u32, nmax: usize) -> Result<bool, CliError> {
    if mmax == 0 || nmax < 2 {
        return Err(CliError::Config(format!("need mmax ≥ 1 and nmax ≥ 2, got {mmax}, {nmax}")));
    }
    let prov = Provenance::new("kernel-table", 0, &json!({ "mmax": mmax, "nmax": nmax }));
    let t = kernel_rows(mmax, nmax);
    let ok = t.rows.iter().all(|r| r[4] == "true");
    let bytes = t.to_csv(&prov.line())?;
    print!("{}", String::from_utf8_lossy(&bytes));
    let path = ctx.out_dir().join("kernel_table.csv");
    t.write(&path, &prov.line())?;
    eprintln!("wrote {}", path.display());
    Ok(ok)
}

/// The reference configuration of each construction.
pub const REFERENCE: [(Theorem, u32, usize, &str); 6] = [
    (Theorem::T1_5, 3, 7, "3"),
    (Theorem::T1_6, 3, 7, "7"),
    (Theorem::T1_8, 3, 6, "3"),
    (Theorem::T1_10, 3, 6, "1/2"),
    (Theorem::T1_11, 3, 6, "1"),
    (Theorem::T1_17, 3, 7, "2"),
];

struct Job {
    theorem: Theorem,
    spec: SolutionSpec,
    certs: Vec<Certificate>,
}

fn run_job(theorem: Theorem, m: u32, n: usize, lambda: &str, cfg: &VerifyConfig, dir: &Path, prov: &Provenance) -> Result<Job, CliError> {
    let lambda = parse_rational(lambda)?;
    let opts = constructor::BuildOptions {
        quadrature: cfg.quadrature.clone(),
        ..Default::default()
    };
    let (mut spec, _) = build_certified(theorem, m, n, &lambda, constructor::default_phi(theorem), &opts, cfg, 6)?;
    spec.meta.notes.push(prov.line());
    let certs = certify_all(&spec, cfg)?;
    let jd = dir.join(theorem.to_string());
    write_json(&jd.join("spec.json"), &spec)?;
    write_json(&jd.join("certificates.json"), &bundle(&certs, prov))?;
    sequence_table(&spec).write(&jd.join("sequence.csv"), &prov.line())?;
    ratio_table(&certs).write(&jd.join("ratios.csv"), &prov.line())?;
    Ok(Job { theorem, spec, certs })
}

fn ratio_table(certs: &[Certificate]) -> Table {
    let mut t = Table::new(vec!["position", "j", "x_norm", "u", "background", "log_bound", "log_ratio"]);
    let rows = certs
        .iter()
        .find_map(|c| c.check("ratio-table"))
        .and_then(|c| c.evidence["rows"].as_array().cloned())
        .unwrap_or_default();
    let num = |v: &Value| v.as_f64().map(fmt17).unwrap_or_default();
    for r in rows {
        t.push(vec![
            r["position"].to_string(),
            r["j"].to_string(),
            num(&r["x_norm"]),
            num(&r["u"]),
            num(&r["background"]),
            num(&r["log_bound"]),
            num(&r["log_ratio"]),
        ]);
    }
    t
}

/// Builds and certifies every reference construction concurrently. Completes with
/// status 0 even when checks fail: the bundle records every verdict.
pub fn report(ctx: &Context) -> Result<bool, CliError> {
    let cfg = ctx.verify_config()?;
    let dir = ctx.out_dir().join("report");
    let prov = Provenance::new("report", cfg.seed, &json!({ "verify": cfg, "reference": REFERENCE.map(|r| (r.0, r.1, r.2, r.3)) }));
    let jobs: Vec<Result<Job, CliError>> = REFERENCE.par_iter().map(|&(t, m, n, l)| run_job(t, m, n, l, &cfg, &dir, &prov)).collect();
    let jobs: Vec<Job> = jobs.into_iter().collect::<Result<_, _>>()?;

    let kernels = kernel_rows(5, 12);
    kernels.write(&dir.join("kernel_table.csv"), &prov.line())?;
    let kelvin = kelvin_table(&[(1, 3), (3, 6), (3, 7), (3, 8), (5, 10)], -9, 9)?;
    kelvin.write(&dir.join("kelvin_sweep.csv"), &prov.line())?;

    let mut checks = Table::new(vec!["construction", "certificate", "check", "verdict", "mandatory"]);
    let mut slopes = Table::new(vec!["construction", "fit", "slope", "stderr", "expected"]);
    for job in &jobs {
        for c in &job.certs {
            for ch in &c.checks {
                checks.push(vec![job.theorem.to_string(), c.title.clone(), ch.name.clone(), ch.verdict.to_string(), ch.mandatory.to_string()]);
            }
            for (name, exp_key) in [("center-slope", "expected"), ("exterior-slope", "b")] {
                if let Some(ch) = c.check(name) {
                    let num = |k: &str| ch.evidence[k].as_f64().map(fmt17).unwrap_or_default();
                    slopes.push(vec![job.theorem.to_string(), name.to_string(), num("slope"), num("stderr"), num(exp_key)]);
                }
            }
        }
    }
    checks.write(&dir.join("checks.csv"), &prov.line())?;
    slopes.write(&dir.join("slopes.csv"), &prov.line())?;

    let summary: Vec<Value> = jobs
        .iter()
        .map(|j| {
            json!({
                "construction": j.theorem,
                "spec_digest": spec_digest(&j.spec),
                "bumps": j.spec.bumps.len(),
                "overall": j.certs.iter().all(|c| c.overall),
                "failed": j.certs.iter().flat_map(|c| c.failed().into_iter().map(move |f| format!("{}/{f}", c.title))).collect::<Vec<_>>(),
            })
        })
        .collect();
    write_json(
        &dir.join("report.json"),
        &json!({
            "provenance": prov,
            "kernel_table_all_exact": kernels.rows.iter().all(|r| r[4] == "true"),
            "kelvin_sweep_all_hold": kelvin.rows.iter().all(|r| r[6] == "true"),
            "constructions": summary,
        }),
    )?;
    for s in &summary {
        println!("{:<6} {}  failed: {}", s["construction"].as_str().unwrap_or("?"), if s["overall"] == true { "PASS" } else { "FAIL" }, s["failed"]);
    }
    println!("wrote {}", dir.display());
    Ok(true)
}

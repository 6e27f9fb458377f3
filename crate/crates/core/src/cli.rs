//! Command-line front end: grid evaluation to CSV and the identity suite
//! to a JSON report.
//!
//! The configuration is a flat `key = value` document; `#` starts a
//! comment. Complex numbers are written `a+bi`, lists are comma separated.
//!
//! ```text
//! E1 = -1+2i
//! F1 = -1-2i
//! p = 0
//! q = 0.2i
//! rho_min = 0.2
//! rho_max = 3
//! zeta_min = -2
//! zeta_max = 2
//! n_rho = 20
//! n_zeta = 20
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use rayon::prelude::*;
use serde::Serialize;

use crate::ernst::ErnstSolution;
use crate::error::{Error, Result};
use crate::metric::{self, Mask, MetricConstants};
use crate::periods::PeriodOptions;
use crate::theta::Characteristics;
use crate::verify::{self, CheckReport, SuiteConfig};
use crate::C64;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_TOLERANCE: i32 = 2;

pub const CSV_HEADER: &str = "rho,zeta,re_E,im_E,e2U,A,k,ernst_residual,mask";

#[derive(Parser, Debug, Clone, Default)]
#[command(
    name = "ernst-theta",
    version,
    about = "Theta-functional Ernst solutions: grid evaluation and identity checks"
)]
pub struct Args {
    /// Configuration document.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Run the identity suite and write a JSON report.
    #[arg(long)]
    pub check: bool,
    /// Run a single named check (implies --check).
    #[arg(long, value_name = "NAME")]
    pub only: Option<String>,
    /// Evaluate the potential and metric on the configured grid.
    #[arg(long)]
    pub grid: bool,
    /// Override the algebraic tolerance and the grid residual threshold.
    #[arg(long, value_name = "X")]
    pub tolerance: Option<f64>,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Output path: the CSV for --grid, otherwise the JSON report.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Worker threads; falls back to ERNST_THETA_THREADS, then to the
    /// available parallelism.
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
}

/// A parsed configuration document.
#[derive(Debug, Clone, PartialEq)]
pub struct JobConfig {
    pub pairs: Vec<(C64, C64)>,
    pub characteristics: Option<Characteristics>,
    pub rho_min: f64,
    pub rho_max: f64,
    pub zeta_min: f64,
    pub zeta_max: f64,
    pub n_rho: usize,
    pub n_zeta: usize,
    pub theta_tol: f64,
    pub alg_tol: Option<f64>,
    pub fd_tol: f64,
    pub fd_step: f64,
    pub residual_tol: f64,
    pub constants: MetricConstants,
    pub seed: u64,
    pub genus: usize,
    pub samples: usize,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl Default for JobConfig {
    fn default() -> Self {
        JobConfig {
            pairs: Vec::new(),
            characteristics: None,
            rho_min: 0.1,
            rho_max: 2.0,
            zeta_min: -2.0,
            zeta_max: 2.0,
            n_rho: 20,
            n_zeta: 20,
            theta_tol: 1e-14,
            alg_tol: None,
            fd_tol: verify::FD_TOL,
            fd_step: verify::FD_STEP,
            residual_tol: 1e-7,
            constants: MetricConstants::default(),
            seed: 42,
            genus: 1,
            samples: 5,
            out: None,
            report: None,
        }
    }
}

/// Parses `a+bi`, `a`, `bi`, `-i` and the like.
pub fn parse_complex(s: &str) -> Result<C64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::ConfigParse(format!("invalid complex number `{s}`"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|x| C64::new(x, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("", body),
    };
    let re = if re.is_empty() {
        0.0
    } else {
        re.parse::<f64>().map_err(|_| bad())?
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(C64::new(re, im))
}

fn parse_list(s: &str) -> Result<Vec<C64>> {
    s.split(',').map(parse_complex).collect()
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::ConfigParse(format!("invalid value `{v}` for `{key}`")))
}

/// Parses a configuration document and validates it.
pub fn parse_config(text: &str) -> Result<JobConfig> {
    let mut cfg = JobConfig::default();
    let mut ends: BTreeMap<usize, (Option<C64>, Option<C64>)> = BTreeMap::new();
    let (mut p, mut q) = (None, None);
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::ConfigParse(format!("line {}: expected `key = value`", no + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        let index = |prefix: &str| -> Option<usize> { key.strip_prefix(prefix).and_then(|n| n.parse().ok()) };
        match key {
            "p" => p = Some(parse_list(value)?),
            "q" => q = Some(parse_list(value)?),
            "rho_min" => cfg.rho_min = parse_num(key, value)?,
            "rho_max" => cfg.rho_max = parse_num(key, value)?,
            "zeta_min" => cfg.zeta_min = parse_num(key, value)?,
            "zeta_max" => cfg.zeta_max = parse_num(key, value)?,
            "n_rho" => cfg.n_rho = parse_num(key, value)?,
            "n_zeta" => cfg.n_zeta = parse_num(key, value)?,
            "theta_tol" => cfg.theta_tol = parse_num(key, value)?,
            "alg_tol" => cfg.alg_tol = Some(parse_num(key, value)?),
            "fd_tol" => cfg.fd_tol = parse_num(key, value)?,
            "fd_step" => cfg.fd_step = parse_num(key, value)?,
            "residual_tol" => cfg.residual_tol = parse_num(key, value)?,
            "A0" | "a0" => cfg.constants.a0 = parse_num(key, value)?,
            "K" | "k" => cfg.constants.k = parse_num(key, value)?,
            "seed" => cfg.seed = parse_num(key, value)?,
            "genus" => cfg.genus = parse_num(key, value)?,
            "samples" => cfg.samples = parse_num(key, value)?,
            "out" => cfg.out = Some(PathBuf::from(value)),
            "report" => cfg.report = Some(PathBuf::from(value)),
            _ => {
                if let Some(m) = index("E") {
                    ends.entry(m).or_default().0 = Some(parse_complex(value)?);
                } else if let Some(m) = index("F") {
                    ends.entry(m).or_default().1 = Some(parse_complex(value)?);
                } else {
                    return Err(Error::ConfigParse(format!("line {}: unknown key `{key}`", no + 1)));
                }
            }
        }
    }
    for (i, (m, (e, f))) in ends.into_iter().enumerate() {
        if m != i + 1 {
            return Err(Error::ConfigParse(format!("branch point pairs must be numbered 1..g, found {m}")));
        }
        match (e, f) {
            (Some(e), Some(f)) => cfg.pairs.push((e, f)),
            _ => return Err(Error::ConfigParse(format!("pair {m} needs both E{m} and F{m}"))),
        }
    }
    if !cfg.pairs.is_empty() {
        cfg.genus = cfg.pairs.len();
    }
    let g = cfg.genus;
    if p.is_some() || q.is_some() {
        if cfg.pairs.is_empty() {
            return Err(Error::ConfigParse("characteristics given without branch points".into()));
        }
        let zero = vec![C64::new(0.0, 0.0); g];
        let (p, q) = (p.unwrap_or_else(|| zero.clone()), q.unwrap_or(zero));
        if p.len() != g || q.len() != g {
            return Err(Error::ConfigParse(format!("p and q need {g} entries")));
        }
        cfg.characteristics = Some(Characteristics { p, q });
    }
    cfg.validate()?;
    Ok(cfg)
}

impl JobConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::ConfigParse(m.to_string()));
        if !(self.rho_min > 0.0) {
            return err("rho_min must be positive");
        }
        if !(self.rho_max >= self.rho_min) || !(self.zeta_max >= self.zeta_min) {
            return err("grid bounds must satisfy min <= max");
        }
        if self.n_rho == 0 || self.n_zeta == 0 {
            return err("n_rho and n_zeta must be at least 1");
        }
        let tols = [
            self.theta_tol,
            self.fd_tol,
            self.fd_step,
            self.residual_tol,
            self.alg_tol.unwrap_or(1.0),
        ];
        if tols.iter().any(|t| !(*t > 0.0)) {
            return err("tolerances must be positive");
        }
        if self.genus == 0 {
            return err("genus must be at least 1");
        }
        if !self.constants.k.is_finite() || self.constants.k <= 0.0 || !self.constants.a0.is_finite() {
            return err("K must be positive and A0 finite");
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::ConfigParse(format!("cannot read {}: {e}", path.display())))?;
        parse_config(&text)
    }

    pub fn solution(&self) -> Result<ErnstSolution> {
        if self.pairs.is_empty() {
            return Err(Error::ConfigParse("no branch point pairs (E1, F1, ...) given".into()));
        }
        let ch = self
            .characteristics
            .clone()
            .unwrap_or_else(|| Characteristics::zero(self.pairs.len()));
        Ok(ErnstSolution::new(&self.pairs, ch)?.with_options(PeriodOptions::default(), self.theta_tol))
    }

    fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![lo];
        }
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    pub fn rho_axis(&self) -> Vec<f64> {
        Self::axis(self.rho_min, self.rho_max, self.n_rho)
    }

    pub fn zeta_axis(&self) -> Vec<f64> {
        Self::axis(self.zeta_min, self.zeta_max, self.n_zeta)
    }

    pub fn suite(&self, only: Option<String>) -> SuiteConfig {
        SuiteConfig {
            seed: self.seed,
            genus: self.genus,
            samples: self.samples,
            alg_tol: self.alg_tol,
            fd_tol: self.fd_tol,
            fd_step: self.fd_step,
            theta_tol: self.theta_tol,
            solution: if self.pairs.is_empty() {
                None
            } else {
                Some((
                    self.pairs.clone(),
                    self.characteristics.clone().unwrap_or_else(|| Characteristics::zero(self.genus)),
                ))
            },
            only,
        }
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRow {
    pub rho: f64,
    pub zeta: f64,
    pub e: C64,
    pub e2u: f64,
    pub a: f64,
    pub k: f64,
    pub ernst_residual: f64,
    pub mask: Mask,
}

fn eval_point(sol: &ErnstSolution, cfg: &JobConfig, rho: f64, zeta: f64) -> GridRow {
    let nan = f64::NAN;
    let masked = |mask| GridRow {
        rho,
        zeta,
        e: C64::new(nan, nan),
        e2u: nan,
        a: nan,
        k: nan,
        ernst_residual: nan,
        mask,
    };
    let xi = C64::new(zeta, -rho);
    let pt = match sol.at(xi) {
        Ok(p) => p,
        Err(e) => return masked(Mask::from_error(&e)),
    };
    let run = || -> Result<GridRow> {
        let e = pt.value()?.e;
        let v = metric::metric_values(sol, xi, cfg.constants);
        if v.mask != Mask::Regular {
            return Ok(masked(v.mask));
        }
        Ok(GridRow {
            rho,
            zeta,
            e,
            e2u: v.e2u,
            a: v.a,
            k: v.k,
            ernst_residual: pt.ernst_residual()?,
            mask: Mask::Regular,
        })
    };
    run().unwrap_or_else(|e| masked(Mask::from_error(&e)))
}

/// Reality check at the first grid point where the curve can be built.
fn probe_reality(sol: &ErnstSolution, cfg: &JobConfig) -> Result<()> {
    for &rho in &cfg.rho_axis() {
        for &zeta in &cfg.zeta_axis() {
            match sol.at(C64::new(zeta, -rho)) {
                Ok(_) => return Ok(()),
                Err(e @ Error::RealityViolation(_)) => return Err(e),
                Err(_) => {}
            }
        }
    }
    Ok(())
}

/// Evaluates the grid, `ρ` outer and `ζ` inner. Rows are computed in
/// parallel and returned in grid order.
pub fn run_grid(cfg: &JobConfig) -> Result<Vec<GridRow>> {
    let sol = cfg.solution()?;
    probe_reality(&sol, cfg)?;
    let zetas = cfg.zeta_axis();
    let rows: Vec<Vec<GridRow>> = cfg
        .rho_axis()
        .par_iter()
        .map(|&rho| zetas.iter().map(|&zeta| eval_point(&sol, cfg, rho, zeta)).collect())
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn csv_string(rows: &[GridRow]) -> String {
    let mut s = String::with_capacity(rows.len() * 200);
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let cols = [r.rho, r.zeta, r.e.re, r.e.im, r.e2u, r.a, r.k, r.ernst_residual];
        let line: Vec<String> = cols.iter().map(|&x| fmt_f64(x)).collect();
        let _ = writeln!(s, "{},{}", line.join(","), r.mask as u8);
    }
    s
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub seed: u64,
    pub genus: usize,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<CheckReport>,
}

pub fn run_checks(cfg: &JobConfig, only: Option<String>) -> Report {
    let checks = verify::run_suite(&cfg.suite(only));
    let passed = checks.iter().filter(|c| c.pass).count();
    Report {
        seed: cfg.seed,
        genus: cfg.genus,
        passed,
        failed: checks.len() - passed,
        checks,
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::ConfigParse(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| Error::ConfigParse(format!("cannot write output: {e}")))
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    if let Some(n) = flag {
        return Ok(Some(n));
    }
    match std::env::var("ERNST_THETA_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::ConfigParse(format!("invalid ERNST_THETA_THREADS `{v}`"))),
        Err(_) => Ok(None),
    }
}

fn execute(args: &Args) -> Result<i32> {
    let mut cfg = match &args.config {
        Some(p) => JobConfig::load(p)?,
        None => JobConfig::default(),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(t) = args.tolerance {
        cfg.alg_tol = Some(t);
        cfg.residual_tol = t;
    }
    cfg.validate()?;
    if let Some(n) = &args.only {
        if !verify::CHECK_NAMES.contains(&n.as_str()) {
            return Err(Error::ConfigParse(format!(
                "unknown check `{n}`; known: {}",
                verify::CHECK_NAMES.join(", ")
            )));
        }
    }
    let check = args.check || args.only.is_some();
    let grid = args.grid || !check;

    let mut code = EXIT_OK;
    if grid {
        let start = Instant::now();
        let rows = run_grid(&cfg)?;
        let csv = csv_string(&rows);
        write_output(args.out.as_deref().or(cfg.out.as_deref()), &csv)?;
        let regular: Vec<_> = rows.iter().filter(|r| r.mask == Mask::Regular).collect();
        let worst = regular.iter().map(|r| r.ernst_residual).fold(0.0, f64::max);
        eprintln!(
            "grid: {} points, {} masked, max residual {worst:.3e}, {:.2}s",
            rows.len(),
            rows.len() - regular.len(),
            start.elapsed().as_secs_f64()
        );
        if worst > cfg.residual_tol {
            code = EXIT_TOLERANCE;
        }
    }
    if check {
        let report = run_checks(&cfg, args.only.clone());
        let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
        let path = if grid {
            cfg.report.as_deref()
        } else {
            args.out.as_deref().or(cfg.report.as_deref())
        };
        write_output(path, &json)?;
        eprintln!("checks: {} passed, {} failed", report.passed, report.failed);
        for c in report.checks.iter().filter(|c| !c.pass) {
            eprintln!(
                "  FAIL {} residual {:.3e} tolerance {:.1e}{}",
                c.name,
                c.residual,
                c.tolerance,
                c.error.as_ref().map(|e| format!(" ({e})")).unwrap_or_default()
            );
        }
        if report.failed > 0 {
            code = EXIT_TOLERANCE;
        }
    }
    Ok(code)
}

/// Runs the command line and returns the process exit code.
pub fn run(args: &Args) -> i32 {
    let threads = match thread_count(args.threads) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    match pool.install(|| execute(args)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn complex_literals() {
        let cases = [
            ("1.5", c(1.5, 0.0)),
            ("-2", c(-2.0, 0.0)),
            ("2i", c(0.0, 2.0)),
            ("-i", c(0.0, -1.0)),
            ("i", c(0.0, 1.0)),
            ("-1+2i", c(-1.0, 2.0)),
            ("-1 - 2i", c(-1.0, -2.0)),
            ("1e-3+2.5e-1i", c(1e-3, 0.25)),
            ("3-1E+2i", c(3.0, -100.0)),
            ("0.5-i", c(0.5, -1.0)),
        ];
        for (s, want) in cases {
            assert_eq!(parse_complex(s).unwrap(), want, "{s}");
        }
        for bad in ["", "abc", "1+2j", "1++2i"] {
            assert!(matches!(parse_complex(bad), Err(Error::ConfigParse(_))), "{bad}");
        }
    }

    #[test]
    fn config_document() {
        let text = "# two pairs\nE1 = -1+2i\nF1 = -1-2i\nE2 = 1.5\nF2 = 2.5\np = 0, 0\nq = 0.2i, 0.25-0.1i\n\
                    rho_min = 0.2\nn_rho = 3\nn_zeta = 4 # trailing comment\nA0 = 1.5\nK = 2\nseed = 7\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.pairs, vec![(c(-1.0, 2.0), c(-1.0, -2.0)), (c(1.5, 0.0), c(2.5, 0.0))]);
        assert_eq!(cfg.genus, 2);
        let ch = cfg.characteristics.as_ref().unwrap();
        assert_eq!(ch.q, vec![c(0.0, 0.2), c(0.25, -0.1)]);
        assert_eq!((cfg.n_rho, cfg.n_zeta, cfg.seed), (3, 4, 7));
        assert_eq!(cfg.constants.a0, 1.5);
        assert_eq!(cfg.rho_axis().len(), 3);
        assert_eq!(cfg.zeta_axis(), vec![-2.0, -2.0 + 4.0 / 3.0, -2.0 + 8.0 / 3.0, 2.0]);
    }

    #[test]
    fn config_errors() {
        for text in [
            "rho_min = 0\n",
            "rho_min = -1\n",
            "n_rho = 0\n",
            "E1 = 1+i\n",
            "E2 = 1\nF2 = 2\n",
            "bogus = 1\n",
            "no equals sign\n",
            "fd_tol = 0\n",
            "p = 0.5\n",
            "E1 = 1+i\nF1 = 1-i\np = 0, 0\n",
        ] {
            assert!(matches!(parse_config(text), Err(Error::ConfigParse(_))), "{text:?}");
        }
    }

    #[test]
    fn flat_grid() {
        let cfg =
            parse_config("E1 = -1+2i\nF1 = -1-2i\nrho_min = 0.3\nrho_max = 2\nzeta_min = -1.7\nzeta_max = 1.9\nn_rho = 5\nn_zeta = 5\n")
                .unwrap();
        let rows = run_grid(&cfg).unwrap();
        assert_eq!(rows.len(), 25);
        for r in &rows {
            assert_eq!(r.mask, Mask::Regular);
            assert!((r.e - 1.0).norm() < 1e-12);
            assert!(r.k.abs() < 1e-12 && r.ernst_residual < 1e-10);
            assert!((r.a - rows[0].a).abs() < 1e-10);
        }
        let csv = csv_string(&rows);
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), 26);
        let first: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(first.len(), 9);
        assert_eq!(first[0], "2.9999999999999999e-1");
        assert_eq!(first[0].parse::<f64>().unwrap(), 0.3);
    }

    #[test]
    fn reality_violation_is_a_setup_error() {
        let text = "E1 = -1+2i\nF1 = -1-2i\np = 0.3i\nq = 0.2\nn_rho = 2\nn_zeta = 2\n";
        let cfg = parse_config(text).unwrap();
        assert!(matches!(run_grid(&cfg), Err(Error::RealityViolation(_))));
    }
}

//! `catmap verify`: invariant suites with a JSON pass/fail summary.

use std::io::Write;

use catmap::arith::{gcd_bound_check, n_prime, n_prime_oracle, order_mod, quantum_period};
use catmap::evenperiod::{default_scan_js, half_period_checks, quarter_turn_check, vanishing_scan, EvenData};
use catmap::heisenberg::{build_propagator, egorov_defect, gauss_sweep, EGOROV_TOL, UNITARITY_TOL};
use catmap::io::Header;
use catmap::{Branch, CatMap, FourierMode};
use num_bigint::BigInt;
use serde::Serialize;

use crate::commands::{open_out, write_json};
use crate::config::{Common, Suite};
use crate::error::{CliError, CliResult};

pub const DEFAULT_N: usize = 989;
pub const DEFAULT_GAUSS_N: usize = 265;
pub const DEFAULT_K: u64 = 6;
pub const DEFAULT_Q_MAX: u64 = 60;
const EGOROV_RADIUS: i64 = 5;
const GAUSS_R_MAX: u64 = 8;
const STRUCTURE_SAMPLES: usize = 64;
const QUARTER_SAMPLES: usize = 16;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub passed: bool,
    pub failures: usize,
    pub checks: Vec<CheckResult>,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyParams {
    pub n: Option<usize>,
    pub k: u64,
    pub q_max: u64,
}

fn record<F>(out: &mut Vec<CheckResult>, suite: &'static str, name: &str, check: F)
where
    F: FnOnce() -> Result<(bool, String), catmap::Error>,
{
    let (pass, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
    out.push(CheckResult {
        suite,
        name: name.into(),
        pass,
        detail,
    });
}

fn arith(map: &CatMap, q_max: u64, out: &mut Vec<CheckResult>) {
    record(out, "arith", "closed form equals oracle", || {
        let bad: Vec<u64> = (1..=q_max)
            .filter(|&q| n_prime(map, q) != n_prime_oracle(map, q))
            .collect();
        Ok((bad.is_empty(), format!("q <= {q_max}, mismatches {bad:?}")))
    });
    record(out, "arith", "order of N'_q is q", || {
        let mut bad = Vec::new();
        for q in 1..=q_max {
            if order_mod(map, &n_prime(map, q), None)? != q {
                bad.push(q);
            }
        }
        Ok((bad.is_empty(), format!("q <= {q_max}, mismatches {bad:?}")))
    });
    record(out, "arith", "gcd identity", || {
        let mut pairs = 0u64;
        let mut bad = 0u64;
        for t in 2..=q_max {
            for r in 1..t {
                let g = gcd_bound_check(map, t, r)?;
                pairs += 1;
                bad += u64::from(!(g.holds && g.divides));
            }
        }
        Ok((bad == 0, format!("{pairs} pairs (r, t), {bad} failures")))
    });
}

fn unitarity(map: &CatMap, n: usize, out: &mut Vec<CheckResult>) {
    record(out, "unitarity", &format!("N = {n}"), || {
        let p = build_propagator(map, n)?;
        let d = if n <= 2048 {
            p.unitarity_defect()
        } else {
            p.sampled_unitarity_defect(16)
        };
        Ok((d <= UNITARITY_TOL, format!("max |M*M - I| = {d:e}")))
    });
}

fn egorov(map: &CatMap, n: usize, out: &mut Vec<CheckResult>) {
    record(out, "egorov", &format!("N = {n}"), || {
        let p = build_propagator(map, n)?;
        let worst = FourierMode::square(EGOROV_RADIUS)
            .map(|m| egorov_defect(&p, m))
            .fold(0.0, f64::max);
        Ok((
            worst <= EGOROV_TOL,
            format!("max defect over |m| <= {EGOROV_RADIUS}: {worst:e}"),
        ))
    });
}

fn gauss(map: &CatMap, n: usize, out: &mut Vec<CheckResult>) {
    record(out, "gauss", &format!("N = {n}"), || {
        let p = build_propagator(map, n)?;
        let js: Vec<usize> = (0..n).collect();
        let s = gauss_sweep(&p, GAUSS_R_MAX, &[FourierMode::ZERO, FourierMode::new(1, 0)], &js);
        Ok((
            s.violations.is_empty(),
            format!(
                "{} entries, {} violations, min margin {:e}",
                s.checked,
                s.violations.len(),
                s.worst_margin
            ),
        ))
    });
}

fn spaced(n: usize, count: usize) -> Vec<usize> {
    let count = count.min(n).max(1);
    (0..count).map(|i| i * n / count).collect()
}

fn structure(map: &CatMap, k: u64, out: &mut Vec<CheckResult>) {
    let setup = EvenData::new(map, k).and_then(|d| Ok((d, build_propagator(map, d.n)?)));
    let (data, p) = match setup {
        Ok(v) => v,
        Err(e) => return record(out, "structure", &format!("k = {k}"), || Err(e)),
    };
    let js = spaced(data.n, STRUCTURE_SAMPLES);
    record(out, "structure", "half period", || {
        let checks = half_period_checks(&p, k, &js)?;
        let worst = checks.iter().map(|h| h.leakage).fold(0.0, f64::max);
        Ok((
            true,
            format!("N = {}, {} columns, worst leakage {worst:e}", data.n, checks.len()),
        ))
    });
    record(out, "structure", "quarter turn", || {
        let qp = quantum_period(map, &BigInt::from(data.n))?;
        if qp.branch != Branch::Even4k {
            return Ok((true, format!("branch {}, not applicable", qp.branch)));
        }
        let checks = quarter_turn_check(&p, k, &js[..QUARTER_SAMPLES.min(js.len())])?;
        let worst = checks.iter().map(|q| q.leakage).fold(0.0, f64::max);
        Ok((true, format!("{} columns, worst leakage {worst:e}", checks.len())))
    });
}

fn vanishing(map: &CatMap, k: u64, out: &mut Vec<CheckResult>) {
    record(out, "vanishing", &format!("k = {k}"), || {
        let data = EvenData::new(map, k)?;
        let qp = quantum_period(map, &BigInt::from(data.n))?;
        if qp.branch != Branch::Even4k {
            return Ok((true, format!("branch {}, not applicable", qp.branch)));
        }
        let p = build_propagator(map, data.n)?;
        let sigmas: Vec<i64> = (0..4).collect();
        let r = vanishing_scan(&p, k, &default_scan_js(&data), &sigmas)?;
        Ok((
            r.checks.all(),
            format!(
                "j=0 outcomes {:?}, gcd(a_k-1,p_k) = {}, N'_k = {}, vanishing j {}",
                r.sigma_outcomes,
                r.gcd_a_minus_one_p,
                r.n_prime_k,
                r.vanishing_js.len()
            ),
        ))
    });
}

pub fn run_suites(map: &CatMap, suite: Suite, params: &VerifyParams) -> Summary {
    let mut checks = Vec::new();
    let wants = |s: Suite| suite == Suite::All || suite == s;
    if wants(Suite::Arith) {
        arith(map, params.q_max, &mut checks);
    }
    if wants(Suite::Unitarity) {
        unitarity(map, params.n.unwrap_or(DEFAULT_N), &mut checks);
    }
    if wants(Suite::Egorov) {
        egorov(map, params.n.unwrap_or(DEFAULT_N), &mut checks);
    }
    if wants(Suite::Gauss) {
        gauss(map, params.n.unwrap_or(DEFAULT_GAUSS_N), &mut checks);
    }
    if wants(Suite::Structure) {
        structure(map, params.k, &mut checks);
    }
    if wants(Suite::Vanishing) {
        vanishing(map, params.k, &mut checks);
    }
    let failures = checks.iter().filter(|c| !c.pass).count();
    Summary {
        passed: failures == 0,
        failures,
        checks,
    }
}

pub fn verify(c: &Common, suite: Suite, params: &VerifyParams) -> CliResult<()> {
    let summary = run_suites(&c.map, suite, params);
    let mut header = Header::new("verify", &c.map)
        .param("suite", format!("{suite:?}").to_lowercase())
        .param("k", params.k)
        .param("q_max", params.q_max);
    if let Some(n) = params.n {
        header = header.param("n", n);
    }
    let mut w = open_out(c.out.as_deref())?;
    write_json(&mut w, &header, &summary)?;
    w.flush()?;
    if summary.passed {
        Ok(())
    } else {
        Err(CliError::Invariant(format!(
            "{} of {} checks failed",
            summary.failures,
            summary.checks.len()
        )))
    }
}

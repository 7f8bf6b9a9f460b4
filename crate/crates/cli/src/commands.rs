use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use catmap::arith::{matrix_power, n_prime_oracle, period_records};
use catmap::diagnostics::{equidist_report, smoothed_wigner, WignerParams};
use catmap::evenperiod::{default_scan_js, support_threshold, vanishing_scan_with, EvenData};
use catmap::heisenberg::{build_propagator, egorov_defect, QuantumState, EGOROV_TOL, UNITARITY_TOL};
use catmap::io::Header;
use catmap::states::{
    coordinate_profile, eigen_residual, family_modulus, normalize, projector_state, vanish_tol, write_profile_csv,
    EIGEN_TOL,
};
use catmap::{CatMap, FourierMode, ProjectorSpec, Propagator};
use num_bigint::BigInt;
use serde::Serialize;

use crate::config::{Common, Format, StateSettings};
use crate::error::{CliError, CliResult};

pub const DEFAULT_Q_MAX: u64 = 24;
pub const DEFAULT_CUTOFF: i64 = 3;
pub const DEFAULT_GRID: usize = 256;
const VERIFY_MODE_RADIUS: i64 = 2;

/// Buffered writer on `path`, or on stdout.
pub fn open_out(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| CliError::Other(format!("cannot create {}: {e}", p.display())))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn format_or(c: &Common, fallback: Format, allowed: &[Format]) -> CliResult<Format> {
    let f = c.format.unwrap_or(fallback);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(CliError::Config(format!(
            "format {f:?} is not available for this command"
        )))
    }
}

/// `{"header": …, "data": …}` followed by a newline.
pub fn write_json<W: Write + ?Sized, T: Serialize>(w: &mut W, header: &Header, data: &T) -> CliResult<()> {
    let doc = serde_json::json!({ "header": header.to_json(), "data": data });
    serde_json::to_writer_pretty(&mut *w, &doc)?;
    writeln!(w)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct PeriodRow {
    q: u64,
    p: String,
    n_prime: String,
    order: u64,
    period: u64,
    branch: catmap::Branch,
}

pub fn periods(c: &Common, q_max: u64) -> CliResult<()> {
    if q_max == 0 {
        return Err(CliError::Config("--q-max must be at least 1".into()));
    }
    let format = format_or(c, Format::Csv, &[Format::Csv, Format::Json])?;
    let records = period_records(&c.map, q_max, c.cache_path.as_deref())?;
    if c.verify {
        for r in &records {
            let oracle = n_prime_oracle(&c.map, r.q);
            let power = matrix_power(&c.map, r.q, Some(&r.n_prime));
            if oracle != r.n_prime || !power.is_identity_mod(&r.n_prime) || r.order != r.q {
                return Err(CliError::Invariant(format!(
                    "period record for q = {} disagrees with the oracle",
                    r.q
                )));
            }
        }
    }
    let header = Header::new("periods", &c.map).param("q_max", q_max);
    let rows: Vec<PeriodRow> = records
        .iter()
        .map(|r| PeriodRow {
            q: r.q,
            p: r.p_values[r.q as usize].to_string(),
            n_prime: r.n_prime.to_string(),
            order: r.order,
            period: r.period,
            branch: r.branch,
        })
        .collect();
    let mut w = open_out(c.out.as_deref())?;
    match format {
        Format::Json => write_json(&mut w, &header, &rows)?,
        _ => {
            header.write_to(&mut w)?;
            writeln!(w, "q,p,n_prime,order,period,branch")?;
            for r in &rows {
                writeln!(w, "{},{},{},{},{},{}", r.q, r.p, r.n_prime, r.order, r.period, r.branch)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn check_propagator(p: &Propagator) -> CliResult<()> {
    let defect = if p.n() <= 2048 {
        p.unitarity_defect()
    } else {
        p.sampled_unitarity_defect(16)
    };
    if defect > UNITARITY_TOL {
        return Err(CliError::Invariant(format!("unitarity defect {defect:e}")));
    }
    for m in FourierMode::square(VERIFY_MODE_RADIUS) {
        let e = egorov_defect(p, m);
        if e > EGOROV_TOL {
            return Err(CliError::Invariant(format!("Egorov defect {e:e} at m = {m}")));
        }
    }
    Ok(())
}

pub fn propagator(c: &Common, n: usize) -> CliResult<()> {
    let format = format_or(c, Format::Binary, &[Format::Binary, Format::Csv])?;
    let p = build_propagator(&c.map, n)?;
    if c.verify {
        check_propagator(&p)?;
    }
    let mut w = open_out(c.out.as_deref())?;
    match format {
        Format::Csv => {
            Header::new("propagator", &c.map).with_n(n).write_to(&mut w)?;
            p.write_csv(&mut w)?;
        }
        _ => p.write_binary(&mut w)?,
    }
    w.flush()?;
    Ok(())
}

/// The propagator, spec and normalized projector state for `s`.
pub fn build_state(map: &CatMap, s: &StateSettings) -> CliResult<(Propagator, ProjectorSpec, QuantumState)> {
    let n = family_modulus(map, s.parity, s.k)?;
    let prop = build_propagator(map, n)?;
    let spec = ProjectorSpec::new(&prop, s.parity, s.k, s.j, s.sigma)?;
    let (v, _) = projector_state(&prop, &spec);
    let u = normalize(&v, vanish_tol(n))
        .map_err(|e| CliError::Vanishing(format!("{} k={} j={} sigma={}: {e}", s.parity, s.k, s.j, s.sigma)))?;
    Ok((prop, spec, u))
}

fn state_header(command: &str, prop: &Propagator, spec: &ProjectorSpec, s: &StateSettings) -> Header {
    Header::new(command, prop.map())
        .with_n(prop.n())
        .param("k", s.k)
        .param("parity", s.parity)
        .param("j", spec.j)
        .param("sigma", spec.sigma)
        .param("t", spec.t)
        .param("phi", spec.phi)
}

fn verify_state(prop: &Propagator, spec: &ProjectorSpec, u: &QuantumState) -> CliResult<()> {
    let r = eigen_residual(prop, u, spec.omega);
    if r > EIGEN_TOL {
        return Err(CliError::Invariant(format!("eigen residual {r:e}")));
    }
    Ok(())
}

fn wigner_params(n: usize, grid: Option<usize>, cutoff: Option<i64>) -> WignerParams {
    let mut params = WignerParams::for_n(n);
    if let Some(g) = grid {
        params.resolution = g;
    }
    if let Some(m) = cutoff {
        params.cutoff = m;
    }
    params
}

pub fn eigenstate(c: &Common, s: &StateSettings, cutoff: i64, grid: Option<usize>) -> CliResult<()> {
    let dir = c
        .out
        .as_deref()
        .ok_or_else(|| CliError::Config("eigenstate needs --out DIR".into()))?;
    let (prop, spec, u) = build_state(&c.map, s)?;
    if c.verify {
        verify_state(&prop, &spec, &u)?;
    }
    std::fs::create_dir_all(dir)?;

    let mut w = open_out(Some(&dir.join("profile.csv")))?;
    write_profile_csv(&mut w, &prop, &spec, &u)?;
    w.flush()?;

    let report = equidist_report(&u, &spec, cutoff);
    let mut w = open_out(Some(&dir.join("equidist.csv")))?;
    report.write_csv(
        &mut w,
        &state_header("equidist", &prop, &spec, s).param("cutoff", cutoff),
    )?;
    w.flush()?;

    if let Some(g) = grid {
        let params = wigner_params(prop.n(), Some(g), None);
        let grid = smoothed_wigner(&u, &params)?;
        let mut w = open_out(Some(&dir.join("wigner.pgm")))?;
        let header = state_header("wigner", &prop, &spec, s)
            .param("grid", params.resolution)
            .param("smoothing", params.smoothing)
            .param("cutoff", params.cutoff);
        grid.write_pgm(&mut w, &header)?;
        w.flush()?;
    }
    Ok(())
}

pub fn equidist(c: &Common, s: &StateSettings, cutoff: i64) -> CliResult<()> {
    if cutoff < 0 {
        return Err(CliError::Config("--cutoff must be non-negative".into()));
    }
    let format = format_or(c, Format::Csv, &[Format::Csv, Format::Json])?;
    let (prop, spec, u) = build_state(&c.map, s)?;
    if c.verify {
        verify_state(&prop, &spec, &u)?;
    }
    let report = equidist_report(&u, &spec, cutoff);
    let header = state_header("equidist", &prop, &spec, s).param("cutoff", cutoff);
    let mut w = open_out(c.out.as_deref())?;
    match format {
        Format::Json => write_json(&mut w, &header, &report)?,
        _ => report.write_csv(&mut w, &header)?,
    }
    w.flush()?;
    Ok(())
}

pub fn profile(c: &Common, s: &StateSettings) -> CliResult<()> {
    let format = format_or(c, Format::Csv, &[Format::Csv, Format::Json])?;
    let (prop, spec, u) = build_state(&c.map, s)?;
    if c.verify {
        verify_state(&prop, &spec, &u)?;
    }
    let mut w = open_out(c.out.as_deref())?;
    match format {
        Format::Json => {
            let report = coordinate_profile(&u, &spec);
            write_json(&mut w, &state_header("profile", &prop, &spec, s), &report)?
        }
        _ => write_profile_csv(&mut w, &prop, &spec, &u)?,
    }
    w.flush()?;
    Ok(())
}

pub fn wigner(c: &Common, s: &StateSettings, grid: Option<usize>, cutoff: Option<i64>, basis: bool) -> CliResult<()> {
    let format = format_or(c, Format::Pgm, &[Format::Pgm, Format::Csv])?;
    let (prop, spec, u) = if basis {
        let n = family_modulus(&c.map, s.parity, s.k)?;
        let prop = build_propagator(&c.map, n)?;
        if s.j >= n {
            return Err(CliError::Config(format!("j = {} outside [0, {n})", s.j)));
        }
        let t = catmap::arith::quantum_period(&c.map, &BigInt::from(n))?.period;
        let spec = ProjectorSpec::at_period(&prop, t, s.j, s.sigma)?;
        (prop, spec, QuantumState::basis(n, s.j))
    } else {
        build_state(&c.map, s)?
    };
    let params = wigner_params(prop.n(), grid.or(Some(DEFAULT_GRID)), cutoff);
    let values = smoothed_wigner(&u, &params)?;
    if c.verify && (values.mean() - 1.0).abs() > 1e-8 {
        return Err(CliError::Invariant(format!(
            "grid mean {} differs from 1",
            values.mean()
        )));
    }
    let header = state_header("wigner", &prop, &spec, s)
        .param("state", if basis { "basis" } else { "projector" })
        .param("grid", params.resolution)
        .param("smoothing", params.smoothing)
        .param("cutoff", params.cutoff);
    let mut w = open_out(c.out.as_deref())?;
    match format {
        Format::Csv => values.write_csv(&mut w, &header)?,
        _ => values.write_pgm(&mut w, &header)?,
    }
    w.flush()?;
    Ok(())
}

pub fn even_scan(c: &Common, k: u64, sigmas: Option<Vec<i64>>, threshold: Option<f64>, all_j: bool) -> CliResult<()> {
    let format = format_or(c, Format::Json, &[Format::Json, Format::Csv])?;
    let data = EvenData::new(&c.map, k)?;
    let prop = build_propagator(&c.map, data.n)?;
    let t = catmap::arith::quantum_period(&c.map, &BigInt::from(data.n))?.period;
    let sigmas = sigmas.unwrap_or_else(|| (0..t as i64).collect());
    let js = if all_j {
        (0..data.n).collect()
    } else {
        default_scan_js(&data)
    };
    let threshold = crate::config::positive("threshold", threshold.unwrap_or_else(|| support_threshold(k)))?;
    let report = vanishing_scan_with(&prop, k, &js, &sigmas, threshold)?;
    let header = Header::new("even-scan", &c.map)
        .with_n(data.n)
        .param("k", k)
        .param(
            "sigmas",
            sigmas.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(","),
        )
        .param("threshold", threshold)
        .param("scanned_js", js.len());
    let mut w = open_out(c.out.as_deref())?;
    match format {
        Format::Csv => report.write_csv(&mut w, &header)?,
        _ => write_json(&mut w, &header, &report)?,
    }
    w.flush()?;
    if c.verify && !report.checks.all() {
        return Err(CliError::Invariant(format!(
            "even-scan checks failed: {:?}",
            report.checks
        )));
    }
    Ok(())
}

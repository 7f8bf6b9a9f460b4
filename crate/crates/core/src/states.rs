//! Short-period projector eigenstates
//! `v = (1/t) Σ_{s<t} ω^{−s} M^s e_j`, `u = v/‖v‖`, with `M^t = e^{iφ} I`
//! and `ω = exp(i(φ + 2πσ)/t)`.

use std::f64::consts::PI;
use std::io::{self, Write};

use ndarray::Array2;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::{n_prime, quantum_period, Branch};
use crate::error::{Error, Result};
use crate::heisenberg::{spaced_indices, Propagator, QuantumState};
use crate::io::Header;

pub const PHASE_SAMPLE: usize = 32;
pub const SCALAR_TOL: f64 = 1e-6;
pub const EIGEN_TOL: f64 = 1e-7;
pub const PROFILE_TOL: f64 = 0.1;

/// Phases this close below `2π` are reported as `0`.
const PHASE_SEAM: f64 = 1e-9;

pub fn vanish_tol(n: usize) -> f64 {
    1e-10 * (n as f64).sqrt()
}

/// `⌊i·N/32⌋` for `i < 32`, or every index when `N < 32`.
pub fn default_phase_sample(n: usize) -> Vec<usize> {
    spaced_indices(n, PHASE_SAMPLE)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarCheck {
    pub phi: f64,
    pub leakage: f64,
    pub spread: f64,
}

impl ScalarCheck {
    pub fn is_scalar(&self) -> bool {
        self.leakage <= SCALAR_TOL && self.spread <= SCALAR_TOL
    }
}

fn wrap_phase(phi: f64) -> f64 {
    let p = phi.rem_euclid(2.0 * PI);
    if 2.0 * PI - p < PHASE_SEAM {
        0.0
    } else {
        p
    }
}

/// Distance between two angles on the circle.
fn angle_gap(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Inspects the columns of `block = M^t E_sample`.
fn inspect_scalar(block: &Array2<Complex64>, sample: &[usize]) -> ScalarCheck {
    let mut leakage = 0.0f64;
    let mut phases = Vec::with_capacity(sample.len());
    for (c, &j) in sample.iter().enumerate() {
        let col = block.column(c);
        for (i, z) in col.iter().enumerate() {
            if i == j {
                leakage = leakage.max((z.norm() - 1.0).abs());
            } else {
                leakage = leakage.max(z.norm());
            }
        }
        phases.push(col[j].arg());
    }
    let phi = wrap_phase(phases[0]);
    let spread = phases.iter().map(|&p| angle_gap(p, phi)).fold(0.0, f64::max);
    ScalarCheck { phi, leakage, spread }
}

fn sample_block(n: usize, sample: &[usize]) -> Array2<Complex64> {
    let mut block = Array2::zeros((n, sample.len()));
    for (c, &j) in sample.iter().enumerate() {
        block[(j, c)] = Complex64::new(1.0, 0.0);
    }
    block
}

/// Applies `M` `t` times to each sampled basis vector and measures how far
/// the result is from a common scalar.
pub fn scalar_check(prop: &Propagator, t: u64, sample: &[usize]) -> Result<ScalarCheck> {
    if t == 0 || sample.is_empty() {
        return Err(Error::InvalidInput("need t >= 1 and a nonempty sample".into()));
    }
    if sample.iter().any(|&j| j >= prop.n()) {
        return Err(Error::InvalidInput("sample index out of range".into()));
    }
    let mut block = sample_block(prop.n(), sample);
    for _ in 0..t {
        block = prop.apply_block(&block);
    }
    Ok(inspect_scalar(&block, sample))
}

/// `φ ∈ [0, 2π)` with `M^t = e^{iφ} I`, checked on the sample.
pub fn scalar_phase(prop: &Propagator, t: u64, sample: &[usize]) -> Result<f64> {
    let check = scalar_check(prop, t, sample)?;
    if check.is_scalar() {
        Ok(check.phi)
    } else {
        Err(Error::NotScalar {
            leakage: check.leakage.max(check.spread),
        })
    }
}

/// Minimal `t ≤ max_t` with `M^t` scalar on the sample, and its phase.
pub fn numerical_period(prop: &Propagator, max_t: u64, sample: &[usize]) -> Result<(u64, f64)> {
    if sample.is_empty() || sample.iter().any(|&j| j >= prop.n()) {
        return Err(Error::InvalidInput("bad phase sample".into()));
    }
    let mut block = sample_block(prop.n(), sample);
    for t in 1..=max_t {
        block = prop.apply_block(&block);
        let check = inspect_scalar(&block, sample);
        if check.is_scalar() {
            return Ok((t, check.phi));
        }
    }
    Err(Error::NoOrderFound {
        modulus: format!("scalar M^t at N = {}", prop.n()),
        ceiling: max_t,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    /// `N = N′_{2k+1}`, `t = 2k + 1`.
    Odd,
    /// `N = N′_{2k}`, `t = n(N′_{2k}) ∈ {2k, 4k}`.
    Even,
}

impl std::str::FromStr for Parity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Parity> {
        match s.to_ascii_lowercase().as_str() {
            "odd" => Ok(Parity::Odd),
            "even" => Ok(Parity::Even),
            other => Err(Error::InvalidInput(format!(
                "parity must be odd or even, got {other:?}"
            ))),
        }
    }
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Parity::Odd => "odd",
            Parity::Even => "even",
        })
    }
}

impl Parity {
    pub fn modulus_index(self, k: u64) -> u64 {
        match self {
            Parity::Odd => 2 * k + 1,
            Parity::Even => 2 * k,
        }
    }
}

/// The data fixing one projector state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectorSpec {
    pub k: u64,
    pub parity: Parity,
    pub j: usize,
    pub sigma: i64,
    pub t: u64,
    pub phi: f64,
    pub omega: Complex64,
    pub branch: Branch,
}

/// `exp(−i s (φ + 2πσ)/t)` with the `σ` part reduced exactly.
pub(crate) fn inverse_omega_power(phi: f64, sigma: i64, t: u64, s: u64) -> Complex64 {
    let frac = ((s as i128 * sigma as i128).rem_euclid(t as i128)) as f64 / t as f64;
    Complex64::from_polar(1.0, -(s as f64) * phi / t as f64 - 2.0 * PI * frac)
}

pub fn omega(phi: f64, sigma: i64, t: u64) -> Complex64 {
    inverse_omega_power(phi, sigma, t, 1).conj()
}

/// `N` of the family member with half-index `k`: `N′_{2k+1}` or `N′_{2k}`.
pub fn family_modulus(map: &crate::CatMap, parity: Parity, k: u64) -> Result<usize> {
    let q = parity.modulus_index(k);
    if q == 0 {
        return Err(Error::InvalidInput("even family starts at k = 1".into()));
    }
    let n = n_prime(map, q);
    usize::try_from(&n).map_err(|_| Error::InvalidInput(format!("N = {n} does not fit in memory")))
}

impl ProjectorSpec {
    /// Spec for `prop`, whose dimension must be the family modulus for `(parity, k)`.
    /// The period comes from arithmetic, the phase from `M^t` on the default sample.
    pub fn new(prop: &Propagator, parity: Parity, k: u64, j: usize, sigma: i64) -> Result<ProjectorSpec> {
        let expected = family_modulus(prop.map(), parity, k)?;
        if expected != prop.n() {
            return Err(Error::InvalidInput(format!(
                "{parity} k={k} needs N = {expected}, propagator has N = {}",
                prop.n()
            )));
        }
        let qp = quantum_period(prop.map(), &BigInt::from(prop.n()))?;
        if parity == Parity::Odd && qp.period != 2 * k + 1 {
            return Err(Error::BranchMismatch {
                expected: 2 * k + 1,
                found: qp.period,
            });
        }
        let mut spec = ProjectorSpec::at_period(prop, qp.period, j, sigma)?;
        spec.k = k;
        spec.parity = parity;
        spec.branch = qp.branch;
        Ok(spec)
    }

    /// Spec at an arbitrary `N` with a known period `t`.
    pub fn at_period(prop: &Propagator, t: u64, j: usize, sigma: i64) -> Result<ProjectorSpec> {
        if j >= prop.n() {
            return Err(Error::InvalidInput(format!("j = {j} outside [0, {})", prop.n())));
        }
        let phi = scalar_phase(prop, t, &default_phase_sample(prop.n()))?;
        let branch = quantum_period(prop.map(), &BigInt::from(prop.n()))?.branch;
        Ok(ProjectorSpec {
            k: t / 2,
            parity: if t % 2 == 1 { Parity::Odd } else { Parity::Even },
            j,
            sigma,
            t,
            phi,
            omega: omega(phi, sigma, t),
            branch,
        })
    }

    pub fn with_j(&self, j: usize) -> ProjectorSpec {
        ProjectorSpec { j, ..self.clone() }
    }

    pub fn with_sigma(&self, sigma: i64) -> ProjectorSpec {
        ProjectorSpec {
            sigma,
            omega: omega(self.phi, sigma, self.t),
            ..self.clone()
        }
    }

    pub fn predicted_peak(&self) -> f64 {
        1.0 / (self.t as f64).sqrt()
    }
}

/// `v` by incremental matrix-vector products, together with `‖v‖`.
pub fn projector_state(prop: &Propagator, spec: &ProjectorSpec) -> (QuantumState, f64) {
    let n = prop.n();
    let mut power = QuantumState::basis(n, spec.j).into_coords();
    let mut acc = vec![Complex64::zero(); n];
    for s in 0..spec.t {
        let z = inverse_omega_power(spec.phi, spec.sigma, spec.t, s);
        acc.iter_mut().zip(&power).for_each(|(a, p)| *a += z * p);
        if s + 1 < spec.t {
            power = prop.apply(&power);
        }
    }
    let scale = 1.0 / spec.t as f64;
    acc.iter_mut().for_each(|a| *a *= scale);
    let v = QuantumState::new(acc);
    let norm = v.norm();
    (v, norm)
}

pub fn normalize(v: &QuantumState, vanish_tol: f64) -> Result<QuantumState> {
    let norm = v.norm();
    if !(norm > vanish_tol) {
        return Err(Error::VanishingState { norm });
    }
    Ok(v.scaled(Complex64::new(1.0 / norm, 0.0)))
}

/// `‖M u − ω u‖₂`.
pub fn eigen_residual(prop: &Propagator, u: &QuantumState, omega: Complex64) -> f64 {
    prop.apply(u.coords())
        .iter()
        .zip(u.coords())
        .map(|(mu, x)| (mu - omega * x).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub peak_index: usize,
    pub peak_value: Complex64,
    /// Largest modulus away from the peak.
    pub off_peak_max: f64,
    pub linf: f64,
    pub l2: f64,
    /// `1/√t`.
    pub predicted_peak: f64,
    pub profile_tol: f64,
    pub peak_at_j: bool,
    pub peak_within_tol: bool,
    pub off_peak_ok: bool,
}

impl ProfileReport {
    /// `||u(peak)| − 1/√t|`.
    pub fn peak_deviation(&self) -> f64 {
        (self.peak_value.norm() - self.predicted_peak).abs()
    }

    pub fn holds(&self) -> bool {
        self.peak_at_j && self.peak_within_tol && self.off_peak_ok
    }
}

pub fn coordinate_profile(u: &QuantumState, spec: &ProjectorSpec) -> ProfileReport {
    coordinate_profile_with(u, spec, PROFILE_TOL)
}

/// Peak statistics of `u` against the predicted `1/√t` spike at `spec.j`,
/// with `profile_tol` relative to `1/√t`.
pub fn coordinate_profile_with(u: &QuantumState, spec: &ProjectorSpec, profile_tol: f64) -> ProfileReport {
    let coords = u.coords();
    let mut peak_index = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, z) in coords.iter().enumerate() {
        if z.norm() > best {
            best = z.norm();
            peak_index = i;
        }
    }
    let off_peak_max = coords
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != peak_index)
        .map(|(_, z)| z.norm())
        .fold(0.0, f64::max);
    let predicted_peak = spec.predicted_peak();
    let peak_value = coords[peak_index];
    ProfileReport {
        peak_index,
        peak_value,
        off_peak_max,
        linf: best,
        l2: u.norm(),
        predicted_peak,
        profile_tol,
        peak_at_j: peak_index == spec.j,
        peak_within_tol: (peak_value.norm() - predicted_peak).abs() <= profile_tol * predicted_peak,
        off_peak_ok: off_peak_max <= peak_value.norm() / 2.0,
    }
}

/// `index,re,im,modulus` per coordinate under a header echoing the spec.
pub fn write_profile_csv<W: Write>(
    w: &mut W,
    prop: &Propagator,
    spec: &ProjectorSpec,
    u: &QuantumState,
) -> io::Result<()> {
    Header::new("profile", prop.map())
        .with_n(prop.n())
        .param("t", spec.t)
        .param("j", spec.j)
        .param("sigma", spec.sigma)
        .param("phi", spec.phi)
        .param("omega", format!("{},{}", spec.omega.re, spec.omega.im))
        .write_to(w)?;
    writeln!(w, "index,re,im,modulus")?;
    for (i, z) in u.coords().iter().enumerate() {
        writeln!(w, "{i},{},{},{}", z.re, z.im, z.norm())?;
    }
    Ok(())
}

/// Unnormalized projector vectors for every `(σ, j)` pair of a sweep that
/// shares `t` and `φ`. Column `c` of `columns[i]` is `v` for
/// `(sigmas[i], js[c])`.
#[derive(Debug, Clone)]
pub struct ProjectorBatch {
    pub t: u64,
    pub phi: f64,
    pub sigmas: Vec<i64>,
    pub js: Vec<usize>,
    pub columns: Vec<Array2<Complex64>>,
}

impl ProjectorBatch {
    pub fn state(&self, sigma_index: usize, j_index: usize) -> QuantumState {
        QuantumState::new(self.columns[sigma_index].column(j_index).to_vec())
    }

    pub fn norm(&self, sigma_index: usize, j_index: usize) -> f64 {
        self.columns[sigma_index]
            .column(j_index)
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Both strategies, in units of `N³` complex multiply-adds.
fn batch_costs(t: u64, sigmas: usize, cols: usize, n: usize) -> (f64, usize) {
    let frac = cols as f64 / n as f64;
    let iterate = (t.saturating_sub(1)) as f64 * frac;
    let mut best = (f64::INFINITY, 1);
    for b in 2..=t as usize {
        let q0 = t as usize / b;
        let rem = t as usize % b;
        let powers = (b - 1) + q0.saturating_sub(1) + usize::from(rem > 0);
        let per_sigma = frac * (1 + usize::from(rem > 0)) as f64;
        let cost = powers as f64 + sigmas as f64 * per_sigma;
        if cost < best.0 {
            best = (cost, b);
        }
    }
    if iterate <= best.0 {
        (iterate, 0)
    } else {
        best
    }
}

/// `v^{(σ)}_j` for all requested pairs.
///
/// Picks the cheaper of two exact schemes: iterating `Y ← M Y` on the chosen
/// columns, or splitting `Σ_{s<t} z^s M^s` as `U(z)·L(z) + z^{bq}M^{bq}·L′(z)`
/// with blocks of length `b`, so that only `O(√t)` full products are needed.
pub fn projector_columns(prop: &Propagator, t: u64, phi: f64, sigmas: &[i64], js: &[usize]) -> Result<ProjectorBatch> {
    let n = prop.n();
    if t == 0 {
        return Err(Error::InvalidInput("t must be positive".into()));
    }
    if js.iter().any(|&j| j >= n) {
        return Err(Error::InvalidInput("column index out of range".into()));
    }
    let (_, block) = batch_costs(t, sigmas.len(), js.len(), n);
    let scale = Complex64::new(1.0 / t as f64, 0.0);
    let columns = if block == 0 {
        iterate_columns(prop, t, phi, sigmas, js)
    } else {
        split_columns(prop, t, phi, sigmas, js, block)
    };
    Ok(ProjectorBatch {
        t,
        phi,
        sigmas: sigmas.to_vec(),
        js: js.to_vec(),
        columns: columns.into_iter().map(|c| c.mapv(|z| z * scale)).collect(),
    })
}

fn iterate_columns(prop: &Propagator, t: u64, phi: f64, sigmas: &[i64], js: &[usize]) -> Vec<Array2<Complex64>> {
    let n = prop.n();
    let mut y = sample_block(n, js);
    let mut acc = vec![Array2::<Complex64>::zeros((n, js.len())); sigmas.len()];
    for s in 0..t {
        for (a, &sigma) in acc.iter_mut().zip(sigmas) {
            let z = inverse_omega_power(phi, sigma, t, s);
            a.zip_mut_with(&y, |x, v| *x += z * v);
        }
        if s + 1 < t {
            y = prop.apply_block(&y);
        }
    }
    acc
}

fn split_columns(
    prop: &Propagator,
    t: u64,
    phi: f64,
    sigmas: &[i64],
    js: &[usize],
    b: usize,
) -> Vec<Array2<Complex64>> {
    let n = prop.n();
    let t_us = t as usize;
    let q0 = t_us / b;
    let rem = t_us % b;
    let select = |m: &Array2<Complex64>| -> Array2<Complex64> {
        let mut out = Array2::zeros((n, js.len()));
        for (c, &j) in js.iter().enumerate() {
            out.column_mut(c).assign(&m.column(j));
        }
        out
    };

    // L(z) = Σ_{r<b} z^r M^r and L′(z) = Σ_{r<rem} z^r M^r, restricted to the columns
    let mut lower = vec![Array2::<Complex64>::zeros((n, js.len())); sigmas.len()];
    let mut partial = vec![Array2::<Complex64>::zeros((n, js.len())); sigmas.len()];
    let mut power = Array2::<Complex64>::eye(n);
    for r in 0..b {
        if r == rem && rem > 0 {
            partial.clone_from(&lower);
        }
        let cols = select(&power);
        for (l, &sigma) in lower.iter_mut().zip(sigmas) {
            let z = inverse_omega_power(phi, sigma, t, r as u64);
            l.zip_mut_with(&cols, |x, v| *x += z * v);
        }
        power = if r == 0 {
            prop.matrix().to_owned()
        } else {
            prop.apply_block(&power)
        };
    }
    let step = power;

    // U(z) = Σ_{u<q0} z^{bu} M^{bu}
    let mut upper = vec![Array2::<Complex64>::zeros((n, n)); sigmas.len()];
    let mut big = Array2::<Complex64>::eye(n);
    for u in 0..q0 {
        for (acc, &sigma) in upper.iter_mut().zip(sigmas) {
            let z = inverse_omega_power(phi, sigma, t, (b * u) as u64);
            acc.zip_mut_with(&big, |x, v| *x += z * v);
        }
        if u + 1 < q0 || rem > 0 {
            big = if u == 0 { step.clone() } else { big.dot(&step) };
        }
    }

    upper
        .iter()
        .zip(&lower)
        .zip(&partial)
        .zip(sigmas)
        .map(|(((u, l), p), &sigma)| {
            let mut out = u.dot(l);
            if rem > 0 {
                let z = inverse_omega_power(phi, sigma, t, (b * q0) as u64);
                let tail = big.dot(p);
                out.zip_mut_with(&tail, |x, v| *x += z * v);
            }
            out
        })
        .collect()
}

/// `‖v^{(σ)}‖` for every `σ ∈ [0, t)` at column `j`; their squares sum to 1.
pub fn branch_norms(prop: &Propagator, t: u64, phi: f64, j: usize) -> Result<Vec<f64>> {
    let sigmas: Vec<i64> = (0..t as i64).collect();
    let batch = projector_columns(prop, t, phi, &sigmas, &[j])?;
    Ok((0..sigmas.len()).map(|i| batch.norm(i, 0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::build_propagator;
    use crate::CatMap;

    #[test]
    fn wrap_phase_snaps_the_seam() {
        assert_eq!(wrap_phase(-2.5e-15), 0.0);
        assert_eq!(wrap_phase(2.0 * PI), 0.0);
        assert!((wrap_phase(-1.0) - (2.0 * PI - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn one_dimensional_phase() {
        let p = build_propagator(&CatMap::standard(), 1).unwrap();
        let phi = scalar_phase(&p, 1, &[0]).unwrap();
        assert!((phi - wrap_phase(p.entry(0, 0).arg())).abs() < 1e-12);
        let spec = ProjectorSpec::at_period(&p, 1, 0, 0).unwrap();
        let (v, norm) = projector_state(&p, &spec);
        assert!((norm - 1.0).abs() < 1e-14);
        assert!(eigen_residual(&p, &v, spec.omega) < 1e-14);
    }

    #[test]
    fn period_and_phase_small_n() {
        let p = build_propagator(&CatMap::standard(), 71).unwrap();
        let sample = default_phase_sample(71);
        assert_eq!(sample.len(), 32);
        let (t, phi) = numerical_period(&p, 50, &sample).unwrap();
        assert_eq!(t, 7);
        assert!((0.0..2.0 * PI).contains(&phi));
        assert!(matches!(scalar_phase(&p, 6, &sample), Err(Error::NotScalar { .. })));
    }

    #[test]
    fn spec_constructor_checks_family() {
        let map = CatMap::standard();
        let p = build_propagator(&map, 71).unwrap();
        let spec = ProjectorSpec::new(&p, Parity::Odd, 3, 0, 0).unwrap();
        assert_eq!((spec.t, spec.branch), (7, Branch::Odd));
        let w = spec.omega.powu(7);
        assert!((w - Complex64::from_polar(1.0, spec.phi)).norm() < 1e-10);
        assert!(ProjectorSpec::new(&p, Parity::Odd, 2, 0, 0).is_err());
        assert!(ProjectorSpec::new(&p, Parity::Odd, 3, 71, 0).is_err());
        assert_eq!("Even".parse::<Parity>().unwrap(), Parity::Even);
    }

    #[test]
    fn states_are_eigenvectors_and_resolve_identity() {
        let p = build_propagator(&CatMap::standard(), 71).unwrap();
        let spec = ProjectorSpec::new(&p, Parity::Odd, 3, 5, 0).unwrap();
        let mut total = 0.0;
        let mut states = Vec::new();
        for sigma in 0..7 {
            let sp = spec.with_sigma(sigma);
            let (v, norm) = projector_state(&p, &sp);
            total += norm * norm;
            if let Ok(u) = normalize(&v, vanish_tol(71)) {
                assert!(eigen_residual(&p, &u, sp.omega) < EIGEN_TOL);
            }
            states.push(v);
        }
        assert!((total - 1.0).abs() < 1e-10);
        for a in 0..7 {
            for b in 0..a {
                assert!(states[a].inner(&states[b]).norm() < 1e-8);
            }
        }
        let (shifted, _) = projector_state(&p, &spec.with_sigma(7));
        let (base, _) = projector_state(&p, &spec);
        assert!(shifted
            .coords()
            .iter()
            .zip(base.coords())
            .all(|(x, y)| (x - y).norm() < 1e-12));
    }

    #[test]
    fn normalize_rejects_tiny_vectors() {
        let e = QuantumState::basis(4, 2);
        assert_eq!(normalize(&e, 1e-10).unwrap(), e);
        let tiny = e.scaled(Complex64::new(1e-14, 0.0));
        assert!(matches!(
            normalize(&tiny, vanish_tol(4)),
            Err(Error::VanishingState { .. })
        ));
    }

    #[test]
    fn basis_vector_is_not_an_eigenvector() {
        let p = build_propagator(&CatMap::standard(), 19).unwrap();
        let r = eigen_residual(&p, &QuantumState::basis(19, 0), Complex64::new(1.0, 0.0));
        assert!(r > 0.1);
    }

    #[test]
    fn profile_peaks_at_j_for_n71() {
        let p = build_propagator(&CatMap::standard(), 71).unwrap();
        let spec = ProjectorSpec::new(&p, Parity::Odd, 3, 0, 0).unwrap();
        let (v, _) = projector_state(&p, &spec);
        let u = normalize(&v, vanish_tol(71)).unwrap();
        let report = coordinate_profile(&u, &spec);
        assert!(report.peak_at_j && report.peak_within_tol);
        // φ = 0 here and the return sum Σ_{0<s<7} ⟨M^s e_0, e_0⟩ cancels, so the spike is exact
        assert!((report.peak_value.norm() - 1.0 / 7f64.sqrt()).abs() < 1e-12);
        assert!(report.off_peak_max < report.peak_value.norm());
        assert!((report.l2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn delta_profile() {
        let spec = ProjectorSpec {
            k: 0,
            parity: Parity::Odd,
            j: 3,
            sigma: 0,
            t: 1,
            phi: 0.0,
            omega: Complex64::new(1.0, 0.0),
            branch: Branch::Odd,
        };
        let r = coordinate_profile(&QuantumState::basis(8, 3), &spec);
        assert_eq!(r.peak_index, 3);
        assert_eq!(r.peak_value, Complex64::new(1.0, 0.0));
        assert_eq!(r.off_peak_max, 0.0);
        assert!(r.holds());
    }

    #[test]
    fn batch_strategies_agree_with_single_states() {
        let p = build_propagator(&CatMap::standard(), 71).unwrap();
        let spec = ProjectorSpec::new(&p, Parity::Odd, 3, 0, 0).unwrap();
        let sigmas = [0, 1, 3];
        let js: Vec<usize> = (0..71).collect();
        let iter = iterate_columns(&p, 7, spec.phi, &sigmas, &js);
        for b in 2..=7 {
            let split = split_columns(&p, 7, spec.phi, &sigmas, &js, b);
            for (x, y) in iter.iter().zip(&split) {
                assert!(x.iter().zip(y.iter()).all(|(a, c)| (a - c).norm() < 1e-11), "b={b}");
            }
        }
        let batch = projector_columns(&p, 7, spec.phi, &sigmas, &[0, 9, 70]).unwrap();
        for (si, &sigma) in sigmas.iter().enumerate() {
            for (ci, &j) in [0usize, 9, 70].iter().enumerate() {
                let (v, norm) = projector_state(&p, &spec.with_sigma(sigma).with_j(j));
                assert!((batch.norm(si, ci) - norm).abs() < 1e-12);
                let w = batch.state(si, ci);
                assert!(v.coords().iter().zip(w.coords()).all(|(a, c)| (a - c).norm() < 1e-12));
            }
        }
        let norms = branch_norms(&p, 7, spec.phi, 4).unwrap();
        assert!((norms.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn profile_csv_layout() {
        let p = build_propagator(&CatMap::standard(), 5).unwrap();
        let spec = ProjectorSpec::new(&p, Parity::Odd, 1, 0, 0).unwrap();
        let (v, _) = projector_state(&p, &spec);
        let mut out = Vec::new();
        write_profile_csv(&mut out, &p, &spec, &v).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("# t: 3\n# j: 0\n# sigma: 0\n"));
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 6);
    }
}

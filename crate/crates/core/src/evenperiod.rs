//! The even family `N = N′_{2k} = 2p_k`.
//!
//! With `p = p_k` and `a_k = (A^k)_{11}`, one has
//!
//! * `M^k e_j = α e_{a_k j} + β e_{a_k j + p}` with `|α| = |β| = 1/√2`;
//! * when `n(N) = 4k`, additionally `M^{2k} e_j = η e_{j+p}`.
//!
//! Writing `T = ω^{−k} M^k`, the projector state factors as
//! `v = (1/t)(Σ_{r<k} ω^{−r} M^r) h` with `h = Σ_{u<t/k} T^u e_j`, which is
//! what makes states with `a_k j ≡ j (mod p)` able to vanish in the `4k`
//! branch. `h` lives on at most four coordinates; the large coordinates of
//! `u` approach that set as `k` grows.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};

use ndarray::Array2;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{matrix_power, n_prime, p_seq, quantum_period, Branch, CatMap};
use crate::error::{Error, Result};
use crate::heisenberg::{Propagator, QuantumState};
use crate::io::Header;
use crate::states::{
    default_phase_sample, inverse_omega_power, normalize, projector_columns, scalar_phase, vanish_tol, ProjectorSpec,
};

pub const STRUCTURE_TOL: f64 = 1e-6;
/// Relative support threshold, in units of `k^{−1/2}`.
pub const SUPPORT_FACTOR: f64 = 0.4;
pub const FULL_SCAN_LIMIT: usize = 2000;
pub const CONTROL_SAMPLES: usize = 64;

/// `p_k`, `a_k mod N` and `N = 2p_k` for the family member `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvenData {
    pub k: u64,
    pub n: usize,
    pub p: u64,
    pub a_k: u64,
}

impl EvenData {
    pub fn new(map: &CatMap, k: u64) -> Result<EvenData> {
        if k == 0 {
            return Err(Error::InvalidInput("even family starts at k = 1".into()));
        }
        let p = p_seq(map, k);
        let n = &p * 2u32;
        let a_k = matrix_power(map, k, Some(&n)).a;
        let fit = |x: &BigInt| {
            x.to_u64()
                .ok_or_else(|| Error::InvalidInput(format!("{x} exceeds u64")))
        };
        Ok(EvenData {
            k,
            n: fit(&n)? as usize,
            p: fit(&p)?,
            a_k: fit(&a_k)?,
        })
    }

    /// Checks that `prop` lives at `N = 2p_k`.
    pub fn for_propagator(prop: &Propagator, k: u64) -> Result<EvenData> {
        let data = EvenData::new(prop.map(), k)?;
        if data.n != prop.n() {
            return Err(Error::InvalidInput(format!(
                "k = {k} needs N = 2p_k = {}, propagator has N = {}",
                data.n,
                prop.n()
            )));
        }
        Ok(data)
    }

    pub fn image(&self, j: usize) -> usize {
        ((self.a_k as u128 * j as u128) % self.n as u128) as usize
    }

    pub fn half(&self, j: usize) -> usize {
        (j + self.p as usize) % self.n
    }

    /// `a_k j ≡ j (mod p_k)`.
    pub fn is_fixed_class(&self, j: usize) -> bool {
        (self.image(j) as u64 % self.p) == (j as u64 % self.p)
    }

    /// `gcd(a_k − 1, p_k)`.
    pub fn fixed_class_count(&self) -> u64 {
        (self.a_k as i128 - 1).rem_euclid(self.p as i128).gcd(&(self.p as i128)) as u64
    }

    /// `{j, j + p, a_k j, a_k j + p}`, sorted without repeats.
    pub fn structural_set(&self, j: usize) -> Vec<usize> {
        let img = self.image(j);
        let set: BTreeSet<usize> = [j, self.half(j), img, self.half(img)].into_iter().collect();
        set.into_iter().collect()
    }
}

fn unit_columns(n: usize, js: &[usize]) -> Array2<Complex64> {
    let mut block = Array2::zeros((n, js.len()));
    for (c, &j) in js.iter().enumerate() {
        block[(j, c)] = Complex64::new(1.0, 0.0);
    }
    block
}

fn power_block(prop: &Propagator, js: &[usize], r: u64) -> Array2<Complex64> {
    let mut block = unit_columns(prop.n(), js);
    for _ in 0..r {
        block = prop.apply_block(&block);
    }
    block
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPeriod {
    pub j: usize,
    /// `(a_k j, a_k j + p) mod N`.
    pub indices: (usize, usize),
    pub moduli: (f64, f64),
    /// Largest modulus outside the two indices.
    pub leakage: f64,
}

/// `M^k e_j` for every `j` in `js`, checked against the two-coordinate law.
pub fn half_period_checks(prop: &Propagator, k: u64, js: &[usize]) -> Result<Vec<HalfPeriod>> {
    let data = EvenData::for_propagator(prop, k)?;
    let block = power_block(prop, js, k);
    let target = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(js.len());
    for (c, &j) in js.iter().enumerate() {
        let col = block.column(c);
        let (i0, i1) = (data.image(j), data.half(data.image(j)));
        let leakage = col
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != i0 && i != i1)
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max);
        let moduli = (col[i0].norm(), col[i1].norm());
        let worst = leakage.max((moduli.0 - target).abs()).max((moduli.1 - target).abs());
        if worst > STRUCTURE_TOL {
            return Err(Error::StructureViolation { leakage: worst });
        }
        out.push(HalfPeriod {
            j,
            indices: (i0, i1),
            moduli,
            leakage,
        });
    }
    Ok(out)
}

pub fn half_period_check(prop: &Propagator, k: u64, j: usize) -> Result<HalfPeriod> {
    Ok(half_period_checks(prop, k, &[j])?.remove(0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarterTurn {
    pub j: usize,
    /// `(j + p) mod N`.
    pub target: usize,
    pub eta: Complex64,
    pub leakage: f64,
}

/// `M^{2k} e_j = η e_{j+p}` for every `j` in `js`; requires `n(N) = 4k`.
pub fn quarter_turn_check(prop: &Propagator, k: u64, js: &[usize]) -> Result<Vec<QuarterTurn>> {
    let data = EvenData::for_propagator(prop, k)?;
    let qp = quantum_period(prop.map(), &BigInt::from(data.n))?;
    if qp.branch != Branch::Even4k {
        return Err(Error::BranchMismatch {
            expected: 4 * k,
            found: qp.period,
        });
    }
    let block = power_block(prop, js, 2 * k);
    let mut out = Vec::with_capacity(js.len());
    for (c, &j) in js.iter().enumerate() {
        let col = block.column(c);
        let target = data.half(j);
        let leakage = col
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != target)
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max);
        let eta = col[target];
        let worst = leakage.max((eta.norm() - 1.0).abs());
        if worst > STRUCTURE_TOL {
            return Err(Error::StructureViolation { leakage: worst });
        }
        out.push(QuarterTurn {
            j,
            target,
            eta,
            leakage,
        });
    }
    Ok(out)
}

/// `‖h‖²` with `h = Σ_{u<t/k} (ω^{−k}M^k)^u e_j`.
///
/// The `2k` branch gives `2 + 2 Re(ω^{−k}⟨M^k e_j, e_j⟩) ≥ 2 − √2`; in the
/// `4k` branch a surviving `h` has `‖h‖² ∈ {4, 8}`.
pub fn block_norm_sq(prop: &Propagator, spec: &ProjectorSpec, k: u64) -> Result<f64> {
    if k == 0 || spec.t % k != 0 {
        return Err(Error::InvalidInput(format!("k = {k} does not divide t = {}", spec.t)));
    }
    let turns = spec.t / k;
    let z = inverse_omega_power(spec.phi, spec.sigma, spec.t, k);
    let mut term = QuantumState::basis(prop.n(), spec.j).into_coords();
    let mut h = term.clone();
    for _ in 1..turns {
        term = prop.apply_power(&term, k as i64);
        term.iter_mut().for_each(|x| *x *= z);
        h.iter_mut().zip(&term).for_each(|(a, b)| *a += b);
    }
    Ok(h.iter().map(|x| x.norm_sqr()).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    pub threshold: f64,
    /// Indices with `|u(ℓ)| > threshold`.
    pub support: Vec<usize>,
    pub structural: Vec<usize>,
    pub off_support_max: f64,
    pub within_four: bool,
    pub size_two_or_four: bool,
    pub inside_structure: bool,
}

pub fn support_threshold(k: u64) -> f64 {
    SUPPORT_FACTOR / (k.max(1) as f64).sqrt()
}

/// Coordinates of `u` above `threshold`, compared with the structural set
/// `{j, j+p, a_k j, a_k j+p}` of the even family.
pub fn support_report(data: &EvenData, u: &QuantumState, spec: &ProjectorSpec, threshold: f64) -> SupportReport {
    let mut support = Vec::new();
    let mut off_support_max = 0.0f64;
    for (i, z) in u.coords().iter().enumerate() {
        if z.norm() > threshold {
            support.push(i);
        } else {
            off_support_max = off_support_max.max(z.norm());
        }
    }
    let structural = if spec.t == 1 {
        vec![spec.j]
    } else {
        data.structural_set(spec.j)
    };
    SupportReport {
        threshold,
        within_four: support.len() <= 4,
        size_two_or_four: support.len() == 2 || support.len() == 4,
        inside_structure: support.iter().all(|i| structural.binary_search(i).is_ok()),
        support,
        structural,
        off_support_max,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Vanishes,
    Survives,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanOutcome {
    pub j: usize,
    pub sigma: i64,
    pub norm: f64,
    pub outcome: Outcome,
    /// `|S|` for surviving states.
    pub support_size: Option<usize>,
    pub inside_structure: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaSummary {
    pub sigma: i64,
    pub vanishing_js: Vec<usize>,
    /// Distinct `j mod p_k` among the vanishing `j`.
    pub vanishing_classes: u64,
    pub surviving: usize,
    pub max_support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvenCaseReport {
    pub k: u64,
    pub n: usize,
    pub p: u64,
    pub a_k: u64,
    pub t: u64,
    pub branch: Branch,
    pub phi: f64,
    pub vanish_tol: f64,
    pub support_threshold: f64,
    /// Support of the first surviving state in scan order.
    pub support_set: Vec<usize>,
    pub scanned_js: usize,
    /// Vanishing `j` over all scanned branches, sorted.
    pub vanishing_js: Vec<usize>,
    /// Outcomes at `j = 0`, when scanned.
    pub sigma_outcomes: BTreeMap<i64, Outcome>,
    pub per_sigma: Vec<SigmaSummary>,
    pub gcd_a_minus_one_p: u64,
    pub n_prime_k: u64,
    pub checks: ScanChecks,
    pub outcomes: Vec<ScanOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanChecks {
    /// `gcd(a_k − 1, p_k) = N′_k`.
    pub gcd_identity: bool,
    /// Exactly one of `σ = 0, 2` vanishes at `j = 0`; `None` if not scanned.
    pub j0_dichotomy: Option<bool>,
    /// Every vanishing `j` satisfies `a_k j ≡ j (mod p_k)`.
    pub congruence: bool,
    /// Per branch, the vanishing classes mod `p_k` number at most `gcd(a_k − 1, p_k)`.
    pub classes_bounded: bool,
    /// Per branch, a nonzero class count divides `gcd(a_k − 1, p_k)`.
    pub classes_divide: bool,
    /// Per branch, `#vanishing/N ≤ gcd(a_k − 1, p_k)/p_k`.
    pub rarity: bool,
    /// Vanishing `(j, σ)` pairs number at most `gcd(a_k − 1, p_k)·#σ`.
    pub total_bounded: bool,
    /// Every surviving state has `|S| ≤ 4`. This is an asymptotic statement
    /// and is reported but not part of [`ScanChecks::all`].
    pub support_within_four: bool,
}

impl ScanChecks {
    pub fn all(&self) -> bool {
        self.gcd_identity
            && self.j0_dichotomy.unwrap_or(true)
            && self.congruence
            && self.classes_bounded
            && self.classes_divide
            && self.rarity
            && self.total_bounded
    }
}

/// All `j` for `N ≤ 2000`; otherwise the fixed classes `a_k j ≡ j (mod p_k)`
/// together with 64 uniform controls from a ChaCha8 stream seeded with 0.
pub fn default_scan_js(data: &EvenData) -> Vec<usize> {
    if data.n <= FULL_SCAN_LIMIT {
        return (0..data.n).collect();
    }
    let mut set: BTreeSet<usize> = (0..data.n).filter(|&j| data.is_fixed_class(j)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..CONTROL_SAMPLES {
        set.insert(rng.random_range(0..data.n));
    }
    set.into_iter().collect()
}

/// Builds every `(j, σ)` projector state of the `4k` branch and classifies it.
pub fn vanishing_scan(prop: &Propagator, k: u64, js: &[usize], sigmas: &[i64]) -> Result<EvenCaseReport> {
    vanishing_scan_with(prop, k, js, sigmas, support_threshold(k))
}

pub fn vanishing_scan_with(
    prop: &Propagator,
    k: u64,
    js: &[usize],
    sigmas: &[i64],
    threshold: f64,
) -> Result<EvenCaseReport> {
    let data = EvenData::for_propagator(prop, k)?;
    let qp = quantum_period(prop.map(), &BigInt::from(data.n))?;
    if qp.branch != Branch::Even4k {
        return Err(Error::BranchMismatch {
            expected: 4 * k,
            found: qp.period,
        });
    }
    let t = qp.period;
    let phi = scalar_phase(prop, t, &default_phase_sample(data.n))?;
    let batch = projector_columns(prop, t, phi, sigmas, js)?;
    let tol = vanish_tol(data.n);
    let mut outcomes = Vec::with_capacity(js.len() * sigmas.len());
    let mut support_set = None;
    for (si, &sigma) in sigmas.iter().enumerate() {
        let spec = ProjectorSpec {
            k,
            parity: crate::states::Parity::Even,
            j: 0,
            sigma,
            t,
            phi,
            omega: crate::states::omega(phi, sigma, t),
            branch: qp.branch,
        };
        for (ji, &j) in js.iter().enumerate() {
            let v = batch.state(si, ji);
            let (norm, outcome, support_size, inside) = match normalize(&v, tol) {
                Ok(u) => {
                    let rep = support_report(&data, &u, &spec.with_j(j), threshold);
                    if support_set.is_none() {
                        support_set = Some(rep.support.clone());
                    }
                    (
                        v.norm(),
                        Outcome::Survives,
                        Some(rep.support.len()),
                        Some(rep.inside_structure),
                    )
                }
                Err(Error::VanishingState { norm }) => (norm, Outcome::Vanishes, None, None),
                Err(e) => return Err(e),
            };
            outcomes.push(ScanOutcome {
                j,
                sigma,
                norm,
                outcome,
                support_size,
                inside_structure: inside,
            });
        }
    }

    let gcd = data.fixed_class_count();
    let n_prime_k = n_prime(prop.map(), k).to_u64().unwrap_or(0);
    let per_sigma: Vec<SigmaSummary> = sigmas
        .iter()
        .map(|&sigma| {
            let mine: Vec<&ScanOutcome> = outcomes.iter().filter(|o| o.sigma == sigma).collect();
            let vanishing_js: Vec<usize> = mine
                .iter()
                .filter(|o| o.outcome == Outcome::Vanishes)
                .map(|o| o.j)
                .collect();
            let classes: BTreeSet<u64> = vanishing_js.iter().map(|&j| j as u64 % data.p).collect();
            SigmaSummary {
                sigma,
                vanishing_classes: classes.len() as u64,
                surviving: mine.len() - vanishing_js.len(),
                max_support: mine.iter().filter_map(|o| o.support_size).max().unwrap_or(0),
                vanishing_js,
            }
        })
        .collect();

    let mut sigma_outcomes = BTreeMap::new();
    for o in outcomes.iter().filter(|o| o.j == 0) {
        sigma_outcomes.insert(o.sigma, o.outcome);
    }
    let j0_dichotomy = match (sigma_outcomes.get(&0), sigma_outcomes.get(&2)) {
        (Some(a), Some(b)) => Some((*a == Outcome::Vanishes) != (*b == Outcome::Vanishes)),
        _ => None,
    };
    let vanishing_js: Vec<usize> = outcomes
        .iter()
        .filter(|o| o.outcome == Outcome::Vanishes)
        .map(|o| o.j)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let checks = ScanChecks {
        gcd_identity: gcd == n_prime_k,
        j0_dichotomy,
        congruence: vanishing_js.iter().all(|&j| data.is_fixed_class(j)),
        classes_bounded: per_sigma.iter().all(|s| s.vanishing_classes <= gcd),
        classes_divide: per_sigma
            .iter()
            .all(|s| s.vanishing_classes == 0 || gcd % s.vanishing_classes == 0),
        total_bounded: per_sigma.iter().map(|s| s.vanishing_js.len() as u64).sum::<u64>() <= gcd * sigmas.len() as u64,
        rarity: per_sigma
            .iter()
            .all(|s| s.vanishing_js.len() as u128 * data.p as u128 <= gcd as u128 * data.n as u128),
        support_within_four: per_sigma.iter().all(|s| s.max_support <= 4),
    };
    Ok(EvenCaseReport {
        k,
        n: data.n,
        p: data.p,
        a_k: data.a_k,
        t,
        branch: qp.branch,
        phi,
        vanish_tol: tol,
        support_threshold: threshold,
        support_set: support_set.unwrap_or_default(),
        scanned_js: js.len(),
        vanishing_js,
        sigma_outcomes,
        per_sigma,
        gcd_a_minus_one_p: gcd,
        n_prime_k,
        checks,
        outcomes,
    })
}

impl EvenCaseReport {
    pub fn write_json<W: Write>(&self, w: &mut W) -> crate::Result<()> {
        serde_json::to_writer_pretty(&mut *w, self)?;
        writeln!(w)?;
        Ok(())
    }

    /// One row per scanned branch: `k,N,branch,sigma,max_support,vanishing,classes,gcd_identity`.
    pub fn write_csv<W: Write>(&self, w: &mut W, header: &Header) -> io::Result<()> {
        header.write_to(w)?;
        writeln!(w, "k,N,branch,sigma,max_support,vanishing,classes,gcd_identity")?;
        for s in &self.per_sigma {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                self.k,
                self.n,
                self.branch,
                s.sigma,
                s.max_support,
                s.vanishing_js.len(),
                s.vanishing_classes,
                self.checks.gcd_identity
            )?;
        }
        Ok(())
    }
}

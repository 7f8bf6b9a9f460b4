//! Quantization on `H_N(0)`: the Gauss-sum propagator `M_{N,0}`, quantum
//! translations `W_N(m)`, trigonometric observables and the exact Egorov
//! and dispersive checks.
//!
//! All phases are evaluated from exact integer residues. An entry of
//! `M_{N,0}` is a sum of `exp(2πi·n/D)` with `D = 2N|b|` and `n` an integer
//! reduced mod `D` before any floating-point work, so accuracy does not
//! degrade with `N`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::{self, Write};
use std::sync::OnceLock;

use ndarray::{Array2, ArrayView2};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::arith::{p_seq, CatMap};
use crate::error::{Error, Result};
use crate::io::{Header, FORMAT_VERSION};
use crate::mode::FourierMode;
use crate::par::Backend;

pub const DEFAULT_N_MAX: usize = 8192;
pub const UNITARITY_TOL: f64 = 1e-8;
pub const EGOROV_TOL: f64 = 1e-8;

/// Above this dimension the construction-time unitarity check samples
/// columns instead of forming the full Gram matrix.
const FULL_CHECK_LIMIT: usize = 2048;
const SAMPLED_CHECK_COLUMNS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitarityCheck {
    Full,
    Sampled(usize),
    Skip,
}

#[derive(Debug, Clone)]
pub struct PropagatorOptions {
    pub n_max: usize,
    pub unitarity_tol: f64,
    /// `None` picks `Full` up to N = 2048 and a 16-column sample beyond.
    pub check: Option<UnitarityCheck>,
    pub backend: Backend,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        PropagatorOptions {
            n_max: DEFAULT_N_MAX,
            unitarity_tol: UNITARITY_TOL,
            check: None,
            backend: Backend::default(),
        }
    }
}

/// `exp(2πi·k/denominator)` for every residue `k`.
struct RootTable {
    denominator: u64,
    roots: Vec<Complex64>,
}

impl RootTable {
    fn new(denominator: u64) -> RootTable {
        let roots = (0..denominator)
            .map(|k| {
                let (s, c) = (2.0 * PI * k as f64 / denominator as f64).sin_cos();
                Complex64::new(c, s)
            })
            .collect();
        RootTable { denominator, roots }
    }

    #[inline]
    fn get(&self, residue: u64) -> Complex64 {
        self.roots[residue as usize]
    }
}

/// `exp(2πi·numerator/denominator)` with the fraction reduced exactly first.
pub fn unit_phase(numerator: i128, denominator: u64) -> Complex64 {
    let r = numerator.rem_euclid(denominator as i128) as f64;
    let (s, c) = (2.0 * PI * r / denominator as f64).sin_cos();
    Complex64::new(c, s)
}

#[inline]
fn mulmod(x: u64, y: u64, m: u64) -> u64 {
    ((x as u128 * y as u128) % m as u128) as u64
}

/// The dense unitary `M_{N,0}`, stored row-major as `entries[(k, j)] = ⟨M e_j, e_k⟩`.
#[derive(Debug)]
pub struct Propagator {
    map: CatMap,
    n: usize,
    entries: Array2<Complex64>,
    adjoint: OnceLock<Array2<Complex64>>,
    backend: Backend,
}

impl Clone for Propagator {
    fn clone(&self) -> Self {
        Propagator {
            map: self.map,
            n: self.n,
            entries: self.entries.clone(),
            adjoint: OnceLock::new(),
            backend: self.backend,
        }
    }
}

pub fn build_propagator(map: &CatMap, n: usize) -> Result<Propagator> {
    build_propagator_with(map, n, &PropagatorOptions::default())
}

pub fn build_propagator_with(map: &CatMap, n: usize, opts: &PropagatorOptions) -> Result<Propagator> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be at least 1".into()));
    }
    if n > opts.n_max {
        return Err(Error::TooLarge { n, max: opts.n_max });
    }
    let entries = gauss_sum_entries(map, n, opts.backend);
    let prop = Propagator {
        map: *map,
        n,
        entries,
        adjoint: OnceLock::new(),
        backend: opts.backend,
    };
    let check = opts.check.unwrap_or(if n <= FULL_CHECK_LIMIT {
        UnitarityCheck::Full
    } else {
        UnitarityCheck::Sampled(SAMPLED_CHECK_COLUMNS)
    });
    let defect = match check {
        UnitarityCheck::Full => Some(prop.unitarity_defect()),
        UnitarityCheck::Sampled(cols) => Some(prop.sampled_unitarity_defect(cols)),
        UnitarityCheck::Skip => None,
    };
    if let Some(defect) = defect {
        if !(defect <= opts.unitarity_tol) {
            return Err(Error::UnitarityFailure { defect });
        }
    }
    Ok(prop)
}

/// Entry `(k, j)`:
/// `1/√(N|b|) Σ_{r<|b|} exp(2πi/b · (a r²N/2 + a r j + a j²/(2N) + d k²/(2N) − k r − k j/N))`.
/// Multiplying the bracket by `2N` gives the integer
/// `a r² N² + 2 a r j N + a j² + d k² − 2 k r N − 2 k j` over `D = 2N b`.
fn gauss_sum_entries(map: &CatMap, n: usize, backend: Backend) -> Array2<Complex64> {
    let b_abs = map.b().unsigned_abs();
    let sign: i128 = map.b().signum() as i128;
    let n64 = n as u64;
    let den = 2 * n64 * b_abs;
    let den_i = den as i128;
    let table = RootTable::new(den);
    let a = map.a() as i128;
    let d = map.d() as i128;
    let ni = n as i128;

    // (r, j) part: a r² N² + 2 a r j N + a j²
    let rj: Vec<u64> = (0..n)
        .flat_map(|j| {
            let ji = j as i128;
            (0..b_abs as i128).map(move |r| {
                (sign * (a * r * r * ni * ni + 2 * a * r * ji * ni + a * ji * ji)).rem_euclid(den_i) as u64
            })
        })
        .collect();
    let scale = 1.0 / ((n64 * b_abs) as f64).sqrt();
    let b_len = b_abs as usize;
    let mut data = vec![Complex64::zero(); n * n];
    backend.for_each_chunk(&mut data, n, |k, row| {
        let ki = k as i128;
        let dk = (sign * d * ki * ki).rem_euclid(den_i) as u64;
        // −2k·(rN + j), with the sign of b folded in
        let two_k = ((2 * ki).rem_euclid(den_i)) as u64;
        for (j, slot) in row.iter_mut().enumerate() {
            let mut acc = Complex64::zero();
            let base = &rj[j * b_len..(j + 1) * b_len];
            for (r, &res_rj) in base.iter().enumerate() {
                let lin = (r as u64 * n64 + j as u64) % den;
                let cross = mulmod(two_k, lin, den);
                let cross = if sign > 0 { den - cross } else { cross } % den;
                let idx = (res_rj + dk + cross) % den;
                acc += table.get(idx);
            }
            *slot = acc * scale;
        }
    });
    debug_assert_eq!(table.denominator, den);
    Array2::from_shape_vec((n, n), data).expect("n*n entries")
}

impl Propagator {
    pub fn map(&self) -> &CatMap {
        &self.map
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn matrix(&self) -> ArrayView2<'_, Complex64> {
        self.entries.view()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    /// `M*`, materialized on first use.
    pub fn adjoint(&self) -> &Array2<Complex64> {
        self.adjoint
            .get_or_init(|| self.entries.t().mapv(|z| z.conj()).as_standard_layout().into_owned())
    }

    /// `M x`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        let rows = &self.entries;
        self.backend.map(self.n, |k| {
            rows.row(k)
                .iter()
                .zip(x)
                .fold(Complex64::zero(), |acc, (m, v)| acc + m * v)
        })
    }

    /// `M* x`.
    pub fn apply_adjoint(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        let adj = self.adjoint();
        self.backend.map(self.n, |j| {
            adj.row(j)
                .iter()
                .zip(x)
                .fold(Complex64::zero(), |acc, (m, v)| acc + m * v)
        })
    }

    /// `M^r x`, by repeated application (`M*` for negative `r`).
    pub fn apply_power(&self, x: &[Complex64], r: i64) -> Vec<Complex64> {
        let mut v = x.to_vec();
        for _ in 0..r.unsigned_abs() {
            v = if r > 0 { self.apply(&v) } else { self.apply_adjoint(&v) };
        }
        v
    }

    /// `M X` for a block of column vectors.
    pub fn apply_block(&self, x: &Array2<Complex64>) -> Array2<Complex64> {
        self.entries.dot(x)
    }

    /// `‖M*M − I‖_max` from the full Gram matrix.
    pub fn unitarity_defect(&self) -> f64 {
        let gram = self.adjoint().dot(&self.entries);
        max_identity_defect(&gram)
    }

    /// Gram entries `⟨M e_j, M e_i⟩ − δ_ij` for `cols` evenly spaced `i` and all `j`.
    pub fn sampled_unitarity_defect(&self, cols: usize) -> f64 {
        let picks = spaced_indices(self.n, cols);
        let adj = self.adjoint();
        let worst = self.backend.map(picks.len(), |p| {
            let i = picks[p];
            let gram = adj.dot(&self.entries.column(i));
            gram.iter()
                .enumerate()
                .map(|(j, g)| (g - if i == j { 1.0 } else { 0.0 }).norm())
                .fold(0.0, f64::max)
        });
        worst.into_iter().fold(0.0, f64::max)
    }

    /// Column-major `(re, im)` little-endian doubles after a fixed header:
    /// magic `CATMAPM\0`, `u32` format version, four `i64` matrix entries, `u64` N.
    pub fn write_binary<W: Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(b"CATMAPM\0")?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        for e in self.map.entries() {
            w.write_all(&e.to_le_bytes())?;
        }
        w.write_all(&(self.n as u64).to_le_bytes())?;
        for j in 0..self.n {
            for k in 0..self.n {
                let z = self.entries[(k, j)];
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// `col,row,re,im` lines in column-major order under a `#` header block.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        Header::new("propagator", &self.map).with_n(self.n).write_to(w)?;
        writeln!(w, "col,row,re,im")?;
        for j in 0..self.n {
            for k in 0..self.n {
                let z = self.entries[(k, j)];
                writeln!(w, "{j},{k},{},{}", z.re, z.im)?;
            }
        }
        Ok(())
    }
}

/// Reads back what [`Propagator::write_binary`] produced: `(matrix, N, column-major entries)`.
pub fn read_binary(bytes: &[u8]) -> Result<([i64; 4], usize, Vec<Complex64>)> {
    let bad = || Error::InvalidInput("malformed propagator file".into());
    if bytes.len() < 52 || &bytes[..8] != b"CATMAPM\0" {
        return Err(bad());
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::InvalidInput(format!("unsupported format version {version}")));
    }
    let mut matrix = [0i64; 4];
    for (i, m) in matrix.iter_mut().enumerate() {
        let off = 12 + 8 * i;
        *m = i64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
    }
    let n = u64::from_le_bytes(bytes[44..52].try_into().unwrap()) as usize;
    let body = &bytes[52..];
    if body.len() != n * n * 16 {
        return Err(bad());
    }
    let entries = body
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Ok((matrix, n, entries))
}

pub(crate) fn spaced_indices(n: usize, count: usize) -> Vec<usize> {
    if count >= n {
        return (0..n).collect();
    }
    let mut out: Vec<usize> = (0..count).map(|i| i * n / count).collect();
    out.dedup();
    out
}

fn max_identity_defect(m: &Array2<Complex64>) -> f64 {
    m.indexed_iter()
        .map(|((i, j), z)| {
            let target = if i == j { 1.0 } else { 0.0 };
            (z - target).norm()
        })
        .fold(0.0, f64::max)
}

/// A vector in `H_N(0)` written in the standard basis `{e_j^0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    coords: Vec<Complex64>,
}

impl QuantumState {
    pub fn new(coords: Vec<Complex64>) -> QuantumState {
        QuantumState { coords }
    }

    pub fn basis(n: usize, j: usize) -> QuantumState {
        let mut coords = vec![Complex64::zero(); n];
        coords[j] = Complex64::new(1.0, 0.0);
        QuantumState { coords }
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<Complex64> {
        self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn linf(&self) -> f64 {
        self.coords.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `⟨self, other⟩`, linear in the first slot.
    pub fn inner(&self, other: &QuantumState) -> Complex64 {
        inner(&self.coords, &other.coords)
    }

    pub fn scaled(&self, s: Complex64) -> QuantumState {
        QuantumState::new(self.coords.iter().map(|z| z * s).collect())
    }
}

pub(crate) fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter()
        .zip(y)
        .fold(Complex64::zero(), |acc, (a, b)| acc + a * b.conj())
}

/// `W_N(m)`: `e_j ↦ γ_{N,m,j} e_{j−m2}` with `γ = exp(πi(2 m1 j − m1 m2)/N)`.
///
/// The operator depends on `m` only modulo `2N`; the stored mode is reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Translation {
    n: usize,
    mode: FourierMode,
}

pub fn translation(n: usize, m: FourierMode) -> Translation {
    Translation::new(n, m)
}

impl Translation {
    pub fn new(n: usize, m: FourierMode) -> Translation {
        assert!(n > 0);
        let two_n = 2 * n as i64;
        Translation {
            n,
            mode: FourierMode::new(m.m1.rem_euclid(two_n), m.m2.rem_euclid(two_n)),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The mode reduced into `[0, 2N)²`.
    pub fn mode(&self) -> FourierMode {
        self.mode
    }

    /// Index of the image of `e_j`.
    #[inline]
    pub fn target(&self, j: usize) -> usize {
        let n = self.n as i64;
        (j as i64 - self.mode.m2).rem_euclid(n) as usize
    }

    /// Index `i` with `target(i) = l`.
    #[inline]
    pub fn source(&self, l: usize) -> usize {
        let n = self.n as i64;
        (l as i64 + self.mode.m2).rem_euclid(n) as usize
    }

    #[inline]
    pub fn gamma(&self, j: usize) -> Complex64 {
        let (m1, m2) = (self.mode.m1 as i128, self.mode.m2 as i128);
        unit_phase(2 * m1 * j as i128 - m1 * m2, 2 * self.n as u64)
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![Complex64::zero(); self.n];
        for (j, v) in x.iter().enumerate() {
            y[self.target(j)] = self.gamma(j) * v;
        }
        y
    }

    pub fn apply_state(&self, u: &QuantumState) -> QuantumState {
        QuantumState::new(self.apply(u.coords()))
    }

    pub fn matrix(&self) -> Array2<Complex64> {
        let mut m = Array2::zeros((self.n, self.n));
        for j in 0..self.n {
            m[(self.target(j), j)] = self.gamma(j);
        }
        m
    }
}

/// `Σ_m c_m W_N(m)` for a finite Fourier expansion.
#[derive(Debug, Clone)]
pub struct TrigOperator {
    n: usize,
    terms: Vec<(Translation, Complex64)>,
}

pub fn quantize_trig(n: usize, coeffs: &BTreeMap<FourierMode, Complex64>) -> TrigOperator {
    TrigOperator {
        n,
        terms: coeffs.iter().map(|(m, c)| (Translation::new(n, *m), *c)).collect(),
    }
}

impl TrigOperator {
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::zero(); self.n];
        for (w, c) in &self.terms {
            for (j, v) in x.iter().enumerate() {
                y[w.target(j)] += c * w.gamma(j) * v;
            }
        }
        y
    }

    pub fn matrix(&self) -> Array2<Complex64> {
        let mut m = Array2::zeros((self.n, self.n));
        for (w, c) in &self.terms {
            for j in 0..self.n {
                m[(w.target(j), j)] += c * w.gamma(j);
            }
        }
        m
    }

    /// `⟨Op(a) u, u⟩`.
    pub fn expectation(&self, u: &QuantumState) -> Complex64 {
        inner(&self.apply(u.coords()), u.coords())
    }
}

/// `‖M* W_N(m) M − W_N(Aᵀ m)‖_max`.
pub fn egorov_defect(prop: &Propagator, m: FourierMode) -> f64 {
    let n = prop.n();
    let w = Translation::new(n, m);
    let target = Translation::new(n, prop.map().transpose_apply(m));
    // W M: row i of M lands on row target(i), scaled by γ_i
    let mut wm = Array2::<Complex64>::zeros((n, n));
    for i in 0..n {
        let g = w.gamma(i);
        let t = w.target(i);
        let src = prop.entries.row(i);
        wm.row_mut(t).iter_mut().zip(src.iter()).for_each(|(d, s)| *d = g * s);
    }
    let mut conj = prop.adjoint().dot(&wm);
    for j in 0..n {
        conj[(target.target(j), j)] -= target.gamma(j);
    }
    conj.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `sqrt(gcd(N, |b|·p_|r|) / N)`.
pub fn dispersive_bound(map: &CatMap, n: usize, r: i64) -> f64 {
    let br = p_seq(map, r.unsigned_abs()) * map.b().abs();
    let g = BigInt::from(n).gcd(&br);
    (g.to_f64().unwrap_or(f64::INFINITY) / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussBound {
    pub value: f64,
    pub bound: f64,
    pub holds: bool,
}

pub const GAUSS_SLACK: f64 = 1e-9;

/// `|⟨W_N(m) M^r e_j, e_l⟩|` against its dispersive bound.
pub fn gauss_bound_report(prop: &Propagator, r: i64, m: FourierMode, j: usize, l: usize) -> Result<GaussBound> {
    let n = prop.n();
    if r == 0 {
        return Err(Error::InvalidInput("r must be nonzero".into()));
    }
    if j >= n || l >= n {
        return Err(Error::InvalidInput(format!("indices must lie in [0, {n})")));
    }
    let f = prop.apply_power(QuantumState::basis(n, j).coords(), r);
    let w = Translation::new(n, m);
    let value = f[w.source(l)].norm();
    let bound = dispersive_bound(prop.map(), n, r);
    Ok(GaussBound {
        value,
        bound,
        holds: value <= bound + GAUSS_SLACK,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussSweep {
    pub checked: usize,
    pub violations: Vec<(i64, FourierMode, usize)>,
    /// Largest `value − bound` seen.
    pub worst_margin: f64,
}

/// Diagonal (`l = j`) dispersive checks for `r = 1..=r_max`, every mode and every column in `js`.
pub fn gauss_sweep(prop: &Propagator, r_max: u64, modes: &[FourierMode], js: &[usize]) -> GaussSweep {
    let n = prop.n();
    let mut block = Array2::<Complex64>::zeros((n, js.len()));
    for (c, &j) in js.iter().enumerate() {
        block[(j, c)] = Complex64::new(1.0, 0.0);
    }
    let mut out = GaussSweep {
        checked: 0,
        violations: Vec::new(),
        worst_margin: f64::NEG_INFINITY,
    };
    for r in 1..=r_max as i64 {
        block = prop.apply_block(&block);
        let bound = dispersive_bound(prop.map(), n, r);
        for &m in modes {
            let w = Translation::new(n, m);
            for (c, &j) in js.iter().enumerate() {
                let value = block[(w.source(j), c)].norm();
                out.checked += 1;
                out.worst_margin = out.worst_margin.max(value - bound);
                if value > bound + GAUSS_SLACK {
                    out.violations.push((r, m, j));
                }
            }
        }
    }
    out
}

//! Equidistribution measurements: modewise matrix elements `⟨W_N(m)u, u⟩`,
//! their diagonal/off-diagonal decomposition through Egorov, rate fits and
//! Gaussian-smoothed Wigner grids.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::transpose_orbit_mod;
use crate::error::{Error, Result};
use crate::heisenberg::{Propagator, QuantumState, Translation};
use crate::io::Header;
use crate::mode::FourierMode;
use crate::par::Backend;
use crate::states::{inverse_omega_power, ProjectorSpec};

/// `⟨W_N(m)u, u⟩` in `O(N)`.
pub fn matrix_element(u: &QuantumState, m: FourierMode) -> Complex64 {
    let w = Translation::new(u.n(), m);
    let c = u.coords();
    c.iter().enumerate().fold(Complex64::zero(), |acc, (j, x)| {
        acc + w.gamma(j) * x * c[w.target(j)].conj()
    })
}

/// `(1 + log(1 + ‖m‖))/t`.
pub fn mode_bound(m: FourierMode, t: u64) -> f64 {
    (1.0 + (1.0 + m.norm()).ln()) / t as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeValue {
    pub m: FourierMode,
    pub value: Complex64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquidistReport {
    pub n: usize,
    pub t: u64,
    /// `⟨W_N(0)u, u⟩`, which is `‖u‖²`.
    pub dc: Complex64,
    pub modes: Vec<ModeValue>,
    /// `max |⟨W_N(m)u, u⟩|` over the tabulated nonzero modes.
    pub worst_deviation: f64,
}

/// Every `m` with `0 < ‖m‖∞ ≤ cutoff`, in lexicographic order.
pub fn equidist_report(u: &QuantumState, spec: &ProjectorSpec, mode_cutoff: i64) -> EquidistReport {
    let modes: Vec<FourierMode> = FourierMode::square(mode_cutoff).filter(|m| !m.is_zero()).collect();
    let values = Backend::default().map(modes.len(), |i| ModeValue {
        m: modes[i],
        value: matrix_element(u, modes[i]),
        bound: mode_bound(modes[i], spec.t),
    });
    let worst_deviation = values.iter().map(|v| v.value.norm()).fold(0.0, f64::max);
    EquidistReport {
        n: u.n(),
        t: spec.t,
        dc: matrix_element(u, FourierMode::ZERO),
        modes: values,
        worst_deviation,
    }
}

impl EquidistReport {
    pub fn write_csv<W: Write>(&self, w: &mut W, header: &Header) -> io::Result<()> {
        header.write_to(w)?;
        writeln!(w, "m1,m2,re,im,modulus,bound")?;
        for v in &self.modes {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                v.m.m1,
                v.m.m2,
                v.value.re,
                v.value.im,
                v.value.norm(),
                v.bound
            )?;
        }
        Ok(())
    }
}

/// Split of `⟨W_N(m)v, v⟩ = (1/t²) Σ_{r,s} ω^{s−r} ⟨W_N(B^s m) M^{r−s} e_j, e_j⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalSplit {
    /// Terms with `r = s`.
    pub diag: Complex64,
    pub offdiag: Complex64,
    /// The `s < t` whose diagonal term is nonzero, i.e. `(B^s m)_2 ≡ 0 (mod N)`.
    pub resonant: Vec<u64>,
}

impl DiagonalSplit {
    pub fn total(&self) -> Complex64 {
        self.diag + self.offdiag
    }
}

/// Evaluates the double sum through `2(t−1)` applications of `M` and `M*`
/// and the exact orbit `B^s m mod 2N`, for the unnormalized `v` of `spec`.
pub fn diagonal_split(prop: &Propagator, spec: &ProjectorSpec, m: FourierMode) -> DiagonalSplit {
    let n = prop.n();
    let t = spec.t as usize;
    let j = spec.j;

    // f[t−1+q] = M^q e_j for |q| < t
    let mut f = vec![Vec::new(); 2 * t - 1];
    f[t - 1] = QuantumState::basis(n, j).into_coords();
    for q in 1..t {
        f[t - 1 + q] = prop.apply(&f[t - 2 + q]);
        f[t - 1 - q] = prop.apply_adjoint(&f[t - q]);
    }
    let orbit = transpose_orbit_mod(prop.map(), m, t, 2 * n as u64);
    let z: Vec<Complex64> = (0..t as u64)
        .map(|s| inverse_omega_power(spec.phi, spec.sigma, spec.t, s))
        .collect();

    let mut diag = Complex64::zero();
    let mut offdiag = Complex64::zero();
    let mut resonant = Vec::new();
    for (s, mode) in orbit.iter().enumerate() {
        let w = Translation::new(n, *mode);
        let src = w.source(j);
        if mode.m2 as usize % n == 0 {
            resonant.push(s as u64);
        }
        let g = w.gamma(src);
        for r in 0..t {
            let fq = &f[t - 1 + r - s];
            let term = z[r] * z[s].conj() * g * fq[src];
            if r == s {
                diag += term;
            } else {
                offdiag += term;
            }
        }
    }
    let scale = 1.0 / (t * t) as f64;
    DiagonalSplit {
        diag: diag * scale,
        offdiag: offdiag * scale,
        resonant,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateModel {
    /// `dev ≈ C·N^{−c}`.
    Power,
    /// `dev ≈ C·(log N)^{−c}`.
    InverseLog,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub model: RateModel,
    /// Fitted decay exponent `c`.
    pub exponent: f64,
    pub log_prefactor: f64,
    /// RMS residual of the fit in log space.
    pub quality: f64,
}

/// Least squares of `log dev` against `log N` or `log log N`.
pub fn rate_fit(points: &[(f64, f64)], model: RateModel) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::Degenerate(format!("{} points, need at least 3", points.len())));
    }
    if let Some(&(n, d)) = points.iter().find(|&&(_, d)| !(d > 10.0 * f64::EPSILON)) {
        return Err(Error::Degenerate(format!(
            "deviation {d:e} at N = {n} is at machine precision"
        )));
    }
    if points.iter().any(|&(n, _)| !(n > 1.0)) {
        return Err(Error::Degenerate("N must exceed 1".into()));
    }
    let xs: Vec<f64> = points
        .iter()
        .map(|&(n, _)| match model {
            RateModel::Power => n.ln(),
            RateModel::InverseLog => n.ln().ln(),
        })
        .collect();
    let ys: Vec<f64> = points.iter().map(|&(_, d)| d.ln()).collect();
    let len = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / len;
    let my = ys.iter().sum::<f64>() / len;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx < 1e-12 {
        return Err(Error::Degenerate("all N coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(RateFit {
        model,
        exponent: -slope,
        log_prefactor: intercept,
        quality: (rss / len).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WignerParams {
    pub resolution: usize,
    pub smoothing: f64,
    pub cutoff: i64,
}

impl WignerParams {
    /// `s = √N/8`, cutoff `min(⌈4s⌉, ⌊N/2⌋)`, `G = 256`.
    pub fn for_n(n: usize) -> WignerParams {
        let smoothing = (n as f64).sqrt() / 8.0;
        let cutoff = ((4.0 * smoothing).ceil() as i64).min(n as i64 / 2);
        WignerParams {
            resolution: 256,
            smoothing,
            cutoff,
        }
    }
}

/// `values[a·G + b]` is the density at `(x, ξ) = (a/G, b/G)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub resolution: usize,
    pub smoothing: f64,
    pub mode_cutoff: i64,
    pub values: Vec<f64>,
    /// Largest imaginary part discarded when taking the real grid.
    pub max_imag: f64,
}

/// `Σ_{‖m‖∞≤cutoff} ⟨W_N(m)u,u⟩ e^{−‖m‖²/2s²} e^{−2πi(m1 x + m2 ξ)}` on a `G×G` grid.
pub fn smoothed_wigner(u: &QuantumState, params: &WignerParams) -> Result<WignerGrid> {
    let WignerParams {
        resolution: g,
        smoothing: s,
        cutoff,
    } = *params;
    let n = u.n();
    if g == 0 || !(s > 0.0) || cutoff < 0 {
        return Err(Error::InvalidInput(
            "grid size, smoothing and cutoff must be positive".into(),
        ));
    }
    if cutoff > n as i64 / 2 {
        return Err(Error::InvalidInput(format!("cutoff {cutoff} exceeds N/2 = {}", n / 2)));
    }
    if cutoff as usize >= g {
        return Err(Error::InvalidInput(format!(
            "cutoff {cutoff} must be below the grid size {g}"
        )));
    }
    let width = (2 * cutoff + 1) as usize;
    let backend = Backend::default();
    let coeffs: Vec<Complex64> = backend.map(width * width, |idx| {
        let m = FourierMode::new(idx as i64 / width as i64 - cutoff, idx as i64 % width as i64 - cutoff);
        matrix_element(u, m) * (-m.squared_norm() / (2.0 * s * s)).exp()
    });
    let phase = |m: i64, a: usize| -> Complex64 {
        let r = (m * a as i64).rem_euclid(g as i64) as f64 / g as f64;
        Complex64::from_polar(1.0, -2.0 * PI * r)
    };
    // rows[m1][b] = Σ_{m2} c_{m1,m2} e^{−2πi m2 b/G}
    let rows: Vec<Vec<Complex64>> = backend.map(width, |i| {
        (0..g)
            .map(|b| {
                (0..width).fold(Complex64::zero(), |acc, k| {
                    acc + coeffs[i * width + k] * phase(k as i64 - cutoff, b)
                })
            })
            .collect()
    });
    let grid: Vec<Vec<Complex64>> = backend.map(g, |a| {
        let weights: Vec<Complex64> = (0..width).map(|i| phase(i as i64 - cutoff, a)).collect();
        (0..g)
            .map(|b| (0..width).fold(Complex64::zero(), |acc, i| acc + weights[i] * rows[i][b]))
            .collect()
    });
    let max_imag = grid.iter().flatten().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(WignerGrid {
        resolution: g,
        smoothing: s,
        mode_cutoff: cutoff,
        values: grid.into_iter().flatten().map(|z| z.re).collect(),
        max_imag,
    })
}

pub const PGM_FLOOR: f64 = 1e-6;

impl WignerGrid {
    pub fn value(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.resolution + b]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `max |W − mean| / |mean|`.
    pub fn rel_sup_dev(&self) -> f64 {
        let mean = self.mean();
        self.values.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max) / mean.abs()
    }

    /// 8-bit binary PGM of `log10(max(W, 1e−6))`, stretched to `[0, 255]`.
    /// Columns run along `x`, rows along `ξ` with `ξ` increasing upwards.
    pub fn write_pgm<W: Write>(&self, w: &mut W, header: &Header) -> io::Result<()> {
        let g = self.resolution;
        let logs: Vec<f64> = self.values.iter().map(|v| v.max(PGM_FLOOR).log10()).collect();
        let lo = logs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        writeln!(w, "P5")?;
        for line in header.lines() {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "{g} {g}")?;
        writeln!(w, "255")?;
        let mut pixels = Vec::with_capacity(g * g);
        for row in 0..g {
            let b = g - 1 - row;
            for a in 0..g {
                let l = logs[a * g + b];
                let level = if hi - lo > 1e-12 {
                    (l - lo) / (hi - lo) * 255.0
                } else {
                    255.0
                };
                pixels.push(level.round().clamp(0.0, 255.0) as u8);
            }
        }
        w.write_all(&pixels)
    }

    pub fn write_csv<W: Write>(&self, w: &mut W, header: &Header) -> io::Result<()> {
        header.write_to(w)?;
        writeln!(w, "a,b,value")?;
        for a in 0..self.resolution {
            for b in 0..self.resolution {
                writeln!(w, "{a},{b},{}", self.value(a, b))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::resonance_set;
    use crate::heisenberg::{build_propagator, dispersive_bound};
    use crate::states::{normalize, projector_state, vanish_tol, Parity};
    use crate::CatMap;
    use num_bigint::BigInt;

    fn odd_state(n: usize, k: u64, j: usize) -> (Propagator, ProjectorSpec, QuantumState) {
        let p = build_propagator(&CatMap::standard(), n).unwrap();
        let spec = ProjectorSpec::new(&p, Parity::Odd, k, j, 0).unwrap();
        let (v, _) = projector_state(&p, &spec);
        (p, spec, v)
    }

    #[test]
    fn matrix_element_basics() {
        let e = QuantumState::basis(7, 0);
        assert!((matrix_element(&e, FourierMode::ZERO) - 1.0).norm() < 1e-15);
        assert!(matrix_element(&e, FourierMode::new(0, 1)).norm() < 1e-15);
        assert!((matrix_element(&e, FourierMode::new(1, 0)).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn report_on_trivial_state() {
        let (_, spec, v) = odd_state(1, 0, 0);
        let u = normalize(&v, vanish_tol(1)).unwrap();
        let r = equidist_report(&u, &spec, 0);
        assert!(r.modes.is_empty());
        assert!((r.dc - 1.0).norm() < 1e-12);
    }

    #[test]
    fn hermitian_symmetry_and_split() {
        let (p, spec, v) = odd_state(71, 3, 4);
        let u = normalize(&v, vanish_tol(71)).unwrap();
        let r = equidist_report(&u, &spec, 3);
        assert_eq!(r.modes.len(), 48);
        for mv in &r.modes {
            let back = matrix_element(&u, -mv.m);
            assert!((back - mv.value.conj()).norm() < 1e-10);
        }
        for m in FourierMode::square(3) {
            let split = diagonal_split(&p, &spec, m);
            assert!((split.total() - matrix_element(&v, m)).norm() < 1e-9, "m={m}");
        }
        let dc = diagonal_split(&p, &spec, FourierMode::ZERO);
        assert!((dc.diag - 1.0 / 7.0).norm() < 1e-14);
        assert_eq!(dc.resonant, (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn resonant_terms_match_arithmetic() {
        let (p, spec, _) = odd_state(71, 3, 0);
        for m in FourierMode::square(4).filter(|m| !m.is_zero()) {
            let split = diagonal_split(&p, &spec, m);
            let exact = resonance_set(p.map(), m, &BigInt::from(0), 7).unwrap();
            assert_eq!(split.resonant, exact, "m={m}");
        }
    }

    #[test]
    fn offdiag_within_dispersive_bound() {
        let (p, spec, _) = odd_state(71, 3, 2);
        let worst = (1..7).map(|r| dispersive_bound(p.map(), 71, r)).fold(0.0, f64::max);
        let split = diagonal_split(&p, &spec, FourierMode::new(1, 0));
        assert!(split.offdiag.norm() <= worst + 1e-12);
    }

    #[test]
    fn rate_fits_recover_synthetic_models() {
        let ns = [71.0, 265.0, 989.0, 3691.0];
        let inv_log: Vec<(f64, f64)> = ns.iter().map(|&n: &f64| (n, 1.0 / n.ln())).collect();
        let fit = rate_fit(&inv_log, RateModel::InverseLog).unwrap();
        assert!((fit.exponent - 1.0).abs() < 1e-12 && fit.quality < 1e-12);
        let power: Vec<(f64, f64)> = ns.iter().map(|&n: &f64| (n, n.powf(-0.25))).collect();
        let fit = rate_fit(&power, RateModel::Power).unwrap();
        assert!((fit.exponent - 0.25).abs() < 0.01);
        assert!(rate_fit(&power[..2], RateModel::Power).is_err());
        assert!(rate_fit(&[(5.0, 1e-17), (7.0, 0.1), (9.0, 0.1)], RateModel::Power).is_err());
        assert!(rate_fit(&[(5.0, 0.2), (5.0, 0.1), (5.0, 0.3)], RateModel::Power).is_err());
    }

    #[test]
    fn wigner_constant_cases() {
        let e = QuantumState::basis(9, 0);
        let params = WignerParams {
            resolution: 16,
            smoothing: 1.0,
            cutoff: 0,
        };
        let grid = smoothed_wigner(&e, &params).unwrap();
        assert!(grid.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert_eq!(grid.rel_sup_dev(), 0.0);
        let bad = WignerParams { cutoff: 5, ..params };
        assert!(smoothed_wigner(&e, &bad).is_err());
    }

    #[test]
    fn wigner_preserves_mean_and_is_real() {
        let (_, _, v) = odd_state(265, 4, 0);
        let u = normalize(&v, vanish_tol(265)).unwrap();
        let params = WignerParams::for_n(265);
        assert_eq!(params.cutoff, 9);
        let grid = smoothed_wigner(&u, &params).unwrap();
        assert!((grid.mean() - 1.0).abs() < 1e-8);
        assert!(grid.max_imag < 1e-9);
        let localized = smoothed_wigner(&QuantumState::basis(265, 0), &params).unwrap();
        assert!(grid.rel_sup_dev() < localized.rel_sup_dev());
    }

    #[test]
    fn pgm_layout() {
        let grid = smoothed_wigner(
            &QuantumState::basis(9, 0),
            &WignerParams {
                resolution: 8,
                smoothing: 2.0,
                cutoff: 3,
            },
        )
        .unwrap();
        let mut out = Vec::new();
        let header = Header::new("wigner", &CatMap::standard()).with_n(9);
        grid.write_pgm(&mut out, &header).unwrap();
        let text_end = out.len() - 64;
        let head = String::from_utf8(out[..text_end].to_vec()).unwrap();
        assert!(head.starts_with("P5\n# catmap wigner\n"));
        assert!(head.ends_with("8 8\n255\n"));
        assert!(out[text_end..].contains(&255) && out[text_end..].contains(&0));
    }
}

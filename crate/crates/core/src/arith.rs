//! Exact integer arithmetic for the admissible cat-map family.
//!
//! Everything here is arbitrary precision: the Lucas-type sequence `p_r`
//! grows like `λ^r` and leaves 64 bits around `r = 33` for trace 4, while the
//! divisibility scans run up to `T = 60`.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Condition, Error, Result};
use crate::mode::FourierMode;

/// An admissible hyperbolic matrix `A = (a b; c d)`.
///
/// Construction enforces `ad − bc = 1`, `ab` and `cd` even, even trace
/// `> 2` and `gcd(b, c) = 1`. These force `b, c` odd and `a, d` even.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatMap {
    a: i64,
    b: i64,
    c: i64,
    d: i64,
    trace: i64,
    lambda: f64,
}

impl CatMap {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<CatMap> {
        let det = a as i128 * d as i128 - b as i128 * c as i128;
        if det != 1 {
            return Err(Error::ConditionViolation(Condition::Determinant));
        }
        if (a as i128 * b as i128) % 2 != 0 {
            return Err(Error::ConditionViolation(Condition::ProductAbEven));
        }
        if (c as i128 * d as i128) % 2 != 0 {
            return Err(Error::ConditionViolation(Condition::ProductCdEven));
        }
        let trace = a
            .checked_add(d)
            .ok_or_else(|| Error::InvalidInput("trace overflows i64".into()))?;
        if trace % 2 != 0 {
            return Err(Error::ConditionViolation(Condition::TraceEven));
        }
        if trace <= 2 {
            return Err(Error::ConditionViolation(Condition::TraceAboveTwo));
        }
        if b.unsigned_abs().gcd(&c.unsigned_abs()) != 1 {
            return Err(Error::ConditionViolation(Condition::CoprimeOffDiagonal));
        }
        debug_assert!(b % 2 != 0 && c % 2 != 0 && a % 2 == 0 && d % 2 == 0);

        let tr = trace as f64;
        let lambda = (tr + (tr * tr - 4.0).sqrt()) / 2.0;
        Ok(CatMap {
            a,
            b,
            c,
            d,
            trace,
            lambda,
        })
    }

    /// The running example `(2 3; 1 2)`.
    pub fn standard() -> CatMap {
        CatMap::new(2, 3, 1, 2).expect("(2,3;1,2) is admissible")
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    pub fn c(&self) -> i64 {
        self.c
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn trace(&self) -> i64 {
        self.trace
    }

    /// Expanding eigenvalue `λ > 1`.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn entries(&self) -> [i64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn matrix(&self) -> IntMat2 {
        IntMat2::from_i64(self.a, self.b, self.c, self.d)
    }

    /// `Aᵀ m`, the action on Fourier modes under Egorov conjugation.
    pub fn transpose_apply(&self, m: FourierMode) -> FourierMode {
        FourierMode::new(self.a * m.m1 + self.c * m.m2, self.b * m.m1 + self.d * m.m2)
    }
}

impl Default for CatMap {
    fn default() -> Self {
        CatMap::standard()
    }
}

/// Validates the four entries and caches trace and `λ`.
pub fn validate_catmap(a: i64, b: i64, c: i64, d: i64) -> Result<CatMap> {
    CatMap::new(a, b, c, d)
}

/// A 2×2 matrix of arbitrary-precision integers, `(a b; c d)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMat2 {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl IntMat2 {
    pub fn identity() -> IntMat2 {
        IntMat2::from_i64(1, 0, 0, 1)
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> IntMat2 {
        IntMat2 {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            d: d.into(),
        }
    }

    pub fn mul(&self, rhs: &IntMat2) -> IntMat2 {
        IntMat2 {
            a: &self.a * &rhs.a + &self.b * &rhs.c,
            b: &self.a * &rhs.b + &self.b * &rhs.d,
            c: &self.c * &rhs.a + &self.d * &rhs.c,
            d: &self.c * &rhs.b + &self.d * &rhs.d,
        }
    }

    /// Entrywise reduction into `[0, modulus)`.
    pub fn reduce(&self, modulus: &BigInt) -> IntMat2 {
        IntMat2 {
            a: self.a.mod_floor(modulus),
            b: self.b.mod_floor(modulus),
            c: self.c.mod_floor(modulus),
            d: self.d.mod_floor(modulus),
        }
    }

    pub fn is_identity_mod(&self, modulus: &BigInt) -> bool {
        let r = self.reduce(modulus);
        let one = BigInt::one().mod_floor(modulus);
        r.a == one && r.d == one && r.b.is_zero() && r.c.is_zero()
    }

    /// `p·A − q·I`.
    pub fn lucas_combination(map: &CatMap, p: &BigInt, q: &BigInt) -> IntMat2 {
        IntMat2 {
            a: p * map.a - q,
            b: p * map.b,
            c: p * map.c,
            d: p * map.d - q,
        }
    }

    pub fn det(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }
}

/// `p_r` from `p_0 = 0`, `p_1 = 1`, `p_{r+1} = tr(A)·p_r − p_{r−1}`.
pub fn p_seq(map: &CatMap, r: u64) -> BigInt {
    let mut prev = BigInt::zero();
    let mut cur = BigInt::one();
    if r == 0 {
        return prev;
    }
    for _ in 1..r {
        let next = &cur * map.trace - &prev;
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// `p_0, …, p_up_to`.
pub fn p_table(map: &CatMap, up_to: u64) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(up_to as usize + 1);
    out.push(BigInt::zero());
    if up_to == 0 {
        return out;
    }
    out.push(BigInt::one());
    for r in 2..=up_to as usize {
        let next = &out[r - 1] * map.trace - &out[r - 2];
        out.push(next);
    }
    out
}

/// `A^r` by binary exponentiation, reduced into `[0, modulus)` when given.
pub fn matrix_power(map: &CatMap, r: u64, modulus: Option<&BigInt>) -> IntMat2 {
    let reduce = |m: IntMat2| match modulus {
        Some(n) => m.reduce(n),
        None => m,
    };
    let mut result = reduce(IntMat2::identity());
    let mut base = reduce(map.matrix());
    let mut e = r;
    while e > 0 {
        if e & 1 == 1 {
            result = reduce(result.mul(&base));
        }
        e >>= 1;
        if e > 0 {
            base = reduce(base.mul(&base));
        }
    }
    result
}

/// `N′_q`, the largest `N` with `A^q ≡ I (mod N)`, from the closed forms
/// `N′_{2k+1} = p_k + p_{k+1}` and `N′_{2k} = 2 p_k`.
pub fn n_prime(map: &CatMap, q: u64) -> BigInt {
    assert!(q >= 1, "N'_q is defined for q >= 1");
    let k = q / 2;
    let value = if q % 2 == 1 {
        p_seq(map, k) + p_seq(map, k + 1)
    } else {
        p_seq(map, k) * 2
    };
    debug_assert_eq!(value, n_prime_oracle(map, q), "closed form disagrees at q = {q}");
    value
}

/// `gcd` of the entries of `A^q − I`, computed from the exact power.
pub fn n_prime_oracle(map: &CatMap, q: u64) -> BigInt {
    let p = matrix_power(map, q, None);
    let one = BigInt::from(1);
    let g: BigInt = (&p.a - &one).gcd(&p.b).gcd(&p.c).gcd(&(&p.d - &one));
    g.abs()
}

/// Minimal `t ≥ 1` with `A^t ≡ I (mod n)`. The default ceiling is `10·n`.
pub fn order_mod(map: &CatMap, n: &BigInt, ceiling: Option<u64>) -> Result<u64> {
    if !n.is_positive() {
        return Err(Error::InvalidInput(format!("modulus must be positive, got {n}")));
    }
    if n.is_one() {
        return Ok(1);
    }
    let ceiling = ceiling.unwrap_or_else(|| (n * 10u32).to_u64().unwrap_or(u64::MAX));
    let generator = map.matrix().reduce(n);
    let mut power = generator.clone();
    let mut t = 1u64;
    while !power.is_identity_mod(n) {
        if t >= ceiling {
            return Err(Error::NoOrderFound {
                modulus: n.to_string(),
                ceiling,
            });
        }
        power = power.mul(&generator).reduce(n);
        t += 1;
    }
    Ok(t)
}

/// Which of the period laws applies to `M_{N,0}`.
///
/// `Odd`: `N` odd, `n(N) = T_N`. `Even2k`: `N` even and `n(N) = T_N`.
/// `Even4k`: `N` even and `n(N) = 2·T_N`. For `N = N′_{2k}` the even names
/// read literally as `n = 2k` and `n = 4k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Odd,
    Even2k,
    Even4k,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::Odd => "odd",
            Branch::Even2k => "even2k",
            Branch::Even4k => "even4k",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantumPeriod {
    /// `n(N)`.
    pub period: u64,
    /// `T_N`.
    pub order: u64,
    pub branch: Branch,
    /// `A_N` with `A^{T_N} = I + N·A_N`.
    pub quotient: IntMat2,
}

/// `A_N = (A^{T_N} − I)/N`, exact.
pub fn period_quotient(map: &CatMap, n: &BigInt, order: u64) -> IntMat2 {
    let mut p = matrix_power(map, order, None);
    p.a -= 1;
    p.d -= 1;
    let div = |x: &BigInt| {
        let (q, r) = x.div_rem(n);
        debug_assert!(r.is_zero(), "A^T - I is not divisible by N");
        q
    };
    IntMat2 {
        a: div(&p.a),
        b: div(&p.b),
        c: div(&p.c),
        d: div(&p.d),
    }
}

/// Quantum period `n(N)`: `T_N` when `N` is odd or both `(A_N)_{12}` and
/// `(A_N)_{21}` are even, `2·T_N` otherwise.
pub fn quantum_period(map: &CatMap, n: &BigInt) -> Result<QuantumPeriod> {
    let order = order_mod(map, n, None)?;
    let quotient = period_quotient(map, n, order);
    let (period, branch) = if n.is_odd() {
        (order, Branch::Odd)
    } else if quotient.b.is_even() && quotient.c.is_even() {
        (order, Branch::Even2k)
    } else {
        (2 * order, Branch::Even4k)
    };
    Ok(QuantumPeriod {
        period,
        order,
        branch,
        quotient,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GcdBound {
    /// `gcd(N′_T, b·p_r)`.
    pub lhs: BigInt,
    /// `|b|·N′_{gcd(T, 2r)}`.
    pub rhs: BigInt,
    pub holds: bool,
    /// `gcd(N′_T, p_r)` divides `N′_{gcd(T, 2r)}`.
    pub divides: bool,
}

/// Checks `gcd(N′_T, b_r) ≤ |b|·N′_{gcd(T,2r)}` together with the divisibility
/// behind it.
pub fn gcd_bound_check(map: &CatMap, t: u64, r: u64) -> Result<GcdBound> {
    if r == 0 || r >= t {
        return Err(Error::InvalidInput(format!("need 1 <= r < T, got r = {r}, T = {t}")));
    }
    let big_n = n_prime(map, t);
    let p_r = p_seq(map, r);
    let inner = n_prime(map, t.gcd(&(2 * r)));
    let lhs = big_n.gcd(&(&p_r * map.b));
    let rhs = &inner * map.b.abs();
    let divides = (&inner % big_n.gcd(&p_r)).is_zero();
    Ok(GcdBound {
        holds: lhs <= rhs,
        lhs,
        rhs,
        divides,
    })
}

/// Exact second components `w_s = e₂·(Aᵀ)^s m` for `s = 0..len`.
pub fn second_component_orbit(map: &CatMap, m: FourierMode, len: usize) -> Vec<BigInt> {
    let mut x = BigInt::from(m.m1);
    let mut y = BigInt::from(m.m2);
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(y.clone());
        let nx = &x * map.a + &y * map.c;
        let ny = &x * map.b + &y * map.d;
        x = nx;
        y = ny;
    }
    out
}

/// `(Aᵀ)^s m mod modulus` for `s = 0..len`, with residues in `[0, modulus)`.
pub fn transpose_orbit_mod(map: &CatMap, m: FourierMode, len: usize, modulus: u64) -> Vec<FourierMode> {
    let md = modulus as i128;
    let (a, b, c, d) = (map.a as i128, map.b as i128, map.c as i128, map.d as i128);
    let mut x = (m.m1 as i128).rem_euclid(md);
    let mut y = (m.m2 as i128).rem_euclid(md);
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(FourierMode::new(x as i64, y as i64));
        let nx = (a * x + c * y).rem_euclid(md);
        let ny = (b * x + d * y).rem_euclid(md);
        x = nx;
        y = ny;
    }
    out
}

/// Times `0 ≤ s < T` with `e₂·(Aᵀ)^s m ≡ c (mod N′_T)`.
pub fn resonance_set(map: &CatMap, m: FourierMode, c: &BigInt, t: u64) -> Result<Vec<u64>> {
    if m.is_zero() {
        return Err(Error::InvalidInput("resonance count needs m != 0".into()));
    }
    if t == 0 {
        return Err(Error::InvalidInput("resonance count needs T >= 1".into()));
    }
    let n = n_prime(map, t);
    let target = c.mod_floor(&n);
    let mut x = BigInt::from(m.m1).mod_floor(&n);
    let mut y = BigInt::from(m.m2).mod_floor(&n);
    let mut hits = Vec::new();
    for s in 0..t {
        if y == target {
            hits.push(s);
        }
        let nx = (&x * map.a + &y * map.c).mod_floor(&n);
        let ny = (&x * map.b + &y * map.d).mod_floor(&n);
        x = nx;
        y = ny;
    }
    Ok(hits)
}

pub fn resonance_count(map: &CatMap, m: FourierMode, c: &BigInt, t: u64) -> Result<u64> {
    resonance_set(map, m, c, t).map(|s| s.len() as u64)
}

/// Arithmetic summary for one modulus `N′_q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodRecord {
    pub matrix: [i64; 4],
    pub q: u64,
    #[serde(with = "bigint_vec_str")]
    pub p_values: Vec<BigInt>,
    #[serde(with = "bigint_str")]
    pub n_prime: BigInt,
    /// `T_{N′_q}`.
    pub order: u64,
    /// `n(N′_q)`.
    pub period: u64,
    pub branch: Branch,
}

pub fn period_record(map: &CatMap, q: u64) -> Result<PeriodRecord> {
    if q == 0 {
        return Err(Error::InvalidInput("q must be at least 1".into()));
    }
    let n = n_prime(map, q);
    let qp = quantum_period(map, &n)?;
    Ok(PeriodRecord {
        matrix: map.entries(),
        q,
        p_values: p_table(map, q),
        n_prime: n,
        order: qp.order,
        period: qp.period,
        branch: qp.branch,
    })
}

/// Records for `q = 1..=q_max`, reading and appending a JSON-lines cache
/// when a path is given. Unreadable or foreign cache lines are ignored.
pub fn period_records(map: &CatMap, q_max: u64, cache: Option<&Path>) -> Result<Vec<PeriodRecord>> {
    let mut known: BTreeMap<u64, PeriodRecord> = BTreeMap::new();
    if let Some(path) = cache {
        if path.exists() {
            let reader = BufReader::new(File::open(path)?);
            for line in reader.lines() {
                let line = line?;
                if let Ok(rec) = serde_json::from_str::<PeriodRecord>(&line) {
                    if rec.matrix == map.entries() && rec.p_values.len() as u64 == rec.q + 1 {
                        known.insert(rec.q, rec);
                    }
                }
            }
        }
    }
    let mut fresh = Vec::new();
    let mut out = Vec::with_capacity(q_max as usize);
    for q in 1..=q_max {
        match known.get(&q) {
            Some(rec) => out.push(rec.clone()),
            None => {
                let rec = period_record(map, q)?;
                fresh.push(rec.clone());
                out.push(rec);
            }
        }
    }
    if let (Some(path), false) = (cache, fresh.is_empty()) {
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        for rec in &fresh {
            writeln!(file, "{}", serde_json::to_string(rec)?)?;
        }
    }
    Ok(out)
}

mod bigint_str {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

mod bigint_vec_str {
    use num_bigint::BigInt;
    use serde::{de::Error, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&x.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter().map(|s| s.parse().map_err(D::Error::custom)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    /// Oracle: repeated exact multiplication.
    fn naive_power(map: &CatMap, r: u64) -> IntMat2 {
        let mut acc = IntMat2::identity();
        for _ in 0..r {
            acc = acc.mul(&map.matrix());
        }
        acc
    }

    #[test]
    fn validates_running_example() {
        let m = validate_catmap(2, 3, 1, 2).unwrap();
        assert_eq!(m.trace(), 4);
        assert!((m.lambda() - (2.0 + 3f64.sqrt())).abs() < 1e-12);
        assert!((m.lambda() - 3.7320508).abs() < 1e-7);
    }

    #[test]
    fn rejects_each_condition() {
        let cases = [
            ((2, 3, 1, 3), Condition::Determinant),
            ((1, 0, 0, 1), Condition::TraceAboveTwo),
            ((3, 2, 4, 3), Condition::CoprimeOffDiagonal),
            ((2, 1, 1, 1), Condition::ProductCdEven),
            ((1, 1, 0, 1), Condition::ProductAbEven),
            ((-2, 3, 1, -2), Condition::TraceAboveTwo),
        ];
        for ((a, b, c, d), want) in cases {
            match validate_catmap(a, b, c, d) {
                Err(Error::ConditionViolation(got)) => assert_eq!(got, want, "({a},{b},{c},{d})"),
                other => panic!("({a},{b},{c},{d}) gave {other:?}"),
            }
        }
    }

    #[test]
    fn lucas_values() {
        let m = CatMap::standard();
        assert_eq!(p_seq(&m, 0), big(0));
        assert_eq!(p_seq(&m, 1), big(1));
        assert_eq!(p_seq(&m, 5), big(209));
        assert_eq!(p_seq(&m, 12), big(2107560));
        // matrix-power oracle: A^5 = 209·A − 56·I
        let a5 = naive_power(&m, 5);
        assert_eq!(a5, IntMat2::lucas_combination(&m, &big(209), &big(56)));
        let a12 = naive_power(&m, 12);
        assert_eq!(a12.b, big(2107560 * 3));
        // beyond 64 bits
        assert!(p_seq(&m, 40).bits() > 64);
        assert_eq!(p_table(&m, 12)[12], big(2107560));
    }

    #[test]
    fn power_examples() {
        let m = CatMap::standard();
        assert_eq!(matrix_power(&m, 0, None), IntMat2::identity());
        assert_eq!(matrix_power(&m, 3, None), IntMat2::from_i64(26, 45, 15, 26));
        assert_eq!(matrix_power(&m, 3, Some(&big(5))), IntMat2::identity());
    }

    #[test]
    fn power_matches_lucas_form_up_to_60() {
        let m = CatMap::standard();
        let p = p_table(&m, 60);
        for r in 1..=60u64 {
            let lhs = matrix_power(&m, r, None);
            let rhs = IntMat2::lucas_combination(&m, &p[r as usize], &p[r as usize - 1]);
            assert_eq!(lhs, rhs, "r = {r}");
            assert_eq!(lhs.det(), big(1));
        }
    }

    #[test]
    fn n_prime_examples() {
        let m = CatMap::standard();
        assert_eq!(n_prime(&m, 11), big(989));
        assert_eq!(n_prime(&m, 12), big(1560));
        assert_eq!(n_prime(&m, 3), big(5));
        assert_eq!(n_prime_oracle(&m, 3), big(5));
        assert_eq!(n_prime(&m, 1), big(1));
    }

    #[test]
    fn order_examples() {
        let m = CatMap::standard();
        assert_eq!(order_mod(&m, &big(1), None).unwrap(), 1);
        assert_eq!(order_mod(&m, &big(989), None).unwrap(), 11);
        assert_eq!(order_mod(&m, &big(1560), None).unwrap(), 12);
        assert!(matches!(
            order_mod(&m, &big(1560), Some(5)),
            Err(Error::NoOrderFound { ceiling: 5, .. })
        ));
        assert!(order_mod(&m, &big(0), None).is_err());
    }

    #[test]
    fn quantum_period_examples() {
        let m = CatMap::standard();
        let qp = quantum_period(&m, &big(989)).unwrap();
        assert_eq!((qp.period, qp.branch), (11, Branch::Odd));

        let qp = quantum_period(&m, &big(1560)).unwrap();
        assert_eq!((qp.period, qp.order, qp.branch), (24, 12, Branch::Even4k));
        assert_eq!(qp.quotient, IntMat2::lucas_combination(&m, &big(1351), &big(362)));
        assert_eq!((qp.quotient.b.clone(), qp.quotient.c.clone()), (big(4053), big(1351)));

        let qp = quantum_period(&m, &big(1)).unwrap();
        assert_eq!(qp.period, 1);
    }

    #[test]
    fn quotient_parity_matches_mod_2n_route() {
        // A^T mod 2N = I + N·(A_N mod 2): independent route to the parity test.
        let m = CatMap::standard();
        for n in [2i64, 8, 30, 112, 418, 1560, 6, 10, 12, 100] {
            let n_big = big(n);
            let qp = quantum_period(&m, &n_big).unwrap();
            let red = matrix_power(&m, qp.order, Some(&big(2 * n)));
            let b_even = (&red.b / &n_big).is_even();
            let c_even = (&red.c / &n_big).is_even();
            let want = if b_even && c_even { qp.order } else { 2 * qp.order };
            assert_eq!(qp.period, want, "N = {n}");
        }
    }

    #[test]
    fn gcd_bound_examples() {
        let m = CatMap::standard();
        let g = gcd_bound_check(&m, 11, 1).unwrap();
        assert_eq!(g.lhs, big(989).gcd(&big(3)));
        assert_eq!(g.rhs, big(3));
        assert!(g.holds && g.divides);

        let g = gcd_bound_check(&m, 2, 1).unwrap();
        assert_eq!(g.rhs, n_prime(&m, 2) * 3);
        assert!(g.holds && g.divides);

        assert!(gcd_bound_check(&m, 5, 5).is_err());
        assert!(gcd_bound_check(&m, 5, 0).is_err());
    }

    #[test]
    fn resonance_examples() {
        let m = CatMap::standard();
        let set = resonance_set(&m, FourierMode::new(0, 1), &big(1), 11).unwrap();
        assert_eq!(set.first(), Some(&0));
        let set = resonance_set(&m, FourierMode::new(1, 0), &big(0), 11).unwrap();
        assert!(set.contains(&0));
        // exhaustive orbit enumeration with exact integers
        let orbit = second_component_orbit(&m, FourierMode::new(1, 0), 11);
        let n = big(989);
        let brute: Vec<u64> = (0..11u64)
            .filter(|&s| orbit[s as usize].mod_floor(&n).is_zero())
            .collect();
        assert_eq!(set, brute);
        assert!(resonance_count(&m, FourierMode::ZERO, &big(0), 11).is_err());
        // residues are normalised at entry
        assert_eq!(
            resonance_set(&m, FourierMode::new(0, 1), &big(1 - 989), 11).unwrap(),
            resonance_set(&m, FourierMode::new(0, 1), &big(1), 11).unwrap()
        );
    }

    #[test]
    fn orbit_recurrence_and_mod_orbit() {
        let m = CatMap::standard();
        let mode = FourierMode::new(3, -2);
        let w = second_component_orbit(&m, mode, 30);
        for s in 0..28 {
            assert_eq!(&w[s + 2], &(&w[s + 1] * m.trace() - &w[s]));
        }
        let reduced = transpose_orbit_mod(&m, mode, 30, 1978);
        for (s, r) in reduced.iter().enumerate() {
            assert_eq!(BigInt::from(r.m2), w[s].mod_floor(&big(1978)));
        }
        assert_eq!(m.transpose_apply(FourierMode::new(1, 0)), FourierMode::new(2, 3));
    }

    #[test]
    fn period_record_and_cache() {
        let m = CatMap::standard();
        let rec = period_record(&m, 12).unwrap();
        assert_eq!(rec.n_prime, big(1560));
        assert_eq!((rec.order, rec.period, rec.branch), (12, 24, Branch::Even4k));
        assert_eq!(rec.p_values.len(), 13);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("periods.jsonl");
        let first = period_records(&m, 8, Some(&path)).unwrap();
        let lines = std::fs::read_to_string(&path).unwrap().lines().count();
        assert_eq!(lines, 8);
        // second pass is served from the cache and appends only new q
        let second = period_records(&m, 10, Some(&path)).unwrap();
        assert_eq!(&second[..8], &first[..]);
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 10);
        // junk lines are skipped
        std::fs::write(&path, "not json\n").unwrap();
        assert_eq!(
            period_records(&m, 3, Some(&path)).unwrap(),
            period_records(&m, 3, None).unwrap()
        );
    }
}

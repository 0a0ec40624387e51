//! Exact arithmetic in GF(p^m), polynomials over it, and subfield embeddings.
//!
//! Elements are encoded as integers in `[0, q)`: the base-p digits of the
//! encoding, little-endian, are the coefficients in the polynomial basis.
//! The modulus is a monic irreducible polynomial of degree m over GF(p),
//! stored little-endian and verified at construction by trial division.
//! Multiplication uses log/antilog tables for q <= 2^16 and direct
//! polynomial arithmetic above that.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Field element, encoded as an integer in `[0, q)`.
pub type Elem = u32;

/// Orders up to this get log/antilog tables.
const TABLE_LIMIT: u64 = 1 << 16;
/// Orders up to this additionally get full add/mul tables.
const SMALL_LIMIT: u64 = 1 << 8;
/// Hard cap on the field order so encodings and products stay in range.
const ORDER_LIMIT: u64 = 1 << 31;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Renders a little-endian coefficient list as a polynomial in x.
fn render_poly(coeffs: &[u64]) -> String {
    let mut terms: Vec<String> = Vec::new();
    for (i, &c) in coeffs.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let t = match (i, c) {
            (0, c) => format!("{c}"),
            (1, 1) => "x".to_string(),
            (1, c) => format!("{c}x"),
            (i, 1) => format!("x^{i}"),
            (i, c) => format!("{c}x^{i}"),
        };
        terms.push(t);
    }
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ")
    }
}

/// Remainder test for monic little-endian polynomials over GF(p).
fn divides_over_prime(divisor: &[u64], dividend: &[u64], p: u64) -> bool {
    let d = divisor.len() - 1;
    let mut rem: Vec<u64> = dividend.to_vec();
    while rem.len() > d {
        let lead = *rem.last().unwrap() % p;
        let shift = rem.len() - 1 - d;
        if lead != 0 {
            for j in 0..=d {
                let sub = (divisor[j] * lead) % p;
                rem[shift + j] = (rem[shift + j] + p - sub) % p;
            }
        }
        rem.pop();
    }
    rem.iter().all(|&c| c % p == 0)
}

/// Trial division of a monic degree-m polynomial against every monic
/// polynomial of degree 1..=m/2. Returns the first factor found.
fn irreducibility_witness(coeffs: &[u64], p: u64) -> Option<Vec<u64>> {
    let m = coeffs.len() - 1;
    for d in 1..=(m / 2) {
        let count = p.pow(d as u32);
        for idx in 0..count {
            let mut div = Vec::with_capacity(d + 1);
            let mut t = idx;
            for _ in 0..d {
                div.push(t % p);
                t /= p;
            }
            div.push(1);
            if divides_over_prime(&div, coeffs, p) {
                return Some(div);
            }
        }
    }
    None
}

/// Construction parameters of a field: the serialized form of [`FieldSpec`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldParams {
    pub p: u32,
    pub m: u32,
    pub modulus: Vec<u32>,
}

/// An instance of GF(p^m) with its arithmetic tables.
///
/// Construct through [`FieldSpec::make`], which validates the modulus and
/// caches instances, and pass the returned handle to everything that needs
/// arithmetic. Two specs are the same field exactly when (p, m, modulus)
/// agree.
pub struct FieldSpec {
    p: u32,
    m: u32,
    q: u32,
    modulus: Vec<u32>,
    generator: Elem,
    exp: Vec<Elem>,
    log: Vec<u32>,
    add_table: Vec<Elem>,
    mul_table: Vec<Elem>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.q)?;
        if self.m > 1 {
            let coeffs: Vec<u64> = self.modulus.iter().map(|&c| c as u64).collect();
            write!(f, " mod {}", render_poly(&coeffs))?;
        }
        Ok(())
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.m == other.m && self.modulus == other.modulus
    }
}

impl Eq for FieldSpec {}

type FieldCache = Mutex<HashMap<(u32, u32, Option<Vec<u32>>), Arc<FieldSpec>>>;

fn field_cache() -> &'static FieldCache {
    static CACHE: OnceLock<FieldCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl FieldSpec {
    /// Builds (or fetches from cache) GF(p^m). With `modulus: None` the
    /// modulus is the monic irreducible of degree m whose little-endian
    /// base-p coefficient encoding is smallest.
    pub fn make(p: u32, m: u32, modulus: Option<&[u32]>) -> Result<Arc<FieldSpec>> {
        let key = (p, m, modulus.map(|s| s.to_vec()));
        if let Some(f) = field_cache().lock().unwrap().get(&key) {
            return Ok(f.clone());
        }
        let spec = Arc::new(Self::new(p, m, modulus)?);
        field_cache()
            .lock()
            .unwrap()
            .insert(key, spec.clone());
        Ok(spec)
    }

    /// Builds GF(q) for a prime power q, with the default modulus.
    pub fn from_order(q: u64) -> Result<Arc<FieldSpec>> {
        if q < 2 {
            return Err(Error::Param(format!("{q} is not a prime power")));
        }
        let mut p = 2u64;
        while p * p <= q && q % p != 0 {
            p += 1;
        }
        if q % p != 0 {
            p = q; // q prime
        }
        let mut m = 0u32;
        let mut rest = q;
        while rest % p == 0 {
            rest /= p;
            m += 1;
        }
        if rest != 1 {
            return Err(Error::Param(format!("{q} is not a prime power")));
        }
        Self::make(p as u32, m, None)
    }

    fn new(p: u32, m: u32, modulus: Option<&[u32]>) -> Result<FieldSpec> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if m < 1 {
            return Err(Error::Param("extension degree must be at least 1".into()));
        }
        let q128 = (p as u128).pow(m);
        if q128 > ORDER_LIMIT as u128 {
            return Err(Error::FieldTooLarge(q128));
        }
        let q = q128 as u32;

        let modulus: Vec<u32> = match modulus {
            Some(coeffs) => {
                if coeffs.len() != m as usize + 1 || *coeffs.last().unwrap() != 1 {
                    return Err(Error::BadModulus { expected: m });
                }
                if coeffs.iter().any(|&c| c >= p) {
                    return Err(Error::BadModulus { expected: m });
                }
                let wide: Vec<u64> = coeffs.iter().map(|&c| c as u64).collect();
                if m >= 2 {
                    if let Some(factor) = irreducibility_witness(&wide, p as u64) {
                        return Err(Error::ReducibleModulus {
                            factor: render_poly(&factor),
                        });
                    }
                }
                coeffs.to_vec()
            }
            None => Self::default_modulus(p, m),
        };

        let mut spec = FieldSpec {
            p,
            m,
            q,
            modulus,
            generator: 1,
            exp: Vec::new(),
            log: Vec::new(),
            add_table: Vec::new(),
            mul_table: Vec::new(),
        };

        spec.generator = spec.find_generator();
        if (q as u64) <= TABLE_LIMIT {
            spec.build_log_tables();
        }
        if (q as u64) <= SMALL_LIMIT {
            spec.build_small_tables();
        }
        Ok(spec)
    }

    fn default_modulus(p: u32, m: u32) -> Vec<u32> {
        if m == 1 {
            return vec![0, 1]; // x
        }
        let p64 = p as u64;
        let count = p64.pow(m);
        for idx in 0..count {
            let mut coeffs = Vec::with_capacity(m as usize + 1);
            let mut t = idx;
            for _ in 0..m {
                coeffs.push(t % p64);
                t /= p64;
            }
            coeffs.push(1);
            if irreducibility_witness(&coeffs, p64).is_none() {
                return coeffs.iter().map(|&c| c as u32).collect();
            }
        }
        unreachable!("an irreducible of each degree exists over every prime field");
    }

    fn find_generator(&self) -> Elem {
        let ord = self.q as u64 - 1;
        let factors = distinct_prime_factors(ord);
        'next: for e in 1..self.q {
            for &f in &factors {
                if self.pow(e, ord / f) == 1 {
                    continue 'next;
                }
            }
            return e;
        }
        unreachable!("the multiplicative group of a finite field is cyclic");
    }

    fn build_log_tables(&mut self) {
        let ord = (self.q - 1) as usize;
        let mut exp = Vec::with_capacity(ord);
        let mut log = vec![u32::MAX; self.q as usize];
        let mut acc: Elem = 1;
        for i in 0..ord {
            exp.push(acc);
            debug_assert_eq!(log[acc as usize], u32::MAX);
            log[acc as usize] = i as u32;
            acc = self.mul_direct(acc, self.generator);
        }
        self.exp = exp;
        self.log = log;
    }

    fn build_small_tables(&mut self) {
        let q = self.q as usize;
        let mut add_table = vec![0; q * q];
        let mut mul_table = vec![0; q * q];
        for a in 0..self.q {
            for b in 0..self.q {
                add_table[(a as usize) * q + b as usize] = self.add_digits(a, b);
                mul_table[(a as usize) * q + b as usize] = self.mul_log(a, b);
            }
        }
        self.add_table = add_table;
        self.mul_table = mul_table;
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn ext_degree(&self) -> u32 {
        self.m
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// Smallest-encoded generator of the multiplicative group.
    pub fn generator(&self) -> Elem {
        self.generator
    }

    pub fn params(&self) -> FieldParams {
        FieldParams {
            p: self.p,
            m: self.m,
            modulus: self.modulus.clone(),
        }
    }

    pub fn from_params(params: &FieldParams) -> Result<Arc<FieldSpec>> {
        Self::make(params.p, params.m, Some(&params.modulus))
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.q
    }

    fn add_digits(&self, a: Elem, b: Elem) -> Elem {
        let p = self.p as u64;
        let (mut a, mut b) = (a as u64, b as u64);
        let mut out = 0u64;
        let mut pk = 1u64;
        for _ in 0..self.m {
            out += ((a % p + b % p) % p) * pk;
            a /= p;
            b /= p;
            pk *= p;
        }
        out as Elem
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        debug_assert!(a < self.q && b < self.q);
        if !self.add_table.is_empty() {
            return self.add_table[(a * self.q + b) as usize];
        }
        if self.p == 2 {
            return a ^ b;
        }
        if self.m == 1 {
            return ((a as u64 + b as u64) % self.p as u64) as Elem;
        }
        self.add_digits(a, b)
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        debug_assert!(a < self.q);
        if self.p == 2 {
            return a;
        }
        if self.m == 1 {
            return if a == 0 { 0 } else { self.p - a };
        }
        let p = self.p as u64;
        let mut a = a as u64;
        let mut out = 0u64;
        let mut pk = 1u64;
        for _ in 0..self.m {
            let d = a % p;
            out += if d == 0 { 0 } else { p - d } * pk;
            a /= p;
            pk *= p;
        }
        out as Elem
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    /// Schoolbook product of the polynomial representations, reduced by the
    /// modulus. Used below the table threshold only during construction.
    fn mul_direct(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            return 0;
        }
        let p = self.p as u64;
        if self.m == 1 {
            return ((a as u64 * b as u64) % p) as Elem;
        }
        let m = self.m as usize;
        let mut da = [0u64; 32];
        let mut db = [0u64; 32];
        let (mut ta, mut tb) = (a as u64, b as u64);
        for i in 0..m {
            da[i] = ta % p;
            db[i] = tb % p;
            ta /= p;
            tb /= p;
        }
        let mut prod = [0u64; 63];
        for i in 0..m {
            if da[i] == 0 {
                continue;
            }
            for j in 0..m {
                prod[i + j] += da[i] * db[j];
            }
        }
        for v in prod.iter_mut().take(2 * m - 1) {
            *v %= p;
        }
        // reduce by the monic modulus, top coefficient first
        for i in (m..2 * m - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            for j in 0..m {
                let sub = (self.modulus[j] as u64 * c) % p;
                prod[i - m + j] = (prod[i - m + j] + p - sub) % p;
            }
            prod[i] = 0;
        }
        let mut out = 0u64;
        for i in (0..m).rev() {
            out = out * p + prod[i];
        }
        out as Elem
    }

    #[inline]
    fn mul_log(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            return 0;
        }
        let ord = (self.q - 1) as u64;
        let idx = (self.log[a as usize] as u64 + self.log[b as usize] as u64) % ord;
        self.exp[idx as usize]
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        debug_assert!(a < self.q && b < self.q);
        if !self.mul_table.is_empty() {
            return self.mul_table[(a * self.q + b) as usize];
        }
        if !self.log.is_empty() {
            return self.mul_log(a, b);
        }
        self.mul_direct(a, b)
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        debug_assert!(a < self.q);
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        let ord = (self.q - 1) as u64;
        let e = e % ord;
        if !self.log.is_empty() {
            let idx = (self.log[a as usize] as u64 * e) % ord;
            return self.exp[idx as usize];
        }
        let mut base = a;
        let mut e = e;
        let mut acc: Elem = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a == 0 {
            return Err(Error::DivisionByZero { q: self.q });
        }
        if !self.log.is_empty() {
            let ord = self.q - 1;
            let idx = (ord - self.log[a as usize]) % ord;
            return Ok(self.exp[idx as usize]);
        }
        Ok(self.pow(a, self.q as u64 - 2))
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Multiplicative order of a nonzero element.
    pub fn elem_order(&self, a: Elem) -> Result<u64> {
        if a == 0 {
            return Err(Error::DivisionByZero { q: self.q });
        }
        let mut ord = self.q as u64 - 1;
        for f in distinct_prime_factors(self.q as u64 - 1) {
            while ord % f == 0 && self.pow(a, ord / f) == 1 {
                ord /= f;
            }
        }
        Ok(ord)
    }
}

/// Dense polynomial over some field, little-endian coefficients, no
/// trailing zeros (the zero polynomial has no coefficients). The field is
/// supplied to each operation rather than stored.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Poly {
    coeffs: Vec<Elem>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Elem>) -> Poly {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Poly {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly { coeffs: vec![1] }
    }

    pub fn x() -> Poly {
        Poly { coeffs: vec![0, 1] }
    }

    pub fn constant(c: Elem) -> Poly {
        Poly::new(vec![c])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Elem {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<Elem> {
        self.coeffs.last().copied()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wide: Vec<u64> = self.coeffs.iter().map(|&c| c as u64).collect();
        write!(f, "{}", render_poly(&wide))
    }
}

impl FieldSpec {
    pub fn poly_add(&self, a: &Poly, b: &Poly) -> Poly {
        let len = a.coeffs.len().max(b.coeffs.len());
        let mut out = Vec::with_capacity(len);
        for i in 0..len {
            out.push(self.add(a.coeff(i), b.coeff(i)));
        }
        Poly::new(out)
    }

    pub fn poly_sub(&self, a: &Poly, b: &Poly) -> Poly {
        let len = a.coeffs.len().max(b.coeffs.len());
        let mut out = Vec::with_capacity(len);
        for i in 0..len {
            out.push(self.sub(a.coeff(i), b.coeff(i)));
        }
        Poly::new(out)
    }

    pub fn poly_scale(&self, a: &Poly, c: Elem) -> Poly {
        Poly::new(a.coeffs.iter().map(|&x| self.mul(x, c)).collect())
    }

    pub fn poly_mul(&self, a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() || b.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0 as Elem; a.coeffs.len() + b.coeffs.len() - 1];
        for (i, &ca) in a.coeffs.iter().enumerate() {
            if ca == 0 {
                continue;
            }
            for (j, &cb) in b.coeffs.iter().enumerate() {
                out[i + j] = self.add(out[i + j], self.mul(ca, cb));
            }
        }
        Poly::new(out)
    }

    /// Euclidean division: returns (quotient, remainder) with
    /// deg(remainder) < deg(divisor).
    pub fn poly_divmod(&self, a: &Poly, b: &Poly) -> Result<(Poly, Poly)> {
        if b.is_zero() {
            return Err(Error::DivisionByZero { q: self.q });
        }
        if a.coeffs.len() < b.coeffs.len() {
            return Ok((Poly::zero(), a.clone()));
        }
        let lead_inv = self.inv(*b.coeffs.last().unwrap())?;
        let mut rem = a.coeffs.clone();
        let qlen = a.coeffs.len() - b.coeffs.len() + 1;
        let mut quot = vec![0 as Elem; qlen];
        for shift in (0..qlen).rev() {
            let lead = rem[shift + b.coeffs.len() - 1];
            if lead == 0 {
                continue;
            }
            let c = self.mul(lead, lead_inv);
            quot[shift] = c;
            for (j, &bc) in b.coeffs.iter().enumerate() {
                rem[shift + j] = self.sub(rem[shift + j], self.mul(c, bc));
            }
        }
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    /// Monic gcd; gcd(0, 0) = 0.
    pub fn poly_gcd(&self, a: &Poly, b: &Poly) -> Result<Poly> {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let (_, r) = self.poly_divmod(&a, &b)?;
            a = b;
            b = r;
        }
        if a.is_zero() {
            return Ok(a);
        }
        let inv = self.inv(a.leading().unwrap())?;
        Ok(self.poly_scale(&a, inv))
    }

    pub fn poly_eval(&self, a: &Poly, x: Elem) -> Elem {
        let mut acc: Elem = 0;
        for &c in a.coeffs.iter().rev() {
            acc = self.add(self.mul(acc, x), c);
        }
        acc
    }

    /// Monic polynomial with the given roots (with multiplicity).
    pub fn poly_from_roots(&self, roots: &[Elem]) -> Poly {
        let mut acc = Poly::one();
        for &r in roots {
            let factor = Poly::new(vec![self.neg(r), 1]);
            acc = self.poly_mul(&acc, &factor);
        }
        acc
    }
}

#[derive(Clone)]
enum EmbeddingRepr {
    Identity,
    Map {
        image: Vec<Elem>,
        preimage: HashMap<Elem, Elem>,
    },
}

/// Field embedding GF(p^m) -> GF(p^(m*t)), realized by mapping the residue
/// class of y to the smallest-encoded root of the base modulus in the
/// extension.
#[derive(Clone)]
pub struct Embedding {
    base: Arc<FieldSpec>,
    ext: Arc<FieldSpec>,
    degree: u32,
    repr: EmbeddingRepr,
}

impl fmt::Debug for Embedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} -> {:?}", self.base, self.ext)
    }
}

impl Embedding {
    pub fn identity(field: &Arc<FieldSpec>) -> Embedding {
        Embedding {
            base: field.clone(),
            ext: field.clone(),
            degree: 1,
            repr: EmbeddingRepr::Identity,
        }
    }

    /// Degree-t extension of `base`, with the default modulus.
    pub fn new(base: &Arc<FieldSpec>, t: u32) -> Result<Embedding> {
        if t == 1 {
            return Ok(Self::identity(base));
        }
        if base.order() as u64 > TABLE_LIMIT {
            return Err(Error::FieldTooLarge(base.order() as u128));
        }
        let ext = FieldSpec::make(base.prime(), base.ext_degree() * t, None)?;
        // Smallest root of the base modulus among extension elements. The
        // modulus coefficients are prime-subfield constants, so they encode
        // identically in both fields.
        let mod_poly = Poly::new(base.modulus().to_vec());
        let mut root = None;
        for cand in ext.elements() {
            if ext.poly_eval(&mod_poly, cand) == 0 {
                root = Some(cand);
                break;
            }
        }
        let root = root.expect("base modulus splits in any extension of its own degree");
        let p = base.prime() as u64;
        let mut image = Vec::with_capacity(base.order() as usize);
        let mut preimage = HashMap::with_capacity(base.order() as usize);
        for a in base.elements() {
            let mut digits = Vec::new();
            let mut t = a as u64;
            for _ in 0..base.ext_degree() {
                digits.push((t % p) as Elem);
                t /= p;
            }
            let img = ext.poly_eval(&Poly::new(digits), root);
            preimage.insert(img, a);
            image.push(img);
        }
        Ok(Embedding {
            base: base.clone(),
            ext,
            degree: t,
            repr: EmbeddingRepr::Map { image, preimage },
        })
    }

    pub fn base(&self) -> &Arc<FieldSpec> {
        &self.base
    }

    pub fn ext(&self) -> &Arc<FieldSpec> {
        &self.ext
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn embed(&self, a: Elem) -> Elem {
        match &self.repr {
            EmbeddingRepr::Identity => a,
            EmbeddingRepr::Map { image, .. } => image[a as usize],
        }
    }

    /// Inverse of [`embed`](Self::embed); errors when the element is
    /// outside the embedded subfield.
    pub fn retract(&self, e: Elem) -> Result<Elem> {
        match &self.repr {
            EmbeddingRepr::Identity => Ok(e),
            EmbeddingRepr::Map { preimage, .. } => {
                preimage.get(&e).copied().ok_or(Error::NotInSubfield)
            }
        }
    }

    /// Field trace down to the base: sum of the q-power conjugates. The
    /// result is Frobenius-fixed, hence always retractable.
    pub fn trace(&self, e: Elem) -> Result<Elem> {
        match &self.repr {
            EmbeddingRepr::Identity => Ok(e),
            EmbeddingRepr::Map { .. } => {
                let q = self.base.order() as u64;
                let mut acc = 0;
                let mut conj = e;
                for _ in 0..self.degree {
                    acc = self.ext.add(acc, conj);
                    conj = self.ext.pow(conj, q);
                }
                self.retract(acc)
            }
        }
    }
}

/// Multiplicative order of q modulo n.
pub fn multiplicative_order(q: u64, n: u64) -> Result<u64> {
    if gcd(q, n) != 1 {
        return Err(Error::RootOfUnity {
            n: n as usize,
            q: q as u32,
        });
    }
    let mut acc = q % n;
    for t in 1..=n {
        if acc == 1 % n {
            return Ok(t);
        }
        acc = (acc * (q % n)) % n;
    }
    unreachable!("order divides the group order");
}

pub fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// A primitive n-th root of unity over GF(q), living in the splitting
/// extension GF(q^t) with t the order of q mod n.
#[derive(Clone, Debug)]
pub struct RootOfUnity {
    pub n: usize,
    pub embedding: Embedding,
    pub alpha: Elem,
}

impl RootOfUnity {
    pub fn base_field(&self) -> &Arc<FieldSpec> {
        self.embedding.base()
    }

    pub fn ext_field(&self) -> &Arc<FieldSpec> {
        self.embedding.ext()
    }

    /// alpha^i in the extension field, exponent taken mod n.
    pub fn alpha_pow(&self, i: i64) -> Elem {
        let n = self.n as i64;
        let e = i.rem_euclid(n) as u64;
        self.ext_field().pow(self.alpha, e)
    }
}

/// Finds the smallest-encoded element of multiplicative order exactly n
/// over GF(q), constructing GF(q^t) as needed. Requires gcd(n, q) = 1.
pub fn nth_root_of_unity(field: &Arc<FieldSpec>, n: usize) -> Result<RootOfUnity> {
    if n == 0 {
        return Err(Error::Param("n must be positive".into()));
    }
    let q = field.order() as u64;
    let t = multiplicative_order(q, n as u64)?;
    let ext_order = (q as u128).pow(t as u32);
    if ext_order > ORDER_LIMIT as u128 {
        return Err(Error::FieldTooLarge(ext_order));
    }
    let embedding = Embedding::new(field, t as u32)?;
    let ext = embedding.ext().clone();
    let group = ext.order() as u64 - 1;
    debug_assert_eq!(group % n as u64, 0);
    let step = group / n as u64;
    let g = ext.generator();
    let mut alpha = None;
    for j in 1..=n as u64 {
        if gcd(j, n as u64) != 1 {
            continue;
        }
        let cand = ext.pow(g, j * step);
        if alpha.map_or(true, |a| cand < a) {
            alpha = Some(cand);
        }
    }
    let alpha = alpha.expect("n >= 1 always admits j = 1");
    Ok(RootOfUnity {
        n,
        embedding,
        alpha,
    })
}

/// Minimal polynomial over the base field of an extension element: the
/// product of (x - c) over the Frobenius conjugacy class of beta.
pub fn minimal_polynomial(emb: &Embedding, beta: Elem) -> Result<Poly> {
    let ext = emb.ext();
    let base_q = emb.base().order() as u64;
    let mut conjugates = vec![beta];
    let mut c = ext.pow(beta, base_q);
    while c != beta {
        conjugates.push(c);
        c = ext.pow(c, base_q);
        if conjugates.len() > emb.degree() as usize {
            return Err(Error::Verification(
                "conjugacy class exceeds the extension degree".into(),
            ));
        }
    }
    let over_ext = ext.poly_from_roots(&conjugates);
    let mut coeffs = Vec::with_capacity(over_ext.coeffs().len());
    for &c in over_ext.coeffs() {
        coeffs.push(emb.retract(c)?);
    }
    Ok(Poly::new(coeffs))
}

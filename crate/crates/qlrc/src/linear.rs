//! Matrices and linear codes over GF(q), with the enumeration oracles for
//! minimum and relative minimum weight.
//!
//! Generator matrices are kept in reduced row echelon form, which makes the
//! representation canonical: two codes are equal exactly when their RREF
//! generators are. Exhaustive word enumeration walks messages in reflected
//! mixed-radix Gray order so each step updates the codeword by a single row
//! addition, and partitions the message range into disjoint chunks for
//! parallel workers whose partial results merge by min-reduction.

use std::ops::ControlFlow;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::galois::{Elem, FieldSpec};

/// Dense row-major matrix over some field.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Elem>>) -> Result<Matrix> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Param("ragged rows in matrix".into()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Elem) -> Matrix {
        let mut m = Matrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Elem {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Elem) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Elem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[Elem]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    pub fn to_rows(&self) -> Vec<Vec<Elem>> {
        self.iter_rows().map(|r| r.to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn mul(&self, rhs: &Matrix, f: &FieldSpec) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                got: rhs.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc: Elem = 0;
                for t in 0..self.cols {
                    acc = f.add(acc, f.mul(self.get(i, t), rhs.get(t, j)));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    fn truncate_rows(&mut self, rows: usize) {
        self.rows = rows;
        self.data.truncate(rows * self.cols);
    }
}

/// Gauss-Jordan reduction. Pivot choice is deterministic: scan columns left
/// to right, take the first unused row (smallest index) with a nonzero
/// entry. Returns the reduced matrix with zero rows dropped, plus the pivot
/// columns.
pub fn rref(mat: &Matrix, f: &FieldSpec) -> (Matrix, Vec<usize>) {
    let mut m = mat.clone();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..m.cols {
        let Some(pivot_row) = (rank..m.rows).find(|&r| m.get(r, col) != 0) else {
            continue;
        };
        for c in 0..m.cols {
            let tmp = m.get(rank, c);
            m.set(rank, c, m.get(pivot_row, c));
            m.set(pivot_row, c, tmp);
        }
        let inv = f.inv(m.get(rank, col)).expect("pivot is nonzero");
        for c in 0..m.cols {
            m.set(rank, c, f.mul(m.get(rank, c), inv));
        }
        for r in 0..m.rows {
            if r == rank {
                continue;
            }
            let factor = m.get(r, col);
            if factor == 0 {
                continue;
            }
            for c in 0..m.cols {
                let sub = f.mul(factor, m.get(rank, c));
                m.set(r, c, f.sub(m.get(r, c), sub));
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == m.rows {
            break;
        }
    }
    m.truncate_rows(rank);
    (m, pivots)
}

/// Basis of the right null space `{x : M x = 0}`, one vector per row,
/// derived from the RREF in free-column order and then re-reduced so the
/// result is canonical.
pub fn null_space(mat: &Matrix, f: &FieldSpec) -> Matrix {
    let n = mat.cols;
    let (r, pivots) = rref(mat, f);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Matrix::zeros(free.len(), n);
    for (i, &fc) in free.iter().enumerate() {
        basis.set(i, fc, 1);
        for (prow, &pc) in pivots.iter().enumerate() {
            basis.set(i, pc, f.neg(r.get(prow, fc)));
        }
    }
    let (reduced, _) = rref(&basis, f);
    reduced
}

pub fn weight(word: &[Elem]) -> usize {
    word.iter().filter(|&&x| x != 0).count()
}

pub fn support(word: &[Elem]) -> Vec<usize> {
    word.iter()
        .enumerate()
        .filter(|(_, &x)| x != 0)
        .map(|(i, _)| i)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Claimed,
    Certified,
}

/// A minimum-distance statement with its witness codeword.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceCert {
    pub value: usize,
    pub provenance: Provenance,
    pub witness: Vec<Elem>,
}

/// Full enumeration is preferred to support search up to this many words.
const FULL_ENUM_CAP: u64 = 1 << 22;

/// An `[n, k]` linear code over GF(q), canonically represented by its RREF
/// generator. `k = 0` (zero code) and `k = n` (full space) are legal but
/// flagged degenerate; bound evaluation rejects them.
#[derive(Debug)]
pub struct LinearCode {
    field: Arc<FieldSpec>,
    n: usize,
    k: usize,
    gen: Matrix,
    claimed_distance: Option<usize>,
    parity: OnceLock<Matrix>,
    distance: OnceLock<DistanceCert>,
}

impl Clone for LinearCode {
    fn clone(&self) -> Self {
        let parity = OnceLock::new();
        if let Some(p) = self.parity.get() {
            let _ = parity.set(p.clone());
        }
        let distance = OnceLock::new();
        if let Some(d) = self.distance.get() {
            let _ = distance.set(d.clone());
        }
        LinearCode {
            field: self.field.clone(),
            n: self.n,
            k: self.k,
            gen: self.gen.clone(),
            claimed_distance: self.claimed_distance,
            parity,
            distance,
        }
    }
}

impl PartialEq for LinearCode {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.n == other.n && self.gen == other.gen
    }
}

impl LinearCode {
    /// Builds a code from spanning rows; the generator is reduced to RREF
    /// and zero rows are dropped, so `k` is the rank of the input.
    pub fn from_generator(field: &Arc<FieldSpec>, rows: Matrix) -> Result<LinearCode> {
        if rows.cols == 0 {
            return Err(Error::Param("code length must be positive".into()));
        }
        let q = field.order();
        if rows.data.iter().any(|&x| x >= q) {
            return Err(Error::Param("matrix entry out of field range".into()));
        }
        let (gen, pivots) = rref(&rows, field);
        Ok(LinearCode {
            field: field.clone(),
            n: rows.cols,
            k: pivots.len(),
            gen,
            claimed_distance: None,
            parity: OnceLock::new(),
            distance: OnceLock::new(),
        })
    }

    /// Builds the code `{x : H x = 0}` from a parity-check matrix.
    pub fn from_parity(field: &Arc<FieldSpec>, h: Matrix) -> Result<LinearCode> {
        if h.cols == 0 {
            return Err(Error::Param("code length must be positive".into()));
        }
        let q = field.order();
        if h.data.iter().any(|&x| x >= q) {
            return Err(Error::Param("matrix entry out of field range".into()));
        }
        let gen = null_space(&h, field);
        let code = LinearCode {
            field: field.clone(),
            n: h.cols,
            k: gen.rows(),
            gen,
            claimed_distance: None,
            parity: OnceLock::new(),
            distance: OnceLock::new(),
        };
        Ok(code)
    }

    pub fn zero_code(field: &Arc<FieldSpec>, n: usize) -> Result<LinearCode> {
        Self::from_generator(field, Matrix::zeros(0, n))
    }

    pub fn field(&self) -> &Arc<FieldSpec> {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn generator(&self) -> &Matrix {
        &self.gen
    }

    /// Zero code or the full space.
    pub fn is_degenerate(&self) -> bool {
        self.k == 0 || self.k == self.n
    }

    /// q^k, saturating.
    pub fn word_count(&self) -> u128 {
        ipow(self.field.order() as u64, self.k as u32)
    }

    /// RREF generator of the dual code, computed once on demand.
    pub fn parity(&self) -> &Matrix {
        self.parity
            .get_or_init(|| null_space(&self.gen, &self.field))
    }

    /// The dual code; its parity matrix is this code's generator.
    pub fn dual(&self) -> LinearCode {
        let gen = self.parity().clone();
        let parity = OnceLock::new();
        let _ = parity.set(self.gen.clone());
        LinearCode {
            field: self.field.clone(),
            n: self.n,
            k: self.n - self.k,
            gen,
            claimed_distance: None,
            parity,
            distance: OnceLock::new(),
        }
    }

    pub fn encode(&self, msg: &[Elem]) -> Result<Vec<Elem>> {
        if msg.len() != self.k {
            return Err(Error::LengthMismatch {
                expected: self.k,
                got: msg.len(),
            });
        }
        let f = &*self.field;
        let mut out = vec![0; self.n];
        for (i, &c) in msg.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for j in 0..self.n {
                out[j] = f.add(out[j], f.mul(c, self.gen.get(i, j)));
            }
        }
        Ok(out)
    }

    /// Membership by syndrome against the dual generator.
    pub fn contains(&self, word: &[Elem]) -> Result<bool> {
        if word.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: word.len(),
            });
        }
        let f = &*self.field;
        let h = self.parity();
        Ok((0..h.rows()).all(|r| dot(f, h.row(r), word) == 0))
    }

    /// Membership of `word` in the dual: syndrome against this generator.
    pub fn in_dual(&self, word: &[Elem]) -> Result<bool> {
        if word.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: word.len(),
            });
        }
        let f = &*self.field;
        Ok((0..self.gen.rows()).all(|r| dot(f, self.gen.row(r), word) == 0))
    }

    pub fn claimed_distance(&self) -> Option<usize> {
        self.claimed_distance
    }

    pub fn set_claimed_distance(&mut self, d: usize) {
        self.claimed_distance = Some(d);
    }

    pub fn distance_cert(&self) -> Option<&DistanceCert> {
        self.distance.get()
    }

    fn neg_rows(&self) -> Matrix {
        Matrix::from_fn(self.k, self.n, |r, c| self.field.neg(self.gen.get(r, c)))
    }

    /// Exact minimum weight by exhaustive message enumeration. Charges
    /// q^k - 1 words against the budget up front.
    pub fn min_weight(&self, budget: &Budget) -> Result<(usize, Vec<Elem>)> {
        if self.k == 0 {
            return Err(Error::ZeroDimensional);
        }
        let total = self.word_count();
        budget.charge(total - 1)?;
        let end = total as u64;
        type Best = Option<(usize, u64, Vec<Elem>)>;
        let best: Best = fold_words(
            self,
            1,
            end,
            || None,
            |s: &mut Best, idx, word, w| {
                debug_assert!(w > 0, "nonzero message encodes to nonzero word");
                if s.as_ref().map_or(true, |(bw, bi, _)| (w, idx) < (*bw, *bi)) {
                    *s = Some((w, idx, word.to_vec()));
                }
            },
            |a, b| match (a, b) {
                (None, x) | (x, None) => x,
                (Some(a), Some(b)) => {
                    if (a.0, a.1) <= (b.0, b.1) {
                        Some(a)
                    } else {
                        Some(b)
                    }
                }
            },
        );
        let (w, _, word) = best.expect("at least one nonzero word");
        Ok((w, word))
    }

    /// Visits one representative per scalar class of codewords of weight
    /// exactly `w`: for each w-subset of columns (lexicographic order), the
    /// full-support null-space solutions of the parity submatrix,
    /// normalized so the first nonzero entry is 1.
    pub(crate) fn weight_classes(
        &self,
        w: usize,
        budget: &Budget,
        visit: &mut dyn FnMut(&[Elem]) -> ControlFlow<()>,
    ) -> Result<()> {
        let f = &*self.field;
        let q = f.order() as u64;
        if w == 0 || w > self.n {
            return Ok(());
        }
        let level_cost = binomial(self.n, w).saturating_mul(ipow(q - 1, w as u32));
        budget.charge(level_cost)?;
        let h = self.parity();
        let mut combo: Vec<usize> = (0..w).collect();
        let mut x = vec![0 as Elem; w];
        let mut word = vec![0 as Elem; self.n];
        loop {
            let sub = Matrix::from_fn(h.rows(), w, |r, c| h.get(r, combo[c]));
            let basis = null_space(&sub, f);
            let nu = basis.rows();
            if nu > 0 {
                let count = ipow(q, nu as u32) as u64;
                'solutions: for t in 1..count {
                    let mut rem = t;
                    x.fill(0);
                    for b in 0..nu {
                        let c = (rem % q) as Elem;
                        rem /= q;
                        if c == 0 {
                            continue;
                        }
                        for j in 0..w {
                            x[j] = f.add(x[j], f.mul(c, basis.get(b, j)));
                        }
                    }
                    if x[0] != 1 || x.iter().any(|&v| v == 0) {
                        continue 'solutions;
                    }
                    word.fill(0);
                    for j in 0..w {
                        word[combo[j]] = x[j];
                    }
                    if let ControlFlow::Break(()) = visit(&word) {
                        return Ok(());
                    }
                }
            }
            if !next_combination(&mut combo, self.n) {
                return Ok(());
            }
        }
    }

    /// For each weight up to `w_max` at which codewords exist, the smallest
    /// witness in support order. Proves `d > w_max` when the result is
    /// empty. Weight levels are charged as C(n,w)(q-1)^w words.
    pub fn low_weight_search(
        &self,
        w_max: usize,
        budget: &Budget,
    ) -> Result<Vec<(usize, Vec<Elem>)>> {
        let mut out = Vec::new();
        for w in 1..=w_max.min(self.n) {
            let mut hit: Option<Vec<Elem>> = None;
            self.weight_classes(w, budget, &mut |word| {
                hit = Some(word.to_vec());
                ControlFlow::Break(())
            })?;
            if let Some(word) = hit {
                out.push((w, word));
            }
        }
        Ok(out)
    }

    /// Certified minimum distance, computed on first use: full enumeration
    /// when q^k is small enough, ascending support search otherwise. The
    /// result is cached; a mismatching claimed distance is an error.
    pub fn certify_distance(&self, budget: &Budget) -> Result<&DistanceCert> {
        if self.distance.get().is_none() {
            if self.k == 0 {
                return Err(Error::ZeroDimensional);
            }
            let total = self.word_count();
            let (value, witness) = if total <= FULL_ENUM_CAP as u128 && budget.fits(total - 1) {
                self.min_weight(budget)?
            } else {
                self.min_weight_by_support(budget)?
            };
            if let Some(claimed) = self.claimed_distance {
                if claimed != value {
                    return Err(Error::Verification(format!(
                        "claimed distance {claimed} but certified {value}"
                    )));
                }
            }
            let _ = self.distance.set(DistanceCert {
                value,
                provenance: Provenance::Certified,
                witness,
            });
        }
        Ok(self.distance.get().unwrap())
    }

    fn min_weight_by_support(&self, budget: &Budget) -> Result<(usize, Vec<Elem>)> {
        for w in 1..=self.n {
            let mut hit: Option<Vec<Elem>> = None;
            self.weight_classes(w, budget, &mut |word| {
                hit = Some(word.to_vec());
                ControlFlow::Break(())
            })?;
            if let Some(word) = hit {
                return Ok((w, word));
            }
        }
        Err(Error::ZeroDimensional)
    }

    /// Minimum weight over C \ D for a strict subcode D, with witness.
    /// Chooses between full enumeration of C and ascending support search
    /// by estimated cost.
    pub fn relative_min_weight(
        &self,
        sub: &LinearCode,
        budget: &Budget,
    ) -> Result<(usize, Vec<Elem>)> {
        if !is_subcode(sub, self, false)? {
            return Err(Error::NotStrictSubcode("subtracted code is not contained"));
        }
        if sub.k == self.k {
            return Err(Error::NotStrictSubcode("difference is empty"));
        }
        let total = self.word_count();
        if total <= FULL_ENUM_CAP as u128 && budget.fits(total - 1) {
            self.relative_full(sub, budget)
        } else {
            self.relative_by_support(sub, budget)
        }
    }

    fn relative_full(&self, sub: &LinearCode, budget: &Budget) -> Result<(usize, Vec<Elem>)> {
        let total = self.word_count();
        budget.charge(total - 1)?;
        let end = total as u64;
        let f = &*self.field;
        let h_sub = sub.parity().clone();
        type Best = Option<(usize, u64, Vec<Elem>)>;
        let best: Best = fold_words(
            self,
            1,
            end,
            || None,
            |s: &mut Best, idx, word, w| {
                if s.as_ref().map_or(true, |(bw, bi, _)| (w, idx) < (*bw, *bi)) {
                    let in_sub = (0..h_sub.rows()).all(|r| dot(f, h_sub.row(r), word) == 0);
                    if !in_sub {
                        *s = Some((w, idx, word.to_vec()));
                    }
                }
            },
            |a, b| match (a, b) {
                (None, x) | (x, None) => x,
                (Some(a), Some(b)) => {
                    if (a.0, a.1) <= (b.0, b.1) {
                        Some(a)
                    } else {
                        Some(b)
                    }
                }
            },
        );
        match best {
            Some((w, _, word)) => Ok((w, word)),
            None => Err(Error::Verification(
                "strict subcode left an empty difference".into(),
            )),
        }
    }

    fn relative_by_support(
        &self,
        sub: &LinearCode,
        budget: &Budget,
    ) -> Result<(usize, Vec<Elem>)> {
        // membership in the subcode is scalar-invariant, so one check per
        // projective class suffices; scanning weights upward makes the
        // first hit minimal
        for w in 1..=self.n {
            let mut hit: Option<Vec<Elem>> = None;
            let mut err: Option<Error> = None;
            self.weight_classes(w, budget, &mut |word| match sub.contains(word) {
                Ok(false) => {
                    hit = Some(word.to_vec());
                    ControlFlow::Break(())
                }
                Ok(true) => ControlFlow::Continue(()),
                Err(e) => {
                    err = Some(e);
                    ControlFlow::Break(())
                }
            })?;
            if let Some(e) = err {
                return Err(e);
            }
            if let Some(word) = hit {
                return Ok((w, word));
            }
        }
        Err(Error::Verification(
            "strict subcode left an empty difference".into(),
        ))
    }
}

/// True iff every generator row of `sub` lies in `sup`; with `strict` the
/// containment must also be proper.
pub fn is_subcode(sub: &LinearCode, sup: &LinearCode, strict: bool) -> Result<bool> {
    if sub.field != sup.field {
        return Err(Error::FieldMismatch);
    }
    if sub.n != sup.n {
        return Err(Error::LengthMismatch {
            expected: sup.n,
            got: sub.n,
        });
    }
    for row in sub.gen.iter_rows() {
        if !sup.contains(row)? {
            return Ok(false);
        }
    }
    Ok(!strict || sub.k < sup.k)
}

#[inline]
pub fn dot(f: &FieldSpec, a: &[Elem], b: &[Elem]) -> Elem {
    let mut acc: Elem = 0;
    for i in 0..a.len() {
        acc = f.add(acc, f.mul(a[i], b[i]));
    }
    acc
}

pub fn ipow(base: u64, exp: u32) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let w = combo.len();
    let mut i = w;
    while i > 0 {
        i -= 1;
        if combo[i] < n - (w - i) {
            combo[i] += 1;
            for j in i + 1..w {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Digits of the t-th word in the reflected mixed-radix Gray sequence over
/// radix q: consecutive t differ in exactly one digit, by exactly 1.
fn gray_digits(q: u64, t: u64, out: &mut [u32]) {
    let k = out.len();
    let mut rem = t;
    for d in out.iter_mut() {
        *d = (rem % q) as u32;
        rem /= q;
    }
    // an odd written digit reverses the traversal of everything below it
    let mut flip = false;
    for i in (0..k).rev() {
        if flip {
            out[i] = (q - 1) as u32 - out[i];
        }
        if out[i] % 2 == 1 {
            flip = !flip;
        }
    }
}

fn scan_range<S>(
    code: &LinearCode,
    neg: &Matrix,
    start: u64,
    end: u64,
    state: &mut S,
    fold: &(impl Fn(&mut S, u64, &[Elem], usize) + ?Sized),
) {
    let f = &*code.field;
    let q = f.order() as u64;
    let (k, n) = (code.k, code.n);
    let mut digits = vec![0u32; k];
    let mut next = vec![0u32; k];
    let mut scaled: Vec<Elem> = Vec::with_capacity(n);
    let minus_one = f.neg(1);
    gray_digits(q, start, &mut digits);
    let mut word = vec![0 as Elem; n];
    for (i, &d) in digits.iter().enumerate() {
        if d != 0 {
            for j in 0..n {
                word[j] = f.add(word[j], f.mul(d, code.gen.get(i, j)));
            }
        }
    }
    let mut w = weight(&word);
    fold(state, start, &word, w);
    for t in start + 1..end {
        gray_digits(q, t, &mut next);
        let pos = (0..k)
            .find(|&i| next[i] != digits[i])
            .expect("consecutive Gray words differ");
        debug_assert_eq!(
            (0..k).filter(|&i| next[i] != digits[i]).count(),
            1,
            "Gray step touches a single digit"
        );
        // The digit step is +-1 on the encoding, but the element delta
        // enc(next) - enc(old) is not 1 in general over extension fields.
        let delta = f.sub(next[pos] as Elem, digits[pos] as Elem);
        let row = if delta == 1 {
            code.gen.row(pos)
        } else if delta == minus_one {
            neg.row(pos)
        } else {
            scaled.clear();
            scaled.extend(code.gen.row(pos).iter().map(|&g| f.mul(delta, g)));
            &scaled[..]
        };
        for j in 0..n {
            let old = word[j];
            let new = f.add(old, row[j]);
            if old == 0 && new != 0 {
                w += 1;
            } else if old != 0 && new == 0 {
                w -= 1;
            }
            word[j] = new;
        }
        std::mem::swap(&mut digits, &mut next);
        fold(state, t, &word, w);
    }
}

const SERIAL_CUTOFF: u64 = 1 << 15;

/// Folds over the codewords of messages `start..end` (Gray order),
/// splitting the range across parallel workers. The merge must be
/// commutative and associative for the result to be deterministic.
pub(crate) fn fold_words<S, I, F, M>(
    code: &LinearCode,
    start: u64,
    end: u64,
    init: I,
    fold: F,
    merge: M,
) -> S
where
    S: Send,
    I: Fn() -> S + Sync,
    F: Fn(&mut S, u64, &[Elem], usize) + Sync,
    M: Fn(S, S) -> S + Sync + Send,
{
    let total = end.saturating_sub(start);
    if total == 0 {
        return init();
    }
    let neg = code.neg_rows();
    if total <= SERIAL_CUTOFF || rayon::current_num_threads() <= 1 {
        let mut s = init();
        scan_range(code, &neg, start, end, &mut s, &fold);
        return s;
    }
    let chunks = (rayon::current_num_threads() as u64 * 8).min(total);
    let chunk_size = total.div_ceil(chunks);
    (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let s0 = start + ci * chunk_size;
            let e0 = (s0 + chunk_size).min(end);
            let mut s = init();
            if s0 < e0 {
                scan_range(code, &neg, s0, e0, &mut s, &fold);
            }
            s
        })
        .reduce_with(&merge)
        .unwrap_or_else(init)
}

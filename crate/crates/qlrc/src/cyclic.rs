//! Cyclic codes through their defining sets: cyclotomic cosets, generator
//! polynomials, the BCH bound, the block-locality test, and the
//! dual-containing test.
//!
//! A length-n cyclic code over GF(q) with gcd(n, q) = 1 is determined by
//! the set D of exponents i with g(alpha^i) = 0, where alpha is a fixed
//! primitive n-th root of unity. D must be a union of q-cyclotomic cosets
//! for g to have coefficients in GF(q).

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galois::{gcd, nth_root_of_unity, Elem, FieldSpec, Poly, RootOfUnity};
use crate::linear::{weight, LinearCode, Matrix};
use crate::locality::{certificate_from_witnesses, LocalityCertificate};

/// Orbit of i under multiplication by q modulo n, sorted.
pub fn cyclotomic_coset(i: usize, n: usize, q: u64) -> Result<Vec<usize>> {
    if n == 0 || gcd(n as u64, q) != 1 {
        return Err(Error::Param(format!(
            "cyclotomic cosets need gcd(n, q) = 1, got n={n} q={q}"
        )));
    }
    let mut coset = BTreeSet::new();
    let mut cur = i % n;
    while coset.insert(cur) {
        cur = ((cur as u64 * q) % n as u64) as usize;
    }
    Ok(coset.into_iter().collect())
}

/// A union of q-cyclotomic cosets modulo n, the root exponents of a cyclic
/// code's generator polynomial.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "DefiningSetRepr", into = "DefiningSetRepr")]
pub struct DefiningSet {
    n: usize,
    q: u64,
    members: Vec<usize>,
    cosets: Vec<Vec<usize>>,
    closure_enlarged: bool,
}

impl PartialEq for DefiningSet {
    /// `closure_enlarged` records how the set was entered, not what it is.
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.q == other.q && self.members == other.members
    }
}

impl Eq for DefiningSet {}

#[derive(Serialize, Deserialize)]
struct DefiningSetRepr {
    n: usize,
    q: u64,
    members: Vec<usize>,
}

impl From<DefiningSet> for DefiningSetRepr {
    fn from(d: DefiningSet) -> Self {
        DefiningSetRepr {
            n: d.n,
            q: d.q,
            members: d.members,
        }
    }
}

impl TryFrom<DefiningSetRepr> for DefiningSet {
    type Error = Error;
    fn try_from(r: DefiningSetRepr) -> Result<DefiningSet> {
        let d = defining_set_make(r.n, r.q, &r.members)?;
        if d.closure_enlarged {
            return Err(Error::Param(
                "serialized defining set is not closed under the q-orbit".into(),
            ));
        }
        Ok(d)
    }
}

/// Closes the seed residues under multiplication by q mod n and records
/// whether that strictly enlarged the set (Theorem-style constructions
/// require their index sets to be coset-closed already).
pub fn defining_set_make(n: usize, q: u64, seeds: &[usize]) -> Result<DefiningSet> {
    if n == 0 || gcd(n as u64, q) != 1 {
        return Err(Error::Param(format!(
            "defining sets need gcd(n, q) = 1, got n={n} q={q}"
        )));
    }
    let seed_set: BTreeSet<usize> = seeds.iter().map(|&s| s % n).collect();
    let mut members = BTreeSet::new();
    let mut cosets = Vec::new();
    for &s in &seed_set {
        if members.contains(&s) {
            continue;
        }
        let coset = cyclotomic_coset(s, n, q)?;
        members.extend(coset.iter().copied());
        cosets.push(coset);
    }
    cosets.sort();
    let closure_enlarged = members.len() != seed_set.len();
    Ok(DefiningSet {
        n,
        q,
        members: members.into_iter().collect(),
        cosets,
        closure_enlarged,
    })
}

impl DefiningSet {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn cosets(&self) -> &[Vec<usize>] {
        &self.cosets
    }

    pub fn closure_enlarged(&self) -> bool {
        self.closure_enlarged
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&(i % self.n)).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// A built cyclic code together with the data that defined it.
#[derive(Clone, Debug)]
pub struct CyclicCode {
    pub code: LinearCode,
    pub defining: DefiningSet,
    pub root: RootOfUnity,
    pub generator_poly: Poly,
}

/// Builds the cyclic code with defining set D: g(x) is the product of
/// (x - alpha^i) over D, computed in the splitting field and retracted to
/// GF(q); the generator matrix stacks the shifts x^j g(x). The build
/// cross-checks itself: retraction must succeed (D coset-closed), the
/// dimension must be n - |D|, and every evaluation row of the check matrix
/// must annihilate every generator row.
pub fn cyclic_code_build(field: &Arc<FieldSpec>, d: &DefiningSet) -> Result<CyclicCode> {
    let n = d.n();
    let q = field.order() as u64;
    if q != d.q() {
        return Err(Error::Param(format!(
            "defining set is for GF({}), code field is GF({q})",
            d.q()
        )));
    }
    let root = nth_root_of_unity(field, n)?;
    let ext = root.ext_field().clone();
    let roots: Vec<Elem> = d.members().iter().map(|&i| root.alpha_pow(i as i64)).collect();
    let g_ext = ext.poly_from_roots(&roots);
    let mut g_coeffs = Vec::with_capacity(g_ext.coeffs().len());
    for &c in g_ext.coeffs() {
        g_coeffs.push(root.embedding.retract(c).map_err(|_| {
            Error::Verification(
                "generator polynomial has a coefficient outside the base field".into(),
            )
        })?);
    }
    let g = Poly::new(g_coeffs);
    let k = n - d.len();
    let mut rows = Matrix::zeros(k, n);
    for j in 0..k {
        for (i, &c) in g.coeffs().iter().enumerate() {
            rows.set(j, j + i, c);
        }
    }
    let code = if k == 0 {
        LinearCode::zero_code(field, n)?
    } else {
        LinearCode::from_generator(field, rows)?
    };
    if code.k() != k {
        return Err(Error::Verification(format!(
            "cyclic code came out with dimension {} instead of {k}",
            code.k()
        )));
    }
    // evaluation check matrix: row for each i in D must annihilate the code
    for &i in d.members() {
        for grow in code.generator().iter_rows() {
            let mut acc: Elem = 0;
            for (j, &c) in grow.iter().enumerate() {
                let term = ext.mul(root.embedding.embed(c), root.alpha_pow((i * j) as i64));
                acc = ext.add(acc, term);
            }
            if acc != 0 {
                return Err(Error::Verification(format!(
                    "generator row does not vanish at root exponent {i}"
                )));
            }
        }
    }
    Ok(CyclicCode {
        code,
        defining: d.clone(),
        root,
        generator_poly: g,
    })
}

/// Largest lambda such that D contains an arithmetic progression of
/// lambda - 1 terms whose common difference is coprime to n; the code's
/// distance is then at least lambda. Scans every start and difference.
pub fn bch_bound(d: &DefiningSet) -> usize {
    let n = d.n();
    let mut best_run = 0usize;
    for m in 1..n.max(2) {
        if gcd(m as u64, n as u64) != 1 {
            continue;
        }
        for start in 0..n {
            let mut run = 0;
            let mut cur = start;
            while run < n && d.contains(cur) {
                run += 1;
                cur = (cur + m) % n;
            }
            best_run = best_run.max(run);
        }
        if n == 1 {
            break;
        }
    }
    best_run + 1
}

/// Block-locality test for n = u(r+1): the code has locality r when every
/// exponent i(r+1) + 1 for i in [0, u-1] lies in D.
pub fn cyclic_locality(d: &DefiningSet, u: usize, r: usize) -> Result<bool> {
    if u == 0 || r == 0 || d.n() != u * (r + 1) {
        return Err(Error::Param(format!(
            "length {} is not u(r+1) with u={u}, r={r}",
            d.n()
        )));
    }
    Ok((0..u).all(|i| d.contains(i * (r + 1) + 1)))
}

/// Explicit repair witnesses for a code passing `cyclic_locality`: for the
/// residue class s mod u, the dual word supported on {ju + s : j in
/// [0, r]} with value alpha^j at position j. When alpha lives in a proper
/// extension the word is pulled down by a trace, choosing the smallest
/// multiplier that keeps the covered coordinate nonzero.
pub fn block_repair_witnesses(
    cc: &CyclicCode,
    u: usize,
    r: usize,
) -> Result<LocalityCertificate> {
    if !cyclic_locality(&cc.defining, u, r)? {
        return Err(Error::Param(
            "defining set fails the block-locality condition".into(),
        ));
    }
    let n = cc.defining.n();
    let ext = cc.root.ext_field().clone();
    let emb = &cc.root.embedding;
    let mut per_class: Vec<Vec<Elem>> = Vec::with_capacity(u);
    for s in 0..u {
        let mut word = vec![0 as Elem; n];
        for j in 0..=r {
            word[j * u + s] = cc.root.alpha_pow((j * u + s) as i64);
        }
        per_class.push(word);
    }
    let mut words = Vec::with_capacity(n);
    for coord in 0..n {
        let class = &per_class[coord % u];
        let word = if emb.degree() == 1 {
            class.clone()
        } else {
            // find the smallest multiplier whose trace keeps this
            // coordinate nonzero; one exists because the trace form is
            // nondegenerate
            let mut chosen = None;
            for gamma in ext.elements() {
                if gamma == 0 {
                    continue;
                }
                if emb.trace(ext.mul(gamma, class[coord]))? != 0 {
                    chosen = Some(gamma);
                    break;
                }
            }
            let gamma = chosen.ok_or(Error::Verification(
                "trace vanished for every multiplier".into(),
            ))?;
            let mut w = vec![0 as Elem; n];
            for (j, &x) in class.iter().enumerate() {
                w[j] = emb.trace(ext.mul(gamma, x))?;
            }
            w
        };
        if weight(&word) > r + 1 {
            return Err(Error::Verification(
                "block witness spilled outside its repair group".into(),
            ));
        }
        words.push(word);
    }
    certificate_from_witnesses(&cc.code, r, words)
}

/// D and -D disjoint, the defining-set criterion for dual(C) inside C.
pub fn is_dual_containing(d: &DefiningSet) -> bool {
    d.members()
        .iter()
        .all(|&i| !d.contains(d.n() - i % d.n()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::Budget;
    use crate::linear::is_subcode;

    fn gf(q: u64) -> Arc<FieldSpec> {
        FieldSpec::from_order(q).unwrap()
    }

    fn dset(n: usize, q: u64, seeds: &[usize]) -> DefiningSet {
        defining_set_make(n, q, seeds).unwrap()
    }

    #[test]
    fn coset_orbits() {
        assert_eq!(cyclotomic_coset(1, 15, 2).unwrap(), vec![1, 2, 4, 8]);
        assert_eq!(cyclotomic_coset(0, 9, 2).unwrap(), vec![0]);
        assert_eq!(cyclotomic_coset(5, 15, 2).unwrap(), vec![5, 10]);
        assert!(cyclotomic_coset(1, 4, 2).is_err());
    }

    #[test]
    fn defining_set_closure() {
        let d = dset(4, 13, &[1]);
        assert_eq!(d.members(), &[1]);
        assert!(!d.closure_enlarged());

        let empty = dset(5, 2, &[]);
        assert!(empty.is_empty());

        let d = dset(12, 13, &[1, 7]);
        assert_eq!(d.members(), &[1, 7]);
        assert!(!d.closure_enlarged());

        let enlarged = dset(15, 2, &[1]);
        assert_eq!(enlarged.members(), &[1, 2, 4, 8]);
        assert!(enlarged.closure_enlarged());
        assert_eq!(enlarged.cosets().len(), 1);
    }

    #[test]
    fn build_single_root_code() {
        let cc = cyclic_code_build(&gf(13), &dset(4, 13, &[1])).unwrap();
        assert_eq!((cc.code.n(), cc.code.k()), (4, 3));
        // g(x) = x - 5
        assert_eq!(cc.generator_poly.coeffs(), &[8, 1]);
        assert_eq!(cc.root.alpha, 5);
    }

    #[test]
    fn build_degenerate_sets() {
        let full = cyclic_code_build(&gf(2), &dset(3, 2, &[])).unwrap();
        assert_eq!(full.code.k(), 3);
        assert!(full.code.is_degenerate());

        let zero = cyclic_code_build(&gf(2), &dset(3, 2, &[0, 1, 2])).unwrap();
        assert_eq!(zero.code.k(), 0);
        assert!(zero.code.is_degenerate());
    }

    #[test]
    fn build_repetition_from_conjugate_coset() {
        let cc = cyclic_code_build(&gf(2), &dset(3, 2, &[1, 2])).unwrap();
        assert_eq!((cc.code.n(), cc.code.k()), (3, 1));
        assert_eq!(cc.generator_poly.coeffs(), &[1, 1, 1]);
        assert_eq!(cc.code.generator().row(0), &[1, 1, 1]);
    }

    #[test]
    fn build_through_extension_field() {
        // binary Hamming code of length 15 via GF(16)
        let cc = cyclic_code_build(&gf(2), &dset(15, 2, &[1])).unwrap();
        assert_eq!((cc.code.n(), cc.code.k()), (15, 11));
        let (d, _) = cc.code.min_weight(&Budget::default()).unwrap();
        assert_eq!(d, 3);
        assert!(d >= bch_bound(&cc.defining));
    }

    #[test]
    fn shifts_stay_inside_the_code() {
        for (q, n, seeds) in [(2u64, 7usize, vec![1]), (13, 4, vec![1]), (3, 8, vec![1, 2])] {
            let cc = cyclic_code_build(&gf(q), &dset(n, q, &seeds)).unwrap();
            for row in cc.code.generator().iter_rows() {
                let mut shifted = vec![0; n];
                for j in 0..n {
                    shifted[(j + 1) % n] = row[j];
                }
                assert!(cc.code.contains(&shifted).unwrap());
            }
            assert_eq!(cc.code.k(), n - cc.defining.len());
        }
    }

    #[test]
    fn bch_values() {
        assert_eq!(bch_bound(&dset(15, 2, &[1])), 3);
        assert_eq!(bch_bound(&dset(5, 2, &[])), 1);
        assert_eq!(bch_bound(&dset(4, 13, &[1])), 2);
        // {1,2,3,4} mod 7 under q=2 closes to {1,2,3,4,5,6}: run of 6
        assert_eq!(bch_bound(&dset(7, 2, &[1, 3])), 7);
        // progression with difference 2 (coprime to 7): {1, 3} mod 7
        assert_eq!(bch_bound(&dset(7, 29, &[1, 3])), 3);
        // difference 2 shares a factor with n = 8, so {1, 3} is no run
        assert_eq!(bch_bound(&dset(8, 13, &[1, 3])), 2);
    }

    #[test]
    fn bch_never_exceeds_certified_distance() {
        let budget = Budget::default();
        for (q, n, seeds) in [
            (2u64, 7usize, vec![1]),
            (2, 15, vec![1, 3]),
            (13, 4, vec![1]),
            (3, 13, vec![1]),
        ] {
            let cc = cyclic_code_build(&gf(q), &dset(n, q, &seeds)).unwrap();
            let (d, _) = cc.code.min_weight(&budget).unwrap();
            assert!(
                d >= bch_bound(&cc.defining),
                "BCH bound exceeded the distance on n={n} q={q}"
            );
        }
    }

    #[test]
    fn block_locality_test() {
        assert!(cyclic_locality(&dset(4, 13, &[1]), 1, 3).unwrap());
        assert!(!cyclic_locality(&dset(4, 13, &[]), 1, 3).unwrap());
        assert!(cyclic_locality(&dset(12, 13, &[1, 7, 2]), 2, 5).unwrap());
        assert!(!cyclic_locality(&dset(12, 13, &[1, 2]), 2, 5).unwrap());
        assert!(cyclic_locality(&dset(12, 13, &[1]), 2, 4).is_err());
    }

    #[test]
    fn block_witness_for_single_group() {
        let cc = cyclic_code_build(&gf(13), &dset(4, 13, &[1])).unwrap();
        let cert = block_repair_witnesses(&cc, 1, 3).unwrap();
        assert!(cert.verified);
        for w in &cert.witnesses {
            assert_eq!(w.word, vec![1, 5, 12, 8]);
            assert_eq!(w.weight, 4);
        }
    }

    #[test]
    fn block_witnesses_through_extension() {
        // n = 15 = 5 * 3, u = 5, r = 2 over GF(2): alpha in GF(16),
        // witnesses come from traces; D holds the exponents 3i + 1
        let seeds: Vec<usize> = (0..5).map(|i| 3 * i + 1).collect();
        let d = dset(15, 2, &seeds);
        let cc = cyclic_code_build(&gf(2), &d).unwrap();
        assert!(cyclic_locality(&d, 5, 2).unwrap());
        let cert = block_repair_witnesses(&cc, 5, 2).unwrap();
        assert!(cert.verified);
        for w in &cert.witnesses {
            assert!(w.weight <= 3);
            // support stays inside one residue class mod 5
            let class: Vec<usize> = w
                .word
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != 0)
                .map(|(j, _)| j % 5)
                .collect();
            assert!(class.windows(2).all(|p| p[0] == p[1]));
        }
    }

    #[test]
    fn dual_containing_criterion() {
        assert!(is_dual_containing(&dset(4, 13, &[1])));
        assert!(!is_dual_containing(&dset(4, 13, &[0, 1])));
        assert!(!is_dual_containing(&dset(4, 13, &[1, 3])));
    }

    #[test]
    fn dual_containing_matches_subcode_test() {
        for (q, n, seeds) in [
            (13u64, 4usize, vec![1]),
            (13, 4, vec![1, 3]),
            (13, 4, vec![0, 1]),
            (2, 7, vec![1]),
            (2, 7, vec![1, 3]),
            (3, 8, vec![1, 2]),
            (5, 8, vec![1, 2, 3]),
        ] {
            let d = dset(n, q, &seeds);
            let cc = cyclic_code_build(&gf(q), &d).unwrap();
            if cc.code.is_degenerate() {
                continue;
            }
            let by_sets = is_dual_containing(&d);
            let by_matrix = is_subcode(&cc.code.dual(), &cc.code, false).unwrap();
            assert_eq!(by_sets, by_matrix, "criterion split on n={n} q={q} {seeds:?}");
        }
    }

    #[test]
    fn defining_set_round_trips_as_json() {
        let d = dset(15, 2, &[1, 5]);
        let json = serde_json::to_string(&d).unwrap();
        let back: DefiningSet = serde_json::from_str(&json).unwrap();
        assert_eq!(d, back);
        // a non-closed member list is rejected on the way in
        let bad = r#"{"n":15,"q":2,"members":[1,2]}"#;
        assert!(serde_json::from_str::<DefiningSet>(bad).is_err());
    }
}

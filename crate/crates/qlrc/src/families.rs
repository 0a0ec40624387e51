//! Generalized Reed-Solomon building blocks and the construction families
//! assembled from them: block-diagonal locally recoverable codes, orthogonal
//! pairs of those composed into quantum codes, and two cyclic families whose
//! defining sets carry the repair structure.
//!
//! Every builder certifies its own output. Distances go through the
//! enumeration oracles, locality witnesses are read off the construction
//! rows instead of searched for, and a finished quantum code must meet the
//! distance and dimension bounds with equality before it is returned.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::css::{
    css_compose, pure_optimal_check, quantum_certificate_from_pairs, CssQuantumCode,
    PureOptimalReport, Purity,
};
use crate::cyclic::{
    bch_bound, block_repair_witnesses, cyclic_code_build, cyclic_locality, defining_set_make,
    is_dual_containing,
};
use crate::error::{Error, Result};
use crate::galois::{gcd, Elem, FieldSpec};
use crate::linear::{is_subcode, LinearCode, Matrix};
use crate::locality::{
    certificate_from_witnesses, next_combination_cols, singleton_like_bound, LocalityCertificate,
};

/// Data for a generalized Reed-Solomon code: codewords are
/// (v_1 f(a_1), ..., v_n f(a_n)) over polynomials f of degree below k.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrsSpec {
    pub k: usize,
    pub a: Vec<Elem>,
    pub v: Vec<Elem>,
}

/// Evaluation points and column multipliers for one repair block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub a: Vec<Elem>,
    pub v: Vec<Elem>,
}

/// An assembled block check matrix: u multiplier rows placed block-diagonally,
/// then d-2 rows of multiplied point powers spanning all blocks.
#[derive(Clone, Debug)]
pub struct BlockCheckSpec {
    pub d: usize,
    pub u: usize,
    pub r: usize,
    pub blocks: Vec<BlockSpec>,
    pub check: Matrix,
}

/// A classical build bundled with its construction-native repair witnesses.
#[derive(Clone, Debug)]
pub struct LrcBuild {
    pub code: LinearCode,
    pub locality: LocalityCertificate,
}

/// A quantum build bundled with the classical repair certificates of both
/// ingredients and the equality report against the locality-aware bounds.
#[derive(Clone, Debug)]
pub struct QuantumFamilyBuild {
    pub quantum: CssQuantumCode,
    pub locality_c1: LocalityCertificate,
    pub locality_c2: LocalityCertificate,
    pub optimal: PureOptimalReport,
}

/// Entries in range, points distinct, multipliers nonzero, lengths equal.
fn validate_points(f: &FieldSpec, a: &[Elem], v: &[Elem]) -> Result<()> {
    if a.is_empty() {
        return Err(Error::Param("evaluation vector is empty".into()));
    }
    if a.len() != v.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            got: v.len(),
        });
    }
    let q = f.order();
    for &x in a.iter().chain(v.iter()) {
        if x >= q {
            return Err(Error::Param(format!(
                "element encoding {x} is outside the field of order {q}"
            )));
        }
    }
    let mut seen = BTreeSet::new();
    for &x in a {
        if !seen.insert(x) {
            return Err(Error::Param("evaluation points repeat".into()));
        }
    }
    if v.iter().any(|&m| m == 0) {
        return Err(Error::Param("column multipliers must be nonzero".into()));
    }
    Ok(())
}

/// Row i holds v_j a_j^i, so the rows span the evaluations of all
/// polynomials of degree below k.
pub fn grs_matrix(f: &FieldSpec, k: usize, a: &[Elem], v: &[Elem]) -> Result<Matrix> {
    validate_points(f, a, v)?;
    let n = a.len();
    if k < 1 || k > n {
        return Err(Error::Param(format!("dimension {k} is outside [1, {n}]")));
    }
    Ok(Matrix::from_fn(k, n, |i, j| {
        f.mul(v[j], f.pow(a[j], i as u64))
    }))
}

/// Builds the [n, k, n-k+1] code and certifies the distance by enumeration.
pub fn grs_build(field: &Arc<FieldSpec>, spec: &GrsSpec, budget: &Budget) -> Result<LinearCode> {
    let gen = grs_matrix(field, spec.k, &spec.a, &spec.v)?;
    let mut code = LinearCode::from_generator(field, gen)?;
    if code.k() != spec.k {
        return Err(Error::Verification(
            "evaluation rows of distinct points collapsed".into(),
        ));
    }
    code.set_claimed_distance(spec.a.len() - spec.k + 1);
    code.certify_distance(budget)?;
    Ok(code)
}

/// Multipliers v' making the evaluation codes on v and v' dual to each
/// other: v'_i inverts v_i times the product of (a_i - a_j) over j != i.
/// The identity is not taken on faith: the matrix product is checked to
/// vanish for every dimension split before v' is returned.
pub fn grs_dual_multipliers(f: &FieldSpec, a: &[Elem], v: &[Elem]) -> Result<Vec<Elem>> {
    validate_points(f, a, v)?;
    let n = a.len();
    let mut vp = Vec::with_capacity(n);
    for i in 0..n {
        let mut prod = v[i];
        for j in 0..n {
            if j != i {
                prod = f.mul(prod, f.sub(a[i], a[j]));
            }
        }
        vp.push(f.inv(prod)?);
    }
    for k in 1..n {
        let g = grs_matrix(f, k, a, v)?;
        let gd = grs_matrix(f, n - k, a, &vp)?;
        if !g.mul(&gd.transpose(), f)?.is_zero() {
            return Err(Error::Verification(format!(
                "dual multipliers fail orthogonality at dimension split {k}"
            )));
        }
    }
    Ok(vp)
}

/// Deterministic block data: for d <= 4 every block shares the first r+1
/// field elements in encoding order with unit multipliers; for d >= 5 the
/// blocks take disjoint runs of r+1 elements, which needs u(r+1) <= q.
pub fn default_blocks(f: &FieldSpec, d: usize, u: usize, r: usize) -> Result<Vec<BlockSpec>> {
    let q = f.order() as usize;
    let ones = vec![1 as Elem; r + 1];
    if d <= 4 {
        if r + 1 > q {
            return Err(Error::Guard(format!(
                "a block needs {} distinct evaluation points but the field has {q}",
                r + 1
            )));
        }
        let a: Vec<Elem> = (0..=r as Elem).collect();
        Ok(vec![BlockSpec { a, v: ones }; u])
    } else {
        if u * (r + 1) > q {
            return Err(Error::Guard(format!(
                "disjoint evaluation supports need {} points but the field has {q}",
                u * (r + 1)
            )));
        }
        Ok((0..u)
            .map(|i| BlockSpec {
                a: ((i * (r + 1)) as Elem..((i + 1) * (r + 1)) as Elem).collect(),
                v: ones.clone(),
            })
            .collect())
    }
}

/// Validates the block family and assembles the check matrix. For d in
/// {2,3,4} all blocks must coincide; for d >= 5 every subset S of at most
/// floor((d-1)/2) blocks must jointly cover at least r|S|+1 points.
pub fn block_check_assemble(
    f: &FieldSpec,
    d: usize,
    u: usize,
    r: usize,
    blocks: Vec<BlockSpec>,
) -> Result<BlockCheckSpec> {
    if d < 2 {
        return Err(Error::Param("target distance must be at least 2".into()));
    }
    if u < 1 || r < 1 {
        return Err(Error::Param(
            "need at least one block and positive locality".into(),
        ));
    }
    if blocks.len() != u {
        return Err(Error::LengthMismatch {
            expected: u,
            got: blocks.len(),
        });
    }
    for b in &blocks {
        validate_points(f, &b.a, &b.v)?;
        if b.a.len() != r + 1 {
            return Err(Error::Param(format!(
                "each block carries r+1 = {} coordinates, got {}",
                r + 1,
                b.a.len()
            )));
        }
    }
    if d <= 4 {
        if blocks.iter().any(|b| b != &blocks[0]) {
            return Err(Error::Guard(
                "target distances 2 through 4 need identical blocks".into(),
            ));
        }
    } else {
        let cap = ((d - 1) / 2).min(u);
        for s in 2..=cap {
            let mut combo: Vec<usize> = (0..s).collect();
            loop {
                let mut union: BTreeSet<Elem> = BTreeSet::new();
                for &g in &combo {
                    union.extend(blocks[g].a.iter().copied());
                }
                if union.len() < r * s + 1 {
                    return Err(Error::Guard(format!(
                        "blocks {combo:?} share too many evaluation points: {} covered, {} needed",
                        union.len(),
                        r * s + 1
                    )));
                }
                if !next_combination_cols(&mut combo, u) {
                    break;
                }
            }
        }
    }
    let n = u * (r + 1);
    let mut rows = Vec::with_capacity(u + d - 2);
    for (i, b) in blocks.iter().enumerate() {
        let mut row = vec![0 as Elem; n];
        row[i * (r + 1)..(i + 1) * (r + 1)].copy_from_slice(&b.v);
        rows.push(row);
    }
    for t in 1..=(d - 2) {
        let mut row = vec![0 as Elem; n];
        for (i, b) in blocks.iter().enumerate() {
            for j in 0..=r {
                row[i * (r + 1) + j] = f.mul(b.v[j], f.pow(b.a[j], t as u64));
            }
        }
        rows.push(row);
    }
    let check = Matrix::from_rows(rows)?;
    Ok(BlockCheckSpec {
        d,
        u,
        r,
        blocks,
        check,
    })
}

/// Builds the [u(r+1), ur-d+2, d] code with block-diagonal repair rows,
/// certifies the distance by oracle, and wraps the multiplier rows into a
/// verified locality certificate. Pass None to use the default blocks.
pub fn block_lrc_build(
    field: &Arc<FieldSpec>,
    d: usize,
    u: usize,
    r: usize,
    blocks: Option<Vec<BlockSpec>>,
    budget: &Budget,
) -> Result<LrcBuild> {
    let q = field.order() as usize;
    if d < 2 {
        return Err(Error::Param("target distance must be at least 2".into()));
    }
    if r + 2 <= d {
        return Err(Error::Guard(format!(
            "locality {r} must exceed the distance surplus d-2 = {}",
            d - 2
        )));
    }
    if r >= q {
        return Err(Error::Guard(format!(
            "locality {r} exceeds the field bound q-1 = {}",
            q - 1
        )));
    }
    let blocks = match blocks {
        Some(b) => b,
        None => default_blocks(field, d, u, r)?,
    };
    let spec = block_check_assemble(field, d, u, r, blocks)?;
    let mut code = LinearCode::from_parity(field, spec.check.clone())?;
    let expect_k = u * r + 2 - d;
    if code.k() != expect_k {
        return Err(Error::Verification(format!(
            "check rows are dependent: dimension {} instead of {expect_k}",
            code.k()
        )));
    }
    code.set_claimed_distance(d);
    code.certify_distance(budget)?;
    let words: Vec<Vec<Elem>> = (0..code.n())
        .map(|j| spec.check.row(j / (r + 1)).to_vec())
        .collect();
    let locality = certificate_from_witnesses(&code, r, words)?;
    Ok(LrcBuild { code, locality })
}

/// Common tail of the quantum builders: certification, expected-parameter
/// checks, construction-native witness pairs, and the equality report.
fn finish_quantum(
    mut qc: CssQuantumCode,
    r: usize,
    pairs: Vec<(Vec<Elem>, Vec<Elem>)>,
    expect_kappa: usize,
    expect_delta: usize,
) -> Result<QuantumFamilyBuild> {
    if !qc.is_certified() {
        return Err(Error::Infeasible(
            "the distance oracle ran out of budget before certification".into(),
        ));
    }
    if qc.kappa() != expect_kappa {
        return Err(Error::Verification(format!(
            "expected {expect_kappa} logical dimensions, certified {}",
            qc.kappa()
        )));
    }
    if qc.delta() != expect_delta {
        return Err(Error::Verification(format!(
            "expected distance {expect_delta}, certified {}",
            qc.delta()
        )));
    }
    if qc.purity() != Some(Purity::Pure) {
        return Err(Error::Verification("family instance is not pure".into()));
    }
    let locality_c1 =
        certificate_from_witnesses(qc.c1(), r, pairs.iter().map(|p| p.0.clone()).collect())?;
    let locality_c2 =
        certificate_from_witnesses(qc.c2(), r, pairs.iter().map(|p| p.1.clone()).collect())?;
    let cert = quantum_certificate_from_pairs(&qc, r, pairs)?;
    qc.set_locality(cert)?;
    let optimal = pure_optimal_check(&qc, r)?;
    if !optimal.distance_equality || !optimal.dimension_equality {
        return Err(Error::Verification(
            "family instance missed a bound equality it guarantees".into(),
        ));
    }
    Ok(QuantumFamilyBuild {
        quantum: qc,
        locality_c1,
        locality_c2,
        optimal,
    })
}

/// Builds two block codes on dual multiplier families, verifies their check
/// matrices annihilate each other block by block and as a whole, and
/// composes them into the pure [[u(r+1), ur-2(d-2)-u, d]] code with
/// locality r. Needs r strictly above 2(d-2)+u.
pub fn css_grs_pair_build(
    field: &Arc<FieldSpec>,
    d: usize,
    u: usize,
    r: usize,
    blocks: Option<Vec<BlockSpec>>,
    budget: &Budget,
) -> Result<QuantumFamilyBuild> {
    let q = field.order() as usize;
    if d < 2 {
        return Err(Error::Param("target distance must be at least 2".into()));
    }
    if u < 1 {
        return Err(Error::Param("need at least one block".into()));
    }
    if r <= 2 * (d - 2) + u {
        return Err(Error::Guard(format!(
            "locality {r} must strictly exceed 2(d-2)+u = {}",
            2 * (d - 2) + u
        )));
    }
    if r >= q {
        return Err(Error::Guard(format!(
            "locality {r} exceeds the field bound q-1 = {}",
            q - 1
        )));
    }
    let blocks = match blocks {
        Some(b) => b,
        None => default_blocks(field, d, u, r)?,
    };
    let spec = block_check_assemble(field, d, u, r, blocks)?;
    let mut primed = Vec::with_capacity(u);
    for b in &spec.blocks {
        primed.push(BlockSpec {
            a: b.a.clone(),
            v: grs_dual_multipliers(field, &b.a, &b.v)?,
        });
    }
    let spec2 = block_check_assemble(field, d, u, r, primed)?;
    for i in 0..u {
        let g1 = grs_matrix(field, d - 1, &spec.blocks[i].a, &spec.blocks[i].v)?;
        let g2 = grs_matrix(field, d - 1, &spec2.blocks[i].a, &spec2.blocks[i].v)?;
        if !g1.mul(&g2.transpose(), field)?.is_zero() {
            return Err(Error::Verification(format!(
                "block {i}: the paired check rows are not orthogonal"
            )));
        }
    }
    if !spec
        .check
        .mul(&spec2.check.transpose(), field)?
        .is_zero()
    {
        return Err(Error::Verification(
            "the product of the two check matrices has a nonzero entry".into(),
        ));
    }
    let mut c1 = LinearCode::from_parity(field, spec.check.clone())?;
    let mut c2 = LinearCode::from_parity(field, spec2.check.clone())?;
    let expect_k = u * r + 2 - d;
    if c1.k() != expect_k || c2.k() != expect_k {
        return Err(Error::Verification(format!(
            "check rows are dependent: dimensions {} and {} instead of {expect_k}",
            c1.k(),
            c2.k()
        )));
    }
    if !is_subcode(&c2.dual(), &c1, true)? {
        return Err(Error::Verification(
            "the second code's dual is not properly contained in the first code".into(),
        ));
    }
    c1.set_claimed_distance(d);
    c2.set_claimed_distance(d);
    let qc = css_compose(c1, c2, budget)?;
    let pairs: Vec<(Vec<Elem>, Vec<Elem>)> = (0..u * (r + 1))
        .map(|j| {
            let i = j / (r + 1);
            (spec.check.row(i).to_vec(), spec2.check.row(i).to_vec())
        })
        .collect();
    finish_quantum(qc, r, pairs, u * r - 2 * (d - 2) - u, d)
}

/// Shared tail of the cyclic families: closure, dual-containment, repair
/// rows, the run and locality-aware distance pins, build, self-composition.
fn cyclic_quantum(
    q: u64,
    u: usize,
    r: usize,
    claimed_d: usize,
    seeds: &[usize],
    expect_k: usize,
    expect_kappa: usize,
    budget: &Budget,
) -> Result<QuantumFamilyBuild> {
    let field = FieldSpec::from_order(q)?;
    let n = u * (r + 1);
    let dset = defining_set_make(n, q, seeds)?;
    if dset.closure_enlarged() {
        return Err(Error::Verification(
            "the defining rows are not closed under the field action".into(),
        ));
    }
    if !is_dual_containing(&dset) {
        return Err(Error::Verification(
            "the defining set meets its own negation".into(),
        ));
    }
    if !cyclic_locality(&dset, u, r)? {
        return Err(Error::Verification(
            "the defining set misses a repair row".into(),
        ));
    }
    if bch_bound(&dset) != claimed_d {
        return Err(Error::Verification(format!(
            "the consecutive-run bound gives {} instead of the target distance {claimed_d}",
            bch_bound(&dset)
        )));
    }
    if singleton_like_bound(n, expect_k, r)? != claimed_d as i64 {
        return Err(Error::Verification(
            "the locality-aware upper bound does not pin the target distance".into(),
        ));
    }
    let cc = cyclic_code_build(&field, &dset)?;
    if cc.code.k() != expect_k {
        return Err(Error::Verification(format!(
            "expected dimension {expect_k}, built {}",
            cc.code.k()
        )));
    }
    let repair = block_repair_witnesses(&cc, u, r)?;
    let mut code = cc.code;
    code.set_claimed_distance(claimed_d);
    let qc = css_compose(code.clone(), code, budget)?;
    let pairs = repair
        .witnesses
        .iter()
        .map(|w| (w.word.clone(), w.word.clone()))
        .collect();
    finish_quantum(qc, r, pairs, expect_kappa, claimed_d)
}

/// Cyclic family with a tunable distance: defining set {i(r+1)+1} for the
/// repair rows joined with the run {1..ell}, giving the pure
/// [[u(r+1), u(r-1)-2(ell-1), ell+1]] code with locality r. Needs
/// u + 2 ell < r + 2 and u(r+1) dividing q-1.
pub fn cyclic_family_one(
    q: u64,
    u: usize,
    r: usize,
    ell: usize,
    budget: &Budget,
) -> Result<QuantumFamilyBuild> {
    if u < 1 || r < 1 || ell < 1 {
        return Err(Error::Param(
            "block count, locality, and run length must be positive".into(),
        ));
    }
    if u + 2 * ell >= r + 2 {
        return Err(Error::Guard(format!(
            "need u + 2 ell < r + 2, got {} against {}",
            u + 2 * ell,
            r + 2
        )));
    }
    let n = (u * (r + 1)) as u64;
    if q < 2 || (q - 1) % n != 0 {
        return Err(Error::Guard(format!(
            "code length {n} must divide q-1 = {}",
            q.saturating_sub(1)
        )));
    }
    let mut seeds: Vec<usize> = (0..u).map(|i| i * (r + 1) + 1).collect();
    seeds.extend(1..=ell);
    cyclic_quantum(
        q,
        u,
        r,
        ell + 1,
        &seeds,
        u * r - ell + 1,
        u * (r - 1) - 2 * (ell - 1),
        budget,
    )
}

/// Cyclic family at distance 3 for lengths that need not divide q-1: the
/// repair rows {i(r+1)+1} joined with the singleton class {y(r+1)+2} fixed
/// by multiplication by q, giving the pure [[u(r+1), u(r-1)-2, 3]] code
/// with locality r. Needs u + 2 < r, gcd(u, q) = 1, (r+1) | (q-1), and
/// gcd(u, q-1) dividing 2(q-1)/(r+1).
pub fn cyclic_family_two(q: u64, u: usize, r: usize, budget: &Budget) -> Result<QuantumFamilyBuild> {
    if u < 1 || r < 1 {
        return Err(Error::Param(
            "block count and locality must be positive".into(),
        ));
    }
    if u + 2 >= r {
        return Err(Error::Guard(format!(
            "need u + 2 < r, got {} against {r}",
            u + 2
        )));
    }
    if q < 2 {
        return Err(Error::Param("field order must be at least 2".into()));
    }
    if gcd(u as u64, q) != 1 {
        return Err(Error::Guard(
            "block count shares a factor with the field order".into(),
        ));
    }
    if (q - 1) % ((r + 1) as u64) != 0 {
        return Err(Error::Guard(format!(
            "r+1 = {} must divide q-1 = {}",
            r + 1,
            q - 1
        )));
    }
    if (2 * (q - 1) / (r + 1) as u64) % gcd(u as u64, q - 1) != 0 {
        return Err(Error::Guard(
            "gcd(u, q-1) must divide 2(q-1)/(r+1)".into(),
        ));
    }
    let n = u * (r + 1);
    let a_seeds: Vec<usize> = (0..u).map(|i| i * (r + 1) + 1).collect();
    let a_set = defining_set_make(n, q, &a_seeds)?;
    if a_set.closure_enlarged() {
        return Err(Error::Verification(
            "the repair rows are not closed under the field action".into(),
        ));
    }
    let y = (0..u).find(|&y| {
        let b = (y * (r + 1) + 2) as u64;
        (q * b) % n as u64 == b
    });
    let Some(y) = y else {
        return Err(Error::Verification(
            "no singleton class exists despite the divisibility guards".into(),
        ));
    };
    let mut seeds = a_seeds;
    seeds.push(y * (r + 1) + 2);
    cyclic_quantum(q, u, r, 3, &seeds, u * r - 1, u * (r - 1) - 2, budget)
}

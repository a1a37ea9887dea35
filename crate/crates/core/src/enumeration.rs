//! Exhaustive subspace enumeration and subspace counting.
//!
//! Every `k`-dimensional `X` with `A ⊆ X ⊆ B` is `A + Y` for a unique
//! `(k − dim A)`-dimensional subspace `Y` of the quotient `B/A`. Quotient
//! subspaces are generated by RREF pivot pattern over a complement basis of
//! `A` in `B`, then lifted and canonicalized.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::field::{Fe, FieldSpec};
use crate::geometry::{gram_matrix, symplectic_form, PsSpace, SubspaceType};
use crate::linalg::{rank, Subspace};

/// Default cap on the number of subspaces the Anzahl oracle may visit.
pub const DEFAULT_ORACLE_BUDGET: u64 = 10_000_000;

/// The sandwich `lower ⊆ X ⊆ upper`, `dim X = dim`, optionally restricted to a type.
#[derive(Clone, Debug)]
pub struct IntervalQuery {
    pub lower: Subspace,
    pub upper: Subspace,
    pub dim: usize,
    pub type_filter: Option<SubspaceType>,
}

impl IntervalQuery {
    pub fn new(lower: Subspace, upper: Subspace, dim: usize) -> Self {
        Self {
            lower,
            upper,
            dim,
            type_filter: None,
        }
    }

    pub fn with_type(mut self, ty: SubspaceType) -> Self {
        self.type_filter = Some(ty);
        self
    }

    fn validate(&self, f: &FieldSpec) -> Result<()> {
        if self.lower.ambient() != self.upper.ambient() {
            return Err(Error::DimensionMismatch {
                expected: self.lower.ambient(),
                found: self.upper.ambient(),
            });
        }
        if !self.lower.within(f, &self.upper) {
            return Err(Error::Invalid("interval lower bound is not inside the upper bound".into()));
        }
        if self.dim < self.lower.dim() || self.dim > self.upper.dim() {
            return Err(Error::Invalid(format!(
                "target dimension {} outside [{}, {}]",
                self.dim,
                self.lower.dim(),
                self.upper.dim()
            )));
        }
        Ok(())
    }
}

/// Rows completing `lower`'s basis to a basis of `upper`.
fn complement_basis(f: &FieldSpec, lower: &Subspace, upper: &Subspace) -> Vec<Vec<Fe>> {
    let mut current = lower.clone();
    let mut out = Vec::new();
    for r in upper.basis().row_iter() {
        if !current.contains_vector(f, r) {
            out.push(r.to_vec());
            let line = Subspace::from_vectors(f, upper.ambient(), &[r]).expect("row has ambient width");
            current = current.sum(f, &line).expect("same ambient");
        }
    }
    out
}

/// Every strictly increasing `k`-subset of `0..n`, in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        out.push(c.clone());
        let Some(i) = (0..k).rev().find(|&i| c[i] != i + n - k) else {
            break;
        };
        c[i] += 1;
        for j in i + 1..k {
            c[j] = c[j - 1] + 1;
        }
    }
    out
}

/// Enumeration plan for one interval: the lifting data plus the pivot patterns
/// of the quotient, each an independent unit of work.
struct Plan<'a> {
    f: &'a FieldSpec,
    lower: &'a Subspace,
    complement: Vec<Vec<Fe>>,
    k: usize,
    patterns: Vec<Vec<usize>>,
}

impl<'a> Plan<'a> {
    fn new(f: &'a FieldSpec, q: &'a IntervalQuery) -> Result<Self> {
        q.validate(f)?;
        let complement = complement_basis(f, &q.lower, &q.upper);
        let k = q.dim - q.lower.dim();
        let patterns = combinations(complement.len(), k);
        Ok(Self {
            f,
            lower: &q.lower,
            complement,
            k,
            patterns,
        })
    }

    /// Calls `visit` on every subspace belonging to one pivot pattern.
    fn visit_pattern(&self, pivots: &[usize], visit: &mut dyn FnMut(Subspace)) {
        let f = self.f;
        let d = self.complement.len();
        let n = self.lower.ambient();
        let free: Vec<(usize, usize)> = pivots
            .iter()
            .enumerate()
            .flat_map(|(i, &p)| {
                (p + 1..d)
                    .filter(|c| !pivots.contains(c))
                    .map(move |c| (i, c))
            })
            .collect();
        let q = f.order();
        let mut digits = vec![0u32; free.len()];
        loop {
            let mut coeffs = vec![vec![Fe::ZERO; d]; self.k];
            for (i, &p) in pivots.iter().enumerate() {
                coeffs[i][p] = Fe::ONE;
            }
            for (&(i, c), &v) in free.iter().zip(&digits) {
                coeffs[i][c] = Fe(v);
            }
            let mut rows: Vec<Vec<Fe>> = self.lower.basis().row_iter().map(<[Fe]>::to_vec).collect();
            for coef in &coeffs {
                let mut v = vec![Fe::ZERO; n];
                for (&c, comp) in coef.iter().zip(&self.complement) {
                    if c.is_zero() {
                        continue;
                    }
                    for (x, &b) in v.iter_mut().zip(comp) {
                        *x = f.add(*x, f.mul(c, b));
                    }
                }
                rows.push(v);
            }
            visit(Subspace::from_vectors(f, n, &rows).expect("rows have ambient width"));

            // mixed-radix increment
            let mut pos = 0;
            loop {
                if pos == digits.len() {
                    return;
                }
                digits[pos] += 1;
                if digits[pos] < q {
                    break;
                }
                digits[pos] = 0;
                pos += 1;
            }
        }
    }
}

/// Every `X` with `lower ⊆ X ⊆ upper` and `dim X = q.dim`, each exactly once,
/// sorted by canonical basis. Any `type_filter` on the query is ignored.
pub fn subspaces_between(f: &FieldSpec, q: &IntervalQuery, exec: Exec) -> Result<Vec<Subspace>> {
    collect_between(f, q, exec, |_| true)
}

/// The members of [`subspaces_between`] whose type equals `q.type_filter`.
pub fn subspaces_typed(space: &PsSpace, q: &IntervalQuery, exec: Exec) -> Result<Vec<Subspace>> {
    let want = q
        .type_filter
        .ok_or_else(|| Error::Invalid("typed enumeration needs a type filter".into()))?;
    if want.form_rank > q.dim || want.dim != q.dim {
        q.validate(space.field())?;
        return Ok(Vec::new());
    }
    if q.lower.ambient() != space.n() {
        return Err(Error::DimensionMismatch {
            expected: space.n(),
            found: q.lower.ambient(),
        });
    }
    collect_between(space.field(), q, exec, |x| {
        space.classify(x).map(|t| t == want).unwrap_or(false)
    })
}

fn collect_between<P>(f: &FieldSpec, q: &IntervalQuery, exec: Exec, keep: P) -> Result<Vec<Subspace>>
where
    P: Fn(&Subspace) -> bool + Sync + Send,
{
    let plan = Plan::new(f, q)?;
    let chunks = exec.map_slice(&plan.patterns, |pivots| {
        let mut out = Vec::new();
        plan.visit_pattern(pivots, &mut |x| {
            if keep(&x) {
                out.push(x)
            }
        });
        out
    });
    let mut all: Vec<Subspace> = chunks.into_iter().flatten().collect();
    all.sort_unstable();
    Ok(all)
}

/// Number of subspaces in the interval, without materializing them.
fn count_between<P>(f: &FieldSpec, q: &IntervalQuery, exec: Exec, keep: P) -> Result<u64>
where
    P: Fn(&Subspace) -> bool + Sync + Send,
{
    let plan = Plan::new(f, q)?;
    let counts = exec.map_slice(&plan.patterns, |pivots| {
        let mut c = 0u64;
        plan.visit_pattern(pivots, &mut |x| c += u64::from(keep(&x)));
        c
    });
    Ok(counts.into_iter().sum())
}

/// The Gaussian binomial `[n choose k]_q`; zero when `k > n`.
pub fn gaussian_binomial(n: usize, k: usize, q: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let q = BigUint::from(q);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        num *= q.pow((n - i) as u32) - 1u32;
        den *= q.pow((k - i) as u32) - 1u32;
    }
    num / den
}

/// Closed-form count of `m`-dimensional subspaces of Gram rank `2s` in the
/// `n_dim`-dimensional symplectic space over `f` (the Anzahl number
/// `N(m, s; n_dim)`):
///
/// `q^{2s(ν+s−m)} ∏_{i=ν+s−m+1}^{ν}(q^{2i}−1) / (∏_{i=1}^{s}(q^{2i}−1) ∏_{i=1}^{m−2s}(q^i−1))`
///
/// with `ν = n_dim/2`; zero unless `2s ≤ m ≤ ν + s`. Trust it only where
/// [`anzahl_gate`] has confirmed it against [`count_n_oracle`].
pub fn count_n(m: usize, s: usize, n_dim: usize, f: &FieldSpec) -> Result<BigUint> {
    let nu = half(n_dim)?;
    if 2 * s > m || m > nu + s {
        return Ok(BigUint::zero());
    }
    let q = BigUint::from(f.order());
    let mut num = q.pow((2 * s * (nu + s - m)) as u32);
    for i in (nu + s - m + 1)..=nu {
        num *= q.pow(2 * i as u32) - 1u32;
    }
    let mut den = BigUint::one();
    for i in 1..=s {
        den *= q.pow(2 * i as u32) - 1u32;
    }
    for i in 1..=(m - 2 * s) {
        den *= q.pow(i as u32) - 1u32;
    }
    if !(&num % &den).is_zero() {
        return Err(Error::Consistency(format!(
            "Anzahl quotient for ({m},{s};{n_dim}) is not integral"
        )));
    }
    Ok(num / den)
}

fn half(n_dim: usize) -> Result<usize> {
    if !n_dim.is_multiple_of(2) {
        return Err(Error::Invalid(format!(
            "symplectic space dimension must be even, got {n_dim}"
        )));
    }
    Ok(n_dim / 2)
}

/// Brute-force `N(m, s; n_dim)`: classify every `m`-dimensional subspace of
/// `F_q^{n_dim}` under the form `K`. Refuses to start when more than `budget`
/// subspaces would be visited.
pub fn count_n_oracle(
    m: usize,
    s: usize,
    n_dim: usize,
    f: &FieldSpec,
    budget: u64,
    exec: Exec,
) -> Result<BigUint> {
    let nu = half(n_dim)?;
    if m > n_dim {
        return Ok(BigUint::zero());
    }
    let total = gaussian_binomial(n_dim, m, f.order());
    if total > BigUint::from(budget) {
        return Err(Error::BudgetExceeded {
            required: total.to_string(),
            budget,
        });
    }
    let k = symplectic_form(nu);
    let q = IntervalQuery::new(Subspace::zero(n_dim), Subspace::full(n_dim), m);
    let c = count_between(f, &q, exec, |x| {
        gram_matrix(f, &k, x).map(|g| rank(f, &g) == 2 * s).unwrap_or(false)
    })?;
    Ok(BigUint::from(c))
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GateCase {
    pub q: u32,
    pub n: usize,
    pub m: usize,
    pub s: usize,
    #[serde(serialize_with = "crate::report::ser_display")]
    pub closed_form: BigUint,
    #[serde(serialize_with = "crate::report::ser_display")]
    pub oracle: BigUint,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GateReport {
    pub cases: Vec<GateCase>,
    /// `Σ_s N(m, s; n) = [n choose m]_q` for every `(q, n, m)` covered.
    pub partition_pass: bool,
    pub pass: bool,
}

/// The `(q exponent, n)` grid the closed form must reproduce before use.
pub const GATE_GRID: [(u32, usize); 5] = [(1, 2), (1, 4), (2, 2), (2, 4), (1, 6)];

/// Compares [`count_n`] with [`count_n_oracle`] on every `(m, s)` of the gate
/// grid, and checks that types partition each Grassmannian.
pub fn anzahl_gate(exec: Exec) -> Result<GateReport> {
    let mut cases = Vec::new();
    let mut partition_pass = true;
    for (e, n) in GATE_GRID {
        let f = FieldSpec::new(e)?;
        for m in 0..=n {
            let mut total = BigUint::zero();
            for s in 0..=m / 2 {
                let closed_form = count_n(m, s, n, &f)?;
                let oracle = count_n_oracle(m, s, n, &f, DEFAULT_ORACLE_BUDGET, exec)?;
                total += &closed_form;
                cases.push(GateCase {
                    q: f.order(),
                    n,
                    m,
                    s,
                    pass: closed_form == oracle,
                    closed_form,
                    oracle,
                });
            }
            partition_pass &= total == gaussian_binomial(n, m, f.order());
        }
    }
    let pass = partition_pass && cases.iter().all(|c| c.pass);
    Ok(GateReport {
        cases,
        partition_pass,
        pass,
    })
}

static GATE: OnceLock<std::result::Result<GateReport, String>> = OnceLock::new();

/// The gate report, computed once per process.
pub fn gate_report() -> Result<&'static GateReport> {
    GATE.get_or_init(|| anzahl_gate(Exec::default()).map_err(|e| e.to_string()))
        .as_ref()
        .map_err(|e| Error::Consistency(e.clone()))
}

fn ensure_gate() -> Result<()> {
    let r = gate_report()?;
    if r.pass {
        Ok(())
    } else {
        Err(Error::Consistency(format!(
            "closed-form Anzahl disagrees with the oracle on {} case(s)",
            r.cases.iter().filter(|c| !c.pass).count()
        )))
    }
}

/// `N(m, s; n_dim)` behind the oracle gate. Where the oracle fits in `budget`
/// it is also run on these exact arguments and must agree.
pub fn count_n_gated(
    m: usize,
    s: usize,
    n_dim: usize,
    f: &FieldSpec,
    budget: u64,
    exec: Exec,
) -> Result<BigUint> {
    ensure_gate()?;
    let closed = count_n(m, s, n_dim, f)?;
    match count_n_oracle(m, s, n_dim, f, budget, exec) {
        Ok(oracle) if oracle != closed => Err(Error::Consistency(format!(
            "N({m},{s};{n_dim}) over GF({}): closed form {closed}, oracle {oracle}",
            f.order()
        ))),
        Ok(_) | Err(Error::BudgetExceeded { .. }) => Ok(closed),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unit;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn gf(e: u32) -> FieldSpec {
        FieldSpec::new(e).unwrap()
    }

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn combinations_are_lexicographic() {
        assert_eq!(
            combinations(4, 2),
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert!(combinations(2, 3).is_empty());
    }

    #[test]
    fn trivial_interval() {
        let f = gf(1);
        let a = Subspace::from_vectors(&f, 4, &[unit(4, 0), unit(4, 2)]).unwrap();
        let got = subspaces_between(&f, &IntervalQuery::new(a.clone(), a.clone(), 2), Exec::Sequential).unwrap();
        assert_eq!(got, vec![a]);
    }

    #[test]
    fn small_grassmannians() {
        let f = gf(1);
        let lines = subspaces_between(&f, &IntervalQuery::new(Subspace::zero(2), Subspace::full(2), 1), Exec::Sequential)
            .unwrap();
        assert_eq!(lines.len(), 3);
        let planes = subspaces_between(&f, &IntervalQuery::new(Subspace::zero(4), Subspace::full(4), 2), Exec::Parallel)
            .unwrap();
        assert_eq!(planes.len(), 35);
        assert!(planes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn invalid_intervals() {
        let f = gf(1);
        let a = Subspace::from_vectors(&f, 3, &[unit(3, 0)]).unwrap();
        let b = Subspace::from_vectors(&f, 3, &[unit(3, 1)]).unwrap();
        let e = Exec::Sequential;
        assert!(subspaces_between(&f, &IntervalQuery::new(a.clone(), b.clone(), 1), e).is_err());
        assert!(subspaces_between(&f, &IntervalQuery::new(a.clone(), Subspace::full(3), 0), e).is_err());
        assert!(subspaces_between(&f, &IntervalQuery::new(a, Subspace::full(4), 2), e).is_err());
    }

    #[test]
    fn receiver_type_full_scan() {
        let sp = PsSpace::new(gf(1), 3, 2).unwrap();
        let ty = SubspaceType::new(2, 2, 0, 1).unwrap();
        let q = IntervalQuery::new(Subspace::zero(8), Subspace::full(8), 2).with_type(ty);
        assert_eq!(subspaces_typed(&sp, &q, Exec::Parallel).unwrap().len(), 64);
    }

    #[test]
    fn nonisotropic_lines_match_direct_scan() {
        let f = gf(1);
        let sp = PsSpace::new(f, 1, 2).unwrap();
        let form = sp.form();
        // oracle: every nonzero v in F_2^4 is its own line; keep v S vᵗ = 1, v ≠ e_3
        let mut expected = 0;
        for bits in 1u32..16 {
            let v: Vec<u32> = (0..4).map(|i| (bits >> i) & 1).collect();
            let mut qv = 0;
            for i in 0..4 {
                for j in 0..4 {
                    qv ^= v[i] & v[j] & form.get(i, j).bits();
                }
            }
            if qv == 1 && v != [0, 0, 1, 0] {
                expected += 1;
            }
        }
        let ty = SubspaceType::new(1, 1, 0, 0).unwrap();
        let q = IntervalQuery::new(Subspace::zero(4), Subspace::full(4), 1).with_type(ty);
        let got = subspaces_typed(&sp, &q, Exec::Sequential).unwrap();
        assert_eq!(got.len(), expected);
        assert_eq!(expected, 8);
    }

    #[test]
    fn infeasible_type_is_empty() {
        let sp = PsSpace::new(gf(1), 2, 2).unwrap();
        let ty = SubspaceType::new(3, 3, 1, 0).unwrap();
        let q = IntervalQuery::new(Subspace::zero(6), Subspace::full(6), 2).with_type(ty);
        assert!(subspaces_typed(&sp, &q, Exec::Sequential).unwrap().is_empty());
        let untyped = IntervalQuery::new(Subspace::zero(6), Subspace::full(6), 2);
        assert!(subspaces_typed(&sp, &untyped, Exec::Sequential).is_err());
    }

    #[test]
    fn gaussian_binomial_values() {
        for n in 0..6 {
            assert_eq!(gaussian_binomial(n, 0, 3), big(1));
        }
        assert_eq!(gaussian_binomial(2, 1, 2), big(3));
        assert_eq!(gaussian_binomial(4, 2, 2), big(35));
        assert_eq!(gaussian_binomial(2, 3, 2), big(0));
    }

    #[test]
    fn anzahl_examples() {
        for e in [1, 2, 3] {
            assert_eq!(count_n(2, 1, 2, &gf(e)).unwrap(), big(1));
            assert_eq!(count_n_oracle(2, 1, 2, &gf(e), 1000, Exec::Sequential).unwrap(), big(1));
        }
        let f = gf(1);
        assert_eq!(count_n(1, 0, 2, &f).unwrap(), big(3));
        assert_eq!(count_n(2, 1, 4, &f).unwrap(), big(20));
        assert_eq!(count_n_oracle(2, 0, 4, &f, 1000, Exec::Sequential).unwrap(), big(15));
        assert_eq!(count_n_oracle(2, 1, 4, &f, 1000, Exec::Parallel).unwrap(), big(20));
        assert!(matches!(count_n(1, 0, 3, &f), Err(Error::Invalid(_))));
        assert!(matches!(
            count_n_oracle(1, 0, 3, &f, 1000, Exec::Sequential),
            Err(Error::Invalid(_))
        ));
        match count_n_oracle(2, 1, 4, &f, 10, Exec::Sequential) {
            Err(Error::BudgetExceeded { required, budget }) => {
                assert_eq!(required, "35");
                assert_eq!(budget, 10);
            }
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn gate_passes() {
        let report = anzahl_gate(Exec::Parallel).unwrap();
        assert!(report.partition_pass);
        for c in &report.cases {
            assert!(c.pass, "{c:?}");
        }
        assert_eq!(count_n_gated(4, 2, 4, &gf(1), 1000, Exec::Sequential).unwrap(), big(1));
    }

    fn random_query(f: &FieldSpec, rng: &mut ChaCha8Rng, n: usize) -> IntervalQuery {
        let q = f.order();
        let rand_vec = |rng: &mut ChaCha8Rng| -> Vec<Fe> { (0..n).map(|_| Fe(rng.gen_range(0..q))).collect() };
        let ub: Vec<Vec<Fe>> = (0..rng.gen_range(0..=n)).map(|_| rand_vec(rng)).collect();
        let upper = Subspace::from_vectors(f, n, &ub).unwrap();
        // lower: random combinations of upper's basis
        let lb: Vec<Vec<Fe>> = (0..rng.gen_range(0..=upper.dim()))
            .map(|_| {
                let mut v = vec![Fe::ZERO; n];
                for r in upper.basis().row_iter() {
                    let c = Fe(rng.gen_range(0..q));
                    for (x, &b) in v.iter_mut().zip(r) {
                        *x = f.add(*x, f.mul(c, b));
                    }
                }
                v
            })
            .collect();
        let lower = Subspace::from_vectors(f, n, &lb).unwrap();
        let dim = rng.gen_range(lower.dim()..=upper.dim());
        IntervalQuery::new(lower, upper, dim)
    }

    #[test]
    fn interval_sizes_are_gaussian_binomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for (e, n) in [(1, 6), (1, 8), (2, 4), (2, 6)] {
            let f = gf(e);
            for _ in 0..50 {
                let q = random_query(&f, &mut rng, n);
                let got = subspaces_between(&f, &q, Exec::Parallel).unwrap();
                let expected = gaussian_binomial(q.upper.dim() - q.lower.dim(), q.dim - q.lower.dim(), f.order());
                assert_eq!(BigUint::from(got.len()), expected);
                let unique: HashSet<&Subspace> = got.iter().collect();
                assert_eq!(unique.len(), got.len());
                for x in &got {
                    assert_eq!(x.dim(), q.dim);
                    assert!(q.lower.is_subset_of(&f, x).unwrap());
                    assert!(x.is_subset_of(&f, &q.upper).unwrap());
                }
            }
        }
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let f = gf(2);
        let q = IntervalQuery::new(Subspace::zero(4), Subspace::full(4), 2);
        assert_eq!(
            subspaces_between(&f, &q, Exec::Sequential).unwrap(),
            subspaces_between(&f, &q, Exec::Parallel).unwrap()
        );
    }
}

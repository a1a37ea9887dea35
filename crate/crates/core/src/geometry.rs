//! Pseudo-symplectic structure on F_q^(2ν+δ), q even.
//!
//! The form matrix is `S_δ = diag(K, T_δ)` with `K = [[0, I_ν], [I_ν, 0]]`,
//! `T_1 = [1]` and `T_2 = [[0, 1], [1, 1]]`. Documentation counts coordinates
//! from 1 (so `e_{2ν+1}` is the first coordinate after the hyperbolic block);
//! storage is 0-indexed.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Fe, FieldSpec};
use crate::linalg::{null_space, rank, unit, Mat, Subspace};

/// The classification tuple `(m, 2s+τ, s, ε)` of a subspace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SubspaceType {
    pub dim: usize,
    pub form_rank: usize,
    pub s_index: usize,
    pub tau: usize,
    pub eps: u8,
}

impl SubspaceType {
    /// Type `(m, form_rank, s, ε)` as the four-tuple is usually written; τ is
    /// recovered as `form_rank − 2s`.
    pub fn new(dim: usize, form_rank: usize, s_index: usize, eps: u8) -> Result<Self> {
        let tau = form_rank
            .checked_sub(2 * s_index)
            .filter(|t| *t <= 2)
            .ok_or_else(|| {
                Error::Invalid(format!(
                    "form rank {form_rank} is not 2s+τ with s={s_index}, τ∈{{0,1,2}}"
                ))
            })?;
        if form_rank > dim || eps > 1 {
            return Err(Error::Invalid(format!(
                "type ({dim},{form_rank},{s_index},{eps}) is malformed"
            )));
        }
        Ok(Self {
            dim,
            form_rank,
            s_index,
            tau,
            eps,
        })
    }
}

impl fmt::Display for SubspaceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{},{})",
            self.dim, self.form_rank, self.s_index, self.eps
        )
    }
}

/// F_q^(2ν+δ) together with the form `S_δ`.
#[derive(Clone, Debug)]
pub struct PsSpace {
    field: FieldSpec,
    nu: usize,
    delta: usize,
    form: Mat,
}

impl PsSpace {
    pub fn new(field: FieldSpec, nu: usize, delta: usize) -> Result<Self> {
        if nu == 0 {
            return Err(Error::Invalid("nu must be at least 1".into()));
        }
        if !(1..=2).contains(&delta) {
            return Err(Error::Invalid(format!("delta must be 1 or 2, got {delta}")));
        }
        let n = 2 * nu + delta;
        let mut form = Mat::zeros(n, n);
        for i in 0..nu {
            form.set(i, nu + i, Fe::ONE);
            form.set(nu + i, i, Fe::ONE);
        }
        if delta == 1 {
            form.set(2 * nu, 2 * nu, Fe::ONE);
        } else {
            form.set(2 * nu, 2 * nu + 1, Fe::ONE);
            form.set(2 * nu + 1, 2 * nu, Fe::ONE);
            form.set(2 * nu + 1, 2 * nu + 1, Fe::ONE);
        }
        Ok(Self {
            field,
            nu,
            delta,
            form,
        })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    /// Ambient dimension 2ν+δ.
    pub fn n(&self) -> usize {
        2 * self.nu + self.delta
    }

    pub fn form(&self) -> &Mat {
        &self.form
    }

    /// `e_i` with 1-based `i`.
    pub fn e(&self, i: usize) -> Vec<Fe> {
        unit(self.n(), i - 1)
    }

    /// The distinguished vector `e_{2ν+1}` whose membership is ε.
    pub fn distinguished(&self) -> Vec<Fe> {
        self.e(2 * self.nu + 1)
    }

    fn check(&self, p: &Subspace) -> Result<()> {
        if p.ambient() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: p.ambient(),
            });
        }
        Ok(())
    }

    /// `B · S_δ · Bᵗ` for the canonical basis `B` of `p`.
    pub fn gram(&self, p: &Subspace) -> Result<Mat> {
        self.check(p)?;
        gram_matrix(&self.field, &self.form, p)
    }

    pub fn classify(&self, p: &Subspace) -> Result<SubspaceType> {
        let g = self.gram(p)?;
        let eps = u8::from(p.contains_vector(&self.field, &self.distinguished()));
        classify_gram(&self.field, &g, eps)
    }

    /// `{y : y S_δ xᵗ = 0 for all x ∈ p}`.
    pub fn perp(&self, p: &Subspace) -> Result<Subspace> {
        self.check(p)?;
        // y S Bᵗ = 0  <=>  (B S) yᵗ = 0 since S is symmetric.
        let bs = p.basis().mul(&self.field, &self.form)?;
        Subspace::span(&self.field, self.n(), &null_space(&self.field, &bs))
    }
}

/// The alternate form `K = [[0, I_ν], [I_ν, 0]]` of the 2ν-dimensional
/// symplectic space.
pub fn symplectic_form(nu: usize) -> Mat {
    let mut k = Mat::zeros(2 * nu, 2 * nu);
    for i in 0..nu {
        k.set(i, nu + i, Fe::ONE);
        k.set(nu + i, i, Fe::ONE);
    }
    k
}

pub fn gram_matrix(f: &FieldSpec, form: &Mat, p: &Subspace) -> Result<Mat> {
    let b = p.basis();
    b.mul(f, form)?.mul(f, &b.transpose())
}

/// Normal-form class of a symmetric Gram matrix in characteristic 2: an
/// alternate matrix (zero diagonal) has even rank 2s; otherwise odd rank is
/// `2s+1` and even rank is `2s+2`.
pub fn classify_gram(f: &FieldSpec, g: &Mat, eps: u8) -> Result<SubspaceType> {
    let m = g.rows();
    let r = rank(f, g);
    let alternate = (0..m).all(|i| g.get(i, i).is_zero());
    let (s_index, tau) = if alternate {
        if r % 2 == 1 {
            return Err(Error::Consistency(format!(
                "alternate Gram matrix with odd rank {r}"
            )));
        }
        (r / 2, 0)
    } else if r % 2 == 1 {
        ((r - 1) / 2, 1)
    } else {
        ((r - 2) / 2, 2)
    };
    Ok(SubspaceType {
        dim: m,
        form_rank: r,
        s_index,
        tau,
        eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn space(e: u32, nu: usize, delta: usize) -> PsSpace {
        PsSpace::new(FieldSpec::new(e).unwrap(), nu, delta).unwrap()
    }

    fn span(sp: &PsSpace, rows: &[Vec<Fe>]) -> Subspace {
        Subspace::from_vectors(sp.field(), sp.n(), rows).unwrap()
    }

    fn bits(m: &Mat) -> Vec<Vec<u32>> {
        m.row_iter().map(|r| r.iter().map(|x| x.bits()).collect()).collect()
    }

    #[test]
    fn forms_match_displayed_matrices() {
        let s2 = space(1, 1, 2);
        assert_eq!(
            bits(s2.form()),
            vec![
                vec![0, 1, 0, 0],
                vec![1, 0, 0, 0],
                vec![0, 0, 0, 1],
                vec![0, 0, 1, 1]
            ]
        );
        let s1 = space(1, 1, 1);
        assert_eq!(
            bits(s1.form()),
            vec![vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]]
        );
        for (nu, delta) in [(1, 1), (2, 2), (3, 1), (3, 2)] {
            let sp = space(2, nu, delta);
            assert!(sp.form().is_symmetric());
            assert_eq!(rank(sp.field(), sp.form()), sp.n());
            assert!((0..sp.n()).any(|i| !sp.form().get(i, i).is_zero()));
        }
        assert!(PsSpace::new(FieldSpec::new(1).unwrap(), 2, 3).is_err());
        assert!(PsSpace::new(FieldSpec::new(1).unwrap(), 0, 2).is_err());
    }

    #[test]
    fn gram_examples() {
        let sp = space(1, 3, 2);
        assert_eq!(bits(&sp.gram(&span(&sp, &[sp.e(7)])).unwrap()), vec![vec![0]]);
        assert_eq!(bits(&sp.gram(&span(&sp, &[sp.e(8)])).unwrap()), vec![vec![1]]);
        assert_eq!(
            bits(&sp.gram(&span(&sp, &[sp.e(1), sp.e(4)])).unwrap()),
            vec![vec![0, 1], vec![1, 0]]
        );
        assert!(sp.gram(&Subspace::zero(7)).is_err());
    }

    #[test]
    fn classify_examples() {
        let sp = space(1, 3, 2);
        let t = |m, r, s, e| SubspaceType::new(m, r, s, e).unwrap();
        assert_eq!(sp.classify(&span(&sp, &[sp.e(7)])).unwrap(), t(1, 0, 0, 1));
        // e_1; e_7; (0,0,0,1,0,0,0,0); (0,0,0,0,0,0,0,1): all free blocks zero
        let et = span(&sp, &[sp.e(1), sp.e(7), sp.e(4), sp.e(8)]);
        let ty = sp.classify(&et).unwrap();
        assert_eq!(ty, t(4, 4, 1, 1));
        assert_eq!(ty.tau, 2);
        let hyp = sp.classify(&span(&sp, &[sp.e(1), sp.e(4)])).unwrap();
        assert_eq!(hyp, t(2, 2, 1, 0));
        assert_eq!(hyp.tau, 0);
        assert_eq!(
            sp.classify(&Subspace::full(8)).unwrap(),
            t(8, 8, 3, 1)
        );
    }

    #[test]
    fn odd_rank_normal_form() {
        let sp = space(1, 2, 1);
        let ty = sp.classify(&span(&sp, &[sp.e(5)])).unwrap();
        assert_eq!((ty.form_rank, ty.s_index, ty.tau, ty.eps), (1, 0, 1, 1));
    }

    #[test]
    fn perp_examples() {
        let sp = space(1, 2, 2);
        assert_eq!(sp.perp(&Subspace::full(6)).unwrap(), Subspace::zero(6));
        let p = span(&sp, &[sp.e(1), sp.e(5)]);
        let expected = span(&sp, &[sp.e(1), sp.e(2), sp.e(4), sp.e(5)]);
        assert_eq!(sp.perp(&p).unwrap(), expected);
    }

    #[test]
    fn perp_dimension_and_involution() {
        let sp = space(1, 3, 2);
        let f = *sp.field();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let k = rng.gen_range(0..=8);
            let rows: Vec<Vec<Fe>> = (0..k)
                .map(|_| (0..8).map(|_| Fe(rng.gen_range(0..2))).collect())
                .collect();
            let p = Subspace::from_vectors(&f, 8, &rows).unwrap();
            let pp = sp.perp(&p).unwrap();
            assert_eq!(pp.dim(), 8 - p.dim());
            assert_eq!(sp.perp(&pp).unwrap(), p);
            // order reversal against a random superspace
            let extra: Vec<Fe> = (0..8).map(|_| Fe(rng.gen_range(0..2))).collect();
            let r = p.sum(&f, &span(&sp, &[extra])).unwrap();
            assert!(sp.perp(&r).unwrap().is_subset_of(&f, &pp).unwrap());
        }
    }

    #[test]
    fn malformed_types_rejected() {
        assert!(SubspaceType::new(2, 3, 0, 1).is_err());
        assert!(SubspaceType::new(2, 2, 2, 1).is_err());
        assert!(SubspaceType::new(1, 2, 1, 0).is_err());
        assert!(SubspaceType::new(2, 2, 1, 2).is_err());
    }
}

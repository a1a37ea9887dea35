#![allow(dead_code)]

use psauth::code::{build_code, validate_params, CodeInstance, CodeParams};
use psauth::linalg::rank;
use psauth::{Exec, Fe, FieldSpec, Mat, Subspace};
use rand::Rng;

pub fn params(e: u32, nu: usize, s: usize, m0: usize, s0: usize) -> CodeParams {
    CodeParams::new(FieldSpec::new(e).unwrap(), nu, s, m0, s0)
}

pub fn build(e: u32, nu: usize, s: usize, m0: usize, s0: usize, exec: Exec) -> CodeInstance {
    build_code(&validate_params(params(e, nu, s, m0, s0)).unwrap(), exec).unwrap()
}

pub fn ps_b() -> CodeInstance {
    build(1, 3, 2, 6, 2, Exec::default())
}

pub fn ps_a() -> CodeInstance {
    build(1, 2, 2, 4, 1, Exec::default())
}

pub fn random_mat(f: &FieldSpec, rows: usize, cols: usize, rng: &mut impl Rng) -> Mat {
    let data = (0..rows * cols).map(|_| Fe(rng.gen_range(0..f.order()))).collect();
    Mat::new(rows, cols, data).unwrap()
}

pub fn random_invertible(f: &FieldSpec, n: usize, rng: &mut impl Rng) -> Mat {
    loop {
        let t = random_mat(f, n, n, rng);
        if rank(f, &t) == n {
            return t;
        }
    }
}

/// Span of `rows` random vectors; the dimension may come out smaller.
pub fn random_subspace(f: &FieldSpec, n: usize, rows: usize, rng: &mut impl Rng) -> Subspace {
    Subspace::span(f, n, &random_mat(f, rows, n, rng)).unwrap()
}

//! Independent test oracle: plain nested-vector complex algebra, written
//! without any of the crate's matrix types or evolution paths.
#![allow(dead_code)]

use num_complex::Complex64 as C;

pub type M = Vec<Vec<C>>;

pub fn local(theta: f64, phi: f64, alpha: f64) -> M {
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    let i = C::new(0.0, 1.0);
    vec![
        vec![(i * phi).exp() * c, i * (i * alpha).exp() * s],
        vec![i * (-i * alpha).exp() * s, (-i * phi).exp() * c],
    ]
}

pub fn kron(a: &M, b: &M) -> M {
    let (n, m) = (a.len(), b.len());
    let mut out = vec![vec![C::new(0.0, 0.0); n * m]; n * m];
    for r in 0..n * m {
        for c in 0..n * m {
            out[r][c] = a[r / m][c / m] * b[r % m][c % m];
        }
    }
    out
}

pub fn matmul(a: &M, b: &M) -> M {
    let n = a.len();
    (0..n)
        .map(|r| {
            (0..n)
                .map(|c| (0..n).map(|k| a[r][k] * b[k][c]).sum())
                .collect()
        })
        .collect()
}

pub fn dagger(a: &M) -> M {
    let n = a.len();
    (0..n)
        .map(|r| (0..n).map(|c| a[c][r].conj()).collect())
        .collect()
}

/// `cos(γ/2) I⊗I + i sin(γ/2) σx⊗σx`, built from its definition.
pub fn entangler(gamma: f64) -> M {
    let one = C::new(1.0, 0.0);
    let zero = C::new(0.0, 0.0);
    let id = vec![vec![one, zero], vec![zero, one]];
    let sx = vec![vec![zero, one], vec![one, zero]];
    let ii = kron(&id, &id);
    let xx = kron(&sx, &sx);
    let (s, c) = (gamma / 2.0).sin_cos();
    (0..4)
        .map(|r| {
            (0..4)
                .map(|k| ii[r][k] * c + xx[r][k] * C::new(0.0, s))
                .collect()
        })
        .collect()
}

pub fn delta_of_ops(a: &M, b: &M, gamma: f64) -> [f64; 4] {
    let j = entangler(gamma);
    let op = matmul(&dagger(&j), &matmul(&kron(a, b), &j));
    std::array::from_fn(|r| op[r][0].norm_sqr())
}

pub fn delta(s1: (f64, f64), s2: (f64, f64), gamma: f64) -> [f64; 4] {
    delta_of_ops(&local(s1.0, s1.1, 0.0), &local(s2.0, s2.1, 0.0), gamma)
}

pub fn max_diff(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Expected payoffs under canonical-layout cells `[CC, CD, DC, DD]`.
pub fn expect(delta: &[f64; 4], u1: [f64; 4], u2: [f64; 4]) -> (f64, f64) {
    (
        (0..4).map(|k| delta[k] * u1[k]).sum(),
        (0..4).map(|k| delta[k] * u2[k]).sum(),
    )
}

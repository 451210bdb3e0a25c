//! The latent transform checked against a hand-rolled Gauss-Jordan inverse
//! that shares no code with the library.

use linmvn::transform::build_transform;
use linmvn::{fixtures, linalg, Matrix, ProblemSpec, Vector};
use proptest::prelude::*;

/// Inverse of a small dense matrix by Gauss-Jordan elimination with partial
/// pivoting, on plain nested vectors.
fn gauss_jordan_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut aug: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| aug[x][col].abs().total_cmp(&aug[y][col].abs()))
            .unwrap();
        aug.swap(col, pivot);
        let p = aug[col][col];
        assert!(p.abs() > 1e-12, "singular matrix in oracle");
        for v in aug[col].iter_mut() {
            *v /= p;
        }
        let pivot_row = aug[col].clone();
        for (row, values) in aug.iter_mut().enumerate() {
            if row != col {
                let factor = values[col];
                for (v, p) in values.iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
            }
        }
    }
    aug.into_iter().map(|r| r[n..].to_vec()).collect()
}

fn mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let inner = b.len();
    let cols = b[0].len();
    a.iter()
        .map(|row| (0..cols).map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum()).collect())
        .collect()
}

fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// `(E, F, g)` from the textbook formulas.
fn oracle(spec: &ProblemSpec) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>) {
    let n = spec.dim();
    let s = rows(spec.sigma());
    let c = rows(spec.c());
    let ct = transpose(&c);
    let gram = mul(&mul(&c, &s), &ct);
    let e = mul(&mul(&s, &ct), &gauss_jordan_inverse(&gram));
    let ec = mul(&e, &c);
    let f: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j)) - ec[i][j]).collect())
        .collect();
    let mu = spec.mu();
    let d = spec.d();
    let g = (0..n)
        .map(|i| {
            let fmu: f64 = (0..n).map(|j| f[i][j] * mu[j]).sum();
            let ed: f64 = (0..d.len()).map(|j| e[i][j] * d[j]).sum();
            fmu - ed
        })
        .collect();
    (e, f, g)
}

fn max_gap(a: &Matrix, b: &[Vec<f64>]) -> f64 {
    let mut gap = 0.0f64;
    for (i, row) in b.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            gap = gap.max((a[(i, j)] - v).abs());
        }
    }
    gap
}

#[test]
fn pentagon_transform_matches_gauss_jordan() {
    let spec = fixtures::pentagon_combined();
    let t = build_transform(&spec).unwrap();
    let (e, f, g) = oracle(&spec);
    assert!(max_gap(t.e.as_ref().unwrap(), &e) < 1e-10);
    assert!(max_gap(&t.f, &f) < 1e-10);
    for (i, gi) in g.iter().enumerate() {
        assert!((t.g[i] - gi).abs() < 1e-10);
    }
    // H = A F and k = A g + b.
    let h = spec.a() * &t.f;
    let k = spec.a() * &t.g + spec.b();
    assert!(linalg::max_abs(&(&t.h - h)) < 1e-10);
    assert!((&t.k - k).amax() < 1e-10);
}

/// A random well-conditioned problem: `Sigma = B B^T + I`, full-row-rank `C`.
fn problem() -> impl Strategy<Value = ProblemSpec> {
    (2usize..6)
        .prop_flat_map(|n| (Just(n), 1..n))
        .prop_flat_map(|(n, p)| {
            (
                prop::collection::vec(-2.0f64..2.0, n),
                prop::collection::vec(-1.0f64..1.0, n * n),
                prop::collection::vec(-1.0f64..1.0, p * n),
                prop::collection::vec(-3.0f64..3.0, p),
                Just((n, p)),
            )
        })
        .prop_filter_map("equality rows must be well conditioned", |(mu, b, c, d, (n, p))| {
            let b = Matrix::from_row_slice(n, n, &b);
            let sigma = &b * b.transpose() + Matrix::identity(n, n);
            let c = Matrix::from_row_slice(p, n, &c);
            let sv = c.clone().svd(false, false).singular_values;
            if sv.min() < 0.1 {
                return None;
            }
            ProblemSpec::with_equalities(Vector::from_vec(mu), sigma, c, Vector::from_vec(d)).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_transforms_match_gauss_jordan(spec in problem()) {
        let t = build_transform(&spec).unwrap();
        let (_, f, g) = oracle(&spec);
        prop_assert!(max_gap(&t.f, &f) < 1e-8);
        for (i, gi) in g.iter().enumerate() {
            prop_assert!((t.g[i] - gi).abs() < 1e-8);
        }
    }

    #[test]
    fn every_latent_point_lands_on_the_plane(spec in problem(), y in prop::collection::vec(-5.0f64..5.0, 6)) {
        let t = build_transform(&spec).unwrap();
        let y = Vector::from_column_slice(&y[..spec.dim()]);
        let x = t.map_latent(&y);
        prop_assert!(spec.equality_residual(x.as_slice()) < 1e-8);
        prop_assert!(linalg::max_abs(&(&t.f * &t.f - &t.f)) < 1e-8);
    }
}

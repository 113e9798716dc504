//! Small dense helpers shared by the numerical modules.
//!
//! Complex vectors are identified with real vectors by interleaving
//! `(re, im)` pairs; under this identification the real inner product is
//! `Re Σ conj(a)·b`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn realify(v: &[C64]) -> Vec<f64> {
    v.iter().flat_map(|c| [c.re, c.im]).collect()
}

pub fn complexify(v: &[f64]) -> Vec<C64> {
    assert!(v.len() % 2 == 0, "odd real length");
    v.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect()
}

/// Real inner product `Re Σ conj(a_j) b_j`.
pub fn real_dot(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn cnorm(a: &[C64]) -> f64 {
    a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Orthonormalizes `vectors` in order by modified Gram-Schmidt with one
/// reorthogonalization pass, dropping vectors whose remainder falls below
/// `tol` times their original norm.
pub fn orthonormalize(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let scale = norm(v);
        if scale == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let n = norm(&w);
        if n > tol * scale {
            w.iter_mut().for_each(|x| *x /= n);
            basis.push(w);
        }
    }
    basis
}

/// Orthonormal basis of the orthogonal complement of an orthonormal set in `R^dim`.
///
/// Extends greedily by the standard basis vector with the largest remainder.
pub fn complement(orthonormal: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let mut all = orthonormal.to_vec();
    let start = all.len();
    while all.len() < dim {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for i in 0..dim {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            let w = reject(&e, &all);
            let n = norm(&w);
            if best.as_ref().is_none_or(|(bn, _)| n > *bn) {
                best = Some((n, w));
            }
        }
        let (_, w) = best.expect("dim > 0");
        let mut w = reject(&w, &all);
        let n = norm(&w);
        w.iter_mut().for_each(|x| *x /= n);
        all.push(w);
    }
    all.split_off(start)
}

/// Singular values of the matrix whose rows are `rows`, in decreasing order.
pub fn singular_values(rows: &[Vec<f64>]) -> Vec<f64> {
    if rows.is_empty() {
        return vec![];
    }
    let cols = rows[0].len();
    let m = DMatrix::from_fn(rows.len(), cols, |r, c| rows[r][c]);
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `rel_tol` times the largest.
pub fn numerical_rank(rows: &[Vec<f64>], rel_tol: f64) -> usize {
    let s = singular_values(rows);
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&x| x > rel_tol * top).count(),
        _ => 0,
    }
}

/// `v` minus its orthogonal projection onto the span of an orthonormal set.
pub fn reject(v: &[f64], orthonormal: &[Vec<f64>]) -> Vec<f64> {
    let mut w = v.to_vec();
    for b in orthonormal {
        let c = dot(b, &w);
        w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
    }
    w
}

/// Distance from `v` to the span of an orthonormal set.
pub fn distance_to_span(v: &[f64], orthonormal: &[Vec<f64>]) -> f64 {
    norm(&reject(v, orthonormal))
}

/// Column-wise Gram-Schmidt over C, with reorthogonalization.
pub fn orthonormalize_columns(m: &DMatrix<C64>) -> DMatrix<C64> {
    let mut q = m.clone();
    for j in 0..q.ncols() {
        for _ in 0..2 {
            for p in 0..j {
                let c = q.column(p).dotc(&q.column(j));
                let col_p = q.column(p).clone_owned();
                let mut col_j = q.column_mut(j);
                col_j -= col_p * c;
            }
        }
        let n = q.column(j).norm();
        assert!(n > 1e-12, "degenerate frame");
        q.column_mut(j).unscale_mut(n);
    }
    q
}

pub fn complex_gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    })
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// Random skew-Hermitian matrix with Gaussian entries.
pub fn random_skew_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<C64> {
    let g = complex_gaussian_matrix(rng, n, n);
    (&g - g.adjoint()) * C64::new(0.5, 0.0)
}

/// Random unitary from the QR of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<C64> {
    orthonormalize_columns(&complex_gaussian_matrix(rng, n, n))
}

pub fn max_abs_entry(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn realify_round_trip() {
        let v = vec![C64::new(1.0, 2.0), C64::new(-3.0, 0.5)];
        assert_eq!(realify(&v), vec![1.0, 2.0, -3.0, 0.5]);
        assert_eq!(complexify(&realify(&v)), v);
        assert_eq!(real_dot(&v, &v), dot(&realify(&v), &realify(&v)));
    }

    #[test]
    fn complement_is_orthonormal_and_complete() {
        let rows = orthonormalize(&[vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0, 0.0]], 1e-10);
        let comp = complement(&rows, 4);
        assert_eq!(comp.len(), 2);
        let all: Vec<_> = rows.iter().chain(&comp).cloned().collect();
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot(a, b) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn orthonormalize_drops_dependent() {
        let b = orthonormalize(&[vec![1.0, 0.0], vec![2.0, 0.0], vec![1.0, 1.0]], 1e-10);
        assert_eq!(b.len(), 2);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(&mut rng, 4);
        let e = u.adjoint() * &u - DMatrix::<C64>::identity(4, 4);
        assert!(max_abs_entry(&e) < 1e-13);
    }

    #[test]
    fn rank_of_dependent_rows() {
        let rows = vec![vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0], vec![0.0, 1.0, 0.0]];
        assert_eq!(numerical_rank(&rows, 1e-10), 2);
    }
}

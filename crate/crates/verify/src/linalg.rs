//! Small dense complex helpers. Everything here works on matrices of side ≤ 32.

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

/// Eigenvalues below this are treated as zero when inverting.
pub const PINV_THRESHOLD: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_all(ms: &[CMat]) -> CMat {
    ms.iter().skip(1).fold(ms[0].clone(), |acc, m| acc.kronecker(m))
}

pub fn pauli(s: u8) -> CMat {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    let entries = match s {
        0 => [o, z, z, o],
        1 => [z, o, o, z],
        2 => [z, -i, i, z],
        3 => [o, z, z, -o],
        _ => panic!("Pauli index {s} out of range"),
    };
    CMat::from_row_slice(2, 2, &entries)
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().sum()
}

/// Largest entry of `m − m†` in modulus.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigen-decomposition of a Hermitian matrix after symmetrizing away rounding.
pub fn herm_eigen(m: &CMat) -> (DVector<f64>, CMat) {
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let e = h.symmetric_eigen();
    (e.eigenvalues, e.eigenvectors)
}

pub fn herm_eigenvalues(m: &CMat) -> Vec<f64> {
    herm_eigen(m).0.iter().copied().collect()
}

/// `f` applied to the spectrum of a Hermitian matrix.
pub fn herm_fn(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = herm_eigen(m);
    let d = CMat::from_diagonal(&vals.map(|v| c(f(v), 0.0)));
    &vecs * d * vecs.adjoint()
}

/// Eigenvalues within this multiple of machine epsilon (relative to the largest)
/// are rounding noise; the square root would inflate them to ~1e-8.
const SQRT_NOISE: f64 = 64.0 * f64::EPSILON;

pub fn psd_sqrt(m: &CMat) -> CMat {
    let (vals, vecs) = herm_eigen(m);
    let floor = SQRT_NOISE * vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let d = CMat::from_diagonal(&vals.map(|v| c(if v > floor { v.sqrt() } else { 0.0 }, 0.0)));
    &vecs * d * vecs.adjoint()
}

/// `m^{-1/2}` on the support, eigenvalues ≤ [`PINV_THRESHOLD`] mapped to zero.
pub fn pinv_sqrt(m: &CMat) -> CMat {
    herm_fn(m, |v| if v > PINV_THRESHOLD { 1.0 / v.sqrt() } else { 0.0 })
}

/// Shannon entropy in bits of a spectrum, with `0 log 0 = 0` and tiny negatives clipped.
pub fn spectrum_entropy(vals: &[f64]) -> f64 {
    vals.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.log2())
        .sum()
}

pub fn von_neumann(m: &CMat) -> f64 {
    spectrum_entropy(&herm_eigenvalues(m))
}

/// Trace over every factor not listed in `keep`; kept factors stay in their original order.
pub fn partial_trace(m: &CMat, dims: &[usize], keep: &[usize]) -> CMat {
    let total: usize = dims.iter().product();
    assert_eq!(m.nrows(), total, "matrix side does not match dims");
    let k = dims.len();
    let kept_dims: Vec<usize> = keep.iter().map(|&i| dims[i]).collect();
    let out_side: usize = kept_dims.iter().product();
    let digits = |mut idx: usize| {
        let mut d = vec![0usize; k];
        for f in (0..k).rev() {
            d[f] = idx % dims[f];
            idx /= dims[f];
        }
        d
    };
    let all_digits: Vec<Vec<usize>> = (0..total).map(digits).collect();
    let kept_index = |d: &[usize]| keep.iter().fold(0, |acc, &f| acc * dims[f] + d[f]);
    let traced: Vec<usize> = (0..k).filter(|f| !keep.contains(f)).collect();
    let mut out = CMat::zeros(out_side, out_side);
    for i in 0..total {
        for j in 0..total {
            let (di, dj) = (&all_digits[i], &all_digits[j]);
            if traced.iter().all(|&f| di[f] == dj[f]) {
                out[(kept_index(di), kept_index(dj))] += m[(i, j)];
            }
        }
    }
    out
}

/// Column vector `|v⟩⟨v|`.
pub fn projector(v: &DVector<C64>) -> CMat {
    v * v.adjoint()
}

pub fn basis_ket(d: usize, i: usize) -> DVector<C64> {
    let mut v = DVector::zeros(d);
    v[i] = c(1.0, 0.0);
    v
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (pauli(1), pauli(2), pauli(3));
        assert!(max_abs_diff(&(&x * &z * c(0.0, 1.0)), &y) < 1e-15);
        for s in 0..4 {
            assert!(max_abs_diff(&(pauli(s) * pauli(s)), &identity(2)) < 1e-15);
        }
    }

    #[test]
    fn partial_trace_of_product() {
        let a = CMat::from_diagonal(&DVector::from_vec(vec![c(0.25, 0.0), c(0.75, 0.0)]));
        let b = CMat::from_diagonal(&DVector::from_vec(vec![c(0.5, 0.0), c(0.3, 0.0), c(0.2, 0.0)]));
        let ab = kron(&a, &b);
        assert!(max_abs_diff(&partial_trace(&ab, &[2, 3], &[0]), &a) < 1e-15);
        assert!(max_abs_diff(&partial_trace(&ab, &[2, 3], &[1]), &b) < 1e-15);
        let ba = partial_trace(&kron(&ab, &a), &[2, 3, 2], &[2, 1]);
        assert!(max_abs_diff(&ba, &kron(&a, &b)) < 1e-15);
    }

    #[test]
    fn spectral_functions() {
        let m = CMat::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let s = psd_sqrt(&m);
        assert!(max_abs_diff(&(&s * &s), &m) < 1e-12);
        let p = CMat::from_diagonal(&DVector::from_vec(vec![c(4.0, 0.0), c(0.0, 0.0)]));
        let q = pinv_sqrt(&p);
        assert!((q[(0, 0)].re - 0.5).abs() < 1e-15 && q[(1, 1)].norm() == 0.0);
        assert!((spectrum_entropy(&[0.5, 0.5, 0.0, -1e-17]) - 1.0).abs() < 1e-15);
    }
}

//! Dense complex matrix helpers on top of `nalgebra` storage.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

/// `a · b` through the blocked complex GEMM kernel.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions differ");
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut c = CMatrix::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    // Complex64 is #[repr(C)] { re, im }, the same layout as [f64; 2].
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    c
}

/// `[1/(x_a − y_b)]`.
pub fn cauchy_matrix(x: &[Complex64], y: &[Complex64]) -> CMatrix {
    CMatrix::from_fn(x.len(), y.len(), |a, b| 1.0 / (x[a] - y[b]))
}

/// `diag(d) · m`.
pub fn scale_rows(d: &[Complex64], mut m: CMatrix) -> CMatrix {
    assert_eq!(d.len(), m.nrows());
    for c in 0..m.ncols() {
        for (r, dr) in d.iter().enumerate() {
            m[(r, c)] *= dr;
        }
    }
    m
}

/// `m · diag(d)`.
pub fn scale_cols(mut m: CMatrix, d: &[Complex64]) -> CMatrix {
    assert_eq!(d.len(), m.ncols());
    for (c, dc) in d.iter().enumerate() {
        m.column_mut(c).iter_mut().for_each(|v| *v *= dc);
    }
    m
}

/// `tr(a · b)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    assert_eq!(a.ncols(), b.nrows());
    assert_eq!(a.nrows(), b.ncols());
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// `tr(m₁ m₂ ⋯ m_L)`.
pub fn trace_of_chain(chain: &[&CMatrix]) -> Complex64 {
    match chain.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => chain[0].trace(),
        _ => {
            let mut acc = chain[0].clone();
            for m in &chain[1..chain.len() - 1] {
                acc = matmul(&acc, m);
            }
            trace_of_product(&acc, chain[chain.len() - 1])
        }
    }
}

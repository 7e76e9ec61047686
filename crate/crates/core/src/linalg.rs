//! Dense complex matrix helpers and the matrix exponential.
//!
//! The exponential follows the scaling-and-squaring scheme with diagonal
//! Padé approximants of degree 3, 5, 7, 9 or 13, chosen from the 1-norm
//! (Higham, SIAM J. Matrix Anal. Appl. 26(4), 2005).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Largest entry modulus.
pub fn max_norm(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Largest entry modulus over the leading `rows x cols` block.
pub fn max_norm_block(m: &CMat, rows: usize, cols: usize) -> f64 {
    let mut acc = 0.0_f64;
    for j in 0..cols.min(m.ncols()) {
        for i in 0..rows.min(m.nrows()) {
            acc = acc.max(m[(i, j)].norm());
        }
    }
    acc
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Maximum absolute column sum.
pub fn one_norm(m: &CMat) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn vec_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Complex product through four real products, which use the optimized real
/// kernel instead of the generic complex one.
pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    let (ar, ai) = (a.map(|z| z.re), a.map(|z| z.im));
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    re.zip_map(&im, Complex64::new)
}

/// Exponential of a diagonal matrix given by its diagonal entries.
pub fn exp_diagonal(diag: impl IntoIterator<Item = Complex64>) -> CMat {
    let d: Vec<Complex64> = diag.into_iter().map(|z| z.exp()).collect();
    CMat::from_diagonal(&CVec::from_vec(d))
}

const THETA: [(usize, f64); 4] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068e0),
];
const THETA_13: f64 = 5.371_920_351_148_152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Matrix exponential of a square complex matrix.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    let norm = one_norm(a);
    let id = identity(n);

    for &(m, theta) in &THETA {
        if norm <= theta {
            let (u, v) = match m {
                3 => pade_low(a, &id, &B3),
                5 => pade_low(a, &id, &B5),
                7 => pade_low(a, &id, &B7),
                _ => pade_low(a, &id, &B9),
            };
            return solve_pade(&u, &v);
        }
    }

    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = a * cr(0.5_f64.powi(s));
    let (u, v) = pade13(&scaled, &id);
    let mut r = solve_pade(&u, &v);
    for _ in 0..s {
        r = matmul(&r, &r);
    }
    r
}

fn pade_low(a: &CMat, id: &CMat, b: &[f64]) -> (CMat, CMat) {
    let a2 = matmul(a, a);
    let mut pow = id.clone();
    let mut u_inner = id * cr(b[1]);
    let mut v = id * cr(b[0]);
    let mut k = 2;
    while k < b.len() {
        pow = matmul(&pow, &a2);
        v += &pow * cr(b[k]);
        if k + 1 < b.len() {
            u_inner += &pow * cr(b[k + 1]);
        }
        k += 2;
    }
    (matmul(a, &u_inner), v)
}

fn pade13(a: &CMat, id: &CMat) -> (CMat, CMat) {
    let b = &B13;
    let a2 = matmul(a, a);
    let a4 = matmul(&a2, &a2);
    let a6 = matmul(&a4, &a2);
    let w1 = &a6 * cr(b[13]) + &a4 * cr(b[11]) + &a2 * cr(b[9]);
    let w2 = &a6 * cr(b[7]) + &a4 * cr(b[5]) + &a2 * cr(b[3]) + id * cr(b[1]);
    let z1 = &a6 * cr(b[12]) + &a4 * cr(b[10]) + &a2 * cr(b[8]);
    let z2 = &a6 * cr(b[6]) + &a4 * cr(b[4]) + &a2 * cr(b[2]) + id * cr(b[0]);
    let u = matmul(a, &(matmul(&a6, &w1) + w2));
    let v = matmul(&a6, &z1) + z2;
    (u, v)
}

fn solve_pade(u: &CMat, v: &CMat) -> CMat {
    let p = v + u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .expect("Pade denominator is nonsingular for scaled arguments")
}

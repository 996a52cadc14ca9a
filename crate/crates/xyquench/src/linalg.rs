//! Fixed-size complex matrix helpers for two-qubit operators.

use num_complex::Complex64;

pub type Mat2 = [[Complex64; 2]; 2];
pub type Mat4 = [[Complex64; 4]; 4];

const Z: Complex64 = Complex64::new(0.0, 0.0);

pub fn zeros4() -> Mat4 {
    [[Z; 4]; 4]
}

pub fn identity2() -> Mat2 {
    let one = Complex64::new(1.0, 0.0);
    [[one, Z], [Z, one]]
}

pub fn mul4(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = zeros4();
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            if aik == Z {
                continue;
            }
            for j in 0..4 {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn sub4(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = *a;
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] -= b[i][j];
        }
    }
    out
}

pub fn add4(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = *a;
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] += b[i][j];
        }
    }
    out
}

pub fn scale4(a: &Mat4, s: Complex64) -> Mat4 {
    let mut out = *a;
    for row in out.iter_mut() {
        for x in row.iter_mut() {
            *x *= s;
        }
    }
    out
}

pub fn trace4(a: &Mat4) -> Complex64 {
    a[0][0] + a[1][1] + a[2][2] + a[3][3]
}

pub fn max_abs_diff4(a: &Mat4, b: &Mat4) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            m = m.max((a[i][j] - b[i][j]).norm());
        }
    }
    m
}

/// a ⊗ b with basis order |00⟩, |01⟩, |10⟩, |11⟩.
pub fn kron2(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = zeros4();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// Spin-1/2 operators S^α = σ^α / 2, for α = x, y, z.
pub fn spin(axis: usize) -> Mat2 {
    let h = 0.5;
    match axis {
        0 => [[Z, Complex64::new(h, 0.0)], [Complex64::new(h, 0.0), Z]],
        1 => [[Z, Complex64::new(0.0, -h)], [Complex64::new(0.0, h), Z]],
        2 => [[Complex64::new(h, 0.0), Z], [Z, Complex64::new(-h, 0.0)]],
        _ => panic!("spin axis must be 0, 1 or 2"),
    }
}

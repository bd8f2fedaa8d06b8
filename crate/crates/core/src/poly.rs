//! Bivariate monomial bases of bounded total degree.

/// Exponents `(a, b)` of `ξ^a η^b` with `a + b ≤ degree`, ordered by total degree.
pub fn monomial_exponents(degree: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity((degree + 1) * (degree + 2) / 2);
    for total in 0..=degree {
        for b in 0..=total {
            out.push((total - b, b));
        }
    }
    out
}

/// Number of monomials of total degree at most `degree`.
pub fn monomial_count(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

/// `x^k` with the convention `x^0 = 1` (also at `x = 0`).
#[inline]
fn pow(x: f64, k: usize) -> f64 {
    let mut r = 1.0;
    for _ in 0..k {
        r *= x;
    }
    r
}

/// Value, gradient, and Hessian (`[xx, xy, yy]`) of one monomial.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MonomialJet {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [f64; 3],
}

pub fn monomial_jet(a: usize, b: usize, p: [f64; 2]) -> MonomialJet {
    let (x, y) = (p[0], p[1]);
    let af = a as f64;
    let bf = b as f64;
    let px = |k: isize| if k < 0 { 0.0 } else { pow(x, k as usize) };
    let py = |k: isize| if k < 0 { 0.0 } else { pow(y, k as usize) };
    let (ai, bi) = (a as isize, b as isize);
    MonomialJet {
        value: px(ai) * py(bi),
        grad: [af * px(ai - 1) * py(bi), bf * px(ai) * py(bi - 1)],
        hess: [
            af * (af - 1.0) * px(ai - 2) * py(bi),
            af * bf * px(ai - 1) * py(bi - 1),
            bf * (bf - 1.0) * px(ai) * py(bi - 2),
        ],
    }
}

pub fn monomial_value(a: usize, b: usize, p: [f64; 2]) -> f64 {
    pow(p[0], a) * pow(p[1], b)
}

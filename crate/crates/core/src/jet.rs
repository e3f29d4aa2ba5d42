//! Second-order forward jets in three variables.
//!
//! A [`Jet`] carries a value, its gradient and its Hessian. Arithmetic
//! propagates all three exactly, so composing smooth pieces yields the
//! derivatives needed for velocity gradients without finite differences.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub g: [f64; 3],
    pub h: [[f64; 3]; 3],
}

impl Jet {
    pub const ZERO: Jet = Jet {
        v: 0.0,
        g: [0.0; 3],
        h: [[0.0; 3]; 3],
    };

    pub fn constant(v: f64) -> Self {
        Jet { v, ..Jet::ZERO }
    }

    /// The coordinate function `x_i` evaluated at `value`.
    pub fn variable(value: f64, i: usize) -> Self {
        let mut j = Jet::constant(value);
        j.g[i] = 1.0;
        j
    }

    pub fn coordinates(x: [f64; 3]) -> [Jet; 3] {
        [
            Jet::variable(x[0], 0),
            Jet::variable(x[1], 1),
            Jet::variable(x[2], 2),
        ]
    }

    /// `f(self)` given `f`, `f'` and `f''` at `self.v`.
    pub fn compose(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Jet::constant(f0);
        for i in 0..3 {
            out.g[i] = f1 * self.g[i];
            for j in 0..3 {
                out.h[i][j] = f1 * self.h[i][j] + f2 * self.g[i] * self.g[j];
            }
        }
        out
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.compose(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.compose(r, -r * r, 2.0 * r * r * r)
    }

    pub fn scale(self, c: f64) -> Self {
        let mut out = self;
        out.v *= c;
        for i in 0..3 {
            out.g[i] *= c;
            for j in 0..3 {
                out.h[i][j] *= c;
            }
        }
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut out = self;
        out.v += o.v;
        for i in 0..3 {
            out.g[i] += o.g[i];
            for j in 0..3 {
                out.h[i][j] += o.h[i][j];
            }
        }
        out
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut out = Jet::constant(self.v * o.v);
        for i in 0..3 {
            out.g[i] = self.v * o.g[i] + o.v * self.g[i];
            for j in 0..3 {
                out.h[i][j] = self.v * o.h[i][j]
                    + o.v * self.h[i][j]
                    + self.g[i] * o.g[j]
                    + o.g[i] * self.g[j];
            }
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, c: f64) -> Jet {
        self.v += c;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, c: f64) -> Jet {
        self.v -= c;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        self.scale(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(x: [f64; 3]) -> Jet {
        let [a, b, c] = Jet::coordinates(x);
        (a * b + c.sqrt()) / (a * a + 1.0) - b * c * 3.0
    }

    fn plain(x: [f64; 3]) -> f64 {
        (x[0] * x[1] + x[2].sqrt()) / (x[0] * x[0] + 1.0) - 3.0 * x[1] * x[2]
    }

    #[test]
    fn derivatives_match_central_differences() {
        let x = [0.3, -0.7, 1.4];
        let j = eval(x);
        assert!((j.v - plain(x)).abs() < 1e-15);
        let e = 1e-4;
        for i in 0..3 {
            let mut p = x;
            let mut m = x;
            p[i] += e;
            m[i] -= e;
            let fd = (plain(p) - plain(m)) / (2.0 * e);
            assert!((fd - j.g[i]).abs() < 1e-7, "g[{i}]");
            for k in 0..3 {
                let fd2 = (eval(p).g[k] - eval(m).g[k]) / (2.0 * e);
                assert!((fd2 - j.h[i][k]).abs() < 1e-6, "h[{i}][{k}]");
            }
        }
    }

    #[test]
    fn hessian_is_symmetric() {
        let j = eval([1.1, 0.2, 0.5]);
        for i in 0..3 {
            for k in 0..3 {
                assert!((j.h[i][k] - j.h[k][i]).abs() < 1e-14);
            }
        }
    }
}

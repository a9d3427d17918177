//! Piecewise-polynomial arithmetic used for the exact integration paths.
//!
//! Kernels and the piecewise-polynomial densities (uniform, triangular) are
//! represented as [`Piecewise`] functions; products and definite integrals of
//! those are computed in closed form so the centering terms that enter every
//! process value carry no quadrature error at all.

/// Dense polynomial with ascending coefficients: `coeffs[k] * x^k`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Poly {
    pub coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Poly { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Poly { coeffs: vec![c] }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Poly::new(vec![]);
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Poly {
        let mut out = vec![0.0; self.coeffs.len() + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            out[k + 1] = c / (k + 1) as f64;
        }
        Poly::new(out)
    }

    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        let f = self.antiderivative();
        f.eval(hi) - f.eval(lo)
    }

    /// The polynomial `x -> p(a + b x)` expanded in `x`.
    pub fn compose_affine(&self, a: f64, b: f64) -> Poly {
        // Horner on the shifted variable: p(a + b x) built degree by degree.
        let mut out = Poly::constant(0.0);
        for &c in self.coeffs.iter().rev() {
            out = out.mul(&Poly::new(vec![a, b]));
            if out.coeffs.is_empty() {
                out.coeffs.push(0.0);
            }
            out.coeffs[0] += c;
        }
        out
    }
}

/// Piecewise polynomial, identically zero outside `[breaks[0], breaks[last]]`.
/// `pieces[i]` is in force on `[breaks[i], breaks[i+1])`; the right endpoint
/// of the last piece is included.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Piecewise {
    pub breaks: Vec<f64>,
    pub pieces: Vec<Poly>,
}

impl Piecewise {
    pub fn new(breaks: Vec<f64>, pieces: Vec<Poly>) -> Self {
        debug_assert!(breaks.len() == pieces.len() + 1);
        debug_assert!(breaks.windows(2).all(|w| w[0] < w[1]));
        Piecewise { breaks, pieces }
    }

    pub fn lo(&self) -> f64 {
        self.breaks[0]
    }

    pub fn hi(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    /// `x -> p(a + b x)` as a new piecewise polynomial (`b` nonzero).
    pub fn compose_affine(&self, a: f64, b: f64) -> Piecewise {
        let mut breaks: Vec<f64> = self.breaks.iter().map(|&t| (t - a) / b).collect();
        let mut pieces: Vec<Poly> = self.pieces.iter().map(|p| p.compose_affine(a, b)).collect();
        if b < 0.0 {
            breaks.reverse();
            pieces.reverse();
        }
        Piecewise::new(breaks, pieces)
    }

    /// Exact integral of `self * other` over `[lo, hi]`.
    pub fn product_integral(&self, other: &Piecewise, lo: f64, hi: f64) -> f64 {
        let lo = lo.max(self.lo()).max(other.lo());
        let hi = hi.min(self.hi()).min(other.hi());
        if lo >= hi {
            return 0.0;
        }
        let mut cuts: Vec<f64> = vec![lo, hi];
        cuts.extend(self.breaks.iter().copied().filter(|&b| b > lo && b < hi));
        cuts.extend(other.breaks.iter().copied().filter(|&b| b > lo && b < hi));
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mid = 0.5 * (a + b);
            let p = self.piece_at(mid);
            let q = other.piece_at(mid);
            if let (Some(p), Some(q)) = (p, q) {
                total += p.mul(q).integral(a, b);
            }
        }
        total
    }

    fn piece_at(&self, x: f64) -> Option<&Poly> {
        if x < self.lo() || x > self.hi() {
            return None;
        }
        let idx = match self.breaks.binary_search_by(|b| b.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.pieces.len() - 1),
            Err(i) => i - 1,
        };
        Some(&self.pieces[idx])
    }
}

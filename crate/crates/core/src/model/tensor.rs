/// Dense rank-4 array over `0..dim`, index-major (last index fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct Rank4 {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Rank4 {
    pub fn zeros(dim: usize) -> Self {
        Rank4 {
            dim,
            data: vec![0.0; dim.pow(4)],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Rank4::zeros(dim);
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    for d in 0..dim {
                        t.data[((a * dim + b) * dim + c) * dim + d] = f(a, b, c, d);
                    }
                }
            }
        }
        t
    }

    #[inline]
    pub fn idx(&self, a: usize, b: usize, c: usize, d: usize) -> usize {
        ((a * self.dim + b) * self.dim + c) * self.dim + d
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[self.idx(a, b, c, d)]
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        let i = self.idx(a, b, c, d);
        self.data[i] = v;
    }

    pub fn scaled(&self, s: f64) -> Self {
        Rank4 {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Ricci contraction `Ric_bd = sum_a T_abad`.
    pub fn ricci(&self) -> Vec<f64> {
        let m = self.dim;
        let mut ric = vec![0.0; m * m];
        for b in 0..m {
            for d in 0..m {
                ric[b * m + d] = (0..m).map(|a| self.get(a, b, a, d)).sum();
            }
        }
        ric
    }
}

/// Projection onto tensors with the algebraic symmetries of a curvature
/// tensor: antisymmetric in each pair, symmetric under pair exchange, and
/// satisfying the first Bianchi identity.
pub fn algebraic_projection(t: &Rank4) -> Rank4 {
    let a = Rank4::from_fn(t.dim, |a, b, c, d| {
        0.25 * (t.get(a, b, c, d) - t.get(b, a, c, d) - t.get(a, b, d, c) + t.get(b, a, d, c))
    });
    let s = Rank4::from_fn(t.dim, |p, q, r, u| 0.5 * (a.get(p, q, r, u) + a.get(r, u, p, q)));
    // The cyclic sum of `s` is totally antisymmetric, so removing a third of
    // it keeps the pair symmetries.
    Rank4::from_fn(t.dim, |a, b, c, d| {
        let cyc = s.get(a, b, c, d) + s.get(a, c, d, b) + s.get(a, d, b, c);
        s.get(a, b, c, d) - cyc / 3.0
    })
}

/// Weyl part of an algebraic curvature tensor (Euclidean metric).
pub fn weyl_projection(r: &Rank4) -> Rank4 {
    let m = r.dim;
    let mf = m as f64;
    let ric = r.ricci();
    let s: f64 = (0..m).map(|i| ric[i * m + i]).sum();
    let g = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let rc = |i: usize, j: usize| ric[i * m + j];
    Rank4::from_fn(m, |a, b, c, d| {
        r.get(a, b, c, d)
            - (rc(a, c) * g(b, d) - rc(a, d) * g(b, c) + rc(b, d) * g(a, c) - rc(b, c) * g(a, d))
                / (mf - 2.0)
            + s * (g(a, c) * g(b, d) - g(a, d) * g(b, c)) / ((mf - 1.0) * (mf - 2.0))
    })
}

/// Largest deviation from each curvature symmetry, as
/// `[first pair, second pair, pair exchange, first Bianchi]`.
pub fn symmetry_violations(r: &Rank4) -> [f64; 4] {
    let m = r.dim;
    let mut v = [0.0f64; 4];
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for d in 0..m {
                    let x = r.get(a, b, c, d);
                    v[0] = v[0].max((x + r.get(b, a, c, d)).abs());
                    v[1] = v[1].max((x + r.get(a, b, d, c)).abs());
                    v[2] = v[2].max((x - r.get(c, d, a, b)).abs());
                    v[3] = v[3].max((x + r.get(a, c, d, b) + r.get(a, d, b, c)).abs());
                }
            }
        }
    }
    v
}

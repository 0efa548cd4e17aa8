//! Sparse polynomials in the tangential variables `x̃`, and integration of
//! `P(x̃) g(|x̃|, x_n)` over the half-space by angular averaging.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::quad::{
    brute_halfspace, sphere_abs_monomial_average, sphere_monomial_average,
    sphere_monomial_average_quadrature,
};

/// Polynomial in `m ≤ 15` variables. A monomial is keyed by its sorted
/// variable indices packed as base-16 digits `index+1`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TangentPoly {
    pub m: usize,
    pub terms: BTreeMap<u64, f64>,
}

fn pack(idx: &mut [usize]) -> u64 {
    idx.sort_unstable();
    idx.iter().fold(0u64, |k, &i| (k << 4) | (i as u64 + 1))
}

fn unpack(mut key: u64) -> Vec<usize> {
    let mut out = Vec::new();
    while key != 0 {
        out.push((key & 0xf) as usize - 1);
        key >>= 4;
    }
    out.reverse();
    out
}

fn merge(a: u64, b: u64) -> u64 {
    let mut v = unpack(a);
    v.extend(unpack(b));
    pack(&mut v)
}

impl TangentPoly {
    pub fn zero(m: usize) -> Self {
        assert!(m <= 15, "tangential dimension above 15 is not supported");
        TangentPoly {
            m,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(m: usize, c: f64) -> Self {
        let mut p = Self::zero(m);
        p.add(&[], c);
        p
    }

    /// `x̃ᵀ A x̃` for a row-major `m x m` matrix.
    pub fn quadratic(m: usize, a: &[f64]) -> Self {
        let mut p = Self::zero(m);
        for i in 0..m {
            for j in 0..m {
                p.add(&[i, j], a[i * m + j]);
            }
        }
        p
    }

    pub fn monomial(m: usize, idx: &[usize], c: f64) -> Self {
        let mut p = Self::zero(m);
        p.add(idx, c);
        p
    }

    pub fn add(&mut self, idx: &[usize], c: f64) {
        if c == 0.0 {
            return;
        }
        assert!(idx.len() <= 16, "monomial degree above 16");
        let mut v = idx.to_vec();
        *self.terms.entry(pack(&mut v)).or_insert(0.0) += c;
    }

    pub fn add_poly(&mut self, o: &TangentPoly, s: f64) {
        for (k, c) in &o.terms {
            *self.terms.entry(*k).or_insert(0.0) += s * c;
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        TangentPoly {
            m: self.m,
            terms: self.terms.iter().map(|(k, c)| (*k, c * s)).collect(),
        }
    }

    pub fn mul(&self, o: &TangentPoly) -> Self {
        let mut p = Self::zero(self.m);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &o.terms {
                *p.terms.entry(merge(*ka, *kb)).or_insert(0.0) += ca * cb;
            }
        }
        p
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.abs()))
    }

    /// Drops coefficients with magnitude at most `eps`.
    pub fn pruned(&self, eps: f64) -> Self {
        TangentPoly {
            m: self.m,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs() > eps)
                .map(|(k, c)| (*k, *c))
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(k, c)| c * unpack(*k).iter().map(|&i| x[i]).product::<f64>())
            .sum()
    }

    pub fn exponents(&self, key: u64) -> (u32, Vec<u32>) {
        let mut e = vec![0u32; self.m];
        let idx = unpack(key);
        for &i in &idx {
            e[i] += 1;
        }
        (idx.len() as u32, e)
    }

    /// `(sorted variable indices, coefficient)` for every monomial.
    pub fn monomials(&self) -> Vec<(Vec<usize>, f64)> {
        self.terms.iter().map(|(k, c)| (unpack(*k), *c)).collect()
    }

    /// Euclidean Laplacian in `x̃`.
    pub fn laplacian(&self) -> Self {
        let mut p = Self::zero(self.m);
        for (k, c) in &self.terms {
            let idx = unpack(*k);
            let (_, e) = self.exponents(*k);
            for (i, &a) in e.iter().enumerate() {
                if a < 2 {
                    continue;
                }
                let mut rest = idx.clone();
                for _ in 0..2 {
                    let pos = rest.iter().position(|&v| v == i).unwrap();
                    rest.remove(pos);
                }
                p.add(&rest, c * (a * (a - 1)) as f64);
            }
        }
        p
    }

    /// Product with `|x̃|²`.
    pub fn times_r2(&self) -> Self {
        let mut p = Self::zero(self.m);
        for i in 0..self.m {
            p.add_poly(&self.mul(&Self::monomial(self.m, &[i, i], 1.0)), 1.0);
        }
        p
    }

    /// Part of total degree `d`.
    pub fn homogeneous(&self, d: u32) -> Self {
        TangentPoly {
            m: self.m,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| unpack(**k).len() as u32 == d)
                .map(|(k, c)| (*k, *c))
                .collect(),
        }
    }

    pub fn degrees(&self) -> Vec<u32> {
        let mut d: Vec<u32> = self.terms.keys().map(|k| unpack(*k).len() as u32).collect();
        d.dedup();
        d.sort_unstable();
        d.dedup();
        d
    }

    /// Splits a homogeneous polynomial of degree `q` as
    /// `Σ_j |x̃|^{2j} h_{q-2j}` with every `h_l` harmonic of degree `l`.
    /// Returns `(l, h_l)` pairs, highest degree first.
    pub fn harmonic_split(&self, q: u32) -> Vec<(u32, TangentPoly)> {
        let m = self.m as f64;
        let mut out = Vec::new();
        let mut p = self.clone();
        let mut q = q as i64;
        while q >= 0 {
            // h_q = Σ_j (-1)^j r^{2j} Δ^j p / c_j,
            // c_j = Π_{i=1..j} 2i (m + 2q - 2 - 2i).
            let mut lap = p.clone();
            let mut h = p.clone();
            let mut rest = Self::zero(self.m);
            let mut rpow = Self::constant(self.m, 1.0);
            let mut cj = 1.0;
            let mut j = 1;
            while 2 * j <= q {
                lap = lap.laplacian();
                if lap.is_empty() {
                    break;
                }
                cj *= 2.0 * j as f64 * (m + 2.0 * q as f64 - 2.0 - 2.0 * j as f64);
                let sign = if j % 2 == 1 { -1.0 } else { 1.0 };
                // rest collects (p - h_q) / r².
                rest.add_poly(&rpow.mul(&lap), -sign / cj);
                rpow = rpow.times_r2();
                h.add_poly(&rpow.mul(&lap), sign / cj);
                j += 1;
            }
            out.push((q as u32, h));
            p = rest;
            q -= 2;
            if p.is_empty() {
                break;
            }
        }
        out
    }

    /// Sphere averages of each homogeneous part.
    pub fn angular_average(&self, rule: AngularRule) -> Vec<DegreeAverage> {
        let mut by_deg: BTreeMap<u32, DegreeAverage> = BTreeMap::new();
        for (k, c) in &self.terms {
            let (deg, e) = self.exponents(*k);
            let entry = by_deg.entry(deg).or_insert(DegreeAverage {
                degree: deg,
                average: 0.0,
                abs_average: 0.0,
                odd_only: true,
            });
            let odd = e.iter().any(|a| a % 2 == 1);
            if !odd {
                entry.odd_only = false;
                entry.average += c * match rule {
                    AngularRule::ClosedForm => sphere_monomial_average(&e),
                    AngularRule::Quadrature => sphere_monomial_average_quadrature(&e),
                };
            }
            entry.abs_average += c.abs() * sphere_abs_monomial_average(&e);
        }
        by_deg.into_values().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngularRule {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeAverage {
    pub degree: u32,
    pub average: f64,
    /// Average of the sum of absolute values of the monomials.
    pub abs_average: f64,
    /// Every monomial of this degree is odd in some variable.
    pub odd_only: bool,
}

/// One term `P(x̃) g(|x̃|, x_n)` of a half-space integrand. `key` names `g`
/// so its radial integrals can be shared between terms.
pub struct PolyRadial<'a> {
    pub poly: TangentPoly,
    pub radial: &'a (dyn Fn(f64, f64) -> f64 + Sync),
    pub key: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyIntegral {
    pub value: f64,
    /// The same integral with every monomial and radial factor replaced by
    /// its absolute value; bounds the rounding in `value`.
    pub scale: f64,
    /// Some part of the integrand was dropped because it is odd in `x̃`.
    pub odd_rejected: bool,
}

/// Radial integrals `ω ∫∫ r^{n-2+deg} g dr dx_n` and their absolute
/// counterparts, keyed by `(key, degree)`.
#[derive(Debug, Default, Clone)]
pub struct RadialCache {
    map: BTreeMap<(u64, u32), (f64, f64)>,
}

impl RadialCache {
    pub fn new() -> Self {
        Self::default()
    }
}

pub fn integrate_poly_radial(
    n: usize,
    terms: &[PolyRadial<'_>],
    rule: AngularRule,
    rel_tol: f64,
    cache: &mut RadialCache,
) -> Result<PolyIntegral> {
    let mut out = PolyIntegral {
        value: 0.0,
        scale: 0.0,
        odd_rejected: false,
    };
    for t in terms {
        for avg in t.poly.angular_average(rule) {
            if avg.odd_only {
                out.odd_rejected = true;
                continue;
            }
            let ck = (t.key, avg.degree);
            let (val, abs) = match cache.map.get(&ck) {
                Some(v) => *v,
                None => {
                    let d = avg.degree as i32;
                    let g = t.radial;
                    let val = brute_halfspace(n, |r, z| r.powi(d) * g(r, z), f64::INFINITY, rel_tol)?;
                    let abs = brute_halfspace(
                        n,
                        |r, z| r.powi(d) * g(r, z).abs(),
                        f64::INFINITY,
                        rel_tol,
                    )?;
                    cache.map.insert(ck, (val, abs));
                    (val, abs)
                }
            };
            out.value += avg.average * val;
            out.scale += avg.abs_average * abs;
        }
    }
    Ok(out)
}

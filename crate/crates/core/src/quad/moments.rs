//! Beta moments, the `D`-dependent integrals and the separable half-space
//! moments built from them.

use std::collections::BTreeMap;
use std::sync::RwLock;

use statrs::function::gamma::ln_gamma;

use super::adaptive::{integrate_halfline_with, QuadOptions};
use crate::error::{Error, Result};
use crate::tol;

/// `|S^{n-2}| = 2 π^{(n-1)/2} / Γ((n-1)/2)`, the measure of the unit sphere
/// in `R^{n-1}`.
pub fn omega(n: usize) -> f64 {
    let h = (n as f64 - 1.0) / 2.0;
    2.0 * (h * std::f64::consts::PI.ln() - ln_gamma(h)).exp()
}

/// `I_m^α = ∫_0^∞ ρ^α / (1+ρ²)^m dρ = ½ B((α+1)/2, m-(α+1)/2)`.
pub fn beta_moment(m: f64, alpha: f64) -> Result<f64> {
    if !(alpha > -1.0) || !(alpha + 1.0 < 2.0 * m) {
        return Err(Error::Domain(format!(
            "I_m^alpha needs -1 < alpha < 2m-1, got m={m}, alpha={alpha}"
        )));
    }
    let p = (alpha + 1.0) / 2.0;
    let q = m - p;
    Ok(0.5 * (ln_gamma(p) + ln_gamma(q) - ln_gamma(p + q)).exp())
}

/// `∫_D^∞ (t-D)^a / (t²-1)^p dt`.
pub fn t_moment(a: f64, p: f64, d: f64, rel_tol: f64) -> Result<f64> {
    if !(d > 1.0) {
        return Err(Error::Domain(format!("t-moment needs D > 1, got {d}")));
    }
    if !(a > -1.0) || !(2.0 * p > a + 1.0) {
        return Err(Error::Domain(format!(
            "t-moment diverges for a={a}, p={p} (need 2p > a+1)"
        )));
    }
    let f = |t: f64| {
        let s = t - d;
        let base = if a == 0.0 { 1.0 } else { s.powf(a) };
        base * (t * t - 1.0).powf(-p)
    };
    integrate_halfline_with(f, d, QuadOptions::rel(rel_tol)).map(|r| r.value)
}

/// `φ_m(D) = ∫_D^∞ (t²-1)^{-m} dt`.
pub fn phi(m: f64, d: f64) -> Result<f64> {
    t_moment(0.0, m, d, tol::QUAD_REL_TOL)
}

/// `∫_D^∞ (t-D)² (t²-1)^{-m} dt`.
pub fn phi_hat(m: f64, d: f64) -> Result<f64> {
    t_moment(2.0, m, d, tol::QUAD_REL_TOL)
}

/// `∫_D^∞ (t-D)⁴ (t²-1)^{-m} dt`.
pub fn phi_tilde(m: f64, d: f64) -> Result<f64> {
    t_moment(4.0, m, d, tol::QUAD_REL_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Beta(u64, u64),
    T(u64, u64),
}

/// Cached moments at fixed `(n, D)`.
///
/// Values are deterministic functions of the key and `rel_tol`, so a cached
/// entry always equals a fresh evaluation bit for bit.
#[derive(Debug)]
pub struct MomentTable {
    pub n: usize,
    pub d: f64,
    pub rel_tol: f64,
    pub omega: f64,
    cache: RwLock<BTreeMap<Key, f64>>,
}

impl Clone for MomentTable {
    fn clone(&self) -> Self {
        MomentTable {
            n: self.n,
            d: self.d,
            rel_tol: self.rel_tol,
            omega: self.omega,
            cache: RwLock::new(self.cache.read().expect("moment cache").clone()),
        }
    }
}

impl MomentTable {
    pub fn new(n: usize, d: f64) -> Result<Self> {
        Self::with_tol(n, d, tol::QUAD_REL_TOL)
    }

    pub fn with_tol(n: usize, d: f64, rel_tol: f64) -> Result<Self> {
        if !(d > 1.0) {
            return Err(Error::Domain(format!("moment table needs D > 1, got {d}")));
        }
        Ok(MomentTable {
            n,
            d,
            rel_tol,
            omega: omega(n),
            cache: RwLock::new(BTreeMap::new()),
        })
    }

    fn cached(&self, key: Key, eval: impl FnOnce() -> Result<f64>) -> Result<f64> {
        if let Some(v) = self.cache.read().expect("moment cache").get(&key) {
            return Ok(*v);
        }
        let v = eval()?;
        self.cache.write().expect("moment cache").insert(key, v);
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.cache.read().expect("moment cache").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn beta(&self, m: f64, alpha: f64) -> Result<f64> {
        self.cached(Key::Beta(m.to_bits(), alpha.to_bits()), || {
            beta_moment(m, alpha)
        })
    }

    /// `∫_D^∞ (t-D)^a (t²-1)^{-p} dt`.
    pub fn t(&self, a: f64, p: f64) -> Result<f64> {
        self.cached(Key::T(a.to_bits(), p.to_bits()), || {
            t_moment(a, p, self.d, self.rel_tol)
        })
    }

    pub fn phi(&self, m: f64) -> Result<f64> {
        self.t(0.0, m)
    }

    pub fn phi_hat(&self, m: f64) -> Result<f64> {
        self.t(2.0, m)
    }

    pub fn phi_tilde(&self, m: f64) -> Result<f64> {
        self.t(4.0, m)
    }

    /// `∫_{R^n_+} x_n^a |x̃|^b (|x̃|² + (x_n+D)² - 1)^{-m} dx`, reduced to
    /// `ω I_m^{n-2+b} ∫_D^∞ (t-D)^a (t²-1)^{(n-1+b)/2-m} dt`.
    pub fn halfspace(&self, a: u32, b: u32, m: f64) -> Result<f64> {
        let nf = self.n as f64;
        let (af, bf) = (a as f64, b as f64);
        if !(2.0 * m > nf + af + bf) {
            return Err(Error::Domain(format!(
                "half-space moment (a={a}, b={b}, m={m}) diverges at n={}: need 2m > n+a+b",
                self.n
            )));
        }
        let beta = self.beta(m, nf - 2.0 + bf)?;
        let t = self.t(af, m - (nf - 1.0 + bf) / 2.0)?;
        Ok(self.omega * beta * t)
    }

    /// `∫_{R^{n-1}} |x̃|^b (|x̃|² + D² - 1)^{-m} dx̃`.
    pub fn boundary(&self, b: u32, m: f64) -> Result<f64> {
        let nf = self.n as f64;
        let bf = b as f64;
        if !(2.0 * m > nf - 1.0 + bf) {
            return Err(Error::Domain(format!(
                "boundary moment (b={b}, m={m}) diverges at n={}: need 2m > n-1+b",
                self.n
            )));
        }
        let beta = self.beta(m, nf - 2.0 + bf)?;
        let s2 = self.d * self.d - 1.0;
        Ok(self.omega * s2.powf((nf - 1.0 + bf) / 2.0 - m) * beta)
    }
}

/// `halfspace_moment` as a free function over a table.
pub fn halfspace_moment(tbl: &MomentTable, a: u32, b: u32, m: f64) -> Result<f64> {
    tbl.halfspace(a, b, m)
}

pub fn boundary_moment(tbl: &MomentTable, b: u32, m: f64) -> Result<f64> {
    tbl.boundary(b, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_examples() {
        assert!((beta_moment(2.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        let r = beta_moment(8.0, 8.0).unwrap() / beta_moment(8.0, 10.0).unwrap();
        assert!((r - 5.0 / 9.0).abs() < 1e-13);
        let r = beta_moment(6.0, 6.0).unwrap() / beta_moment(8.0, 10.0).unwrap();
        assert!((r - 8.0 / 3.0).abs() < 1e-13);
        assert!(beta_moment(2.0, 3.0).is_err());
    }

    #[test]
    fn omega_low_dims() {
        // |S^1| = 2π, |S^2| = 4π.
        assert!((omega(3) - 2.0 * std::f64::consts::PI).abs() < 1e-14);
        assert!((omega(4) - 4.0 * std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn phi_closed_form() {
        assert!((phi(1.0, 2.0).unwrap() - 0.5 * 3f64.ln()).abs() < 1e-12);
        assert!(phi_hat(3.0, 50.0).unwrap() < phi_hat(3.0, 5.0).unwrap());
    }

    #[test]
    fn divergence_boundaries() {
        let t = MomentTable::new(8, 2.0).unwrap();
        assert!(matches!(t.boundary(2, 4.5), Err(Error::Domain(_))));
        assert!(matches!(t.halfspace(2, 0, 5.0), Err(Error::Domain(_))));
        assert!(t.halfspace(2, 0, 5.5).is_ok());
        assert!(MomentTable::new(8, 1.0).is_err());
    }

    #[test]
    fn boundary_closed_form() {
        let t = MomentTable::new(8, 2.0).unwrap();
        let v = t.boundary(0, 6.0).unwrap();
        let expect = t.omega * 3f64.powf(-2.5) * beta_moment(6.0, 6.0).unwrap();
        assert!((v - expect).abs() < 1e-15 * expect);
    }

    #[test]
    fn cache_is_bitwise_coherent() {
        let t = MomentTable::new(9, 1.5).unwrap();
        let a = t.halfspace(4, 2, 9.0).unwrap();
        assert!(t.len() >= 2);
        let fresh = MomentTable::new(9, 1.5).unwrap().halfspace(4, 2, 9.0).unwrap();
        assert_eq!(a.to_bits(), fresh.to_bits());
        assert_eq!(t.halfspace(4, 2, 9.0).unwrap().to_bits(), a.to_bits());
    }
}

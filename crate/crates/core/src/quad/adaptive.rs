//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::tol;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    /// Absolute floor on the error target, for integrals that vanish.
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: tol::QUAD_REL_TOL,
            abs_tol: 0.0,
            max_panels: tol::QUAD_MAX_PANELS,
        }
    }
}

impl QuadOptions {
    pub fn rel(rel_tol: f64) -> Self {
        QuadOptions {
            rel_tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error
            .total_cmp(&o.error)
            .then_with(|| o.a.total_cmp(&self.a))
    }
}

/// One 15-point Kronrod panel with the QUADPACK error heuristic.
pub fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let hl = h.abs();
    let value = resk * h;
    resabs *= hl;
    resasc *= hl;
    let mut err = ((resk - resg) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (value, err)
}

/// Integrates `f` over `[a, b]` to the requested relative accuracy.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    integrate_split(&f, &[a, b], opts)
}

/// As [`integrate`], starting from the given breakpoints.
pub fn integrate_split<F: Fn(f64) -> f64>(
    f: &F,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult> {
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut err = 0.0;
    for w in breaks.windows(2) {
        let (v, e) = kronrod15(f, w[0], w[1]);
        total += v;
        err += e;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    loop {
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::NonConvergence {
                estimate: f64::NAN,
                target: opts.rel_tol,
                panels: heap.len(),
            });
        }
        let target = (opts.rel_tol * total.abs()).max(opts.abs_tol);
        if err <= target {
            // Re-sum in panel order so the result does not depend on the
            // history of floating-point updates.
            let mut panels: Vec<Panel> = heap.into_vec();
            panels.sort_by(|p, q| p.a.total_cmp(&q.a));
            let value = panels.iter().map(|p| p.value).sum();
            let error = panels.iter().map(|p| p.error).sum();
            return Ok(QuadResult {
                value,
                error,
                panels: panels.len(),
            });
        }
        if heap.len() >= opts.max_panels {
            return Err(Error::NonConvergence {
                estimate: err / total.abs().max(f64::MIN_POSITIVE),
                target: opts.rel_tol,
                panels: heap.len(),
            });
        }
        let p = heap.pop().expect("non-empty panel heap");
        let mid = 0.5 * (p.a + p.b);
        let (v1, e1) = kronrod15(f, p.a, mid);
        let (v2, e2) = kronrod15(f, mid, p.b);
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        heap.push(Panel {
            a: p.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: p.b,
            value: v2,
            error: e2,
        });
    }
}

/// Integrates `f` over `[a, ∞)` through `t = a + e^x`, `x = ±s/(1-s)`.
pub fn integrate_halfline_with<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    opts: QuadOptions,
) -> Result<QuadResult> {
    // t = a + e^x turns algebraic behaviour at both ends into exponential
    // decay in x, which keeps the Kronrod error estimate honest for
    // integrable endpoint singularities and slowly decaying tails.
    let h = |x: f64| {
        let e = x.exp();
        let v = f(a + e) * e;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let g = |s: f64| {
        let u = 1.0 - s;
        if u <= 0.0 {
            return 0.0;
        }
        let x = s / u;
        (h(x) + h(-x)) / (u * u)
    };
    integrate_split(&g, &[0.0, 0.25, 0.5, 0.75, 1.0], opts)
}

pub fn integrate_halfline<F: Fn(f64) -> f64>(f: F, a: f64, rel_tol: f64) -> Result<f64> {
    integrate_halfline_with(f, a, QuadOptions::rel(rel_tol)).map(|r| r.value)
}

//! Verification suites: each returns one [`Check`] per identity, with the
//! bounds taken from [`Tolerances`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bubble::{bubble_energy, bubble_energy_quadrature, Bubble};
use crate::corrector::{hyperbolic_picture, steklov_variants, VariantReport};
use crate::error::Result;
use crate::geom::{cancellation_suite, forcing_orthogonality, random_riem_mp, MetricExpansion, RadialCache};
use crate::model::{CurvatureFrame, ProblemPoint, PAPER_MIN_DIM};
use crate::quad::{
    beta_moment, brute_boundary, brute_halfspace, integrate_halfline, phi, phi_hat, MomentTable,
};
use crate::reduced::{compute_s_with, i1_closed_form, i2_terms};
use crate::report::{all_pass, rel_diff, Check};

/// Bounds for each family of identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// One-dimensional quadrature against closed forms.
    pub quad: f64,
    /// Separable reductions against 2-D quadrature, and the `φ̃` identity.
    pub separable: f64,
    /// Identities between closed forms.
    pub closed_form: f64,
    /// Pointwise bubble and Jacobi residuals.
    pub residual: f64,
    pub energy: f64,
    pub steklov: f64,
    /// `∫E_p 𝔧_s` relative to `‖E_p‖‖𝔧_s‖`.
    pub orthogonality: f64,
    pub cancellation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quad: 1e-10,
            separable: 1e-8,
            closed_form: 1e-14,
            residual: 1e-8,
            energy: 1e-6,
            steklov: 1e-10,
            orthogonality: 1e-8,
            cancellation: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn uniform(t: f64) -> Self {
        Tolerances {
            quad: t,
            separable: t,
            closed_form: t,
            residual: t,
            energy: t,
            steklov: t,
            orthogonality: t,
            cancellation: t,
        }
    }

    pub fn all(&self) -> [f64; 8] {
        [
            self.quad,
            self.separable,
            self.closed_form,
            self.residual,
            self.energy,
            self.steklov,
            self.orthogonality,
            self.cancellation,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub point: ProblemPoint,
    pub seed: u64,
    /// Random points per pointwise residual check.
    pub points: usize,
    /// Random gauge frames for the orthogonality check.
    pub frames: usize,
    pub tol: Tolerances,
}

impl Settings {
    pub fn new(point: ProblemPoint) -> Self {
        Settings {
            point,
            seed: 1,
            points: 100,
            frames: 20,
            tol: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub point: ProblemPoint,
    pub outside_paper_regime: bool,
    pub pass: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variants: Option<Vec<VariantReport>>,
}

impl VerifyReport {
    pub fn new(suite: &str, point: ProblemPoint, outside: bool, checks: Vec<Check>) -> Self {
        VerifyReport {
            suite: suite.into(),
            point,
            outside_paper_regime: outside,
            pass: all_pass(&checks),
            checks,
            variants: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Integrals,
    Bubble,
    Hyperbolic,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Integrals => "integrals",
            Suite::Bubble => "bubble",
            Suite::Hyperbolic => "hyperbolic",
        }
    }
}

/// Runs one suite and wraps it in a report.
pub fn run_suite(suite: Suite, s: &Settings) -> Result<VerifyReport> {
    let outside = s.point.n < PAPER_MIN_DIM;
    Ok(match suite {
        Suite::Integrals => VerifyReport::new(suite.name(), s.point, outside, integrals_suite(s)?),
        Suite::Bubble => VerifyReport::new(suite.name(), s.point, outside, bubble_suite(s)?),
        Suite::Hyperbolic => {
            let (checks, variants) = hyperbolic_suite(s)?;
            let mut r = VerifyReport::new(suite.name(), s.point, outside, checks);
            r.variants = Some(variants);
            r
        }
    })
}

impl VerifyReport {
    /// Pretty JSON with a trailing newline; floats use shortest round-trip
    /// formatting, so equal reports give equal bytes.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// `(m, α)` pairs with `α > -1` and `α + 1 < 2m`.
pub fn beta_grid() -> Vec<(f64, f64)> {
    let ms = [1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0];
    let alphas = [-0.5, 0.0, 0.5, 1.0, 2.0, 3.0, 5.0, 8.0, 10.0, 14.0];
    let mut out = Vec::new();
    for &m in &ms {
        for &a in &alphas {
            if a + 1.0 < 2.0 * m {
                out.push((m, a));
            }
        }
    }
    out
}

/// `(a, b, m)` moment triples beyond the three quoted lines, all convergent
/// for `n ≥ 8`.
pub fn extra_triples(n: usize) -> Vec<(u32, u32, f64)> {
    let nf = n as f64;
    vec![
        (0, 0, nf - 2.0),
        (0, 2, nf - 2.0),
        (2, 2, nf),
        (0, 4, nf),
        (4, 0, nf),
        (0, 0, nf),
        (2, 0, nf),
        (0, 2, nf),
        (4, 4, nf + 1.0),
        (2, 6, nf + 2.0),
        (0, 0, nf - 1.5),
        (2, 2, nf + 0.5),
    ]
}

fn qrel(value: f64, exact: f64) -> f64 {
    rel_diff(value, exact)
}

/// One-dimensional quadrature, Beta moments, the `φ` family, the separable
/// reductions and the cancellation identities at `s.point`.
pub fn integrals_suite(s: &Settings) -> Result<Vec<Check>> {
    let pt = &s.point;
    let n = pt.n;
    let nf = pt.nf();
    let d = pt.d();
    let t = &s.tol;
    let mut out = Vec::new();

    let v = integrate_halfline(|r| r / (1.0 + r * r).powi(2), 0.0, 1e-12)?;
    out.push(Check::at_most("halfline: rho/(1+rho^2)^2 = 1/2", qrel(v, 0.5), t.quad));
    let v = integrate_halfline(|r| 1.0 / (1.0 + r * r), 0.0, 1e-12)?;
    out.push(Check::at_most("halfline: 1/(1+rho^2) = pi/2", qrel(v, std::f64::consts::FRAC_PI_2), t.quad));
    let v = integrate_halfline(|x| 1.0 / (x * x - 1.0), 2.0, 1e-12)?;
    out.push(Check::at_most("halfline: 1/(t^2-1) on [2,inf) = ln(3)/2", qrel(v, 0.5 * 3f64.ln()), t.quad));

    let grid = beta_grid();
    let mut worst: f64 = 0.0;
    for &(m, a) in &grid {
        let closed = beta_moment(m, a)?;
        // Divided through by r^{2m} past r = 1 so r^α cannot overflow.
        let f = |r: f64| {
            if r > 1.0 {
                r.powf(a - 2.0 * m) / (1.0 + 1.0 / (r * r)).powf(m)
            } else {
                r.powf(a) / (1.0 + r * r).powf(m)
            }
        };
        let quad = integrate_halfline(f, 0.0, 1e-12)?;
        worst = worst.max(qrel(closed, quad));
    }
    out.push(Check::at_most(
        format!("Beta moments: closed form vs quadrature ({} pairs)", grid.len()),
        worst,
        t.quad,
    ));

    let tbl = MomentTable::new(n, d)?;
    let top = tbl.beta(nf, nf + 2.0)?;
    out.push(Check::at_most(
        "I_n^n = (n-3)/(n+1) I_n^{n+2}",
        qrel(tbl.beta(nf, nf)?, (nf - 3.0) / (nf + 1.0) * top),
        t.quad,
    ));
    out.push(Check::at_most(
        "I_{n-2}^{n-2} = 4(n-2)/(n+1) I_n^{n+2}",
        qrel(tbl.beta(nf - 2.0, nf - 2.0)?, 4.0 * (nf - 2.0) / (nf + 1.0) * top),
        t.quad,
    ));
    out.push(Check::at_most(
        "phi_1(D) = ln((D+1)/(D-1))/2",
        qrel(tbl.phi(1.0)?, 0.5 * ((d + 1.0) / (d - 1.0)).ln()),
        t.quad,
    ));
    out.push(Check::at_most(
        "phi_hat_3(50) / phi_hat_3(5) <= 1",
        phi_hat(3.0, 50.0)? / phi_hat(3.0, 5.0)?,
        1.0,
    ));
    let ibp = 3.0 / (nf - 3.0) * tbl.phi_hat((nf - 3.0) / 2.0)? - d * tbl.t(3.0, (nf - 1.0) / 2.0)?;
    out.push(Check::at_most(
        "phi_tilde_{(n-1)/2} integration by parts",
        qrel(tbl.phi_tilde((nf - 1.0) / 2.0)?, ibp),
        t.separable,
    ));

    let q = move |r: f64, z: f64| r * r + (z + d) * (z + d) - 1.0;
    let brute = |a: u32, b: u32, m: f64| -> Result<f64> {
        brute_halfspace(
            n,
            move |r, z| z.powi(a as i32) * r.powi(b as i32) * q(r, z).powf(-m),
            f64::INFINITY,
            1e-10,
        )
    };
    let om = tbl.omega;
    let lines: [(&str, u32, u32, f64, f64); 3] = [
        (
            "x_n^2 Q^{-(n-2)} = omega I_{n-2}^{n-2} phi_hat_{(n-3)/2}",
            2,
            0,
            nf - 2.0,
            om * tbl.beta(nf - 2.0, nf - 2.0)? * tbl.phi_hat((nf - 3.0) / 2.0)?,
        ),
        (
            "x_n^2 |x~|^4 Q^{-n} = omega I_n^{n+2} phi_hat_{(n-3)/2}",
            2,
            4,
            nf,
            om * top * tbl.phi_hat((nf - 3.0) / 2.0)?,
        ),
        (
            "x_n^4 |x~|^2 Q^{-n} = omega (n-3)/(n+1) I_n^{n+2} phi_tilde_{(n-1)/2}",
            4,
            2,
            nf,
            om * (nf - 3.0) / (nf + 1.0) * top * tbl.phi_tilde((nf - 1.0) / 2.0)?,
        ),
    ];
    for (name, a, b, m, quoted) in lines {
        let sep = tbl.halfspace(a, b, m)?;
        out.push(Check::at_most(format!("{name}: separable vs 2-D"), qrel(sep, brute(a, b, m)?), t.separable));
        out.push(Check::at_most(format!("{name}: quoted form"), qrel(sep, quoted), t.quad));
    }
    let triples = extra_triples(n);
    let mut worst: f64 = 0.0;
    for &(a, b, m) in &triples {
        worst = worst.max(qrel(tbl.halfspace(a, b, m)?, brute(a, b, m)?));
    }
    out.push(Check::at_most(
        format!("separable vs 2-D on {} further triples", triples.len()),
        worst,
        t.separable,
    ));
    let bm = brute_boundary(n, |r| (r * r + d * d - 1.0).powf(2.0 - nf), f64::INFINITY, 1e-12)?;
    out.push(Check::at_most(
        "boundary moment b=0, m=n-2 vs radial quadrature",
        qrel(tbl.boundary(0, nf - 2.0)?, bm),
        t.separable,
    ));
    let fresh = MomentTable::new(n, d)?;
    let same = tbl.phi_hat((nf - 3.0) / 2.0)? == fresh.phi_hat((nf - 3.0) / 2.0)?
        && tbl.beta(nf, nf + 2.0)? == fresh.beta(nf, nf + 2.0)?;
    out.push(Check::at_most("moment cache reproduces fresh values", if same { 0.0 } else { 1.0 }, 0.0));
    out.push(Check::at_most("phi_1 free function matches table", qrel(phi(1.0, d)?, tbl.phi(1.0)?), 0.0));

    let s_val = compute_s_with(pt, &tbl)?;
    out.push(Check::at_least("S > 0", s_val, 0.0));
    out.push(Check::at_most(
        "S: both bracket forms agree",
        qrel(i1_closed_form(pt)?, -s_val),
        t.separable,
    ));
    let (a, b) = i2_terms(pt)?;
    out.push(Check::at_most("normal-divergence bracket vanishes", qrel(a, b), t.separable));

    let mut me = MetricExpansion::new(CurvatureFrame::random_gauge(n, s.seed, 1.0));
    me.riem_mp = Some(random_riem_mp(n - 1, s.seed + 1, 1.0));
    for c in cancellation_suite(&me, pt, 1e-10)? {
        out.push(Check::at_most(c.name, c.value, t.cancellation));
    }
    Ok(out)
}

fn random_point(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n)
        .map(|i| if i + 1 == n { rng.random_range(0.0..3.0) } else { rng.random_range(-3.0..3.0) })
        .collect()
}

/// Pointwise residuals of the model and linearized problems, the energy
/// closed form, and orthogonality of the forcing to the Jacobi fields.
pub fn bubble_suite(s: &Settings) -> Result<Vec<Check>> {
    let pt = s.point;
    let n = pt.n;
    let t = &s.tol;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let center: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-0.5..0.5)).collect();
    let bubbles = [Bubble::normalized(pt), Bubble::scaled(pt, 0.37, center)];
    let mut model = [0.0f64; 2];
    let mut lin = vec![[0.0f64; 2]; n];
    let mut alt: f64 = 0.0;
    for b in &bubbles {
        for _ in 0..s.points {
            let x = random_point(n, &mut rng);
            let r = b.residual_model(&x);
            model[0] = model[0].max(r.interior.relative());
            model[1] = model[1].max(r.boundary.relative());
            for (sidx, l) in lin.iter_mut().enumerate() {
                let r = b.residual_linearized(sidx, &x);
                l[0] = l[0].max(r.interior.relative());
                l[1] = l[1].max(r.boundary.relative());
            }
            alt = alt.max(qrel(b.jacobi(n - 1, &x), b.jacobi_dilation_alt(&x)));
        }
    }
    let count = s.points * bubbles.len();
    let mut out = vec![
        Check::at_most(format!("model problem, interior ({count} points)"), model[0], t.residual),
        Check::at_most(format!("model problem, boundary ({count} points)"), model[1], t.residual),
    ];
    for (sidx, l) in lin.iter().enumerate() {
        out.push(Check::at_most(format!("Jacobi field {}: interior", sidx + 1), l[0], t.residual));
        out.push(Check::at_most(format!("Jacobi field {}: boundary", sidx + 1), l[1], t.residual));
    }
    out.push(Check::at_most("dilation field: two closed forms agree", alt, t.residual));
    out.push(Check::at_most(
        "bubble energy: closed form vs quadrature",
        qrel(bubble_energy(&pt)?, bubble_energy_quadrature(&pt, 1e-9)?),
        t.energy,
    ));
    let mut worst = vec![0.0f64; n];
    let mut cache = RadialCache::new();
    for f in 0..s.frames {
        let fr = CurvatureFrame::random_gauge(n, s.seed.wrapping_mul(1000) + f as u64, 1.0);
        for o in forcing_orthogonality(&fr, &pt, 1e-10, &mut cache)? {
            let rel = if o.scale == 0.0 { o.value.abs() } else { o.value.abs() / o.scale };
            worst[o.index] = worst[o.index].max(rel);
        }
    }
    for (i, w) in worst.iter().enumerate() {
        out.push(Check::at_most(
            format!("forcing orthogonal to Jacobi field {} ({} frames)", i + 1, s.frames),
            *w,
            t.orthogonality,
        ));
    }
    Ok(out)
}

/// Closed-form invariants of the ball picture and the Steklov residuals of
/// the variant that annihilates both eigenfunctions. All variants are
/// returned for the report.
pub fn hyperbolic_suite(s: &Settings) -> Result<(Vec<Check>, Vec<VariantReport>)> {
    let hp = hyperbolic_picture(s.point.d())?;
    let mut out: Vec<Check> = hp
        .invariant_checks()
        .into_iter()
        .map(|c| Check::at_most(c.name, c.value, s.tol.closed_form.max(c.bound)))
        .collect();
    let variants = steklov_variants(&hp, s.point.n, s.points, s.seed, s.tol.steklov);
    let best = variants
        .iter()
        .min_by(|a, b| worst_residual(a).total_cmp(&worst_residual(b)))
        .expect("four variants");
    let tag = format!("{:?} operator, {:?} first mode", best.operator, best.first_mode);
    out.push(Check::at_least(
        "operator variants annihilating phi_0 and phi_1",
        variants.iter().filter(|v| v.annihilates).count() as f64,
        1.0,
    ));
    for (name, v) in [
        ("phi_0 interior", best.phi0_interior),
        ("phi_0 boundary", best.phi0_boundary),
        ("phi_1 interior", best.phi1_interior),
        ("phi_1 boundary", best.phi1_boundary),
    ] {
        out.push(Check::at_most(format!("{tag}: {name}"), v, s.tol.steklov));
    }
    Ok((out, variants))
}

fn worst_residual(v: &VariantReport) -> f64 {
    [v.phi0_interior, v.phi0_boundary, v.phi1_interior, v.phi1_boundary]
        .into_iter()
        .fold(0.0, f64::max)
}

//! Domain specifications, defining functions, boundary projection and the
//! signed distance.

use std::collections::HashSet;
use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix5, Vector5};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DfError, Result};
use crate::jet::{Complex2Point, Jet2, JetField, RealJet, C64};
use crate::program::FieldProgram;
use crate::sampling::{sunflower_annulus, Halton4};

pub type BBox = [[f64; 2]; 4];

/// Residual bound for the projection Newton iteration.
pub const PROJECTION_TOL: f64 = 1e-10;
const PROJECTION_MAX_ITER: usize = 100;
const CLOUD_SIZE: usize = 256;
const CLOUD_SEEDS: usize = 4;
/// Worm cutoff calibration: `η_c(a) = 1 + WORM_CUTOFF_EXCESS`.
pub const WORM_CUTOFF_EXCESS: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    Ball {
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bbox: Option<BBox>,
    },
    Ellipsoid {
        a1: f64,
        a2: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bbox: Option<BBox>,
    },
    /// The β-worm. `a` is the cutoff shape parameter, the point where the
    /// cutoff reaches `1 + 1e-3`; it defaults to `β - π/2 + 1`.
    Worm {
        beta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bbox: Option<BBox>,
    },
    Custom {
        rho: FieldProgram,
        bbox: BBox,
        /// Interior point `(Re z, Im z, Re w, Im w)` with `ρ < 0`.
        witness: [f64; 4],
    },
}

impl DomainSpec {
    pub fn ball(radius: f64) -> Self {
        DomainSpec::Ball { radius, bbox: None }
    }

    pub fn ellipsoid(a1: f64, a2: f64) -> Self {
        DomainSpec::Ellipsoid { a1, a2, bbox: None }
    }

    pub fn worm(beta: f64) -> Self {
        DomainSpec::Worm {
            beta,
            a: None,
            bbox: None,
        }
    }

    /// `(flat half-width β - π/2, a)` for a worm spec.
    pub fn worm_params(&self) -> Option<(f64, f64)> {
        match self {
            DomainSpec::Worm { beta, a, .. } => {
                let c = beta - FRAC_PI_2;
                Some((c, a.unwrap_or(c + 1.0)))
            }
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, what: &str| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(DfError::Spec(format!("{what} must be positive and finite, got {v}")))
            }
        };
        match self {
            DomainSpec::Ball { radius, .. } => pos(*radius, "ball radius")?,
            DomainSpec::Ellipsoid { a1, a2, .. } => {
                pos(*a1, "ellipsoid semi-axis a1")?;
                pos(*a2, "ellipsoid semi-axis a2")?;
            }
            DomainSpec::Worm { beta, .. } => {
                if !(beta.is_finite() && *beta > FRAC_PI_2) {
                    return Err(DfError::Spec(format!(
                        "worm domain requires beta > pi/2 (strict), got beta = {beta}"
                    )));
                }
                let (c, a) = self.worm_params().unwrap();
                if !(a.is_finite() && a > c) {
                    return Err(DfError::Spec(format!(
                        "worm cutoff parameter a = {a} must exceed beta - pi/2 = {c}"
                    )));
                }
            }
            DomainSpec::Custom { rho, witness, .. } => {
                rho.validate().map_err(|e| DfError::Spec(e.to_string()))?;
                if witness.iter().any(|v| !v.is_finite()) {
                    return Err(DfError::Spec("custom witness must be finite".into()));
                }
            }
        }
        let b = self.bbox();
        for k in 0..4 {
            if !(b[k][0].is_finite() && b[k][1].is_finite() && b[k][0] < b[k][1]) {
                return Err(DfError::Spec(format!("invalid bounding box axis {k}")));
            }
        }
        Ok(())
    }

    pub fn bbox(&self) -> BBox {
        match self {
            DomainSpec::Ball { radius, bbox } => {
                bbox.unwrap_or([[-radius * 1.05, radius * 1.05]; 4])
            }
            DomainSpec::Ellipsoid { a1, a2, bbox } => bbox.unwrap_or([
                [-a1 * 1.05, a1 * 1.05],
                [-a1 * 1.05, a1 * 1.05],
                [-a2 * 1.05, a2 * 1.05],
                [-a2 * 1.05, a2 * 1.05],
            ]),
            DomainSpec::Worm { bbox, .. } => bbox.unwrap_or_else(|| {
                let (_, a) = self.worm_params().unwrap();
                let r = (0.5 * a).exp();
                [[-2.0, 2.0], [-2.0, 2.0], [-r, r], [-r, r]]
            }),
            DomainSpec::Custom { bbox, .. } => *bbox,
        }
    }

    pub fn witness(&self) -> Complex2Point {
        match self {
            DomainSpec::Worm { .. } => Complex2Point::new(C64::new(-1.0, 0.0), C64::new(1.0, 0.0)),
            DomainSpec::Custom { witness, .. } => Complex2Point::from_real(*witness),
            _ => Complex2Point::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0)),
        }
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self, DomainSpec::Custom { .. })
    }
}

/// The defining function `ρ` with `Ω = {ρ < 0}`.
pub fn rho_program(spec: &DomainSpec) -> Result<FieldProgram> {
    use FieldProgram as F;
    spec.validate()?;
    Ok(match spec {
        DomainSpec::Ball { radius, .. } => {
            F::add(vec![F::Abs2Z, F::Abs2W, F::constant(-radius * radius)])
        }
        DomainSpec::Ellipsoid { a1, a2, .. } => F::add(vec![
            F::Abs2Z.scaled(1.0 / (a1 * a1)),
            F::Abs2W.scaled(1.0 / (a2 * a2)),
            F::constant(-1.0),
        ]),
        DomainSpec::Worm { .. } => {
            let (c, a) = spec.worm_params().unwrap();
            let theta = || F::log(F::Abs2W);
            let cutoff = F::Cutoff {
                arg: Box::new(theta()),
                flat: c,
                ramp: a - c,
                scale: (1.0 + WORM_CUTOFF_EXCESS) * 2f64.exp(),
            };
            // |z + e^{iθ}|² - 1 = |z|² + 2 (Re z cos θ + Im z sin θ)
            F::add(vec![
                F::Abs2Z,
                F::mul(vec![F::constant(2.0), F::ReZ, F::cos(theta())]),
                F::mul(vec![F::constant(2.0), F::ImZ, F::sin(theta())]),
                F::pow(cutoff, 2.0),
            ])
        }
        DomainSpec::Custom { rho, .. } => rho.clone(),
    })
}

/// A point on the boundary with the jet of `ρ` there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub p: Complex2Point,
    pub rho_jet: Jet2,
    /// `|ρ(p)|`
    pub foot_quality: f64,
}

impl BoundaryPoint {
    /// Outward unit normal in real coordinates.
    pub fn normal(&self) -> [f64; 4] {
        unit_normal(&self.rho_jet)
    }
}

/// Real gradient of a real field from its Wirtinger jet.
pub fn real_gradient(j: &Jet2) -> [f64; 4] {
    [
        2.0 * j.d[0].re,
        -2.0 * j.d[0].im,
        2.0 * j.d[1].re,
        -2.0 * j.d[1].im,
    ]
}

pub fn unit_normal(j: &Jet2) -> [f64; 4] {
    let g = real_gradient(j);
    let n = norm4(&g);
    [g[0] / n, g[1] / n, g[2] / n, g[3] / n]
}

pub fn norm4(v: &[f64; 4]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist2(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    (0..4).map(|k| (a[k] - b[k]).powi(2)).sum()
}

/// Offset `p + t * dir` in real coordinates.
pub fn offset(p: &Complex2Point, dir: &[f64; 4], t: f64) -> Complex2Point {
    let x = p.to_real();
    Complex2Point::from_real([
        x[0] + t * dir[0],
        x[1] + t * dir[1],
        x[2] + t * dir[2],
        x[3] + t * dir[3],
    ])
}

/// Result of a closest-point projection.
#[derive(Debug, Clone, Copy)]
pub struct Projection {
    pub foot: BoundaryPoint,
    pub sdist: f64,
}

/// A validated domain with its defining function and a coarse boundary cloud
/// used to seed projections.
#[derive(Debug, Clone)]
pub struct Domain {
    spec: DomainSpec,
    rho: FieldProgram,
    bbox: BBox,
    scale: f64,
    cloud: Vec<[f64; 4]>,
}

impl Domain {
    pub fn new(spec: DomainSpec) -> Result<Self> {
        let rho = rho_program(&spec)?;
        let witness = spec.witness();
        let w = rho
            .eval(&witness)
            .map_err(|e| DfError::Spec(format!("defining function fails at the witness: {e}")))?;
        if !(w < 0.0) {
            return Err(DfError::Spec(format!(
                "witness point is not interior (rho = {w})"
            )));
        }
        let mut dom = Domain {
            bbox: spec.bbox(),
            spec,
            rho,
            scale: w.abs().max(1.0),
            cloud: Vec::new(),
        };
        dom.cloud = dom.build_cloud();
        if dom.cloud.is_empty() {
            return Err(DfError::Spec("could not locate any boundary point in the bounding box".into()));
        }
        Ok(dom)
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn rho(&self) -> &FieldProgram {
        &self.rho
    }

    pub fn bbox(&self) -> &BBox {
        &self.bbox
    }

    /// Reference magnitude of `ρ` used to scale residual bounds.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn rho_jet(&self, p: &Complex2Point) -> Result<Jet2> {
        self.rho.jet2(p)
    }

    fn build_cloud(&self) -> Vec<[f64; 4]> {
        let mut halton = Halton4::new(0x5eed);
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut attempts = 0;
        while out.len() < CLOUD_SIZE && attempts < 100 * CLOUD_SIZE {
            attempts += 1;
            let q = halton.next_in_box(&self.bbox);
            if let Ok(p) = self.gradient_flow_foot(&Complex2Point::from_real(q)) {
                let x = p.to_real();
                if self.in_box(&x, 0.5) && seen.insert(key(&x, 1e-6)) {
                    out.push(x);
                }
            }
        }
        out
    }

    fn in_box(&self, x: &[f64; 4], slack: f64) -> bool {
        (0..4).all(|k| {
            let w = self.bbox[k][1] - self.bbox[k][0];
            x[k] >= self.bbox[k][0] - slack * w && x[k] <= self.bbox[k][1] + slack * w
        })
    }

    /// Newton iteration `p <- p - ρ ∇ρ / |∇ρ|²` onto `{ρ = 0}`.
    pub fn gradient_flow_foot(&self, q: &Complex2Point) -> Result<Complex2Point> {
        let mut x = q.to_real();
        for _ in 0..60 {
            let j = self.rho.real_jet_at(&x)?;
            let g2: f64 = j.grad.iter().map(|g| g * g).sum();
            if !(g2 > 1e-24) {
                return Err(DfError::DegenerateGradient(g2.sqrt()));
            }
            if j.val.abs() <= PROJECTION_TOL * self.scale * 1e-2 {
                return Ok(Complex2Point::from_real(x));
            }
            let mut step = j.val / g2;
            let cap = 0.25 * norm4(&self.box_extent());
            let len = step.abs() * g2.sqrt();
            if len > cap {
                step *= cap / len;
            }
            for k in 0..4 {
                x[k] -= step * j.grad[k];
            }
        }
        let j = self.rho.real_jet_at(&x)?;
        if j.val.abs() <= PROJECTION_TOL * self.scale {
            Ok(Complex2Point::from_real(x))
        } else {
            Err(DfError::Convergence {
                residual: j.val.abs(),
            })
        }
    }

    fn box_extent(&self) -> [f64; 4] {
        [
            self.bbox[0][1] - self.bbox[0][0],
            self.bbox[1][1] - self.bbox[1][0],
            self.bbox[2][1] - self.bbox[2][0],
            self.bbox[3][1] - self.bbox[3][0],
        ]
    }

    /// Newton iteration on the Lagrange system `p - q = λ∇ρ(p)`, `ρ(p) = 0`
    /// from the seed `p0`. Returns the foot point and its residual.
    fn lagrange_newton(&self, q: &[f64; 4], p0: &[f64; 4]) -> Result<([f64; 4], f64)> {
        let mut p = *p0;
        let mut j = self.rho.real_jet_at(&p)?;
        let g2: f64 = j.grad.iter().map(|g| g * g).sum();
        if !(g2 > 0.0) {
            return Err(DfError::DegenerateGradient(0.0));
        }
        let mut lam = (0..4).map(|k| (p[k] - q[k]) * j.grad[k]).sum::<f64>() / g2;
        let residual = |p: &[f64; 4], lam: f64, j: &RealJet| -> (Vector5<f64>, f64) {
            let mut f = Vector5::zeros();
            for k in 0..4 {
                f[k] = p[k] - q[k] - lam * j.grad[k];
            }
            f[4] = j.val;
            let stat = (0..4).map(|k| f[k] * f[k]).sum::<f64>().sqrt();
            let gn = j.grad_norm().max(1e-300);
            (f, stat.max(j.val.abs() / gn))
        };
        let (mut f, mut r) = residual(&p, lam, &j);
        let mut converged_at: Option<usize> = None;
        for it in 0..PROJECTION_MAX_ITER {
            if r <= PROJECTION_TOL {
                match converged_at {
                    None => converged_at = Some(it),
                    Some(first) if it - first >= 2 => break,
                    _ => {}
                }
            }
            let mut jac = Matrix5::zeros();
            for a in 0..4 {
                for b in 0..4 {
                    jac[(a, b)] = if a == b { 1.0 } else { 0.0 } - lam * j.hess[a][b];
                }
                jac[(a, 4)] = -j.grad[a];
                jac[(4, a)] = j.grad[a];
            }
            let Some(delta) = jac.lu().solve(&(-f)) else {
                break;
            };
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let mut pn = p;
                for k in 0..4 {
                    pn[k] += t * delta[k];
                }
                let ln = lam + t * delta[4];
                if let Ok(jn) = self.rho.real_jet_at(&pn) {
                    let (fn_, rn) = residual(&pn, ln, &jn);
                    if fn_.norm() < f.norm() || (converged_at.is_some() && rn <= r) {
                        p = pn;
                        lam = ln;
                        j = jn;
                        f = fn_;
                        r = rn;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if r <= PROJECTION_TOL {
            Ok((p, r))
        } else {
            Err(DfError::Convergence { residual: r })
        }
    }

    fn foot_from_real(&self, p: &[f64; 4]) -> Result<BoundaryPoint> {
        let cp = Complex2Point::from_real(*p);
        let jet = self.rho.jet2(&cp)?;
        let s = jet.wirtinger_norm();
        if !(s >= 1e-12) {
            return Err(DfError::DegenerateGradient(2.0 * s));
        }
        Ok(BoundaryPoint {
            p: cp,
            rho_jet: jet,
            foot_quality: jet.val.abs(),
        })
    }

    fn finish(&self, q: &Complex2Point, p: &[f64; 4]) -> Result<Projection> {
        let foot = self.foot_from_real(p)?;
        let rq = self.rho.eval(q)?;
        let d = dist2(&q.to_real(), p).sqrt();
        let sdist = if rq > 0.0 {
            d
        } else if rq < 0.0 {
            -d
        } else {
            0.0
        };
        Ok(Projection { foot, sdist })
    }

    /// Closest-point projection onto `{ρ = 0}` with the signed distance.
    pub fn project_to_boundary(&self, q: &Complex2Point) -> Result<Projection> {
        let qx = q.to_real();
        let mut seeds: Vec<[f64; 4]> = Vec::with_capacity(CLOUD_SEEDS + 1);
        if let Ok(p) = self.gradient_flow_foot(q) {
            seeds.push(p.to_real());
        }
        let mut near: Vec<(f64, usize)> = self
            .cloud
            .iter()
            .enumerate()
            .map(|(i, c)| (dist2(c, &qx), i))
            .collect();
        near.sort_by(|a, b| a.0.total_cmp(&b.0));
        seeds.extend(near.iter().take(CLOUD_SEEDS).map(|(_, i)| self.cloud[*i]));

        let mut best: Option<([f64; 4], f64)> = None;
        let mut best_residual = f64::INFINITY;
        for s in &seeds {
            match self.lagrange_newton(&qx, s) {
                Ok((p, _)) => {
                    let d = dist2(&p, &qx);
                    if best.map_or(true, |(_, bd)| d < bd) {
                        best = Some((p, d));
                    }
                }
                Err(DfError::Convergence { residual }) => {
                    best_residual = best_residual.min(residual)
                }
                Err(_) => {}
            }
        }
        match best {
            Some((p, _)) => self.finish(q, &p),
            None => Err(DfError::Convergence {
                residual: best_residual,
            }),
        }
    }

    /// Projection warm-started from a nearby foot point, falling back to the
    /// seeded search when the warm start fails.
    pub fn project_from(&self, q: &Complex2Point, hint: &Complex2Point) -> Result<Projection> {
        match self.lagrange_newton(&q.to_real(), &hint.to_real()) {
            Ok((p, _)) => self.finish(q, &p),
            Err(_) => self.project_to_boundary(q),
        }
    }

    /// Signed distance `δ` at `q`.
    pub fn sdist(&self, q: &Complex2Point) -> Result<f64> {
        Ok(self.project_to_boundary(q)?.sdist)
    }

    /// Jet of the signed distance at `q` with finite-difference step `h`
    /// (default `1e-4 (1 + |δ|)`).
    pub fn delta_jet(&self, q: &Complex2Point, h: Option<f64>) -> Result<Jet2> {
        Ok(self.delta_jet_full(q, h, None)?.0)
    }

    /// Jet of `δ` together with the foot point used, optionally warm-started.
    pub fn delta_jet_full(
        &self,
        q: &Complex2Point,
        h: Option<f64>,
        hint: Option<&Complex2Point>,
    ) -> Result<(Jet2, Complex2Point)> {
        let center = match hint {
            Some(hp) => self.project_from(q, hp)?,
            None => self.project_to_boundary(q)?,
        };
        let h = h.unwrap_or(1e-4 * (1.0 + center.sdist.abs()));
        let floor = 64.0 * f64::EPSILON * (1.0 + q.norm());
        if !(h > floor) {
            return Err(DfError::Step { step: h, floor });
        }
        let foot0 = center.foot.p;
        let f0 = foot0.to_real();
        let limit = 10.0 * h;
        let normal_at = |t: f64, k: usize| -> Result<[f64; 4]> {
            let mut e = [0.0; 4];
            e[k] = 1.0;
            let qs = offset(q, &e, t);
            let pr = self.project_from(&qs, &foot0)?;
            let spread = dist2(&pr.foot.p.to_real(), &f0).sqrt();
            if spread > limit {
                return Err(DfError::Tubular { spread, limit });
            }
            Ok(pr.foot.normal())
        };
        let mut hess = [[0.0; 4]; 4];
        for k in 0..4 {
            let gp = normal_at(h, k)?;
            let gm = normal_at(-h, k)?;
            let gp2 = normal_at(0.5 * h, k)?;
            let gm2 = normal_at(-0.5 * h, k)?;
            for m in 0..4 {
                let coarse = (gp[m] - gm[m]) / (2.0 * h);
                let fine = (gp2[m] - gm2[m]) / h;
                hess[k][m] = (4.0 * fine - coarse) / 3.0;
            }
        }
        for a in 0..4 {
            for b in (a + 1)..4 {
                let s = 0.5 * (hess[a][b] + hess[b][a]);
                hess[a][b] = s;
                hess[b][a] = s;
            }
        }
        let jet = RealJet {
            val: center.sdist,
            grad: center.foot.normal(),
            hess,
        };
        Ok((jet.to_wirtinger(), foot0))
    }

    /// `n` boundary points from a seeded Halton sequence in the bounding box,
    /// each projected to the boundary.
    pub fn sample_boundary(&self, n: usize, seed: u64) -> Result<Vec<BoundaryPoint>> {
        if n == 0 {
            return Err(DfError::Spec("sample count must be at least 1".into()));
        }
        let mut halton = Halton4::new(seed);
        let mut out: Vec<BoundaryPoint> = Vec::with_capacity(n);
        let mut seen = HashSet::new();
        let mut attempts = 0usize;
        let max_attempts = 100 * n;
        while out.len() < n && attempts < max_attempts {
            let batch = (2 * (n - out.len())).max(16).min(max_attempts - attempts);
            let qs: Vec<Complex2Point> = (0..batch)
                .map(|_| Complex2Point::from_real(halton.next_in_box(&self.bbox)))
                .collect();
            attempts += batch;
            let projected: Vec<Option<BoundaryPoint>> = qs
                .par_iter()
                .map(|q| self.project_to_boundary(q).ok().map(|pr| pr.foot))
                .collect();
            for bp in projected.into_iter().flatten() {
                if out.len() >= n {
                    break;
                }
                if bp.foot_quality > PROJECTION_TOL * self.scale {
                    continue;
                }
                if seen.insert(key(&bp.p.to_real(), 1e-9)) {
                    out.push(bp);
                }
            }
        }
        if out.len() < n {
            return Err(DfError::Spec(format!(
                "found only {} distinct boundary points of {} requested in {} attempts",
                out.len(),
                n,
                max_attempts
            )));
        }
        Ok(out)
    }

    /// Boundary points on the Levi-flat structure known from the domain
    /// geometry: the annulus `{z = 0, |log|w|²| <= β - π/2}` of the worm,
    /// sampled area-uniformly. Empty for other kinds.
    pub fn leviflat_candidates(&self, n: usize, seed: u64) -> Result<Vec<BoundaryPoint>> {
        match self.spec.worm_params() {
            Some((c, _)) => {
                let r_in = (-0.5 * c).exp();
                let r_out = (0.5 * c).exp();
                sunflower_annulus(n, r_in, r_out, seed)
                    .into_iter()
                    .map(|(x, y)| {
                        let p = Complex2Point::new(C64::new(0.0, 0.0), C64::new(x, y));
                        let jet = self.rho.jet2(&p)?;
                        Ok(BoundaryPoint {
                            p,
                            rho_jet: jet,
                            foot_quality: jet.val.abs(),
                        })
                    })
                    .collect()
            }
            None => Ok(Vec::new()),
        }
    }

    /// Point at depth `d` inside along the inward normal of `bp`, with `d`
    /// halved until `ρ < 0` there.
    pub fn inward_point(&self, bp: &BoundaryPoint, depth: f64) -> Result<Complex2Point> {
        let n = bp.normal();
        let mut d = depth;
        for _ in 0..60 {
            let q = offset(&bp.p, &n, -d);
            if let Ok(v) = self.rho.eval(&q) {
                if v < 0.0 {
                    return Ok(q);
                }
            }
            d *= 0.5;
        }
        Err(DfError::Domain("no interior point along the inward normal".into()))
    }
}

fn key(x: &[f64; 4], res: f64) -> [i64; 4] {
    [
        (x[0] / res).round() as i64,
        (x[1] / res).round() as i64,
        (x[2] / res).round() as i64,
        (x[3] / res).round() as i64,
    ]
}

/// `δ` as a field, warm-started from a fixed foot point so that nearby
/// evaluations stay on the same sheet of the projection.
pub struct DeltaField<'a> {
    pub domain: &'a Domain,
    pub hint: Complex2Point,
    pub h: Option<f64>,
}

impl JetField for DeltaField<'_> {
    fn jet2(&self, p: &Complex2Point) -> Result<Jet2> {
        Ok(self.domain.delta_jet_full(p, self.h, Some(&self.hint))?.0)
    }
}

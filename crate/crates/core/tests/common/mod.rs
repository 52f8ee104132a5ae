//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use dfindex::conditions::ConditionOptions;
use dfindex::domain::offset;
use dfindex::frame::{frame_at, HermitianForm2, LeviFlatSample};
use dfindex::jet::holomorphic_directions;
use dfindex::{Complex2Point, Domain, FieldProgram, Jet2, C64};
use rand::Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

// ---------------------------------------------------------------------------
// Random field programs

fn leaf<R: Rng>(rng: &mut R) -> FieldProgram {
    use FieldProgram as F;
    match rng.gen_range(0..7) {
        0 => F::ReZ,
        1 => F::ImZ,
        2 => F::ReW,
        3 => F::ImW,
        4 => F::Abs2Z,
        5 => F::Abs2W,
        _ => F::constant(rng.gen_range(-1.0..1.0)),
    }
}

/// A random well-conditioned program on `[-1, 1]^4`: logarithms, quotients
/// and powers only see arguments bounded below by 1.
pub fn random_program<R: Rng>(rng: &mut R, depth: usize) -> FieldProgram {
    use FieldProgram as F;
    if depth == 0 {
        return leaf(rng);
    }
    let sub = |rng: &mut R| random_program(rng, depth - 1);
    let positive = |rng: &mut R, a: FieldProgram| {
        let shift = rng.gen_range(1.0..2.0);
        F::add(vec![F::constant(shift), F::mul(vec![a.clone(), a])])
    };
    match rng.gen_range(0..11) {
        0 => F::add(vec![sub(rng), sub(rng), sub(rng)]),
        1 => F::mul(vec![sub(rng), sub(rng)]),
        2 => F::sub(sub(rng), sub(rng)),
        3 => {
            let d = sub(rng);
            F::div(sub(rng), positive(rng, d))
        }
        4 => F::exp(sub(rng).scaled(0.5)),
        5 => {
            let a = sub(rng);
            F::log(positive(rng, a))
        }
        6 => F::cos(sub(rng)),
        7 => F::sin(sub(rng)),
        8 => {
            let a = sub(rng);
            let e = rng.gen_range(0.5..2.5);
            F::pow(positive(rng, a), e)
        }
        9 => F::Cutoff {
            arg: Box::new(sub(rng)),
            flat: 0.2,
            ramp: 1.0,
            scale: 1.0,
        },
        _ => leaf(rng),
    }
}

// ---------------------------------------------------------------------------
// Finite-difference jets

/// Real gradient and Hessian of `f` by central differences with two
/// Richardson steps.
pub fn fd_real<F: Fn(&[f64; 4]) -> f64>(f: F, x: &[f64; 4], h: f64) -> ([f64; 4], [[f64; 4]; 4]) {
    let at = |d: &[(usize, f64)]| {
        let mut y = *x;
        for &(k, t) in d {
            y[k] += t;
        }
        f(&y)
    };
    let f0 = f(x);
    let grad_step = |s: f64| {
        let mut g = [0.0; 4];
        for k in 0..4 {
            g[k] = (at(&[(k, s)]) - at(&[(k, -s)])) / (2.0 * s);
        }
        g
    };
    let hess_step = |s: f64| {
        let mut hm = [[0.0; 4]; 4];
        for i in 0..4 {
            hm[i][i] = (at(&[(i, s)]) - 2.0 * f0 + at(&[(i, -s)])) / (s * s);
            for j in (i + 1)..4 {
                let v = (at(&[(i, s), (j, s)]) - at(&[(i, s), (j, -s)]) - at(&[(i, -s), (j, s)])
                    + at(&[(i, -s), (j, -s)]))
                    / (4.0 * s * s);
                hm[i][j] = v;
                hm[j][i] = v;
            }
        }
        hm
    };
    // two Richardson levels on steps h, h/2, h/4
    let (g1, g2, g3) = (grad_step(h), grad_step(0.5 * h), grad_step(0.25 * h));
    let (h1, h2, h3) = (hess_step(h), hess_step(0.5 * h), hess_step(0.25 * h));
    let rich = |a: f64, b: f64, c: f64| {
        let (ab, bc) = ((4.0 * b - a) / 3.0, (4.0 * c - b) / 3.0);
        (16.0 * bc - ab) / 15.0
    };
    let mut g = [0.0; 4];
    let mut hm = [[0.0; 4]; 4];
    for i in 0..4 {
        g[i] = rich(g1[i], g2[i], g3[i]);
        for j in 0..4 {
            hm[i][j] = rich(h1[i][j], h2[i][j], h3[i][j]);
        }
    }
    (g, hm)
}

/// Wirtinger jet from a real value, gradient and Hessian in the coordinates
/// `(x1, y1, x2, y2)`.
pub fn wirtinger_from_real(val: f64, g: &[f64; 4], hm: &[[f64; 4]; 4]) -> Jet2 {
    let x = |i: usize| 2 * i;
    let y = |i: usize| 2 * i + 1;
    let mut j = Jet2 {
        val,
        d: [c(0.0, 0.0); 2],
        h_mix: [[c(0.0, 0.0); 2]; 2],
        h_hol: [[c(0.0, 0.0); 2]; 2],
    };
    for a in 0..2 {
        j.d[a] = c(0.5 * g[x(a)], -0.5 * g[y(a)]);
        for b in 0..2 {
            j.h_mix[a][b] = c(
                0.25 * (hm[x(a)][x(b)] + hm[y(a)][y(b)]),
                0.25 * (hm[x(a)][y(b)] - hm[y(a)][x(b)]),
            );
            j.h_hol[a][b] = c(
                0.25 * (hm[x(a)][x(b)] - hm[y(a)][y(b)]),
                -0.25 * (hm[x(a)][y(b)] + hm[y(a)][x(b)]),
            );
        }
    }
    j
}

/// Largest entry-wise difference between two jets.
pub fn jet_diff(a: &Jet2, b: &Jet2) -> f64 {
    let mut m = (a.val - b.val).abs();
    for i in 0..2 {
        m = m.max((a.d[i] - b.d[i]).norm());
        for k in 0..2 {
            m = m.max((a.h_mix[i][k] - b.h_mix[i][k]).norm());
            m = m.max((a.h_hol[i][k] - b.h_hol[i][k]).norm());
        }
    }
    m
}

/// Largest entry magnitude of a jet.
pub fn jet_scale(a: &Jet2) -> f64 {
    let mut m = a.val.abs();
    for i in 0..2 {
        m = m.max(a.d[i].norm());
        for k in 0..2 {
            m = m.max(a.h_mix[i][k].norm()).max(a.h_hol[i][k].norm());
        }
    }
    m
}

// ---------------------------------------------------------------------------
// Symbolic polynomials in (x1, y1, x2, y2)

#[derive(Debug, Clone)]
pub struct Poly(pub Vec<(f64, [u32; 4])>);

impl Poly {
    pub fn program(&self) -> FieldProgram {
        use FieldProgram as F;
        let vars = [F::ReZ, F::ImZ, F::ReW, F::ImW];
        F::add(
            self.0
                .iter()
                .map(|(k, e)| {
                    let mut factors = vec![F::constant(*k)];
                    for v in 0..4 {
                        for _ in 0..e[v] {
                            factors.push(vars[v].clone());
                        }
                    }
                    F::mul(factors)
                })
                .collect(),
        )
    }

    pub fn eval(&self, x: &[f64; 4]) -> f64 {
        self.0
            .iter()
            .map(|(k, e)| k * (0..4).map(|v| x[v].powi(e[v] as i32)).product::<f64>())
            .sum()
    }

    /// Mixed partial derivative with multiplicities `m`.
    pub fn partial(&self, m: [u32; 4]) -> Poly {
        let mut out = Vec::new();
        for (k, e) in &self.0 {
            let mut k = *k;
            let mut e = *e;
            for v in 0..4 {
                for _ in 0..m[v] {
                    if e[v] == 0 {
                        k = 0.0;
                        break;
                    }
                    k *= e[v] as f64;
                    e[v] -= 1;
                }
            }
            if k != 0.0 {
                out.push((k, e));
            }
        }
        Poly(out)
    }
}

/// A first-order complex operator `Σ a_v ∂_v`.
pub type Op1 = [C64; 4];

/// `∂_{z_i} = ½(∂_x - i ∂_y)` and `∂_{z̄_i} = ½(∂_x + i ∂_y)`.
pub fn dz(i: usize, bar: bool) -> Op1 {
    let mut o = [c(0.0, 0.0); 4];
    o[2 * i] = c(0.5, 0.0);
    o[2 * i + 1] = c(0.0, if bar { 0.5 } else { -0.5 });
    o
}

/// `Σ V_k ∂_{z_k}`.
pub fn dv(v: [C64; 2]) -> Op1 {
    let (a, b) = (dz(0, false), dz(1, false));
    let mut o = [c(0.0, 0.0); 4];
    for k in 0..4 {
        o[k] = v[0] * a[k] + v[1] * b[k];
    }
    o
}

/// Applies the product of first-order operators to `p` and evaluates at `x`.
pub fn apply_ops(p: &Poly, ops: &[Op1], x: &[f64; 4]) -> C64 {
    fn rec(p: &Poly, ops: &[Op1], m: [u32; 4], coef: C64, x: &[f64; 4]) -> C64 {
        match ops.split_first() {
            None => coef * p.partial(m).eval(x),
            Some((op, rest)) => {
                let mut s = c(0.0, 0.0);
                for v in 0..4 {
                    if op[v] != c(0.0, 0.0) {
                        let mut m2 = m;
                        m2[v] += 1;
                        s += rec(p, rest, m2, coef * op[v], x);
                    }
                }
                s
            }
        }
    }
    rec(p, ops, [0; 4], c(1.0, 0.0), x)
}

// ---------------------------------------------------------------------------
// Hermitian positivity by brute force

/// Minimum of `v* M v` over unit vectors `v = (cos t, sin t e^{iφ})` for
/// `M = [[A, B], [conj B, D]]`: a 360 × 100 grid in `(φ, t)` followed by
/// four rounds of local grid refinement around the best cell.
pub fn grid_min(h: &HermitianForm2, cos_phi: &[f64], sin_phi: &[f64]) -> f64 {
    let q = |t: f64, cp: f64, sp: f64| {
        let (ct, st) = (t.cos(), t.sin());
        // 2 Re(conj(a) B b) with a = cos t, b = sin t e^{iφ}
        ct * ct * h.a_ll + st * st * h.a_nn + 2.0 * ct * st * (h.a_ln.re * cp - h.a_ln.im * sp)
    };
    let nt = 100;
    let dt = std::f64::consts::FRAC_PI_2 / (nt - 1) as f64;
    let dphi = std::f64::consts::TAU / cos_phi.len() as f64;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for k in 0..nt {
        let t = k as f64 * dt;
        for (m, (&cp, &sp)) in cos_phi.iter().zip(sin_phi).enumerate() {
            let v = q(t, cp, sp);
            if v < best.0 {
                best = (v, t, m as f64 * dphi);
            }
        }
    }
    let (mut st, mut sp) = (dt, dphi);
    for _ in 0..4 {
        let (_, t0, p0) = best;
        for a in -10..=10 {
            let t = (t0 + a as f64 * st / 10.0).clamp(0.0, std::f64::consts::FRAC_PI_2);
            for b in -10..=10 {
                let p = p0 + b as f64 * sp / 10.0;
                let v = q(t, p.cos(), p.sin());
                if v < best.0 {
                    best = (v, t, p);
                }
            }
        }
        st /= 10.0;
        sp /= 10.0;
    }
    best.0
}

pub fn phase_tables() -> (Vec<f64>, Vec<f64>) {
    let phis: Vec<f64> = (0..360).map(|k| k as f64 * std::f64::consts::TAU / 360.0).collect();
    (phis.iter().map(|p| p.cos()).collect(), phis.iter().map(|p| p.sin()).collect())
}

pub fn random_form<R: Rng>(rng: &mut R) -> HermitianForm2 {
    let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
    let a = rng.gen_range(-1.0..1.0) * scale;
    let d = rng.gen_range(-1.0..1.0) * scale;
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let modulus = if rng.gen_bool(0.3) && a * d > 0.0 {
        // near the boundary of the cone: |B|² = AD (1 + ε)
        (a * d * (1.0 + rng.gen_range(-1e-6..1e-6))).sqrt()
    } else {
        rng.gen_range(0.0..1.0) * scale
    };
    HermitianForm2::new(a, d, C64::from_polar(modulus, phase))
}

// ---------------------------------------------------------------------------
// Frames and torsion from raw jets

/// `Σ X_i conj(Y_j) f_{z_i z̄_j}`, written out independently of the library.
pub fn hess(f: &Jet2, x: &[C64; 2], y: &[C64; 2]) -> C64 {
    let mut s = c(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            s += x[i] * y[j].conj() * f.h_mix[i][j];
        }
    }
    s
}

/// `(L, N)` of a real jet: `L = (f_w, -f_z)/s`, `N = conj(f_z, f_w)/s`.
pub fn ln_vectors(f: &Jet2) -> ([C64; 2], [C64; 2]) {
    let s = (f.d[0].norm_sqr() + f.d[1].norm_sqr()).sqrt();
    ([f.d[1] / s, -f.d[0] / s], [f.d[0].conj() / s, f.d[1].conj() / s])
}

/// Unreduced torsion `‖∇f‖ / Hess_f(N, L)` of a real jet.
pub fn unreduced_torsion(f: &Jet2) -> C64 {
    let (l, n) = ln_vectors(f);
    let grad = 2.0 * (f.d[0].norm_sqr() + f.d[1].norm_sqr()).sqrt();
    c(grad, 0.0) / hess(f, &n, &l)
}

/// Jet of `f e^g` by the product and chain rules on Wirtinger jets.
pub fn times_exp(f: &Jet2, g: &Jet2) -> Jet2 {
    let e = g.val.exp();
    let mut out = *f;
    out.val = f.val * e;
    for i in 0..2 {
        out.d[i] = (f.d[i] + g.d[i] * f.val) * e;
        for j in 0..2 {
            let gi = g.d[i];
            let gjb = g.d[j].conj();
            let gj = g.d[j];
            out.h_mix[i][j] = (f.h_mix[i][j]
                + f.d[i] * gjb
                + gi * f.d[j].conj()
                + (g.h_mix[i][j] + gi * gjb) * f.val)
                * e;
            out.h_hol[i][j] = (f.h_hol[i][j]
                + f.d[i] * gj
                + gi * f.d[j]
                + (g.h_hol[i][j] + gi * gj) * f.val)
                * e;
        }
    }
    out
}

/// The analytic reduced torsion of the worm on its Levi-flat annulus,
/// `-2i w̄ e^{-iθ}` with `θ = log|w|²`.
pub fn worm_annulus_torsion(w: C64) -> C64 {
    let th = w.norm_sqr().ln();
    c(0.0, -2.0) * w.conj() * C64::from_polar(1.0, -th)
}

// ---------------------------------------------------------------------------
// Raw recomputation of the condition ingredients (ψ ≡ 0) by finite
// differences of interior δ jets and frames.

/// `V f` or `V̄ f` of a complex field by central differences with one
/// Richardson step.
pub fn along_fd<F: Fn(&Complex2Point) -> C64>(f: &F, p: &Complex2Point, v: [C64; 2], bar: bool, h: f64) -> C64 {
    let (u, w) = holomorphic_directions(v);
    let d = |dir: &[f64; 4], s: f64| (f(&offset(p, dir, s)) - f(&offset(p, dir, -s))) / (2.0 * s);
    let rich = |dir: &[f64; 4]| (d(dir, 0.5 * h) * 4.0 - d(dir, h)) / 3.0;
    let (du, dw) = (rich(&u), rich(&w));
    if bar {
        (du - C64::i() * dw) * 0.5
    } else {
        (du + C64::i() * dw) * 0.5
    }
}

/// Covariant scalars by finite differences of the frame of `ρ`, in the
/// order `g(∇_N L̄, N̄)`, `g(∇_L̄ L, L)`, `g([N, L], N)`, `g(∇_L̄ N, N)`.
pub fn raw_covariant_scalars(domain: &Domain, p: &Complex2Point, h: f64) -> [C64; 4] {
    let frame = |q: &Complex2Point| ln_vectors(&domain.rho_jet(q).unwrap());
    let (l, n) = frame(p);
    let lc = |i: usize| move |q: &Complex2Point| frame(q).0[i];
    let nc = |i: usize| move |q: &Complex2Point| frame(q).1[i];
    let mut s = [c(0.0, 0.0); 4];
    for i in 0..2 {
        let conj_l = |q: &Complex2Point| frame(q).0[i].conj();
        s[0] += along_fd(&conj_l, p, n, false, h) * n[i] * 0.5;
        s[1] += along_fd(&lc(i), p, l, true, h) * l[i].conj() * 0.5;
        let bracket = along_fd(&lc(i), p, n, false, h) - along_fd(&nc(i), p, l, false, h);
        s[2] += bracket * n[i].conj() * 0.5;
        s[3] += along_fd(&nc(i), p, l, true, h) * n[i].conj() * 0.5;
    }
    s
}

/// Raw ingredients at one Levi-flat sample with ψ ≡ 0.
#[derive(Debug, Clone, Copy)]
pub struct RawPoint {
    /// `‖∇δ‖ / Hess_δ(N, L)`
    pub torsion: C64,
    /// `L` of the torsion.
    pub l_torsion: C64,
    /// `Hess_δ(N, L)`
    pub hess_nl: C64,
    /// `-L Hess_δ(N, L) + Hess_δ(N, ∇_L̄ L)`
    pub c2_term: C64,
}

/// Evaluates the raw ingredients at depths `ε` and `ε/2` below the sample
/// and extrapolates linearly to the boundary.
pub fn raw_point(domain: &Domain, s: &LeviFlatSample, opts: &ConditionOptions, fd_h: f64) -> RawPoint {
    let hint = s.bp.p;
    let delta = |q: &Complex2Point| domain.delta_jet_full(q, opts.delta_h, Some(&hint)).unwrap().0;
    let g = |q: &Complex2Point| {
        let j = delta(q);
        let (l, n) = ln_vectors(&j);
        hess(&j, &n, &l)
    };
    let tau = |q: &Complex2Point| unreduced_torsion(&delta(q));
    let (l0, _) = ln_vectors(&s.bp.rho_jet);
    let nrm = s.bp.normal();
    let at_depth = |d: f64| -> RawPoint {
        let q = offset(&s.bp.p, &nrm, -d);
        let j = delta(&q);
        let (l, n) = ln_vectors(&j);
        let mut dlbar_l = [c(0.0, 0.0); 2];
        for i in 0..2 {
            let li = move |x: &Complex2Point| ln_vectors(&delta(x)).0[i];
            dlbar_l[i] = along_fd(&li, &q, l, true, fd_h);
        }
        RawPoint {
            torsion: tau(&q),
            l_torsion: along_fd(&tau, &q, l0, false, fd_h),
            hess_nl: hess(&j, &n, &l),
            c2_term: -along_fd(&g, &q, l0, false, fd_h) + hess(&j, &n, &dlbar_l),
        }
    };
    let (a, b) = (at_depth(0.5 * opts.eps_b), at_depth(opts.eps_b));
    RawPoint {
        torsion: a.torsion * 2.0 - b.torsion,
        l_torsion: a.l_torsion * 2.0 - b.l_torsion,
        hess_nl: a.hess_nl * 2.0 - b.hess_nl,
        c2_term: a.c2_term * 2.0 - b.c2_term,
    }
}

/// Relative difference with a floor of 1 on the scale.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Relative difference of complex numbers, scaled by the larger modulus.
pub fn crel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

/// Frame of a jet as computed by the library, for tests that need the
/// derivative blocks.
pub fn lib_frame(j: &Jet2) -> dfindex::Frame {
    frame_at(j).unwrap()
}

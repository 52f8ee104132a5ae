//! Second-order jets of real scalar fields on C².
//!
//! Fields are differentiated in the real coordinates `(x1, y1, x2, y2)` with
//! `z = x1 + i y1`, `w = x2 + i y2`, and converted to Wirtinger form with
//! [`RealJet::to_wirtinger`]:
//!
//! ```text
//! f_z      = (f_x - i f_y) / 2
//! f_{z z̄}  = (f_xx + f_yy + i (f_xy' - f_yx')) / 4      (mixed block)
//! f_{z z}  = (f_xx - f_yy - i (f_xy' + f_yx')) / 4      (holomorphic block)
//! ```

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DfError, Result};

pub type C64 = Complex64;

/// A point `(z, w)` of C².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Complex2Point {
    pub z: C64,
    pub w: C64,
}

impl Complex2Point {
    pub fn new(z: C64, w: C64) -> Self {
        Self { z, w }
    }

    pub fn from_real(x: [f64; 4]) -> Self {
        Self {
            z: C64::new(x[0], x[1]),
            w: C64::new(x[2], x[3]),
        }
    }

    pub fn to_real(&self) -> [f64; 4] {
        [self.z.re, self.z.im, self.w.re, self.w.im]
    }

    pub fn is_finite(&self) -> bool {
        self.to_real().iter().all(|v| v.is_finite())
    }

    pub fn norm(&self) -> f64 {
        (self.z.norm_sqr() + self.w.norm_sqr()).sqrt()
    }

    pub fn coord(&self, i: usize) -> C64 {
        if i == 0 {
            self.z
        } else {
            self.w
        }
    }
}

/// Value, gradient and Hessian of a real field in real coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealJet {
    pub val: f64,
    pub grad: [f64; 4],
    pub hess: [[f64; 4]; 4],
}

impl RealJet {
    pub fn constant(val: f64) -> Self {
        Self {
            val,
            grad: [0.0; 4],
            hess: [[0.0; 4]; 4],
        }
    }

    /// The coordinate function `x_k`.
    pub fn coordinate(x: &[f64; 4], k: usize) -> Self {
        let mut j = Self::constant(x[k]);
        j.grad[k] = 1.0;
        j
    }

    /// `x_k² + x_{k+1}²`, i.e. `|z|²` for `k = 0` and `|w|²` for `k = 2`.
    pub fn abs2_pair(x: &[f64; 4], k: usize) -> Self {
        let mut j = Self::constant(x[k] * x[k] + x[k + 1] * x[k + 1]);
        j.grad[k] = 2.0 * x[k];
        j.grad[k + 1] = 2.0 * x[k + 1];
        j.hess[k][k] = 2.0;
        j.hess[k + 1][k + 1] = 2.0;
        j
    }

    /// Composition `phi ∘ self` given `phi`, `phi'` and `phi''` at `self.val`.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Self::constant(f0);
        for i in 0..4 {
            out.grad[i] = f1 * self.grad[i];
            for j in 0..4 {
                out.hess[i][j] = f1 * self.hess[i][j] + f2 * self.grad[i] * self.grad[j];
            }
        }
        out
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut out = *self;
        out.val *= k;
        for i in 0..4 {
            out.grad[i] *= k;
            for j in 0..4 {
                out.hess[i][j] *= k;
            }
        }
        out
    }

    pub fn exp(&self) -> Self {
        let e = self.val.exp();
        self.chain(e, e, e)
    }

    pub fn recip(&self) -> Result<Self> {
        if self.val == 0.0 {
            return Err(DfError::Domain("division by zero".into()));
        }
        let r = 1.0 / self.val;
        Ok(self.chain(r, -r * r, 2.0 * r * r * r))
    }

    pub fn is_finite(&self) -> bool {
        self.val.is_finite()
            && self.grad.iter().all(|v| v.is_finite())
            && self.hess.iter().flatten().all(|v| v.is_finite())
    }

    pub fn grad_norm(&self) -> f64 {
        self.grad.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    /// Linear combination `Σ c_k j_k`.
    pub fn linear_combination(coeffs: &[f64], jets: &[RealJet]) -> Self {
        let mut out = Self::constant(0.0);
        for (c, j) in coeffs.iter().zip(jets) {
            if *c != 0.0 {
                out = out + j.scale(*c);
            }
        }
        out
    }

    pub fn to_wirtinger(&self) -> Jet2 {
        let h = &self.hess;
        let g = &self.grad;
        let d = [
            C64::new(0.5 * g[0], -0.5 * g[1]),
            C64::new(0.5 * g[2], -0.5 * g[3]),
        ];
        let mut h_mix = [[C64::new(0.0, 0.0); 2]; 2];
        let mut h_hol = [[C64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in i..2 {
                let (xi, yi, xj, yj) = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1);
                let mix = C64::new(
                    0.25 * (h[xi][xj] + h[yi][yj]),
                    0.25 * (h[xi][yj] - h[yi][xj]),
                );
                let hol = C64::new(
                    0.25 * (h[xi][xj] - h[yi][yj]),
                    -0.25 * (h[xi][yj] + h[yi][xj]),
                );
                h_mix[i][j] = mix;
                h_hol[i][j] = hol;
                if i != j {
                    h_mix[j][i] = mix.conj();
                    h_hol[j][i] = hol;
                } else {
                    h_mix[i][i] = C64::new(mix.re, 0.0);
                }
            }
        }
        Jet2 {
            val: self.val,
            d,
            h_mix,
            h_hol,
        }
    }
}

impl Add for RealJet {
    type Output = RealJet;
    fn add(self, o: RealJet) -> RealJet {
        let mut out = self;
        out.val += o.val;
        for i in 0..4 {
            out.grad[i] += o.grad[i];
            for j in 0..4 {
                out.hess[i][j] += o.hess[i][j];
            }
        }
        out
    }
}

impl Sub for RealJet {
    type Output = RealJet;
    fn sub(self, o: RealJet) -> RealJet {
        self + (-o)
    }
}

impl Neg for RealJet {
    type Output = RealJet;
    fn neg(self) -> RealJet {
        self.scale(-1.0)
    }
}

impl Mul for RealJet {
    type Output = RealJet;
    fn mul(self, o: RealJet) -> RealJet {
        let (a, b) = (&self, &o);
        let mut out = RealJet::constant(a.val * b.val);
        for i in 0..4 {
            out.grad[i] = a.val * b.grad[i] + b.val * a.grad[i];
            for j in 0..4 {
                out.hess[i][j] = a.val * b.hess[i][j]
                    + b.val * a.hess[i][j]
                    + (a.grad[i] * b.grad[j] + a.grad[j] * b.grad[i]);
            }
        }
        out
    }
}

/// Value, Wirtinger gradient and the two complex second-derivative blocks of
/// a real field. The antiholomorphic block is `conj(h_hol)` and is not stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jet2 {
    pub val: f64,
    /// `(f_z, f_w)`
    pub d: [C64; 2],
    /// `h_mix[i][j] = f_{z_i z̄_j}`, Hermitian.
    pub h_mix: [[C64; 2]; 2],
    /// `h_hol[i][j] = f_{z_i z_j}`, symmetric.
    pub h_hol: [[C64; 2]; 2],
}

impl Jet2 {
    /// `(f_z̄, f_w̄)`, the conjugate of `d` for a real field.
    pub fn d_bar(&self) -> [C64; 2] {
        [self.d[0].conj(), self.d[1].conj()]
    }

    /// `sqrt(|f_z|² + |f_w|²)`, which equals half the Euclidean gradient norm.
    pub fn wirtinger_norm(&self) -> f64 {
        (self.d[0].norm_sqr() + self.d[1].norm_sqr()).sqrt()
    }

    /// Euclidean norm of the real gradient.
    pub fn grad_norm(&self) -> f64 {
        2.0 * self.wirtinger_norm()
    }

    pub fn entry(&self, sel: EntrySel) -> C64 {
        match sel {
            EntrySel::Val => C64::new(self.val, 0.0),
            EntrySel::D(i) => self.d[i],
            EntrySel::Mix(i, j) => self.h_mix[i][j],
            EntrySel::Hol(i, j) => self.h_hol[i][j],
        }
    }

    /// Entry-wise affine combination `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Jet2, b: f64) -> Jet2 {
        let mut out = *self;
        out.val = a * self.val + b * other.val;
        for i in 0..2 {
            out.d[i] = self.d[i] * a + other.d[i] * b;
            for j in 0..2 {
                out.h_mix[i][j] = self.h_mix[i][j] * a + other.h_mix[i][j] * b;
                out.h_hol[i][j] = self.h_hol[i][j] * a + other.h_hol[i][j] * b;
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.val.is_finite()
            && self.d.iter().all(|c| c.re.is_finite() && c.im.is_finite())
            && self
                .h_mix
                .iter()
                .chain(self.h_hol.iter())
                .flatten()
                .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Selects one entry of a [`Jet2`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntrySel {
    Val,
    D(usize),
    Mix(usize, usize),
    Hol(usize, usize),
}

/// Anything that can produce a second-order jet at a point.
pub trait JetField: Sync {
    fn jet2(&self, p: &Complex2Point) -> Result<Jet2>;
}

/// Real directions `(u, v)` with `V f = (D_u f + i D_v f) / 2` for the
/// holomorphic-type vector `V = Σ V_k ∂/∂z_k`.
pub fn holomorphic_directions(v: [C64; 2]) -> ([f64; 4], [f64; 4]) {
    let u = [v[0].re, v[0].im, v[1].re, v[1].im];
    let w = [v[0].im, -v[0].re, v[1].im, -v[1].re];
    (u, w)
}

fn shifted(p: &Complex2Point, dir: &[f64; 4], t: f64) -> Complex2Point {
    let x = p.to_real();
    Complex2Point::from_real([
        x[0] + t * dir[0],
        x[1] + t * dir[1],
        x[2] + t * dir[2],
        x[3] + t * dir[3],
    ])
}

/// Default third-order step `1e-4 (1 + |p|)`.
pub fn default_third_step(p: &Complex2Point) -> f64 {
    1e-4 * (1.0 + p.norm())
}

/// Real directional derivative `D_dir J` of the whole Wirtinger jet, by central
/// differences at steps `h` and `h/2` combined with one Richardson step.
pub fn jet_directional_real<F: JetField + ?Sized>(
    f: &F,
    p: &Complex2Point,
    dir: &[f64; 4],
    h: f64,
) -> Result<Jet2> {
    let floor = 64.0 * f64::EPSILON * (1.0 + p.norm());
    if !(h > floor) {
        return Err(DfError::Step { step: h, floor });
    }
    let central = |step: f64| -> Result<Jet2> {
        let plus = f.jet2(&shifted(p, dir, step))?;
        let minus = f.jet2(&shifted(p, dir, -step))?;
        Ok(plus.combine(0.5 / step, &minus, -0.5 / step))
    };
    let coarse = central(h)?;
    let fine = central(0.5 * h)?;
    Ok(fine.combine(4.0 / 3.0, &coarse, -1.0 / 3.0))
}

/// Derivative of every Jet2 entry along the holomorphic-type vector `v`,
/// returned as `(V e)` for each entry `e` of the jet. Entries of the result
/// are complex combinations and no longer satisfy the Hermitian invariants.
#[derive(Debug, Clone, Copy)]
pub struct JetDerivative {
    pub du: Jet2,
    pub dv: Jet2,
}

impl JetDerivative {
    /// `V e = (D_u e + i D_v e) / 2`.
    pub fn along_v(&self, sel: EntrySel) -> C64 {
        (self.du.entry(sel) + C64::i() * self.dv.entry(sel)) * 0.5
    }

    /// `V̄ e = (D_u e - i D_v e) / 2`.
    pub fn along_v_bar(&self, sel: EntrySel) -> C64 {
        (self.du.entry(sel) - C64::i() * self.dv.entry(sel)) * 0.5
    }
}

pub fn jet_derivative<F: JetField + ?Sized>(
    f: &F,
    p: &Complex2Point,
    v: [C64; 2],
    h: f64,
) -> Result<JetDerivative> {
    let (u, w) = holomorphic_directions(v);
    Ok(JetDerivative {
        du: jet_directional_real(f, p, &u, h)?,
        dv: jet_directional_real(f, p, &w, h)?,
    })
}

/// Derivative along `V = Σ V_k ∂/∂z_k` of one second-order jet entry.
pub fn third_directional<F: JetField + ?Sized>(
    f: &F,
    p: &Complex2Point,
    v: [C64; 2],
    target: EntrySel,
    h: f64,
) -> Result<C64> {
    Ok(jet_derivative(f, p, v, h)?.along_v(target))
}

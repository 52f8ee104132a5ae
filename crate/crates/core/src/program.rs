//! Expression trees for real scalar fields on C² and their jet evaluation.

use serde::{Deserialize, Serialize};

use crate::error::{DfError, Result};
use crate::jet::{Complex2Point, Jet2, JetField, RealJet};

/// A closed expression tree over the real coordinates of `(z, w)`.
///
/// The JSON form is tagged by `"kind"`, for example
/// `{"kind":"add","args":[{"kind":"abs2_z"},{"kind":"const","value":-1.0}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldProgram {
    Const { value: f64 },
    ReZ,
    ImZ,
    ReW,
    ImW,
    Abs2Z,
    Abs2W,
    Add { args: Vec<FieldProgram> },
    Sub { lhs: Box<FieldProgram>, rhs: Box<FieldProgram> },
    Mul { args: Vec<FieldProgram> },
    Div { lhs: Box<FieldProgram>, rhs: Box<FieldProgram> },
    Exp { arg: Box<FieldProgram> },
    Log { arg: Box<FieldProgram> },
    Cos { arg: Box<FieldProgram> },
    Sin { arg: Box<FieldProgram> },
    /// `base^exponent`. Integer exponents are allowed for any base (negative
    /// ones need a nonzero base); other exponents need a positive base.
    Pow { base: Box<FieldProgram>, exponent: f64 },
    /// Flat-bottomed even cutoff of `arg`:
    /// `scale * exp(-2 ramp / (|x| - flat))` for `|x| > flat`, zero otherwise.
    Cutoff {
        arg: Box<FieldProgram>,
        flat: f64,
        ramp: f64,
        scale: f64,
    },
}

impl FieldProgram {
    pub fn constant(value: f64) -> Self {
        FieldProgram::Const { value }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn add(args: Vec<FieldProgram>) -> Self {
        FieldProgram::Add { args }
    }

    pub fn mul(args: Vec<FieldProgram>) -> Self {
        FieldProgram::Mul { args }
    }

    pub fn sub(lhs: FieldProgram, rhs: FieldProgram) -> Self {
        FieldProgram::Sub {
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn div(lhs: FieldProgram, rhs: FieldProgram) -> Self {
        FieldProgram::Div {
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn exp(arg: FieldProgram) -> Self {
        FieldProgram::Exp { arg: Box::new(arg) }
    }

    pub fn log(arg: FieldProgram) -> Self {
        FieldProgram::Log { arg: Box::new(arg) }
    }

    pub fn cos(arg: FieldProgram) -> Self {
        FieldProgram::Cos { arg: Box::new(arg) }
    }

    pub fn sin(arg: FieldProgram) -> Self {
        FieldProgram::Sin { arg: Box::new(arg) }
    }

    pub fn pow(base: FieldProgram, exponent: f64) -> Self {
        FieldProgram::Pow {
            base: Box::new(base),
            exponent,
        }
    }

    pub fn scaled(self, k: f64) -> Self {
        Self::mul(vec![Self::constant(k), self])
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        use FieldProgram::*;
        match self {
            Const { .. } | ReZ | ImZ | ReW | ImW | Abs2Z | Abs2W => 1,
            Add { args } | Mul { args } => 1 + args.iter().map(|a| a.size()).sum::<usize>(),
            Sub { lhs, rhs } | Div { lhs, rhs } => 1 + lhs.size() + rhs.size(),
            Exp { arg } | Log { arg } | Cos { arg } | Sin { arg } => 1 + arg.size(),
            Pow { base, .. } => 1 + base.size(),
            Cutoff { arg, .. } => 1 + arg.size(),
        }
    }

    /// Rejects trees with non-finite constants or inadmissible parameters.
    pub fn validate(&self) -> Result<()> {
        use FieldProgram::*;
        match self {
            Const { value } => finite(*value, "const value"),
            ReZ | ImZ | ReW | ImW | Abs2Z | Abs2W => Ok(()),
            Add { args } | Mul { args } => {
                if args.is_empty() {
                    return Err(DfError::Config("add/mul need at least one argument".into()));
                }
                args.iter().try_for_each(|a| a.validate())
            }
            Sub { lhs, rhs } | Div { lhs, rhs } => {
                lhs.validate()?;
                rhs.validate()
            }
            Exp { arg } | Log { arg } | Cos { arg } | Sin { arg } => arg.validate(),
            Pow { base, exponent } => {
                finite(*exponent, "pow exponent")?;
                base.validate()
            }
            Cutoff {
                arg,
                flat,
                ramp,
                scale,
            } => {
                finite(*flat, "cutoff flat")?;
                finite(*scale, "cutoff scale")?;
                if !(*ramp > 0.0) || !ramp.is_finite() || *flat < 0.0 {
                    return Err(DfError::Config(
                        "cutoff needs ramp > 0 and flat >= 0".into(),
                    ));
                }
                arg.validate()
            }
        }
    }

    /// Value only.
    pub fn eval(&self, p: &Complex2Point) -> Result<f64> {
        Ok(self.real_jet_at(&p.to_real())?.val)
    }

    /// Jet in real coordinates at `x = (Re z, Im z, Re w, Im w)`.
    pub fn real_jet_at(&self, x: &[f64; 4]) -> Result<RealJet> {
        use FieldProgram::*;
        let out = match self {
            Const { value } => RealJet::constant(*value),
            ReZ => RealJet::coordinate(x, 0),
            ImZ => RealJet::coordinate(x, 1),
            ReW => RealJet::coordinate(x, 2),
            ImW => RealJet::coordinate(x, 3),
            Abs2Z => RealJet::abs2_pair(x, 0),
            Abs2W => RealJet::abs2_pair(x, 2),
            Add { args } => {
                let mut acc = RealJet::constant(0.0);
                for a in args {
                    acc = acc + a.real_jet_at(x)?;
                }
                acc
            }
            Mul { args } => {
                let mut acc = RealJet::constant(1.0);
                for a in args {
                    acc = acc * a.real_jet_at(x)?;
                }
                acc
            }
            Sub { lhs, rhs } => lhs.real_jet_at(x)? - rhs.real_jet_at(x)?,
            Div { lhs, rhs } => {
                let d = rhs.real_jet_at(x)?;
                lhs.real_jet_at(x)? * d.recip()?
            }
            Exp { arg } => arg.real_jet_at(x)?.exp(),
            Log { arg } => {
                let a = arg.real_jet_at(x)?;
                if !(a.val > 0.0) {
                    return Err(DfError::Domain(format!("log of non-positive value {}", a.val)));
                }
                let r = 1.0 / a.val;
                a.chain(a.val.ln(), r, -r * r)
            }
            Cos { arg } => {
                let a = arg.real_jet_at(x)?;
                let (s, c) = a.val.sin_cos();
                a.chain(c, -s, -c)
            }
            Sin { arg } => {
                let a = arg.real_jet_at(x)?;
                let (s, c) = a.val.sin_cos();
                a.chain(s, c, -s)
            }
            Pow { base, exponent } => {
                let b = base.real_jet_at(x)?;
                pow_jet(&b, *exponent)?
            }
            Cutoff {
                arg,
                flat,
                ramp,
                scale,
            } => {
                let a = arg.real_jet_at(x)?;
                let (f0, f1, f2) = cutoff_derivs(a.val, *flat, *ramp, *scale);
                a.chain(f0, f1, f2)
            }
        };
        if !out.is_finite() {
            return Err(DfError::Domain(format!(
                "non-finite jet at ({}, {}, {}, {})",
                x[0], x[1], x[2], x[3]
            )));
        }
        Ok(out)
    }
}

fn finite(v: f64, what: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(DfError::Config(format!("{what} must be finite")))
    }
}

fn pow_jet(b: &RealJet, e: f64) -> Result<RealJet> {
    let x = b.val;
    let integer = e.fract() == 0.0 && e.abs() < 1e9;
    if integer {
        if e == 0.0 {
            return Ok(RealJet::constant(1.0));
        }
        if e < 0.0 && x == 0.0 {
            return Err(DfError::Domain("negative power of zero".into()));
        }
        let n = e as i32;
        let f0 = x.powi(n);
        let f1 = e * x.powi(n - 1);
        let f2 = if n == 1 { 0.0 } else { e * (e - 1.0) * x.powi(n - 2) };
        return Ok(b.chain(f0, f1, f2));
    }
    if !(x > 0.0) {
        return Err(DfError::Domain(format!(
            "fractional power {e} of non-positive value {x}"
        )));
    }
    let f0 = x.powf(e);
    Ok(b.chain(f0, e * f0 / x, e * (e - 1.0) * f0 / (x * x)))
}

/// Value and first two derivatives of the flat-bottomed cutoff.
pub fn cutoff_derivs(x: f64, flat: f64, ramp: f64, scale: f64) -> (f64, f64, f64) {
    let t = x.abs() - flat;
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let sgn = if x < 0.0 { -1.0 } else { 1.0 };
    let c = 2.0 * ramp;
    let e = (-c / t).exp();
    if e == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let f0 = scale * e;
    let d1 = f0 * c / (t * t);
    let d2 = f0 * (c * c / t.powi(4) - 2.0 * c / t.powi(3));
    (f0, sgn * d1, d2)
}

impl JetField for FieldProgram {
    fn jet2(&self, p: &Complex2Point) -> Result<Jet2> {
        Ok(self.real_jet_at(&p.to_real())?.to_wirtinger())
    }
}

/// Wirtinger jet of a program at a point.
pub fn jet_eval(f: &FieldProgram, p: &Complex2Point) -> Result<Jet2> {
    f.jet2(p)
}

/// A linear family `ψ(c) = Σ c_k φ_k` of programs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiFamily {
    pub basis: Vec<FieldProgram>,
}

impl PsiFamily {
    pub fn new(basis: Vec<FieldProgram>) -> Self {
        Self { basis }
    }

    /// The single-member family `{0}`.
    pub fn zero() -> Self {
        Self { basis: Vec::new() }
    }

    /// Span of `{1, Re z, Im z, Re w, Im w, |z|², |w|², Re zw̄, Im zw̄}`.
    pub fn default_family() -> Self {
        use FieldProgram as F;
        let re_zwbar = F::add(vec![
            F::mul(vec![F::ReZ, F::ReW]),
            F::mul(vec![F::ImZ, F::ImW]),
        ]);
        let im_zwbar = F::sub(F::mul(vec![F::ImZ, F::ReW]), F::mul(vec![F::ReZ, F::ImW]));
        Self {
            basis: vec![
                F::constant(1.0),
                F::ReZ,
                F::ImZ,
                F::ReW,
                F::ImW,
                F::Abs2Z,
                F::Abs2W,
                re_zwbar,
                im_zwbar,
            ],
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn program(&self, coeffs: &[f64]) -> FieldProgram {
        let terms: Vec<FieldProgram> = self
            .basis
            .iter()
            .zip(coeffs)
            .filter(|(_, c)| **c != 0.0)
            .map(|(b, c)| b.clone().scaled(*c))
            .collect();
        if terms.is_empty() {
            FieldProgram::zero()
        } else {
            FieldProgram::add(terms)
        }
    }

    pub fn basis_jets(&self, x: &[f64; 4]) -> Result<Vec<RealJet>> {
        self.basis.iter().map(|b| b.real_jet_at(x)).collect()
    }
}

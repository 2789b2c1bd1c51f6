//! The DGLA H_poly = T^{•+1}H of a unital bialgebra.
//!
//! A homogeneous element of degree k is a tensor with k+1 legs. Degree −1
//! consists of scalars, with Δ^{(−1)} = ε. The pre-Lie product is
//!
//! ```text
//! P₁•P₂ = Σᵢ (−1)^{i k₂} (id^{⊗i} ⊗ Δ^{(k₂)} ⊗ id^{⊗k₁−i})(P₁) · (1^{⊗i} ⊗ P₂ ⊗ 1^{⊗k₁−i})
//! ```
//!
//! and the bracket is its graded commutator. The differential is
//! ∂ = [1⊗1, ·]. Every operation is parametrized by a [`Coproduct`], so the
//! same code serves U(g) and its twisted versions U(g)_J.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hopf::{Coproduct, Hopf, Tensor};
use crate::scalar::{Rational, Series};

pub mod solver;
pub mod twist;

pub use solver::{solve_twist_perturbatively, DegreeSchedule};
pub use twist::*;

/// A (possibly inhomogeneous) element of H_poly.
#[derive(Clone)]
pub struct HPolyElement {
    hopf: Arc<Hopf>,
    parts: BTreeMap<i32, Tensor>,
}

impl PartialEq for HPolyElement {
    fn eq(&self, other: &Self) -> bool {
        Hopf::same(&self.hopf, &other.hopf) && self.parts == other.parts
    }
}

impl fmt::Debug for HPolyElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HPoly({self})")
    }
}

impl fmt::Display for HPolyElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.parts.iter().map(|(k, t)| format!("[{k}] {t}")).collect();
        write!(f, "{}", parts.join("; "))
    }
}

fn parity(n: i32) -> bool {
    n.rem_euclid(2) == 1
}

impl HPolyElement {
    pub fn zero(hopf: &Arc<Hopf>) -> Self {
        HPolyElement {
            hopf: hopf.clone(),
            parts: BTreeMap::new(),
        }
    }

    /// The homogeneous element of degree `legs − 1` given by a tensor.
    pub fn from_tensor(t: Tensor) -> Self {
        let mut out = Self::zero(t.hopf());
        out.add_part(t);
        out
    }

    /// 1⊗1 ∈ T²H.
    pub fn unit_pair(hopf: &Arc<Hopf>) -> Self {
        Self::from_tensor(Tensor::one(hopf, 2))
    }

    pub fn hopf(&self) -> &Arc<Hopf> {
        &self.hopf
    }

    pub fn parts(&self) -> &BTreeMap<i32, Tensor> {
        &self.parts
    }

    /// Degree-k component (zero if absent).
    pub fn part(&self, k: i32) -> Tensor {
        assert!(k >= -1, "H_poly has no degree below −1");
        self.parts
            .get(&k)
            .cloned()
            .unwrap_or_else(|| Tensor::zero(&self.hopf, (k + 1) as usize))
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    /// The degree if the element is homogeneous and nonzero.
    pub fn degree(&self) -> Option<i32> {
        if self.parts.len() == 1 {
            self.parts.keys().next().copied()
        } else {
            None
        }
    }

    pub fn valuation(&self) -> Option<usize> {
        self.parts.values().filter_map(Tensor::valuation).min()
    }

    pub fn hbar_part(&self, n: usize) -> HPolyElement {
        self.map_parts(|t| t.hbar_part(n))
    }

    pub fn truncated(&self, n: usize) -> HPolyElement {
        self.map_parts(|t| t.truncated(n))
    }

    fn add_part(&mut self, t: Tensor) {
        if t.is_zero() {
            return;
        }
        let k = t.legs() as i32 - 1;
        let merged = match self.parts.remove(&k) {
            Some(old) => &old + &t,
            None => t,
        };
        if !merged.is_zero() {
            self.parts.insert(k, merged);
        }
    }

    fn map_parts(&self, f: impl Fn(&Tensor) -> Tensor) -> HPolyElement {
        let mut out = Self::zero(&self.hopf);
        for t in self.parts.values() {
            out.add_part(f(t));
        }
        out
    }

    pub fn scale(&self, c: &Series) -> HPolyElement {
        self.map_parts(|t| t.scale(c))
    }

    pub fn scale_rational(&self, c: &Rational) -> HPolyElement {
        self.map_parts(|t| t.scale_rational(c))
    }

    pub fn try_add(&self, other: &HPolyElement) -> Result<HPolyElement> {
        if !Hopf::same(&self.hopf, &other.hopf) {
            return Err(Error::AlgebraMismatch);
        }
        let mut out = self.clone();
        for t in other.parts.values() {
            out.add_part(t.clone());
        }
        Ok(out)
    }
}

impl Add for &HPolyElement {
    type Output = HPolyElement;
    fn add(self, rhs: &HPolyElement) -> HPolyElement {
        self.try_add(rhs).expect("algebra mismatch")
    }
}

impl Sub for &HPolyElement {
    type Output = HPolyElement;
    fn sub(self, rhs: &HPolyElement) -> HPolyElement {
        self.try_add(&-rhs).expect("algebra mismatch")
    }
}

impl Neg for &HPolyElement {
    type Output = HPolyElement;
    fn neg(self) -> HPolyElement {
        self.map_parts(|t| -t)
    }
}

/// H_poly of a bialgebra, i.e. of U(g) with a chosen coproduct.
#[derive(Clone)]
pub struct HPoly {
    hopf: Arc<Hopf>,
    cop: Arc<dyn Coproduct>,
}

impl HPoly {
    pub fn new(hopf: &Arc<Hopf>) -> Self {
        HPoly {
            hopf: hopf.clone(),
            cop: Arc::new(hopf.clone()),
        }
    }

    /// H_poly of U(g)_J.
    pub fn twisted(bialgebra: Arc<TwistedBialgebra>) -> Self {
        HPoly {
            hopf: bialgebra.hopf().clone(),
            cop: bialgebra,
        }
    }

    pub fn hopf(&self) -> &Arc<Hopf> {
        &self.hopf
    }

    pub fn coproduct(&self) -> &dyn Coproduct {
        self.cop.as_ref()
    }

    fn check(&self, p: &HPolyElement) -> Result<()> {
        if Hopf::same(&self.hopf, &p.hopf) {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch)
        }
    }

    /// P₁•P₂ for homogeneous tensors.
    pub fn bullet_tensor(&self, p: &Tensor, q: &Tensor) -> Tensor {
        let k1 = p.legs() as i32 - 1;
        let k2 = q.legs() as i32 - 1;
        let mut out = Tensor::zero(&self.hopf, (k1 + k2 + 1) as usize);
        if p.is_zero() || q.is_zero() {
            return out;
        }
        for i in 0..=k1 {
            let expanded = p.expand_leg_with(i as usize, k2, self.cop.as_ref());
            let inserted = q.pad(i as usize, (k1 - i) as usize);
            let term = &expanded * &inserted;
            out = if parity(i * k2) { &out - &term } else { &out + &term };
        }
        out
    }

    pub fn bullet(&self, p: &HPolyElement, q: &HPolyElement) -> Result<HPolyElement> {
        self.check(p)?;
        self.check(q)?;
        let mut out = HPolyElement::zero(&self.hopf);
        for a in p.parts.values() {
            for b in q.parts.values() {
                out.add_part(self.bullet_tensor(a, b));
            }
        }
        Ok(out)
    }

    /// [P₁,P₂] = P₁•P₂ − (−1)^{k₁k₂} P₂•P₁.
    pub fn bracket(&self, p: &HPolyElement, q: &HPolyElement) -> Result<HPolyElement> {
        self.check(p)?;
        self.check(q)?;
        let mut out = HPolyElement::zero(&self.hopf);
        for (&k1, a) in &p.parts {
            for (&k2, b) in &q.parts {
                out.add_part(self.bullet_tensor(a, b));
                let back = self.bullet_tensor(b, a);
                out.add_part(if parity(k1 * k2) { back } else { -&back });
            }
        }
        Ok(out)
    }

    /// ∂ = [1⊗1, ·].
    pub fn differential(&self, p: &HPolyElement) -> Result<HPolyElement> {
        self.bracket(&HPolyElement::unit_pair(&self.hopf), p)
    }

    /// α(A,B,C) = A•(B•C) − (A•B)•C.
    pub fn associator(&self, a: &HPolyElement, b: &HPolyElement, c: &HPolyElement) -> Result<HPolyElement> {
        let left = self.bullet(a, &self.bullet(b, c)?)?;
        let right = self.bullet(&self.bullet(a, b)?, c)?;
        Ok(&left - &right)
    }

    /// P⟨Q₁,…,Q_r⟩ for homogeneous tensors: insert Qⱼ into slots i₁ < … < i_r.
    pub fn braces_tensor(&self, p: &Tensor, qs: &[&Tensor]) -> Tensor {
        let k = p.legs() as i32 - 1;
        let ks: Vec<i32> = qs.iter().map(|q| q.legs() as i32 - 1).collect();
        let total = (k + ks.iter().sum::<i32>() + 1) as usize;
        let mut out = Tensor::zero(&self.hopf, total);
        let r = qs.len();
        if r == 0 {
            return p.clone();
        }
        if k < 0 {
            return out;
        }
        for slots in increasing_tuples(k as usize + 1, r) {
            let sign: i32 = slots.iter().zip(&ks).map(|(&i, &kj)| i as i32 * kj).sum();
            let mut expanded = p.clone();
            for (j, &i) in slots.iter().enumerate().rev() {
                expanded = expanded.expand_leg_with(i, ks[j], self.cop.as_ref());
            }
            let mut inserted = Tensor::one(&self.hopf, 0);
            let mut prev = 0usize;
            for (j, &i) in slots.iter().enumerate() {
                inserted = inserted.outer(&Tensor::one(&self.hopf, i - prev)).outer(qs[j]);
                prev = i + 1;
            }
            inserted = inserted.outer(&Tensor::one(&self.hopf, k as usize + 1 - prev));
            let term = &expanded * &inserted;
            out = if parity(sign) { &out - &term } else { &out + &term };
        }
        out
    }

    pub fn braces(&self, p: &HPolyElement, qs: &[HPolyElement]) -> Result<HPolyElement> {
        self.check(p)?;
        for q in qs {
            self.check(q)?;
        }
        if qs.is_empty() {
            return Err(Error::DomainError("braces need at least one argument".into()));
        }
        let mut out = HPolyElement::zero(&self.hopf);
        let choices: Vec<Vec<&Tensor>> = qs.iter().map(|q| q.parts.values().collect()).collect();
        for a in p.parts.values() {
            for combo in cartesian(&choices) {
                out.add_part(self.braces_tensor(a, &combo));
            }
        }
        Ok(out)
    }
}

/// Strictly increasing r-tuples from 0..n.
pub(crate) fn increasing_tuples(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, r, &mut Vec::new(), &mut out);
    out
}

fn cartesian<'a, T>(choices: &[Vec<&'a T>]) -> Vec<Vec<&'a T>> {
    let mut acc: Vec<Vec<&T>> = vec![Vec::new()];
    for c in choices {
        let mut next = Vec::new();
        for prefix in &acc {
            for &x in c {
                let mut v = prefix.clone();
                v.push(x);
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}

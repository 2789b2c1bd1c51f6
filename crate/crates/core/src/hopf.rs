//! The universal enveloping algebra U(g)[[ħ]] in PBW normal form, its tensor
//! powers, and the cocommutative Hopf structure.
//!
//! A PBW monomial e₁^{a₁}⋯e_d^{a_d} is stored as its exponent vector. An
//! element of U(g)^{⊗k} is a [`Tensor`] whose keys are the concatenated
//! exponent vectors of its k legs. Elements of U(g) itself are one-leg
//! tensors and elements of the ground ring are zero-leg tensors.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lie::{same_algebra, LieAlgebra};
use crate::scalar::{factorial, Rational, Series};

type Terms = Arc<Vec<(Vec<u8>, Rational)>>;

/// U(g) with a fixed truncation order, plus memoized PBW straightening.
pub struct Hopf {
    lie: Arc<LieAlgebra>,
    order: usize,
    gen_products: Mutex<HashMap<(Vec<u8>, usize), Terms>>,
    mono_products: Mutex<HashMap<(Vec<u8>, Vec<u8>), Terms>>,
}

impl fmt::Debug for Hopf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hopf")
            .field("basis", &self.lie.names())
            .field("order", &self.order)
            .finish()
    }
}

impl Hopf {
    pub fn new(lie: Arc<LieAlgebra>, order: usize) -> Arc<Self> {
        Arc::new(Hopf {
            lie,
            order,
            gen_products: Mutex::new(HashMap::new()),
            mono_products: Mutex::new(HashMap::new()),
        })
    }

    pub fn lie(&self) -> &Arc<LieAlgebra> {
        &self.lie
    }

    pub fn dim(&self) -> usize {
        self.lie.dim()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub(crate) fn same(a: &Arc<Hopf>, b: &Arc<Hopf>) -> bool {
        Arc::ptr_eq(a, b) || (a.order == b.order && same_algebra(&a.lie, &b.lie))
    }

    /// m · e_j in normal form. Moves e_j left past every larger generator via
    /// e_i e_j = e_j e_i + [e_i, e_j].
    fn mono_times_gen(&self, m: &[u8], j: usize) -> Terms {
        let top = m.iter().rposition(|&e| e > 0);
        if top.map_or(true, |i| i <= j) {
            let mut out = m.to_vec();
            out[j] += 1;
            return Arc::new(vec![(out, Rational::one())]);
        }
        let key = (m.to_vec(), j);
        if let Some(hit) = self.gen_products.lock().unwrap().get(&key) {
            return hit.clone();
        }
        let i = top.unwrap();
        let mut rest = m.to_vec();
        rest[i] -= 1;
        let mut acc: BTreeMap<Vec<u8>, Rational> = BTreeMap::new();
        for (p, c) in self.mono_times_gen(&rest, j).iter() {
            for (q, c2) in self.mono_times_gen(p, i).iter() {
                *acc.entry(q.clone()).or_insert_with(Rational::zero) += c * c2;
            }
        }
        for (k, ck) in self.lie.bracket(i, j) {
            for (q, c2) in self.mono_times_gen(&rest, *k).iter() {
                *acc.entry(q.clone()).or_insert_with(Rational::zero) += ck * c2;
            }
        }
        let out: Terms = Arc::new(acc.into_iter().filter(|(_, c)| !c.is_zero()).collect());
        self.gen_products.lock().unwrap().insert(key, out.clone());
        out
    }

    /// Product of two PBW monomials in normal form.
    pub fn mono_mul(&self, a: &[u8], b: &[u8]) -> Terms {
        let top_a = a.iter().rposition(|&e| e > 0);
        let bottom_b = b.iter().position(|&e| e > 0);
        let ordered = match (top_a, bottom_b) {
            (Some(i), Some(j)) => i <= j,
            _ => true,
        };
        if ordered || self.lie.is_abelian() {
            let out: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
            return Arc::new(vec![(out, Rational::one())]);
        }
        let key = (a.to_vec(), b.to_vec());
        if let Some(hit) = self.mono_products.lock().unwrap().get(&key) {
            return hit.clone();
        }
        let mut current: BTreeMap<Vec<u8>, Rational> = BTreeMap::new();
        current.insert(a.to_vec(), Rational::one());
        for (j, &e) in b.iter().enumerate() {
            for _ in 0..e {
                let mut next: BTreeMap<Vec<u8>, Rational> = BTreeMap::new();
                for (m, c) in &current {
                    for (q, c2) in self.mono_times_gen(m, j).iter() {
                        *next.entry(q.clone()).or_insert_with(Rational::zero) += c * c2;
                    }
                }
                next.retain(|_, c| !c.is_zero());
                current = next;
            }
        }
        let out: Terms = Arc::new(current.into_iter().collect());
        self.mono_products.lock().unwrap().insert(key, out.clone());
        out
    }

    /// Δ^{(l)}(m) for a PBW monomial: each generator is primitive, so every
    /// exponent is distributed over the l+1 legs with multinomial weights.
    pub fn mono_coproduct(&self, m: &[u8], l: usize) -> Vec<(Vec<u8>, Rational)> {
        let d = self.dim();
        let legs = l + 1;
        let mut acc: Vec<(Vec<u8>, BigInt)> = vec![(vec![0u8; legs * d], BigInt::one())];
        for (j, &a) in m.iter().enumerate() {
            if a == 0 {
                continue;
            }
            let parts = compositions(a as usize, legs);
            let fa = factorial(a as usize);
            let mut next = Vec::with_capacity(acc.len() * parts.len());
            for (key, c) in &acc {
                for p in &parts {
                    let mut k = key.clone();
                    let mut denom = BigInt::one();
                    for (t, &pt) in p.iter().enumerate() {
                        k[t * d + j] = pt as u8;
                        denom *= factorial(pt);
                    }
                    next.push((k, c * (&fa / denom)));
                }
            }
            acc = next;
        }
        acc.into_iter()
            .map(|(k, c)| (k, Rational::from_integer(c)))
            .collect()
    }
}

/// All ways to write n as an ordered sum of `parts` non-negative integers.
pub(crate) fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in compositions(n - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// A coproduct on U(g)[[ħ]]: either the primitive one or a twisted one.
pub trait Coproduct: Send + Sync {
    fn hopf(&self) -> &Arc<Hopf>;

    /// Δ^{(l)} of a single PBW monomial, as a tensor with l+1 legs.
    fn iterated_coproduct_mono(&self, mono: &[u8], l: usize) -> Tensor;
}

impl Coproduct for Arc<Hopf> {
    fn hopf(&self) -> &Arc<Hopf> {
        self
    }

    fn iterated_coproduct_mono(&self, mono: &[u8], l: usize) -> Tensor {
        let order = self.order;
        let mut t = Tensor::zero(self, l + 1);
        for (k, c) in self.mono_coproduct(mono, l) {
            t.add_term(k, &Series::constant(order, c));
        }
        t
    }
}

/// An element of U(g)[[ħ]]^{⊗legs}.
#[derive(Clone)]
pub struct Tensor {
    hopf: Arc<Hopf>,
    legs: usize,
    terms: BTreeMap<Vec<u8>, Series>,
}

/// Elements of U(g)[[ħ]] are one-leg tensors.
pub type UeaElement = Tensor;

impl PartialEq for Tensor {
    fn eq(&self, other: &Self) -> bool {
        Hopf::same(&self.hopf, &other.hopf) && self.legs == other.legs && self.terms == other.terms
    }
}

impl fmt::Debug for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tensor[{}]({})", self.legs, self)
    }
}

impl Tensor {
    pub fn zero(hopf: &Arc<Hopf>, legs: usize) -> Self {
        Tensor {
            hopf: hopf.clone(),
            legs,
            terms: BTreeMap::new(),
        }
    }

    /// 1^{⊗legs}; for `legs = 0` the scalar 1.
    pub fn one(hopf: &Arc<Hopf>, legs: usize) -> Self {
        Self::scalar(hopf, legs, Series::one(hopf.order))
    }

    /// c · 1^{⊗legs}.
    pub fn scalar(hopf: &Arc<Hopf>, legs: usize, c: Series) -> Self {
        let mut t = Self::zero(hopf, legs);
        t.add_term(vec![0; legs * hopf.dim()], &c);
        t
    }

    pub fn generator(hopf: &Arc<Hopf>, i: usize) -> Self {
        let mut m = vec![0u8; hopf.dim()];
        m[i] = 1;
        Self::monomial(hopf, &[m], Series::one(hopf.order))
    }

    /// c · m₀ ⊗ … ⊗ m_k for PBW monomials given by exponent vectors.
    pub fn monomial(hopf: &Arc<Hopf>, legs: &[Vec<u8>], c: Series) -> Self {
        let d = hopf.dim();
        assert!(legs.iter().all(|m| m.len() == d), "exponent vector length must equal dim");
        let key: Vec<u8> = legs.iter().flatten().copied().collect();
        let mut t = Self::zero(hopf, legs.len());
        t.add_term(key, &c);
        t
    }

    pub fn hopf(&self) -> &Arc<Hopf> {
        &self.hopf
    }

    pub fn legs(&self) -> usize {
        self.legs
    }

    pub fn order(&self) -> usize {
        self.hopf.order
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u8>, Series> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, key: &[u8]) -> Series {
        self.terms
            .get(key)
            .cloned()
            .unwrap_or_else(|| Series::zero(self.order()))
    }

    pub fn add_term(&mut self, key: Vec<u8>, c: &Series) {
        debug_assert_eq!(key.len(), self.legs * self.hopf.dim());
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c.clone());
            }
        }
    }

    pub(crate) fn from_terms(hopf: &Arc<Hopf>, legs: usize, terms: BTreeMap<Vec<u8>, Series>) -> Self {
        let terms = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Tensor {
            hopf: hopf.clone(),
            legs,
            terms,
        }
    }

    /// Lowest ħ-power appearing in any coefficient (`None` for zero).
    pub fn valuation(&self) -> Option<usize> {
        self.terms.values().filter_map(Series::valuation).min()
    }

    /// Component at ħⁿ, as a tensor whose coefficients are constants.
    pub fn hbar_part(&self, n: usize) -> Tensor {
        let order = self.order();
        let terms = self
            .terms
            .iter()
            .filter(|(_, c)| !c.coeff(n).is_zero())
            .map(|(k, c)| (k.clone(), Series::constant(order, c.coeff(n).clone())))
            .collect();
        Tensor::from_terms(&self.hopf, self.legs, terms)
    }

    /// Drops every coefficient above ħ^k.
    pub fn truncated(&self, k: usize) -> Tensor {
        let terms = self
            .terms
            .iter()
            .map(|(key, c)| (key.clone(), c.truncated(k)))
            .collect();
        Tensor::from_terms(&self.hopf, self.legs, terms)
    }

    pub fn leg_monomial<'a>(&self, key: &'a [u8], leg: usize) -> &'a [u8] {
        let d = self.hopf.dim();
        &key[leg * d..(leg + 1) * d]
    }

    fn check(&self, other: &Tensor) -> Result<()> {
        if !Hopf::same(&self.hopf, &other.hopf) {
            return Err(Error::AlgebraMismatch);
        }
        if self.legs != other.legs {
            return Err(Error::DegreeError {
                expected: self.legs as i32,
                found: other.legs as i32,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Tensor) -> Result<Tensor> {
        self.check(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Series) -> Tensor {
        let terms = self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect();
        Tensor::from_terms(&self.hopf, self.legs, terms)
    }

    pub fn scale_rational(&self, c: &Rational) -> Tensor {
        if c.is_zero() {
            return Tensor::zero(&self.hopf, self.legs);
        }
        let terms = self.terms.iter().map(|(k, v)| (k.clone(), v.scale(c))).collect();
        Tensor::from_terms(&self.hopf, self.legs, terms)
    }

    /// Leg-wise product in U(g)^{⊗k}.
    pub fn try_mul(&self, other: &Tensor) -> Result<Tensor> {
        self.check(other)?;
        let d = self.hopf.dim();
        let n = self.hopf.order;
        let sparse = |t: &Tensor| -> Vec<(Vec<u8>, Vec<(usize, Rational)>)> {
            t.terms.iter().map(|(k, c)| (k.clone(), c.sparse())).collect()
        };
        let (lhs, rhs) = (sparse(self), sparse(other));
        let mut acc: HashMap<Vec<u8>, Series> = HashMap::new();
        let mut ab: Vec<Rational> = vec![Rational::zero(); n + 1];
        for (ka, ca) in &lhs {
            for (kb, cb) in &rhs {
                if ca[0].0 + cb[0].0 > n {
                    continue;
                }
                for x in ab.iter_mut() {
                    x.set_zero();
                }
                for (i, a) in ca {
                    for (j, b) in cb {
                        if i + j <= n {
                            ab[i + j] += a * b;
                        }
                    }
                }
                let ab_nz: Vec<(usize, &Rational)> = ab.iter().enumerate().filter(|(_, x)| !x.is_zero()).collect();
                if ab_nz.is_empty() {
                    continue;
                }
                let mut partial: Vec<(Vec<u8>, Rational)> = vec![(Vec::with_capacity(ka.len()), Rational::one())];
                for t in 0..self.legs {
                    let prod = self.hopf.mono_mul(&ka[t * d..(t + 1) * d], &kb[t * d..(t + 1) * d]);
                    if prod.len() == 1 {
                        let (m, pc) = &prod[0];
                        for (k, kc) in partial.iter_mut() {
                            k.extend_from_slice(m);
                            if !pc.is_one() {
                                *kc *= pc;
                            }
                        }
                    } else {
                        let mut next = Vec::with_capacity(partial.len() * prod.len());
                        for (k, kc) in &partial {
                            for (m, pc) in prod.iter() {
                                let mut nk = k.clone();
                                nk.extend_from_slice(m);
                                next.push((nk, kc * pc));
                            }
                        }
                        partial = next;
                    }
                }
                for (k, kc) in partial {
                    let e = acc.entry(k).or_insert_with(|| Series::zero(n));
                    let one = kc.is_one();
                    for &(p, v) in &ab_nz {
                        if one {
                            *e.coeff_mut(p) += v;
                        } else {
                            *e.coeff_mut(p) += v * &kc;
                        }
                    }
                }
            }
        }
        let terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(Tensor {
            hopf: self.hopf.clone(),
            legs: self.legs,
            terms,
        })
    }

    /// a ⊗ b, concatenating legs.
    pub fn outer(&self, other: &Tensor) -> Tensor {
        assert!(Hopf::same(&self.hopf, &other.hopf), "algebra mismatch");
        let mut out = Tensor::zero(&self.hopf, self.legs + other.legs);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let mut k = ka.clone();
                k.extend_from_slice(kb);
                out.add_term(k, &(ca * cb));
            }
        }
        out
    }

    /// 1^{⊗before} ⊗ self ⊗ 1^{⊗after}.
    pub fn pad(&self, before: usize, after: usize) -> Tensor {
        let d = self.hopf.dim();
        let terms = self
            .terms
            .iter()
            .map(|(k, c)| {
                let mut nk = vec![0u8; before * d];
                nk.extend_from_slice(k);
                nk.extend(std::iter::repeat(0u8).take(after * d));
                (nk, c.clone())
            })
            .collect();
        Tensor {
            hopf: self.hopf.clone(),
            legs: self.legs + before + after,
            terms,
        }
    }

    /// Replaces leg `leg` by the tensor `f(monomial)` (with `m` legs each).
    pub fn map_leg(&self, leg: usize, new_legs: usize, mut f: impl FnMut(&[u8]) -> Tensor) -> Tensor {
        assert!(leg < self.legs, "leg index out of range");
        let d = self.hopf.dim();
        let mut out = Tensor::zero(&self.hopf, self.legs - 1 + new_legs);
        let mut cache: HashMap<Vec<u8>, Tensor> = HashMap::new();
        for (k, c) in &self.terms {
            let m = &k[leg * d..(leg + 1) * d];
            let image = cache.entry(m.to_vec()).or_insert_with(|| f(m));
            debug_assert_eq!(image.legs, new_legs);
            for (ik, ic) in &image.terms {
                let mut nk = Vec::with_capacity(out.legs * d);
                nk.extend_from_slice(&k[..leg * d]);
                nk.extend_from_slice(ik);
                nk.extend_from_slice(&k[(leg + 1) * d..]);
                out.add_term(nk, &(c * ic));
            }
        }
        out
    }

    /// Multiplies legs start..start+count together into a single leg.
    pub fn merge_legs(&self, start: usize, count: usize) -> Tensor {
        assert!(count >= 1 && start + count <= self.legs, "leg range out of bounds");
        let d = self.hopf.dim();
        let mut out = Tensor::zero(&self.hopf, self.legs + 1 - count);
        for (k, c) in &self.terms {
            let mut prod: Vec<(Vec<u8>, Rational)> = vec![(k[start * d..(start + 1) * d].to_vec(), Rational::one())];
            for t in start + 1..start + count {
                let mut next = Vec::new();
                for (m, mc) in &prod {
                    for (q, qc) in self.hopf.mono_mul(m, &k[t * d..(t + 1) * d]).iter() {
                        next.push((q.clone(), mc * qc));
                    }
                }
                prod = next;
            }
            for (m, mc) in prod {
                let mut nk = k[..start * d].to_vec();
                nk.extend_from_slice(&m);
                nk.extend_from_slice(&k[(start + count) * d..]);
                out.add_term(nk, &c.scale(&mc));
            }
        }
        out
    }

    /// (id^{⊗leg} ⊗ Δ^{(l)} ⊗ id^{⊗…}) with Δ^{(0)} = id and Δ^{(−1)} = ε.
    pub fn expand_leg(&self, leg: usize, l: i32) -> Tensor {
        let hopf = self.hopf.clone();
        self.expand_leg_with(leg, l, &hopf)
    }

    pub fn expand_leg_with(&self, leg: usize, l: i32, cop: &dyn Coproduct) -> Tensor {
        match l {
            0 => self.clone(),
            -1 => self.counit_leg(leg),
            l if l > 0 => self.map_leg(leg, l as usize + 1, |m| cop.iterated_coproduct_mono(m, l as usize)),
            _ => panic!("Δ^({l}) is undefined"),
        }
    }

    /// Applies ε to one leg.
    pub fn counit_leg(&self, leg: usize) -> Tensor {
        assert!(leg < self.legs, "leg index out of range");
        let d = self.hopf.dim();
        let mut out = Tensor::zero(&self.hopf, self.legs - 1);
        for (k, c) in &self.terms {
            if k[leg * d..(leg + 1) * d].iter().all(|&e| e == 0) {
                let mut nk = k[..leg * d].to_vec();
                nk.extend_from_slice(&k[(leg + 1) * d..]);
                out.add_term(nk, c);
            }
        }
        out
    }

    /// Δ of a one-leg element.
    pub fn coproduct(&self) -> Tensor {
        assert_eq!(self.legs, 1, "coproduct expects an element of U(g)");
        self.expand_leg(0, 1)
    }

    /// Δ^{(k)} of a one-leg element; Δ^{(0)} = id.
    pub fn iterated_coproduct(&self, k: i32) -> Result<Tensor> {
        if k < 0 {
            return Err(Error::DomainError(format!("Δ^({k}) requires k ≥ 0")));
        }
        if self.legs != 1 {
            return Err(Error::DegreeError {
                expected: 1,
                found: self.legs as i32,
            });
        }
        Ok(self.expand_leg(0, k))
    }

    /// ε of a one-leg element.
    pub fn counit(&self) -> Series {
        assert_eq!(self.legs, 1, "counit expects an element of U(g)");
        self.coefficient(&vec![0u8; self.hopf.dim()])
    }

    /// Scalar value of a zero-leg tensor.
    pub fn scalar_value(&self) -> Series {
        assert_eq!(self.legs, 0, "not a scalar");
        self.coefficient(&[])
    }

    /// Reorders legs: leg `t` of the result is leg `perm[t]` of `self`.
    pub fn permute_legs(&self, perm: &[usize]) -> Tensor {
        assert_eq!(perm.len(), self.legs);
        let d = self.hopf.dim();
        let terms = self
            .terms
            .iter()
            .map(|(k, c)| {
                let nk: Vec<u8> = perm.iter().flat_map(|&p| k[p * d..(p + 1) * d].iter().copied()).collect();
                (nk, c.clone())
            })
            .collect();
        Tensor {
            hopf: self.hopf.clone(),
            legs: self.legs,
            terms,
        }
    }

    /// The flip τ(a ⊗ b) = b ⊗ a.
    pub fn flip(&self) -> Tensor {
        assert_eq!(self.legs, 2, "flip expects two legs");
        self.permute_legs(&[1, 0])
    }

    pub fn pow(&self, n: usize) -> Tensor {
        let mut out = Tensor::one(&self.hopf, self.legs);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// ħ⁰ part must be c·1 with c ≠ 0; then T⁻¹ = c⁻¹ Σ (−c⁻¹X)ⁿ with X = T − c.
    pub fn invert(&self) -> Result<Tensor> {
        let unit_key = vec![0u8; self.legs * self.hopf.dim()];
        let c0 = self.coefficient(&unit_key).coeff(0).clone();
        if c0.is_zero() {
            return Err(Error::NotInvertible);
        }
        let head = Tensor::scalar(&self.hopf, self.legs, Series::constant(self.order(), c0.clone()));
        let x = self - &head;
        if x.valuation().is_some_and(|v| v == 0) {
            return Err(Error::NotInvertible);
        }
        let inv_c = c0.recip();
        let y = x.scale_rational(&-inv_c.clone());
        let mut power = Tensor::one(&self.hopf, self.legs);
        let mut sum = power.clone();
        for _ in 0..self.order() {
            power = &power * &y;
            if power.is_zero() {
                break;
            }
            sum = &sum + &power;
        }
        Ok(sum.scale_rational(&inv_c))
    }

    /// exp(X) = Σ Xⁿ/n! for X in the first ħ-filtration level.
    pub fn exp(&self) -> Result<Tensor> {
        if self.valuation().is_some_and(|v| v == 0) {
            return Err(Error::NotFiltered);
        }
        let mut term = Tensor::one(&self.hopf, self.legs);
        let mut sum = term.clone();
        for n in 1..=self.order() {
            term = (&term * self).scale_rational(&Rational::new(BigInt::one(), BigInt::from(n)));
            if term.is_zero() {
                break;
            }
            sum = &sum + &term;
        }
        Ok(sum)
    }

    /// log(1 + X) = Σ (−1)^{n+1} Xⁿ/n for X in the first ħ-filtration level.
    pub fn log1p(&self) -> Result<Tensor> {
        if self.valuation().is_some_and(|v| v == 0) {
            return Err(Error::NotFiltered);
        }
        let mut power = Tensor::one(&self.hopf, self.legs);
        let mut sum = Tensor::zero(&self.hopf, self.legs);
        for n in 1..=self.order() {
            power = &power * self;
            if power.is_zero() {
                break;
            }
            let sign = if n % 2 == 1 { 1 } else { -1 };
            sum = &sum + &power.scale_rational(&Rational::new(BigInt::from(sign), BigInt::from(n)));
        }
        Ok(sum)
    }

    /// Antipode S(eᵢ) = −eᵢ extended anti-multiplicatively.
    pub fn antipode(&self) -> Tensor {
        assert_eq!(self.legs, 1, "antipode expects an element of U(g)");
        let d = self.hopf.dim();
        let mut out = Tensor::zero(&self.hopf, 1);
        for (k, c) in &self.terms {
            let mut img = Tensor::one(&self.hopf, 1);
            let degree: usize = k.iter().map(|&e| e as usize).sum();
            for j in (0..d).rev() {
                for _ in 0..k[j] {
                    img = &img * &Tensor::generator(&self.hopf, j);
                }
            }
            let sign = if degree % 2 == 0 { c.clone() } else { -c };
            out = &out + &img.scale(&sign);
        }
        out
    }

    pub(crate) fn format_mono(&self, m: &[u8]) -> String {
        let names = self.hopf.lie.names();
        let parts: Vec<String> = m
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(j, &e)| if e == 1 { names[j].clone() } else { format!("{}^{e}", names[j]) })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("·")
        }
    }
}

impl Add for &Tensor {
    type Output = Tensor;
    fn add(self, rhs: &Tensor) -> Tensor {
        self.try_add(rhs).expect("tensor mismatch in addition")
    }
}

impl Sub for &Tensor {
    type Output = Tensor;
    fn sub(self, rhs: &Tensor) -> Tensor {
        self.try_add(&-rhs).expect("tensor mismatch in subtraction")
    }
}

impl Neg for &Tensor {
    type Output = Tensor;
    fn neg(self) -> Tensor {
        let terms = self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect();
        Tensor {
            hopf: self.hopf.clone(),
            legs: self.legs,
            terms,
        }
    }
}

impl Mul for &Tensor {
    type Output = Tensor;
    fn mul(self, rhs: &Tensor) -> Tensor {
        self.try_mul(rhs).expect("tensor mismatch in product")
    }
}

impl fmt::Display for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let legs: Vec<String> = (0..self.legs).map(|t| self.format_mono(self.leg_monomial(k, t))).collect();
            let body = if legs.is_empty() { "1".to_string() } else { legs.join("⊗") };
            let cs = c.to_string();
            if cs == "1" {
                write!(f, "{body}")?;
            } else {
                write!(f, "({cs})·{body}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn ax_b(order: usize) -> Arc<Hopf> {
        Hopf::new(Arc::new(LieAlgebra::ax_plus_b()), order)
    }

    #[test]
    fn straightening_single_step() {
        let h = ax_b(2);
        let hh = Tensor::generator(&h, 0);
        let e = Tensor::generator(&h, 1);
        // E·H = H·E − E
        let expected = &Tensor::monomial(&h, &[vec![1, 1]], Series::one(2)) - &e;
        assert_eq!(&e * &hh, expected);
        assert_eq!(&Tensor::one(&h, 1) * &e, e);
    }

    #[test]
    fn abelian_product_is_commutative_polynomial_product() {
        let h = Hopf::new(Arc::new(LieAlgebra::abelian(2)), 1);
        let a = Tensor::generator(&h, 0);
        let b = Tensor::generator(&h, 1);
        assert_eq!(&a * &b, Tensor::monomial(&h, &[vec![1, 1]], Series::one(1)));
        assert_eq!(&b * &a, &a * &b);
    }

    #[test]
    fn coproduct_examples() {
        let h = Hopf::new(Arc::new(LieAlgebra::abelian(2)), 1);
        let one = Series::one(1);
        assert_eq!(Tensor::one(&h, 1).coproduct(), Tensor::one(&h, 2));
        let e1 = Tensor::generator(&h, 0);
        let expected = &Tensor::monomial(&h, &[vec![1, 0], vec![0, 0]], one.clone())
            + &Tensor::monomial(&h, &[vec![0, 0], vec![1, 0]], one.clone());
        assert_eq!(e1.coproduct(), expected);
        let e12 = Tensor::monomial(&h, &[vec![1, 1]], one.clone());
        let mut expected = Tensor::zero(&h, 2);
        for (a, b) in [([1, 1], [0, 0]), ([1, 0], [0, 1]), ([0, 1], [1, 0]), ([0, 0], [1, 1])] {
            expected = &expected + &Tensor::monomial(&h, &[a.to_vec(), b.to_vec()], one.clone());
        }
        assert_eq!(e12.coproduct(), expected);
        let e2 = Tensor::generator(&h, 1);
        let delta = &e1.coproduct() * &e2.coproduct();
        assert_eq!(e12.coproduct(), delta);
    }

    #[test]
    fn counit_examples() {
        let h = ax_b(1);
        assert_eq!(Tensor::one(&h, 1).counit(), Series::one(1));
        let x = &Tensor::monomial(&h, &[vec![1, 1]], Series::one(1)) + &Tensor::scalar(&h, 1, Series::constant(1, rat(3)));
        assert_eq!(x.counit(), Series::constant(1, rat(3)));
        assert!(matches!(x.iterated_coproduct(-1), Err(Error::DomainError(_))));
    }

    #[test]
    fn iterated_coproduct_of_generator() {
        let h = ax_b(1);
        let e = Tensor::generator(&h, 1);
        let d2 = e.iterated_coproduct(2).unwrap();
        let one = Series::one(1);
        let z = vec![0, 0];
        let ev = vec![0, 1];
        let expected = &(&Tensor::monomial(&h, &[ev.clone(), z.clone(), z.clone()], one.clone())
            + &Tensor::monomial(&h, &[z.clone(), ev.clone(), z.clone()], one.clone()))
            + &Tensor::monomial(&h, &[z.clone(), z.clone(), ev.clone()], one.clone());
        assert_eq!(d2, expected);
        assert_eq!(e.iterated_coproduct(0).unwrap(), e);
    }

    #[test]
    fn legs_multiply_independently() {
        let h = ax_b(1);
        let hh = Tensor::generator(&h, 0).pad(0, 1);
        let e = Tensor::generator(&h, 1).pad(1, 0);
        assert_eq!(&hh * &e, &e * &hh);
        let j = Tensor::generator(&h, 0).outer(&Tensor::generator(&h, 1));
        assert_eq!(&Tensor::one(&h, 2) * &j, j);
    }

    #[test]
    fn antipode_and_inverse() {
        let h = ax_b(3);
        let e = Tensor::generator(&h, 1);
        assert_eq!(e.antipode(), -&e);
        let x = &Tensor::one(&h, 1) + &e.scale(&Series::hbar(3));
        let inv = x.invert().unwrap();
        assert_eq!(&x * &inv, Tensor::one(&h, 1));
        assert_eq!(&inv * &x, Tensor::one(&h, 1));
        assert_eq!(e.invert().unwrap_err(), Error::NotInvertible);
    }
}

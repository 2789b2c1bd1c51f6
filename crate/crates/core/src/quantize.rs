//! Hochschild side: polydifferential operators, their braces and
//! Gerstenhaber bracket, the deformation symmetry Φ induced by an action, and
//! star products f⋆g = m(J▷(f⊗g)) with their certification reports.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::action::{differentiate_monomial, multinomial, variable_name, LieAction, Poly, PolyVectorField};
use crate::error::{Error, Result};
use crate::hopf::{compositions, Hopf, Tensor};
use crate::hpoly::{increasing_tuples, FormalTwist, HPolyElement, TwistedBialgebra};
use crate::linfty::{Host, Vector};
use crate::scalar::{ratio, Rational, Series};

/// Σ c · x^m ∂^{α₀}(a₀)⋯∂^{α_k}(a_k). Keys are m ++ α₀ ++ … ++ α_k; the
/// arity k+1 is read off the key length. Mixed arities are allowed.
#[derive(Clone, PartialEq, Eq)]
pub struct PolyDiffOperator {
    nvars: usize,
    order: usize,
    terms: BTreeMap<Vec<u8>, Series>,
}

fn odd(n: i32) -> bool {
    n.rem_euclid(2) == 1
}

impl PolyDiffOperator {
    pub fn zero(nvars: usize, order: usize) -> Self {
        assert!(nvars > 0, "at least one variable");
        PolyDiffOperator {
            nvars,
            order,
            terms: BTreeMap::new(),
        }
    }

    /// Pointwise multiplication m(a, b) = ab.
    pub fn multiplication(nvars: usize, order: usize) -> Self {
        Self::monomial(nvars, vec![0; 3 * nvars], Series::one(order))
    }

    /// The identity a ↦ a.
    pub fn identity(nvars: usize, order: usize) -> Self {
        Self::monomial(nvars, vec![0; 2 * nvars], Series::one(order))
    }

    /// An arity-0 cochain, i.e. a function.
    pub fn function(f: &Poly) -> Self {
        Self::from_terms(f.nvars(), f.order(), f.terms().iter().map(|(k, c)| (k.clone(), c.clone())))
    }

    /// An arity-1 operator from a vector field.
    pub fn vector_field(x: &PolyVectorField) -> Self {
        let n = x.nvars();
        let mut out = Self::zero(n, x.order());
        for (idx, f) in x.terms() {
            if idx.len() != 1 {
                continue;
            }
            for (m, c) in f.terms() {
                let mut key = m.clone();
                let mut alpha = vec![0u8; n];
                alpha[idx[0]] = 1;
                key.extend(alpha);
                out.add_term(key, c);
            }
        }
        out
    }

    /// The bidifferential operator Σ_{i<j} π^{ij}(∂ᵢ⊗∂ⱼ − ∂ⱼ⊗∂ᵢ).
    pub fn bivector(pi: &PolyVectorField) -> Self {
        let n = pi.nvars();
        let mut out = Self::zero(n, pi.order());
        for (idx, f) in pi.terms() {
            if idx.len() != 2 {
                continue;
            }
            for (m, c) in f.terms() {
                for (a, b, s) in [(idx[0], idx[1], 1), (idx[1], idx[0], -1)] {
                    let mut key = m.clone();
                    let mut alpha = vec![0u8; 2 * n];
                    alpha[a] = 1;
                    alpha[n + b] = 1;
                    key.extend(alpha);
                    out.add_term(key, &if s < 0 { -c } else { c.clone() });
                }
            }
        }
        out
    }

    pub fn monomial(nvars: usize, key: Vec<u8>, c: Series) -> Self {
        let mut out = Self::zero(nvars, c.order());
        out.add_term(key, &c);
        out
    }

    pub fn from_terms(nvars: usize, order: usize, terms: impl IntoIterator<Item = (Vec<u8>, Series)>) -> Self {
        let mut out = Self::zero(nvars, order);
        for (k, c) in terms {
            out.add_term(k, &c);
        }
        out
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u8>, Series> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn key_arity(&self, key: &[u8]) -> usize {
        key.len() / self.nvars - 1
    }

    pub fn arities(&self) -> BTreeSet<usize> {
        self.terms.keys().map(|k| self.key_arity(k)).collect()
    }

    /// Hochschild degree (arity − 1) if homogeneous.
    pub fn degree(&self) -> Option<i32> {
        let a = self.arities();
        (a.len() == 1).then(|| *a.iter().next().unwrap() as i32 - 1)
    }

    pub fn arity_part(&self, n: usize) -> Self {
        Self::from_terms(
            self.nvars,
            self.order,
            self.terms
                .iter()
                .filter(|(k, _)| self.key_arity(k) == n)
                .map(|(k, c)| (k.clone(), c.clone())),
        )
    }

    pub fn add_term(&mut self, key: Vec<u8>, c: &Series) {
        assert!(key.len() >= self.nvars && key.len() % self.nvars == 0, "malformed key");
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

    pub fn scale(&self, c: &Series) -> Self {
        Self::from_terms(self.nvars, self.order, self.terms.iter().map(|(k, v)| (k.clone(), v * c)))
    }

    pub fn scale_rational(&self, c: &Rational) -> Self {
        Self::from_terms(self.nvars, self.order, self.terms.iter().map(|(k, v)| (k.clone(), v.scale(c))))
    }

    /// Component at ħⁿ, with constant coefficients.
    pub fn hbar_part(&self, n: usize) -> Self {
        Self::from_terms(
            self.nvars,
            self.order,
            self.terms
                .iter()
                .map(|(k, c)| (k.clone(), Series::constant(self.order, c.coeff(n).clone()))),
        )
    }

    pub fn nonzero_orders(&self) -> BTreeSet<usize> {
        (0..=self.order)
            .filter(|&n| self.terms.values().any(|c| !c.coeff(n).is_zero()))
            .collect()
    }

    /// Highest total number of derivatives in any term.
    pub fn derivative_order(&self) -> usize {
        let n = self.nvars;
        self.terms
            .keys()
            .map(|k| k[n..].iter().map(|&e| e as usize).sum())
            .max()
            .unwrap_or(0)
    }

    /// Swaps the two slots of the arity-2 part.
    pub fn flip(&self) -> Self {
        let n = self.nvars;
        Self::from_terms(
            n,
            self.order,
            self.terms.iter().filter(|(k, _)| self.key_arity(k) == 2).map(|(k, c)| {
                let mut key = k[..n].to_vec();
                key.extend(&k[2 * n..3 * n]);
                key.extend(&k[n..2 * n]);
                (key, c.clone())
            }),
        )
    }

    /// Evaluates the part of arity `args.len()`.
    pub fn apply(&self, args: &[Poly]) -> Poly {
        let n = self.nvars;
        let mut out = Poly::zero(n, self.order);
        for (key, c) in &self.terms {
            if self.key_arity(key) != args.len() {
                continue;
            }
            let mut prod = Poly::monomial(&key[..n], c.clone());
            for (s, a) in args.iter().enumerate() {
                prod = &prod * &a.partial(&key[n * (s + 1)..n * (s + 2)]);
                if prod.is_zero() {
                    break;
                }
            }
            out = &out + &prod;
        }
        out
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::DomainError("operators in different numbers of variables".into()));
        }
        if self.order != other.order {
            return Err(Error::ConfigMismatch(self.order, other.order));
        }
        Ok(())
    }
}

/// ∂^α(x^q · Π ∂^{β_t} a_t) by the Leibniz rule: list of (coefficient,
/// exponent of the function factor, new derivatives of each argument).
fn leibniz_insert(alpha: &[u8], q: &[u8], betas: &[&[u8]]) -> Vec<(BigInt, Vec<u8>, Vec<Vec<u8>>)> {
    let n = alpha.len();
    let parts = betas.len() + 1;
    let mut acc: Vec<(BigInt, Vec<u8>, Vec<Vec<u8>>)> = vec![(
        BigInt::from(1),
        q.to_vec(),
        betas.iter().map(|b| b.to_vec()).collect(),
    )];
    for v in 0..n {
        let mut next = Vec::new();
        for split in compositions(alpha[v] as usize, parts) {
            let w = multinomial(&split);
            for (c, m, ds) in &acc {
                let mut e = vec![0u8; n];
                e[v] = split[0] as u8;
                let Some((dc, dm)) = differentiate_monomial(m, &e) else { continue };
                let mut ds = ds.clone();
                for (t, d) in ds.iter_mut().enumerate() {
                    d[v] += split[t + 1] as u8;
                }
                next.push((c * &w * dc, dm, ds));
            }
        }
        acc = next;
    }
    acc
}

/// P{Q₁,…,Q_r}: insert Q_j into slots i₁ < … < i_r of P with sign
/// (−1)^{Σ i_j k_j}, kⱼ = arity(Qⱼ) − 1.
pub fn braces(p: &PolyDiffOperator, qs: &[&PolyDiffOperator]) -> Result<PolyDiffOperator> {
    for q in qs {
        p.check(q)?;
    }
    if qs.is_empty() {
        return Err(Error::DomainError("braces need at least one argument".into()));
    }
    let n = p.nvars;
    let mut out = PolyDiffOperator::zero(n, p.order);
    let q_terms: Vec<Vec<(&Vec<u8>, &Series)>> = qs.iter().map(|q| q.terms.iter().collect()).collect();
    for (pk, pc) in &p.terms {
        let pa = p.key_arity(pk);
        for combo in cartesian(&q_terms) {
            let ks: Vec<i32> = combo.iter().map(|(k, _)| p.key_arity(k) as i32 - 1).collect();
            let coeff = combo.iter().fold(pc.clone(), |acc, (_, c)| &acc * c);
            for slots in increasing_tuples(pa, qs.len()) {
                let sign: i32 = slots.iter().zip(&ks).map(|(&i, &k)| i as i32 * k).sum();
                let expansions: Vec<Vec<(BigInt, Vec<u8>, Vec<Vec<u8>>)>> = slots
                    .iter()
                    .zip(&combo)
                    .map(|(&s, (qk, _))| {
                        let alpha = &pk[n * (s + 1)..n * (s + 2)];
                        let betas: Vec<&[u8]> = qk[n..].chunks(n).collect();
                        leibniz_insert(alpha, &qk[..n], &betas)
                    })
                    .collect();
                let refs: Vec<Vec<&(BigInt, Vec<u8>, Vec<Vec<u8>>)>> =
                    expansions.iter().map(|e| e.iter().collect()).collect();
                for pick in cartesian(&refs) {
                    let mut c = BigInt::from(if odd(sign) { -1 } else { 1 });
                    let mut m = pk[..n].to_vec();
                    for (w, dm, _) in &pick {
                        c *= w;
                        for (a, b) in m.iter_mut().zip(dm) {
                            *a += b;
                        }
                    }
                    let mut key = m;
                    let mut j = 0;
                    for s in 0..pa {
                        if j < slots.len() && slots[j] == s {
                            for d in &pick[j].2 {
                                key.extend(d);
                            }
                            j += 1;
                        } else {
                            key.extend(&pk[n * (s + 1)..n * (s + 2)]);
                        }
                    }
                    out.add_term(key, &coeff.scale(&Rational::from_integer(c)));
                }
            }
        }
    }
    Ok(out)
}

fn cartesian<T: Clone>(lists: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut acc: Vec<Vec<T>> = vec![Vec::new()];
    for l in lists {
        let mut next = Vec::new();
        for a in &acc {
            for x in l {
                let mut v = a.clone();
                v.push(x.clone());
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}

/// [A,B]_G = A{B} − (−1)^{|A||B|} B{A}, extended bilinearly over arities.
pub fn gerstenhaber(a: &PolyDiffOperator, b: &PolyDiffOperator) -> Result<PolyDiffOperator> {
    a.check(b)?;
    let mut out = PolyDiffOperator::zero(a.nvars, a.order);
    for ka in a.arities() {
        for kb in b.arities() {
            let ap = a.arity_part(ka);
            let bp = b.arity_part(kb);
            let ab = braces(&ap, &[&bp])?;
            let ba = braces(&bp, &[&ap])?;
            let s = (ka as i32 - 1) * (kb as i32 - 1);
            out = &out + &if odd(s) { &ab + &ba } else { &ab - &ba };
        }
    }
    Ok(out)
}

/// (A{B}){C} − A{B{C}}.
pub fn brace_associator(a: &PolyDiffOperator, b: &PolyDiffOperator, c: &PolyDiffOperator) -> Result<PolyDiffOperator> {
    let left = braces(&braces(a, &[b])?, &[c])?;
    let right = braces(a, &[&braces(b, &[c])?])?;
    Ok(&left - &right)
}

/// Hochschild differential [m, ·]_G.
pub fn hochschild_differential(b: &PolyDiffOperator) -> Result<PolyDiffOperator> {
    gerstenhaber(&PolyDiffOperator::multiplication(b.nvars, b.order), b)
}

/// ∂B + ½[B,B]_G.
pub fn hochschild_mc_residual(b: &PolyDiffOperator) -> Result<PolyDiffOperator> {
    let half = ratio(1, 2);
    Ok(&hochschild_differential(b)? + &gerstenhaber(b, b)?.scale_rational(&half))
}

impl Add for &PolyDiffOperator {
    type Output = PolyDiffOperator;
    fn add(self, rhs: &PolyDiffOperator) -> PolyDiffOperator {
        self.check(rhs).expect("compatible operators");
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), c);
        }
        out
    }
}

impl Sub for &PolyDiffOperator {
    type Output = PolyDiffOperator;
    fn sub(self, rhs: &PolyDiffOperator) -> PolyDiffOperator {
        self + &-rhs
    }
}

impl Neg for &PolyDiffOperator {
    type Output = PolyDiffOperator;
    fn neg(self) -> PolyDiffOperator {
        PolyDiffOperator {
            nvars: self.nvars,
            order: self.order,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect(),
        }
    }
}

impl fmt::Display for PolyDiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let n = self.nvars;
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, c)| {
                let mut s = format!("({c})");
                for (i, &e) in k[..n].iter().enumerate() {
                    if e > 0 {
                        s += &format!("·{}^{e}", variable_name(i));
                    }
                }
                let slots: Vec<String> = k[n..]
                    .chunks(n)
                    .map(|a| {
                        let d: String = a
                            .iter()
                            .enumerate()
                            .filter(|(_, &e)| e > 0)
                            .map(|(i, &e)| format!("∂{}^{e}", variable_name(i)))
                            .collect();
                        if d.is_empty() {
                            "1".into()
                        } else {
                            d
                        }
                    })
                    .collect();
                format!("{s}·[{}]", slots.join("⊗"))
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for PolyDiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The Hochschild DGLA of polydifferential operators as an L∞ host, keys of
/// arity k+1 having shifted degree k − 1.
pub struct HochschildHost {
    nvars: usize,
    order: usize,
}

impl HochschildHost {
    pub fn new(nvars: usize, order: usize) -> Self {
        HochschildHost { nvars, order }
    }

    pub fn to_vector(&self, p: &PolyDiffOperator) -> Vector<Vec<u8>> {
        Vector::from_terms(self.order, p.terms.iter().map(|(k, c)| (k.clone(), c.clone())))
    }

    pub fn to_operator(&self, v: &Vector<Vec<u8>>) -> PolyDiffOperator {
        PolyDiffOperator::from_terms(self.nvars, self.order, v.terms().iter().map(|(k, c)| (k.clone(), c.clone())))
    }

    fn basis(&self, k: &[u8]) -> PolyDiffOperator {
        PolyDiffOperator::monomial(self.nvars, k.to_vec(), Series::one(self.order))
    }
}

impl Host for HochschildHost {
    type Key = Vec<u8>;

    fn order(&self) -> usize {
        self.order
    }

    fn shifted_degree(&self, k: &Vec<u8>) -> i32 {
        (k.len() / self.nvars) as i32 - 3
    }

    fn differential(&self, k: &Vec<u8>) -> Vector<Vec<u8>> {
        self.to_vector(&hochschild_differential(&self.basis(k)).expect("same host"))
    }

    fn bracket(&self, a: &Vec<u8>, b: &Vec<u8>) -> Vector<Vec<u8>> {
        self.to_vector(&gerstenhaber(&self.basis(a), &self.basis(b)).expect("same host"))
    }
}

/// Φ(h₀⊗…⊗h_k) = μ^{(k)}∘(φ(h₀)⊗…⊗φ(h_k)), where φ(h) is the differential
/// operator by which h ∈ U(g) acts.
pub struct DeformationSymmetry {
    action: Arc<LieAction>,
    hopf: Arc<Hopf>,
    cache: Mutex<HashMap<Vec<u8>, PolyDiffOperator>>,
}

impl DeformationSymmetry {
    pub fn new(action: &Arc<LieAction>, hopf: &Arc<Hopf>) -> Result<Self> {
        if !crate::lie::same_algebra(action.lie(), hopf.lie()) {
            return Err(Error::AlgebraMismatch);
        }
        if action.order() != hopf.order() {
            return Err(Error::ConfigMismatch(action.order(), hopf.order()));
        }
        action.verify()?;
        Ok(DeformationSymmetry {
            action: action.clone(),
            hopf: hopf.clone(),
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn action(&self) -> &Arc<LieAction> {
        &self.action
    }

    pub fn hopf(&self) -> &Arc<Hopf> {
        &self.hopf
    }

    /// The arity-1 operator of a PBW monomial.
    pub fn monomial_operator(&self, mono: &[u8]) -> PolyDiffOperator {
        if let Some(op) = self.cache.lock().unwrap().get(mono) {
            return op.clone();
        }
        let n = self.action.nvars();
        let order = self.action.order();
        let mut op = PolyDiffOperator::identity(n, order);
        for (i, &a) in mono.iter().enumerate().rev() {
            let x = PolyDiffOperator::vector_field(self.action.field(i));
            for _ in 0..a {
                op = braces(&x, &[&op]).expect("same host");
            }
        }
        self.cache.lock().unwrap().insert(mono.to_vec(), op.clone());
        op
    }

    pub fn apply_tensor(&self, t: &Tensor) -> Result<PolyDiffOperator> {
        if !Hopf::same(t.hopf(), &self.hopf) {
            return Err(Error::AlgebraMismatch);
        }
        let n = self.action.nvars();
        let d = self.hopf.dim();
        let order = self.action.order();
        let mut out = PolyDiffOperator::zero(n, order);
        for (key, c) in t.terms() {
            let legs = key.len() / d.max(1);
            if t.legs() == 0 {
                out.add_term(vec![0; n], c);
                continue;
            }
            let mut acc: Vec<(Vec<u8>, Series)> = vec![(vec![0u8; n], c.clone())];
            for leg in 0..legs {
                let op = self.monomial_operator(&key[leg * d..(leg + 1) * d]);
                let mut next = Vec::new();
                for (k, ck) in &acc {
                    for (ok, oc) in op.terms() {
                        let mut nk: Vec<u8> = k[..n].iter().zip(&ok[..n]).map(|(a, b)| a + b).collect();
                        nk.extend(&k[n..]);
                        nk.extend(&ok[n..]);
                        next.push((nk, ck * oc));
                    }
                }
                acc = next;
            }
            for (k, c) in acc {
                out.add_term(k, &c);
            }
        }
        Ok(out)
    }

    pub fn apply(&self, p: &HPolyElement) -> Result<PolyDiffOperator> {
        let mut out = PolyDiffOperator::zero(self.action.nvars(), self.action.order());
        for t in p.parts().values() {
            out = &out + &self.apply_tensor(t)?;
        }
        Ok(out)
    }
}

/// f ⋆ g = m(J▷(f⊗g)) for a two-leg J acting through `action`.
pub struct StarProduct {
    j: Tensor,
    action: Arc<LieAction>,
    cache: Mutex<HashMap<(Vec<u8>, Vec<u8>), Poly>>,
}

impl StarProduct {
    pub fn new(twist: &FormalTwist, action: &Arc<LieAction>) -> Result<Self> {
        Self::from_tensor(twist.j().clone(), action)
    }

    /// Any two-leg tensor, certified or not.
    pub fn from_tensor(j: Tensor, action: &Arc<LieAction>) -> Result<Self> {
        if j.legs() != 2 {
            return Err(Error::DegreeError {
                expected: 2,
                found: j.legs() as i32,
            });
        }
        if !crate::lie::same_algebra(j.hopf().lie(), action.lie()) {
            return Err(Error::AlgebraMismatch);
        }
        if j.order() != action.order() {
            return Err(Error::ConfigMismatch(j.order(), action.order()));
        }
        action.verify()?;
        Ok(StarProduct {
            j,
            action: action.clone(),
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn j(&self) -> &Tensor {
        &self.j
    }

    pub fn action(&self) -> &Arc<LieAction> {
        &self.action
    }

    pub fn nvars(&self) -> usize {
        self.action.nvars()
    }

    pub fn order(&self) -> usize {
        self.action.order()
    }

    /// x^a ⋆ x^b.
    pub fn star_monomials(&self, a: &[u8], b: &[u8]) -> Poly {
        let key = (a.to_vec(), b.to_vec());
        if let Some(p) = self.cache.lock().unwrap().get(&key) {
            return p.clone();
        }
        let one = Series::one(self.order());
        let f = Poly::monomial(a, one.clone());
        let g = Poly::monomial(b, one);
        let p = self.action.act_tensor(&self.j, &[f, g]).expect("checked at construction");
        self.cache.lock().unwrap().insert(key, p.clone());
        p
    }

    pub fn star(&self, f: &Poly, g: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars(), self.order());
        for (a, ca) in f.terms() {
            for (b, cb) in g.terms() {
                out = &out + &self.star_monomials(a, b).scale(&(ca * cb));
            }
        }
        out
    }
}

/// Outcome of an associativity sweep over monomial triples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssociativityReport {
    pub triples_checked: usize,
    /// ħ-orders at which some residual (f⋆g)⋆h − f⋆(g⋆h) is nonzero.
    pub failing_orders: BTreeSet<usize>,
    /// First triple with a nonzero residual, with the lowest failing order.
    pub witness: Option<(Vec<u8>, Vec<u8>, Vec<u8>, usize)>,
}

impl AssociativityReport {
    pub fn is_associative(&self) -> bool {
        self.failing_orders.is_empty()
    }
}

/// Monomial triples with total degree ≤ `max_degree`.
pub fn monomial_triples(nvars: usize, max_degree: usize) -> Vec<(Vec<u8>, Vec<u8>, Vec<u8>)> {
    let monos = crate::action::monomials_up_to(nvars, max_degree);
    let deg = |m: &Vec<u8>| m.iter().map(|&e| e as usize).sum::<usize>();
    let mut out = Vec::new();
    for a in &monos {
        for b in &monos {
            for c in &monos {
                if deg(a) + deg(b) + deg(c) <= max_degree {
                    out.push((a.clone(), b.clone(), c.clone()));
                }
            }
        }
    }
    out
}

pub fn associativity_report(star: &StarProduct, max_degree: usize) -> AssociativityReport {
    let one = Series::one(star.order());
    let mut report = AssociativityReport {
        triples_checked: 0,
        failing_orders: BTreeSet::new(),
        witness: None,
    };
    for (a, b, c) in monomial_triples(star.nvars(), max_degree) {
        report.triples_checked += 1;
        let f = Poly::monomial(&a, one.clone());
        let h = Poly::monomial(&c, one.clone());
        let left = star.star(&star.star_monomials(&a, &b), &h);
        let right = star.star(&f, &star.star_monomials(&b, &c));
        let orders = (&left - &right).nonzero_orders();
        if let Some(&first) = orders.first() {
            let better = report.witness.as_ref().is_none_or(|w| first < w.3);
            if better {
                report.witness = Some((a.clone(), b.clone(), c.clone(), first));
            }
        }
        report.failing_orders.extend(orders);
    }
    report
}

/// Checks (f⋆g − g⋆f) = ħ π(df,dg) mod ħ² and 1⋆f = f⋆1 = f on all monomial
/// pairs of total degree ≤ `max_degree`. Returns the first failing pair.
pub fn classical_limit_defect(star: &StarProduct, pi: &PolyVectorField, max_degree: usize) -> Option<(Vec<u8>, Vec<u8>)> {
    let n = star.nvars();
    let order = star.order();
    let one = Series::one(order);
    let unit = vec![0u8; n];
    let monos = crate::action::monomials_up_to(n, max_degree);
    let deg = |m: &Vec<u8>| m.iter().map(|&e| e as usize).sum::<usize>();
    for a in &monos {
        let f = Poly::monomial(a, one.clone());
        if star.star_monomials(a, &unit) != f || star.star_monomials(&unit, a) != f {
            return Some((a.clone(), unit.clone()));
        }
        for b in &monos {
            if deg(a) + deg(b) > max_degree {
                continue;
            }
            let g = Poly::monomial(b, one.clone());
            let comm = &star.star_monomials(a, b) - &star.star_monomials(b, a);
            let expected = pi.pair(&f, &g).hbar_part(0);
            let first = if order == 0 { Poly::zero(n, order) } else { comm.hbar_part(1) };
            if !comm.hbar_part(0).is_zero() || (order > 0 && first != expected) {
                return Some((a.clone(), b.clone()));
            }
        }
    }
    None
}

/// Comparison of the Hochschild MC residual of B = Φ(F) with associativity of
/// m + B on monomial triples.
#[derive(Clone, Debug)]
pub struct McStarConsistency {
    pub mc_failing_orders: BTreeSet<usize>,
    pub associativity: AssociativityReport,
    /// ħ¹ coefficient of B(f,g) − B(g,f), as an operator.
    pub first_order_antisymmetric: PolyDiffOperator,
}

impl McStarConsistency {
    pub fn consistent(&self) -> bool {
        self.mc_failing_orders == self.associativity.failing_orders
    }
}

/// `f` is the degree-1 (two-leg) part of an H_poly element; the star product
/// is built from J = 1⊗1 + F. Without `max_degree` the triple sweep goes up to
/// twice the derivative order of B = Φ(F), which bounds the order of the
/// associator of m + B, so a nonzero associator is always detected.
pub fn mc_to_star_consistency(f: &Tensor, phi: &DeformationSymmetry, max_degree: Option<usize>) -> Result<McStarConsistency> {
    let b = phi.apply_tensor(f)?;
    let mc = hochschild_mc_residual(&b)?;
    let j = &Tensor::one(phi.hopf(), 2) + f;
    let star = StarProduct::from_tensor(j, phi.action())?;
    let max_degree = max_degree.unwrap_or_else(|| 2 * b.derivative_order());
    let associativity = associativity_report(&star, max_degree);
    let b1 = if b.order() == 0 { PolyDiffOperator::zero(b.nvars(), 0) } else { b.hbar_part(1) };
    let first_order_antisymmetric = &b1 - &b1.flip();
    Ok(McStarConsistency {
        mc_failing_orders: mc.nonzero_orders(),
        associativity,
        first_order_antisymmetric,
    })
}

/// u ▷ (f⋆g) = Σ (u₍₁₎ ▷ f) ⋆ (u₍₂₎ ▷ g) with Δ_J(u) = J⁻¹Δ(u)J, on all given
/// u and monomial pairs f, g. Returns the first failure.
pub fn twisted_module_defect(
    twist: &FormalTwist,
    action: &Arc<LieAction>,
    us: &[Tensor],
    monomials: &[Vec<u8>],
) -> Result<Option<(usize, Vec<u8>, Vec<u8>)>> {
    let star = StarProduct::new(twist, action)?;
    let tb = TwistedBialgebra::new(twist.clone());
    let d = twist.hopf().dim();
    let one = Series::one(action.order());
    for (ui, u) in us.iter().enumerate() {
        let du = tb.twisted_coproduct(u);
        for a in monomials {
            for b in monomials {
                let f = Poly::monomial(a, one.clone());
                let g = Poly::monomial(b, one.clone());
                let lhs = action.hopf_action(u, &star.star(&f, &g))?;
                let mut rhs = Poly::zero(action.nvars(), action.order());
                for (key, c) in du.terms() {
                    let u1 = Tensor::monomial(twist.hopf(), &[key[..d].to_vec()], Series::one(action.order()));
                    let u2 = Tensor::monomial(twist.hopf(), &[key[d..].to_vec()], Series::one(action.order()));
                    let left = action.hopf_action(&u1, &f)?;
                    let right = action.hopf_action(&u2, &g)?;
                    rhs = &rhs + &star.star(&left, &right).scale(c);
                }
                if lhs != rhs {
                    return Ok(Some((ui, a.clone(), b.clone())));
                }
            }
        }
    }
    Ok(None)
}

pub fn twisted_module_check(
    twist: &FormalTwist,
    action: &Arc<LieAction>,
    us: &[Tensor],
    monomials: &[Vec<u8>],
) -> Result<bool> {
    Ok(twisted_module_defect(twist, action, us, monomials)?.is_none())
}

/// A star-product table entry x^a ⋆ x^b.
pub fn star_table(star: &StarProduct, max_degree: usize) -> Vec<(Vec<u8>, Vec<u8>, Poly)> {
    let monos = crate::action::monomials_up_to(star.nvars(), max_degree);
    let deg = |m: &Vec<u8>| m.iter().map(|&e| e as usize).sum::<usize>();
    let mut out = Vec::new();
    for a in &monos {
        for b in &monos {
            if deg(a) + deg(b) <= max_degree {
                out.push((a.clone(), b.clone(), star.star_monomials(a, b)));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hpoly::{abelian_twist, HPoly};
    use crate::lie::LieAlgebra;
    use crate::scalar::rat;

    fn var(i: usize, order: usize) -> Poly {
        Poly::variable(2, order, i)
    }

    #[test]
    fn multiplication_is_associative() {
        let m = PolyDiffOperator::multiplication(2, 0);
        assert!(gerstenhaber(&m, &m).unwrap().is_zero());
        assert!(braces(&m, &[&m]).unwrap().is_zero());
    }

    #[test]
    fn derivations_are_hochschild_cocycles() {
        let x = PolyVectorField::term(&[1], &var(0, 0) * &var(0, 0));
        let d = PolyDiffOperator::vector_field(&x);
        assert!(hochschild_differential(&d).unwrap().is_zero());
        let sq = braces(&d, &[&d]).unwrap();
        assert!(!hochschild_differential(&sq).unwrap().is_zero());
    }

    #[test]
    fn braces_compose_operators() {
        let dx = PolyDiffOperator::vector_field(&PolyVectorField::partial(2, 0, 0));
        let xdy = PolyDiffOperator::vector_field(&PolyVectorField::term(&[1], var(0, 0)));
        let comp = braces(&dx, &[&xdy]).unwrap();
        let f = &(&var(0, 0) * &var(0, 0)) * &var(1, 0);
        assert_eq!(comp.apply(&[f.clone()]), dx.apply(&[xdy.apply(&[f])]));
    }

    #[test]
    fn phi_of_unit_pair_is_multiplication() {
        let lie = Arc::new(LieAlgebra::abelian(2));
        let hopf = Hopf::new(lie.clone(), 0);
        let action = Arc::new(LieAction::translations(&lie, 0).unwrap());
        let phi = DeformationSymmetry::new(&action, &hopf).unwrap();
        let m = phi.apply(&HPolyElement::unit_pair(&hopf)).unwrap();
        assert_eq!(m, PolyDiffOperator::multiplication(2, 0));
        let e12 = Tensor::monomial(&hopf, &[vec![1, 0], vec![0, 1]], Series::one(0));
        let b = phi.apply_tensor(&e12).unwrap();
        let f = &var(0, 0) * &var(0, 0);
        let g = &var(1, 0) * &var(0, 0);
        assert_eq!(b.apply(&[f.clone(), g.clone()]), &f.derivative(0) * &g.derivative(1));
        let hp = HPoly::new(&hopf);
        let p = HPolyElement::from_tensor(e12.clone());
        assert_eq!(
            phi.apply(&hp.bullet(&p, &p).unwrap()).unwrap(),
            braces(&b, &[&b]).unwrap()
        );
    }

    #[test]
    fn moyal_products() {
        let lie = Arc::new(LieAlgebra::abelian(2));
        let hopf = Hopf::new(lie.clone(), 3);
        let action = Arc::new(LieAction::translations(&lie, 3).unwrap());
        let j = abelian_twist(&hopf, &[(0, 1, rat(1))]).unwrap();
        let twist = FormalTwist::new(j).unwrap();
        let star = StarProduct::new(&twist, &action).unwrap();
        let x = var(0, 3);
        let y = var(1, 3);
        assert_eq!(star.star(&x, &y), &(&x * &y) + &Poly::constant(2, Series::hbar(3)));
        assert_eq!(star.star(&y, &x), &x * &y);
        assert!(associativity_report(&star, 3).is_associative());
    }
}

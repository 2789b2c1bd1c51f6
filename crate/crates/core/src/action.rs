//! Polynomial functions, polyvector fields and Lie algebra actions by vector
//! fields.
//!
//! A [`LieAction`] sends each basis element of g to a vector field on
//! ℚ[x₁,…,x_d]; it extends to multivectors (φ∧…∧φ) and to U(g), acting by
//! iterated derivations.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::hopf::Tensor;
use crate::lie::{canonical_wedge, check_cybe, LieAlgebra, MultiVector, RMatrix};
use crate::scalar::{Rational, Series};

/// A polynomial in `nvars` variables with ħ-series coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    order: usize,
    terms: BTreeMap<Vec<u8>, Series>,
}

impl Poly {
    pub fn zero(nvars: usize, order: usize) -> Self {
        Poly {
            nvars,
            order,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Series) -> Self {
        Self::monomial(&vec![0; nvars], c)
    }

    pub fn one(nvars: usize, order: usize) -> Self {
        Self::constant(nvars, Series::one(order))
    }

    pub fn variable(nvars: usize, order: usize, i: usize) -> Self {
        let mut e = vec![0u8; nvars];
        e[i] = 1;
        Self::monomial(&e, Series::one(order))
    }

    pub fn monomial(exponents: &[u8], c: Series) -> Self {
        let mut p = Self::zero(exponents.len(), c.order());
        p.add_term(exponents.to_vec(), &c);
        p
    }

    pub fn from_terms(nvars: usize, order: usize, terms: impl IntoIterator<Item = (Vec<u8>, Series)>) -> Self {
        let mut p = Self::zero(nvars, order);
        for (k, c) in terms {
            p.add_term(k, &c);
        }
        p
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

    pub fn coefficient(&self, exponents: &[u8]) -> Series {
        self.terms.get(exponents).cloned().unwrap_or_else(|| Series::zero(self.order))
    }

    pub fn add_term(&mut self, k: Vec<u8>, c: &Series) {
        assert_eq!(k.len(), self.nvars, "exponent vector length");
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&k) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&k);
                }
            }
            None => {
                self.terms.insert(k, c.clone());
            }
        }
    }

    pub fn scale(&self, c: &Series) -> Poly {
        Self::from_terms(self.nvars, self.order, self.terms.iter().map(|(k, v)| (k.clone(), v * c)))
    }

    pub fn scale_rational(&self, c: &Rational) -> Poly {
        Self::from_terms(self.nvars, self.order, self.terms.iter().map(|(k, v)| (k.clone(), v.scale(c))))
    }

    /// ∂/∂xᵢ.
    pub fn derivative(&self, i: usize) -> Poly {
        let mut out = Self::zero(self.nvars, self.order);
        for (k, c) in &self.terms {
            if k[i] == 0 {
                continue;
            }
            let mut e = k.clone();
            e[i] -= 1;
            out.add_term(e, &c.scale(&Rational::from_integer(BigInt::from(k[i]))));
        }
        out
    }

    /// ∂^α for a multi-index α.
    pub fn partial(&self, alpha: &[u8]) -> Poly {
        let mut out = self.clone();
        for (i, &a) in alpha.iter().enumerate() {
            for _ in 0..a {
                out = out.derivative(i);
            }
        }
        out
    }

    /// Component at ħⁿ, with constant coefficients.
    pub fn hbar_part(&self, n: usize) -> Poly {
        Self::from_terms(
            self.nvars,
            self.order,
            self.terms
                .iter()
                .map(|(k, c)| (k.clone(), Series::constant(self.order, c.coeff(n).clone()))),
        )
    }

    /// ħ-orders with a nonzero coefficient somewhere.
    pub fn nonzero_orders(&self) -> Vec<usize> {
        (0..=self.order)
            .filter(|&n| self.terms.values().any(|c| !c.coeff(n).is_zero()))
            .collect()
    }

    pub fn total_degree(&self) -> Option<usize> {
        self.terms.keys().map(|k| k.iter().map(|&e| e as usize).sum()).max()
    }

    fn check(&self, other: &Poly) {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        assert_eq!(self.order, other.order, "truncation order mismatch");
    }
}

/// All exponent vectors of total degree ≤ `max_deg`, in graded order.
pub fn monomials_up_to(nvars: usize, max_deg: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for deg in 0..=max_deg {
        for c in crate::hopf::compositions(deg, nvars) {
            out.push(c.into_iter().map(|e| e as u8).collect());
        }
    }
    out
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.check(rhs);
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), c);
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &-rhs
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            nvars: self.nvars,
            order: self.order,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect(),
        }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.check(rhs);
        let mut out = Poly::zero(self.nvars, self.order);
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                let e: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(e, &(ca * cb));
            }
        }
        out
    }
}

/// Default variable names: x, y, z, w, then x5, x6, ….
pub fn variable_name(i: usize) -> String {
    ["x", "y", "z", "w"].get(i).map(|s| s.to_string()).unwrap_or_else(|| format!("x{}", i + 1))
}

fn format_monomial(e: &[u8]) -> String {
    let parts: Vec<String> = e
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0)
        .map(|(i, &p)| if p == 1 { variable_name(i) } else { format!("{}^{}", variable_name(i), p) })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("·")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(k, c)| format!("({c})·{}", format_monomial(k))).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Σ f_I ∂_{i₁}∧…∧∂_{iₖ} on the canonical increasing index sets I.
#[derive(Clone, PartialEq, Eq)]
pub struct PolyVectorField {
    nvars: usize,
    order: usize,
    terms: BTreeMap<Vec<usize>, Poly>,
}

impl PolyVectorField {
    pub fn zero(nvars: usize, order: usize) -> Self {
        PolyVectorField {
            nvars,
            order,
            terms: BTreeMap::new(),
        }
    }

    /// f·∂_{i₁}∧…∧∂_{iₖ} for indices in any order.
    pub fn term(indices: &[usize], f: Poly) -> Self {
        let mut out = Self::zero(f.nvars, f.order);
        out.add_unsorted(indices, &f);
        out
    }

    pub fn function(f: Poly) -> Self {
        Self::term(&[], f)
    }

    /// ∂ᵢ.
    pub fn partial(nvars: usize, order: usize, i: usize) -> Self {
        Self::term(&[i], Poly::one(nvars, order))
    }

    /// Σᵢ fᵢ ∂ᵢ.
    pub fn vector_field(components: &[Poly]) -> Self {
        let nvars = components.len();
        let order = components.first().map(Poly::order).unwrap_or(0);
        let mut out = Self::zero(nvars, order);
        for (i, f) in components.iter().enumerate() {
            out.add_unsorted(&[i], f);
        }
        out
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> &BTreeMap<Vec<usize>, Poly> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, indices: &[usize]) -> Poly {
        self.terms.get(indices).cloned().unwrap_or_else(|| Poly::zero(self.nvars, self.order))
    }

    pub fn wedge_degree(&self) -> Option<usize> {
        let mut degs = self.terms.keys().map(Vec::len);
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    fn add_unsorted(&mut self, indices: &[usize], f: &Poly) {
        if f.is_zero() {
            return;
        }
        let Some((sign, key)) = canonical_wedge(indices) else { return };
        let f = if sign < 0 { -f } else { f.clone() };
        let sum = match self.terms.get(&key) {
            Some(g) => g + &f,
            None => f,
        };
        if sum.is_zero() {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, sum);
        }
    }

    pub fn scale_poly(&self, f: &Poly) -> Self {
        let mut out = Self::zero(self.nvars, self.order);
        for (k, g) in &self.terms {
            out.add_unsorted(k, &(g * f));
        }
        out
    }

    pub fn wedge(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars, self.order);
        for (a, fa) in &self.terms {
            for (b, fb) in &other.terms {
                let mut idx = a.clone();
                idx.extend(b);
                out.add_unsorted(&idx, &(fa * fb));
            }
        }
        out
    }

    /// Schouten bracket, via odd coordinates ξᵢ = ∂ᵢ:
    /// [P,Q] = Σᵢ P∂⃖_{ξᵢ} ∧ ∂_{xᵢ}Q − (−1)^{(p−1)(q−1)} Q∂⃖_{ξᵢ} ∧ ∂_{xᵢ}P.
    pub fn schouten(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars, self.order);
        for (a, fa) in &self.terms {
            for (b, fb) in &other.terms {
                let p = a.len() as i32;
                let q = b.len() as i32;
                let swap = if ((p - 1) * (q - 1)).rem_euclid(2) == 1 { 1 } else { -1 };
                for i in 0..self.nvars {
                    if let Some((s, rest)) = right_contract(a, i) {
                        let mut idx = rest;
                        idx.extend(b);
                        let f = fa * &fb.derivative(i);
                        out.add_unsorted(&idx, &if s < 0 { -&f } else { f });
                    }
                    if let Some((s, rest)) = right_contract(b, i) {
                        let mut idx = rest;
                        idx.extend(a);
                        let f = fb * &fa.derivative(i);
                        out.add_unsorted(&idx, &if s * swap < 0 { -&f } else { f });
                    }
                }
            }
        }
        out
    }

    /// X(f) for a vector field X = Σ Xⁱ∂ᵢ; higher parts are ignored.
    pub fn apply(&self, f: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars, self.order);
        for (k, g) in &self.terms {
            if k.len() == 1 {
                out = &out + &(g * &f.derivative(k[0]));
            }
        }
        out
    }

    /// π(df, dg) = Σ_{i<j} π^{ij}(∂ᵢf ∂ⱼg − ∂ⱼf ∂ᵢg) for the bivector part.
    pub fn pair(&self, f: &Poly, g: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars, self.order);
        for (k, c) in &self.terms {
            if k.len() == 2 {
                let (i, j) = (k[0], k[1]);
                let t = &(&f.derivative(i) * &g.derivative(j)) - &(&f.derivative(j) * &g.derivative(i));
                out = &out + &(c * &t);
            }
        }
        out
    }
}

/// Right contraction by ξᵢ on a sorted index set: sign and remaining indices.
fn right_contract(keys: &[usize], i: usize) -> Option<(i32, Vec<usize>)> {
    let pos = keys.iter().position(|&k| k == i)?;
    let mut rest = keys.to_vec();
    rest.remove(pos);
    let sign = if (keys.len() - 1 - pos) % 2 == 0 { 1 } else { -1 };
    Some((sign, rest))
}

impl Add for &PolyVectorField {
    type Output = PolyVectorField;
    fn add(self, rhs: &PolyVectorField) -> PolyVectorField {
        let mut out = self.clone();
        for (k, f) in &rhs.terms {
            out.add_unsorted(k, f);
        }
        out
    }
}

impl Sub for &PolyVectorField {
    type Output = PolyVectorField;
    fn sub(self, rhs: &PolyVectorField) -> PolyVectorField {
        self + &-rhs
    }
}

impl Neg for &PolyVectorField {
    type Output = PolyVectorField;
    fn neg(self) -> PolyVectorField {
        PolyVectorField {
            nvars: self.nvars,
            order: self.order,
            terms: self.terms.iter().map(|(k, f)| (k.clone(), -f)).collect(),
        }
    }
}

impl fmt::Display for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, c)| {
                let d: Vec<String> = k.iter().map(|&i| format!("∂{}", variable_name(i))).collect();
                if d.is_empty() {
                    format!("[{c}]")
                } else {
                    format!("[{c}]·{}", d.join("∧"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A linear map φ: g → vector fields on ℚ^d, given on a basis.
pub struct LieAction {
    lie: Arc<LieAlgebra>,
    nvars: usize,
    order: usize,
    fields: Vec<PolyVectorField>,
    cache: Mutex<HashMap<(Vec<u8>, Vec<u8>), Poly>>,
}

impl fmt::Debug for LieAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LieAction").field("nvars", &self.nvars).field("fields", &self.fields).finish()
    }
}

impl LieAction {
    /// `fields[i]` is φ(eᵢ); each must be a vector field in `nvars` variables.
    pub fn new(lie: &Arc<LieAlgebra>, nvars: usize, order: usize, fields: Vec<PolyVectorField>) -> Result<Self> {
        if fields.len() != lie.dim() {
            return Err(Error::DomainError(format!(
                "action gives {} vector fields for a {}-dimensional algebra",
                fields.len(),
                lie.dim()
            )));
        }
        for x in &fields {
            if x.nvars != nvars {
                return Err(Error::DomainError("vector field has the wrong number of variables".into()));
            }
            if x.order != order {
                return Err(Error::ConfigMismatch(x.order, order));
            }
            if let Some(d) = x.wedge_degree() {
                if d != 1 {
                    return Err(Error::DegreeError {
                        expected: 1,
                        found: d as i32,
                    });
                }
            }
        }
        Ok(LieAction {
            lie: lie.clone(),
            nvars,
            order,
            fields,
            cache: Mutex::new(HashMap::new()),
        })
    }

    /// φ(eᵢ) = ∂ᵢ on ℚ^d for the abelian algebra of dimension d.
    pub fn translations(lie: &Arc<LieAlgebra>, order: usize) -> Result<Self> {
        let d = lie.dim();
        Self::new(lie, d, order, (0..d).map(|i| PolyVectorField::partial(d, order, i)).collect())
    }

    /// φ(H) = −(x∂x + y∂y), φ(E) = ∂x on ℚ[x,y], plus idle extra variables.
    pub fn ax_plus_b(lie: &Arc<LieAlgebra>, nvars: usize, order: usize) -> Result<Self> {
        let x = Poly::variable(nvars, order, 0);
        let y = Poly::variable(nvars, order, 1);
        let h = &PolyVectorField::term(&[0], -&x) + &PolyVectorField::term(&[1], -&y);
        let e = PolyVectorField::partial(nvars, order, 0);
        Self::new(lie, nvars, order, vec![h, e])
    }

    pub fn lie(&self) -> &Arc<LieAlgebra> {
        &self.lie
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn field(&self, i: usize) -> &PolyVectorField {
        &self.fields[i]
    }

    /// First basis pair (i, j) with φ([eᵢ,eⱼ]) ≠ [φ(eᵢ),φ(eⱼ)].
    pub fn action_defect(&self) -> Option<(usize, usize)> {
        let d = self.lie.dim();
        for i in 0..d {
            for j in i + 1..d {
                let mut lhs = PolyVectorField::zero(self.nvars, self.order);
                for (k, c) in self.lie.bracket(i, j) {
                    lhs = &lhs + &self.fields[*k].scale_poly(&Poly::constant(self.nvars, Series::constant(self.order, c.clone())));
                }
                if lhs != self.fields[i].schouten(&self.fields[j]) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn check_action(&self) -> bool {
        self.action_defect().is_none()
    }

    pub fn verify(&self) -> Result<()> {
        match self.action_defect() {
            Some((i, j)) => Err(Error::NotAction { i, j }),
            None => Ok(()),
        }
    }

    /// φ∧…∧φ on multivectors.
    pub fn push_multivector(&self, m: &MultiVector) -> Result<PolyVectorField> {
        if !crate::lie::same_algebra(m.lie(), &self.lie) {
            return Err(Error::AlgebraMismatch);
        }
        if m.order() != self.order {
            return Err(Error::ConfigMismatch(m.order(), self.order));
        }
        let mut out = PolyVectorField::zero(self.nvars, self.order);
        for (k, c) in m.components() {
            let mut t = PolyVectorField::function(Poly::constant(self.nvars, c.clone()));
            for &i in k {
                t = t.wedge(&self.fields[i]);
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// u ▷ x^m for a PBW monomial u = e₀^{a₀}⋯e_{d−1}^{a_{d−1}}; the rightmost
    /// factor acts first.
    fn act_monomials(&self, u: &[u8], m: &[u8]) -> Poly {
        let key = (u.to_vec(), m.to_vec());
        if let Some(p) = self.cache.lock().unwrap().get(&key) {
            return p.clone();
        }
        let mut f = Poly::monomial(m, Series::one(self.order));
        for (i, &a) in u.iter().enumerate().rev() {
            for _ in 0..a {
                f = self.fields[i].apply(&f);
            }
        }
        self.cache.lock().unwrap().insert(key, f.clone());
        f
    }

    /// u ▷ f for u ∈ U(g)[[ħ]].
    pub fn hopf_action(&self, u: &Tensor, f: &Poly) -> Result<Poly> {
        self.act_tensor(u, std::slice::from_ref(f))
    }

    /// (u₀⊗…⊗u_k) ▷ (f₀,…,f_k) = Σ (u₀▷f₀)⋯(u_k▷f_k).
    pub fn act_tensor(&self, u: &Tensor, fs: &[Poly]) -> Result<Poly> {
        if u.legs() != fs.len() {
            return Err(Error::DomainError(format!("{}-leg tensor applied to {} functions", u.legs(), fs.len())));
        }
        if !crate::lie::same_algebra(u.hopf().lie(), &self.lie) {
            return Err(Error::AlgebraMismatch);
        }
        if u.order() != self.order {
            return Err(Error::ConfigMismatch(u.order(), self.order));
        }
        let d = self.lie.dim();
        let mut out = Poly::zero(self.nvars, self.order);
        for (key, c) in u.terms() {
            let mut prod = Poly::constant(self.nvars, c.clone());
            for (leg, f) in fs.iter().enumerate() {
                let mono = &key[leg * d..(leg + 1) * d];
                let mut acted = Poly::zero(self.nvars, self.order);
                for (m, cm) in f.terms() {
                    acted = &acted + &self.act_monomials(mono, m).scale(cm);
                }
                prod = &prod * &acted;
                if prod.is_zero() {
                    break;
                }
            }
            out = &out + &prod;
        }
        Ok(out)
    }
}

/// π = φ∧φ(r), after checking the CYBE and the action property.
pub fn induced_poisson(r: &RMatrix, phi: &LieAction) -> Result<PolyVectorField> {
    if !check_cybe(r.value())? {
        return Err(Error::NotTriangular {
            witness: crate::lie::cybe_defect(r.value())?.to_string(),
        });
    }
    phi.verify()?;
    phi.push_multivector(r.value())
}

/// First basis index X with [π, φ(X)] ≠ φ∧φ([r, X]).
pub fn poisson_action_defect(r: &RMatrix, phi: &LieAction, pi: &PolyVectorField) -> Result<Option<usize>> {
    for i in 0..phi.lie.dim() {
        let x = MultiVector::generator(&phi.lie, phi.order, i);
        let rhs = phi.push_multivector(&r.cobracket(&x)?)?;
        if pi.schouten(&phi.fields[i]) != rhs {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

pub fn check_poisson_action(r: &RMatrix, phi: &LieAction, pi: &PolyVectorField) -> Result<bool> {
    Ok(poisson_action_defect(r, phi, pi)?.is_none())
}

/// Multinomial coefficient n! / Π kᵢ!.
pub(crate) fn multinomial(parts: &[usize]) -> BigInt {
    let n: usize = parts.iter().sum();
    let mut out = crate::scalar::factorial(n);
    for &k in parts {
        out /= crate::scalar::factorial(k);
    }
    out
}

/// ∂^α x^m as (coefficient, exponent), or `None` if it vanishes.
pub(crate) fn differentiate_monomial(m: &[u8], alpha: &[u8]) -> Option<(BigInt, Vec<u8>)> {
    let mut c = BigInt::one();
    let mut e = m.to_vec();
    for (i, &a) in alpha.iter().enumerate() {
        if a > m[i] {
            return None;
        }
        for t in 0..a {
            c *= BigInt::from(m[i] - t);
        }
        e[i] -= a;
    }
    if c.is_zero() {
        None
    } else {
        Some((c, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hopf::Hopf;
    use crate::lie::bivector;
    use crate::scalar::rat;

    fn var(i: usize) -> Poly {
        Poly::variable(2, 0, i)
    }

    #[test]
    fn schouten_basic_rules() {
        let dx = PolyVectorField::partial(2, 0, 0);
        let x = PolyVectorField::function(var(0));
        assert_eq!(dx.schouten(&x), PolyVectorField::function(Poly::one(2, 0)));
        let xdx = PolyVectorField::term(&[0], var(0));
        let ydy = PolyVectorField::term(&[1], var(1));
        assert!(xdx.schouten(&ydy).is_zero());
        let pi = PolyVectorField::term(&[0, 1], var(1));
        assert!(pi.schouten(&pi).is_zero());
        // vector fields bracket as commutators
        let a = PolyVectorField::term(&[1], var(0));
        let b = PolyVectorField::term(&[0], var(1));
        let f = &(&var(0) * &var(0)) * &var(1);
        let lhs = a.schouten(&b).apply(&f);
        let rhs = &a.apply(&b.apply(&f)) - &b.apply(&a.apply(&f));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn ax_plus_b_action_and_poisson() {
        let lie = Arc::new(LieAlgebra::ax_plus_b());
        let phi = LieAction::ax_plus_b(&lie, 2, 0).unwrap();
        assert!(phi.check_action());
        let r = RMatrix::new(bivector(&lie, 0, &[(0, 1, rat(1))])).unwrap();
        let pi = induced_poisson(&r, &phi).unwrap();
        assert_eq!(pi, PolyVectorField::term(&[0, 1], var(1)));
        assert!(check_poisson_action(&r, &phi, &pi).unwrap());
        let bad = &pi + &PolyVectorField::term(&[0, 1], &var(0) * &var(0));
        assert!(!check_poisson_action(&r, &phi, &bad).unwrap());
    }

    #[test]
    fn sign_flipped_action_detected() {
        let lie = Arc::new(LieAlgebra::ax_plus_b());
        let h = PolyVectorField::term(&[0], var(0));
        let e = PolyVectorField::partial(2, 0, 0);
        let phi = LieAction::new(&lie, 2, 0, vec![h, e]).unwrap();
        assert_eq!(phi.action_defect(), Some((0, 1)));
    }

    #[test]
    fn abelian_hopf_action() {
        let lie = Arc::new(LieAlgebra::abelian(2));
        let hopf = Hopf::new(lie.clone(), 0);
        let phi = LieAction::translations(&lie, 0).unwrap();
        let xy = &var(0) * &var(1);
        let u = Tensor::monomial(&hopf, &[vec![1, 1]], Series::one(0));
        assert_eq!(phi.hopf_action(&u, &xy).unwrap(), Poly::one(2, 0));
        assert_eq!(phi.hopf_action(&Tensor::one(&hopf, 1), &xy).unwrap(), xy);
    }

    #[test]
    fn monomial_derivatives() {
        assert_eq!(differentiate_monomial(&[3, 1], &[2, 0]), Some((BigInt::from(6), vec![1, 1])));
        assert_eq!(differentiate_monomial(&[1, 1], &[2, 0]), None);
        assert_eq!(multinomial(&[2, 1, 1]), BigInt::from(12));
        assert_eq!(monomials_up_to(2, 2).len(), 6);
    }
}

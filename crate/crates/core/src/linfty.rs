//! L∞ calculus on the symmetric coalgebra S^c(L[1]) of a graded Lie algebra.
//!
//! Elements of L[1] are [`Vector`]s over the basis keys of a [`Host`]. Words
//! γ₁∧…∧γₙ live in [`Word`], stored on sorted key tuples with Koszul signs
//! absorbed. Coderivations and coalgebra morphisms are given by Taylor
//! components and extended to words by the shuffle formulas.
//!
//! A DGLA (L, d, [·,·]) is encoded as Q₁ = d and Q₂(a∧b) = (−1)^{|a|'}[a,b],
//! where |a|' is the shifted degree. Then Σ Qₙ(πⁿ)/n! = dπ + ½[π,π].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::Hash;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::hopf::{Hopf, Tensor};
use crate::hpoly::HPoly;
use crate::lie::{canonical_wedge, LieAlgebra, MultiVector};
use crate::scalar::{factorial, Rational, Series};

/// Default bound on word lengths for checks.
pub const DEFAULT_WORD_BOUND: usize = 4;

/// A graded Lie algebra with a basis, seen as the shifted space L[1].
pub trait Host {
    type Key: Ord + Clone + Hash + fmt::Debug;

    fn order(&self) -> usize;

    /// Degree of a basis element in L[1], i.e. its degree in L minus one.
    fn shifted_degree(&self, k: &Self::Key) -> i32;

    fn differential(&self, k: &Self::Key) -> Vector<Self::Key>;

    fn bracket(&self, a: &Self::Key, b: &Self::Key) -> Vector<Self::Key>;

    /// Some bilinear map L[1]⊗L[1] → L[1] of degree −1. It need not be
    /// natural; it only feeds [`GaugeMorphism`] sample automorphisms.
    fn odd_pairing(&self, _a: &Self::Key, _b: &Self::Key) -> Vector<Self::Key> {
        Vector::zero(self.order())
    }
}

/// A finite linear combination of basis keys with ħ-series coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct Vector<K: Ord> {
    order: usize,
    terms: BTreeMap<K, Series>,
}

impl<K: Ord + fmt::Debug> fmt::Debug for Vector<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|(k, c)| format!("({c})·{k:?}")).collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl<K: Ord + Clone> Vector<K> {
    pub fn zero(order: usize) -> Self {
        Vector {
            order,
            terms: BTreeMap::new(),
        }
    }

    pub fn basis(order: usize, k: K, c: Series) -> Self {
        let mut v = Self::zero(order);
        v.add_term(k, &c);
        v
    }

    pub fn from_terms(order: usize, terms: impl IntoIterator<Item = (K, Series)>) -> Self {
        let mut v = Self::zero(order);
        for (k, c) in terms {
            v.add_term(k, &c);
        }
        v
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> &BTreeMap<K, Series> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, k: K, c: &Series) {
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

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Vector {
            order: self.order,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &Series) -> Self {
        Self::from_terms(self.order, self.terms.iter().map(|(k, v)| (k.clone(), v * c)))
    }

    pub fn scale_rational(&self, c: &Rational) -> Self {
        Self::from_terms(self.order, self.terms.iter().map(|(k, v)| (k.clone(), v.scale(c))))
    }

    pub fn valuation(&self) -> Option<usize> {
        self.terms.values().filter_map(Series::valuation).min()
    }
}

/// An element of S^c(L[1]): Σ c · k₁∧…∧kₙ on sorted key tuples.
#[derive(Clone, PartialEq, Eq)]
pub struct Word<K: Ord> {
    order: usize,
    terms: BTreeMap<Vec<K>, Series>,
}

impl<K: Ord + fmt::Debug> fmt::Debug for Word<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|(k, c)| format!("({c})·{k:?}")).collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl<K: Ord + Clone> Word<K> {
    pub fn zero(order: usize) -> Self {
        Word {
            order,
            terms: BTreeMap::new(),
        }
    }

    /// The co-unit element 1 (empty word).
    pub fn one(order: usize) -> Self {
        let mut w = Self::zero(order);
        w.terms.insert(Vec::new(), Series::one(order));
        w
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> &BTreeMap<Vec<K>, Series> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_len(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    fn add_sorted(&mut self, k: Vec<K>, c: &Series) {
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

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_sorted(k.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_sorted(k.clone(), &-c);
        }
        out
    }

    pub fn scale(&self, c: &Series) -> Self {
        let mut out = Self::zero(self.order);
        for (k, v) in &self.terms {
            out.add_sorted(k.clone(), &(v * c));
        }
        out
    }

    /// Components of word length n.
    pub fn length_part(&self, n: usize) -> Self {
        Word {
            order: self.order,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.len() == n)
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
        }
    }

    /// Projection to L[1].
    pub fn project(&self) -> Vector<K> {
        Vector::from_terms(
            self.order,
            self.terms
                .iter()
                .filter(|(k, _)| k.len() == 1)
                .map(|(k, c)| (k[0].clone(), c.clone())),
        )
    }
}

/// Word ⊗ Word, for the coproduct of S^c.
pub type WordTensor<K> = BTreeMap<(Vec<K>, Vec<K>), Series>;

fn add_pair<K: Ord + Clone>(t: &mut WordTensor<K>, key: (Vec<K>, Vec<K>), c: &Series) {
    if c.is_zero() {
        return;
    }
    let entry = t.entry(key.clone()).or_insert_with(|| Series::zero(c.order()));
    *entry += c;
    if entry.is_zero() {
        t.remove(&key);
    }
}

fn odd(n: i32) -> bool {
    n.rem_euclid(2) == 1
}

fn inv_factorial(n: usize) -> Rational {
    Rational::new(BigInt::one(), factorial(n))
}

/// Sorts keys into canonical order. Returns the Koszul sign, or `None` if an
/// odd key repeats.
pub fn canonicalize<H: Host>(host: &H, keys: &[H::Key]) -> Option<(i32, Vec<H::Key>)> {
    let mut v: Vec<H::Key> = keys.to_vec();
    let mut sign = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            if odd(host.shifted_degree(&v[j - 1]) * host.shifted_degree(&v[j])) {
                sign = -sign;
            }
            v.swap(j - 1, j);
            j -= 1;
        }
    }
    for w in v.windows(2) {
        if w[0] == w[1] && odd(host.shifted_degree(&w[0])) {
            return None;
        }
    }
    Some((sign, v))
}

/// Koszul sign for listing `front` positions first, then the rest, both in
/// increasing order.
fn split_sign<H: Host>(host: &H, keys: &[H::Key], in_front: &[bool]) -> i32 {
    let mut sign = 1;
    for (j, kj) in keys.iter().enumerate() {
        if !in_front[j] {
            continue;
        }
        for (i, ki) in keys.iter().enumerate().take(j) {
            if !in_front[i] && odd(host.shifted_degree(ki) * host.shifted_degree(kj)) {
                sign = -sign;
            }
        }
    }
    sign
}

/// Sign for reordering positions into the concatenation of `blocks`.
fn blocks_sign<H: Host>(host: &H, keys: &[H::Key], blocks: &[Vec<usize>]) -> i32 {
    let perm: Vec<usize> = blocks.iter().flatten().copied().collect();
    let mut sign = 1;
    for a in 0..perm.len() {
        for b in a + 1..perm.len() {
            if perm[a] > perm[b] && odd(host.shifted_degree(&keys[perm[a]]) * host.shifted_degree(&keys[perm[b]])) {
                sign = -sign;
            }
        }
    }
    sign
}

impl<K: Ord + Clone> Word<K> {
    /// The single-key word c·k.
    pub fn from_vector(v: &Vector<K>) -> Self {
        let mut w = Self::zero(v.order);
        for (k, c) in &v.terms {
            w.add_sorted(vec![k.clone()], c);
        }
        w
    }
}

/// Adds c · k₁∧…∧kₙ (arbitrary order) to `w`.
pub fn add_unsorted<H: Host>(host: &H, w: &mut Word<H::Key>, keys: &[H::Key], c: &Series) {
    if let Some((sign, sorted)) = canonicalize(host, keys) {
        if sign < 0 {
            w.add_sorted(sorted, &-c);
        } else {
            w.add_sorted(sorted, c);
        }
    }
}

/// Wedge product in S(L[1]).
pub fn wedge<H: Host>(host: &H, a: &Word<H::Key>, b: &Word<H::Key>) -> Word<H::Key> {
    let mut out = Word::zero(a.order);
    for (ka, ca) in &a.terms {
        for (kb, cb) in &b.terms {
            let mut keys = ka.clone();
            keys.extend(kb.iter().cloned());
            add_unsorted(host, &mut out, &keys, &(ca * cb));
        }
    }
    out
}

/// γ₁∧…∧γₙ for vectors.
pub fn word_of<H: Host>(host: &H, order: usize, factors: &[Vector<H::Key>]) -> Word<H::Key> {
    factors
        .iter()
        .fold(Word::one(order), |acc, v| wedge(host, &acc, &Word::from_vector(v)))
}

/// Δ(γ₁∧…∧γₙ) = Σ over splittings, with Koszul signs.
pub fn word_coproduct<H: Host>(host: &H, w: &Word<H::Key>) -> WordTensor<H::Key> {
    let mut out = WordTensor::new();
    for (keys, c) in &w.terms {
        let n = keys.len();
        for mask in 0u32..(1 << n) {
            let front: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
            let sign = split_sign(host, keys, &front);
            let left: Vec<H::Key> = (0..n).filter(|&i| front[i]).map(|i| keys[i].clone()).collect();
            let right: Vec<H::Key> = (0..n).filter(|&i| !front[i]).map(|i| keys[i].clone()).collect();
            let c = if sign < 0 { -c } else { c.clone() };
            add_pair(&mut out, (left, right), &c);
        }
    }
    out
}

/// Taylor components Qₙ: ∧ⁿL[1] → L[1] of a coderivation.
pub trait Coderivation<K: Ord> {
    /// Components of higher arity vanish.
    fn max_arity(&self) -> usize;

    fn component(&self, args: &[K]) -> Vector<K>;
}

/// Extends Taylor components to words:
/// Q(γ₁∧…∧γₙ) = Σₖ Σ_{σ∈Sh(k,n−k)} ε(σ) Qₖ(γ_{σ(1)}∧…)∧γ_{σ(k+1)}∧….
pub fn coderivation_apply<H: Host>(
    host: &H,
    q: &dyn Coderivation<H::Key>,
    w: &Word<H::Key>,
    bound: usize,
) -> Result<Word<H::Key>> {
    if w.max_len() > bound {
        return Err(Error::BoundExceeded {
            len: w.max_len(),
            bound,
        });
    }
    let mut out = Word::zero(w.order);
    for (keys, c) in &w.terms {
        let n = keys.len();
        for mask in 0u32..(1 << n) {
            let k = mask.count_ones() as usize;
            if k > q.max_arity() {
                continue;
            }
            let front: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
            let sign = split_sign(host, keys, &front);
            let args: Vec<H::Key> = (0..n).filter(|&i| front[i]).map(|i| keys[i].clone()).collect();
            let rest: Vec<H::Key> = (0..n).filter(|&i| !front[i]).map(|i| keys[i].clone()).collect();
            let value = q.component(&args);
            for (vk, vc) in &value.terms {
                let mut new_keys = Vec::with_capacity(rest.len() + 1);
                new_keys.push(vk.clone());
                new_keys.extend(rest.iter().cloned());
                let coeff = vc * c;
                add_unsorted(host, &mut out, &new_keys, &if sign < 0 { -&coeff } else { coeff });
            }
        }
    }
    Ok(out)
}

/// Applies a coderivation to the left or right factor of a word tensor:
/// (Q⊗id + id⊗Q)(a⊗b) = Q(a)⊗b + (−1)^{|Q||a|} a⊗Q(b).
fn coderivation_on_tensor<H: Host>(
    host: &H,
    q: &dyn Coderivation<H::Key>,
    q_degree: i32,
    t: &WordTensor<H::Key>,
    bound: usize,
) -> Result<WordTensor<H::Key>> {
    let mut out = WordTensor::new();
    let order = host.order();
    for ((a, b), c) in t {
        let mut wa = Word::zero(order);
        wa.add_sorted(a.clone(), &Series::one(order));
        let mut wb = Word::zero(order);
        wb.add_sorted(b.clone(), &Series::one(order));
        for (qa, qc) in &coderivation_apply(host, q, &wa, bound)?.terms {
            add_pair(&mut out, (qa.clone(), b.clone()), &(qc * c));
        }
        let deg_a: i32 = a.iter().map(|k| host.shifted_degree(k)).sum();
        let flip = odd(q_degree * deg_a);
        for (qb, qc) in &coderivation_apply(host, q, &wb, bound)?.terms {
            let v = qc * c;
            add_pair(&mut out, (a.clone(), qb.clone()), &if flip { -&v } else { v });
        }
    }
    Ok(out)
}

/// Co-Leibniz rule Δ∘Q = (Q⊗id + id⊗Q)∘Δ on one word.
pub fn co_leibniz_check<H: Host>(
    host: &H,
    q: &dyn Coderivation<H::Key>,
    q_degree: i32,
    w: &Word<H::Key>,
    bound: usize,
) -> Result<bool> {
    let lhs = word_coproduct(host, &coderivation_apply(host, q, w, bound)?);
    let rhs = coderivation_on_tensor(host, q, q_degree, &word_coproduct(host, w), bound)?;
    Ok(lhs == rhs)
}

/// Q(Q(w)) = 0 for every word in `words`.
pub fn coderivation_square_check<H: Host>(
    host: &H,
    q: &dyn Coderivation<H::Key>,
    words: &[Word<H::Key>],
    bound: usize,
) -> Result<bool> {
    for w in words {
        let qw = coderivation_apply(host, q, w, bound)?;
        if !coderivation_apply(host, q, &qw, bound + 1)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The coderivation of a DGLA host, optionally with a curvature term Q₀.
pub struct DglaCoderivation<'a, H: Host> {
    host: &'a H,
    curvature: Vector<H::Key>,
    cache: Mutex<HashMap<Vec<H::Key>, Vector<H::Key>>>,
}

impl<'a, H: Host> DglaCoderivation<'a, H> {
    pub fn new(host: &'a H) -> Self {
        Self::curved(host, Vector::zero(host.order()))
    }

    pub fn curved(host: &'a H, curvature: Vector<H::Key>) -> Self {
        DglaCoderivation {
            host,
            curvature,
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl<H: Host> Coderivation<H::Key> for DglaCoderivation<'_, H> {
    fn max_arity(&self) -> usize {
        2
    }

    fn component(&self, args: &[H::Key]) -> Vector<H::Key> {
        match args.len() {
            0 => return self.curvature.clone(),
            1 | 2 => {}
            _ => return Vector::zero(self.host.order()),
        }
        if let Some(hit) = self.cache.lock().unwrap().get(args) {
            return hit.clone();
        }
        let v = if args.len() == 1 {
            self.host.differential(&args[0])
        } else {
            let b = self.host.bracket(&args[0], &args[1]);
            if odd(self.host.shifted_degree(&args[0])) {
                b.neg()
            } else {
                b
            }
        };
        self.cache.lock().unwrap().insert(args.to_vec(), v.clone());
        v
    }
}

/// Adds `extra` to Q₂(a, b) (and the symmetric counterpart). Used to verify
/// that the square check detects a corrupted bracket.
pub struct PerturbedCoderivation<'a, H: Host> {
    pub base: &'a dyn Coderivation<H::Key>,
    pub host: &'a H,
    pub a: H::Key,
    pub b: H::Key,
    pub extra: Vector<H::Key>,
}

impl<H: Host> Coderivation<H::Key> for PerturbedCoderivation<'_, H> {
    fn max_arity(&self) -> usize {
        self.base.max_arity().max(2)
    }

    fn component(&self, args: &[H::Key]) -> Vector<H::Key> {
        let v = self.base.component(args);
        if args.len() == 2 {
            if args[0] == self.a && args[1] == self.b {
                return v.add(&self.extra);
            }
            if args[0] == self.b && args[1] == self.a {
                let s = self.host.shifted_degree(&self.a) * self.host.shifted_degree(&self.b);
                let e = if odd(s) { self.extra.neg() } else { self.extra.clone() };
                return v.add(&e);
            }
        }
        v
    }
}

/// All m-tuples drawn from the terms of π, with their coefficient products.
fn pi_tuples<K: Ord + Clone>(pi: &Vector<K>, m: usize) -> Vec<(Vec<K>, Series)> {
    let mut acc: Vec<(Vec<K>, Series)> = vec![(Vec::new(), Series::one(pi.order))];
    for _ in 0..m {
        let mut next = Vec::new();
        for (ks, c) in &acc {
            for (k, kc) in &pi.terms {
                let prod = c * kc;
                if prod.is_zero() {
                    continue;
                }
                let mut v = ks.clone();
                v.push(k.clone());
                next.push((v, prod));
            }
        }
        acc = next;
    }
    acc
}

fn check_mc_domain<H: Host>(host: &H, pi: &Vector<H::Key>) -> Result<()> {
    if pi.valuation().is_some_and(|v| v == 0) {
        return Err(Error::NotFiltered);
    }
    for k in pi.terms.keys() {
        let d = host.shifted_degree(k);
        if d != 0 {
            return Err(Error::DegreeError { expected: 0, found: d });
        }
    }
    Ok(())
}

/// The π-twist Q^π, with components Q^π_n(γ) = Σₘ Q_{m+n}(π^m∧γ)/m!.
pub struct TwistedCoderivation<'a, K: Ord> {
    base: &'a dyn Coderivation<K>,
    pi: Vector<K>,
}

/// Twists a coderivation by π ∈ F¹L[1]⁰.
pub fn twist_coderivation<'a, H: Host>(
    host: &H,
    q: &'a dyn Coderivation<H::Key>,
    pi: &Vector<H::Key>,
) -> Result<TwistedCoderivation<'a, H::Key>> {
    check_mc_domain(host, pi)?;
    Ok(TwistedCoderivation {
        base: q,
        pi: pi.clone(),
    })
}

impl<K: Ord + Clone> Coderivation<K> for TwistedCoderivation<'_, K> {
    fn max_arity(&self) -> usize {
        self.base.max_arity()
    }

    fn component(&self, args: &[K]) -> Vector<K> {
        let order = self.pi.order;
        let mut out = Vector::zero(order);
        let n = args.len();
        if n > self.base.max_arity() {
            return out;
        }
        let max_m = (self.base.max_arity() - n).min(order);
        for m in 0..=max_m {
            let w = inv_factorial(m);
            for (ks, c) in pi_tuples(&self.pi, m) {
                let mut full = ks;
                full.extend(args.iter().cloned());
                out = out.add(&self.base.component(&full).scale(&c).scale_rational(&w));
            }
        }
        out
    }
}

/// exp(π) = Σ πᵏ/k! in S(L[1]).
pub fn exp_element<H: Host>(host: &H, pi: &Vector<H::Key>) -> Result<Word<H::Key>> {
    check_mc_domain(host, pi)?;
    let order = host.order();
    let base = Word::from_vector(pi);
    let mut power = Word::one(order);
    let mut sum = Word::one(order);
    for k in 1..=order {
        power = wedge(host, &power, &base);
        if power.is_zero() {
            break;
        }
        sum = sum.add(&power.scale(&Series::constant(order, inv_factorial(k))));
    }
    Ok(sum)
}

/// Σₙ Qₙ(πⁿ)/n!.
pub fn mc_residual<H: Host>(host: &H, q: &dyn Coderivation<H::Key>, pi: &Vector<H::Key>) -> Result<Vector<H::Key>> {
    check_mc_domain(host, pi)?;
    let order = host.order();
    let mut out = Vector::zero(order);
    for n in 0..=q.max_arity().min(order + 1) {
        let w = inv_factorial(n);
        for (ks, c) in pi_tuples(pi, n) {
            out = out.add(&q.component(&ks).scale(&c).scale_rational(&w));
        }
    }
    Ok(out)
}

/// Both evaluations of the Maurer–Cartan condition.
#[derive(Clone, Debug)]
pub struct McReport<K: Ord> {
    /// Σ Qₙ(πⁿ)/n!.
    pub residual: Vector<K>,
    /// Q(exp π).
    pub q_of_exp: Word<K>,
    /// Q(exp π) equals residual ∧ exp π.
    pub consistent: bool,
}

impl<K: Ord + Clone> McReport<K> {
    pub fn is_mc(&self) -> bool {
        self.residual.is_zero()
    }
}

pub fn mc_equation<H: Host>(host: &H, q: &dyn Coderivation<H::Key>, pi: &Vector<H::Key>) -> Result<McReport<H::Key>> {
    let residual = mc_residual(host, q, pi)?;
    let e = exp_element(host, pi)?;
    let q_of_exp = coderivation_apply(host, q, &e, usize::MAX)?;
    let expected = wedge(host, &Word::from_vector(&residual), &e);
    let consistent = q_of_exp == expected && (residual.is_zero() == q_of_exp.is_zero());
    Ok(McReport {
        residual,
        q_of_exp,
        consistent,
    })
}

/// exp(−π)∧Q(exp(π)∧a), evaluated on words.
pub fn twisted_apply_direct<H: Host>(
    host: &H,
    q: &dyn Coderivation<H::Key>,
    pi: &Vector<H::Key>,
    a: &Word<H::Key>,
) -> Result<Word<H::Key>> {
    let e = exp_element(host, pi)?;
    let e_inv = exp_element(host, &pi.neg())?;
    let inner = coderivation_apply(host, q, &wedge(host, &e, a), usize::MAX)?;
    Ok(wedge(host, &e_inv, &inner))
}

/// Taylor components Fₙ: ∧ⁿL[1] → L'[1], n ≥ 1, of a coalgebra morphism.
pub trait TaylorMorphism<K1: Ord, K2: Ord> {
    fn max_arity(&self) -> usize;

    fn component(&self, args: &[K1]) -> Vector<K2>;
}

fn ordered_partitions(n: usize, p: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let total = p.pow(n as u32);
    for code in 0..total {
        let mut blocks = vec![Vec::new(); p];
        let mut c = code;
        for i in 0..n {
            blocks[c % p].push(i);
            c /= p;
        }
        if blocks.iter().all(|b| !b.is_empty()) {
            out.push(blocks);
        }
    }
    out
}

/// Extends Taylor components to words by
/// F(γ₁∧…∧γₙ) = Σ_p Σ_{k₁+…+k_p=n} Σ_{σ∈Sh(k₁,…,k_p)} ε(σ)/p! F_{k₁}(…)∧…∧F_{k_p}(…).
pub fn morphism_apply<H1: Host, H2: Host>(
    src: &H1,
    dst: &H2,
    f: &dyn TaylorMorphism<H1::Key, H2::Key>,
    w: &Word<H1::Key>,
    bound: usize,
) -> Result<Word<H2::Key>> {
    if w.max_len() > bound {
        return Err(Error::BoundExceeded {
            len: w.max_len(),
            bound,
        });
    }
    let order = dst.order();
    let mut out = Word::zero(order);
    for (keys, c) in &w.terms {
        let n = keys.len();
        if n == 0 {
            out = out.add(&Word::one(order).scale(c));
            continue;
        }
        for p in 1..=n {
            let weight = inv_factorial(p);
            for blocks in ordered_partitions(n, p) {
                if blocks.iter().any(|b| b.len() > f.max_arity()) {
                    continue;
                }
                let sign = blocks_sign(src, keys, &blocks);
                let factors: Vec<Vector<H2::Key>> = blocks
                    .iter()
                    .map(|b| {
                        let args: Vec<H1::Key> = b.iter().map(|&i| keys[i].clone()).collect();
                        f.component(&args)
                    })
                    .collect();
                let mut term = word_of(dst, order, &factors).scale(c);
                term = term.scale(&Series::constant(order, weight.clone()));
                out = if sign < 0 { out.sub(&term) } else { out.add(&term) };
            }
        }
    }
    Ok(out)
}

/// Independent evaluation by splitting off the block containing the first
/// factor: F(γ₁∧w) = Σ_{S∌1} ε F_{1+|S|}(γ₁∧γ_S) ∧ F(γ_{rest}).
pub fn morphism_apply_recursive<H1: Host, H2: Host>(
    src: &H1,
    dst: &H2,
    f: &dyn TaylorMorphism<H1::Key, H2::Key>,
    w: &Word<H1::Key>,
) -> Word<H2::Key> {
    let order = dst.order();
    let mut out = Word::zero(order);
    for (keys, c) in &w.terms {
        out = out.add(&recursive_keys(src, dst, f, keys).scale(c));
    }
    out
}

fn recursive_keys<H1: Host, H2: Host>(
    src: &H1,
    dst: &H2,
    f: &dyn TaylorMorphism<H1::Key, H2::Key>,
    keys: &[H1::Key],
) -> Word<H2::Key> {
    let order = dst.order();
    let n = keys.len();
    if n == 0 {
        return Word::one(order);
    }
    let mut out = Word::zero(order);
    for mask in 0u32..(1 << (n - 1)) {
        let front: Vec<bool> = (0..n).map(|i| i == 0 || mask & (1 << (i - 1)) != 0).collect();
        let k = front.iter().filter(|&&b| b).count();
        if k > f.max_arity() {
            continue;
        }
        let sign = split_sign(src, keys, &front);
        let args: Vec<H1::Key> = (0..n).filter(|&i| front[i]).map(|i| keys[i].clone()).collect();
        let rest: Vec<H1::Key> = (0..n).filter(|&i| !front[i]).map(|i| keys[i].clone()).collect();
        let head = Word::from_vector(&f.component(&args));
        let tail = recursive_keys(src, dst, f, &rest);
        let term = wedge(dst, &head, &tail);
        out = if sign < 0 { out.sub(&term) } else { out.add(&term) };
    }
    out
}

/// Δ∘F = (F⊗F)∘Δ on one word.
pub fn morphism_coalgebra_check<H1: Host, H2: Host>(
    src: &H1,
    dst: &H2,
    f: &dyn TaylorMorphism<H1::Key, H2::Key>,
    w: &Word<H1::Key>,
    bound: usize,
) -> Result<bool> {
    let lhs = word_coproduct(dst, &morphism_apply(src, dst, f, w, bound)?);
    let mut rhs = WordTensor::new();
    let order = dst.order();
    for ((a, b), c) in word_coproduct(src, w) {
        let mut wa = Word::zero(src.order());
        wa.add_sorted(a, &Series::one(src.order()));
        let mut wb = Word::zero(src.order());
        wb.add_sorted(b, &Series::one(src.order()));
        let fa = morphism_apply(src, dst, f, &wa, bound)?;
        let fb = morphism_apply(src, dst, f, &wb, bound)?;
        for (ka, ca) in &fa.terms {
            for (kb, cb) in &fb.terms {
                add_pair(&mut rhs, (ka.clone(), kb.clone()), &(&(ca * cb) * &c));
            }
        }
    }
    let _ = order;
    Ok(lhs == rhs)
}

/// F∘Q = Q'∘F on one word.
pub fn morphism_intertwines<H1: Host, H2: Host>(
    src: &H1,
    dst: &H2,
    f: &dyn TaylorMorphism<H1::Key, H2::Key>,
    q: &dyn Coderivation<H1::Key>,
    q2: &dyn Coderivation<H2::Key>,
    w: &Word<H1::Key>,
) -> Result<bool> {
    let lhs = morphism_apply(src, dst, f, &coderivation_apply(src, q, w, usize::MAX)?, usize::MAX)?;
    let rhs = coderivation_apply(dst, q2, &morphism_apply(src, dst, f, w, usize::MAX)?, usize::MAX)?;
    Ok(lhs == rhs)
}

/// π_F = Σ_{n≥1} Fₙ(πⁿ)/n!.
pub fn pushforward_mc<H1: Host, H2: Host>(
    src: &H1,
    dst: &H2,
    f: &dyn TaylorMorphism<H1::Key, H2::Key>,
    pi: &Vector<H1::Key>,
) -> Result<Vector<H2::Key>> {
    check_mc_domain(src, pi)?;
    let order = dst.order();
    let mut out = Vector::zero(order);
    for n in 1..=f.max_arity().min(order) {
        let w = inv_factorial(n);
        for (ks, c) in pi_tuples(pi, n) {
            out = out.add(&f.component(&ks).scale(&c).scale_rational(&w));
        }
    }
    Ok(out)
}

/// A morphism given by its first component only.
pub struct StrictMorphism<K1, K2: Ord, F: Fn(&K1) -> Vector<K2>> {
    map: F,
    _marker: std::marker::PhantomData<(K1, K2)>,
}

impl<K1, K2: Ord, F: Fn(&K1) -> Vector<K2>> StrictMorphism<K1, K2, F> {
    pub fn new(map: F) -> Self {
        StrictMorphism {
            map,
            _marker: std::marker::PhantomData,
        }
    }
}

impl<K1: Ord, K2: Ord, F: Fn(&K1) -> Vector<K2>> TaylorMorphism<K1, K2> for StrictMorphism<K1, K2, F> {
    fn max_arity(&self) -> usize {
        1
    }

    fn component(&self, args: &[K1]) -> Vector<K2> {
        assert_eq!(args.len(), 1);
        (self.map)(&args[0])
    }
}

/// The π-twist of F with components F^π_n(γ) = Σₘ F_{m+n}(π^m∧γ)/m!,
/// i.e. the Taylor coefficients of exp(−π_F)∧F(exp(π)∧·).
pub struct TwistedMorphism<'a, K1: Ord, K2: Ord> {
    base: &'a dyn TaylorMorphism<K1, K2>,
    pi: Vector<K1>,
    order: usize,
}

pub fn twist_morphism<'a, H1: Host, H2: Host>(
    src: &H1,
    dst: &H2,
    f: &'a dyn TaylorMorphism<H1::Key, H2::Key>,
    pi: &Vector<H1::Key>,
) -> Result<TwistedMorphism<'a, H1::Key, H2::Key>> {
    check_mc_domain(src, pi)?;
    Ok(TwistedMorphism {
        base: f,
        pi: pi.clone(),
        order: dst.order(),
    })
}

impl<K1: Ord + Clone, K2: Ord + Clone> TaylorMorphism<K1, K2> for TwistedMorphism<'_, K1, K2> {
    fn max_arity(&self) -> usize {
        self.base.max_arity()
    }

    fn component(&self, args: &[K1]) -> Vector<K2> {
        let n = args.len();
        let mut out = Vector::zero(self.order);
        if n > self.base.max_arity() {
            return out;
        }
        let max_m = (self.base.max_arity() - n).min(self.order);
        for m in 0..=max_m {
            let w = inv_factorial(m);
            for (ks, c) in pi_tuples(&self.pi, m) {
                let mut full = ks;
                full.extend(args.iter().cloned());
                out = out.add(&self.base.component(&full).scale(&c).scale_rational(&w));
            }
        }
        out
    }
}

/// F^π evaluated literally as exp(s·π_F)∧F(exp(π)∧a) with s = ±1.
pub fn twisted_morphism_direct<H1: Host, H2: Host>(
    src: &H1,
    dst: &H2,
    f: &dyn TaylorMorphism<H1::Key, H2::Key>,
    pi: &Vector<H1::Key>,
    a: &Word<H1::Key>,
    prefactor_sign: i32,
) -> Result<Word<H2::Key>> {
    let pi_f = pushforward_mc(src, dst, f, pi)?;
    let e = exp_element(src, pi)?;
    let inner = morphism_apply(src, dst, f, &wedge(src, &e, a), usize::MAX)?;
    let pre = if prefactor_sign < 0 { pi_f.neg() } else { pi_f };
    Ok(wedge(dst, &exp_element(dst, &pre)?, &inner))
}

/// G∘F with components pr₁ G(F(γ₁∧…∧γₙ)).
pub struct ComposedMorphism<'a, H1: Host, H2: Host, H3: Host> {
    pub src: &'a H1,
    pub mid: &'a H2,
    pub dst: &'a H3,
    pub f: &'a dyn TaylorMorphism<H1::Key, H2::Key>,
    pub g: &'a dyn TaylorMorphism<H2::Key, H3::Key>,
}

impl<H1: Host, H2: Host, H3: Host> TaylorMorphism<H1::Key, H3::Key> for ComposedMorphism<'_, H1, H2, H3> {
    fn max_arity(&self) -> usize {
        self.f.max_arity().saturating_mul(self.g.max_arity())
    }

    fn component(&self, args: &[H1::Key]) -> Vector<H3::Key> {
        let mut w = Word::zero(self.src.order());
        add_unsorted(self.src, &mut w, args, &Series::one(self.src.order()));
        let fw = morphism_apply(self.src, self.mid, self.f, &w, usize::MAX).expect("unbounded");
        morphism_apply(self.mid, self.dst, self.g, &fw, usize::MAX)
            .expect("unbounded")
            .project()
    }
}

/// The odd coderivation H with H₂(a,b) = h(a,b) + (−1)^{|a|'|b|'}h(b,a) for
/// the host's odd pairing h.
struct PairingCoderivation<'a, H: Host> {
    host: &'a H,
}

impl<H: Host> Coderivation<H::Key> for PairingCoderivation<'_, H> {
    fn max_arity(&self) -> usize {
        2
    }

    fn component(&self, args: &[H::Key]) -> Vector<H::Key> {
        if args.len() != 2 {
            return Vector::zero(self.host.order());
        }
        let (a, b) = (&args[0], &args[1]);
        let ab = self.host.odd_pairing(a, b);
        let ba = self.host.odd_pairing(b, a);
        if odd(self.host.shifted_degree(a) * self.host.shifted_degree(b)) {
            ab.sub(&ba)
        } else {
            ab.add(&ba)
        }
    }
}

/// The L∞ automorphism exp([Q,H]) of a DGLA, where H comes from the host's
/// odd pairing. Since [Q,[Q,H]] = 0 it commutes with Q; its Taylor
/// components are in general nonzero in every arity.
pub struct GaugeMorphism<'a, H: Host> {
    host: &'a H,
    q: DglaCoderivation<'a, H>,
    h: PairingCoderivation<'a, H>,
    cache: Mutex<HashMap<Vec<H::Key>, Vector<H::Key>>>,
}

impl<'a, H: Host> GaugeMorphism<'a, H> {
    pub fn new(host: &'a H) -> Self {
        GaugeMorphism {
            host,
            q: DglaCoderivation::new(host),
            h: PairingCoderivation { host },
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// D = QH + HQ.
    fn d_apply(&self, w: &Word<H::Key>) -> Word<H::Key> {
        let qh = coderivation_apply(self.host, &self.q, &coderivation_apply(self.host, &self.h, w, usize::MAX).unwrap(), usize::MAX).unwrap();
        let hq = coderivation_apply(self.host, &self.h, &coderivation_apply(self.host, &self.q, w, usize::MAX).unwrap(), usize::MAX).unwrap();
        qh.add(&hq)
    }

    /// exp(D)(w) = Σ Dᵏ(w)/k!, finite because D shortens words.
    pub fn apply_direct(&self, w: &Word<H::Key>) -> Word<H::Key> {
        let order = self.host.order();
        let mut term = w.clone();
        let mut sum = w.clone();
        let mut k = 0usize;
        while !term.is_zero() {
            k += 1;
            term = self
                .d_apply(&term)
                .scale(&Series::constant(order, Rational::new(BigInt::one(), BigInt::from(k))));
            sum = sum.add(&term);
        }
        sum
    }
}

impl<H: Host> TaylorMorphism<H::Key, H::Key> for GaugeMorphism<'_, H> {
    fn max_arity(&self) -> usize {
        usize::MAX
    }

    fn component(&self, args: &[H::Key]) -> Vector<H::Key> {
        let order = self.host.order();
        let Some((sign, sorted)) = canonicalize(self.host, args) else {
            return Vector::zero(order);
        };
        let cached = self.cache.lock().unwrap().get(&sorted).cloned();
        let v = match cached {
            Some(v) => v,
            None => {
                let mut w = Word::zero(order);
                w.add_sorted(sorted.clone(), &Series::one(order));
                let v = self.apply_direct(&w).project();
                self.cache.lock().unwrap().insert(sorted, v.clone());
                v
            }
        };
        if sign < 0 {
            v.neg()
        } else {
            v
        }
    }
}

/// (∧•g, 0, Schouten) with wedge-degree-k keys of shifted degree k − 2.
pub struct SchoutenHost {
    lie: Arc<LieAlgebra>,
    order: usize,
}

impl SchoutenHost {
    pub fn new(lie: &Arc<LieAlgebra>, order: usize) -> Self {
        SchoutenHost { lie: lie.clone(), order }
    }

    pub fn lie(&self) -> &Arc<LieAlgebra> {
        &self.lie
    }

    pub fn to_vector(&self, m: &MultiVector) -> Vector<Vec<usize>> {
        Vector::from_terms(self.order, m.components().iter().map(|(k, c)| (k.clone(), c.clone())))
    }

    pub fn to_multivector(&self, v: &Vector<Vec<usize>>) -> MultiVector {
        let mut out = MultiVector::zero(&self.lie, self.order);
        for (k, c) in v.terms() {
            out = &out + &MultiVector::basis(&self.lie, self.order, k, c.clone());
        }
        out
    }
}

fn contract(index: usize, keys: &[usize]) -> Option<(i32, Vec<usize>)> {
    let pos = keys.iter().position(|&k| k == index)?;
    let mut rest = keys.to_vec();
    rest.remove(pos);
    Some((if pos % 2 == 0 { 1 } else { -1 }, rest))
}

impl Host for SchoutenHost {
    type Key = Vec<usize>;

    fn order(&self) -> usize {
        self.order
    }

    fn shifted_degree(&self, k: &Vec<usize>) -> i32 {
        k.len() as i32 - 2
    }

    fn differential(&self, _k: &Vec<usize>) -> Vector<Vec<usize>> {
        Vector::zero(self.order)
    }

    fn bracket(&self, a: &Vec<usize>, b: &Vec<usize>) -> Vector<Vec<usize>> {
        let one = Series::one(self.order);
        let x = MultiVector::basis(&self.lie, self.order, a, one.clone());
        let y = MultiVector::basis(&self.lie, self.order, b, one);
        self.to_vector(&x.schouten(&y).expect("same algebra"))
    }

    /// ι_{e⁰}(a) ∧ ι_{e²}ι_{e¹}(b), indices taken modulo the dimension.
    fn odd_pairing(&self, a: &Vec<usize>, b: &Vec<usize>) -> Vector<Vec<usize>> {
        let d = self.lie.dim();
        let mut out = Vector::zero(self.order);
        let Some((s1, ra)) = contract(0, a) else { return out };
        let Some((s2, rb1)) = contract(1 % d, b) else { return out };
        let Some((s3, rb)) = contract(2 % d, &rb1) else { return out };
        let mut keys = ra;
        keys.extend(rb);
        if keys.is_empty() {
            return out;
        }
        if let Some((s4, sorted)) = canonical_wedge(&keys) {
            let sign = s1 * s2 * s3 * s4;
            out.add_term(sorted, &Series::constant(self.order, Rational::from_integer(sign.into())));
        }
        out
    }
}

/// H_poly with keys the flattened PBW exponents of k+1 legs (shifted degree k − 1).
pub struct HPolyHost {
    hpoly: HPoly,
}

impl HPolyHost {
    pub fn new(hpoly: HPoly) -> Self {
        HPolyHost { hpoly }
    }

    pub fn hpoly(&self) -> &HPoly {
        &self.hpoly
    }

    fn hopf(&self) -> &Arc<Hopf> {
        self.hpoly.hopf()
    }

    fn legs(&self, k: &[u8]) -> usize {
        k.len() / self.hopf().dim()
    }

    fn tensor(&self, k: &[u8]) -> Tensor {
        let d = self.hopf().dim();
        let legs: Vec<Vec<u8>> = k.chunks(d).map(<[u8]>::to_vec).collect();
        if legs.is_empty() {
            Tensor::one(self.hopf(), 0)
        } else {
            Tensor::monomial(self.hopf(), &legs, Series::one(self.hopf().order()))
        }
    }

    pub fn to_vector(&self, t: &Tensor) -> Vector<Vec<u8>> {
        Vector::from_terms(self.hopf().order(), t.terms().iter().map(|(k, c)| (k.clone(), c.clone())))
    }

    fn hpoly_to_vector(&self, p: &crate::hpoly::HPolyElement) -> Vector<Vec<u8>> {
        let mut out = Vector::zero(self.hopf().order());
        for t in p.parts().values() {
            out = out.add(&self.to_vector(t));
        }
        out
    }

    pub fn to_hpoly(&self, v: &Vector<Vec<u8>>) -> crate::hpoly::HPolyElement {
        let mut out = crate::hpoly::HPolyElement::zero(self.hopf());
        for (k, c) in v.terms() {
            out = &out + &crate::hpoly::HPolyElement::from_tensor(self.tensor(k).scale(c));
        }
        out
    }
}

impl Host for HPolyHost {
    type Key = Vec<u8>;

    fn order(&self) -> usize {
        self.hopf().order()
    }

    fn shifted_degree(&self, k: &Vec<u8>) -> i32 {
        self.legs(k) as i32 - 2
    }

    fn differential(&self, k: &Vec<u8>) -> Vector<Vec<u8>> {
        let p = crate::hpoly::HPolyElement::from_tensor(self.tensor(k));
        self.hpoly_to_vector(&self.hpoly.differential(&p).expect("same algebra"))
    }

    fn bracket(&self, a: &Vec<u8>, b: &Vec<u8>) -> Vector<Vec<u8>> {
        let p = crate::hpoly::HPolyElement::from_tensor(self.tensor(a));
        let q = crate::hpoly::HPolyElement::from_tensor(self.tensor(b));
        self.hpoly_to_vector(&self.hpoly.bracket(&p, &q).expect("same algebra"))
    }

    /// Multiplies the first four legs of a⊗b into one.
    fn odd_pairing(&self, a: &Vec<u8>, b: &Vec<u8>) -> Vector<Vec<u8>> {
        let t = self.tensor(a).outer(&self.tensor(b));
        if t.legs() < 4 {
            return Vector::zero(self.order());
        }
        self.to_vector(&t.merge_legs(0, 4))
    }
}

//! Finite-dimensional Lie algebras and the Schouten calculus on ∧•g.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{rat, Rational, Series};

/// A Lie algebra given by structure constants [eᵢ, eⱼ] = Σₖ c^k_{ij} eₖ.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LieAlgebra {
    names: Vec<String>,
    brackets: Vec<Vec<Vec<(usize, Rational)>>>,
}

impl LieAlgebra {
    /// Builds the algebra from the full table `c[i][j][k]`, rejecting tables
    /// that are not antisymmetric or violate Jacobi.
    pub fn from_structure_constants(names: Vec<String>, c: Vec<Vec<Vec<Rational>>>) -> Result<Self> {
        let d = names.len();
        if d == 0 {
            return Err(Error::DomainError("a Lie algebra needs a nonempty basis".into()));
        }
        if c.len() != d || c.iter().any(|row| row.len() != d || row.iter().any(|v| v.len() != d)) {
            return Err(Error::Schema(format!("structure constant table must be {d}x{d}x{d}")));
        }
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    if c[i][j][k] != -c[j][i][k].clone() {
                        return Err(Error::NotAntisymmetric { i, j, k });
                    }
                }
            }
        }
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let mut sum = Rational::zero();
                        for m in 0..d {
                            sum += &c[i][j][m] * &c[m][k][l];
                            sum += &c[j][k][m] * &c[m][i][l];
                            sum += &c[k][i][m] * &c[m][j][l];
                        }
                        if !sum.is_zero() {
                            return Err(Error::JacobiViolation { i, j, k, l });
                        }
                    }
                }
            }
        }
        let brackets = c
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|v| {
                        v.into_iter()
                            .enumerate()
                            .filter(|(_, x)| !x.is_zero())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(LieAlgebra { names, brackets })
    }

    /// Builds the algebra from the listed brackets [eᵢ, eⱼ] = Σ c eₖ; the
    /// opposite orderings are filled in by antisymmetry.
    pub fn from_brackets(names: Vec<String>, brackets: &[(usize, usize, Vec<(usize, Rational)>)]) -> Result<Self> {
        let d = names.len();
        let mut c = vec![vec![vec![Rational::zero(); d]; d]; d];
        let mut given = vec![vec![false; d]; d];
        for (i, j, terms) in brackets {
            let (i, j) = (*i, *j);
            if i >= d || j >= d || terms.iter().any(|(k, _)| *k >= d) {
                return Err(Error::Schema("bracket index out of range".into()));
            }
            let mut v = vec![Rational::zero(); d];
            for (k, x) in terms {
                v[*k] += x;
            }
            if given[j][i] || given[i][j] {
                for k in 0..d {
                    let existing = if given[i][j] { c[i][j][k].clone() } else { -c[j][i][k].clone() };
                    if existing != v[k] {
                        return Err(Error::NotAntisymmetric { i, j, k });
                    }
                }
            }
            if i == j && v.iter().any(|x| !x.is_zero()) {
                return Err(Error::NotAntisymmetric { i, j, k: v.iter().position(|x| !x.is_zero()).unwrap() });
            }
            for k in 0..d {
                c[j][i][k] = -v[k].clone();
                c[i][j][k] = v[k].clone();
            }
            given[i][j] = true;
        }
        Self::from_structure_constants(names, c)
    }

    pub fn abelian(dim: usize) -> Self {
        let names = (1..=dim).map(|i| format!("e{i}")).collect();
        Self::from_brackets(names, &[]).expect("abelian algebra")
    }

    /// The two-dimensional non-abelian algebra, basis (H, E) with [H, E] = E.
    pub fn ax_plus_b() -> Self {
        Self::from_brackets(vec!["H".into(), "E".into()], &[(0, 1, vec![(1, rat(1))])]).expect("ax+b")
    }

    /// sl(2) in the basis (H, E, F).
    pub fn sl2() -> Self {
        Self::from_brackets(
            vec!["H".into(), "E".into(), "F".into()],
            &[
                (0, 1, vec![(1, rat(2))]),
                (0, 2, vec![(2, rat(-2))]),
                (1, 2, vec![(0, rat(1))]),
            ],
        )
        .expect("sl2")
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// [eᵢ, eⱼ] as a sparse list of (k, c^k_{ij}).
    pub fn bracket(&self, i: usize, j: usize) -> &[(usize, Rational)] {
        &self.brackets[i][j]
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> Rational {
        self.brackets[i][j]
            .iter()
            .find(|(m, _)| *m == k)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn is_abelian(&self) -> bool {
        self.brackets.iter().all(|row| row.iter().all(Vec::is_empty))
    }
}

/// Sorts `indices` into increasing order, returning the permutation sign, or
/// `None` if an index repeats.
pub(crate) fn canonical_wedge(indices: &[usize]) -> Option<(i32, Vec<usize>)> {
    let mut v = indices.to_vec();
    let mut sign = 1;
    for a in 0..v.len() {
        for b in 0..v.len() - 1 - a {
            if v[b] > v[b + 1] {
                v.swap(b, b + 1);
                sign = -sign;
            } else if v[b] == v[b + 1] {
                return None;
            }
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((sign, v))
}

pub(crate) fn same_algebra(a: &Arc<LieAlgebra>, b: &Arc<LieAlgebra>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// An element of ∧•g (wedge degree ≥ 1) with ħ-series coefficients, stored on
/// the canonical basis e_{i₁}∧…∧e_{iₖ}, i₁ < … < iₖ.
#[derive(Clone, Debug)]
pub struct MultiVector {
    lie: Arc<LieAlgebra>,
    order: usize,
    comps: BTreeMap<Vec<usize>, Series>,
}

impl PartialEq for MultiVector {
    fn eq(&self, other: &Self) -> bool {
        same_algebra(&self.lie, &other.lie) && self.comps == other.comps
    }
}

impl MultiVector {
    pub fn zero(lie: &Arc<LieAlgebra>, order: usize) -> Self {
        MultiVector {
            lie: lie.clone(),
            order,
            comps: BTreeMap::new(),
        }
    }

    /// c · e_{i₁}∧…∧e_{iₖ} for arbitrary (not necessarily sorted) indices.
    pub fn basis(lie: &Arc<LieAlgebra>, order: usize, indices: &[usize], c: Series) -> Self {
        assert!(!indices.is_empty(), "scalars are not part of ∧•g here");
        assert!(indices.iter().all(|&i| i < lie.dim()), "basis index out of range");
        let mut mv = Self::zero(lie, order);
        if let Some((sign, key)) = canonical_wedge(indices) {
            let c = if sign < 0 { -&c } else { c };
            mv.add_term(key, &c);
        }
        mv
    }

    pub fn generator(lie: &Arc<LieAlgebra>, order: usize, i: usize) -> Self {
        Self::basis(lie, order, &[i], Series::one(order))
    }

    /// Rational multiple of e_{i₁}∧…∧e_{iₖ}.
    pub fn wedge_of(lie: &Arc<LieAlgebra>, order: usize, indices: &[usize], c: Rational) -> Self {
        Self::basis(lie, order, indices, Series::constant(order, c))
    }

    pub fn lie(&self) -> &Arc<LieAlgebra> {
        &self.lie
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn components(&self) -> &BTreeMap<Vec<usize>, Series> {
        &self.comps
    }

    pub fn coefficient(&self, indices: &[usize]) -> Series {
        self.comps.get(indices).cloned().unwrap_or_else(|| Series::zero(self.order))
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Wedge degree if homogeneous.
    pub fn wedge_degree(&self) -> Option<usize> {
        let mut degs = self.comps.keys().map(Vec::len);
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub(crate) fn add_term(&mut self, key: Vec<usize>, c: &Series) {
        if c.is_zero() {
            return;
        }
        let entry = self.comps.entry(key.clone()).or_insert_with(|| Series::zero(self.order));
        *entry += c;
        if entry.is_zero() {
            self.comps.remove(&key);
        }
    }

    pub fn scale(&self, c: &Series) -> Self {
        let mut out = Self::zero(&self.lie, self.order);
        for (k, v) in &self.comps {
            out.add_term(k.clone(), &(v * c));
        }
        out
    }

    pub fn scale_rational(&self, c: &Rational) -> Self {
        self.scale(&Series::constant(self.order, c.clone()))
    }

    /// Homogeneous component of the given wedge degree.
    pub fn part(&self, degree: usize) -> Self {
        let mut out = Self::zero(&self.lie, self.order);
        out.comps = self
            .comps
            .iter()
            .filter(|(k, _)| k.len() == degree)
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        out
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if !same_algebra(&self.lie, &other.lie) {
            return Err(Error::AlgebraMismatch);
        }
        let mut out = Self::zero(&self.lie, self.order);
        for (a, ca) in &self.comps {
            for (b, cb) in &other.comps {
                let idx: Vec<usize> = a.iter().chain(b).copied().collect();
                if let Some((sign, key)) = canonical_wedge(&idx) {
                    let c = ca * cb;
                    out.add_term(key, &if sign < 0 { -&c } else { c });
                }
            }
        }
        Ok(out)
    }

    /// The Lie bracket of two elements of g = ∧¹g.
    pub fn lie_bracket(&self, other: &Self) -> Result<Self> {
        for x in [self, other] {
            match x.wedge_degree() {
                Some(1) | None => {}
                Some(d) => {
                    return Err(Error::DegreeError {
                        expected: 1,
                        found: d as i32,
                    })
                }
            }
        }
        self.schouten(other)
    }

    /// The Schouten bracket, determined by the Lie bracket on g and the rule
    /// [X₀∧…∧Xₖ, Y] = Σⱼ (−1)^{kl+j} [Xⱼ, Y]∧X₀∧…X̂ⱼ…∧Xₖ for Y of wedge
    /// degree l+1.
    pub fn schouten(&self, other: &Self) -> Result<Self> {
        if !same_algebra(&self.lie, &other.lie) {
            return Err(Error::AlgebraMismatch);
        }
        let mut out = Self::zero(&self.lie, self.order);
        for (x, cx) in &self.comps {
            for (y, cy) in &other.comps {
                let c = cx * cy;
                if c.is_zero() {
                    continue;
                }
                for (key, sign, coef) in schouten_basis(&self.lie, x, y) {
                    let mut t = c.scale(&coef);
                    if sign < 0 {
                        t = -&t;
                    }
                    out.add_term(key, &t);
                }
            }
        }
        Ok(out)
    }
}

/// Schouten bracket of two canonical basis multivectors, as a list of
/// (canonical key, sign, rational coefficient).
fn schouten_basis(lie: &LieAlgebra, x: &[usize], y: &[usize]) -> Vec<(Vec<usize>, i32, Rational)> {
    let k = x.len() as i64 - 1;
    let l = y.len() as i64 - 1;
    let mut out = Vec::new();
    for (j, &xj) in x.iter().enumerate() {
        for (i, &yi) in y.iter().enumerate() {
            let exponent = k * l + j as i64 + i as i64;
            let base_sign = if exponent % 2 == 0 { 1 } else { -1 };
            for (m, c) in lie.bracket(xj, yi) {
                // [x_j, y_i] ∧ Y_{-i} ∧ X_{-j}
                let mut idx = vec![*m];
                idx.extend(y.iter().enumerate().filter(|(p, _)| *p != i).map(|(_, v)| *v));
                idx.extend(x.iter().enumerate().filter(|(p, _)| *p != j).map(|(_, v)| *v));
                if let Some((sign, key)) = canonical_wedge(&idx) {
                    out.push((key, sign * base_sign, c.clone()));
                }
            }
        }
    }
    out
}

impl Add for &MultiVector {
    type Output = MultiVector;
    fn add(self, rhs: &MultiVector) -> MultiVector {
        assert!(same_algebra(&self.lie, &rhs.lie), "algebra mismatch");
        let mut out = self.clone();
        for (k, v) in &rhs.comps {
            out.add_term(k.clone(), v);
        }
        out
    }
}

impl Sub for &MultiVector {
    type Output = MultiVector;
    fn sub(self, rhs: &MultiVector) -> MultiVector {
        self + &(-rhs)
    }
}

impl Neg for &MultiVector {
    type Output = MultiVector;
    fn neg(self) -> MultiVector {
        let mut out = self.clone();
        for v in out.comps.values_mut() {
            *v = -&*v;
        }
        out
    }
}

impl fmt::Display for MultiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.comps.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in &self.comps {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let names: Vec<&str> = k.iter().map(|&i| self.lie.names()[i].as_str()).collect();
            let c_str = c.to_string();
            if c_str == "1" {
                write!(f, "{}", names.join("∧"))?;
            } else {
                write!(f, "({c_str})·{}", names.join("∧"))?;
            }
        }
        Ok(())
    }
}

/// `true` iff [r, r] = 0.
pub fn check_cybe(r: &MultiVector) -> Result<bool> {
    Ok(cybe_defect(r)?.is_zero())
}

/// [r, r] for a bivector r.
pub fn cybe_defect(r: &MultiVector) -> Result<MultiVector> {
    match r.wedge_degree() {
        Some(2) | None => {}
        Some(d) => {
            return Err(Error::DegreeError {
                expected: 2,
                found: d as i32,
            })
        }
    }
    r.schouten(r)
}

/// A bivector satisfying the classical Yang–Baxter equation [r, r] = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct RMatrix {
    value: MultiVector,
}

impl RMatrix {
    pub fn new(value: MultiVector) -> Result<Self> {
        let defect = cybe_defect(&value)?;
        if !defect.is_zero() {
            return Err(Error::NotTriangular {
                witness: defect.to_string(),
            });
        }
        Ok(RMatrix { value })
    }

    /// Wraps a bivector without the CYBE test, for negative examples.
    pub fn new_unchecked(value: MultiVector) -> Self {
        RMatrix { value }
    }

    pub fn value(&self) -> &MultiVector {
        &self.value
    }

    pub fn lie(&self) -> &Arc<LieAlgebra> {
        self.value.lie()
    }

    /// Pairs (i, j, r_{ij}) with i < j such that r = Σ r_{ij} eᵢ∧eⱼ; only the
    /// ħ⁰ part of each coefficient is used.
    pub fn pairs(&self) -> Vec<(usize, usize, Rational)> {
        self.value
            .components()
            .iter()
            .map(|(k, c)| (k[0], k[1], c.coeff(0).clone()))
            .filter(|(_, _, c)| !c.is_zero())
            .collect()
    }

    /// The induced cobracket γ(x) = [r, x].
    pub fn cobracket(&self, x: &MultiVector) -> Result<MultiVector> {
        match x.wedge_degree() {
            Some(1) | None => {}
            Some(d) => {
                return Err(Error::DegreeError {
                    expected: 1,
                    found: d as i32,
                })
            }
        }
        self.value.schouten(x)
    }

    /// Checks γ([x,y]) = x·γ(y) − y·γ(x) on all pairs of basis vectors.
    pub fn cobracket_is_cocycle(&self) -> bool {
        let lie = self.lie().clone();
        let order = self.value.order();
        let d = lie.dim();
        for i in 0..d {
            for j in 0..d {
                let x = MultiVector::generator(&lie, order, i);
                let y = MultiVector::generator(&lie, order, j);
                let lhs = self.cobracket(&x.schouten(&y).unwrap()).unwrap();
                let gx = self.cobracket(&x).unwrap();
                let gy = self.cobracket(&y).unwrap();
                let rhs = &x.schouten(&gy).unwrap() - &y.schouten(&gx).unwrap();
                if lhs != rhs {
                    return false;
                }
            }
        }
        true
    }
}

/// Convenience: Σ c · eᵢ∧eⱼ from (i, j, c) triples.
pub fn bivector(lie: &Arc<LieAlgebra>, order: usize, pairs: &[(usize, usize, Rational)]) -> MultiVector {
    let mut out = MultiVector::zero(lie, order);
    for (i, j, c) in pairs {
        out = &out + &MultiVector::wedge_of(lie, order, &[*i, *j], c.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sl2() -> Arc<LieAlgebra> {
        Arc::new(LieAlgebra::sl2())
    }

    #[test]
    fn constructors_reject_bad_tables() {
        let names = vec!["a".to_string(), "b".to_string()];
        let mut c = vec![vec![vec![Rational::zero(); 2]; 2]; 2];
        c[0][1][1] = rat(1);
        assert_eq!(
            LieAlgebra::from_structure_constants(names.clone(), c.clone()),
            Err(Error::NotAntisymmetric { i: 0, j: 1, k: 1 })
        );
        let mut bad = LieAlgebra::sl2();
        bad.brackets[0][1] = vec![(1, rat(3))];
        bad.brackets[1][0] = vec![(1, rat(-3))];
        let d = 3;
        let table: Vec<Vec<Vec<Rational>>> = (0..d)
            .map(|i| (0..d).map(|j| (0..d).map(|k| bad.structure_constant(i, j, k)).collect()).collect())
            .collect();
        assert!(matches!(
            LieAlgebra::from_structure_constants(bad.names.clone(), table),
            Err(Error::JacobiViolation { .. })
        ));
    }

    #[test]
    fn lie_bracket_examples() {
        let g = Arc::new(LieAlgebra::ax_plus_b());
        let h = MultiVector::generator(&g, 2, 0);
        let e = MultiVector::generator(&g, 2, 1);
        assert_eq!(h.lie_bracket(&e).unwrap(), e);
        assert!(h.lie_bracket(&h).unwrap().is_zero());
        let s = sl2();
        let e = MultiVector::generator(&s, 2, 1);
        let f = MultiVector::generator(&s, 2, 2);
        assert_eq!(e.lie_bracket(&f).unwrap(), MultiVector::generator(&s, 2, 0));
        let other = MultiVector::generator(&g, 2, 0);
        assert_eq!(e.schouten(&other), Err(Error::AlgebraMismatch));
    }

    #[test]
    fn cybe_examples() {
        let s = sl2();
        let he = MultiVector::wedge_of(&s, 0, &[0, 1], rat(1));
        let ef = MultiVector::wedge_of(&s, 0, &[1, 2], rat(1));
        assert!(check_cybe(&he).unwrap());
        assert!(!check_cybe(&ef).unwrap());
        assert_eq!(cybe_defect(&ef).unwrap(), MultiVector::wedge_of(&s, 0, &[0, 1, 2], rat(2)));
        assert!(check_cybe(&MultiVector::zero(&s, 0)).unwrap());
        let x = MultiVector::generator(&s, 0, 0);
        assert!(matches!(check_cybe(&x), Err(Error::DegreeError { .. })));
    }

    #[test]
    fn cobracket_on_ax_plus_b() {
        let g = Arc::new(LieAlgebra::ax_plus_b());
        let r = RMatrix::new(MultiVector::wedge_of(&g, 0, &[0, 1], rat(1))).unwrap();
        let e = MultiVector::generator(&g, 0, 1);
        let h = MultiVector::generator(&g, 0, 0);
        assert!(r.cobracket(&e).unwrap().is_zero());
        assert_eq!(r.cobracket(&h).unwrap(), MultiVector::wedge_of(&g, 0, &[0, 1], rat(-1)));
        assert!(r.cobracket_is_cocycle());
        let ab = Arc::new(LieAlgebra::abelian(3));
        let r = RMatrix::new(MultiVector::wedge_of(&ab, 0, &[0, 2], rat(5))).unwrap();
        for i in 0..3 {
            assert!(r.cobracket(&MultiVector::generator(&ab, 0, i)).unwrap().is_zero());
        }
    }

    #[test]
    fn rmatrix_rejects_non_triangular() {
        let s = sl2();
        let err = RMatrix::new(MultiVector::wedge_of(&s, 0, &[1, 2], rat(1))).unwrap_err();
        assert_eq!(
            err,
            Error::NotTriangular {
                witness: "(2)·H∧E∧F".into()
            }
        );
    }
}

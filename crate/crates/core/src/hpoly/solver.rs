//! Order-by-order construction of a formal twist with prescribed classical
//! limit.
//!
//! At ħ¹ the twist is seeded with half the tensor form of r. At each later
//! order n the Maurer–Cartan equation reads ∂Fₙ = −(F•F)ₙ, where the right
//! side only involves lower orders. Since ∂ preserves the multidegree (how
//! often each generator occurs across all legs), the linear system splits
//! into small blocks, each solved exactly by reduced row echelon form.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use num_traits::Zero;

use super::twist::{tensor_form, FormalTwist};
use super::{HPoly, HPolyElement};
use crate::error::{Error, Result};
use crate::hopf::{Hopf, Tensor};
use crate::lie::{cybe_defect, RMatrix};
use crate::scalar::{ratio, Rational, Series};

/// Maximal total PBW degree of the ansatz at each ħ-order (default 2n).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DegreeSchedule {
    overrides: BTreeMap<usize, usize>,
}

impl DegreeSchedule {
    pub fn with(mut self, order: usize, degree: usize) -> Self {
        self.overrides.insert(order, degree);
        self
    }

    pub fn degree(&self, order: usize) -> usize {
        self.overrides.get(&order).copied().unwrap_or(2 * order)
    }

    /// Parses `"n:deg,n:deg,…"`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut out = Self::default();
        for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let (n, d) = item
                .split_once(':')
                .ok_or_else(|| Error::Schema(format!("schedule entry {item:?} is not n:deg")))?;
            let parse = |x: &str| {
                x.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Schema(format!("schedule entry {item:?} is not n:deg")))
            };
            out.overrides.insert(parse(n)?, parse(d)?);
        }
        Ok(out)
    }
}

fn multidegree(key: &[u8], dim: usize) -> Vec<u8> {
    let mut m = vec![0u8; dim];
    for chunk in key.chunks(dim) {
        for (j, &e) in chunk.iter().enumerate() {
            m[j] += e;
        }
    }
    m
}

/// All 2-leg keys a⊗b with a + b = m.
fn splittings(m: &[u8]) -> Vec<Vec<u8>> {
    let mut firsts: Vec<Vec<u8>> = vec![Vec::new()];
    for &mj in m {
        let mut next = Vec::new();
        for prefix in &firsts {
            for a in 0..=mj {
                let mut p = prefix.clone();
                p.push(a);
                next.push(p);
            }
        }
        firsts = next;
    }
    let mut out: Vec<Vec<u8>> = firsts
        .into_iter()
        .map(|a| {
            let b: Vec<u8> = m.iter().zip(&a).map(|(mj, aj)| mj - aj).collect();
            let mut k = a;
            k.extend(b);
            k
        })
        .collect();
    out.sort();
    out
}

/// Solves A x = b exactly; free variables are set to zero.
fn rref_solve(mut rows: Vec<Vec<Rational>>, ncols: usize) -> Option<Vec<Rational>> {
    let nrows = rows.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..nrows).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == nrows {
            break;
        }
    }
    if rows[r..].iter().any(|row| !row[ncols].is_zero()) {
        return None;
    }
    let mut x = vec![Rational::zero(); ncols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = rows[i][ncols].clone();
    }
    Some(x)
}

/// Constructs J = 1⊗1 + F with F₁ = ½·(tensor form of r) and Maurer–Cartan
/// residual zero through the truncation order of `hopf`.
pub fn solve_twist_perturbatively(r: &RMatrix, hopf: &Arc<Hopf>, schedule: &DegreeSchedule) -> Result<FormalTwist> {
    let defect = cybe_defect(r.value())?;
    if !defect.is_zero() {
        return Err(Error::NotTriangular {
            witness: defect.to_string(),
        });
    }
    let order = hopf.order();
    let dim = hopf.dim();
    let hp = HPoly::new(hopf);
    let mut f = Tensor::zero(hopf, 2);
    if order >= 1 {
        let classical = tensor_form(r, hopf)?.hbar_part(0);
        f = classical.scale(&Series::monomial(order, 1, ratio(1, 2)));
    }
    let mut images: HashMap<Vec<u8>, Tensor> = HashMap::new();
    for n in 2..=order {
        let rhs = (-&hp.bullet_tensor(&f, &f)).hbar_part(n);
        let mut blocks: BTreeMap<Vec<u8>, Vec<(&Vec<u8>, &Rational)>> = BTreeMap::new();
        for (k, c) in rhs.terms() {
            blocks.entry(multidegree(k, dim)).or_default().push((k, c.coeff(0)));
        }
        let max_deg = schedule.degree(n);
        for (m, entries) in blocks {
            let total: usize = m.iter().map(|&e| e as usize).sum();
            let columns = if total <= max_deg { splittings(&m) } else { Vec::new() };
            let col_images: Vec<Tensor> = columns
                .iter()
                .map(|col| {
                    images
                        .entry(col.clone())
                        .or_insert_with(|| {
                            let t = Tensor::monomial(hopf, &[col[..dim].to_vec(), col[dim..].to_vec()], Series::one(order));
                            hp.differential(&HPolyElement::from_tensor(t)).expect("same algebra").part(2)
                        })
                        .clone()
                })
                .collect();
            let mut row_keys: BTreeSet<Vec<u8>> = entries.iter().map(|(k, _)| (*k).clone()).collect();
            for img in &col_images {
                row_keys.extend(img.terms().keys().cloned());
            }
            let row_index: HashMap<&Vec<u8>, usize> = row_keys.iter().enumerate().map(|(i, k)| (k, i)).collect();
            let ncols = columns.len();
            let mut rows = vec![vec![Rational::zero(); ncols + 1]; row_keys.len()];
            for (c, img) in col_images.iter().enumerate() {
                for (k, v) in img.terms() {
                    rows[row_index[k]][c] = v.coeff(0).clone();
                }
            }
            for (k, v) in &entries {
                rows[row_index[*k]][ncols] = (*v).clone();
            }
            let x = rref_solve(rows, ncols).ok_or(Error::AnsatzTooSmall {
                order: n,
                multidegree: m.clone(),
            })?;
            for (col, val) in columns.iter().zip(x) {
                if !val.is_zero() {
                    f.add_term(col.clone(), &Series::monomial(order, n, val));
                }
            }
        }
    }
    let j = &Tensor::one(hopf, 2) + &f;
    FormalTwist::new(j)
}

//! Seeded pseudo-random elements for property checks.
//!
//! Elements are drawn from monomials of bounded degree with small nonzero
//! integer coefficients, optionally multiplied by a power of ħ.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hopf::{Hopf, Tensor};
use crate::hpoly::HPolyElement;
use crate::lie::{LieAlgebra, MultiVector};
use crate::quantize::PolyDiffOperator;
use crate::scalar::{rat, Series};

pub struct Sampler {
    rng: ChaCha8Rng,
    /// Highest ħ-power attached to a random coefficient.
    pub max_hbar: usize,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            max_hbar: 1,
        }
    }

    pub fn with_max_hbar(mut self, n: usize) -> Self {
        self.max_hbar = n;
        self
    }

    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.gen_range(lo..=hi)
    }

    /// Nonzero integer in [−3, 3].
    pub fn small_int(&mut self) -> i64 {
        let v = self.rng.gen_range(1..=3);
        if self.rng.gen_bool(0.5) {
            v
        } else {
            -v
        }
    }

    pub fn coefficient(&mut self, order: usize) -> Series {
        let power = self.rng.gen_range(0..=self.max_hbar.min(order));
        Series::monomial(order, power, rat(self.small_int()))
    }

    /// Exponent vector of total degree at most `max_deg`.
    pub fn pbw_monomial(&mut self, dim: usize, max_deg: usize) -> Vec<u8> {
        let deg = self.rng.gen_range(0..=max_deg);
        let mut m = vec![0u8; dim];
        for _ in 0..deg {
            m[self.rng.gen_range(0..dim)] += 1;
        }
        m
    }

    /// Random tensor with up to `terms` terms, each leg of PBW degree ≤ `max_deg`.
    pub fn tensor(&mut self, hopf: &Arc<Hopf>, legs: usize, max_deg: usize, terms: usize) -> Tensor {
        let mut t = Tensor::zero(hopf, legs);
        let n = self.rng.gen_range(1..=terms.max(1));
        for _ in 0..n {
            let monos: Vec<Vec<u8>> = (0..legs).map(|_| self.pbw_monomial(hopf.dim(), max_deg)).collect();
            let c = self.coefficient(hopf.order());
            t = &t + &Tensor::monomial(hopf, &monos, c);
        }
        t
    }

    /// Homogeneous H_poly element of degree `k` (k+1 legs).
    pub fn hpoly(&mut self, hopf: &Arc<Hopf>, k: i32, max_deg: usize, terms: usize) -> HPolyElement {
        HPolyElement::from_tensor(self.tensor(hopf, (k + 1) as usize, max_deg, terms))
    }

    /// Homogeneous element of random degree in [lo, hi].
    pub fn hpoly_any(&mut self, hopf: &Arc<Hopf>, lo: i32, hi: i32, max_deg: usize, terms: usize) -> HPolyElement {
        let k = self.rng.gen_range(lo..=hi);
        self.hpoly(hopf, k, max_deg, terms)
    }

    /// Polydifferential operator with `arity` slots; the coefficient monomial
    /// and each derivative multi-index have degree ≤ `max_deg`.
    pub fn poly_diff_operator(
        &mut self,
        nvars: usize,
        order: usize,
        arity: usize,
        max_deg: usize,
        terms: usize,
    ) -> PolyDiffOperator {
        let mut out = PolyDiffOperator::zero(nvars, order);
        let n = self.rng.gen_range(1..=terms.max(1));
        for _ in 0..n {
            let key: Vec<u8> = (0..=arity).flat_map(|_| self.pbw_monomial(nvars, max_deg)).collect();
            let c = self.coefficient(order);
            out = &out + &PolyDiffOperator::monomial(nvars, key, c);
        }
        out
    }

    /// Homogeneous multivector of wedge degree `k` ≥ 1.
    pub fn multivector(&mut self, lie: &Arc<LieAlgebra>, order: usize, k: usize, terms: usize) -> MultiVector {
        let d = lie.dim();
        let mut out = MultiVector::zero(lie, order);
        if k > d {
            return out;
        }
        let n = self.rng.gen_range(1..=terms.max(1));
        for _ in 0..n {
            let mut idx: Vec<usize> = (0..d).collect();
            for i in (1..d).rev() {
                let j = self.rng.gen_range(0..=i);
                idx.swap(i, j);
            }
            idx.truncate(k);
            let c = self.coefficient(order);
            out = &out + &MultiVector::basis(lie, order, &idx, c);
        }
        out
    }
}

use std::cmp::Ordering;
use std::collections::HashMap;

use super::coeff::Coeff;
use crate::error::{check_len, Error, Result};

/// A single term `coeff * x_1^e_1 * ... * x_n^e_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial<C> {
    pub coeff: C,
    pub exps: Vec<u32>,
}

impl<C> Monomial<C> {
    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }
}

/// Graded-lexicographic comparison of exponent vectors (total degree first).
pub fn grlex(a: &[u32], b: &[u32]) -> Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

/// Sparse multivariate polynomial in canonical form: merged, zero-free and
/// sorted ascending in graded-lex order. Two polynomials are equal iff their
/// term lists are equal.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<C> {
    n_vars: usize,
    terms: Vec<Monomial<C>>,
}

impl<C: Coeff> Poly<C> {
    pub fn zero(n_vars: usize) -> Self {
        Poly { n_vars, terms: Vec::new() }
    }

    pub fn constant(n_vars: usize, c: C) -> Self {
        Self::from_terms(n_vars, vec![Monomial { coeff: c, exps: vec![0; n_vars] }])
            .expect("constant term has the right arity")
    }

    pub fn one(n_vars: usize) -> Self {
        Self::constant(n_vars, C::one())
    }

    /// The coordinate function `x_index`.
    pub fn var(n_vars: usize, index: usize) -> Self {
        let mut exps = vec![0; n_vars];
        exps[index] = 1;
        Poly { n_vars, terms: vec![Monomial { coeff: C::one(), exps }] }
    }

    /// Builds a canonical polynomial from arbitrary terms, merging duplicates
    /// and dropping zero coefficients.
    pub fn from_terms(n_vars: usize, terms: Vec<Monomial<C>>) -> Result<Self> {
        let mut merged: HashMap<Vec<u32>, C> = HashMap::with_capacity(terms.len());
        for t in terms {
            check_len(n_vars, t.exps.len())?;
            match merged.get_mut(&t.exps) {
                Some(c) => *c = c.clone() + t.coeff,
                None => {
                    merged.insert(t.exps, t.coeff);
                }
            }
        }
        Ok(Self::from_map(n_vars, merged))
    }

    fn from_map(n_vars: usize, merged: HashMap<Vec<u32>, C>) -> Self {
        let mut terms: Vec<Monomial<C>> = merged
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(exps, coeff)| Monomial { coeff, exps })
            .collect();
        terms.sort_by(|a, b| grlex(&a.exps, &b.exps));
        Poly { n_vars, terms }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn terms(&self) -> &[Monomial<C>] {
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

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.last().map_or(0, Monomial::degree)
    }

    /// True when every term has total degree exactly `d` (false for zero).
    pub fn is_homogeneous_of_degree(&self, d: u32) -> bool {
        !self.terms.is_empty() && self.terms.iter().all(|t| t.degree() == d)
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.first().map(Monomial::degree)
    }

    pub fn coefficient(&self, exps: &[u32]) -> C {
        self.terms
            .binary_search_by(|t| grlex(&t.exps, exps))
            .map(|i| self.terms[i].coeff.clone())
            .unwrap_or_else(|_| C::zero())
    }

    pub fn constant_term(&self) -> C {
        self.coefficient(&vec![0; self.n_vars])
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n_vars, other.n_vars, "adding polynomials in different rings");
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            let (a, b) = (&self.terms[i], &other.terms[j]);
            match grlex(&a.exps, &b.exps) {
                Ordering::Less => {
                    out.push(a.clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b.clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = a.coeff.clone() + b.coeff.clone();
                    if !c.is_zero() {
                        out.push(Monomial { coeff: c, exps: a.exps.clone() });
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&other.terms[j..]);
        Poly { n_vars: self.n_vars, terms: out }
    }

    pub fn neg(&self) -> Self {
        Poly {
            n_vars: self.n_vars,
            terms: self
                .terms
                .iter()
                .map(|t| Monomial { coeff: -t.coeff.clone(), exps: t.exps.clone() })
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.n_vars);
        }
        Poly {
            n_vars: self.n_vars,
            terms: self
                .terms
                .iter()
                .map(|t| Monomial { coeff: t.coeff.clone() * c.clone(), exps: t.exps.clone() })
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n_vars, other.n_vars, "multiplying polynomials in different rings");
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.n_vars);
        }
        let mut acc: HashMap<Vec<u32>, C> = HashMap::with_capacity(self.len() * other.len());
        for a in &self.terms {
            for b in &other.terms {
                let exps: Vec<u32> = a.exps.iter().zip(&b.exps).map(|(x, y)| x + y).collect();
                let c = a.coeff.clone() * b.coeff.clone();
                match acc.get_mut(&exps) {
                    Some(v) => *v = v.clone() + c,
                    None => {
                        acc.insert(exps, c);
                    }
                }
            }
        }
        Self::from_map(self.n_vars, acc)
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut out = Self::one(self.n_vars);
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    /// Exact partial derivative with respect to `x_var`.
    pub fn derivative(&self, var: usize) -> Self {
        assert!(var < self.n_vars, "derivative variable out of range");
        let terms = self
            .terms
            .iter()
            .filter(|t| t.exps[var] > 0)
            .map(|t| {
                let mut exps = t.exps.clone();
                let e = exps[var];
                exps[var] -= 1;
                Monomial { coeff: t.coeff.clone() * C::from_i64(i64::from(e)), exps }
            })
            .collect();
        // Differentiation preserves distinctness but not graded order.
        let mut p = Poly { n_vars: self.n_vars, terms };
        p.terms.sort_by(|a, b| grlex(&a.exps, &b.exps));
        p
    }

    /// Substitutes `x_i -> subs[i]`. The result lives in the ring of the
    /// substituted polynomials.
    pub fn compose(&self, subs: &[Poly<C>]) -> Result<Self> {
        check_len(self.n_vars, subs.len())?;
        let target = subs.first().map_or(0, Poly::n_vars);
        if let Some(bad) = subs.iter().find(|s| s.n_vars != target) {
            return Err(Error::Dimension { expected: target, got: bad.n_vars });
        }
        let mut cache: Vec<Vec<Poly<C>>> = subs.iter().map(|s| vec![Poly::one(target), s.clone()]).collect();
        let mut out = Poly::zero(target);
        for t in &self.terms {
            let mut prod = Poly::constant(target, t.coeff.clone());
            for (i, &e) in t.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let powers = &mut cache[i];
                while powers.len() <= e as usize {
                    let next = powers.last().unwrap().mul(&subs[i]);
                    powers.push(next);
                }
                prod = prod.mul(&powers[e as usize]);
            }
            out = out.add(&prod);
        }
        Ok(out)
    }

    /// Exact evaluation at a point with coefficients in the same ring.
    pub fn eval_exact(&self, point: &[C]) -> Result<C> {
        check_len(self.n_vars, point.len())?;
        let powers = PowerTable::build(point, self.max_exponents(), C::one(), |a, b| a.clone() * b.clone());
        let mut acc = C::zero();
        for t in &self.terms {
            let mut v = t.coeff.clone();
            for (i, &e) in t.exps.iter().enumerate() {
                if e > 0 {
                    v = v * powers.get(i, e).clone();
                }
            }
            acc = acc + v;
        }
        Ok(acc)
    }

    /// Double-precision evaluation.
    pub fn eval_float(&self, point: &[C::Float]) -> Result<C::Float> {
        check_len(self.n_vars, point.len())?;
        Ok(super::compiled::CompiledPoly::new(self).eval(point))
    }

    pub(crate) fn max_exponents(&self) -> Vec<u32> {
        let mut m = vec![0; self.n_vars];
        for t in &self.terms {
            for (mi, &e) in m.iter_mut().zip(&t.exps) {
                *mi = (*mi).max(e);
            }
        }
        m
    }

    /// Maps coefficients into another ring, keeping exponents.
    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        let terms = self
            .terms
            .iter()
            .map(|t| Monomial { coeff: f(&t.coeff), exps: t.exps.clone() })
            .filter(|t| !t.coeff.is_zero())
            .collect();
        Poly { n_vars: self.n_vars, terms }
    }
}

/// Per-variable table of powers `x_i^k`, `k <= max_exp[i]`.
pub(crate) struct PowerTable<T> {
    rows: Vec<Vec<T>>,
}

impl<T: Clone> PowerTable<T> {
    pub(crate) fn build(point: &[T], max_exp: Vec<u32>, one: T, mul: impl Fn(&T, &T) -> T) -> Self {
        let rows = point
            .iter()
            .zip(max_exp)
            .map(|(x, m)| {
                let mut row = Vec::with_capacity(m as usize + 1);
                row.push(one.clone());
                for k in 1..=m as usize {
                    let next = mul(&row[k - 1], x);
                    row.push(next);
                }
                row
            })
            .collect();
        PowerTable { rows }
    }

    pub(crate) fn get(&self, var: usize, e: u32) -> &T {
        &self.rows[var][e as usize]
    }
}

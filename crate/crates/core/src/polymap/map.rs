use nalgebra::DMatrix;

use super::coeff::{ComplexRational, Coeff, Field, Rational};
use super::compiled::CompiledPoly;
use super::poly::Poly;
use crate::error::{check_len, Error, Result};

/// Polynomial map `k^n_in -> k^n_out` with exact coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMap<C> {
    n_vars: usize,
    components: Vec<Poly<C>>,
}

pub type RealMap = PolyMap<Rational>;
pub type ComplexMap = PolyMap<ComplexRational>;

impl<C: Coeff> PolyMap<C> {
    pub fn new(n_vars: usize, components: Vec<Poly<C>>) -> Result<Self> {
        for c in &components {
            check_len(n_vars, c.n_vars())?;
        }
        Ok(PolyMap { n_vars, components })
    }

    pub fn identity(n: usize) -> Self {
        PolyMap { n_vars: n, components: (0..n).map(|i| Poly::var(n, i)).collect() }
    }

    pub fn field(&self) -> Field {
        C::FIELD
    }

    pub fn n_in(&self) -> usize {
        self.n_vars
    }

    pub fn n_out(&self) -> usize {
        self.components.len()
    }

    pub fn is_square(&self) -> bool {
        self.n_vars == self.components.len()
    }

    pub(crate) fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.n_vars)
        } else {
            Err(Error::NonSquare { n_in: self.n_vars, n_out: self.components.len() })
        }
    }

    pub fn components(&self) -> &[Poly<C>] {
        &self.components
    }

    pub fn degree(&self) -> u32 {
        self.components.iter().map(Poly::degree).max().unwrap_or(0)
    }

    pub fn evaluate_exact(&self, point: &[C]) -> Result<Vec<C>> {
        check_len(self.n_vars, point.len())?;
        self.components.iter().map(|c| c.eval_exact(point)).collect()
    }

    pub fn evaluate(&self, point: &[C::Float]) -> Result<Vec<C::Float>> {
        check_len(self.n_vars, point.len())?;
        Ok(self.components.iter().map(|c| CompiledPoly::new(c).eval(point)).collect())
    }

    /// Symbolic Jacobian, entry `(i, j) = dF_i/dx_j`.
    pub fn jacobian(&self) -> PolyMatrix<C> {
        let entries = self
            .components
            .iter()
            .flat_map(|c| (0..self.n_vars).map(move |j| c.derivative(j)))
            .collect();
        PolyMatrix { rows: self.components.len(), cols: self.n_vars, entries }
    }

    pub fn jacobian_at(&self, point: &[C::Float]) -> Result<DMatrix<C::Float>> {
        check_len(self.n_vars, point.len())?;
        self.jacobian().evaluate(point)
    }

    /// `G(X) = F(X + a) - F(b)`.
    pub fn translate(&self, a: &[C], b: &[C]) -> Result<Self> {
        let n = self.require_square()?;
        check_len(n, a.len())?;
        check_len(n, b.len())?;
        let shifted: Vec<Poly<C>> = a
            .iter()
            .enumerate()
            .map(|(i, ai)| Poly::var(n, i).add(&Poly::constant(n, ai.clone())))
            .collect();
        let fb = self.evaluate_exact(b)?;
        let components = self
            .components
            .iter()
            .zip(fb)
            .map(|(c, v)| Ok(c.compose(&shifted)?.sub(&Poly::constant(n, v))))
            .collect::<Result<Vec<_>>>()?;
        Ok(PolyMap { n_vars: n, components })
    }

    /// Splits `F = id - H`; `None` when `H` vanishes identically.
    pub fn keller_decompose(&self) -> Result<Option<KellerDecomposition<C>>> {
        let n = self.require_square()?;
        let h = PolyMap {
            n_vars: n,
            components: self.components.iter().enumerate().map(|(i, c)| Poly::var(n, i).sub(c)).collect(),
        };
        if h.components.iter().all(Poly::is_zero) {
            return Ok(None);
        }
        let cubic_homogeneous = h
            .components
            .iter()
            .all(|c| c.terms().iter().all(|t| t.degree() == 3));
        Ok(Some(KellerDecomposition { h, cubic_homogeneous }))
    }

    pub fn scale(&self, c: &C) -> Self {
        PolyMap { n_vars: self.n_vars, components: self.components.iter().map(|p| p.scale(c)).collect() }
    }

    pub fn total_terms(&self) -> usize {
        self.components.iter().map(Poly::len).sum()
    }
}

/// `H = id - F` together with whether `H` is cubic-homogeneous.
#[derive(Debug, Clone, PartialEq)]
pub struct KellerDecomposition<C> {
    pub h: PolyMap<C>,
    pub cubic_homogeneous: bool,
}

/// Matrix of polynomials in a common ring, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMatrix<C> {
    rows: usize,
    cols: usize,
    entries: Vec<Poly<C>>,
}

impl<C: Coeff> PolyMatrix<C> {
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Poly<C>>) -> Result<Self> {
        check_len(rows * cols, entries.len())?;
        Ok(PolyMatrix { rows, cols, entries })
    }

    pub fn identity(n: usize, n_vars: usize) -> Self {
        let entries = (0..n * n)
            .map(|k| if k / n == k % n { Poly::one(n_vars) } else { Poly::zero(n_vars) })
            .collect();
        PolyMatrix { rows: n, cols: n, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Poly<C>] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly<C> {
        &self.entries[i * self.cols + j]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Poly::is_zero)
    }

    pub fn total_terms(&self) -> usize {
        self.entries.iter().map(Poly::len).sum()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_len(self.cols, other.rows)?;
        let n_vars = self.entries.first().map_or(0, Poly::n_vars);
        let mut entries = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Poly::zero(n_vars);
                for k in 0..self.cols {
                    let (a, b) = (self.get(i, k), other.get(k, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.add(&a.mul(b));
                    }
                }
                entries.push(acc);
            }
        }
        Ok(PolyMatrix { rows: self.rows, cols: other.cols, entries })
    }

    pub fn evaluate(&self, point: &[C::Float]) -> Result<DMatrix<C::Float>> {
        if let Some(p) = self.entries.first() {
            check_len(p.n_vars(), point.len())?;
        }
        Ok(DMatrix::from_row_iterator(
            self.rows,
            self.cols,
            self.entries.iter().map(|p| CompiledPoly::new(p).eval(point)),
        ))
    }

    pub fn evaluate_exact(&self, point: &[C]) -> Result<Vec<Vec<C>>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).eval_exact(point)).collect())
            .collect()
    }

    pub fn trace_is_zero(&self) -> bool {
        let n_vars = self.entries.first().map_or(0, Poly::n_vars);
        let mut t = Poly::<C>::zero(n_vars);
        for i in 0..self.rows.min(self.cols) {
            t = t.add(self.get(i, i));
        }
        t.is_zero()
    }
}

/// A parsed map of either field.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyMap {
    Real(RealMap),
    Complex(ComplexMap),
}

impl AnyMap {
    pub fn field(&self) -> Field {
        match self {
            AnyMap::Real(_) => Field::Real,
            AnyMap::Complex(_) => Field::Complex,
        }
    }

    pub fn into_real(self) -> Result<RealMap> {
        match self {
            AnyMap::Real(m) => Ok(m),
            AnyMap::Complex(_) => Err(Error::WrongField { expected: "real", found: "complex" }),
        }
    }

    pub fn into_complex(self) -> Result<ComplexMap> {
        match self {
            AnyMap::Complex(m) => Ok(m),
            AnyMap::Real(_) => Err(Error::WrongField { expected: "complex", found: "real" }),
        }
    }
}

/// Exact rational image of a double vector; fails on non-finite entries.
pub fn rational_point(x: &[f64]) -> Result<Vec<Rational>> {
    x.iter()
        .map(|&v| Rational::from_float(v).ok_or_else(|| Error::InvalidArgument(format!("non-finite coordinate {v}"))))
        .collect()
}

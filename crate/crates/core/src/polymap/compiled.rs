use nalgebra::{DMatrix, DVector};
use num_traits::Num;

use super::coeff::{Coeff, Rational};
use super::map::PolyMap;
use super::poly::Poly;

/// Floating-point image of a polynomial, with coefficients converted once.
#[derive(Debug, Clone)]
pub struct CompiledPoly<T> {
    terms: Vec<(T, Vec<(usize, u32)>)>,
    max_exp: Vec<u32>,
}

impl<T: Copy + Num> CompiledPoly<T> {
    pub fn new<C: Coeff<Float = T>>(p: &Poly<C>) -> Self {
        let terms = p
            .terms()
            .iter()
            .map(|t| {
                let sparse = t
                    .exps
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| (i, e))
                    .collect();
                (t.coeff.to_float(), sparse)
            })
            .collect();
        CompiledPoly { terms, max_exp: p.max_exponents() }
    }

    /// Evaluates using a per-variable power table; `point` must have the
    /// polynomial's arity.
    pub fn eval(&self, point: &[T]) -> T {
        let powers = powers_of(point, &self.max_exp);
        self.eval_with(&powers)
    }

    fn eval_with(&self, powers: &[Vec<T>]) -> T {
        let mut acc = T::zero();
        for (c, vars) in &self.terms {
            let mut v = *c;
            for &(i, e) in vars {
                v = v * powers[i][e as usize];
            }
            acc = acc + v;
        }
        acc
    }
}

impl CompiledPoly<f64> {
    /// `sum |c| |x^e|` over the terms: the scale of the rounding error of
    /// [`Self::eval`] at `point`.
    pub fn eval_magnitude(&self, point: &[f64]) -> f64 {
        let abs: Vec<f64> = point.iter().map(|v| v.abs()).collect();
        let powers = powers_of(&abs, &self.max_exp);
        self.terms
            .iter()
            .map(|(c, vars)| vars.iter().fold(c.abs(), |v, &(i, e)| v * powers[i][e as usize]))
            .sum()
    }
}

fn powers_of<T: Copy + Num>(point: &[T], max_exp: &[u32]) -> Vec<Vec<T>> {
    point
        .iter()
        .zip(max_exp)
        .map(|(&x, &m)| {
            let mut row = Vec::with_capacity(m as usize + 1);
            row.push(T::one());
            for k in 1..=m as usize {
                row.push(row[k - 1] * x);
            }
            row
        })
        .collect()
}

/// Double-precision evaluator for a real map together with its symbolic
/// Jacobian (and optionally Hessians), converted once for repeated use in
/// sampling and descent loops.
#[derive(Debug, Clone)]
pub struct NumericMap {
    n_in: usize,
    n_out: usize,
    components: Vec<CompiledPoly<f64>>,
    jacobian: Vec<CompiledPoly<f64>>,
    hessians: Option<Vec<Vec<CompiledPoly<f64>>>>,
    max_exp: Vec<u32>,
}

impl NumericMap {
    pub fn new(map: &PolyMap<Rational>) -> Self {
        Self::build(map, false)
    }

    /// Also compiles second derivatives of every component.
    pub fn with_hessians(map: &PolyMap<Rational>) -> Self {
        Self::build(map, true)
    }

    fn build(map: &PolyMap<Rational>, hessians: bool) -> Self {
        let n = map.n_in();
        let jac = map.jacobian();
        let jacobian = jac.entries().iter().map(CompiledPoly::new).collect();
        let hessians = hessians.then(|| {
            map.components()
                .iter()
                .map(|c| {
                    (0..n)
                        .flat_map(|j| (0..n).map(move |k| (j, k)))
                        .map(|(j, k)| CompiledPoly::new(&c.derivative(j).derivative(k)))
                        .collect()
                })
                .collect()
        });
        let mut max_exp = vec![0u32; n];
        for c in map.components() {
            for (m, e) in max_exp.iter_mut().zip(c.max_exponents()) {
                *m = (*m).max(e);
            }
        }
        NumericMap {
            n_in: n,
            n_out: map.n_out(),
            components: map.components().iter().map(CompiledPoly::new).collect(),
            jacobian,
            hessians,
            max_exp,
        }
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn eval(&self, x: &[f64]) -> DVector<f64> {
        debug_assert_eq!(x.len(), self.n_in);
        let powers = powers_of(x, &self.max_exp);
        DVector::from_iterator(self.n_out, self.components.iter().map(|c| c.eval_with(&powers)))
    }

    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        debug_assert_eq!(x.len(), self.n_in);
        let powers = powers_of(x, &self.max_exp);
        DMatrix::from_row_iterator(self.n_out, self.n_in, self.jacobian.iter().map(|c| c.eval_with(&powers)))
    }

    /// Value and Jacobian sharing one power table.
    pub fn eval_with_jacobian(&self, x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let powers = powers_of(x, &self.max_exp);
        let v = DVector::from_iterator(self.n_out, self.components.iter().map(|c| c.eval_with(&powers)));
        let j = DMatrix::from_row_iterator(self.n_out, self.n_in, self.jacobian.iter().map(|c| c.eval_with(&powers)));
        (v, j)
    }

    /// Gradient (row `i` of the Jacobian) of a single component.
    pub fn component_gradient(&self, i: usize, x: &[f64]) -> DVector<f64> {
        let powers = powers_of(x, &self.max_exp);
        DVector::from_iterator(self.n_in, (0..self.n_in).map(|j| self.jacobian[i * self.n_in + j].eval_with(&powers)))
    }

    /// Largest [`CompiledPoly::eval_magnitude`] over the components.
    pub fn eval_magnitude(&self, x: &[f64]) -> f64 {
        self.components.iter().map(|c| c.eval_magnitude(x)).fold(0.0, f64::max)
    }

    /// Hessian of component `i`; `None` unless built with [`Self::with_hessians`].
    pub fn component_hessian(&self, i: usize, x: &[f64]) -> Option<DMatrix<f64>> {
        let h = self.hessians.as_ref()?;
        let powers = powers_of(x, &self.max_exp);
        Some(DMatrix::from_row_iterator(self.n_in, self.n_in, h[i].iter().map(|c| c.eval_with(&powers))))
    }
}

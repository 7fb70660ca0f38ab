use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, Result};

/// `Σ_b x_bᵀ F_b x_b + aᵀx + c ≤ 0`, where each `x_b` is a contiguous
/// slice of the variable vector and `F_b` a shared PSD form.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuadConstraint {
    /// `(offset, form)`: the form applies to `x[offset .. offset + dim(form)]`.
    pub blocks: Vec<(usize, usize)>,
    pub linear: Vec<(usize, f64)>,
    pub constant: f64,
}

impl QuadConstraint {
    pub fn linear(terms: Vec<(usize, f64)>, constant: f64) -> Self {
        QuadConstraint { blocks: Vec::new(), linear: terms, constant }
    }
}

/// Maximise `x[objective]` subject to convex quadratic constraints.
#[derive(Debug, Clone)]
pub struct MaxMinQcqp {
    num_vars: usize,
    objective: usize,
    forms: Vec<DMatrix<f64>>,
    constraints: Vec<QuadConstraint>,
    labels: Vec<(usize, usize, String)>,
}

impl MaxMinQcqp {
    pub fn new(num_vars: usize, objective: usize) -> Result<Self> {
        if objective >= num_vars {
            return Err(invalid(format!("objective index {objective} outside {num_vars} variables")));
        }
        Ok(MaxMinQcqp {
            num_vars,
            objective,
            forms: Vec::new(),
            constraints: Vec::new(),
            labels: Vec::new(),
        })
    }

    /// Register a symmetric PSD form and return its index. Forms with an
    /// eigenvalue below `−1e-10 · max|λ|` are rejected.
    pub fn add_form(&mut self, form: DMatrix<f64>) -> Result<usize> {
        if !form.is_square() || form.nrows() == 0 {
            return Err(invalid("quadratic form must be square and non-empty"));
        }
        if form.iter().any(|v| !v.is_finite()) {
            return Err(invalid("quadratic form has non-finite entries"));
        }
        let asym = (&form - form.transpose()).amax();
        let scale = form.amax().max(f64::MIN_POSITIVE);
        if asym > 1e-12 * scale {
            return Err(invalid(format!("quadratic form is not symmetric (asymmetry {asym:e})")));
        }
        let sym = (&form + form.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym.clone());
        let lo = eig.eigenvalues.min();
        if lo < -1e-10 * eig.eigenvalues.amax().max(f64::MIN_POSITIVE) {
            return Err(invalid(format!("quadratic form is not PSD (eigenvalue {lo:e})")));
        }
        self.forms.push(sym);
        Ok(self.forms.len() - 1)
    }

    pub fn add_constraint(&mut self, c: QuadConstraint) -> Result<()> {
        for &(off, f) in &c.blocks {
            let dim = self
                .forms
                .get(f)
                .ok_or_else(|| invalid(format!("constraint uses unknown form {f}")))?
                .nrows();
            if off + dim > self.num_vars {
                return Err(invalid(format!("block at {off} of size {dim} exceeds variable count")));
            }
        }
        if let Some(&(i, _)) = c.linear.iter().find(|&&(i, _)| i >= self.num_vars) {
            return Err(invalid(format!("linear term on variable {i} out of range")));
        }
        if !c.constant.is_finite() || c.linear.iter().any(|&(_, a)| !a.is_finite()) {
            return Err(invalid("constraint has non-finite coefficients"));
        }
        self.constraints.push(c);
        Ok(())
    }

    /// Name a range of variables for the text dump.
    pub fn label(&mut self, offset: usize, len: usize, name: impl Into<String>) {
        self.labels.push((offset, len, name.into()));
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn objective(&self) -> usize {
        self.objective
    }

    pub fn forms(&self) -> &[DMatrix<f64>] {
        &self.forms
    }

    pub fn constraints(&self) -> &[QuadConstraint] {
        &self.constraints
    }

    pub fn labels(&self) -> &[(usize, usize, String)] {
        &self.labels
    }

    pub fn value(&self, i: usize, x: &[f64]) -> f64 {
        let c = &self.constraints[i];
        let mut v = c.constant;
        for &(off, f) in &c.blocks {
            let form = &self.forms[f];
            let d = form.nrows();
            let xb = &x[off..off + d];
            for r in 0..d {
                let mut row = 0.0;
                for s in 0..d {
                    row += form[(r, s)] * xb[s];
                }
                v += xb[r] * row;
            }
        }
        for &(j, a) in &c.linear {
            v += a * x[j];
        }
        v
    }

    /// Constraint values `f_i(x)`; feasible means all `≤ 0`.
    pub fn values(&self, x: &[f64]) -> Vec<f64> {
        (0..self.constraints.len()).map(|i| self.value(i, x)).collect()
    }

    /// `max(0, max_i f_i(x))`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.values(x).into_iter().fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_indefinite_form() {
        let mut p = MaxMinQcqp::new(2, 1).unwrap();
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(p.add_form(bad).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(p.add_form(asym).is_err());
        assert!(p.add_form(DMatrix::identity(2, 2)).is_ok());
    }

    #[test]
    fn index_checks() {
        assert!(MaxMinQcqp::new(2, 2).is_err());
        let mut p = MaxMinQcqp::new(3, 0).unwrap();
        let f = p.add_form(DMatrix::identity(2, 2)).unwrap();
        let over = QuadConstraint { blocks: vec![(2, f)], ..Default::default() };
        assert!(p.add_constraint(over).is_err());
        assert!(p.add_constraint(QuadConstraint::linear(vec![(3, 1.0)], 0.0)).is_err());
        assert!(p.add_constraint(QuadConstraint { blocks: vec![(1, 7)], ..Default::default() }).is_err());
    }

    #[test]
    fn evaluates_quadratic_plus_linear() {
        let mut p = MaxMinQcqp::new(3, 2).unwrap();
        let f = p.add_form(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0])).unwrap();
        p.add_constraint(QuadConstraint {
            blocks: vec![(0, f)],
            linear: vec![(2, -1.0)],
            constant: 0.5,
        })
        .unwrap();
        // xᵀFx with x = (1, 2): 2 + 2·2 + 3·4 = 18
        let v = p.value(0, &[1.0, 2.0, 4.0]);
        assert!((v - (18.0 - 4.0 + 0.5)).abs() < 1e-14);
        assert_eq!(p.max_violation(&[0.0, 0.0, 1.0]), 0.0);
    }
}

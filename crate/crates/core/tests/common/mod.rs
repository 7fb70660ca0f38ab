//! Oracles shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use num_complex::Complex64;
use rsmc::conic::{self, SolverOptions};
use rsmc::model::{GroupLayout, PowerConstraint};
use rsmc::numerics::{ComplexMatrix, ComplexVector, RandomStream};
use rsmc::wmmse::{build_subproblem, SubproblemCoefficients};

/// Scalar single-group subproblem: `N_t = 1`, `M = 1`, `K` users, unit
/// power. Its variables are `(Re p, Im p, r, t)`.
pub struct ScalarInstance {
    pub psi: Vec<f64>,
    pub f: Vec<Complex64>,
    pub nu: Vec<f64>,
}

impl ScalarInstance {
    pub fn random(users: usize, stream: &mut RandomStream) -> Self {
        ScalarInstance {
            psi: (0..users).map(|_| stream.uniform_range(0.1, 0.6)).collect(),
            f: (0..users)
                .map(|_| Complex64::from_polar(stream.uniform_range(0.0, 0.5), stream.uniform_range(0.0, 6.3)))
                .collect(),
            nu: (0..users).map(|_| stream.uniform_range(1.0, 1.5)).collect(),
        }
    }

    /// `min_k (1 − ξ_k(p))` at precoder `p`.
    pub fn value(&self, re: f64, im: f64) -> f64 {
        let p = Complex64::new(re, im);
        (0..self.psi.len())
            .map(|k| 1.0 - (self.psi[k] * p.norm_sqr() - 2.0 * (self.f[k].conj() * p).re + self.nu[k]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn coefficients(&self) -> SubproblemCoefficients {
        let one = |z: Complex64| ComplexMatrix::from_element(1, 1, z);
        SubproblemCoefficients {
            psi: self.psi.iter().map(|&v| one(Complex64::new(v, 0.0))).collect(),
            f: self.f.iter().map(|&z| ComplexVector::from_element(1, z)).collect(),
            nu: self.nu.clone(),
            psi_common: Vec::new(),
            f_common: Vec::new(),
            nu_common: Vec::new(),
        }
    }

    /// Solver optimum and the value of the returned precoder.
    pub fn solve(&self) -> (f64, f64) {
        let layout = GroupLayout::from_sizes(&[self.psi.len()]).unwrap();
        let pc = PowerConstraint::tpc(1, 1.0).unwrap();
        let prob = build_subproblem(&self.coefficients(), &layout, &pc, false).unwrap();
        assert_eq!(prob.num_vars(), 4);
        let res = conic::solve(&prob, None, &SolverOptions::default()).unwrap();
        (res.objective, self.value(res.x[0], res.x[1]))
    }

    /// Exhaustive search over the unit disc at resolution `step`, then a
    /// finer grid of the same size around the best coarse point.
    pub fn grid_optimum(&self, step: f64) -> f64 {
        let search = |c: (f64, f64), half: f64, h: f64| {
            let n = (2.0 * half / h).round() as i64;
            let mut best = (f64::NEG_INFINITY, c);
            for i in 0..=n {
                let re = c.0 - half + i as f64 * h;
                for j in 0..=n {
                    let im = c.1 - half + j as f64 * h;
                    if re * re + im * im > 1.0 {
                        continue;
                    }
                    let v = self.value(re, im);
                    if v > best.0 {
                        best = (v, (re, im));
                    }
                }
            }
            best
        };
        let coarse = search((0.0, 0.0), 1.0, step);
        let fine = search(coarse.1, 2.0 * step, step / 100.0);
        coarse.0.max(fine.0)
    }
}

//! Small polynomial types with exact derivatives, for manufactured solutions.

use crate::vecops::{Mat3, Vec3};

/// Sum of monomials `c x^a y^b z^e`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly {
    pub terms: Vec<(f64, [u32; 3])>,
}

impl Poly {
    pub fn new(terms: Vec<(f64, [u32; 3])>) -> Self {
        Self { terms }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![(c, [0, 0, 0])])
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(_, e)| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &Vec3) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| c * x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32) * x[2].powi(e[2] as i32))
            .sum()
    }

    pub fn derivative(&self, dir: usize) -> Poly {
        let terms = self
            .terms
            .iter()
            .filter(|(_, e)| e[dir] > 0)
            .map(|(c, e)| {
                let mut e2 = *e;
                e2[dir] -= 1;
                (c * e[dir] as f64, e2)
            })
            .collect();
        Poly { terms }
    }
}

/// Vector field with polynomial components (unused components are zero).
#[derive(Clone, Debug, PartialEq)]
pub struct VectorPoly {
    pub comps: [Poly; 3],
}

impl VectorPoly {
    pub fn new(comps: [Poly; 3]) -> Self {
        Self { comps }
    }

    pub fn degree(&self) -> u32 {
        self.comps.iter().map(Poly::degree).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &Vec3) -> Vec3 {
        [self.comps[0].eval(x), self.comps[1].eval(x), self.comps[2].eval(x)]
    }

    pub fn jacobian(&self, x: &Vec3) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.comps[i].derivative(j).eval(x);
            }
        }
        m
    }

    /// `curl curl u`: `grad div u - lap u` in 3D, `R grad(curl u)` in 2D.
    pub fn curl_curl(&self, x: &Vec3, dim: usize) -> Vec3 {
        let d2 = |i: usize, a: usize, b: usize| self.comps[i].derivative(a).derivative(b).eval(x);
        if dim == 2 {
            // c = d1 u2 - d2 u1, result (d2 c, -d1 c)
            let d2c = d2(1, 0, 1) - d2(0, 1, 1);
            let d1c = d2(1, 0, 0) - d2(0, 1, 0);
            [d2c, -d1c, 0.0]
        } else {
            let mut out = [0.0; 3];
            for (i, o) in out.iter_mut().enumerate() {
                for j in 0..3 {
                    *o += d2(j, j, i) - d2(i, j, j);
                }
            }
            out
        }
    }
}

//! JSON wire formats for matrices and low-rank operators.
//!
//! Matrices: `{"rows": r, "cols": c, "data": [[re, im], ...]}` in row-major
//! order. Low-rank operators: `{"dim": n, "u": [[[re, im], ...], ...],
//! "v": [...]}` with one inner array per rank component.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, LowRankOperator};
use crate::format::Sig17;
use crate::Result;

#[derive(Debug, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct MatrixOut {
    rows: usize,
    cols: usize,
    data: Vec<[Sig17; 2]>,
}

impl MatrixJson {
    pub fn into_matrix(self) -> Result<ComplexMatrix> {
        let data = self.data.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
        ComplexMatrix::from_vec(self.rows, self.cols, data)
    }
}

pub(crate) fn pairs(v: &[Complex64]) -> Vec<[Sig17; 2]> {
    v.iter().map(|z| [Sig17(z.re), Sig17(z.im)]).collect()
}

impl ComplexMatrix {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<MatrixJson>(text)?.into_matrix()
    }

    pub fn to_json(&self) -> String {
        let out = MatrixOut { rows: self.rows(), cols: self.cols(), data: pairs(self.data()) };
        serde_json::to_string(&out).expect("matrix serializes")
    }
}

#[derive(Debug, Deserialize)]
pub struct LowRankJson {
    pub dim: usize,
    pub u: Vec<Vec<[f64; 2]>>,
    pub v: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize)]
struct LowRankOut {
    dim: usize,
    u: Vec<Vec<[Sig17; 2]>>,
    v: Vec<Vec<[Sig17; 2]>>,
}

fn to_complex(v: Vec<Vec<[f64; 2]>>) -> Vec<Vec<Complex64>> {
    v.into_iter().map(|w| w.into_iter().map(|[re, im]| Complex64::new(re, im)).collect()).collect()
}

impl LowRankJson {
    pub fn into_operator(self) -> Result<LowRankOperator> {
        LowRankOperator::new(self.dim, to_complex(self.u), to_complex(self.v))
    }
}

impl LowRankOperator {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<LowRankJson>(text)?.into_operator()
    }

    pub fn to_json(&self) -> String {
        let out = LowRankOut {
            dim: self.dim(),
            u: self.u_vectors().iter().map(|w| pairs(w)).collect(),
            v: self.v_vectors().iter().map(|w| pairs(w)).collect(),
        };
        serde_json::to_string(&out).expect("operator serializes")
    }
}

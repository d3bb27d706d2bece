//! Model representation shared by all builders: hidden nodes, sigmoid
//! activation, forward evaluation, and the orthogonal-basis training state
//! with its back-substitution finalization into deployable raw-basis weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inner, solve_unit_upper, ColumnVector, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Sigmoid,
}

impl Activation {
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
        }
    }
}

/// One random basis function: g(w . x + b).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenNode {
    pub w: Vec<f64>,
    pub b: f64,
}

/// Deployable model: ordered hidden nodes plus output weights in the
/// raw-activation basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkModel {
    pub d: usize,
    pub m: usize,
    pub activation: Activation,
    pub nodes: Vec<HiddenNode>,
    /// L x m, row j weights node j's activation.
    pub beta: Vec<Vec<f64>>,
}

/// Activation vector of one node over all rows of X.
pub fn hidden_output(node: &HiddenNode, x: &Matrix, act: Activation) -> Result<ColumnVector> {
    if node.w.len() != x.cols() {
        return Err(Error::DimensionMismatch(format!(
            "node expects {} inputs, data has {}",
            node.w.len(),
            x.cols()
        )));
    }
    let mut out = ColumnVector::zeros(x.rows());
    for i in 0..x.rows() {
        let z: f64 = x
            .row(i)
            .iter()
            .zip(&node.w)
            .map(|(xi, wi)| xi * wi)
            .sum::<f64>()
            + node.b;
        out[i] = act.apply(z);
    }
    Ok(out)
}

/// N x L matrix whose column j is hidden_output(node_j, X).
pub fn activation_matrix(nodes: &[HiddenNode], x: &Matrix, act: Activation) -> Result<Matrix> {
    let cols: Vec<ColumnVector> = nodes
        .iter()
        .map(|n| hidden_output(n, x, act))
        .collect::<Result<_>>()?;
    if cols.is_empty() {
        return Ok(Matrix::zeros(x.rows(), 0));
    }
    Matrix::from_columns(&cols)
}

impl NetworkModel {
    pub fn empty(d: usize, m: usize, activation: Activation) -> Self {
        NetworkModel {
            d,
            m,
            activation,
            nodes: Vec::new(),
            beta: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// N x m predictions; an empty model is the zero function.
    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.d {
            return Err(Error::DimensionMismatch(format!(
                "model expects {} features, data has {}",
                self.d,
                x.cols()
            )));
        }
        let mut out = Matrix::zeros(x.rows(), self.m);
        for (node, beta_row) in self.nodes.iter().zip(&self.beta) {
            let h = hidden_output(node, x, self.activation)?;
            for i in 0..x.rows() {
                for q in 0..self.m {
                    out[(i, q)] += h[i] * beta_row[q];
                }
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: NetworkModel = serde_json::from_str(text)?;
        if model.beta.len() != model.nodes.len() {
            return Err(Error::Inconsistent(
                "beta row count does not match node count".into(),
            ));
        }
        Ok(model)
    }
}

/// Training-time state for the orthogonal construction: the orthogonal basis
/// columns, the unit-upper-triangular Gram-Schmidt coefficients (stored per
/// column), the v-basis output weights, and the running residual.
#[derive(Debug, Clone)]
pub struct OrthoState {
    basis: Vec<ColumnVector>,
    /// coeffs[j] are the projections of h_{j+1} onto basis[0..j].
    coeffs: Vec<Vec<f64>>,
    beta_ortho: Vec<Vec<f64>>,
    residual: Matrix,
}

impl OrthoState {
    /// Starts with residual e_0 = T.
    pub fn new(targets: Matrix) -> Self {
        OrthoState {
            basis: Vec::new(),
            coeffs: Vec::new(),
            beta_ortho: Vec::new(),
            residual: targets,
        }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[ColumnVector] {
        &self.basis
    }

    pub fn residual(&self) -> &Matrix {
        &self.residual
    }

    pub fn beta_ortho(&self) -> &[Vec<f64>] {
        &self.beta_ortho
    }

    /// Accepts a configured node's orthogonal vector with its projection
    /// coefficients and v-basis weight row, and updates e_L = e_{L-1} - v b_L.
    pub fn push(
        &mut self,
        v: ColumnVector,
        proj_coeffs: Vec<f64>,
        beta_row: Vec<f64>,
    ) -> Result<()> {
        if proj_coeffs.len() != self.basis.len() {
            return Err(Error::Inconsistent(
                "projection coefficient count does not match basis size".into(),
            ));
        }
        if beta_row.len() != self.residual.cols() {
            return Err(Error::DimensionMismatch(
                "beta row length does not match output count".into(),
            ));
        }
        self.residual.sub_outer(&v, &beta_row)?;
        self.basis.push(v);
        self.coeffs.push(proj_coeffs);
        self.beta_ortho.push(beta_row);
        Ok(())
    }

    /// Unit upper triangular R with H = V R.
    pub fn r_matrix(&self) -> Matrix {
        let l = self.len();
        let mut r = Matrix::identity(l);
        for (k, col) in self.coeffs.iter().enumerate() {
            for (j, c) in col.iter().enumerate() {
                r[(j, k)] = *c;
            }
        }
        r
    }

    /// Predictions of the v-basis model on the training data: V * beta_ortho.
    pub fn fitted(&self) -> Result<Matrix> {
        let m = self.residual.cols();
        let mut out = Matrix::zeros(self.residual.rows(), m);
        for (v, row) in self.basis.iter().zip(&self.beta_ortho) {
            for i in 0..out.rows() {
                for q in 0..m {
                    out[(i, q)] += v[i] * row[q];
                }
            }
        }
        Ok(out)
    }

    /// Largest relative off-diagonal inner product among stored basis pairs.
    pub fn max_pairwise_cos(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.basis.len() {
            for j in (i + 1)..self.basis.len() {
                let ip = inner(&self.basis[i], &self.basis[j]).expect("equal lengths");
                let denom = self.basis[i].norm() * self.basis[j].norm();
                if denom > 0.0 {
                    worst = worst.max(ip.abs() / denom);
                }
            }
        }
        worst
    }

    /// Largest relative inner product between residual columns and basis vectors.
    pub fn max_residual_cos(&self) -> f64 {
        let mut worst = 0.0f64;
        let rnorm = self.residual.frob_norm();
        if rnorm == 0.0 {
            return 0.0;
        }
        for q in 0..self.residual.cols() {
            let e_q = self.residual.column(q);
            for v in &self.basis {
                let vn = v.norm();
                if vn > 0.0 {
                    let ip = inner(&e_q, v).expect("equal lengths");
                    worst = worst.max(ip.abs() / (rnorm * vn));
                }
            }
        }
        worst
    }
}

/// Changes basis from orthogonal vectors back to raw activations:
/// since H = V R, the deployable weights are beta_raw = R^{-1} beta_ortho.
pub fn finalize(
    ortho: &OrthoState,
    nodes: &[HiddenNode],
    act: Activation,
    d: usize,
    m: usize,
) -> Result<NetworkModel> {
    if nodes.len() != ortho.len() {
        return Err(Error::Inconsistent(
            "node count does not match orthogonal basis size".into(),
        ));
    }
    if ortho.is_empty() {
        return Ok(NetworkModel::empty(d, m, act));
    }
    let r = ortho.r_matrix();
    let b_ortho = Matrix::from_rows(ortho.beta_ortho())?;
    let b_raw = solve_unit_upper(&r, &b_ortho)?;
    let beta = (0..b_raw.rows()).map(|i| b_raw.row(i).to_vec()).collect();
    Ok(NetworkModel {
        d,
        m,
        activation: act,
        nodes: nodes.to_vec(),
        beta,
    })
}

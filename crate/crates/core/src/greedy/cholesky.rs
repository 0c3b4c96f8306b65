/// Lower-triangular factor `L` of a growing Gram submatrix `D[S,S] = L·Lᵀ`,
/// extended by one row per newly selected regressor.
#[derive(Debug, Clone, Default)]
pub struct IncrementalCholesky {
    // Row i holds L[i, 0..=i].
    rows: Vec<Vec<f64>>,
}

impl IncrementalCholesky {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Tries to append a column with Gram entries `cross = D[S, k]` and
    /// `diag = D[k, k]`. The pivot `diag − |L⁻¹·cross|²` is the squared
    /// residual norm of the new column after projection on the current span;
    /// below `tol` the factor is left unchanged and the pivot is returned.
    pub fn try_push(&mut self, cross: &[f64], diag: f64, tol: f64) -> Result<(), f64> {
        debug_assert_eq!(cross.len(), self.dim());
        let w = self.forward(cross);
        let pivot = diag - w.iter().map(|v| v * v).sum::<f64>();
        if !(pivot >= tol) || pivot <= 0.0 {
            return Err(pivot);
        }
        let mut row = w;
        row.push(pivot.sqrt());
        self.rows.push(row);
        Ok(())
    }

    /// Solves `L·Lᵀ·x = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = self.forward(rhs);
        for i in (0..self.dim()).rev() {
            let mut v = x[i];
            for (j, xj) in x.iter().enumerate().skip(i + 1) {
                v -= self.rows[j][i] * xj;
            }
            x[i] = v / self.rows[i][i];
        }
        x
    }

    /// Solves `L·x = rhs`.
    fn forward(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = Vec::with_capacity(rhs.len() + 1);
        for (i, row) in self.rows.iter().enumerate() {
            let partial: f64 = row[..i].iter().zip(&x).map(|(l, v)| l * v).sum();
            x.push((rhs[i] - partial) / row[i]);
        }
        x
    }
}

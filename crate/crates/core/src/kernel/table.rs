use crate::error::{Error, Result};
use crate::kernel::{Field, FiniteKernel, Kernel, PointSet};
use crate::linalg::{CMatrix, C64};

/// A kernel given directly by its Hermitian Gram matrix.
#[derive(Debug, Clone)]
pub struct TableKernel {
    gram: CMatrix,
    field: Option<Field>,
}

impl TableKernel {
    pub fn new(gram: CMatrix, field: Option<Field>) -> Result<Self> {
        // Reuse the Hermitian validation of `FiniteKernel`.
        let checked = FiniteKernel::from_matrix(gram)?;
        if let Some(f) = field {
            checked.clone().with_field(f)?;
        }
        Ok(Self { gram: checked.gram().clone(), field })
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }
}

impl Kernel for TableKernel {
    fn name(&self) -> &'static str {
        "table"
    }

    fn check_points(&self, points: &PointSet) -> Result<()> {
        if points.len() != self.gram.nrows() {
            return Err(Error::ShapeMismatch(format!(
                "table is {0}x{0} but {1} points were given",
                self.gram.nrows(),
                points.len()
            )));
        }
        Ok(())
    }

    fn entry(&self, _points: &PointSet, i: usize, j: usize) -> Result<C64> {
        Ok(self.gram[(i, j)])
    }

    fn field(&self) -> Option<Field> {
        self.field
    }
}

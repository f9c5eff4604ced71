//! A validated intersection matrix bundled with its reference ample class and
//! Hodge frame, the common context of every computation.

use crate::error::Result;
use crate::frame::HodgeFrame;
use crate::lattice::{IntersectionMatrix, LatticeClass, Positivity};
use crate::par::ExecMode;

#[derive(Clone, Debug)]
pub struct Surface {
    matrix: IntersectionMatrix,
    h: LatticeClass,
    frame: HodgeFrame,
    exec: ExecMode,
}

impl Surface {
    pub fn new(matrix: IntersectionMatrix) -> Surface {
        let h = matrix.reference_ample();
        let frame = HodgeFrame::diagonalize(&matrix, &h);
        Surface { matrix, h, frame, exec: ExecMode::default() }
    }

    pub fn from_entries(entries: Vec<Vec<i64>>) -> Result<Surface> {
        Ok(Surface::new(IntersectionMatrix::new(entries)?))
    }

    pub fn with_exec(mut self, exec: ExecMode) -> Surface {
        self.exec = exec;
        self
    }

    pub fn exec(&self) -> ExecMode {
        self.exec
    }

    pub fn matrix(&self) -> &IntersectionMatrix {
        &self.matrix
    }

    pub fn rho(&self) -> usize {
        self.matrix.rho()
    }

    /// The reference ample class fixing the forward cone.
    pub fn h(&self) -> &LatticeClass {
        &self.h
    }

    pub fn frame(&self) -> &HodgeFrame {
        &self.frame
    }

    pub fn positivity(&self, v: &LatticeClass) -> Result<Positivity> {
        self.matrix.positivity_class(&self.h, v)
    }

    pub(crate) fn dot(&self, v: &[i64], w: &[i64]) -> i128 {
        self.matrix.dot(v, w)
    }
}

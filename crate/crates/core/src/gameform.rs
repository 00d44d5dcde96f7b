//! The differential game form and its Jacobian.
//!
//! For a zero-sum game `(f, -f)` the game form is the vector field
//! `omega(x) = (D1 f(x), -D2 f(x))`; its zeros are the game's critical
//! points. Its Jacobian has the block structure
//!
//! ```text
//! D omega = [  D1^2 f    D12 f  ]
//!           [ -D12 f'   -D2^2 f ]
//! ```
//!
//! which equals `P * H` where `H` is the full Hessian of `f` and
//! `P = blockdiag(I_m1, -I_m2)`; consequently
//! `det(H) = (-1)^{m2} det(D omega)`. All matrices are materialized
//! dense: joint dimensions stay small enough that sparsity would be
//! pure overhead.

use crate::games::{BlockDims, GameDefinition, GameError, JointPoint};
use crate::linalg::Mat;
use serde::Serialize;

/// The game form `omega(x)`; the first `m1` entries are player 1's
/// block, the last `m2` player 2's.
#[derive(Clone, Debug, Serialize)]
pub struct GameFormValue {
    pub omega: Vec<f64>,
}

impl GameFormValue {
    pub fn inf_norm(&self) -> f64 {
        crate::linalg::inf_norm(&self.omega)
    }
}

/// The game Jacobian `D omega(x)`.
#[derive(Clone, Debug, Serialize)]
pub struct GameJacobian {
    pub matrix: Mat,
    #[serde(skip)]
    dims: BlockDims,
}

impl GameJacobian {
    /// Top-left `m1 x m1` block `D1^2 f`.
    pub fn block11(&self) -> Mat {
        self.matrix.block(0, 0, self.dims.m1(), self.dims.m1())
    }

    /// Bottom-right `m2 x m2` block `-D2^2 f`.
    pub fn block22(&self) -> Mat {
        self.matrix.block(self.dims.m1(), self.dims.m1(), self.dims.m2(), self.dims.m2())
    }
}

/// The full Hessian `H(x)` of the cost.
#[derive(Clone, Debug, Serialize)]
pub struct FullHessian {
    pub matrix: Mat,
}

/// Evaluates `omega(x) = (D1 f(x), -D2 f(x))`.
pub fn omega(game: &GameDefinition, x: &JointPoint) -> Result<GameFormValue, GameError> {
    let (_, grad) = game.jet1(x)?;
    Ok(GameFormValue { omega: negate_second_block(grad, game.dims().m1()) })
}

/// Assembles `omega` from an already-computed cost gradient.
pub fn omega_from_gradient(dims: BlockDims, gradient: Vec<f64>) -> GameFormValue {
    assert_eq!(gradient.len(), dims.total());
    GameFormValue { omega: negate_second_block(gradient, dims.m1()) }
}

/// Assembles the game Jacobian from an already-computed cost Hessian.
pub fn game_jacobian_from_hessian(dims: BlockDims, hessian: &Mat) -> GameJacobian {
    assert_eq!(hessian.nrows(), dims.total());
    let m = dims.total();
    let mut matrix = hessian.clone();
    for i in dims.m1()..m {
        for j in 0..m {
            matrix[(i, j)] = -matrix[(i, j)];
        }
    }
    GameJacobian { matrix, dims }
}

fn negate_second_block(mut v: Vec<f64>, m1: usize) -> Vec<f64> {
    for entry in &mut v[m1..] {
        *entry = -*entry;
    }
    v
}

/// Evaluates the game Jacobian by flipping the sign of the Hessian's
/// last `m2` rows, so `D omega = P * H` holds exactly.
pub fn game_jacobian(game: &GameDefinition, x: &JointPoint) -> Result<GameJacobian, GameError> {
    let jet = game.jet2(x)?;
    Ok(game_jacobian_from_hessian(game.dims(), &jet.hessian))
}

/// Evaluates the full Hessian `H(x)` of the cost.
pub fn full_hessian(game: &GameDefinition, x: &JointPoint) -> Result<FullHessian, GameError> {
    Ok(FullHessian { matrix: game.jet2(x)?.hessian })
}

/// The sign matrix `P = blockdiag(I_m1, -I_m2)`; an involution.
pub fn p_matrix(dims: BlockDims) -> Mat {
    let m = dims.total();
    let mut p = Mat::zeros(m, m);
    for i in 0..dims.m1() {
        p[(i, i)] = 1.0;
    }
    for i in dims.m1()..m {
        p[(i, i)] = -1.0;
    }
    p
}

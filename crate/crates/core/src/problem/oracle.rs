use serde::{Deserialize, Serialize};

/// Oracle call tallies, split into the primal-side set A (grad f1, prox f2)
/// and the dual-side set B (grad g1, prox g2, B, B^T).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCounts {
    pub grad_f1: u64,
    pub prox_f2: u64,
    pub grad_g1: u64,
    pub prox_g2: u64,
    pub apply_b: u64,
    pub apply_bt: u64,
}

impl OracleCounts {
    pub fn a_calls(&self) -> u64 {
        self.grad_f1.max(self.prox_f2)
    }

    pub fn b_calls(&self) -> u64 {
        self.grad_g1
            .max(self.prox_g2)
            .max(self.apply_b)
            .max(self.apply_bt)
    }

    pub fn add(&mut self, other: &OracleCounts) {
        self.grad_f1 += other.grad_f1;
        self.prox_f2 += other.prox_f2;
        self.grad_g1 += other.grad_g1;
        self.prox_g2 += other.prox_g2;
        self.apply_b += other.apply_b;
        self.apply_bt += other.apply_bt;
    }
}

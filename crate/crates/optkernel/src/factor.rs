//! Product-form basis inverse.
//!
//! The basis is represented as `B = F_1 F_2 ... F_k` where each `F_t` is the
//! identity with one column replaced by an eta vector. The starting matrix is
//! the identity, i.e. the all-logical basis.

#[derive(Clone, Debug)]
struct Eta {
    row: usize,
    pivot: f64,
    idx: Vec<usize>,
    val: Vec<f64>,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct EtaFile {
    etas: Vec<Eta>,
    nnz: usize,
}

const DROP: f64 = 1e-14;

impl EtaFile {
    pub(crate) fn clear(&mut self) {
        self.etas.clear();
        self.nnz = 0;
    }

    /// Records the column `alpha = B^{-1} a` entering at position `row`.
    pub(crate) fn push(&mut self, row: usize, alpha: &[f64]) {
        let pivot = alpha[row];
        let mut idx = Vec::new();
        let mut val = Vec::new();
        for (i, &a) in alpha.iter().enumerate() {
            if i != row && a.abs() > DROP {
                idx.push(i);
                val.push(a);
            }
        }
        self.nnz += idx.len() + 1;
        self.etas.push(Eta { row, pivot, idx, val });
    }

    /// In place `v <- B^{-1} v`.
    pub(crate) fn ftran(&self, v: &mut [f64]) {
        for e in &self.etas {
            let t = v[e.row];
            if t == 0.0 {
                continue;
            }
            let t = t / e.pivot;
            v[e.row] = t;
            for (&i, &a) in e.idx.iter().zip(&e.val) {
                v[i] -= a * t;
            }
        }
    }

    /// In place `u <- u B^{-1}`.
    pub(crate) fn btran(&self, u: &mut [f64]) {
        for e in self.etas.iter().rev() {
            let mut s = u[e.row];
            for (&i, &a) in e.idx.iter().zip(&e.val) {
                s -= a * u[i];
            }
            u[e.row] = s / e.pivot;
        }
    }
}

//! Lower bounds on the ML error rates of systematic codes over BPSK-AWGN,
//! built from the weights `ω_i` of the rows of `[I G]`.

use crate::ensemble::SystematicCode;
use crate::scalar::Real;
use crate::special::q_function;

/// Rows of `[I G]` with pairwise disjoint supports, in selection order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OrthogonalList {
    pub row_indices: Vec<usize>,
    pub weights: Vec<usize>,
}

impl OrthogonalList {
    pub fn len(&self) -> usize {
        self.row_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_indices.is_empty()
    }
}

/// Pairwise error probability `Q(√ω/σ)` of a weight-`ω` codeword.
fn pairwise<T: Real>(omega: usize, sigma: T) -> T {
    q_function(T::of(omega as f64).sqrt() / sigma)
}

/// `(1/k) Σ_i Q(√ω_i/σ)`.
pub fn ber_lower_bound<T: Real>(code: &SystematicCode, sigma: T) -> T {
    let k = code.k();
    if k == 0 {
        return T::zero();
    }
    code.row_weights().iter().map(|&w| pairwise(w, sigma)).sum::<T>() / T::of(k as f64)
}

/// Greedy list: rows in order of increasing `ω` (ties by index), each kept if
/// its support avoids every kept row. Identity parts never overlap, so only
/// the `G` parts are compared.
pub fn greedy_orthogonal_list(code: &SystematicCode) -> OrthogonalList {
    let w = code.row_weights();
    let mut order: Vec<usize> = (0..code.k()).collect();
    order.sort_by_key(|&i| (w[i], i));
    let mut used = vec![false; code.m()];
    let mut list = OrthogonalList::default();
    for i in order {
        let row = code.generator().row(i);
        if row.iter().all(|&c| !used[c]) {
            row.iter().for_each(|&c| used[c] = true);
            list.row_indices.push(i);
            list.weights.push(w[i]);
        }
    }
    list
}

/// `1 − Π (1 − Q(√ω_i/σ))` over weights, evaluated as `−expm1(Σ ln1p(−Q))`.
fn union_of_independent<T: Real>(weights: impl Iterator<Item = usize>, sigma: T) -> T {
    let log_survive: T = weights.map(|w| (-pairwise(w, sigma)).ln_1p()).sum();
    -log_survive.exp_m1()
}

/// `1 − Π_{i∈L} (1 − Q(√ω_i/σ))`.
pub fn fer_lower_bound<T: Real>(list: &OrthogonalList, sigma: T) -> T {
    union_of_independent(list.weights.iter().copied(), sigma)
}

/// The same product over all `k` rows: an approximation, not a certified
/// bound, accurate when low-weight rows rarely overlap.
pub fn fer_lower_bound_approx<T: Real>(code: &SystematicCode, sigma: T) -> T {
    union_of_independent(code.row_weights().iter().copied(), sigma)
}

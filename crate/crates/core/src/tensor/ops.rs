use ndarray::{ArrayView, IxDyn};
use num_complex::Complex64 as C64;

use super::dense::{checked_pow, site_count, DenseTensor};
use crate::error::{arg, Result};

/// Floor used by [`relative_distance`] so that two zero matrices compare equal.
pub const RELATIVE_FLOOR: f64 = 1e-300;

fn validate_sites(sites: &[usize], n: usize) -> Result<()> {
    if sites.is_empty() || sites.len() > n {
        return arg(format!("need 1..={n} sites, got {}", sites.len()));
    }
    let mut seen = vec![false; n];
    for &s in sites {
        if s >= n {
            return arg(format!("site {s} out of range for {n} sites"));
        }
        if std::mem::replace(&mut seen[s], true) {
            return arg(format!("site {s} listed twice"));
        }
    }
    Ok(())
}

/// Lift a `d^k x d^k` operator to `n` sites: it acts on `sites` (leg `j` of
/// the operator on site `sites[j]`, zero-based) and as identity elsewhere.
pub fn embed_on_sites(
    op: &DenseTensor,
    sites: &[usize],
    n: usize,
    d: usize,
) -> Result<DenseTensor> {
    validate_sites(sites, n)?;
    let k = sites.len();
    let local = checked_pow(d, k)?;
    if op.shape() != [local, local] {
        return arg(format!(
            "operator shape {:?} does not act on {k} sites of dimension {d}",
            op.shape()
        ));
    }
    let dim = checked_pow(d, n)?;
    let strides: Vec<usize> = (0..n).map(|s| d.pow((n - 1 - s) as u32)).collect();
    let site_strides: Vec<usize> = sites.iter().map(|&s| strides[s]).collect();

    let mut out = DenseTensor::zeros(vec![dim, dim]);
    let entries = out.entries_mut();
    for row in 0..dim {
        // Split the row index into the local multi-index and the remainder.
        let mut local_row = 0;
        let mut rest = row;
        for &st in &site_strides {
            let digit = (row / st) % d;
            local_row = local_row * d + digit;
            rest -= digit * st;
        }
        for local_col in 0..local {
            let value = op.get(local_row, local_col);
            if value == C64::new(0.0, 0.0) {
                continue;
            }
            let mut col = rest;
            let mut rem = local_col;
            for &st in site_strides.iter().rev() {
                col += (rem % d) * st;
                rem /= d;
            }
            entries[row * dim + col] = value;
        }
    }
    Ok(out)
}

/// `embed_on_sites(op, sites, n, d) · m` without materializing the embedding.
/// `m` has `d^n` rows and any number of columns.
pub fn apply_on_sites(
    op: &DenseTensor,
    sites: &[usize],
    m: &DenseTensor,
    n: usize,
    d: usize,
) -> Result<DenseTensor> {
    validate_sites(sites, n)?;
    let k = sites.len();
    let local = checked_pow(d, k)?;
    let dim = checked_pow(d, n)?;
    if op.shape() != [local, local] {
        return arg(format!(
            "operator shape {:?} does not act on {k} sites",
            op.shape()
        ));
    }
    if !m.is_matrix() || m.rows() != dim {
        return arg(format!("operand shape {:?} has no {dim} rows", m.shape()));
    }
    let cols = m.cols();
    // Bring the acted-on site axes to the front, multiply, and move them back.
    let mut order: Vec<usize> = sites.to_vec();
    order.extend((0..=n).filter(|a| !sites.contains(a)));
    let mut shape = vec![d; n];
    shape.push(cols);
    let tensor =
        ArrayView::from_shape(IxDyn(&shape), m.entries()).expect("entry count matches shape");
    let front = tensor.permuted_axes(IxDyn(&order));
    let front_shape = front.shape().to_vec();
    let flat = front
        .as_standard_layout()
        .into_owned()
        .into_shape_with_order((local, dim / local * cols))
        .expect("standard layout");
    let product = op.view2()?.dot(&flat);
    let product = product
        .into_shape_with_order(IxDyn(&front_shape))
        .expect("same size");
    let mut inverse = vec![0; n + 1];
    for (pos, &axis) in order.iter().enumerate() {
        inverse[axis] = pos;
    }
    let back = product.permuted_axes(IxDyn(&inverse));
    let entries: Vec<C64> = back.as_standard_layout().iter().copied().collect();
    DenseTensor::from_matrix(dim, cols, entries)
}

/// `m · embed_on_sites(op, sites, n, d)`.
pub fn apply_on_sites_right(
    m: &DenseTensor,
    op: &DenseTensor,
    sites: &[usize],
    n: usize,
    d: usize,
) -> Result<DenseTensor> {
    apply_on_sites(&op.transpose()?, sites, &m.transpose()?, n, d)?.transpose()
}

fn validate_perm(perm: &[usize]) -> Result<()> {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
            return arg(format!("{perm:?} is not a permutation"));
        }
    }
    Ok(())
}

/// Unitary that moves the tensor factor on site `i` to site `perm[i]`:
/// `|a_0 .. a_{n-1}> -> |b>` with `b[perm[i]] = a[i]`.
///
/// With this convention `permutation_operator(p ∘ q) = permutation_operator(p) ·
/// permutation_operator(q)` where `(p ∘ q)(i) = p(q(i))`, i.e. `q` applies first.
pub fn permutation_operator(perm: &[usize], d: usize) -> Result<DenseTensor> {
    validate_perm(perm)?;
    let n = perm.len();
    let dim = checked_pow(d, n)?;
    let mut out = DenseTensor::zeros(vec![dim, dim]);
    let mut digits = vec![0; n];
    let mut moved = vec![0; n];
    for col in 0..dim {
        let mut rem = col;
        for s in (0..n).rev() {
            digits[s] = rem % d;
            rem /= d;
        }
        for (i, &p) in perm.iter().enumerate() {
            moved[p] = digits[i];
        }
        let row = moved.iter().fold(0, |acc, &x| acc * d + x);
        out.set(row, col, C64::new(1.0, 0.0));
    }
    Ok(out)
}

/// `p ∘ q`: apply `q` first, then `p`.
pub fn compose_perm(p: &[usize], q: &[usize]) -> Vec<usize> {
    q.iter().map(|&i| p[i]).collect()
}

/// The permutation `P13 P24` on four sites (sites 0<->2 and 1<->3 zero-based).
pub const SWAP_PAIRS: [usize; 4] = [2, 3, 0, 1];

pub fn frobenius_distance(a: &DenseTensor, b: &DenseTensor) -> Result<f64> {
    if a.shape() != b.shape() {
        return arg(format!("shape mismatch {:?} vs {:?}", a.shape(), b.shape()));
    }
    Ok(a.entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// `‖a-b‖ / max(‖a‖, ‖b‖, 1e-300)`.
pub fn relative_distance(a: &DenseTensor, b: &DenseTensor) -> Result<f64> {
    let abs = frobenius_distance(a, b)?;
    Ok(abs
        / a.frobenius_norm()
            .max(b.frobenius_norm())
            .max(RELATIVE_FLOOR))
}

/// Number of sites of a square operator with local dimension `d`.
pub fn operator_sites(op: &DenseTensor, d: usize) -> Result<usize> {
    if !op.is_square() {
        return arg(format!("expected a square operator, got {:?}", op.shape()));
    }
    site_count(op.rows(), d).ok_or_else(|| {
        crate::Error::Argument(format!("dimension {} is not a power of {d}", op.rows()))
    })
}

//! Newton lifting of idempotents from `κ` to `O_N`.

use super::matrix::{self as mx, Mat};
use super::{Dvr, DvrElem, Ring};
use crate::error::{Error, Result};

/// Lifts `e0` (idempotent modulo ε) to an exact idempotent of `O_N` by
/// iterating `e ← 3e² − 2e³`. Each step is a polynomial in `e`, so the
/// result stays in any subalgebra that contains `e0` and the identity
/// (for instance an endomorphism ring).
pub fn lift_idempotent(r: &Dvr, e0: &Mat<DvrElem>) -> Result<Mat<DvrElem>> {
    if !e0.is_square() {
        return Err(Error::InvalidInput("idempotent must be square".into()));
    }
    let sq = mx::mul(r, e0, e0);
    if mx::residue(r, &sq) != mx::residue(r, e0) {
        return Err(Error::NotApproxIdempotent);
    }
    let three = r.from_i64(3);
    let two = r.from_i64(2);
    let mut e = e0.clone();
    let mut steps = 0;
    while (1usize << steps) < r.prec() {
        let e2 = mx::mul(r, &e, &e);
        let e3 = mx::mul(r, &e2, &e);
        e = mx::sub(r, &mx::scale(r, three, &e2), &mx::scale(r, two, &e3));
        steps += 1;
    }
    debug_assert_eq!(mx::mul(r, &e, &e), e);
    Ok(e)
}

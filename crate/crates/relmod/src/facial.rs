//! MLE existence certification through facial sets of the marginal cone.
//!
//! A positive MLE exists iff no proper face of the cone spanned by the
//! model-matrix columns contains the support of the observed distribution.
//! The search is a linear program solved in exact rational arithmetic, so
//! certificates are trustworthy as stated.

use crate::exact::{self, rat, Rational};
use crate::model::{ModelMatrix, Observed};
use crate::simplex::{self, LpOutcome};
use num_traits::{Signed, Zero};

/// Result of the existence check.
///
/// `facial_set` is the inclusion-maximal proper facial set containing the
/// support, grown deterministically in cell order; `minimal_facial_set` is
/// the smallest one, which equals the support of the extended MLE. Indices
/// are 0-based.
#[derive(Debug, Clone)]
pub struct ExistenceReport {
    pub exists_positive: bool,
    pub facial_set: Option<Vec<usize>>,
    pub minimal_facial_set: Option<Vec<usize>>,
    pub certificate: Option<Vec<Rational>>,
}

/// Certificate search for one anchor set: find c with c'a_i = 0 for all
/// anchored cells and c'a_i >= 0 elsewhere, maximizing the number of cells
/// with c'a_i > 0. Returns the zero set and the certificate when a proper
/// face exists, i.e. when the LP optimum is positive.
fn face_certificate(model: &ModelMatrix, anchor: &[usize]) -> Option<(Vec<usize>, Vec<Rational>)> {
    let cells = model.n_cells();
    let j = model.n_rows();
    let anchored = vec![false; cells];
    let mut anchored = anchored;
    for &i in anchor {
        anchored[i] = true;
    }
    let rest: Vec<usize> = (0..cells).filter(|&i| !anchored[i]).collect();
    if rest.is_empty() {
        return None;
    }

    // c must be orthogonal to the anchored columns: parameterize c = B'y
    // over an integer kernel basis B of those columns.
    let anchor_rows: Vec<Vec<i64>> = anchor.iter().map(|&i| model.column(i)).collect();
    let b = exact::integer_kernel(&anchor_rows, j);
    let dv = b.len();
    if dv == 0 {
        return None;
    }

    // Reduced columns in the y-coordinates.
    let reduced: Vec<Vec<i64>> = rest
        .iter()
        .map(|&i| {
            let col = model.column(i);
            b.iter().map(|brow| exact::dot(brow, &col)).collect()
        })
        .collect();
    if reduced.iter().all(|r| r.iter().all(|&x| x == 0)) {
        return None;
    }

    // Variables: y+ (dv), y- (dv), s (m), w (m), t (m) with
    //   -a~_i y+ + a~_i y- + s_i + w_i = 0,
    //    s_i + t_i = 1,
    // maximizing sum s_i. The w/t columns are the starting basis.
    let m = rest.len();
    let n = 2 * dv + 3 * m;
    let mut a = Vec::with_capacity(2 * m);
    let mut rhs = Vec::with_capacity(2 * m);
    let mut basis = Vec::with_capacity(2 * m);
    for (r, red) in reduced.iter().enumerate() {
        let mut row = vec![Rational::zero(); n];
        for (k, &v) in red.iter().enumerate() {
            row[k] = rat(-v);
            row[dv + k] = rat(v);
        }
        row[2 * dv + r] = rat(1);
        row[2 * dv + m + r] = rat(1);
        a.push(row);
        rhs.push(Rational::zero());
        basis.push(2 * dv + m + r);
    }
    for r in 0..m {
        let mut row = vec![Rational::zero(); n];
        row[2 * dv + r] = rat(1);
        row[2 * dv + 2 * m + r] = rat(1);
        a.push(row);
        rhs.push(rat(1));
        basis.push(2 * dv + 2 * m + r);
    }
    let mut c = vec![Rational::zero(); n];
    for r in 0..m {
        c[2 * dv + r] = rat(1);
    }

    let sol = simplex::maximize(&a, &rhs, &c, basis);
    debug_assert_eq!(sol.outcome, LpOutcome::Optimal);
    if sol.value.is_zero() {
        return None;
    }

    let y: Vec<Rational> = (0..dv)
        .map(|k| sol.x[k].clone() - sol.x[dv + k].clone())
        .collect();
    let cert: Vec<Rational> = (0..j)
        .map(|r| {
            y.iter()
                .zip(&b)
                .map(|(yk, brow)| yk * rat(brow[r]))
                .sum()
        })
        .collect();
    let zero_set: Vec<usize> = (0..cells)
        .filter(|&i| {
            let v: Rational = cert
                .iter()
                .zip(model.column(i))
                .map(|(ck, ai)| ck * rat(ai))
                .sum();
            debug_assert!(!v.is_negative());
            v.is_zero()
        })
        .collect();
    Some((zero_set, cert))
}

/// The smallest facial set containing the support, or None when no proper
/// face contains it (i.e. when the positive MLE exists). The minimal face is
/// the support of the extended MLE.
pub(crate) fn minimal_face(
    model: &ModelMatrix,
    data: &Observed,
) -> Option<(Vec<usize>, Vec<Rational>)> {
    if data.support().len() == model.n_cells() {
        return None;
    }
    face_certificate(model, data.support())
}

/// True iff the MLE exists with strictly positive probabilities: no proper
/// facial set contains the support. Base LP only; cheaper than the full
/// `existence_check` report.
pub fn exists_positive(model: &ModelMatrix, data: &Observed) -> bool {
    minimal_face(model, data).is_none()
}

/// Decides whether the MLE exists with strictly positive probabilities and,
/// when it does not, produces a facial set containing the support together
/// with its certificate vector.
pub fn existence_check(model: &ModelMatrix, data: &Observed) -> ExistenceReport {
    let Some((minimal, mut cert)) = minimal_face(model, data) else {
        return ExistenceReport {
            exists_positive: true,
            facial_set: None,
            minimal_facial_set: None,
            certificate: None,
        };
    };

    // Grow the face one cell at a time, in cell order, until maximal. A cell
    // that cannot be absorbed now can never be absorbed later, so a single
    // pass suffices.
    let mut face = minimal.clone();
    let mut i = 0;
    while i < model.n_cells() {
        if !face.contains(&i) {
            let mut anchor = face.clone();
            anchor.push(i);
            if let Some((grown, grown_cert)) = face_certificate(model, &anchor) {
                face = grown;
                cert = grown_cert;
            }
        }
        i += 1;
    }

    ExistenceReport {
        exists_positive: false,
        facial_set: Some(face),
        minimal_facial_set: Some(minimal),
        certificate: Some(cert),
    }
}

//! Lattice refinement: from a nonsingular rational form and a start lattice
//! to a nearly unimodular integral lattice in the same rational class.
//!
//! The loop normalizes `P <- P /\ P~`, measures the quotient `M = P~/P`,
//! and while `M` is not semisimple replaces `P` by `P + p^n P~` where
//! `p^n` kills `M J` but not `M` (here `J = pR`, so `n` is one less than
//! the largest quotient exponent). The quotient length strictly drops each
//! round.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lattice::{rational_class_of_matrix, GramForm, RationalClass};
use crate::matrix::{Matrix, SmithProfile};
use crate::plocal::{check_odd_prime, PLocal};
use crate::PMat;

/// A nonsingular symmetric form on the ambient `F^n` together with a basis
/// of the current full lattice `P`. Gram entries may have denominators at
/// `p`; the basis only needs to be invertible over `F`.
#[derive(Clone, Debug)]
pub struct AmbientForm {
    prime: u64,
    gram_f: PMat,
    basis: PMat,
}

impl AmbientForm {
    pub fn new(prime: u64, gram_f: PMat, basis: PMat) -> Result<Self> {
        check_odd_prime(prime)?;
        let gram_f = gram_f.attach_prime(prime);
        let basis = basis.attach_prime(prime);
        if !gram_f.is_square() || gram_f.transpose() != gram_f {
            return Err(Error::Precondition("ambient gram must be symmetric".into()));
        }
        if gram_f.det().is_zero() {
            return Err(Error::SingularForm);
        }
        if basis.rows() != gram_f.rows() || !basis.is_square() || basis.det().is_zero() {
            return Err(Error::Precondition("basis must be invertible over F".into()));
        }
        Ok(AmbientForm {
            prime,
            gram_f,
            basis,
        })
    }

    /// Standard lattice as the start.
    pub fn with_standard_basis(prime: u64, gram_f: PMat) -> Result<Self> {
        let n = gram_f.rows();
        AmbientForm::new(prime, gram_f, Matrix::identity(n).attach_prime(prime))
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn gram_f(&self) -> &PMat {
        &self.gram_f
    }

    pub fn basis(&self) -> &PMat {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.gram_f.rows()
    }

    /// Gram matrix of the form restricted to the current lattice basis.
    pub fn gram_in_basis(&self) -> PMat {
        &(&self.basis.transpose() * &self.gram_f) * &self.basis
    }

    pub fn rational_class(&self) -> Result<RationalClass> {
        rational_class_of_matrix(self.prime, &self.gram_f)
    }
}

/// A lattice together with its dual `P~ = {x : g(P, x) in R}` and the
/// quotient profile of `P~/P`. Construction normalizes `P <- P /\ P~`
/// first when the lattice is not self-contained.
#[derive(Clone, Debug)]
pub struct DualPair {
    pub lattice: PMat,
    pub dual: PMat,
    pub profile: SmithProfile,
    /// whether the intersection step changed the lattice
    pub intersected: bool,
}

/// Basis of the dual lattice: `basis * (gram in basis)^{-1}`.
pub fn dual_basis(a: &AmbientForm) -> Result<PMat> {
    let gb = a.gram_in_basis();
    let inv = gb.inverse().ok_or(Error::SingularForm)?;
    Ok(&a.basis * &inv)
}

/// Basis of the sum of two full lattices, via the Smith normal form of the
/// stacked basis matrix.
pub fn lattice_sum(a: &PMat, b: &PMat) -> PMat {
    let stacked = a.hstack(b);
    let snf = stacked.smith_normal_form();
    let n = a.rows();
    // span = U^{-1} * diag(p^{e_i}) over the first n slots
    let mut diag: PMat = Matrix::zero(n, n);
    for i in 0..n {
        diag[(i, i)] = snf.d[(i, i)].clone();
    }
    &snf.u_inv * &diag
}

/// Basis of the intersection of two full lattices: pairs `(u, v)` with
/// `A u = B v` form a direct summand of `R^{2n}`, read off the kernel
/// columns of the Smith transform.
pub fn lattice_intersect(a: &PMat, b: &PMat) -> PMat {
    let n = a.rows();
    let stacked = a.hstack(&-b);
    let snf = stacked.smith_normal_form();
    // columns of V beyond the rank map onto the kernel of [A | -B]
    let rank = (0..n)
        .take_while(|&i| !snf.d[(i, i)].is_zero())
        .count();
    debug_assert_eq!(rank, n, "full lattices intersect in full rank");
    let cols: Vec<usize> = (n..2 * n).collect();
    let rows_u: Vec<usize> = (0..n).collect();
    let kernel_u = snf.v.submatrix(&rows_u, &cols);
    a * &kernel_u
}

pub fn dual_lattice(a: &AmbientForm) -> Result<DualPair> {
    let dual = dual_basis(a)?;
    // is P contained in P~? equivalently, the gram in basis is integral
    let gb = a.gram_in_basis();
    let (lattice, dual, intersected) = if gb.is_integral() {
        (a.basis.clone(), dual, false)
    } else {
        let inter = lattice_intersect(&a.basis, &dual);
        let normalized = AmbientForm::new(a.prime, a.gram_f.clone(), inter.clone())?;
        let d = dual_basis(&normalized)?;
        (inter, d, true)
    };
    // quotient profile of P~/P: write P = P~ * C and take the SNF of C
    let c = &dual.inverse().ok_or(Error::SingularForm)? * &lattice;
    debug_assert!(c.is_integral());
    let profile = c.smith_normal_form().profile();
    Ok(DualPair {
        lattice,
        dual,
        profile,
        intersected,
    })
}

/// One refinement round in the trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefineStep {
    /// length of `P~/P` entering the round
    pub colength: i64,
    /// largest quotient exponent
    pub max_exponent: i64,
    /// the chosen power: `P <- P + p^n P~`
    pub n: i64,
}

#[derive(Clone, Debug, Default)]
pub struct RefineTrace {
    pub steps: Vec<RefineStep>,
    /// length of `P~/P` after the initial normalization
    pub initial_colength: i64,
}

/// Runs the refinement loop; the result's `gram_in_basis` is integral,
/// nonsingular and nearly unimodular, in the same rational class as the
/// input.
pub fn refine_to_nearly_unimodular(a: &AmbientForm) -> Result<(AmbientForm, RefineTrace)> {
    let mut current = a.clone();
    let mut trace = RefineTrace::default();
    let mut prev_len: Option<i64> = None;
    loop {
        let pair = dual_lattice(&current)?;
        if pair.intersected {
            current = AmbientForm::new(current.prime, current.gram_f.clone(), pair.lattice.clone())?;
        }
        let len = pair.profile.colength();
        if prev_len.is_none() {
            trace.initial_colength = len;
        }
        if let Some(prev) = prev_len {
            if len >= prev {
                return Err(Error::Precondition(format!(
                    "refinement did not shrink the quotient: {prev} -> {len}"
                )));
            }
        }
        prev_len = Some(len);
        let max_e = pair.profile.max_finite().unwrap_or(0);
        if max_e <= 1 {
            // M = P~/P is already semisimple
            return Ok((current, trace));
        }
        let n = max_e - 1;
        trace.steps.push(RefineStep {
            colength: len,
            max_exponent: max_e,
            n,
        });
        let scaled_dual = pair.dual.scale(&PLocal::p_power(n, current.prime));
        let new_basis = lattice_sum(&pair.lattice, &scaled_dual);
        // containment chain of the proof: P < P1 <= P~1 < P~ strictly at
        // both ends
        debug_assert!(sublattice(&pair.lattice, &new_basis));
        debug_assert!(sublattice(&new_basis, &pair.dual));
        current = AmbientForm::new(current.prime, current.gram_f.clone(), new_basis)?;
    }
}

/// Is `span(a)` contained in `span(b)`?
pub fn sublattice(a: &PMat, b: &PMat) -> bool {
    match b.inverse() {
        Some(binv) => (&binv * a).is_integral(),
        None => false,
    }
}

/// The refined output as a `GramForm` (the integral Gram in the final
/// basis).
pub fn refined_gram_form(a: &AmbientForm) -> Result<GramForm> {
    GramForm::new(a.prime, 1, a.gram_in_basis())
}

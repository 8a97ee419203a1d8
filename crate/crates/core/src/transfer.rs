//! Transfer into the endomorphism order of a nearly unimodular diagonal
//! form, the morphism-triple model of non-unimodular forms, and the
//! integral-descent experiment.
//!
//! For `f = diag(a_1, ..., a_N)` with valuations in `{0, 1}` sorted
//! ascending, the endomorphisms of the triple `(P, f, P*)` form the block
//! order `E = {X : nu(X_ij) >= max(0, nu(a_j) - nu(a_i))}` with the
//! involution `tau(X) = G^-1 X^T G`. The descent experiment draws
//! tau-unitary rational matrices and checks that every witness of a
//! tau-symmetric unit is forced into `E` when the residue involution is
//! anisotropic, together with the valuation shift law and the
//! min-additivity of column sums.

use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{jordan_invariant_oracle, GramForm, JordanLabel};
use crate::matrix::Matrix;
use crate::orders::BlockOrder;
use crate::plocal::{legendre, PLocal, Valuation};
use crate::PMat;

/// Endomorphism-order context of a sorted nearly unimodular diagonal form.
#[derive(Clone, Debug)]
pub struct TransferContext {
    prime: u64,
    diag: Vec<PLocal>,
    unit_block: usize,
    gram: PMat,
    gram_inv: PMat,
    order: BlockOrder,
    anisotropic: bool,
}

/// Builds the context, verifying that the diagonal is sorted with entry
/// valuations in `{0, 1}` and precomputing the residue anisotropy flag.
pub fn build_context(f: &GramForm) -> Result<TransferContext> {
    let p = f.prime();
    let n = f.rank();
    if f.epsilon() != 1 {
        return Err(Error::Precondition("context needs epsilon = +1".into()));
    }
    let g = f.gram();
    for i in 0..n {
        for j in 0..n {
            if i != j && !g[(i, j)].is_zero() {
                return Err(Error::Precondition("context needs a diagonal form".into()));
            }
        }
    }
    let diag: Vec<PLocal> = (0..n).map(|i| g[(i, i)].clone()).collect();
    let mut unit_block = 0;
    let mut seen_scaled = false;
    for d in &diag {
        match d.valuation() {
            Valuation::Finite(0) => {
                if seen_scaled {
                    return Err(Error::Precondition("diagonal must be sorted by valuation".into()));
                }
                unit_block += 1;
            }
            Valuation::Finite(1) => seen_scaled = true,
            _ => return Err(Error::NotNearlyUnimodular),
        }
    }
    let sizes = if unit_block == 0 || unit_block == n {
        vec![n]
    } else {
        vec![unit_block, n - unit_block]
    };
    let order = BlockOrder::new(p, sizes)?;
    let gram = g.clone();
    let gram_inv = gram.inverse().ok_or(Error::SingularForm)?;

    let unit_parts = |range: std::ops::Range<usize>| -> Result<Vec<PLocal>> {
        range.map(|i| Ok(diag[i].unit_part())).collect()
    };
    let aniso_block = |units: &[PLocal]| -> Result<bool> {
        match units.len() {
            0 | 1 => Ok(true),
            2 => {
                let prod = -(units[0].clone() * units[1].clone());
                Ok(legendre(&prod)? == -1)
            }
            _ => Ok(false), // forms in >= 3 variables over k are isotropic
        }
    };
    let u0 = unit_parts(0..unit_block)?;
    let u1 = unit_parts(unit_block..n)?;
    let anisotropic = aniso_block(&u0)? && aniso_block(&u1)?;

    let ctx = TransferContext {
        prime: p,
        diag,
        unit_block,
        gram,
        gram_inv,
        order,
        anisotropic,
    };
    ctx.verify_construction()?;
    Ok(ctx)
}

impl TransferContext {
    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn rank(&self) -> usize {
        self.diag.len()
    }

    /// Size of the valuation-zero diagonal block.
    pub fn unit_block(&self) -> usize {
        self.unit_block
    }

    pub fn gram(&self) -> &PMat {
        &self.gram
    }

    pub fn order(&self) -> &BlockOrder {
        &self.order
    }

    pub fn is_anisotropic(&self) -> bool {
        self.anisotropic
    }

    /// The transfer involution `tau(X) = G^-1 X^T G`.
    pub fn tau(&self, x: &PMat) -> PMat {
        &(&self.gram_inv * &x.transpose()) * &self.gram
    }

    /// Entry-level valuation bound of the order `E`.
    pub fn bound(&self, i: usize, j: usize) -> i64 {
        let vi = self.diag[i].valuation().finite().unwrap();
        let vj = self.diag[j].valuation().finite().unwrap();
        (vj - vi).max(0)
    }

    /// Membership in `E`.
    pub fn in_order(&self, x: &PMat) -> bool {
        let n = self.rank();
        if x.rows() != n || x.cols() != n {
            return false;
        }
        let x = x.attach_prime(self.prime);
        (0..n).all(|i| {
            (0..n).all(|j| x[(i, j)].valuation() >= Valuation::Finite(self.bound(i, j)))
        })
    }

    /// Membership in `E^x`: in the order with an inverse in the order.
    pub fn in_order_units(&self, x: &PMat) -> bool {
        if !self.in_order(x) {
            return false;
        }
        match x.inverse() {
            Some(inv) => self.in_order(&inv),
            None => false,
        }
    }

    /// The expected valuation shift of `tau` on the `(i, j)` entry.
    pub fn tau_shift(&self, i: usize, j: usize) -> i64 {
        let n0 = self.unit_block;
        if i < n0 && j >= n0 {
            -1
        } else if i >= n0 && j < n0 {
            1
        } else {
            0
        }
    }

    fn verify_construction(&self) -> Result<()> {
        let n = self.rank();
        // tau is involutive and fixes the diagonal idempotents, exactly
        for i in 0..n {
            for j in 0..n {
                let mut e: PMat = Matrix::zero(n, n);
                e[(i, j)] = PLocal::from_int(1, self.prime);
                let tt = self.tau(&self.tau(&e));
                if tt != e {
                    return Err(Error::Precondition("tau is not involutive".into()));
                }
                if i == j && self.tau(&e) != e {
                    return Err(Error::Precondition("tau moves a diagonal idempotent".into()));
                }
            }
        }
        // the order's bound matrix agrees with the hereditary block pattern
        let b = self.order.bounds();
        for i in 0..n {
            for j in 0..n {
                if b[(i, j)] != self.bound(i, j) {
                    return Err(Error::Precondition("order bounds disagree with block pattern".into()));
                }
            }
        }
        Ok(())
    }
}

/// Transfer of a symmetric form `h` on the same module: `a = G_f^-1 G_h`.
/// `a` is always `tau`-symmetric; it lies in `E` iff `h` is a morphism-
/// category endomorph of `f`, and in `E^x` iff the coradicals agree.
pub fn transfer_form(ctx: &TransferContext, h: &GramForm) -> Result<PMat> {
    if h.rank() != ctx.rank() || h.prime() != ctx.prime {
        return Err(Error::RankMismatch(h.rank(), ctx.rank()));
    }
    if h.epsilon() != 1 {
        return Err(Error::Precondition("transfer needs epsilon = +1".into()));
    }
    Ok(&ctx.gram_inv * h.gram())
}

/// An object `(P, f, Q)` of the morphism category over `R`: an integral
/// map between free modules.
#[derive(Clone, Debug)]
pub struct MorphismTriple {
    prime: u64,
    map: PMat,
}

impl MorphismTriple {
    pub fn new(prime: u64, map: PMat) -> Result<Self> {
        let map = map.attach_prime(prime);
        if !map.is_integral() {
            return Err(Error::NotIntegral("morphism entries must lie in R".into()));
        }
        Ok(MorphismTriple { prime, map })
    }

    pub fn source_rank(&self) -> usize {
        self.map.cols()
    }

    pub fn target_rank(&self) -> usize {
        self.map.rows()
    }

    pub fn map(&self) -> &PMat {
        &self.map
    }
}

/// Isomorphism test in the morphism category: equal ranks on both sides
/// and equal cokernels, i.e. equal Smith profiles.
pub fn morphism_iso_test(a: &MorphismTriple, b: &MorphismTriple) -> bool {
    a.prime == b.prime
        && a.source_rank() == b.source_rank()
        && a.target_rank() == b.target_rank()
        && a.map.smith_normal_form().profile() == b.map.smith_normal_form().profile()
}

/// The constructive side of the isomorphism test: an explicit pair
/// `(phi, psi)`, both invertible over `R`, with `psi f = f' phi`, read off
/// the two Smith decompositions.
pub fn morphism_iso_witness(a: &MorphismTriple, b: &MorphismTriple) -> Option<(PMat, PMat)> {
    if !morphism_iso_test(a, b) {
        return None;
    }
    let sa = a.map.smith_normal_form();
    let sb = b.map.smith_normal_form();
    debug_assert_eq!(sa.d, sb.d);
    let phi = &sb.v * &sa.v_inv;
    let psi = &sb.u_inv * &sa.u;
    debug_assert_eq!(&psi * &a.map, &b.map * &phi);
    Some((phi, psi))
}

/// Outcome of checking one candidate witness of a congruence `x^tau x = a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessVerdict {
    /// `x^tau x != a`
    NotWitness,
    /// a witness over `F` that does not lie in `E^x`
    RationalOnlyWitness,
    /// a witness in `E^x`
    IntegralWitness,
}

/// A `tau`-symmetric unit together with a candidate witness.
#[derive(Clone, Debug)]
pub struct CongruenceInstance {
    pub ctx: TransferContext,
    pub a: PMat,
    pub x: PMat,
}

impl CongruenceInstance {
    pub fn new(ctx: TransferContext, a: PMat, x: PMat) -> Result<Self> {
        let a = a.attach_prime(ctx.prime);
        if ctx.tau(&a) != a || !ctx.in_order_units(&a) {
            return Err(Error::NotSymmetricUnit);
        }
        Ok(CongruenceInstance { ctx, a, x })
    }
}

pub fn congruence_verify(inst: &CongruenceInstance) -> WitnessVerdict {
    let ctx = &inst.ctx;
    let x = inst.x.attach_prime(ctx.prime);
    let prod = &ctx.tau(&x) * &x;
    if prod != inst.a {
        return WitnessVerdict::NotWitness;
    }
    if ctx.in_order_units(&x) {
        WitnessVerdict::IntegralWitness
    } else {
        WitnessVerdict::RationalOnlyWitness
    }
}

/// A random `tau`-unitary matrix via the Cayley transform of a random
/// `tau`-antisymmetric rational `z`. Denominator valuations of `z` are
/// bounded below by `-denom_bound`. The output satisfies
/// `u^tau u = 1` exactly and need not lie in `E`.
pub fn random_unitary(
    ctx: &TransferContext,
    rng: &mut ChaCha8Rng,
    denom_bound: i64,
) -> Result<PMat> {
    let n = ctx.rank();
    let p = ctx.prime;
    for _ in 0..64 {
        let mut z: PMat = Matrix::zero(n, n).attach_prime(p);
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen_bool(0.25) {
                    continue; // keep some sparsity
                }
                let num = rng.gen_range(-6i64..=6);
                let e = rng.gen_range(-denom_bound..=1);
                let val = PLocal::from_int(num, p) * PLocal::p_power(e, p);
                // tau-antisymmetry determines the mirror entry:
                // z_ji = -a_j^-1 a_i z_ij
                let mirror = -(ctx.diag[i].clone() / ctx.diag[j].clone()) * val.clone();
                z[(i, j)] = val;
                z[(j, i)] = mirror;
            }
        }
        debug_assert_eq!(ctx.tau(&z), -&z);
        let id: PMat = Matrix::identity(n).attach_prime(p);
        let denom = &id + &z;
        let Some(denom_inv) = denom.inverse() else {
            continue;
        };
        let u = &(&id - &z) * &denom_inv;
        assert_eq!(&ctx.tau(&u) * &u, id, "cayley transform must be unitary");
        return Ok(u);
    }
    Err(Error::RetriesExhausted("could not draw a unitary".into()))
}

/// A random element of `E^x`: random integral entries at the order's
/// bounds with invertible residue diagonal blocks.
pub fn random_order_unit(ctx: &TransferContext, rng: &mut ChaCha8Rng) -> PMat {
    let n = ctx.rank();
    let p = ctx.prime;
    loop {
        let x = Matrix::from_fn(n, n, |i, j| {
            let c = rng.gen_range(-6i64..=6);
            PLocal::from_int(c, p) * PLocal::p_power(ctx.bound(i, j), p)
        });
        if ctx.in_order_units(&x) {
            return x;
        }
    }
}

/// Per-entry check of the valuation shift law for `tau`.
pub fn shift_law_violations(ctx: &TransferContext, x: &PMat) -> usize {
    let n = ctx.rank();
    let xt = ctx.tau(x);
    let mut violations = 0;
    for i in 0..n {
        for j in 0..n {
            let lhs = xt[(j, i)].valuation();
            let rhs = x[(i, j)].valuation() + ctx.tau_shift(i, j);
            if lhs != rhs {
                violations += 1;
            }
        }
    }
    violations
}

/// Min-additivity of the blockwise column sums of `x^tau x`: for each
/// column `j` and each block of row indices, the valuation of
/// `sum_i tau(x)_{ji} x_{ij}` equals the minimum of the summands'.
pub fn min_additivity_violations(ctx: &TransferContext, x: &PMat) -> usize {
    let n = ctx.rank();
    let n0 = ctx.unit_block;
    let xt = ctx.tau(x);
    let mut violations = 0;
    for j in 0..n {
        for block in [0..n0, n0..n] {
            if block.is_empty() {
                continue;
            }
            let mut sum = PLocal::zero().attach(ctx.prime);
            let mut min_v = Valuation::Infinite;
            for i in block {
                let term = xt[(j, i)].clone() * x[(i, j)].clone();
                min_v = min_v.min(term.valuation());
                sum = sum + term;
            }
            if sum.valuation() != min_v {
                violations += 1;
            }
        }
    }
    violations
}

#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct DescentReport {
    pub trials: usize,
    pub integral_witness_count: usize,
    pub rational_only_count: usize,
    pub not_witness_count: usize,
    pub claim9_violations: usize,
    pub claim11_violations: usize,
    pub anisotropic: bool,
}

/// The descent experiment: per trial, draw `x0` in `E^x` and a rational
/// `tau`-unitary `u`, set `x = u x0` and `a = x^tau x`, and verify the
/// witness. Under an anisotropic residue involution every trial must come
/// back integral and the shift/min-additivity laws must hold; on isotropic
/// contexts the counts are reported without assertion.
pub fn descent_experiment(ctx: &TransferContext, trials: usize, seed: u64) -> Result<DescentReport> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = DescentReport {
        anisotropic: ctx.anisotropic,
        ..DescentReport::default()
    };
    for _ in 0..trials {
        let x0 = random_order_unit(ctx, &mut rng);
        let u = random_unitary(ctx, &mut rng, 3)?;
        let x = &u * &x0;
        let a = &ctx.tau(&x) * &x;
        // a = x0^tau x0 is tau-symmetric and a unit of E regardless of u
        let inst = CongruenceInstance::new(ctx.clone(), a, x.clone())?;
        report.trials += 1;
        match congruence_verify(&inst) {
            WitnessVerdict::IntegralWitness => report.integral_witness_count += 1,
            WitnessVerdict::RationalOnlyWitness => report.rational_only_count += 1,
            WitnessVerdict::NotWitness => report.not_witness_count += 1,
        }
        report.claim9_violations += shift_law_violations(ctx, &x);
        report.claim11_violations += min_additivity_violations(ctx, &x);
    }
    Ok(report)
}

/// Canonical label of a `tau`-congruence class: the Jordan invariants of
/// the form `G_f a` associated with the symmetric unit `a`. Two symmetric
/// units are `tau`-congruent iff their labels agree.
pub fn congruence_class_invariants(ctx: &TransferContext, a: &PMat) -> Result<Vec<JordanLabel>> {
    let a = a.attach_prime(ctx.prime);
    if ctx.tau(&a) != a || !ctx.in_order_units(&a) {
        return Err(Error::NotSymmetricUnit);
    }
    let gram = &ctx.gram * &a;
    let form = GramForm::new(ctx.prime, 1, gram)?;
    jordan_invariant_oracle(&form)
}

//! Quadratic and alternating lattices over `R = Z_(p)`: coradicals, near
//! unimodularity, Jordan splitting, rational and integral isometry
//! decisions, and witness construction by Hensel lifting.

use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, SmithProfile};
use crate::plocal::{hilbert_symbol, legendre, nonresidue, check_odd_prime, Fp, PLocal, Valuation};
use crate::{FpMat, PMat};

/// A bilinear form on a free `R`-lattice, given by its Gram matrix.
/// `epsilon = +1` is the symmetric case, `epsilon = -1` the alternating one.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GramForm {
    prime: u64,
    epsilon: i8,
    gram: PMat,
}

impl GramForm {
    pub fn new(prime: u64, epsilon: i8, gram: PMat) -> Result<Self> {
        check_odd_prime(prime)?;
        if epsilon != 1 && epsilon != -1 {
            return Err(Error::Precondition(format!("epsilon must be +-1, got {epsilon}")));
        }
        if !gram.is_square() {
            return Err(Error::SizeMismatch("gram matrix must be square".into()));
        }
        let gram = gram.attach_prime(prime);
        if !gram.is_integral() {
            return Err(Error::NotIntegral("gram entry with negative valuation".into()));
        }
        let eps = PLocal::from_int(epsilon as i64, prime);
        if gram.transpose() != gram.scale(&eps) {
            return Err(Error::Precondition(
                "gram matrix does not satisfy gram^T = epsilon * gram".into(),
            ));
        }
        Ok(GramForm { prime, epsilon, gram })
    }

    /// Diagonal form `<d_1, ..., d_n>`.
    pub fn diagonal(prime: u64, entries: &[i64]) -> Result<Self> {
        let diag = Matrix::diagonal(
            entries.iter().map(|&d| PLocal::from_int(d, prime)).collect(),
        );
        GramForm::new(prime, 1, diag)
    }

    /// The hyperbolic form of rank `2n`: a block diagonal of `[[0,1],[eps,0]]`.
    pub fn hyperbolic(prime: u64, n: usize, epsilon: i8) -> Result<Self> {
        let one = PLocal::from_int(1, prime);
        let eps = PLocal::from_int(epsilon as i64, prime);
        let block = Matrix::from_rows(vec![
            vec![PLocal::from_int(0, prime), one],
            vec![eps, PLocal::from_int(0, prime)],
        ]);
        let blocks = vec![block; n];
        GramForm::new(prime, epsilon, Matrix::block_diag(&blocks))
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn epsilon(&self) -> i8 {
        self.epsilon
    }

    pub fn gram(&self) -> &PMat {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn is_nonsingular(&self) -> bool {
        !self.gram.det().is_zero()
    }

    /// Elementary-divisor data of the adjoint map `P -> P*`.
    pub fn coradical(&self) -> CoradicalProfile {
        CoradicalProfile::from_profile(&self.gram.smith_normal_form().profile())
    }

    /// All coradical exponents at most 1 and the form nonsingular.
    pub fn is_nearly_unimodular(&self) -> bool {
        let c = self.coradical();
        c.rank_defect() == 0 && c.exponents().iter().all(|&e| e <= 1)
    }

    pub fn is_unimodular(&self) -> bool {
        self.gram.det().is_unit()
    }

    /// The form `f` restricted along `x`, that is `x^T gram x`.
    pub fn apply(&self, x: &PMat) -> PMat {
        &(&x.transpose() * &self.gram) * x
    }
}

/// The nonzero elementary-divisor exponents of the Gram matrix, plus the
/// number of zero rows of its diagonalization.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CoradicalProfile {
    exponents: Vec<i64>,
    rank_defect: usize,
}

impl CoradicalProfile {
    pub fn from_profile(p: &SmithProfile) -> Self {
        let mut exponents: Vec<i64> = p
            .finite_exponents()
            .into_iter()
            .filter(|&e| e > 0)
            .collect();
        exponents.sort_unstable();
        CoradicalProfile {
            exponents,
            rank_defect: p.rank_defect(),
        }
    }

    pub fn exponents(&self) -> &[i64] {
        &self.exponents
    }

    pub fn rank_defect(&self) -> usize {
        self.rank_defect
    }

    /// Length of the torsion module `P*/f(P)`.
    pub fn colength(&self) -> i64 {
        self.exponents.iter().sum()
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.is_empty() && self.rank_defect == 0
    }
}

/// The complete `Q_p` invariant of a nonsingular symmetric form: rank,
/// square class of the discriminant, Hasse invariant.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct RationalClass {
    pub prime: u64,
    pub rank: usize,
    /// parity of the valuation of the discriminant
    pub disc_val_odd: bool,
    /// Legendre symbol of the unit part of the discriminant
    pub disc_leg: i8,
    pub hasse: i8,
}

impl RationalClass {
    /// A rational representative of the discriminant square class.
    pub fn disc_representative(&self) -> PLocal {
        let u = if self.disc_leg == 1 {
            1
        } else {
            nonresidue(self.prime) as i64
        };
        let e = if self.disc_val_odd { 1 } else { 0 };
        PLocal::from_int(u, self.prime) * PLocal::p_power(e, self.prime)
    }
}

/// Invariants of the orthogonal sum, computed purely on invariants:
/// ranks add, discriminants multiply, and the Hasse invariants compose
/// through the Hilbert symbol of the discriminants.
pub fn class_orthogonal_sum(a: &RationalClass, b: &RationalClass) -> Result<RationalClass> {
    if a.prime != b.prime {
        return Err(Error::Precondition("mixed primes in class arithmetic".into()));
    }
    let hasse = a.hasse
        * b.hasse
        * hilbert_symbol(&a.disc_representative(), &b.disc_representative())?;
    Ok(RationalClass {
        prime: a.prime,
        rank: a.rank + b.rank,
        disc_val_odd: a.disc_val_odd ^ b.disc_val_odd,
        disc_leg: a.disc_leg * b.disc_leg,
        hasse,
    })
}

/// Recovers the class of `f` from the classes of `f + h` and `h`
/// (cancellation at the invariant level).
pub fn class_cancel(sum: &RationalClass, h: &RationalClass) -> Result<RationalClass> {
    if sum.prime != h.prime || sum.rank < h.rank {
        return Err(Error::Precondition("cancellation shapes do not match".into()));
    }
    let disc_val_odd = sum.disc_val_odd ^ h.disc_val_odd;
    let disc_leg = sum.disc_leg * h.disc_leg;
    let f_disc = RationalClass {
        prime: sum.prime,
        rank: sum.rank - h.rank,
        disc_val_odd,
        disc_leg,
        hasse: 1,
    };
    let hasse = sum.hasse
        * h.hasse
        * hilbert_symbol(&f_disc.disc_representative(), &h.disc_representative())?;
    Ok(RationalClass { hasse, ..f_disc })
}

/// One Jordan constituent: a unimodular form at a scale `p^s`.
#[derive(Clone, Debug)]
pub struct JordanConstituent {
    pub scale: i64,
    pub form: GramForm,
}

/// Orthogonal splitting `W^T gram W = blockdiag(p^{s_0} f_0, p^{s_1} f_1, ...)`
/// with strictly increasing scales and `W` invertible over `R`.
#[derive(Clone, Debug)]
pub struct JordanSplit {
    pub constituents: Vec<JordanConstituent>,
    pub witness: PMat,
}

/// Symmetric congruence diagonalization over the fraction field with
/// minimal-valuation pivoting; the accumulated transform stays invertible
/// over `R`. Returns `(W, d)` with `W^T g W = diag(d)`. Zero diagonal
/// entries signal a singular input.
pub fn symmetric_diagonalize(g: &PMat) -> (PMat, Vec<PLocal>) {
    assert!(g.is_square());
    let n = g.rows();
    let p = g.prime_tag();
    let mut m = g.attach_prime(p);
    let mut w: PMat = Matrix::identity(n);

    // symmetric column+row operation: basis v_dst <- v_dst + c * v_src
    fn sym_add(m: &mut PMat, w: &mut PMat, dst: usize, src: usize, c: &PLocal) {
        let n = m.rows();
        for i in 0..n {
            let cur = std::mem::replace(&mut m[(i, dst)], num_traits::Zero::zero());
            m[(i, dst)] = cur + c * &m[(i, src)];
        }
        for j in 0..n {
            let cur = std::mem::replace(&mut m[(dst, j)], num_traits::Zero::zero());
            m[(dst, j)] = cur + c * &m[(src, j)];
        }
        for i in 0..n {
            let cur = std::mem::replace(&mut w[(i, dst)], num_traits::Zero::zero());
            w[(i, dst)] = cur + c * &w[(i, src)];
        }
    }

    fn sym_swap(m: &mut PMat, w: &mut PMat, a: usize, b: usize) {
        if a == b {
            return;
        }
        let n = m.rows();
        for i in 0..n {
            let x = m[(i, a)].clone();
            m[(i, a)] = m[(i, b)].clone();
            m[(i, b)] = x;
        }
        for j in 0..n {
            let x = m[(a, j)].clone();
            m[(a, j)] = m[(b, j)].clone();
            m[(b, j)] = x;
        }
        for i in 0..n {
            let x = w[(i, a)].clone();
            w[(i, a)] = w[(i, b)].clone();
            w[(i, b)] = x;
        }
    }

    for t in 0..n {
        // minimal valuation on or above the diagonal of the remaining block,
        // lexicographically first among ties
        let mut best: Option<(Valuation, usize, usize)> = None;
        for i in t..n {
            for j in i..n {
                let v = m[(i, j)].valuation();
                if !v.is_finite() {
                    continue;
                }
                if best.map_or(true, |(bv, _, _)| v < bv) {
                    best = Some((v, i, j));
                }
            }
        }
        let Some((_, bi, bj)) = best else {
            break; // remaining block is zero
        };
        if bi != bj {
            // merge v_bi <- v_bi +- v_bj; since 2 is a unit, at least one
            // sign gives a diagonal entry of the minimal valuation
            let e = m[(bi, bj)].valuation();
            let plus = m[(bi, bi)].clone()
                + PLocal::from_int(2, p) * m[(bi, bj)].clone()
                + m[(bj, bj)].clone();
            let c: PLocal = if plus.valuation() == e {
                num_traits::One::one()
            } else {
                -num_traits::one::<PLocal>()
            };
            sym_add(&mut m, &mut w, bi, bj, &c);
            debug_assert_eq!(m[(bi, bi)].valuation(), e);
        }
        sym_swap(&mut m, &mut w, t, bi);
        let pivot = m[(t, t)].clone();
        debug_assert!(!pivot.is_zero());
        for j in (t + 1)..n {
            if m[(t, j)].is_zero() {
                continue;
            }
            let c = -(m[(t, j)].clone() / pivot.clone());
            sym_add(&mut m, &mut w, j, t, &c);
        }
    }
    let diag = (0..n).map(|i| m[(i, i)].clone()).collect();
    (w, diag)
}

/// Jordan splitting of a nonsingular symmetric integral form.
pub fn jordan_split(f: &GramForm) -> Result<JordanSplit> {
    if f.epsilon() != 1 {
        return Err(Error::Precondition("jordan_split needs epsilon = +1".into()));
    }
    let (w, diag) = symmetric_diagonalize(f.gram());
    if diag.iter().any(|d| d.is_zero()) {
        return Err(Error::SingularForm);
    }
    // stable sort by scale, realized as a permutation of the basis
    let n = diag.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| diag[i].valuation().finite().unwrap());
    let mut perm: PMat = Matrix::zero(n, n);
    for (new, &old) in order.iter().enumerate() {
        perm[(old, new)] = PLocal::from_int(1, f.prime());
    }
    let witness = &w * &perm;

    let mut constituents: Vec<JordanConstituent> = Vec::new();
    let mut idx = 0;
    while idx < n {
        let s = diag[order[idx]].valuation().finite().unwrap();
        let mut units = Vec::new();
        while idx < n && diag[order[idx]].valuation() == Valuation::Finite(s) {
            units.push(diag[order[idx]].clone() / PLocal::p_power(s, f.prime()));
            idx += 1;
        }
        let form = GramForm::new(f.prime(), 1, Matrix::diagonal(units))?;
        constituents.push(JordanConstituent { scale: s, form });
    }
    Ok(JordanSplit {
        constituents,
        witness,
    })
}

/// The `Q_p` class of a nonsingular symmetric matrix with arbitrary rational
/// entries (denominators at `p` allowed).
pub fn rational_class_of_matrix(prime: u64, g: &PMat) -> Result<RationalClass> {
    check_odd_prime(prime)?;
    if !g.is_square() {
        return Err(Error::SizeMismatch("gram matrix must be square".into()));
    }
    let g = g.attach_prime(prime);
    if g.transpose() != g {
        return Err(Error::Precondition("matrix is not symmetric".into()));
    }
    let (_, diag) = symmetric_diagonalize(&g);
    if diag.iter().any(|d| d.is_zero()) {
        return Err(Error::SingularForm);
    }
    let mut disc = PLocal::from_int(1, prime);
    for d in &diag {
        disc = disc * d.clone();
    }
    let mut hasse = 1i8;
    for i in 0..diag.len() {
        for j in (i + 1)..diag.len() {
            hasse *= hilbert_symbol(&diag[i], &diag[j])?;
        }
    }
    Ok(RationalClass {
        prime,
        rank: diag.len(),
        disc_val_odd: disc.valuation().finite().unwrap() % 2 != 0,
        disc_leg: legendre(&disc.unit_part())?,
        hasse,
    })
}

/// Rank, discriminant square class and Hasse invariant of a nonsingular
/// symmetric form.
pub fn rational_class(f: &GramForm) -> Result<RationalClass> {
    if f.epsilon() != 1 {
        return Err(Error::Precondition("rational_class needs epsilon = +1".into()));
    }
    rational_class_of_matrix(f.prime(), f.gram())
}

/// `Q_p`-isometry decision via equality of rational classes.
pub fn isometric_rational(f: &GramForm, g: &GramForm) -> Result<bool> {
    if f.prime() != g.prime() {
        return Err(Error::Precondition("forms over different primes".into()));
    }
    Ok(rational_class(f)? == rational_class(g)?)
}

/// Integral isometry decision for nearly unimodular forms: rational classes
/// equal and coradical profiles equal. Inputs that are not nearly unimodular
/// are rejected with a distinct error; callers must refine first or use the
/// Jordan oracle.
pub fn isometric_integral_nearly_unimodular(f: &GramForm, g: &GramForm) -> Result<bool> {
    if f.prime() != g.prime() {
        return Err(Error::Precondition("forms over different primes".into()));
    }
    if f.epsilon() != 1 || g.epsilon() != 1 {
        return Err(Error::Precondition("decision needs epsilon = +1".into()));
    }
    let cf = f.coradical();
    let cg = g.coradical();
    let nearly = |c: &CoradicalProfile| c.rank_defect() == 0 && c.exponents().iter().all(|&e| e <= 1);
    if !nearly(&cf) || !nearly(&cg) {
        return Err(Error::NotNearlyUnimodular);
    }
    if f.rank() != g.rank() {
        return Ok(false);
    }
    if cf != cg {
        return Ok(false);
    }
    Ok(rational_class(f)? == rational_class(g)?)
}

/// One Jordan constituent's classifying label: scale, rank, and the Legendre
/// class of the constituent's discriminant.
pub type JordanLabel = (i64, usize, i8);

/// The classical complete invariant for `p` odd: per Jordan scale the rank
/// and discriminant class of the unimodular constituent. Two nonsingular
/// symmetric forms are integrally isometric iff their labels agree.
pub fn jordan_invariant_oracle(f: &GramForm) -> Result<Vec<JordanLabel>> {
    let split = jordan_split(f)?;
    let mut out = Vec::new();
    for c in &split.constituents {
        let mut disc = PLocal::from_int(1, f.prime());
        for i in 0..c.form.rank() {
            disc = disc * c.form.gram()[(i, i)].clone();
        }
        out.push((c.scale, c.form.rank(), legendre(&disc)?));
    }
    Ok(out)
}

/// Symplectic reduction of a nonsingular alternating form: returns the scale
/// list and a transform `W` over `R` with `W^T g W` block diagonal with
/// blocks `p^{s_i} [[0,1],[-1,0]]`. Unimodular alternating forms of equal
/// rank always reduce to the same normal form, which realizes their
/// classification by rank alone.
pub fn symplectic_reduce(f: &GramForm) -> Result<(Vec<i64>, PMat)> {
    if f.epsilon() != -1 {
        return Err(Error::Precondition("symplectic_reduce needs epsilon = -1".into()));
    }
    let n = f.rank();
    if n % 2 != 0 {
        return Err(Error::SingularForm); // odd alternating forms are singular
    }
    let p = f.prime();
    let mut m = f.gram().clone();
    let mut w: PMat = Matrix::identity(n).attach_prime(p);
    let mut scales = Vec::new();

    fn col_add(m: &mut PMat, w: &mut PMat, dst: usize, src: usize, c: &PLocal) {
        let n = m.rows();
        for i in 0..n {
            let v = m[(i, dst)].clone() + c.clone() * m[(i, src)].clone();
            m[(i, dst)] = v;
        }
        for j in 0..n {
            let v = m[(dst, j)].clone() + c.clone() * m[(src, j)].clone();
            m[(dst, j)] = v;
        }
        for i in 0..n {
            let v = w[(i, dst)].clone() + c.clone() * w[(i, src)].clone();
            w[(i, dst)] = v;
        }
    }

    fn col_swap(m: &mut PMat, w: &mut PMat, a: usize, b: usize) {
        if a == b {
            return;
        }
        let n = m.rows();
        for i in 0..n {
            let x = m[(i, a)].clone();
            m[(i, a)] = m[(i, b)].clone();
            m[(i, b)] = x;
        }
        for j in 0..n {
            let x = m[(a, j)].clone();
            m[(a, j)] = m[(b, j)].clone();
            m[(b, j)] = x;
        }
        for i in 0..n {
            let x = w[(i, a)].clone();
            w[(i, a)] = w[(i, b)].clone();
            w[(i, b)] = x;
        }
    }

    fn col_scale(m: &mut PMat, w: &mut PMat, t: usize, c: &PLocal) {
        let n = m.rows();
        for i in 0..n {
            let v = c.clone() * m[(i, t)].clone();
            m[(i, t)] = v;
        }
        for j in 0..n {
            let v = c.clone() * m[(t, j)].clone();
            m[(t, j)] = v;
        }
        for i in 0..n {
            let v = c.clone() * w[(i, t)].clone();
            w[(i, t)] = v;
        }
    }

    let mut t = 0;
    while t < n {
        let mut best: Option<(Valuation, usize, usize)> = None;
        for i in t..n {
            for j in (i + 1)..n {
                let v = m[(i, j)].valuation();
                if !v.is_finite() {
                    continue;
                }
                if best.map_or(true, |(bv, _, _)| v < bv) {
                    best = Some((v, i, j));
                }
            }
        }
        let Some((val, bi, bj)) = best else {
            return Err(Error::SingularForm);
        };
        let s = val.finite().unwrap();
        col_swap(&mut m, &mut w, t, bi);
        let bj = if bj == t { bi } else { bj };
        col_swap(&mut m, &mut w, t + 1, bj);
        // normalize the pairing value to p^s
        let u = m[(t, t + 1)].clone() / PLocal::p_power(s, p);
        col_scale(&mut m, &mut w, t + 1, &u.inv().unwrap());
        let ps_inv = PLocal::p_power(-s, p);
        for j in (t + 2)..n {
            // clear <e, v_j>, then <f, v_j>
            let a = m[(t, j)].clone() * ps_inv.clone();
            if !a.is_zero() {
                col_add(&mut m, &mut w, j, t + 1, &(-a));
            }
            let b = m[(t + 1, j)].clone() * ps_inv.clone();
            if !b.is_zero() {
                col_add(&mut m, &mut w, j, t, &b);
            }
        }
        scales.push(s);
        t += 2;
    }
    Ok((scales, w))
}

// ---------------------------------------------------------------------------
// residue-field isometries and Hensel lifting
// ---------------------------------------------------------------------------

/// Symmetric diagonalization over `k`.
pub fn symmetric_diagonalize_fp(g: &FpMat) -> (FpMat, Vec<Fp>) {
    assert!(g.is_square());
    let n = g.rows();
    let mut m = g.clone();
    let mut w: FpMat = Matrix::identity(n);

    fn sym_add(m: &mut FpMat, w: &mut FpMat, dst: usize, src: usize, c: Fp) {
        let n = m.rows();
        for i in 0..n {
            let v = m[(i, dst)] + c * m[(i, src)];
            m[(i, dst)] = v;
        }
        for j in 0..n {
            let v = m[(dst, j)] + c * m[(src, j)];
            m[(dst, j)] = v;
        }
        for i in 0..n {
            let v = w[(i, dst)] + c * w[(i, src)];
            w[(i, dst)] = v;
        }
    }

    fn sym_swap(m: &mut FpMat, w: &mut FpMat, a: usize, b: usize) {
        if a == b {
            return;
        }
        let n = m.rows();
        for i in 0..n {
            let x = m[(i, a)];
            m[(i, a)] = m[(i, b)];
            m[(i, b)] = x;
        }
        for j in 0..n {
            let x = m[(a, j)];
            m[(a, j)] = m[(b, j)];
            m[(b, j)] = x;
        }
        for i in 0..n {
            let x = w[(i, a)];
            w[(i, a)] = w[(i, b)];
            w[(i, b)] = x;
        }
    }

    for t in 0..n {
        let mut pivot = None;
        for i in t..n {
            if !m[(i, i)].is_zero() {
                pivot = Some((i, i));
                break;
            }
        }
        if pivot.is_none() {
            'outer: for i in t..n {
                for j in (i + 1)..n {
                    if !m[(i, j)].is_zero() {
                        pivot = Some((i, j));
                        break 'outer;
                    }
                }
            }
        }
        let Some((bi, bj)) = pivot else {
            break;
        };
        if bi != bj {
            sym_add(&mut m, &mut w, bi, bj, num_traits::One::one());
        }
        sym_swap(&mut m, &mut w, t, bi);
        let pv = m[(t, t)];
        let pinv = pv.inv().expect("nonzero pivot");
        for j in (t + 1)..n {
            if m[(t, j)].is_zero() {
                continue;
            }
            let c = -(m[(t, j)] * pinv);
            sym_add(&mut m, &mut w, j, t, c);
        }
    }
    let diag = (0..n).map(|i| m[(i, i)]).collect();
    (w, diag)
}

/// A vector `v` over `k` with `sum d_i v_i^2 = target` (`target != 0`),
/// by direct enumeration on at most two coordinates.
fn residue_represent(p: u64, diag: &[Fp], target: Fp) -> Option<Vec<Fp>> {
    debug_assert!(!target.is_zero());
    let n = diag.len();
    for i in 0..n {
        let di = diag[i];
        if di.is_zero() {
            continue;
        }
        for x in 1..p {
            let xs = Fp::new(x, p);
            if di * xs * xs == target {
                let mut v = vec![Fp::new(0, p); n];
                v[i] = xs;
                return Some(v);
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if diag[i].is_zero() || diag[j].is_zero() {
                continue;
            }
            for x in 0..p {
                for y in 0..p {
                    let xs = Fp::new(x, p);
                    let ys = Fp::new(y, p);
                    if diag[i] * xs * xs + diag[j] * ys * ys == target {
                        let mut v = vec![Fp::new(0, p); n];
                        v[i] = xs;
                        v[j] = ys;
                        return Some(v);
                    }
                }
            }
        }
    }
    None
}

/// An isometry between two nonsingular symmetric residue forms, if one
/// exists: `X^T g X = g'`. Equal inputs yield the identity.
pub fn residue_isometry(p: u64, g: &FpMat, g2: &FpMat) -> Option<FpMat> {
    if g.rows() != g2.rows() {
        return None;
    }
    if g == g2 {
        return Some(Matrix::<Fp>::identity(g.rows()).attach_prime(p));
    }
    let (w, d) = symmetric_diagonalize_fp(&g.attach_prime(p));
    let (w2, d2) = symmetric_diagonalize_fp(&g2.attach_prime(p));
    if d.iter().any(|x| x.is_zero()) || d2.iter().any(|x| x.is_zero()) {
        return None;
    }
    let t = diagonal_residue_isometry(p, &d, &d2)?;
    let x = &(&w * &t) * &w2.inverse()?;
    debug_assert_eq!(&(&x.transpose() * g) * &x, *g2);
    Some(x)
}

/// Stepwise represent-and-split between nondegenerate diagonal residue forms.
fn diagonal_residue_isometry(p: u64, d: &[Fp], d2: &[Fp]) -> Option<FpMat> {
    let n = d.len();
    if n == 0 {
        return Some(Matrix::zero(0, 0));
    }
    if n == 1 {
        // d1 x^2 = d2: solvable iff d2/d1 is a square
        for x in 1..p {
            let xs = Fp::new(x, p);
            if d[0] * xs * xs == d2[0] {
                return Some(Matrix::from_rows(vec![vec![xs]]));
            }
        }
        return None;
    }
    let v = residue_represent(p, d, d2[0])?;
    let dm = Matrix::diagonal(d.to_vec());
    let vm = Matrix::from_rows(v.iter().map(|x| vec![*x]).collect());
    // orthogonal complement of v: nullspace of the row vector v^T D
    let row = &vm.transpose() * &dm;
    let ns = row.nullspace();
    debug_assert_eq!(ns.len(), n - 1);
    let mut comp: FpMat = Matrix::zero(n, n - 1);
    for (j, col) in ns.iter().enumerate() {
        for i in 0..n {
            comp[(i, j)] = col[i];
        }
    }
    let sub = &(&comp.transpose() * &dm) * &comp;
    let (wsub, dsub) = symmetric_diagonalize_fp(&sub);
    if dsub.iter().any(|x| x.is_zero()) {
        return None;
    }
    let trest = diagonal_residue_isometry(p, &dsub, &d2[1..])?;
    let rest_cols = &(&comp * &wsub) * &trest;
    let mut out: FpMat = Matrix::zero(n, n);
    for i in 0..n {
        out[(i, 0)] = v[i];
        for j in 0..(n - 1) {
            out[(i, j + 1)] = rest_cols[(i, j)];
        }
    }
    Some(out)
}

/// Newton ("Hensel") lifting of a residue isometry between unimodular forms.
/// Starting from `X0` with `X0^T G X0 = G' mod p`, each step replaces `X`
/// with `X (I + p^m C)`, `C = -1/2 G'^{-1} D` where `X^T G X = G' + p^m D`;
/// the defect valuation at least doubles. Returns the witness reduced mod
/// `p^k` together with the defect valuations after each step.
pub fn lift_isometry_traced(
    g: &GramForm,
    g2: &GramForm,
    x0: &PMat,
    k: u32,
) -> Result<(PMat, Vec<i64>)> {
    if g.prime() != g2.prime() || g.rank() != g2.rank() {
        return Err(Error::Precondition("mismatched lifting inputs".into()));
    }
    if !g.is_unimodular() || !g2.is_unimodular() {
        return Err(Error::Precondition("lift_isometry needs unimodular forms".into()));
    }
    let p = g.prime();
    let x0 = x0.attach_prime(p);
    if x0.rows() != g.rank() || !x0.is_integral() {
        return Err(Error::BadSeed);
    }
    let defect = |x: &PMat| -> PMat { &g.apply(x) - g2.gram() };

    let mut x = x0;
    let mut trace = Vec::new();
    let ginv2 = g2.gram().inverse().ok_or(Error::SingularForm)?;
    let half = PLocal::from_ratio(-1, 2, p);
    let mut guard = 0;
    loop {
        let diff = defect(&x);
        match diff.min_valuation() {
            Valuation::Infinite => break,
            Valuation::Finite(m) if m >= k as i64 => break,
            Valuation::Finite(m) if m < 1 => return Err(Error::BadSeed),
            Valuation::Finite(m) => {
                let d = diff.scale(&PLocal::p_power(-m, p));
                let c = (&ginv2 * &d).scale(&half);
                let step =
                    &Matrix::identity(x.rows()).attach_prime(p) + &c.scale(&PLocal::p_power(m, p));
                x = &x * &step;
                let nv = defect(&x).min_valuation();
                if let Valuation::Finite(nm) = nv {
                    assert!(nm >= 2 * m, "defect valuation must at least double");
                    trace.push(nm);
                } else {
                    trace.push(2 * k as i64);
                }
            }
        }
        guard += 1;
        if guard > 64 {
            return Err(Error::RetriesExhausted(
                "newton iteration did not converge".into(),
            ));
        }
    }
    let reduced = x.reduce_mod_pk(k)?;
    Ok((reduced, trace))
}

/// See [`lift_isometry_traced`].
pub fn lift_isometry(g: &GramForm, g2: &GramForm, x0: &PMat, k: u32) -> Result<PMat> {
    lift_isometry_traced(g, g2, x0, k).map(|(x, _)| x)
}

/// Constructs an integral witness `X` with `X^T gram(f) X = gram(f') mod p^k`
/// for a pair already decided isometric: split both forms, match constituents
/// by scale, lift a residue isometry per constituent, and assemble through
/// the two Jordan witnesses.
pub fn build_isometry_witness(f: &GramForm, f2: &GramForm, k: u32) -> Result<PMat> {
    if !isometric_integral_nearly_unimodular(f, f2)? {
        return Err(Error::NotDecidedIsometric);
    }
    let p = f.prime();
    let s1 = jordan_split(f)?;
    let s2 = jordan_split(f2)?;
    if s1.constituents.len() != s2.constituents.len() {
        return Err(Error::Precondition("jordan shapes disagree".into()));
    }
    let mut blocks = Vec::new();
    for (c1, c2) in s1.constituents.iter().zip(&s2.constituents) {
        if c1.scale != c2.scale || c1.form.rank() != c2.form.rank() {
            return Err(Error::Precondition("jordan shapes disagree".into()));
        }
        let r1 = c1.form.gram().residue()?;
        let r2 = c2.form.gram().residue()?;
        let seed = residue_isometry(p, &r1, &r2).ok_or(Error::BadSeed)?;
        let (xi, _) = lift_isometry_traced(&c1.form, &c2.form, &seed.lift(p), k)?;
        blocks.push(xi);
    }
    let inner = Matrix::block_diag(&blocks);
    let w2_inv = s2
        .witness
        .inverse()
        .ok_or(Error::SingularForm)?;
    let x = &(&s1.witness * &inner) * &w2_inv;
    debug_assert!(x.is_r_invertible());
    debug_assert!(f
        .apply(&x)
        .congruent_mod_pk(f2.gram(), k));
    x.reduce_mod_pk(k)
}

/// Lists the integral classes of nearly unimodular forms in a rational
/// class, as Jordan labels: enumerate the unimodular-plus-`p`-scaled shapes,
/// filter by the rational invariants, and deduplicate by the oracle.
pub fn count_nearly_unimodular_classes(c: &RationalClass) -> Result<Vec<Vec<JordanLabel>>> {
    if c.rank == 0 {
        return Err(Error::Precondition("rank must be at least 1".into()));
    }
    let p = c.prime;
    let q = nonresidue(p) as i64;
    let mut out: Vec<Vec<JordanLabel>> = Vec::new();
    for r0 in 0..=c.rank {
        let r1 = c.rank - r0;
        let u0s: &[i64] = if r0 == 0 { &[1] } else { &[1, 2] };
        let u1s: &[i64] = if r1 == 0 { &[1] } else { &[1, 2] };
        for &c0 in u0s {
            for &c1 in u1s {
                let mut entries = Vec::new();
                for i in 0..r0 {
                    let u = if i + 1 == r0 && c0 == 2 { q } else { 1 };
                    entries.push(u);
                }
                for i in 0..r1 {
                    let u = if i + 1 == r1 && c1 == 2 { q } else { 1 };
                    entries.push(u * p as i64);
                }
                let form = GramForm::diagonal(p, &entries)?;
                if rational_class(&form)? == *c {
                    let label = jordan_invariant_oracle(&form)?;
                    if !out.contains(&label) {
                        out.push(label);
                    }
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

// ---------------------------------------------------------------------------
// random generators for campaigns
// ---------------------------------------------------------------------------

/// A random unit of `R` with small numerator and denominator.
pub fn random_unit(rng: &mut impl Rng, p: u64) -> PLocal {
    loop {
        let n = rng.gen_range(-9i64..=9);
        let d = rng.gen_range(1i64..=9);
        if n != 0 && n % p as i64 != 0 && d % p as i64 != 0 {
            return PLocal::from_ratio(n, d, p);
        }
    }
}

/// A random matrix in `GL_n(R)`: unit lower and upper triangular factors,
/// unit column scalings and a column permutation.
pub fn random_gl_r(rng: &mut impl Rng, p: u64, n: usize) -> PMat {
    let mut lower: PMat = Matrix::identity(n).attach_prime(p);
    let mut upper: PMat = Matrix::identity(n).attach_prime(p);
    for i in 0..n {
        for j in 0..i {
            lower[(i, j)] = PLocal::from_int(rng.gen_range(-4i64..=4), p);
            upper[(j, i)] = PLocal::from_int(rng.gen_range(-4i64..=4), p);
        }
    }
    let mut prod = &lower * &upper;
    let mut perm_idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm_idx.swap(i, j);
    }
    let mut out: PMat = Matrix::zero(n, n).attach_prime(p);
    for (new, &old) in perm_idx.iter().enumerate() {
        let unit = random_unit(rng, p);
        for i in 0..n {
            let cur = std::mem::replace(&mut prod[(i, old)], num_traits::Zero::zero());
            out[(i, new)] = cur * unit.clone();
        }
    }
    out
}

/// A random nearly unimodular form of the given rank: a diagonal of units
/// and `p`-scaled units, transformed by a random element of `GL_n(R)`.
pub fn random_nearly_unimodular(rng: &mut impl Rng, p: u64, rank: usize) -> GramForm {
    let entries: Vec<i64> = (0..rank)
        .map(|_| {
            let u = loop {
                let c = rng.gen_range(-6i64..=6);
                if c != 0 && c % p as i64 != 0 {
                    break c;
                }
            };
            if rng.gen_bool(0.5) {
                u * p as i64
            } else {
                u
            }
        })
        .collect();
    let base = GramForm::diagonal(p, &entries).expect("valid diagonal");
    let x = random_gl_r(rng, p, rank);
    GramForm::new(p, 1, base.apply(&x)).expect("congruence of a form is a form")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::pmat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(p: u64, entries: &[i64]) -> GramForm {
        GramForm::diagonal(p, entries).unwrap()
    }

    #[test]
    fn coradical_examples() {
        assert_eq!(diag(3, &[1, 9]).coradical().exponents(), &[2]);
        assert_eq!(diag(3, &[1, 3, -3]).coradical().exponents(), &[1, 1]);
        let id = diag(3, &[1, 1, 1, 1]);
        assert!(id.coradical().is_trivial());
    }

    #[test]
    fn nearly_unimodular_examples() {
        assert!(diag(3, &[1, 3, -3]).is_nearly_unimodular());
        assert!(!diag(3, &[1, 9]).is_nearly_unimodular());
        assert!(!diag(3, &[2, 18]).is_nearly_unimodular());
        // nonsingularity comes along
        assert!(!diag(3, &[1, 9]).gram().det().is_zero());
    }

    #[test]
    fn jordan_split_examples() {
        let s = jordan_split(&diag(3, &[1, 3, -3])).unwrap();
        assert_eq!(s.constituents.len(), 2);
        assert_eq!(s.constituents[0].scale, 0);
        assert_eq!(s.constituents[0].form.rank(), 1);
        assert_eq!(s.constituents[1].scale, 1);
        assert_eq!(s.constituents[1].form.rank(), 2);

        // det 8 is a unit, single scale-0 block
        let f = GramForm::new(3, 1, pmat(3, &[&[3, 1], &[1, 3]])).unwrap();
        let s = jordan_split(&f).unwrap();
        assert_eq!(s.constituents.len(), 1);
        assert_eq!(s.constituents[0].scale, 0);
        assert_eq!(s.constituents[0].form.rank(), 2);

        let s = jordan_split(&diag(3, &[1, 1, -1])).unwrap();
        assert_eq!(s.constituents.len(), 1);
        assert_eq!(s.constituents[0].scale, 0);

        assert!(matches!(
            jordan_split(&diag(3, &[1, 0])),
            Err(Error::SingularForm)
        ));
    }

    /// The witness verifies exactly: W^T G W equals the assembled block
    /// diagonal, W invertible over R, scales strictly increasing.
    #[test]
    fn jordan_split_witness_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let p = *[3u64, 5, 7].get(rng.gen_range(0..3)).unwrap();
            let rank = rng.gen_range(1..=5);
            let f = random_nonsingular_form(&mut rng, p, rank);
            let s = jordan_split(&f).unwrap();
            assert!(s.witness.is_r_invertible());
            let mut blocks = Vec::new();
            for c in &s.constituents {
                blocks.push(c.form.gram().scale(&PLocal::p_power(c.scale, p)));
                assert!(c.form.is_unimodular());
            }
            for w in s.constituents.windows(2) {
                assert!(w[0].scale < w[1].scale);
            }
            assert_eq!(f.apply(&s.witness), Matrix::block_diag(&blocks));
        }
    }

    fn random_nonsingular_form(rng: &mut ChaCha8Rng, p: u64, rank: usize) -> GramForm {
        loop {
            let m = Matrix::from_fn(rank, rank, |_, _| {
                PLocal::from_int(rng.gen_range(-9i64..=9), p)
            });
            let sym = &m + &m.transpose();
            if sym.det().is_zero() {
                continue;
            }
            return GramForm::new(p, 1, sym).unwrap();
        }
    }

    #[test]
    fn rational_class_examples() {
        // <1,9> and <2,18> agree over Q_3
        assert!(isometric_rational(&diag(3, &[1, 9]), &diag(3, &[2, 18])).unwrap());
        // <1,1,-1> and <1,3,-3> agree over Q_3
        assert!(isometric_rational(&diag(3, &[1, 1, -1]), &diag(3, &[1, 3, -3])).unwrap());
        // Hasse separates <-1,-3> from <1,3>
        let a = PLocal::from_int(-1, 3);
        let b = PLocal::from_int(-3, 3);
        assert_eq!(hilbert_symbol(&a, &b).unwrap(), -1);
        assert_eq!(
            hilbert_symbol(&PLocal::from_int(1, 3), &PLocal::from_int(3, 3)).unwrap(),
            1
        );
        assert!(!isometric_rational(&diag(3, &[-1, -3]), &diag(3, &[1, 3])).unwrap());
    }

    #[test]
    fn integral_decision_examples() {
        // nearly unimodular, rationally isometric, integrally distinct
        assert!(!isometric_integral_nearly_unimodular(
            &diag(3, &[1, 1, -1]),
            &diag(3, &[1, 3, -3])
        )
        .unwrap());
        assert!(isometric_integral_nearly_unimodular(&diag(3, &[1, 3]), &diag(3, &[3, 1])).unwrap());
        assert!(
            !isometric_integral_nearly_unimodular(&diag(3, &[1, 3]), &diag(3, &[-1, -3])).unwrap()
        );
        // refusal outside the nearly unimodular domain
        assert!(matches!(
            isometric_integral_nearly_unimodular(&diag(3, &[1, 9]), &diag(3, &[2, 18])),
            Err(Error::NotNearlyUnimodular)
        ));
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(
            jordan_invariant_oracle(&diag(3, &[1, 3, -3])).unwrap(),
            vec![(0, 1, 1), (1, 2, -1)]
        );
        assert_eq!(
            jordan_invariant_oracle(&diag(3, &[1, 1, -1])).unwrap(),
            vec![(0, 3, -1)]
        );
        for n in 1..=4 {
            let id = GramForm::diagonal(5, &vec![1; n]).unwrap();
            assert_eq!(jordan_invariant_oracle(&id).unwrap(), vec![(0, n, 1)]);
        }
    }

    #[test]
    fn one_directional_soundness() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let p = *[3u64, 5].get(rng.gen_range(0..2)).unwrap();
            let rank = rng.gen_range(1..=4);
            let f = random_nearly_unimodular(&mut rng, p, rank);
            let x = random_gl_r(&mut rng, p, rank);
            let g = GramForm::new(p, 1, f.apply(&x)).unwrap();
            assert!(isometric_rational(&f, &g).unwrap());
            assert!(isometric_integral_nearly_unimodular(&f, &g).unwrap());
            assert_eq!(
                jordan_invariant_oracle(&f).unwrap(),
                jordan_invariant_oracle(&g).unwrap()
            );
        }
    }

    #[test]
    fn coradical_congruence_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..60 {
            let p = *[3u64, 5, 7].get(rng.gen_range(0..3)).unwrap();
            let rank = rng.gen_range(1..=4);
            let f = random_nonsingular_form(&mut rng, p, rank);
            let x = random_gl_r(&mut rng, p, rank);
            let g = GramForm::new(p, 1, f.apply(&x)).unwrap();
            assert_eq!(f.coradical(), g.coradical());
        }
    }

    #[test]
    fn cancellation_at_invariant_level() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..60 {
            let p = *[3u64, 5].get(rng.gen_range(0..2)).unwrap();
            let rf = rng.gen_range(1..=3);
            let rh = rng.gen_range(1..=3);
            let f = random_nonsingular_form(&mut rng, p, rf);
            let h = random_nonsingular_form(&mut rng, p, rh);
            let cf = rational_class(&f).unwrap();
            let ch = rational_class(&h).unwrap();
            // the invariant arithmetic matches the matrix-level sum
            let sum_gram = Matrix::block_diag(&[f.gram().clone(), h.gram().clone()]);
            let sum = rational_class(&GramForm::new(p, 1, sum_gram).unwrap()).unwrap();
            assert_eq!(class_orthogonal_sum(&cf, &ch).unwrap(), sum);
            // and cancels back
            assert_eq!(class_cancel(&sum, &ch).unwrap(), cf);
        }
    }

    #[test]
    fn hyperbolic_examples() {
        let h = GramForm::hyperbolic(3, 1, 1).unwrap();
        assert_eq!(h.gram(), &pmat(3, &[&[0, 1], &[1, 0]]));

        // <1,-1> is hyperbolic with the explicit half-integral witness
        let w = Matrix::from_rows(vec![
            vec![PLocal::from_ratio(1, 2, 3), PLocal::from_int(1, 3)],
            vec![PLocal::from_ratio(1, 2, 3), PLocal::from_int(-1, 3)],
        ]);
        let f = diag(3, &[1, -1]);
        assert_eq!(f.apply(&w), *h.gram());
        assert!(w.is_r_invertible());
        assert!(isometric_integral_nearly_unimodular(&f, &h).unwrap());
    }

    #[test]
    fn alternating_forms_reduce_by_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let p = 3;
        let std4 = GramForm::hyperbolic(p, 2, -1).unwrap();
        for _ in 0..20 {
            // two random unimodular alternating forms of rank 4 are congruent
            let x = random_gl_r(&mut rng, p, 4);
            let y = random_gl_r(&mut rng, p, 4);
            let f = GramForm::new(p, -1, std4.apply(&x)).unwrap();
            let g = GramForm::new(p, -1, std4.apply(&y)).unwrap();
            let (sf, wf) = symplectic_reduce(&f).unwrap();
            let (sg, wg) = symplectic_reduce(&g).unwrap();
            assert_eq!(sf, vec![0, 0]);
            assert_eq!(sg, vec![0, 0]);
            assert_eq!(f.apply(&wf), *std4.gram());
            assert!(wf.is_r_invertible());
            // composed witness takes f to g exactly
            let t = &wf * &wg.inverse().unwrap();
            assert_eq!(f.apply(&t), *g.gram());
        }
        // scales are detected for non-unimodular alternating forms
        let scaled = GramForm::new(
            p,
            -1,
            Matrix::block_diag(&[
                GramForm::hyperbolic(p, 1, -1).unwrap().gram().clone(),
                GramForm::hyperbolic(p, 1, -1)
                    .unwrap()
                    .gram()
                    .scale(&PLocal::from_int(3, p)),
            ]),
        )
        .unwrap();
        let (s, w) = symplectic_reduce(&scaled).unwrap();
        assert_eq!(s, vec![0, 1]);
        assert!(w.is_r_invertible());
    }

    #[test]
    fn lift_isometry_examples() {
        // identity case
        let id = GramForm::diagonal(5, &[1, 1]).unwrap();
        let (x, trace) =
            lift_isometry_traced(&id, &id, &Matrix::identity(2).attach_prime(5), 8).unwrap();
        assert_eq!(x, Matrix::identity(2).attach_prime(5));
        assert!(trace.is_empty());

        // seed by residue enumeration, then Newton to 5^8
        let g = GramForm::diagonal(5, &[1, 1]).unwrap();
        let g2 = GramForm::diagonal(5, &[2, 2]).unwrap();
        let seed = residue_isometry(5, &g.gram().residue().unwrap(), &g2.gram().residue().unwrap())
            .expect("residue classes match");
        let (x, trace) = lift_isometry_traced(&g, &g2, &seed.lift(5), 8).unwrap();
        assert!(g.apply(&x).congruent_mod_pk(g2.gram(), 8));
        assert!(trace.len() <= 4);
        // defect valuations at least double along the trace
        let mut prev = 1i64;
        for &v in &trace {
            assert!(v >= 2 * prev);
            prev = v;
        }

        // exact witness short-circuits: D = 0 at the seed
        let f = GramForm::diagonal(3, &[1, -1]).unwrap();
        let h = GramForm::hyperbolic(3, 1, 1).unwrap();
        let w = Matrix::from_rows(vec![
            vec![PLocal::from_ratio(1, 2, 3), PLocal::from_int(1, 3)],
            vec![PLocal::from_ratio(1, 2, 3), PLocal::from_int(-1, 3)],
        ]);
        let (x, trace) = lift_isometry_traced(&f, &h, &w, 8).unwrap();
        assert!(trace.is_empty());
        assert!(f.apply(&x).congruent_mod_pk(h.gram(), 8));

        // a non-isometry seed is rejected
        let bad = pmat(5, &[&[1, 0], &[0, 2]]);
        assert!(matches!(
            lift_isometry_traced(&g, &g2, &bad, 8),
            Err(Error::BadSeed)
        ));
    }

    #[test]
    fn witness_builder_examples() {
        // f = f' gives the identity
        let f = diag(3, &[1, 3]);
        let x = build_isometry_witness(&f, &f, 8).unwrap();
        assert_eq!(x, Matrix::identity(2).attach_prime(3));

        // permutation pair gives the permutation
        let g = diag(3, &[3, 1]);
        let x = build_isometry_witness(&f, &g, 8).unwrap();
        assert_eq!(x, pmat(3, &[&[0, 1], &[1, 0]]));

        // the Q_3-only congruence <1,9> -> <2,18> is refused...
        let a = diag(3, &[1, 9]);
        let b = diag(3, &[2, 18]);
        assert!(matches!(
            build_isometry_witness(&a, &b, 8),
            Err(Error::NotNearlyUnimodular)
        ));
        // ...while its explicit rational witness checks exactly and is not in GL_2(R)
        let t = Matrix::from_rows(vec![
            vec![PLocal::from_int(1, 3), PLocal::from_int(3, 3)],
            vec![PLocal::from_ratio(1, 3, 3), PLocal::from_int(-1, 3)],
        ]);
        assert_eq!(a.apply(&t), *b.gram());
        assert!(!t.is_integral());
    }

    #[test]
    fn witness_builder_campaign() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..25 {
            let p = *[3u64, 5].get(rng.gen_range(0..2)).unwrap();
            let rank = rng.gen_range(1..=4);
            let f = random_nearly_unimodular(&mut rng, p, rank);
            let x = random_gl_r(&mut rng, p, rank);
            let g = GramForm::new(p, 1, f.apply(&x)).unwrap();
            let w = build_isometry_witness(&f, &g, 6).unwrap();
            assert!(w.is_r_invertible());
            assert!(f.apply(&w).congruent_mod_pk(g.gram(), 6));
        }
    }

    #[test]
    fn class_counting_examples() {
        // the class of <1,1,-1> lifts to at least the two classes of Rm-type
        let c = rational_class(&diag(3, &[1, 1, -1])).unwrap();
        let list = count_nearly_unimodular_classes(&c).unwrap();
        let a = jordan_invariant_oracle(&diag(3, &[1, 1, -1])).unwrap();
        let b = jordan_invariant_oracle(&diag(3, &[1, 3, -3])).unwrap();
        assert!(list.contains(&a));
        assert!(list.contains(&b));
        assert!(list.len() >= 2);

        // a rank-1 unit class has exactly one lift
        let c1 = rational_class(&diag(3, &[2])).unwrap();
        assert_eq!(count_nearly_unimodular_classes(&c1).unwrap().len(), 1);
    }

    /// Independent enumeration oracle for the class list: scan all diagonal
    /// forms with entries among unit representatives and `p`-scaled unit
    /// representatives, filter by rational class, and collect Jordan labels.
    #[test]
    fn class_counting_matches_brute_force() {
        for p in [3u64, 5] {
            let q = nonresidue(p) as i64;
            let reps: Vec<i64> = vec![1, q, p as i64, q * p as i64];
            let c = rational_class(&GramForm::diagonal(p, &[1, p as i64]).unwrap()).unwrap();
            let mut expected: Vec<Vec<JordanLabel>> = Vec::new();
            for &a in &reps {
                for &b in &reps {
                    let f = GramForm::diagonal(p, &[a, b]).unwrap();
                    if rational_class(&f).unwrap() == c {
                        let lbl = jordan_invariant_oracle(&f).unwrap();
                        if !expected.contains(&lbl) {
                            expected.push(lbl);
                        }
                    }
                }
            }
            expected.sort();
            assert_eq!(count_nearly_unimodular_classes(&c).unwrap(), expected);
        }
    }
}

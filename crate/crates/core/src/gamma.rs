//! Forms with a finite group action over `R = Z_(p)` with `|Gamma|`
//! invertible: the group-ring involution and trace, the hermitianization
//! dictionary, coradicals with their residue action, and the isometry
//! decision for split abelian groups.
//!
//! Conventions: a lattice stores a matrix homomorphism `rho` (checked
//! against the multiplication table) and the right action is
//! `x . g = rho(g^-1) x`, so invariance reads
//! `rho(g)^T gram rho(g) = gram`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{rational_class_of_matrix, CoradicalProfile, RationalClass};
use crate::matrix::Matrix;
use crate::plocal::{check_odd_prime, Fp, PLocal, Valuation};
use crate::{FpMat, PMat};

/// A finite group given by its multiplication table (`table[a][b] = a b`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    identity: usize,
}

impl FiniteGroup {
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        let bad = || Error::Precondition("multiplication table is not a group".into());
        if n == 0 || table.iter().any(|r| r.len() != n) {
            return Err(bad());
        }
        if table
            .iter()
            .flatten()
            .any(|&x| x >= n)
        {
            return Err(bad());
        }
        // identity
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(bad)?;
        // associativity
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(bad());
                    }
                }
            }
        }
        // inverses
        let mut inverse = vec![0; n];
        for a in 0..n {
            inverse[a] = (0..n)
                .find(|&b| table[a][b] == identity && table[b][a] == identity)
                .ok_or_else(bad)?;
        }
        Ok(FiniteGroup {
            table,
            inverse,
            identity,
        })
    }

    pub fn cyclic(n: usize) -> Self {
        let table = (0..n)
            .map(|a| (0..n).map(|b| (a + b) % n).collect())
            .collect();
        FiniteGroup::from_table(table).expect("cyclic table is a group")
    }

    /// The symmetric group on three letters, elements indexed by the six
    /// permutations of `(0, 1, 2)` in lexicographic order.
    pub fn symmetric3() -> Self {
        let perms: Vec<[usize; 3]> = vec![
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let index = |p: &[usize; 3]| perms.iter().position(|q| q == p).unwrap();
        let table = perms
            .iter()
            .map(|a| {
                perms
                    .iter()
                    .map(|b| {
                        // (a b)(x) = a(b(x))
                        let comp = [a[b[0]], a[b[1]], a[b[2]]];
                        index(&comp)
                    })
                    .collect()
            })
            .collect();
        FiniteGroup::from_table(table).expect("s3 table is a group")
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn exponent(&self) -> usize {
        (0..self.order())
            .map(|a| self.element_order(a))
            .fold(1, num_integer::lcm)
    }
}

/// An element of the group ring `R Gamma`, as a dense coefficient vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupRingElem {
    pub coeffs: Vec<PLocal>,
}

impl GroupRingElem {
    pub fn zero(group: &FiniteGroup, p: u64) -> Self {
        GroupRingElem {
            coeffs: vec![PLocal::from_int(0, p); group.order()],
        }
    }

    pub fn basis(group: &FiniteGroup, p: u64, g: usize) -> Self {
        let mut e = GroupRingElem::zero(group, p);
        e.coeffs[g] = PLocal::from_int(1, p);
        e
    }

    pub fn add(&self, other: &GroupRingElem) -> GroupRingElem {
        GroupRingElem {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn mul(&self, other: &GroupRingElem, group: &FiniteGroup) -> GroupRingElem {
        let mut out = vec![PLocal::zero(); group.order()];
        for (a, ca) in self.coeffs.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (b, cb) in other.coeffs.iter().enumerate() {
                if cb.is_zero() {
                    continue;
                }
                let idx = group.mul(a, b);
                out[idx] = out[idx].clone() + ca * cb;
            }
        }
        GroupRingElem { coeffs: out }
    }
}

/// The group-ring involution: `g -> g^-1` on coefficients.
pub fn sigma(group: &FiniteGroup, x: &GroupRingElem) -> GroupRingElem {
    let mut out = vec![PLocal::zero(); group.order()];
    for (g, c) in x.coeffs.iter().enumerate() {
        out[group.inv(g)] = c.clone();
    }
    GroupRingElem { coeffs: out }
}

/// The trace functional: the coefficient of the identity.
pub fn trace_t(group: &FiniteGroup, x: &GroupRingElem) -> PLocal {
    x.coeffs[group.identity()].clone()
}

/// A free `R`-lattice with a `Gamma`-action and an invariant symmetric
/// Gram matrix.
#[derive(Clone, Debug)]
pub struct GammaLattice {
    prime: u64,
    group: FiniteGroup,
    action: Vec<PMat>,
    gram: PMat,
}

impl GammaLattice {
    pub fn new(prime: u64, group: FiniteGroup, action: Vec<PMat>, gram: PMat) -> Result<Self> {
        check_odd_prime(prime)?;
        if group.order() as u64 % prime == 0 {
            return Err(Error::Precondition("|Gamma| must be a unit in R".into()));
        }
        if action.len() != group.order() {
            return Err(Error::Precondition("one action matrix per group element".into()));
        }
        let gram = gram.attach_prime(prime);
        let n = gram.rows();
        if !gram.is_square() || gram.transpose() != gram {
            return Err(Error::Precondition("gram must be symmetric".into()));
        }
        let action: Vec<PMat> = action.iter().map(|m| m.attach_prime(prime)).collect();
        for (g, m) in action.iter().enumerate() {
            if m.rows() != n || m.cols() != n {
                return Err(Error::SizeMismatch("action matrix shape".into()));
            }
            if !m.is_r_invertible() {
                return Err(Error::Precondition("action matrices must lie in GL_n(R)".into()));
            }
            // invariance: rho(g)^T gram rho(g) = gram
            if &(&m.transpose() * &gram) * m != gram {
                return Err(Error::Precondition(format!(
                    "gram is not invariant under the action of element {g}"
                )));
            }
        }
        // homomorphism against the table
        for a in 0..group.order() {
            for b in 0..group.order() {
                if &action[a] * &action[b] != action[group.mul(a, b)] {
                    return Err(Error::Precondition("action is not a homomorphism".into()));
                }
            }
        }
        if action[group.identity()] != Matrix::identity(n).attach_prime(prime) {
            return Err(Error::Precondition("identity must act trivially".into()));
        }
        Ok(GammaLattice {
            prime,
            group,
            action,
            gram,
        })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &PMat {
        &self.gram
    }

    pub fn rho(&self, g: usize) -> &PMat {
        &self.action[g]
    }

    /// Matrix of the right action of `g`: `x . g = rho(g^-1) x`.
    pub fn right_action(&self, g: usize) -> &PMat {
        &self.action[self.group.inv(g)]
    }

    pub fn is_unimodular(&self) -> bool {
        self.gram.det().is_unit()
    }

    pub fn coradical_profile(&self) -> CoradicalProfile {
        CoradicalProfile::from_profile(&self.gram.smith_normal_form().profile())
    }

    pub fn is_nearly_unimodular(&self) -> bool {
        let c = self.coradical_profile();
        c.rank_defect() == 0 && c.exponents().iter().all(|&e| e <= 1)
    }
}

/// The hermitianized form: per pair of basis indices, the group-ring value
/// `hhat(x, y) = sum_g h(x . g, y) g`.
#[derive(Clone, Debug)]
pub struct Hermitianization {
    /// coefficient matrices: `mats[g] = rho(g^-1)^T gram`
    mats: Vec<PMat>,
}

pub fn hermitianize(l: &GammaLattice) -> Hermitianization {
    let mats = (0..l.group.order())
        .map(|g| &l.right_action(g).transpose() * &l.gram)
        .collect();
    Hermitianization { mats }
}

impl Hermitianization {
    /// `hhat(e_i, e_j)` as a group-ring element.
    pub fn pair(&self, i: usize, j: usize) -> GroupRingElem {
        GroupRingElem {
            coeffs: self.mats.iter().map(|m| m[(i, j)].clone()).collect(),
        }
    }

    /// `hhat(v, w)` for arbitrary vectors.
    pub fn apply(&self, v: &PMat, w: &PMat) -> GroupRingElem {
        GroupRingElem {
            coeffs: self
                .mats
                .iter()
                .map(|m| {
                    let r = &(&v.transpose() * m) * w;
                    r[(0, 0)].clone()
                })
                .collect(),
        }
    }
}

/// A `k`-module with a `Gamma`-action, e.g. the coradical of a nearly
/// unimodular lattice.
#[derive(Clone, Debug)]
pub struct ResidueModule {
    pub prime: u64,
    pub dim: usize,
    /// right-action matrices, one per group element
    pub action: Vec<FpMat>,
}

/// Coradical of a nearly unimodular lattice together with the residue
/// action of the group on it.
pub fn corad_with_action(l: &GammaLattice) -> Result<(CoradicalProfile, ResidueModule)> {
    if !l.is_nearly_unimodular() {
        return Err(Error::NotNearlyUnimodular);
    }
    let snf = l.gram.smith_normal_form();
    let profile = snf.profile();
    let torsion: Vec<usize> = (0..l.rank())
        .filter(|&i| snf.d[(i, i)].valuation() == Valuation::Finite(1))
        .collect();
    let mut action = Vec::with_capacity(l.group.order());
    for g in 0..l.group.order() {
        // the dual right action of g on coker coordinates is rho(g)^T;
        // transported along U it becomes U rho(g)^T U^-1
        let full = &(&snf.u * &l.rho(g).transpose()) * &snf.u_inv;
        let sub = full.submatrix(&torsion, &torsion);
        action.push(sub.residue()?);
    }
    Ok((
        CoradicalProfile::from_profile(&profile),
        ResidueModule {
            prime: l.prime,
            dim: torsion.len(),
            action,
        },
    ))
}

/// Solves for the space of equivariant maps `X` with
/// `X A_g = B_g X` for all `g`, over `k`; returns a basis of solutions.
fn equivariant_hom_basis(m: &ResidueModule, n: &ResidueModule) -> Vec<FpMat> {
    let p = m.prime;
    let (dm, dn) = (m.dim, n.dim);
    if dm == 0 || dn == 0 {
        return Vec::new();
    }
    let unknowns = dn * dm;
    let rows = m.action.len() * dn * dm;
    let mut sys: FpMat = Matrix::zero(rows, unknowns).attach_prime(p);
    let mut row = 0;
    for g in 0..m.action.len() {
        let a = &m.action[g];
        let b = &n.action[g];
        for i in 0..dn {
            for j in 0..dm {
                // (X A - B X)[i, j] = sum_k X[i,k] A[k,j] - sum_k B[i,k] X[k,j]
                for k in 0..dm {
                    let idx = i * dm + k;
                    let cur = sys[(row, idx)];
                    sys[(row, idx)] = cur + a[(k, j)];
                }
                for k in 0..dn {
                    let idx = k * dm + j;
                    let cur = sys[(row, idx)];
                    sys[(row, idx)] = cur - b[(i, k)];
                }
                row += 1;
            }
        }
    }
    sys.nullspace()
        .into_iter()
        .map(|v| {
            Matrix::from_fn(dn, dm, |i, j| v[i * dm + j]).attach_prime(p)
        })
        .collect()
}

/// Decides `k Gamma`-module isomorphism by searching the equivariant Hom
/// space for an invertible element: exhaustively when the space is small,
/// randomized with a dimension-count fallback otherwise.
pub fn kgamma_iso_test(m: &ResidueModule, n: &ResidueModule, seed: u64) -> bool {
    if m.prime != n.prime || m.action.len() != n.action.len() {
        return false;
    }
    if m.dim != n.dim {
        return false;
    }
    if m.dim == 0 {
        return true;
    }
    let p = m.prime;
    let hom = equivariant_hom_basis(m, n);
    if hom.is_empty() {
        return false;
    }
    let dim_hom = hom.len();
    let space_size = (p as f64).powi(dim_hom as i32);
    if space_size <= 10_000.0 {
        // deterministic exhaustive search
        let mut coef = vec![0u64; dim_hom];
        loop {
            let mut x: FpMat = Matrix::zero(m.dim, m.dim).attach_prime(p);
            for (c, b) in coef.iter().zip(&hom) {
                if *c != 0 {
                    x = &x + &b.map(|e| *e * Fp::new(*c, p));
                }
            }
            if !x.inverse().is_none() {
                return true;
            }
            let mut carry = true;
            for c in coef.iter_mut() {
                if *c + 1 < p {
                    *c += 1;
                    carry = false;
                    break;
                }
                *c = 0;
            }
            if carry {
                return false;
            }
        }
    }
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..500 {
        let mut x: FpMat = Matrix::zero(m.dim, m.dim).attach_prime(p);
        for b in &hom {
            let c = Fp::new(rng.gen_range(0..p), p);
            x = &x + &b.map(|e| *e * c);
        }
        if x.inverse().is_some() {
            return true;
        }
    }
    // semisimple fallback: M = N iff dim Hom(M,N)^2 = dim End(M) dim End(N)
    let end_m = equivariant_hom_basis(m, m).len();
    let end_n = equivariant_hom_basis(n, n).len();
    dim_hom * dim_hom == end_m * end_n
}

/// All characters `Gamma -> k^x` of a finite abelian group whose exponent
/// divides `p - 1`, as value vectors mod `p`. Errors when the group does
/// not split this way.
pub fn characters_mod_p(group: &FiniteGroup, p: u64) -> Result<Vec<Vec<u64>>> {
    check_odd_prime(p)?;
    if !group.is_abelian() {
        return Err(Error::Precondition("character theory needs an abelian group".into()));
    }
    if (p - 1) % group.exponent() as u64 != 0 {
        return Err(Error::Precondition(format!(
            "exponent {} does not divide p - 1 = {}",
            group.exponent(),
            p - 1
        )));
    }
    let n = group.order();
    // greedy generating set
    let mut generators: Vec<usize> = Vec::new();
    let mut span = vec![false; n];
    span[group.identity()] = true;
    let mut span_list = vec![group.identity()];
    for g in 0..n {
        if span[g] {
            continue;
        }
        generators.push(g);
        // close the span
        loop {
            let mut added = false;
            let snapshot = span_list.clone();
            for &a in &snapshot {
                for &b in [g].iter().chain(generators.iter()) {
                    let ab = group.mul(a, b);
                    if !span[ab] {
                        span[ab] = true;
                        span_list.push(ab);
                        added = true;
                    }
                }
            }
            if !added {
                break;
            }
        }
    }
    // candidate values per generator: solutions of x^ord = 1 in k^x
    let mut out: Vec<Vec<u64>> = Vec::new();
    let mut assignment = vec![0usize; generators.len()];
    let candidates: Vec<Vec<u64>> = generators
        .iter()
        .map(|&g| {
            let d = group.element_order(g) as u64;
            (1..p)
                .filter(|&x| crate::plocal::pow_mod(x, d, p) == 1)
                .collect()
        })
        .collect();
    loop {
        // try to extend the assignment to a character by closure
        let mut chi: Vec<Option<u64>> = vec![None; n];
        chi[group.identity()] = Some(1);
        for (gi, &g) in generators.iter().enumerate() {
            chi[g] = Some(candidates[gi][assignment[gi]]);
        }
        let mut consistent = true;
        'closure: loop {
            let mut progress = false;
            for a in 0..n {
                let Some(ca) = chi[a] else { continue };
                for b in 0..n {
                    let Some(cb) = chi[b] else { continue };
                    let ab = group.mul(a, b);
                    let v = ca * cb % p;
                    match chi[ab] {
                        None => {
                            chi[ab] = Some(v);
                            progress = true;
                        }
                        Some(existing) => {
                            if existing != v {
                                consistent = false;
                                break 'closure;
                            }
                        }
                    }
                }
            }
            if !progress {
                break;
            }
        }
        if consistent && chi.iter().all(|c| c.is_some()) {
            let vec: Vec<u64> = chi.into_iter().map(|c| c.unwrap()).collect();
            if !out.contains(&vec) {
                out.push(vec);
            }
        }
        // advance the assignment
        let mut carry = true;
        for (slot, cands) in assignment.iter_mut().zip(&candidates) {
            if *slot + 1 < cands.len() {
                *slot += 1;
                carry = false;
                break;
            }
            *slot = 0;
        }
        if carry || generators.is_empty() {
            break;
        }
    }
    if out.len() != n {
        return Err(Error::Precondition(format!(
            "expected {n} characters, found {}",
            out.len()
        )));
    }
    out.sort();
    Ok(out)
}

/// Teichmueller lift of a residue class mod `p^k`: the limit of repeated
/// `p`-th powers, which is the unique `(p-1)`-st root of unity congruent
/// to the class.
fn teichmueller(c: u64, p: u64, k: u32) -> BigInt {
    let modulus = BigInt::from(p).pow(k);
    let mut x = BigInt::from(c % p);
    for _ in 0..(k as usize + 1) {
        x = x.modpow(&BigInt::from(p), &modulus);
    }
    x
}

/// Multiplicity of the character in the rational representation, computed
/// exactly through Teichmueller lifts mod `p^K`.
fn character_multiplicity(l: &GammaLattice, chi: &[u64]) -> Result<usize> {
    let p = l.prime;
    let rank = l.rank() as u64;
    let mut k = 2u32;
    while (p as u128).pow(k) <= (2 * rank + 1) as u128 {
        k += 1;
    }
    let modulus = BigInt::from(p).pow(k);
    let mut sum = BigInt::zero();
    for g in 0..l.group.order() {
        let mut tr = PLocal::from_int(0, p);
        let m = l.rho(g);
        for i in 0..l.rank() {
            tr = tr + m[(i, i)].clone();
        }
        let tr_mod = tr.mod_pk(k)?;
        sum = (sum + teichmueller(chi[g], p, k) * tr_mod).mod_floor(&modulus);
    }
    // divide by |Gamma| mod p^K
    let ord = BigInt::from(l.group.order());
    let inv = mod_inverse_bigint(&ord, &modulus).ok_or_else(|| {
        Error::Precondition("group order must be invertible mod p".into())
    })?;
    let m = (sum * inv).mod_floor(&modulus);
    let mult: u64 = m
        .to_string()
        .parse()
        .map_err(|_| Error::Precondition("multiplicity overflow".into()))?;
    if mult > rank {
        return Err(Error::Precondition("inconsistent character multiplicity".into()));
    }
    Ok(mult as usize)
}

fn mod_inverse_bigint(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// Rational projection onto the isotypic component of a self-paired
/// character (values are +-1, so the idempotent is rational).
fn self_paired_projector(l: &GammaLattice, chi: &[u64]) -> PMat {
    let p = l.prime;
    let n = l.rank();
    let mut sum: PMat = Matrix::zero(n, n).attach_prime(p);
    for g in 0..l.group.order() {
        let sign = if chi[g] == 1 {
            PLocal::from_int(1, p)
        } else {
            PLocal::from_int(-1, p)
        };
        sum = &sum + &l.rho(g).scale(&sign);
    }
    sum.scale(&PLocal::from_ratio(1, l.group.order() as i64, p))
}

/// Per-character rational data of a split abelian `Gamma`-form: the
/// multiplicity for every character, and the `Q_p` class of the restricted
/// form on every self-paired component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaRationalData {
    pub multiplicities: Vec<(Vec<u64>, usize)>,
    pub self_paired_classes: Vec<(Vec<u64>, Option<RationalClass>)>,
}

pub fn gamma_rational_data(l: &GammaLattice) -> Result<GammaRationalData> {
    let chars = characters_mod_p(&l.group, l.prime)?;
    let mut multiplicities = Vec::new();
    let mut self_paired_classes = Vec::new();
    let mut total = 0usize;
    for chi in &chars {
        let mult = character_multiplicity(l, chi)?;
        total += mult;
        multiplicities.push((chi.clone(), mult));
        let is_self_paired = (0..l.group.order()).all(|g| chi[g] == chi[l.group.inv(g)]);
        if is_self_paired {
            let class = if mult == 0 {
                None
            } else {
                let e = self_paired_projector(l, chi);
                debug_assert_eq!(&e * &e, e);
                let basis = e.column_space_basis();
                debug_assert_eq!(basis.cols(), mult);
                let restricted = &(&basis.transpose() * &l.gram) * &basis;
                Some(rational_class_of_matrix(l.prime, &restricted)?)
            };
            self_paired_classes.push((chi.clone(), class));
        }
    }
    if total != l.rank() {
        return Err(Error::Precondition(format!(
            "character multiplicities sum to {total}, rank is {}",
            l.rank()
        )));
    }
    Ok(GammaRationalData {
        multiplicities,
        self_paired_classes,
    })
}

/// The integral isometry decision for nearly unimodular forms under a
/// split abelian group: rational data per character must match, and the
/// coradicals must be isomorphic `k Gamma`-modules. Swapped character
/// pairs are compared by multiplicity alone; the group ring is a maximal
/// order, so the lattice module class is determined by the rational data.
pub fn gamma_isometric_split_abelian(l: &GammaLattice, l2: &GammaLattice) -> Result<bool> {
    if l.prime != l2.prime {
        return Err(Error::Precondition("forms over different primes".into()));
    }
    if l.group != l2.group {
        return Err(Error::Precondition("forms over different groups".into()));
    }
    if !l.is_nearly_unimodular() || !l2.is_nearly_unimodular() {
        return Err(Error::NotNearlyUnimodular);
    }
    if l.rank() != l2.rank() {
        return Ok(false);
    }
    let d1 = gamma_rational_data(l)?;
    let d2 = gamma_rational_data(l2)?;
    if d1 != d2 {
        return Ok(false);
    }
    let (_, c1) = corad_with_action(l)?;
    let (_, c2) = corad_with_action(l2)?;
    Ok(kgamma_iso_test(&c1, &c2, 0x6a5))
}

/// The Reynolds projection onto equivariant maps `X` with
/// `X rho'(g) = rho(g) X`.
pub fn average_equivariant(l: &GammaLattice, l2: &GammaLattice, x: &PMat) -> PMat {
    let p = l.prime;
    let n = l.rank();
    let mut sum: PMat = Matrix::zero(n, n).attach_prime(p);
    for g in 0..l.group.order() {
        let term = &(l.rho(l.group.inv(g)) * x) * l2.rho(g);
        sum = &sum + &term;
    }
    sum.scale(&PLocal::from_ratio(1, l.group.order() as i64, p))
}

/// Equivariant Hensel lifting between unimodular `Gamma`-forms: the seed
/// is projected onto the equivariant maps, after which each Newton step
/// preserves equivariance exactly; the projection is re-applied each round
/// and invertibility rechecked. The witness `X` satisfies
/// `X^T G X = G' mod p^k` and `X rho'(g) = rho(g) X mod p^k`.
pub fn equivariant_lift_isometry(
    l: &GammaLattice,
    l2: &GammaLattice,
    x0: &PMat,
    k: u32,
) -> Result<PMat> {
    if l.prime != l2.prime || l.group != l2.group || l.rank() != l2.rank() {
        return Err(Error::Precondition("mismatched lattices".into()));
    }
    if !l.is_unimodular() || !l2.is_unimodular() {
        return Err(Error::Precondition("equivariant lifting needs unimodular forms".into()));
    }
    let p = l.prime;
    let x0 = x0.attach_prime(p);
    if !x0.is_integral() {
        return Err(Error::BadSeed);
    }
    let one = Valuation::Finite(1);
    // seed must be an equivariant residue isometry
    let defect0 = &(&(&x0.transpose() * &l.gram) * &x0) - &l2.gram;
    if defect0.min_valuation() < one {
        return Err(Error::BadSeed);
    }
    for g in 0..l.group.order() {
        let comm = &(&x0 * l2.rho(g)) - &(l.rho(g) * &x0);
        if comm.min_valuation() < one {
            return Err(Error::BadSeed);
        }
    }

    let mut x = average_equivariant(l, l2, &x0);
    if !x.is_r_invertible() {
        return Err(Error::BadSeed);
    }
    let ginv2 = l2.gram.inverse().ok_or(Error::SingularForm)?;
    let half = PLocal::from_ratio(-1, 2, p);
    let mut guard = 0;
    loop {
        let diff = &(&(&x.transpose() * &l.gram) * &x) - &l2.gram;
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
                x = average_equivariant(l, l2, &x);
                if !x.is_r_invertible() {
                    return Err(Error::RetriesExhausted(
                        "averaging lost invertibility".into(),
                    ));
                }
            }
        }
        guard += 1;
        if guard > 64 {
            return Err(Error::RetriesExhausted("newton did not converge".into()));
        }
    }
    let reduced = x.reduce_mod_pk(k)?;
    // final witness checks, mod p^k
    let kv = Valuation::Finite(k as i64);
    let diff = &(&(&reduced.transpose() * &l.gram) * &reduced) - &l2.gram;
    debug_assert!(diff.min_valuation() >= kv);
    for g in 0..l.group.order() {
        let comm = &(&reduced * l2.rho(g)) - &(l.rho(g) * &reduced);
        if comm.min_valuation() < kv {
            return Err(Error::Precondition("witness lost equivariance".into()));
        }
    }
    Ok(reduced)
}

// ---------------------------------------------------------------------------
// generators for campaigns
// ---------------------------------------------------------------------------

/// The regular representation built from the multiplication table:
/// `rho(g)` is the permutation matrix of left translation, which makes
/// `rho` a homomorphism on column vectors.
pub fn regular_representation(group: &FiniteGroup, p: u64) -> Vec<PMat> {
    let n = group.order();
    (0..n)
        .map(|g| {
            let mut m: PMat = Matrix::zero(n, n).attach_prime(p);
            for a in 0..n {
                m[(group.mul(g, a), a)] = PLocal::from_int(1, p);
            }
            m
        })
        .collect()
}

/// A random invariant Gram matrix for the given action: average a random
/// symmetric integer matrix over the group, retrying until the result is
/// nonsingular (nearly unimodular when `nearly` is set).
pub fn random_invariant_form(
    group: &FiniteGroup,
    action: &[PMat],
    p: u64,
    rng: &mut ChaCha8Rng,
    nearly: bool,
) -> Result<GammaLattice> {
    let n = action[0].rows();
    for _ in 0..200 {
        let raw = Matrix::from_fn(n, n, |_, _| {
            let c = rng.gen_range(-4i64..=4);
            let scale = if rng.gen_bool(0.3) { p as i64 } else { 1 };
            PLocal::from_int(c * scale, p)
        });
        let sym = &raw + &raw.transpose();
        let mut avg: PMat = Matrix::zero(n, n).attach_prime(p);
        for g in 0..group.order() {
            let m = &action[g];
            avg = &avg + &(&(&m.transpose() * &sym) * m);
        }
        if avg.det().is_zero() {
            continue;
        }
        let lat = GammaLattice::new(p, group.clone(), action.to_vec(), avg)?;
        if !nearly || lat.is_nearly_unimodular() {
            return Ok(lat);
        }
    }
    Err(Error::RetriesExhausted("no invariant form found".into()))
}

/// Twist of a lattice by an element of `GL_n(R)`: gram pulls back, the
/// action conjugates; the twist is `Gamma`-isometric to the original by
/// construction.
pub fn twist_lattice(l: &GammaLattice, x: &PMat) -> Result<GammaLattice> {
    let xinv = x.inverse().ok_or(Error::SingularForm)?;
    let gram = &(&x.transpose() * &l.gram) * x;
    let action = (0..l.group.order())
        .map(|g| &(&xinv * l.rho(g)) * x)
        .collect();
    GammaLattice::new(l.prime, l.group.clone(), action, gram)
}

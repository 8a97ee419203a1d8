//! Hereditary block orders in `M_N(R)` and their ideal arithmetic.
//!
//! Ideals are represented by matrices of valuation lower bounds and all
//! ideal arithmetic is min-plus; this keeps every computation exact and
//! canonical. Non-hereditary tiled patterns are admitted only through
//! [`ValuationPattern`], which powers the `(*)`-property scan; negative
//! radical powers stay restricted to the hereditary block case.

use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{require_same_shape, Matrix};
use crate::plocal::{check_odd_prime, Fp, Valuation};
use crate::{IMat, PMat};

/// The hereditary order `O^[n_1..n_r]` inside `M_N(R)`: block matrices with
/// integral entries, off-diagonal-above blocks divisible by `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockOrder {
    prime: u64,
    sizes: Vec<usize>,
}

impl BlockOrder {
    pub fn new(prime: u64, sizes: Vec<usize>) -> Result<Self> {
        check_odd_prime(prime)?;
        if sizes.is_empty() || sizes.iter().any(|&s| s == 0) {
            return Err(Error::Precondition("block sizes must be positive".into()));
        }
        Ok(BlockOrder { prime, sizes })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn dimension(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn block_count(&self) -> usize {
        self.sizes.len()
    }

    /// Which block a row/column index belongs to.
    pub fn block_of(&self, index: usize) -> usize {
        let mut acc = 0;
        for (b, &s) in self.sizes.iter().enumerate() {
            acc += s;
            if index < acc {
                return b;
            }
        }
        panic!("index out of range");
    }

    /// Valuation bounds of the order itself: `1` strictly above the block
    /// diagonal, `0` elsewhere.
    pub fn bounds(&self) -> IMat {
        let n = self.dimension();
        Matrix::from_fn(n, n, |i, j| {
            if self.block_of(i) < self.block_of(j) {
                1
            } else {
                0
            }
        })
    }

    /// The Jacobson radical: bounds `1` on and above the block diagonal,
    /// `0` strictly below.
    pub fn radical(&self) -> ValuationIdeal {
        let n = self.dimension();
        let bounds = Matrix::from_fn(n, n, |i, j| {
            if self.block_of(i) <= self.block_of(j) {
                1
            } else {
                0
            }
        });
        ValuationIdeal {
            prime: self.prime,
            bounds,
        }
    }

    /// The whole order as an ideal.
    pub fn unit_ideal(&self) -> ValuationIdeal {
        ValuationIdeal {
            prime: self.prime,
            bounds: self.bounds(),
        }
    }

    /// Membership test for a rational matrix.
    pub fn contains(&self, m: &PMat) -> Result<bool> {
        let n = self.dimension();
        if m.rows() != n || m.cols() != n {
            return Err(Error::SizeMismatch(format!(
                "expected {n}x{n}, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let m = m.attach_prime(self.prime);
        let b = self.bounds();
        for i in 0..n {
            for j in 0..n {
                if m[(i, j)].valuation() < Valuation::Finite(b[(i, j)]) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// `J^-1 = {x : x J <= A}`, computed from the max-plus dual of the
    /// min-plus product.
    pub fn radical_inverse(&self) -> ValuationIdeal {
        let a = self.bounds();
        let j = self.radical().bounds;
        let n = self.dimension();
        let bounds = Matrix::from_fn(n, n, |i, jj| {
            (0..n)
                .map(|k| a[(i, k)] - j[(jj, k)])
                .max()
                .expect("nonempty")
        });
        ValuationIdeal {
            prime: self.prime,
            bounds,
        }
    }

    /// Integer powers of the radical: iterated min-plus products for
    /// nonnegative exponents, iterates of `J^-1` for negative ones.
    pub fn radical_power(&self, n: i64) -> ValuationIdeal {
        if n == 0 {
            return self.unit_ideal();
        }
        let step = if n > 0 {
            self.radical()
        } else {
            self.radical_inverse()
        };
        let mut acc = step.clone();
        for _ in 1..n.unsigned_abs() {
            acc = ideal_multiply(&acc, &step).expect("same order");
        }
        acc
    }

    /// Component dimensions of `A/Jac(A) = prod M_{m_i}(k)`.
    pub fn residue_dimensions(&self) -> Vec<usize> {
        self.sizes.clone()
    }

    /// Multiplicities of the projective indecomposables in `e A`, read off
    /// the residue ranks of the diagonal blocks of an idempotent.
    pub fn decompose_projective(&self, e: &PMat) -> Result<Vec<usize>> {
        let n = self.dimension();
        if e.rows() != n || e.cols() != n {
            return Err(Error::SizeMismatch(format!(
                "expected {n}x{n} idempotent",

            )));
        }
        let e = e.attach_prime(self.prime);
        if !self.contains(&e)? {
            return Err(Error::NotInOrder);
        }
        if (&e * &e) != e {
            return Err(Error::NotIdempotent);
        }
        let mut out = Vec::with_capacity(self.block_count());
        let mut offset = 0;
        for &s in &self.sizes {
            let idx: Vec<usize> = (offset..offset + s).collect();
            let block = e.submatrix(&idx, &idx).residue()?;
            out.push(block.rank());
            offset += s;
        }
        Ok(out)
    }
}

/// A two-sided fractional ideal (or lattice) of a block order, as a matrix
/// of valuation lower bounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValuationIdeal {
    prime: u64,
    bounds: IMat,
}

impl ValuationIdeal {
    pub fn from_bounds(prime: u64, bounds: IMat) -> Result<Self> {
        check_odd_prime(prime)?;
        if !bounds.is_square() {
            return Err(Error::SizeMismatch("bounds must be square".into()));
        }
        Ok(ValuationIdeal { prime, bounds })
    }

    pub fn bounds(&self) -> &IMat {
        &self.bounds
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    /// Set containment: larger bounds cut out smaller sets.
    pub fn contained_in(&self, other: &ValuationIdeal) -> bool {
        require_same_shape(&self.bounds, &other.bounds).is_ok()
            && (0..self.bounds.rows()).all(|i| {
                (0..self.bounds.cols()).all(|j| self.bounds[(i, j)] >= other.bounds[(i, j)])
            })
    }

    /// Two-sided compatibility over an order pattern: `A L <= L` and
    /// `L A <= L`.
    pub fn is_two_sided_over(&self, order_bounds: &IMat) -> bool {
        let left = min_plus(order_bounds, &self.bounds);
        let right = min_plus(&self.bounds, order_bounds);
        entrywise_ge(&left, &self.bounds) && entrywise_ge(&right, &self.bounds)
    }
}

fn min_plus(a: &IMat, b: &IMat) -> IMat {
    assert_eq!(a.cols(), b.rows());
    Matrix::from_fn(a.rows(), b.cols(), |i, k| {
        (0..a.cols())
            .map(|j| a[(i, j)] + b[(j, k)])
            .min()
            .expect("nonempty")
    })
}

fn entrywise_ge(a: &IMat, b: &IMat) -> bool {
    (0..a.rows()).all(|i| (0..a.cols()).all(|j| a[(i, j)] >= b[(i, j)]))
}

/// Exact product of two valuation ideals (min-plus product of the bound
/// matrices).
pub fn ideal_multiply(a: &ValuationIdeal, b: &ValuationIdeal) -> Result<ValuationIdeal> {
    if a.prime != b.prime {
        return Err(Error::Precondition("ideal product across primes".into()));
    }
    require_same_shape(&a.bounds, &b.bounds)?;
    Ok(ValuationIdeal {
        prime: a.prime,
        bounds: min_plus(&a.bounds, &b.bounds),
    })
}

/// A tiled-order pattern `(m^{lambda_ij})`, possibly non-hereditary. The
/// diagonal must be zero and the pattern closed under multiplication.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValuationPattern {
    prime: u64,
    lambda: IMat,
}

impl ValuationPattern {
    pub fn new(prime: u64, lambda: IMat) -> Result<Self> {
        check_odd_prime(prime)?;
        if !lambda.is_square() {
            return Err(Error::SizeMismatch("pattern must be square".into()));
        }
        let n = lambda.rows();
        for i in 0..n {
            if lambda[(i, i)] != 0 {
                return Err(Error::UnsupportedDescriptor(
                    "pattern diagonal must be zero".into(),
                ));
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if lambda[(i, k)] > lambda[(i, j)] + lambda[(j, k)] {
                        return Err(Error::UnsupportedDescriptor(
                            "pattern is not closed under multiplication".into(),
                        ));
                    }
                }
            }
        }
        Ok(ValuationPattern { prime, lambda })
    }

    pub fn from_block_order(o: &BlockOrder) -> Self {
        ValuationPattern {
            prime: o.prime(),
            lambda: o.bounds(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.lambda.rows()
    }

    pub fn bounds(&self) -> &IMat {
        &self.lambda
    }

    pub fn unit_ideal(&self) -> ValuationIdeal {
        ValuationIdeal {
            prime: self.prime,
            bounds: self.lambda.clone(),
        }
    }

    /// Jacobson radical of a tiled pattern: rows `i, j` are tied when
    /// `lambda_ij + lambda_ji = 0` (they span a common matrix block);
    /// the radical raises exactly the tied positions by one.
    pub fn radical(&self) -> Result<ValuationIdeal> {
        let n = self.dimension();
        let tied = |i: usize, j: usize| self.lambda[(i, j)] + self.lambda[(j, i)] == 0;
        // tie relation must be transitive for the block description to hold
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if tied(i, j) && tied(j, k) && !tied(i, k) {
                        return Err(Error::UnsupportedDescriptor(
                            "tie relation is not transitive".into(),
                        ));
                    }
                }
            }
        }
        let bounds = Matrix::from_fn(n, n, |i, j| self.lambda[(i, j)] + i64::from(tied(i, j)));
        Ok(ValuationIdeal {
            prime: self.prime,
            bounds,
        })
    }
}

/// Verdict of one `(*)`-instance: whether `J^2 L <= A` and whether
/// `J L J <= A`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StarVerdict {
    pub premise: bool,
    pub conclusion: bool,
}

impl StarVerdict {
    /// The implication `J^2 L <= A  =>  J L J <= A`.
    pub fn holds(&self) -> bool {
        !self.premise || self.conclusion
    }
}

/// Checks the `(*)`-property instance for one two-sided lattice `L` over
/// the pattern.
pub fn check_star_property(pattern: &ValuationPattern, l: &ValuationIdeal) -> Result<StarVerdict> {
    if l.prime() != pattern.prime {
        return Err(Error::Precondition("mixed primes".into()));
    }
    require_same_shape(l.bounds(), pattern.bounds())?;
    if !l.is_two_sided_over(pattern.bounds()) {
        return Err(Error::IncompatibleLattice);
    }
    let j = pattern.radical()?;
    let a = pattern.unit_ideal();
    let j2l = ideal_multiply(&ideal_multiply(&j, &j)?, l)?;
    let jlj = ideal_multiply(&ideal_multiply(&j, l)?, &j)?;
    Ok(StarVerdict {
        premise: j2l.contained_in(&a),
        conclusion: jlj.contained_in(&a),
    })
}

/// Scan report for the `(*)`-property over candidate lattices.
#[derive(Clone, Debug, Default)]
pub struct StarScanReport {
    pub candidates: usize,
    pub premise_count: usize,
    pub violations: Vec<IMat>,
}

/// Scans every two-sided lattice whose bounds differ from the pattern's by
/// offsets in `[-3, 3]`. Two-sided lattices are constant on the pattern's
/// tie classes, so the enumeration runs at class level, with constraint
/// pruning during the depth-first walk.
pub fn scan_star_property(pattern: &ValuationPattern, limit: usize) -> Result<StarScanReport> {
    let n = pattern.dimension();
    let tied = |i: usize, j: usize| pattern.lambda[(i, j)] + pattern.lambda[(j, i)] == 0;
    // class representatives
    let mut reps: Vec<usize> = Vec::new();
    let mut class_of = vec![usize::MAX; n];
    for i in 0..n {
        if let Some(c) = reps.iter().position(|&r| tied(r, i)) {
            class_of[i] = c;
        } else {
            class_of[i] = reps.len();
            reps.push(i);
        }
    }
    let r = reps.len();
    // class-level pattern
    let mu = Matrix::from_fn(r, r, |a, b| pattern.lambda[(reps[a], reps[b])]);

    let mut report = StarScanReport::default();
    let mut cells = vec![0i64; r * r];
    // depth-first over class-level bound matrices, pruning with the
    // closure constraints L(a,c) <= mu(a,b) + L(b,c) and
    // L(a,c) <= L(a,b) + mu(b,c)
    fn admissible(mu: &IMat, cells: &[i64], r: usize, depth: usize) -> bool {
        let val = |idx: usize| cells[idx];
        for a in 0..r {
            for b in 0..r {
                for c in 0..r {
                    let ac = a * r + c;
                    let bc = b * r + c;
                    let ab = a * r + b;
                    if ac < depth && bc < depth && val(ac) > mu[(a, b)] + val(bc) {
                        return false;
                    }
                    if ac < depth && ab < depth && val(ac) > val(ab) + mu[(b, c)] {
                        return false;
                    }
                }
            }
        }
        true
    }

    let mut stack = vec![(-4i64, 0usize)]; // (value to try next - 1, depth)
    let total_cells = r * r;
    while let Some((last, depth)) = stack.pop() {
        if report.candidates >= limit {
            return Err(Error::RetriesExhausted(format!(
                "star scan exceeded the candidate limit {limit}"
            )));
        }
        let next = last + 1;
        if next > 3 {
            continue;
        }
        stack.push((next, depth));
        cells[depth] = mu[(depth / r, depth % r)] + next;
        if !admissible(&mu, &cells, r, depth + 1) {
            continue;
        }
        if depth + 1 < total_cells {
            stack.push((-4, depth + 1));
            continue;
        }
        // complete class-level assignment; expand to the full pattern
        let bounds = Matrix::from_fn(n, n, |i, j| {
            let off =
                cells[class_of[i] * r + class_of[j]] - mu[(class_of[i], class_of[j])];
            pattern.lambda[(i, j)] + off
        });
        let l = ValuationIdeal::from_bounds(pattern.prime, bounds)?;
        if !l.is_two_sided_over(pattern.bounds()) {
            continue;
        }
        let v = check_star_property(pattern, &l)?;
        report.candidates += 1;
        if v.premise {
            report.premise_count += 1;
        }
        if !v.holds() {
            report.violations.push(l.bounds().clone());
        }
    }
    Ok(report)
}

/// The two involutions of the residue algebra of `[[R, m], [R, R]]` from
/// the rank-one example: the first fixes the diagonal and swaps the
/// off-diagonal residues, the second swaps the diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResidueInvolution {
    /// `[[a, pi b], [c, d]] -> [[a, pi c], [b, d]]`
    OffDiagonalSwap,
    /// `[[a, pi b], [c, d]] -> [[d, pi b], [c, a]]`
    DiagonalSwap,
}

/// Element of the 4-dimensional residue algebra of `A = [[R, m], [R, R]]`,
/// with multiplication `[[a,b],[c,d]] * [[x,y],[z,w]] =
/// [[ax, ay+bw], [cx+dz, dw]]` over `k`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct ResElt {
    a: Fp,
    b: Fp,
    c: Fp,
    d: Fp,
}

fn res_mul(x: ResElt, y: ResElt) -> ResElt {
    ResElt {
        a: x.a * y.a,
        b: x.a * y.b + x.b * y.d,
        c: x.c * y.a + x.d * y.c,
        d: x.d * y.d,
    }
}

fn res_sigma(inv: ResidueInvolution, x: ResElt) -> ResElt {
    match inv {
        ResidueInvolution::OffDiagonalSwap => ResElt {
            a: x.a,
            b: x.c,
            c: x.b,
            d: x.d,
        },
        ResidueInvolution::DiagonalSwap => ResElt {
            a: x.d,
            b: x.b,
            c: x.c,
            d: x.a,
        },
    }
}

/// Exhaustively enumerates the residue unitary group `{u : u^sigma u = 1}`
/// of `[[R, m], [R, R]]` and identifies the identity component through the
/// closed-form parametrization. Returns
/// `(identity component size, total size)`.
pub fn residue_unitary_enumerate(
    p: u64,
    involution: ResidueInvolution,
) -> Result<(usize, usize)> {
    check_odd_prime(p)?;
    if p > 7 {
        return Err(Error::UnsupportedDescriptor(format!(
            "enumeration restricted to p <= 7, got {p}"
        )));
    }
    let one = ResElt {
        a: Fp::new(1, p),
        b: Fp::new(0, p),
        c: Fp::new(0, p),
        d: Fp::new(1, p),
    };
    let mut total = 0usize;
    let mut component = 0usize;
    for a in 0..p {
        for b in 0..p {
            for c in 0..p {
                for d in 0..p {
                    let x = ResElt {
                        a: Fp::new(a, p),
                        b: Fp::new(b, p),
                        c: Fp::new(c, p),
                        d: Fp::new(d, p),
                    };
                    if res_mul(res_sigma(involution, x), x) != one {
                        continue;
                    }
                    total += 1;
                    let in_component = match involution {
                        // the additive line [[1, b], [-b, 1]]
                        ResidueInvolution::OffDiagonalSwap => {
                            x.a == Fp::new(1, p) && x.d == Fp::new(1, p) && x.c == -x.b
                        }
                        // the multiplicative torus [[t, 0], [0, t^-1]]
                        ResidueInvolution::DiagonalSwap => {
                            x.b.is_zero()
                                && x.c.is_zero()
                                && !x.a.is_zero()
                                && x.d == x.a.inv().expect("nonzero")
                        }
                    };
                    if in_component {
                        component += 1;
                    }
                }
            }
        }
    }
    Ok((component, total))
}

/// Random two-sided lattice over a block order: draw arbitrary bounds and
/// close them under the order's two-sided action. The closure
/// `A (.) L0 (.) A` is two-sided because `A (.) A = A` in min-plus.
pub fn random_two_sided_lattice(
    o: &BlockOrder,
    rng: &mut impl Rng,
    offset_range: std::ops::RangeInclusive<i64>,
) -> ValuationIdeal {
    let n = o.dimension();
    let a = o.bounds();
    let raw = Matrix::from_fn(n, n, |i, j| {
        a[(i, j)] + rng.gen_range(offset_range.clone())
    });
    let closed = min_plus(&min_plus(&a, &raw), &a);
    let l = ValuationIdeal {
        prime: o.prime(),
        bounds: closed,
    };
    debug_assert!(l.is_two_sided_over(&a));
    l
}

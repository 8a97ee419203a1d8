//! JSON document schemas for the CLI surface. Rationals serialize as
//! strings `"num/den"`, with the denominator omitted when it is 1; bound
//! matrices serialize as plain integer arrays.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma::{FiniteGroup, GammaLattice};
use crate::lattice::GramForm;
use crate::matrix::Matrix;
use crate::plocal::PLocal;
use crate::refine::AmbientForm;
use crate::PMat;

pub fn rational_to_string(x: &PLocal) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn rational_from_string(s: &str, p: u64) -> Result<PLocal> {
    let bad = || Error::InvalidDocument(format!("bad rational: {s:?}"));
    let (num, den) = match s.split_once('/') {
        None => (s.trim(), "1"),
        Some((n, d)) => (n.trim(), d.trim()),
    };
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = den.parse().map_err(|_| bad())?;
    if d == BigInt::from(0) {
        return Err(bad());
    }
    Ok(PLocal::new(BigRational::new(n, d), p))
}

pub fn matrix_to_strings(m: &PMat) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| rational_to_string(&m[(i, j)])).collect())
        .collect()
}

pub fn matrix_from_strings(rows: &[Vec<String>], p: u64) -> Result<PMat> {
    if rows.is_empty() {
        return Err(Error::InvalidDocument("empty matrix".into()));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidDocument("ragged matrix".into()));
    }
    let mut data = Vec::new();
    for row in rows {
        let mut out = Vec::new();
        for s in row {
            out.push(rational_from_string(s, p)?);
        }
        data.push(out);
    }
    Ok(Matrix::from_rows(data))
}

/// The lattice document shared by `corad`, `classify`, `isom` and
/// `refine`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeDocument {
    pub p: u64,
    #[serde(default = "default_epsilon")]
    pub epsilon: i8,
    pub gram: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_epsilon() -> i8 {
    1
}

impl LatticeDocument {
    pub fn to_gram_form(&self) -> Result<GramForm> {
        let gram = matrix_from_strings(&self.gram, self.p)?;
        GramForm::new(self.p, self.epsilon, gram)
    }

    /// Ambient form for the refinement CLI: rational gram entries, with an
    /// optional start basis (default: standard lattice).
    pub fn to_ambient_form(&self) -> Result<AmbientForm> {
        let gram = matrix_from_strings(&self.gram, self.p)?;
        match &self.basis {
            None => AmbientForm::with_standard_basis(self.p, gram),
            Some(b) => {
                let basis = matrix_from_strings(b, self.p)?;
                AmbientForm::new(self.p, gram, basis)
            }
        }
    }

    pub fn from_gram_form(f: &GramForm) -> Self {
        LatticeDocument {
            p: f.prime(),
            epsilon: f.epsilon(),
            gram: matrix_to_strings(f.gram()),
            basis: None,
            precision: None,
            seed: None,
        }
    }
}

/// A pair of lattice documents, for the isometry commands.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticePairDocument {
    pub first: LatticeDocument,
    pub second: LatticeDocument,
}

/// Witness output: entries reduced mod `p^precision`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessDocument {
    pub witness: Vec<Vec<String>>,
    pub precision: u32,
}

/// The group-form document: a multiplication table, one action matrix per
/// group element (keyed by its index), and an invariant Gram matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GammaFormDocument {
    pub p: u64,
    pub group_table: Vec<Vec<usize>>,
    pub action: std::collections::BTreeMap<String, Vec<Vec<String>>>,
    pub gram: Vec<Vec<String>>,
}

impl GammaFormDocument {
    pub fn to_lattice(&self) -> Result<GammaLattice> {
        let group = FiniteGroup::from_table(self.group_table.clone())?;
        let mut action = Vec::with_capacity(group.order());
        for g in 0..group.order() {
            let key = g.to_string();
            let rows = self
                .action
                .get(&key)
                .ok_or_else(|| Error::InvalidDocument(format!("missing action for element {g}")))?;
            action.push(matrix_from_strings(rows, self.p)?);
        }
        let gram = matrix_from_strings(&self.gram, self.p)?;
        GammaLattice::new(self.p, group, action, gram)
    }

    pub fn from_lattice(l: &GammaLattice) -> Self {
        let mut action = std::collections::BTreeMap::new();
        for g in 0..l.group().order() {
            action.insert(g.to_string(), matrix_to_strings(l.rho(g)));
        }
        GammaFormDocument {
            p: l.prime(),
            group_table: (0..l.group().order())
                .map(|a| (0..l.group().order()).map(|b| l.group().mul(a, b)).collect())
                .collect(),
            action,
            gram: matrix_to_strings(l.gram()),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GammaPairDocument {
    pub first: GammaFormDocument,
    pub second: GammaFormDocument,
}

//! Finite matrix representations of the su(2) and su(1,1) generator triples
//! `K0, K+, K-` obeying `[K0, K±] = ±K±`, `[K+, K-] = D K0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{commutator, cr, max_norm_block, CMat};

/// Which algebra a representation realizes, fixing the structure constant `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgebraKind {
    /// `D = +2`.
    Su2,
    /// `D = -2`.
    Su11,
}

impl AlgebraKind {
    /// Structure constant in `[K+, K-] = D K0`.
    pub fn d(self) -> f64 {
        match self {
            AlgebraKind::Su2 => 2.0,
            AlgebraKind::Su11 => -2.0,
        }
    }

    pub fn from_d(d: i32) -> Result<Self> {
        match d {
            2 => Ok(AlgebraKind::Su2),
            -2 => Ok(AlgebraKind::Su11),
            other => Err(Error::invalid(format!(
                "structure constant D must be +2 or -2, got {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RepLabel {
    /// Spin `j`, stored as `2j` to stay exact.
    Spin { twice_j: u32 },
    /// Fock-space cutoff `N` (levels `0..N`).
    Cutoff { n: usize },
}

/// Dense matrices for `K0, K+, K-` in a fixed basis.
///
/// su(2): basis `|j, m>` with `m = j, j-1, .., -j` (descending).
/// su(1,1): Fock basis `|n>`, `n = 0..N` (ascending).
#[derive(Debug, Clone)]
pub struct Representation {
    kind: AlgebraKind,
    label: RepLabel,
    k0: CMat,
    kplus: CMat,
    kminus: CMat,
    k0_diag: Vec<f64>,
    trusted_dim: usize,
}

impl Representation {
    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }
    pub fn label(&self) -> RepLabel {
        self.label
    }
    pub fn dim(&self) -> usize {
        self.k0_diag.len()
    }
    /// Leading sub-block on which the commutation relations hold exactly.
    pub fn trusted_dim(&self) -> usize {
        self.trusted_dim
    }
    pub fn k0(&self) -> &CMat {
        &self.k0
    }
    pub fn kplus(&self) -> &CMat {
        &self.kplus
    }
    pub fn kminus(&self) -> &CMat {
        &self.kminus
    }
    /// Eigenvalues of `K0` in basis order.
    pub fn k0_diagonal(&self) -> &[f64] {
        &self.k0_diag
    }

    /// Basis position of the `K0` eigenvector carrying `label`.
    ///
    /// The label is the magnetic number `m` for su(2) and the Fock level `n`
    /// for su(1,1).
    pub fn basis_position(&self, label: f64) -> Result<usize> {
        let out_of_range = || Error::validation("indices", format!("index out of range: {label} is not a basis label"));
        match self.label {
            RepLabel::Spin { twice_j } => {
                let twice_m = 2.0 * label;
                if (twice_m - twice_m.round()).abs() > 1e-12 {
                    return Err(out_of_range());
                }
                let twice_m = twice_m.round() as i64;
                let tj = twice_j as i64;
                if twice_m.abs() > tj || (tj - twice_m) % 2 != 0 {
                    return Err(out_of_range());
                }
                Ok(((tj - twice_m) / 2) as usize)
            }
            RepLabel::Cutoff { n } => {
                if label < 0.0 || label.fract() != 0.0 || label as usize >= n {
                    return Err(out_of_range());
                }
                Ok(label as usize)
            }
        }
    }

    /// Label (`m` or `n`) of the basis vector at `position`.
    pub fn basis_label(&self, position: usize) -> f64 {
        match self.label {
            RepLabel::Spin { twice_j } => (twice_j as f64 - 2.0 * position as f64) / 2.0,
            RepLabel::Cutoff { .. } => position as f64,
        }
    }
}

/// Spin-`j` representation of su(2).
pub fn build_su2_rep(j: f64) -> Result<Representation> {
    let twice = 2.0 * j;
    if !(twice.is_finite() && twice >= 1.0 && (twice - twice.round()).abs() < 1e-12) {
        return Err(Error::invalid(format!(
            "spin j must be a positive half-integer, got {j}"
        )));
    }
    let twice_j = twice.round() as u32;
    let dim = twice_j as usize + 1;
    let j = twice_j as f64 / 2.0;
    let m: Vec<f64> = (0..dim).map(|k| j - k as f64).collect();

    let k0 = CMat::from_diagonal(&m.iter().map(|&x| cr(x)).collect::<Vec<_>>().into());
    // J+ |j,m> = sqrt(j(j+1) - m(m+1)) |j,m+1>; |j,m+1> sits one row above.
    let mut kplus = CMat::zeros(dim, dim);
    for col in 1..dim {
        let mm = m[col];
        kplus[(col - 1, col)] = cr((j * (j + 1.0) - mm * (mm + 1.0)).sqrt());
    }
    let kminus = kplus.adjoint();
    Ok(Representation {
        kind: AlgebraKind::Su2,
        label: RepLabel::Spin { twice_j },
        k0,
        kplus,
        kminus,
        k0_diag: m,
        trusted_dim: dim,
    })
}

/// Truncated boson realization of su(1,1):
/// `K0 = (a+a + 1/2)/2`, `K- = a^2/2`, `K+ = (a+)^2/2` on levels `0..N`.
pub fn build_su11_boson_rep(cutoff: usize) -> Result<Representation> {
    if cutoff < 4 {
        return Err(Error::invalid(format!("Fock cutoff must be >= 4, got {cutoff}")));
    }
    let diag: Vec<f64> = (0..cutoff).map(|n| (n as f64 + 0.5) / 2.0).collect();
    let k0 = CMat::from_diagonal(&diag.iter().map(|&x| cr(x)).collect::<Vec<_>>().into());
    let mut kminus = CMat::zeros(cutoff, cutoff);
    for n in 2..cutoff {
        kminus[(n - 2, n)] = cr(0.5 * ((n * (n - 1)) as f64).sqrt());
    }
    let kplus = kminus.adjoint();
    Ok(Representation {
        kind: AlgebraKind::Su11,
        label: RepLabel::Cutoff { n: cutoff },
        k0,
        kplus,
        kminus,
        k0_diag: diag,
        trusted_dim: cutoff - 2,
    })
}

/// Max-norm residuals of the three defining commutation relations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutatorResiduals {
    /// `[K0, K+] - K+`
    pub raise: f64,
    /// `[K0, K-] + K-`
    pub lower: f64,
    /// `[K+, K-] - D K0`
    pub closure: f64,
}

impl CommutatorResiduals {
    pub fn max(&self) -> f64 {
        self.raise.max(self.lower).max(self.closure)
    }
}

/// Residuals on the trusted block.
pub fn commutator_residuals(rep: &Representation) -> CommutatorResiduals {
    commutator_residuals_on_block(rep, rep.trusted_dim())
}

/// Residuals on the leading `block x block` sub-matrix.
pub fn commutator_residuals_on_block(rep: &Representation, block: usize) -> CommutatorResiduals {
    let (k0, kp, km) = (rep.k0(), rep.kplus(), rep.kminus());
    let r1 = commutator(k0, kp) - kp;
    let r2 = commutator(k0, km) + km;
    let r3 = commutator(kp, km) - k0 * cr(rep.kind().d());
    CommutatorResiduals {
        raise: max_norm_block(&r1, block, block),
        lower: max_norm_block(&r2, block, block),
        closure: max_norm_block(&r3, block, block),
    }
}

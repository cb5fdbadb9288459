use crate::error::{Error, Result};
use crate::hilbert::SiteDims;
use crate::linalg::{is_unitary, CMat, C64, I, ONE, ZERO};

/// Named local bases used as defaults and optimizer warm starts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedBasis {
    Standard,
    /// Eigenbasis of sigma_x (qubits only).
    SigmaX,
    /// Eigenbasis of sigma_y (qubits only).
    SigmaY,
    /// Cartesian spin-1 basis `(|+1> + |-1>)/sqrt2, |0>, (|-1> - |+1>)/sqrt2` (qutrits only):
    /// the rows of the local rotation `U` that turns AKLT tensors into `i sigma_y, sigma_z, sigma_x`.
    UHeis,
}

impl NamedBasis {
    pub fn id(self) -> &'static str {
        match self {
            Self::Standard => "standard",
            Self::SigmaX => "sigma_x",
            Self::SigmaY => "sigma_y",
            Self::UHeis => "u_basis",
        }
    }

    /// Unitary whose columns are the basis vectors; `None` if the basis does
    /// not exist for dimension `d`.
    pub fn unitary(self, d: usize) -> Option<CMat> {
        let h = C64::from(std::f64::consts::FRAC_1_SQRT_2);
        match (self, d) {
            (Self::Standard, _) => Some(CMat::identity(d, d)),
            (Self::SigmaX, 2) => Some(CMat::from_row_slice(2, 2, &[h, h, h, -h])),
            (Self::SigmaY, 2) => Some(CMat::from_row_slice(2, 2, &[h, h, I * h, -I * h])),
            (Self::UHeis, 3) => Some(CMat::from_row_slice(
                3,
                3,
                &[h, ZERO, -h, ZERO, ONE, ZERO, h, ZERO, h],
            )),
            _ => None,
        }
    }
}

/// A local orthonormal basis for every measured site.
///
/// The columns of each unitary are the measurement vectors; outcome `k` on a
/// site projects onto column `k`.
#[derive(Clone, Debug)]
pub struct MeasurementStrategy {
    kept: (usize, usize),
    bases: Vec<Option<CMat>>,
    uniform: bool,
    label: String,
}

impl MeasurementStrategy {
    /// `bases[k]` must be `None` exactly at the kept sites.
    pub fn new(dims: &SiteDims, i: usize, j: usize, bases: Vec<Option<CMat>>, label: impl Into<String>) -> Result<Self> {
        let n = dims.n_sites();
        if i == j || i >= n || j >= n {
            return Err(Error::DimMismatch(format!("bad kept pair ({i}, {j}) for {n} sites")));
        }
        if bases.len() != n {
            return Err(Error::DimMismatch(format!("{} bases for {n} sites", bases.len())));
        }
        for (k, b) in bases.iter().enumerate() {
            match (k == i || k == j, b) {
                (true, Some(_)) => return Err(Error::DimMismatch(format!("kept site {k} has a basis"))),
                (false, None) => return Err(Error::DimMismatch(format!("measured site {k} has no basis"))),
                (false, Some(u)) => {
                    if u.nrows() != dims.dim(k) || !is_unitary(u, 1e-10) {
                        return Err(Error::InvalidSpec(format!("basis on site {k} is not a {0}x{0} unitary", dims.dim(k))));
                    }
                }
                (true, None) => {}
            }
        }
        Ok(Self { kept: (i, j), bases, uniform: false, label: label.into() })
    }

    /// Same basis on every measured site of a given local dimension.
    pub fn uniform(dims: &SiteDims, i: usize, j: usize, by_dim: impl Fn(usize) -> Option<CMat>, label: impl Into<String>) -> Result<Self> {
        let bases = (0..dims.n_sites())
            .map(|k| {
                if k == i || k == j {
                    Ok(None)
                } else {
                    by_dim(dims.dim(k))
                        .map(Some)
                        .ok_or_else(|| Error::InvalidSpec(format!("no basis for local dimension {}", dims.dim(k))))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let mut s = Self::new(dims, i, j, bases, label)?;
        s.uniform = true;
        Ok(s)
    }

    /// Basis chosen per site from `(site, local dimension)`.
    pub fn from_fn(dims: &SiteDims, i: usize, j: usize, f: impl Fn(usize, usize) -> Option<CMat>, label: impl Into<String>) -> Result<Self> {
        let bases = (0..dims.n_sites())
            .map(|k| {
                if k == i || k == j {
                    Ok(None)
                } else {
                    f(k, dims.dim(k)).map(Some).ok_or_else(|| Error::InvalidSpec(format!("no basis for site {k}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dims, i, j, bases, label)
    }

    pub fn named(dims: &SiteDims, i: usize, j: usize, basis: NamedBasis) -> Result<Self> {
        Self::uniform(dims, i, j, |d| basis.unitary(d), basis.id())
    }

    pub fn standard(dims: &SiteDims, i: usize, j: usize) -> Result<Self> {
        Self::named(dims, i, j, NamedBasis::Standard)
    }

    pub fn kept(&self) -> (usize, usize) {
        self.kept
    }

    pub fn n_sites(&self) -> usize {
        self.bases.len()
    }

    pub fn basis(&self, site: usize) -> Option<&CMat> {
        self.bases[site].as_ref()
    }

    pub fn measured_sites(&self) -> Vec<usize> {
        (0..self.bases.len()).filter(|k| self.bases[*k].is_some()).collect()
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub(crate) fn is_identity_at(&self, site: usize) -> bool {
        self.bases[site].as_ref().is_some_and(|u| {
            let n = u.nrows();
            (u - CMat::identity(n, n)).iter().all(|z| z.norm() < 1e-15)
        })
    }

    pub(crate) fn check_dims(&self, dims: &SiteDims) -> Result<()> {
        if dims.n_sites() != self.bases.len() {
            return Err(Error::DimMismatch(format!("strategy for {} sites, state has {}", self.bases.len(), dims.n_sites())));
        }
        for (k, b) in self.bases.iter().enumerate() {
            if let Some(u) = b {
                if u.nrows() != dims.dim(k) {
                    return Err(Error::DimMismatch(format!("basis on site {k} has dimension {}", u.nrows())));
                }
            }
        }
        Ok(())
    }
}

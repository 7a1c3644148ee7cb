use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use super::{PropagationError, EPS0, MU0};

/// Aluminium, S/m.
pub const DEFAULT_CONDUCTIVITY: f64 = 3.5e7;

const RESIDUAL_TOL: f64 = 1e-8;
/// Smallest acceptable reciprocal condition number of a mode matrix.
const MIN_RCOND: f64 = 1e-12;

/// An equivalent round conductor above ground. Lengths in m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conductor {
    pub x: f64,
    pub h: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineElectricalModel {
    pub conductors: Vec<Conductor>,
    /// Series impedance per unit length, Ω/m.
    pub z: DMatrix<Complex64>,
    /// Shunt admittance per unit length, S/m.
    pub y: DMatrix<Complex64>,
    /// Capacitance per unit length, F/m.
    pub c: DMatrix<f64>,
    pub frequency: f64,
    pub rho: f64,
    /// Complex penetration depth of the earth return, m.
    pub p: Complex64,
}

/// `√(ρ / (jωμ₀))`, principal branch (positive real part).
pub fn penetration_depth(rho: f64, frequency: f64) -> Complex64 {
    let omega = 2.0 * PI * frequency;
    (Complex64::new(rho, 0.0) / Complex64::new(0.0, omega * MU0)).sqrt()
}

fn check_positive(v: f64, name: &'static str) -> Result<(), PropagationError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(PropagationError::Parameter(name))
    }
}

fn check_layout(conductors: &[Conductor]) -> Result<(), PropagationError> {
    if conductors.is_empty() {
        return Err(PropagationError::Geometry("no conductors".into()));
    }
    for (i, c) in conductors.iter().enumerate() {
        if !(c.radius > 0.0 && c.radius.is_finite()) {
            return Err(PropagationError::Geometry(format!("conductor {i} radius {} is not positive", c.radius)));
        }
        if !(c.h > c.radius && c.x.is_finite() && c.h.is_finite()) {
            return Err(PropagationError::Geometry(format!("conductor {i} at height {} m is not above ground", c.h)));
        }
        for (j, o) in conductors.iter().enumerate().skip(i + 1) {
            let dist = (c.x - o.x).hypot(c.h - o.h);
            if dist <= c.radius + o.radius {
                return Err(PropagationError::Geometry(format!(
                    "conductors {i} and {j} overlap ({dist} m between centres)"
                )));
            }
        }
    }
    Ok(())
}

/// Per-unit-length Z, Y and C of the layout.
///
/// C inverts the Maxwell potential coefficients with perfect-ground images.
/// Z is the external inductance with images displaced by the complex depth
/// `P` plus the high-frequency internal impedance `Rs(1+j)/(2πr)`.
pub fn build_line_model(
    conductors: &[Conductor],
    frequency: f64,
    rho: f64,
    conductivity: f64,
) -> Result<LineElectricalModel, PropagationError> {
    check_positive(frequency, "frequency")?;
    check_positive(rho, "earth resistivity")?;
    check_positive(conductivity, "conductor conductivity")?;
    check_layout(conductors)?;

    let k = conductors.len();
    let omega = 2.0 * PI * frequency;
    let p = penetration_depth(rho, frequency);
    let rs = (omega * MU0 / (2.0 * conductivity)).sqrt();
    let jwl = Complex64::new(0.0, omega * MU0 / (2.0 * PI));

    let mut pot = DMatrix::<f64>::zeros(k, k);
    let mut z = DMatrix::<Complex64>::zeros(k, k);
    for (i, a) in conductors.iter().enumerate() {
        for (j, b) in conductors.iter().enumerate() {
            let dx = a.x - b.x;
            if i == j {
                pot[(i, j)] = (2.0 * a.h / a.radius).ln() / (2.0 * PI * EPS0);
                let internal = Complex64::new(rs, rs) / (2.0 * PI * a.radius);
                z[(i, j)] = jwl * (2.0 * (a.h + p) / a.radius).ln() + internal;
            } else {
                let direct = dx.hypot(a.h - b.h);
                pot[(i, j)] = (dx.hypot(a.h + b.h) / direct).ln() / (2.0 * PI * EPS0);
                let image = (dx * dx + (a.h + b.h + 2.0 * p).powi(2)).sqrt();
                z[(i, j)] = jwl * (image / direct).ln();
            }
        }
    }
    let c = pot
        .cholesky()
        .ok_or_else(|| PropagationError::Geometry("potential coefficient matrix is not positive definite".into()))?
        .inverse();
    let c = (&c + c.transpose()) * 0.5;
    let y = c.map(|v| Complex64::new(0.0, omega * v));
    Ok(LineElectricalModel { conductors: conductors.to_vec(), z, y, c, frequency, rho, p })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModalDecomposition {
    /// Voltage modes: columns are eigenvectors of ZY.
    pub m: DMatrix<Complex64>,
    /// Current modes: columns are eigenvectors of YZ, ordered like `m`.
    pub n: DMatrix<Complex64>,
    pub lambda: Vec<Complex64>,
    pub gamma: Vec<Complex64>,
    pub alpha: Vec<f64>,
    /// Relative off-diagonal residuals of the ZY and YZ diagonalizations.
    pub residual_zy: f64,
    pub residual_yz: f64,
}

/// Eigenpairs of ZY and YZ with `γ = √λ`, `Re γ ≥ 0`.
pub fn modal_decompose(model: &LineElectricalModel) -> Result<ModalDecomposition, PropagationError> {
    let zy = &model.z * &model.y;
    let yz = &model.y * &model.z;
    ModalDecomposition::from_products(&zy, &yz)
}

impl ModalDecomposition {
    pub fn from_products(zy: &DMatrix<Complex64>, yz: &DMatrix<Complex64>) -> Result<Self, PropagationError> {
        if !zy.is_square() || zy.shape() != yz.shape() || zy.nrows() == 0 {
            return Err(PropagationError::DefectiveMatrix("ZY and YZ must be square and equally sized".into()));
        }
        let (m, lambda) = eigen(zy)?;
        let (n_raw, mu) = eigen(yz)?;

        let scale = zy.norm().max(f64::MIN_POSITIVE);
        let mut used = vec![false; mu.len()];
        let mut n = DMatrix::<Complex64>::zeros(n_raw.nrows(), n_raw.ncols());
        for (k, l) in lambda.iter().enumerate() {
            let (best, dist) = (0..mu.len())
                .filter(|&j| !used[j])
                .map(|j| (j, (mu[j] - l).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("as many eigenvalues as columns");
            if dist > RESIDUAL_TOL * scale {
                return Err(PropagationError::DefectiveMatrix(format!(
                    "spectra of ZY and YZ differ by {dist:e} at eigenvalue {l}"
                )));
            }
            used[best] = true;
            n.set_column(k, &n_raw.column(best));
        }

        let residual_zy = off_diagonal_residual(zy, &m, &lambda)?;
        let residual_yz = off_diagonal_residual(yz, &n, &lambda)?;
        if residual_zy > RESIDUAL_TOL || residual_yz > RESIDUAL_TOL {
            return Err(PropagationError::DefectiveMatrix(format!(
                "diagonalization residual {:e} exceeds {RESIDUAL_TOL:e}",
                residual_zy.max(residual_yz)
            )));
        }
        let gamma: Vec<Complex64> = lambda.iter().map(|l| l.sqrt()).collect();
        let alpha = gamma.iter().map(|g| g.re).collect();
        Ok(ModalDecomposition { m, n, lambda, gamma, alpha, residual_zy, residual_yz })
    }
}

/// `‖V⁻¹AV − diag(λ)‖_F / ‖A‖_F`.
fn off_diagonal_residual(
    a: &DMatrix<Complex64>,
    v: &DMatrix<Complex64>,
    lambda: &[Complex64],
) -> Result<f64, PropagationError> {
    let sv = v.singular_values();
    let rcond = sv.min() / sv.max();
    if !(rcond >= MIN_RCOND) {
        return Err(PropagationError::DefectiveMatrix(format!(
            "eigenvectors are nearly dependent (reciprocal condition {rcond:e})"
        )));
    }
    let inv = v
        .clone()
        .try_inverse()
        .ok_or_else(|| PropagationError::DefectiveMatrix("eigenvector matrix is singular".into()))?;
    let mut d = inv * a * v;
    for (k, l) in lambda.iter().enumerate() {
        d[(k, k)] -= l;
    }
    let r = d.norm() / a.norm().max(f64::MIN_POSITIVE);
    if r.is_finite() {
        Ok(r)
    } else {
        Err(PropagationError::DefectiveMatrix("non-finite residual".into()))
    }
}

/// Complex Schur form `A = Q T Q*`, then eigenvectors of the triangular
/// factor by back-substitution. Columns are normalized to unit length.
fn eigen(a: &DMatrix<Complex64>) -> Result<(DMatrix<Complex64>, Vec<Complex64>), PropagationError> {
    if a.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(PropagationError::DefectiveMatrix("matrix has non-finite entries".into()));
    }
    let k = a.nrows();
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| PropagationError::DefectiveMatrix("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let lambda: Vec<Complex64> = (0..k).map(|i| t[(i, i)]).collect();
    let tiny = f64::EPSILON * t.norm().max(f64::MIN_POSITIVE);

    let mut v = DMatrix::<Complex64>::zeros(k, k);
    for col in 0..k {
        let l = lambda[col];
        let mut x = DVector::<Complex64>::zeros(k);
        x[col] = Complex64::new(1.0, 0.0);
        for row in (0..col).rev() {
            let mut num = Complex64::new(0.0, 0.0);
            for j in row + 1..=col {
                num += t[(row, j)] * x[j];
            }
            let den = t[(row, row)] - l;
            x[row] = if den.norm() > tiny {
                -num / den
            } else if num.norm() <= tiny * x.norm() {
                Complex64::new(0.0, 0.0)
            } else {
                -num / Complex64::new(tiny, 0.0)
            };
        }
        let y = &q * x;
        let norm = y.norm();
        v.set_column(col, &(y / Complex64::new(norm, 0.0)));
    }
    Ok((v, lambda))
}

//! Closed forms with their published coefficients. `log` is base 10, `ln` natural.

use super::{BundleConfig, ModelError, ModelId};
use crate::expr::DENOMINATOR_GUARD;

type R = Result<f64, ModelError>;

struct Guard(ModelId);

impl Guard {
    fn log(&self, x: f64, what: &str) -> R {
        if x > 0.0 {
            Ok(x.log10())
        } else {
            Err(self.fail(format!("log of non-positive {what} = {x}")))
        }
    }

    fn ln(&self, x: f64, what: &str) -> R {
        if x > 0.0 {
            Ok(x.ln())
        } else {
            Err(self.fail(format!("ln of non-positive {what} = {x}")))
        }
    }

    fn div(&self, num: f64, den: f64, what: &str) -> R {
        if den.abs() < DENOMINATOR_GUARD {
            Err(self.fail(format!("zero denominator {what} = {den}")))
        } else {
            Ok(num / den)
        }
    }

    fn fail(&self, reason: String) -> ModelError {
        ModelError::Domain { model: self.0.slug(), reason }
    }
}

pub(super) fn an_discovered_3(b: &BundleConfig) -> R {
    let g = Guard(ModelId::AnDiscovered3);
    let (e, n, d) = (b.e, b.n, b.d);
    Ok(0.0878 * e * n + 72.3 * g.log(d, "d")? - g.div(648.7, e * g.log(e, "E")?, "E·log E")?)
}

pub(super) fn an_discovered_4(b: &BundleConfig) -> R {
    let g = Guard(ModelId::AnDiscovered4);
    let (e, n, d) = (b.e, b.n, b.d);
    Ok(0.093 * e * n + 55.02 * g.log(d, "d")? - g.div(591.0, e * d * d, "E·d²")? - g.div(5448.0, e * e, "E²")?)
}

pub(super) fn an_discovered_5(b: &BundleConfig) -> R {
    let g = Guard(ModelId::AnDiscovered5);
    let (e, n, d) = (b.e, b.n, b.d);
    Ok(0.0116 * n * n * d - g.div(102.4 * n, e * g.ln(e, "E")? + d * d, "E·ln E + d²")? + 9.216 * d
        + 19.13 * g.ln(n, "n")?
        - g.div(677.3, e, "E")?)
}

pub(super) fn an_poly_baseline(b: &BundleConfig) -> R {
    let g = Guard(ModelId::AnPolyBaseline);
    Ok(1.022 * b.n + 10.4 * b.d + 30.839 - g.div(933.633, b.e, "E")?)
}

pub(super) fn an_bpa(b: &BundleConfig) -> R {
    let g = Guard(ModelId::AnBpa);
    Ok(120.0 * g.log(b.e, "E")? + 55.0 * g.log(b.d, "d")? + 26.4 * g.log(b.n, "n")? - 128.4)
}

pub(super) fn an_enel(b: &BundleConfig) -> R {
    let g = Guard(ModelId::AnEnel);
    Ok(85.0 * g.log(b.e, "E")? + 45.0 * g.log(b.d, "d")? + 18.0 * g.log(b.n, "n")? - 71.0)
}

pub(super) fn an_ireq(b: &BundleConfig) -> R {
    let g = Guard(ModelId::AnIreq);
    Ok(72.0 * g.log(b.e, "E")? + 45.81 * g.log(b.d, "d")? + 22.71 * g.log(b.n, "n")? - 57.6)
}

pub(super) fn an_fgh(b: &BundleConfig) -> R {
    let g = Guard(ModelId::AnFgh);
    Ok(2.0 * b.e + 45.0 * g.log(b.d, "d")? + 18.0 * g.log(b.n, "n")? - 0.3)
}

pub(super) fn an_ge(b: &BundleConfig) -> R {
    let g = Guard(ModelId::AnGe);
    Ok(-g.div(655.0, b.e, "E")? + 44.0 * g.log(b.d, "d")? + 20.0 * g.log(b.n, "n")? + 67.9)
}

/// Taken as printed: the constant 24.8 carries no `log n` factor.
pub(super) fn an_epri(b: &BundleConfig) -> R {
    let g = Guard(ModelId::AnEpri);
    Ok(120.0 * g.log(b.e, "E")? + 54.0 * g.log(b.d, "d")? + 24.8 - 126.0)
}

pub(super) fn an_pysr(b: &BundleConfig) -> R {
    let g = Guard(ModelId::AnPysr);
    Ok(1.58 * b.n * b.d - 2.97 * b.n + 55.6 - g.div(915.0, b.e, "E")?)
}

pub(super) fn an_dso(b: &BundleConfig) -> R {
    let g = Guard(ModelId::AnDso);
    let (e, n, d) = (b.e, b.n, b.d);
    Ok(-2.65 * g.div(e * d, n * n, "n²")? + 62.8 * d - g.div(64.8 * d, g.log(e, "E")?, "log E")? + 0.47 * n - 17.0)
}

pub(super) fn ri_discovered_3(b: &BundleConfig) -> R {
    let g = Guard(ModelId::RiDiscovered3);
    let (e, n, d) = (b.e, b.n, b.d);
    Ok(45.6 * g.log(e, "E")? - g.div(819.5, d * (e - 1.0), "d·(E − 1)")? + 0.07 * n * d * d)
}

pub(super) fn ri_discovered_4(b: &BundleConfig) -> R {
    let g = Guard(ModelId::RiDiscovered4);
    let (e, n, d) = (b.e, b.n, b.d);
    Ok(-g.div(117.2 * n, n * n * d - d, "n²d − d")? - g.div(133.5 * n, e + n * d * d, "E + nd²")? + 98.68
        - g.div(629.7, e, "E")?)
}

pub(super) fn ri_discovered_5(b: &BundleConfig) -> R {
    let g = Guard(ModelId::RiDiscovered5);
    let (e, n, d) = (b.e, b.n, b.d);
    Ok(-g.div(45.87 * e, n * n * n * d, "n³d")? + 4.499 * d + 72.88 - g.div(522.2, e, "E")?
        - g.div(543.4, e * d, "E·d")?)
}

pub(super) fn ri_poly_baseline(b: &BundleConfig) -> R {
    let g = Guard(ModelId::RiPolyBaseline);
    Ok(6.51 * b.d + 10.287 * g.log(b.n, "n")? + 55.22 - g.div(671.7, b.e, "E")?)
}

pub(super) fn ri_bpa(b: &BundleConfig) -> R {
    let g = Guard(ModelId::RiBpa);
    Ok(120.0 * g.log(b.e / 15.0, "E/15")? + 40.0 * g.log(b.d / 4.0, "d/4")? + 37.02)
}

pub(super) fn ri_cigre(b: &BundleConfig) -> R {
    Ok(3.5 * b.e + 6.0 * b.d - 40.69)
}

/// Branch constant switches from 81.1 to 86.1 above eight subconductors.
pub(super) fn ri_epri(b: &BundleConfig) -> R {
    let g = Guard(ModelId::RiEpri);
    let k = if b.n <= 8.0 { 81.1 } else { 86.1 };
    Ok(-g.div(580.0, b.e, "E")? + 38.0 * g.log(b.d / 3.8, "d/3.8")? + k)
}

pub(super) fn ri_cispr(b: &BundleConfig) -> R {
    let g = Guard(ModelId::RiCispr);
    Ok(70.0 - g.div(580.0, b.e, "E")? + 35.0 * g.log(b.d, "d")? - 10.0 * g.log(b.n, "n")?)
}

/// Bundle correction: 0 for one subconductor, 3.7 for two, 6 from three up.
pub fn ireq_k(n: f64) -> f64 {
    if n < 2.0 {
        0.0
    } else if n < 3.0 {
        3.7
    } else {
        6.0
    }
}

pub(super) fn ri_ireq(b: &BundleConfig) -> R {
    let g = Guard(ModelId::RiIreq);
    Ok(-90.25 + 92.42 * g.log(b.e, "E")? + 43.03 * g.log(b.d, "d")? - ireq_k(b.n))
}

pub(super) fn ri_pysr(b: &BundleConfig) -> R {
    let g = Guard(ModelId::RiPysr);
    let inner = (b.n - 6.35) * b.e;
    if b.n <= 6.35 {
        return Err(g.fail(format!("requires n > 6.35, got {}", b.n)));
    }
    let outer = g.ln(inner, "(n − 6.35)·E")?;
    Ok(0.51 * (b.d + 158.407) * g.ln(outer, "ln((n − 6.35)·E)")? - 613.0)
}

pub(super) fn ri_dso(b: &BundleConfig) -> R {
    let g = Guard(ModelId::RiDso);
    let (e, n, d) = (b.e, b.n, b.d);
    Ok(11.1 * g.div(e, n, "n")? + 18.2 * d - 68.6 * g.div(d, n, "n")? + 0.99 * n - 16.1)
}

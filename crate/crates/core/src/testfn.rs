//! Polynomial harmonic test functions for the weak-form residual probes.
//!
//! `psi_n^x = (x + iz)^n / n!`, `psi_n^y = (y + iz)^n / n!`,
//! `psi_n^xy = (x + iy)^n / n!`, and `x_plus_y = psi_n^x + psi_n^y`.
//! Horizontal coordinates are box-centred.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFamily {
    X,
    Y,
    Xy,
    XPlusY,
}

/// Which component of the complex residual is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Real,
    Imaginary,
}

impl Part {
    pub fn of(self, z: Complex64) -> f64 {
        match self {
            Part::Real => z.re,
            Part::Imaginary => z.im,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestFunctionSpec {
    pub family: TestFamily,
    pub n: u32,
    pub part: Part,
}

/// Partial derivatives of a test function at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PsiDerivatives {
    pub psi: Complex64,
    pub psi_x: Complex64,
    pub psi_y: Complex64,
    pub psi_z: Complex64,
    pub psi_zz: Complex64,
    pub psi_zx: Complex64,
    pub psi_zy: Complex64,
}

impl std::ops::Add for PsiDerivatives {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            psi: self.psi + o.psi,
            psi_x: self.psi_x + o.psi_x,
            psi_y: self.psi_y + o.psi_y,
            psi_z: self.psi_z + o.psi_z,
            psi_zz: self.psi_zz + o.psi_zz,
            psi_zx: self.psi_zx + o.psi_zx,
            psi_zy: self.psi_zy + o.psi_zy,
        }
    }
}

/// `w^(n-k) / (n-k)!`, the k-th derivative of `w^n / n!`.
fn falling(w: Complex64, n: u32, k: u32) -> Complex64 {
    if k > n {
        return Complex64::new(0.0, 0.0);
    }
    let p = n - k;
    let fact: f64 = (1..=p).map(f64::from).product();
    w.powu(p) / fact
}

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `(s + iz)^n / n!` in the plane of horizontal coordinate `s`.
fn vertical_plane(s: f64, z: f64, n: u32) -> (Complex64, Complex64, Complex64, Complex64) {
    let w = Complex64::new(s, z);
    let d0 = falling(w, n, 0);
    let d1 = falling(w, n, 1);
    let d2 = falling(w, n, 2);
    // d/ds = D, d/dz = iD
    (d0, d1, I * d1, -d2)
}

impl TestFunctionSpec {
    pub fn new(family: TestFamily, n: u32, part: Part) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig(
                "test function order must be >= 1".into(),
            ));
        }
        Ok(Self { family, n, part })
    }

    /// Derivatives at centred horizontal position `(x, y)` and height `z`.
    pub fn eval(&self, x: f64, y: f64, z: f64) -> PsiDerivatives {
        let n = self.n;
        let zero = Complex64::new(0.0, 0.0);
        let along = |s: f64, along_x: bool| {
            let (psi, ds, dz, dzz) = vertical_plane(s, z, n);
            // psi_zs = i D^2 w
            let dzs = I * falling(Complex64::new(s, z), n, 2);
            PsiDerivatives {
                psi,
                psi_x: if along_x { ds } else { zero },
                psi_y: if along_x { zero } else { ds },
                psi_z: dz,
                psi_zz: dzz,
                psi_zx: if along_x { dzs } else { zero },
                psi_zy: if along_x { zero } else { dzs },
            }
        };
        match self.family {
            TestFamily::X => along(x, true),
            TestFamily::Y => along(y, false),
            TestFamily::XPlusY => along(x, true) + along(y, false),
            TestFamily::Xy => {
                let w = Complex64::new(x, y);
                let d1 = falling(w, n, 1);
                PsiDerivatives {
                    psi: falling(w, n, 0),
                    psi_x: d1,
                    psi_y: I * d1,
                    ..Default::default()
                }
            }
        }
    }

    pub fn label(&self) -> String {
        let fam = match self.family {
            TestFamily::X => format!("psi{}x", self.n),
            TestFamily::Y => format!("psi{}y", self.n),
            TestFamily::Xy => format!("psi{}xy", self.n),
            TestFamily::XPlusY => format!("psi{}x+psi{}y", self.n, self.n),
        };
        let part = match self.part {
            Part::Real => "re",
            Part::Imaginary => "im",
        };
        format!("{fam}.{part}")
    }
}

/// The probe set audited on packet runs, both parts of each.
pub fn probe_set() -> Vec<TestFunctionSpec> {
    let fams = [
        (TestFamily::X, 1),
        (TestFamily::X, 2),
        (TestFamily::Y, 2),
        (TestFamily::Xy, 2),
        (TestFamily::X, 3),
        (TestFamily::XPlusY, 3),
    ];
    let mut out = Vec::new();
    for (family, n) in fams {
        for part in [Part::Real, Part::Imaginary] {
            out.push(TestFunctionSpec { family, n, part });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fd_check(spec: TestFunctionSpec, x: f64, y: f64, z: f64) {
        let h = 1e-5;
        let d = spec.eval(x, y, z);
        let f = |x, y, z| spec.eval(x, y, z).psi;
        let fz = |x, y, z| spec.eval(x, y, z).psi_z;
        let cd = |a: Complex64, b: Complex64| (a - b) / (2.0 * h);
        let close = |a: Complex64, b: Complex64| (a - b).norm() < 1e-6 * (1.0 + b.norm());
        assert!(close(cd(f(x + h, y, z), f(x - h, y, z)), d.psi_x));
        assert!(close(cd(f(x, y + h, z), f(x, y - h, z)), d.psi_y));
        assert!(close(cd(f(x, y, z + h), f(x, y, z - h)), d.psi_z));
        assert!(close(cd(fz(x, y, z + h), fz(x, y, z - h)), d.psi_zz));
        assert!(close(cd(fz(x + h, y, z), fz(x - h, y, z)), d.psi_zx));
        assert!(close(cd(fz(x, y + h, z), fz(x, y - h, z)), d.psi_zy));
    }

    #[test]
    fn first_order_x_function() {
        let s = TestFunctionSpec::new(TestFamily::X, 1, Part::Imaginary).unwrap();
        let d = s.eval(0.3, -0.2, 0.1);
        assert_eq!(d.psi, Complex64::new(0.3, 0.1));
        assert_eq!(d.psi_z, I);
        assert_eq!(d.psi_zz, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn order_zero_is_rejected() {
        assert!(TestFunctionSpec::new(TestFamily::Xy, 0, Part::Real).is_err());
    }

    #[test]
    fn probe_set_has_twelve_entries() {
        assert_eq!(probe_set().len(), 12);
    }

    proptest! {
        #[test]
        fn derivatives_match_finite_differences(
            fam in prop_oneof![Just(TestFamily::X), Just(TestFamily::Y), Just(TestFamily::Xy), Just(TestFamily::XPlusY)],
            n in 1u32..5, x in -2.0..2.0f64, y in -2.0..2.0f64, z in -1.0..0.2f64
        ) {
            fd_check(TestFunctionSpec { family: fam, n, part: Part::Real }, x, y, z);
        }

        #[test]
        fn functions_are_harmonic(
            fam in prop_oneof![Just(TestFamily::X), Just(TestFamily::Y), Just(TestFamily::Xy), Just(TestFamily::XPlusY)],
            n in 1u32..5, x in -2.0..2.0f64, y in -2.0..2.0f64, z in -1.0..0.2f64
        ) {
            let s = TestFunctionSpec { family: fam, n, part: Part::Real };
            let h = 1e-3;
            let f = |x, y, z| s.eval(x, y, z).psi;
            let lap = (f(x + h, y, z) + f(x - h, y, z) + f(x, y + h, z) + f(x, y - h, z)
                + f(x, y, z + h) + f(x, y, z - h) - f(x, y, z) * 6.0) / (h * h);
            prop_assert!(lap.norm() < 1e-5 * (1.0 + f(x, y, z).norm()));
        }
    }
}

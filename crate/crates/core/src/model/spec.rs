//! Serializable model descriptions and named sweep targets.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    from_rabi, from_three_ring, from_two_rabi, single_mode, symmetric, two_mode, QuadraticHamiltonian, RabiParams,
    ThreeRingParams,
};
use crate::error::{Error, Result};

/// Tagged description of every model the crate can build.
///
/// Complex values are written as a plain number, a `[re, im]` pair or an
/// `{"re": .., "im": ..}` object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// `ω a†a + (χ a² + h.c.)/2`.
    SingleMode {
        omega: f64,
        #[serde(with = "cplx")]
        chi: Complex64,
    },
    TwoMode {
        omega1: f64,
        omega2: f64,
        #[serde(with = "cplx", default)]
        chi1: Complex64,
        #[serde(with = "cplx", default)]
        chi2: Complex64,
        #[serde(with = "cplx", default)]
        lambda: Complex64,
        #[serde(with = "cplx", default)]
        g: Complex64,
    },
    Rabi {
        omega0: f64,
        delta: f64,
        eta: f64,
    },
    TwoRabi {
        omega1: f64,
        delta1: f64,
        g1: f64,
        omega2: f64,
        delta2: f64,
        g2: f64,
        #[serde(with = "cplx", default)]
        lambda: Complex64,
    },
    ThreeRing {
        omega: f64,
        delta: f64,
        g: f64,
        j_hop: f64,
        theta: f64,
    },
    Symmetric {
        n_modes: usize,
        omega: f64,
        #[serde(default)]
        chi: f64,
        #[serde(default)]
        lambda: f64,
        #[serde(default)]
        g: f64,
    },
    /// Explicit coefficient arrays; only the upper triangles of `lam` and `g`
    /// are read, the lower ones are filled in by symmetry.
    General {
        omega: Vec<f64>,
        #[serde(with = "cplx_vec")]
        chi: Vec<Complex64>,
        #[serde(with = "cplx_mat", default)]
        lam: Vec<Vec<Complex64>>,
        #[serde(with = "cplx_mat", default)]
        g: Vec<Vec<Complex64>>,
    },
}

impl ModelSpec {
    pub fn type_name(&self) -> &'static str {
        match self {
            ModelSpec::SingleMode { .. } => "single_mode",
            ModelSpec::TwoMode { .. } => "two_mode",
            ModelSpec::Rabi { .. } => "rabi",
            ModelSpec::TwoRabi { .. } => "two_rabi",
            ModelSpec::ThreeRing { .. } => "three_ring",
            ModelSpec::Symmetric { .. } => "symmetric",
            ModelSpec::General { .. } => "general",
        }
    }

    pub fn build(&self) -> Result<QuadraticHamiltonian> {
        let h = match self {
            ModelSpec::SingleMode { omega, chi } => single_mode(*omega, *chi),
            ModelSpec::TwoMode {
                omega1,
                omega2,
                chi1,
                chi2,
                lambda,
                g,
            } => two_mode(*omega1, *omega2, *chi1, *chi2, *lambda, *g),
            ModelSpec::Rabi { omega0, delta, eta } => from_rabi(RabiParams {
                omega0: *omega0,
                delta: *delta,
                eta: *eta,
            })?,
            ModelSpec::TwoRabi {
                omega1,
                delta1,
                g1,
                omega2,
                delta2,
                g2,
                lambda,
            } => from_two_rabi(
                RabiParams {
                    omega0: *omega1,
                    delta: *delta1,
                    eta: *g1,
                },
                RabiParams {
                    omega0: *omega2,
                    delta: *delta2,
                    eta: *g2,
                },
                *lambda,
            )?,
            ModelSpec::ThreeRing { .. } => from_three_ring(self.ring_params().unwrap())?,
            ModelSpec::Symmetric {
                n_modes,
                omega,
                chi,
                lambda,
                g,
            } => symmetric(*n_modes, *omega, *chi, *lambda, *g)?,
            ModelSpec::General { omega, chi, lam, g } => {
                let n = omega.len();
                let mut h = QuadraticHamiltonian::free(omega);
                if chi.len() != n {
                    return Err(Error::param("chi", format!("expected {n} entries")));
                }
                h.chi = chi.clone();
                for (name, m) in [("lam", lam), ("g", g)] {
                    if m.is_empty() {
                        continue;
                    }
                    if m.len() != n || m.iter().any(|r| r.len() != n) {
                        return Err(Error::param(name, format!("expected a {n}x{n} matrix")));
                    }
                    for i in 0..n {
                        for j in (i + 1)..n {
                            if name == "lam" {
                                h.set_rotating(i, j, m[i][j]);
                            } else {
                                h.set_counter_rotating(i, j, m[i][j]);
                            }
                        }
                    }
                }
                h
            }
        };
        h.ensure_valid()?;
        Ok(h)
    }

    pub fn ring_params(&self) -> Option<ThreeRingParams> {
        match *self {
            ModelSpec::ThreeRing {
                omega,
                delta,
                g,
                j_hop,
                theta,
            } => Some(ThreeRingParams {
                omega,
                delta,
                g,
                j_hop,
                theta,
            }),
            _ => None,
        }
    }

    /// Names accepted by [`ModelSpec::with_param`] (indexed names for
    /// `general` are listed in their `[i]` / `[i][j]` form).
    pub fn param_names(&self) -> Vec<String> {
        let fixed: &[&str] = match self {
            ModelSpec::SingleMode { .. } => &["omega", "chi"],
            ModelSpec::TwoMode { .. } => &["omega1", "omega2", "chi1", "chi2", "lambda", "g"],
            ModelSpec::Rabi { .. } => &["omega0", "delta", "eta"],
            ModelSpec::TwoRabi { .. } => &["omega1", "delta1", "g1", "omega2", "delta2", "g2", "lambda"],
            ModelSpec::ThreeRing { .. } => &["omega", "delta", "g", "j_hop", "theta"],
            ModelSpec::Symmetric { .. } => &["omega", "chi", "lambda", "g"],
            ModelSpec::General { .. } => &["omega[i]", "chi[i]", "lam[i][j]", "g[i][j]"],
        };
        fixed.iter().map(|s| s.to_string()).collect()
    }

    /// Current value of a named real parameter (magnitude for complex ones).
    pub fn param(&self, target: &str) -> Result<f64> {
        let mut probe = self.clone();
        let mut found = None;
        probe.visit(target, &mut |slot| {
            found = Some(match slot {
                Slot::Real(x) => *x,
                Slot::Complex(z) => z.norm(),
            })
        })?;
        found.ok_or_else(|| Error::UnknownTarget(target.to_string()))
    }

    /// Copy with one named parameter replaced.
    ///
    /// Complex parameters are set to `value · u`, where `u` is the unit phase
    /// of the current value (or `1` when it is zero), so sweeps run along a
    /// fixed direction in the complex plane.
    pub fn with_param(&self, target: &str, value: f64) -> Result<ModelSpec> {
        let mut out = self.clone();
        out.visit(target, &mut |slot| match slot {
            Slot::Real(x) => *x = value,
            Slot::Complex(z) => {
                let unit = if z.norm() > 0.0 {
                    *z / z.norm()
                } else {
                    Complex64::new(1.0, 0.0)
                };
                *z = unit * value;
            }
        })?;
        Ok(out)
    }

    fn visit(&mut self, target: &str, f: &mut dyn FnMut(Slot<'_>)) -> Result<()> {
        let unknown = || Error::UnknownTarget(target.to_string());
        match self {
            ModelSpec::SingleMode { omega, chi } => match target {
                "omega" => f(Slot::Real(omega)),
                "chi" => f(Slot::Complex(chi)),
                _ => return Err(unknown()),
            },
            ModelSpec::TwoMode {
                omega1,
                omega2,
                chi1,
                chi2,
                lambda,
                g,
            } => match target {
                "omega1" => f(Slot::Real(omega1)),
                "omega2" => f(Slot::Real(omega2)),
                "chi1" => f(Slot::Complex(chi1)),
                "chi2" => f(Slot::Complex(chi2)),
                "lambda" => f(Slot::Complex(lambda)),
                "g" => f(Slot::Complex(g)),
                _ => return Err(unknown()),
            },
            ModelSpec::Rabi { omega0, delta, eta } => match target {
                "omega0" => f(Slot::Real(omega0)),
                "delta" => f(Slot::Real(delta)),
                "eta" => f(Slot::Real(eta)),
                _ => return Err(unknown()),
            },
            ModelSpec::TwoRabi {
                omega1,
                delta1,
                g1,
                omega2,
                delta2,
                g2,
                lambda,
            } => match target {
                "omega1" => f(Slot::Real(omega1)),
                "delta1" => f(Slot::Real(delta1)),
                "g1" => f(Slot::Real(g1)),
                "omega2" => f(Slot::Real(omega2)),
                "delta2" => f(Slot::Real(delta2)),
                "g2" => f(Slot::Real(g2)),
                "lambda" => f(Slot::Complex(lambda)),
                _ => return Err(unknown()),
            },
            ModelSpec::ThreeRing {
                omega,
                delta,
                g,
                j_hop,
                theta,
            } => match target {
                "omega" => f(Slot::Real(omega)),
                "delta" => f(Slot::Real(delta)),
                "g" => f(Slot::Real(g)),
                "j_hop" => f(Slot::Real(j_hop)),
                "theta" => f(Slot::Real(theta)),
                _ => return Err(unknown()),
            },
            ModelSpec::Symmetric {
                omega, chi, lambda, g, ..
            } => match target {
                "omega" => f(Slot::Real(omega)),
                "chi" => f(Slot::Real(chi)),
                "lambda" => f(Slot::Real(lambda)),
                "g" => f(Slot::Real(g)),
                _ => return Err(unknown()),
            },
            ModelSpec::General { omega, chi, lam, g } => {
                let (name, idx) = parse_indexed(target).ok_or_else(unknown)?;
                let n = omega.len();
                match (name, idx.as_slice()) {
                    ("omega", [i]) if *i < n => f(Slot::Real(&mut omega[*i])),
                    ("chi", [i]) if *i < chi.len() => f(Slot::Complex(&mut chi[*i])),
                    ("lam", [i, j]) | ("g", [i, j]) if i < j && *j < n => {
                        let m = if name == "lam" { lam } else { g };
                        if m.is_empty() {
                            *m = vec![vec![Complex64::new(0.0, 0.0); n]; n];
                        }
                        let row = m.get_mut(*i).ok_or_else(unknown)?;
                        let slot = row.get_mut(*j).ok_or_else(unknown)?;
                        f(Slot::Complex(slot))
                    }
                    _ => return Err(unknown()),
                }
            }
        }
        Ok(())
    }
}

enum Slot<'a> {
    Real(&'a mut f64),
    Complex(&'a mut Complex64),
}

/// `"lam[0][1]"` -> `("lam", [0, 1])`.
fn parse_indexed(target: &str) -> Option<(&str, Vec<usize>)> {
    let open = target.find('[')?;
    let (name, mut rest) = target.split_at(open);
    let mut idx = Vec::new();
    while !rest.is_empty() {
        let inner = rest.strip_prefix('[')?;
        let close = inner.find(']')?;
        idx.push(inner[..close].trim().parse().ok()?);
        rest = &inner[close + 1..];
    }
    Some((name, idx))
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CplxRepr {
    Real(f64),
    Pair([f64; 2]),
    Object {
        re: f64,
        #[serde(default)]
        im: f64,
    },
}

impl From<CplxRepr> for Complex64 {
    fn from(r: CplxRepr) -> Self {
        match r {
            CplxRepr::Real(x) => Complex64::new(x, 0.0),
            CplxRepr::Pair([re, im]) => Complex64::new(re, im),
            CplxRepr::Object { re, im } => Complex64::new(re, im),
        }
    }
}

impl From<&Complex64> for CplxRepr {
    fn from(z: &Complex64) -> Self {
        if z.im == 0.0 {
            CplxRepr::Real(z.re)
        } else {
            CplxRepr::Pair([z.re, z.im])
        }
    }
}

mod cplx {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
        CplxRepr::from(z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Complex64, D::Error> {
        Ok(CplxRepr::deserialize(d)?.into())
    }
}

mod cplx_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
        let r: Vec<CplxRepr> = v.iter().map(CplxRepr::from).collect();
        r.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Complex64>, D::Error> {
        Ok(Vec::<CplxRepr>::deserialize(d)?.into_iter().map(Into::into).collect())
    }
}

mod cplx_mat {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &[Vec<Complex64>], s: S) -> std::result::Result<S::Ok, S::Error> {
        let r: Vec<Vec<CplxRepr>> = m.iter().map(|row| row.iter().map(CplxRepr::from).collect()).collect();
        r.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<Complex64>>, D::Error> {
        Ok(Vec::<Vec<CplxRepr>>::deserialize(d)?
            .into_iter()
            .map(|row| row.into_iter().map(Into::into).collect())
            .collect())
    }
}

//! Norms on the plane: built-ins and tabulated boundary norms.

use crate::beta::NormTable;

use super::ContinuumError;

/// A norm on R², evaluated on vectors (usually boundary normals).
#[derive(Clone, Debug)]
pub enum Norm {
    Euclidean,
    L1,
    Linf,
    /// A positive multiple of another norm.
    Scaled(f64, Box<Norm>),
    /// Piecewise-linear-in-angle interpolation of an estimated boundary
    /// norm; square-symmetric and exactly homogeneous by construction.
    Table(NormTable),
}

impl Norm {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Norm::Euclidean => (x * x + y * y).sqrt(),
            Norm::L1 => x.abs() + y.abs(),
            Norm::Linf => x.abs().max(y.abs()),
            Norm::Scaled(c, inner) => c * inner.eval(x, y),
            Norm::Table(t) => t.eval(x, y),
        }
    }

    /// All supported norms are invariant under the symmetries of the square
    /// lattice, which lets surface energy use the edge-vector form
    /// interchangeably with the normal form.
    pub fn is_square_symmetric(&self) -> bool {
        true
    }

    /// Parse a builtin name, e.g. `euclid`, `l1`, `linf`, `euclid*2.5`.
    pub fn parse_builtin(name: &str) -> Result<Norm, ContinuumError> {
        let (base, scale) = match name.split_once('*') {
            Some((b, s)) => {
                let c: f64 = s
                    .parse()
                    .map_err(|_| ContinuumError::Argument(format!("bad norm scale {s}")))?;
                if c.is_nan() || c <= 0.0 {
                    return Err(ContinuumError::Argument(
                        "norm scale must be positive".into(),
                    ));
                }
                (b, Some(c))
            }
            None => (name, None),
        };
        let norm = match base {
            "euclid" | "euclidean" | "l2" => Norm::Euclidean,
            "l1" => Norm::L1,
            "linf" => Norm::Linf,
            other => {
                return Err(ContinuumError::Argument(format!(
                    "unknown builtin norm {other}"
                )))
            }
        };
        Ok(match scale {
            Some(c) => Norm::Scaled(c, Box::new(norm)),
            None => norm,
        })
    }
}

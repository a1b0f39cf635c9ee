use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The four norm-based string-stability criteria.
///
/// | id | disturbance side                         | error side                          |
/// |----|------------------------------------------|-------------------------------------|
/// | 1  | `sum_s sum_k (sum_n |d|^p dt)^(q/p)`     | `sum_n |e_j|^p dt` for each `j`      |
/// | 2  | same as 1                                | `sum_k (sum_n |e_k|^p dt)^(q/p)`     |
/// | 3  | `sum_n |d_{k,s}|^p dt` for each `k, s`   | `sum_n |e_j|^p dt` for each `j`      |
/// | 4  | `|d_{k,s}(t)| / dt^s` for each `k, s, t` | `|e_j(t)|` for each `j, t`           |
///
/// Disturbances are normalized by `dt^s` on the disturbance side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "definition", rename_all = "kebab-case")]
pub enum StabilityCriterion {
    /// `l_{p,q}`
    VectorDisturbance { p: u32, q: u32 },
    /// `(l_p, l_q)`
    Summed { p: u32, q: u32 },
    /// `(l_p, l_inf)`
    PerVehicle { p: u32 },
    /// `(l_inf, l_inf)`
    Bibo,
}

impl StabilityCriterion {
    /// Builds a criterion from its definition number and exponents. `q` is
    /// ignored for definition 3, both for definition 4.
    pub fn from_parts(definition_id: u8, p: u32, q: u32) -> Result<Self> {
        let positive = |name: &str, v: u32| {
            if v >= 1 {
                Ok(v)
            } else {
                Err(Error::Parameter(format!(
                    "{name} must be a positive integer for definition {definition_id}, got {v}"
                )))
            }
        };
        match definition_id {
            1 => Ok(Self::VectorDisturbance {
                p: positive("p", p)?,
                q: positive("q", q)?,
            }),
            2 => Ok(Self::Summed {
                p: positive("p", p)?,
                q: positive("q", q)?,
            }),
            3 => Ok(Self::PerVehicle {
                p: positive("p", p)?,
            }),
            4 => Ok(Self::Bibo),
            other => Err(Error::Parameter(format!(
                "definition must be 1, 2, 3 or 4, got {other}"
            ))),
        }
    }

    pub fn id(&self) -> u8 {
        match self {
            Self::VectorDisturbance { .. } => 1,
            Self::Summed { .. } => 2,
            Self::PerVehicle { .. } => 3,
            Self::Bibo => 4,
        }
    }

    pub fn p(&self) -> Option<u32> {
        match *self {
            Self::VectorDisturbance { p, .. } | Self::Summed { p, .. } | Self::PerVehicle { p } => Some(p),
            Self::Bibo => None,
        }
    }

    pub fn q(&self) -> Option<u32> {
        match *self {
            Self::VectorDisturbance { q, .. } | Self::Summed { q, .. } => Some(q),
            _ => None,
        }
    }

    /// Degree of homogeneity of the disturbance norm in the amplitude.
    pub fn amplitude_degree(&self) -> u32 {
        match *self {
            Self::VectorDisturbance { q, .. } | Self::Summed { q, .. } => q,
            Self::PerVehicle { p } => p,
            Self::Bibo => 1,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match *self {
            Self::VectorDisturbance { p, q } | Self::Summed { p, q } if p == 0 || q == 0 => Err(
                Error::Parameter(format!("p and q must be positive, got p={p}, q={q}")),
            ),
            Self::PerVehicle { p: 0 } => Err(Error::Parameter("p must be positive".into())),
            _ => Ok(()),
        }
    }

    /// Short label such as `def1(p=2,q=2)`.
    pub fn label(&self) -> String {
        match *self {
            Self::VectorDisturbance { p, q } => format!("def1(p={p},q={q})"),
            Self::Summed { p, q } => format!("def2(p={p},q={q})"),
            Self::PerVehicle { p } => format!("def3(p={p})"),
            Self::Bibo => "def4".to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parts_round_trip() {
        for (id, p, q) in [(1, 2, 2), (2, 1, 3), (3, 2, 0), (4, 0, 0)] {
            let c = StabilityCriterion::from_parts(id, p, q).unwrap();
            assert_eq!(c.id(), id);
        }
        assert_eq!(StabilityCriterion::from_parts(3, 2, 9).unwrap().q(), None);
    }

    #[test]
    fn invalid_parts_are_rejected() {
        assert!(StabilityCriterion::from_parts(1, 0, 2).is_err());
        assert!(StabilityCriterion::from_parts(2, 2, 0).is_err());
        assert!(StabilityCriterion::from_parts(3, 0, 1).is_err());
        assert!(StabilityCriterion::from_parts(5, 2, 2).is_err());
        assert!(StabilityCriterion::Summed { p: 0, q: 1 }.validate().is_err());
    }

    #[test]
    fn degrees() {
        assert_eq!(StabilityCriterion::VectorDisturbance { p: 2, q: 3 }.amplitude_degree(), 3);
        assert_eq!(StabilityCriterion::PerVehicle { p: 4 }.amplitude_degree(), 4);
        assert_eq!(StabilityCriterion::Bibo.amplitude_degree(), 1);
    }
}

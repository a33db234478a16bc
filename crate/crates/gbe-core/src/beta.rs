use core::fmt;

use crate::error::{invalid, Error};

/// Dyson index of a Gaussian ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Beta {
    /// GOE.
    Orthogonal,
    /// GUE.
    Unitary,
    /// GSE.
    Symplectic,
}

impl Beta {
    pub fn value(self) -> u32 {
        match self {
            Beta::Orthogonal => 1,
            Beta::Unitary => 2,
            Beta::Symplectic => 4,
        }
    }
}

impl TryFrom<u32> for Beta {
    type Error = Error;

    fn try_from(v: u32) -> Result<Self, Error> {
        match v {
            1 => Ok(Beta::Orthogonal),
            2 => Ok(Beta::Unitary),
            4 => Ok(Beta::Symplectic),
            _ => Err(invalid(alloc::format!("beta must be 1, 2 or 4 (got {v})"))),
        }
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

use std::fmt;
use std::str::FromStr;

use super::{MatIndex, MatRing, MatSet};
use crate::error::{Error, Result};
use crate::field::Felt;

/// A named slice of `M_n(F_q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stratum {
    All,
    Gl,
    Sl,
    Rank(usize),
    Det(Felt),
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stratum::All => write!(f, "ALL"),
            Stratum::Gl => write!(f, "GL"),
            Stratum::Sl => write!(f, "SL"),
            Stratum::Rank(m) => write!(f, "RANK({m})"),
            Stratum::Det(a) => write!(f, "DET({a})"),
        }
    }
}

impl FromStr for Stratum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_uppercase();
        let arg = |prefix: &str| -> Option<Result<u32>> {
            s.strip_prefix(prefix)
                .and_then(|r| r.strip_prefix('('))
                .and_then(|r| r.strip_suffix(')'))
                .map(|v| v.trim().parse::<u32>().map_err(|_| Error::Parse(format!("bad stratum argument in {s:?}"))))
        };
        match s.as_str() {
            "ALL" => return Ok(Stratum::All),
            "GL" => return Ok(Stratum::Gl),
            "SL" => return Ok(Stratum::Sl),
            _ => {}
        }
        if let Some(m) = arg("RANK") {
            return Ok(Stratum::Rank(m? as usize));
        }
        if let Some(a) = arg("DET") {
            return Ok(Stratum::Det(Felt(a?)));
        }
        Err(Error::Parse(format!("unknown stratum {s:?}")))
    }
}

impl MatRing {
    fn validate(&self, stratum: Stratum) -> Result<()> {
        match stratum {
            Stratum::Rank(m) if m > self.n() => {
                Err(Error::StratumOutOfRange(format!("rank {m} exceeds n = {}", self.n())))
            }
            Stratum::Det(a) if a.0 >= self.q() => {
                Err(Error::StratumOutOfRange(format!("determinant {a} is not in F_{}", self.q())))
            }
            _ => Ok(()),
        }
    }

    pub fn in_stratum(&self, i: MatIndex, stratum: Stratum) -> bool {
        match stratum {
            Stratum::All => true,
            Stratum::Gl => !self.det_idx(i).is_zero(),
            Stratum::Sl => self.det_idx(i) == Felt::ONE,
            Stratum::Rank(m) => self.rank_idx(i) == m,
            Stratum::Det(a) => self.det_idx(i) == a,
        }
    }

    /// Every matrix of the stratum, once each, in increasing index order.
    pub fn enumerate(&self, stratum: Stratum) -> Result<impl Iterator<Item = MatIndex> + '_> {
        self.validate(stratum)?;
        Ok(self.all_indices().filter(move |&i| self.in_stratum(i, stratum)))
    }

    pub fn stratum_set(&self, stratum: Stratum) -> Result<MatSet> {
        Ok(MatSet::from_indices(self, self.enumerate(stratum)?))
    }
}

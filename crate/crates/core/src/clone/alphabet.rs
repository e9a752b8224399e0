use std::fmt;
use std::str::FromStr;

use super::CloneError;

/// A ranked alphabet `[n₁, …, n_l]`. Letters are numbered from 1.
#[derive(
    Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
#[serde(transparent)]
pub struct RankedAlphabet {
    arities: Vec<usize>,
}

impl RankedAlphabet {
    pub fn new(arities: impl Into<Vec<usize>>) -> RankedAlphabet {
        RankedAlphabet {
            arities: arities.into(),
        }
    }

    pub fn arities(&self) -> &[usize] {
        &self.arities
    }

    pub fn len(&self) -> usize {
        self.arities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arities.is_empty()
    }

    /// Arity of letter `j` (1-based).
    pub fn arity(&self, j: usize) -> Option<usize> {
        j.checked_sub(1).and_then(|k| self.arities.get(k)).copied()
    }

    pub fn letters(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.arities.iter().enumerate().map(|(k, &a)| (k + 1, a))
    }
}

impl fmt::Display for RankedAlphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, a) in self.arities.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", a)?;
        }
        write!(f, "]")
    }
}

/// Accepts `[0, 1]`, `0 1` or `0,1`.
impl FromStr for RankedAlphabet {
    type Err = CloneError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s.trim().trim_start_matches('[').trim_end_matches(']');
        let arities = body
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|p| !p.is_empty())
            .map(|p| {
                p.parse::<usize>().map_err(|_| {
                    CloneError::Parse(format!("arity `{}` is not a natural number", p))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RankedAlphabet { arities })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_common_forms() {
        for s in ["[0, 1]", "0 1", "0,1", " [0,1] "] {
            assert_eq!(
                s.parse::<RankedAlphabet>().unwrap(),
                RankedAlphabet::new(vec![0, 1])
            );
        }
        assert_eq!("[]".parse::<RankedAlphabet>().unwrap().len(), 0);
        assert!("[a]".parse::<RankedAlphabet>().is_err());
    }

    #[test]
    fn letters_are_one_based() {
        let a = RankedAlphabet::new(vec![0, 2]);
        assert_eq!(a.arity(1), Some(0));
        assert_eq!(a.arity(2), Some(2));
        assert_eq!(a.arity(0), None);
        assert_eq!(a.to_string(), "[0,2]");
    }
}

//! Regularizations of the scales below the resolved range.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Space, State, Value};

/// How scales `n > N` are treated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegSpec {
    /// Every scale beyond `N` is zero at all times, including `t = 0`.
    Cutoff,
    /// Scale `N + 1` is pinned to a constant at all times; deeper scales are zero.
    ConstAt { value: Value },
    /// Scales `N + 1, N + 2, ...` start from the tail of the initial state and
    /// are advanced by the table once per `tau_N`.
    MapReg { table: RegTable },
}

impl RegSpec {
    pub fn unit() -> Self {
        RegSpec::ConstAt {
            value: Value::ONE_BIT,
        }
    }

    /// Number of input components beyond `N` the regularized flow reads.
    pub fn extra_depth(&self) -> usize {
        match self {
            RegSpec::MapReg { table } => table.depth(),
            _ => 0,
        }
    }

    pub fn validate(&self, space: Space) -> Result<()> {
        match self {
            RegSpec::Cutoff => Ok(()),
            RegSpec::ConstAt { value } if value.space() == space => Ok(()),
            RegSpec::ConstAt { value } => Err(Error::SpaceMismatch {
                expected: space.name(),
                found: value.space().name(),
            }),
            RegSpec::MapReg { table } if table.space() == space => Ok(()),
            RegSpec::MapReg { table } => Err(Error::SpaceMismatch {
                expected: space.name(),
                found: table.space().name(),
            }),
        }
    }
}

/// A finite-depth map on states: depth-`R` prefixes to depth-`R` prefixes,
/// deeper output components zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TableRepr", into = "TableRepr")]
pub struct RegTable {
    space: Space,
    depth: usize,
    entries: HashMap<Vec<Value>, Vec<Value>>,
}

#[derive(Serialize, Deserialize)]
struct TableRepr {
    space: Space,
    depth: usize,
    entries: Vec<(Vec<Value>, Vec<Value>)>,
}

impl RegTable {
    pub fn new(space: Space, depth: usize) -> Self {
        Self {
            space,
            depth,
            entries: HashMap::new(),
        }
    }

    /// Tabulates a bit map on all `2^depth` prefixes.
    pub fn from_bit_fn(depth: usize, f: impl Fn(&[u8]) -> Vec<u8>) -> Result<Self> {
        if depth > 20 {
            return Err(Error::OutOfRange(format!("table depth {depth} exceeds 20")));
        }
        let mut table = Self::new(Space::Bit, depth);
        for code in 0u32..(1 << depth) {
            let input: Vec<u8> = (0..depth).map(|i| (code >> (depth - 1 - i) & 1) as u8).collect();
            let output = f(&input);
            table.insert(
                input.iter().map(|&b| Value::bit(b)).collect(),
                output.iter().map(|&b| Value::bit(b)).collect(),
            )?;
        }
        Ok(table)
    }

    pub fn insert(&mut self, input: Vec<Value>, output: Vec<Value>) -> Result<()> {
        if input.len() != self.depth || output.len() > self.depth {
            return Err(Error::InvalidArgument(format!(
                "table entry lengths {} -> {} do not fit depth {}",
                input.len(),
                output.len(),
                self.depth
            )));
        }
        if let Some(v) = input.iter().chain(&output).find(|v| v.space() != self.space) {
            return Err(Error::SpaceMismatch {
                expected: self.space.name(),
                found: v.space().name(),
            });
        }
        self.entries.insert(input, output);
        Ok(())
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn apply(&self, a: &State) -> Result<State> {
        let key = a.take(self.depth);
        match self.entries.get(&key) {
            Some(out) => Ok(State::new(out.clone(), self.space.zero())),
            None => Err(Error::RegTableIncomplete {
                prefix: key.iter().map(ToString::to_string).collect::<Vec<_>>().join(","),
            }),
        }
    }
}

impl TryFrom<TableRepr> for RegTable {
    type Error = Error;

    fn try_from(repr: TableRepr) -> Result<Self> {
        let mut table = RegTable::new(repr.space, repr.depth);
        for (i, o) in repr.entries {
            table.insert(i, o)?;
        }
        Ok(table)
    }
}

impl From<RegTable> for TableRepr {
    fn from(t: RegTable) -> Self {
        let mut entries: Vec<_> = t.entries.into_iter().collect();
        entries.sort();
        TableRepr {
            space: t.space,
            depth: t.depth,
            entries,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_entry_is_reported() {
        let mut t = RegTable::new(Space::Bit, 1);
        t.insert(vec![Value::ZERO_BIT], vec![Value::ONE_BIT]).unwrap();
        assert_eq!(t.apply(&State::zero(Space::Bit)).unwrap(), State::bits(&[1]));
        assert!(matches!(
            t.apply(&State::bits(&[1])),
            Err(Error::RegTableIncomplete { .. })
        ));
    }

    #[test]
    fn table_round_trips_through_json() {
        let t = RegTable::from_bit_fn(2, |a| vec![a[1], a[0]]).unwrap();
        let json = serde_json::to_string(&RegSpec::MapReg { table: t.clone() }).unwrap();
        let back: RegSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, RegSpec::MapReg { table: t });
    }
}

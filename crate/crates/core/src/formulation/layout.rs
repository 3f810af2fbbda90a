use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Decision-variable families. Each column of the QP is one
/// `(name, element id, hour)` triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarName {
    V,
    Theta,
    PLine,
    QLine,
    SLine,
    PInv,
    QInv,
    PPv,
    QPv,
    PWt,
    QWt,
    PCh,
    PV2g,
    /// Battery energy at the end of `hour`.
    E,
    PServed,
}

impl VarName {
    pub const ALL: [VarName; 15] = [
        VarName::V,
        VarName::Theta,
        VarName::PLine,
        VarName::QLine,
        VarName::SLine,
        VarName::PInv,
        VarName::QInv,
        VarName::PPv,
        VarName::QPv,
        VarName::PWt,
        VarName::QWt,
        VarName::PCh,
        VarName::PV2g,
        VarName::E,
        VarName::PServed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VarName::V => "v",
            VarName::Theta => "theta",
            VarName::PLine => "p_line",
            VarName::QLine => "q_line",
            VarName::SLine => "s_line",
            VarName::PInv => "p_inv",
            VarName::QInv => "q_inv",
            VarName::PPv => "p_pv",
            VarName::QPv => "q_pv",
            VarName::PWt => "p_wt",
            VarName::QWt => "q_wt",
            VarName::PCh => "p_ch",
            VarName::PV2g => "p_v2g",
            VarName::E => "E",
            VarName::PServed => "p_served",
        }
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VariableIndex {
    pub name: VarName,
    pub element: u32,
    pub hour: usize,
}

/// Bijection between [`VariableIndex`] triples and column numbers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Layout {
    columns: Vec<VariableIndex>,
    lookup: HashMap<VariableIndex, usize>,
}

impl Layout {
    pub(crate) fn push(&mut self, name: VarName, element: u32, hour: usize) -> usize {
        let key = VariableIndex {
            name,
            element,
            hour,
        };
        let col = self.columns.len();
        let prev = self.lookup.insert(key, col);
        debug_assert!(prev.is_none(), "duplicate column {key:?}");
        self.columns.push(key);
        col
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column(&self, name: VarName, element: u32, hour: usize) -> Option<usize> {
        self.lookup
            .get(&VariableIndex {
                name,
                element,
                hour,
            })
            .copied()
    }

    pub(crate) fn col(&self, name: VarName, element: u32, hour: usize) -> usize {
        self.column(name, element, hour)
            .unwrap_or_else(|| panic!("no column {name} {element} {hour}"))
    }

    pub fn variable(&self, col: usize) -> VariableIndex {
        self.columns[col]
    }

    pub fn variables(&self) -> &[VariableIndex] {
        &self.columns
    }

    /// Number of columns per variable family.
    pub fn census(&self) -> Vec<(VarName, usize)> {
        VarName::ALL
            .iter()
            .map(|&n| (n, self.columns.iter().filter(|c| c.name == n).count()))
            .collect()
    }
}

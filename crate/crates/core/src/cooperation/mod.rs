//! Nested cooperative architectures.
//!
//! An architecture is either a basic agent or a node `cInt Topo(a1,...,an)`
//! that runs its `n >= 2` children for `c` cycles. After every cycle the
//! children exchange their best solutions along the edges of the topology.
//! Children may themselves be nodes, which gives the nesting depth.

mod engine;
mod parse;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::metaheuristics::AgentKind;

pub use engine::{leaf_seed, run, Cooperation, CoopError, RunOutcome, SyncEvent};
pub use parse::{parse_architecture, Macros, ParseArchError};

/// Migration topology among the children of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topology {
    Ring,
    Broadcast,
    Random,
}

impl Topology {
    pub fn code(self) -> &'static str {
        match self {
            Self::Ring => "Ri",
            Self::Broadcast => "Br",
            Self::Random => "Ra",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "Ri" => Some(Self::Ring),
            "Br" => Some(Self::Broadcast),
            "Ra" => Some(Self::Random),
            _ => None,
        }
    }

    /// Directed edges `(from, to)` over 0-based child indices, in ascending
    /// lexicographic order. `Random` draws `n` pairs with replacement and
    /// must be called again for every synchronization.
    pub fn edges<R: Rng + ?Sized>(self, n: usize, rng: &mut R) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = match self {
            Self::Ring => (0..n).map(|i| (i, (i + 1) % n)).collect(),
            Self::Broadcast => (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect(),
            Self::Random => (0..n).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect(),
        };
        edges.sort_unstable();
        edges
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ArchitectureSpec {
    Leaf(AgentKind),
    Node {
        cycles: u32,
        topology: Topology,
        children: Vec<ArchitectureSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("depth is defined for cooperative nodes only, got leaf {0}")]
    Leaf(AgentKind),
    #[error("a cooperative node needs at least 2 children, found {0}")]
    Arity(usize),
    #[error("cycle count must be positive")]
    ZeroCycles,
}

impl ArchitectureSpec {
    pub fn node(cycles: u32, topology: Topology, children: Vec<ArchitectureSpec>) -> Self {
        Self::Node {
            cycles,
            topology,
            children,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Self::Leaf(_))
    }

    /// Meta-cooperation degree: 0 when every child is a leaf, otherwise one
    /// more than the deepest child node.
    pub fn depth(&self) -> Result<usize, SpecError> {
        match self {
            Self::Leaf(k) => Err(SpecError::Leaf(*k)),
            Self::Node { children, .. } => Ok(children
                .iter()
                .filter_map(|c| c.depth().ok())
                .map(|d| d + 1)
                .max()
                .unwrap_or(0)),
        }
    }

    /// Checks arity and cycle counts throughout the tree.
    pub fn validate(&self) -> Result<(), SpecError> {
        match self {
            Self::Leaf(_) => Ok(()),
            Self::Node { cycles, children, .. } => {
                if *cycles == 0 {
                    return Err(SpecError::ZeroCycles);
                }
                if children.len() < 2 {
                    return Err(SpecError::Arity(children.len()));
                }
                children.iter().try_for_each(Self::validate)
            }
        }
    }

    /// Smallest total budget for which no per-agent slice floors to zero.
    /// Saturates at `u64::MAX` for absurdly deep trees.
    pub fn min_budget(&self) -> u64 {
        match self {
            Self::Leaf(_) => 1,
            Self::Node { cycles, children, .. } => {
                let inner = children.iter().map(Self::min_budget).max().unwrap_or(1);
                u64::from(*cycles)
                    .saturating_mul(children.len() as u64)
                    .saturating_mul(inner)
            }
        }
    }

    /// Number of basic agents in the tree.
    pub fn leaves(&self) -> usize {
        match self {
            Self::Leaf(_) => 1,
            Self::Node { children, .. } => children.iter().map(Self::leaves).sum(),
        }
    }
}

impl fmt::Display for ArchitectureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Leaf(k) => write!(f, "{k}"),
            Self::Node {
                cycles,
                topology,
                children,
            } => {
                write!(f, "{cycles}{topology}(")?;
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Canonical text form, without whitespace.
pub fn print_architecture(spec: &ArchitectureSpec) -> String {
    use alloc::string::ToString;
    spec.to_string()
}

impl core::str::FromStr for ArchitectureSpec {
    type Err = ParseArchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_architecture(s)
    }
}

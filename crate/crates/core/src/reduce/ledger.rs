//! Per-block attribution of a tour's length.
//!
//! A tour arc that is a base arc at its base weight is charged to the
//! block hosting it. Any other arc is a break and is split evenly between
//! the block owning the tail's out-slot and the block owning the head's
//! in-slot.

use super::{Block, ReduceError, ReducedInstance};
use crate::bounds::Ratio;
use crate::metric::Tour;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LedgerEntry {
    pub block: Block,
    #[serde(serialize_with = "ratio_str")]
    pub local: Ratio,
    /// Local length when every equation of the block holds.
    pub constant: i64,
}

impl LedgerEntry {
    pub fn slack(&self) -> Ratio {
        self.local - Ratio::from_integer(self.constant)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LengthLedger {
    pub entries: Vec<LedgerEntry>,
    pub tour_length: u64,
    pub base: i64,
}

impl LengthLedger {
    pub fn total(&self) -> Ratio {
        self.entries.iter().map(|e| e.local).sum()
    }

    pub fn constant_total(&self) -> i64 {
        self.entries.iter().map(|e| e.constant).sum()
    }

    /// `ℓ(σ) - base`.
    pub fn excess(&self) -> i64 {
        self.tour_length as i64 - self.base
    }

    pub fn entry(&self, b: Block) -> Option<&LedgerEntry> {
        self.entries.iter().find(|e| e.block == b)
    }

    /// Blocks whose local length exceeds their constant.
    pub fn over(&self) -> impl Iterator<Item = &LedgerEntry> {
        self.entries.iter().filter(|e| e.slack() > Ratio::from_integer(0))
    }
}

fn ratio_str<S: serde::Serializer>(r: &Ratio, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

pub fn audit_ledger(inst: &ReducedInstance, t: &Tour) -> Result<LengthLedger, ReduceError> {
    let length = inst.tour_length(t)?;
    let mut local: BTreeMap<Block, Ratio> = inst.blocks().into_iter().map(|b| (b, Ratio::from_integer(0))).collect();
    let half = Ratio::new(1, 2);
    for (u, v) in t.arcs() {
        let d = Ratio::from_integer(inst.metric.d(u, v) as i64);
        match inst.base_arc(u, v) {
            Some(a) if d == Ratio::from_integer(a.weight as i64) => *local.get_mut(&a.host).unwrap() += d,
            _ => {
                *local.get_mut(&inst.out_owner(u)).unwrap() += d * half;
                *local.get_mut(&inst.in_owner(v)).unwrap() += d * half;
            }
        }
    }
    let entries = local
        .into_iter()
        .map(|(block, local)| LedgerEntry {
            block,
            local,
            constant: inst.block_constant(block),
        })
        .collect();
    Ok(LengthLedger {
        entries,
        tour_length: length,
        base: inst.base(),
    })
}

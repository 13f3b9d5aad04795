//! Diagnostics over metered feeds: correlation between streams, entropy per
//! metering location and hour-of-week energy patterns.

mod correlation;
mod entropy;
mod hourwise;

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;

pub use correlation::{correlation_matrix, pearson, CorrelationMatrix};
pub use entropy::{knn_entropy, knn_entropy_of, knn_entropy_seeded, DEFAULT_JITTER_SEED, DEFAULT_K};
pub use hourwise::{hourwise_matrix, HourwiseMatrix};

use crate::error::{Error, Result};
use crate::hierarchy::MeterHierarchy;
use crate::seed::derive_seed;

/// Entropy per metered node, plus the nodes whose estimate failed.
#[derive(Debug, Default)]
pub struct EntropyByNode {
    pub bits: BTreeMap<String, f64>,
    pub errors: BTreeMap<String, Error>,
}

impl EntropyByNode {
    /// `node_id,entropy_bits`
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let e = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(["node_id", "entropy_bits"]).map_err(e)?;
        for (id, bits) in &self.bits {
            w.write_record([id.clone(), bits.to_string()]).map_err(e)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// kNN entropy of every node that carries a series. Jitter for each node is
/// seeded from its id, so results do not depend on evaluation order.
pub fn entropy_by_level(h: &MeterHierarchy, k: usize) -> EntropyByNode {
    let metered: Vec<_> = h
        .iter()
        .filter_map(|n| n.series().map(|s| (n.id().to_string(), s)))
        .collect();
    let results: Vec<(String, Result<f64>)> = metered
        .into_par_iter()
        .map(|(id, s)| {
            let r = knn_entropy_seeded(s, k, derive_seed(DEFAULT_JITTER_SEED, &id));
            (id, r)
        })
        .collect();
    let mut out = EntropyByNode::default();
    for (id, r) in results {
        match r {
            Ok(b) => {
                out.bits.insert(id, b);
            }
            Err(e) => {
                out.errors.insert(id, e);
            }
        }
    }
    out
}

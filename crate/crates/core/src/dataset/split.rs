use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::rng::CounterRng;

/// A seeded train/validation/test partition of corpus identifiers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub seed: u64,
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

/// `(train, val, test)` sizes for a corpus of `n` items: 30% (rounded up)
/// held out for testing, then 20% of the remainder (rounded to nearest) for
/// validation.
pub fn split_counts(n: usize) -> (usize, usize, usize) {
    let test = (3 * n).div_ceil(10);
    let rest = n - test;
    // rest / 5 never has a fractional part of exactly one half.
    let val = (rest + 2) / 5;
    (rest - val, val, test)
}

pub fn split_dataset(ids: &[String], seed: u64) -> Result<DatasetSplit, DatasetError> {
    if ids.is_empty() {
        return Err(DatasetError::EmptyCorpus);
    }
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(DatasetError::DuplicateId(id.clone()));
        }
    }
    let mut order = ids.to_vec();
    CounterRng::new(seed).shuffle(&mut order);
    let (_, val, test) = split_counts(ids.len());
    let train = order.split_off(test + val);
    let val_ids = order.split_off(test);
    Ok(DatasetSplit {
        seed,
        train,
        val: val_ids,
        test: order,
    })
}

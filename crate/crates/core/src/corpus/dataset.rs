//! Loading the three official partition files from one directory.

use std::path::{Path, PathBuf};

use super::record::{Record, Variant};
use super::split::SplitSpec;
use super::tsv::parse_liar;
use crate::error::{Error, Result};

/// Accepted file names per partition, in lookup order. The LIAR-Plus release
/// names its files with a `2` suffix.
const NAMES: [(&str, [&str; 4]); 3] = [
    (
        "train",
        ["train.tsv", "train2.tsv", "train.csv", "train2.csv"],
    ),
    (
        "validation",
        ["valid.tsv", "val.tsv", "val2.tsv", "valid2.tsv"],
    ),
    ("test", ["test.tsv", "test2.tsv", "test.csv", "test2.csv"]),
];

/// Paths of the train / validation / test files under `dir`.
pub fn locate_split_files(dir: impl AsRef<Path>) -> Result<[PathBuf; 3]> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(Error::Io {
            path: dir.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "data directory not found"),
        });
    }
    let find = |(part, names): &(&str, [&str; 4])| {
        names
            .iter()
            .map(|n| dir.join(n))
            .find(|p| p.is_file())
            .ok_or_else(|| Error::Io {
                path: dir.join(names[0]),
                source: std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("no {part} file (tried {})", names.join(", ")),
                ),
            })
    };
    Ok([find(&NAMES[0])?, find(&NAMES[1])?, find(&NAMES[2])?])
}

/// Concatenates the official partitions and returns the matching split.
pub fn load_official_splits(
    dir: impl AsRef<Path>,
    variant: Variant,
    seed: u64,
) -> Result<(Vec<Record>, SplitSpec)> {
    let [train, val, test] = locate_split_files(dir)?;
    let mut records = parse_liar(&train, variant)?;
    let n_train = records.len();
    records.extend(parse_liar(&val, variant)?);
    let n_val = records.len() - n_train;
    records.extend(parse_liar(&test, variant)?);
    let n_test = records.len() - n_train - n_val;
    let split = SplitSpec {
        seed,
        ..SplitSpec::contiguous(n_train, n_val, n_test)
    };
    Ok((records, split))
}

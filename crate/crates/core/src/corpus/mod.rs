//! LIAR / LIAR-Plus records: parsing, label collapse, imputation and splits.

mod dataset;
mod impute;
mod label;
mod record;
mod split;
mod tsv;

pub use dataset::{load_official_splits, locate_split_files};
pub use impute::{impute_missing, impute_record, ImputeStats, UNKNOWN};
pub use label::{to_binary, LabelBinary, LabelSix, LabelSpace};
pub use record::{CreditCounts, HistoryCounts, Record, Variant};
pub use split::{stratified_folds, stratified_folds_by_class, Fold, SplitManifest, SplitSpec};
pub use tsv::{
    format_row, parse_liar, parse_liar_str, parse_unlabeled, parse_unlabeled_str, write_tsv,
    write_tsv_string,
};

//! Tab-separated LIAR / LIAR-Plus reader and normalized writer.
//!
//! Rows are split on `\t` with no quoting or escaping. The LIAR-Plus
//! distribution prefixes every row with a running row number; rows with
//! that extra leading column are accepted and the number is discarded.

use std::fs;
use std::path::Path;

use super::label::LabelSix;
use super::record::{HistoryCounts, Record, Variant};
use crate::error::{Error, Result};

const COLUMN_NAMES: [&str; 15] = [
    "id",
    "label",
    "statement",
    "subject",
    "speaker",
    "job",
    "state",
    "party",
    "barely_true_count",
    "false_count",
    "half_true_count",
    "mostly_true_count",
    "pants_on_fire_count",
    "context",
    "justification",
];

pub fn parse_liar(path: impl AsRef<Path>, variant: Variant) -> Result<Vec<Record>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_liar_str(&text, variant, &path.display().to_string())
}

/// Parses TSV text; `file` only labels error messages.
pub fn parse_liar_str(text: &str, variant: Variant, file: &str) -> Result<Vec<Record>> {
    let mut records = Vec::new();
    for (i, line) in text.split('\n').enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        records.push(parse_row(line, variant, file, i + 1, true)?);
    }
    Ok(records)
}

/// Like [`parse_liar`], but the label column may be empty. Rows without a
/// label get `true` as a placeholder, which callers must not read.
pub fn parse_unlabeled(path: impl AsRef<Path>, variant: Variant) -> Result<Vec<Record>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_unlabeled_str(&text, variant, &path.display().to_string())
}

pub fn parse_unlabeled_str(text: &str, variant: Variant, file: &str) -> Result<Vec<Record>> {
    let mut records = Vec::new();
    for (i, line) in text.split('\n').enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        records.push(parse_row(line, variant, file, i + 1, false)?);
    }
    Ok(records)
}

fn parse_row(
    line: &str,
    variant: Variant,
    file: &str,
    row: usize,
    labelled: bool,
) -> Result<Record> {
    let err = |column: &str, message: String| Error::Parse {
        file: file.to_string(),
        row,
        column: column.to_string(),
        message,
    };

    let mut fields: Vec<&str> = line.split('\t').collect();
    let expected = variant.columns();
    if variant == Variant::LiarPlus && fields.len() == expected + 1 {
        fields.remove(0);
    }
    if fields.len() != expected {
        return Err(err(
            "*",
            format!("expected {expected} columns, found {}", fields.len()),
        ));
    }

    let label = if !labelled && fields[1].trim().is_empty() {
        LabelSix::True
    } else {
        fields[1]
            .parse::<LabelSix>()
            .map_err(|m| err(COLUMN_NAMES[1], m))?
    };
    let statement = fields[2].trim();
    if statement.is_empty() {
        return Err(err(COLUMN_NAMES[2], "empty statement".into()));
    }

    let mut counts = [None; 5];
    for (k, slot) in counts.iter_mut().enumerate() {
        let col = 8 + k;
        *slot = parse_count(fields[col]).map_err(|m| err(COLUMN_NAMES[col], m))?;
    }

    Ok(Record {
        id: fields[0].trim().to_string(),
        label,
        statement: statement.to_string(),
        subject: split_subjects(fields[3]),
        speaker: optional(fields[4]),
        job: optional(fields[5]),
        state: optional(fields[6]),
        party: optional(fields[7]),
        counts: HistoryCounts(counts),
        context: optional(fields[13]),
        justification: match variant {
            Variant::Liar => None,
            Variant::LiarPlus => Some(fields[14].trim().to_string()),
        },
    })
}

fn optional(field: &str) -> Option<String> {
    let t = field.trim();
    (!t.is_empty()).then(|| t.to_string())
}

fn split_subjects(field: &str) -> Vec<String> {
    field
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// Empty → missing. Accepts integers and integral decimals such as `3.0`.
fn parse_count(field: &str) -> std::result::Result<Option<f64>, String> {
    let t = field.trim();
    if t.is_empty() {
        return Ok(None);
    }
    let v: f64 = t
        .parse()
        .map_err(|_| format!("count {t:?} is not a number"))?;
    if !v.is_finite() || v < 0.0 || v.fract() != 0.0 {
        return Err(format!("count {t:?} is not a non-negative integer"));
    }
    Ok(Some(v))
}

fn format_count(v: Option<f64>) -> String {
    match v {
        None => String::new(),
        Some(v) if v.fract() == 0.0 && v.abs() < 1e15 => format!("{}", v as i64),
        Some(v) => format!("{v}"),
    }
}

/// Normalized row: no leading row number, subjects comma-joined, missing fields empty.
pub fn format_row(record: &Record, variant: Variant) -> String {
    let opt = |o: &Option<String>| o.clone().unwrap_or_default();
    let mut cols = vec![
        record.id.clone(),
        record.label.as_str().to_string(),
        record.statement.clone(),
        record.subject.join(","),
        opt(&record.speaker),
        opt(&record.job),
        opt(&record.state),
        opt(&record.party),
    ];
    cols.extend(record.counts.0.iter().map(|c| format_count(*c)));
    cols.push(opt(&record.context));
    if variant == Variant::LiarPlus {
        cols.push(opt(&record.justification));
    }
    cols.join("\t")
}

pub fn write_tsv_string(records: &[Record], variant: Variant) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&format_row(r, variant));
        out.push('\n');
    }
    out
}

pub fn write_tsv(path: impl AsRef<Path>, records: &[Record], variant: Variant) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_tsv_string(records, variant)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::LabelSix;

    const ROW: &str = "2635.json\tfalse\tSays the Annies List political group supports third-trimester abortions on demand.\tabortion\tdwayne-bohac\tState representative\tTexas\trepublican\t0\t1\t0\t0\t0\ta mailer";

    #[test]
    fn parses_liar_row() {
        let recs = parse_liar_str(ROW, Variant::Liar, "t.tsv").unwrap();
        assert_eq!(recs.len(), 1);
        let r = &recs[0];
        assert_eq!(r.id, "2635.json");
        assert_eq!(r.label, LabelSix::False);
        assert_eq!(r.subject, vec!["abortion"]);
        assert_eq!(r.speaker.as_deref(), Some("dwayne-bohac"));
        assert_eq!(r.counts.0[1], Some(1.0));
        assert_eq!(r.context.as_deref(), Some("a mailer"));
        assert_eq!(r.justification, None);
    }

    #[test]
    fn pants_fire_spelling() {
        let row = ROW.replacen("\tfalse\t", "\tpants-fire\t", 1);
        let recs = parse_liar_str(&row, Variant::Liar, "t.tsv").unwrap();
        assert_eq!(recs[0].label, LabelSix::PantsOnFire);
    }

    #[test]
    fn wrong_column_count_names_row() {
        let text = format!("{ROW}\na\tfalse\tstatement\n");
        match parse_liar_str(&text, Variant::Liar, "t.tsv") {
            Err(Error::Parse { row, message, .. }) => {
                assert_eq!(row, 2);
                assert!(message.contains("expected 14"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_label_and_count_name_column() {
        let row = ROW.replacen("\tfalse\t", "\tmaybe\t", 1);
        match parse_liar_str(&row, Variant::Liar, "t.tsv") {
            Err(Error::Parse { column, .. }) => assert_eq!(column, "label"),
            other => panic!("{other:?}"),
        }
        let row = ROW.replacen("\t0\t1\t", "\t0\tx\t", 1);
        match parse_liar_str(&row, Variant::Liar, "t.tsv") {
            Err(Error::Parse { column, .. }) => assert_eq!(column, "false_count"),
            other => panic!("{other:?}"),
        }
        let row = ROW.replacen("\t0\t1\t", "\t0\t1.5\t", 1);
        assert!(parse_liar_str(&row, Variant::Liar, "t.tsv").is_err());
    }

    #[test]
    fn empty_file_is_empty_list() {
        assert!(parse_liar_str("", Variant::LiarPlus, "e.tsv")
            .unwrap()
            .is_empty());
        assert!(parse_liar_str("\n\n", Variant::Liar, "e.tsv")
            .unwrap()
            .is_empty());
    }

    #[test]
    fn liar_plus_with_row_number_prefix() {
        let row = format!("0\t{ROW}\tThe group backs abortion rights only.");
        let recs = parse_liar_str(&row, Variant::LiarPlus, "t.tsv").unwrap();
        assert_eq!(recs[0].id, "2635.json");
        assert_eq!(
            recs[0].justification.as_deref(),
            Some("The group backs abortion rights only.")
        );
        let plain = format!("{ROW}\tj");
        let recs = parse_liar_str(&plain, Variant::LiarPlus, "t.tsv").unwrap();
        assert_eq!(recs[0].justification.as_deref(), Some("j"));
    }

    #[test]
    fn missing_fields_and_decimal_counts() {
        let row = "1.json\ttrue\tA claim.\teconomy, jobs\t\t\t\t\t1.0\t\t2\t0\t0\t\tjust";
        let r = &parse_liar_str(row, Variant::LiarPlus, "t.tsv").unwrap()[0];
        assert_eq!(r.subject, vec!["economy", "jobs"]);
        assert_eq!(r.speaker, None);
        assert_eq!(
            r.counts.0,
            [Some(1.0), None, Some(2.0), Some(0.0), Some(0.0)]
        );
        assert!(r.counts.has_missing());
        assert_eq!(r.context, None);
    }

    #[test]
    fn unlabeled_rows_accepted() {
        let row = "7.json\t\tSome claim.\t\t\t\t\t\t\t\t\t\t\t";
        assert!(parse_liar_str(row, Variant::Liar, "x").is_err());
        let recs = parse_unlabeled_str(row, Variant::Liar, "x").unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].statement, "Some claim.");
    }

    #[test]
    fn empty_statement_rejected() {
        let row = ROW.replacen(
            "Says the Annies List political group supports third-trimester abortions on demand.",
            "  ",
            1,
        );
        assert!(matches!(
            parse_liar_str(&row, Variant::Liar, "t.tsv"),
            Err(Error::Parse { ref column, .. }) if column == "statement"
        ));
    }
}

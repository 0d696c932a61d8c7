use super::stopwords::is_stop_word;

/// Lowercases, splits on whitespace, trims non-alphanumeric characters from
/// both ends of each token and drops stop words and empty tokens.
///
/// Intra-token hyphens, apostrophes and digits survive, so `covid-19` stays whole.
pub fn tokenize(s: &str) -> Vec<String> {
    s.to_lowercase()
        .split_whitespace()
        .filter_map(|raw| {
            let t = raw.trim_matches(|c: char| !c.is_alphanumeric());
            (!t.is_empty() && !is_stop_word(t)).then(|| t.to_string())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(tokenize("The Cat sat."), vec!["cat", "sat"]);
        assert!(tokenize("").is_empty());
        assert_eq!(
            tokenize("Says the ECONOMY grew"),
            vec!["says", "economy", "grew"]
        );
    }

    #[test]
    fn keeps_hyphens_and_digits() {
        assert_eq!(
            tokenize("(COVID-19) cases, 2020!"),
            vec!["covid-19", "cases", "2020"]
        );
        assert_eq!(tokenize("\"U.S.\" -- ..."), vec!["u.s"]);
    }

    proptest! {
        #[test]
        fn idempotent(s in "\\PC{0,80}") {
            let once = tokenize(&s);
            let twice = tokenize(&once.join(" "));
            prop_assert_eq!(once, twice);
        }
    }
}

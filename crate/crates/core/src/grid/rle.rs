//! Run-length CSV encoding of cell sets: a `start,end` header followed by
//! one inclusive index range per line. Lines starting with `#` are comments.

use std::fmt::Write;

use super::CellSet;
use crate::{Error, Result};

pub fn to_rle_csv(cells: &CellSet) -> String {
    let mut out = String::from("start,end\n");
    let s = cells.as_slice();
    let mut i = 0;
    while i < s.len() {
        let mut j = i;
        while j + 1 < s.len() && s[j + 1] == s[j] + 1 {
            j += 1;
        }
        writeln!(out, "{},{}", s[i], s[j]).expect("writing to a String");
        i = j + 1;
    }
    out
}

/// Parses the encoding produced by [`to_rle_csv`]; every index must be below `len`.
pub fn parse_rle_csv(text: &str, len: usize) -> Result<CellSet> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some("start,end") => {}
        other => {
            return Err(Error::Config(format!(
                "mask CSV must start with a start,end header, found {other:?}"
            )))
        }
    }
    let mut cells = Vec::new();
    for line in lines {
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| Error::Config(format!("malformed range line {line:?}")))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<usize>()
                .map_err(|e| Error::Config(format!("bad cell index {x:?}: {e}")))
        };
        let (start, end) = (parse(a)?, parse(b)?);
        if start > end || end >= len {
            return Err(Error::Config(format!(
                "range {start}..={end} is empty or exceeds the grid of {len} cells"
            )));
        }
        if cells.len() + (end - start) >= len {
            return Err(Error::Config("mask has more cells than the grid".into()));
        }
        cells.extend(start..=end);
    }
    Ok(CellSet::new(cells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn encodes_runs() {
        let cells = CellSet::new(vec![3, 4, 5, 9, 11, 12]);
        assert_eq!(to_rle_csv(&cells), "start,end\n3,5\n9,9\n11,12\n");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_rle_csv("3,5\n", 10).is_err());
        assert!(parse_rle_csv("start,end\n5,3\n", 10).is_err());
        assert!(parse_rle_csv("start,end\n5,10\n", 10).is_err());
        assert!(parse_rle_csv("start,end\n5\n", 10).is_err());
        assert!(parse_rle_csv("start,end\n0,9\n0,9\n", 10).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(cells in proptest::collection::btree_set(0usize..500, 0..80)) {
            let set = CellSet::new(cells.into_iter().collect());
            let back = parse_rle_csv(&to_rle_csv(&set), 500).unwrap();
            prop_assert_eq!(back, set);
        }
    }
}

//! Walk files: one walk per line as a whitespace-separated step list in
//! generator notation, `#` for comments.
//!
//! Step tokens use the element syntax of the configured group: tuples like
//! `(0,-2)`, shorthand like `e1^3` or `-e2`, Heisenberg letters `x y z`,
//! and free-group words like `aB`.

use anyhow::{anyhow, Result};
use bridgewalk::{Group, GroupElement};

pub fn parse_walk_file(group: &Group, text: &str) -> Result<Vec<Vec<GroupElement>>> {
    let mut walks = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let steps: Result<Vec<GroupElement>> = line
            .split_whitespace()
            .map(|tok| {
                group
                    .parse_element(tok)
                    .map_err(|e| anyhow!("line {}: {e}", lineno + 1))
            })
            .collect();
        walks.push(steps?);
    }
    Ok(walks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_steps_and_comments() {
        let g = Group::free_abelian(2);
        let text = "\
# a half-space walk
e1 e1 e2 -e1   # wanders back
(1,0) (0,-2)
";
        let walks = parse_walk_file(&g, text).unwrap();
        assert_eq!(walks.len(), 2);
        assert_eq!(walks[0].len(), 4);
        assert_eq!(walks[1][1], GroupElement::Vector(vec![0, -2]));
        assert!(parse_walk_file(&g, "e3").is_err());
    }
}

use std::fmt;

use rand::Rng;

use crate::error::SearchError;

/// Per-iteration flip probabilities for support classes 0, 1 and 2.
///
/// Rows are keyed by the iteration at which they take effect; the last row
/// extends to every later iteration. Mass left over after the three classes
/// means "no flip this iteration".
#[derive(Debug, Clone, PartialEq)]
pub struct FlipDistribution {
    rows: Vec<(usize, [f64; 3])>,
}

impl Default for FlipDistribution {
    /// Constant (0.55, 0.25, 0.10) with 0.10 residual.
    fn default() -> Self {
        FlipDistribution {
            rows: vec![(1, [0.55, 0.25, 0.10])],
        }
    }
}

impl FlipDistribution {
    pub fn new(mut rows: Vec<(usize, [f64; 3])>) -> Result<Self, SearchError> {
        if rows.is_empty() {
            return Err(SearchError::BadDistribution {
                row: 0,
                reason: "no rows".into(),
            });
        }
        rows.sort_by_key(|r| r.0);
        for (i, (iter, p)) in rows.iter().enumerate() {
            let bad = |reason: &str| SearchError::BadDistribution {
                row: i + 1,
                reason: reason.to_string(),
            };
            if i > 0 && rows[i - 1].0 == *iter {
                return Err(bad("duplicate iteration"));
            }
            if p.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(bad("probabilities must lie in [0, 1]"));
            }
            if p.iter().sum::<f64>() > 1.0 + 1e-12 {
                return Err(bad("p0 + p1 + p2 exceeds 1"));
            }
            if !(p[0] >= p[1] && p[1] >= p[2]) {
                return Err(bad("need p0 >= p1 >= p2"));
            }
        }
        Ok(FlipDistribution { rows })
    }

    /// Probabilities in effect at iteration `iter` (1-based).
    pub fn at(&self, iter: usize) -> [f64; 3] {
        let idx = self.rows.partition_point(|r| r.0 <= iter);
        self.rows[idx.saturating_sub(1)].1
    }

    /// Samples a class for iteration `iter`, or `None` for the residual mass.
    pub fn sample<R: Rng + ?Sized>(&self, iter: usize, rng: &mut R) -> Option<usize> {
        let p = self.at(iter);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (class, &pc) in p.iter().enumerate() {
            acc += pc;
            if u < acc {
                return Some(class);
            }
        }
        None
    }

    /// Reads the table format `iter p0 p1 p2`, one row per line; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, SearchError> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |reason: &str| SearchError::BadDistribution {
                row: i + 1,
                reason: reason.to_string(),
            };
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 {
                return Err(bad("expected `iter p0 p1 p2`"));
            }
            let iter: usize = parts[0].parse().map_err(|_| bad("iteration"))?;
            let mut p = [0.0; 3];
            for (slot, tok) in p.iter_mut().zip(&parts[1..]) {
                *slot = tok.parse().map_err(|_| bad("probability"))?;
            }
            rows.push((iter, p));
        }
        Self::new(rows)
    }
}

impl fmt::Display for FlipDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (iter, p) in &self.rows {
            writeln!(f, "{} {} {} {}", iter, p[0], p[1], p[2])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn last_row_extends() {
        let d = FlipDistribution::parse("31 0.5 0.3 0.1\n100 0.4 0.2 0.1\n").unwrap();
        assert_eq!(d.at(1), [0.5, 0.3, 0.1]);
        assert_eq!(d.at(99), [0.5, 0.3, 0.1]);
        assert_eq!(d.at(100), [0.4, 0.2, 0.1]);
        assert_eq!(d.at(10_000), [0.4, 0.2, 0.1]);
        assert_eq!(FlipDistribution::parse(&d.to_string()).unwrap(), d);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(FlipDistribution::parse("1 0.6 0.3 0.2").is_err());
        assert!(FlipDistribution::parse("1 0.1 0.3 0.2").is_err());
        assert!(FlipDistribution::parse("1 0.1 0.3").is_err());
        assert!(FlipDistribution::parse("1 0.3 0.2 0.1\n1 0.3 0.2 0.1").is_err());
        assert!(FlipDistribution::parse("").is_err());
    }

    #[test]
    fn default_satisfies_shape() {
        let p = FlipDistribution::default().at(40);
        assert!(p[0] >= p[1] && p[1] >= p[2]);
        assert!((1.0 - p.iter().sum::<f64>() - 0.10).abs() < 1e-12);
    }
}

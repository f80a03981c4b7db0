//! Plain-text lattice files.
//!
//! ```text
//! # U ⊕ U ⊕ U
//! rank 6
//! gram
//! 0 1 0 0 0 0
//! ...
//! period explicit
//! 1 1 0 0 0 0
//! 0 0 1/2 -3/4 0 0
//! ...
//! ```
//!
//! `period generic <seed>` replaces the three explicit rows. Blank lines and
//! `#` comments are ignored.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::form::BBFLattice;
use crate::period::Period;
use crate::rational::Q;

#[derive(Debug, Clone, PartialEq)]
pub enum PeriodSpec {
    Explicit([Vec<Q>; 3]),
    Generic(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeFile {
    pub lattice: BBFLattice,
    pub period: Option<PeriodSpec>,
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

impl LatticeFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap().trim()))
            .filter(|(_, l)| !l.is_empty());

        let (ln, first) = lines.next().ok_or(Error::Parse { line: 0, msg: "empty file".into() })?;
        let rank: usize = match first.split_whitespace().collect::<Vec<_>>()[..] {
            ["rank", r] => r.parse().or_else(|_| perr(ln, format!("bad rank {r:?}")))?,
            _ => return perr(ln, "expected `rank <n>`"),
        };
        match lines.next() {
            Some((_, "gram")) => {}
            Some((ln, _)) => return perr(ln, "expected `gram`"),
            None => return perr(ln, "missing gram block"),
        }
        let mut gram = Vec::with_capacity(rank);
        for _ in 0..rank {
            let (ln, l) = lines.next().ok_or(Error::Parse { line: ln, msg: "gram block too short".into() })?;
            let row: Vec<i64> = l
                .split_whitespace()
                .map(|t| t.parse::<i64>().or_else(|_| perr(ln, format!("bad integer {t:?}"))))
                .collect::<Result<_>>()?;
            if row.len() != rank {
                return perr(ln, format!("gram row has {} entries, expected {rank}", row.len()));
            }
            gram.push(row);
        }
        let lattice = BBFLattice::new(gram)?;

        let period = match lines.next() {
            None => None,
            Some((ln, l)) => match l.split_whitespace().collect::<Vec<_>>()[..] {
                ["period", "generic", s] => {
                    Some(PeriodSpec::Generic(s.parse().or_else(|_| perr(ln, format!("bad seed {s:?}")))?))
                }
                ["period", "explicit"] | ["period"] => {
                    let mut rows = Vec::with_capacity(3);
                    for _ in 0..3 {
                        let (ln, l) =
                            lines.next().ok_or(Error::Parse { line: ln, msg: "period block too short".into() })?;
                        let row: Vec<Q> = l
                            .split_whitespace()
                            .map(|t| Q::from_str(t).or_else(|_| perr(ln, format!("bad fraction {t:?}"))))
                            .collect::<Result<_>>()?;
                        if row.len() != rank {
                            return perr(ln, format!("period row has {} entries, expected {rank}", row.len()));
                        }
                        rows.push(row);
                    }
                    let [a, b, c]: [Vec<Q>; 3] = rows.try_into().unwrap();
                    Some(PeriodSpec::Explicit([a, b, c]))
                }
                _ => return perr(ln, "expected `period explicit` or `period generic <seed>`"),
            },
        };
        if let Some((ln, _)) = lines.next() {
            return perr(ln, "trailing content");
        }
        Ok(Self { lattice, period })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("rank {}\ngram\n", self.lattice.rank);
        for row in &self.lattice.gram {
            let r: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            s.push_str(&r.join(" "));
            s.push('\n');
        }
        match &self.period {
            None => {}
            Some(PeriodSpec::Generic(seed)) => s.push_str(&format!("period generic {seed}\n")),
            Some(PeriodSpec::Explicit(rows)) => {
                s.push_str("period explicit\n");
                for row in rows {
                    let r: Vec<String> = row.iter().map(|x| x.to_string()).collect();
                    s.push_str(&r.join(" "));
                    s.push('\n');
                }
            }
        }
        s
    }

    /// Resolves the period block, if any. Explicit rows must already be q-orthogonal.
    pub fn period(&self) -> Result<Option<Period>> {
        match &self.period {
            None => Ok(None),
            Some(PeriodSpec::Generic(seed)) => Period::generic(&self.lattice, *seed).map(Some),
            Some(PeriodSpec::Explicit(rows)) => Period::new(&self.lattice, rows.clone()).map(Some),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const U3: &str = "# three hyperbolic planes
rank 6
gram
0 1 0 0 0 0
1 0 0 0 0 0
0 0 0 1 0 0
0 0 1 0 0 0
0 0 0 0 0 1
0 0 0 0 1 0
period explicit
1 1 0 0 0 0
0 0 1 1 0 0
0 0 0 0 1/2 1   # norm 1
";

    #[test]
    fn parses_and_roundtrips() {
        let f = LatticeFile::parse(U3).unwrap();
        assert_eq!(f.lattice, BBFLattice::u3());
        let p = f.period().unwrap().unwrap();
        assert!(!p.is_equinormal());
        let again = LatticeFile::parse(&f.to_text()).unwrap();
        assert_eq!(again, f);
    }

    #[test]
    fn generic_period_line() {
        let text = "rank 2\ngram\n0 1\n1 0\nperiod generic 3\n";
        let f = LatticeFile::parse(text).unwrap();
        assert_eq!(f.period, Some(PeriodSpec::Generic(3)));
        // signature (1, 1) has no positive 3-plane
        assert!(f.period().is_err());
    }

    #[test]
    fn reports_line_numbers() {
        let bad = "rank 2\ngram\n0 1\n1 x\n";
        match LatticeFile::parse(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(LatticeFile::parse("").is_err());
        assert!(LatticeFile::parse("rank 2\ngram\n0 1\n1 0\nextra\n").is_err());
        assert!(LatticeFile::parse("rank 2\ngram\n1 1\n1 1\n").is_err());
    }
}

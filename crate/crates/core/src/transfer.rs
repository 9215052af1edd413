//! Transfer logs shared by schedules and both simulators.

use std::fmt::Write as _;

use crate::rational::{format_rational, Rational};

/// One file moving over one link.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transfer {
    pub demand: String,
    pub link: String,
    pub start: Rational,
    pub end: Rational,
}

/// `demand,link,start,end` rows in the given order followed by a
/// `# makespan` footer.
pub fn transfers_csv(transfers: &[Transfer], makespan: &Rational) -> String {
    let mut out = String::from("demand,link,start,end\n");
    for t in transfers {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            t.demand,
            t.link,
            format_rational(&t.start),
            format_rational(&t.end)
        );
    }
    let _ = writeln!(out, "# makespan {}", format_rational(makespan));
    out
}

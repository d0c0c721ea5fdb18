//! Small reference instances shared by tests, docs and the CLI.

/// Three unit edges from terminals 0, 1, 2 to a center 3 with `c = 2`.
pub const STAR: &str = "\
# unit star
ntb 4 3 3
t 0 1 2
r 1 1 1
c 3 2
e 0 3 1 1
e 1 3 1 1
e 2 3 1 1
";

/// Terminals 0, 1, 2 pairwise joined by unit edges.
pub const TRIANGLE: &str = "\
ntb 3 3 3
t 0 1 2
r 1 1 1
e 0 1 1 1
e 1 2 1 1
e 0 2 1 1
";

/// [`STAR`] with every requirement raised to 2 (infeasible).
pub const STAR_R2: &str = "\
ntb 4 3 3
t 0 1 2
r 2 2 2
c 3 2
e 0 3 1 1
e 1 3 1 1
e 2 3 1 1
";

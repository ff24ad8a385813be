/// Search limits shared by the brute-force and bounded searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    /// Largest torsion group handled by exhaustive enumeration.
    pub oracle_cap: u64,
    /// Largest lattice rank accepted by the isometry search and by realization.
    pub rank_bound: usize,
    /// Largest absolute entry tried by bounded searches.
    pub entry_bound: i64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            oracle_cap: 4096,
            rank_bound: 8,
            entry_bound: 6,
        }
    }
}

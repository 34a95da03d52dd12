//! Numerical tolerances shared across the analyses.

/// Relative symmetry tolerance for operator blocks.
pub const SYMMETRY_REL: f64 = 1e-9;

/// Eigenvalues above `-PSD_REL * max(1, ||B||_F)` count as nonnegative.
pub const PSD_REL: f64 = 1e-9;

/// Eigenvalues with magnitude below `NULL_REL * max(1, ||B||)` span the kernel.
pub const NULL_REL: f64 = 1e-9;

/// Frobenius norm below which a block counts as the zero operator.
pub const ZERO_BLOCK: f64 = 1e-12;

/// Recession cone membership tolerance.
pub const MEMBERSHIP: f64 = 1e-8;

/// Threshold separating a genuine hypothesis violation from round-off.
pub const WITNESS: f64 = 1e-8;

/// Constraint values up to this count as feasible for points we construct.
pub const FEASIBLE: f64 = 1e-9;

/// Looser tolerance used when re-verifying reported witnesses.
pub const VERIFY: f64 = 1e-6;

/// Default feasibility tolerance used in reports.
pub const REPORT: f64 = 1e-8;

/// Default seed for every randomized search.
pub const DEFAULT_SEED: u64 = 0x5EED;

/// Number of multi-start trials in the randomized searches.
pub const MULTI_STARTS: usize = 32;

thread_local! {
    static SEED: std::cell::Cell<u64> = const { std::cell::Cell::new(DEFAULT_SEED) };
}

/// Seed for randomized searches on the current thread.
pub fn seed() -> u64 {
    SEED.with(|s| s.get())
}

/// Runs `f` with the randomized searches seeded from `seed`.
pub fn with_seed<T>(seed: u64, f: impl FnOnce() -> T) -> T {
    let prev = SEED.with(|s| s.replace(seed));
    let out = f();
    SEED.with(|s| s.set(prev));
    out
}

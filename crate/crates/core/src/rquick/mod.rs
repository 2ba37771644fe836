//! Hypercube quicksort (RQuick) over string runs and fixed-width keys.
//!
//! Each group of PEs runs its own cube concurrently: PEs beyond the largest
//! power of two fold their data in, every element moves to a random cube PE,
//! then `d` rounds split sub-cubes around a median-of-medians pivot. A final
//! step spreads the result evenly over all group PEs.

mod engine;
mod pairs;
mod strings;

pub use engine::{hypercube_sort, pivot_select, route_back, CubeData, Routes};
pub use pairs::DedupPair;
pub use strings::{rquick_sort, rquick_sort_tagged, PlainStrings, PlusStrings};

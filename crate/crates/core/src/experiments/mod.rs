//! Parameter sweeps, figure-data recovery, and verification campaigns.

mod campaigns;
mod council;
mod fig4;
mod margin;
mod sweep;

pub use campaigns::{
    random_graph, sample_orders, verify_monotone_p, verify_nonadaptive_bound, BoundCase, BoundReport,
    MonotoneCase, MonotoneReport,
};
pub use council::{
    council_bound, council_bound_check, fixed_neighbor_clique, fixed_neighbor_clique_y,
    fixed_neighbor_clique_y_explicit, fixed_neighbor_witness_search, CouncilReport, WitnessReport,
    SUBCLIQUE_SIZE,
};
pub use fig4::{recover_fig4, Fig4Instance, Fig4Report, FIG4_TARGET};
pub use margin::{indifference_margin, MarginReport};
pub use sweep::{axis, sweep, Cell, GridResult, SweepFamily, SweepSpec, RATIO_SENTINEL};

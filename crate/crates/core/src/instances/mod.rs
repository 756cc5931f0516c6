//! Synthetic instances, hardness gadgets, and instance files.

mod gadgets;
mod generators;
pub(crate) mod io;

pub use gadgets::{
    apply_cover, stalling_component, gen_quantile_gadget, gen_set_cover_gadget, quantile_padding,
    stalling_hierarchy, GadgetLayout, SetCoverSpec,
};
pub use generators::{generate, generate_network, sample_opinions, GeneratorSpec, OpinionDist, Topology};
pub use io::{
    from_json, instance_stats, load_edge_list_pair, load_instance, save_instance, to_json,
    InstanceFormat, InstanceStats,
};

//! Model files, run configuration, CSV emission and netlist export.

mod config;
mod model;
mod netlist;
mod table;

pub use config::RunConfig;
pub use model::{load_model, save_model, ModelFile, FORMAT_VERSION};
pub use netlist::{export_netlist, netlist_text, parse_netlist, NetLine, Netlist, NetlistOptions};
pub use table::{emit_csv, emit_matrix, emit_trace, read_csv};

mod factors;
mod synth;
mod tns;

pub use factors::{factor_from_csv, factor_to_csv, read_factors, read_meta, write_factors, RunMeta};
pub use synth::{generate_synthetic, planted_model, target_nnz, SynthSpec};
pub use tns::{parse_tns, parse_tns_str, write_tns, write_tns_string};

//! Seeded instance generators and matrix files.

mod generators;
mod io;

pub use generators::{
    gen_fisher_like, gen_mog, gen_planted, MogInstance, MogSpec, PlantedInstance, PlantedSpec,
    FISHER_MASS_FLOOR, FISHER_MASS_NOISE_LIMIT, VARIANCE_FLOOR,
};
pub use io::{
    binary_bytes, csv_string, parse_binary, parse_csv, read_binary, read_csv, read_matrix,
    write_binary, write_csv, write_matrix, MatrixFormat, BINARY_MAGIC, BINARY_VERSION,
};

//! The two-party communication game.
//!
//! Alice holds `A` and both parties know `W`. Alice sends the columns of `A`
//! chosen by weighted column subset selection together with the coefficient
//! matrix `X`; Bob rebuilds `W^{∘−1}∘((W∘A)|^S X)`. [`encode_css`] produces
//! that message bit-exactly. [`build_lb_instance`] plants a binary secret in
//! a block-diagonal mask instance where any finite-factor solution must
//! reveal it, which [`recover_secret`] does.

mod encode;
mod instance;

pub use encode::{
    ceil_log2, coeff_scale, encode_css, EncodedSolution, HEADER_BITS, MAGIC, VERSION,
};
pub use instance::{
    build_lb_instance, recover_secret, sparse_column_matrix, BlockDiagInstance, OffSupport,
};

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod experiment;
pub mod firstlaw;
pub mod infomeasures;
pub mod quadrature;
pub mod spectra;
pub mod validation;

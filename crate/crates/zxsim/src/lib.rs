pub mod bits;
pub mod circuit;
pub mod compile;
pub mod encoding;
pub mod lower;
pub mod oracle;
pub mod sampler;
pub mod simplify;
pub mod zx;

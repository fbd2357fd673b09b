pub mod channel;
pub mod config;
pub mod error;
pub mod matrix;
pub mod precoding;
pub mod rates;
pub mod cost;
pub mod outage;
pub mod sweep;

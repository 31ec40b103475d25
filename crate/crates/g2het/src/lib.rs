#![allow(clippy::needless_range_loop)]

pub mod circlefam;
pub mod exec;
pub mod exterior;
pub mod g2core;
pub mod gauge;
pub mod liecat;
pub mod nilansatz;
pub mod ring;
pub mod sasakian;
pub mod su3core;

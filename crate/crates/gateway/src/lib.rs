pub mod calibrate;
pub mod demo;
pub mod protocol;
pub mod server;
pub mod snapshot;

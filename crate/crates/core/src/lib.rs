//! Soft air-pocket force sensing for a growing vine robot: the sensor's
//! pressure/force model and calibration, an emulated multiplexed sensor
//! array, the contact-search controller and a planar growth simulation.

pub mod calibration;
pub mod contact_controller;
pub mod pocket_model;
pub mod sensor_hub;
pub mod vine_sim;

//! Single-switch scanning keyboard.
//!
//! A cursor steps through the options of the current level once per scan
//! period. Pressing the switch on a leaf emits its [`KeyAction`]; pressing it on
//! a group descends into that group's children. Time is passed in explicitly
//! (`dt_ms`), the state machine never reads a clock.

mod layout;
mod state;

pub use layout::{load_layout, KeyAction, LayoutError, ScanNode, DEFAULT_LAYOUT};
pub use state::{press, tick, ConfigError, ScanConfig, ScanState};

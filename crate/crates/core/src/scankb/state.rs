use serde::{Deserialize, Serialize};

use super::{KeyAction, ScanNode};

pub const MIN_SCAN_PERIOD_MS: u64 = 50;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("scan period must be at least {MIN_SCAN_PERIOD_MS} ms, got {0}")]
    PeriodTooShort(u64),
    #[error("max_cycles must be at least 1")]
    ZeroCycles,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanConfig {
    scan_period_ms: u64,
    max_cycles: u32,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            scan_period_ms: 1000,
            max_cycles: 2,
        }
    }
}

impl ScanConfig {
    pub fn new(scan_period_ms: u64, max_cycles: u32) -> Result<Self, ConfigError> {
        if scan_period_ms < MIN_SCAN_PERIOD_MS {
            return Err(ConfigError::PeriodTooShort(scan_period_ms));
        }
        if max_cycles == 0 {
            return Err(ConfigError::ZeroCycles);
        }
        Ok(Self {
            scan_period_ms,
            max_cycles,
        })
    }

    pub fn scan_period_ms(&self) -> u64 {
        self.scan_period_ms
    }

    pub fn max_cycles(&self) -> u32 {
        self.max_cycles
    }
}

/// Where the scanning cursor is.
///
/// `path` holds the child indices of the groups entered so far; empty means
/// the root's children are being scanned.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanState {
    pub path: Vec<usize>,
    pub cursor: usize,
    pub elapsed_ms: u64,
    pub cycles: u32,
}

impl ScanState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Options at the level currently being scanned.
    pub fn level<'a>(&self, layout: &'a ScanNode) -> &'a [ScanNode] {
        layout.descend(&self.path).map(ScanNode::children).unwrap_or(&[])
    }

    /// The option under the cursor.
    pub fn focused<'a>(&self, layout: &'a ScanNode) -> Option<&'a ScanNode> {
        self.level(layout).get(self.cursor)
    }

    /// Checks the structural invariants against `layout`: every path element
    /// names a group and the cursor is inside the current level.
    pub fn is_valid_for(&self, layout: &ScanNode) -> bool {
        let mut node = layout;
        for &i in &self.path {
            match node.children().get(i) {
                Some(child @ ScanNode::Group { .. }) => node = child,
                _ => return false,
            }
        }
        node.is_group() && self.cursor < node.children().len()
    }

    fn reset_level(&mut self) {
        self.cursor = 0;
        self.elapsed_ms = 0;
        self.cycles = 0;
    }
}

/// Advances simulated time by `dt_ms`.
///
/// The cursor moves once per full scan period, wrapping at the end of the
/// level. A wrap counts as a cycle; after `max_cycles` cycles inside a group
/// scanning returns to the parent level at its first option. At the root the
/// cycle count saturates and scanning simply continues.
pub fn tick(layout: &ScanNode, state: &ScanState, config: &ScanConfig, dt_ms: u64) -> ScanState {
    let mut s = state.clone();
    s.elapsed_ms += dt_ms;
    let period = config.scan_period_ms;
    let mut steps = s.elapsed_ms / period;
    s.elapsed_ms %= period;

    while steps > 0 {
        let n = s.level(layout).len().max(1) as u64;
        if s.path.is_empty() && s.cycles >= config.max_cycles {
            // nothing but wrapping left to do at a saturated root
            s.cursor = ((s.cursor as u64 + steps) % n) as usize;
            break;
        }
        steps -= 1;
        s.cursor += 1;
        if s.cursor as u64 == n {
            s.cursor = 0;
            s.cycles += 1;
            if s.cycles >= config.max_cycles {
                if s.path.pop().is_some() {
                    s.cycles = 0;
                } else {
                    s.cycles = config.max_cycles;
                }
            }
        }
    }
    s
}

/// Handles a switch press at the current cursor position.
///
/// On a leaf the leaf's action is returned and scanning restarts at the first
/// option of the same level. On a group scanning moves into the group.
pub fn press(layout: &ScanNode, state: &ScanState) -> (ScanState, Option<KeyAction>) {
    let mut s = state.clone();
    let action = match s.focused(layout) {
        Some(ScanNode::Leaf { action, .. }) => Some(action.clone()),
        Some(ScanNode::Group { .. }) => {
            s.path.push(s.cursor);
            None
        }
        None => None,
    };
    s.reset_level();
    (s, action)
}

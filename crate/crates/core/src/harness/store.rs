use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use crate::bits::BitString;
use crate::error::Result;
use crate::machine::{enumerate, EnumerationCache, MachineMode};

type Key = (MachineMode, BitString, usize, u64);
type Slot = Arc<Mutex<Option<Arc<EnumerationCache>>>>;

/// Enumerations shared by the checks of one run, optionally persisted to a
/// directory so later runs reuse them.
#[derive(Debug, Default)]
pub struct CacheStore {
    dir: Option<PathBuf>,
    slots: Mutex<HashMap<Key, Slot>>,
}

impl CacheStore {
    pub fn new(dir: Option<PathBuf>) -> Result<Self> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d)?;
        }
        Ok(Self { dir, slots: Mutex::new(HashMap::new()) })
    }

    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    /// File name used for a window inside the store directory.
    pub fn file_name(mode: MachineMode, condition: &BitString, max_len: usize, budget: u64) -> String {
        let cond = if condition.is_empty() { "none".to_string() } else { condition.to_string() };
        format!("{mode}-L{max_len}-t{budget}-c{cond}.cache")
    }

    /// The enumeration for a window: from memory, else from the directory if
    /// a file with a matching header is there, else computed (and saved).
    pub fn get(&self, mode: MachineMode, condition: &BitString, max_len: usize, budget: u64) -> Result<Arc<EnumerationCache>> {
        let slot = {
            let mut slots = self.slots.lock().unwrap();
            slots.entry((mode, condition.clone(), max_len, budget)).or_default().clone()
        };
        // Holding the slot while building makes concurrent callers for the
        // same window wait for one enumeration instead of repeating it.
        let mut guard = slot.lock().unwrap();
        if let Some(c) = guard.as_ref() {
            return Ok(c.clone());
        }
        let built = Arc::new(self.load_or_build(mode, condition, max_len, budget)?);
        *guard = Some(built.clone());
        Ok(built)
    }

    fn load_or_build(&self, mode: MachineMode, condition: &BitString, max_len: usize, budget: u64) -> Result<EnumerationCache> {
        let path = self.dir.as_ref().map(|d| d.join(Self::file_name(mode, condition, max_len, budget)));
        if let Some(p) = path.as_ref().filter(|p| p.exists()) {
            if let Ok(c) = EnumerationCache::load(p) {
                if c.mode() == mode && c.condition() == condition && c.max_len() == max_len && c.budget() == budget {
                    return Ok(c);
                }
            }
        }
        let c = enumerate(mode, condition, max_len, budget)?;
        if let Some(p) = path {
            c.save(p)?;
        }
        Ok(c)
    }
}

use std::fs::{self, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use crate::error::{runtime, CliError, CliResult};

pub const LOCK_FILE: &str = ".lock";

/// Exclusive writer lock on an artifact directory, released on drop. A lock
/// left by a process that no longer exists is taken over.
#[derive(Debug)]
pub struct DirLock {
    path: PathBuf,
}

fn holder_alive(pid: u32) -> bool {
    pid == std::process::id() || Path::new("/proc").join(pid.to_string()).exists()
}

impl DirLock {
    pub fn acquire(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| runtime(format!("creating {}: {e}", dir.display())))?;
        let path = dir.join(LOCK_FILE);
        for _ in 0..2 {
            match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(mut f) => {
                    write!(f, "{}", std::process::id()).map_err(runtime)?;
                    return Ok(Self { path });
                }
                Err(e) if e.kind() == ErrorKind::AlreadyExists => {
                    let holder = fs::read_to_string(&path).unwrap_or_default();
                    match holder.trim().parse::<u32>() {
                        Ok(pid) if holder_alive(pid) => {
                            return Err(CliError::Runtime(format!(
                                "{} is locked by process {pid}",
                                dir.display()
                            )))
                        }
                        _ => {
                            tracing::warn!(lock = %path.display(), holder = holder.trim(), "removing stale lock");
                            let _ = fs::remove_file(&path);
                        }
                    }
                }
                Err(e) => return Err(runtime(format!("creating {}: {e}", path.display()))),
            }
        }
        Err(CliError::Runtime(format!("could not lock {}", dir.display())))
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_writer_is_refused_and_stale_locks_are_replaced() {
        let dir = tempfile::tempdir().unwrap();
        let lock = DirLock::acquire(dir.path()).unwrap();
        // Same pid counts as alive, so a second acquire fails.
        assert!(DirLock::acquire(dir.path()).is_err());
        drop(lock);
        assert!(!dir.path().join(LOCK_FILE).exists());
        fs::write(dir.path().join(LOCK_FILE), "4294967295").unwrap();
        let _lock = DirLock::acquire(dir.path()).unwrap();
    }
}

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Outcome of compiling and simulating one design against its testbench.
///
/// `functional_pass` implies `syntax_pass`, and when the design compiled,
/// `functional_pass` holds exactly when no vector failed. Backends that run
/// an opaque testbench report a failed run as vector 0.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SimResult {
    pub syntax_pass: bool,
    pub functional_pass: bool,
    pub failed_vector_indices: Vec<usize>,
    pub log: String,
}

impl SimResult {
    pub fn syntax_failure(log: impl Into<String>) -> Self {
        SimResult { syntax_pass: false, functional_pass: false, failed_vector_indices: Vec::new(), log: log.into() }
    }

    pub fn from_failures(failed_vector_indices: Vec<usize>, log: impl Into<String>) -> Self {
        SimResult {
            syntax_pass: true,
            functional_pass: failed_vector_indices.is_empty(),
            failed_vector_indices,
            log: log.into(),
        }
    }

    /// A compiled design whose single opaque testbench run failed.
    pub fn opaque_failure(log: impl Into<String>) -> Self {
        Self::from_failures(vec![0], log)
    }

    pub fn passed(log: impl Into<String>) -> Self {
        Self::from_failures(Vec::new(), log)
    }

    pub fn is_consistent(&self) -> bool {
        if self.functional_pass && !self.syntax_pass {
            return false;
        }
        !self.syntax_pass || self.functional_pass == self.failed_vector_indices.is_empty()
    }
}

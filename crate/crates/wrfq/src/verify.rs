//! Named verification cases with stored expected outcomes, runnable from the
//! command line and from the test suite.

use crate::Result;

/// Placeholder while the module is under construction.
pub fn run_case(_id: &str) -> Result<String> {
    unimplemented!()
}

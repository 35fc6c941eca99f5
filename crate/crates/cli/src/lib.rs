//! IO formats, example bundles, and the random-instance generator backing
//! the `seminaut` command-line front end.

pub mod fixtures;
pub mod gen;
pub mod io;

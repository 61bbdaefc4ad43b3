pub mod dsl;
pub mod guidance;
pub mod harness;
pub mod lang;
pub mod librarian;
mod par;
pub mod synthesis;

//! Instance documents, LP export and result tables.

mod instance_file;
pub mod lp;
mod results;

pub use instance_file::{parse_instance, parse_reports, render_instance, render_reports};
pub use lp::{export_mip, mip_scale, parse_lp, LpModel};
pub use results::{append_rows, parse_rows, render_rows, write_atomic, ResultRow, RESULT_HEADER};

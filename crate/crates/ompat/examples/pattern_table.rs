//! Build the per-section pattern table of every bundled fixture, the same
//! rows the analyze subcommand exports.
//!
//!     cargo run -p ompat --example pattern_table

use std::path::Path;

use ompat::frontend::{parse, Origin, SourceUnit};
use ompat::harness::report::{profile_markdown, ProfileRow};
use ompat::patterns::{profile_section, Annotations};

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let cases = [
        ("bt_compute_rhs", "compute_rhs#0-#10"),
        ("bt_initialize", "initialize#0-#7"),
        ("is_rank", "rank#1-#7"),
        ("cg_conj_grad", "conj_grad#0-#4"),
        ("ep_main", "main#3"),
        ("mg_zran3", "zran3#1-#3"),
    ];
    let mut rows = Vec::new();
    for (stem, section) in cases {
        let unit =
            SourceUnit::from_file(&dir.join(format!("{stem}.c")), Origin::Manual).unwrap();
        let ast = parse(&unit).unwrap();
        let ann = Annotations::load(&dir.join(format!("{stem}.ann"))).unwrap();
        let profile = profile_section(&ast, &section.parse().unwrap(), &ann).unwrap();
        let app = stem.split('_').next().unwrap().to_uppercase();
        rows.push(ProfileRow { app, auto_time: None, manual_time: None, profile });
    }
    print!("{}", profile_markdown(&rows));
}

//! Enumerate the loop-nest sections of every bundled fixture: adjacent
//! top-level nests per function, numbered from 0.
//!
//!     cargo run -p ompat --example sections

use std::path::Path;

use ompat::frontend::{enumerate_sections, parse, Origin, SourceUnit};

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension().is_some_and(|x| x == "c")).then_some(p)
        })
        .collect();
    files.sort();
    for file in files {
        let unit = SourceUnit::from_file(&file, Origin::Manual).unwrap();
        let ast = match parse(&unit) {
            Ok(a) => a,
            Err(e) => {
                eprintln!("{}", e.render(&unit));
                continue;
            }
        };
        let sections = enumerate_sections(&ast);
        println!(
            "{}: {}",
            file.file_name().unwrap().to_string_lossy(),
            sections
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
}

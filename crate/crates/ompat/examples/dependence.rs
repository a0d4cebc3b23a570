//! Run the dependence test on a few characteristic loops and print the
//! resulting edges with kind, carrier and status.
//!
//!     cargo run -p ompat --example dependence

use ompat::analysis::{collect_accesses, dependence_test, Carrier, DepKind, DepStatus};
use ompat::frontend::{function_nests, parse_str};

fn show(label: &str, src: &str) {
    let ast = parse_str(src).unwrap();
    let f = ast.functions().next().unwrap();
    let nest = function_nests(f)[0].as_for().unwrap().clone();
    let accesses = collect_accesses(&nest);
    let edges = dependence_test(&nest, &accesses);
    println!("{label}:");
    if edges.is_empty() {
        println!("  no dependences");
    }
    for e in &edges {
        let kind = match e.kind {
            DepKind::Flow => "flow",
            DepKind::Anti => "anti",
            DepKind::Output => "output",
        };
        let carrier = match &e.carrier {
            Carrier::LoopIndependent => "loop-independent".to_string(),
            Carrier::Loop(i) => format!("carried by {i}"),
        };
        let status = match e.status {
            DepStatus::Proven => "proven",
            DepStatus::Assumed => "assumed",
        };
        let dist = e.distance.map(|d| format!(", distance {d}")).unwrap_or_default();
        println!("  {} -> {} [{kind}] {carrier} ({status}{dist})", e.src.base, e.dst.base);
    }
}

fn main() {
    show(
        "identical subscripts a[i] = a[i] + 1",
        "void f(void) { int i; for (i = 0; i < 8; i++) { a[i] = a[i] + 1; } }",
    );
    show(
        "shifted read a[i] = a[i - 1] + 1",
        "void f(void) { int i; for (i = 1; i < 8; i++) { a[i] = a[i - 1] + 1; } }",
    );
    show(
        "indirect write a[b[i]] = x[i]",
        "void f(void) { int i; for (i = 0; i < 8; i++) { a[b[i]] = x[i]; } }",
    );
    show(
        "inner-dimension stencil u[i][j] = u[i][j - 1]",
        "void f(void) { int i; int j;
           for (i = 0; i < 8; i++) { for (j = 1; j < 4; j++) { u[i][j] = u[i][j - 1]; } } }",
    );
}

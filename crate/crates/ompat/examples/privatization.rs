//! Classify the variables of a loop for privatization and show how liveness
//! after the loop turns private into lastprivate.
//!
//!     cargo run -p ompat --example privatization

use ompat::analysis::{find_private, PrivatizeCtx};
use ompat::frontend::{function_nests, parse_str};

fn main() {
    let src = "double a[8]; double b[8]; double t;
void f(void) {
  int i;
  double first;
  for (i = 0; i < 8; i++) {
    t = a[i];
    b[i] = t * t;
    if (a[i] > 0.0) { first = a[i]; }
    b[i] = b[i] + first;
  }
}";
    let ast = parse_str(src).unwrap();
    let f = ast.function("f").unwrap();
    let nest = function_nests(f)[0].as_for().unwrap().clone();

    let ctx = PrivatizeCtx::default();
    println!("no liveness information:");
    for (var, class) in &find_private(&nest, &ctx).classes {
        println!("  {var}: {class:?}");
    }

    let mut live = PrivatizeCtx::default();
    live.live_after.insert("t".to_string());
    println!("with t read after the loop:");
    for (var, class) in &find_private(&nest, &live).classes {
        println!("  {var}: {class:?}");
    }
}

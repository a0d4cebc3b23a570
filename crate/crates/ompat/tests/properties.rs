//! Property tests for the library invariants: print/parse round trip,
//! section stability, pragma attachment totality, profile additivity and the
//! harness arithmetic identities.

use proptest::prelude::*;

use ompat::analysis::side_effects::AnalysisConfig;
use ompat::analysis::{collect_accesses, dependence_test, DepStatus};
use ompat::frontend::ast::{DirectiveKind, StmtKind};
use ompat::frontend::{enumerate_sections, function_nests, parse_str, print};
use ompat::harness::{overhead, speedup};
use ompat::patterns::{profile_program, profile_section, Annotations};
use ompat::transforms::{run_plan, TransformPlan};

// ---------------------------------------------------------------------------
// Generators: random programs in the supported subset, built as source text
// so every case also exercises the parser.
// ---------------------------------------------------------------------------

fn ident() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["t", "u0", "v", "acc", "tmp"]).prop_map(str::to_string)
}

fn subscript(idx: &'static str) -> impl Strategy<Value = String> {
    prop_oneof![
        Just(idx.to_string()),
        (1i64..3, 0i64..4).prop_map(move |(a, b)| format!("{a} * {idx} + {b}")),
        (0i64..4).prop_map(|c| format!("{c}")),
        Just(format!("nd[{idx}]")),
    ]
}

fn statement() -> impl Strategy<Value = String> {
    prop_oneof![
        (subscript("i"), subscript("i")).prop_map(|(w, r)| format!("a[{w}] = b[{r}] + 1.0;")),
        (ident(), subscript("i")).prop_map(|(v, r)| format!("{v} = b[{r}]; a[{r}] = {v} * {v};")),
        subscript("i").prop_map(|r| format!("s = s + b[{r}];")),
        (subscript("i"), 1i64..5).prop_map(|(w, c)| format!("a[{w}] = {c};")),
    ]
}

fn loop_source() -> impl Strategy<Value = String> {
    (2i64..12, prop::collection::vec(statement(), 1..4), any::<bool>()).prop_map(
        |(n, stmts, pragma)| {
            let body = stmts.join(" ");
            let p = if pragma { "#pragma omp parallel for private(i)\n" } else { "" };
            format!(
                "double a[64]; double b[64]; int nd[64]; double s;\n\
                 void f(void) {{ int i; double t; double u0; double v; double acc; double tmp;\n\
                 t = 0.0; u0 = 0.0; v = 0.0; acc = 0.0; tmp = 0.0;\n\
                 {p}for (i = 0; i < {n}; i++) {{ {body} }}\n\
                 s = t + u0 + v + acc + tmp; }}"
            )
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// parse . print . parse == parse for every parsable input.
    #[test]
    fn round_trip(src in loop_source()) {
        let first = parse_str(&src).unwrap();
        let printed = print(&first);
        let second = ompat::frontend::parse(&printed)
            .unwrap_or_else(|e| panic!("{}\n{}", e.render(&printed), printed.text));
        prop_assert!(first.structurally_equal(&second));
    }

    /// enumerate_sections is invariant under whitespace and comment changes.
    #[test]
    fn section_stability(src in loop_source()) {
        let before = enumerate_sections(&parse_str(&src).unwrap());
        let noisy = src
            .replace('{', "{ /* body */\n  ")
            .replace(";", ";   \n")
            .replace("for (", "for  (");
        let after = enumerate_sections(&parse_str(&noisy).unwrap());
        prop_assert_eq!(before, after);
    }

    /// Every pragma in the text lands in exactly one directive slot.
    #[test]
    fn pragma_attachment_totality(src in loop_source()) {
        let ast = parse_str(&src).unwrap();
        let pragmas_in_text = src.matches("#pragma omp").count();
        let mut slots = 0usize;
        for item in &ast.items {
            match item {
                ompat::frontend::ast::Item::Function(f) => {
                    f.body.walk(&mut |s| {
                        if s.directive.is_some() {
                            slots += 1;
                        }
                    });
                }
                ompat::frontend::ast::Item::Threadprivate(_) => slots += 1,
                _ => {}
            }
        }
        prop_assert_eq!(pragmas_in_text, slots);
    }

    /// Program-row counts equal the sum over single-nest sections.
    #[test]
    fn profile_additivity(src in loop_source()) {
        let ast = parse_str(&src).unwrap();
        let ann = Annotations::default();
        let program = profile_program(&ast, &ann);
        let mut summed = [0u32; 9];
        for section in enumerate_sections(&ast) {
            let p = profile_section(&ast, &section, &ann).unwrap();
            for (acc, v) in summed.iter_mut().zip(p.counts.as_array()) {
                *acc += v;
            }
        }
        prop_assert_eq!(program.counts.as_array(), summed);
    }

    /// Proven independence never rests on an opaque subscript pair.
    #[test]
    fn dependence_conservatism(src in loop_source()) {
        let ast = parse_str(&src).unwrap();
        let f = ast.function("f").unwrap();
        let nest = function_nests(f)[0].as_for().unwrap().clone();
        let accesses = collect_accesses(&nest);
        for edge in dependence_test(&nest, &accesses) {
            if edge.status == DepStatus::Proven {
                prop_assert!(!edge.src.has_opaque() && !edge.dst.has_opaque());
            }
        }
    }

    /// speedup(a,b) * speedup(b,a) == 1 and overhead recovers the scale.
    #[test]
    fn harness_arithmetic(a in 0.001f64..1e6, x in -0.5f64..0.5) {
        let b = a * (1.0 + x).max(1e-6);
        prop_assert!((speedup(a, b) * speedup(b, a) - 1.0).abs() < 1e-9);
        let got = overhead(a, a * (1.0 + x));
        prop_assert!((got - 100.0 * x).abs() < 1e-6);
    }

    /// The directive-only pipeline never changes the directive-stripped tree.
    #[test]
    fn serial_elision_under_random_inputs(src in loop_source()) {
        let ast = parse_str(&src).unwrap();
        let plan = TransformPlan::parse("parallelize,region,schedule,condpar,nowait", 10000).unwrap();
        let out = run_plan(&ast, &plan, &AnalysisConfig::default());
        let a = ompat::transforms::strip_directives(&ast);
        let b = ompat::transforms::strip_directives(&out.ast);
        prop_assert!(a.structurally_equal(&b));
    }

    /// Rerunning the directive-only pipeline is a fixpoint.
    #[test]
    fn pass_idempotence(src in loop_source()) {
        let plan = TransformPlan::parse("parallelize,region,schedule,condpar,nowait", 10000).unwrap();
        let ast = parse_str(&src).unwrap();
        let once = run_plan(&ast, &plan, &AnalysisConfig::default()).ast;
        let twice = run_plan(&once, &plan, &AnalysisConfig::default()).ast;
        prop_assert!(once.structurally_equal(&twice));
    }
}

// ---------------------------------------------------------------------------
// Privatization soundness: whatever the parallelizer annotates must produce
// the serial final state under simulated thread teams.
// ---------------------------------------------------------------------------

fn runnable_statement() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("t = a[i]; b[i] = t * t;".to_string()),
        Just("a[i] = b[i] * 0.5 + 1.0;".to_string()),
        Just("s = s + a[i];".to_string()),
        Just("t = b[i] + 1.0; a[i] = t; c[i] = t * 2.0;".to_string()),
        Just("if (a[i] > 4.0) { t = a[i]; b[i] = t; }".to_string()),
        Just("u = a[i] * 0.25; c[i] = u + b[i];".to_string()),
        Just("p = p * (1.0 + a[i] * 0.001);".to_string()),
    ]
}

fn runnable_program() -> impl Strategy<Value = String> {
    (2i64..8, prop::collection::vec(runnable_statement(), 1..4)).prop_map(|(n, stmts)| {
        let body = stmts.join(" ");
        format!(
            "double a[16]; double b[16]; double c[16]; double s; double p;
             int main(void) {{
               int i;
               double t;
               double u;
               s = 0.0; p = 1.0;
               for (i = 0; i < 16; i++) {{ a[i] = i * 0.5; b[i] = 8.0 - i; c[i] = 0.0; }}
               for (i = 0; i < {n}; i++) {{ {body} }}
               for (i = 0; i < 16; i++) {{ print_val(a[i] + b[i] + c[i]); }}
               print_val(s); print_val(p);
               return 0;
             }}"
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn privatization_soundness_via_simulation(src in runnable_program()) {
        let ast = parse_str(&src).unwrap();
        let serial = ompat::sim::run(&ast, 1).unwrap().numbers();
        let plan = TransformPlan::parse("parallelize", 10000).unwrap();
        let out = run_plan(&ast, &plan, &AnalysisConfig::default());
        for threads in [2usize, 3, 4] {
            let par = ompat::sim::run(&out.ast, threads).unwrap().numbers();
            prop_assert_eq!(par.len(), serial.len());
            for (x, y) in par.iter().zip(&serial) {
                // Reduction clauses may reorder float accumulation.
                prop_assert!(
                    (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0),
                    "threads {}: {} vs serial {}\n{}", threads, x, y, src
                );
            }
        }
    }
}

// A worksharing loop gaining nowait changes P8 by one and nothing else.
#[test]
fn nowait_changes_only_p8() {
    let base = "double a[16]; double b[16];
        void f(void) { int i;
          #pragma omp parallel private(i)
          {
            #pragma omp for
            for (i = 0; i < 16; i++) { a[i] = i; }
            #pragma omp for
            for (i = 0; i < 16; i++) { b[i] = a[i]; }
          } }";
    let with = base.replace(
        "#pragma omp for\n            for (i = 0; i < 16; i++) { b[i]",
        "#pragma omp for nowait\n            for (i = 0; i < 16; i++) { b[i]",
    );
    assert_ne!(base, with);
    let ann = Annotations::default();
    let p0 = profile_section(&parse_str(base).unwrap(), &"f#0-#1".parse().unwrap(), &ann)
        .unwrap()
        .counts
        .as_array();
    let p1 = profile_section(&parse_str(&with).unwrap(), &"f#0-#1".parse().unwrap(), &ann)
        .unwrap()
        .counts
        .as_array();
    for k in 0..9 {
        if k == 7 {
            assert_eq!(p1[k], p0[k] + 1);
        } else {
            assert_eq!(p1[k], p0[k]);
        }
    }
}

// Directives survive a print/parse cycle with their clauses intact.
#[test]
fn clause_fidelity_through_print() {
    let src = "double a[64]; double s;
        void f(int n) { int i; double t;
          #pragma omp parallel for default(shared) if(n * 3 > 100) private(t) lastprivate(i) reduction(+:s) schedule(guided, 4)
          for (i = 0; i < n; i++) { t = a[i]; s = s + t; }
        }";
    let ast = parse_str(src).unwrap();
    let printed = print(&ast);
    let re = ompat::frontend::parse(&printed).unwrap();
    let f = re.function("f").unwrap();
    let mut found = false;
    f.body.walk(&mut |s| {
        if let Some(d) = &s.directive {
            if d.kind == DirectiveKind::ParallelFor {
                found = true;
                assert!(d.clauses.if_condition.is_some());
                assert_eq!(d.clauses.private, vec!["t".to_string()]);
                assert_eq!(d.clauses.lastprivate, vec!["i".to_string()]);
                assert_eq!(d.clauses.reductions.len(), 1);
                assert!(d.clauses.schedule.as_ref().unwrap().chunk.is_some());
            }
        }
        if matches!(s.kind, StmtKind::Standalone) {
            panic!("no standalone statements expected");
        }
    });
    assert!(found);
}

//! An interpreter for the supported subset with simulated OpenMP thread
//! teams. Threads of a parallel region execute sequentially (thread 0 runs
//! the whole region, then thread 1, ...), with privatization, worksharing
//! chunking, reductions and threadprivate storage modeled faithfully.
//!
//! Programs whose cross-thread dataflow rides on construct barriers (one
//! thread consuming another's chunk after an implicit barrier) are outside
//! this model; the harness compiles those with a real OpenMP toolchain
//! instead. Programs whose sharing is confined to same-thread chunks agree
//! with real execution up to floating-point combine order.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::frontend::ast::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Int(i64),
    Double(f64),
}

impl Value {
    pub fn as_f64(self) -> f64 {
        match self {
            Value::Int(v) => v as f64,
            Value::Double(v) => v,
        }
    }

    fn as_i64(self) -> i64 {
        match self {
            Value::Int(v) => v,
            Value::Double(v) => v as i64,
        }
    }

    fn truthy(self) -> bool {
        match self {
            Value::Int(v) => v != 0,
            Value::Double(v) => v != 0.0,
        }
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("function `{0}` is not defined")]
    MissingFunction(String),
    #[error("read of uninitialized variable `{0}`")]
    UninitRead(String),
    #[error("index {1} out of bounds for `{0}`")]
    OutOfBounds(String, i64),
    #[error("`{0}` is not declared")]
    Undeclared(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("division by zero")]
    DivByZero,
    #[error("step limit exceeded; runaway loop?")]
    StepLimit,
    #[error("unsupported during simulation: {0}")]
    Unsupported(String),
}

#[derive(Debug, Clone)]
struct Slot {
    base: BaseType,
    dims: Vec<i64>,
    data: Vec<Option<Value>>,
}

impl Slot {
    fn new(base: BaseType, dims: Vec<i64>, zeroed: bool) -> Slot {
        let len = dims.iter().product::<i64>().max(1) as usize;
        let fill = if zeroed {
            Some(match base {
                BaseType::Double => Value::Double(0.0),
                _ => Value::Int(0),
            })
        } else {
            None
        };
        Slot { base, dims, data: vec![fill; len] }
    }

    fn flat_index(&self, name: &str, idx: &[i64]) -> Result<usize, SimError> {
        if idx.len() != self.dims.len() {
            return Err(SimError::Type(format!(
                "`{name}` has rank {} but was indexed with {} subscripts",
                self.dims.len(),
                idx.len()
            )));
        }
        let mut flat = 0i64;
        for (d, (i, extent)) in idx.iter().zip(self.dims.iter()).enumerate() {
            let _ = d;
            if *i < 0 || *i >= *extent {
                return Err(SimError::OutOfBounds(name.to_string(), *i));
            }
            flat = flat * extent + i;
        }
        Ok(flat as usize)
    }

    fn coerce(&self, v: Value) -> Value {
        match self.base {
            BaseType::Double => Value::Double(v.as_f64()),
            _ => Value::Int(v.as_i64()),
        }
    }
}

type HeapIdx = usize;

struct Frame {
    scopes: Vec<Vec<(String, HeapIdx)>>,
}

impl Frame {
    fn new() -> Frame {
        Frame { scopes: vec![Vec::new()] }
    }

    fn bind(&mut self, name: &str, idx: HeapIdx) {
        self.scopes.last_mut().unwrap().push((name.to_string(), idx));
    }

    fn lookup(&self, name: &str) -> Option<HeapIdx> {
        for scope in self.scopes.iter().rev() {
            for (n, idx) in scope.iter().rev() {
                if n == name {
                    return Some(*idx);
                }
            }
        }
        None
    }
}

enum Flow {
    Normal,
    Return(Option<Value>),
}

/// Captured program output, one line per `print_val`/`print_int` call.
#[derive(Debug, Clone, Default)]
pub struct SimOutput {
    pub lines: Vec<String>,
}

impl SimOutput {
    /// Parse every line as a number for tolerance-based comparison.
    pub fn numbers(&self) -> Vec<f64> {
        self.lines.iter().filter_map(|l| l.trim().parse::<f64>().ok()).collect()
    }
}

const STEP_LIMIT: u64 = 200_000_000;

struct Interp<'a> {
    ast: &'a Ast,
    heap: Vec<Slot>,
    globals: BTreeMap<String, HeapIdx>,
    /// Per-thread copies of threadprivate variables.
    threadprivate: BTreeMap<String, Vec<HeapIdx>>,
    frames: Vec<Frame>,
    threads: usize,
    current_thread: usize,
    in_region: bool,
    output: Vec<String>,
    steps: u64,
}

/// Run `main` with a simulated team of `threads` threads.
pub fn run(ast: &Ast, threads: usize) -> Result<SimOutput, SimError> {
    run_entry(ast, "main", threads)
}

pub fn run_entry(ast: &Ast, entry: &str, threads: usize) -> Result<SimOutput, SimError> {
    let mut interp = Interp {
        ast,
        heap: Vec::new(),
        globals: BTreeMap::new(),
        threadprivate: BTreeMap::new(),
        frames: Vec::new(),
        threads: threads.max(1),
        current_thread: 0,
        in_region: false,
        output: Vec::new(),
        steps: 0,
    };
    interp.init_globals()?;
    let f = ast
        .function(entry)
        .ok_or_else(|| SimError::MissingFunction(entry.to_string()))?;
    if !f.params.is_empty() {
        return Err(SimError::Unsupported(format!("entry `{entry}` takes parameters")));
    }
    interp.frames.push(Frame::new());
    interp.exec_stmt(&f.body)?;
    interp.frames.pop();
    Ok(SimOutput { lines: interp.output })
}

impl<'a> Interp<'a> {
    fn init_globals(&mut self) -> Result<(), SimError> {
        for item in &self.ast.items {
            if let Item::Global(d) = item {
                let dims = decl_dims(d)?;
                let mut slot = Slot::new(d.ty.base, dims, true);
                if let Some(init) = &d.init {
                    let v = self.eval(init)?;
                    slot.data[0] = Some(slot.coerce(v));
                }
                let idx = self.heap.len();
                self.heap.push(slot);
                self.globals.insert(d.name.clone(), idx);
            }
        }
        // Materialize per-thread copies for threadprivate variables.
        for name in self.ast.threadprivate_vars() {
            let master = *self
                .globals
                .get(name)
                .ok_or_else(|| SimError::Undeclared(name.to_string()))?;
            let mut copies = vec![master];
            for _ in 1..self.threads {
                let clone = self.heap[master].clone();
                let idx = self.heap.len();
                self.heap.push(clone);
                copies.push(idx);
            }
            self.threadprivate.insert(name.to_string(), copies);
        }
        Ok(())
    }

    fn resolve(&self, name: &str) -> Result<HeapIdx, SimError> {
        if let Some(frame) = self.frames.last() {
            if let Some(idx) = frame.lookup(name) {
                return Ok(idx);
            }
        }
        if let Some(copies) = self.threadprivate.get(name) {
            return Ok(copies[self.current_thread.min(copies.len() - 1)]);
        }
        self.globals
            .get(name)
            .copied()
            .ok_or_else(|| SimError::Undeclared(name.to_string()))
    }

    fn tick(&mut self) -> Result<(), SimError> {
        self.steps += 1;
        if self.steps > STEP_LIMIT {
            return Err(SimError::StepLimit);
        }
        Ok(())
    }

    // -------------------------------------------------------------------
    // Statements
    // -------------------------------------------------------------------

    fn exec_stmt(&mut self, s: &Stmt) -> Result<Flow, SimError> {
        self.tick()?;
        if let Some(d) = &s.directive {
            match d.kind {
                DirectiveKind::Parallel | DirectiveKind::ParallelFor => {
                    return self.exec_region(s, d);
                }
                DirectiveKind::For => {
                    let StmtKind::For(f) = &s.kind else { unreachable!() };
                    return self.exec_worksharing_for(f, d);
                }
                DirectiveKind::Single => {
                    if self.current_thread == 0 {
                        return self.exec_plain(s);
                    }
                    return Ok(Flow::Normal);
                }
                // Threads run sequentially here, so mutual exclusion and
                // barriers are free.
                DirectiveKind::Critical(_) | DirectiveKind::Atomic => {
                    return self.exec_plain(s);
                }
                DirectiveKind::Barrier => return Ok(Flow::Normal),
                DirectiveKind::Threadprivate(_) => return Ok(Flow::Normal),
            }
        }
        self.exec_plain(s)
    }

    fn exec_plain(&mut self, s: &Stmt) -> Result<Flow, SimError> {
        match &s.kind {
            StmtKind::Compound(items) => {
                self.frames.last_mut().unwrap().scopes.push(Vec::new());
                for item in items {
                    match self.exec_stmt(item)? {
                        Flow::Normal => {}
                        ret => {
                            self.frames.last_mut().unwrap().scopes.pop();
                            return Ok(ret);
                        }
                    }
                }
                self.frames.last_mut().unwrap().scopes.pop();
                Ok(Flow::Normal)
            }
            StmtKind::For(f) => self.exec_serial_for(f),
            StmtKind::If { cond, then_branch, else_branch } => {
                if self.eval(cond)?.truthy() {
                    self.exec_stmt(then_branch)
                } else if let Some(e) = else_branch {
                    self.exec_stmt(e)
                } else {
                    Ok(Flow::Normal)
                }
            }
            StmtKind::Expr(e) => {
                self.eval(e)?;
                Ok(Flow::Normal)
            }
            StmtKind::Decl(d) => {
                let dims = decl_dims(d)?;
                // Statics persist in C; modeling them as zeroed fresh slots
                // per execution is enough for the programs simulated here.
                let zeroed = d.storage == Storage::Static;
                let mut slot = Slot::new(d.ty.base, dims, zeroed);
                if let Some(init) = &d.init {
                    let v = self.eval(init)?;
                    slot.data[0] = Some(slot.coerce(v));
                }
                let idx = self.heap.len();
                self.heap.push(slot);
                self.frames.last_mut().unwrap().bind(&d.name, idx);
                Ok(Flow::Normal)
            }
            StmtKind::Return(v) => {
                let val = match v {
                    Some(e) => Some(self.eval(e)?),
                    None => None,
                };
                Ok(Flow::Return(val))
            }
            StmtKind::Empty | StmtKind::Standalone => Ok(Flow::Normal),
        }
    }

    fn loop_values(&mut self, header: &LoopHeader) -> Result<Vec<i64>, SimError> {
        // Canonical evaluation: bounds once, stride constant.
        let lower = self.eval(&header.lower)?.as_i64();
        let upper = self.eval(&header.upper)?.as_i64();
        let mut vals = Vec::new();
        let mut v = lower;
        loop {
            let cont = match header.cmp {
                LoopCmp::Lt => v < upper,
                LoopCmp::Le => v <= upper,
                LoopCmp::Gt => v > upper,
                LoopCmp::Ge => v >= upper,
            };
            if !cont {
                break;
            }
            vals.push(v);
            v += header.stride;
            if vals.len() > 50_000_000 {
                return Err(SimError::StepLimit);
            }
        }
        Ok(vals)
    }

    fn exec_serial_for(&mut self, f: &ForLoop) -> Result<Flow, SimError> {
        let idx = self.resolve(&f.header.index)?;
        let lower = self.eval(&f.header.lower)?;
        let coerced = self.heap[idx].coerce(lower);
        self.heap[idx].data[0] = Some(coerced);
        loop {
            self.tick()?;
            let v = self.heap[idx].data[0].unwrap().as_i64();
            let upper = self.eval(&f.header.upper)?.as_i64();
            let cont = match f.header.cmp {
                LoopCmp::Lt => v < upper,
                LoopCmp::Le => v <= upper,
                LoopCmp::Gt => v > upper,
                LoopCmp::Ge => v >= upper,
            };
            if !cont {
                break;
            }
            match self.exec_stmt(&f.body)? {
                Flow::Normal => {}
                ret => return Ok(ret),
            }
            let v = self.heap[idx].data[0].unwrap().as_i64();
            self.heap[idx].data[0] = Some(Value::Int(v + f.header.stride));
        }
        Ok(Flow::Normal)
    }

    /// Contiguous balanced chunk of `n` iterations for one thread, matching
    /// the usual static no-chunk distribution.
    fn static_chunk(&self, n: usize, thread: usize) -> std::ops::Range<usize> {
        let t = self.threads;
        let q = n / t;
        let r = n % t;
        let start = thread * q + thread.min(r);
        let len = q + usize::from(thread < r);
        start..start + len
    }

    fn exec_worksharing_for(&mut self, f: &ForLoop, d: &OmpDirective) -> Result<Flow, SimError> {
        if !self.in_region {
            return Err(SimError::Unsupported(
                "worksharing for outside a parallel region".to_string(),
            ));
        }
        let values = self.loop_values(&f.header)?;
        // Any deterministic partition yields the same result for code whose
        // nowait/schedule usage is sound; use the static split throughout.
        let chunk = self.static_chunk(values.len(), self.current_thread);
        let owns_last = !values.is_empty() && chunk.end == values.len() && !chunk.is_empty();

        // The loop variable is implicitly private.
        let mut bindings = PrivateBindings::default();
        bindings.add_private(self, &f.header.index)?;
        for v in &d.clauses.private {
            bindings.add_private(self, v)?;
        }
        for v in &d.clauses.firstprivate {
            bindings.add_firstprivate(self, v)?;
        }
        for v in &d.clauses.lastprivate {
            bindings.add_private(self, v)?;
        }
        for r in &d.clauses.reductions {
            for v in &r.vars {
                bindings.add_reduction(self, v, r.op)?;
            }
        }

        let idx = self.resolve(&f.header.index)?;
        let mut result = Ok(Flow::Normal);
        for k in chunk {
            self.heap[idx].data[0] = Some(Value::Int(values[k]));
            match self.exec_stmt(&f.body) {
                Ok(Flow::Normal) => {}
                other => {
                    result = other;
                    break;
                }
            }
        }
        if result.is_ok() && owns_last {
            for v in &d.clauses.lastprivate {
                bindings.copy_out(self, v)?;
            }
        }
        bindings.unwind(self)?;
        result
    }

    fn exec_region(&mut self, s: &Stmt, d: &OmpDirective) -> Result<Flow, SimError> {
        if self.in_region {
            return Err(SimError::Unsupported("nested parallel regions".to_string()));
        }
        if let Some(cond) = &d.clauses.if_condition {
            if !self.eval(cond)?.truthy() {
                // Serialized region: a team of one.
                return self.run_team(s, d, 1);
            }
        }
        self.run_team(s, d, self.threads)
    }

    fn run_team(&mut self, s: &Stmt, d: &OmpDirective, team: usize) -> Result<Flow, SimError> {
        let saved_threads = self.threads;
        self.threads = team;
        self.in_region = true;
        let mut result = Ok(());
        for t in 0..team {
            self.current_thread = t;
            let mut bindings = PrivateBindings::default();
            for v in &d.clauses.private {
                bindings.add_private(self, v)?;
            }
            for v in &d.clauses.firstprivate {
                bindings.add_firstprivate(self, v)?;
            }
            for r in &d.clauses.reductions {
                for v in &r.vars {
                    bindings.add_reduction(self, v, r.op)?;
                }
            }
            let run = match (&s.kind, &d.kind) {
                (StmtKind::For(f), DirectiveKind::ParallelFor) => {
                    // The combined construct workshares its own loop.
                    let inner = OmpDirective {
                        kind: DirectiveKind::For,
                        clauses: ClauseSet {
                            schedule: d.clauses.schedule.clone(),
                            lastprivate: d.clauses.lastprivate.clone(),
                            ..ClauseSet::default()
                        },
                        span: d.span,
                    };
                    self.exec_worksharing_for(f, &inner)
                }
                _ => self.exec_plain(s).map(|_| Flow::Normal),
            };
            let run_result = match run {
                Ok(_) => Ok(()),
                Err(e) => Err(e),
            };
            bindings.unwind(self)?;
            if let Err(e) = run_result {
                result = Err(e);
                break;
            }
        }
        self.current_thread = 0;
        self.in_region = false;
        self.threads = saved_threads;
        result.map(|_| Flow::Normal)
    }

    // -------------------------------------------------------------------
    // Expressions
    // -------------------------------------------------------------------

    fn eval(&mut self, e: &Expr) -> Result<Value, SimError> {
        self.tick()?;
        match &e.kind {
            ExprKind::IntLit(v) => Ok(Value::Int(*v)),
            ExprKind::FloatLit(v) => Ok(Value::Double(*v)),
            ExprKind::Var(n) => {
                let idx = self.resolve(n)?;
                self.heap[idx].data[0].ok_or_else(|| SimError::UninitRead(n.clone()))
            }
            ExprKind::ArrayRef { base, subs } => {
                let mut idxs = Vec::with_capacity(subs.len());
                for s in subs {
                    idxs.push(self.eval(s)?.as_i64());
                }
                let slot_idx = self.resolve(base)?;
                let flat = self.heap[slot_idx].flat_index(base, &idxs)?;
                self.heap[slot_idx].data[flat]
                    .ok_or_else(|| SimError::UninitRead(base.clone()))
            }
            ExprKind::Call { callee, args } => self.eval_call(callee, args),
            ExprKind::Unary { op, operand } => {
                let v = self.eval(operand)?;
                Ok(match op {
                    UnaryOp::Neg => match v {
                        Value::Int(i) => Value::Int(-i),
                        Value::Double(d) => Value::Double(-d),
                    },
                    UnaryOp::Not => Value::Int((!v.truthy()) as i64),
                })
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let l = self.eval(lhs)?;
                let r = self.eval(rhs)?;
                binary(*op, l, r)
            }
            ExprKind::Assign { op, target, value } => {
                let rhs = self.eval(value)?;
                let (slot_idx, flat, name) = self.lvalue(target)?;
                let new = match op.bin_op() {
                    None => rhs,
                    Some(bop) => {
                        let old = self.heap[slot_idx].data[flat]
                            .ok_or_else(|| SimError::UninitRead(name.clone()))?;
                        binary(bop, old, rhs)?
                    }
                };
                let coerced = self.heap[slot_idx].coerce(new);
                self.heap[slot_idx].data[flat] = Some(coerced);
                Ok(coerced)
            }
        }
    }

    fn lvalue(&mut self, target: &Expr) -> Result<(HeapIdx, usize, String), SimError> {
        match &target.kind {
            ExprKind::Var(n) => Ok((self.resolve(n)?, 0, n.clone())),
            ExprKind::ArrayRef { base, subs } => {
                let mut idxs = Vec::with_capacity(subs.len());
                for s in subs {
                    idxs.push(self.eval(s)?.as_i64());
                }
                let slot_idx = self.resolve(base)?;
                let flat = self.heap[slot_idx].flat_index(base, &idxs)?;
                Ok((slot_idx, flat, base.clone()))
            }
            _ => Err(SimError::Type("assignment target must be a variable".to_string())),
        }
    }

    fn eval_call(&mut self, callee: &str, args: &[Expr]) -> Result<Value, SimError> {
        if let Some(v) = self.eval_builtin(callee, args)? {
            return Ok(v);
        }
        let f = self
            .ast
            .function(callee)
            .ok_or_else(|| SimError::MissingFunction(callee.to_string()))?
            .clone();
        if f.params.len() != args.len() {
            return Err(SimError::Type(format!(
                "`{callee}` expects {} arguments, got {}",
                f.params.len(),
                args.len()
            )));
        }
        let mut frame = Frame::new();
        for (p, a) in f.params.iter().zip(args) {
            if p.ty.is_array() {
                let ExprKind::Var(n) = &a.kind else {
                    return Err(SimError::Unsupported(
                        "array argument must be a plain name".to_string(),
                    ));
                };
                let idx = self.resolve(n)?;
                frame.bind(&p.name, idx);
            } else {
                let v = self.eval(a)?;
                let mut slot = Slot::new(p.ty.base, Vec::new(), false);
                let coerced = slot.coerce(v);
                slot.data[0] = Some(coerced);
                let idx = self.heap.len();
                self.heap.push(slot);
                frame.bind(&p.name, idx);
            }
        }
        self.frames.push(frame);
        let flow = self.exec_stmt(&f.body)?;
        self.frames.pop();
        match flow {
            Flow::Return(Some(v)) => Ok(v),
            _ => Ok(Value::Int(0)),
        }
    }

    fn eval_builtin(&mut self, callee: &str, args: &[Expr]) -> Result<Option<Value>, SimError> {
        let unary_math = |interp: &mut Self, f: fn(f64) -> f64, args: &[Expr]| {
            let v = interp.eval(&args[0])?.as_f64();
            Ok::<Option<Value>, SimError>(Some(Value::Double(f(v))))
        };
        match callee {
            "sqrt" => unary_math(self, f64::sqrt, args),
            "fabs" => unary_math(self, f64::abs, args),
            "exp" => unary_math(self, f64::exp, args),
            "log" => unary_math(self, f64::ln, args),
            "log2" => unary_math(self, f64::log2, args),
            "sin" => unary_math(self, f64::sin, args),
            "cos" => unary_math(self, f64::cos, args),
            "tan" => unary_math(self, f64::tan, args),
            "floor" => unary_math(self, f64::floor, args),
            "ceil" => unary_math(self, f64::ceil, args),
            "pow" => {
                let a = self.eval(&args[0])?.as_f64();
                let b = self.eval(&args[1])?.as_f64();
                Ok(Some(Value::Double(a.powf(b))))
            }
            "fmin" => {
                let a = self.eval(&args[0])?.as_f64();
                let b = self.eval(&args[1])?.as_f64();
                Ok(Some(Value::Double(a.min(b))))
            }
            "fmax" => {
                let a = self.eval(&args[0])?.as_f64();
                let b = self.eval(&args[1])?.as_f64();
                Ok(Some(Value::Double(a.max(b))))
            }
            "print_val" => {
                let v = self.eval(&args[0])?.as_f64();
                self.output.push(format!("{v:?}"));
                Ok(Some(Value::Int(0)))
            }
            "print_int" => {
                let v = self.eval(&args[0])?.as_i64();
                self.output.push(format!("{v}"));
                Ok(Some(Value::Int(0)))
            }
            _ => Ok(None),
        }
    }
}

fn binary(op: BinOp, l: Value, r: Value) -> Result<Value, SimError> {
    use Value::*;
    let both_int = matches!((l, r), (Int(_), Int(_)));
    let v = match op {
        BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod => {
            if both_int {
                let (a, b) = (l.as_i64(), r.as_i64());
                let out = match op {
                    BinOp::Add => a.wrapping_add(b),
                    BinOp::Sub => a.wrapping_sub(b),
                    BinOp::Mul => a.wrapping_mul(b),
                    BinOp::Div => {
                        if b == 0 {
                            return Err(SimError::DivByZero);
                        }
                        a / b
                    }
                    BinOp::Mod => {
                        if b == 0 {
                            return Err(SimError::DivByZero);
                        }
                        a % b
                    }
                    _ => unreachable!(),
                };
                Int(out)
            } else {
                let (a, b) = (l.as_f64(), r.as_f64());
                let out = match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Mod => return Err(SimError::Type("% needs integers".to_string())),
                    _ => unreachable!(),
                };
                Double(out)
            }
        }
        BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge | BinOp::Eq | BinOp::Ne => {
            let out = if both_int {
                let (a, b) = (l.as_i64(), r.as_i64());
                match op {
                    BinOp::Lt => a < b,
                    BinOp::Gt => a > b,
                    BinOp::Le => a <= b,
                    BinOp::Ge => a >= b,
                    BinOp::Eq => a == b,
                    BinOp::Ne => a != b,
                    _ => unreachable!(),
                }
            } else {
                let (a, b) = (l.as_f64(), r.as_f64());
                match op {
                    BinOp::Lt => a < b,
                    BinOp::Gt => a > b,
                    BinOp::Le => a <= b,
                    BinOp::Ge => a >= b,
                    BinOp::Eq => a == b,
                    BinOp::Ne => a != b,
                    _ => unreachable!(),
                }
            };
            Int(out as i64)
        }
        BinOp::LogAnd => Int((l.truthy() && r.truthy()) as i64),
        BinOp::LogOr => Int((l.truthy() || r.truthy()) as i64),
    };
    Ok(v)
}

fn decl_dims(d: &VarDecl) -> Result<Vec<i64>, SimError> {
    d.ty.dims
        .iter()
        .map(|dim| match dim {
            ArrayDim::Fixed(n) => Ok(*n),
            ArrayDim::Unsized => Err(SimError::Unsupported(format!(
                "cannot allocate `{}` with unknown extent",
                d.name
            ))),
        })
        .collect()
}

/// Shadow bindings for one thread's private/firstprivate/reduction variables.
#[derive(Default)]
struct PrivateBindings {
    saved: Vec<(String, Option<HeapIdx>)>,
    reductions: Vec<(String, HeapIdx, HeapIdx, ReductionOp)>,
}

impl PrivateBindings {
    fn shadow(&mut self, interp: &mut Interp, name: &str, slot: Slot) -> HeapIdx {
        let idx = interp.heap.len();
        interp.heap.push(slot);
        interp.frames.last_mut().unwrap().bind(name, idx);
        idx
    }

    fn template(interp: &Interp, name: &str) -> Result<Slot, SimError> {
        let idx = interp.resolve(name)?;
        let original = &interp.heap[idx];
        Ok(Slot::new(original.base, original.dims.clone(), false))
    }

    fn add_private(&mut self, interp: &mut Interp, name: &str) -> Result<(), SimError> {
        let slot = Self::template(interp, name)?;
        self.saved.push((name.to_string(), None));
        self.shadow(interp, name, slot);
        Ok(())
    }

    fn add_firstprivate(&mut self, interp: &mut Interp, name: &str) -> Result<(), SimError> {
        let idx = interp.resolve(name)?;
        let slot = interp.heap[idx].clone();
        self.saved.push((name.to_string(), None));
        self.shadow(interp, name, slot);
        Ok(())
    }

    fn add_reduction(
        &mut self,
        interp: &mut Interp,
        name: &str,
        op: ReductionOp,
    ) -> Result<(), SimError> {
        let shared = interp.resolve(name)?;
        let mut slot = Self::template(interp, name)?;
        let identity = match (slot.base, op) {
            (BaseType::Double, ReductionOp::Add) => Value::Double(0.0),
            (BaseType::Double, ReductionOp::Mul) => Value::Double(1.0),
            (BaseType::Double, ReductionOp::Min) => Value::Double(f64::INFINITY),
            (BaseType::Double, ReductionOp::Max) => Value::Double(f64::NEG_INFINITY),
            (_, ReductionOp::Add) => Value::Int(0),
            (_, ReductionOp::Mul) => Value::Int(1),
            (_, ReductionOp::Min) => Value::Int(i64::MAX),
            (_, ReductionOp::Max) => Value::Int(i64::MIN),
        };
        for cell in &mut slot.data {
            *cell = Some(identity);
        }
        self.saved.push((name.to_string(), None));
        let private = self.shadow(interp, name, slot);
        self.reductions.push((name.to_string(), shared, private, op));
        Ok(())
    }

    fn copy_out(&self, interp: &mut Interp, name: &str) -> Result<(), SimError> {
        let private = interp.resolve(name)?;
        let data = interp.heap[private].data.clone();
        // The shared binding is what resolution finds after unwinding; find
        // it by peeking past the shadow scope entry.
        if let Some((_, _, _, _)) = self.reductions.iter().find(|(n, ..)| n == name) {
            return Ok(());
        }
        // Pop the shadow temporarily.
        let frame = interp.frames.last_mut().unwrap();
        let scope = frame.scopes.last_mut().unwrap();
        let pos = scope.iter().rposition(|(n, _)| n == name).unwrap();
        let entry = scope.remove(pos);
        let shared = interp.resolve(name)?;
        interp.heap[shared].data = data;
        interp.frames.last_mut().unwrap().scopes.last_mut().unwrap().insert(pos, entry);
        Ok(())
    }

    /// Combine reductions into the shared slots and drop the shadows.
    fn unwind(&mut self, interp: &mut Interp) -> Result<(), SimError> {
        for (name, shared, private, op) in &self.reductions {
            let partial = interp.heap[*private].data.clone();
            for (i, v) in partial.iter().enumerate() {
                let Some(v) = v else { continue };
                let old = interp.heap[*shared].data[i]
                    .ok_or_else(|| SimError::UninitRead(name.clone()))?;
                let combined = match op {
                    ReductionOp::Add => binary(BinOp::Add, old, *v)?,
                    ReductionOp::Mul => binary(BinOp::Mul, old, *v)?,
                    ReductionOp::Min => {
                        if v.as_f64() < old.as_f64() {
                            *v
                        } else {
                            old
                        }
                    }
                    ReductionOp::Max => {
                        if v.as_f64() > old.as_f64() {
                            *v
                        } else {
                            old
                        }
                    }
                };
                let coerced = interp.heap[*shared].coerce(combined);
                interp.heap[*shared].data[i] = Some(coerced);
            }
        }
        self.reductions.clear();
        // Remove the shadow bindings installed in the current scope.
        let frame = interp.frames.last_mut().unwrap();
        let scope = frame.scopes.last_mut().unwrap();
        for (name, _) in self.saved.drain(..) {
            if let Some(pos) = scope.iter().rposition(|(n, _)| *n == name) {
                scope.remove(pos);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_str;

    fn run_src(src: &str, threads: usize) -> Vec<f64> {
        let ast = parse_str(src).unwrap();
        run(&ast, threads).unwrap().numbers()
    }

    #[test]
    fn serial_arithmetic() {
        let out = run_src(
            "int main(void) { double s; int i; s = 0.0;
               for (i = 1; i <= 4; i++) { s = s + i * 0.5; }
               print_val(s); return 0; }",
            1,
        );
        assert_eq!(out, vec![5.0]);
    }

    #[test]
    fn function_calls_and_arrays() {
        let out = run_src(
            "double a[8];
             void fill(double x[], int n) { int i; for (i = 0; i < n; i++) { x[i] = i * 2.0; } }
             int main(void) { double s; int i; fill(a, 8); s = 0.0;
               for (i = 0; i < 8; i++) { s = s + a[i]; } print_val(s); return 0; }",
            1,
        );
        assert_eq!(out, vec![56.0]);
    }

    #[test]
    fn parallel_for_reduction_matches_serial() {
        let src = "int main(void) { double s; int i; s = 0.0;
               #pragma omp parallel for reduction(+:s)
               for (i = 0; i < 100; i++) { s = s + i * 0.25; }
               print_val(s); return 0; }";
        let serial = run_src(src, 1);
        let par = run_src(src, 4);
        assert!((serial[0] - par[0]).abs() < 1e-9);
        assert_eq!(serial[0], 0.25 * (99.0 * 100.0 / 2.0));
    }

    #[test]
    fn region_with_worksharing_and_private() {
        let src = "double a[16]; double b[16];
             int main(void) { int i; double t;
               for (i = 0; i < 16; i++) { a[i] = i; }
               #pragma omp parallel private(i, t)
               {
                 #pragma omp for nowait
                 for (i = 0; i < 16; i++) { t = a[i]; b[i] = t * t; }
               }
               print_val(b[3]); print_val(b[15]); return 0; }";
        for threads in [1, 2, 4] {
            let out = run_src(src, threads);
            assert_eq!(out, vec![9.0, 225.0]);
        }
    }

    #[test]
    fn threadprivate_copies_are_per_thread() {
        let src = "static double x[4];
             #pragma omp threadprivate(x)
             double out[4];
             int main(void) { int i; int m;
               #pragma omp parallel private(i, m)
               {
                 for (m = 0; m < 4; m++) { x[m] = 0.0; }
                 #pragma omp for
                 for (i = 0; i < 4; i++) { x[1] = x[1] + 1.0; out[i] = x[1]; }
               }
               print_val(out[0]); return 0; }";
        // With 4 threads each thread sees its own x: every out[i] is 1.
        let out = run_src(src, 4);
        assert_eq!(out, vec![1.0]);
    }

    #[test]
    fn lastprivate_takes_final_iteration() {
        let src = "int main(void) { int i; double t; t = -1.0;
               #pragma omp parallel for lastprivate(t)
               for (i = 0; i < 10; i++) { t = i * 1.0; }
               print_val(t); return 0; }";
        for threads in [1, 3] {
            assert_eq!(run_src(src, threads), vec![9.0]);
        }
    }

    #[test]
    fn uninitialized_local_read_is_an_error() {
        let ast = parse_str("int main(void) { double t; print_val(t); return 0; }").unwrap();
        assert!(matches!(run(&ast, 1), Err(SimError::UninitRead(_))));
    }

    #[test]
    fn out_of_bounds_is_an_error() {
        let ast =
            parse_str("double a[4]; int main(void) { a[4] = 1.0; return 0; }").unwrap();
        assert!(matches!(run(&ast, 1), Err(SimError::OutOfBounds(_, 4))));
    }

    #[test]
    fn if_clause_serializes() {
        let src = "int main(void) { int i; double s; s = 0.0;
               #pragma omp parallel for if(0) reduction(+:s)
               for (i = 0; i < 8; i++) { s = s + 1.0; }
               print_val(s); return 0; }";
        assert_eq!(run_src(src, 4), vec![8.0]);
    }

    #[test]
    fn atomic_update_in_region() {
        let src = "double q[2];
             int main(void) { int i;
               #pragma omp parallel private(i)
               {
                 #pragma omp for nowait
                 for (i = 0; i < 12; i++) {
                   #pragma omp atomic
                   q[0] = q[0] + 1.0;
                 }
               }
               print_val(q[0]); return 0; }";
        for threads in [1, 2, 4] {
            assert_eq!(run_src(src, threads), vec![12.0]);
        }
    }
}

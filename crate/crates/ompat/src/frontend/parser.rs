//! Recursive-descent parser for the C subset plus OpenMP pragmas.
//!
//! Every `#pragma omp` attaches to its following statement; unsupported
//! constructs produce a located error rather than being dropped.

use std::collections::BTreeSet;

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::span::{SourceUnit, Span};
use super::ParseError;

pub fn parse(unit: &SourceUnit) -> Result<Ast, ParseError> {
    let tokens = lex(&unit.text)?;
    let mut p = Parser { tokens, pos: 0, scalar_scopes: vec![BTreeSet::new()] };
    let ast = p.translation_unit()?;
    validate_threadprivate(&ast)?;
    Ok(ast)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    /// Names declared with scalar type in enclosing scopes; scalar arguments
    /// pass by value, so calls cannot write them.
    scalar_scopes: Vec<BTreeSet<String>>,
}

impl Parser {
    fn declare(&mut self, name: &str, is_scalar: bool) {
        if is_scalar {
            if let Some(scope) = self.scalar_scopes.last_mut() {
                scope.insert(name.to_string());
            }
        }
    }

    fn scalars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for scope in &self.scalar_scopes {
            out.extend(scope.iter().cloned());
        }
        out
    }
}

const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "goto", "switch", "while", "do", "break", "continue", "struct", "union", "enum", "typedef",
    "char", "float", "long", "short", "unsigned", "signed", "const", "extern", "sizeof",
];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        if self.pos + 1 < self.tokens.len() {
            &self.tokens[self.pos + 1].tok
        } else {
            &self.tokens[self.tokens.len() - 1].tok
        }
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token, ParseError> {
        if self.peek() == &tok {
            Ok(self.bump())
        } else {
            Err(ParseError::syntax(
                self.span(),
                format!("expected {what}, found {}", describe(self.peek())),
            ))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, Span), ParseError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok((name, span))
            }
            other => Err(ParseError::syntax(
                span,
                format!("expected {what}, found {}", describe(&other)),
            )),
        }
    }

    fn is_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == word)
    }

    fn check_unsupported_keyword(&self) -> Result<(), ParseError> {
        if let Tok::Ident(w) = self.peek() {
            if UNSUPPORTED_KEYWORDS.contains(&w.as_str()) {
                return Err(ParseError::unsupported(self.span(), w.clone()));
            }
        }
        Ok(())
    }

    // -----------------------------------------------------------------------
    // Top level
    // -----------------------------------------------------------------------

    fn translation_unit(&mut self) -> Result<Ast, ParseError> {
        let mut items = Vec::new();
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::PragmaOmp => {
                    let d = self.directive()?;
                    match d.kind {
                        DirectiveKind::Threadprivate(_) => items.push(Item::Threadprivate(d)),
                        _ => {
                            return Err(ParseError::syntax(
                                d.span,
                                "only threadprivate directives may appear at file scope",
                            ))
                        }
                    }
                }
                _ => self.file_scope_decl(&mut items)?,
            }
        }
        Ok(Ast { items })
    }

    fn file_scope_decl(&mut self, items: &mut Vec<Item>) -> Result<(), ParseError> {
        self.check_unsupported_keyword()?;
        let is_static = self.is_ident("static") && {
            self.bump();
            true
        };
        self.check_unsupported_keyword()?;
        let base = self.base_type()?;
        let (name, name_span) = self.expect_ident("a declarator name")?;
        if self.peek() == &Tok::LParen {
            let f = self.function_def(is_static, base, name, name_span)?;
            items.push(Item::Function(f));
            return Ok(());
        }
        // Global variable declaration(s); flatten multi-declarator lines.
        let storage = if is_static { Storage::Static } else { Storage::Global };
        let mut pending = Some((name, name_span));
        loop {
            let (nm, sp) = match pending.take() {
                Some(v) => v,
                None => self.expect_ident("a declarator name")?,
            };
            let decl = self.declarator_rest(nm, sp, base, storage)?;
            self.declare(&decl.name, !decl.ty.is_array());
            items.push(Item::Global(decl));
            if self.eat(&Tok::Comma) {
                continue;
            }
            self.expect(Tok::Semi, "`;`")?;
            break;
        }
        Ok(())
    }

    fn base_type(&mut self) -> Result<BaseType, ParseError> {
        let (w, span) = self.expect_ident("a type name")?;
        match w.as_str() {
            "int" => Ok(BaseType::Int),
            "double" => Ok(BaseType::Double),
            "void" => Ok(BaseType::Void),
            other => {
                if UNSUPPORTED_KEYWORDS.contains(&other) {
                    Err(ParseError::unsupported(span, other))
                } else {
                    Err(ParseError::syntax(span, format!("expected a type, found `{other}`")))
                }
            }
        }
    }

    /// Array dims and optional initializer after the declarator name.
    fn declarator_rest(
        &mut self,
        name: String,
        name_span: Span,
        base: BaseType,
        storage: Storage,
    ) -> Result<VarDecl, ParseError> {
        let mut dims = Vec::new();
        while self.eat(&Tok::LBracket) {
            if self.eat(&Tok::RBracket) {
                dims.push(ArrayDim::Unsized);
                continue;
            }
            let span = self.span();
            match self.bump().tok {
                Tok::Int(n) if n > 0 => dims.push(ArrayDim::Fixed(n)),
                _ => {
                    return Err(ParseError::syntax(
                        span,
                        "array extent must be a positive integer literal",
                    ))
                }
            }
            self.expect(Tok::RBracket, "`]`")?;
        }
        let init = if self.eat(&Tok::Assign) {
            if dims.is_empty() {
                Some(self.expr(0)?)
            } else {
                return Err(ParseError::unsupported(self.span(), "array initializer"));
            }
        } else {
            None
        };
        let end = self.prev_span();
        Ok(VarDecl {
            name,
            ty: CType { base, dims },
            storage,
            init,
            span: name_span.to(end),
        })
    }

    fn function_def(
        &mut self,
        is_static: bool,
        ret: BaseType,
        name: String,
        name_span: Span,
    ) -> Result<FunctionDef, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut params = Vec::new();
        if !self.eat(&Tok::RParen) {
            if self.is_ident("void") && self.peek2() == &Tok::RParen {
                self.bump();
                self.expect(Tok::RParen, "`)`")?;
            } else {
                loop {
                    self.check_unsupported_keyword()?;
                    let base = self.base_type()?;
                    let mut pointer = self.eat(&Tok::Star);
                    let (pname, pspan) = self.expect_ident("a parameter name")?;
                    let mut dims = Vec::new();
                    if pointer {
                        // A pointer used only as an array base is modeled as
                        // an array of unknown extent.
                        dims.push(ArrayDim::Unsized);
                        pointer = false;
                    }
                    let _ = pointer;
                    while self.eat(&Tok::LBracket) {
                        if self.eat(&Tok::RBracket) {
                            dims.push(ArrayDim::Unsized);
                            continue;
                        }
                        let span = self.span();
                        match self.bump().tok {
                            Tok::Int(n) if n > 0 => dims.push(ArrayDim::Fixed(n)),
                            _ => {
                                return Err(ParseError::syntax(
                                    span,
                                    "array extent must be a positive integer literal",
                                ))
                            }
                        }
                        self.expect(Tok::RBracket, "`]`")?;
                    }
                    params.push(VarDecl {
                        name: pname,
                        ty: CType { base, dims },
                        storage: Storage::Param,
                        init: None,
                        span: pspan,
                    });
                    if self.eat(&Tok::Comma) {
                        continue;
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    break;
                }
            }
        }
        if self.peek() != &Tok::LBrace {
            return Err(ParseError::unsupported(self.span(), "function declaration without body"));
        }
        self.scalar_scopes.push(BTreeSet::new());
        for p in &params {
            if !p.ty.is_array() {
                self.scalar_scopes.last_mut().unwrap().insert(p.name.clone());
            }
        }
        let body = self.stmt()?;
        self.scalar_scopes.pop();
        let span = name_span.to(body.span);
        Ok(FunctionDef { name, is_static, return_type: CType::scalar(ret), params, body, span })
    }

    // -----------------------------------------------------------------------
    // Statements
    // -----------------------------------------------------------------------

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        self.check_unsupported_keyword()?;
        let span = self.span();
        match self.peek().clone() {
            Tok::PragmaOmp => {
                let d = self.directive()?;
                self.attach_directive(d)
            }
            Tok::LBrace => {
                self.bump();
                self.scalar_scopes.push(BTreeSet::new());
                let mut stmts = Vec::new();
                while !self.eat(&Tok::RBrace) {
                    if self.peek() == &Tok::Eof {
                        self.scalar_scopes.pop();
                        return Err(ParseError::syntax(span, "unterminated block"));
                    }
                    self.block_items(&mut stmts)?;
                }
                self.scalar_scopes.pop();
                Ok(Stmt::new(StmtKind::Compound(stmts), span.to(self.prev_span())))
            }
            Tok::Ident(w) if w == "for" => self.for_stmt(),
            Tok::Ident(w) if w == "if" => self.if_stmt(),
            Tok::Ident(w) if w == "return" => {
                self.bump();
                let value = if self.peek() == &Tok::Semi { None } else { Some(self.expr(0)?) };
                self.expect(Tok::Semi, "`;`")?;
                Ok(Stmt::new(StmtKind::Return(value), span.to(self.prev_span())))
            }
            Tok::Semi => {
                self.bump();
                Ok(Stmt::new(StmtKind::Empty, span))
            }
            Tok::Ident(w) if w == "static" || w == "int" || w == "double" || w == "void" => {
                // A declaration where a single statement is required
                // (if-branch, loop body) is out of scope here; block_items
                // handles the common case.
                let mut stmts = Vec::new();
                self.block_items(&mut stmts)?;
                if stmts.len() == 1 {
                    Ok(stmts.pop().unwrap())
                } else {
                    Err(ParseError::syntax(
                        span,
                        "multi-declarator declaration needs an enclosing block",
                    ))
                }
            }
            _ => {
                let e = self.assignment_expr()?;
                self.expect(Tok::Semi, "`;`")?;
                Ok(Stmt::new(StmtKind::Expr(e), span.to(self.prev_span())))
            }
        }
    }

    /// Parses one block item, flattening `int i, j, k;` into separate decls.
    fn block_items(&mut self, out: &mut Vec<Stmt>) -> Result<(), ParseError> {
        let is_decl_start = match self.peek() {
            Tok::Ident(w) => matches!(w.as_str(), "static" | "int" | "double" | "void"),
            _ => false,
        };
        if !is_decl_start {
            out.push(self.stmt()?);
            return Ok(());
        }
        let span = self.span();
        let is_static = self.is_ident("static") && {
            self.bump();
            true
        };
        let base = self.base_type()?;
        let storage = if is_static { Storage::Static } else { Storage::Local };
        loop {
            let (name, name_span) = self.expect_ident("a declarator name")?;
            if self.peek() == &Tok::LParen {
                return Err(ParseError::unsupported(span, "nested function definition"));
            }
            let decl = self.declarator_rest(name, name_span, base, storage)?;
            self.declare(&decl.name, !decl.ty.is_array());
            let dspan = decl.span;
            out.push(Stmt::new(StmtKind::Decl(decl), dspan));
            if self.eat(&Tok::Comma) {
                continue;
            }
            self.expect(Tok::Semi, "`;`")?;
            break;
        }
        Ok(())
    }

    fn for_stmt(&mut self) -> Result<Stmt, ParseError> {
        let span = self.span();
        self.bump(); // for
        self.expect(Tok::LParen, "`(`")?;
        if let Tok::Ident(w) = self.peek() {
            if matches!(w.as_str(), "int" | "double") {
                return Err(ParseError::unsupported(self.span(), "declaration in for-init"));
            }
        }
        let (index, _) = self.expect_ident("the loop index")?;
        self.expect(Tok::Assign, "`=`")?;
        let lower = self.expr(0)?;
        self.expect(Tok::Semi, "`;`")?;
        let (cond_index, cond_span) = self.expect_ident("the loop index in the condition")?;
        if cond_index != index {
            return Err(ParseError::syntax(
                cond_span,
                format!("loop condition tests `{cond_index}` but the index is `{index}`"),
            ));
        }
        let cmp = match self.bump().tok {
            Tok::Lt => LoopCmp::Lt,
            Tok::Le => LoopCmp::Le,
            Tok::Gt => LoopCmp::Gt,
            Tok::Ge => LoopCmp::Ge,
            _ => {
                return Err(ParseError::syntax(
                    self.prev_span(),
                    "loop condition must use <, <=, > or >=",
                ))
            }
        };
        let upper = self.expr(0)?;
        self.expect(Tok::Semi, "`;`")?;
        let stride = self.loop_step(&index)?;
        self.expect(Tok::RParen, "`)`")?;
        let ascending = stride > 0;
        let cmp_ascending = matches!(cmp, LoopCmp::Lt | LoopCmp::Le);
        if ascending != cmp_ascending {
            return Err(ParseError::syntax(
                span,
                "loop step direction disagrees with the condition",
            ));
        }
        let body = self.stmt()?;
        let body_span = body.span;
        let canonical = compute_canonical(&index, &lower, &upper, &body, &self.scalars());
        let header = LoopHeader {
            index,
            lower,
            cmp,
            upper,
            stride,
            canonical,
            span: span.to(self.prev_span()),
        };
        Ok(Stmt::new(
            StmtKind::For(ForLoop { header, body: Box::new(body) }),
            span.to(body_span),
        ))
    }

    fn loop_step(&mut self, index: &str) -> Result<i64, ParseError> {
        let span = self.span();
        let (name, _) = self.expect_ident("the loop index in the step")?;
        if name != index {
            return Err(ParseError::syntax(
                span,
                format!("loop step updates `{name}` but the index is `{index}`"),
            ));
        }
        let step = match self.bump().tok {
            Tok::PlusPlus => 1,
            Tok::MinusMinus => -1,
            Tok::PlusAssign => self.step_amount(span)?,
            Tok::MinusAssign => -self.step_amount(span)?,
            Tok::Assign => {
                // i = i + c  /  i = i - c
                let (n2, _) = self.expect_ident("the loop index")?;
                if n2 != index {
                    return Err(ParseError::syntax(span, "loop step must update the index"));
                }
                match self.bump().tok {
                    Tok::Plus => self.step_amount(span)?,
                    Tok::Minus => -self.step_amount(span)?,
                    _ => return Err(ParseError::syntax(span, "loop step must add a constant")),
                }
            }
            _ => return Err(ParseError::syntax(span, "unsupported loop step")),
        };
        if step == 0 {
            return Err(ParseError::syntax(span, "loop stride must be nonzero"));
        }
        Ok(step)
    }

    fn step_amount(&mut self, span: Span) -> Result<i64, ParseError> {
        match self.bump().tok {
            Tok::Int(n) => Ok(n),
            _ => Err(ParseError::syntax(span, "loop stride must be an integer literal")),
        }
    }

    fn if_stmt(&mut self) -> Result<Stmt, ParseError> {
        let span = self.span();
        self.bump(); // if
        self.expect(Tok::LParen, "`(`")?;
        let cond = self.expr(0)?;
        self.expect(Tok::RParen, "`)`")?;
        let then_branch = Box::new(self.stmt()?);
        let else_branch = if self.is_ident("else") {
            self.bump();
            Some(Box::new(self.stmt()?))
        } else {
            None
        };
        let end = else_branch.as_ref().map(|b| b.span).unwrap_or(then_branch.span);
        Ok(Stmt::new(StmtKind::If { cond, then_branch, else_branch }, span.to(end)))
    }

    /// Attach a parsed directive to its following statement.
    fn attach_directive(&mut self, d: OmpDirective) -> Result<Stmt, ParseError> {
        match &d.kind {
            DirectiveKind::Barrier => {
                let span = d.span;
                return Ok(Stmt::with_directive(StmtKind::Standalone, span, d));
            }
            DirectiveKind::Threadprivate(_) => {
                return Err(ParseError::syntax(
                    d.span,
                    "threadprivate is only valid at file scope",
                ));
            }
            _ => {}
        }
        let stmt = self.stmt()?;
        match (&d.kind, &stmt.kind) {
            (DirectiveKind::For | DirectiveKind::ParallelFor, StmtKind::For(_)) => {}
            (DirectiveKind::For | DirectiveKind::ParallelFor, _) => {
                return Err(ParseError::syntax(
                    d.span,
                    "this directive must precede a for loop",
                ));
            }
            (DirectiveKind::Atomic, StmtKind::Expr(e)) => {
                if !is_atomic_shape(e) {
                    return Err(ParseError::syntax(
                        d.span,
                        "atomic requires an update of the form x = x op expr",
                    ));
                }
            }
            (DirectiveKind::Atomic, _) => {
                return Err(ParseError::syntax(
                    d.span,
                    "atomic must precede an update statement",
                ));
            }
            (_, StmtKind::Decl(_)) => {
                return Err(ParseError::syntax(
                    d.span,
                    "a directive cannot attach to a declaration",
                ));
            }
            _ => {}
        }
        let mut stmt = stmt;
        if stmt.directive.is_some() {
            // Stacked pragmas: wrap the already-annotated statement so each
            // node keeps a single directive slot.
            let span = stmt.span;
            stmt = Stmt::new(StmtKind::Compound(vec![stmt]), span);
        }
        let span = d.span.to(stmt.span);
        stmt.directive = Some(d);
        stmt.span = span;
        Ok(stmt)
    }

    // -----------------------------------------------------------------------
    // Directives
    // -----------------------------------------------------------------------

    fn directive(&mut self) -> Result<OmpDirective, ParseError> {
        let start = self.span();
        self.expect(Tok::PragmaOmp, "`#pragma omp`")?;
        let (head, head_span) = self.expect_ident("a directive name")?;
        let kind = match head.as_str() {
            "parallel" => {
                if self.is_ident("for") {
                    self.bump();
                    DirectiveKind::ParallelFor
                } else {
                    DirectiveKind::Parallel
                }
            }
            "for" => DirectiveKind::For,
            "single" => DirectiveKind::Single,
            "critical" => {
                let name = if self.eat(&Tok::LParen) {
                    let (n, _) = self.expect_ident("a critical section name")?;
                    self.expect(Tok::RParen, "`)`")?;
                    Some(n)
                } else {
                    None
                };
                DirectiveKind::Critical(name)
            }
            "atomic" => DirectiveKind::Atomic,
            "barrier" => DirectiveKind::Barrier,
            "threadprivate" => {
                self.expect(Tok::LParen, "`(`")?;
                let vars = self.ident_list()?;
                self.expect(Tok::RParen, "`)`")?;
                if vars.is_empty() {
                    return Err(ParseError::syntax(head_span, "empty threadprivate list"));
                }
                DirectiveKind::Threadprivate(vars)
            }
            other => return Err(ParseError::unsupported(head_span, format!("omp {other}"))),
        };
        let mut clauses = ClauseSet::default();
        while self.peek() != &Tok::PragmaEnd {
            self.clause(&kind, &mut clauses)?;
        }
        self.expect(Tok::PragmaEnd, "end of pragma")?;
        let d = OmpDirective { kind, clauses, span: start.to(self.prev_span()) };
        validate_directive(&d)?;
        Ok(d)
    }

    fn clause(&mut self, kind: &DirectiveKind, clauses: &mut ClauseSet) -> Result<(), ParseError> {
        let (name, span) = self.expect_ident("a clause name")?;
        let for_like = matches!(kind, DirectiveKind::For | DirectiveKind::ParallelFor);
        let parallel_like = matches!(kind, DirectiveKind::Parallel | DirectiveKind::ParallelFor);
        let data_sharing_ok = parallel_like
            || matches!(kind, DirectiveKind::For | DirectiveKind::Single);
        match name.as_str() {
            "private" if data_sharing_ok => {
                self.expect(Tok::LParen, "`(`")?;
                clauses.private.extend(self.ident_list()?);
                self.expect(Tok::RParen, "`)`")?;
            }
            "firstprivate" if data_sharing_ok => {
                self.expect(Tok::LParen, "`(`")?;
                clauses.firstprivate.extend(self.ident_list()?);
                self.expect(Tok::RParen, "`)`")?;
            }
            "lastprivate" if for_like => {
                self.expect(Tok::LParen, "`(`")?;
                clauses.lastprivate.extend(self.ident_list()?);
                self.expect(Tok::RParen, "`)`")?;
            }
            "shared" if parallel_like => {
                self.expect(Tok::LParen, "`(`")?;
                clauses.shared.extend(self.ident_list()?);
                self.expect(Tok::RParen, "`)`")?;
            }
            "default" if parallel_like => {
                self.expect(Tok::LParen, "`(`")?;
                let (w, wspan) = self.expect_ident("shared or none")?;
                clauses.default = Some(match w.as_str() {
                    "shared" => DefaultKind::Shared,
                    "none" => DefaultKind::None,
                    _ => return Err(ParseError::syntax(wspan, "default takes shared or none")),
                });
                self.expect(Tok::RParen, "`)`")?;
            }
            "reduction" if for_like || parallel_like => {
                self.expect(Tok::LParen, "`(`")?;
                let op = match self.bump().tok {
                    Tok::Plus => ReductionOp::Add,
                    Tok::Star => ReductionOp::Mul,
                    Tok::Ident(w) if w == "min" => ReductionOp::Min,
                    Tok::Ident(w) if w == "max" => ReductionOp::Max,
                    _ => {
                        return Err(ParseError::syntax(
                            self.prev_span(),
                            "reduction operator must be +, *, min or max",
                        ))
                    }
                };
                self.expect(Tok::Colon, "`:`")?;
                let vars = self.ident_list()?;
                self.expect(Tok::RParen, "`)`")?;
                clauses.reductions.push(ReductionClause { op, vars });
            }
            "schedule" if for_like => {
                self.expect(Tok::LParen, "`(`")?;
                let (w, wspan) = self.expect_ident("a schedule kind")?;
                let sk = match w.as_str() {
                    "static" => ScheduleKind::Static,
                    "dynamic" => ScheduleKind::Dynamic,
                    "guided" => ScheduleKind::Guided,
                    _ => {
                        return Err(ParseError::syntax(
                            wspan,
                            "schedule kind must be static, dynamic or guided",
                        ))
                    }
                };
                let chunk = if self.eat(&Tok::Comma) { Some(self.expr(0)?) } else { None };
                self.expect(Tok::RParen, "`)`")?;
                clauses.schedule = Some(ScheduleClause { kind: sk, chunk });
            }
            "if" if parallel_like => {
                self.expect(Tok::LParen, "`(`")?;
                clauses.if_condition = Some(self.expr(0)?);
                self.expect(Tok::RParen, "`)`")?;
            }
            "nowait" => {
                clauses.nowait = true;
            }
            other => {
                return Err(ParseError::syntax(
                    span,
                    format!("clause `{other}` is not valid on this directive"),
                ))
            }
        }
        Ok(())
    }

    fn ident_list(&mut self) -> Result<Vec<String>, ParseError> {
        let mut out = Vec::new();
        loop {
            let (n, _) = self.expect_ident("a variable name")?;
            out.push(n);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(out)
    }

    // -----------------------------------------------------------------------
    // Expressions
    // -----------------------------------------------------------------------

    /// Statement-level expression: per the subset, assignment only occurs
    /// here (or in loop steps), never nested inside other expressions.
    fn assignment_expr(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        let lhs = self.expr(0)?;
        let op = match self.peek() {
            Tok::Assign => Some(AssignOp::Assign),
            Tok::PlusAssign => Some(AssignOp::Add),
            Tok::MinusAssign => Some(AssignOp::Sub),
            Tok::StarAssign => Some(AssignOp::Mul),
            Tok::SlashAssign => Some(AssignOp::Div),
            Tok::PercentAssign => Some(AssignOp::Mod),
            Tok::PlusPlus => {
                self.bump();
                check_lvalue(&lhs)?;
                return Ok(Expr::new(
                    ExprKind::Assign {
                        op: AssignOp::Add,
                        target: Box::new(lhs),
                        value: Box::new(Expr::new(ExprKind::IntLit(1), self.prev_span())),
                    },
                    span.to(self.prev_span()),
                ));
            }
            Tok::MinusMinus => {
                self.bump();
                check_lvalue(&lhs)?;
                return Ok(Expr::new(
                    ExprKind::Assign {
                        op: AssignOp::Sub,
                        target: Box::new(lhs),
                        value: Box::new(Expr::new(ExprKind::IntLit(1), self.prev_span())),
                    },
                    span.to(self.prev_span()),
                ));
            }
            _ => None,
        };
        match op {
            Some(op) => {
                self.bump();
                check_lvalue(&lhs)?;
                let value = self.expr(0)?;
                Ok(Expr::new(
                    ExprKind::Assign { op, target: Box::new(lhs), value: Box::new(value) },
                    span.to(self.prev_span()),
                ))
            }
            None => Ok(lhs),
        }
    }

    /// Precedence-climbing expression parser.
    fn expr(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let (op, prec) = match self.peek() {
                Tok::OrOr => (BinOp::LogOr, 1),
                Tok::AndAnd => (BinOp::LogAnd, 2),
                Tok::EqEq => (BinOp::Eq, 3),
                Tok::Ne => (BinOp::Ne, 3),
                Tok::Lt => (BinOp::Lt, 4),
                Tok::Gt => (BinOp::Gt, 4),
                Tok::Le => (BinOp::Le, 4),
                Tok::Ge => (BinOp::Ge, 4),
                Tok::Plus => (BinOp::Add, 5),
                Tok::Minus => (BinOp::Sub, 5),
                Tok::Star => (BinOp::Mul, 6),
                Tok::Slash => (BinOp::Div, 6),
                Tok::Percent => (BinOp::Mod, 6),
                _ => break,
            };
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.expr(prec + 1)?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr::new(
                ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) },
                span,
            );
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        match self.peek() {
            Tok::Minus => {
                self.bump();
                let operand = self.unary()?;
                let full = span.to(operand.span);
                Ok(Expr::new(ExprKind::Unary { op: UnaryOp::Neg, operand: Box::new(operand) }, full))
            }
            Tok::Not => {
                self.bump();
                let operand = self.unary()?;
                let full = span.to(operand.span);
                Ok(Expr::new(ExprKind::Unary { op: UnaryOp::Not, operand: Box::new(operand) }, full))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.postfix(),
        }
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        match self.bump().tok {
            Tok::Int(v) => Ok(Expr::new(ExprKind::IntLit(v), span)),
            Tok::Float(v) => Ok(Expr::new(ExprKind::FloatLit(v), span)),
            Tok::LParen => {
                let e = self.expr(0)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if UNSUPPORTED_KEYWORDS.contains(&name.as_str()) {
                    return Err(ParseError::unsupported(span, name));
                }
                if self.eat(&Tok::LParen) {
                    let mut args = Vec::new();
                    if !self.eat(&Tok::RParen) {
                        loop {
                            args.push(self.expr(0)?);
                            if self.eat(&Tok::Comma) {
                                continue;
                            }
                            self.expect(Tok::RParen, "`)`")?;
                            break;
                        }
                    }
                    return Ok(Expr::new(
                        ExprKind::Call { callee: name, args },
                        span.to(self.prev_span()),
                    ));
                }
                let mut subs = Vec::new();
                while self.eat(&Tok::LBracket) {
                    subs.push(self.expr(0)?);
                    self.expect(Tok::RBracket, "`]`")?;
                }
                if subs.is_empty() {
                    Ok(Expr::new(ExprKind::Var(name), span))
                } else {
                    Ok(Expr::new(
                        ExprKind::ArrayRef { base: name, subs },
                        span.to(self.prev_span()),
                    ))
                }
            }
            other => Err(ParseError::syntax(
                span,
                format!("expected an expression, found {}", describe(&other)),
            )),
        }
    }
}

fn check_lvalue(e: &Expr) -> Result<(), ParseError> {
    match &e.kind {
        ExprKind::Var(_) | ExprKind::ArrayRef { .. } => Ok(()),
        _ => Err(ParseError::syntax(e.span, "assignment target must be a variable or array element")),
    }
}

/// `x = x op expr` and `x op= expr`: the shapes the atomic construct accepts.
fn is_atomic_shape(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Assign { op, target, value } => match op {
            AssignOp::Assign => match &value.kind {
                ExprKind::Binary { op: bop, lhs, rhs } => {
                    matches!(bop, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div)
                        && (lhs.same_shape(target) || rhs.same_shape(target))
                }
                _ => false,
            },
            _ => true,
        },
        _ => false,
    }
}

/// Canonical when bounds are loop-invariant and the index is not written in
/// the body. Names written in the body invalidate bounds that mention them;
/// bare non-scalar arguments of calls count as written, but scalar arguments
/// pass by value and do not.
pub fn compute_canonical(
    index: &str,
    lower: &Expr,
    upper: &Expr,
    body: &Stmt,
    scalars: &BTreeSet<String>,
) -> bool {
    let mut written: BTreeSet<&str> = BTreeSet::new();
    let mut has_bound_call = false;
    lower.walk(&mut |e| {
        if matches!(e.kind, ExprKind::Call { .. }) {
            has_bound_call = true;
        }
    });
    upper.walk(&mut |e| {
        if matches!(e.kind, ExprKind::Call { .. }) {
            has_bound_call = true;
        }
    });
    if has_bound_call {
        return false;
    }
    body.walk(&mut |s| {
        if let StmtKind::For(f) = &s.kind {
            written.insert(&f.header.index);
        }
    });
    body.walk_exprs(&mut |e| match &e.kind {
        ExprKind::Assign { target, .. } => match &target.kind {
            ExprKind::Var(n) => {
                written.insert(n);
            }
            ExprKind::ArrayRef { base, .. } => {
                written.insert(base);
            }
            _ => {}
        },
        ExprKind::Call { args, .. } => {
            for a in args {
                if let ExprKind::Var(n) = &a.kind {
                    if !scalars.contains(n) {
                        written.insert(n);
                    }
                }
            }
        }
        _ => {}
    });
    if written.contains(index) {
        return false;
    }
    let mut invariant = true;
    let mut check = |e: &Expr| {
        e.walk(&mut |e| match &e.kind {
            ExprKind::Var(n) if written.contains(n.as_str()) || n == index => invariant = false,
            ExprKind::ArrayRef { base, .. } if written.contains(base.as_str()) => invariant = false,
            _ => {}
        });
    };
    check(lower);
    check(upper);
    invariant
}

/// Recompute every loop's canonical flag, using a per-function flattened
/// view of scalar declarations. Transform passes that restructure bodies
/// call this to keep the flags accurate.
pub fn refresh_canonical(ast: &mut Ast) {
    let mut global_scalars: BTreeSet<String> = BTreeSet::new();
    for item in &ast.items {
        if let Item::Global(d) = item {
            if !d.ty.is_array() {
                global_scalars.insert(d.name.clone());
            }
        }
    }
    for item in &mut ast.items {
        let Item::Function(f) = item else { continue };
        let mut scalars = global_scalars.clone();
        for p in &f.params {
            if !p.ty.is_array() {
                scalars.insert(p.name.clone());
            }
        }
        f.body.walk(&mut |s| {
            if let StmtKind::Decl(d) = &s.kind {
                if !d.ty.is_array() {
                    scalars.insert(d.name.clone());
                }
            }
        });
        refresh_stmt(&mut f.body, &scalars);
    }
}

fn refresh_stmt(s: &mut Stmt, scalars: &BTreeSet<String>) {
    match &mut s.kind {
        StmtKind::Compound(items) => items.iter_mut().for_each(|i| refresh_stmt(i, scalars)),
        StmtKind::For(f) => {
            refresh_stmt(&mut f.body, scalars);
            f.header.canonical = compute_canonical(
                &f.header.index,
                &f.header.lower,
                &f.header.upper,
                &f.body,
                scalars,
            );
        }
        StmtKind::If { then_branch, else_branch, .. } => {
            refresh_stmt(then_branch, scalars);
            if let Some(e) = else_branch {
                refresh_stmt(e, scalars);
            }
        }
        _ => {}
    }
}

fn validate_directive(d: &OmpDirective) -> Result<(), ParseError> {
    let c = &d.clauses;
    if c.nowait && !d.is_worksharing() {
        return Err(ParseError::syntax(
            d.span,
            "nowait is only valid on worksharing for/single constructs",
        ));
    }
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for v in c.data_sharing_vars() {
        if !seen.insert(v) {
            return Err(ParseError::syntax(
                d.span,
                format!("variable `{v}` appears in more than one data-sharing clause"),
            ));
        }
    }
    if matches!(d.kind, DirectiveKind::Critical(_) | DirectiveKind::Atomic | DirectiveKind::Barrier)
        && *c != ClauseSet::default()
    {
        return Err(ParseError::syntax(d.span, "this directive takes no clauses"));
    }
    Ok(())
}

/// Threadprivate lists may only name file-scope static/global variables.
fn validate_threadprivate(ast: &Ast) -> Result<(), ParseError> {
    for item in &ast.items {
        if let Item::Threadprivate(d) = item {
            if let DirectiveKind::Threadprivate(vars) = &d.kind {
                for v in vars {
                    match ast.global_decl(v) {
                        Some(_) => {}
                        None => {
                            return Err(ParseError::syntax(
                                d.span,
                                format!("threadprivate variable `{v}` is not a file-scope variable"),
                            ))
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(w) => format!("`{w}`"),
        Tok::Int(v) => format!("`{v}`"),
        Tok::Float(v) => format!("`{v:?}`"),
        Tok::Eof => "end of input".to_string(),
        Tok::PragmaOmp => "`#pragma omp`".to_string(),
        Tok::PragmaEnd => "end of pragma".to_string(),
        other => format!("{other:?}"),
    }
}

//! Recursive-descent parser for `.susm`, `.susp` and `.susc` documents.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use super::lexer::{tokenize, Tok, Token};
use super::{ParseResult, Parsed, SourceLoader};
use crate::catalogue::Catalogue;
use crate::diagnostic::{has_errors, normalize, Code, Diagnostic, SourceSpan};
use crate::model::{Dimension, Element, ElementKind, Fragment, Link, LinkKind, Model, Strategy};
use crate::patterns::{Archetype, PatternDoc, Role};
use crate::validator::validate_pattern;

/// Syntax errors abort the parse; everything else is collected.
struct Abort;

type PResult<T> = Result<T, Abort>;

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    file: PathBuf,
    loader: Option<&'a dyn SourceLoader>,
    diags: Vec<Diagnostic>,
}

struct LinkDecl {
    link: Link,
    span: SourceSpan,
}

struct FragmentDecl {
    name: String,
    anchor: Option<String>,
    elements: Vec<(String, SourceSpan)>,
    links: Vec<(String, SourceSpan)>,
    external: Option<String>,
    span: SourceSpan,
}

/// Contents of a block of element/link/fragment statements before
/// references are resolved.
#[derive(Default)]
struct Statements {
    elements: Vec<(Element, SourceSpan)>,
    links: Vec<LinkDecl>,
    fragments: Vec<FragmentDecl>,
    meta: BTreeMap<String, String>,
}

impl<'a> Parser<'a> {
    fn new(text: &str, file: &Path, loader: Option<&'a dyn SourceLoader>) -> Result<Self, Diagnostic> {
        Ok(Parser {
            toks: tokenize(text, file)?,
            pos: 0,
            file: file.to_path_buf(),
            loader,
            diags: Vec::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span(&self.file)
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn push(&mut self, code: Code, message: impl Into<String>, span: SourceSpan) {
        self.diags.push(Diagnostic::new(code, message, Some(span)));
    }

    fn fail<T>(&mut self, message: impl Into<String>) -> PResult<T> {
        let span = self.span();
        self.push(Code::D0, message, span);
        Err(Abort)
    }

    fn expect(&mut self, tok: Tok) -> PResult<Token> {
        if *self.peek() == tok {
            Ok(self.advance())
        } else {
            let found = self.peek().describe();
            self.fail(format!("expected {}, found {found}", tok.describe()))
        }
    }

    fn is_keyword(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == word)
    }

    fn keyword(&mut self, word: &str) -> PResult<Token> {
        if self.is_keyword(word) {
            Ok(self.advance())
        } else {
            let found = self.peek().describe();
            self.fail(format!("expected `{word}`, found {found}"))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.advance();
                Ok((s, span))
            }
            other => self.fail(format!("expected {what}, found {}", other.describe())),
        }
    }

    fn string(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.advance();
                Ok(s)
            }
            other => self.fail(format!("expected {what} string, found {}", other.describe())),
        }
    }

    fn finish(&mut self) -> PResult<()> {
        if *self.peek() != Tok::Eof {
            let found = self.peek().describe();
            return self.fail(format!("expected end of input, found {found}"));
        }
        Ok(())
    }

    /// `[a, b, c]` with an optional trailing comma.
    fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        self.expect(Tok::LBracket)?;
        let mut out = Vec::new();
        while *self.peek() != Tok::RBracket {
            out.push(item(self)?);
            if *self.peek() == Tok::Comma {
                self.advance();
            } else {
                break;
            }
        }
        self.expect(Tok::RBracket)?;
        Ok(out)
    }

    fn dimensions(&mut self) -> PResult<BTreeSet<Dimension>> {
        let names = self.list(|p| p.ident("a dimension"))?;
        let mut dims = BTreeSet::new();
        for (name, span) in names {
            match Dimension::lookup(&name) {
                Some((dim, alias)) => {
                    if alias {
                        self.push(Code::D1, format!("dimension `{name}` normalized to `{dim}`"), span);
                    }
                    dims.insert(dim);
                }
                None => {
                    let canonical: Vec<_> = Dimension::ALL.iter().map(|d| d.as_str()).collect();
                    self.push(
                        Code::D3,
                        format!("unknown dimension `{name}`; expected one of {}", canonical.join(", ")),
                        span,
                    );
                }
            }
        }
        Ok(dims)
    }

    fn meta(&mut self, into: &mut BTreeMap<String, String>) -> PResult<()> {
        self.keyword("meta")?;
        let (key, span) = self.ident("a meta key")?;
        self.expect(Tok::Eq)?;
        let value = self.string("a meta value")?;
        if into.insert(key.clone(), value).is_some() {
            self.push(Code::D2, format!("meta key `{key}` is set twice"), span);
        }
        Ok(())
    }

    fn element(&mut self, kind: ElementKind) -> PResult<(Element, SourceSpan)> {
        self.advance();
        let (id, span) = self.ident("an element id")?;
        let mut element = Element::new(id, kind, "");
        let mut seen = BTreeSet::new();
        loop {
            let clause_span = self.span();
            let clause = match self.peek() {
                Tok::Ident(w) if w == "dims" => "dims",
                Tok::Ident(w) if w == "tagged" => "tagged",
                Tok::Str(_) => "label",
                Tok::LBrace => "attributes",
                _ => break,
            };
            if !seen.insert(clause) {
                self.push(Code::D2, format!("element `{}` has more than one {clause} clause", element.id), clause_span);
            }
            match clause {
                "dims" => {
                    self.advance();
                    element.dimensions = self.dimensions()?;
                }
                "tagged" => {
                    self.advance();
                    element.is_tagged = true;
                }
                "label" => element.label = self.string("a label")?,
                _ => {
                    self.advance();
                    while *self.peek() != Tok::RBrace {
                        let (key, key_span) = self.ident("an attribute name")?;
                        self.expect(Tok::Eq)?;
                        let value = self.string("an attribute value")?;
                        if element.attrs.insert(key.clone(), value).is_some() {
                            self.push(Code::D2, format!("attribute `{key}` is set twice"), key_span);
                        }
                        if *self.peek() == Tok::Comma {
                            self.advance();
                        }
                    }
                    self.expect(Tok::RBrace)?;
                }
            }
        }
        Ok((element, span))
    }

    fn endpoint(&mut self, roles_allowed: bool) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.advance();
                Ok(s)
            }
            Tok::RoleRef(r) if roles_allowed => {
                self.advance();
                Ok(format!("${r}"))
            }
            Tok::RoleRef(_) => self.fail("role placeholders are only allowed inside an archetype"),
            other => self.fail(format!("expected an element id, found {}", other.describe())),
        }
    }

    fn link(&mut self, roles_allowed: bool) -> PResult<LinkDecl> {
        let span = self.keyword("link")?.span(&self.file);
        let (kind_name, kind_span) = self.ident("a link kind")?;
        let kind = kind_name.parse::<LinkKind>();
        if kind.is_err() {
            let known: Vec<_> = LinkKind::ALL.iter().map(|k| k.as_str()).collect();
            self.push(
                Code::D3,
                format!("unknown link kind `{kind_name}`; expected one of {}", known.join(", ")),
                kind_span,
            );
        }
        self.expect(Tok::LParen)?;
        let source = self.endpoint(roles_allowed)?;
        self.expect(Tok::Arrow)?;
        let target = self.endpoint(roles_allowed)?;
        self.expect(Tok::RParen)?;

        let mut id = None;
        let mut strategy = None;
        loop {
            if self.is_keyword("as") {
                self.advance();
                id = Some(self.ident("a link id")?.0);
            } else if self.is_keyword("strategy") {
                self.advance();
                self.expect(Tok::Eq)?;
                let (name, s_span) = self.ident("a strategy")?;
                match name.parse::<Strategy>() {
                    Ok(s) => strategy = Some(s),
                    Err(()) => {
                        let known: Vec<_> = Strategy::ALL.iter().map(|s| s.as_str()).collect();
                        self.push(
                            Code::D3,
                            format!("unknown strategy `{name}`; expected one of {}", known.join(", ")),
                            s_span,
                        );
                    }
                }
            } else {
                break;
            }
        }
        let kind = kind.unwrap_or(LinkKind::Refines);
        let mut link = Link::new(kind, source, target);
        if let Some(id) = id {
            link.id = id;
        }
        link.strategy = strategy;
        Ok(LinkDecl { link, span })
    }

    fn fragment(&mut self) -> PResult<FragmentDecl> {
        let span = self.keyword("fragment")?.span(&self.file);
        let (name, _) = self.ident("a fragment name")?;
        let mut decl = FragmentDecl {
            name,
            anchor: None,
            elements: Vec::new(),
            links: Vec::new(),
            external: None,
            span,
        };
        if self.is_keyword("at") {
            self.advance();
            decl.anchor = Some(self.ident("an anchor element id")?.0);
        }
        if self.is_keyword("from") {
            self.advance();
            decl.external = Some(self.string("a file path")?);
            return Ok(decl);
        }
        self.expect(Tok::LBrace)?;
        while *self.peek() != Tok::RBrace {
            if self.is_keyword("elements") {
                self.advance();
                let ids = self.list(|p| p.ident("an element id"))?;
                decl.elements.extend(ids);
            } else if self.is_keyword("links") {
                self.advance();
                let ids = self.list(|p| p.ident("a link id"))?;
                decl.links.extend(ids);
            } else {
                let found = self.peek().describe();
                return self.fail(format!("expected `elements` or `links`, found {found}"));
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(decl)
    }

    /// Statements of a model block up to the closing brace.
    fn statements(&mut self) -> PResult<Statements> {
        let mut out = Statements::default();
        while *self.peek() != Tok::RBrace {
            let word = match self.peek() {
                Tok::Ident(w) => w.clone(),
                other => {
                    let found = other.describe();
                    return self.fail(format!("expected a declaration, found {found}"));
                }
            };
            if let Ok(kind) = word.parse::<ElementKind>() {
                out.elements.push(self.element(kind)?);
            } else {
                match word.as_str() {
                    "link" => out.links.push(self.link(false)?),
                    "fragment" => out.fragments.push(self.fragment()?),
                    "meta" => self.meta(&mut out.meta)?,
                    _ => {
                        let kinds: Vec<_> = ElementKind::ALL.iter().map(|k| k.as_str()).collect();
                        return self.fail(format!(
                            "unknown declaration `{word}`; expected link, fragment, meta or one of {}",
                            kinds.join(", ")
                        ));
                    }
                }
            }
        }
        Ok(out)
    }

    fn insert_element(&mut self, model: &mut Model, element: Element, span: SourceSpan) {
        if model.contains_id(&element.id) {
            self.push(Code::V1, format!("duplicate identifier `{}`", element.id), span);
            return;
        }
        if element.kind.requires_dimensions() && element.dimensions.is_empty() {
            self.push(
                Code::D4,
                format!("{} `{}` must carry at least one dimension", element.kind, element.id),
                span.clone(),
            );
        }
        model.source.spans.insert(format!("element:{}", element.id), span);
        model.elements.insert(element.id.clone(), element);
    }

    fn insert_link(&mut self, model: &mut Model, decl: LinkDecl) {
        let LinkDecl { link, span } = decl;
        if model.contains_id(&link.id) {
            self.push(Code::V1, format!("duplicate identifier `{}`", link.id), span);
            return;
        }
        let mut ok = true;
        for endpoint in [&link.source, &link.target] {
            if !model.elements.contains_key(endpoint) {
                self.push(Code::V1, format!("link refers to unknown element `{endpoint}`"), span.clone());
                ok = false;
            }
        }
        if ok {
            model.source.spans.insert(format!("link:{}", link.id), span);
            model.links.insert(link.id.clone(), link);
        }
    }

    /// Builds a model from statements: elements first, then external
    /// fragments, links and finally inline fragments.
    fn build_model(&mut self, name: String, stmts: Statements, header: SourceSpan) -> Model {
        let mut model = Model::new(name);
        model.meta = stmts.meta;
        model.source.file = Some(self.file.clone());
        model.source.spans.insert("header".into(), header);
        for (element, span) in stmts.elements {
            self.insert_element(&mut model, element, span);
        }

        let mut fragments = Vec::new();
        for decl in stmts.fragments {
            let Some(path) = decl.external.clone() else {
                fragments.push(decl);
                continue;
            };
            let Some(loaded) = self.load_external(&path, &decl.span) else {
                continue;
            };
            let mut fragment = decl;
            for (id, element) in loaded.elements {
                let span = loaded.source.spans.get(&format!("element:{id}")).cloned().unwrap_or_else(|| fragment.span.clone());
                fragment.elements.push((id, span.clone()));
                self.insert_element(&mut model, element, span);
            }
            for (id, link) in loaded.links {
                let span = loaded.source.spans.get(&format!("link:{id}")).cloned().unwrap_or_else(|| fragment.span.clone());
                fragment.links.push((id, span.clone()));
                self.insert_link(&mut model, LinkDecl { link, span });
            }
            model.source.external.insert(fragment.name.clone(), path);
            fragments.push(fragment);
        }

        for decl in stmts.links {
            self.insert_link(&mut model, decl);
        }

        for decl in fragments {
            if model.fragments.contains_key(&decl.name) {
                self.push(Code::V1, format!("duplicate fragment `{}`", decl.name), decl.span);
                continue;
            }
            let mut fragment = Fragment::new(decl.name.clone());
            for (id, span) in decl.elements {
                if !model.elements.contains_key(&id) {
                    self.push(Code::V1, format!("fragment `{}` lists unknown element `{id}`", decl.name), span);
                }
                fragment.elements.insert(id);
            }
            for (id, span) in decl.links {
                if !model.links.contains_key(&id) {
                    self.push(Code::V1, format!("fragment `{}` lists unknown link `{id}`", decl.name), span);
                }
                fragment.links.insert(id);
            }
            if let Some(anchor) = &decl.anchor {
                if !model.elements.contains_key(anchor) {
                    self.push(
                        Code::V5,
                        format!("fragment `{}` is anchored at unknown element `{anchor}`", decl.name),
                        decl.span.clone(),
                    );
                }
            }
            fragment.anchor = decl.anchor;
            model.source.spans.insert(format!("fragment:{}", decl.name), decl.span);
            model.fragments.insert(decl.name, fragment);
        }
        model
    }

    fn load_external(&mut self, path: &str, span: &SourceSpan) -> Option<Model> {
        let Some(loader) = self.loader else {
            self.push(Code::D5, format!("cannot load `{path}`: no file context"), span.clone());
            return None;
        };
        let (file, text) = match loader.load(Some(&self.file), path) {
            Ok(loaded) => loaded,
            Err(err) => {
                self.push(Code::D5, format!("cannot load `{path}`: {err}"), span.clone());
                return None;
            }
        };
        // External fragment files are leaves: they may not pull in further files.
        match parse_model_source(&text, &file, None) {
            Ok(parsed) => {
                self.diags.extend(parsed.warnings);
                if !parsed.value.fragments.is_empty() {
                    self.push(Code::D5, format!("external fragment file `{path}` may not declare fragments"), span.clone());
                    return None;
                }
                Some(parsed.value)
            }
            Err(diags) => {
                self.diags.extend(diags);
                None
            }
        }
    }

    fn model_document(&mut self) -> PResult<Model> {
        let header = self.keyword("model")?.span(&self.file);
        let name = self.string("a model name")?;
        self.expect(Tok::LBrace)?;
        let stmts = self.statements()?;
        self.expect(Tok::RBrace)?;
        self.finish()?;
        Ok(self.build_model(name, stmts, header))
    }

    fn archetype(&mut self, pattern: &mut PatternDoc) -> PResult<()> {
        self.expect(Tok::LBrace)?;
        let mut archetype = Archetype::default();
        let mut body = Model::new("archetype");
        body.source.file = Some(self.file.clone());
        while *self.peek() != Tok::RBrace {
            let word = match self.peek() {
                Tok::Ident(w) => w.clone(),
                other => {
                    let found = other.describe();
                    return self.fail(format!("expected an archetype declaration, found {found}"));
                }
            };
            if let Ok(kind) = word.parse::<ElementKind>() {
                let (element, span) = self.element(kind)?;
                if body.elements.contains_key(&element.id) {
                    self.push(Code::V1, format!("duplicate identifier `{}`", element.id), span);
                    continue;
                }
                body.source.spans.insert(format!("element:{}", element.id), span);
                body.elements.insert(element.id.clone(), element);
                continue;
            }
            match word.as_str() {
                "role" => {
                    self.advance();
                    let (name, span) = self.ident("a role name")?;
                    if !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
                        self.push(Code::D0, format!("role name `{name}` may only use letters, digits and `_`"), span.clone());
                    }
                    self.expect(Tok::Colon)?;
                    let (kind_name, kind_span) = self.ident("an element kind")?;
                    let Ok(kind) = kind_name.parse::<ElementKind>() else {
                        self.push(Code::D3, format!("unknown element kind `{kind_name}`"), kind_span);
                        continue;
                    };
                    if archetype.role(&name).is_some() {
                        self.push(Code::D2, format!("role `{name}` is declared twice"), span);
                        continue;
                    }
                    pattern.source.spans.insert(format!("role:{name}"), span);
                    archetype.roles.push(Role { name, kind });
                }
                "link" => {
                    let LinkDecl { link, span } = self.link(true)?;
                    if body.links.contains_key(&link.id) || body.elements.contains_key(&link.id) {
                        self.push(Code::V1, format!("duplicate identifier `{}`", link.id), span);
                        continue;
                    }
                    body.source.spans.insert(format!("link:{}", link.id), span);
                    body.links.insert(link.id.clone(), link);
                }
                "explanation" => {
                    let span = self.advance().span(&self.file);
                    if archetype.explanation.is_some() {
                        self.push(Code::D2, "archetype explanation is given twice", span);
                    }
                    archetype.explanation = Some(self.string("an explanation")?);
                }
                _ => return self.fail(format!("unknown archetype declaration `{word}`")),
            }
        }
        self.expect(Tok::RBrace)?;
        archetype.body = body;
        pattern.archetype = archetype;
        Ok(())
    }

    /// `pattern "<name>" { ... }`, starting at the `pattern` keyword.
    fn pattern_block(&mut self) -> PResult<PatternDoc> {
        let header = self.keyword("pattern")?.span(&self.file);
        let mut pattern = PatternDoc {
            name: self.string("a pattern name")?,
            ..PatternDoc::default()
        };
        pattern.source.file = Some(self.file.clone());
        pattern.source.spans.insert("header".into(), header.clone());
        self.expect(Tok::LBrace)?;
        let mut seen = BTreeSet::new();
        while *self.peek() != Tok::RBrace {
            let span = self.span();
            let field = match self.peek() {
                Tok::Ident(w) => w.clone(),
                other => {
                    let found = other.describe();
                    return self.fail(format!("expected a pattern field, found {found}"));
                }
            };
            if field == "meta" {
                self.meta(&mut pattern.meta)?;
                continue;
            }
            const FIELDS: [&str; 9] = [
                "summary",
                "category",
                "dimensions",
                "applicability",
                "content",
                "archetype",
                "example",
                "discussion",
                "related",
            ];
            if !FIELDS.contains(&field.as_str()) {
                return self.fail(format!("unknown pattern field `{field}`; expected one of {}", FIELDS.join(", ")));
            }
            if !seen.insert(field.clone()) {
                self.push(Code::D2, format!("field `{field}` is given twice"), span.clone());
            }
            pattern.source.spans.insert(format!("field:{field}"), span);
            self.advance();
            match field.as_str() {
                "summary" => pattern.summary = self.string("a summary")?,
                "category" => {
                    let (primary, span) = self.ident("a category")?;
                    pattern.source.spans.insert(format!("category:{primary}"), span);
                    pattern.category_primary = primary;
                    if self.is_keyword("secondary") {
                        self.advance();
                        pattern.category_secondary = Some(self.ident("a secondary category")?.0);
                    }
                }
                "dimensions" => pattern.dimensions = self.dimensions()?,
                "applicability" => pattern.applicability = self.string("an applicability")?,
                "content" => pattern.content = self.string("a content")?,
                "archetype" => self.archetype(&mut pattern)?,
                "example" => pattern.example = self.string("an example")?,
                "discussion" => pattern.discussion = Some(self.string("a discussion")?),
                "related" => {
                    let names = self.list(|p| {
                        let span = p.span();
                        p.string("a related pattern name").map(|n| (n, span))
                    })?;
                    for (name, span) in names {
                        pattern.source.spans.insert(format!("related:{name}"), span);
                        pattern.related.push(name);
                    }
                }
                _ => unreachable!(),
            }
        }
        self.expect(Tok::RBrace)?;

        if !seen.contains("archetype") {
            self.push(
                Code::P1,
                format!("pattern `{}` is missing mandatory field `archetype`", pattern.name),
                header,
            );
        }
        // Template completeness is checked here so a parse fails on P1.
        self.diags.extend(
            validate_pattern(&pattern)
                .into_iter()
                .filter(|d| d.code == Code::P1),
        );
        Ok(pattern)
    }

    fn pattern_document(&mut self) -> PResult<PatternDoc> {
        let pattern = self.pattern_block()?;
        self.finish()?;
        Ok(pattern)
    }

    fn include(&mut self) -> PResult<Option<(PatternDoc, String)>> {
        let span = self.keyword("include")?.span(&self.file);
        let path = self.string("a file path")?;
        let Some(loader) = self.loader else {
            self.push(Code::D5, format!("cannot load `{path}`: no file context"), span);
            return Ok(None);
        };
        let (file, text) = match loader.load(Some(&self.file), &path) {
            Ok(loaded) => loaded,
            Err(err) => {
                self.push(Code::D5, format!("cannot load `{path}`: {err}"), span);
                return Ok(None);
            }
        };
        match parse_pattern_source(&text, &file, None) {
            Ok(parsed) => {
                self.diags.extend(parsed.warnings);
                Ok(Some((parsed.value, path)))
            }
            Err(diags) => {
                self.diags.extend(diags);
                Ok(None)
            }
        }
    }

    fn catalogue_document(&mut self) -> PResult<Catalogue> {
        let header = self.keyword("catalogue")?.span(&self.file);
        let mut catalogue = Catalogue {
            name: self.string("a catalogue name")?,
            ..Catalogue::default()
        };
        catalogue.source.file = Some(self.file.clone());
        catalogue.source.spans.insert("header".into(), header);
        self.expect(Tok::LBrace)?;
        let mut seen_cycle = false;
        let mut seen_center = false;
        while *self.peek() != Tok::RBrace {
            let span = self.span();
            if self.is_keyword("cycle") {
                self.advance();
                if seen_cycle {
                    self.push(Code::D2, "the cycle is declared twice", span.clone());
                }
                seen_cycle = true;
                let categories = self.list(|p| p.ident("a category"))?;
                for (name, span) in categories {
                    catalogue.source.spans.entry(format!("category:{name}")).or_insert(span);
                    catalogue.cycle.push(name);
                }
            } else if self.is_keyword("center") {
                self.advance();
                if seen_center {
                    self.push(Code::D2, "the center is declared twice", span.clone());
                }
                seen_center = true;
                let (name, span) = self.ident("a category")?;
                catalogue.source.spans.entry(format!("category:{name}")).or_insert(span);
                catalogue.center = name;
            } else if self.is_keyword("meta") {
                self.meta(&mut catalogue.meta)?;
            } else if self.is_keyword("include") {
                if let Some((pattern, path)) = self.include()? {
                    catalogue.source.spans.insert(format!("pattern:{}", pattern.name), span);
                    catalogue.source.external.insert(pattern.name.clone(), path);
                    catalogue.patterns.push(pattern);
                }
            } else if self.is_keyword("pattern") {
                let pattern = self.pattern_block()?;
                catalogue.source.spans.insert(format!("pattern:{}", pattern.name), span);
                catalogue.patterns.push(pattern);
            } else {
                let found = self.peek().describe();
                return self.fail(format!(
                    "expected `cycle`, `center`, `meta`, `include` or `pattern`, found {found}"
                ));
            }
        }
        self.expect(Tok::RBrace)?;
        self.finish()?;
        catalogue.patterns.sort_by(|a, b| a.name.cmp(&b.name));
        self.diags.extend(catalogue.structure_diagnostics());
        Ok(catalogue)
    }

    fn into_result<T>(mut self, value: PResult<T>) -> ParseResult<T> {
        normalize(&mut self.diags);
        match value {
            Ok(value) if !has_errors(&self.diags) => Ok(Parsed {
                value,
                warnings: self.diags,
            }),
            _ => Err(self.diags),
        }
    }
}

fn run<T>(
    text: &str,
    file: &Path,
    loader: Option<&dyn SourceLoader>,
    document: impl FnOnce(&mut Parser<'_>) -> PResult<T>,
) -> ParseResult<T> {
    let mut parser = Parser::new(text, file, loader).map_err(|d| vec![d])?;
    let value = document(&mut parser);
    parser.into_result(value)
}

pub(crate) fn parse_model_source(text: &str, file: &Path, loader: Option<&dyn SourceLoader>) -> ParseResult<Model> {
    run(text, file, loader, |p| p.model_document())
}

pub(crate) fn parse_pattern_source(
    text: &str,
    file: &Path,
    loader: Option<&dyn SourceLoader>,
) -> ParseResult<PatternDoc> {
    run(text, file, loader, |p| p.pattern_document())
}

pub(crate) fn parse_catalogue_source(
    text: &str,
    file: &Path,
    loader: Option<&dyn SourceLoader>,
) -> ParseResult<Catalogue> {
    run(text, file, loader, |p| p.catalogue_document())
}

/// Parses one binding statement per role:
/// `Role = existing:<id>` or
/// `Role = fresh:"<label>" kind=<kind> [dims=[...]] [tagged]`.
pub(crate) fn parse_binding_source(text: &str, file: &Path) -> ParseResult<crate::patterns::Binding> {
    use crate::patterns::{Binding, FreshElement, RoleTarget};
    run(text, file, None, |p| {
        let mut binding = Binding::default();
        while *p.peek() != Tok::Eof {
            let (role, span) = p.ident("a role name")?;
            p.expect(Tok::Eq)?;
            let (mode, _) = p.ident("`existing` or `fresh`")?;
            p.expect(Tok::Colon)?;
            let target = match mode.as_str() {
                "existing" => RoleTarget::Existing(p.ident("an element id")?.0),
                "fresh" => {
                    let label = p.string("a label")?;
                    let mut kind = None;
                    let mut dimensions = BTreeSet::new();
                    let mut is_tagged = false;
                    loop {
                        let is_clause = |w: &str| matches!(p.peek(), Tok::Ident(x) if x == w) && *p.peek_at(1) == Tok::Eq;
                        if is_clause("kind") {
                            p.advance();
                            p.advance();
                            let (name, kind_span) = p.ident("an element kind")?;
                            match name.parse::<ElementKind>() {
                                Ok(k) => kind = Some(k),
                                Err(()) => p.push(Code::D3, format!("unknown element kind `{name}`"), kind_span),
                            }
                        } else if is_clause("dims") {
                            p.advance();
                            p.advance();
                            dimensions = p.dimensions()?;
                        } else if p.is_keyword("tagged") && *p.peek_at(1) != Tok::Eq {
                            p.advance();
                            is_tagged = true;
                        } else {
                            break;
                        }
                    }
                    let Some(kind) = kind else {
                        p.push(Code::D0, format!("fresh binding for `{role}` needs `kind=<kind>`"), span.clone());
                        continue;
                    };
                    RoleTarget::Fresh(FreshElement {
                        label,
                        kind,
                        dimensions,
                        is_tagged,
                    })
                }
                other => return p.fail(format!("expected `existing` or `fresh`, found `{other}`")),
            };
            if binding.roles.insert(role.clone(), target).is_some() {
                p.push(Code::D2, format!("role `{role}` is bound twice"), span);
            }
        }
        Ok(binding)
    })
}

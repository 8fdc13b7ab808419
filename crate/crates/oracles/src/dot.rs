//! A checker for the Graphviz DOT language, written directly from the
//! published grammar:
//!
//! ```text
//! graph     : [strict] (graph | digraph) [ID] '{' stmt_list '}'
//! stmt_list : [stmt [';'] stmt_list]
//! stmt      : node_stmt | edge_stmt | attr_stmt | ID '=' ID | subgraph
//! attr_stmt : (graph | node | edge) attr_list
//! attr_list : '[' [a_list] ']' [attr_list]
//! a_list    : ID '=' ID [(';' | ',')] [a_list]
//! edge_stmt : (node_id | subgraph) edgeRHS [attr_list]
//! edgeRHS   : edgeop (node_id | subgraph) [edgeRHS]
//! node_stmt : node_id [attr_list]
//! node_id   : ID [port]
//! subgraph  : [subgraph [ID]] '{' stmt_list '}'
//! ```
//!
//! Besides accepting or rejecting, the checker records what it saw so tests
//! can inspect node attributes and cluster membership.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
enum T {
    Id(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Eq,
    Semi,
    Comma,
    Colon,
    Edge(&'static str),
}

fn lex(src: &str) -> Result<Vec<T>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    let mut line_start = true;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line_start = true;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' && line_start {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        line_start = false;
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            i += 2;
            while i + 1 < chars.len() && !(chars[i] == '*' && chars[i + 1] == '/') {
                i += 1;
            }
            if i + 1 >= chars.len() {
                return Err("unterminated comment".into());
            }
            i += 2;
            continue;
        }
        let single = match c {
            '{' => Some(T::LBrace),
            '}' => Some(T::RBrace),
            '[' => Some(T::LBracket),
            ']' => Some(T::RBracket),
            '=' => Some(T::Eq),
            ';' => Some(T::Semi),
            ',' => Some(T::Comma),
            ':' => Some(T::Colon),
            _ => None,
        };
        if let Some(t) = single {
            out.push(t);
            i += 1;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push(T::Edge("->"));
            i += 2;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            out.push(T::Edge("--"));
            i += 2;
            continue;
        }
        if c == '"' {
            i += 1;
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None => return Err("unterminated string".into()),
                    Some('"') => break,
                    Some('\\') if chars.get(i + 1) == Some(&'"') => {
                        s.push('"');
                        i += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            i += 1;
            out.push(T::Id(s));
            continue;
        }
        if c == '<' {
            let mut depth = 0;
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None => return Err("unterminated HTML string".into()),
                    Some('<') => depth += 1,
                    Some('>') => depth -= 1,
                    _ => {}
                }
                s.push(chars[i]);
                i += 1;
                if depth == 0 {
                    break;
                }
            }
            out.push(T::Id(s));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' || !c.is_ascii() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || !chars[i].is_ascii()) {
                i += 1;
            }
            out.push(T::Id(chars[start..i].iter().collect()));
            continue;
        }
        if c.is_ascii_digit() || c == '.' || c == '-' {
            let start = i;
            if c == '-' {
                i += 1;
            }
            let mut dots = 0;
            let mut digits = 0;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                if chars[i] == '.' {
                    dots += 1;
                } else {
                    digits += 1;
                }
                i += 1;
            }
            if dots > 1 || digits == 0 {
                return Err(format!("malformed numeral `{}`", chars[start..i].iter().collect::<String>()));
            }
            if i < chars.len() && (chars[i].is_ascii_alphabetic() || chars[i] == '_') {
                return Err("numeral followed by letters".into());
            }
            out.push(T::Id(chars[start..i].iter().collect()));
            continue;
        }
        return Err(format!("unexpected character `{c}`"));
    }
    Ok(out)
}

/// What a successful check found.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DotGraph {
    pub directed: bool,
    pub strict: bool,
    pub name: Option<String>,
    /// Attributes given directly on node statements, merged per node.
    pub nodes: BTreeMap<String, BTreeMap<String, String>>,
    pub edges: Vec<(String, String, BTreeMap<String, String>)>,
    /// Named subgraphs with the nodes mentioned inside them.
    pub subgraphs: Vec<(String, Vec<String>)>,
    /// `graph [k=v]` and `k=v` statements at any level.
    pub graph_attrs: BTreeMap<String, String>,
}

impl DotGraph {
    pub fn clusters(&self) -> Vec<&(String, Vec<String>)> {
        self.subgraphs.iter().filter(|(name, _)| name.starts_with("cluster")).collect()
    }
}

struct P {
    toks: Vec<T>,
    pos: usize,
    graph: DotGraph,
    /// Open subgraph indexes.
    stack: Vec<usize>,
}

impl P {
    fn peek(&self) -> Option<&T> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<T> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, t: T) -> Result<(), String> {
        match self.next() {
            Some(ref got) if *got == t => Ok(()),
            got => Err(format!("expected {t:?}, found {got:?}")),
        }
    }

    fn id(&mut self) -> Result<String, String> {
        match self.next() {
            Some(T::Id(s)) => Ok(s),
            got => Err(format!("expected ID, found {got:?}")),
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(T::Id(s)) if s.eq_ignore_ascii_case(kw))
    }

    fn attr_list(&mut self) -> Result<BTreeMap<String, String>, String> {
        let mut attrs = BTreeMap::new();
        while self.peek() == Some(&T::LBracket) {
            self.next();
            while self.peek() != Some(&T::RBracket) {
                let k = self.id()?;
                self.expect(T::Eq)?;
                let v = self.id()?;
                attrs.insert(k, v);
                if matches!(self.peek(), Some(T::Semi) | Some(T::Comma)) {
                    self.next();
                }
            }
            self.expect(T::RBracket)?;
        }
        Ok(attrs)
    }

    fn mention(&mut self, node: &str) {
        for &i in &self.stack {
            let members = &mut self.graph.subgraphs[i].1;
            if !members.iter().any(|m| m == node) {
                members.push(node.to_string());
            }
        }
    }

    fn node_id(&mut self) -> Result<String, String> {
        let id = self.id()?;
        if self.peek() == Some(&T::Colon) {
            self.next();
            self.id()?;
            if self.peek() == Some(&T::Colon) {
                self.next();
                self.id()?;
            }
        }
        self.mention(&id);
        Ok(id)
    }

    fn subgraph(&mut self) -> Result<Vec<String>, String> {
        let mut name = None;
        if self.is_kw("subgraph") {
            self.next();
            if let Some(T::Id(_)) = self.peek() {
                name = Some(self.id()?);
            }
        }
        let index = self.graph.subgraphs.len();
        self.graph.subgraphs.push((name.clone().unwrap_or_default(), Vec::new()));
        self.stack.push(index);
        self.expect(T::LBrace)?;
        self.stmt_list()?;
        self.expect(T::RBrace)?;
        self.stack.pop();
        let members = self.graph.subgraphs[index].1.clone();
        if name.is_none() {
            self.graph.subgraphs.remove(index);
        }
        Ok(members)
    }

    fn starts_subgraph(&self) -> bool {
        self.is_kw("subgraph") || self.peek() == Some(&T::LBrace)
    }

    fn stmt_list(&mut self) -> Result<(), String> {
        while self.peek().is_some() && self.peek() != Some(&T::RBrace) {
            self.stmt()?;
            if self.peek() == Some(&T::Semi) {
                self.next();
            }
        }
        Ok(())
    }

    fn stmt(&mut self) -> Result<(), String> {
        if self.is_kw("graph") || self.is_kw("node") || self.is_kw("edge") {
            let is_graph = self.is_kw("graph");
            self.next();
            if self.peek() != Some(&T::LBracket) {
                return Err("attribute statement needs an attribute list".into());
            }
            let attrs = self.attr_list()?;
            if is_graph {
                self.graph.graph_attrs.extend(attrs);
            }
            return Ok(());
        }
        let left = if self.starts_subgraph() {
            self.subgraph()?
        } else {
            if let (Some(T::Id(_)), Some(T::Eq)) = (self.toks.get(self.pos), self.toks.get(self.pos + 1)) {
                let k = self.id()?;
                self.next();
                let v = self.id()?;
                self.graph.graph_attrs.insert(k, v);
                return Ok(());
            }
            vec![self.node_id()?]
        };
        if let Some(T::Edge(op)) = self.peek().cloned() {
            let mut chain = vec![left];
            while let Some(T::Edge(op2)) = self.peek().cloned() {
                if op2 != op || (op2 == "->") != self.graph.directed {
                    return Err(format!("edge operator `{op2}` does not match the graph type"));
                }
                self.next();
                let right = if self.starts_subgraph() { self.subgraph()? } else { vec![self.node_id()?] };
                chain.push(right);
            }
            let attrs = self.attr_list()?;
            for pair in chain.windows(2) {
                for a in &pair[0] {
                    for b in &pair[1] {
                        self.graph.edges.push((a.clone(), b.clone(), attrs.clone()));
                    }
                }
            }
            return Ok(());
        }
        if left.len() == 1 && !self.toks[..self.pos].ends_with(&[T::RBrace]) {
            let attrs = self.attr_list()?;
            self.graph.nodes.entry(left[0].clone()).or_default().extend(attrs);
        }
        Ok(())
    }
}

/// Checks `src` against the DOT grammar.
pub fn check(src: &str) -> Result<DotGraph, String> {
    let toks = lex(src)?;
    let mut p = P {
        toks,
        pos: 0,
        graph: DotGraph::default(),
        stack: Vec::new(),
    };
    if p.is_kw("strict") {
        p.next();
        p.graph.strict = true;
    }
    if p.is_kw("digraph") {
        p.graph.directed = true;
    } else if !p.is_kw("graph") {
        return Err("expected `graph` or `digraph`".into());
    }
    p.next();
    if let Some(T::Id(_)) = p.peek() {
        p.graph.name = Some(p.id()?);
    }
    p.expect(T::LBrace)?;
    p.stmt_list()?;
    p.expect(T::RBrace)?;
    if p.pos != p.toks.len() {
        return Err("trailing input after the graph".into());
    }
    Ok(p.graph)
}

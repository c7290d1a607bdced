//! Newick input/output for unrooted binary trees, JSON for networks.
//!
//! Branch lengths, internal node labels and `[...]` comments are accepted and
//! dropped. A root of degree 2 is suppressed on load; a root of degree 3 is kept
//! as an ordinary internal vertex.

use crate::error::{Error, Result};
use crate::graph::{UGraph, VertexId};
use crate::phylo::{PhyloNetwork, PhyloTree, Phylogeny};

#[derive(Debug, Default)]
struct Node {
    label: Option<String>,
    children: Vec<Node>,
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Newick {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) -> Result<()> {
        loop {
            match self.bytes.get(self.pos) {
                Some(c) if c.is_ascii_whitespace() => self.pos += 1,
                Some(b'[') => {
                    let start = self.pos;
                    match self.src[self.pos..].find(']') {
                        Some(off) => self.pos += off + 1,
                        None => {
                            self.pos = start;
                            return self.err("unterminated comment");
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn peek(&mut self) -> Result<Option<u8>> {
        self.skip_ws()?;
        Ok(self.bytes.get(self.pos).copied())
    }

    fn subtree(&mut self, depth: usize) -> Result<Node> {
        if depth > 100_000 {
            return self.err("nesting too deep");
        }
        let mut node = Node::default();
        if self.peek()? == Some(b'(') {
            self.pos += 1;
            loop {
                node.children.push(self.subtree(depth + 1)?);
                match self.peek()? {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    Some(c) => return self.err(format!("unexpected {:?}", c as char)),
                    None => return self.err("unbalanced parentheses"),
                }
            }
        }
        node.label = self.label()?;
        if self.peek()? == Some(b':') {
            self.pos += 1;
            self.branch_length()?;
        }
        if node.children.is_empty() && node.label.is_none() {
            return self.err("leaf without a label");
        }
        Ok(node)
    }

    fn label(&mut self) -> Result<Option<String>> {
        match self.peek()? {
            Some(b'\'') => {
                self.pos += 1;
                let mut out = String::new();
                loop {
                    let rest = &self.src[self.pos..];
                    match rest.find('\'') {
                        None => return self.err("unterminated quoted label"),
                        Some(off) => {
                            out.push_str(&rest[..off]);
                            self.pos += off + 1;
                            if self.bytes.get(self.pos) == Some(&b'\'') {
                                out.push('\'');
                                self.pos += 1;
                            } else {
                                break;
                            }
                        }
                    }
                }
                if out.is_empty() {
                    return self.err("empty label");
                }
                Ok(Some(out))
            }
            Some(_) => {
                let start = self.pos;
                while let Some(&c) = self.bytes.get(self.pos) {
                    if c.is_ascii_whitespace() || b"()[]':;,".contains(&c) {
                        break;
                    }
                    self.pos += 1;
                }
                if self.pos == start {
                    Ok(None)
                } else {
                    Ok(Some(self.src[start..self.pos].to_string()))
                }
            }
            None => Ok(None),
        }
    }

    fn branch_length(&mut self) -> Result<()> {
        self.skip_ws()?;
        let start = self.pos;
        while let Some(&c) = self.bytes.get(self.pos) {
            if c.is_ascii_digit() || b"+-.eE".contains(&c) {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.src[start..self.pos].parse::<f64>().is_err() {
            self.pos = start;
            return self.err("malformed branch length");
        }
        Ok(())
    }

    fn statement(&mut self) -> Result<Node> {
        let root = self.subtree(0)?;
        match self.peek()? {
            Some(b';') => {
                self.pos += 1;
                Ok(root)
            }
            Some(b')') => self.err("unbalanced parentheses"),
            Some(c) => self.err(format!("expected ';', found {:?}", c as char)),
            None => self.err("missing ';'"),
        }
    }
}

fn build(root: Node) -> Result<PhyloTree> {
    let mut g = UGraph::new();
    if root.children.is_empty() {
        g.add_labelled_vertex(root.label.as_deref().unwrap_or_default())?;
        return PhyloTree::new(g);
    }
    let arity = root.children.len();
    if !(2..=3).contains(&arity) {
        return Err(Error::NotBinary(format!("root has {arity} children")));
    }
    let r = g.add_vertex();
    let mut stack: Vec<(VertexId, Node)> = root.children.into_iter().map(|c| (r, c)).collect();
    while let Some((parent, node)) = stack.pop() {
        let v = if node.children.is_empty() {
            g.add_labelled_vertex(node.label.as_deref().unwrap_or_default())?
        } else {
            if node.children.len() != 2 {
                return Err(Error::NotBinary(format!(
                    "internal vertex with {} children",
                    node.children.len()
                )));
            }
            g.add_vertex()
        };
        g.add_edge(parent, v)?;
        stack.extend(node.children.into_iter().map(|c| (v, c)));
    }
    if arity == 2 {
        g.suppress_in_place(r)?;
    }
    PhyloTree::new(g)
}

/// Parses a single `;`-terminated Newick statement.
pub fn parse_tree(text: &str) -> Result<PhyloTree> {
    let mut p = Parser::new(text);
    let root = p.statement()?;
    if p.peek()?.is_some() {
        return p.err("trailing input after ';'");
    }
    build(root)
}

/// Parses every statement of a multi-tree Newick document.
pub fn parse_trees(text: &str) -> Result<Vec<PhyloTree>> {
    let mut p = Parser::new(text);
    let mut out = Vec::new();
    while p.peek()?.is_some() {
        out.push(build(p.statement()?)?);
    }
    Ok(out)
}

/// Quotes a label unless it is made of `[A-Za-z0-9_.|-]` only.
pub fn quote_label(label: &str) -> String {
    let plain = !label.is_empty()
        && label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "_.|-".contains(c));
    if plain {
        label.to_string()
    } else {
        format!("'{}'", label.replace('\'', "''"))
    }
}

fn write_subtree(g: &UGraph, v: VertexId, parent: VertexId) -> String {
    if let Some(l) = g.label(v) {
        return quote_label(l);
    }
    let mut parts: Vec<String> = g
        .neighbours(v)
        .filter(|&w| w != parent)
        .map(|w| write_subtree(g, w, v))
        .collect();
    parts.sort();
    format!("({})", parts.join(","))
}

/// Writes `t` with a trifurcating root at the neighbour of the smallest taxon.
pub fn write_tree(t: &PhyloTree) -> String {
    let g = t.graph();
    let first = t
        .leaf(t.taxa().iter().next().expect("tree has taxa"))
        .unwrap();
    if g.vertex_count() == 1 {
        return format!("{};", quote_label(g.label(first).unwrap()));
    }
    let root = g.neighbours(first).next().unwrap();
    if g.is_labelled(root) {
        let mut pair = [
            quote_label(g.label(first).unwrap()),
            quote_label(g.label(root).unwrap()),
        ];
        pair.sort();
        return format!("({},{});", pair[0], pair[1]);
    }
    let mut parts: Vec<String> = g
        .neighbours(root)
        .map(|w| write_subtree(g, w, root))
        .collect();
    parts.sort();
    format!("({});", parts.join(","))
}

/// Reads a network from the JSON graph format and validates it.
pub fn parse_network(json: &str) -> Result<PhyloNetwork> {
    PhyloNetwork::new(UGraph::from_json(json)?)
}

pub fn write_network(n: &PhyloNetwork) -> String {
    n.graph().to_json()
}

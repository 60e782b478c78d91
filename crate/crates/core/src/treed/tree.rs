//! The marking tree: a trie over digit paths, one level per circuit node.
//!
//! The root sits above the level of the largest node; every root-to-leaf
//! path spells the digits of one marking from the most significant node
//! down to the least significant one.  Child slots are indexed by
//! `digit + q - 1`, so iterating them visits labels in increasing order and
//! leaves appear in lexicographic order of their paths.

use crate::circuit::{Digit, NodeId};

pub(crate) const NIL: u32 = u32::MAX;

/// Whose marking a leaf stores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Owner {
    /// The successor marking of a circuit node.
    Node(NodeId),
    /// A registered marking, by slot.
    Marking(u32),
}

#[derive(Debug, Clone)]
struct TNode {
    parent: u32,
    label: Digit,
    children: Box<[u32]>,
    owners: Vec<Owner>,
    /// Number of successor-marking owners in this subtree.
    lambda: u32,
    prev: u32,
    next: u32,
    live: bool,
}

/// Result of locating a path among the successor-marking leaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Located {
    /// A node whose successor marking has exactly this path.
    Equal(NodeId),
    /// The node with the smallest successor path greater than the query.
    Before(NodeId),
    /// Every successor path is smaller.
    End,
}

#[derive(Debug, Clone)]
pub struct MarkTree {
    q: Digit,
    nodes: Vec<TNode>,
    free: Vec<u32>,
    root: u32,
    /// Head of the doubly linked node list of each depth.
    heads: Vec<u32>,
    pub(crate) work: u64,
}

impl MarkTree {
    pub(crate) fn new(q: Digit) -> Self {
        let mut t = MarkTree {
            q,
            nodes: Vec::new(),
            free: Vec::new(),
            root: NIL,
            heads: vec![NIL],
            work: 0,
        };
        t.root = t.alloc(NIL, 0, 0);
        t
    }

    fn width(&self) -> usize {
        (2 * self.q - 1) as usize
    }

    #[inline]
    fn slot(&self, d: Digit) -> usize {
        (d + self.q - 1) as usize
    }

    /// Number of levels below the root, i.e. `|Γ|`.
    pub fn depth(&self) -> usize {
        self.heads.len() - 1
    }

    /// Number of live tree nodes.
    pub fn size(&self) -> usize {
        self.nodes.len() - self.free.len()
    }

    fn alloc(&mut self, parent: u32, label: Digit, depth: usize) -> u32 {
        self.work += 1;
        let node = TNode {
            parent,
            label,
            children: vec![NIL; self.width()].into_boxed_slice(),
            owners: Vec::new(),
            lambda: 0,
            prev: NIL,
            next: self.heads[depth],
            live: true,
        };
        let id = match self.free.pop() {
            Some(id) => {
                self.nodes[id as usize] = node;
                id
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as u32
            }
        };
        let head = self.heads[depth];
        if head != NIL {
            self.nodes[head as usize].prev = id;
        }
        self.heads[depth] = id;
        id
    }

    fn release(&mut self, id: u32, depth: usize) {
        self.work += 1;
        let (prev, next) = {
            let n = &self.nodes[id as usize];
            (n.prev, n.next)
        };
        if prev == NIL {
            self.heads[depth] = next;
        } else {
            self.nodes[prev as usize].next = next;
        }
        if next != NIL {
            self.nodes[next as usize].prev = prev;
        }
        let n = &mut self.nodes[id as usize];
        n.live = false;
        n.owners.clear();
        self.free.push(id);
    }

    fn child(&self, x: u32, d: Digit) -> u32 {
        self.nodes[x as usize].children[self.slot(d)]
    }

    /// Adds `owner` at the leaf spelled by `path` (top-down), creating nodes
    /// as needed.  Returns the leaf.
    pub(crate) fn insert(&mut self, path: &[Digit], owner: Owner) -> u32 {
        debug_assert_eq!(path.len(), self.depth());
        let mut x = self.root;
        for (i, &d) in path.iter().enumerate() {
            self.work += 1;
            let s = self.slot(d);
            let mut c = self.nodes[x as usize].children[s];
            if c == NIL {
                c = self.alloc(x, d, i + 1);
                self.nodes[x as usize].children[s] = c;
            }
            x = c;
        }
        self.nodes[x as usize].owners.push(owner);
        if matches!(owner, Owner::Node(_)) {
            self.bump_lambda(x, 1);
        }
        x
    }

    fn bump_lambda(&mut self, mut x: u32, delta: i32) {
        while x != NIL {
            self.work += 1;
            let n = &mut self.nodes[x as usize];
            n.lambda = (n.lambda as i32 + delta) as u32;
            x = n.parent;
        }
    }

    /// Removes `owner` from `leaf` and prunes branches left empty.
    pub(crate) fn remove(&mut self, leaf: u32, owner: Owner) {
        let owners = &mut self.nodes[leaf as usize].owners;
        let at = owners.iter().position(|&o| o == owner).expect("owner present at leaf");
        owners.swap_remove(at);
        if matches!(owner, Owner::Node(_)) {
            self.bump_lambda(leaf, -1);
        }
        let mut x = leaf;
        let mut depth = self.depth();
        while x != self.root {
            let n = &self.nodes[x as usize];
            if !n.owners.is_empty() || n.children.iter().any(|&c| c != NIL) {
                break;
            }
            let (parent, label) = (n.parent, n.label);
            let s = self.slot(label);
            self.nodes[parent as usize].children[s] = NIL;
            self.release(x, depth);
            x = parent;
            depth -= 1;
        }
    }

    /// Inserts a new all-zero level directly below depth `d`.  Returns the
    /// owners whose leaf moved (only when `d` was the leaf level).
    pub(crate) fn insert_level(&mut self, d: usize) -> Vec<(Owner, u32)> {
        self.heads.insert(d + 1, NIL);
        let mut moved = Vec::new();
        let mut x = self.heads[d];
        let zero = self.slot(0);
        let width = self.width();
        while x != NIL {
            let next = self.nodes[x as usize].next;
            let y = self.alloc(x, 0, d + 1);
            let children = std::mem::replace(
                &mut self.nodes[x as usize].children,
                vec![NIL; width].into_boxed_slice(),
            );
            let owners = std::mem::take(&mut self.nodes[x as usize].owners);
            let lambda = self.nodes[x as usize].lambda;
            for &c in children.iter().filter(|&&c| c != NIL) {
                self.nodes[c as usize].parent = y;
            }
            for &o in &owners {
                moved.push((o, y));
            }
            let yn = &mut self.nodes[y as usize];
            yn.children = children;
            yn.owners = owners;
            yn.lambda = lambda;
            self.nodes[x as usize].children[zero] = y;
            x = next;
        }
        moved
    }

    /// Finds where a path falls among the successor-marking leaves.
    pub(crate) fn locate(&mut self, path: &[Digit]) -> Located {
        let top = self.q - 1;
        let mut x = self.root;
        let mut best: Option<(u32, usize)> = None;
        let mut reached = true;
        for (i, &d) in path.iter().enumerate() {
            self.work += 1;
            for l in d + 1..=top {
                let c = self.child(x, l);
                if c != NIL && self.nodes[c as usize].lambda > 0 {
                    best = Some((c, i + 1));
                    break;
                }
            }
            let c = self.child(x, d);
            if c == NIL || self.nodes[c as usize].lambda == 0 {
                reached = false;
                break;
            }
            x = c;
        }
        if reached {
            if let Some(Owner::Node(v)) =
                self.nodes[x as usize].owners.iter().find(|o| matches!(o, Owner::Node(_)))
            {
                return Located::Equal(*v);
            }
        }
        match best {
            None => Located::End,
            Some((mut y, mut depth)) => {
                let n = self.depth();
                while depth < n {
                    self.work += 1;
                    y = *self.nodes[y as usize]
                        .children
                        .iter()
                        .find(|&&c| c != NIL && self.nodes[c as usize].lambda > 0)
                        .expect("subtree with successor leaves");
                    depth += 1;
                }
                match self.nodes[y as usize].owners.iter().find(|o| matches!(o, Owner::Node(_))) {
                    Some(Owner::Node(v)) => Located::Before(*v),
                    _ => unreachable!("leaf counted as successor leaf"),
                }
            }
        }
    }

    /// The path (top-down) leading to `leaf`.
    pub(crate) fn path_of(&self, leaf: u32) -> Vec<Digit> {
        let mut out = Vec::with_capacity(self.depth());
        let mut x = leaf;
        while x != self.root {
            let n = &self.nodes[x as usize];
            out.push(n.label);
            x = n.parent;
        }
        out.reverse();
        out
    }

    pub(crate) fn owners(&self, leaf: u32) -> &[Owner] {
        &self.nodes[leaf as usize].owners
    }

    /// Leaves in left-to-right order with their owners.
    pub fn leaves(&self) -> Vec<(Vec<Digit>, Vec<Owner>)> {
        let mut out = Vec::new();
        let mut stack = vec![(self.root, 0usize)];
        while let Some((x, depth)) = stack.pop() {
            let n = &self.nodes[x as usize];
            if depth == self.depth() {
                let mut owners = n.owners.clone();
                owners.sort();
                out.push((self.path_of(x), owners));
                continue;
            }
            for &c in n.children.iter().rev().filter(|&&c| c != NIL) {
                stack.push((c, depth + 1));
            }
        }
        out
    }

    /// Structural self-check: depths, level lists, parent links, counts.
    pub(crate) fn check(&self) -> Result<(), String> {
        let mut seen_by_level = vec![0usize; self.heads.len()];
        let mut stack = vec![(self.root, 0usize)];
        while let Some((x, depth)) = stack.pop() {
            let n = &self.nodes[x as usize];
            if !n.live {
                return Err(format!("dead tree node {x} reachable"));
            }
            seen_by_level[depth] += 1;
            let kids: Vec<u32> = n.children.iter().copied().filter(|&c| c != NIL).collect();
            if depth == self.depth() {
                if !kids.is_empty() {
                    return Err("leaf level node with children".into());
                }
                let lam = n.owners.iter().filter(|o| matches!(o, Owner::Node(_))).count();
                if lam as u32 != n.lambda || lam > 1 {
                    return Err(format!("leaf successor count {lam} vs {}", n.lambda));
                }
                if n.owners.is_empty() && x != self.root {
                    return Err("ownerless leaf".into());
                }
            } else {
                if !n.owners.is_empty() {
                    return Err("owners above leaf level".into());
                }
                let sum: u32 = kids.iter().map(|&c| self.nodes[c as usize].lambda).sum();
                if sum != n.lambda {
                    return Err("successor counts inconsistent".into());
                }
                if kids.is_empty() && x != self.root {
                    return Err("childless inner node".into());
                }
            }
            for (s, &c) in n.children.iter().enumerate() {
                if c == NIL {
                    continue;
                }
                let cn = &self.nodes[c as usize];
                if cn.parent != x || self.slot(cn.label) != s {
                    return Err("bad parent link".into());
                }
                stack.push((c, depth + 1));
            }
        }
        for (depth, &head) in self.heads.iter().enumerate() {
            let mut count = 0;
            let mut x = head;
            let mut prev = NIL;
            while x != NIL {
                let n = &self.nodes[x as usize];
                if n.prev != prev || !n.live {
                    return Err(format!("level list {depth} broken"));
                }
                count += 1;
                prev = x;
                x = n.next;
            }
            if count != seen_by_level[depth] {
                return Err(format!(
                    "level {depth} lists {count} nodes, tree has {}",
                    seen_by_level[depth]
                ));
            }
        }
        Ok(())
    }
}

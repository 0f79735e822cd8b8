//! Ordered set with rank queries, as an arena-backed treap.

use std::cmp::Ordering;

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

const NIL: u32 = u32::MAX;

#[derive(Clone, Debug)]
struct Node<K> {
    key: K,
    prio: u32,
    size: u32,
    left: u32,
    right: u32,
}

/// An ordered set of distinct keys supporting `O(log n)` expected-time
/// insert, remove and counting of keys below a bound.
#[derive(Clone, Debug)]
pub struct OsTree<K> {
    nodes: Vec<Node<K>>,
    free: Vec<u32>,
    root: u32,
    rng: SmallRng,
}

impl<K: Ord + Copy> Default for OsTree<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K: Ord + Copy> OsTree<K> {
    pub fn new() -> Self {
        Self::with_seed(0x5eed)
    }

    pub fn with_seed(seed: u64) -> Self {
        Self { nodes: Vec::new(), free: Vec::new(), root: NIL, rng: SmallRng::seed_from_u64(seed) }
    }

    fn size(&self, t: u32) -> u32 {
        if t == NIL {
            0
        } else {
            self.nodes[t as usize].size
        }
    }

    fn pull(&mut self, t: u32) {
        let (l, r) = {
            let n = &self.nodes[t as usize];
            (n.left, n.right)
        };
        self.nodes[t as usize].size = 1 + self.size(l) + self.size(r);
    }

    /// Splits `t` into keys `< key` and keys `>= key`.
    fn split(&mut self, t: u32, key: &K) -> (u32, u32) {
        if t == NIL {
            return (NIL, NIL);
        }
        if self.nodes[t as usize].key < *key {
            let r = self.nodes[t as usize].right;
            let (a, b) = self.split(r, key);
            self.nodes[t as usize].right = a;
            self.pull(t);
            (t, b)
        } else {
            let l = self.nodes[t as usize].left;
            let (a, b) = self.split(l, key);
            self.nodes[t as usize].left = b;
            self.pull(t);
            (a, t)
        }
    }

    /// Joins two treaps where every key of `a` is below every key of `b`.
    fn merge(&mut self, a: u32, b: u32) -> u32 {
        if a == NIL {
            return b;
        }
        if b == NIL {
            return a;
        }
        if self.nodes[a as usize].prio > self.nodes[b as usize].prio {
            let r = self.nodes[a as usize].right;
            let m = self.merge(r, b);
            self.nodes[a as usize].right = m;
            self.pull(a);
            a
        } else {
            let l = self.nodes[b as usize].left;
            let m = self.merge(a, l);
            self.nodes[b as usize].left = m;
            self.pull(b);
            b
        }
    }

    pub fn len(&self) -> usize {
        self.size(self.root) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.root == NIL
    }

    pub fn contains(&self, key: &K) -> bool {
        let mut t = self.root;
        while t != NIL {
            let n = &self.nodes[t as usize];
            match key.cmp(&n.key) {
                Ordering::Less => t = n.left,
                Ordering::Greater => t = n.right,
                Ordering::Equal => return true,
            }
        }
        false
    }

    /// Returns `false` if the key was already present.
    pub fn insert(&mut self, key: K) -> bool {
        if self.contains(&key) {
            return false;
        }
        let node = Node { key, prio: self.rng.gen(), size: 1, left: NIL, right: NIL };
        let id = match self.free.pop() {
            Some(id) => {
                self.nodes[id as usize] = node;
                id
            }
            None => {
                self.nodes.push(node);
                u32::try_from(self.nodes.len() - 1).expect("tree exceeds u32 nodes")
            }
        };
        let (a, b) = self.split(self.root, &key);
        let a = self.merge(a, id);
        self.root = self.merge(a, b);
        true
    }

    /// Returns `false` if the key was absent.
    pub fn remove(&mut self, key: &K) -> bool {
        if !self.contains(key) {
            return false;
        }
        let (a, b) = self.split(self.root, key);
        // `b` starts with `key`; peel it off by splitting at the successor.
        let (mid, c) = self.split_first(b);
        self.free.push(mid);
        self.root = self.merge(a, c);
        true
    }

    /// Detaches the minimum node of `t`, returning it and the rest.
    fn split_first(&mut self, t: u32) -> (u32, u32) {
        let l = self.nodes[t as usize].left;
        if l == NIL {
            let r = self.nodes[t as usize].right;
            self.nodes[t as usize].right = NIL;
            self.pull(t);
            return (t, r);
        }
        let (first, rest) = self.split_first(l);
        self.nodes[t as usize].left = rest;
        self.pull(t);
        (first, t)
    }

    /// Number of keys strictly below `key`.
    pub fn count_lt(&self, key: &K) -> usize {
        let mut t = self.root;
        let mut acc = 0;
        while t != NIL {
            let n = &self.nodes[t as usize];
            if n.key < *key {
                acc += self.size(n.left) + 1;
                t = n.right;
            } else {
                t = n.left;
            }
        }
        acc as usize
    }

    /// Number of keys in `[lo, hi)`.
    pub fn count_range(&self, lo: &K, hi: &K) -> usize {
        if hi <= lo {
            return 0;
        }
        self.count_lt(hi) - self.count_lt(lo)
    }

    /// Keys strictly below `bound`, ascending.
    pub fn keys_lt(&self, bound: &K) -> Vec<K> {
        let mut out = Vec::new();
        let mut stack = Vec::new();
        let mut t = self.root;
        loop {
            while t != NIL {
                stack.push(t);
                t = self.nodes[t as usize].left;
            }
            let Some(top) = stack.pop() else { break };
            let n = &self.nodes[top as usize];
            if n.key >= *bound {
                break;
            }
            out.push(n.key);
            t = n.right;
        }
        out
    }

    /// All keys, ascending.
    pub fn keys(&self) -> Vec<K> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = Vec::new();
        let mut t = self.root;
        loop {
            while t != NIL {
                stack.push(t);
                t = self.nodes[t as usize].left;
            }
            let Some(top) = stack.pop() else { break };
            out.push(self.nodes[top as usize].key);
            t = self.nodes[top as usize].right;
        }
        out
    }

    pub fn clear(&mut self) {
        self.nodes.clear();
        self.free.clear();
        self.root = NIL;
    }
}

/// Prefix trie over code points mapping piece surfaces to piece ids.
///
/// Children are kept sorted per node and searched by bisection; piece
/// inventories are small enough that this beats hashing per edge.
#[derive(Clone, Debug)]
pub struct PrefixTrie {
    nodes: Vec<Node>,
}

#[derive(Clone, Debug, Default)]
struct Node {
    children: Vec<(char, u32)>,
    value: Option<u32>,
}

impl Default for PrefixTrie {
    fn default() -> Self {
        Self::new()
    }
}

impl PrefixTrie {
    pub fn new() -> Self {
        PrefixTrie {
            nodes: vec![Node::default()],
        }
    }

    /// Inserts `key`, returning the value it replaced.
    pub fn insert<I: IntoIterator<Item = char>>(&mut self, key: I, value: u32) -> Option<u32> {
        let mut node = 0usize;
        for c in key {
            node = match self.nodes[node].children.binary_search_by_key(&c, |&(k, _)| k) {
                Ok(i) => self.nodes[node].children[i].1 as usize,
                Err(i) => {
                    let next = self.nodes.len();
                    self.nodes.push(Node::default());
                    self.nodes[node].children.insert(i, (c, next as u32));
                    next
                }
            };
        }
        self.nodes[node].value.replace(value)
    }

    pub fn get<I: IntoIterator<Item = char>>(&self, key: I) -> Option<u32> {
        let mut node = 0usize;
        for c in key {
            node = self.child(node, c)?;
        }
        self.nodes[node].value
    }

    /// All keys that are prefixes of `text`, as `(length, value)` pairs in
    /// increasing length order.
    pub fn common_prefixes<'a>(&'a self, text: &'a [char]) -> CommonPrefixes<'a> {
        CommonPrefixes {
            trie: self,
            text,
            pos: 0,
            node: Some(0),
        }
    }

    fn child(&self, node: usize, c: char) -> Option<usize> {
        let children = &self.nodes[node].children;
        children
            .binary_search_by_key(&c, |&(k, _)| k)
            .ok()
            .map(|i| children[i].1 as usize)
    }
}

pub struct CommonPrefixes<'a> {
    trie: &'a PrefixTrie,
    text: &'a [char],
    pos: usize,
    node: Option<usize>,
}

impl Iterator for CommonPrefixes<'_> {
    type Item = (usize, u32);

    fn next(&mut self) -> Option<Self::Item> {
        while let Some(node) = self.node {
            if self.pos >= self.text.len() {
                self.node = None;
                return None;
            }
            let next = self.trie.child(node, self.text[self.pos]);
            self.pos += 1;
            self.node = next;
            if let Some(n) = next {
                if let Some(v) = self.trie.nodes[n].value {
                    return Some((self.pos, v));
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefixes_in_length_order() {
        let mut t = PrefixTrie::new();
        for (i, k) in ["a", "ab", "abc", "b", "abd"].iter().enumerate() {
            assert_eq!(t.insert(k.chars(), i as u32), None);
        }
        let text: Vec<char> = "abcx".chars().collect();
        let got: Vec<_> = t.common_prefixes(&text).collect();
        assert_eq!(got, [(1, 0), (2, 1), (3, 2)]);
        assert_eq!(t.get("abd".chars()), Some(4));
        assert_eq!(t.get("x".chars()), None);
        assert_eq!(t.insert("ab".chars(), 9), Some(1));
        assert_eq!(t.common_prefixes(&[]).count(), 0);
    }
}

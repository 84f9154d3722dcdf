use std::collections::HashMap;

use super::{FaceId, NodeId};
use crate::naming::ContentName;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    /// Shortest-path route toward a producer; `to_producer` marks the
    /// producer's first-hop router.
    Static { to_producer: bool },
    /// Installed by a hop-limited repair announcement.
    Repair { distance: u32, announcer: NodeId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NextHop {
    pub face: FaceId,
    pub origin: Origin,
}

impl NextHop {
    pub fn is_repair(&self) -> bool {
        matches!(self.origin, Origin::Repair { .. })
    }

    fn rank(&self) -> (u8, u32, FaceId) {
        match self.origin {
            Origin::Repair { distance, .. } => (0, distance, self.face),
            Origin::Static { .. } => (1, 0, self.face),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Fib {
    entries: HashMap<ContentName, Vec<NextHop>>,
}

impl Fib {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn add_static(&mut self, prefix: ContentName, face: FaceId, to_producer: bool) {
        let hops = self.entries.entry(prefix).or_default();
        hops.retain(|h| !(h.face == face && !h.is_repair()));
        hops.push(NextHop {
            face,
            origin: Origin::Static { to_producer },
        });
    }

    /// Re-announcement from the same announcer replaces its entry.
    pub fn add_repair(&mut self, prefix: ContentName, face: FaceId, distance: u32, announcer: NodeId) {
        let hops = self.entries.entry(prefix).or_default();
        hops.retain(|h| !matches!(h.origin, Origin::Repair { announcer: a, .. } if a == announcer));
        hops.push(NextHop {
            face,
            origin: Origin::Repair {
                distance,
                announcer,
            },
        });
    }

    pub fn entries_for(&self, prefix: &ContentName) -> &[NextHop] {
        self.entries.get(prefix).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Longest-prefix match. At one prefix length repair routes outrank
    /// static ones; among repair routes the nearest announcer wins, then the
    /// lowest face. `in_face` is never returned.
    pub fn lookup(
        &self,
        name: &ContentName,
        in_face: Option<FaceId>,
        static_only: bool,
    ) -> Option<NextHop> {
        for p in name.prefixes() {
            let Some(hops) = self.entries.get(&p) else {
                continue;
            };
            let best = hops
                .iter()
                .filter(|h| Some(h.face) != in_face)
                .filter(|h| !(static_only && h.is_repair()))
                .min_by_key(|h| h.rank());
            if best.is_some() {
                return best.copied();
            }
        }
        None
    }

    /// The static next hop for a flow prefix.
    pub fn static_route(&self, prefix: &ContentName) -> Option<NextHop> {
        self.lookup(prefix, None, true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::naming::parse_name;

    #[test]
    fn repair_outranks_static_at_equal_length() {
        let mut fib = Fib::new();
        let chunk = parse_name("/f/_v1/_c0").unwrap();
        fib.add_static(chunk.clone(), 0, false);
        fib.add_repair(chunk.clone(), 2, 1, 9);
        let name = parse_name("/f/_v1/_s20").unwrap();
        assert_eq!(fib.lookup(&name, None, false).unwrap().face, 2);
        assert_eq!(fib.lookup(&name, None, true).unwrap().face, 0);
        assert_eq!(fib.lookup(&name, Some(2), false).unwrap().face, 0);
    }

    #[test]
    fn longer_prefix_wins_over_origin() {
        let mut fib = Fib::new();
        fib.add_repair(parse_name("/f").unwrap(), 3, 0, 7);
        fib.add_static(parse_name("/f/_v1").unwrap(), 1, true);
        let name = parse_name("/f/_v1/_s5").unwrap();
        assert_eq!(fib.lookup(&name, None, false).unwrap().face, 1);
    }

    #[test]
    fn nearest_announcer_then_lowest_face() {
        let mut fib = Fib::new();
        let chunk = parse_name("/f/_v1/_c0").unwrap();
        fib.add_repair(chunk.clone(), 4, 1, 10);
        fib.add_repair(chunk.clone(), 3, 1, 11);
        fib.add_repair(chunk.clone(), 1, 2, 12);
        let name = parse_name("/f/_v1/_s1").unwrap();
        assert_eq!(fib.lookup(&name, None, false).unwrap().face, 3);
        // re-announcement refreshes rather than duplicating
        fib.add_repair(chunk.clone(), 5, 0, 11);
        assert_eq!(fib.entries_for(&chunk).len(), 3);
        assert_eq!(fib.lookup(&name, None, false).unwrap().face, 5);
    }

    #[test]
    fn no_route() {
        let fib = Fib::new();
        assert!(fib.lookup(&parse_name("/x/_s1").unwrap(), None, false).is_none());
    }
}

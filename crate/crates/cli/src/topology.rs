//! Recognizes path and ring networks up to relabeling.

use heapsync::sync::AlphabetNetwork;
use heapsync::trace::Letter;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Topology {
    /// Letters in path order: alphabets are consecutive pairs.
    Path(Vec<Letter>),
    /// Letters in cyclic order starting from the removed letter.
    Ring(Vec<Letter>),
}

pub fn detect(net: &AlphabetNetwork) -> Option<Topology> {
    let n = net.monoid().len();
    let alphabets = net.alphabets();
    if n == 1 && alphabets.len() == 1 {
        return Some(Topology::Path(vec![Letter(0)]));
    }
    if alphabets.iter().any(|a| a.len() != 2) {
        return None;
    }
    let mut neighbors: Vec<Vec<Letter>> = vec![Vec::new(); n];
    for a in alphabets {
        let (x, y) = (a[0], a[1]);
        if neighbors[x.0].contains(&y) {
            return None;
        }
        neighbors[x.0].push(y);
        neighbors[y.0].push(x);
    }
    if neighbors.iter().any(|v| v.is_empty() || v.len() > 2) {
        return None;
    }
    let ends: Vec<usize> = (0..n).filter(|&i| neighbors[i].len() == 1).collect();
    let (start, ring) = match (ends.len(), alphabets.len()) {
        (2, m) if m == n - 1 => (Letter(ends[0]), false),
        (0, m) if m == n && n >= 3 => (Letter(0), true),
        _ => return None,
    };
    // walk from the start, preferring the smaller neighbor on a ring
    let mut order = vec![start];
    let mut prev: Option<Letter> = None;
    let mut cur = start;
    loop {
        let next = neighbors[cur.0].iter().copied().filter(|&x| Some(x) != prev).min();
        match next {
            Some(x) if x != start && !order.contains(&x) => {
                order.push(x);
                prev = Some(cur);
                cur = x;
            }
            _ => break,
        }
    }
    if order.len() != n {
        return None;
    }
    Some(if ring {
        Topology::Ring(order)
    } else {
        Topology::Path(order)
    })
}

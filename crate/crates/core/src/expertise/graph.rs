//! Follower-graph centrality scores.

use std::collections::BTreeMap;

use crate::corpus::{Corpus, SocialEdge};

/// PageRank over nodes `0..n` with edges `(from, to)`. Teleport is uniform
/// and the mass of nodes without out-links is spread uniformly. Iterates
/// until the L1 change falls below `tol`.
pub fn pagerank_indexed(n: usize, edges: &[(usize, usize)], damping: f64, tol: f64) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let mut out_deg = vec![0usize; n];
    for &(from, _) in edges {
        out_deg[from] += 1;
    }
    let nf = n as f64;
    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    for _ in 0..100_000 {
        let dangling: f64 = (0..n).filter(|&i| out_deg[i] == 0).map(|i| rank[i]).sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        next.iter_mut().for_each(|v| *v = base);
        for &(from, to) in edges {
            next[to] += damping * rank[from] / out_deg[from] as f64;
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        let delta: f64 = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if delta < tol {
            break;
        }
    }
    rank
}

fn node_ids(edges: &[SocialEdge]) -> BTreeMap<&str, usize> {
    let mut ids: Vec<&str> = edges
        .iter()
        .flat_map(|e| [e.follower_id.as_str(), e.followee_id.as_str()])
        .collect();
    ids.sort_unstable();
    ids.dedup();
    ids.into_iter().enumerate().map(|(i, s)| (s, i)).collect()
}

/// PageRank of every user appearing in `edges`, where a follower links to
/// the followee.
pub fn pagerank(edges: &[SocialEdge], damping: f64, tol: f64) -> BTreeMap<String, f64> {
    let ids = node_ids(edges);
    let pairs: Vec<(usize, usize)> = edges
        .iter()
        .map(|e| (ids[e.follower_id.as_str()], ids[e.followee_id.as_str()]))
        .collect();
    let scores = pagerank_indexed(ids.len(), &pairs, damping, tol);
    ids.into_iter()
        .map(|(s, i)| (s.to_string(), scores[i]))
        .collect()
}

/// Follower count of every user appearing in `edges`.
pub fn in_degree(edges: &[SocialEdge]) -> BTreeMap<String, usize> {
    let mut out: BTreeMap<String, usize> = node_ids(edges)
        .into_keys()
        .map(|s| (s.to_string(), 0))
        .collect();
    for e in edges {
        *out.get_mut(&e.followee_id).expect("known node") += 1;
    }
    out
}

fn indexed_edges(corpus: &Corpus) -> Vec<(usize, usize)> {
    corpus
        .social_edges()
        .iter()
        .filter_map(|e| {
            Some((
                corpus.user_index(&e.follower_id)?,
                corpus.user_index(&e.followee_id)?,
            ))
        })
        .collect()
}

/// PageRank over all corpus users, indexed like [`Corpus::users`].
pub fn social_pagerank(corpus: &Corpus, damping: f64, tol: f64) -> Vec<f64> {
    pagerank_indexed(corpus.users().len(), &indexed_edges(corpus), damping, tol)
}

/// Follower counts of all corpus users, indexed like [`Corpus::users`].
pub fn social_in_degree(corpus: &Corpus) -> Vec<usize> {
    let mut deg = vec![0; corpus.users().len()];
    for (_, to) in indexed_edges(corpus) {
        deg[to] += 1;
    }
    deg
}

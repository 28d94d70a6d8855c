use crate::arena::{visit_history, GameArena, PlayerSet, Vertex};
use crate::error::{GameError, Result};
use crate::tree_solver::DepthParams;

/// Decomposition `αβγ` of a truncated outcome.
///
/// Lengths below count edges, so a history of `m` vertices has length `m - 1`.
/// `α` ends where `αβ` ends, `β` is nonempty and `Visit(α) = Visit(αβγ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slice {
    pub alpha: Vec<Vertex>,
    pub beta: Vec<Vertex>,
    pub gamma: Vec<Vertex>,
    pub l: usize,
    /// Edge length of the window prefix `λ`, equal to `(l - 1)·|V|`.
    pub lambda_len: usize,
}

impl Slice {
    pub fn visit_alpha(&self, arena: &GameArena) -> PlayerSet {
        visit_history(&self.alpha, arena)
    }

    /// `αβγ` as one vertex sequence.
    pub fn history(&self) -> Vec<Vertex> {
        [&self.alpha[..], &self.beta, &self.gamma].concat()
    }

    /// Lists every broken invariant; empty when the slice is well formed.
    pub fn violations(&self, arena: &GameArena, k: usize) -> Vec<String> {
        let nv = arena.num_vertices();
        let mut out = Vec::new();
        let whole = self.history();
        if self.beta.is_empty() {
            out.push("beta is empty".to_string());
        } else if self.alpha.last() != self.beta.last() {
            out.push("alpha and alpha-beta end at different vertices".to_string());
        }
        if self.l == 0 {
            out.push("l is zero".to_string());
        }
        if visit_history(&self.alpha, arena) != visit_history(&whole, arena) {
            out.push("Visit(alpha) differs from Visit(alpha beta gamma)".to_string());
        }
        let ab = self.alpha.len() + self.beta.len() - 1;
        if ab > self.l * nv {
            out.push(format!("|alpha beta| = {ab} exceeds l|V| = {}", self.l * nv));
        }
        if whole.len() - 1 != (self.l + k) * nv {
            out.push(format!("|alpha beta gamma| = {} differs from (l+K)|V|", whole.len() - 1));
        }
        if self.alpha.len() - 1 < self.lambda_len || self.lambda_len != (self.l - 1) * nv {
            out.push("alpha is shorter than lambda".to_string());
        }
        out
    }
}

/// Cuts a truncated outcome of `params.depth` edges into `αβγ`.
///
/// Picks the least `l` whose window keeps `Visit` stable, then the first
/// repeated vertex among positions `(l-1)|V| ..= l|V|`.
pub fn slice_outcome(outcome: &[Vertex], arena: &GameArena, params: &DepthParams) -> Result<Slice> {
    let nv = arena.num_vertices();
    let k = params.k;
    let d = outcome.len().saturating_sub(1);
    if outcome.is_empty() || d < params.depth {
        return Err(GameError::Precondition(format!(
            "outcome has {d} edges, depth {} required",
            params.depth
        )));
    }
    // prefix_visit[i] = Visit(outcome[..=i])
    let mut prefix_visit = Vec::with_capacity(outcome.len());
    let mut acc = PlayerSet::EMPTY;
    for &v in outcome {
        acc = acc.union(arena.marks(v));
        prefix_visit.push(acc);
    }
    let l = (1..)
        .take_while(|l| (l + k) * nv <= params.depth)
        .find(|l| prefix_visit[(l - 1) * nv] == prefix_visit[(l + k) * nv])
        .ok_or_else(|| GameError::Internal("no Visit-stable window in the truncated outcome".into()))?;
    let lo = (l - 1) * nv;
    let mut first_at = vec![usize::MAX; nv];
    let (p, q) = (lo..=l * nv)
        .find_map(|q| {
            let v = outcome[q];
            if first_at[v] != usize::MAX {
                Some((first_at[v], q))
            } else {
                first_at[v] = q;
                None
            }
        })
        .expect("|V|+1 positions contain a repeat");
    let end = (l + k) * nv;
    Ok(Slice {
        alpha: outcome[..=p].to_vec(),
        beta: outcome[p + 1..=q].to_vec(),
        gamma: outcome[q + 1..=end].to_vec(),
        l,
        lambda_len: lo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::fixtures::{detour, branch};
    use crate::arena::{ArenaBuilder, Objective};
    use crate::tree_solver::{required_depth, solve_truncated, DepthVariant, Preference};

    #[test]
    fn single_vertex() {
        let mut b = ArenaBuilder::new();
        let p = b.player(Objective::reach([0]));
        let v = b.vertex("v0", p);
        b.edge(v, v);
        let g = b.build();
        let params = required_depth(&g, DepthVariant::NashUnit).with_depth(2);
        let s = slice_outcome(&[0, 0, 0], &g, &params).unwrap();
        assert_eq!((s.l, s.alpha, s.beta, s.gamma), (1, vec![0], vec![0], vec![0]));
    }

    #[test]
    fn branch_all_a() {
        let g = branch();
        let params = required_depth(&g, DepthVariant::NashUnit).with_depth(24);
        let s = slice_outcome(&[0; 25], &g, &params).unwrap();
        assert_eq!((s.l, &s.alpha[..], &s.beta[..]), (1, &[0][..], &[0][..]));
        assert!(s.visit_alpha(&g).is_empty());
        assert!(s.violations(&g, 1).is_empty());
    }

    #[test]
    fn detour_solved_outcome() {
        let g = detour();
        let params = required_depth(&g, DepthVariant::NashUnit);
        assert_eq!(params.depth, 24);
        let sol = solve_truncated(&g, &params, Preference::Nash).unwrap();
        let s = slice_outcome(sol.outcome(), &g, &params).unwrap();
        assert_eq!(s.violations(&g, 1), Vec::<String>::new());
        assert_eq!(s.history()[..], sol.outcome()[..s.history().len()]);
    }

    #[test]
    fn too_short_outcome_is_rejected() {
        let g = detour();
        let params = required_depth(&g, DepthVariant::NashUnit);
        assert!(slice_outcome(&[0, 1], &g, &params).is_err());
    }
}

//! Set operations on sorted term lists used by VSA and automaton enumeration.

use crate::error::{Error, Result};
use crate::par::Exec;
use crate::term::{Symbol, Term};

/// Products at least this large are split across threads.
const PAR_PRODUCT_THRESHOLD: usize = 4096;

/// `{ head(t_1, ..., t_k) | t_i ∈ children[i] }`, sorted.
///
/// Each child list must be sorted and duplicate-free; the output then comes
/// out sorted without a final sort because term order compares children
/// left to right.
pub(crate) fn product(
    head: &Symbol,
    children: &[&[Term]],
    limit: usize,
    exec: Exec,
) -> Result<Vec<Term>> {
    let total = children
        .iter()
        .try_fold(1usize, |acc, c| acc.checked_mul(c.len()))
        .unwrap_or(usize::MAX);
    if total > limit {
        return Err(Error::Overflow { limit });
    }
    if total == 0 {
        return Ok(Vec::new());
    }
    let Some((first, rest)) = children.split_first() else {
        return Ok(vec![Term::new(head.clone(), Vec::new())?]);
    };
    let block = |i: usize| -> Vec<Term> {
        let mut out = Vec::with_capacity(total / first.len());
        let mut idx = vec![0usize; rest.len()];
        loop {
            let mut args = Vec::with_capacity(children.len());
            args.push(first[i].clone());
            args.extend(idx.iter().zip(rest).map(|(&j, c)| c[j].clone()));
            out.push(Term::new(head.clone(), args).expect("arity checked by caller"));
            // odometer, last position fastest
            let mut pos = rest.len();
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < rest[pos].len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
    };
    let exec = if total >= PAR_PRODUCT_THRESHOLD {
        exec
    } else {
        Exec::Sequential
    };
    Ok(exec.map_range(first.len(), block).concat())
}

/// Sorted, deduplicated union of sorted lists.
pub(crate) fn union(parts: &[&[Term]], limit: usize) -> Result<Vec<Term>> {
    match parts {
        [] => return Ok(Vec::new()),
        [one] => {
            if one.len() > limit {
                return Err(Error::Overflow { limit });
            }
            return Ok(one.to_vec());
        }
        _ => {}
    }
    let mut all: Vec<Term> = parts.iter().flat_map(|p| p.iter().cloned()).collect();
    all.sort_unstable();
    all.dedup();
    if all.len() > limit {
        return Err(Error::Overflow { limit });
    }
    Ok(all)
}

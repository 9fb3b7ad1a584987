//! Self-avoiding paths of a fixed length starting near the origin.

use crate::cayley::CayleyView;
use crate::error::{Error, Result};
use crate::marked_group::GroupElement;

use super::window::geometric_ball_elements;

pub const DEFAULT_SAW_CAP: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SawSet {
    pub m: usize,
    /// Each path has `m + 1` vertices.
    pub paths: Vec<Vec<GroupElement>>,
    /// Set when enumeration stopped at the cap (DFS order prefix kept).
    pub truncated: bool,
}

/// All self-avoiding paths of length `m` starting in `B(start_radius)`.
pub fn enumerate_saw(view: &CayleyView, m: usize, start_radius: f64, cap: usize) -> Result<SawSet> {
    let starts = geometric_ball_elements(view.group(), start_radius);
    enumerate_saw_from(view, &starts, m, cap)
}

pub fn enumerate_saw_from(view: &CayleyView, starts: &[GroupElement], m: usize, cap: usize) -> Result<SawSet> {
    let set = enumerate_saw_capped_from(view, starts, m, cap)?;
    if set.truncated {
        return Err(Error::SawCapExceeded { cap, m });
    }
    Ok(set)
}

/// Like [`enumerate_saw`] but keeps the first `cap` paths instead of failing.
pub fn enumerate_saw_capped(view: &CayleyView, m: usize, start_radius: f64, cap: usize) -> Result<SawSet> {
    let starts = geometric_ball_elements(view.group(), start_radius);
    enumerate_saw_capped_from(view, &starts, m, cap)
}

pub fn enumerate_saw_capped_from(view: &CayleyView, starts: &[GroupElement], m: usize, cap: usize) -> Result<SawSet> {
    if m == 0 {
        return Err(Error::pre("path length must be at least 1"));
    }
    let mut out = SawSet { m, paths: Vec::new(), truncated: false };
    for s in starts {
        let mut path = vec![s.clone()];
        if !extend(view, &mut path, m, cap, &mut out) {
            break;
        }
    }
    Ok(out)
}

/// Returns false once the cap is hit.
fn extend(view: &CayleyView, path: &mut Vec<GroupElement>, m: usize, cap: usize, out: &mut SawSet) -> bool {
    if path.len() == m + 1 {
        if out.paths.len() >= cap {
            out.truncated = true;
            return false;
        }
        out.paths.push(path.clone());
        return true;
    }
    for y in view.neighbors(path.last().unwrap()) {
        if path.contains(&y) {
            continue;
        }
        path.push(y);
        let go = extend(view, path, m, cap, out);
        path.pop();
        if !go {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marked_group::parse_group;

    #[test]
    fn counts() {
        let z2 = CayleyView::new(parse_group("2;").unwrap());
        assert_eq!(enumerate_saw(&z2, 1, 1.0, DEFAULT_SAW_CAP).unwrap().paths.len(), 20);
        // 4 * 3 continuations from each of 5 starts
        assert_eq!(enumerate_saw(&z2, 2, 1.0, DEFAULT_SAW_CAP).unwrap().paths.len(), 60);
        assert!(enumerate_saw(&z2, 0, 1.0, 10).is_err());
        let z = CayleyView::new(parse_group("[Z; 1]").unwrap());
        let set = enumerate_saw_from(&z, &[z.group().zero()], 2, 10).unwrap();
        let ends: Vec<i64> = set.paths.iter().map(|p| p[2].free[0]).collect();
        assert_eq!(ends, vec![2, -2]);
    }

    #[test]
    fn cap_is_reported() {
        let z2 = CayleyView::new(parse_group("2;").unwrap());
        assert!(matches!(enumerate_saw(&z2, 3, 1.0, 50), Err(Error::SawCapExceeded { cap: 50, m: 3 })));
        let capped = enumerate_saw_capped(&z2, 3, 1.0, 50).unwrap();
        assert!(capped.truncated);
        assert_eq!(capped.paths.len(), 50);
    }
}

use serde::{Deserialize, Serialize};

use super::EditError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EditType {
    Substitution,
    Insertion,
    Deletion,
    Transposition,
    /// Distance 2 with no single-operation alignment.
    Mixed,
}

impl EditType {
    pub const BASIC: [EditType; 4] = [
        EditType::Substitution,
        EditType::Insertion,
        EditType::Deletion,
        EditType::Transposition,
    ];

    fn bit(self) -> u8 {
        match self {
            EditType::Substitution => 1,
            EditType::Insertion => 2,
            EditType::Deletion => 4,
            EditType::Transposition => 8,
            EditType::Mixed => 0,
        }
    }
}

impl std::fmt::Display for EditType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EditType::Substitution => "Substitution",
            EditType::Insertion => "Insertion",
            EditType::Deletion => "Deletion",
            EditType::Transposition => "Transposition",
            EditType::Mixed => "Mixed",
        };
        f.write_str(s)
    }
}

/// Set of operation-type masks (each mask a subset of the four operations),
/// encoded as a 16-bit membership set.
type MaskSet = u16;

fn extend(set: MaskSet, op: u8) -> MaskSet {
    let mut out = 0;
    for m in 0..16u8 {
        if set & (1 << m) != 0 {
            out |= 1 << (m | op);
        }
    }
    out
}

/// Classify the edit turning `original` into `variant`. Insertion means the
/// variant has extra characters, deletion that it lost some.
///
/// At distance 2 the result is the homogeneous type if any optimal
/// alignment uses a single kind of operation, otherwise [`EditType::Mixed`].
pub fn classify_edit(original: &str, variant: &str) -> Result<EditType, EditError> {
    let a: Vec<char> = original.chars().collect();
    let b: Vec<char> = variant.chars().collect();
    let (rows, cols) = (a.len() + 1, b.len() + 1);
    let mut dist = vec![0usize; rows * cols];
    let mut masks: Vec<MaskSet> = vec![0; rows * cols];
    let at = |i: usize, j: usize| i * cols + j;

    masks[0] = 1;
    for i in 1..rows {
        dist[at(i, 0)] = i;
        masks[at(i, 0)] = 1 << EditType::Deletion.bit();
    }
    for j in 1..cols {
        dist[at(0, j)] = j;
        masks[at(0, j)] = 1 << EditType::Insertion.bit();
    }
    for i in 1..rows {
        for j in 1..cols {
            let same = a[i - 1] == b[j - 1];
            let mut options: [(usize, MaskSet); 4] = [(usize::MAX, 0); 4];
            options[0] = (
                dist[at(i - 1, j - 1)] + usize::from(!same),
                if same {
                    masks[at(i - 1, j - 1)]
                } else {
                    extend(masks[at(i - 1, j - 1)], EditType::Substitution.bit())
                },
            );
            options[1] = (
                dist[at(i - 1, j)] + 1,
                extend(masks[at(i - 1, j)], EditType::Deletion.bit()),
            );
            options[2] = (
                dist[at(i, j - 1)] + 1,
                extend(masks[at(i, j - 1)], EditType::Insertion.bit()),
            );
            if i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] && !same {
                options[3] = (
                    dist[at(i - 2, j - 2)] + 1,
                    extend(masks[at(i - 2, j - 2)], EditType::Transposition.bit()),
                );
            }
            let best = options.iter().map(|o| o.0).min().unwrap_or(usize::MAX);
            dist[at(i, j)] = best;
            masks[at(i, j)] = options
                .iter()
                .filter(|o| o.0 == best)
                .fold(0, |acc, o| acc | o.1);
        }
    }

    let distance = dist[at(rows - 1, cols - 1)];
    if distance == 0 || distance > 2 {
        return Err(EditError::ClassifyDistance { distance });
    }
    let set = masks[at(rows - 1, cols - 1)];
    // At most one homogeneous type can be optimal for a given pair; a
    // distance-1 pair always has one.
    for t in EditType::BASIC {
        if set & (1 << t.bit()) != 0 {
            return Ok(t);
        }
    }
    Ok(EditType::Mixed)
}

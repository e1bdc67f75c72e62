/// Net line-count deltas recorded by hunks already applied in the current
/// commit, keyed by the pre-commit index at which each hunk started.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LineOffsets {
    deltas: Vec<(usize, isize)>,
}

impl LineOffsets {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, position: usize, delta: isize) {
        if delta == 0 {
            return;
        }
        let at = self.deltas.partition_point(|&(p, _)| p <= position);
        self.deltas.insert(at, (position, delta));
    }

    pub fn clear(&mut self) {
        self.deltas.clear();
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }
}

/// Maps a raw (pre-commit) index to its current index: the raw index plus
/// every recorded delta at positions strictly before it.
pub fn adjust_position(offsets: &LineOffsets, raw_index: usize) -> usize {
    let shift: isize = offsets
        .deltas
        .iter()
        .take_while(|&&(p, _)| p < raw_index)
        .map(|&(_, d)| d)
        .sum();
    raw_index.saturating_add_signed(shift)
}

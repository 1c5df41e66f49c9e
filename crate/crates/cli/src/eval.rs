use crate::records::ScoreRow;
use pprl_linkage::TAU_SCALE;

/// Match decision at a fixed-point threshold, strict.
fn decide(row: &ScoreRow, tau_fixed: u64) -> bool {
    row.numerator * TAU_SCALE > tau_fixed * row.denominator
}

#[derive(Debug, Clone, Copy)]
pub struct ThresholdErrors {
    pub tau: f64,
    pub false_positives: u64,
    pub false_negatives: u64,
}

impl ThresholdErrors {
    pub fn total(&self) -> u64 {
        self.false_positives + self.false_negatives
    }
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub rows: Vec<ThresholdErrors>,
    pub best_tau: f64,
    pub best_errors: ThresholdErrors,
    pub auc: f64,
    pub queries: usize,
}

/// Counts errors of the best-match-per-query decisions at one threshold.
/// A false positive is a declared match that is wrong or has no true
/// counterpart; a false negative is a query with a counterpart that got no
/// match or the wrong index.
pub fn errors_at(scores: &[ScoreRow], truth: &[Option<u64>], tau: f64) -> ThresholdErrors {
    let tau_fixed = (tau * TAU_SCALE as f64).round() as u64;
    let mut fp = 0;
    let mut fn_ = 0;
    for (row, t) in scores.iter().zip(truth) {
        let matched = decide(row, tau_fixed);
        let correct = *t == Some(row.index);
        if matched && !correct {
            fp += 1;
        }
        if t.is_some() && !(matched && correct) {
            fn_ += 1;
        }
    }
    ThresholdErrors {
        tau,
        false_positives: fp,
        false_negatives: fn_,
    }
}

/// Rank-based ROC AUC over (max score, has-counterpart) pairs, with average
/// ranks on ties; score ordering is the exact fraction ordering.
pub fn roc_auc(scores: &[ScoreRow], truth: &[Option<u64>]) -> f64 {
    let mut indexed: Vec<(usize, &ScoreRow)> = scores.iter().enumerate().collect();
    indexed.sort_by(|(_, a), (_, b)| {
        (a.numerator as u128 * b.denominator as u128)
            .cmp(&(b.numerator as u128 * a.denominator as u128))
    });
    let n = indexed.len();
    let mut ranks = vec![0.0f64; n];
    let mut at = 0;
    while at < n {
        let mut end = at + 1;
        while end < n {
            let (_, a) = indexed[at];
            let (_, b) = indexed[end];
            if a.numerator as u128 * b.denominator as u128
                != b.numerator as u128 * a.denominator as u128
            {
                break;
            }
            end += 1;
        }
        let avg = (at + 1 + end) as f64 / 2.0;
        for k in at..end {
            ranks[indexed[k].0] = avg;
        }
        at = end;
    }

    let mut rank_sum_pos = 0.0;
    let mut n_pos = 0u64;
    for (i, t) in truth.iter().enumerate() {
        if t.is_some() {
            rank_sum_pos += ranks[i];
            n_pos += 1;
        }
    }
    let n_neg = (n as u64) - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return 1.0;
    }
    (rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0) / (n_pos as f64 * n_neg as f64)
}

/// Full evaluation: error counts at the requested thresholds, the minimum
/// total-error threshold over a fine grid, and the ROC AUC.
pub fn evaluate(scores: &[ScoreRow], truth: &[Option<u64>], thresholds: &[f64]) -> EvalReport {
    assert_eq!(
        scores.len(),
        truth.len(),
        "score and truth files disagree on query count"
    );
    let rows: Vec<ThresholdErrors> = thresholds
        .iter()
        .map(|&tau| errors_at(scores, truth, tau))
        .collect();

    let mut best = errors_at(scores, truth, 0.5);
    let mut grid = 0.5f64;
    while grid < 0.95 {
        let cand = errors_at(scores, truth, grid);
        if cand.total() < best.total() {
            best = cand;
        }
        grid += 0.0025;
    }

    EvalReport {
        best_tau: best.tau,
        best_errors: best,
        auc: roc_auc(scores, truth),
        queries: scores.len(),
        rows,
    }
}

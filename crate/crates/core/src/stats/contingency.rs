use std::collections::BTreeSet;

use crate::dfr_window::{DfRelation, RelationCounts};
use crate::error::{Error, Result};

/// 2×k frequency table. Row 0 is the reference window, row 1 the detection
/// window. Columns whose total is zero are dropped, so every column total is
/// positive and k ≥ 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable<K = DfRelation> {
    columns: Vec<K>,
    counts: [Vec<u64>; 2],
    row_totals: [u64; 2],
    col_totals: Vec<u64>,
    grand_total: u64,
}

/// Adjusted standardized residual of one cell. `degenerate` is set when the
/// variance term vanishes (a row or a column holds every observation); the
/// value is then 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub value: f64,
    pub degenerate: bool,
}

/// Builds the table over the sorted union of relation types present in either
/// window.
pub fn build_contingency(reference: &RelationCounts, detection: &RelationCounts) -> Result<ContingencyTable> {
    let columns: BTreeSet<DfRelation> = reference
        .iter()
        .chain(detection.iter())
        .filter(|(_, &c)| c > 0)
        .map(|(r, _)| *r)
        .collect();
    let get = |m: &RelationCounts, r: &DfRelation| m.get(r).copied().unwrap_or(0) as u64;
    let columns: Vec<DfRelation> = columns.into_iter().collect();
    let row0 = columns.iter().map(|r| get(reference, r)).collect();
    let row1 = columns.iter().map(|r| get(detection, r)).collect();
    ContingencyTable::from_rows(columns, row0, row1)
}

impl<K: Copy + PartialEq> ContingencyTable<K> {
    pub fn from_rows(columns: Vec<K>, row0: Vec<u64>, row1: Vec<u64>) -> Result<Self> {
        assert_eq!(columns.len(), row0.len());
        assert_eq!(columns.len(), row1.len());
        let mut kept = Vec::with_capacity(columns.len());
        let mut r0 = Vec::with_capacity(columns.len());
        let mut r1 = Vec::with_capacity(columns.len());
        for ((c, a), b) in columns.into_iter().zip(row0).zip(row1) {
            if a + b > 0 {
                kept.push(c);
                r0.push(a);
                r1.push(b);
            }
        }
        if kept.is_empty() {
            return Err(Error::EmptyContingency);
        }
        let col_totals: Vec<u64> = r0.iter().zip(&r1).map(|(a, b)| a + b).collect();
        let row_totals = [r0.iter().sum(), r1.iter().sum()];
        Ok(ContingencyTable {
            columns: kept,
            counts: [r0, r1],
            row_totals,
            grand_total: row_totals[0] + row_totals[1],
            col_totals,
        })
    }

    pub fn columns(&self) -> &[K] {
        &self.columns
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn count(&self, row: usize, col: usize) -> u64 {
        self.counts[row][col]
    }

    pub fn row(&self, row: usize) -> &[u64] {
        &self.counts[row]
    }

    pub fn row_total(&self, row: usize) -> u64 {
        self.row_totals[row]
    }

    pub fn col_total(&self, col: usize) -> u64 {
        self.col_totals[col]
    }

    pub fn grand_total(&self) -> u64 {
        self.grand_total
    }

    pub fn column_of(&self, key: &K) -> Option<usize> {
        self.columns.iter().position(|c| c == key)
    }

    pub fn expected(&self, row: usize, col: usize) -> f64 {
        self.row_totals[row] as f64 * self.col_totals[col] as f64 / self.grand_total as f64
    }

    /// Likelihood-ratio statistic `2 Σ O ln(O/E)` and its degrees of freedom
    /// `k - 1`. Empty cells contribute nothing.
    pub fn g_statistic(&self) -> (f64, u32) {
        let mut g = 0.0;
        for row in 0..2 {
            for col in 0..self.columns.len() {
                let observed = self.counts[row][col];
                if observed > 0 {
                    let o = observed as f64;
                    g += o * (o / self.expected(row, col)).ln();
                }
            }
        }
        // rounding can leave a tiny negative value for proportional rows
        ((2.0 * g).max(0.0), (self.columns.len() - 1) as u32)
    }

    pub fn asr(&self, row: usize, col: usize) -> Residual {
        let n = self.grand_total as f64;
        let expected = self.expected(row, col);
        let variance = expected
            * (1.0 - self.row_totals[row] as f64 / n)
            * (1.0 - self.col_totals[col] as f64 / n);
        if variance <= 0.0 {
            return Residual {
                value: 0.0,
                degenerate: true,
            };
        }
        Residual {
            value: (self.counts[row][col] as f64 - expected) / variance.sqrt(),
            degenerate: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_model::ActivityId;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn table(row0: &[u64], row1: &[u64]) -> ContingencyTable<usize> {
        ContingencyTable::from_rows((0..row0.len()).collect(), row0.to_vec(), row1.to_vec()).unwrap()
    }

    fn rel(a: u32, b: u32) -> DfRelation {
        DfRelation::new(ActivityId(a), ActivityId(b))
    }

    #[test]
    fn identical_single_type() {
        let r: RelationCounts = HashMap::from([(rel(0, 1), 5)]);
        let t = build_contingency(&r, &r).unwrap();
        assert_eq!(t.num_columns(), 1);
        assert_eq!((t.count(0, 0), t.count(1, 0)), (5, 5));
    }

    #[test]
    fn disjoint_types() {
        let a: RelationCounts = HashMap::from([(rel(0, 1), 3)]);
        let b: RelationCounts = HashMap::from([(rel(1, 2), 4)]);
        let t = build_contingency(&a, &b).unwrap();
        assert_eq!(t.columns(), &[rel(0, 1), rel(1, 2)]);
        assert_eq!(t.row(0), &[3, 0]);
        assert_eq!(t.row(1), &[0, 4]);
    }

    #[test]
    fn zero_total_column_dropped() {
        let a: RelationCounts = HashMap::from([(rel(0, 1), 2), (rel(2, 3), 0)]);
        let b: RelationCounts = HashMap::from([(rel(0, 1), 1)]);
        let t = build_contingency(&a, &b).unwrap();
        assert_eq!(t.num_columns(), 1);
    }

    #[test]
    fn both_empty_is_error() {
        let e = RelationCounts::new();
        assert!(matches!(build_contingency(&e, &e), Err(Error::EmptyContingency)));
    }

    #[test]
    fn g_uniform_is_zero() {
        let (g, df) = table(&[5, 5], &[5, 5]).g_statistic();
        assert_eq!(g, 0.0);
        assert_eq!(df, 1);
    }

    #[test]
    fn g_golden_2x2() {
        // 2·(60·ln 1.5 + 20·ln 0.5), cross-checked with scipy chi2_contingency(lambda_="log-likelihood")
        let (g, df) = table(&[30, 10], &[10, 30]).g_statistic();
        assert!((g - 20.929_925_750_581_912).abs() < 1e-10);
        assert!((g - 20.93).abs() < 1e-2);
        assert_eq!(df, 1);
    }

    #[test]
    fn g_and_asr_golden_2x3() {
        // scipy: G = 16.534172243623914, df = 2
        let t = table(&[12, 5, 0], &[3, 9, 7]);
        let (g, df) = t.g_statistic();
        assert!((g - 16.534_172_243_623_914).abs() < 1e-10);
        assert_eq!(df, 2);
        let want = [3.329_415_359_223_394, -1.103_322_880_353_747_6, -2.788_360_562_758_909_6];
        for (j, w) in want.iter().enumerate() {
            assert!((t.asr(0, j).value - w).abs() < 1e-10);
        }
    }

    #[test]
    fn asr_golden_2x2() {
        let t = table(&[30, 10], &[10, 30]);
        let r = t.asr(0, 0);
        assert!(!r.degenerate);
        assert!((r.value - 4.472_135_954_999_579).abs() < 1e-12);
        assert!((r.value - 10.0 / (20.0f64 * 0.25).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn asr_degenerate_when_row_empty() {
        let t = table(&[4, 6], &[0, 0]);
        assert!(t.asr(1, 0).degenerate);
        assert_eq!(t.asr(1, 0).value, 0.0);
        let t = table(&[4], &[6]);
        assert!(t.asr(1, 0).degenerate);
    }

    fn arb_rows() -> impl Strategy<Value = (Vec<u64>, Vec<u64>)> {
        (1usize..7).prop_flat_map(|k| {
            (
                proptest::collection::vec(0u64..60, k),
                proptest::collection::vec(0u64..60, k),
            )
        })
    }

    proptest! {
        #[test]
        fn g_nonnegative_and_symmetric((r0, r1) in arb_rows(), seed in 0u64..1000) {
            prop_assume!(r0.iter().chain(&r1).any(|&c| c > 0));
            let t = table(&r0, &r1);
            let (g, _) = t.g_statistic();
            prop_assert!(g >= 0.0);

            let swapped = table(&r1, &r0).g_statistic().0;
            prop_assert!((g - swapped).abs() < 1e-9 * (1.0 + g));

            let mut perm: Vec<usize> = (0..r0.len()).collect();
            perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let p0: Vec<u64> = perm.iter().map(|&i| r0[i]).collect();
            let p1: Vec<u64> = perm.iter().map(|&i| r1[i]).collect();
            let permuted = table(&p0, &p1).g_statistic().0;
            prop_assert!((g - permuted).abs() < 1e-9 * (1.0 + g));

            for j in 0..t.num_columns() {
                let a = t.asr(0, j);
                let b = t.asr(1, j);
                prop_assert!((a.value + b.value).abs() < 1e-9);
            }
        }

        #[test]
        fn proportional_rows_give_zero(base in proptest::collection::vec(1u64..20, 1..6), m in 1u64..5) {
            let scaled: Vec<u64> = base.iter().map(|c| c * m).collect();
            let t = table(&base, &scaled);
            prop_assert!(t.g_statistic().0 < 1e-9);
            for j in 0..t.num_columns() {
                prop_assert!(t.asr(1, j).value.abs() < 1e-9);
            }
        }
    }

    /// Permutation test on a 2×2 table: shuffle column labels over the pooled
    /// observations and compare G against the observed value.
    fn permutation_p(row0: [u64; 2], row1: [u64; 2], rounds: usize, rng: &mut ChaCha8Rng) -> f64 {
        let observed = table(&row0, &row1).g_statistic().0;
        let n0 = (row0[0] + row0[1]) as usize;
        let mut labels: Vec<u8> = Vec::new();
        for (col, c) in [row0[0] + row1[0], row0[1] + row1[1]].into_iter().enumerate() {
            labels.extend(std::iter::repeat_n(col as u8, c as usize));
        }
        let mut extreme = 0;
        for _ in 0..rounds {
            labels.shuffle(rng);
            let mut r0 = [0u64; 2];
            let mut r1 = [0u64; 2];
            for (i, &l) in labels.iter().enumerate() {
                if i < n0 {
                    r0[l as usize] += 1;
                } else {
                    r1[l as usize] += 1;
                }
            }
            if table(&r0, &r1).g_statistic().0 >= observed - 1e-9 {
                extreme += 1;
            }
        }
        extreme as f64 / rounds as f64
    }

    #[test]
    fn conclusions_agree_with_permutation_test() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut decided = 0;
        for _ in 0..50 {
            let row0 = [rng.random_range(5..40), rng.random_range(5..40)];
            let row1 = [rng.random_range(5..40), rng.random_range(5..40)];
            let (g, df) = table(&row0, &row1).g_statistic();
            let p = super::super::chi_square_sf(g, df).unwrap();
            let p_perm = permutation_p(row0, row1, 2000, &mut rng);
            // near the threshold the permutation estimate itself is noisy
            if (0.025..0.1).contains(&p_perm) {
                continue;
            }
            decided += 1;
            assert_eq!(p < 0.05, p_perm < 0.05, "{row0:?} {row1:?}: {p} vs {p_perm}");
        }
        assert!(decided >= 40);
    }
}

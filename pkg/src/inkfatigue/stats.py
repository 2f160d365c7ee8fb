"""Paired nonparametric testing and the set-pair comparison matrix.

The workhorse is the Wilcoxon signed-rank test with an exact small-sample null
distribution: zero differences are dropped (classic discard rule), |d| is
ranked with midranks on ties, and W is the sum of ranks of positive
differences. With no ties and n_effective <= 25 the two-sided p-value is exact
(symmetric tail counts of the W null distribution, computed by convolution
over the rank set); otherwise a normal approximation with tie-corrected
variance and a 0.5 continuity correction is used. n_effective == 0 yields
p = 1.0.

A matrix run applies the test to every (task, feature) row and every set pair
column, excluding per cell the subjects that miss either record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import EmptyInputError, InsufficientDataError, RangeError
from .features import DEFAULT_CATALOG, FeatureVector, feature_table
from .model import Category, SetId, StudyCorpus, TASK_CATEGORIES, validate_task_id

EXACT_MAX_N = 25

#: Below this n_effective even the most extreme exact two-sided p (2/2^n)
#: cannot fall under 0.05, so the cell is flagged as low-n.
LOW_N_THRESHOLD = 6

ALTERNATIVES = ("two-sided", "greater", "less")


@dataclass(frozen=True)
class TestResult:
    """Outcome of one paired test.

    ``statistic`` is W, the sum of positive-difference ranks. ``p`` is the
    p-value under the recorded ``alternative``; ``p_two_sided`` asserts the
    default sidedness for callers that rely on it. ``zeros_dropped`` records
    how many zero differences the discard rule removed.
    """

    statistic: float
    n_effective: int
    p: float
    method: str  # "exact" | "normal-approx"
    ties_present: bool
    zeros_dropped: int = 0
    alternative: str = "two-sided"

    @property
    def p_two_sided(self) -> float:
        if self.alternative != "two-sided":
            raise ValueError(f"result holds a {self.alternative!r} p-value")
        return self.p


@lru_cache(maxsize=64)
def _w_null_counts(n: int) -> np.ndarray:
    """Number of sign assignments reaching each W value, for ranks 1..n.

    Computed by convolving (1 + z^k) over k = 1..n; equivalent to literal
    enumeration of the 2^n assignments and safe in int64 up to n = 25.
    """
    counts = np.zeros(n * (n + 1) // 2 + 1, dtype=np.int64)
    counts[0] = 1
    for k in range(1, n + 1):
        counts[k:] += counts[:-k].copy()
    return counts


def _exact_p(w: float, n: int, alternative: str) -> float:
    counts = _w_null_counts(n)
    total = float(2**n)
    m = n * (n + 1) // 2
    w_int = int(round(w))
    if alternative == "greater":
        return float(counts[w_int:].sum() / total)
    if alternative == "less":
        return float(counts[: w_int + 1].sum() / total)
    hi = max(w_int, m - w_int)
    lo = m - hi
    p = (counts[hi:].sum() + counts[: lo + 1].sum()) / total
    return float(min(p, 1.0))


def _normal_phi_tail(z: float) -> float:
    """P(Z >= z) for a standard normal."""
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def _approx_p(
    w: float, n: int, tie_counts: np.ndarray, alternative: str
) -> float:
    mu = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    var -= float((tie_counts.astype(np.float64) ** 3 - tie_counts).sum()) / 48.0
    if var <= 0:
        return 1.0
    sd = math.sqrt(var)
    if alternative == "greater":
        z = (w - mu - 0.5) / sd
        return min(1.0, _normal_phi_tail(z))
    if alternative == "less":
        z = (w - mu + 0.5) / sd
        return min(1.0, 1.0 - _normal_phi_tail(z))
    delta = abs(w - mu)
    z = (delta - 0.5) / sd
    return min(1.0, 2.0 * _normal_phi_tail(z))


def _midranks(values: np.ndarray) -> np.ndarray:
    uniq, inverse, counts = np.unique(values, return_inverse=True, return_counts=True)
    ends = np.cumsum(counts)
    starts = ends - counts
    avg = (starts + 1 + ends) / 2.0
    return avg[inverse]


def wilcoxon_signed_rank(
    paired: Iterable[tuple[float, float]], alternative: str = "two-sided"
) -> TestResult:
    """Wilcoxon signed-rank test over (a, b) value pairs.

    ``alternative="greater"`` tests whether a tends to exceed b. Raises
    EmptyInputError for no pairs and ValueError for non-finite values.
    """
    if alternative not in ALTERNATIVES:
        raise ValueError(f"alternative must be one of {ALTERNATIVES}, got {alternative!r}")
    pairs = np.asarray(list(paired), dtype=np.float64)
    if pairs.size == 0:
        raise EmptyInputError("signed-rank test needs at least one pair")
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ValueError("paired input must be a sequence of (a, b) pairs")
    if not np.isfinite(pairs).all():
        raise ValueError("paired values must be finite")

    d = pairs[:, 0] - pairs[:, 1]
    zeros = int((d == 0).sum())
    d = d[d != 0]
    n = int(d.size)
    if n == 0:
        return TestResult(
            statistic=0.0,
            n_effective=0,
            p=1.0,
            method="exact",
            ties_present=False,
            zeros_dropped=zeros,
            alternative=alternative,
        )

    abs_d = np.abs(d)
    ranks = _midranks(abs_d)
    w = float(ranks[d > 0].sum())
    ties = bool(np.unique(abs_d).size != n)

    if not ties and n <= EXACT_MAX_N:
        p = _exact_p(w, n, alternative)
        method = "exact"
    else:
        _, tie_counts = np.unique(abs_d, return_counts=True)
        p = _approx_p(w, n, tie_counts, alternative)
        method = "normal-approx"
    return TestResult(
        statistic=w,
        n_effective=n,
        p=p,
        method=method,
        ties_present=ties,
        zeros_dropped=zeros,
        alternative=alternative,
    )


def rank_sum_test(
    a_values: Iterable[float],
    b_values: Iterable[float],
    alternative: str = "two-sided",
) -> TestResult:
    """Unpaired two-sample rank-sum test (sensitivity-analysis variant).

    Normal approximation with tie-corrected variance and continuity
    correction; the statistic reported is the rank sum of the first sample.
    """
    if alternative not in ALTERNATIVES:
        raise ValueError(f"alternative must be one of {ALTERNATIVES}, got {alternative!r}")
    a = np.asarray(list(a_values), dtype=np.float64)
    b = np.asarray(list(b_values), dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise EmptyInputError("rank-sum test needs both samples non-empty")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise ValueError("sample values must be finite")
    pooled = np.concatenate([a, b])
    ranks = _midranks(pooled)
    n1, n2 = int(a.size), int(b.size)
    n = n1 + n2
    r1 = float(ranks[:n1].sum())
    mu = n1 * (n + 1) / 2.0
    _, tie_counts = np.unique(pooled, return_counts=True)
    tie_term = float((tie_counts.astype(np.float64) ** 3 - tie_counts).sum())
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    ties = bool(tie_counts.size != n)
    if var <= 0:
        p = 1.0
    elif alternative == "greater":
        p = min(1.0, _normal_phi_tail((r1 - mu - 0.5) / math.sqrt(var)))
    elif alternative == "less":
        p = min(1.0, 1.0 - _normal_phi_tail((r1 - mu + 0.5) / math.sqrt(var)))
    else:
        p = min(1.0, 2.0 * _normal_phi_tail((abs(r1 - mu) - 0.5) / math.sqrt(var)))
    return TestResult(
        statistic=r1,
        n_effective=n,
        p=p,
        method="normal-approx",
        ties_present=ties,
        zeros_dropped=0,
        alternative=alternative,
    )


def bonferroni(p_values: Iterable[float], m: int | None = None) -> np.ndarray:
    """Bonferroni adjustment: p_adj = min(1, m * p), elementwise.

    ``m`` defaults to the number of p-values supplied.
    """
    p = np.asarray(list(p_values), dtype=np.float64)
    if m is None:
        m = int(p.size)
    if m < 1:
        raise RangeError(f"comparison count must be >= 1, got {m}")
    if p.size and (np.isnan(p).any() or p.min() < 0 or p.max() > 1):
        raise RangeError("p-values must lie in [0, 1]")
    return np.minimum(1.0, m * p)


# ---------------------------------------------------------------------------
# Corpus-level comparisons
# ---------------------------------------------------------------------------

FeatureTable = Mapping[tuple[str, SetId, int], FeatureVector]


def paired_feature_values(
    corpus: StudyCorpus,
    task: int,
    feature: str,
    pair: tuple[SetId, SetId],
    table: FeatureTable | None = None,
) -> list[tuple[float, float]]:
    """Per-subject (value in first set, value in second set) pairs, sorted by
    subject id. Subjects missing either record are excluded."""
    validate_task_id(task)
    set_a, set_b = pair
    if table is None:
        table = feature_table(corpus, DEFAULT_CATALOG)
    out = []
    for subject in corpus.subjects:
        fa = table.get((subject, set_a, task))
        fb = table.get((subject, set_b, task))
        if fa is None or fb is None:
            continue
        out.append((float(fa[feature]), float(fb[feature])))
    return out


def compare_sets(
    corpus: StudyCorpus,
    task: int,
    feature: str,
    pair: tuple[SetId, SetId],
    *,
    table: FeatureTable | None = None,
    test: str = "signed-rank",
    alternative: str = "two-sided",
) -> TestResult:
    """Test one (task, feature) across one set pair.

    Raises InsufficientDataError when no subject has both sets.
    """
    pairs = paired_feature_values(corpus, task, feature, pair, table)
    if not pairs:
        raise InsufficientDataError(
            f"no subject has task {task} in both {pair[0].value} and {pair[1].value}"
        )
    if test == "signed-rank":
        return wilcoxon_signed_rank(pairs, alternative)
    if test == "rank-sum":
        a = [v for v, _ in pairs]
        b = [v for _, v in pairs]
        return rank_sum_test(a, b, alternative)
    raise ValueError(f"test must be 'signed-rank' or 'rank-sum', got {test!r}")


@dataclass(frozen=True)
class MatrixRow:
    task: int
    feature: str

    @property
    def category(self) -> Category:
        return TASK_CATEGORIES[self.task]


@dataclass(frozen=True)
class Cell:
    """One matrix cell. ``n_effective`` may be None for matrices loaded from
    p-value tables that carry no sample-size information."""

    p: float
    n_effective: int | None = None
    method: str | None = None
    ties_present: bool | None = None
    low_n: bool = False

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise RangeError(f"p-value {self.p} outside [0, 1]")


@dataclass(frozen=True)
class ComparisonMatrix:
    """P-values for (task, feature) rows across ordered set-pair columns.

    ``cells[i][j]`` matches ``rows[i]`` and ``pairs[j]``; None marks a cell
    with no computable test (rendered NA).
    """

    rows: tuple[MatrixRow, ...]
    pairs: tuple[tuple[SetId, SetId], ...]
    cells: tuple[tuple[Cell | None, ...], ...]
    alpha: float = 0.05

    def mask(self, alpha: float | None = None) -> list[list[bool]]:
        """Significance mask: True where p < alpha (NA cells are False)."""
        a = self.alpha if alpha is None else alpha
        return [
            [cell is not None and cell.p < a for cell in row_cells]
            for row_cells in self.cells
        ]

    def significant_cells(
        self, alpha: float | None = None
    ) -> list[tuple[MatrixRow, tuple[SetId, SetId], Cell]]:
        a = self.alpha if alpha is None else alpha
        out = []
        for row, row_cells in zip(self.rows, self.cells):
            for pair, cell in zip(self.pairs, row_cells):
                if cell is not None and cell.p < a:
                    out.append((row, pair, cell))
        return out

    def column(self, pair: tuple[SetId, SetId]) -> list[Cell | None]:
        j = self.pairs.index(pair)
        return [row_cells[j] for row_cells in self.cells]


def default_rows(
    tasks: Sequence[int] = tuple(sorted(TASK_CATEGORIES)),
    catalog: Sequence[str] = DEFAULT_CATALOG,
) -> list[tuple[int, str]]:
    """Row spec covering every task and catalog feature, in canonical order."""
    return [(task, feature) for task in sorted(tasks) for feature in catalog]


def build_matrix(
    corpus: StudyCorpus,
    rows: Sequence[tuple[int, str]],
    pairs: Sequence[tuple[SetId, SetId]],
    *,
    alpha: float = 0.05,
    test: str = "signed-rank",
    alternative: str = "two-sided",
    table: FeatureTable | None = None,
) -> ComparisonMatrix:
    """Run one test per (row, pair) cell over the corpus.

    Cells without any complete subject pair become None instead of aborting
    the run. Row order is normalized to task ascending, then catalog order for
    features; duplicate rows collapse.
    """
    if not rows:
        raise EmptyInputError("row spec must name at least one (task, feature)")
    if not 0.0 < alpha < 1.0:
        raise RangeError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    catalog_order = {name: i for i, name in enumerate(DEFAULT_CATALOG)}
    norm_rows = sorted(
        {(validate_task_id(t), f) for t, f in rows},
        key=lambda r: (r[0], catalog_order.get(r[1], len(catalog_order)), r[1]),
    )
    if table is None:
        needed = sorted(
            {f for _, f in norm_rows},
            key=lambda f: (catalog_order.get(f, len(catalog_order)), f),
        )
        table = feature_table(corpus, needed)

    matrix_rows = tuple(MatrixRow(t, f) for t, f in norm_rows)
    all_cells = []
    for task, feature in norm_rows:
        row_cells: list[Cell | None] = []
        for pair in pairs:
            try:
                result = compare_sets(
                    corpus, task, feature, pair,
                    table=table, test=test, alternative=alternative,
                )
            except InsufficientDataError:
                row_cells.append(None)
                continue
            row_cells.append(
                Cell(
                    p=result.p,
                    n_effective=result.n_effective,
                    method=result.method,
                    ties_present=result.ties_present,
                    low_n=result.n_effective < LOW_N_THRESHOLD,
                )
            )
        all_cells.append(tuple(row_cells))
    return ComparisonMatrix(
        rows=matrix_rows,
        pairs=tuple(pairs),
        cells=tuple(all_cells),
        alpha=alpha,
    )

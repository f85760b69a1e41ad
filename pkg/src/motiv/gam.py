"""Additive-model engine for the inference panel.

Fits y = b0 + sum_j f_j(x_j) by penalized least squares, where f_j is either
a linear term or a cubic B-spline expansion with a difference penalty on
adjacent coefficients. All spline terms share one smoothing weight chosen by
generalized cross-validation over a fixed grid; each spline term carries a
sum-to-zero constraint so the intercept stays identifiable. Partial
dependence curves report per-term shapes in original units; t-test p-values
are available only when every term is linear.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import linalg, stats

from motiv.analytics import COUNTY_FEATURES, TWEET_FEATURES, county_aggregates
from motiv.corpus import Dataset
from motiv.frames import FRAMES

DEFAULT_LAMBDA_GRID: tuple[float, ...] = tuple(
    float(v) for v in np.logspace(-3.0, 3.0, 13)
)
SPLINE_DEGREE = 3
PD_GRID_SIZE = 50
RIDGE_JITTER = 1e-8


class GamSpecError(ValueError):
    """Invalid model specification (unknown feature, bad term list)."""


class GamFitError(ValueError):
    """Data makes the requested model unfittable (degenerate/rank-deficient)."""


@dataclass(frozen=True)
class TermSpec:
    feature: str
    kind: str  # "linear" | "spline"

    def __post_init__(self):
        if self.kind not in ("linear", "spline"):
            raise GamSpecError(f"term kind must be linear or spline, got {self.kind!r}")


@dataclass(frozen=True)
class ModelSpec:
    target: str
    terms: tuple[TermSpec, ...]
    granularity: str = "per_county"
    spline_basis_size: int = 10
    penalty_order: int = 2
    lambda_grid: tuple[float, ...] = DEFAULT_LAMBDA_GRID

    def __post_init__(self):
        if not self.terms:
            raise GamSpecError("model needs at least one term")
        names = [t.feature for t in self.terms]
        if len(set(names)) != len(names):
            raise GamSpecError("term features must be distinct")
        if self.target in names:
            raise GamSpecError("target cannot also be a term")
        if self.granularity not in ("per_county", "per_tweet"):
            raise GamSpecError(
                f"granularity must be per_county or per_tweet, got {self.granularity!r}"
            )
        if self.spline_basis_size < self.penalty_order + 2:
            raise GamSpecError(
                f"spline_basis_size must be >= penalty_order + 2 "
                f"({self.penalty_order + 2}), got {self.spline_basis_size}"
            )
        if not self.lambda_grid or any(v < 0 for v in self.lambda_grid):
            raise GamSpecError("lambda_grid must be non-empty and non-negative")


def spec_from_dict(raw: dict) -> ModelSpec:
    """Build a ModelSpec from parsed JSON, surfacing problems as GamSpecError."""
    try:
        terms = tuple(
            TermSpec(feature=str(t["feature"]), kind=str(t.get("kind", "linear")))
            for t in raw["terms"]
        )
        kwargs = {}
        for key in ("granularity", "spline_basis_size", "penalty_order"):
            if key in raw:
                kwargs[key] = raw[key]
        if "lambda_grid" in raw:
            kwargs["lambda_grid"] = tuple(float(v) for v in raw["lambda_grid"])
        return ModelSpec(target=str(raw["target"]), terms=terms, **kwargs)
    except (KeyError, TypeError) as exc:
        raise GamSpecError(f"bad model spec: {exc}") from exc


# --- feature tables ----------------------------------------------------------

def per_county_feature_names() -> list[str]:
    names = sorted(COUNTY_FEATURES) + ["total_tweets"]
    for frame in FRAMES:
        low = frame.name.lower()
        names.extend([f"{low}_for", f"{low}_against"])
    return names


def per_tweet_feature_names() -> list[str]:
    names = sorted(TWEET_FEATURES) + [f.name.lower() for f in FRAMES]
    names += sorted(COUNTY_FEATURES)
    return names


def feature_names(granularity: str) -> list[str]:
    if granularity == "per_county":
        return per_county_feature_names()
    return per_tweet_feature_names()


def _county_rows(dataset: Dataset) -> tuple[list[str], list[dict]]:
    aggregates = county_aggregates(dataset)
    ids, rows = [], []
    for fips in sorted(dataset.counties):
        county = dataset.counties[fips]
        agg = aggregates[fips]
        row = {name: fn(county, dataset) for name, fn in COUNTY_FEATURES.items()}
        row["total_tweets"] = float(agg.total_tweets)
        for frame in FRAMES:
            low = frame.name.lower()
            row[f"{low}_for"] = float(agg.counts[frame.name]["for"])
            row[f"{low}_against"] = float(agg.counts[frame.name]["against"])
        ids.append(fips)
        rows.append(row)
    return ids, rows


def _tweet_rows(dataset: Dataset) -> tuple[list[str], list[dict]]:
    ids, rows = [], []
    for tweet in dataset.tweets:
        county = dataset.counties[tweet.county_fips]
        row = {name: fn(tweet, county, dataset) for name, fn in TWEET_FEATURES.items()}
        for frame in FRAMES:
            row[frame.name.lower()] = 1.0 if frame in tweet.frames else 0.0
        for name, fn in COUNTY_FEATURES.items():
            row[name] = fn(county, dataset)
        ids.append(tweet.id)
        rows.append(row)
    return ids, rows


@dataclass
class DesignTable:
    target: str
    columns: list[str]
    x_raw: np.ndarray  # original units, rows x terms
    x: np.ndarray  # z-scored
    y: np.ndarray  # original units
    scales: list[tuple[float, float]]  # (mean, sd) per column
    granularity: str
    n_dropped: int
    row_ids: list[str]


def _make_table(target: str, names: list[str], y: np.ndarray, x_raw: np.ndarray,
                granularity: str, n_dropped: int, row_ids: list[str]) -> DesignTable:
    for j, name in enumerate([target] + names):
        col = y if j == 0 else x_raw[:, j - 1]
        if not np.isfinite(col).all():
            raise GamFitError(f"non-finite values in column {name!r}")
    if np.ptp(y) == 0.0:
        raise GamFitError("degenerate target: constant across rows")
    scales = []
    x = np.empty_like(x_raw)
    for j in range(x_raw.shape[1]):
        mean = float(x_raw[:, j].mean())
        sd = float(x_raw[:, j].std())
        if sd == 0.0:
            sd = 1.0
        scales.append((mean, sd))
        x[:, j] = (x_raw[:, j] - mean) / sd
    return DesignTable(
        target=target, columns=names, x_raw=x_raw, x=x, y=y, scales=scales,
        granularity=granularity, n_dropped=n_dropped, row_ids=row_ids,
    )


def table_from_arrays(target: str, y, columns: dict[str, "np.ndarray"],
                      granularity: str = "per_county") -> DesignTable:
    """Design table straight from numeric arrays (mainly for direct fits)."""
    y = np.asarray(y, dtype=np.float64)
    names = list(columns)
    x_raw = np.column_stack([np.asarray(columns[n], dtype=np.float64) for n in names])
    if x_raw.shape[0] != y.shape[0]:
        raise GamSpecError("column lengths do not match the target")
    return _make_table(target, names, y.copy(), x_raw, "per_county", 0,
                       [str(i) for i in range(y.shape[0])])


def design_row_table(dataset: Dataset, spec: ModelSpec) -> DesignTable:
    """Numeric table for the spec: one row per county or per tweet.

    Rows missing any required feature are dropped and counted. Term columns
    are z-scored with population standard deviation; scaling parameters are
    retained so downstream reporting stays in original units.
    """
    valid = set(feature_names(spec.granularity))
    for name in [spec.target] + [t.feature for t in spec.terms]:
        if name not in valid:
            raise GamSpecError(
                f"unknown feature {name!r} for {spec.granularity}; "
                f"valid: {', '.join(feature_names(spec.granularity))}"
            )
    ids, rows = (_county_rows(dataset) if spec.granularity == "per_county"
                 else _tweet_rows(dataset))
    wanted = [spec.target] + [t.feature for t in spec.terms]
    kept_ids, kept = [], []
    dropped = 0
    for row_id, row in zip(ids, rows):
        values = [row[name] for name in wanted]
        if any(v is None for v in values):
            dropped += 1
            continue
        kept_ids.append(row_id)
        kept.append(values)
    if not kept:
        raise GamFitError("no usable rows after dropping incomplete ones")
    table = np.asarray(kept, dtype=np.float64)
    return _make_table(
        spec.target, [t.feature for t in spec.terms],
        table[:, 0].copy(), table[:, 1:].copy(),
        spec.granularity, dropped, kept_ids,
    )


# --- B-spline basis ----------------------------------------------------------

def bspline_knots(lo: float, hi: float, k: int,
                  degree: int = SPLINE_DEGREE) -> np.ndarray:
    """Equally spaced knots spanning [lo, hi] with `degree` exterior pads."""
    if hi <= lo:
        raise GamFitError("zero-width domain for spline basis")
    n_seg = k - degree
    if n_seg < 1:
        raise GamSpecError(f"basis size {k} too small for degree {degree}")
    h = (hi - lo) / n_seg
    return lo + h * np.arange(-degree, n_seg + degree + 1, dtype=np.float64)


def bspline_design(x, knots: np.ndarray, degree: int = SPLINE_DEGREE) -> np.ndarray:
    """Evaluate the B-spline basis at x, clamped into the knot domain.

    Rows sum to 1 on the domain; evaluation outside it clamps to the
    boundary so extrapolated shapes stay flat.
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    k = knots.shape[0] - degree - 1
    lo = knots[degree]
    hi = knots[k]
    n_seg = k - degree
    h = (hi - lo) / n_seg
    u = np.clip(x, lo, hi)
    left = np.clip(((u - lo) / h).astype(np.int64), 0, n_seg - 1) + degree

    n = u.shape[0]
    work = np.zeros((n, degree + 1))
    work[:, 0] = 1.0
    for r in range(1, degree + 1):
        temp = work[:, :r].copy()
        work[:, 0] = 0.0
        for j in range(1, r + 1):
            kidx = left + j
            right_knot = knots[kidx]
            left_knot = knots[kidx - r]
            factor = temp[:, j - 1] / (right_knot - left_knot)
            work[:, j - 1] += factor * (right_knot - u)
            work[:, j] = factor * (u - left_knot)
    basis = np.zeros((n, k))
    rows = np.repeat(np.arange(n), degree + 1)
    cols = (left[:, None] - degree + np.arange(degree + 1)[None, :]).ravel()
    basis[rows, cols] = work.ravel()
    return basis


def bspline_basis(x, k: int, degree: int = SPLINE_DEGREE) -> np.ndarray:
    """Cubic B-spline basis on equally spaced knots spanning [min x, max x]."""
    if k < degree + 1:
        raise GamSpecError(f"basis size must be >= {degree + 1}, got {k}")
    x = np.asarray(x, dtype=np.float64)
    if not np.isfinite(x).all():
        raise GamFitError("non-finite values in spline input")
    lo = float(x.min())
    hi = float(x.max())
    return bspline_design(x, bspline_knots(lo, hi, k, degree), degree)


def difference_matrix(k: int, order: int) -> np.ndarray:
    """Order-d difference matrix D with shape (k - d, k)."""
    return np.diff(np.eye(k), n=order, axis=0)


def _constraint_basis(basis: np.ndarray) -> np.ndarray:
    """Orthonormal basis Z of the null space of the column-sum constraint.

    With theta = Z @ alpha, fitted spline values sum to zero over the
    training rows for every alpha.
    """
    c = basis.sum(axis=0)
    q, _ = np.linalg.qr(c[:, None], mode="complete")
    return q[:, 1:]


# --- fitting ------------------------------------------------------------------

@dataclass
class FittedTerm:
    spec: TermSpec
    coef: np.ndarray  # scaled-space coefficients for this block
    lam: float  # 0.0 for linear terms
    mean: float
    sd: float
    x_min: float
    x_max: float
    center: float  # training mean of the raw shape values
    z_mean: float  # training mean of the z-scored column
    knots: Optional[np.ndarray] = None
    z_basis: Optional[np.ndarray] = None  # constraint basis (k x (k-1))


@dataclass
class GamModel:
    spec: ModelSpec
    intercept: float
    terms: list[FittedTerm]
    edf: float
    rss: float
    gcv_score: float
    n_rows: int
    n_dropped: int
    lambda_shared: Optional[float]
    covariance: Optional[np.ndarray]  # scaled-space, all-linear models only
    column_slices: list[tuple[int, int]] = field(default_factory=list)

    @property
    def coefficients(self) -> np.ndarray:
        return np.concatenate([[self.intercept]] + [t.coef for t in self.terms])

    @property
    def n_coefficients(self) -> int:
        return 1 + sum(t.coef.shape[0] for t in self.terms)

    @property
    def all_linear(self) -> bool:
        return all(t.spec.kind == "linear" for t in self.terms)


def _term_design_block(term: FittedTerm, x_raw_col: np.ndarray) -> np.ndarray:
    z = (np.asarray(x_raw_col, dtype=np.float64) - term.mean) / term.sd
    if term.spec.kind == "linear":
        return z[:, None]
    return bspline_design(z, term.knots) @ term.z_basis


def design_matrix(model: GamModel, x_raw: np.ndarray) -> np.ndarray:
    """Assemble [1 | block_1 | ... | block_m] for raw term columns."""
    x_raw = np.asarray(x_raw, dtype=np.float64)
    blocks = [np.ones((x_raw.shape[0], 1))]
    for j, term in enumerate(model.terms):
        blocks.append(_term_design_block(term, x_raw[:, j]))
    return np.hstack(blocks)


def penalty_matrix(model: GamModel) -> np.ndarray:
    """Block-diagonal penalty at the model's chosen smoothing weight."""
    p = model.n_coefficients
    pen = np.zeros((p, p))
    lam = model.lambda_shared or 0.0
    for (start, stop), term in zip(model.column_slices, model.terms):
        if term.spec.kind == "spline":
            d = difference_matrix(term.knots.shape[0] - SPLINE_DEGREE - 1,
                                  model.spec.penalty_order) @ term.z_basis
            pen[start:stop, start:stop] = lam * (d.T @ d)
    return pen


def _solve_penalized(xtx: np.ndarray, xty: np.ndarray, pen: np.ndarray):
    """Solve (XtX + P) theta = Xty, adding ridge jitter once if singular.

    Returns (theta, solve) where solve(B) applies (XtX + P)^-1 to B.
    """
    m = xtx + pen
    try:
        factor = linalg.cho_factor(m)
    except np.linalg.LinAlgError:
        try:
            factor = linalg.cho_factor(m + RIDGE_JITTER * np.eye(m.shape[0]))
        except np.linalg.LinAlgError as exc:
            raise GamFitError("rank-deficient design") from exc
    theta = linalg.cho_solve(factor, xty)
    return theta, lambda b: linalg.cho_solve(factor, b)


def choose_gcv(candidates: Sequence[tuple[float, float]]) -> float:
    """Pick the smoothing weight with the lowest score; ties take the larger.

    `candidates` holds (lambda, gcv_score) pairs; order does not matter.
    """
    if len(candidates) < 2:
        raise GamSpecError("GCV selection needs at least 2 candidates")
    best_lam: Optional[float] = None
    best_score = np.inf
    for lam, score in candidates:
        if (score < best_score
                or (score == best_score and (best_lam is None or lam > best_lam))):
            best_lam = lam
            best_score = score
    if best_lam is None:
        raise GamFitError("no usable GCV candidate")
    return best_lam


def fit(table: DesignTable, spec: ModelSpec) -> GamModel:
    """Fit the penalized additive model on a design table.

    Minimizes ||y - X theta||^2 + lambda * sum_j ||D theta_j||^2 over the
    shared spline smoothing weight chosen by GCV on `spec.lambda_grid`.
    """
    if table.columns != [t.feature for t in spec.terms]:
        raise GamSpecError("design table does not match spec terms")
    y = table.y
    n = y.shape[0]

    blocks: list[np.ndarray] = [np.ones((n, 1))]
    penalties: list[Optional[np.ndarray]] = [None]
    terms: list[FittedTerm] = []
    for j, term_spec in enumerate(spec.terms):
        mean, sd = table.scales[j]
        z = table.x[:, j]
        raw = table.x_raw[:, j]
        if term_spec.kind == "linear":
            blocks.append(z[:, None])
            penalties.append(None)
            terms.append(FittedTerm(
                spec=term_spec, coef=np.zeros(1), lam=0.0, mean=mean, sd=sd,
                x_min=float(raw.min()), x_max=float(raw.max()),
                center=0.0, z_mean=float(z.mean()),
            ))
        else:
            if np.ptp(z) == 0.0:
                raise GamFitError(
                    f"zero-width domain for spline term {term_spec.feature!r}"
                )
            knots = bspline_knots(float(z.min()), float(z.max()),
                                  spec.spline_basis_size)
            basis = bspline_design(z, knots)
            z_basis = _constraint_basis(basis)
            blocks.append(basis @ z_basis)
            d = difference_matrix(spec.spline_basis_size, spec.penalty_order) @ z_basis
            penalties.append(d.T @ d)
            terms.append(FittedTerm(
                spec=term_spec, coef=np.zeros(z_basis.shape[1]), lam=0.0,
                mean=mean, sd=sd,
                x_min=float(raw.min()), x_max=float(raw.max()),
                center=0.0, z_mean=float(z.mean()),
                knots=knots, z_basis=z_basis,
            ))

    x = np.hstack(blocks)
    p = x.shape[1]
    if n < p + 1:
        raise GamFitError(f"too few rows: {n} rows for {p} coefficients")

    slices = []
    start = 1
    for block in blocks[1:]:
        slices.append((start, start + block.shape[1]))
        start += block.shape[1]

    xtx = x.T @ x
    xty = x.T @ y

    def penalty_at(lam: float) -> np.ndarray:
        pen = np.zeros((p, p))
        for (lo, hi), block_pen in zip(slices, penalties[1:]):
            if block_pen is not None:
                pen[lo:hi, lo:hi] = lam * block_pen
        return pen

    def evaluate(lam: float):
        theta, solve = _solve_penalized(xtx, xty, penalty_at(lam))
        fitted = x @ theta
        rss = float(((y - fitted) ** 2).sum())
        edf = float(np.trace(solve(xtx)))
        return theta, rss, edf

    any_spline = any(t.kind == "spline" for t in spec.terms)
    lam_shared: Optional[float] = None
    if any_spline:
        grid = spec.lambda_grid
        if len(grid) == 1:
            lam_shared = grid[0]
        else:
            candidates = []
            for lam in grid:
                _, rss_c, edf_c = evaluate(lam)
                if edf_c >= n:
                    continue
                candidates.append((lam, n * rss_c / (n - edf_c) ** 2))
            lam_shared = choose_gcv(candidates)

    theta, rss, edf = evaluate(lam_shared if lam_shared is not None else 0.0)
    gcv_score = n * rss / (n - edf) ** 2

    covariance = None
    if not any_spline:
        # Cholesky can "succeed" on an exactly collinear design through
        # rounding alone, so gate the covariance on the actual rank.
        if np.linalg.matrix_rank(x) == p:
            sigma2 = rss / (n - p)
            try:
                factor = linalg.cho_factor(xtx)
                covariance = sigma2 * linalg.cho_solve(factor, np.eye(p))
            except np.linalg.LinAlgError:
                covariance = None

    intercept = float(theta[0])
    for (lo, hi), term, block in zip(slices, terms, blocks[1:]):
        term.coef = theta[lo:hi].copy()
        term.lam = lam_shared if (term.spec.kind == "spline" and lam_shared is not None) else 0.0
        term.center = float((block @ term.coef).mean())

    return GamModel(
        spec=spec,
        intercept=intercept,
        terms=terms,
        edf=edf,
        rss=rss,
        gcv_score=gcv_score,
        n_rows=n,
        n_dropped=table.n_dropped,
        lambda_shared=lam_shared,
        covariance=covariance,
        column_slices=slices,
    )


def fit_dataset(dataset: Dataset, spec: ModelSpec) -> tuple[GamModel, DesignTable]:
    table = design_row_table(dataset, spec)
    return fit(table, spec), table


def predict(model: GamModel, x_raw: np.ndarray) -> np.ndarray:
    """Fitted values for raw term columns (original units)."""
    return design_matrix(model, x_raw) @ model.coefficients


def term_values(model: GamModel, feature: str, x_raw_col) -> np.ndarray:
    """Uncentered shape-function values of one term at raw inputs."""
    for j, term in enumerate(model.terms):
        if term.spec.feature == feature:
            x = np.atleast_1d(np.asarray(x_raw_col, dtype=np.float64))
            return _term_design_block(term, x) @ term.coef
    raise GamSpecError(f"feature {feature!r} is not a model term")


@dataclass
class PartialDependence:
    feature: str
    grid: np.ndarray
    values: np.ndarray
    se_band: Optional[np.ndarray]  # +-2*SE half-widths, all-linear models only


def partial_dependence(model: GamModel, feature: str) -> PartialDependence:
    """Centered shape of one term on a 50-point grid over its observed range."""
    for j, term in enumerate(model.terms):
        if term.spec.feature == feature:
            grid = np.linspace(term.x_min, term.x_max, PD_GRID_SIZE)
            values = term_values(model, feature, grid) - term.center
            se_band = None
            if model.covariance is not None and term.spec.kind == "linear":
                lo, _hi = model.column_slices[j]
                var = float(model.covariance[lo, lo])
                z = (grid - term.mean) / term.sd
                se_band = 2.0 * np.abs(z - term.z_mean) * np.sqrt(var)
            return PartialDependence(feature=feature, grid=grid,
                                     values=values, se_band=se_band)
    raise GamSpecError(f"feature {feature!r} is not a model term")


def linear_pvalues(model: GamModel) -> dict[str, dict[str, float]]:
    """Two-sided t-test per term: available only for all-linear models.

    Reports slope and standard error in original units; the t statistic and
    p-value are scale-invariant.
    """
    if not model.all_linear:
        raise GamSpecError("p-values are only reported when every term is linear")
    if model.covariance is None:
        raise GamFitError("rank-deficient design")
    n = model.n_rows
    p = model.n_coefficients
    if n <= p:
        raise GamFitError(f"too few rows for p-values: {n} rows, {p} coefficients")
    df = n - p
    out = {}
    for (lo, _hi), term in zip(model.column_slices, model.terms):
        beta = float(term.coef[0])
        se = float(np.sqrt(model.covariance[lo, lo]))
        t = beta / se if se > 0 else np.inf
        p_value = 2.0 * float(stats.t.sf(abs(t), df))
        out[term.spec.feature] = {
            "beta": beta / term.sd,
            "se": se / term.sd,
            "t": t,
            "p": p_value,
        }
    return out

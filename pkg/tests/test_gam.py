import numpy as np
import pytest

from motiv import gam
from motiv.gam import (
    GamFitError,
    GamSpecError,
    ModelSpec,
    TermSpec,
    bspline_basis,
    bspline_design,
    bspline_knots,
    choose_gcv,
    design_matrix,
    design_row_table,
    fit,
    linear_pvalues,
    partial_dependence,
    penalty_matrix,
    predict,
    table_from_arrays,
    term_values,
)

from conftest import mk_county, mk_dataset, mk_tweet


def _linear_spec(*features, target="y"):
    return ModelSpec(target=target,
                     terms=tuple(TermSpec(f, "linear") for f in features))


def _spline_spec(feature="x", target="y", k=10, order=2, grid=None):
    kwargs = {}
    if grid is not None:
        kwargs["lambda_grid"] = grid
    return ModelSpec(target=target, terms=(TermSpec(feature, "spline"),),
                     spline_basis_size=k, penalty_order=order, **kwargs)


def _original_slope(model, idx=0):
    return float(model.terms[idx].coef[0]) / model.terms[idx].sd


def _original_intercept(model):
    value = model.intercept
    for term in model.terms:
        if term.spec.kind == "linear":
            value -= float(term.coef[0]) * term.mean / term.sd
    return value


# --- spec validation -----------------------------------------------------------

def test_spec_validation():
    with pytest.raises(GamSpecError, match="at least one term"):
        ModelSpec(target="y", terms=())
    with pytest.raises(GamSpecError, match="distinct"):
        _linear_spec("x", "x")
    with pytest.raises(GamSpecError, match="target"):
        _linear_spec("y")
    with pytest.raises(GamSpecError, match="penalty_order"):
        ModelSpec(target="y", terms=(TermSpec("x", "spline"),),
                  spline_basis_size=3)
    with pytest.raises(GamSpecError, match="kind"):
        TermSpec("x", "quadratic")


def test_spec_from_dict_round_trip():
    spec = gam.spec_from_dict({
        "target": "y",
        "terms": [{"feature": "x", "kind": "spline"}],
        "granularity": "per_tweet",
        "lambda_grid": [0.1, 1.0],
    })
    assert spec.granularity == "per_tweet"
    assert spec.lambda_grid == (0.1, 1.0)
    with pytest.raises(GamSpecError, match="bad model spec"):
        gam.spec_from_dict({"terms": []})


# --- design tables ---------------------------------------------------------------

def test_design_table_drop_rule_per_county():
    counties = [
        mk_county("17001", population=1000, dem=60, rep=40, cell=(0, 0)),
        mk_county("17003", population=2000, dem=None, rep=None, cell=(1, 0)),
        mk_county("17005", population=3000, dem=10, rep=90, cell=(2, 0)),
    ]
    ds = mk_dataset([mk_tweet("t1", ["Care"], fips="17001")], counties)
    spec = ModelSpec(target="population", terms=(TermSpec("leaning", "linear"),))
    table = design_row_table(ds, spec)
    assert table.x_raw.shape == (2, 1)
    assert table.n_dropped == 1
    assert table.row_ids == ["17001", "17005"]


def test_design_table_frame_indicators_per_tweet():
    ds = mk_dataset([
        mk_tweet("t1", ["Care"], retweets=1),
        mk_tweet("t2", ["Harm"], retweets=5),
    ])
    spec = ModelSpec(target="retweet_count",
                     terms=(TermSpec("care", "linear"), TermSpec("harm", "linear")),
                     granularity="per_tweet")
    table = design_row_table(ds, spec)
    assert table.x_raw[:, 0].tolist() == [1.0, 0.0]
    assert table.x_raw[:, 1].tolist() == [0.0, 1.0]


def test_design_table_zscore_population_sd():
    counties = [
        mk_county("17001", population=1, cell=(0, 0)),
        mk_county("17003", population=2, cell=(1, 0)),
        mk_county("17005", population=3, cell=(2, 0)),
    ]
    ds = mk_dataset([mk_tweet("t1", ["Care"], fips="17001")], counties)
    spec = ModelSpec(target="median_income", terms=(TermSpec("population", "linear"),))
    table = design_row_table(ds, spec)
    assert table.x[:, 0] == pytest.approx([-1.2247448, 0.0, 1.2247448], abs=1e-6)


def test_design_table_unknown_feature():
    ds = mk_dataset([mk_tweet("t1", ["Care"])])
    with pytest.raises(GamSpecError, match="unknown feature 'nope'"):
        design_row_table(ds, ModelSpec(target="nope",
                                       terms=(TermSpec("leaning", "linear"),)))


def test_design_table_degenerate_target():
    ds = mk_dataset([
        mk_tweet("t1", ["Care"], retweets=3),
        mk_tweet("t2", ["Harm"], retweets=3),
    ])
    spec = ModelSpec(target="retweet_count", terms=(TermSpec("care", "linear"),),
                     granularity="per_tweet")
    with pytest.raises(GamFitError, match="degenerate target"):
        design_row_table(ds, spec)


def test_table_from_arrays_rejects_nan():
    with pytest.raises(GamFitError, match="column 'x'"):
        table_from_arrays("y", [1.0, 2.0], {"x": [np.nan, 1.0]})


# --- B-spline basis ---------------------------------------------------------------

def _deboor_reference(x: float, knots: np.ndarray, degree: int, i: int) -> float:
    """Textbook Cox-de Boor recursion, evaluated independently."""
    if degree == 0:
        return 1.0 if knots[i] <= x < knots[i + 1] else 0.0
    value = 0.0
    den1 = knots[i + degree] - knots[i]
    if den1 > 0:
        value += (x - knots[i]) / den1 * _deboor_reference(x, knots, degree - 1, i)
    den2 = knots[i + degree + 1] - knots[i + 1]
    if den2 > 0:
        value += ((knots[i + degree + 1] - x) / den2
                  * _deboor_reference(x, knots, degree - 1, i + 1))
    return value


def test_basis_rows_sum_to_one():
    rng = np.random.default_rng(3)
    x = rng.uniform(-2.0, 5.0, 300)
    basis = bspline_basis(x, 10)
    assert np.abs(basis.sum(axis=1) - 1.0).max() < 1e-12


def test_basis_matches_de_boor_recursion_k4():
    x = np.array([0.5])
    basis = bspline_basis(np.array([0.0, 0.5, 1.0]), 4)
    knots = bspline_knots(0.0, 1.0, 4)
    expected = [_deboor_reference(0.5, knots, 3, i) for i in range(4)]
    assert basis[1] == pytest.approx(expected, abs=1e-14)
    # and for a denser basis at several points
    knots10 = bspline_knots(0.0, 1.0, 10)
    for xv in (0.05, 0.37, 0.73):
        got = bspline_design(np.array([xv]), knots10)[0]
        want = [_deboor_reference(xv, knots10, 3, i) for i in range(10)]
        assert got == pytest.approx(want, abs=1e-13)


def test_basis_matches_scipy():
    from scipy.interpolate import BSpline

    rng = np.random.default_rng(8)
    x = np.sort(rng.uniform(0.0, 1.0, 50))
    knots = bspline_knots(0.0, 1.0, 10)
    ours = bspline_design(x, knots)
    theirs = BSpline.design_matrix(x, knots, 3).toarray()
    assert ours == pytest.approx(theirs, abs=1e-12)


def test_basis_clamps_out_of_domain():
    knots = bspline_knots(0.0, 1.0, 8)
    left = bspline_design(np.array([-5.0]), knots)
    right = bspline_design(np.array([7.0]), knots)
    at_lo = bspline_design(np.array([0.0]), knots)
    at_hi = bspline_design(np.array([1.0]), knots)
    assert np.array_equal(left, at_lo)
    assert np.array_equal(right, at_hi)
    assert at_hi.sum() == pytest.approx(1.0, abs=1e-12)


def test_basis_zero_width_domain():
    with pytest.raises(GamFitError, match="zero-width"):
        bspline_basis(np.ones(10), 8)


def test_basis_size_too_small():
    with pytest.raises(GamSpecError):
        bspline_basis(np.linspace(0, 1, 10), 3)


# --- fitting ---------------------------------------------------------------------

def test_noiseless_linear_recovery():
    x = np.linspace(0.0, 10.0, 50)
    table = table_from_arrays("y", 2.0 * x + 1.0, {"x": x})
    model = fit(table, _linear_spec("x"))
    assert _original_slope(model) == pytest.approx(2.0, abs=1e-6)
    assert _original_intercept(model) == pytest.approx(1.0, abs=1e-6)


def test_lambda_zero_spline_matches_lstsq_oracle():
    rng = np.random.default_rng(12)
    x = np.sort(rng.uniform(0, 1, 120))
    y = np.sin(2 * np.pi * x) + rng.normal(0, 0.05, 120)
    table = table_from_arrays("y", y, {"x": x})
    model = fit(table, _spline_spec(grid=(0.0,)))
    # independent solver on the same constrained basis
    design = design_matrix(model, table.x_raw)
    oracle, *_ = np.linalg.lstsq(design, y, rcond=None)
    assert model.coefficients == pytest.approx(oracle, abs=1e-8)


def test_huge_lambda_drives_shape_to_line():
    x = np.linspace(0, 2 * np.pi, 200)
    y = np.sin(x)
    table = table_from_arrays("y", y, {"x": x})
    model = fit(table, _spline_spec(grid=(1e3,)))
    pd = partial_dependence(model, "x")
    slope, intercept = np.polyfit(pd.grid, pd.values, 1)
    line = slope * pd.grid + intercept
    value_range = pd.values.max() - pd.values.min()
    assert np.abs(pd.values - line).max() < 0.05 * value_range


def test_too_few_rows_rejected():
    x = np.linspace(0, 1, 8)
    table = table_from_arrays("y", x * 2 + np.arange(8) % 3, {"x": x})
    with pytest.raises(GamFitError, match="too few rows"):
        fit(table, _spline_spec(k=10, grid=(1.0,)))


# --- GCV --------------------------------------------------------------------------

def test_choose_gcv_argmin():
    grid = (0.1, 1.0, 10.0)
    assert choose_gcv(list(zip(grid, [5.0, 3.2, 4.1]))) == 1.0


def test_choose_gcv_tie_takes_larger():
    assert choose_gcv([(0.1, 2.0), (1.0, 2.0)]) == 1.0
    assert choose_gcv([(1.0, 2.0), (0.1, 2.0)]) == 1.0


def test_choose_gcv_needs_two():
    with pytest.raises(GamSpecError):
        choose_gcv([(1.0, 2.0)])


def test_gcv_score_definition():
    x = np.linspace(0, 1, 60)
    rng = np.random.default_rng(2)
    y = np.sin(6 * x) + rng.normal(0, 0.1, 60)
    model = fit(table_from_arrays("y", y, {"x": x}), _spline_spec())
    n = model.n_rows
    assert model.gcv_score == pytest.approx(
        n * model.rss / (n - model.edf) ** 2, rel=1e-12)
    assert model.edf >= 1.0
    assert model.rss >= 0.0


def test_gcv_choice_near_heldout_best():
    rng = np.random.default_rng(31)
    x = np.sort(rng.uniform(0, 2 * np.pi, 200))
    y = np.sin(x) + rng.normal(0, 0.1, 200)
    train_x, train_y = x[::2], y[::2]
    test_x, test_y = x[1::2], y[1::2]
    grid = gam.DEFAULT_LAMBDA_GRID

    def heldout_rmse(lam: float) -> float:
        table = table_from_arrays("y", train_y, {"x": train_x})
        model = fit(table, _spline_spec(grid=(lam,)))
        pred = predict(model, test_x[:, None])
        return float(np.sqrt(((test_y - pred) ** 2).mean()))

    rmses = {lam: heldout_rmse(lam) for lam in grid}
    chosen_model = fit(table_from_arrays("y", train_y, {"x": train_x}),
                       _spline_spec(grid=grid))
    chosen_rmse = rmses[chosen_model.lambda_shared]
    assert chosen_rmse <= 1.10 * min(rmses.values())


# --- partial dependence --------------------------------------------------------------

def test_pd_linear_term_affine_with_model_slope():
    rng = np.random.default_rng(21)
    x = rng.uniform(-3, 7, 80)
    y = 1.5 * x - 2.0 + rng.normal(0, 0.2, 80)
    model = fit(table_from_arrays("y", y, {"x": x}), _linear_spec("x"))
    pd = partial_dependence(model, "x")
    slope = np.diff(pd.values) / np.diff(pd.grid)
    assert slope == pytest.approx(np.full(49, _original_slope(model)), abs=1e-8)
    # centered over the training inputs
    train_mean = float(term_values(model, "x", x).mean() - model.terms[0].center)
    assert abs(train_mean) < 1e-8
    assert pd.se_band is not None and pd.se_band.shape == (50,)


def test_pd_mean_centering_spline():
    rng = np.random.default_rng(22)
    x = np.sort(rng.uniform(0, 1, 150))
    y = np.cos(3 * x) + rng.normal(0, 0.05, 150)
    model = fit(table_from_arrays("y", y, {"x": x}), _spline_spec())
    centered = term_values(model, "x", x) - model.terms[0].center
    assert abs(float(centered.mean())) < 1e-8
    pd = partial_dependence(model, "x")
    assert pd.se_band is None  # spline model: no covariance


def test_pd_recovers_quadratic():
    x = np.linspace(-1, 1, 500)
    y = x ** 2
    model = fit(table_from_arrays("y", y, {"x": x}), _spline_spec())
    pd = partial_dependence(model, "x")
    expected = pd.grid ** 2 - float((x ** 2).mean())
    assert np.abs(pd.values - expected).max() < 0.05


def test_pd_unknown_feature():
    x = np.linspace(0, 1, 30)
    model = fit(table_from_arrays("y", 2 * x, {"x": x}), _linear_spec("x"))
    with pytest.raises(GamSpecError, match="not a model term"):
        partial_dependence(model, "z")


# --- p-values ------------------------------------------------------------------------

def test_pvalue_strong_signal():
    rng = np.random.default_rng(17)
    x = rng.normal(0, 1, 100)
    y = 2.0 * x + rng.normal(0, 0.1, 100)
    model = fit(table_from_arrays("y", y, {"x": x}), _linear_spec("x"))
    stats = linear_pvalues(model)["x"]
    assert stats["p"] < 1e-3
    assert stats["beta"] == pytest.approx(2.0, abs=0.1)


def test_pvalue_null_calibration():
    rng = np.random.default_rng(1234)
    hits = 0
    n_reps = 200
    for _ in range(n_reps):
        x = rng.normal(0, 1, 100)
        y = rng.normal(0, 1, 100)
        model = fit(table_from_arrays("y", y, {"x": x}), _linear_spec("x"))
        if linear_pvalues(model)["x"]["p"] < 0.05:
            hits += 1
    assert 0.01 <= hits / n_reps <= 0.10


def test_pvalues_withheld_for_splines():
    x = np.linspace(0, 1, 60)
    rng = np.random.default_rng(5)
    model = fit(table_from_arrays("y", np.sin(x * 6) + rng.normal(0, 0.1, 60),
                                  {"x": x}), _spline_spec())
    with pytest.raises(GamSpecError, match="linear"):
        linear_pvalues(model)


def test_duplicate_predictor_hits_rank_deficiency():
    rng = np.random.default_rng(9)
    x = rng.normal(0, 1, 50)
    y = x + rng.normal(0, 0.1, 50)
    table = table_from_arrays("y", y, {"a": x, "b": x.copy()})
    model = fit(table, _linear_spec("a", "b"))  # jitter rescues the solve
    assert model.covariance is None
    with pytest.raises(GamFitError, match="rank-deficient"):
        linear_pvalues(model)


# --- model invariants ------------------------------------------------------------------

@pytest.fixture(scope="module")
def sine_model():
    rng = np.random.default_rng(77)
    x = np.sort(rng.uniform(0, 2 * np.pi, 180))
    w = rng.uniform(-2, 2, 180)
    y = np.sin(x) + 0.5 * w + rng.normal(0, 0.1, 180)
    table = table_from_arrays("y", y, {"x": x, "w": w})
    spec = ModelSpec(target="y", terms=(TermSpec("x", "spline"),
                                        TermSpec("w", "linear")))
    return fit(table, spec), table


def test_predict_reproduces_rss(sine_model):
    model, table = sine_model
    fitted = predict(model, table.x_raw)
    rss = float(((table.y - fitted) ** 2).sum())
    assert rss == pytest.approx(model.rss, rel=1e-8)


def test_objective_gradient_vanishes(sine_model):
    model, table = sine_model
    design = design_matrix(model, table.x_raw)
    pen = penalty_matrix(model)
    theta = model.coefficients
    gradient = -2.0 * design.T @ (table.y - design @ theta) + 2.0 * pen @ theta
    assert np.abs(gradient).max() < 1e-6 * np.linalg.norm(table.y)


def test_pd_sum_plus_intercept_is_fitted(sine_model):
    model, table = sine_model
    fitted = predict(model, table.x_raw)
    total = np.full_like(fitted, model.intercept)
    for j, term in enumerate(model.terms):
        total += term_values(model, term.spec.feature, table.x_raw[:, j]) - term.center
    assert total == pytest.approx(fitted, abs=1e-8)


def test_row_permutation_leaves_coefficients(sine_model):
    model, table = sine_model
    rng = np.random.default_rng(42)
    perm = rng.permutation(table.y.shape[0])
    permuted = table_from_arrays(
        "y", table.y[perm],
        {"x": table.x_raw[perm, 0], "w": table.x_raw[perm, 1]})
    model_p = fit(permuted, model.spec)
    assert model_p.coefficients == pytest.approx(model.coefficients, abs=1e-10)
    assert model_p.lambda_shared == model.lambda_shared


def test_noise_term_never_decreases_edf():
    rng = np.random.default_rng(55)
    x = np.sort(rng.uniform(0, 2 * np.pi, 150))
    noise = rng.normal(0, 1, 150)
    y = np.sin(x) + rng.normal(0, 0.1, 150)
    lam = (1.0,)  # fixed smoothing isolates the column effect
    base = fit(table_from_arrays("y", y, {"x": x}), _spline_spec(grid=lam))
    wider_table = table_from_arrays("y", y, {"x": x, "noise": noise})
    wider_spec = ModelSpec(target="y",
                           terms=(TermSpec("x", "spline"), TermSpec("noise", "spline")),
                           lambda_grid=lam)
    wider = fit(wider_table, wider_spec)
    assert wider.edf >= base.edf - 1e-9


def test_fit_deterministic():
    rng = np.random.default_rng(66)
    x = np.sort(rng.uniform(0, 1, 100))
    y = np.sin(5 * x) + rng.normal(0, 0.1, 100)
    t1 = table_from_arrays("y", y, {"x": x})
    t2 = table_from_arrays("y", y.copy(), {"x": x.copy()})
    m1 = fit(t1, _spline_spec())
    m2 = fit(t2, _spline_spec())
    assert (m1.coefficients == m2.coefficients).all()
    assert m1.gcv_score == m2.gcv_score

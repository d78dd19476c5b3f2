"""Scenario configuration: strict JSON parsing and the inverse echo form.

Every scenario the command line can run is described by one JSON object.
Parsing is strict: unknown keys are rejected, every error carries the
dotted path of the offending field (for example ``bounds[0].y``), and all
numbers must be finite.  ``scenario_to_config`` is the inverse: feeding
its output back through the parser reproduces an equal scenario object,
which is what the command line echoes so a run is reproducible from its
own output.
"""
from __future__ import annotations

import json
import math
from typing import Optional, Union

from .canonical import (
    DEFAULT_LAMBDA_GRID,
    AbsNormalU,
    ConstantU,
    GapVariancePair,
    GaussianScalePair,
    PairSampler,
    ScaledControlPair,
    USampler,
)
from .distributions import (
    Exponential,
    Normal,
    Pareto,
    ProductDistribution,
    ScaledBernoulli,
    Uniform,
)
from .estimators import has_exact_semi_empirical
from .harness import (
    BoundSpec,
    CanonicalScenario,
    ClaimScenario,
    CoverageScenario,
    EstimateScenario,
    EstimatorSpec,
    PacBayesScenario,
    TailsScenario,
)
from .pacbayes import FiniteHypothesisClass
from .stats import (
    PRODUCT,
    SQUARED_DIFFERENCE,
    Constant,
    Max,
    Mean,
    PairwiseUStat,
    SoftMax,
    Statistic,
    UnboundedStatisticError,
    WeightedSum,
    _check_arity,
    bounded_difference_constants,
)

__all__ = [
    "ConfigError",
    "Scenario",
    "parse_config",
    "parse_config_text",
    "load_config",
    "scenario_to_config",
]

Scenario = Union[
    EstimateScenario,
    CoverageScenario,
    CanonicalScenario,
    TailsScenario,
    ClaimScenario,
    PacBayesScenario,
]

_SCENARIO_KINDS = ("estimate", "coverage", "canonical", "tails", "claim", "pacbayes")
_ORACLES = ("closed_form", "nested_mc")
_ROOT_TWO = math.sqrt(2.0)


class ConfigError(ValueError):
    """A configuration problem, located by the dotted path of the field."""

    def __init__(self, path: str, message: str):
        self.path = path or "<root>"
        self.message = message
        super().__init__(f"{self.path}: {message}")


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _idx(path: str, i: int) -> str:
    return f"{path}[{i}]"


def _obj(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(path, f"expected an object, got {type(value).__name__}")
    return value


def _list(value, path: str) -> list:
    if not isinstance(value, list):
        raise ConfigError(path, f"expected an array, got {type(value).__name__}")
    return value


def _check_keys(obj: dict, path: str, allowed) -> None:
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise ConfigError(path, "unknown key(s): " + ", ".join(repr(k) for k in unknown))


def _req(obj: dict, key: str, path: str):
    if key not in obj:
        raise ConfigError(_join(path, key), "is required")
    return obj[key]


def _float(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {type(value).__name__}")
    out = float(value)
    if not math.isfinite(out):
        raise ConfigError(path, "must be finite")
    return out


def _int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {type(value).__name__}")
    return value


def _bool(value, path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(path, f"expected true or false, got {type(value).__name__}")
    return value


def _str(value, path: str) -> str:
    if not isinstance(value, str):
        raise ConfigError(path, f"expected a string, got {type(value).__name__}")
    return value


def _enum(value, path: str, choices) -> str:
    out = _str(value, path)
    if out not in choices:
        raise ConfigError(path, f"must be one of {', '.join(choices)}; got {out!r}")
    return out


def _float_grid(value, path: str) -> tuple[float, ...]:
    items = _list(value, path)
    if not items:
        raise ConfigError(path, "must not be empty")
    return tuple(_float(v, _idx(path, i)) for i, v in enumerate(items))


def _positive_int(value, path: str, minimum: int = 1) -> int:
    out = _int(value, path)
    if out < minimum:
        raise ConfigError(path, f"must be at least {minimum}, got {out}")
    return out


def _build(path: str, ctor, **kwargs):
    try:
        return ctor(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(path, str(exc)) from exc


# ---------------------------------------------------------------------------
# distributions and statistics
# ---------------------------------------------------------------------------

_DIST_SCHEMAS = {
    "normal": (Normal, ("mu", "sigma")),
    "uniform": (Uniform, ("lo", "hi")),
    "exponential": (Exponential, ("rate",)),
    "scaled_bernoulli": (ScaledBernoulli, ("p", "scale")),
    "pareto": (Pareto, ("shape", "scale")),
}


def _parse_coordinate(value, path: str):
    rec = _obj(value, path)
    kind = _enum(_req(rec, "kind", path), _join(path, "kind"), tuple(_DIST_SCHEMAS))
    ctor, fields = _DIST_SCHEMAS[kind]
    _check_keys(rec, path, ("kind", "repeat") + fields)
    kwargs = {f: _float(_req(rec, f, path), _join(path, f)) for f in fields}
    repeat = _positive_int(rec.get("repeat", 1), _join(path, "repeat"))
    return _build(path, ctor, **kwargs), repeat


def _parse_distribution(value, path: str) -> ProductDistribution:
    items = _list(value, path)
    if not items:
        raise ConfigError(path, "must list at least one coordinate")
    coords = []
    for i, item in enumerate(items):
        coord, repeat = _parse_coordinate(item, _idx(path, i))
        coords.extend([coord] * repeat)
    return _build(path, ProductDistribution, coordinates=tuple(coords))


def _coordinate_record(coord) -> dict:
    _, fields = _DIST_SCHEMAS[coord.kind]
    rec = {"kind": coord.kind}
    rec.update({f: getattr(coord, f) for f in fields})
    return rec


def _distribution_config(pd: ProductDistribution) -> list:
    # Run-length encode consecutive equal coordinates to keep echoes short.
    out = []
    for coord in pd.coordinates:
        if out and out[-1][0] == coord:
            out[-1][1] += 1
        else:
            out.append([coord, 1])
    records = []
    for coord, repeat in out:
        rec = _coordinate_record(coord)
        if repeat > 1:
            rec["repeat"] = repeat
        records.append(rec)
    return records


_STAT_KINDS = ("weighted_sum", "mean", "max", "softmax", "pairwise_u", "constant")


def _parse_statistic(value, path: str) -> Statistic:
    rec = _obj(value, path)
    kind = _enum(_req(rec, "kind", path), _join(path, "kind"), _STAT_KINDS)
    if kind == "weighted_sum":
        _check_keys(rec, path, ("kind", "weights"))
        weights = _float_grid(_req(rec, "weights", path), _join(path, "weights"))
        return _build(path, WeightedSum, weights=weights)
    if kind == "mean":
        _check_keys(rec, path, ("kind",))
        return Mean()
    if kind == "max":
        _check_keys(rec, path, ("kind",))
        return Max()
    if kind == "softmax":
        _check_keys(rec, path, ("kind", "temperature"))
        temp = _float(_req(rec, "temperature", path), _join(path, "temperature"))
        return _build(path, SoftMax, temperature=temp)
    if kind == "pairwise_u":
        _check_keys(rec, path, ("kind", "kernel"))
        kernel = _enum(
            _req(rec, "kernel", path), _join(path, "kernel"), (SQUARED_DIFFERENCE, PRODUCT)
        )
        return _build(path, PairwiseUStat, kernel=kernel)
    _check_keys(rec, path, ("kind", "value"))
    return _build(path, Constant, value=_float(_req(rec, "value", path), _join(path, "value")))


def _statistic_config(stat: Statistic) -> dict:
    if isinstance(stat, WeightedSum):
        return {"kind": "weighted_sum", "weights": list(stat.weights)}
    if isinstance(stat, Mean):
        return {"kind": "mean"}
    if isinstance(stat, Max):
        return {"kind": "max"}
    if isinstance(stat, SoftMax):
        return {"kind": "softmax", "temperature": stat.temperature}
    if isinstance(stat, PairwiseUStat):
        return {"kind": "pairwise_u", "kernel": stat.kernel}
    return {"kind": "constant", "value": stat.value}


def _check_statistic_arity(stat: Statistic, pd: ProductDistribution, path: str) -> None:
    try:
        _check_arity(stat, pd.n)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _parse_oracle(rec: dict, path: str, stat: Statistic) -> str:
    oracle = _enum(_req(rec, "oracle", path), _join(path, "oracle"), _ORACLES)
    if oracle == "closed_form" and not has_exact_semi_empirical(stat):
        raise ConfigError(
            _join(path, "oracle"),
            f"the closed_form oracle requires a statistic with a closed-form "
            f"variance decomposition; {stat.kind!r} has none",
        )
    return oracle


def _parse_estimator(rec: dict, path: str) -> EstimatorSpec:
    if "estimator" not in rec:
        return EstimatorSpec()
    sub = _obj(rec["estimator"], _join(path, "estimator"))
    spath = _join(path, "estimator")
    _check_keys(sub, spath, ("inner_replicates", "reuse_suffix"))
    inner = _positive_int(sub.get("inner_replicates", 2000), _join(spath, "inner_replicates"), 2)
    reuse = _bool(sub.get("reuse_suffix", False), _join(spath, "reuse_suffix"))
    return EstimatorSpec(inner, reuse)


def _estimator_config(est: EstimatorSpec) -> dict:
    return {"inner_replicates": est.inner_replicates, "reuse_suffix": est.reuse_suffix}


def _parse_seed(rec: dict, path: str) -> int:
    seed = rec.get("seed", 0)
    seed = _int(seed, _join(path, "seed"))
    if not 0 <= seed < 2**64:
        raise ConfigError(_join(path, "seed"), "must be an unsigned 64-bit integer")
    return seed


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------


def _parse_bounds(value, path: str, allow_mcdiarmid: bool) -> tuple[BoundSpec, ...]:
    items = _list(value, path)
    if not items:
        raise ConfigError(path, "must list at least one bound")
    out = []
    for i, item in enumerate(items):
        bpath = _idx(path, i)
        rec = _obj(item, bpath)
        choices = ("scale_free", "logarithmic") + (("mcdiarmid",) if allow_mcdiarmid else ())
        bound = _enum(_req(rec, "bound", bpath), _join(bpath, "bound"), choices)
        if bound == "scale_free":
            _check_keys(rec, bpath, ("bound", "x"))
            xs = _float_grid(_req(rec, "x", bpath), _join(bpath, "x"))
            for j, x in enumerate(xs):
                if x <= 0:
                    raise ConfigError(_idx(_join(bpath, "x"), j), "must be positive")
            out.append(BoundSpec("scale_free", xs=xs))
        elif bound == "logarithmic":
            _check_keys(rec, bpath, ("bound", "x", "y"))
            xs = _float_grid(_req(rec, "x", bpath), _join(bpath, "x"))
            for j, x in enumerate(xs):
                if x < 1.0:
                    raise ConfigError(_idx(_join(bpath, "x"), j), "must be at least 1")
            ys = _float_grid(_req(rec, "y", bpath), _join(bpath, "y"))
            for j, y in enumerate(ys):
                if y <= 0:
                    raise ConfigError(_idx(_join(bpath, "y"), j), "must be positive")
            out.append(BoundSpec("logarithmic", xs=xs, ys=ys))
        else:
            _check_keys(rec, bpath, ("bound", "delta"))
            deltas = _float_grid(_req(rec, "delta", bpath), _join(bpath, "delta"))
            for j, d in enumerate(deltas):
                if not 0 < d < 1:
                    raise ConfigError(
                        _idx(_join(bpath, "delta"), j), "must be strictly between 0 and 1"
                    )
            out.append(BoundSpec("mcdiarmid", deltas=deltas))
    return tuple(out)


def _bounds_config(bounds: tuple[BoundSpec, ...]) -> list:
    out = []
    for b in bounds:
        if b.bound_id == "scale_free":
            out.append({"bound": "scale_free", "x": list(b.xs)})
        elif b.bound_id == "logarithmic":
            out.append({"bound": "logarithmic", "x": list(b.xs), "y": list(b.ys)})
        else:
            out.append({"bound": "mcdiarmid", "delta": list(b.deltas)})
    return out


# ---------------------------------------------------------------------------
# canonical pair samplers and scalar samplers
# ---------------------------------------------------------------------------


def _parse_pair(value, path: str) -> PairSampler:
    rec = _obj(value, path)
    kind = _enum(
        _req(rec, "kind", path),
        _join(path, "kind"),
        ("gaussian_scale", "gap_variance", "scaled_control"),
    )
    if kind == "gaussian_scale":
        _check_keys(rec, path, ("kind", "sigma"))
        return _build(path, GaussianScalePair, sigma=_float(_req(rec, "sigma", path), _join(path, "sigma")))
    if kind == "gap_variance":
        _check_keys(
            rec,
            path,
            ("kind", "distribution", "statistic", "oracle", "inner_replicates",
             "reuse_suffix", "mean_replicates"),
        )
        pd = _parse_distribution(_req(rec, "distribution", path), _join(path, "distribution"))
        stat = _parse_statistic(_req(rec, "statistic", path), _join(path, "statistic"))
        _check_statistic_arity(stat, pd, _join(path, "statistic"))
        if "oracle" in rec:
            oracle = _parse_oracle(rec, path, stat)
        else:
            oracle = "nested_mc"
        return _build(
            path,
            GapVariancePair,
            statistic=stat,
            pd=pd,
            oracle=oracle,
            inner_replicates=_positive_int(
                rec.get("inner_replicates", 2000), _join(path, "inner_replicates"), 2
            ),
            reuse_suffix=_bool(rec.get("reuse_suffix", False), _join(path, "reuse_suffix")),
            mean_replicates=_positive_int(
                rec.get("mean_replicates", 1_000_000), _join(path, "mean_replicates"), 2
            ),
        )
    _check_keys(rec, path, ("kind", "base", "b_multiplier"))
    base = _parse_pair(_req(rec, "base", path), _join(path, "base"))
    mult = _float(_req(rec, "b_multiplier", path), _join(path, "b_multiplier"))
    return _build(path, ScaledControlPair, base=base, b_multiplier=mult)


def _pair_config(pair: PairSampler) -> dict:
    if isinstance(pair, GaussianScalePair):
        return {"kind": "gaussian_scale", "sigma": pair.sigma}
    if isinstance(pair, GapVariancePair):
        return {
            "kind": "gap_variance",
            "distribution": _distribution_config(pair.pd),
            "statistic": _statistic_config(pair.statistic),
            "oracle": pair.oracle,
            "inner_replicates": pair.inner_replicates,
            "reuse_suffix": pair.reuse_suffix,
            "mean_replicates": pair.mean_replicates,
        }
    return {
        "kind": "scaled_control",
        "base": _pair_config(pair.base),
        "b_multiplier": pair.b_multiplier,
    }


def _parse_u(value, path: str) -> USampler:
    rec = _obj(value, path)
    kind = _enum(_req(rec, "kind", path), _join(path, "kind"), ("abs_normal", "constant"))
    if kind == "abs_normal":
        _check_keys(rec, path, ("kind", "sigma"))
        return _build(path, AbsNormalU, sigma=_float(_req(rec, "sigma", path), _join(path, "sigma")))
    _check_keys(rec, path, ("kind", "value"))
    return _build(path, ConstantU, value=_float(_req(rec, "value", path), _join(path, "value")))


def _u_config(u: USampler) -> dict:
    if isinstance(u, AbsNormalU):
        return {"kind": "abs_normal", "sigma": u.sigma}
    return {"kind": "constant", "value": u.value}


# ---------------------------------------------------------------------------
# scenario parsers
# ---------------------------------------------------------------------------


def _parse_estimate(rec: dict) -> EstimateScenario:
    _check_keys(
        rec, "", ("scenario", "seed", "distribution", "statistic", "oracle", "estimator", "sample")
    )
    pd = _parse_distribution(_req(rec, "distribution", ""), "distribution")
    stat = _parse_statistic(_req(rec, "statistic", ""), "statistic")
    _check_statistic_arity(stat, pd, "statistic")
    oracle = _parse_oracle(rec, "", stat)
    sample = None
    if "sample" in rec:
        values = _float_grid(rec["sample"], "sample")
        if len(values) != pd.n:
            raise ConfigError(
                "sample", f"expected {pd.n} values to match the distribution, got {len(values)}"
            )
        sample = values
    return EstimateScenario(
        pd=pd,
        statistic=stat,
        oracle=oracle,
        estimator=_parse_estimator(rec, ""),
        master_seed=_parse_seed(rec, ""),
        sample=sample,
    )


def _parse_coverage(rec: dict) -> CoverageScenario:
    _check_keys(
        rec,
        "",
        ("scenario", "seed", "distribution", "statistic", "oracle", "estimator",
         "bounds", "trials", "mean_replicates", "ev_outer"),
    )
    pd = _parse_distribution(_req(rec, "distribution", ""), "distribution")
    stat = _parse_statistic(_req(rec, "statistic", ""), "statistic")
    _check_statistic_arity(stat, pd, "statistic")
    oracle = _parse_oracle(rec, "", stat)
    bounds = _parse_bounds(_req(rec, "bounds", ""), "bounds", allow_mcdiarmid=True)
    for i, b in enumerate(bounds):
        if b.bound_id == "mcdiarmid":
            try:
                bounded_difference_constants(stat, pd)
            except UnboundedStatisticError as exc:
                raise ConfigError(_idx("bounds", i), str(exc)) from exc
            break
    return CoverageScenario(
        pd=pd,
        statistic=stat,
        oracle=oracle,
        estimator=_parse_estimator(rec, ""),
        bounds=bounds,
        trials=_positive_int(rec.get("trials", 10_000), "trials"),
        master_seed=_parse_seed(rec, ""),
        mean_replicates=_positive_int(rec.get("mean_replicates", 1_000_000), "mean_replicates", 2),
        ev_outer=_positive_int(rec.get("ev_outer", 2000), "ev_outer", 2),
    )


def _parse_canonical(rec: dict) -> CanonicalScenario:
    _check_keys(rec, "", ("scenario", "seed", "pair", "lambda_grid", "samples", "margin"))
    grid = DEFAULT_LAMBDA_GRID
    if "lambda_grid" in rec:
        grid = _float_grid(rec["lambda_grid"], "lambda_grid")
    margin = _float(rec.get("margin", 3.0), "margin")
    if margin <= 0:
        raise ConfigError("margin", "must be positive")
    return CanonicalScenario(
        pair=_parse_pair(_req(rec, "pair", ""), "pair"),
        lambda_grid=grid,
        n_samples=_positive_int(rec.get("samples", 100_000), "samples", 100),
        master_seed=_parse_seed(rec, ""),
        margin=margin,
    )


def _parse_tails(rec: dict) -> TailsScenario:
    _check_keys(rec, "", ("scenario", "seed", "pair", "samples", "margin", "part_i", "part_ii"))
    if "part_i" not in rec and "part_ii" not in rec:
        raise ConfigError("", "at least one of 'part_i' and 'part_ii' is required")
    t_i: tuple[float, ...] = ()
    eb = None
    eb_replicates = 100_000
    if "part_i" in rec:
        sub = _obj(rec["part_i"], "part_i")
        _check_keys(sub, "part_i", ("t", "eb", "eb_replicates"))
        t_i = _float_grid(_req(sub, "t", "part_i"), "part_i.t")
        for j, t in enumerate(t_i):
            if t <= 0:
                raise ConfigError(_idx("part_i.t", j), "must be positive")
        if "eb" in sub:
            eb = _float(sub["eb"], "part_i.eb")
            if eb < 0:
                raise ConfigError("part_i.eb", "must be nonnegative")
        eb_replicates = _positive_int(sub.get("eb_replicates", 100_000), "part_i.eb_replicates", 2)
    t_ii: tuple[float, ...] = ()
    y = None
    if "part_ii" in rec:
        sub = _obj(rec["part_ii"], "part_ii")
        _check_keys(sub, "part_ii", ("t", "y"))
        t_ii = _float_grid(_req(sub, "t", "part_ii"), "part_ii.t")
        for j, t in enumerate(t_ii):
            if t < _ROOT_TWO - 1e-12:
                raise ConfigError(_idx("part_ii.t", j), "must be at least sqrt(2)")
        y = _float(_req(sub, "y", "part_ii"), "part_ii.y")
        if y <= 0:
            raise ConfigError("part_ii.y", "must be positive")
    margin = _float(rec.get("margin", 3.0), "margin")
    if margin <= 0:
        raise ConfigError("margin", "must be positive")
    return TailsScenario(
        pair=_parse_pair(_req(rec, "pair", ""), "pair"),
        n_samples=_positive_int(rec.get("samples", 100_000), "samples", 100),
        master_seed=_parse_seed(rec, ""),
        t_grid_i=t_i,
        eb=eb,
        eb_replicates=eb_replicates,
        t_grid_ii=t_ii,
        y=y,
        margin=margin,
    )


def _parse_claim(rec: dict) -> ClaimScenario:
    _check_keys(rec, "", ("scenario", "seed", "u", "alpha", "x", "samples", "margin"))
    alpha = _float(rec.get("alpha", 0.25), "alpha")
    if alpha <= 0:
        raise ConfigError("alpha", "must be positive")
    x_grid = (0.0, 0.5, 1.0, 2.0)
    if "x" in rec:
        x_grid = _float_grid(rec["x"], "x")
        for j, x in enumerate(x_grid):
            if x < 0:
                raise ConfigError(_idx("x", j), "must be nonnegative")
    margin = _float(rec.get("margin", 3.0), "margin")
    if margin <= 0:
        raise ConfigError("margin", "must be positive")
    return ClaimScenario(
        u=_parse_u(_req(rec, "u", ""), "u"),
        alpha=alpha,
        x_grid=x_grid,
        n_samples=_positive_int(rec.get("samples", 100_000), "samples", 100),
        master_seed=_parse_seed(rec, ""),
        margin=margin,
    )


def _parse_pacbayes(rec: dict) -> PacBayesScenario:
    common = ("scenario", "seed", "mode", "distribution", "hypotheses", "prior",
              "beta", "estimator", "ev_trials")
    mode = _enum(_req(rec, "mode", ""), "mode", ("coverage", "moments"))
    if mode == "coverage":
        _check_keys(rec, "", common + ("trials", "bounds"))
    else:
        _check_keys(rec, "", common + ("x", "y", "moment_trials"))
    pd = _parse_distribution(_req(rec, "distribution", ""), "distribution")
    hyp_items = _list(_req(rec, "hypotheses", ""), "hypotheses")
    if not hyp_items:
        raise ConfigError("hypotheses", "must list at least one statistic")
    hypotheses = []
    for i, item in enumerate(hyp_items):
        stat = _parse_statistic(item, _idx("hypotheses", i))
        _check_statistic_arity(stat, pd, _idx("hypotheses", i))
        hypotheses.append(stat)
    prior_value = rec.get("prior", "uniform")
    if isinstance(prior_value, str):
        if prior_value != "uniform":
            raise ConfigError("prior", f"must be 'uniform' or an array of weights, got {prior_value!r}")
        cls = _build(
            "hypotheses", FiniteHypothesisClass.with_uniform_prior, hypotheses=tuple(hypotheses)
        )
    else:
        prior = _float_grid(prior_value, "prior")
        if len(prior) != len(hypotheses):
            raise ConfigError(
                "prior", f"expected {len(hypotheses)} weights to match 'hypotheses', got {len(prior)}"
            )
        cls = _build("prior", FiniteHypothesisClass, hypotheses=tuple(hypotheses), prior=prior)
    beta = _float(_req(rec, "beta", ""), "beta")
    if beta < 0:
        raise ConfigError("beta", "must be nonnegative")
    kwargs = dict(
        pd=pd,
        hypothesis_class=cls,
        beta=beta,
        mode=mode,
        master_seed=_parse_seed(rec, ""),
        estimator=_parse_estimator(rec, ""),
        ev_trials=_positive_int(rec.get("ev_trials", 10_000), "ev_trials", 2),
    )
    if mode == "coverage":
        kwargs["trials"] = _positive_int(rec.get("trials", 10_000), "trials")
        kwargs["bounds"] = _parse_bounds(_req(rec, "bounds", ""), "bounds", allow_mcdiarmid=False)
    else:
        x_grid = (0.0, 0.5, 1.0)
        if "x" in rec:
            x_grid = _float_grid(rec["x"], "x")
            for j, x in enumerate(x_grid):
                if x < 0:
                    raise ConfigError(_idx("x", j), "must be nonnegative")
        y_grid = (0.1, 1.0)
        if "y" in rec:
            y_grid = _float_grid(rec["y"], "y")
            for j, y in enumerate(y_grid):
                if y <= 0:
                    raise ConfigError(_idx("y", j), "must be positive")
        kwargs["x_grid"] = x_grid
        kwargs["y_grid"] = y_grid
        kwargs["n_trials_moments"] = _positive_int(rec.get("moment_trials", 100_000), "moment_trials", 2)
    return PacBayesScenario(**kwargs)


_PARSERS = {
    "estimate": _parse_estimate,
    "coverage": _parse_coverage,
    "canonical": _parse_canonical,
    "tails": _parse_tails,
    "claim": _parse_claim,
    "pacbayes": _parse_pacbayes,
}


def parse_config(doc) -> Scenario:
    """Parse a decoded JSON document into a scenario object."""
    rec = _obj(doc, "")
    kind = _enum(_req(rec, "scenario", ""), "scenario", _SCENARIO_KINDS)
    return _PARSERS[kind](rec)


def parse_config_text(text: str) -> Scenario:
    """Parse JSON text into a scenario object."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            "", f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return parse_config(doc)


def load_config(path) -> Scenario:
    """Read and parse a scenario configuration file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("", f"cannot read config file {path!r}: {exc.strerror or exc}") from exc
    return parse_config_text(text)


# ---------------------------------------------------------------------------
# echo form
# ---------------------------------------------------------------------------


def scenario_to_config(scn: Scenario) -> dict:
    """The canonical configuration object for a scenario.

    Round trip: ``parse_config(scenario_to_config(s))`` equals ``s``.
    """
    if isinstance(scn, EstimateScenario):
        out = {
            "scenario": "estimate",
            "seed": scn.master_seed,
            "distribution": _distribution_config(scn.pd),
            "statistic": _statistic_config(scn.statistic),
            "oracle": scn.oracle,
            "estimator": _estimator_config(scn.estimator),
        }
        if scn.sample is not None:
            out["sample"] = list(scn.sample)
        return out
    if isinstance(scn, CoverageScenario):
        return {
            "scenario": "coverage",
            "seed": scn.master_seed,
            "distribution": _distribution_config(scn.pd),
            "statistic": _statistic_config(scn.statistic),
            "oracle": scn.oracle,
            "estimator": _estimator_config(scn.estimator),
            "bounds": _bounds_config(scn.bounds),
            "trials": scn.trials,
            "mean_replicates": scn.mean_replicates,
            "ev_outer": scn.ev_outer,
        }
    if isinstance(scn, CanonicalScenario):
        return {
            "scenario": "canonical",
            "seed": scn.master_seed,
            "pair": _pair_config(scn.pair),
            "lambda_grid": list(scn.lambda_grid),
            "samples": scn.n_samples,
            "margin": scn.margin,
        }
    if isinstance(scn, TailsScenario):
        out = {
            "scenario": "tails",
            "seed": scn.master_seed,
            "pair": _pair_config(scn.pair),
            "samples": scn.n_samples,
            "margin": scn.margin,
        }
        if scn.t_grid_i:
            part = {"t": list(scn.t_grid_i), "eb_replicates": scn.eb_replicates}
            if scn.eb is not None:
                part["eb"] = scn.eb
            out["part_i"] = part
        if scn.t_grid_ii:
            out["part_ii"] = {"t": list(scn.t_grid_ii), "y": scn.y}
        return out
    if isinstance(scn, ClaimScenario):
        return {
            "scenario": "claim",
            "seed": scn.master_seed,
            "u": _u_config(scn.u),
            "alpha": scn.alpha,
            "x": list(scn.x_grid),
            "samples": scn.n_samples,
            "margin": scn.margin,
        }
    if isinstance(scn, PacBayesScenario):
        out = {
            "scenario": "pacbayes",
            "seed": scn.master_seed,
            "mode": scn.mode,
            "distribution": _distribution_config(scn.pd),
            "hypotheses": [_statistic_config(h) for h in scn.hypothesis_class.hypotheses],
            "prior": list(scn.hypothesis_class.prior),
            "beta": scn.beta,
            "estimator": _estimator_config(scn.estimator),
            "ev_trials": scn.ev_trials,
        }
        if scn.mode == "coverage":
            out["trials"] = scn.trials
            out["bounds"] = _bounds_config(scn.bounds)
        else:
            out["x"] = list(scn.x_grid)
            out["y"] = list(scn.y_grid)
            out["moment_trials"] = scn.n_trials_moments
        return out
    raise TypeError(f"not a scenario: {type(scn).__name__}")

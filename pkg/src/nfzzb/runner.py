"""Scenario configuration, SNR sweeps, threshold detection and CSV/JSON output.

A scenario is a single JSON document (angles in degrees at this boundary
only) describing the array, the prior box, the SNR sweep and the engines
to run.  `run_sweep` evaluates every requested engine at every sweep
point, reusing each bound engine's cached geometry tables across SNR, and
returns one BoundCurve per estimated parameter.  `emit` writes the curves
as figure-ready CSV (comma-separated, `# units:` comment, LF, UTF-8) or
as JSON mirroring the BoundCurve structure; all numbers carry 12
significant digits and the output is byte-identical for identical
(config, seed).
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import asymptotics
from .crb import PriorBox, crb_global
from .mle import MonteCarloConfig, grid_floor, monte_carlo_mse
from .model import ArrayConfig, SnrSpec
from .zzb import (
    DistanceKnownAoaZzbEngine,
    JointZzbEngine,
    QuadratureSpec,
)

KNOWN_ENGINES = (
    "zzb_known_aoa",
    "zzb_joint_distance",
    "zzb_joint_aoa",
    "crb_global",
    "asymptotes",
    "mle",
)

SERIES_ORDER = ("zzb", "crb_global", "asymptote", "mle_mse", "mle_stderr")


class ConfigError(ValueError):
    """Invalid scenario document (schema or invariant violation)."""


@dataclass(frozen=True)
class ScenarioConfig:
    array: ArrayConfig
    prior: PriorBox
    snr_db: tuple
    engines: tuple
    quad: QuadratureSpec = QuadratureSpec()
    mc: MonteCarloConfig = MonteCarloConfig()
    out_path: str | None = None
    out_format: str = "csv"
    config_hash: str = ""

    def __post_init__(self):
        if len(self.snr_db) == 0:
            raise ConfigError("the SNR sweep is empty")
        for name in self.engines:
            if name not in KNOWN_ENGINES:
                raise ConfigError(
                    f"unknown engine {name!r}; choose from {', '.join(KNOWN_ENGINES)}"
                )
        if "zzb_known_aoa" in self.engines and "zzb_joint_distance" in self.engines:
            raise ConfigError(
                "engines zzb_known_aoa and zzb_joint_distance both produce the "
                "distance ZZB series; pick one"
            )
        if "zzb_known_aoa" in self.engines and not self.prior.angle_degenerate:
            raise ConfigError(
                "zzb_known_aoa needs theta_min_deg == theta_max_deg (known angle); "
                "use zzb_joint_distance for an angle span"
            )
        if "zzb_joint_aoa" in self.engines and self.prior.angle_degenerate:
            raise ConfigError("zzb_joint_aoa needs a nondegenerate angle span")
        if self.out_format not in ("csv", "json"):
            raise ConfigError(f"unknown output format {self.out_format!r}")


@dataclass
class BoundCurve:
    """Per-SNR series for one estimated parameter.

    All series are aligned with snr_db; missing points are None.  The
    metadata records the config hash, per-point convergence flags and
    any per-point engine failures.
    """

    parameter: str
    units: str
    snr_db: list
    series: dict
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.snr_db)
        for name, vals in self.series.items():
            if len(vals) != n:
                raise ValueError(f"series {name!r} has {len(vals)} points, expected {n}")

    @property
    def all_converged(self):
        return self.metadata.get("all_converged", True)


def _require(doc, key, where="config"):
    if key not in doc:
        raise ConfigError(f"{where} is missing required key {key!r}")
    return doc[key]


def _build_array(doc):
    arr = _require(doc, "array")
    k = _require(arr, "k", "array")
    fc = _require(arr, "fc_hz", "array")
    has_spacing = "spacing_m" in arr
    has_aperture = "aperture_m" in arr
    if has_spacing == has_aperture:
        raise ConfigError("array needs exactly one of spacing_m or aperture_m")
    try:
        if has_spacing:
            return ArrayConfig(k, arr["spacing_m"], fc)
        return ArrayConfig.from_aperture(k, arr["aperture_m"], fc)
    except ValueError as exc:
        raise ConfigError(f"array: {exc}") from exc


def _build_prior(doc):
    prior = _require(doc, "prior")
    try:
        return PriorBox(
            _require(prior, "d_min_m", "prior"),
            _require(prior, "d_max_m", "prior"),
            math.radians(prior.get("theta_min_deg", 0.0)),
            math.radians(prior.get("theta_max_deg", 0.0)),
        )
    except ValueError as exc:
        raise ConfigError(f"prior: {exc}") from exc


def _build_sweep(doc):
    sweep = _require(doc, "sweep")
    start = _require(sweep, "start_db", "sweep")
    stop = _require(sweep, "stop_db", "sweep")
    step = sweep.get("step_db", 1.0)
    if start > stop:
        raise ConfigError(f"sweep start ({start} dB) must not exceed stop ({stop} dB)")
    if not step > 0:
        raise ConfigError(f"sweep step_db must be positive, got {step!r}")
    n = int(round((stop - start) / step))
    values = [round(start + i * step, 12) for i in range(n + 1)]
    if values[-1] < stop - 1e-9:
        values.append(round(stop, 12))
    return tuple(values)


def load_config(source) -> ScenarioConfig:
    """Parse and validate a scenario from a JSON file path or a JSON string.

    Angles are degrees in the document and radians everywhere past this
    point; the array may be given via spacing_m or aperture_m (the other
    is derived).  Raises ConfigError with a field-level message.
    """
    text = source
    if isinstance(source, (str, os.PathLike)) and os.path.exists(source):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("top-level document must be a JSON object")

    array = _build_array(doc)
    prior = _build_prior(doc)
    snr_db = _build_sweep(doc)
    engines = tuple(doc.get("engines", ["zzb_known_aoa", "crb_global"]))
    try:
        quad = QuadratureSpec(**doc.get("quadrature", {}))
        mc = MonteCarloConfig(**doc.get("monte_carlo", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"quadrature/monte_carlo: {exc}") from exc
    out = doc.get("output", {})
    digest = hashlib.sha256(
        json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()
    return ScenarioConfig(
        array=array,
        prior=prior,
        snr_db=snr_db,
        engines=engines,
        quad=quad,
        mc=mc,
        out_path=out.get("path"),
        out_format=out.get("format", "csv"),
        config_hash=digest,
    )


def _distance_zzb_engine(config):
    if "zzb_known_aoa" in config.engines:
        return DistanceKnownAoaZzbEngine(config.array, config.prior, config.quad)
    if "zzb_joint_distance" in config.engines:
        if config.prior.angle_degenerate:
            return DistanceKnownAoaZzbEngine(config.array, config.prior, config.quad)
        return JointZzbEngine(config.array, config.prior, config.quad, "distance")
    return None


def _sweep_parameter(config, parameter, zzb_engine, failures, flags):
    """Evaluate every requested engine for one parameter at every SNR."""
    n = len(config.snr_db)
    series = {}
    want = config.engines
    if zzb_engine is not None:
        series["zzb"] = [None] * n
    if "crb_global" in want:
        series["crb_global"] = [None] * n
    do_asym = (
        "asymptotes" in want
        and parameter == "distance"
        and config.prior.angle_degenerate
        and config.prior.theta_min == 0.0
    )
    if do_asym:
        series["asymptote"] = [None] * n
    do_mle = "mle" in want and (parameter == "distance" or not config.prior.angle_degenerate)
    if do_mle:
        series["mle_mse"] = [None] * n
        series["mle_stderr"] = [None] * n

    for i, db in enumerate(config.snr_db):
        snr = SnrSpec.from_db(db)
        if zzb_engine is not None:
            try:
                res = zzb_engine.evaluate(snr)
                series["zzb"][i] = res.value
                flags.setdefault(f"{parameter}/zzb", []).append(bool(res.converged))
            except Exception as exc:  # per-point failures must not kill the sweep
                failures.append({"series": f"{parameter}/zzb", "snr_db": db, "error": str(exc)})
                flags.setdefault(f"{parameter}/zzb", []).append(False)
        if "crb_global" in want:
            try:
                series["crb_global"][i] = crb_global(
                    config.array, snr, config.prior, parameter, config.quad
                )
            except Exception as exc:
                failures.append(
                    {"series": f"{parameter}/crb_global", "snr_db": db, "error": str(exc)}
                )
        if do_asym:
            try:
                gamma = asymptotics.gamma_coefficient(config.array, snr)
                series["asymptote"][i] = asymptotics.highsnr_integral_closed(
                    gamma, config.prior
                )
            except Exception as exc:
                failures.append(
                    {"series": f"{parameter}/asymptote", "snr_db": db, "error": str(exc)}
                )
        if do_mle:
            try:
                res = monte_carlo_mse(config.array, snr, config.prior, config.mc)
                mse = res.mse_d if parameter == "distance" else res.mse_theta
                err = res.stderr_d if parameter == "distance" else res.stderr_theta
                series["mle_mse"][i] = mse
                series["mle_stderr"][i] = err
            except Exception as exc:
                failures.append({"series": f"{parameter}/mle", "snr_db": db, "error": str(exc)})
    return series


def run_sweep(config: ScenarioConfig):
    """Evaluate the configured engines over the SNR sweep.

    Returns one BoundCurve per estimated parameter (distance, and angle
    when an angle engine is requested).  Per-point engine failures are
    recorded under metadata["failures"] with the point left as None; the
    run always continues.  Deterministic given the config, including the
    Monte Carlo seed.
    """
    curves = []
    failures = []
    flags = {}

    distance_engines = {"zzb_known_aoa", "zzb_joint_distance", "crb_global", "asymptotes", "mle"}
    if distance_engines & set(config.engines):
        series = _sweep_parameter(
            config, "distance", _distance_zzb_engine(config), failures, flags
        )
        curves.append(_make_curve(config, "distance", "m^2", series, failures, flags))

    if "zzb_joint_aoa" in config.engines:
        engine = JointZzbEngine(config.array, config.prior, config.quad, "aoa")
        series = _sweep_parameter(config, "aoa", engine, failures, flags)
        curves.append(_make_curve(config, "aoa", "rad^2", series, failures, flags))

    # grid-resolution warning: the MC estimator cannot beat its search grid
    if "mle" in config.engines and "crb_global" in config.engines:
        top = SnrSpec.from_db(config.snr_db[-1])
        floor_d, _ = grid_floor(config.prior, config.mc)
        try:
            crb_top = crb_global(config.array, top, config.prior, "distance", config.quad)
        except Exception:
            crb_top = None
        if crb_top is not None and not config.mc.refine and crb_top < floor_d:
            warnings.warn(
                f"distance CRB at the top of the sweep ({crb_top:.3e} m^2) is below the "
                f"search-grid floor ({floor_d:.3e} m^2); MLE points are resolution-limited",
                RuntimeWarning,
                stacklevel=2,
            )
    return curves


def _make_curve(config, parameter, units, series, failures, flags):
    own_failures = [f for f in failures if f["series"].startswith(parameter + "/")]
    own_flags = {k: v for k, v in flags.items() if k.startswith(parameter + "/")}
    all_conv = all(all(v) for v in own_flags.values()) and not own_failures
    return BoundCurve(
        parameter=parameter,
        units=units,
        snr_db=list(config.snr_db),
        series=series,
        metadata={
            "config_hash": config.config_hash,
            "engines": list(config.engines),
            "convergence": own_flags,
            "all_converged": all_conv,
            "failures": own_failures,
        },
    )


def detect_threshold(curve: BoundCurve, ratio: float = 2.0):
    """Smallest sweep SNR (dB) where zzb <= ratio * crb_global and stays so
    for every higher sweep point; None when never satisfied.

    Points where either series is missing are treated as not satisfying
    the condition.
    """
    if "zzb" not in curve.series or "crb_global" not in curve.series:
        raise ValueError("threshold detection needs both zzb and crb_global series")
    if not ratio > 0:
        raise ValueError(f"ratio must be positive, got {ratio!r}")
    zzb = curve.series["zzb"]
    crb = curve.series["crb_global"]
    ok = [
        z is not None and c is not None and z <= ratio * c
        for z, c in zip(zzb, crb)
    ]
    threshold = None
    for db, good in zip(curve.snr_db, ok):
        if good and threshold is None:
            threshold = db
        elif not good:
            threshold = None
    return threshold


def _fmt(x):
    return "" if x is None else format(float(x), ".12g")


def _curve_series_names(curve):
    return [name for name in SERIES_ORDER if name in curve.series]


def curve_to_csv(curve: BoundCurve) -> str:
    """Render one curve as CSV text: `# units:` comment, header, one row
    per sweep point, 12 significant digits, LF line endings."""
    names = _curve_series_names(curve)
    units = {"zzb": curve.units, "crb_global": curve.units, "asymptote": curve.units,
             "mle_mse": curve.units, "mle_stderr": curve.units}
    unit_line = "# units: snr_db=dB" + "".join(f", {n}={units[n]}" for n in names)
    lines = [unit_line, ",".join(["snr_db"] + names)]
    for i, db in enumerate(curve.snr_db):
        row = [_fmt(db)] + [_fmt(curve.series[n][i]) for n in names]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _round12(x):
    return None if x is None else float(format(float(x), ".12g"))


def curve_to_dict(curve: BoundCurve) -> dict:
    return {
        "parameter": curve.parameter,
        "units": curve.units,
        "snr_db": [_round12(v) for v in curve.snr_db],
        "series": {n: [_round12(v) for v in curve.series[n]] for n in _curve_series_names(curve)},
        "metadata": curve.metadata,
    }


def curve_from_dict(doc) -> BoundCurve:
    return BoundCurve(
        parameter=doc["parameter"],
        units=doc["units"],
        snr_db=list(doc["snr_db"]),
        series={k: list(v) for k, v in doc["series"].items()},
        metadata=dict(doc.get("metadata", {})),
    )


def emit(curves, fmt: str, path: str):
    """Write curves to disk; returns the list of written paths.

    A single curve goes to `path` verbatim; multiple curves get the
    parameter name suffixed to the stem.  I/O failures are re-raised as
    OSError with the offending path in the message.
    """
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    curves = list(curves)
    stem, ext = os.path.splitext(path)
    if not ext:
        ext = "." + fmt
    written = []
    for curve in curves:
        target = path if len(curves) == 1 else f"{stem}_{curve.parameter}{ext}"
        if fmt == "csv":
            payload = curve_to_csv(curve)
        else:
            payload = json.dumps(curve_to_dict(curve), indent=2, sort_keys=True) + "\n"
        try:
            with open(target, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(payload)
        except OSError as exc:
            raise OSError(f"cannot write {target}: {exc}") from exc
        written.append(target)
    return written

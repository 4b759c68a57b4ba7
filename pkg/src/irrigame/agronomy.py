"""Quadratic weather-to-crop-response surrogate.

A full crop simulator is expensive and noisy year to year; this module
replaces it with a per-crop quadratic response surface over seven yearly
weather features.  Five output channels are produced per crop and year:
transpiration, irrigation requirement, evapotranspiration, growing-season
precipitation, and yield.  Soil and crop-variety effects are folded into
the fitted coefficients.

Weather feature vector (order matters, it defines the coefficient layout):
precip_annual, precip_summer, precip_winter [mm], solar_summer,
solar_winter [MJ/m^2/day], tmax_mean, tmin_mean [degC].  Summer means
April-September, winter October-March.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .units import ACRE_M2

FEATURE_NAMES = (
    "precip_annual",
    "precip_summer",
    "precip_winter",
    "solar_summer",
    "solar_winter",
    "tmax_mean",
    "tmin_mean",
)
N_FEATURES = len(FEATURE_NAMES)
# intercept + linear + upper-triangular pairwise products (squares included)
N_TERMS = 1 + N_FEATURES + N_FEATURES * (N_FEATURES + 1) // 2

CHANNELS = (
    "transpiration_mm",
    "irrigation_mm",
    "evapotranspiration_mm",
    "season_precip_mm",
    "yield_bu_acre",
)


def term_names() -> tuple[str, ...]:
    """Canonical polynomial term order: intercept, linear, then a*b for a <= b."""
    names = ["intercept", *FEATURE_NAMES]
    for a in range(N_FEATURES):
        for b in range(a, N_FEATURES):
            names.append(f"{FEATURE_NAMES[a]}*{FEATURE_NAMES[b]}")
    return tuple(names)


TERM_NAMES = term_names()


@dataclass(frozen=True)
class WeatherYear:
    """One year of weather, pre-aggregated to the surrogate's features."""

    year: int
    precip_annual: float   # mm
    precip_summer: float   # mm, Apr-Sep
    precip_winter: float   # mm, Oct-Mar
    solar_summer: float    # MJ/m^2/day mean
    solar_winter: float    # MJ/m^2/day mean
    tmax_mean: float       # degC
    tmin_mean: float       # degC

    def __post_init__(self):
        for name in ("precip_annual", "precip_summer", "precip_winter"):
            if not (getattr(self, name) >= 0.0):
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.precip_summer + self.precip_winter > self.precip_annual + 1e-6:
            raise ValueError(
                "seasonal precipitation exceeds the annual total: "
                f"{self.precip_summer} + {self.precip_winter} > {self.precip_annual}"
            )

    def features(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in FEATURE_NAMES], dtype=float)


@dataclass(frozen=True)
class CropResponse:
    """Surrogate outputs for one crop in one year.

    Depth channels are mm over the crop's growing season; yield is bushels
    per acre as reported by crop statistics, with a bushels-per-square-meter
    view for the revenue arithmetic.
    """

    transpiration_mm: float
    irrigation_mm: float
    evapotranspiration_mm: float
    season_precip_mm: float
    yield_bu_acre: float
    clamped: bool = False        # a channel was clamped up to a valid value
    extrapolated: bool = False   # weather lay outside the fitted feature range

    def __post_init__(self):
        for name in CHANNELS:
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        if self.evapotranspiration_mm < self.transpiration_mm:
            raise ValueError(
                "evapotranspiration cannot be below transpiration: "
                f"{self.evapotranspiration_mm} < {self.transpiration_mm}"
            )

    @property
    def yield_bu_m2(self) -> float:
        return self.yield_bu_acre / ACRE_M2


@dataclass(frozen=True)
class CropCoefficients:
    """Fitted quadratic coefficients for one crop: a (channels x terms) matrix.

    feature_min/feature_max record the training domain so evaluation can
    flag extrapolation; rmse holds the per-channel training error.
    """

    coeffs: np.ndarray        # (len(CHANNELS), N_TERMS)
    feature_min: np.ndarray   # (N_FEATURES,)
    feature_max: np.ndarray   # (N_FEATURES,)
    rmse: np.ndarray          # (len(CHANNELS),)
    ridge_fallback: bool = False

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float, copy=True)
        if c.shape != (len(CHANNELS), N_TERMS):
            raise ValueError(f"coefficients must have shape {(len(CHANNELS), N_TERMS)}, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        for name in ("feature_min", "feature_max", "rmse"):
            a = np.array(getattr(self, name), dtype=float, copy=True)
            a.setflags(write=False)
            object.__setattr__(self, name, a)


@dataclass(frozen=True)
class SurrogateModel:
    """Per-crop quadratic response surfaces, keyed by crop name."""

    crops: tuple[str, ...]
    by_crop: Mapping[str, CropCoefficients]

    def __post_init__(self):
        object.__setattr__(self, "crops", tuple(self.crops))
        missing = [c for c in self.crops if c not in self.by_crop]
        if missing:
            raise ValueError(f"no coefficients for crops: {missing}")

    def coefficients(self, crop: str | int) -> CropCoefficients:
        name = self.crops[crop] if isinstance(crop, int) else crop
        if name not in self.by_crop:
            raise KeyError(f"unknown crop {name!r}; model has {list(self.crops)}")
        return self.by_crop[name]


def expand_features(features: np.ndarray) -> np.ndarray:
    """Map a feature vector to the full quadratic term vector (TERM_NAMES order)."""
    f = np.asarray(features, dtype=float)
    if f.shape != (N_FEATURES,):
        raise ValueError(f"expected {N_FEATURES} features, got shape {f.shape}")
    prods = np.outer(f, f)
    iu = np.triu_indices(N_FEATURES)
    return np.concatenate(([1.0], f, prods[iu]))


def evaluate_surrogate(model: SurrogateModel, weather: WeatherYear, crop: str | int) -> CropResponse:
    """Evaluate one crop's response surface at one year of weather.

    Channels are clamped below at zero; if clamping leaves
    evapotranspiration under transpiration it is raised to match.  Both
    adjustments set the `clamped` flag, and weather outside the fitted
    feature range sets `extrapolated`.
    """
    cc = model.coefficients(crop)
    f = weather.features()
    raw = cc.coeffs @ expand_features(f)
    clamped = bool(np.any(raw < 0.0))
    vals = np.maximum(raw, 0.0)
    tr, ir, et, sp, yld = vals
    if et < tr:
        et = tr
        clamped = True
    extrapolated = bool(np.any(f < cc.feature_min - 1e-12) or np.any(f > cc.feature_max + 1e-12))
    return CropResponse(
        transpiration_mm=float(tr),
        irrigation_mm=float(ir),
        evapotranspiration_mm=float(et),
        season_precip_mm=float(sp),
        yield_bu_acre=float(yld),
        clamped=clamped,
        extrapolated=extrapolated,
    )


def fit_surrogate(rows: Sequence[tuple[WeatherYear, CropResponse]]) -> CropCoefficients:
    """Fit one crop's quadratic surface by per-channel ordinary least squares.

    Needs at least N_TERMS rows.  A rank-deficient quadratic design falls
    back to ridge regression with lambda = 1e-8 and emits a warning.
    """
    if len(rows) < N_TERMS:
        raise ValueError(f"need at least {N_TERMS} training rows, got {len(rows)}")
    feats = np.array([w.features() for w, _ in rows])
    design = np.array([expand_features(f) for f in feats])
    targets = np.array([[getattr(r, ch) for ch in CHANNELS] for _, r in rows])

    beta, _, rank, _ = np.linalg.lstsq(design, targets, rcond=None)
    ridge = False
    if rank < N_TERMS:
        warnings.warn(
            f"quadratic design is rank-deficient ({rank} < {N_TERMS}); "
            "falling back to ridge regression with lambda=1e-8",
            stacklevel=2,
        )
        gram = design.T @ design + 1e-8 * np.eye(N_TERMS)
        beta = np.linalg.solve(gram, design.T @ targets)
        ridge = True

    resid = design @ beta - targets
    rmse = np.sqrt(np.mean(resid**2, axis=0))
    return CropCoefficients(
        coeffs=beta.T,
        feature_min=feats.min(axis=0),
        feature_max=feats.max(axis=0),
        rmse=rmse,
        ridge_fallback=ridge,
    )


def fit_surrogate_model(
    tables: Mapping[str, Sequence[tuple[WeatherYear, CropResponse]]],
) -> SurrogateModel:
    """Fit every crop's surface from per-crop training tables."""
    crops = tuple(tables.keys())
    return SurrogateModel(crops=crops, by_crop={c: fit_surrogate(tables[c]) for c in crops})


def estimate_evaporation(responses: Sequence[CropResponse], precip_annual: float) -> float:
    """Yearly evaporation estimate in mm.

    Scales the annual precipitation by the ratio of in-season evaporation
    (evapotranspiration minus transpiration, summed over crops) to
    in-season precipitation summed over crops.
    """
    season_precip = sum(r.season_precip_mm for r in responses)
    if season_precip <= 0.0:
        raise ValueError("total growing-season precipitation is zero; evaporation ratio undefined")
    season_evap = sum(r.evapotranspiration_mm - r.transpiration_mm for r in responses)
    return precip_annual * season_evap / season_precip


def scale_irrigation(response: CropResponse, factor: float) -> CropResponse:
    """Return a copy with the irrigation requirement multiplied by `factor`."""
    return replace(response, irrigation_mm=response.irrigation_mm * factor)


# ---------------------------------------------------------------------------
# Persistence: long format `crop,channel,term,value`, one row per
# coefficient, plus `feature_min`/`feature_max` pseudo-channels recording the
# training domain and an `rmse` pseudo-channel per output channel.

_RANGE_CHANNELS = ("feature_min", "feature_max")


def surrogate_to_rows(model: SurrogateModel) -> list[list]:
    rows: list[list] = []
    for crop in model.crops:
        cc = model.by_crop[crop]
        for ci, ch in enumerate(CHANNELS):
            for ti, term in enumerate(TERM_NAMES):
                rows.append([crop, ch, term, float(cc.coeffs[ci, ti])])
            rows.append([crop, "rmse", ch, float(cc.rmse[ci])])
        for which, vec in zip(_RANGE_CHANNELS, (cc.feature_min, cc.feature_max)):
            for fi, feat in enumerate(FEATURE_NAMES):
                rows.append([crop, which, feat, float(vec[fi])])
    return rows


def surrogate_from_rows(rows, source: str = "surrogate data") -> SurrogateModel:
    coeffs: dict[str, np.ndarray] = {}
    ranges: dict[str, dict[str, np.ndarray]] = {}
    rmses: dict[str, np.ndarray] = {}
    crops: list[str] = []
    term_index = {t: i for i, t in enumerate(TERM_NAMES)}
    feat_index = {f: i for i, f in enumerate(FEATURE_NAMES)}
    chan_index = {c: i for i, c in enumerate(CHANNELS)}

    for lineno, row in enumerate(rows, start=1):
        if len(row) != 4:
            raise ValueError(f"{source}:{lineno}: expected 4 columns, got {len(row)}")
        crop, channel, term, value = row
        try:
            v = float(value)
        except (TypeError, ValueError):
            raise ValueError(f"{source}:{lineno}: non-numeric value {value!r}") from None
        if crop not in coeffs:
            crops.append(crop)
            coeffs[crop] = np.zeros((len(CHANNELS), N_TERMS))
            ranges[crop] = {
                "feature_min": np.full(N_FEATURES, -np.inf),
                "feature_max": np.full(N_FEATURES, np.inf),
            }
            rmses[crop] = np.zeros(len(CHANNELS))
        if channel in chan_index:
            if term not in term_index:
                raise ValueError(f"{source}:{lineno}: unknown term {term!r}")
            coeffs[crop][chan_index[channel], term_index[term]] = v
        elif channel in _RANGE_CHANNELS:
            if term not in feat_index:
                raise ValueError(f"{source}:{lineno}: unknown feature {term!r}")
            ranges[crop][channel][feat_index[term]] = v
        elif channel == "rmse":
            if term not in chan_index:
                raise ValueError(f"{source}:{lineno}: unknown rmse channel {term!r}")
            rmses[crop][chan_index[term]] = v
        else:
            raise ValueError(f"{source}:{lineno}: unknown channel {channel!r}")

    if not crops:
        raise ValueError(f"{source}: no coefficient rows")
    by_crop = {
        c: CropCoefficients(
            coeffs=coeffs[c],
            feature_min=ranges[c]["feature_min"],
            feature_max=ranges[c]["feature_max"],
            rmse=rmses[c],
        )
        for c in crops
    }
    return SurrogateModel(crops=tuple(crops), by_crop=by_crop)


def save_surrogate_csv(model: SurrogateModel, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["crop", "channel", "term", "value"])
        for crop, channel, term, value in surrogate_to_rows(model):
            w.writerow([crop, channel, term, f"{value:.17g}"])


def load_surrogate_csv(path) -> SurrogateModel:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["crop", "channel", "term", "value"]:
            raise ValueError(f"{path}: expected header crop,channel,term,value, got {header}")
        rows = list(reader)
    return surrogate_from_rows(rows, source=str(path))

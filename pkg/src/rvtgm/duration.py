"""Ground-motion duration models and the rms-duration correction.

D_gm (the duration entering the peak-factor crossing count) comes from the
AS96 significant-duration model or from a user-supplied value.  D_rms (the
duration normalizing the mean-square response) adds the oscillator
transient-decay contribution, either through a closed-form correction or a
tabulated ratio model in the style of the published oscillator-duration
tables.

Model coefficients are not hard-coded: they ship as versioned JSON documents
(see ``rvtgm/data``) and every consumer evaluates against the loaded file.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import NumericalError, ValidationError
from .spectra import Oscillator, Scenario, brune_corner_frequency


def _load_data_json(name: str) -> dict:
    with resources.files("rvtgm.data").joinpath(name).open("r", encoding="utf-8") as fh:
        return json.load(fh)


@dataclass(frozen=True)
class As96Coefficients:
    """Coefficients of the AS96 significant-duration model.

    ``c1`` (s/km) scales the distance term, ``c2`` (s) the site term beyond
    ``r_c`` (km); ``beta`` (km/s) and ``stress_drop`` (bar) are the source
    defaults used when a scenario does not carry its own; ``a1..a3`` convert
    the base 5-75% interval to other significant-duration intervals.
    """

    c1: float
    c2: float
    r_c: float
    beta: float
    stress_drop: float
    a1: float
    a2: float
    a3: float
    version: str = "unversioned"

    def __post_init__(self):
        if self.c1 < 0.0 or self.c2 < 0.0 or self.r_c < 0.0:
            raise ValidationError("AS96 coefficients c1, c2, r_c must be >= 0")
        if not (self.beta > 0.0 and self.stress_drop > 0.0):
            raise ValidationError("AS96 defaults beta and stress_drop must be > 0")

    @classmethod
    def from_json(cls, path: str | Path) -> "As96Coefficients":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls._from_doc(doc)

    @classmethod
    def default(cls) -> "As96Coefficients":
        return cls._from_doc(_load_data_json("as96_coefficients.json"))

    @classmethod
    def _from_doc(cls, doc: dict) -> "As96Coefficients":
        try:
            c = doc["coefficients"]
            return cls(
                c1=float(c["c1"]),
                c2=float(c["c2"]),
                r_c=float(c["r_c"]),
                beta=float(c["beta"]),
                stress_drop=float(c["stress_drop"]),
                a1=float(c["a1"]),
                a2=float(c["a2"]),
                a3=float(c["a3"]),
                version=str(doc.get("version", "unversioned")),
            )
        except KeyError as exc:
            raise ValidationError(f"AS96 coefficient file is missing key {exc}") from exc


@dataclass(frozen=True)
class DurationResult:
    """A ground-motion duration with its interval label and provenance."""

    d_gm: float
    interval: str
    provenance: str

    def __post_init__(self):
        if not (self.d_gm > 0.0 and math.isfinite(self.d_gm)):
            raise ValidationError(f"duration must be positive and finite, got {self.d_gm}")


def as96_d575(scn: Scenario, coeffs: As96Coefficients) -> DurationResult:
    """Median 5-75% significant duration: source duration 1/f_c plus additive
    distance and site terms.

    The distance term c1*(R_rup - R_c) applies only beyond R_c, so the model
    is continuous in distance.
    """
    beta = scn.beta if scn.beta is not None else coeffs.beta
    stress_drop = scn.stress_drop if scn.stress_drop is not None else coeffs.stress_drop
    f_c = brune_corner_frequency(scn.magnitude, stress_drop, beta)
    d = 1.0 / f_c + coeffs.c1 * max(scn.r_rup - coeffs.r_c, 0.0) + coeffs.c2 * scn.site_class
    if not (d > 0.0):
        raise NumericalError(f"AS96 produced non-positive duration {d} s")
    return DurationResult(d_gm=d, interval="a0.05-0.75", provenance=f"as96:{coeffs.version}")


def as96_interval(d575: DurationResult, interval_end: float, coeffs: As96Coefficients) -> DurationResult:
    """Convert a 5-75% significant duration to the 5%-to-``interval_end``
    interval via the quadratic-in-log-odds ratio model."""
    if not (0.05 < interval_end < 1.0):
        raise ValidationError(
            f"significant-duration interval end must lie in (0.05, 1), got {interval_end}"
        )
    ell = math.log((interval_end - 0.05) / (1.0 - interval_end))
    ratio = math.exp(coeffs.a1 + coeffs.a2 * ell + coeffs.a3 * ell**2)
    return DurationResult(
        d_gm=d575.d_gm * ratio,
        interval=f"a0.05-{interval_end:.2f}",
        provenance=d575.provenance,
    )


class RatioTable:
    """Tabulated D_rms/D_gm ratio on a (magnitude, distance, eta) grid with
    eta = T0/D_gm; trilinear interpolation in (M, ln R, ln eta), clamped at
    the grid edges."""

    def __init__(self, mags, r_rups, etas, ratios, version="unversioned", m_min=4.0):
        self.mags = np.asarray(mags, dtype=float)
        self.log_r = np.log(np.asarray(r_rups, dtype=float))
        self.log_eta = np.log(np.asarray(etas, dtype=float))
        self.ratios = np.asarray(ratios, dtype=float)
        self.version = version
        self.m_min = float(m_min)
        if self.ratios.shape != (self.mags.size, self.log_r.size, self.log_eta.size):
            raise ValidationError("ratio table shape does not match its axis grids")
        if np.any(self.ratios < 1.0):
            raise ValidationError("ratio table violates D_rms >= D_gm (entries < 1)")

    @classmethod
    def from_json(cls, path: str | Path) -> "RatioTable":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls._from_doc(doc)

    @classmethod
    def default(cls) -> "RatioTable":
        return cls._from_doc(_load_data_json("rms_ratio_table.json"))

    @classmethod
    def _from_doc(cls, doc: dict) -> "RatioTable":
        try:
            return cls(
                mags=doc["magnitude"],
                r_rups=doc["r_rup_km"],
                etas=doc["eta"],
                ratios=doc["ratio"],
                version=str(doc.get("version", "unversioned")),
                m_min=float(doc.get("m_min", 4.0)),
            )
        except KeyError as exc:
            raise ValidationError(f"rms ratio table is missing key {exc}") from exc

    @staticmethod
    def _locate(axis: np.ndarray, x: float) -> tuple[int, float]:
        x = min(max(x, axis[0]), axis[-1])
        i = int(np.clip(np.searchsorted(axis, x) - 1, 0, axis.size - 2))
        t = (x - axis[i]) / (axis[i + 1] - axis[i])
        return i, t

    def ratio(self, magnitude: float, r_rup: float, eta: float) -> float:
        i, ti = self._locate(self.mags, magnitude)
        j, tj = self._locate(self.log_r, math.log(max(r_rup, 1e-3)))
        k, tk = self._locate(self.log_eta, math.log(eta))
        c = self.ratios[i : i + 2, j : j + 2, k : k + 2]
        c = c[0] * (1 - ti) + c[1] * ti
        c = c[0] * (1 - tj) + c[1] * tj
        return float(c[0] * (1 - tk) + c[1] * tk)


class StressDropTable:
    """Pluggable magnitude -> stress drop (bar) relation, linear in
    (M, ln stress_drop) between nodes and clamped at the ends."""

    def __init__(self, magnitudes, stress_drops, version="unversioned"):
        self.magnitudes = np.asarray(magnitudes, dtype=float)
        self.stress_drops = np.asarray(stress_drops, dtype=float)
        self.version = version
        if self.magnitudes.size != self.stress_drops.size or self.magnitudes.size < 2:
            raise ValidationError("stress-drop table needs matching arrays of >= 2 nodes")
        if np.any(np.diff(self.magnitudes) <= 0.0) or np.any(self.stress_drops <= 0.0):
            raise ValidationError("stress-drop table needs ascending magnitudes and positive drops")

    @classmethod
    def from_json(cls, path: str | Path) -> "StressDropTable":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls._from_doc(doc)

    @classmethod
    def default(cls) -> "StressDropTable":
        return cls._from_doc(_load_data_json("stress_drop_relation.json"))

    @classmethod
    def _from_doc(cls, doc: dict) -> "StressDropTable":
        try:
            return cls(doc["magnitude"], doc["stress_drop"], str(doc.get("version", "unversioned")))
        except KeyError as exc:
            raise ValidationError(f"stress-drop relation file is missing key {exc}") from exc

    def __call__(self, magnitude: float) -> float:
        return float(np.exp(np.interp(magnitude, self.magnitudes, np.log(self.stress_drops))))


@dataclass(frozen=True)
class RmsDurationModel:
    """Selects the D_rms correction: ``closed_form`` needs no tables and is
    the default; ``bt15`` activates the tabulated
    oscillator-duration ratio model when a table is loaded."""

    variant: str = "closed_form"
    table: RatioTable | None = None

    def __post_init__(self):
        if self.variant not in ("closed_form", "bt15"):
            raise ValidationError(f"unknown D_rms variant {self.variant!r}")
        if self.variant == "bt15" and self.table is None:
            raise ValidationError("bt15 D_rms variant requires a loaded ratio table")


def oscillator_duration(osc: Oscillator, d_gm: float) -> float:
    """Closed-form transient-decay contribution
    D_o = (T0 / (2 pi zeta)) * gamma^3 / (gamma^3 + 1/3), gamma = D_gm/T0."""
    t0 = osc.period
    gamma = d_gm / t0
    return t0 / (2.0 * math.pi * osc.zeta) * gamma**3 / (gamma**3 + 1.0 / 3.0)


def rms_duration(
    d_gm: DurationResult | float,
    osc: Oscillator,
    scn: Scenario,
    model: RmsDurationModel = RmsDurationModel(),
) -> float:
    """Duration normalizing the mean-square response, D_rms >= D_gm.

    Closed-form variant: D_rms = D_gm + D_o.  Table variant: D_rms = D_gm *
    ratio(M, R_rup, T0/D_gm); table applicability starts at the table's
    minimum magnitude.
    """
    d = d_gm.d_gm if isinstance(d_gm, DurationResult) else float(d_gm)
    if not (d > 0.0):
        raise ValidationError(f"D_gm must be positive, got {d}")
    if model.variant == "closed_form":
        return d + oscillator_duration(osc, d)
    if scn.magnitude < model.table.m_min:
        raise ValidationError(
            f"ratio-table D_rms model is not applicable below M {model.table.m_min}, "
            f"got M {scn.magnitude}"
        )
    return d * model.table.ratio(scn.magnitude, scn.r_rup, osc.period / d)

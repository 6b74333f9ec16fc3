"""Constant shift and two-level random-effects decomposition of total
residuals, with binned diagnostics.

The model is eps_(e,s) = dc0 + dB_e + dWS_(e,s) with between-event terms of
variance tau0^2 and within-event terms of variance phi0^2.  The estimator is
a self-contained iterated method of moments: the pooled within-event mean
square fixes phi0^2 directly, and tau0^2 solves a precision-weighted
between-event moment equation by fixed-point iteration.  Event terms are the
usual shrunken event means, so the partition eps = dc0 + dB + dWS is exact by
construction while within-event means of dWS vanish only as shrinkage
approaches one (many records per event).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import NumericalError, ValidationError

FLATFILE_COLUMNS = (
    "event_id",
    "station_id",
    "magnitude",
    "r_rup_km",
    "vs30_ms",
    "period_s",
    "residual_ln",
)


@dataclass(frozen=True)
class ResidualTable:
    """Rows of (event, station, M, R_rup, V_S30, period, total residual)."""

    event_id: np.ndarray
    station_id: np.ndarray
    magnitude: np.ndarray
    r_rup: np.ndarray
    vs30: np.ndarray
    period: np.ndarray
    residual: np.ndarray

    def __post_init__(self):
        n = self.residual.size
        for name in ("event_id", "station_id", "magnitude", "r_rup", "vs30", "period"):
            if getattr(self, name).size != n:
                raise ValidationError(f"residual table column {name} has inconsistent length")
        if n < 2:
            raise ValidationError("residual table needs at least 2 records")
        if not np.all(np.isfinite(self.residual)):
            raise ValidationError("residuals must be finite")

    @classmethod
    def from_frame(cls, df: pd.DataFrame) -> "ResidualTable":
        missing = [c for c in FLATFILE_COLUMNS if c not in df.columns]
        if missing:
            raise ValidationError(f"residual flatfile is missing columns {missing}")
        return cls(
            event_id=df["event_id"].to_numpy(),
            station_id=df["station_id"].to_numpy(),
            magnitude=df["magnitude"].to_numpy(dtype=float),
            r_rup=df["r_rup_km"].to_numpy(dtype=float),
            vs30=df["vs30_ms"].to_numpy(dtype=float),
            period=df["period_s"].to_numpy(dtype=float),
            residual=df["residual_ln"].to_numpy(dtype=float),
        )

    @classmethod
    def from_csv(cls, path) -> "ResidualTable":
        return cls.from_frame(pd.read_csv(path))

    def periods(self) -> np.ndarray:
        return np.unique(self.period)

    def at_period(self, period: float, rtol: float = 1e-9) -> np.ndarray:
        """Row indices for one period."""
        sel = np.isclose(self.period, period, rtol=rtol, atol=0.0)
        if not np.any(sel):
            raise ValidationError(f"no residual rows at period {period} s")
        return np.flatnonzero(sel)


@dataclass(frozen=True)
class Decomposition:
    """Fitted terms for one period.  ``event_terms`` maps event id -> dB_e;
    ``record_terms`` aligns with the input row order of the period subset."""

    period: float
    dc0: float
    event_ids: np.ndarray
    event_terms: np.ndarray
    record_terms: np.ndarray
    tau0: float
    phi0: float
    n_events: int
    n_records: int
    degenerate_within: bool = False

    @property
    def sigma0(self) -> float:
        return float(np.hypot(self.tau0, self.phi0))

    def event_term_of(self, event_id) -> float:
        i = np.searchsorted(self.event_ids, event_id)
        if i >= self.event_ids.size or self.event_ids[i] != event_id:
            raise ValidationError(f"unknown event id {event_id!r}")
        return float(self.event_terms[i])


MAX_MOM_ITERATIONS = 500
MOM_TOLERANCE = 1e-8


def _fit_variance_components(eps, event_index, n_events):
    """Returns (dc0, tau2, phi2, event_means, counts, degenerate_within)."""
    counts = np.bincount(event_index, minlength=n_events).astype(float)
    sums = np.bincount(event_index, weights=eps, minlength=n_events)
    means = sums / counts
    n_total = eps.size

    # summation roundoff leaves ~(eps_mach * scale)^2 dust in exact-zero
    # variance components; snap anything below this floor to zero
    floor = float(np.mean(eps**2)) * 1e-28

    ssw = float(np.sum((eps - means[event_index]) ** 2))
    dof_within = n_total - n_events
    phi2 = ssw / dof_within if dof_within > 0 else 0.0
    if phi2 <= floor:
        phi2 = 0.0
    degenerate = phi2 <= 0.0

    grand = float(eps.mean())
    ssb = float(np.sum(counts * (means - grand) ** 2))
    c = (n_total - float(np.sum(counts**2)) / n_total) / (n_events - 1)
    tau2 = max((ssb / (n_events - 1) - phi2) / c, 0.0)
    if tau2 <= floor:
        tau2 = 0.0

    dc0 = grand
    if tau2 <= 0.0 and phi2 <= 0.0:
        # constant field: nothing to iterate
        return dc0, 0.0, 0.0, means, counts, degenerate

    for _ in range(MAX_MOM_ITERATIONS):
        var_means = tau2 + phi2 / counts
        w = 1.0 / var_means
        dc0 = float(np.sum(w * means) / np.sum(w))
        tau2_new = max(float(np.sum(w * ((means - dc0) ** 2 - phi2 / counts)) / np.sum(w)), 0.0)
        if abs(tau2_new - tau2) < MOM_TOLERANCE:
            tau2 = tau2_new
            break
        tau2 = tau2_new
    else:
        raise NumericalError(
            f"variance-component fixed point did not converge within "
            f"{MAX_MOM_ITERATIONS} iterations (last tau^2 = {tau2})"
        )
    var_means = tau2 + phi2 / counts
    w = 1.0 / var_means
    dc0 = float(np.sum(w * means) / np.sum(w))
    return dc0, tau2, phi2, means, counts, degenerate


def decompose(tbl: ResidualTable, period: float) -> Decomposition:
    """Fit dc0, event terms, record terms, and (tau0, phi0) at one period.

    Needs at least 2 events and at least one event with 2+ records.  Rows are
    canonicalized by (event, station) order internally, so the result is
    bit-identical under input row permutation; ``record_terms`` is reported in
    the caller's row order.
    """
    rows = tbl.at_period(period)
    order = np.lexsort((tbl.station_id[rows], tbl.event_id[rows]))
    sorted_rows = rows[order]
    eps = tbl.residual[sorted_rows]

    event_ids, event_index = np.unique(tbl.event_id[sorted_rows], return_inverse=True)
    n_events = event_ids.size
    if n_events < 2:
        raise ValidationError(
            "variance components unidentifiable: need at least 2 events, got "
            f"{n_events}"
        )
    counts = np.bincount(event_index)
    if counts.max() < 2:
        raise ValidationError(
            "variance components unidentifiable: need at least one event with 2+ records"
        )

    dc0, tau2, phi2, means, countsf, degenerate = _fit_variance_components(
        eps, event_index, n_events
    )

    if tau2 <= 0.0 and phi2 <= 0.0:
        shrink = np.zeros(n_events)
    elif phi2 <= 0.0:
        shrink = np.ones(n_events)
    else:
        shrink = countsf * tau2 / (phi2 + countsf * tau2)
    event_terms = shrink * (means - dc0)
    record_sorted = eps - dc0 - event_terms[event_index]

    # report record terms in the caller's original row order
    record_terms = np.empty_like(record_sorted)
    record_terms[order] = record_sorted

    return Decomposition(
        period=float(period),
        dc0=dc0,
        event_ids=event_ids,
        event_terms=event_terms,
        record_terms=record_terms,
        tau0=float(np.sqrt(tau2)),
        phi0=float(np.sqrt(phi2)),
        n_events=int(n_events),
        n_records=int(eps.size),
        degenerate_within=degenerate,
    )


@dataclass(frozen=True)
class BinnedStats:
    """Per-bin diagnostics of event and record terms along one axis.

    Empty bins keep count 0 and NaN statistics; bins with a single member get
    a NaN standard deviation (ddof=1 convention throughout).
    """

    axis: str
    edges: np.ndarray
    count_event: np.ndarray
    mean_event: np.ndarray
    std_event: np.ndarray
    count_record: np.ndarray
    mean_record: np.ndarray
    std_record: np.ndarray


_AXIS_FIELDS = {"magnitude": "magnitude", "r_rup": "r_rup", "vs30": "vs30"}


def _bin_series(values, terms, edges):
    nbin = edges.size - 1
    count = np.zeros(nbin, dtype=int)
    mean = np.full(nbin, np.nan)
    std = np.full(nbin, np.nan)
    idx = np.digitize(values, edges) - 1
    idx[values == edges[-1]] = nbin - 1  # closed top edge
    for b in range(nbin):
        sel = idx == b
        count[b] = int(np.count_nonzero(sel))
        if count[b] > 0:
            mean[b] = terms[sel].mean()
        if count[b] > 1:
            std[b] = terms[sel].std(ddof=1)
    return count, mean, std


def binned_stats(
    tbl: ResidualTable, period: float, axis: str, edges
) -> BinnedStats:
    """Bin the decomposition terms along magnitude, r_rup, or vs30.

    Event terms are binned at the event level using each event's (first)
    axis value; record terms at the record level.  The bins must cover the
    data range.
    """
    if axis not in _AXIS_FIELDS:
        raise ValidationError(f"unknown binning axis {axis!r}; use one of {list(_AXIS_FIELDS)}")
    edges = np.asarray(edges, dtype=float)
    if edges.size < 2 or np.any(np.diff(edges) <= 0.0):
        raise ValidationError("bin edges must be ascending with at least 2 values")

    dec = decompose(tbl, period)
    rows = tbl.at_period(period)
    axis_vals = getattr(tbl, _AXIS_FIELDS[axis])[rows]
    if axis_vals.min() < edges[0] or axis_vals.max() > edges[-1]:
        raise ValidationError(
            f"bins [{edges[0]}, {edges[-1]}] do not cover the data range "
            f"[{axis_vals.min()}, {axis_vals.max()}]"
        )

    # one axis value per event (first occurrence)
    ev_axis = np.empty(dec.event_ids.size)
    ev_id_rows = tbl.event_id[rows]
    for i, ev in enumerate(dec.event_ids):
        ev_axis[i] = axis_vals[ev_id_rows == ev][0]

    count_e, mean_e, std_e = _bin_series(ev_axis, dec.event_terms, edges)
    count_r, mean_r, std_r = _bin_series(axis_vals, dec.record_terms, edges)
    return BinnedStats(
        axis=axis,
        edges=edges,
        count_event=count_e,
        mean_event=mean_e,
        std_event=std_e,
        count_record=count_r,
        mean_record=mean_r,
        std_record=std_r,
    )

"""File formats and the run manifest.

All delimited outputs are UTF-8 with LF line endings and 9-significant-digit
numerics, so a rerun with identical inputs and seed is byte-identical.  Error
messages name the offending file, row, and violated invariant.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .engine import DIAG_FIELDS, PsaSpectrum
from .errors import ValidationError
from .hazard import FRACTILES, Branch, HazardAggregate, LogicTree, ScenarioRate
from .nonergodic import CorrelationModel, FnergResult, NonErgodicField
from .spectra import EasSpectrum, FrequencyGrid, Scenario

EAS_HEADER = ["frequency_hz", "eas"]
FIELD_HEADER = ["frequency_hz", "mean_ln", "sd_ln"]
PSA_HEADER = ["period_s", "psa", *DIAG_FIELDS]
HAZARD_HEADER = ["level_g", "mean", "median", "p02", "p16", "p84", "p98"]


def fmt(x) -> str:
    """9-significant-digit numeric formatting for all CSV output."""
    return f"{float(x):.9g}"


def _open_out(path):
    return open(path, "w", encoding="utf-8", newline="\n")


def _read_numeric_csv(path, header: list[str]) -> np.ndarray:
    """Read a simple numeric CSV with an exact expected header; returns an
    array of shape (rows, len(header))."""
    rows = []
    with open(path, "r", encoding="utf-8-sig", newline="") as fh:
        reader = csv.reader(fh)
        try:
            got = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: file is empty") from None
        if [c.strip() for c in got] != header:
            raise ValidationError(
                f"{path}: line 1: expected header {','.join(header)!r}, got {','.join(got)!r}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ValidationError(
                    f"{path}: line {lineno}: expected {len(header)} columns, got {len(row)}"
                )
            parsed = []
            for col, cell in zip(header, row):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise ValidationError(
                        f"{path}: line {lineno}: column {col!r}: not a number: {cell!r}"
                    ) from None
            rows.append(parsed)
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float)


def read_eas_csv(path) -> EasSpectrum:
    data = _read_numeric_csv(path, EAS_HEADER)
    try:
        return EasSpectrum(FrequencyGrid(data[:, 0]), data[:, 1])
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def write_eas_csv(path, spec: EasSpectrum) -> None:
    with _open_out(path) as fh:
        fh.write(",".join(EAS_HEADER) + "\n")
        for f, a in zip(spec.freqs, spec.amps):
            fh.write(f"{fmt(f)},{fmt(a)}\n")


def read_field_csv(path, correlation: CorrelationModel | None = None) -> NonErgodicField:
    data = _read_numeric_csv(path, FIELD_HEADER)
    try:
        return NonErgodicField(
            FrequencyGrid(data[:, 0]),
            data[:, 1],
            data[:, 2],
            correlation or CorrelationModel(),
        )
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


SCENARIO_KEYS = {
    "magnitude",
    "r_rup_km",
    "vs30_ms",
    "site_class",
    "stress_drop_bar",
    "beta_kms",
    "eq_coords",
    "site_coords",
}


def _load_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def read_scenario_json(path) -> Scenario:
    doc = _load_json(path)
    unknown = set(doc) - SCENARIO_KEYS
    if unknown:
        raise ValidationError(f"{path}: unknown scenario keys {sorted(unknown)}")
    for key in ("magnitude", "r_rup_km", "vs30_ms"):
        if key not in doc:
            raise ValidationError(f"{path}: scenario is missing required key {key!r}")
    try:
        return Scenario(
            magnitude=float(doc["magnitude"]),
            r_rup=float(doc["r_rup_km"]),
            v_s30=float(doc["vs30_ms"]),
            site_class=int(doc.get("site_class", 0)),
            stress_drop=None if doc.get("stress_drop_bar") is None else float(doc["stress_drop_bar"]),
            beta=None if doc.get("beta_kms") is None else float(doc["beta_kms"]),
            eq_coords=None if doc.get("eq_coords") is None else tuple(doc["eq_coords"]),
            site_coords=None if doc.get("site_coords") is None else tuple(doc["site_coords"]),
        )
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def read_correlation_json(path) -> CorrelationModel:
    doc = _load_json(path)
    unknown = set(doc) - {"model", "length"}
    if unknown:
        raise ValidationError(f"{path}: unknown correlation keys {sorted(unknown)}")
    try:
        return CorrelationModel.from_dict(doc)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def write_psa_csv(path, result: PsaSpectrum) -> None:
    with _open_out(path) as fh:
        fh.write(",".join(PSA_HEADER) + "\n")
        for i, t0 in enumerate(result.periods):
            cells = [fmt(t0), fmt(result.psa[i])]
            cells += [fmt(result.diagnostics[name][i]) for name in DIAG_FIELDS]
            fh.write(",".join(cells) + "\n")


def write_fnerg_csv(path, results: list[FnergResult], mean: np.ndarray, sd: np.ndarray) -> None:
    """One row group per realization, then per-period mean/sd summary rows."""
    with _open_out(path) as fh:
        fh.write("realization,period_s,fnerg_ln\n")
        for res in results:
            label = str(res.realization) if res.realization is not None else "0"
            for t0, v in zip(res.periods, res.values):
                fh.write(f"{label},{fmt(t0)},{fmt(v)}\n")
        periods = results[0].periods
        for label, series in (("mean", mean), ("sd", sd)):
            for t0, v in zip(periods, series):
                fh.write(f"{label},{fmt(t0)},{fmt(v)}\n")


def write_samples_csv(path, field: NonErgodicField, samples: np.ndarray) -> None:
    with _open_out(path) as fh:
        fh.write("realization,frequency_hz,adjustment_ln\n")
        for i, row in enumerate(samples):
            for f, v in zip(field.grid.freqs, row):
                fh.write(f"{i},{fmt(f)},{fmt(v)}\n")


def read_hazard_job_json(path):
    """Parse the scenario-list job document.

    Returns (scenarios, tree, per-branch median shifts, levels, truncation).
    Branch ``delta_ln`` may be a scalar (applied to every scenario) or a list
    with one entry per scenario.
    """
    doc = _load_json(path)
    known = {"period_s", "levels_g", "truncation_sigmas", "scenarios", "branches"}
    unknown = set(doc) - known
    if unknown:
        raise ValidationError(f"{path}: unknown hazard job keys {sorted(unknown)}")
    if "scenarios" not in doc or not doc["scenarios"]:
        raise ValidationError(f"{path}: hazard job needs a non-empty 'scenarios' list")

    scenarios = []
    for i, s in enumerate(doc["scenarios"]):
        sk = {"rate_per_yr", "median_ln_psa", "sigma_ln", "magnitude", "name"}
        unknown = set(s) - sk
        if unknown:
            raise ValidationError(f"{path}: scenario {i}: unknown keys {sorted(unknown)}")
        for key in ("rate_per_yr", "median_ln_psa", "sigma_ln"):
            if key not in s:
                raise ValidationError(f"{path}: scenario {i}: missing required key {key!r}")
        try:
            scenarios.append(
                ScenarioRate(
                    rate=float(s["rate_per_yr"]),
                    median_ln=float(s["median_ln_psa"]),
                    sigma_ln=float(s["sigma_ln"]),
                )
            )
        except ValidationError as exc:
            raise ValidationError(f"{path}: scenario {i}: {exc}") from exc

    branch_docs = doc.get("branches") or [{"weight": 1.0}]
    branches, deltas = [], []
    for i, b in enumerate(branch_docs):
        bk = {"weight", "backbone", "realization", "delta_ln"}
        unknown = set(b) - bk
        if unknown:
            raise ValidationError(f"{path}: branch {i}: unknown keys {sorted(unknown)}")
        if "weight" not in b:
            raise ValidationError(f"{path}: branch {i}: missing required key 'weight'")
        try:
            branches.append(
                Branch(
                    weight=float(b["weight"]),
                    backbone_id=str(b.get("backbone", "")),
                    realization_id=b.get("realization"),
                )
            )
        except ValidationError as exc:
            raise ValidationError(f"{path}: branch {i}: {exc}") from exc
        delta = b.get("delta_ln", 0.0)
        if isinstance(delta, list):
            if len(delta) != len(scenarios):
                raise ValidationError(
                    f"{path}: branch {i}: delta_ln list length {len(delta)} does not match "
                    f"{len(scenarios)} scenarios"
                )
            deltas.append(np.asarray(delta, dtype=float))
        else:
            deltas.append(np.full(len(scenarios), float(delta)))
    try:
        tree = LogicTree(tuple(branches))
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc

    levels = None if doc.get("levels_g") is None else np.asarray(doc["levels_g"], dtype=float)
    truncation = doc.get("truncation_sigmas")
    return scenarios, tree, deltas, levels, truncation


def write_hazard_csv(path, agg: HazardAggregate) -> None:
    with _open_out(path) as fh:
        fh.write(",".join(HAZARD_HEADER) + "\n")
        for j, level in enumerate(agg.levels):
            cells = [fmt(level), fmt(agg.mean[j]), fmt(agg.median[j])]
            cells += [fmt(agg.fractiles[p][j]) for p in FRACTILES]
            fh.write(",".join(cells) + "\n")


def config_digest(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


@dataclass(frozen=True)
class RunManifest:
    """Provenance record emitted alongside every command's outputs."""

    command: str
    inputs: dict
    config: dict
    seed: int | None
    outputs: list
    version: str
    timestamp: str

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "inputs": self.inputs,
            "config": self.config,
            "config_digest": config_digest(self.config),
            "seed": self.seed,
            "outputs": self.outputs,
            "version": self.version,
            "timestamp": self.timestamp,
        }


def write_manifest(out_dir, command: str, inputs: dict, config: dict, seed, outputs: list) -> Path:
    from . import __version__

    manifest = RunManifest(
        command=command,
        inputs={k: str(v) for k, v in inputs.items()},
        config=config,
        seed=seed,
        outputs=list(outputs),
        version=__version__,
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )
    path = Path(out_dir) / "manifest.json"
    with _open_out(path) as fh:
        json.dump(manifest.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path

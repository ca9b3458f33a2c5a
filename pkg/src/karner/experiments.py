"""Configurable verification experiments with deterministic CSV output."""

from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import floquet_fermi as ff
from . import krein_boundary as kb
from . import tensor_core as tc
from .errors import KarnerError

log = logging.getLogger(__name__)

KINDS = ("finite-verify", "krein-table", "floquet-verify", "bounds", "convergence")

_DRIVE = {"period": 2 * math.pi, "const": 0.0, "cos": [0.2], "sin": [], "n_t": 1024}
_LADDER = [[4, 20], [8, 40], [16, 80]]

DEFAULTS = {
    "finite-verify": {
        "n_seeds": 50,
        "max_dim_t": 8,
        "max_dim_h": 8,
        "max_m": 4,
        "max_n": 4,
        "hermitian": False,
        "z_list": [[0.5, 4.0], [-3.0, 3.0], [4.0, 1.5], [-2.0, -4.0], [1.0, -5.0]],
        "tol": 1e-9,
        "intermediate_tol": 1e-11,
    },
    "krein-table": {
        "z_grid": {"re_min": -20.0, "re_max": 80.0, "step": 0.5, "im": [0.5, 1.0, 2.0, 4.0]},
        "z_list": None,
        "tol": 1e-12,
    },
    "floquet-verify": {
        "drive": _DRIVE,
        "k_max": 8,
        "n_max": 40,
        "n_t": None,
        "edge": None,
        "z_list": [[0.0, 4.0], [0.0, -4.0]],
        "tol": 1e-6,
    },
    "bounds": {"drive": _DRIVE, "ladder": _LADDER, "n_t": None, "z_list": [[0.0, 4.0]]},
    "convergence": {
        "drive": _DRIVE,
        "ladder": _LADDER,
        "n_t": None,
        "edge": None,
        "z_list": [[0.0, 4.0]],
        "tol": 1e-6,
    },
}

HEADERS = {
    "finite-verify": [
        "seed", "dim_t", "dim_h", "m", "n", "z_re", "z_im", "rel_residual",
        "intermediate_residual", "factor_condition", "flags", "error", "passed",
    ],
    "krein-table": [
        "z_re", "z_im", "s0", "tau_re", "tau_im", "green00_re", "green00_im",
        "consistency", "rank_one_norm", "alpha", "trace_bound_ok", "norm_bound_ok", "error", "passed",
    ],
    "floquet-verify": [
        "z_re", "z_im", "k_max", "n_max", "rel_residual", "full_rel_residual",
        "factor_condition", "validity_region", "flags", "error", "passed",
    ],
    "bounds": [
        "k_max", "n_max", "z_re", "z_im", "lambda_norm", "lambda_bound", "commutator_norm",
        "commutator_bound", "radius_ok", "commutator_condition_ok", "error", "passed",
    ],
    "convergence": [
        "k_max", "n_max", "z_re", "z_im", "rel_residual", "full_rel_residual",
        "decreasing", "error", "passed",
    ],
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    kind: str
    params: dict
    seed: int = 0
    out: str = "results"
    workers: int = 1

    @classmethod
    def default(cls, kind):
        if kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {kind!r}")
        return cls(kind, copy.deepcopy(DEFAULTS[kind]))

    def as_dict(self):
        return {"kind": self.kind, "seed": self.seed, "out": self.out, "workers": self.workers,
                "params": self.params}

    def config_hash(self):
        # output location and worker count do not change results
        payload = {"kind": self.kind, "seed": self.seed, "params": self.params}
        text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def update(self, mapping):
        for key, value in mapping.items():
            self.set(key, value)

    def set(self, key, value):
        """Set a dotted key such as ``tol`` or ``drive.cos``; top-level keys are ``seed/out/workers``."""
        if key in ("seed", "workers"):
            try:
                setattr(self, key, int(value))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{key} must be an integer, got {value!r}") from exc
            return
        if key == "out":
            self.out = str(value)
            return
        if key == "kind":
            raise ConfigError("the experiment kind is chosen by the subcommand")
        parts = key.removeprefix("params.").split(".")
        node = self.params
        for part in parts[:-1]:
            if not isinstance(node.get(part), dict):
                raise ConfigError(f"unknown config key {key!r}")
            node = node[part]
        if parts[-1] not in node:
            raise ConfigError(f"unknown config key {key!r}")
        node[parts[-1]] = value

    def validate(self):
        p = self.params
        for key, value in p.items():
            if "tol" in key and not (isinstance(value, (int, float)) and value > 0):
                raise ConfigError(f"{key} must be a positive number, got {value!r}")
        try:
            zs = z_values(self)
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"bad z specification: {exc}") from exc
        if not zs:
            raise ConfigError("empty z grid")
        if any(z.imag == 0 for z in zs):
            raise ConfigError("z grid must avoid the real axis")
        if "drive" in p:
            try:
                drive_from_config(p["drive"])
            except (TypeError, ValueError, KeyError) as exc:
                raise ConfigError(f"bad drive: {exc}") from exc
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


@dataclass
class ResultRecord:
    experiment: str
    config_hash: str
    header: list
    rows: list
    wall_clock: float = 0.0
    config: dict = field(default_factory=dict)

    @property
    def all_passed(self):
        return all(row["passed"] for row in self.rows)

    def csv_text(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header)
        for row in self.rows:
            writer.writerow([_fmt(row.get(col)) for col in self.header])
        return buf.getvalue()

    def summary(self):
        return {
            "experiment": self.experiment,
            "config_hash": self.config_hash,
            "config": self.config,
            "n_rows": len(self.rows),
            "n_passed": sum(bool(r["passed"]) for r in self.rows),
            "all_passed": self.all_passed,
            "wall_clock_s": self.wall_clock,
            "finished_at": datetime.now(timezone.utc).isoformat(),
        }

    def write(self, out_dir):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"{self.experiment}.csv"
        csv_path.write_text(self.csv_text())
        summary_path = out / f"{self.experiment}.summary.json"
        summary_path.write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")
        return csv_path, summary_path


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, (set, frozenset)):
        return "|".join(sorted(value))
    return str(value)


def z_values(config):
    p = config.params
    if p.get("z_list") is not None:
        return [complex(float(re), float(im)) for re, im in p["z_list"]]
    grid = p["z_grid"]
    count = int(round((grid["re_min"] - grid["re_max"]) / -grid["step"])) + 1
    res = grid["re_min"] + grid["step"] * np.arange(count)
    return [complex(re, sign * im) for im in grid["im"] for sign in (1, -1) for re in res]


def drive_from_config(fields):
    return ff.DriveProfile.harmonic(
        period=float(fields["period"]),
        cos=fields.get("cos", ()),
        sin=fields.get("sin", ()),
        const=float(fields.get("const", 0.0)),
        n_t=int(fields.get("n_t", 1024)),
    )


def _map(fn, items, workers):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def finite_instances(n_seeds, base_seed, max_dim_t, max_dim_h, max_m, max_n):
    """Deterministic list of ``(model_seed, dim_T, dim_H, M, N)`` for the finite sweep."""
    out = []
    for i in range(n_seeds):
        rng = np.random.default_rng([base_seed, i])
        dim_t = int(rng.integers(2, max_dim_t + 1))
        dim_h = int(rng.integers(1, max_dim_h + 1))
        m = int(rng.integers(1, min(max_m, dim_t) + 1))
        n = int(rng.integers(1, min(max_n, dim_t) + 1))
        out.append((int(rng.integers(2**31)), dim_t, dim_h, m, n))
    return out


def _finite_verify(config):
    p = config.params
    zs = z_values(config)
    instances = finite_instances(
        p["n_seeds"], config.seed, p["max_dim_t"], p["max_dim_h"], p["max_m"], p["max_n"]
    )

    def one(inst):
        seed, dim_t, dim_h, m, n = inst
        model = tc.random_model(dim_t, dim_h, m, n, seed, hermitian=p["hermitian"])
        rows = []
        for z in zs:
            row = {"seed": seed, "dim_t": dim_t, "dim_h": dim_h, "m": m, "n": n,
                   "z_re": z.real, "z_im": z.imag, "error": ""}
            rep = tc.verify_karner(model, z, p["tol"])
            row.update(rel_residual=rep.rel_residual, factor_condition=rep.commutator_factor_condition,
                       flags=rep.flags)
            try:
                row["intermediate_residual"] = tc.verify_intermediate(model, z)
            except KarnerError as exc:
                row["intermediate_residual"] = float("nan")
                row["error"] = type(exc).__name__
            row["passed"] = rep.passed and row["intermediate_residual"] <= p["intermediate_tol"]
            rows.append(row)
        return rows

    return [row for rows in _map(one, instances, config.workers) for row in rows]


def _krein_table(config):
    tol = config.params["tol"]

    def one(z):
        row = {"z_re": z.real, "z_im": z.imag, "s0": abs(z.imag), "error": ""}
        try:
            tau = kb.tau_R0_tau(z)
            green = complex(kb.green0(0.0, 0.0, z))
            alpha = kb.alpha_bound(abs(z.imag))
            norm = kb.rank_one_norm(z)
        except KarnerError as exc:
            row.update(error=type(exc).__name__, passed=False)
            return row
        consistency = abs(tau - green) / max(1.0, abs(tau))
        row.update(
            tau_re=tau.real, tau_im=tau.imag, green00_re=green.real, green00_im=green.imag,
            consistency=consistency, rank_one_norm=norm, alpha=alpha,
            trace_bound_ok=abs(tau) <= alpha, norm_bound_ok=norm <= alpha / abs(z.imag),
        )
        row["passed"] = consistency <= tol and row["trace_bound_ok"] and row["norm_bound_ok"]
        return row

    return _map(one, z_values(config), config.workers)


def _truncation(p, k_max, n_max, drive):
    return ff.FloquetTruncation.build(k_max, n_max, period=drive.period, n_t=p.get("n_t"))


def _floquet_verify(config):
    p = config.params
    drive = drive_from_config(p["drive"])
    trunc = _truncation(p, p["k_max"], p["n_max"], drive)
    rows = []
    for z in z_values(config):
        row = {"z_re": z.real, "z_im": z.imag, "k_max": trunc.k_max, "n_max": trunc.n_max, "error": ""}
        try:
            rep = ff.verify_floquet_karner(drive, trunc, z, p["tol"], edge=p.get("edge"))
        except KarnerError as exc:
            row.update(error=type(exc).__name__, passed=False)
        else:
            row.update(
                rel_residual=rep.rel_residual,
                full_rel_residual=rep.info.get("full_rel_residual"),
                factor_condition=rep.commutator_factor_condition,
                validity_region=rep.info["validity_region"],
                flags=rep.flags,
                passed=rep.passed,
            )
        rows.append(row)
    return rows


def _bounds(config):
    p = config.params
    drive = drive_from_config(p["drive"])
    rows = []
    for k_max, n_max in p["ladder"]:
        trunc = _truncation(p, k_max, n_max, drive)
        for z in z_values(config):
            row = {"k_max": k_max, "n_max": n_max, "z_re": z.real, "z_im": z.imag, "error": ""}
            try:
                rep = ff.check_bounds(drive, trunc, z)
            except KarnerError as exc:
                row.update(error=type(exc).__name__, passed=False)
            else:
                row.update(
                    lambda_norm=rep.lambda_norm, lambda_bound=rep.lambda_bound,
                    commutator_norm=rep.commutator_norm, commutator_bound=rep.commutator_bound,
                    radius_ok=rep.radius_ok, commutator_condition_ok=rep.commutator_condition_ok, passed=rep.passed,
                )
            rows.append(row)
    return rows


def _convergence(config):
    p = config.params
    drive = drive_from_config(p["drive"])
    rows = []
    for z in z_values(config):
        previous = float("inf")
        for k_max, n_max in p["ladder"]:
            trunc = _truncation(p, k_max, n_max, drive)
            row = {"k_max": k_max, "n_max": n_max, "z_re": z.real, "z_im": z.imag, "error": ""}
            try:
                rep = ff.verify_floquet_karner(drive, trunc, z, p["tol"], edge=p.get("edge"))
            except KarnerError as exc:
                row.update(error=type(exc).__name__, passed=False)
                previous = float("inf")
            else:
                res = rep.rel_residual
                row.update(rel_residual=res, full_rel_residual=rep.info.get("full_rel_residual"),
                           decreasing=res < previous)
                row["passed"] = rep.passed and row["decreasing"]
                previous = res
            rows.append(row)
    return rows


_RUNNERS = {
    "finite-verify": _finite_verify,
    "krein-table": _krein_table,
    "floquet-verify": _floquet_verify,
    "bounds": _bounds,
    "convergence": _convergence,
}


def run(config):
    """Validate ``config``, run the experiment and return its :class:`ResultRecord`."""
    config.validate()
    start = time.perf_counter()
    rows = _RUNNERS[config.kind](config)
    elapsed = time.perf_counter() - start
    record = ResultRecord(config.kind, config.config_hash(), HEADERS[config.kind], rows, elapsed,
                          config.as_dict())
    log.info("%s: %d/%d rows passed in %.2fs", config.kind,
             sum(bool(r["passed"]) for r in rows), len(rows), elapsed)
    return record

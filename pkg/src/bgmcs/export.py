"""Flat-file writers: ``#``-headed CSV and stable-order JSON.

Floats are written with 17 significant digits so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import io
import json
from typing import Iterable, Sequence

import numpy as np

from .dynamics import AutocorrSeries, PeriodEstimate
from .fock_algebra import ModelParams
from .mcs_states import CoefficientTable
from .wavefunctions import DensityGrid

FLOAT_FORMAT = ".17g"


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ""
    return format(float(value), FLOAT_FORMAT)


def csv_text(columns: Sequence[str], rows: Iterable[Sequence], meta: dict | None = None) -> str:
    buf = io.StringIO()
    if meta is not None:
        buf.write("# " + json.dumps(meta, separators=(",", ":")) + "\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(obj, indent=1, ensure_ascii=False) + "\n"


def params_meta(params: ModelParams, drop_alpha: bool = False) -> dict:
    meta = params.to_dict()
    if drop_alpha:
        meta.pop("alpha")
    return meta


def table_csv(table: CoefficientTable) -> str:
    meta = params_meta(table.params)
    meta.update(norm_const=table.norm_const, tail_bound=table.tail_bound)
    rows = ((n, lv, c.real, c.imag) for n, lv, c in table.entries())
    return csv_text(["n", "level", "re", "im"], rows, meta)


def table_json(table: CoefficientTable) -> str:
    return json_text(table.to_dict())


def density_csv(grid: DensityGrid) -> str:
    meta = grid.metadata()
    return csv_text(["x", "rho"], zip(grid.xs, grid.rho), meta)


def density_json(grid: DensityGrid) -> str:
    return json_text({"metadata": grid.metadata(), "x": grid.xs.tolist(), "rho": grid.rho.tolist()})


def autocorr_csv(series: AutocorrSeries) -> str:
    rows = zip(series.ts, series.values.real, series.values.imag, series.fidelity)
    return csv_text(["t", "re", "im", "abs2"], rows, params_meta(series.params))


def autocorr_json(series: AutocorrSeries) -> str:
    return json_text({
        "params": params_meta(series.params),
        "t": series.ts.tolist(),
        "re": series.values.real.tolist(),
        "im": series.values.imag.tolist(),
        "abs2": series.fidelity.tolist(),
    })


def period_json(est: PeriodEstimate, params: ModelParams) -> str:
    return json_text({"params": params_meta(params), **est.to_dict()})


def period_csv(est: PeriodEstimate, params: ModelParams) -> str:
    d = est.to_dict()
    row = (d["tau_spectral"], d["tau_correlation"], d["bracket"][0], d["bracket"][1], d["mean_energy"], d["threshold"])
    return csv_text(["tau_spectral", "tau_correlation", "level_low", "level_high", "mean_energy", "threshold"],
                    [row], params_meta(params))

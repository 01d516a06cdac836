"""CSV datasets, scenario config files and report tables.

Numbers are written with 17 significant digits so that every float
round-trips exactly.
"""
import csv
import json
import math
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DataFormatError, DomainError
from .regression import Dataset
from .simulation import FixedPollution, RandomPollution, ScenarioSpec


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def fmt4(x):
    return format(float(x), ".4g") if isinstance(x, (float, np.floating, int)) else str(x)


def _read_rows(path):
    path = Path(path)
    if not path.is_file():
        raise DataFormatError(f"{path}: no such file")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or not any(c.strip() for c in rows[0]):
        raise DataFormatError(f"{path}: missing header row", row=0)
    header = [c.strip() for c in rows[0]]
    return header, rows[1:]


def predictor_names(path, response_column):
    header, _ = _read_rows(path)
    return [c for c in header if c != response_column]


def load_csv(path, response_column, min_rows=None):
    """Read a CSV with a header row into a Dataset.

    The named column becomes the response and every other column a
    predictor, in file order. ``min_rows`` defaults to p + 2; pass 0 for a
    non-probability file that may be empty. Data rows are numbered from 1.
    """
    header, rows = _read_rows(path)
    if response_column not in header:
        raise DataFormatError(f"{path}: response column {response_column!r} not in header {header}")
    if len(set(header)) != len(header):
        raise DataFormatError(f"{path}: duplicate column names in header")
    values = np.empty((len(rows), len(header)))
    for i, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise DataFormatError(f"{path}: row {i} has {len(row)} fields, expected {len(header)}", row=i)
        for j, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise DataFormatError(
                    f"{path}: row {i}, column {header[j]!r}: "
                    + ("missing value" if not cell.strip() else f"non-numeric value {cell!r}"),
                    row=i, column=header[j])
            if not math.isfinite(v):
                raise DataFormatError(f"{path}: row {i}, column {header[j]!r}: non-finite value {cell!r}",
                                      row=i, column=header[j])
            values[i - 1, j] = v
    r = header.index(response_column)
    X = np.delete(values, r, axis=1)
    p = X.shape[1]
    min_rows = p + 2 if min_rows is None else min_rows
    if len(rows) < min_rows:
        raise DataFormatError(f"{path}: {len(rows)} data rows, need at least {min_rows}")
    return Dataset(values[:, r], X)


def write_csv(data, path, response_column="y", names=None):
    names = names or [f"x{j + 1}" for j in range(data.p)]
    write_table(path, [response_column, *names],
                [[y, *x] for y, x in zip(data.responses, data.predictors)])


def write_table(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_json(path, tables):
    """``tables`` maps a name to (header, rows); written as lists of records."""
    doc = {name: [dict(zip(header, (_jsonable(v) for v in row))) for row in rows]
           for name, (header, rows) in tables.items()}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True, allow_nan=True)
        fh.write("\n")


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


# scenario config files: flat "key = value" lines, lists comma separated, '#' comments

_INT_KEYS = ("p", "n", "n1", "n2", "seed")
_FLOAT_KEYS = ("pairwise_corr", "noise_var_prob", "noise_var_target_np", "noise_var_polluted",
               "sigma_loc", "sigma_par")
_LIST_KEYS = ("mu0", "beta0", "mu_shift", "beta_polluted")


def parse_scenario(text, source="<string>"):
    kv = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataFormatError(f"{source}:{lineno}: expected 'key = value'", row=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key in kv:
            raise DataFormatError(f"{source}:{lineno}: duplicate key {key!r}", row=lineno)
        kv[key] = value
    try:
        get = {}
        for k in _INT_KEYS:
            if k in kv:
                get[k] = int(kv[k])
        for k in _FLOAT_KEYS:
            if k in kv:
                get[k] = float(kv[k])
        for k in _LIST_KEYS:
            if k in kv:
                get[k] = tuple(float(v) for v in kv[k].split(","))
    except ValueError as exc:
        raise DataFormatError(f"{source}: {exc}")
    known = set(_INT_KEYS + _FLOAT_KEYS + _LIST_KEYS + ("pollution_mode",))
    unknown = set(kv) - known
    if unknown:
        raise DataFormatError(f"{source}: unknown keys {sorted(unknown)}")
    mode = kv.get("pollution_mode", "")
    try:
        if mode == "fixed":
            pollution = FixedPollution(get.pop("mu_shift"), get.pop("beta_polluted"))
        elif mode == "random":
            pollution = RandomPollution(get.pop("sigma_loc"), get.pop("sigma_par"))
        else:
            raise DataFormatError(f"{source}: pollution_mode must be 'fixed' or 'random', got {mode!r}")
        for k in ("mu_shift", "beta_polluted", "sigma_loc", "sigma_par"):
            if k in get:
                raise DataFormatError(f"{source}: key {k!r} does not apply to pollution_mode {mode}")
        return ScenarioSpec(pollution=pollution, **get)
    except (KeyError, TypeError) as exc:
        raise DataFormatError(f"{source}: missing or invalid key {exc}")


def format_scenario(spec):
    lines = [f"p = {spec.p}", f"n = {spec.n}", f"n1 = {spec.n1}", f"n2 = {spec.n2}",
             "mu0 = " + ",".join(fmt(v) for v in spec.mu0),
             f"pairwise_corr = {fmt(spec.pairwise_corr)}",
             "beta0 = " + ",".join(fmt(v) for v in spec.beta0),
             f"noise_var_prob = {fmt(spec.noise_var_prob)}",
             f"noise_var_target_np = {fmt(spec.noise_var_target_np)}",
             f"noise_var_polluted = {fmt(spec.noise_var_polluted)}"]
    pol = spec.pollution
    if isinstance(pol, FixedPollution):
        lines += ["pollution_mode = fixed",
                  "mu_shift = " + ",".join(fmt(v) for v in pol.mu_shift),
                  "beta_polluted = " + ",".join(fmt(v) for v in pol.beta_polluted)]
    else:
        lines += ["pollution_mode = random", f"sigma_loc = {fmt(pol.sigma_loc)}",
                  f"sigma_par = {fmt(pol.sigma_par)}"]
    lines.append(f"seed = {spec.seed}")
    return "\n".join(lines) + "\n"


def builtin_scenarios():
    root = resources.files("extsample") / "scenarios"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def load_scenario(path_or_name):
    """Read a scenario file, or a shipped scenario by name (e.g. ``setting_b1``)."""
    path = Path(path_or_name)
    if path.is_file():
        return parse_scenario(path.read_text(encoding="utf-8"), str(path))
    res = resources.files("extsample") / "scenarios" / f"{path_or_name}.cfg"
    if res.is_file():
        return parse_scenario(res.read_text(encoding="utf-8"), f"{path_or_name}.cfg")
    raise DomainError(f"no scenario file or built-in scenario named {str(path_or_name)!r}; "
                      f"built-ins: {', '.join(builtin_scenarios())}")

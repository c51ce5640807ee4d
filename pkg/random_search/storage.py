from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Dict, Iterable, List, Sequence

try:
    import orjson
    HAS_ORJSON = True
except ImportError:
    HAS_ORJSON = False

from .constants import MANIFEST_NAME, OUTPUT_DIR
from .errors import ConfigError


def ensure_output_dir(out_dir: Path = OUTPUT_DIR) -> Path:
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"Cannot create output directory {out_dir}: {exc}") from exc
    return out_dir


def _sanitize(name: str) -> str:
    cleaned = name.strip()
    if not cleaned:
        return "run"
    return "".join(ch if ch.isalnum() or ch in {"-", "_"} else "_" for ch in cleaned)


def trial_csv_path(out_dir: Path, method: str, trial: int) -> Path:
    return Path(out_dir) / f"{_sanitize(method)}_trial{trial}.csv"


def aggregate_csv_path(out_dir: Path, method: str) -> Path:
    return Path(out_dir) / f"{_sanitize(method)}_agg.csv"


def _fmt(value) -> str:
    # repr keeps every float bit so files round-trip exactly
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    ensure_output_dir(path.parent)
    try:
        with path.open("w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise ConfigError(f"Cannot write {path}: {exc}") from exc
    return path


def write_dict_rows(path: Path, rows: List[Dict], fieldnames: Sequence[str]) -> Path:
    return write_rows(path, fieldnames, ([row[k] for k in fieldnames] for row in rows))


def write_trace_csv(path: Path, queries: Sequence[int], values: Sequence[float]) -> Path:
    rows = zip((int(q) for q in queries), (float(v) for v in values))
    return write_rows(path, ("queries", "f_true"), rows)


def write_curve_csv(path: Path, queries, mean, lo, hi) -> Path:
    rows = zip(
        (int(q) for q in queries),
        (float(v) for v in mean),
        (float(v) for v in lo),
        (float(v) for v in hi),
    )
    return write_rows(path, ("queries", "mean", "lo", "hi"), rows)


def read_curve_csv(path: Path) -> Dict[str, List[float]]:
    path = Path(path)
    out: Dict[str, List[float]] = {"queries": [], "mean": [], "lo": [], "hi": []}
    with path.open("r", encoding="utf-8", newline="") as f:
        for row in csv.DictReader(f):
            out["queries"].append(int(row["queries"]))
            for key in ("mean", "lo", "hi"):
                out[key].append(float(row[key]))
    return out


def read_trace_csv(path: Path) -> Dict[str, List[float]]:
    out: Dict[str, List[float]] = {"queries": [], "f_true": []}
    with Path(path).open("r", encoding="utf-8", newline="") as f:
        for row in csv.DictReader(f):
            out["queries"].append(int(row["queries"]))
            out["f_true"].append(float(row["f_true"]))
    return out


def save_manifest(manifest: Dict, out_dir: Path, name: str = MANIFEST_NAME) -> Path:
    path = ensure_output_dir(out_dir) / name
    if HAS_ORJSON:
        path.write_bytes(orjson.dumps(manifest, option=orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2))
    else:
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8")
    return path


def load_manifest(path: Path) -> Dict:
    path = Path(path)
    if HAS_ORJSON:
        return orjson.loads(path.read_bytes())
    with path.open("r", encoding="utf-8") as f:
        return json.load(f)

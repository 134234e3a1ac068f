"""
Deterministic CSV / JSON output and run manifests.

Numbers are written as the shortest decimal that round-trips (repr), booleans as
true/false and missing values as empty cells, so reruns give byte-identical files.
"""
import csv
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from loguru import logger

from src.config.settings import TOOL_VERSION
from src.core.models.results import RunManifest, SpectrumCurve, SweepResult

Writable = Union[SweepResult, SpectrumCurve, Sequence[SpectrumCurve], Sequence[Mapping[str, Any]]]


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _rows_and_columns(result: Writable, columns: Optional[Sequence[str]]) -> Tuple[List[str], List[Mapping[str, Any]]]:
    if isinstance(result, SweepResult):
        return list(columns or result.columns), result.to_rows()
    if isinstance(result, SpectrumCurve):
        rows = result.to_rows()
    else:
        rows = []
        for item in result:
            rows.extend(item.to_rows() if isinstance(item, SpectrumCurve) else [item])
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    return list(columns), rows


def write_csv(result: Writable, path: Union[str, Path], columns: Optional[Sequence[str]] = None) -> Path:
    """
    Writes a header row plus one row per record in grid order; UTF-8 with \\n line endings.

    Raises:
        OSError: The file cannot be written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header, rows = _rows_and_columns(result, columns)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(row.get(name)) for name in header])
    logger.info(f"wrote {len(rows)} row(s) to {path}")
    return path


def write_json(result: Writable, path: Union[str, Path], columns: Optional[Sequence[str]] = None) -> Path:
    """JSON mirror of write_csv: a list of row objects in the same order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header, rows = _rows_and_columns(result, columns)
    payload = [{name: row.get(name) for name in header} for row in rows]
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    logger.info(f"wrote {len(payload)} record(s) to {path}")
    return path


def manifest_path(output: Union[str, Path]) -> Path:
    output = Path(output)
    return output.with_name(f"{output.stem}.manifest.json")


def write_manifest(
    command: str,
    params: Dict[str, Any],
    outputs: Sequence[Union[str, Path]],
    errors: Optional[Dict[str, int]] = None,
    options: Optional[Dict[str, Any]] = None,
) -> Path:
    """Writes <stem>.manifest.json next to the first output file."""
    manifest = RunManifest(
        command=command,
        params=params,
        tool_version=TOOL_VERSION,
        outputs=tuple(str(Path(p).name) for p in outputs),
        errors=dict(errors or {}),
        options=dict(options or {}),
        created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )
    path = manifest_path(outputs[0])
    path.write_text(json.dumps(manifest.to_dict(), indent=2) + "\n", encoding="utf-8")
    logger.debug(f"wrote manifest {path}")
    return path

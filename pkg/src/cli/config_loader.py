"""
Reading parameter files and applying command-line overrides.
"""
import json
from pathlib import Path
from typing import Optional, Union

from loguru import logger
from pydantic import ValidationError as PydanticValidationError

from src.core.errors import ConfigParseError, MissingField, UnknownField
from src.core.models.params import SystemParams, prescribe_ga, with_delta


def _line_of(text: str, field: str) -> Optional[int]:
    """1-based line of the first occurrence of a JSON key, if any."""
    key = f'"{field.split(".")[-1]}"'
    for number, line in enumerate(text.splitlines(), start=1):
        if key in line:
            return number
    return None


def load_config(path: Union[str, Path]) -> SystemParams:
    """
    Parses a JSON parameter document into SystemParams.

    Args:
        path: Path to the JSON file

    Returns:
        SystemParams (not yet validated against the physical invariants)

    Raises:
        MissingField: A required field is absent
        UnknownField: The document carries a field SystemParams does not define
        ConfigParseError: The file cannot be read or is not valid JSON / has a bad value
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigParseError(f"cannot read config: {e.strerror or e}", path=str(path)) from e

    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigParseError(f"invalid JSON: {e.msg}", path=str(path), line=e.lineno) from e
    if not isinstance(data, dict):
        raise ConfigParseError("top level must be a JSON object", path=str(path), line=1)

    try:
        params = SystemParams.model_validate(data)
    except PydanticValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"])
        if first["type"] == "missing":
            raise MissingField(field, path=str(path)) from e
        if first["type"] == "extra_forbidden":
            raise UnknownField(field, path=str(path)) from e
        raise ConfigParseError(
            first["msg"], path=str(path), line=_line_of(text, field), field=field
        ) from e

    logger.debug(f"loaded parameters from {path} ({params.mode_name} mode)")
    return params


def apply_overrides(
    params: SystemParams,
    ga: Optional[float] = None,
    delta: Optional[float] = None,
) -> SystemParams:
    """
    Applies flag overrides after the file load; flags beat file values.

    --ga switches to PrescribedGa at the given |G_a|, keeping the mode's detuning;
    --delta replaces the detuning value of whatever mode is active.
    """
    if delta is not None:
        params = with_delta(params, delta)
    if ga is not None:
        params = prescribe_ga(params, ga)
    return params

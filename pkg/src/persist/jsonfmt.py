"""JSON rendering with fixed-point floats.

Reports and history files print every float with exactly six decimals, so
identical runs produce byte-identical files.
"""
import json
import math
from pathlib import Path
from typing import Any, Optional, Union

from src.errors import NumericError


DECIMALS = 6


def _scalar(value: Any, decimals: int) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise NumericError(f"cannot serialize non-finite value {value}")
        return f"{value:.{decimals}f}"
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    # numpy scalars and the like
    if hasattr(value, "item"):
        return _scalar(value.item(), decimals)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _is_scalar(value: Any) -> bool:
    return not isinstance(value, (dict, list, tuple))


def _render(value: Any, indent: Optional[int], level: int, decimals: int) -> str:
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{json.dumps(str(k))}: {_render(v, indent, level + 1, decimals)}" for k, v in value.items()]
    elif isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [_render(v, indent, level + 1, decimals) for v in value]
        if indent is None or all(_is_scalar(v) for v in value):
            return "[" + ", ".join(items) + "]"
    else:
        return _scalar(value, decimals)

    open_, close = ("{", "}") if isinstance(value, dict) else ("[", "]")
    if indent is None:
        return open_ + ", ".join(items) + close
    pad = " " * (indent * (level + 1))
    end_pad = " " * (indent * level)
    return open_ + "\n" + ",\n".join(pad + item for item in items) + "\n" + end_pad + close


def dumps_fixed(value: Any, indent: Optional[int] = 2, decimals: int = DECIMALS) -> str:
    """Serialize dicts/lists/scalars, keeping key order and fixed-point floats."""
    return _render(value, indent, 0, decimals)


def write_fixed(value: Any, path: Union[str, Path], indent: Optional[int] = 2) -> None:
    """Write ``dumps_fixed(value)`` plus a trailing newline."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_fixed(value, indent=indent) + "\n", encoding="utf-8")

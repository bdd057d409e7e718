"""Helpers shared by the pipeline management commands."""
from __future__ import annotations

import json
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator

from django.core.management.base import CommandError

from lode_app.exceptions import LodeError
from lode_app.fitting import FitParams, default_params, load_params


@contextmanager
def pipeline_errors() -> Iterator[None]:
    """Translate pipeline errors into ``CommandError`` with the matching exit code."""
    try:
        yield
    except LodeError as exc:
        raise CommandError(str(exc), returncode=exc.exit_code) from exc
    except OSError as exc:
        raise CommandError(str(exc), returncode=1) from exc


def params_option(path: str | None) -> FitParams:
    return load_params(path) if path else default_params()


def dump(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True)


def ensure_parent(path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path

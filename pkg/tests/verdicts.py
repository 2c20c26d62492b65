"""Collects one PASS/FAIL verdict per acceptance criterion for the terminal summary."""

from __future__ import annotations

from contextlib import contextmanager

VERDICTS: dict[int, tuple[bool, str, str]] = {}


@contextmanager
def criterion(number: int, title: str):
    try:
        yield
    except BaseException as exc:
        text = str(exc).strip()
        VERDICTS[number] = (False, title, text.splitlines()[0] if text else type(exc).__name__)
        raise
    VERDICTS[number] = (True, title, "")

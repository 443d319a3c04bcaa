"""Run reports: line-oriented key-value text, diffable in CI.

Every report embeds the tool version and the fully resolved run
configuration. The structured format is `key\\tvalue`, one per line, with
a stable key order; the human format is the same rows aligned for eyes.
"""

from __future__ import annotations

from . import __version__

STRUCTURED = "structured"
HUMAN = "human"
FORMATS = (STRUCTURED, HUMAN)

Rows = list[tuple[str, object]]


def format_value(value: object) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "-"
    return str(value)


def build_rows(command: str, config: dict[str, object], items: Rows) -> Rows:
    rows: Rows = [
        ("tool.name", "dataforge"),
        ("tool.version", __version__),
        ("command", command),
    ]
    rows.extend((f"config.{k}", v) for k, v in sorted(config.items()))
    rows.extend(items)
    return rows


def render(rows: Rows, fmt: str = STRUCTURED) -> str:
    if fmt == STRUCTURED:
        return "\n".join(f"{k}\t{format_value(v)}" for k, v in rows) + "\n"
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(width)}  {format_value(v)}" for k, v in rows) + "\n"

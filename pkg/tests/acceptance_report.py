"""Shared registry for acceptance-criterion result lines.

The acceptance tests append one line per criterion; the conftest terminal
summary prints them after the run so the verdicts survive output capture.
"""

lines: list[str] = []


def record(line: str) -> None:
    lines.append(line)

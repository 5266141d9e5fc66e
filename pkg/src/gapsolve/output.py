"""Atomic file emission and the per-run manifest."""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field


def atomic_write_text(path: str, text: str) -> None:
    """Write-then-rename so partial files never appear under the target name."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".gapsolve-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


@dataclass
class RunManifest:
    """Record of one CLI run: resolved parameters, outputs, timing, status."""

    command: str
    parameters: dict
    outputs: list[str] = field(default_factory=list)
    wall_time: float = 0.0
    status: str = "ok"
    message: str = ""

    def to_json(self) -> str:
        return json.dumps(
            {
                "command": self.command,
                "parameters": self.parameters,
                "outputs": self.outputs,
                "wall_time": self.wall_time,
                "status": self.status,
                "message": self.message,
            },
            sort_keys=True, indent=2,
        ) + "\n"

    def write(self, path: str) -> None:
        self.outputs = sorted(set(self.outputs))
        atomic_write_text(path, self.to_json())

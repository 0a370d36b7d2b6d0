"""Named residual reports, the common currency of checks and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Report:
    """Ordered map of identity name -> nonnegative residual (sup norm)."""

    name: str
    residuals: dict[str, float] = field(default_factory=dict)
    notes: dict[str, str] = field(default_factory=dict)

    def record(self, key: str, value: float, note: str | None = None) -> None:
        v = float(abs(value))
        self.residuals[key] = v
        if note is not None:
            self.notes[key] = note

    def merge(self, other: "Report", prefix: str = "") -> None:
        for k, v in other.residuals.items():
            self.residuals[prefix + k] = v
        for k, v in other.notes.items():
            self.notes[prefix + k] = v

    def max_residual(self) -> float:
        return max(self.residuals.values()) if self.residuals else 0.0

    def passes(self, tol: float) -> bool:
        return all(v <= tol for v in self.residuals.values())

    def to_dict(self, tol: float | None = None) -> dict:
        checks = []
        for k, v in self.residuals.items():
            entry: dict = {"name": k, "residual": v}
            if tol is not None:
                entry["pass"] = bool(v <= tol)
            if k in self.notes:
                entry["note"] = self.notes[k]
            checks.append(entry)
        out: dict = {"name": self.name, "checks": checks}
        if tol is not None:
            out["tolerance"] = tol
            out["pass"] = self.passes(tol)
        return out

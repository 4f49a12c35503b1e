"""Residual reports shared by all verifiers."""

from __future__ import annotations

from dataclasses import dataclass, field

from .graded import BigradedModule, Vec


@dataclass
class Residual:
    equation: str
    i: int
    r: int
    inputs: tuple
    value: Vec


@dataclass
class Report:
    name: str
    checked: int = 0
    residuals: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.residuals

    def merge(self, other: "Report") -> "Report":
        self.checked += other.checked
        self.residuals += other.residuals
        self.notes += other.notes
        return self

    def to_json(self, module: BigradedModule | None = None, limit: int = 20,
                input_module: BigradedModule | None = None):
        """Residual values are formatted in `module`, inputs in `input_module` (default `module`)."""
        src = input_module or module
        res = []
        for x in self.residuals[:limit]:
            item = {"equation": x.equation, "i": x.i, "r": x.r}
            item["inputs"] = [_fmt_label(l, src, module) for l in x.inputs]
            home = next((m for m in (module, src) if m is not None and all(m.has(l) for l in x.value)), None)
            if home is not None:
                item["value"] = home.fmt_vec(x.value)
            else:
                item["value"] = {repr(k): str(v) for k, v in sorted(x.value.items())}
            res.append(item)
        return {
            "name": self.name,
            "status": "pass" if self.ok else "fail",
            "checked": self.checked,
            "residual_count": len(self.residuals),
            "residuals": res,
            "notes": list(self.notes),
        }


def _fmt_label(label, *modules) -> str:
    for m in modules:
        if m is not None and m.has(label):
            return m.fmt(label)
    return repr(label)

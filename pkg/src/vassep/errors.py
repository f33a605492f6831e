"""Structured error type shared by all modules."""

from __future__ import annotations


class VassepError(Exception):
    """An error carrying a stable machine-readable code.

    The CLI maps resource-cap codes to exit status 2.
    """

    RESOURCE_CODES = frozenset(
        {"DIMENSION_LIMIT", "FM_BLOWUP", "NODE_CAP_EXCEEDED", "CYCLE_CAP_EXCEEDED", "SEARCH_EXHAUSTED"}
    )

    def __init__(self, code: str, message: str = "", **details):
        self.code = code
        self.message = message or code
        self.details = details
        super().__init__(f"{code}: {self.message}")

    @property
    def is_resource_cap(self) -> bool:
        return self.code in self.RESOURCE_CODES

    def to_dict(self) -> dict:
        out = {"error": self.code, "message": self.message}
        for k, v in self.details.items():
            out[k] = v if isinstance(v, (int, str, bool, float, type(None), list, dict)) else str(v)
        return out

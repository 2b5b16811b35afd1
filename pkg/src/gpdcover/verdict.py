from dataclasses import dataclass, field


@dataclass(frozen=True)
class Verdict:
    """Outcome of a check: truthy iff ``ok``, with human-readable witnesses on failure."""

    ok: bool
    witnesses: tuple = field(default_factory=tuple)

    def __bool__(self):
        return self.ok

    @classmethod
    def from_witnesses(cls, witnesses):
        witnesses = tuple(witnesses)
        return cls(not witnesses, witnesses)

    def to_json(self):
        return {"ok": self.ok, "witnesses": list(self.witnesses)}

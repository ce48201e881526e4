"""Built-in corpus of annotated polynomials."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources

from .polynomial import IntPolynomial, parse_polynomial


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    text: str
    vars: tuple[str, ...]
    n: int
    d: int
    s: int
    sigma: Fraction
    kappa: int
    nondegeneracy: str
    provenance: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def polynomial(self) -> IntPolynomial:
        return parse_polynomial(self.text, self.vars)

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "vars": list(self.vars),
            "n": self.n,
            "d": self.d,
            "s": self.s,
            "sigma": f"{self.sigma.numerator}/{self.sigma.denominator}",
            "kappa": self.kappa,
            "nondegeneracy": self.nondegeneracy,
            "provenance": dict(self.provenance),
        }


@lru_cache(maxsize=1)
def builtin_corpus() -> tuple[CorpusEntry, ...]:
    raw = json.loads(resources.files("expsums").joinpath("data/corpus.json").read_text())
    out = []
    for e in raw["entries"]:
        out.append(CorpusEntry(e["id"], e["text"], tuple(e["vars"]), e["n"], e["d"], e["s"],
                               Fraction(e["sigma"]), e["kappa"], e["nondegeneracy"], e.get("provenance", {})))
    return tuple(out)


def corpus_entry(entry_id: str) -> CorpusEntry:
    for e in builtin_corpus():
        if e.id == entry_id:
            return e
    raise KeyError(f"no corpus entry {entry_id!r}")

"""Experiment configuration and orchestration.

A config is an INI file::

    [experiment]
    polynomials = builtin:gauss, builtin:diag3_n2, mine
    characters = max_over_all          ; or: fixed
    bounds = trivial, conjecture1, deligne_squarefree
    eps = 0

    [moduli]
    plan = prime_powers                ; primes_up_to | prime_powers | explicit
    max_prime = 7                      ;   | squarefree_up_to | d2free_up_to
    max_exponent = 3

    [caps]
    terms = 2000000
    oracle_terms = 200000
    time_budget = 600

    [output]
    dir = results
    formats = csv, json

    [polynomial:mine]
    text = x^2 + 3*y^2
    vars = x, y
    s = 0

Every (polynomial, modulus) instance yields one row of sums.csv and one
verdict row per applicable bound in verdicts.csv; summary.json collects
invariants, exponent fits, skipped instances and hard failures.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Sequence

from . import bounds as B
from . import engine, kernels
from .arith import factorize, is_power_free, prime_power, prime_powers_up_to, primes_up_to
from .bounds import BoundName
from .corpus import builtin_corpus
from .locus import InconsistentDimension, critical_residues, estimate_s, is_good_prime
from .newton import NewtonData, Verdict, newton_data
from .polynomial import IntPolynomial, PolynomialSyntaxError, parse_polynomial, render_polynomial, top_form

log = logging.getLogger("expsums")

FLOAT_FORMAT = ".12g"
SUM_COLUMNS = ["f_id", "f", "N", "u", "re", "im", "magnitude", "err", "method", "terms"]
VERDICT_COLUMNS = ["bound", "name", "f_id", "N", "u_max", "predicted", "observed", "ratio", "pass"]
PLAN_KINDS = ("primes_up_to", "prime_powers", "explicit", "squarefree_up_to", "d2free_up_to")
EPS_SIDE = 0.05


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PolySpec:
    id: str
    text: str
    vars: tuple[str, ...]
    s_override: int | None = None

    def polynomial(self) -> IntPolynomial:
        return parse_polynomial(self.text, self.vars)


@dataclass(frozen=True)
class ModulusPlan:
    kind: str
    limit: int = 0
    max_prime: int = 0
    max_exponent: int = 1
    values: tuple[int, ...] = ()

    def moduli(self, d: int | None = None) -> list[int]:
        if self.kind == "primes_up_to":
            return primes_up_to(self.limit)
        if self.kind == "prime_powers":
            out = []
            for p in primes_up_to(self.max_prime):
                out += [p**m for m in range(1, self.max_exponent + 1)]
            return sorted(out)
        if self.kind == "explicit":
            return sorted(set(self.values))
        if self.kind == "squarefree_up_to":
            return [N for N in range(2, self.limit + 1) if is_power_free(N, 2)]
        if self.kind == "d2free_up_to":
            k = (d if d is not None else 2) + 2
            return [N for N in range(2, self.limit + 1) if is_power_free(N, k)]
        raise ConfigError(f"unknown modulus plan {self.kind!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    polynomials: tuple[PolySpec, ...]
    modulus_plan: ModulusPlan
    characters: str = "max_over_all"
    bounds: tuple[BoundName, ...] = (BoundName.TRIVIAL,)
    eps: float = 0.0
    term_cap: int = 2_000_000
    oracle_terms: int = 200_000
    time_budget: float = 600.0
    tolerance: float = engine.DEFAULT_TOLERANCE
    out_dir: str = "results"
    formats: tuple[str, ...] = ("csv", "json")
    name: str = "experiment"

    def validate(self) -> None:
        if not self.polynomials:
            raise ConfigError("no polynomials configured")
        if self.characters not in ("max_over_all", "fixed"):
            raise ConfigError(f"characters must be max_over_all or fixed, not {self.characters!r}")
        for fmt in self.formats:
            if fmt not in ("csv", "json"):
                raise ConfigError(f"unknown output format {fmt!r}")
        seen = set()
        for spec in self.polynomials:
            if spec.id in seen:
                raise ConfigError(f"duplicate polynomial id {spec.id!r}")
            seen.add(spec.id)
            try:
                f = spec.polynomial()
            except PolynomialSyntaxError as exc:
                raise ConfigError(f"polynomial {spec.id!r}: {exc}") from exc
            except ValueError as exc:
                raise ConfigError(f"polynomial {spec.id!r}: {exc}") from exc
            if f.degree < 2:
                raise ConfigError(f"polynomial {spec.id!r} has degree {f.degree}; degree >= 2 is required")
            if spec.s_override is not None and not 0 <= spec.s_override <= f.nvars - 1:
                raise ConfigError(f"polynomial {spec.id!r}: s = {spec.s_override} outside [0, n-1]")
        moduli = set()
        for spec in self.polynomials:
            moduli.update(self.modulus_plan.moduli(spec.polynomial().degree))
        if not moduli:
            raise ConfigError("the modulus plan is empty")
        for b in self.bounds:
            if not any(B.plan_admits(b, N) for N in moduli):
                raise ConfigError(f"bound {b.value} is not applicable to any modulus of the plan")


def _split_list(text: str) -> list[str]:
    return [t.strip() for t in text.replace("\n", ",").split(",") if t.strip()]


def parse_config(text: str, base_dir: Path | None = None) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    if not cp.has_section("experiment"):
        raise ConfigError("missing [experiment] section")
    ex = cp["experiment"]
    custom = {}
    for section in cp.sections():
        if section.startswith("polynomial:"):
            pid = section.split(":", 1)[1].strip()
            sec = cp[section]
            if "text" not in sec:
                raise ConfigError(f"[{section}] needs text")
            names = _split_list(sec.get("vars", ""))
            if not names:
                raise ConfigError(f"[{section}] needs vars")
            s = sec.get("s")
            custom[pid] = PolySpec(pid, sec["text"], tuple(names), int(s) if s not in (None, "") else None)
    corpus = {e.id: e for e in builtin_corpus()}
    polys = []
    for item in _split_list(ex.get("polynomials", "")):
        if item == "builtin:*":
            polys += [PolySpec(e.id, e.text, e.vars, e.s) for e in corpus.values()]
        elif item.startswith("builtin:"):
            key = item.split(":", 1)[1]
            if key not in corpus:
                raise ConfigError(f"unknown builtin polynomial {key!r}")
            e = corpus[key]
            polys.append(PolySpec(e.id, e.text, e.vars, e.s))
        elif item in custom:
            polys.append(custom[item])
        else:
            raise ConfigError(f"polynomial {item!r} has no [polynomial:{item}] section")
    mod = cp["moduli"] if cp.has_section("moduli") else {}
    kind = mod.get("plan", "primes_up_to")
    if kind not in PLAN_KINDS:
        raise ConfigError(f"unknown modulus plan {kind!r}")
    try:
        plan = ModulusPlan(
            kind,
            limit=int(mod.get("limit", 0)),
            max_prime=int(mod.get("max_prime", 0)),
            max_exponent=int(mod.get("max_exponent", 1)),
            values=tuple(int(v) for v in _split_list(mod.get("values", ""))),
        )
        caps = cp["caps"] if cp.has_section("caps") else {}
        out = cp["output"] if cp.has_section("output") else {}
        bounds = tuple(BoundName(b) for b in _split_list(ex.get("bounds", "trivial")))
        out_dir = out.get("dir", "results")
        if base_dir is not None and not Path(out_dir).is_absolute():
            out_dir = str(base_dir / out_dir)
        cfg = ExperimentConfig(
            polynomials=tuple(polys),
            modulus_plan=plan,
            characters=ex.get("characters", "max_over_all"),
            bounds=bounds,
            eps=float(ex.get("eps", 0)),
            term_cap=int(float(caps.get("terms", 2_000_000))),
            oracle_terms=int(float(caps.get("oracle_terms", 200_000))),
            time_budget=float(caps.get("time_budget", 600)),
            tolerance=float(ex.get("tolerance", engine.DEFAULT_TOLERANCE)),
            out_dir=out_dir,
            formats=tuple(_split_list(out.get("formats", "csv, json"))),
            name=ex.get("name", "experiment"),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"config value error: {exc}") from exc
    cfg.validate()
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def default_config_text() -> str:
    return resources.files("expsums").joinpath("data/default.ini").read_text()


def default_config() -> ExperimentConfig:
    return parse_config(default_config_text())


# ---------------------------------------------------------------------------
# per-polynomial invariants


@dataclass
class PolyContext:
    spec: PolySpec
    f: IntPolynomial
    n: int
    d: int
    s: int | None
    s_source: str
    newton: NewtonData | None
    homogeneous: bool
    locus_record: dict = field(default_factory=dict)
    good: dict = field(default_factory=dict)

    def good_prime(self, p: int) -> bool:
        if p not in self.good:
            self.good[p] = is_good_prime(self.f, p, smooth=(self.s == 0))
        return self.good[p]


def _prepare(spec: PolySpec) -> PolyContext:
    f = spec.polynomial()
    fd = top_form(f)
    s, source, record = spec.s_override, "override", {}
    try:
        locus = estimate_s(fd, override=spec.s_override)
        record = locus.to_record()
        if s is None:
            s, source = locus.s_estimate, "estimate"
    except InconsistentDimension as exc:
        log.warning("%s: %s", spec.id, exc)
        record = {"error": str(exc)}
        if s is None:
            source = "unknown"
    nd = None
    try:
        nd = newton_data(f)
    except ValueError as exc:
        log.warning("%s: no Newton data (%s)", spec.id, exc)
    return PolyContext(spec, f, f.nvars, f.degree, s, source, nd, f.is_homogeneous(), record)


# ---------------------------------------------------------------------------
# instances


@dataclass
class InstanceResult:
    f_id: str
    f_text: str
    N: int
    result: engine.ExpSumResult
    verdicts: list[B.BoundVerdict]
    failures: list[str]

    def sum_record(self) -> dict:
        rec = self.result.to_record(self.f_text)
        rec["f_id"] = self.f_id
        return rec


def _applicable(ctx: PolyContext, name: BoundName, N: int) -> float | None:
    """Predicted value for bound ``name`` at N, or None if it does not apply."""
    n, d, s = ctx.n, ctx.d, ctx.s
    if name is BoundName.TRIVIAL:
        return B.bound_trivial()
    if s is None:
        return None
    pp = prime_power(N)
    if name is BoundName.CONJECTURE1:
        return B.bound_conjecture1(n, s, d, N, 0.0)
    if name is BoundName.IGUSA_HOMOG:
        if ctx.homogeneous and s == 0 and pp and ctx.good_prime(pp[0]):
            # E(p^m) = p^{-n} E(p^{m-d}) for smooth forms, so m = 1 mod d inherits the m = 1 constant
            if pp[1] % d == 1 and not B.igusa_m1_covered(n, d, pp[0]):
                return None
            return B.bound_igusa_homog(n, d, pp[0], pp[1])
        return None
    if name is BoundName.DELIGNE_SQUAREFREE:
        if N > 1 and is_power_free(N, 2) and all(ctx.good_prime(p) for p, _ in factorize(N)):
            return B.bound_deligne_product(n, s, d, N)
        return None
    if name is BoundName.CUBEFREE:
        if pp and pp[1] == 2 and ctx.good_prime(pp[0]):
            return B.bound_cubefree(n, s, d, pp[0])
        return None
    if name is BoundName.D2FREE:
        if is_power_free(N, d + 2):
            return B.bound_d2free(n, s, d, N)
        return None
    if name is BoundName.NEWTON_CAN:
        nd = ctx.newton
        if (pp and pp[1] >= 2 and nd is not None
                and nd.nondegenerate in (Verdict.CERTIFIED_NONDEGENERATE, Verdict.HEURISTIC_NONDEGENERATE)):
            return B.bound_newton(nd.sigma, nd.kappa, pp[0], pp[1])
        return None
    return None


def _run_instance(ctx: PolyContext, N: int, cfg: ExperimentConfig) -> InstanceResult:
    f, n = ctx.f, ctx.n
    tol = cfg.tolerance
    failures = []
    if cfg.characters == "max_over_all":
        mx = engine.max_over_characters(f, N, cap=cfg.term_cap)
        res = mx.as_result()
    else:
        res = engine.expsum(f, N, 1, cap=cfg.term_cap)
    u = res.u
    # CRT multiplicativity: per-factor single-character evaluation
    if N > 1:
        factors = engine.crt_split(N, res.char)
        prod = 1.0
        for q, c in factors:
            prod *= engine.expsum(f, q, c, cap=cfg.term_cap).magnitude
        if abs(prod - res.magnitude) > tol + res.abs_error_bound:
            failures.append(f"crt: |E| {res.magnitude!r} vs product {prod!r}")
    # oracle equivalence where the direct sum is affordable
    if N**n <= cfg.oracle_terms:
        ora = engine.expsum_oracle(f, N, u, cap=None)
        if abs(ora.value - res.value) > tol + res.abs_error_bound:
            failures.append(f"oracle: {res.value!r} vs {ora.value!r}")
    if res.abs_error_bound > tol:
        failures.append(f"error bound {res.abs_error_bound!r} exceeds tolerance")
    verdicts = []
    for name in cfg.bounds:
        predicted = _applicable(ctx, name, N)
        if predicted is None:
            continue
        if name is BoundName.CONJECTURE1 and cfg.eps:
            predicted = B.bound_conjecture1(n, ctx.s, ctx.d, N, cfg.eps)
        spec = B.bound_spec(name, n, ctx.s if ctx.s is not None else 0, ctx.d,
                            ctx.newton.sigma if ctx.newton else None)
        v = B.make_verdict(spec, ctx.spec.id, render_polynomial(f, ctx.spec.vars), N, u, predicted,
                           res.magnitude, res.abs_error_bound, cfg.characters == "max_over_all")
        verdicts.append(v)
        if v.hard_failure:
            failures.append(f"bound {name.value}: observed {v.observed!r} > predicted {v.predicted!r}")
    return InstanceResult(ctx.spec.id, render_polynomial(f, ctx.spec.vars), N, res, verdicts, failures)


# ---------------------------------------------------------------------------
# report


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, FLOAT_FORMAT)
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _csv_text(columns: Sequence[str], rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def _json_safe(obj):
    if isinstance(obj, float):
        if math.isinf(obj) or math.isnan(obj):
            return str(obj)
        return float(format(obj, FLOAT_FORMAT))
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


@dataclass
class RunReport:
    config: ExperimentConfig
    instances: list[InstanceResult]
    skipped: list[dict]
    contexts: list[PolyContext]
    fits: dict

    @property
    def failures(self) -> list[str]:
        out = []
        for inst in self.instances:
            out += [f"{inst.f_id} N={inst.N}: {msg}" for msg in inst.failures]
        return out

    @property
    def ok(self) -> bool:
        return not self.failures

    def sums_rows(self) -> list[dict]:
        return [i.sum_record() for i in self.instances]

    def verdict_rows(self) -> list[dict]:
        return [v.to_record() for i in self.instances for v in i.verdicts]

    def sums_csv(self) -> str:
        return _csv_text(SUM_COLUMNS, self.sums_rows())

    def verdicts_csv(self) -> str:
        return _csv_text(VERDICT_COLUMNS, self.verdict_rows())

    def summary(self) -> dict:
        bound_sup: dict = {}
        for inst in self.instances:
            for v in inst.verdicts:
                key = f"{v.f_id}:{v.bound.name.value}"
                bound_sup[key] = max(bound_sup.get(key, 0.0), v.ratio)
        eps_side = {}
        for ctx in self.contexts:
            if ctx.s is None:
                continue
            ratios = [i.result.magnitude / B.bound_conjecture1(ctx.n, ctx.s, ctx.d, i.N, EPS_SIDE)
                      for i in self.instances if i.f_id == ctx.spec.id]
            if ratios:
                eps_side[ctx.spec.id] = max(ratios)
        polys = []
        for ctx in self.contexts:
            polys.append({
                "id": ctx.spec.id,
                "f": render_polynomial(ctx.f, ctx.spec.vars),
                "n": ctx.n,
                "d": ctx.d,
                "s": ctx.s,
                "s_source": ctx.s_source,
                "locus": ctx.locus_record,
                "newton": ctx.newton.to_record() if ctx.newton else None,
            })
        return _json_safe({
            "name": self.config.name,
            "characters": self.config.characters,
            "instances": len(self.instances),
            "verdicts": len(self.verdict_rows()),
            "polynomials": polys,
            "fits": self.fits,
            "bound_sup_ratio": dict(sorted(bound_sup.items())),
            "conjecture1_sup_ratio_eps_0.05": dict(sorted(eps_side.items())),
            "skipped": self.skipped,
            "failures": self.failures,
            "ok": self.ok,
        })

    def write(self, out_dir: str | Path | None = None) -> list[Path]:
        out = Path(out_dir if out_dir is not None else self.config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        if "csv" in self.config.formats:
            for name, text in (("sums.csv", self.sums_csv()), ("verdicts.csv", self.verdicts_csv())):
                (out / name).write_text(text)
                written.append(out / name)
        if "json" in self.config.formats:
            (out / "summary.json").write_text(json.dumps(self.summary(), indent=2, sort_keys=False) + "\n")
            written.append(out / "summary.json")
        return written


def run_experiment(cfg: ExperimentConfig, *, workers: int | None = None, cap: int | None = None) -> RunReport:
    """Evaluate every (polynomial, modulus) instance of the config.

    Instances over the cap or past the time budget are skipped and logged;
    results are sorted by (polynomial order, modulus) before reporting.
    """
    if cap is not None:
        cfg = ExperimentConfig(**{**cfg.__dict__, "term_cap": cap})
    workers = workers if workers is not None else kernels.default_workers()
    start = time.monotonic()
    contexts = [_prepare(spec) for spec in cfg.polynomials]
    tasks = [(i, ctx, N) for i, ctx in enumerate(contexts) for N in cfg.modulus_plan.moduli(ctx.d)]
    skipped: list[dict] = []

    def run(task):
        i, ctx, N = task
        if time.monotonic() - start > cfg.time_budget:
            return i, N, None, "time budget exhausted"
        try:
            return i, N, _run_instance(ctx, N, cfg), None
        except kernels.EnumerationCapExceeded as exc:
            return i, N, None, str(exc)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, tasks))
    else:
        outcomes = [run(t) for t in tasks]
    outcomes.sort(key=lambda o: (o[0], o[1]))
    instances = []
    for i, N, inst, why in outcomes:
        if inst is None:
            log.info("skip %s N=%d: %s", contexts[i].spec.id, N, why)
            skipped.append({"f_id": contexts[i].spec.id, "N": N, "reason": why})
        else:
            instances.append(inst)
    fits = {}
    for ctx in contexts:
        series = [(inst.N, inst.result.magnitude) for inst in instances
                  if inst.f_id == ctx.spec.id and prime_power(inst.N)]
        try:
            fit = B.fit_exponent(series)
            rec = fit.to_record()
            if ctx.s is not None:
                rec["target"] = float(Fraction(ctx.n - ctx.s, ctx.d))
            fits[ctx.spec.id] = rec
        except ValueError as exc:
            fits[ctx.spec.id] = {"error": str(exc)}
    return RunReport(cfg, instances, skipped, contexts, fits)

r"""Fourier coefficients c_g(n) by truncated Rademacher series.

The series for a class g with invariants (n_g, h_g) runs over c > 0 with
c = 0 mod n_g (the level restriction, confirmed empirically), each term a
Kloosterman-type phase sum times a weight-1/2 Bessel factor:

    c_g(n) = 4*pi * sum_c  K_c(n) * I_{1/2}(pi*sqrt(8n-1)/(2c)) / (c*(8n-1)^{1/4})

with K_c(n) = sum_{0<=d<c, (d,c)=1} e(n d/c - 3 s(d,c)/2) e(-c d/(n_g h_g)).
The overall sign is fixed empirically by the integrality gate together with
the required positivity of the identity-class coefficients; the same gate
resolves the Dedekind-sum variant (classical wins) and the level
restriction.  Terms with large Bessel argument are evaluated in mpmath with
exact rational phases; the long oscillating tail runs through the float64
kernels in moonmod.kernels.

The tail converges conditionally and slowly (the partial-sum error behaves
like a random walk of step ~1/c), so truncation is adaptive: partial sums
are inspected at every admissible c and a value is accepted at the first c
where the distance to the nearest integer drops below tolerance and the
rounded value is stable across a window of checkpoints.  Grades are swept
in batches per class, reusing the Dedekind pass across all grades.
"""

from __future__ import annotations

import json
import math
import os
import threading
from dataclasses import dataclass

import mpmath
import numpy as np

from . import kernels
from .numerics import DedekindMode, PrecisionContext, DEFAULT_CONTEXT, dedekind_sum
from .chartab import CharacterTable

# Bessel argument above which terms are evaluated at full precision; below
# it float64 keeps absolute term error well under the integrality tolerance.
HEAD_SWITCH = 20.0

# Engine default for the deepest c scanned.  The conservative policy-type
# default of 2000 suffices only for the smallest grades; integrality dips
# for grades up to ~60 are observed out to c ~ 3*10^4.
ENGINE_C_LIMIT = 60000


@dataclass(frozen=True)
class ClassParams:
    ng: int
    hg: int
    class_name: str

    def __post_init__(self) -> None:
        if self.ng < 1 or self.hg < 1:
            raise ValueError("ng and hg must be positive")


@dataclass(frozen=True)
class TruncationPolicy:
    """Adaptive truncation parameters.

    A grade is certified by the primary gate when the partial sum dips
    within residual_tolerance of an integer and the rounded value is stable
    over stability_window admissible checkpoints.  Classes whose admissible
    c form a sparse grid (large n_g) carry an intrinsic slowly decaying
    tail drift and may never dip that deep; the fallback gate accepts a
    value whose rounding is stable over stability_min_run checkpoints with
    residual at most stability_tolerance (0 disables the fallback).  Such
    records are marked gate="stability" and are independently re-certified
    downstream by exact decomposition integrality across all classes.
    """

    c_max_initial: int = 50
    c_max_limit: int = 2000
    residual_tolerance: float = 1e-4
    stability_window: int = 3
    stability_tolerance: float = 0.05
    stability_min_run: int = 200

    def __post_init__(self) -> None:
        if self.c_max_initial > self.c_max_limit:
            raise ValueError("c_max_initial must not exceed c_max_limit")
        if not self.residual_tolerance < 0.5:
            raise ValueError("residual_tolerance must be below 0.5")
        if self.stability_window < 1:
            raise ValueError("stability_window must be positive")
        if not self.stability_tolerance < 0.5:
            raise ValueError("stability_tolerance must be below 0.5")


@dataclass(frozen=True)
class CoefficientRecord:
    class_name: str
    n: int
    value: int
    residual: float
    c_max_used: int
    dedekind_mode_used: DedekindMode
    raw_sum: object = None  # high-precision real when freshly computed
    gate: str = "dip"  # "dip" (residual tolerance met) or "stability"


class NonConvergent(Exception):
    def __init__(self, class_name: str, n: int, best_raw: float, best_residual: float):
        super().__init__(
            f"series for class {class_name} at n={n} did not stabilize "
            f"(best residual {best_residual:.3g})"
        )
        self.class_name = class_name
        self.n = n
        self.best_raw = best_raw
        self.best_residual = best_residual


class CoefficientCache:
    """Append-only line-delimited record store, tolerant of a torn tail line."""

    def __init__(self, path: str | os.PathLike | None):
        self.path = os.fspath(path) if path is not None else None
        self.records: dict[tuple[str, str, int], dict] = {}
        self.hits = 0
        self._lock = threading.Lock()
        if self.path and os.path.exists(self.path):
            self._load()

    def _load(self) -> None:
        good = []
        with open(self.path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        for line in lines:
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                key = (rec["group"], rec["class"], int(rec["n"]))
                int(rec["value"])
            except (ValueError, KeyError, TypeError):
                continue  # corrupt (typically torn trailing) line
            self.records[key] = rec
            good.append(line)
        if len(good) != len([l for l in lines if l.strip()]):
            with open(self.path, "w", encoding="utf-8") as fh:
                fh.write("".join(l + "\n" for l in good))

    def __len__(self) -> int:
        return len(self.records)

    def get(self, group: str, class_name: str, n: int) -> dict | None:
        rec = self.records.get((group, class_name, n))
        if rec is not None:
            self.hits += 1
        return rec

    def put(self, group: str, class_name: str, n: int, record: CoefficientRecord) -> None:
        rec = {
            "group": group,
            "class": class_name,
            "n": n,
            "value": str(record.value),
            "residual": record.residual,
            "c_max_used": record.c_max_used,
            "mode": record.dedekind_mode_used.value,
            "gate": record.gate,
        }
        with self._lock:
            if (group, class_name, n) in self.records:
                return
            self.records[(group, class_name, n)] = rec
            if self.path:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")

    def seed(self, lines) -> None:
        """Merge parsed records from an iterable of ldjson lines (no writes)."""
        for line in lines:
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                key = (rec["group"], rec["class"], int(rec["n"]))
                int(rec["value"])
            except (ValueError, KeyError, TypeError):
                continue
            self.records.setdefault(key, rec)

    def to_record(self, rec: dict) -> CoefficientRecord:
        return CoefficientRecord(
            class_name=rec["class"],
            n=int(rec["n"]),
            value=int(rec["value"]),
            residual=float(rec["residual"]),
            c_max_used=int(rec["c_max_used"]),
            dedekind_mode_used=DedekindMode(rec["mode"]),
            gate=rec.get("gate", "dip"),
        )


def bundled_cache(path: str | os.PathLike | None = None) -> CoefficientCache:
    """Cache seeded from the packaged precomputed store.

    With path=None the cache is in-memory only; fresh computations are kept
    for the session but not persisted.
    """
    from importlib import resources

    cache = CoefficientCache(path)
    ref = resources.files("moonmod.data").joinpath("m24_coeffs.ldjson")
    if ref.is_file():
        with ref.open("r", encoding="utf-8") as fh:
            cache.seed(fh.read().splitlines())
    return cache


def partial_kloosterman(n: int, c: int, params: ClassParams,
                        mode: DedekindMode = DedekindMode.Classical,
                        ctx: PrecisionContext = DEFAULT_CONTEXT):
    """Exact-phase Kloosterman sum K_c(n) at working precision."""
    from fractions import Fraction

    from .numerics import unit_exp

    if c < 1:
        raise ValueError("c must be positive")
    m = params.ng * params.hg
    total = mpmath.mpc(0)
    for d in range(c):
        if math.gcd(d, c) != 1:
            continue
        s = dedekind_sum(d, c, mode) if c > 1 else Fraction(0)
        theta = Fraction(n * d, c) - Fraction(3, 2) * s - Fraction(c * d, m)
        total += unit_exp(theta, ctx)
    return total


def asymptotic_leading(params: ClassParams, n: int) -> float:
    """Unsigned leading magnitude C_{n,g} * exp(D_n / n_g)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    q8 = 8 * n - 1
    return 4.0 / (math.sqrt(params.ng) * math.sqrt(q8)) * math.exp(
        math.pi * math.sqrt(q8) / (2 * params.ng)
    )


def polar_coefficient(params: ClassParams) -> int:
    """The polar coefficient, -2 for every class by definition."""
    return -2


def _series_digits(n: int, ctx: PrecisionContext) -> int:
    d_n = (math.pi / 2.0) * math.sqrt(8 * n - 1)
    return max(ctx.working_precision, int(math.ceil(d_n / math.log(10))) + 40)


class _GradeState:
    __slots__ = ("n", "head_int", "head_frac", "head_im", "cum", "cum_im",
                 "rounded_tail", "done", "value", "residual", "c_used",
                 "best_res", "best_raw", "raw", "gate", "stable_run",
                 "last_rounded")

    def __init__(self, n: int):
        self.n = n
        self.head_int = 0
        self.head_frac = 0.0
        self.head_im = 0.0
        self.cum = 0.0
        self.cum_im = 0.0
        self.rounded_tail: list[float] = []
        self.done = False
        self.value = 0
        self.residual = 0.0
        self.c_used = 0
        self.best_res = float("inf")
        self.best_raw = 0.0
        self.raw = None
        self.gate = "dip"
        self.stable_run = 0
        self.last_rounded = None


class RademacherEngine:
    """Coefficient provider for one group's classes, with cache and gates."""

    def __init__(self, table: CharacterTable,
                 policy: TruncationPolicy | None = None,
                 ctx: PrecisionContext | None = None,
                 cache: CoefficientCache | None = None):
        self.table = table
        self.group = table.group_name
        self.policy = policy or TruncationPolicy(c_max_limit=ENGINE_C_LIMIT)
        self.ctx = ctx or DEFAULT_CONTEXT
        self.cache = cache if cache is not None else CoefficientCache(None)
        self._mode: DedekindMode | None = None
        self._level_variant: dict[str, str] = {}
        self._lock = threading.Lock()

    # -- mode and level resolution ------------------------------------------

    @property
    def mode(self) -> DedekindMode:
        if self._mode is None:
            with self._lock:
                if self._mode is None:
                    self._mode = self._resolve_mode()
        return self._mode

    def _resolve_mode(self) -> DedekindMode:
        """Integrality gate on the identity class, n = 1..5, both variants.

        Classical is preferred when both pass.  A warm cache short-circuits
        the gate: the mode is global and every stored record carries it.
        """
        import dataclasses

        for (group, _, _), rec in self.cache.records.items():
            if group == self.group:
                return DedekindMode(rec["mode"])
        ident = ClassParams(1, 1, self.table.classes[0].name)
        strict = dataclasses.replace(self.policy, stability_tolerance=0.0)
        for mode in (DedekindMode.Classical, DedekindMode.OmegaFloor):
            states = self._sweep(ident, list(range(1, 6)), mode,
                                 restricted=True, policy=strict)
            if all(st.done for st in states.values()):
                return mode
        raise NonConvergent(ident.class_name, 1, float("nan"), float("nan"))

    def level_variant(self, class_name: str) -> str:
        """'restricted' (c = 0 mod ng) or 'all', decided by the gate."""
        return self._level_variant.get(class_name, "restricted")

    # -- series evaluation ---------------------------------------------------

    def _head_terms(self, params: ClassParams, mode: DedekindMode,
                    states: dict[int, _GradeState], step: int) -> dict[int, int]:
        """Full-precision contributions for Bessel arguments above HEAD_SWITCH.

        Returns, per grade, the first admissible c handled by the tail.
        """
        tail_start = {}
        for n, st in states.items():
            q8 = 8 * n - 1
            c_head_max = math.pi * math.sqrt(q8) / (2 * HEAD_SWITCH)
            digits = _series_digits(n, self.ctx)
            head_re = mpmath.mpf(0)
            head_im = 0.0
            c = step
            with mpmath.workdps(digits):
                hp = PrecisionContext(digits, self.ctx.truncation_tolerance)
                while c <= c_head_max:
                    x = mpmath.pi * mpmath.sqrt(q8) / (2 * c)
                    fac = 4 * mpmath.pi * mpmath.sqrt(2 / (mpmath.pi * x)) \
                        * mpmath.sinh(x) / (c * mpmath.power(q8, mpmath.mpf(1) / 4))
                    kl = partial_kloosterman(n, c, params, mode, hp)
                    head_re += fac * kl.real
                    head_im += float(fac * kl.imag)
                    c += step
                st.head_int = int(mpmath.nint(head_re))
                st.head_frac = float(head_re - mpmath.nint(head_re))
                st.head_im = head_im
                st.cum = st.head_frac
                st.cum_im = head_im
                st.raw = head_re
            tail_start[n] = c
        return tail_start

    def _sweep(self, params: ClassParams, grades: list[int], mode: DedekindMode,
               restricted: bool, policy: TruncationPolicy | None = None
               ) -> dict[int, _GradeState]:
        """Adaptive truncation for a batch of grades of one class."""
        pol = policy or self.policy
        step = params.ng if restricted else 1
        literal = 1 if mode is DedekindMode.OmegaFloor else 0
        states = {n: _GradeState(n) for n in grades}
        tail_start = self._head_terms(params, mode, states, step)
        window = pol.stability_window

        lo, hi = 1, min(2000, pol.c_max_limit)
        while True:
            active = [n for n, st in states.items() if not st.done]
            if not active:
                break
            n0, n1 = min(active), max(active)
            cs = np.arange(((lo + step - 1) // step) * step, hi + 1, step, dtype=np.int64)
            if len(cs):
                k_re = np.empty((len(cs), n1 - n0 + 1))
                k_im = np.empty_like(k_re)
                kernels.kloosterman_grades(n0, n1, cs, params.ng, params.hg,
                                           literal, k_re, k_im)
                csf = cs.astype(np.float64)
                for n in active:
                    st = states[n]
                    j = n - n0
                    q8 = 8 * n - 1
                    x = (math.pi * math.sqrt(q8) / 2.0) / csf
                    fac = 4.0 * math.pi * np.sqrt(2.0 / (math.pi * x)) * np.sinh(x) \
                        / (csf * q8 ** 0.25)
                    start_c = tail_start[n]
                    usable = cs >= start_c
                    terms = np.where(usable, fac * k_re[:, j], 0.0)
                    terms_im = np.where(usable, fac * k_im[:, j], 0.0)
                    cum = st.cum + np.cumsum(terms)
                    cum_im = st.cum_im + np.cumsum(terms_im)
                    rounded = np.rint(cum)
                    resid = np.abs(cum - rounded)
                    hist = np.array(st.rounded_tail, dtype=np.float64)
                    allr = np.concatenate([hist, rounded])
                    off = len(hist)
                    for k in range(len(cs)):
                        c = int(cs[k])
                        if c < start_c:
                            continue
                        if c >= pol.c_max_initial:
                            r = resid[k]
                            if r < st.best_res:
                                st.best_res = float(r)
                                st.best_raw = st.head_int + cum[k]
                            idx = off + k
                            stable = idx >= window - 1 and bool(
                                np.all(allr[idx - window + 1:idx + 1] == allr[idx])
                            )
                            if stable and r <= pol.residual_tolerance:
                                # The true coefficient is real; the imaginary
                                # part is a pure-noise residual and gets the
                                # same absolute tolerance as the real one.
                                imag_ok = abs(cum_im[k]) <= max(
                                    pol.residual_tolerance,
                                    1e-10 * abs(st.head_int + cum[k]))
                                if imag_ok:
                                    st.done = True
                                    st.value = st.head_int + int(rounded[k])
                                    st.residual = float(r)
                                    st.c_used = c
                                    st.raw = (st.raw if st.raw is not None else mpmath.mpf(0)) \
                                        + mpmath.mpf(float(cum[k] - st.head_frac))
                                    break
                    if not st.done:
                        st.cum = float(cum[-1])
                        st.cum_im = float(cum_im[-1])
                        st.rounded_tail = list(rounded[-(window - 1):]) if window > 1 else []
                        changes = np.nonzero(np.diff(rounded))[0]
                        if len(changes):
                            st.stable_run = len(rounded) - (int(changes[-1]) + 1)
                        elif st.last_rounded == rounded[-1]:
                            st.stable_run += len(rounded)
                        else:
                            st.stable_run = len(rounded)
                        st.last_rounded = float(rounded[-1])
            if hi >= pol.c_max_limit:
                break
            lo, hi = hi + 1, min(hi * 2, pol.c_max_limit)

        # Fallback gate: sparse-grid classes never dip below the residual
        # tolerance (intrinsic ~C^(-1/2) tail drift); accept a long-stable
        # rounding within the coarse stability tolerance instead.  These
        # records are re-certified exactly by decomposition downstream.
        if pol.stability_tolerance > 0:
            for st in states.values():
                if st.done:
                    continue
                total_frac = st.cum
                value_rounded = round(total_frac)
                r = abs(total_frac - value_rounded)
                if (st.stable_run >= pol.stability_min_run
                        and r <= pol.stability_tolerance
                        and abs(st.cum_im) <= max(pol.stability_tolerance,
                                                  1e-10 * abs(st.head_int + total_frac))):
                    st.done = True
                    st.gate = "stability"
                    st.value = st.head_int + int(value_rounded)
                    st.residual = float(r)
                    st.c_used = pol.c_max_limit - (pol.c_max_limit % step)
                    st.raw = (st.raw if st.raw is not None else mpmath.mpf(0)) \
                        + mpmath.mpf(float(total_frac - st.head_frac))
        return states

    def coefficient(self, params: ClassParams, n: int) -> CoefficientRecord:
        return self._coefficients(params, [n])[n]

    def _coefficients(self, params: ClassParams, grades) -> dict[int, CoefficientRecord]:
        out: dict[int, CoefficientRecord] = {}
        todo = []
        for n in grades:
            if n == -1:
                out[n] = CoefficientRecord(params.class_name, -1,
                                           polar_coefficient(params), 0.0, 0,
                                           self.mode, gate="definition")
            elif n == 0:
                # Vanishing constant-grade coefficient by convention.
                out[n] = CoefficientRecord(params.class_name, 0, 0, 0.0, 0,
                                           self.mode, gate="definition")
            elif n < -1:
                raise ValueError("n must be at least -1")
            else:
                cached = self.cache.get(self.group, params.class_name, n)
                if cached is not None:
                    out[n] = self.cache.to_record(cached)
                else:
                    todo.append(n)
        if not todo:
            return out
        mode = self.mode
        states = self._sweep(params, todo, mode, restricted=True)
        variant = "restricted"
        failed = [n for n in todo if not states[n].done]
        if failed and params.ng > 1:
            alt = self._sweep(params, failed, mode, restricted=False)
            if all(alt[n].done for n in failed):
                variant = "all"
                states.update(alt)
        for n in todo:
            st = states[n]
            if not st.done:
                raise NonConvergent(params.class_name, n, float(st.best_raw), st.best_res)
            rec = CoefficientRecord(params.class_name, n, st.value, st.residual,
                                    st.c_used, mode, st.raw, st.gate)
            self.cache.put(self.group, params.class_name, n, rec)
            out[n] = rec
        with self._lock:
            self._level_variant[params.class_name] = variant
        return out

    # -- provider / batch interface -----------------------------------------

    def params_for(self, class_name: str) -> ClassParams:
        c = self.table.class_named(class_name)
        return ClassParams(c.ng, c.hg, c.name)

    def value(self, class_name: str, n: int) -> int:
        return self.coefficient(self.params_for(class_name), n).value

    def coefficient_range(self, class_name: str, n_lo: int, n_hi: int,
                          jobs: int = 1) -> list[CoefficientRecord]:
        params = self.params_for(class_name)
        recs = self._coefficients(params, range(n_lo, n_hi + 1))
        return [recs[n] for n in range(n_lo, n_hi + 1)]

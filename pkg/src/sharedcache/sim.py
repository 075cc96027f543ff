"""End-to-end sessions over a packet-corrupting broadcast channel, coded
worst-case rates, lower convex envelopes and demand sweeps.

Randomness comes from numpy's PCG64 bit generator. A session seed feeds a
``SeedSequence`` that is split into two independent streams, one for the
file payloads and one for the channel, so that changing the channel leaves
the payloads untouched.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import gf2
from .delivery import SCHEMES, plan_delivery, worst_case_count
from .ecc import LinearCode, UncorrectableError, UnsupportedCode, build_code, code_length_bounds, concat_encode, syndrome_decode
from .indexcoding import BoundsReport, build_icsi, compute_bounds, decoding_combination
from .model import Association, SystemConfig, _demand, binomial, sc_place

EXHAUSTIVE_DEMAND_LIMIT = 100_000
MAX_REPORTED_FAILURES = 50


# -- channel ---------------------------------------------------------------


@dataclass(frozen=True)
class ChannelConfig:
    """At most ``delta`` corrupted packets per delivery.

    ``mode`` is ``"exhaustive"`` (every set of 1..delta packet positions;
    the single clean pattern when ``delta = 0``) or ``"random"`` (``count``
    patterns of exactly ``delta`` positions). Each chosen packet is XOR-ed
    with a uniformly random non-zero mask.
    """

    delta: int = 0
    mode: str = "exhaustive"
    count: int = 0

    def __post_init__(self):
        if isinstance(self.delta, bool) or not isinstance(self.delta, int) or self.delta < 0:
            raise ValueError(f"delta must be a non-negative integer, got {self.delta!r}")
        if self.mode not in ("exhaustive", "random"):
            raise ValueError(f"unknown error mode {self.mode!r}")
        if self.mode == "random" and self.count < 1:
            raise ValueError("random error mode needs a positive pattern count")

    @classmethod
    def parse(cls, delta: int, spec: str) -> "ChannelConfig":
        """``"exhaustive"`` or ``"random:N"``."""
        if spec == "exhaustive":
            return cls(delta)
        head, _, tail = spec.partition(":")
        if head == "random" and tail.isdigit():
            return cls(delta, "random", int(tail))
        raise ValueError(f"error mode must be 'exhaustive' or 'random:N', got {spec!r}")

    def positions(self, n: int, rng: np.random.Generator) -> Iterable[tuple[int, ...]]:
        if self.delta > n:
            raise ValueError(f"delta = {self.delta} exceeds the coded length {n}")
        if self.mode == "exhaustive":
            if self.delta == 0:
                yield ()
                return
            for w in range(1, self.delta + 1):
                yield from itertools.combinations(range(n), w)
            return
        for _ in range(self.count):
            yield tuple(sorted(int(i) for i in rng.choice(n, size=self.delta, replace=False)))

    def describe(self) -> str:
        return "exhaustive" if self.mode == "exhaustive" else f"random:{self.count}"


def random_bits(rng: np.random.Generator, nbits: int, nonzero: bool = False) -> int:
    if nbits <= 0:
        if nonzero:
            raise ValueError("cannot draw a non-zero mask of zero bits")
        return 0
    nbytes = -(-nbits // 8)
    while True:
        v = int.from_bytes(rng.bytes(nbytes), "little") & ((1 << nbits) - 1)
        if v or not nonzero:
            return v


def session_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    payload_seq, channel_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.Generator(np.random.PCG64(payload_seq)), np.random.Generator(np.random.PCG64(channel_seq))


# -- sessions --------------------------------------------------------------


@dataclass
class SessionReport:
    scheme: str
    kappa: int
    coded_length: int
    code: dict | None
    rate: Fraction
    per_user: dict[int, dict]
    bounds: BoundsReport | None
    patterns_tested: int
    patterns_failed: int
    failures: list[dict]
    seed: int
    delta: int
    code_delta: int
    error_mode: str

    @property
    def ok(self) -> bool:
        return self.patterns_failed == 0

    def to_json(self) -> dict:
        return {
            "scheme": self.scheme,
            "kappa": self.kappa,
            "coded_length": self.coded_length,
            "code": self.code,
            "rate": str(self.rate),
            "rate_float": float(self.rate),
            "per_user": {str(u): dict(v) for u, v in sorted(self.per_user.items())},
            "bounds": self.bounds.to_json() if self.bounds is not None else None,
            "patterns_tested": self.patterns_tested,
            "patterns_failed": self.patterns_failed,
            "failures": list(self.failures),
            "failures_truncated": self.patterns_failed > len(self.failures),
            "seed": self.seed,
            "delta": self.delta,
            "code_delta": self.code_delta,
            "error_mode": self.error_mode,
            "ok": self.ok,
        }


def run_session(
    cfg: SystemConfig,
    assoc: Association,
    d,
    scheme: str = "improved",
    channel: ChannelConfig | None = None,
    seed: int = 0,
    code_delta: int | None = None,
    bounds: bool = True,
    run_oracles: bool = False,
) -> SessionReport:
    """Place, plan, encode, corrupt, correct and decode; compare every file bit for bit.

    The plan of length ``kappa`` is concatenated with a ``[n, kappa, 2*code_delta+1]``
    code (``code_delta`` defaults to the channel's ``delta``). Users removed
    as repeats decode on their own: they share cache and demand with their proxy.
    """
    d = _demand(d)
    channel = channel or ChannelConfig()
    code_delta = channel.delta if code_delta is None else code_delta
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    payload_rng, channel_rng = session_streams(seed)
    payloads = [random_bits(payload_rng, cfg.file_size_bits) for _ in range(cfg.num_files)]
    placement = sc_place(cfg, payloads)
    plan = plan_delivery(scheme, cfg, assoc, d, placement)
    kappa = len(plan)
    nbits = cfg.subfile_bits

    code: LinearCode | None = None
    if kappa:
        try:
            code = build_code(kappa, 2 * code_delta + 1)
        except UnsupportedCode as exc:
            raise UnsupportedCode(f"no code available for k = {kappa}, d = {2 * code_delta + 1}: {exc}") from exc
    n = code.n if code is not None else 0
    symbols = plan.symbols() if kappa else []
    encoded = concat_encode(symbols, code, nbits) if code is not None else []

    # per receiver: decoding combination and the side-information part it cancels
    inst = build_icsi(cfg, placement, assoc, d)
    rows = plan.rows()
    decoders = []
    for i, r in enumerate(inst.receivers):
        combo = decoding_combination(inst, rows, i)
        used = 0
        for j in gf2.bits(combo):
            used ^= rows[j]
        known = 0
        for m in gf2.bits(used & r.has):
            known ^= placement.payloads[inst.subfile(m)]
        decoders.append((r.user, r.subfile, combo, known))

    per_user = {u: {"cache": assoc.cache_of(u), "file": d[u], "failed_patterns": 0} for u in assoc.users}
    for u, p in plan.proxies.items():
        per_user[u]["proxy"] = p

    failures: list[dict] = []
    tested = failed = 0
    for pos in channel.positions(n, channel_rng):
        tested += 1
        received = list(encoded)
        for j in pos:
            received[j] ^= random_bits(channel_rng, nbits, nonzero=True)
        reason = None
        bad_users: list[int] = []
        try:
            decoded = syndrome_decode(received, code, nbits) if code is not None else []
        except UncorrectableError as exc:
            reason = f"uncorrectable: {exc}"
            bad_users = list(assoc.users)
        else:
            got: dict[tuple[int, object], int] = {}
            for u, sub, combo, known in decoders:
                value = known
                for j in gf2.bits(combo):
                    value ^= decoded[j]
                got[u, sub] = value
            for u in assoc.users:
                rebuilt = {}
                for sub in placement.contents(assoc.cache_of(u)):
                    if sub.file == d[u]:
                        rebuilt[sub] = placement.payloads[sub]
                for (v, sub), value in got.items():
                    if v == u:
                        rebuilt[sub] = value
                file_value = 0
                for r_idx, sub in enumerate(sorted(rebuilt, key=lambda s: s.message_index(cfg.num_caches))):
                    file_value |= rebuilt[sub] << (r_idx * nbits)
                if len(rebuilt) != cfg.num_subfiles or file_value != payloads[d[u] - 1]:
                    bad_users.append(u)
            if bad_users:
                reason = "decoded file mismatch"
        if reason is not None:
            failed += 1
            for u in bad_users:
                per_user[u]["failed_patterns"] += 1
            if len(failures) < MAX_REPORTED_FAILURES:
                failures.append({"positions": list(pos), "reason": reason, "users": bad_users})

    for v in per_user.values():
        v["ok"] = v["failed_patterns"] == 0
    report_bounds = compute_bounds(cfg, assoc, d, run_oracles=run_oracles) if bounds else None
    return SessionReport(
        scheme=scheme,
        kappa=kappa,
        coded_length=n,
        code=code.to_json() if code is not None else None,
        rate=Fraction(n, binomial(cfg.num_caches, cfg.t)),
        per_user=per_user,
        bounds=report_bounds,
        patterns_tested=tested,
        patterns_failed=failed,
        failures=failures,
        seed=seed,
        delta=channel.delta,
        code_delta=code_delta,
        error_mode=channel.describe(),
    )


# -- rates -----------------------------------------------------------------


@dataclass(frozen=True)
class RateInterval:
    """A rate known only to lie in ``[lower, upper]`` (code length not tabulated exactly)."""

    lower: Fraction
    upper: Fraction

    def __str__(self) -> str:
        return f"[{self.lower}, {self.upper}]"


def rate_bounds(rate) -> tuple[Fraction, Fraction]:
    if isinstance(rate, RateInterval):
        return rate.lower, rate.upper
    return rate, rate


def optimal_ecc_worst_rate(cfg: SystemConfig, assoc: Association, delta: int) -> list[tuple[Fraction, object]]:
    """Worst-case rate with the shortest ``(2*delta+1)``-distance code, at ``gamma = t/L``, ``t = 1..L``.

    Each rate is a :class:`~fractions.Fraction`, or a :class:`RateInterval`
    when the shortest code length is only known to within bounds (the
    upper end is always achievable, at worst by repetition).
    """
    if delta < 0:
        raise ValueError("delta must be non-negative")
    lam = cfg.num_caches
    out = []
    for t in range(1, lam + 1):
        k = worst_case_count(cfg, assoc, t)
        lo, hi = code_length_bounds(k, 2 * delta + 1)
        sub = binomial(lam, t)
        rate = Fraction(lo, sub) if lo == hi else RateInterval(Fraction(lo, sub), Fraction(hi, sub))
        out.append((Fraction(t, lam), rate))
    return out


@dataclass(frozen=True)
class Envelope:
    """Piecewise-linear lower convex envelope through ``vertices`` (sorted by x)."""

    vertices: tuple[tuple[Fraction, Fraction], ...]

    def __call__(self, x) -> Fraction:
        x = Fraction(x)
        vs = self.vertices
        if not vs[0][0] <= x <= vs[-1][0]:
            raise ValueError(f"x = {x} outside [{vs[0][0]}, {vs[-1][0]}]")
        for (x0, y0), (x1, y1) in zip(vs, vs[1:]):
            if x0 <= x <= x1:
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        return vs[0][1]


def convex_envelope(points: Sequence[tuple]) -> Envelope:
    """Lower convex hull of ``points`` (monotone chain); collinear points are dropped."""
    pts = sorted((Fraction(x), Fraction(y)) for x, y in points)
    if not pts:
        raise ValueError("convex_envelope needs at least one point")
    if any(a[0] == b[0] for a, b in zip(pts, pts[1:])):
        raise ValueError("points must have distinct x")
    hull: list[tuple[Fraction, Fraction]] = []
    for p in pts:
        while len(hull) >= 2:
            (ax, ay), (bx, by) = hull[-2], hull[-1]
            if (bx - ax) * (p[1] - ay) - (by - ay) * (p[0] - ax) > 0:
                break
            hull.pop()
        hull.append(p)
    return Envelope(tuple(hull))


# -- demand sweeps ---------------------------------------------------------


@dataclass(frozen=True)
class Sampled:
    count: int
    seed: int = 0


@dataclass
class SweepStats:
    scheme: str
    counts: list[tuple[tuple[int, ...], int]] = field(repr=False)
    num_subfiles: int

    @property
    def max_count(self) -> int:
        return max(c for _, c in self.counts)

    @property
    def worst_demand(self) -> tuple[int, ...]:
        return max(self.counts, key=lambda dc: dc[1])[0]

    @property
    def mean_count(self) -> Fraction:
        return Fraction(sum(c for _, c in self.counts), len(self.counts))

    @property
    def max_rate(self) -> Fraction:
        return Fraction(self.max_count, self.num_subfiles)

    @property
    def mean_rate(self) -> Fraction:
        return self.mean_count / self.num_subfiles

    def to_json(self) -> dict:
        return {
            "scheme": self.scheme,
            "demands": len(self.counts),
            "max_count": self.max_count,
            "worst_demand": list(self.worst_demand),
            "mean_count": str(self.mean_count),
            "max_rate": str(self.max_rate),
            "mean_rate": str(self.mean_rate),
            "mean_rate_float": float(self.mean_rate),
        }


def demand_sweep(
    cfg: SystemConfig,
    assoc: Association,
    source="exhaustive",
    scheme: str = "improved",
    limit: int = EXHAUSTIVE_DEMAND_LIMIT,
) -> SweepStats:
    """Plan lengths over all ``N^K`` demands, or over ``Sampled(count, seed)`` uniform demands."""
    N, K = cfg.num_files, cfg.num_users
    if source == "exhaustive":
        if N**K > limit:
            raise ValueError(f"exhaustive sweep needs N^K = {N**K} demands, above the limit {limit}")
        demands: Iterable[tuple[int, ...]] = itertools.product(range(1, N + 1), repeat=K)
    elif isinstance(source, Sampled):
        rng = np.random.Generator(np.random.PCG64(source.seed))
        demands = [tuple(int(x) for x in rng.integers(1, N + 1, size=K)) for _ in range(source.count)]
    else:
        raise ValueError(f"unknown demand source {source!r}")
    counts = [(dem, len(plan_delivery(scheme, cfg, assoc, dem))) for dem in demands]
    if not counts:
        raise ValueError("empty demand sweep")
    return SweepStats(scheme, counts, binomial(cfg.num_caches, cfg.t))

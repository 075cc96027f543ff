"""Delivery planning for shared-cache coded caching.

Two schemes are provided:

``sc``
    The round-based shared-cache delivery: round ``j`` serves the ``j``-th
    user of every cache, and every ``(t+1)``-subset ``Q`` of caches with at
    least one active cache yields one XOR.
``improved``
    Users repeating a file already requested at their own cache are dropped
    first; in each round only subsets ``Q`` whose receiving users include a
    *leader* (one user per distinct file of the round) are transmitted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .model import (
    Association,
    DemandVector,
    Placement,
    SubfileId,
    SystemConfig,
    _demand,
    binomial,
    enumerate_subsets,
)

SCHEMES = ("sc", "improved")


@dataclass(frozen=True)
class Transmission:
    round: int
    cache_set: tuple[int, ...]
    terms: tuple[SubfileId, ...]
    users: tuple[int, ...] = ()
    payload: int | None = None

    def serving_caches(self) -> tuple[int, ...]:
        out = []
        for term in self.terms:
            (c,) = set(self.cache_set) - set(term.subset)
            out.append(c)
        return tuple(out)

    def message_mask(self, num_caches: int) -> int:
        mask = 0
        for term in self.terms:
            mask ^= 1 << term.message_index(num_caches)
        return mask

    def __str__(self) -> str:
        receivers = ",".join(map(str, self.users))
        return f"T_{{{receivers}}} = " + " ⊕ ".join(str(x) for x in self.terms)


@dataclass(frozen=True)
class TransmissionPlan:
    scheme: str
    num_caches: int
    t: int
    transmissions: tuple[Transmission, ...]
    rounds: tuple[tuple[int, ...], ...]
    leaders: tuple[tuple[int, ...], ...] = ()
    eliminated: tuple[tuple[int, int], ...] = ()
    subfile_bits: int | None = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.transmissions)

    def __iter__(self):
        return iter(self.transmissions)

    @property
    def rate(self) -> Fraction:
        """Transmissions per file, i.e. ``len(plan) / C(L, t)``."""
        return Fraction(len(self.transmissions), binomial(self.num_caches, self.t))

    @property
    def proxies(self) -> dict[int, int]:
        return dict(self.eliminated)

    def rows(self) -> list[int]:
        """Transmissions as GF(2) combination vectors over message indices."""
        return [tx.message_mask(self.num_caches) for tx in self.transmissions]

    def symbols(self) -> list[int]:
        if any(tx.payload is None for tx in self.transmissions):
            raise ValueError("plan carries no payloads")
        return [tx.payload for tx in self.transmissions]

    def log_lines(self) -> list[str]:
        lines = []
        current = None
        for tx in self.transmissions:
            if tx.round != current:
                current = tx.round
                served = self.rounds[current - 1]
                lines.append(f"Round {current}: R_{current} = {{{', '.join(map(str, served))}}}")
            lines.append(f"  {tx}")
        return lines

    def to_json(self) -> dict:
        txs = []
        for tx in self.transmissions:
            item = {
                "round": tx.round,
                "Q": list(tx.cache_set),
                "users": list(tx.users),
                "terms": [{"file": x.file, "subset": list(x.subset)} for x in tx.terms],
            }
            if tx.payload is not None and self.subfile_bits:
                item["payload_hex"] = _to_hex(tx.payload, self.subfile_bits)
            txs.append(item)
        return {
            "scheme": self.scheme,
            "num_caches": self.num_caches,
            "t": self.t,
            "subfile_bits": self.subfile_bits,
            "rounds": [list(r) for r in self.rounds],
            "leaders": [list(p) for p in self.leaders],
            "eliminated": [{"user": u, "proxy": p} for u, p in self.eliminated],
            "transmissions": txs,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TransmissionPlan":
        txs = []
        for item in obj["transmissions"]:
            payload = item.get("payload_hex")
            txs.append(
                Transmission(
                    item["round"],
                    tuple(item["Q"]),
                    tuple(SubfileId(x["file"], tuple(x["subset"])) for x in item["terms"]),
                    tuple(item.get("users", ())),
                    int(payload, 16) if payload is not None else None,
                )
            )
        return cls(
            obj["scheme"],
            obj["num_caches"],
            obj["t"],
            tuple(txs),
            tuple(tuple(r) for r in obj["rounds"]),
            tuple(tuple(p) for p in obj.get("leaders", ())),
            tuple((e["user"], e["proxy"]) for e in obj.get("eliminated", ())),
            obj.get("subfile_bits"),
        )


def _to_hex(value: int, nbits: int) -> str:
    return format(value, "0{}x".format(max(1, -(-nbits // 4))))


def sc_rounds(assoc: Association) -> list[tuple[int, ...]]:
    """Users served per round: round ``j`` holds the ``j``-th user of each cache."""
    depth = max(assoc.profile, default=0)
    return [tuple(g[j] for g in assoc.groups if len(g) > j) for j in range(depth)]


def _active(assoc: Association, j: int) -> dict[int, int]:
    """cache label -> user served by that cache in round ``j`` (1-based)."""
    return {c: g[j - 1] for c, g in zip(assoc.labels, assoc.groups) if len(g) >= j}


def _payload(placement: Placement | None, terms: Sequence[SubfileId]) -> int | None:
    if placement is None or placement.payloads is None:
        return None
    value = 0
    for x in terms:
        value ^= placement.payloads[x]
    return value


def _check(cfg: SystemConfig, assoc: Association, d: DemandVector) -> None:
    assoc.validate(cfg)
    d.validate(cfg)


def sc_delivery(cfg: SystemConfig, assoc: Association, d, placement: Placement | None = None) -> TransmissionPlan:
    """Shared-cache delivery plan (one XOR per round and active ``(t+1)``-subset).

    Payloads are attached when ``placement`` carries subfile payloads.
    """
    d = _demand(d)
    _check(cfg, assoc, d)
    t = cfg.t
    txs = []
    rounds = sc_rounds(assoc)
    for j in range(1, len(rounds) + 1):
        active = _active(assoc, j)
        for Q in enumerate_subsets(cfg.num_caches, t + 1) if t < cfg.num_caches else ():
            served = [c for c in Q if c in active]
            if not served:
                continue
            terms = tuple(SubfileId(d[active[c]], tuple(x for x in Q if x != c)) for c in served)
            txs.append(Transmission(j, Q, terms, tuple(active[c] for c in served), _payload(placement, terms)))
    return TransmissionPlan("sc", cfg.num_caches, t, tuple(txs), tuple(rounds), subfile_bits=cfg.subfile_bits)


def worst_case_count(cfg: SystemConfig, assoc: Association, t: int | None = None) -> int:
    """``sum_{i=1}^{L-t} L_i * C(L-i, t)`` over the decreasingly sorted profile."""
    t = cfg.t if t is None else t
    profile = sorted(assoc.profile, reverse=True)
    lam = cfg.num_caches
    return sum(profile[i - 1] * binomial(lam - i, t) for i in range(1, lam - t + 1))


def worst_case_rate_points(cfg: SystemConfig, assoc: Association) -> list[tuple[Fraction, Fraction]]:
    """Worst-case SC rate at every ``gamma = t/L``, ``t = 1..L`` (no envelope)."""
    lam = cfg.num_caches
    return [
        (Fraction(t, lam), Fraction(worst_case_count(cfg, assoc, t), binomial(lam, t)))
        for t in range(1, lam + 1)
    ]


def eliminate_redundant(assoc: Association, d) -> tuple[Association, tuple[int, ...], dict[int, int]]:
    """Drop users repeating a file already requested at their own cache.

    Returns the reduced association (canonical order), the demands of the
    surviving users in that order, and ``{eliminated user: proxy}`` where the
    proxy is the first user of the same cache asking for the same file.
    """
    d = _demand(d)
    groups, proxies = [], {}
    for g in assoc.groups:
        first: dict[int, int] = {}
        kept = []
        for u in g:
            f = d[u]
            if f in first:
                proxies[u] = first[f]
            else:
                first[f] = u
                kept.append(u)
        groups.append(tuple(kept))
    reduced = Association(tuple(groups), assoc.labels).canonical()
    reduced_demands = tuple(d[u] for g in reduced.groups for u in g)
    return reduced, reduced_demands, proxies


def select_leaders(round_users: Sequence[int], d) -> tuple[int, ...]:
    """One user per distinct file of the round, the lowest user id winning ties."""
    d = _demand(d)
    best: dict[int, int] = {}
    for u in round_users:
        f = d[u]
        if f not in best or u < best[f]:
            best[f] = u
    return tuple(sorted(best.values()))


def improved_delivery(cfg: SystemConfig, assoc: Association, d, placement: Placement | None = None) -> TransmissionPlan:
    """Delivery for arbitrary (possibly repeated) demands.

    After :func:`eliminate_redundant`, rounds run over the reduced
    association; a subset ``Q`` is transmitted iff its receiving users
    ``E_Q`` contain a leader of the round. With ``t = 0`` each distinct
    requested file is sent once, whole.
    """
    d = _demand(d)
    _check(cfg, assoc, d)
    t = cfg.t
    reduced, _, proxies = eliminate_redundant(assoc, d)
    rounds = sc_rounds(reduced)
    eliminated = tuple(sorted(proxies.items()))
    txs: list[Transmission] = []
    leaders: list[tuple[int, ...]] = []
    for j in range(1, len(rounds) + 1):
        leaders.append(select_leaders(rounds[j - 1], d))
    if t == 0:
        sent: set[int] = set()
        for j, R in enumerate(rounds, start=1):
            for u in sorted(R):
                f = d[u]
                if f in sent:
                    continue
                sent.add(f)
                terms = (SubfileId(f, ()),)
                txs.append(Transmission(j, (reduced.cache_of(u),), terms, (u,), _payload(placement, terms)))
    elif t < cfg.num_caches:
        for j in range(1, len(rounds) + 1):
            active = _active(reduced, j)
            lead = set(leaders[j - 1])
            for Q in enumerate_subsets(cfg.num_caches, t + 1):
                served = [c for c in Q if c in active]
                if not any(active[c] in lead for c in served):
                    continue
                terms = tuple(SubfileId(d[active[c]], tuple(x for x in Q if x != c)) for c in served)
                txs.append(Transmission(j, Q, terms, tuple(active[c] for c in served), _payload(placement, terms)))
    return TransmissionPlan(
        "improved", cfg.num_caches, t, tuple(txs), tuple(rounds), tuple(leaders), eliminated, cfg.subfile_bits
    )


def plan_delivery(scheme: str, cfg: SystemConfig, assoc: Association, d, placement: Placement | None = None):
    if scheme == "sc":
        return sc_delivery(cfg, assoc, d, placement)
    if scheme == "improved":
        return improved_delivery(cfg, assoc, d, placement)
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def predicted_count_thm3(cfg: SystemConfig, assoc: Association, d) -> int:
    """Closed-form per-round count for the improved scheme, evaluated as printed:

    ``sum_j C(L, t+1) - C(L - N_e(R'_j), t+1) - C(L - |R'_j|, t+1)``.

    This is a prediction only; it can disagree with ``len(improved_delivery(...))``.
    """
    d = _demand(d)
    t = cfg.t
    lam = cfg.num_caches
    reduced, _, _ = eliminate_redundant(assoc, d)
    total = 0
    for R in sc_rounds(reduced):
        distinct = len({d[u] for u in R})
        total += binomial(lam, t + 1) - binomial(lam - distinct, t + 1) - binomial(lam - len(R), t + 1)
    return total

"""Index-coding view of one delivery instance.

A (placement, demand) pair induces an index-coding problem whose messages
are the subfiles. Each user is split into one receiver per demanded
subfile it is missing. This module builds that instance, the constructive
generalized independent set ``B(d)``, exhaustive oracles for the
generalized independence number (alpha) and the binary min-rank (kappa),
and a linear receiver decoder.

Message sets are int bitmasks over message indices throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

from . import gf2
from .delivery import eliminate_redundant, improved_delivery, sc_delivery
from .model import (
    Association,
    Placement,
    SubfileId,
    SystemConfig,
    _demand,
    binomial,
    enumerate_subsets,
    sc_place,
)

ALPHA_LIMIT = 22
KAPPA_LIMIT = 14


class OracleLimitError(RuntimeError):
    """Instance is larger than the exhaustive search is configured for."""


class DecodeError(LookupError):
    def __init__(self, receiver: int, message: int):
        super().__init__(f"receiver {receiver} cannot decode message {message} from the plan")
        self.receiver = receiver
        self.message = message


class Receiver(NamedTuple):
    wants: int
    has: int
    user: int
    subfile: SubfileId


@dataclass(frozen=True)
class IcsiInstance:
    num_messages: int
    receivers: tuple[Receiver, ...]
    num_caches: int = 0
    t: int = 0

    def __post_init__(self):
        for i, r in enumerate(self.receivers):
            if (r.has >> r.wants) & 1:
                raise ValueError(f"receiver {i} already holds its demanded message {r.wants}")

    @property
    def wanted(self) -> int:
        """Bitmask of messages demanded by at least one receiver."""
        mask = 0
        for r in self.receivers:
            mask |= 1 << r.wants
        return mask

    def subfile(self, message: int) -> SubfileId:
        return SubfileId.from_message_index(message, self.num_caches, self.t)

    def receivers_of(self, user: int) -> list[int]:
        return [i for i, r in enumerate(self.receivers) if r.user == user]


def build_icsi(cfg: SystemConfig, placement: Placement | None, assoc: Association, d) -> IcsiInstance:
    """One receiver per (user, missing demanded subfile); side info = the user's cache."""
    d = _demand(d)
    if placement is None:
        placement = sc_place(cfg)
    lam, t = cfg.num_caches, cfg.t
    side = {
        c: sum(1 << x.message_index(lam) for x in placement.contents(c)) for c in range(1, lam + 1)
    }
    subsets = enumerate_subsets(lam, t)
    receivers = []
    for u in assoc.users:
        c = assoc.cache_of(u)
        for T in subsets:
            if c in T:
                continue
            sub = SubfileId(d[u], T)
            receivers.append(Receiver(sub.message_index(lam), side[c], u, sub))
    return IcsiInstance(cfg.num_messages, tuple(receivers), lam, t)


def construct_B(cfg: SystemConfig, assoc: Association, d) -> frozenset[SubfileId]:
    """The constructive generalized independent set ``B(d)``.

    Redundant users are eliminated first and caches ranked by decreasing
    occupancy. For each requested file ``i``, ``c(i)`` is the rank of the
    cache of the lowest-numbered surviving user asking for ``i``;
    ``B`` collects every ``X^i_T`` whose caches all rank after ``c(i)``.
    """
    d = _demand(d)
    t = cfg.t
    reduced, _, _ = eliminate_redundant(assoc, d)
    rank_of = {label: pos for pos, label in enumerate(reduced.labels, start=1)}
    owner: dict[int, int] = {}
    for u in sorted(u for g in reduced.groups for u in g):
        owner.setdefault(d[u], u)
    out = set()
    for f, u in owner.items():
        ci = rank_of[reduced.cache_of(u)]
        allowed = reduced.labels[ci:]
        if len(allowed) < t:
            continue
        for T in enumerate_subsets(len(allowed), t):
            out.add(SubfileId(f, tuple(sorted(allowed[k - 1] for k in T))))
    return frozenset(out)


def alpha_formula(cfg: SystemConfig, assoc: Association, d=None) -> int:
    """``sum_i L'_i * C(L - i, t)`` over the (reduced, sorted) profile."""
    if d is not None:
        assoc = eliminate_redundant(assoc, d)[0]
    profile = sorted(assoc.profile, reverse=True)
    lam, t = cfg.num_caches, cfg.t
    return sum(profile[i - 1] * binomial(lam - i, t) for i in range(1, lam - t + 1))


def to_mask(messages, num_caches: int | None = None) -> int:
    mask = 0
    for m in messages:
        if isinstance(m, SubfileId):
            m = m.message_index(num_caches)
        mask |= 1 << m
    return mask


def _free(inst: IcsiInstance, x: int, S: int) -> bool:
    # some receiver of x sees none of S besides x
    return any(r.wants == x and not (r.has & S) for r in inst.receivers)


def is_generalized_independent(inst: IcsiInstance, H, method: str = "peel", limit: int = ALPHA_LIMIT) -> bool:
    """True iff every non-empty subset of ``H`` lies in ``J(H)``.

    ``method="peel"`` repeatedly removes an element that some receiver can
    take without holding any other remaining element; whether such an
    element exists is anti-monotone in the set, so the peel succeeds iff no
    subset is blocked. ``method="exhaustive"`` checks every subset directly.
    """
    mask = H if isinstance(H, int) else to_mask(H, inst.num_caches)
    if method == "peel":
        remaining = mask
        while remaining:
            for x in gf2.bits(remaining):
                if _free(inst, x, remaining):
                    remaining &= ~(1 << x)
                    break
            else:
                return False
        return True
    if method != "exhaustive":
        raise ValueError(f"unknown method {method!r}")
    elems = list(gf2.bits(mask))
    if len(elems) > limit:
        raise OracleLimitError(f"|H| = {len(elems)} exceeds exhaustive limit {limit}")
    for sel in range(1, 1 << len(elems)):
        S = 0
        for k in gf2.bits(sel):
            S |= 1 << elems[k]
        if not any(_free(inst, x, S) for x in gf2.bits(S)):
            return False
    return True


def _reduced_problem(inst: IcsiInstance):
    """Reindex onto wanted messages, ascending side-information degree first.

    Messages nobody wants cannot belong to a generalized independent set and
    can be zeroed in any fitting matrix without raising its rank, so both
    oracles work on the wanted messages only.
    """
    wanted = list(gf2.bits(inst.wanted))
    wmask = inst.wanted
    degree = {x: min((r.has & wmask).bit_count() for r in inst.receivers if r.wants == x) for x in wanted}
    order = sorted(wanted, key=lambda x: (degree[x], x))
    new = {x: i for i, x in enumerate(order)}

    def remap(mask: int) -> int:
        out = 0
        for x in gf2.bits(mask & wmask):
            out |= 1 << new[x]
        return out

    receivers = sorted({(new[r.wants], remap(r.has)) for r in inst.receivers})
    return order, receivers


def max_generalized_independent_set(inst: IcsiInstance, limit: int = ALPHA_LIMIT) -> frozenset[int]:
    """A maximum generalized independent set, by branch and bound.

    Sets are grown by appending a message that has a receiver holding none
    of the messages already chosen; every generalized independent set can
    be built this way (reverse peel order).
    """
    order, receivers = _reduced_problem(inst)
    n = len(order)
    if n > limit:
        raise OracleLimitError(f"{n} wanted messages exceed the alpha oracle limit {limit}")
    masks: list[list[int]] = [[] for _ in range(n)]
    for x, has in receivers:
        masks[x].append(has)
    for x in range(n):
        # keep only minimal side-information sets
        ms = sorted(set(masks[x]), key=int.bit_count)
        masks[x] = [m for i, m in enumerate(ms) if not any(o & m == o for o in ms[:i])]

    best = [0, 0]
    seen: set[int] = set()

    def addable(cur: int, cand: int) -> int:
        out = 0
        for y in gf2.bits(cand):
            if any(not (m & cur) for m in masks[y]):
                out |= 1 << y
        return out

    def search(cur: int, cand: int) -> None:
        size = cur.bit_count()
        if size > best[1]:
            best[0], best[1] = cur, size
        if size + cand.bit_count() <= best[1]:
            return
        for x in gf2.bits(cand):
            new = cur | (1 << x)
            if new in seen:
                continue
            seen.add(new)
            search(new, addable(new, cand & ~new))
            if size + cand.bit_count() <= best[1]:
                return

    search(0, (1 << n) - 1)
    return frozenset(order[i] for i in gf2.bits(best[0]))


def alpha_bruteforce(inst: IcsiInstance, limit: int = ALPHA_LIMIT) -> int:
    """Generalized independence number by exhaustive branch and bound."""
    if not inst.receivers:
        return 0
    return len(max_generalized_independent_set(inst, limit))


def _greedy_gis(n: int, receivers, tries: int = 8, seed: int = 0) -> list[int]:
    """A few large generalized independent sets (bitmasks), grown greedily."""
    import random

    masks: list[list[int]] = [[] for _ in range(n)]
    for x, has in receivers:
        masks[x].append(has)
    rng = random.Random(seed)
    found: set[int] = set()
    for attempt in range(tries):
        order = list(range(n))
        if attempt:
            rng.shuffle(order)
        cur = 0
        while True:
            cand = [y for y in order if not (cur >> y) & 1 and any(not (m & cur) for m in masks[y])]
            if not cand:
                break

            def blocked(y: int) -> int:
                nxt = cur | (1 << y)
                return sum(1 for z in cand if z != y and all(m & nxt for m in masks[z]))

            cur |= 1 << min(cand, key=blocked)
        found.add(cur)
    return sorted(found, key=lambda h: -h.bit_count())[:4]


def kappa_bruteforce(
    inst: IcsiInstance, limit: int = KAPPA_LIMIT, upper: int | None = None, gis_bound: bool = True
) -> int:
    """Binary min-rank: the shortest scalar linear index code over GF(2).

    Depth-first search over row spaces. A receiver already served by the
    current span (it contains ``e_f + v`` with ``v`` inside the receiver's
    side information) needs no branching; otherwise one branch per coset
    of the span among its admissible rows. Spans seen before are skipped.

    With ``gis_bound`` a branch is cut using generalized independent sets
    ``H`` found greedily up front: any completion ``S'`` of the span ``S``
    has ``dim S' >= dim S + |H| - rank(S restricted to H)``.
    ``upper`` is an optional known code length used as the initial incumbent.
    """
    return _kappa_search(inst, limit, upper, gis_bound)[0]


def min_rank_code(inst: IcsiInstance, limit: int = KAPPA_LIMIT, gis_bound: bool = True) -> list[int]:
    """Rows (message bitmasks) of a shortest scalar linear index code."""
    return _kappa_search(inst, limit, None, gis_bound)[1]


def _kappa_search(inst: IcsiInstance, limit: int, upper: int | None, gis_bound: bool) -> tuple[int, list[int] | None]:
    if not inst.receivers:
        return 0, []
    order, receivers = _reduced_problem(inst)
    n = len(order)
    if n > limit:
        raise OracleLimitError(f"{n} wanted messages exceed the kappa oracle limit {limit}")
    full = (1 << n) - 1
    # unicast of every wanted message is always a valid code
    best = [n]
    best_rows: list[list[int] | None] = [[1 << i for i in range(n)]]
    if upper is not None and upper < n:
        best, best_rows = [upper], [None]
    reqs = [(1 << f, has, full & ~(has | (1 << f))) for f, has in receivers]
    gis = _greedy_gis(n, receivers) if gis_bound else []
    seen: set[tuple[int, ...]] = set()

    def lower_bound(basis: gf2.Basis) -> int:
        r = len(basis)
        vecs = basis.vectors()
        return max((r + H.bit_count() - gf2.rank(v & H for v in vecs) for H in gis), default=r)

    def candidates(basis: gf2.Basis, req) -> list[int]:
        target, has, _ = req
        side = list(gf2.bits(has))
        reps = set()
        v = target
        reps.add(basis.reduce(v))
        # Gray-code walk over subsets of the side information
        for i in range(1, 1 << len(side)):
            flip = (i & -i).bit_length() - 1
            v ^= 1 << side[flip]
            reps.add(basis.reduce(v))
        reps.discard(0)
        return sorted(reps, key=int.bit_count)

    def search(basis: gf2.Basis, pending: list) -> None:
        r = len(basis)
        if r >= best[0]:
            return
        open_reqs = [q for q in pending if not _served(basis, q)]
        if not open_reqs:
            best[0] = r
            best_rows[0] = basis.vectors()
            return
        if max(r + 1, lower_bound(basis)) >= best[0]:
            return
        key = basis.key()
        if key in seen:
            return
        seen.add(key)
        options = [(candidates(basis, q), q) for q in open_reqs]
        reps, _ = min(options, key=lambda o: len(o[0]))
        children = []
        for v in reps:
            nb = basis.copy()
            nb.add(v)
            children.append((sum(1 for q in open_reqs if _served(nb, q)), nb))
        # most receivers served first, so good incumbents turn up early
        children.sort(key=lambda c: -c[0])
        for _, nb in children:
            search(nb, open_reqs)
            if r + 1 >= best[0]:
                return

    search(gf2.Basis(), reqs)
    rows = best_rows[0]
    if rows is not None:
        rows = [sum(1 << order[i] for i in gf2.bits(v)) for v in rows]
    return best[0], rows


def _served(basis: gf2.Basis, req) -> bool:
    target, _, forbidden = req
    # vectors of the span vanishing on forbidden bits: eliminate forbidden pivots
    piv: dict[int, int] = {}
    free: list[int] = []
    for v in basis.vectors():
        while v & forbidden:
            p = (v & forbidden).bit_length() - 1
            if p in piv:
                v ^= piv[p]
            else:
                piv[p] = v
                break
        else:
            free.append(v)
    return any(v & target for v in free)


def decoding_combination(inst: IcsiInstance, rows: Sequence[int], receiver: int) -> int:
    """Bitmask of plan rows whose XOR yields the demanded message plus known side information."""
    r = inst.receivers[receiver]
    restricted = [row & ~r.has for row in rows]
    combo = gf2.solve_combination(restricted, 1 << r.wants)
    if combo is None:
        raise DecodeError(receiver, r.wants)
    return combo


def receiver_decode(
    inst: IcsiInstance,
    rows: Sequence[int],
    receiver: int,
    symbols: Sequence[int],
    known: Mapping[int, int],
) -> int:
    """Recover the demanded message of ``receiver`` from received ``symbols``.

    ``known`` maps side-information message indices to their values; only
    entries inside the receiver's side information are read.
    """
    r = inst.receivers[receiver]
    combo = decoding_combination(inst, rows, receiver)
    value = 0
    used = 0
    for i in gf2.bits(combo):
        value ^= symbols[i]
        used ^= rows[i]
    for m in gf2.bits(used & r.has):
        value ^= known[m]
    return value


@dataclass
class BoundsReport:
    alpha_lower: int
    alpha_witness: list[SubfileId]
    kappa_upper: int
    kappa_witness: str
    alpha_exact: int | None = None
    kappa_exact: int | None = None
    exact_source: str | None = None
    skipped: dict[str, str] = field(default_factory=dict)

    @property
    def bounds_meet(self) -> bool:
        return self.alpha_lower == self.kappa_upper

    def check(self) -> None:
        chain = [self.alpha_lower, self.alpha_exact, self.kappa_exact, self.kappa_upper]
        vals = [v for v in chain if v is not None]
        if any(a > b for a, b in zip(vals, vals[1:])):
            raise AssertionError(f"bound ordering violated: {chain}")

    def to_json(self) -> dict:
        out = {
            "alpha_lower": self.alpha_lower,
            "alpha_witness": [{"file": x.file, "subset": list(x.subset)} for x in self.alpha_witness],
            "kappa_upper": self.kappa_upper,
            "kappa_witness": self.kappa_witness,
            "bounds_meet": self.bounds_meet,
        }
        if self.alpha_exact is not None:
            out["alpha_exact"] = self.alpha_exact
        if self.kappa_exact is not None:
            out["kappa_exact"] = self.kappa_exact
        if self.exact_source:
            out["exact_source"] = self.exact_source
        if self.skipped:
            out["skipped"] = dict(self.skipped)
        return out


def compute_bounds(
    cfg: SystemConfig,
    assoc: Association,
    d,
    run_oracles: bool = True,
    alpha_limit: int = ALPHA_LIMIT,
    kappa_limit: int = KAPPA_LIMIT,
) -> BoundsReport:
    """alpha lower bound from ``B(d)``, kappa upper bound from the shorter plan, optional oracles.

    When the two bounds coincide both exact values follow without search.
    With ``run_oracles`` the exhaustive oracles also run (within their
    limits) and their values replace the sandwich; an oracle over its limit
    is recorded in ``skipped``.
    """
    d = _demand(d)
    witness = sorted(construct_B(cfg, assoc, d), key=lambda x: x.message_index(cfg.num_caches))
    plans = [sc_delivery(cfg, assoc, d), improved_delivery(cfg, assoc, d)]
    plan = min(plans, key=len)
    report = BoundsReport(len(witness), witness, len(plan), plan.scheme)
    if report.bounds_meet:
        report.alpha_exact = report.kappa_exact = report.alpha_lower
        report.exact_source = "sandwich"
    if run_oracles:
        inst = build_icsi(cfg, None, assoc, d)
        ran = False
        try:
            report.alpha_exact = alpha_bruteforce(inst, alpha_limit)
            ran = True
        except OracleLimitError as exc:
            report.skipped["alpha"] = str(exc)
        try:
            report.kappa_exact = kappa_bruteforce(inst, kappa_limit, upper=report.kappa_upper)
            ran = True
        except OracleLimitError as exc:
            report.skipped["kappa"] = str(exc)
        if ran:
            report.exact_source = "oracle"
    report.check()
    return report

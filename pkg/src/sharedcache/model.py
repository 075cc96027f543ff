"""System parameters, subset combinatorics and shared-cache placement.

Conventions used throughout the package:

* users, files and caches are numbered from 1;
* a cache set ``T`` is a strictly increasing tuple of cache labels;
* a subfile ``X^n_T`` is identified by :class:`SubfileId` ``(n, T)``;
* message indices (index-coding view) are 0-based:
  ``(n - 1) * C(L, t) + colex_rank(T)``;
* bit vectors (files, subfiles, packets) are Python ints, bit ``i`` being
  the ``i``-th bit of the payload.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterable, Mapping, NamedTuple, Sequence


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


def binomial(n: int, k: int) -> int:
    """Exact binomial coefficient, zero when ``k < 0`` or ``k > n``."""
    if n < 0:
        raise ValueError("binomial: n must be non-negative")
    if k < 0 or k > n:
        return 0
    return comb(n, k)


@lru_cache(maxsize=None)
def enumerate_subsets(ground: int, size: int) -> tuple[tuple[int, ...], ...]:
    """All ``size``-subsets of ``{1..ground}`` in colexicographic order.

    >>> enumerate_subsets(3, 2)
    ((1, 2), (1, 3), (2, 3))
    """
    if not 0 <= size <= ground:
        raise ValueError(f"subset size {size} outside [0, {ground}]")
    return tuple(sorted(combinations(range(1, ground + 1), size), key=lambda s: s[::-1]))


def colex_rank(subset: Sequence[int]) -> int:
    """0-based rank of an increasing tuple among same-size subsets in colex order."""
    return sum(comb(a - 1, i + 1) for i, a in enumerate(subset))


def colex_unrank(rank: int, size: int) -> tuple[int, ...]:
    out = []
    for i in range(size, 0, -1):
        a = i
        while comb(a, i) <= rank:
            a += 1
        # largest a-1 with comb(a-1, i) <= rank
        rank -= comb(a - 1, i)
        out.append(a)
    return tuple(reversed(out))


def _as_fraction(value, name: str) -> Fraction:
    if isinstance(value, bool):
        raise ConfigError(name, "expected a number")
    try:
        return Fraction(value)
    except (TypeError, ValueError):
        raise ConfigError(name, f"cannot interpret {value!r} as a rational number") from None


def _positive_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(name, f"expected a positive integer, got {value!r}")
    return value


@dataclass(frozen=True)
class SystemConfig:
    """Global system parameters (N files, K users, L caches, memory M files)."""

    num_files: int
    num_users: int
    num_caches: int
    cache_memory: Fraction
    file_size_bits: int

    def __post_init__(self):
        _positive_int(self.num_files, "num_files")
        _positive_int(self.num_users, "num_users")
        _positive_int(self.num_caches, "num_caches")
        _positive_int(self.file_size_bits, "file_size_bits")
        object.__setattr__(self, "cache_memory", _as_fraction(self.cache_memory, "cache_memory"))
        if self.num_caches > self.num_users:
            raise ConfigError("num_caches", "must not exceed num_users")
        if not 0 <= self.cache_memory <= self.num_files:
            raise ConfigError("cache_memory", "must lie in [0, num_files]")
        if self.has_integral_t and self.file_size_bits % self.num_subfiles:
            raise ConfigError(
                "file_size_bits",
                f"{self.file_size_bits} is not divisible by C({self.num_caches}, {self.t}) = {self.num_subfiles}",
            )

    @property
    def gamma(self) -> Fraction:
        return self.cache_memory / self.num_files

    @property
    def t_exact(self) -> Fraction:
        return self.num_caches * self.gamma

    @property
    def has_integral_t(self) -> bool:
        return self.t_exact.denominator == 1

    @property
    def t(self) -> int:
        """Integer replication parameter; raises if ``L * gamma`` is fractional."""
        if not self.has_integral_t:
            raise ConfigError("cache_memory", f"t = L*gamma = {self.t_exact} is not an integer")
        return int(self.t_exact)

    @property
    def num_subfiles(self) -> int:
        return binomial(self.num_caches, self.t)

    @property
    def subfile_bits(self) -> int:
        return self.file_size_bits // self.num_subfiles

    @property
    def num_messages(self) -> int:
        return self.num_files * self.num_subfiles

    def with_t(self, t: int) -> "SystemConfig":
        """Same system at memory point ``t`` (file size rescaled to stay divisible)."""
        memory = Fraction(t * self.num_files, self.num_caches)
        sub = binomial(self.num_caches, t)
        bits = self.file_size_bits if self.file_size_bits % sub == 0 else sub
        return SystemConfig(self.num_files, self.num_users, self.num_caches, memory, bits)


@dataclass(frozen=True)
class Association:
    """User-to-cache association.

    ``groups[i]`` is the ordered user list attached to the cache labelled
    ``labels[i]``. Reordering (see :meth:`canonical`) moves labels with their
    groups, so cache identities never change.
    """

    groups: tuple[tuple[int, ...], ...]
    labels: tuple[int, ...] = ()

    def __post_init__(self):
        groups = tuple(tuple(g) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        labels = tuple(self.labels) if self.labels else tuple(range(1, len(groups) + 1))
        if len(labels) != len(groups) or sorted(labels) != list(range(1, len(groups) + 1)):
            raise ConfigError("association", "cache labels must be a permutation of 1..L")
        object.__setattr__(self, "labels", labels)
        seen: set[int] = set()
        for g in groups:
            for u in g:
                if u in seen:
                    raise ConfigError("association", f"user {u} assigned to more than one cache")
                seen.add(u)

    @classmethod
    def from_profile(cls, profile: Sequence[int]) -> "Association":
        """Consecutive user ids, ``profile[i]`` of them on cache ``i + 1``."""
        groups, nxt = [], 1
        for size in profile:
            groups.append(tuple(range(nxt, nxt + size)))
            nxt += size
        return cls(tuple(groups))

    @property
    def num_caches(self) -> int:
        return len(self.groups)

    @property
    def profile(self) -> tuple[int, ...]:
        return tuple(len(g) for g in self.groups)

    @property
    def users(self) -> tuple[int, ...]:
        return tuple(sorted(u for g in self.groups for u in g))

    def cache_of(self, user: int) -> int:
        for label, g in zip(self.labels, self.groups):
            if user in g:
                return label
        raise KeyError(f"user {user} is not associated with any cache")

    def group(self, label: int) -> tuple[int, ...]:
        return self.groups[self.labels.index(label)]

    def is_canonical(self) -> bool:
        p = self.profile
        return all(p[i] >= p[i + 1] for i in range(len(p) - 1))

    def canonical(self) -> "Association":
        """Caches reordered by decreasing occupancy (stable); labels travel along."""
        order = sorted(range(self.num_caches), key=lambda i: -len(self.groups[i]))
        return Association(tuple(self.groups[i] for i in order), tuple(self.labels[i] for i in order))

    def validate(self, cfg: SystemConfig) -> None:
        if self.num_caches != cfg.num_caches:
            raise ConfigError("association", f"expected {cfg.num_caches} caches, got {self.num_caches}")
        if self.users != tuple(range(1, cfg.num_users + 1)):
            raise ConfigError("association", f"groups must partition users 1..{cfg.num_users}")


@dataclass(frozen=True)
class DemandVector:
    demands: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "demands", tuple(self.demands))

    def __getitem__(self, user: int) -> int:
        return self.demands[user - 1]

    def __len__(self) -> int:
        return len(self.demands)

    @property
    def num_distinct(self) -> int:
        return len(set(self.demands))

    def validate(self, cfg: SystemConfig) -> None:
        if len(self.demands) != cfg.num_users:
            raise ConfigError("demands", f"expected {cfg.num_users} entries, got {len(self.demands)}")
        for i, n in enumerate(self.demands):
            if isinstance(n, bool) or not isinstance(n, int) or not 1 <= n <= cfg.num_files:
                raise ConfigError("demands", f"entry {i + 1} = {n!r} outside [1, {cfg.num_files}]")


def _demand(d) -> DemandVector:
    return d if isinstance(d, DemandVector) else DemandVector(tuple(d))


class SubfileId(NamedTuple):
    file: int
    subset: tuple[int, ...]

    def message_index(self, num_caches: int) -> int:
        return (self.file - 1) * binomial(num_caches, len(self.subset)) + colex_rank(self.subset)

    @classmethod
    def from_message_index(cls, index: int, num_caches: int, t: int) -> "SubfileId":
        per_file = binomial(num_caches, t)
        n, r = divmod(index, per_file)
        return cls(n + 1, colex_unrank(r, t))

    def __str__(self) -> str:
        return f"X^{self.file}_{{{','.join(map(str, self.subset))}}}"


def subfile_ids(cfg: SystemConfig) -> list[SubfileId]:
    """All subfiles in message-index order."""
    subsets = enumerate_subsets(cfg.num_caches, cfg.t)
    return [SubfileId(n, T) for n in range(1, cfg.num_files + 1) for T in subsets]


@dataclass(frozen=True)
class Placement:
    cfg: SystemConfig
    caches: Mapping[int, frozenset]
    payloads: Mapping[SubfileId, int] | None = field(default=None, compare=False)

    def contents(self, cache: int) -> frozenset:
        return self.caches[cache]

    def cached_bits(self, cache: int) -> int:
        return len(self.caches[cache]) * self.cfg.subfile_bits

    def payload(self, sub: SubfileId) -> int:
        if self.payloads is None:
            raise ValueError("placement was built without payloads")
        return self.payloads[sub]

    def reassemble(self, file: int) -> int:
        """Concatenate the subfiles of ``file`` in colex order."""
        bits = self.cfg.subfile_bits
        out = 0
        for r, T in enumerate(enumerate_subsets(self.cfg.num_caches, self.cfg.t)):
            out |= self.payload(SubfileId(file, T)) << (r * bits)
        return out


def split_file(value: int, cfg: SystemConfig) -> list[int]:
    bits = cfg.subfile_bits
    mask = (1 << bits) - 1
    return [(value >> (r * bits)) & mask for r in range(cfg.num_subfiles)]


def sc_place(cfg: SystemConfig, payloads: Sequence[int] | None = None) -> Placement:
    """Shared-cache prefetching: cache ``c`` stores every ``X^n_T`` with ``c in T``.

    With ``payloads`` (one ``F``-bit int per file) each file is cut into
    ``C(L, t)`` contiguous chunks assigned to the subsets in colex order.
    """
    t = cfg.t
    subsets = enumerate_subsets(cfg.num_caches, t)
    caches = {
        c: frozenset(SubfileId(n, T) for n in range(1, cfg.num_files + 1) for T in subsets if c in T)
        for c in range(1, cfg.num_caches + 1)
    }
    sub_payloads = None
    if payloads is not None:
        if len(payloads) != cfg.num_files:
            raise ConfigError("payloads", f"expected {cfg.num_files} files, got {len(payloads)}")
        sub_payloads = {}
        for n, value in enumerate(payloads, start=1):
            if value < 0 or value.bit_length() > cfg.file_size_bits:
                raise ConfigError("payloads", f"file {n} does not fit in {cfg.file_size_bits} bits")
            for T, chunk in zip(subsets, split_file(value, cfg)):
                sub_payloads[SubfileId(n, T)] = chunk
    return Placement(cfg, caches, sub_payloads)


SYSTEM_FIELDS = ("num_files", "num_users", "num_caches", "cache_memory", "file_size_bits", "association", "demands")


def system_from_dict(
    obj: Mapping, extra_fields: Iterable[str] = ()
) -> tuple[SystemConfig, Association, DemandVector | None]:
    """Parse and validate the JSON system description.

    Unknown keys are rejected unless listed in ``extra_fields``.
    """
    if not isinstance(obj, Mapping):
        raise ConfigError("config", "expected a JSON object")
    allowed = set(SYSTEM_FIELDS) | set(extra_fields)
    for key in obj:
        if key not in allowed:
            raise ConfigError(key, "unknown field")
    for key in SYSTEM_FIELDS[:5] + ("association",):
        if key not in obj:
            raise ConfigError(key, "missing required field")
    memory = obj["cache_memory"]
    if isinstance(memory, str):
        memory = memory.strip()
    cfg = SystemConfig(
        obj["num_files"], obj["num_users"], obj["num_caches"], _as_fraction(memory, "cache_memory"),
        obj["file_size_bits"],
    )
    groups = obj["association"]
    if not isinstance(groups, list) or not all(isinstance(g, list) for g in groups):
        raise ConfigError("association", "expected a list of user-id lists")
    for g in groups:
        for u in g:
            if isinstance(u, bool) or not isinstance(u, int):
                raise ConfigError("association", f"user id {u!r} is not an integer")
    assoc = Association(tuple(tuple(g) for g in groups))
    assoc.validate(cfg)
    demands = None
    if obj.get("demands") is not None:
        if not isinstance(obj["demands"], list):
            raise ConfigError("demands", "expected a list of file ids")
        demands = DemandVector(tuple(obj["demands"]))
        demands.validate(cfg)
    return cfg, assoc, demands


def system_to_dict(cfg: SystemConfig, assoc: Association, d: DemandVector | None = None) -> dict:
    groups = [list(assoc.group(c)) for c in range(1, assoc.num_caches + 1)]
    mem = cfg.cache_memory
    out = {
        "num_files": cfg.num_files,
        "num_users": cfg.num_users,
        "num_caches": cfg.num_caches,
        "cache_memory": int(mem) if mem.denominator == 1 else str(mem),
        "file_size_bits": cfg.file_size_bits,
        "association": groups,
    }
    if d is not None:
        out["demands"] = list(d.demands)
    return out

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sharedcache.model import (
    Association,
    ConfigError,
    DemandVector,
    SubfileId,
    SystemConfig,
    colex_rank,
    colex_unrank,
    enumerate_subsets,
    sc_place,
    split_file,
    subfile_ids,
    system_from_dict,
    system_to_dict,
)


def test_enumerate_subsets_colex():
    assert enumerate_subsets(4, 2) == ((1, 2), (1, 3), (2, 3), (1, 4), (2, 4), (3, 4))
    assert enumerate_subsets(3, 0) == ((),)
    with pytest.raises(ValueError):
        enumerate_subsets(3, 4)


@given(st.integers(0, 7).flatmap(lambda k: st.tuples(st.just(k), st.integers(k, 9))))
def test_colex_rank_matches_enumeration(kn):
    k, n = kn
    for r, s in enumerate(enumerate_subsets(n, k)):
        assert colex_rank(s) == r
        assert colex_unrank(r, k) == s


def test_message_index_roundtrip():
    for T in enumerate_subsets(4, 2):
        for n in (1, 5):
            sub = SubfileId(n, T)
            assert SubfileId.from_message_index(sub.message_index(4), 4, 2) == sub
    assert str(SubfileId(1, (2, 3))) == "X^1_{2,3}"


@pytest.mark.parametrize(
    "args, field",
    [
        ((8, 8, 9, 4, 6), "num_caches"),
        ((8, 8, 4, 9, 6), "cache_memory"),
        ((8, 8, 4, 4, 7), "file_size_bits"),
        ((0, 8, 4, 4, 6), "num_files"),
    ],
)
def test_config_validation_names_field(args, field):
    with pytest.raises(ConfigError) as err:
        SystemConfig(*args)
    assert err.value.field == field


def test_fractional_t_rejected_when_needed():
    cfg = SystemConfig(3, 2, 2, Fraction(1, 2), 4)
    assert not cfg.has_integral_t
    with pytest.raises(ConfigError):
        cfg.t


def test_association_canonical_keeps_labels():
    a = Association(((4,), (1, 2, 3), (5, 6)))
    c = a.canonical()
    assert c.profile == (3, 2, 1)
    assert c.labels == (2, 3, 1)
    assert c.cache_of(4) == 1 and c.cache_of(5) == 3
    assert c.group(1) == (4,)


def test_association_validation():
    cfg = SystemConfig(4, 4, 2, 2, 2)
    with pytest.raises(ConfigError):
        Association(((1, 2), (2, 3, 4))).validate(cfg)
    with pytest.raises(ConfigError):
        Association(((1, 2), (3,))).validate(cfg)
    Association(((1, 2), (3, 4))).validate(cfg)


def test_demands_validation():
    cfg = SystemConfig(4, 4, 2, 2, 2)
    with pytest.raises(ConfigError):
        DemandVector((1, 2, 5, 1)).validate(cfg)
    with pytest.raises(ConfigError):
        DemandVector((1, 2)).validate(cfg)
    assert DemandVector((1, 2, 2, 1)).num_distinct == 2


def test_placement_memory_and_reassembly(ex1):
    cfg, _ = ex1
    payloads = [(n * 0x9E3779B97F4A7C15) % (1 << cfg.file_size_bits) for n in range(1, 9)]
    pl = sc_place(cfg, payloads)
    for c in range(1, 5):
        # M*F bits per cache
        assert pl.cached_bits(c) == cfg.cache_memory * cfg.file_size_bits
        assert all(c in x.subset for x in pl.contents(c))
    for n, value in enumerate(payloads, start=1):
        assert pl.reassemble(n) == value
    assert len(split_file(payloads[0], cfg)) == 6
    assert len(subfile_ids(cfg)) == cfg.num_messages == 48


def test_system_json_roundtrip(ex1):
    cfg, assoc = ex1
    d = DemandVector(tuple(range(1, 9)))
    obj = system_to_dict(cfg, assoc, d)
    cfg2, assoc2, d2 = system_from_dict(obj)
    assert cfg2 == cfg and d2 == d
    assert assoc2.canonical().groups == assoc.canonical().groups


def test_system_json_rejects_unknown_and_missing():
    base = {
        "num_files": 2, "num_users": 2, "num_caches": 2, "cache_memory": 1,
        "file_size_bits": 2, "association": [[1], [2]],
    }
    system_from_dict(base)
    with pytest.raises(ConfigError) as err:
        system_from_dict({**base, "colour": 1})
    assert err.value.field == "colour"
    missing = dict(base)
    del missing["association"]
    with pytest.raises(ConfigError) as err:
        system_from_dict(missing)
    assert err.value.field == "association"
    assert system_from_dict({**base, "cache_memory": "1/2", "file_size_bits": 4})[0].cache_memory == Fraction(1, 2)

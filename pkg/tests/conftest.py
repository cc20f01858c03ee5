import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fga import GraphMap, MarkedGraph, build_cover


@pytest.fixture(scope="session")
def rose2():
    return MarkedGraph.rose(("a", "b"))


@pytest.fixture(scope="session")
def rose3():
    return MarkedGraph.rose(("a", "b", "c"))


@pytest.fixture(scope="session")
def fib(rose2):
    # a -> ab, b -> a
    return GraphMap.from_strs(rose2, {"a": "a b", "b": "a"})


@pytest.fixture(scope="session")
def fib_inv(rose2):
    # inverse automorphism: a -> b, b -> b^-1 a
    return GraphMap.from_strs(rose2, {"a": "b", "b": "b' a"})


@pytest.fixture(scope="session")
def psi3(rose3):
    # a -> b, b -> c, c -> cab; growth ~ 1.8393 in both directions
    return GraphMap.from_strs(rose3, {"a": "b", "b": "c", "c": "c a b"})


@pytest.fixture(scope="session")
def psi3_inv(rose3):
    return GraphMap.from_strs(rose3, {"a": "b' c a'", "b": "a", "c": "b"})


@pytest.fixture(scope="session")
def cover2(rose2):
    # index-2 subgroup: words with an even number of b's
    gens = [rose2.parse_word(w) for w in ("a", "b b", "b a b'")]
    return build_cover(rose2, gens, name="evenb")


@pytest.fixture(scope="session")
def cover3(rose2):
    # index-3 subgroup: kernel of a -> 1, b -> 0 into Z/3
    gens = [rose2.parse_word(w) for w in ("a a a", "b", "a b a'", "a a b a' a'")]
    return build_cover(rose2, gens, name="amod3")

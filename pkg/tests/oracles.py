"""Slow reference implementations used to cross-check the fast code paths.

Everything here is deliberately naive: repeated rescans, full enumerations,
no shared state with the library beyond the arrow encoding itself
(letter 2k = edge k forward, 2k+1 = its reverse).
"""

from __future__ import annotations


def slow_tighten(word: bytes) -> bytes:
    w = list(word)
    changed = True
    while changed:
        changed = False
        for i in range(len(w) - 1):
            if w[i] ^ 1 == w[i + 1]:
                del w[i : i + 2]
                changed = True
                break
    return bytes(w)


def slow_invert(word: bytes) -> bytes:
    return bytes(a ^ 1 for a in reversed(word))


def slow_cyclic_core(word: bytes) -> bytes:
    w = slow_tighten(word)
    while len(w) >= 2 and w[0] ^ 1 == w[-1]:
        w = w[1:-1]
    return w


def slow_least_rotation(word: bytes) -> bytes:
    return min(word[i:] + word[:i] for i in range(len(word))) if word else b""


def slow_map_word(images: dict[int, bytes], word: bytes) -> bytes:
    out = b""
    for a in word:
        img = images[a & ~1]
        out += img if a % 2 == 0 else slow_invert(img)
    return slow_tighten(out)


def slow_cancellation(u: bytes, v: bytes) -> int:
    """Letters cancelled from each side when u and v are concatenated."""
    n = 0
    while n < len(u) and n < len(v) and u[len(u) - 1 - n] ^ 1 == v[n]:
        n += 1
    return n


def enumerate_reduced_words(n_letters: int, max_len: int):
    """All reduced words over a rank-n rose, shortest first."""
    arrows = range(2 * n_letters)
    level = [b""]
    yield b""
    for _ in range(max_len):
        nxt = []
        for w in level:
            for a in arrows:
                if w and w[-1] ^ 1 == a:
                    continue
                w2 = w + bytes([a])
                nxt.append(w2)
                yield w2
        level = nxt

"""Words, polynomials and rewriting in the free *-algebra.

Letters are small integers.  A word is a tuple of letters and the empty
tuple is the identity.  Polynomials carry real coefficients keyed by words
that are canonical (irreducible) under a :class:`RewriteSystem`, which is how
quotient rings such as projector algebras or the CAR algebra are modelled.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

Word = tuple

#: coefficients smaller than this (in magnitude) are treated as zero
COEFF_EPS = 1e-14


class RewriteError(RuntimeError):
    """Raised when reduction does not terminate within the pass cap."""


# ---------------------------------------------------------------------------
# Alphabet
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Alphabet:
    """Letters of the free *-algebra and their adjoint pairing.

    The first ``n`` letters are the base generators.  A non-hermitian
    generator ``i`` owns a second letter holding its adjoint; hermitian
    generators are their own adjoint.

    Parameters
    ----------
    names : tuple of str
        One display name per letter.
    adjoint_map : tuple of int
        ``adjoint_map[l]`` is the letter index of ``l*``.
    n : int
        Number of base generators.
    commuting_groups : tuple of tuple of int, optional
        Partition of the letters; letters from different groups commute.
        This is metadata, the commutation itself lives in the rewrite rules.
    """

    names: tuple
    adjoint_map: tuple
    n: int
    commuting_groups: tuple | None = None

    def __post_init__(self):
        size = len(self.names)
        if len(self.adjoint_map) != size:
            raise ValueError("adjoint_map must have one entry per letter")
        for l, m in enumerate(self.adjoint_map):
            if not 0 <= m < size or self.adjoint_map[m] != l:
                raise ValueError("adjoint_map is not an involution")
        if len(set(self.names)) != size:
            raise ValueError("letter names must be unique")
        if self.commuting_groups is not None:
            seen = sorted(itertools.chain.from_iterable(self.commuting_groups))
            if seen != list(range(size)):
                raise ValueError("commuting_groups must partition the letters")

    @classmethod
    def hermitian(cls, names: int | Sequence[str]) -> "Alphabet":
        """``n`` self-adjoint letters, named ``x1..xn`` by default."""
        if isinstance(names, int):
            names = [f"x{i + 1}" for i in range(names)]
        names = tuple(names)
        return cls(names, tuple(range(len(names))), len(names))

    @classmethod
    def general(cls, names: int | Sequence[str]) -> "Alphabet":
        """``n`` generators plus their ``n`` adjoint letters ``x_{n+i} = x_i*``."""
        if isinstance(names, int):
            names = [f"x{i + 1}" for i in range(names)]
        names = tuple(names)
        n = len(names)
        adj = tuple(range(n, 2 * n)) + tuple(range(n))
        return cls(names + tuple(f"{s}'" for s in names), adj, n)

    @classmethod
    def from_declarations(cls, decls: Iterable[tuple[str, bool]],
                          commuting_groups=None) -> "Alphabet":
        """Mixed alphabet from ``(name, is_hermitian)`` pairs.

        Adjoint letters of the non-hermitian generators are appended after
        all base generators, in declaration order.
        """
        decls = list(decls)
        n = len(decls)
        names = [name for name, _ in decls]
        adj = list(range(n))
        for i, (name, herm) in enumerate(decls):
            if not herm:
                j = len(names)
                names.append(f"{name}'")
                adj[i] = j
                adj.append(i)
        return cls(tuple(names), tuple(adj), n, commuting_groups)

    @property
    def size(self) -> int:
        return len(self.names)

    @property
    def hermitian_mode(self) -> bool:
        return all(self.adjoint_map[l] == l for l in range(self.size))

    def is_hermitian_letter(self, l: int) -> bool:
        return self.adjoint_map[l] == l

    def base_of(self, l: int) -> int:
        """Base generator index that letter ``l`` belongs to."""
        return l if l < self.n else self.adjoint_map[l]

    def index(self, name: str) -> int:
        return self.names.index(name)

    def with_groups(self, groups) -> "Alphabet":
        return Alphabet(self.names, self.adjoint_map, self.n,
                        None if groups is None else tuple(tuple(g) for g in groups))

    def word_str(self, w: Word) -> str:
        if not w:
            return "1"
        return "*".join(self.names[l] for l in w)


def involute(w: Word, a: Alphabet) -> Word:
    """Adjoint of a word: reverse it and map every letter to its adjoint."""
    size = a.size
    out = []
    for l in reversed(w):
        if not 0 <= l < size:
            raise ValueError(f"letter index {l} out of range for alphabet of size {size}")
        out.append(a.adjoint_map[l])
    return tuple(out)


# ---------------------------------------------------------------------------
# Polynomial
# ---------------------------------------------------------------------------

class Polynomial:
    """Sparse real polynomial ``sum_w c_w w``.

    Instances are immutable.  Products need a rewrite system and are built
    with :func:`poly_mul`; ``+``, ``-`` and scaling by numbers work directly.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Word, float] | None = None):
        clean = {}
        if terms:
            for w, c in terms.items():
                c = float(c)
                if abs(c) > COEFF_EPS:
                    clean[tuple(w)] = c
        self._terms = MappingProxyType(clean)
        self._hash = None

    # construction helpers
    @classmethod
    def constant(cls, c: float) -> "Polynomial":
        return cls({(): c})

    @classmethod
    def monomial(cls, w: Word, c: float = 1.0) -> "Polynomial":
        return cls({tuple(w): c})

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls()

    @property
    def terms(self) -> Mapping[Word, float]:
        return self._terms

    def items(self):
        return self._terms.items()

    def words(self):
        return self._terms.keys()

    def coeff(self, w: Word) -> float:
        return self._terms.get(tuple(w), 0.0)

    def degree(self) -> int:
        return max((len(w) for w in self._terms), default=0)

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    # arithmetic
    def __add__(self, other):
        other = _as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self._terms)
        for w, c in other.items():
            out[w] = out.get(w, 0.0) + c
        return Polynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({w: -c for w, c in self._terms.items()})

    def __sub__(self, other):
        other = _as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, s):
        if isinstance(s, (int, float, Fraction)):
            return Polynomial({w: c * float(s) for w, c in self._terms.items()})
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, s):
        if isinstance(s, (int, float, Fraction)):
            return self * (1.0 / float(s))
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, (int, float)):
            other = Polynomial.constant(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return dict(self._terms) == dict(other._terms)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def allclose(self, other: "Polynomial", tol: float = 1e-9) -> bool:
        return max_abs_coeff(self - other) <= tol

    def __repr__(self):
        if not self._terms:
            return "Polynomial(0)"
        return f"Polynomial({dict(self._terms)!r})"

    def to_string(self, a: Alphabet | None = None, fmt=repr) -> str:
        """Readable form, e.g. ``x1*x2 + x2*x1 - 0.5``."""
        if not self._terms:
            return "0"
        parts = []
        for w in sorted(self._terms, key=word_key):
            c = self._terms[w]
            name = (a.word_str(w) if a else "*".join(f"x{l}" for l in w)) if w else ""
            mag = abs(c)
            if not w:
                body = fmt(mag)
            elif mag == 1.0:
                body = name
            else:
                body = f"{fmt(mag)}*{name}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first = parts[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text


def _as_poly(x):
    if isinstance(x, Polynomial):
        return x
    if isinstance(x, (int, float, Fraction)):
        return Polynomial.constant(float(x))
    return NotImplemented


def word_key(w: Word):
    """Canonical word order: length first, then lexicographic on letters."""
    return (len(w), tuple(w))


def max_abs_coeff(p: Polynomial) -> float:
    return max((abs(c) for _, c in p.items()), default=0.0)


# ---------------------------------------------------------------------------
# Rewriting
# ---------------------------------------------------------------------------

class RewriteSystem:
    """Ordered list of rules ``pattern -> polynomial``.

    A word is reduced by repeatedly rewriting the leftmost occurrence of a
    pattern (ties at one position broken by rule order).  Every right-hand
    side must have degree at most the length of its pattern.  Termination is
    only guaranteed for the built-in rule families; arbitrary rules are
    guarded by ``max_passes``, the longest allowed chain of rewrites.
    """

    def __init__(self, rules: Iterable[tuple[Word, Polynomial]] = (), max_passes: int = 256):
        merged: dict = {}
        for pattern, rhs in rules:
            pattern = tuple(pattern)
            if not pattern:
                raise ValueError("empty pattern")
            rhs = _as_poly(rhs)
            if rhs is NotImplemented:
                raise TypeError("rule right-hand side must be a Polynomial or number")
            if rhs.degree() > len(pattern):
                raise ValueError(f"rule {pattern} -> {rhs!r} increases degree")
            if rhs.coeff(pattern) != 0.0:
                raise ValueError(f"rule {pattern} rewrites to itself")
            if pattern in merged:
                if merged[pattern] != rhs:
                    raise ValueError(f"conflicting rules for pattern {pattern}")
                continue
            merged[pattern] = rhs
        self.rules = tuple(merged.items())
        self.max_passes = max_passes
        by_first: dict = {}
        for pattern, rhs in self.rules:
            by_first.setdefault(pattern[0], []).append((pattern, rhs))
        self._by_first = by_first
        self._cache: dict = {}

    def __len__(self):
        return len(self.rules)

    def __repr__(self):
        return f"RewriteSystem({len(self.rules)} rules)"

    def __eq__(self, other):
        if not isinstance(other, RewriteSystem):
            return NotImplemented
        return dict(self.rules) == dict(other.rules)

    def __hash__(self):
        return hash(frozenset(self.rules))

    def extended(self, rules, front: bool = False) -> "RewriteSystem":
        rules = list(rules)
        new = rules + list(self.rules) if front else list(self.rules) + rules
        return RewriteSystem(new, self.max_passes)

    def patterns(self):
        return [p for p, _ in self.rules]

    def find(self, w: Word):
        """Leftmost rule occurrence in ``w`` as ``(pos, pattern, rhs)`` or None."""
        for pos, l in enumerate(w):
            for pattern, rhs in self._by_first.get(l, ()):
                if w[pos:pos + len(pattern)] == pattern:
                    return pos, pattern, rhs
        return None

    def is_canonical(self, w: Word) -> bool:
        return self.find(w) is None

    def reduce(self, w: Word) -> Polynomial:
        """Canonical form of the word ``w`` modulo the rules."""
        return Polynomial(self._reduce(tuple(w), 0))

    def _reduce(self, w, depth):
        cached = self._cache.get(w)
        if cached is not None:
            return cached
        if depth > self.max_passes:
            raise RewriteError(
                f"reduction exceeded {self.max_passes} passes; rule system does not terminate")
        hit = self.find(w)
        if hit is None:
            out = {w: 1.0}
        else:
            pos, pattern, rhs = hit
            head, tail = w[:pos], w[pos + len(pattern):]
            out = {}
            for u, c in rhs.items():
                for v, cv in self._reduce(head + u + tail, depth + 1).items():
                    out[v] = out.get(v, 0.0) + c * cv
            out = {v: c for v, c in out.items() if abs(c) > COEFF_EPS}
        self._cache[w] = out
        return out

    def reduce_poly(self, p: Polynomial) -> Polynomial:
        out: dict = {}
        for w, c in p.items():
            for v, cv in self._reduce(w, 0).items():
                out[v] = out.get(v, 0.0) + c * cv
        return Polynomial(out)


def reduce(w: Word, rs: RewriteSystem | None) -> Polynomial:
    """Reduce a word to canonical form (identity map when ``rs`` is None)."""
    if rs is None:
        return Polynomial.monomial(w)
    return rs.reduce(w)


def reduce_poly(p: Polynomial, rs: RewriteSystem | None) -> Polynomial:
    return p if rs is None else rs.reduce_poly(p)


def poly_mul(p: Polynomial, q: Polynomial, rs: RewriteSystem | None = None) -> Polynomial:
    """Product ``p*q`` reduced to canonical form."""
    out: dict = {}
    for u, cu in p.items():
        for v, cv in q.items():
            if rs is None:
                out[u + v] = out.get(u + v, 0.0) + cu * cv
            else:
                for w, cw in rs._reduce(u + v, 0).items():
                    out[w] = out.get(w, 0.0) + cu * cv * cw
    return Polynomial(out)


def poly_prod(factors: Sequence[Polynomial], rs: RewriteSystem | None = None) -> Polynomial:
    out = Polynomial.constant(1.0)
    for f in factors:
        out = poly_mul(out, f, rs)
    return out


def poly_adjoint(p: Polynomial, a: Alphabet, rs: RewriteSystem | None = None) -> Polynomial:
    """``p*``: involute every word (real coefficients are unchanged)."""
    out: dict = {}
    for w, c in p.items():
        for v, cv in reduce(involute(w, a), rs).items():
            out[v] = out.get(v, 0.0) + c * cv
    return Polynomial(out)


def is_hermitian(p: Polynomial, a: Alphabet, rs: RewriteSystem | None = None,
                 tol: float = 1e-12) -> bool:
    return max_abs_coeff(poly_adjoint(p, a, rs) - p) <= tol


def monomial_basis(d: int, a: Alphabet, rs: RewriteSystem | None = None) -> list:
    """All canonical words of length at most ``d`` in length-lex order.

    Canonical words are closed under taking prefixes, so the basis is grown
    one letter at a time and only extensions that stay irreducible are kept.
    """
    if d < 0:
        return []
    basis = [()]
    layer = [()]
    for _ in range(d):
        nxt = []
        for w in layer:
            for l in range(a.size):
                u = w + (l,)
                if rs is None or rs.is_canonical(u):
                    nxt.append(u)
        nxt.sort()
        basis.extend(nxt)
        layer = nxt
    return basis


def basis_count(d: int, letters: int) -> int:
    """Number of free words of length <= d over ``letters`` letters."""
    if letters == 1:
        return d + 1
    return (letters ** (d + 1) - 1) // (letters - 1)


# ---------------------------------------------------------------------------
# Built-in rule families
# ---------------------------------------------------------------------------

def idempotent_rules(letters: Iterable[int]) -> list:
    """``x x -> x`` for every letter."""
    return [((l, l), Polynomial.monomial((l,))) for l in letters]


def projector_group_rules(group: Sequence[int]) -> list:
    """Orthogonal projectors: ``E_i E_i -> E_i`` and ``E_i E_j -> 0`` for i != j."""
    rules = idempotent_rules(group)
    for i in group:
        for j in group:
            if i != j:
                rules.append(((i, j), Polynomial.zero()))
    return rules


def commutation_rules(group_a: Iterable[int], group_b: Iterable[int], sign: float = 1.0) -> list:
    """Letters of the two groups (anti)commute; normal form sorts by index."""
    rules = []
    for i in group_a:
        for j in group_b:
            if i == j:
                continue
            lo, hi = min(i, j), max(i, j)
            rules.append(((hi, lo), Polynomial.monomial((lo, hi), sign)))
    return rules


def commutative_rules(a: Alphabet) -> list:
    """Every pair of distinct letters commutes (Lasserre's setting)."""
    letters = range(a.size)
    return [((j, i), Polynomial.monomial((i, j))) for i in letters for j in letters if j > i]


def group_commutation_rules(groups: Sequence[Sequence[int]]) -> list:
    """Letters belonging to different groups commute."""
    rules = []
    for ga, gb in itertools.combinations(groups, 2):
        rules.extend(commutation_rules(ga, gb))
    return rules


def hermitian_rules(a: Alphabet, generators: Iterable[int]) -> list:
    """Identify the adjoint letter of each listed generator with the generator."""
    rules = []
    for i in generators:
        j = a.adjoint_map[i]
        if j != i:
            rules.append(((j,), Polynomial.monomial((i,))))
    return rules


def fermionic_rules(m: int) -> list:
    """CAR normal ordering for ``a_i`` (letter i) and ``a_i^dagger`` (letter m+i).

    Normal form: creation operators first with ascending indices, then
    annihilation operators with ascending indices.
    """
    rules = []
    for i in range(m):
        c_i = m + i
        rules.append(((i, i), Polynomial.zero()))
        rules.append(((c_i, c_i), Polynomial.zero()))
    for i in range(m):
        for j in range(i + 1, m):
            rules.append(((j, i), Polynomial.monomial((i, j), -1.0)))
            rules.append(((m + j, m + i), Polynomial.monomial((m + i, m + j), -1.0)))
    for i in range(m):
        for j in range(m):
            rhs = Polynomial.monomial((m + j, i), -1.0)
            if i == j:
                rhs = rhs + 1.0
            rules.append(((i, m + j), rhs))
    return rules

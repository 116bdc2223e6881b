"""Dirichlet character groups: CRT generator decomposition, conductors,
primitive induction and the representative set C(q).

Characters are labelled by their exponent vector over a fixed generator
choice (smallest primitive roots, the (-1, 5) convention for 2^k with
k >= 3), so labels are reproducible across runs and usable as cache keys.
Values are held as exact integer multiples of 2*pi/L in the exponent and
only converted to complex on demand.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .arith import factorize


def _primitive_root_mod_p(p: int) -> int:
    if p == 2:
        return 1
    order = p - 1
    fac = [f for f, _ in factorize(order).factors]
    for g in range(2, p):
        if all(pow(g, order // f, p) != 1 for f in fac):
            return g
    raise RuntimeError(f"no primitive root mod {p}")


@lru_cache(maxsize=None)
def _odd_prime_power_generator(p: int) -> int:
    """Smallest primitive root mod p that also generates mod every p^k."""
    g = _primitive_root_mod_p(p)
    if p * p < 2**62 and pow(g, p - 1, p * p) == 1:
        g += p
    return g


@dataclass(frozen=True)
class _Block:
    """Character data local to one prime power p^k dividing q."""

    prime: int
    power: int  # k
    modulus: int  # p^k
    orders: tuple[int, ...]  # cyclic factor sizes, product = phi(p^k)
    generators: tuple[int, ...]  # one generator per cyclic factor, mod p^k

    def local_conductor(self, exps: tuple[int, ...]) -> int:
        p, k = self.prime, self.power
        if all(e == 0 for e in exps):
            return 1
        if p == 2:
            if k == 2:
                return 4
            e1, e2 = exps
            if e2 == 0:
                return 4
            v = 0
            m = e2
            while m % 2 == 0:
                m //= 2
                v += 1
            return 2 ** (k - v)
        (e,) = exps
        v = 0
        m = e
        while m % p == 0:
            m //= p
            v += 1
        return p ** max(1, k - v)


def _make_block(p: int, k: int) -> _Block | None:
    pk = p**k
    if p == 2:
        if k == 1:
            return None  # (Z/2)* trivial
        if k == 2:
            return _Block(2, 2, 4, (2,), (3,))
        return _Block(2, k, pk, (2, 2 ** (k - 2)), (pk - 1, 5))
    g = _odd_prime_power_generator(p)
    return _Block(p, k, pk, ((p - 1) * p ** (k - 1),), (g % pk,))


class CharacterGroup:
    """All Dirichlet characters mod q, indexed by exponent vectors."""

    def __init__(self, q: int):
        if q < 1:
            raise ValueError("modulus must be positive")
        self.q = q
        self.blocks: list[_Block] = []
        for p, k in factorize(q).factors:
            blk = _make_block(p, k)
            if blk is not None:
                self.blocks.append(blk)
        self.orders: tuple[int, ...] = tuple(
            n for blk in self.blocks for n in blk.orders
        )
        self.phi = 1
        for n in self.orders:
            self.phi *= n
        self._dlog = self._build_dlog_table()
        self._lcm = math.lcm(*self.orders) if self.orders else 1

    def _build_dlog_table(self) -> np.ndarray:
        """dlog[a, i] = exponent of a on generator i; -1 rows for gcd(a,q)>1."""
        q = self.q
        table = np.full((q if q > 1 else 2, len(self.orders)), -1, dtype=np.int64)
        col = 0
        coprime = np.array([math.gcd(a, q) == 1 for a in range(q)] or [True])
        for blk in self.blocks:
            # enumerate exponent tuples for this block, record residue mod p^k
            local = {}
            exps = [0] * len(blk.orders)
            while True:
                r = 1
                for g, e in zip(blk.generators, exps):
                    r = (r * pow(g, e, blk.modulus)) % blk.modulus
                local[r] = tuple(exps)
                for i in range(len(exps) - 1, -1, -1):
                    exps[i] += 1
                    if exps[i] < blk.orders[i]:
                        break
                    exps[i] = 0
                else:
                    break
            for a in range(1, q):
                if coprime[a]:
                    loc = local[a % blk.modulus]
                    for j, e in enumerate(loc):
                        table[a, col + j] = e
            col += len(blk.orders)
        if q == 1:
            table = np.zeros((1, 0), dtype=np.int64)
        return table

    def character(self, exponents: tuple[int, ...]) -> "Character":
        if len(exponents) != len(self.orders):
            raise ValueError("wrong exponent vector length")
        exponents = tuple(e % n for e, n in zip(exponents, self.orders))
        return Character(self, exponents)

    def characters(self) -> list["Character"]:
        chars = []
        exps = [0] * len(self.orders)
        while True:
            chars.append(self.character(tuple(exps)))
            for i in range(len(exps) - 1, -1, -1):
                exps[i] += 1
                if exps[i] < self.orders[i]:
                    break
                exps[i] = 0
            else:
                break
        return chars


@dataclass(frozen=True, eq=False)
class Character:
    group: CharacterGroup = field(repr=False)
    exponents: tuple[int, ...] = ()

    def __eq__(self, other):
        return (
            isinstance(other, Character)
            and self.modulus == other.modulus
            and self.exponents == other.exponents
        )

    def __hash__(self):
        return hash((self.modulus, self.exponents))

    @property
    def modulus(self) -> int:
        return self.group.q

    @property
    def label(self) -> str:
        return f"{self.modulus}:{','.join(map(str, self.exponents))}"

    @property
    def is_principal(self) -> bool:
        return all(e == 0 for e in self.exponents)

    @property
    def is_real(self) -> bool:
        return all((2 * e) % n == 0 for e, n in zip(self.exponents, self.group.orders))

    def conjugate(self) -> "Character":
        return self.group.character(
            tuple((-e) % n for e, n in zip(self.exponents, self.group.orders))
        )

    @property
    def conductor(self) -> int:
        cond = 1
        pos = 0
        for blk in self.group.blocks:
            n = len(blk.orders)
            cond *= blk.local_conductor(self.exponents[pos : pos + n])
            pos += n
        return cond

    @property
    def parity(self) -> int:
        """0 if chi(-1) = 1 (even), 1 if chi(-1) = -1 (odd)."""
        if self.modulus <= 2:
            return 0
        g = self.group
        d = g._dlog[self.modulus - 1]
        L = g._lcm
        t = 0
        for e, n, dl in zip(self.exponents, g.orders, d):
            t = (t + e * (L // n) * int(dl)) % L
        if t == 0:
            return 0
        if 2 * t == L:
            return 1
        raise RuntimeError("chi(-1) not +-1; inconsistent group data")

    def phases(self) -> np.ndarray:
        """Integer phase t(a) with chi(a) = exp(2 pi i t(a)/L); -1 where chi = 0."""
        g = self.group
        L = g._lcm
        q = max(self.modulus, 1)
        out = np.full(q, -1, dtype=np.int64)
        if self.modulus == 1:
            return np.zeros(1, dtype=np.int64)
        coprime_mask = g._dlog[:, 0] >= 0 if g.orders else np.array(
            [math.gcd(a, q) == 1 for a in range(q)]
        )
        t = np.zeros(q, dtype=np.int64)
        for i, (e, n) in enumerate(zip(self.exponents, g.orders)):
            t = (t + e * (L // n) * g._dlog[:, i]) % L
        out[coprime_mask] = t[coprime_mask]
        return out

    def values(self) -> np.ndarray:
        """chi(a) for a = 0..q-1 as a complex array (0 where gcd(a,q) > 1)."""
        ph = self.phases()
        vals = np.exp(2j * np.pi * ph / self.group._lcm)
        vals[ph < 0] = 0.0
        return vals

    def __call__(self, n: int) -> complex:
        q = self.modulus
        if q == 1:
            return 1.0 + 0.0j
        a = n % q
        if math.gcd(a, q) != 1:
            return 0.0 + 0.0j
        ph = self.phases()[a]
        L = self.group._lcm
        if self.is_real:
            return complex(1.0 if ph == 0 else (-1.0 if 2 * ph == L else 0.0))
        return complex(np.exp(2j * np.pi * ph / L))

    def primitive(self) -> "Character":
        """The primitive character mod conductor inducing this one."""
        cond = self.conductor
        if cond == self.modulus:
            return self
        target = build_group(cond)
        exps = []
        pos = 0
        for blk in self.group.blocks:
            n = len(blk.orders)
            local = self.exponents[pos : pos + n]
            lc = blk.local_conductor(local)
            pos += n
            if lc == 1:
                continue
            tblk = next(b for b in target.blocks if b.prime == blk.prime)
            if blk.prime == 2 and len(blk.orders) == 2:
                e1, e2 = local
                if len(tblk.orders) == 1:
                    exps.append(e1)  # local conductor 4 forces e2 = 0
                else:
                    scale = blk.orders[1] // tblk.orders[1]
                    exps.extend([e1, e2 // scale])
            else:
                scale = blk.orders[0] // tblk.orders[0]
                exps.append(local[0] // scale)
        return target.character(tuple(exps))


@lru_cache(maxsize=256)
def build_group(q: int) -> CharacterGroup:
    return CharacterGroup(q)


def select_C(q: int) -> list[Character]:
    """Representative characters: every real non-principal character, and one
    of each complex-conjugate pair (the lexicographically smaller exponents)."""
    group = build_group(q)
    out = []
    for chi in group.characters():
        if chi.is_principal:
            continue
        if chi.is_real:
            out.append(chi)
        elif chi.exponents < chi.conjugate().exponents:
            out.append(chi)
    return out


def nonprincipal(q: int) -> list[Character]:
    return [chi for chi in build_group(q).characters() if not chi.is_principal]


def conductor_sum_identities(q: int) -> tuple[float, float, float]:
    """(sum of log q*, sum of (log q*)^2, phi(q)(log q - sum_{p|q} log p/(p-1))).

    The sums run over non-principal characters mod q; computed separably over
    prime blocks so the q <= 2000 sweep stays fast.
    """
    if q < 3:
        raise ValueError("q must be >= 3")
    group = build_group(q)
    phi = group.phi
    block_sizes = []
    block_l1 = []
    block_l2 = []
    for blk in group.blocks:
        size = 1
        for n in blk.orders:
            size *= n
        logs = []
        exps = [0] * len(blk.orders)
        while True:
            logs.append(math.log(blk.local_conductor(tuple(exps))))
            for i in range(len(exps) - 1, -1, -1):
                exps[i] += 1
                if exps[i] < blk.orders[i]:
                    break
                exps[i] = 0
            else:
                break
        block_sizes.append(size)
        block_l1.append(sum(logs))
        block_l2.append(sum(v * v for v in logs))
    sum_log = sum(
        (phi // size) * l1 for size, l1 in zip(block_sizes, block_l1)
    )
    sum_log_sq = sum(
        (phi // size) * l2 for size, l2 in zip(block_sizes, block_l2)
    )
    for i in range(len(block_sizes)):
        for j in range(len(block_sizes)):
            if i != j:
                sum_log_sq += (
                    phi // (block_sizes[i] * block_sizes[j])
                ) * block_l1[i] * block_l1[j]
    log_p_sum = sum(math.log(p) / (p - 1) for p, _ in factorize(q).factors)
    rhs_first = phi * (math.log(q) - log_p_sum)
    return sum_log, sum_log_sq, rhs_first

"""Multivariate truncated Taylor jets.

A :class:`Jet` holds, for every multi-index ``gamma`` of total degree at most
``order``, the raw partial derivative ``d^gamma f`` at a fixed point.  The last
axis of :attr:`Jet.data` runs over the multi-indices in graded order, so
truncating to a lower order is a slice.  Leading axes make tensor-valued jets;
all arithmetic broadcasts over them.
"""

from __future__ import annotations

import functools
import itertools
import math

import numpy as np

from .errors import DomainError


def _multi_indices(nvars, order):
    out = []
    for deg in range(order + 1):
        # reverse-lex inside each degree: x^2 before xy before y^2
        for combo in itertools.combinations_with_replacement(range(nvars), deg):
            gamma = [0] * nvars
            for i in combo:
                gamma[i] += 1
            out.append(tuple(gamma))
    return out


class JetSpace:
    """Index bookkeeping for jets in ``nvars`` variables truncated at ``order``."""

    def __init__(self, nvars, order):
        if nvars < 0 or order < 0:
            raise ValueError("nvars and order must be non-negative")
        self.nvars = nvars
        self.order = order
        self.indices = _multi_indices(nvars, order)
        self.size = len(self.indices)
        self.position = {g: k for k, g in enumerate(self.indices)}
        self.degree = np.array([sum(g) for g in self.indices])

        ia, ib, ic, w = [], [], [], []
        for a, ga in enumerate(self.indices):
            for b, gb in enumerate(self.indices):
                gc = tuple(x + y for x, y in zip(ga, gb))
                if sum(gc) > order:
                    continue
                ia.append(a)
                ib.append(b)
                ic.append(self.position[gc])
                # Leibniz weight prod_i C(gc_i, ga_i)
                w.append(math.prod(math.comb(c, x) for c, x in zip(gc, ga)))
        self._ia = np.array(ia, dtype=np.intp)
        self._ib = np.array(ib, dtype=np.intp)
        self._w = np.array(w, dtype=float)
        scatter = np.zeros((len(ic), self.size))
        scatter[np.arange(len(ic)), ic] = 1.0
        self._scatter = scatter

        # d/du_i maps order-K data to order-(K-1) data
        self._shift = []
        if order > 0:
            lower = _multi_indices(nvars, order - 1)
            for i in range(nvars):
                idx = []
                for g in lower:
                    h = list(g)
                    h[i] += 1
                    idx.append(self.position[tuple(h)])
                self._shift.append(np.array(idx, dtype=np.intp))

    def __repr__(self):
        return f"JetSpace(nvars={self.nvars}, order={self.order})"

    def lower(self, order):
        return jet_space(self.nvars, order)


@functools.lru_cache(maxsize=None)
def jet_space(nvars, order):
    return JetSpace(nvars, order)


class Jet:
    """Tensor-valued truncated jet (immutable by convention)."""

    __slots__ = ("space", "data")
    __array_priority__ = 1000

    def __init__(self, space, data):
        data = np.asarray(data, dtype=float)
        if data.shape[-1:] != (space.size,):
            raise ValueError(f"last axis must have length {space.size}, got {data.shape}")
        self.space = space
        self.data = data

    # construction ---------------------------------------------------------

    @classmethod
    def constant(cls, value, space):
        value = np.asarray(value, dtype=float)
        data = np.zeros(value.shape + (space.size,))
        data[..., 0] = value
        return cls(space, data)

    @classmethod
    def variable(cls, value, index, space):
        data = np.zeros(space.size)
        data[0] = value
        if space.order >= 1:
            e = [0] * space.nvars
            e[index] = 1
            data[space.position[tuple(e)]] = 1.0
        return cls(space, data)

    @classmethod
    def stack(cls, jets, axis=0):
        jets = list(jets)
        order = min(j.order for j in jets)
        space = jets[0].space.lower(order)
        datas = [j.truncate(order).data for j in jets]
        if axis < 0:
            axis -= 1
        return cls(space, np.stack(datas, axis=axis))

    # basic properties -------------------------------------------------------

    @property
    def order(self):
        return self.space.order

    @property
    def shape(self):
        return self.data.shape[:-1]

    @property
    def value(self):
        return self.data[..., 0]

    def __repr__(self):
        return f"Jet(order={self.order}, shape={self.shape})"

    def __len__(self):
        return self.shape[0]

    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key,)
        return Jet(self.space, self.data[key + (slice(None),)])

    def partial(self, gamma):
        """Raw partial derivative for multi-index ``gamma``."""
        return self.data[..., self.space.position[tuple(gamma)]]

    @property
    def coeffs(self):
        """``{multi-index: partial derivative}`` for scalar jets."""
        if self.shape:
            raise ValueError("coeffs is only defined for scalar jets")
        return {g: float(v) for g, v in zip(self.space.indices, self.data)}

    def truncate(self, order):
        if order == self.order:
            return self
        if order > self.order:
            raise ValueError(f"cannot raise jet order {self.order} to {order}")
        space = self.space.lower(order)
        return Jet(space, self.data[..., : space.size])

    def diff(self, i):
        """Jet of the partial derivative in variable ``i`` (one order lower)."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        return Jet(self.space.lower(self.order - 1), self.data[..., self.space._shift[i]])

    def gradient(self):
        """Stack of partials along a new trailing tensor axis."""
        return Jet.stack([self.diff(i) for i in range(self.space.nvars)], axis=-1)

    def nilpotent(self):
        data = self.data.copy()
        data[..., 0] = 0.0
        return Jet(self.space, data)

    # arithmetic -------------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            order = min(self.order, other.order)
            return self.truncate(order), other.truncate(order)
        return self, None

    def __add__(self, other):
        a, b = self._coerce(other)
        if b is None:
            data = self.data.copy() + np.zeros(np.shape(other) + (1,))
            data[..., 0] += other
            return Jet(self.space, data)
        return Jet(a.space, a.data + b.data)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.data)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._coerce(other)
        if b is None:
            return Jet(self.space, self.data * np.asarray(other, dtype=float)[..., None])
        sp = a.space
        prod = a.data[..., sp._ia] * b.data[..., sp._ib] * sp._w
        return Jet(sp, prod @ sp._scatter)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * reciprocal(other)
        return Jet(self.space, self.data / np.asarray(other, dtype=float)[..., None])

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, p):
        return power(self, p)

    def sum(self, axis):
        if axis < 0:
            axis -= 1
        return Jet(self.space, self.data.sum(axis=axis))

    @property
    def T(self):
        return self.transpose()

    def transpose(self, *axes):
        nd = len(self.shape)
        if not axes:
            axes = tuple(reversed(range(nd)))
        return Jet(self.space, self.data.transpose(tuple(axes) + (nd,)))


def _data(x, space):
    if isinstance(x, Jet):
        return x.truncate(space.order).data, True
    return np.asarray(x, dtype=float), False


def einsum(subscripts, *operands):
    """``np.einsum`` over the tensor axes with jet products on the last axis.

    Plain arrays are treated as constants.  At most two operands may be jets per
    call; longer products are chained left to right.
    """
    ins, out = subscripts.replace(" ", "").split("->")
    subs = ins.split(",")
    if len(subs) != len(operands):
        raise ValueError("operand count does not match subscripts")
    jets = [op for op in operands if isinstance(op, Jet)]
    if not jets:
        return np.einsum(subscripts, *operands)
    order = min(j.order for j in jets)
    space = jets[0].space.lower(order)
    jet_pos = [k for k, op in enumerate(operands) if isinstance(op, Jet)]
    if len(jet_pos) > 2:
        # contract the first two jets, then recurse
        k0, k1 = jet_pos[:2]
        keep = set(out) | set("".join(s for k, s in enumerate(subs) if k not in (k0, k1)))
        mid = "".join(dict.fromkeys(c for c in subs[k0] + subs[k1] if c in keep))
        first = einsum(f"{subs[k0]},{subs[k1]}->{mid}", operands[k0], operands[k1])
        rest_subs = [mid] + [s for k, s in enumerate(subs) if k not in (k0, k1)]
        rest_ops = [first] + [op for k, op in enumerate(operands) if k not in (k0, k1)]
        return einsum(",".join(rest_subs) + "->" + out, *rest_ops)
    if len(jet_pos) == 1:
        args = []
        new_subs = []
        for s, op in zip(subs, operands):
            if isinstance(op, Jet):
                args.append(op.truncate(order).data)
                new_subs.append(s + "Z")
            else:
                args.append(np.asarray(op, dtype=float))
                new_subs.append(s)
        return Jet(space, np.einsum(",".join(new_subs) + "->" + out + "Z", *args))
    args = []
    new_subs = []
    for k, (s, op) in enumerate(zip(subs, operands)):
        if isinstance(op, Jet):
            d = op.truncate(order).data
            d = d[..., space._ia] if k == jet_pos[0] else d[..., space._ib]
            args.append(d)
            new_subs.append(s + "Z")
        else:
            args.append(np.asarray(op, dtype=float))
            new_subs.append(s)
    prod = np.einsum(",".join(new_subs) + "->" + out + "Z", *args) * space._w
    return Jet(space, prod @ space._scatter)


# elementary functions -------------------------------------------------------


def compose(u, derivs):
    """``f(u)`` given ``derivs[k] = f^(k)(u.value)`` for ``k = 0..order``."""
    du = u.nilpotent()
    out = Jet.constant(derivs[0], u.space)
    term = None
    for k in range(1, u.order + 1):
        term = du if term is None else term * du
        out = out + term * (np.asarray(derivs[k]) / math.factorial(k))
    return out


def _cycle(vals, order):
    return [vals[k % len(vals)] for k in range(order + 1)]


def exp(u):
    e = np.exp(u.value)
    return compose(u, [e] * (u.order + 1))


def sin(u):
    s, c = np.sin(u.value), np.cos(u.value)
    return compose(u, _cycle([s, c, -s, -c], u.order))


def cos(u):
    s, c = np.sin(u.value), np.cos(u.value)
    return compose(u, _cycle([c, -s, -c, s], u.order))


def sinh(u):
    s, c = np.sinh(u.value), np.cosh(u.value)
    return compose(u, _cycle([s, c], u.order))


def cosh(u):
    s, c = np.sinh(u.value), np.cosh(u.value)
    return compose(u, _cycle([c, s], u.order))


def tan(u):
    return sin(u) / cos(u)


def tanh(u):
    return sinh(u) / cosh(u)


def log(u):
    x = u.value
    if np.any(x <= 0):
        raise DomainError("log of a non-positive value")
    d = [np.log(x)]
    for k in range(1, u.order + 1):
        d.append((-1) ** (k - 1) * math.factorial(k - 1) / x**k)
    return compose(u, d)


def _real_power_derivs(x, p, order):
    d = []
    coef = 1.0
    for k in range(order + 1):
        d.append(coef * x ** (p - k))
        coef *= p - k
    return d


def sqrt(u):
    x = u.value
    if np.any(x < 0) or (u.order > 0 and np.any(x == 0)):
        raise DomainError("sqrt of a non-positive value")
    if u.order == 0:
        return Jet(u.space, np.sqrt(u.data))
    return compose(u, _real_power_derivs(x, 0.5, u.order))


def fabs(u):
    x = u.value
    if u.order > 0 and np.any(x == 0):
        raise DomainError("abs is not differentiable at 0")
    d = [np.abs(x), np.sign(x)] + [np.zeros_like(x)] * max(u.order - 1, 0)
    return compose(u, d[: u.order + 1])


def atan(u):
    x = u.value
    # series of 1/(1 + (x+t)^2) in t, then integrate term by term
    q0, q1 = 1.0 + x * x, 2.0 * x
    r = [1.0 / q0]
    for k in range(1, u.order):
        prev2 = r[k - 2] if k >= 2 else 0.0
        r.append(-(q1 * r[k - 1] + prev2) / q0)
    d = [np.arctan(x)] + [math.factorial(k - 1) * r[k - 1] for k in range(1, u.order + 1)]
    return compose(u, d)


def reciprocal(u):
    x = u.value
    if np.any(x == 0):
        raise DomainError("division by zero")
    d = [(-1) ** k * math.factorial(k) / x ** (k + 1) for k in range(u.order + 1)]
    return compose(u, d)


def _int_power(u, n):
    result = None
    base = u
    while n:
        if n & 1:
            result = base if result is None else result * base
        n >>= 1
        if n:
            base = base * base
    return result


def power(u, p):
    """``u ** p``; ``p`` is a number or a jet."""
    if isinstance(p, Jet):
        if not np.any(p.data[..., 1:]) and not p.shape:
            p = float(p.value)
        else:
            return exp(p * log(u))
    p = float(p)
    if p.is_integer() and abs(p) <= 64:
        n = int(p)
        if n == 0:
            return Jet.constant(np.ones(u.shape), u.space)
        if n > 0:
            return _int_power(u, n)
        return reciprocal(_int_power(u, -n))
    x = u.value
    if np.any(x < 0) or (u.order > 0 and np.any(x == 0)):
        raise DomainError("non-integer power of a non-positive value")
    return compose(u, _real_power_derivs(x, p, u.order))


# linear algebra on jet-valued matrices --------------------------------------


def inv(g):
    """Inverse of a jet-valued square matrix via the Neumann series about its value."""
    g0 = g.value
    x = np.linalg.inv(g0)
    e = g.nilpotent()
    term = Jet.constant(x, g.space)
    out = term
    for _ in range(g.order):
        term = -einsum("ij,jk,kl->il", x, e, term)
        out = out + term
    return out


def det(m):
    """Determinant of a small jet-valued square matrix by cofactor expansion."""
    n = m.shape[0]
    if n == 1:
        return m[0, 0]
    if n == 2:
        return m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    total = None
    for j in range(n):
        cols = [c for c in range(n) if c != j]
        minor = Jet(m.space, m.data[1:][:, cols])
        term = m[0, j] * det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total

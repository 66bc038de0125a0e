"""Minimal reverse-mode automatic differentiation over numpy arrays.

A ``Tape`` records every operation performed on its ``Var`` nodes in
execution order (a Wengert list); ``Tape.backward`` replays the list in
reverse, accumulating adjoints.  Because creation order is a topological
order, no explicit graph sort is needed.

Only the operations required by tanh networks and quadratic losses are
implemented: +, -, *, / (by arrays/scalars), @, **, basic indexing, tanh,
exp, and sum.  Plain numbers and ndarrays mix freely with ``Var`` operands
and are treated as constants.  Broadcasting follows numpy semantics; the
backward pass sums adjoints over broadcast axes.

Each backward pass owns its private recording: tapes are cheap, single-use,
and never shared across threads.
"""

from __future__ import annotations

import numpy as np


class Var:
    """A node in a taped computation: an ndarray value plus its adjoint slot."""

    __slots__ = ("data", "grad", "_tape", "_parents", "_pullback", "_consumers")

    # Make ndarray <op> Var dispatch to the reflected methods below instead of
    # numpy elementwise-broadcasting over the object.
    __array_ufunc__ = None

    def __init__(self, data, tape, parents=(), pullback=None):
        self.data = np.asarray(data, dtype=float)
        self.grad = None
        self._tape = tape
        self._parents = parents
        self._pullback = pullback
        self._consumers = 0

    @property
    def shape(self):
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def __repr__(self):
        return f"Var(shape={self.data.shape})"

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other):
        return _binary(self, other, np.add,
                       lambda g, a, b: (g, g))

    __radd__ = __add__

    def __sub__(self, other):
        return _binary(self, other, np.subtract,
                       lambda g, a, b: (g, -g))

    def __rsub__(self, other):
        return _binary(self, other, lambda a, b: b - a,
                       lambda g, a, b: (-g, g))

    def __mul__(self, other):
        return _binary(self, other, np.multiply,
                       lambda g, a, b: (g * b, g * a))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return _binary(self, other, np.divide,
                       lambda g, a, b: (g / b, -g * a / (b * b)))

    def __rtruediv__(self, other):
        return _binary(self, other, lambda a, b: b / a,
                       lambda g, a, b: (-g * b / (a * a), g / a))

    def __neg__(self):
        out = Var(-self.data, self._tape, (self,),
                  pullback=lambda g, v=self: _accumulate(v, -g))
        return self._tape._record(out)

    def __pow__(self, exponent):
        if not isinstance(exponent, (int, float)):
            raise TypeError("only numeric exponents are supported")
        data = self.data

        def pullback(g, v=self, n=exponent):
            _accumulate(v, g * n * data ** (n - 1))

        out = Var(data ** exponent, self._tape, (self,), pullback)
        return self._tape._record(out)

    def __matmul__(self, other):
        a_data = self.data
        b_is_var = isinstance(other, Var)
        b_data = other.data if b_is_var else np.asarray(other, dtype=float)

        def pullback(g, a=self, b=other):
            _accumulate(a, g @ b_data.T)
            if b_is_var:
                _accumulate(b, a_data.T @ g)

        out = Var(a_data @ b_data, self._tape,
                  (self, other) if b_is_var else (self,), pullback)
        return self._tape._record(out)

    def __rmatmul__(self, other):
        a_data = np.asarray(other, dtype=float)

        def pullback(g, b=self):
            _accumulate(b, a_data.T @ g)

        out = Var(a_data @ self.data, self._tape, (self,), pullback)
        return self._tape._record(out)

    def __getitem__(self, key):
        def pullback(g, v=self, k=key):
            scatter = np.zeros_like(v.data)
            scatter[k] = g
            _accumulate(v, scatter)

        out = Var(self.data[key], self._tape, (self,), pullback)
        return self._tape._record(out)

    # -- elementwise functions -------------------------------------------

    def tanh(self):
        value = np.tanh(self.data)

        def pullback(g, v=self, out_data=value):
            _accumulate(v, g * (1.0 - out_data * out_data))

        out = Var(value, self._tape, (self,), pullback)
        return self._tape._record(out)

    def exp(self):
        value = np.exp(self.data)

        def pullback(g, v=self, out_data=value):
            _accumulate(v, g * out_data)

        out = Var(value, self._tape, (self,), pullback)
        return self._tape._record(out)

    def sum(self):
        def pullback(g, v=self):
            _accumulate(v, np.broadcast_to(g, v.data.shape))

        out = Var(np.sum(self.data), self._tape, (self,), pullback)
        return self._tape._record(out)


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Reduce an adjoint to ``shape`` by summing over broadcast axes."""
    g = np.asarray(g)
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _accumulate(var: Var, g) -> None:
    g = _unbroadcast(g, var.data.shape)
    if var.grad is None:
        # A node's adjoint is complete before its own pullback runs (reverse
        # creation order), so a single-consumer node can adopt the incoming
        # array without copying; it will only ever be read afterwards.  With
        # several consumers the first accumulation owns a writable copy.
        var.grad = g if var._consumers <= 1 else np.array(g)
    else:
        var.grad += g


def _binary(a: Var, b, forward, backward) -> Var:
    b_is_var = isinstance(b, Var)
    b_data = b.data if b_is_var else np.asarray(b, dtype=float)

    def pullback(g, a=a, b=b, a_data=a.data, b_data=b_data):
        ga, gb = backward(g, a_data, b_data)
        _accumulate(a, ga)
        if b_is_var:
            _accumulate(b, gb)

    out = Var(forward(a.data, b_data), a._tape,
              (a, b) if b_is_var else (a,), pullback)
    return a._tape._record(out)


class Tape:
    """One recorded computation.  Create leaves with ``var``; after building a
    scalar result, call ``backward`` once to populate ``grad`` on every node
    that influences it."""

    def __init__(self):
        self._nodes: list[Var] = []
        self._ran_backward = False

    def var(self, data) -> Var:
        """Wrap an array as a trainable leaf (the array is not copied)."""
        return Var(data, self)

    def custom(self, data, parents: tuple, pullback) -> Var:
        """Record an externally computed value with a hand-written pullback.

        ``pullback(g)`` must route the adjoint into each parent via
        :func:`accumulate_grad`.  Used for fused operations whose generic
        op-by-op recording would be needlessly slow.
        """
        return self._record(Var(data, self, parents, pullback))

    def _record(self, node: Var) -> Var:
        for parent in node._parents:
            if isinstance(parent, Var):
                parent._consumers += 1
        self._nodes.append(node)
        return node

    def backward(self, root: Var) -> None:
        """Accumulate d(root)/d(node) into ``node.grad`` for every recorded node.

        ``root`` must be a scalar produced by operations on this tape.
        """
        if root._tape is not self:
            raise RuntimeError("root does not belong to this tape")
        if root._pullback is None or not self._nodes:
            raise RuntimeError("backward called without a recorded forward computation")
        if root.data.size != 1:
            raise ValueError(f"backward requires a scalar root, got shape {root.data.shape}")
        if self._ran_backward:
            raise RuntimeError("this tape has already been differentiated")
        self._ran_backward = True

        root.grad = np.ones_like(root.data)
        for node in reversed(self._nodes):
            if node.grad is not None and node._pullback is not None:
                node._pullback(node.grad)


def accumulate_grad(var: Var, g) -> None:
    """Add an adjoint contribution to a node (for custom pullbacks)."""
    _accumulate(var, g)


def grad_or_zeros(var: Var) -> np.ndarray:
    """The accumulated gradient, with an exact zero array for untouched leaves."""
    return var.grad if var.grad is not None else np.zeros_like(var.data)

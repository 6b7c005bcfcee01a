"""Flat parameter storage with named segments."""
from dataclasses import dataclass

import numpy as np

from .tape import Tape

RNN_VARIANTS = ("euclidean_rnn", "poincare_rnn", "lorentz_rnn")
GRU_VARIANTS = ("euclidean_gru", "poincare_gru", "lorentz_gru")
VARIANTS = RNN_VARIANTS + GRU_VARIANTS


def param_count(variant, hidden, input_dim=2):
    """Number of trainable scalars of one cell plus the two 2-unit dense heads."""
    if hidden < 1:
        raise ValueError("hidden must be >= 1")
    gate = hidden * hidden + input_dim * hidden + hidden
    heads = 2 * (2 * hidden + 2)
    if variant in RNN_VARIANTS or variant == "rnn":
        return gate + heads
    if variant in GRU_VARIANTS or variant == "gru":
        return 3 * gate + heads
    raise ValueError(f"unknown variant {variant!r}")


@dataclass(frozen=True)
class Segment:
    name: str
    offset: int
    shape: tuple
    role: str       # "weight" | "bias"
    geometry: str   # "euclidean" | "poincare" | "lorentz"

    @property
    def size(self):
        return int(np.prod(self.shape))

    @property
    def stop(self):
        return self.offset + self.size


class ParamVector:
    """A flat float64 array addressed through named, disjoint segments."""

    def __init__(self, layout, data=None):
        segs = {}
        offset = 0
        for name, shape, role, geometry in layout:
            seg = Segment(name, offset, tuple(shape), role, geometry)
            segs[name] = seg
            offset = seg.stop
        self.segments = segs
        self.size = offset
        if data is None:
            data = np.zeros(offset)
        data = np.asarray(data, dtype=np.float64)
        if data.shape != (offset,):
            raise ValueError(f"expected {offset} parameters, got shape {data.shape}")
        self.data = data

    @property
    def layout(self):
        return [(s.name, s.shape, s.role, s.geometry) for s in self.segments.values()]

    def copy(self):
        return ParamVector(self.layout, self.data.copy())

    def with_data(self, data):
        return ParamVector(self.layout, data)

    def __getitem__(self, name):
        s = self.segments[name]
        return self.data[s.offset:s.stop].reshape(s.shape)

    def __setitem__(self, name, val):
        s = self.segments[name]
        self.data[s.offset:s.stop] = np.asarray(val, dtype=np.float64).reshape(-1)

    def views(self):
        return {name: self[name] for name in self.segments}

    def on_tape(self, tape=None):
        """Register every segment as a leaf of ``tape``; returns (tape, name -> Var)."""
        tape = Tape() if tape is None else tape
        return tape, {name: tape.leaf(self[name]) for name in self.segments}

    def mask(self, predicate):
        """Boolean mask over the flat array for segments satisfying ``predicate(segment)``."""
        m = np.zeros(self.size, dtype=bool)
        for s in self.segments.values():
            if predicate(s):
                m[s.offset:s.stop] = True
        return m


def grad_of(output, tape, leaves, params):
    """Flat gradient of scalar node ``output`` w.r.t. every segment of ``params``.

    ``leaves`` is the name -> Var mapping returned by :meth:`ParamVector.on_tape`.
    Segments the output does not depend on get zeros.
    """
    if np.size(output.value) != 1:
        raise ValueError("grad_of needs a scalar output")
    adj = tape.backward(output)
    flat = np.zeros(params.size)
    for name, var in leaves.items():
        g = adj[var.idx]
        if g is not None:
            s = params.segments[name]
            flat[s.offset:s.stop] = np.reshape(g, -1)
    return flat

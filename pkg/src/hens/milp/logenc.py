"""Logarithmic binary selection of union-jack simplices.

A grid with w cells per dimension (w a power of two) holds T = w^n * n!
simplices.  Selection uses ceil(log2 T) binaries and two inequality rows
per binary over the aggregated node weights:

* per axis, log2(w) binaries run an interval dichotomy whose cell labels
  follow a Gray code, so neighbouring cells differ in one bit and shared
  nodes stay feasible;
* in 2-D one further binary picks the triangle inside the cell.  Every
  union-jack diagonal joins the two cell corners with even index sum, so
  the two off-diagonal corners split globally into the "odd x index" and
  "odd y index" classes and one binary separates them everywhere at once.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..pwl.grids import SimplexModel


def gray_code(i: int) -> int:
    return i ^ (i >> 1)


def _bit(value: int, t: int) -> int:
    return (value >> t) & 1


def sos2_branching_sets(w: int) -> list[tuple[list[int], list[int]]]:
    """Per binary: (node indices forced out when y=0, when y=1).

    Nodes 0..w index the interval endpoints; node a touches cells a-1 and a.
    A node lands in the "ones" set when every incident cell has that Gray
    bit set, in the "zeros" set when none has.
    """
    if w & (w - 1):
        raise ValueError(f"w must be a power of two, got {w}")
    bits = w.bit_length() - 1
    out = []
    for t in range(bits):
        ones, zeros = [], []
        for a in range(w + 1):
            incident = [p for p in (a - 1, a) if 0 <= p < w]
            labels = {_bit(gray_code(p), t) for p in incident}
            if labels == {1}:
                ones.append(a)
            elif labels == {0}:
                zeros.append(a)
        out.append((ones, zeros))
    return out


@dataclass(frozen=True)
class LogSimplexEncoding:
    enc_id: str
    simplex_count: int
    binaries: tuple[str, ...]
    lambda_names: tuple[str, ...]
    selection_rows: tuple[str, ...]
    linking_rows: tuple[str, ...]

    @property
    def n_binaries(self) -> int:
        return len(self.binaries)

    @property
    def n_selection_rows(self) -> int:
        return len(self.selection_rows)


def branching_node_sets(model: SimplexModel) -> list[tuple[str, list[int], list[int]]]:
    """(label, nodes zeroed unless y=1, nodes zeroed unless y=0) per binary."""
    w = model.w
    out = []
    if model.dims == 1:
        for t, (ones, zeros) in enumerate(sos2_branching_sets(w)):
            out.append((f"x{t}", ones, zeros))
        return out
    stride = w + 1
    for t, (ones, zeros) in enumerate(sos2_branching_sets(w)):
        nodes_one = [b * stride + a for b in range(w + 1) for a in ones]
        nodes_zero = [b * stride + a for b in range(w + 1) for a in zeros]
        out.append((f"x{t}", nodes_one, nodes_zero))
    for t, (ones, zeros) in enumerate(sos2_branching_sets(w)):
        nodes_one = [b * stride + a for b in ones for a in range(w + 1)]
        nodes_zero = [b * stride + a for b in zeros for a in range(w + 1)]
        out.append((f"y{t}", nodes_one, nodes_zero))
    # triangle selector: odd-x-index corners vs odd-y-index corners
    odd_x = [b * stride + a for b in range(w + 1) for a in range(w + 1) if a % 2 == 1 and b % 2 == 0]
    odd_y = [b * stride + a for b in range(w + 1) for a in range(w + 1) if a % 2 == 0 and b % 2 == 1]
    out.append(("tri", odd_x, odd_y))
    return out


def expected_binary_count(model: SimplexModel) -> int:
    t = model.simplex_count
    return max(0, (t - 1).bit_length()) if t > 1 else 0

import itertools
import random

from matcomp import GF2, FieldSpec, PartialMatrix

GF3 = FieldSpec.gf(3)
Q = FieldSpec.rational()


def random_partial(rng: random.Random, rows: int, cols: int, field=GF2,
                   known_prob: float = 0.5) -> PartialMatrix:
    known = {}
    for r in range(rows):
        for c in range(cols):
            if rng.random() < known_prob:
                known[(r, c)] = field.random_element(rng)
    return PartialMatrix(rows, cols, field, known)


def exhaustive_2x2_gf2():
    """All 81 2x2 GF(2) partial matrices (3 states per cell)."""
    cells = [(0, 0), (0, 1), (1, 0), (1, 1)]
    for states in itertools.product((None, 0, 1), repeat=4):
        known = {rc: v for rc, v in zip(cells, states) if v is not None}
        yield PartialMatrix(2, 2, GF2, known)


def sampled_3x3_gf2(rng: random.Random, per_mask: int, max_unknowns: int = 5):
    """All 3x3 masks with <= max_unknowns unknowns, values sampled per mask."""
    cells = [(r, c) for r in range(3) for c in range(3)]
    for mask in range(1 << 9):
        unknown = [rc for i, rc in enumerate(cells) if mask >> i & 1]
        if len(unknown) > max_unknowns:
            continue
        known_cells = [rc for rc in cells if rc not in unknown]
        nvals = 1 << len(known_cells)
        seen = set()
        want = min(per_mask, nvals)
        while len(seen) < want:
            vals = tuple(rng.randrange(2) for _ in known_cells)
            if vals in seen:
                continue
            seen.add(vals)
            yield PartialMatrix(3, 3, GF2, dict(zip(known_cells, vals)))

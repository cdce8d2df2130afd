import numpy as np
import pytest

from moneydebt.fock import build_basis

_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion; call before asserting."""

    def record(number: int, ok: bool, detail: str):
        _ACCEPTANCE[number] = (bool(ok), detail)
        print(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def b11():
    return build_basis(1, 1)


@pytest.fixture
def b22():
    return build_basis(2, 2)


def fermion_oracle(n_modes: int, pos: int, create: bool) -> np.ndarray:
    """Dense creation/annihilation matrix on the full 2^n space, built from
    ordered creation strings: a state is ``a†_{p1} a†_{p2} ... |0>`` with
    ``p1 < p2 < ...`` and the sign comes from counting transpositions."""
    dim = 1 << n_modes
    out = np.zeros((dim, dim))

    def occ_of(idx):
        return tuple(p for p in range(n_modes) if (idx >> (n_modes - 1 - p)) & 1)

    def idx_of(occ):
        return sum(1 << (n_modes - 1 - p) for p in occ)

    for col in range(dim):
        occ = list(occ_of(col))
        if create:
            if pos in occ:
                continue
            seq = [pos] + occ
        else:
            if pos not in occ:
                continue
            # bring ``pos`` to the front, then drop it
            i = occ.index(pos)
            seq = occ[i : i + 1] + occ[:i] + occ[i + 1 :]
            sign = (-1) ** i
            out[idx_of(seq[1:]), col] = sign
            continue
        swaps = 0
        seq = list(seq)
        for a in range(len(seq)):
            for b in range(len(seq) - 1 - a):
                if seq[b] > seq[b + 1]:
                    seq[b], seq[b + 1] = seq[b + 1], seq[b]
                    swaps += 1
        out[idx_of(seq), col] = (-1) ** swaps
    return out

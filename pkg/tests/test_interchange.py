import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qwtree.btree import tree_unitary, tree_walk
from qwtree.errors import ConfigurationError, ParameterError
from qwtree.interchange import (
    InterchangeWalk,
    ProductState,
    SiteUnitary,
    apply_interchange,
    evolve,
    line_unitary,
    line_walk,
    step,
    szegedy_unitary,
    verify_unitary,
)


def coined_walk(p, steps, start_pos=0, up=1.0, down=0.0):
    """Textbook coined walk on Z: coin, then shift up-right / down-left.

    The coin is [[sqrt p, sqrt(1-p)], [sqrt(1-p), -sqrt p]], which is the
    Hadamard coin at p = 1/2.  Returns arrays (up, down) indexed by
    position + steps + 1 after every step.
    """
    size = 2 * (steps + abs(start_pos)) + 3
    off = steps + abs(start_pos) + 1
    u = np.zeros(size, complex)
    d = np.zeros(size, complex)
    u[start_pos + off], d[start_pos + off] = up, down
    coin = np.array([[np.sqrt(p), np.sqrt(1 - p)], [np.sqrt(1 - p), -np.sqrt(p)]])
    out = [(u.copy(), d.copy())]
    for _ in range(steps):
        cu = coin[0, 0] * u + coin[0, 1] * d
        cd = coin[1, 0] * u + coin[1, 1] * d
        u = np.roll(cu, 1)
        d = np.roll(cd, -1)
        out.append((u.copy(), d.copy()))
    return out, off


def as_coined(state, size, off):
    """Map |i-1>|i> to up at i and |i+1>|i> to down at i."""
    u = np.zeros(size, complex)
    d = np.zeros(size, complex)
    for (prev, cur), c in state:
        if prev == cur - 1:
            u[cur + off] += c
        elif prev == cur + 1:
            d[cur + off] += c
        else:
            raise AssertionError(f"pair {(prev, cur)} is not a line edge")
    return u, d


class TestInterchange:
    def test_single_pair(self):
        s = apply_interchange(ProductState.pure(3, 7))
        assert s.entries == {(7, 3): 1.0}

    def test_involution(self):
        s = ProductState({(0, 1): 0.6, (2, 1): 0.8j})
        assert apply_interchange(apply_interchange(s)) == s

    def test_two_entries_untouched_coefficients(self):
        s = ProductState({(0, 1): 0.6, (5, 4): -0.8j})
        t = apply_interchange(s)
        assert t.entries == {(1, 0): 0.6, (4, 5): -0.8j}
        assert t.norm() == pytest.approx(s.norm(), abs=1e-15)

    def test_rejects_nonfinite(self):
        with pytest.raises(ParameterError):
            ProductState({(0, 1): np.nan})


class TestLineStep:
    p = 0.3

    def test_forward_pair(self):
        s = step(ProductState.pure(4, 5), line_walk(self.p))
        assert s[(5, 4)] == pytest.approx(np.sqrt(1 - self.p), abs=1e-15)
        assert s[(5, 6)] == pytest.approx(np.sqrt(self.p), abs=1e-15)
        assert len(s) == 2

    def test_backward_pair(self):
        s = step(ProductState.pure(6, 5), line_walk(self.p))
        assert s[(5, 4)] == pytest.approx(-np.sqrt(self.p), abs=1e-15)
        assert s[(5, 6)] == pytest.approx(np.sqrt(1 - self.p), abs=1e-15)

    def test_missing_unitary_names_site(self):
        walk = line_walk(0.5, sites=range(-2, 3))
        # three steps reach current sites +-3; the fourth needs U there
        evolve(ProductState.pure(-1, 0), walk, 3)
        with pytest.raises(ConfigurationError, match="site -3|site 3"):
            evolve(ProductState.pure(-1, 0), walk, 4)

    def test_non_edge_rejected(self):
        with pytest.raises(ConfigurationError, match="not an edge"):
            step(ProductState.pure(0, 5), line_walk(0.5))

    def test_neighbor_mismatch_with_adjacency(self):
        walk = InterchangeWalk({0: line_unitary(0, 0.5)}, {0: (-1, 2)})
        with pytest.raises(ConfigurationError):
            walk.unitary(0)

    def test_degenerate_line_unitary_flagged(self, caplog):
        u = line_unitary(0, 1.0)
        assert u.degenerate
        assert "deterministic" in caplog.text
        assert verify_unitary(u)

    def test_line_unitary_range(self):
        with pytest.raises(ParameterError):
            line_unitary(0, 1.5)


@pytest.mark.parametrize("p", [0.5, 0.2, 0.77])
def test_coined_isomorphism(p):
    steps = 20
    walk = line_walk(p)
    ours = evolve(ProductState.pure(-1, 0), walk, steps)
    ref, off = coined_walk(p, steps)
    size = ref[0][0].size
    for t in range(steps + 1):
        u, d = as_coined(ours[t], size, off)
        assert np.max(np.abs(u - ref[t][0])) < 1e-12
        assert np.max(np.abs(d - ref[t][1])) < 1e-12


def test_hadamard_three_steps_entrywise():
    ours = evolve(ProductState.pure(-1, 0), line_walk(0.5), 3)[3]
    ref, off = coined_walk(0.5, 3)
    u, d = as_coined(ours, ref[0][0].size, off)
    assert np.allclose(u, ref[3][0], atol=1e-15) and np.allclose(d, ref[3][1], atol=1e-15)
    # the familiar t = 3 Hadamard pattern from |up> at the origin
    probs = np.abs(u) ** 2 + np.abs(d) ** 2
    nz = {i - off: round(v, 12) for i, v in enumerate(probs) if v > 1e-14}
    assert nz == {-3: 0.125, -1: 0.125, 1: 0.625, 3: 0.125}


class TestSzegedy:
    def test_single_neighbor(self):
        assert np.allclose(szegedy_unitary(0, [1.0]).reduced, [[1.0]])

    def test_two_neighbors(self):
        assert np.allclose(szegedy_unitary(0, [0.5, 0.5]).reduced, [[0, 1], [1, 0]])

    def test_three_uniform(self):
        m = szegedy_unitary(0, [1 / 3] * 3).reduced
        assert np.allclose(np.diag(m), -1 / 3)
        assert np.allclose(m[~np.eye(3, dtype=bool)], 2 / 3)
        assert np.all(m.imag == 0)

    def test_bad_row(self):
        with pytest.raises(ParameterError, match="not 1"):
            szegedy_unitary(0, [0.5, 0.4])

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=8).filter(lambda v: sum(v) > 1e-3))
    def test_random_rows_unitary(self, raw):
        probs = np.array(raw) / sum(raw)
        probs[-1] = 1.0 - probs[:-1].sum()
        probs = np.clip(probs, 0, None)
        probs /= probs.sum()
        assert verify_unitary(szegedy_unitary(0, probs), tol=1e-12)


class TestVerifyUnitary:
    def test_tree_block(self):
        assert verify_unitary(tree_unitary(5), tol=1e-12)

    def test_perturbed(self):
        m = tree_unitary(5).reduced.copy()
        m[0, 1] += 1e-3
        assert not verify_unitary(m, tol=1e-6)

    def test_shape_checked(self):
        with pytest.raises(ParameterError):
            SiteUnitary(0, (1, 2), np.eye(3))


pairs = st.integers(-6, 6).flatmap(lambda j: st.tuples(st.sampled_from([j - 1, j + 1]), st.just(j)))


@settings(max_examples=60, deadline=None)
@given(st.dictionaries(pairs, st.complex_numbers(max_magnitude=1, allow_nan=False, allow_infinity=False),
                       min_size=1, max_size=10),
       st.floats(0.05, 0.95))
def test_line_norm_preserved(entries, p):
    s = ProductState(entries)
    if s.norm() == 0:
        return
    out = step(s, line_walk(p))
    assert out.norm() == pytest.approx(s.norm(), rel=1e-12, abs=1e-14)


tree_pairs = st.integers(1, 40).flatmap(
    lambda v: st.sampled_from([((v - 1) // 2, v), (2 * v + 1, v), (2 * v + 2, v)])
)


@settings(max_examples=60, deadline=None)
@given(st.dictionaries(tree_pairs, st.complex_numbers(max_magnitude=1, allow_nan=False, allow_infinity=False),
                       min_size=1, max_size=12))
def test_tree_norm_and_locality(entries):
    s = ProductState(entries)
    if s.norm() == 0:
        return
    out = step(s, tree_walk())
    assert out.norm() == pytest.approx(s.norm(), rel=1e-12, abs=1e-14)
    for (j, m), _ in out:
        assert m in ((j - 1) // 2 if j else None, 2 * j + 1, 2 * j + 2)

import numpy as np
import pytest
from hypothesis import given, strategies as st

from extremal.domains import Annulus
from extremal.errors import BudgetExceeded
from extremal.family import envelope_batch
from extremal.poletsky import (
    MemoField,
    PoletskyConfig,
    PoletskyDisc,
    StencilIterate,
    adaptive_disc_mean,
    poletsky_step,
    quantize,
)
from extremal.weights import parse_weight

seeds = st.integers(0, 2**32 - 1)


def log_plus(p):
    return np.maximum(np.log(np.linalg.norm(p, axis=-1)), 0.0)


def test_psh_function_is_not_improved():
    for z in [[0.5], [2.0], [1 + 1j], [0.3, 2j]]:
        res = poletsky_step(log_plus, np.array(z, complex))
        assert abs(res.value - log_plus(np.array(z, complex))) < 1e-6


@given(seeds)
def test_sub_mean_value_oracle(seed):
    # independent check that no disc lowers a psh function
    rng = np.random.default_rng(seed)
    z = rng.normal(size=2) + 1j * rng.normal(size=2)
    coeffs = (rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))) * rng.uniform(0.1, 3)
    disc = PoletskyDisc(z, coeffs)
    assert adaptive_disc_mean(log_plus, disc) >= log_plus(z) - 1e-6


def test_annulus_disc_through_unit_circle():
    X = Annulus(0j, 0.5, 2.0)
    q = parse_weight("0")
    U = lambda P: np.array([r.value for r in envelope_batch(P.reshape(-1, 1), X, q)]).reshape(P.shape[:-1])
    res = poletsky_step(U, np.array([0j]), PoletskyConfig(refine_steps=0))
    assert res.value <= 1e-9


def test_degree_zero_returns_U_exactly():
    U = lambda P: np.sin(P[..., 0].real)
    z = np.array([0.7 + 0j])
    assert poletsky_step(U, z, PoletskyConfig(disc_degree=0)).value == U(z[None])[0]


def test_disc_center_and_cap():
    U = lambda P: -np.abs(P[..., 0]) ** 2  # superharmonic: discs lower it, the cap bounds them
    z = np.array([0.5 + 0j])
    cfg = PoletskyConfig(disc_degree=3, refine_steps=6)
    res = poletsky_step(U, z, cfg)
    assert res.disc(np.array([0j]))[0] == pytest.approx(z)
    assert np.all(res.disc.coefficient_norms() <= cfg.cap(z) + 1e-12)
    assert res.value < U(z[None])[0]


def test_value_never_exceeds_U_at_center():
    rng = np.random.default_rng(0)
    a = rng.normal(size=3)
    U = lambda P: a[0] * P[..., 0].real ** 2 + a[1] * P[..., 0].imag + a[2]
    for z in [0j, 1 + 1j, -2j]:
        zz = np.array([z])
        assert poletsky_step(U, zz).value <= U(zz[None])[0]


def test_memo_quantizes_and_counts():
    calls = []

    def f(P):
        calls.append(len(P))
        return P[:, 0].real

    m = MemoField(f)
    a = m(np.array([[1.0 + 0j], [1.0 + 1e-12j], [2.0 + 0j]]))
    assert a.tolist() == [1.0, 1.0, 2.0] and calls == [2]
    m(np.array([[2.0 + 0j]]))
    assert calls == [2] and m.evaluations == 2


def test_quantize_lattice():
    assert quantize(np.array([0.1234567891234 + 0j]))[0] == pytest.approx(0.123456789, abs=1e-15)


def test_memo_budget():
    m = MemoField(lambda P: P[:, 0].real, budget=3)
    m(np.array([[1.0 + 0j], [2.0 + 0j]]))
    with pytest.raises(BudgetExceeded):
        m(np.array([[3.0 + 0j], [4.0 + 0j]]))


def test_step_reports_exhaustion():
    m = MemoField(lambda P: np.abs(P[:, 0]), budget=50)
    res = poletsky_step(m, np.array([1.0 + 0j]))
    assert res.exhausted and res.value <= 1.0


def test_stencil_iterate_is_below_previous():
    U = MemoField(lambda P: -np.abs(P[:, 0]) ** 2)
    V = StencilIterate(U, 8.0)
    P = np.array([[0.0 + 0j], [1.0 + 0j], [0.5j]])
    assert np.all(V(P) <= U(P))

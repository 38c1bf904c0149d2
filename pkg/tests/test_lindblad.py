import math

import numpy as np
import pytest
import scipy.linalg as sla

from trilind import kernels
from trilind.analytic import beamsplitter_trajectory, squeeze_trajectory
from trilind.errors import DimensionError, SolverError, TruncationError
from trilind.fock import DensityMatrix, HilbertSpace, basis_state, mode_annihilator, number_operator, spin_operator
from trilind.lindblad import (
    CollapseSet,
    EvolutionSpec,
    Liouvillian,
    assess_truncation,
    build_liouvillian,
    dense_steady_state,
    evolve,
    propagate,
    steady_state,
)
from trilind.model import EffectiveParams, build_beamsplitter_hamiltonian, build_squeeze_hamiltonian

from conftest import random_density

SPACE = HilbertSpace(3, 3)
G = 40.0


def squeeze_liouvillian(space=SPACE, omega=0.2, rates=(1.0, 10.0, 1.0), **detunings):
    h = build_squeeze_hamiltonian(EffectiveParams(g=G, omega_pump=omega, **detunings), space)
    return build_liouvillian(h, CollapseSet.default(space, *rates))


def test_superoperator_matches_dense_definition(rng):
    l = squeeze_liouvillian(delta_a=3.0, delta_b=2.0, delta=1.0)
    rho = random_density(SPACE, rng)
    h = build_squeeze_hamiltonian(EffectiveParams(g=G, omega_pump=0.2, delta_a=3.0, delta_b=2.0, delta=1.0), SPACE).matrix
    expected = -1j * (h @ rho - rho @ h)
    for rate, o in ((1.0, spin_operator(SPACE, "minus")), (10.0, mode_annihilator(SPACE, "cavity")), (1.0, mode_annihilator(SPACE, "phonon"))):
        o = o.matrix
        od = o.conj().T
        expected += rate / 2 * (2 * o @ rho @ od - od @ o @ rho - rho @ od @ o)
    assert np.allclose(l.apply(rho), expected, atol=1e-10)


def test_trace_preserving(rng):
    l = squeeze_liouvillian()
    for _ in range(3):
        assert abs(np.trace(l.apply(random_density(SPACE, rng)))) < 1e-10


def test_kappa_b_switch_moves_channel():
    c = CollapseSet.default(SPACE, 1.0, 10.0, 1.0, kappa_b_on_cavity=True)
    assert np.array_equal(c.channels[2][1].matrix, mode_annihilator(SPACE, "cavity").matrix)


def test_collapse_rate_validation():
    with pytest.raises(ValueError):
        CollapseSet(((-1.0, mode_annihilator(SPACE, "cavity")),))
    with pytest.raises(DimensionError):
        CollapseSet(((1.0, mode_annihilator(SPACE, "cavity")), (1.0, mode_annihilator(HilbertSpace(2, 2), "cavity"))))


def test_liouvillian_shape_check():
    with pytest.raises(DimensionError):
        Liouvillian(SPACE, np.eye(4))


def test_evolution_spec_validation():
    with pytest.raises(ValueError):
        EvolutionSpec([0.1, 0.2])
    with pytest.raises(ValueError):
        EvolutionSpec([0.0, 0.2, 0.2])
    with pytest.raises(ValueError):
        EvolutionSpec([0.0, 1.0], method="rk4")


def test_matches_matrix_exponential(backend):
    l = squeeze_liouvillian(delta_a=5.0, delta_b=5.0, delta=2.0)
    rho0 = basis_state(SPACE, 0, 0, "e").density()
    t = 0.03
    ref = sla.expm(l.superop.toarray() * t) @ rho0.matrix.reshape(-1, order="F")
    traj = evolve(rho0, l, EvolutionSpec([0.0, t], rel_tol=1e-10, abs_tol=1e-12), backend=backend)
    got = traj.states[-1].matrix.reshape(-1, order="F")
    assert np.max(np.abs(got - ref)) < 1e-8


@pytest.mark.skipif("cython" not in kernels.available_backends(), reason="extension not built")
def test_backends_agree():
    l = squeeze_liouvillian()
    rho0 = basis_state(SPACE, 0, 0, "e").density()
    spec = EvolutionSpec(np.linspace(0, 0.05, 11))
    a = evolve(rho0, l, spec, backend=kernels.get_backend("cython"))
    b = evolve(rho0, l, spec, backend=kernels.get_backend("python"))
    assert a.n_steps == b.n_steps and a.n_rejected == b.n_rejected
    for x, y in zip(a.states, b.states):
        assert np.max(np.abs(x.matrix - y.matrix)) <= 1e-12
    fixed = EvolutionSpec(np.linspace(0, 0.05, 11), method="rk4", fixed_step=1e-4)
    a = evolve(rho0, l, fixed, backend=kernels.get_backend("cython"))
    b = evolve(rho0, l, fixed, backend=kernels.get_backend("python"))
    assert max(np.max(np.abs(x.matrix - y.matrix)) for x, y in zip(a.states, b.states)) <= 1e-12


@pytest.mark.parametrize("n", [0, 1, 2])
@pytest.mark.parametrize(
    "builder, oracle",
    [(build_squeeze_hamiltonian, squeeze_trajectory), (build_beamsplitter_hamiltonian, beamsplitter_trajectory)],
)
def test_closed_evolution_matches_oracle(n, builder, oracle):
    space = HilbertSpace(4, 4)
    h = builder(EffectiveParams(g=G, omega_pump=0.0), space)
    l = build_liouvillian(h, CollapseSet.default(space, 1e-12, 1e-12, 1e-12))
    times = np.linspace(0, 2 * math.pi / G, 81)
    ops = {"n_a": number_operator(space, "cavity"), "n_b": number_operator(space, "phonon")}
    traj = evolve(basis_state(space, n, n, "e").density(), l, EvolutionSpec(times, rel_tol=1e-10, abs_tol=1e-12), e_ops=ops)
    ref = np.array([[oracle(n, G, t)[1].n_a, oracle(n, G, t)[1].n_b] for t in times])
    assert np.max(np.abs(traj.expect["n_a"].real - ref[:, 0])) < 1e-6
    assert np.max(np.abs(traj.expect["n_b"].real - ref[:, 1])) < 1e-6
    assert traj.max_trace_drift < 1e-8
    assert traj.min_eigenvalue > -1e-8


def test_output_times_hit_exactly():
    l = squeeze_liouvillian()
    times = [0.0, 1e-3, 0.0123, 0.05]
    out = [t for t, _ in propagate(l, basis_state(SPACE, 0, 0, "e").density().matrix.reshape(-1, order="F"), EvolutionSpec(times))]
    assert out == times


def test_rk4_converges_to_adaptive():
    l = squeeze_liouvillian()
    rho0 = basis_state(SPACE, 0, 0, "e").density()
    times = np.linspace(0, 0.04, 5)
    ref = evolve(rho0, l, EvolutionSpec(times, rel_tol=1e-11, abs_tol=1e-13)).states[-1].matrix
    fixed = evolve(rho0, l, EvolutionSpec(times, method="rk4", fixed_step=2e-5)).states[-1].matrix
    assert np.max(np.abs(fixed - ref)) < 1e-8


def test_rk4_is_bitwise_reproducible():
    l = squeeze_liouvillian()
    rho0 = basis_state(SPACE, 0, 0, "e").density()
    spec = EvolutionSpec(np.linspace(0, 0.02, 3), method="rk4", fixed_step=1e-4)
    a = evolve(rho0, l, spec).states[-1].matrix
    b = evolve(rho0, l, spec).states[-1].matrix
    assert np.array_equal(a, b)


def test_zero_rates_is_unitary():
    h = build_squeeze_hamiltonian(EffectiveParams(g=G, omega_pump=0.5), SPACE)
    l = build_liouvillian(h, CollapseSet.default(SPACE, 0.0, 0.0, 0.0))
    traj = evolve(basis_state(SPACE, 0, 0, "e").density(), l, EvolutionSpec(np.linspace(0, 0.1, 5)))
    purity = [np.real(np.trace(s.matrix @ s.matrix)) for s in traj.states]
    assert np.allclose(purity, 1.0, atol=1e-8)


def test_pure_decay_without_coupling():
    h = build_squeeze_hamiltonian(EffectiveParams(g=0.0, omega_pump=0.0), SPACE)
    l = build_liouvillian(h, CollapseSet.default(SPACE, 1.0, 10.0, 1.0))
    times = np.linspace(0, 2.0, 9)
    traj = evolve(basis_state(SPACE, 0, 0, "e").density(), l, EvolutionSpec(times), e_ops={"pe": spin_operator(SPACE, "plus") @ spin_operator(SPACE, "minus")})
    assert np.allclose(traj.expect["pe"].real, np.exp(-times), atol=1e-8)


def test_steady_state_matches_dense_eig():
    l = squeeze_liouvillian(space=HilbertSpace(2, 2), delta_a=54.6, delta_b=54.6, delta=40.0)
    rho, info = steady_state(l, return_info=True)
    ref = dense_steady_state(l)
    assert np.max(np.abs(rho.matrix - ref.matrix)) < 1e-10
    assert info.residual < 1e-10
    assert np.linalg.norm(l.apply(rho)) < 1e-10


def test_steady_state_of_pure_decay_is_ground():
    h = build_squeeze_hamiltonian(EffectiveParams(g=G, omega_pump=0.0), SPACE)
    l = build_liouvillian(h, CollapseSet.default(SPACE, 1.0, 10.0, 1.0))
    rho = steady_state(l)
    assert np.isclose(rho.matrix[0, 0].real, 1.0)


def test_steady_state_singular_without_dissipation():
    h = build_squeeze_hamiltonian(EffectiveParams(g=G, omega_pump=0.0), SPACE)
    l = build_liouvillian(h, CollapseSet.default(SPACE, 0.0, 0.0, 0.0))
    with pytest.raises(SolverError):
        steady_state(l)


def test_truncation_assessment():
    space = HilbertSpace(2, 2)
    m = np.zeros((space.dim, space.dim))
    m[0, 0] = 1 - 1e-5
    m[space.index(2, 0, "g"), space.index(2, 0, "g")] = 1e-5
    tail_a, tail_b, notes = assess_truncation(DensityMatrix(space, m))
    assert tail_a == pytest.approx(1e-5) and tail_b == 0.0 and len(notes) == 1
    m[0, 0], m[space.index(2, 0, "g"), space.index(2, 0, "g")] = 0.99, 0.01
    with pytest.raises(TruncationError):
        assess_truncation(DensityMatrix(space, m))

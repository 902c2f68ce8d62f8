import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gpflow.grids import (GridSpec, Scheme, build_1d, gauss_lobatto_rule,
                          lagrange_diff_matrix)


def test_gridspec_validation():
    with pytest.raises(ValueError):
        GridSpec(-1.0, 1, 8)
    with pytest.raises(ValueError):
        GridSpec(1.0, 4, 8)
    with pytest.raises(ValueError):
        GridSpec(1.0, 1, 1)  # no interior unknowns
    with pytest.raises(ValueError):
        GridSpec(1.0, 1, 8, Scheme.SEM, 0)


def test_gridspec_counts():
    assert GridSpec(1.0, 3, 40).interior_per_dim == 39
    assert GridSpec(1.0, 3, 20, Scheme.SEM, 5).interior_per_dim == 99
    assert GridSpec(1.0, 3, 20, Scheme.SEM, 5).ndof == 99 ** 3
    assert GridSpec(16.0, 2, 300).cell_size == pytest.approx(32.0 / 300)


def test_fd2_small_grid_explicit():
    # L=1, N_c=4: h=0.5, n=3, S = tridiag(-2, 4, -2), weights 0.5
    op = build_1d(GridSpec(1.0, 1, 4, Scheme.FD2))
    assert np.allclose(op.nodes, [-0.5, 0.0, 0.5])
    assert np.allclose(op.weights, [0.5, 0.5, 0.5])
    want = np.array([[4.0, -2.0, 0.0], [-2.0, 4.0, -2.0], [0.0, -2.0, 4.0]])
    assert np.allclose(op.stiffness, want)
    assert op.mass_aux is None


def fd2_eigen(k, n, h, L):
    """Closed-form FD2 eigenpair: mu_k = (4/h^2) sin^2(k pi h / (4 L))."""
    mu = (4.0 / h ** 2) * np.sin(k * np.pi * h / (4.0 * L)) ** 2
    x = -L + h * np.arange(1, n + 1)
    v = np.sin(k * np.pi * (x + L) / (2.0 * L))
    return mu, v


@pytest.mark.parametrize("Nc,L", [(8, 1.0), (16, 1.0), (10, 16.0)])
def test_fd2_closed_form_spectrum(Nc, L):
    op = build_1d(GridSpec(L, 1, Nc, Scheme.FD2))
    lap = op.laplacian_matrix()
    for k in (1, 2, Nc - 1):
        mu, v = fd2_eigen(k, op.n, op.nodes[1] - op.nodes[0], L)
        assert np.allclose(lap @ v, mu * v, atol=1e-10 * max(1.0, mu))


def test_sem1_equals_fd2():
    for Nc in (4, 9, 32):
        fd = build_1d(GridSpec(1.0, 1, Nc, Scheme.FD2))
        sem = build_1d(GridSpec(1.0, 1, Nc, Scheme.SEM, 1))
        assert np.max(np.abs(fd.stiffness - sem.stiffness)) <= 1e-15 * np.abs(fd.stiffness).max()
        assert np.max(np.abs(fd.weights - sem.weights)) <= 1e-15
        assert np.allclose(fd.nodes, sem.nodes, atol=1e-15)


def test_sem2_single_cell_against_quadrature_oracle():
    """SEM(2) local stiffness vs dense high-order quadrature of basis gradients."""
    spec = GridSpec(1.0, 1, 1, Scheme.SEM, 2)
    # one cell has a single interior unknown (the midpoint)
    op = build_1d(spec)
    assert op.n == 1
    # oracle: S_mid,mid = int_{-1}^{1} (l_1'(x))^2 dx with 10-point Gauss
    nodes, _ = gauss_lobatto_rule(2)
    D_coeff = np.polyfit(nodes, [0.0, 1.0, 0.0], 2)
    gx, gw = np.polynomial.legendre.leggauss(10)
    lp = np.polyval(np.polyder(D_coeff), gx)
    oracle = float(gw @ lp ** 2)
    assert abs(op.stiffness[0, 0] - oracle) < 1e-14 * abs(oracle)


@pytest.mark.parametrize("k,Nc", [(2, 3), (3, 2), (5, 2)])
def test_sem_stiffness_matches_dense_quadrature(k, Nc):
    """Assembled SEM stiffness vs brute-force integration of global basis grads."""
    L = 1.0
    spec = GridSpec(L, 1, Nc, Scheme.SEM, k)
    op = build_1d(spec)
    h = spec.cell_size
    ref, _ = gauss_lobatto_rule(k)
    gx, gw = np.polynomial.legendre.leggauss(4 * k)

    # global node list including boundary
    nodes_g = []
    for c in range(Nc):
        left = -L + c * h
        cell = left + (ref + 1.0) * h / 2.0
        nodes_g.extend(cell[:-1])
    nodes_g.append(L)
    nodes_g = np.array(nodes_g)
    n_total = len(nodes_g)

    def grad(i, x_cell, left):
        # derivative of global basis i at mapped points inside [left, left+h]
        loc = np.zeros(k + 1)
        # local indices of cell nodes
        c = int(round((left + L) / h))
        gids = list(range(c * k, c * k + k + 1))
        if i not in gids:
            return np.zeros_like(x_cell)
        loc[gids.index(i)] = 1.0
        coeff = np.polyfit(ref, loc, k)
        return np.polyval(np.polyder(coeff), x_cell) * (2.0 / h)

    S_oracle = np.zeros((n_total, n_total))
    for c in range(Nc):
        left = -L + c * h
        xq = gx  # reference points
        for i in range(n_total):
            gi = grad(i, xq, left)
            if not gi.any():
                continue
            for j in range(n_total):
                gj = grad(j, xq, left)
                if gj.any():
                    S_oracle[i, j] += (h / 2.0) * float(gw @ (gi * gj))
    S_oracle = S_oracle[1:-1, 1:-1]
    assert np.allclose(op.stiffness, S_oracle, atol=1e-10 * np.abs(S_oracle).max())


def test_compact4_matrices():
    op = build_1d(GridSpec(1.0, 1, 8, Scheme.COMPACT4))
    n = op.n
    K = op.stiffness / op.weights[:, None]
    T = op.mass_aux
    assert np.allclose(np.diag(T), 10.0 / 12.0)
    assert np.allclose(np.diag(T, 1), 1.0 / 12.0)
    # T = I - (h^2/12) K, hence T and K commute
    h = op.nodes[1] - op.nodes[0]
    assert np.allclose(T, np.eye(n) - (h ** 2 / 12.0) * K, atol=1e-13)
    assert np.allclose(T @ K, K @ T, atol=1e-10)


def test_compact4_mode_eigenvalues():
    """-Delta_h sine mode k has eigenvalue mu_k / (1 - h^2 mu_k / 12)."""
    spec = GridSpec(1.0, 1, 20, Scheme.COMPACT4)
    op = build_1d(spec)
    lap = op.laplacian_matrix()
    h = spec.cell_size
    for k in (1, 3):
        mu = (4.0 / h ** 2) * np.sin(k * np.pi * h / 4.0) ** 2
        muc = mu / (1.0 - h ** 2 * mu / 12.0)
        x = op.nodes
        v = np.sin(k * np.pi * (x + 1.0) / 2.0)
        assert np.allclose(lap @ v, muc * v, atol=1e-10 * muc)


def test_compact4_fourth_order_mode_error():
    # mode-1 eigenvalue error = (pi^2/4) theta^4/15 + O(theta^6), theta = pi h/4
    for Nc in (20, 40):
        spec = GridSpec(1.0, 1, Nc, Scheme.COMPACT4)
        h = spec.cell_size
        mu = (4.0 / h ** 2) * np.sin(np.pi * h / 4.0) ** 2
        muc = mu / (1.0 - h ** 2 * mu / 12.0)
        theta = np.pi * h / 4.0
        model = (np.pi ** 2 / 4.0) * theta ** 4 / 15.0
        assert abs((np.pi ** 2 / 4.0 - muc) - model) < 0.05 * model


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([(Scheme.FD2, 1), (Scheme.COMPACT4, 1),
                        (Scheme.SEM, 2), (Scheme.SEM, 4)]),
       st.integers(2, 8), st.data())
def test_stiffness_symmetric_psd(scheme_deg, Nc, data):
    scheme, deg = scheme_deg
    op = build_1d(GridSpec(1.0, 1, Nc, scheme, deg))
    S = op.stiffness
    assert np.allclose(S, S.T, atol=1e-13 * np.abs(S).max())
    u = np.array([data.draw(st.floats(-1, 1)) for _ in range(op.n)])
    assert u @ S @ u >= -1e-12 * max(1.0, u @ u) * np.abs(S).max()
    assert np.all(op.weights > 0)


def test_fd2_offdiagonals_nonpositive():
    op = build_1d(GridSpec(1.0, 1, 16, Scheme.FD2))
    S = op.stiffness.copy()
    np.fill_diagonal(S, 0.0)
    assert np.all(S <= 0)

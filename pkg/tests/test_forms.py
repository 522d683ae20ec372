"""Exterior algebra: wedge/interior/star, metric extraction, projections."""

import io
import itertools

import numpy as np
import pytest

from g2s7.forms import (
    AltForm,
    MetricTensor,
    OMEGA2_14_EIGENVALUE,
    OMEGA2_7_EIGENVALUE,
    decompose_high,
    dump_form,
    hodge_star,
    inner,
    interior,
    load_form,
    metric_from_3form,
    phi0,
    project2,
    project3,
    pullback,
    psi0,
    sym2_from_3form,
    sym2_to_3form,
    volume_form,
    wedge,
)

from oracles import (
    interior_dense,
    metric_B_oracle,
    random_altform_dense,
    star_dense,
    wedge_dense,
)

E7 = np.eye(7)


def random_form(k, rng):
    f = AltForm(k)
    f.comps = rng.normal(size=f.comps.shape)
    return f


def random_positive_map(rng, max_cond=50.0):
    while True:
        rho = rng.normal(size=(7, 7))
        if np.linalg.det(rho) < 0:
            rho[[0, 1]] = rho[[1, 0]]
        if np.linalg.cond(rho) <= max_cond:
            return rho


class TestAltForm:
    def test_signed_indexing(self):
        f = AltForm.basis((1, 2, 3))
        assert f[(1, 2, 3)] == 1.0
        assert f[(2, 1, 3)] == -1.0
        assert f[(1, 1, 3)] == 0.0

    def test_degree_bounds(self):
        with pytest.raises(ValueError):
            AltForm(8)
        with pytest.raises(IndexError):
            AltForm.basis((0, 1))

    def test_dense_roundtrip(self):
        rng = np.random.default_rng(0)
        f = random_form(3, rng)
        g = AltForm.from_dense(f.to_dense())
        assert np.allclose(f.comps, g.comps)

    def test_dense_is_antisymmetric(self):
        rng = np.random.default_rng(1)
        d = random_form(2, rng).to_dense()
        assert np.allclose(d, -d.T)

    def test_from_components(self):
        f = AltForm.from_components(2, {(2, 1): 3.0})
        assert f[(1, 2)] == -3.0


class TestWedge:
    def test_basis_one_forms(self):
        f = wedge(AltForm.basis((1,)), AltForm.basis((2,)))
        assert f[(1, 2)] == 1.0

    def test_graded_commutativity(self):
        rng = np.random.default_rng(2)
        for p, q in [(1, 1), (1, 2), (2, 2), (2, 3), (3, 3), (1, 4)]:
            a, b = random_form(p, rng), random_form(q, rng)
            lhs = wedge(a, b).comps
            rhs = (-1.0) ** (p * q) * wedge(b, a).comps
            assert np.allclose(lhs, rhs, atol=1e-12)

    def test_odd_square_vanishes(self):
        rng = np.random.default_rng(3)
        a = random_form(3, rng)
        assert np.allclose(wedge(a, a).comps, 0.0, atol=1e-12)

    def test_degree_overflow(self):
        rng = np.random.default_rng(4)
        with pytest.raises(ValueError):
            wedge(random_form(4, rng), random_form(4, rng))

    def test_against_dense_oracle(self):
        rng = np.random.default_rng(5)
        for p, q in [(1, 2), (2, 2), (2, 3), (3, 4)]:
            ad = random_altform_dense(p, rng)
            bd = random_altform_dense(q, rng)
            lib = wedge(AltForm.from_dense(ad), AltForm.from_dense(bd))
            oracle = wedge_dense(ad, p, bd, q)
            assert np.allclose(lib.to_dense(), oracle, atol=1e-10)

    def test_phi_wedge_psi_is_seven_volumes(self):
        # independent complement-sum expansion over all index pairs
        phid, psid = phi0().to_dense(), psi0().to_dense()
        total = 0.0
        from oracles import perm_sign
        for I in itertools.combinations(range(7), 3):
            Ic = tuple(sorted(set(range(7)) - set(I)))
            total += perm_sign(I + Ic) * phid[I] * psid[Ic]
        assert total == 7.0
        assert wedge(phi0(), psi0()).comps[0] == 7.0


class TestInterior:
    def test_basis(self):
        assert interior(E7[0], AltForm.basis((1,))).comps[0] == 1.0

    def test_e1_into_phi(self):
        got = interior(E7[0], phi0())
        want = AltForm.from_components(2, {(2, 3): 1.0, (4, 5): -1.0, (6, 7): -1.0})
        assert np.array_equal(got.comps, want.comps)

    def test_double_contraction_vanishes(self):
        rng = np.random.default_rng(6)
        x = rng.normal(size=7)
        a = random_form(4, rng)
        assert np.allclose(interior(x, interior(x, a)).comps, 0.0, atol=1e-12)

    def test_degree_zero_error(self):
        with pytest.raises(ValueError):
            interior(E7[0], AltForm(0))

    def test_against_dense_oracle(self):
        rng = np.random.default_rng(7)
        ad = random_altform_dense(3, rng)
        x = rng.normal(size=7)
        lib = interior(x, AltForm.from_dense(ad))
        assert np.allclose(lib.to_dense(), interior_dense(x, ad), atol=1e-12)


class TestHodgeStar:
    def test_star_of_one(self):
        one = AltForm(0, [1.0])
        assert hodge_star(one).comps[0] == 1.0
        m = MetricTensor(2.0 * np.eye(7))
        assert np.isclose(hodge_star(one, m).comps[0], m.vol)

    def test_star_phi_is_psi_as_printed(self):
        # the printed 4-form: dx4567 - dx2345 + dx1346 - dx1247
        #                     - dx2367 - dx1357 - dx1256
        want = AltForm.from_components(4, {
            (4, 5, 6, 7): 1.0, (2, 3, 4, 5): -1.0, (1, 3, 4, 6): 1.0,
            (1, 2, 4, 7): -1.0, (2, 3, 6, 7): -1.0, (1, 3, 5, 7): -1.0,
            (1, 2, 5, 6): -1.0,
        })
        assert np.array_equal(psi0().comps, want.comps)

    def test_involution(self):
        rng = np.random.default_rng(8)
        w = rng.normal(size=(7, 7))
        m = MetricTensor(np.eye(7) + 0.1 * (w + w.T) + 0.5 * np.eye(7))
        for k in range(8):
            a = random_form(k, rng)
            b = hodge_star(hodge_star(a, m), m)
            assert np.allclose(a.comps, b.comps, atol=1e-10)

    def test_defining_property(self):
        # b ^ star(a) = <b, a> vol for random forms and a random metric
        rng = np.random.default_rng(9)
        w = rng.normal(size=(7, 7))
        m = MetricTensor(np.eye(7) + 0.05 * (w + w.T))
        for k in (2, 3):
            a, b = random_form(k, rng), random_form(k, rng)
            lhs = wedge(b, hodge_star(a, m)).comps[0]
            rhs = inner(b, a, m) * m.vol
            assert abs(lhs - rhs) < 1e-10

    def test_against_dense_oracle_identity_metric(self):
        rng = np.random.default_rng(10)
        for k in (2, 3, 4):
            ad = random_altform_dense(k, rng)
            lib = hodge_star(AltForm.from_dense(ad))
            assert np.allclose(lib.to_dense(), star_dense(ad, k), atol=1e-12)


class TestMetricFrom3Form:
    def test_flat_form_gives_identity(self):
        m = metric_from_3form(phi0())
        assert np.max(np.abs(m.g - np.eye(7))) < 1e-12
        assert abs(m.vol - 1.0) < 1e-12

    def test_matches_brute_force_coefficient_matrix(self):
        B = metric_B_oracle(phi0().to_dense())
        assert np.array_equal(B, np.eye(7))

    def test_scaling(self):
        # c^3 phi corresponds to the metric c^2 g (brute-forced through S)
        c = 1.7
        scaled = c ** 3 * phi0()
        B = metric_B_oracle(scaled.to_dense())
        m = metric_from_3form(scaled)
        vol = np.linalg.det(B) ** (1.0 / 9.0)
        assert np.allclose(B / vol, m.g, atol=1e-10)
        assert np.max(np.abs(m.g - c ** 2 * np.eye(7))) < 1e-9
        assert abs(m.vol - c ** 7) < 1e-8

    def test_negative_form_rejected(self):
        with pytest.raises(ValueError, match="not a G2 structure"):
            metric_from_3form(-1.0 * phi0())

    def test_zero_form_rejected(self):
        with pytest.raises(ValueError, match="not a G2 structure"):
            metric_from_3form(AltForm(3))

    def test_gl_plus_equivariance(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            rho = random_positive_map(rng)
            m = metric_from_3form(pullback(phi0(), rho))
            want = rho.T @ rho
            scale = max(1.0, np.abs(want).max())
            assert np.max(np.abs(m.g - want)) < 1e-9 * scale
            assert abs(m.vol - abs(np.linalg.det(rho))) < 1e-9 * m.vol


class TestProject2:
    def test_eigenvalue_constants(self):
        # exact integer eigenvalues of star(phi ^ .) on the two modules
        phi = phi0()
        beta7 = interior(E7[0], phi)
        image = hodge_star(wedge(phi, beta7))
        assert np.array_equal(image.comps, OMEGA2_7_EIGENVALUE * beta7.comps)
        beta14 = AltForm.from_components(2, {(1, 2): 1.0, (5, 6): 1.0})
        assert np.allclose(wedge(beta14, psi0()).comps, 0.0)
        image14 = hodge_star(wedge(phi, beta14))
        assert np.array_equal(image14.comps, OMEGA2_14_EIGENVALUE * beta14.comps)

    def test_contraction_of_interior_forms(self):
        rng = np.random.default_rng(12)
        phi = phi0()
        m = MetricTensor.identity()
        x = rng.normal(size=7)
        b7, b14 = project2(interior(x, phi), phi, m)
        assert np.allclose(b14.comps, 0.0, atol=1e-12)
        assert np.allclose(b7.comps, interior(x, phi).comps, atol=1e-12)

    def test_psi_annihilated_forms(self):
        phi = phi0()
        beta = AltForm.from_components(2, {(1, 2): 1.0, (5, 6): 1.0})
        b7, b14 = project2(beta, phi)
        assert np.allclose(b7.comps, 0.0, atol=1e-12)
        assert np.allclose(b14.comps, beta.comps, atol=1e-12)

    def test_reassembly_idempotence_orthogonality(self):
        rng = np.random.default_rng(13)
        phi = phi0()
        m = MetricTensor.identity()
        for _ in range(10):
            beta = random_form(2, rng)
            b7, b14 = project2(beta, phi, m)
            assert np.allclose((b7 + b14).comps, beta.comps, atol=1e-10)
            bb7, bb14 = project2(b7, phi, m)
            assert np.allclose(bb7.comps, b7.comps, atol=1e-10)
            assert np.allclose(bb14.comps, 0.0, atol=1e-10)
            assert abs(inner(b7, b14, m)) < 1e-10

    def test_ranks(self):
        phi = phi0()
        m = MetricTensor.identity()
        rows7, rows14 = [], []
        for i, j in itertools.combinations(range(1, 8), 2):
            b7, b14 = project2(AltForm.basis((i, j)), phi, m)
            rows7.append(b7.comps)
            rows14.append(b14.comps)
        assert np.linalg.matrix_rank(np.stack(rows7), tol=1e-8) == 7
        assert np.linalg.matrix_rank(np.stack(rows14), tol=1e-8) == 14

    def test_vector_extraction_cross_check(self):
        # index formula X_m = (1/6) beta_{jk} phi_m^{jk} on the 7-module
        rng = np.random.default_rng(14)
        phi = phi0()
        m = MetricTensor.identity()
        beta = random_form(2, rng)
        b7, _ = project2(beta, phi, m)
        x = np.einsum("jk,mjk->m", b7.to_dense(), phi.to_dense()) / 6.0
        assert np.allclose(interior(x, phi).comps, b7.comps, atol=1e-10)

    def test_general_metric_state(self):
        rng = np.random.default_rng(15)
        rho = random_positive_map(rng, max_cond=10.0)
        phi = pullback(phi0(), rho)
        m = metric_from_3form(phi)
        beta = random_form(2, rng)
        b7, b14 = project2(beta, phi, m)
        assert np.allclose((b7 + b14).comps, beta.comps, atol=1e-9)
        b77, _ = project2(b7, phi, m)
        assert np.allclose(b77.comps, b7.comps, atol=1e-8)
        assert abs(inner(b7, b14, m)) < 1e-8 * max(1.0, beta.norm() ** 2)


class TestProject3:
    def test_multiple_of_phi(self):
        phi = phi0()
        g1, g7, g27 = project3(5.0 * phi, phi)
        assert np.allclose(g1.comps, 5.0 * phi.comps, atol=1e-12)
        assert np.allclose(g7.comps, 0.0, atol=1e-12)
        assert np.allclose(g27.comps, 0.0, atol=1e-12)

    def test_interior_of_psi(self):
        rng = np.random.default_rng(16)
        phi = phi0()
        x = rng.normal(size=7)
        gamma = interior(x, psi0())
        g1, g7, g27 = project3(gamma, phi)
        assert np.allclose(g1.comps, 0.0, atol=1e-12)
        assert np.allclose(g7.comps, gamma.comps, atol=1e-12)
        assert np.allclose(g27.comps, 0.0, atol=1e-12)

    def test_traceless_symmetric_image(self):
        rng = np.random.default_rng(17)
        phi = phi0()
        h = rng.normal(size=(7, 7))
        h = h + h.T
        h -= np.trace(h) / 7.0 * np.eye(7)
        gamma = sym2_to_3form(h, phi)
        g1, g7, g27 = project3(gamma, phi)
        assert np.allclose(g27.comps, gamma.comps, atol=1e-10)
        assert np.allclose(g1.comps, 0.0, atol=1e-10)
        assert np.allclose(g7.comps, 0.0, atol=1e-10)
        # membership: annihilated by wedging with phi and psi
        assert np.allclose(wedge(gamma, phi).comps, 0.0, atol=1e-10)
        assert np.allclose(wedge(gamma, psi0()).comps, 0.0, atol=1e-10)

    def test_reassembly_orthogonality_ranks(self):
        rng = np.random.default_rng(18)
        phi = phi0()
        m = MetricTensor.identity()
        rows = {0: [], 1: [], 2: []}
        for idx in itertools.combinations(range(1, 8), 3):
            parts = project3(AltForm.basis(idx), phi, m)
            assert np.allclose(sum(p.comps for p in parts),
                               AltForm.basis(idx).comps, atol=1e-10)
            for q, p in enumerate(parts):
                rows[q].append(p.comps)
        for q, want in zip(range(3), (1, 7, 27)):
            assert np.linalg.matrix_rank(np.stack(rows[q]), tol=1e-8) == want
        gamma = random_form(3, rng)
        g1, g7, g27 = project3(gamma, phi, m)
        assert abs(inner(g1, g7, m)) < 1e-10
        assert abs(inner(g1, g27, m)) < 1e-10
        assert abs(inner(g7, g27, m)) < 1e-10


class TestGeneralMetricState:
    """The projections and embeddings for a pulled-back (non-flat) state."""

    def setup_method(self):
        rng = np.random.default_rng(40)
        self.rho = random_positive_map(rng, max_cond=8.0)
        self.phi = pullback(phi0(), self.rho)
        self.metric = metric_from_3form(self.phi)
        self.rng = rng

    def test_three_form_split(self):
        gamma = random_form(3, self.rng)
        parts = project3(gamma, self.phi, self.metric)
        total = parts[0] + parts[1] + parts[2]
        assert np.max(np.abs(total.comps - gamma.comps)) < 1e-8
        for q, part in enumerate(parts):
            again = project3(part, self.phi, self.metric)
            assert np.max(np.abs(again[q].comps - part.comps)) < 1e-7
        for a, b in itertools.combinations(range(3), 2):
            assert abs(inner(parts[a], parts[b], self.metric)) < 1e-7
        # the 27-part is annihilated by wedging with phi and psi
        g27 = parts[2]
        psi = hodge_star(self.phi, self.metric)
        assert np.max(np.abs(wedge(g27, self.phi).comps)) < 1e-7
        assert np.max(np.abs(wedge(g27, psi).comps)) < 1e-7

    def test_metric_tensor_embeds_to_three_phi(self):
        # h = g maps to 3 phi for any state (pure combinatorics)
        got = sym2_to_3form(self.metric.g, self.phi, self.metric)
        assert np.max(np.abs(got.comps - 3.0 * self.phi.comps)) < 1e-9

    def test_sym2_roundtrip(self):
        h = self.rng.normal(size=(7, 7))
        h = h + h.T
        back = sym2_from_3form(sym2_to_3form(h, self.phi, self.metric),
                               self.phi, self.metric)
        assert np.max(np.abs(back - h)) < 1e-8

    def test_four_form_reassembly(self):
        a = random_form(4, self.rng)
        parts = decompose_high(a, self.phi, self.metric)
        total = parts[0] + parts[1] + parts[2]
        assert np.max(np.abs(total.comps - a.comps)) < 1e-8


class TestSym2To3Form:
    def test_zero(self):
        assert np.allclose(sym2_to_3form(np.zeros((7, 7)), phi0()).comps, 0.0)

    def test_identity_maps_to_three_phi(self):
        # brute-force oracle: sum_i dx^i ^ (e_i , phi) computed densely
        phid = phi0().to_dense()
        acc = np.zeros((7,) * 3)
        for i in range(7):
            dxi = np.zeros(7)
            dxi[i] = 1.0
            one = np.zeros((7,))
            one[i] = 1.0
            acc += wedge_dense(one, 1, interior_dense(E7[i], phid), 2)
        assert np.allclose(acc, 3.0 * phid, atol=1e-12)
        got = sym2_to_3form(np.eye(7), phi0())
        assert np.allclose(got.comps, 3.0 * phi0().comps, atol=1e-12)

    def test_linear(self):
        rng = np.random.default_rng(19)
        h1 = rng.normal(size=(7, 7)); h1 = h1 + h1.T
        h2 = rng.normal(size=(7, 7)); h2 = h2 + h2.T
        phi = phi0()
        lhs = sym2_to_3form(h1 + 2.0 * h2, phi)
        rhs = sym2_to_3form(h1, phi) + 2.0 * sym2_to_3form(h2, phi)
        assert np.allclose(lhs.comps, rhs.comps, atol=1e-12)

    def test_asymmetric_input_rejected(self):
        h = np.zeros((7, 7))
        h[0, 1] = 1.0
        with pytest.raises(ValueError):
            sym2_to_3form(h, phi0())

    def test_inverse_roundtrip(self):
        rng = np.random.default_rng(20)
        h = rng.normal(size=(7, 7))
        h = h + h.T
        phi = phi0()
        back = sym2_from_3form(sym2_to_3form(h, phi), phi)
        assert np.max(np.abs(back - h)) < 1e-10


class TestDecomposeHigh:
    def test_psi_is_pure_type_one(self):
        parts = decompose_high(psi0(), phi0())
        assert np.allclose(parts[0].comps, psi0().comps, atol=1e-12)
        assert np.allclose(parts[1].comps, 0.0, atol=1e-12)
        assert np.allclose(parts[2].comps, 0.0, atol=1e-12)

    def test_dual_of_interior_psi(self):
        rng = np.random.default_rng(21)
        x = rng.normal(size=7)
        a = hodge_star(interior(x, psi0()))
        parts = decompose_high(a, phi0())
        assert np.allclose(parts[1].comps, a.comps, atol=1e-10)

    def test_five_form_reassembly(self):
        rng = np.random.default_rng(22)
        a = random_form(5, rng)
        p7, p14 = decompose_high(a, phi0())
        assert np.allclose((p7 + p14).comps, a.comps, atol=1e-10)

    def test_wrong_degree(self):
        with pytest.raises(ValueError):
            decompose_high(AltForm(2), phi0())


class TestContractionSweeps:
    """Exact integer sweeps; the psi signs are tied to the printed tables."""

    def setup_method(self):
        self.phi = phi0().to_dense().astype(np.int64)
        self.psi = psi0().to_dense().astype(np.int64)
        self.g = np.eye(7, dtype=np.int64)

    def test_phi_phi_contraction(self):
        lhs = np.einsum("ijk,abk->ijab", self.phi, self.phi)
        rhs = (np.einsum("ia,jb->ijab", self.g, self.g)
               - np.einsum("ib,ja->ijab", self.g, self.g) + self.psi)
        assert np.array_equal(lhs, rhs)

    def test_phi_psi_contraction(self):
        lhs = np.einsum("ijk,abck->ijabc", self.phi, self.psi)
        rhs = -(np.einsum("ia,jbc->ijabc", self.g, self.phi)
                + np.einsum("ib,ajc->ijabc", self.g, self.phi)
                + np.einsum("ic,abj->ijabc", self.g, self.phi)
                - np.einsum("ja,ibc->ijabc", self.g, self.phi)
                - np.einsum("jb,aic->ijabc", self.g, self.phi)
                - np.einsum("jc,abi->ijabc", self.g, self.phi))
        assert np.array_equal(lhs, rhs)

    def test_psi_psi_contraction(self):
        lhs = np.einsum("ijkl,ajkl->ia", self.psi, self.psi)
        assert np.array_equal(lhs, 24 * self.g)

    def test_full_phi_contraction(self):
        assert np.array_equal(
            np.einsum("ijk,ajk->ia", self.phi, self.phi), 6 * self.g)

    def test_phi_psi_triple_contraction_vanishes(self):
        assert np.array_equal(
            np.einsum("jkl,mjkl->m", self.phi, self.psi), np.zeros(7, dtype=np.int64))


class TestFormFiles:
    def test_roundtrip(self):
        rng = np.random.default_rng(23)
        f = random_form(3, rng)
        buf = io.StringIO()
        dump_form(f, buf)
        buf.seek(0)
        g = load_form(buf)
        assert g.degree == 3
        assert np.allclose(f.comps, g.comps)

    def test_unlisted_components_are_zero(self):
        buf = io.StringIO('{"degree": 2, "dim": 7, "components": '
                          '[{"indices": [1, 3], "value": 2.5}]}')
        f = load_form(buf)
        assert f[(1, 3)] == 2.5
        assert f[(1, 2)] == 0.0

    def test_non_increasing_indices_rejected(self):
        buf = io.StringIO('{"degree": 2, "dim": 7, "components": '
                          '[{"indices": [3, 1], "value": 1.0}]}')
        with pytest.raises(ValueError):
            load_form(buf)

    def test_wrong_dimension_rejected(self):
        buf = io.StringIO('{"degree": 2, "dim": 6, "components": []}')
        with pytest.raises(ValueError):
            load_form(buf)

    def test_file_roundtrip(self, tmp_path):
        f = phi0()
        path = tmp_path / "phi.form"
        dump_form(f, path)
        assert np.array_equal(load_form(path).comps, f.comps)


class TestMetricTensor:
    def test_identity(self):
        m = MetricTensor.identity()
        assert m.vol == 1.0
        assert np.array_equal(m.inverse, np.eye(7))

    def test_validation(self):
        with pytest.raises(ValueError):
            MetricTensor(-np.eye(7))
        bad = np.eye(7)
        bad[0, 1] = 0.5
        with pytest.raises(ValueError):
            MetricTensor(bad)

    def test_volume_consistency(self):
        g = np.diag([1.0, 2.0, 1.0, 1.0, 1.0, 1.0, 2.0])
        m = MetricTensor(g)
        assert np.isclose(m.vol, 2.0)
        assert np.isclose(volume_form(m).comps[0], 2.0)

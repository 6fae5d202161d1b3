"""Acceptance suite.

Runs the full default identity suite (q = 0.5 with v in {0, 0.5, 1.5} on the
grid [-10, 40]; q = 0.8 with v = 0.5 on [-20, 120]) and gates each criterion
at its stated tolerance, printing one pass/fail line per criterion.  Run as

    pytest tests/test_acceptance.py -v -s
"""

import numpy as np
import pytest

from qfourier.qseries import PrecisionCtx, QParams
from qfourier.report import SuiteConfig, run_suite
from qfourier.translation import positivity_min


@pytest.fixture(scope="module")
def suite():
    return run_suite(SuiteConfig())


def _collect(suite, name):
    """(cell-label, IdentityResult) pairs for one identity across cells."""
    out = []
    for cell in suite.cells:
        for r in cell.identities:
            if r.name == name:
                out.append((f"q={cell.q},v={cell.v}", r))
    return out


def _gate(suite, criterion, names, description):
    worst_val, worst_at, tol = -np.inf, "", None
    for name in names:
        rows = _collect(suite, name)
        assert rows, f"identity {name} missing from the report"
        for label, r in rows:
            if r.residual > worst_val:
                worst_val, worst_at = r.residual, f"{name} @ {label}"
            if r.gated:
                tol = r.tolerance if tol is None else max(tol, r.tolerance)
    ok = all(r.passed for name in names for _, r in _collect(suite, name))
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] criterion {criterion}: {description} "
          f"(worst {worst_val:.3e} at {worst_at}, gate {tol})")
    assert ok, f"criterion {criterion} failed: worst {worst_val:.3e} at {worst_at}"


def test_criterion_01_inversion(suite):
    _gate(suite, 1, ["transform-inversion"],
          "inversion F(Ff) = f, 100 probes per cell, < 1e-9")


def test_criterion_02_plancherel(suite):
    _gate(suite, 2, ["transform-plancherel"],
          "Plancherel | ||Ff|| - ||f|| | / ||f|| < 1e-9")


def test_criterion_03_orthogonality(suite):
    _gate(suite, 3, ["orthogonality-offdiag", "orthogonality-diagonal"],
          "basis Gram diagonal: offdiag < 1e-9, diagonal rel < 1e-9")


def test_criterion_04_decay_bound(suite):
    _gate(suite, 4, ["bessel-decay-bound"],
          "decay bound |j_v(q^n)|/bound <= 1 + 1e-12, both branches")


def test_criterion_05_eigen_relation(suite):
    _gate(suite, 5, ["bessel-eigen-relation"],
          "Delta j_v(lambda .) = -lambda^2 j_v(lambda .), residual < 1e-9")


def test_criterion_06_kernel_identities(suite):
    _gate(suite, 6,
          ["kernel-symmetry", "kernel-row-sums", "kernel-transform-projection"],
          "kernel symmetry exact, row sums 1e-8, projection 1e-8")


def test_criterion_07_positivity(suite):
    _gate(suite, 7, ["kernel-positivity"],
          "min D_v >= -1e-10 on the window for v >= 0")
    # Exploratory negative-order rows: reported, never gated.
    res = positivity_min(QParams(0.5, -0.7), window=10, ctx=PrecisionCtx())
    print(f"       exploratory v=-0.7: min_kernel={res.min_value:.3e} "
          f"argmin={res.argmin} (observational)")


def test_criterion_08_markov_axioms(suite):
    names = [f"markov-{op}-{axis}"
             for op in ("translation", "bump", "heat")
             for axis in ("unit", "symmetry", "contraction", "jensen", "sup")]
    _gate(suite, 8, names,
          "Markov axioms for T_{q,x} and f -> f * rho, all defects < 1e-8")


def test_criterion_09_product_formula(suite):
    _gate(suite, 9,
          ["convolution-product-formula", "convolution-commutativity"],
          "F(f*g) = Ff.Fg and f*g = g*f on 20 seeded pairs, < 1e-8")


def test_criterion_10_eigen_multiplier_hypergroup(suite):
    _gate(suite, 10,
          ["translation-eigenfunctions", "multiplier-diagonal-action",
           "hypergroup-expansion", "hypergroup-window-growth"],
          "eigen residual < 1e-8, multiplier action < 1e-8, "
          "hypergroup < 1e-7 with window-growth consistency")


def test_criterion_11_heat(suite):
    _gate(suite, 11,
          ["gauss-transform-consistency", "gauss-transform-consistency-hp",
           "gauss-mass", "heat-spectral-diagonalization",
           "heat-equation-residual", "qexp-ode-identity",
           "gauss-amplitude-lattice-scaling"],
          "heat: kernel consistency 1e-8, mass 1e-8, spectral 1e-8, "
          "equation 1e-7, scalar identity 1e-12, amplitude scaling 1e-10")


def test_criterion_12_oracle_equivalence(suite):
    rows = []
    for cell in suite.cells:
        if cell.q == 0.5:
            rows.extend(_collect(suite, "bessel-oracle-agreement"))
    assert rows, "dyadic oracle identity missing for q = 1/2 cells"
    _gate(suite, 12, ["bessel-oracle-agreement"],
          "exact-rational oracle vs production path, <= 1 ulp, n >= -8")


def test_every_gated_identity_passes(suite):
    failures = [
        (cell.q, cell.v, r.name, r.residual, r.tolerance)
        for cell in suite.cells for r in cell.identities if not r.passed
    ]
    assert not failures, f"failed identities: {failures}"

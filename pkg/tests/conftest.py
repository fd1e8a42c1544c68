import numpy as np
import pytest

from nextlf.dataset import Channel, TimeSeriesSet
from nextlf.modal import compare_modes
from nextlf.pipeline import IdentifyConfig, identify
from nextlf.simulate import ForceSpec, assemble_beam, modal_solve, reference_beam, simulate_response

FS = 1800.0
DURATION = 30.0
# Free-decay records: the lagged sums converge, so no N - k correction.
TRANSIENT = IdentifyConfig(normalization="biased")


def make_ts(samples, fs=1.0, names=None):
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    names = names or [f"c{i}" for i in range(samples.shape[0])]
    return TimeSeriesSet(fs, tuple(Channel(n) for n in names), samples)


def beam_record(zeta):
    model = assemble_beam(reference_beam(), zeta)
    ts = simulate_response(model, ForceSpec("impulse", dof=0), FS, DURATION)
    return model, ts, modal_solve(model).within(0, FS / 2)


@pytest.fixture(scope="session")
def beam1():
    return beam_record(0.01)


@pytest.fixture(scope="session")
def beam3():
    return beam_record(0.03)


@pytest.fixture(scope="session")
def lf_beam1(beam1):
    _, ts, _ = beam1
    return identify(ts, TRANSIENT)


@pytest.fixture(scope="session")
def era_beam1(beam1):
    _, ts, _ = beam1
    return identify(ts, TRANSIENT.with_(method="era"))


def paired(reference, result, max_df=0.05):
    return compare_modes(reference, result, max_df)


def random_rational(n, p, rng):
    """Random stable SIMO function of degree 2n with residue vectors in C^p.

    Returns ``(poles, residues, H)`` where `poles` holds the n upper
    half-plane poles and ``H(s)`` evaluates the p-vector.
    """
    omega = np.sort(rng.uniform(2.0, 20.0, n))
    zeta = rng.uniform(0.01, 0.1, n)
    poles = omega * (-zeta + 1j * np.sqrt(1 - zeta**2))
    res = rng.standard_normal((p, n)) + 1j * rng.standard_normal((p, n))

    def H(s):
        s = np.asarray(s, dtype=complex)[..., None, None]
        terms = res / (s - poles) + np.conj(res) / (s - np.conj(poles))
        return terms.sum(axis=-1)

    return poles, res, H


def rational_frf(H, n_bins, w_max=25.0):
    from nextlf.spectral import FrfSamples

    freqs = np.linspace(0, w_max, n_bins + 1)
    return FrfSamples(freqs, H(1j * freqs).T)


# Acceptance verdicts, keyed by criterion number, echoed after the run.
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {key}: {detail}")

"""Shared fixtures: the golden 2x2 instance, oracles, and planted generators."""

from __future__ import annotations

import numpy as np

from cpinterp.choi import ChoiMatrix, KrausSet, apply_choi, kraus_to_choi
from cpinterp.constraints import ProblemInstance, instance_system, prune_dependent

# Golden 2x2 interpolation instance and the reference solution of its
# exponential-potential minimization (frozen to the published precision).
A1 = np.array([[2.0, 1.0], [1.0, 0.0]])
A2 = np.array([[1.0, 1.0], [1.0, 2.0]])
B1 = np.array([[4.0, 0.0], [0.0, 0.0]])
B2 = np.array([[3.5, 1.5], [1.5, 2.5]])

X_REF = np.array(
    [
        [1.549937761, -0.1694804138, 0.4499571618, 0.4047411695],
        [-0.1694804138, 0.1534277390, -0.06572393508, -0.1533566973],
        [0.4499571618, -0.06572393508, 0.5249880063, 0.6652436210],
        [0.4047411695, -0.1533566973, 0.6652436210, 1.326699194],
    ]
)


def golden_instance() -> ProblemInstance:
    return ProblemInstance(2, 2, [(A1, B1), (A2, B2)])


def golden_system(pruned: bool = True):
    sys = instance_system(golden_instance())
    return prune_dependent(sys) if pruned else sys


def random_hermitian(rng: np.random.Generator, p: int, scale: float = 1.0) -> np.ndarray:
    m = rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p))
    return scale * (m + m.conj().T) / 2


def random_complex(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def expm_taylor(h: np.ndarray, terms: int = 12) -> np.ndarray:
    """Truncated power series of exp(h); accurate for small norms."""
    p = h.shape[0]
    out = np.eye(p, dtype=complex)
    term = np.eye(p, dtype=complex)
    for j in range(1, terms + 1):
        term = term @ h / j
        out = out + term
    return out


def expm_series_squared(h: np.ndarray) -> np.ndarray:
    """Independent matrix exponential: scale to tiny norm, Taylor, square back."""
    norm = np.linalg.norm(h)
    s = max(0, int(np.ceil(np.log2(max(norm, 1e-16) / 0.05))))
    small = expm_taylor(h / 2**s, terms=20)
    for _ in range(s):
        small = small @ small
    return small


def planted_instance(
    rng: np.random.Generator,
    n: int,
    k: int,
    num_pairs: int,
    hermitian_data: bool = True,
    exponent_scale: float = 0.7,
) -> tuple[ProblemInstance, np.ndarray]:
    """Instance with a known strictly positive Choi solution.

    X_true = exp(random Hermitian); B_nu is the image of A_nu under the map
    with that Choi matrix, so X_true satisfies every assembled constraint.
    """
    p = n * k
    y = random_hermitian(rng, p, scale=exponent_scale / np.sqrt(p))
    w, u = np.linalg.eigh(y)
    x_true = (u * np.exp(w)) @ u.conj().T
    pairs = []
    for _ in range(num_pairs):
        a = (
            random_hermitian(rng, n)
            if hermitian_data
            else random_complex(rng, n, n)
        )
        b = apply_choi(ChoiMatrix(n, k, x_true), a)
        pairs.append((a, b))
    return ProblemInstance(n, k, pairs), x_true


def planted_diagonal_instance(
    rng: np.random.Generator, n: int, k: int, num_pairs: int
) -> tuple[ProblemInstance, np.ndarray]:
    """Diagonal instance with a known positive diagonal solution."""
    p = n * k
    x_true = np.diag(np.exp(rng.uniform(-1.0, 1.0, size=p))).astype(complex)
    pairs = []
    for _ in range(num_pairs):
        a = np.diag(rng.uniform(-2.0, 2.0, size=n)).astype(complex)
        b = apply_choi(ChoiMatrix(n, k, x_true), a)
        pairs.append((a, b))
    return ProblemInstance(n, k, pairs), x_true


def random_kraus_set(
    rng: np.random.Generator, n: int, k: int, count: int
) -> KrausSet:
    return KrausSet(n, k, [random_complex(rng, n, k) / np.sqrt(n * k) for _ in range(count)])


def random_channel_kraus(rng: np.random.Generator, n: int, count: int) -> KrausSet:
    """Kraus set normalized so the represented map is trace preserving."""
    vs = [random_complex(rng, n, n) for _ in range(count)]
    s = sum(v @ v.conj().T for v in vs)
    w, u = np.linalg.eigh(s)
    s_inv_half = (u * (1.0 / np.sqrt(w))) @ u.conj().T
    return KrausSet(n, n, [s_inv_half @ v for v in vs])

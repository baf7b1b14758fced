"""Random instance generators shared by the property tests.

These build matrices directly with numpy and never go through the code
under test, except to wrap the result in the validated types.
"""

import numpy as np

from qknow import DensityMatrix, Effect, Hypothesis, KnowledgeState, Measurement, pure_state_new

S = 1 / np.sqrt(2)


def random_vector(rng, dim):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_density(rng, dim, rank=None):
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_pure(rng, dim):
    return pure_state_new(random_vector(rng, dim))


def inv_sqrt(m):
    vals, vecs = np.linalg.eigh(m)
    return (vecs / np.sqrt(vals)) @ vecs.conj().T


def random_povm(rng, dim, n_outcomes):
    """E_i = S^-1/2 A_i S^-1/2 with A_i random positive and S = sum A_i."""
    parts = []
    for _ in range(n_outcomes):
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        parts.append(g @ g.conj().T)
    t = inv_sqrt(sum(parts))
    effects = [t @ a @ t for a in parts]
    # absorb rounding so the effects sum to the identity
    effects[-1] = np.eye(dim) - sum(effects[:-1])
    effects[-1] = 0.5 * (effects[-1] + effects[-1].conj().T)
    return Measurement(tuple(Effect(f"o{i}", e) for i, e in enumerate(effects)), "general")


def random_projective(rng, dim):
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, _ = np.linalg.qr(z)
    effects = [Effect(f"p{i}", np.outer(q[:, i], q[:, i].conj())) for i in range(dim)]
    return Measurement(tuple(effects), "projective")


def random_knowledge(rng, dim, n_hyp, name="obs", pure=False):
    hyps = []
    for j in range(n_hyp):
        if pure:
            v = random_vector(rng, dim)
            state = DensityMatrix(np.outer(v, v.conj()))
        else:
            state = random_density(rng, dim, rank=int(rng.integers(1, dim + 1)))
        hyps.append(Hypothesis(f"h{j}", state))
    w = rng.dirichlet(np.ones(n_hyp))
    return KnowledgeState(name, tuple(hyps), w)


def haar_unitary(rng, dim):
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))

"""Smooth low-frequency surface perturbation emulating reconstruction error."""

from __future__ import annotations

import numpy as np

from .mesh import TriMesh

_N_WAVES = 8


def perturb_mesh(mesh: TriMesh, sigma: float, seed: int = 0) -> TriMesh:
    """Displace vertices along their normals by a smooth random field.

    The field is a sum of long-wavelength sinusoids rescaled so the vertex
    displacement RMS equals sigma. Topology is unchanged; sigma 0 returns
    the input itself.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0.0:
        return mesh
    mesh.require_nonempty()
    rng = np.random.default_rng([seed, 0x7E27])
    diag = mesh.bbox_diagonal()
    if diag <= 0:
        return mesh
    base_freq = 2.0 * np.pi / diag
    omega = rng.normal(size=(_N_WAVES, 3))
    omega *= (base_freq * rng.uniform(0.5, 1.5, _N_WAVES) / np.linalg.norm(omega, axis=1))[:, None]
    phase = rng.uniform(0.0, 2.0 * np.pi, _N_WAVES)
    amp = rng.normal(size=_N_WAVES)
    field = (amp * np.sin(mesh.vertices @ omega.T + phase)).sum(axis=1)
    rms = float(np.sqrt(np.mean(field**2)))
    if rms < 1e-15:
        return mesh
    field *= sigma / rms
    return TriMesh(mesh.vertices + field[:, None] * mesh.vertex_normals(), mesh.faces)

"""Three qubits under local depolarizing noise; each site rotated by sigma_y and sigma_z."""
import numpy as np

from qincompat import holevo
from qincompat.model import (GeneratorSet, NoiseSpec, StatisticalModel, encode,
                             lift_local_generators, pure_state)

SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0 + 0j, -1.0])


def ghz(u, v):
    return (np.kron(np.kron(u, u), u) + np.kron(np.kron(v, v), v)) / np.sqrt(2)


# GHZ states along z and along y, superposed
psi = ghz(np.array([1, 0]), np.array([0, 1])) + ghz(np.array([1, 1j]) / np.sqrt(2),
                                                     np.array([1, -1j]) / np.sqrt(2))
probe = pure_state(psi / np.linalg.norm(psi))
gens = lift_local_generators(GeneratorSet((SY, SZ)), 3)

for lam in (-0.3, -0.1, -0.01, 0.01, 0.1, 0.3, 0.6, 0.99):
    rep = holevo.r_figure(encode(StatisticalModel(probe, gens, NoiseSpec.local(lam, 3))),
                          include_identity_bound=False)
    print(f"lambda={lam:+.2f}  I={rep.incompat:.6f}  I*={rep.istar:.6f}  {rep.status}")

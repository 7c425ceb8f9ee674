"""Probes that make two noncommuting rotations jointly estimable."""
import numpy as np

from qincompat import designs
from qincompat.model import GeneratorSet, StatisticalModel, pure_state

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0 + 0j, -1.0])
gens = GeneratorSet((SY, SZ))
theta = [0.4, -0.7]

single = StatisticalModel(pure_state(np.array([1, 1]) / np.sqrt(2)), gens, theta=theta)
print("single qubit      ", designs.certify(single).as_dict())
print("ancilla           ", designs.certify(designs.ancilla_model(gens, theta)).as_dict())
print("double encoding   ", designs.certify(designs.double_model(gens, theta)).as_dict())
model, psi1, psi2 = designs.antiparallel_model(gens, theta)
print("anti-parallel     ", designs.certify(model, require_regular=False, run_sdp=False).as_dict())
w, V = np.linalg.eigh(SX)
print("basis product     ", designs.basis_product_compatibility([V[:, 0], V[:, 1]], gens, theta).as_dict())

"""
Gate records and batched circuit execution.

A circuit is a plain list of Gate objects applied left to right. Trainable
rotations carry the index of the parameter they read and the Pauli generator
P in exp(-i theta P / 2), which is all the reverse sweep needs.
"""
import core
import numpy as np
from dataclasses import dataclass

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
ZZ = np.kron(Z, Z)

PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}

CZ = np.diag([1, 1, 1, -1]).astype(complex)
CNOT = np.array([
    [1, 0, 0, 0],
    [0, 1, 0, 0],
    [0, 0, 0, 1],
    [0, 0, 1, 0],
], dtype=complex)

def _cswap_matrix():
    m = np.eye(8, dtype=complex)
    # control is the first target; swap |101> and |110>
    m[[5, 6]] = m[[6, 5]]
    return m

CSWAP = _cswap_matrix()

@dataclass(frozen=True, eq=False)
class Gate:
    name: str
    matrix: np.ndarray
    targets: tuple
    param: int = None
    generator: np.ndarray = None
    angle: float = 0.0

    @property
    def trainable(self) -> bool:
        return self.param is not None

    def dagger(self):
        return Gate(
            name=self.name,
            matrix=self.matrix.conj().T,
            targets=self.targets,
            generator=self.generator,
            angle=-self.angle,
        )

def rotation(generator: np.ndarray, theta: float) -> np.ndarray:
    """exp(-i theta P / 2) for an involutory P"""
    eye = np.eye(generator.shape[0], dtype=complex)
    return np.cos(theta / 2) * eye - 1j * np.sin(theta / 2) * generator

def rotation_batch(generator: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """(B, 2, 2) stack of rotations, one angle per row, for apply_matrix"""
    thetas = np.asarray(thetas, dtype=float)
    eye = np.eye(generator.shape[0], dtype=complex)
    return np.cos(thetas / 2)[:, None, None] * eye - 1j * np.sin(thetas / 2)[:, None, None] * generator

def _rot(name, generator, targets, theta, param):
    return Gate(name, rotation(generator, theta), tuple(targets), param, generator, float(theta))

def rx(q, theta, param=None):
    return _rot("rx", X, (q,), theta, param)

def ry(q, theta, param=None):
    return _rot("ry", Y, (q,), theta, param)

def rz(q, theta, param=None):
    return _rot("rz", Z, (q,), theta, param)

def rzz(a, b, theta, param=None):
    return _rot("rzz", ZZ, (a, b), theta, param)

def cz(a, b):
    return Gate("cz", CZ, (a, b))

def cnot(control, target):
    return Gate("cnot", CNOT, (control, target))

def pauli(name, q):
    return Gate(name.lower(), PAULIS[name.upper()], (q,))

def hadamard(q):
    return Gate("h", H, (q,))

def cswap(control, a, b):
    return Gate("cswap", CSWAP, (control, a, b))

def apply(vectors: np.ndarray, gates, n: int) -> np.ndarray:
    """run gates over one state (2**n,) or a batch (B, 2**n)"""
    out = vectors
    for gate in gates:
        out = core.qstate.apply_matrix(out, gate.matrix, gate.targets, n)
    return out

def run(state, gates):
    """Ket in, Ket out"""
    out = apply(state.amplitudes, gates, state.n_qubits)
    return core.qstate.Ket.from_vector(out, normalize=True)

def unitary(gates, n: int) -> np.ndarray:
    """dense matrix of the whole sequence, for small oracles"""
    columns = apply(np.eye(2 ** n, dtype=complex), gates, n)
    return columns.T

def inverse(gates):
    return [g.dagger() for g in reversed(gates)]

def check(gates, n: int):
    for gate in gates:
        core.qstate.check_targets(gate.targets, n)
        if not core.qstate.is_unitary(gate.matrix):
            raise core.errors.GateError(f"gate {gate.name} on {gate.targets} is not unitary")

def adjoint_gradient(gates, n: int, inputs: np.ndarray, costates: np.ndarray, n_params: int) -> np.ndarray:
    """
    Gradient of a real loss L with respect to every trainable angle.

    inputs are the states fed into the circuit, costates are dL/d(conj(chi))
    at the circuit outputs chi, both (B, 2**n). One forward pass, then one
    reverse sweep that un-applies each gate to the state and the costate.
    """
    grad = np.zeros(n_params)
    state = apply(np.atleast_2d(inputs), gates, n)
    lam = np.atleast_2d(costates).astype(complex, copy=True)

    for gate in reversed(gates):
        if gate.trainable:
            # d(gate)/d(theta) = (-i/2) P gate
            moved = core.qstate.apply_matrix(state, gate.generator, gate.targets, n)
            grad[gate.param] += 2.0 * np.real(np.sum(lam.conj() * (-0.5j) * moved))

        back = gate.matrix.conj().T
        state = core.qstate.apply_matrix(state, back, gate.targets, n)
        lam = core.qstate.apply_matrix(lam, back, gate.targets, n)

    return grad

class ChaosDiffError(Exception):
    """base class for everything the engine raises on purpose"""

class StateError(ChaosDiffError, ValueError):
    """a state vector breaks its invariants (length, norm, measured subset)"""

class DimensionError(ChaosDiffError, ValueError):
    """qubit counts of two objects don't line up"""

class GateError(ChaosDiffError, ValueError):
    """non-unitary gate, duplicate or out-of-range targets, wrong parameter count"""

class ConfigError(ChaosDiffError, ValueError):
    """experiment config failed validation. the message lists every problem found."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("invalid config:\n" + "\n".join(f"  - {p}" for p in self.problems))

class BundleError(ChaosDiffError, ValueError):
    """experiment bundle can't be written or read back"""

class TrainingError(ChaosDiffError, RuntimeError):
    """optimization produced a non-finite loss or gradient"""

    def __init__(self, msg, cycle=None, epoch=None, index=None):
        self.cycle = cycle
        self.epoch = epoch
        self.index = index
        where = []
        if cycle is not None:
            where.append(f"cycle {cycle}")
        if epoch is not None:
            where.append(f"epoch {epoch}")
        if index is not None:
            where.append(f"parameter {index}")
        if where:
            msg = f"{msg} ({', '.join(where)})"
        super().__init__(msg)

class NotCompressibleError(ChaosDiffError, ValueError):
    """trash qubits can't be projected onto |0...0>"""

class ChannelError(ChaosDiffError, ValueError):
    """noise channel is not completely positive and trace preserving, or a probability is out of range"""

from pcsyncbb.compare.backends import (
    CompareError,
    CorrelatedRandomness,
    IdealBackend,
    LocalTransport,
    MaskedBits,
    MpcBackend,
    OnlineStats,
    TrustedDealer,
    ideal_compare,
    offline_phase,
    online_phase,
    online_phase_batch,
)
from pcsyncbb.compare.circuit import ComparisonCircuit, Gate, bitslice, build_circuit

__all__ = [
    "CompareError",
    "ComparisonCircuit",
    "CorrelatedRandomness",
    "Gate",
    "IdealBackend",
    "LocalTransport",
    "MaskedBits",
    "MpcBackend",
    "OnlineStats",
    "TrustedDealer",
    "bitslice",
    "build_circuit",
    "ideal_compare",
    "offline_phase",
    "online_phase",
    "online_phase_batch",
]

from pcsyncbb.crypto.indicator import EncIndicatorVector, build_indicator_vectors
from pcsyncbb.crypto.paillier import (
    Ciphertext,
    KeyMismatchError,
    PaillierContext,
    PaillierPrivateKey,
    PaillierPublicKey,
    hom_add,
    keygen,
    scalar_exp,
)
from pcsyncbb.crypto.sharing import (
    share_reconstruct,
    share_split,
    xor_reconstruct,
    xor_split,
)

__all__ = [
    "Ciphertext",
    "EncIndicatorVector",
    "KeyMismatchError",
    "PaillierContext",
    "PaillierPrivateKey",
    "PaillierPublicKey",
    "build_indicator_vectors",
    "hom_add",
    "keygen",
    "scalar_exp",
    "share_reconstruct",
    "share_split",
    "xor_reconstruct",
    "xor_split",
]

"""NOINS: non-interactive self-generation of unlinkable short-term V2X certificates.

The CA issues one sanitizable implicit certificate per vehicle credential;
the vehicle turns it into up to ``n_cs`` pseudonyms on its own, each with a
re-randomized sanitization key and a proof that the re-randomization is
honest.  SIMPL and explicit-certificate baselines share the same group,
wire and cost-model code.
"""

from .ca import CertificateAuthority, issue_explicit, issue_noins, issue_simpl, unwrap_i2v, wrap_i2v
from .errors import (
    DecryptionError,
    FormatError,
    InvalidCredential,
    IssuanceError,
    NoinsError,
    PolicyError,
)
from .group import SECP256K1, TOY, get_group
from .vehicle import (
    CaCredential,
    GenerationPolicy,
    PseudonymGenerator,
    ShortTermBundle,
    accept_credential,
    gen_short_term,
    sign_v2x,
)
from .verification import Reason, TrustStore, Verdict, verify_v2x

__version__ = "1.0.0"

__all__ = [
    "CaCredential",
    "CertificateAuthority",
    "DecryptionError",
    "FormatError",
    "GenerationPolicy",
    "InvalidCredential",
    "IssuanceError",
    "NoinsError",
    "PolicyError",
    "PseudonymGenerator",
    "Reason",
    "SECP256K1",
    "ShortTermBundle",
    "TOY",
    "TrustStore",
    "Verdict",
    "accept_credential",
    "gen_short_term",
    "get_group",
    "issue_explicit",
    "issue_noins",
    "issue_simpl",
    "sign_v2x",
    "unwrap_i2v",
    "verify_v2x",
    "wrap_i2v",
]

"""Decoy-based bit commitment protocols."""

from .closed_form import (
    ConcealingReport,
    concealing_bounds,
    concealing_closed_form,
    guess_one_position,
    majority_vote_exact,
    majority_vote_pbc,
    miss_probability,
)
from .machine import (
    Kind,
    ProtocolConfig,
    ProtocolError,
    Session,
    Transcript,
    protocol_commit,
    protocol_open,
    protocol_verify,
)
from .strategies import ADAM_STRATEGIES, BABE_STRATEGIES, make_adam, make_babe

__all__ = [
    "ADAM_STRATEGIES",
    "BABE_STRATEGIES",
    "ConcealingReport",
    "Kind",
    "ProtocolConfig",
    "ProtocolError",
    "Session",
    "Transcript",
    "concealing_bounds",
    "concealing_closed_form",
    "guess_one_position",
    "majority_vote_exact",
    "majority_vote_pbc",
    "make_adam",
    "make_babe",
    "miss_probability",
    "protocol_commit",
    "protocol_open",
    "protocol_verify",
]

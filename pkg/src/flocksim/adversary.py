"""Adversary strategies and population assignment.

Proposer strategies decide what a selected proposer submits (or that it
stays silent); voter strategies transform the honestly computed score into
the score actually cast.  Both are pure decision functions: all randomness
comes in through an explicit numpy Generator, so behaviour is reproducible.

A population assignment marks the first floor(l_p * N) nodes (in sorted id
order) as malicious proposers and the first floor(l_v * N) as malicious
voters.  Using the same prefix for both roles means the malicious sets
overlap, which mirrors an attacker controlling whole nodes rather than
single roles.  Collusion groups additionally make member voters approve
any round in which a member proposer was selected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .modelplane import ParamVector, quantize
from .task import ClientDataset, TaskSpec, honest_train


class AdversaryError(ValueError):
    """Raised on invalid strategy parameters or assignments."""


# --- proposer strategies ---------------------------------------------------

@dataclass(frozen=True)
class HonestProposer:
    kind = "honest"


@dataclass(frozen=True)
class GaussianNoise:
    kind = "gaussian_noise"
    sigma_a: float = 1.0

    def __post_init__(self):
        if not (self.sigma_a > 0 and np.isfinite(self.sigma_a)):
            raise AdversaryError(f"sigma_a must be positive, got {self.sigma_a}")


@dataclass(frozen=True)
class SignFlip:
    kind = "sign_flip"
    lam: float = 1.0

    def __post_init__(self):
        if not (self.lam > 0 and np.isfinite(self.lam)):
            raise AdversaryError(f"lam must be positive, got {self.lam}")


@dataclass(frozen=True)
class LabelFlip:
    kind = "label_flip"


@dataclass(frozen=True)
class StaleDuplicate:
    kind = "stale_duplicate"


@dataclass(frozen=True)
class Dropout:
    kind = "dropout"


# --- voter strategies ------------------------------------------------------

@dataclass(frozen=True)
class HonestVoter:
    kind = "honest"


@dataclass(frozen=True)
class Inverter:
    kind = "inverter"


@dataclass(frozen=True)
class AlwaysApprove:
    kind = "always_approve"


@dataclass(frozen=True)
class AlwaysReject:
    kind = "always_reject"


@dataclass(frozen=True)
class Abstain:
    kind = "abstain"


PROPOSER_KINDS = {
    "honest": HonestProposer,
    "gaussian_noise": GaussianNoise,
    "sign_flip": SignFlip,
    "label_flip": LabelFlip,
    "stale_duplicate": StaleDuplicate,
    "dropout": Dropout,
}

VOTER_KINDS = {
    "honest": HonestVoter,
    "inverter": Inverter,
    "always_approve": AlwaysApprove,
    "always_reject": AlwaysReject,
    "abstain": Abstain,
}


def propose(strategy, global_params: ParamVector,
            prev_global_params: ParamVector, data: ClientDataset,
            task: TaskSpec, rng: np.random.Generator) -> Optional[ParamVector]:
    """Produce a submission for one selected proposer, or None for silence."""
    if isinstance(strategy, HonestProposer):
        return honest_train(global_params, data, task)
    if isinstance(strategy, GaussianNoise):
        noise = quantize(rng.normal(0.0, strategy.sigma_a, global_params.dim))
        return ParamVector(global_params.values + noise.values)
    if isinstance(strategy, SignFlip):
        honest = honest_train(global_params, data, task)
        diff = honest.values - global_params.values
        # Same rounding as quantization; lam == 1 gives exactly 2g - honest.
        scaled = np.floor(strategy.lam * diff + 0.5).astype(np.int64)
        return ParamVector(global_params.values - scaled)
    if isinstance(strategy, LabelFlip):
        flipped = ClientDataset(data.features, -data.targets, data.role)
        return honest_train(global_params, flipped, task)
    if isinstance(strategy, StaleDuplicate):
        return prev_global_params
    if isinstance(strategy, Dropout):
        return None
    raise AdversaryError(f"unknown proposer strategy: {strategy!r}")


def cast_vote(strategy, honest_score: float,
              colluding_round: bool) -> Optional[float]:
    """Transform the honestly computed score into the score actually cast.

    The collusion override fires before the strategy: any voter whose group
    had a proposer selected this round approves outright.
    """
    if colluding_round:
        return 1.0
    if isinstance(strategy, HonestVoter):
        return honest_score
    if isinstance(strategy, Inverter):
        return -honest_score
    if isinstance(strategy, AlwaysApprove):
        return 1.0
    if isinstance(strategy, AlwaysReject):
        return -1.0
    if isinstance(strategy, Abstain):
        return None
    raise AdversaryError(f"unknown voter strategy: {strategy!r}")


# --- population assignment -------------------------------------------------

@dataclass(frozen=True)
class AdversarySpec:
    l_p: float = 0.0
    l_v: float = 0.0
    proposer_strategy: object = field(default_factory=SignFlip)
    voter_strategy: object = field(default_factory=Inverter)
    proposer_overrides: dict = field(default_factory=dict)  # id -> strategy
    voter_overrides: dict = field(default_factory=dict)
    collusion_groups: tuple = ()  # tuple of frozensets of ids

    def validate(self) -> None:
        for name, frac in (("l_p", self.l_p), ("l_v", self.l_v)):
            if not (0.0 <= frac <= 1.0):
                raise AdversaryError(f"{name} must be in [0, 1], got {frac}")


@dataclass(frozen=True)
class Assignment:
    proposer_strategies: dict  # id -> proposer strategy
    voter_strategies: dict     # id -> voter strategy
    collusion_groups: tuple
    colluders: frozenset

    def proposer_class(self, node_id: str) -> str:
        mal = not isinstance(self.proposer_strategies[node_id], HonestProposer)
        return "malicious" if mal or node_id in self.colluders else "honest"

    def voter_class(self, node_id: str) -> str:
        mal = not isinstance(self.voter_strategies[node_id], HonestVoter)
        return "malicious" if mal or node_id in self.colluders else "honest"

    def node_class(self, node_id: str) -> str:
        """A node is malicious if it misbehaves in either role."""
        if (self.proposer_class(node_id) == "malicious"
                or self.voter_class(node_id) == "malicious"):
            return "malicious"
        return "honest"


def assign_strategies(spec: AdversarySpec, node_ids: list) -> Assignment:
    """Assign per-node strategies; the malicious prefix is sorted-id order."""
    spec.validate()
    ordered = sorted(node_ids)
    id_set = set(ordered)
    n = len(ordered)
    n_mal_p = int(np.floor(spec.l_p * n))
    n_mal_v = int(np.floor(spec.l_v * n))

    proposer = {nid: HonestProposer() for nid in ordered}
    for nid in ordered[:n_mal_p]:
        proposer[nid] = spec.proposer_strategy
    voter = {nid: HonestVoter() for nid in ordered}
    for nid in ordered[:n_mal_v]:
        voter[nid] = spec.voter_strategy

    for nid, strat in spec.proposer_overrides.items():
        if nid not in id_set:
            raise AdversaryError(f"proposer override for unknown id: {nid!r}")
        proposer[nid] = strat
    for nid, strat in spec.voter_overrides.items():
        if nid not in id_set:
            raise AdversaryError(f"voter override for unknown id: {nid!r}")
        voter[nid] = strat

    groups = []
    members = set()
    for group in spec.collusion_groups:
        fs = frozenset(group)
        unknown = fs - id_set
        if unknown:
            raise AdversaryError(f"collusion group has unknown ids: {sorted(unknown)}")
        groups.append(fs)
        members |= fs

    return Assignment(proposer, voter, tuple(groups), frozenset(members))

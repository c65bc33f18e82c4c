"""Training-phase state machine: sortition, submission, aggregation,
committee voting, and reward/slash settlement.

One call to ``run_round`` executes a full training phase against the
current ledger and global model:

  1. sortition: N_p proposers, then N_v voters, sampled without
     replacement from the eligible set (stake >= min_stake),
  2. submission: each proposer's strategy produces a parameter vector or
     stays silent,
  3. aggregation: exact integer mean of received submissions, plus a
     miner validity vote that recomputes and compares bit for bit,
  4. committee voting: each voter scores the published model against the
     current one on its own test set, the tally accepts iff the approval
     count reaches T,
  5. settlement: rewards are minted and slashes burned according to the
     vote outcome, scaled by each participant's stake.

Rounds that cannot complete (too few eligible nodes, zero submissions,
failed validity vote) abort with an explicit status; the previous global
model is retained.  Silent proposers are slashed for unresponsiveness even
when the round aborts, since their silence is what aborted it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .adversary import cast_vote, propose
from .ledger import Ledger
from .modelplane import ParamVector, fedavg, validity_vote
from .seeds import Splitmix64Stream, sample_without_replacement
from .task import TaskSpec

STATUS_COMPLETED = "completed"
STATUS_ABORTED_ELIGIBLE = "aborted_insufficient_eligible"
STATUS_ABORTED_NO_SUBMISSIONS = "aborted_no_submissions"
STATUS_ABORTED_INVALID = "aborted_invalid_aggregation"


class EngineError(ValueError):
    """Raised on invalid protocol parameters or malformed inputs."""


@dataclass(frozen=True)
class ProtocolParams:
    alpha: float = 0.05
    beta: float = 0.10
    T: int = 11
    N_p: int = 10
    N_v: int = 20
    min_stake: int = 100
    kappa_timeout: float = 0.5
    rho: float = 0.0005
    n_miners: int = 3
    voting_enabled: bool = True

    def validate(self) -> None:
        if self.alpha < 0:
            raise EngineError(f"alpha must be >= 0, got {self.alpha}")
        if self.beta < 0:
            raise EngineError(f"beta must be >= 0, got {self.beta}")
        if self.N_p < 1:
            raise EngineError(f"N_p must be >= 1, got {self.N_p}")
        if self.N_v < 1:
            raise EngineError(f"N_v must be >= 1, got {self.N_v}")
        if not (1 <= self.T <= self.N_v):
            raise EngineError(f"T must be in [1, N_v={self.N_v}], got {self.T}")
        if self.min_stake < 0:
            raise EngineError(f"min_stake must be >= 0, got {self.min_stake}")
        if not (0.0 <= self.kappa_timeout <= 1.0):
            raise EngineError(
                f"kappa_timeout must be in [0, 1], got {self.kappa_timeout}")
        if not (self.rho > 0):
            raise EngineError(f"rho must be > 0, got {self.rho}")
        if self.n_miners < 1:
            raise EngineError(f"n_miners must be >= 1, got {self.n_miners}")


@dataclass(frozen=True)
class Vote:
    voter_id: str
    score: Optional[float]  # None when the voter stayed silent

    def __post_init__(self):
        if self.score is not None and not (-1.0 <= self.score <= 1.0):
            raise EngineError(f"vote score out of [-1, 1]: {self.score}")

    @property
    def direction(self) -> Optional[bool]:
        """approve iff score > 0; None when silent."""
        if self.score is None:
            return None
        return self.score > 0


@dataclass(frozen=True)
class TallyResult:
    approvals: int
    aggregate_score: float  # S, mean over all voter slots, silence -> 0
    accepted: bool


@dataclass
class RoundRecord:
    round: int
    status: str
    proposers: list
    voters: list
    submissions: dict          # proposer id -> ParamVector or None
    published: Optional[ParamVector]
    valid: Optional[bool]
    votes: list                # list of Vote, empty when voting skipped
    tally: Optional[TallyResult]
    deltas: dict               # id -> applied token delta
    resulting: ParamVector     # global after the round (new or retained)
    stakes: dict = field(default_factory=dict)  # post-round balances


@dataclass
class EngineState:
    """Mutable simulation state threaded through rounds (single writer)."""
    ledger: Ledger
    global_params: ParamVector
    prev_global_params: ParamVector


def select_participants(eligible: list, params: ProtocolParams,
                        round_seed: int) -> tuple:
    """Sample N_p proposers, then N_v voters from the remainder."""
    need = params.N_p + params.N_v
    if len(eligible) < need:
        raise EngineError(
            f"need {need} eligible nodes, have {len(eligible)}")
    stream = Splitmix64Stream(round_seed)
    proposers = sample_without_replacement(eligible, params.N_p, stream)
    chosen = set(proposers)
    remainder = [e for e in eligible if e not in chosen]
    voters = sample_without_replacement(remainder, params.N_v, stream)
    return proposers, voters


def score_vote(m_new: float, m_old: float, rho: float) -> float:
    """Relative metric change, normalized by rho and clamped to [-1, 1]."""
    if not (math.isfinite(m_new) and math.isfinite(m_old)):
        raise EngineError(f"non-finite metrics: m_new={m_new}, m_old={m_old}")
    if not rho > 0:
        raise EngineError(f"rho must be > 0, got {rho}")
    raw = (m_new - m_old) / (rho * (abs(m_old) + 1e-8))
    return max(-1.0, min(1.0, raw))


def tally(votes: list, params: ProtocolParams) -> TallyResult:
    """Count approvals against T; S averages scores with silence as 0."""
    if len(votes) != params.N_v:
        raise EngineError(f"expected {params.N_v} vote slots, got {len(votes)}")
    approvals = sum(1 for v in votes if v.score is not None and v.score > 0)
    total = sum(v.score for v in votes if v.score is not None)
    aggregate = total / params.N_v
    return TallyResult(approvals, aggregate, approvals >= params.T)


def settle(tally_result: TallyResult, votes: list, proposers: list,
           voters: list, responsive: set, ledger: Ledger,
           params: ProtocolParams) -> dict:
    """Token deltas for every selected participant.

    Responsive proposers share the round outcome: reward scales with
    max(S, 0) when accepted, slash with max(-S, 0) when rejected.  Voters
    are scored individually by agreement with the outcome and closeness to
    S.  Silent participants lose a kappa_timeout fraction of their stake.
    Magnitudes floor before the sign is applied.
    """
    S = tally_result.aggregate_score
    deltas = {}
    for pid in proposers:
        stake = ledger.staked(pid)
        if pid not in responsive:
            deltas[pid] = -math.floor(params.beta * params.kappa_timeout * stake)
        elif tally_result.accepted:
            deltas[pid] = math.floor(params.alpha * max(S, 0.0) * stake)
        else:
            deltas[pid] = -math.floor(params.beta * max(-S, 0.0) * stake)
    by_voter = {v.voter_id: v for v in votes}
    for vid in voters:
        stake = ledger.staked(vid)
        vote = by_voter[vid]
        if vote.score is None:
            deltas[vid] = -math.floor(params.beta * params.kappa_timeout * stake)
            continue
        gap = abs(vote.score - S) / 2.0
        matched = (vote.score > 0) == tally_result.accepted
        if matched:
            deltas[vid] = math.floor(params.alpha * (1.0 - gap) * stake)
        else:
            deltas[vid] = -math.floor(params.beta * gap * stake)
    return deltas


def _timeout_deltas(proposers: list, voters: list, responsive: set,
                    ledger: Ledger, params: ProtocolParams) -> dict:
    """Deltas for aborted rounds: silent proposers slashed, others zero."""
    deltas = {}
    for pid in proposers:
        if pid in responsive:
            deltas[pid] = 0
        else:
            stake = ledger.staked(pid)
            deltas[pid] = -math.floor(params.beta * params.kappa_timeout * stake)
    for vid in voters:
        deltas[vid] = 0
    return deltas


def run_round(state: EngineState, population, task: TaskSpec,
              params: ProtocolParams, round_index: int,
              round_seed: int) -> RoundRecord:
    """Execute one training phase, mutating state, and return its record."""
    params.validate()
    ledger = state.ledger
    start_global = state.global_params

    def finish(record: RoundRecord) -> RoundRecord:
        record.stakes = dict(ledger.accounts)
        state.prev_global_params = start_global
        return record

    eligible = ledger.eligible_set(params.min_stake)
    if len(eligible) < params.N_p + params.N_v:
        return finish(RoundRecord(
            round=round_index, status=STATUS_ABORTED_ELIGIBLE,
            proposers=[], voters=[], submissions={}, published=None,
            valid=None, votes=[], tally=None, deltas={},
            resulting=start_global))

    proposers, voters = select_participants(eligible, params, round_seed)

    submissions = {}
    for pid in proposers:
        strategy = population.proposer_strategy(pid)
        rng = population.adversary_rng(pid, round_index)
        submissions[pid] = propose(
            strategy, start_global, state.prev_global_params,
            population.train_data(pid), task, rng)
    responsive = {pid for pid in proposers if submissions[pid] is not None}
    received = [submissions[pid] for pid in proposers if pid in responsive]

    if not received:
        deltas = _timeout_deltas(proposers, voters, responsive, ledger, params)
        applied = ledger.apply_deltas(deltas, round_index)
        return finish(RoundRecord(
            round=round_index, status=STATUS_ABORTED_NO_SUBMISSIONS,
            proposers=proposers, voters=voters, submissions=submissions,
            published=None, valid=None, votes=[], tally=None,
            deltas=applied, resulting=start_global))

    published = fedavg(received)
    valid = validity_vote(received, published, params.n_miners)
    if not valid:
        deltas = _timeout_deltas(proposers, voters, responsive, ledger, params)
        applied = ledger.apply_deltas(deltas, round_index)
        return finish(RoundRecord(
            round=round_index, status=STATUS_ABORTED_INVALID,
            proposers=proposers, voters=voters, submissions=submissions,
            published=published, valid=False, votes=[], tally=None,
            deltas=applied, resulting=start_global))

    if params.voting_enabled:
        votes = []
        for vid in voters:
            m_old = population.metric(vid, start_global)
            m_new = population.metric(vid, published)
            honest_score = score_vote(m_new, m_old, params.rho)
            colluding = population.is_colluding_round(vid, proposers)
            cast = cast_vote(population.voter_strategy(vid), honest_score,
                             colluding)
            votes.append(Vote(vid, cast))
        tally_result = tally(votes, params)
        deltas = settle(tally_result, votes, proposers, voters, responsive,
                        ledger, params)
        applied = ledger.apply_deltas(deltas, round_index)
        accepted = tally_result.accepted
    else:
        # Baseline without committee voting: every valid aggregation is
        # adopted and no tokens move.
        votes = []
        tally_result = None
        applied = ledger.apply_deltas(
            {nid: 0 for nid in list(proposers) + list(voters)}, round_index)
        accepted = True

    if accepted:
        state.global_params = published
    return finish(RoundRecord(
        round=round_index, status=STATUS_COMPLETED, proposers=proposers,
        voters=voters, submissions=submissions, published=published,
        valid=valid, votes=votes, tally=tally_result, deltas=applied,
        resulting=state.global_params))

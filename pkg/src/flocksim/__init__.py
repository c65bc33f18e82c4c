"""Deterministic simulator for a stake-based federated learning protocol.

The package models a blockchain-governed training loop: staked nodes are
sortition-selected to propose local model updates, an exact integer
aggregation publishes the new global model, a voting committee scores it,
and stake-scaled rewards and slashes settle on a conserving token ledger.
A Monte Carlo harness estimates expected participant returns per role and
honesty class across adversary mixes and protocol parameters.
"""

from .adversary import (Abstain, AdversarySpec, AlwaysApprove, AlwaysReject,
                        Dropout, GaussianNoise, HonestProposer, HonestVoter,
                        Inverter, LabelFlip, SignFlip, StaleDuplicate,
                        assign_strategies, cast_vote, propose)
from .engine import (EngineState, ProtocolParams, RoundRecord, TallyResult,
                     Vote, run_round, score_vote, select_participants,
                     settle, tally)
from .harness import (ReturnEstimate, SimConfig, SimResult, defense_pair,
                      estimate_expected_return, eviction_curve,
                      figure2_sweep, run_simulation, run_single_seed, sweep,
                      sweep_rows)
from .ledger import Ledger, LedgerError
from .modelplane import (AggregationResult, ModelPlaneError, ParamVector,
                         dequantize, fedavg, quantize, validity_vote, zeros)
from .task import (ClientDataset, TaskSpec, evaluate, generate_client_data,
                   honest_train, make_true_weights)

__version__ = "0.1.0"

"""Monte Carlo driver: multi-round, multi-seed simulation and estimation.

A simulation runs ``rounds`` training phases for each of ``n_seeds``
independent seeds.  Expected returns are estimated per (role, honesty)
class from per-selected-round token deltas normalized by the participant's
stake at round start (conditioning on selection).  The pooled mean is
reported with a standard error computed across per-seed means (normal
approximation, 95% CI = 1.96 * SE), which respects the within-seed
correlation of samples.

Sweeps rerun the simulation per grid point with the same base seeds, so
grid points differing only in alpha/beta share selections, submissions,
and votes (common random numbers): settlement is the only divergence until
stake trajectories drift apart through eligibility.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

from .adversary import AdversarySpec, Assignment, assign_strategies
from .engine import (EngineState, ProtocolParams, RoundRecord,
                     STATUS_COMPLETED, run_round)
from .ledger import Ledger
from .modelplane import ParamVector, zeros
from .seeds import (ROLE_TAG_TEST, ROLE_TAG_TRAIN, TAG_ADV, TAG_DATA,
                    TAG_ORACLE, TAG_ROUND, TAG_RUN, TAG_WSTAR, derive,
                    numpy_rng)
from .task import (ClientDataset, TaskSpec, evaluate, generate_client_data,
                   make_true_weights)

ORACLE_TEST_N = 1024

GRID_AXES = ("alpha", "beta", "T", "l_p", "l_v")
CLASS_KEYS = (("proposer", "honest"), ("proposer", "malicious"),
              ("voter", "honest"), ("voter", "malicious"))
CSV_HEADER = ("alpha,beta,T,N,N_p,N_v,l_p,l_v,role,honesty,"
              "mean_return,std_err,ci95,samples")


class HarnessError(ValueError):
    """Raised on invalid simulation configuration or grid specs."""


@dataclass(frozen=True)
class SimConfig:
    n_nodes: int = 100
    initial_stake: int = 600
    rounds: int = 200
    n_seeds: int = 20
    seed_base: int = 42
    protocol: ProtocolParams = field(default_factory=ProtocolParams)
    task: TaskSpec = field(default_factory=TaskSpec)
    # Headline configuration is adversarial: 30% SignFlip / Inverter nodes.
    adversary: AdversarySpec = field(
        default_factory=lambda: AdversarySpec(l_p=0.3, l_v=0.3))
    true_weights: Optional[tuple] = None

    def validate(self) -> None:
        self.protocol.validate()
        self.task.validate()
        self.adversary.validate()
        need = self.protocol.N_p + self.protocol.N_v
        if self.n_nodes < need:
            raise HarnessError(
                f"n_nodes must be >= N_p + N_v = {need}, got {self.n_nodes}")
        if self.rounds < 1:
            raise HarnessError(f"rounds must be >= 1, got {self.rounds}")
        if self.n_seeds < 1:
            raise HarnessError(f"n_seeds must be >= 1, got {self.n_seeds}")
        if self.initial_stake <= 0:
            raise HarnessError(
                f"initial_stake must be positive, got {self.initial_stake}")
        if not (0 <= self.seed_base < (1 << 64)):
            raise HarnessError("seed_base must fit in 64 bits")


def make_node_ids(n: int) -> list:
    width = max(3, len(str(max(n - 1, 0))))
    return [f"n{i:0{width}d}" for i in range(n)]


class Population:
    """Per-run view of the node population: strategies, data, metrics.

    Datasets are generated lazily and cached; metric values (-MSE on the
    node's own test set) are cached per parameter vector since the global
    model only changes on accepted rounds.
    """

    def __init__(self, config: SimConfig, run_seed: int):
        self.config = config
        self.run_seed = run_seed
        self.node_ids = make_node_ids(config.n_nodes)
        self._index = {nid: i for i, nid in enumerate(self.node_ids)}
        self.assignment: Assignment = assign_strategies(
            config.adversary, self.node_ids)
        self.w_star = make_true_weights(
            config.task, derive(run_seed, TAG_WSTAR),
            list(config.true_weights) if config.true_weights else None)
        self._train = {}
        self._test = {}
        self._metric_cache = {}
        self._oracle = None

    def train_data(self, node_id: str) -> ClientDataset:
        if node_id not in self._train:
            seed = derive(self.run_seed, TAG_DATA, self._index[node_id],
                          ROLE_TAG_TRAIN)
            self._train[node_id] = generate_client_data(
                self.config.task, self.w_star, seed, "train")
        return self._train[node_id]

    def test_data(self, node_id: str) -> ClientDataset:
        if node_id not in self._test:
            seed = derive(self.run_seed, TAG_DATA, self._index[node_id],
                          ROLE_TAG_TEST)
            self._test[node_id] = generate_client_data(
                self.config.task, self.w_star, seed, "test")
        return self._test[node_id]

    def oracle_data(self) -> ClientDataset:
        if self._oracle is None:
            seed = derive(self.run_seed, TAG_ORACLE)
            self._oracle = generate_client_data(
                self.config.task, self.w_star, seed, "test", n=ORACLE_TEST_N)
        return self._oracle

    def metric(self, node_id: str, params: ParamVector) -> float:
        key = (node_id, params.values.tobytes())
        if key not in self._metric_cache:
            self._metric_cache[key] = -evaluate(params, self.test_data(node_id))
        return self._metric_cache[key]

    def adversary_rng(self, node_id: str, round_index: int):
        return numpy_rng(derive(self.run_seed, TAG_ADV, round_index,
                                self._index[node_id]))

    def proposer_strategy(self, node_id: str):
        return self.assignment.proposer_strategies[node_id]

    def voter_strategy(self, node_id: str):
        return self.assignment.voter_strategies[node_id]

    def is_colluding_round(self, voter_id: str, proposers: list) -> bool:
        if voter_id not in self.assignment.colluders:
            return False
        pset = set(proposers)
        return any(voter_id in group and group & pset
                   for group in self.assignment.collusion_groups)


@dataclass
class RunResult:
    seed_index: int
    run_seed: int
    records: list
    ledger: Ledger
    population: Population
    final_global: ParamVector
    oracle_mse: float


@dataclass(frozen=True)
class ReturnEstimate:
    role: str
    honesty: str
    mean_return: float  # nan when the class was never selected
    std_err: float      # nan with fewer than two contributing seeds
    ci95: float
    samples: int
    seed_means: tuple = ()

    @property
    def has_data(self) -> bool:
        return self.samples > 0


@dataclass
class SimResult:
    config: SimConfig
    runs: list  # empty when produced with keep_runs=False
    estimates: dict  # (role, honesty) -> ReturnEstimate
    all_rounds_aborted: bool


def run_single_seed(config: SimConfig, seed_index: int) -> RunResult:
    config.validate()
    run_seed = derive(config.seed_base, TAG_RUN, seed_index)
    pop = Population(config, run_seed)
    ledger = Ledger()
    for nid in pop.node_ids:
        ledger.stake(nid, config.initial_stake, round_index=-1)
    w0 = zeros(config.task.dim)
    state = EngineState(ledger, w0, w0)
    records = []
    for r in range(config.rounds):
        round_seed = derive(run_seed, TAG_ROUND, r)
        records.append(run_round(state, pop, config.task, config.protocol,
                                 r, round_seed))
    if not ledger.conservation_check():
        raise HarnessError(f"token conservation violated in seed {seed_index}")
    oracle_mse = evaluate(state.global_params, pop.oracle_data())
    return RunResult(seed_index, run_seed, records, ledger, pop,
                     state.global_params, oracle_mse)


def run_simulation(config: SimConfig, keep_runs: bool = True) -> SimResult:
    """Run all seeds and pool the per-class return estimates.

    With keep_runs=False each seed's records and datasets are released as
    soon as its samples are folded in; a run retains roughly 10 MB per
    seed otherwise, which adds up fast across sweep grids.  The estimates
    are identical either way.
    """
    runs = []
    per_class = {key: [] for key in CLASS_KEYS}
    any_completed = False
    for i in range(config.n_seeds):
        run = run_single_seed(config, i)
        for key, per_seed in per_class.items():
            per_seed.append(class_samples(
                run.records, run.population.assignment, *key))
        if any(rec.status == STATUS_COMPLETED for rec in run.records):
            any_completed = True
        if keep_runs:
            runs.append(run)
    estimates = {key: estimate_from_samples(per_seed, *key)
                 for key, per_seed in per_class.items()}
    return SimResult(config, runs, estimates, not any_completed)


# --- return estimation -------------------------------------------------------


def stake_before(record: RoundRecord, node_id: str) -> int:
    """Stake at round start, recovered from the post-round snapshot."""
    return record.stakes[node_id] - record.deltas[node_id]


def class_samples(records: list, assignment: Assignment, role: str,
                  honesty: str) -> list:
    """Stake-normalized deltas for every selection of the class, in order."""
    if role not in ("proposer", "voter"):
        raise HarnessError(f"unknown role: {role!r}")
    if honesty not in ("honest", "malicious"):
        raise HarnessError(f"unknown honesty class: {honesty!r}")
    samples = []
    for rec in records:
        ids = rec.proposers if role == "proposer" else rec.voters
        for nid in ids:
            if nid not in rec.deltas:
                continue
            cls = (assignment.proposer_class(nid) if role == "proposer"
                   else assignment.voter_class(nid))
            if cls != honesty:
                continue
            before = stake_before(rec, nid)
            if before > 0:
                samples.append(rec.deltas[nid] / before)
    return samples


def estimate_from_samples(per_seed: list, role: str,
                          honesty: str) -> ReturnEstimate:
    """Pooled mean with an across-seed standard error.

    Sums use math.fsum, so the estimate is bit-identical no matter how the
    records were ordered when the samples were collected.
    """
    pooled = [s for seed_samples in per_seed for s in seed_samples]
    if not pooled:
        return ReturnEstimate(role, honesty, math.nan, math.nan, math.nan, 0)
    mean = math.fsum(pooled) / len(pooled)
    seed_means = tuple(math.fsum(ss) / len(ss) for ss in per_seed if ss)
    if len(seed_means) >= 2:
        grand = math.fsum(seed_means) / len(seed_means)
        var = (math.fsum((m - grand) ** 2 for m in seed_means)
               / (len(seed_means) - 1))
        se = math.sqrt(var / len(seed_means))
    else:
        se = math.nan
    return ReturnEstimate(role, honesty, mean, se, 1.96 * se, len(pooled),
                          seed_means)


def estimate_expected_return(runs: list, role: str,
                             honesty: str) -> ReturnEstimate:
    per_seed = [class_samples(run.records, run.population.assignment, role,
                              honesty) for run in runs]
    return estimate_from_samples(per_seed, role, honesty)


def estimate_returns(runs: list) -> dict:
    return {key: estimate_expected_return(runs, *key) for key in CLASS_KEYS}


# --- sweeps ------------------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    overrides: dict     # axis name -> value for this grid point
    result: SimResult


def apply_grid_point(config: SimConfig, point: dict) -> SimConfig:
    protocol = config.protocol
    adversary = config.adversary
    proto_kwargs = {}
    adv_kwargs = {}
    for name, value in point.items():
        if name in ("alpha", "beta", "T"):
            proto_kwargs[name] = value
        elif name in ("l_p", "l_v"):
            adv_kwargs[name] = value
        else:
            raise HarnessError(f"unknown grid axis: {name!r}")
    if proto_kwargs:
        protocol = dataclasses.replace(protocol, **proto_kwargs)
    if adv_kwargs:
        adversary = dataclasses.replace(adversary, **adv_kwargs)
    return dataclasses.replace(config, protocol=protocol, adversary=adversary)


def sweep(config: SimConfig, grid: dict, keep_runs: bool = True) -> list:
    """One simulation per grid point, same base seeds everywhere (CRN)."""
    if not grid:
        raise HarnessError("grid must define at least one axis")
    for name, values in grid.items():
        if name not in GRID_AXES:
            raise HarnessError(f"unknown grid axis: {name!r}")
        if not values:
            raise HarnessError(f"grid axis {name!r} has no values")
    axes = [name for name in GRID_AXES if name in grid]
    points = []
    for combo in itertools.product(*(grid[name] for name in axes)):
        point = dict(zip(axes, combo))
        result = run_simulation(apply_grid_point(config, point),
                                keep_runs=keep_runs)
        points.append(SweepPoint(point, result))
    return points


def sweep_rows(points: list) -> list:
    """Flatten sweep results into CSV-schema dicts, grid order preserved."""
    rows = []
    for sp in points:
        cfg = sp.result.config
        for role in ("proposer", "voter"):
            for honesty in ("honest", "malicious"):
                est = sp.result.estimates[(role, honesty)]
                rows.append({
                    "alpha": cfg.protocol.alpha,
                    "beta": cfg.protocol.beta,
                    "T": cfg.protocol.T,
                    "N": cfg.n_nodes,
                    "N_p": cfg.protocol.N_p,
                    "N_v": cfg.protocol.N_v,
                    "l_p": cfg.adversary.l_p,
                    "l_v": cfg.adversary.l_v,
                    "role": role,
                    "honesty": honesty,
                    "mean_return": est.mean_return,
                    "std_err": est.std_err,
                    "ci95": est.ci95,
                    "samples": est.samples,
                })
    return rows


FIGURE2_LP_VALUES = (0.0, 0.1, 0.2, 0.3, 0.4)


def figure2_sweep(config: SimConfig, l_v_values: Optional[list] = None,
                  keep_runs: bool = True) -> list:
    """Returns-vs-l_p dataset, one curve per l_v value."""
    grid = {"l_p": list(FIGURE2_LP_VALUES)}
    if l_v_values is not None:
        grid["l_v"] = list(l_v_values)
    return sweep(config, grid, keep_runs=keep_runs)


# --- eviction ----------------------------------------------------------------


@dataclass
class EvictionReport:
    rounds: list
    honest_mean: list            # pooled across seeds, per round
    malicious_mean: Optional[list]
    first_round_mean_below: Optional[int]
    per_seed_first_eviction: list  # first round any malicious node < min_stake
    per_seed_final: list           # dicts: honest/malicious final mean stakes


def eviction_curve(runs: list, min_stake: int) -> EvictionReport:
    """Per-round mean stake trajectories by node honesty class."""
    if not runs:
        raise HarnessError("eviction_curve requires at least one run")
    n_rounds = len(runs[0].records)
    honest_ids = {}
    malicious_ids = {}
    for run in runs:
        asg = run.population.assignment
        hon = [nid for nid in run.population.node_ids
               if asg.node_class(nid) == "honest"]
        mal = [nid for nid in run.population.node_ids
               if asg.node_class(nid) == "malicious"]
        honest_ids[run.seed_index] = hon
        malicious_ids[run.seed_index] = mal
    have_malicious = any(malicious_ids[r.seed_index] for r in runs)

    honest_mean = []
    malicious_mean = [] if have_malicious else None
    for r in range(n_rounds):
        hvals = [rec.stakes[nid]
                 for run in runs
                 for rec in [run.records[r]]
                 for nid in honest_ids[run.seed_index]]
        honest_mean.append(sum(hvals) / len(hvals))
        if have_malicious:
            mvals = [rec.stakes[nid]
                     for run in runs
                     for rec in [run.records[r]]
                     for nid in malicious_ids[run.seed_index]]
            malicious_mean.append(sum(mvals) / len(mvals))

    first_mean_below = None
    if have_malicious:
        for r, val in enumerate(malicious_mean):
            if val < min_stake:
                first_mean_below = r
                break

    per_seed_first = []
    per_seed_final = []
    for run in runs:
        mal = malicious_ids[run.seed_index]
        hon = honest_ids[run.seed_index]
        first = None
        for r, rec in enumerate(run.records):
            if any(rec.stakes[nid] < min_stake for nid in mal):
                first = r
                break
        per_seed_first.append(first)
        final = run.records[-1].stakes
        per_seed_final.append({
            "seed_index": run.seed_index,
            "honest": sum(final[nid] for nid in hon) / len(hon) if hon else math.nan,
            "malicious": (sum(final[nid] for nid in mal) / len(mal)
                          if mal else math.nan),
        })
    return EvictionReport(list(range(n_rounds)), honest_mean, malicious_mean,
                          first_mean_below, per_seed_first, per_seed_final)


# --- defense comparison --------------------------------------------------------


def defense_pair(config: SimConfig) -> tuple:
    """Run with committee voting on and off under the same seeds.

    Returns (result_on, result_off, pairs) where pairs is a list of
    (oracle_mse_voting_on, oracle_mse_voting_off) per seed.
    """
    on_cfg = dataclasses.replace(
        config, protocol=dataclasses.replace(config.protocol,
                                             voting_enabled=True))
    off_cfg = dataclasses.replace(
        config, protocol=dataclasses.replace(config.protocol,
                                             voting_enabled=False))
    result_on = run_simulation(on_cfg)
    result_off = run_simulation(off_cfg)
    pairs = [(ron.oracle_mse, roff.oracle_mse)
             for ron, roff in zip(result_on.runs, result_off.runs)]
    return result_on, result_off, pairs

"""Integer token ledger with staking, saturating slashes, and an event log.

All balances are integer base units; no floats anywhere in this module.
Slashes saturate at the current stake and the seized amount moves to the
treasury.  Rewards are minted.  The invariant checked by
``conservation_check`` is

    sum(staked) + treasury == initial_supply + minted_total

which holds exactly after every operation.  Every mutation appends an event
record, and ``Ledger.replay`` rebuilds an identical ledger from the event
list alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

INT64_MIN = -(1 << 63)
INT64_MAX = (1 << 63) - 1


class LedgerError(ValueError):
    """Raised on invalid ledger operations (bad amounts, unknown ids)."""


def _check_int64(value: int, what: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise LedgerError(f"{what} must be an int, got {type(value).__name__}")
    if not (INT64_MIN <= value <= INT64_MAX):
        raise LedgerError(f"{what} out of 64-bit range: {value}")
    return value


@dataclass
class LedgerEvent:
    round: int
    event: str  # "stake" or "delta"
    id: str
    amount: int

    def to_json_obj(self) -> dict:
        return {"round": self.round, "event": self.event, "id": self.id,
                "amount": self.amount}


@dataclass
class Ledger:
    """Single-writer token ledger.  Mutations go through stake/apply_deltas."""

    initial_supply: int = 0
    treasury: int = 0
    minted_total: int = 0
    accounts: dict = field(default_factory=dict)  # id -> staked amount
    events: list = field(default_factory=list)

    def stake(self, node_id: str, amount: int, round_index: int = -1) -> None:
        """Stake fresh tokens for node_id; counts toward initial_supply."""
        _check_int64(amount, "stake amount")
        if amount <= 0:
            raise LedgerError(f"stake amount must be positive, got {amount}")
        self.accounts[node_id] = self.accounts.get(node_id, 0) + amount
        self.initial_supply += amount
        self.events.append(LedgerEvent(round_index, "stake", node_id, amount))

    def staked(self, node_id: str) -> int:
        return self.accounts.get(node_id, 0)

    def apply_deltas(self, deltas: dict, round_index: int) -> dict:
        """Apply reward/slash deltas for one round.

        Positive deltas are minted onto the stake.  Negative deltas are
        slashes, saturating at the current stake; the seized amount is
        burned to the treasury.  Returns the applied (post-saturation)
        deltas.  Ids are processed in sorted order so the event log is
        deterministic regardless of dict insertion order.
        """
        applied = {}
        for node_id in sorted(deltas):
            delta = _check_int64(deltas[node_id], f"delta for {node_id!r}")
            if node_id not in self.accounts:
                raise LedgerError(f"unknown account: {node_id!r}")
            if delta >= 0:
                self.accounts[node_id] += delta
                self.minted_total += delta
                eff = delta
            else:
                seized = min(self.accounts[node_id], -delta)
                self.accounts[node_id] -= seized
                self.treasury += seized
                eff = -seized
            applied[node_id] = eff
            self.events.append(LedgerEvent(round_index, "delta", node_id, eff))
        return applied

    def eligible_set(self, min_stake: int) -> list:
        """Ids with staked >= min_stake, sorted ascending."""
        return sorted(i for i, s in self.accounts.items() if s >= min_stake)

    def total_staked(self) -> int:
        return sum(self.accounts.values())

    def conservation_check(self) -> bool:
        return self.total_staked() + self.treasury == self.initial_supply + self.minted_total

    @classmethod
    def replay(cls, events: list) -> "Ledger":
        """Rebuild a ledger by reapplying an event list in order."""
        ledger = cls()
        for ev in events:
            if ev.event == "stake":
                ledger.stake(ev.id, ev.amount, ev.round)
            elif ev.event == "delta":
                ledger.apply_deltas({ev.id: ev.amount}, ev.round)
            else:
                raise LedgerError(f"unknown event type: {ev.event!r}")
        return ledger

    def snapshot(self) -> dict:
        """Balances by id plus treasury/minted counters, for comparisons."""
        return {
            "accounts": dict(self.accounts),
            "treasury": self.treasury,
            "minted_total": self.minted_total,
            "initial_supply": self.initial_supply,
        }

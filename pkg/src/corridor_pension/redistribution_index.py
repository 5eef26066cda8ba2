"""Share ledger for the collective account.

Tracks which fraction of the collective pot is attributable to each individual
as contributions arrive at discrete event times while the pot itself is
revalued by the market in between.  Two update rules are provided:

* proportional: a newcomer euro buys exactly its proportion of the current pot,
  so an individual's absolute share moves with contributions only.  This is the
  unique rule with that property, but relative shares can overtake after a
  market drop.
* monotone: indices accrue an artificial nonnegative interest a between events
  and contributions add linearly, which preserves more-pays-more dominance at
  the cost of the absolute-share identity.

Five executable fairness checkers replay a recorded history and return a
witness on failure.  Arithmetic is type-transparent: `fractions.Fraction`
inputs stay exact end to end.

Event records hold the pre-contribution pot value C_pre; the first event must
have C_pre = 0 (the pot starts empty) and a positive first contribution.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

__all__ = [
    "Ledger",
    "EventRecord",
    "CheckResult",
    "update_proportional",
    "update_monotone",
    "check_cont",
    "check_fix",
    "check_mon",
    "check_add",
    "check_lin",
    "index_for_pool",
]

MODE_PROPORTIONAL = "proportional"
MODE_MONOTONE = "monotone"

_REL_TOL = 1e-9


@dataclass(frozen=True)
class EventRecord:
    """One ledger event: contributions observed at time t against pot value C_pre."""

    t: object
    c_pre: object
    contributions: dict
    a: dict | None
    indices_after: dict
    shares_after: dict

    @property
    def c_post(self):
        return self.c_pre + sum(self.contributions.values())


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    rule: str
    witness: tuple | None = None

    def __bool__(self):
        return self.ok


@dataclass
class Ledger:
    """Event-sourced share ledger; `mode` fixes the update rule for its lifetime."""

    mode: str = MODE_PROPORTIONAL
    norm: object = 100
    default_a: object = 0
    events: list = field(default_factory=list)

    def __post_init__(self):
        if self.mode not in (MODE_PROPORTIONAL, MODE_MONOTONE):
            raise ValueError(f"unknown mode {self.mode!r}")

    # -- state views ------------------------------------------------------

    @property
    def ids(self) -> list:
        seen = []
        for ev in self.events:
            for j in ev.indices_after:
                if j not in seen:
                    seen.append(j)
        return seen

    @property
    def indices(self) -> dict:
        return dict(self.events[-1].indices_after) if self.events else {}

    @property
    def shares(self) -> dict:
        return dict(self.events[-1].shares_after) if self.events else {}

    def record(self, t, contributions: dict, c_pre, a=None) -> dict:
        if self.mode == MODE_PROPORTIONAL:
            if a is not None:
                raise ValueError("proportional ledgers take no interest factors")
            return update_proportional(self, t, contributions, c_pre)
        return update_monotone(self, t, contributions, a, c_pre)

    # -- serialization ----------------------------------------------------

    def to_json(self) -> str:
        def enc(x):
            if isinstance(x, Fraction):
                return f"{x.numerator}/{x.denominator}"
            return x

        events = [
            {
                "t": enc(ev.t),
                "C_pre": enc(ev.c_pre),
                "contributions": {str(j): enc(v) for j, v in ev.contributions.items()},
                **({"a": {str(j): enc(v) for j, v in ev.a.items()}} if ev.a is not None else {}),
            }
            for ev in self.events
        ]
        return json.dumps(
            {"mode": self.mode, "norm": enc(self.norm), "default_a": enc(self.default_a),
             "events": events},
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "Ledger":
        def dec(x):
            if isinstance(x, str) and "/" in x:
                return Fraction(x)
            return x

        raw = json.loads(text)
        led = cls(
            mode=raw.get("mode", MODE_PROPORTIONAL),
            norm=dec(raw.get("norm", 100)),
            default_a=dec(raw.get("default_a", 0)),
        )
        for ev in raw.get("events", []):
            contributions = {j: dec(v) for j, v in ev.get("contributions", {}).items()}
            a = {j: dec(v) for j, v in ev["a"].items()} if "a" in ev else None
            led.record(dec(ev["t"]), contributions, dec(ev["C_pre"]), a=a)
        return led


def _validate_event(ledger: Ledger, t, contributions: dict, c_pre):
    if any(v < 0 for v in contributions.values()):
        raise ValueError("contributions must be nonnegative")
    if c_pre < 0:
        raise ValueError("C_pre must be nonnegative")
    if not ledger.events:
        if c_pre != 0:
            raise ValueError("first event requires C_pre = 0 (the pot starts empty)")
        if not any(v > 0 for v in contributions.values()):
            raise ValueError("first event needs a positive contribution")
    elif t <= ledger.events[-1].t:
        raise ValueError("event times must be strictly increasing")


def _normalize(indices: dict) -> dict:
    total = sum(indices.values())
    if total <= 0:
        raise ValueError("cannot normalize: index total is not positive")
    return {j: v / total for j, v in indices.items()}


def update_proportional(ledger: Ledger, t, contributions: dict, c_pre) -> dict:
    """Apply one proportional-rule event and return the new shares.

    The index recursion adds (J / C_pre) times the index total to each
    contributor; the equivalent direct share recursion
    (share * C_pre + J) / C_post is computed alongside and both paths must
    agree, exactly for rational inputs and to 1e-12 otherwise.
    """
    if ledger.mode != MODE_PROPORTIONAL:
        raise ValueError("ledger mode is not proportional")
    _validate_event(ledger, t, contributions, c_pre)

    if not ledger.events:
        first = next(j for j, v in contributions.items() if v > 0)
        base = contributions[first]
        indices = {j: (v / base) * ledger.norm for j, v in contributions.items()}
        shares = _normalize(indices)
        ledger.events.append(EventRecord(t, c_pre, dict(contributions), None, indices, shares))
        return shares

    prev = ledger.events[-1]
    total_j = sum(contributions.values())
    if total_j > 0 and c_pre <= 0:
        raise ValueError("collective value non-positive; proportional rule undefined")

    indices = dict(prev.indices_after)
    idx_total = sum(indices.values())
    for j, v in contributions.items():
        if v == 0 and j in indices:
            continue
        indices[j] = indices.get(j, 0) + (v / c_pre) * idx_total
    shares = _normalize(indices)

    # direct share recursion must reproduce the index route (undefined on an
    # empty pot with no inflow, where nothing changed anyway)
    if c_pre + total_j > 0:
        direct = {
            j: (prev.shares_after.get(j, 0) * c_pre + contributions.get(j, 0)) / (c_pre + total_j)
            for j in indices
        }
        for j in indices:
            a_, b_ = shares[j], direct[j]
            if isinstance(a_, Rational) and isinstance(b_, Rational):
                assert a_ == b_, f"dual share recursions disagree at {j}"
            else:
                assert abs(a_ - b_) <= 1e-12, f"dual share recursions disagree at {j}"

    ledger.events.append(EventRecord(t, c_pre, dict(contributions), None, indices, shares))
    return shares


def update_monotone(ledger: Ledger, t, contributions: dict, a=None, c_pre=0) -> dict:
    """Apply one monotone-rule event: I <- I*(1 + a) + J, with a >= 0.

    `a` may be a mapping per individual, a scalar, or None for the ledger
    default.  The first event starts indices at the raw contributions.
    """
    if ledger.mode != MODE_MONOTONE:
        raise ValueError("ledger mode is not monotone")
    _validate_event(ledger, t, contributions, c_pre)

    known = set().union(*(ev.indices_after for ev in ledger.events)) if ledger.events else set()
    everyone = sorted(known | set(contributions), key=str)
    if a is None:
        a_map = {j: ledger.default_a for j in everyone}
    elif isinstance(a, dict):
        a_map = {j: a.get(j, ledger.default_a) for j in everyone}
    else:
        a_map = {j: a for j in everyone}
    if any(v < 0 for v in a_map.values()):
        raise ValueError("interest factors must be nonnegative")

    if not ledger.events:
        indices = dict(contributions)
        shares = _normalize(indices)
        ledger.events.append(
            EventRecord(t, c_pre, dict(contributions), a_map, indices, shares)
        )
        return shares

    prev = ledger.events[-1].indices_after
    indices = {
        j: prev.get(j, 0) * (1 + a_map[j]) + contributions.get(j, 0) for j in everyone
    }
    shares = _normalize(indices)
    ledger.events.append(EventRecord(t, c_pre, dict(contributions), a_map, indices, shares))
    return shares


# -- checkers -------------------------------------------------------------


def _close(x, y, tol=_REL_TOL):
    if isinstance(x, Rational) and isinstance(y, Rational):
        return x == y
    scale = max(abs(x), abs(y), 1)
    return abs(x - y) <= tol * scale


def check_cont(ledger: Ledger) -> CheckResult:
    """Absolute-share additivity: share*C_pre + J = new share * C_post at every event."""
    for n, ev in enumerate(ledger.events):
        before = ledger.events[n - 1].shares_after if n > 0 else {}
        c_post = ev.c_post
        for j in ev.indices_after:
            lhs = before.get(j, 0) * ev.c_pre + ev.contributions.get(j, 0)
            rhs = ev.shares_after[j] * c_post
            if not _close(lhs, rhs):
                return CheckResult(False, "cont", (ev.t, j))
    return CheckResult(True, "cont")


def check_fix(ledger: Ledger) -> CheckResult:
    """Pure revaluation events (no contributions) must leave relative shares alone."""
    for n, ev in enumerate(ledger.events):
        if n == 0 or any(v > 0 for v in ev.contributions.values()):
            continue
        before = ledger.events[n - 1].shares_after
        for j in ev.shares_after:
            if not _close(before.get(j, 0), ev.shares_after[j]):
                return CheckResult(False, "fix", (ev.t, j))
    return CheckResult(True, "fix")


def _cumulative(ledger: Ledger, j, upto: int):
    return sum(ledger.events[m].contributions.get(j, 0) for m in range(upto + 1))


def check_mon(ledger: Ledger) -> CheckResult:
    """Cumulative dominance at every prefix must imply share dominance.

    For each event index n and pair (j, l): if j's running contribution total
    is >= l's after every event up to n, then j's share at n must be >= l's.
    Witness is the first (t, (j, l)) violation.
    """
    ids = ledger.ids
    for n, ev in enumerate(ledger.events):
        for j in ids:
            for l in ids:
                if j == l:
                    continue
                dominates = all(
                    _cumulative(ledger, j, m) >= _cumulative(ledger, l, m)
                    for m in range(n + 1)
                )
                if not dominates:
                    continue
                sj = ev.shares_after.get(j, 0)
                sl = ev.shares_after.get(l, 0)
                if sj < sl and not _close(sj, sl):
                    return CheckResult(False, "mon", (ev.t, (j, l)))
    return CheckResult(True, "mon")


def _replay_with_extra(ledger: Ledger, join_index: int, new_id, amount) -> Ledger:
    # rebuild the history with one extra contributor; later pot values follow the
    # original inter-event growth factors, so the counterfactual stays market-consistent
    twin = Ledger(mode=ledger.mode, norm=ledger.norm, default_a=ledger.default_a)
    c_post_twin = 0
    for n, ev in enumerate(ledger.events):
        if n == 0:
            c_pre = ev.c_pre
        else:
            prev = ledger.events[n - 1]
            if prev.c_post <= 0:
                raise ValueError("cannot replay through a wiped-out pot")
            c_pre = c_post_twin * (ev.c_pre / prev.c_post)
        contributions = dict(ev.contributions)
        if n == join_index:
            contributions[new_id] = contributions.get(new_id, 0) + amount
        twin.record(ev.t, contributions, c_pre, a=dict(ev.a) if ev.a else None)
        c_post_twin = c_pre + sum(contributions.values())
    return twin


def check_add(ledger: Ledger, join_index: int, new_id, amount) -> CheckResult:
    """A new contributor must not disturb incumbents' shares relative to each other.

    Replays the ledger with `new_id` adding `amount` at event `join_index` and
    compares each incumbent's share of the incumbent subtotal.
    """
    if not 0 <= join_index < len(ledger.events):
        raise ValueError("join_index out of range")
    if new_id in ledger.ids:
        raise ValueError("new contributor must be fresh")
    if amount <= 0:
        raise ValueError("amount must be positive")
    twin = _replay_with_extra(ledger, join_index, new_id, amount)
    for n, ev in enumerate(ledger.events):
        tw = twin.events[n]
        incumbents = [j for j in ev.shares_after]
        subtotal = sum(tw.shares_after.get(j, 0) for j in incumbents)
        if subtotal <= 0:
            continue
        for j in incumbents:
            want = ev.shares_after[j]
            got = tw.shares_after.get(j, 0) / subtotal
            if not _close(want, got):
                return CheckResult(False, "add", (ev.t, j))
    return CheckResult(True, "add")


def check_lin(ledger: Ledger) -> CheckResult:
    """Contribution-driven index increments must scale linearly with the amounts.

    At each event the increment d^j (net of any interest accrual) must satisfy
    d^j * J^l = d^l * J^j for contributing pairs; witness on first failure.
    """
    for n, ev in enumerate(ledger.events):
        if n == 0:
            continue
        prev = ledger.events[n - 1].indices_after
        contributors = [j for j, v in ev.contributions.items() if v > 0]
        if len(contributors) < 2:
            continue
        inc = {}
        for j in contributors:
            accrued = prev.get(j, 0)
            if ev.a is not None:
                accrued = accrued * (1 + ev.a.get(j, 0))
            inc[j] = ev.indices_after[j] - accrued
        for x in contributors:
            for y in contributors:
                if str(x) >= str(y):
                    continue
                lhs = inc[x] * ev.contributions[y]
                rhs = inc[y] * ev.contributions[x]
                if not _close(lhs, rhs):
                    return CheckResult(False, "lin", (ev.t, (x, y)))
    return CheckResult(True, "lin")


def index_for_pool(ledger: Ledger, t) -> dict:
    """Lagged shares for capping help claims: the state after the last event
    strictly before t.  t = 0 has no meaningful shares and raises."""
    if t <= 0:
        raise ValueError("shares are undefined at t = 0; the pot starts empty")
    chosen = None
    for ev in ledger.events:
        if ev.t < t:
            chosen = ev
        else:
            break
    if chosen is None:
        raise ValueError(f"no event recorded before t = {t}")
    return dict(chosen.shares_after)

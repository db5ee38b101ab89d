"""Group-SAOLA: selection over feature groups arriving one group at a time.

Each arriving group is first reduced on its own (intra-group parsimony), then
its survivors are compared against every feature of the groups selected so
far (inter-group parsimony).  Both stages use SAOLA's pairwise predicate, so
conditioning sets never exceed one feature.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .exceptions import ConfigurationError
from .lfi import SaolaScorer, SelectorConfig, TestCache, new_state


@dataclass
class GroupLogEntry:
    step: int
    group: str
    survivors: tuple[int, ...]
    intra_removed: tuple[int, ...] = ()
    inter_discarded: tuple[int, ...] = ()
    inter_removed: tuple[int, ...] = ()
    dropped_groups: tuple[str, ...] = ()
    n_tests: int = 0

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "group": self.group,
            "survivors": list(self.survivors),
            "intra_removed": list(self.intra_removed),
            "inter_discarded": list(self.inter_discarded),
            "inter_removed": list(self.inter_removed),
            "dropped_groups": list(self.dropped_groups),
            "n_tests": self.n_tests,
        }


@dataclass
class GroupSelectionState:
    """Selected groups (in selection order) mapped to their surviving features."""

    measure: str
    selected_groups: dict = field(default_factory=dict)
    rel_scores: dict = field(default_factory=dict)
    arrival_log: list = field(default_factory=list)
    runtime_ms: float = 0.0
    cache: TestCache = field(default_factory=TestCache, repr=False)
    algorithm: str = "group_saola"

    @property
    def selected(self) -> list[int]:
        return [f for feats in self.selected_groups.values() for f in feats]

    @property
    def algo_state(self) -> dict:
        # SaolaScorer keeps relevance scores under this key.
        return {"rel": self.rel_scores}

    @property
    def n_tests(self) -> int:
        return self.cache.requested

    @property
    def n_tests_computed(self) -> int:
        return self.cache.computed

    @property
    def n_intra_removed(self) -> int:
        return sum(len(e.intra_removed) for e in self.arrival_log)

    @property
    def n_inter_removed(self) -> int:
        return sum(len(e.inter_discarded) + len(e.inter_removed) for e in self.arrival_log)


def new_group_state(source, config: SelectorConfig) -> GroupSelectionState:
    base = new_state(source, "saola", config)
    return GroupSelectionState(measure=base.measure)


def group_saola_step(state, source, arrival, config) -> GroupSelectionState:
    """Process one group arrival (an :class:`~lofs.dataset.Arrival` in group mode)."""
    groups = {g.name: g.features for g in (source.dataset.groups or ())}
    if arrival.group not in groups or tuple(arrival.features) != groups[arrival.group]:
        raise ConfigurationError(f"arrival {arrival.group!r} is not a declared group")
    n_before = state.n_tests
    scorer = SaolaScorer(state, source, config)

    survivors, intra_removed = [], []
    for f in arrival.features:
        score = scorer.relevance(f)
        if score is None:
            intra_removed.append(f)
            continue
        scorer.rel[f] = score
        keep = True
        for y in list(survivors):
            verdict = scorer.compare(f, y)
            if verdict == "discard":
                keep = False
                break
            if verdict == "remove":
                survivors.remove(y)
                intra_removed.append(y)
        if keep:
            survivors.append(f)
        else:
            intra_removed.append(f)
    for f in intra_removed:
        scorer.rel.pop(f, None)

    inter_discarded, inter_removed, dropped = [], [], []
    for f in list(survivors):
        discarded = False
        for gname in list(state.selected_groups):
            members = state.selected_groups[gname]
            for y in list(members):
                verdict = scorer.compare(f, y)
                if verdict == "discard":
                    discarded = True
                    break
                if verdict == "remove":
                    members.remove(y)
                    del scorer.rel[y]
                    inter_removed.append(y)
            if not members:
                del state.selected_groups[gname]
                dropped.append(gname)
            if discarded:
                break
        if discarded:
            survivors.remove(f)
            del scorer.rel[f]
            inter_discarded.append(f)

    if survivors:
        state.selected_groups[arrival.group] = survivors
    state.arrival_log.append(
        GroupLogEntry(
            step=len(state.arrival_log) + 1,
            group=arrival.group,
            survivors=tuple(survivors),
            intra_removed=tuple(intra_removed),
            inter_discarded=tuple(inter_discarded),
            inter_removed=tuple(inter_removed),
            dropped_groups=tuple(dropped),
            n_tests=state.n_tests - n_before,
        )
    )
    return state


def run_group_selector(dataset, stream, config=None) -> GroupSelectionState:
    if config is None:
        config = SelectorConfig()
    if stream.mode != "group":
        raise ConfigurationError("run_group_selector needs a group-mode stream")
    if stream.dataset is not dataset:
        raise ConfigurationError("stream was built over a different dataset")
    state = new_group_state(stream, config)
    start = time.perf_counter()
    for arrival in stream:
        group_saola_step(state, stream, arrival, config)
    state.runtime_ms = (time.perf_counter() - start) * 1000.0
    return state

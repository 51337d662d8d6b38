"""Monte Carlo tree search with UCT over a black-box generative model.

The tree is open-loop: nodes are keyed by action paths and per-pass
transitions are re-sampled, so node values average over the model's
stochasticity. States are rebuilt while walking, never stored in nodes,
which keeps memory flat for grid-heavy models.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Protocol, Sequence

import numpy as np


class GenerativeModel(Protocol):
    def legal_actions(self, state) -> Sequence:
        ...

    def sample_transition(self, state, action, rng: np.random.Generator) -> tuple[Any, float]:
        ...

    def is_terminal(self, state) -> bool:
        ...


@dataclass
class MctsConfig:
    discount: float = 0.95
    exploration_c: float = 100.0
    max_depth: int = 3
    iteration_limit: int = 1000
    time_limit_s: float | None = None

    def validate(self) -> None:
        if not (0.0 < self.discount <= 1.0):
            raise ValueError("discount must lie in (0, 1]")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if self.iteration_limit < 1 and self.time_limit_s is None:
            raise ValueError("need an iteration or time budget")


def uct_score(value: float, child_visits: int, parent_visits: int, c: float) -> float:
    """Mean value plus the c*sqrt(ln(parent)/child) exploration bonus;
    unvisited children score +inf."""
    if child_visits == 0:
        return math.inf
    return value + c * math.sqrt(math.log(parent_visits) / child_visits)


def depth_schedule(action_count: int, budget: int) -> int:
    """Deepest horizon in {1, 2, 3} the budget can cover at roughly two
    visits per leaf, floored at 1."""
    best = 1
    for d in (2, 3):
        if budget >= 2 * action_count ** d:
            best = d
    return best


class SearchNode:
    """Tree node: UCT visit count, running-mean value over the discounted
    returns backed up through it, children keyed by action index.

    Each node carries the action list of the state it was first expanded
    from, so legality can vary with depth (e.g. edge-of-airspace moves)."""

    __slots__ = ("visits", "value", "value_n", "children", "untried", "actions")

    def __init__(self, actions: Sequence):
        self.visits = 0
        self.value = 0.0
        self.value_n = 0
        self.children: dict[int, SearchNode] = {}
        self.actions = actions
        self.untried = list(range(len(actions)))


def _select_child(node: SearchNode, c: float) -> int:
    best_idx = -1
    best_score = -math.inf
    for idx, child in node.children.items():
        score = uct_score(child.value, child.visits, node.visits, c)
        if score > best_score or (score == best_score and idx < best_idx):
            best_score = score
            best_idx = idx
    return best_idx


def search(model: GenerativeModel, root_state, config: MctsConfig,
           rng: np.random.Generator):
    """Run MCTS from `root_state` and return the recommended action.

    The recommendation is the most-visited root action; ties break by higher
    mean value, then lower action index. A fresh tree is built per call.
    Deterministic given (model, state, config, rng state) when no time limit
    is set.
    """
    config.validate()
    actions = list(model.legal_actions(root_state))
    if not actions:
        raise ValueError("no legal actions at the search root")
    if len(actions) == 1:
        return actions[0]

    root = SearchNode(actions)
    root.visits = 1  # creation counts as the root's own expansion visit
    deadline = None
    if config.time_limit_s is not None:
        deadline = time.monotonic() + config.time_limit_s

    iteration = 0
    while True:
        if config.iteration_limit and iteration >= config.iteration_limit:
            break
        if deadline is not None and time.monotonic() >= deadline:
            break
        iteration += 1

        node = root
        state = root_state
        path = [root]
        rewards: list[float] = []
        depth = 0

        # selection
        while (depth < config.max_depth and not node.untried and node.children
               and not model.is_terminal(state)):
            idx = _select_child(node, config.exploration_c)
            state, r = model.sample_transition(state, node.actions[idx], rng)
            rewards.append(r)
            node = node.children[idx]
            path.append(node)
            depth += 1

        # expansion
        if depth < config.max_depth and node.untried and not model.is_terminal(state):
            idx = node.untried.pop(0)
            state, r = model.sample_transition(state, node.actions[idx], rng)
            rewards.append(r)
            child = SearchNode(list(model.legal_actions(state)))
            node.children[idx] = child
            node = child
            path.append(node)
            depth += 1

        # rollout
        while depth < config.max_depth and not model.is_terminal(state):
            legal = model.legal_actions(state)
            if not legal:
                break
            action = legal[rng.integers(len(legal))]
            state, r = model.sample_transition(state, action, rng)
            rewards.append(r)
            depth += 1

        # backup: a node entered by the action at depth i holds that
        # action's value, so it sees the suffix return from i-1 (its own
        # transition reward included)
        returns = [0.0] * (len(rewards) + 1)
        for i in range(len(rewards) - 1, -1, -1):
            returns[i] = rewards[i] + config.discount * returns[i + 1]
        for i, n in enumerate(path):
            if n is not root:
                n.visits += 1
            n.value_n += 1
            target = returns[i - 1] if i > 0 else returns[0]
            n.value += (target - n.value) / n.value_n
        root.visits += 1

    best_idx = -1
    best_key: tuple[float, float] | None = None
    for idx, child in root.children.items():
        key = (child.visits, child.value)
        if best_key is None or key > best_key or (key == best_key and idx < best_idx):
            best_key = key
            best_idx = idx
    return actions[best_idx]


def search_parallel(model_factory: Callable[[], GenerativeModel], root_state,
                    config: MctsConfig, seed: int, workers: int = 2):
    """Root-parallel variant: independent searches vote by root visits.

    Trades bit-determinism for wall-clock speed; each worker gets its own
    model instance and rng stream.
    """
    if workers < 2:
        return search(model_factory(), root_state, config, np.random.default_rng(seed))
    streams = np.random.SeedSequence(seed).spawn(workers)

    def run(ss):
        return search(model_factory(), root_state, config, np.random.default_rng(ss))

    with ThreadPoolExecutor(max_workers=workers) as pool:
        picks = list(pool.map(run, streams))
    counts: dict[Any, int] = {}
    for p in picks:
        counts[p] = counts.get(p, 0) + 1
    return max(counts.items(), key=lambda kv: kv[1])[0]

"""Monte Carlo tree search over step-level reasoning states.

Nodes hold partial step sequences; each rollout selects by UCB1 (unvisited
children first, left to right), expands a leaf with ``width`` one-step
children, completes the path with a single full continuation, and
backpropagates the path's reward up the selection chain. The final response is
chosen per ``mcts_scoring``: highest-reward rollout, modal rollout answer,
maximum summed Q along the chain, or a top-down greedy descent by visit count
or mean value.
"""

from __future__ import annotations

import math
import time
from typing import Optional, Sequence

from ..backends.base import Backend
from ..extraction import ReasoningPath, extract_answer
from .common import (
    QuestionRun,
    RoundTrace,
    SelectionResult,
    StrategyError,
    earliest_argmax,
)
from .config import SearchConfig


class TreeNode:
    __slots__ = ("steps", "parent", "children", "visits", "value_sum", "terminal")

    def __init__(self, steps, parent=None, terminal=False):
        self.steps = steps
        self.parent = parent
        self.children = []
        self.visits = 0
        self.value_sum = 0.0
        self.terminal = terminal

    @property
    def mean_value(self) -> float:
        return self.value_sum / self.visits if self.visits else 0.0


def ucb_score(value_sum: float, child_visits: int, parent_visits: int, explore_weight: float) -> float:
    """UCB1: Q/N + c * sqrt(ln N_parent / N_child). Unvisited children are
    handled by the caller (they are taken first, left to right)."""
    if child_visits == 0:
        return float("inf")
    exploit = value_sum / child_visits
    if explore_weight == 0 or parent_visits == 0:
        return exploit
    return exploit + explore_weight * math.sqrt(math.log(parent_visits) / child_visits)


def select_child_index(stats: Sequence, parent_visits: int, explore_weight: float) -> int:
    """Pick a child from (value_sum, visits) stats: first unvisited child if
    any, else the UCB1 argmax (leftmost on ties)."""
    for i, (_, visits) in enumerate(stats):
        if visits == 0:
            return i
    return earliest_argmax(
        list(stats), lambda s: ucb_score(s[0], s[1], parent_visits, explore_weight)
    )


class _Rollout:
    __slots__ = ("index", "path", "value", "chain")

    def __init__(self, index, path, value, chain):
        self.index = index
        self.path = path
        self.value = value
        self.chain = chain


def run_mcts(question: str, config: SearchConfig, backend: Backend, *,
             task_kind: str = "math", options: Optional[Sequence[str]] = None,
             question_id: Optional[str] = None, seed: int = 0) -> SelectionResult:
    t0 = time.perf_counter()
    run = QuestionRun(question, config, backend, task_kind, options, question_id, seed)
    root = TreeNode(steps=[])
    completed: list = []
    all_rollout_answers: list = []

    def is_terminal_step(step: str) -> bool:
        return not extract_answer(step, task_kind).is_null

    def expand(node: TreeNode, rollout_index: int):
        prefixes = [list(node.steps)] if node.steps else []
        new = run.generate(config.width, prefixes=prefixes, round_index=rollout_index,
                           step_mode=True)
        for partial in new:
            step = partial.steps[-1] if partial.steps else ""
            terminal = is_terminal_step(step) or len(partial.steps) >= config.max_depth
            node.children.append(TreeNode(steps=list(partial.steps), parent=node,
                                          terminal=terminal))

    def complete(node: TreeNode, rollout_index: int) -> ReasoningPath:
        if node.terminal:
            text = "\n".join(node.steps)
            return ReasoningPath(
                question_id=run.question_id,
                steps=list(node.steps),
                answer=extract_answer(text, task_kind),
                token_count=0,  # the steps were billed when generated
                source_round=rollout_index,
            )
        return run.generate(1, prefixes=[list(node.steps)], round_index=rollout_index)[0]

    def rollout_value(path: ReasoningPath) -> float:
        if path.answer.is_null:
            return 0.0
        if config.mcts_scoring == "self":
            # Leave-one-out consistency: how often prior rollouts agreed.
            others = [a for a in all_rollout_answers if a is not None]
            if not others:
                return 0.5
            return sum(1 for a in others if a == path.answer.canonical) / len(others)
        return run.score(path)

    for r in range(config.n):
        node = root
        chain = []
        while node.children:
            stats = [(c.value_sum, c.visits) for c in node.children]
            node = node.children[select_child_index(stats, node.visits, config.explore_weight)]
            chain.append(node)
        if not node.terminal and len(node.steps) < config.max_depth:
            expand(node, r)
            if node.children:
                node = node.children[0]
                chain.append(node)
        path = complete(node, r)
        value = rollout_value(path)
        all_rollout_answers.append(None if path.answer.is_null else path.answer.canonical)
        if not path.answer.is_null:
            completed.append(_Rollout(r, path, value, chain))
        root.visits += 1
        root.value_sum += value
        for visited in chain:
            visited.visits += 1
            visited.value_sum += value

    if not completed:
        raise StrategyError("no completed rollouts")

    chosen = _select(completed, root, config)

    trace = RoundTrace(
        round_index=0,
        added=[ro.path for ro in completed],
        cluster_sizes={},
        raw_scores=[ro.value for ro in completed],
        detail={
            "rollouts": config.n,
            "root_child_visits": [c.visits for c in root.children],
            "rollout_answers": [ro.path.answer.canonical for ro in completed],
        },
    )
    return SelectionResult(chosen, [trace], run.total_tokens, time.perf_counter() - t0)


def _select(completed: Sequence[_Rollout], root: TreeNode, config: SearchConfig) -> ReasoningPath:
    scoring = config.mcts_scoring
    if scoring in ("reward", "self"):
        return completed[earliest_argmax(list(completed), lambda ro: ro.value)].path
    if scoring == "maj_vote":
        counts: dict = {}
        first: dict = {}
        for i, ro in enumerate(completed):
            a = ro.path.answer.canonical
            counts[a] = counts.get(a, 0) + 1
            first.setdefault(a, i)
        winner = min(counts, key=lambda a: (-counts[a], first[a]))
        return completed[first[winner]].path
    if scoring == "q_value":
        return completed[
            earliest_argmax(list(completed), lambda ro: sum(n.mean_value for n in ro.chain))
        ].path
    if scoring in ("n_greedy", "q_greedy"):
        key = (lambda c: c.visits) if scoring == "n_greedy" else (lambda c: c.mean_value)
        node = root
        while node.children:
            node = node.children[earliest_argmax(node.children, key)]
        # Earliest completed rollout through the descent's endpoint; walk back
        # up if none completed below it.
        while node is not None:
            for ro in completed:
                if node in ro.chain:
                    return ro.path
            node = node.parent
        return completed[0].path
    raise ValueError(f"unknown mcts_scoring: {scoring!r}")

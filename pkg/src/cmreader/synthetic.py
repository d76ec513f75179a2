"""Synthetic rule/dialog generator with a three-valued logic oracle.

Rules are built from a condition catalog and realized as bullet lists,
in-line clauses, or a mix (for nested logic). Dialogs are simulated the way
the source data is constructed: the scenario pre-reveals a subset of
conditions, then follow-up turns answer the leftmost unknown condition until
the decision resolves; an example is a prefix of that dialog labeled by the
oracle.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .catalog import CONDITIONS, OUTCOMES, ConditionTemplate, OutcomeTemplate, PHENOMENA
from .config import GeneratorConfig
from .data import CMRExample, DecisionLabel
from .encoding import HistoryTurn

SATISFIED, VIOLATED, UNKNOWN = "satisfied", "violated", "unknown"
LOGICAL_TYPES = ("simple", "conjunction", "disjunction", "other")


# -- logic trees ---------------------------------------------------------------

@dataclass(frozen=True)
class Leaf:
    index: int


@dataclass(frozen=True)
class Node:
    op: str  # "and" | "or"
    children: tuple

    def __post_init__(self):
        if self.op not in ("and", "or"):
            raise ValueError(f"unknown logic operator {self.op!r}")
        if len(self.children) < 2:
            raise ValueError("internal logic nodes need at least 2 children")


LogicTree = Leaf | Node


def tree_to_json(tree: LogicTree):
    if isinstance(tree, Leaf):
        return {"leaf": tree.index}
    return {"op": tree.op, "children": [tree_to_json(c) for c in tree.children]}


def tree_from_json(obj) -> LogicTree:
    if "leaf" in obj:
        return Leaf(int(obj["leaf"]))
    return Node(obj["op"], tuple(tree_from_json(c) for c in obj["children"]))


def tree_leaves(tree: LogicTree) -> list[int]:
    if isinstance(tree, Leaf):
        return [tree.index]
    out: list[int] = []
    for c in tree.children:
        out.extend(tree_leaves(c))
    return out


def _eval3(tree: LogicTree, states: Sequence[str]) -> str:
    """Three-valued evaluation: returns satisfied/violated/unknown."""
    if isinstance(tree, Leaf):
        state = states[tree.index]
        if state not in (SATISFIED, VIOLATED, UNKNOWN):
            raise ValueError(f"unknown condition state {state!r}")
        return state
    child_values = [_eval3(c, states) for c in tree.children]
    if tree.op == "and":
        if any(v == VIOLATED for v in child_values):
            return VIOLATED
        if all(v == SATISFIED for v in child_values):
            return SATISFIED
        return UNKNOWN
    if any(v == SATISFIED for v in child_values):
        return SATISFIED
    if all(v == VIOLATED for v in child_values):
        return VIOLATED
    return UNKNOWN


def oracle_decision(tree: LogicTree, states: Sequence[str], relevant: bool) -> DecisionLabel:
    """Ground-truth decision: Irrelevant for off-topic questions, otherwise the
    three-valued evaluation mapped to Yes / No / Inquire."""
    if not relevant:
        return DecisionLabel.IRRELEVANT
    value = _eval3(tree, states)
    if value == SATISFIED:
        return DecisionLabel.YES
    if value == VIOLATED:
        return DecisionLabel.NO
    return DecisionLabel.INQUIRE


def infer_logical_type(source) -> str:
    """Logical type of a rule.

    Synthetic rule specs (dicts with a "logical_type" or a stored tree) return
    their stored type. Dialog trees given as (answers, final-decision) paths
    are classified by how single answers force the final decision.
    """
    if isinstance(source, dict):
        if "logical_type" in source:
            return source["logical_type"]
        if "logic" in source:
            return type_of_tree(tree_from_json(source["logic"]))
        raise ValueError("rule spec carries neither logical_type nor logic")
    paths = list(source)
    questions = {q for path, _ in paths for q, _ in path}
    if len(questions) <= 1:
        return "simple"
    no_forces_no = all(
        final == DecisionLabel.NO
        for path, final in paths
        if any(a == "no" for _, a in path)
    )
    yes_path_all_yes = all(
        all(a == "yes" for _, a in path)
        for path, final in paths
        if final == DecisionLabel.YES
    )
    if no_forces_no and yes_path_all_yes:
        return "conjunction"
    yes_forces_yes = all(
        final == DecisionLabel.YES
        for path, final in paths
        if any(a == "yes" for _, a in path)
    )
    no_path_all_no = all(
        all(a == "no" for _, a in path)
        for path, final in paths
        if final == DecisionLabel.NO
    )
    if yes_forces_yes and no_path_all_no:
        return "disjunction"
    return "other"


def type_of_tree(tree: LogicTree) -> str:
    if isinstance(tree, Leaf):
        return "simple"
    if all(isinstance(c, Leaf) for c in tree.children):
        return "conjunction" if tree.op == "and" else "disjunction"
    return "other"


# -- rule specs and surface realization -----------------------------------------

@dataclass
class SyntheticRuleSpec:
    conditions: list[ConditionTemplate]
    logic: LogicTree
    logical_type: str
    outcome: OutcomeTemplate
    style: str  # "inline" | "bullets" | "mixed"

    def realize(self) -> str:
        clauses = [c.clause for c in self.conditions]
        outcome = self.outcome.outcome
        if self.logical_type == "simple":
            return f"You can {outcome} if {clauses[0]}."
        if self.logical_type in ("conjunction", "disjunction"):
            joiner = "and" if self.logical_type == "conjunction" else "or"
            if self.style == "bullets":
                quant = ("all of the following apply" if joiner == "and"
                         else "any of the following apply")
                lines = "\n".join(f"* {c}" for c in clauses)
                return f"You can {outcome} if {quant}:\n{lines}"
            parts = [f"if {clauses[0]}"]
            parts += [f"{joiner} if {c}" for c in clauses[1:]]
            return f"You can {outcome} " + ", ".join(parts) + "."
        # nested: first condition in-line, the inner pair as bullets
        assert isinstance(self.logic, Node)
        inner = self.logic.children[1]
        assert isinstance(inner, Node)
        if self.logic.op == "and":
            quant = ("at least one of the following applies" if inner.op == "or"
                     else "all of the following apply")
            connective = "and"
        else:
            quant = ("all of the following apply" if inner.op == "and"
                     else "at least one of the following applies")
            connective = "or"
        lines = "\n".join(f"* {self.conditions[l.index].clause}" for l in inner.children)
        return (f"You can {outcome} if {clauses[0]}, {connective} if {quant}:\n{lines}")


def _sample_type(rng: random.Random, weights: dict[str, float]) -> str:
    names = [t for t in LOGICAL_TYPES if weights.get(t, 0) > 0]
    return rng.choices(names, weights=[weights[t] for t in names], k=1)[0]


def _sample_conditions(rng: random.Random, k: int,
                       phenomenon_weights: dict[str, float]) -> list[ConditionTemplate]:
    pool = list(CONDITIONS)
    chosen: list[ConditionTemplate] = []
    for _ in range(k):
        phenomena = [p for p in PHENOMENA
                     if phenomenon_weights.get(p, 0) > 0
                     and any(c.phenomenon == p for c in pool)]
        if not phenomena:
            raise ValueError("phenomenon weights leave no conditions to sample")
        ph = rng.choices(phenomena, weights=[phenomenon_weights[p] for p in phenomena], k=1)[0]
        candidates = [c for c in pool if c.phenomenon == ph]
        pick = rng.choice(candidates)
        chosen.append(pick)
        pool.remove(pick)
    return chosen


def sample_rule_spec(rng: random.Random, config: GeneratorConfig,
                     outcome_pool: Sequence[OutcomeTemplate] | None = None
                     ) -> SyntheticRuleSpec:
    logical_type = _sample_type(rng, config.type_weights)
    if logical_type == "other" and config.max_conditions < 3:
        logical_type = "conjunction"
    if logical_type == "simple":
        k = 1
    elif logical_type == "other":
        k = 3
    else:
        k = rng.randint(2, max(2, min(3, config.max_conditions)))
    conditions = _sample_conditions(rng, k, config.phenomenon_weights)
    if logical_type == "simple":
        logic: LogicTree = Leaf(0)
        style = "inline"
    elif logical_type in ("conjunction", "disjunction"):
        logic = Node("and" if logical_type == "conjunction" else "or",
                     tuple(Leaf(i) for i in range(k)))
        style = "bullets" if rng.random() < config.bullet_fraction else "inline"
    else:
        outer = rng.choice(["and", "or"])
        inner = "or" if outer == "and" else "and"
        logic = Node(outer, (Leaf(0), Node(inner, (Leaf(1), Leaf(2)))))
        style = "mixed"
    outcome = rng.choice(list(outcome_pool) if outcome_pool else OUTCOMES)
    return SyntheticRuleSpec(conditions=conditions, logic=logic,
                             logical_type=logical_type, outcome=outcome, style=style)


# -- example generation -----------------------------------------------------------

def _simulate_dialog(tree: LogicTree, true_states: list[str], known: list[str]
                     ) -> list[int]:
    """Order of leaves a complete dialog would ask (leftmost unknown first)."""
    known = list(known)
    asked: list[int] = []
    leaves = tree_leaves(tree)
    while oracle_decision(tree, known, True) == DecisionLabel.INQUIRE:
        unknown = [i for i in leaves if known[i] == UNKNOWN]
        if not unknown:  # cannot happen: no unknowns means a decided tree
            break
        nxt = min(unknown)
        asked.append(nxt)
        known[nxt] = true_states[nxt]
    return asked


def build_rule_pool(config: GeneratorConfig) -> list[SyntheticRuleSpec]:
    """Fixed rule pool derived from the config's pool seed; train and dev
    corpora built from the same config share rule texts, matching how the
    source benchmark reuses rule texts across splits. Outcomes come from a
    bounded sub-pool so off-topic question pairs recur across examples."""
    rng = random.Random(config.rule_pool_seed)
    k = min(config.n_outcomes, len(OUTCOMES))
    outcome_pool = rng.sample(list(OUTCOMES), k)
    return [sample_rule_spec(rng, config, outcome_pool) for _ in range(config.n_rules)]


def generate_synthetic(config: GeneratorConfig, seed: int) -> list[CMRExample]:
    """Deterministic synthetic corpus with oracle-labeled decisions."""
    pool = build_rule_pool(config)
    rng = random.Random(seed)
    examples: list[CMRExample] = []
    for n in range(config.n_examples):
        spec = rng.choice(pool)
        k = len(spec.conditions)
        relevant = rng.random() >= config.irrelevant_fraction

        true_states = [SATISFIED if rng.random() < 0.6 else VIOLATED for _ in range(k)]
        revealed = [rng.random() < config.scenario_reveal_prob for _ in range(k)]
        known = [true_states[i] if revealed[i] else UNKNOWN for i in range(k)]

        scenario_parts = []
        evidence: list[HistoryTurn] = []
        for i, cond in enumerate(spec.conditions):
            if not revealed[i]:
                continue
            options = cond.entail if true_states[i] == SATISFIED else cond.contradict
            scenario_parts.append(rng.choice(options))
            evidence.append(HistoryTurn(cond.question,
                                        "yes" if true_states[i] == SATISFIED else "no"))
        scenario = " ".join(scenario_parts)

        history: list[HistoryTurn] = []
        if relevant:
            ask_order = _simulate_dialog(spec.logic, true_states, known)
            taken = 0
            while taken < len(ask_order) and rng.random() < config.history_continue_prob:
                idx = ask_order[taken]
                history.append(HistoryTurn(spec.conditions[idx].question,
                                           "yes" if true_states[idx] == SATISFIED else "no"))
                known[idx] = true_states[idx]
                taken += 1
            question = rng.choice(spec.outcome.question_forms)
        else:
            pool_outcomes = {s.outcome.key: s.outcome for s in pool}
            others = [o for key, o in sorted(pool_outcomes.items())
                      if key != spec.outcome.key]
            other = rng.choice(others) if others else spec.outcome
            question = rng.choice(other.question_forms)

        decision = oracle_decision(spec.logic, known, relevant)
        follow_up = None
        if decision == DecisionLabel.INQUIRE:
            unknown = [i for i in tree_leaves(spec.logic) if known[i] == UNKNOWN]
            follow_up = spec.conditions[min(unknown)].question

        examples.append(CMRExample(
            rule_text=spec.realize(),
            question=question,
            scenario=scenario,
            history=history,
            decision=decision,
            follow_up=follow_up,
            evidence=evidence or None,
            ids={"utterance_id": f"synth-{seed}-{n}"},
            meta={
                "logic": tree_to_json(spec.logic),
                "logical_type": spec.logical_type,
                "condition_keys": [c.key for c in spec.conditions],
                "true_states": true_states,
                "known_states": list(known),
                "relevant": relevant,
                "rule_style": spec.style,
            },
        ))
    return examples

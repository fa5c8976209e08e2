"""Shared test helpers: random model generators and independent oracles.

The minimality oracles here deliberately do not reuse the diff algorithm.
`minimal_changes` enumerates every entity keep-or-replace assignment and
counts forced slot edits, which is exhaustive over the change vocabulary at
small scale; `bfs_minimal_changes` searches the raw move space and is used
to cross-check the enumeration on tiny instances.
"""

from __future__ import annotations

from itertools import chain, combinations
from random import Random

from remis.delta import ChangeSet, SetAttr, make_changeset
from remis.model import ProcessEntity, ProcessModel, Relation
from remis.rationale import (
    Alternative,
    Assessment,
    Criterion,
    Event,
    Issue,
    RationaleLink,
    RecordStore,
    Resolution,
    replay_journal,
)

TRICKY_VALUES = [
    "",
    "Design",
    "Detailed Design",
    'say "hi"',
    "tab\there",
    "line\nbreak",
    "back\\slash",
    "criterión",
    " leading space",
    "trailing space ",
    "!none",
    "two  spaces",
    "=",
    "#not a comment",
]

DEFAULT_IDS = [f"E{i}" for i in range(1, 31)]
DEFAULT_TYPES = ["activity", "artifact", "role", "milestone"]
DEFAULT_KEYS = [f"k{i}" for i in range(1, 9)]
DEFAULT_RELS = ["follows", "produces", "consumes"]


def random_model(
    rng: Random,
    max_entities: int = 20,
    max_attrs: int = 8,
    max_relations: int = 15,
    ids: list[str] = DEFAULT_IDS,
    types: list[str] = DEFAULT_TYPES,
    keys: list[str] = DEFAULT_KEYS,
    rel_types: list[str] = DEFAULT_RELS,
    values: list[str] = TRICKY_VALUES,
) -> ProcessModel:
    n = rng.randint(0, max_entities)
    chosen = rng.sample(ids, min(n, len(ids)))
    entities = []
    for eid in chosen:
        n_attrs = rng.randint(0, max_attrs)
        attr_keys = rng.sample(keys, min(n_attrs, len(keys)))
        attrs = tuple((k, rng.choice(values)) for k in attr_keys)
        entities.append(ProcessEntity(eid, rng.choice(types), attrs))
    relations: set[tuple[str, str, str]] = set()
    if chosen:
        for _ in range(rng.randint(0, max_relations)):
            relations.add((rng.choice(rel_types), rng.choice(chosen), rng.choice(chosen)))
    return ProcessModel(tuple(entities), tuple(Relation(*t) for t in relations))


def mutate_model(rng: Random, model: ProcessModel, edits: int, **pools) -> ProcessModel:
    """Apply a number of random slot edits, keeping overlap with the input."""
    ids = pools.get("ids", DEFAULT_IDS)
    types = pools.get("types", DEFAULT_TYPES)
    keys = pools.get("keys", DEFAULT_KEYS)
    rel_types = pools.get("rel_types", DEFAULT_RELS)
    values = pools.get("values", TRICKY_VALUES)

    entities = {e.id: [e.entity_type, dict(e.attributes)] for e in model.entities}
    relations = {r.triple for r in model.relations}
    for _ in range(edits):
        move = rng.choice(["add-ent", "del-ent", "retype", "set", "del-attr", "add-rel", "del-rel"])
        if move == "add-ent":
            free = [i for i in ids if i not in entities]
            if free:
                entities[rng.choice(free)] = [rng.choice(types), {}]
        elif move == "del-ent" and entities:
            eid = rng.choice(sorted(entities))
            del entities[eid]
            relations = {t for t in relations if eid not in (t[1], t[2])}
        elif move == "retype" and entities:
            eid = rng.choice(sorted(entities))
            entities[eid][0] = rng.choice(types)
        elif move == "set" and entities:
            eid = rng.choice(sorted(entities))
            entities[eid][1][rng.choice(keys)] = rng.choice(values)
        elif move == "del-attr":
            with_attrs = [i for i in sorted(entities) if entities[i][1]]
            if with_attrs:
                eid = rng.choice(with_attrs)
                del entities[eid][1][rng.choice(sorted(entities[eid][1]))]
        elif move == "add-rel" and entities:
            pool = sorted(entities)
            relations.add((rng.choice(rel_types), rng.choice(pool), rng.choice(pool)))
        elif move == "del-rel" and relations:
            relations.discard(rng.choice(sorted(relations)))
    return ProcessModel(
        tuple(ProcessEntity(i, t, tuple(a.items())) for i, (t, a) in entities.items()),
        tuple(Relation(*t) for t in relations),
    )


def random_pair(rng: Random, **kwargs) -> tuple[ProcessModel, ProcessModel]:
    a = random_model(rng, **kwargs)
    if rng.random() < 0.3:
        return a, random_model(rng, **kwargs)
    return a, mutate_model(rng, a, rng.randint(0, 8), **{k: v for k, v in kwargs.items() if k != "max_entities"})


SMALL_POOLS = dict(
    max_entities=3,
    max_attrs=2,
    max_relations=3,
    ids=["E1", "E2", "E3"],
    types=["activity", "artifact"],
    keys=["k1", "k2"],
    rel_types=["follows", "produces"],
    values=["v1", "v2", "v3"],
)


def small_pair(rng: Random) -> tuple[ProcessModel, ProcessModel]:
    """A pair within the exhaustive-oracle bounds: tiny pools, small edit count."""
    pools = dict(SMALL_POOLS)
    a = random_model(rng, **pools)
    if rng.random() < 0.25:
        return a, random_model(rng, **pools)
    b = mutate_model(rng, a, rng.randint(0, 5),
                     **{k: v for k, v in pools.items() if not k.startswith("max_")})
    return a, b


def _powerset(items):
    items = list(items)
    return chain.from_iterable(combinations(items, n) for n in range(len(items) + 1))


def minimal_changes(a: ProcessModel, b: ProcessModel) -> int:
    """Exhaustive-enumeration optimum over the six-kind change vocabulary.

    Decisions decompose per entity id: an id present in only one model
    forces one add or one del; a retype forces a del+add replacement; an id
    kept in both can either be edited slot-by-slot (one change per
    differing attribute) or replaced wholesale (two changes, plus two for
    every surviving relation touching it, since a replaced endpoint forces
    the relation to be deleted and re-added). Changes on ids or content
    outside a and b only ever add moves, so enumerating all replacement
    subsets is exhaustive.
    """
    a_ents = {e.id: e for e in a.entities}
    b_ents = {e.id: e for e in b.entities}
    forced = 0
    replaced_always: set[str] = set()
    keep_cost: dict[str, int] = {}
    for eid in set(a_ents) | set(b_ents):
        ea, eb = a_ents.get(eid), b_ents.get(eid)
        if ea is None or eb is None:
            forced += 1
        elif ea.entity_type != eb.entity_type:
            forced += 2
            replaced_always.add(eid)
        else:
            da, db = dict(ea.attributes), dict(eb.attributes)
            slots = [k for k in set(da) | set(db) if da.get(k) != db.get(k)]
            keep_cost[eid] = len(slots)

    a_rels = {r.triple for r in a.relations}
    b_rels = {r.triple for r in b.relations}
    forced += len(a_rels ^ b_rels)
    surviving = a_rels & b_rels

    best = None
    for subset in _powerset(keep_cost):
        replaced = replaced_always | set(subset)
        cost = forced
        for eid, slot_cost in keep_cost.items():
            cost += 2 if eid in subset else slot_cost
        cost += 2 * sum(1 for t in surviving if t[1] in replaced or t[2] in replaced)
        if best is None or cost < best:
            best = cost
    return best


def level_fixture(k: int) -> tuple[ChangeSet, RecordStore]:
    """A one-change changeset with rationale exactly complete for level k.

    Complete means: passes rationale validation at every level up to k and
    fails at every level above it. The level-2 fixture carries bare-verdict
    assessments, which level 3 rejects; the level-3 fixture assesses only
    against criteria.
    """
    store = RecordStore()
    ops = [SetAttr("A1", "name", "Design", "Detailed Design")]
    if k == 0:
        links = (RationaleLink("C-1", justification="fix the imprecise activity name"),)
        return make_changeset(0, 1, ops, links), store

    if k >= 2:
        store.add(Event("EV-1", name="process audit", event_type="internal",
                        occurred_at="2026-08-01T09:00:00Z"))
    store.add(Issue(
        "IS-1",
        question="Is the design activity split finely enough?",
        issue_type="imprecision",
        triggered_by="EV-1" if k >= 2 else None,
        affected_entities=("A1",) if k >= 2 else (),
    ))
    if k >= 2:
        store.add(Alternative("AL-1", "IS-1", subject="rename and refine"))
        store.add(Alternative("AL-2", "IS-1", subject="keep as is"))
    if k == 2:
        store.add(Assessment("AS-1", "AL-1", None, 1.0))
        store.add(Assessment("AS-2", "AL-2", None, -0.5))
    if k == 3:
        store.add(Criterion("CR-1", name="clarity", weight=2.0))
        store.add(Criterion("CR-2", name="effort", weight=1.0))
        store.add(Assessment("AS-1", "AL-1", "CR-1", 1.0))
        store.add(Assessment("AS-2", "AL-1", "CR-2", -1.0))
        store.add(Assessment("AS-3", "AL-2", "CR-1", -0.25))
    store.add(Resolution(
        "RS-1",
        "IS-1",
        chosen_alternative_id="AL-1" if k >= 2 else None,
        short_description="split design",
        justification="review findings demand a finer design step",
    ))
    links = (RationaleLink("C-1", resolution_id="RS-1"),)
    return make_changeset(0, 1, ops, links), store


def _state(model_entities: dict, relations: frozenset) -> tuple:
    return (
        frozenset((eid, t, frozenset(attrs.items())) for eid, (t, attrs) in model_entities.items()),
        relations,
    )


def bfs_minimal_changes(a: ProcessModel, b: ProcessModel, cap: int) -> int | None:
    """Breadth-first search over raw moves; None if b is beyond the cap.

    The move universe is restricted to content occurring in a or b (foreign
    ids, types, keys, values, or triples would only ever be dead weight in
    a shortest sequence), which keeps the state space finite. Intended for
    tiny instances only.
    """
    ids = sorted({e.id for e in a.entities} | {e.id for e in b.entities})
    types = sorted({e.entity_type for e in a.entities} | {e.entity_type for e in b.entities})
    keys = sorted({k for e in (*a.entities, *b.entities) for k, _ in e.attributes})
    values = sorted({v for e in (*a.entities, *b.entities) for _, v in e.attributes})
    triples = sorted({r.triple for r in a.relations} | {r.triple for r in b.relations})

    attr_dicts: list[tuple[tuple[str, str], ...]] = []
    for key_subset in _powerset(keys):
        stack = [()]
        for key in key_subset:
            stack = [prefix + ((key, v),) for prefix in stack for v in values]
        attr_dicts.extend(stack)

    start = {e.id: (e.entity_type, dict(e.attributes)) for e in a.entities}
    start_rels = frozenset(r.triple for r in a.relations)
    goal = _state({e.id: (e.entity_type, dict(e.attributes)) for e in b.entities},
                  frozenset(r.triple for r in b.relations))

    frontier = [(start, start_rels)]
    seen = {_state(start, start_rels)}
    if _state(start, start_rels) == goal:
        return 0
    for depth in range(1, cap + 1):
        next_frontier = []
        for entities, relations in frontier:
            moves = []
            for t in triples:
                if t in relations:
                    moves.append(("del-rel", t))
                elif t[1] in entities and t[2] in entities:
                    moves.append(("add-rel", t))
            for eid, (etype, attrs) in entities.items():
                if not any(eid in (t[1], t[2]) for t in relations):
                    moves.append(("del-ent", eid))
                for key in keys:
                    if key in attrs:
                        moves.append(("del-attr", eid, key))
                    for v in values:
                        if attrs.get(key) != v:
                            moves.append(("set-attr", eid, key, v))
            for eid in ids:
                if eid not in entities:
                    for etype in types:
                        for attrs in attr_dicts:
                            moves.append(("add-ent", eid, etype, attrs))

            for move in moves:
                new_entities = {k: (t, dict(attrs)) for k, (t, attrs) in entities.items()}
                new_relations = relations
                if move[0] == "del-rel":
                    new_relations = relations - {move[1]}
                elif move[0] == "add-rel":
                    new_relations = relations | {move[1]}
                elif move[0] == "del-ent":
                    del new_entities[move[1]]
                elif move[0] == "del-attr":
                    del new_entities[move[1]][1][move[2]]
                elif move[0] == "set-attr":
                    new_entities[move[1]][1][move[2]] = move[3]
                else:
                    new_entities[move[1]] = (move[2], dict(move[3]))
                key = _state(new_entities, new_relations)
                if key in seen:
                    continue
                if key == goal:
                    return depth
                seen.add(key)
                next_frontier.append((new_entities, new_relations))
        frontier = next_frontier
        if not frontier:
            return None
    return None

# dyadic weights and verdicts make every product and sum exact in binary,
# so scaled scores compare with == rather than a tolerance
DYADIC_WEIGHTS = [0.25, 0.5, 1.0, 2.0, 4.0]
DYADIC_VERDICTS = [-1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0]


def ranking_store(verdicts: dict[str, dict[str, float]], weights: dict[str, float]):
    """One issue, its alternatives, and assessments, as a replayed store."""
    entries = [Issue("IS-1", question="which?")]
    entries += [Criterion(cid, weight=w) for cid, w in weights.items()]
    entries += [Alternative(alt, "IS-1") for alt in verdicts]
    n = 1
    for alt, per_criterion in verdicts.items():
        for cid, verdict in per_criterion.items():
            entries.append(Assessment(f"AS-{n}", alt, cid, verdict))
            n += 1
    return replay_journal(entries)


def random_instance(rng: Random) -> tuple[dict[str, dict[str, float]], dict[str, float]]:
    n_criteria = rng.randint(1, 6)
    n_alts = rng.randint(2, 5)
    weights = {f"CR-{i}": rng.choice(DYADIC_WEIGHTS) for i in range(1, n_criteria + 1)}
    verdicts = {}
    for i in range(1, n_alts + 1):
        per = {}
        for cid in weights:
            if rng.random() < 0.8:
                per[cid] = rng.choice(DYADIC_VERDICTS)
        verdicts[f"AL-{i}"] = per
    return verdicts, weights

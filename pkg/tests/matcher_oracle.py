"""Independent brute-force oracle for pattern matching, plus random instances.

The oracle enumerates every assignment of the rule's free variables over the
graph's term universe and checks atoms and filters directly, without touching
the engine's join machinery. Random instances keep the assignment space small
enough to enumerate exactly.
"""

import itertools
import random
from decimal import Decimal

from kgalloc.graph import Graph
from kgalloc.ontology import OrderedScale
from kgalloc.rules import Filter, PatternAtom, Rule, Variable
from kgalloc.terms import Term, Triple, ident, integer

LEVELS = (ident("L0"), ident("L1"), ident("L2"))
SCALE = OrderedScale("S", LEVELS)
SCALES = {"S": SCALE}
PREDICATES = [ident(f"p{i}") for i in range(4)]

# Free-variable budget: keep |universe| ** free enumerable.
_MAX_NODES = {1: 34, 2: 34, 3: 16, 4: 7}


def oracle_matches(rule, graph, seed, scales):
    """All bindings via exhaustive enumeration over the graph's terms."""
    universe = sorted(
        {t.subject for t in graph} | {t.object for t in graph},
        key=Term.sort_key,
    )
    free = sorted(set(rule.variables()) - set(seed), key=lambda v: v.name)
    found = []
    for combo in itertools.product(universe, repeat=len(free)):
        binding = dict(seed)
        binding.update(zip(free, combo))
        if not all(_atom_holds(a, binding, graph) for a in rule.atoms):
            continue
        if not all(_filter_holds(f, binding, scales) for f in rule.filters):
            continue
        found.append(binding)
    return found


def _atom_holds(atom, binding, graph: Graph) -> bool:
    subject = binding[atom.subject] if isinstance(atom.subject, Variable) else atom.subject
    obj = binding[atom.object] if isinstance(atom.object, Variable) else atom.object
    return bool(graph.lookup(subject=subject, predicate=atom.predicate, object=obj))


def _filter_holds(f: Filter, binding, scales) -> bool:
    left = binding[f.left]
    right = binding[f.right] if isinstance(f.right, Variable) else f.right
    if f.op == "eq":
        return left == right
    if f.op == "neq":
        return left != right
    if f.op in ("numGreaterEq", "numLess"):
        values = []
        for term in (left, right):
            if term.kind == "int":
                values.append(Decimal(term.value))
            elif term.kind == "dec":
                values.append(term.value)
            else:
                return False
        return values[0] >= values[1] if f.op == "numGreaterEq" else values[0] < values[1]
    scale = scales[f.scale]
    if left not in scale.levels or right not in scale.levels:
        return False
    li = scale.levels.index(left)
    ri = scale.levels.index(right)
    return li >= ri if f.op == "scaleGreaterEq" else li < ri


def binding_set(matches_or_bindings):
    out = set()
    for m in matches_or_bindings:
        binding = m.binding if hasattr(m, "binding") else m
        out.add(frozenset(binding.items()))
    return out


def random_instance(rng: random.Random):
    """A random (rule, graph, seed) triple with an enumerable search space."""
    free_target = rng.randint(1, 4)
    n_nodes = rng.randint(2, _MAX_NODES[free_target])
    nodes = [ident(f"n{i}") for i in range(n_nodes)] + list(LEVELS)
    literals = [integer(v) for v in (1, 2, 3)]

    n_triples = rng.randint(1, 3 * n_nodes)
    graph = Graph()
    for _ in range(n_triples):
        obj = rng.choice(literals) if rng.random() < 0.15 else rng.choice(nodes)
        graph.add(Triple(rng.choice(nodes), rng.choice(PREDICATES), obj))

    variables = [Variable(name) for name in ("t", "r", "x", "y", "z")[: rng.randint(2, 5)]]
    atoms = []
    for _ in range(rng.randint(1, 5)):
        subject = (
            rng.choice(variables) if rng.random() < 0.7 else rng.choice(nodes)
        )
        if rng.random() < 0.7:
            obj = rng.choice(variables)
        else:
            obj = rng.choice(literals) if rng.random() < 0.2 else rng.choice(nodes)
        atoms.append(PatternAtom(subject, rng.choice(PREDICATES), obj))
    atoms = _ensure_focus(atoms, rng)

    pattern_vars = set()
    for atom in atoms:
        pattern_vars |= atom.variables()

    filters = []
    for _ in range(rng.randint(0, 2)):
        op = rng.choice(
            ["eq", "neq", "numGreaterEq", "numLess", "scaleGreaterEq", "scaleLess"]
        )
        left = rng.choice(sorted(pattern_vars, key=lambda v: v.name))
        if rng.random() < 0.5 and len(pattern_vars) > 1:
            right = rng.choice(sorted(pattern_vars, key=lambda v: v.name))
        elif op in ("scaleGreaterEq", "scaleLess"):
            right = rng.choice(LEVELS)
        elif op in ("numGreaterEq", "numLess"):
            right = rng.choice(literals)
        else:
            right = rng.choice(nodes)
        scale = "S" if op in ("scaleGreaterEq", "scaleLess") else None
        filters.append(Filter(op=op, left=left, right=right, scale=scale))

    rule = Rule(
        id="random",
        task_var=Variable("t"),
        resource_var=Variable("r"),
        atoms=atoms,
        filters=filters,
        message="",
    )

    universe = {t.subject for t in graph} | {t.object for t in graph}
    seed = {}
    ordered_vars = sorted(rule.variables(), key=lambda v: v.name)
    while len(ordered_vars) - len(seed) > free_target:
        var = ordered_vars[len(seed)]
        seed[var] = _seed_value(rng, universe, nodes)
    for var in ordered_vars:
        if var not in seed and rng.random() < 0.2:
            seed[var] = _seed_value(rng, universe, nodes)
    return rule, graph, seed


def _ensure_focus(atoms, rng):
    # ?t goes into a subject slot, ?r into an object slot, so the two
    # patches can never clobber each other.
    def vars_of():
        out = set()
        for atom in atoms:
            out |= atom.variables()
        return out

    if Variable("t") not in vars_of():
        i = rng.randrange(len(atoms))
        atoms[i] = PatternAtom(Variable("t"), atoms[i].predicate, atoms[i].object)
    if Variable("r") not in vars_of():
        j = rng.randrange(len(atoms))
        atoms[j] = PatternAtom(atoms[j].subject, atoms[j].predicate, Variable("r"))
        if Variable("t") not in vars_of():
            # The ?r patch clobbered the only ?t (a pool placement in an
            # object slot); rebuild that atom with both focus variables.
            atoms[j] = PatternAtom(Variable("t"), atoms[j].predicate, Variable("r"))
    return atoms


def _seed_value(rng, universe, nodes):
    if universe and rng.random() < 0.9:
        return rng.choice(sorted(universe, key=Term.sort_key))
    return rng.choice(nodes)

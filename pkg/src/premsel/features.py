"""Formula features: symbol and subterm bags, interning, IDF weighting.

A formula contributes `sym:<s>` features for every non-variable symbol
occurrence and `trm:<t>` features for every atom and subterm, printed
with all variables renamed to `A0`.  Optionally, `trmV:<t>` features
keep the original variable names for terms that contain at least one
variable.  Bare variables on their own contribute nothing.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

from . import fol

SCHEME_BINARY_IDF = "binary-idf"
SCHEME_TF_IDF = "tf-idf"
SCHEME_BINARY = "binary"
SCHEMES = (SCHEME_BINARY_IDF, SCHEME_TF_IDF, SCHEME_BINARY)

SYM_PREFIX = "sym:"
TRM_PREFIX = "trm:"
TRMV_PREFIX = "trmV:"


class GeneralizationError(ValueError):
    """A symbol passed as a local constant occurs with nonzero arity."""


class FeatureInterner:
    """Bijective feature-string <-> dense-id map.

    Lookups are safe under the GIL; insertions take a lock so concurrent
    extraction over a shared interner stays consistent.
    """

    def __init__(self):
        self._ids: dict[str, int] = {}
        self._names: list[str] = []
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._names)

    def intern(self, name: str) -> int:
        fid = self._ids.get(name)
        if fid is not None:
            return fid
        with self._lock:
            fid = self._ids.get(name)
            if fid is None:
                fid = len(self._names)
                self._names.append(name)
                self._ids[name] = fid
            return fid

    def lookup(self, name: str) -> int | None:
        return self._ids.get(name)

    def name(self, fid: int) -> str:
        return self._names[fid]

    def names(self) -> list[str]:
        return list(self._names)

    def intern_bag(self, strings: dict[str, int]) -> dict[int, int]:
        return {self.intern(s): c for s, c in strings.items()}


def _term_strings(root: fol.Term, cache: dict) -> None:
    """Fill cache[t] = (normalized print, original print, contains-variable)."""
    stack = [root]
    while stack:
        node = stack[-1]
        if node in cache:
            stack.pop()
            continue
        pending = [a for a in node.args if a not in cache]
        if pending:
            stack.extend(pending)
            continue
        stack.pop()
        if node.is_var:
            cache[node] = ("A0", node.head, True)
        elif node.args:
            parts = [cache[a] for a in node.args]
            norm = f"{node.head}({','.join(p[0] for p in parts)})"
            orig = f"{node.head}({','.join(p[1] for p in parts)})"
            cache[node] = (norm, orig, any(p[2] for p in parts))
        else:
            cache[node] = (node.head, node.head, False)


def _emit_term(root: fol.Term, bag: dict[str, int], cache: dict,
               include_original_vars: bool) -> None:
    _term_strings(root, cache)
    stack = [root]
    while stack:
        node = stack.pop()
        if node.is_var:
            continue
        norm, orig, has_var = cache[node]
        bag[TRM_PREFIX + norm] = bag.get(TRM_PREFIX + norm, 0) + 1
        if include_original_vars and has_var:
            bag[TRMV_PREFIX + orig] = bag.get(TRMV_PREFIX + orig, 0) + 1
        key = SYM_PREFIX + node.head
        bag[key] = bag.get(key, 0) + 1
        stack.extend(node.args)


def extract_feature_strings(f: fol.Formula,
                            include_original_vars: bool = False) -> dict[str, int]:
    """Feature-string bag of a formula (counts are occurrence counts)."""
    bag: dict[str, int] = {}
    cache: dict = {}
    stack = [f]
    while stack:
        node = stack.pop()
        if node.kind == fol.ATOM:
            _emit_term(node.atom, bag, cache, include_original_vars)
        elif node.kind == fol.EQ:
            _term_strings(node.left, cache)
            _term_strings(node.right, cache)
            ln, lo, lv = cache[node.left]
            rn, ro, rv = cache[node.right]
            key = f"{TRM_PREFIX}=({ln},{rn})"
            bag[key] = bag.get(key, 0) + 1
            if include_original_vars and (lv or rv):
                key = f"{TRMV_PREFIX}=({lo},{ro})"
                bag[key] = bag.get(key, 0) + 1
            for side in (node.left, node.right):
                if not side.is_var:
                    _emit_term(side, bag, cache, include_original_vars)
        else:
            stack.extend(node.children)
    return bag


def extract_features(f: fol.Formula, interner: FeatureInterner,
                     include_original_vars: bool = False) -> dict[int, int]:
    """Interned feature bag of a formula."""
    return interner.intern_bag(extract_feature_strings(f, include_original_vars))


# ---------------------------------------------------------------------------
# Local-constant generalization


def generalize_local_constants(f: fol.Formula, local_symbols) -> fol.Formula:
    """Replace each local constant by one fresh variable, consistently.

    Raises GeneralizationError if any symbol in `local_symbols` occurs
    with arity > 0 in the formula.
    """
    locals_ = set(local_symbols)
    if not locals_:
        return f

    used_vars: set[str] = set()

    def scan_term(t: fol.Term):
        stack = [t]
        while stack:
            node = stack.pop()
            if node.is_var:
                used_vars.add(node.head)
            elif node.head in locals_ and node.args:
                raise GeneralizationError(
                    f"local constant {node.head!r} occurs with arity "
                    f"{len(node.args)}"
                )
            stack.extend(node.args)

    stack = [f]
    while stack:
        node = stack.pop()
        used_vars.update(node.bound)
        if node.kind == fol.ATOM:
            scan_term(node.atom)
        elif node.kind == fol.EQ:
            scan_term(node.left)
            scan_term(node.right)
        else:
            stack.extend(node.children)

    mapping: dict[str, str] = {}
    for sym in sorted(locals_):
        fresh = "V" + sym
        while fresh in used_vars:
            fresh += "x"
        used_vars.add(fresh)
        mapping[sym] = fresh

    def rewrite_term(t: fol.Term) -> fol.Term:
        if t.is_var:
            return t
        if not t.args:
            fresh = mapping.get(t.head)
            return fol.var(fresh) if fresh else t
        return fol.Term(t.head, tuple(rewrite_term(a) for a in t.args))

    def rewrite(node: fol.Formula) -> fol.Formula:
        if node.kind == fol.ATOM:
            return fol.Formula(fol.ATOM, atom=rewrite_term(node.atom))
        if node.kind == fol.EQ:
            return fol.Formula(fol.EQ, left=rewrite_term(node.left),
                               right=rewrite_term(node.right))
        return fol.Formula(node.kind,
                           tuple(rewrite(c) for c in node.children),
                           bound=node.bound)

    return rewrite(f)


def extract_with_generalized(f: fol.Formula, local_symbols,
                             interner: FeatureInterner,
                             include_original_vars: bool = False) -> dict[int, int]:
    """Bag of f merged (count-additively) with its generalized variant's bag."""
    bag = extract_feature_strings(f, include_original_vars)
    locals_ = set(local_symbols)
    if locals_:
        extra = extract_feature_strings(
            generalize_local_constants(f, locals_), include_original_vars
        )
        for key, count in extra.items():
            bag[key] = bag.get(key, 0) + count
    return interner.intern_bag(bag)


# ---------------------------------------------------------------------------
# IDF


@dataclass
class IdfTable:
    """Document count and per-feature document frequency.

    Features absent from the table are weighted as if their document
    frequency were 1, so unseen query features get the maximum weight.
    """

    n_docs: int
    df: dict[int, int] = field(default_factory=dict)

    def weight(self, fid: int) -> float:
        return math.log(self.n_docs / self.df.get(fid, 1))


def build_idf(bags) -> IdfTable:
    """IDF table over a non-empty list of feature bags: w = ln(N / df)."""
    bags = list(bags)
    if not bags:
        raise ValueError("cannot build an IDF table from zero documents")
    df: dict[int, int] = {}
    for bag in bags:
        for fid in bag:
            df[fid] = df.get(fid, 0) + 1
    return IdfTable(len(bags), df)


def weigh(bag: dict[int, int], idf: IdfTable, scheme: str) -> dict[int, float]:
    """Sparse weight vector for a bag; zero-weight features are dropped."""
    if scheme == SCHEME_BINARY:
        return {fid: 1.0 for fid in bag}
    if scheme == SCHEME_BINARY_IDF:
        out = {fid: idf.weight(fid) for fid in bag}
    elif scheme == SCHEME_TF_IDF:
        out = {fid: count * idf.weight(fid) for fid, count in bag.items()}
    else:
        raise ValueError(f"unknown weighting scheme {scheme!r}")
    return {fid: w for fid, w in out.items() if w != 0.0}


def dump_features(names, bags, interner: FeatureInterner) -> str:
    """Debug dump: one `name TAB feature:count,...` line per formula,
    features ordered by interning id."""
    lines = []
    for name, bag in zip(names, bags):
        items = ",".join(
            f"{interner.name(fid)}:{bag[fid]}" for fid in sorted(bag)
        )
        lines.append(f"{name}\t{items}")
    return "\n".join(lines) + ("\n" if lines else "")

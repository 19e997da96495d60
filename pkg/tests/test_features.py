import math
import random
import string

import pytest

from premsel import fol
from premsel.features import (
    FeatureInterner,
    GeneralizationError,
    build_idf,
    dump_features,
    extract_feature_strings,
    extract_features,
    extract_with_generalized,
    generalize_local_constants,
    weigh,
)

from genast import random_annotated


class TestExtraction:
    def test_atom_with_function(self):
        f = fol.parse_formula("q(f(X,a))")
        assert extract_feature_strings(f) == {
            "sym:q": 1,
            "sym:f": 1,
            "sym:a": 1,
            "trm:q(f(A0,a))": 1,
            "trm:f(A0,a)": 1,
            "trm:a": 1,
        }

    def test_ground_atom_original_vars_no_effect(self):
        f = fol.parse_formula("p(a)")
        assert extract_feature_strings(f, True) == extract_feature_strings(f)

    def test_quantified_atom(self):
        f = fol.parse_formula("![X,Y]: r(X,Y)")
        assert extract_feature_strings(f) == {"sym:r": 1, "trm:r(A0,A0)": 1}
        assert extract_feature_strings(f, True) == {
            "sym:r": 1,
            "trm:r(A0,A0)": 1,
            "trmV:r(X,Y)": 1,
        }

    def test_occurrence_counts(self):
        f = fol.parse_formula("q(a,a) & p(a)")
        bag = extract_feature_strings(f)
        assert bag["sym:a"] == 3
        assert bag["trm:a"] == 3
        assert bag["sym:q"] == 1

    def test_equality_features(self):
        f = fol.parse_formula("![X]: (f(X) = a)")
        bag = extract_feature_strings(f)
        assert bag == {
            "trm:=(f(A0),a)": 1,
            "sym:f": 1,
            "sym:a": 1,
            "trm:f(A0)": 1,
            "trm:a": 1,
        }

    def test_bare_variable_equality_sides(self):
        f = fol.parse_formula("![X,Y]: (X = Y)")
        assert extract_feature_strings(f) == {"trm:=(A0,A0)": 1}

    def test_dollar_atom(self):
        f = fol.parse_formula("$true")
        assert extract_feature_strings(f) == {"sym:$true": 1, "trm:$true": 1}

    def test_rename_invariance(self):
        f1 = fol.parse_formula("![X,Y]: (p(X) => q(X,f(Y)))")
        f2 = fol.parse_formula("![U,W]: (p(U) => q(U,f(W)))")
        assert extract_feature_strings(f1) == extract_feature_strings(f2)
        assert extract_feature_strings(f1, True) != extract_feature_strings(f2, True)

    def test_rename_invariance_random(self):
        rng = random.Random(7)
        for i in range(200):
            f = random_annotated(rng, f"t{i}").body
            renamed = _rename_vars(f, lambda v: "Z" + v)
            assert extract_feature_strings(f) == extract_feature_strings(renamed)


def _rename_vars(f, ren):
    def term(t):
        if t.is_var:
            return fol.var(ren(t.head))
        return fol.Term(t.head, tuple(term(a) for a in t.args))

    if f.kind == fol.ATOM:
        return fol.Formula(fol.ATOM, atom=term(f.atom))
    if f.kind == fol.EQ:
        return fol.Formula(fol.EQ, left=term(f.left), right=term(f.right))
    return fol.Formula(
        f.kind,
        tuple(_rename_vars(c, ren) for c in f.children),
        bound=tuple(ren(v) for v in f.bound),
    )


class TestGeneralization:
    def test_single_constant(self):
        f = fol.parse_formula("p(c1)")
        g = generalize_local_constants(f, {"c1"})
        assert g == fol.parse_formula("![Vc1]: p(Vc1)").children[0]
        assert "trm:p(A0)" in extract_feature_strings(g)

    def test_empty_locals_identity(self):
        f = fol.parse_formula("p(a)")
        assert generalize_local_constants(f, set()) is f

    def test_repeated_constant_consistent(self):
        f = fol.parse_formula("q(c1,c1)")
        g = generalize_local_constants(f, {"c1"})
        assert g.atom.args[0] == g.atom.args[1]
        assert g.atom.args[0].is_var
        assert extract_feature_strings(g) == {"sym:q": 1, "trm:q(A0,A0)": 1}

    def test_arity_violation(self):
        f = fol.parse_formula("p(c1(a))")
        with pytest.raises(GeneralizationError):
            generalize_local_constants(f, {"c1"})

    def test_fresh_name_avoids_capture(self):
        f = fol.parse_formula("![Vc1]: q(Vc1,c1)")
        g = generalize_local_constants(f, {"c1"})
        new_var = g.children[0].atom.args[1]
        assert new_var.is_var and new_var.head != "Vc1"

    def test_merged_bag(self):
        interner = FeatureInterner()
        f = fol.parse_formula("p(c1)")
        bag = extract_with_generalized(f, {"c1"}, interner)
        names = {interner.name(fid): c for fid, c in bag.items()}
        assert names == {
            "sym:p": 2,
            "sym:c1": 1,
            "trm:p(c1)": 1,
            "trm:c1": 1,
            "trm:p(A0)": 1,
        }


class TestInterner:
    def test_bijection_random_strings(self):
        rng = random.Random(3)
        interner = FeatureInterner()
        seen: dict[str, int] = {}
        alphabet = string.ascii_letters + string.digits
        for _ in range(10**6):
            s = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 12)))
            fid = interner.intern(s)
            if s in seen:
                assert fid == seen[s]
            else:
                seen[s] = fid
        assert len(interner) == len(seen)
        assert sorted(seen.values()) == list(range(len(seen)))

    def test_lookup_and_name(self):
        interner = FeatureInterner()
        fid = interner.intern("sym:p")
        assert interner.lookup("sym:p") == fid
        assert interner.lookup("sym:q") is None
        assert interner.name(fid) == "sym:p"


class TestIdf:
    def test_feature_in_all_docs(self):
        idf = build_idf([{0: 1}, {0: 2}, {0: 1}, {0: 1}])
        assert idf.weight(0) == 0.0

    def test_feature_in_one_doc(self):
        idf = build_idf([{0: 1}, {1: 1}, {1: 1}, {1: 1}])
        assert idf.weight(0) == pytest.approx(math.log(4), abs=1e-12)

    def test_unseen_feature_fallback(self):
        idf = build_idf([{0: 1}] * 4)
        assert idf.weight(42) == pytest.approx(math.log(4), abs=1e-12)

    def test_monotonicity(self):
        rng = random.Random(11)
        bags = [
            {fid: 1 for fid in rng.sample(range(30), rng.randint(1, 10))}
            for _ in range(50)
        ]
        idf = build_idf(bags)
        seen = sorted(idf.df.items(), key=lambda kv: kv[1])
        for (f1, d1), (f2, d2) in zip(seen, seen[1:]):
            if d1 < d2:
                assert idf.weight(f1) > idf.weight(f2)

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            build_idf([])


class TestWeigh:
    def test_zero_weight_dropped(self):
        idf = build_idf([{0: 1}, {0: 1}])  # df == N -> weight 0
        assert weigh({0: 2}, idf, "binary-idf") == {}

    def test_tf_idf(self):
        idf = IdfTableStub(1.5)
        assert weigh({0: 2}, idf, "tf-idf") == {0: 3.0}

    def test_binary(self):
        idf = build_idf([{0: 1}])
        assert weigh({0: 2}, idf, "binary") == {0: 1.0}

    def test_unknown_scheme(self):
        idf = build_idf([{0: 1}])
        with pytest.raises(ValueError):
            weigh({0: 1}, idf, "bm25")


class IdfTableStub:
    def __init__(self, w):
        self._w = w

    def weight(self, fid):
        return self._w


class TestDump:
    def test_dump_format(self):
        interner = FeatureInterner()
        f1 = fol.parse_formula("p(a)")
        f2 = fol.parse_formula("q(b)")
        bags = [extract_features(f1, interner), extract_features(f2, interner)]
        text = dump_features(["n1", "n2"], bags, interner)
        lines = text.splitlines()
        expected = ",".join(f"{interner.name(fid)}:1" for fid in sorted(bags[0]))
        assert lines[0] == f"n1\t{expected}"
        assert lines[1].startswith("n2\t")

"""Parser, serializer and validation tests."""

import random

import pytest

from fdconfig import model as fm
from fdconfig import parse_model, serialize_model, validate
from fdconfig.errors import ParseError

from oracle import random_model


def test_m1_shape(m1):
    assert len(m1.features) == 5
    assert len(m1.attributes) == 1
    assert len(m1.cross_constraints) == 1
    assert m1.root == "Phone"
    assert m1.features["Screen"].parent == "Phone"
    assert m1.features["Screen"].relations == (fm.Relation("xor", ("Basic", "HD")),)
    a = m1.attributes["price"]
    assert (a.owner, a.lo, a.hi) == ("GPS", 1, 3)
    assert m1.cross_constraints[0] == fm.Implies(fm.FeatureRef("HD"),
                                                 fm.FeatureRef("GPS"))


def test_minimal_model():
    m = parse_model("feature Root {}")
    assert len(m.features) == 1
    assert not m.attributes
    assert not m.cross_constraints


def test_duplicate_name_rejected():
    with pytest.raises(ParseError):
        parse_model("feature Root { mandatory Root }")
    with pytest.raises(ParseError):
        parse_model("feature A {}\nfeature A {}")


def test_feature_order_is_preorder(m1):
    assert m1.feature_order() == ["Phone", "Screen", "Basic", "HD", "GPS"]


@pytest.mark.parametrize("text", [
    "feature",                               # truncated
    "feature A { mandatory }",               # missing child name
    "feature A { or { B } }",                # group of one
    "feature A {} feature B {}",             # B never a child
    "feature A { optional B } feature B { optional A }",  # B child? A reused
    "feature A { optional B optional B }",   # duplicate child
    "attribute X.p : int[1..3]",             # no features at all
    "feature A {}\nattribute B.p : int[1..3]",  # unknown owner
    "feature A {}\nattribute A.p : int[3..1]",  # empty attr domain
    "feature A {}\nattribute A.p : int[0..2000000]",  # oversized domain
    "feature A {}\nconstraint B",            # unknown feature ref
    "feature A {}\nconstraint A.x = 1",      # unknown attribute
    "feature A {}\nconstraint A + 1",        # int at Boolean position
    "feature A {}\nconstraint A = true",     # bool at integer position
    "feature A {}\nconstraint 1 +",          # dangling operator
    "feature A {}\nconstraint (A",           # unclosed paren
    "feature A {}\nattribute A.p : int[1..3]\nattribute A.p : int[1..3]",
    "feature A { optional int }",            # keyword as name
    "feature A {} $",                        # stray character
])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_model(text)


def test_parse_error_carries_position():
    try:
        parse_model("feature A {\n  mandatory ]\n}")
    except ParseError as exc:
        assert exc.line == 2
        assert exc.col > 0
    else:
        pytest.fail("expected ParseError")


def test_cycle_detected():
    text = """
    feature R {}
    feature A { mandatory B }
    feature B { mandatory A }
    """
    with pytest.raises(ParseError):
        parse_model(text)


def test_attr_feature_name_collision():
    with pytest.raises(ParseError):
        parse_model("feature A { optional B }\nattribute A.B : int[1..2]")


def test_comments_and_whitespace():
    m = parse_model("// header\nfeature A { // trailing\n optional B\n}\n")
    assert set(m.features) == {"A", "B"}


def test_roundtrip_m1(m1):
    assert parse_model(serialize_model(m1)) == m1


def test_roundtrip_minimal():
    text = serialize_model(parse_model("feature Root {}"))
    assert text == "feature Root {}\n"


def test_roundtrip_all_expression_kinds():
    text = """
    feature A { optional B optional C }
    attribute B.x : int[-2..4]
    attribute C.y : int[0..5]
    constraint (B && C) || !A
    constraint B => (C <=> A)
    constraint B.x + 2 * C.y - 3 <= 7
    constraint -B.x * (C.y + 1) != 4
    constraint B.x < 2 && B.x >= -1 || true
    constraint (A => B) => C
    constraint 1 + (2 + B.x) = 3
    """
    m = parse_model(text)
    assert parse_model(serialize_model(m)) == m


def test_roundtrip_random_models():
    rng = random.Random(42)
    for _ in range(120):
        m = random_model(rng)
        assert validate(m) == []
        again = parse_model(serialize_model(m))
        assert again == m, serialize_model(m)


def test_fuzz_never_crashes():
    rng = random.Random(99)
    alphabet = "feature attribute constraint mandatory optional or xor " \
               "{ } [ ] ( ) , : .. . => <=> && || ! = != < <= > >= + - * " \
               "A B int 1 23 true false \n"
    pieces = alphabet.split(" ")
    for _ in range(400):
        text = " ".join(rng.choice(pieces) for _ in range(rng.randint(1, 40)))
        try:
            parse_model(text)
        except ParseError:
            pass  # the only acceptable failure


def test_validate_clean_m1(m1):
    assert validate(m1) == []


def test_validate_group_too_small():
    f = {"A": fm.Feature("A", "A", None, (fm.Relation("or", ("B",)),)),
         "B": fm.Feature("B", "B", "A")}
    m = fm.FeatureModel("A", f, {}, ())
    codes = {d.code for d in validate(m)}
    assert "GroupTooSmall" in codes


def test_validate_empty_attr_domain():
    f = {"A": fm.Feature("A", "A", None)}
    attrs = {"p": fm.Attribute("p", "A", "p", 5, 2)}
    m = fm.FeatureModel("A", f, attrs, ())
    codes = {d.code for d in validate(m)}
    assert "EmptyAttributeDomain" in codes


def test_validate_non_tree():
    f = {"A": fm.Feature("A", "A", None, (fm.Relation("optional", ("B",)),)),
         "B": fm.Feature("B", "B", "A", (fm.Relation("optional", ("B",)),))}
    m = fm.FeatureModel("A", f, {}, ())
    assert any(d.code == "NonTree" for d in validate(m))


def test_validate_type_error():
    f = {"A": fm.Feature("A", "A", None)}
    m = fm.FeatureModel("A", f, {}, (fm.Add(fm.IntLit(1), fm.IntLit(2)),))
    assert any(d.code == "TypeError" for d in validate(m))


def test_validate_expr_too_deep():
    e = fm.FeatureRef("A")
    for _ in range(70):
        e = fm.Not(e)
    f = {"A": fm.Feature("A", "A", None)}
    m = fm.FeatureModel("A", f, {}, (e,))
    assert any(d.code == "ExprTooDeep" for d in validate(m))

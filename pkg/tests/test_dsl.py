import pytest
from hypothesis import given, strategies as st

from lpsram.array import AddressOrder
from lpsram.defects import TechnologyProfile
from lpsram.dsl import (
    BUILTIN_NAMES,
    OPS,
    Iddq,
    Lpm,
    MarchElement,
    Nm,
    Res,
    builtin,
    cost_estimate,
    format_program,
    parse_program,
)
from lpsram.errors import ParseError

ASC, DESC, ANY = AddressOrder.ASCENDING, AddressOrder.DESCENDING, AddressOrder.ANY


def test_parse_march():
    p = parse_program("^(w0); ^(r0,w1); v(r1,w0); b(r0)")
    assert p.items == (
        MarchElement(ASC, ("w0",)),
        MarchElement(ASC, ("r0", "w1")),
        MarchElement(DESC, ("r1", "w0")),
        MarchElement(ANY, ("r0",)),
    )


def test_parse_lpr():
    p = parse_program("^(w0); lpm; nm; ^(r0); ^(w1); lpm; nm; ^(r1)")
    assert p.items[1:3] == (Lpm(), Nm())
    assert p == builtin("lpr")


def test_unicode_arrows_and_comments():
    text = """
    # classic MATS+
    ⇑(w0);   ⇑(r0, w1)   # up
    ; ⇓(r1,w0)
    ; ⇕(r) ;
    """
    assert format_program(parse_program(text)) == "^(w0); ^(r0,w1); v(r1,w0); b(r)"


def test_static_iddq_in_lpm():
    with pytest.raises(ParseError) as exc:
        parse_program("^(w0); iddq; lpm; iddq")
    assert exc.value.item == 3


def test_syntax_error_position():
    with pytest.raises(ParseError) as exc:
        parse_program("^(w0,x1)")
    assert (exc.value.line, exc.value.column) == (1, 6)
    assert "'x1'" in str(exc.value)


def test_syntax_error_second_line():
    with pytest.raises(ParseError) as exc:
        parse_program("^(w0);\n  res(0)")
    assert (exc.value.line, exc.value.column) == (2, 7)


@pytest.mark.parametrize("text,item", [
    ("nm", 0),
    ("^(w0); lpm; lpm", 2),
    ("lpm; ^(r0)", 1),
    ("lpm; res(4)", 1),
])
def test_static_errors(text, item):
    with pytest.raises(ParseError) as exc:
        parse_program(text)
    assert exc.value.item == item


def test_format_normalizes():
    assert format_program(parse_program("^( w0 );LPM;  NM")) == "^(w0); lpm; nm"
    assert format_program(parse_program("V(R1 ,W0);RES( 12 )")) == "v(r1,w0); res(12)"


def test_format_keeps_op_order():
    assert format_program(parse_program("^(r1,w0,r0,w1,r)")) == "^(r1,w0,r0,w1,r)"


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_builtins_round_trip(name):
    p = builtin(name)
    text = format_program(p)
    assert parse_program(text) == p
    assert format_program(parse_program(text)) == text


def test_builtin_unknown():
    with pytest.raises(KeyError):
        builtin("march_c")


def test_march_raw_has_adjacent_pairs():
    p = builtin("march_raw")
    pairs = {(a, b) for el in p.elements for a, b in zip(el.ops, el.ops[1:])}
    assert ("w0", "r0") in pairs and ("w1", "r1") in pairs


def test_res_stress_exceeds_k(profile):
    ns = [it.n for it in builtin("res").items if isinstance(it, Res)]
    assert ns and all(n > profile.res_k for n in ns)


@pytest.mark.parametrize("name,rows,cols,ops,cycles", [
    ("march_basic", 4, 4, 96, 96),
    ("lpr", 4, 4, 64, 200_064),
    ("iddq", 1, 1, 2, 2_002),
    ("march_raw", 4, 4, 224, 224),
    ("res", 2, 3, 4 * 6 + 2 * 6 * 98, 4 * 6 + 2 * 6 * 98),
])
def test_cost_estimate(name, rows, cols, ops, cycles, profile):
    c = cost_estimate(builtin(name), rows, cols, profile)
    assert (c.op_count, c.cycles) == (ops, cycles)
    assert c.cycles == c.op_count + c.lpm_dwells * profile.t_lpm + c.iddq_measures * profile.t_iddq


# ---------------------------------------------------------------------------
# generated programs

op = st.sampled_from(OPS)
element = st.builds(MarchElement, st.sampled_from(list(AddressOrder)),
                    st.lists(op, min_size=1, max_size=6).map(tuple))
nm_item = st.one_of(element, st.just(Iddq()), st.builds(Res, st.integers(1, 500)))


@st.composite
def programs(draw):
    """Valid item sequences: NM items, optionally bracketed by lpm/nm pairs."""
    items = []
    for _ in range(draw(st.integers(1, 8))):
        if draw(st.booleans()):
            items += [Lpm(), Nm()]
        else:
            items.append(draw(nm_item))
    return items


def _spellings(items, draw):
    spell = {ASC: ["^", "⇑"], DESC: ["v", "V", "⇓"], ANY: ["b", "B", "⇕"]}
    parts = []
    for it in items:
        if isinstance(it, MarchElement):
            ops = [o.upper() if draw(st.booleans()) else o for o in it.ops]
            parts.append(draw(st.sampled_from(spell[it.order])) + "( " + " ,".join(ops) + ")")
        elif isinstance(it, Res):
            parts.append(f"Res( {it.n})")
        else:
            parts.append(draw(st.sampled_from([type(it).__name__.lower(), type(it).__name__.upper()])))
    sep = draw(st.sampled_from([";", " ; ", ";\n", "; # note\n"]))
    return sep.join(parts) + draw(st.sampled_from(["", ";", " \n"]))


@given(programs(), st.data())
def test_round_trip_generated(items, data):
    text = _spellings(items, data.draw)
    p = parse_program(text)
    assert p.items == tuple(items)
    canon = format_program(p)
    assert parse_program(canon) == p
    assert format_program(parse_program(canon)) == canon


def test_lpr_costs_more_than_march_raw(profile):
    for n in (1, 16, 256, 4096):
        assert cost_estimate(builtin("lpr"), 1, n, profile).cycles > \
            cost_estimate(builtin("march_raw"), 1, n, profile).cycles


def test_custom_profile_costs():
    prof = TechnologyProfile(t_lpm=7, t_iddq=3)
    assert cost_estimate(builtin("lpr"), 1, 1, prof).cycles == 4 + 14
    assert cost_estimate(builtin("iddq"), 1, 1, prof).cycles == 2 + 6

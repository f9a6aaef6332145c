import pytest

from ocpgraph.dtd import AttrKind, parse_dtd
from ocpgraph.errors import DtdSyntaxError, DuplicateIdAttr


def test_pcdata_with_attributes():
    dtd = parse_dtd('<!ELEMENT river (#PCDATA)>\n'
                    '<!ATTLIST river id ID #REQUIRED length CDATA #IMPLIED>')
    river = dtd["river"]
    assert river.has_pcdata and river.child_types == ()
    assert river.attributes == [("id", AttrKind.ID), ("length", AttrKind.PLAIN)]
    assert river.id_attribute == "id" and river.reference_attributes == []


def test_idrefs():
    dtd = parse_dtd("<!ELEMENT confluence EMPTY>\n<!ATTLIST confluence rivers IDREFS #REQUIRED>")
    assert dtd["confluence"].attr_kind("rivers") is AttrKind.IDREFS
    assert dtd["confluence"].reference_attributes == ["rivers"]


def test_content_model_flattening():
    dtd = parse_dtd("<!ELEMENT country (province*, economy?)>"
                    "<!ELEMENT province EMPTY><!ELEMENT economy EMPTY>")
    assert set(dtd["country"].child_types) == {"province", "economy"}
    assert not dtd["country"].has_pcdata


def test_nested_groups_and_mixed_content():
    dtd = parse_dtd("<!ELEMENT a ((b | c)+, (d, b)*)>"
                    "<!ELEMENT m (#PCDATA | b | c)*>"
                    "<!ELEMENT b EMPTY><!ELEMENT c EMPTY><!ELEMENT d EMPTY>")
    assert dtd["a"].child_types == ("b", "c", "d")
    assert dtd["m"].has_pcdata and dtd["m"].child_types == ("b", "c")


def test_any_content():
    dtd = parse_dtd("<!ELEMENT a ANY><!ELEMENT b EMPTY>")
    assert dtd.children_of("a") == ("b",)


def test_enumerated_and_fixed_and_notation():
    dtd = parse_dtd('<!ELEMENT e EMPTY>'
                    '<!ATTLIST e size (small|large) "small" v CDATA #FIXED "1" '
                    'n NOTATION (gif|png) #IMPLIED t NMTOKENS #IMPLIED r IDREF #IMPLIED>')
    assert [k for _, k in dtd["e"].attributes] == [AttrKind.PLAIN] * 4 + [AttrKind.IDREF]


def test_comments_pis_entities():
    dtd = parse_dtd('<?xml version="1.0"?>\n<!-- <!ELEMENT fake EMPTY> -->\n'
                    '<!ENTITY copy "(c)">\n<!NOTATION gif SYSTEM "gif">\n<!ELEMENT a EMPTY>')
    assert list(dtd.decls) == ["a"]
    assert len(dtd.warnings) == 2


def test_attlist_before_element_and_repeats():
    dtd = parse_dtd("<!ATTLIST a x CDATA #IMPLIED>\n<!ATTLIST a x ID #IMPLIED y IDREF #IMPLIED>\n"
                    "<!ELEMENT a EMPTY>")
    assert dtd["a"].attributes == [("x", AttrKind.PLAIN), ("y", AttrKind.IDREF)]
    assert any("more than once" in w for w in dtd.warnings)


def test_attlist_for_undeclared_element():
    dtd = parse_dtd("<!ATTLIST ghost x CDATA #IMPLIED>")
    assert not dtd["ghost"].declared
    assert any("undeclared" in w for w in dtd.warnings)


def test_undeclared_child_warns():
    dtd = parse_dtd("<!ELEMENT a (b)>")
    assert any("'b'" in w for w in dtd.warnings)


def test_duplicate_id_attribute():
    with pytest.raises(DuplicateIdAttr, match="a"):
        parse_dtd("<!ELEMENT a EMPTY><!ATTLIST a x ID #REQUIRED y ID #REQUIRED>")


@pytest.mark.parametrize("text, line, column", [
    ("<!ELEMENT a EMPTY>\n<!ELEMENT b (c>", 2, 13),
    ("<!ELEMENT a EMPTY>\n\n  <!ATTLIST a x BOGUS #IMPLIED>", 3, 17),
    ("<!ELEMENT a (b) extra>", 1, 17),
    ("<!ELEMENT a EMPTY", 1, 10),
    ("<!ELEMENT a EMPTY>\nstray", 2, 1),
    ("<!WIDGET a>", 1, 1),
])
def test_syntax_errors_carry_position(text, line, column):
    with pytest.raises(DtdSyntaxError) as info:
        parse_dtd(text)
    assert (info.value.line, info.value.column) == (line, column)


def test_duplicate_element():
    with pytest.raises(DtdSyntaxError, match="twice"):
        parse_dtd("<!ELEMENT a EMPTY><!ELEMENT a EMPTY>")


def test_mondial_dtd(fixtures):
    dtd = parse_dtd((fixtures / "mondial_xml" / "mondial.dtd").read_text())
    assert dtd.warnings == []
    assert dtd["country"].child_types == ("name", "population", "economy", "province")
    assert dtd["confluence"].reference_attributes == ["rivers", "province"]

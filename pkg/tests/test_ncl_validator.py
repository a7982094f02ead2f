from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from ginga_drm.errors import MalformedDocument
from ginga_drm.ncl_validator import RULES, format_report, malformed_violation, validate_ncl

from cases import NCL_CORPUS

CORPUS = Path(__file__).parent / "ncl_corpus"


def findings(text):
    try:
        found = validate_ncl(text)
    except MalformedDocument as exc:
        found = [malformed_violation(exc)]
    return sorted((v.rule_id, v.line) for v in found)


def wrap(body, head=""):
    return f'<ncl id="x">\n<head>{head}</head>\n<body>\n{body}\n</body>\n</ncl>\n'


@pytest.mark.parametrize("name", sorted(NCL_CORPUS))
def test_corpus(name):
    assert findings((CORPUS / f"{name}.ncl").read_bytes()) == NCL_CORPUS[name]


def test_every_rule_has_violating_and_conforming_documents():
    for rule in RULES:
        bad = [n for n, v in NCL_CORPUS.items() if any(r == rule for r, _ in v)]
        assert bad, rule
        stem = bad[0].rsplit("__", 1)[0]
        assert NCL_CORPUS.get(stem + "__ok") == []


def test_anchor_example_accepted():
    assert validate_ncl(wrap('<media id="a" src="x.mp3"><area id="anchor" first="5000tbv"/></media>')) == []


def test_single_findings():
    assert findings(wrap("", '<transition id="t1"/>')) == [("transition-removed", 2)]
    assert findings(wrap('<media id="a" src="dsm-cc:/x"/>')) == [("scheme-unsupported", 4)]
    assert findings(wrap('<media id="a" src="x"><area id="b" first="5000tvb"/></media>')) == [("bad-tbv-literal", 4)]


def test_scheme_check_is_case_insensitive():
    assert findings(wrap('<media id="a" src="DSM-CC:/x"/>')) == [("scheme-unsupported", 4)]
    assert findings(wrap('<media id="a" src="media/dsm-cc:x"/>')) == []


def test_settings_rules_need_settings_media():
    assert findings(wrap('<media id="a" src="x"><property name="metadata.title"/></media>')) == []


def test_columns_are_one_based():
    [v] = validate_ncl('<ncl><body><transition id="t"/></body></ncl>')
    assert (v.line, v.column) == (1, 12)


def test_malformed_raises():
    with pytest.raises(MalformedDocument) as info:
        validate_ncl("<ncl><body></ncl>")
    assert info.value.line == 1


def test_report_formats():
    vs = validate_ncl(wrap("", '<transition id="t1"/>'))
    assert vs[0].to_line().split("\t")[:3] == ["transition-removed", "2", "7"]
    assert "1 violation(s)" in format_report(vs, "doc.ncl")
    assert format_report([], "doc.ncl").endswith("conforms to the DR profile")


FRAGMENTS = [
    ('<media id="s{i}" type="application/x-ncl-settings"><property name="system.screenVideoSize"/></media>',
     "settings-variable-removed"),
    ('<media id="m{i}" src="ts://1"/>', "scheme-unsupported"),
    ('<media id="v{i}" src="a"><area id="a{i}" clip="1"/></media>', "area-attribute-removed"),
    ('<media id="p{i}" src="a"><property name="plane"/></media>', "property-removed"),
    ('<media id="q{i}" src="a"><area id="b{i}" begin="xyz"/></media>', "bad-tbv-literal"),
    ('<media id="ok{i}" src="drm:1"/>', None),
]


@given(st.lists(st.sampled_from(range(len(FRAGMENTS))), max_size=8))
def test_violations_are_additive(picks):
    body = "\n".join(FRAGMENTS[k][0].format(i=i) for i, k in enumerate(picks))
    expected = sorted(FRAGMENTS[k][1] for k in picks if FRAGMENTS[k][1])
    doc = wrap(body)
    first = validate_ncl(doc)
    assert sorted(v.rule_id for v in first) == expected
    assert validate_ncl(doc) == first
    assert first == sorted(first)

import random
import re

import pytest

from termrank.errors import ConfigError, PatternError
from termrank.filters import (
    BUILTIN_SPECS,
    builtin_filters,
    compile_filter,
    content_projection,
    extract_candidates,
    load_filter_file,
)

from conftest import make_doc, make_sentence

# Regex restatements of the five built-in patterns, used as an oracle.
ORACLE = {
    1: re.compile("NN+"),
    2: re.compile("A+N+"),
    3: re.compile("NA+(?:NA+)*"),
    4: re.compile("N+R+N*"),
    5: re.compile("NV+R*A*"),
}


def oracle_spans(pattern: re.Pattern, codes: str, min_len: int = 2):
    return [
        (i, j)
        for i in range(len(codes))
        for j in range(i + min_len, len(codes) + 1)
        if pattern.fullmatch(codes[i:j])
    ]


def test_builtin_ids_and_specs():
    filters = builtin_filters()
    assert [f.filter_id for f in filters] == [1, 2, 3, 4, 5]
    assert [f.spec for f in filters] == [spec for _, spec in BUILTIN_SPECS]


@pytest.mark.parametrize(
    "spec,yes,no",
    [
        ("N N+", ["NN", "NNN"], ["N", "AN", "NNA", ""]),
        ("A+ N+", ["AN", "AAN", "ANN"], ["A", "N", "NA", "ANA"]),
        ("N A+ (N A+)*", ["NA", "NAA", "NANA", "NAANAA"], ["N", "AN", "NAN"]),
        ("N+ R+ N*", ["NR", "NNR", "NRN", "NRRNN"], ["R", "RN", "NRA"]),
        ("N V+ R* A*", ["NV", "NVV", "NVR", "NVRA", "NVA"], ["V", "NRA", "NVAR"]),
    ],
)
def test_builtin_full_matches(spec, yes, no):
    f = compile_filter(spec)
    for s in yes:
        assert f.matches(s), (spec, s)
    for s in no:
        assert not f.matches(s), (spec, s)


def test_matches_rejects_symbols_outside_alphabet():
    f = compile_filter("N+")
    assert not f.matches("NO")
    assert not f.matches("NXN")


def test_match_spans_enumerates_nested_spans():
    f = compile_filter("A+ N+")
    assert f.match_spans("ANN") == [(0, 2), (0, 3)]
    assert sorted(f.match_spans("ANN")) == oracle_spans(ORACLE[2], "ANN")


def test_match_spans_min_length():
    f = compile_filter("N+")
    assert (0, 1) not in f.match_spans("N")
    assert f.match_spans("N") == []
    assert f.match_spans("NN") == [(0, 2)]


def test_match_spans_blocked_by_other():
    f = compile_filter("N N+")
    assert f.match_spans("NONN") == [(2, 4)]


@pytest.mark.parametrize(
    "spec,message,position",
    [
        ("+N", "quantifier has nothing to repeat", 0),
        ("N +", "quantifier has nothing to repeat", 2),
        ("(N A+", "unclosed group", 0),
        ("N (", "unclosed group", 2),
        ("()", "empty group", 0),
        ("N X", "unexpected character", 2),
        ("N)", "unmatched ')'", 1),
        ("", "empty pattern", 0),
        ("   ", "empty pattern", 0),
    ],
)
def test_pattern_errors(spec, message, position):
    with pytest.raises(PatternError) as err:
        compile_filter(spec)
    assert message in str(err.value)
    assert err.value.position == position


def test_pattern_error_survives_pickling():
    import pickle

    err = PatternError("unclosed group", 4)
    back = pickle.loads(pickle.dumps(err))
    assert back.position == 4
    assert str(back) == str(err)


def test_load_filter_file(tmp_path):
    p = tmp_path / "filters.txt"
    p.write_text("N N+ V\n\nA+ N+ V+\n", encoding="utf-8")
    loaded = load_filter_file(p)
    assert [f.filter_id for f in loaded] == [6, 7]
    assert loaded[0].matches("NNV")


def test_load_filter_file_bad_line(tmp_path):
    p = tmp_path / "filters.txt"
    p.write_text("N N+\nN ((\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="line 2"):
        load_filter_file(p)


def test_load_filter_file_missing(tmp_path):
    with pytest.raises(ConfigError):
        load_filter_file(tmp_path / "nope.txt")


def test_content_projection_drops_stopwords_only():
    sent = make_sentence("the/N/s normal/A fault/N near/O of/N/s zone/N")
    lemmas, codes = content_projection(sent)
    assert lemmas == ("normal", "fault", "near", "zone")
    assert codes == "ANON"


def test_extract_candidates_spans_and_attribution():
    doc = make_doc("d", "the/N/s normal/A fault/N system/N")
    occs = extract_candidates(doc, 0)
    got = [(o.start, o.end, o.filter_id, o.term) for o in occs]
    assert got == [
        (0, 2, 2, ("normal", "fault")),
        (0, 3, 2, ("normal", "fault", "system")),
        (1, 3, 1, ("fault", "system")),
    ]
    assert all(o.doc_id == "d" and o.doc_index == 0 and o.sent_idx == 0 for o in occs)


def test_extract_candidates_same_span_lowest_filter_wins(tmp_path):
    # a user filter duplicating "N N+" must never claim a span from it
    p = tmp_path / "filters.txt"
    p.write_text("N N+\n", encoding="utf-8")
    dupe = load_filter_file(p)[0]
    assert dupe.filter_id == 6
    doc = make_doc("d", "fault/N zone/N")
    occs = extract_candidates(doc, 0, filters=list(builtin_filters()) + [dupe])
    assert [(o.start, o.end, o.filter_id) for o in occs] == [(0, 2, 1)]


def test_extract_candidates_attribution_ignores_filter_list_order():
    doc = make_doc("d", "normal/A fault/N system/N")
    filters = list(builtin_filters())
    occs_fwd = extract_candidates(doc, 0, filters=filters)
    occs_rev = extract_candidates(doc, 0, filters=list(reversed(filters)))
    assert occs_fwd == occs_rev


def test_extract_candidates_short_projection_skipped():
    doc = make_doc("d", "the/N/s fault/N")
    assert extract_candidates(doc, 0) == []


def test_extract_candidates_ordered_by_span():
    doc = make_doc("d", "fault/N system/N model/N")
    occs = extract_candidates(doc, 0)
    spans = [(o.start, o.end) for o in occs]
    assert spans == sorted(spans)
    assert spans == [(0, 2), (0, 3), (1, 3)]


def test_random_codes_against_regex_oracle():
    rng = random.Random(4202)
    filters = builtin_filters()
    for _ in range(300):
        codes = "".join(rng.choice("NARVO") for _ in range(rng.randint(0, 12)))
        for f in filters:
            assert sorted(f.match_spans(codes)) == oracle_spans(
                ORACLE[f.filter_id], codes
            ), (f.spec, codes)


def test_random_user_patterns_against_regex_oracle():
    # pattern language and regexes agree on arbitrary well-formed specs
    rng = random.Random(99)
    atoms = ["N", "A", "R", "V"]
    for _ in range(120):
        n_atoms = rng.randint(1, 5)
        spec_parts = []
        regex_parts = []
        for _ in range(n_atoms):
            a = rng.choice(atoms)
            q = rng.choice(["", "+", "*"])
            spec_parts.append(a + q)
            regex_parts.append(a + q)
        spec = " ".join(spec_parts)
        pattern = re.compile("".join(regex_parts))
        f = compile_filter(spec)
        for _ in range(20):
            codes = "".join(rng.choice("NARVO") for _ in range(rng.randint(0, 9)))
            assert sorted(f.match_spans(codes)) == oracle_spans(pattern, codes), (
                spec,
                codes,
            )


def test_compiled_filters_are_picklable():
    import pickle

    for f in builtin_filters():
        back = pickle.loads(pickle.dumps(f))
        assert back == f
        assert back.match_spans("ANNRV") == f.match_spans("ANNRV")

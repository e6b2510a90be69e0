"""Configuration grammar, template rendering, and the golden full-config texts."""

import pytest

from citegen.errors import ValidationError
from citegen.promptgen import (
    DEFAULT_COMPONENT_SETS,
    baseline_text,
    enumerate_run_matrix,
    load_template_dir,
    parse_config,
    render_prompt,
)
from citegen.promptgen.config import PromptConfig
from citegen.promptgen.templates import Condition

from conftest import GOLDENS, make_example, make_instance

SENTINELS = dict(
    citing_abstract="CITING-ABSTRACT-TEXT",
    cited_abstract="CITED-ABSTRACT-TEXT",
    intent="INTENT-SENTENCE-TEXT",
    example="EXAMPLE-SENTENCE [REF#1] TEXT",
)


@pytest.fixture(scope="module")
def templates():
    return load_template_dir()


@pytest.fixture
def sentinel_instance():
    return make_instance(
        citing_abstract=SENTINELS["citing_abstract"],
        cited_abstract=SENTINELS["cited_abstract"],
    )


def render_with(templates, config_str, instance, example=None):
    cfg = parse_config(config_str)
    intent = SENTINELS["intent"] if cfg.intent_kind != "none" else None
    ex = example if cfg.use_example else None
    return render_prompt(templates[cfg.template_id], cfg, instance, intent, ex)


class TestParseConfig:
    def test_full_config(self):
        cfg = parse_config("1+A+IF+E")
        assert cfg == PromptConfig(1, True, "free_form", True)

    def test_minimal(self):
        cfg = parse_config("3+A")
        assert cfg == PromptConfig(3, True, "none", False)

    def test_exclusive_intents(self):
        with pytest.raises(ValidationError):
            parse_config("2+A+IC+IF")

    @pytest.mark.parametrize("bad", ["", "0+A", "7+A", "x+A", "2+Z", "2+A+A", "2+E+E"])
    def test_malformed(self, bad):
        with pytest.raises(ValidationError):
            parse_config(bad)

    def test_roundtrip_canonicalizes(self):
        assert parse_config("4+E+A").to_string() == "4+A+E"

    def test_roundtrip_identity_on_matrix(self):
        for cfg in enumerate_run_matrix():
            assert parse_config(cfg.to_string()) == cfg


class TestRunMatrix:
    def test_default_is_36(self):
        matrix = enumerate_run_matrix()
        assert len(matrix) == 36
        assert len({c.to_string() for c in matrix}) == 36

    def test_single_cell(self):
        assert len(enumerate_run_matrix([2], ["+A"])) == 1

    def test_template_major_order(self):
        got = [c.to_string() for c in enumerate_run_matrix([2, 5], ["+A", "+A+E", "+A+IF"])]
        assert got == ["2+A", "2+A+E", "2+A+IF", "5+A", "5+A+E", "5+A+IF"]

    def test_abstracts_fixed_on_in_default_sets(self):
        assert all(s.startswith("+A") for s in DEFAULT_COMPONENT_SETS)


class TestGoldenRenders:
    @pytest.mark.parametrize("tid", [1, 2, 3, 4, 5, 6])
    def test_full_config_matches_golden(self, templates, sentinel_instance, tid):
        prompt = render_with(templates, f"{tid}+A+IF+E", sentinel_instance, make_example())
        golden_system = (GOLDENS / f"template_{tid}_system.txt").read_text(encoding="utf-8")
        golden_user = (GOLDENS / f"template_{tid}_user.txt").read_text(encoding="utf-8")
        assert prompt.system_text == golden_system
        assert prompt.user_text == golden_user

    def test_template_2_system_is_empty(self, templates, sentinel_instance):
        prompt = render_with(templates, "2+A+IF+E", sentinel_instance, make_example())
        assert prompt.system_text == ""
        assert "related work paragraph" in prompt.user_text


class TestComponentBiconditionals:
    @pytest.mark.parametrize("config_str", [c.to_string() for c in enumerate_run_matrix()])
    def test_presence_iff_flag(self, templates, sentinel_instance, config_str):
        cfg = parse_config(config_str)
        prompt = render_with(templates, config_str, sentinel_instance, make_example())
        text = prompt.full_text()
        assert "[REF#1]" in text  # instructions always carry the mark token
        assert (SENTINELS["cited_abstract"] in text) == cfg.use_abstracts
        assert (SENTINELS["citing_abstract"] in text) == cfg.use_abstracts
        assert (SENTINELS["intent"] in text) == (cfg.intent_kind != "none")
        assert (SENTINELS["example"].replace("[REF#1]", "") .strip() != "") and (
            ("EXAMPLE-SENTENCE" in text) == cfg.use_example
        )

    @pytest.mark.parametrize("tid", [1, 3, 4, 5, 6])
    def test_literal_markers_on_labelled_templates(self, templates, sentinel_instance, tid):
        with_all = render_with(templates, f"{tid}+A+IF+E", sentinel_instance, make_example())
        assert "Intent:" in with_all.user_text
        assert "Example:" in with_all.user_text
        without = render_with(templates, f"{tid}+A", sentinel_instance)
        assert "Intent:" not in without.user_text
        assert "Example:" not in without.user_text


def _segment_text_outside(template, config, component):
    """Concatenation of active segments whose condition ignores `component`."""
    out = []
    for part in (template.system, template.user):
        for seg in part:
            if seg.condition.mentions(component):
                continue
            if seg.condition.evaluate(config):
                out.append(seg.text)
    return "".join(out)


class TestDiffLocality:
    @pytest.mark.parametrize("tid", [1, 2, 3, 4, 5, 6])
    @pytest.mark.parametrize(
        "pair",
        [
            ("+A+IF+E", "+A+IF", "E"),
            ("+A+IF+E", "+A+E", "I"),
            ("+A+IC+E", "+A+E", "I"),
            ("+A+IF", "+A", "I"),
        ],
    )
    def test_dropping_component_changes_only_its_segments(self, templates, tid, pair):
        with_set, without_set, component = pair
        t = templates[tid]
        c_with = parse_config(f"{tid}{with_set}")
        c_without = parse_config(f"{tid}{without_set}")
        assert _segment_text_outside(t, c_with, component) == _segment_text_outside(
            t, c_without, component
        )


class TestConditionLanguage:
    def test_atoms_and_operators(self):
        cfg = PromptConfig(1, True, "free_form", False)
        assert Condition("A&IF").evaluate(cfg)
        assert not Condition("E|IC").evaluate(cfg)
        assert Condition("!(E|IC)").evaluate(cfg)
        assert Condition("I").evaluate(cfg)

    def test_mentions_tracks_intent_aliases(self):
        assert Condition("I").mentions("IF")
        assert Condition("IC|E").mentions("I")
        assert not Condition("A&E").mentions("I")

    @pytest.mark.parametrize("bad", ["", "A &&", "Q", "(A", "A B"])
    def test_bad_syntax(self, bad):
        with pytest.raises(ValidationError):
            Condition(bad)


class TestRenderContracts:
    def test_deterministic_bytes(self, templates, sentinel_instance):
        a = render_with(templates, "1+A+IF+E", sentinel_instance, make_example())
        b = render_with(templates, "1+A+IF+E", sentinel_instance, make_example())
        assert a.system_text == b.system_text and a.user_text == b.user_text

    def test_missing_intent_rejected(self, templates, sentinel_instance):
        cfg = parse_config("1+A+IF")
        with pytest.raises(ValidationError):
            render_prompt(templates[1], cfg, sentinel_instance, None, None)

    def test_unexpected_example_rejected(self, templates, sentinel_instance):
        cfg = parse_config("1+A")
        with pytest.raises(ValidationError):
            render_prompt(templates[1], cfg, sentinel_instance, None, make_example())

    def test_multi_citation_rejected(self, templates):
        inst = make_instance()
        inst.citations = inst.citations * 2
        with pytest.raises(ValidationError):
            render_prompt(templates[1], parse_config("1+A"), inst, None, None)

    def test_example_mark_normalized(self, templates, sentinel_instance):
        ex = make_example("As shown by (Varga, 2015) in prior work")
        ex.mark = "(Varga, 2015)"
        prompt = render_with(templates, "1+A+E", sentinel_instance, ex)
        assert "Example: As shown by [REF#1] in prior work" in prompt.user_text

    def test_token_estimate_counts_whitespace_tokens(self, templates, sentinel_instance):
        p = render_with(templates, "1+A", sentinel_instance)
        assert p.token_estimate == len(p.system_text.split()) + len(p.user_text.split())


class TestBaseline:
    def test_contains_both_abstracts_verbatim(self):
        inst = make_instance()
        text = baseline_text(inst)
        assert inst.citing.abstract in text
        assert inst.citations[0].cited.abstract in text
        assert text.index(inst.citations[0].cited.abstract) < text.index(inst.citing.abstract)

    def test_word_count_is_roughly_additive(self):
        inst = make_instance(
            citing_abstract=" ".join(["alpha"] * 140),
            cited_abstract=" ".join(["beta"] * 100),
        )
        assert len(baseline_text(inst).split()) == 240

    def test_missing_abstract_rejected(self):
        inst = make_instance(citing_abstract="")
        with pytest.raises(ValidationError):
            baseline_text(inst)

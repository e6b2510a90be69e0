"""Intent generation, categorical assignment, and the n-gram leak audit."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from citegen.errors import ValidationError
from citegen.gateway import BackendSpec, GenerationCache
from citegen.intents import (
    FREE_FORM_PROMPT,
    Intent,
    IntentError,
    assign_categorical_intent,
    content_ngrams,
    default_stopwords,
    generate_free_form_intent,
    leak_audit,
)

from conftest import make_instance

STOPWORDS = {"the", "a", "of", "to", "is"}


def const_spec(path):
    return BackendSpec(
        backend_id="stub",
        endpoint=f"stub:const:{path}",
        model_name="stub-model",
        wire_dialect="local_stub",
    )


def write_const(tmp_path, text):
    p = tmp_path / "intent.txt"
    p.write_text(text, encoding="utf-8")
    return const_spec(p)


class TestFreeFormIntent:
    def test_first_line_trimmed(self, tmp_path):
        spec = write_const(tmp_path, "  To compare the methods to prior work  \nsecond line")
        cache = GenerationCache(tmp_path / "cache")
        intent = generate_free_form_intent(make_instance(), spec, cache)
        assert intent.text == "To compare the methods to prior work"
        assert intent.kind == "free_form"
        assert intent.source == "generated"
        assert not intent.leak_flagged

    def test_prompt_wording_and_caching(self, tmp_path):
        spec = write_const(tmp_path, "To describe the work")
        cache = GenerationCache(tmp_path / "cache")
        inst = make_instance()
        i1 = generate_free_form_intent(inst, spec, cache)
        i2 = generate_free_form_intent(inst, spec, cache)
        assert i1 == i2
        # exactly one cache record, keyed by the zero-shot prompt
        records = list((tmp_path / "cache").rglob("*.json"))
        records = [r for r in records if r.name != "index.jsonl"]
        assert len(records) == 1
        stored = records[0].read_text(encoding="utf-8")
        assert FREE_FORM_PROMPT in stored

    def test_empty_response_is_an_error(self, tmp_path):
        spec = write_const(tmp_path, "   \n\n")
        cache = GenerationCache(tmp_path / "cache")
        with pytest.raises(IntentError):
            generate_free_form_intent(make_instance(), spec, cache)

    def test_degenerate_overlong_response_rejected(self, tmp_path):
        spec = write_const(tmp_path, " ".join(["word"] * 61))
        cache = GenerationCache(tmp_path / "cache")
        with pytest.raises(IntentError, match="cap"):
            generate_free_form_intent(make_instance(), spec, cache)

    def test_echoed_gold_paragraph_gets_flagged(self, tmp_path):
        inst = make_instance(
            paragraph="(Varga, 2015) together " + " ".join(f"tok{i}" for i in range(44))
        )
        spec = write_const(tmp_path, inst.gold_reference())
        cache = GenerationCache(tmp_path / "cache")
        intent = generate_free_form_intent(inst, spec, cache)
        assert intent.leak_flagged


class TestCategoricalIntent:
    def test_provided_column(self):
        inst = make_instance(categorical_intent="Background")
        intent = assign_categorical_intent(inst)
        assert intent == Intent("categorical", "Background", "provided", inst.instance_id)

    def test_classifier_handle(self):
        inst = make_instance()
        intent = assign_categorical_intent(inst, classifier=lambda i: "Motivation")
        assert intent.text == "Motivation"
        assert intent.source == "classifier"

    def test_empty_label_rejected(self):
        inst = make_instance(categorical_intent="  ")
        with pytest.raises(ValidationError):
            assign_categorical_intent(inst)

    def test_unconfigured_is_an_error(self):
        with pytest.raises(ValidationError):
            assign_categorical_intent(make_instance())

    def test_deterministic(self):
        inst = make_instance(categorical_intent="Uses")
        assert assign_categorical_intent(inst) == assign_categorical_intent(inst)


class TestContentNgrams:
    def test_stopwords_and_punctuation(self):
        grams = content_ngrams("The model, improves the baseline.", 1, STOPWORDS)
        assert grams == {("model",), ("improves",), ("baseline",)}

    def test_bigrams_after_stopword_removal(self):
        grams = content_ngrams("the model improves a baseline", 2, STOPWORDS)
        assert grams == {("model", "improves"), ("improves", "baseline")}

    def test_too_short(self):
        assert content_ngrams("model", 2, STOPWORDS) == set()


def _audit_pair(paragraph_words, intent_text):
    inst = make_instance(
        paragraph="(Varga, 2015) anchor. " + " ".join(paragraph_words)
    )
    intents = {inst.instance_id: Intent("free_form", intent_text, "generated", inst.instance_id)}
    return leak_audit(intents, [inst], STOPWORDS)


class TestLeakAudit:
    def test_self_copy_is_one(self):
        inst = make_instance(
            paragraph="(Varga, 2015) start " + " ".join(f"tok{i}" for i in range(44))
        )
        intents = {
            inst.instance_id: Intent(
                "free_form", inst.gold_reference(), "generated", inst.instance_id
            )
        }
        report = leak_audit(intents, [inst], STOPWORDS)
        for n in (1, 2, 3):
            assert report.per_n[n]["gold_vs_intent"] == 1.0

    def test_disjoint_is_zero(self):
        words = [f"tok{i}" for i in range(50)]
        report = _audit_pair(words, "unrelated vocabulary entirely different here")
        for n in (1, 2, 3):
            assert report.per_n[n]["gold_vs_intent"] == 0.0

    def test_ratios_in_unit_interval(self, bundle):
        from citegen.corpus import select_single_citation

        singles = select_single_citation(bundle.instances)[:10]
        intents = {
            i.instance_id: Intent(
                "free_form", " ".join(i.paragraph_text.split()[:6]), "generated", i.instance_id
            )
            for i in singles
        }
        report = leak_audit(intents, singles, default_stopwords())
        for n in (1, 2, 3):
            for key in ("gold_vs_intent", "gold_vs_abstract"):
                assert 0.0 <= report.per_n[n][key] <= 1.0

    def test_missing_intent_is_an_error(self):
        inst = make_instance()
        with pytest.raises(ValidationError):
            leak_audit({}, [inst], STOPWORDS)

    def test_order_invariance(self, bundle):
        from citegen.corpus import select_single_citation

        singles = select_single_citation(bundle.instances)[:6]
        intents = {
            i.instance_id: Intent(
                "free_form", " ".join(i.paragraph_text.split()[:5]), "generated", i.instance_id
            )
            for i in singles
        }
        fwd = leak_audit(intents, singles, STOPWORDS)
        rev = leak_audit(intents, list(reversed(singles)), STOPWORDS)
        assert fwd.per_n == rev.per_n

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.sampled_from(["alpha", "beta", "gamma", "delta"]), min_size=0, max_size=6))
    def test_adding_gold_unigrams_never_decreases_ratio(self, extra):
        gold_words = [f"g{i}" for i in range(30)]
        base = "seed vocabulary"
        grown = base + " " + " ".join(w for w in extra) + " " + " ".join(gold_words[: len(extra)])
        r_base = _audit_pair(gold_words, base).per_n[1]["gold_vs_intent"]
        r_grown = _audit_pair(gold_words, grown).per_n[1]["gold_vs_intent"]
        assert r_grown >= r_base

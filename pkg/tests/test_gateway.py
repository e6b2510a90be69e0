"""Backend dispatch, cache contract, and batch orchestration."""

import json
import threading

import httpx
import pytest

from citegen.errors import UpstreamError, ValidationError
from citegen.gateway import (
    BackendSpec,
    DecodingParams,
    GenerationCache,
    OpenAIChatBackend,
    StubBackend,
    generate,
    generation_key,
    run_batch,
)
from citegen.metrics import citation_mark_usage


def stub_spec(endpoint="stub:echo", backend_id="stub"):
    return BackendSpec(
        backend_id=backend_id,
        endpoint=endpoint,
        model_name="stub-model",
        wire_dialect="local_stub",
    )


class TestDecodingParams:
    def test_greedy_pins_temperature(self):
        p = DecodingParams(strategy="greedy", temperature=0.7)
        assert p.temperature == 0.0

    def test_max_tokens_positive(self):
        with pytest.raises(ValidationError):
            DecodingParams(max_new_tokens=0)

    def test_default_mirrors_sequence_bound(self):
        assert DecodingParams().max_new_tokens == 1024


class TestStubBackend:
    def test_echo_returns_user_text(self):
        out, _ = StubBackend(stub_spec()).chat("sys", "user words", DecodingParams())
        assert out == "user words"

    def test_const_returns_canned_text(self, canned_backend_file):
        backend = StubBackend(stub_spec(f"stub:const:{canned_backend_file}"))
        out, _ = backend.chat("sys", "user", DecodingParams())
        assert "[REF#1]" in out
        assert citation_mark_usage(out)

    def test_unknown_mode(self):
        with pytest.raises(ValidationError):
            StubBackend(stub_spec("stub:banana"))


class TestCache:
    def test_second_call_is_served_from_cache(self, tmp_path):
        cache = GenerationCache(tmp_path / "gen")
        calls = {"n": 0}

        class Counting:
            def chat(self, s, u, p):
                calls["n"] += 1
                return "out", {}

        kwargs = dict(
            backend_spec=stub_spec(),
            params=DecodingParams(),
            cache=cache,
            config_key="1+A",
            instance_id="i1",
            backend=Counting(),
        )
        r1 = generate("sys", "user", **kwargs)
        r2 = generate("sys", "user", **kwargs)
        assert calls["n"] == 1
        assert r1.key == r2.key
        assert r1.output_text == r2.output_text == "out"

    def test_key_depends_on_prompt_bytes(self):
        params = DecodingParams()
        k1 = generation_key("b", "m", params, "1+A", "i1", "sys", "user")
        k2 = generation_key("b", "m", params, "1+A", "i1", "sys", "user ")
        assert k1 != k2

    def test_append_only(self, tmp_path):
        from citegen.gateway.cache import make_record

        cache = GenerationCache(tmp_path / "gen")
        rec = make_record("k" * 64, "b", "m", DecodingParams(), "1+A", "i1", "s", "u", "first", 5, None)
        cache.put(rec)
        clone = make_record("k" * 64, "b", "m", DecodingParams(), "1+A", "i1", "s", "u", "second", 5, None)
        stored = cache.put(clone)
        assert stored.output_text == "first"
        assert cache.get("k" * 64).output_text == "first"


class TestOpenAIDialect:
    def _backend(self, handler, retries=2):
        transport = httpx.MockTransport(handler)
        client = httpx.Client(transport=transport)
        spec = BackendSpec(
            backend_id="svc",
            endpoint="http://svc.test/v1/chat/completions",
            model_name="m-7",
            wire_dialect="openai_chat_v1",
        )
        return OpenAIChatBackend(spec, max_retries=retries, rate_per_s=10000, client=client)

    def test_request_and_response_shape(self):
        seen = {}

        def handler(request):
            seen["body"] = json.loads(request.content)
            return httpx.Response(
                200, json={"choices": [{"message": {"role": "assistant", "content": "hi"}}]}
            )

        out, raw = self._backend(handler).chat("sys text", "user text", DecodingParams())
        assert out == "hi"
        assert seen["body"]["model"] == "m-7"
        assert seen["body"]["messages"] == [
            {"role": "system", "content": "sys text"},
            {"role": "user", "content": "user text"},
        ]
        assert seen["body"]["temperature"] == 0.0
        assert seen["body"]["max_tokens"] == 1024

    def test_empty_system_omitted(self):
        def handler(request):
            body = json.loads(request.content)
            assert [m["role"] for m in body["messages"]] == ["user"]
            return httpx.Response(
                200, json={"choices": [{"message": {"content": "ok"}}]}
            )

        out, _ = self._backend(handler).chat("", "user", DecodingParams())
        assert out == "ok"

    def test_retries_then_succeeds(self, monkeypatch):
        monkeypatch.setattr("time.sleep", lambda s: None)
        attempts = {"n": 0}

        def handler(request):
            attempts["n"] += 1
            if attempts["n"] < 3:
                return httpx.Response(500, text="later")
            return httpx.Response(200, json={"choices": [{"message": {"content": "done"}}]})

        out, _ = self._backend(handler).chat("s", "u", DecodingParams())
        assert out == "done"
        assert attempts["n"] == 3

    def test_gives_up_after_bounded_retries(self, monkeypatch):
        monkeypatch.setattr("time.sleep", lambda s: None)

        def handler(request):
            return httpx.Response(429, text="rate limited")

        with pytest.raises(UpstreamError):
            self._backend(handler, retries=1).chat("s", "u", DecodingParams())

    def test_malformed_response(self):
        def handler(request):
            return httpx.Response(200, json={"unexpected": True})

        with pytest.raises(UpstreamError, match="malformed"):
            self._backend(handler, retries=0).chat("s", "u", DecodingParams())


class TestRunBatch:
    def _prompts(self, n_configs=3, n_instances=5):
        return {
            (f"{t}+A", f"i{k}"): (f"sys {t}", f"user {t} {k}")
            for t in range(1, n_configs + 1)
            for k in range(n_instances)
        }

    def test_cross_product_cells(self, tmp_path):
        cache = GenerationCache(tmp_path / "gen")
        manifest = run_batch(
            self._prompts(), backend_spec=stub_spec(), params=DecodingParams(), cache=cache
        )
        assert len(manifest.cells) == 15
        assert manifest.complete
        assert manifest.counts() == {"generated": 15, "cached": 0, "failed": 0}

    def test_rerun_hits_cache_only(self, tmp_path):
        cache = GenerationCache(tmp_path / "gen")
        prompts = self._prompts()
        run_batch(prompts, backend_spec=stub_spec(), params=DecodingParams(), cache=cache)
        second = run_batch(prompts, backend_spec=stub_spec(), params=DecodingParams(), cache=cache)
        assert second.counts() == {"generated": 0, "cached": 15, "failed": 0}

    def test_failures_recorded_and_batch_continues(self, tmp_path, monkeypatch):
        cache = GenerationCache(tmp_path / "gen")

        real_chat = StubBackend.chat

        def flaky(self, system_text, user_text, params):
            if "user 2 1" in user_text:
                raise UpstreamError("injected")
            return real_chat(self, system_text, user_text, params)

        monkeypatch.setattr(StubBackend, "chat", flaky)
        manifest = run_batch(
            self._prompts(), backend_spec=stub_spec(), params=DecodingParams(), cache=cache, parallelism=1
        )
        assert not manifest.complete
        assert manifest.counts()["failed"] == 1

        monkeypatch.setattr(StubBackend, "chat", real_chat)
        repaired = run_batch(
            self._prompts(), backend_spec=stub_spec(), params=DecodingParams(), cache=cache, parallelism=1
        )
        assert repaired.complete
        assert repaired.counts() == {"generated": 1, "cached": 14, "failed": 0}

    def test_parallelism_invariant_record_set(self, tmp_path):
        prompts = self._prompts(4, 6)
        c1 = GenerationCache(tmp_path / "g1")
        c2 = GenerationCache(tmp_path / "g2")
        m1 = run_batch(prompts, backend_spec=stub_spec(), params=DecodingParams(), cache=c1, parallelism=1)
        m8 = run_batch(prompts, backend_spec=stub_spec(), params=DecodingParams(), cache=c2, parallelism=8)
        strip = lambda m: [(c["config"], c["instance_id"], c["key"], c["status"]) for c in m.cells]
        assert strip(m1) == strip(m8)
        for cell in m1.cells:
            assert c1.get(cell["key"]).output_text == c2.get(cell["key"]).output_text

    def test_concurrent_index_writes_are_complete(self, tmp_path):
        cache = GenerationCache(tmp_path / "gen")
        prompts = self._prompts(6, 6)
        run_batch(prompts, backend_spec=stub_spec(), params=DecodingParams(), cache=cache, parallelism=8)
        index_lines = (tmp_path / "gen" / "index.jsonl").read_text().strip().splitlines()
        assert len(index_lines) == 36

"""Stub embedder determinism/norm contracts and the remote wire client."""

import math

import numpy as np
import pytest

from iotadmin.embedding import (DEFAULT_DIM, RemoteEmbedder, StubEmbedder,
                                make_embedder, stub_embed)
from iotadmin.errors import (CapabilityError, DegenerateInputError,
                             IntegrityError, TransportError)


# ---------------------------------------------------------------------------
# stub embedder

def test_stub_unit_norm():
    v = stub_embed("x", dim=256)
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-9)


def test_stub_deterministic():
    assert np.array_equal(stub_embed("sensor offline"), stub_embed("sensor offline"))


def test_stub_identical_texts_cosine_one():
    u, v = stub_embed("a a b"), stub_embed("a a b")
    assert float(u @ v) == pytest.approx(1.0, abs=1e-9)


def test_stub_disjoint_tokens_orthogonal():
    u, v = stub_embed("hello world"), stub_embed("a b")
    assert float(u @ v) == pytest.approx(0.0, abs=1e-9)


def test_stub_bag_overlap_fixture():
    # bucket counts (2,1) vs (1,1): cosine = 3 / sqrt(10), collision-free
    u, v = stub_embed("a a b"), stub_embed("a b")
    assert float(u @ v) == pytest.approx(3 / math.sqrt(10), abs=1e-9)


def test_stub_whitespace_only_degenerate():
    with pytest.raises(DegenerateInputError):
        stub_embed("   ")


def test_stub_small_dim_rejected():
    with pytest.raises(ValueError):
        stub_embed("x", dim=4)


def test_embedder_contract():
    emb = StubEmbedder(dim=64)
    vecs = emb.embed(["a", "a"])
    assert np.array_equal(vecs[0], vecs[1])
    with pytest.raises(ValueError):
        emb.embed([])
    with pytest.raises(ValueError):
        emb.embed(["ok", ""])


def test_embed_tokens_order_and_identity():
    emb = StubEmbedder()
    tes = emb.embed_tokens("a b a")
    assert [te.token for te in tes] == ["a", "b", "a"]
    assert np.array_equal(tes[0].vector, tes[2].vector)
    with pytest.raises(ValueError):
        emb.embed_tokens("")


def test_make_embedder_stub():
    assert isinstance(make_embedder("stub", 32), StubEmbedder)
    assert isinstance(make_embedder("http://example:9", 32), RemoteEmbedder)


# ---------------------------------------------------------------------------
# remote embedder against the wire stub server

def test_remote_embed_matches_stub(wire):
    base_url, state = wire
    remote = RemoteEmbedder(base_url, dim=256)
    got = remote.embed(["device offline", "reboot hub"])
    want = state.embedder.embed(["device offline", "reboot hub"])
    assert all(np.allclose(g, w) for g, w in zip(got, want))


def test_remote_embed_batches_requests(wire):
    base_url, state = wire
    remote = RemoteEmbedder(base_url, dim=256)
    texts = [f"t{i}" for i in range(130)]
    remote.embed(texts)
    batches = [len(body["texts"]) for path, body in state.requests if path == "/v1/embed"]
    assert batches == [64, 64, 2]


def test_remote_embed_retries_then_succeeds(wire):
    base_url, state = wire
    state.fail_next = 2
    remote = RemoteEmbedder(base_url, dim=256)
    vecs = remote.embed(["x"])
    assert len(vecs) == 1
    assert len(state.requests) == 3


def test_remote_embed_transport_error_carries_attempts(wire):
    base_url, state = wire
    state.fail_next = 10
    remote = RemoteEmbedder(base_url, dim=256)
    with pytest.raises(TransportError) as err:
        remote.embed(["x"])
    assert err.value.attempts == 3


def test_remote_dim_mismatch_integrity_error(wire):
    base_url, _ = wire
    remote = RemoteEmbedder(base_url, dim=128)  # server speaks 256
    with pytest.raises(IntegrityError):
        remote.embed(["x"])


def test_remote_embed_tokens_roundtrip(wire):
    base_url, state = wire
    remote = RemoteEmbedder(base_url, dim=256)
    tes = remote.embed_tokens("hello world")
    assert [te.token for te in tes] == ["hello", "world"]


def test_remote_embed_tokens_capability_error(wire):
    base_url, state = wire
    state.drop_token_route = True
    remote = RemoteEmbedder(base_url, dim=256)
    with pytest.raises(CapabilityError):
        remote.embed_tokens("hello")


def test_stub_default_dim():
    assert stub_embed("x").shape == (DEFAULT_DIM,)

"""Acceptance suite.

Eight criteria, one test each, every tolerance pinned. Each test prints a
single PASS/FAIL line (visible with ``pytest -s`` or in verbose failure
output). The whole module runs offline against the stub embedder and the
echo generator.
"""

import json
import math
import random
import time
from contextlib import contextmanager
from itertools import combinations

import numpy as np
import pytest

from iotadmin import classify, corpus, flows, resources
from iotadmin import textmetrics as tm
from iotadmin.embedding import StubEmbedder
from iotadmin.rag import (EchoGenerator, Mode, QaPair, QueryRequest,
                          RagPipeline, build_prompt)
from iotadmin.store import StoredEntry, VectorStore

EMB = StubEmbedder(dim=256)


@contextmanager
def criterion(number, label):
    start = time.perf_counter()
    try:
        yield
    except Exception:
        print(f"[FAIL] criterion {number}: {label}")
        raise
    elapsed = time.perf_counter() - start
    print(f"[PASS] criterion {number}: {label} ({elapsed:.2f}s)")


def make_chunk(i, text, source="fix.txt"):
    return corpus.Chunk(id=f"{source}:1:{i}", source_id=source, page=1, seq=i,
                        text=text, char_span=(0, len(text)))


# ---------------------------------------------------------------------------

def test_criterion_1_metric_oracles():
    with criterion(1, "metric oracle fixtures at 1e-9 plus 1,000-sequence properties, under 30s"):
        start = time.perf_counter()
        seq = tm.tokenize

        # frozen hand/brute-force oracle values
        assert tm.bleu(seq("the the the"), [seq("the cat")]) == \
            pytest.approx(28.867513459481287, abs=1e-9)
        r1 = tm.rouge_n(seq("the cat"), seq("the cat sat"), 1)
        assert r1.recall == pytest.approx(2 / 3, abs=1e-9)
        assert r1.precision == pytest.approx(1.0, abs=1e-9)
        assert r1.f1 == pytest.approx(0.8, abs=1e-9)
        r2 = tm.rouge_n(seq("a b c"), seq("a b c d"), 2)
        assert r2.precision == pytest.approx(1.0, abs=1e-9)
        assert r2.recall == pytest.approx(2 / 3, abs=1e-9)
        assert r2.f1 == pytest.approx(0.8, abs=1e-9)
        rl = tm.rouge_l(seq("a b c d"), seq("a c b d"))
        assert rl.f1 == pytest.approx(0.75, abs=1e-9)
        assert tm.rouge_l(seq("a b c"), seq("c b a")).f1 == pytest.approx(1 / 3, abs=1e-9)
        five = seq("restart gateway then check logs")
        assert tm.meteor(five, five) == pytest.approx(99.6, abs=1e-9)
        assert tm.meteor(seq("cats sleeping"), seq("cat sleeps")) == \
            pytest.approx(93.75, abs=1e-9)
        assert tm.meteor(seq("alpha beta"), seq("gamma delta")) == 0.0
        bs = tm.bert_score(seq("a b"), seq("a c"), EMB)
        assert bs.precision == pytest.approx(0.5, abs=1e-9)
        assert bs.recall == pytest.approx(0.5, abs=1e-9)
        assert bs.f1 == pytest.approx(0.5, abs=1e-9)

        # identity and disjoint properties on 1,000 random sequences
        rng = random.Random(424)
        vocab = ["gw", "hub", "lock", "lamp", "probe", "relay", "mesh", "node"]
        disjoint_vocab = ["unplug", "rotate", "flash", "verify", "drain", "attach"]
        for _ in range(1000):
            n = rng.randint(1, 10)
            cand = tm.TokenSeq(tuple(rng.choice(vocab) for _ in range(n)))
            other = tm.TokenSeq(tuple(rng.choice(disjoint_vocab)
                                      for _ in range(rng.randint(1, 10))))
            # identity is maximal; it reaches 100 once all four n-gram orders
            # exist (below that the pinned smoothing caps the score)
            identity_bleu = tm.bleu(cand, [cand])
            if n >= 4:
                assert identity_bleu == pytest.approx(100.0, abs=1e-9)
            assert identity_bleu >= tm.bleu(cand, [other]) - 1e-12
            assert tm.bleu(cand, [other]) == 0.0
            assert tm.rouge_n(cand, cand, 1).f1 == pytest.approx(1.0, abs=1e-9)
            assert tm.rouge_n(cand, other, 1).f1 == 0.0
            assert tm.rouge_l(cand, cand).f1 == pytest.approx(1.0, abs=1e-9)
            identity_meteor = 100 * (1 - 0.5 / n ** 3)
            assert tm.meteor(cand, cand) == pytest.approx(identity_meteor, abs=1e-9)
            assert tm.meteor(cand, other) == 0.0
            assert 0.0 <= tm.bleu(cand, [other]) <= 100.0
        assert time.perf_counter() - start < 30.0


def test_criterion_2_chunker():
    with criterion(2, "chunk spans at stride 720 plus coverage/bounds on 500 random texts"):
        assert corpus.DEFAULT_CHUNK_SIZE == 800 and corpus.DEFAULT_OVERLAP == 80
        expected = {
            800: [(0, 800)],
            1520: [(0, 800), (720, 1520)],
            1600: [(0, 800), (720, 1520), (1440, 1600)],
        }
        for n, spans in expected.items():
            got = [span for span, _ in corpus.chunk_page("x" * n)]
            assert got == spans, f"length {n}"

        rng = random.Random(2024)
        alphabet = "abcdefgh .\n"
        for _ in range(500):
            text = corpus.clean("".join(rng.choice(alphabet)
                                        for _ in range(rng.randrange(0, 3500))))
            chunks = corpus.chunk_page(text, 800, 80)
            covered = set()
            for (s, e), ctext in chunks:
                assert 1 <= len(ctext) <= 800
                assert text[s:e] == ctext
                covered.update(range(s, e))
            assert covered == set(range(len(text)))


def test_criterion_3_vector_store():
    with criterion(3, "top-k equals brute force on 1,000 vectors; idempotent upsert; exact roundtrip"):
        rng = np.random.default_rng(99)
        dim = 24
        entries = [StoredEntry(make_chunk(i, f"chunk {i}"), rng.normal(size=dim))
                   for i in range(1000)]
        store = VectorStore(dim=dim)
        assert store.upsert(entries) == 1000
        assert store.upsert(entries) == 0, "second identical batch adds nothing"

        def brute(query, k):
            scored = []
            for e in entries:
                dot = sum(a * b for a, b in zip(e.vector, query))
                nu = math.sqrt(sum(a * a for a in e.vector))
                nv = math.sqrt(sum(b * b for b in query))
                scored.append((e.chunk.id, dot / (nu * nv)))
            scored.sort(key=lambda t: (-t[1], t[0]))
            return scored[:k]

        queries = [rng.normal(size=dim) for _ in range(10)]
        for query in queries:
            for k in (1, 5, 10):
                got = store.top_k(query, k)
                want = brute(query, k)
                assert [h.chunk_id for h in got] == [w[0] for w in want]
                for h, w in zip(got, want):
                    assert h.score == pytest.approx(w[1], abs=1e-9)

        import tempfile
        from pathlib import Path
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "store.jsonl"
            store.persist(path)
            loaded = VectorStore.load(path)
            for query in queries:
                for k in (1, 5, 10):
                    assert store.top_k(query, k) == loaded.top_k(query, k), \
                        "persist/load must leave results bit-identical"


def test_criterion_4_rag_end_to_end_offline():
    with criterion(4, "offline RAG: self-retrieval at 1.0, prompts carry context, NC carries none"):
        start = time.perf_counter()
        texts = [f"manual entry {i}: hold button{i} for ten seconds" for i in range(25)]
        store = VectorStore(dim=256)
        chunks = [make_chunk(i, t) for i, t in enumerate(texts)]
        store.upsert([StoredEntry(c, v) for c, v in zip(chunks, EMB.embed(texts))])
        pipeline = RagPipeline(store, EMB, EchoGenerator())

        record = pipeline.answer(QueryRequest(question=texts[7], mode=Mode.WC, k=1))
        assert record.retrieved[0].chunk_id == chunks[7].id
        assert record.retrieved[0].score == pytest.approx(1.0, abs=1e-9)

        for q in (texts[3], "hold button4 ten seconds", "anything else"):
            wc = pipeline.answer(QueryRequest(question=q, mode=Mode.WC, k=4))
            for hit in wc.retrieved:
                assert store.get_chunk(hit.chunk_id).text in wc.prompt, \
                    "every retrieved chunk text must appear verbatim in the prompt"
            nc = pipeline.answer(QueryRequest(question=q, mode=Mode.NC))
            assert nc.retrieved == ()
            assert "context" not in nc.prompt.split("Question:")[0]
            assert nc.prompt == f"Question: {q}\nAnswer:"
        assert time.perf_counter() - start < 120.0


# per-class sizes of the synthetic traffic fixture; the test split at 0.8
# must reproduce these divided by five
CLASS_SIZES = {
    "Normal": 24925, "MITM": 1275, "Fingerprinting": 985, "Ransomware": 10305,
    "Uploading": 10075, "SQL_Injection": 10445, "DDoS_HTTP": 10645,
    "DDoS_TCP": 9805, "Password": 9865, "Port_Scanning": 10640,
    "Vul_Scanner": 10045, "Backdoor": 9865, "XSS": 10225,
    "DDoS_UDP": 14520, "DDoS_ICMP": 14180,
}


def synthetic_traffic_table():
    rows = []
    i = 0
    for cls, n in CLASS_SIZES.items():
        for _ in range(n):
            rows.append((f"f{i % 7}", cls))
            i += 1
    return flows.FlowTable(columns=[("feat", flows.CATEGORICAL),
                                    ("Attack_type", flows.CATEGORICAL)],
                           rows=rows, label_column="Attack_type")


def test_criterion_5_split_arithmetic():
    with criterion(5, "157,800 rows split 0.8 into exactly 126,240/31,560, stratified, deterministic"):
        table = synthetic_traffic_table()
        assert len(table) == 157_800
        train, test = flows.split(table, ratio=0.8, seed=42)
        assert (len(train), len(test)) == (126_240, 31_560)

        from collections import Counter
        train_counts = Counter(train.labels())
        for cls, n in CLASS_SIZES.items():
            assert abs(train_counts[cls] - 0.8 * n) <= 1.0, cls

        train2, test2 = flows.split(table, ratio=0.8, seed=42)
        assert train.rows == train2.rows and test.rows == test2.rows

        # jagged counts exercise the remainder rounding
        jagged = flows.FlowTable(
            columns=table.columns,
            rows=[("x", "A")] * 7 + [("y", "B")] * 6 + [("z", "C")] * 5,
            label_column="Attack_type")
        jtrain, jtest = flows.split(jagged, ratio=0.8, seed=1)
        assert len(jtrain) + len(jtest) == 18
        assert len(jtrain) == round(0.8 * 18)
        jcounts = Counter(jtrain.labels())
        for cls, n in (("A", 7), ("B", 6), ("C", 5)):
            assert abs(jcounts[cls] - 0.8 * n) <= 1.0


def test_criterion_6_classification_evaluation():
    with criterion(6, "report aggregates at 1e-9, AUC pair-count exact, NB perfect on separable set"):
        rng = random.Random(404)

        # AUC equals brute-force pair counting on 100 random small instances
        def brute_auc(scores, positives):
            wins = ties = total = 0
            for s, p in zip(scores, positives):
                if not p:
                    continue
                for t, q in zip(scores, positives):
                    if q:
                        continue
                    total += 1
                    if s > t:
                        wins += 1
                    elif s == t:
                        ties += 1
            return (2 * wins + ties) / (2 * total)

        for _ in range(100):
            n = rng.randint(2, 20)
            scores = [rng.choice([0.0, 0.2, 0.4, 0.6, 0.8, 1.0]) for _ in range(n)]
            labels = [rng.random() < 0.5 for _ in range(n)]
            if not any(labels):
                labels[0] = True
            if all(labels):
                labels[-1] = False
            assert classify.roc_auc_binary(scores, labels) == brute_auc(scores, labels)

        # NB reaches 100% on a 5-class dataset with class-disjoint vocabularies
        train_rows, test_rows = [], []
        for ci in range(5):
            vocab = [f"c{ci}tok{j}" for j in range(5)]
            for r in range(30):
                text = " ".join(rng.choice(vocab) for _ in range(6))
                row = flows.TextualizedRow(text, f"class{ci}")
                (train_rows if r < 20 else test_rows).append(row)
        model = classify.train_nb(train_rows)
        preds = classify.classify_rows(model, [r.text for r in test_rows])
        golds = [r.label for r in test_rows]
        report = classify.evaluate(preds, golds, model.classes)
        assert report.accuracy == pytest.approx(100.0, abs=1e-12)

        # aggregates recomputed independently from the confusion matrix
        mixed_preds, mixed_golds = [], []
        classes = sorted(CLASS_SIZES)
        for _ in range(3000):
            gold = rng.choice(classes)
            guess = gold if rng.random() < 0.9 else rng.choice(classes)
            probs = {c: (0.85 if c == guess else 0.15 / (len(classes) - 1))
                     for c in classes}
            mixed_preds.append(classify.Prediction(guess, probs))
            mixed_golds.append(gold)
        rep = classify.evaluate(mixed_preds, mixed_golds, classes)
        n = len(classes)
        total = len(mixed_golds)
        acc = 100.0 * sum(rep.confusion[i][i] for i in range(n)) / total
        assert rep.accuracy == pytest.approx(acc, abs=1e-9)
        macro_f1 = weighted_f1 = 0.0
        for i, c in enumerate(classes):
            support = sum(rep.confusion[i])
            predicted = sum(rep.confusion[r][i] for r in range(n))
            tp = rep.confusion[i][i]
            p = 100.0 * tp / predicted if predicted else 0.0
            r = 100.0 * tp / support if support else 0.0
            f1 = 2 * p * r / (p + r) if p + r else 0.0
            macro_f1 += f1 / n
            weighted_f1 += f1 * support / total
        assert rep.macro_avg[2] == pytest.approx(macro_f1, abs=1e-9)
        assert rep.weighted_avg[2] == pytest.approx(weighted_f1, abs=1e-9)

        # the 15-class report validates against the serialized schema
        payload = rep.to_json()
        classify.validate_report(payload)
        assert len(payload["classes"]) == 15 and "Normal" in payload["classes"]
        assert "weighted_avg" in payload


def test_criterion_7_resource_metrics():
    with criterion(7, "byte counts match an independent encoder; means bounded; WC prompts longer"):
        def manual_utf8_len(s):
            total = 0
            for ch in s:
                cp = ord(ch)
                if cp < 0x80:
                    total += 1
                elif cp < 0x800:
                    total += 2
                elif cp < 0x10000:
                    total += 3
                else:
                    total += 4
            return total

        rng = random.Random(777)
        pool = list(range(0x20, 0x7F)) + [0xE9, 0x3B1, 0x4E2D, 0x1F600, 0x2603]
        for _ in range(1000):
            s = "".join(chr(rng.choice(pool)) for _ in range(rng.randrange(0, 50)))
            assert resources.metrics_for(s, 0.0).response_bytes == manual_utf8_len(s)

        texts = [f"guide {i}: rotate key{i} then restart hub{i}" for i in range(10)]
        store = VectorStore(dim=256)
        chunks = [make_chunk(i, t) for i, t in enumerate(texts)]
        store.upsert([StoredEntry(c, v) for c, v in zip(chunks, EMB.embed(texts))])
        pipeline = RagPipeline(store, EMB, EchoGenerator())
        qa = [QaPair(id=f"q{i}", use_case=None, question=texts[i], reference=texts[i])
              for i in range(10)]
        nc_results = pipeline.run_benchmark(qa, Mode.NC)
        wc_results = pipeline.run_benchmark(qa, Mode.WC, k=2)
        for (nc_rec, _), (wc_rec, _) in zip(nc_results, wc_results):
            assert len(wc_rec.prompt.split()) > len(nc_rec.prompt.split()), \
                "per pair, the WC prompt must carry more tokens than NC"

        rows = resources.aggregate([r for r, _ in nc_results + wc_results])
        for row in rows:
            recs = [r for r, _ in nc_results + wc_results
                    if (r.model, r.request.mode.value) == (row.model, row.mode)]
            times = [r.metrics.execution_time_s for r in recs]
            assert min(times) - 1e-12 <= row.mean_execution_time_s <= max(times) + 1e-12
        as_json = [row.to_json() for row in rows]
        for cell in as_json:
            assert cell["memory_usage_mb"] == "n/a"
            assert cell["gpu_utilization_pct"] == "n/a"


def test_criterion_8_wc_beats_nc_with_echo():
    with criterion(8, "echo benchmark: every WC metric mean strictly above its NC mean on 20 pairs"):
        pairs = []
        texts = []
        for i in range(20):
            reference = (f"restart device{i} model{i} then hold the pair "
                         f"button on device{i} until the ring glows")
            question = f"device{i} model{i} will not respond what should i do"
            texts.append(reference)
            pairs.append(QaPair(id=f"q{i}", use_case="troubleshooting",
                                question=question, reference=reference))
        store = VectorStore(dim=256)
        chunks = [make_chunk(i, t, source="kb.txt") for i, t in enumerate(texts)]
        store.upsert([StoredEntry(c, v) for c, v in zip(chunks, EMB.embed(texts))])
        pipeline = RagPipeline(store, EMB, EchoGenerator())

        def mean_metrics(results):
            rows = [tm.score_pair(rec.answer, ref, EMB) for rec, ref in results]
            return tm.mean_scores(rows)

        nc = mean_metrics(pipeline.run_benchmark(pairs, Mode.NC))
        wc = mean_metrics(pipeline.run_benchmark(pairs, Mode.WC, k=1))

        assert wc["bleu"] > nc["bleu"]
        assert wc["meteor"] > nc["meteor"]
        for key in ("bert", "rouge1", "rouge2", "rougeL"):
            assert wc[key]["f"] > nc[key]["f"], key

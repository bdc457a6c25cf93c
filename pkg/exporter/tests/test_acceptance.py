"""Release gate for the exporter: a 50-sentence corpus through a small local
model must yield a store the skillex side fully validates, with one vector
per token, and repeated runs must be bitwise identical within five minutes.
"""

import time

from skillex.corpus import parse_conll
from skillex.embeddings import store_read

from skillex_exporter.encode import ExportJob, export_contextual


def test_exporter_contract(tiny_model, corpus_file, tmp_path):
    start = time.perf_counter()
    dataset = parse_conll(corpus_file)
    assert len(dataset.sentences) == 50

    outs = []
    for name in ("run-a", "run-b"):
        out = tmp_path / name
        job = ExportJob(model=tiny_model, out=out, pooling="first-subword", batch_size=8)
        export_contextual(job, [dataset])
        outs.append(out)

    store = store_read(outs[0])  # validates magic, dim, count, coverage
    for sent in dataset.sentences:
        assert sum(1 for i in range(len(sent)) if (sent.id, i) in store.index) == len(sent)
    assert len(store) == sum(len(s) for s in dataset.sentences)

    for name in ("meta.json", "index.jsonl", "vectors.f32"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()

    elapsed = time.perf_counter() - start
    assert elapsed < 300, f"took {elapsed:.1f}s, budget 300s"

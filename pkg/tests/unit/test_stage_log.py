from __future__ import annotations

import numpy as np

from vacqrng.storage.jsonl import JsonlStageLog


def test_append_and_read_back(tmp_path):
    path = tmp_path / "run" / "stages.jsonl"
    with JsonlStageLog(path=path) as log:
        log.append({"stage": "source", "status": "done", "n": np.int64(3)})
        log.append({"status": "failed", "stage": "filter"})

    lines = path.read_bytes().splitlines()
    assert lines[0] == b'{"n":3,"stage":"source","status":"done"}'
    recs = JsonlStageLog(path=path).records()
    assert [r["stage"] for r in recs] == ["source", "filter"]


def test_appends_across_opens(tmp_path):
    path = tmp_path / "stages.jsonl"
    for k in range(3):
        log = JsonlStageLog(path=path, fsync=True)
        log.append({"k": k})
        log.close()
    assert [r["k"] for r in JsonlStageLog(path=path).records()] == [0, 1, 2]


def test_missing_file_has_no_records(tmp_path):
    assert JsonlStageLog(path=tmp_path / "x.jsonl").records() == []

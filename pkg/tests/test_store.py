import pytest

from swegsa.campaign.store import DONE, FAILED, RUNNING, RecordLog, RunRecord


def test_round_trip_and_latest(tmp_path):
    path = tmp_path / "log.jsonl"
    with RecordLog(path) as log:
        log.append(RunRecord("A-00000", RUNNING, "abc"))
        log.append(RunRecord("A-00000", DONE, "abc", {"y": 1.5, "m": "maps/A-00000.m.asc"}, 2.0))
        log.append(RunRecord("A-00001", FAILED, "def", error="NonFiniteError: nan", attempt=1))
    records = RecordLog(path).read()
    assert len(records) == 3
    latest = RecordLog(path).latest()
    assert latest["A-00000"].status == DONE and latest["A-00000"].outputs["y"] == 1.5
    assert latest["A-00001"].error.startswith("NonFiniteError")
    assert RunRecord.from_json(records[1].to_json()) == records[1]


def test_missing_log_is_empty(tmp_path):
    assert RecordLog(tmp_path / "none.jsonl").read() == []


def test_torn_final_line_is_ignored_and_cut(tmp_path):
    path = tmp_path / "log.jsonl"
    with RecordLog(path) as log:
        log.append(RunRecord("A-00000", DONE, "abc", {"y": 1.0}, 1.0))
    with open(path, "a") as fh:
        fh.write('{"run_id": "A-00001", "sta')
    assert [r.run_id for r in RecordLog(path).read()] == ["A-00000"]
    with RecordLog(path) as log:
        log.append(RunRecord("A-00001", DONE, "def", {"y": 2.0}, 1.0))
    assert [r.run_id for r in RecordLog(path).read()] == ["A-00000", "A-00001"]
    assert path.read_text().count("\n") == 2


def test_corrupt_middle_line_raises(tmp_path):
    path = tmp_path / "log.jsonl"
    path.write_text('{"bad\n' + RunRecord("A-00000", DONE, "x").to_json() + "\n")
    with pytest.raises(ValueError, match=":1:"):
        RecordLog(path).read()


def test_invalid_status():
    with pytest.raises(ValueError):
        RunRecord("A-00000", "Finished", "x")
